//! Acceptance suite: ten end-to-end criteria covering operator correctness,
//! solver equivalences, desk-scale convergence, the quasi-Fejér monitor, the
//! assumption checkers, the schedule gate, and a summable-step negative
//! control. Each test finishes with a single PASS line (visible under
//! `--nocapture`); a failed assertion is the FAIL line.

use stochprox::apps::{
    classification_reference, feasibility_reference, make_classification_problem,
    make_feasibility_problem, Cohort, FeasibilitySpec, LabeledSample,
};
use stochprox::core::{RngStream, StepSchedule, Vector};
use stochprox::diagnostics::{fejer_monitor, finite_diff_grad_check, replicate, Algorithm};
use stochprox::operators::{
    hinge_oracle, logistic_lipschitz, logistic_oracle, sqdist_oracle, ConvexSet,
};
use stochprox::selftest::run_selftest_with_trials;
use stochprox::solvers::{check_assumption1, check_psi_bound, fb_run, spg_run, SolverConfig};
use stochprox::Error;

fn v(c: &[f64]) -> Vector {
    Vector::new(c.to_vec()).unwrap()
}

fn rand_vec(rng: &mut RngStream, dim: usize, scale: f64) -> Vector {
    let mut coords = Vec::with_capacity(dim);
    for _ in 0..dim {
        let (u, next) = rng.next_f64();
        *rng = next;
        coords.push((u - 0.5) * 2.0 * scale);
    }
    v(&coords)
}

fn feasibility_desk() -> FeasibilitySpec {
    FeasibilitySpec {
        c: ConvexSet::WholeSpace,
        sets: vec![
            ConvexSet::interval(-2.0, -1.0).unwrap(),
            ConvexSet::interval(1.0, 2.0).unwrap(),
        ],
        weights: vec![1.0, 1.0],
    }
}

fn classification_desk() -> Vec<LabeledSample> {
    vec![
        LabeledSample::new(v(&[1.0, 1.0]), 1.0, Cohort::Noisy).unwrap(),
        LabeledSample::new(v(&[1.0, -1.0]), -1.0, Cohort::Noisy).unwrap(),
        LabeledSample::new(v(&[1.0, 0.0]), 1.0, Cohort::Clean).unwrap(),
        LabeledSample::new(v(&[0.0, 1.0]), -1.0, Cohort::Clean).unwrap(),
    ]
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

#[test]
fn criterion_01_operator_oracle_equivalence() {
    let report = run_selftest_with_trials(100, false);
    for check in &report.checks {
        assert!(check.passed, "{}: {}", check.name, check.detail);
    }
    println!(
        "criterion 1 PASS: {} operator checks agree with the brute-force oracle \
         within 1e-5 over 100 random inputs each",
        report.checks.len()
    );
}

#[test]
fn criterion_02_gradient_correctness() {
    let mut rng = RngStream::new(0xACCE_0002, 0);

    let logistic = logistic_oracle(0.35, v(&[0.8, -0.5]), 1.0);
    let points: Vec<Vector> = (0..100).map(|_| rand_vec(&mut rng, 2, 3.0)).collect();
    let worst_logistic = finite_diff_grad_check(&logistic, &points, 1e-5);
    assert!(
        worst_logistic <= 1e-5,
        "logistic grad fd error {worst_logistic:.3e}"
    );

    // squared distance to a ball; keep test points away from the boundary
    // where the gradient has a kink in its derivative
    let set = ConvexSet::ball(v(&[0.5, -0.5]), 1.0).unwrap();
    let sq = sqdist_oracle(set.clone());
    let mut sq_points = Vec::new();
    while sq_points.len() < 100 {
        let x = rand_vec(&mut rng, 2, 3.0);
        let boundary_gap = (x.dist(&v(&[0.5, -0.5])) - 1.0).abs();
        if boundary_gap >= 1e-3 {
            sq_points.push(x);
        }
    }
    let worst_sq = finite_diff_grad_check(&sq, &sq_points, 1e-6);
    assert!(worst_sq <= 1e-5, "sqdist grad fd error {worst_sq:.3e}");

    println!(
        "criterion 2 PASS: logistic and sqdist gradients match central differences \
         (worst rel errors {worst_logistic:.2e}, {worst_sq:.2e})"
    );
}

#[test]
fn criterion_03_lipschitz_certificate() {
    let mut rng = RngStream::new(0xACCE_0003, 0);

    let alpha = 0.4;
    let u = v(&[1.3, -0.7]);
    let logistic = logistic_oracle(alpha, u.clone(), -1.0);
    let beta_logistic = logistic_lipschitz(alpha, &u);
    assert!((beta_logistic - (1.0 - alpha) / 4.0 * u.norm_sq()).abs() < 1e-15);

    let set = ConvexSet::interval(-2.0, -1.0).unwrap();
    let sq = sqdist_oracle(set);
    for _ in 0..500 {
        let x = rand_vec(&mut rng, 2, 4.0);
        let y = rand_vec(&mut rng, 2, 4.0);
        if x.dist(&y) < 1e-9 {
            continue;
        }
        let ratio = (&logistic.grad(&x) - &logistic.grad(&y)).norm() / x.dist(&y);
        assert!(
            ratio <= beta_logistic * (1.0 + 1e-9),
            "logistic ratio {ratio} > beta {beta_logistic}"
        );
        let x1 = rand_vec(&mut rng, 1, 4.0);
        let y1 = rand_vec(&mut rng, 1, 4.0);
        if x1.dist(&y1) < 1e-9 {
            continue;
        }
        let ratio1 = (&sq.grad(&x1) - &sq.grad(&y1)).norm() / x1.dist(&y1);
        assert!(ratio1 <= 1.0 + 1e-9, "sqdist ratio {ratio1} > 1");
    }
    println!(
        "criterion 3 PASS: empirical gradient ratios stay below beta on 500 random pairs \
         (logistic beta {beta_logistic:.6}, sqdist beta 1)"
    );
}

#[test]
fn criterion_04_degenerate_law_bit_equality() {
    // single-atom law: the stochastic solver must reproduce the deterministic
    // forward-backward trajectory exactly, not merely approximately
    let alpha = 0.5;
    let f = hinge_oracle(alpha, v(&[0.6, -0.8]), 1.0);
    let g = logistic_oracle(alpha, v(&[1.0, 0.5]), -1.0);
    let dist = stochprox::core::make_finite_distribution(
        vec![stochprox::core::ComponentPair::new(f.clone(), g.clone(), "atom")],
        vec![1.0],
    )
    .unwrap();

    let budget = 1000;
    let schedule = StepSchedule::power(1.0, 1.0).unwrap();
    let x0 = v(&[2.0, -1.0]);
    let cfg = SolverConfig::new(schedule.clone(), budget, RngStream::new(42, 0), x0.clone());
    let stochastic = spg_run(&dist, &cfg).unwrap();
    let deterministic = fb_run(&f, &g, &schedule, budget, &x0, 1).unwrap();

    assert_eq!(stochastic.iterates.len(), deterministic.iterates.len());
    for ((n_s, xs), (n_d, xd)) in stochastic.iterates.iter().zip(&deterministic.iterates) {
        assert_eq!(n_s, n_d);
        for i in 0..xs.dim() {
            assert_eq!(
                xs[i].to_bits(),
                xd[i].to_bits(),
                "iterate {n_s} coordinate {i} differs"
            );
        }
    }
    println!(
        "criterion 4 PASS: single-atom stochastic run equals forward-backward \
         to 0 ulp over {budget} iterations"
    );
}

#[test]
fn criterion_05_feasibility_convergence() {
    let spec = feasibility_desk();
    let dist = make_feasibility_problem(&spec).unwrap();
    let reference = feasibility_reference(&spec).unwrap();
    assert!(reference.agreed);
    let z_bar = reference.z_bar.clone();

    let budget = 100_000;
    let cfg = SolverConfig::new(
        StepSchedule::power(1.0, 1.0).unwrap(),
        budget,
        RngStream::new(0xACCE_0005, 0),
        v(&[0.5]),
    )
    .with_record_every(1000)
    .with_reference(z_bar.clone());

    let phi_ref = dist.objective(&z_bar);
    let (stats, run_min_gaps) = replicate(
        &dist,
        &cfg,
        Algorithm::Spg,
        100,
        0xACCE_0005,
        None,
        |_, record| {
            record
                .objective_trace
                .iter()
                .map(|(_, phi)| phi - phi_ref)
                .fold(f64::INFINITY, f64::min)
        },
    )
    .unwrap();
    assert!(stats.failures.is_empty());

    let mut final_dists: Vec<f64> = stats.finals.iter().map(|x| x.dist(&z_bar)).collect();
    let med = median(&mut final_dists);
    assert!(med <= 0.05, "median |x_N| = {med}");

    let initial_gap = dist.objective(&v(&[0.5])) - phi_ref;
    let mut run_min_gaps = run_min_gaps;
    let med_min_gap = median(&mut run_min_gaps);
    assert!(
        med_min_gap <= 1e-3 * initial_gap,
        "running-min gap {med_min_gap} vs 1e-3 * {initial_gap}"
    );
    println!(
        "criterion 5 PASS: feasibility desk problem, median |x_N| = {med:.2e} <= 0.05, \
         running-min gap {med_min_gap:.2e} <= 1e-3 of initial {initial_gap:.3}"
    );
}

#[test]
fn criterion_06_classification_convergence() {
    let samples = classification_desk();
    let dist = make_classification_problem(&samples, 0.5).unwrap();
    let reference = classification_reference(&samples, 0.5).unwrap();
    assert!(
        reference.agreed,
        "multi-start spread {}",
        reference.start_spread
    );
    let z_bar = reference.z_bar.clone();

    let budget = 100_000;
    let cfg = SolverConfig::new(
        StepSchedule::power(10.0, 1.0).unwrap(),
        budget,
        RngStream::new(0xACCE_0006, 0),
        Vector::zeros(2),
    )
    .with_record_every(10_000)
    .with_reference(z_bar.clone());

    let (stats, _) = replicate(&dist, &cfg, Algorithm::Spg, 100, 0xACCE_0006, None, |_, _| ())
        .unwrap();
    assert!(stats.failures.is_empty());
    let mut final_dists: Vec<f64> = stats.finals.iter().map(|x| x.dist(&z_bar)).collect();
    let med = median(&mut final_dists);
    assert!(med <= 0.05, "median ||x_N - z_bar|| = {med}");
    println!(
        "criterion 6 PASS: classification desk problem, median ||x_N - z_bar|| = {med:.2e} \
         <= 0.05 (multi-start spread {:.1e})",
        reference.start_spread
    );
}

#[test]
fn criterion_07_fejer_monitor() {
    let budget = 100_000;
    let replications = 1000;
    let mut total_checks = 0;

    // feasibility desk problem
    let spec = feasibility_desk();
    let dist = make_feasibility_problem(&spec).unwrap();
    let reference = feasibility_reference(&spec).unwrap();
    let assumption =
        check_assumption1(&dist, &reference.z_bar, &reference.subgradients, 1e-8).unwrap();
    let cfg = SolverConfig::new(
        StepSchedule::power(1.0, 1.0).unwrap(),
        budget,
        RngStream::new(0xACCE_0007, 0),
        v(&[0.5]),
    )
    .with_record_every(budget)
    .with_reference(reference.z_bar.clone());
    let (stats, _) = replicate(
        &dist,
        &cfg,
        Algorithm::Spg,
        replications,
        0xACCE_0007,
        None,
        |_, _| (),
    )
    .unwrap();
    let report = fejer_monitor(
        &stats,
        &cfg.schedule,
        dist.beta(),
        assumption.second_moment,
        3.0,
    )
    .unwrap();
    assert_eq!(
        report.violation_count, 0,
        "feasibility: {:?}",
        report.checks.iter().filter(|c| c.violated).collect::<Vec<_>>()
    );
    total_checks += report.checks.len();

    // classification desk problem
    let samples = classification_desk();
    let dist_c = make_classification_problem(&samples, 0.5).unwrap();
    let reference_c = classification_reference(&samples, 0.5).unwrap();
    let assumption_c =
        check_assumption1(&dist_c, &reference_c.z_bar, &reference_c.subgradients, 1e-8).unwrap();
    let cfg_c = SolverConfig::new(
        StepSchedule::power(10.0, 1.0).unwrap(),
        budget,
        RngStream::new(0xACCE_0017, 0),
        Vector::zeros(2),
    )
    .with_record_every(budget)
    .with_reference(reference_c.z_bar.clone());
    let (stats_c, _) = replicate(
        &dist_c,
        &cfg_c,
        Algorithm::Spg,
        replications,
        0xACCE_0017,
        None,
        |_, _| (),
    )
    .unwrap();
    let report_c = fejer_monitor(
        &stats_c,
        &cfg_c.schedule,
        dist_c.beta(),
        assumption_c.second_moment,
        3.0,
    )
    .unwrap();
    assert_eq!(
        report_c.violation_count, 0,
        "classification: {:?}",
        report_c
            .checks
            .iter()
            .filter(|c| c.violated)
            .collect::<Vec<_>>()
    );
    total_checks += report_c.checks.len();

    // injected fault: inflate one checkpoint's distances beyond what the
    // recursion permits; the monitor must flag it
    let mut corrupted = stats;
    if let Some(rows) = corrupted.per_rep_dist.as_mut() {
        let mid = corrupted.checkpoints.len() / 2;
        for row in rows.iter_mut() {
            row[mid] = row[mid] * 10.0 + 5.0;
        }
    }
    let faulty = fejer_monitor(
        &corrupted,
        &cfg.schedule,
        dist.beta(),
        assumption.second_moment,
        3.0,
    )
    .unwrap();
    assert!(faulty.violation_count > 0, "injected fault went unflagged");

    println!(
        "criterion 7 PASS: zero violations across {total_checks} checkpoint pairs at R=1000 \
         on both desk problems; injected fault flagged ({} violations)",
        faulty.violation_count
    );
}

#[test]
fn criterion_08_assumption_checkers() {
    // feasibility: subgradient of the indicator of R^N is 0; psi from the
    // mean squared distance at the origin
    let spec = feasibility_desk();
    let dist = make_feasibility_problem(&spec).unwrap();
    let reference = feasibility_reference(&spec).unwrap();
    let report =
        check_assumption1(&dist, &reference.z_bar, &reference.subgradients, 1e-8).unwrap();
    assert!(
        !report.flagged,
        "feasibility mean residual {:.3e}",
        report.mean_norm
    );

    let mean_sqdist_at_zero: f64 = dist
        .pairs()
        .iter()
        .zip(dist.weights())
        .map(|(pair, w)| w * 2.0 * pair.g.value(&Vector::zeros(1)))
        .sum();
    let psi_feas = move |t: f64| 2.0f64.max(2.0 * mean_sqdist_at_zero) * (1.0 + t * t);
    let grid: Vec<Vector> = (0..100).map(|i| v(&[-3.0 + 6.0 * i as f64 / 99.0])).collect();
    let psi_report = check_psi_bound(&dist, &psi_feas, &grid).unwrap();
    assert!(
        psi_report.violations.is_empty(),
        "feasibility psi violations: {:?}",
        psi_report.violations
    );

    // classification: constant psi equal to the uniform bound
    // (alpha max||u_i|| + (1 - alpha) max||u_j||)^2
    let samples = classification_desk();
    let alpha = 0.5;
    let dist_c = make_classification_problem(&samples, alpha).unwrap();
    let reference_c = classification_reference(&samples, alpha).unwrap();
    let report_c =
        check_assumption1(&dist_c, &reference_c.z_bar, &reference_c.subgradients, 1e-8).unwrap();
    assert!(
        !report_c.flagged,
        "classification mean residual {:.3e}",
        report_c.mean_norm
    );

    let max_noisy = 2.0f64.sqrt();
    let max_clean = 1.0;
    let uniform = (alpha * max_noisy + (1.0 - alpha) * max_clean).powi(2);
    let psi_cls = move |_t: f64| uniform;
    let mut grid2 = Vec::with_capacity(100);
    for i in 0..10 {
        for j in 0..10 {
            grid2.push(v(&[
                -3.0 + 6.0 * i as f64 / 9.0,
                -3.0 + 6.0 * j as f64 / 9.0,
            ]));
        }
    }
    let psi_report_c = check_psi_bound(&dist_c, &psi_cls, &grid2).unwrap();
    assert!(
        psi_report_c.violations.is_empty(),
        "classification psi violations: {:?}",
        psi_report_c.violations
    );

    // a deliberately tiny psi must be violated off the stationary set
    let psi_zero = |_t: f64| 0.0;
    let zero_report = check_psi_bound(&dist, &psi_zero, &grid).unwrap();
    assert!(!zero_report.violations.is_empty());

    println!(
        "criterion 8 PASS: mean stationarity residuals {:.1e} (feasibility) and {:.1e} \
         (classification) <= 1e-8; zero psi-bound violations on 100-point grids",
        report.mean_norm, report_c.mean_norm
    );
}

#[test]
fn criterion_09_schedule_gate() {
    let spec = feasibility_desk();
    let dist = make_feasibility_problem(&spec).unwrap();

    for p in [0.4, 1.5] {
        let cfg = SolverConfig::new(
            StepSchedule::power(1.0, p).unwrap(),
            100,
            RngStream::new(1, 0),
            v(&[0.5]),
        );
        match spg_run(&dist, &cfg) {
            Err(Error::ScheduleNotRobbinsMonro { .. }) => {}
            other => panic!("p = {p} not rejected: {:?}", other.map(|_| ())),
        }
    }
    for p in [0.51, 0.75, 1.0] {
        let cfg = SolverConfig::new(
            StepSchedule::power(1.0, p).unwrap(),
            100,
            RngStream::new(1, 0),
            v(&[0.5]),
        );
        spg_run(&dist, &cfg).unwrap_or_else(|e| panic!("p = {p} rejected: {e}"));
    }
    println!(
        "criterion 9 PASS: exponents 0.4 and 1.5 rejected, 0.51 / 0.75 / 1.0 accepted"
    );
}

#[test]
fn criterion_10_summable_steps_stall() {
    // Sum of gamma_n = 0.1 / (n+1)^1.5 is about 0.261; each update moves at
    // most gamma_n * sup||x - proj(x)||, so the iterate cannot traverse the
    // distance 5 to the minimizer and must stall far away.
    let spec = feasibility_desk();
    let dist = make_feasibility_problem(&spec).unwrap();
    let budget = 100_000;
    let mut cfg = SolverConfig::new(
        StepSchedule::power(0.1, 1.5).unwrap(),
        budget,
        RngStream::new(0xACCE_000A, 0),
        v(&[5.0]),
    )
    .with_record_every(budget)
    .with_override();
    cfg.reference = Some(Vector::zeros(1));

    let (stats, _) = replicate(&dist, &cfg, Algorithm::Spg, 100, 0xACCE_000A, None, |_, _| ())
        .unwrap();
    assert!(stats.failures.is_empty());
    let mut finals: Vec<f64> = stats.finals.iter().map(|x| x[0].abs()).collect();
    let med = median(&mut finals);
    assert!(med >= 1.0, "median |x_N| = {med}, expected a stall >= 1");
    println!(
        "criterion 10 PASS: summable schedule stalls at median |x_N| = {med:.3} >= 1"
    );
}

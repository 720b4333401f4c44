//! Property-based invariants for operators, schedules, and the sampler.

use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use stochprox::core::{
    make_finite_distribution, sample_component, validate_schedule, ComponentPair, ProxOracle,
    RngStream, ScheduleClass, SmoothOracle, StepSchedule, Vector,
};
use stochprox::operators::{
    hinge_oracle, hinge_prox, hinge_value, l1_oracle, logistic_oracle, project,
    quadratic_prox_oracle, ConvexSet,
};

fn v(c: &[f64]) -> Vector {
    Vector::new(c.to_vec()).unwrap()
}

fn finite_coord() -> impl Strategy<Value = f64> {
    -10.0..10.0f64
}

fn point2() -> impl Strategy<Value = Vector> {
    (finite_coord(), finite_coord()).prop_map(|(a, b)| v(&[a, b]))
}

/// prox_{gamma f}(x) minimizes gamma f(z) + (1/2)||x-z||^2: no sampled z may
/// do better than the returned point.
fn assert_prox_optimal(
    value: &dyn Fn(&Vector) -> f64,
    p: &Vector,
    gamma: f64,
    x: &Vector,
    candidates: &[Vector],
) {
    let objective = |z: &Vector| gamma * value(z) + 0.5 * (x - z).norm_sq();
    let at_p = objective(p);
    for z in candidates {
        assert!(
            at_p <= objective(z) + 1e-9 * (1.0 + at_p.abs()),
            "prox suboptimal: {at_p} > {} at {:?}",
            objective(z),
            z.coords()
        );
    }
}

proptest! {
    #[test]
    fn hinge_prox_is_optimal(
        x in point2(),
        gamma in 0.05..3.0f64,
        xi_pos in any::<bool>(),
        probe in proptest::collection::vec(point2(), 20),
    ) {
        let u = v(&[0.9, -0.4]);
        let xi = if xi_pos { 1.0 } else { -1.0 };
        let alpha = 0.6;
        let p = hinge_prox(alpha, &u, xi, gamma, &x);
        let value = |z: &Vector| hinge_value(alpha, &u, xi, z);
        // include points near the kink hyperplane <u, z> = xi
        assert_prox_optimal(&value, &p, gamma, &x, &probe);
        assert_prox_optimal(&value, &p, gamma, &x, &[p.clone()]);
    }

    #[test]
    fn l1_prox_is_optimal(
        x in point2(),
        gamma in 0.05..3.0f64,
        probe in proptest::collection::vec(point2(), 20),
    ) {
        let oracle = l1_oracle();
        let p = oracle.prox(gamma, &x);
        let value = |z: &Vector| oracle.value(z);
        assert_prox_optimal(&value, &p, gamma, &x, &probe);
    }

    #[test]
    fn quadratic_prox_is_optimal(
        x in point2(),
        gamma in 0.05..3.0f64,
        probe in proptest::collection::vec(point2(), 20),
    ) {
        let oracle = quadratic_prox_oracle(v(&[0.7, -1.1]));
        let p = oracle.prox(gamma, &x);
        let value = |z: &Vector| oracle.value(z);
        assert_prox_optimal(&value, &p, gamma, &x, &probe);
    }

    /// Projections are idempotent and firmly nonexpansive:
    /// ||Px - Py||^2 <= <Px - Py, x - y>.
    #[test]
    fn projections_idempotent_and_firmly_nonexpansive(
        x in point2(),
        y in point2(),
    ) {
        let sets = [
            ConvexSet::boxed(v(&[-1.0, 0.0]), v(&[1.0, 2.0])).unwrap(),
            ConvexSet::ball(v(&[0.5, -0.5]), 1.25).unwrap(),
            ConvexSet::halfspace(v(&[1.0, 2.0]), 0.5).unwrap(),
            ConvexSet::hyperplane(v(&[0.6, 0.8]), 0.3).unwrap(),
            ConvexSet::singleton(v(&[0.4, -1.2])),
        ];
        for set in &sets {
            let px = project(set, &x).unwrap();
            let ppx = project(set, &px).unwrap();
            prop_assert!(px.dist(&ppx) <= 1e-12 * (1.0 + px.norm()));

            let py = project(set, &y).unwrap();
            let lhs = (&px - &py).norm_sq();
            let rhs = (&px - &py).dot(&(&x - &y));
            prop_assert!(lhs <= rhs + 1e-9 * (1.0 + lhs));
        }
    }

    /// The hinge prox is continuous across both case boundaries in gamma.
    #[test]
    fn hinge_prox_continuous_in_inputs(
        x in point2(),
        gamma in 0.05..3.0f64,
        eps in 1e-9..1e-7f64,
    ) {
        let u = v(&[0.9, -0.4]);
        let alpha = 0.6;
        let a = hinge_prox(alpha, &u, 1.0, gamma, &x);
        let b = hinge_prox(alpha, &u, 1.0, gamma + eps, &x);
        prop_assert!(a.dist(&b) <= 1e-5, "jump {} at gamma {}", a.dist(&b), gamma);
    }

    /// Power schedules classify by the exponent alone.
    #[test]
    fn power_schedule_classification(gamma0 in 0.01..10.0f64, p in 0.01..3.0f64) {
        let schedule = StepSchedule::power(gamma0, p).unwrap();
        let expected = if p > 0.5 && p <= 1.0 {
            ScheduleClass::RobbinsMonro
        } else if p <= 0.5 {
            ScheduleClass::SquareSumDiverges
        } else {
            ScheduleClass::SumConverges
        };
        prop_assert_eq!(validate_schedule(&schedule), expected);
    }

    /// Steps are positive, decreasing, and match the closed form.
    #[test]
    fn power_schedule_steps(gamma0 in 0.01..10.0f64, p in 0.01..3.0f64, n in 0usize..10_000) {
        let schedule = StepSchedule::power(gamma0, p).unwrap();
        let step = schedule.step(n).unwrap();
        prop_assert!(step > 0.0);
        prop_assert!((step - gamma0 / ((n + 1) as f64).powf(p)).abs() <= 1e-15 * gamma0);
        if n > 0 {
            prop_assert!(step <= schedule.step(n - 1).unwrap());
        }
    }

    /// Same seed/stream replays identically; different streams diverge.
    #[test]
    fn rng_streams_replay(seed in any::<u64>(), stream in 0u64..1000) {
        let mut a = RngStream::new(seed, stream);
        let mut b = RngStream::new(seed, stream);
        for _ in 0..100 {
            let (ua, na) = a.next_f64();
            let (ub, nb) = b.next_f64();
            prop_assert_eq!(ua.to_bits(), ub.to_bits());
            a = na;
            b = nb;
        }
    }
}

/// The logistic gradient never exceeds its Lipschitz certificate on a
/// deterministic sweep (complements the randomized acceptance check).
#[test]
fn logistic_gradient_bounded_by_certificate() {
    let alpha = 0.3;
    let u = v(&[1.5, -0.5]);
    let g = logistic_oracle(alpha, u.clone(), 1.0);
    let beta = g.lipschitz();
    for i in 0..50 {
        for j in 0..50 {
            let x = v(&[-5.0 + 0.2 * i as f64, -5.0 + 0.2 * j as f64]);
            let y = v(&[-5.0 + 0.2 * j as f64, -5.0 + 0.2 * i as f64]);
            if x.dist(&y) < 1e-12 {
                continue;
            }
            let ratio = (&g.grad(&x) - &g.grad(&y)).norm() / x.dist(&y);
            assert!(ratio <= beta * (1.0 + 1e-9), "{ratio} > {beta}");
        }
    }
}

/// Chi-square goodness of fit: component draws across replication streams
/// follow the configured weights.
#[test]
fn sampler_matches_weights_chi_square() {
    let weights = [0.5, 0.3, 0.15, 0.05];
    let pairs = (0..weights.len())
        .map(|k| ComponentPair::new(ProxOracle::zero(), SmoothOracle::zero(), format!("c{k}")))
        .collect();
    let dist = make_finite_distribution(pairs, weights.to_vec()).unwrap();

    let n = 200_000usize;
    let mut counts = [0usize; 4];
    let mut rng = RngStream::new(0xC1A55, 7);
    for _ in 0..n {
        let (k, next) = sample_component(&dist, rng);
        rng = next;
        counts[k] += 1;
    }
    let chi2: f64 = counts
        .iter()
        .zip(&weights)
        .map(|(c, w)| {
            let expected = w * n as f64;
            (*c as f64 - expected).powi(2) / expected
        })
        .sum();
    // 3 degrees of freedom; reject only beyond the 99.9% quantile
    let critical = ChiSquared::new(3.0).unwrap().inverse_cdf(0.999);
    assert!(chi2 <= critical, "chi2 = {chi2:.3} > critical {critical:.3}");
}

/// Draws must be independent of the iterate path by construction: the k-th
/// draw of a stream is a pure function of (seed, stream, counter).
#[test]
fn sampler_is_counter_based() {
    let weights = [0.25, 0.75];
    let pairs = (0..2)
        .map(|k| ComponentPair::new(ProxOracle::zero(), SmoothOracle::zero(), format!("c{k}")))
        .collect();
    let dist = make_finite_distribution(pairs, weights.to_vec()).unwrap();

    // drawing 10 then 10 more equals drawing 20 straight
    let mut rng = RngStream::new(9, 3);
    let mut first = Vec::new();
    for _ in 0..20 {
        let (k, next) = sample_component(&dist, rng);
        rng = next;
        first.push(k);
    }
    let mut rng = RngStream::new(9, 3);
    let mut second = Vec::new();
    for _ in 0..10 {
        let (k, next) = sample_component(&dist, rng);
        rng = next;
        second.push(k);
    }
    for _ in 0..10 {
        let (k, next) = sample_component(&dist, rng);
        rng = next;
        second.push(k);
    }
    assert_eq!(first, second);
}

/// hinge_oracle and the free functions agree (factory wiring).
#[test]
fn hinge_oracle_wires_the_closed_forms() {
    let u = v(&[0.8, 0.6]);
    let oracle = hinge_oracle(0.45, u.clone(), -1.0);
    let x = v(&[1.2, -0.3]);
    assert_eq!(oracle.value(&x), hinge_value(0.45, &u, -1.0, &x));
    assert_eq!(
        oracle.prox(0.7, &x).coords(),
        hinge_prox(0.45, &u, -1.0, 0.7, &x).coords()
    );
    assert!(oracle.has_min_norm_subgrad());
}

//! Built-in verification suite: certifies every closed-form operator against
//! an independent brute-force prox oracle on randomized inputs and checks the
//! sampler against the degenerate single-atom law. Shared by the `selftest`
//! CLI subcommand and the test suite.

use crate::core::{make_finite_distribution, sample_component, ComponentPair, RngStream, Vector};
use crate::core::{ProxOracle, SmoothOracle};
use crate::operators::{
    brute_force_prox, hinge_prox, hinge_value, independent_sqdist, indicator_oracle, l1_oracle,
    project, quadratic_prox_oracle, ConvexSet,
};

pub struct SelftestReport {
    pub checks: Vec<CheckResult>,
}

pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl SelftestReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

const BRUTE_TOL: f64 = 1e-6;
const AGREE_TOL: f64 = 1e-5;

fn rand_vec(rng: &mut RngStream, dim: usize, scale: f64) -> Vector {
    let mut coords = Vec::with_capacity(dim);
    for _ in 0..dim {
        let (u, next) = rng.next_f64();
        *rng = next;
        coords.push((u - 0.5) * 2.0 * scale);
    }
    Vector::new(coords).expect("bounded draws are finite")
}

fn certify_prox(
    name: &str,
    value: &dyn Fn(&Vector) -> f64,
    closed: &dyn Fn(f64, &Vector) -> Vector,
    dim: usize,
    trials: usize,
    seed_stream: u64,
) -> CheckResult {
    let mut rng = RngStream::new(0x5E1F_7E57, seed_stream);
    let mut worst = 0.0f64;
    for t in 0..trials {
        let x = rand_vec(&mut rng, dim, 3.0);
        let (u, next) = rng.next_f64();
        rng = next;
        let gamma = 0.05 + 2.0 * u;
        let p = closed(gamma, &x);
        let lo = Vector::new(vec![-8.0; dim]).unwrap();
        let hi = Vector::new(vec![8.0; dim]).unwrap();
        match brute_force_prox(value, gamma, &x, &lo, &hi, BRUTE_TOL) {
            Ok(b) => {
                let err = p.dist(&b);
                worst = worst.max(err);
                if err > AGREE_TOL {
                    return CheckResult {
                        name: name.into(),
                        passed: false,
                        detail: format!(
                            "trial {t}: closed form disagrees with brute force by {err:.3e} \
                             (gamma={gamma:.4}, x={:?})",
                            x.coords()
                        ),
                    };
                }
            }
            Err(e) => {
                return CheckResult {
                    name: name.into(),
                    passed: false,
                    detail: format!("trial {t}: brute force failed: {e}"),
                }
            }
        }
    }
    CheckResult {
        name: name.into(),
        passed: true,
        detail: format!("{trials} randomized trials, worst deviation {worst:.3e}"),
    }
}

/// Certifies `project(set, .)` without ever calling it from the oracle side:
/// the brute force minimizes gamma*(1/2)d^2(z) + (1/2)||x - z||^2 using an
/// independent per-kind distance formula, whose exact minimizer is
/// (x + gamma P(x)) / (1 + gamma). The recovered projection
/// ((1 + gamma) z - x) / gamma is compared against the closed form.
fn certify_projection(
    name: &str,
    set: &ConvexSet,
    dim: usize,
    trials: usize,
    seed_stream: u64,
) -> CheckResult {
    let value = |z: &Vector| 0.5 * independent_sqdist(set, z);
    let mut rng = RngStream::new(0x5E1F_7E57, seed_stream);
    let mut worst = 0.0f64;
    for t in 0..trials {
        let x = rand_vec(&mut rng, dim, 3.0);
        let (u, next) = rng.next_f64();
        rng = next;
        // projections are gamma-independent; keep gamma >= 1/2 so the
        // (1 + gamma)/gamma error amplification stays below 3
        let gamma = 0.5 + 1.5 * u;
        let p = project(set, &x).expect("dimension checked");
        let lo = Vector::new(vec![-8.0; dim]).unwrap();
        let hi = Vector::new(vec![8.0; dim]).unwrap();
        match brute_force_prox(&value, gamma, &x, &lo, &hi, BRUTE_TOL) {
            Ok(z) => {
                let recovered = z.scale((1.0 + gamma) / gamma).axpy(-1.0 / gamma, &x);
                let err = p.dist(&recovered);
                worst = worst.max(err);
                if err > AGREE_TOL {
                    return CheckResult {
                        name: name.into(),
                        passed: false,
                        detail: format!(
                            "trial {t}: projection disagrees with brute force by {err:.3e} \
                             (gamma={gamma:.4}, x={:?})",
                            x.coords()
                        ),
                    };
                }
            }
            Err(e) => {
                return CheckResult {
                    name: name.into(),
                    passed: false,
                    detail: format!("trial {t}: brute force failed: {e}"),
                }
            }
        }
    }
    CheckResult {
        name: name.into(),
        passed: true,
        detail: format!("{trials} randomized trials, worst deviation {worst:.3e}"),
    }
}

fn prox_oracle_check(
    name: &str,
    oracle: &ProxOracle,
    dim: usize,
    trials: usize,
    stream: u64,
) -> CheckResult {
    let value = |x: &Vector| oracle.value(x);
    let closed = |gamma: f64, x: &Vector| oracle.prox(gamma, x);
    certify_prox(name, &value, &closed, dim, trials, stream)
}

/// Runs the full operator certification and sampler degeneracy suite with
/// the default trial count.
pub fn run_selftest(hinge_sign_fault: bool) -> SelftestReport {
    run_selftest_with_trials(60, hinge_sign_fault)
}

/// As `run_selftest`, with the number of randomized trials per operator made
/// explicit (the acceptance suite uses 100). `hinge_sign_fault` flips the
/// sign of the hinge margin before the case split, a deliberately broken
/// operator used to prove the suite can detect faults.
pub fn run_selftest_with_trials(trials: usize, hinge_sign_fault: bool) -> SelftestReport {
    let mut checks = Vec::new();

    // hinge prox, all three margin cases exercised by random draws
    for (dim, u, stream) in [
        (1, vec![0.8], 11),
        (2, vec![0.9, -0.4], 12),
        (3, vec![0.9, -0.4, 0.2], 1),
    ] {
        let u = Vector::new(u).unwrap();
        let xi = -1.0;
        let alpha = 0.6;
        let value = {
            let u = u.clone();
            move |x: &Vector| hinge_value(alpha, &u, xi, x)
        };
        let closed = {
            let u = u.clone();
            move |gamma: f64, x: &Vector| {
                let xi_eff = if hinge_sign_fault { -xi } else { xi };
                hinge_prox(alpha, &u, xi_eff, gamma, x)
            }
        };
        checks.push(certify_prox(
            &format!("hinge prox ({dim}d)"),
            &value,
            &closed,
            dim,
            trials,
            stream,
        ));
    }

    // closed-form projections, one set of each kind
    {
        let boxed = ConvexSet::boxed(
            Vector::new(vec![-1.0, 0.0]).unwrap(),
            Vector::new(vec![1.0, 2.0]).unwrap(),
        )
        .unwrap();
        checks.push(certify_projection("box projection (2d)", &boxed, 2, trials, 2));

        let ball = ConvexSet::ball(Vector::new(vec![0.5, -0.5]).unwrap(), 1.25).unwrap();
        checks.push(certify_projection("ball projection (2d)", &ball, 2, trials, 3));

        let ball1 = ConvexSet::ball(Vector::new(vec![-0.3]).unwrap(), 0.75).unwrap();
        checks.push(certify_projection("ball projection (1d)", &ball1, 1, trials, 13));

        let halfspace = ConvexSet::halfspace(Vector::new(vec![1.0, 2.0]).unwrap(), 0.5).unwrap();
        checks.push(certify_projection(
            "halfspace projection (2d)",
            &halfspace,
            2,
            trials,
            4,
        ));

        let hyperplane = ConvexSet::hyperplane(Vector::new(vec![0.6, 0.8]).unwrap(), 0.3).unwrap();
        checks.push(certify_projection(
            "hyperplane projection (2d)",
            &hyperplane,
            2,
            trials,
            5,
        ));

        let singleton = ConvexSet::singleton(Vector::new(vec![0.4, -1.2]).unwrap());
        checks.push(certify_projection(
            "singleton projection (2d)",
            &singleton,
            2,
            trials,
            9,
        ));

        let interval = ConvexSet::interval(-0.25, 1.75).unwrap();
        checks.push(certify_projection(
            "interval projection (1d)",
            &interval,
            1,
            trials,
            8,
        ));
    }

    // quadratic prox and l1 soft threshold
    {
        let center = Vector::new(vec![0.7, -1.1]).unwrap();
        checks.push(prox_oracle_check(
            "quadratic prox (2d)",
            &quadratic_prox_oracle(center),
            2,
            trials,
            6,
        ));
        checks.push(prox_oracle_check(
            "quadratic prox (1d)",
            &quadratic_prox_oracle(Vector::new(vec![-0.4]).unwrap()),
            1,
            trials,
            14,
        ));
        checks.push(prox_oracle_check(
            "l1 soft threshold (2d)",
            &l1_oracle(),
            2,
            trials,
            7,
        ));
        checks.push(prox_oracle_check(
            "l1 soft threshold (1d)",
            &l1_oracle(),
            1,
            trials,
            15,
        ));
    }

    // the indicator prox must equal the projection bit-for-bit at any gamma
    {
        let set = ConvexSet::interval(-0.25, 1.75).unwrap();
        let oracle = indicator_oracle(set.clone());
        let mut rng = RngStream::new(0x5E1F_7E57, 10);
        let mut passed = true;
        let mut detail = "60 randomized trials, prox identical to projection".to_string();
        for t in 0..60 {
            let x = rand_vec(&mut rng, 1, 3.0);
            let (u, next) = rng.next_f64();
            rng = next;
            let gamma = 0.05 + 2.0 * u;
            let via_prox = oracle.prox(gamma, &x);
            let via_proj = project(&set, &x).expect("dimension checked");
            if via_prox != via_proj {
                passed = false;
                detail = format!(
                    "trial {t}: indicator prox depends on gamma (err {:.3e})",
                    via_prox.dist(&via_proj)
                );
                break;
            }
        }
        checks.push(CheckResult {
            name: "indicator prox is the projection".into(),
            passed,
            detail,
        });
    }

    // degenerate single-atom law: every draw must hit the only component
    {
        let pair = ComponentPair::new(ProxOracle::zero(), SmoothOracle::zero(), "only");
        let dist = make_finite_distribution(vec![pair], vec![1.0]).expect("valid");
        let mut rng = RngStream::new(99, 0);
        let mut ok = true;
        for _ in 0..10_000 {
            let (k, next) = sample_component(&dist, rng);
            rng = next;
            if k != 0 {
                ok = false;
                break;
            }
        }
        checks.push(CheckResult {
            name: "degenerate single-atom law".into(),
            passed: ok,
            detail: if ok {
                "10000 draws all hit the single atom".into()
            } else {
                "a draw escaped the single atom".into()
            },
        });
    }

    SelftestReport { checks }
}

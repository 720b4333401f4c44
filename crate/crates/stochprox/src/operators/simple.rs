//! Elementary oracle factories: set indicators, quadratics, and the l1 norm.

use std::sync::Arc;

use crate::core::{DomainTag, ProxOracle, SmoothOracle, Vector};
use crate::operators::{project, ConvexSet};

const MEMBERSHIP_TOL: f64 = 1e-9;

/// Indicator of a convex set: value 0 on the set, +inf off it; prox is the
/// projection (gamma-independent); minimal-norm subgradient is 0 on the set
/// (0 belongs to every normal cone).
pub fn indicator_oracle(set: ConvexSet) -> ProxOracle {
    let (s1, s2, s3) = (set.clone(), set.clone(), set.clone());
    ProxOracle::new(
        Arc::new(move |x: &Vector| {
            if s1.contains(x, MEMBERSHIP_TOL) {
                0.0
            } else {
                f64::INFINITY
            }
        }),
        Arc::new(move |_gamma: f64, x: &Vector| {
            project(&s2, x).expect("dimension checked at build")
        }),
        DomainTag::Set(set),
    )
    .with_subgrad(Arc::new(move |x: &Vector| {
        debug_assert!(s3.contains(x, 1e-6), "subgradient queried off the set");
        Vector::zeros(x.dim())
    }))
}

/// f = (1/2)||x - c||^2 as a proxable oracle; prox_gamma(x) = (x + gamma*c)/(1 + gamma).
pub fn quadratic_prox_oracle(center: Vector) -> ProxOracle {
    let (c1, c2, c3) = (center.clone(), center.clone(), center);
    ProxOracle::new(
        Arc::new(move |x: &Vector| 0.5 * (x - &c1).norm_sq()),
        Arc::new(move |gamma: f64, x: &Vector| x.axpy(gamma, &c2).scale(1.0 / (1.0 + gamma))),
        DomainTag::WholeSpace,
    )
    .with_subgrad(Arc::new(move |x: &Vector| x - &c3))
}

/// g = (1/2)||x - c||^2 as a smooth oracle; gradient x - c, Lipschitz 1.
pub fn quadratic_smooth_oracle(center: Vector) -> SmoothOracle {
    let (c1, c2) = (center.clone(), center);
    SmoothOracle::new(
        Arc::new(move |x: &Vector| 0.5 * (x - &c1).norm_sq()),
        Arc::new(move |x: &Vector| x - &c2),
        1.0,
    )
}

/// f = ||x||_1; prox is componentwise soft thresholding by gamma.
pub fn l1_oracle() -> ProxOracle {
    ProxOracle::new(
        Arc::new(|x: &Vector| x.coords().iter().map(|c| c.abs()).sum()),
        Arc::new(|gamma: f64, x: &Vector| {
            Vector::from_raw(
                x.coords()
                    .iter()
                    .map(|&c| c.signum() * (c.abs() - gamma).max(0.0))
                    .collect(),
            )
        }),
        DomainTag::WholeSpace,
    )
    .with_subgrad(Arc::new(|x: &Vector| {
        Vector::from_raw(
            x.coords()
                .iter()
                .map(|&c| if c == 0.0 { 0.0 } else { c.signum() })
                .collect(),
        )
    }))
}

//! Hinge and logistic margin losses and their operators.
//!
//! Hinge: alpha * max{0, 1 - xi<x,u>} with closed-form prox; logistic:
//! (1-alpha) * ln(1 + exp(-xi<x,u>)) with numerically stable value/gradient.

use std::sync::Arc;

use crate::core::{DomainTag, ProxOracle, SmoothOracle, Vector};

#[inline]
fn check_sign(xi: f64) {
    assert!(xi == 1.0 || xi == -1.0, "label must be +1 or -1, got {xi}");
}

pub fn hinge_value(alpha: f64, u: &Vector, xi: f64, x: &Vector) -> f64 {
    check_sign(xi);
    alpha * (1.0 - xi * x.dot(u)).max(0.0)
}

/// prox of gamma * hinge. With m = xi<u,x>:
/// inactive (m > 1) -> x; middle band -> step to the margin along xi*u;
/// active linear region -> full subgradient step alpha*gamma*xi*u.
/// u = 0 degenerates the loss to a constant and the prox to the identity.
pub fn hinge_prox(alpha: f64, u: &Vector, xi: f64, gamma: f64, x: &Vector) -> Vector {
    check_sign(xi);
    let u_sq = u.norm_sq();
    if u_sq == 0.0 {
        return x.clone();
    }
    let m = xi * u.dot(x);
    if m > 1.0 {
        x.clone()
    } else if m >= 1.0 - alpha * gamma * u_sq {
        x.axpy((1.0 - m) / u_sq * xi, u)
    } else {
        x.axpy(alpha * gamma * xi, u)
    }
}

/// Minimal-norm subgradient: 0 on the flat region and at the kink,
/// -alpha*xi*u on the active linear piece.
pub fn hinge_min_norm_subgrad(alpha: f64, u: &Vector, xi: f64, x: &Vector) -> Vector {
    check_sign(xi);
    let m = xi * u.dot(x);
    if m >= 1.0 {
        Vector::zeros(x.dim())
    } else {
        u.scale(-alpha * xi)
    }
}

/// ln(1 + e^t) without overflow, exact to double precision.
#[inline]
pub fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

/// 1 / (1 + e^-t) evaluated stably on both tails.
#[inline]
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

pub fn logistic_value(alpha: f64, u: &Vector, xi: f64, x: &Vector) -> f64 {
    check_sign(xi);
    (1.0 - alpha) * softplus(-xi * x.dot(u))
}

pub fn logistic_grad(alpha: f64, u: &Vector, xi: f64, x: &Vector) -> Vector {
    check_sign(xi);
    let m = xi * x.dot(u);
    u.scale(-(1.0 - alpha) * sigmoid(-m) * xi)
}

/// Lipschitz constant of the logistic gradient: (1-alpha)/4 * ||u||^2.
pub fn logistic_lipschitz(alpha: f64, u: &Vector) -> f64 {
    (1.0 - alpha) / 4.0 * u.norm_sq()
}

pub fn hinge_oracle(alpha: f64, u: Vector, xi: f64) -> ProxOracle {
    check_sign(xi);
    let (u1, u2, u3) = (u.clone(), u.clone(), u);
    ProxOracle::new(
        Arc::new(move |x: &Vector| hinge_value(alpha, &u1, xi, x)),
        Arc::new(move |gamma: f64, x: &Vector| hinge_prox(alpha, &u2, xi, gamma, x)),
        DomainTag::WholeSpace,
    )
    .with_subgrad(Arc::new(move |x: &Vector| {
        hinge_min_norm_subgrad(alpha, &u3, xi, x)
    }))
}

pub fn logistic_oracle(alpha: f64, u: Vector, xi: f64) -> SmoothOracle {
    check_sign(xi);
    let lipschitz = logistic_lipschitz(alpha, &u);
    let (u1, u2) = (u.clone(), u);
    SmoothOracle::new(
        Arc::new(move |x: &Vector| logistic_value(alpha, &u1, xi, x)),
        Arc::new(move |x: &Vector| logistic_grad(alpha, &u2, xi, x)),
        lipschitz,
    )
}

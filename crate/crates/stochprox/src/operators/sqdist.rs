//! Half squared distance to a convex set: value (1/2) d_Z^2(x),
//! gradient Id - proj_Z (firmly nonexpansive, hence 1-Lipschitz).

use std::sync::Arc;

use crate::core::{SmoothOracle, Vector};
use crate::error::Result;
use crate::operators::{project, ConvexSet};

pub fn sqdist_value(set: &ConvexSet, x: &Vector) -> Result<f64> {
    let p = project(set, x)?;
    Ok(0.5 * (x - &p).norm_sq())
}

pub fn sqdist_grad(set: &ConvexSet, x: &Vector) -> Result<Vector> {
    let p = project(set, x)?;
    Ok(x - &p)
}

pub fn sqdist_oracle(set: ConvexSet) -> SmoothOracle {
    let s1 = set.clone();
    let s2 = set;
    SmoothOracle::new(
        Arc::new(move |x: &Vector| sqdist_value(&s1, x).expect("dimension checked at build")),
        Arc::new(move |x: &Vector| sqdist_grad(&s2, x).expect("dimension checked at build")),
        1.0,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn zero_on_the_set() {
        let s = ConvexSet::ball(Vector::zeros(2), 1.0).unwrap();
        let x = v(&[0.3, 0.2]);
        assert_eq!(sqdist_value(&s, &x).unwrap(), 0.0);
        assert_eq!(sqdist_grad(&s, &x).unwrap(), Vector::zeros(2));
    }

    #[test]
    fn ball_exterior() {
        let s = ConvexSet::ball(Vector::zeros(2), 1.0).unwrap();
        let x = v(&[3.0, 4.0]);
        assert!((sqdist_value(&s, &x).unwrap() - 8.0).abs() < 1e-12);
        let g = sqdist_grad(&s, &x).unwrap();
        assert!(g.dist(&v(&[2.4, 3.2])) < 1e-12);
    }

    #[test]
    fn hyperplane_distance() {
        let s = ConvexSet::hyperplane(v(&[0.0, 1.0]), 0.0).unwrap();
        let x = v(&[7.0, -3.0]);
        assert!((sqdist_value(&s, &x).unwrap() - 4.5).abs() < 1e-12);
        assert!(sqdist_grad(&s, &x).unwrap().dist(&v(&[0.0, -3.0])) < 1e-12);
    }
}

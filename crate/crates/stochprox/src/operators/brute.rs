//! Brute-force proximity oracle for testing closed forms.
//!
//! Minimizes gamma*value(z) + (1/2)||x - z||^2 over a search box by nested
//! grid refinement: a coordinate grid is evaluated, the box is shrunk around
//! the incumbent, and refinement repeats until the cell size drops below the
//! requested tolerance. Valid for nonsmooth values (hinge, penalized
//! indicators); restricted to dims <= 3 since it is a test oracle only.

use crate::core::Vector;
use crate::error::{Error, Result};
use crate::operators::ConvexSet;

const POINTS_PER_DIM: usize = 21;
const MIN_ROUNDS: usize = 6;
const MAX_ROUNDS: usize = 80;

pub fn brute_force_prox(
    value: &dyn Fn(&Vector) -> f64,
    gamma: f64,
    x: &Vector,
    lo: &Vector,
    hi: &Vector,
    tol: f64,
) -> Result<Vector> {
    let dim = x.dim();
    assert!(dim >= 1 && dim <= 3, "brute-force oracle supports dims 1-3");
    lo.check_dim(dim)?;
    hi.check_dim(dim)?;
    assert!(gamma > 0.0 && tol > 0.0);

    let objective = |z: &Vector| gamma * value(z) + 0.5 * (x - z).norm_sq();

    let mut cur_lo: Vec<f64> = lo.coords().to_vec();
    let mut cur_hi: Vec<f64> = hi.coords().to_vec();
    let mut incumbent = Vector::from_raw(
        cur_lo
            .iter()
            .zip(&cur_hi)
            .map(|(a, b)| 0.5 * (a + b))
            .collect(),
    );
    let mut best = objective(&incumbent);
    let mut cell = 0.0;

    for round in 0..MAX_ROUNDS {
        cell = (0..dim)
            .map(|i| (cur_hi[i] - cur_lo[i]) / (POINTS_PER_DIM - 1) as f64)
            .fold(0.0, f64::max);
        // scan the full grid
        let mut idx = vec![0usize; dim];
        loop {
            let z = Vector::from_raw(
                (0..dim)
                    .map(|i| {
                        cur_lo[i]
                            + (cur_hi[i] - cur_lo[i]) * idx[i] as f64
                                / (POINTS_PER_DIM - 1) as f64
                    })
                    .collect(),
            );
            let obj = objective(&z);
            if obj < best {
                best = obj;
                incumbent = z;
            }
            // odometer increment
            let mut carry = 0;
            while carry < dim {
                idx[carry] += 1;
                if idx[carry] < POINTS_PER_DIM {
                    break;
                }
                idx[carry] = 0;
                carry += 1;
            }
            if carry == dim {
                break;
            }
        }
        if round + 1 >= MIN_ROUNDS && cell <= tol {
            break;
        }
        // shrink around the incumbent, clipped to the original box
        for i in 0..dim {
            let h = (cur_hi[i] - cur_lo[i]) / (POINTS_PER_DIM - 1) as f64;
            let half = 4.0 * h;
            cur_lo[i] = (incumbent[i] - half).max(lo[i]);
            cur_hi[i] = (incumbent[i] + half).min(hi[i]);
        }
    }

    // Polish with a Nelder-Mead descent. The axis-aligned grid stalls on
    // stiff curved valleys (penalized ball/halfspace boundaries), where
    // progress requires coupled moves the grid cannot quantize; the simplex
    // adapts its shape to the valley. Restarts at decreasing scales recover
    // from any stall distance the grid left behind.
    for size in [1e-1, 1e-3, 10.0 * tol] {
        let polished = nelder_mead(&objective, &incumbent, size, lo, hi, 0.01 * tol, 20_000);
        if objective(&polished) < best {
            best = objective(&polished);
            incumbent = polished;
        }
    }

    // an incumbent pinned to the original box boundary means the search
    // domain was too small to contain the minimizer
    let margin = cell.max(tol);
    for i in 0..dim {
        if (incumbent[i] - lo[i]).abs() <= margin || (hi[i] - incumbent[i]).abs() <= margin {
            return Err(Error::BruteForceBoundary { coord: i });
        }
    }
    Ok(incumbent)
}

/// Standard Nelder-Mead simplex descent, clamped to the search box.
fn nelder_mead(
    objective: &dyn Fn(&Vector) -> f64,
    start: &Vector,
    size: f64,
    lo: &Vector,
    hi: &Vector,
    diameter_tol: f64,
    max_iter: usize,
) -> Vector {
    let dim = start.dim();
    let clamp = |v: Vector| {
        Vector::from_raw(
            (0..dim)
                .map(|i| v[i].clamp(lo[i], hi[i]))
                .collect(),
        )
    };
    let mut simplex: Vec<(f64, Vector)> = Vec::with_capacity(dim + 1);
    let p0 = clamp(start.clone());
    simplex.push((objective(&p0), p0));
    for i in 0..dim {
        let mut c = start.coords().to_vec();
        c[i] += size;
        let p = clamp(Vector::from_raw(c));
        simplex.push((objective(&p), p));
    }

    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let diameter = simplex[1..]
            .iter()
            .map(|(_, p)| p.dist(&simplex[0].1))
            .fold(0.0, f64::max);
        if diameter <= diameter_tol {
            break;
        }
        // centroid of all but the worst vertex
        let mut centroid = Vector::zeros(dim);
        for (_, p) in &simplex[..dim] {
            centroid = centroid.axpy(1.0 / dim as f64, p);
        }
        let worst = simplex[dim].clone();
        let reflected = clamp(centroid.axpy(1.0, &(&centroid - &worst.1)));
        let f_r = objective(&reflected);
        if f_r < simplex[0].0 {
            let expanded = clamp(centroid.axpy(2.0, &(&centroid - &worst.1)));
            let f_e = objective(&expanded);
            simplex[dim] = if f_e < f_r {
                (f_e, expanded)
            } else {
                (f_r, reflected)
            };
        } else if f_r < simplex[dim - 1].0 {
            simplex[dim] = (f_r, reflected);
        } else {
            let contracted = if f_r < worst.0 {
                clamp(centroid.axpy(0.5, &(&centroid - &worst.1)))
            } else {
                clamp(centroid.axpy(-0.5, &(&centroid - &worst.1)))
            };
            let f_c = objective(&contracted);
            if f_c < worst.0.min(f_r) {
                simplex[dim] = (f_c, contracted);
            } else {
                // shrink toward the best vertex
                let best = simplex[0].1.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let p = clamp(best.axpy(0.5, &(&entry.1 - &best)));
                    *entry = (objective(&p), p);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    simplex.swap_remove(0).1
}

/// Quadratic penalty standing in for the indicator of a set, so that
/// Squared Euclidean distance to a set computed from per-kind formulas that
/// never call `project`, so it can serve as an independent oracle for
/// certifying the closed-form projections.
pub fn independent_sqdist(set: &ConvexSet, z: &Vector) -> f64 {
    match set {
        ConvexSet::WholeSpace => 0.0,
        ConvexSet::Box { lo, hi } => (0..z.dim())
            .map(|i| (lo[i] - z[i]).max(0.0).powi(2) + (z[i] - hi[i]).max(0.0).powi(2))
            .sum(),
        ConvexSet::Ball { center, radius } => (z.dist(center) - radius).max(0.0).powi(2),
        ConvexSet::Halfspace { normal, offset } => {
            ((normal.dot(z) - offset).max(0.0) / normal.norm()).powi(2)
        }
        ConvexSet::Hyperplane { normal, offset } => {
            ((normal.dot(z) - offset) / normal.norm()).powi(2)
        }
        ConvexSet::Singleton { point } => z.dist(point).powi(2),
    }
}

/// Quadratic penalty standing in for the indicator of a set where a finite
/// surrogate is required. Note the stiffness makes it hostile to numerical
/// search; certifications prefer `independent_sqdist` with the smooth
/// prox identity prox of (1/2)d^2 = (x + gamma P(x)) / (1 + gamma).
pub fn penalized_indicator(set: ConvexSet) -> impl Fn(&Vector) -> f64 {
    const PENALTY: f64 = 1e10;
    move |z: &Vector| PENALTY * independent_sqdist(&set, z)
}

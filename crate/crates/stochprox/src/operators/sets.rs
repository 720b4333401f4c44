use crate::core::Vector;
use crate::error::{Error, Result};

/// Closed convex sets with closed-form projections.
///
/// Halfspace is { x : <normal, x> <= offset }; Hyperplane is
/// { x : <normal, x> = offset }.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexSet {
    WholeSpace,
    Box { lo: Vector, hi: Vector },
    Ball { center: Vector, radius: f64 },
    Halfspace { normal: Vector, offset: f64 },
    Hyperplane { normal: Vector, offset: f64 },
    Singleton { point: Vector },
}

impl ConvexSet {
    pub fn boxed(lo: Vector, hi: Vector) -> Result<Self> {
        lo.check_dim(hi.dim())?;
        for i in 0..lo.dim() {
            if lo[i] > hi[i] {
                return Err(Error::InvalidBox { coord: i });
            }
        }
        Ok(ConvexSet::Box { lo, hi })
    }

    /// 1-D interval [lo, hi].
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::boxed(Vector::scalar(lo), Vector::scalar(hi))
    }

    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::NonPositiveRadius { radius });
        }
        Ok(ConvexSet::Ball { center, radius })
    }

    pub fn halfspace(normal: Vector, offset: f64) -> Result<Self> {
        if normal.norm_sq() == 0.0 {
            return Err(Error::ZeroNormal);
        }
        Ok(ConvexSet::Halfspace { normal, offset })
    }

    pub fn hyperplane(normal: Vector, offset: f64) -> Result<Self> {
        if normal.norm_sq() == 0.0 {
            return Err(Error::ZeroNormal);
        }
        Ok(ConvexSet::Hyperplane { normal, offset })
    }

    pub fn singleton(point: Vector) -> Self {
        ConvexSet::Singleton { point }
    }

    /// Dimension of the ambient space, or None for the whole space
    /// (compatible with any dimension).
    pub fn dim(&self) -> Option<usize> {
        match self {
            ConvexSet::WholeSpace => None,
            ConvexSet::Box { lo, .. } => Some(lo.dim()),
            ConvexSet::Ball { center, .. } => Some(center.dim()),
            ConvexSet::Halfspace { normal, .. } | ConvexSet::Hyperplane { normal, .. } => {
                Some(normal.dim())
            }
            ConvexSet::Singleton { point } => Some(point.dim()),
        }
    }

    pub fn check_compatible(&self, x: &Vector) -> Result<()> {
        if let Some(d) = self.dim() {
            x.check_dim(d)?;
        }
        Ok(())
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        match self {
            ConvexSet::WholeSpace => true,
            ConvexSet::Box { lo, hi } => (0..x.dim())
                .all(|i| x[i] >= lo[i] - tol && x[i] <= hi[i] + tol),
            ConvexSet::Ball { center, radius } => x.dist(center) <= radius + tol,
            ConvexSet::Halfspace { normal, offset } => {
                normal.dot(x) <= offset + tol * normal.norm()
            }
            ConvexSet::Hyperplane { normal, offset } => {
                (normal.dot(x) - offset).abs() <= tol * normal.norm()
            }
            ConvexSet::Singleton { point } => x.dist(point) <= tol,
        }
    }
}

/// Metric projection onto the set, by the standard closed form per kind.
pub fn project(set: &ConvexSet, x: &Vector) -> Result<Vector> {
    set.check_compatible(x)?;
    Ok(match set {
        ConvexSet::WholeSpace => x.clone(),
        ConvexSet::Box { lo, hi } => Vector::from_raw(
            (0..x.dim())
                .map(|i| x[i].clamp(lo[i], hi[i]))
                .collect(),
        ),
        ConvexSet::Ball { center, radius } => {
            let d = x.dist(center);
            if d <= *radius {
                x.clone()
            } else {
                center.axpy(radius / d, &(x - center))
            }
        }
        ConvexSet::Halfspace { normal, offset } => {
            let excess = normal.dot(x) - offset;
            if excess <= 0.0 {
                x.clone()
            } else {
                x.axpy(-excess / normal.norm_sq(), normal)
            }
        }
        ConvexSet::Hyperplane { normal, offset } => {
            let excess = normal.dot(x) - offset;
            x.axpy(-excess / normal.norm_sq(), normal)
        }
        ConvexSet::Singleton { point } => point.clone(),
    })
}

use std::sync::Arc;

use crate::core::{RngStream, Vector};
use crate::error::{Error, Result};
use crate::operators::ConvexSet;

pub type ValueFn = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;
pub type ProxFn = Arc<dyn Fn(f64, &Vector) -> Vector + Send + Sync>;
pub type GradFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;

/// Effective domain marker for a proxable component.
#[derive(Clone)]
pub enum DomainTag {
    WholeSpace,
    Set(ConvexSet),
    Other,
}

/// Oracle for a proxable component f_k: its value (extended-real, `f64::INFINITY`
/// outside the domain), its proximity operator `prox(gamma, x)` minimizing
/// gamma*f(z) + (1/2)||x - z||^2, and optionally the minimal-norm subgradient
/// selection used by the growth-condition diagnostics.
#[derive(Clone)]
pub struct ProxOracle {
    value: ValueFn,
    prox: ProxFn,
    min_norm_subgrad: Option<GradFn>,
    domain: DomainTag,
    is_zero: bool,
}

impl ProxOracle {
    pub fn new(value: ValueFn, prox: ProxFn, domain: DomainTag) -> Self {
        Self {
            value,
            prox,
            min_norm_subgrad: None,
            domain,
            is_zero: false,
        }
    }

    pub fn with_subgrad(mut self, subgrad: GradFn) -> Self {
        self.min_norm_subgrad = Some(subgrad);
        self
    }

    /// The zero function: prox is the identity, subgradient is 0.
    pub fn zero() -> Self {
        Self {
            value: Arc::new(|_x| 0.0),
            prox: Arc::new(|_gamma, x: &Vector| x.clone()),
            min_norm_subgrad: Some(Arc::new(|x: &Vector| Vector::zeros(x.dim()))),
            domain: DomainTag::WholeSpace,
            is_zero: true,
        }
    }

    pub fn value(&self, x: &Vector) -> f64 {
        (self.value)(x)
    }

    pub fn prox(&self, gamma: f64, x: &Vector) -> Vector {
        (self.prox)(gamma, x)
    }

    pub fn min_norm_subgrad(&self, x: &Vector) -> Option<Vector> {
        self.min_norm_subgrad.as_ref().map(|f| f(x))
    }

    pub fn has_min_norm_subgrad(&self) -> bool {
        self.min_norm_subgrad.is_some()
    }

    pub fn domain(&self) -> &DomainTag {
        &self.domain
    }

    pub fn is_zero(&self) -> bool {
        self.is_zero
    }
}

/// Oracle for a smooth component g_k with beta_k-Lipschitz gradient.
#[derive(Clone)]
pub struct SmoothOracle {
    value: ValueFn,
    grad: GradFn,
    lipschitz: f64,
    is_zero: bool,
}

impl SmoothOracle {
    pub fn new(value: ValueFn, grad: GradFn, lipschitz: f64) -> Self {
        assert!(
            lipschitz >= 0.0 && lipschitz.is_finite(),
            "lipschitz constant must be a finite nonnegative real"
        );
        Self {
            value,
            grad,
            lipschitz,
            is_zero: false,
        }
    }

    pub fn zero() -> Self {
        Self {
            value: Arc::new(|_x| 0.0),
            grad: Arc::new(|x: &Vector| Vector::zeros(x.dim())),
            lipschitz: 0.0,
            is_zero: true,
        }
    }

    pub fn value(&self, x: &Vector) -> f64 {
        (self.value)(x)
    }

    pub fn grad(&self, x: &Vector) -> Vector {
        (self.grad)(x)
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn is_zero(&self) -> bool {
        self.is_zero
    }
}

/// One component (f_k, g_k).
#[derive(Clone)]
pub struct ComponentPair {
    pub f: ProxOracle,
    pub g: SmoothOracle,
    pub label: String,
}

impl ComponentPair {
    pub fn new(f: ProxOracle, g: SmoothOracle, label: impl Into<String>) -> Self {
        Self {
            f,
            g,
            label: label.into(),
        }
    }
}

/// Finite-support law of the random component index, with normalized weights
/// and beta = max over members of the smooth Lipschitz constants.
/// Immutable after construction; shareable read-only across workers.
#[derive(Clone)]
pub struct ComponentDistribution {
    pairs: Vec<ComponentPair>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
    beta: f64,
}

impl ComponentDistribution {
    pub fn pairs(&self) -> &[ComponentPair] {
        &self.pairs
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Exact mixture objective sum_k w_k (f_k + g_k)(x); +inf off dom f.
    pub fn objective(&self, x: &Vector) -> f64 {
        self.pairs
            .iter()
            .zip(&self.weights)
            .map(|(pair, w)| w * (pair.f.value(x) + pair.g.value(x)))
            .sum()
    }
}

/// Builds a finite-support distribution. Weights are normalized internally;
/// they must be nonnegative and not all zero.
pub fn make_finite_distribution(
    pairs: Vec<ComponentPair>,
    weights: Vec<f64>,
) -> Result<ComponentDistribution> {
    if pairs.is_empty() {
        return Err(Error::EmptyPairs);
    }
    if pairs.len() != weights.len() {
        return Err(Error::WeightCountMismatch {
            pairs: pairs.len(),
            weights: weights.len(),
        });
    }
    for (index, w) in weights.iter().enumerate() {
        if !w.is_finite() {
            return Err(Error::NonFinite {
                context: format!("weight {index}"),
            });
        }
        if *w < 0.0 {
            return Err(Error::NegativeWeight {
                index,
                value: *w,
            });
        }
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroTotalWeight);
    }
    let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let mut cumulative = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in &weights {
        acc += w;
        cumulative.push(acc);
    }
    // guard the inverse-CDF scan against the last partial sum rounding below 1
    if let Some(last) = cumulative.last_mut() {
        *last = 1.0;
    }
    let beta = pairs
        .iter()
        .map(|p| p.g.lipschitz())
        .fold(0.0, f64::max);
    Ok(ComponentDistribution {
        pairs,
        weights,
        cumulative,
        beta,
    })
}

/// Draws a component index with probability `weights[i]`. Consumes rng state
/// only; the draw never reads solver iterates.
pub fn sample_component(dist: &ComponentDistribution, rng: RngStream) -> (usize, RngStream) {
    let (u, next) = rng.next_f64();
    let idx = match dist
        .cumulative
        .iter()
        .position(|c| u < *c)
    {
        Some(i) => i,
        None => dist.len() - 1,
    };
    (idx, next)
}

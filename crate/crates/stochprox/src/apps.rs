//! Problem builders for the two applications (mixed-loss classification and
//! inconsistent convex feasibility), dataset ingestion, synthetic generators,
//! and high-accuracy reference solutions.

use std::path::Path;
use std::sync::Arc;

use crate::core::{
    make_finite_distribution, ComponentDistribution, ComponentPair, DomainTag, ProxOracle,
    RngStream, SmoothOracle, Vector,
};
use crate::error::{Error, Result};
use crate::operators::{
    hinge_oracle, indicator_oracle, logistic_grad, logistic_oracle, logistic_value, project,
    sqdist_grad, sqdist_oracle, sqdist_value, ConvexSet,
};
use crate::solvers::fb_fixed_point;

/// Which loss a sample is trained under: noisy samples get the hinge loss,
/// clean samples the logistic loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cohort {
    Noisy,
    Clean,
}

#[derive(Debug, Clone)]
pub struct LabeledSample {
    pub features: Vector,
    /// +1.0 or -1.0.
    pub label: f64,
    pub cohort: Cohort,
}

impl LabeledSample {
    pub fn new(features: Vector, label: f64, cohort: Cohort) -> Result<Self> {
        if label != 1.0 && label != -1.0 {
            return Err(Error::DatasetFormat {
                line: 0,
                reason: format!("label must be -1 or 1, got {label}"),
            });
        }
        Ok(Self {
            features,
            label,
            cohort,
        })
    }
}

/// Parses a dataset CSV with header `cohort,label,f1,...,fN`. Cohort literals
/// are exactly `noisy` and `clean`; anything else is an error, and so are
/// ragged rows and labels outside {-1, 1}.
pub fn load_dataset(path: &Path) -> Result<Vec<LabeledSample>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)?;
    let mut out = Vec::new();
    let mut dim: Option<usize> = None;
    for (i, row) in reader.records().enumerate() {
        let line = i + 2; // header is line 1
        let row = row.map_err(|e| Error::DatasetFormat {
            line,
            reason: e.to_string(),
        })?;
        if row.len() < 3 {
            return Err(Error::DatasetFormat {
                line,
                reason: format!("expected at least 3 fields, got {}", row.len()),
            });
        }
        let cohort = match &row[0] {
            "noisy" => Cohort::Noisy,
            "clean" => Cohort::Clean,
            other => {
                return Err(Error::DatasetFormat {
                    line,
                    reason: format!("unknown cohort literal {other:?} (expected noisy or clean)"),
                })
            }
        };
        let label: f64 = row[1].parse().map_err(|_| Error::DatasetFormat {
            line,
            reason: format!("unparseable label {:?}", &row[1]),
        })?;
        if label != 1.0 && label != -1.0 {
            return Err(Error::DatasetFormat {
                line,
                reason: format!("label must be -1 or 1, got {label}"),
            });
        }
        let mut coords = Vec::with_capacity(row.len() - 2);
        for field in row.iter().skip(2) {
            coords.push(field.parse::<f64>().map_err(|_| Error::DatasetFormat {
                line,
                reason: format!("unparseable feature {field:?}"),
            })?);
        }
        match dim {
            None => dim = Some(coords.len()),
            Some(d) if d != coords.len() => {
                return Err(Error::DatasetFormat {
                    line,
                    reason: format!("ragged row: {} features, expected {d}", coords.len()),
                })
            }
            _ => {}
        }
        let features = Vector::new(coords).map_err(|_| Error::DatasetFormat {
            line,
            reason: "non-finite feature".into(),
        })?;
        out.push(LabeledSample::new(features, label, cohort).map_err(|e| match e {
            Error::DatasetFormat { reason, .. } => Error::DatasetFormat { line, reason },
            other => other,
        })?);
    }
    Ok(out)
}

fn split_cohorts(samples: &[LabeledSample]) -> (Vec<&LabeledSample>, Vec<&LabeledSample>) {
    let noisy = samples.iter().filter(|s| s.cohort == Cohort::Noisy).collect();
    let clean = samples.iter().filter(|s| s.cohort == Cohort::Clean).collect();
    (noisy, clean)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange { value: alpha });
    }
    Ok(())
}

/// Builds the mixed-loss classification distribution: component pairs indexed
/// by the product of the noisy and clean cohorts with uniform weights, so the
/// mixture reproduces the cohort-averaged objective exactly in expectation.
/// Pair (i, j) carries the per-sample hinge f_i and logistic g_j; the
/// distribution's beta is (1-alpha)/4 * max_j ||u_j||^2.
pub fn make_classification_problem(
    samples: &[LabeledSample],
    alpha: f64,
) -> Result<ComponentDistribution> {
    check_alpha(alpha)?;
    let (noisy, clean) = split_cohorts(samples);
    if noisy.is_empty() {
        return Err(Error::EmptyCohort { cohort: "noisy" });
    }
    if clean.is_empty() {
        return Err(Error::EmptyCohort { cohort: "clean" });
    }
    let mut pairs = Vec::with_capacity(noisy.len() * clean.len());
    for (i, n) in noisy.iter().enumerate() {
        for (j, c) in clean.iter().enumerate() {
            pairs.push(ComponentPair::new(
                hinge_oracle(alpha, n.features.clone(), n.label),
                logistic_oracle(alpha, c.features.clone(), c.label),
                format!("hinge{i}*logistic{j}"),
            ));
        }
    }
    let weights = vec![1.0; pairs.len()];
    make_finite_distribution(pairs, weights)
}

/// Constraint set plus the random family of target sets.
#[derive(Debug, Clone)]
pub struct FeasibilitySpec {
    pub c: ConvexSet,
    pub sets: Vec<ConvexSet>,
    pub weights: Vec<f64>,
}

/// Builds the feasibility distribution: every pair k has f_k the indicator of
/// C (prox = projection, gamma-independent) and g_k the half squared distance
/// to Z_k (gradient Id - proj, Lipschitz 1). The stochastic proximal gradient
/// iteration on this distribution is exactly
/// x_{n+1} = proj_C((1 - gamma_n) x_n + gamma_n proj_{Z_{k_n}}(x_n)).
pub fn make_feasibility_problem(spec: &FeasibilitySpec) -> Result<ComponentDistribution> {
    let pairs = spec
        .sets
        .iter()
        .enumerate()
        .map(|(k, z)| {
            ComponentPair::new(
                indicator_oracle(spec.c.clone()),
                sqdist_oracle(z.clone()),
                format!("dist_sq_{k}"),
            )
        })
        .collect();
    make_finite_distribution(pairs, spec.weights.clone())
}

/// Two Gaussian clouds at +/- separation/2 along a random unit direction,
/// split into cohorts (first n1 noisy, then n2 clean); noisy labels are
/// flipped with probability `noise`. Fully determined by the seed.
pub fn synth_classification(
    n1: usize,
    n2: usize,
    dim: usize,
    separation: f64,
    noise: f64,
    seed: u64,
) -> Vec<LabeledSample> {
    assert!(n1 >= 1 && n2 >= 1 && dim >= 1);
    let mut rng = RngStream::new(seed, 0);
    let mut dir = Vec::with_capacity(dim);
    for _ in 0..dim {
        let (z, next) = rng.next_gaussian();
        dir.push(z);
        rng = next;
    }
    let mut dir = Vector::new(dir).expect("gaussian draws are finite");
    if dir.norm() == 0.0 {
        dir = Vector::from_raw((0..dim).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect());
    }
    let dir = dir.scale(1.0 / dir.norm());

    let mut out = Vec::with_capacity(n1 + n2);
    for idx in 0..(n1 + n2) {
        let (u, next) = rng.next_f64();
        rng = next;
        let label = if u < 0.5 { 1.0 } else { -1.0 };
        let mut coords = Vec::with_capacity(dim);
        for i in 0..dim {
            let (z, next) = rng.next_gaussian();
            coords.push(label * separation / 2.0 * dir[i] + z);
            rng = next;
        }
        let cohort = if idx < n1 { Cohort::Noisy } else { Cohort::Clean };
        let mut label = label;
        if cohort == Cohort::Noisy {
            let (u, next) = rng.next_f64();
            rng = next;
            if u < noise {
                label = -label;
            }
        }
        out.push(LabeledSample {
            features: Vector::new(coords).expect("gaussian draws are finite"),
            label,
            cohort,
        });
    }
    out
}

// ---------------------------------------------------------------------------
// Exact-mixture oracles and references
// ---------------------------------------------------------------------------

/// Weighted sum of hinge losses sum_i c_i max{0, 1 - xi_i <u_i, x>}, with its
/// prox computed by coordinate ascent on the box-constrained dual
/// (lambda_i in [0, c_i], z = x + gamma sum_i lambda_i xi_i u_i). Used only to
/// build the deterministic reference on the exact mixture; the per-component
/// solvers always use the closed forms.
pub(crate) struct HingeSum {
    terms: Vec<(Vector, f64)>,
    coeffs: Vec<f64>,
}

impl HingeSum {
    pub fn new(terms: Vec<(Vector, f64)>, coeffs: Vec<f64>) -> Self {
        assert_eq!(terms.len(), coeffs.len());
        Self { terms, coeffs }
    }

    pub fn value(&self, x: &Vector) -> f64 {
        self.terms
            .iter()
            .zip(&self.coeffs)
            .map(|((u, xi), c)| c * (1.0 - xi * u.dot(x)).max(0.0))
            .sum()
    }

    /// Returns (prox point, dual multipliers).
    pub fn prox(&self, gamma: f64, x: &Vector) -> (Vector, Vec<f64>) {
        let m = self.terms.len();
        let mut lambda = vec![0.0f64; m];
        // running s = sum_i lambda_i xi_i u_i
        let mut s = Vector::zeros(x.dim());
        let scale = self.coeffs.iter().cloned().fold(1e-30, f64::max);
        for _sweep in 0..10_000 {
            let mut max_delta = 0.0f64;
            for i in 0..m {
                let (u, xi) = &self.terms[i];
                let u_sq = u.norm_sq();
                if u_sq == 0.0 {
                    continue;
                }
                let s_minus = s.axpy(-lambda[i] * xi, u);
                let z_minus = x.axpy(gamma, &s_minus);
                let unconstrained = (1.0 - xi * u.dot(&z_minus)) / (gamma * u_sq);
                let new = unconstrained.clamp(0.0, self.coeffs[i]);
                max_delta = max_delta.max((new - lambda[i]).abs());
                s = s_minus.axpy(new * xi, u);
                lambda[i] = new;
            }
            if max_delta <= 1e-15 * scale {
                break;
            }
        }
        (x.axpy(gamma, &s), lambda)
    }
}

/// Exact-mixture oracles (f, g) for the classification objective:
/// the cohort-averaged hinge sum (prox via the dual) and the cohort-averaged
/// logistic loss.
pub fn classification_mixture_oracles(
    samples: &[LabeledSample],
    alpha: f64,
) -> Result<(ProxOracle, SmoothOracle)> {
    check_alpha(alpha)?;
    let (noisy, clean) = split_cohorts(samples);
    if noisy.is_empty() {
        return Err(Error::EmptyCohort { cohort: "noisy" });
    }
    if clean.is_empty() {
        return Err(Error::EmptyCohort { cohort: "clean" });
    }
    let hinge = Arc::new(HingeSum::new(
        noisy.iter().map(|s| (s.features.clone(), s.label)).collect(),
        vec![alpha / noisy.len() as f64; noisy.len()],
    ));
    let hinge_v = Arc::clone(&hinge);
    let f = ProxOracle::new(
        Arc::new(move |x: &Vector| hinge_v.value(x)),
        Arc::new(move |gamma: f64, x: &Vector| hinge.prox(gamma, x).0),
        DomainTag::WholeSpace,
    );

    let clean_data: Vec<(Vector, f64)> =
        clean.iter().map(|s| (s.features.clone(), s.label)).collect();
    let w = 1.0 / clean_data.len() as f64;
    let lipschitz = clean_data
        .iter()
        .map(|(u, _)| (1.0 - alpha) / 4.0 * u.norm_sq())
        .sum::<f64>()
        * w;
    let data_v = clean_data.clone();
    let g = SmoothOracle::new(
        Arc::new(move |x: &Vector| {
            w * data_v
                .iter()
                .map(|(u, xi)| logistic_value(alpha, u, *xi, x))
                .sum::<f64>()
        }),
        Arc::new(move |x: &Vector| {
            let mut acc = Vector::zeros(x.dim());
            for (u, xi) in &clean_data {
                acc = &acc + &logistic_grad(alpha, u, *xi, x);
            }
            acc.scale(w)
        }),
        lipschitz,
    );
    Ok((f, g))
}

/// Exact-mixture oracles for the feasibility objective: the indicator of C
/// and the weighted mean half squared distance.
pub fn feasibility_mixture_oracles(spec: &FeasibilitySpec) -> Result<(ProxOracle, SmoothOracle)> {
    let total: f64 = spec.weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroTotalWeight);
    }
    let weights: Vec<f64> = spec.weights.iter().map(|w| w / total).collect();
    let f = indicator_oracle(spec.c.clone());
    let sets_v = spec.sets.clone();
    let sets_g = spec.sets.clone();
    let w_v = weights.clone();
    let g = SmoothOracle::new(
        Arc::new(move |x: &Vector| {
            sets_v
                .iter()
                .zip(&w_v)
                .map(|(z, w)| w * sqdist_value(z, x).expect("dimensions checked at build"))
                .sum()
        }),
        Arc::new(move |x: &Vector| {
            let mut acc = Vector::zeros(x.dim());
            for (z, w) in sets_g.iter().zip(&weights) {
                acc = acc.axpy(*w, &sqdist_grad(z, x).expect("dimensions checked at build"));
            }
            acc
        }),
        1.0,
    );
    Ok((f, g))
}

/// High-accuracy minimizer of the exact mixture from multiple deterministic
/// starts, plus the per-component subgradient selection certifying
/// stationarity.
pub struct Reference {
    pub z_bar: Vector,
    /// One subgradient per component pair, aligned with the distribution.
    pub subgradients: Vec<Vector>,
    /// Multi-start agreement: max pairwise distance between the endpoints.
    pub start_spread: f64,
    pub agreed: bool,
    pub residual: f64,
}

fn multistart_points(dim: usize) -> Vec<Vector> {
    vec![
        Vector::zeros(dim),
        Vector::from_raw(vec![1.0; dim]),
        Vector::from_raw(vec![-1.0; dim]),
        Vector::from_raw((0..dim).map(|i| if i % 2 == 0 { 2.0 } else { -2.0 }).collect()),
        Vector::from_raw((0..dim).map(|i| 0.5 * (i as f64 + 1.0)).collect()),
    ]
}

const REFERENCE_RESIDUAL: f64 = 1e-12;
const REFERENCE_CAP: usize = 10_000_000;
const MULTISTART_TOL: f64 = 1e-6;

fn fb_multistart(
    f: &ProxOracle,
    g: &SmoothOracle,
    dim: usize,
) -> Result<(Vector, f64, f64)> {
    let beta = g.lipschitz().max(1e-12);
    let gamma = 1.0 / beta;
    let mut endpoints = Vec::new();
    let mut worst_residual = 0.0f64;
    for x0 in multistart_points(dim) {
        let (z, _, res) = fb_fixed_point(f, g, gamma, &x0, REFERENCE_RESIDUAL, REFERENCE_CAP)?;
        worst_residual = worst_residual.max(res);
        endpoints.push(z);
    }
    let mut spread = 0.0f64;
    for i in 0..endpoints.len() {
        for j in i + 1..endpoints.len() {
            spread = spread.max(endpoints[i].dist(&endpoints[j]));
        }
    }
    Ok((endpoints.swap_remove(0), spread, worst_residual))
}

/// Reference for the classification problem. The subgradient selection comes
/// from the dual multipliers of the mixture prox at the fixed point, which
/// resolves kink components correctly.
pub fn classification_reference(samples: &[LabeledSample], alpha: f64) -> Result<Reference> {
    let (f, g) = classification_mixture_oracles(samples, alpha)?;
    let (noisy, clean) = split_cohorts(samples);
    let dim = samples[0].features.dim();
    let (z_bar, spread, residual) = fb_multistart(&f, &g, dim)?;

    // dual multipliers of prox_{gamma F} at the fixed point
    let hinge = HingeSum::new(
        noisy.iter().map(|s| (s.features.clone(), s.label)).collect(),
        vec![alpha / noisy.len() as f64; noisy.len()],
    );
    let beta = g.lipschitz().max(1e-12);
    let gamma = 1.0 / beta;
    let forward = z_bar.axpy(-gamma, &g.grad(&z_bar));
    let (_, lambda) = hinge.prox(gamma, &forward);
    // per-sample subgradient s_i = -|K1| lambda_i xi_i u_i in d(alpha hinge_i)
    let k1 = noisy.len() as f64;
    let per_noisy: Vec<Vector> = noisy
        .iter()
        .zip(&lambda)
        .map(|(s, l)| s.features.scale(-k1 * l * s.label))
        .collect();
    // aligned with the product-indexed pairs (i outer, j inner)
    let mut subgradients = Vec::with_capacity(noisy.len() * clean.len());
    for s in &per_noisy {
        for _ in 0..clean.len() {
            subgradients.push(s.clone());
        }
    }
    Ok(Reference {
        z_bar,
        subgradients,
        start_spread: spread,
        agreed: spread <= MULTISTART_TOL,
        residual,
    })
}

/// Reference for the feasibility problem. Every component shares the same
/// normal-cone subgradient s = -grad G(z_bar).
pub fn feasibility_reference(spec: &FeasibilitySpec) -> Result<Reference> {
    let (f, g) = feasibility_mixture_oracles(spec)?;
    let dim = spec
        .c
        .dim()
        .or_else(|| spec.sets.iter().find_map(|s| s.dim()))
        .unwrap_or(1);
    let (z_bar, spread, residual) = fb_multistart(&f, &g, dim)?;
    let s = -&g.grad(&z_bar);
    // keep z_bar feasible to round-off
    let z_bar = project(&spec.c, &z_bar)?;
    let subgradients = vec![s; spec.sets.len()];
    Ok(Reference {
        z_bar,
        subgradients,
        start_spread: spread,
        agreed: spread <= MULTISTART_TOL,
        residual,
    })
}

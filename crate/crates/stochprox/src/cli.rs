//! Configuration-driven experiment runner: TOML experiment configs, the
//! `run` / `validate` / `selftest` commands, and the CSV/JSON artifact
//! writers. Exit codes: 0 success, 2 config error, 3 runtime abort,
//! 4 reference solver failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::apps::{
    classification_reference, feasibility_reference, load_dataset, make_classification_problem,
    make_feasibility_problem, synth_classification, FeasibilitySpec, Reference,
};
use crate::core::{
    make_finite_distribution, ComponentDistribution, ComponentPair, ProxOracle, RngStream,
    ScheduleClass, SmoothOracle, StepSchedule, Vector,
};
use crate::diagnostics::{replicate, Algorithm, EnsembleStats};
use crate::error::Error;
use crate::operators::{quadratic_prox_oracle, quadratic_smooth_oracle, ConvexSet};
use crate::selftest::run_selftest;
use crate::solvers::{check_assumption1, fb_run, RunRecord, SolverConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;
pub const EXIT_REFERENCE: i32 = 4;

// ---------------------------------------------------------------------------
// Config schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSection,
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub kind: ProblemKind,
    /// classification: path to a `cohort,label,f1,...` CSV
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<PathBuf>,
    /// classification: synthetic data in place of a dataset file
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synth: Option<SynthSection>,
    /// classification: hinge/logistic mixing weight in (0, 1)
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// feasibility: constraint set C (defaults to the whole space)
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constraint: Option<SetSpec>,
    /// feasibility: the random family of target sets
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sets: Option<Vec<SetSpec>>,
    /// custom-quadratic: component centers
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centers: Option<Vec<Vec<f64>>>,
    /// component weights (uniform when omitted)
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Classification,
    Feasibility,
    CustomQuadratic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSection {
    pub n_noisy: usize,
    pub n_clean: usize,
    pub dim: usize,
    pub separation: f64,
    pub noise: f64,
    pub seed: u64,
}

/// Serializable convex set description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    WholeSpace,
    Interval { lo: f64, hi: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Halfspace { normal: Vec<f64>, offset: f64 },
    Hyperplane { normal: Vec<f64>, offset: f64 },
    Singleton { point: Vec<f64> },
}

impl SetSpec {
    pub fn build(&self) -> crate::Result<ConvexSet> {
        match self {
            SetSpec::WholeSpace => Ok(ConvexSet::WholeSpace),
            SetSpec::Interval { lo, hi } => ConvexSet::interval(*lo, *hi),
            SetSpec::Box { lo, hi } => {
                ConvexSet::boxed(Vector::new(lo.clone())?, Vector::new(hi.clone())?)
            }
            SetSpec::Ball { center, radius } => {
                ConvexSet::ball(Vector::new(center.clone())?, *radius)
            }
            SetSpec::Halfspace { normal, offset } => {
                ConvexSet::halfspace(Vector::new(normal.clone())?, *offset)
            }
            SetSpec::Hyperplane { normal, offset } => {
                ConvexSet::hyperplane(Vector::new(normal.clone())?, *offset)
            }
            SetSpec::Singleton { point } => Ok(ConvexSet::singleton(Vector::new(point.clone())?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub algorithm: AlgorithmKind,
    pub schedule: ScheduleSection,
    pub budget: usize,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default = "default_replications")]
    pub replications: usize,
    pub seed: u64,
    pub x0: Vec<f64>,
    /// standard deviation of Gaussian jitter applied to x0 per replication
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0_jitter: Option<f64>,
}

fn default_record_every() -> usize {
    1
}

fn default_replications() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmKind {
    Spg,
    Spp,
    Sgd,
    Fb,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub family: ScheduleFamily,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleFamily {
    Power,
    Explicit,
}

impl ScheduleSection {
    pub fn build(&self) -> crate::Result<StepSchedule> {
        match self.family {
            ScheduleFamily::Power => {
                let gamma0 = self.gamma0.ok_or_else(|| Error::InvalidSchedule {
                    reason: "power schedule requires `gamma0`".into(),
                })?;
                let p = self.p.ok_or_else(|| Error::InvalidSchedule {
                    reason: "power schedule requires `p`".into(),
                })?;
                StepSchedule::power(gamma0, p)
            }
            ScheduleFamily::Explicit => {
                let values = self.values.clone().ok_or_else(|| Error::InvalidSchedule {
                    reason: "explicit schedule requires `values`".into(),
                })?;
                StepSchedule::explicit(values)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_output_dir")]
    pub directory: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: default_output_dir(),
        }
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, String> {
    toml::from_str(text).map_err(|e| format!("config error: {e}"))
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_config(&text)
}

// ---------------------------------------------------------------------------
// Problem construction
// ---------------------------------------------------------------------------

/// A built problem: the sampling distribution, its exact-mixture reference,
/// and the ingredients the deterministic baseline needs.
pub struct BuiltProblem {
    pub dist: ComponentDistribution,
    pub reference: Reference,
    pub mixture: (ProxOracle, SmoothOracle),
}

fn quadratic_reference(centers: &[Vector], weights: &[f64]) -> Reference {
    // the mixture (1/2)sum w_i ||x - c_i||^2 is minimized at the weighted mean
    let total: f64 = weights.iter().sum();
    let dim = centers[0].dim();
    let mut mean = Vector::zeros(dim);
    for (c, w) in centers.iter().zip(weights) {
        mean = mean.axpy(w / total, c);
    }
    let subgradients = vec![Vector::zeros(dim); centers.len()];
    Reference {
        z_bar: mean,
        subgradients,
        start_spread: 0.0,
        agreed: true,
        residual: 0.0,
    }
}

pub fn build_problem(cfg: &ExperimentConfig) -> crate::Result<BuiltProblem> {
    let p = &cfg.problem;
    match p.kind {
        ProblemKind::Classification => {
            let alpha = p.alpha.ok_or_else(|| Error::ReferenceFailure {
                reason: "classification requires `alpha`".into(),
            })?;
            let samples = match (&p.dataset, &p.synth) {
                (Some(path), None) => load_dataset(path)?,
                (None, Some(s)) => {
                    synth_classification(s.n_noisy, s.n_clean, s.dim, s.separation, s.noise, s.seed)
                }
                (Some(_), Some(_)) => {
                    return Err(Error::DatasetFormat {
                        line: 0,
                        reason: "give either `dataset` or `synth`, not both".into(),
                    })
                }
                (None, None) => {
                    return Err(Error::DatasetFormat {
                        line: 0,
                        reason: "classification requires a `dataset` path or a `synth` section"
                            .into(),
                    })
                }
            };
            let dist = make_classification_problem(&samples, alpha)?;
            let mixture = crate::apps::classification_mixture_oracles(&samples, alpha)?;
            let reference = classification_reference(&samples, alpha)?;
            Ok(BuiltProblem {
                dist,
                reference,
                mixture,
            })
        }
        ProblemKind::Feasibility => {
            let sets = p
                .sets
                .as_ref()
                .ok_or_else(|| Error::ReferenceFailure {
                    reason: "feasibility requires a `sets` list".into(),
                })?
                .iter()
                .map(|s| s.build())
                .collect::<crate::Result<Vec<_>>>()?;
            if sets.is_empty() {
                return Err(Error::EmptyPairs);
            }
            let c = match &p.constraint {
                Some(spec) => spec.build()?,
                None => ConvexSet::WholeSpace,
            };
            let weights = p.weights.clone().unwrap_or_else(|| vec![1.0; sets.len()]);
            let spec = FeasibilitySpec { c, sets, weights };
            let dist = make_feasibility_problem(&spec)?;
            let mixture = crate::apps::feasibility_mixture_oracles(&spec)?;
            let reference = feasibility_reference(&spec)?;
            Ok(BuiltProblem {
                dist,
                reference,
                mixture,
            })
        }
        ProblemKind::CustomQuadratic => {
            let centers = p
                .centers
                .as_ref()
                .ok_or_else(|| Error::ReferenceFailure {
                    reason: "custom-quadratic requires a `centers` list".into(),
                })?
                .iter()
                .map(|c| Vector::new(c.clone()))
                .collect::<crate::Result<Vec<_>>>()?;
            if centers.is_empty() {
                return Err(Error::EmptyPairs);
            }
            let weights = p
                .weights
                .clone()
                .unwrap_or_else(|| vec![1.0; centers.len()]);
            // place the quadratic where the stepped solver expects it:
            // proximal point wants f_k quadratic, the others want g_k smooth
            let prox_side = cfg.solver.algorithm == AlgorithmKind::Spp;
            let pairs: Vec<ComponentPair> = centers
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    if prox_side {
                        ComponentPair::new(
                            quadratic_prox_oracle(c.clone()),
                            SmoothOracle::zero(),
                            format!("quadratic_{i}"),
                        )
                    } else {
                        ComponentPair::new(
                            ProxOracle::zero(),
                            quadratic_smooth_oracle(c.clone()),
                            format!("quadratic_{i}"),
                        )
                    }
                })
                .collect();
            let dist = make_finite_distribution(pairs, weights.clone())?;
            let reference = quadratic_reference(&centers, &weights);
            let f = if prox_side {
                // exact mixture of quadratics is a quadratic around the mean
                quadratic_prox_oracle(reference.z_bar.clone())
            } else {
                ProxOracle::zero()
            };
            let g = if prox_side {
                SmoothOracle::zero()
            } else {
                quadratic_smooth_oracle(reference.z_bar.clone())
            };
            Ok(BuiltProblem {
                dist,
                reference,
                mixture: (f, g),
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Artifact writers
// ---------------------------------------------------------------------------

/// One trace.csv row.
#[derive(Clone)]
pub struct TraceRow {
    pub replication: usize,
    pub n: usize,
    pub gamma_n: f64,
    /// component index drawn at step n; -1 past the last draw or for fb
    pub k_n: i64,
    pub dist_to_ref: f64,
    pub objective_gap: f64,
    pub running_min_gap: f64,
}

fn trace_rows(
    replication: usize,
    record: &RunRecord,
    schedule: &StepSchedule,
    dist: &ComponentDistribution,
    z_bar: &Vector,
    phi_ref: f64,
) -> Vec<TraceRow> {
    let mut running_min = f64::INFINITY;
    record
        .iterates
        .iter()
        .map(|(n, x)| {
            let gap = dist.objective(x) - phi_ref;
            running_min = running_min.min(gap);
            let k_n = record
                .sampled_indices
                .get(*n)
                .map(|k| *k as i64)
                .unwrap_or(-1);
            TraceRow {
                replication,
                n: *n,
                gamma_n: schedule.step(*n).unwrap_or(f64::NAN),
                k_n,
                dist_to_ref: x.dist(z_bar),
                objective_gap: gap,
                running_min_gap: running_min,
            }
        })
        .collect()
}

fn write_trace(path: &Path, rows: &[TraceRow]) -> crate::Result<()> {
    let mut out = String::new();
    out.push_str("replication,n,gamma_n,k_n,dist_to_ref,objective_gap,running_min_gap\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.replication, r.n, r.gamma_n, r.k_n, r.dist_to_ref, r.objective_gap, r.running_min_gap
        )
        .expect("string write cannot fail");
    }
    fs::write(path, out)?;
    Ok(())
}

fn write_ensemble(path: &Path, stats: &EnsembleStats) -> crate::Result<()> {
    let mut out = String::new();
    out.push_str(
        "checkpoint,dist_mean,dist_median,dist_q25,dist_q75,gap_mean,gap_median,gap_q25,gap_q75\n",
    );
    for (i, ck) in stats.checkpoints.iter().enumerate() {
        let d = stats.dist_stats.as_ref().map(|s| s[i]);
        let g = stats.gap_stats.as_ref().map(|s| s[i]);
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            ck,
            cell(d.map(|s| s.mean)),
            cell(d.map(|s| s.median)),
            cell(d.map(|s| s.q25)),
            cell(d.map(|s| s.q75)),
            cell(g.map(|s| s.mean)),
            cell(g.map(|s| s.median)),
            cell(g.map(|s| s.q25)),
            cell(g.map(|s| s.q75)),
        )
        .expect("string write cannot fail");
    }
    fs::write(path, out)?;
    Ok(())
}

#[derive(Serialize)]
struct MetaJson<'a> {
    config: &'a ExperimentConfig,
    base_seed: u64,
    /// replication r replays with RngStream::new(base_seed, stream_ids[r])
    stream_ids: Vec<u64>,
    reference: Vec<f64>,
    reference_objective: f64,
    reference_residual: f64,
    reference_multistart_spread: f64,
    schedule_class: ScheduleClass,
    wall_clock_seconds: f64,
    failures: Vec<(u64, String)>,
    library_version: &'static str,
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

pub struct RunFlags {
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub allow_invalid_schedule: bool,
}

fn schedule_gate(schedule: &StepSchedule, allow: bool) -> Result<(), String> {
    let class = schedule.classify();
    if class != ScheduleClass::RobbinsMonro && !allow {
        return Err(format!(
            "schedule classified as {class:?}, not Robbins-Monro \
             (step sum must diverge while the squared sum converges); \
             pass --allow-invalid-schedule to run anyway"
        ));
    }
    Ok(())
}

pub fn cmd_run(config_path: &Path, flags: &RunFlags) -> i32 {
    let mut cfg = match load_config(config_path) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("{msg}");
            return EXIT_CONFIG;
        }
    };
    if let Some(seed) = flags.seed {
        cfg.solver.seed = seed;
    }
    if let Some(dir) = &flags.output {
        cfg.output.directory = dir.clone();
    }

    let schedule = match cfg.solver.schedule.build() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("config error in [solver.schedule]: {e}");
            return EXIT_CONFIG;
        }
    };
    if cfg.solver.algorithm != AlgorithmKind::Fb {
        if let Err(msg) = schedule_gate(&schedule, flags.allow_invalid_schedule) {
            eprintln!("config error in [solver.schedule]: {msg}");
            return EXIT_CONFIG;
        }
    }
    let x0 = match Vector::new(cfg.solver.x0.clone()) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("config error in [solver] x0: {e}");
            return EXIT_CONFIG;
        }
    };
    if cfg.solver.budget == 0 || cfg.solver.record_every == 0 || cfg.solver.replications == 0 {
        eprintln!("config error in [solver]: budget, record_every, replications must be >= 1");
        return EXIT_CONFIG;
    }

    let built = match build_problem(&cfg) {
        Ok(b) => b,
        Err(e @ Error::ReferenceFailure { .. }) => {
            // distinguish missing-parameter messages (config) from solver failures
            let msg = e.to_string();
            if msg.contains("requires") {
                eprintln!("config error in [problem]: {msg}");
                return EXIT_CONFIG;
            }
            eprintln!("{msg}");
            return EXIT_REFERENCE;
        }
        Err(e @ (Error::NonFiniteIterate { .. } | Error::StepBoundViolated { .. })) => {
            eprintln!("reference solver failure: {e}");
            return EXIT_REFERENCE;
        }
        Err(e) => {
            eprintln!("config error in [problem]: {e}");
            return EXIT_CONFIG;
        }
    };
    if !built.reference.agreed {
        eprintln!(
            "reference solver failure: multi-start endpoints disagree by {:.3e}",
            built.reference.start_spread
        );
        return EXIT_REFERENCE;
    }

    let start = std::time::Instant::now();
    let z_bar = built.reference.z_bar.clone();
    let phi_ref = built.dist.objective(&z_bar);
    let template = SolverConfig {
        schedule: schedule.clone(),
        budget: cfg.solver.budget,
        record_every: cfg.solver.record_every,
        rng: RngStream::new(cfg.solver.seed, 0),
        x0,
        reference: Some(z_bar.clone()),
        allow_invalid_schedule: flags.allow_invalid_schedule,
        early_stop: None,
    };

    let (stats, trace) = if cfg.solver.algorithm == AlgorithmKind::Fb {
        let (f, g) = &built.mixture;
        let record = match fb_run(
            f,
            g,
            &schedule,
            cfg.solver.budget,
            &template.x0,
            cfg.solver.record_every,
        ) {
            Ok(r) => r,
            Err(Error::NonFiniteIterate { step }) => {
                eprintln!("runtime abort: non-finite iterate at step {step}");
                return EXIT_RUNTIME;
            }
            Err(e) => {
                eprintln!("config error in [solver]: {e}");
                return EXIT_CONFIG;
            }
        };
        let rows = trace_rows(0, &record, &schedule, &built.dist, &z_bar, phi_ref);
        let stats = fb_ensemble(&record, &built.dist, &z_bar, phi_ref);
        (stats, rows)
    } else {
        let algorithm = match cfg.solver.algorithm {
            AlgorithmKind::Spg => Algorithm::Spg,
            AlgorithmKind::Spp => Algorithm::Spp,
            AlgorithmKind::Sgd => Algorithm::Sgd,
            AlgorithmKind::Fb => unreachable!(),
        };
        let result = replicate(
            &built.dist,
            &template,
            algorithm,
            cfg.solver.replications,
            cfg.solver.seed,
            cfg.solver.x0_jitter,
            |r, record| trace_rows(r, record, &schedule, &built.dist, &z_bar, phi_ref),
        );
        match result {
            Ok((stats, rows)) => {
                if !stats.failures.is_empty() {
                    let (r, msg) = &stats.failures[0];
                    eprintln!("runtime abort in replication {r}: {msg}");
                    return EXIT_RUNTIME;
                }
                (stats, rows.into_iter().flatten().collect())
            }
            Err(e) => {
                eprintln!("runtime abort: {e}");
                return EXIT_RUNTIME;
            }
        }
    };

    let dir = &cfg.output.directory;
    if let Err(e) = fs::create_dir_all(dir) {
        eprintln!("cannot create output directory {}: {e}", dir.display());
        return EXIT_RUNTIME;
    }
    let meta = MetaJson {
        config: &cfg,
        base_seed: cfg.solver.seed,
        stream_ids: (0..stats.replications as u64).collect(),
        reference: z_bar.coords().to_vec(),
        reference_objective: phi_ref,
        reference_residual: built.reference.residual,
        reference_multistart_spread: built.reference.start_spread,
        schedule_class: schedule.classify(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        failures: stats.failures.clone(),
        library_version: env!("CARGO_PKG_VERSION"),
    };
    let meta_text = match serde_json::to_string_pretty(&meta) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot serialize meta.json: {e}");
            return EXIT_RUNTIME;
        }
    };
    let io = write_trace(&dir.join("trace.csv"), &trace)
        .and_then(|_| write_ensemble(&dir.join("ensemble.csv"), &stats))
        .and_then(|_| fs::write(dir.join("meta.json"), meta_text).map_err(Error::from));
    if let Err(e) = io {
        eprintln!("cannot write outputs: {e}");
        return EXIT_RUNTIME;
    }

    let last = stats
        .dist_stats
        .as_ref()
        .and_then(|s| s.last().copied());
    match last {
        Some(s) => println!(
            "done: {} replications, final median dist to reference {:.6e}",
            stats.replications, s.median
        ),
        None => println!("done: {} replications", stats.replications),
    }
    EXIT_OK
}

/// Packs a single deterministic run into the ensemble shape (R = 1).
fn fb_ensemble(
    record: &RunRecord,
    dist: &ComponentDistribution,
    z_bar: &Vector,
    phi_ref: f64,
) -> EnsembleStats {
    let dists: Vec<f64> = record
        .checkpoints
        .iter()
        .map(|n| {
            record
                .iterates
                .iter()
                .find(|(step, _)| step == n)
                .map(|(_, x)| x.dist(z_bar))
                .unwrap_or(f64::NAN)
        })
        .collect();
    let gaps: Vec<f64> = record
        .checkpoint_objective
        .iter()
        .map(|phi| phi - phi_ref)
        .collect();
    let point = |v: f64| crate::diagnostics::CheckpointSummary {
        mean: v,
        median: v,
        q25: v,
        q75: v,
    };
    EnsembleStats {
        checkpoints: record.checkpoints.clone(),
        replications: 1,
        per_rep_dist: Some(vec![dists.clone()]),
        per_rep_objective: vec![record.checkpoint_objective.clone()],
        dist_stats: Some(dists.iter().map(|d| point(*d)).collect()),
        gap_stats: Some(gaps.iter().map(|g| point(*g)).collect()),
        finals: vec![record.final_iterate.clone()],
        failures: Vec::new(),
        reference_objective: Some(dist.objective(z_bar)),
    }
}

pub fn cmd_validate(config_path: &Path, flags: &RunFlags) -> i32 {
    let cfg = match load_config(config_path) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("{msg}");
            return EXIT_CONFIG;
        }
    };
    let schedule = match cfg.solver.schedule.build() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("config error in [solver.schedule]: {e}");
            return EXIT_CONFIG;
        }
    };
    println!("schedule: {:?}", schedule.classify());
    if cfg.solver.algorithm != AlgorithmKind::Fb {
        if let Err(msg) = schedule_gate(&schedule, flags.allow_invalid_schedule) {
            eprintln!("config error in [solver.schedule]: {msg}");
            return EXIT_CONFIG;
        }
    }
    if Vector::new(cfg.solver.x0.clone()).is_err() {
        eprintln!("config error in [solver] x0: coordinates must be finite");
        return EXIT_CONFIG;
    }

    let built = match build_problem(&cfg) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("config error in [problem]: {e}");
            return EXIT_CONFIG;
        }
    };
    println!("components: {}", built.dist.len());
    println!("beta = {}", built.dist.beta());
    if !built.reference.agreed {
        eprintln!(
            "reference multi-start endpoints disagree by {:.3e}",
            built.reference.start_spread
        );
        return EXIT_CONFIG;
    }
    println!(
        "reference z_bar = {:?} (residual {:.3e}, multi-start spread {:.3e})",
        built.reference.z_bar.coords(),
        built.reference.residual,
        built.reference.start_spread
    );

    match check_assumption1(&built.dist, &built.reference.z_bar, &built.reference.subgradients, 1e-8)
    {
        Ok(report) => {
            println!(
                "assumption check at z_bar: mean residual norm = {:.3e}, \
                 second moment of residual = {:.6}, flagged = {}",
                report.mean_norm, report.second_moment, report.flagged
            );
            if report.flagged {
                eprintln!("stationarity residual exceeds tolerance");
                return EXIT_CONFIG;
            }
        }
        Err(e) => {
            eprintln!("assumption check failed: {e}");
            return EXIT_CONFIG;
        }
    }
    println!("ok");
    EXIT_OK
}

pub fn cmd_selftest() -> i32 {
    let report = run_selftest(false);
    for check in &report.checks {
        let status = if check.passed { "ok" } else { "FAIL" };
        println!("{status:4} {} — {}", check.name, check.detail);
    }
    if report.all_passed() {
        println!("selftest passed ({} checks)", report.checks.len());
        EXIT_OK
    } else {
        let first = report
            .checks
            .iter()
            .find(|c| !c.passed)
            .expect("a failing check exists");
        eprintln!("selftest failed: {}", first.name);
        1
    }
}

//! Monte Carlo replication, convergence metrics, and empirical verification
//! of the expected-distance recursion behind the convergence guarantee.

use rayon::prelude::*;

use crate::core::{ComponentDistribution, RngStream, SmoothOracle, StepSchedule, Vector};
use crate::error::{Error, Result};
use crate::solvers::{sgd_run, spg_run, spp_run, RunRecord, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Spg,
    Spp,
    Sgd,
}

/// Per-checkpoint location statistics of a Monte Carlo ensemble.
#[derive(Debug, Clone, Copy)]
pub struct CheckpointSummary {
    pub mean: f64,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
}

/// Aggregated statistics over R independent replications. Distance and
/// objective-gap blocks are present only when the config carries a reference.
pub struct EnsembleStats {
    pub checkpoints: Vec<usize>,
    pub replications: usize,
    /// R x C squared-free distances ||x_n - z_bar|| per replication.
    pub per_rep_dist: Option<Vec<Vec<f64>>>,
    /// R x C objective values phi(x_n) per replication.
    pub per_rep_objective: Vec<Vec<f64>>,
    pub dist_stats: Option<Vec<CheckpointSummary>>,
    pub gap_stats: Option<Vec<CheckpointSummary>>,
    pub finals: Vec<Vector>,
    /// (stream_id, error message) of aborted replications.
    pub failures: Vec<(u64, String)>,
    /// phi(z_bar), when a reference is available.
    pub reference_objective: Option<f64>,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

fn summarize(column: &[f64]) -> CheckpointSummary {
    let mut sorted = column.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    CheckpointSummary {
        mean: column.iter().sum::<f64>() / column.len() as f64,
        median: quantile(&sorted, 0.5),
        q25: quantile(&sorted, 0.25),
        q75: quantile(&sorted, 0.75),
    }
}

/// Runs R independent replications with stream ids 0..R-1, aggregating
/// checkpoint statistics. `per_run` maps each finished record (replications
/// can be large; full records are not retained). Aborted runs are collected
/// in `failures` and the ensemble proceeds on the remainder.
pub fn replicate<T: Send>(
    dist: &ComponentDistribution,
    template: &SolverConfig,
    algorithm: Algorithm,
    replications: usize,
    base_seed: u64,
    x0_jitter: Option<f64>,
    per_run: impl Fn(usize, &RunRecord) -> T + Sync,
) -> Result<(EnsembleStats, Vec<T>)> {
    assert!(replications >= 1, "at least one replication required");

    let runs: Vec<(u64, std::result::Result<(Vec<f64>, Option<Vec<f64>>, Vector, T), String>)> =
        (0..replications as u64)
            .into_par_iter()
            .map(|r| {
                let mut cfg = template.clone();
                cfg.rng = RngStream::new(base_seed, r);
                if let Some(sigma) = x0_jitter {
                    let mut jitter = RngStream::new(base_seed ^ 0xA5A5_A5A5_DEAD_BEEF, r);
                    let mut coords = cfg.x0.coords().to_vec();
                    for c in coords.iter_mut() {
                        let (z, next) = jitter.next_gaussian();
                        *c += sigma * z;
                        jitter = next;
                    }
                    cfg.x0 = Vector::new(coords).expect("jittered start is finite");
                }
                let run = match algorithm {
                    Algorithm::Spg => spg_run(dist, &cfg),
                    Algorithm::Spp => spp_run(dist, &cfg),
                    Algorithm::Sgd => sgd_run(dist, &cfg),
                };
                match run {
                    Ok(record) => {
                        let mapped = per_run(r as usize, &record);
                        (
                            r,
                            Ok((
                                record.checkpoint_objective.clone(),
                                record.checkpoint_dist.clone(),
                                record.final_iterate.clone(),
                                mapped,
                            )),
                        )
                    }
                    Err(e) => (r, Err(e.to_string())),
                }
            })
            .collect();

    let checkpoints = crate::solvers::log2_checkpoints(template.budget);
    let mut per_rep_objective = Vec::new();
    let mut per_rep_dist: Option<Vec<Vec<f64>>> = template.reference.as_ref().map(|_| Vec::new());
    let mut finals = Vec::new();
    let mut failures = Vec::new();
    let mut mapped = Vec::new();
    for (r, outcome) in runs {
        match outcome {
            Ok((obj, dist_row, final_x, t)) => {
                per_rep_objective.push(obj);
                if let (Some(acc), Some(row)) = (per_rep_dist.as_mut(), dist_row) {
                    acc.push(row);
                }
                finals.push(final_x);
                mapped.push(t);
            }
            Err(msg) => failures.push((r, msg)),
        }
    }
    if per_rep_objective.is_empty() {
        let (_, first) = &failures[0];
        return Err(Error::ReferenceFailure {
            reason: format!("all replications aborted; first failure: {first}"),
        });
    }

    let reference_objective = template.reference.as_ref().map(|z| dist.objective(z));
    let n_ck = checkpoints.len();
    let column = |rows: &Vec<Vec<f64>>, c: usize| -> Vec<f64> {
        rows.iter().map(|row| row[c]).collect()
    };
    let dist_stats = per_rep_dist
        .as_ref()
        .map(|rows| (0..n_ck).map(|c| summarize(&column(rows, c))).collect());
    let gap_stats = reference_objective.map(|phi_ref| {
        (0..n_ck)
            .map(|c| {
                let gaps: Vec<f64> = per_rep_objective
                    .iter()
                    .map(|row| row[c] - phi_ref)
                    .collect();
                summarize(&gaps)
            })
            .collect()
    });

    Ok((
        EnsembleStats {
            checkpoints,
            replications,
            per_rep_dist,
            per_rep_objective,
            dist_stats,
            gap_stats,
            finals,
            failures,
            reference_objective,
        },
        mapped,
    ))
}

/// One checkpoint-pair test of the expected squared-distance recursion
/// E||x_{m} - z||^2 <= A * E||x_n - z||^2 + B, with (A, B) the composition of
/// the one-step factors (1 + 2 beta gamma_j^2) and offsets 2 gamma_j^2 sigma^2
/// over j = n..m-1.
#[derive(Debug, Clone)]
pub struct FejerCheck {
    pub from: usize,
    pub to: usize,
    /// Monte Carlo estimate of E[d_m^2 - A d_n^2 - B]; nonpositive when the
    /// inequality holds.
    pub mean_excess: f64,
    pub std_err: f64,
    pub violated: bool,
}

#[derive(Debug, Clone)]
pub struct FejerReport {
    pub checks: Vec<FejerCheck>,
    pub violation_count: usize,
}

/// Tests the expected-distance recursion on Monte Carlo estimates between
/// consecutive checkpoints. A violation is flagged only when the estimated
/// excess exceeds `sigma_level` (default 3) standard errors.
pub fn fejer_monitor(
    ensemble: &EnsembleStats,
    schedule: &StepSchedule,
    beta: f64,
    second_moment: f64,
    sigma_level: f64,
) -> Result<FejerReport> {
    let rows = ensemble.per_rep_dist.as_ref().ok_or(Error::ReferenceFailure {
        reason: "ensemble lacks distance traces; run with a reference z_bar".into(),
    })?;
    if ensemble.checkpoints.len() < 2 {
        return Err(Error::TooFewCheckpoints);
    }
    let r = rows.len();
    let mut checks = Vec::new();
    for ck_n in 0..ensemble.checkpoints.len() - 1 {
        let ck_m = ck_n + 1;
        let (n, m) = (ensemble.checkpoints[ck_n], ensemble.checkpoints[ck_m]);
        // compose the one-step recursion from n to m
        let mut a = 1.0;
        let mut b = 0.0;
        for j in n..m {
            let gamma = schedule.step(j)?;
            let c_j = 1.0 + 2.0 * beta * gamma * gamma;
            let e_j = 2.0 * gamma * gamma * second_moment;
            a *= c_j;
            b = c_j * b + e_j;
        }
        let excess: Vec<f64> = rows
            .iter()
            .map(|row| row[ck_m] * row[ck_m] - a * row[ck_n] * row[ck_n] - b)
            .collect();
        let mean = excess.iter().sum::<f64>() / r as f64;
        let std_err = if r > 1 {
            let var =
                excess.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (r - 1) as f64;
            (var / r as f64).sqrt()
        } else {
            0.0
        };
        // absolute slack guards the zero-variance deterministic case against
        // floating-point round-off
        let scale = rows.iter().map(|row| row[ck_n] * row[ck_n]).fold(1.0, f64::max);
        let violated = mean > sigma_level * std_err + 1e-10 * scale;
        checks.push(FejerCheck {
            from: n,
            to: m,
            mean_excess: mean,
            std_err,
            violated,
        });
    }
    let violation_count = checks.iter().filter(|c| c.violated).count();
    Ok(FejerReport {
        checks,
        violation_count,
    })
}

/// phi(x) - phi(z_bar) on the exact finite mixture; +inf when x falls outside
/// dom f.
pub fn objective_gap(dist: &ComponentDistribution, x: &Vector, z_bar: &Vector) -> f64 {
    dist.objective(x) - dist.objective(z_bar)
}

/// Worst relative error between the analytic gradient and central finite
/// differences of the value, over the supplied points.
pub fn finite_diff_grad_check(g: &SmoothOracle, points: &[Vector], h: f64) -> f64 {
    assert!(h > 0.0);
    let mut worst: f64 = 0.0;
    for x in points {
        let grad = g.grad(x);
        let mut fd = Vec::with_capacity(x.dim());
        for i in 0..x.dim() {
            let mut plus = x.coords().to_vec();
            let mut minus = x.coords().to_vec();
            plus[i] += h;
            minus[i] -= h;
            fd.push(
                (g.value(&Vector::from_raw(plus)) - g.value(&Vector::from_raw(minus))) / (2.0 * h),
            );
        }
        let fd = Vector::from_raw(fd);
        let rel = (&fd - &grad).norm() / grad.norm().max(1.0);
        worst = worst.max(rel);
    }
    worst
}

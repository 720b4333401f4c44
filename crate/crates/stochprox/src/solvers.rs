//! The iterative algorithms: stochastic proximal gradient and its proximal
//! point / plain gradient specializations, the deterministic forward-backward
//! baseline, and the assumption-checking diagnostics.

use std::time::Instant;

use crate::core::{
    sample_component, ComponentDistribution, ProxOracle, RngStream, ScheduleClass, SmoothOracle,
    StepSchedule, Vector,
};
use crate::error::{Error, Result};

/// Optional early stop: triggers when ||x_{n+1} - x_n|| / gamma_n stays below
/// `rate_threshold` for `consecutive` recorded steps. Always reported in the
/// record, never applied silently.
#[derive(Debug, Clone)]
pub struct EarlyStop {
    pub rate_threshold: f64,
    pub consecutive: usize,
}

impl Default for EarlyStop {
    fn default() -> Self {
        Self {
            rate_threshold: 1e-12,
            consecutive: 100,
        }
    }
}

#[derive(Clone)]
pub struct SolverConfig {
    pub schedule: StepSchedule,
    pub budget: usize,
    pub record_every: usize,
    pub rng: RngStream,
    pub x0: Vector,
    /// Reference point z_bar; enables the distance traces.
    pub reference: Option<Vector>,
    /// Permits non-Robbins-Monro schedules (negative-control experiments).
    pub allow_invalid_schedule: bool,
    pub early_stop: Option<EarlyStop>,
}

impl SolverConfig {
    pub fn new(schedule: StepSchedule, budget: usize, rng: RngStream, x0: Vector) -> Self {
        Self {
            schedule,
            budget,
            record_every: 1,
            rng,
            x0,
            reference: None,
            allow_invalid_schedule: false,
            early_stop: None,
        }
    }

    pub fn with_record_every(mut self, k: usize) -> Self {
        self.record_every = k;
        self
    }

    pub fn with_reference(mut self, z: Vector) -> Self {
        self.reference = Some(z);
        self
    }

    pub fn with_override(mut self) -> Self {
        self.allow_invalid_schedule = true;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::ZeroBudget);
        }
        if self.record_every == 0 {
            return Err(Error::ZeroRecordEvery);
        }
        Ok(())
    }
}

/// Full trajectory record of one run. Sampled indices are kept in full for
/// exact replay; iterates and traces are thinned by `record_every` (plus the
/// final point). Checkpoints are additionally placed at powers of two, where
/// the ensemble diagnostics read their statistics.
pub struct RunRecord {
    pub iterates: Vec<(usize, Vector)>,
    pub sampled_indices: Vec<u32>,
    pub objective_trace: Vec<(usize, f64)>,
    pub dist_trace: Option<Vec<(usize, f64)>>,
    pub checkpoints: Vec<usize>,
    pub checkpoint_objective: Vec<f64>,
    pub checkpoint_dist: Option<Vec<f64>>,
    pub final_iterate: Vector,
    pub seed: Option<(u64, u64)>,
    pub wall_clock: std::time::Duration,
    pub schedule_class: ScheduleClass,
    pub schedule_override: bool,
    pub early_stopped_at: Option<usize>,
}

/// Steps where checkpoint statistics are taken: 0, powers of 2, and the
/// final step. Convergence is sublinear with gamma_n ~ 1/n, so logarithmic
/// spacing resolves the whole trajectory.
pub fn log2_checkpoints(budget: usize) -> Vec<usize> {
    let mut out = vec![0usize];
    let mut p = 1usize;
    while p < budget {
        out.push(p);
        p = p.saturating_mul(2);
    }
    out.push(budget);
    out
}

/// One forward-backward update. Shared verbatim by the deterministic and
/// stochastic solvers so that the degenerate single-atom law reproduces the
/// deterministic trajectory bit-for-bit.
#[inline]
pub fn forward_backward_step(f: &ProxOracle, g: &SmoothOracle, gamma: f64, x: &Vector) -> Vector {
    f.prox(gamma, &x.axpy(-gamma, &g.grad(x)))
}

enum Mode {
    ProxGradient,
    ProxPoint,
    Gradient,
}

fn run_stochastic(
    dist: &ComponentDistribution,
    cfg: &SolverConfig,
    mode: Mode,
) -> Result<RunRecord> {
    cfg.validate()?;
    let class = cfg.schedule.classify();
    if class != ScheduleClass::RobbinsMonro && !cfg.allow_invalid_schedule {
        return Err(Error::ScheduleNotRobbinsMonro { class });
    }
    match mode {
        Mode::ProxPoint => {
            if let Some((i, p)) = dist
                .pairs()
                .iter()
                .enumerate()
                .find(|(_, p)| !p.g.is_zero())
            {
                return Err(Error::NonzeroSmoothPart {
                    index: i,
                    label: p.label.clone(),
                });
            }
        }
        Mode::Gradient => {
            if let Some((i, p)) = dist
                .pairs()
                .iter()
                .enumerate()
                .find(|(_, p)| !p.f.is_zero())
            {
                return Err(Error::NonzeroProxablePart {
                    index: i,
                    label: p.label.clone(),
                });
            }
        }
        Mode::ProxGradient => {}
    }

    let start = Instant::now();
    let checkpoints = log2_checkpoints(cfg.budget);
    let mut rec = Recorder::new(cfg, dist, &checkpoints);
    let mut x = cfg.x0.clone();
    if !x.is_finite() {
        return Err(Error::NonFiniteIterate { step: 0 });
    }
    rec.observe(0, &x, None)?;

    let mut rng = cfg.rng;
    let mut indices = Vec::with_capacity(cfg.budget);
    let mut early_stopped_at = None;

    for n in 0..cfg.budget {
        let gamma = cfg.schedule.step(n)?;
        let (k, next_rng) = sample_component(dist, rng);
        rng = next_rng;
        indices.push(k as u32);
        let pair = &dist.pairs()[k];
        let x_next = match mode {
            Mode::ProxGradient => forward_backward_step(&pair.f, &pair.g, gamma, &x),
            Mode::ProxPoint => pair.f.prox(gamma, &x),
            Mode::Gradient => x.axpy(-gamma, &pair.g.grad(&x)),
        };
        if !x_next.is_finite() {
            return Err(Error::NonFiniteIterate { step: n });
        }
        let rate = x_next.dist(&x) / gamma;
        x = x_next;
        rec.observe(n + 1, &x, Some(rate))?;
        if rec.early_stop_hit {
            early_stopped_at = Some(n + 1);
            break;
        }
    }

    let Recorder {
        iterates,
        objective_trace,
        dist_trace,
        checkpoint_objective,
        checkpoint_dist,
        ..
    } = rec;
    Ok(RunRecord {
        iterates,
        sampled_indices: indices,
        objective_trace,
        dist_trace,
        checkpoints,
        checkpoint_objective,
        checkpoint_dist,
        final_iterate: x,
        seed: Some((cfg.rng.seed, cfg.rng.stream_id)),
        wall_clock: start.elapsed(),
        schedule_class: class,
        schedule_override: cfg.allow_invalid_schedule,
        early_stopped_at,
    })
}

/// Stochastic proximal gradient: draw k_n, then
/// x_{n+1} = prox_{gamma_n f_{k_n}}(x_n - gamma_n grad g_{k_n}(x_n)).
pub fn spg_run(dist: &ComponentDistribution, cfg: &SolverConfig) -> Result<RunRecord> {
    run_stochastic(dist, cfg, Mode::ProxGradient)
}

/// Stochastic proximal point: x_{n+1} = prox_{gamma_n f_{k_n}}(x_n).
/// Requires every smooth part to be the zero function.
pub fn spp_run(dist: &ComponentDistribution, cfg: &SolverConfig) -> Result<RunRecord> {
    run_stochastic(dist, cfg, Mode::ProxPoint)
}

/// Stochastic gradient: x_{n+1} = x_n - gamma_n grad g_{k_n}(x_n).
/// Requires every proxable part to be the zero function.
pub fn sgd_run(dist: &ComponentDistribution, cfg: &SolverConfig) -> Result<RunRecord> {
    run_stochastic(dist, cfg, Mode::Gradient)
}

/// Deterministic forward-backward baseline on a single pair (f, g), with the
/// classical step bound sup gamma_n < 2/beta enforced strictly.
pub fn fb_run(
    f: &ProxOracle,
    g: &SmoothOracle,
    schedule: &StepSchedule,
    budget: usize,
    x0: &Vector,
    record_every: usize,
) -> Result<RunRecord> {
    if budget == 0 {
        return Err(Error::ZeroBudget);
    }
    if record_every == 0 {
        return Err(Error::ZeroRecordEvery);
    }
    let beta = g.lipschitz();
    if beta > 0.0 {
        let sup = schedule.sup_step();
        if sup >= 2.0 / beta {
            return Err(Error::StepBoundViolated {
                sup_gamma: sup,
                limit: 2.0 / beta,
            });
        }
    }
    let start = Instant::now();
    let checkpoints = log2_checkpoints(budget);
    let objective = |x: &Vector| f.value(x) + g.value(x);

    let mut x = x0.clone();
    let mut iterates = vec![(0usize, x.clone())];
    let mut objective_trace = vec![(0usize, objective(&x))];
    let mut checkpoint_objective = Vec::with_capacity(checkpoints.len());
    let mut ck = 0usize;
    if checkpoints[ck] == 0 {
        checkpoint_objective.push(objective(&x));
        ck += 1;
    }
    for n in 0..budget {
        let gamma = schedule.step(n)?;
        x = forward_backward_step(f, g, gamma, &x);
        if !x.is_finite() {
            return Err(Error::NonFiniteIterate { step: n });
        }
        let step = n + 1;
        if step % record_every == 0 || step == budget {
            iterates.push((step, x.clone()));
            objective_trace.push((step, objective(&x)));
        }
        if ck < checkpoints.len() && checkpoints[ck] == step {
            checkpoint_objective.push(objective(&x));
            ck += 1;
        }
    }

    Ok(RunRecord {
        iterates,
        sampled_indices: Vec::new(),
        objective_trace,
        dist_trace: None,
        checkpoints,
        checkpoint_objective,
        checkpoint_dist: None,
        final_iterate: x,
        seed: None,
        wall_clock: start.elapsed(),
        schedule_class: schedule.classify(),
        schedule_override: false,
        early_stopped_at: None,
    })
}

/// Deterministic forward-backward with a constant step, run until the
/// fixed-point residual ||x_{n+1} - x_n|| drops below `residual_tol`.
/// Iterate norms above 1e8 are reported as "no bounded reference found".
pub fn fb_fixed_point(
    f: &ProxOracle,
    g: &SmoothOracle,
    gamma: f64,
    x0: &Vector,
    residual_tol: f64,
    max_iter: usize,
) -> Result<(Vector, usize, f64)> {
    let beta = g.lipschitz();
    if beta > 0.0 && gamma >= 2.0 / beta {
        return Err(Error::StepBoundViolated {
            sup_gamma: gamma,
            limit: 2.0 / beta,
        });
    }
    let mut x = x0.clone();
    let mut residual = f64::INFINITY;
    for n in 0..max_iter {
        let x_next = forward_backward_step(f, g, gamma, &x);
        if !x_next.is_finite() {
            return Err(Error::NonFiniteIterate { step: n });
        }
        residual = x_next.dist(&x);
        x = x_next;
        if x.norm() > 1e8 {
            return Err(Error::ReferenceFailure {
                reason: "no bounded reference found (iterate norm exceeded 1e8)".into(),
            });
        }
        if residual <= residual_tol {
            return Ok((x, n + 1, residual));
        }
    }
    Err(Error::ReferenceFailure {
        reason: format!(
            "fixed-point residual {residual:.3e} above tolerance {residual_tol:.1e} after {max_iter} iterations"
        ),
    })
}

struct Recorder<'a> {
    cfg: &'a SolverConfig,
    dist: &'a ComponentDistribution,
    checkpoints: &'a [usize],
    next_ck: usize,
    iterates: Vec<(usize, Vector)>,
    objective_trace: Vec<(usize, f64)>,
    dist_trace: Option<Vec<(usize, f64)>>,
    checkpoint_objective: Vec<f64>,
    checkpoint_dist: Option<Vec<f64>>,
    low_rate_streak: usize,
    early_stop_hit: bool,
}

impl<'a> Recorder<'a> {
    fn new(cfg: &'a SolverConfig, dist: &'a ComponentDistribution, checkpoints: &'a [usize]) -> Self {
        Self {
            cfg,
            dist,
            checkpoints,
            next_ck: 0,
            iterates: Vec::new(),
            objective_trace: Vec::new(),
            dist_trace: cfg.reference.as_ref().map(|_| Vec::new()),
            checkpoint_objective: Vec::new(),
            checkpoint_dist: cfg.reference.as_ref().map(|_| Vec::new()),
            low_rate_streak: 0,
            early_stop_hit: false,
        }
    }

    fn observe(&mut self, step: usize, x: &Vector, rate: Option<f64>) -> Result<()> {
        let recorded = step % self.cfg.record_every == 0 || step == self.cfg.budget;
        if recorded {
            self.iterates.push((step, x.clone()));
            self.objective_trace.push((step, self.dist.objective(x)));
            if let (Some(trace), Some(z)) = (self.dist_trace.as_mut(), self.cfg.reference.as_ref())
            {
                trace.push((step, x.dist(z)));
            }
            if let (Some(es), Some(r)) = (self.cfg.early_stop.as_ref(), rate) {
                if r < es.rate_threshold {
                    self.low_rate_streak += 1;
                    if self.low_rate_streak >= es.consecutive {
                        self.early_stop_hit = true;
                    }
                } else {
                    self.low_rate_streak = 0;
                }
            }
        }
        if self.next_ck < self.checkpoints.len() && self.checkpoints[self.next_ck] == step {
            self.checkpoint_objective.push(self.dist.objective(x));
            if let (Some(cd), Some(z)) = (self.checkpoint_dist.as_mut(), self.cfg.reference.as_ref())
            {
                cd.push(x.dist(z));
            }
            self.next_ck += 1;
        }
        Ok(())
    }
}

/// Report of the stationarity check at a candidate solution.
#[derive(Debug, Clone)]
pub struct AssumptionReport {
    pub mean_residual: Vector,
    pub mean_norm: f64,
    pub second_moment: f64,
    pub flagged: bool,
    pub tol: f64,
}

/// Exact finite-mixture evaluation of E[s_k + grad g_k(z_bar)] and
/// E||s_k + grad g_k(z_bar)||^2 for a user-supplied subgradient selection
/// s_k in the subdifferential of f_k at z_bar. A nonzero mean (beyond `tol`)
/// flags z_bar as non-stationary for the mixture.
pub fn check_assumption1(
    dist: &ComponentDistribution,
    z_bar: &Vector,
    s_select: &[Vector],
    tol: f64,
) -> Result<AssumptionReport> {
    if s_select.len() != dist.len() {
        return Err(Error::MissingSubgradient {
            index: s_select.len(),
        });
    }
    let mut mean = Vector::zeros(z_bar.dim());
    let mut second_moment = 0.0;
    for ((pair, w), s) in dist.pairs().iter().zip(dist.weights()).zip(s_select) {
        if !pair.f.value(z_bar).is_finite() {
            return Err(Error::NonFinite {
                context: "f_k(z_bar): reference outside the component domain".into(),
            });
        }
        let resid = s + &pair.g.grad(z_bar);
        mean = mean.axpy(*w, &resid);
        second_moment += w * resid.norm_sq();
    }
    let mean_norm = mean.norm();
    Ok(AssumptionReport {
        mean_residual: mean,
        mean_norm,
        second_moment,
        flagged: mean_norm > tol,
        tol,
    })
}

/// Growth-bound check: exact mixture of ||min-norm subgrad f_k(x) + grad
/// g_k(x)||^2 at each point, compared against psi(||x||).
#[derive(Debug, Clone)]
pub struct PsiReport {
    /// (point index, mixture second moment, psi bound) for each violation.
    pub violations: Vec<(usize, f64, f64)>,
    pub checked: usize,
}

pub fn check_psi_bound(
    dist: &ComponentDistribution,
    psi: &dyn Fn(f64) -> f64,
    points: &[Vector],
) -> Result<PsiReport> {
    for (i, pair) in dist.pairs().iter().enumerate() {
        if !pair.f.has_min_norm_subgrad() {
            return Err(Error::MissingMinNormSubgrad { index: i });
        }
    }
    let mut violations = Vec::new();
    for (idx, x) in points.iter().enumerate() {
        let mut moment = 0.0;
        for (pair, w) in dist.pairs().iter().zip(dist.weights()) {
            if !pair.f.value(x).is_finite() {
                return Err(Error::PointOutsideDomain { index: idx });
            }
            let sub = pair
                .f
                .min_norm_subgrad(x)
                .expect("checked above");
            moment += w * (&sub + &pair.g.grad(x)).norm_sq();
        }
        let bound = psi(x.norm());
        if moment > bound * (1.0 + 1e-12) + 1e-12 {
            violations.push((idx, moment, bound));
        }
    }
    Ok(PsiReport {
        violations,
        checked: points.len(),
    })
}

//! Monte-Carlo ensembles of GND, DL-GND and GD trajectories.
//!
//! Trial `i` owns the random stream `(seed, i)`. Its initial point takes the first `d`
//! uniform draws of that stream and the solver consumes the rest. Trials run on a
//! bounded worker pool in fixed-size chunks; each chunk's results are collected by
//! trial index and folded sequentially, so every aggregate is bit-identical for any
//! worker count.

mod config;
mod output;
mod presets;

pub use config::{default_workers, load_config, outer_loops_for, parse_config, ConfigFile, DEFAULT_TRIALS};
pub use output::{format_real, write_csv, write_svg};
pub use presets::{bench_preset, default_iterations, Algo, BENCH_NAMES};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::sampling::{RngStream, SgOracle};
use crate::scalar::dist_sq;
use crate::solver::{dlgnd_drive, gnd_drive, DlGndConfig, Event, GndConfig};
use crate::theory::{lemma_st_bound, schedule_theorem1, Schedule};

/// Default N-CP radius.
pub const DEFAULT_THRESHOLD: f64 = 1e-3;

/// Trials handed to the worker pool per round.
const CHUNK: usize = 256;

#[derive(Clone, Debug, PartialEq)]
pub enum ObjectiveSpec {
    Quadratic { alpha: f64, dim: usize },
    J1 { n: u32, k: u32 },
    J2 { eps: f64, r: f64 },
    Rastrigin { a: f64, b: f64, c: f64, dim: usize },
}

impl ObjectiveSpec {
    pub fn build(&self) -> Result<Objective<f64>> {
        match *self {
            ObjectiveSpec::Quadratic { alpha, dim } => Objective::quadratic_origin(alpha, dim),
            ObjectiveSpec::J1 { n, k } => Objective::j1(n, k),
            ObjectiveSpec::J2 { eps, r } => Objective::j2(eps, r),
            ObjectiveSpec::Rastrigin { a, b, c, dim } => Objective::rastrigin(a, b, c, dim),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AlgorithmSpec {
    Gnd(GndConfig<f64>),
    DlGnd(DlGndConfig<f64>),
    Gd { eta: f64, iterations: usize },
}

impl AlgorithmSpec {
    /// Length of the recorded iterate series minus one.
    pub fn total_iterations(&self) -> usize {
        match self {
            AlgorithmSpec::Gnd(c) => c.iterations,
            AlgorithmSpec::DlGnd(c) => c.total_iterations(),
            AlgorithmSpec::Gd { iterations, .. } => *iterations,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            AlgorithmSpec::Gnd(_) => "gnd",
            AlgorithmSpec::DlGnd(_) => "dlgnd",
            AlgorithmSpec::Gd { .. } => "gd",
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            AlgorithmSpec::Gnd(c) => c.validate(),
            AlgorithmSpec::DlGnd(c) => c.validate(),
            AlgorithmSpec::Gd { eta, iterations } => GndConfig::new(*eta, 0.0, 0.0, *iterations).validate(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialPoints {
    /// Uniform on the axis-aligned box `[low_j, high_j]`.
    Uniform { low: Vec<f64>, high: Vec<f64> },
    /// Every trial starts at the same point; no draws are consumed.
    Fixed(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub objective: ObjectiveSpec,
    pub algorithm: AlgorithmSpec,
    /// Oracle noise level `r`.
    pub r: f64,
    pub trials: usize,
    pub init: InitialPoints,
    pub seed: u64,
    pub threshold: f64,
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<Objective<f64>> {
        let obj = self.objective.build()?;
        self.algorithm.validate()?;
        let d = obj.dim();
        if self.trials == 0 {
            return Err(Error::param("trials must be at least 1"));
        }
        if self.workers == 0 {
            return Err(Error::param("workers must be at least 1"));
        }
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            return Err(Error::param("threshold must be positive"));
        }
        if !(self.r >= 0.0 && self.r.is_finite()) {
            return Err(Error::param("sg noise r must be non-negative"));
        }
        match &self.init {
            InitialPoints::Uniform { low, high } => {
                if low.len() != d || high.len() != d {
                    return Err(Error::param(format!("init box must have {d} coordinates")));
                }
                if low.iter().zip(high).any(|(l, h)| !(l < h) || !l.is_finite() || !h.is_finite()) {
                    return Err(Error::param("init box must satisfy low < high in every coordinate"));
                }
            }
            InitialPoints::Fixed(x0) => {
                if x0.len() != d || x0.iter().any(|v| !v.is_finite()) {
                    return Err(Error::param(format!("x0 must have {d} finite coordinates")));
                }
            }
        }
        Ok(obj)
    }
}

/// Per-iteration ensemble statistics over `x_0 ..= x_T`.
#[derive(Clone, Debug, PartialEq)]
pub struct StatsSeries {
    pub mse: Vec<f64>,
    pub ncp: Vec<f64>,
    pub trials: usize,
    pub diverged: usize,
}

/// Draws trial `trial`'s initial point from the head of its stream and returns the
/// stream positioned for the solver.
pub fn initial_point(cfg: &ExperimentConfig, trial: usize) -> (Vec<f64>, RngStream) {
    let mut rng = RngStream::new(cfg.seed, trial as u64);
    let x0 = match &cfg.init {
        InitialPoints::Uniform { low, high } => low
            .iter()
            .zip(high)
            .map(|(&l, &h)| l + (h - l) * rng.uniform::<f64>())
            .collect(),
        InitialPoints::Fixed(x0) => x0.clone(),
    };
    (x0, rng)
}

fn tag_trial(trial: usize) -> impl Fn(Error) -> Error {
    move |e| match e.diverged_iteration() {
        Some(iteration) => Error::TrialDiverged { trial, iteration },
        None => e,
    }
}

/// Streams the iterate sequence of one trial to `visit(t, x)`.
fn drive_trial<F: FnMut(usize, &[f64])>(cfg: &ExperimentConfig, obj: &Objective<f64>, trial: usize, mut visit: F) -> Result<()> {
    let oracle = SgOracle::new(obj, cfg.r)?;
    let (x0, mut rng) = initial_point(cfg, trial);
    let res = match &cfg.algorithm {
        AlgorithmSpec::Gnd(c) => gnd_drive(&oracle, &x0, c, &mut rng, |ev| {
            if let Event::Iterate { t, x, .. } = ev {
                visit(t, x)
            }
        })
        .map(|_| ()),
        AlgorithmSpec::Gd { eta, iterations } => {
            let c = GndConfig::new(*eta, 0.0, 0.0, *iterations);
            gnd_drive(&oracle, &x0, &c, &mut rng, |ev| {
                if let Event::Iterate { t, x, .. } = ev {
                    visit(t, x)
                }
            })
            .map(|_| ())
        }
        AlgorithmSpec::DlGnd(c) => dlgnd_drive(&oracle, &x0, c, &mut rng, |t, x, _, _| visit(t, x)).map(|_| ()),
    };
    res.map_err(tag_trial(trial))
}

/// The full global iterate sequence of trial `trial`.
pub fn trial_trajectory(cfg: &ExperimentConfig, trial: usize) -> Result<Vec<Vec<f64>>> {
    let obj = cfg.validate()?;
    let mut points = Vec::with_capacity(cfg.algorithm.total_iterations() + 1);
    drive_trial(cfg, &obj, trial, |_, x| points.push(x.to_vec()))?;
    Ok(points)
}

fn worker_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::param(format!("cannot start worker pool: {e}")))
}

/// Evaluates `job` for trials `0..trials` on `workers` threads and hands the results to
/// `fold` strictly in trial order. The first failing trial (by index) aborts.
fn for_each_trial<R, J, F>(workers: usize, trials: usize, job: J, mut fold: F) -> Result<()>
where
    R: Send,
    J: Fn(usize) -> Result<R> + Sync,
    F: FnMut(usize, R),
{
    let pool = worker_pool(workers)?;
    let mut start = 0;
    while start < trials {
        let end = (start + CHUNK).min(trials);
        let results: Vec<Result<R>> = pool.install(|| (start..end).into_par_iter().map(&job).collect());
        for (i, res) in (start..end).zip(results) {
            fold(i, res?);
        }
        start = end;
    }
    Ok(())
}

/// MSE(t) = mean |x_t - x*|^2 and N-CP(t) = fraction of trials with |x_t - x*| > threshold.
pub fn run_monte_carlo(cfg: &ExperimentConfig) -> Result<StatsSeries> {
    let obj = cfg.validate()?;
    let len = cfg.algorithm.total_iterations() + 1;
    let x_star = obj.minimizer();
    let mut sum = vec![0.0f64; len];
    let mut far = vec![0usize; len];
    let radius_sq = cfg.threshold * cfg.threshold;
    for_each_trial(
        cfg.workers,
        cfg.trials,
        |trial| {
            let mut d2 = Vec::with_capacity(len);
            drive_trial(cfg, &obj, trial, |_, x| d2.push(dist_sq(x, x_star)))?;
            Ok(d2)
        },
        |_, d2: Vec<f64>| {
            for (t, &v) in d2.iter().enumerate() {
                sum[t] += v;
                if v > radius_sq {
                    far[t] += 1;
                }
            }
        },
    )?;
    let n = cfg.trials as f64;
    Ok(StatsSeries {
        mse: sum.into_iter().map(|s| s / n).collect(),
        ncp: far.into_iter().map(|c| c as f64 / n).collect(),
        trials: cfg.trials,
        diverged: 0,
    })
}

/// Setup shared by the shadow-sequence checks: GND with the single-loop schedule of a
/// certified objective, from a fixed `x0`, trial `i` on stream `(seed, i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShadowSetup {
    pub r: f64,
    pub f_lb: f64,
    pub x0: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub workers: usize,
}

impl ShadowSetup {
    fn schedule(&self, obj: &Objective<f64>) -> Result<Schedule<f64>> {
        let cert = obj
            .certificate()
            .ok_or_else(|| Error::param("objective carries no (alpha, L) certificate"))?;
        if self.trials < 2 {
            return Err(Error::param("need at least two trials"));
        }
        if self.x0.len() != obj.dim() {
            return Err(Error::param("x0 dimension does not match objective"));
        }
        schedule_theorem1(cert.alpha, cert.lipschitz, self.r, obj.min_value() - self.f_lb)
    }

    /// `|y_t - x*|^2` for `t = 0..=iterations`, one vector per trial, folded in order.
    fn shadow_distances<F: FnMut(Vec<f64>)>(&self, obj: &Objective<f64>, sched: &Schedule<f64>, iterations: usize, mut fold: F) -> Result<()> {
        let cfg = GndConfig::new(sched.eta, sched.s, self.f_lb, iterations).with_record_y(true);
        let oracle = SgOracle::new(obj, self.r)?;
        let x_star = obj.minimizer();
        let eta = sched.eta;
        for_each_trial(
            self.workers,
            self.trials,
            |trial| {
                let mut rng = RngStream::new(self.seed, trial as u64);
                let mut out = Vec::with_capacity(iterations + 1);
                let mut y = vec![0.0; obj.dim()];
                gnd_drive(&oracle, &self.x0, &cfg, &mut rng, |ev| {
                    if let Event::Iterate { x, grad: Some(g), .. } = ev {
                        for ((yj, &xj), &gj) in y.iter_mut().zip(x).zip(g) {
                            *yj = xj - eta * gj;
                        }
                        out.push(dist_sq(&y, x_star));
                    }
                })
                .map_err(tag_trial(trial))?;
                Ok(out)
            },
            |_, v| fold(v),
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContractionReport {
    pub schedule: Schedule<f64>,
    pub slack: f64,
    /// Ensemble mean of `|y_t - x*|^2`.
    pub mean: Vec<f64>,
    pub std_err: Vec<f64>,
    /// `(1 - eta lambda/100)^t |y_0 - x*|^2 + 100 b`
    pub bound: Vec<f64>,
    /// `slack * bound + 3 SE - mean`; negative entries are violations.
    pub margin: Vec<f64>,
    pub violations: Vec<usize>,
}

impl ContractionReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub const CONTRACTION_SLACK: f64 = 1.1;

/// Checks the expected shadow contraction at every `t <= iterations`.
pub fn contraction_check(obj: &Objective<f64>, setup: &ShadowSetup, iterations: usize) -> Result<ContractionReport> {
    let sched = setup.schedule(obj)?;
    let len = iterations + 1;
    let mut sum = vec![0.0f64; len];
    let mut sum_sq = vec![0.0f64; len];
    setup.shadow_distances(obj, &sched, iterations, |v| {
        for (t, x) in v.into_iter().enumerate() {
            sum[t] += x;
            sum_sq[t] += x * x;
        }
    })?;
    let n = setup.trials as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let std_err: Vec<f64> = sum_sq
        .iter()
        .zip(&mean)
        .map(|(sq, m)| (((sq - n * m * m) / (n - 1.0)).max(0.0) / n).sqrt())
        .collect();
    let y0 = mean[0];
    let bound: Vec<f64> = (0..len).map(|t| sched.contraction_bound(t, y0)).collect();
    let margin: Vec<f64> = (0..len)
        .map(|t| CONTRACTION_SLACK * bound[t] + 3.0 * std_err[t] - mean[t])
        .collect();
    let violations = (0..len).filter(|&t| margin[t] < 0.0).collect();
    Ok(ContractionReport { schedule: sched, slack: CONTRACTION_SLACK, mean, std_err, bound, margin, violations })
}

/// Empirical and analytic probabilities that `X_t = |y_t - x*|^2 - 100 b` drops below
/// `ell` within `M` steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StoppingEstimate {
    pub m: u64,
    pub empirical_p: f64,
    pub std_err: f64,
    pub analytic_bound: f64,
    /// Empirical `E[X_0 1{X_0 >= ell}]`.
    pub b_hat: f64,
}

/// One ensemble of length `max(ms)` answers every horizon in `ms`.
pub fn lemma_st_empirical(obj: &Objective<f64>, setup: &ShadowSetup, ell: f64, ms: &[u64]) -> Result<Vec<StoppingEstimate>> {
    if !(setup.r > 0.0) {
        return Err(Error::param("the stopping-time check needs r > 0"));
    }
    if !(ell > 0.0) {
        return Err(Error::param("ell must be positive"));
    }
    let sched = setup.schedule(obj)?;
    let floor = 100.0 * sched.b;
    let horizon = ms.iter().copied().max().unwrap_or(0) as usize;
    let mut first_hits: Vec<Option<usize>> = Vec::with_capacity(setup.trials);
    let mut b_sum = 0.0;
    setup.shadow_distances(obj, &sched, horizon, |v| {
        let x0 = v[0] - floor;
        if x0 >= ell {
            b_sum += x0;
        }
        first_hits.push(v.iter().position(|&d| d - floor < ell));
    })?;
    let n = setup.trials as f64;
    let b_hat = b_sum / n;
    let theta = sched.theta();
    Ok(ms
        .iter()
        .map(|&m| {
            let hits = first_hits.iter().filter(|h| h.is_some_and(|t| t as u64 <= m)).count();
            let p = hits as f64 / n;
            StoppingEstimate {
                m,
                empirical_p: p,
                std_err: (p * (1.0 - p) / n).sqrt(),
                analytic_bound: lemma_st_bound(theta, floor, ell, m, b_hat),
                b_hat,
            }
        })
        .collect())
}

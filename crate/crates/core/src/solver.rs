//! Gaussian noise descent (GND), its double-loop variant (DL-GND), and the plain
//! (stochastic) gradient descent baseline.
//!
//! One GND iteration:
//!
//! ```text
//! x_{t+1/2} = x_t - eta * SG(x_t)
//! sigma_t   = sqrt(eta * s * (f(x_{t+1/2}) - f_lb)^+)
//! x_{t+1}   = x_{t+1/2} - sigma_t * xi_t,        xi_t ~ N(0, I_d / d)
//! ```
//!
//! `xi_t` is symmetric, so subtracting or adding the perturbation defines the same
//! process; the update subtracts. The returned best index `t*` is the first minimizer of
//! `f(x_0), ..., f(x_T)`; half-step values feed `sigma_t` only.
//!
//! Cost per iteration: one gradient at `x_t`, one value at `x_{t+1/2}` and one value at
//! `x_{t+1}` (reused for `t*`). `y_t = x_t - eta * grad f(x_t)` reuses the gradient at
//! `x_t`; recording it adds a single gradient evaluation at `x_T`.

use crate::error::{Error, Result};
use crate::sampling::{fill_scaled_gaussian, RngStream, SgOracle};
use crate::scalar::{norm_sq, Scalar};

/// Values or gradient norms above this are treated as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GndConfig<T> {
    pub eta: T,
    pub s: T,
    pub f_lb: T,
    /// Number of iterations `T`.
    pub iterations: usize,
    pub record_y: bool,
}

impl<T: Scalar> GndConfig<T> {
    pub fn new(eta: T, s: T, f_lb: T, iterations: usize) -> Self {
        Self { eta, s, f_lb, iterations, record_y: false }
    }

    pub fn with_record_y(mut self, record_y: bool) -> Self {
        self.record_y = record_y;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > T::zero() && self.eta.is_finite()) {
            return Err(Error::param("eta must be positive and finite"));
        }
        if !(self.s >= T::zero() && self.s.is_finite()) {
            return Err(Error::param("s must be non-negative and finite"));
        }
        if !self.f_lb.is_finite() {
            return Err(Error::param("f_lb must be finite"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DlGndConfig<T> {
    pub eta: T,
    pub s: T,
    pub f_lb0: T,
    pub gamma: T,
    /// Number of outer loops `N`.
    pub outer_loops: usize,
    /// First-stage iterations `T1`.
    pub t1: usize,
    /// Inner iterations per outer loop `T2`.
    pub t2: usize,
    pub record_y: bool,
    /// Keep every inner GND trajectory in the trace.
    pub record_inner: bool,
}

impl<T: Scalar> DlGndConfig<T> {
    pub fn validate(&self) -> Result<()> {
        self.stage_config(self.f_lb0, self.t1).validate()?;
        if !(self.gamma > T::zero() && self.gamma < T::one()) {
            return Err(Error::param("gamma must lie in (0, 1)"));
        }
        if self.outer_loops == 0 || self.t1 == 0 || self.t2 == 0 {
            return Err(Error::param("N, T1 and T2 must be at least 1"));
        }
        Ok(())
    }

    /// Total number of GND iterations, `T1 + N * T2`.
    pub fn total_iterations(&self) -> usize {
        self.t1 + self.outer_loops * self.t2
    }

    fn stage_config(&self, f_lb: T, iterations: usize) -> GndConfig<T> {
        GndConfig { eta: self.eta, s: self.s, f_lb, iterations, record_y: self.record_y }
    }
}

/// Per-iteration record of a GND run.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    /// `x_0 ..= x_T`
    pub points: Vec<Vec<T>>,
    /// `f(x_0) ..= f(x_T)`
    pub values: Vec<T>,
    /// `sigma_0 .. sigma_{T-1}`
    pub sigmas: Vec<T>,
    /// `f(x_{1/2}) .. f(x_{T-1/2})`
    pub half_values: Vec<T>,
    /// `y_0 ..= y_T`, when requested.
    pub y_points: Option<Vec<Vec<T>>>,
    pub t_star: usize,
}

impl<T: Scalar> Trajectory<T> {
    fn empty(record_y: bool) -> Self {
        Self {
            points: Vec::new(),
            values: Vec::new(),
            sigmas: Vec::new(),
            half_values: Vec::new(),
            y_points: record_y.then(Vec::new),
            t_star: 0,
        }
    }

    fn record(&mut self, ev: &Event<'_, T>, eta: T) {
        match *ev {
            Event::Iterate { x, value, grad, .. } => {
                self.points.push(x.to_vec());
                self.values.push(value);
                if let (Some(ys), Some(g)) = (self.y_points.as_mut(), grad) {
                    ys.push(x.iter().zip(g).map(|(&xj, &gj)| xj - eta * gj).collect());
                }
            }
            Event::HalfStep { value, sigma } => {
                self.half_values.push(value);
                self.sigmas.push(sigma);
            }
        }
    }

    pub fn best_point(&self) -> &[T] {
        &self.points[self.t_star]
    }

    pub fn best_value(&self) -> T {
        self.values[self.t_star]
    }

    pub fn final_point(&self) -> &[T] {
        self.points.last().expect("trajectory holds x_0")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DlGndTrace<T> {
    /// `f_lb^0 ..= f_lb^N`
    pub lb_history: Vec<T>,
    /// `x_min^0 ..= x_min^N`
    pub min_points: Vec<Vec<T>>,
    pub min_values: Vec<T>,
    /// Stage-one run followed by the `N` inner runs, when requested.
    pub inner_trajectories: Option<Vec<Trajectory<T>>>,
}

impl<T: Scalar> DlGndTrace<T> {
    pub fn final_point(&self) -> &[T] {
        self.min_points.last().expect("trace holds x_min^0")
    }

    pub fn final_lower_bound(&self) -> T {
        *self.lb_history.last().expect("trace holds f_lb^0")
    }
}

/// `sqrt(eta * s * max(f_half - f_lb, 0))`
#[inline]
pub fn sigma_of<T: Scalar>(eta: T, s: T, f_half: T, f_lb: T) -> T {
    let gap = f_half - f_lb;
    if gap > T::zero() {
        (eta * s * gap).sqrt()
    } else {
        T::zero()
    }
}

/// `(1 - gamma) f_lb + gamma f(x_min)`
#[inline]
pub fn next_lower_bound<T: Scalar>(f_lb: T, f_min: T, gamma: T) -> T {
    (T::one() - gamma) * f_lb + gamma * f_min
}

/// What a run reports to its observer, in order.
pub(crate) enum Event<'a, T> {
    /// Iterate `x_t`, `t = 0..=T`. The exact gradient is always present for `t < T`, and
    /// at `t = T` only when `y_t` is being recorded.
    Iterate { t: usize, x: &'a [T], value: T, grad: Option<&'a [T]> },
    /// `f(x_{t+1/2})` and `sigma_t`, emitted after iterate `t`.
    HalfStep { value: T, sigma: T },
}

fn check_value<T: Scalar>(v: T, iteration: usize, what: &str) -> Result<T> {
    if v.is_finite() && v.abs() <= T::lit(DIVERGENCE_LIMIT) {
        Ok(v)
    } else {
        Err(Error::Diverged { iteration, reason: format!("{what} = {v}") })
    }
}

fn check_gradient<T: Scalar>(g: &[T], iteration: usize) -> Result<()> {
    let n2 = norm_sq(g);
    if n2.is_finite() && n2.sqrt() <= T::lit(DIVERGENCE_LIMIT) {
        Ok(())
    } else {
        Err(Error::Diverged { iteration, reason: "gradient norm out of range".into() })
    }
}

/// Runs GND and reports every iterate to `visit`; returns `(t*, x_{t*}, f(x_{t*}))`.
pub(crate) fn gnd_drive<T, F>(
    oracle: &SgOracle<'_, T>,
    x0: &[T],
    cfg: &GndConfig<T>,
    rng: &mut RngStream,
    mut visit: F,
) -> Result<(usize, Vec<T>, T)>
where
    T: Scalar,
    F: FnMut(Event<'_, T>),
{
    let obj = oracle.objective();
    let d = obj.dim();
    if x0.len() != d {
        return Err(Error::param(format!("x0 has dimension {}, objective expects {d}", x0.len())));
    }
    cfg.validate()?;

    let mut x = x0.to_vec();
    let mut grad = vec![T::zero(); d];
    let mut sg = vec![T::zero(); d];
    let mut xi = vec![T::zero(); d];
    let mut fx = check_value(obj.value(&x), 0, "f(x_0)")?;
    let mut best = (0usize, x.clone(), fx);

    for t in 0..cfg.iterations {
        obj.gradient_into(&x, &mut grad);
        check_gradient(&grad, t)?;
        visit(Event::Iterate { t, x: &x, value: fx, grad: Some(&grad) });

        sg.copy_from_slice(&grad);
        oracle.perturb(&mut sg, rng);
        for (xj, &gj) in x.iter_mut().zip(&sg) {
            *xj = *xj - cfg.eta * gj;
        }
        let f_half = check_value(obj.value(&x), t, "f(x_{t+1/2})")?;
        let sigma = sigma_of(cfg.eta, cfg.s, f_half, cfg.f_lb);

        fill_scaled_gaussian(rng, &mut xi);
        if sigma > T::zero() {
            for (xj, &n) in x.iter_mut().zip(&xi) {
                *xj = *xj - sigma * n;
            }
        }
        fx = check_value(obj.value(&x), t + 1, "f(x_{t+1})")?;
        if fx < best.2 {
            best = (t + 1, x.clone(), fx);
        }
        visit(Event::HalfStep { value: f_half, sigma });
    }

    let t = cfg.iterations;
    if cfg.record_y {
        obj.gradient_into(&x, &mut grad);
        check_gradient(&grad, t)?;
        visit(Event::Iterate { t, x: &x, value: fx, grad: Some(&grad) });
    } else {
        visit(Event::Iterate { t, x: &x, value: fx, grad: None });
    }
    Ok(best)
}

/// GND run with full trajectory recording.
pub fn gnd_run<T: Scalar>(
    oracle: &SgOracle<'_, T>,
    x0: &[T],
    cfg: &GndConfig<T>,
    rng: &mut RngStream,
) -> Result<Trajectory<T>> {
    let mut traj = Trajectory::empty(cfg.record_y);
    let eta = cfg.eta;
    let (t_star, _, _) = gnd_drive(oracle, x0, cfg, rng, |ev| traj.record(&ev, eta))?;
    traj.t_star = t_star;
    Ok(traj)
}

/// Plain (stochastic) gradient descent: GND with `s = 0`.
pub fn gd_run<T: Scalar>(
    oracle: &SgOracle<'_, T>,
    x0: &[T],
    eta: T,
    iterations: usize,
    rng: &mut RngStream,
) -> Result<Trajectory<T>> {
    let cfg = GndConfig::new(eta, T::zero(), T::zero(), iterations);
    gnd_run(oracle, x0, &cfg, rng)
}

/// Runs DL-GND and reports the concatenated iterate sequence to `visit` with global
/// indices: stage one contributes `x_0 ..= x_{T1}`, each inner run contributes its
/// iterates `1 ..= T2` (its `x_0` is the previous `x_min`, not a new iterate).
pub(crate) fn dlgnd_drive<T, F>(
    oracle: &SgOracle<'_, T>,
    x0: &[T],
    cfg: &DlGndConfig<T>,
    rng: &mut RngStream,
    mut visit: F,
) -> Result<DlGndTrace<T>>
where
    T: Scalar,
    F: FnMut(usize, &[T], T, Option<&[T]>),
{
    cfg.validate()?;
    let eta = cfg.eta;
    let mut inner = cfg.record_inner.then(Vec::new);

    let mut run_stage = |start: &[T], f_lb: T, iterations: usize, offset: usize, skip_first: bool| {
        let stage = cfg.stage_config(f_lb, iterations);
        let mut traj = inner.is_some().then(|| Trajectory::empty(cfg.record_y));
        let res = gnd_drive(oracle, start, &stage, rng, |ev| {
            if let Some(tr) = traj.as_mut() {
                tr.record(&ev, eta);
            }
            if let Event::Iterate { t, x, value, grad } = ev {
                if !(skip_first && t == 0) {
                    visit(offset + t, x, value, grad);
                }
            }
        });
        match res {
            Ok(best) => {
                if let (Some(tr), Some(all)) = (traj, inner.as_mut()) {
                    all.push(Trajectory { t_star: best.0, ..tr });
                }
                Ok(best)
            }
            Err(Error::Diverged { iteration, reason }) => {
                Err(Error::Diverged { iteration: offset + iteration, reason })
            }
            Err(e) => Err(e),
        }
    };

    let wrap = |outer: usize| move |e: Error| Error::OuterLoop { outer, source: Box::new(e) };

    let (_, x_min, f_min) = run_stage(x0, cfg.f_lb0, cfg.t1, 0, false).map_err(wrap(0))?;
    let mut trace = DlGndTrace {
        lb_history: vec![cfg.f_lb0],
        min_points: vec![x_min],
        min_values: vec![f_min],
        inner_trajectories: None,
    };
    for nu in 0..cfg.outer_loops {
        let f_lb = next_lower_bound(trace.lb_history[nu], trace.min_values[nu], cfg.gamma);
        let offset = cfg.t1 + nu * cfg.t2;
        let start = trace.min_points[nu].clone();
        let (_, x_min, f_min) = run_stage(&start, f_lb, cfg.t2, offset, true).map_err(wrap(nu + 1))?;
        trace.lb_history.push(f_lb);
        trace.min_points.push(x_min);
        trace.min_values.push(f_min);
    }
    trace.inner_trajectories = inner;
    Ok(trace)
}

/// DL-GND run.
pub fn dlgnd_run<T: Scalar>(
    oracle: &SgOracle<'_, T>,
    x0: &[T],
    cfg: &DlGndConfig<T>,
    rng: &mut RngStream,
) -> Result<DlGndTrace<T>> {
    dlgnd_drive(oracle, x0, cfg, rng, |_, _, _, _| {})
}

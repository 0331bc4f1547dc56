//! Step-size and noise schedules with their iteration bounds, nearly-convexity gates,
//! grid estimators for the regularity constants, the local barrier check, and the
//! stopping-time probability bound.

use crate::error::{Error, Result};
use crate::objectives::{Certificate, Objective};
use crate::scalar::{dist_sq, norm_sq, Scalar};

/// Single-loop schedule: `eta = 2 alpha / (5 L^2)`, `lambda = 2 alpha - eta L^2`,
/// `s = lambda / (3 L)` and the neighbourhood driver
/// `b = eta r^2 / lambda + (5 eta lambda + 14) / (42 L) * (f* - f_lb)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Schedule<T> {
    pub alpha: T,
    pub lipschitz: T,
    pub eta: T,
    pub s: T,
    pub lambda: T,
    pub b: T,
    pub eta_lambda: T,
}

/// Bounds that hold with probability `1 - zeta` at the best iterate once `b > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorollaryBounds<T> {
    /// `f(x_{t*}) - f* <= 100 L b / (1 - eta L)^2`
    pub value_gap: T,
    /// `|x_{t*} - x*|^2 <= 200 L b / ((1 - eta L)^2 (alpha - beta))`
    pub point_dist_sq: T,
    /// `|y_{t*} - x*|^2 <= ((1 + eta L)/(1 - eta L))^2 * 200 L b / (alpha - beta)`
    pub shadow_dist_sq: T,
}

fn lit<T: Scalar>(v: f64) -> T {
    T::lit(v)
}

fn check_alpha_l<T: Scalar>(alpha: T, l: T) -> Result<()> {
    if !(alpha > T::zero() && alpha.is_finite()) {
        return Err(Error::param("alpha must be positive"));
    }
    if !(l >= alpha && l.is_finite()) {
        return Err(Error::param("L must satisfy L >= alpha"));
    }
    Ok(())
}

fn check_zeta<T: Scalar>(zeta: T) -> Result<()> {
    if zeta > T::zero() && zeta < T::one() {
        Ok(())
    } else {
        Err(Error::param("zeta must lie in (0, 1)"))
    }
}

/// `(5 eta lambda + 14) / (42 L)`, the weight of the lower-bound gap in `b`.
fn gap_weight<T: Scalar>(eta_lambda: T, l: T) -> T {
    (lit::<T>(5.0) * eta_lambda + lit(14.0)) / (lit::<T>(42.0) * l)
}

/// `ceil(max(v, 0))` as an iteration count.
fn ceil_count<T: Scalar>(v: T) -> u64 {
    if v <= T::zero() {
        0
    } else {
        v.ceil().to_u64().unwrap_or(u64::MAX)
    }
}

pub fn schedule_theorem1<T: Scalar>(alpha: T, lipschitz: T, r: T, f_gap: T) -> Result<Schedule<T>> {
    check_alpha_l(alpha, lipschitz)?;
    if !(r >= T::zero()) {
        return Err(Error::param("r must be non-negative"));
    }
    if !(f_gap >= T::zero()) {
        return Err(Error::param("f* - f_lb must be non-negative"));
    }
    let l = lipschitz;
    let eta = lit::<T>(2.0) * alpha / (lit::<T>(5.0) * l * l);
    let lambda = lit::<T>(2.0) * alpha - eta * l * l;
    let s = lambda / (lit::<T>(3.0) * l);
    let eta_lambda = eta * lambda;
    let b = eta * r * r / lambda + gap_weight(eta_lambda, l) * f_gap;
    Ok(Schedule { alpha, lipschitz, eta, s, lambda, b, eta_lambda })
}

impl<T: Scalar> Schedule<T> {
    /// Contraction factor `1 - eta lambda / 100` of the expected shadow distance.
    pub fn theta(&self) -> T {
        T::one() - self.eta_lambda / lit(100.0)
    }

    /// Right-hand side `(1 - eta lambda/100)^t |y_0 - x*|^2 + 100 b` of the contraction bound.
    pub fn contraction_bound(&self, t: usize, y0_dist_sq: T) -> T {
        self.theta().powi(t as i32) * y0_dist_sq + lit::<T>(100.0) * self.b
    }

    pub fn corollary_bounds(&self, beta: T) -> Result<CorollaryBounds<T>> {
        if !(beta >= T::zero() && beta < self.alpha) {
            return Err(Error::param("beta must lie in [0, alpha)"));
        }
        let el = self.eta * self.lipschitz;
        let shrink = (T::one() - el) * (T::one() - el);
        let lb = self.lipschitz * self.b;
        Ok(CorollaryBounds {
            value_gap: lit::<T>(100.0) * lb / shrink,
            point_dist_sq: lit::<T>(200.0) * lb / (shrink * (self.alpha - beta)),
            shadow_dist_sq: ((T::one() + el) / (T::one() - el)).powi(2) * lit::<T>(200.0) * lb
                / (self.alpha - beta),
        })
    }
}

/// Iterations after which `|y_T - x*|^2 <= eps` (`b = 0`) or some `|y_t - x*|^2 <= 200 b`
/// (`b > 0`, `eps` unused) holds with probability `1 - zeta`.
pub fn iterations_bound_thm1<T: Scalar>(sched: &Schedule<T>, y0_dist_sq: T, zeta: T, eps: T) -> Result<u64> {
    check_zeta(zeta)?;
    if !(y0_dist_sq > T::zero()) {
        return Err(Error::param("|y_0 - x*|^2 must be positive"));
    }
    let bound = if sched.b == T::zero() {
        if !(eps > T::zero()) {
            return Err(Error::param("eps must be positive"));
        }
        lit::<T>(100.0) / sched.eta_lambda * (y0_dist_sq / (zeta * eps)).ln()
    } else {
        lit::<T>(200.0) / sched.eta_lambda * (y0_dist_sq / (lit::<T>(100.0) * sched.b * zeta)).ln()
    };
    Ok(ceil_count(bound))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DoubleLoopSchedule<T> {
    pub inner: Schedule<T>,
    pub b0: T,
    pub b_eps: T,
    pub gamma: T,
    pub outer_loops: u64,
    pub t1: u64,
    pub t2: u64,
    /// `zeta / (N + 1)`
    pub zeta_prime: T,
}

/// Double-loop schedule. `N` is fixed first from its own (zeta-free) bound, then
/// `zeta' = zeta / (N + 1)` feeds the `T1` and `T2` bounds. All counts are at least 1.
#[allow(clippy::too_many_arguments)]
pub fn schedule_theorem2<T: Scalar>(
    alpha: T,
    lipschitz: T,
    r: T,
    eps: T,
    zeta: T,
    f_gap0: T,
    y0_dist_sq: T,
    beta: T,
) -> Result<DoubleLoopSchedule<T>> {
    check_zeta(zeta)?;
    if !(eps > T::zero()) {
        return Err(Error::param("eps must be positive"));
    }
    if !(f_gap0 > T::zero()) {
        return Err(Error::param("f* - f_lb^0 must be positive"));
    }
    if !(y0_dist_sq > T::zero()) {
        return Err(Error::param("|y_0 - x*|^2 must be positive"));
    }
    if !(beta >= T::zero()) {
        return Err(Error::param("beta must be non-negative"));
    }
    if beta >= alpha {
        return Err(Error::param("nearly-convexity gate violated: beta >= alpha"));
    }
    let inner = schedule_theorem1(alpha, lipschitz, r, f_gap0)?;
    let l = lipschitz;
    let el = inner.eta * l;
    let shrink = (T::one() - el) * (T::one() - el);
    let noise = inner.eta * r * r / inner.lambda;
    let weight = gap_weight(inner.eta_lambda, l);
    let b0 = noise + weight * f_gap0;
    let b_eps = noise + weight * eps;
    let gamma = shrink * eps / (shrink * eps + lit::<T>(100.0) * l * b_eps);

    let outer = (T::one() / gamma) * ((T::one() - gamma) + gamma * f_gap0 / eps).ln();
    let outer_loops = ceil_count(outer).max(1);
    let zeta_prime = zeta / T::from_u64(outer_loops + 1).unwrap();
    let rate = lit::<T>(200.0) / inner.eta_lambda;
    let t1 = ceil_count(rate * (y0_dist_sq / (lit::<T>(100.0) * b0 * zeta_prime)).ln()).max(1);
    let t2_arg = lit::<T>(2.0) * (T::one() + el).powi(2) * l * b0
        / (shrink * (alpha - beta) * b_eps * zeta_prime);
    let t2 = ceil_count(rate * t2_arg.ln()).max(1);
    Ok(DoubleLoopSchedule { inner, b0, b_eps, gamma, outer_loops, t1, t2, zeta_prime })
}

/// Outcome of the step-size admissibility check for a general `eta < 2 alpha / L^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EtaConstraint {
    Holds,
    Fails,
    /// `s = 0` with `beta > 0`: the left side has a zero denominator under the radical.
    NotCheckable,
}

/// Tests `beta sqrt(2d) (sqrt(2 / (pi eta s (alpha - beta))) + 1)(1 + eta s L)
/// <= 2 alpha - eta L^2 - s L / 2`. With `beta = 0` the left side is zero.
pub fn check_eta_constraint<T: Scalar>(eta: T, s: T, alpha: T, lipschitz: T, beta: T, d: usize) -> Result<EtaConstraint> {
    check_alpha_l(alpha, lipschitz)?;
    let l = lipschitz;
    if !(eta > T::zero() && eta < lit::<T>(2.0) * alpha / (l * l)) {
        return Err(Error::param("eta must lie in (0, 2 alpha / L^2)"));
    }
    if !(s >= T::zero()) || !(beta >= T::zero()) || d == 0 {
        return Err(Error::param("need s >= 0, beta >= 0 and d >= 1"));
    }
    let rhs = lit::<T>(2.0) * alpha - eta * l * l - s * l / lit(2.0);
    let lhs = if beta == T::zero() {
        T::zero()
    } else if s == T::zero() {
        return Ok(EtaConstraint::NotCheckable);
    } else if beta >= alpha {
        return Ok(EtaConstraint::Fails);
    } else {
        let radical = (lit::<T>(2.0) / (T::PI() * eta * s * (alpha - beta))).sqrt();
        beta * (lit::<T>(2.0) * T::from_count(d)).sqrt() * (radical + T::one()) * (T::one() + eta * s * l)
    };
    Ok(if rhs > T::zero() && lhs <= rhs {
        EtaConstraint::Holds
    } else {
        EtaConstraint::Fails
    })
}

/// Largest admissible `beta`: `(1/4) sqrt(alpha^5 / (d L^3))`.
pub fn nearly_convex_gate<T: Scalar>(alpha: T, lipschitz: T, d: usize) -> Result<T> {
    check_alpha_l(alpha, lipschitz)?;
    if d == 0 {
        return Err(Error::param("d must be at least 1"));
    }
    Ok((alpha.powi(5) / (T::from_count(d) * lipschitz.powi(3))).sqrt() / lit(4.0))
}

fn grid_distances<'a, T: Scalar>(obj: &'a Objective<T>, grid: &'a [Vec<T>]) -> Result<impl Iterator<Item = (&'a [T], T)> + 'a> {
    if grid.is_empty() {
        return Err(Error::param("grid must be non-empty"));
    }
    let x_star = obj.minimizer();
    for p in grid {
        if p.len() != obj.dim() {
            return Err(Error::param("grid point dimension does not match objective"));
        }
        if dist_sq(p, x_star) == T::zero() {
            return Err(Error::param("grid must exclude the minimizer"));
        }
    }
    Ok(grid.iter().map(move |p| (p.as_slice(), dist_sq(p, x_star))))
}

/// Upper estimate of `beta(f, x*, alpha)` through the quadratic candidate
/// `(alpha/2)|x - x*|^2`: `max_grid 2 |f(x) - f* - (alpha/2)|x - x*|^2| / |x - x*|^2`.
pub fn estimate_beta_quadratic<T: Scalar>(obj: &Objective<T>, alpha: T, grid: &[Vec<T>]) -> Result<T> {
    if !(alpha > T::zero()) {
        return Err(Error::param("alpha must be positive"));
    }
    let f_star = obj.min_value();
    let two = lit::<T>(2.0);
    let mut beta = T::zero();
    for (x, r2) in grid_distances(obj, grid)? {
        let dev = two * (obj.value(x) - f_star - alpha / two * r2).abs() / r2;
        if dev > beta {
            beta = dev;
        }
    }
    Ok(beta)
}

/// Grid-restricted regularity constants. Each minimum over a finite grid is an upper
/// bound on the true infimum over the whole space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularityReport<T> {
    /// `min <grad f(x), x - x*> / |x - x*|^2`
    pub mu_r_hat: T,
    /// `min |grad f(x)|^2 / (2 (f(x) - f*))`
    pub mu_p_hat: T,
    /// `min 2 (f(x) - f*) / |x - x*|^2`
    pub mu_q_hat: T,
    /// `max |grad f(x)| / |x - x*|`
    pub l_hat: T,
    /// The `alpha` the beta estimate and the gate use.
    pub alpha: T,
    /// The `L` the gate uses: the certificate's when present, otherwise `l_hat`.
    pub lipschitz: T,
    /// Beta upper bound via the quadratic candidate.
    pub beta_hat: T,
    pub gate: T,
    pub nc_gate: bool,
    pub points: usize,
}

/// PL ratios are skipped where `f(x) - f* <= PL_FLOOR`.
pub const PL_FLOOR: f64 = 1e-14;

/// Audits `obj` on `grid`. `alpha` defaults to the certificate's, then to `mu_q_hat`.
pub fn regularity_constants_grid<T: Scalar>(obj: &Objective<T>, grid: &[Vec<T>], alpha: Option<T>) -> Result<RegularityReport<T>> {
    let x_star = obj.minimizer();
    let f_star = obj.min_value();
    let two = lit::<T>(2.0);
    let mut mu_r = T::infinity();
    let mut mu_p = T::infinity();
    let mut mu_q = T::infinity();
    let mut l_hat = T::zero();
    let mut grad = vec![T::zero(); obj.dim()];
    for (x, r2) in grid_distances(obj, grid)? {
        let gap = obj.value(x) - f_star;
        obj.gradient_into(x, &mut grad);
        let inner = grad
            .iter()
            .zip(x.iter().zip(x_star))
            .fold(T::zero(), |acc, (&g, (&xi, &si))| acc + g * (xi - si));
        let g2 = norm_sq(&grad);
        mu_r = mu_r.min(inner / r2);
        mu_q = mu_q.min(two * gap / r2);
        if gap > lit(PL_FLOOR) {
            mu_p = mu_p.min(g2 / (two * gap));
        }
        l_hat = l_hat.max((g2 / r2).sqrt());
    }
    let cert = obj.certificate();
    let alpha = alpha
        .or(cert.map(|c: Certificate<T>| c.alpha))
        .unwrap_or(mu_q);
    let lipschitz = cert.map(|c| c.lipschitz).unwrap_or(l_hat).max(alpha);
    let beta_hat = estimate_beta_quadratic(obj, alpha, grid)?;
    let gate = if alpha > T::zero() {
        nearly_convex_gate(alpha, lipschitz, obj.dim())?
    } else {
        T::zero()
    };
    Ok(RegularityReport {
        mu_r_hat: mu_r,
        mu_p_hat: mu_p,
        mu_q_hat: mu_q,
        l_hat,
        alpha,
        lipschitz,
        beta_hat,
        gate,
        nc_gate: alpha > T::zero() && beta_hat <= gate,
        points: grid.len(),
    })
}

/// `+-logspace(lo, hi, n)` on the real line: `2n` one-dimensional points.
pub fn symmetric_log_grid<T: Scalar>(lo: T, hi: T, n: usize) -> Result<Vec<Vec<T>>> {
    if !(lo > T::zero() && hi > lo) || n < 2 {
        return Err(Error::param("need 0 < lo < hi and n >= 2"));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / T::from_count(n - 1);
    let mut grid = Vec::with_capacity(2 * n);
    for i in 0..n {
        let x = (a + step * T::from_count(i)).exp();
        grid.push(vec![x]);
        grid.push(vec![-x]);
    }
    Ok(grid)
}

/// Evenly spaced points `lo, lo + h, ..., <= hi` with the origin removed.
pub fn uniform_grid_1d<T: Scalar>(lo: T, hi: T, step: T) -> Result<Vec<Vec<T>>> {
    if !(hi > lo && step > T::zero()) {
        return Err(Error::param("need lo < hi and step > 0"));
    }
    let n = ((hi - lo) / step).floor().to_usize().unwrap_or(0);
    Ok((0..=n)
        .map(|i| lo + step * T::from_count(i))
        .filter(|x| x.abs() > step / lit(2.0))
        .map(|x| vec![x])
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Condition {
    StronglyConvex,
    RestrictedSecant,
    PolyakLojasiewicz,
    QuadraticGrowth,
    NearlyConvex,
}

impl Condition {
    pub fn label(&self) -> &'static str {
        match self {
            Condition::StronglyConvex => "SC",
            Condition::RestrictedSecant => "RSI",
            Condition::PolyakLojasiewicz => "PL",
            Condition::QuadraticGrowth => "QG",
            Condition::NearlyConvex => "NC",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionRow<T> {
    pub condition: Condition,
    pub holds: bool,
    /// Scalar modulus for SC/RSI/PL/QG.
    pub parameter: Option<T>,
    /// `(alpha, L)` for NC.
    pub certificate: Option<Certificate<T>>,
}

/// Closed-form regularity table of `j2(eps, R)`.
pub fn j2_condition_table<T: Scalar>(eps: T, r: T) -> Result<Vec<ConditionRow<T>>> {
    if !(eps > T::zero() && eps < T::one()) || !(r > T::zero()) {
        return Err(Error::param("need eps in (0, 1) and R > 0"));
    }
    let one = T::one();
    let spread = eps * (one + r * r).sqrt();
    let sc_spread = eps * (one + lit::<T>(5.0) * r * r + lit::<T>(4.0) * r.powi(4)).sqrt();
    let row = |condition, holds: bool, value: T| ConditionRow {
        condition,
        holds,
        parameter: holds.then_some(value),
        certificate: None,
    };
    let rsi = spread < one;
    let nc_second = lit::<T>(4.0) * eps * (one + spread).powf(lit(1.5)) <= one;
    let nc = if rsi {
        Some(Certificate { alpha: one - spread, lipschitz: one + spread })
    } else if nc_second {
        Some(Certificate { alpha: one, lipschitz: one + spread })
    } else {
        None
    };
    Ok(vec![
        row(Condition::StronglyConvex, sc_spread < one, one - sc_spread),
        row(Condition::RestrictedSecant, rsi, one - spread),
        row(Condition::PolyakLojasiewicz, rsi, (one - spread).powi(2) / (one + eps)),
        row(Condition::QuadraticGrowth, true, one - eps),
        ConditionRow { condition: Condition::NearlyConvex, holds: nc.is_some(), parameter: None, certificate: nc },
    ])
}

/// Result of comparing the escape barrier of a ball around `x_hat` with the
/// nearly-convex ceiling `(1/4) sqrt(alpha^5/(d L^3)) |x_hat - x*|^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BarrierReport<T> {
    /// `min over the sphere of f - f(x_hat)`
    pub lhs: T,
    pub rhs: T,
    pub holds: bool,
    /// `false` when a two-dimensional grid minimum failed to go below `rhs`; the true
    /// infimum may still do so.
    pub conclusive: bool,
}

/// Angular resolution of the two-dimensional boundary scan.
pub const BARRIER_ANGLES: usize = 10_000;

pub fn barrier_check<T: Scalar>(obj: &Objective<T>, x_hat: &[T], radius: T, alpha: T, lipschitz: T) -> Result<BarrierReport<T>> {
    let d = obj.dim();
    if !(d == 1 || d == 2) {
        return Err(Error::param("barrier check supports d = 1 or d = 2"));
    }
    if x_hat.len() != d {
        return Err(Error::param("x_hat dimension does not match objective"));
    }
    if !(radius > T::zero()) {
        return Err(Error::param("radius must be positive"));
    }
    let dist2 = dist_sq(x_hat, obj.minimizer());
    if radius * radius >= dist2 {
        return Err(Error::param("ball must exclude the minimizer"));
    }
    let rhs = nearly_convex_gate(alpha, lipschitz, d)? * dist2;
    let f_hat = obj.value(x_hat);
    let lhs = if d == 1 {
        let lo = obj.value(&[x_hat[0] - radius]);
        let hi = obj.value(&[x_hat[0] + radius]);
        lo.min(hi) - f_hat
    } else {
        let step = lit::<T>(2.0) * T::PI() / T::from_count(BARRIER_ANGLES);
        (0..BARRIER_ANGLES)
            .map(|i| {
                let (s, c) = (step * T::from_count(i)).sin_cos();
                obj.value(&[x_hat[0] + radius * c, x_hat[1] + radius * s])
            })
            .fold(T::infinity(), T::min)
            - f_hat
    };
    let holds = lhs < rhs;
    Ok(BarrierReport { lhs, rhs, holds, conclusive: holds || d == 1 })
}

/// `1 - ((b + theta ell)/(b + ell))^M * B / ell`: lower bound on the probability that a
/// supermartingale-like process with contraction `theta` and floor `-b` drops below
/// `ell` within `M` steps. Negative values are vacuous.
pub fn lemma_st_bound<T: Scalar>(theta: T, b: T, ell: T, m: u64, big_b: T) -> T {
    let ratio = (b + theta * ell) / (b + ell);
    T::one() - ratio.powf(T::from_u64(m).unwrap()) * big_b / ell
}

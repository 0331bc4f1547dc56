//! Reproducible random streams, the scaled Gaussian direction `xi ~ N(0, I_d / d)`,
//! and the isotropic stochastic-gradient oracle.
//!
//! Streams are ChaCha8 generators keyed by `(master_seed, stream_index)`: the key is
//! expanded from `master_seed` with `SeedableRng::seed_from_u64` and `stream_index` selects
//! the ChaCha stream, so distinct indices never overlap. Normals come from the
//! `rand_distr::StandardNormal` ziggurat sampler; golden files depend on both choices.
//!
//! Within a solver iteration, draws are consumed in a fixed order: `d` normals for the
//! gradient noise (only when `r > 0`), then `d` normals for the GND perturbation.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::scalar::Scalar;

/// A single-consumer random stream derived from `(master_seed, stream_index)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    rng: ChaCha8Rng,
    master_seed: u64,
    stream_index: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_index);
        Self { rng, master_seed, stream_index }
    }

    pub fn origin(&self) -> (u64, u64) {
        (self.master_seed, self.stream_index)
    }

    #[inline]
    pub fn normal<T: Scalar>(&mut self) -> T {
        T::standard_normal(&mut self.rng)
    }

    #[inline]
    pub fn uniform<T: Scalar>(&mut self) -> T {
        T::standard_uniform(&mut self.rng)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Fills `out` with `xi ~ N(0, I_d / d)`, `d = out.len()`. Consumes exactly `d` normals.
pub fn fill_scaled_gaussian<T: Scalar>(rng: &mut RngStream, out: &mut [T]) {
    let scale = T::from_count(out.len()).sqrt();
    for v in out.iter_mut() {
        *v = rng.normal::<T>() / scale;
    }
}

pub fn sample_scaled_gaussian<T: Scalar>(d: usize, rng: &mut RngStream) -> Vec<T> {
    let mut xi = vec![T::zero(); d];
    fill_scaled_gaussian(rng, &mut xi);
    xi
}

/// `SG(x) = grad f(x) + r * xi` with `xi ~ N(0, I_d / d)`, so that
/// `E[SG(x)] = grad f(x)` and `E|SG(x) - grad f(x)|^2 = r^2`.
#[derive(Clone, Copy, Debug)]
pub struct SgOracle<'a, T> {
    objective: &'a Objective<T>,
    r: T,
}

impl<'a, T: Scalar> SgOracle<'a, T> {
    pub fn new(objective: &'a Objective<T>, r: T) -> Result<Self> {
        if !(r >= T::zero() && r.is_finite()) {
            return Err(Error::param("sg noise r must be finite and non-negative"));
        }
        Ok(Self { objective, r })
    }

    /// Full-gradient oracle (`r = 0`).
    pub fn exact(objective: &'a Objective<T>) -> Self {
        Self { objective, r: T::zero() }
    }

    pub fn objective(&self) -> &'a Objective<T> {
        self.objective
    }

    pub fn r(&self) -> T {
        self.r
    }

    /// Adds the oracle noise to an already evaluated gradient, in place.
    /// With `r = 0` the gradient is left untouched and no draws are consumed.
    pub fn perturb(&self, grad: &mut [T], rng: &mut RngStream) {
        if self.r == T::zero() {
            return;
        }
        let scale = T::from_count(grad.len()).sqrt();
        for g in grad.iter_mut() {
            *g = *g + self.r * (rng.normal::<T>() / scale);
        }
    }

    pub fn draw(&self, x: &[T], rng: &mut RngStream) -> Vec<T> {
        let mut g = self.objective.gradient(x);
        self.perturb(&mut g, rng);
        g
    }
}

/// `E|xi|^p` for `p = 1..=4`, `xi ~ N(0, I_d / d)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianMoments<T> {
    pub m1: T,
    pub m2: T,
    pub m3: T,
    pub m4: T,
}

impl<T: Copy> GaussianMoments<T> {
    pub fn as_array(&self) -> [T; 4] {
        [self.m1, self.m2, self.m3, self.m4]
    }
}

/// Exact moments from the chi distribution of `sqrt(d) |xi|`:
/// `m1 = sqrt(2/d) Gamma((d+1)/2) / Gamma(d/2)`, `m2 = 1`, `m3 = m1 (1 + 1/d)`, `m4 = 1 + 2/d`.
pub fn gaussian_moments_exact<T: Scalar>(d: usize) -> Result<GaussianMoments<T>> {
    if d == 0 {
        return Err(Error::param("dimension must be at least 1"));
    }
    let df = d as f64;
    let gamma_ratio = (libm::lgamma((df + 1.0) / 2.0) - libm::lgamma(df / 2.0)).exp();
    let m1 = (2.0 / df).sqrt() * gamma_ratio;
    Ok(GaussianMoments {
        m1: T::lit(m1),
        m2: T::one(),
        m3: T::lit(m1 * (1.0 + 1.0 / df)),
        m4: T::lit(1.0 + 2.0 / df),
    })
}

/// Monte-Carlo estimate of the same four moments with their standard errors.
#[derive(Clone, Copy, Debug)]
pub struct MomentEstimate {
    pub mean: [f64; 4],
    pub std_err: [f64; 4],
    pub draws: usize,
}

pub fn gaussian_moments_monte_carlo(d: usize, draws: usize, rng: &mut RngStream) -> Result<MomentEstimate> {
    if d == 0 || draws < 2 {
        return Err(Error::param("need d >= 1 and at least two draws"));
    }
    let mut xi = vec![0.0f64; d];
    let mut sum = [0.0f64; 4];
    let mut sum_sq = [0.0f64; 4];
    for _ in 0..draws {
        fill_scaled_gaussian(rng, &mut xi);
        let n2 = crate::scalar::norm_sq(&xi);
        let n1 = n2.sqrt();
        let powers = [n1, n2, n1 * n2, n2 * n2];
        for p in 0..4 {
            sum[p] += powers[p];
            sum_sq[p] += powers[p] * powers[p];
        }
    }
    let n = draws as f64;
    let mut mean = [0.0; 4];
    let mut std_err = [0.0; 4];
    for p in 0..4 {
        mean[p] = sum[p] / n;
        let var = ((sum_sq[p] - n * mean[p] * mean[p]) / (n - 1.0)).max(0.0);
        std_err[p] = (var / n).sqrt();
    }
    Ok(MomentEstimate { mean, std_err, draws })
}

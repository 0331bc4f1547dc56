//! Test functions with analytic gradients, known global minimizers, and
//! nearly-convexity certificates where one is proven.
//!
//! * `quadratic`: `(alpha/2) |x - x*|^2`, certified `(alpha, alpha)`.
//! * `j1`: `x^2/2 - (1 + 1/k) * int_0^x t sin^{2n}(t) dt`, certified `(21/25, 1)` once `n >= n_k`.
//! * `j2`: `(1 + eps sin(2R ln|x|)) x^2 / 2`, certified in the two admissible `(eps, R)` regimes.
//! * `rastrigin`: `a (d - sum cos(b x_i)) + c |x|^2`, never certified.
//!
//! Every objective is immutable after construction and cheap to share between threads.

mod fourier;

pub use fourier::{double_factorial_ratio, FourierSinCoefficients};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `(alpha, L)` pair for which the objective is known to be nearly convex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Certificate<T> {
    pub alpha: T,
    pub lipschitz: T,
}

#[derive(Clone, Debug)]
enum Kind<T> {
    Quadratic {
        alpha: T,
    },
    J1 {
        n: u32,
        k: u32,
        /// `1 + 1/k`
        weight: T,
        coeffs: FourierSinCoefficients<T>,
    },
    J2 {
        eps: T,
        r: T,
    },
    Rastrigin {
        a: T,
        b: T,
        c: T,
    },
}

#[derive(Clone, Debug)]
pub struct Objective<T> {
    kind: Kind<T>,
    dim: usize,
    minimizer: Vec<T>,
    min_value: T,
    certificate: Option<Certificate<T>>,
}

fn check_finite<T: Scalar>(name: &str, v: T) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("{name} must be finite")))
    }
}

impl<T: Scalar> Objective<T> {
    /// `(alpha/2) |x - x_star|^2` in `x_star.len()` dimensions.
    pub fn quadratic(alpha: T, x_star: Vec<T>) -> Result<Self> {
        check_finite("alpha", alpha)?;
        if alpha <= T::zero() {
            return Err(Error::param("quadratic: alpha must be positive"));
        }
        if x_star.is_empty() {
            return Err(Error::param("quadratic: dimension must be at least 1"));
        }
        if x_star.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("quadratic: minimizer must be finite"));
        }
        Ok(Self {
            kind: Kind::Quadratic { alpha },
            dim: x_star.len(),
            minimizer: x_star,
            min_value: T::zero(),
            certificate: Some(Certificate { alpha, lipschitz: alpha }),
        })
    }

    /// Quadratic centred at the origin.
    pub fn quadratic_origin(alpha: T, dim: usize) -> Result<Self> {
        Self::quadratic(alpha, vec![T::zero(); dim])
    }

    pub fn j1(n: u32, k: u32) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(Error::param("j1: n and k must be positive"));
        }
        let certificate = (n >= compute_nk(k)).then(|| Certificate {
            alpha: T::lit(21.0 / 25.0),
            lipschitz: T::one(),
        });
        Ok(Self {
            kind: Kind::J1 {
                n,
                k,
                weight: T::one() + T::one() / T::from_u32(k).unwrap(),
                coeffs: FourierSinCoefficients::new(n),
            },
            dim: 1,
            minimizer: vec![T::zero()],
            min_value: T::zero(),
            certificate,
        })
    }

    pub fn j2(eps: T, r: T) -> Result<Self> {
        check_finite("eps", eps)?;
        check_finite("R", r)?;
        if !(eps > T::zero() && eps < T::one()) {
            return Err(Error::param("j2: eps must lie in (0, 1)"));
        }
        if r <= T::zero() {
            return Err(Error::param("j2: R must be positive"));
        }
        let spread = eps * (T::one() + r * r).sqrt();
        let certificate = if spread < T::one() {
            Some(Certificate {
                alpha: T::one() - spread,
                lipschitz: T::one() + spread,
            })
        } else if T::lit(4.0) * eps * (T::one() + spread).powf(T::lit(1.5)) <= T::one() {
            Some(Certificate {
                alpha: T::one(),
                lipschitz: T::one() + spread,
            })
        } else {
            None
        };
        Ok(Self {
            kind: Kind::J2 { eps, r },
            dim: 1,
            minimizer: vec![T::zero()],
            min_value: T::zero(),
            certificate,
        })
    }

    pub fn rastrigin(a: T, b: T, c: T, dim: usize) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("c", c)] {
            check_finite(name, v)?;
            if v <= T::zero() {
                return Err(Error::param(format!("rastrigin: {name} must be positive")));
            }
        }
        if dim == 0 {
            return Err(Error::param("rastrigin: dimension must be at least 1"));
        }
        Ok(Self {
            kind: Kind::Rastrigin { a, b, c },
            dim,
            minimizer: vec![T::zero(); dim],
            min_value: T::zero(),
            certificate: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn minimizer(&self) -> &[T] {
        &self.minimizer
    }

    pub fn min_value(&self) -> T {
        self.min_value
    }

    pub fn certificate(&self) -> Option<Certificate<T>> {
        self.certificate
    }

    pub fn name(&self) -> String {
        match &self.kind {
            Kind::Quadratic { alpha } => format!("quadratic(alpha={alpha}, d={})", self.dim),
            Kind::J1 { n, k, .. } => format!("j1(n={n}, k={k})"),
            Kind::J2 { eps, r } => format!("j2(eps={eps}, R={r})"),
            Kind::Rastrigin { a, b, c } => {
                format!("rastrigin(a={a}, b={b}, c={c}, d={})", self.dim)
            }
        }
    }

    pub fn value(&self, x: &[T]) -> T {
        debug_assert_eq!(x.len(), self.dim);
        match &self.kind {
            Kind::Quadratic { alpha } => {
                *alpha / T::lit(2.0) * crate::scalar::dist_sq(x, &self.minimizer)
            }
            Kind::J1 { weight, coeffs, .. } => {
                let x = x[0];
                x * x / T::lit(2.0) - *weight * weighted_sin_power_integral(coeffs, x)
            }
            Kind::J2 { eps, r } => {
                let x = x[0];
                if x == T::zero() {
                    return T::zero();
                }
                let phase = T::lit(2.0) * *r * x.abs().ln();
                (T::one() + *eps * phase.sin()) / T::lit(2.0) * x * x
            }
            Kind::Rastrigin { a, b, c } => {
                let (cos_sum, sq_sum) = x.iter().fold((T::zero(), T::zero()), |(cs, ss), &xi| {
                    (cs + (*b * xi).cos(), ss + xi * xi)
                });
                *a * (T::from_count(self.dim) - cos_sum) + *c * sq_sum
            }
        }
    }

    /// Writes the gradient at `x` into `out`.
    pub fn gradient_into(&self, x: &[T], out: &mut [T]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        match &self.kind {
            Kind::Quadratic { alpha } => {
                for ((o, &xi), &ci) in out.iter_mut().zip(x).zip(&self.minimizer) {
                    *o = *alpha * (xi - ci);
                }
            }
            Kind::J1 { n, weight, .. } => {
                let x = x[0];
                let sp = x.abs().sin().powi(2 * *n as i32);
                out[0] = x * (T::one() - *weight * sp);
            }
            Kind::J2 { eps, r } => {
                let x = x[0];
                out[0] = if x == T::zero() {
                    T::zero()
                } else {
                    let (s, c) = (T::lit(2.0) * *r * x.abs().ln()).sin_cos();
                    (T::one() + *eps * s + *eps * *r * c) * x
                };
            }
            Kind::Rastrigin { a, b, c } => {
                for (o, &xi) in out.iter_mut().zip(x) {
                    *o = *a * *b * (*b * xi).sin() + T::lit(2.0) * *c * xi;
                }
            }
        }
    }

    pub fn gradient(&self, x: &[T]) -> Vec<T> {
        let mut g = vec![T::zero(); self.dim];
        self.gradient_into(x, &mut g);
        g
    }
}

/// `int_0^x t sin^{2n}(t) dt` from the cosine series of `sin^{2n}`.
///
/// Each cosine term integrates to `x sin(2jx)/(2j) + (cos(2jx) - 1)/(4j^2)`; the second
/// part is evaluated as `-sin^2(jx)/(2j^2)` to keep precision near the origin.
fn weighted_sin_power_integral<T: Scalar>(coeffs: &FourierSinCoefficients<T>, x: T) -> T {
    let x = x.abs();
    let c = coeffs.coefficients();
    let two = T::lit(2.0);
    let mut series = T::zero();
    for (j, &cj) in c.iter().enumerate().skip(1) {
        let jf = T::from_count(j);
        let s_half = (jf * x).sin();
        let term = x * (two * jf * x).sin() / (two * jf) - s_half * s_half / (two * jf * jf);
        if j % 2 == 0 {
            series = series + cj * term;
        } else {
            series = series - cj * term;
        }
    }
    c[0] * x * x / two + two * series
}

/// Least `n` with `(2n-1)!!/(2n)!! <= 2k / (25 (k+1))`: the threshold past which
/// `j1(n, k)` is certified `(21/25, 1)`-nearly convex.
pub fn compute_nk(k: u32) -> u32 {
    assert!(k >= 1, "compute_nk: k must be positive");
    let target = 2.0 * k as f64 / (25.0 * (k as f64 + 1.0));
    let mut ratio = 1.0f64;
    let mut n = 0u32;
    while ratio > target {
        n += 1;
        ratio *= (2 * n - 1) as f64 / (2 * n) as f64;
    }
    n
}

/// Which branch of `j*pi +- arcsin((k/(k+1))^{1/(2n)})` a stationary point of `j1` sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StationaryPoint<T> {
    pub x: T,
    pub j: u32,
    pub branch: Branch,
}

impl<T> StationaryPoint<T> {
    /// `x_j^-` (j >= 1) are strict local minima; `x_j^+` are local maxima.
    pub fn is_local_min(&self) -> bool {
        self.branch == Branch::Minus
    }
}

/// Positive nonzero stationary points `x_j^{+-}` of `j1(n, k)` for `0 <= j <= j_max`,
/// in increasing order. Each is checked to have `|gradient| <= 1e-9`.
pub fn j1_stationary_points<T: Scalar>(n: u32, k: u32, j_max: i64) -> Result<Vec<StationaryPoint<T>>> {
    if j_max < 0 {
        return Err(Error::param("j_max must be non-negative"));
    }
    let obj = Objective::<T>::j1(n, k)?;
    let kf = T::from_u32(k).unwrap();
    let offset = (kf / (kf + T::one()))
        .powf(T::one() / T::from_u32(2 * n).unwrap())
        .asin();
    let mut points = Vec::new();
    for j in 0..=j_max as u32 {
        let base = T::from_u32(j).unwrap() * T::PI();
        if j > 0 {
            points.push(StationaryPoint { x: base - offset, j, branch: Branch::Minus });
        }
        points.push(StationaryPoint { x: base + offset, j, branch: Branch::Plus });
    }
    for p in &points {
        let g = obj.gradient(&[p.x])[0];
        if g.abs() > T::lit(1e-9) {
            return Err(Error::param(format!(
                "stationary point x={} has gradient {} beyond 1e-9",
                p.x, g
            )));
        }
    }
    Ok(points)
}

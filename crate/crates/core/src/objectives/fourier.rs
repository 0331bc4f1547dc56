//! Cosine-series coefficients of `sin^{2n}`.
//!
//! `sin^{2n} t = c_0 + 2 * sum_{j=1..n} (-1)^j c_j cos(2 j t)` with `c_j = C(2n, n-j) / 4^n`.
//! The coefficients are produced by ratio recurrences only, so the same code runs on
//! floats and on exact rationals.

use std::ops::{Div, Mul};

use num_traits::{FromPrimitive, One};

/// `(2n-1)!! / (2n)!!`, built as `r_n = r_{n-1} * (2n-1) / (2n)`, `r_0 = 1`.
pub fn double_factorial_ratio<T>(n: u32) -> T
where
    T: Clone + One + Mul<Output = T> + Div<Output = T> + FromPrimitive,
{
    (1..=n).fold(T::one(), |r, i| {
        r * from_u64::<T>(2 * i as u64 - 1) / from_u64::<T>(2 * i as u64)
    })
}

fn from_u64<T: FromPrimitive>(v: u64) -> T {
    T::from_u64(v).expect("small integer representable")
}

#[derive(Clone, Debug, PartialEq)]
pub struct FourierSinCoefficients<T> {
    n: u32,
    c: Vec<T>,
}

impl<T> FourierSinCoefficients<T>
where
    T: Clone + One + Mul<Output = T> + Div<Output = T> + FromPrimitive,
{
    /// Coefficients `c_0..=c_n` for `sin^{2n}`; `n >= 1` is the caller's responsibility.
    pub fn new(n: u32) -> Self {
        let mut c = Vec::with_capacity(n as usize + 1);
        let mut cj = double_factorial_ratio::<T>(n);
        for j in 0..n {
            let next = cj.clone() * from_u64::<T>((n - j) as u64) / from_u64::<T>((n + j + 1) as u64);
            c.push(cj);
            cj = next;
        }
        c.push(cj);
        Self { n, c }
    }
}

impl<T> FourierSinCoefficients<T> {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn coefficients(&self) -> &[T] {
        &self.c
    }
}

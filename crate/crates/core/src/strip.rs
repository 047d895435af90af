//! Poisson kernel of the strip `S = {0 ≤ Re z ≤ 1}` and quadrature against it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Point `x + iy` of the strip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripPoint<T: Real = f64> {
    pub x: T,
    pub y: T,
}

impl<T: Real> StripPoint<T> {
    pub fn new(x: T, y: T) -> Result<Self> {
        if !(x >= T::zero() && x <= T::one()) || !y.is_finite_val() {
            return Err(Error::InvalidArgument(format!(
                "({}, {}) is not in the strip",
                x.as_f64(),
                y.as_f64()
            )));
        }
        Ok(Self { x, y })
    }

    fn interior(self) -> Result<Self> {
        if self.x > T::zero() && self.x < T::one() {
            Ok(self)
        } else {
            Err(Error::InvalidArgument(format!(
                "x = {} lies on the boundary",
                self.x.as_f64()
            )))
        }
    }
}

/// Half-width of the integration window around `y`; the kernel tail beyond
/// it is below `e^{-12π}`.
pub const STRIP_WINDOW: f64 = 12.0;

fn kernel<T: Real>(b: u8, z: StripPoint<T>, s: T) -> T {
    let pi = T::pi();
    let num = (pi * z.x).sin();
    let u = pi * (z.y - s);
    // cosh(u) − cos(v) = 2 sinh²(u/2) + 2 sin²(v/2), without cancellation
    let v = pi * (z.x - T::of(b as f64));
    let half = T::of(0.5);
    let den = T::of(2.0) * ((u * half).sinh().powi(2) + (v * half).sin().powi(2));
    num / (T::of(2.0) * den)
}

/// `P_b(x+iy, s) = sin(πx) / (2(cosh(π(y−s)) − cos(π(x−b))))` for `b ∈ {0, 1}`.
pub fn poisson_kernel_strip<T: Real>(b: u8, z: StripPoint<T>, s: T) -> Result<T> {
    if b > 1 {
        return Err(Error::InvalidArgument(format!(
            "boundary label must be 0 or 1, got {b}"
        )));
    }
    Ok(kernel(b, z.interior()?, s))
}

/// `∫ P_b(z, s) f(s) ds` by composite Simpson on `|s − y| ≤ 12`, doubling
/// the grid until successive estimates differ by less than `1e-9`.
pub fn strip_quadrature<T: Real>(f: impl Fn(T) -> T, b: u8, z: StripPoint<T>) -> Result<T> {
    if b > 1 {
        return Err(Error::InvalidArgument(format!(
            "boundary label must be 0 or 1, got {b}"
        )));
    }
    let z = z.interior()?;
    let w = T::of(STRIP_WINDOW);
    let (lo, hi) = (z.y - w, z.y + w);
    let g = |s: T| kernel(b, z, s) * f(s);
    let tol = T::tol(1e-9);

    let mut n = 256usize;
    let mut h = (hi - lo) / T::of(n as f64);
    // running sums over even and odd interior nodes
    let ends = g(lo) + g(hi);
    let mut even = T::zero();
    let mut odd = (0..n / 2).fold(T::zero(), |acc, k| {
        acc + g(lo + h * T::of((2 * k + 1) as f64))
    });
    for k in 1..n / 2 {
        even += g(lo + h * T::of((2 * k) as f64));
    }
    let mut prev = (ends + T::of(4.0) * odd + T::of(2.0) * even) * h / T::of(3.0);
    while n < 1 << 24 {
        n *= 2;
        h = (hi - lo) / T::of(n as f64);
        even += odd;
        odd = (0..n / 2).fold(T::zero(), |acc, k| {
            acc + g(lo + h * T::of((2 * k + 1) as f64))
        });
        let cur = (ends + T::of(4.0) * odd + T::of(2.0) * even) * h / T::of(3.0);
        if (cur - prev).abs() < tol {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::NoConvergence {
        what: "strip quadrature",
        iterations: n,
    })
}

use nalgebra::ComplexField;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{
    cis, eval_analytic, eval_trig, spectral_factorize, AnalyticMatPoly, OuternessCertificate,
    TrigMatPoly,
};
use crate::error::{Error, Result};
use crate::linalg::{c, eigvals_herm, CMat};
use crate::scalar::Real;

/// `φ(z) = (1/iπ) log(i(1+z)/(1−z))`, mapping the open unit disk onto the
/// interior of the strip `0 < Re w < 1`.
pub fn conformal_map<T: Real>(z: Complex<T>) -> Result<Complex<T>> {
    if !(z.norm_sqr() < T::one()) {
        return Err(Error::InvalidArgument("conformal map needs |z| < 1".into()));
    }
    let one = c(T::one());
    let i = Complex::new(T::zero(), T::one());
    let u = i * (one + z) / (one - z);
    Ok(ComplexField::ln(u) / (i * T::pi()))
}

/// Inverse of [`conformal_map`]: `z = (v−1)/(v+1)` with `v = −i e^{iπw}`.
pub fn conformal_inverse<T: Real>(w: Complex<T>) -> Result<Complex<T>> {
    if !(w.re > T::zero() && w.re < T::one()) {
        return Err(Error::InvalidArgument(
            "conformal inverse needs 0 < Re w < 1".into(),
        ));
    }
    let one = c(T::one());
    let i = Complex::new(T::zero(), T::one());
    let v = -i * ComplexField::exp(i * w * T::pi());
    Ok((v - one) / (v + one))
}

/// Boundary point of the strip hit by `e^{it}`, `t ∈ (−π, π) \ {0}`:
/// the upper arc goes to `Re w = 1`, the lower arc to `Re w = 0`.
fn boundary_of_angle<T: Real>(t: T) -> (u8, T) {
    let half = T::of(0.5);
    if t > T::zero() {
        (1, (t * half).tan().ln() / T::pi())
    } else {
        (0, (-t * half).tan().ln() / T::pi())
    }
}

/// Angle of the circle point mapped to `b + is`.
fn angle_of_boundary<T: Real>(b: u8, s: T) -> T {
    let t = T::of(2.0) * (T::pi() * s).exp().atan();
    if b == 1 {
        t
    } else {
        -t
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StripOptions<T: Real = f64> {
    /// Band half-width `N` of the Fourier fit on the circle.
    pub band: usize,
    /// Number of boundary samples.
    pub samples: usize,
    /// Largest acceptable fit error.
    pub fit_tol: T,
    /// Residual tolerance of the factorization of the fitted symbol.
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Real> Default for StripOptions<T> {
    fn default() -> Self {
        Self {
            band: 8,
            samples: 4096,
            fit_tol: T::tol(1e-6),
            tol: T::tol(1e-8),
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StripFactorization<T: Real = f64> {
    /// Outer factor on the disk; the strip factor is `A ∘ φ^{-1}`.
    pub factor: AnalyticMatPoly<T>,
    /// The fitted symbol on the circle.
    pub symbol: TrigMatPoly<T>,
    /// `max ‖T_fit − T_b‖_F` over the boundary samples.
    pub fit_error: T,
    /// `max ‖A†A − T_fit‖_F` on the circle.
    pub factorization_residual: T,
    /// `max ‖A†A − T_b(s)‖_F` against the original boundary data.
    pub residual: T,
    pub certificate: Option<OuternessCertificate<T>>,
}

impl<T: Real> StripFactorization<T> {
    /// Factor at an interior point of the strip.
    pub fn eval(&self, w: Complex<T>) -> Result<CMat<T>> {
        Ok(eval_analytic(&self.factor, conformal_inverse(w)?))
    }

    /// Boundary value at `b + is`.
    pub fn eval_boundary(&self, b: u8, s: T) -> Result<CMat<T>> {
        if b > 1 {
            return Err(Error::InvalidArgument(format!(
                "boundary label must be 0 or 1, got {b}"
            )));
        }
        Ok(eval_analytic(&self.factor, cis(angle_of_boundary(b, s))))
    }
}

/// Factorizes `T_b(b+is) = A(b+is)† A(b+is)` on the strip boundary by pulling
/// the data back to the circle, fitting a band-`N` trigonometric polynomial
/// and factorizing it.
pub fn strip_factorize<T: Real>(
    t0: impl Fn(T) -> CMat<T>,
    t1: impl Fn(T) -> CMat<T>,
    lambda_floor: T,
    opts: &StripOptions<T>,
) -> Result<StripFactorization<T>> {
    let m = opts.samples.max(4 * opts.band + 4);
    let sample = |t: T| -> CMat<T> {
        let (b, s) = boundary_of_angle(t);
        let v = if b == 1 { t1(s) } else { t0(s) };
        (&v + v.adjoint()) * c(T::of(0.5))
    };
    // midpoint grid avoids t = 0 and t = ±π, the images of s = ±∞
    let angles: Vec<T> = (0..m)
        .map(|j| -T::pi() + T::two_pi() * (T::of(j as f64) + T::of(0.5)) / T::of(m as f64))
        .collect();
    let values: Vec<CMat<T>> = angles.iter().map(|&t| sample(t)).collect();
    let d = values[0].nrows();
    if values.iter().any(|v| v.nrows() != d || v.ncols() != d) {
        return Err(Error::Dimension(
            "boundary samples must be square and of equal size".into(),
        ));
    }
    for v in &values {
        let lmin = eigvals_herm(v).iter().fold(T::infinity(), |a, &b| a.min(b));
        if lmin < lambda_floor {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: lmin.as_f64(),
            });
        }
    }

    let inv_m = T::one() / T::of(m as f64);
    let coeffs: Vec<CMat<T>> = (0..=opts.band)
        .map(|k| {
            angles
                .iter()
                .zip(&values)
                .fold(CMat::zeros(d, d), |acc, (&t, v)| {
                    acc + v * cis(-t * T::of(k as f64))
                })
                * c(inv_m)
        })
        .collect();
    let mut coeffs = coeffs;
    coeffs[0] = (&coeffs[0] + coeffs[0].adjoint()) * c(T::of(0.5));
    let symbol = TrigMatPoly::new(coeffs)?;

    // fit error on the sample grid and on the interleaved grid
    let mut fit_error = T::zero();
    for (&t, v) in angles.iter().zip(&values) {
        fit_error = fit_error.max((eval_trig(&symbol, t).as_mat() - v).norm());
    }
    for j in 1..m {
        let t = -T::pi() + T::two_pi() * T::of(j as f64) * inv_m;
        if t.abs() < T::of(1e-12) {
            continue;
        }
        fit_error = fit_error.max((eval_trig(&symbol, t).as_mat() - sample(t)).norm());
    }
    if fit_error > opts.fit_tol {
        return Err(Error::FitError {
            fit_error: fit_error.as_f64(),
            tol: opts.fit_tol.as_f64(),
            band: opts.band,
        });
    }

    let f = spectral_factorize(&symbol, opts.tol, opts.max_iter)?;
    let mut residual = T::zero();
    for (&t, v) in angles.iter().zip(&values) {
        let a = eval_analytic(&f.factor, cis(t));
        residual = residual.max((a.adjoint() * &a - v).norm());
    }
    Ok(StripFactorization {
        factor: f.factor,
        symbol,
        fit_error,
        factorization_residual: f.residual,
        residual,
        certificate: f.certificate,
    })
}

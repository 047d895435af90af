use std::sync::Arc;

use nalgebra::ComplexField;
use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{cis, eval_analytic, eval_trig, AnalyticMatPoly, TrigMatPoly};
use crate::error::{Error, Result};
use crate::linalg::{c, CMat};
use crate::scalar::Real;

const BASE_GRID: usize = 4096;
const MAX_GRID: usize = 32768;
const WINDING_SAMPLES: usize = 8192;
const RADII: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 0.95];
const ANGLES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Wilson,
    Bauer,
    /// Root splitting of a scalar symbol, used when it touches zero on the circle.
    Roots,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuternessCertificate<T: Real = f64> {
    /// Winding number of `det A(e^{it})` around the origin.
    pub winding: i64,
    /// Smallest `|det A(z)|` over the interior sample points.
    pub min_abs_det: T,
    pub boundary_min_abs_det: T,
}

impl<T: Real> OuternessCertificate<T> {
    pub fn is_outer(&self) -> bool {
        self.winding == 0 && self.min_abs_det > T::zero()
    }
}

#[derive(Debug, Clone)]
pub struct Factorization<T: Real = f64> {
    pub factor: AnalyticMatPoly<T>,
    /// `max_t ‖A†A − T‖_F` on the 4096-point grid.
    pub residual: T,
    /// Same on a grid twice as fine.
    pub refined_residual: T,
    /// Grid size of the final Newton run.
    pub grid: usize,
    pub iterations: usize,
    pub method: Method,
    /// Largest coefficient norm beyond degree `N` before truncation.
    pub tail: T,
    /// `None` when `det A` vanishes on the circle.
    pub certificate: Option<OuternessCertificate<T>>,
}

impl<T: Real> Factorization<T> {
    pub fn is_outer(&self) -> bool {
        self.certificate.as_ref().is_some_and(|c| c.is_outer())
    }
}

/// FFT plans for one grid size; every call builds its own.
struct Grid<T: Real> {
    m: usize,
    d: usize,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
}

impl<T: Real> Grid<T> {
    fn new(m: usize, d: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            m,
            d,
            fwd: planner.plan_fft_forward(m),
            inv: planner.plan_fft_inverse(m),
        }
    }

    /// Values `Σ_k X_k e^{ik t_j}` at `t_j = 2πj/M` from coefficients indexed mod `M`.
    fn values(&self, coeffs: &[CMat<T>]) -> Vec<CMat<T>> {
        self.transform(coeffs, &self.inv, T::one())
    }

    fn coeffs(&self, values: &[CMat<T>]) -> Vec<CMat<T>> {
        self.transform(values, &self.fwd, T::one() / T::of(self.m as f64))
    }

    fn transform(&self, input: &[CMat<T>], plan: &Arc<dyn Fft<T>>, scale: T) -> Vec<CMat<T>> {
        let mut out = vec![CMat::zeros(self.d, self.d); self.m];
        let mut buf = vec![Complex::new(T::zero(), T::zero()); self.m];
        for r in 0..self.d {
            for col in 0..self.d {
                for (b, x) in buf.iter_mut().zip(input) {
                    *b = x[(r, col)];
                }
                plan.process(&mut buf);
                for (o, b) in out.iter_mut().zip(&buf) {
                    o[(r, col)] = *b * scale;
                }
            }
        }
        out
    }
}

fn max_residual<T: Real>(a: &[CMat<T>], t: &[CMat<T>]) -> T {
    a.iter()
        .zip(t)
        .map(|(aj, tj)| (aj.adjoint() * aj - tj).norm())
        .fold(T::zero(), |x, y| x.max(y))
}

struct NewtonRun<T: Real> {
    coeffs: Vec<CMat<T>>,
    iterations: usize,
}

/// Wilson's Newton iteration `A ← (I + {A^{−†} T A^{−1} − I}_+) A` on an
/// `m`-point grid, where `{·}_+` keeps positive frequencies and half the mean.
fn wilson<T: Real>(poly: &TrigMatPoly<T>, m: usize, max_iter: usize) -> Result<NewtonRun<T>> {
    let d = poly.dim();
    let grid = Grid::new(m, d);
    let n = poly.band() as i64;
    let mut tc = vec![CMat::zeros(d, d); m];
    for k in -n..=n {
        tc[k.rem_euclid(m as i64) as usize] = poly.coeff(k);
    }
    let tv: Vec<CMat<T>> = grid
        .values(&tc)
        .into_iter()
        .map(|x| (&x + x.adjoint()) * c(T::of(0.5)))
        .collect();

    let chol = poly.coeff(0).cholesky().ok_or(Error::NotPositiveDefinite {
        min_eigenvalue: f64::NAN,
    })?;
    let mut ac = vec![CMat::zeros(d, d); m];
    ac[0] = chol.l().adjoint();
    let mut av = grid.values(&ac);
    let mut best = max_residual(&av, &tv);
    let mut best_coeffs = ac.clone();
    let mut stalls = 0;
    let mut iterations = 0;
    let eye = CMat::<T>::identity(d, d);
    let target = T::tol(1e-14);

    while iterations < max_iter && best > target {
        iterations += 1;
        let mut gv = Vec::with_capacity(m);
        for (aj, tj) in av.iter().zip(&tv) {
            let inv = aj.clone().try_inverse().ok_or(Error::Singular)?;
            let g = inv.adjoint() * tj * &inv;
            gv.push((&g + g.adjoint()) * c(T::of(0.5)));
        }
        let gc = grid.coeffs(&gv);
        let mut yc = vec![CMat::zeros(d, d); m];
        let g0 = (&gc[0] + gc[0].adjoint()) * c(T::of(0.5));
        yc[0] = (g0 + &eye) * c(T::of(0.5));
        for k in 1..m / 2 {
            yc[k] = gc[k].clone();
        }
        let yv = grid.values(&yc);
        let prod: Vec<CMat<T>> = yv.iter().zip(&av).map(|(y, a)| y * a).collect();
        ac = grid.coeffs(&prod);
        for x in ac.iter_mut().skip(m / 2) {
            x.fill(Complex::new(T::zero(), T::zero()));
        }
        av = grid.values(&ac);
        let res = max_residual(&av, &tv);
        if !res.is_finite_val() {
            break;
        }
        if res < best * T::of(0.5) {
            stalls = 0;
        } else {
            stalls += 1;
        }
        if res < best {
            best = res;
            best_coeffs.clone_from(&ac);
        }
        if stalls >= 4 {
            break;
        }
    }
    Ok(NewtonRun {
        coeffs: best_coeffs,
        iterations,
    })
}

/// Bauer's method: block Cholesky of the finite block-Toeplitz section, whose
/// last block row approaches the outer factor as the section grows.
fn bauer<T: Real>(poly: &TrigMatPoly<T>, blocks: usize) -> Result<Vec<CMat<T>>> {
    let d = poly.dim();
    let size = (blocks + 1) * d;
    let mut big = CMat::zeros(size, size);
    for i in 0..=blocks {
        for j in 0..=blocks {
            let cij = poly.coeff(j as i64 - i as i64);
            big.view_mut((i * d, j * d), (d, d)).copy_from(&cij);
        }
    }
    let l = big
        .cholesky()
        .ok_or(Error::NotPositiveDefinite {
            min_eigenvalue: f64::NAN,
        })?
        .l();
    let n = poly.band().min(blocks);
    Ok((0..=n)
        .map(|k| l.view((blocks * d, (blocks - k) * d), (d, d)).adjoint())
        .collect())
}

/// Makes `A(0)` positive semidefinite by a constant unitary on the left.
fn fix_gauge<T: Real>(coeffs: &mut [CMat<T>]) {
    let svd = coeffs[0].clone().svd(true, true);
    let (Some(u), Some(vt)) = (svd.u, svd.v_t) else {
        return;
    };
    let w = (u * vt).adjoint();
    for a in coeffs.iter_mut() {
        *a = &w * &*a;
    }
}

fn grid_residual<T: Real>(poly: &TrigMatPoly<T>, a: &AnalyticMatPoly<T>, m: usize) -> T {
    (0..m)
        .map(|j| {
            let t = T::two_pi() * T::of(j as f64) / T::of(m as f64);
            let at = eval_analytic(a, cis(t));
            (at.adjoint() * &at - eval_trig(poly, t).as_mat()).norm()
        })
        .fold(T::zero(), |x, y| x.max(y))
}

/// Outer factor `A` of degree `N` with `A†A = T` on the unit circle and `A(0) ⪰ 0`.
///
/// Newton runs on grids of 4096 points, doubled up to 32768 while the residual
/// exceeds `tol`; Bauer's method is the fallback when Newton stagnates.
pub fn spectral_factorize<T: Real>(
    poly: &TrigMatPoly<T>,
    tol: T,
    max_iter: usize,
) -> Result<Factorization<T>> {
    let d = poly.dim();
    let scale = poly.coeff(0).norm().max(T::of(1e-300));
    let normalized = poly.scale(T::one() / scale);
    let lmin = normalized.min_eigenvalue(1024);
    let definite = lmin > T::tol(1e-13);
    if !definite && !(d == 1 && lmin > -T::tol(1e-12)) {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: (lmin * scale).as_f64(),
        });
    }
    let root = scale.sqrt();
    let n = poly.band();

    let finish = |mut coeffs: Vec<CMat<T>>,
                  tail: T,
                  grid: usize,
                  iterations: usize,
                  method: Method|
     -> Result<Factorization<T>> {
        coeffs.truncate(n + 1);
        while coeffs.len() < n + 1 {
            coeffs.push(CMat::zeros(d, d));
        }
        fix_gauge(&mut coeffs);
        let factor = AnalyticMatPoly::new(coeffs.into_iter().map(|a| a * c(root)).collect())?;
        let residual = grid_residual(poly, &factor, BASE_GRID);
        let refined_residual = grid_residual(poly, &factor, 2 * BASE_GRID);
        let certificate = match outerness_certificate(&factor) {
            Ok(cert) => Some(cert),
            Err(Error::IndeterminateCertificate { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(Factorization {
            factor,
            residual,
            refined_residual,
            grid,
            iterations,
            method,
            tail: tail * root,
            certificate,
        })
    };

    if !definite {
        let f = finish(scalar_roots(&normalized)?, T::zero(), 0, 0, Method::Roots)?;
        return if f.residual <= tol {
            Ok(f)
        } else {
            Err(Error::Stagnation {
                best_residual: f.residual.as_f64(),
            })
        };
    }

    let mut best: Option<Factorization<T>> = None;
    let mut m = BASE_GRID;
    while m <= MAX_GRID {
        if let Ok(run) = wilson(&normalized, m, max_iter) {
            let tail = run.coeffs[n + 1..m / 2]
                .iter()
                .fold(T::zero(), |a, x| a.max(x.norm()));
            let f = finish(run.coeffs, tail, m, run.iterations, Method::Wilson)?;
            let ok = f.residual <= tol && f.is_outer();
            if best.as_ref().is_none_or(|b| f.residual < b.residual) {
                best = Some(f);
            }
            if ok {
                return Ok(best.expect("just stored"));
            }
        }
        m *= 2;
    }

    let mut blocks = 32;
    while (blocks + 1) * d <= 1100 {
        let coeffs = bauer(&normalized, blocks)?;
        let f = finish(coeffs, T::zero(), 0, blocks, Method::Bauer)?;
        let ok = f.residual <= tol && f.is_outer();
        if best.as_ref().is_none_or(|b| f.residual < b.residual) {
            best = Some(f);
        }
        if ok {
            return Ok(best.expect("just stored"));
        }
        blocks *= 2;
    }
    Err(Error::Stagnation {
        best_residual: best.map_or(f64::NAN, |b| b.residual.as_f64()),
    })
}

/// Fejér–Riesz by roots for a scalar symbol `T ⪰ 0`: the roots of `z^N T(z)`
/// come in pairs `(r, 1/r̄)`; `A` keeps those outside the disk and one of
/// each double root on the circle.
fn scalar_roots<T: Real>(poly: &TrigMatPoly<T>) -> Result<Vec<CMat<T>>> {
    let scale = poly.coeff(0)[(0, 0)].re;
    let mut n = poly.band();
    while n > 0 && ComplexField::modulus(poly.coeff(n as i64)[(0, 0)]) <= T::tol(1e-14) * scale {
        n -= 1;
    }
    if n == 0 {
        return Ok(vec![CMat::from_element(
            1,
            1,
            c(scale.max(T::zero()).sqrt()),
        )]);
    }
    // companion matrix of p(z) = Σ_{j=0}^{2n} C_{j−n} z^j
    let deg = 2 * n;
    let lead = poly.coeff(n as i64)[(0, 0)];
    let mut comp = CMat::zeros(deg, deg);
    for j in 0..deg {
        comp[(0, j)] = -poly.coeff(n as i64 - 1 - j as i64)[(0, 0)] / lead;
        if j + 1 < deg {
            comp[(j + 1, j)] = c(T::one());
        }
    }
    let roots = comp.schur().eigenvalues().ok_or(Error::NoConvergence {
        what: "companion eigenvalues",
        iterations: 0,
    })?;
    let band = T::of(1e-4);
    let mut kept: Vec<Complex<T>> = roots
        .iter()
        .copied()
        .filter(|r| ComplexField::modulus(*r) > T::one() + band)
        .collect();
    let mut on_circle: Vec<Complex<T>> = roots
        .iter()
        .copied()
        .filter(|r| (ComplexField::modulus(*r) - T::one()).abs() <= band)
        .collect();
    while let Some(r) = on_circle.pop() {
        let (k, _) = on_circle
            .iter()
            .enumerate()
            .map(|(k, q)| (k, ComplexField::modulus(*q - r)))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
            .ok_or(Error::NoConvergence {
                what: "pairing roots on the unit circle",
                iterations: 0,
            })?;
        let mean = (r + on_circle.swap_remove(k)) * c(T::of(0.5));
        kept.push(mean / c(ComplexField::modulus(mean)));
    }
    if kept.len() != n {
        return Err(Error::NoConvergence {
            what: "root splitting",
            iterations: kept.len(),
        });
    }
    // expand Π (z − r_k), lowest degree first
    let mut coeffs = vec![c(T::one())];
    for r in &kept {
        let mut next = vec![c(T::zero()); coeffs.len() + 1];
        for (j, &a) in coeffs.iter().enumerate() {
            next[j + 1] += a;
            next[j] -= a * r;
        }
        coeffs = next;
    }
    // |γ|² from the mean of T and of |Π(e^{it} − r_k)|²
    let mass: T = coeffs.iter().fold(T::zero(), |a, z| a + z.norm_sqr());
    let gamma = (scale / mass).sqrt();
    Ok(coeffs
        .into_iter()
        .map(|a| CMat::from_element(1, 1, a * gamma))
        .collect())
}

fn det<T: Real>(a: &AnalyticMatPoly<T>, z: Complex<T>) -> Complex<T> {
    eval_analytic(a, z).determinant()
}

/// Winding number of `det A(e^{it})` over 8192 samples and `min |det A(z)|`
/// over radii `{0, .25, .5, .75, .95}` × 256 angles.
pub fn outerness_certificate<T: Real>(a: &AnalyticMatPoly<T>) -> Result<OuternessCertificate<T>> {
    let dets: Vec<Complex<T>> = (0..WINDING_SAMPLES)
        .map(|j| {
            det(
                a,
                cis(T::two_pi() * T::of(j as f64) / T::of(WINDING_SAMPLES as f64)),
            )
        })
        .collect();
    let mags: Vec<T> = dets.iter().map(|z| ComplexField::modulus(*z)).collect();
    let top = mags.iter().fold(T::zero(), |x, &y| x.max(y));
    let bmin = mags.iter().fold(T::infinity(), |x, &y| x.min(y));
    if !(bmin > T::tol(1e-12) * top.max(T::one())) {
        return Err(Error::IndeterminateCertificate {
            min_abs_det: bmin.as_f64(),
        });
    }
    let mut total = T::zero();
    for j in 0..WINDING_SAMPLES {
        let next = dets[(j + 1) % WINDING_SAMPLES];
        total += ComplexField::argument(next / dets[j]);
    }
    let winding = (total / T::two_pi()).round().as_f64() as i64;

    let mut min_abs_det = T::infinity();
    for &r in &RADII {
        let samples = if r == 0.0 { 1 } else { ANGLES };
        for j in 0..samples {
            let z = cis(T::two_pi() * T::of(j as f64) / T::of(ANGLES as f64)) * T::of(r);
            min_abs_det = min_abs_det.min(ComplexField::modulus(det(a, z)));
        }
    }
    Ok(OuternessCertificate {
        winding,
        min_abs_det,
        boundary_min_abs_det: bmin,
    })
}

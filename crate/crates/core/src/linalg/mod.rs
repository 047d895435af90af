//! Dense complex linear algebra and tensor-product bookkeeping.
//!
//! Composite indices are first-factor-major: for a bipartite operator on
//! `H_A ⊗ H_B` the row index of basis vector `|a⟩⊗|b⟩` is `a·dim_b + b`.
//! Wherever a routine conditions on a subsystem, the conditioning system is
//! the first factor.

mod io;
mod random;

pub use io::{matrix_from_json, matrix_to_json, MatrixFile};
pub use random::{
    channel_from_isometry, ginibre, haar_unitary, random_bipartite_density, random_channel,
    random_density, random_hermitian, random_pure_state, Seed,
};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense complex matrix, row/column indices as in `nalgebra`.
pub type CMat<T = f64> = DMatrix<Complex<T>>;
/// Dense complex column vector.
pub type CVec<T = f64> = DVector<Complex<T>>;

const EIGH_MAX_ITER: usize = 10_000;
/// Real scalar as a complex number.
#[inline]
pub fn c<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

pub(crate) fn check_finite<T: Real>(m: &CMat<T>) -> Result<()> {
    if m.iter()
        .all(|z| z.re.is_finite_val() && z.im.is_finite_val())
    {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// `‖m − m†‖_F`.
pub fn hermitian_residual<T: Real>(m: &CMat<T>) -> T {
    (m - m.adjoint()).norm()
}

/// Self-adjoint matrix, stored symmetrized.
#[derive(Debug, Clone, PartialEq)]
pub struct HermMat<T: Real = f64> {
    mat: CMat<T>,
}

impl<T: Real> HermMat<T> {
    /// Validates `‖m − m†‖_F ≤ 1e-10·max(1, ‖m‖_F)` and stores `(m + m†)/2`.
    pub fn new(mat: CMat<T>) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::Dimension(format!(
                "Hermitian matrix must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        check_finite(&mat)?;
        let residual = hermitian_residual(&mat);
        let scale = mat.norm().max(T::one());
        if residual > T::tol(1e-10) * scale {
            return Err(Error::NotHermitian {
                residual: residual.as_f64(),
            });
        }
        Ok(Self::symmetrized(mat))
    }

    /// Symmetrizes without validation.
    pub fn symmetrized(mat: CMat<T>) -> Self {
        let half = c(T::of(0.5));
        let sym = (&mat + mat.adjoint()) * half;
        Self { mat: sym }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: CMat::identity(dim, dim),
        }
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&x| c(x)));
        Self {
            mat: CMat::from_diagonal(&d),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn as_mat(&self) -> &CMat<T> {
        &self.mat
    }

    pub fn into_mat(self) -> CMat<T> {
        self.mat
    }

    pub fn trace(&self) -> T {
        self.mat.trace().re
    }

    pub fn scale(&self, factor: T) -> Self {
        Self {
            mat: &self.mat * c(factor),
        }
    }
}

/// Eigendecomposition of a Hermitian matrix with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct Eigh<T: Real = f64> {
    pub values: DVector<T>,
    pub vectors: CMat<T>,
}

impl<T: Real> Eigh<T> {
    /// `V diag(f(λ)) V†`.
    pub fn map(&self, f: impl Fn(T) -> T) -> CMat<T> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let fj = f(self.values[j]);
            for i in 0..n {
                scaled[(i, j)] *= fj;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    pub fn max_value(&self) -> T {
        self.values.iter().copied().fold(T::zero(), |a, b| a.max(b))
    }

    pub fn min_value(&self) -> T {
        self.values[0]
    }
}

/// Eigendecomposition of a Hermitian matrix; eigenvalues ascending, eigenvectors unitary.
pub fn eigh<T: Real>(h: &HermMat<T>) -> Result<Eigh<T>> {
    eigh_mat(h.as_mat())
}

pub(crate) fn eigh_mat<T: Real>(m: &CMat<T>) -> Result<Eigh<T>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Eigh {
            values: DVector::zeros(0),
            vectors: CMat::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::try_new(m.clone(), T::of(T::EPS), EIGH_MAX_ITER).ok_or(
        Error::NoConvergence {
            what: "Hermitian eigensolver",
            iterations: EIGH_MAX_ITER,
        },
    )?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("finite eigenvalues")
    });
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(Eigh { values, vectors })
}

/// Eigenvalues only (unsorted) of a Hermitian matrix.
pub fn eigvals_herm<T: Real>(m: &CMat<T>) -> DVector<T> {
    m.symmetric_eigenvalues()
}

/// Default eigenvalue floor for negative powers: `1e-12 · λ_max`.
pub fn default_floor<T: Real>(h: &HermMat<T>) -> Result<T> {
    let e = eigh(h)?;
    Ok(T::of(1e-12) * e.max_value())
}

fn check_psd<T: Real>(e: &Eigh<T>, scale: T) -> Result<()> {
    if e.values.len() > 0 && e.min_value() < -T::tol(1e-10) * scale.max(T::one()) {
        return Err(Error::NotPositive {
            min_eigenvalue: e.min_value().as_f64(),
        });
    }
    Ok(())
}

/// `V diag(max(λ, floor)^exponent) V†` for positive semidefinite `h`.
///
/// Negative eigenvalues within tolerance are clamped to zero; for negative
/// exponents they are further raised to `floor`.
pub fn herm_power<T: Real>(h: &HermMat<T>, exponent: T, floor: T) -> Result<HermMat<T>> {
    let e = eigh(h)?;
    check_psd(&e, e.max_value())?;
    if exponent < T::zero() && floor <= T::zero() && e.values.iter().any(|&l| l <= T::zero()) {
        return Err(Error::Singular);
    }
    let mapped = e.map(|l| {
        let l = l.max(T::zero());
        let l = if exponent < T::zero() {
            l.max(floor)
        } else {
            l
        };
        if l == T::zero() {
            if exponent == T::zero() {
                T::one()
            } else {
                T::zero()
            }
        } else {
            l.powf(exponent)
        }
    });
    Ok(HermMat::symmetrized(mapped))
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub fn herm_apply<T: Real>(h: &HermMat<T>, f: impl Fn(T) -> T) -> Result<HermMat<T>> {
    Ok(HermMat::symmetrized(eigh(h)?.map(f)))
}

/// Kronecker product `a ⊗ b` in the first-factor-major convention.
pub fn kron<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    a.kronecker(b)
}

/// Which tensor factor an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Factor {
    First,
    Second,
}

/// Operator on `H_A ⊗ H_B` with explicit factor dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteOp<T: Real = f64> {
    mat: CMat<T>,
    dim_a: usize,
    dim_b: usize,
}

impl<T: Real> BipartiteOp<T> {
    pub fn new(mat: CMat<T>, dim_a: usize, dim_b: usize) -> Result<Self> {
        let n = dim_a * dim_b;
        if dim_a == 0 || dim_b == 0 || mat.nrows() != n || mat.ncols() != n {
            return Err(Error::Dimension(format!(
                "{}x{} matrix cannot act on {}⊗{}",
                mat.nrows(),
                mat.ncols(),
                dim_a,
                dim_b
            )));
        }
        check_finite(&mat)?;
        Ok(Self { mat, dim_a, dim_b })
    }

    /// `a ⊗ b`.
    pub fn product(a: &CMat<T>, b: &CMat<T>) -> Result<Self> {
        if !a.is_square() || !b.is_square() {
            return Err(Error::Dimension("tensor factors must be square".into()));
        }
        Self::new(kron(a, b), a.nrows(), b.nrows())
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    pub fn as_mat(&self) -> &CMat<T> {
        &self.mat
    }

    pub fn into_mat(self) -> CMat<T> {
        self.mat
    }

    pub fn to_herm(&self) -> Result<HermMat<T>> {
        HermMat::new(self.mat.clone())
    }

    /// Reorders the factors: the result acts on `H_B ⊗ H_A`.
    pub fn swap(&self) -> Self {
        let mat = permute_subsystems(&self.mat, &[self.dim_a, self.dim_b], &[1, 0]);
        Self {
            mat,
            dim_a: self.dim_b,
            dim_b: self.dim_a,
        }
    }

    pub fn partial_trace(&self, over: Factor) -> CMat<T> {
        partial_trace_mat(&self.mat, self.dim_a, self.dim_b, over)
    }

    pub fn scale(&self, factor: T) -> Self {
        Self {
            mat: &self.mat * c(factor),
            dim_a: self.dim_a,
            dim_b: self.dim_b,
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.dims() != other.dims() {
            return Err(Error::Dimension(
                "bipartite operators with different factor dimensions".into(),
            ));
        }
        Ok(Self {
            mat: &self.mat - &other.mat,
            dim_a: self.dim_a,
            dim_b: self.dim_b,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dims() != other.dims() {
            return Err(Error::Dimension(
                "bipartite operators with different factor dimensions".into(),
            ));
        }
        Ok(Self {
            mat: &self.mat + &other.mat,
            dim_a: self.dim_a,
            dim_b: self.dim_b,
        })
    }

    /// `(u ⊗ v) m (u ⊗ v)†`.
    pub fn conjugate_local(&self, u: &CMat<T>, v: &CMat<T>) -> Result<Self> {
        if u.ncols() != self.dim_a || v.ncols() != self.dim_b {
            return Err(Error::Dimension(
                "local operators do not match factor dimensions".into(),
            ));
        }
        let k = kron(u, v);
        Self::new(&k * &self.mat * k.adjoint(), u.nrows(), v.nrows())
    }
}

/// Partial trace over one factor of an operator on `H_A ⊗ H_B`.
pub fn partial_trace<T: Real>(op: &BipartiteOp<T>, over: Factor) -> CMat<T> {
    op.partial_trace(over)
}

pub(crate) fn partial_trace_mat<T: Real>(
    m: &CMat<T>,
    da: usize,
    db: usize,
    over: Factor,
) -> CMat<T> {
    match over {
        Factor::Second => {
            let mut out = CMat::zeros(da, da);
            for i in 0..da {
                for j in 0..da {
                    let mut s = Complex::new(T::zero(), T::zero());
                    for b in 0..db {
                        s += m[(i * db + b, j * db + b)];
                    }
                    out[(i, j)] = s;
                }
            }
            out
        }
        Factor::First => {
            let mut out = CMat::zeros(db, db);
            for a in 0..da {
                out += m.view((a * db, a * db), (db, db));
            }
            out
        }
    }
}

/// Permutes the tensor factors of a square operator.
///
/// `dims` are the factor dimensions in current order; output factor `k` is
/// input factor `perm[k]`.
pub fn permute_subsystems<T: Real>(m: &CMat<T>, dims: &[usize], perm: &[usize]) -> CMat<T> {
    let n: usize = dims.iter().product();
    assert_eq!(m.nrows(), n);
    assert_eq!(perm.len(), dims.len());
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let map: Vec<usize> = (0..n)
        .map(|new_idx| {
            let mut digits = vec![0usize; dims.len()];
            let mut rem = new_idx;
            for k in (0..dims.len()).rev() {
                digits[k] = rem % new_dims[k];
                rem /= new_dims[k];
            }
            let mut old_digits = vec![0usize; dims.len()];
            for (k, &p) in perm.iter().enumerate() {
                old_digits[p] = digits[k];
            }
            old_digits
                .iter()
                .zip(dims)
                .fold(0, |acc, (&d, &dim)| acc * dim + d)
        })
        .collect();
    CMat::from_fn(n, n, |i, j| m[(map[i], map[j])])
}

/// Quantum state: positive semidefinite with unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real = f64> {
    herm: HermMat<T>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(mat: CMat<T>) -> Result<Self> {
        Self::from_herm(HermMat::new(mat)?)
    }

    pub fn from_herm(herm: HermMat<T>) -> Result<Self> {
        let tr = herm.trace();
        if (tr - T::one()).abs() > T::tol(1e-10) {
            return Err(Error::NotDensity(format!(
                "trace {} differs from 1",
                tr.as_f64()
            )));
        }
        let e = eigh(&herm)?;
        if e.values.len() > 0 && e.min_value() < -T::tol(1e-10) {
            return Err(Error::NotPositive {
                min_eigenvalue: e.min_value().as_f64(),
            });
        }
        Ok(Self { herm })
    }

    /// Normalizes a positive semidefinite matrix to unit trace.
    pub fn normalized(mat: CMat<T>) -> Result<Self> {
        let herm = HermMat::new(mat)?;
        let tr = herm.trace();
        if tr <= T::zero() {
            return Err(Error::NotDensity("non-positive trace".into()));
        }
        Self::from_herm(herm.scale(T::one() / tr))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            herm: HermMat::identity(dim).scale(T::one() / T::of(dim as f64)),
        }
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) vector.
    pub fn pure(psi: &CVec<T>) -> Result<Self> {
        let nrm = psi.norm();
        if nrm == T::zero() {
            return Err(Error::NotDensity("zero vector".into()));
        }
        let v = psi / c(nrm);
        Ok(Self {
            herm: HermMat::symmetrized(&v * v.adjoint()),
        })
    }

    pub fn dim(&self) -> usize {
        self.herm.dim()
    }

    pub fn herm(&self) -> &HermMat<T> {
        &self.herm
    }

    pub fn as_mat(&self) -> &CMat<T> {
        self.herm.as_mat()
    }

    pub fn purity(&self) -> T {
        (self.as_mat() * self.as_mat()).trace().re
    }

    pub fn bipartite(&self, dim_a: usize, dim_b: usize) -> Result<BipartiteOp<T>> {
        BipartiteOp::new(self.as_mat().clone(), dim_a, dim_b)
    }
}

/// Maximally entangled state `|Φ⟩ = d^{-1/2} Σ_i |i⟩|i⟩` on `d ⊗ d`.
pub fn maximally_entangled<T: Real>(d: usize) -> BipartiteOp<T> {
    let mut psi = CVec::zeros(d * d);
    let amp = c(T::one() / T::of(d as f64).sqrt());
    for i in 0..d {
        psi[i * d + i] = amp;
    }
    BipartiteOp::new(&psi * psi.adjoint(), d, d).expect("consistent dimensions")
}

/// Completely positive trace-preserving map in Kraus form.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel<T: Real = f64> {
    kraus: Vec<CMat<T>>,
}

impl<T: Real> Channel<T> {
    /// Validates `‖Σ K†K − I‖_F ≤ 1e-8`.
    pub fn new(kraus: Vec<CMat<T>>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| {
            Error::InvalidArgument("channel needs at least one Kraus operator".into())
        })?;
        let (dout, din) = first.shape();
        if kraus.iter().any(|k| k.shape() != (dout, din)) {
            return Err(Error::Dimension(
                "Kraus operators have different shapes".into(),
            ));
        }
        let ch = Self { kraus };
        let residual = ch.completeness_residual();
        if residual > T::tol(1e-8) {
            return Err(Error::InvalidArgument(format!(
                "Kraus operators not trace preserving (residual {:.3e})",
                residual.as_f64()
            )));
        }
        Ok(ch)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            kraus: vec![CMat::identity(dim, dim)],
        }
    }

    /// `ρ ↦ tr(ρ)·ω`.
    pub fn replacer(dim_in: usize, omega: &DensityMatrix<T>) -> Result<Self> {
        let e = eigh(omega.herm())?;
        let dout = omega.dim();
        let mut kraus = Vec::new();
        for (k, &lam) in e.values.iter().enumerate() {
            if lam <= T::zero() {
                continue;
            }
            let amp = c(lam.sqrt());
            for i in 0..dim_in {
                let mut op = CMat::zeros(dout, dim_in);
                for r in 0..dout {
                    op[(r, i)] = e.vectors[(r, k)] * amp;
                }
                kraus.push(op);
            }
        }
        Self::new(kraus)
    }

    pub fn kraus(&self) -> &[CMat<T>] {
        &self.kraus
    }

    pub fn dim_in(&self) -> usize {
        self.kraus[0].ncols()
    }

    pub fn dim_out(&self) -> usize {
        self.kraus[0].nrows()
    }

    pub fn completeness_residual(&self) -> T {
        let n = self.dim_in();
        let sum = self
            .kraus
            .iter()
            .fold(CMat::zeros(n, n), |acc, k| acc + k.adjoint() * k);
        (sum - CMat::identity(n, n)).norm()
    }

    pub fn apply(&self, rho: &CMat<T>) -> CMat<T> {
        let n = self.dim_out();
        self.kraus
            .iter()
            .fold(CMat::zeros(n, n), |acc, k| acc + k * rho * k.adjoint())
    }

    /// Applies the channel to one factor of a bipartite operator.
    pub fn apply_on(&self, op: &BipartiteOp<T>, on: Factor) -> Result<BipartiteOp<T>> {
        let (da, db) = op.dims();
        let (din, dout) = (self.dim_in(), self.dim_out());
        let (eye, new_a, new_b) = match on {
            Factor::First if da == din => (CMat::identity(db, db), dout, db),
            Factor::Second if db == din => (CMat::identity(da, da), da, dout),
            _ => {
                return Err(Error::Dimension(
                    "channel input does not match factor".into(),
                ))
            }
        };
        let n = new_a * new_b;
        let mut out = CMat::zeros(n, n);
        for k in &self.kraus {
            let big = match on {
                Factor::First => kron(k, &eye),
                Factor::Second => kron(&eye, k),
            };
            out += &big * op.as_mat() * big.adjoint();
        }
        BipartiteOp::new(out, new_a, new_b)
    }
}

/// `½‖ρ − σ‖₁`.
pub fn trace_distance<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<T> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Dimension(format!(
            "states of dimension {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let diff = rho.as_mat() - sigma.as_mat();
    let vals = eigvals_herm(&diff);
    Ok(vals.iter().fold(T::zero(), |acc, &l| acc + l.abs()) * T::of(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cm(rows: usize, cols: usize, data: &[(f64, f64)]) -> CMat {
        CMat::from_row_iterator(rows, cols, data.iter().map(|&(r, i)| Complex::new(r, i)))
    }

    #[test]
    fn eigh_identity_and_diagonal() {
        let e = eigh(&HermMat::<f64>::identity(3)).unwrap();
        assert_eq!(e.values.as_slice(), &[1.0, 1.0, 1.0]);

        let e = eigh(&HermMat::from_real_diagonal(&[2.0, -1.0])).unwrap();
        assert_abs_diff_eq!(e.values[0], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.values[1], 2.0, epsilon = 1e-15);
        // eigenvector of -1 is e_2 up to phase
        assert_abs_diff_eq!(e.vectors[(1, 0)].norm(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.vectors[(0, 1)].norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn eigh_reconstructs_random_hermitian() {
        for k in 0..200u64 {
            let dim = 1 + (k as usize % 16);
            let h = random_hermitian::<f64>(dim, Seed::new(k));
            let e = eigh(&h).unwrap();
            let recon = e.map(|l| l);
            let scale = h.as_mat().norm().max(1.0);
            assert!((h.as_mat() - recon).norm() <= 1e-9 * scale);
            let gram = e.vectors.adjoint() * &e.vectors;
            assert!((gram - CMat::identity(dim, dim)).norm() <= 1e-10);
            assert!(e.values.as_slice().windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn hermitian_validation() {
        let bad = cm(2, 2, &[(1.0, 0.0), (1.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
        assert!(matches!(HermMat::new(bad), Err(Error::NotHermitian { .. })));
        let rect = CMat::<f64>::zeros(2, 3);
        assert!(matches!(HermMat::new(rect), Err(Error::Dimension(_))));
    }

    #[test]
    fn herm_power_examples() {
        let id = HermMat::<f64>::identity(3);
        let p = herm_power(&id, 0.5, 0.0).unwrap();
        assert!((p.as_mat() - id.as_mat()).norm() < 1e-14);

        let d = HermMat::from_real_diagonal(&[4.0, 9.0]);
        let p = herm_power(&d, 0.5, 0.0).unwrap();
        assert!((p.as_mat() - HermMat::from_real_diagonal(&[2.0, 3.0]).as_mat()).norm() < 1e-13);

        let d = HermMat::from_real_diagonal(&[1.0, 0.0]);
        let p = herm_power(&d, -0.5, 1e-12).unwrap();
        // 1e-12^{-1/2} = 1e6
        assert_abs_diff_eq!(p.as_mat()[(0, 0)].re, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(p.as_mat()[(1, 1)].re, 1e6, epsilon = 1e-4);
        assert_eq!(herm_power(&d, -0.5, 0.0), Err(Error::Singular));
    }

    #[test]
    fn herm_power_rejects_negative_spectrum() {
        let d = HermMat::from_real_diagonal(&[1.0, -0.1]);
        assert!(matches!(
            herm_power(&d, 0.5, 0.0),
            Err(Error::NotPositive { .. })
        ));
    }

    #[test]
    fn herm_power_is_additive_in_exponent() {
        for k in 0..20 {
            let rho = random_density::<f64>(5, 5, Seed::new(100 + k)).unwrap();
            let a = herm_power(rho.herm(), 0.3, 0.0).unwrap();
            let b = herm_power(rho.herm(), -0.7, 1e-14).unwrap();
            let ab = herm_power(rho.herm(), -0.4, 1e-14).unwrap();
            let prod = a.as_mat() * b.as_mat();
            assert!((prod - ab.as_mat()).norm() <= 1e-9 * ab.as_mat().norm().max(1.0));
        }
    }

    fn naive_partial_trace(m: &CMat, da: usize, db: usize, over: Factor) -> CMat {
        match over {
            Factor::Second => CMat::from_fn(da, da, |i, j| {
                let mut s = Complex::new(0.0, 0.0);
                for b in 0..db {
                    s += m[(i * db + b, j * db + b)];
                }
                s
            }),
            Factor::First => CMat::from_fn(db, db, |i, j| {
                let mut s = Complex::new(0.0, 0.0);
                for a in 0..da {
                    s += m[(a * db + i, a * db + j)];
                }
                s
            }),
        }
    }

    #[test]
    fn partial_trace_examples() {
        let ra = random_density::<f64>(2, 2, Seed::new(1)).unwrap();
        let rb = random_density::<f64>(3, 3, Seed::new(2)).unwrap();
        let prod = BipartiteOp::product(ra.as_mat(), rb.as_mat()).unwrap();
        assert!((prod.partial_trace(Factor::Second) - ra.as_mat()).norm() < 1e-14);
        assert!((prod.partial_trace(Factor::First) - rb.as_mat()).norm() < 1e-14);

        let phi = maximally_entangled::<f64>(2);
        let half = CMat::identity(2, 2) * c(0.5);
        assert!((phi.partial_trace(Factor::Second) - &half).norm() < 1e-15);
        assert!((phi.partial_trace(Factor::First) - &half).norm() < 1e-15);

        let rho = random_density::<f64>(6, 6, Seed::new(3)).unwrap();
        let op = rho.bipartite(2, 3).unwrap();
        for over in [Factor::First, Factor::Second] {
            let got = op.partial_trace(over);
            let want = naive_partial_trace(op.as_mat(), 2, 3, over);
            assert!((got.clone() - want).iter().all(|z| z.norm() <= 1e-12));
            assert_abs_diff_eq!(got.trace().re, op.as_mat().trace().re, epsilon = 1e-12);
        }
    }

    #[test]
    fn kron_conventions() {
        let i2 = CMat::<f64>::identity(2, 2);
        assert_eq!(kron(&i2, &i2), CMat::identity(4, 4));
        let mut e11 = CMat::<f64>::zeros(2, 2);
        e11[(0, 0)] = c(1.0);
        let mut want = CMat::zeros(4, 4);
        want[(0, 0)] = c(1.0);
        assert_eq!(kron(&e11, &e11), want);

        let a = ginibre::<f64, _>(2, 2, &mut Seed::new(4).rng());
        let b = ginibre::<f64, _>(2, 2, &mut Seed::new(5).rng());
        let k = kron(&a, &b);
        for i in 0..2 {
            for j in 0..2 {
                for p in 0..2 {
                    for q in 0..2 {
                        let z = a[(i, j)] * b[(p, q)];
                        assert!((k[(i * 2 + p, j * 2 + q)] - z).norm() <= 1e-14);
                    }
                }
            }
        }
        let cc = ginibre::<f64, _>(2, 2, &mut Seed::new(6).rng());
        let d = ginibre::<f64, _>(2, 2, &mut Seed::new(7).rng());
        let lhs = kron(&a, &b) * kron(&cc, &d);
        let rhs = kron(&(&a * &cc), &(&b * &d));
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn swap_and_permutation() {
        let ra = random_density::<f64>(2, 2, Seed::new(8)).unwrap();
        let rb = random_density::<f64>(3, 3, Seed::new(9)).unwrap();
        let ab = BipartiteOp::product(ra.as_mat(), rb.as_mat()).unwrap();
        let ba = BipartiteOp::product(rb.as_mat(), ra.as_mat()).unwrap();
        assert!((ab.swap().as_mat() - ba.as_mat()).norm() < 1e-14);
        assert_eq!(ab.swap().dims(), (3, 2));
        assert!((ab.swap().swap().as_mat() - ab.as_mat()).norm() < 1e-15);

        let rc = random_density::<f64>(2, 2, Seed::new(10)).unwrap();
        let abc = kron(&kron(ra.as_mat(), rb.as_mat()), rc.as_mat());
        let cab = kron(&kron(rc.as_mat(), ra.as_mat()), rb.as_mat());
        let p = permute_subsystems(&abc, &[2, 3, 2], &[2, 0, 1]);
        assert!((p - cab).norm() < 1e-14);
    }

    #[test]
    fn trace_distance_examples() {
        let rho = random_density::<f64>(3, 3, Seed::new(11)).unwrap();
        assert_abs_diff_eq!(trace_distance(&rho, &rho).unwrap(), 0.0, epsilon = 1e-15);

        let a =
            DensityMatrix::<f64>::new(HermMat::from_real_diagonal(&[1.0, 0.0]).into_mat()).unwrap();
        let b =
            DensityMatrix::<f64>::new(HermMat::from_real_diagonal(&[0.0, 1.0]).into_mat()).unwrap();
        assert_abs_diff_eq!(trace_distance(&a, &b).unwrap(), 1.0, epsilon = 1e-15);

        let p =
            DensityMatrix::<f64>::new(HermMat::from_real_diagonal(&[0.7, 0.3]).into_mat()).unwrap();
        let q = DensityMatrix::<f64>::maximally_mixed(2);
        assert_abs_diff_eq!(trace_distance(&p, &q).unwrap(), 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(trace_distance(&q, &p).unwrap(), 0.2, epsilon = 1e-15);

        let r = DensityMatrix::<f64>::maximally_mixed(3);
        assert!(matches!(trace_distance(&p, &r), Err(Error::Dimension(_))));
    }

    #[test]
    fn channel_on_factor() {
        let ch = random_channel::<f64>(2, 3, 2, Seed::new(12)).unwrap();
        let rho = random_density::<f64>(4, 4, Seed::new(13))
            .unwrap()
            .bipartite(2, 2)
            .unwrap();
        let out = ch.apply_on(&rho, Factor::First).unwrap();
        assert_eq!(out.dims(), (3, 2));
        assert_abs_diff_eq!(out.as_mat().trace().re, 1.0, epsilon = 1e-12);
        // the untouched marginal is unchanged
        let m = out.partial_trace(Factor::First);
        assert!((m - rho.partial_trace(Factor::First)).norm() < 1e-12);
        assert!(ch
            .apply_on(
                &rho.swap()
                    .conjugate_local(&CMat::identity(2, 2), &CMat::identity(2, 2))
                    .unwrap(),
                Factor::Second
            )
            .is_ok());
    }

    #[test]
    fn density_validation() {
        assert!(
            DensityMatrix::<f64>::new(HermMat::from_real_diagonal(&[0.5, 0.6]).into_mat()).is_err()
        );
        assert!(matches!(
            DensityMatrix::<f64>::new(HermMat::from_real_diagonal(&[1.2, -0.2]).into_mat()),
            Err(Error::NotPositive { .. })
        ));
    }

    #[test]
    fn f32_eigh() {
        let h = HermMat::<f32>::from_real_diagonal(&[3.0, 1.0, 2.0]);
        let e = eigh(&h).unwrap();
        assert_eq!(e.values.as_slice(), &[1.0f32, 2.0, 3.0]);
    }
}

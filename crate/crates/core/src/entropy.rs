//! Sandwiched Rényi divergences, conditional Rényi entropies and related
//! quantities. Logarithms are natural throughout.

use std::fmt;

use nalgebra::DVector;
use num_complex::Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{
    c, eigh_mat, BipartiteOp, CMat, CVec, Channel, DensityMatrix, Factor, HermMat, Seed,
};
use crate::optim;
use crate::scalar::Real;
use crate::schatten::{parse_order, schatten_norm_herm, SchattenOrder};
use crate::vvnorm::{norm_1alpha_result, pq_norm_hermitian_upper, BoundKind, PQQuery, PQResult};

/// Rényi order `α ∈ [1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenyiOrder<T: Real = f64> {
    alpha: T,
}

impl<T: Real> RenyiOrder<T> {
    pub fn new(alpha: T) -> Result<Self> {
        if !(alpha >= T::one()) {
            return Err(Error::InvalidOrder(alpha.as_f64()));
        }
        Ok(Self { alpha })
    }

    pub fn one() -> Self {
        Self { alpha: T::one() }
    }

    pub fn infinity() -> Self {
        Self {
            alpha: T::infinity(),
        }
    }

    pub fn alpha(self) -> T {
        self.alpha
    }

    pub fn is_one(self) -> bool {
        self.alpha == T::one()
    }

    pub fn is_infinite(self) -> bool {
        !self.alpha.is_finite_val()
    }

    /// `α' = α/(α−1)`: `∞` at `α = 1` and `1` at `α = ∞`.
    pub fn conjugate(self) -> T {
        if self.is_one() {
            T::infinity()
        } else if self.is_infinite() {
            T::one()
        } else {
            self.alpha / (self.alpha - T::one())
        }
    }

    pub fn schatten(self) -> SchattenOrder<T> {
        if self.is_infinite() {
            SchattenOrder::Infinity
        } else {
            SchattenOrder::Finite(self.alpha)
        }
    }
}

impl<T: Real> fmt::Display for RenyiOrder<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.schatten().fmt(f)
    }
}

impl<T: Real> Serialize for RenyiOrder<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.schatten().serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for RenyiOrder<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let p = SchattenOrder::<T>::deserialize(d)?;
        Self::new(p.value()).map_err(serde::de::Error::custom)
    }
}

impl<T: Real> std::str::FromStr for RenyiOrder<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let a = parse_order(s).map_err(Error::Parse)?;
        Self::new(T::of(a))
    }
}

/// `−Σ λ log λ` with `0 log 0 = 0`.
pub fn von_neumann_entropy<T: Real>(m: &CMat<T>) -> Result<T> {
    let e = eigh_mat(m)?;
    Ok(e.values.iter().fold(T::zero(), |acc, &l| {
        if l > T::zero() {
            acc - l * l.ln()
        } else {
            acc
        }
    }))
}

fn check_density_op<T: Real>(rho: &BipartiteOp<T>) -> Result<()> {
    DensityMatrix::new(rho.as_mat().clone()).map(|_| ())
}

/// `D_α(ρ‖σ)`; `+∞` when the support of ρ is not contained in that of σ.
pub fn sandwiched_divergence<T: Real>(
    rho: &DensityMatrix<T>,
    sigma: &HermMat<T>,
    alpha: RenyiOrder<T>,
) -> Result<T> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Dimension(format!(
            "ρ is {}-dimensional, σ is {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let es = eigh_mat(sigma.as_mat())?;
    let top = es.values.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
    if es.min_value() < -T::tol(1e-10) * top.max(T::one()) {
        return Err(Error::NotPositive {
            min_eigenvalue: es.min_value().as_f64(),
        });
    }
    let cut = T::tol(1e-12) * top;
    let kernel = es.map(|l| if l > cut { T::zero() } else { T::one() });
    let leak = (&kernel * rho.as_mat()).trace().re;
    if leak > T::tol(1e-10) {
        return Ok(T::infinity());
    }

    if alpha.is_one() {
        let log_sigma = es.map(|l| if l > cut { l.ln() } else { T::zero() });
        let er = eigh_mat(rho.as_mat())?;
        let neg_h =
            er.values.iter().fold(
                T::zero(),
                |a, &l| if l > T::zero() { a + l * l.ln() } else { a },
            );
        let cross = (rho.as_mat() * log_sigma).trace().re;
        return Ok(neg_h - cross);
    }
    // σ^{(1−α)/2α} on the support; the exponent is −1/2 at α = ∞
    let e = if alpha.is_infinite() {
        -T::of(0.5)
    } else {
        (T::one() - alpha.alpha()) / (T::of(2.0) * alpha.alpha())
    };
    let s = es.map(|l| if l > cut { l.powf(e) } else { T::zero() });
    let z = &s * rho.as_mat() * &s;
    let z = (&z + z.adjoint()) * c(T::of(0.5));
    let norm = schatten_norm_herm(&z, alpha.schatten());
    Ok(alpha.conjugate() * norm.ln())
}

/// `H(X|Y) = H(YX) − H(Y)` for ρ on `H_Y ⊗ H_X`.
pub fn cond_vn_entropy<T: Real>(rho: &BipartiteOp<T>) -> Result<T> {
    let rho_y = rho.partial_trace(Factor::Second);
    Ok(von_neumann_entropy(rho.as_mat())? - von_neumann_entropy(&rho_y)?)
}

/// `H_α(X|Y) = −α' log ‖ρ_{YX}‖_{(1,α)}`, von Neumann at `α = 1`.
pub fn cond_renyi_entropy<T: Real>(rho: &BipartiteOp<T>, alpha: RenyiOrder<T>) -> Result<T> {
    cond_renyi_entropy_with(
        rho,
        alpha,
        &PQQuery::new(SchattenOrder::one(), SchattenOrder::one()),
    )
}

/// As [`cond_renyi_entropy`] with the optimizer settings of `base`.
pub fn cond_renyi_entropy_with<T: Real>(
    rho: &BipartiteOp<T>,
    alpha: RenyiOrder<T>,
    base: &PQQuery<T>,
) -> Result<T> {
    check_density_op(rho)?;
    if alpha.is_one() {
        return cond_vn_entropy(rho);
    }
    let norm = norm_1alpha_result(rho, alpha.schatten(), base)?;
    Ok(-alpha.conjugate() * norm.value.ln())
}

/// `W_α(X|Y) = ‖ρ_{YX} − ρ_Y ⊗ I/d_X‖_{(1,α)}`.
///
/// Exact at `α = 1` (trace norm) and when the difference is zero or
/// semidefinite; otherwise an upper bound from the Jordan decomposition.
pub fn w_alpha<T: Real>(rho: &BipartiteOp<T>, alpha: RenyiOrder<T>) -> Result<PQResult<T>> {
    w_alpha_with(
        rho,
        alpha,
        &PQQuery::new(SchattenOrder::one(), SchattenOrder::one()),
    )
}

pub fn w_alpha_with<T: Real>(
    rho: &BipartiteOp<T>,
    alpha: RenyiOrder<T>,
    base: &PQQuery<T>,
) -> Result<PQResult<T>> {
    check_density_op(rho)?;
    let (dy, dx) = rho.dims();
    let rho_y = rho.partial_trace(Factor::Second);
    let prod = BipartiteOp::product(
        &rho_y,
        &(CMat::identity(dx, dx) * c(T::one() / T::of(dx as f64))),
    )?;
    let diff = rho.sub(&prod)?;
    let query = PQQuery {
        p: SchattenOrder::one(),
        q: alpha.schatten(),
        ..*base
    };
    let mut res = pq_norm_hermitian_upper(&diff, &query)?;
    if alpha.is_one() {
        res.value = schatten_norm_herm(diff.as_mat(), SchattenOrder::one());
        res.bound_kind = BoundKind::Exact;
        res.optimizer =
            HermMat::symmetrized(CMat::identity(dy, dy) * c(T::one() / T::of(dy as f64)));
    }
    Ok(res)
}

/// `α' log(1 + 2ε d_X^{2/α'})`.
pub fn continuity_bound<T: Real>(eps: T, d_x: usize, alpha: RenyiOrder<T>) -> Result<T> {
    if !(eps >= T::zero()) || d_x == 0 {
        return Err(Error::InvalidArgument(format!(
            "need ε ≥ 0 and d_X ≥ 1, got ε={} d_X={d_x}",
            eps.as_f64()
        )));
    }
    if eps == T::zero() {
        return Ok(T::zero());
    }
    let ap = alpha.conjugate();
    if !ap.is_finite_val() {
        return Ok(T::infinity());
    }
    let d = T::of(d_x as f64);
    Ok(ap * (T::one() + T::of(2.0) * eps * d.powf(T::of(2.0) / ap)).ln())
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CoherentOptions<T: Real = f64> {
    /// Outer restarts over input states.
    pub restarts: usize,
    /// Objective evaluations per outer restart.
    pub max_evals: usize,
    pub seed: Seed,
    /// Settings of the inner norm evaluation.
    pub inner: PQQuery<T>,
    pub tol: T,
}

impl<T: Real> Default for CoherentOptions<T> {
    fn default() -> Self {
        Self {
            restarts: 4,
            max_evals: 1500,
            seed: Seed::new(0),
            inner: PQQuery::new(SchattenOrder::one(), SchattenOrder::one()).with_restarts(2),
            tol: T::tol(1e-6),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoherentResult<T: Real = f64> {
    pub value: T,
    pub bound_kind: BoundKind,
    pub spread: T,
    pub evaluations: usize,
}

fn pure_from_params<T: Real>(x: &DVector<T>) -> CVec<T> {
    let n = x.len() / 2;
    let v = CVec::from_iterator(n, (0..n).map(|i| Complex::new(x[2 * i], x[2 * i + 1])));
    let norm = v.norm();
    if norm > T::zero() {
        v / c(norm)
    } else {
        let mut e = CVec::zeros(n);
        e[0] = c(T::one());
        e
    }
}

/// `(Φ ⊗ id_R)(ψψ†)` reordered as an operator on `H_Y ⊗ H_R`.
fn channel_output<T: Real>(channel: &Channel<T>, psi: &CVec<T>) -> Result<BipartiteOp<T>> {
    let d = channel.dim_in();
    let rho = BipartiteOp::new(psi * psi.adjoint(), d, d)?;
    channel.apply_on(&rho, Factor::First)
}

/// `I^coh_α(Φ) = max_ψ −H_α(R|Y)` over pure inputs `ψ_{XR}` with `d_R = d_X`.
///
/// Each outer restart is a Nelder–Mead search over the input vector; the
/// result is a lower bound unless all restarts agree to `tol`.
pub fn coherent_info_alpha<T: Real>(
    channel: &Channel<T>,
    alpha: RenyiOrder<T>,
    opts: &CoherentOptions<T>,
) -> Result<CoherentResult<T>> {
    let d = channel.dim_in();
    let objective = |psi: &CVec<T>, query: &PQQuery<T>| -> Result<T> {
        let out = channel_output(channel, psi)?;
        if alpha.is_one() {
            Ok(-cond_vn_entropy(&out)?)
        } else {
            let norm = norm_1alpha_result(&out, alpha.schatten(), query)?;
            Ok(alpha.conjugate() * norm.value.ln())
        }
    };

    let mut starts = Vec::with_capacity(opts.restarts.max(1));
    let mut me = DVector::zeros(2 * d * d);
    for i in 0..d {
        me[2 * (i * d + i)] = T::one();
    }
    starts.push(me);
    for k in 1..opts.restarts.max(1) {
        let v = crate::linalg::random_pure_state::<T>(d * d, opts.seed.derive(k as u64));
        starts.push(DVector::from_iterator(
            2 * d * d,
            v.iter().flat_map(|z| [z.re, z.im]),
        ));
    }

    let mut values = Vec::with_capacity(starts.len());
    let mut evaluations = 0;
    for x0 in starts {
        let mut failure = None;
        let out = optim::nelder_mead(
            |x: &DVector<T>| match objective(&pure_from_params(x), &opts.inner) {
                Ok(v) => -v,
                Err(e) => {
                    failure.get_or_insert(e);
                    T::infinity()
                }
            },
            x0,
            T::of(0.25),
            opts.max_evals,
            T::tol(1e-12),
        );
        if let Some(e) = failure {
            return Err(e);
        }
        evaluations += out.iterations;
        let refined = objective(&pure_from_params(&out.x), &opts.inner.with_restarts(8))?;
        values.push(refined);
    }
    let best = values.iter().fold(-T::infinity(), |a, &b| a.max(b));
    let worst = values.iter().fold(T::infinity(), |a, &b| a.min(b));
    let spread = best - worst;
    let bound_kind = if values.len() > 1 && spread <= opts.tol * best.abs().max(T::one()) {
        BoundKind::Exact
    } else {
        BoundKind::Lower
    };
    Ok(CoherentResult {
        value: best,
        bound_kind,
        spread,
        evaluations,
    })
}

//! Operator-valued Schatten norms `‖·‖_{(p,q)}` of bipartite operators.
//!
//! For positive `m` on `H_Y ⊗ H_X` and `1/p = 1/q + 1/r`:
//!
//! * inf-form: `‖m‖_{(p,q)} = inf_σ ‖(σ^{-1/2r} ⊗ I) m (σ^{-1/2r} ⊗ I)‖_q`
//! * sup-form: `‖m‖_{(q,p)} = sup_σ ‖(σ^{1/2r} ⊗ I) m (σ^{1/2r} ⊗ I)‖_p`
//!
//! with σ ranging over density matrices on the first factor. Both are
//! evaluated by quasi-Newton descent over `σ = e^H / tr e^H` with exact
//! gradients, restarted from several initial points.

use nalgebra::DVector;
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    c, eigh_mat, kron, partial_trace_mat, random_density, BipartiteOp, CMat, Factor, HermMat, Seed,
};
use crate::optim::{self, Options};
use crate::scalar::Real;
use crate::schatten::{schatten_norm_herm, SchattenOrder};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PQQuery<T: Real = f64> {
    pub p: SchattenOrder<T>,
    pub q: SchattenOrder<T>,
    pub tol: T,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: Seed,
}

impl<T: Real> PQQuery<T> {
    pub fn new(p: SchattenOrder<T>, q: SchattenOrder<T>) -> Self {
        Self {
            p,
            q,
            tol: T::tol(1e-7),
            max_iter: 2000,
            restarts: 8,
            seed: Seed::new(0),
        }
    }

    pub fn with_seed(mut self, seed: Seed) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_tol(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }

    /// `1/r = 1/p − 1/q`.
    pub fn r_inv(&self) -> Result<T> {
        let r_inv = self.p.inv() - self.q.inv();
        if r_inv < -T::of(T::EPS) {
            return Err(Error::InvalidArgument(format!(
                "need p ≤ q, got p={} q={}",
                self.p, self.q
            )));
        }
        Ok(r_inv.max(T::zero()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Exact,
    Upper,
    Lower,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PQResult<T: Real = f64> {
    pub value: T,
    /// Density matrix σ at which `value` was evaluated (`A = σ^{1/2r}`).
    pub optimizer: HermMat<T>,
    pub iterations: usize,
    pub converged: bool,
    pub bound_kind: BoundKind,
    /// Largest minus smallest value over restarts.
    pub spread: T,
    /// Objective value after each iteration of the winning restart.
    pub history: Vec<T>,
}

#[derive(Clone, Copy, PartialEq)]
enum Form {
    Inf,
    Sup,
}

impl Form {
    /// Sign of the exponent in `G = exp(±H/2r)`.
    fn sign<T: Real>(self) -> T {
        match self {
            Form::Inf => -T::one(),
            Form::Sup => T::one(),
        }
    }
}

/// Smallest eigenvalue of `m` relative to its largest; errors when `m` is not PSD.
fn check_psd<T: Real>(m: &CMat<T>) -> Result<T> {
    let e = eigh_mat(m)?;
    let top = e.values.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
    if e.values.len() > 0 && e.min_value() < -T::tol(1e-9) * top.max(T::of(1e-300)) {
        return Err(Error::NotPositive {
            min_eigenvalue: e.min_value().as_f64(),
        });
    }
    Ok(top)
}

fn hermitian_from_params<T: Real>(x: &DVector<T>, n: usize) -> CMat<T> {
    let mut h = CMat::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = c(x[i]);
    }
    let mut k = n;
    for i in 0..n {
        for j in i + 1..n {
            let z = Complex::new(x[k], x[k + 1]);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            k += 2;
        }
    }
    h
}

fn params_from_gradient<T: Real>(g: &CMat<T>) -> DVector<T> {
    let n = g.nrows();
    let mut x = DVector::zeros(n * n);
    for i in 0..n {
        x[i] = g[(i, i)].re;
    }
    let two = T::of(2.0);
    let mut k = n;
    for i in 0..n {
        for j in i + 1..n {
            x[k] = two * g[(i, j)].re;
            x[k + 1] = two * g[(i, j)].im;
            k += 2;
        }
    }
    x
}

/// `log` of a full-rank density matrix as parameters.
fn params_from_density<T: Real>(sigma: &CMat<T>) -> Result<DVector<T>> {
    let e = eigh_mat(sigma)?;
    let floor = T::of(1e-8) * e.max_value();
    let h = e.map(|l| l.max(floor).ln());
    let n = h.nrows();
    let mut x = DVector::zeros(n * n);
    for i in 0..n {
        x[i] = h[(i, i)].re;
    }
    let mut k = n;
    for i in 0..n {
        for j in i + 1..n {
            x[k] = h[(i, j)].re;
            x[k + 1] = h[(i, j)].im;
            k += 2;
        }
    }
    Ok(x)
}

/// Objective `φ(H) = log ‖(G⊗I) m (G⊗I)‖_s ∓ (1/r) log tr e^H` with
/// `G = exp(±H/2r)`, and its gradient in the Hermitian parameters.
///
/// For the inf-form `φ` is `log` of the sandwiched norm at `σ ∝ e^H`; the
/// sup-form returns `−φ` so that both are minimized.
struct Objective<'a, T: Real> {
    m: &'a CMat<T>,
    da: usize,
    db: usize,
    r_inv: T,
    s: SchattenOrder<T>,
    form: Form,
}

impl<T: Real> Objective<'_, T> {
    fn eval(&self, x: &DVector<T>) -> (T, DVector<T>) {
        let h = hermitian_from_params(x, self.da);
        let Ok(eh) = eigh_mat(&h) else {
            return (T::infinity(), DVector::zeros(x.len()));
        };
        // shift by λ_max: φ is invariant under H → H + tI
        let lmax = eh.values[self.da - 1];
        let lam: Vec<T> = eh.values.iter().map(|&l| l - lmax).collect();
        let z_sum = lam.iter().fold(T::zero(), |a, &l| a + l.exp());
        // log tr e^{H − λ_max}; the shift cancels against the one in G
        let log_tr = z_sum.ln();
        let sigma_vals: Vec<T> = lam.iter().map(|&l| l.exp() / z_sum).collect();

        let sign: T = self.form.sign();
        let cexp = sign * self.r_inv / T::of(2.0);
        // exponent measured from λ_max keeps G bounded on the sup side
        let gv: Vec<T> = lam.iter().map(|&l| (cexp * l).exp()).collect();
        let v = &eh.vectors;
        let mut vg = v.clone();
        for j in 0..self.da {
            for i in 0..self.da {
                vg[(i, j)] *= c(gv[j]);
            }
        }
        let g = &vg * v.adjoint();
        let gi = kron(&g, &CMat::identity(self.db, self.db));
        let mg = self.m * &gi;
        let zmat = &gi * &mg;
        let zh = (&zmat + zmat.adjoint()) * c(T::of(0.5));
        let Ok(ez) = eigh_mat(&zh) else {
            return (T::infinity(), DVector::zeros(x.len()));
        };
        let zmax = ez.max_value();
        if !(zmax > T::zero()) || !zmax.is_finite_val() {
            return (T::infinity(), DVector::zeros(x.len()));
        }

        // log ‖Z‖_s and K = ∂ log‖Z‖_s / ∂Z
        let (log_norm, k) = match self.s {
            SchattenOrder::Infinity => {
                let top = ez.vectors.column(ez.values.len() - 1).into_owned();
                (zmax.ln(), &top * top.adjoint() * c(T::one() / zmax))
            }
            SchattenOrder::Finite(s) => {
                let rel: Vec<T> = ez
                    .values
                    .iter()
                    .map(|&l| (l / zmax).max(T::zero()))
                    .collect();
                let sum = rel.iter().fold(T::zero(), |a, &l| a + l.powf(s));
                let kmat = ez.map(|l| {
                    let t = (l / zmax).max(T::zero());
                    if t == T::zero() {
                        T::zero()
                    } else {
                        t.powf(s - T::one())
                    }
                }) * c(T::one() / (zmax * sum));
                (zmax.ln() + sum.ln() / s, kmat)
            }
        };
        // the log tr e^H term enters with coefficient −sign/r
        let phi = log_norm - sign * self.r_inv * log_tr;

        // dφ/dG = W + W†, W = tr_X[m (G⊗I) K]
        let w = partial_trace_mat(&(&mg * &k), self.da, self.db, Factor::Second);
        let wh = &w + w.adjoint();
        let mut inner = v.adjoint() * wh * v;
        for i in 0..self.da {
            for j in 0..self.da {
                let d = lam[i] - lam[j];
                let gamma = if d.abs() * cexp.abs() < T::of(1e-10) {
                    cexp * (cexp * (lam[i] + lam[j]) / T::of(2.0)).exp()
                } else {
                    gv[j] * (cexp * d).exp_m1() / d
                };
                inner[(i, j)] *= c(gamma);
            }
        }
        let mut grad = v * inner * v.adjoint();
        let coef = -sign * self.r_inv;
        for j in 0..self.da {
            let col = v.column(j) * c(coef * sigma_vals[j]);
            grad += &col * v.column(j).adjoint();
        }
        let grad = (&grad + grad.adjoint()) * c(T::of(0.5));
        let gp = params_from_gradient(&grad);
        match self.form {
            Form::Inf => (phi, gp),
            Form::Sup => (-phi, -gp),
        }
    }
}

fn density_from_params<T: Real>(x: &DVector<T>, n: usize) -> Result<CMat<T>> {
    let e = eigh_mat(&hermitian_from_params(x, n))?;
    let lmax = e.values[n - 1];
    let w: Vec<T> = e.values.iter().map(|&l| (l - lmax).exp()).collect();
    let z = w.iter().fold(T::zero(), |a, &b| a + b);
    let mut vs = e.vectors.clone();
    for j in 0..n {
        for i in 0..n {
            vs[(i, j)] *= c(w[j] / z);
        }
    }
    let s = &vs * e.vectors.adjoint();
    Ok((&s + s.adjoint()) * c(T::of(0.5)))
}

/// `‖(σ^{e}⊗I) m (σ^{e}⊗I)‖_s` evaluated directly, with σ floored at
/// `1e-12·σ_max` and renormalized when `e < 0`.
fn sandwich_value<T: Real>(
    m: &CMat<T>,
    da: usize,
    db: usize,
    sigma: &CMat<T>,
    e: T,
    s: SchattenOrder<T>,
) -> Result<(T, CMat<T>)> {
    let es = eigh_mat(sigma)?;
    let top = es.max_value();
    let floor = if e < T::zero() {
        T::of(1e-12) * top
    } else {
        T::zero()
    };
    let clamped: Vec<T> = es.values.iter().map(|&l| l.max(floor)).collect();
    let tr = clamped.iter().fold(T::zero(), |a, &b| a + b);
    let mut vs = es.vectors.clone();
    let mut vp = es.vectors.clone();
    for j in 0..da {
        let l = clamped[j] / tr;
        let pw = if l == T::zero() { T::zero() } else { l.powf(e) };
        for i in 0..da {
            vs[(i, j)] *= c(l);
            vp[(i, j)] *= c(pw);
        }
    }
    let sig = &vs * es.vectors.adjoint();
    let a = &vp * es.vectors.adjoint();
    let ai = kron(&a, &CMat::identity(db, db));
    let z = &ai * m * &ai;
    let value = schatten_norm_herm(&((&z + z.adjoint()) * c(T::of(0.5))), s);
    Ok((value, (&sig + sig.adjoint()) * c(T::of(0.5))))
}

struct Run<T: Real> {
    value: T,
    sigma: CMat<T>,
    iterations: usize,
    converged: bool,
    history: Vec<T>,
}

fn starting_points<T: Real>(
    m: &CMat<T>,
    da: usize,
    db: usize,
    restarts: usize,
    seed: Seed,
) -> Result<Vec<DVector<T>>> {
    let mut starts = Vec::with_capacity(restarts);
    for k in 0..restarts.max(1) {
        let x = match k {
            0 => DVector::zeros(da * da),
            1 => {
                let marginal = partial_trace_mat(m, da, db, Factor::Second);
                params_from_density(&((&marginal + marginal.adjoint()) * c(T::of(0.5))))?
            }
            _ => params_from_density(random_density::<T>(da, da, seed.derive(k as u64))?.as_mat())?,
        };
        starts.push(x);
    }
    Ok(starts)
}

fn optimize<T: Real>(m: &BipartiteOp<T>, query: &PQQuery<T>, form: Form) -> Result<PQResult<T>> {
    let (da, db) = m.dims();
    let top = check_psd(m.as_mat())?;
    let r_inv = query.r_inv()?;
    let s = match form {
        Form::Inf => query.q,
        Form::Sup => query.p,
    };
    if r_inv == T::zero() || top == T::zero() || da == 1 {
        // no freedom: σ = I/d_a, A = I up to the normalization
        let sigma = CMat::identity(da, da) * c(T::one() / T::of(da as f64));
        let value = if r_inv == T::zero() {
            schatten_norm_herm(m.as_mat(), s)
        } else {
            let e = form.sign::<T>() * r_inv / T::of(2.0);
            sandwich_value(m.as_mat(), da, db, &sigma, e, s)?.0
        };
        return Ok(PQResult {
            value,
            optimizer: HermMat::symmetrized(sigma),
            iterations: 0,
            converged: true,
            bound_kind: BoundKind::Exact,
            spread: T::zero(),
            history: vec![value],
        });
    }

    // normalize so that the optimizer works on O(1) numbers
    let scale = top;
    let mn = m.as_mat() * c(T::one() / scale);
    let obj = Objective {
        m: &mn,
        da,
        db,
        r_inv,
        s,
        form,
    };
    let opts = Options {
        max_iter: query.max_iter,
        gtol: (query.tol * T::of(1e-3)).max(T::tol(1e-12)),
        ftol: T::tol(1e-15),
    };
    let e = form.sign::<T>() * r_inv / T::of(2.0);
    let starts = starting_points(&mn, da, db, query.restarts, query.seed)?;

    let runs: Vec<Result<Run<T>>> = starts
        .into_par_iter()
        .map(|x0| {
            let out = optim::bfgs(|x| obj.eval(x), x0, &opts);
            let sigma = density_from_params(&out.x, da)?;
            let (v, sigma) = sandwich_value(&mn, da, db, &sigma, e, s)?;
            let history = out
                .history
                .iter()
                .map(|&f| match form {
                    Form::Inf => f.exp() * scale,
                    Form::Sup => (-f).exp() * scale,
                })
                .collect();
            Ok(Run {
                value: v * scale,
                sigma,
                iterations: out.iterations,
                converged: out.converged,
                history,
            })
        })
        .collect();
    let runs: Vec<Run<T>> = runs.into_iter().collect::<Result<_>>()?;

    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        let better = match form {
            Form::Inf => r.value < runs[best].value,
            Form::Sup => r.value > runs[best].value,
        };
        if better {
            best = i;
        }
    }
    let lo = runs.iter().fold(T::infinity(), |a, r| a.min(r.value));
    let hi = runs.iter().fold(-T::infinity(), |a, r| a.max(r.value));
    let spread = hi - lo;
    let several = runs.len() > 1;
    let b = runs.into_iter().nth(best).expect("at least one restart");
    let exact = several && spread <= query.tol * b.value;
    let bound_kind = match (exact, form) {
        (true, _) => BoundKind::Exact,
        (false, Form::Inf) => BoundKind::Upper,
        (false, Form::Sup) => BoundKind::Lower,
    };
    Ok(PQResult {
        value: b.value,
        optimizer: HermMat::symmetrized(b.sigma),
        iterations: b.iterations,
        converged: b.converged,
        bound_kind,
        spread,
        history: b.history,
    })
}

/// `‖m‖_{(p,q)}` for positive `m`, `p ≤ q`, as an infimum over the first factor.
///
/// The returned value is always attained at the returned σ, hence an upper
/// bound; it is marked exact when all restarts agree to `tol`.
pub fn pq_norm_inf_positive<T: Real>(
    m: &BipartiteOp<T>,
    query: &PQQuery<T>,
) -> Result<PQResult<T>> {
    optimize(m, query, Form::Inf)
}

/// `‖m‖_{(q,p)}` for positive `m`, `p ≤ q`, as a supremum over the first factor.
pub fn pq_norm_sup_positive<T: Real>(
    m: &BipartiteOp<T>,
    query: &PQQuery<T>,
) -> Result<PQResult<T>> {
    optimize(m, query, Form::Sup)
}

/// Upper bound on `‖m‖_{(p,q)}` for Hermitian `m` from its Jordan decomposition
/// `m = m₊ − m₋` and the triangle inequality.
pub fn pq_norm_hermitian_upper<T: Real>(
    m: &BipartiteOp<T>,
    query: &PQQuery<T>,
) -> Result<PQResult<T>> {
    let (da, db) = m.dims();
    let h = m.to_herm()?;
    if query.r_inv()? == T::zero() {
        let value = schatten_norm_herm(h.as_mat(), query.q);
        let sigma = CMat::identity(da, da) * c(T::one() / T::of(da as f64));
        return Ok(PQResult {
            value,
            optimizer: HermMat::symmetrized(sigma),
            iterations: 0,
            converged: true,
            bound_kind: BoundKind::Exact,
            spread: T::zero(),
            history: vec![value],
        });
    }
    let e = eigh_mat(h.as_mat())?;
    let top = e.values.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
    let cut = T::of(T::EPS) * T::of(16.0) * top;
    let plus = BipartiteOp::new(e.map(|l| if l > cut { l } else { T::zero() }), da, db)?;
    let minus = BipartiteOp::new(e.map(|l| if l < -cut { -l } else { T::zero() }), da, db)?;
    let has_minus = e.values.iter().any(|&l| l < -cut);
    let has_plus = e.values.iter().any(|&l| l > cut);
    let rp = pq_norm_inf_positive(&plus, query)?;
    if !has_minus {
        return Ok(rp);
    }
    let rm = pq_norm_inf_positive(&minus, query)?;
    if !has_plus {
        return Ok(rm);
    }
    Ok(PQResult {
        value: rp.value + rm.value,
        optimizer: rp.optimizer,
        iterations: rp.iterations + rm.iterations,
        converged: rp.converged && rm.converged,
        bound_kind: BoundKind::Upper,
        spread: rp.spread + rm.spread,
        history: vec![rp.value + rm.value],
    })
}

/// `‖m‖_{(1,α)}`; `α = 1` is the trace norm.
pub fn norm_1alpha<T: Real>(m: &BipartiteOp<T>, alpha: SchattenOrder<T>) -> Result<T> {
    Ok(norm_1alpha_result(m, alpha, &PQQuery::new(SchattenOrder::one(), alpha))?.value)
}

/// `‖m‖_{(1,α)}` with the optimizer settings of `base` (its `p`, `q` are replaced).
pub fn norm_1alpha_result<T: Real>(
    m: &BipartiteOp<T>,
    alpha: SchattenOrder<T>,
    base: &PQQuery<T>,
) -> Result<PQResult<T>> {
    let query = PQQuery {
        p: SchattenOrder::one(),
        q: alpha,
        ..*base
    };
    pq_norm_inf_positive(m, &query)
}

use num_complex::Complex;
use rand::Rng;
use rayon::prelude::*;

use svv_core::entropy::{cond_renyi_entropy_with, continuity_bound, w_alpha_with, RenyiOrder};
use svv_core::linalg::{
    c, eigvals_herm, ginibre, haar_unitary, kron, maximally_entangled, permute_subsystems,
    random_bipartite_density, random_channel, random_density, trace_distance, BipartiteOp, CMat,
    DensityMatrix, Factor, Seed,
};
use svv_core::schatten::{interpolated_order, schatten_norm, SchattenOrder};
use svv_core::strip::{strip_quadrature, StripPoint};
use svv_core::vvnorm::{
    norm_1alpha_result, pq_norm_inf_positive, pq_norm_sup_positive, BoundKind, PQQuery,
};
use svv_core::{Error, Result};

use crate::config::ExperimentConfig;
use crate::report::Row;

/// Seed of instance `trial` in group `group` of a check.
pub fn instance_seed(master: Seed, check: Check, group: u64, trial: u64) -> Seed {
    master.derive(check as u64).derive(group).derive(trial)
}

/// Optimizer settings for entropies of an instance.
fn query(seed: Seed) -> PQQuery {
    PQQuery::new(SchattenOrder::one(), SchattenOrder::one()).with_seed(seed.derive(u64::MAX))
}

fn entropy(rho: &BipartiteOp, alpha: RenyiOrder, seed: Seed) -> Result<f64> {
    cond_renyi_entropy_with(rho, alpha, &query(seed))
}

fn trace_norm(m: &CMat) -> f64 {
    eigvals_herm(m).iter().map(|l| l.abs()).sum()
}

fn collect<I: IntoParallelIterator<Item = Result<Vec<Row>>>>(jobs: I) -> Result<Vec<Row>> {
    let parts: Vec<Result<Vec<Row>>> = jobs.into_par_iter().collect();
    let mut rows = Vec::new();
    for p in parts {
        rows.extend(p?);
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Check {
    Quadrature,
    Subharmonicity,
    ChainRule,
    Continuity,
    DataProcessing,
    MonotoneAlpha,
    DimBounds,
    AlphaLimit,
    Decoupling,
    WRelation,
    Duality,
}

impl Check {
    pub const ALL: [Check; 11] = [
        Check::Quadrature,
        Check::Subharmonicity,
        Check::ChainRule,
        Check::Continuity,
        Check::DataProcessing,
        Check::MonotoneAlpha,
        Check::DimBounds,
        Check::AlphaLimit,
        Check::Decoupling,
        Check::WRelation,
        Check::Duality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Quadrature => "quadrature",
            Check::Subharmonicity => "subharmonicity",
            Check::ChainRule => "chain_rule",
            Check::Continuity => "continuity",
            Check::DataProcessing => "data_processing",
            Check::MonotoneAlpha => "monotone_alpha",
            Check::DimBounds => "dim_bounds",
            Check::AlphaLimit => "alpha_limit",
            Check::Decoupling => "decoupling",
            Check::WRelation => "w_relation",
            Check::Duality => "duality",
        }
    }

    pub fn run(self, cfg: &ExperimentConfig) -> Result<Vec<Row>> {
        match self {
            Check::Quadrature => check_quadrature(cfg),
            Check::Subharmonicity => check_subharmonicity(cfg),
            Check::ChainRule => check_chain_rule_suite(cfg),
            Check::Continuity => check_continuity_suite(cfg),
            Check::DataProcessing => check_data_processing(cfg),
            Check::MonotoneAlpha => check_monotone_alpha(cfg),
            Check::DimBounds => check_dim_bounds(cfg),
            Check::AlphaLimit => check_alpha_limit(cfg),
            Check::Decoupling => check_decoupling(cfg),
            Check::WRelation => check_w_relation(cfg),
            Check::Duality => check_duality_crosscheck(cfg),
        }
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s || c.name().replace('_', "-") == s)
            .ok_or_else(|| Error::Parse(format!("unknown check '{s}'")))
    }
}

/// `∫P_0 = 1 − x` and `∫P_1 = x` on `x ∈ {0.1, …, 0.9}`.
pub fn check_quadrature(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let name = Check::Quadrature.name();
    collect((1..10u64).into_par_iter().map(|k| {
        let seed = instance_seed(cfg.seed, Check::Quadrature, 0, k).master;
        let x = k as f64 / 10.0;
        let z = StripPoint::new(x, 0.0)?;
        Ok(vec![
            Row::eq(name, seed, strip_quadrature(|_| 1.0, 0, z)?, 1.0 - x, 1e-8),
            Row::eq(name, seed, strip_quadrature(|_| 1.0, 1, z)?, x, 1e-8),
        ])
    }))
}

/// `f(z) = Σ_k C_k e^{kz}`, bounded on the strip.
#[derive(Debug, Clone)]
pub struct StripFunction {
    pub coeffs: Vec<CMat>,
}

impl StripFunction {
    pub fn random(degree: usize, dim: usize, seed: Seed) -> Self {
        let mut rng = seed.rng();
        let coeffs = (0..=degree)
            .map(|k| ginibre::<f64, _>(dim, dim, &mut rng) * c(1.0 / (k + 1) as f64))
            .collect();
        Self { coeffs }
    }

    pub fn eval(&self, z: Complex<f64>) -> CMat {
        let n = self.coeffs[0].nrows();
        self.coeffs
            .iter()
            .enumerate()
            .fold(CMat::zeros(n, n), |acc, (k, ck)| {
                acc + ck * (z * k as f64).exp()
            })
    }
}

/// `log‖f(θ)‖_{p_θ} ≤ Σ_b ∫ P_b(θ, s) log‖f(b+is)‖_{p_b} ds`, as a row.
pub fn subharmonic_row(
    f: &StripFunction,
    orders: [SchattenOrder; 2],
    theta: StripPoint,
    seed: u64,
    tol: f64,
) -> Result<Row> {
    let p = interpolated_order(orders[0], orders[1], theta.x)?;
    let lhs = schatten_norm(&f.eval(Complex::new(theta.x, theta.y)), p).ln();
    let side = |b: u8| {
        strip_quadrature(
            |s| schatten_norm(&f.eval(Complex::new(b as f64, s)), orders[b as usize]).ln(),
            b,
            theta,
        )
    };
    let rhs = side(0)? + side(1)?;
    Ok(Row::le(Check::Subharmonicity.name(), seed, lhs, rhs, tol))
}

pub fn check_subharmonicity(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    collect((0..cfg.trials as u64).into_par_iter().map(|t| {
        let seed = instance_seed(cfg.seed, Check::Subharmonicity, 0, t);
        let f = StripFunction::random(cfg.poly_degree, cfg.matrix_dim, seed);
        let mut rng = seed.derive(1).rng();
        let theta = StripPoint::new(rng.random_range(0.05..0.95), rng.random_range(-2.0..2.0))?;
        Ok(vec![subharmonic_row(
            &f,
            cfg.interp_orders,
            theta,
            seed.master,
            cfg.tol,
        )?])
    }))
}

/// `α` with `α' = β' + γ'`.
pub fn chain_alpha(beta: RenyiOrder, gamma: RenyiOrder) -> Result<RenyiOrder> {
    let ap = beta.conjugate() + gamma.conjugate();
    RenyiOrder::new(ap / (ap - 1.0))
}

/// `H_α(XY|Z) ≥ H_β(X|YZ) + H_γ(Y|Z)` for ρ on `X ⊗ Y ⊗ Z`.
pub fn chain_rule_row(
    rho: &CMat,
    dims: (usize, usize, usize),
    orders: [RenyiOrder; 3],
    seed: Seed,
    tol: f64,
) -> Result<Row> {
    let (dx, dy, dz) = dims;
    let [alpha, beta, gamma] = orders;
    let gap = (alpha.conjugate() - beta.conjugate() - gamma.conjugate()).abs();
    if !(gap <= 1e-12 * alpha.conjugate().max(1.0)) {
        return Err(Error::InvalidArgument(format!(
            "orders violate α' = β' + γ' by {gap:e}"
        )));
    }
    let d = [dx, dy, dz];
    let zxy = BipartiteOp::new(permute_subsystems(rho, &d, &[2, 0, 1]), dz, dx * dy)?;
    let yzx = BipartiteOp::new(permute_subsystems(rho, &d, &[1, 2, 0]), dy * dz, dx)?;
    let yz = BipartiteOp::new(rho.clone(), dx, dy * dz)?.partial_trace(Factor::First);
    let zy = BipartiteOp::new(yz, dy, dz)?.swap();
    let lhs = entropy(&yzx, beta, seed.derive(1))? + entropy(&zy, gamma, seed.derive(2))?;
    let rhs = entropy(&zxy, alpha, seed.derive(3))?;
    Ok(Row::le(Check::ChainRule.name(), seed.master, lhs, rhs, tol))
}

pub fn check_chain_rule(
    dims: (usize, usize, usize),
    beta: RenyiOrder,
    gamma: RenyiOrder,
    trials: usize,
    master: Seed,
    group: u64,
    tol: f64,
) -> Result<Vec<Row>> {
    let alpha = chain_alpha(beta, gamma)?;
    let n = dims.0 * dims.1 * dims.2;
    collect((0..trials as u64).into_par_iter().map(|t| {
        let seed = instance_seed(master, Check::ChainRule, group, t);
        let rho = random_density::<f64>(n, n, seed)?;
        Ok(vec![chain_rule_row(
            rho.as_mat(),
            dims,
            [alpha, beta, gamma],
            seed,
            tol,
        )?])
    }))
}

fn check_chain_rule_suite(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    let mut group = 0;
    for dims in cfg.triples() {
        for [beta, gamma] in &cfg.chain_orders {
            rows.extend(check_chain_rule(
                dims,
                *beta,
                *gamma,
                cfg.trials,
                cfg.seed,
                group,
                10.0 * cfg.tol,
            )?);
            group += 1;
        }
    }
    Ok(rows)
}

/// Continuity rows on `d_Y ⊗ d_X`; trial 0 compares a state with itself.
pub fn check_continuity(
    dims: (usize, usize),
    alpha: RenyiOrder,
    max_eps: f64,
    trials: usize,
    master: Seed,
    group: u64,
    tol: f64,
) -> Result<Vec<Row>> {
    let (dy, dx) = dims;
    collect((0..trials as u64).into_par_iter().map(|t| {
        let seed = instance_seed(master, Check::Continuity, group, t);
        let rho = random_bipartite_density::<f64>(dy, dx, seed)?;
        let lambda = if t == 0 {
            0.0
        } else {
            max_eps * (1.0 - seed.derive(1).rng().random::<f64>())
        };
        let omega = random_density::<f64>(dy * dx, dy * dx, seed.derive(2))?;
        let sigma_mat = rho.as_mat() * c(1.0 - lambda) + omega.as_mat() * c(lambda);
        let r = DensityMatrix::new(rho.as_mat().clone())?;
        let s = DensityMatrix::new(sigma_mat.clone())?;
        // the bound is evaluated at the measured distance, not the target
        let eps = if t == 0 { 0.0 } else { trace_distance(&r, &s)? };
        let sigma = BipartiteOp::new(sigma_mat, dy, dx)?;
        let lhs =
            (entropy(&rho, alpha, seed.derive(3))? - entropy(&sigma, alpha, seed.derive(4))?).abs();
        let rhs = continuity_bound(eps, dx, alpha)?;
        Ok(vec![Row::le(
            Check::Continuity.name(),
            seed.master,
            lhs,
            rhs,
            tol,
        )
        .note(format!("eps={eps:e}"))])
    }))
}

fn check_continuity_suite(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    let mut group = 0;
    for dims in cfg.pairs() {
        for &alpha in &cfg.alphas {
            rows.extend(check_continuity(
                dims,
                alpha,
                0.1,
                cfg.trials,
                cfg.seed,
                group,
                10.0 * cfg.tol,
            )?);
            group += 1;
        }
    }
    Ok(rows)
}

/// Random bipartite states for the checks that run over `cfg.pairs()`.
fn over_states<F>(cfg: &ExperimentConfig, check: Check, f: F) -> Result<Vec<Row>>
where
    F: Fn(&BipartiteOp, Seed) -> Result<Vec<Row>> + Sync,
{
    let jobs: Vec<(u64, (usize, usize), u64)> = cfg
        .pairs()
        .enumerate()
        .flat_map(|(g, d)| (0..cfg.trials as u64).map(move |t| (g as u64, d, t)))
        .collect();
    collect(jobs.into_par_iter().map(|(g, (dy, dx), t)| {
        let seed = instance_seed(cfg.seed, check, g, t);
        let rho = random_bipartite_density::<f64>(dy, dx, seed)?;
        f(&rho, seed)
    }))
}

fn with_one(alphas: &[RenyiOrder]) -> Vec<RenyiOrder> {
    let mut out = vec![RenyiOrder::one()];
    out.extend(alphas.iter().copied().filter(|a| !a.is_one()));
    out
}

/// `H_α(X|Y)` does not decrease when a channel acts on `Y`; `W_1` does not increase.
pub fn check_data_processing(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let name = Check::DataProcessing.name();
    let orders = with_one(&cfg.alphas);
    over_states(cfg, Check::DataProcessing, |rho, seed| {
        let dy = rho.dim_a();
        let ch = random_channel::<f64>(dy, dy, 2, seed.derive(1))?;
        let out = ch.apply_on(rho, Factor::First)?;
        let mut rows = Vec::new();
        for (k, &a) in orders.iter().enumerate() {
            let before = entropy(rho, a, seed.derive(10 + k as u64))?;
            let after = entropy(&out, a, seed.derive(20 + k as u64))?;
            rows.push(
                Row::le(name, seed.master, before, after, 5.0 * cfg.tol).note(format!("alpha={a}")),
            );
        }
        let q = query(seed);
        let wb = w_alpha_with(rho, RenyiOrder::one(), &q)?.value;
        let wa = w_alpha_with(&out, RenyiOrder::one(), &q)?.value;
        rows.push(Row::le(name, seed.master, wa, wb, 5.0 * cfg.tol).note("W, alpha=1"));
        Ok(rows)
    })
}

/// `H_α` is non-increasing along the sorted order grid.
pub fn check_monotone_alpha(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let name = Check::MonotoneAlpha.name();
    let mut grid = with_one(&cfg.alphas);
    grid.sort_by(|a, b| a.alpha().total_cmp(&b.alpha()));
    over_states(cfg, Check::MonotoneAlpha, |rho, seed| {
        let hs = grid
            .iter()
            .enumerate()
            .map(|(k, &a)| entropy(rho, a, seed.derive(k as u64)))
            .collect::<Result<Vec<f64>>>()?;
        Ok(hs
            .windows(2)
            .zip(grid.windows(2))
            .map(|(h, a)| {
                Row::le(name, seed.master, h[1], h[0], 5.0 * cfg.tol)
                    .note(format!("alpha={}->{}", a[0], a[1]))
            })
            .collect())
    })
}

/// `|H_α(X|Y)| ≤ log d_X`.
pub fn check_dim_bounds(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let name = Check::DimBounds.name();
    let orders = with_one(&cfg.alphas);
    over_states(cfg, Check::DimBounds, |rho, seed| {
        let bound = (rho.dim_b() as f64).ln();
        orders
            .iter()
            .enumerate()
            .map(|(k, &a)| {
                let h = entropy(rho, a, seed.derive(k as u64))?;
                Ok(Row::le(name, seed.master, h.abs(), bound, 100.0 * cfg.tol)
                    .note(format!("alpha={a}")))
            })
            .collect()
    })
}

/// Steps `h` used to fit the rate of `H_{1+h} → H`.
pub const LIMIT_STEPS: [f64; 3] = [1e-1, 1e-2, 1e-3];

/// `|H_{1+h} − H| ≤ 5e-3` at `h = 1e-3`, and at most twice the rate seen at
/// the coarser steps.
pub fn check_alpha_limit(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let name = Check::AlphaLimit.name();
    over_states(cfg, Check::AlphaLimit, |rho, seed| {
        let h1 = entropy(rho, RenyiOrder::one(), seed)?;
        let devs = LIMIT_STEPS
            .iter()
            .enumerate()
            .map(|(k, &h)| {
                Ok((entropy(rho, RenyiOrder::new(1.0 + h)?, seed.derive(k as u64))? - h1).abs())
            })
            .collect::<Result<Vec<f64>>>()?;
        let rate = 2.0 * (devs[0] / LIMIT_STEPS[0]).max(devs[1] / LIMIT_STEPS[1]);
        let h = LIMIT_STEPS[2];
        Ok(vec![
            Row::le(name, seed.master, devs[2], 5e-3, 0.0).note("h=1e-3"),
            Row::le(name, seed.master, devs[2], rate * h, cfg.tol)
                .note(format!("fitted C={rate:e}")),
        ])
    })
}

/// Monte-Carlo mean and standard error of
/// `‖(d_X/d_X0)(I ⊗ PU) ρ (I ⊗ U†P) − ρ_Y ⊗ I/d_X0‖₁` over Haar `U`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

pub fn decoupling_estimate(
    rho: &BipartiteOp,
    keep: usize,
    samples: usize,
    seed: Seed,
) -> Result<McEstimate> {
    let (dy, dx) = rho.dims();
    if keep == 0 || keep > dx || samples == 0 {
        return Err(Error::InvalidArgument(format!(
            "need 1 ≤ d_X0 ≤ {dx} and samples ≥ 1"
        )));
    }
    let rho_y = rho.partial_trace(Factor::Second);
    let target = kron(&rho_y, &(CMat::identity(keep, keep) * c(1.0 / keep as f64)));
    let scale = c(dx as f64 / keep as f64);
    let eye = CMat::identity(dy, dy);
    let values: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|k| {
            let u = haar_unitary::<f64>(dx, seed.derive(k));
            let k = kron(&eye, &u.rows(0, keep).into_owned());
            trace_norm(&((&k * rho.as_mat() * k.adjoint()) * scale - &target))
        })
        .collect();
    let n = samples as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if samples > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(McEstimate {
        mean,
        stderr: (var / n).sqrt(),
        samples,
    })
}

/// `2^{2/α−1} d_X0^{1/α'} W_α(X|Y)`.
pub fn decoupling_bound(
    rho: &BipartiteOp,
    keep: usize,
    alpha: RenyiOrder,
    seed: Seed,
) -> Result<(f64, BoundKind)> {
    let a = alpha.alpha();
    if !(1.0..=2.0).contains(&a) {
        return Err(Error::InvalidArgument(format!(
            "decoupling needs 1 ≤ α ≤ 2, got {a}"
        )));
    }
    let w = w_alpha_with(rho, alpha, &query(seed))?;
    let factor = 2f64.powf(2.0 / a - 1.0) * (keep as f64).powf(1.0 / alpha.conjugate());
    Ok((factor * w.value, w.bound_kind))
}

/// Rows `mean + 3·stderr ≤ bound` for each order.
pub fn decoupling_mc(
    rho: &BipartiteOp,
    keep: usize,
    alphas: &[RenyiOrder],
    samples: usize,
    seed: Seed,
    tol: f64,
) -> Result<Vec<Row>> {
    let est = decoupling_estimate(rho, keep, samples, seed)?;
    alphas
        .iter()
        .enumerate()
        .map(|(k, &a)| {
            let (rhs, kind) =
                decoupling_bound(rho, keep, a, seed.derive(samples as u64 + k as u64))?;
            let mut note = format!("alpha={a} mean={:e} stderr={:e}", est.mean, est.stderr);
            if kind != BoundKind::Exact {
                note.push_str(" W upper bound");
            }
            Ok(Row::le(
                Check::Decoupling.name(),
                seed.master,
                est.mean + 3.0 * est.stderr,
                rhs,
                tol,
            )
            .note(note))
        })
        .collect()
}

/// Orders of `cfg.alphas` in `[1, 2]`, with `1` always included.
pub fn decoupling_orders(alphas: &[RenyiOrder]) -> Vec<RenyiOrder> {
    with_one(alphas)
        .into_iter()
        .filter(|a| a.alpha() <= 2.0)
        .collect()
}

/// Maximally entangled state (when `d_Y = d_X`) followed by `trials` random states.
pub fn check_decoupling(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let [dy, dx] = cfg.decouple_dims;
    let orders = decoupling_orders(&cfg.alphas);
    let mut rows = Vec::new();
    if dy == dx {
        let seed = instance_seed(cfg.seed, Check::Decoupling, 0, 0);
        rows.extend(decoupling_mc(
            &maximally_entangled(dx),
            cfg.decouple_keep,
            &orders,
            cfg.mc_samples,
            seed,
            cfg.tol,
        )?);
    }
    for t in 0..cfg.trials as u64 {
        let seed = instance_seed(cfg.seed, Check::Decoupling, 1, t);
        let rho = random_bipartite_density::<f64>(dy, dx, seed)?;
        rows.extend(decoupling_mc(
            &rho,
            cfg.decouple_keep,
            &orders,
            cfg.mc_samples,
            seed,
            cfg.tol,
        )?);
    }
    Ok(rows)
}

/// `W_α ≥ e^{−H_α/α'} − d_X^{−1/α'}`; the opposite branch is only noted,
/// since `W_α` is an upper bound away from `α = 1`.
pub fn check_w_relation(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let name = Check::WRelation.name();
    let orders = with_one(&cfg.alphas);
    over_states(cfg, Check::WRelation, |rho, seed| {
        let dx = rho.dim_b() as f64;
        orders
            .iter()
            .enumerate()
            .map(|(k, &a)| {
                let q = query(seed.derive(k as u64));
                let norm = norm_1alpha_result(rho, a.schatten(), &q)?.value;
                let w = w_alpha_with(rho, a, &q)?;
                let floor = dx.powf(-1.0 / a.conjugate());
                let other = floor - (w.value - norm);
                Ok(
                    Row::le(name, seed.master, norm - floor, w.value, cfg.tol).note(format!(
                        "alpha={a} upper-branch margin={other:e} W {:?}",
                        w.bound_kind
                    )),
                )
            })
            .collect()
    })
}

/// `tr(y m) / ‖y‖_{(∞,α')} ≤ ‖m‖_{(1,α)}` over positive witnesses `y`, the
/// first being `m` itself.
pub fn check_duality_crosscheck(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let name = Check::Duality.name();
    let orders = with_one(&cfg.alphas);
    collect((0..cfg.trials as u64).into_par_iter().map(|t| {
        let seed = instance_seed(cfg.seed, Check::Duality, 0, t);
        let m = random_bipartite_density::<f64>(2, 2, seed)?;
        let mut witnesses = vec![m.clone()];
        for k in 1..cfg.witnesses as u64 {
            let s = seed.derive(k);
            let rank = 1 + (s.rng().random::<u32>() % 4) as usize;
            witnesses.push(random_density::<f64>(4, rank, s.derive(1))?.bipartite(2, 2)?);
        }
        orders
            .iter()
            .map(|&a| {
                let base = query(seed);
                let primal = pq_norm_inf_positive(
                    &m,
                    &PQQuery {
                        p: SchattenOrder::one(),
                        q: a.schatten(),
                        ..base
                    },
                )?;
                let dual_query = PQQuery {
                    p: a.schatten().conjugate(),
                    q: SchattenOrder::Infinity,
                    ..base
                };
                let mut best = f64::NEG_INFINITY;
                for y in &witnesses {
                    let pair = (y.as_mat().adjoint() * m.as_mat()).trace().re;
                    let den = pq_norm_sup_positive(y, &dual_query)?.value;
                    best = best.max(pair / den);
                }
                Ok(
                    Row::le(name, seed.master, best, primal.value, 10.0 * cfg.tol)
                        .note(format!("alpha={a}")),
                )
            })
            .collect()
    }))
}

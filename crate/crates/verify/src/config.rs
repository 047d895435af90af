use serde::{Deserialize, Serialize};
use svv_core::entropy::RenyiOrder;
use svv_core::linalg::Seed;
use svv_core::schatten::SchattenOrder;
use svv_core::{Error, Result};

/// Parameters shared by every check.
///
/// `dims` entries of length two are `(d_Y, d_X)` pairs for the bipartite
/// checks; entries of length three are `(d_X, d_Y, d_Z)` for the chain rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Seed,
    pub trials: usize,
    pub dims: Vec<Vec<usize>>,
    pub alphas: Vec<RenyiOrder>,
    pub tol: f64,
    pub mc_samples: usize,
    /// `(β, γ)` pairs for the chain rule; `α` follows from `α' = β' + γ'`.
    pub chain_orders: Vec<[RenyiOrder; 2]>,
    /// Degree and matrix size of the random analytic functions on the strip.
    pub poly_degree: usize,
    pub matrix_dim: usize,
    /// Schatten orders on the two boundary lines.
    pub interp_orders: [SchattenOrder; 2],
    /// `(d_Y, d_X)` for the decoupling estimate and the kept dimension `d_X0`.
    pub decouple_dims: [usize; 2],
    pub decouple_keep: usize,
    /// Random witnesses per instance in the duality cross-check.
    pub witnesses: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let ro = |a: f64| RenyiOrder::new(a).expect("valid order");
        Self {
            seed: Seed::new(0),
            trials: 20,
            dims: vec![vec![2, 2], vec![2, 3], vec![2, 2, 2]],
            alphas: vec![ro(1.5), ro(2.0), ro(3.0)],
            tol: 1e-6,
            mc_samples: 2000,
            chain_orders: vec![[ro(2.0), ro(2.0)], [ro(3.0), ro(1.5)], [ro(1.5), ro(3.0)]],
            poly_degree: 3,
            matrix_dim: 4,
            interp_orders: [SchattenOrder::one(), SchattenOrder::Infinity],
            decouple_dims: [4, 4],
            decouple_keep: 2,
            witnesses: 8,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.dims.is_empty() {
            return bad("dims must not be empty".into());
        }
        for d in &self.dims {
            if !(2..=3).contains(&d.len()) || d.iter().any(|&k| k < 2) {
                return bad(format!(
                    "dims entry {d:?} must list 2 or 3 dimensions, each at least 2"
                ));
            }
        }
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if self.mc_samples < 2 {
            return bad("mc_samples must be at least 2".into());
        }
        if self.matrix_dim < 1 || self.witnesses < 1 {
            return bad("matrix_dim and witnesses must be at least 1".into());
        }
        let [dy, dx] = self.decouple_dims;
        if dy < 2 || dx < 2 || self.decouple_keep < 1 || self.decouple_keep > dx {
            return bad(format!(
                "decoupling needs d_Y, d_X ≥ 2 and 1 ≤ d_X0 ≤ d_X, got {dy}, {dx}, {}",
                self.decouple_keep
            ));
        }
        Ok(())
    }

    pub(crate) fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.dims
            .iter()
            .filter(|d| d.len() == 2)
            .map(|d| (d[0], d[1]))
    }

    pub(crate) fn triples(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.dims
            .iter()
            .filter(|d| d.len() == 3)
            .map(|d| (d[0], d[1], d[2]))
    }
}

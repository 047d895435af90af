use nalgebra::DVector;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{c, BipartiteOp, CMat, CVec, Channel, DensityMatrix, HermMat};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Master seed from which every random instance is derived.
///
/// The stream for sample `i` is a pure function of `(master, i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed {
    pub master: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Seed {
    pub const fn new(master: u64) -> Self {
        Self { master }
    }

    /// Seed for sample `index`.
    pub fn derive(self, index: u64) -> Seed {
        Seed::new(splitmix64(
            splitmix64(self.master) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03),
        ))
    }

    pub fn rng(self) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(self.master)
    }
}

impl From<u64> for Seed {
    fn from(master: u64) -> Self {
        Self::new(master)
    }
}

fn normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::of(rng.sample::<f64, _>(StandardNormal))
}

/// Matrix with i.i.d. standard complex Gaussian entries (`E|z|² = 1`).
pub fn ginibre<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat<T> {
    let s = T::of(std::f64::consts::FRAC_1_SQRT_2);
    let mut m = CMat::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let re: T = normal(rng);
            let im: T = normal(rng);
            m[(i, j)] = Complex::new(re * s, im * s);
        }
    }
    m
}

/// Orthonormalizes the columns of a tall matrix with the phase convention
/// `diag(R) > 0`, which makes Gaussian input Haar distributed.
fn orthonormal_columns<T: Real>(g: CMat<T>) -> CMat<T> {
    let cols = g.ncols();
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..cols {
        let d = r[(j, j)];
        let n = d.norm_sqr().sqrt();
        let phase = if n > T::zero() { d / c(n) } else { c(T::one()) };
        for i in 0..q.nrows() {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar-distributed unitary (QR of a Ginibre matrix with phase correction).
pub fn haar_unitary<T: Real>(dim: usize, seed: Seed) -> CMat<T> {
    let mut rng = seed.rng();
    orthonormal_columns(ginibre(dim, dim, &mut rng))
}

/// Uniformly random unit vector.
pub fn random_pure_state<T: Real>(dim: usize, seed: Seed) -> CVec<T> {
    let mut rng = seed.rng();
    let g = ginibre::<T, _>(dim, 1, &mut rng);
    let v = DVector::from_iterator(dim, g.iter().copied());
    let n = v.norm();
    v / c(n)
}

/// Random Hermitian matrix from the Gaussian unitary ensemble.
pub fn random_hermitian<T: Real>(dim: usize, seed: Seed) -> HermMat<T> {
    let mut rng = seed.rng();
    let g = ginibre::<T, _>(dim, dim, &mut rng);
    HermMat::symmetrized(g)
}

/// Random state `G G† / tr(G G†)` with `G` a `dim × rank` Ginibre matrix.
pub fn random_density<T: Real>(dim: usize, rank: usize, seed: Seed) -> Result<DensityMatrix<T>> {
    if dim == 0 || rank == 0 || rank > dim {
        return Err(Error::InvalidArgument(format!(
            "rank {rank} infeasible for dimension {dim}"
        )));
    }
    let mut rng = seed.rng();
    let g = ginibre::<T, _>(dim, rank, &mut rng);
    DensityMatrix::normalized(&g * g.adjoint())
}

/// Random bipartite state on `dim_a ⊗ dim_b` (full rank).
pub fn random_bipartite_density<T: Real>(
    dim_a: usize,
    dim_b: usize,
    seed: Seed,
) -> Result<BipartiteOp<T>> {
    random_density::<T>(dim_a * dim_b, dim_a * dim_b, seed)?.bipartite(dim_a, dim_b)
}

/// Kraus operators of `ρ ↦ tr_E(V ρ V†)` for an isometry `V : H_in → H_E ⊗ H_out`
/// whose rows are indexed `e·dim_out + o`.
pub fn channel_from_isometry<T: Real>(
    v: &CMat<T>,
    dim_out: usize,
    dim_env: usize,
) -> Result<Channel<T>> {
    if v.nrows() != dim_out * dim_env {
        return Err(Error::Dimension(format!(
            "isometry has {} rows, expected {}·{}",
            v.nrows(),
            dim_env,
            dim_out
        )));
    }
    let kraus = (0..dim_env)
        .map(|e| v.rows(e * dim_out, dim_out).into_owned())
        .collect();
    Channel::new(kraus)
}

/// Random channel from a Stinespring isometry with orthonormalized Gaussian columns.
pub fn random_channel<T: Real>(
    dim_in: usize,
    dim_out: usize,
    dim_env: usize,
    seed: Seed,
) -> Result<Channel<T>> {
    if dim_in == 0 || dim_out * dim_env < dim_in {
        return Err(Error::InvalidArgument(format!(
            "environment {dim_env} and output {dim_out} too small for input {dim_in}"
        )));
    }
    let mut rng = seed.rng();
    let v = orthonormal_columns(ginibre::<T, _>(dim_out * dim_env, dim_in, &mut rng));
    channel_from_isometry(&v, dim_out, dim_env)
}

pub mod entropy;
pub mod error;
pub mod linalg;
pub mod optim;
pub mod scalar;
pub mod schatten;
pub mod specfact;
pub mod strip;
pub mod vvnorm;

pub use error::{Error, Result};
pub use scalar::Real;

pub use linalg::{BipartiteOp, CMat, Channel, DensityMatrix, HermMat};

pub type HermMatF64 = HermMat<f64>;
pub type HermMatF32 = HermMat<f32>;
pub type BipartiteOpF64 = BipartiteOp<f64>;
pub type BipartiteOpF32 = BipartiteOp<f32>;
pub type DensityMatrixF64 = DensityMatrix<f64>;
pub type DensityMatrixF32 = DensityMatrix<f32>;
pub type ChannelF64 = Channel<f64>;
pub type ChannelF32 = Channel<f32>;
pub type TrigMatPolyF64 = specfact::TrigMatPoly<f64>;
pub type TrigMatPolyF32 = specfact::TrigMatPoly<f32>;

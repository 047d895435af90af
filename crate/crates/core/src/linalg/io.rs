//! JSON matrix file format: `{"rows":n,"cols":m,"dims":[dA,dB]?,"data":[[re,im],...]}`, row-major.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{BipartiteOp, CMat, HermMat};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<[usize; 2]>,
    pub data: Vec<[f64; 2]>,
}

impl MatrixFile {
    pub fn from_matrix<T: Real>(m: &CMat<T>, dims: Option<[usize; 2]>) -> Self {
        let data = (0..m.nrows())
            .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| [m[(i, j)].re.as_f64(), m[(i, j)].im.as_f64()])
            .collect();
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            dims,
            data,
        }
    }

    pub fn from_bipartite<T: Real>(op: &BipartiteOp<T>) -> Self {
        Self::from_matrix(op.as_mat(), Some([op.dim_a(), op.dim_b()]))
    }

    pub fn to_matrix<T: Real>(&self) -> Result<CMat<T>> {
        if self.rows * self.cols != self.data.len() {
            return Err(Error::Parse(format!(
                "{}x{} matrix needs {} entries, found {}",
                self.rows,
                self.cols,
                self.rows * self.cols,
                self.data.len()
            )));
        }
        if self.data.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(CMat::from_row_iterator(
            self.rows,
            self.cols,
            self.data
                .iter()
                .map(|&[re, im]| Complex::new(T::of(re), T::of(im))),
        ))
    }

    /// Bipartite view; without explicit `dims` the operator is read as `n ⊗ 1`.
    pub fn to_bipartite<T: Real>(&self) -> Result<BipartiteOp<T>> {
        let m = self.to_matrix()?;
        let [da, db] = self.dims.unwrap_or([self.rows, 1]);
        BipartiteOp::new(m, da, db)
    }
}

pub fn matrix_to_json<T: Real>(m: &CMat<T>, dims: Option<[usize; 2]>) -> String {
    serde_json::to_string(&MatrixFile::from_matrix(m, dims)).expect("matrix serializes")
}

pub fn matrix_from_json<T: Real>(s: &str) -> Result<(CMat<T>, Option<[usize; 2]>)> {
    let f: MatrixFile = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
    Ok((f.to_matrix()?, f.dims))
}

impl<T: Real> Serialize for HermMat<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixFile::from_matrix(self.as_mat(), None).serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for HermMat<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = MatrixFile::deserialize(d)?;
        f.to_matrix()
            .and_then(HermMat::new)
            .map_err(serde::de::Error::custom)
    }
}

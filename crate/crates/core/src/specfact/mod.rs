//! Matrix spectral factorization `T(e^{it}) = A(e^{it})† A(e^{it})` with `A`
//! analytic and outer, and its transport to the strip.

mod factorize;
mod transport;

pub use factorize::{
    outerness_certificate, spectral_factorize, Factorization, Method, OuternessCertificate,
};
pub use transport::{
    conformal_inverse, conformal_map, strip_factorize, StripFactorization, StripOptions,
};

use std::collections::BTreeMap;

use nalgebra::ComplexField;
use num_complex::Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{c, eigvals_herm, CMat, HermMat, MatrixFile};
use crate::scalar::Real;

/// Hermitian matrix trigonometric polynomial `T(e^{it}) = Σ_{|n|≤N} C_n e^{int}`
/// with `C_{−n} = C_n†`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigMatPoly<T: Real = f64> {
    d: usize,
    /// `C_0, …, C_N`; the negative coefficients are their adjoints.
    coeffs: Vec<CMat<T>>,
}

impl<T: Real> TrigMatPoly<T> {
    /// From `C_0, …, C_N`; `C_0` must be Hermitian.
    pub fn new(coeffs: Vec<CMat<T>>) -> Result<Self> {
        let Some(c0) = coeffs.first() else {
            return Err(Error::InvalidArgument(
                "trigonometric polynomial needs at least C_0".into(),
            ));
        };
        let d = c0.nrows();
        if d == 0 || coeffs.iter().any(|m| m.nrows() != d || m.ncols() != d) {
            return Err(Error::Dimension(
                "coefficients must be square and of equal size".into(),
            ));
        }
        let mut coeffs = coeffs;
        coeffs[0] = HermMat::new(coeffs[0].clone())?.into_mat();
        Ok(Self { d, coeffs })
    }

    /// From `C_{−N}, …, C_N`, checking `C_{−n} = C_n†`.
    pub fn from_symmetric(all: Vec<CMat<T>>) -> Result<Self> {
        if all.len() % 2 == 0 {
            return Err(Error::InvalidArgument(
                "need an odd number of coefficients C_{-N..N}".into(),
            ));
        }
        let n = all.len() / 2;
        for k in 1..=n {
            let (neg, pos) = (&all[n - k], &all[n + k]);
            if neg.shape() != pos.shape() {
                return Err(Error::Dimension(
                    "coefficients must be of equal size".into(),
                ));
            }
            let scale = T::one().max(pos.norm());
            if (neg - pos.adjoint()).norm() > T::tol(1e-10) * scale {
                return Err(Error::NotHermitian {
                    residual: (neg - pos.adjoint()).norm().as_f64(),
                });
            }
        }
        Self::new(all.into_iter().skip(n).collect())
    }

    /// Constant symbol `C`.
    pub fn constant(c0: CMat<T>) -> Result<Self> {
        Self::new(vec![c0])
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Band half-width `N`.
    pub fn band(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `C_k` for `|k| ≤ N`, zero outside the band.
    pub fn coeff(&self, k: i64) -> CMat<T> {
        let a = k.unsigned_abs() as usize;
        if a > self.band() {
            CMat::zeros(self.d, self.d)
        } else if k >= 0 {
            self.coeffs[a].clone()
        } else {
            self.coeffs[a].adjoint()
        }
    }

    pub fn scale(&self, factor: T) -> Self {
        Self {
            d: self.d,
            coeffs: self.coeffs.iter().map(|m| m * c(factor)).collect(),
        }
    }

    /// Smallest eigenvalue of `T(e^{it})` over `samples` equispaced angles.
    pub fn min_eigenvalue(&self, samples: usize) -> T {
        (0..samples)
            .map(|j| {
                let t = T::two_pi() * T::of(j as f64) / T::of(samples as f64);
                eigvals_herm(eval_trig(self, t).as_mat())
                    .iter()
                    .fold(T::infinity(), |a, &b| a.min(b))
            })
            .fold(T::infinity(), |a, b| a.min(b))
    }
}

/// `T(e^{it})`, symmetrized.
pub fn eval_trig<T: Real>(poly: &TrigMatPoly<T>, t: T) -> HermMat<T> {
    let mut m = poly.coeffs[0].clone();
    for (k, ck) in poly.coeffs.iter().enumerate().skip(1) {
        let e = Complex::new(T::zero(), t * T::of(k as f64)).exp();
        let term = ck * e;
        m += &term + term.adjoint();
    }
    HermMat::symmetrized(m)
}

/// Analytic matrix polynomial `A(z) = Σ_{k=0}^{K} A_k z^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticMatPoly<T: Real = f64> {
    d: usize,
    coeffs: Vec<CMat<T>>,
}

impl<T: Real> AnalyticMatPoly<T> {
    pub fn new(coeffs: Vec<CMat<T>>) -> Result<Self> {
        let Some(a0) = coeffs.first() else {
            return Err(Error::InvalidArgument(
                "analytic polynomial needs at least A_0".into(),
            ));
        };
        let d = a0.nrows();
        if d == 0 || coeffs.iter().any(|m| m.nrows() != d || m.ncols() != d) {
            return Err(Error::Dimension(
                "coefficients must be square and of equal size".into(),
            ));
        }
        Ok(Self { d, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[CMat<T>] {
        &self.coeffs
    }

    /// The trigonometric polynomial `A(e^{it})† A(e^{it})`.
    pub fn gram(&self) -> TrigMatPoly<T> {
        let k = self.degree();
        let coeffs = (0..=k)
            .map(|n| {
                (0..=k - n).fold(CMat::zeros(self.d, self.d), |acc, a| {
                    acc + self.coeffs[a].adjoint() * &self.coeffs[a + n]
                })
            })
            .collect();
        TrigMatPoly { d: self.d, coeffs }
    }
}

/// `A(z)` by Horner's rule.
pub fn eval_analytic<T: Real>(poly: &AnalyticMatPoly<T>, z: Complex<T>) -> CMat<T> {
    let mut acc = CMat::zeros(poly.d, poly.d);
    for ak in poly.coeffs.iter().rev() {
        acc = acc * z + ak;
    }
    acc
}

#[derive(Serialize, Deserialize)]
struct TrigFile {
    d: usize,
    #[serde(rename = "N")]
    n: usize,
    coeffs: BTreeMap<String, MatrixFile>,
}

impl<T: Real> Serialize for TrigMatPoly<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.band() as i64;
        let coeffs = (-n..=n)
            .map(|k| (k.to_string(), MatrixFile::from_matrix(&self.coeff(k), None)))
            .collect();
        TrigFile {
            d: self.d,
            n: self.band(),
            coeffs,
        }
        .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for TrigMatPoly<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = TrigFile::deserialize(d)?;
        trig_from_file(f).map_err(serde::de::Error::custom)
    }
}

fn trig_from_file<T: Real>(f: TrigFile) -> Result<TrigMatPoly<T>> {
    let n = f.n as i64;
    let get = |k: i64| -> Result<Option<CMat<T>>> {
        f.coeffs
            .get(&k.to_string())
            .map(|m| m.to_matrix())
            .transpose()
    };
    let mut all = Vec::with_capacity(2 * f.n + 1);
    for k in -n..=n {
        let m = match get(k)? {
            Some(m) => m,
            None if k < 0 => get(-k)?
                .ok_or_else(|| Error::Parse(format!("missing coefficient {}", -k)))?
                .adjoint(),
            None => return Err(Error::Parse(format!("missing coefficient {k}"))),
        };
        if m.nrows() != f.d || m.ncols() != f.d {
            return Err(Error::Dimension(format!(
                "coefficient {k} is not {}x{}",
                f.d, f.d
            )));
        }
        all.push(m);
    }
    TrigMatPoly::from_symmetric(all)
}

pub fn trig_to_json<T: Real>(poly: &TrigMatPoly<T>) -> String {
    serde_json::to_string(poly).expect("polynomial serializes")
}

pub fn trig_from_json<T: Real>(s: &str) -> Result<TrigMatPoly<T>> {
    let f: TrigFile = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
    trig_from_file(f)
}

/// Unimodular `e^{iθ}`.
pub(crate) fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ginibre, Seed};

    #[test]
    fn constant_symbol_is_constant() {
        let c0 = HermMat::symmetrized(ginibre::<f64, _>(3, 3, &mut Seed::new(1).rng())).into_mat();
        let p = TrigMatPoly::constant(c0.clone()).unwrap();
        for t in [0.0, 1.0, 4.0] {
            assert!((eval_trig(&p, t).as_mat() - &c0).norm() < 1e-15);
        }
    }

    #[test]
    fn analytic_at_origin() {
        let a =
            AnalyticMatPoly::new(vec![CMat::<f64>::identity(2, 2), CMat::identity(2, 2)]).unwrap();
        assert_eq!(
            eval_analytic(&a, Complex::new(0.0, 0.0)),
            CMat::identity(2, 2)
        );
    }

    #[test]
    fn horner_matches_naive_sum() {
        let mut rng = Seed::new(5).rng();
        let coeffs: Vec<CMat> = (0..5).map(|_| ginibre::<f64, _>(3, 3, &mut rng)).collect();
        let a = AnalyticMatPoly::new(coeffs.clone()).unwrap();
        for z in [
            Complex::new(0.3, -0.4),
            Complex::new(-0.9, 0.1),
            Complex::new(0.0, 1.0),
        ] {
            let mut naive = CMat::zeros(3, 3);
            for (k, ck) in coeffs.iter().enumerate() {
                naive += ck * z.powu(k as u32);
            }
            assert!((eval_analytic(&a, z) - naive).norm() < 1e-13);
        }
        let t = 0.7;
        let p = a.gram();
        let at = eval_analytic(&a, cis(t));
        assert!((eval_trig(&p, t).as_mat() - at.adjoint() * at).norm() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let mut rng = Seed::new(6).rng();
        let c1 = ginibre::<f64, _>(2, 2, &mut rng);
        let p = TrigMatPoly::new(vec![CMat::identity(2, 2) * c(5.0), c1]).unwrap();
        let s = trig_to_json(&p);
        assert!(s.contains("\"-1\"") && s.contains("\"N\":1"));
        assert_eq!(trig_from_json::<f64>(&s).unwrap(), p);
        // only the non-negative half
        let half = r#"{"d":1,"N":1,"coeffs":{"0":{"rows":1,"cols":1,"data":[[2,0]]},"1":{"rows":1,"cols":1,"data":[[1,0]]}}}"#;
        let q = trig_from_json::<f64>(half).unwrap();
        assert!((eval_trig(&q, 0.0).as_mat()[(0, 0)].re - 4.0).abs() < 1e-15);
        let bad = r#"{"d":1,"N":1,"coeffs":{"-1":{"rows":1,"cols":1,"data":[[3,0]]},"0":{"rows":1,"cols":1,"data":[[2,0]]},"1":{"rows":1,"cols":1,"data":[[1,0]]}}}"#;
        assert!(trig_from_json::<f64>(bad).is_err());
    }
}

//! Schatten p-norms and the Hölder / interpolation inequalities they satisfy.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{eigvals_herm, CMat};
use crate::scalar::Real;

/// Schatten exponent `p ∈ [1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchattenOrder<T: Real = f64> {
    Finite(T),
    Infinity,
}

impl<T: Real> SchattenOrder<T> {
    pub fn new(p: T) -> Result<Self> {
        if !(p >= T::one()) {
            return Err(Error::InvalidOrder(p.as_f64()));
        }
        if p.is_finite_val() {
            Ok(Self::Finite(p))
        } else {
            Ok(Self::Infinity)
        }
    }

    /// Order from its reciprocal; `0` maps to `∞`.
    pub fn from_inverse(inv: T) -> Result<Self> {
        if inv == T::zero() {
            Ok(Self::Infinity)
        } else {
            Self::new(T::one() / inv)
        }
    }

    pub fn one() -> Self {
        Self::Finite(T::one())
    }

    /// `1/p`, zero for `p = ∞`.
    pub fn inv(self) -> T {
        match self {
            Self::Finite(p) => T::one() / p,
            Self::Infinity => T::zero(),
        }
    }

    /// `p` as a scalar, `+∞` for the infinite order.
    pub fn value(self) -> T {
        match self {
            Self::Finite(p) => p,
            Self::Infinity => T::infinity(),
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Self::Infinity)
    }

    /// Hölder conjugate `p' = p/(p−1)`.
    pub fn conjugate(self) -> Self {
        match self {
            Self::Infinity => Self::one(),
            Self::Finite(p) if p == T::one() => Self::Infinity,
            Self::Finite(p) => Self::Finite(p / (p - T::one())),
        }
    }
}

impl<T: Real> fmt::Display for SchattenOrder<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(p) => write!(f, "{}", p.as_f64()),
            Self::Infinity => write!(f, "inf"),
        }
    }
}

impl<T: Real> Serialize for SchattenOrder<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Finite(p) => s.serialize_f64(p.as_f64()),
            Self::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de, T: Real> Deserialize<'de> for SchattenOrder<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let p = match Raw::deserialize(d)? {
            Raw::Num(p) => p,
            Raw::Text(t) => parse_order(&t).map_err(serde::de::Error::custom)?,
        };
        Self::new(T::of(p)).map_err(serde::de::Error::custom)
    }
}

/// Parses `"inf"`, `"∞"` or a number.
pub fn parse_order(text: &str) -> std::result::Result<f64, String> {
    match text.trim() {
        "inf" | "infinity" | "Inf" | "∞" => Ok(f64::INFINITY),
        t => t
            .parse::<f64>()
            .map_err(|e| format!("invalid order {t:?}: {e}")),
    }
}

/// `(Σ s_i^r)^{1/r}` for `r > 0` (a quasi-norm below 1), max for `r = ∞`.
///
/// Values are rescaled by their maximum before powering.
pub(crate) fn power_sum_norm<T: Real>(values: impl Iterator<Item = T> + Clone, inv_r: T) -> T {
    let smax = values.clone().fold(T::zero(), |a, b| a.max(b.abs()));
    if smax == T::zero() || inv_r == T::zero() {
        return smax;
    }
    let r = T::one() / inv_r;
    let sum = values.fold(T::zero(), |acc, s| acc + (s.abs() / smax).powf(r));
    smax * sum.powf(inv_r)
}

pub(crate) fn singular_values<T: Real>(x: &CMat<T>) -> Vec<T> {
    if x.nrows() == 0 || x.ncols() == 0 {
        return Vec::new();
    }
    x.clone().singular_values().iter().copied().collect()
}

/// `‖x‖_p = (Σ s_i^p)^{1/p}` over singular values; `p = ∞` gives the largest.
pub fn schatten_norm<T: Real>(x: &CMat<T>, p: SchattenOrder<T>) -> T {
    let s = singular_values(x);
    power_sum_norm(s.into_iter(), p.inv())
}

/// Schatten norm of a Hermitian matrix from its eigenvalues.
pub fn schatten_norm_herm<T: Real>(h: &CMat<T>, p: SchattenOrder<T>) -> T {
    let e = eigvals_herm(h);
    power_sum_norm(e.iter().copied(), p.inv())
}

/// Both sides of an inequality `lhs ≤ rhs`, with `margin = rhs − lhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Margin<T: Real = f64> {
    pub lhs: T,
    pub rhs: T,
    pub margin: T,
}

impl<T: Real> Margin<T> {
    pub fn new(lhs: T, rhs: T) -> Self {
        Self {
            lhs,
            rhs,
            margin: rhs - lhs,
        }
    }

    /// `margin ≥ −rel·max(|rhs|, floor)`.
    pub fn holds(&self, rel: T) -> bool {
        self.margin >= -rel * self.rhs.abs().max(T::of(1e-300))
    }
}

/// Hölder's inequality `‖xy‖_r ≤ ‖x‖_p‖y‖_q` with `1/r = 1/p + 1/q`.
pub fn holder_check<T: Real>(
    x: &CMat<T>,
    y: &CMat<T>,
    p: SchattenOrder<T>,
    q: SchattenOrder<T>,
) -> Result<Margin<T>> {
    if x.ncols() != y.nrows() {
        return Err(Error::Dimension(format!(
            "cannot multiply {}x{} by {}x{}",
            x.nrows(),
            x.ncols(),
            y.nrows(),
            y.ncols()
        )));
    }
    let inv_r = p.inv() + q.inv();
    let lhs = power_sum_norm(singular_values(&(x * y)).into_iter(), inv_r);
    let rhs = schatten_norm(x, p) * schatten_norm(y, q);
    Ok(Margin::new(lhs, rhs))
}

/// `‖x‖_{p_θ} ≤ ‖x‖_{p0}^{1−θ} ‖x‖_{p1}^θ` with `1/p_θ = (1−θ)/p0 + θ/p1`.
pub fn schatten_interp_check<T: Real>(
    x: &CMat<T>,
    p0: SchattenOrder<T>,
    p1: SchattenOrder<T>,
    theta: T,
) -> Result<Margin<T>> {
    if !(theta >= T::zero() && theta <= T::one()) {
        return Err(Error::InvalidArgument(format!(
            "theta {} outside [0, 1]",
            theta.as_f64()
        )));
    }
    let p_theta = interpolated_order(p0, p1, theta)?;
    let s = singular_values(x);
    let norm = |p: SchattenOrder<T>| power_sum_norm(s.iter().copied(), p.inv());
    let lhs = norm(p_theta);
    let rhs = norm(p0).powf(T::one() - theta) * norm(p1).powf(theta);
    Ok(Margin::new(lhs, rhs))
}

/// `p_θ` with `1/p_θ = (1−θ)/p0 + θ/p1`.
pub fn interpolated_order<T: Real>(
    p0: SchattenOrder<T>,
    p1: SchattenOrder<T>,
    theta: T,
) -> Result<SchattenOrder<T>> {
    SchattenOrder::from_inverse((T::one() - theta) * p0.inv() + theta * p1.inv())
}

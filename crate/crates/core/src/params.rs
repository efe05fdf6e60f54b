// SPDX-License-Identifier: Apache-2.0

//! Scalar knobs shared by the density, decomposition and approximation code.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// Exponent of the power mean, including the two limit cases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PValue {
    NegInf,
    Finite(f64),
    PosInf,
}

impl PValue {
    pub fn finite(p: f64) -> Result<Self> {
        if p.is_nan() {
            return Err(invalid("p is NaN"));
        }
        Ok(Self::from_f64(p))
    }

    /// Maps `f64::INFINITY`/`f64::NEG_INFINITY` to the limit variants.
    pub fn from_f64(p: f64) -> Self {
        if p == f64::INFINITY {
            PValue::PosInf
        } else if p == f64::NEG_INFINITY {
            PValue::NegInf
        } else {
            PValue::Finite(p)
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            PValue::NegInf => f64::NEG_INFINITY,
            PValue::PosInf => f64::INFINITY,
            PValue::Finite(p) => p,
        }
    }

    pub fn is_infinite(self) -> bool {
        !matches!(self, PValue::Finite(_))
    }
}

impl fmt::Display for PValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PValue::NegInf => f.write_str("neg_inf"),
            PValue::PosInf => f.write_str("inf"),
            PValue::Finite(p) => write!(f, "{p}"),
        }
    }
}

impl FromStr for PValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "neg_inf" | "-inf" | "-infinity" | "neginf" => Ok(PValue::NegInf),
            "inf" | "+inf" | "infinity" | "pos_inf" => Ok(PValue::PosInf),
            other => other
                .parse::<f64>()
                .map_err(|_| invalid(format!("cannot parse p value '{s}'")))
                .and_then(PValue::finite),
        }
    }
}

pub const DEFAULT_EPS: f64 = 1e-9;

/// Value that a delta involving a `0^p` term (p < 0) saturates to.
pub const DEFAULT_SATURATION: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub p: PValue,
    pub beta: f64,
    pub alpha: usize,
    /// Relative tolerance for floating comparisons.
    pub eps: f64,
    pub saturation: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            p: PValue::Finite(1.0),
            beta: 1.0,
            alpha: 10,
            eps: DEFAULT_EPS,
            saturation: DEFAULT_SATURATION,
        }
    }
}

impl Params {
    pub fn new(p: PValue, beta: f64) -> Self {
        Params { p, beta, ..Default::default() }
    }

    pub fn with_alpha(mut self, alpha: usize) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(invalid(format!("beta must be finite and >= 0, got {}", self.beta)));
        }
        if self.alpha < 1 {
            return Err(invalid("alpha must be >= 1"));
        }
        if !(self.eps > 0.0) {
            return Err(invalid(format!("eps must be > 0, got {}", self.eps)));
        }
        if !(self.saturation > 0.0) || !self.saturation.is_finite() {
            return Err(invalid("saturation sentinel must be finite and > 0"));
        }
        Ok(())
    }

    /// Absolute tolerance scaled to the magnitude of `x`.
    pub fn tol(&self, x: f64) -> f64 {
        self.eps * x.abs().max(1.0)
    }
}

//! Deterministic drift functions `alpha(t)`.
//!
//! The canonical representation is piecewise-constant (what curve fitting
//! produces); a general function hook falls back to adaptive quadrature.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{b_integral, b_kernel};
use crate::num::Real;
use crate::quad;

/// Absolute tolerance for quadrature fallbacks.
pub const QUAD_TOL: f64 = 1e-10;

/// Piecewise-constant function: `values[0]` on `(-inf, breakpoints[0])`,
/// `values[i]` on `[breakpoints[i-1], breakpoints[i])`, and the last value
/// beyond the last breakpoint. `values.len() == breakpoints.len() + 1`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiecewiseConstant<R> {
    pub breakpoints: Vec<R>,
    pub values: Vec<R>,
}

impl<R: Real> PiecewiseConstant<R> {
    pub fn new(breakpoints: Vec<R>, values: Vec<R>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::Config(
                "piecewise-constant function needs exactly breakpoints + 1 values".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "piecewise-constant breakpoints must be strictly increasing".into(),
            ));
        }
        if breakpoints.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("piecewise-constant function".into()));
        }
        Ok(Self { breakpoints, values })
    }

    pub fn constant(value: R) -> Self {
        Self { breakpoints: vec![], values: vec![value] }
    }

    pub fn value_at(&self, t: R) -> R {
        let idx = self.breakpoints.partition_point(|&b| b <= t);
        self.values[idx]
    }

    fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }

    /// Iterates the constant pieces of `[a, b]` as `(lo, hi, value)`.
    fn pieces(&self, a: R, b: R) -> impl Iterator<Item = (R, R, R)> + '_ {
        let mut cuts: Vec<R> = vec![a];
        cuts.extend(self.breakpoints.iter().copied().filter(|&x| x > a && x < b));
        cuts.push(b);
        cuts.windows(2)
            .map(|w| (w[0], w[1], self.value_at(w[0])))
            .collect::<Vec<_>>()
            .into_iter()
    }
}

/// Deterministic drift `alpha(t)` of the rate SDE.
#[derive(Clone)]
pub enum Drift<R> {
    PiecewiseConstant(PiecewiseConstant<R>),
    General(Arc<dyn Fn(R) -> R + Send + Sync>),
}

impl<R: Real> std::fmt::Debug for Drift<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Drift::PiecewiseConstant(pc) => f.debug_tuple("PiecewiseConstant").field(pc).finish(),
            Drift::General(_) => f.write_str("General(..)"),
        }
    }
}

impl<R: Real> Drift<R> {
    pub fn constant(value: R) -> Self {
        Drift::PiecewiseConstant(PiecewiseConstant::constant(value))
    }

    pub fn zero() -> Self {
        Self::constant(R::zero())
    }

    pub fn value_at(&self, t: R) -> R {
        match self {
            Drift::PiecewiseConstant(pc) => pc.value_at(t),
            Drift::General(f) => f(t),
        }
    }

    pub fn is_identically_zero(&self) -> bool {
        match self {
            Drift::PiecewiseConstant(pc) => pc.is_zero(),
            Drift::General(_) => false,
        }
    }

    /// `a(t, T) = int_t^T exp(beta (T - s)) alpha(s) ds`.
    pub fn convolved(&self, t: R, big_t: R, beta: R) -> Result<R> {
        debug_assert!(t <= big_t);
        match self {
            Drift::PiecewiseConstant(pc) => Ok(pc
                .pieces(t, big_t)
                .map(|(lo, hi, v)| v * (b_kernel(beta, big_t - lo) - b_kernel(beta, big_t - hi)))
                .sum()),
            Drift::General(f) => {
                quad::integrate(&|s| (beta * (big_t - s)).exp() * f(s), t, big_t, R::c(QUAD_TOL))
            }
        }
    }

    /// `A(t, T) = int_t^T a(t, u) du = int_t^T alpha(s) B(T - s) ds`.
    pub fn convolved_integral(&self, t: R, big_t: R, beta: R) -> Result<R> {
        debug_assert!(t <= big_t);
        match self {
            Drift::PiecewiseConstant(pc) => Ok(pc
                .pieces(t, big_t)
                .map(|(lo, hi, v)| v * (b_integral(beta, big_t - lo) - b_integral(beta, big_t - hi)))
                .sum()),
            Drift::General(f) => {
                quad::integrate(&|s| f(s) * b_kernel(beta, big_t - s), t, big_t, R::c(QUAD_TOL))
            }
        }
    }
}

//! Exhaustion functions and the ζ₀ reduction between two of them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{AmbientSpace, Point};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExhaustionFunction {
    EuclideanNorm,
    MatrixMaxColumnNorm,
    PuncturedTau,
    DiscPlaneTau,
}

impl ExhaustionFunction {
    pub fn name(&self) -> &'static str {
        match self {
            ExhaustionFunction::EuclideanNorm => "euclidean-norm",
            ExhaustionFunction::MatrixMaxColumnNorm => "matrix-max-column-norm",
            ExhaustionFunction::PuncturedTau => "punctured-tau",
            ExhaustionFunction::DiscPlaneTau => "disc-plane-tau",
        }
    }

    pub fn compatible(&self, ambient: AmbientSpace) -> bool {
        use AmbientSpace::*;
        match self {
            ExhaustionFunction::EuclideanNorm => !matches!(ambient, SLn(_)),
            ExhaustionFunction::MatrixMaxColumnNorm => matches!(ambient, SLn(_)),
            ExhaustionFunction::PuncturedTau => matches!(ambient, PuncturedCn(_)),
            ExhaustionFunction::DiscPlaneTau => matches!(ambient, DiscTimesC),
        }
    }
}

pub fn exhaust_eval(rho: ExhaustionFunction, p: &Point, ambient: AmbientSpace) -> Result<f64> {
    if !rho.compatible(ambient) {
        return Err(Error::AmbientMismatch(format!("{} on {}", rho.name(), ambient.tag())));
    }
    ambient.validate(p)?;
    Ok(match (rho, p) {
        (ExhaustionFunction::MatrixMaxColumnNorm, Point::Matrix(m)) => m.max_column_norm(),
        (ExhaustionFunction::EuclideanNorm, Point::Vector(v)) => v.norm(),
        (ExhaustionFunction::PuncturedTau, Point::Vector(v)) => punctured_tau(v.norm()),
        (ExhaustionFunction::DiscPlaneTau, Point::Vector(v)) => disc_plane_tau(v.get(0).norm(), v.get(1).norm()),
        _ => return Err(Error::AmbientMismatch("point kind does not match exhaustion".into())),
    })
}

pub fn punctured_tau(norm: f64) -> f64 {
    norm.max(1.0 / norm)
}

pub fn disc_plane_tau(z_abs: f64, w_abs: f64) -> f64 {
    w_abs + 1.0 / (1.0 - z_abs)
}

/// Height values ζ(x) indexed by point position.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeightAssignment {
    values: Vec<f64>,
}

impl HeightAssignment {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::BadParams("heights must be finite and positive".into()));
        }
        Ok(HeightAssignment { values })
    }

    pub fn constant(len: usize, value: f64) -> Result<Self> {
        HeightAssignment::new(vec![value; len])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Closed-form bound for sup{ρ(p) : τ(p) < ζ}, or `None` when the sublevel set is empty.
fn sublevel_sup(rho: ExhaustionFunction, tau: ExhaustionFunction, zeta: f64) -> Result<Option<f64>> {
    use ExhaustionFunction::*;
    let unsupported = || Error::UnsupportedPair { rho: rho.name().into(), tau: tau.name().into() };
    Ok(match (rho, tau) {
        (EuclideanNorm, EuclideanNorm)
        | (MatrixMaxColumnNorm, MatrixMaxColumnNorm)
        | (PuncturedTau, PuncturedTau)
        | (DiscPlaneTau, DiscPlaneTau) => Some(zeta),
        // {τ < ζ} = {1/ζ < ‖x‖ < ζ}, empty when ζ ≤ 1
        (EuclideanNorm, PuncturedTau) => (zeta > 1.0).then_some(zeta),
        // |w| < ζ − 1 and |z| < 1 on {τ < ζ}; empty when ζ ≤ 1
        (EuclideanNorm, DiscPlaneTau) => (zeta > 1.0).then(|| (1.0 + (zeta - 1.0).powi(2)).sqrt()),
        _ => return Err(unsupported()),
    })
}

pub fn zeta0_reduce(
    zeta: &HeightAssignment,
    rho: ExhaustionFunction,
    tau: ExhaustionFunction,
    ambient: AmbientSpace,
) -> Result<HeightAssignment> {
    if !rho.compatible(ambient) || !tau.compatible(ambient) {
        return Err(Error::AmbientMismatch(format!("{}/{} on {}", rho.name(), tau.name(), ambient.tag())));
    }
    let values = zeta
        .values()
        .iter()
        .map(|&z| sublevel_sup(rho, tau, z).map(|s| s.unwrap_or(0.0) + 1.0))
        .collect::<Result<Vec<_>>>()?;
    HeightAssignment::new(values)
}

//! ℂⁿ∖{0}: bi-Lipschitz control of origin-fixing automorphisms near the puncture, the
//! transfer of tameness from ℂⁿ, and the no-threshold witness.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::automorphism::AutomorphismRep;
use crate::checks::{discreteness_check, Verdict};
use crate::cn_tame::{rr_series_test, ShearAut, TailPolicy};
use crate::error::{Error, Result};
use crate::exhaustion::punctured_tau;
use crate::linalg::{c, CVector};
use crate::poly::Polynomial;
use crate::rng::{haar_unitary, unit_vector, SeedStream};
use crate::space::{AmbientSpace, DiscreteSequence};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiLipschitzReport {
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    pub radius: f64,
    pub samples: usize,
}

/// Number of dyadic shells below the one containing the radius.
pub const SHELLS: i32 = 41;

/// Ratios ‖φ(v)‖/‖v‖ over the punctured ball of the given radius.
///
/// Shell j holds norms in (2^{-j-1}, 2^{-j}] and draws from its own fork of the seed, so the
/// sample for a smaller radius is a subset of the sample for a larger one.
pub fn bilipschitz_estimate(
    phi: &AutomorphismRep,
    n: usize,
    radius: f64,
    per_shell: usize,
    seed: &SeedStream,
) -> Result<BiLipschitzReport> {
    if !(radius > 0.0 && radius.is_finite()) || n == 0 || per_shell == 0 {
        return Err(Error::BadParams(format!("radius {radius}, n {n}, {per_shell} samples per shell")));
    }
    let at0 = phi.apply_vector(&CVector::zeros(n))?.norm();
    if at0 > 1e-10 {
        return Err(Error::NotOriginFixing(at0));
    }
    let top = -(radius.log2().ceil() as i32);
    let (mut c1, mut c2, mut used) = (f64::INFINITY, 0.0f64, 0usize);
    for j in top..top + SHELLS {
        let mut rng = seed.fork("shell").fork_index(j as i64 as u64).rng();
        let (lo, hi) = (2f64.powi(-j - 1), 2f64.powi(-j));
        for _ in 0..per_shell {
            let r = hi - rng.gen::<f64>() * (hi - lo);
            let v = unit_vector(n, &mut rng).scale(c(r, 0.0));
            let norm = v.norm();
            if norm == 0.0 || norm >= radius {
                continue;
            }
            let ratio = phi.apply_vector(&v)?.norm() / norm;
            c1 = c1.min(ratio);
            c2 = c2.max(ratio);
            used += 1;
        }
    }
    if used == 0 {
        return Err(Error::Empty);
    }
    Ok(BiLipschitzReport { c1, c2, radius, samples: used })
}

pub fn punctured_tame_check(d: &DiscreteSequence, min_gap: f64) -> Result<Verdict> {
    let n = match d.ambient() {
        AmbientSpace::PuncturedCn(n) | AmbientSpace::Cn(n) => n,
        other => return Err(Error::AmbientMismatch(format!("punctured check on {}", other.tag()))),
    };
    let pts = d.vectors()?;
    let near: Vec<usize> = pts.iter().enumerate().filter(|(_, v)| v.norm() < min_gap).map(|(i, _)| i).collect();
    if let Some(&first) = near.first() {
        return Ok(Verdict::violated(
            near.clone(),
            format!("point {first} has norm {:e} < {min_gap:e}; the prefix approaches the puncture", pts[first].norm()),
        ));
    }
    let as_cn = DiscreteSequence::new(AmbientSpace::Cn(n), d.points().to_vec(), d.generator().cloned())?;
    let disc = discreteness_check(&as_cn, min_gap)?;
    if disc.is_violated() {
        return Ok(disc);
    }
    Ok(rr_series_test(&as_cn, TailPolicy::MonotoneTailBound)?.verdict)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoThresholdReport {
    /// 1-based index k of the first γ_k with τ(φ(γ_k)) < ζ(γ_k).
    pub first_failure_index: usize,
    #[serde(rename = "C1")]
    pub c1: f64,
    pub zeta: Vec<f64>,
    pub tau_values: Vec<f64>,
}

/// Shows that φ cannot push γ_k above ζ(γ_k) = (k+1)/‖γ_k‖ for all k.
pub fn no_threshold_witness(gamma: &[CVector], phi: &AutomorphismRep, seed: &SeedStream) -> Result<NoThresholdReport> {
    let first = gamma.first().ok_or(Error::Empty)?;
    let n = first.dim();
    let norms: Vec<f64> = gamma.iter().map(|v| v.norm()).collect();
    if let Some(i) = norms.iter().position(|&r| r == 0.0) {
        return Err(Error::ZeroPoint(i));
    }
    if norms.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::BadParams("prefix norms must decrease strictly".into()));
    }
    let c1 = bilipschitz_estimate(phi, n, norms[0] * (1.0 + 1e-12), 64, seed)?.c1;
    let start = ((1.0 / c1).ceil() as usize).max(1);
    let zeta: Vec<f64> = norms.iter().enumerate().map(|(i, r)| (i + 2) as f64 / r).collect();
    let tau_values: Vec<f64> = gamma
        .iter()
        .map(|v| phi.apply_vector(v).map(|w| punctured_tau(w.norm())))
        .collect::<Result<_>>()?;
    if gamma.len() < start {
        return Err(Error::InconclusivePrefix(format!("prefix of length {} ends before index {start} = ceil(1/C1)", gamma.len())));
    }
    let hit = (start..=gamma.len()).find(|&k| tau_values[k - 1] < zeta[k - 1]);
    match hit {
        Some(k) => Ok(NoThresholdReport { first_failure_index: k, c1, zeta, tau_values }),
        None => Err(Error::InconclusivePrefix(format!("no failure among indices {start}..={}", gamma.len()))),
    }
}

impl NoThresholdReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// γ_k = 2^{-k}·e₁ for k = 1..len.
pub fn dyadic_gamma(n: usize, len: usize) -> Vec<CVector> {
    (1..=len).map(|k| CVector::basis(n, 0).scale(c(0.5f64.powi(k as i32), 0.0))).collect()
}

pub const ORIGIN_FIXING_FAMILIES: [&str; 5] = ["identity", "scalar", "unitary", "shear", "composite"];

/// Origin-fixing automorphisms of ℂⁿ (n ≥ 2) used by the witness and the CLI.
pub fn origin_fixing_family(name: &str, n: usize, scale: f64, seed: &SeedStream) -> Result<AutomorphismRep> {
    if n < 2 {
        return Err(Error::DimensionMismatch("origin-fixing families need n >= 2".into()));
    }
    let square = || ShearAut::new(1, 0, Polynomial::from_real_coeffs(&[0.0, 0.0, 1.0]));
    Ok(match name {
        "identity" => AutomorphismRep::Identity,
        "scalar" => {
            if !(scale.is_finite() && scale != 0.0) {
                return Err(Error::BadParams(format!("scalar {scale}")));
            }
            AutomorphismRep::scalar(n, c(scale, 0.0))
        }
        "unitary" => AutomorphismRep::Linear { matrix: haar_unitary(n, &mut seed.fork("unitary").rng()) },
        "shear" => AutomorphismRep::Shear(square()?),
        "composite" => AutomorphismRep::Linear { matrix: haar_unitary(n, &mut seed.fork("unitary").rng()) }
            .then(AutomorphismRep::Shear(square()?))
            .then(AutomorphismRep::scalar(n, c(scale, 0.0))),
        other => return Err(Error::UnknownFamily(other.to_string())),
    })
}

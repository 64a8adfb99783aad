//! ℂⁿ: the Rosay–Rudin series test, shears, and pushing a finite prefix to prescribed heights.

use serde::{Deserialize, Serialize};

use crate::automorphism::AutomorphismRep;
use crate::checks::{first_close_pair, Verdict};
use crate::error::{Error, Result};
use crate::exhaustion::HeightAssignment;
use crate::linalg::{c, CVector, C64};
use crate::poly::{interpolate_nodes, Polynomial};
use crate::rng::{haar_unitary, SeedStream};
use crate::space::{AmbientSpace, DiscreteSequence};

/// z ↦ z with z[axis] replaced by z[axis] + f(z[driven_by]); indices are 0-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShearAut {
    pub axis: usize,
    pub driven_by: usize,
    pub f: Polynomial,
}

impl ShearAut {
    pub fn new(axis: usize, driven_by: usize, f: Polynomial) -> Result<Self> {
        if axis == driven_by {
            return Err(Error::BadParams("shear axis must differ from its driving coordinate".into()));
        }
        f.validate()?;
        Ok(ShearAut { axis, driven_by, f })
    }

    pub fn inverse(&self) -> ShearAut {
        ShearAut { axis: self.axis, driven_by: self.driven_by, f: self.f.neg() }
    }
}

pub fn shear_apply(s: &ShearAut, z: &CVector) -> Result<CVector> {
    let n = z.dim();
    if n < 2 || s.axis >= n || s.driven_by >= n {
        return Err(Error::DimensionMismatch(format!("shear ({}, {}) on dimension {n}", s.axis, s.driven_by)));
    }
    let mut out = z.clone().into_entries();
    out[s.axis] += s.f.eval(z.get(s.driven_by));
    CVector::new(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailPolicy {
    PartialOnly,
    MonotoneTailBound,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RrSeriesReport {
    pub partial_sum: f64,
    pub exponent: u32,
    pub verdict: Verdict,
    pub tail_bound: Option<f64>,
    /// Indices of points with ‖v‖ ≤ 1, which carry no information about growth.
    pub unusable: Vec<usize>,
}

#[derive(Serialize)]
struct RrSeriesJson<'a> {
    partial_sum: f64,
    exponent: u32,
    verdict: &'static str,
    tail_bound: Option<f64>,
    detail: &'a str,
    unusable: &'a [usize],
}

impl RrSeriesReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(RrSeriesJson {
            partial_sum: self.partial_sum,
            exponent: self.exponent,
            verdict: self.verdict.label(),
            tail_bound: self.tail_bound,
            detail: &self.verdict.detail,
            unusable: &self.unusable,
        })
        .expect("report serializes")
    }
}

/// Declared growth ‖v_k‖ ≥ c·k^α (k counted from 1) read from generator parameters.
pub fn declared_growth(d: &DiscreteSequence) -> Option<(f64, f64)> {
    let g = d.generator()?;
    let (cc, alpha) = (g.param("growth_c")?, g.param("growth_alpha")?);
    (cc > 0.0 && alpha > 0.0 && cc.is_finite() && alpha.is_finite()).then_some((cc, alpha))
}

pub fn rr_series_test(d: &DiscreteSequence, policy: TailPolicy) -> Result<RrSeriesReport> {
    let n = match d.ambient() {
        AmbientSpace::Cn(n) | AmbientSpace::PuncturedCn(n) => n,
        other => return Err(Error::AmbientMismatch(format!("series test on {}", other.tag()))),
    };
    let p = 2 * n as u32 - 1;
    let mut sum = 0.0f64;
    let mut unusable = Vec::new();
    let mut norms = Vec::with_capacity(d.len());
    for (i, v) in d.vectors()?.into_iter().enumerate() {
        let r = v.norm();
        if r == 0.0 {
            return Err(Error::ZeroPoint(i));
        }
        if r <= 1.0 {
            unusable.push(i);
        }
        sum += r.powi(-(p as i32));
        norms.push(r);
    }
    let len = d.len();
    let mut tail_bound = None;
    let verdict = match (policy, declared_growth(d)) {
        (TailPolicy::MonotoneTailBound, Some((cc, alpha))) => {
            let contradicted = norms
                .iter()
                .enumerate()
                .find(|(i, &r)| r < cc * ((i + 1) as f64).powf(alpha) * (1.0 - 1e-12));
            if let Some((i, _)) = contradicted {
                Verdict::consistent(format!("declared growth contradicted at index {i}; partial sum {sum}"))
            } else if alpha * p as f64 > 1.0 && len > 0 {
                let e = alpha * p as f64;
                let bound = cc.powf(-(p as f64)) * (len as f64).powf(1.0 - e) / (e - 1.0);
                tail_bound = Some(bound);
                Verdict::certified("rr-series", format!("partial sum {sum} over {len} terms, tail <= {bound:e}"))
            } else {
                Verdict::consistent(format!("declared exponent alpha*(2n-1) = {} does not exceed 1", alpha * p as f64))
            }
        }
        _ => Verdict::consistent(format!("partial sum {sum} over {len} terms")),
    };
    Ok(RrSeriesReport { partial_sum: sum, exponent: p, verdict, tail_bound, unusable })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PushProof {
    pub achieved: Vec<f64>,
    pub required: Vec<f64>,
    pub unitary_tries: usize,
    pub interpolation_center_scale: Option<(C64, f64)>,
}

pub const PUSH_TRIES: usize = 64;

/// Unitary rotation followed by a shear of coordinate 2 driven by coordinate 1 so that
/// ‖φ(x)‖ ≥ ζ(x) on the prefix.
pub fn push_prefix_cn(
    d: &DiscreteSequence,
    zeta: &HeightAssignment,
    seed: SeedStream,
    distinct_tol: f64,
) -> Result<(AutomorphismRep, PushProof)> {
    let n = match d.ambient() {
        AmbientSpace::Cn(n) => n,
        other => return Err(Error::AmbientMismatch(format!("push on {}", other.tag()))),
    };
    if n < 2 {
        return Err(Error::DimensionMismatch("push needs n >= 2".into()));
    }
    if zeta.len() != d.len() {
        return Err(Error::DimensionMismatch("one height per point".into()));
    }
    let pts = d.vectors()?;
    let norms: Vec<f64> = pts.iter().map(|v| v.norm()).collect();
    if norms.iter().zip(zeta.values()).all(|(r, z)| r >= z) {
        let proof = PushProof { achieved: norms, required: zeta.values().to_vec(), unitary_tries: 0, interpolation_center_scale: None };
        return Ok((AutomorphismRep::Identity, proof));
    }
    for attempt in 0..PUSH_TRIES {
        let mut rng = seed.fork("push-unitary").fork_index(attempt as u64).rng();
        let u = haar_unitary(n, &mut rng);
        let rotated: Vec<CVector> = pts.iter().map(|v| u.mul_vec(v)).collect();
        let firsts: Vec<Vec<C64>> = rotated.iter().map(|y| vec![y.get(0)]).collect();
        if first_close_pair(&firsts, distinct_tol).is_some() {
            continue;
        }
        let nodes: Vec<(C64, C64)> = rotated
            .iter()
            .zip(zeta.values())
            .zip(&norms)
            .map(|((y, &z), &r)| {
                let t = if r >= z {
                    c(0.0, 0.0)
                } else {
                    let w = y.get(1);
                    let dir = if w.norm() > 0.0 { w / w.norm() } else { c(1.0, 0.0) };
                    dir * (2.0 * z)
                };
                (y.get(0), t)
            })
            .collect();
        let f = match interpolate_nodes(&nodes, distinct_tol) {
            Ok(f) => f,
            Err(Error::InterpolationIllConditioned(_)) => continue,
            Err(e) => return Err(e),
        };
        let shear = ShearAut::new(1, 0, f)?;
        let phi = AutomorphismRep::Composite {
            parts: vec![AutomorphismRep::Linear { matrix: u }, AutomorphismRep::Shear(shear)],
        };
        let achieved: Vec<f64> = pts
            .iter()
            .map(|v| phi.apply_vector(v).map(|w| w.norm()))
            .collect::<Result<_>>()?;
        if achieved.iter().zip(zeta.values()).all(|(a, z)| a >= z) {
            let proof = PushProof {
                achieved,
                required: zeta.values().to_vec(),
                unitary_tries: attempt + 1,
                interpolation_center_scale: None,
            };
            return Ok((phi, proof));
        }
    }
    Err(Error::DegenerateConfiguration(format!(
        "no unitary among {PUSH_TRIES} tries separates first coordinates by {distinct_tol:e}"
    )))
}

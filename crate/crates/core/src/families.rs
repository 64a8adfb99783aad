//! Named sequence families behind `tamelab gen`.

use crate::disc_plane::BOUNDARY_FLAG;
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector, SLMatrix, C64};
use crate::space::{AmbientSpace, DiscreteSequence, Generator};

/// v_k = (k^α, 0, …, 0) for k = 1..=len, with the growth declared in the generator.
pub fn cn_powers(n: usize, alpha: f64, len: usize) -> Result<DiscreteSequence> {
    if n == 0 || len == 0 || !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::BadParams(format!("n {n}, alpha {alpha}, length {len}")));
    }
    let pts = (1..=len)
        .map(|k| {
            let mut v = vec![C64::new(0.0, 0.0); n];
            v[0] = c((k as f64).powf(alpha), 0.0);
            CVector::new(v)
        })
        .collect::<Result<Vec<_>>>()?;
    let g = Generator::new("cn-powers").with("growth_c", 1.0).with("growth_alpha", alpha);
    DiscreteSequence::from_vectors(AmbientSpace::Cn(n), pts, Some(g))
}

/// diag(t, t², …, t^{n−1}, t^{−n(n−1)/2}) with t = 1 + k, k = 1..=len.
pub fn diagtorus(n: usize, len: usize) -> Result<DiscreteSequence> {
    if n < 2 || len == 0 {
        return Err(Error::BadParams(format!("n {n}, length {len}")));
    }
    let mats = (1..=len)
        .map(|k| {
            let t = 1.0 + k as f64;
            let mut d: Vec<C64> = (1..n).map(|i| c(t.powi(i as i32), 0.0)).collect();
            d.push(c(t.powi(-((n * (n - 1) / 2) as i32)), 0.0));
            SLMatrix::new(CMatrix::diag(&d))
        })
        .collect::<Result<Vec<_>>>()?;
    DiscreteSequence::from_matrices(mats, Some(Generator::new("diagtorus").with("n", n as f64)))
}

/// γ_k = 2^{−k}·e₁ in ℂⁿ∖{0}, accumulating at the puncture.
pub fn punctured_accumulate(n: usize, len: usize) -> Result<DiscreteSequence> {
    if n < 2 || len == 0 || len > 1000 {
        return Err(Error::BadParams(format!("n {n}, length {len}")));
    }
    let pts = crate::punctured::dyadic_gamma(n, len);
    DiscreteSequence::from_vectors(AmbientSpace::PuncturedCn(n), pts, Some(Generator::new("punctured-accumulate")))
}

pub const BOUNDARY_MAX_LEN: usize = 36;

pub const DISCPLANE_VARIANTS: [&str; 3] = ["constant", "boundary", "interior"];

/// Points of Δ×ℂ whose base is constant (0, k), tends to the boundary (1 − 2^{−k}, 0), or
/// accumulates inside the disc (1/(k + 2), 0).
pub fn discplane_base(variant: &str, len: usize) -> Result<DiscreteSequence> {
    if len == 0 {
        return Err(Error::BadParams("length must be positive".into()));
    }
    let (pts, g): (Vec<(f64, f64)>, Generator) = match variant {
        "constant" => ((1..=len).map(|k| (0.0, k as f64)).collect(), Generator::new("discplane-base")),
        "boundary" => {
            // consecutive bases are 2^{-k-1} apart and must stay above the 1e-12 fiber tolerance
            if len > BOUNDARY_MAX_LEN {
                return Err(Error::BadParams(format!("boundary variant is limited to {BOUNDARY_MAX_LEN} points")));
            }
            ((1..=len).map(|k| (1.0 - 0.5f64.powi(k as i32), 0.0)).collect(), Generator::new("discplane-base").with(BOUNDARY_FLAG, 1.0))
        }
        "interior" => ((1..=len).map(|k| (1.0 / (k as f64 + 2.0), 0.0)).collect(), Generator::new("discplane-base")),
        other => return Err(Error::BadParams(format!("unknown disc-plane variant {other}"))),
    };
    let vs = pts.iter().map(|&(z, w)| CVector::from_reals(&[z, w])).collect::<Result<Vec<_>>>()?;
    DiscreteSequence::from_vectors(AmbientSpace::DiscTimesC, vs, Some(g))
}

//! Δ×ℂ: the automorphisms (z, w) ↦ (φ(z), f(z)w + g(z)), the boundary classifier,
//! the non-tame height bound, and Poincaré distance signatures.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::checks::{fiber_tol, for_close_pairs, group_fibers, Verdict};
use crate::error::{Error, Result};
use crate::linalg::{c, is_finite, C64};
use crate::poly::Polynomial;
use crate::space::{AmbientSpace, DiscreteSequence};

/// z ↦ e^{iθ}(z − α)/(1 − ᾱz).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoebiusDisc {
    pub theta: f64,
    pub alpha: C64,
}

impl MoebiusDisc {
    pub fn new(theta: f64, alpha: C64) -> Result<Self> {
        if !theta.is_finite() || !is_finite(alpha) {
            return Err(Error::NonFinite("moebius parameters"));
        }
        if alpha.norm() >= 1.0 - 1e-12 {
            return Err(Error::BadParams(format!("|alpha| = {} must be < 1", alpha.norm())));
        }
        Ok(MoebiusDisc { theta, alpha })
    }

    pub fn identity() -> Self {
        MoebiusDisc { theta: 0.0, alpha: c(0.0, 0.0) }
    }

    pub fn is_identity(&self) -> bool {
        self.theta == 0.0 && self.alpha == c(0.0, 0.0)
    }

    pub fn apply(&self, z: C64) -> C64 {
        if self.is_identity() {
            return z;
        }
        c(0.0, self.theta).exp() * (z - self.alpha) / (c(1.0, 0.0) - self.alpha.conj() * z)
    }

    pub fn inverse(&self) -> MoebiusDisc {
        if self.is_identity() {
            return *self;
        }
        MoebiusDisc { theta: -self.theta, alpha: -(c(0.0, self.theta).exp() * self.alpha) }
    }

    /// self ∘ other, through the matrix [[e^{iθ}, −e^{iθ}α], [−ᾱ, 1]].
    pub fn compose(&self, other: &MoebiusDisc) -> MoebiusDisc {
        if self.is_identity() {
            return *other;
        }
        if other.is_identity() {
            return *self;
        }
        let m = |m: &MoebiusDisc| {
            let u = c(0.0, m.theta).exp();
            [u, -u * m.alpha, -m.alpha.conj(), c(1.0, 0.0)]
        };
        let (a, b) = (m(self), m(other));
        let p = a[0] * b[0] + a[1] * b[2];
        let q = a[0] * b[1] + a[1] * b[3];
        let s = a[2] * b[1] + a[3] * b[3];
        let u = p / s;
        MoebiusDisc { theta: u.arg(), alpha: -q / p }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscPlaneAut {
    pub phi: MoebiusDisc,
    pub logf: Polynomial,
    pub g: Polynomial,
}

impl DiscPlaneAut {
    pub fn identity() -> Self {
        DiscPlaneAut { phi: MoebiusDisc::identity(), logf: Polynomial::zero(), g: Polynomial::zero() }
    }

    pub fn new(phi: MoebiusDisc, logf: Polynomial, g: Polynomial) -> Result<Self> {
        logf.validate()?;
        g.validate()?;
        Ok(DiscPlaneAut { phi, logf, g })
    }

    pub fn f(&self, z: C64) -> C64 {
        self.logf.eval(z).exp()
    }
}

fn check_disc(z: C64) -> Result<()> {
    if !is_finite(z) {
        return Err(Error::NonFinite("disc coordinate"));
    }
    if z.norm() >= 1.0 {
        return Err(Error::PointOutsideAmbient(format!("|z| = {} is not < 1", z.norm())));
    }
    Ok(())
}

pub fn dp_apply(a: &DiscPlaneAut, p: (C64, C64)) -> Result<(C64, C64)> {
    let (z, w) = p;
    check_disc(z)?;
    let z2 = a.phi.apply(z);
    if z2.norm() >= 1.0 {
        // only reachable through rounding at |z| ≈ 1
        return Err(Error::PointOutsideAmbient(format!("image |z'| = {} is not < 1", z2.norm())));
    }
    Ok((z2, a.f(z) * w + a.g.eval(z)))
}

/// Radius of the circle on which non-polynomial parts are resampled.
pub const FIT_RADIUS: f64 = 0.999;
const FIT_MAX_POINTS: usize = 2048;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DpResult {
    pub aut: DiscPlaneAut,
    pub exact: bool,
    /// Max deviation from the true composite over the test points (0 when exact).
    pub residual: f64,
}

/// Polynomial fit to a function holomorphic near the closed disc of radius `FIT_RADIUS`,
/// by the discrete Fourier transform on that circle. Doubles the sample count until the
/// fit reproduces the function on an interleaved circle.
fn fit_on_circle(h: &dyn Fn(C64) -> C64) -> Polynomial {
    let mut m = 32;
    let mut best = Polynomial::zero();
    while m <= FIT_MAX_POINTS {
        let roots: Vec<C64> = (0..m).map(|k| c(0.0, 2.0 * PI * k as f64 / m as f64).exp()).collect();
        let vals: Vec<C64> = roots.iter().map(|w| h(w * FIT_RADIUS)).collect();
        let scale = vals.iter().fold(1.0f64, |s, v| s.max(v.norm()));
        let coeffs: Vec<C64> = (0..m)
            .map(|j| {
                let s: C64 = (0..m).map(|k| vals[k] * roots[(j * k) % m].conj()).sum();
                s / m as f64 / FIT_RADIUS.powi(j as i32)
            })
            .collect();
        best = Polynomial::from_coeffs(coeffs);
        let err = (0..m)
            .map(|k| {
                let z = c(0.0, PI * (2 * k + 1) as f64 / m as f64).exp() * FIT_RADIUS;
                (best.eval(z) - h(z)).norm()
            })
            .fold(0.0, f64::max);
        if err <= 1e-12 * scale {
            break;
        }
        m *= 2;
    }
    best
}

/// 200 fixed probe points on a spiral inside the disc of radius `FIT_RADIUS`.
pub fn residual_probes() -> Vec<C64> {
    (0..200)
        .map(|i| {
            let r = FIT_RADIUS * ((i as f64 + 0.5) / 200.0).sqrt();
            c(0.0, 2.399963229728653 * i as f64).exp() * r
        })
        .collect()
}

fn residual(approx: &DiscPlaneAut, truth: &dyn Fn(C64, C64) -> Result<(C64, C64)>) -> Result<f64> {
    let mut worst = 0.0f64;
    for z in residual_probes() {
        for w in [c(0.0, 0.0), c(1.0, 0.0)] {
            let (za, wa) = dp_apply(approx, (z, w))?;
            let (zt, wt) = truth(z, w)?;
            let scale = 1.0f64.max(wt.norm());
            worst = worst.max((za - zt).norm()).max((wa - wt).norm() / scale);
        }
    }
    Ok(worst)
}

/// a ∘ b (b applied first).
pub fn dp_compose(a: &DiscPlaneAut, b: &DiscPlaneAut) -> Result<DpResult> {
    let phi = a.phi.compose(&b.phi);
    if b.phi.is_identity() {
        if let Some(k) = a.logf.constant_value() {
            // log f = log f_a + log f_b, g = g_a + f_a·g_b with f_a constant
            let logf = a.logf.add(&b.logf);
            let g = a.g.add(&b.g.scaled(k.exp()));
            return Ok(DpResult { aut: DiscPlaneAut { phi, logf, g }, exact: true, residual: 0.0 });
        }
    }
    let logf = fit_on_circle(&|z| {
        let u = b.phi.apply(z);
        a.logf.eval(u) + b.logf.eval(z)
    });
    let g = fit_on_circle(&|z| {
        let u = b.phi.apply(z);
        a.f(u) * b.g.eval(z) + a.g.eval(u)
    });
    let aut = DiscPlaneAut { phi, logf, g };
    let res = residual(&aut, &|z, w| dp_apply(a, dp_apply(b, (z, w))?))?;
    Ok(DpResult { aut, exact: false, residual: res })
}

/// (φ⁻¹, 1/(f∘φ⁻¹), −(g∘φ⁻¹)/(f∘φ⁻¹)).
pub fn dp_inverse(a: &DiscPlaneAut) -> Result<DpResult> {
    let phi = a.phi.inverse();
    if a.phi.is_identity() {
        if let Some(k) = a.logf.constant_value() {
            let aut = DiscPlaneAut { phi, logf: a.logf.neg(), g: a.g.scaled(-(-k).exp()) };
            return Ok(DpResult { aut, exact: true, residual: 0.0 });
        }
    }
    let logf = fit_on_circle(&|z| -a.logf.eval(phi.apply(z)));
    let g = fit_on_circle(&|z| {
        let u = phi.apply(z);
        -a.g.eval(u) * (-a.logf.eval(u)).exp()
    });
    let aut = DiscPlaneAut { phi, logf, g };
    // check a⁻¹ ∘ a = id on the probes
    let res = residual(&aut, &|z, w| {
        let z0 = phi.apply(z);
        Ok((z0, (w - a.g.eval(z0)) / a.f(z0)))
    })?;
    Ok(DpResult { aut, exact: false, residual: res })
}

/// Generator flag declaring |z_k| → 1 monotonically.
pub const BOUNDARY_FLAG: &str = "boundary_monotone";

pub fn dp_classify(d: &DiscreteSequence, min_gap_disc: f64, max_fiber: usize) -> Result<Verdict> {
    if d.ambient() != AmbientSpace::DiscTimesC {
        return Err(Error::AmbientMismatch(format!("disc-plane classifier on {}", d.ambient().tag())));
    }
    if d.is_empty() {
        return Err(Error::Empty);
    }
    if !(min_gap_disc > 0.0) {
        return Err(Error::BadParams("minGapDisc must be positive".into()));
    }
    let vs = d.vectors()?;
    let base: Vec<Vec<C64>> = vs.iter().map(|v| vec![v.get(0)]).collect();
    let fibers = group_fibers(&base, fiber_tol(&base));
    if let Some(big) = fibers.iter().find(|f| f.len() > max_fiber) {
        return Ok(Verdict::violated(big.clone(), format!("fiber of size {} over z = {}", big.len(), base[big[0]][0])));
    }
    let reps: Vec<usize> = fibers.iter().map(|f| f[0]).collect();
    let rep_base: Vec<Vec<C64>> = reps.iter().map(|&i| base[i].clone()).collect();
    let interior = |z: C64| 1.0 - z.norm() > 10.0 * min_gap_disc;
    let mut first: Option<(usize, usize, f64)> = None;
    for_close_pairs(&rep_base, min_gap_disc, |a, b, dist| {
        let (i, j) = (reps[a].min(reps[b]), reps[a].max(reps[b]));
        if interior(base[i][0]) && interior(base[j][0]) && first.map_or(true, |(fi, fj, _)| (j, i) < (fj, fi)) {
            first = Some((i, j, dist));
        }
    });
    if let Some((i, j, dist)) = first {
        return Ok(Verdict::violated(vec![i, j], format!("base points {i}, {j} at distance {dist:e} inside the disc")));
    }
    let declared = d.generator().map_or(false, |g| g.flag(BOUNDARY_FLAG));
    let singletons = fibers.iter().all(|f| f.len() == 1);
    let monotone = base.windows(2).all(|w| w[1][0].norm() > w[0][0].norm());
    Ok(if declared && singletons && monotone {
        Verdict::certified("boundary-monotone", "base tends monotonically to the boundary, fibers are singletons")
    } else {
        Verdict::consistent(format!("{} fibers, largest {}", fibers.len(), fibers.iter().map(Vec::len).max().unwrap_or(0)))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonTameReport {
    /// 1-based step index.
    pub first_failure_index: usize,
    #[serde(rename = "K")]
    pub k_bound: f64,
    pub heights: Vec<f64>,
    pub demands: Vec<f64>,
}

/// First k (1-based) where τ(a(p_k, q_k)) < R_k = 2^k|q_k|(1 + 1e−6).
pub fn dp_nontame_bound(p: &[C64], q: &[C64], a: &DiscPlaneAut) -> Result<NonTameReport> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch("p and q prefixes differ in length".into()));
    }
    let mut heights = Vec::new();
    let mut demands = Vec::new();
    let mut k_bound = 0.0f64;
    for (i, (&pk, &qk)) in p.iter().zip(q).enumerate() {
        if qk.norm() == 0.0 {
            return Err(Error::ZeroPoint(i));
        }
        let (z, _) = dp_apply(a, (pk, qk))?;
        k_bound = k_bound.max(1.0 / (1.0 - z.norm()));
    }
    for (i, (&pk, &qk)) in p.iter().zip(q).enumerate() {
        let k = i + 1;
        let (z, w) = dp_apply(a, (pk, qk))?;
        let tau = w.norm() + 1.0 / (1.0 - z.norm());
        let demand = 2f64.powi(k as i32) * qk.norm() * (1.0 + 1e-6);
        heights.push(tau);
        demands.push(demand);
        if tau < demand {
            return Ok(NonTameReport { first_failure_index: k, k_bound, heights, demands });
        }
    }
    Err(Error::InconclusivePrefix(format!("no failure within {} steps", p.len())))
}

pub fn poincare_distance(a: C64, b: C64) -> f64 {
    let m = ((a - b) / (c(1.0, 0.0) - b.conj() * a)).norm();
    ((1.0 + m) / (1.0 - m)).ln()
}

pub fn poincare_signature(points: &[C64]) -> Result<Vec<f64>> {
    for &z in points {
        check_disc(z)?;
    }
    let mut out = Vec::with_capacity(points.len() * points.len().saturating_sub(1) / 2);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            out.push(poincare_distance(points[i], points[j]));
        }
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// One distance per line, 15 significant digits.
pub fn signature_csv(sig: &[f64]) -> String {
    sig.iter().map(|d| format!("{d:.14e}\n")).collect()
}

/// Largest elementwise gap between two signatures of equal length; `None` when lengths differ.
pub fn signature_gap(a: &[f64], b: &[f64]) -> Option<f64> {
    (a.len() == b.len()).then(|| a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CVector;
    use crate::space::Generator;

    fn r(x: f64) -> C64 {
        c(x, 0.0)
    }

    #[test]
    fn apply_examples() {
        let id = DiscPlaneAut::identity();
        assert_eq!(dp_apply(&id, (c(0.3, 0.1), r(7.0))).unwrap(), (c(0.3, 0.1), r(7.0)));
        let tr = DiscPlaneAut::new(MoebiusDisc::identity(), Polynomial::zero(), Polynomial::constant(r(1.0))).unwrap();
        assert_eq!(dp_apply(&tr, (r(0.5), r(2.0))).unwrap(), (r(0.5), r(3.0)));
        let m = DiscPlaneAut::new(MoebiusDisc::new(0.0, r(0.5)).unwrap(), Polynomial::zero(), Polynomial::zero()).unwrap();
        let (z, w) = dp_apply(&m, (r(0.5), r(2.0))).unwrap();
        assert!(z.norm() < 1e-15 && w == r(2.0));
        assert!(matches!(dp_apply(&id, (r(1.0), r(0.0))), Err(Error::PointOutsideAmbient(_))));
    }

    #[test]
    fn moebius_group_law() {
        let a = MoebiusDisc::new(0.7, c(0.3, -0.2)).unwrap();
        let b = MoebiusDisc::new(-1.1, c(-0.5, 0.4)).unwrap();
        let ab = a.compose(&b);
        for z in [r(0.0), c(0.2, 0.6), c(-0.9, 0.1)] {
            assert!((ab.apply(z) - a.apply(b.apply(z))).norm() < 1e-14);
            assert!((a.inverse().apply(a.apply(z)) - z).norm() < 1e-14);
        }
    }

    #[test]
    fn compose_exact_cases() {
        let g1 = Polynomial::from_real_coeffs(&[1.0, 2.0]);
        let g2 = Polynomial::from_real_coeffs(&[0.0, 0.0, 3.0]);
        let a = DiscPlaneAut::new(MoebiusDisc::identity(), Polynomial::zero(), g1.clone()).unwrap();
        let b = DiscPlaneAut::new(MoebiusDisc::identity(), Polynomial::zero(), g2.clone()).unwrap();
        let res = dp_compose(&a, &b).unwrap();
        assert!(res.exact && res.residual == 0.0);
        assert_eq!(res.aut.g, g1.add(&g2));
        let res = dp_compose(&a, &DiscPlaneAut::identity()).unwrap();
        assert_eq!(res.aut, a);
    }

    #[test]
    fn compose_generic_pair_has_small_residual() {
        let a = DiscPlaneAut::new(
            MoebiusDisc::new(0.4, c(0.2, 0.1)).unwrap(),
            Polynomial::from_real_coeffs(&[0.1, 0.5]),
            Polynomial::from_real_coeffs(&[1.0, 0.0, -2.0]),
        )
        .unwrap();
        let b = DiscPlaneAut::new(
            MoebiusDisc::new(-0.3, c(-0.3, 0.2)).unwrap(),
            Polynomial::from_real_coeffs(&[0.0, -0.2, 0.3]),
            Polynomial::from_real_coeffs(&[0.5, 1.0]),
        )
        .unwrap();
        let res = dp_compose(&a, &b).unwrap();
        assert!(!res.exact);
        assert!(res.residual < 1e-6, "residual {}", res.residual);
        let inv = dp_inverse(&a).unwrap();
        assert!(inv.residual < 1e-6, "residual {}", inv.residual);
    }

    fn disc_seq(pts: &[(f64, f64)], g: Option<Generator>) -> DiscreteSequence {
        let pts = pts.iter().map(|&(z, w)| CVector::from_reals(&[z, w]).unwrap()).collect();
        DiscreteSequence::from_vectors(AmbientSpace::DiscTimesC, pts, g).unwrap()
    }

    #[test]
    fn classifier_examples() {
        let constant: Vec<(f64, f64)> = (1..=20).map(|k| (0.0, k as f64)).collect();
        let v = dp_classify(&disc_seq(&constant, None), 1e-3, 1).unwrap();
        assert_eq!(v.witness().unwrap().len(), 20);
        let boundary: Vec<(f64, f64)> = (1..=30).map(|k| (1.0 - 0.5f64.powi(k), 0.0)).collect();
        let g = Generator::new("discplane-base").with(BOUNDARY_FLAG, 1.0);
        assert!(dp_classify(&disc_seq(&boundary, Some(g)), 1e-3, 1).unwrap().is_certified());
        assert!(dp_classify(&disc_seq(&boundary, None), 1e-3, 1).unwrap().is_consistent());
        let interior: Vec<(f64, f64)> = (1..=100).map(|k| (1.0 / (k as f64 + 2.0), 0.0)).collect();
        assert!(dp_classify(&disc_seq(&interior, None), 1e-3, 1).unwrap().is_violated());
    }

    #[test]
    fn nontame_bound_examples() {
        let p = vec![r(0.0); 40];
        let q: Vec<C64> = (1..=40).map(|k| r(k as f64)).collect();
        let rep = dp_nontame_bound(&p, &q, &DiscPlaneAut::identity()).unwrap();
        // τ = k + 1 against 2^k·k·(1 + 1e−6); the margin already bites at k = 1
        assert_eq!(rep.first_failure_index, 1);
        let big = DiscPlaneAut::new(MoebiusDisc::identity(), Polynomial::zero(), Polynomial::constant(r(1e6))).unwrap();
        let rep = dp_nontame_bound(&p, &q, &big).unwrap();
        // 15·2^15 = 491520 < 1e6 + 16 < 16·2^16 = 1048576
        assert_eq!(rep.first_failure_index, 16);
        assert!(matches!(dp_nontame_bound(&p[..3], &q[..3], &big), Err(Error::InconclusivePrefix(_))));
    }

    #[test]
    fn signature_examples() {
        let s = poincare_signature(&[r(0.0), r(0.5)]).unwrap();
        assert!((s[0] - 3f64.ln()).abs() < 1e-15);
        assert!(poincare_signature(&[r(0.2)]).unwrap().is_empty());
        let m = MoebiusDisc::new(0.0, r(0.3)).unwrap();
        let moved = poincare_signature(&[m.apply(r(0.0)), m.apply(r(0.5))]).unwrap();
        assert!(signature_gap(&s, &moved).unwrap() < 1e-10);
        let other = poincare_signature(&[r(0.0), r(0.25)]).unwrap();
        assert!(signature_gap(&s, &other).unwrap() >= 0.5);
        assert_eq!(signature_csv(&s).lines().count(), 1);
    }
}

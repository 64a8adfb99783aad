//! Bundle projections of SLₙ, π-tameness, and the push x ↦ x·F(π(x)) along first-column fibers.

use serde::{Deserialize, Serialize};

use crate::automorphism::AutomorphismRep;
use crate::checks::{fiber_tol, first_close_pair, group_fibers, properness_check_auto, Verdict};
use crate::error::{Error, Result};
use crate::exhaustion::HeightAssignment;
use crate::linalg::{c, CMatrix, CVector, SLMatrix, C64};
use crate::poly::{interpolate_nodes, Polynomial};
use crate::rng::{unit_vector, SeedStream};
use crate::space::{AmbientSpace, DiscreteSequence};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BundleKind {
    /// Fiber group Q = {g : g·e₁ = e₁}.
    FirstColumn,
    /// Fiber group T = diagonal matrices acting on the right.
    RightTorus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleSpec {
    pub n: usize,
    pub kind: BundleKind,
}

impl BundleSpec {
    pub fn new(n: usize, kind: BundleKind) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionMismatch("bundles need n >= 2".into()));
        }
        Ok(BundleSpec { n, kind })
    }

    pub fn first_column(n: usize) -> Self {
        BundleSpec { n: n.max(2), kind: BundleKind::FirstColumn }
    }
}

/// Unit representative of the line through `v`: first entry above 1e−12·‖v‖ made positive real.
pub fn projective_class(v: &CVector) -> CVector {
    let nv = v.norm();
    let u = v.scale(c(1.0 / nv, 0.0));
    match u.entries().iter().find(|z| z.norm() > 1e-12) {
        Some(z) => u.scale(z.conj() / z.norm()),
        None => u,
    }
}

pub fn project(b: &BundleSpec, a: &SLMatrix) -> Vec<C64> {
    match b.kind {
        BundleKind::FirstColumn => a.first_column().into_entries(),
        BundleKind::RightTorus => (0..a.n()).flat_map(|j| projective_class(&a.column(j)).into_entries()).collect(),
    }
}

pub fn pi_tame_check(d: &DiscreteSequence, b: &BundleSpec, min_gap: f64, max_fiber: usize) -> Result<Verdict> {
    if d.ambient() != AmbientSpace::SLn(b.n) {
        return Err(Error::AmbientMismatch(format!("bundle over SL{} on {}", b.n, d.ambient().tag())));
    }
    let images: Vec<Vec<C64>> = d.matrices()?.iter().map(|m| project(b, m)).collect();
    properness_check_auto(&images, min_gap, max_fiber)
}

/// An element of Q: first column e₁, determinant one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QElement(SLMatrix);

impl QElement {
    pub fn new(m: SLMatrix) -> Result<Self> {
        let col = m.first_column();
        let off = (0..m.n()).fold(0.0f64, |acc, i| {
            let want = if i == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) };
            acc.max((col.get(i) - want).norm())
        });
        if off > 1e-10 {
            return Err(Error::NotSameFiber(off));
        }
        Ok(QElement(m))
    }

    pub fn matrix(&self) -> &SLMatrix {
        &self.0
    }

    /// Top-row block r ∈ ℂⁿ⁻¹.
    pub fn r(&self) -> Vec<C64> {
        (1..self.0.n()).map(|j| self.0.get(0, j)).collect()
    }

    /// Lower-right (n−1)×(n−1) block.
    pub fn l_block(&self) -> CMatrix {
        let n = self.0.n();
        let rows: Vec<Vec<C64>> = (1..n).map(|i| (1..n).map(|j| self.0.get(i, j)).collect()).collect();
        CMatrix::from_rows(&rows).expect("finite block")
    }
}

/// Largest entrywise deviation, relative to max(1, |entry|).
pub fn column_deviation(a: &CVector, b: &CVector) -> f64 {
    a.entries().iter().zip(b.entries()).fold(0.0f64, |m, (x, y)| m.max((x - y).norm() / x.norm().max(1.0)))
}

/// g ∈ Q with B·g ≈ A: first column snapped to e₁, the block L rescaled to det 1, and the
/// first row chosen by least squares given L, so the residual B·g − A stays at rounding level
/// even when B is badly conditioned.
pub fn q_factor(a: &SLMatrix, b: &SLMatrix) -> Result<QElement> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch("q_factor sizes".into()));
    }
    let dev = column_deviation(&a.first_column(), &b.first_column());
    if dev > 1e-9 {
        return Err(Error::NotSameFiber(dev));
    }
    let n = a.n();
    let g = b.matrix().solve(a.matrix())?;
    let cond = b.inverse().matrix().max_abs() * a.matrix().max_abs() * n as f64;
    let off = (0..n).fold(0.0f64, |m, i| {
        let want = if i == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) };
        m.max((g.get(i, 0) - want).norm())
    });
    if off > 1e-9 * cond.max(1.0) {
        return Err(Error::NotSameFiber(off));
    }
    let m = n - 1;
    let mut l = CMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            l.set(i, j, g.get(i + 1, j + 1));
        }
    }
    let det = l.det();
    if det.norm() == 0.0 {
        return Err(Error::Singular);
    }
    let l = if m == 1 { CMatrix::identity(1) } else { l.scale(det.powf(-1.0 / m as f64)) };
    let y1 = b.first_column();
    let y1n = y1.norm().powi(2);
    let mut out = CMatrix::identity(n);
    for j in 1..n {
        let mut rhs = a.column(j).into_entries();
        for (i, r) in rhs.iter_mut().enumerate() {
            for h in 1..n {
                *r -= b.get(i, h) * l.get(h - 1, j - 1);
            }
        }
        let rj = y1.hdot(&CVector::new(rhs)?) / y1n;
        out.set(0, j, rj);
        for i in 1..n {
            out.set(i, j, l.get(i - 1, j - 1));
        }
    }
    QElement::new(SLMatrix::with_tol(out, 1e-6)?)
}

/// x ↦ x·F(x·e₁) with F(y) = [[1, r(s)], [0, exp X(s)]] and s = Σ uᵢyᵢ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BundlePushAut {
    pub n: usize,
    pub bundle: String,
    pub separator_u: Vec<C64>,
    /// r_j(s), j = 1..n−1.
    pub coeffs: Vec<Polynomial>,
    /// Row-major entries of X(s); empty when F takes values with L = I.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub log_coeffs: Vec<Polynomial>,
}

impl BundlePushAut {
    pub fn separator(&self, y: &CVector) -> C64 {
        self.separator_u.iter().zip(y.entries()).map(|(u, v)| u * v).sum()
    }

    pub fn fiber_element(&self, y: &CVector) -> Result<CMatrix> {
        let n = self.n;
        if y.dim() != n {
            return Err(Error::DimensionMismatch("base point dimension".into()));
        }
        let s = self.separator(y);
        let mut f = CMatrix::identity(n);
        for (j, p) in self.coeffs.iter().enumerate() {
            f.set(0, j + 1, p.eval(s));
        }
        if !self.log_coeffs.is_empty() {
            let m = n - 1;
            let x = CMatrix::from_row_major(m, m, self.log_coeffs.iter().map(|p| p.eval(s)).collect())?;
            let l = x.exp();
            for i in 0..m {
                for j in 0..m {
                    f.set(i + 1, j + 1, l.get(i, j));
                }
            }
        }
        Ok(f)
    }

    pub fn apply(&self, m: &SLMatrix) -> Result<SLMatrix> {
        if m.n() != self.n {
            return Err(Error::DimensionMismatch("bundle push size".into()));
        }
        let f = self.fiber_element(&m.first_column())?;
        SLMatrix::new(m.matrix().mul(&f))
    }

    pub fn inverse(&self) -> BundlePushAut {
        // F is constant along fibers and x·F keeps the first column, so F⁻¹ undoes it
        // when L = I; the general case is not needed by any caller.
        debug_assert!(self.log_coeffs.is_empty());
        BundlePushAut { coeffs: self.coeffs.iter().map(Polynomial::neg).collect(), ..self.clone() }
    }
}

pub const SEPARATOR_TRIES: usize = 64;

/// Seeded separator u making s(yₖ) pairwise distinct, and the node values s(yₖ).
fn choose_separator(bases: &[CVector], seed: &SeedStream, distinct_tol: f64) -> Result<(Vec<C64>, Vec<C64>)> {
    let n = bases.first().map_or(2, |b| b.dim());
    let scale = bases.iter().fold(1.0f64, |m, b| m.max(b.max_norm()));
    for attempt in 0..SEPARATOR_TRIES {
        let mut rng = seed.fork("separator").fork_index(attempt as u64).rng();
        let u = unit_vector(n, &mut rng).into_entries();
        let s: Vec<C64> = bases.iter().map(|y| u.iter().zip(y.entries()).map(|(a, b)| a * b).sum()).collect();
        let keys: Vec<Vec<C64>> = s.iter().map(|&z| vec![z]).collect();
        if first_close_pair(&keys, distinct_tol * scale).is_none() {
            return Ok((u, s));
        }
    }
    Err(Error::DegenerateConfiguration(format!("no separator among {SEPARATOR_TRIES} tries")))
}

/// Builds F with F(π(xₖ)) = gₖ for every k.
pub fn build_push(
    bases: &[CVector],
    targets: &[QElement],
    seed: &SeedStream,
    distinct_tol: f64,
) -> Result<BundlePushAut> {
    let n = targets.first().map_or(2, |g| g.matrix().n());
    let keys: Vec<Vec<C64>> = bases.iter().map(|b| b.entries().to_vec()).collect();
    if let Some(f) = group_fibers(&keys, fiber_tol(&keys)).into_iter().find(|f| f.len() > 1) {
        return Err(Error::FiberCollision(f[0], f[1]));
    }
    let (u, s) = choose_separator(bases, seed, distinct_tol)?;
    let interp = |vals: Vec<C64>| -> Result<Polynomial> {
        let nodes: Vec<(C64, C64)> = s.iter().copied().zip(vals).collect();
        interpolate_nodes(&nodes, 0.0).map_err(|e| match e {
            Error::DuplicateNodes(..) => Error::InterpolationIllConditioned("separator collision".into()),
            other => other,
        })
    };
    let mut coeffs = Vec::with_capacity(n - 1);
    for j in 0..n - 1 {
        coeffs.push(interp(targets.iter().map(|g| g.r()[j]).collect())?);
    }
    let m = n - 1;
    let identity_blocks = targets.iter().all(|g| g.l_block().max_dist(&CMatrix::identity(m)) == 0.0);
    let mut log_coeffs = Vec::new();
    if !identity_blocks && m >= 1 {
        let logs: Vec<CMatrix> = targets
            .iter()
            .map(|g| {
                let x = g.l_block().log()?;
                if x.trace().norm() > 1e-8 {
                    return Err(Error::NonGenericLog(format!("log of fiber block has trace {}", x.trace())));
                }
                Ok(x)
            })
            .collect::<Result<_>>()?;
        for i in 0..m {
            for j in 0..m {
                if i == m - 1 && j == m - 1 {
                    // last diagonal entry keeps X(s) exactly traceless
                    let mut acc = Polynomial::zero();
                    for d in 0..m - 1 {
                        acc = acc.add(&log_coeffs[d * m + d]);
                    }
                    log_coeffs.push(acc.neg());
                } else {
                    log_coeffs.push(interp(logs.iter().map(|x| x.get(i, j)).collect())?);
                }
            }
        }
    }
    Ok(BundlePushAut { n, bundle: "first-column".into(), separator_u: u, coeffs, log_coeffs })
}

pub const T_CAP: f64 = 1152921504606846976.0; // 2^60

/// h(t) = [[1, t·(1,…,1)], [0, I]].
fn push_element(n: usize, t: f64) -> CMatrix {
    let mut h = CMatrix::identity(n);
    for j in 1..n {
        h.set(0, j, c(t, 0.0));
    }
    h
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PushReport {
    pub parameters: Vec<f64>,
    pub achieved: Vec<f64>,
    pub required: Vec<f64>,
}

pub fn bundle_push(
    d: &DiscreteSequence,
    zeta: &HeightAssignment,
    seed: &SeedStream,
    distinct_tol: f64,
) -> Result<(AutomorphismRep, PushReport)> {
    let n = match d.ambient() {
        AmbientSpace::SLn(n) => n,
        other => return Err(Error::AmbientMismatch(format!("bundle push on {}", other.tag()))),
    };
    if zeta.len() != d.len() {
        return Err(Error::DimensionMismatch("one height per point".into()));
    }
    let mats = d.matrices()?;
    let heights: Vec<f64> = mats.iter().map(|m| m.max_column_norm()).collect();
    if heights.iter().zip(zeta.values()).all(|(h, z)| h >= z) {
        let rep = PushReport { parameters: vec![0.0; d.len()], achieved: heights, required: zeta.values().to_vec() };
        return Ok((AutomorphismRep::Identity, rep));
    }
    let mut params = Vec::with_capacity(d.len());
    let mut targets = Vec::with_capacity(d.len());
    for (i, (m, (&h, &z))) in mats.iter().zip(heights.iter().zip(zeta.values())).enumerate() {
        let mut t = 0.0;
        if h < z {
            t = 1.0;
            loop {
                let moved = m.matrix().mul(&push_element(n, t));
                let rho = (0..n).map(|j| moved.column_norm(j)).fold(0.0, f64::max);
                if rho >= z * (1.0 + 1e-6) {
                    break;
                }
                t *= 2.0;
                if t > T_CAP {
                    return Err(Error::HeightUnreachable(i));
                }
            }
        }
        params.push(t);
        targets.push(QElement::new(SLMatrix::new(push_element(n, t))?)?);
    }
    let bases: Vec<CVector> = mats.iter().map(|m| m.first_column()).collect();
    let push = build_push(&bases, &targets, seed, distinct_tol)?;
    let phi = AutomorphismRep::BundlePush(push);
    let achieved: Vec<f64> = mats.iter().map(|m| phi.apply_matrix(m).map(|x| x.max_column_norm())).collect::<Result<_>>()?;
    if let Some(i) = achieved.iter().zip(zeta.values()).position(|(a, z)| a < z) {
        return Err(Error::InterpolationIllConditioned(format!("point {i} reached {} < {}", achieved[i], zeta.get(i))));
    }
    Ok((phi, PushReport { parameters: params, achieved, required: zeta.values().to_vec() }))
}

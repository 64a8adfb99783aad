//! SL₂(ℂ): overshears, right translations along first-column fibers, the first-column
//! tameness pipeline, and enumeration of SL₂(𝒪_K) over imaginary quadratic rings.

use serde::{Deserialize, Serialize};

use crate::automorphism::AutomorphismRep;
use crate::checks::{fiber_tol, group_fibers, properness_check_auto, Verdict, DEFAULT_MIN_GAP};
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector, SLMatrix, C64};
use crate::pi_tame::{build_push, pi_tame_check, BundleSpec, QElement};
use crate::poly::{interpolate_nodes, Polynomial};
use crate::rng::{gaussian_c, unit_vector, SeedStream};
use crate::space::{DiscreteSequence, Generator};

/// One term coef·aⁱbʲ of a two-variable polynomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiTerm {
    pub i: u32,
    pub j: u32,
    pub coef: C64,
}

/// λ(a, b) = 1 + a·P(a, b); the forms differ only in how P is stored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum LambdaForm {
    /// P(a, b) = Σ coef·aⁱbʲ.
    Poly { terms: Vec<BiTerm> },
    /// P(a, b) = b·R(u₀a + u₁b), so λ ≡ 1 on both coordinate axes.
    AxisProduct { u: [C64; 2], r: Polynomial },
    /// λ = 1/λ_inner, i.e. P = −P_inner/λ_inner.
    Reciprocal { inner: Box<LambdaForm> },
}

impl LambdaForm {
    pub fn p(&self, a: C64, b: C64) -> Result<C64> {
        Ok(match self {
            LambdaForm::Poly { terms } => terms.iter().map(|t| t.coef * a.powu(t.i) * b.powu(t.j)).sum(),
            LambdaForm::AxisProduct { u, r } => b * r.eval(u[0] * a + u[1] * b),
            LambdaForm::Reciprocal { inner } => {
                let lam = inner.lambda(a, b)?;
                -inner.p(a, b)? / lam
            }
        })
    }

    pub fn lambda(&self, a: C64, b: C64) -> Result<C64> {
        let lam = c(1.0, 0.0) + a * self.p(a, b)?;
        if lam.norm() < 1e-12 {
            return Err(Error::LambdaVanishes);
        }
        Ok(lam)
    }
}

/// φ_λ: [[a, c], [b, d]] ↦ [[a, c·λ(a, b)], [b, d′]] with a·d′ − b·c·λ = 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OvershearSpec {
    pub lambda: LambdaForm,
}

impl OvershearSpec {
    pub fn identity() -> Self {
        OvershearSpec { lambda: LambdaForm::Poly { terms: Vec::new() } }
    }

    /// λ = 1 + a·P with P given by its terms.
    pub fn from_terms(terms: Vec<BiTerm>) -> Self {
        OvershearSpec { lambda: LambdaForm::Poly { terms } }
    }

    /// λ(a, b) = 1 + a.
    pub fn one_plus_a() -> Self {
        OvershearSpec::from_terms(vec![BiTerm { i: 0, j: 0, coef: c(1.0, 0.0) }])
    }

    pub fn lambda_at(&self, a: C64, b: C64) -> Result<C64> {
        self.lambda.lambda(a, b)
    }
}

/// Below this |a| the second column uses d′ = λd − P instead of (1 + bcλ)/a.
pub const A_SWITCH: f64 = 1e-4;

pub fn overshear_apply(s: &OvershearSpec, m: &SLMatrix) -> Result<SLMatrix> {
    if m.n() != 2 {
        return Err(Error::DimensionMismatch("overshear acts on SL2".into()));
    }
    let (a, b, cc, d) = (m.get(0, 0), m.get(1, 0), m.get(0, 1), m.get(1, 1));
    let p = s.lambda.p(a, b)?;
    let lam = c(1.0, 0.0) + a * p;
    if lam.norm() < 1e-12 {
        return Err(Error::LambdaVanishes);
    }
    let d2 = if a.norm() >= A_SWITCH { (c(1.0, 0.0) + b * cc * lam) / a } else { lam * d - p };
    SLMatrix::new(CMatrix::from_rows(&[vec![a, cc * lam], vec![b, d2]])?)
}

pub fn overshear_inverse(s: &OvershearSpec) -> OvershearSpec {
    match &s.lambda {
        LambdaForm::Reciprocal { inner } => OvershearSpec { lambda: (**inner).clone() },
        other => OvershearSpec { lambda: LambdaForm::Reciprocal { inner: Box::new(other.clone()) } },
    }
}

/// R_t: [[a, c], [b, d]] ↦ [[a, c + a·t], [b, d + b·t]].
pub fn right_translate(m: &SLMatrix, t: C64) -> Result<SLMatrix> {
    if m.n() != 2 {
        return Err(Error::DimensionMismatch("right translation acts on SL2".into()));
    }
    let (a, b) = (m.get(0, 0), m.get(1, 0));
    SLMatrix::new(CMatrix::from_rows(&[vec![a, m.get(0, 1) + a * t], vec![b, m.get(1, 1) + b * t]])?)
}

/// Signed t with B = R_t(A).
pub fn fiber_coordinate(a: &SLMatrix, b: &SLMatrix) -> Result<C64> {
    if a.n() != 2 || b.n() != 2 {
        return Err(Error::DimensionMismatch("fiber coordinate on SL2".into()));
    }
    let (x, y) = (a.get(0, 0), a.get(1, 0));
    let dev = ((x - b.get(0, 0)).norm() / x.norm().max(1.0)).max((y - b.get(1, 0)).norm() / y.norm().max(1.0));
    if dev > 1e-10 {
        return Err(Error::NotSameFiber(dev));
    }
    let (dc, dd) = (b.get(0, 1) - a.get(0, 1), b.get(1, 1) - a.get(1, 1));
    let (t, other, pred) = if x.norm() >= y.norm() { (dc / x, dd, y) } else { (dd / y, dc, x) };
    let miss = (other - pred * t).norm();
    let scale = b.get(0, 1).norm().max(b.get(1, 1).norm()).max(1.0);
    if miss > 1e-8 * scale {
        return Err(Error::InconsistentFiber(miss));
    }
    Ok(t)
}

pub fn fiber_distance(a: &SLMatrix, b: &SLMatrix) -> Result<f64> {
    fiber_coordinate(a, b).map(|t| t.norm())
}

/// A matrix with first column v.
pub fn fiber_base(v: (C64, C64)) -> Result<SLMatrix> {
    let (a, b) = v;
    if a.norm() == 0.0 && b.norm() == 0.0 {
        return Err(Error::ZeroVector);
    }
    let rows = if a.norm() >= b.norm() {
        [vec![a, c(0.0, 0.0)], vec![b, c(1.0, 0.0) / a]]
    } else {
        [vec![a, c(-1.0, 0.0) / b], vec![b, c(0.0, 0.0)]]
    };
    SLMatrix::new(CMatrix::from_rows(&rows)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineFit {
    pub slope: C64,
    pub intercept: C64,
    pub residual: f64,
}

/// Fits t ↦ t′ where φ(R_t(M₀)) = R_{t′}(M₀) on the fiber over v.
pub fn fiber_affine_probe(s: &OvershearSpec, v: (C64, C64), samples: usize) -> Result<AffineFit> {
    let base = fiber_base(v)?;
    let samples = samples.max(2);
    let ts: Vec<C64> = (0..samples)
        .map(|k| {
            let x = k as f64 / (samples - 1) as f64 * 2.0 - 1.0;
            c(x, 0.5 * (3.0 * x).sin())
        })
        .collect();
    let mut images = Vec::with_capacity(samples);
    for &t in &ts {
        let moved = overshear_apply(s, &right_translate(&base, t)?)?;
        images.push(fiber_coordinate(&base, &moved)?);
    }
    let n = samples as f64;
    let mt: C64 = ts.iter().sum::<C64>() / n;
    let mi: C64 = images.iter().sum::<C64>() / n;
    let sxx: f64 = ts.iter().map(|t| (t - mt).norm_sqr()).sum();
    let sxy: C64 = ts.iter().zip(&images).map(|(t, y)| (t - mt).conj() * (y - mi)).sum();
    let slope = sxy / sxx;
    let intercept = mi - slope * mt;
    let residual = ts.iter().zip(&images).map(|(t, y)| (slope * t + intercept - y).norm()).fold(0.0, f64::max);
    Ok(AffineFit { slope, intercept, residual })
}

pub fn random_sl2(rng: &mut rand_chacha::ChaCha8Rng) -> SLMatrix {
    loop {
        let z: Vec<C64> = (0..4).map(|_| gaussian_c(rng)).collect();
        let det = z[0] * z[3] - z[1] * z[2];
        if det.norm() < 1e-3 {
            continue;
        }
        let s = det.sqrt();
        let m = CMatrix::from_row_major(2, 2, z.iter().map(|x| x / s).collect()).expect("finite draw");
        if let Ok(m) = SLMatrix::new(m) {
            return m;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub seed: u64,
    pub stage1_tries: usize,
    pub stage1_min_axis_distance: f64,
    /// Per fiber: base point index, λ demanded and λ realized.
    pub stage2_lambda: Vec<(usize, C64, C64)>,
    pub stage3_tries: usize,
    /// min over k of ‖π₂(x_k)‖ − k (k counted from 1).
    pub stage3_clearance: f64,
}

pub const PIPELINE_TRIES: usize = 64;

struct Fiber {
    alpha: CVector,
    members: Vec<usize>,
}

fn fibers_of(mats: &[SLMatrix]) -> Vec<Fiber> {
    let keys: Vec<Vec<C64>> = mats.iter().map(|m| m.first_column().into_entries()).collect();
    group_fibers(&keys, fiber_tol(&keys))
        .into_iter()
        .map(|members| Fiber { alpha: mats[members[0]].first_column(), members })
        .collect()
}

/// Coordinates t_j with w_j = w_ref + t_j·α along a fiber.
fn fiber_coords(alpha: &CVector, cols: &[CVector]) -> Vec<C64> {
    let a2 = alpha.norm().powi(2);
    cols.iter().map(|w| alpha.hdot(&w.sub(&cols[0])) / a2).collect()
}

/// A disc free of fiber points: (center, radius). Singletons get a unit disc two units away.
fn fiber_hole(ts: &[C64], singleton_radius: f64) -> (C64, f64) {
    if ts.len() == 1 {
        return (ts[0] + c(2.0 * singleton_radius, 0.0), singleton_radius);
    }
    let mut best = (0, 1, f64::INFINITY);
    for i in 0..ts.len() {
        for j in i + 1..ts.len() {
            let g = (ts[i] - ts[j]).norm();
            if g < best.2 {
                best = (i, j, g);
            }
        }
    }
    ((ts[best.0] + ts[best.1]) / 2.0, best.2 / 2.0)
}

/// Three stages: a left translation off H = {z₁z₂ = 0}, an overshear enlarging holes in the
/// fibers, and fiberwise translations pushing second columns out of the balls of radius k.
pub fn sl2_column_pipeline(
    d: &DiscreteSequence,
    seed: &SeedStream,
    min_gap: f64,
    max_fiber: usize,
) -> Result<(AutomorphismRep, Verdict, PipelineReport)> {
    let mut report = PipelineReport {
        seed: seed.seed(),
        stage1_tries: 0,
        stage1_min_axis_distance: f64::INFINITY,
        stage2_lambda: Vec::new(),
        stage3_tries: 0,
        stage3_clearance: f64::INFINITY,
    };
    if d.is_empty() {
        return Ok((AutomorphismRep::Identity, Verdict::consistent("empty prefix"), report));
    }
    let fail = |stage: u8, reason: String| Error::StageFailed { stage, reason };
    let pre = pi_tame_check(d, &BundleSpec::first_column(2), min_gap, max_fiber)
        .map_err(|e| fail(1, format!("precondition: {e}")))?;
    if pre.is_violated() {
        return Err(fail(1, format!("first columns are not proper: {}", pre.detail)));
    }
    let mats: Vec<SLMatrix> = d.matrices()?.into_iter().cloned().collect();

    // stage 1
    let mut left = None;
    for attempt in 0..PIPELINE_TRIES {
        let mut rng = seed.fork("stage1").fork_index(attempt as u64).rng();
        let a = random_sl2(&mut rng);
        let dist = mats
            .iter()
            .map(|m| {
                let v = a.matrix().mul_vec(&m.first_column());
                v.get(0).norm().min(v.get(1).norm())
            })
            .fold(f64::INFINITY, f64::min);
        if dist >= 1e-8 {
            report.stage1_tries = attempt + 1;
            report.stage1_min_axis_distance = dist;
            left = Some(a);
            break;
        }
    }
    let a = left.ok_or_else(|| fail(1, format!("no translation among {PIPELINE_TRIES} avoids the axes")))?;
    let step1 = AutomorphismRep::LeftTranslation { matrix: a };
    let m1: Vec<SLMatrix> = mats.iter().map(|m| step1.apply_matrix(m)).collect::<Result<_>>()?;

    // stage 2
    let fibers = fibers_of(&m1);
    let mut nodes = Vec::with_capacity(fibers.len());
    let mut demanded = Vec::with_capacity(fibers.len());
    for f in &fibers {
        let cols: Vec<CVector> = f.members.iter().map(|&i| m1[i].column(1)).collect();
        let (_, rho) = fiber_hole(&fiber_coords(&f.alpha, &cols), 1.0);
        let k = (f.members.iter().max().unwrap() + 1) as f64;
        let lam = (2.0 * k / (rho * f.alpha.norm())).max(1.0);
        let (x, y) = (f.alpha.get(0), f.alpha.get(1));
        nodes.push((x, y));
        demanded.push((c(lam, 0.0) - 1.0) / (x * y));
    }
    let mut spec = None;
    for attempt in 0..PIPELINE_TRIES {
        let mut rng = seed.fork("stage2").fork_index(attempt as u64).rng();
        let u = unit_vector(2, &mut rng);
        let u = [u.get(0), u.get(1)];
        let pts: Vec<(C64, C64)> = nodes.iter().zip(&demanded).map(|(&(x, y), &v)| (u[0] * x + u[1] * y, v)).collect();
        match interpolate_nodes(&pts, 1e-9) {
            Ok(r) => {
                spec = Some(OvershearSpec { lambda: LambdaForm::AxisProduct { u, r } });
                break;
            }
            Err(Error::DuplicateNodes(..)) | Err(Error::InterpolationIllConditioned(_)) => continue,
            Err(e) => return Err(fail(2, e.to_string())),
        }
    }
    let spec = spec.ok_or_else(|| fail(2, "no separator gives a well-conditioned interpolant".into()))?;
    for (f, want) in fibers.iter().zip(&demanded) {
        let (x, y) = (f.alpha.get(0), f.alpha.get(1));
        let got = spec.lambda_at(x, y).map_err(|e| fail(2, e.to_string()))?;
        let want = c(1.0, 0.0) + x * y * want;
        if (got - want).norm() > 1e-6 * want.norm() {
            return Err(fail(2, format!("lambda {got} misses {want} over point {}", f.members[0])));
        }
        report.stage2_lambda.push((f.members[0], want, got));
    }
    let step2 = AutomorphismRep::Overshear(spec);
    let m2: Vec<SLMatrix> = m1.iter().map(|m| step2.apply_matrix(m)).collect::<Result<_>>().map_err(|e| fail(2, e.to_string()))?;

    // stage 3
    let fibers = fibers_of(&m2);
    let geometry: Vec<(C64, C64, f64)> = fibers
        .iter()
        .map(|f| {
            let cols: Vec<CVector> = f.members.iter().map(|&i| m2[i].column(1)).collect();
            let ts = fiber_coords(&f.alpha, &cols);
            let lam = report
                .stage2_lambda
                .iter()
                .find(|(i, _, _)| f.members.contains(i))
                .map_or(1.0, |(_, _, got)| got.norm());
            let (center, rho) = fiber_hole(&ts, lam);
            // closest point of the fiber line to the origin, in the same coordinate
            let tstar = -f.alpha.hdot(&cols[0]) / f.alpha.norm().powi(2);
            (center, tstar, rho)
        })
        .collect();
    let bases: Vec<CVector> = fibers.iter().map(|f| f.alpha.clone()).collect();
    for attempt in 0..PIPELINE_TRIES {
        let mut rng = seed.fork("stage3").fork_index(attempt as u64).rng();
        let targets: Vec<QElement> = geometry
            .iter()
            .map(|&(center, tstar, rho)| {
                let eps = unit_vector(1, &mut rng).get(0) * (0.25 * rho * rand::Rng::gen::<f64>(&mut rng));
                let shift = tstar - center + eps;
                QElement::new(SLMatrix::new(CMatrix::from_rows(&[vec![c(1.0, 0.0), shift], vec![c(0.0, 0.0), c(1.0, 0.0)]])?)?)
            })
            .collect::<Result<_>>()?;
        let push = match build_push(&bases, &targets, &seed.fork("stage3-separator"), 1e-9) {
            Ok(p) => p,
            Err(Error::InterpolationIllConditioned(_)) | Err(Error::DegenerateConfiguration(_)) => continue,
            Err(e) => return Err(fail(3, e.to_string())),
        };
        let step3 = AutomorphismRep::BundlePush(push);
        let m3: Vec<SLMatrix> = match m2.iter().map(|m| step3.apply_matrix(m)).collect::<Result<_>>() {
            Ok(v) => v,
            Err(_) => continue,
        };
        let clearance = m3
            .iter()
            .enumerate()
            .map(|(i, m)| m.column(1).norm() - (i + 1) as f64)
            .fold(f64::INFINITY, f64::min);
        let seconds: Vec<Vec<C64>> = m3.iter().map(|m| m.column(1).into_entries()).collect();
        let verdict = properness_check_auto(&seconds, DEFAULT_MIN_GAP, 1)?;
        if clearance >= 0.0 && !verdict.is_violated() {
            report.stage3_tries = attempt + 1;
            report.stage3_clearance = clearance;
            let phi = step1.then(step2).then(step3);
            return Ok((phi, verdict, report));
        }
    }
    Err(fail(3, format!("no translation choice among {PIPELINE_TRIES} clears the balls injectively")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NumberField {
    /// ℚ, with ring ℤ.
    Rational,
    /// ℚ(√−d) for squarefree d > 0.
    Imaginary(u32),
}

pub const SUPPORTED_D: [u32; 9] = [1, 2, 3, 7, 11, 19, 43, 67, 163];

impl NumberField {
    pub fn parse(tag: &str) -> Result<Self> {
        match tag {
            "q" | "Q" => Ok(NumberField::Rational),
            "qi" | "Q(i)" => Ok(NumberField::Imaginary(1)),
            other => {
                let d = other
                    .strip_prefix("q-")
                    .and_then(|x| x.parse::<u32>().ok())
                    .ok_or_else(|| Error::UnsupportedField(other.to_string()))?;
                NumberField::imaginary(d)
            }
        }
    }

    pub fn imaginary(d: u32) -> Result<Self> {
        if SUPPORTED_D.contains(&d) {
            Ok(NumberField::Imaginary(d))
        } else {
            Err(Error::UnsupportedField(format!("Q(sqrt(-{d}))")))
        }
    }

    pub fn tag(&self) -> String {
        match self {
            NumberField::Rational => "q".into(),
            NumberField::Imaginary(1) => "qi".into(),
            NumberField::Imaginary(d) => format!("q-{d}"),
        }
    }

    /// ω with 𝒪_K = ℤ[ω].
    pub fn omega(&self) -> C64 {
        match *self {
            NumberField::Rational => c(0.0, 0.0),
            NumberField::Imaginary(d) if d % 4 == 3 => c(0.5, (d as f64).sqrt() / 2.0),
            NumberField::Imaginary(d) => c(0.0, (d as f64).sqrt()),
        }
    }

    /// (p, q) with ω² = p + qω.
    fn omega_square(&self) -> (i64, i64) {
        match *self {
            NumberField::Rational => (0, 0),
            NumberField::Imaginary(d) if d % 4 == 3 => (-((1 + d as i64) / 4), 1),
            NumberField::Imaginary(d) => (-(d as i64), 0),
        }
    }

    fn mul(&self, x: [i64; 2], y: [i64; 2]) -> [i64; 2] {
        let (p, q) = self.omega_square();
        let yy = x[1] * y[1];
        [x[0] * y[0] + yy * p, x[0] * y[1] + x[1] * y[0] + yy * q]
    }

    pub fn embed(&self, x: [i64; 2]) -> C64 {
        c(x[0] as f64, 0.0) + self.omega() * x[1] as f64
    }
}

/// Entries x + yω stored as [x, y]; the matrix is [[a, c], [b, d]].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactSl2 {
    pub a: [i64; 2],
    pub b: [i64; 2],
    pub c: [i64; 2],
    pub d: [i64; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianSl2 {
    pub field: NumberField,
    pub height: u32,
    pub exact: Vec<ExactSl2>,
    pub sequence: DiscreteSequence,
}

pub fn gaussian_sl2_generate(field: NumberField, height: u32) -> Result<GaussianSl2> {
    if let NumberField::Imaginary(d) = field {
        NumberField::imaginary(d)?;
    }
    let h = height as i64;
    let ys: Vec<i64> = if field == NumberField::Rational { vec![0] } else { (-h..=h).collect() };
    let entries: Vec<[i64; 2]> = (-h..=h).flat_map(|x| ys.iter().map(move |&y| [x, y])).collect();
    let mut exact = Vec::new();
    for &a in &entries {
        for &b in &entries {
            for &cc in &entries {
                let bc = field.mul(b, cc);
                for &d in &entries {
                    let ad = field.mul(a, d);
                    if ad[0] - bc[0] == 1 && ad[1] - bc[1] == 0 {
                        exact.push(ExactSl2 { a, b, c: cc, d });
                    }
                }
            }
        }
    }
    if exact.is_empty() {
        return Err(Error::EmptyResult);
    }
    let mats = exact
        .iter()
        .map(|e| {
            let m = CMatrix::from_rows(&[vec![field.embed(e.a), field.embed(e.c)], vec![field.embed(e.b), field.embed(e.d)]])?;
            SLMatrix::new(m)
        })
        .collect::<Result<Vec<_>>>()?;
    let dval = match field {
        NumberField::Rational => 0.0,
        NumberField::Imaginary(d) => d as f64,
    };
    let generator = Generator::new("sl2-gauss").with("d", dval).with("height", height as f64);
    let sequence = DiscreteSequence::from_matrices(mats, Some(generator))?;
    // distinct first columns are distinct lattice points of 𝒪_K², hence at distance ≥ 1
    let firsts: Vec<Vec<C64>> = sequence.matrices()?.iter().map(|m| m.first_column().into_entries()).collect();
    let fibers = group_fibers(&firsts, 1e-9);
    let reps: Vec<Vec<C64>> = fibers.iter().map(|f| firsts[f[0]].clone()).collect();
    if let Some((i, j, dist)) = crate::checks::first_close_pair(&reps, 1.0 - 1e-9) {
        return Err(Error::DegenerateConfiguration(format!("first columns {i}, {j} at lattice distance {dist}")));
    }
    Ok(GaussianSl2 { field, height, exact, sequence })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2(rows: [[f64; 2]; 2]) -> SLMatrix {
        SLMatrix::from_real_rows(&[&rows[0], &rows[1]]).unwrap()
    }

    #[test]
    fn overshear_examples() {
        let m = m2([[1.0, 1.0], [1.0, 2.0]]);
        assert_eq!(overshear_apply(&OvershearSpec::identity(), &m).unwrap(), m);
        let out = overshear_apply(&OvershearSpec::one_plus_a(), &m).unwrap();
        assert_eq!(out, m2([[1.0, 2.0], [1.0, 3.0]]));
        let axis = m2([[0.0, -1.0], [1.0, 4.0]]);
        // continuity forces d′ = λd − P = d − 1 on the axis a = 0, not d′ = d
        let out = overshear_apply(&OvershearSpec::one_plus_a(), &axis).unwrap();
        assert_eq!(out, m2([[0.0, -1.0], [1.0, 3.0]]));
        let near = SLMatrix::sl2(c(1e-6, 0.0), c(1.0, 0.0), c(4e-6 - 1.0, 0.0), c(4.0, 0.0)).unwrap();
        let near = overshear_apply(&OvershearSpec::one_plus_a(), &near).unwrap();
        assert!((near.get(1, 1) - 3.0).norm() < 1e-4);
    }

    #[test]
    fn continuity_across_the_switch() {
        let s = OvershearSpec::from_terms(vec![
            BiTerm { i: 0, j: 1, coef: c(0.7, 0.2) },
            BiTerm { i: 2, j: 0, coef: c(-1.0, 0.0) },
        ]);
        let (b, d) = (c(1.3, -0.4), c(0.5, 0.5));
        let image = |a: f64| {
            let a = c(a, 0.0);
            let cc = (a * d - 1.0) / b;
            overshear_apply(&s, &SLMatrix::sl2(a, b, cc, d).unwrap()).unwrap().get(1, 1)
        };
        let (x, y) = (image(A_SWITCH * 1.0001), image(A_SWITCH * 0.9999));
        assert!((x - y).norm() < 1e-3 * x.norm().max(1.0));
    }

    #[test]
    fn inverse_and_vanishing() {
        let s = OvershearSpec::one_plus_a();
        let m = m2([[1.0, 1.0], [1.0, 2.0]]);
        let back = overshear_apply(&overshear_inverse(&s), &overshear_apply(&s, &m).unwrap()).unwrap();
        assert!(back.matrix().max_dist(m.matrix()) < 1e-12);
        assert_eq!(overshear_inverse(&overshear_inverse(&s)), s);
        assert_eq!(s.lambda_at(c(-1.0, 0.0), c(3.0, 0.0)), Err(Error::LambdaVanishes));
    }

    #[test]
    fn translation_and_distance() {
        let a = m2([[2.0, 0.0], [1.0, 0.5]]);
        assert_eq!(right_translate(&a, c(0.0, 0.0)).unwrap(), a);
        let t = c(1.0, 1.0);
        let b = right_translate(&a, t).unwrap();
        assert!((fiber_distance(&a, &b).unwrap() - 2f64.sqrt()).abs() < 1e-10);
        let id = SLMatrix::identity(2);
        assert_eq!(right_translate(&id, c(5.0, 0.0)).unwrap(), m2([[1.0, 5.0], [0.0, 1.0]]));
        assert!(matches!(fiber_distance(&id, &a), Err(Error::NotSameFiber(_))));
    }

    #[test]
    fn affine_probe_examples() {
        let fit = fiber_affine_probe(&OvershearSpec::identity(), (c(1.0, 0.0), c(1.0, 0.0)), 16).unwrap();
        assert!((fit.slope - 1.0).norm() < 1e-12 && fit.residual <= 1e-12);
        let fit = fiber_affine_probe(&OvershearSpec::one_plus_a(), (c(1.0, 0.0), c(1.0, 0.0)), 16).unwrap();
        assert!((fit.slope - 2.0).norm() < 1e-9);
        let fit = fiber_affine_probe(&OvershearSpec::one_plus_a(), (c(0.0, 0.0), c(1.0, 0.0)), 16).unwrap();
        assert!((fit.slope - 1.0).norm() < 1e-9);
    }

    #[test]
    fn rational_and_gaussian_enumeration() {
        let q1 = gaussian_sl2_generate(NumberField::Rational, 1).unwrap();
        let has = |g: &GaussianSl2, e: ExactSl2| g.exact.contains(&e);
        let z = [0, 0];
        let one = [1, 0];
        let neg = [-1, 0];
        assert!(has(&q1, ExactSl2 { a: one, b: z, c: z, d: one }));
        assert!(has(&q1, ExactSl2 { a: neg, b: z, c: z, d: neg }));
        assert!(has(&q1, ExactSl2 { a: one, b: z, c: one, d: one }));
        assert!(has(&q1, ExactSl2 { a: z, b: one, c: neg, d: z }));
        let qi = gaussian_sl2_generate(NumberField::Imaginary(1), 1).unwrap();
        assert!(has(&qi, ExactSl2 { a: [0, 1], b: z, c: z, d: [0, -1] }));
        assert_eq!(gaussian_sl2_generate(NumberField::Rational, 0).unwrap_err(), Error::EmptyResult);
        assert!(matches!(NumberField::imaginary(5), Err(Error::UnsupportedField(_))));
    }

    #[test]
    fn eisenstein_arithmetic() {
        let f = NumberField::Imaginary(3);
        // ω² = ω − 1 for ω = (1 + √−3)/2
        assert_eq!(f.mul([0, 1], [0, 1]), [-1, 1]);
        let w = f.omega();
        assert!((w * w - (w - 1.0)).norm() < 1e-15);
    }

    #[test]
    fn pipeline_on_diagonal_sequence() {
        let mats = (1..=10).map(|k| SLMatrix::sl2(c(k as f64, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0 / k as f64, 0.0)).unwrap()).collect();
        let d = DiscreteSequence::from_matrices(mats, None).unwrap();
        let (phi, verdict, report) = sl2_column_pipeline(&d, &SeedStream::new(7), 0.5, 1).unwrap();
        assert!(verdict.is_consistent(), "{}", verdict.detail);
        assert!(report.stage1_min_axis_distance >= 1e-8);
        assert!(report.stage3_clearance >= 0.0);
        for (k, m) in d.matrices().unwrap().into_iter().enumerate() {
            assert!(phi.apply_matrix(m).unwrap().column(1).norm() >= (k + 1) as f64);
        }
        let empty = DiscreteSequence::from_matrices(Vec::new(), None).unwrap();
        let (phi, verdict, _) = sl2_column_pipeline(&empty, &SeedStream::new(7), 0.5, 1).unwrap();
        assert!(phi.is_identity() && verdict.is_consistent());
    }
}

//! SLₙ(ℂ): well-placed sequences, row rescaling, first-column alignment, equivalence
//! automorphisms, the column-dominance decomposition, the torus embedding, center separation
//! and one-parameter subgroups.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::automorphism::AutomorphismRep;
use crate::checks::{discreteness_check, properness_check_auto, Verdict};
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector, SLMatrix, C64};
use crate::pi_tame::{build_push, q_factor, BundlePushAut, QElement};
use crate::poly::Polynomial;
use crate::rng::{gaussian_c, unit_vector, SeedStream};
use crate::space::{AmbientSpace, DiscreteSequence, Generator};

pub const ZERO_ENTRY: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioSequence {
    /// "alpha" is |A_{1h}/A_{jh}|, "beta" is |A_{h1}/A_{hj}|, "row" is |A_{j1}/A_{jh}|.
    pub kind: String,
    pub j: usize,
    pub h: usize,
    pub values: Vec<f64>,
}

impl RatioSequence {
    /// First step k with values[k+1] ≤ values[k].
    pub fn first_drop(&self) -> Option<usize> {
        self.values.windows(2).position(|w| !(w[1] > w[0]))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WellPlacedReport {
    pub nonzero_ok: bool,
    pub ratios: Vec<RatioSequence>,
    pub monotone_ok: bool,
    /// The variant |A_{j1}/A_{jh}| (j ≥ 2, h ≥ 2).
    pub row_ratios: Vec<RatioSequence>,
    pub row_monotone_ok: bool,
    pub growth_declared: bool,
}

/// Indices are 1-based in the report, matching the usual matrix notation.
pub fn well_placed_check(d: &DiscreteSequence) -> Result<(Verdict, WellPlacedReport)> {
    let mats = d.matrices()?;
    let n = d.ambient().n();
    let growth_declared = d.generator().is_some_and(|g| g.flag("diverges"));
    let zero = mats.iter().enumerate().find_map(|(k, m)| {
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).find(|&(i, j)| m.get(i, j).norm() < ZERO_ENTRY).map(|e| (k, e))
    });
    let mut report = WellPlacedReport {
        nonzero_ok: zero.is_none(),
        ratios: Vec::new(),
        monotone_ok: false,
        row_ratios: Vec::new(),
        row_monotone_ok: false,
        growth_declared,
    };
    if let Some((k, (i, j))) = zero {
        let v = Verdict::violated(vec![k], format!("entry ({}, {}) of point {k} vanishes", i + 1, j + 1));
        return Ok((v, report));
    }
    let seq = |kind: &str, j: usize, h: usize, f: &dyn Fn(&SLMatrix) -> f64| RatioSequence {
        kind: kind.into(),
        j: j + 1,
        h: h + 1,
        values: mats.iter().map(|m| f(m)).collect(),
    };
    for j in 1..n {
        for h in 0..n {
            report.ratios.push(seq("alpha", j, h, &|m| (m.get(0, h) / m.get(j, h)).norm()));
            report.ratios.push(seq("beta", j, h, &|m| (m.get(h, 0) / m.get(h, j)).norm()));
        }
        for h in 1..n {
            report.row_ratios.push(seq("row", j, h, &|m| (m.get(j, 0) / m.get(j, h)).norm()));
        }
    }
    let drop = report.ratios.iter().find_map(|r| r.first_drop().map(|k| (r, k)));
    report.monotone_ok = drop.is_none();
    report.row_monotone_ok = report.row_ratios.iter().all(|r| r.first_drop().is_none());
    let verdict = match drop {
        Some((r, k)) => Verdict::violated(
            vec![k, k + 1],
            format!("{}_({},{}) does not increase from step {k} to {}", r.kind, r.j, r.h, k + 1),
        ),
        None if mats.len() < 2 => Verdict::consistent("prefix shorter than two steps"),
        None if growth_declared => Verdict::certified("declared-divergence", "ratios strictly increase and the generator declares divergence"),
        None => Verdict::consistent(format!("all ratios strictly increase over {} steps", mats.len())),
    };
    Ok((verdict, report))
}

/// A(k) = [[k⁴, k²], [k², (1+k⁴)/k⁴]], k = 1..len.
pub fn wellplaced2(len: usize) -> Result<DiscreteSequence> {
    let mats = (1..=len)
        .map(|k| {
            let k = k as f64;
            let k4 = k.powi(4);
            SLMatrix::from_real_rows(&[&[k4, k * k], &[k * k, (1.0 + k4) / k4]])
        })
        .collect::<Result<_>>()?;
    DiscreteSequence::from_matrices(mats, Some(Generator::new("wellplaced2").with("diverges", 1.0)))
}

/// Row scalings λᵢ(k), stored as lambda[k][i].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RescaleTable {
    pub lambda: Vec<Vec<C64>>,
}

impl RescaleTable {
    pub fn ones(n: usize, len: usize) -> Self {
        RescaleTable { lambda: vec![vec![c(1.0, 0.0); n]; len] }
    }

    /// λ_j(k) = r_j(k)·e^{iφ_j(k)} for j ≥ 2 with r_j(0) ∈ (½, 1], r_j(k) = r_j(k−1)·U(½, 1];
    /// λ₁ normalizes the product, so both conditions hold.
    pub fn conforming(n: usize, len: usize, seed: &SeedStream) -> Self {
        let mut rng = seed.fork("rescale").rng();
        let mut r = vec![1.0f64; n];
        let mut lambda = Vec::with_capacity(len);
        for _ in 0..len {
            let mut row = vec![c(1.0, 0.0); n];
            let mut prod = c(1.0, 0.0);
            for j in 1..n {
                r[j] *= 1.0 - 0.5 * rng.gen::<f64>();
                row[j] = C64::from_polar(r[j], rng.gen::<f64>() * std::f64::consts::TAU);
                prod *= row[j];
            }
            row[0] = prod.inv();
            lambda.push(row);
        }
        RescaleTable { lambda }
    }

    pub fn validate(&self, n: usize, len: usize) -> Result<()> {
        if self.lambda.len() < len || self.lambda.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(format!("table must cover {len} steps of {n} rows")));
        }
        for (k, row) in self.lambda.iter().enumerate() {
            let p: C64 = row.iter().product();
            if (p - 1.0).norm() > 1e-9 || row.iter().any(|x| x.norm() == 0.0 || !crate::linalg::is_finite(*x)) {
                return Err(Error::ProductNotOne { step: k });
            }
        }
        Ok(())
    }

    /// (i) |λ₁(k)| ≥ |λⱼ(k)|, (ii) |λ₁(k+1)λⱼ(k)| ≥ |λ₁(k)λⱼ(k+1)|; steps are 0-based.
    pub fn check_conditions(&self, len: usize) -> Result<()> {
        let slack = 1.0 + 1e-12;
        for (k, row) in self.lambda[..len].iter().enumerate() {
            if let Some(j) = (1..row.len()).find(|&j| row[0].norm() * slack < row[j].norm()) {
                return Err(Error::ConditionViolated { step: k, condition: "(i)", row: j + 1 });
            }
        }
        for k in 0..len.saturating_sub(1) {
            let (row, next) = (&self.lambda[k], &self.lambda[k + 1]);
            let bad = (1..row.len()).find(|&j| (next[0] * row[j]).norm() * slack < (row[0] * next[j]).norm());
            if let Some(j) = bad {
                return Err(Error::ConditionViolated { step: k, condition: "(ii)", row: j + 1 });
            }
        }
        Ok(())
    }
}

fn scale_rows(m: &SLMatrix, rows: &[C64]) -> CMatrix {
    CMatrix::diag(rows).mul(m.matrix())
}

/// B_{ij}(k) = λᵢ(k)·A_{ij}(k).
pub fn lambda_rescale(d: &DiscreteSequence, table: &RescaleTable, check_conditions: bool) -> Result<DiscreteSequence> {
    let mats = d.matrices()?;
    let n = d.ambient().n();
    table.validate(n, mats.len())?;
    if check_conditions {
        table.check_conditions(mats.len())?;
    }
    let out = mats
        .iter()
        .zip(&table.lambda)
        .map(|(m, row)| SLMatrix::new(scale_rows(m, row)))
        .collect::<Result<_>>()?;
    DiscreteSequence::from_matrices(out, d.generator().cloned())
}

/// Row tables λ, μ and column tables λ̃, μ̃, each stored as [k][index].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingTables {
    pub lambda: Vec<Vec<C64>>,
    pub mu: Vec<Vec<C64>>,
    pub lambda_tilde: Vec<Vec<C64>>,
    pub mu_tilde: Vec<Vec<C64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintGroup {
    pub name: String,
    pub ok: bool,
    pub worst: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Alignment {
    pub c: DiscreteSequence,
    pub e: DiscreteSequence,
    pub tables: ScalingTables,
    pub constraints: Vec<ConstraintGroup>,
}

impl Alignment {
    pub fn all_constraints_hold(&self) -> bool {
        self.constraints.iter().all(|g| g.ok)
    }
}

/// C(k) = diag(λ)·A(k)·diag(λ̃) and E(k) = diag(μ)·B(k)·diag(μ̃) with equal first columns.
///
/// Per step, ρ is the principal n-th root of ∏ⱼ A_{j1}/B_{j1}; μⱼ = λⱼ·A_{j1}/(ρB_{j1}) keeps
/// ∏μ = ∏λ, and μ̃₁ = ρλ̃₁ closes the matching. λ̃ ≡ 1. For j ≥ 2, λⱼ is real with the largest
/// modulus allowed by |λⱼ| ≤ 1, |μⱼ| ≤ 1 and the recursive caps
/// |λⱼ(k)| ≤ |λⱼ(k−1)|/|λ₁(k−1)|, |μⱼ(k)| ≤ |μⱼ(k−1)|/|μ₁(k−1)|, which imply (i) and (ii).
pub fn align_first_columns(a: &DiscreteSequence, b: &DiscreteSequence) -> Result<Alignment> {
    let (am, bm) = (a.matrices()?, b.matrices()?);
    if am.len() != bm.len() {
        return Err(Error::DimensionMismatch(format!("prefix lengths {} and {}", am.len(), bm.len())));
    }
    let n = a.ambient().n();
    if b.ambient().n() != n {
        return Err(Error::DimensionMismatch("matrix sizes differ".into()));
    }
    for (name, d) in [("A", a), ("B", b)] {
        let (v, _) = well_placed_check(d)?;
        if v.is_violated() {
            return Err(Error::AlignmentInfeasible { step: v.witness().map_or(0, |w| w[0]), reason: format!("{name} is not well-placed: {}", v.detail) });
        }
    }
    let len = am.len();
    let one = c(1.0, 0.0);
    let mut t = ScalingTables { lambda: Vec::new(), mu: Vec::new(), lambda_tilde: Vec::new(), mu_tilde: Vec::new() };
    for k in 0..len {
        let q: Vec<C64> = (0..n).map(|j| am[k].get(j, 0) / bm[k].get(j, 0)).collect();
        let rho = q.iter().product::<C64>().powf(1.0 / n as f64);
        let q: Vec<C64> = q.iter().map(|x| x / rho).collect();
        let mut lam = vec![one; n];
        for j in 1..n {
            let mut cap = 1.0f64.min(1.0 / q[j].norm());
            if k > 0 {
                let (pl, pm) = (&t.lambda[k - 1], &t.mu[k - 1]);
                cap = cap.min(pl[j].norm() / pl[0].norm()).min(pm[j].norm() / (pm[0].norm() * q[j].norm()));
            }
            if !(cap > 1e-300) {
                return Err(Error::AlignmentInfeasible { step: k, reason: format!("row {} scaling underflows", j + 1) });
            }
            lam[j] = c(cap, 0.0);
        }
        lam[0] = lam[1..].iter().product::<C64>().inv();
        if lam[1..].iter().any(|x| x.norm() > lam[0].norm() * (1.0 + 1e-12)) {
            return Err(Error::AlignmentInfeasible { step: k, reason: "normalization forces |lambda_1| < |lambda_j|".into() });
        }
        let mu: Vec<C64> = lam.iter().zip(&q).map(|(l, q)| l * q).collect();
        let mut mu_tilde = vec![rho.powf(-1.0 / (n as f64 - 1.0)); n];
        mu_tilde[0] = rho;
        t.lambda.push(lam);
        t.mu.push(mu);
        t.lambda_tilde.push(vec![one; n]);
        t.mu_tilde.push(mu_tilde);
    }
    let build = |ms: &[&SLMatrix], rows: &[Vec<C64>], cols: &[Vec<C64>]| -> Result<Vec<SLMatrix>> {
        ms.iter()
            .zip(rows.iter().zip(cols))
            .map(|(m, (r, cl))| SLMatrix::new(scale_rows(m, r).mul(&CMatrix::diag(cl))))
            .collect()
    };
    let cm = build(&am, &t.lambda, &t.lambda_tilde)?;
    let em = build(&bm, &t.mu, &t.mu_tilde)?;
    let c_seq = DiscreteSequence::from_matrices(cm, a.generator().cloned())?;
    let e_seq = DiscreteSequence::from_matrices(em, b.generator().cloned())?;
    let constraints = verify_alignment(&c_seq, &e_seq, &t)?;
    Ok(Alignment { c: c_seq, e: e_seq, tables: t, constraints })
}

fn verify_alignment(c_seq: &DiscreteSequence, e_seq: &DiscreteSequence, t: &ScalingTables) -> Result<Vec<ConstraintGroup>> {
    let group = |name: &str, worst: f64, tol: f64| ConstraintGroup { name: name.into(), ok: worst <= tol, worst };
    let tabs = [&t.lambda, &t.mu, &t.lambda_tilde, &t.mu_tilde];
    let product = tabs
        .iter()
        .flat_map(|tab| tab.iter().map(|row| (row.iter().product::<C64>() - 1.0).norm()))
        .fold(0.0f64, f64::max);
    // positive values measure by how much a cap is exceeded
    let mut moduli = 0.0f64;
    let mut recursive = 0.0f64;
    for tab in [&t.lambda, &t.mu] {
        for (k, row) in tab.iter().enumerate() {
            for j in 1..row.len() {
                moduli = moduli.max(row[j].norm() - 1.0).max(row[j].norm() - row[0].norm());
                if k + 1 < tab.len() {
                    let next = &tab[k + 1];
                    recursive = recursive.max((row[0] * next[j]).norm() - (next[0] * row[j]).norm() * (1.0 + 1e-12));
                }
            }
        }
    }
    let matching = c_seq
        .matrices()?
        .iter()
        .zip(e_seq.matrices()?)
        .map(|(x, y)| {
            let (u, v) = (x.first_column(), y.first_column());
            (0..u.dim()).map(|i| (u.get(i) - v.get(i)).norm() / u.get(i).norm().max(1.0)).fold(0.0f64, f64::max)
        })
        .fold(0.0f64, f64::max);
    let placed = [c_seq, e_seq].iter().map(|s| well_placed_check(s).map(|(v, _)| v.is_violated() as u8 as f64)).sum::<Result<f64>>()?;
    Ok(vec![
        group("product-one", product, 1e-9),
        group("modulus-caps", moduli, 1e-12),
        group("recursive-caps", recursive, 1e-12),
        group("matching", matching, 1e-10),
        group("well-placed", placed, 0.0),
    ])
}

/// B(k) = diag(−i, i)·A(k); it has det 1 and the same ratio moduli as A.
pub fn phase_partner(a: &DiscreteSequence) -> Result<DiscreteSequence> {
    let n = a.ambient().n();
    let mut phases = vec![c(1.0, 0.0); n];
    phases[0] = c(0.0, -1.0);
    phases[1] = c(0.0, 1.0);
    let mats = a.matrices()?.iter().map(|m| SLMatrix::new(scale_rows(m, &phases))).collect::<Result<_>>()?;
    DiscreteSequence::from_matrices(mats, a.generator().cloned())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    /// max over k and entries of |φ(E(k)) − C(k)|.
    pub max_residual: f64,
}

/// φ(x) = x·F(x·e₁) with φ(E(k)) = C(k), for prefixes whose first columns agree.
pub fn equivalence_automorphism(
    c_seq: &DiscreteSequence,
    e_seq: &DiscreteSequence,
    seed: &SeedStream,
) -> Result<(AutomorphismRep, EquivalenceReport)> {
    let (cm, em) = (c_seq.matrices()?, e_seq.matrices()?);
    if cm.len() != em.len() {
        return Err(Error::DimensionMismatch(format!("prefix lengths {} and {}", cm.len(), em.len())));
    }
    if cm.is_empty() {
        return Ok((AutomorphismRep::Identity, EquivalenceReport { max_residual: 0.0 }));
    }
    let targets: Vec<QElement> = cm.iter().zip(&em).map(|(x, y)| q_factor(x, y)).collect::<Result<_>>()?;
    let bases: Vec<CVector> = em.iter().map(|m| m.first_column()).collect();
    let n = c_seq.ambient().n();
    let phi = if targets.iter().all(|g| g.matrix().matrix().max_dist(&CMatrix::identity(n)) <= 1e-14) {
        AutomorphismRep::Identity
    } else {
        AutomorphismRep::BundlePush(build_push(&bases, &targets, seed, 1e-9)?)
    };
    let mut max_residual = 0.0f64;
    for (x, y) in cm.iter().zip(&em) {
        max_residual = max_residual.max(phi.apply_matrix(y)?.matrix().max_dist(x.matrix()));
    }
    Ok((phi, EquivalenceReport { max_residual }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnionParts {
    pub parts: Vec<DiscreteSequence>,
    /// Original indices of the members of each part.
    pub indices: Vec<Vec<usize>>,
}

/// Part k collects the points whose k-th column has the largest norm, ties going to the
/// smallest column.
pub fn union_decompose(d: &DiscreteSequence) -> Result<UnionParts> {
    let mats = d.matrices()?;
    let n = d.ambient().n();
    let mut indices = vec![Vec::new(); n];
    let mut members: Vec<Vec<SLMatrix>> = vec![Vec::new(); n];
    for (i, m) in mats.iter().enumerate() {
        let norms: Vec<f64> = (0..n).map(|k| m.matrix().column_norm(k)).collect();
        let mut best = 0;
        for k in 1..n {
            if norms[k] > norms[best] {
                best = k;
            }
        }
        indices[best].push(i);
        members[best].push((*m).clone());
    }
    let parts = members
        .into_iter()
        .map(|ms| {
            if ms.is_empty() {
                DiscreteSequence::new(AmbientSpace::SLn(n), Vec::new(), None)
            } else {
                DiscreteSequence::from_matrices(ms, None)
            }
        })
        .collect::<Result<_>>()?;
    Ok(UnionParts { parts, indices })
}

/// Lower-triangular matrix of ones.
pub fn ones_lower(n: usize) -> CMatrix {
    let mut a = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            a.set(i, j, c(1.0, 0.0));
        }
    }
    a
}

/// ψ(M) = M·A sends diagonal M to a matrix whose first column is the diagonal of M.
pub fn torus_embed(diags: &[SLMatrix], min_gap: f64) -> Result<(Vec<CVector>, Verdict)> {
    let n = diags.first().map_or(2, |m| m.n());
    let a = ones_lower(n);
    let mut images = Vec::with_capacity(diags.len());
    for (i, m) in diags.iter().enumerate() {
        if m.n() != n {
            return Err(Error::DimensionMismatch("torus points of different sizes".into()));
        }
        if !m.is_diagonal(1e-10) {
            return Err(Error::NotDiagonal(i));
        }
        let v = m.matrix().mul(&a).column(0);
        let diag: Vec<C64> = (0..n).map(|j| m.get(j, j)).collect();
        if v.entries().iter().zip(&diag).any(|(x, y)| (x - y).norm() > 1e-12 * y.norm().max(1.0)) {
            return Err(Error::DegenerateConfiguration(format!("first column of point {i} leaves the diagonal")));
        }
        let prod: C64 = v.entries().iter().product();
        if (prod - 1.0).norm() > 1e-9 {
            return Err(Error::DegenerateConfiguration(format!("image {i} has coordinate product {prod}")));
        }
        images.push(v);
    }
    if images.is_empty() {
        return Ok((images, Verdict::consistent("empty prefix")));
    }
    let seq = DiscreteSequence::from_vectors(AmbientSpace::Cn(n), images.clone(), None)?;
    let verdict = discreteness_check(&seq, min_gap)?;
    Ok((images, verdict))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShearFamily {
    /// F(y) = [[1, r(s)], [0, I]] with r of degree ≤ 2 in s = u·y.
    General,
    /// r even in s, hence F(ωy) = F(y) when ω = −1.
    EvenOnly,
}

/// ω with ωⁿ = 1 and x⁻¹y = ω·I entrywise within tol, if any.
pub fn central_ratio(x: &SLMatrix, y: &SLMatrix, tol: f64) -> Option<C64> {
    let q = x.inverse().matrix().mul(y.matrix());
    let n = x.n();
    (0..n)
        .map(|m| C64::from_polar(1.0, std::f64::consts::TAU * m as f64 / n as f64))
        .find(|&w| q.max_dist(&CMatrix::diag(&vec![w; n])) <= tol)
}

pub fn central_pairs(mats: &[&SLMatrix], tol: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..mats.len() {
        for j in i + 1..mats.len() {
            if central_ratio(mats[i], mats[j], tol).is_some() {
                out.push((i, j));
            }
        }
    }
    out
}

pub const CENTER_TOL: f64 = 1e-8;

fn random_shear(n: usize, family: ShearFamily, seed: &SeedStream) -> BundlePushAut {
    let mut rng = seed.rng();
    let u = unit_vector(n, &mut rng).into_entries();
    let coeffs = (1..n)
        .map(|_| {
            let mut cs: Vec<C64> = (0..3).map(|_| gaussian_c(&mut rng)).collect();
            if family == ShearFamily::EvenOnly {
                cs[1] = c(0.0, 0.0);
            }
            Polynomial::from_coeffs(cs)
        })
        .collect();
    BundlePushAut { n, bundle: "first-column".into(), separator_u: u, coeffs, log_coeffs: Vec::new() }
}

/// Seeded shears x ↦ x·F(x·e₁) until no two points differ by a central element.
pub fn center_separate(
    d: &DiscreteSequence,
    tries: usize,
    seed: &SeedStream,
    family: ShearFamily,
) -> Result<(AutomorphismRep, Verdict)> {
    let mats = d.matrices()?;
    let pairs = central_pairs(&mats, CENTER_TOL);
    if pairs.is_empty() {
        return Ok((AutomorphismRep::Identity, Verdict::certified("no-central-pairs", "no two points differ by a central element")));
    }
    let n = d.ambient().n();
    let mut stuck = pairs[0];
    for attempt in 0..tries {
        let push = random_shear(n, family, &seed.fork("center").fork_index(attempt as u64));
        let images: Vec<SLMatrix> = mats.iter().map(|m| push.apply(m)).collect::<Result<_>>()?;
        let refs: Vec<&SLMatrix> = images.iter().collect();
        match central_pairs(&refs, CENTER_TOL).first() {
            None => {
                let v = Verdict::consistent(format!("{} central pairs separated after {} shears", pairs.len(), attempt + 1));
                return Ok((AutomorphismRep::BundlePush(push), v));
            }
            Some(&p) => stuck = p,
        }
    }
    Ok((
        AutomorphismRep::Identity,
        Verdict::violated(vec![stuck.0, stuck.1], format!("points {} and {} still differ by a central element after {tries} shears", stuck.0, stuck.1)),
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OneParamSubgroup {
    Diagonal { n: usize },
    /// t ↦ exp(tN) with N nilpotent.
    Unipotent { generator: CMatrix },
}

fn frobenius_dot(a: &CMatrix, b: &CMatrix) -> C64 {
    a.data().iter().zip(b.data()).map(|(x, y)| x * y.conj()).sum()
}

pub fn one_param_check(d: &DiscreteSequence, subgroup: &OneParamSubgroup, min_gap: f64) -> Result<Verdict> {
    let mats = d.matrices()?;
    match subgroup {
        OneParamSubgroup::Diagonal { n } => {
            if let Some(i) = mats.iter().position(|m| m.n() != *n || !m.is_diagonal(1e-8)) {
                return Err(Error::NotOnSubgroup(i));
            }
            let owned: Vec<SLMatrix> = mats.iter().map(|m| (*m).clone()).collect();
            torus_embed(&owned, min_gap).map(|(_, v)| v)
        }
        OneParamSubgroup::Unipotent { generator: nmat } => {
            let n = nmat.rows();
            if nmat.cols() != n {
                return Err(Error::DimensionMismatch("generator must be square".into()));
            }
            let mut pow = nmat.clone();
            for _ in 1..n {
                pow = pow.mul(nmat);
            }
            if pow.max_abs() > 1e-12 * nmat.max_abs().powi(n as i32).max(1.0) {
                return Err(Error::BadParams("unipotent generator must be nilpotent".into()));
            }
            let col = (0..n).find(|&j| nmat.column_norm(j) > 0.0).ok_or(Error::AllColumnsConstant)?;
            let nn = frobenius_dot(nmat, nmat);
            let mut images = Vec::with_capacity(mats.len());
            for (i, m) in mats.iter().enumerate() {
                if m.n() != n {
                    return Err(Error::NotOnSubgroup(i));
                }
                let log = m.matrix().log().map_err(|_| Error::NotOnSubgroup(i))?;
                let t = frobenius_dot(&log, nmat) / nn;
                let back = nmat.scale(t).exp();
                if back.max_dist(m.matrix()) > 1e-8 * m.matrix().max_abs().max(1.0) {
                    return Err(Error::NotOnSubgroup(i));
                }
                images.push(m.column(col).into_entries());
            }
            properness_check_auto(&images, min_gap, 1)
        }
    }
}

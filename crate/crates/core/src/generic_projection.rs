//! Monte-Carlo side of generic projections: Haar sampling on SU(n), small-ball measures of
//! the conjugation action of SU(2) on SL₂ seen through the torus-invariant embedding,
//! threshold radii, the Ω_D pass fraction and greedy selection of tame subsequences.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checks::{fiber_tol, first_close_pair, group_fibers};
use crate::error::{Error, Result};
use crate::exhaustion::{exhaust_eval, ExhaustionFunction};
use crate::linalg::{c, CMatrix, SLMatrix, C64};
use crate::rng::{haar_unitary, SeedStream};
use crate::sln_tame::{central_ratio, CENTER_TOL};
use crate::space::DiscreteSequence;

/// Draw `counter` of the sampler is a pure function of (n, seed, counter).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HaarSampler {
    pub n: usize,
    pub seed: u64,
    pub counter: u64,
}

impl HaarSampler {
    pub fn new(n: usize, seed: u64) -> Self {
        HaarSampler { n, seed, counter: 0 }
    }

    pub fn at(&self, counter: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(counter);
        haar_su(self.n, &mut rng)
    }

    pub fn next_draw(&mut self) -> CMatrix {
        let u = self.at(self.counter);
        self.counter += 1;
        u
    }

    /// Draws counter..counter+count, in order.
    pub fn batch(&self, count: usize) -> Vec<CMatrix> {
        (0..count as u64).into_par_iter().map(|i| self.at(self.counter + i)).collect()
    }
}

/// Ginibre QR into U(n), then the determinant phase divided out.
pub fn haar_su<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let u = haar_unitary(n, rng);
    let phase = u.det();
    let fix = (phase / phase.norm()).powf(-1.0 / n as f64);
    u.scale(fix)
}

/// (ac, ad, bc, bd) for g = [[a, c], [b, d]]; invariant under g ↦ g·diag(t, 1/t).
pub fn invariant_embedding(g: &CMatrix) -> [C64; 4] {
    let (a, b, cc, d) = (g.get(0, 0), g.get(1, 0), g.get(0, 1), g.get(1, 1));
    [a * cc, a * d, b * cc, b * d]
}

pub fn embedding_norm(e: &[C64; 4]) -> f64 {
    e.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// How a sampled k acts on g before the embedding is taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Action {
    /// k⁻¹·g·k
    #[default]
    Conjugation,
    /// k·g; the embedding norm is ‖g e₁‖·‖g e₂‖ for every k, so estimates are 0 or 1.
    LeftTranslation,
}

impl Action {
    pub fn tag(&self) -> &'static str {
        match self {
            Action::Conjugation => "conjugation",
            Action::LeftTranslation => "left-translation",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "conjugation" => Ok(Action::Conjugation),
            "left-translation" | "translation" => Ok(Action::LeftTranslation),
            other => Err(Error::BadParams(format!("unknown action {other}"))),
        }
    }

    pub fn act(&self, k: &CMatrix, g: &CMatrix) -> CMatrix {
        match self {
            Action::Conjugation => k.conj_transpose().mul(g).mul(k),
            Action::LeftTranslation => k.mul(g),
        }
    }
}

/// ‖embedding(k⁻¹·g·k)‖ for each sampled k.
pub fn conjugation_norms(g: &CMatrix, ks: &[CMatrix]) -> Vec<f64> {
    action_norms(Action::Conjugation, g, ks)
}

pub fn action_norms(action: Action, g: &CMatrix, ks: &[CMatrix]) -> Vec<f64> {
    ks.par_iter().map(|k| embedding_norm(&invariant_embedding(&action.act(k, g)))).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

impl MCEstimate {
    pub fn from_count(hits: usize, samples: usize, seed: u64) -> Self {
        let p = if samples == 0 { 0.0 } else { hits as f64 / samples as f64 };
        let stderr = if samples == 0 { 0.0 } else { (p * (1.0 - p) / samples as f64).sqrt() };
        MCEstimate { estimate: p, stderr, samples, seed }
    }
}

fn count_below(norms: &[f64], r: f64) -> usize {
    norms.iter().filter(|&&x| x < r).count()
}

/// μ{k ∈ SU(2) : ‖embedding(k⁻¹gk)‖ < r}.
pub fn measure_estimate(g: &SLMatrix, r: f64, samples: usize, seed: u64) -> Result<MCEstimate> {
    measure_estimate_with(Action::Conjugation, g, r, samples, seed)
}

pub fn measure_estimate_with(action: Action, g: &SLMatrix, r: f64, samples: usize, seed: u64) -> Result<MCEstimate> {
    if g.n() != 2 {
        return Err(Error::DimensionMismatch("the shipped action is SU(2) on SL2".into()));
    }
    if g.matrix().max_abs() == 0.0 {
        return Err(Error::ZeroVector);
    }
    let ks = HaarSampler::new(2, seed).batch(samples);
    Ok(MCEstimate::from_count(count_below(&action_norms(action, g.matrix(), &ks), r), samples, seed))
}

/// k₁·diag(R, 1/R)·k₂ with k₁, k₂ from the probe's own fork: a point of operator norm R.
pub fn sphere_probe(radius: f64, probe: usize, seed: &SeedStream) -> Result<SLMatrix> {
    if !(radius >= 1.0 && radius.is_finite()) {
        return Err(Error::BadParams(format!("sphere radius {radius} must be at least 1")));
    }
    let mut rng = seed.fork("probe").fork_index(probe as u64).rng();
    let (k1, k2) = (haar_su(2, &mut rng), haar_su(2, &mut rng));
    let d = CMatrix::diag(&[c(radius, 0.0), c(1.0 / radius, 0.0)]);
    SLMatrix::with_tol(k1.mul(&d).mul(&k2), 1e-6)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GEstimate {
    pub value: f64,
    pub per_probe: Vec<MCEstimate>,
}

/// max over probes v on the sphere of the given radius of the measure estimate at r.
pub fn g_estimate(sphere_radius: f64, r: f64, probes: usize, samples: usize, seed: u64) -> Result<GEstimate> {
    if !(r > 0.0) {
        return Err(Error::BadParams(format!("radius {r} must be positive")));
    }
    let stream = SeedStream::new(seed);
    let ks = HaarSampler::new(2, seed).batch(samples);
    let mut per_probe = Vec::with_capacity(probes);
    for p in 0..probes {
        let v = sphere_probe(sphere_radius, p, &stream)?;
        let hits = count_below(&conjugation_norms(v.matrix(), &ks), r);
        per_probe.push(MCEstimate::from_count(hits, samples, seed));
    }
    let value = per_probe.iter().map(|e| e.estimate).fold(0.0, f64::max);
    Ok(GEstimate { value, per_probe })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    pub samples: usize,
    pub probes: usize,
    pub seed: u64,
    pub cap: f64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig { samples: 10_000, probes: 4, seed: 0, cap: 1e12 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    #[serde(rename = "R")]
    pub r_hat: Vec<f64>,
    pub delta: Vec<f64>,
    pub config: ThresholdConfig,
}

/// Relative width at which the bisection on log R stops.
pub const THRESHOLD_RTOL: f64 = 1e-6;

/// For n = 1..=levels, the smallest R (up to THRESHOLD_RTOL) at which every probe on the sphere
/// of radius R has estimate + 3·stderr < 2^{-(n+1)} at r = n, then a running maximum.
pub fn threshold_estimate(levels: usize, config: &ThresholdConfig) -> Result<ThresholdEstimate> {
    if levels == 0 {
        return Err(Error::BadParams("at least one level".into()));
    }
    let stream = SeedStream::new(config.seed);
    let ks = HaarSampler::new(2, config.seed).batch(config.samples);
    let passes = |radius: f64, n: usize, delta: f64| -> Result<bool> {
        for p in 0..config.probes {
            let v = sphere_probe(radius, p, &stream)?;
            let e = MCEstimate::from_count(count_below(&conjugation_norms(v.matrix(), &ks), n as f64), config.samples, config.seed);
            if e.estimate + 3.0 * e.stderr >= delta {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let mut r_hat = Vec::with_capacity(levels);
    let mut delta = Vec::with_capacity(levels);
    for n in 1..=levels {
        let d = 0.5f64.powi(n as i32 + 1);
        let mut hi = 1.0f64;
        let mut lo;
        if !passes(hi, n, d)? {
            loop {
                lo = hi;
                hi *= 2.0;
                if hi > config.cap {
                    return Err(Error::SearchExhausted { level: n });
                }
                if passes(hi, n, d)? {
                    break;
                }
            }
            while hi / lo > 1.0 + THRESHOLD_RTOL {
                let mid = (lo * hi).sqrt();
                if passes(mid, n, d)? {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
        }
        let prev = r_hat.last().copied().unwrap_or(0.0f64);
        r_hat.push(hi.max(prev));
        delta.push(d);
    }
    Ok(ThresholdEstimate { r_hat, delta, config: config.clone() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaFailure {
    pub counter: u64,
    pub pair: (usize, usize),
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaReport {
    pub pass_fraction: f64,
    pub samples: usize,
    pub failures: Vec<OmegaFailure>,
}

/// Fraction of sampled k for which x ↦ embedding(k⁻¹xk) separates the prefix by min_gap,
/// collisions being allowed only between points that differ by a central element.
pub fn omega_check(d: &DiscreteSequence, samples: usize, seed: u64, min_gap: f64) -> Result<OmegaReport> {
    let mats = d.matrices()?;
    if d.ambient().n() != 2 {
        return Err(Error::DimensionMismatch("omega check is implemented for SL2".into()));
    }
    let ks = HaarSampler::new(2, seed).batch(samples);
    let results: Vec<Option<OmegaFailure>> = ks
        .par_iter()
        .enumerate()
        .map(|(i, k)| {
            let kh = k.conj_transpose();
            let images: Vec<Vec<C64>> = mats.iter().map(|m| invariant_embedding(&kh.mul(m.matrix()).mul(k)).to_vec()).collect();
            let fibers = group_fibers(&images, fiber_tol(&images).max(min_gap * 1e-3));
            for f in &fibers {
                for a in 0..f.len() {
                    for b in a + 1..f.len() {
                        if central_ratio(mats[f[a]], mats[f[b]], CENTER_TOL).is_none() {
                            return Some(OmegaFailure { counter: i as u64, pair: (f[a], f[b]), reason: "non-central collision".into() });
                        }
                    }
                }
            }
            let reps: Vec<Vec<C64>> = fibers.iter().map(|f| images[f[0]].clone()).collect();
            first_close_pair(&reps, min_gap).map(|(a, b, dist)| OmegaFailure {
                counter: i as u64,
                pair: (fibers[a][0], fibers[b][0]),
                reason: format!("images at distance {dist:e}"),
            })
        })
        .collect();
    let failures: Vec<OmegaFailure> = results.into_iter().flatten().collect();
    let pass_fraction = if samples == 0 { 1.0 } else { 1.0 - failures.len() as f64 / samples as f64 };
    Ok(OmegaReport { pass_fraction, samples, failures })
}

/// Greedy x₁, x₂, … in prefix order with ρ(xₙ) > R̂ₙ; returns the selected indices.
pub fn select_tame_indices(values: &[f64], thresholds: &[f64]) -> Result<Vec<usize>> {
    let mut picked = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match thresholds.get(picked.len()) {
            Some(&r) if v > r => picked.push(i),
            Some(_) => {}
            None => break,
        }
    }
    if picked.is_empty() {
        return Err(Error::PrefixTooBounded);
    }
    Ok(picked)
}

pub fn select_tame_subset(
    d: &DiscreteSequence,
    rho: ExhaustionFunction,
    thresholds: &ThresholdEstimate,
) -> Result<(DiscreteSequence, Vec<usize>)> {
    let values: Vec<f64> = d.points().iter().map(|p| exhaust_eval(rho, p, d.ambient())).collect::<Result<_>>()?;
    let idx = select_tame_indices(&values, &thresholds.r_hat)?;
    let pts = idx.iter().map(|&i| d.points()[i].clone()).collect();
    let out = DiscreteSequence::new(d.ambient(), pts, d.generator().cloned())?;
    Ok((out, idx))
}

/// Two-sample Kolmogorov–Smirnov statistic and its critical value at level alpha.
pub fn ks_two_sample(a: &[f64], b: &[f64], alpha: f64) -> (f64, f64) {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let crit = (-(alpha / 2.0).ln() / 2.0).sqrt() * ((n + m) as f64 / (n * m) as f64).sqrt();
    (d, crit)
}

pub const CSV_HEADER: &str = "action,v_norm,r,samples,seed,estimate,stderr";

pub fn csv_row(action: &str, v_norm: f64, r: f64, e: &MCEstimate) -> String {
    format!("{action},{v_norm},{r},{},{},{},{}", e.samples, e.seed, e.estimate, e.stderr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampler_replays_and_is_special_unitary() {
        let s = HaarSampler::new(3, 42);
        let u = s.at(7);
        assert_eq!(u, s.at(7));
        assert!(u.conj_transpose().mul(&u).max_dist(&CMatrix::identity(3)) <= 1e-10);
        assert!((u.det() - 1.0).norm() <= 1e-10);
        let mut t = HaarSampler::new(3, 42);
        let first = t.next_draw();
        assert_eq!(first, s.at(0));
        assert_eq!(t.counter, 1);
    }

    #[test]
    fn embedding_is_torus_invariant() {
        let g = SLMatrix::from_real_rows(&[&[2.0, 1.0], &[3.0, 2.0]]).unwrap();
        let t = c(0.3, 1.7);
        let gt = g.matrix().mul(&CMatrix::diag(&[t, t.inv()]));
        let (e, f) = (invariant_embedding(g.matrix()), invariant_embedding(&gt));
        for (x, y) in e.iter().zip(&f) {
            assert!((x - y).norm() <= 1e-12);
        }
        assert!((e[1] - e[2] - 1.0).norm() <= 1e-10);
    }

    #[test]
    fn measure_examples() {
        let g = SLMatrix::from_real_rows(&[&[10.0, 0.0], &[0.0, 0.1]]).unwrap();
        assert_eq!(measure_estimate(&g, 1e9, 200, 1).unwrap().estimate, 1.0);
        assert_eq!(measure_estimate(&g, 0.0, 200, 1).unwrap().estimate, 0.0);
    }

    #[test]
    fn selection_examples() {
        let th = [5.0, 50.0, 500.0];
        assert_eq!(select_tame_indices(&[1.0, 10.0, 100.0, 1000.0], &th).unwrap(), vec![1, 2, 3]);
        assert_eq!(select_tame_indices(&[1.0, 2.0], &th).unwrap_err(), Error::PrefixTooBounded);
        assert_eq!(select_tame_indices(&[1.0, 6.0, 7.0], &th).unwrap(), vec![1]);
    }

    #[test]
    fn ks_matches_hand_computation() {
        let (d, _) = ks_two_sample(&[1.0, 2.0, 3.0], &[2.5, 3.5, 4.5], 0.01);
        assert!((d - 2.0 / 3.0).abs() < 1e-15);
    }
}

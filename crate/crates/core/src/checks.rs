//! Three-valued verdicts and the finite-prefix discreteness / properness checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::space::DiscreteSequence;

pub const DEFAULT_MIN_GAP: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "kebab-case")]
pub enum VerdictState {
    Violated { witness: Vec<usize> },
    ConsistentUpToPrefix,
    Certified { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    #[serde(flatten)]
    pub state: VerdictState,
    pub detail: String,
}

impl Verdict {
    pub fn violated(witness: Vec<usize>, detail: impl Into<String>) -> Self {
        assert!(!witness.is_empty(), "a violation needs a witness");
        Verdict { state: VerdictState::Violated { witness }, detail: detail.into() }
    }

    pub fn consistent(detail: impl Into<String>) -> Self {
        Verdict { state: VerdictState::ConsistentUpToPrefix, detail: detail.into() }
    }

    pub fn certified(reason: &str, detail: impl Into<String>) -> Self {
        Verdict { state: VerdictState::Certified { reason: reason.to_string() }, detail: detail.into() }
    }

    pub fn is_violated(&self) -> bool {
        matches!(self.state, VerdictState::Violated { .. })
    }

    pub fn is_consistent(&self) -> bool {
        matches!(self.state, VerdictState::ConsistentUpToPrefix)
    }

    pub fn is_certified(&self) -> bool {
        matches!(self.state, VerdictState::Certified { .. })
    }

    pub fn witness(&self) -> Option<&[usize]> {
        match &self.state {
            VerdictState::Violated { witness } => Some(witness),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self.state {
            VerdictState::Violated { .. } => "violated",
            VerdictState::ConsistentUpToPrefix => "consistent-up-to-prefix",
            VerdictState::Certified { .. } => "certified",
        }
    }
}

fn max_dist(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

/// Real coordinate (entry index, imaginary flag) with the widest spread, used as sweep key.
fn sweep_axis(points: &[Vec<C64>]) -> (usize, bool) {
    let dim = points.first().map_or(0, |p| p.len());
    let mut best = (0, false);
    let mut best_spread = -1.0;
    for e in 0..dim {
        for imag in [false, true] {
            let key = |p: &Vec<C64>| if imag { p[e].im } else { p[e].re };
            let (lo, hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(key(p)), hi.max(key(p)))
            });
            if hi - lo > best_spread {
                best_spread = hi - lo;
                best = (e, imag);
            }
        }
    }
    best
}

/// Calls `visit(i, j, dist)` for every pair with max-norm distance below `gap` (i < j).
pub(crate) fn for_close_pairs(points: &[Vec<C64>], gap: f64, mut visit: impl FnMut(usize, usize, f64)) {
    if points.len() < 2 {
        return;
    }
    let (e, imag) = sweep_axis(points);
    let key = |i: usize| if imag { points[i][e].im } else { points[i][e].re };
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| key(a).total_cmp(&key(b)).then(a.cmp(&b)));
    for (pos, &i) in order.iter().enumerate() {
        for &j in &order[pos + 1..] {
            if key(j) - key(i) >= gap {
                break;
            }
            let d = max_dist(&points[i], &points[j]);
            if d < gap {
                visit(i.min(j), i.max(j), d);
            }
        }
    }
}

/// The close pair that appears first in prefix order: minimal later index, then minimal earlier index.
pub fn first_close_pair(points: &[Vec<C64>], gap: f64) -> Option<(usize, usize, f64)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for_close_pairs(points, gap, |i, j, d| {
        if best.map_or(true, |(bi, bj, _)| (j, i) < (bj, bi)) {
            best = Some((i, j, d));
        }
    });
    best
}

pub fn discreteness_check(d: &DiscreteSequence, min_gap: f64) -> Result<Verdict> {
    if d.is_empty() {
        return Err(Error::Empty);
    }
    if !(min_gap > 0.0) {
        return Err(Error::BadParams("minGap must be positive".into()));
    }
    let pts: Vec<Vec<C64>> = d.points().iter().map(|p| p.entries()).collect();
    Ok(match first_close_pair(&pts, min_gap) {
        Some((i, j, dist)) => Verdict::violated(vec![i, j], format!("points {i} and {j} at max-norm distance {dist:e} < {min_gap:e}")),
        None => Verdict::consistent(format!("{} points pairwise separated by at least {min_gap:e}", d.len())),
    })
}

/// Groups image indices whose images agree within `tol` (transitively).
pub fn group_fibers(images: &[Vec<C64>], tol: f64) -> Vec<Vec<usize>> {
    let n = images.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for_close_pairs(images, tol, |i, j, _| {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    });
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

/// Default fiber-identification tolerance for a set of images.
pub fn fiber_tol(images: &[Vec<C64>]) -> f64 {
    let scale = images.iter().flatten().fold(1.0f64, |m, z| m.max(z.norm()));
    1e-12 * scale
}

pub fn properness_check(images: &[Vec<C64>], fibers: &[Vec<usize>], min_gap: f64, max_fiber: usize) -> Result<Verdict> {
    if images.is_empty() {
        return Err(Error::Empty);
    }
    if !(min_gap > 0.0) {
        return Err(Error::BadParams("minGap must be positive".into()));
    }
    if let Some(big) = fibers.iter().find(|f| f.len() > max_fiber) {
        return Ok(Verdict::violated(big.clone(), format!("fiber of size {} exceeds {max_fiber}", big.len())));
    }
    let reps: Vec<usize> = fibers.iter().map(|f| f[0]).collect();
    let rep_images: Vec<Vec<C64>> = reps.iter().map(|&i| images[i].clone()).collect();
    Ok(match first_close_pair(&rep_images, min_gap) {
        Some((a, b, dist)) => {
            let (i, j) = (reps[a].min(reps[b]), reps[a].max(reps[b]));
            Verdict::violated(vec![i, j], format!("images {i} and {j} at distance {dist:e} < {min_gap:e}"))
        }
        None => Verdict::consistent(format!("{} fibers, largest {}", fibers.len(), fibers.iter().map(Vec::len).max().unwrap_or(0))),
    })
}

/// Groups fibers with `fiber_tol` and runs `properness_check`.
pub fn properness_check_auto(images: &[Vec<C64>], min_gap: f64, max_fiber: usize) -> Result<Verdict> {
    let fibers = group_fibers(images, fiber_tol(images));
    properness_check(images, &fibers, min_gap, max_fiber)
}

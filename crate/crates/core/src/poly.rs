//! One-variable complex polynomials stored in a shifted Newton basis.
//!
//! p(t) = Σ_k c_k Π_{j<k} (s − x_j) with s = (t − center)/scale. The monomial basis is the
//! special case center = 0, scale = 1, x_j = 0.

use serde::{Deserialize, Serialize};

use crate::checks::first_close_pair;
use crate::error::{Error, Result};
use crate::linalg::{c, is_finite, C64};

pub const DEFAULT_DISTINCT_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    center: C64,
    scale: f64,
    nodes: Vec<C64>,
    coeffs: Vec<C64>,
}

fn zero() -> C64 {
    c(0.0, 0.0)
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial { center: zero(), scale: 1.0, nodes: Vec::new(), coeffs: Vec::new() }
    }

    pub fn constant(value: C64) -> Self {
        Polynomial::from_coeffs(vec![value])
    }

    /// Monomial coefficients, lowest degree first.
    pub fn from_coeffs(coeffs: Vec<C64>) -> Self {
        let mut p = Polynomial { center: zero(), scale: 1.0, nodes: Vec::new(), coeffs };
        p.trim();
        p.nodes = vec![zero(); p.coeffs.len().saturating_sub(1)];
        p
    }

    pub fn from_real_coeffs(coeffs: &[f64]) -> Self {
        Polynomial::from_coeffs(coeffs.iter().map(|&x| c(x, 0.0)).collect())
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&zero()) {
            self.coeffs.pop();
        }
        self.nodes.truncate(self.coeffs.len().saturating_sub(1));
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.scale.is_finite()
            && self.scale > 0.0
            && is_finite(self.center)
            && self.nodes.len() == self.coeffs.len().saturating_sub(1)
            && self.nodes.iter().chain(&self.coeffs).all(|z| is_finite(*z));
        if ok {
            Ok(())
        } else {
            Err(Error::BadParams("malformed polynomial".into()))
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Formal degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, t: C64) -> C64 {
        let Some((last, rest)) = self.coeffs.split_last() else {
            return zero();
        };
        let s = (t - self.center) / self.scale;
        let mut v = *last;
        for k in (0..rest.len()).rev() {
            v = v * (s - self.nodes[k]) + rest[k];
        }
        v
    }

    /// Monomial coefficients in t, lowest degree first.
    pub fn coefficients(&self) -> Vec<C64> {
        let Some((last, rest)) = self.coeffs.split_last() else {
            return Vec::new();
        };
        // Newton form in s -> monomial in s
        let mut ps: Vec<C64> = vec![*last];
        for k in (0..rest.len()).rev() {
            ps = mul_linear(&ps, -self.nodes[k], c(1.0, 0.0));
            ps[0] += rest[k];
        }
        // s = (t - center)/scale
        let (a0, a1) = (-self.center / self.scale, c(1.0 / self.scale, 0.0));
        let mut pt: Vec<C64> = vec![ps[ps.len() - 1]];
        for k in (0..ps.len() - 1).rev() {
            pt = mul_linear(&pt, a0, a1);
            pt[0] += ps[k];
        }
        pt
    }

    pub fn neg(&self) -> Polynomial {
        let mut p = self.clone();
        p.coeffs.iter_mut().for_each(|z| *z = -*z);
        p
    }

    pub fn scaled(&self, k: C64) -> Polynomial {
        let mut p = self.clone();
        p.coeffs.iter_mut().for_each(|z| *z *= k);
        p.trim();
        p
    }

    /// Sum; exact when both share a basis, otherwise through monomial coefficients.
    pub fn add(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let same_basis = self.center == other.center
            && self.scale == other.scale
            && self.nodes.iter().zip(&other.nodes).all(|(a, b)| a == b);
        if same_basis {
            let (long, short) = if self.coeffs.len() >= other.coeffs.len() { (self, other) } else { (other, self) };
            let mut p = long.clone();
            for (i, z) in short.coeffs.iter().enumerate() {
                p.coeffs[i] += z;
            }
            p.trim();
            return p;
        }
        let (a, b) = (self.coefficients(), other.coefficients());
        let mut out = vec![zero(); a.len().max(b.len())];
        for (i, z) in a.iter().enumerate() {
            out[i] += z;
        }
        for (i, z) in b.iter().enumerate() {
            out[i] += z;
        }
        Polynomial::from_coeffs(out)
    }

    pub fn constant_value(&self) -> Option<C64> {
        match self.coeffs.len() {
            0 => Some(zero()),
            1 => Some(self.coeffs[0]),
            _ => None,
        }
    }
}

fn mul_linear(p: &[C64], a0: C64, a1: C64) -> Vec<C64> {
    let mut out = vec![zero(); p.len() + 1];
    for (i, z) in p.iter().enumerate() {
        out[i] += z * a0;
        out[i + 1] += z * a1;
    }
    out
}

/// Leja ordering: start at the largest modulus, then maximize the product of distances.
fn leja_order(xs: &[C64]) -> Vec<usize> {
    let n = xs.len();
    if n == 0 {
        return Vec::new();
    }
    let first = (0..n).max_by(|&a, &b| xs[a].norm().total_cmp(&xs[b].norm()).then(b.cmp(&a))).unwrap();
    let mut order = vec![first];
    let mut used = vec![false; n];
    used[first] = true;
    let mut logprod: Vec<f64> = xs.iter().map(|x| (x - xs[first]).norm().ln()).collect();
    for _ in 1..n {
        let next = (0..n)
            .filter(|&i| !used[i])
            .max_by(|&a, &b| logprod[a].total_cmp(&logprod[b]).then(b.cmp(&a)))
            .unwrap();
        used[next] = true;
        order.push(next);
        for i in 0..n {
            if !used[i] {
                logprod[i] += (xs[i] - xs[next]).norm().ln();
            }
        }
    }
    order
}

/// Interpolating polynomial of degree < #nodes (Newton divided differences on Leja-ordered,
/// affinely rescaled abscissae).
pub fn interpolate_nodes(nodes: &[(C64, C64)], distinct_tol: f64) -> Result<Polynomial> {
    if nodes.is_empty() {
        return Ok(Polynomial::zero());
    }
    if nodes.iter().any(|(x, y)| !is_finite(*x) || !is_finite(*y)) {
        return Err(Error::NonFinite("interpolation node"));
    }
    let abscissae: Vec<Vec<C64>> = nodes.iter().map(|(x, _)| vec![*x]).collect();
    if let Some((i, j, _)) = first_close_pair(&abscissae, distinct_tol) {
        return Err(Error::DuplicateNodes(i, j));
    }
    let n = nodes.len();
    let center = nodes.iter().map(|(x, _)| *x).sum::<C64>() / n as f64;
    let spread = nodes.iter().map(|(x, _)| (x - center).norm()).sum::<f64>() / n as f64;
    let scale = if spread > 0.0 { spread } else { 1.0 };
    let scaled: Vec<C64> = nodes.iter().map(|(x, _)| (x - center) / scale).collect();
    let order = leja_order(&scaled);
    let xs: Vec<C64> = order.iter().map(|&i| scaled[i]).collect();
    let divided = |mut cf: Vec<C64>| {
        for j in 1..n {
            for i in (j..n).rev() {
                cf[i] = (cf[i] - cf[i - 1]) / (xs[i] - xs[i - j]);
            }
        }
        cf
    };
    let cf = divided(order.iter().map(|&i| nodes[i].1).collect());
    let mut p = Polynomial { center, scale, nodes: xs[..n - 1].to_vec(), coeffs: cf };
    // one round of refinement against the node residuals, in the same basis
    let resid: Vec<C64> = order.iter().map(|&i| nodes[i].1 - p.eval(nodes[i].0)).collect();
    if resid.iter().all(|z| is_finite(*z)) {
        for (a, b) in p.coeffs.iter_mut().zip(divided(resid)) {
            *a += b;
        }
    }
    p.trim();
    p.validate().map_err(|_| Error::InterpolationIllConditioned("non-finite divided differences".into()))?;
    for (x, y) in nodes {
        let r = (p.eval(*x) - y).norm();
        if r > 1e-9 * (1.0 + y.norm()) {
            return Err(Error::InterpolationIllConditioned(format!("node residual {r:e}")));
        }
    }
    Ok(p)
}

use proptest::prelude::*;
use tamelab_core::generic_projection::*;
use tamelab_core::linalg::{c, CMatrix, SLMatrix};
use tamelab_core::rng::SeedStream;
use tamelab_core::space::DiscreteSequence;

fn diag(r: f64) -> SLMatrix {
    SLMatrix::new(CMatrix::diag(&[c(r, 0.0), c(1.0 / r, 0.0)])).unwrap()
}

// |u11|² of a Haar unitary in U(n) has density (n-1)(1-x)^{n-2} on [0, 1].
fn entry_moment_by_quadrature(n: usize) -> f64 {
    let m = 20_000;
    let h = 1.0 / m as f64;
    (0..m)
        .map(|i| {
            let x = (i as f64 + 0.5) * h;
            x * (n as f64 - 1.0) * (1.0 - x).powi(n as i32 - 2) * h
        })
        .sum()
}

#[test]
fn haar_entry_moment_matches_quadrature() {
    let oracle = entry_moment_by_quadrature(2);
    let draws = HaarSampler::new(2, 2024).batch(100_000);
    let mean = draws.iter().map(|u| u.get(0, 0).norm_sqr()).sum::<f64>() / draws.len() as f64;
    assert!((mean - oracle).abs() <= 0.005, "mean {mean}, oracle {oracle}");
    for u in draws.iter().step_by(997) {
        assert!(u.conj_transpose().mul(u).max_dist(&CMatrix::identity(2)) <= 1e-10);
        assert!((u.det() - 1.0).norm() <= 1e-10);
    }
}

#[test]
fn haar_left_invariance_ks() {
    let v = HaarSampler::new(2, 99).at(0);
    let a: Vec<f64> = HaarSampler::new(2, 1).batch(100_000).iter().map(|u| u.trace().re).collect();
    let b: Vec<f64> = HaarSampler::new(2, 2).batch(100_000).iter().map(|u| v.mul(u).trace().re).collect();
    let (d, crit) = ks_two_sample(&a, &b, 0.01);
    assert!(d < crit, "KS {d} >= {crit}");
}

// tr U = 2cos θ with θ distributed as (2/π)sin²θ on [0, π].
fn trace_cdf(t: f64) -> f64 {
    let th = (t / 2.0).clamp(-1.0, 1.0).acos();
    1.0 - (th - th.sin() * th.cos()) / std::f64::consts::PI
}

#[test]
fn haar_trace_matches_weyl_density() {
    let mut x: Vec<f64> = HaarSampler::new(2, 3).batch(200_000).iter().map(|u| u.trace().re).collect();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let d = x
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let f = trace_cdf(t);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    // one-sample 1% critical value
    assert!(d * n.sqrt() < 1.628, "{}", d * n.sqrt());
    let m4 = x.iter().map(|t| t.powi(4)).sum::<f64>() / n;
    assert!((m4 - 2.0).abs() < 0.03);
}

#[test]
fn haar_three_dimensional_moment() {
    let oracle = entry_moment_by_quadrature(3);
    assert!((oracle - 1.0 / 3.0).abs() < 1e-6);
    let draws = HaarSampler::new(3, 8).batch(40_000);
    let mean = draws.iter().map(|u| u.get(1, 2).norm_sqr()).sum::<f64>() / draws.len() as f64;
    assert!((mean - oracle).abs() <= 0.01);
}

#[test]
fn left_translation_estimates_are_degenerate() {
    let g = diag(10.0);
    // ‖g e1‖·‖g e2‖ = 1 for every k
    let e = measure_estimate_with(Action::LeftTranslation, &g, 1.0 + 1e-9, 500, 3).unwrap();
    assert_eq!(e.estimate, 1.0);
    let e = measure_estimate_with(Action::LeftTranslation, &g, 1.0 - 1e-9, 500, 3).unwrap();
    assert_eq!(e.estimate, 0.0);
}

#[test]
fn conjugation_norm_is_at_least_one() {
    let ks = HaarSampler::new(2, 17).batch(2000);
    for r in [1.0, 3.0, 1e3] {
        let norms = conjugation_norms(diag(r).matrix(), &ks);
        assert!(norms.iter().all(|&x| x >= 1.0 - 1e-9));
    }
}

#[test]
fn measure_decay_beyond_the_floor() {
    // the tail below r = 2 is about 6/R⁴; visible at R = 2 and 3, and empty by R = 10
    let est: Vec<f64> = [2.0, 3.0, 10.0].iter().map(|&r| measure_estimate(&diag(r), 2.0, 10_000, 4).unwrap().estimate).collect();
    assert!(est[0] > est[1] && est[1] > est[2], "{est:?}");
}

#[test]
fn g_estimate_examples() {
    let big = g_estimate(3.0, 1e6, 3, 500, 1).unwrap();
    assert_eq!(big.value, 1.0);
    let rs = [0.5, 0.25, 0.125];
    let vals: Vec<f64> = rs.iter().map(|&r| g_estimate(1.5, r, 3, 2000, 2).unwrap().value).collect();
    assert!(vals.windows(2).all(|w| w[1] <= w[0]));
    let small = g_estimate(1.5, 0.01, 3, 2000, 2).unwrap().value;
    assert!(small <= g_estimate(1.5, 0.5, 3, 2000, 2).unwrap().value && small <= 0.2);
}

#[test]
fn threshold_regression_and_sanity() {
    let cfg = ThresholdConfig { samples: 4000, probes: 3, seed: 12, cap: 1e12 };
    let t = threshold_estimate(5, &cfg).unwrap();
    assert_eq!(t.r_hat.len(), 5);
    assert!(t.r_hat.windows(2).all(|w| w[1] >= w[0]));
    // the conjugation orbit never goes below norm 1, so level 1 is met on the unit sphere
    assert!(t.r_hat[0] <= 1.0 + 1e-5);
    assert_eq!(t.delta, vec![0.25, 0.125, 0.0625, 0.03125, 0.015625]);
    let json: serde_json::Value = serde_json::to_value(&t).unwrap();
    assert!(json.get("R").is_some() && json.get("config").is_some());
    assert_eq!(threshold_estimate(5, &cfg).unwrap(), t);

    let stream = SeedStream::new(77);
    let xs: Vec<SLMatrix> = (0..5).map(|i| sphere_probe(2.0 * t.r_hat[i], 100 + i, &stream).unwrap()).collect();
    let ks = HaarSampler::new(2, 78).batch(1000);
    let ok = ks.iter().any(|k| {
        xs.iter().enumerate().all(|(i, x)| {
            let img = k.conj_transpose().mul(x.matrix()).mul(k);
            embedding_norm(&invariant_embedding(&img)) >= (i + 1) as f64
        })
    });
    assert!(ok);
}

#[test]
fn omega_examples() {
    let pts: Vec<SLMatrix> = (1..=8).map(|j| diag(2f64.powi(j))).collect();
    let d = DiscreteSequence::from_matrices(pts, None).unwrap();
    let rep = omega_check(&d, 1000, 5, 1e-6).unwrap();
    assert!(rep.pass_fraction >= 0.99, "{}", rep.pass_fraction);

    let m = SLMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 1.0]]).unwrap();
    let minus = SLMatrix::new(m.matrix().scale(c(-1.0, 0.0))).unwrap();
    let pair = DiscreteSequence::from_matrices(vec![m.clone(), minus], None).unwrap();
    assert_eq!(omega_check(&pair, 200, 5, 1e-6).unwrap().pass_fraction, 1.0);

    let single = DiscreteSequence::from_matrices(vec![m], None).unwrap();
    assert_eq!(omega_check(&single, 50, 5, 1e-6).unwrap().pass_fraction, 1.0);
}

#[test]
fn csv_row_layout() {
    let e = MCEstimate::from_count(25, 100, 9);
    assert_eq!(CSV_HEADER.split(',').count(), csv_row("conjugation", 10.0, 1.0, &e).split(',').count());
    assert!((e.stderr - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn estimates_nest_in_r(seed in 0u64..1000, r in 1.0f64..50.0, r1 in 0.5f64..3.0, dr in 0.0f64..3.0) {
        let g = diag(r);
        let a = measure_estimate(&g, r1, 400, seed).unwrap().estimate;
        let b = measure_estimate(&g, r1 + dr, 400, seed).unwrap().estimate;
        prop_assert!(a <= b);
    }

    #[test]
    fn nearby_probes_shift_radius(seed in 0u64..1000, r in 1.0f64..20.0, t in -1e-3f64..1e-3, rad in 0.5f64..40.0) {
        let v = diag(r);
        let w = SLMatrix::from_real_rows(&[&[r, t], &[0.0, 1.0 / r]]).unwrap();
        let (fv, fw) = (v.matrix().frobenius_norm(), w.matrix().frobenius_norm());
        // ‖x⊗y − x'⊗y'‖ ≤ ‖x − x'‖‖y‖ + ‖x'‖‖y − y'‖ and conjugation is a Frobenius isometry
        let eps = v.matrix().sub(w.matrix()).frobenius_norm() * (fv + fw) * (1.0 + 1e-12) + 1e-12;
        let hv = measure_estimate(&v, rad, 300, seed).unwrap().estimate;
        let hw = measure_estimate(&w, rad + eps, 300, seed).unwrap().estimate;
        prop_assert!(hv <= hw);
    }

    #[test]
    fn embedding_identities(seed in 0u64..1000, tr in 0.1f64..10.0, ti in -3.0f64..3.0) {
        let mut rng = SeedStream::new(seed).rng();
        let g = tamelab_core::sl2::random_sl2(&mut rng);
        let t = c(tr, ti);
        let e = invariant_embedding(g.matrix());
        let f = invariant_embedding(&g.matrix().mul(&CMatrix::diag(&[t, t.inv()])));
        for (x, y) in e.iter().zip(&f) {
            prop_assert!((x - y).norm() <= 1e-12 * (1.0 + x.norm()));
        }
        prop_assert!((e[1] - e[2] - 1.0).norm() <= 1e-10 * (1.0 + e[1].norm()));
    }
}

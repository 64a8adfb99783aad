use std::collections::BTreeSet;

use tamelab_core::rng::SeedStream;
use tamelab_core::sl2::*;

// Brute-force count over Gaussian integers using (re, im) pairs directly.
fn count_gaussian(h: i64) -> (usize, usize) {
    let mut n = 0;
    let mut firsts = BTreeSet::new();
    let r: Vec<(i64, i64)> = (-h..=h).flat_map(|x| (-h..=h).map(move |y| (x, y))).collect();
    let mul = |p: (i64, i64), q: (i64, i64)| (p.0 * q.0 - p.1 * q.1, p.0 * q.1 + p.1 * q.0);
    for &a in &r {
        for &b in &r {
            for &cc in &r {
                for &d in &r {
                    let (ad, bc) = (mul(a, d), mul(b, cc));
                    if ad.0 - bc.0 == 1 && ad.1 == bc.1 {
                        n += 1;
                        firsts.insert((a, b));
                    }
                }
            }
        }
    }
    (n, firsts.len())
}

#[test]
fn gaussian_counts_match_brute_force() {
    let g = gaussian_sl2_generate(NumberField::Imaginary(1), 2).unwrap();
    let (n, f) = count_gaussian(2);
    assert_eq!(g.exact.len(), n);
    let firsts: BTreeSet<_> = g.exact.iter().map(|e| (e.a, e.b)).collect();
    assert_eq!(firsts.len(), f);
    let q = gaussian_sl2_generate(NumberField::Rational, 2).unwrap();
    let mut count = 0;
    for a in -2i64..=2 {
        for b in -2i64..=2 {
            for cc in -2i64..=2 {
                for d in -2i64..=2 {
                    count += (a * d - b * cc == 1) as usize;
                }
            }
        }
    }
    assert_eq!(q.exact.len(), count);
}

#[test]
fn determinants_are_exact_for_every_supported_field() {
    for d in SUPPORTED_D {
        let f = NumberField::imaginary(d).unwrap();
        let g = gaussian_sl2_generate(f, 1).unwrap();
        for m in g.sequence.matrices().unwrap() {
            assert!(m.det_drift() < 1e-9);
        }
    }
}

#[test]
fn pipeline_on_gaussian_integers() {
    let g = gaussian_sl2_generate(NumberField::Imaginary(1), 2).unwrap();
    let (phi, verdict, report) = sl2_column_pipeline(&g.sequence, &SeedStream::new(11), 0.5, 64).unwrap();
    assert!(verdict.is_consistent(), "{}", verdict.detail);
    assert!(report.stage3_clearance >= 0.0);
    for (k, m) in g.sequence.matrices().unwrap().into_iter().enumerate() {
        assert!(phi.apply_matrix(m).unwrap().column(1).norm() >= (k + 1) as f64);
    }
}

#[test]
fn gaussian_first_columns_are_lattice_separated() {
    let g = gaussian_sl2_generate(NumberField::Imaginary(1), 2).unwrap();
    let cols: Vec<_> = g.sequence.matrices().unwrap().iter().map(|m| m.first_column()).collect();
    for i in 0..cols.len() {
        for j in 0..i {
            let gap = cols[i]
                .entries()
                .iter()
                .zip(cols[j].entries())
                .fold(0.0f64, |m, (x, y)| m.max((x.re - y.re).abs()).max((x.im - y.im).abs()));
            assert!(gap == 0.0 || gap >= 1.0, "{i}, {j}: {gap}");
        }
    }
}

mod props {
    use proptest::prelude::*;
    use rand::Rng;

    use tamelab_core::linalg::{c, SLMatrix};
    use tamelab_core::rng::SeedStream;
    use tamelab_core::sl2::*;

    fn spec(rng: &mut impl Rng) -> OvershearSpec {
        let terms = (0..rng.gen_range(1..=3))
            .map(|_| BiTerm { i: rng.gen_range(0..=2), j: rng.gen_range(0..=2), coef: c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)) })
            .collect();
        OvershearSpec::from_terms(terms)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn overshear_keeps_first_column_and_det(seed in any::<u64>(), tiny in any::<bool>()) {
            let mut rng = SeedStream::new(seed).rng();
            let s = spec(&mut rng);
            let inv = overshear_inverse(&s);
            for _ in 0..50 {
                let m = if tiny {
                    // |a| ≤ 1e-6 with O(1) remaining entries
                    let a = c(rng.gen_range(-1e-6..1e-6), 0.0);
                    let (b, d) = (c(rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0)), c(rng.gen_range(-1.0..1.0), 0.0));
                    SLMatrix::sl2(a, b, (a * d - 1.0) / b, d).unwrap()
                } else {
                    random_sl2(&mut rng)
                };
                let Ok(img) = overshear_apply(&s, &m) else { continue };
                prop_assert_eq!(img.get(0, 0), m.get(0, 0));
                prop_assert_eq!(img.get(1, 0), m.get(1, 0));
                prop_assert!(img.det_drift() <= 1e-10, "drift {}", img.det_drift());
                let back = overshear_apply(&inv, &img).unwrap();
                prop_assert!(back.matrix().max_dist(m.matrix()) <= 1e-9);
            }
        }

        #[test]
        fn affine_probe_slope_is_lambda(seed in any::<u64>()) {
            let mut rng = SeedStream::new(seed).rng();
            let s = spec(&mut rng);
            let m = random_sl2(&mut rng);
            let v = (m.get(0, 0), m.get(1, 0));
            if let Ok(lam) = s.lambda_at(v.0, v.1) {
                let fit = fiber_affine_probe(&s, v, 8).unwrap();
                prop_assert!((fit.slope - lam).norm() <= 1e-9 * lam.norm().max(1.0));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn pipeline_separates_second_columns(seed in any::<u64>()) {
            let g = gaussian_sl2_generate(NumberField::Imaginary(1), 1).unwrap();
            let (phi, verdict, report) = sl2_column_pipeline(&g.sequence, &SeedStream::new(seed), 0.5, 64).unwrap();
            prop_assert!(verdict.is_consistent());
            prop_assert!(report.stage3_clearance > 0.0);
            let imgs: Vec<_> = g.sequence.matrices().unwrap().iter().map(|m| phi.apply_matrix(m).unwrap().column(1)).collect();
            for i in 0..imgs.len() {
                prop_assert!(imgs[i].norm() >= (i + 1) as f64);
                for j in 0..i {
                    prop_assert!(imgs[i].max_dist(&imgs[j]) > 0.0);
                }
            }
        }
    }
}

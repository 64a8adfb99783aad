use proptest::prelude::*;
use rand::Rng;

use tamelab_core::checks::discreteness_check;
use tamelab_core::cn_tame::{push_prefix_cn, rr_series_test, shear_apply, ShearAut, TailPolicy};
use tamelab_core::exhaustion::{exhaust_eval, zeta0_reduce, ExhaustionFunction, HeightAssignment};
use tamelab_core::linalg::{c, CMatrix, CVector, SLMatrix, C64};
use tamelab_core::poly::{interpolate_nodes, Polynomial};
use tamelab_core::rng::SeedStream;
use tamelab_core::sl2::random_sl2;
use tamelab_core::space::{AmbientSpace, DiscreteSequence, Point};

fn cvec(rng: &mut impl Rng, n: usize, scale: f64) -> CVector {
    CVector::new((0..n).map(|_| c(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))).collect()).unwrap()
}

fn det3(u: &CVector, v: &CVector, w: &CVector) -> C64 {
    let m = CMatrix::from_rows(&[u.entries().to_vec(), v.entries().to_vec(), w.entries().to_vec()]).unwrap();
    m.det()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exhaustions_are_nonnegative_and_continuous(seed in any::<u64>()) {
        let mut rng = SeedStream::new(seed).rng();
        let eps = 1e-8;
        for _ in 0..16 {
            let v = cvec(&mut rng, 3, 10.0);
            let dv = cvec(&mut rng, 3, eps);
            let e = ExhaustionFunction::EuclideanNorm;
            let (a, b) = (exhaust_eval(e, &Point::Vector(v.clone()), AmbientSpace::Cn(3)).unwrap(),
                exhaust_eval(e, &Point::Vector(v.add(&dv)), AmbientSpace::Cn(3)).unwrap());
            prop_assert!(a >= 0.0 && (a - b).abs() <= 1e-4 * a.max(1e-300));

            let p = ExhaustionFunction::PuncturedTau;
            let pc = AmbientSpace::PuncturedCn(3);
            let (a, b) = (exhaust_eval(p, &Point::Vector(v.clone()), pc).unwrap(),
                exhaust_eval(p, &Point::Vector(v.add(&dv)), pc).unwrap());
            prop_assert!(a >= 1.0 && (a - b).abs() <= 1e-4 * a);

            let z = c(rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7));
            let w = c(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let q = CVector::new(vec![z, w]).unwrap();
            let dq = cvec(&mut rng, 2, eps);
            let t = ExhaustionFunction::DiscPlaneTau;
            let (a, b) = (exhaust_eval(t, &Point::Vector(q.clone()), AmbientSpace::DiscTimesC).unwrap(),
                exhaust_eval(t, &Point::Vector(q.add(&dq)), AmbientSpace::DiscTimesC).unwrap());
            prop_assert!(a >= 1.0 && (a - b).abs() <= 1e-4 * a);

            let m = random_sl2(&mut rng);
            let a = exhaust_eval(ExhaustionFunction::MatrixMaxColumnNorm, &Point::Matrix(m), AmbientSpace::SLn(2)).unwrap();
            prop_assert!(a > 0.0);
        }
    }

    #[test]
    fn discreteness_ignores_order(seed in any::<u64>(), gap in 0.05f64..0.5) {
        let mut rng = SeedStream::new(seed).rng();
        let mut pts: Vec<CVector> = (0..40).map(|_| cvec(&mut rng, 2, 3.0)).collect();
        let base = discreteness_check(&DiscreteSequence::from_vectors(AmbientSpace::Cn(2), pts.clone(), None).unwrap(), gap).unwrap();
        for i in (1..pts.len()).rev() {
            pts.swap(i, rng.gen_range(0..=i));
        }
        let shuffled = discreteness_check(&DiscreteSequence::from_vectors(AmbientSpace::Cn(2), pts, None).unwrap(), gap).unwrap();
        prop_assert_eq!(base.label(), shuffled.label());
    }

    #[test]
    fn zeta0_bounds_rho_on_tau_sublevels(seed in any::<u64>(), zeta in 1.01f64..50.0) {
        let mut rng = SeedStream::new(seed).rng();
        let h = HeightAssignment::constant(1, zeta).unwrap();
        let e = ExhaustionFunction::EuclideanNorm;
        let cases = [
            (ExhaustionFunction::PuncturedTau, AmbientSpace::PuncturedCn(2)),
            (ExhaustionFunction::DiscPlaneTau, AmbientSpace::DiscTimesC),
            (e, AmbientSpace::Cn(2)),
        ];
        for (tau, amb) in cases {
            let z0 = zeta0_reduce(&h, e, tau, amb).unwrap().get(0);
            let mut hits = 0;
            while hits < 100 {
                let v = if amb == AmbientSpace::DiscTimesC {
                    let r: f64 = rng.gen_range(0.0..0.999);
                    let th: f64 = rng.gen_range(0.0..6.3);
                    CVector::new(vec![c(r * th.cos(), r * th.sin()), c(rng.gen_range(-60.0..60.0), rng.gen_range(-60.0..60.0))]).unwrap()
                } else {
                    cvec(&mut rng, 2, zeta)
                };
                let p = Point::Vector(v);
                if exhaust_eval(tau, &p, amb).unwrap() < zeta {
                    prop_assert!(exhaust_eval(e, &p, amb).unwrap() < z0);
                    hits += 1;
                }
            }
        }
    }

    #[test]
    fn accepted_matrices_multiply(seed in any::<u64>()) {
        let mut rng = SeedStream::new(seed).rng();
        let (a, b) = (random_sl2(&mut rng), random_sl2(&mut rng));
        prop_assert!(a.det_drift() <= 1e-9 && b.det_drift() <= 1e-9);
        prop_assert!(SLMatrix::new(a.matrix().mul(b.matrix())).is_ok());
    }

    #[test]
    fn shears_preserve_volume(seed in any::<u64>()) {
        let mut rng = SeedStream::new(seed).rng();
        let coeffs: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s = ShearAut::new(rng.gen_range(0..3), 0, Polynomial::from_real_coeffs(&coeffs)).unwrap_or_else(|_| {
            ShearAut::new(2, 0, Polynomial::from_real_coeffs(&coeffs)).unwrap()
        });
        // Tiny simplex around x: the Jacobian acts on the edge vectors to first order.
        let x = cvec(&mut rng, 3, 1.0);
        let h = 1e-5;
        let edges: Vec<CVector> = (0..3).map(|_| cvec(&mut rng, 3, 1.0)).collect();
        let fx = shear_apply(&s, &x).unwrap();
        let img: Vec<CVector> = edges
            .iter()
            .map(|e| shear_apply(&s, &x.add(&e.scale(c(h, 0.0)))).unwrap().sub(&fx).scale(c(1.0 / h, 0.0)))
            .collect();
        let before = det3(&edges[0], &edges[1], &edges[2]);
        let after = det3(&img[0], &img[1], &img[2]);
        prop_assert!((before - after).norm() <= 1e-3 * before.norm().max(1.0), "{before} vs {after}");
        let back = shear_apply(&s.inverse(), &fx).unwrap();
        prop_assert!(back.max_dist(&x) <= 1e-12);
    }

    #[test]
    fn partial_sums_grow_with_prefix(seed in any::<u64>()) {
        let mut rng = SeedStream::new(seed).rng();
        let pts: Vec<CVector> = (0..30).map(|_| cvec(&mut rng, 2, 20.0)).collect();
        let d = DiscreteSequence::from_vectors(AmbientSpace::Cn(2), pts, None).unwrap();
        let mut last = 0.0;
        for m in 1..=30 {
            let s = rr_series_test(&d.prefix(m), TailPolicy::PartialOnly).unwrap().partial_sum;
            prop_assert!(s >= last);
            last = s;
        }
    }

    #[test]
    fn push_meets_heights(seed in any::<u64>(), len in 1usize..=20) {
        let ss = SeedStream::new(seed);
        let mut rng = ss.fork("data").rng();
        let pts: Vec<CVector> = (0..len).map(|_| cvec(&mut rng, 2, 5.0)).collect();
        let d = DiscreteSequence::from_vectors(AmbientSpace::Cn(2), pts.clone(), None).unwrap();
        let zeta = HeightAssignment::new((0..len).map(|_| rng.gen_range(1.0..100.0)).collect()).unwrap();
        let (phi, proof) = push_prefix_cn(&d, &zeta, ss.fork("push"), 1e-6).unwrap();
        for (i, v) in pts.iter().enumerate() {
            let img = phi.apply_vector(v).unwrap();
            prop_assert!(img.norm() >= zeta.get(i), "point {i}: {} < {}", img.norm(), zeta.get(i));
            prop_assert!(proof.achieved[i] >= proof.required[i]);
        }
    }

    #[test]
    fn interpolation_recovers_polynomials(seed in any::<u64>(), deg in 0usize..8) {
        let mut rng = SeedStream::new(seed).rng();
        let coeffs: Vec<C64> = (0..=deg).map(|_| c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
        let p = Polynomial::from_coeffs(coeffs.clone());
        let m = deg + 3;
        let nodes: Vec<(C64, C64)> = (0..m)
            .map(|k| {
                let th = std::f64::consts::TAU * (k as f64 + rng.gen_range(0.0..0.3)) / m as f64;
                let x = C64::from_polar(rng.gen_range(0.8..1.25), th);
                (x, p.eval(x))
            })
            .collect();
        let q = interpolate_nodes(&nodes, 1e-6).unwrap();
        let got = q.coefficients();
        let scale = coeffs.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for (k, want) in coeffs.iter().enumerate() {
            let g = got.get(k).copied().unwrap_or(c(0.0, 0.0));
            prop_assert!((g - want).norm() <= 1e-8 * scale, "coeff {k}: {g} vs {want}");
        }
        for extra in got.iter().skip(coeffs.len()) {
            prop_assert!(extra.norm() <= 1e-8 * scale);
        }
    }
}

#[test]
fn zeta3_partial_sum() {
    // Σ k^{-3} over the first 10⁴ terms against ζ(3) minus its integral tail bound.
    let zeta3 = 1.202_056_903_159_594_3;
    let pts: Vec<CVector> = (1..=10_000).map(|k| CVector::from_reals(&[k as f64, 0.0]).unwrap()).collect();
    let d = DiscreteSequence::from_vectors(AmbientSpace::Cn(2), pts, None).unwrap();
    let r = rr_series_test(&d, TailPolicy::PartialOnly).unwrap();
    let tail = zeta3 - r.partial_sum;
    // 1/(2(N+1)²) ≤ tail ≤ 1/(2N²)
    assert!(tail >= 1.0 / (2.0 * 10_001f64.powi(2)) - 1e-15 && tail <= 1.0 / (2.0 * 1e8) + 1e-15, "{tail}");
    assert!(r.verdict.is_consistent());
}

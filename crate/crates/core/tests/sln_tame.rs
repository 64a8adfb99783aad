use proptest::prelude::*;
use tamelab_core::error::Error;
use tamelab_core::linalg::{c, CMatrix, SLMatrix};
use tamelab_core::rng::SeedStream;
use tamelab_core::sln_tame::*;
use tamelab_core::space::DiscreteSequence;

fn unipotent_shift(d: &DiscreteSequence) -> DiscreteSequence {
    let mats = d
        .matrices()
        .unwrap()
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let k = (i + 1) as f64;
            let g = CMatrix::from_real_rows(&[&[1.0, k], &[0.0, 1.0]]).unwrap();
            SLMatrix::new(m.matrix().mul(&g)).unwrap()
        })
        .collect();
    DiscreteSequence::from_matrices(mats, None).unwrap()
}

#[test]
fn equivalence_moves_shifted_prefix_back() {
    let cseq = wellplaced2(15).unwrap();
    let dseq = unipotent_shift(&cseq);
    let (phi, rep) = equivalence_automorphism(&cseq, &dseq, &SeedStream::new(9)).unwrap();
    for (x, y) in cseq.matrices().unwrap().iter().zip(dseq.matrices().unwrap()) {
        let img = phi.apply_matrix(y).unwrap();
        assert!(img.matrix().max_dist(x.matrix()) <= 1e-8, "{}", img.matrix().max_dist(x.matrix()));
        assert_eq!(img.first_column(), y.first_column());
    }
    assert!(rep.max_residual <= 1e-8);
}

#[test]
fn equivalence_of_equal_prefixes_is_identity() {
    let cseq = wellplaced2(5).unwrap();
    let (phi, _) = equivalence_automorphism(&cseq, &cseq, &SeedStream::new(1)).unwrap();
    assert!(phi.is_identity());
}

#[test]
fn equivalence_rejects_shared_first_columns() {
    let m = SLMatrix::from_real_rows(&[&[1.0, 0.0], &[1.0, 1.0]]).unwrap();
    let m2 = SLMatrix::from_real_rows(&[&[1.0, 2.0], &[1.0, 3.0]]).unwrap();
    let e = DiscreteSequence::from_matrices(vec![m.clone(), m2.clone()], None).unwrap();
    let cs = DiscreteSequence::from_matrices(vec![m2, m], None).unwrap();
    assert!(matches!(equivalence_automorphism(&cs, &e, &SeedStream::new(1)), Err(Error::FiberCollision(0, 1))));
}

fn random_sl3(seed: u64, len: usize) -> DiscreteSequence {
    use tamelab_core::rng::gaussian_c;
    let mut rng = SeedStream::new(seed).rng();
    let mats = (0..len)
        .map(|_| {
            let z = CMatrix::from_row_major(3, 3, (0..9).map(|_| gaussian_c(&mut rng)).collect()).unwrap();
            let d = z.det().powf(1.0 / 3.0);
            SLMatrix::new(z.scale(c(1.0, 0.0) / d)).unwrap()
        })
        .collect();
    DiscreteSequence::from_matrices(mats, None).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn union_parts_partition_and_dominate(seed in any::<u64>()) {
        let d = random_sl3(seed, 20);
        let u = union_decompose(&d).unwrap();
        let mut all: Vec<usize> = u.indices.concat();
        all.sort();
        prop_assert_eq!(all, (0..20).collect::<Vec<_>>());
        let mats = d.matrices().unwrap();
        for (k, idx) in u.indices.iter().enumerate() {
            for &i in idx {
                let m = mats[i].matrix();
                for j in 0..3 {
                    prop_assert!(m.column_norm(k) >= m.column_norm(j));
                }
                prop_assert!(m.column_norm(k) >= mats[i].max_column_norm() / 3.0);
            }
        }
    }

    #[test]
    fn conforming_tables_keep_well_placed(seed in any::<u64>()) {
        let a = wellplaced2(25).unwrap();
        let t = RescaleTable::conforming(2, 25, &SeedStream::new(seed));
        let b = lambda_rescale(&a, &t, true).unwrap();
        prop_assert!(!well_placed_check(&b).unwrap().0.is_violated());
        for (x, y) in a.matrices().unwrap().iter().zip(b.matrices().unwrap()) {
            prop_assert!((y.matrix().det() - x.matrix().det()).norm() <= 1e-9 * x.matrix().max_abs().powi(2));
        }
    }

    #[test]
    fn torus_images_lie_on_z(x in 0.01f64..100.0, phase in 0.0f64..6.28) {
        let l = tamelab_core::linalg::C64::from_polar(x, phase);
        let m = SLMatrix::sl2(l, c(0.0, 0.0), c(0.0, 0.0), l.inv()).unwrap();
        let (img, _) = torus_embed(&[m], 0.5).unwrap();
        prop_assert_eq!(img[0].get(0), l);
        prop_assert_eq!(img[0].get(1), l.inv());
        prop_assert!((img[0].get(0) * img[0].get(1) - 1.0).norm() <= 1e-12);
    }
}

#[test]
fn alignment_constraints_hold_on_phase_partner() {
    let a = wellplaced2(30).unwrap();
    let b = phase_partner(&a).unwrap();
    let al = align_first_columns(&a, &b).unwrap();
    assert!(al.all_constraints_hold(), "{:?}", al.constraints);
    for (x, y) in al.c.matrices().unwrap().iter().zip(al.e.matrices().unwrap()) {
        for i in 0..2 {
            assert!((x.get(i, 0) - y.get(i, 0)).norm() <= 1e-10);
        }
    }
    let json = serde_json::to_value(&al.tables).unwrap();
    for key in ["lambda", "mu", "lambda_tilde", "mu_tilde"] {
        assert!(json.get(key).is_some());
    }
}


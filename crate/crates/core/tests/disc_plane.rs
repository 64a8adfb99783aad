use proptest::prelude::*;
use rand::Rng;

use tamelab_core::checks::properness_check_auto;
use tamelab_core::disc_plane::{dp_apply, dp_classify, dp_inverse, DiscPlaneAut, MoebiusDisc};
use tamelab_core::families::{discplane_base, BOUNDARY_MAX_LEN, DISCPLANE_VARIANTS};
use tamelab_core::linalg::{c, C64};
use tamelab_core::poly::Polynomial;
use tamelab_core::rng::SeedStream;

fn random_aut(rng: &mut impl Rng, moebius: bool) -> DiscPlaneAut {
    let mut coeffs = |k: usize, s: f64| -> Polynomial {
        Polynomial::from_coeffs((0..k).map(|_| c(rng.gen_range(-s..s), rng.gen_range(-s..s))).collect())
    };
    let (logf, g) = (coeffs(3, 0.5), coeffs(4, 2.0));
    let phi = if moebius {
        MoebiusDisc::new(rng.gen_range(0.0..6.28), c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))).unwrap()
    } else {
        MoebiusDisc::identity()
    };
    DiscPlaneAut::new(phi, logf, g).unwrap()
}

fn disc_point(rng: &mut impl Rng, rmax: f64) -> (C64, C64) {
    let r = rmax * rng.gen::<f64>().sqrt();
    let th: f64 = rng.gen_range(0.0..6.3);
    (C64::from_polar(r, th), c(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn base_coordinate_ignores_fiber(seed in any::<u64>()) {
        let mut rng = SeedStream::new(seed).rng();
        let a = random_aut(&mut rng, true);
        for _ in 0..50 {
            let (z, w) = disc_point(&mut rng, 0.95);
            let w2 = c(rng.gen_range(-1e3..1e3), rng.gen_range(-1e3..1e3));
            let (z1, _) = dp_apply(&a, (z, w)).unwrap();
            let (z2, _) = dp_apply(&a, (z, w2)).unwrap();
            prop_assert!((z1 - z2).norm() <= 1e-14);
        }
    }

    #[test]
    fn inverse_undoes_the_map(seed in any::<u64>(), moebius in any::<bool>()) {
        let mut rng = SeedStream::new(seed).rng();
        let a = random_aut(&mut rng, moebius);
        let inv = dp_inverse(&a).unwrap();
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let p = disc_point(&mut rng, 0.9);
            let q = dp_apply(&a, p).unwrap();
            let back = dp_apply(&inv.aut, q).unwrap();
            let scale = 1.0 + p.1.norm();
            worst = worst.max((back.0 - p.0).norm()).max((back.1 - p.1).norm() / scale);
        }
        prop_assert!(worst <= 1e-9, "round trip error {worst:e}, reported residual {:e}", inv.residual);
    }
}

#[test]
fn certified_prefixes_are_proper() {
    for v in DISCPLANE_VARIANTS {
        let d = discplane_base(v, BOUNDARY_MAX_LEN).unwrap();
        let verdict = dp_classify(&d, 1e-3, 1).unwrap();
        if verdict.is_certified() {
            // z ↦ z/(1 − |z|) carries Δ onto ℂ, so leaving compacts of Δ becomes escaping to infinity
            let images: Vec<Vec<C64>> =
                d.vectors().unwrap().iter().map(|p| vec![p.get(0) / (1.0 - p.get(0).norm())]).collect();
            assert!(properness_check_auto(&images, 1e-3, 1).unwrap().is_consistent(), "{v}");
        }
    }
    assert!(dp_classify(&discplane_base("boundary", BOUNDARY_MAX_LEN).unwrap(), 1e-3, 1).unwrap().is_certified());
}

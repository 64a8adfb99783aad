use proptest::prelude::*;
use rand::Rng;

use tamelab_core::checks::discreteness_check;
use tamelab_core::linalg::{c, CVector};
use tamelab_core::punctured::{
    bilipschitz_estimate, dyadic_gamma, no_threshold_witness, origin_fixing_family, punctured_tame_check, ORIGIN_FIXING_FAMILIES,
};
use tamelab_core::rng::SeedStream;
use tamelab_core::space::{AmbientSpace, DiscreteSequence};

#[test]
fn witness_exists_for_every_family() {
    let seed = SeedStream::new(41);
    for name in ORIGIN_FIXING_FAMILIES {
        for scale in [0.1, 1.0, 10.0] {
            let phi = origin_fixing_family(name, 2, scale, &seed).unwrap();
            let c1 = bilipschitz_estimate(&phi, 2, 0.5 * (1.0 + 1e-12), 64, &seed).unwrap().c1;
            let len = (1.0 / c1).ceil() as usize + 2;
            let r = no_threshold_witness(&dyadic_gamma(2, len), &phi, &seed)
                .unwrap_or_else(|e| panic!("{name} x{scale}: {e}"));
            assert!(r.first_failure_index <= len);
            let k = r.first_failure_index;
            assert!(r.tau_values[k - 1] < r.zeta[k - 1]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn shrinking_radius_tightens_constants(seed in any::<u64>(), fam in 0usize..5, r in 0.01f64..2.0) {
        let s = SeedStream::new(seed);
        let phi = origin_fixing_family(ORIGIN_FIXING_FAMILIES[fam], 2, 2.0, &s).unwrap();
        let big = bilipschitz_estimate(&phi, 2, r, 16, &s).unwrap();
        let small = bilipschitz_estimate(&phi, 2, r / 3.0, 16, &s).unwrap();
        prop_assert!(small.c2 <= big.c2, "C2 {} > {}", small.c2, big.c2);
        prop_assert!(small.c1 >= big.c1, "C1 {} < {}", small.c1, big.c1);
    }

    #[test]
    fn violated_discreteness_transfers(seed in any::<u64>(), gap in 0.01f64..0.5) {
        let mut rng = SeedStream::new(seed).rng();
        let pts: Vec<CVector> = (0..30)
            .map(|_| {
                let r = rng.gen_range(0.6..3.0);
                let th: f64 = rng.gen_range(0.0..6.3);
                CVector::new(vec![c(r * th.cos(), 0.0), c(r * th.sin(), rng.gen_range(-1.0..1.0))]).unwrap()
            })
            .collect();
        let cn = DiscreteSequence::from_vectors(AmbientSpace::Cn(2), pts.clone(), None).unwrap();
        let pc = DiscreteSequence::from_vectors(AmbientSpace::PuncturedCn(2), pts, None).unwrap();
        if discreteness_check(&cn, gap).unwrap().is_violated() {
            prop_assert!(punctured_tame_check(&pc, gap).unwrap().is_violated());
        }
    }
}

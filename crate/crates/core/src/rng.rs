//! Seeded, splittable randomness. Every stochastic operation takes a `SeedStream`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c, CMatrix, CVector, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedStream {
    seed: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        SeedStream { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn fork(&self, label: &str) -> SeedStream {
        SeedStream { seed: splitmix64(self.seed ^ fnv1a(label)) }
    }

    pub fn fork_index(&self, i: u64) -> SeedStream {
        SeedStream { seed: splitmix64(splitmix64(self.seed).wrapping_add(i)) }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

pub fn gaussian_c<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    loop {
        let v: Vec<C64> = (0..n).map(|_| gaussian_c(rng)).collect();
        let v = CVector::new(v).expect("finite gaussian draw");
        let norm = v.norm();
        if norm > 1e-300 {
            return v.scale(c(1.0 / norm, 0.0));
        }
    }
}

/// Haar-distributed element of U(n): Ginibre QR with the R-diagonal made positive.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    loop {
        let data: Vec<C64> = (0..n * n).map(|_| gaussian_c(rng)).collect();
        let z = CMatrix::from_row_major(n, n, data).expect("finite gaussian draw");
        if let Ok((q, _)) = z.qr_positive() {
            return q;
        }
    }
}

//! Finite-prefix tameness checks and automorphism constructions for discrete sequences in
//! ℂⁿ, ℂⁿ∖{0}, 𝔻×ℂ and SLₙ(ℂ).

pub mod automorphism;
pub mod checks;
pub mod cn_tame;
pub mod disc_plane;
pub mod error;
pub mod exhaustion;
pub mod families;
pub mod generic_projection;
pub mod linalg;
pub mod pi_tame;
pub mod poly;
pub mod punctured;
pub mod rng;
pub mod sl2;
pub mod sln_tame;
pub mod space;

pub use error::{Error, Result};

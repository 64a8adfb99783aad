//! Composable automorphism representations, evaluable at points of their ambient space.

use serde::{Deserialize, Serialize};

use crate::cn_tame::{shear_apply, ShearAut};
use crate::disc_plane::{dp_apply, DiscPlaneAut};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, SLMatrix, C64};
use crate::pi_tame::BundlePushAut;
use crate::sl2::{overshear_apply, right_translate, OvershearSpec};
use crate::space::Point;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AutomorphismRep {
    Identity,
    /// v ↦ M·v on ℂⁿ.
    Linear { matrix: CMatrix },
    Shear(ShearAut),
    DiscPlane(DiscPlaneAut),
    Overshear(OvershearSpec),
    BundlePush(BundlePushAut),
    /// x ↦ A·x on SLₙ.
    LeftTranslation { matrix: SLMatrix },
    /// R_t on SL₂: [[a, c], [b, d]] ↦ [[a, c + a t], [b, d + b t]].
    RightTranslation { t: C64 },
    /// Applied left to right: parts[0] first.
    Composite { parts: Vec<AutomorphismRep> },
}

impl AutomorphismRep {
    pub fn scalar(n: usize, s: C64) -> Self {
        AutomorphismRep::Linear { matrix: CMatrix::diag(&vec![s; n]) }
    }

    pub fn then(self, next: AutomorphismRep) -> Self {
        match (self, next) {
            (AutomorphismRep::Identity, b) => b,
            (a, AutomorphismRep::Identity) => a,
            (AutomorphismRep::Composite { mut parts }, b) => {
                parts.push(b);
                AutomorphismRep::Composite { parts }
            }
            (a, b) => AutomorphismRep::Composite { parts: vec![a, b] },
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            AutomorphismRep::Identity => true,
            AutomorphismRep::Composite { parts } => parts.iter().all(|p| p.is_identity()),
            _ => false,
        }
    }

    pub fn apply(&self, p: &Point) -> Result<Point> {
        match p {
            Point::Vector(v) => self.apply_vector(v).map(Point::Vector),
            Point::Matrix(m) => self.apply_matrix(m).map(Point::Matrix),
        }
    }

    pub fn apply_vector(&self, v: &CVector) -> Result<CVector> {
        match self {
            AutomorphismRep::Identity => Ok(v.clone()),
            AutomorphismRep::Linear { matrix } => {
                if matrix.cols() != v.dim() || matrix.rows() != v.dim() {
                    return Err(Error::DimensionMismatch(format!("{}x{} map on dimension {}", matrix.rows(), matrix.cols(), v.dim())));
                }
                Ok(matrix.mul_vec(v))
            }
            AutomorphismRep::Shear(s) => shear_apply(s, v),
            AutomorphismRep::DiscPlane(a) => {
                if v.dim() != 2 {
                    return Err(Error::DimensionMismatch("disc-plane point has two coordinates".into()));
                }
                let (z, w) = dp_apply(a, (v.get(0), v.get(1)))?;
                CVector::new(vec![z, w])
            }
            AutomorphismRep::Composite { parts } => {
                let mut cur = v.clone();
                for p in parts {
                    cur = p.apply_vector(&cur)?;
                }
                Ok(cur)
            }
            _ => Err(Error::AmbientMismatch("matrix automorphism applied to a vector".into())),
        }
    }

    pub fn apply_matrix(&self, m: &SLMatrix) -> Result<SLMatrix> {
        match self {
            AutomorphismRep::Identity => Ok(m.clone()),
            AutomorphismRep::Overshear(s) => overshear_apply(s, m),
            AutomorphismRep::BundlePush(b) => b.apply(m),
            AutomorphismRep::LeftTranslation { matrix } => {
                if matrix.n() != m.n() {
                    return Err(Error::DimensionMismatch("left translation size".into()));
                }
                Ok(matrix.mul(m))
            }
            AutomorphismRep::RightTranslation { t } => right_translate(m, *t),
            AutomorphismRep::Composite { parts } => {
                let mut cur = m.clone();
                for p in parts {
                    cur = p.apply_matrix(&cur)?;
                }
                Ok(cur)
            }
            _ => Err(Error::AmbientMismatch("vector automorphism applied to a matrix".into())),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("automorphism serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::poly::Polynomial;

    #[test]
    fn composite_applies_in_order() {
        let shear = AutomorphismRep::Shear(ShearAut::new(1, 0, Polynomial::from_real_coeffs(&[0.0, 0.0, 1.0])).unwrap());
        let phi = AutomorphismRep::scalar(2, c(2.0, 0.0)).then(shear);
        let v = CVector::from_reals(&[1.0, 1.0]).unwrap();
        // (1,1) -> (2,2) -> (2, 2 + 4)
        assert_eq!(phi.apply_vector(&v).unwrap(), CVector::from_reals(&[2.0, 6.0]).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let phi = AutomorphismRep::Composite {
            parts: vec![
                AutomorphismRep::LeftTranslation { matrix: SLMatrix::from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]).unwrap() },
                AutomorphismRep::RightTranslation { t: c(0.5, -1.0) },
            ],
        };
        let back = AutomorphismRep::from_json(&phi.to_json()).unwrap();
        assert_eq!(back, phi);
        assert!(phi.to_json().contains("\"kind\": \"composite\""));
    }

    #[test]
    fn kinds_do_not_mix() {
        let v = CVector::from_reals(&[1.0, 1.0]).unwrap();
        assert!(AutomorphismRep::RightTranslation { t: c(1.0, 0.0) }.apply_vector(&v).is_err());
    }
}

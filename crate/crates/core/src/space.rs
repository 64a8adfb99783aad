//! Ambient spaces, points and discrete sequences with their JSON form.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector, SLMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AmbientSpace {
    Cn(usize),
    PuncturedCn(usize),
    DiscTimesC,
    SLn(usize),
}

impl AmbientSpace {
    pub fn from_tag(tag: &str, n: usize) -> Result<Self> {
        let a = match tag {
            "cn" => AmbientSpace::Cn(n),
            "punctured-cn" => AmbientSpace::PuncturedCn(n),
            "disc-plane" => AmbientSpace::DiscTimesC,
            "sln" => AmbientSpace::SLn(n),
            other => return Err(Error::Parse(format!("unknown ambient '{other}'"))),
        };
        a.check_dim()?;
        Ok(a)
    }

    fn check_dim(&self) -> Result<()> {
        let ok = match *self {
            AmbientSpace::Cn(n) => n >= 1,
            AmbientSpace::PuncturedCn(n) | AmbientSpace::SLn(n) => n >= 2,
            AmbientSpace::DiscTimesC => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!("invalid dimension for {}", self.tag())))
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            AmbientSpace::Cn(_) => "cn",
            AmbientSpace::PuncturedCn(_) => "punctured-cn",
            AmbientSpace::DiscTimesC => "disc-plane",
            AmbientSpace::SLn(_) => "sln",
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            AmbientSpace::Cn(n) | AmbientSpace::PuncturedCn(n) | AmbientSpace::SLn(n) => n,
            AmbientSpace::DiscTimesC => 2,
        }
    }

    /// Number of complex coordinates of a point.
    pub fn point_len(&self) -> usize {
        match *self {
            AmbientSpace::SLn(n) => n * n,
            _ => self.n(),
        }
    }

    pub fn validate(&self, p: &Point) -> Result<()> {
        match (self, p) {
            (AmbientSpace::SLn(n), Point::Matrix(m)) if m.n() == *n => Ok(()),
            (AmbientSpace::SLn(_), _) => Err(Error::AmbientMismatch("expected an SLn matrix of matching size".into())),
            (_, Point::Matrix(_)) => Err(Error::AmbientMismatch("matrix point in a vector ambient".into())),
            (a, Point::Vector(v)) => {
                if v.dim() != a.n() {
                    return Err(Error::DimensionMismatch(format!("point of dimension {} in {}", v.dim(), a.tag())));
                }
                match a {
                    AmbientSpace::PuncturedCn(_) if v.norm() == 0.0 => {
                        Err(Error::PointOutsideAmbient("origin is not in the punctured space".into()))
                    }
                    AmbientSpace::DiscTimesC if v.get(0).norm() >= 1.0 => {
                        Err(Error::PointOutsideAmbient(format!("|z| = {} is not < 1", v.get(0).norm())))
                    }
                    _ => Ok(()),
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Vector(CVector),
    Matrix(SLMatrix),
}

impl Point {
    pub fn entries(&self) -> Vec<C64> {
        match self {
            Point::Vector(v) => v.entries().to_vec(),
            Point::Matrix(m) => m.matrix().data().to_vec(),
        }
    }

    pub fn as_vector(&self) -> Option<&CVector> {
        match self {
            Point::Vector(v) => Some(v),
            Point::Matrix(_) => None,
        }
    }

    pub fn as_matrix(&self) -> Option<&SLMatrix> {
        match self {
            Point::Matrix(m) => Some(m),
            Point::Vector(_) => None,
        }
    }

    /// Max-norm distance between the coordinate tuples.
    pub fn max_dist(&self, other: &Point) -> f64 {
        self.entries()
            .iter()
            .zip(other.entries().iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }
}

/// Symbolic family descriptor attached to generated sequences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl Generator {
    pub fn new(family: &str) -> Self {
        Generator { family: family.to_string(), params: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.get(key).copied()
    }

    pub fn flag(&self, key: &str) -> bool {
        self.param(key).map_or(false, |v| v != 0.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteSequence {
    ambient: AmbientSpace,
    points: Vec<Point>,
    generator: Option<Generator>,
}

fn bits(z: C64) -> (u64, u64) {
    // -0.0 and 0.0 are the same point
    ((z.re + 0.0).to_bits(), (z.im + 0.0).to_bits())
}

impl DiscreteSequence {
    pub fn new(ambient: AmbientSpace, points: Vec<Point>, generator: Option<Generator>) -> Result<Self> {
        ambient.check_dim()?;
        let mut seen: HashMap<Vec<(u64, u64)>, usize> = HashMap::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            ambient.validate(p)?;
            let key: Vec<(u64, u64)> = p.entries().into_iter().map(bits).collect();
            if let Some(&j) = seen.get(&key) {
                return Err(Error::DuplicatePoint(j, i));
            }
            seen.insert(key, i);
        }
        Ok(DiscreteSequence { ambient, points, generator })
    }

    pub fn from_vectors(ambient: AmbientSpace, points: Vec<CVector>, generator: Option<Generator>) -> Result<Self> {
        DiscreteSequence::new(ambient, points.into_iter().map(Point::Vector).collect(), generator)
    }

    pub fn from_matrices(points: Vec<SLMatrix>, generator: Option<Generator>) -> Result<Self> {
        let n = points.first().map_or(2, |m| m.n());
        DiscreteSequence::new(AmbientSpace::SLn(n), points.into_iter().map(Point::Matrix).collect(), generator)
    }

    pub fn ambient(&self) -> AmbientSpace {
        self.ambient
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn generator(&self) -> Option<&Generator> {
        self.generator.as_ref()
    }

    pub fn vectors(&self) -> Result<Vec<&CVector>> {
        self.points
            .iter()
            .map(|p| p.as_vector().ok_or_else(|| Error::AmbientMismatch("expected vector points".into())))
            .collect()
    }

    pub fn matrices(&self) -> Result<Vec<&SLMatrix>> {
        self.points
            .iter()
            .map(|p| p.as_matrix().ok_or_else(|| Error::AmbientMismatch("expected SLn points".into())))
            .collect()
    }

    pub fn prefix(&self, m: usize) -> DiscreteSequence {
        DiscreteSequence {
            ambient: self.ambient,
            points: self.points[..m.min(self.points.len())].to_vec(),
            generator: self.generator.clone(),
        }
    }

    pub fn to_file(&self) -> SequenceFile {
        SequenceFile {
            ambient: self.ambient.tag().to_string(),
            n: self.ambient.n(),
            points: self.points.iter().map(|p| p.entries().iter().map(|z| [z.re, z.im]).collect()).collect(),
            generator: self.generator.clone(),
        }
    }

    pub fn from_file(file: SequenceFile) -> Result<Self> {
        let ambient = AmbientSpace::from_tag(&file.ambient, file.n)?;
        let len = ambient.point_len();
        let mut points = Vec::with_capacity(file.points.len());
        for (i, raw) in file.points.into_iter().enumerate() {
            if raw.len() != len {
                return Err(Error::Parse(format!("point {i} has {} coordinates, expected {len}", raw.len())));
            }
            let entries: Vec<C64> = raw.iter().map(|p| c(p[0], p[1])).collect();
            let point = match ambient {
                AmbientSpace::SLn(n) => Point::Matrix(SLMatrix::new(CMatrix::from_row_major(n, n, entries)?)?),
                _ => Point::Vector(CVector::new(entries)?),
            };
            points.push(point);
        }
        DiscreteSequence::new(ambient, points, file.generator)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("sequence serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: SequenceFile = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        DiscreteSequence::from_file(file)
    }
}

/// On-disk form: {"ambient", "n", "points": [[[re, im], ...], ...], "generator"}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceFile {
    pub ambient: String,
    pub n: usize,
    pub points: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<Generator>,
}

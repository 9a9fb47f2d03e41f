//! JSON input schemas for densities, bodies and Minkowski problems.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::body::{SymmetricPolytope, Zonotope};
use crate::density::{DensityKind, WeightedDensity};
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::minkowski::MinkowskiProblem;

/// Parses `text`, reporting failures with the JSON pointer of the offending
/// value.
pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        use serde_path_to_error::Segment;
        let mut path = String::new();
        for seg in e.path().iter() {
            match seg {
                Segment::Seq { index } => path.push_str(&format!("/{index}")),
                Segment::Map { key } => path.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
                Segment::Enum { variant } => path.push_str(&format!("/{variant}")),
                Segment::Unknown => path.push_str("/?"),
            }
        }
        if path.is_empty() {
            path.push('/');
        }
        Error::Schema { path, message: e.into_inner().to_string() }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityName {
    Lebesgue,
    AbsLinear,
    PowerCone,
    Gaussian,
    BallIndicator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityFile {
    pub kind: DensityName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inv_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_space_normal: Option<Vec<f64>>,
    /// Radius of the ball for `ball_indicator`; 1 when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

fn check_half_space(theta: &[f64], normal: &Option<Vec<f64>>) -> Result<()> {
    let Some(v) = normal else { return Ok(()) };
    let (a, b) = (Vector::from_column_slice(theta), Vector::from_column_slice(v));
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    let cos = a.dot(&b) / (a.norm() * b.norm());
    if cos.is_nan() || cos <= 1.0 - 1e-12 {
        return Err(Error::InvalidArgument("half_space_normal must point along theta for this density".into()));
    }
    Ok(())
}

fn required<'a, T>(value: &'a Option<T>, field: &str) -> Result<&'a T> {
    value.as_ref().ok_or_else(|| Error::Schema { path: format!("/{field}"), message: "missing field".into() })
}

impl DensityFile {
    pub fn new(kind: DensityName) -> Self {
        Self { kind, theta: None, inv_p: None, half_space_normal: None, radius: None }
    }

    pub fn build(&self) -> Result<WeightedDensity> {
        match self.kind {
            DensityName::Lebesgue => Ok(WeightedDensity::lebesgue()),
            DensityName::AbsLinear => {
                let theta = required(&self.theta, "theta")?;
                check_half_space(theta, &self.half_space_normal)?;
                WeightedDensity::abs_linear(Vector::from_column_slice(theta))
            }
            DensityName::PowerCone => {
                let theta = required(&self.theta, "theta")?;
                let inv_p = required(&self.inv_p, "inv_p")?;
                check_half_space(theta, &self.half_space_normal)?;
                WeightedDensity::power_cone(Vector::from_column_slice(theta), *inv_p)
            }
            DensityName::Gaussian => Ok(WeightedDensity::gaussian()),
            DensityName::BallIndicator => WeightedDensity::ball_indicator(self.radius.unwrap_or(1.0)),
        }
    }

    pub fn from_density(d: &WeightedDensity) -> Result<Self> {
        let v = |x: &Vector| Some(x.iter().copied().collect::<Vec<f64>>());
        Ok(match d.kind() {
            DensityKind::Lebesgue => Self::new(DensityName::Lebesgue),
            DensityKind::AbsLinear { theta } => Self { theta: v(theta), ..Self::new(DensityName::AbsLinear) },
            DensityKind::PowerCone { theta, inv_p } => {
                Self { theta: v(theta), inv_p: Some(*inv_p), ..Self::new(DensityName::PowerCone) }
            }
            DensityKind::Gaussian => Self::new(DensityName::Gaussian),
            DensityKind::BallIndicator { radius } => {
                Self { radius: Some(*radius), ..Self::new(DensityName::BallIndicator) }
            }
            DensityKind::Custom(c) => {
                return Err(Error::InvalidArgument(format!("custom density {} has no file form", c.name)))
            }
        })
    }
}

/// A body given by halfspaces or by zonotope generators. Halfspace lists may
/// be full (antipodally paired, entry N/2 + i opposite entry i) or carry one
/// normal per pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BodyFile {
    HalfSpaces { normals: Vec<Vec<f64>>, offsets: Vec<f64> },
    Generators { generators: Vec<Vec<f64>> },
}

fn to_vectors(rows: &[Vec<f64>]) -> Vec<Vector> {
    rows.iter().map(|r| Vector::from_column_slice(r)).collect()
}

/// Whether the list is already antipodally paired.
fn is_paired(normals: &[Vector]) -> bool {
    let h = normals.len() / 2;
    normals.len().is_multiple_of(2)
        && h > 0
        && (0..h).all(|i| {
            let (u, v) = (&normals[i], &normals[h + i]);
            u.len() == v.len() && (u.normalize() + v.normalize()).amax() < 1e-12
        })
}

impl BodyFile {
    pub fn build(&self) -> Result<SymmetricPolytope> {
        match self {
            BodyFile::HalfSpaces { normals, offsets } => {
                let normals = to_vectors(normals);
                if normals.len() != offsets.len() {
                    return Err(Error::InvalidArgument(format!(
                        "{} normals but {} offsets",
                        normals.len(),
                        offsets.len()
                    )));
                }
                if is_paired(&normals) {
                    let h = normals.len() / 2;
                    let scale = offsets.iter().cloned().fold(0.0, f64::max);
                    for i in 0..h {
                        let (a, b) = (offsets[i] / normals[i].norm(), offsets[h + i] / normals[h + i].norm());
                        if (a - b).abs() > 1e-12 * scale.max(1.0) {
                            return Err(Error::DegenerateInput(format!(
                                "offsets {i} and {} of an antipodal pair differ",
                                h + i
                            )));
                        }
                    }
                    SymmetricPolytope::from_half(&normals[..h], &offsets[..h])
                } else {
                    SymmetricPolytope::from_half(&normals, offsets)
                }
            }
            BodyFile::Generators { generators } => Zonotope::new(to_vectors(generators)).realize(),
        }
    }

    /// Halfspace form with one normal per antipodal pair.
    pub fn from_polytope(p: &SymmetricPolytope) -> Self {
        BodyFile::HalfSpaces {
            normals: p.half_normals().iter().map(|u| u.iter().copied().collect()).collect(),
            offsets: p.half_offsets().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub density: DensityFile,
    pub normals: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
}

impl ProblemFile {
    pub fn build(&self) -> Result<MinkowskiProblem> {
        let d = self.density.build()?;
        let normals = to_vectors(&self.normals);
        if normals.len() != self.targets.len() {
            return Err(Error::InvalidArgument(format!(
                "{} normals but {} targets",
                normals.len(),
                self.targets.len()
            )));
        }
        let unit: Vec<Vector> = normals
            .iter()
            .map(|u| {
                let norm = u.norm();
                if norm == 0.0 {
                    Err(Error::DegenerateInput("zero normal".into()))
                } else {
                    Ok(u / norm)
                }
            })
            .collect::<Result<_>>()?;
        if is_paired(&unit) {
            MinkowskiProblem::new(d, unit, self.targets.clone())
        } else {
            MinkowskiProblem::from_half(d, unit, self.targets.clone())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::sq2;

    #[test]
    fn densities_parse() {
        let d: DensityFile = parse(r#"{"kind":"abs_linear","theta":[1,0]}"#).unwrap();
        assert_eq!(d.build().unwrap().label(), WeightedDensity::x1(2).label());
        let d: DensityFile = parse(r#"{"kind":"lebesgue"}"#).unwrap();
        assert_eq!(d, DensityFile::new(DensityName::Lebesgue));
        let e = parse::<DensityFile>(r#"{"kind":"abs_linear"}"#).unwrap().build().unwrap_err();
        assert!(matches!(e, Error::Schema { ref path, .. } if path == "/theta"));
        assert!(parse::<DensityFile>(r#"{"kind":"cauchy"}"#).is_err());
        let d: DensityFile = parse(r#"{"kind":"power_cone","theta":[0,1],"inv_p":2}"#).unwrap();
        assert_eq!(d.build().unwrap().homogeneity(), Some(2.0));
        let bad: Result<DensityFile> = parse(r#"{"kind":"abs_linear","theta":[1,0],"half_space_normal":[0,1]}"#);
        assert!(bad.unwrap().build().is_err());
    }

    #[test]
    fn schema_errors_carry_pointers() {
        let e = parse::<DensityFile>(r#"{"kind":"power_cone","theta":[1,0],"inv_p":"two"}"#).unwrap_err();
        match e {
            Error::Schema { path, .. } => assert_eq!(path, "/inv_p"),
            other => panic!("unexpected {other:?}"),
        }
        let e = parse::<ProblemFile>(r#"{"density":{"kind":"lebesgue"},"normals":[[1,0],[0,"x"]],"targets":[1,1]}"#)
            .unwrap_err();
        match e {
            Error::Schema { path, .. } => assert_eq!(path, "/normals/1/1"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bodies_round_trip() {
        let half: BodyFile = parse(r#"{"normals":[[1,0],[0,1]],"offsets":[1,1]}"#).unwrap();
        let full: BodyFile = parse(r#"{"normals":[[1,0],[0,1],[-1,0],[0,-1]],"offsets":[1,1,1,1]}"#).unwrap();
        let gens: BodyFile = parse(r#"{"generators":[[1,0],[0,1]]}"#).unwrap();
        for b in [half, full, gens] {
            let p = b.build().unwrap();
            assert!((p.volume() - 4.0).abs() < 1e-12);
        }
        let back = BodyFile::from_polytope(&sq2());
        let text = serde_json::to_string(&back).unwrap();
        assert_eq!(parse::<BodyFile>(&text).unwrap().build().unwrap().volume(), 4.0);
    }

    #[test]
    fn problems_parse() {
        let p: ProblemFile =
            parse(r#"{"density":{"kind":"abs_linear","theta":[1,0]},"normals":[[1,0],[0,1]],"targets":[2,1]}"#)
                .unwrap();
        let pr = p.build().unwrap();
        assert_eq!(pr.half_targets(), &[2.0, 1.0]);
    }
}

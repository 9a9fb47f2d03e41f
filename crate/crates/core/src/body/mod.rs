//! Origin-symmetric polytopes, zonotopes and the fixtures used across the crate.

mod hull;
mod polytope;
pub mod random;
mod zonotope;

pub use hull::minkowski_sum;
pub use polytope::{Face, HPolytope, VERTEX_TOL};
pub use zonotope::{is_zonotope, Zonotope, ZonotopeCertificate};

use crate::error::{Error, Result};
use crate::linalg::{canonical_sign, unit, vector, Vector};

const UNIT_TOL: f64 = 1e-12;

/// Symmetric polytope {x : |<x, u_i>| <= a_i}, stored with the full list of
/// normals: entry N/2 + i is the antipode of entry i and carries the same
/// offset.
#[derive(Debug, Clone)]
pub struct SymmetricPolytope {
    inner: HPolytope,
}

impl SymmetricPolytope {
    /// Builds the body from the full, antipodally paired constraint list.
    pub fn from_halfspaces(normals: Vec<Vector>, offsets: Vec<f64>) -> Result<Self> {
        let n = normals.first().map(|u| u.len()).unwrap_or(0);
        if !(2..=4).contains(&n) {
            return Err(Error::UnsupportedDimension(n));
        }
        if normals.len() != offsets.len() {
            return Err(Error::InvalidArgument(format!("{} normals but {} offsets", normals.len(), offsets.len())));
        }
        if !normals.len().is_multiple_of(2) {
            return Err(Error::DegenerateInput("odd number of halfspaces".into()));
        }
        for (i, u) in normals.iter().enumerate() {
            if u.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: u.len() });
            }
            if (u.norm() - 1.0).abs() > UNIT_TOL {
                return Err(Error::InvalidArgument(format!("normal {i} is not a unit vector")));
            }
        }
        for (i, a) in offsets.iter().enumerate() {
            if !(*a > 0.0 && a.is_finite()) {
                return Err(Error::InvalidArgument(format!("offset {i} must be positive, got {a}")));
            }
        }
        let half = normals.len() / 2;
        let scale = offsets.iter().cloned().fold(0.0, f64::max);
        for i in 0..half {
            if (&normals[i] + &normals[half + i]).amax() > UNIT_TOL
                || (offsets[i] - offsets[half + i]).abs() > UNIT_TOL * scale
            {
                return Err(Error::DegenerateInput(format!(
                    "antipodal pairing violated between halfspaces {i} and {}",
                    half + i
                )));
            }
        }
        for i in 0..normals.len() {
            for j in i + 1..normals.len() {
                if (&normals[i] - &normals[j]).amax() < UNIT_TOL {
                    return Err(Error::DegenerateInput(format!("normals {i} and {j} coincide")));
                }
            }
        }
        Ok(Self { inner: HPolytope::new(normals, offsets)? })
    }

    /// Builds the body from one representative per antipodal pair. Normals
    /// need not be unit: each pair (v, a) is rescaled to (v/|v|, a/|v|).
    pub fn from_half(half_normals: &[Vector], half_offsets: &[f64]) -> Result<Self> {
        if half_normals.len() != half_offsets.len() {
            return Err(Error::InvalidArgument("normals and offsets differ in length".into()));
        }
        let mut normals = Vec::with_capacity(2 * half_normals.len());
        let mut offsets = Vec::with_capacity(2 * half_normals.len());
        for (v, a) in half_normals.iter().zip(half_offsets) {
            let norm = v.norm();
            if norm == 0.0 {
                return Err(Error::DegenerateInput("zero normal".into()));
            }
            normals.push(v / norm);
            offsets.push(a / norm);
        }
        let negated: Vec<Vector> = normals.iter().map(|u| -u).collect();
        normals.extend(negated);
        offsets.extend_from_within(..);
        Self::from_halfspaces(normals, offsets)
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// Number N of halfspaces (twice the number of antipodal pairs).
    pub fn len(&self) -> usize {
        self.inner.normals().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn normals(&self) -> &[Vector] {
        self.inner.normals()
    }

    pub fn offsets(&self) -> &[f64] {
        self.inner.offsets()
    }

    pub fn half_normals(&self) -> &[Vector] {
        &self.inner.normals()[..self.len() / 2]
    }

    pub fn half_offsets(&self) -> &[f64] {
        &self.inner.offsets()[..self.len() / 2]
    }

    pub fn vertices(&self) -> &[Vector] {
        self.inner.vertices()
    }

    pub fn faces(&self) -> &[Face] {
        self.inner.faces()
    }

    pub fn polytope(&self) -> &HPolytope {
        &self.inner
    }

    pub fn support_function(&self, x: &Vector) -> f64 {
        self.inner.support_function(x)
    }

    pub fn contains(&self, x: &Vector) -> bool {
        self.inner.contains(x)
    }

    /// Dilation by t > 0. Reuses the face structure of `self`.
    pub fn scale(&self, t: f64) -> Self {
        assert!(t > 0.0, "scale factor must be positive");
        Self { inner: self.inner.scaled(t) }
    }

    /// Drops halfspaces whose faces are empty.
    pub fn prune_redundant(&self) -> Result<Self> {
        let half = self.len() / 2;
        let keep: Vec<usize> = (0..half).filter(|&i| !self.faces()[i].is_empty()).collect();
        let normals: Vec<Vector> = keep.iter().map(|&i| self.normals()[i].clone()).collect();
        let offsets: Vec<f64> = keep.iter().map(|&i| self.offsets()[i]).collect();
        Self::from_half(&normals, &offsets)
    }

    /// Same normals with new (paired) half offsets.
    pub fn with_half_offsets(&self, half_offsets: &[f64]) -> Result<Self> {
        let mut offsets = half_offsets.to_vec();
        offsets.extend_from_within(..);
        Self::from_halfspaces(self.normals().to_vec(), offsets)
    }

    /// R(L): the smallest R with L inside R times the unit ball.
    pub fn circumradius(&self) -> f64 {
        self.vertices().iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Per-coordinate half-widths of the axis-aligned bounding box.
    pub fn bounding_box(&self) -> Vector {
        let n = self.dim();
        Vector::from_fn(n, |i, _| self.vertices().iter().map(|v| v[i].abs()).fold(0.0, f64::max))
    }

    /// Lebesgue volume, by the cone-volume formula.
    pub fn volume(&self) -> f64 {
        let n = self.dim() as f64;
        self.faces().iter().map(|f| f.offset * f.volume).sum::<f64>() / n
    }

    /// Applies an orthogonal map given column-wise.
    pub fn rotate(&self, rotation: &nalgebra::DMatrix<f64>) -> Result<Self> {
        let normals: Vec<Vector> = self.half_normals().iter().map(|u| rotation * u).collect();
        Self::from_half(&normals, self.half_offsets())
    }
}

/// [-1, 1]^2
pub fn sq2() -> SymmetricPolytope {
    cube(2)
}

/// [-1, 1]^3
pub fn cu3() -> SymmetricPolytope {
    cube(3)
}

/// conv{+-e1, +-e2}
pub fn dia2() -> SymmetricPolytope {
    cross_polytope(2)
}

/// conv{+-e1, +-e2, +-e3}
pub fn octahedron() -> SymmetricPolytope {
    cross_polytope(3)
}

pub fn cube(n: usize) -> SymmetricPolytope {
    let normals: Vec<Vector> = (0..n).map(|i| unit(n, i)).collect();
    SymmetricPolytope::from_half(&normals, &vec![1.0; n]).expect("cube is valid")
}

pub fn cross_polytope(n: usize) -> SymmetricPolytope {
    let mut normals = Vec::new();
    for mask in 0..(1usize << (n - 1)) {
        let v = Vector::from_fn(n, |i, _| if i > 0 && mask & (1 << (i - 1)) != 0 { -1.0 } else { 1.0 });
        normals.push(v);
    }
    let offsets = vec![1.0; normals.len()];
    SymmetricPolytope::from_half(&normals, &offsets).expect("cross-polytope is valid")
}

/// Octahedron with its vertices cut off: conv{+-e_i} intersected with
/// {|x_i| <= 1 - cut}.
pub fn truncated_octahedron(cut: f64) -> Result<SymmetricPolytope> {
    if !(cut > 0.0 && cut < 1.0) {
        return Err(Error::InvalidArgument(format!("cut must lie in (0, 1), got {cut}")));
    }
    let o = octahedron();
    let mut normals = o.half_normals().to_vec();
    let mut offsets = o.half_offsets().to_vec();
    for i in 0..3 {
        normals.push(unit(3, i));
        offsets.push(1.0 - cut);
    }
    SymmetricPolytope::from_half(&normals, &offsets)
}

/// Regular polygon with `m` (even) vertices on the circle of radius `r`.
pub fn regular_polygon(m: usize, r: f64) -> Result<SymmetricPolytope> {
    if m < 4 || !m.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("regular polygon needs an even m >= 4, got {m}")));
    }
    let step = 2.0 * std::f64::consts::PI / m as f64;
    let apothem = r * (step / 2.0).cos();
    let normals: Vec<Vector> = (0..m / 2)
        .map(|k| {
            let a = step * (k as f64 + 0.5);
            vector(&[a.cos(), a.sin()])
        })
        .collect();
    SymmetricPolytope::from_half(&normals, &vec![apothem; m / 2])
}

/// Axis-aligned box with the given half-widths.
pub fn boxed(half_widths: &[f64]) -> Result<SymmetricPolytope> {
    let n = half_widths.len();
    let normals: Vec<Vector> = (0..n).map(|i| unit(n, i)).collect();
    SymmetricPolytope::from_half(&normals, half_widths)
}

/// Canonical representative of a line direction, used when deduplicating
/// candidate normals.
pub(crate) fn line_key(u: &Vector) -> Vector {
    canonical_sign(u, 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn has_vertex(p: &SymmetricPolytope, x: &[f64]) -> bool {
        let x = vector(x);
        p.vertices().iter().any(|v| (v - &x).amax() < 1e-9)
    }

    #[test]
    fn fixtures_from_halfspaces() {
        let sq =
            SymmetricPolytope::from_halfspaces(vec![unit(2, 0), unit(2, 1), -unit(2, 0), -unit(2, 1)], vec![1.0; 4])
                .unwrap();
        assert_eq!(sq.vertices().len(), 4);
        for s in [[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]] {
            assert!(has_vertex(&sq, &s));
        }
        let cu = cu3();
        assert_eq!(cu.vertices().len(), 8);
        assert_eq!(cu.faces().iter().filter(|f| !f.is_empty()).count(), 6);

        let d = 0.5f64.sqrt();
        let dia = SymmetricPolytope::from_halfspaces(
            vec![vector(&[d, d]), vector(&[d, -d]), vector(&[-d, -d]), vector(&[-d, d])],
            vec![d; 4],
        )
        .unwrap();
        assert_eq!(dia.vertices().len(), 4);
        for s in [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]] {
            assert!(has_vertex(&dia, &s));
        }
    }

    #[test]
    fn input_errors() {
        let r = SymmetricPolytope::from_halfspaces(vec![unit(2, 0), -unit(2, 0)], vec![1.0, 1.0]);
        assert_eq!(r.unwrap_err(), Error::UnboundedBody);
        let r = SymmetricPolytope::from_half(&[unit(2, 0), unit(2, 0), unit(2, 1)], &[1.0, 2.0, 1.0]);
        assert!(matches!(r, Err(Error::DegenerateInput(_))));
        let r =
            SymmetricPolytope::from_halfspaces(vec![unit(2, 0), unit(2, 1), -unit(2, 1), -unit(2, 0)], vec![1.0; 4]);
        assert!(matches!(r, Err(Error::DegenerateInput(_))));
        let r = SymmetricPolytope::from_half(&[unit(2, 0), unit(2, 1)], &[1.0, -1.0]);
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
        let r = SymmetricPolytope::from_half(&[unit(5, 0)], &[1.0]);
        assert_eq!(r.unwrap_err(), Error::UnsupportedDimension(5));
    }

    #[test]
    fn support_function_examples() {
        assert_abs_diff_eq!(sq2().support_function(&unit(2, 0)), 1.0);
        assert_abs_diff_eq!(sq2().support_function(&vector(&[1.0, 1.0])), 2.0);
        assert_abs_diff_eq!(dia2().support_function(&vector(&[0.6, 0.8])), 0.8, epsilon = 1e-15);
    }

    #[test]
    fn scale_examples() {
        let s = sq2().scale(2.0);
        assert!(has_vertex(&s, &[2.0, -2.0]));
        assert_abs_diff_eq!(s.offsets()[0], 2.0);
        let c = cu3().scale(0.5);
        assert!(has_vertex(&c, &[0.5, 0.5, -0.5]));
        let d = dia2().scale(3.0);
        for s in [[3.0, 0.0], [-3.0, 0.0], [0.0, 3.0], [0.0, -3.0]] {
            assert!(has_vertex(&d, &s));
        }
        assert_abs_diff_eq!(d.faces()[0].volume, 3.0 * 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn volumes() {
        assert_abs_diff_eq!(sq2().volume(), 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cu3().volume(), 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(dia2().volume(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(octahedron().volume(), 4.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cube(4).volume(), 16.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cross_polytope(4).volume(), 16.0 / 24.0, epsilon = 1e-12);
        let hex = regular_polygon(6, 1.0).unwrap();
        assert_abs_diff_eq!(hex.volume(), 1.5 * 3f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn prune_drops_empty_faces() {
        let p =
            SymmetricPolytope::from_half(&[unit(2, 0), unit(2, 1), vector(&[1.0, 1.0])], &[1.0, 1.0, 10.0]).unwrap();
        assert!(p.faces()[2].is_empty());
        let q = p.prune_redundant().unwrap();
        assert_eq!(q.len(), 4);
    }

    #[test]
    fn central_symmetry_of_vertices() {
        let p = random::random_symmetric_polytope(3, 7, 11).unwrap();
        for v in p.vertices() {
            assert!(p.vertices().iter().any(|w| (v + w).amax() < 1e-9));
        }
        for v in p.vertices() {
            for (u, a) in p.normals().iter().zip(p.offsets()) {
                assert!(u.dot(v) <= a + 1e-9);
            }
        }
    }
}

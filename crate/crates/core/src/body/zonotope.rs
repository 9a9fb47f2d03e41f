//! Zonotopes and the 2-face symmetry test that certifies them.

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{orthogonal_complement, rank, Vector};

use super::{line_key, SymmetricPolytope};

/// Minkowski sum of the segments [-g_j, g_j].
#[derive(Debug, Clone)]
pub struct Zonotope {
    pub generators: Vec<Vector>,
}

impl Zonotope {
    pub fn new(generators: Vec<Vector>) -> Self {
        Self { generators }
    }

    /// H-representation of the zonotope. Facet normals are the normals of
    /// the hyperplanes spanned by (n-1)-subsets of generators; the support
    /// function is h(u) = sum_j |<g_j, u>|.
    pub fn realize(&self) -> Result<SymmetricPolytope> {
        let n = self.generators.first().map(|g| g.len()).ok_or(Error::DegenerateGenerators)?;
        let gens: Vec<&Vector> = self.generators.iter().filter(|g| g.amax() > 0.0).collect();
        let owned: Vec<Vector> = gens.iter().map(|g| (*g).clone()).collect();
        if rank(&owned, 1e-12) < n {
            return Err(Error::DegenerateGenerators);
        }
        let mut normals: Vec<Vector> = Vec::new();
        for subset in gens.iter().combinations(n - 1) {
            let vs: Vec<Vector> = subset.iter().map(|g| (**g).clone()).collect();
            let scale: f64 = vs.iter().map(|v| v.norm()).product();
            let Some(u) = orthogonal_complement(&vs, 1e-12 * scale) else { continue };
            let u = line_key(&u);
            if !normals.iter().any(|w| (w - &u).amax() < 1e-9) {
                normals.push(u);
            }
        }
        let offsets: Vec<f64> = normals.iter().map(|u| gens.iter().map(|g| g.dot(u).abs()).sum()).collect();
        SymmetricPolytope::from_half(&normals, &offsets)
    }

    pub fn support_function(&self, x: &Vector) -> f64 {
        self.generators.iter().map(|g| g.dot(x).abs()).sum()
    }
}

/// Outcome of the 2-face symmetry test.
#[derive(Debug, Clone, Serialize)]
pub struct ZonotopeCertificate {
    pub is_zonotope: bool,
    pub two_faces_checked: usize,
    /// Vertices of a 2-face that is not centrally symmetric.
    pub violating_face: Option<Vec<Vec<f64>>>,
}

/// A symmetric polytope is a zonotope iff all of its 2-faces are centrally
/// symmetric. Every symmetric polygon qualifies.
pub fn is_zonotope(p: &SymmetricPolytope) -> ZonotopeCertificate {
    let n = p.dim();
    if n == 2 {
        return ZonotopeCertificate { is_zonotope: true, two_faces_checked: 1, violating_face: None };
    }
    let poly = p.polytope();
    let tol = 1e-9 * p.circumradius().max(1.0);
    let faces = poly.faces_of_dim(2);
    for verts in &faces {
        let pts: Vec<&Vector> = verts.iter().map(|&v| &poly.vertices()[v]).collect();
        let center = pts.iter().fold(Vector::zeros(n), |acc, v| acc + *v) / pts.len() as f64;
        let symmetric = pts.iter().all(|v| {
            let mirror = &center * 2.0 - *v;
            pts.iter().any(|w| (*w - &mirror).amax() <= tol)
        });
        if !symmetric {
            return ZonotopeCertificate {
                is_zonotope: false,
                two_faces_checked: faces.len(),
                violating_face: Some(pts.iter().map(|v| v.iter().copied().collect()).collect()),
            };
        }
    }
    ZonotopeCertificate { is_zonotope: true, two_faces_checked: faces.len(), violating_face: None }
}

//! Bounded polytopes in H-representation {x : <x, u_i> <= a_i} with vertices
//! enumerated exactly from n-subsets of constraints.

use std::collections::HashSet;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::linalg::{affine_rank, orthogonal_complement, rank, simplex_volume, solve_rows, Vector};

/// Relative tolerance for vertex deduplication and incidence; scaled by the
/// largest offset so that it is invariant under dilation.
pub const VERTEX_TOL: f64 = 1e-9;

/// Facet of a polytope orthogonal to one of its constraint normals.
#[derive(Debug, Clone)]
pub struct Face {
    pub index: usize,
    pub normal: Vector,
    pub offset: f64,
    /// Vertex ids on the face. Ordered along the boundary for n = 2, 3.
    pub vertices: Vec<usize>,
    /// (n-1)-simplices covering the face, as vertex ids.
    pub simplices: Vec<Vec<usize>>,
    /// (n-1)-dimensional volume.
    pub volume: f64,
}

impl Face {
    /// A face is empty when it has no (n-1)-dimensional extent.
    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct HPolytope {
    dim: usize,
    normals: Vec<Vector>,
    offsets: Vec<f64>,
    vertices: Vec<Vector>,
    /// Sorted constraint ids tight at each vertex.
    incidence: Vec<Vec<usize>>,
    faces: Vec<Face>,
    tol: f64,
}

impl HPolytope {
    /// Builds the polytope and its face structure. Offsets may be zero or
    /// negative here; callers that need the origin inside check that
    /// themselves.
    pub fn new(normals: Vec<Vector>, offsets: Vec<f64>) -> Result<Self> {
        let dim =
            normals.first().map(|u| u.len()).ok_or_else(|| Error::DegenerateInput("no halfspaces given".into()))?;
        if normals.len() != offsets.len() {
            return Err(Error::InvalidArgument(format!("{} normals but {} offsets", normals.len(), offsets.len())));
        }
        for u in &normals {
            if u.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: u.len() });
            }
        }
        if rank(&normals, 1e-12) < dim {
            return Err(Error::UnboundedBody);
        }
        let scale = offsets.iter().fold(0.0f64, |m, a| m.max(a.abs())).max(f64::MIN_POSITIVE);
        let tol = VERTEX_TOL * scale;

        let mut vertices: Vec<Vector> = Vec::new();
        for subset in (0..normals.len()).combinations(dim) {
            let rows: Vec<&Vector> = subset.iter().map(|&i| &normals[i]).collect();
            let rhs: Vec<f64> = subset.iter().map(|&i| offsets[i]).collect();
            let Some(x) = solve_rows(&rows, &rhs, 1e-12) else { continue };
            if !x.iter().all(|c| c.is_finite()) {
                continue;
            }
            let feasible = normals.iter().zip(&offsets).all(|(u, a)| u.dot(&x) <= a + tol);
            if feasible && !vertices.iter().any(|v| (v - &x).amax() <= tol) {
                vertices.push(x);
            }
        }

        let incidence: Vec<Vec<usize>> = vertices
            .iter()
            .map(|v| (0..normals.len()).filter(|&j| (normals[j].dot(v) - offsets[j]).abs() <= tol).collect())
            .collect();

        let mut poly = Self { dim, normals, offsets, vertices, incidence, faces: Vec::new(), tol };
        poly.faces = (0..poly.normals.len()).map(|i| poly.build_face(i)).collect();
        Ok(poly)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn normals(&self) -> &[Vector] {
        &self.normals
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn incidence(&self) -> &[Vec<usize>] {
        &self.incidence
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn is_tight(&self, vertex: usize, constraint: usize) -> bool {
        self.incidence[vertex].binary_search(&constraint).is_ok()
    }

    pub fn contains(&self, x: &Vector) -> bool {
        self.normals.iter().zip(&self.offsets).all(|(u, a)| u.dot(x) <= *a)
    }

    pub fn support_function(&self, x: &Vector) -> f64 {
        self.vertices.iter().map(|v| v.dot(x)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Vertex ids attaining the support value in direction `x`.
    pub fn support_set(&self, x: &Vector) -> Vec<usize> {
        let h = self.support_function(x);
        let tol = self.tol * x.norm().max(1.0);
        (0..self.vertices.len()).filter(|&i| self.vertices[i].dot(x) >= h - tol).collect()
    }

    /// Coordinates of the vertices of the given simplex.
    pub fn simplex_points(&self, simplex: &[usize]) -> Vec<&Vector> {
        simplex.iter().map(|&i| &self.vertices[i]).collect()
    }

    /// Pairs of vertex ids joined by an edge.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for a in 0..self.vertices.len() {
            for b in a + 1..self.vertices.len() {
                let common: Vec<Vector> = self.incidence[a]
                    .iter()
                    .filter(|j| self.incidence[b].binary_search(j).is_ok())
                    .map(|&j| self.normals[j].clone())
                    .collect();
                if common.len() >= self.dim - 1 && rank(&common, 1e-9) == self.dim - 1 {
                    edges.push((a, b));
                }
            }
        }
        edges
    }

    /// Vertex sets of all faces of dimension `k`, found as intersections of
    /// n - k facets.
    pub fn faces_of_dim(&self, k: usize) -> Vec<Vec<usize>> {
        assert!(k < self.dim);
        let facets: Vec<usize> = (0..self.faces.len()).filter(|&i| !self.faces[i].is_empty()).collect();
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for subset in facets.iter().copied().combinations(self.dim - k) {
            let verts: Vec<usize> =
                (0..self.vertices.len()).filter(|&v| subset.iter().all(|&j| self.is_tight(v, j))).collect();
            if verts.len() < k + 1 {
                continue;
            }
            let pts: Vec<&Vector> = verts.iter().map(|&v| &self.vertices[v]).collect();
            if affine_rank(&pts, self.tol) == k && seen.insert(verts.clone()) {
                out.push(verts);
            }
        }
        out
    }

    /// Returns a copy with every constraint offset and vertex multiplied by
    /// `t > 0`; the combinatorics are unchanged.
    pub fn scaled(&self, t: f64) -> Self {
        let k = (self.dim - 1) as i32;
        let mut out = self.clone();
        out.offsets.iter_mut().for_each(|a| *a *= t);
        out.vertices.iter_mut().for_each(|v| *v *= t);
        out.faces.iter_mut().for_each(|f| {
            f.offset *= t;
            f.volume *= t.powi(k);
        });
        out.tol *= t;
        out
    }

    /// Intersection with the extra halfspace {<x, u> <= a}.
    pub fn with_halfspace(&self, u: Vector, a: f64) -> Result<Self> {
        let mut normals = self.normals.clone();
        let mut offsets = self.offsets.clone();
        normals.push(u);
        offsets.push(a);
        Self::new(normals, offsets)
    }

    fn build_face(&self, index: usize) -> Face {
        let verts: Vec<usize> = (0..self.vertices.len()).filter(|&v| self.is_tight(v, index)).collect();
        let mut face = Face {
            index,
            normal: self.normals[index].clone(),
            offset: self.offsets[index],
            vertices: verts.clone(),
            simplices: Vec::new(),
            volume: 0.0,
        };
        let k = self.dim - 1;
        if verts.len() < k + 1 {
            return face;
        }
        let pts: Vec<&Vector> = verts.iter().map(|&v| &self.vertices[v]).collect();
        if affine_rank(&pts, self.tol) < k {
            return face;
        }
        face.simplices = self.triangulate(&verts, k);
        face.volume = face.simplices.iter().map(|s| simplex_volume(&self.simplex_points(s))).sum();
        face.vertices = self.order_face_vertices(&verts, &face.normal);
        face
    }

    /// Cone-from-apex triangulation of the k-dimensional face with vertex set
    /// `verts`: cone the first vertex over every (k-1)-subface not containing it.
    fn triangulate(&self, verts: &[usize], k: usize) -> Vec<Vec<usize>> {
        match k {
            0 => return vec![vec![verts[0]]],
            1 => {
                let base = &self.vertices[verts[0]];
                let far = verts
                    .iter()
                    .copied()
                    .max_by(|&a, &b| {
                        let da = (&self.vertices[a] - base).norm();
                        let db = (&self.vertices[b] - base).norm();
                        da.total_cmp(&db)
                    })
                    .unwrap();
                let dir = &self.vertices[far] - base;
                let proj = |v: usize| self.vertices[v].dot(&dir);
                let lo = verts.iter().copied().min_by(|&a, &b| proj(a).total_cmp(&proj(b))).unwrap();
                let hi = verts.iter().copied().max_by(|&a, &b| proj(a).total_cmp(&proj(b))).unwrap();
                return vec![vec![lo, hi]];
            }
            _ => {}
        }
        let apex = verts[0];
        let mut seen = HashSet::new();
        let mut simplices = Vec::new();
        for j in 0..self.normals.len() {
            if self.is_tight(apex, j) {
                continue;
            }
            let sub: Vec<usize> = verts.iter().copied().filter(|&v| self.is_tight(v, j)).collect();
            if sub.len() < k || sub.len() == verts.len() || seen.contains(&sub) {
                continue;
            }
            let pts: Vec<&Vector> = sub.iter().map(|&v| &self.vertices[v]).collect();
            if affine_rank(&pts, self.tol) != k - 1 {
                continue;
            }
            for mut s in self.triangulate(&sub, k - 1) {
                s.insert(0, apex);
                simplices.push(s);
            }
            seen.insert(sub);
        }
        simplices
    }

    fn order_face_vertices(&self, verts: &[usize], normal: &Vector) -> Vec<usize> {
        match self.dim {
            2 => self.triangulate(verts, 1).remove(0),
            3 => {
                let centroid =
                    verts.iter().fold(Vector::zeros(3), |acc, &v| acc + &self.vertices[v]) / verts.len() as f64;
                let probe = if normal[0].abs() < 0.9 { crate::linalg::unit(3, 0) } else { crate::linalg::unit(3, 1) };
                let e1 = orthogonal_complement(&[normal.clone(), probe], 1e-12).expect("independent");
                let e2 = normal.cross(&e1);
                let mut ordered = verts.to_vec();
                ordered.sort_by(|&a, &b| {
                    let da = &self.vertices[a] - &centroid;
                    let db = &self.vertices[b] - &centroid;
                    da.dot(&e2).atan2(da.dot(&e1)).total_cmp(&db.dot(&e2).atan2(db.dot(&e1)))
                });
                ordered
            }
            _ => verts.to_vec(),
        }
    }
}

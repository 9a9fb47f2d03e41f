//! Minkowski sums of symmetric polytopes in H-form.
//!
//! Every facet normal of P + Q is either a facet normal of P or Q, or (in
//! R^3) orthogonal to an edge of P and an edge of Q. Each candidate is kept
//! iff the face of P + Q it exposes is (n-1)-dimensional.

use crate::error::{Error, Result};
use crate::linalg::{affine_rank, orthogonal_complement, Vector};

use super::{line_key, SymmetricPolytope};

pub fn minkowski_sum(p: &SymmetricPolytope, q: &SymmetricPolytope) -> Result<SymmetricPolytope> {
    let n = p.dim();
    if q.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: q.dim() });
    }
    if n > 3 {
        return Err(Error::DimensionTooLarge { max: 3, got: n });
    }
    let mut candidates: Vec<Vector> = Vec::new();
    for body in [p, q] {
        for f in body.faces() {
            if !f.is_empty() {
                candidates.push(f.normal.clone());
            }
        }
    }
    if n == 3 {
        let edge_dirs = |b: &SymmetricPolytope| -> Vec<Vector> {
            let poly = b.polytope();
            poly.edges().into_iter().map(|(a, c)| &poly.vertices()[c] - &poly.vertices()[a]).collect()
        };
        let (ep, eq) = (edge_dirs(p), edge_dirs(q));
        for a in &ep {
            for b in &eq {
                if let Some(u) = orthogonal_complement(&[a.clone(), b.clone()], 1e-9 * a.norm() * b.norm()) {
                    candidates.push(u);
                }
            }
        }
    }
    candidates_to_body(p, q, candidates)
}

fn candidates_to_body(
    p: &SymmetricPolytope,
    q: &SymmetricPolytope,
    candidates: Vec<Vector>,
) -> Result<SymmetricPolytope> {
    let n = p.dim();
    let scale = p.circumradius() + q.circumradius();
    let tol = 1e-9 * scale;
    let mut normals: Vec<Vector> = Vec::new();
    let mut offsets: Vec<f64> = Vec::new();
    for u in candidates {
        let u = line_key(&u);
        if normals.iter().any(|w| (w - &u).amax() < 1e-9) {
            continue;
        }
        let sp = p.polytope().support_set(&u);
        let sq = q.polytope().support_set(&u);
        let sums: Vec<Vector> = sp
            .iter()
            .flat_map(|&i| sq.iter().map(move |&j| (i, j)))
            .map(|(i, j)| &p.vertices()[i] + &q.vertices()[j])
            .collect();
        let refs: Vec<&Vector> = sums.iter().collect();
        if affine_rank(&refs, tol) == n - 1 {
            offsets.push(p.support_function(&u) + q.support_function(&u));
            normals.push(u);
        }
    }
    SymmetricPolytope::from_half(&normals, &offsets)
}

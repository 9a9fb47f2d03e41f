//! Small dense helpers for the low-dimensional geometry in this crate.

use nalgebra::{DMatrix, DVector};

pub type Vector = DVector<f64>;

pub fn vector(xs: &[f64]) -> Vector {
    DVector::from_column_slice(xs)
}

pub fn unit(n: usize, i: usize) -> Vector {
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}

/// Number of linearly independent vectors among `vs`, by modified
/// Gram-Schmidt with an absolute residual threshold.
pub fn rank(vs: &[Vector], tol: f64) -> usize {
    let mut basis: Vec<Vector> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for b in &basis {
            let c = w.dot(b);
            w.axpy(-c, b, 1.0);
        }
        let norm = w.norm();
        if norm > tol {
            basis.push(w / norm);
        }
    }
    basis.len()
}

/// Affine dimension of a point set.
pub fn affine_rank(points: &[&Vector], tol: f64) -> usize {
    if points.len() <= 1 {
        return 0;
    }
    let base = points[0];
    let diffs: Vec<Vector> = points[1..].iter().map(|p| *p - base).collect();
    rank(&diffs, tol)
}

/// k-dimensional volume of the simplex spanned by `points` (k + 1 of them),
/// computed from the Gram determinant of the edge vectors.
pub fn simplex_volume(points: &[&Vector]) -> f64 {
    let k = points.len() - 1;
    if k == 0 {
        return 1.0;
    }
    let n = points[0].len();
    let mut edges = DMatrix::zeros(n, k);
    for j in 0..k {
        edges.set_column(j, &(points[j + 1] - points[0]));
    }
    let gram = edges.transpose() * &edges;
    let det = gram.determinant().max(0.0);
    det.sqrt() / factorial(k)
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// A unit vector orthogonal to the n - 1 given vectors in R^n (generalized
/// cross product), or `None` when they are linearly dependent.
pub fn orthogonal_complement(vs: &[Vector], tol: f64) -> Option<Vector> {
    let n = vs.first()?.len();
    debug_assert_eq!(vs.len(), n - 1);
    let mut m = DMatrix::zeros(n - 1, n);
    for (i, v) in vs.iter().enumerate() {
        m.set_row(i, &v.transpose());
    }
    // Cofactor expansion along a virtual first row.
    let mut normal = DVector::zeros(n);
    for j in 0..n {
        let minor = m.clone().remove_column(j);
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        normal[j] = sign * minor.determinant();
    }
    let norm = normal.norm();
    if norm <= tol {
        None
    } else {
        Some(normal / norm)
    }
}

/// Flip `v` so that its first coordinate with magnitude above `tol` is positive.
pub fn canonical_sign(v: &Vector, tol: f64) -> Vector {
    for x in v.iter() {
        if x.abs() > tol {
            return if *x < 0.0 { -v } else { v.clone() };
        }
    }
    v.clone()
}

/// Solve the square system whose rows are `rows` with right-hand side `rhs`.
/// Returns `None` when the rows are (numerically) dependent.
pub fn solve_rows(rows: &[&Vector], rhs: &[f64], det_tol: f64) -> Option<Vector> {
    let n = rows.len();
    let mut a = DMatrix::zeros(n, n);
    for (i, r) in rows.iter().enumerate() {
        a.set_row(i, &r.transpose());
    }
    let lu = a.lu();
    if lu.determinant().abs() <= det_tol {
        return None;
    }
    lu.solve(&DVector::from_column_slice(rhs))
}

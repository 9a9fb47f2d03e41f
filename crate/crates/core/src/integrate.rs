//! Weighted integration over faces and bodies: exact simplex cubature for the
//! built-in densities, closed forms for the Gaussian and ball indicator where
//! available, and Monte Carlo oracles.

use std::f64::consts::PI;

use itertools::Itertools;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::body::{HPolytope, SymmetricPolytope};
use crate::density::{DensityKind, WeightedDensity};
use crate::error::{Error, Result};
use crate::linalg::{unit, Vector};
use crate::quadrature::{adaptive_gauss, AdaptiveSimplex, SimplexRule};
use crate::rng::sample_mean;

/// How face integrals are evaluated.
#[derive(Debug, Clone)]
pub struct QuadratureSpec {
    /// Degree of the simplex rule; `None` selects adaptive refinement.
    pub degree: Option<usize>,
    /// Maximum number of bisections per simplex in adaptive mode.
    pub max_depth: usize,
    /// Absolute tolerance per face in adaptive mode.
    pub tol: f64,
    /// Hyperplanes through the origin, by normal, along which faces are cut
    /// before integrating.
    pub splits: Vec<Vector>,
}

impl QuadratureSpec {
    pub fn for_density(d: &WeightedDensity) -> Self {
        Self { degree: polynomial_degree(d), max_depth: 16, tol: 1e-12, splits: d.split_hyperplanes() }
    }

    /// Same rule, extra refinement: useful for additivity checks.
    pub fn refined(&self, extra: Vec<Vector>) -> Self {
        let mut s = self.clone();
        s.splits.extend(extra);
        s
    }
}

/// Degree of the density as a polynomial on each side of its split
/// hyperplanes, when it is one.
fn polynomial_degree(d: &WeightedDensity) -> Option<usize> {
    match d.kind() {
        DensityKind::Lebesgue => Some(0),
        DensityKind::AbsLinear { .. } => Some(1),
        DensityKind::PowerCone { inv_p, .. } if inv_p.fract() == 0.0 && *inv_p <= 15.0 => Some(*inv_p as usize),
        _ => None,
    }
}

fn check_dim(p: &HPolytope, d: &WeightedDensity) -> Result<()> {
    match d.dim() {
        Some(k) if k != p.dim() => Err(Error::DimensionMismatch { expected: p.dim(), got: k }),
        _ => Ok(()),
    }
}

/// mu_{n-1}(F_i) for every constraint i of `p`, with the default rule for `d`.
pub fn face_measures(p: &SymmetricPolytope, d: &WeightedDensity) -> Result<Vec<f64>> {
    face_measures_with(p.polytope(), d, &QuadratureSpec::for_density(d))
}

/// mu_{n-1}(F_i) for a single face.
pub fn face_measure(p: &SymmetricPolytope, index: usize, d: &WeightedDensity) -> Result<f64> {
    if index >= p.len() {
        return Err(Error::InvalidArgument(format!("face {index} out of range")));
    }
    Ok(face_measures(p, d)?[index])
}

pub fn face_measures_with(p: &HPolytope, d: &WeightedDensity, spec: &QuadratureSpec) -> Result<Vec<f64>> {
    check_dim(p, d)?;
    let n = p.dim();
    match d.kind() {
        DensityKind::Lebesgue if spec.splits.is_empty() => {
            return Ok(p.faces().iter().map(|f| f.volume).collect());
        }
        DensityKind::Gaussian if n <= 3 && spec.splits.is_empty() => {
            let adaptive = AdaptiveSimplex::new(n - 1, spec.tol, spec.max_depth);
            return Ok((0..p.faces().len()).map(|i| gaussian_face(p, i, &adaptive, d)).collect());
        }
        DensityKind::BallIndicator { radius } if n <= 3 && spec.splits.is_empty() => {
            return Ok((0..p.faces().len()).map(|i| ball_face(p, i, *radius)).collect());
        }
        _ => {}
    }
    let pieces = split_pieces(p, &spec.splits)?;
    let eval = |x: &Vector| d.evaluate(x);
    let mut out = vec![0.0; p.faces().len()];
    match spec.degree {
        Some(k) => {
            let rule = SimplexRule::grundmann_moller(n - 1, k);
            for piece in &pieces {
                for (i, acc) in out.iter_mut().enumerate() {
                    for s in &piece.faces()[i].simplices {
                        *acc += rule.integrate(&piece.simplex_points(s), &eval);
                    }
                }
            }
        }
        None => {
            let adaptive = AdaptiveSimplex::new(n - 1, spec.tol, spec.max_depth);
            for piece in &pieces {
                for (i, acc) in out.iter_mut().enumerate() {
                    for s in &piece.faces()[i].simplices {
                        *acc += adaptive.integrate(&piece.simplex_points(s), &eval);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Cells of `p` cut by every split hyperplane that crosses it. Constraint
/// indices of `p` are preserved in each cell.
fn split_pieces(p: &HPolytope, splits: &[Vector]) -> Result<Vec<HPolytope>> {
    let mut pieces = vec![p.clone()];
    for theta in splits {
        let mut next = Vec::new();
        for piece in pieces {
            let tol = piece.tol();
            let vals: Vec<f64> = piece.vertices().iter().map(|v| v.dot(theta)).collect();
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if lo >= -tol || hi <= tol {
                next.push(piece);
                continue;
            }
            next.push(piece.with_halfspace(theta.clone(), 0.0)?);
            next.push(piece.with_halfspace(-theta, 0.0)?);
        }
        pieces = next;
    }
    Ok(pieces)
}

/// Orthonormal basis of the hyperplane orthogonal to the unit vector `u`.
fn tangent_basis(u: &Vector) -> Vec<Vector> {
    let n = u.len();
    let mut basis: Vec<Vector> = Vec::with_capacity(n - 1);
    for i in 0..n {
        let mut v = unit(n, i);
        v.axpy(-u[i], u, 1.0);
        for b in &basis {
            let c = b.dot(&v);
            v.axpy(-c, b, 1.0);
        }
        let norm = v.norm();
        if norm > 1e-8 {
            basis.push(v / norm);
        }
        if basis.len() == n - 1 {
            break;
        }
    }
    basis
}

fn gaussian_face(p: &HPolytope, i: usize, adaptive: &AdaptiveSimplex, d: &WeightedDensity) -> f64 {
    let face = &p.faces()[i];
    if face.is_empty() {
        return 0.0;
    }
    let alpha = face.offset;
    let verts: Vec<&Vector> = face.vertices.iter().map(|&v| &p.vertices()[v]).collect();
    let phi = (-0.5 * alpha * alpha).exp() / (2.0 * PI).sqrt();
    match p.dim() {
        2 => {
            let e = (verts[1] - verts[0]).normalize();
            let s0 = verts[0].dot(&e);
            let s1 = verts[1].dot(&e);
            phi * normal_interval(s0.min(s1), s0.max(s1))
        }
        _ => {
            if let Some((a, b)) = rectangle_coords(&verts) {
                return phi * normal_interval(a.0, a.1) * normal_interval(b.0, b.1);
            }
            let eval = |x: &Vector| d.evaluate(x);
            face.simplices.iter().map(|s| adaptive.integrate(&p.simplex_points(s), &eval)).sum()
        }
    }
}

/// For a rectangular face in R^3 (vertices in boundary order), the coordinate
/// ranges along its two edge directions.
fn rectangle_coords(verts: &[&Vector]) -> Option<((f64, f64), (f64, f64))> {
    if verts.len() != 4 {
        return None;
    }
    let e1 = verts[1] - verts[0];
    let e2 = verts[3] - verts[0];
    let scale = e1.norm() * e2.norm();
    let corner = verts[0] + &e1 + &e2;
    if e1.dot(&e2).abs() > 1e-12 * scale || (corner - verts[2]).amax() > 1e-12 * scale.sqrt() {
        return None;
    }
    let (l1, l2) = (e1.norm(), e2.norm());
    let (u1, u2) = (e1 / l1, e2 / l2);
    let a = verts[0].dot(&u1);
    let b = verts[0].dot(&u2);
    Some(((a, a + l1), (b, b + l2)))
}

fn ball_face(p: &HPolytope, i: usize, radius: f64) -> f64 {
    let face = &p.faces()[i];
    if face.is_empty() || face.offset.abs() >= radius {
        return 0.0;
    }
    let rho = (radius * radius - face.offset * face.offset).sqrt();
    let verts: Vec<&Vector> = face.vertices.iter().map(|&v| &p.vertices()[v]).collect();
    match p.dim() {
        2 => {
            let e = (verts[1] - verts[0]).normalize();
            let (s0, s1) = (verts[0].dot(&e), verts[1].dot(&e));
            let (lo, hi) = (s0.min(s1).max(-rho), s0.max(s1).min(rho));
            (hi - lo).max(0.0)
        }
        3 => {
            let basis = tangent_basis(&face.normal);
            let pts: Vec<[f64; 2]> = verts.iter().map(|v| [v.dot(&basis[0]), v.dot(&basis[1])]).collect();
            polygon_disk_area(&pts, rho)
        }
        _ => unreachable!("handled by adaptive quadrature"),
    }
}

/// Area of a polygon (vertices in boundary order) intersected with the disk
/// of radius `r` centred at the origin.
pub fn polygon_disk_area(pts: &[[f64; 2]], r: f64) -> f64 {
    let k = pts.len();
    let mut total = 0.0;
    for j in 0..k {
        total += triangle_disk_area(pts[j], pts[(j + 1) % k], r);
    }
    total.abs()
}

/// Signed area of the triangle (0, a, b) intersected with the disk.
fn triangle_disk_area(a: [f64; 2], b: [f64; 2], r: f64) -> f64 {
    let cross = |p: [f64; 2], q: [f64; 2]| p[0] * q[1] - p[1] * q[0];
    let dot = |p: [f64; 2], q: [f64; 2]| p[0] * q[0] + p[1] * q[1];
    let d = [b[0] - a[0], b[1] - a[1]];
    let mut cuts = vec![0.0];
    let (qa, qb, qc) = (dot(d, d), 2.0 * dot(a, d), dot(a, a) - r * r);
    if qa > 0.0 {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc > 0.0 {
            let sq = disc.sqrt();
            for t in [(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)] {
                if t > 0.0 && t < 1.0 {
                    cuts.push(t);
                }
            }
        }
    }
    cuts.push(1.0);
    let at = |t: f64| [a[0] + t * d[0], a[1] + t * d[1]];
    // With no crossing and both ends outside, the segment misses the open
    // disk (tangency included).
    let crossing = cuts.len() > 2 || qc < 0.0 || dot(b, b) < r * r;
    let mut area = 0.0;
    for (&t0, &t1) in cuts.iter().tuple_windows() {
        let (p, q) = (at(t0), at(t1));
        let mid = at(0.5 * (t0 + t1));
        if crossing && dot(mid, mid) < r * r {
            area += 0.5 * cross(p, q);
        } else {
            area += 0.5 * r * r * cross(p, q).atan2(dot(p, q));
        }
    }
    area
}

/// mu(P) = (1/(n+r)) sum_i alpha_i mu_{n-1}(F_i), for homogeneous densities.
pub fn body_measure_cone(p: &SymmetricPolytope, d: &WeightedDensity) -> Result<f64> {
    let r = d.require_homogeneity()?;
    let w = face_measures(p, d)?;
    Ok(cone_sum(p.offsets(), &w) / (p.dim() as f64 + r))
}

pub(crate) fn cone_sum(offsets: &[f64], weights: &[f64]) -> f64 {
    offsets.iter().zip(weights).map(|(a, w)| a * w).sum()
}

/// mu(P) = int_0^1 sum_i alpha_i mu_{n-1}(F_i(tP)) dt, valid for any density.
pub fn body_measure_radial(p: &SymmetricPolytope, d: &WeightedDensity, tol: f64) -> Result<f64> {
    check_dim(p.polytope(), d)?;
    let spec = QuadratureSpec::for_density(d);
    let f = |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        let tp = p.polytope().scaled(t);
        match face_measures_with(&tp, d, &spec) {
            Ok(w) => cone_sum(tp.offsets(), &w) / t,
            Err(_) => f64::NAN,
        }
    };
    let v = adaptive_gauss(f, 0.0, 1.0, tol, 30);
    if v.is_nan() {
        return Err(Error::DegenerateInput("face quadrature failed on a dilate".into()));
    }
    Ok(v)
}

/// mu(P) by the most accurate deterministic route available for `d`.
pub fn body_measure(p: &SymmetricPolytope, d: &WeightedDensity) -> Result<f64> {
    match d.kind() {
        _ if d.homogeneity().is_some() => body_measure_cone(p, d),
        DensityKind::BallIndicator { radius } if p.dim() == 2 => {
            check_dim(p.polytope(), d)?;
            let mut pts: Vec<[f64; 2]> = p.vertices().iter().map(|v| [v[0], v[1]]).collect();
            pts.sort_by(|a, b| a[1].atan2(a[0]).total_cmp(&b[1].atan2(b[0])));
            Ok(polygon_disk_area(&pts, *radius))
        }
        _ => body_measure_radial(p, d, 1e-10),
    }
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Serialize)]
pub struct MCOracle {
    pub samples: usize,
    pub seed: u64,
    /// Half-widths of the sampling box; empty for Gaussian sampling.
    pub bbox: Vec<f64>,
    pub estimate: f64,
    pub se: f64,
}

impl MCOracle {
    /// Whether `value` lies within `k` standard errors of the estimate.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (self.estimate - value).abs() <= k * self.se
    }
}

pub const MIN_MC_SAMPLES: usize = 10_000;

/// int_P g by uniform sampling on the bounding box of P.
pub fn body_measure_mc(p: &SymmetricPolytope, d: &WeightedDensity, samples: usize, seed: u64) -> Result<MCOracle> {
    if samples < MIN_MC_SAMPLES {
        return Err(Error::InvalidArgument(format!("need at least {MIN_MC_SAMPLES} samples, got {samples}")));
    }
    check_dim(p.polytope(), d)?;
    let n = p.dim();
    let bbox = p.bounding_box();
    let box_vol: f64 = bbox.iter().map(|b| 2.0 * b).product();
    let stats = sample_mean(samples, seed, |rng| {
        let x = Vector::from_fn(n, |i, _| bbox[i] * rng.random_range(-1.0..=1.0));
        if p.contains(&x) {
            box_vol * d.evaluate(&x)
        } else {
            0.0
        }
    });
    Ok(MCOracle { samples, seed, bbox: bbox.iter().copied().collect(), estimate: stats.mean, se: stats.se() })
}

/// gamma(P) as the hit frequency of standard normal samples.
pub fn gaussian_body_measure(p: &SymmetricPolytope, samples: usize, seed: u64) -> Result<MCOracle> {
    let n = p.dim();
    if n > 4 {
        return Err(Error::UnsupportedDimension(n));
    }
    let stats = sample_mean(samples, seed, |rng| {
        let x = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        if p.contains(&x) {
            1.0
        } else {
            0.0
        }
    });
    Ok(MCOracle { samples, seed, bbox: Vec::new(), estimate: stats.mean, se: stats.se() })
}

/// Standard normal distribution function, accurate to about 1e-16 absolute:
/// a positive-term series near the origin and a continued fraction in the
/// tails.
pub fn gaussian_cdf(a: f64) -> f64 {
    if a.is_nan() {
        return f64::NAN;
    }
    if a >= TAIL {
        1.0 - upper_tail(a)
    } else if a <= -TAIL {
        upper_tail(-a)
    } else {
        0.5 + gaussian_pdf(a) * odd_series(a)
    }
}

/// 1 - Phi(a) without cancellation for large a.
pub fn gaussian_sf(a: f64) -> f64 {
    gaussian_cdf(-a)
}

const TAIL: f64 = 3.0;

/// sum_k a^(2k+1) / (1 * 3 * ... * (2k+1)), so that Phi(a) = 1/2 + phi(a) * S(a).
fn odd_series(a: f64) -> f64 {
    let a2 = a * a;
    let mut term = a;
    let mut sum = a;
    let mut k = 1.0;
    while term.abs() > 1e-17 * sum.abs() {
        term *= a2 / (2.0 * k + 1.0);
        sum += term;
        k += 1.0;
    }
    sum
}

/// 1 - Phi(a) for a >= TAIL by the continued fraction
/// phi(a) / (a + 1/(a + 2/(a + 3/(a + ...)))), evaluated with Lentz's method.
fn upper_tail(a: f64) -> f64 {
    let tiny = 1e-300;
    let mut f = a;
    let mut c = a;
    let mut d = 0.0;
    for k in 1..500 {
        let k = k as f64;
        d = a + k * d;
        d = if d.abs() < tiny { tiny } else { d };
        c = a + k / c;
        c = if c.abs() < tiny { tiny } else { c };
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    gaussian_pdf(a) / f
}

/// Standard normal density.
pub fn gaussian_pdf(a: f64) -> f64 {
    (-0.5 * a * a).exp() / (2.0 * PI).sqrt()
}

/// Phi(b) - Phi(a) for a <= b, without cancellation in the tails.
pub fn normal_interval(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        gaussian_sf(a) - gaussian_sf(b)
    } else {
        gaussian_cdf(b) - gaussian_cdf(a)
    }
}

/// Inverse of [`gaussian_cdf`] on (0, 1): Newton iterations on the CDF,
/// kept inside a shrinking bisection bracket.
pub fn gaussian_quantile(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::DomainError(u));
    }
    if u == 0.5 {
        return Ok(0.0);
    }
    let tail = u.min(1.0 - u);
    let sign = if u < 0.5 { -1.0 } else { 1.0 };
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    let mut x = sign * (-2.0 * tail.ln()).sqrt().max(0.5) * 0.9;
    for _ in 0..200 {
        // Residual in the smaller tail keeps relative accuracy for tiny u.
        let resid = if u < 0.5 { gaussian_cdf(x) - u } else { (1.0 - u) - gaussian_sf(x) };
        if resid > 0.0 {
            hi = x;
        } else if resid < 0.0 {
            lo = x;
        } else {
            break;
        }
        let mut next = x - resid / gaussian_pdf(x);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * x.abs().max(1.0) {
            x = next;
            break;
        }
        x = next;
    }
    Ok(x)
}

/// The q-mean M_q(a, b, lambda) = (lambda a^q + (1 - lambda) b^q)^(1/q),
/// with the geometric mean at q = 0 and min / max at -inf / +inf.
pub fn m_q(a: f64, b: f64, lambda: f64, q: f64) -> f64 {
    if q == 0.0 {
        a.powf(lambda) * b.powf(1.0 - lambda)
    } else if q == f64::INFINITY {
        a.max(b)
    } else if q == f64::NEG_INFINITY {
        a.min(b)
    } else if a * b == 0.0 && q < 0.0 {
        0.0
    } else {
        (lambda * a.powf(q) + (1.0 - lambda) * b.powf(q)).powf(1.0 / q)
    }
}

/// Volume of the unit ball in R^n.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * unit_ball_volume(n - 2),
    }
}

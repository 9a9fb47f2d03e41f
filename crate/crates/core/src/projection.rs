//! Weighted projection functions p_{mu,K}(theta, t) and P_{mu,K}(theta).

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use crate::body::SymmetricPolytope;
use crate::density::WeightedDensity;
use crate::directions::direction_set;
use crate::error::{Error, Result};
use crate::integrate::face_measures;
use crate::linalg::{simplex_volume, Vector};
use crate::quadrature::adaptive_simpson_vec;
use crate::rng::sample_mean;
use crate::surface::{cosine_transform, sigma};

pub const T_TOL: f64 = 1e-8;
pub const T_MAX_PANELS: usize = 1 << 14;

/// p_{mu,K}(theta, t) = (n/2) sum_i |<theta, u_i>| mu_{n-1}(F_i(tK)).
pub fn p_mu(k: &SymmetricPolytope, d: &WeightedDensity, theta: &Vector, t: f64) -> Result<f64> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidArgument(format!("t must lie in (0, 1], got {t}")));
    }
    let s = sigma(&k.scale(t), d)?;
    Ok(0.5 * k.dim() as f64 * cosine_transform(&s, theta))
}

/// W_i = int_0^1 mu_{n-1}(F_i(tK)) dt. P_{mu,K} is linear in these, so one
/// t-integral serves every direction.
pub fn integrated_face_measures(k: &SymmetricPolytope, d: &WeightedDensity) -> Result<Vec<f64>> {
    if let Some(r) = d.homogeneity() {
        let denom = k.dim() as f64 + r;
        return Ok(face_measures(k, d)?.into_iter().map(|w| w / denom).collect());
    }
    // Fail early on bad input; the integrand below cannot return errors.
    face_measures(k, d)?;
    let f = |t: f64| {
        if t <= 0.0 {
            return vec![0.0; k.len()];
        }
        face_measures(&k.scale(t), d).expect("validated above")
    };
    Ok(adaptive_simpson_vec(f, 0.0, 1.0, T_TOL, T_MAX_PANELS))
}

fn projection_from_weights(k: &SymmetricPolytope, weights: &[f64], theta: &Vector) -> f64 {
    let sum: f64 = k.normals().iter().zip(weights).map(|(u, w)| u.dot(theta).abs() * w).sum();
    0.5 * k.dim() as f64 * sum
}

/// P_{mu,K}(theta) = int_0^1 p_{mu,K}(theta, t) dt.
#[allow(non_snake_case)]
pub fn P_mu(k: &SymmetricPolytope, d: &WeightedDensity, theta: &Vector) -> Result<f64> {
    let w = integrated_face_measures(k, d)?;
    Ok(projection_from_weights(k, &w, theta))
}

#[derive(Debug, Clone, Serialize)]
pub struct ProjectionProfile {
    pub body: String,
    pub density: String,
    pub directions: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub t_grid: Option<Vec<f64>>,
    /// p_{mu,K}(theta_j, t_k), indexed [j][k].
    pub t_values: Option<Vec<Vec<f64>>>,
}

impl ProjectionProfile {
    pub fn to_csv(&self) -> String {
        let n = self.directions.first().map(Vec::len).unwrap_or(0);
        let mut header: Vec<String> = (1..=n).map(|i| format!("theta{i}")).collect();
        header.push("P".into());
        if let Some(ts) = &self.t_grid {
            header.extend(ts.iter().map(|t| format!("p_t{t}")));
        }
        let mut out = header.join(",") + "\n";
        for (j, dir) in self.directions.iter().enumerate() {
            let mut row: Vec<String> = dir.iter().map(|x| x.to_string()).collect();
            row.push(self.values[j].to_string());
            if let Some(tv) = &self.t_values {
                row.extend(tv[j].iter().map(|x| x.to_string()));
            }
            out += &(row.join(",") + "\n");
        }
        out
    }
}

/// P_{mu,K} on the given directions, with optional p_{mu,K}(theta, t) on a
/// t-grid.
pub fn projection_profile(
    k: &SymmetricPolytope,
    d: &WeightedDensity,
    directions: &[Vector],
    t_grid: Option<&[f64]>,
) -> Result<ProjectionProfile> {
    let w = integrated_face_measures(k, d)?;
    let values = directions.iter().map(|th| projection_from_weights(k, &w, th)).collect();
    let t_values = match t_grid {
        Some(ts) => {
            let sigmas = ts.iter().map(|&t| {
                if !(t > 0.0 && t <= 1.0) {
                    return Err(Error::InvalidArgument(format!("t must lie in (0, 1], got {t}")));
                }
                sigma(&k.scale(t), d)
            });
            let sigmas = sigmas.collect::<Result<Vec<_>>>()?;
            let half_n = 0.5 * k.dim() as f64;
            Some(
                directions.iter().map(|th| sigmas.iter().map(|s| half_n * cosine_transform(s, th)).collect()).collect(),
            )
        }
        None => None,
    };
    Ok(ProjectionProfile {
        body: format!("polytope(n={}, N={})", k.dim(), k.len()),
        density: d.label(),
        directions: directions.iter().map(|v| v.iter().copied().collect()).collect(),
        values,
        t_grid: t_grid.map(<[f64]>::to_vec),
        t_values,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MarginalReport {
    /// (n/2) times the Monte Carlo boundary marginal.
    pub estimate: f64,
    pub se: f64,
    pub p_mu: f64,
    pub samples: usize,
    pub passed: bool,
}

/// Monte Carlo check of p_{mu,K}(theta, t) against the boundary marginal
/// M = int_{boundary of tK} g(x) |<theta, nu(x)>| dS(x): points are drawn
/// uniformly on the boundary (face chosen by area, then uniform in a simplex
/// chosen by volume). The projected weight of the boundary equals M / 2 in
/// the plane, and p = (n/2) M in general.
pub fn marginal_check(
    k: &SymmetricPolytope,
    d: &WeightedDensity,
    theta: &Vector,
    t: f64,
    samples: usize,
    seed: u64,
) -> Result<MarginalReport> {
    if !d.is_even() {
        return Err(Error::InvalidArgument("marginal check needs an even density".into()));
    }
    if k.dim() > 3 {
        return Err(Error::DimensionTooLarge { max: 3, got: k.dim() });
    }
    let p = p_mu(k, d, theta, t)?;
    let tk = k.scale(t);
    let poly = tk.polytope();
    // Flattened simplex table with cumulative areas.
    let mut cells: Vec<(Vec<&Vector>, f64)> = Vec::new();
    for f in tk.faces() {
        let c = f.normal.dot(theta).abs();
        for s in &f.simplices {
            cells.push((poly.simplex_points(s), c));
        }
    }
    let vols: Vec<f64> = cells.iter().map(|(pts, _)| simplex_volume(pts)).collect();
    let total: f64 = vols.iter().sum();
    let cumulative: Vec<f64> = vols
        .iter()
        .scan(0.0, |acc, v| {
            *acc += v / total;
            Some(*acc)
        })
        .collect();
    let n = k.dim();
    let stats = sample_mean(samples, seed, |rng| {
        let u: f64 = rng.random();
        let idx = cumulative.partition_point(|&c| c < u).min(cells.len() - 1);
        let (pts, c) = &cells[idx];
        let e: Vec<f64> = (0..pts.len()).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let s: f64 = e.iter().sum();
        let mut x = Vector::zeros(n);
        for (w, v) in e.iter().zip(pts) {
            x.axpy(w / s, v, 1.0);
        }
        total * d.evaluate(&x) * c
    });
    let half_n = 0.5 * n as f64;
    let estimate = half_n * stats.mean;
    let se = half_n * stats.se();
    Ok(MarginalReport { estimate, se, p_mu: p, samples, passed: (estimate - p).abs() <= 3.0 * se })
}

#[derive(Debug, Clone, Serialize)]
pub struct DistanceReport {
    pub max_distance: f64,
    pub argmax: Vec<f64>,
    pub directions: usize,
}

/// Sampled sup-distance between P_{mu,K} and P_{mu,L}.
pub fn projection_distance(
    k: &SymmetricPolytope,
    l: &SymmetricPolytope,
    d: &WeightedDensity,
    m: usize,
    seed: u64,
) -> Result<DistanceReport> {
    if k.dim() != l.dim() {
        return Err(Error::DimensionMismatch { expected: k.dim(), got: l.dim() });
    }
    let dirs = direction_set(k.dim(), m, seed);
    let wk = integrated_face_measures(k, d)?;
    let wl = integrated_face_measures(l, d)?;
    let diffs: Vec<f64> = dirs
        .par_iter()
        .map(|th| (projection_from_weights(k, &wk, th) - projection_from_weights(l, &wl, th)).abs())
        .collect();
    let (j, &max_distance) = diffs.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    Ok(DistanceReport { max_distance, argmax: dirs[j].iter().copied().collect(), directions: dirs.len() })
}

/// P_{mu,K} and P_{mu,L} on a shared direction set, for comparisons.
pub fn paired_profiles(
    k: &SymmetricPolytope,
    l: &SymmetricPolytope,
    d: &WeightedDensity,
    dirs: &[Vector],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let wk = integrated_face_measures(k, d)?;
    let wl = integrated_face_measures(l, d)?;
    Ok((
        dirs.iter().map(|th| projection_from_weights(k, &wk, th)).collect(),
        dirs.iter().map(|th| projection_from_weights(l, &wl, th)).collect(),
    ))
}

//! Discrete weighted Minkowski problem: find a symmetric polytope whose
//! faces carry prescribed weighted areas.
//!
//! The solver minimizes Phi(A) = (1/(n+r)) sum f_i a_i over {mu(P(A)) >= 1}
//! with a damped multiplicative fixed-point iteration. At the minimizer
//! f_i = Phi * mu_{n-1}(F_i), and the solution is m P(A*) with
//! m^{n+r-1} = Phi(A*).

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::body::SymmetricPolytope;
use crate::density::WeightedDensity;
use crate::error::{Error, Result};
use crate::integrate::face_measures;
use crate::linalg::{rank, Vector};
use crate::rng::chunk_rng;

/// Angular margin for the interior-of-support requirement.
pub const SUPPORT_MARGIN: f64 = 1e-6;
const PAIRING_TOL: f64 = 1e-12;
const DAMPING: f64 = 0.5;
const EMPTY_FACE_PULL: f64 = 0.9;
const COLLAPSE_LIMIT: usize = 100;
/// Relative step for the central-difference Jacobian of the face measures.
const JACOBIAN_STEP: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct MinkowskiProblem {
    density: WeightedDensity,
    half_normals: Vec<Vector>,
    half_targets: Vec<f64>,
    degree: f64,
    /// Normals along which the density vanishes.
    flagged: Vec<usize>,
}

impl MinkowskiProblem {
    /// Full, antipodally paired data: entry N/2 + i is the antipode of entry
    /// i and carries the same target.
    pub fn new(density: WeightedDensity, normals: Vec<Vector>, targets: Vec<f64>) -> Result<Self> {
        if normals.len() != targets.len() {
            return Err(Error::InvalidArgument(format!("{} normals but {} targets", normals.len(), targets.len())));
        }
        if !normals.len().is_multiple_of(2) {
            return Err(Error::DegenerateInput("odd number of normals".into()));
        }
        let half = normals.len() / 2;
        for i in 0..half {
            let (u, v) = (&normals[i], &normals[half + i]);
            if u.len() != v.len() || (u + v).amax() > PAIRING_TOL {
                return Err(Error::DegenerateInput(format!("normals {i} and {} are not antipodal", half + i)));
            }
            let (f, g) = (targets[i], targets[half + i]);
            if (f - g).abs() > PAIRING_TOL * f.abs().max(g.abs()) {
                return Err(Error::DegenerateInput(format!("targets {i} and {} differ: {f} vs {g}", half + i)));
            }
        }
        let half_normals = normals[..half].to_vec();
        let half_targets = targets[..half].to_vec();
        Self::from_half(density, half_normals, half_targets)
    }

    /// One representative per antipodal pair.
    pub fn from_half(density: WeightedDensity, half_normals: Vec<Vector>, half_targets: Vec<f64>) -> Result<Self> {
        let n = half_normals.first().map(|u| u.len()).unwrap_or(0);
        if !(2..=4).contains(&n) {
            return Err(Error::UnsupportedDimension(n));
        }
        if let Some(k) = density.dim() {
            if k != n {
                return Err(Error::DimensionMismatch { expected: n, got: k });
            }
        }
        if half_normals.len() != half_targets.len() {
            return Err(Error::InvalidArgument("normals and targets differ in length".into()));
        }
        for (i, u) in half_normals.iter().enumerate() {
            if u.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: u.len() });
            }
            if (u.norm() - 1.0).abs() > PAIRING_TOL {
                return Err(Error::InvalidArgument(format!("normal {i} is not a unit vector")));
            }
        }
        for (i, f) in half_targets.iter().enumerate() {
            if !(*f > 0.0 && f.is_finite()) {
                return Err(Error::InvalidArgument(format!("target {i} must be positive, got {f}")));
            }
        }
        if rank(&half_normals, 1e-12) < n {
            return Err(Error::DegenerateInput("normals do not span the space".into()));
        }
        let degree = density.require_homogeneity()?;
        if !density.is_even() {
            return Err(Error::InvalidArgument("the density must be even".into()));
        }
        let support = density.support();
        let mut flagged = Vec::new();
        for (i, u) in half_normals.iter().enumerate() {
            if !support.contains_direction(u, SUPPORT_MARGIN) && !support.contains_direction(&-u, SUPPORT_MARGIN) {
                return Err(Error::NotInSupport { index: i });
            }
            if density.evaluate(u) <= 0.0 {
                flagged.push(i);
            }
        }
        Ok(Self { density, half_normals, half_targets, degree, flagged })
    }

    /// Targets read off an existing polytope.
    pub fn from_polytope(p: &SymmetricPolytope, density: WeightedDensity) -> Result<Self> {
        let fm = face_measures(p, &density)?;
        let h = p.len() / 2;
        if let Some(i) = fm.iter().position(|f| *f <= 0.0) {
            return Err(Error::DegenerateInput(format!("face {i} carries no weight")));
        }
        let targets = (0..h).map(|i| 0.5 * (fm[i] + fm[h + i])).collect();
        Self::from_half(density, p.half_normals().to_vec(), targets)
    }

    pub fn density(&self) -> &WeightedDensity {
        &self.density
    }

    pub fn dim(&self) -> usize {
        self.half_normals[0].len()
    }

    pub fn half_normals(&self) -> &[Vector] {
        &self.half_normals
    }

    pub fn half_targets(&self) -> &[f64] {
        &self.half_targets
    }

    /// Half-indices of normals lying in the zero set of the density. They
    /// are admitted, but fall outside the hypothesis u_i in int(supp g).
    pub fn flagged(&self) -> &[usize] {
        &self.flagged
    }

    /// n + r.
    fn total_degree(&self) -> f64 {
        self.dim() as f64 + self.degree
    }

    /// Phi(A) over the full normal list, from half offsets.
    fn objective(&self, alpha: &[f64]) -> f64 {
        2.0 * self.half_targets.iter().zip(alpha).map(|(f, a)| f * a).sum::<f64>() / self.total_degree()
    }

    /// Half face measures of P(A) and mu(P(A)).
    fn evaluate(&self, alpha: &[f64]) -> Result<(Vec<f64>, f64)> {
        let p = SymmetricPolytope::from_half(&self.half_normals, alpha)?;
        let fm = face_measures(&p, &self.density)?;
        let h = alpha.len();
        let m: Vec<f64> = (0..h).map(|i| 0.5 * (fm[i] + fm[h + i])).collect();
        let mu = 2.0 * alpha.iter().zip(&m).map(|(a, f)| a * f).sum::<f64>() / self.total_degree();
        Ok((m, mu))
    }

    fn kkt_residual(&self, phi: f64, m: &[f64]) -> f64 {
        self.half_targets.iter().zip(m).map(|(f, mi)| (f - phi * mi).abs() / f).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Random log-uniform start in [0.5, 2] when set; all ones otherwise.
    pub seed: Option<u64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-7, max_iter: 10_000, seed: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverStatus {
    Converged,
    /// Converged, but some normal lies in the zero set of the density.
    ConvergedOutsideSupport,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverReport {
    /// beta_i for the full normal list.
    pub offsets: Vec<f64>,
    /// |f_i - mu_{n-1}(F_i(beta))| / f_i for the full normal list.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub iterations: usize,
    /// Phi after each accepted step.
    pub objective: Vec<f64>,
    /// m with m^{n+r-1} = Phi(A*).
    pub scale: f64,
    pub status: SolverStatus,
    /// Indices (into the full list) of normals in the zero set of the density.
    pub flagged_normals: Vec<usize>,
}

impl SolverReport {
    pub fn half_offsets(&self) -> &[f64] {
        &self.offsets[..self.offsets.len() / 2]
    }

    pub fn polytope(&self, problem: &MinkowskiProblem) -> Result<SymmetricPolytope> {
        SymmetricPolytope::from_half(problem.half_normals(), self.half_offsets())
    }
}

fn initial_alpha(h: usize, seed: Option<u64>) -> Vec<f64> {
    match seed {
        None => vec![1.0; h],
        Some(s) => {
            let mut rng = chunk_rng(s, 0);
            let (lo, hi) = (0.5f64.ln(), 2f64.ln());
            (0..h).map(|_| rng.random_range(lo..hi).exp()).collect()
        }
    }
}

/// Solves the problem from the start given by `opts.seed`.
pub fn solve(problem: &MinkowskiProblem, opts: &SolverOptions) -> Result<SolverReport> {
    let h = problem.half_targets.len();
    let deg = problem.total_degree();
    let mut alpha = initial_alpha(h, opts.seed);

    let normalize = |alpha: &mut Vec<f64>| -> Result<(Vec<f64>, f64)> {
        let (mut m, mu) = problem.evaluate(alpha)?;
        let s = mu.powf(-1.0 / deg);
        alpha.iter_mut().for_each(|a| *a *= s);
        let sf = s.powf(deg - 1.0);
        m.iter_mut().for_each(|x| *x *= sf);
        Ok((m, problem.objective(alpha)))
    };

    let (mut m, mut phi) = normalize(&mut alpha)?;
    let mut trace = vec![phi];
    let mut empty_streak = vec![0usize; h];
    let mut tau = DAMPING;
    let mut iterations = 0;

    loop {
        let any_empty = m.iter().any(|x| *x <= 0.0);
        if !any_empty && problem.kkt_residual(phi, &m) < opts.tol {
            break;
        }
        if iterations >= opts.max_iter {
            let residual = if any_empty { f64::INFINITY } else { problem.kkt_residual(phi, &m) };
            return Err(Error::NoConvergence { iterations, residual });
        }
        iterations += 1;

        for (i, streak) in empty_streak.iter_mut().enumerate() {
            if m[i] <= 0.0 {
                *streak += 1;
                if *streak >= COLLAPSE_LIMIT {
                    return Err(Error::FaceCollapsed { index: i, iterations });
                }
            } else {
                *streak = 0;
            }
        }

        if any_empty {
            // Redundant constraints drop to the support value: the body is
            // unchanged and Phi strictly decreases.
            let p = SymmetricPolytope::from_half(&problem.half_normals, &alpha)?;
            let mut snapped = false;
            for i in 0..h {
                let support = p.support_function(&problem.half_normals[i]);
                if m[i] <= 0.0 && alpha[i] > support {
                    alpha[i] = support;
                    snapped = true;
                }
            }
            if snapped {
                phi = problem.objective(&alpha);
                trace.push(phi);
            }
        } else if let Some((a, m_next, phi_next)) = newton_step(problem, &alpha, &m, phi, &normalize)? {
            alpha = a;
            m = m_next;
            phi = phi_next;
            trace.push(phi);
            continue;
        }

        // Damped multiplicative step, with empty faces pulled in; halve the
        // damping while the objective would increase.
        loop {
            let mut next: Vec<f64> =
                alpha
                    .iter()
                    .zip(&m)
                    .zip(&problem.half_targets)
                    .map(|((a, mi), f)| {
                        if *mi <= 0.0 {
                            a * EMPTY_FACE_PULL.powf(tau / DAMPING)
                        } else {
                            a * (phi * mi / f).powf(tau)
                        }
                    })
                    .collect();
            let (m_next, phi_next) = normalize(&mut next)?;
            if phi_next <= phi * (1.0 + 4.0 * f64::EPSILON) || tau < 1e-12 {
                alpha = next;
                m = m_next;
                phi = phi_next;
                trace.push(phi);
                tau = (2.0 * tau).min(DAMPING);
                break;
            }
            tau *= 0.5;
        }
    }

    let scale = phi.powf(1.0 / (deg - 1.0));
    let half_beta: Vec<f64> = alpha.iter().map(|a| scale * a).collect();
    let (m_final, _) = problem.evaluate(&half_beta)?;
    let half_res: Vec<f64> = problem.half_targets.iter().zip(&m_final).map(|(f, mi)| (f - mi).abs() / f).collect();
    let max_residual = half_res.iter().cloned().fold(0.0, f64::max);
    if max_residual > 10.0 * opts.tol {
        return Err(Error::CheckFailed {
            check: "face measures of the solution",
            deviation: max_residual,
            tolerance: 10.0 * opts.tol,
        });
    }
    let mut offsets = half_beta.clone();
    offsets.extend_from_slice(&half_beta);
    let mut residuals = half_res.clone();
    residuals.extend_from_slice(&half_res);
    let mut flagged_normals: Vec<usize> = problem.flagged.clone();
    flagged_normals.extend(problem.flagged.iter().map(|i| i + h));
    let status =
        if flagged_normals.is_empty() { SolverStatus::Converged } else { SolverStatus::ConvergedOutsideSupport };
    Ok(SolverReport { offsets, residuals, max_residual, iterations, objective: trace, scale, status, flagged_normals })
}

type Normalized = (Vec<f64>, f64);

/// Accepted iterate: offsets, half face measures and Phi.
type Step = (Vec<f64>, Vec<f64>, f64);

/// One Newton step on m(beta) = f, with beta = Phi^{1/(n+r-1)} alpha and the
/// Jacobian of m (the Hessian of mu) from central differences. Returns the
/// normalized iterate when it lowers the KKT residual without raising Phi.
fn newton_step(
    problem: &MinkowskiProblem,
    alpha: &[f64],
    m: &[f64],
    phi: f64,
    normalize: &dyn Fn(&mut Vec<f64>) -> Result<Normalized>,
) -> Result<Option<Step>> {
    let h = alpha.len();
    let deg = problem.total_degree();
    let s = phi.powf(1.0 / (deg - 1.0));
    let beta: Vec<f64> = alpha.iter().map(|a| s * a).collect();
    let mut jac = nalgebra::DMatrix::zeros(h, h);
    for j in 0..h {
        let step = JACOBIAN_STEP * beta[j];
        let mut plus = beta.clone();
        plus[j] += step;
        let mut minus = beta.clone();
        minus[j] -= step;
        let (mp, _) = problem.evaluate(&plus)?;
        let (mm, _) = problem.evaluate(&minus)?;
        if mp.iter().chain(&mm).any(|x| *x <= 0.0) {
            return Ok(None);
        }
        for i in 0..h {
            jac[(i, j)] = (mp[i] - mm[i]) / (2.0 * step);
        }
    }
    let rhs = nalgebra::DVector::from_iterator(h, (0..h).map(|i| problem.half_targets[i] - phi * m[i]));
    let Some(delta) = jac.lu().solve(&rhs) else { return Ok(None) };
    let current = problem.kkt_residual(phi, m);
    let mut lambda = 1.0;
    for _ in 0..4 {
        let mut next: Vec<f64> = beta.iter().zip(delta.iter()).map(|(b, d)| b + lambda * d).collect();
        lambda *= 0.5;
        if next.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
            continue;
        }
        let Ok((m_next, phi_next)) = normalize(&mut next) else { continue };
        let improved = m_next.iter().all(|x| *x > 0.0)
            && problem.kkt_residual(phi_next, &m_next) < (1.0 - 0.5 * lambda) * current
            && phi_next <= phi * (1.0 + 4.0 * f64::EPSILON);
        if improved {
            return Ok(Some((next, m_next, phi_next)));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Serialize)]
pub struct UniquenessReport {
    pub starts: usize,
    /// Full offset vectors, by start index.
    pub offsets: Vec<Vec<f64>>,
    pub iterations: Vec<usize>,
    /// max over start pairs of max_i |beta_i - beta'_i| / max_i beta_i.
    pub max_distance: f64,
    pub bound: f64,
    pub passed: bool,
}

/// Solves from `starts` random initial points in parallel and compares the
/// solutions.
pub fn uniqueness_probe(problem: &MinkowskiProblem, starts: usize, tol: f64, seed: u64) -> Result<UniquenessReport> {
    if problem.density.concavity().is_none() {
        return Err(Error::MissingConcavity);
    }
    if starts < 2 {
        return Err(Error::InvalidArgument("need at least two starts".into()));
    }
    let reports: Vec<SolverReport> = (0..starts)
        .into_par_iter()
        .map(|k| {
            let opts = SolverOptions { tol, seed: Some(seed.wrapping_add(k as u64)), ..Default::default() };
            solve(problem, &opts)
        })
        .collect::<Result<_>>()?;
    let mut max_distance: f64 = 0.0;
    for (a, b) in reports.iter().enumerate().flat_map(|(i, a)| reports[i + 1..].iter().map(move |b| (a, b))) {
        let top = a.offsets.iter().chain(&b.offsets).cloned().fold(0.0, f64::max);
        let d = a.offsets.iter().zip(&b.offsets).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        max_distance = max_distance.max(d / top);
    }
    let bound = 10.0 * tol;
    let report = UniquenessReport {
        starts,
        offsets: reports.iter().map(|r| r.offsets.clone()).collect(),
        iterations: reports.iter().map(|r| r.iterations).collect(),
        max_distance,
        bound,
        passed: max_distance < bound,
    };
    if !report.passed {
        return Err(Error::CheckFailed {
            check: "uniqueness across starts",
            deviation: max_distance,
            tolerance: bound,
        });
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundTripReport {
    pub targets: Vec<f64>,
    pub original: Vec<f64>,
    pub recovered: Vec<f64>,
    /// max_i |beta_i - a_i| / a_i.
    pub max_relative_error: f64,
    pub bound: f64,
    pub solver: SolverReport,
    pub passed: bool,
}

/// Reads targets off `p`, solves, and compares with the offsets of `p`.
pub fn round_trip(p: &SymmetricPolytope, d: &WeightedDensity, tol: f64) -> Result<RoundTripReport> {
    let problem = MinkowskiProblem::from_polytope(p, d.clone())?;
    let solver = solve(&problem, &SolverOptions { tol, ..Default::default() })?;
    let max_relative_error = solver.offsets.iter().zip(p.offsets()).map(|(b, a)| (b - a).abs() / a).fold(0.0, f64::max);
    let bound = 10.0 * tol;
    let report = RoundTripReport {
        targets: problem.half_targets.iter().chain(&problem.half_targets).cloned().collect(),
        original: p.offsets().to_vec(),
        recovered: solver.offsets.clone(),
        max_relative_error,
        bound,
        passed: max_relative_error < bound,
        solver,
    };
    if !report.passed {
        return Err(Error::CheckFailed {
            check: "round trip offsets",
            deviation: max_relative_error,
            tolerance: bound,
        });
    }
    Ok(report)
}

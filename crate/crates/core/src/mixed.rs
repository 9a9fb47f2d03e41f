//! Mixed measures mu_1(K, L), their integrated form V_{mu,1}, and the
//! first-inequality family of checks.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::body::{minkowski_sum, SymmetricPolytope};
use crate::density::{DensityKind, WeightedDensity};
use crate::error::{Error, Result};
use crate::integrate::{
    body_measure, body_measure_cone, face_measures, gaussian_body_measure, gaussian_cdf, gaussian_pdf,
    gaussian_quantile, MCOracle,
};
use crate::linalg::Vector;
use crate::rng::sample_mean;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MixedRoute {
    SurfaceIntegral,
    FiniteDifferenceOracle,
}

#[derive(Debug, Clone, Serialize)]
pub struct MixedMeasureResult {
    pub value: f64,
    pub route: MixedRoute,
    /// V_{mu,1}(K, L) = q mu_1(K, L), for homogeneous densities.
    pub v_mu_1: Option<f64>,
    /// Standard error, for Monte Carlo routes.
    pub se: f64,
}

fn same_dim(k: &SymmetricPolytope, l: &SymmetricPolytope) -> Result<()> {
    if k.dim() != l.dim() {
        return Err(Error::DimensionMismatch { expected: k.dim(), got: l.dim() });
    }
    Ok(())
}

/// mu_1(K, L) = sum_i h_L(u_i) mu_{n-1}(F_i(K)).
pub fn mixed_measure(k: &SymmetricPolytope, l: &SymmetricPolytope, d: &WeightedDensity) -> Result<MixedMeasureResult> {
    same_dim(k, l)?;
    let w = face_measures(k, d)?;
    let value = k.normals().iter().zip(&w).map(|(u, w)| l.support_function(u) * w).sum();
    let v_mu_1 = d.homogeneity().map(|r| value / (k.dim() as f64 + r));
    Ok(MixedMeasureResult { value, route: MixedRoute::SurfaceIntegral, v_mu_1, se: 0.0 })
}

pub const ORACLE_EPSILONS: [f64; 3] = [0.04, 0.02, 0.01];

/// Richardson weights for D(0.01), D(0.02), D(0.04) cancelling the O(eps)
/// and O(eps^2) terms.
const RICHARDSON: [(f64, f64); 3] = [(0.01, 8.0 / 3.0), (0.02, -2.0), (0.04, 1.0 / 3.0)];

/// mu_1(K, L) from difference quotients (mu(K + eps L) - mu(K)) / eps,
/// extrapolated to eps = 0. Homogeneous densities use the cone formula;
/// other densities use Monte Carlo with common random numbers, so the
/// standard error is that of the extrapolated combination itself.
pub fn mixed_measure_oracle(
    k: &SymmetricPolytope,
    l: &SymmetricPolytope,
    d: &WeightedDensity,
    samples: usize,
    seed: u64,
) -> Result<MixedMeasureResult> {
    same_dim(k, l)?;
    if k.dim() > 3 {
        return Err(Error::DimensionTooLarge { max: 3, got: k.dim() });
    }
    let sums: Vec<(f64, SymmetricPolytope)> =
        RICHARDSON.iter().map(|&(eps, w)| Ok((w / eps, minkowski_sum(k, &l.scale(eps))?))).collect::<Result<_>>()?;
    let total_weight: f64 = sums.iter().map(|(c, _)| c).sum();
    if let Some(r) = d.homogeneity() {
        let base = body_measure_cone(k, d)?;
        let mut value = -total_weight * base;
        for (c, s) in &sums {
            value += c * body_measure_cone(s, d)?;
        }
        let v_mu_1 = Some(value / (k.dim() as f64 + r));
        return Ok(MixedMeasureResult { value, route: MixedRoute::FiniteDifferenceOracle, v_mu_1, se: 0.0 });
    }
    let n = k.dim();
    let stats = match d.kind() {
        DensityKind::Gaussian => sample_mean(samples, seed, |rng| {
            let x = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
            shell_combination(k, &sums, total_weight, &x)
        }),
        _ => {
            let bbox = sums.last().unwrap().1.bounding_box();
            let vol: f64 = bbox.iter().map(|b| 2.0 * b).product();
            sample_mean(samples, seed, |rng| {
                let x = Vector::from_fn(n, |i, _| bbox[i] * rng.random_range(-1.0..=1.0));
                let c = shell_combination(k, &sums, total_weight, &x);
                if c == 0.0 {
                    0.0
                } else {
                    vol * d.evaluate(&x) * c
                }
            })
        }
    };
    Ok(MixedMeasureResult {
        value: stats.mean,
        route: MixedRoute::FiniteDifferenceOracle,
        v_mu_1: None,
        se: stats.se(),
    })
}

fn shell_combination(k: &SymmetricPolytope, sums: &[(f64, SymmetricPolytope)], total: f64, x: &Vector) -> f64 {
    let mut v = if k.contains(x) { -total } else { 0.0 };
    for (c, s) in sums {
        if s.contains(x) {
            v += c;
        }
    }
    v
}

pub const FIRST_INEQUALITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct FirstInequalityReport {
    pub mu_k: f64,
    pub mu_l: f64,
    pub q: f64,
    /// mu_1(K, L) against (1/q) mu(K)^{1-q} mu(L)^q.
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    /// V_{mu,1}(K, L) against mu(K)^{1-q} mu(L)^q.
    pub lhs_integrated: f64,
    pub rhs_integrated: f64,
    pub slack_integrated: f64,
    pub passed: bool,
}

/// mu_1(K, L) >= (1/q) mu(K)^{1-q} mu(L)^q and its integrated form, for a
/// homogeneous density with declared concavity.
pub fn first_inequality_check(
    k: &SymmetricPolytope,
    l: &SymmetricPolytope,
    d: &WeightedDensity,
) -> Result<FirstInequalityReport> {
    let r = d.require_homogeneity()?;
    d.concavity().ok_or(Error::MissingConcavity)?;
    let q = 1.0 / (k.dim() as f64 + r);
    let mixed = mixed_measure(k, l, d)?;
    let mu_k = body_measure_cone(k, d)?;
    let mu_l = body_measure_cone(l, d)?;
    let rhs_integrated = mu_k.powf(1.0 - q) * mu_l.powf(q);
    let rhs = rhs_integrated / q;
    let lhs = mixed.value;
    let lhs_integrated = q * lhs;
    let slack = lhs - rhs;
    let slack_integrated = lhs_integrated - rhs_integrated;
    Ok(FirstInequalityReport {
        mu_k,
        mu_l,
        q,
        lhs,
        rhs,
        slack,
        lhs_integrated,
        rhs_integrated,
        slack_integrated,
        passed: slack >= -FIRST_INEQUALITY_TOL && slack_integrated >= -FIRST_INEQUALITY_TOL,
    })
}

/// A concavity profile F: the measure satisfies
/// F(mu(lambda K + (1 - lambda) L)) >= lambda F(mu(K)) + (1 - lambda) F(mu(L)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "q")]
pub enum FConcavity {
    /// F(t) = t^q with q > 0.
    Power(f64),
    /// F(t) = log t.
    Log,
    /// F = inverse of the standard normal distribution function.
    GaussianQuantile,
}

impl FConcavity {
    pub fn eval(&self, t: f64) -> Result<f64> {
        match self {
            FConcavity::Power(q) => Ok(t.powf(*q)),
            FConcavity::Log => Ok(t.ln()),
            FConcavity::GaussianQuantile => gaussian_quantile(t),
        }
    }

    pub fn derivative(&self, t: f64) -> Result<f64> {
        match self {
            FConcavity::Power(q) => Ok(q * t.powf(q - 1.0)),
            FConcavity::Log => Ok(1.0 / t),
            // (psi^{-1})'(t) = 1 / psi'(psi^{-1}(t)) = sqrt(2 pi) exp(x^2 / 2).
            FConcavity::GaussianQuantile => Ok(1.0 / gaussian_pdf(gaussian_quantile(t)?)),
        }
    }

    pub fn inverse(&self, y: f64) -> f64 {
        match self {
            FConcavity::Power(q) => y.powf(1.0 / q),
            FConcavity::Log => y.exp(),
            FConcavity::GaussianQuantile => gaussian_cdf(y),
        }
    }

    /// (F(b) - F(a)) / F'(a).
    pub fn increment(&self, a: f64, b: f64) -> Result<f64> {
        Ok((self.eval(b)? - self.eval(a)?) / self.derivative(a)?)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FConcaveReport {
    pub f: FConcavity,
    pub mixed_kl: f64,
    pub mixed_kk: f64,
    pub mu_k: f64,
    pub mu_l: f64,
    pub se_k: f64,
    pub se_l: f64,
    pub rhs: f64,
    pub slack: f64,
    /// Standard error of the slack propagated from the measure estimates.
    pub se: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Measure of a body with its standard error: Monte Carlo for the Gaussian,
/// exact (se = 0) otherwise.
fn measure_with_se(p: &SymmetricPolytope, d: &WeightedDensity, samples: usize, seed: u64) -> Result<(f64, f64)> {
    match d.kind() {
        DensityKind::Gaussian => {
            let MCOracle { estimate, se, .. } = gaussian_body_measure(p, samples, seed)?;
            Ok((estimate, se))
        }
        _ => Ok((body_measure(p, d)?, 0.0)),
    }
}

/// mu_1(K, L) >= mu_1(K, K) + (F(mu(L)) - F(mu(K))) / F'(mu(K)).
///
/// Mixed measures are computed by face quadrature. For the Gaussian, mu(K)
/// and mu(L) are Monte Carlo estimates on independent streams and the check
/// passes iff slack >= -3 se, with se propagated to first order. Otherwise
/// the tolerance is `FIRST_INEQUALITY_TOL`.
pub fn f_concave_first_check(
    k: &SymmetricPolytope,
    l: &SymmetricPolytope,
    d: &WeightedDensity,
    f: FConcavity,
    samples: usize,
    seed: u64,
) -> Result<FConcaveReport> {
    let mixed_kl = mixed_measure(k, l, d)?.value;
    let mixed_kk = mixed_measure(k, k, d)?.value;
    let (mu_k, se_k) = measure_with_se(k, d, samples, seed)?;
    let (mu_l, se_l) = measure_with_se(l, d, samples, seed ^ 0x9e37_79b9_7f4a_7c15)?;
    let rhs = mixed_kk + f.increment(mu_k, mu_l)?;
    let slack = mixed_kl - rhs;
    let se = if se_k == 0.0 && se_l == 0.0 {
        0.0
    } else {
        let (dk, dl) = increment_gradient(f, mu_k, mu_l)?;
        ((dk * se_k).powi(2) + (dl * se_l).powi(2)).sqrt()
    };
    let tolerance = (3.0 * se).max(FIRST_INEQUALITY_TOL);
    Ok(FConcaveReport {
        f,
        mixed_kl,
        mixed_kk,
        mu_k,
        mu_l,
        se_k,
        se_l,
        rhs,
        slack,
        se,
        tolerance,
        passed: slack >= -tolerance,
    })
}

/// Partial derivatives of (a, b) -> (F(b) - F(a)) / F'(a), by central
/// differences.
fn increment_gradient(f: FConcavity, a: f64, b: f64) -> Result<(f64, f64)> {
    let h = |x: f64| 1e-6 * x.abs().max(1e-6);
    let clamp = |x: f64| match f {
        FConcavity::GaussianQuantile => x.clamp(1e-300, 1.0 - 1e-16),
        _ => x.max(1e-300),
    };
    let (ha, hb) = (h(a), h(b));
    let da = (f.increment(clamp(a + ha), b)? - f.increment(clamp(a - ha), b)?) / (2.0 * ha);
    let db = (f.increment(a, clamp(b + hb))? - f.increment(a, clamp(b - hb))?) / (2.0 * hb);
    Ok((da, db))
}

#[derive(Debug, Clone, Serialize)]
pub struct IsoperimetricReport {
    /// Dilation applied to L so that mu(sL) = mu(K).
    pub scale: f64,
    pub mu_k: f64,
    pub mu_l: f64,
    pub mixed_kl: f64,
    pub mixed_kk: f64,
    pub slack: f64,
    /// Monte Carlo cross-check of mu(sL) - mu(K) and its standard error.
    pub mc_gap: f64,
    pub mc_se: f64,
    pub tolerance: f64,
    pub passed: bool,
}

pub const MATCH_TOL: f64 = 1e-4;
pub const ISOPERIMETRIC_TOL: f64 = 1e-8;

/// For mu(L) = mu(K): mu_1(K, L) >= mu_1(K, K). L is first dilated until
/// its deterministic measure matches mu(K) to 1e-12 relative, by Newton
/// steps on s -> mu(sL) with derivative mu_1(sL, L), kept inside a bracket.
/// A Monte Carlo estimate of the residual mismatch is reported and must lie
/// within `MATCH_TOL` + 3 se.
pub fn isoperimetric_check(
    k: &SymmetricPolytope,
    l: &SymmetricPolytope,
    d: &WeightedDensity,
    samples: usize,
    seed: u64,
) -> Result<IsoperimetricReport> {
    same_dim(k, l)?;
    let mu_k = body_measure(k, d)?;
    let measure = |s: f64| body_measure(&l.scale(s), d);
    let (mut lo, mut hi) = (0.0, f64::INFINITY);
    let mut s = 1.0;
    let mut m = measure(s)?;
    for _ in 0..200 {
        if (m - mu_k).abs() <= 1e-12 * mu_k || (hi.is_finite() && hi - lo <= 1e-15 * hi) {
            break;
        }
        if m < mu_k {
            lo = s;
        } else {
            hi = s;
        }
        let slope = mixed_measure(&l.scale(s), l, d)?.value;
        let newton = s + (mu_k - m) / slope;
        s = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else if hi.is_infinite() {
            2.0 * s
        } else {
            0.5 * (lo + hi)
        };
        m = measure(s)?;
    }
    let ls = l.scale(s);
    let mu_l = m;
    let mixed_kl = mixed_measure(k, &ls, d)?.value;
    let mixed_kk = mixed_measure(k, k, d)?.value;
    let (mc_gap, mc_se) = match d.kind() {
        DensityKind::Gaussian => {
            let n = k.dim();
            let st = sample_mean(samples, seed, |rng| {
                let x = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
                f64::from(u8::from(ls.contains(&x))) - f64::from(u8::from(k.contains(&x)))
            });
            (st.mean, st.se())
        }
        _ => (mu_l - mu_k, 0.0),
    };
    let slack = mixed_kl - mixed_kk;
    let matched = (mc_gap).abs() <= MATCH_TOL + 3.0 * mc_se;
    Ok(IsoperimetricReport {
        scale: s,
        mu_k,
        mu_l,
        mixed_kl,
        mixed_kk,
        slack,
        mc_gap,
        mc_se,
        tolerance: ISOPERIMETRIC_TOL,
        passed: matched && slack >= -ISOPERIMETRIC_TOL,
    })
}

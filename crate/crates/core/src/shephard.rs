//! Comparing weighted measures through weighted projections: the zonotope
//! comparison theorem, certification of counterexample pairs, and the
//! quantitative stability bound.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::body::random::{random_symmetric_polytope_with, random_zonotope_with};
use crate::body::{is_zonotope, regular_polygon, SymmetricPolytope, ZonotopeCertificate};
use crate::density::WeightedDensity;
use crate::directions::direction_set;
use crate::error::{Error, Result};
use crate::integrate::{body_measure, unit_ball_volume};
use crate::io::BodyFile;
use crate::projection::paired_profiles;
use crate::rng::chunk_rng;

/// Sampled dominance counts as holding down to this multiple of max P_L:
/// the margin of a pair sharing a projection is zero only up to rounding.
pub const DOMINANCE_TOL: f64 = 1e-12;
/// Absolute slack in the measure comparisons.
pub const MEASURE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct Dominance {
    /// min over sampled theta of P_{mu,L}(theta) - P_{mu,K}(theta).
    pub delta: f64,
    pub argmin: Vec<f64>,
    pub directions: usize,
    pub max_p_l: f64,
}

impl Dominance {
    pub fn holds(&self) -> bool {
        self.delta >= -DOMINANCE_TOL * self.max_p_l.max(1.0)
    }
}

/// Sampled margin of P_{mu,K} <= P_{mu,L} over the axes, diagonals and `m`
/// quasi-random directions.
pub fn dominance(
    k: &SymmetricPolytope,
    l: &SymmetricPolytope,
    d: &WeightedDensity,
    m: usize,
    seed: u64,
) -> Result<Dominance> {
    if k.dim() != l.dim() {
        return Err(Error::DimensionMismatch { expected: l.dim(), got: k.dim() });
    }
    if !d.is_even() {
        return Err(Error::InvalidArgument("dominance needs an even density".into()));
    }
    let dirs = direction_set(k.dim(), m, seed);
    let (pk, pl) = paired_profiles(k, l, d, &dirs)?;
    let (j, delta) = pk
        .iter()
        .zip(&pl)
        .map(|(a, b)| b - a)
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("direction set is never empty");
    Ok(Dominance {
        delta,
        argmin: dirs[j].iter().copied().collect(),
        directions: dirs.len(),
        max_p_l: pl.iter().cloned().fold(0.0, f64::max),
    })
}

fn require_degrees(d: &WeightedDensity) -> Result<f64> {
    let r = d.require_homogeneity()?;
    d.concavity().ok_or(Error::MissingConcavity)?;
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    TheoremConsistent,
    HypothesesNotMet,
    /// Hypotheses hold but mu(K) > mu(L): an implementation defect.
    Violated,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub k: BodyFile,
    pub l: BodyFile,
    pub density: String,
    pub directions: usize,
    pub delta: f64,
    pub argmin: Vec<f64>,
    pub certificate: ZonotopeCertificate,
    pub mu_k: f64,
    pub mu_l: f64,
    pub verdict: Verdict,
}

/// Evaluates both sides of the comparison theorem without failing on a
/// violation.
pub fn compare(
    k: &SymmetricPolytope,
    l: &SymmetricPolytope,
    d: &WeightedDensity,
    m: usize,
    seed: u64,
) -> Result<ComparisonReport> {
    require_degrees(d)?;
    let dom = dominance(k, l, d, m, seed)?;
    let certificate = is_zonotope(l);
    let mu_k = body_measure(k, d)?;
    let mu_l = body_measure(l, d)?;
    let verdict = if !(certificate.is_zonotope && dom.holds()) {
        Verdict::HypothesesNotMet
    } else if mu_k <= mu_l + MEASURE_TOL {
        Verdict::TheoremConsistent
    } else {
        Verdict::Violated
    };
    Ok(ComparisonReport {
        k: BodyFile::from_polytope(k),
        l: BodyFile::from_polytope(l),
        density: d.label(),
        directions: dom.directions,
        delta: dom.delta,
        argmin: dom.argmin,
        certificate,
        mu_k,
        mu_l,
        verdict,
    })
}

/// If L is a zonotope and P_{mu,K} <= P_{mu,L} on the sample, asserts
/// mu(K) <= mu(L) + 1e-9.
pub fn shephard_verify(
    k: &SymmetricPolytope,
    l: &SymmetricPolytope,
    d: &WeightedDensity,
    m: usize,
    seed: u64,
) -> Result<ComparisonReport> {
    let report = compare(k, l, d, m, seed)?;
    if report.verdict == Verdict::Violated {
        return Err(Error::CheckFailed {
            check: "mu(K) <= mu(L) under projection dominance",
            deviation: report.mu_k - report.mu_l,
            tolerance: MEASURE_TOL,
        });
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleReport {
    pub certificate: ZonotopeCertificate,
    pub delta: f64,
    pub argmin: Vec<f64>,
    pub directions: usize,
    pub mu_k: f64,
    pub mu_l: f64,
}

/// Certifies a pair with dominated projections but larger measure: L must
/// not be a zonotope, P_{mu,K} <= P_{mu,L} on the sample, and
/// mu(K) > mu(L).
pub fn counterexample_verify(
    k: &SymmetricPolytope,
    l: &SymmetricPolytope,
    d: &WeightedDensity,
    m: usize,
    seed: u64,
) -> Result<CounterexampleReport> {
    require_degrees(d)?;
    let certificate = is_zonotope(l);
    if certificate.is_zonotope {
        return Err(Error::RejectedPair("L is a zonotope, so the comparison theorem applies to it".into()));
    }
    let dom = dominance(k, l, d, m, seed)?;
    if !dom.holds() {
        return Err(Error::RejectedPair(format!("P_K exceeds P_L by {:e} at theta = {:?}", -dom.delta, dom.argmin)));
    }
    let mu_k = body_measure(k, d)?;
    let mu_l = body_measure(l, d)?;
    if mu_k <= mu_l + MEASURE_TOL {
        return Err(Error::RejectedPair(format!("mu(K) = {mu_k} does not exceed mu(L) = {mu_l}")));
    }
    Ok(CounterexampleReport {
        certificate,
        delta: dom.delta,
        argmin: dom.argmin,
        directions: dom.directions,
        mu_k,
        mu_l,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityConstant {
    /// R(L), the largest vertex norm.
    pub circumradius: f64,
    pub nu_n: f64,
    pub nu_n_minus_1: f64,
    pub q: f64,
    pub mu_l: f64,
    /// C(L, mu) = (nu_n / nu_{n-1}) R(L) mu(L)^{-q}.
    pub value: f64,
}

impl StabilityConstant {
    pub fn new(l: &SymmetricPolytope, d: &WeightedDensity) -> Result<Self> {
        let r = require_degrees(d)?;
        let n = l.dim();
        let q = 1.0 / (n as f64 + r);
        let circumradius = l.circumradius();
        let nu_n = unit_ball_volume(n);
        let nu_n_minus_1 = unit_ball_volume(n - 1);
        let mu_l = body_measure(l, d)?;
        let value = nu_n / nu_n_minus_1 * circumradius * mu_l.powf(-q);
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::DegenerateInput(format!("stability constant {value} is not positive")));
        }
        Ok(Self { circumradius, nu_n, nu_n_minus_1, q, mu_l, value })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub constant: StabilityConstant,
    pub delta: f64,
    /// max(0, -delta): P_K <= P_L + epsilon on the sample.
    pub epsilon: f64,
    pub mu_k: f64,
    /// mu(K)^{1-q}.
    pub lhs: f64,
    /// mu(L)^{1-q} + C epsilon.
    pub rhs: f64,
    pub slack: f64,
    pub passed: bool,
}

/// Evaluates the stability bound without failing when it is violated.
pub fn stability_report(
    k: &SymmetricPolytope,
    l: &SymmetricPolytope,
    d: &WeightedDensity,
    m: usize,
    seed: u64,
) -> Result<StabilityReport> {
    if !is_zonotope(l).is_zonotope {
        return Err(Error::InvalidArgument("the stability bound needs a zonotope L".into()));
    }
    let constant = StabilityConstant::new(l, d)?;
    let dom = dominance(k, l, d, m, seed)?;
    let epsilon = (-dom.delta).max(0.0);
    let mu_k = body_measure(k, d)?;
    let lhs = mu_k.powf(1.0 - constant.q);
    let rhs = constant.mu_l.powf(1.0 - constant.q) + constant.value * epsilon;
    let slack = rhs + MEASURE_TOL - lhs;
    Ok(StabilityReport { constant, delta: dom.delta, epsilon, mu_k, lhs, rhs, slack, passed: slack >= 0.0 })
}

/// Checks mu(K)^{1-q} <= mu(L)^{1-q} + C(L, mu) epsilon + 1e-9 with epsilon
/// the sampled excess of P_K over P_L.
pub fn stability_check(
    k: &SymmetricPolytope,
    l: &SymmetricPolytope,
    d: &WeightedDensity,
    m: usize,
    seed: u64,
) -> Result<StabilityReport> {
    let report = stability_report(k, l, d, m, seed)?;
    if !report.passed {
        return Err(Error::CheckFailed { check: "stability bound", deviation: -report.slack, tolerance: 0.0 });
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct SeparationReport {
    pub delta: f64,
    /// L is a zonotope and delta > 0.
    pub applicable: bool,
    pub mu_k: f64,
    pub mu_l: f64,
    pub q: f64,
    /// (mu(L)^{1-q} - mu(K)^{1-q}) / delta, a sample from below of the
    /// separation constant.
    pub ratio: Option<f64>,
}

pub fn separation_report(
    k: &SymmetricPolytope,
    l: &SymmetricPolytope,
    d: &WeightedDensity,
    m: usize,
    seed: u64,
) -> Result<SeparationReport> {
    let r = require_degrees(d)?;
    let q = 1.0 / (k.dim() as f64 + r);
    let dom = dominance(k, l, d, m, seed)?;
    let mu_k = body_measure(k, d)?;
    let mu_l = body_measure(l, d)?;
    let applicable = is_zonotope(l).is_zonotope && dom.delta > 0.0;
    let ratio = applicable.then(|| (mu_l.powf(1.0 - q) - mu_k.powf(1.0 - q)) / dom.delta);
    Ok(SeparationReport { delta: dom.delta, applicable, mu_k, mu_l, q, ratio })
}

#[derive(Debug, Clone, Serialize)]
pub struct BallPairReport {
    pub facets: usize,
    pub r: f64,
    pub big_r: f64,
    pub delta: f64,
    /// Bound on |P_polygon - P_disk| summed over both bodies.
    pub discretization_bound: f64,
    pub mu_k: f64,
    pub mu_l: f64,
    pub passed: bool,
}

/// Projection dominance without measure comparison for the density of the
/// unit disk: L = r G, K = R G with G the regular m-gon inscribed in the
/// unit circle and r <= 1 <= R, R >= 1/r.
///
/// For the disks themselves P_{rB} = 2r and P_{RB} = 2/R, so R >= 1/r gives
/// dominance while mu(RB) = pi > mu(rB). For the polygons, with phi = pi/m
/// and w the width of G orthogonal to theta, P_{rG} = r w and
/// P_{RG} = (w/R) 2 phi / sin(2 phi); the deviation from the disk values is
/// at most 2r(1 - cos phi) + (2/R)(2 phi / sin(2 phi) - 1). Dominance is
/// checked against three times that bound.
pub fn ball_pair_regression(m: usize, r: f64, big_r: f64, directions: usize, seed: u64) -> Result<BallPairReport> {
    if !(r > 0.0 && r <= 1.0 && big_r >= 1.0 && big_r * r >= 1.0) {
        return Err(Error::InvalidArgument(format!("need r <= 1 <= R and R >= 1/r, got r = {r}, R = {big_r}")));
    }
    let d = WeightedDensity::ball_indicator(1.0)?;
    let l = regular_polygon(m, r)?;
    let k = regular_polygon(m, big_r)?;
    let phi = std::f64::consts::PI / m as f64;
    let bound = 2.0 * r * (1.0 - phi.cos()) + 2.0 / big_r * (2.0 * phi / (2.0 * phi).sin() - 1.0);
    let dom = dominance(&k, &l, &d, directions, seed)?;
    let mu_k = body_measure(&k, &d)?;
    let mu_l = body_measure(&l, &d)?;
    Ok(BallPairReport {
        facets: m,
        r,
        big_r,
        delta: dom.delta,
        discretization_bound: bound,
        mu_k,
        mu_l,
        passed: dom.delta >= -3.0 * bound && mu_k >= mu_l,
    })
}

/// Scales `k` so that its projections touch those of `l` from below on the
/// sampled directions, up to a relative margin.
fn dominated_dilate(
    k: &SymmetricPolytope,
    l: &SymmetricPolytope,
    d: &WeightedDensity,
    m: usize,
    seed: u64,
    margin: f64,
) -> Result<SymmetricPolytope> {
    let deg = k.dim() as f64 + d.require_homogeneity()? - 1.0;
    let dirs = direction_set(k.dim(), m, seed);
    let (pk, pl) = paired_profiles(k, l, d, &dirs)?;
    let ratio = pk.iter().zip(&pl).map(|(a, b)| b / a).fold(f64::INFINITY, f64::min);
    Ok(k.scale(ratio.powf(1.0 / deg) * (1.0 - margin)))
}

fn random_zonotope_body(rng: &mut impl Rng, n: usize) -> Result<SymmetricPolytope> {
    loop {
        let gens = rng.random_range(n..=n + 2);
        if let Ok(z) = random_zonotope_with(rng, n, gens).realize() {
            return Ok(z);
        }
    }
}

/// Random pair (K, L): L a zonotope from random generators, K a random
/// symmetric polytope dilated until its projections touch those of L.
pub fn random_dominated_pair(
    n: usize,
    d: &WeightedDensity,
    m: usize,
    seed: u64,
) -> Result<(SymmetricPolytope, SymmetricPolytope)> {
    let mut rng = chunk_rng(seed, 0);
    let l = random_zonotope_body(&mut rng, n)?;
    let pairs = rng.random_range(n..=n + 3);
    let k0 = random_symmetric_polytope_with(&mut rng, n, pairs)?;
    let k = dominated_dilate(&k0, &l, d, m, seed, 1e-9)?;
    Ok((k, l))
}

#[derive(Debug, Clone, Serialize)]
pub struct ShephardBatch {
    pub reports: Vec<ComparisonReport>,
    pub hypotheses_met: usize,
    pub falsifying: usize,
}

/// Comparison reports for `trials` random dominated pairs.
pub fn shephard_batch(n: usize, d: &WeightedDensity, trials: usize, m: usize, seed: u64) -> Result<ShephardBatch> {
    let reports: Vec<ComparisonReport> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = seed.wrapping_mul(0x9e37_79b9).wrapping_add(t as u64);
            let (k, l) = random_dominated_pair(n, d, m, s)?;
            compare(&k, &l, d, m, s)
        })
        .collect::<Result<_>>()?;
    let hypotheses_met = reports.iter().filter(|r| r.verdict != Verdict::HypothesesNotMet).count();
    let falsifying = reports.iter().filter(|r| r.verdict == Verdict::Violated).count();
    Ok(ShephardBatch { reports, hypotheses_met, falsifying })
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityBatch {
    pub reports: Vec<StabilityReport>,
    pub failures: usize,
}

/// Stability reports for random dominated pairs whose K offsets are then
/// pushed out by up to 5%, so that P_K exceeds P_L somewhere.
pub fn stability_batch(n: usize, d: &WeightedDensity, trials: usize, m: usize, seed: u64) -> Result<StabilityBatch> {
    let reports: Vec<StabilityReport> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = seed.wrapping_mul(0x85eb_ca6b).wrapping_add(t as u64);
            let (k, l) = random_dominated_pair(n, d, m, s)?;
            let mut rng = chunk_rng(s, 1);
            let offsets: Vec<f64> = k.half_offsets().iter().map(|a| a * (1.0 + 0.05 * rng.random::<f64>())).collect();
            let k = k.with_half_offsets(&offsets)?;
            stability_report(&k, &l, d, m, s)
        })
        .collect::<Result<_>>()?;
    let failures = reports.iter().filter(|r| !r.passed).count();
    Ok(StabilityBatch { reports, failures })
}

/// Separation ratios for nested pairs K strictly inside a random zonotope L.
pub fn separation_batch(
    n: usize,
    d: &WeightedDensity,
    trials: usize,
    m: usize,
    seed: u64,
) -> Result<Vec<SeparationReport>> {
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = seed.wrapping_mul(0xc2b2_ae35).wrapping_add(t as u64);
            let mut rng = chunk_rng(s, 0);
            let l = random_zonotope_body(&mut rng, n)?;
            let pairs = rng.random_range(n..=n + 3);
            let k0 = random_symmetric_polytope_with(&mut rng, n, pairs)?;
            // Largest dilate of k0 inside l, then shrunk.
            let fit = k0.vertices().iter().map(|v| gauge(&l, v)).fold(0.0, f64::max);
            let k = k0.scale(rng.random_range(0.3..0.95) / fit);
            separation_report(&k, &l, d, m, s)
        })
        .collect()
}

/// Gauge of `v` with respect to `l`: the least t with v in t l.
fn gauge(l: &SymmetricPolytope, v: &crate::linalg::Vector) -> f64 {
    l.normals().iter().zip(l.offsets()).map(|(u, a)| u.dot(v) / a).fold(0.0, f64::max)
}

impl ShephardBatch {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,delta,mu_k,mu_l,zonotope,verdict\n");
        for (i, r) in self.reports.iter().enumerate() {
            out.push_str(&format!(
                "{i},{:e},{},{},{},{}\n",
                r.delta,
                r.mu_k,
                r.mu_l,
                r.certificate.is_zonotope,
                serde_json::to_value(r.verdict).expect("plain enum").as_str().unwrap_or_default()
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::{dia2, octahedron, sq2, truncated_octahedron};
    use crate::projection::P_mu;
    use approx::assert_relative_eq;

    #[test]
    fn dominance_examples() {
        let leb = WeightedDensity::lebesgue();
        let x1 = WeightedDensity::x1(2);
        let dom = dominance(&dia2(), &sq2(), &leb, 256, 1).unwrap();
        assert!(dom.delta.abs() < 1e-12);
        assert!(dom.holds());
        assert_eq!(dominance(&sq2(), &sq2(), &x1, 256, 1).unwrap().delta, 0.0);

        // P scales with s^{n+r-1} = s^2 for |x_1| in the plane.
        let dom = dominance(&sq2().scale(0.9), &sq2(), &x1, 256, 1).unwrap();
        let min_p = direction_set(2, 256, 1).iter().map(|t| P_mu(&sq2(), &x1, t).unwrap()).fold(f64::MAX, f64::min);
        assert_relative_eq!(dom.delta, (1.0 - 0.81) * min_p, max_relative = 1e-12);
    }

    #[test]
    fn shephard_examples() {
        let r = shephard_verify(&dia2(), &sq2(), &WeightedDensity::lebesgue(), 256, 1).unwrap();
        assert_eq!(r.verdict, Verdict::TheoremConsistent);
        assert_relative_eq!(r.mu_k, 2.0, max_relative = 1e-12);
        assert_relative_eq!(r.mu_l, 4.0, max_relative = 1e-12);

        let r = shephard_verify(&dia2(), &sq2(), &WeightedDensity::x1(2), 256, 1).unwrap();
        assert_relative_eq!(r.mu_k, 2.0 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(r.mu_l, 2.0, max_relative = 1e-12);
        assert!(r.delta > -1e-12);
        assert_eq!(r.verdict, Verdict::TheoremConsistent);
    }

    #[test]
    fn nested_pairs_are_consistent() {
        for s in 0..6 {
            let mut rng = chunk_rng(s, 0);
            let l = random_zonotope_body(&mut rng, 2).unwrap();
            let k = l.scale(0.8);
            let r = shephard_verify(&k, &l, &WeightedDensity::lebesgue(), 64, s).unwrap();
            assert_eq!(r.verdict, Verdict::TheoremConsistent);
        }
    }

    fn inscribed(k0: &SymmetricPolytope, l: &SymmetricPolytope) -> SymmetricPolytope {
        let fit = k0.vertices().iter().map(|v| gauge(l, v)).fold(0.0, f64::max);
        k0.scale(1.0 / fit)
    }

    #[test]
    fn containment_and_dominance() {
        use crate::body::random::random_symmetric_polytope;
        // Lebesgue: K inside L forces P_K <= P_L.
        for s in 0..20 {
            let l = random_symmetric_polytope(2 + (s as usize % 2), 4, s).unwrap();
            let k = inscribed(&random_symmetric_polytope(l.dim(), 4, 500 + s).unwrap(), &l);
            assert!(dominance(&k, &l, &WeightedDensity::lebesgue(), 128, s).unwrap().delta > -1e-9);
        }
        // |x_1|: containment does not force dominance. P averages g over the
        // two ends of each chord, and a chord of K can end where g is larger.
        let x1 = WeightedDensity::x1(2);
        let mut worst = f64::MAX;
        for s in 0..40 {
            let l = random_symmetric_polytope(2, 4, s).unwrap();
            let k = inscribed(&random_symmetric_polytope(2, 4, 10_000 + s).unwrap(), &l);
            let dom = dominance(&k, &l, &x1, 256, s).unwrap();
            worst = worst.min(dom.delta / dom.max_p_l);
            assert!(body_measure(&k, &x1).unwrap() < body_measure(&l, &x1).unwrap());
        }
        assert!(worst < -1e-2, "{worst}");
    }

    #[test]
    fn counterexample_clauses() {
        let leb = WeightedDensity::lebesgue();
        let e = counterexample_verify(&octahedron(), &octahedron(), &leb, 128, 1).unwrap_err();
        assert!(matches!(e, Error::RejectedPair(ref m) if m.contains("does not exceed")));
        let e = counterexample_verify(&sq2().scale(0.5), &sq2(), &leb, 128, 1).unwrap_err();
        assert!(matches!(e, Error::RejectedPair(ref m) if m.contains("zonotope")));

        // Octahedron with its vertices cut at depth c, dilated by
        // (1 - c^2)^{-1/2}: the shadow along e_1 shrinks from 2 to 2 - 2c^2,
        // and no other direction loses less, while the volume is
        // (4/3 - 4c^3) / (1 - c^2)^{3/2} > 4/3.
        let c: f64 = 0.3;
        let k = truncated_octahedron(c).unwrap().scale((1.0 - c * c).powf(-0.5) * (1.0 - 1e-9));
        let rep = counterexample_verify(&k, &octahedron(), &leb, 2048, 7).unwrap();
        assert_relative_eq!(rep.mu_l, 4.0 / 3.0, max_relative = 1e-12);
        let expected = (4.0 / 3.0 - 4.0 * c.powi(3)) / (1.0 - c * c).powf(1.5);
        assert_relative_eq!(rep.mu_k, expected, max_relative = 1e-8);
        assert!(!rep.certificate.is_zonotope);
    }

    #[test]
    fn stability_constant_closed_form() {
        let c = StabilityConstant::new(&sq2(), &WeightedDensity::lebesgue()).unwrap();
        // (pi / 2) sqrt(2) 4^{-1/2}
        assert_relative_eq!(c.value, std::f64::consts::PI * 2f64.sqrt() / 4.0, max_relative = 1e-12);
    }

    #[test]
    fn stability_examples() {
        let x1 = WeightedDensity::x1(2);
        let s = 1.01;
        let r = stability_check(&sq2().scale(s), &sq2(), &x1, 256, 1).unwrap();
        let max_p = direction_set(2, 256, 1).iter().map(|t| P_mu(&sq2(), &x1, t).unwrap()).fold(0.0, f64::max);
        assert_relative_eq!(r.epsilon, (s * s - 1.0) * max_p, max_relative = 1e-12);
        assert!(r.slack > 0.0);

        let r = stability_check(&sq2().scale(0.7), &sq2(), &x1, 64, 1).unwrap();
        assert_eq!(r.epsilon, 0.0);
    }

    #[test]
    fn separation_examples() {
        let x1 = WeightedDensity::x1(2);
        let r = separation_report(&sq2().scale(0.5), &sq2(), &x1, 256, 1).unwrap();
        assert!(r.applicable && r.ratio.unwrap() > 0.0);
        let r = separation_report(&sq2(), &sq2(), &x1, 256, 1).unwrap();
        assert!(!r.applicable && r.ratio.is_none());
    }

    #[test]
    fn ball_pair_closed_forms() {
        // P for polygon pairs under the disk density against the closed forms.
        let d = WeightedDensity::ball_indicator(1.0).unwrap();
        let m = 16;
        let phi = std::f64::consts::PI / m as f64;
        let g = regular_polygon(m, 1.0).unwrap();
        for th in direction_set(2, 8, 3) {
            let perp = crate::linalg::vector(&[-th[1], th[0]]);
            let w = 2.0 * g.support_function(&perp);
            assert_relative_eq!(P_mu(&g.scale(0.5), &d, &th).unwrap(), 0.5 * w, max_relative = 1e-7);
            let expect = w / 2.0 * 2.0 * phi / (2.0 * phi).sin();
            assert_relative_eq!(P_mu(&g.scale(2.0), &d, &th).unwrap(), expect, max_relative = 1e-7);
        }
        let rep = ball_pair_regression(64, 0.5, 2.0, 256, 1).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(rep.delta < 0.0);
        assert_relative_eq!(rep.mu_k, std::f64::consts::PI, max_relative = 1e-12);
    }

    #[test]
    fn batches() {
        let b = shephard_batch(2, &WeightedDensity::x1(2), 8, 64, 3).unwrap();
        assert_eq!(b.falsifying, 0);
        assert_eq!(b.hypotheses_met, 8);
        assert!(b.to_csv().lines().count() == 9);
        let s = stability_batch(3, &WeightedDensity::lebesgue(), 4, 64, 3).unwrap();
        assert_eq!(s.failures, 0);
        assert!(s.reports.iter().all(|r| r.epsilon > 0.0));
        let sep = separation_batch(2, &WeightedDensity::lebesgue(), 4, 64, 3).unwrap();
        assert!(sep.iter().all(|r| r.applicable && r.ratio.unwrap() > 0.0));
    }
}

//! Densities with declared homogeneity and concavity degrees, plus sampling
//! validators that cross-check the declarations.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Vector;

/// Guard for relative deviations where the density vanishes.
pub const TINY: f64 = 1e-300;
pub const HOMOGENEITY_TOL: f64 = 1e-9;
pub const CONCAVITY_TOL: f64 = 1e-10;

pub type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Closure {g > 0}, as declared by the density.
#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    Everywhere,
    /// Closed half-space {<x, v> >= 0}.
    HalfSpace(Vector),
    /// Centered Euclidean ball of the given radius.
    Ball(f64),
}

impl Support {
    pub fn contains(&self, x: &Vector) -> bool {
        match self {
            Support::Everywhere => true,
            Support::HalfSpace(v) => x.dot(v) >= 0.0,
            Support::Ball(r) => x.norm() <= *r,
        }
    }

    /// Whether the unit direction `u` lies inside the support cone with the
    /// given angular margin.
    pub fn contains_direction(&self, u: &Vector, margin: f64) -> bool {
        match self {
            Support::Everywhere => true,
            Support::HalfSpace(v) => u.dot(v) >= margin.sin(),
            Support::Ball(_) => false,
        }
    }
}

/// A user-supplied density with declared structure.
#[derive(Clone)]
pub struct CustomDensity {
    pub name: String,
    pub eval: Evaluator,
    pub homogeneity: Option<f64>,
    pub concavity: Option<f64>,
    pub half_space_normal: Option<Vector>,
    pub even: bool,
    pub support: Support,
    /// Hyperplanes through the origin across which the density is only
    /// piecewise smooth. Faces are split along them before quadrature.
    pub splits: Vec<Vector>,
}

impl fmt::Debug for CustomDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomDensity")
            .field("name", &self.name)
            .field("homogeneity", &self.homogeneity)
            .field("concavity", &self.concavity)
            .field("even", &self.even)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum DensityKind {
    /// g = 1.
    Lebesgue,
    /// g(x) = |<x, theta>|.
    AbsLinear {
        theta: Vector,
    },
    /// g(x) = <x, theta>_+ ^ inv_p.
    PowerCone {
        theta: Vector,
        inv_p: f64,
    },
    /// Standard Gaussian density on R^n.
    Gaussian,
    /// Indicator of the centered ball of the given radius.
    BallIndicator {
        radius: f64,
    },
    Custom(CustomDensity),
}

/// Density g of a measure mu on R^n.
#[derive(Debug, Clone)]
pub struct WeightedDensity {
    kind: DensityKind,
}

impl WeightedDensity {
    pub fn lebesgue() -> Self {
        Self { kind: DensityKind::Lebesgue }
    }

    pub fn abs_linear(theta: Vector) -> Result<Self> {
        let theta = normalized(theta)?;
        Ok(Self { kind: DensityKind::AbsLinear { theta } })
    }

    pub fn power_cone(theta: Vector, inv_p: f64) -> Result<Self> {
        if !(inv_p > 0.0 && inv_p.is_finite()) {
            return Err(Error::InvalidArgument(format!("inv_p must be positive, got {inv_p}")));
        }
        let theta = normalized(theta)?;
        Ok(Self { kind: DensityKind::PowerCone { theta, inv_p } })
    }

    pub fn gaussian() -> Self {
        Self { kind: DensityKind::Gaussian }
    }

    pub fn ball_indicator(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
        }
        Ok(Self { kind: DensityKind::BallIndicator { radius } })
    }

    pub fn custom(custom: CustomDensity) -> Self {
        Self { kind: DensityKind::Custom(custom) }
    }

    /// The density |x_1| on R^n.
    pub fn x1(n: usize) -> Self {
        Self::abs_linear(crate::linalg::unit(n, 0)).expect("unit vector")
    }

    pub fn kind(&self) -> &DensityKind {
        &self.kind
    }

    /// Ambient dimension fixed by the density, if any.
    pub fn dim(&self) -> Option<usize> {
        match &self.kind {
            DensityKind::AbsLinear { theta } | DensityKind::PowerCone { theta, .. } => Some(theta.len()),
            DensityKind::Custom(c) => c.half_space_normal.as_ref().map(|v| v.len()),
            _ => None,
        }
    }

    pub fn evaluate(&self, x: &Vector) -> f64 {
        match &self.kind {
            DensityKind::Lebesgue => 1.0,
            DensityKind::AbsLinear { theta } => x.dot(theta).abs(),
            DensityKind::PowerCone { theta, inv_p } => {
                let t = x.dot(theta);
                if t > 0.0 {
                    t.powf(*inv_p)
                } else {
                    0.0
                }
            }
            DensityKind::Gaussian => {
                let n = x.len() as f64;
                (-0.5 * x.norm_squared()).exp() / (2.0 * std::f64::consts::PI).powf(n / 2.0)
            }
            DensityKind::BallIndicator { radius } => {
                if x.norm() <= *radius {
                    1.0
                } else {
                    0.0
                }
            }
            DensityKind::Custom(c) => (c.eval)(x.as_slice()),
        }
    }

    /// Homogeneity degree r, if the density is homogeneous.
    pub fn homogeneity(&self) -> Option<f64> {
        match &self.kind {
            DensityKind::Lebesgue => Some(0.0),
            DensityKind::AbsLinear { .. } => Some(1.0),
            DensityKind::PowerCone { inv_p, .. } => Some(*inv_p),
            DensityKind::Gaussian | DensityKind::BallIndicator { .. } => None,
            DensityKind::Custom(c) => c.homogeneity,
        }
    }

    /// Like [`Self::homogeneity`] but an error for non-homogeneous kinds.
    pub fn require_homogeneity(&self) -> Result<f64> {
        self.homogeneity().ok_or(Error::NonHomogeneousDensity)
    }

    /// Concavity degree p of the restriction to the declared half-space.
    /// Lebesgue reports +inf.
    pub fn concavity(&self) -> Option<f64> {
        match &self.kind {
            DensityKind::Lebesgue => Some(f64::INFINITY),
            DensityKind::AbsLinear { .. } => Some(1.0),
            DensityKind::PowerCone { inv_p, .. } => Some(1.0 / inv_p),
            DensityKind::Gaussian | DensityKind::BallIndicator { .. } => None,
            DensityKind::Custom(c) => c.concavity,
        }
    }

    pub fn half_space_normal(&self) -> Option<&Vector> {
        match &self.kind {
            DensityKind::AbsLinear { theta } | DensityKind::PowerCone { theta, .. } => Some(theta),
            DensityKind::Custom(c) => c.half_space_normal.as_ref(),
            _ => None,
        }
    }

    pub fn is_even(&self) -> bool {
        match &self.kind {
            DensityKind::PowerCone { .. } => false,
            DensityKind::Custom(c) => c.even,
            _ => true,
        }
    }

    pub fn support(&self) -> Support {
        match &self.kind {
            DensityKind::PowerCone { theta, .. } => Support::HalfSpace(theta.clone()),
            DensityKind::BallIndicator { radius } => Support::Ball(*radius),
            DensityKind::Custom(c) => c.support.clone(),
            _ => Support::Everywhere,
        }
    }

    /// Hyperplanes (through the origin, by normal) along which the density is
    /// only piecewise smooth.
    pub fn split_hyperplanes(&self) -> Vec<Vector> {
        match &self.kind {
            DensityKind::AbsLinear { theta } | DensityKind::PowerCone { theta, .. } => {
                vec![theta.clone()]
            }
            DensityKind::Custom(c) => c.splits.clone(),
            _ => Vec::new(),
        }
    }

    /// Whether the density has a positive degree of homogeneity together
    /// with a declared concavity (the class covered by the comparison
    /// theorems), counting Lebesgue as the r = 0 member.
    pub fn has_positive_degrees(&self) -> bool {
        self.homogeneity().is_some() && self.concavity().is_some()
    }

    pub fn label(&self) -> String {
        let fmt_vec = |v: &Vector| {
            let parts: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
            format!("[{}]", parts.join(","))
        };
        match &self.kind {
            DensityKind::Lebesgue => "lebesgue".into(),
            DensityKind::AbsLinear { theta } => format!("abs_linear{}", fmt_vec(theta)),
            DensityKind::PowerCone { theta, inv_p } => {
                format!("power_cone{}^{inv_p}", fmt_vec(theta))
            }
            DensityKind::Gaussian => "gaussian".into(),
            DensityKind::BallIndicator { radius } => format!("ball_indicator({radius})"),
            DensityKind::Custom(c) => format!("custom:{}", c.name),
        }
    }
}

fn normalized(v: Vector) -> Result<Vector> {
    let norm = v.norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::InvalidArgument("direction must be a nonzero finite vector".into()));
    }
    Ok(v / norm)
}

/// q = 1/(n + r), the concavity exponent inherited by the measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcavityProfile {
    pub n: usize,
    pub r: f64,
    pub q: f64,
}

impl ConcavityProfile {
    pub fn new(n: usize, r: f64) -> Self {
        Self { n, r, q: 1.0 / (n as f64 + r) }
    }

    pub fn for_density(n: usize, d: &WeightedDensity) -> Result<Self> {
        Ok(Self::new(n, d.require_homogeneity()?))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub check: &'static str,
    pub samples: usize,
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Sample at which the worst deviation was observed.
    pub witness: Option<Vec<f64>>,
}

impl CheckReport {
    pub fn ensure(&self) -> Result<()> {
        if self.passed {
            Ok(())
        } else {
            Err(Error::CheckFailed { check: self.check, deviation: self.worst, tolerance: self.tolerance })
        }
    }

    fn skipped(check: &'static str, tolerance: f64) -> Self {
        Self { check, samples: 0, worst: 0.0, tolerance, passed: true, witness: None }
    }
}

/// A random point in the declared half-space intersected with the support.
fn sample_point(rng: &mut ChaCha8Rng, n: usize, d: &WeightedDensity, radius: f64) -> Vector {
    loop {
        let mut x = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = x.norm();
        if norm == 0.0 {
            continue;
        }
        x *= rng.random_range(0.05..radius) / norm;
        if let Some(v) = d.half_space_normal() {
            if x.dot(v) < 0.0 {
                x = -x;
            }
        }
        if d.support().contains(&x) && d.evaluate(&x) > 0.0 {
            return x;
        }
    }
}

/// Samples g(a x) against a^r g(x) for a in [0.1, 10].
pub fn check_homogeneity(d: &WeightedDensity, n: usize, samples: usize, seed: u64) -> Result<CheckReport> {
    let r = d.require_homogeneity()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport::skipped("homogeneity", HOMOGENEITY_TOL);
    report.samples = samples;
    for _ in 0..samples {
        let x = sample_point(&mut rng, n, d, 3.0);
        let a: f64 = rng.random_range(0.1..10.0);
        let lhs = d.evaluate(&(&x * a));
        let rhs = a.powf(r) * d.evaluate(&x);
        let dev = (lhs - rhs).abs() / lhs.max(TINY);
        if dev > report.worst {
            report.worst = dev;
            report.witness = Some(x.iter().copied().chain([a]).collect());
        }
    }
    report.passed = report.worst <= HOMOGENEITY_TOL;
    Ok(report)
}

/// Samples the segment inequality g^p(l x + (1-l) y) >= l g^p(x) + (1-l) g^p(y)
/// on the declared half-space. For p = 0 the logarithmic form is used.
pub fn check_p_concavity(d: &WeightedDensity, n: usize, samples: usize, seed: u64) -> Result<CheckReport> {
    let p = d.concavity().ok_or(Error::MissingConcavity)?;
    if p.is_infinite() {
        // Constant densities satisfy every segment inequality.
        return Ok(CheckReport::skipped("p-concavity", CONCAVITY_TOL));
    }
    if d.half_space_normal().is_none() {
        return Err(Error::MissingConcavity);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport::skipped("p-concavity", CONCAVITY_TOL);
    report.samples = samples;
    for _ in 0..samples {
        let x = sample_point(&mut rng, n, d, 3.0);
        let y = sample_point(&mut rng, n, d, 3.0);
        let lambda: f64 = rng.random_range(0.0..1.0);
        let z = &x * lambda + &y * (1.0 - lambda);
        let (gx, gy, gz) = (d.evaluate(&x), d.evaluate(&y), d.evaluate(&z));
        let violation = if p == 0.0 {
            lambda * gx.ln() + (1.0 - lambda) * gy.ln() - gz.ln()
        } else {
            lambda * gx.powf(p) + (1.0 - lambda) * gy.powf(p) - gz.powf(p)
        };
        if violation > report.worst {
            report.worst = violation;
            report.witness = Some(x.iter().chain(y.iter()).copied().chain([lambda]).collect());
        }
    }
    report.passed = report.worst <= CONCAVITY_TOL;
    Ok(report)
}

/// Samples g(x + y) >= (g(x)^{1/r} + g(y)^{1/r})^r on the declared half-space.
/// The deviation is measured relative to max(1, rhs).
pub fn check_implied_concavity(d: &WeightedDensity, n: usize, samples: usize, seed: u64) -> Result<CheckReport> {
    let r = d.require_homogeneity()?;
    let p = d.concavity().ok_or(Error::MissingConcavity)?;
    if !(r > 0.0 && p > 0.0) {
        return Err(Error::InvalidArgument(
            "implied concavity needs positive homogeneity and concavity degrees".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport::skipped("implied 1/r-concavity", CONCAVITY_TOL);
    report.samples = samples;
    for _ in 0..samples {
        let x = sample_point(&mut rng, n, d, 3.0);
        let y = sample_point(&mut rng, n, d, 3.0);
        let lhs = d.evaluate(&(&x + &y));
        let rhs = implied_concavity_rhs(d.evaluate(&x), d.evaluate(&y), r);
        let violation = (rhs - lhs) / rhs.max(1.0);
        if violation > report.worst {
            report.worst = violation;
            report.witness = Some(x.iter().chain(y.iter()).copied().collect());
        }
    }
    report.passed = report.worst <= CONCAVITY_TOL;
    Ok(report)
}

/// (a^{1/r} + b^{1/r})^r
pub fn implied_concavity_rhs(a: f64, b: f64, r: f64) -> f64 {
    (a.powf(1.0 / r) + b.powf(1.0 / r)).powf(r)
}

/// Checks g(x) = g(-x) on samples; returns the worst relative mismatch.
pub fn check_evenness(d: &WeightedDensity, n: usize, samples: usize, seed: u64) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport::skipped("evenness", HOMOGENEITY_TOL);
    report.samples = samples;
    for _ in 0..samples {
        let x = Vector::from_fn(n, |_, _| 3.0 * rng.sample::<f64, _>(StandardNormal));
        let (a, b) = (d.evaluate(&x), d.evaluate(&-&x));
        let dev = (a - b).abs() / a.abs().max(b.abs()).max(TINY);
        if dev > report.worst {
            report.worst = dev;
            report.witness = Some(x.iter().copied().collect());
        }
    }
    report.passed = report.worst <= HOMOGENEITY_TOL;
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{unit, vector};

    fn custom(name: &str, f: fn(&[f64]) -> f64, r: f64, p: f64) -> WeightedDensity {
        WeightedDensity::custom(CustomDensity {
            name: name.into(),
            eval: Arc::new(f),
            homogeneity: Some(r),
            concavity: Some(p),
            half_space_normal: Some(unit(2, 0)),
            even: true,
            support: Support::Everywhere,
            splits: vec![],
        })
    }

    #[test]
    fn evaluate_examples() {
        let x1 = WeightedDensity::x1(2);
        assert_eq!(x1.evaluate(&vector(&[2.0, 5.0])), 2.0);
        assert_eq!(WeightedDensity::lebesgue().evaluate(&vector(&[-3.0, 1e6])), 1.0);
        let pc = WeightedDensity::power_cone(unit(2, 0), 2.0).unwrap();
        assert_eq!(pc.evaluate(&vector(&[3.0, 0.0])), 9.0);
        assert_eq!(pc.evaluate(&vector(&[-3.0, 0.0])), 0.0);
    }

    #[test]
    fn declared_degrees() {
        let x1 = WeightedDensity::x1(3);
        assert_eq!(x1.homogeneity(), Some(1.0));
        assert_eq!(x1.concavity(), Some(1.0));
        let pc = WeightedDensity::power_cone(unit(3, 0), 2.0).unwrap();
        assert_eq!(pc.homogeneity(), Some(2.0));
        assert_eq!(pc.concavity(), Some(0.5));
        assert!(!pc.is_even());
        assert_eq!(WeightedDensity::lebesgue().homogeneity(), Some(0.0));
        assert!(WeightedDensity::gaussian().require_homogeneity().is_err());
    }

    #[test]
    fn homogeneity_checks() {
        let r = check_homogeneity(&WeightedDensity::x1(2), 2, 1000, 7).unwrap();
        assert!(r.passed && r.worst < 1e-14, "{r:?}");
        let r = check_homogeneity(&WeightedDensity::lebesgue(), 2, 1000, 7).unwrap();
        assert_eq!(r.worst, 0.0);
        let bad = custom("|x1|+1", |x| x[0].abs() + 1.0, 1.0, 1.0);
        let r = check_homogeneity(&bad, 2, 1000, 7).unwrap();
        assert!(!r.passed && r.worst > 1e-9);
        assert!(r.ensure().is_err());
        assert!(matches!(check_homogeneity(&WeightedDensity::gaussian(), 2, 10, 7), Err(Error::NonHomogeneousDensity)));
    }

    #[test]
    fn p_concavity_checks() {
        assert!(check_p_concavity(&WeightedDensity::x1(2), 2, 2000, 7).unwrap().passed);
        let pc = WeightedDensity::power_cone(unit(2, 0), 2.0).unwrap();
        assert!(check_p_concavity(&pc, 2, 2000, 7).unwrap().passed);
        let sq = custom("x1^2", |x| x[0] * x[0], 2.0, 1.0);
        let r = check_p_concavity(&sq, 2, 2000, 7).unwrap();
        assert!(!r.passed, "{r:?}");
        assert!(check_p_concavity(&WeightedDensity::lebesgue(), 2, 10, 7).unwrap().passed);
    }

    #[test]
    fn implied_concavity() {
        let r = check_implied_concavity(&WeightedDensity::x1(2), 2, 10_000, 3).unwrap();
        assert!(r.passed, "{r:?}");
        let pc = WeightedDensity::power_cone(unit(3, 0), 3.0).unwrap();
        assert!(check_implied_concavity(&pc, 3, 10_000, 3).unwrap().passed);
        // x = y = e1 under |x_1|: 2 >= (1 + 1)^1 with equality.
        let x1 = WeightedDensity::x1(2);
        let e1 = unit(2, 0);
        let lhs = x1.evaluate(&(&e1 + &e1));
        let rhs = implied_concavity_rhs(x1.evaluate(&e1), x1.evaluate(&e1), 1.0);
        assert_eq!((lhs, rhs), (2.0, 2.0));
    }

    #[test]
    fn evenness() {
        assert!(check_evenness(&WeightedDensity::x1(3), 3, 10_000, 1).passed);
        assert!(check_evenness(&WeightedDensity::gaussian(), 3, 1000, 1).passed);
        let pc = WeightedDensity::power_cone(unit(2, 0), 1.0).unwrap();
        assert!(!check_evenness(&pc, 2, 1000, 1).passed);
    }

    #[test]
    fn profile_q() {
        for n in 2..=4 {
            for r in [0.0, 0.5, 1.0, 2.0, 3.0] {
                let prof = ConcavityProfile::new(n, r);
                assert!((prof.q * (n as f64 + r) - 1.0).abs() < 1e-14);
                assert!(prof.q > 0.0 && prof.q <= 1.0 / n as f64);
            }
        }
    }
}

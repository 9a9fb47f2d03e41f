//! Weighted surface area measures of polytopes as atomic measures on the
//! sphere.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::body::SymmetricPolytope;
use crate::density::WeightedDensity;
use crate::error::{Error, Result};
use crate::integrate::face_measures;
use crate::linalg::Vector;

#[derive(Debug, Clone, Serialize)]
pub struct Atom {
    pub direction: Vec<f64>,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub body: String,
    pub density: String,
    pub scale: f64,
}

/// sum_i w_i delta_{u_i}. Zero-weight atoms are kept so that atom i always
/// corresponds to constraint i of the body.
#[derive(Debug, Clone, Serialize)]
pub struct SphericalAtomicMeasure {
    pub atoms: Vec<Atom>,
    pub provenance: Provenance,
}

impl SphericalAtomicMeasure {
    pub fn weights(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.weight).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// int f d sigma.
    pub fn integrate(&self, f: impl Fn(&Vector) -> f64) -> f64 {
        self.atoms.iter().map(|a| a.weight * f(&Vector::from_column_slice(&a.direction))).sum()
    }

    /// sum_i w_i u_i.
    pub fn barycenter(&self) -> Vector {
        let n = self.atoms.first().map(|a| a.direction.len()).unwrap_or(0);
        self.atoms.iter().fold(Vector::zeros(n), |acc, a| acc + Vector::from_column_slice(&a.direction) * a.weight)
    }

    pub fn to_csv(&self) -> String {
        let n = self.atoms.first().map(|a| a.direction.len()).unwrap_or(0);
        let mut out: String = (1..=n).map(|i| format!("u{i},")).collect();
        out.push_str("weight\n");
        for a in &self.atoms {
            for x in &a.direction {
                out.push_str(&format!("{x},"));
            }
            out.push_str(&format!("{}\n", a.weight));
        }
        out
    }
}

fn body_label(p: &SymmetricPolytope) -> String {
    format!("polytope(n={}, N={})", p.dim(), p.len())
}

/// sigma_{mu,P}: one atom per facet normal, weighted by the face measure.
pub fn sigma(p: &SymmetricPolytope, d: &WeightedDensity) -> Result<SphericalAtomicMeasure> {
    let w = face_measures(p, d)?;
    Ok(build(p, d, w, 1.0))
}

fn build(p: &SymmetricPolytope, d: &WeightedDensity, weights: Vec<f64>, scale: f64) -> SphericalAtomicMeasure {
    let atoms = p
        .normals()
        .iter()
        .zip(weights)
        .map(|(u, weight)| Atom { direction: u.iter().copied().collect(), weight })
        .collect();
    SphericalAtomicMeasure { atoms, provenance: Provenance { body: body_label(p), density: d.label(), scale } }
}

/// sigma_{mu,tP} from sigma_{mu,P} by the scaling law w -> t^{n+r-1} w.
pub fn sigma_scaled(p: &SymmetricPolytope, d: &WeightedDensity, t: f64) -> Result<SphericalAtomicMeasure> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("scale must be positive, got {t}")));
    }
    let r = d.require_homogeneity()?;
    let factor = t.powf(p.dim() as f64 + r - 1.0);
    let w = face_measures(p, d)?.into_iter().map(|w| w * factor).collect();
    Ok(build(p, d, w, t))
}

/// sum_i |<theta, u_i>| w_i.
pub fn cosine_transform(sigma: &SphericalAtomicMeasure, theta: &Vector) -> f64 {
    sigma
        .atoms
        .iter()
        .map(|a| a.direction.iter().zip(theta.iter()).map(|(x, y)| x * y).sum::<f64>().abs() * a.weight)
        .sum()
}

pub const CONTINUITY_EPSILONS: [f64; 4] = [0.04, 0.02, 0.01, 0.005];
pub const CONTINUITY_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Serialize)]
pub struct ContinuityReport {
    pub epsilons: Vec<f64>,
    pub gaps: Vec<f64>,
    pub monotone: bool,
    pub final_gap: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// |int a d sigma_{mu,P} - int a d sigma_{mu,P_eps}| where P_eps has offsets
/// alpha_i + eps * xi_i, with xi_i uniform in [-1, 1] drawn once per
/// antipodal pair from `seed`.
pub fn perturbation_gap(
    p: &SymmetricPolytope,
    d: &WeightedDensity,
    eps: f64,
    a: &dyn Fn(&Vector) -> f64,
    seed: u64,
) -> Result<f64> {
    let min_offset = p.half_offsets().iter().cloned().fold(f64::INFINITY, f64::min);
    if !(eps >= 0.0 && eps <= 0.05 * min_offset + 1e-15) {
        return Err(Error::InvalidArgument(format!(
            "perturbation {eps} exceeds 0.05 * min offset = {}",
            0.05 * min_offset
        )));
    }
    let base = sigma(p, d)?.integrate(a);
    let noise = pair_noise(p.half_offsets().len(), seed);
    let offsets: Vec<f64> = p.half_offsets().iter().zip(&noise).map(|(o, xi)| o + eps * xi).collect();
    let pe = p.with_half_offsets(&offsets)?;
    Ok((sigma(&pe, d)?.integrate(a) - base).abs())
}

fn pair_noise(k: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

/// Gaps over a decreasing grid of perturbation sizes. Passes when the gaps
/// never increase and the last one is below `CONTINUITY_TOL`. The grid is
/// rescaled by the smallest offset when that is below one, to respect the
/// perturbation bound.
pub fn perturbation_continuity_check(
    p: &SymmetricPolytope,
    d: &WeightedDensity,
    a: &dyn Fn(&Vector) -> f64,
    seed: u64,
) -> Result<ContinuityReport> {
    let min_offset = p.half_offsets().iter().cloned().fold(f64::INFINITY, f64::min);
    let scale = min_offset.min(1.0);
    let epsilons: Vec<f64> = CONTINUITY_EPSILONS.iter().map(|e| e * scale).collect();
    let gaps = epsilons.iter().map(|&e| perturbation_gap(p, d, e, a, seed)).collect::<Result<Vec<f64>>>()?;
    let monotone = gaps.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-15);
    let final_gap = *gaps.last().unwrap();
    Ok(ContinuityReport {
        epsilons,
        monotone,
        final_gap,
        tolerance: CONTINUITY_TOL,
        passed: monotone && final_gap < CONTINUITY_TOL,
        gaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::{dia2, sq2};
    use crate::linalg::vector;
    use approx::assert_abs_diff_eq;

    fn weight_at(s: &SphericalAtomicMeasure, u: &[f64]) -> f64 {
        s.atoms
            .iter()
            .find(|a| a.direction.iter().zip(u).all(|(x, y)| (x - y).abs() < 1e-12))
            .map(|a| a.weight)
            .unwrap()
    }

    #[test]
    fn sigma_examples() {
        let s = sigma(&sq2(), &WeightedDensity::x1(2)).unwrap();
        for (u, w) in [([1.0, 0.0], 2.0), ([-1.0, 0.0], 2.0), ([0.0, 1.0], 1.0), ([0.0, -1.0], 1.0)] {
            assert_abs_diff_eq!(weight_at(&s, &u), w, epsilon = 1e-12);
        }
        let s = sigma(&sq2(), &WeightedDensity::lebesgue()).unwrap();
        assert!(s.atoms.iter().all(|a| (a.weight - 2.0).abs() < 1e-12));
        let s = sigma(&dia2(), &WeightedDensity::lebesgue()).unwrap();
        let h = 0.5f64.sqrt();
        for u in [[h, h], [h, -h], [-h, h], [-h, -h]] {
            assert_abs_diff_eq!(weight_at(&s, &u), 2f64.sqrt(), epsilon = 1e-12);
        }
    }

    #[test]
    fn scaled_examples() {
        let x1 = WeightedDensity::x1(2);
        let s = sigma_scaled(&sq2(), &x1, 2.0).unwrap();
        let direct = sigma(&sq2().scale(2.0), &x1).unwrap();
        assert_abs_diff_eq!(weight_at(&s, &[1.0, 0.0]), 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(weight_at(&s, &[0.0, 1.0]), 4.0, epsilon = 1e-12);
        for (a, b) in s.atoms.iter().zip(&direct.atoms) {
            assert_abs_diff_eq!(a.weight, b.weight, epsilon = 1e-12);
        }
        let leb = WeightedDensity::lebesgue();
        let s = sigma_scaled(&dia2(), &leb, 3.0).unwrap();
        assert_abs_diff_eq!(s.atoms[0].weight, 3.0 * 2f64.sqrt(), epsilon = 1e-12);
        let one = sigma_scaled(&dia2(), &x1, 1.0).unwrap();
        let plain = sigma(&dia2(), &x1).unwrap();
        assert_eq!(one.weights(), plain.weights());
        assert_eq!(sigma_scaled(&sq2(), &WeightedDensity::gaussian(), 2.0).unwrap_err(), Error::NonHomogeneousDensity);
    }

    #[test]
    fn cosine_examples() {
        let s = sigma(&sq2(), &WeightedDensity::x1(2)).unwrap();
        assert_abs_diff_eq!(cosine_transform(&s, &vector(&[1.0, 0.0])), 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cosine_transform(&s, &vector(&[0.0, 1.0])), 2.0, epsilon = 1e-12);
        let s = sigma(&sq2(), &WeightedDensity::lebesgue()).unwrap();
        // Half the cosine transform is the projection length, 2.
        assert_abs_diff_eq!(0.5 * cosine_transform(&s, &vector(&[1.0, 0.0])), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn continuity_examples() {
        // The gap is first order in eps: halving eps halves it.
        let one = |_: &Vector| 1.0;
        let r = perturbation_continuity_check(&sq2(), &WeightedDensity::lebesgue(), &one, 3).unwrap();
        assert!(r.monotone, "{r:?}");
        assert_abs_diff_eq!(r.gaps[3] * 8.0, r.gaps[0], epsilon = 1e-12);
        let abs_u1 = |u: &Vector| u[0].abs();
        let r = perturbation_continuity_check(&sq2(), &WeightedDensity::x1(2), &abs_u1, 3).unwrap();
        assert!(r.monotone, "{r:?}");
        assert!(r.gaps[3] < 0.2 * r.gaps[0]);
        let g = perturbation_gap(&sq2(), &WeightedDensity::x1(2), 0.0, &abs_u1, 3).unwrap();
        assert_eq!(g, 0.0);
        assert!(perturbation_gap(&sq2(), &WeightedDensity::x1(2), 0.2, &abs_u1, 3).is_err());
    }

    #[test]
    fn continuity_matches_closed_form() {
        // Square [-a, a] x [-b, b] under |x_1|: the e1 face has weight 2 a b, the
        // e2 face a^2. With a(u) = |u_1| only the e1 pair contributes: 4 a b.
        let x1 = WeightedDensity::x1(2);
        let abs_u1 = |u: &Vector| u[0].abs();
        let noise = pair_noise(2, 5);
        let eps = 0.02;
        let (a, b) = (1.0 + eps * noise[0], 1.0 + eps * noise[1]);
        let gap = perturbation_gap(&sq2(), &x1, eps, &abs_u1, 5).unwrap();
        assert_abs_diff_eq!(gap, (4.0 * a * b - 4.0).abs(), epsilon = 1e-12);
    }

    #[test]
    fn csv_layout() {
        let s = sigma(&sq2(), &WeightedDensity::lebesgue()).unwrap();
        let csv = s.to_csv();
        assert!(csv.starts_with("u1,u2,weight\n"));
        assert_eq!(csv.lines().count(), 5);
    }
}

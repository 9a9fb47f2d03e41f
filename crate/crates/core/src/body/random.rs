//! Seeded generators of random symmetric polytopes and zonotopes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::linalg::Vector;

use super::{SymmetricPolytope, Zonotope};

pub fn random_direction(rng: &mut impl Rng, n: usize) -> Vector {
    loop {
        let v = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm > 1e-6 {
            return v / norm;
        }
    }
}

/// Random symmetric polytope with `pairs` antipodal pairs of halfspaces,
/// offsets uniform in [0.5, 1.5]. Redundant halfspaces are removed, so the
/// result may have fewer pairs than requested.
pub fn random_symmetric_polytope(n: usize, pairs: usize, seed: u64) -> Result<SymmetricPolytope> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_symmetric_polytope_with(&mut rng, n, pairs)
}

pub fn random_symmetric_polytope_with(rng: &mut impl Rng, n: usize, pairs: usize) -> Result<SymmetricPolytope> {
    let pairs = pairs.max(n);
    loop {
        let normals: Vec<Vector> = (0..pairs).map(|_| random_direction(rng, n)).collect();
        let offsets: Vec<f64> = (0..pairs).map(|_| rng.random_range(0.5..1.5)).collect();
        match SymmetricPolytope::from_half(&normals, &offsets) {
            Ok(p) => return p.prune_redundant(),
            Err(crate::Error::UnboundedBody) | Err(crate::Error::DegenerateInput(_)) => continue,
            Err(e) => return Err(e),
        }
    }
}

/// Random zonotope with `m` Gaussian generators scaled to length in [0.3, 1].
pub fn random_zonotope(n: usize, m: usize, seed: u64) -> Zonotope {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_zonotope_with(&mut rng, n, m)
}

pub fn random_zonotope_with(rng: &mut impl Rng, n: usize, m: usize) -> Zonotope {
    let m = m.max(n);
    let generators = (0..m).map(|_| random_direction(rng, n) * rng.random_range(0.3..1.0)).collect();
    Zonotope::new(generators)
}

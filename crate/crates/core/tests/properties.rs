use proptest::prelude::*;

use wmink::body::random::{random_symmetric_polytope, random_zonotope};
use wmink::body::{is_zonotope, minkowski_sum, SymmetricPolytope};
use wmink::density::{ConcavityProfile, WeightedDensity};
use wmink::directions::sphere_sample;
use wmink::integrate::{body_measure_cone, m_q};
use wmink::linalg::{unit, Vector};
use wmink::minkowski::{solve, MinkowskiProblem, SolverOptions};
use wmink::mixed::mixed_measure;
use wmink::projection::P_mu;
use wmink::shephard::dominance;
use wmink::surface::{sigma, sigma_scaled};

fn config() -> ProptestConfig {
    ProptestConfig { cases: 48, ..ProptestConfig::default() }
}

fn body(n: usize, pairs: usize, seed: u64) -> SymmetricPolytope {
    random_symmetric_polytope(n, pairs, seed).unwrap()
}

fn density(x1: bool, n: usize) -> WeightedDensity {
    if x1 {
        WeightedDensity::x1(n)
    } else {
        WeightedDensity::lebesgue()
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Area of a convex polygon given by unordered points, via the monotone chain.
fn hull_area(mut pts: Vec<[f64; 2]>) -> f64 {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut hull: Vec<[f64; 2]> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    let k = hull.len();
    (0..k).map(|i| hull[i][0] * hull[(i + 1) % k][1] - hull[(i + 1) % k][0] * hull[i][1]).sum::<f64>().abs() / 2.0
}

/// (n-1)-volume of the projection of `p` onto theta^perp, from its vertices.
fn shadow(p: &SymmetricPolytope, theta: &Vector) -> f64 {
    let n = p.dim();
    // Orthonormal basis of theta^perp by Gram-Schmidt on the coordinate axes.
    let mut basis: Vec<Vector> = Vec::new();
    for i in 0..n {
        let mut e = unit(n, i);
        e -= theta * theta.dot(&e);
        for b in &basis {
            e -= b * b.dot(&e);
        }
        if e.norm() > 1e-6 {
            basis.push(e.normalize());
        }
        if basis.len() == n - 1 {
            break;
        }
    }
    let coords: Vec<Vec<f64>> = p.vertices().iter().map(|v| basis.iter().map(|b| b.dot(v)).collect()).collect();
    if n == 2 {
        let xs = coords.iter().map(|c| c[0]);
        xs.clone().fold(f64::NEG_INFINITY, f64::max) - xs.fold(f64::INFINITY, f64::min)
    } else {
        hull_area(coords.iter().map(|c| [c[0], c[1]]).collect())
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn density_homogeneity(x in prop::collection::vec(-3.0..3.0f64, 3), a in 0.1..10.0f64, inv_p in 0.5..4.0f64) {
        let x = Vector::from_vec(x);
        let ds = [
            WeightedDensity::lebesgue(),
            WeightedDensity::x1(3),
            WeightedDensity::power_cone(unit(3, 0), inv_p).unwrap(),
        ];
        for d in ds {
            let r = d.homogeneity().unwrap();
            let lhs = d.evaluate(&(&x * a));
            let rhs = a.powf(r) * d.evaluate(&x);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1e-12), "{} {lhs} {rhs}", d.label());
            let q = ConcavityProfile::for_density(3, &d).unwrap();
            prop_assert!((q.q * (3.0 + r) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn even_densities(x in prop::collection::vec(-3.0..3.0f64, 2)) {
        let x = Vector::from_vec(x);
        for d in [WeightedDensity::x1(2), WeightedDensity::gaussian(), WeightedDensity::lebesgue()] {
            prop_assert_eq!(d.evaluate(&x), d.evaluate(&-&x));
        }
    }

    #[test]
    fn support_function_recovers_offsets(n in 2usize..=3, pairs in 3usize..8, seed in any::<u64>(), t in 0.2..3.0f64) {
        let p = body(n, pairs, seed);
        for (face, (u, a)) in p.faces().iter().zip(p.normals().iter().zip(p.offsets())) {
            if !face.is_empty() {
                prop_assert!((p.support_function(u) - a).abs() < 1e-9);
            }
        }
        for x in sphere_sample(n, 16, seed) {
            prop_assert!(rel(p.scale(t).support_function(&x), t * p.support_function(&x)) < 1e-12);
        }
    }

    #[test]
    fn minkowski_sum_adds_support_functions(n in 2usize..=3, seed in any::<u64>()) {
        let p = body(n, n + 2, seed);
        let q = body(n, n + 1, seed ^ 1);
        let s = minkowski_sum(&p, &q).unwrap();
        for x in sphere_sample(n, 200, seed) {
            let want = p.support_function(&x) + q.support_function(&x);
            prop_assert!((s.support_function(&x) - want).abs() < 1e-9);
        }
    }

    #[test]
    fn realized_zonotopes_pass_the_face_test(n in 2usize..=3, m in 2usize..6, seed in any::<u64>()) {
        let z = random_zonotope(n, m, seed).realize().unwrap();
        prop_assert!(is_zonotope(&z).is_zonotope);
    }

    #[test]
    fn cone_measure_scales(n in 2usize..=3, seed in any::<u64>(), x1 in any::<bool>(), t in 0.2..3.0f64) {
        let p = body(n, n + 3, seed);
        let d = density(x1, n);
        let r = d.homogeneity().unwrap();
        let a = body_measure_cone(&p, &d).unwrap();
        let b = body_measure_cone(&p.scale(t), &d).unwrap();
        prop_assert!(rel(b, t.powf(n as f64 + r) * a) < 1e-9);
    }

    #[test]
    fn brunn_minkowski_for_q_concave_measures(n in 2usize..=3, seed in any::<u64>(), x1 in any::<bool>(), lambda in 0.05..0.95f64) {
        let a = body(n, n + 2, seed);
        let b = body(n, n + 2, seed ^ 7);
        let d = density(x1, n);
        let q = 1.0 / (n as f64 + d.homogeneity().unwrap());
        let mix = minkowski_sum(&a.scale(lambda), &b.scale(1.0 - lambda)).unwrap();
        let lhs = body_measure_cone(&mix, &d).unwrap();
        let rhs = m_q(body_measure_cone(&a, &d).unwrap(), body_measure_cone(&b, &d).unwrap(), lambda, q);
        prop_assert!(lhs >= rhs * (1.0 - 1e-9), "{lhs} < {rhs}");
    }

    #[test]
    fn lebesgue_sigma_is_face_volume(n in 2usize..=3, seed in any::<u64>()) {
        let p = body(n, n + 3, seed);
        let s = sigma(&p, &WeightedDensity::lebesgue()).unwrap();
        let vs = p.vertices();
        for (face, atom) in p.faces().iter().zip(&s.atoms) {
            let ids = &face.vertices;
            let want = if face.is_empty() {
                0.0
            } else if n == 2 {
                (&vs[ids[0]] - &vs[ids[1]]).norm()
            } else {
                // Ordered boundary: half the norm of the summed cross products.
                let o = &vs[ids[0]];
                let mut area = Vector::zeros(3);
                for w in ids.windows(2).skip(1) {
                    area += (&vs[w[0]] - o).cross(&(&vs[w[1]] - o));
                }
                area.norm() / 2.0
            };
            prop_assert!((atom.weight - want).abs() < 1e-12 * want.max(1.0), "{} vs {want}", atom.weight);
        }
    }

    #[test]
    fn sigma_is_even_and_centred(n in 2usize..=3, seed in any::<u64>(), x1 in any::<bool>(), t in 0.3..2.0f64) {
        let p = body(n, n + 3, seed);
        let d = density(x1, n);
        let s = sigma(&p, &d).unwrap();
        let h = s.atoms.len() / 2;
        let mut centre = Vector::zeros(n);
        for (i, a) in s.atoms.iter().enumerate() {
            centre += Vector::from_column_slice(&a.direction) * a.weight;
            if i < h {
                prop_assert!((a.weight - s.atoms[h + i].weight).abs() <= 1e-12 * a.weight.max(1.0));
            }
        }
        prop_assert!(centre.amax() < 1e-9);
        let scaled = sigma_scaled(&p, &d, t).unwrap();
        let direct = sigma(&p.scale(t), &d).unwrap();
        for (a, b) in scaled.atoms.iter().zip(&direct.atoms) {
            prop_assert!((a.weight - b.weight).abs() < 1e-9 * b.weight.max(1.0));
        }
    }

    #[test]
    fn mixed_measure_homogeneity(n in 2usize..=3, seed in any::<u64>(), x1 in any::<bool>(), s in 0.2..3.0f64) {
        let k = body(n, n + 2, seed);
        let l = body(n, n + 1, seed ^ 3);
        let d = density(x1, n);
        let r = d.homogeneity().unwrap();
        let base = mixed_measure(&k, &l, &d).unwrap();
        prop_assert!(rel(mixed_measure(&k, &l.scale(s), &d).unwrap().value, s * base.value) < 1e-12);
        prop_assert!(rel(mixed_measure(&k.scale(s), &l, &d).unwrap().value, s.powf(n as f64 + r - 1.0) * base.value) < 1e-9);
        let kk = mixed_measure(&k, &k, &d).unwrap();
        prop_assert!(rel(kk.v_mu_1.unwrap(), body_measure_cone(&k, &d).unwrap()) < 1e-9);
        prop_assert!(rel(base.v_mu_1.unwrap(), base.value / (n as f64 + r)) < 1e-14);
    }

    #[test]
    fn projection_scaling_and_evenness(n in 2usize..=3, seed in any::<u64>(), x1 in any::<bool>(), s in 0.3..2.5f64) {
        let k = body(n, n + 3, seed);
        let d = density(x1, n);
        let r = d.homogeneity().unwrap();
        for theta in sphere_sample(n, 8, seed) {
            let p = P_mu(&k, &d, &theta).unwrap();
            prop_assert!(rel(P_mu(&k.scale(s), &d, &theta).unwrap(), s.powf(n as f64 + r - 1.0) * p) < 1e-9);
            prop_assert!(rel(P_mu(&k, &d, &-&theta).unwrap(), p) < 1e-12);
        }
    }

    #[test]
    fn lebesgue_projection_is_shadow_volume(n in 2usize..=3, seed in any::<u64>()) {
        let k = body(n, n + 4, seed);
        let leb = WeightedDensity::lebesgue();
        for theta in sphere_sample(n, 64, seed ^ 5) {
            let p = P_mu(&k, &leb, &theta).unwrap();
            prop_assert!((p - shadow(&k, &theta)).abs() < 1e-9 * p.max(1.0), "{p} vs {}", shadow(&k, &theta));
        }
    }

    #[test]
    fn lebesgue_containment_gives_dominance(n in 2usize..=3, seed in any::<u64>(), shrink in 0.3..1.0f64) {
        let l = body(n, n + 3, seed);
        // A body inside l: fewer constraints from l's own list, then shrunk.
        let k = body(n, n + 2, seed ^ 11);
        let fit = k.vertices().iter().map(|v| {
            l.half_normals().iter().zip(l.half_offsets()).map(|(u, a)| u.dot(v).abs() / a).fold(0.0, f64::max)
        }).fold(0.0, f64::max);
        let k = k.scale(shrink / fit);
        let leb = WeightedDensity::lebesgue();
        let dom = dominance(&k, &l, &leb, 256, seed).unwrap();
        prop_assert!(dom.delta >= -1e-9);
        prop_assert!(body_measure_cone(&k, &leb).unwrap() <= body_measure_cone(&l, &leb).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn solver_scale_covariance(seed in any::<u64>(), x1 in any::<bool>(), s in 0.5..2.0f64) {
        let p = body(2, 4, seed);
        let d = density(x1, 2);
        let r = d.homogeneity().unwrap();
        let pr = MinkowskiProblem::from_polytope(&p, d.clone()).unwrap();
        let opts = SolverOptions::default();
        let a = solve(&pr, &opts).unwrap();
        let f = s.powf(2.0 + r - 1.0);
        let targets: Vec<f64> = pr.half_targets().iter().map(|t| t * f).collect();
        let scaled = MinkowskiProblem::from_half(d, pr.half_normals().to_vec(), targets).unwrap();
        let b = solve(&scaled, &opts).unwrap();
        for (x, y) in a.offsets.iter().zip(&b.offsets) {
            prop_assert!(rel(*y, s * x) < 10.0 * opts.tol);
        }
        prop_assert!(a.max_residual < opts.tol && b.max_residual < opts.tol);
    }
}

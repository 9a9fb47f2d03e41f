//! The acceptance suite: nine end-to-end criteria with pinned sizes and
//! tolerances. Each criterion returns a [`CriterionResult`]; errors raised
//! inside a criterion count as failures and are reported in the detail.

use std::f64::consts::SQRT_2;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::body::random::random_symmetric_polytope;
use crate::body::{cu3, dia2, sq2, SymmetricPolytope};
use crate::density::{check_implied_concavity, WeightedDensity};
use crate::error::Result;
use crate::integrate::{body_measure_cone, body_measure_mc, face_measures};
use crate::linalg::{unit, vector, Vector};
use crate::minkowski::{round_trip, solve, uniqueness_probe, MinkowskiProblem, SolverOptions};
use crate::mixed::{
    f_concave_first_check, first_inequality_check, isoperimetric_check, mixed_measure, mixed_measure_oracle, FConcavity,
};
use crate::projection::{projection_distance, P_mu};
use crate::shephard::{ball_pair_regression, shephard_batch, stability_batch};
use crate::surface::{perturbation_continuity_check, sigma};

pub const FIXTURE_TOL: f64 = 1e-9;
pub const MC_SIGMAS: f64 = 3.0;
pub const MIXED_REL_TOL: f64 = 0.02;
pub const SOLVER_FIXTURE_TOL: f64 = 1e-6;
pub const ROUND_TRIP_RESIDUAL: f64 = 1e-5;
pub const UNIQUENESS_TOL: f64 = 1e-5;
pub const DILATE_EQUALITY_TOL: f64 = 1e-8;
pub const SELF_DISTANCE_TOL: f64 = 1e-9;
pub const IMPLIED_CONCAVITY_SAMPLES: usize = 10_000;
pub const DISTANCE_DIRECTIONS: usize = 512;
pub const DOMINANCE_DIRECTIONS: usize = 1024;

/// Sizes for one run. `full()` is the pinned acceptance configuration;
/// `quick()` shrinks sample counts and batch sizes for smoke runs.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub quick: bool,
    pub mc_samples: usize,
    pub random_bodies: usize,
    pub mixed_pairs: usize,
    pub round_trips: usize,
    pub inequality_pairs: usize,
    pub gaussian_pairs: usize,
    pub gaussian_samples: usize,
    pub shephard_trials: usize,
    pub stability_trials: usize,
}

impl SuiteConfig {
    pub fn full(seed: u64) -> Self {
        Self {
            seed,
            quick: false,
            mc_samples: 1_000_000,
            random_bodies: 50,
            mixed_pairs: 30,
            round_trips: 25,
            inequality_pairs: 200,
            gaussian_pairs: 50,
            gaussian_samples: 1_000_000,
            shephard_trials: 100,
            stability_trials: 30,
        }
    }

    pub fn quick(seed: u64) -> Self {
        Self {
            seed,
            quick: true,
            mc_samples: 100_000,
            random_bodies: 8,
            mixed_pairs: 6,
            round_trips: 6,
            inequality_pairs: 30,
            gaussian_pairs: 6,
            gaussian_samples: 200_000,
            shephard_trials: 20,
            stability_trials: 10,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_s: f64,
    /// Wall-clock budget in seconds, if the criterion has one. Only enforced
    /// for full runs.
    pub budget_s: Option<f64>,
}

pub const CRITERIA: [(u8, &str, Option<f64>); 9] = [
    (1, "fixture exactness", Some(1.0)),
    (2, "oracle agreement", Some(120.0)),
    (3, "minkowski solver", Some(180.0)),
    (4, "inequality sweeps", Some(300.0)),
    (5, "shephard harness", None),
    (6, "stability", None),
    (7, "disk-density regression", None),
    (8, "concavity and continuity", None),
    (9, "projection distance", None),
];

/// Outcome of the checks inside a criterion: pass flag and a one-line summary.
type Outcome = Result<(bool, String)>;

pub fn run_criterion(id: u8, cfg: &SuiteConfig) -> Option<CriterionResult> {
    let &(_, name, budget_s) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let outcome = match id {
        1 => fixture_exactness(),
        2 => oracle_agreement(cfg),
        3 => minkowski_solver(cfg),
        4 => inequality_sweeps(cfg),
        5 => shephard_harness(cfg),
        6 => stability(cfg),
        7 => disk_regression(cfg),
        8 => concavity_and_continuity(cfg),
        9 => distance_smoke(cfg),
        _ => unreachable!(),
    };
    let elapsed_s = start.elapsed().as_secs_f64();
    let (mut passed, mut detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    if let Some(b) = budget_s {
        if !cfg.quick && elapsed_s >= b {
            passed = false;
            detail.push_str(&format!("; over budget ({elapsed_s:.1}s >= {b}s)"));
        }
    }
    Some(CriterionResult { id, name, passed, detail, elapsed_s, budget_s })
}

/// All criteria in id order.
pub fn run_all(cfg: &SuiteConfig) -> Vec<CriterionResult> {
    CRITERIA.iter().filter_map(|c| run_criterion(c.0, cfg)).collect()
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {} ({}): {} [{:.2}s]",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed_s
        )
    }
}

fn fixtures() -> [(&'static str, SymmetricPolytope); 3] {
    [("SQ2", sq2()), ("CU3", cu3()), ("DIA2", dia2())]
}

fn densities(n: usize) -> [(&'static str, WeightedDensity); 2] {
    [("LEB", WeightedDensity::lebesgue()), ("X1", WeightedDensity::x1(n))]
}

/// Hand-computed values for a fixture body and density.
struct Closed {
    /// Face measure as a function of the outer normal.
    face: fn(&Vector) -> f64,
    measure: f64,
    /// (direction, P_{mu,K}).
    projections: Vec<(Vector, f64)>,
}

fn closed_form(body: &str, density: &str) -> Closed {
    let h = SQRT_2 / 2.0;
    let s3 = 3f64.sqrt();
    let diag3 = vector(&[1.0 / s3, 1.0 / s3, 1.0 / s3]);
    let diag2 = vector(&[h, h]);
    match (body, density) {
        ("SQ2", "LEB") => {
            Closed { face: |_| 2.0, measure: 4.0, projections: vec![(unit(2, 0), 2.0), (diag2, 2.0 * SQRT_2)] }
        }
        ("SQ2", "X1") => Closed {
            face: |u| if u[0].abs() > 0.5 { 2.0 } else { 1.0 },
            measure: 2.0,
            projections: vec![(unit(2, 0), 4.0 / 3.0), (unit(2, 1), 2.0 / 3.0), (diag2, SQRT_2)],
        },
        ("CU3", "LEB") => {
            Closed { face: |_| 4.0, measure: 8.0, projections: vec![(unit(3, 0), 4.0), (diag3, 4.0 * s3)] }
        }
        ("CU3", "X1") => Closed {
            face: |u| if u[0].abs() > 0.5 { 4.0 } else { 2.0 },
            measure: 4.0,
            projections: vec![(unit(3, 0), 3.0), (unit(3, 1), 1.5), (diag3, 2.0 * s3)],
        },
        ("DIA2", "LEB") => {
            Closed { face: |_| SQRT_2, measure: 2.0, projections: vec![(unit(2, 0), 2.0), (diag2, SQRT_2)] }
        }
        ("DIA2", "X1") => Closed {
            face: |_| SQRT_2 / 2.0,
            measure: 2.0 / 3.0,
            projections: vec![(unit(2, 0), 2.0 / 3.0), (unit(2, 1), 2.0 / 3.0), (diag2, SQRT_2 / 3.0)],
        },
        _ => unreachable!(),
    }
}

/// Largest deviation from the closed forms, with the worst label.
#[derive(Default)]
struct Worst {
    dev: f64,
    label: String,
    count: usize,
}

impl Worst {
    fn record(&mut self, label: impl FnOnce() -> String, got: f64, want: f64) {
        self.count += 1;
        let dev = (got - want).abs();
        if dev > self.dev || dev.is_nan() {
            self.dev = if dev.is_nan() { f64::INFINITY } else { dev };
            self.label = label();
        }
    }
}

fn fixture_exactness() -> Outcome {
    let mut w = Worst::default();
    for (bname, p) in fixtures() {
        for (dname, d) in densities(p.dim()) {
            let c = closed_form(bname, dname);
            let faces = face_measures(&p, &d)?;
            for (u, f) in p.normals().iter().zip(&faces) {
                w.record(|| format!("{bname}/{dname} face {:?}", u.as_slice()), *f, (c.face)(u));
            }
            for atom in sigma(&p, &d)?.atoms {
                let u = vector(&atom.direction);
                w.record(|| format!("{bname}/{dname} sigma atom"), atom.weight, (c.face)(&u));
            }
            w.record(|| format!("{bname}/{dname} cone measure"), body_measure_cone(&p, &d)?, c.measure);
            for (theta, want) in &c.projections {
                w.record(|| format!("{bname}/{dname} P at {:?}", theta.as_slice()), P_mu(&p, &d, theta)?, *want);
            }
        }
    }
    // mu_1(K, K) = mu(K) / q and a few cross pairs.
    let mixed_cases: [(&str, SymmetricPolytope, SymmetricPolytope, bool, f64); 12] = [
        ("SQ2,SQ2,LEB", sq2(), sq2(), false, 8.0),
        ("SQ2,SQ2,X1", sq2(), sq2(), true, 6.0),
        ("CU3,CU3,LEB", cu3(), cu3(), false, 24.0),
        ("CU3,CU3,X1", cu3(), cu3(), true, 16.0),
        ("DIA2,DIA2,LEB", dia2(), dia2(), false, 4.0),
        ("DIA2,DIA2,X1", dia2(), dia2(), true, 2.0),
        ("SQ2,DIA2,LEB", sq2(), dia2(), false, 8.0),
        ("SQ2,DIA2,X1", sq2(), dia2(), true, 6.0),
        ("DIA2,SQ2,LEB", dia2(), sq2(), false, 8.0),
        ("DIA2,SQ2,X1", dia2(), sq2(), true, 4.0),
        ("SQ2,2SQ2,LEB", sq2(), sq2().scale(2.0), false, 16.0),
        ("SQ2,2SQ2,X1", sq2(), sq2().scale(2.0), true, 12.0),
    ];
    for (label, k, l, x1, want) in mixed_cases {
        let d = if x1 { WeightedDensity::x1(k.dim()) } else { WeightedDensity::lebesgue() };
        w.record(|| format!("mixed {label}"), mixed_measure(&k, &l, &d)?.value, want);
    }
    let passed = w.dev <= FIXTURE_TOL;
    Ok((passed, format!("{} values, max deviation {:.2e} at {} (tol {FIXTURE_TOL:e})", w.count, w.dev, w.label)))
}

fn random_body(seed: u64) -> Result<SymmetricPolytope> {
    let n = 2 + (seed % 2) as usize;
    let pairs = n + (seed / 2 % 5) as usize;
    random_symmetric_polytope(n, pairs, seed)
}

fn oracle_agreement(cfg: &SuiteConfig) -> Outcome {
    let mut bodies: Vec<(String, SymmetricPolytope)> =
        fixtures().into_iter().map(|(n, p)| (n.to_string(), p)).collect();
    for i in 0..cfg.random_bodies {
        let s = cfg.seed.wrapping_mul(1_000).wrapping_add(i as u64);
        bodies.push((format!("random#{i}"), random_body(s)?));
    }
    let cases: Vec<(String, SymmetricPolytope, WeightedDensity)> = bodies
        .iter()
        .flat_map(|(name, p)| densities(p.dim()).map(|(dn, d)| (format!("{name}/{dn}"), p.clone(), d)))
        .collect();
    let z: Vec<(String, f64)> = cases
        .par_iter()
        .enumerate()
        .map(|(i, (label, p, d))| {
            let exact = body_measure_cone(p, d)?;
            let mc = body_measure_mc(p, d, cfg.mc_samples, cfg.seed.wrapping_add(7919 * i as u64))?;
            let gap = (mc.estimate - exact).abs();
            // Every sample hits for boxes under Lebesgue measure, so se = 0.
            let z = if mc.se > 0.0 {
                gap / mc.se
            } else if gap <= 1e-12 * exact {
                0.0
            } else {
                f64::INFINITY
            };
            Ok((label.clone(), z))
        })
        .collect::<Result<_>>()?;
    let (worst_label, worst_z) = z.iter().max_by(|a, b| a.1.total_cmp(&b.1)).cloned().unwrap();
    let measure_fail = z.iter().filter(|(_, v)| v.is_nan() || *v > MC_SIGMAS).count();

    let pairs: Vec<(SymmetricPolytope, SymmetricPolytope, WeightedDensity)> = (0..cfg.mixed_pairs)
        .map(|i| {
            let s = cfg.seed.wrapping_mul(2_000).wrapping_add(i as u64);
            let k = random_body(s)?;
            let l = random_symmetric_polytope(k.dim(), k.dim() + 2, s ^ 0x5555)?;
            let d = match i % 3 {
                0 => WeightedDensity::lebesgue(),
                1 => WeightedDensity::x1(k.dim()),
                _ => WeightedDensity::gaussian(),
            };
            Ok((k, l, d))
        })
        .collect::<Result<_>>()?;
    let rel: Vec<(f64, bool)> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, (k, l, d))| {
            let surface = mixed_measure(k, l, d)?.value;
            let fd = mixed_measure_oracle(k, l, d, cfg.mc_samples, cfg.seed.wrapping_add(i as u64))?;
            let gap = (surface - fd.value).abs();
            let tol = (MIXED_REL_TOL * surface.abs()).max(MC_SIGMAS * fd.se);
            Ok((gap / surface.abs(), gap <= tol))
        })
        .collect::<Result<_>>()?;
    let mixed_fail = rel.iter().filter(|r| !r.1).count();
    let worst_rel = rel.iter().map(|r| r.0).fold(0.0, f64::max);
    Ok((
        measure_fail == 0 && mixed_fail == 0,
        format!(
            "{} measures: {measure_fail} outside {MC_SIGMAS} SE (worst {worst_z:.2} SE, {worst_label}); \
             {} mixed pairs: {mixed_fail} outside max(2%, 3 SE) (worst rel {worst_rel:.2e})",
            z.len(),
            rel.len()
        ),
    ))
}

fn axes(n: usize) -> Vec<Vector> {
    (0..n).map(|i| unit(n, i)).collect()
}

fn minkowski_solver(cfg: &SuiteConfig) -> Outcome {
    // (density, dimension, half targets, expected offset)
    let x1_2 = WeightedDensity::x1(2);
    let x1_3 = WeightedDensity::x1(3);
    let leb = WeightedDensity::lebesgue();
    let fixtures: [(&str, &WeightedDensity, usize, Vec<f64>, f64); 5] = [
        ("square X1", &x1_2, 2, vec![2.0, 1.0], 1.0),
        ("square X1 x2", &x1_2, 2, vec![4.0, 2.0], SQRT_2),
        ("square LEB", &leb, 2, vec![2.0, 2.0], 1.0),
        ("cube X1", &x1_3, 3, vec![4.0, 2.0, 2.0], 1.0),
        ("cube LEB", &leb, 3, vec![4.0, 4.0, 4.0], 1.0),
    ];
    let mut fixture_dev: f64 = 0.0;
    for (_, d, n, targets, want) in &fixtures {
        let pr = MinkowskiProblem::from_half((*d).clone(), axes(*n), targets.clone())?;
        let r = solve(&pr, &SolverOptions::default())?;
        let dev = r.offsets.iter().map(|b| (b - want).abs() / want).fold(r.max_residual, f64::max);
        fixture_dev = fixture_dev.max(dev);
    }

    let trips: Vec<Result<f64>> = (0..cfg.round_trips)
        .into_par_iter()
        .map(|i| {
            let s = cfg.seed.wrapping_mul(3_000).wrapping_add(i as u64);
            let n = 2 + i % 2;
            let pairs = n + (s % (9 - n as u64)) as usize;
            let p = random_symmetric_polytope(n, pairs, s)?.prune_redundant()?;
            let d = if i % 4 < 2 { WeightedDensity::lebesgue() } else { WeightedDensity::x1(n) };
            Ok(round_trip(&p, &d, SolverOptions::default().tol)?.solver.max_residual)
        })
        .collect();
    let trip_errors = trips.iter().filter(|t| t.is_err()).count();
    let trip_residual = trips.iter().flatten().cloned().fold(0.0, f64::max);

    let cube = MinkowskiProblem::from_half(x1_3.clone(), axes(3), vec![4.0, 2.0, 2.0])?;
    let probe = uniqueness_probe(&cube, 5, UNIQUENESS_TOL / 10.0, cfg.seed)?;
    let octagon = random_symmetric_polytope(2, 4, cfg.seed)?.prune_redundant()?;
    let probe2 =
        uniqueness_probe(&MinkowskiProblem::from_polytope(&octagon, leb.clone())?, 5, UNIQUENESS_TOL / 10.0, cfg.seed)?;
    let spread = probe.max_distance.max(probe2.max_distance);

    let passed = fixture_dev < SOLVER_FIXTURE_TOL
        && trip_errors == 0
        && trip_residual < ROUND_TRIP_RESIDUAL
        && spread < UNIQUENESS_TOL;
    Ok((
        passed,
        format!(
            "fixtures max rel error {fixture_dev:.2e}; {} round trips, {trip_errors} errors, max residual \
             {trip_residual:.2e}; uniqueness spread {spread:.2e} over 5 starts",
            trips.len()
        ),
    ))
}

/// Thin random bodies can be very long, which puts mixed measures near 1e6
/// where an absolute 1e-8 is below f64 resolution.
fn unit_circumradius(p: SymmetricPolytope) -> SymmetricPolytope {
    p.scale(1.0 / p.circumradius())
}

fn inequality_sweeps(cfg: &SuiteConfig) -> Outcome {
    let mut worst_slack = f64::INFINITY;
    let mut worst_equality: f64 = 0.0;
    let mut count = 0;
    for x1 in [false, true] {
        let rows: Vec<(f64, f64)> = (0..cfg.inequality_pairs)
            .into_par_iter()
            .map(|i| {
                let s = cfg.seed.wrapping_mul(4_000).wrapping_add(i as u64);
                let k = unit_circumradius(random_body(s)?);
                let l = unit_circumradius(random_symmetric_polytope(k.dim(), k.dim() + 1 + i % 4, s ^ 0xabcd)?);
                let d = if x1 { WeightedDensity::x1(k.dim()) } else { WeightedDensity::lebesgue() };
                let r = first_inequality_check(&k, &l, &d)?;
                let dilate = first_inequality_check(&k, &k.scale(0.5 + (i % 7) as f64 * 0.4), &d)?;
                Ok((r.slack.min(r.slack_integrated), dilate.slack.abs().max(dilate.slack_integrated.abs())))
            })
            .collect::<Result<_>>()?;
        count += rows.len();
        worst_slack = rows.iter().map(|r| r.0).fold(worst_slack, f64::min);
        worst_equality = rows.iter().map(|r| r.1).fold(worst_equality, f64::max);
    }

    let gauss = WeightedDensity::gaussian();
    let g: Vec<(bool, bool, bool)> = (0..cfg.gaussian_pairs)
        .into_par_iter()
        .map(|i| {
            let s = cfg.seed.wrapping_mul(5_000).wrapping_add(i as u64);
            let n = 2 + i % 2;
            let k = random_symmetric_polytope(n, n + i % 3, s)?;
            let l = random_symmetric_polytope(n, n + 1, s ^ 0x77)?.scale(0.5 + (i % 5) as f64 * 0.4);
            let log = f_concave_first_check(&k, &l, &gauss, FConcavity::Log, cfg.gaussian_samples, s)?;
            let quantile =
                f_concave_first_check(&k, &l, &gauss, FConcavity::GaussianQuantile, cfg.gaussian_samples, s)?;
            let iso = isoperimetric_check(&k, &l, &gauss, cfg.gaussian_samples, s)?;
            Ok((log.passed, iso.passed, quantile.passed))
        })
        .collect::<Result<_>>()?;
    let fails = |f: fn(&(bool, bool, bool)) -> bool| g.iter().filter(|x| !f(x)).count();
    let (log_fail, iso_fail, q_fail) = (fails(|x| x.0), fails(|x| x.1), fails(|x| x.2));

    let passed = worst_slack >= -1e-9 && worst_equality <= DILATE_EQUALITY_TOL && log_fail + iso_fail + q_fail == 0;
    Ok((
        passed,
        format!(
            "{count} pairs: min slack {worst_slack:.3e}, dilate equality gap {worst_equality:.2e}; \
             {} gaussian pairs: log {log_fail}, isoperimetric {iso_fail}, quantile {q_fail} failures",
            g.len()
        ),
    ))
}

fn shephard_harness(cfg: &SuiteConfig) -> Outcome {
    let mut parts = Vec::new();
    let mut falsifying = 0;
    let mut met = 0;
    for n in [2, 3] {
        for (name, d) in densities(n) {
            let b = shephard_batch(n, &d, cfg.shephard_trials, DOMINANCE_DIRECTIONS, cfg.seed)?;
            falsifying += b.falsifying;
            met += b.hypotheses_met;
            parts.push(format!(
                "{name}/n={n}: {}/{} dominated, {} falsifying",
                b.hypotheses_met,
                b.reports.len(),
                b.falsifying
            ));
        }
    }
    Ok((falsifying == 0 && met > 0, parts.join("; ")))
}

fn stability(cfg: &SuiteConfig) -> Outcome {
    let mut parts = Vec::new();
    let mut failures = 0;
    for n in [2, 3] {
        for (name, d) in densities(n) {
            let b = stability_batch(n, &d, cfg.stability_trials, DOMINANCE_DIRECTIONS, cfg.seed)?;
            failures += b.failures;
            let slack = b.reports.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
            parts.push(format!("{name}/n={n}: {} failures, min slack {slack:.3e}", b.failures));
        }
    }
    Ok((failures == 0, parts.join("; ")))
}

fn disk_regression(cfg: &SuiteConfig) -> Outcome {
    let r = ball_pair_regression(64, 0.5, 2.0, DOMINANCE_DIRECTIONS, cfg.seed)?;
    Ok((
        r.passed,
        format!(
            "delta {:.3e} vs -3 x bound {:.3e}; mu(K) = {:.6} >= mu(L) = {:.6}",
            r.delta, r.discretization_bound, r.mu_k, r.mu_l
        ),
    ))
}

fn concavity_and_continuity(cfg: &SuiteConfig) -> Outcome {
    let mut concavity_worst: f64 = 0.0;
    let mut concavity_ok = true;
    for n in [2, 3] {
        let power = WeightedDensity::power_cone(unit(n, 0), 2.0)?;
        for d in [WeightedDensity::x1(n), power] {
            let rep = check_implied_concavity(&d, n, IMPLIED_CONCAVITY_SAMPLES, cfg.seed)?;
            concavity_worst = concavity_worst.max(rep.worst);
            concavity_ok &= rep.passed;
        }
    }
    let one = |_: &Vector| 1.0;
    let first = |u: &Vector| u[0].abs();
    type TestFn<'a> = &'a dyn Fn(&Vector) -> f64;
    let tests: [(&str, TestFn); 2] = [("a=1", &one), ("a=|u1|", &first)];
    let mut continuity_fail = Vec::new();
    let mut final_gap: f64 = 0.0;
    let mut non_monotone = 0;
    let mut total = 0;
    for (bname, p) in fixtures() {
        for (dname, d) in densities(p.dim()) {
            for (aname, a) in &tests {
                let rep = perturbation_continuity_check(&p, &d, *a, cfg.seed)?;
                total += 1;
                final_gap = final_gap.max(rep.final_gap);
                non_monotone += usize::from(!rep.monotone);
                if !rep.passed {
                    continuity_fail.push(format!("{bname}/{dname}/{aname}"));
                }
            }
        }
    }
    Ok((
        concavity_ok && continuity_fail.is_empty(),
        format!(
            "implied concavity worst {concavity_worst:.2e} ({}); continuity {}/{total} pass, {non_monotone} non-monotone, \
             largest gap at smallest eps {final_gap:.2e}{}",
            if concavity_ok { "pass" } else { "fail" },
            total - continuity_fail.len(),
            if continuity_fail.is_empty() { String::new() } else { format!(", failing {}", continuity_fail.join(" ")) }
        ),
    ))
}

fn distance_smoke(cfg: &SuiteConfig) -> Outcome {
    let x1 = WeightedDensity::x1(2);
    let same = projection_distance(&sq2(), &sq2(), &x1, DISTANCE_DIRECTIONS, cfg.seed)?.max_distance;
    let mut smallest = f64::INFINITY;
    for d in [WeightedDensity::lebesgue(), x1] {
        let r = projection_distance(&sq2(), &dia2(), &d, DISTANCE_DIRECTIONS, cfg.seed)?;
        smallest = smallest.min(r.max_distance);
    }
    Ok((
        same <= SELF_DISTANCE_TOL && smallest > 0.0,
        format!("self distance {same:.2e}; SQ2 vs DIA2 smallest distance {smallest:.4}"),
    ))
}

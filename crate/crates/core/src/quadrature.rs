//! Simplex cubature (Grundmann-Moller), adaptive simplex refinement and
//! one-dimensional adaptive Simpson.

use crate::linalg::{factorial, simplex_volume, Vector};

/// Grundmann-Moller rule on a d-simplex, exact for polynomials of degree
/// 2s + 1. Points are barycentric coordinates.
#[derive(Debug, Clone)]
pub struct SimplexRule {
    pub dim: usize,
    pub degree: usize,
    pub weights: Vec<f64>,
    pub points: Vec<Vec<f64>>,
}

impl SimplexRule {
    /// Smallest rule of degree at least `degree`.
    pub fn grundmann_moller(dim: usize, degree: usize) -> Self {
        let s = degree.saturating_sub(1).div_ceil(2);
        let d = dim as i64;
        let mut weights = Vec::new();
        let mut points = Vec::new();
        for i in 0..=s {
            let denom = (d + 2 * (s - i) as i64 + 1) as f64;
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            // Weight normalized so that the weights sum to one.
            let w = sign * 0.25f64.powi(s as i32) * denom.powi((2 * s + 1) as i32)
                / (factorial(i) * factorial(dim + 2 * s - i + 1))
                * factorial(dim);
            for beta in compositions(s - i, dim + 1) {
                points.push(beta.iter().map(|&b| (2 * b + 1) as f64 / denom).collect());
                weights.push(w);
            }
        }
        Self { dim, degree: 2 * s + 1, weights, points }
    }

    /// Integral of `f` over the simplex with the given vertices.
    pub fn integrate(&self, verts: &[&Vector], f: &impl Fn(&Vector) -> f64) -> f64 {
        let vol = simplex_volume(verts);
        if vol == 0.0 {
            return 0.0;
        }
        vol * self.average(verts, f)
    }

    fn average(&self, verts: &[&Vector], f: &impl Fn(&Vector) -> f64) -> f64 {
        let n = verts[0].len();
        let mut x = Vector::zeros(n);
        let mut acc = 0.0;
        for (w, bary) in self.weights.iter().zip(&self.points) {
            x.fill(0.0);
            for (b, v) in bary.iter().zip(verts) {
                x.axpy(*b, v, 1.0);
            }
            acc += w * f(&x);
        }
        acc
    }
}

/// All vectors of `parts` nonnegative integers summing to `total`.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Adaptive integration over a simplex: a degree-7 rule is compared with a
/// degree-5 rule and the simplex is bisected along its longest edge until the
/// two agree within `tol` (absolute) or `max_depth` is reached.
#[derive(Debug, Clone)]
pub struct AdaptiveSimplex {
    fine: SimplexRule,
    coarse: SimplexRule,
    pub tol: f64,
    pub max_depth: usize,
}

impl AdaptiveSimplex {
    pub fn new(dim: usize, tol: f64, max_depth: usize) -> Self {
        Self {
            fine: SimplexRule::grundmann_moller(dim, 7),
            coarse: SimplexRule::grundmann_moller(dim, 5),
            tol,
            max_depth,
        }
    }

    pub fn integrate(&self, verts: &[&Vector], f: &impl Fn(&Vector) -> f64) -> f64 {
        let owned: Vec<Vector> = verts.iter().map(|v| (*v).clone()).collect();
        let vol = simplex_volume(verts);
        if vol == 0.0 {
            return 0.0;
        }
        self.recurse(owned, vol, f, self.tol, 0)
    }

    fn recurse(&self, verts: Vec<Vector>, vol: f64, f: &impl Fn(&Vector) -> f64, tol: f64, depth: usize) -> f64 {
        let refs: Vec<&Vector> = verts.iter().collect();
        let fine = vol * self.fine.average(&refs, f);
        if depth >= self.max_depth {
            return fine;
        }
        let coarse = vol * self.coarse.average(&refs, f);
        if (fine - coarse).abs() <= tol {
            return fine;
        }
        let (mut a, mut b) = (0, 1);
        let mut longest = 0.0;
        for i in 0..verts.len() {
            for j in i + 1..verts.len() {
                let l = (&verts[i] - &verts[j]).norm_squared();
                if l > longest {
                    longest = l;
                    (a, b) = (i, j);
                }
            }
        }
        let mid = (&verts[a] + &verts[b]) * 0.5;
        let mut left = verts.clone();
        left[b] = mid.clone();
        let mut right = verts;
        right[a] = mid;
        self.recurse(left, vol / 2.0, f, tol / 2.0, depth + 1) + self.recurse(right, vol / 2.0, f, tol / 2.0, depth + 1)
    }
}

/// Adaptive Simpson on [a, b] with absolute tolerance `tol`, using at most
/// `max_panels` panels.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, max_panels: usize) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let max_depth = (max_panels.max(1) as f64).log2().floor() as usize;
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson for a vector-valued integrand; a panel is accepted when
/// every component meets the tolerance.
pub fn adaptive_simpson_vec(f: impl Fn(f64) -> Vec<f64>, a: f64, b: f64, tol: f64, max_panels: usize) -> Vec<f64> {
    let fa = f(a);
    let fm = f(0.5 * (a + b));
    let fb = f(b);
    let whole = simpson_combine(b - a, &fa, &fm, &fb);
    let max_depth = (max_panels.max(1) as f64).log2().floor() as usize;
    simpson_vec_step(&f, a, b, &fa, &fm, &fb, whole, tol, max_depth)
}

fn simpson_combine(h: f64, fa: &[f64], fm: &[f64], fb: &[f64]) -> Vec<f64> {
    fa.iter().zip(fm).zip(fb).map(|((a, m), b)| h / 6.0 * (a + 4.0 * m + b)).collect()
}

#[allow(clippy::too_many_arguments)]
fn simpson_vec_step(
    f: &impl Fn(f64) -> Vec<f64>,
    a: f64,
    b: f64,
    fa: &[f64],
    fm: &[f64],
    fb: &[f64],
    whole: Vec<f64>,
    tol: f64,
    depth: usize,
) -> Vec<f64> {
    let m = 0.5 * (a + b);
    let flm = f(0.5 * (a + m));
    let frm = f(0.5 * (m + b));
    let left = simpson_combine(m - a, fa, &flm, fm);
    let right = simpson_combine(b - m, fm, &frm, fb);
    let err = left.iter().zip(&right).zip(&whole).map(|((l, r), w)| (l + r - w).abs()).fold(0.0, f64::max);
    if depth == 0 || err <= 15.0 * tol {
        return left.iter().zip(&right).zip(&whole).map(|((l, r), w)| l + r + (l + r - w) / 15.0).collect();
    }
    let mut out = simpson_vec_step(f, a, m, fa, &flm, fm, left, tol / 2.0, depth - 1);
    let rhs = simpson_vec_step(f, m, b, fm, &frm, fb, right, tol / 2.0, depth - 1);
    out.iter_mut().zip(rhs).for_each(|(x, y)| *x += y);
    out
}

/// Adaptive Gauss-Legendre on [a, b]: 10- and 20-point rules are compared on
/// each panel and panels are halved until they agree within `tol` (absolute,
/// shared across panels) or `max_depth` halvings.
pub fn adaptive_gauss(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, max_depth: usize) -> f64 {
    let lo = gauss_legendre(10);
    let hi = gauss_legendre(20);
    gauss_step(&f, a, b, tol, max_depth, &lo, &hi)
}

fn gauss_panel(f: &impl Fn(f64) -> f64, a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    rule.0.iter().zip(&rule.1).map(|(x, w)| w * f(c + h * x)).sum::<f64>() * h
}

fn gauss_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    depth: usize,
    lo: &(Vec<f64>, Vec<f64>),
    hi: &(Vec<f64>, Vec<f64>),
) -> f64 {
    let fine = gauss_panel(f, a, b, hi);
    if depth == 0 || (fine - gauss_panel(f, a, b, lo)).abs() <= tol {
        return fine;
    }
    let m = 0.5 * (a + b);
    gauss_step(f, a, m, tol / 2.0, depth - 1, lo, hi) + gauss_step(f, m, b, tol / 2.0, depth - 1, lo, hi)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; k];
    let mut weights = vec![0.0; k];
    for i in 0..k.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=k {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let pk = if k == 0 {
                1.0
            } else if k == 1 {
                x
            } else {
                p1
            };
            let pk1 = if k == 1 { 1.0 } else { p0 };
            dp = k as f64 * (x * pk - pk1) / (x * x - 1.0);
            let dx = pk / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[k - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[k - 1 - i] = w;
    }
    (nodes, weights)
}

//! Independent oracles shared by the integration tests.
//!
//! Nothing here calls the library's elevation, generator, spectral or
//! simulation code: rates, temperatures and elevations are recomputed from
//! the raw instance data.
#![allow(dead_code)]

use anneal::{Landscape, Schedule, Variant};
use nalgebra::{DMatrix, RowDVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy)]
pub enum Shape {
    Line,
    Tree,
    Sparse,
}

/// Random reversible instance on `n` states. `Q(x,y) = w(x,y) / pi(x)` for a
/// symmetric conductance `w`, so detailed balance holds by construction.
/// With `distinct`, `U` is a shuffled set of distinct integers; otherwise
/// values are drawn from `0..=3` with repeats.
pub fn random_landscape(seed: u64, n: usize, shape: Shape, distinct: bool, uniform_pi: bool) -> Landscape {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize)> = Vec::new();
    match shape {
        Shape::Line => edges.extend((1..n).map(|i| (i - 1, i))),
        Shape::Tree => edges.extend((1..n).map(|i| (rng.random_range(0..i), i))),
        Shape::Sparse => {
            edges.extend((1..n).map(|i| (rng.random_range(0..i), i)));
            for _ in 0..n {
                let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
                if a != b && !edges.contains(&(a.min(b), a.max(b))) {
                    edges.push((a.min(b), a.max(b)));
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let u: Vec<f64> = if distinct {
        let mut values: Vec<f64> = (0..n).map(|i| (i * 2 + rng.random_range(0..2)) as f64).collect();
        values.shuffle(&mut rng);
        values
    } else {
        (0..n).map(|_| rng.random_range(0..=3) as f64).collect()
    };
    let pi: Vec<f64> = if uniform_pi {
        vec![1.0 / n as f64; n]
    } else {
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
        let total: f64 = w.iter().sum();
        w.into_iter().map(|v| v / total).collect()
    };
    let mut rates = Vec::new();
    for &(a, b) in &edges {
        let w = rng.random_range(0.2..1.0) / n as f64;
        rates.push((a, b, w / pi[a]));
        rates.push((b, a, w / pi[b]));
    }
    let names = (0..n).map(|i| format!("s{i}")).collect();
    Landscape::new(names, u, &rates, Some(pi)).expect("generated instance is valid")
}

pub fn shape_for(i: usize) -> Shape {
    [Shape::Line, Shape::Tree, Shape::Sparse][i % 3]
}

/// `H1` and `H2` for all pairs by enumerating simple paths.
pub fn enumerate_elevations(l: &Landscape) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = l.len();
    let u = l.u();
    let mut h1 = vec![vec![f64::INFINITY; n]; n];
    let mut h2 = vec![vec![f64::INFINITY; n]; n];
    fn walk(
        l: &Landscape,
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        elev: (f64, f64),
        h1: &mut [Vec<f64>],
        h2: &mut [Vec<f64>],
    ) {
        let (start, last) = (path[0], *path.last().unwrap());
        let u = l.u();
        h1[start][last] = h1[start][last].min(elev.0);
        if path.len() > 1 {
            h2[start][last] = h2[start][last].min(elev.1);
        }
        for &(next, q) in l.neighbors(last) {
            if q <= 0.0 || on_path[next] {
                continue;
            }
            on_path[next] = true;
            path.push(next);
            let step = (elev.0.max(u[next]), elev.1.max(u[last].min(u[next])));
            walk(l, path, on_path, step, h1, h2);
            path.pop();
            on_path[next] = false;
        }
    }
    for x in 0..n {
        let mut on_path = vec![false; n];
        on_path[x] = true;
        walk(l, &mut vec![x], &mut on_path, (u[x], f64::NEG_INFINITY), &mut h1, &mut h2);
        h2[x][x] = u[x];
    }
    (h1, h2)
}

/// `max_{x != y} H(x,y) - U(x) - U(y)` from an elevation table.
pub fn constant_from(h: &[Vec<f64>], u: &[f64]) -> f64 {
    let n = u.len();
    let mut best = f64::NEG_INFINITY;
    for x in 0..n {
        for y in 0..n {
            if x != y {
                best = best.max(h[x][y] - u[x] - u[y]);
            }
        }
    }
    best
}

/// Temperature formulas written out independently of the library.
pub fn oracle_temperature(schedule: &Schedule, t: f64) -> f64 {
    let floor = |t: f64| t.max(1e-6);
    match *schedule {
        Schedule::Log { c } => c / (floor(t) + 1.0).ln(),
        Schedule::ScaledLog { c, rho } => c / (rho * floor(t) + 1.0).ln(),
        Schedule::Power { alpha } => (t + 1.0).powf(-alpha),
        Schedule::LogPower { k } => (floor(t) + 1.0).ln().powf(-k),
        Schedule::PowerLog { alpha } => (floor(t) + 1.0).powf(-alpha) / (floor(t) + 1.0).ln(),
        Schedule::Exponential => (-t).exp(),
        Schedule::Constant { temperature } => temperature,
    }
}

/// Dense generator built directly from the definitions.
pub fn oracle_generator(l: &Landscape, variant: Variant, temperature: f64) -> DMatrix<f64> {
    let n = l.len();
    let u = l.u();
    let mut m = DMatrix::zeros(n, n);
    for x in 0..n {
        for y in 0..n {
            let q = l.rate(x, y);
            if x == y || q == 0.0 {
                continue;
            }
            let factor = match variant {
                Variant::M1 => (-(u[y] - u[x]).max(0.0) / temperature).exp(),
                Variant::M2 => ((u[x] - u[y]).max(0.0) / temperature).exp(),
            };
            m[(x, y)] = q * factor;
            m[(x, x)] -= q * factor;
        }
    }
    m
}

/// Law at `t1` of the chain started at `x0` at `t0`, integrating the forward
/// equation `p' = p M_t` with exponential-midpoint steps of size at most `dt`.
pub fn forward_law(
    l: &Landscape,
    variant: Variant,
    schedule: &Schedule,
    x0: usize,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Vec<f64> {
    let mut p = RowDVector::zeros(l.len());
    p[x0] = 1.0;
    let steps = ((t1 - t0) / dt).ceil().max(1.0) as usize;
    let h = (t1 - t0) / steps as f64;
    for i in 0..steps {
        let mid = t0 + (i as f64 + 0.5) * h;
        let m = oracle_generator(l, variant, oracle_temperature(schedule, mid)) * h;
        p *= m.exp();
    }
    p.iter().copied().collect()
}

/// Laws at several increasing checkpoints.
pub fn forward_laws(
    l: &Landscape,
    variant: Variant,
    schedule: &Schedule,
    x0: usize,
    checkpoints: &[f64],
    dt: f64,
) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut p = vec![0.0; l.len()];
    p[x0] = 1.0;
    let mut t = 0.0;
    for &c in checkpoints {
        let mut row = RowDVector::from_vec(p.clone());
        let steps = ((c - t) / dt).ceil().max(1.0) as usize;
        let h = (c - t) / steps as f64;
        for i in 0..steps {
            let mid = t + (i as f64 + 0.5) * h;
            row *= (oracle_generator(l, variant, oracle_temperature(schedule, mid)) * h).exp();
        }
        p = row.iter().copied().collect();
        out.push(p.clone());
        t = c;
    }
    out
}

pub fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Asymptotic Kolmogorov-Smirnov p-value for statistic `d` at sample size `n`.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    let mut p = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = 2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp();
        p += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    p.clamp(0.0, 1.0)
}

/// One-sample KS statistic against the CDF `cdf`.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

pub fn line(u: &[f64]) -> Landscape {
    Landscape::line(u).unwrap()
}

pub fn l3() -> Landscape {
    line(&[0.0, 2.0, 1.0])
}

pub fn l5() -> Landscape {
    line(&[0.0, 3.0, 2.0, 3.0, 0.0])
}

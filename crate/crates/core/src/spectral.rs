//! Spectra of reversible generators and the explicit gap lower bound.
//!
//! [`eigenvalues`] diagonalizes the symmetrized generator directly. Its small
//! eigenvalues carry an absolute error of order `eps * |M|`, which swamps the
//! gap of a stiff cold generator. [`spectral_gap`] instead inverts the
//! generator on mean-zero functions through a Green's function computed by
//! subtraction-free elimination and reads `1 / lambda2` off the top of that
//! spectrum, where the error is relative.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::elevation::{bottleneck_from, canonical_path, hill_constants, ElevationKind};
use crate::error::{Error, Result};
use crate::generator::{m_at, GeneratorSnapshot, Variant};
use crate::landscape::Landscape;
use crate::schedule::Schedule;

/// Eigenvalues of `-M` in nondecreasing order.
pub fn eigenvalues(snapshot: &GeneratorSnapshot<'_>) -> Result<Vec<f64>> {
    let n = snapshot.len();
    let mut s = DMatrix::zeros(n, n);
    for (x, row) in snapshot.rates.iter().enumerate() {
        s[(x, x)] = -snapshot.diagonal[x];
        for &(y, r) in row {
            s[(x, y)] = -(r * snapshot.rate(y, x)).sqrt();
        }
    }
    let mut values: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("eigensolver returned non-finite values".into()));
    }
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// `lambda2(-M)`, the smallest nonzero eigenvalue of `-M`.
pub fn spectral_gap(snapshot: &GeneratorSnapshot<'_>) -> Result<f64> {
    let n = snapshot.len();
    if n < 2 {
        return Err(Error::InvalidArgument("a single state has no spectral gap".into()));
    }
    let landscape = snapshot.landscape;
    let t = snapshot.temperature;
    let (u, pi) = (landscape.u(), landscape.pi());
    let ground = landscape
        .global_minima()
        .into_iter()
        .max_by(|&a, &b| pi[a].total_cmp(&pi[b]).then(b.cmp(&a)))
        .expect("U_min is never empty");

    let green = killed_green_function(snapshot, ground)?;
    let others: Vec<usize> = (0..n).filter(|&x| x != ground).collect();
    let mut hitting = vec![0.0; n];
    for (i, &x) in others.iter().enumerate() {
        hitting[x] = green[i].iter().sum();
    }

    let ln_z = landscape.partition(t)?.ln();
    let ln_pi: Vec<f64> = (0..n).map(|x| -u[x] / t + pi[x].ln() - ln_z).collect();
    let mean_hitting: f64 = (0..n).map(|x| ln_pi[x].exp() * hitting[x]).sum();

    let mut b = DMatrix::zeros(n, n);
    for x in 0..n {
        for y in 0..=x {
            let mut value = -(0.5 * (ln_pi[x] + ln_pi[y])).exp() * (hitting[x] + hitting[y] - mean_hitting);
            if x != ground && y != ground {
                let (i, j) = (index_without(x, ground), index_without(y, ground));
                value += green[i][j].sqrt() * green[j][i].sqrt();
            }
            b[(x, y)] = value;
            b[(y, x)] = value;
        }
    }
    let top = SymmetricEigen::new(b).eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(top.is_finite() && top > 0.0) {
        return Err(Error::Numerical(format!("inverse generator has top eigenvalue {top}")));
    }
    Ok(1.0 / top)
}

fn index_without(x: usize, skip: usize) -> usize {
    if x > skip {
        x - 1
    } else {
        x
    }
}

/// `(-M)^{-1}` restricted to the states other than `ground`, i.e. expected
/// occupation times before hitting `ground`. Pivots are recomputed as sums
/// of nonnegative terms so no cancellation occurs.
#[allow(clippy::needless_range_loop)]
fn killed_green_function(snapshot: &GeneratorSnapshot<'_>, ground: usize) -> Result<Vec<Vec<f64>>> {
    let n = snapshot.len();
    let states: Vec<usize> = (0..n).filter(|&x| x != ground).collect();
    let m = states.len();
    let mut a = vec![vec![0.0; m]; m];
    let mut kill = vec![0.0; m];
    for (i, &x) in states.iter().enumerate() {
        for &(y, r) in &snapshot.rates[x] {
            if y == ground {
                kill[i] = r;
            } else {
                a[i][index_without(y, ground)] = r;
            }
        }
    }
    let mut pivot = vec![0.0; m];
    for k in 0..m {
        pivot[k] = a[k][k + 1..].iter().sum::<f64>() + kill[k];
        if !(pivot[k] > 0.0 && pivot[k].is_finite()) {
            return Err(Error::Numerical(format!(
                "state {} cannot reach the ground state at representable rates",
                snapshot.landscape.state_name(states[k])
            )));
        }
        for i in k + 1..m {
            let lower = a[i][k];
            if lower == 0.0 {
                continue;
            }
            for j in k + 1..m {
                if j != i {
                    a[i][j] += mul_div(lower, a[k][j], pivot[k]);
                }
            }
            kill[i] += mul_div(lower, kill[k], pivot[k]);
        }
    }
    // forward and back substitution on z = y / pivot, so that no
    // intermediate exceeds the entries of the result
    let mut green = vec![vec![0.0; m]; m];
    let mut z = vec![0.0; m];
    for column in 0..m {
        for i in 0..m {
            let mut acc = if i == column { 1.0 / pivot[i] } else { 0.0 };
            for k in 0..i {
                acc += mul_div(a[i][k], z[k], pivot[i]);
            }
            z[i] = acc;
        }
        for i in (0..m).rev() {
            let mut acc = z[i];
            for j in i + 1..m {
                acc += mul_div(a[i][j], green[j][column], pivot[i]);
            }
            if !acc.is_finite() {
                return Err(Error::Representability(format!(
                    "occupation time of {} overflows",
                    snapshot.landscape.state_name(states[i])
                )));
            }
            green[i][column] = acc;
        }
    }
    Ok(green)
}

/// `a * b / c` for nonnegative `a, b` and positive `c`, through logarithms
/// when the direct evaluation leaves the floating-point range.
fn mul_div(a: f64, b: f64, c: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let direct = a / c * b;
    if direct.is_finite() && direct > f64::MIN_POSITIVE {
        direct
    } else {
        (a.ln() + b.ln() - c.ln()).exp()
    }
}

/// Canonical-path certificate for the gap bound
/// `lambda2(-M2) >= A exp(-c_M2 / T)`.
#[derive(Debug, Clone, Serialize)]
pub struct GapBoundCertificate {
    pub a_constant: f64,
    /// Longest canonical path, in hops.
    pub n_max: usize,
    /// Directed edge attaining the inner maximum.
    pub binding_edge: (usize, usize),
    /// The inner sum at the binding edge.
    pub binding_sum: f64,
    /// `(x, y, path)` for every ordered pair `x != y`.
    pub canonical_paths: Vec<(usize, usize, Vec<usize>)>,
}

/// `A = 1 / (N max_{z,w} Σ_{x,y} χ_{z,w}(x,y) / α(z,w) · π(x)π(y)/π(U_min))`
/// over canonical `H2`-optimal paths, with `α(z,w) = π(z) Q(z,w)`.
pub fn gap_bound_constant(landscape: &Landscape) -> Result<GapBoundCertificate> {
    let n = landscape.len();
    if n < 2 {
        return Err(Error::InvalidArgument("a single state has no spectral gap".into()));
    }
    let pi = landscape.pi();
    let pi_u_min: f64 = landscape.global_minima().iter().map(|&x| pi[x]).sum();
    let mut canonical_paths = Vec::with_capacity(n * (n - 1));
    let mut load = vec![vec![0.0; n]; n];
    let mut n_max = 0;
    for x in 0..n {
        let levels = bottleneck_from(landscape, x, ElevationKind::Edge);
        for y in (0..n).filter(|&y| y != x) {
            let path = canonical_path(landscape, x, y, ElevationKind::Edge, levels[y])
                .ok_or_else(|| Error::Reducible(format!("no path from {x} to {y}")))?;
            n_max = n_max.max(path.len() - 1);
            let weight = pi[x] * pi[y] / pi_u_min;
            for edge in path.windows(2) {
                load[edge[0]][edge[1]] += weight;
            }
            canonical_paths.push((x, y, path));
        }
    }
    let mut binding = (0, 0);
    let mut binding_sum = f64::NEG_INFINITY;
    for z in 0..n {
        for &(w, q) in landscape.neighbors(z) {
            let sum = load[z][w] / (pi[z] * q);
            if sum > binding_sum {
                binding_sum = sum;
                binding = (z, w);
            }
        }
    }
    Ok(GapBoundCertificate {
        a_constant: 1.0 / (n_max as f64 * binding_sum),
        n_max,
        binding_edge: binding,
        binding_sum,
        canonical_paths,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GapBoundRow {
    pub t: f64,
    pub temperature: f64,
    pub gap: Option<f64>,
    pub bound: f64,
    pub margin: Option<f64>,
    pub skipped: Option<String>,
}

/// Compares `lambda2(-M2,t)` with `A exp(-c_M2 / T(t))` along `times`.
/// Times whose generator cannot be represented are reported as skipped.
pub fn verify_gap_bound(landscape: &Landscape, schedule: &Schedule, times: &[f64]) -> Result<Vec<GapBoundRow>> {
    schedule.validate()?;
    let a = gap_bound_constant(landscape)?.a_constant;
    let c_m2 = hill_constants(landscape).c_m2;
    Ok(times
        .par_iter()
        .map(|&t| gap_row(landscape, a, c_m2, t, schedule.temperature(t)))
        .collect())
}

/// One row of [`verify_gap_bound`] at an explicit temperature.
pub fn gap_row(landscape: &Landscape, a: f64, c_m2: f64, t: f64, temperature: f64) -> GapBoundRow {
    let bound = a * (-c_m2 / temperature).exp();
    match m_at(landscape, Variant::M2, temperature).and_then(|m| spectral_gap(&m)) {
        Ok(gap) => GapBoundRow { t, temperature, gap: Some(gap), bound, margin: Some(gap - bound), skipped: None },
        Err(e) => GapBoundRow { t, temperature, gap: None, bound, margin: None, skipped: Some(e.to_string()) },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state() -> Landscape {
        Landscape::line(&[0.0, 1.0]).unwrap()
    }

    #[test]
    fn two_state_spectrum() {
        let l = two_state();
        let e = std::f64::consts::E;
        let m2 = m_at(&l, Variant::M2, 1.0).unwrap();
        let ev = eigenvalues(&m2).unwrap();
        assert!(ev[0].abs() < 1e-12 && (ev[1] - (1.0 + e)).abs() < 1e-12);
        assert!((spectral_gap(&m2).unwrap() - (1.0 + e)).abs() < 1e-12);
        let m1 = m_at(&l, Variant::M1, 1.0).unwrap();
        assert!((spectral_gap(&m1).unwrap() - (1.0 + 1.0 / e)).abs() < 1e-12);
    }

    #[test]
    fn cold_two_state_gap_is_relative_accurate() {
        let l = two_state();
        let m1 = m_at(&l, Variant::M1, 0.02).unwrap();
        let exact = 1.0 + (-50f64).exp();
        assert!((spectral_gap(&m1).unwrap() - exact).abs() < 1e-14);
        // a deep double well: gap ~ 2 exp(-3/T) for M2 at the saddle
        let l5 = Landscape::line(&[0.0, 3.0, 2.0, 3.0, 0.0]).unwrap();
        let gap = spectral_gap(&m_at(&l5, Variant::M1, 0.05).unwrap()).unwrap();
        assert!(gap > 0.0 && gap < 1e-20);
    }

    #[test]
    fn routes_agree_at_moderate_temperature() {
        let l = Landscape::line(&[0.0, 3.0, 2.0, 3.0, 0.0]).unwrap();
        for v in [Variant::M1, Variant::M2] {
            for t in [0.7, 2.0, 10.0] {
                let m = m_at(&l, v, t).unwrap();
                let (dense, green) = (eigenvalues(&m).unwrap()[1], spectral_gap(&m).unwrap());
                assert!((dense - green).abs() < 1e-9 * dense.max(1.0), "{v} T={t}: {dense} vs {green}");
            }
        }
    }

    #[test]
    fn certificate_constants() {
        let l3 = gap_bound_constant(&Landscape::line(&[0.0, 2.0, 1.0]).unwrap()).unwrap();
        assert_eq!((l3.a_constant, l3.n_max), (0.25, 2));
        assert!((l3.binding_sum - 2.0).abs() < 1e-12);
        let two = gap_bound_constant(&two_state()).unwrap();
        assert_eq!((two.a_constant, two.n_max), (1.0, 1));
        let l5 = gap_bound_constant(&Landscape::line(&[0.0, 3.0, 2.0, 3.0, 0.0]).unwrap()).unwrap();
        assert_eq!(l5.n_max, 4);
        assert!((l5.a_constant - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn bound_holds_on_l3() {
        let l3 = Landscape::line(&[0.0, 2.0, 1.0]).unwrap();
        let rows = verify_gap_bound(&l3, &Schedule::Log { c: 1.0 }, &[1.0, 10.0, 100.0]).unwrap();
        for row in rows {
            assert_eq!(row.bound, 0.25);
            assert!(row.margin.unwrap() >= 0.0);
        }
    }
}

//! Distances between distributions, ensemble metrics and the quantitative
//! bounds: the finite-time miss bound, the escape bounds at local minima and
//! the jump-conditioned reach comparison.

use std::collections::VecDeque;

use rand::Rng;
use serde::Serialize;

use crate::elevation::hill_constants;
use crate::error::{Error, Result};
use crate::generator::Variant;
use crate::landscape::{summary_constants, Distribution, Landscape, LandscapeConstants};
use crate::schedule::Schedule;
use crate::simulate::{replica_stream, EnsembleSummary};
use crate::spectral::gap_bound_constant;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// `½ Σ |mu(x) - nu(x)|`.
///
/// # Panics
/// If the distributions have different lengths.
pub fn tv_distance(mu: &Distribution, nu: &Distribution) -> f64 {
    assert_eq!(mu.len(), nu.len(), "distributions live on different state sets");
    0.5 * mu.as_slice().iter().zip(nu.as_slice()).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// `Σ mu log(mu / nu)`, `+inf` when `mu` charges a `nu`-null state.
///
/// # Panics
/// If the distributions have different lengths.
pub fn relative_entropy(mu: &Distribution, nu: &Distribution) -> f64 {
    assert_eq!(mu.len(), nu.len(), "distributions live on different state sets");
    let mut total = 0.0;
    for (&m, &n) in mu.as_slice().iter().zip(nu.as_slice()) {
        if m == 0.0 {
            continue;
        }
        if n == 0.0 {
            return f64::INFINITY;
        }
        total += m * (m / n).ln();
    }
    total.max(0.0)
}

/// Wilson score interval at 95% for `successes` out of `n`.
pub fn wilson_interval(successes: u64, n: u64) -> (f64, f64) {
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = Z95 / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let low = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let high = if successes as f64 == n { 1.0 } else { (centre + half).min(1.0) };
    (low, high)
}

#[derive(Debug, Clone, Serialize)]
pub struct MissEstimate {
    pub t: f64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub misses: u64,
    pub replicas: u64,
}

/// Fraction of replicas outside `U_min` at each checkpoint.
pub fn miss_probability(summary: &EnsembleSummary, constants: &LandscapeConstants) -> Vec<MissEstimate> {
    summary
        .checkpoints
        .iter()
        .zip(&summary.counts)
        .map(|(&t, counts)| {
            let hits: u64 = constants.u_min.iter().map(|&x| counts[x]).sum();
            let misses = summary.replicas - hits;
            let (ci_low, ci_high) = wilson_interval(misses, summary.replicas);
            MissEstimate {
                t,
                estimate: misses as f64 / summary.replicas as f64,
                ci_low,
                ci_high,
                misses,
                replicas: summary.replicas,
            }
        })
        .collect()
}

/// The finite-time bound on `P_x(X_t ∉ U_min)` at one time.
#[derive(Debug, Clone, Serialize)]
pub struct BoundEvaluation {
    pub time: f64,
    /// `None` when inapplicable.
    pub value: Option<f64>,
    pub applicable: bool,
    pub reason: Option<String>,
    pub rho: f64,
    pub a: f64,
    pub k: f64,
    pub b: f64,
    pub r: f64,
    pub c_m2: f64,
    pub term1: f64,
    pub term2: f64,
}

/// Precomputed constants of the bound
/// `5K (rho t + 1)^{-B/c} + (1/pi(x) - 1)^{1/2} K^{1/2} (rho t + 1)^{-(R + B/2)/c}`
/// under `T(t) = c / log(rho t + 1)`, `c = c_M2`, `rho = 2 c A / (3R)`.
#[derive(Debug, Clone, Serialize)]
pub struct FiniteTimeBound {
    pub constants: LandscapeConstants,
    pub c_m2: f64,
    pub a: f64,
    pub rho: f64,
    pub pi: Vec<f64>,
    pub reason: Option<String>,
}

impl FiniteTimeBound {
    pub fn new(landscape: &Landscape) -> Result<Self> {
        let constants = summary_constants(landscape);
        let c_m2 = hill_constants(landscape).c_m2;
        let reason = if c_m2 <= 0.0 {
            Some("c_M2 ≤ 0".to_string())
        } else if constants.b.is_infinite() {
            Some("B = +inf".to_string())
        } else {
            None
        };
        let (a, rho) = if reason.is_none() {
            let a = gap_bound_constant(landscape)?.a_constant;
            (a, 2.0 * c_m2 * a / (3.0 * constants.r))
        } else {
            (f64::NAN, f64::NAN)
        };
        Ok(Self { constants, c_m2, a, rho, pi: landscape.pi().to_vec(), reason })
    }

    pub fn applicable(&self) -> bool {
        self.reason.is_none()
    }

    /// The cooling schedule under which the bound holds.
    pub fn schedule(&self) -> Option<Schedule> {
        self.applicable().then_some(Schedule::ScaledLog { c: self.c_m2, rho: self.rho })
    }

    pub fn at(&self, x: usize, t: f64) -> BoundEvaluation {
        let c = &self.constants;
        let mut eval = BoundEvaluation {
            time: t,
            value: None,
            applicable: self.applicable(),
            reason: self.reason.clone(),
            rho: self.rho,
            a: self.a,
            k: c.k,
            b: c.b,
            r: c.r,
            c_m2: self.c_m2,
            term1: f64::NAN,
            term2: f64::NAN,
        };
        if self.applicable() {
            let base = self.rho * t + 1.0;
            eval.term1 = 5.0 * c.k * base.powf(-c.b / self.c_m2);
            eval.term2 = (1.0 / self.pi[x] - 1.0).sqrt() * c.k.sqrt() * base.powf(-(c.r + 0.5 * c.b) / self.c_m2);
            eval.value = Some(eval.term1 + eval.term2);
        }
        eval
    }
}

pub fn finite_time_bound(landscape: &Landscape, x: usize, t: f64) -> Result<BoundEvaluation> {
    landscape.check_state(x)?;
    Ok(FiniteTimeBound::new(landscape)?.at(x, t))
}

/// Stay probabilities at a local minimum `x`.
#[derive(Debug, Clone, Serialize)]
pub struct EscapeBounds {
    pub state: usize,
    /// `q_x = Σ_y Q(x, y)`.
    pub q_x: f64,
    pub t: f64,
    /// Probability that the boosted chain has not left `x` by `t`: `e^{-q_x t}`.
    pub m2_stay_probability: f64,
    /// Its limit as `t -> inf`.
    pub m2_stay_limit: f64,
    pub m1_applicable: bool,
    pub m1_reason: Option<String>,
    /// `exp(-q_x (delta - eps) / eps)`: lower bound on never leaving `x`.
    pub m1_stay_lower_bound: Option<f64>,
    /// `exp(-q_x ∫_0^t exp(-delta/T(s)) ds)`: lower bound on staying until `t`.
    pub m1_stay_lower_bound_at_t: Option<f64>,
    /// `T(t) = (delta - eps) / log(t + 1)`.
    pub m1_schedule: Option<Schedule>,
}

pub fn escape_bounds(landscape: &Landscape, x: usize, epsilon: f64, t: f64) -> Result<EscapeBounds> {
    landscape.check_state(x)?;
    let constants = summary_constants(landscape);
    if !constants.u_min_loc.contains(&x) {
        return Err(Error::InvalidArgument(format!(
            "{} is not a local minimum",
            landscape.state_name(x)
        )));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!("bad time {t}")));
    }
    let q_x = landscape.exit_rate(x);
    let delta = constants.delta;
    let reason = if delta <= 0.0 {
        Some("delta ≤ 0".to_string())
    } else if !(epsilon > 0.0 && epsilon < delta) {
        Some(format!("need 0 < epsilon < delta = {delta}, got epsilon = {epsilon}"))
    } else {
        None
    };
    let mut bounds = EscapeBounds {
        state: x,
        q_x,
        t,
        m2_stay_probability: (-q_x * t).exp(),
        m2_stay_limit: 0.0,
        m1_applicable: reason.is_none(),
        m1_reason: reason,
        m1_stay_lower_bound: None,
        m1_stay_lower_bound_at_t: None,
        m1_schedule: None,
    };
    if bounds.m1_applicable {
        let schedule = Schedule::Log { c: delta - epsilon };
        bounds.m1_stay_lower_bound = Some((-q_x * (delta - epsilon) / epsilon).exp());
        bounds.m1_stay_lower_bound_at_t = Some((-q_x * schedule.rate_integral(-delta, 0.0, t)?).exp());
        bounds.m1_schedule = Some(schedule);
    }
    Ok(bounds)
}

/// Monte Carlo comparison of `P_x(X_t = y | N_t = k)` between the variants.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionalReach {
    pub k: usize,
    pub samples: u64,
    /// Shared uniformization rate `e^{R/T(t)} max_x |Q(x,x)|`.
    pub uniformization_rate: f64,
    pub m1: f64,
    pub m1_se: f64,
    pub m2: f64,
    pub m2_se: f64,
    /// Samples whose boosted product entry is at least the classical one.
    pub dominated: u64,
}

/// Hop distance from `x` to `y` along positive rates.
pub fn hop_distance(landscape: &Landscape, x: usize, y: usize) -> Option<usize> {
    let mut dist = vec![usize::MAX; landscape.len()];
    dist[x] = 0;
    let mut queue = VecDeque::from([x]);
    while let Some(v) = queue.pop_front() {
        if v == y {
            return Some(dist[v]);
        }
        for &(w, _) in landscape.neighbors(v) {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    None
}

/// `v <- v (I + M_s / m)` for the given variant.
fn uniformized_step(landscape: &Landscape, variant: Variant, inverse_temperature: f64, m: f64, v: &[f64], out: &mut [f64]) {
    let u = landscape.u();
    out.copy_from_slice(v);
    for (z, &mass) in v.iter().enumerate() {
        if mass == 0.0 {
            continue;
        }
        for &(w, q) in landscape.neighbors(z) {
            let p = q * (variant.exponent(u[z], u[w]) * inverse_temperature).exp() / m;
            out[z] -= mass * p;
            out[w] += mass * p;
        }
    }
}

/// Estimates the `(x, y)` entry of `P_{n_1} ... P_{n_k}` averaged over
/// sorted uniform times on `[0, t]`, for both variants on the same times.
#[allow(clippy::too_many_arguments)]
pub fn conditional_reach(
    landscape: &Landscape,
    schedule: &Schedule,
    x: usize,
    y: usize,
    t: f64,
    k: usize,
    samples: u64,
    seed: u64,
) -> Result<ConditionalReach> {
    schedule.validate()?;
    landscape.check_state(x)?;
    landscape.check_state(y)?;
    if samples == 0 {
        return Err(Error::InvalidArgument("at least one sample is required".into()));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidArgument(format!("bad time {t}")));
    }
    let hops = hop_distance(landscape, x, y)
        .ok_or_else(|| Error::Reducible(format!("{} is unreachable", landscape.state_name(y))))?;
    if hops != k {
        return Err(Error::InvalidArgument(format!("k must be the hop distance {hops}, got {k}")));
    }
    let ln_m = landscape.range() / schedule.temperature(t) + landscape.max_exit_rate().ln();
    if ln_m > 700.0 {
        return Err(Error::Representability(format!("uniformization rate exp({ln_m:.1})")));
    }
    let m = ln_m.exp();
    let n = landscape.len();
    let mut rng = replica_stream(seed, 0);
    let mut times = vec![0.0; k];
    let (mut v, mut scratch) = (vec![0.0; n], vec![0.0; n]);
    let mut sums = [[0.0; 2]; 2];
    let mut dominated = 0;
    for _ in 0..samples {
        for s in times.iter_mut() {
            *s = rng.random::<f64>() * t;
        }
        times.sort_by(f64::total_cmp);
        let mut entries = [0.0; 2];
        for (slot, variant) in [Variant::M1, Variant::M2].into_iter().enumerate() {
            v.fill(0.0);
            v[x] = 1.0;
            for &s in &times {
                uniformized_step(landscape, variant, 1.0 / schedule.temperature(s), m, &v, &mut scratch);
                std::mem::swap(&mut v, &mut scratch);
            }
            entries[slot] = v[y];
            sums[slot][0] += v[y];
            sums[slot][1] += v[y] * v[y];
        }
        if entries[1] >= entries[0] {
            dominated += 1;
        }
    }
    let n_samples = samples as f64;
    let stats = |slot: usize| {
        let mean = sums[slot][0] / n_samples;
        let var = (sums[slot][1] / n_samples - mean * mean).max(0.0);
        (mean, (var / n_samples).sqrt())
    };
    let ((m1, m1_se), (m2, m2_se)) = (stats(0), stats(1));
    Ok(ConditionalReach { k, samples, uniformization_rate: m, m1, m1_se, m2, m2_se, dominated })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(p: &[f64]) -> Distribution {
        Distribution::new(p.to_vec()).unwrap()
    }

    #[test]
    fn tv_examples() {
        assert_eq!(tv_distance(&dist(&[0.2, 0.8]), &dist(&[0.2, 0.8])), 0.0);
        assert_eq!(tv_distance(&dist(&[1.0, 0.0]), &dist(&[0.0, 1.0])), 1.0);
        let l3 = Landscape::line(&[0.0, 2.0, 1.0]).unwrap();
        let tv = tv_distance(&l3.gibbs(0.5).unwrap(), &dist(&[1.0, 0.0, 0.0]));
        assert!((tv - 0.1332).abs() < 5e-5, "{tv}");
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(relative_entropy(&dist(&[0.3, 0.7]), &dist(&[0.3, 0.7])), 0.0);
        assert!(relative_entropy(&dist(&[0.5, 0.5]), &dist(&[1.0, 0.0])).is_infinite());
        let e = relative_entropy(&dist(&[0.5, 0.5]), &dist(&[0.25, 0.75]));
        assert!((e - 0.14384).abs() < 5e-6, "{e}");
    }

    #[test]
    fn wilson_at_zero() {
        let n = 10_000;
        let (lo, hi) = wilson_interval(0, n);
        assert_eq!(lo, 0.0);
        let approx = Z95 * Z95 / (n as f64 + Z95 * Z95);
        assert!((hi - approx).abs() < 1e-12);
    }

    #[test]
    fn finite_time_bound_on_l5() {
        let l5 = Landscape::line(&[0.0, 3.0, 2.0, 3.0, 0.0]).unwrap();
        let bound = FiniteTimeBound::new(&l5).unwrap();
        let rho = 4.0 / 9.0 / 12.0;
        assert!((bound.rho - rho).abs() < 1e-15);
        for t in [0.0, 10.0, 1e3] {
            let eval = bound.at(1, t);
            let base = rho * t + 1.0;
            let want = 7.5 / base + 2.0 * 1.5f64.sqrt() / (base * base);
            assert!((eval.value.unwrap() - want).abs() < 1e-12 * want);
        }
        let l3 = Landscape::line(&[0.0, 2.0, 1.0]).unwrap();
        let eval = finite_time_bound(&l3, 2, 5.0).unwrap();
        assert!(!eval.applicable && eval.value.is_none());
        assert_eq!(eval.reason.as_deref(), Some("c_M2 ≤ 0"));
    }

    #[test]
    fn escape_examples() {
        let l3 = Landscape::line(&[0.0, 2.0, 1.0]).unwrap();
        let e = escape_bounds(&l3, 2, 0.5, 3.0).unwrap();
        assert!((e.m2_stay_probability - 0.049787).abs() < 1e-6);
        assert!((e.m1_stay_lower_bound.unwrap() - (-1f64).exp()).abs() < 1e-15);
        assert!(e.m1_stay_lower_bound_at_t.unwrap() >= e.m1_stay_lower_bound.unwrap());
        let e = escape_bounds(&l3, 2, 1.0, 3.0).unwrap();
        assert!(!e.m1_applicable && e.m1_stay_lower_bound.is_none());
        assert!(escape_bounds(&l3, 1, 0.5, 3.0).is_err());
        let flat = Landscape::line(&[0.0, 0.0]).unwrap();
        assert_eq!(escape_bounds(&flat, 0, 0.5, 1.0).unwrap().m1_reason.as_deref(), Some("delta ≤ 0"));
    }

    #[test]
    fn conditional_reach_trivial_cases() {
        let l3 = Landscape::line(&[0.0, 2.0, 1.0]).unwrap();
        let s = Schedule::Log { c: 1.0 };
        let r = conditional_reach(&l3, &s, 1, 1, 1.0, 0, 10, 3).unwrap();
        assert_eq!((r.m1, r.m2), (1.0, 1.0));
        assert!(conditional_reach(&l3, &s, 2, 0, 1.0, 1, 10, 3).is_err());
        let flat = Landscape::line(&[0.0; 3]).unwrap();
        let r = conditional_reach(&flat, &s, 2, 0, 1.0, 2, 100, 3).unwrap();
        assert_eq!(r.m1, r.m2);
    }
}

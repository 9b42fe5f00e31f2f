//! Exact sample paths of the annealing chains.
//!
//! Two independent engines are provided. The direct engine races one
//! inhomogeneous exponential clock per neighbour and inverts each clock
//! through [`Schedule::solve_clock_until`]. The uniformized engine bounds all
//! exit rates by a constant `M` on a time window, places Poisson(`M`) events
//! and thins them with the one-step matrix `I + M_t / M`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Exp1, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::Variant;
use crate::landscape::{Distribution, Landscape};
use crate::schedule::Schedule;

/// Largest expected number of uniformization events in one window.
pub const WINDOW_EVENT_BUDGET: f64 = 1e6;

/// `exp` arguments above this are refused by the uniformized engine.
const LN_REPRESENTABLE: f64 = 700.0;

/// Random stream of one replica: ChaCha8 keyed by the seed base, with the
/// replica index selecting the stream.
pub type Stream = ChaCha8Rng;

pub fn replica_stream(seed_base: u64, replica: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed_base);
    rng.set_stream(replica);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Direct,
    Uniformized,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Direct => "direct",
            Engine::Uniformized => "uniformized",
        })
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Engine::Direct),
            "uniformized" => Ok(Engine::Uniformized),
            other => Err(Error::InvalidArgument(format!("unknown engine {other:?}"))),
        }
    }
}

/// A piecewise-constant path on `[t0, t1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub initial: usize,
    /// `(jump time, new state)` with strictly increasing times.
    pub jumps: Vec<(f64, usize)>,
    pub t0: f64,
    pub t1: f64,
    pub variant: Variant,
    pub schedule: Schedule,
    pub seed: u64,
    pub stream: u64,
}

impl Trajectory {
    /// State occupied at time `t` (right-continuous).
    pub fn state_at(&self, t: f64) -> usize {
        let count = self.jumps.partition_point(|&(s, _)| s <= t);
        if count == 0 {
            self.initial
        } else {
            self.jumps[count - 1].1
        }
    }

    pub fn final_state(&self) -> usize {
        self.jumps.last().map_or(self.initial, |&(_, x)| x)
    }

    /// Number of jumps in `[t0, t]`.
    pub fn jumps_until(&self, t: f64) -> usize {
        self.jumps.partition_point(|&(s, _)| s <= t)
    }

    /// Whether the path has left its initial state by time `t`.
    pub fn left_by(&self, t: f64) -> bool {
        self.jumps.first().is_some_and(|&(s, _)| s <= t)
    }
}

fn check_inputs(landscape: &Landscape, schedule: &Schedule, x0: usize, t0: f64, t1: f64) -> Result<()> {
    schedule.validate()?;
    landscape.check_state(x0)?;
    if !(t0.is_finite() && t1.is_finite() && t0 >= 0.0 && t0 <= t1) {
        return Err(Error::InvalidArgument(format!("bad horizon [{t0}, {t1}]")));
    }
    Ok(())
}

fn exp1(rng: &mut Stream) -> f64 {
    rng.sample(Exp1)
}

/// Competing-clock simulation with seed `seed` on stream 0.
pub fn simulate_direct(
    landscape: &Landscape,
    schedule: &Schedule,
    variant: Variant,
    x0: usize,
    t0: f64,
    t1: f64,
    seed: u64,
) -> Result<Trajectory> {
    let mut rng = replica_stream(seed, 0);
    let mut path = direct_with(landscape, schedule, variant, x0, t0, t1, &mut rng)?;
    path.seed = seed;
    Ok(path)
}

/// Competing-clock simulation driven by an explicit stream.
pub fn direct_with(
    landscape: &Landscape,
    schedule: &Schedule,
    variant: Variant,
    x0: usize,
    t0: f64,
    t1: f64,
    rng: &mut Stream,
) -> Result<Trajectory> {
    check_inputs(landscape, schedule, x0, t0, t1)?;
    let u = landscape.u();
    let mut jumps = Vec::new();
    let (mut t, mut x) = (t0, x0);
    while t < t1 {
        let inverse_temperature = 1.0 / schedule.temperature(t);
        let mut best: Option<(f64, f64, usize)> = None;
        for &(y, q) in landscape.neighbors(x) {
            let budget = exp1(rng);
            let a = variant.exponent(u[x], u[y]);
            if let Some(fire) = schedule.solve_clock_until(a, q, t, budget, t1)? {
                let key = (budget / q).ln() - a * inverse_temperature;
                if best.is_none_or(|(f, k, _)| fire < f || (fire == f && key < k)) {
                    best = Some((fire, key, y));
                }
            }
        }
        match best {
            Some((fire, _, y)) => {
                jumps.push((fire, y));
                t = fire;
                x = y;
            }
            None => break,
        }
    }
    Ok(Trajectory {
        initial: x0,
        jumps,
        t0,
        t1,
        variant,
        schedule: *schedule,
        seed: 0,
        stream: rng.get_stream(),
    })
}

/// Uniformization constant `e^{R/T} max_x |Q(x,x)|` for `M2`; `max_x |Q(x,x)|`
/// for `M1`, whose rates never exceed those of `Q`.
pub fn uniformization_rate(landscape: &Landscape, variant: Variant, temperature: f64) -> f64 {
    let q_max = landscape.max_exit_rate();
    match variant {
        Variant::M1 => q_max,
        Variant::M2 => (landscape.range() / temperature).exp() * q_max,
    }
}

/// Uniformized simulation with seed `seed` on stream 0.
pub fn simulate_uniformized(
    landscape: &Landscape,
    schedule: &Schedule,
    variant: Variant,
    x0: usize,
    t0: f64,
    t1: f64,
    seed: u64,
) -> Result<Trajectory> {
    let mut rng = replica_stream(seed, 0);
    let mut path = uniformized_with(landscape, schedule, variant, x0, t0, t1, &mut rng)?;
    path.seed = seed;
    Ok(path)
}

/// End of the next uniformization window starting at `a`.
fn window_end(landscape: &Landscape, schedule: &Schedule, variant: Variant, a: f64, t1: f64) -> Result<f64> {
    let r = landscape.range();
    let ln_q = landscape.max_exit_rate().ln();
    let boosted = variant == Variant::M2 && r > 0.0;
    let start_exponent = r / schedule.temperature(a);
    if boosted && start_exponent + ln_q > LN_REPRESENTABLE {
        return Err(Error::Representability(format!(
            "uniformization rate exp({:.1}) at t = {a} is not representable",
            start_exponent + ln_q
        )));
    }
    let mut b = t1;
    loop {
        let end_exponent = if boosted { r / schedule.temperature(b) } else { 0.0 };
        let events = (end_exponent + ln_q).exp() * (b - a);
        let tight = !boosted || end_exponent - start_exponent <= std::f64::consts::LN_2;
        if (tight && events <= WINDOW_EVENT_BUDGET) || b <= a.next_up() {
            return Ok(b);
        }
        b = a + 0.5 * (b - a);
    }
}

/// Uniformized simulation driven by an explicit stream.
pub fn uniformized_with(
    landscape: &Landscape,
    schedule: &Schedule,
    variant: Variant,
    x0: usize,
    t0: f64,
    t1: f64,
    rng: &mut Stream,
) -> Result<Trajectory> {
    check_inputs(landscape, schedule, x0, t0, t1)?;
    let u = landscape.u();
    let mut jumps = Vec::new();
    let mut x = x0;
    let mut a = t0;
    let mut times = Vec::new();
    while a < t1 {
        let b = window_end(landscape, schedule, variant, a, t1)?;
        let bound = uniformization_rate(landscape, variant, schedule.temperature(b));
        let mean = bound * (b - a);
        let count = if mean > 0.0 {
            let poisson = Poisson::new(mean)
                .map_err(|e| Error::Representability(format!("Poisson mean {mean}: {e}")))?;
            poisson.sample(rng) as usize
        } else {
            0
        };
        times.clear();
        times.extend((0..count).map(|_| rng.random_range(a..b)));
        times.sort_by(f64::total_cmp);
        for &s in &times {
            let inverse_temperature = 1.0 / schedule.temperature(s);
            let mut r = rng.random::<f64>() * bound;
            for &(y, q) in landscape.neighbors(x) {
                let rate = q * (variant.exponent(u[x], u[y]) * inverse_temperature).exp();
                if r < rate {
                    if jumps.last().is_none_or(|&(last, _)| s > last) {
                        jumps.push((s, y));
                    } else {
                        // coincident event times: keep the path strictly ordered
                        jumps.push((jumps.last().unwrap().0.next_up(), y));
                    }
                    x = y;
                    break;
                }
                r -= rate;
            }
        }
        a = b;
    }
    Ok(Trajectory {
        initial: x0,
        jumps,
        t0,
        t1,
        variant,
        schedule: *schedule,
        seed: 0,
        stream: rng.get_stream(),
    })
}

/// Simulates replica `replica` of an ensemble.
#[allow(clippy::too_many_arguments)]
pub fn simulate_replica(
    landscape: &Landscape,
    schedule: &Schedule,
    variant: Variant,
    x0: usize,
    t0: f64,
    t1: f64,
    seed_base: u64,
    replica: u64,
    engine: Engine,
) -> Result<Trajectory> {
    let mut rng = replica_stream(seed_base, replica);
    let mut path = match engine {
        Engine::Direct => direct_with(landscape, schedule, variant, x0, t0, t1, &mut rng)?,
        Engine::Uniformized => uniformized_with(landscape, schedule, variant, x0, t0, t1, &mut rng)?,
    };
    path.seed = seed_base;
    Ok(path)
}

/// Runs `replicas` independent paths on `[t0, t1]` and maps each through
/// `f`. Results come back in replica order regardless of scheduling.
#[allow(clippy::too_many_arguments)]
pub fn run_replicas<R, F>(
    landscape: &Landscape,
    schedule: &Schedule,
    variant: Variant,
    x0: usize,
    t0: f64,
    t1: f64,
    replicas: u64,
    seed_base: u64,
    engine: Engine,
    f: F,
) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(&Trajectory) -> R + Sync,
{
    check_inputs(landscape, schedule, x0, t0, t1)?;
    (0..replicas)
        .into_par_iter()
        .map(|i| {
            simulate_replica(landscape, schedule, variant, x0, t0, t1, seed_base, i, engine).map(|p| f(&p))
        })
        .collect()
}

/// Empirical state distributions at a set of checkpoints.
#[derive(Debug, Clone, Serialize)]
pub struct EnsembleSummary {
    pub checkpoints: Vec<f64>,
    /// `counts[k][x]` replicas in state `x` at checkpoint `k`.
    pub counts: Vec<Vec<u64>>,
    pub distributions: Vec<Distribution>,
    pub replicas: u64,
    pub seed_base: u64,
    pub variant: Variant,
    pub engine: Engine,
}

#[allow(clippy::too_many_arguments)]
pub fn run_ensemble(
    landscape: &Landscape,
    schedule: &Schedule,
    variant: Variant,
    x0: usize,
    t0: f64,
    checkpoints: &[f64],
    replicas: u64,
    seed_base: u64,
    engine: Engine,
) -> Result<EnsembleSummary> {
    if replicas == 0 {
        return Err(Error::InvalidArgument("at least one replica is required".into()));
    }
    if checkpoints.is_empty() || checkpoints.windows(2).any(|w| w[0] >= w[1]) || checkpoints[0] < t0 {
        return Err(Error::InvalidArgument(
            "checkpoints must be nonempty, strictly increasing and not before t0".into(),
        ));
    }
    let t1 = *checkpoints.last().unwrap();
    let states = run_replicas(landscape, schedule, variant, x0, t0, t1, replicas, seed_base, engine, |p| {
        checkpoints.iter().map(|&t| p.state_at(t)).collect::<Vec<_>>()
    })?;
    let mut counts = vec![vec![0u64; landscape.len()]; checkpoints.len()];
    for row in &states {
        for (k, &x) in row.iter().enumerate() {
            counts[k][x] += 1;
        }
    }
    let distributions = counts
        .iter()
        .map(|c| Distribution::from_weights(c.iter().map(|&n| n as f64).collect()))
        .collect::<Result<_>>()?;
    Ok(EnsembleSummary {
        checkpoints: checkpoints.to_vec(),
        counts,
        distributions,
        replicas,
        seed_base,
        variant,
        engine,
    })
}

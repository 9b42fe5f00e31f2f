//! Cooling schedules `T(t)`, their rate integrals and clock inversion, and
//! admissibility checks.
//!
//! Logarithmic families are singular at `t = 0`; they are evaluated at
//! `max(t, T_FLOOR)` so the temperature is capped at `T(T_FLOOR)`.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::elevation::{bottleneck_from, hill_constants, ElevationKind};
use crate::error::{Error, Result};
use crate::landscape::Landscape;

pub const T_FLOOR: f64 = 1e-6;

const QUAD_REL_TOL: f64 = 1e-11;
const QUAD_MAX_DEPTH: u32 = 60;
const QUAD_PANELS: usize = 8;
/// `exp` of anything above this overflows.
const LN_MAX: f64 = 709.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    /// `c / log(t + 1)`.
    Log { c: f64 },
    /// `c / log(rho t + 1)`.
    ScaledLog { c: f64, rho: f64 },
    /// `(t + 1)^-alpha`.
    Power { alpha: f64 },
    /// `log(t + 1)^-k`.
    LogPower { k: f64 },
    /// `(t + 1)^-alpha / log(t + 1)`.
    PowerLog { alpha: f64 },
    /// `e^-t`.
    Exponential,
    /// Frozen temperature. Not a cooling schedule; used to test the
    /// simulators against homogeneous chains.
    Constant { temperature: f64 },
}

fn positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Schedule(format!("{name} must be positive and finite, got {value}")))
    }
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Schedule::Log { c } => positive("c", c),
            Schedule::ScaledLog { c, rho } => positive("c", c).and(positive("rho", rho)),
            Schedule::Power { alpha } | Schedule::PowerLog { alpha } => positive("alpha", alpha),
            Schedule::LogPower { k } => {
                positive("k", k)?;
                if k > 1.0 {
                    Ok(())
                } else {
                    Err(Error::Schedule(format!("k must exceed 1, got {k}")))
                }
            }
            Schedule::Exponential => Ok(()),
            Schedule::Constant { temperature } => positive("t", temperature),
        }
    }

    /// Logarithmic families, which have closed-form rate integrals.
    pub fn is_logarithmic(&self) -> bool {
        matches!(self, Schedule::Log { .. } | Schedule::ScaledLog { .. })
    }

    fn floored(&self, t: f64) -> f64 {
        match self {
            Schedule::Log { .. }
            | Schedule::ScaledLog { .. }
            | Schedule::LogPower { .. }
            | Schedule::PowerLog { .. } => t.max(T_FLOOR),
            _ => t,
        }
    }

    pub fn temperature(&self, t: f64) -> f64 {
        let s = self.floored(t);
        match *self {
            Schedule::Log { c } => c / s.ln_1p(),
            Schedule::ScaledLog { c, rho } => c / (rho * s).ln_1p(),
            Schedule::Power { alpha } => (-alpha * s.ln_1p()).exp(),
            Schedule::LogPower { k } => s.ln_1p().powf(-k),
            Schedule::PowerLog { alpha } => (-alpha * s.ln_1p()).exp() / s.ln_1p(),
            Schedule::Exponential => (-s).exp(),
            Schedule::Constant { temperature } => temperature,
        }
    }

    /// `dT/dt`; zero inside the floor region of the logarithmic families.
    pub fn d_temperature(&self, t: f64) -> f64 {
        if self.floored(t) != t {
            return 0.0;
        }
        match *self {
            Schedule::Log { c } => -c / ((t + 1.0) * t.ln_1p().powi(2)),
            Schedule::ScaledLog { c, rho } => {
                -c * rho / ((rho * t + 1.0) * (rho * t).ln_1p().powi(2))
            }
            Schedule::Power { alpha } => -alpha * (-(alpha + 1.0) * t.ln_1p()).exp(),
            Schedule::LogPower { k } => -k * t.ln_1p().powf(-k - 1.0) / (t + 1.0),
            Schedule::PowerLog { alpha } => {
                let l = t.ln_1p();
                -(-(alpha + 1.0) * t.ln_1p()).exp() / l * (alpha + 1.0 / l)
            }
            Schedule::Exponential => -(-t).exp(),
            Schedule::Constant { .. } => 0.0,
        }
    }

    /// `log T(t)`, accurate where `T` itself underflows.
    pub fn ln_temperature(&self, t: f64) -> f64 {
        let s = self.floored(t);
        match *self {
            Schedule::Exponential => -s,
            Schedule::Power { alpha } => -alpha * s.ln_1p(),
            Schedule::LogPower { k } => -k * s.ln_1p().ln(),
            Schedule::PowerLog { alpha } => -alpha * s.ln_1p() - s.ln_1p().ln(),
            _ => self.temperature(t).ln(),
        }
    }

    /// `log |dT/dt|`.
    pub fn ln_neg_d_temperature(&self, t: f64) -> f64 {
        if self.floored(t) != t {
            return f64::NEG_INFINITY;
        }
        match *self {
            Schedule::Exponential => -t,
            Schedule::Power { alpha } => alpha.ln() - (alpha + 1.0) * t.ln_1p(),
            Schedule::LogPower { k } => k.ln() - (k + 1.0) * t.ln_1p().ln() - t.ln_1p(),
            Schedule::PowerLog { alpha } => {
                let l = t.ln_1p();
                -(alpha + 1.0) * t.ln_1p() - l.ln() + (alpha + 1.0 / l).ln()
            }
            _ => (-self.d_temperature(t)).ln(),
        }
    }

    /// `exp(a / T(t))`.
    fn rate_factor(&self, a: f64, t: f64) -> f64 {
        if a == 0.0 {
            return 1.0;
        }
        (a * (-self.ln_temperature(t)).exp()).exp()
    }

    /// `∫_{t0}^{t1} exp(a / T(s)) ds`. Negative `a` gives the damped factor
    /// used by the classical chain. Returns `+inf` when the integral is not
    /// representable.
    pub fn rate_integral(&self, a: f64, t0: f64, t1: f64) -> Result<f64> {
        self.validate()?;
        if !(t0.is_finite() && t1.is_finite() && t0 >= 0.0 && t0 <= t1) {
            return Err(Error::InvalidArgument(format!("bad interval [{t0}, {t1}]")));
        }
        if a == 0.0 {
            return Ok(t1 - t0);
        }
        Ok(match *self {
            Schedule::Log { c } => self.log_integral(a / c, 1.0, t0, t1),
            Schedule::ScaledLog { c, rho } => self.log_integral(a / c, rho, t0, t1),
            Schedule::Constant { .. } => (t1 - t0) * self.rate_factor(a, t0),
            _ => adaptive_simpson(&|s| self.rate_factor(a, s), t0, t1),
        })
    }

    /// Closed form for `∫ (rho s + 1)^p ds` with the constant floor piece.
    fn log_integral(&self, p: f64, rho: f64, t0: f64, t1: f64) -> f64 {
        let mut total = 0.0;
        let mut s0 = t0;
        if s0 < T_FLOOR {
            let end = t1.min(T_FLOOR);
            total += (end - s0) * (p * (rho * T_FLOOR).ln_1p()).exp();
            s0 = end;
        }
        if t1 > s0 {
            total += log_antiderivative_difference(p, rho, s0, t1);
        }
        if total.is_finite() {
            total
        } else {
            f64::INFINITY
        }
    }

    /// Smallest `t >= t0` with `q ∫_{t0}^{t} exp(a / T(s)) ds = budget`, or
    /// `+inf` when the integral converges below `budget / q`.
    pub fn solve_clock(&self, a: f64, q: f64, t0: f64, budget: f64) -> Result<f64> {
        Ok(self.solve_clock_until(a, q, t0, budget, f64::INFINITY)?.unwrap_or(f64::INFINITY))
    }

    /// As [`solve_clock`](Self::solve_clock) but gives up at `horizon`,
    /// returning `None` if the clock has not fired by then.
    pub fn solve_clock_until(
        &self,
        a: f64,
        q: f64,
        t0: f64,
        budget: f64,
        horizon: f64,
    ) -> Result<Option<f64>> {
        self.validate()?;
        if !(q.is_finite() && q > 0.0) {
            return Err(Error::InvalidArgument(format!("clock rate must be positive, got {q}")));
        }
        if !(budget.is_finite() && budget > 0.0) {
            return Err(Error::InvalidArgument(format!("clock budget must be positive, got {budget}")));
        }
        if !(t0.is_finite() && t0 >= 0.0) {
            return Err(Error::InvalidArgument(format!("bad start time {t0}")));
        }
        let target = budget / q;
        let g0 = self.rate_factor(a, t0);
        if g0.is_infinite() {
            return Ok(Some(next_after(t0)));
        }
        let fired = if a == 0.0 {
            Some(t0 + target)
        } else {
            match *self {
                Schedule::Log { c } => solve_log(a / c, 1.0, self.temperature(T_FLOOR), a, t0, target),
                Schedule::ScaledLog { c, rho } => {
                    solve_log(a / c, rho, self.temperature(T_FLOOR), a, t0, target)
                }
                Schedule::Constant { .. } if g0 > 0.0 => Some(t0 + target / g0),
                Schedule::Constant { .. } => None,
                _ => self.solve_numeric(a, t0, target, g0, horizon),
            }
        };
        Ok(fired.map(|t| t.max(next_after(t0))).filter(|&t| t <= horizon))
    }

    fn solve_numeric(&self, a: f64, t0: f64, target: f64, g0: f64, horizon: f64) -> Option<f64> {
        let g = |s: f64| self.rate_factor(a, s);
        if g0 == 0.0 {
            return None;
        }
        let mut lo = t0;
        let mut acc = 0.0;
        let mut h = target / g0;
        let hi = loop {
            if lo >= horizon || lo > 1e300 {
                return None;
            }
            let hi = (lo + h).min(horizon);
            let chunk = adaptive_simpson(&g, lo, hi);
            if chunk.is_infinite() {
                h *= 0.5;
                if h <= f64::EPSILON * lo.max(1.0) {
                    return Some(next_after(lo));
                }
                continue;
            }
            if acc + chunk >= target {
                break hi;
            }
            if a < 0.0 && g(hi) == 0.0 {
                return None;
            }
            acc += chunk;
            lo = hi;
            h *= 2.0;
        };

        // safeguarded Newton on F(x) = acc + ∫_lo^x g within [lo, hi]
        let mut hi = hi;
        let mut x = lo + (target - acc) / g(lo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        for _ in 0..200 {
            let fx = acc + simpson_panels(&g, lo, x, 1);
            let diff = fx - target;
            if diff.abs() <= 1e-13 * target {
                return Some(x);
            }
            if diff < 0.0 {
                acc = fx;
                lo = x;
            } else {
                hi = x;
            }
            if hi - lo <= 2.0 * f64::EPSILON * hi.abs().max(1.0) {
                let over = acc + adaptive_simpson(&g, lo, hi) - target;
                return Some(if over < target - acc { hi } else { lo });
            }
            let newton = x - diff / g(x);
            x = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        }
        Some(x)
    }
}

/// `∫_{s0}^{t1} (rho s + 1)^p ds` for `s0 >= T_FLOOR`.
fn log_antiderivative_difference(p: f64, rho: f64, s0: f64, t1: f64) -> f64 {
    let u0 = rho * s0 + 1.0;
    let growth = (rho * (t1 - s0) / u0).ln_1p();
    let m = p + 1.0;
    if m == 0.0 {
        return growth / rho;
    }
    let ln_scale = m * u0.ln();
    let inner = (m * growth).exp_m1() / (rho * m);
    if ln_scale > LN_MAX {
        return f64::INFINITY;
    }
    ln_scale.exp() * inner
}

/// Closed-form clock for `T(s) = c / log(rho s + 1)`, with `p = a / c`.
fn solve_log(p: f64, rho: f64, t_floor_temp: f64, a: f64, t0: f64, target: f64) -> Option<f64> {
    let mut target = target;
    let mut s0 = t0;
    if s0 < T_FLOOR {
        let g = (a / t_floor_temp).exp();
        let cap = g * (T_FLOOR - s0);
        if target <= cap {
            return Some(s0 + target / g);
        }
        target -= cap;
        s0 = T_FLOOR;
    }
    let u0 = rho * s0 + 1.0;
    let m = p + 1.0;
    let step = if m == 0.0 {
        u0 * (rho * target).exp_m1() / rho
    } else {
        let x = rho * m * target * (-m * u0.ln()).exp();
        if x <= -1.0 {
            return None;
        }
        u0 * (x.ln_1p() / m).exp_m1() / rho
    };
    if step.is_finite() {
        Some(s0 + step)
    } else {
        None
    }
}

fn next_after(t: f64) -> f64 {
    t.next_up()
}

/// Adaptive Simpson quadrature with relative tolerance `QUAD_REL_TOL`.
/// Returns `+inf` if the integrand overflows anywhere it is sampled.
pub(crate) fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    simpson_panels(f, a, b, QUAD_PANELS)
}

fn simpson_panels(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let count = if b - a > 64.0 * f64::EPSILON * b.abs().max(1.0) { panels } else { 1 };
    let h = (b - a) / count as f64;
    let mut panels = Vec::with_capacity(count);
    let mut total = 0.0;
    let mut fa = f(a);
    for i in 0..count {
        let lo = a + i as f64 * h;
        let hi = if i + 1 == count { b } else { a + (i + 1) as f64 * h };
        let (fm, fb) = (f(0.5 * (lo + hi)), f(hi));
        let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        if !whole.is_finite() {
            return f64::INFINITY;
        }
        total += whole;
        panels.push((lo, hi, fa, fm, fb, whole));
        fa = fb;
    }
    let eps = QUAD_REL_TOL * total.abs() / count as f64;
    let value: f64 = panels
        .into_iter()
        .map(|(lo, hi, fa, fm, fb, whole)| simpson_step(f, lo, hi, fa, fm, fb, whole, eps, QUAD_MAX_DEPTH))
        .sum();
    if value.is_finite() {
        value
    } else {
        f64::INFINITY
    }
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return f64::INFINITY;
    }
    if depth == 0 || delta.abs() <= 15.0 * eps || m <= a || b <= m {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Schedule::Log { c } => write!(f, "log:c={c}"),
            Schedule::ScaledLog { c, rho } => write!(f, "scaledlog:c={c},rho={rho}"),
            Schedule::Power { alpha } => write!(f, "power:alpha={alpha}"),
            Schedule::LogPower { k } => write!(f, "logpow:k={k}"),
            Schedule::PowerLog { alpha } => write!(f, "powlog:alpha={alpha}"),
            Schedule::Exponential => write!(f, "exp"),
            Schedule::Constant { temperature } => write!(f, "const:t={temperature}"),
        }
    }
}

impl Serialize for Schedule {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl FromStr for Schedule {
    type Err = Error;

    fn from_str(literal: &str) -> Result<Self> {
        let literal = literal.trim();
        let (family, params) = literal.split_once(':').unwrap_or((literal, ""));
        let mut values: Vec<(&str, f64)> = Vec::new();
        for pair in params.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| Error::Schedule(format!("expected key=value, got {pair:?}")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Schedule(format!("{key} is not a number: {value:?}")))?;
            values.push((key.trim(), value));
        }
        let mut take = |key: &str| -> Result<f64> {
            let i = values
                .iter()
                .position(|(k, _)| *k == key)
                .ok_or_else(|| Error::Schedule(format!("{family} needs parameter {key}")))?;
            Ok(values.remove(i).1)
        };
        let schedule = match family {
            "log" => Schedule::Log { c: take("c")? },
            "scaledlog" => Schedule::ScaledLog { c: take("c")?, rho: take("rho")? },
            "power" => Schedule::Power { alpha: take("alpha")? },
            "logpow" => Schedule::LogPower { k: take("k")? },
            "powlog" => Schedule::PowerLog { alpha: take("alpha")? },
            "exp" => Schedule::Exponential,
            "const" => Schedule::Constant { temperature: take("t")? },
            other => return Err(Error::Schedule(format!("unknown schedule family {other:?}"))),
        };
        if let Some((key, _)) = values.first() {
            return Err(Error::Schedule(format!("unexpected parameter {key} for {family}")));
        }
        schedule.validate()?;
        Ok(schedule)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Satisfied,
    Violated,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    pub label: String,
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub verdict: Verdict,
    pub analytic_note: String,
    pub evidence: Vec<Evidence>,
}

/// Geometric grid `10^1, 10^1.5, ..., 10^8`.
pub fn evidence_grid() -> Vec<f64> {
    (0..15).map(|i| 10f64.powf(1.0 + 0.5 * i as f64)).collect()
}

fn check_sign(c_m2: f64) -> Result<()> {
    if c_m2.is_nan() || c_m2 > 0.0 {
        Err(Error::InvalidArgument(format!("this condition requires c_M2 <= 0, got {c_m2}")))
    } else {
        Ok(())
    }
}

/// `c / T(t)` with the convention `0 * inf = 0`.
fn over_temperature(schedule: &Schedule, c: f64, t: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        c * (-schedule.ln_temperature(t)).exp()
    }
}

/// `lim T'(t) exp(c/T(t)) / T(t)^2 = 0`, the fast-cooling condition for the
/// boosted chain when `c_M2 <= 0`.
pub fn check_fastcool(schedule: &Schedule, c_m2: f64) -> Result<ConditionReport> {
    schedule.validate()?;
    check_sign(c_m2)?;
    let evidence = evidence_grid()
        .into_iter()
        .map(|t| {
            let ln = schedule.ln_neg_d_temperature(t) + over_temperature(schedule, c_m2, t)
                - 2.0 * schedule.ln_temperature(t);
            Evidence { label: "dT/dt exp(c/T) / T^2".into(), t, value: -ln.exp() }
        })
        .collect();
    let negative = c_m2 < 0.0;
    let (verdict, note) = match *schedule {
        _ if negative && !matches!(schedule, Schedule::Constant { .. }) => (
            Verdict::Satisfied,
            "c_M2 < 0: exp(c_M2/T) decays faster than any power of 1/T and |T'| / T^2 grows at most like exp(t)"
                .to_string(),
        ),
        Schedule::Power { alpha } if alpha < 1.0 => {
            (Verdict::Satisfied, format!("power law: limit of -alpha (t+1)^(alpha-1) is 0 for alpha = {alpha} < 1"))
        }
        Schedule::Power { alpha } => {
            (Verdict::Violated, format!("power law: -alpha (t+1)^(alpha-1) does not vanish for alpha = {alpha} >= 1"))
        }
        Schedule::LogPower { .. } => {
            (Verdict::Satisfied, "log power: -k log(t+1)^(k-1) / (t+1) tends to 0".to_string())
        }
        Schedule::PowerLog { alpha } if alpha < 1.0 => (
            Verdict::Satisfied,
            format!("power-log product: -(1 + alpha log(t+1)) / (t+1)^(1-alpha) tends to 0 for alpha = {alpha} < 1"),
        ),
        Schedule::PowerLog { alpha } => (
            Verdict::Violated,
            format!("power-log product: (1 + alpha log(t+1)) (t+1)^(alpha-1) diverges for alpha = {alpha} >= 1"),
        ),
        Schedule::Exponential => {
            (Verdict::Violated, "exponential at c_M2 = 0: T'/T^2 = -e^t diverges".to_string())
        }
        Schedule::Log { .. } | Schedule::ScaledLog { .. } => (
            Verdict::Satisfied,
            "logarithmic: T'/T^2 = -rho / (c (rho t + 1)) tends to 0".to_string(),
        ),
        Schedule::Constant { .. } => (
            Verdict::Inconclusive,
            "constant temperature is not a cooling schedule".to_string(),
        ),
    };
    Ok(ConditionReport { verdict, analytic_note: note, evidence })
}

/// The two relative-entropy conditions: `∫ (1 + 1/T)^-1 exp(-c/T) dt = inf`
/// and `lim |T'| exp(c/T) / (T^2 + T^3) = 0`.
pub fn check_entropy_conditions(schedule: &Schedule, c_m2: f64) -> Result<ConditionReport> {
    schedule.validate()?;
    check_sign(c_m2)?;
    let mut evidence = Vec::new();
    let integrand = |s: f64| {
        let ln_t = schedule.ln_temperature(s);
        (ln_t - over_temperature(schedule, c_m2, s) - ln_t.exp().ln_1p()).exp()
    };
    let mut cumulative: f64 = 0.0;
    let mut previous = 0.0;
    for t in evidence_grid() {
        if cumulative.is_finite() {
            cumulative += adaptive_simpson(&integrand, previous, t);
        }
        previous = t;
        evidence.push(Evidence { label: "integral of (1 + 1/T)^-1 exp(-c/T)".into(), t, value: cumulative });
        let ln_t = schedule.ln_temperature(t);
        let ln = schedule.ln_neg_d_temperature(t) + over_temperature(schedule, c_m2, t)
            - 2.0 * ln_t
            - ln_t.exp().ln_1p();
        evidence.push(Evidence { label: "|dT/dt| exp(c/T) / (T^2 + T^3)".into(), t, value: ln.exp() });
    }
    let negative = c_m2 < 0.0;
    let (verdict, note) = match *schedule {
        Schedule::Power { .. } if negative => (
            Verdict::Satisfied,
            "power law, c_M2 < 0: the integrand grows without bound and the limit term decays".to_string(),
        ),
        Schedule::Power { alpha } if alpha < 1.0 => (
            Verdict::Satisfied,
            format!("power law: integral dominates ∫ 1/(2+t) dt and alpha / ((1+t)^(1-alpha) + (1+t)^(1-2 alpha)) -> 0 for alpha = {alpha}"),
        ),
        Schedule::Power { alpha } => (
            Verdict::Violated,
            format!("power law: alpha / ((1+t)^(1-alpha) + (1+t)^(1-2 alpha)) does not vanish for alpha = {alpha} >= 1"),
        ),
        Schedule::Exponential if negative => (
            Verdict::Satisfied,
            "exponential, c_M2 < 0: integrand exp(-c e^t) / (1 + e^t) diverges and the limit term decays".to_string(),
        ),
        Schedule::Exponential => (
            Verdict::Violated,
            "exponential at c_M2 = 0: ∫ 1/(1 + e^t) dt is finite".to_string(),
        ),
        Schedule::Log { .. } | Schedule::ScaledLog { .. } => (
            Verdict::Satisfied,
            "logarithmic: the integrand decays no faster than 1/log t and |T'|/T^2 -> 0".to_string(),
        ),
        Schedule::LogPower { .. } | Schedule::PowerLog { .. } => (
            Verdict::Inconclusive,
            "no analytic rule for this family; see the evidence trend".to_string(),
        ),
        Schedule::Constant { .. } => (
            Verdict::Inconclusive,
            "constant temperature is not a cooling schedule".to_string(),
        ),
    };
    Ok(ConditionReport { verdict, analytic_note: note, evidence })
}

/// Audits the two ergodicity conditions `∫ λ2(t) dt = inf` and
/// `γ(t) / λ2(t) -> 0` for the boosted chain, with
/// `γ(t) = -T'(t) R / T(t)^2`. `gap_fn` maps a temperature to the spectral
/// gap of the frozen generator; temperatures it rejects are skipped.
pub fn ergodicity_audit(
    schedule: &Schedule,
    landscape: &Landscape,
    gap_fn: &dyn Fn(f64) -> Result<f64>,
) -> Result<ConditionReport> {
    schedule.validate()?;
    let r = landscape.range();
    let c_m2 = hill_constants(landscape).c_m2;
    let minima = landscape.global_minima();
    let barrier = minima
        .iter()
        .map(|&x| {
            let row = bottleneck_from(landscape, x, ElevationKind::Edge);
            minima.iter().filter(|&&y| y != x).map(|&y| row[y]).fold(f64::NEG_INFINITY, f64::max)
        })
        .fold(f64::NEG_INFINITY, f64::max);

    let mut evidence = Vec::new();
    for t in evidence_grid() {
        let gamma = if r == 0.0 {
            0.0
        } else {
            (schedule.ln_neg_d_temperature(t) + r.ln() - 2.0 * schedule.ln_temperature(t)).exp()
        };
        evidence.push(Evidence { label: "gamma".into(), t, value: gamma });
        if let Ok(gap) = gap_fn(schedule.temperature(t)) {
            evidence.push(Evidence { label: "lambda2".into(), t, value: gap });
            evidence.push(Evidence { label: "gamma / lambda2".into(), t, value: gamma / gap });
        }
    }

    let log_constant = match *schedule {
        Schedule::Log { c } | Schedule::ScaledLog { c, .. } => Some(c),
        _ => None,
    };
    let (verdict, note) = if let Schedule::Constant { .. } = schedule {
        (
            Verdict::Satisfied,
            "constant temperature: gamma = 0 and the gap is a positive constant; the limit law is the frozen Gibbs distribution".to_string(),
        )
    } else if c_m2 <= 0.0 && check_fastcool(schedule, c_m2)?.verdict == Verdict::Satisfied {
        (
            Verdict::Satisfied,
            format!("c_M2 = {c_m2} <= 0: lambda2 >= A exp(-c_M2/T) >= A and the fast-cooling limit holds"),
        )
    } else if c_m2 > 0.0 && log_constant.is_some_and(|c| c > c_m2) {
        (
            Verdict::Satisfied,
            format!("logarithmic with c > c_M2 = {c_m2}: lambda2 >= A (rho t + 1)^(-c_M2/c) is not integrable and dominates gamma"),
        )
    } else if barrier > 0.0 && log_constant.is_none_or(|c| barrier >= c) {
        (
            Verdict::Violated,
            format!("two global minima separated by an edge barrier of {barrier}: lambda2 <= C exp(-{barrier}/T) and gamma / lambda2 does not vanish"),
        )
    } else {
        (Verdict::Inconclusive, "no analytic rule applies; see the evidence trend".to_string())
    };
    Ok(ConditionReport { verdict, analytic_note: note, evidence })
}

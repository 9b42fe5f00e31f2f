//! Frozen-temperature generators of the classical annealer (`M1`) and the
//! boosted variant (`M2`).

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landscape::{check_temperature, Distribution, Landscape};

/// Largest off-diagonal entry a snapshot may hold; its reciprocal is the
/// smallest.
pub const MAX_SNAPSHOT_RATE: f64 = 1e300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Uphill moves damped by `exp(-(U(y) - U(x))_+ / T)`.
    M1,
    /// Downhill moves boosted by `exp((U(x) - U(y))_+ / T)`.
    M2,
}

impl Variant {
    /// Exponent numerator `a` such that `M(x, y) = Q(x, y) exp(a / T)`.
    pub fn exponent(self, u_from: f64, u_to: f64) -> f64 {
        match self {
            Variant::M1 => -(u_to - u_from).max(0.0),
            Variant::M2 => (u_from - u_to).max(0.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::M1 => "m1",
            Variant::M2 => "m2",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "m1" => Ok(Variant::M1),
            "m2" => Ok(Variant::M2),
            other => Err(Error::InvalidArgument(format!("unknown variant {other:?}"))),
        }
    }
}

/// `M1` or `M2` frozen at one temperature.
#[derive(Debug, Clone)]
pub struct GeneratorSnapshot<'a> {
    pub landscape: &'a Landscape,
    pub variant: Variant,
    pub temperature: f64,
    /// Off-diagonal rates on the support of `Q`, sorted by target.
    pub rates: Vec<Vec<(usize, f64)>>,
    /// Negative row sums.
    pub diagonal: Vec<f64>,
    pub stationary: Distribution,
}

/// Builds the generator of `variant` at `temperature`.
pub fn m_at(landscape: &Landscape, variant: Variant, temperature: f64) -> Result<GeneratorSnapshot<'_>> {
    check_temperature(temperature)?;
    let u = landscape.u();
    let ln_cap = MAX_SNAPSHOT_RATE.ln();
    let mut rates = Vec::with_capacity(landscape.len());
    for x in 0..landscape.len() {
        let mut row = Vec::with_capacity(landscape.neighbors(x).len());
        for &(y, q) in landscape.neighbors(x) {
            let log_rate = q.ln() + variant.exponent(u[x], u[y]) / temperature;
            if log_rate.abs() > ln_cap {
                return Err(Error::TemperatureTooLow { temperature, log_rate });
            }
            row.push((y, log_rate.exp()));
        }
        rates.push(row);
    }
    let diagonal = rates.iter().map(|row| -row.iter().map(|&(_, m)| m).sum::<f64>()).collect();
    Ok(GeneratorSnapshot {
        landscape,
        variant,
        temperature,
        rates,
        diagonal,
        stationary: landscape.gibbs(temperature)?,
    })
}

impl GeneratorSnapshot<'_> {
    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    /// `M(x, y)`, including the diagonal.
    pub fn rate(&self, x: usize, y: usize) -> f64 {
        if x == y {
            return self.diagonal[x];
        }
        self.rates[x]
            .binary_search_by_key(&y, |&(to, _)| to)
            .map(|i| self.rates[x][i].1)
            .unwrap_or(0.0)
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for (x, row) in self.rates.iter().enumerate() {
            for &(y, r) in row {
                m[(x, y)] = r;
            }
            m[(x, x)] = self.diagonal[x];
        }
        m
    }

    /// Largest relative detailed-balance defect
    /// `|pi_T(x) M(x,y) - pi_T(y) M(y,x)| / max(...)` over the support,
    /// evaluated on logarithms so that cold temperatures do not underflow.
    pub fn detailed_balance_residual(&self) -> f64 {
        let l = self.landscape;
        let (u, pi) = (l.u(), l.pi());
        let log_flux = |x: usize, y: usize| {
            let q = l.rate(x, y);
            pi[x].ln() - u[x] / self.temperature + q.ln() + self.variant.exponent(u[x], u[y]) / self.temperature
        };
        let mut worst: f64 = 0.0;
        for (x, row) in self.rates.iter().enumerate() {
            for &(y, _) in row {
                let gap = (log_flux(x, y) - log_flux(y, x)).abs();
                worst = worst.max(-(-gap).exp_m1());
            }
        }
        worst
    }

    fn check_compatible(&self, other: &GeneratorSnapshot<'_>) -> Result<()> {
        if !std::ptr::eq(self.landscape, other.landscape) && self.len() != other.len() {
            return Err(Error::Mismatch("snapshots come from different landscapes".into()));
        }
        if self.temperature != other.temperature {
            return Err(Error::Mismatch(format!(
                "temperatures differ: {} vs {}",
                self.temperature, other.temperature
            )));
        }
        let same_support = self.rates.iter().zip(&other.rates).all(|(a, b)| {
            a.len() == b.len() && a.iter().zip(b).all(|(&(x, _), &(y, _))| x == y)
        });
        if !same_support {
            return Err(Error::Mismatch("snapshots have different supports".into()));
        }
        Ok(())
    }

    fn check_function(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.len() {
            return Err(Error::Dimension(format!("{} states but f has {} values", self.len(), f.len())));
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("f must be finite".into()));
        }
        Ok(())
    }

    /// `½ Σ (f(x) - f(y))² pi_T(x) M(x, y)`.
    pub fn dirichlet_form_sum(&self, f: &[f64]) -> Result<f64> {
        self.check_function(f)?;
        let pi = self.stationary.as_slice();
        let mut total = 0.0;
        for (x, row) in self.rates.iter().enumerate() {
            for &(y, r) in row {
                total += (f[x] - f[y]).powi(2) * pi[x] * r;
            }
        }
        Ok(0.5 * total)
    }

    /// Same form written as `½ Σ (f(x) - f(y))² pi(x) Q(x,y) exp(-V(x,y)/T) / Z_T`
    /// with `V = min(U(x), U(y))` for `M2` and `max` for `M1`.
    pub fn dirichlet_form_closed(&self, f: &[f64]) -> Result<f64> {
        self.check_function(f)?;
        let l = self.landscape;
        let (u, pi) = (l.u(), l.pi());
        let z = l.partition(self.temperature)?;
        let mut total = 0.0;
        for x in 0..l.len() {
            for &(y, q) in l.neighbors(x) {
                let level = match self.variant {
                    Variant::M1 => u[x].max(u[y]),
                    Variant::M2 => u[x].min(u[y]),
                };
                total += (f[x] - f[y]).powi(2) * pi[x] * q * (-level / self.temperature).exp();
            }
        }
        Ok(0.5 * total / z)
    }
}

/// Whether every off-diagonal entry of `a` is at least the entry of `b`.
pub fn peskun_dominates(a: &GeneratorSnapshot<'_>, b: &GeneratorSnapshot<'_>) -> Result<bool> {
    a.check_compatible(b)?;
    Ok(a.rates
        .iter()
        .zip(&b.rates)
        .all(|(ra, rb)| ra.iter().zip(rb).all(|(&(_, x), &(_, y))| x >= y)))
}

/// `<-M f, f>_{pi_T}`, computed as the double sum and checked against the
/// closed min/max form.
pub fn dirichlet_form(snapshot: &GeneratorSnapshot<'_>, f: &[f64]) -> Result<f64> {
    let sum = snapshot.dirichlet_form_sum(f)?;
    let closed = snapshot.dirichlet_form_closed(f)?;
    if (sum - closed).abs() > 1e-10 * sum.abs().max(closed.abs()) + f64::MIN_POSITIVE {
        return Err(Error::Numerical(format!(
            "Dirichlet form disagreement: double sum {sum} vs closed form {closed}"
        )));
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn l3_rates() {
        let l3 = Landscape::line(&[0.0, 2.0, 1.0]).unwrap();
        let m2 = m_at(&l3, Variant::M2, 1.0).unwrap();
        assert!(close(m2.rate(1, 0), 7.38906, 1e-5));
        assert!(close(m2.rate(1, 2), 1f64.exp(), 1e-12));
        assert_eq!((m2.rate(0, 1), m2.rate(2, 1)), (1.0, 1.0));
        let m1 = m_at(&l3, Variant::M1, 1.0).unwrap();
        assert!(close(m1.rate(0, 1), 0.13534, 1e-5));
        assert!(close(m1.rate(2, 1), 0.36788, 1e-5));
        assert_eq!((m1.rate(1, 0), m1.rate(1, 2)), (1.0, 1.0));
        assert_eq!(m1.rate(0, 2), 0.0);
        for m in [&m1, &m2] {
            assert!(m.detailed_balance_residual() <= 1e-12);
            for x in 0..3 {
                let row: f64 = (0..3).map(|y| m.rate(x, y)).sum();
                assert!(row.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn flat_landscape_reproduces_q() {
        let l = Landscape::line(&[0.0; 3]).unwrap();
        for v in [Variant::M1, Variant::M2] {
            let m = m_at(&l, v, 0.3).unwrap();
            assert_eq!(m.rate(0, 1), 1.0);
            assert_eq!(m.rate(1, 1), -2.0);
        }
    }

    #[test]
    fn refuses_unrepresentable_rates() {
        let l = Landscape::line(&[0.0, 10.0]).unwrap();
        assert!(matches!(m_at(&l, Variant::M2, 0.01), Err(Error::TemperatureTooLow { .. })));
        assert!(matches!(m_at(&l, Variant::M1, 0.01), Err(Error::TemperatureTooLow { .. })));
        assert!(m_at(&l, Variant::M1, 0.1).is_ok());
        assert!(matches!(m_at(&l, Variant::M1, 0.0), Err(Error::Temperature(_))));
    }

    #[test]
    fn peskun_order() {
        let l3 = Landscape::line(&[0.0, 2.0, 1.0]).unwrap();
        let m1 = m_at(&l3, Variant::M1, 1.0).unwrap();
        let m2 = m_at(&l3, Variant::M2, 1.0).unwrap();
        assert!(peskun_dominates(&m2, &m1).unwrap());
        assert!(!peskun_dominates(&m1, &m2).unwrap());
        let other = m_at(&l3, Variant::M1, 2.0).unwrap();
        assert!(matches!(peskun_dominates(&m2, &other), Err(Error::Mismatch(_))));

        let flat = Landscape::line(&[0.0; 3]).unwrap();
        let (a, b) = (m_at(&flat, Variant::M1, 1.0).unwrap(), m_at(&flat, Variant::M2, 1.0).unwrap());
        assert!(peskun_dominates(&a, &b).unwrap() && peskun_dominates(&b, &a).unwrap());
    }

    #[test]
    fn dirichlet_two_state() {
        let l = Landscape::line(&[0.0, 1.0]).unwrap();
        let m2 = m_at(&l, Variant::M2, 1.0).unwrap();
        let m1 = m_at(&l, Variant::M1, 1.0).unwrap();
        assert!(close(dirichlet_form(&m2, &[0.0, 1.0]).unwrap(), 0.7311, 5e-5));
        assert!(close(dirichlet_form(&m1, &[0.0, 1.0]).unwrap(), 0.2689, 5e-5));
        assert_eq!(dirichlet_form(&m2, &[3.0, 3.0]).unwrap(), 0.0);
        assert!(dirichlet_form(&m2, &[1.0]).is_err());
    }
}

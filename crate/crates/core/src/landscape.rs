//! Optimization instances: a finite state set, a target function `U` and a
//! reversible proposal generator `Q` with stationary law `pi`.
//!
//! States are addressed by their zero-based index in [`Landscape::states`].
//! The target function is shifted at construction so that its minimum is
//! exactly zero; the subtracted amount is kept in [`Landscape::u_offset`].

use std::collections::{BTreeSet, VecDeque};
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on the detailed-balance residual after dividing by the
/// largest proposal rate.
pub const DETAILED_BALANCE_TOL: f64 = 1e-10;

/// Tolerance on the total mass of a [`Distribution`].
pub const DISTRIBUTION_SUM_TOL: f64 = 1e-12;

/// A probability vector over the states of a landscape.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Distribution(Vec<f64>);

impl Distribution {
    /// Wraps `probs` after checking nonnegativity and unit mass.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidDistribution(format!("entry {p} is not a probability")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > DISTRIBUTION_SUM_TOL {
            return Err(Error::InvalidDistribution(format!("mass {total} != 1")));
        }
        Ok(Self(probs))
    }

    /// Normalizes nonnegative weights into a distribution.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidDistribution(format!("weight {w} is not admissible")));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        Ok(Self(weights.into_iter().map(|w| w / total).collect()))
    }

    pub fn point_mass(len: usize, state: usize) -> Self {
        let mut probs = vec![0.0; len];
        probs[state] = 1.0;
        Self(probs)
    }

    pub fn uniform(len: usize) -> Self {
        Self(vec![1.0 / len as f64; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Total mass on `set`.
    pub fn mass(&self, set: &[usize]) -> f64 {
        set.iter().map(|&x| self.0[x]).sum()
    }
}

impl Index<usize> for Distribution {
    type Output = f64;

    fn index(&self, state: usize) -> &f64 {
        &self.0[state]
    }
}

/// On-disk form of a landscape. `Q` lists off-diagonal rates as
/// `[from, to, rate]` triples with zero-based indices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LandscapeDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub states: Vec<String>,
    #[serde(rename = "U")]
    pub u: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<Vec<f64>>,
    #[serde(rename = "Q")]
    pub q: Vec<(usize, usize, f64)>,
}

/// A validated-shape optimization instance `(X, U, Q, pi)`.
#[derive(Debug, Clone)]
pub struct Landscape {
    name: Option<String>,
    states: Vec<String>,
    u: Vec<f64>,
    pi: Vec<f64>,
    /// Positive off-diagonal rates, sorted by target state.
    adjacency: Vec<Vec<(usize, f64)>>,
    u_offset: f64,
}

/// Parses a landscape document and rejects reducible proposal chains.
pub fn load_landscape(document: &str) -> Result<Landscape> {
    let doc: LandscapeDocument = serde_json::from_str(document)?;
    Landscape::from_document(doc)
}

impl Landscape {
    /// Builds a landscape and checks that the proposal chain is irreducible.
    pub fn new(
        states: Vec<String>,
        u: Vec<f64>,
        rates: &[(usize, usize, f64)],
        pi: Option<Vec<f64>>,
    ) -> Result<Self> {
        let landscape = Self::new_unvalidated(states, u, rates, pi)?;
        if !landscape.is_irreducible() {
            return Err(Error::Reducible(
                "the graph of positive proposal rates is not strongly connected".into(),
            ));
        }
        Ok(landscape)
    }

    /// Builds a landscape with structural checks only (indices, signs,
    /// duplicates, `pi`). Irreducibility and detailed balance are left to
    /// [`validate`], which is how malformed instances get audited.
    pub fn new_unvalidated(
        states: Vec<String>,
        u: Vec<f64>,
        rates: &[(usize, usize, f64)],
        pi: Option<Vec<f64>>,
    ) -> Result<Self> {
        let n = states.len();
        if n == 0 {
            return Err(Error::Dimension("a landscape needs at least one state".into()));
        }
        if u.len() != n {
            return Err(Error::Dimension(format!("{} states but {} values of U", n, u.len())));
        }
        if let Some(v) = u.iter().find(|v| !v.is_finite()) {
            return Err(Error::Dimension(format!("U contains non-finite value {v}")));
        }
        let unique: BTreeSet<&str> = states.iter().map(String::as_str).collect();
        if unique.len() != n {
            return Err(Error::Dimension("state names must be unique".into()));
        }

        let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut seen = BTreeSet::new();
        for &(from, to, rate) in rates {
            for index in [from, to] {
                if index >= n {
                    return Err(Error::UnknownState { index, len: n });
                }
            }
            if from == to || !rate.is_finite() || rate < 0.0 {
                return Err(Error::InvalidRate { from, to, rate });
            }
            if !seen.insert((from, to)) {
                return Err(Error::DuplicateRate(from, to));
            }
            if rate > 0.0 {
                adjacency[from].push((to, rate));
            }
        }
        for row in &mut adjacency {
            row.sort_by_key(|&(to, _)| to);
        }

        let pi = match pi {
            Some(pi) => {
                if pi.len() != n {
                    return Err(Error::Dimension(format!("{} states but {} values of pi", n, pi.len())));
                }
                if let Some(p) = pi.iter().find(|p| !p.is_finite() || **p <= 0.0) {
                    return Err(Error::InvalidStationary(format!("entry {p} is not positive")));
                }
                let total: f64 = pi.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidStationary(format!("pi sums to {total}")));
                }
                pi.into_iter().map(|p| p / total).collect()
            }
            None => {
                if !is_symmetric(&adjacency) {
                    return Err(Error::MissingStationary);
                }
                vec![1.0 / n as f64; n]
            }
        };

        let u_offset = u.iter().copied().fold(f64::INFINITY, f64::min);
        let u = u.into_iter().map(|v| v - u_offset).collect();

        Ok(Self { name: None, states, u, pi, adjacency, u_offset })
    }

    pub fn from_document(doc: LandscapeDocument) -> Result<Self> {
        let mut landscape = Self::new(doc.states, doc.u, &doc.q, doc.pi)?;
        landscape.name = doc.name;
        Ok(landscape)
    }

    /// Birth-death chain on a line with unit rates between neighbours and
    /// uniform `pi`. States are named `s0, s1, ...`.
    pub fn line(u: &[f64]) -> Result<Self> {
        let n = u.len();
        let states = (0..n).map(|i| format!("s{i}")).collect();
        let mut rates = Vec::with_capacity(2 * n);
        for i in 1..n {
            rates.push((i - 1, i, 1.0));
            rates.push((i, i - 1, 1.0));
        }
        Self::new(states, u.to_vec(), &rates, None)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_name(&self, x: usize) -> &str {
        &self.states[x]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.states
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::UnknownStateName(name.to_string()))
    }

    /// Normalized target values (minimum zero).
    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn u_offset(&self) -> f64 {
        self.u_offset
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    /// Positive rates out of `x`, sorted by target.
    pub fn neighbors(&self, x: usize) -> &[(usize, f64)] {
        &self.adjacency[x]
    }

    /// `Q(x, y)` for `x != y`; zero off the support.
    pub fn rate(&self, x: usize, y: usize) -> f64 {
        self.adjacency[x]
            .binary_search_by_key(&y, |&(to, _)| to)
            .map(|i| self.adjacency[x][i].1)
            .unwrap_or(0.0)
    }

    /// `|Q(x, x)|`, the total proposal rate out of `x`.
    pub fn exit_rate(&self, x: usize) -> f64 {
        self.adjacency[x].iter().map(|&(_, q)| q).sum()
    }

    pub fn max_exit_rate(&self) -> f64 {
        (0..self.len()).map(|x| self.exit_rate(x)).fold(0.0, f64::max)
    }

    pub fn max_rate(&self) -> f64 {
        self.adjacency.iter().flatten().map(|&(_, q)| q).fold(0.0, f64::max)
    }

    /// Range `max U - min U`.
    pub fn range(&self) -> f64 {
        self.u.iter().copied().fold(0.0, f64::max)
    }

    pub fn global_minima(&self) -> Vec<usize> {
        (0..self.len()).filter(|&x| self.u[x] == 0.0).collect()
    }

    pub(crate) fn check_state(&self, x: usize) -> Result<()> {
        if x < self.len() {
            Ok(())
        } else {
            Err(Error::UnknownState { index: x, len: self.len() })
        }
    }

    /// Strong connectivity of the positive-rate graph.
    pub fn is_irreducible(&self) -> bool {
        let n = self.len();
        let mut reverse: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (x, row) in self.adjacency.iter().enumerate() {
            for &(y, _) in row {
                reverse[y].push(x);
            }
        }
        let forward: Vec<Vec<usize>> =
            self.adjacency.iter().map(|row| row.iter().map(|&(y, _)| y).collect()).collect();
        reaches_all(&forward, 0) && reaches_all(&reverse, 0)
    }

    /// Gibbs distribution `pi_T(x) ∝ exp(-U(x)/T) pi(x)`.
    pub fn gibbs(&self, temperature: f64) -> Result<Distribution> {
        check_temperature(temperature)?;
        let log_w: Vec<f64> = self
            .u
            .iter()
            .zip(&self.pi)
            .map(|(&u, &p)| -u / temperature + p.ln())
            .collect();
        let shift = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Distribution::from_weights(log_w.into_iter().map(|w| (w - shift).exp()).collect())
    }

    /// Normalizing constant `Z_T = sum_x exp(-U(x)/T) pi(x)`. With `min U = 0`
    /// it is bounded below by `pi(U_min)` and never underflows.
    pub fn partition(&self, temperature: f64) -> Result<f64> {
        check_temperature(temperature)?;
        Ok(self.u.iter().zip(&self.pi).map(|(&u, &p)| (-u / temperature).exp() * p).sum())
    }
}

pub(crate) fn check_temperature(temperature: f64) -> Result<()> {
    if temperature.is_finite() && temperature > 0.0 {
        Ok(())
    } else {
        Err(Error::Temperature(temperature))
    }
}

fn is_symmetric(adjacency: &[Vec<(usize, f64)>]) -> bool {
    adjacency.iter().enumerate().all(|(x, row)| {
        row.iter().all(|&(y, q)| {
            let back = adjacency[y]
                .binary_search_by_key(&x, |&(to, _)| to)
                .map(|i| adjacency[y][i].1)
                .unwrap_or(0.0);
            (q - back).abs() <= 1e-12 * q.max(back)
        })
    })
}

fn reaches_all(graph: &[Vec<usize>], start: usize) -> bool {
    let mut seen = vec![false; graph.len()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(x) = queue.pop_front() {
        for &y in &graph[x] {
            if !seen[y] {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Outcome of [`validate`].
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    /// `max |pi(x)Q(x,y) - pi(y)Q(y,x)|` over all pairs.
    pub max_residual: f64,
    /// `max_residual` divided by the largest proposal rate.
    pub scaled_residual: f64,
    pub detailed_balance: bool,
    pub irreducible: bool,
    pub normalized: bool,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.detailed_balance && self.irreducible && self.normalized
    }
}

/// Audits detailed balance, irreducibility and normalization.
pub fn validate(landscape: &Landscape) -> ValidationReport {
    let pi = landscape.pi();
    let mut max_residual: f64 = 0.0;
    for x in 0..landscape.len() {
        for &(y, q) in landscape.neighbors(x) {
            let residual = (pi[x] * q - pi[y] * landscape.rate(y, x)).abs();
            max_residual = max_residual.max(residual);
        }
    }
    let scale = landscape.max_rate();
    let scaled_residual = if scale > 0.0 { max_residual / scale } else { max_residual };
    let min_u = landscape.u().iter().copied().fold(f64::INFINITY, f64::min);
    let mass: f64 = pi.iter().sum();
    ValidationReport {
        max_residual,
        scaled_residual,
        detailed_balance: scaled_residual <= DETAILED_BALANCE_TOL,
        irreducible: landscape.is_irreducible(),
        normalized: min_u == 0.0 && (mass - 1.0).abs() <= DISTRIBUTION_SUM_TOL,
    }
}

/// Gibbs distribution at `temperature`; see [`Landscape::gibbs`].
pub fn gibbs(landscape: &Landscape, temperature: f64) -> Result<Distribution> {
    landscape.gibbs(temperature)
}

/// Scalar summaries of a landscape.
#[derive(Debug, Clone, Serialize)]
pub struct LandscapeConstants {
    /// `max U - min U`.
    pub r: f64,
    /// `pi(U_min)^{-1} - 1`.
    pub k: f64,
    /// Gap between the global minimum and the second energy level;
    /// `+inf` when `U` is constant.
    pub b: f64,
    /// Smallest uphill step out of a local minimum.
    pub delta: f64,
    pub u_min: Vec<usize>,
    pub u_min_loc: Vec<usize>,
    pub pi_min: Distribution,
    pub neighbors: Vec<Vec<usize>>,
}

pub fn summary_constants(landscape: &Landscape) -> LandscapeConstants {
    let n = landscape.len();
    let u = landscape.u();
    let pi = landscape.pi();
    let u_min = landscape.global_minima();
    let pi_u_min: f64 = u_min.iter().map(|&x| pi[x]).sum();
    let b = (0..n).filter(|&x| u[x] > 0.0).map(|x| u[x]).fold(f64::INFINITY, f64::min);

    let neighbors: Vec<Vec<usize>> =
        (0..n).map(|x| landscape.neighbors(x).iter().map(|&(y, _)| y).collect()).collect();
    let u_min_loc: Vec<usize> =
        (0..n).filter(|&x| neighbors[x].iter().all(|&y| u[y] >= u[x])).collect();
    let delta = u_min_loc
        .iter()
        .flat_map(|&x| neighbors[x].iter().map(move |&y| u[y] - u[x]))
        .fold(f64::INFINITY, f64::min);
    // a single state has no neighbours at all
    let delta = if delta.is_finite() { delta } else { 0.0 };

    let mut pi_min = vec![0.0; n];
    for &x in &u_min {
        pi_min[x] = pi[x] / pi_u_min;
    }

    LandscapeConstants {
        r: landscape.range(),
        k: (1.0 / pi_u_min - 1.0).max(0.0),
        b,
        delta,
        u_min,
        u_min_loc,
        pi_min: Distribution::from_weights(pi_min).expect("U_min is never empty"),
        neighbors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const L3: &str = r#"{"name":"L3","states":["s0","s1","s2"],"U":[0,2,1],
        "Q":[[0,1,1],[1,0,1],[1,2,1],[2,1,1]]}"#;

    #[test]
    fn loads_normalized_document() {
        let l = load_landscape(L3).unwrap();
        assert_eq!(l.name(), Some("L3"));
        assert_eq!(l.u(), &[0.0, 2.0, 1.0]);
        assert_eq!(l.u_offset(), 0.0);
        assert_eq!(l.pi(), &[1.0 / 3.0; 3]);
    }

    #[test]
    fn shifts_target_to_zero_minimum() {
        let doc = L3.replace("[0,2,1]", "[5,7,6]");
        let l = load_landscape(&doc).unwrap();
        assert_eq!(l.u(), &[0.0, 2.0, 1.0]);
        assert_eq!(l.u_offset(), 5.0);
    }

    #[test]
    fn zero_row_is_reducible() {
        let doc = r#"{"states":["a","b","c"],"U":[0,1,2],
            "Q":[[0,1,1],[1,0,1],[2,1,0]]}"#;
        assert!(matches!(load_landscape(doc), Err(Error::Reducible(_))));
    }

    #[test]
    fn rejects_malformed_documents() {
        assert!(matches!(load_landscape("{not json"), Err(Error::Parse(_))));
        let short_u = r#"{"states":["a","b"],"U":[0],"Q":[[0,1,1],[1,0,1]]}"#;
        assert!(matches!(load_landscape(short_u), Err(Error::Dimension(_))));
        let negative = r#"{"states":["a","b"],"U":[0,1],"Q":[[0,1,-1],[1,0,1]]}"#;
        assert!(matches!(load_landscape(negative), Err(Error::InvalidRate { .. })));
        let dup = r#"{"states":["a","b"],"U":[0,1],"Q":[[0,1,1],[0,1,1],[1,0,1]]}"#;
        assert!(matches!(load_landscape(dup), Err(Error::DuplicateRate(0, 1))));
        let out_of_range = r#"{"states":["a","b"],"U":[0,1],"Q":[[0,2,1],[1,0,1]]}"#;
        assert!(matches!(load_landscape(out_of_range), Err(Error::UnknownState { .. })));
        let asymmetric = r#"{"states":["a","b"],"U":[0,1],"Q":[[0,1,1],[1,0,2]]}"#;
        assert!(matches!(load_landscape(asymmetric), Err(Error::MissingStationary)));
    }

    #[test]
    fn validate_symmetric_line() {
        let report = validate(&Landscape::line(&[0.0, 2.0, 1.0]).unwrap());
        assert_eq!(report.max_residual, 0.0);
        assert!(report.passed());
    }

    #[test]
    fn validate_flags_non_reversible_cycle() {
        // clockwise rate 1, counter-clockwise rate 2, uniform pi
        let rates = [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0), (1, 0, 2.0), (2, 1, 2.0), (0, 2, 2.0)];
        let names = vec!["a".into(), "b".into(), "c".into()];
        let l = Landscape::new(names, vec![0.0; 3], &rates, Some(vec![1.0 / 3.0; 3])).unwrap();
        let report = validate(&l);
        assert!((report.max_residual - 1.0 / 3.0).abs() < 1e-15);
        assert!(!report.detailed_balance);
        assert!(report.irreducible);
        assert!(!report.passed());
    }

    #[test]
    fn validate_flags_disconnected_states() {
        let l = Landscape::new_unvalidated(vec!["a".into(), "b".into()], vec![0.0, 1.0], &[], None)
            .unwrap();
        let report = validate(&l);
        assert!(!report.irreducible);
        assert!(!report.passed());
    }

    #[test]
    fn gibbs_values() {
        let flat = Landscape::line(&[0.0; 4]).unwrap();
        assert_eq!(flat.gibbs(0.3).unwrap().as_slice(), flat.pi());

        let l3 = Landscape::line(&[0.0, 2.0, 1.0]).unwrap();
        let g = l3.gibbs(1.0).unwrap();
        for (got, want) in g.as_slice().iter().zip([0.66524, 0.09003, 0.24473]) {
            assert!((got - want).abs() < 5e-6, "{got} vs {want}");
        }
        let cold = l3.gibbs(0.01).unwrap();
        assert!((1.0 - cold[0]) < 1e-6);
        assert!(matches!(l3.gibbs(0.0), Err(Error::Temperature(_))));
        assert!(matches!(l3.gibbs(-1.0), Err(Error::Temperature(_))));
    }

    #[test]
    fn constants_of_small_lines() {
        let c = summary_constants(&Landscape::line(&[0.0, 2.0, 1.0]).unwrap());
        assert_eq!((c.r, c.k, c.b, c.delta), (2.0, 2.0, 1.0, 1.0));
        assert_eq!(c.u_min, vec![0]);
        assert_eq!(c.u_min_loc, vec![0, 2]);
        assert_eq!(c.pi_min.as_slice(), &[1.0, 0.0, 0.0]);

        let c = summary_constants(&Landscape::line(&[0.0, 3.0, 2.0, 3.0, 0.0]).unwrap());
        assert_eq!((c.r, c.b), (3.0, 2.0));
        assert!((c.k - 1.5).abs() < 1e-12);
        assert_eq!(c.u_min, vec![0, 4]);
        assert_eq!(c.pi_min.as_slice(), &[0.5, 0.0, 0.0, 0.0, 0.5]);

        let c = summary_constants(&Landscape::line(&[4.0; 3]).unwrap());
        assert_eq!((c.r, c.k, c.delta), (0.0, 0.0, 0.0));
        assert!(c.b.is_infinite());
        assert_eq!(c.u_min, vec![0, 1, 2]);
    }

    #[test]
    fn distribution_checks() {
        assert!(Distribution::new(vec![0.5, 0.5]).is_ok());
        assert!(Distribution::new(vec![0.5, 0.6]).is_err());
        assert!(Distribution::new(vec![-0.1, 1.1]).is_err());
        assert!(Distribution::from_weights(vec![0.0, 0.0]).is_err());
        assert_eq!(Distribution::point_mass(3, 1).as_slice(), &[0.0, 1.0, 0.0]);
    }
}

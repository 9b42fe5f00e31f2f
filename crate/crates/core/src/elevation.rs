//! Minimax path elevations and hill-climbing constants.
//!
//! `H1(x, y)` is the smallest achievable maximum of `U` over the nodes of a
//! path from `x` to `y`; `H2(x, y)` replaces node values by the edge weight
//! `min(U(u), U(v))`. Both are bottleneck shortest-path problems and are
//! solved with a Dijkstra search whose relaxation takes a maximum instead of
//! a sum.
//!
//! Witness paths are canonical: among all paths attaining the optimum, the
//! one with the fewest hops, then the lexicographically smallest sequence of
//! state indices.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::landscape::Landscape;

/// Which elevation functional to minimize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ElevationKind {
    /// Maximum node value along the path.
    Node,
    /// Maximum over consecutive pairs of `min(U(u), U(v))`.
    Edge,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElevationResult {
    pub value: f64,
    pub witness_path: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HillConstants {
    pub c_m1: f64,
    pub c_m2: f64,
    pub witness_pair_m1: (usize, usize),
    pub witness_pair_m2: (usize, usize),
    pub witness_path_m1: Vec<usize>,
    pub witness_path_m2: Vec<usize>,
}

/// Local minima grouped into constant-energy classes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalMinClasses {
    pub count: usize,
    pub classes: Vec<Vec<usize>>,
}

/// `Elev1` of an explicit path.
pub fn path_elev1(landscape: &Landscape, path: &[usize]) -> f64 {
    let u = landscape.u();
    path.iter().map(|&x| u[x]).fold(f64::NEG_INFINITY, f64::max)
}

/// `Elev2` of an explicit path; a single-node path has elevation `U(x)`.
pub fn path_elev2(landscape: &Landscape, path: &[usize]) -> f64 {
    let u = landscape.u();
    if path.len() == 1 {
        return u[path[0]];
    }
    path.windows(2).map(|w| u[w[0]].min(u[w[1]])).fold(f64::NEG_INFINITY, f64::max)
}

#[derive(PartialEq)]
struct Entry {
    level: f64,
    state: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.level.total_cmp(&self.level).then_with(|| other.state.cmp(&self.state))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Bottleneck values from `source` to every state. The source itself gets
/// `U(source)` for [`ElevationKind::Node`] and `-inf` for
/// [`ElevationKind::Edge`]; unreachable states get `+inf`.
pub fn bottleneck_from(landscape: &Landscape, source: usize, kind: ElevationKind) -> Vec<f64> {
    let u = landscape.u();
    let mut best = vec![f64::INFINITY; landscape.len()];
    let mut done = vec![false; landscape.len()];
    best[source] = match kind {
        ElevationKind::Node => u[source],
        ElevationKind::Edge => f64::NEG_INFINITY,
    };
    let mut heap = BinaryHeap::from([Entry { level: best[source], state: source }]);
    while let Some(Entry { level, state }) = heap.pop() {
        if done[state] {
            continue;
        }
        done[state] = true;
        for &(next, _) in landscape.neighbors(state) {
            let step = match kind {
                ElevationKind::Node => u[next],
                ElevationKind::Edge => u[state].min(u[next]),
            };
            let candidate = level.max(step);
            if candidate < best[next] {
                best[next] = candidate;
                heap.push(Entry { level: candidate, state: next });
            }
        }
    }
    best
}

fn admissible(landscape: &Landscape, kind: ElevationKind, level: f64, from: usize, to: usize) -> bool {
    let u = landscape.u();
    match kind {
        ElevationKind::Node => u[from] <= level && u[to] <= level,
        ElevationKind::Edge => u[from].min(u[to]) <= level,
    }
}

/// Canonical path from `x` to `y` whose elevation does not exceed `level`,
/// or `None` when no such path exists.
pub fn canonical_path(
    landscape: &Landscape,
    x: usize,
    y: usize,
    kind: ElevationKind,
    level: f64,
) -> Option<Vec<usize>> {
    let n = landscape.len();
    if kind == ElevationKind::Node && (landscape.u()[x] > level || landscape.u()[y] > level) {
        return None;
    }
    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); n];
    for from in 0..n {
        for &(to, _) in landscape.neighbors(from) {
            if admissible(landscape, kind, level, from, to) {
                incoming[to].push(from);
            }
        }
    }
    let mut hops = vec![usize::MAX; n];
    hops[y] = 0;
    let mut queue = VecDeque::from([y]);
    while let Some(v) = queue.pop_front() {
        for &w in &incoming[v] {
            if hops[w] == usize::MAX {
                hops[w] = hops[v] + 1;
                queue.push_back(w);
            }
        }
    }
    if hops[x] == usize::MAX {
        return None;
    }
    let mut path = vec![x];
    let mut current = x;
    while current != y {
        current = landscape
            .neighbors(current)
            .iter()
            .map(|&(next, _)| next)
            .find(|&next| {
                hops[next] != usize::MAX
                    && hops[next] + 1 == hops[current]
                    && admissible(landscape, kind, level, current, next)
            })
            .expect("a state on a shortest path has a successor");
        path.push(current);
    }
    Some(path)
}

fn elevation(landscape: &Landscape, x: usize, y: usize, kind: ElevationKind) -> Result<ElevationResult> {
    landscape.check_state(x)?;
    landscape.check_state(y)?;
    if x == y {
        return Ok(ElevationResult { value: landscape.u()[x], witness_path: vec![x] });
    }
    let value = bottleneck_from(landscape, x, kind)[y];
    if value.is_infinite() {
        return Err(Error::Reducible(format!(
            "{} is unreachable from {}",
            landscape.state_name(y),
            landscape.state_name(x)
        )));
    }
    let witness_path =
        canonical_path(landscape, x, y, kind, value).expect("optimal level admits a path");
    Ok(ElevationResult { value, witness_path })
}

/// `H1(x, y)`. For `x == y` the length-zero path gives `U(x)`.
pub fn h1(landscape: &Landscape, x: usize, y: usize) -> Result<ElevationResult> {
    elevation(landscape, x, y, ElevationKind::Node)
}

/// `H2(x, y)`. For `x == y` the length-zero path gives `U(x)`.
pub fn h2(landscape: &Landscape, x: usize, y: usize) -> Result<ElevationResult> {
    elevation(landscape, x, y, ElevationKind::Edge)
}

/// Both hill-climbing constants `c = max_{x != y} H(x, y) - U(x) - U(y)`.
///
/// Ties between pairs go to the last pair in lexicographic order. A single
/// state has no off-diagonal pairs; both constants are then reported as
/// `0` with the diagonal pair as witness.
pub fn hill_constants(landscape: &Landscape) -> HillConstants {
    let n = landscape.len();
    let u = landscape.u();
    let mut best = [(f64::NEG_INFINITY, (0, 0)), (f64::NEG_INFINITY, (0, 0))];
    for x in 0..n {
        let rows = [
            bottleneck_from(landscape, x, ElevationKind::Node),
            bottleneck_from(landscape, x, ElevationKind::Edge),
        ];
        for y in (0..n).filter(|&y| y != x) {
            for (slot, row) in best.iter_mut().zip(&rows) {
                let c = row[y] - u[x] - u[y];
                if c >= slot.0 {
                    *slot = (c, (x, y));
                }
            }
        }
    }
    if n == 1 {
        best = [(0.0, (0, 0)), (0.0, (0, 0))];
    }
    let [(c_m1, witness_pair_m1), (c_m2, witness_pair_m2)] = best;
    let witness_path_m1 = h1(landscape, witness_pair_m1.0, witness_pair_m1.1)
        .expect("witness states are valid")
        .witness_path;
    let witness_path_m2 = h2(landscape, witness_pair_m2.0, witness_pair_m2.1)
        .expect("witness states are valid")
        .witness_path;
    HillConstants { c_m1, c_m2, witness_pair_m1, witness_pair_m2, witness_path_m1, witness_path_m2 }
}

/// The second peak `s^{x,y}` along the canonical `H1` path.
pub fn second_peak(landscape: &Landscape, x: usize, y: usize) -> Result<f64> {
    if x == y {
        return Err(Error::InvalidArgument("second peak needs two distinct states".into()));
    }
    let ElevationResult { value, witness_path } = h1(landscape, x, y)?;
    let u = landscape.u();
    let peaks = witness_path.iter().filter(|&&z| u[z] == value).count();
    if peaks > 1 {
        return Ok(value);
    }
    Ok(witness_path
        .iter()
        .filter(|&&z| u[z] != value)
        .map(|&z| u[z])
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Whether every path from `x` to a strictly lower state climbs above `U(x)`.
pub fn is_local_minimum(landscape: &Landscape, x: usize) -> bool {
    let u = landscape.u();
    let mut seen = vec![false; landscape.len()];
    seen[x] = true;
    let mut queue = VecDeque::from([x]);
    while let Some(v) = queue.pop_front() {
        for &(w, _) in landscape.neighbors(v) {
            if seen[w] || u[w] > u[x] {
                continue;
            }
            if u[w] < u[x] {
                return false;
            }
            seen[w] = true;
            queue.push_back(w);
        }
    }
    true
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut root = x;
    while parent[root] != root {
        root = parent[root];
    }
    let mut current = x;
    while parent[current] != root {
        let next = parent[current];
        parent[current] = root;
        current = next;
    }
    root
}

/// Local minima up to constant-energy equivalence. Classes are listed in
/// order of their smallest member.
pub fn local_min_classes(landscape: &Landscape) -> LocalMinClasses {
    let n = landscape.len();
    let u = landscape.u();
    let minima: Vec<bool> = (0..n).map(|x| is_local_minimum(landscape, x)).collect();
    let mut parent: Vec<usize> = (0..n).collect();
    for x in (0..n).filter(|&x| minima[x]) {
        for &(y, _) in landscape.neighbors(x) {
            if minima[y] && u[y] == u[x] {
                let (a, b) = (find(&mut parent, x), find(&mut parent, y));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for x in (0..n).filter(|&x| minima[x]) {
        let root = find(&mut parent, x);
        if slot[root] == usize::MAX {
            slot[root] = classes.len();
            classes.push(Vec::new());
        }
        classes[slot[root]].push(x);
    }
    LocalMinClasses { count: classes.len(), classes }
}

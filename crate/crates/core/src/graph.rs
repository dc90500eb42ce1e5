//! Weighted graphs with dense symmetric storage and the elementary
//! density arithmetic everything else consumes.
//!
//! Weights live on unordered vertex pairs, the diagonal is identically
//! zero, and every stored weight must lie in the graph's configured
//! closed interval (`[0,1]` by default, `[-1,1]` for signed increments).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Mutex;

use crate::error::{Error, Result};

/// Closed interval the weights of a graph must lie in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightRange {
    pub lo: f64,
    pub hi: f64,
}

impl WeightRange {
    /// The default `[0, 1]` range.
    pub const UNIT: WeightRange = WeightRange { lo: 0.0, hi: 1.0 };
    /// The `[-1, 1]` range used by signed construction increments.
    pub const SIGNED: WeightRange = WeightRange { lo: -1.0, hi: 1.0 };

    pub fn contains(&self, w: f64) -> bool {
        w.is_finite() && w >= self.lo && w <= self.hi
    }
}

/// A subset of the vertex range `{0, …, n-1}` of some graph.
///
/// Members are kept sorted and de-duplicated, so serialized forms are
/// canonical and subset masks are reproducible.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    members: Vec<usize>,
}

impl VertexSet {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        VertexSet { members }
    }

    pub fn empty() -> Self {
        VertexSet { members: Vec::new() }
    }

    /// The full vertex set `{0, …, n-1}`.
    pub fn full(n: usize) -> Self {
        VertexSet { members: (0..n).collect() }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn is_subset_of(&self, other: &VertexSet) -> bool {
        self.members.iter().all(|&v| other.contains(v))
    }

    pub fn max_member(&self) -> Option<usize> {
        self.members.last().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        VertexSet::new(iter.into_iter().collect())
    }
}

pub(crate) type PairCacheKey = (Vec<usize>, Vec<usize>);
pub(crate) type PairCacheValue = (f64, Vec<usize>, Vec<usize>);

/// Symmetric edge-weighted graph on `n` vertices, zero diagonal, dense
/// `n × n` storage.
///
/// Immutable once built; all operations are pure, so values can be shared
/// across threads freely.
#[derive(Debug)]
pub struct WeightedGraph {
    n: usize,
    weights: Vec<f64>,
    range: WeightRange,
    // Memo for large exact-irregularity queries; see `irregularity`.
    // Purely an evaluation cache: identical queries are deterministic.
    pub(crate) pair_cache: Mutex<HashMap<PairCacheKey, PairCacheValue>>,
}

impl Clone for WeightedGraph {
    fn clone(&self) -> Self {
        WeightedGraph {
            n: self.n,
            weights: self.weights.clone(),
            range: self.range,
            pair_cache: Mutex::new(HashMap::new()),
        }
    }
}

impl PartialEq for WeightedGraph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.weights == other.weights && self.range == other.range
    }
}

impl WeightedGraph {
    pub fn new(n: usize, range: WeightRange) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("graph must have at least one vertex"));
        }
        if !range.contains(0.0) {
            return Err(Error::input("weight range must contain 0 (zero diagonal)"));
        }
        Ok(WeightedGraph {
            n,
            weights: vec![0.0; n * n],
            range,
            pair_cache: Mutex::new(HashMap::new()),
        })
    }

    /// Graph with every off-diagonal weight equal to `c`.
    pub fn constant(n: usize, c: f64, range: WeightRange) -> Result<Self> {
        let mut g = WeightedGraph::new(n, range)?;
        for i in 0..n {
            for j in (i + 1)..n {
                g.set_weight(i, j, c)?;
            }
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn range(&self) -> WeightRange {
        self.range
    }

    pub fn vertex_set(&self) -> VertexSet {
        VertexSet::full(self.n)
    }

    /// Set the weight of the unordered pair `{i, j}`.
    pub fn set_weight(&mut self, i: usize, j: usize, w: f64) -> Result<()> {
        if i >= self.n || j >= self.n {
            return Err(Error::input(format!(
                "vertex index out of range: ({i}, {j}) with n = {}",
                self.n
            )));
        }
        if i == j {
            if w != 0.0 {
                return Err(Error::input("diagonal weights must stay zero"));
            }
            return Ok(());
        }
        if !self.range.contains(w) {
            return Err(Error::input(format!(
                "weight {w} outside configured range [{}, {}]",
                self.range.lo, self.range.hi
            )));
        }
        self.weights[i * self.n + j] = w;
        self.weights[j * self.n + i] = w;
        self.pair_cache.lock().unwrap().clear();
        Ok(())
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.n..(i + 1) * self.n]
    }

    fn check_set(&self, s: &VertexSet, name: &str) -> Result<()> {
        if let Some(m) = s.max_member() {
            if m >= self.n {
                return Err(Error::input(format!(
                    "{name} contains vertex {m}, out of range for n = {}",
                    self.n
                )));
            }
        }
        Ok(())
    }

    /// Sum of weights over ordered pairs `(x, y) ∈ A × B`.
    ///
    /// Overlap is allowed; diagonal pairs contribute 0 by the zero-diagonal
    /// invariant.
    pub fn edge_sum(&self, a: &VertexSet, b: &VertexSet) -> Result<f64> {
        self.check_set(a, "A")?;
        self.check_set(b, "B")?;
        let mut total = 0.0;
        for x in a.iter() {
            let row = self.row(x);
            let mut s = 0.0;
            for y in b.iter() {
                s += row[y];
            }
            total += s;
        }
        Ok(total)
    }

    /// Edge density `e(A,B) / (|A||B|)`.
    pub fn density(&self, a: &VertexSet, b: &VertexSet) -> Result<f64> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::input("density undefined for empty sets"));
        }
        Ok(self.edge_sum(a, b)? / (a.len() as f64 * b.len() as f64))
    }
}

/// Parse the `wgraph` text format.
///
/// Line 1 is `wgraph <n>`, followed by `n` rows of `n` decimal weights.
/// Rejects asymmetric matrices, nonzero diagonals and out-of-range weights.
/// The weight range is inferred: `[0,1]` when no weight is negative,
/// `[-1,1]` otherwise.
pub fn parse_wgraph(text: &str) -> Result<WeightedGraph> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::input("empty graph file"))?;
    let mut parts = header.split_whitespace();
    match parts.next() {
        Some("wgraph") => {}
        _ => return Err(Error::input("graph file must start with 'wgraph <n>'")),
    }
    let n: usize = parts
        .next()
        .ok_or_else(|| Error::input("missing vertex count in header"))?
        .parse()
        .map_err(|_| Error::input("invalid vertex count in header"))?;
    if n == 0 {
        return Err(Error::input("vertex count must be positive"));
    }
    if parts.next().is_some() {
        return Err(Error::input("unexpected tokens after vertex count"));
    }

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    for (i, line) in lines.enumerate() {
        if i >= n {
            if line.trim().is_empty() {
                continue;
            }
            return Err(Error::input(format!("more than {n} weight rows")));
        }
        let row: Vec<f64> = line
            .split(' ')
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| Error::input(format!("row {i}: bad weight token '{tok}'")))
            })
            .collect::<Result<_>>()?;
        if row.len() != n {
            return Err(Error::input(format!(
                "row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        rows.push(row);
    }
    if rows.len() != n {
        return Err(Error::input(format!("expected {n} weight rows, got {}", rows.len())));
    }

    let mut any_negative = false;
    for (i, row) in rows.iter().enumerate() {
        if row[i] != 0.0 {
            return Err(Error::input(format!("nonzero diagonal entry at ({i}, {i})")));
        }
        for (j, &w) in row.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::input(format!("non-finite weight at ({i}, {j})")));
            }
            if w != rows[j][i] {
                return Err(Error::input(format!(
                    "asymmetric weights at ({i}, {j}): {w} vs {}",
                    rows[j][i]
                )));
            }
            if w < 0.0 {
                any_negative = true;
            }
        }
    }
    let range = if any_negative { WeightRange::SIGNED } else { WeightRange::UNIT };
    let mut g = WeightedGraph::new(n, range)?;
    for i in 0..n {
        for j in (i + 1)..n {
            g.set_weight(i, j, rows[i][j])?;
        }
    }
    Ok(g)
}

/// Render a graph in the `wgraph` text format. Round-trips bit-exactly
/// through `parse_wgraph` (shortest round-trip decimals).
pub fn write_wgraph(g: &WeightedGraph) -> String {
    let n = g.n();
    let mut out = String::new();
    let _ = writeln!(out, "wgraph {n}");
    for i in 0..n {
        let row = g.row(i);
        for (j, w) in row.iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{w}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> WeightedGraph {
        WeightedGraph::constant(n, 1.0, WeightRange::UNIT).unwrap()
    }

    #[test]
    fn edge_sum_complete_graph_counts_ordered_pairs() {
        let g = complete(3);
        let all = g.vertex_set();
        assert_eq!(g.edge_sum(&all, &all).unwrap(), 6.0);
    }

    #[test]
    fn edge_sum_empty_side_is_zero() {
        let g = complete(4);
        let all = g.vertex_set();
        assert_eq!(g.edge_sum(&VertexSet::empty(), &all).unwrap(), 0.0);
    }

    #[test]
    fn edge_sum_single_cross_edge() {
        let mut g = WeightedGraph::new(4, WeightRange::UNIT).unwrap();
        g.set_weight(0, 2, 1.0).unwrap();
        let a = VertexSet::new(vec![0, 1]);
        let b = VertexSet::new(vec![2, 3]);
        assert_eq!(g.edge_sum(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn edge_sum_is_symmetric_in_arguments() {
        let mut g = WeightedGraph::new(5, WeightRange::UNIT).unwrap();
        g.set_weight(0, 3, 0.25).unwrap();
        g.set_weight(1, 2, 0.5).unwrap();
        g.set_weight(2, 4, 0.75).unwrap();
        let a = VertexSet::new(vec![0, 1, 2]);
        let b = VertexSet::new(vec![2, 3, 4]);
        assert_eq!(g.edge_sum(&a, &b).unwrap(), g.edge_sum(&b, &a).unwrap());
    }

    #[test]
    fn edge_sum_rejects_out_of_range_vertex() {
        let g = complete(3);
        let bad = VertexSet::new(vec![0, 7]);
        assert!(matches!(g.edge_sum(&bad, &g.vertex_set()), Err(Error::Input(_))));
    }

    #[test]
    fn density_of_constant_graph() {
        let g = WeightedGraph::constant(6, 0.5, WeightRange::UNIT).unwrap();
        let a = VertexSet::new(vec![0, 1, 2]);
        let b = VertexSet::new(vec![3, 4, 5]);
        assert_eq!(g.density(&a, &b).unwrap(), 0.5);
    }

    #[test]
    fn density_single_cross_edge_quarter() {
        let mut g = WeightedGraph::new(4, WeightRange::UNIT).unwrap();
        g.set_weight(0, 2, 1.0).unwrap();
        let a = VertexSet::new(vec![0, 1]);
        let b = VertexSet::new(vec![2, 3]);
        assert_eq!(g.density(&a, &b).unwrap(), 0.25);
    }

    #[test]
    fn density_whole_graph_excludes_diagonal() {
        let n = 7;
        let g = complete(n);
        let all = g.vertex_set();
        let d = g.density(&all, &all).unwrap();
        assert!((d - (n as f64 - 1.0) / n as f64).abs() < 1e-12);
    }

    #[test]
    fn density_rejects_empty_side() {
        let g = complete(3);
        assert!(matches!(
            g.density(&VertexSet::empty(), &g.vertex_set()),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn diagonal_weights_stay_zero() {
        let mut g = WeightedGraph::new(3, WeightRange::UNIT).unwrap();
        assert!(g.set_weight(1, 1, 0.5).is_err());
        assert!(g.set_weight(1, 1, 0.0).is_ok());
    }

    #[test]
    fn signed_range_accepts_negative_weights() {
        let mut g = WeightedGraph::new(2, WeightRange::SIGNED).unwrap();
        g.set_weight(0, 1, -0.25).unwrap();
        assert_eq!(g.weight(1, 0), -0.25);
        let mut unit = WeightedGraph::new(2, WeightRange::UNIT).unwrap();
        assert!(unit.set_weight(0, 1, -0.25).is_err());
    }

    #[test]
    fn wgraph_round_trip_is_bit_exact() {
        let mut g = WeightedGraph::new(5, WeightRange::UNIT).unwrap();
        g.set_weight(0, 1, 1.0 / 3.0).unwrap();
        g.set_weight(2, 4, 0.1).unwrap();
        g.set_weight(3, 4, 0.7500001).unwrap();
        let text = write_wgraph(&g);
        let h = parse_wgraph(&text).unwrap();
        assert_eq!(g, h);
        assert_eq!(write_wgraph(&h), text);
    }

    #[test]
    fn wgraph_parser_rejects_asymmetry_and_diagonal() {
        let asym = "wgraph 2\n0 0.5\n0.25 0\n";
        assert!(matches!(parse_wgraph(asym), Err(Error::Input(_))));
        let diag = "wgraph 2\n0.5 0\n0 0\n";
        assert!(matches!(parse_wgraph(diag), Err(Error::Input(_))));
    }

    #[test]
    fn wgraph_parser_infers_signed_range() {
        let text = "wgraph 2\n0 -0.5\n-0.5 0\n";
        let g = parse_wgraph(text).unwrap();
        assert_eq!(g.range(), WeightRange::SIGNED);
    }
}

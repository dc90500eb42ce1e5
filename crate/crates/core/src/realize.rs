//! Randomized rounding of weighted graphs to unweighted ones, the exact
//! subset-deviation check between two graphs, and the induced
//! irregularity perturbation bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::deviation::max_bilinear_deviation;
use crate::error::{Error, Result};
use crate::graph::{VertexSet, WeightRange, WeightedGraph};
use crate::irregularity::{irreg_exact, irreg_partition};
use crate::partition::VertexPartition;

/// Largest vertex count for the exact deviation enumeration.
pub const DEVIATION_CAP: usize = 12;

/// Round every unordered pair independently to an edge with probability
/// equal to its weight. Deterministic for a given seed.
pub fn round_to_unweighted(g: &WeightedGraph, seed: u64) -> Result<WeightedGraph> {
    let n = g.n();
    for i in 0..n {
        for j in (i + 1)..n {
            let w = g.weight(i, j);
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::input(format!(
                    "weight {w} at ({i}, {j}) outside [0, 1]"
                )));
            }
        }
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut out = WeightedGraph::new(n, WeightRange::UNIT)?;
    for i in 0..n {
        for j in (i + 1)..n {
            let edge = rng.gen::<f64>() < g.weight(i, j);
            if edge {
                out.set_weight(i, j, 1.0)?;
            }
        }
    }
    Ok(out)
}

/// Exact maximum of |e_g(A,B) − e_g2(A,B)| over all subset pairs A, B.
///
/// Row subsets are enumerated; for a fixed A the optimal B is the
/// positive-part or negative-part set of the difference row sums, which
/// collapses the 2^(2N) search to 2^N·N.
pub fn max_deviation_exact(g: &WeightedGraph, g2: &WeightedGraph) -> Result<f64> {
    if g.n() != g2.n() {
        return Err(Error::input("graphs must share a vertex set"));
    }
    let n = g.n();
    if n > DEVIATION_CAP {
        return Err(Error::capacity(format!(
            "exact deviation check limited to {DEVIATION_CAP} vertices, got {n}"
        )));
    }
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| g.weight(i, j) - g2.weight(i, j)).collect())
        .collect();
    let opt = max_bilinear_deviation(&cols, true);
    let a: VertexSet = (0..n).filter(|&i| opt.enum_mask >> i & 1 == 1).collect();
    let b: VertexSet = opt.other_set.iter().copied().collect();
    Ok((g.edge_sum(&a, &b)? - g2.edge_sum(&a, &b)?).abs())
}

/// What the perturbation bound is evaluated against.
pub enum GapTarget<'a> {
    Pair(&'a VertexSet, &'a VertexSet),
    Partition(&'a VertexPartition),
}

/// One perturbation comparison: the measured irregularity gap and the
/// bound it must stay below (2t for a pair, 2k²t for a k-part partition).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapReport {
    pub gap: f64,
    pub bound: f64,
    /// The exact subset deviation t between the two graphs.
    pub t: f64,
}

/// Compare the irregularity of a pair or partition across two graphs
/// whose subset deviation is t: the gap is at most 2t per pair, hence at
/// most 2k²t for a partition with k parts.
pub fn perturbation_irreg_gap(
    g: &WeightedGraph,
    g2: &WeightedGraph,
    target: GapTarget<'_>,
) -> Result<GapReport> {
    let t = max_deviation_exact(g, g2)?;
    match target {
        GapTarget::Pair(u, w) => {
            let a = irreg_exact(g, u, w)?.value;
            let b = irreg_exact(g2, u, w)?.value;
            Ok(GapReport { gap: (a - b).abs(), bound: 2.0 * t, t })
        }
        GapTarget::Partition(p) => {
            let (a, _) = irreg_partition(g, p)?;
            let (b, _) = irreg_partition(g2, p)?;
            let k = p.num_blocks() as f64;
            Ok(GapReport { gap: (a - b).abs(), bound: 2.0 * k * k * t, t })
        }
    }
}

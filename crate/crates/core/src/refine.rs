//! Witness-driven partition refinement with mean-square-density
//! accounting.
//!
//! One refinement step computes exact irregularity witnesses for every
//! block pair and splits each block by the Boolean atoms of the witness
//! subsets that land in it. With k blocks the refined partition has at
//! most k·2^(k+1) blocks, and the mean square density rises by at least
//! 4z² when the partition's irregularity is z·n².

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{VertexSet, WeightedGraph};
use crate::irregularity::{
    irreg_partition_with_cap, IrregularityWitness, DEFAULT_ENUMERATION_CAP,
};
use crate::partition::{mean_square_density, write_partition, VertexPartition};

/// Witness values at or below this threshold are treated as zero and do
/// not split blocks. Absorbs the last-ulp noise of non-dyadic densities.
const ZERO_WITNESS_THRESHOLD: f64 = 1e-12;

/// Record of one refinement run: the partition sequence with per-level
/// mean square density, exact irregularity, and witnesses.
#[derive(Debug, Clone)]
pub struct RefinementRun {
    pub partitions: Vec<VertexPartition>,
    pub q_values: Vec<f64>,
    pub irreg_values: Vec<f64>,
    pub witnesses: Vec<BTreeMap<(usize, usize), IrregularityWitness>>,
    pub epsilon: f64,
    /// True when the run stopped at the step limit instead of reaching
    /// irregularity ≤ ε·n².
    pub hit_step_limit: bool,
}

impl RefinementRun {
    pub fn steps(&self) -> usize {
        self.partitions.len() - 1
    }

    pub fn final_partition(&self) -> &VertexPartition {
        self.partitions.last().expect("runs have at least one level")
    }

    pub fn final_irregularity(&self) -> f64 {
        *self.irreg_values.last().expect("runs have at least one level")
    }

    /// Text serialization: a `run` header followed by one `step` line and
    /// the partition (in partition format) per recorded level.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "run eps={} steps={}", self.epsilon, self.steps());
        for (i, p) in self.partitions.iter().enumerate() {
            let _ = writeln!(
                out,
                "step {i} parts={} q={} irreg={}",
                p.num_blocks(),
                self.q_values[i],
                self.irreg_values[i]
            );
            out.push_str(&write_partition(p));
        }
        out
    }
}

/// Collect the nonzero witness subsets of one level, in block-pair order.
fn witness_subsets(
    witnesses: &BTreeMap<(usize, usize), IrregularityWitness>,
) -> Vec<VertexSet> {
    let mut subsets = Vec::new();
    for ((i, j), wit) in witnesses {
        if i > j || wit.value <= ZERO_WITNESS_THRESHOLD {
            continue;
        }
        subsets.push(wit.u.clone());
        subsets.push(wit.w.clone());
    }
    subsets
}

/// One refinement step: returns the refined partition and the gain in
/// mean square density.
pub fn refine_step(g: &WeightedGraph, p: &VertexPartition) -> Result<(VertexPartition, f64)> {
    refine_step_with_cap(g, p, DEFAULT_ENUMERATION_CAP)
}

pub fn refine_step_with_cap(
    g: &WeightedGraph,
    p: &VertexPartition,
    cap: usize,
) -> Result<(VertexPartition, f64)> {
    let (_, wits) = irreg_partition_with_cap(g, p, cap)?;
    let next = p.atoms_from_subsets(&witness_subsets(&wits))?;
    let q0 = mean_square_density(g, p)?;
    let q1 = mean_square_density(g, &next)?;
    Ok((next, q1 - q0))
}

/// Iterate refinement from the trivial partition until the exact
/// irregularity drops to eps·n² or `max_steps` refinements have been
/// performed. Hitting the step limit is a flagged outcome, not an error.
pub fn regularize(g: &WeightedGraph, eps: f64, max_steps: usize) -> Result<RefinementRun> {
    regularize_with_cap(g, eps, max_steps, DEFAULT_ENUMERATION_CAP)
}

pub fn regularize_with_cap(
    g: &WeightedGraph,
    eps: f64,
    max_steps: usize,
    cap: usize,
) -> Result<RefinementRun> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::input("eps must satisfy 0 < eps < 1"));
    }
    let n = g.n();
    let threshold = eps * (n * n) as f64;
    let mut run = RefinementRun {
        partitions: vec![VertexPartition::trivial(n)?],
        q_values: Vec::new(),
        irreg_values: Vec::new(),
        witnesses: Vec::new(),
        epsilon: eps,
        hit_step_limit: false,
    };
    loop {
        let p = run.partitions.last().unwrap();
        let (irr, wits) = irreg_partition_with_cap(g, p, cap)?;
        run.q_values.push(mean_square_density(g, p)?);
        run.irreg_values.push(irr);
        run.witnesses.push(wits);
        if irr <= threshold {
            break;
        }
        if run.steps() >= max_steps {
            run.hit_step_limit = true;
            break;
        }
        let subsets = witness_subsets(run.witnesses.last().unwrap());
        let next = p.atoms_from_subsets(&subsets)?;
        run.partitions.push(next);
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightRange;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn complete_bipartite_halves() -> WeightedGraph {
        let mut g = WeightedGraph::new(4, WeightRange::UNIT).unwrap();
        for i in [0usize, 1] {
            for j in [2usize, 3] {
                g.set_weight(i, j, 1.0).unwrap();
            }
        }
        g
    }

    fn random_graph(rng: &mut ChaCha12Rng, n: usize, zero_one: bool) -> WeightedGraph {
        let mut g = WeightedGraph::new(n, WeightRange::UNIT).unwrap();
        for i in 0..n {
            for j in (i + 1)..n {
                let w = if zero_one {
                    if rng.gen_bool(0.5) {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    rng.gen::<f64>()
                };
                g.set_weight(i, j, w).unwrap();
            }
        }
        g
    }

    #[test]
    fn singleton_partition_is_a_fixed_point() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let g = random_graph(&mut rng, 7, false);
        let p = VertexPartition::singletons(7).unwrap();
        let (next, dq) = refine_step(&g, &p).unwrap();
        assert_eq!(next, p);
        assert_eq!(dq, 0.0);
    }

    #[test]
    fn complete_bipartite_splits_into_halves() {
        let g = complete_bipartite_halves();
        let p = VertexPartition::trivial(4).unwrap();
        let (next, dq) = refine_step(&g, &p).unwrap();
        assert_eq!(next.num_blocks(), 2);
        let blocks: Vec<_> = next.blocks().iter().map(|b| b.members().to_vec()).collect();
        assert!(blocks.contains(&vec![0, 1]) && blocks.contains(&vec![2, 3]));
        // Δq = 1/2 − 1/4, and z·n² = 2 so 4z² = 1/16
        assert!((dq - 0.25).abs() < 1e-12);
        assert!(dq >= 4.0 * (2.0f64 / 16.0).powi(2) - 1e-9);
    }

    #[test]
    fn refine_step_contract_on_random_graphs() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        for _ in 0..15 {
            let n = rng.gen_range(4..14);
            let g = random_graph(&mut rng, n, false);
            let mut p = VertexPartition::trivial(n).unwrap();
            for _ in 0..2 {
                let k = p.num_blocks();
                let (irr, _) = irreg_partition_with_cap(&g, &p, 24).unwrap();
                let z = irr / (n * n) as f64;
                let (next, dq) = refine_step(&g, &p).unwrap();
                assert!(dq >= 4.0 * z * z - 1e-9, "dq {dq} vs 4z² {}", 4.0 * z * z);
                assert!(next.num_blocks() <= k * (1 << (k + 1)).min(1 << 20));
                assert!(next.is_refinement_of(&p));
                if next == p {
                    break;
                }
                p = next;
            }
        }
    }

    #[test]
    fn regularize_constant_graph_zero_steps() {
        let g = WeightedGraph::constant(6, 0.5, WeightRange::UNIT).unwrap();
        let run = regularize(&g, 0.25, 5).unwrap();
        assert_eq!(run.steps(), 0);
        assert_eq!(run.partitions.len(), 1);
        assert!(!run.hit_step_limit);
        assert!(run.final_irregularity() <= 0.25 * 36.0);
    }

    #[test]
    fn regularize_accepts_trivial_partition_for_quarter_eps() {
        // irreg(V,V) ≤ n²/4 always, so eps ≥ 1/4 stops immediately.
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        for _ in 0..10 {
            let n = rng.gen_range(3..12);
            let g = random_graph(&mut rng, n, true);
            let run = regularize(&g, 0.25, 3).unwrap();
            assert_eq!(run.steps(), 0);
            assert!(run.final_irregularity() <= 0.25 * (n * n) as f64);
        }
    }

    #[test]
    fn regularize_records_monotone_q_and_refinements() {
        let mut rng = ChaCha12Rng::seed_from_u64(33);
        for _ in 0..10 {
            let n = rng.gen_range(6..16);
            let g = random_graph(&mut rng, n, true);
            let run = regularize(&g, 0.05, 3).unwrap();
            for w in run.q_values.windows(2) {
                assert!(w[1] >= w[0] - 1e-12);
            }
            for pair in run.partitions.windows(2) {
                assert!(pair[1].is_refinement_of(&pair[0]));
            }
            if !run.hit_step_limit {
                assert!(run.final_irregularity() <= 0.05 * (n * n) as f64);
            }
            // q stays in [d², d]
            let all = g.vertex_set();
            let d = g.density(&all, &all).unwrap();
            for &q in &run.q_values {
                assert!(q >= d * d - 1e-12 && q <= d + 1e-12);
            }
        }
    }

    #[test]
    fn step_limit_is_flagged_not_an_error() {
        let g = complete_bipartite_halves();
        // eps so small that one step cannot reach it, with max_steps = 0
        let run = regularize(&g, 1e-6, 0).unwrap();
        assert!(run.hit_step_limit);
        assert_eq!(run.steps(), 0);
    }

    #[test]
    fn run_serialization_shape() {
        let g = complete_bipartite_halves();
        let run = regularize(&g, 0.01, 2).unwrap();
        let text = run.to_text();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("run eps=0.01 steps="));
        assert!(text.contains("step 0 parts=1 q=0.25 irreg=2"));
        // every level contributes a step line and block lines
        let step_lines = text.lines().filter(|l| l.starts_with("step ")).count();
        assert_eq!(step_lines, run.partitions.len());
    }
}

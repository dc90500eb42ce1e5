//! Vertex partitions, refinement operations, and mean square density.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{VertexSet, WeightedGraph};

/// Ordered list of disjoint, nonempty vertex blocks covering `{0, …, n-1}`.
///
/// Blocks keep their insertion order so serialized partitions round-trip
/// bit-exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexPartition {
    blocks: Vec<VertexSet>,
    n: usize,
}

impl VertexPartition {
    pub fn new(blocks: Vec<VertexSet>) -> Result<Self> {
        let mut seen: Vec<usize> = Vec::new();
        for (idx, b) in blocks.iter().enumerate() {
            if b.is_empty() {
                return Err(Error::input(format!("block {idx} is empty")));
            }
            seen.extend(b.iter());
        }
        let n = seen.len();
        seen.sort_unstable();
        for (expect, got) in seen.iter().enumerate() {
            if *got != expect {
                return Err(Error::input(
                    "blocks must be disjoint and cover {0, …, n-1} exactly",
                ));
            }
        }
        Ok(VertexPartition { blocks, n })
    }

    /// The trivial one-block partition of `{0, …, n-1}`.
    pub fn trivial(n: usize) -> Result<Self> {
        VertexPartition::new(vec![VertexSet::full(n)])
    }

    /// The partition into singletons.
    pub fn singletons(n: usize) -> Result<Self> {
        VertexPartition::new((0..n).map(|v| VertexSet::new(vec![v])).collect())
    }

    pub fn blocks(&self) -> &[VertexSet] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Index of the block containing each vertex.
    pub fn block_index(&self) -> Vec<usize> {
        let mut idx = vec![0usize; self.n];
        for (b, block) in self.blocks.iter().enumerate() {
            for v in block.iter() {
                idx[v] = b;
            }
        }
        idx
    }

    fn check_same_ground(&self, other: &VertexPartition) -> Result<()> {
        if self.n != other.n {
            return Err(Error::input(format!(
                "partitions cover different vertex sets ({} vs {})",
                self.n, other.n
            )));
        }
        Ok(())
    }

    /// True iff every block of `self` lies inside a block of `coarser`.
    pub fn is_refinement_of(&self, coarser: &VertexPartition) -> bool {
        if self.n != coarser.n {
            return false;
        }
        let idx = coarser.block_index();
        self.blocks.iter().all(|b| {
            let mut it = b.iter();
            let first = idx[it.next().expect("blocks are nonempty")];
            it.all(|v| idx[v] == first)
        })
    }

    /// Common refinement: blocks are the nonempty intersections `P_i ∩ Q_j`,
    /// in `(i, j)` order.
    pub fn common_refinement(&self, other: &VertexPartition) -> Result<VertexPartition> {
        self.check_same_ground(other)?;
        let other_idx = other.block_index();
        let mut blocks = Vec::new();
        for p in &self.blocks {
            let mut cells: HashMap<usize, Vec<usize>> = HashMap::new();
            let mut order: Vec<usize> = Vec::new();
            for v in p.iter() {
                let j = other_idx[v];
                let cell = cells.entry(j).or_insert_with(|| {
                    order.push(j);
                    Vec::new()
                });
                cell.push(v);
            }
            order.sort_unstable();
            for j in order {
                blocks.push(VertexSet::new(cells.remove(&j).unwrap()));
            }
        }
        VertexPartition::new(blocks)
    }

    /// Refine each block by the Boolean algebra generated by the given
    /// subsets. Every subset must lie inside a single block; the nonempty
    /// Venn cells replace that block, ordered by smallest member.
    pub fn atoms_from_subsets(&self, subsets: &[VertexSet]) -> Result<VertexPartition> {
        let idx = self.block_index();
        // Assign each nonempty subset to its home block.
        let mut per_block: Vec<Vec<&VertexSet>> = vec![Vec::new(); self.blocks.len()];
        for (k, s) in subsets.iter().enumerate() {
            if s.is_empty() {
                continue;
            }
            let mut it = s.iter();
            let first = it.next().unwrap();
            if first >= self.n {
                return Err(Error::input(format!("subset {k} out of vertex range")));
            }
            let home = idx[first];
            for v in it {
                if v >= self.n || idx[v] != home {
                    return Err(Error::input(format!(
                        "subset {k} straddles two blocks of the partition"
                    )));
                }
            }
            per_block[home].push(s);
        }

        let mut blocks = Vec::new();
        for (b, block) in self.blocks.iter().enumerate() {
            let subs = &per_block[b];
            if subs.is_empty() {
                blocks.push(block.clone());
                continue;
            }
            // Signature of v = membership pattern across the subsets.
            let mut cells: HashMap<u64, Vec<usize>> = HashMap::new();
            let mut order: Vec<(usize, u64)> = Vec::new();
            assert!(subs.len() <= 64, "atom refinement limited to 64 subsets per block");
            for v in block.iter() {
                let mut sig = 0u64;
                for (k, s) in subs.iter().enumerate() {
                    if s.contains(v) {
                        sig |= 1 << k;
                    }
                }
                cells.entry(sig).or_insert_with(|| {
                    order.push((v, sig));
                    Vec::new()
                }).push(v);
            }
            for (_, sig) in order {
                blocks.push(VertexSet::new(cells.remove(&sig).unwrap()));
            }
        }
        VertexPartition::new(blocks)
    }
}

/// Mean square density `q(P) = Σ_{i,j} (|V_i||V_j|/n²) d(V_i,V_j)²`,
/// summed over ordered block pairs including the diagonal.
pub fn mean_square_density(g: &WeightedGraph, p: &VertexPartition) -> Result<f64> {
    if p.n() != g.n() {
        return Err(Error::input("partition does not cover the graph's vertex set"));
    }
    let n2 = (g.n() * g.n()) as f64;
    let mut q = 0.0;
    for bi in p.blocks() {
        for bj in p.blocks() {
            let d = g.density(bi, bj)?;
            q += (bi.len() * bj.len()) as f64 / n2 * d * d;
        }
    }
    Ok(q)
}

/// Parse the partition text format: one line per block,
/// `block <id>: v1 v2 …` with ascending vertex indices.
pub fn parse_partition(text: &str) -> Result<VertexPartition> {
    let mut blocks = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rest = line
            .strip_prefix("block ")
            .ok_or_else(|| Error::input(format!("line {lineno}: expected 'block <id>: …'")))?;
        let (id_str, verts) = rest
            .split_once(':')
            .ok_or_else(|| Error::input(format!("line {lineno}: missing ':'")))?;
        let id: usize = id_str
            .trim()
            .parse()
            .map_err(|_| Error::input(format!("line {lineno}: bad block id")))?;
        if id != blocks.len() {
            return Err(Error::input(format!(
                "line {lineno}: block ids must be consecutive from 0"
            )));
        }
        let members: Vec<usize> = verts
            .split_whitespace()
            .map(|tok| {
                tok.parse::<usize>()
                    .map_err(|_| Error::input(format!("line {lineno}: bad vertex '{tok}'")))
            })
            .collect::<Result<_>>()?;
        if members.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::input(format!(
                "line {lineno}: vertex indices must be strictly ascending"
            )));
        }
        blocks.push(VertexSet::new(members));
    }
    VertexPartition::new(blocks)
}

pub fn write_partition(p: &VertexPartition) -> String {
    let mut out = String::new();
    for (id, block) in p.blocks().iter().enumerate() {
        let _ = write!(out, "block {id}:");
        for v in block.iter() {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}

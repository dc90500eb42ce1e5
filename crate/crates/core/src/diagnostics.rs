//! Accounting diagnostics for candidate partitions against a
//! construction trace: the blue/red majority coloring per level, the
//! closeness-to-refinement score, and the counting comparisons whose
//! constants only bind at full scale (their premises gate is reported
//! alongside every row).

use std::fmt;

use crate::construct::{verify_construction, ConstructionTrace};
use crate::error::{Error, Result};
use crate::graph::VertexSet;
use crate::irregularity::irreg_partition_with_cap;
use crate::partition::VertexPartition;

/// Blue fractions per level plus the per-part blue chains.
#[derive(Debug, Clone)]
pub struct ColorTrace {
    pub levels: Vec<LevelColors>,
    pub parts: Vec<PartChain>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelColors {
    pub v_blue_fraction: f64,
    pub w_blue_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct PartChain {
    /// Blue subset of this part per level (never regrows).
    pub blue: Vec<VertexSet>,
    /// Last level with blue vertices; None when the part is never blue.
    pub last_blue_level: Option<usize>,
}

impl ColorTrace {
    /// i_S with the never-blue convention (0) used by the counting
    /// classification.
    fn last_blue_or_zero(&self, part: usize) -> usize {
        self.parts[part].last_blue_level.unwrap_or(0)
    }
}

/// Majority coloring: a vertex is blue at level ℓ when its candidate part
/// has a strict majority inside the vertex's level-ℓ part.
pub fn color_trace(trace: &ConstructionTrace, candidate: &VertexPartition) -> Result<ColorTrace> {
    if candidate.n() != trace.total_vertices() {
        return Err(Error::input("candidate must partition both sides of the trace"));
    }
    let s = trace.steps();
    let n = trace.n_side as f64;
    let mut parts: Vec<PartChain> =
        (0..candidate.num_blocks()).map(|_| PartChain { blue: Vec::new(), last_blue_level: None }).collect();
    let mut levels = Vec::new();
    for level in 0..=s {
        let mut v_blue = 0usize;
        let mut w_blue = 0usize;
        for (pi, block) in candidate.blocks().iter().enumerate() {
            // member counts per (side, level part)
            let mut counts = std::collections::HashMap::new();
            for v in block.iter() {
                *counts.entry(trace.part_of(level, v)).or_insert(0usize) += 1;
            }
            let half = block.len();
            let blue: VertexSet = block
                .iter()
                .filter(|&v| counts[&trace.part_of(level, v)] * 2 > half)
                .collect();
            for v in blue.iter() {
                if v < trace.n_side {
                    v_blue += 1;
                } else {
                    w_blue += 1;
                }
            }
            if !blue.is_empty() {
                parts[pi].last_blue_level = Some(level);
            }
            parts[pi].blue.push(blue);
        }
        levels.push(LevelColors {
            v_blue_fraction: v_blue as f64 / n,
            w_blue_fraction: w_blue as f64 / n,
        });
    }
    Ok(ColorTrace { levels, parts })
}

/// Fractions of V- and W-vertices lying in candidate parts that have a
/// strict-majority home part at the deepest level of the respective side.
pub fn refinement_closeness(
    trace: &ConstructionTrace,
    candidate: &VertexPartition,
) -> Result<(f64, f64)> {
    if candidate.n() != trace.total_vertices() {
        return Err(Error::input("candidate must partition both sides of the trace"));
    }
    let s = trace.steps();
    let mut v_close = 0usize;
    let mut w_close = 0usize;
    for block in candidate.blocks() {
        let mut counts = std::collections::HashMap::new();
        for v in block.iter() {
            *counts.entry(trace.part_of(s, v)).or_insert(0usize) += 1;
        }
        let best = counts.iter().max_by_key(|(_, &c)| c).map(|((side, _), &c)| (*side, c));
        if let Some((side, c)) = best {
            if c * 2 > block.len() {
                let on_side =
                    block.iter().filter(|&v| (v >= trace.n_side) as u8 == side).count();
                if side == 0 {
                    v_close += on_side;
                } else {
                    w_close += on_side;
                }
            }
        }
    }
    Ok((
        v_close as f64 / trace.n_side as f64,
        w_close as f64 / trace.n_side as f64,
    ))
}

#[derive(Debug, Clone, Copy)]
pub struct SumalotRow {
    pub part: usize,
    /// 1 when the part still has blue vertices at the step, 2 when the
    /// step is its last blue level.
    pub case: u8,
    pub measured: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct DirectionRow {
    /// 'V': red side is V, blue reference side is W; 'W' mirrored.
    pub lens: char,
    pub measured_irreg: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct PartTypeRow {
    pub part: usize,
    pub part_type: char,
    pub last_blue_level: usize,
    pub flagged_never_blue: bool,
}

/// The counting comparisons at one step: per-part averaging rows, the
/// two aggregate lower-bound expressions, and the part classification.
#[derive(Debug, Clone)]
pub struct CountingReport {
    pub step: usize,
    /// Inactive fractions within benchmark and separation fractions
    /// ≥ 1/4, as verified on the trace; the bounds only bind when true.
    pub premises_hold: bool,
    pub sumalot: Vec<SumalotRow>,
    pub addingup: Vec<DirectionRow>,
    pub onestep: Vec<DirectionRow>,
    pub part_types: Vec<PartTypeRow>,
}

impl fmt::Display for CountingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "counting step={} premises_hold={}", self.step, self.premises_hold)?;
        writeln!(f, "sumalot")?;
        writeln!(f, "part,case,measured,bound")?;
        for r in &self.sumalot {
            writeln!(f, "{},{},{},{}", r.part, r.case, r.measured, r.bound)?;
        }
        writeln!(f, "addingup")?;
        writeln!(f, "lens,measured_irreg,bound")?;
        for r in &self.addingup {
            writeln!(f, "{},{},{}", r.lens, r.measured_irreg, r.bound)?;
        }
        writeln!(f, "onestep")?;
        writeln!(f, "lens,measured_irreg,bound")?;
        for r in &self.onestep {
            writeln!(f, "{},{},{}", r.lens, r.measured_irreg, r.bound)?;
        }
        writeln!(f, "part_types")?;
        writeln!(f, "part,type,last_blue_level,flagged_never_blue")?;
        for r in &self.part_types {
            writeln!(
                f,
                "{},{},{},{}",
                r.part, r.part_type, r.last_blue_level, r.flagged_never_blue
            )?;
        }
        Ok(())
    }
}

/// Side of a part's blue chain at a level (blue vertices of one part all
/// share a side; majority parts are unique).
fn blue_side(blue: &VertexSet, n_side: usize) -> Option<u8> {
    blue.iter().next().map(|v| (v >= n_side) as u8)
}

/// Evaluate the counting comparisons at step `j` (2 ≤ j ≤ s).
pub fn counting_report(
    trace: &ConstructionTrace,
    candidate: &VertexPartition,
    j: usize,
    cap: usize,
) -> Result<CountingReport> {
    let s = trace.steps();
    if j < 2 || j > s {
        return Err(Error::input(format!("step {j} out of range 2..={s}")));
    }
    let colors = color_trace(trace, candidate)?;
    let n = trace.n_side as f64;
    let alpha = trace.alpha();
    let premises = verify_construction(trace).counting_premises_hold();

    // Blue vertex counts per level-(j-1) part on each side at level j.
    let kp = trace.k[j - 1];
    let mut blue_at_j = vec![vec![0usize; kp]; 2];
    for chain in &colors.parts {
        for v in chain.blue[j].iter() {
            let (side, part) = trace.part_of(j - 1, v);
            blue_at_j[side as usize][part] += 1;
        }
    }

    let mut sumalot = Vec::new();
    for (pi, chain) in colors.parts.iter().enumerate() {
        let Some(last) = chain.last_blue_level else { continue };
        if last < j - 1 {
            continue;
        }
        let prev_blue = &chain.blue[j - 1];
        if prev_blue.is_empty() {
            continue;
        }
        let side = blue_side(prev_blue, trace.n_side).unwrap();
        let (_, x_part) = trace.part_of(j - 1, prev_blue.iter().next().unwrap());
        // C = blue fraction of the PEER side at level j
        let peer_side = 1 - side;
        let c_frac = if peer_side == 0 {
            colors.levels[j].v_blue_fraction
        } else {
            colors.levels[j].w_blue_fraction
        };
        // measured: Σ over active peers Y of |smaller split of S_{j-1}| · |Y'|
        let two_x = 2 * trace.params.x[j - 1] as usize;
        let mut measured = 0.0;
        for y in 0..kp {
            let active = if side == 0 {
                trace.active[j - 1][x_part][y]
            } else {
                trace.active[j - 1][y][x_part]
            };
            if !active {
                continue;
            }
            let mut g0 = 0usize;
            let mut g1 = 0usize;
            for v in prev_blue.iter() {
                let (_, sub) = trace.part_of(j, v);
                let local = sub % two_x;
                let group = if side == 0 {
                    trace.bipartitions[j - 1].v_side[x_part][y][local]
                } else {
                    trace.bipartitions[j - 1].w_side[x_part][y][local]
                };
                if group == 0 {
                    g0 += 1;
                } else {
                    g1 += 1;
                }
            }
            // ties designate group 0 as the smaller side
            let smaller = if g0 <= g1 { g0 } else { g1 };
            let peer_blue = blue_at_j[peer_side as usize][y];
            measured += (smaller * peer_blue) as f64;
        }
        let (case, bound) = if last >= j {
            let s_tilde = prev_blue.len() - chain.blue[j].len();
            (1u8, s_tilde as f64 * (c_frac - 0.8) * n)
        } else {
            let part_len = candidate.blocks()[pi].len() as f64;
            (2u8, 0.5 * (prev_blue.len() as f64 - part_len / 2.0) * (c_frac - 0.8) * n)
        };
        sumalot.push(SumalotRow { part: pi, case, measured, bound });
    }

    // Aggregate bounds need the exact irregularity of the candidate.
    let g = trace.final_graph()?;
    let (measured_irreg, _) = irreg_partition_with_cap(&g, candidate, cap)?;
    let nn = n * n;
    let x2 = trace.params.x[1] as f64;
    let xj = trace.params.x[j - 1] as f64;
    let mut addingup = Vec::new();
    let mut onestep = Vec::new();
    for lens in [0u8, 1u8] {
        let (red_frac, blue_peer) = if lens == 0 {
            (1.0 - colors.levels[j].v_blue_fraction, colors.levels[j].w_blue_fraction)
        } else {
            (1.0 - colors.levels[j].w_blue_fraction, colors.levels[j].v_blue_fraction)
        };
        addingup.push(DirectionRow {
            lens: if lens == 0 { 'V' } else { 'W' },
            measured_irreg,
            bound: red_frac / 12.0 * (blue_peer - 0.8) * alpha * nn
                - 0.5 * x2.powf(-0.25) * alpha * nn,
        });
        let (beta, beta_next, c_prev) = if lens == 0 {
            (
                colors.levels[j - 1].v_blue_fraction,
                colors.levels[j].v_blue_fraction,
                colors.levels[j - 1].w_blue_fraction,
            )
        } else {
            (
                colors.levels[j - 1].w_blue_fraction,
                colors.levels[j].w_blue_fraction,
                colors.levels[j - 1].v_blue_fraction,
            )
        };
        onestep.push(DirectionRow {
            lens: if lens == 0 { 'V' } else { 'W' },
            measured_irreg,
            bound: 0.25 * (beta - (beta_next + 1.0) / 2.0) * (c_prev - 0.8) * alpha * nn
                - xj.powf(-0.25) * alpha * nn,
        });
    }

    // Classification at step j: A keeps blue vertices, B lost them with a
    // small final chain, C lost them with a large one. Parts that never
    // contain blue vertices get type C with level 0, flagged.
    let mut part_types = Vec::new();
    for (pi, chain) in colors.parts.iter().enumerate() {
        let never = chain.last_blue_level.is_none();
        let i_s = colors.last_blue_or_zero(pi);
        let part_len = candidate.blocks()[pi].len() as f64;
        let part_type = if never {
            'C'
        } else if i_s >= j {
            'A'
        } else if (chain.blue[i_s].len() as f64) <= 5.0 / 6.0 * part_len {
            'B'
        } else {
            'C'
        };
        part_types.push(PartTypeRow {
            part: pi,
            part_type,
            last_blue_level: i_s,
            flagged_never_blue: never,
        });
    }

    Ok(CountingReport { step: j, premises_hold: premises, sumalot, addingup, onestep, part_types })
}

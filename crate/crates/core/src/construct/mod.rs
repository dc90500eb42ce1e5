//! The iterated ±α construction on a bipartite vertex set.
//!
//! Starting from constant weight 1/2 between sides V and W, each step i
//! splits every part of the previous level into 2x_i equal parts and, for
//! every active pair of old parts (X, Y), draws independent random
//! bipartitions X = X_Y^0 ⊔ X_Y^1 and Y = Y_X^0 ⊔ Y_X^1 of the new parts;
//! the step then adds +α between aligned groups and −α between crossed
//! ones. A pair whose cumulative weight reaches exactly 0 or 1 is frozen
//! (inactive), together with all of its descendants.
//!
//! Weights are held as exact integer multiples of α throughout; reals
//! appear only at the WeightedGraph boundary, so activity tests against
//! 0 and 1 are exact. Randomness is drawn from per-(step, side, part,
//! peer, attempt) ChaCha streams derived from one seed, which makes
//! traces bit-reproducible and the rejection loops order-independent.

mod io;
mod plan;
mod verify;

pub use io::{parse_alpha, read_trace_dir, write_trace_dir};
pub use plan::{parse_exact_rational, plan_paper_params, PaperPlan};
pub use verify::{
    residual_report, verify_construction, CheckItem, ConstructionReport, LevelInactive,
    PropertyMargin, ResidualRow,
};

use rand::seq::SliceRandom;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::graph::{VertexSet, WeightRange, WeightedGraph};
use crate::partition::VertexPartition;

/// Hard cap on vertices per side when materializing traces.
pub const SIDE_CAP: usize = 4096;

/// Parameters of one construction run.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionParams {
    /// α = 1/alpha_den; alpha_den must be even so weights can reach
    /// exactly 0 and 1 from 1/2 along the α-grid.
    pub alpha_den: u64,
    /// Splitting factors x_1 … x_s, each ≥ 2.
    pub x: Vec<u32>,
    /// Vertices per part of the final level.
    pub block_size: usize,
    pub seed: u64,
    /// Enforce the two separation properties by rejection sampling.
    pub strict_properties: bool,
    pub max_attempts: u32,
    /// Optional multipliers on the property limits r and t, recorded so
    /// verification checks against what was actually enforced.
    pub r_scale: f64,
    pub t_scale: f64,
}

impl ConstructionParams {
    pub fn new(alpha_den: u64, x: Vec<u32>, block_size: usize, seed: u64) -> Self {
        ConstructionParams {
            alpha_den,
            x,
            block_size,
            seed,
            strict_properties: true,
            max_attempts: 1000,
            r_scale: 1.0,
            t_scale: 1.0,
        }
    }

    pub fn steps(&self) -> usize {
        self.x.len()
    }

    pub fn alpha(&self) -> f64 {
        1.0 / self.alpha_den as f64
    }

    /// Part counts k_0 … k_s with k_i = k_{i-1}·2x_i.
    pub fn part_counts(&self) -> Result<Vec<usize>> {
        let mut k = vec![1usize];
        for &xi in &self.x {
            let next = k
                .last()
                .unwrap()
                .checked_mul(2 * xi as usize)
                .ok_or_else(|| Error::capacity("part count overflow"))?;
            k.push(next);
        }
        Ok(k)
    }

    pub fn side_size(&self) -> Result<usize> {
        let k = self.part_counts()?;
        k.last()
            .unwrap()
            .checked_mul(self.block_size)
            .ok_or_else(|| Error::capacity("side size overflow"))
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha_den == 0 || self.alpha_den % 2 != 0 {
            return Err(Error::input("1/alpha must be an even positive integer"));
        }
        if self.x.iter().any(|&xi| xi < 2) {
            return Err(Error::input("every splitting factor must be at least 2"));
        }
        if self.block_size == 0 {
            return Err(Error::input("block size must be positive"));
        }
        if self.max_attempts == 0 {
            return Err(Error::input("max_attempts must be positive"));
        }
        if !(self.r_scale > 0.0 && self.t_scale > 0.0) {
            return Err(Error::input("property scales must be positive"));
        }
        let n = self.side_size()?;
        if n > SIDE_CAP {
            return Err(Error::capacity(format!(
                "side size {n} exceeds the materialization cap {SIDE_CAP}"
            )));
        }
        Ok(())
    }

    /// Property-1 limit r = r_scale·√(6·x_j·ln x_{j-1}) for build step j ≥ 2.
    pub fn r_limit(&self, step: usize) -> f64 {
        let xj = self.x[step - 1] as f64;
        let xprev = self.x[step - 2] as f64;
        self.r_scale * (6.0 * xj * xprev.ln()).sqrt()
    }

    /// Property-2 limit t = t_scale·x_{j-1}/2 for build step j ≥ 2.
    pub fn t_limit(&self, step: usize) -> f64 {
        self.t_scale * self.x[step - 2] as f64 / 2.0
    }
}

/// Random group assignments of one step: for each (parent part, peer
/// part) the two-coloring of the parent's new subparts.
#[derive(Debug, Clone, PartialEq)]
pub struct StepBipartitions {
    /// v_side[x][y][local subpart of X] ∈ {0,1}
    pub v_side: Vec<Vec<Vec<u8>>>,
    /// w_side[y][x][local subpart of Y] ∈ {0,1}
    pub w_side: Vec<Vec<Vec<u8>>>,
}

/// Full record of one construction run.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionTrace {
    pub params: ConstructionParams,
    /// Part counts per level, k[0..=s].
    pub k: Vec<usize>,
    /// Vertices per side.
    pub n_side: usize,
    /// bipartitions[i-1] belongs to build step i.
    pub bipartitions: Vec<StepBipartitions>,
    /// active[i-1][x][y]: was the level-(i-1) parent pair (X, Y) active
    /// at step i.
    pub active: Vec<Vec<Vec<bool>>>,
    /// cum[i][p][q]: cumulative weight on (level-i part p of V) ×
    /// (level-i part q of W), in α units.
    pub cum: Vec<Vec<Vec<i64>>>,
}

/// Derive an independent ChaCha stream from structured key material.
fn derive_rng(parts: &[u64]) -> ChaCha12Rng {
    let mut z = 0x9E37_79B9_7F4A_7C15u64;
    let mut mix = |x: u64| -> u64 {
        z ^= x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = z.rotate_left(27).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    };
    let mut key = [0u8; 32];
    for (i, chunk) in key.chunks_exact_mut(8).enumerate() {
        let mut h = mix(i as u64 + 1);
        for &p in parts {
            h = mix(h ^ p);
        }
        chunk.copy_from_slice(&h.to_le_bytes());
    }
    use rand::SeedableRng;
    ChaCha12Rng::from_seed(key)
}

/// One random equipartition of 2x subparts into two groups of x, as a
/// coloring (group id per local subpart index), via a seeded shuffle.
fn draw_coloring(rng: &mut ChaCha12Rng, two_x: usize) -> Vec<u8> {
    let mut idx: Vec<usize> = (0..two_x).collect();
    idx.shuffle(rng);
    let mut coloring = vec![0u8; two_x];
    for (t, &i) in idx.iter().enumerate() {
        coloring[i] = (t >= two_x / 2) as u8;
    }
    coloring
}

/// z(C, C') over one part's colorings: subparts in group 0 of both minus
/// those in group 0 of C and group 1 of C'.
pub(crate) fn z_overlap(a: &[u8], b: &[u8]) -> i64 {
    let mut z00 = 0i64;
    let mut z01 = 0i64;
    for (&ca, &cb) in a.iter().zip(b.iter()) {
        if ca == 0 {
            if cb == 0 {
                z00 += 1;
            } else {
                z01 += 1;
            }
        }
    }
    z00 - z01
}

/// y(p, q) over a family of colorings: non-separating minus separating.
pub(crate) fn y_separation(colorings: &[&Vec<u8>], p: usize, q: usize) -> i64 {
    let mut y = 0i64;
    for col in colorings {
        if col[p] == col[q] {
            y += 1;
        } else {
            y -= 1;
        }
    }
    y
}

/// Worst slack of the two properties over one subfamily of colorings
/// (min over constraints of limit − |величина|); negative = violated.
fn subfamily_margin(
    colorings: &[&Vec<u8>],
    r_limit: f64,
    t_limit: f64,
) -> (f64, f64) {
    let mut z_margin = f64::INFINITY;
    for i in 0..colorings.len() {
        for j in (i + 1)..colorings.len() {
            let z = z_overlap(colorings[i], colorings[j]).abs() as f64;
            z_margin = z_margin.min(r_limit - z);
        }
    }
    let two_x = colorings.first().map_or(0, |c| c.len());
    let mut y_margin = f64::INFINITY;
    for p in 0..two_x {
        for q in (p + 1)..two_x {
            let y = y_separation(colorings, p, q).abs() as f64;
            y_margin = y_margin.min(t_limit - y);
        }
    }
    (z_margin, y_margin)
}

/// Materialize the full construction trace for the given parameters.
pub fn build(params: &ConstructionParams) -> Result<ConstructionTrace> {
    params.validate()?;
    let k = params.part_counts()?;
    let n_side = params.side_size()?;
    let s = params.steps();
    let half = (params.alpha_den / 2) as i64;
    let full = params.alpha_den as i64;

    let mut trace = ConstructionTrace {
        params: params.clone(),
        k: k.clone(),
        n_side,
        bipartitions: Vec::new(),
        active: Vec::new(),
        cum: vec![vec![vec![half]]],
    };

    for step in 1..=s {
        let kp = k[step - 1];
        let two_x = 2 * params.x[step - 1] as usize;
        let mut bip = StepBipartitions {
            v_side: vec![vec![Vec::new(); kp]; kp],
            w_side: vec![vec![Vec::new(); kp]; kp],
        };

        if step == 1 {
            // No grouping context yet: single unconstrained draws.
            let mut rng = derive_rng(&[params.seed, 1, 0, 0, 0, 0]);
            bip.v_side[0][0] = draw_coloring(&mut rng, two_x);
            let mut rng = derive_rng(&[params.seed, 1, 1, 0, 0, 0]);
            bip.w_side[0][0] = draw_coloring(&mut rng, two_x);
        } else {
            let prev_two_x = 2 * params.x[step - 2] as usize;
            let r_limit = params.r_limit(step);
            let t_limit = params.t_limit(step);
            // Subfamilies: fix a parent part B on one side; its peers
            // split by (peer parent, group of the peer in the previous
            // step's bipartition with respect to B's parent).
            for side in 0..2u64 {
                for b_part in 0..kp {
                    let b_parent = b_part / prev_two_x;
                    for peer_parent in 0..k[step - 2] {
                        // coloring of the peer parent's subparts w.r.t.
                        // B's parent, drawn at the previous step
                        let peer_groups: &Vec<u8> = if side == 0 {
                            &trace.bipartitions[step - 2].w_side[peer_parent][b_parent]
                        } else {
                            &trace.bipartitions[step - 2].v_side[peer_parent][b_parent]
                        };
                        for group in 0..2u8 {
                            let subfam: Vec<usize> = (0..prev_two_x)
                                .filter(|&loc| peer_groups[loc] == group)
                                .map(|loc| peer_parent * prev_two_x + loc)
                                .collect();
                            draw_subfamily(
                                params,
                                &mut bip,
                                side,
                                step,
                                b_part,
                                &subfam,
                                two_x,
                                r_limit,
                                t_limit,
                            )?;
                        }
                    }
                }
            }
        }

        // Activity and cumulative weights at the new level.
        let kc = k[step];
        let mut active = vec![vec![false; kp]; kp];
        let mut cum = vec![vec![0i64; kc]; kc];
        for (pp, cum_row) in cum.iter_mut().enumerate() {
            let xp = pp / two_x;
            let lp = pp % two_x;
            for (qq, slot) in cum_row.iter_mut().enumerate() {
                let yq = qq / two_x;
                let lq = qq % two_x;
                let c_par = trace.cum[step - 1][xp][yq];
                if c_par == 0 || c_par == full {
                    *slot = c_par;
                } else {
                    active[xp][yq] = true;
                    let a = bip.v_side[xp][yq][lp];
                    let b = bip.w_side[yq][xp][lq];
                    *slot = c_par + if a == b { 1 } else { -1 };
                }
            }
        }
        trace.bipartitions.push(bip);
        trace.active.push(active);
        trace.cum.push(cum);
    }
    Ok(trace)
}

/// Draw the colorings of part `b_part` against every peer in `subfam`,
/// redrawing the whole subfamily until the separation properties hold
/// (when enforcement is on).
#[allow(clippy::too_many_arguments)]
fn draw_subfamily(
    params: &ConstructionParams,
    bip: &mut StepBipartitions,
    side: u64,
    step: usize,
    b_part: usize,
    subfam: &[usize],
    two_x: usize,
    r_limit: f64,
    t_limit: f64,
) -> Result<()> {
    let mut best_margin = f64::NEG_INFINITY;
    let mut best_property = 1u8;
    for attempt in 0..params.max_attempts {
        let colorings: Vec<Vec<u8>> = subfam
            .iter()
            .map(|&peer| {
                let mut rng = derive_rng(&[
                    params.seed,
                    step as u64,
                    side,
                    b_part as u64,
                    peer as u64,
                    attempt as u64,
                ]);
                draw_coloring(&mut rng, two_x)
            })
            .collect();
        let accept = if params.strict_properties {
            let refs: Vec<&Vec<u8>> = colorings.iter().collect();
            let (z_margin, y_margin) = subfamily_margin(&refs, r_limit, t_limit);
            let margin = z_margin.min(y_margin);
            if margin > best_margin {
                best_margin = margin;
                best_property = if z_margin <= y_margin { 1 } else { 2 };
            }
            margin >= 0.0
        } else {
            true
        };
        if accept {
            for (&peer, coloring) in subfam.iter().zip(colorings) {
                if side == 0 {
                    bip.v_side[b_part][peer] = coloring;
                } else {
                    bip.w_side[b_part][peer] = coloring;
                }
            }
            return Ok(());
        }
    }
    Err(Error::ConstructionInfeasible {
        step,
        side: if side == 0 { 'V' } else { 'W' },
        part: b_part,
        property: best_property,
        attempts: params.max_attempts,
        best_margin,
    })
}

impl ConstructionTrace {
    pub fn steps(&self) -> usize {
        self.params.steps()
    }

    pub fn alpha(&self) -> f64 {
        self.params.alpha()
    }

    /// Total vertex count (both sides).
    pub fn total_vertices(&self) -> usize {
        2 * self.n_side
    }

    /// Vertices of level-`level` part `p` on side V (side 0) or W (side 1).
    pub fn part_vertices(&self, level: usize, side: u8, p: usize) -> VertexSet {
        let size = self.n_side / self.k[level];
        let off = if side == 0 { 0 } else { self.n_side };
        VertexSet::new((p * size..(p + 1) * size).map(|v| v + off).collect())
    }

    /// Level-`level` part index of a vertex, with its side.
    pub fn part_of(&self, level: usize, vertex: usize) -> (u8, usize) {
        let size = self.n_side / self.k[level];
        if vertex < self.n_side {
            (0, vertex / size)
        } else {
            (1, (vertex - self.n_side) / size)
        }
    }

    /// The joint partition 𝒫_level ∪ 𝒬_level of all vertices
    /// (V parts first, then W parts).
    pub fn joint_partition(&self, level: usize) -> Result<VertexPartition> {
        let mut blocks = Vec::new();
        for side in 0..2u8 {
            for p in 0..self.k[level] {
                blocks.push(self.part_vertices(level, side, p));
            }
        }
        VertexPartition::new(blocks)
    }

    /// Group (0/1) of a level-`step` subpart within the step bipartition
    /// of its parent with respect to `peer` (a parent-level index on the
    /// other side). `side` is the subpart's own side.
    pub fn group_of_subpart(&self, step: usize, side: u8, subpart: usize, peer: usize) -> u8 {
        let two_x = 2 * self.params.x[step - 1] as usize;
        let parent = subpart / two_x;
        let local = subpart % two_x;
        if side == 0 {
            self.bipartitions[step - 1].v_side[parent][peer][local]
        } else {
            self.bipartitions[step - 1].w_side[parent][peer][local]
        }
    }

    /// Per-step increment on a (level-step) part pair, in α units.
    pub fn increment(&self, step: usize, p: usize, q: usize) -> i64 {
        let two_x = 2 * self.params.x[step - 1] as usize;
        self.cum[step][p][q] - self.cum[step - 1][p / two_x][q / two_x]
    }

    fn materialize(&self, level_weights: impl Fn(usize, usize) -> f64, range: WeightRange) -> Result<WeightedGraph> {
        let n = self.total_vertices();
        let mut g = WeightedGraph::new(n, range)?;
        let level = self.steps();
        let size = self.n_side / self.k[level];
        for p in 0..self.k[level] {
            for q in 0..self.k[level] {
                let w = level_weights(p, q);
                if w == 0.0 {
                    continue;
                }
                for v in 0..size {
                    for u in 0..size {
                        g.set_weight(p * size + v, self.n_side + q * size + u, w)?;
                    }
                }
            }
        }
        Ok(g)
    }

    /// The step graph G_step (increments only), weights in [-1, 1].
    pub fn step_graph(&self, step: usize) -> Result<WeightedGraph> {
        if step > self.steps() {
            return Err(Error::input(format!("step {step} out of range")));
        }
        if step == 0 {
            return self.materialize(|_, _| 0.5, WeightRange::SIGNED);
        }
        let alpha = self.alpha();
        let finest = self.k[self.steps()];
        let ratio = finest / self.k[step];
        self.materialize(
            |p, q| self.increment(step, p / ratio, q / ratio) as f64 * alpha,
            WeightRange::SIGNED,
        )
    }

    /// The cumulative graph up to `level`, weights in [0, 1].
    pub fn cumulative_graph(&self, level: usize) -> Result<WeightedGraph> {
        if level > self.steps() {
            return Err(Error::input(format!("level {level} out of range")));
        }
        let alpha = self.alpha();
        let finest = self.k[self.steps()];
        let ratio = finest / self.k[level];
        self.materialize(
            |p, q| self.cum[level][p / ratio][q / ratio] as f64 * alpha,
            WeightRange::UNIT,
        )
    }

    /// The finished graph G = G̃_s.
    pub fn final_graph(&self) -> Result<WeightedGraph> {
        self.cumulative_graph(self.steps())
    }
}

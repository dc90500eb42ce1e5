//! Trace directory layout: plain-text files, byte-deterministic given
//! the trace.
//!
//! ```text
//! params.txt                 key=value lines, alpha as an exact rational
//! partitions/step_<i>_V.txt  partition format, global vertex ids
//! partitions/step_<i>_W.txt
//! active/step_<i>.txt        X=<id> Y=<id> active={0|1}
//! bipartitions/step_<i>.txt  side=<V|W> parent=<id> peer=<id> group0=<ids>
//! graphs/g_<i>.wg            per-step increment graphs (signed weights)
//! graphs/final.wg            the finished graph
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{CheckItem, ConstructionParams, ConstructionTrace, StepBipartitions};
use crate::error::{Error, Result};
use crate::graph::{parse_wgraph, write_wgraph, WeightedGraph};

fn params_text(p: &ConstructionParams) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "alpha=1/{}", p.alpha_den);
    let _ = writeln!(out, "s={}", p.x.len());
    let _ = writeln!(
        out,
        "x={}",
        p.x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
    );
    let _ = writeln!(out, "block_size={}", p.block_size);
    let _ = writeln!(out, "seed={}", p.seed);
    let _ = writeln!(out, "strict_properties={}", p.strict_properties);
    let _ = writeln!(out, "max_attempts={}", p.max_attempts);
    let _ = writeln!(out, "r_scale={}", p.r_scale);
    let _ = writeln!(out, "t_scale={}", p.t_scale);
    out
}

/// Parse an exact rational `p/q` (or integer numerator `1`) into the
/// denominator of a unit fraction.
pub fn parse_alpha(text: &str) -> Result<u64> {
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (
            n.trim()
                .parse::<u64>()
                .map_err(|_| Error::input(format!("bad rational numerator '{n}'")))?,
            d.trim()
                .parse::<u64>()
                .map_err(|_| Error::input(format!("bad rational denominator '{d}'")))?,
        ),
        None => return Err(Error::input("alpha must be an exact rational p/q")),
    };
    if num == 0 || den == 0 {
        return Err(Error::input("alpha must be a positive rational"));
    }
    let g = gcd(num, den);
    let (num, den) = (num / g, den / g);
    if num != 1 {
        return Err(Error::input("1/alpha must be an integer (numerator must reduce to 1)"));
    }
    Ok(den)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn parse_params(text: &str) -> Result<ConstructionParams> {
    let mut alpha_den = None;
    let mut x = None;
    let mut block_size = None;
    let mut seed = None;
    let mut strict = None;
    let mut max_attempts = None;
    let mut r_scale = 1.0;
    let mut t_scale = 1.0;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::input(format!("bad params line '{line}'")))?;
        match key {
            "alpha" => alpha_den = Some(parse_alpha(value)?),
            "s" => {} // redundant with x
            "x" => {
                x = Some(if value.is_empty() {
                    Vec::new()
                } else {
                    value
                        .split(',')
                        .map(|t| {
                            t.parse::<u32>()
                                .map_err(|_| Error::input(format!("bad splitting factor '{t}'")))
                        })
                        .collect::<Result<Vec<_>>>()?
                })
            }
            "block_size" => {
                block_size =
                    Some(value.parse().map_err(|_| Error::input("bad block_size"))?)
            }
            "seed" => seed = Some(value.parse().map_err(|_| Error::input("bad seed"))?),
            "strict_properties" => {
                strict = Some(value.parse().map_err(|_| Error::input("bad strict flag"))?)
            }
            "max_attempts" => {
                max_attempts = Some(value.parse().map_err(|_| Error::input("bad max_attempts"))?)
            }
            "r_scale" => r_scale = value.parse().map_err(|_| Error::input("bad r_scale"))?,
            "t_scale" => t_scale = value.parse().map_err(|_| Error::input("bad t_scale"))?,
            other => return Err(Error::input(format!("unknown params key '{other}'"))),
        }
    }
    Ok(ConstructionParams {
        alpha_den: alpha_den.ok_or_else(|| Error::input("params.txt missing alpha"))?,
        x: x.ok_or_else(|| Error::input("params.txt missing x"))?,
        block_size: block_size.ok_or_else(|| Error::input("params.txt missing block_size"))?,
        seed: seed.ok_or_else(|| Error::input("params.txt missing seed"))?,
        strict_properties: strict.ok_or_else(|| Error::input("params.txt missing strict flag"))?,
        max_attempts: max_attempts.ok_or_else(|| Error::input("params.txt missing max_attempts"))?,
        r_scale,
        t_scale,
    })
}

/// Write the full trace directory.
pub fn write_trace_dir(trace: &ConstructionTrace, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir.join("partitions"))?;
    fs::create_dir_all(dir.join("active"))?;
    fs::create_dir_all(dir.join("bipartitions"))?;
    fs::create_dir_all(dir.join("graphs"))?;
    fs::write(dir.join("params.txt"), params_text(&trace.params))?;

    let s = trace.steps();
    for level in 0..=s {
        for (side, tag) in [(0u8, "V"), (1u8, "W")] {
            // Per-side listings reuse the partition text format with
            // global vertex ids (they only cover one side).
            let mut text = String::new();
            for id in 0..trace.k[level] {
                let p = trace.part_vertices(level, side, id);
                let _ = write!(text, "block {id}:");
                for v in p.iter() {
                    let _ = write!(text, " {v}");
                }
                text.push('\n');
            }
            fs::write(dir.join(format!("partitions/step_{level}_{tag}.txt")), text)?;
        }
    }

    for step in 1..=s {
        let mut text = String::new();
        for (x, row) in trace.active[step - 1].iter().enumerate() {
            for (y, &a) in row.iter().enumerate() {
                let _ = writeln!(text, "X={x} Y={y} active={}", a as u8);
            }
        }
        fs::write(dir.join(format!("active/step_{step}.txt")), text)?;

        let two_x = 2 * trace.params.x[step - 1] as usize;
        let mut text = String::new();
        let bip = &trace.bipartitions[step - 1];
        for (tag, sides) in [("V", &bip.v_side), ("W", &bip.w_side)] {
            for (parent, row) in sides.iter().enumerate() {
                for (peer, coloring) in row.iter().enumerate() {
                    let group0: Vec<String> = (0..two_x)
                        .filter(|&l| coloring[l] == 0)
                        .map(|l| (parent * two_x + l).to_string())
                        .collect();
                    let _ = writeln!(
                        text,
                        "side={tag} parent={parent} peer={peer} group0={}",
                        group0.join(",")
                    );
                }
            }
        }
        fs::write(dir.join(format!("bipartitions/step_{step}.txt")), text)?;
    }

    for step in 0..=s {
        let g = trace.step_graph(step)?;
        fs::write(dir.join(format!("graphs/g_{step}.wg")), write_wgraph(&g))?;
    }
    fs::write(dir.join("graphs/final.wg"), write_wgraph(&trace.final_graph()?))?;
    Ok(())
}

/// Collapse a vertex-level graph to level-`level` part resolution,
/// checking block constancy and zero weights within sides. α-units.
fn collapse_graph(
    g: &WeightedGraph,
    trace: &ConstructionTrace,
    level: usize,
    name: &str,
    checks: &mut Vec<CheckItem>,
) -> Vec<Vec<i64>> {
    let k = trace.k[level];
    let size = trace.n_side / k;
    let den = trace.params.alpha_den as f64;
    let mut out = vec![vec![0i64; k]; k];
    let mut constancy_ok = true;
    let mut grid_ok = true;
    let mut zero_ok = true;
    let mut detail = String::new();
    // within-side weights must vanish
    'zero: for side in [0, trace.n_side] {
        for v in side..side + trace.n_side {
            for w in side..side + trace.n_side {
                if g.weight(v, w) != 0.0 {
                    zero_ok = false;
                    detail = format!("{name}: nonzero within-side weight at ({v}, {w})");
                    break 'zero;
                }
            }
        }
    }
    'blocks: for (p, row) in out.iter_mut().enumerate() {
        for (q, slot) in row.iter_mut().enumerate() {
            let base = g.weight(p * size, trace.n_side + q * size);
            let units = base * den;
            if units.round() != units {
                grid_ok = false;
                detail = format!("{name}: weight {base} off the α-grid in block ({p}, {q})");
                break 'blocks;
            }
            *slot = units as i64;
            for v in 0..size {
                for u in 0..size {
                    let w = g.weight(p * size + v, trace.n_side + q * size + u);
                    if w != base {
                        constancy_ok = false;
                        detail = format!(
                            "{name}: block ({p}, {q}) is not constant (vertex pair ({}, {}))",
                            p * size + v,
                            trace.n_side + q * size + u
                        );
                        break 'blocks;
                    }
                }
            }
        }
    }
    let ok = constancy_ok && grid_ok && zero_ok;
    checks.push(if ok {
        CheckItem::pass(format!("block-constancy-{name}"))
    } else {
        CheckItem::fail(format!("block-constancy-{name}"), detail)
    });
    out
}

/// Read a trace directory back. File-level findings (corrupt graphs,
/// mismatched activity flags, bad partition listings) are returned as
/// check items next to the reconstructed trace.
pub fn read_trace_dir(dir: &Path) -> Result<(ConstructionTrace, Vec<CheckItem>)> {
    let params = parse_params(&fs::read_to_string(dir.join("params.txt"))?)?;
    params.validate()?;
    let k = params.part_counts()?;
    let n_side = params.side_size()?;
    let s = params.steps();
    let mut checks = Vec::new();

    // Bipartitions.
    let mut bipartitions = Vec::new();
    for step in 1..=s {
        let kp = k[step - 1];
        let two_x = 2 * params.x[step - 1] as usize;
        let text = fs::read_to_string(dir.join(format!("bipartitions/step_{step}.txt")))?;
        let mut bip = StepBipartitions {
            v_side: vec![vec![Vec::new(); kp]; kp],
            w_side: vec![vec![Vec::new(); kp]; kp],
        };
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut side = None;
            let mut parent = None;
            let mut peer = None;
            let mut group0 = None;
            for tok in line.split_whitespace() {
                let (key, value) = tok
                    .split_once('=')
                    .ok_or_else(|| Error::input(format!("step {step} line {lineno}: bad token")))?;
                match key {
                    "side" => side = Some(value.to_string()),
                    "parent" => parent = value.parse::<usize>().ok(),
                    "peer" => peer = value.parse::<usize>().ok(),
                    "group0" => {
                        group0 = Some(if value.is_empty() {
                            Vec::new()
                        } else {
                            value
                                .split(',')
                                .map(|t| {
                                    t.parse::<usize>().map_err(|_| {
                                        Error::input(format!(
                                            "step {step} line {lineno}: bad subpart id"
                                        ))
                                    })
                                })
                                .collect::<Result<Vec<_>>>()?
                        })
                    }
                    _ => return Err(Error::input(format!("step {step} line {lineno}: bad key"))),
                }
            }
            let (side, parent, peer, group0) = match (side, parent, peer, group0) {
                (Some(a), Some(b), Some(c), Some(d)) => (a, b, c, d),
                _ => return Err(Error::input(format!("step {step} line {lineno}: missing field"))),
            };
            if parent >= kp || peer >= kp {
                return Err(Error::input(format!("step {step} line {lineno}: id out of range")));
            }
            let mut coloring = vec![1u8; two_x];
            for gid in group0 {
                let local = gid
                    .checked_sub(parent * two_x)
                    .filter(|&l| l < two_x)
                    .ok_or_else(|| {
                        Error::input(format!("step {step} line {lineno}: subpart id out of part"))
                    })?;
                coloring[local] = 0;
            }
            if side == "V" {
                bip.v_side[parent][peer] = coloring;
            } else {
                bip.w_side[parent][peer] = coloring;
            }
        }
        bipartitions.push(bip);
    }

    // Graphs: collapse increments and rebuild cumulative levels.
    let g0 = parse_wgraph(&fs::read_to_string(dir.join("graphs/g_0.wg"))?)?;
    if g0.n() != 2 * n_side {
        return Err(Error::input("g_0.wg has the wrong vertex count"));
    }
    let mut trace = ConstructionTrace {
        params: params.clone(),
        k: k.clone(),
        n_side,
        bipartitions,
        active: Vec::new(),
        cum: Vec::new(),
    };
    let base = collapse_graph(&g0, &trace, 0, "g_0", &mut checks);
    trace.cum.push(base);
    for step in 1..=s {
        let g = parse_wgraph(&fs::read_to_string(dir.join(format!("graphs/g_{step}.wg")))?)?;
        if g.n() != 2 * n_side {
            return Err(Error::input(format!("g_{step}.wg has the wrong vertex count")));
        }
        let inc = collapse_graph(&g, &trace, step, &format!("g_{step}"), &mut checks);
        let two_x = 2 * params.x[step - 1] as usize;
        let kc = k[step];
        let mut cum = vec![vec![0i64; kc]; kc];
        for (p, row) in cum.iter_mut().enumerate() {
            for (q, slot) in row.iter_mut().enumerate() {
                *slot = trace.cum[step - 1][p / two_x][q / two_x] + inc[p][q];
            }
        }
        trace.cum.push(cum);
    }

    // final.wg must equal the cumulative sum.
    {
        let gf = parse_wgraph(&fs::read_to_string(dir.join("graphs/final.wg"))?)?;
        let fin = collapse_graph(&gf, &trace, s, "final", &mut checks);
        checks.push(if fin == trace.cum[s] {
            CheckItem::pass("final-conservation")
        } else {
            CheckItem::fail(
                "final-conservation",
                "final.wg differs from the sum of the step graphs",
            )
        });
    }

    // Activity flags from files, checked against the endpoint rule.
    let full = params.alpha_den as i64;
    for step in 1..=s {
        let kp = k[step - 1];
        let text = fs::read_to_string(dir.join(format!("active/step_{step}.txt")))?;
        let mut active = vec![vec![false; kp]; kp];
        for line in text.lines() {
            if line.trim().is_empty() {
                continue;
            }
            let mut x = None;
            let mut y = None;
            let mut a = None;
            for tok in line.split_whitespace() {
                match tok.split_once('=') {
                    Some(("X", v)) => x = v.parse::<usize>().ok(),
                    Some(("Y", v)) => y = v.parse::<usize>().ok(),
                    Some(("active", v)) => a = v.parse::<u8>().ok(),
                    _ => return Err(Error::input(format!("bad active line '{line}'"))),
                }
            }
            match (x, y, a) {
                (Some(x), Some(y), Some(a)) if x < kp && y < kp => active[x][y] = a == 1,
                _ => return Err(Error::input(format!("bad active line '{line}'"))),
            }
        }
        let mut ok = true;
        'check: for (x, row) in active.iter().enumerate() {
            for (y, &flag) in row.iter().enumerate() {
                let c = trace.cum[step - 1][x][y];
                if flag != (c != 0 && c != full) {
                    ok = false;
                    checks.push(CheckItem::fail(
                        format!("active-rule-step-{step}"),
                        format!("pair ({x}, {y}) flag contradicts the recorded weights"),
                    ));
                    break 'check;
                }
            }
        }
        if ok {
            checks.push(CheckItem::pass(format!("active-rule-step-{step}")));
        }
        trace.active.push(active);
    }

    Ok((trace, checks))
}

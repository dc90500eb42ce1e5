//! Batch front end: construct, verify, refine, measure, realize, report.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error,
//! 3 capacity/regime error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use regularity_core::construct::{
    build, parse_alpha, parse_exact_rational, plan_paper_params, read_trace_dir, residual_report,
    verify_construction, write_trace_dir, ConstructionParams, ConstructionTrace,
};
use regularity_core::diagnostics::{color_trace, counting_report, refinement_closeness};
use regularity_core::irregularity::DEFAULT_ENUMERATION_CAP;
use regularity_core::realize::{max_deviation_exact, round_to_unweighted, DEVIATION_CAP};
use regularity_core::spectral::{
    blow_up, mixing_report, parse_matrix, top_singular_value, write_matrix, RealMatrix,
};
use regularity_core::{
    irreg_exact_with_cap, irreg_partition_with_cap, parse_partition, parse_wgraph, write_wgraph,
    Error, VertexSet, WeightedGraph,
};

#[derive(Parser)]
#[command(
    name = "regularity",
    about = "Exact irregularity oracles, density-increment refinement, and tower-type constructions",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a construction trace directory from exact parameters.
    Construct(ConstructArgs),
    /// Re-check a trace directory structurally.
    Verify {
        /// Trace directory.
        #[arg(long)]
        trace: PathBuf,
    },
    /// Run the density-increment refinement loop on a graph.
    Refine {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        max_steps: usize,
        /// Enumeration cap for the exact oracle (hard limit 32).
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: usize,
        /// Output file for the run record.
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact irregularity of a pair of vertex sets or of a partition.
    Irreg {
        #[arg(long)]
        graph: PathBuf,
        /// Partition file (sums pair irregularity over all block pairs).
        #[arg(long, conflicts_with_all = ["x", "y"])]
        partition: Option<PathBuf>,
        /// First vertex set, comma-separated ids.
        #[arg(long, requires = "y")]
        x: Option<String>,
        /// Second vertex set, comma-separated ids.
        #[arg(long, requires = "x")]
        y: Option<String>,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: usize,
    },
    /// Round a weighted graph to an unweighted one.
    Realize {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Resample until the subset deviation meets 4N^(3/2)
        /// (requires N ≤ 12).
        #[arg(long)]
        check_deviation: bool,
        #[arg(long, default_value_t = 10)]
        attempts: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Singular-value reports.
    #[command(subcommand)]
    Spectral(SpectralCommand),
    /// Partition diagnostics against a trace.
    #[command(subcommand)]
    Diagnose(DiagnoseCommand),
    /// Full-scale parameter arithmetic for a given eps (exact rationals).
    Plan {
        /// eps as an exact decimal, scientific, or p/q rational.
        #[arg(long)]
        eps: String,
    },
}

#[derive(Args)]
struct ConstructArgs {
    /// Splitting factors, comma-separated (e.g. 2,2).
    #[arg(long)]
    x: String,
    /// α as an exact rational p/q with even 1/α (e.g. 1/4).
    #[arg(long)]
    alpha: String,
    /// Vertices per final-level part.
    #[arg(long)]
    block: usize,
    #[arg(long)]
    seed: u64,
    /// Enforce the separation properties by rejection sampling.
    #[arg(long)]
    strict: bool,
    #[arg(long, default_value_t = 1000)]
    max_attempts: u32,
    #[arg(long, default_value_t = 1.0)]
    r_scale: f64,
    #[arg(long, default_value_t = 1.0)]
    t_scale: f64,
    /// Output trace directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum SpectralCommand {
    /// Top singular value of a matrix.
    Sigma {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Both sides of the two mixing bounds for a row and column subset.
    Mixing {
        #[arg(long)]
        matrix: PathBuf,
        /// Row indices, comma-separated.
        #[arg(long)]
        rows: String,
        /// Column indices, comma-separated.
        #[arg(long)]
        cols: String,
    },
    /// k-blow-up of a matrix.
    Blowup {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Residual singular values of a trace after a given step.
    Residual {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        step: usize,
    },
}

#[derive(Subcommand)]
enum DiagnoseCommand {
    /// Majority coloring fractions per level.
    Color(DiagnoseArgs),
    /// Closeness-to-refinement fractions.
    Closeness(DiagnoseArgs),
    /// Counting comparisons at one step.
    Counting {
        #[command(flatten)]
        common: DiagnoseArgs,
        #[arg(long)]
        step: usize,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: usize,
    },
}

#[derive(Args)]
struct DiagnoseArgs {
    /// Trace directory.
    #[arg(long)]
    trace: PathBuf,
    /// Candidate partition file over all trace vertices.
    #[arg(long)]
    candidate: PathBuf,
}

fn parse_id_list(text: &str) -> Result<Vec<usize>, Error> {
    text.split(',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::input(format!("bad index '{t}'")))
        })
        .collect()
}

fn load_graph(path: &PathBuf) -> Result<WeightedGraph, Error> {
    parse_wgraph(&fs::read_to_string(path)?)
}

fn load_trace(path: &PathBuf) -> Result<(ConstructionTrace, bool), Error> {
    let (trace, checks) = read_trace_dir(path)?;
    Ok((trace, checks.iter().all(|c| c.pass)))
}

fn load_trace_verbose(path: &PathBuf) -> Result<(ConstructionTrace, bool), Error> {
    let (trace, checks) = read_trace_dir(path)?;
    let ok = checks.iter().all(|c| c.pass);
    for c in &checks {
        if c.pass {
            println!("check {}: PASS", c.name);
        } else {
            println!("check {}: FAIL {}", c.name, c.detail);
        }
    }
    Ok((trace, ok))
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Construct(args) => {
            let alpha_den = parse_alpha(&args.alpha)?;
            let x: Vec<u32> = args
                .x
                .split(',')
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.trim()
                        .parse::<u32>()
                        .map_err(|_| Error::input(format!("bad splitting factor '{t}'")))
                })
                .collect::<Result<_, _>>()?;
            let params = ConstructionParams {
                alpha_den,
                x,
                block_size: args.block,
                seed: args.seed,
                strict_properties: args.strict,
                max_attempts: args.max_attempts,
                r_scale: args.r_scale,
                t_scale: args.t_scale,
            };
            let trace = build(&params)?;
            write_trace_dir(&trace, &args.out)?;
            println!(
                "construct: s={} parts_per_side={} vertices_per_side={} -> {}",
                trace.steps(),
                trace.k.last().unwrap(),
                trace.n_side,
                args.out.display()
            );
            Ok(())
        }
        Command::Verify { trace } => {
            let (trace, files_ok) = load_trace_verbose(&trace)?;
            let report = verify_construction(&trace);
            print!("{report}");
            if !files_ok || !report.structural_pass() {
                return Err(Error::verification("structural checks failed"));
            }
            Ok(())
        }
        Command::Refine { graph, eps, max_steps, cap, out } => {
            let g = load_graph(&graph)?;
            let run = regularity_core::refine::regularize_with_cap(&g, eps, max_steps, cap)?;
            fs::write(&out, run.to_text())?;
            println!(
                "refine: steps={} final_parts={} final_irreg={} terminated={} -> {}",
                run.steps(),
                run.final_partition().num_blocks(),
                run.final_irregularity(),
                if run.hit_step_limit { "step-limit" } else { "criterion" },
                out.display()
            );
            Ok(())
        }
        Command::Irreg { graph, partition, x, y, cap } => {
            let g = load_graph(&graph)?;
            match (partition, x, y) {
                (Some(pfile), None, None) => {
                    let p = parse_partition(&fs::read_to_string(&pfile)?)?;
                    let (total, wits) = irreg_partition_with_cap(&g, &p, cap)?;
                    println!("{total}");
                    for ((i, j), wit) in &wits {
                        println!("pair {i} {j}: {}", wit.to_line());
                    }
                    Ok(())
                }
                (None, Some(xs), Some(ys)) => {
                    let x = VertexSet::new(parse_id_list(&xs)?);
                    let y = VertexSet::new(parse_id_list(&ys)?);
                    let wit = irreg_exact_with_cap(&g, &x, &y, cap)?;
                    println!("{}", wit.to_line());
                    Ok(())
                }
                _ => Err(Error::input("pass either --partition or both --x and --y")),
            }
        }
        Command::Realize { graph, seed, check_deviation, attempts, out } => {
            let g = load_graph(&graph)?;
            if check_deviation && g.n() > DEVIATION_CAP {
                return Err(Error::capacity(format!(
                    "--check-deviation needs at most {DEVIATION_CAP} vertices"
                )));
            }
            let target = 4.0 * (g.n() as f64).powf(1.5);
            let mut accepted = None;
            for attempt in 0..attempts.max(1) {
                let rounded = round_to_unweighted(&g, seed.wrapping_add(attempt))?;
                if !check_deviation {
                    accepted = Some((rounded, attempt, f64::NAN));
                    break;
                }
                let t = max_deviation_exact(&g, &rounded)?;
                if t <= target {
                    accepted = Some((rounded, attempt, t));
                    break;
                }
            }
            match accepted {
                Some((rounded, attempt, t)) => {
                    fs::write(&out, write_wgraph(&rounded))?;
                    if check_deviation {
                        println!(
                            "realize: attempt={attempt} deviation={t} target={target} -> {}",
                            out.display()
                        );
                    } else {
                        println!("realize: attempt={attempt} -> {}", out.display());
                    }
                    Ok(())
                }
                None => Err(Error::verification(format!(
                    "no rounding within deviation {target} after {attempts} attempts"
                ))),
            }
        }
        Command::Spectral(cmd) => run_spectral(cmd),
        Command::Diagnose(cmd) => run_diagnose(cmd),
        Command::Plan { eps } => {
            let eps = parse_exact_rational(&eps)?;
            let plan = plan_paper_params(&eps)?;
            print!("{plan}");
            Ok(())
        }
    }
}

fn load_matrix(path: &PathBuf) -> Result<RealMatrix, Error> {
    parse_matrix(&fs::read_to_string(path)?)
}

fn run_spectral(cmd: SpectralCommand) -> Result<(), Error> {
    match cmd {
        SpectralCommand::Sigma { matrix, tol } => {
            let m = load_matrix(&matrix)?;
            println!("{}", top_singular_value(&m, tol)?);
            Ok(())
        }
        SpectralCommand::Mixing { matrix, rows, cols } => {
            let m = load_matrix(&matrix)?;
            let b = parse_id_list(&rows)?;
            let c = parse_id_list(&cols)?;
            let rep = mixing_report(&m, &b, &c)?;
            println!("degree_square_sum,degree_square_bound,edge_sum_abs,edge_sum_bound");
            println!(
                "{},{},{},{}",
                rep.degree_square_sum, rep.degree_square_bound, rep.edge_sum_abs, rep.edge_sum_bound
            );
            Ok(())
        }
        SpectralCommand::Blowup { matrix, k, out } => {
            let m = load_matrix(&matrix)?;
            let blown = blow_up(&m, k)?;
            let text = write_matrix(&blown);
            match out {
                Some(path) => {
                    fs::write(&path, text)?;
                    println!("blowup: {}x{} -> {}", blown.rows(), blown.cols(), path.display());
                }
                None => print!("{text}"),
            }
            Ok(())
        }
        SpectralCommand::Residual { trace, step } => {
            let (trace, _) = load_trace(&trace)?;
            let rows = residual_report(&trace, step)?;
            println!("x,y,a,b,lambda,bound");
            for r in rows {
                println!("{},{},{},{},{},{}", r.x, r.y, r.a, r.b, r.lambda, r.bound);
            }
            Ok(())
        }
    }
}

fn run_diagnose(cmd: DiagnoseCommand) -> Result<(), Error> {
    let common = match &cmd {
        DiagnoseCommand::Color(a) | DiagnoseCommand::Closeness(a) => a,
        DiagnoseCommand::Counting { common, .. } => common,
    };
    let (trace, _) = load_trace(&common.trace)?;
    let candidate = parse_partition(&fs::read_to_string(&common.candidate)?)?;
    match cmd {
        DiagnoseCommand::Color(_) => {
            let colors = color_trace(&trace, &candidate)?;
            println!("level,v_blue_fraction,w_blue_fraction");
            for (level, lc) in colors.levels.iter().enumerate() {
                println!("{level},{},{}", lc.v_blue_fraction, lc.w_blue_fraction);
            }
            Ok(())
        }
        DiagnoseCommand::Closeness(_) => {
            let (fv, fw) = refinement_closeness(&trace, &candidate)?;
            println!("frac_v,frac_w");
            println!("{fv},{fw}");
            Ok(())
        }
        DiagnoseCommand::Counting { step, cap, .. } => {
            let report = counting_report(&trace, &candidate, step, cap)?;
            print!("{report}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            let code = match err {
                Error::Verification(_) | Error::ConstructionInfeasible { .. } => 1u8,
                Error::Input(_) | Error::Io(_) => 2,
                Error::Capacity(_) | Error::Regime(_) | Error::Numerical { .. } => 3,
            };
            ExitCode::from(code)
        }
    }
}

//! Command-line interface: graph/tensor/circuit file tooling, exponent
//! bounds, decompositions, treewidth, the hardness reductions, the entropy
//! bounds, and the end-to-end verification suite.
//!
//! Exit codes: 0 success, 1 failed checks, 2 usage errors.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use gtensor::circuits::{self, RankDecomposition};
use gtensor::config::{OutputFormat, RunConfig};
use gtensor::exponents::{self, StarSumMethod};
use gtensor::graphs::{self, FractionalGraph};
use gtensor::laser;
use gtensor::reductions;
use gtensor::report::DerivationReport;
use gtensor::tensors;
use gtensor::treewidth;
use gtensor::util::parse_rat;
use gtensor::{Error, Result};

#[derive(Parser)]
#[command(
    name = "gtensor",
    about = "Graph tensors: certified bounds on asymptotic rank and circuit exponents",
    version
)]
struct Cli {
    /// Config file (JSON); GTENSOR_CONFIG is consulted when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output format for reports.
    #[arg(long, global = true, value_parser = parse_format)]
    format: Option<OutputFormat>,
    /// Cap the worker threads used by parallel searches.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

fn parse_format(s: &str) -> std::result::Result<OutputFormat, String> {
    match s {
        "text" => Ok(OutputFormat::Text),
        "json" => Ok(OutputFormat::Json),
        other => Err(format!("unknown format {other:?} (use text or json)")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate or inspect graphs in the line-oriented text format.
    Graph {
        #[command(subcommand)]
        action: GraphAction,
    },
    /// Materialize and inspect sparse tensors.
    Tensor {
        #[command(subcommand)]
        action: TensorAction,
    },
    /// Build, evaluate, and check arithmetic circuits.
    Circuit {
        #[command(subcommand)]
        action: CircuitAction,
    },
    /// Treewidth and line-treewidth with witness decompositions.
    Tw(TwArgs),
    /// Star-sum exponent bound for d-mode tensors.
    Bound(BoundArgs),
    /// Optimize a conic decomposition of a graph.
    Decompose(DecomposeArgs),
    /// Emit the summary table of exponent bounds.
    Table,
    /// Run the hardness reductions.
    Reduce {
        #[command(subcommand)]
        action: ReduceAction,
    },
    /// Entropy bounds for the 4-clique exponent.
    Laser(LaserArgs),
    /// Run the verification suite (all criteria or one by key).
    Verify {
        /// Suite key, or `all`.
        #[arg(default_value = "all")]
        suite: String,
    },
}

#[derive(Subcommand)]
enum GraphAction {
    /// Write a named family to stdout or a file.
    Gen {
        /// clique | star | matching | cycle | path | grid | cat | incidence
        family: String,
        /// Family parameters, e.g. `gen clique 4` or `gen grid 3 3`.
        params: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse a graph file and report basic statistics.
    Info { file: PathBuf },
}

#[derive(Subcommand)]
enum TensorAction {
    /// Materialize the graph tensor of a graph file.
    Graph {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse a tensor file and report basic statistics.
    Info { file: PathBuf },
}

#[derive(Subcommand)]
enum CircuitAction {
    /// Generate a circuit (kind: treedec | yates | matching).
    Build(CircuitBuildArgs),
    /// Evaluate a circuit on input vectors.
    Eval {
        #[arg(long)]
        circuit: PathBuf,
        /// One line per mode, whitespace-separated rationals.
        #[arg(long)]
        inputs: PathBuf,
    },
    /// Check a circuit against a tensor on random input batches.
    Check {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        tensor: PathBuf,
        #[arg(long, default_value_t = 20)]
        batches: usize,
    },
}

#[derive(Args)]
struct CircuitBuildArgs {
    /// treedec | yates | matching
    kind: String,
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Tensor file for the yates rank decomposition (monomial terms).
    #[arg(long)]
    tensor: Option<PathBuf>,
    /// Kronecker power for yates.
    #[arg(long)]
    power: Option<usize>,
    /// Matching parameters.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    b: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TwArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Compute the line-treewidth instead of the treewidth.
    #[arg(long)]
    line: bool,
    /// Write the witness decomposition in the PACE-style format.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    d: usize,
    /// rank | treewidth | mixed
    #[arg(long, default_value = "rank")]
    method: String,
}

#[derive(Args)]
struct DecomposeArgs {
    #[arg(long)]
    graph: PathBuf,
}

#[derive(Subcommand)]
enum ReduceAction {
    /// Permanent of an integer matrix through the grid tensor.
    Permanent {
        /// Whitespace-separated rows.
        #[arg(long)]
        matrix: PathBuf,
        /// Also run the exhaustive assignment sum (n = 2 only).
        #[arg(long)]
        bruteforce: bool,
    },
    /// Hyperclique projection check.
    Hyperclique {
        #[arg(long, alias = "N", default_value_t = 2)]
        n: usize,
    },
}

#[derive(Args)]
struct LaserArgs {
    /// tau-k4 | sweep | mu
    #[arg(default_value = "tau-k4")]
    action: String,
    #[arg(long)]
    q: Option<u64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Optimize over gamma (and q in 2..=16 when --q is absent).
    #[arg(long)]
    optimize: bool,
    /// Grid size for `sweep`.
    #[arg(long)]
    sweep: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(all_pass) => {
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Error::InvalidArgument(msg)) | Err(Error::Parse(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn emit(config: &RunConfig, format: Option<OutputFormat>, report: DerivationReport, text: String) {
    match format.unwrap_or(config.format) {
        OutputFormat::Json => println!("{}", report.to_json()),
        OutputFormat::Text => print!("{text}"),
    }
}

fn write_or_print(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(p) => {
            std::fs::write(p, content)?;
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let config = RunConfig::resolve(cli.config.as_deref())?;
    config.validate()?;
    if let Some(t) = cli.threads.or(config.threads) {
        // fall through when a pool already exists (e.g. repeated calls)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let format = cli.format;
    let start = Instant::now();

    match cli.command {
        Command::Graph { action } => match action {
            GraphAction::Gen { family, params, out } => {
                let g = generate_family(&family, &params)?;
                write_or_print(&out, &graphs::write_graph(&g))?;
                Ok(true)
            }
            GraphAction::Info { file } => {
                let g = graphs::parse_graph(&std::fs::read_to_string(&file)?)?;
                let report = DerivationReport::new(
                    "graph info",
                    serde_json::json!({"file": file}),
                    None,
                    serde_json::json!({
                        "vertices": g.num_vertices(),
                        "edges": g.num_edges(),
                        "max_degree": g.max_degree(),
                        "integer_weights": g.has_integer_weights(),
                        "common_denominator": g.common_denominator().to_string(),
                    }),
                    start.elapsed(),
                );
                let text = format!(
                    "vertices {}  edges {}  max degree {}  common denominator {}\n",
                    g.num_vertices(),
                    g.num_edges(),
                    g.max_degree(),
                    g.common_denominator()
                );
                emit(&config, format, report, text);
                Ok(true)
            }
        },
        Command::Tensor { action } => match action {
            TensorAction::Graph { graph, n, out } => {
                let g = graphs::parse_graph(&std::fs::read_to_string(&graph)?)?.integerized();
                let t = tensors::graph_tensor_with_limit(&g, n, config.tensor_nonzero_limit)?;
                write_or_print(&out, &tensors::write_tensor(&t))?;
                Ok(true)
            }
            TensorAction::Info { file } => {
                let t = tensors::parse_tensor(&std::fs::read_to_string(&file)?)?;
                println!("modes {:?}  nonzeros {}", t.mode_dims(), t.nnz());
                Ok(true)
            }
        },
        Command::Circuit { action } => run_circuit(action, &config, format, start),
        Command::Tw(args) => {
            let g = graphs::parse_graph(&std::fs::read_to_string(&args.graph)?)?;
            let (value, td, kind) = if args.line {
                let (bound, td) = treewidth::ltw(&g)?;
                (serde_json::to_value(bound).unwrap(), td, "line-treewidth")
            } else if g.num_vertices() <= treewidth::EXACT_TW_VERTEX_LIMIT {
                let (w, td) = treewidth::exact_treewidth(&g)?;
                (serde_json::json!({"Exact": w}), td, "treewidth")
            } else {
                let (lo, hi, td) = treewidth::bounds_treewidth(&g);
                (serde_json::json!({"Interval": [lo, hi]}), td, "treewidth")
            };
            let pace = treewidth::write_tree_decomposition(&td);
            if let Some(out) = &args.out {
                std::fs::write(out, &pace)?;
            }
            let report = DerivationReport::new(
                "tw",
                serde_json::json!({"graph": args.graph, "line": args.line}),
                None,
                serde_json::json!({"kind": kind, "value": value, "width": td.width()}),
                start.elapsed(),
            );
            emit(&config, format, report, format!("{kind}: {value}\n{pace}"));
            Ok(true)
        }
        Command::Bound(args) => {
            let method = match args.method.as_str() {
                "rank" => StarSumMethod::Rank,
                "treewidth" => StarSumMethod::Treewidth,
                "mixed" => StarSumMethod::Mixed,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown method {other:?} (rank | treewidth | mixed)"
                    )))
                }
            };
            let table = config.omega_table()?;
            let bound =
                exponents::star_sum_bound(args.d, method, &table, &config.decompose_config())?;
            let mut tree = String::new();
            bound.derivation.render(0, &mut tree);
            let report = DerivationReport::new(
                "bound",
                serde_json::json!({"d": args.d, "method": args.method}),
                Some(&table),
                serde_json::to_value(&bound).unwrap(),
                start.elapsed(),
            );
            emit(
                &config,
                format,
                report,
                format!(
                    "exponent bound for d={}: {} (~{:.6})\n{tree}",
                    args.d,
                    gtensor::util::fmt_rat(&bound.value),
                    bound.to_f64()
                ),
            );
            Ok(true)
        }
        Command::Decompose(args) => {
            let g = graphs::parse_graph(&std::fs::read_to_string(&args.graph)?)?;
            let table = config.omega_table()?;
            let (dec, bound) =
                exponents::decompose_optimize(&g, &table, &config.decompose_config())?;
            let mut tree = String::new();
            bound.derivation.render(0, &mut tree);
            let parts: Vec<String> = dec
                .parts
                .iter()
                .map(|p| format!("{:?} x {}", p.kind, gtensor::util::fmt_rat(&p.weight)))
                .collect();
            let report = DerivationReport::new(
                "decompose",
                serde_json::json!({"graph": args.graph}),
                Some(&table),
                serde_json::json!({
                    "bound": bound,
                    "parts": parts,
                }),
                start.elapsed(),
            );
            emit(
                &config,
                format,
                report,
                format!(
                    "bound {} (~{:.6})\nparts:\n  {}\n{tree}",
                    gtensor::util::fmt_rat(&bound.value),
                    bound.to_f64(),
                    parts.join("\n  ")
                ),
            );
            Ok(true)
        }
        Command::Table => {
            let table = config.omega_table()?;
            let t1 = exponents::table1(&table, &config.decompose_config())?;
            let report = DerivationReport::new(
                "table",
                serde_json::json!({}),
                Some(&table),
                serde_json::to_value(&t1).unwrap(),
                start.elapsed(),
            );
            emit(&config, format, report, t1.render_text());
            Ok(true)
        }
        Command::Reduce { action } => match action {
            ReduceAction::Permanent { matrix, bruteforce } => {
                let a = reductions::parse_matrix(&std::fs::read_to_string(&matrix)?)?;
                let (plan, value) = reductions::permanent_reduction(&a)?;
                let ryser = reductions::permanent_ryser(&a);
                let brute = if bruteforce {
                    Some(reductions::permanent_bruteforce_check(&a)?)
                } else {
                    None
                };
                let ok = value == ryser
                    && brute
                        .as_ref()
                        .map(|b| b.matches_circuit && b.flip_invariant_ok)
                        .unwrap_or(true);
                let report = DerivationReport::new(
                    "reduce permanent",
                    serde_json::json!({"matrix": matrix}),
                    None,
                    serde_json::json!({
                        "permanent": value.to_string(),
                        "ryser": ryser.to_string(),
                        "plan": plan,
                        "bruteforce": brute,
                        "pass": ok,
                    }),
                    start.elapsed(),
                );
                emit(
                    &config,
                    format,
                    report,
                    format!(
                        "permanent = {value} (inclusion-exclusion oracle {ryser}, {})\n",
                        if ok { "agree" } else { "MISMATCH" }
                    ),
                );
                Ok(ok)
            }
            ReduceAction::Hyperclique { n } => {
                let r = reductions::hyperclique_projection_check(n)?;
                let report = DerivationReport::new(
                    "reduce hyperclique",
                    serde_json::json!({"n": n}),
                    None,
                    serde_json::to_value(&r).unwrap(),
                    start.elapsed(),
                );
                emit(
                    &config,
                    format,
                    report,
                    format!(
                        "projection at N={n}: {} ({} incidence nonzeros)\n",
                        if r.pass { "exact" } else { "MISMATCH" },
                        r.incidence_nonzeros
                    ),
                );
                Ok(r.pass)
            }
        },
        Command::Laser(args) => run_laser(args, &config, format, start),
        Command::Verify { suite } => {
            let results = gtensor::verify::run_suite(Some(suite.as_str()), &config)?;
            let mut pass = true;
            for r in &results {
                println!("{}", r.render_line());
                pass &= r.pass;
            }
            println!("{}", if pass { "all criteria passed" } else { "FAILURES present" });
            Ok(pass)
        }
    }
}

fn generate_family(family: &str, params: &[usize]) -> Result<FractionalGraph> {
    let need = |n: usize| -> Result<()> {
        if params.len() != n {
            return Err(Error::InvalidArgument(format!(
                "{family} expects {n} parameter(s), got {}",
                params.len()
            )));
        }
        Ok(())
    };
    match family {
        "clique" => {
            need(1)?;
            graphs::clique(params[0])
        }
        "star" => {
            need(2)?;
            graphs::star(params[0], params[1])
        }
        "matching" => {
            need(1)?;
            graphs::matching(params[0])
        }
        "cycle" => {
            need(1)?;
            graphs::cycle(params[0])
        }
        "path" => {
            need(1)?;
            graphs::path(params[0])
        }
        "grid" => {
            need(2)?;
            graphs::grid(params[0], params[1])
        }
        "cat" => {
            need(2)?;
            graphs::cat(params[0], params[1])
        }
        "incidence" => {
            need(2)?;
            graphs::hyperclique_incidence(params[0], params[1])
        }
        other => Err(Error::InvalidArgument(format!(
            "unknown family {other:?} (clique, star, matching, cycle, path, grid, cat, incidence)"
        ))),
    }
}

fn run_circuit(
    action: CircuitAction,
    config: &RunConfig,
    format: Option<OutputFormat>,
    start: Instant,
) -> Result<bool> {
    match action {
        CircuitAction::Build(args) => {
            let (circuit, summary) = match args.kind.as_str() {
                "treedec" => {
                    let graph = args
                        .graph
                        .ok_or_else(|| Error::InvalidArgument("treedec needs --graph".into()))?;
                    let n = args
                        .n
                        .ok_or_else(|| Error::InvalidArgument("treedec needs --n".into()))?;
                    let g = graphs::parse_graph(&std::fs::read_to_string(&graph)?)?.integerized();
                    let (_, td) = treewidth::ltw(&g)?;
                    let (c, report) = circuits::treedec_circuit(&g, n, &td)?;
                    (c, serde_json::to_value(&report).unwrap())
                }
                "yates" => {
                    let tensor = args
                        .tensor
                        .ok_or_else(|| Error::InvalidArgument("yates needs --tensor".into()))?;
                    let k = args
                        .power
                        .ok_or_else(|| Error::InvalidArgument("yates needs --power".into()))?;
                    let t = tensors::parse_tensor(&std::fs::read_to_string(&tensor)?)?;
                    let decomp = RankDecomposition::from_tensor_monomials(&t)?;
                    let (c, report) = circuits::yates_circuit(&decomp, k)?;
                    (c, serde_json::to_value(&report).unwrap())
                }
                "matching" => {
                    let (k, n, b) = (
                        args.k
                            .ok_or_else(|| Error::InvalidArgument("matching needs --k".into()))?,
                        args.n
                            .ok_or_else(|| Error::InvalidArgument("matching needs --n".into()))?,
                        args.b.unwrap_or(1),
                    );
                    let (c, report) = circuits::matching_formula_circuit(k, n, b)?;
                    (c, serde_json::to_value(&report).unwrap())
                }
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown circuit kind {other:?} (treedec | yates | matching)"
                    )))
                }
            };
            write_or_print(&args.out, &circuits::write_circuit(&circuit))?;
            let (_, folded) = circuit.optimize();
            eprintln!("size report: {summary}");
            eprintln!(
                "wires: {} before folding, {} after (input-sourced {})",
                folded.wires_before_folding, folded.wires, folded.input_sourced_wires
            );
            Ok(true)
        }
        CircuitAction::Eval { circuit, inputs } => {
            let c = circuits::parse_circuit(&std::fs::read_to_string(&circuit)?)?;
            let text = std::fs::read_to_string(&inputs)?;
            let vectors: Vec<Vec<gtensor::util::Rat>> = text
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(|l| l.split_whitespace().map(parse_rat).collect())
                .collect::<Result<_>>()?;
            let out = c.evaluate(&vectors)?;
            for v in out {
                println!("{}", gtensor::util::fmt_rat(&v));
            }
            Ok(true)
        }
        CircuitAction::Check { circuit, tensor, batches } => {
            use rand::{Rng, SeedableRng};
            let c = circuits::parse_circuit(&std::fs::read_to_string(&circuit)?)?;
            let t = tensors::parse_tensor(&std::fs::read_to_string(&tensor)?)?;
            if c.mode_dims != t.mode_dims() {
                return Err(Error::InvalidArgument(format!(
                    "circuit interface {:?} does not match tensor {:?}",
                    c.mode_dims,
                    t.mode_dims()
                )));
            }
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed_c4ec);
            let mut pass = true;
            for _ in 0..batches {
                let inputs: Vec<Vec<gtensor::util::Rat>> = t
                    .mode_dims()
                    .iter()
                    .map(|&d| {
                        (0..d)
                            .map(|_| {
                                gtensor::util::rat(
                                    rng.gen_range(-3i64..=3),
                                    rng.gen_range(1i64..=2),
                                )
                            })
                            .collect()
                    })
                    .collect();
                if c.evaluate_scalar(&inputs)? != t.evaluate(&inputs)? {
                    pass = false;
                }
            }
            let report = DerivationReport::new(
                "circuit check",
                serde_json::json!({"circuit": circuit, "tensor": tensor, "batches": batches}),
                None,
                serde_json::json!({"pass": pass}),
                start.elapsed(),
            );
            emit(
                config,
                format,
                report,
                format!(
                    "{} on {batches} random batches\n",
                    if pass { "match" } else { "MISMATCH" }
                ),
            );
            Ok(pass)
        }
    }
}

fn run_laser(
    args: LaserArgs,
    config: &RunConfig,
    format: Option<OutputFormat>,
    start: Instant,
) -> Result<bool> {
    match args.action.as_str() {
        "tau-k4" => {
            if let Some(grid) = args.sweep {
                let r = laser::verify_relation_sweep(grid)?;
                let pass = r.pass;
                let report = DerivationReport::new(
                    "laser tau-k4 --sweep",
                    serde_json::json!({"grid": grid}),
                    None,
                    serde_json::to_value(&r).unwrap(),
                    start.elapsed(),
                );
                emit(
                    config,
                    format,
                    report,
                    format!("sweep on {grid} points: {}\n", if pass { "pass" } else { "FAIL" }),
                );
                return Ok(pass);
            }
            if args.optimize {
                let range: Vec<u64> = match args.q {
                    Some(q) => vec![q],
                    None => (2..=16).collect(),
                };
                let best = laser::optimize_tau_k4(&range)?;
                let report = DerivationReport::new(
                    "laser tau-k4 --optimize",
                    serde_json::json!({"q_range": range}),
                    None,
                    serde_json::to_value(best).unwrap(),
                    start.elapsed(),
                );
                emit(
                    config,
                    format,
                    report,
                    format!(
                        "best bound {:.9} at q = {}, gamma = {:.10}\n",
                        best.bound, best.q, best.gamma
                    ),
                );
                Ok(true)
            } else {
                let q = args.q.unwrap_or(7);
                let gamma = args.gamma.unwrap_or(0.0);
                let bound = laser::tau_k4_bound(q, gamma)?;
                let report = DerivationReport::new(
                    "laser tau-k4",
                    serde_json::json!({"q": q, "gamma": gamma}),
                    None,
                    serde_json::json!({"bound": bound, "mu": laser::mu(gamma)?}),
                    start.elapsed(),
                );
                emit(
                    config,
                    format,
                    report,
                    format!("tau bound at q={q}, gamma={gamma}: {bound:.9}\n"),
                );
                Ok(true)
            }
        }
        "sweep" => {
            let grid = args.sweep.unwrap_or(config.sweep_grid);
            let r = laser::verify_relation_sweep(grid)?;
            let pass = r.pass;
            let report = DerivationReport::new(
                "laser sweep",
                serde_json::json!({"grid": grid}),
                None,
                serde_json::to_value(&r).unwrap(),
                start.elapsed(),
            );
            emit(
                config,
                format,
                report,
                format!(
                    "sweep on {grid} points: {} (ranks {:?}, max D'' rel err {:.2e})\n",
                    if pass { "pass" } else { "FAIL" },
                    r.ranks,
                    r.max_d2_relative_error
                ),
            );
            Ok(pass)
        }
        "mu" => {
            let gamma = args.gamma.unwrap_or(0.0);
            let (m, consistency) = laser::mu_with_consistency(gamma)?;
            println!("mu({gamma}) = {m:.12} (relation minimum {consistency:.12})");
            Ok((m - consistency).abs() <= config.entropy_tolerance)
        }
        other => Err(Error::InvalidArgument(format!(
            "unknown laser action {other:?} (tau-k4 | sweep | mu)"
        ))),
    }
}

//! `qotsim`: command-line front end for the oblivious-transfer simulator.
//!
//! Every subcommand writes a single JSON document to stdout with an embedded
//! run manifest (subcommand, parameters, seed, version, timestamp); identical
//! manifests produce byte-identical output. Diagnostics go to stderr and the
//! exit code is zero exactly when the run succeeded. `--pretty` switches to a
//! human summary. Set `QOTSIM_TIMESTAMP` to pin the manifest timestamp (for
//! reproducible pipelines) and `QOTSIM_THREADS` to cap Monte Carlo workers.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use qotsim_core::cheating::{
    alice_cheat_optimize, alice_cheat_probability, alice_cheat_simulate, bob_cheat_simulate,
    CheatStateParams,
};
use qotsim_core::circuit::verify_reference_preparation;
use qotsim_core::experiment::{analyze_table, bundled, load_counts};
use qotsim_core::protocol::{
    combined_analytic, equalizing_mix_probability, run_combined, run_honest, ProtocolConfig,
};
use qotsim_core::{bounds, Error};

/// Default seed for all randomized subcommands; override with --seed.
const DEFAULT_SEED: u64 = 20_240;

#[derive(Parser)]
#[command(
    name = "qotsim",
    version,
    about = "Simulator and analysis toolkit for imperfect 1-out-of-2 quantum oblivious transfer"
)]
struct Cli {
    /// Seed for all randomness (fixed default, never silent entropy).
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Human-readable summary instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic cheating-probability bounds as functions of the fidelity F.
    Bounds(BoundsArgs),
    /// Monte Carlo protocol runs, honest or under an optimal cheat.
    Simulate(SimulateArgs),
    /// The probabilistic mix of the protocol with the trivial one.
    Combined(CombinedArgs),
    /// Numeric search for the sender's optimal cheating state.
    OptimizeCheat(OptimizeArgs),
    /// Circuit-level preparation of the sender's cheating state.
    Prep(PrepArgs),
    /// Reanalysis of experimental count tables.
    Compare(CompareArgs),
}

#[derive(Args, Serialize)]
struct BoundsArgs {
    /// Evaluate all bounds at a single fidelity value.
    #[arg(long, conflicts_with_all = ["curve", "minimax"])]
    f: Option<f64>,

    /// Evaluate the bounds over a grid, formatted start:stop:step.
    #[arg(long, conflicts_with = "minimax")]
    curve: Option<String>,

    /// Minimize the larger of the two parties' bounds over F.
    #[arg(long)]
    minimax: bool,

    /// With --minimax: use the tighter pure-symmetric receiver bound.
    #[arg(long, requires = "minimax")]
    pure_symmetric: bool,
}

#[derive(Args, Serialize)]
struct SimulateArgs {
    /// Number of protocol rounds (>= 4).
    #[arg(long, default_value_t = 100_000)]
    rounds: usize,

    /// Which party cheats.
    #[arg(long, value_enum, default_value_t = CheatParty::None)]
    cheat: CheatParty,

    /// Write the per-round transcript as line-delimited JSON (honest runs).
    #[arg(long)]
    export: Option<std::path::PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum CheatParty {
    None,
    Alice,
    Bob,
}

#[derive(Args, Serialize)]
struct CombinedArgs {
    /// Mixing probability; defaults to the equalizing value ~0.9589.
    #[arg(long)]
    p: Option<f64>,

    /// Monte Carlo rounds.
    #[arg(long, default_value_t = 100_000)]
    runs: usize,
}

#[derive(Args, Serialize)]
struct OptimizeArgs {
    /// Number of random restarts.
    #[arg(long, default_value_t = 20)]
    restarts: usize,
}

#[derive(Args, Serialize)]
struct PrepArgs {
    /// Verify the published parameter table against the target state.
    #[arg(long = "verify-table-iv", default_value_t = true)]
    verify_table_iv: bool,

    /// Multi-start budget for the local-unitary search.
    #[arg(long, default_value_t = 50)]
    starts: usize,
}

#[derive(Args, Serialize)]
struct CompareArgs {
    /// Path to a count-table CSV (header `table_id,input_state,outcome,counts` with optional `p_t`).
    #[arg(long, conflicts_with = "bundled")]
    data: Option<std::path::PathBuf>,

    /// A bundled table id, or "all".
    #[arg(long)]
    bundled: Option<String>,
}

#[derive(Serialize)]
struct Manifest {
    subcommand: &'static str,
    params: serde_json::Value,
    seed: u64,
    artifact_version: &'static str,
    timestamp: String,
}

impl Manifest {
    fn new(subcommand: &'static str, params: serde_json::Value, seed: u64) -> Self {
        let timestamp = std::env::var("QOTSIM_TIMESTAMP").unwrap_or_else(|_| {
            chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
        });
        Self {
            subcommand,
            params,
            seed,
            artifact_version: env!("CARGO_PKG_VERSION"),
            timestamp,
        }
    }
}

#[derive(Serialize)]
struct Output<T: Serialize> {
    manifest: Manifest,
    result: T,
}

fn emit<T: Serialize>(manifest: Manifest, result: T, pretty: bool, summary: String) {
    if pretty {
        println!("{summary}");
    } else {
        let out = Output { manifest, result };
        println!(
            "{}",
            serde_json::to_string(&out).expect("serializable output")
        );
    }
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::InvalidConfig(format!("--curve expects start:stop:step, got {spec}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].parse().map_err(|_| bad())?;
    let step: f64 = parts[2].parse().map_err(|_| bad())?;
    if step.is_nan() || step <= 0.0 || stop < start {
        return Err(bad());
    }
    let mut grid = Vec::new();
    let mut f = start;
    while f <= stop + 1e-12 {
        grid.push(f.min(stop));
        f += step;
    }
    Ok(grid)
}

fn run(cli: Cli) -> Result<(), Error> {
    let seed = cli.seed;
    let pretty = cli.pretty;
    match cli.command {
        Command::Bounds(args) => {
            let params = serde_json::to_value(&args).expect("args serialize");
            let manifest = Manifest::new("bounds", params, seed);
            if args.minimax {
                let (f, value) = if args.pure_symmetric {
                    bounds::minimax_pure_symmetric()
                } else {
                    bounds::minimax_general()
                };
                let summary = format!("minimax: F* = {f:.6}, value = {value:.6}");
                emit(manifest, json!({ "F": f, "value": value }), pretty, summary);
            } else if let Some(spec) = args.curve {
                let grid = parse_grid(&spec)?;
                let points = bounds::tradeoff_curve(&grid)?;
                let mut csv =
                    String::from("f,alice_bound,bob_bound_general,bob_bound_pure_symmetric\n");
                for p in &points {
                    let pure = p
                        .bob_bound_pure_symmetric
                        .map_or(String::new(), |v| format!("{v}"));
                    csv.push_str(&format!(
                        "{},{},{},{}\n",
                        p.f, p.alice_bound, p.bob_bound_general, pure
                    ));
                }
                let summary = format!("{} grid points\n{csv}", points.len());
                emit(
                    manifest,
                    json!({
                        "points": points,
                        "csv": csv,
                        "note": "bounds are reported raw; values below 1/2 are vacuous as bounds",
                    }),
                    pretty,
                    summary,
                );
            } else if let Some(f) = args.f {
                let point = bounds::tradeoff_curve(&[f])?.remove(0);
                let summary = format!(
                    "F = {f}: sender bound {:.6}, receiver bound {:.6}, pure-symmetric {}",
                    point.alice_bound,
                    point.bob_bound_general,
                    point
                        .bob_bound_pure_symmetric
                        .map_or("n/a (F > 1/2)".to_string(), |v| format!("{v:.6}")),
                );
                emit(
                    manifest,
                    json!({
                        "point": point,
                        "note": "bounds are reported raw; values below 1/2 are vacuous as bounds",
                    }),
                    pretty,
                    summary,
                );
            } else {
                return Err(Error::InvalidConfig(
                    "bounds needs one of --f, --curve, --minimax".into(),
                ));
            }
        }
        Command::Simulate(args) => {
            if args.rounds < 4 {
                return Err(Error::InvalidConfig(format!(
                    "need at least 4 rounds, got {}",
                    args.rounds
                )));
            }
            let params = serde_json::to_value(&args).expect("args serialize");
            let manifest = Manifest::new("simulate", params, seed);
            match args.cheat {
                CheatParty::None => {
                    let config = ProtocolConfig::new(args.rounds, seed)?;
                    let transcript = run_honest(config)?;
                    if let Some(path) = &args.export {
                        let file = std::fs::File::create(path)?;
                        transcript.write_jsonl(std::io::BufWriter::new(file))?;
                        eprintln!("transcript written to {}", path.display());
                    }
                    let outputs: Vec<_> = transcript.payload_outputs().collect();
                    let correct = outputs
                        .iter()
                        .filter(|(input, out)| {
                            let (x0, x1) = input.bits();
                            out.y == if out.c == 0 { x0 } else { x1 }
                        })
                        .count();
                    let c0 = outputs.iter().filter(|(_, out)| out.c == 0).count();
                    let n = outputs.len();
                    let correct_rate = correct as f64 / n as f64;
                    let c0_rate = c0 as f64 / n as f64;
                    let result = json!({
                        "mode": "honest",
                        "total_rounds": config.total_rounds,
                        "test_rounds": config.test_count,
                        "payload_rounds": n,
                        "aborted": transcript.aborted(),
                        "correct_bit_rate": correct_rate,
                        "c0_frequency": c0_rate,
                        "c0_sigma": (c0_rate * (1.0 - c0_rate) / n as f64).sqrt(),
                    });
                    let summary = format!(
                        "honest run: {n} payload rounds, correct-bit rate {correct_rate}, \
                         c = 0 frequency {c0_rate:.4}, aborted: {}",
                        transcript.aborted()
                    );
                    emit(manifest, result, pretty, summary);
                }
                CheatParty::Bob => {
                    let report = bob_cheat_simulate(args.rounds, seed)?;
                    let summary = format!(
                        "receiver cheat: {:.4} +- {:.4} (closed form {:.4})",
                        report.estimate,
                        report.sigma,
                        report.closed_form.unwrap_or(f64::NAN)
                    );
                    emit(manifest, report, pretty, summary);
                }
                CheatParty::Alice => {
                    let report = alice_cheat_simulate(
                        &CheatStateParams::balanced_optimal(),
                        args.rounds,
                        seed,
                    )?;
                    let summary = format!(
                        "sender cheat: {:.4} +- {:.4} (closed form {:.4}), detection {:?}",
                        report.estimate,
                        report.sigma,
                        report.closed_form.unwrap_or(f64::NAN),
                        report.detection
                    );
                    emit(manifest, report, pretty, summary);
                }
            }
        }
        Command::Combined(args) => {
            let params = serde_json::to_value(&args).expect("args serialize");
            let manifest = Manifest::new("combined", params, seed);
            let (equalizing_p, equalizing_value) = equalizing_mix_probability();
            let p = args.p.unwrap_or(equalizing_p);
            let report = run_combined(p, args.runs, seed)?;
            let (analytic_alice, analytic_bob) = combined_analytic(p);
            let summary = format!(
                "p = {p:.6}: sender {:.4} (analytic {analytic_alice:.4}), \
                 receiver {:.4} (analytic {analytic_bob:.4}); equalizing p = {equalizing_p:.6} \
                 with value {equalizing_value:.6}",
                report.mc_alice, report.mc_bob
            );
            emit(
                manifest,
                json!({
                    "report": report,
                    "equalizing_p": equalizing_p,
                    "equalizing_value": equalizing_value,
                }),
                pretty,
                summary,
            );
        }
        Command::OptimizeCheat(args) => {
            let params = serde_json::to_value(&args).expect("args serialize");
            let manifest = Manifest::new("optimize-cheat", params, seed);
            let (best, value) = alice_cheat_optimize(seed, args.restarts)?;
            let (w02, w13) = best.branch_weights();
            let summary = format!(
                "optimal cheating probability {value:.9} (target 0.75); \
                 branch weights {w02:.6} / {w13:.6}"
            );
            emit(
                manifest,
                json!({
                    "value": value,
                    "closed_form_maximum": qotsim_core::alice_optimal_cheat(),
                    "params": best,
                    "branch_weights": [w02, w13],
                    "closed_form_at_params": alice_cheat_probability(&best),
                }),
                pretty,
                summary,
            );
        }
        Command::Prep(args) => {
            if !args.verify_table_iv {
                return Err(Error::InvalidConfig(
                    "prep currently only supports --verify-table-iv".into(),
                ));
            }
            let params = serde_json::to_value(&args).expect("args serialize");
            let manifest = Manifest::new("prep", params, seed);
            let report = verify_reference_preparation(args.starts, seed)?;
            let summary = format!(
                "E = {:.12} (1 - E = {:.3e}), spectrum deviation {:.3e}, converged: {}",
                report.e, report.one_minus_e, report.spectrum_deviation, report.converged
            );
            emit(manifest, report, pretty, summary);
        }
        Command::Compare(args) => {
            let params = serde_json::to_value(&args).expect("args serialize");
            let manifest = Manifest::new("compare", params, seed);
            let tables = if let Some(path) = &args.data {
                vec![load_counts(path)?]
            } else {
                match args.bundled.as_deref() {
                    Some("all") => bundled::all()?,
                    Some(id) => vec![bundled::table(id)?],
                    None => {
                        return Err(Error::InvalidConfig(
                            "compare needs --data <csv> or --bundled <id|all>".into(),
                        ))
                    }
                }
            };
            let reports = tables
                .iter()
                .map(analyze_table)
                .collect::<Result<Vec<_>, _>>()?;
            let mut summary = String::new();
            for report in &reports {
                summary.push_str(&format!("table {}\n", report.table_id));
                for agg in &report.aggregates {
                    summary.push_str(&format!(
                        "  {}: {} (theory {:.4})\n",
                        agg.name, agg.display, agg.theory
                    ));
                }
            }
            emit(manifest, json!({ "tables": reports }), pretty, summary);
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(1);
    }
}

//! Experiment runner CLI: single runs, seed sweeps, analytic oracle
//! checks, and the telemetry schema.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use diverse_pop::harness::{
    run_experiment, run_sweep, EngineKind, ExperimentConfig, SWEEP_CSV_HEADER,
};
use diverse_pop::protocol::{Configuration, SimRng, WeightTable};
use diverse_pop::reference::{
    build_equilibrium_chain, build_perturbed_chain, gamblers_ruin, kernel_by_pair_enumeration,
    ruin_by_linear_solve, stationary_distribution, stationary_residual, ChainState, ConfigChain,
    Direction, GamblersRuinSpec,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "diverse-pop", version, about = "Weighted diversification protocol harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one run and write telemetry plus a report.
    Run(RunArgs),
    /// Execute one run per seed in parallel and aggregate a CSV.
    Sweep(SweepArgs),
    /// Analytic oracle suites; nonzero exit on tolerance breach.
    Oracle {
        #[command(subcommand)]
        suite: OracleSuite,
    },
    /// Print the JSON schemas of configs, telemetry, events, and the CSV.
    Schema,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for telemetry.jsonl and report.json.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    engine: Option<EngineKind>,
    #[arg(long)]
    snapshot_every: Option<u64>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated list of distinct seeds.
    #[arg(long, value_delimiter = ',', required = true)]
    seeds: Vec<u64>,
    /// Worker cap; defaults to DIVERSE_POP_THREADS or all cores.
    #[arg(long)]
    parallelism: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum OracleSuite {
    /// Closed-form stationary distribution vs `pi P = pi` and linear solve.
    Stationary {
        #[arg(long, value_delimiter = ',', required = true)]
        w: Vec<f64>,
        #[arg(long)]
        n: u64,
    },
    /// Perturbed-chain stationary shift must stay within 10 * err.
    Perturbed {
        #[arg(long, value_delimiter = ',', required = true)]
        w: Vec<f64>,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 1e-3)]
        err: f64,
    },
    /// Gambler's ruin closed forms vs an exact linear solve.
    Ruin {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        s: u64,
        #[arg(long)]
        b: u64,
    },
    /// Exact class-based kernel vs brute-force pair enumeration, all
    /// configurations up to the given population size.
    Kernel {
        #[arg(long, default_value_t = 4)]
        n: u64,
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1.0])]
        w: Vec<f64>,
    },
    /// Exact small-chain occupancy vs a long engine run.
    Chain {
        #[arg(long, value_delimiter = ',', required = true)]
        w: Vec<f64>,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 1_000_000)]
        steps: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Oracle { suite } => cmd_oracle(suite),
        Command::Schema => {
            println!("{}", serde_json::to_string_pretty(&schema())?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    ExperimentConfig::from_json(&text).with_context(|| {
        format!("parsing config {} (serde reports line:column)", path.display())
    })
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let mut config = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(steps) = args.steps {
        config.steps = steps;
    }
    if let Some(engine) = args.engine {
        config.engine = engine;
    }
    if let Some(every) = args.snapshot_every {
        config.snapshot_every = Some(every);
    }
    fs::create_dir_all(&args.out)?;
    let telemetry_path = args.out.join("telemetry.jsonl");
    let mut telemetry = BufWriter::new(fs::File::create(&telemetry_path)?);
    let artifacts = run_experiment(&config, Some(&mut telemetry), false)?;
    telemetry.flush()?;
    let report_path = args.out.join("report.json");
    fs::write(&report_path, serde_json::to_string_pretty(&artifacts.report)?)?;

    let report = &artifacts.report;
    println!(
        "run seed={} engine={:?} steps={} ({:.1} parallel time) -> {}",
        report.seed,
        report.engine,
        report.steps,
        report.parallel_time,
        report_path.display()
    );
    match report.convergence_step {
        Some(step) => println!(
            "converged at step {step} (band {:.4}, window {} steps)",
            report.diversity_band, report.confirmation_window
        ),
        None => println!("no confirmed convergence within the run"),
    }
    println!(
        "sustainability: {} | {:.2e} steps/s",
        if report.sustainability.ok { "ok" } else { "VIOLATED" },
        report.steps_per_second
    );
    if report.monitors_pass() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("monitor failure: {:?}", report.sustainability);
        Ok(ExitCode::FAILURE)
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode> {
    let config = load_config(&args.config)?;
    let outcome = run_sweep(&config, &args.seeds, args.parallelism)?;
    fs::create_dir_all(&args.out)?;
    let csv_path = args.out.join("sweep.csv");
    let file = fs::File::create(&csv_path)?;
    outcome.write_csv(file)?;
    println!(
        "{} seeds -> {} ({} columns: {})",
        outcome.rows.len(),
        csv_path.display(),
        SWEEP_CSV_HEADER.len(),
        SWEEP_CSV_HEADER.join(",")
    );
    if let Some(median) = outcome.median_convergence_step() {
        println!("median convergence step: {median:.0}");
    }
    for row in &outcome.rows {
        if let Some(err) = &row.error {
            eprintln!("seed {} failed: {err}", row.seed);
        }
    }
    Ok(if outcome.complete { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn weights_from(w: &[f64]) -> Result<WeightTable> {
    WeightTable::new(w.to_vec()).map_err(Into::into)
}

fn cmd_oracle(suite: OracleSuite) -> Result<ExitCode> {
    match suite {
        OracleSuite::Stationary { w, n } => {
            let weights = weights_from(&w)?;
            let chain = build_equilibrium_chain(&weights, n)?;
            let pi = stationary_distribution(&chain)?;
            let residual = stationary_residual(&chain.matrix, &pi);
            let solved = chain.stationary_by_solve()?;
            let solver_gap = pi
                .iter()
                .zip(&solved)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            println!("pi P = pi residual: {residual:.3e} (tolerance 1e-12)");
            println!("closed form vs linear solve: {solver_gap:.3e}");
            Ok(exit_if(residual <= 1e-12 && solver_gap <= 1e-9))
        }
        OracleSuite::Perturbed { w, n, err } => {
            let weights = weights_from(&w)?;
            let chain = build_equilibrium_chain(&weights, n)?;
            let pi = stationary_distribution(&chain)?;
            let mut worst: f64 = 0.0;
            for direction in [Direction::Plus, Direction::Minus] {
                for l in 0..chain.k() {
                    let p = build_perturbed_chain(&chain, ChainState::Dark(l), direction, err)?;
                    let pi_p = p.stationary()?;
                    worst = worst.max((pi_p[l] - pi[l]).abs());
                }
            }
            println!("max |pi±(D_l) - pi(D_l)| = {worst:.3e} (bound {:.3e})", 10.0 * err);
            Ok(exit_if(worst <= 10.0 * err))
        }
        OracleSuite::Ruin { p, s, b } => {
            let closed = gamblers_ruin(&GamblersRuinSpec { p, barrier: b, start: s })?;
            let p_rational = decimal_to_rational(p)?;
            let (hit_b, hit_zero, expected) = ruin_by_linear_solve(&p_rational, b, s)?;
            let d_hit = (closed.p_hit_barrier - hit_b.to_f64().unwrap()).abs();
            let d_zero = (closed.p_hit_zero - hit_zero.to_f64().unwrap()).abs();
            let d_t = (closed.expected_steps - expected.to_f64().unwrap()).abs();
            println!("P(hit b): closed {:.12} vs solve {:.12} (diff {d_hit:.3e})",
                closed.p_hit_barrier, hit_b.to_f64().unwrap());
            println!("P(hit 0): diff {d_zero:.3e}");
            println!("E[T]:     closed {:.9} vs solve {:.9} (diff {d_t:.3e})",
                closed.expected_steps, expected.to_f64().unwrap());
            Ok(exit_if(d_hit <= 1e-10 && d_zero <= 1e-10 && d_t <= 1e-10))
        }
        OracleSuite::Kernel { n, w } => {
            let weights = weights_from(&w)?;
            let k = w.len();
            let mut checked = 0usize;
            for population in 2..=n {
                for config in all_configurations(population, k) {
                    let by_class =
                        diverse_pop::protocol::enumerate_kernel_exact(&config, &weights)?;
                    let by_pairs = kernel_by_pair_enumeration(&config, &weights)?;
                    if by_class.normalised() != by_pairs.normalised() {
                        eprintln!("kernel mismatch at {config:?}");
                        return Ok(ExitCode::FAILURE);
                    }
                    if !num_traits::One::is_one(&by_class.total_mass()) {
                        eprintln!("kernel mass not 1 at {config:?}");
                        return Ok(ExitCode::FAILURE);
                    }
                    checked += 1;
                }
            }
            println!("{checked} configurations: class kernel == pair enumeration, masses exact");
            Ok(ExitCode::SUCCESS)
        }
        OracleSuite::Chain { w, n, steps, seed } => {
            let weights = weights_from(&w)?;
            let chain = ConfigChain::build(&weights, n)?;
            let pi = chain.stationary()?;
            let mut config = Configuration::all_dark(
                diverse_pop::harness::InitialCondition::Uniform
                    .build(n, w.len())?
                    .dark_counts,
            );
            let mut rng = SimRng::from_seed(seed);
            let mut occupancy = vec![0u64; chain.num_states()];
            for _ in 0..steps {
                diverse_pop::protocol::step_counts(&mut config, &weights, &mut rng)?;
                let idx = chain
                    .state_index(&config)
                    .context("engine left the exact chain's state space")?;
                occupancy[idx] += 1;
            }
            let tv: f64 = occupancy
                .iter()
                .zip(&pi)
                .map(|(&o, &p)| (o as f64 / steps as f64 - p).abs())
                .sum::<f64>()
                / 2.0;
            println!(
                "{} states, TV(empirical, stationary) = {tv:.4} over {steps} steps",
                chain.num_states()
            );
            Ok(exit_if(tv <= 0.02))
        }
    }
}

fn exit_if(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

/// All count vectors (dark, light) over k colours summing to n.
fn all_configurations(n: u64, k: usize) -> Vec<Configuration> {
    fn compositions(n: u64, parts: usize) -> Vec<Vec<u64>> {
        if parts == 1 {
            return vec![vec![n]];
        }
        let mut out = Vec::new();
        for head in 0..=n {
            for mut tail in compositions(n - head, parts - 1) {
                let mut v = vec![head];
                v.append(&mut tail);
                out.push(v);
            }
        }
        out
    }
    compositions(n, 2 * k)
        .into_iter()
        .map(|v| {
            Configuration::new(v[..k].to_vec(), v[k..].to_vec()).expect("lengths match")
        })
        .collect()
}

/// Exact rational from the shortest decimal representation of `p`.
fn decimal_to_rational(p: f64) -> Result<BigRational> {
    let text = format!("{p}");
    let Some(dot) = text.find('.') else {
        bail!("p must be a decimal in (0,1), got {text}")
    };
    let digits: String = text.chars().filter(|c| c.is_ascii_digit()).collect();
    let scale = text.len() - dot - 1;
    let num: BigInt = digits.parse()?;
    let den = BigInt::from(10u32).pow(scale as u32);
    Ok(BigRational::new(num, den))
}

fn schema() -> serde_json::Value {
    serde_json::json!({
        "experiment_config": {
            "n": "u64, population size (>= 2)",
            "weights": "array of f64 >= 1, one per colour",
            "initial": "\"uniform\" | \"adversarial-worst\" | {\"explicit\": {\"dark\": [u64], \"light\": [u64]}}",
            "engine": "\"counts\" | \"agentwise\" | \"derandomized\" (default counts)",
            "steps": "u64, interactions to simulate",
            "seed": "u64 (default 0)",
            "snapshot_every": "u64 | null (default max(1, n/10))",
            "regions": {"epsilon": "f64 in (0, 1/4)", "delta": "f64 > 0", "potential_bound_const": "f64 > 0"},
            "tracked_agents": "u32 (counts engine: 0 or 1; agentwise: up to n)",
            "events": "path to adversary schedule JSON | null",
            "strict_sustainability": "bool (default true)",
            "diversity_band": "f64 | null (default 10/sqrt(n))",
            "burn_in": "u64 steps excluded from measurement windows (default 0)",
            "confirmation_window": "u64 | null (default 10*n)"
        },
        "telemetry_record": {
            "t": "u64 step index",
            "phi": "f64, dark dispersion potential",
            "psi": "f64, light dispersion potential",
            "sigma_sq": "f64, shade balance potential",
            "err": "array of f64, |C_i/n - w_i/w| per active colour in id order",
            "regions": {"R1": "bool", "S1": "bool", "R2": "bool", "S2": "bool", "S3": "bool",
                         "S4": "bool", "E": "bool", "Eprime": "bool", "Ehat": "bool"},
            "notes": "Ehat/Eprime thresholds use the natural log; one JSON object per line"
        },
        "configuration_snapshot": {
            "step": "u64", "dark_counts": "array of u64 per colour slot",
            "light_counts": "array of u64 per colour slot", "n": "u64"
        },
        "shaded_configuration_snapshot": {
            "step": "u64", "counts": "array of [colour, shade, count] triples", "n": "u64"
        },
        "adversary_event": {
            "at": "u64 step",
            "kind": "add_agents {colour, shade: dark|light, count} | add_colour {weight, dark} | recolour_all {from, to, to_shade}"
        },
        "sweep_csv_header": SWEEP_CSV_HEADER,
        "time_scales": "telemetry reports raw steps; reports also carry parallel_time = steps/n"
    })
}

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use beambit::bench::{
    csv_to_rows, rows_to_csv, run_sweep, solve_drop, solve_instance, tables_from_rows, Algo,
    ExperimentConfig, SolveConfig, SummaryRow, SweepAxis,
};
use beambit::verify;

#[derive(Parser)]
#[command(
    name = "beambit",
    version,
    about = "Joint analog-beam and ADC-resolution selection for wideband uplinks"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one instance and print the selected (beam, bits) pairs
    Solve {
        /// JSON config: an experiment config (drop 0 is generated and
        /// solved), or a solve config with an explicit `instance` document
        #[arg(long)]
        config: PathBuf,
        /// joint | qafas | fas | random | brute
        #[arg(long, default_value = "joint")]
        algo: String,
        /// Overrides the config seed (generated instances and the
        /// randomized baseline)
        #[arg(long)]
        seed: Option<u64>,
        /// Write a one-row summary CSV here
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the per-iteration augmentation trace
        #[arg(long)]
        trace: bool,
        /// Record wall-clock runtime (breaks byte-reproducibility of the CSV)
        #[arg(long)]
        timing: bool,
    },
    /// Monte-Carlo comparison sweep; writes the summary CSV
    Sweep {
        /// JSON experiment config (all fields optional)
        #[arg(long)]
        config: PathBuf,
        /// power | bref
        #[arg(long, default_value = "power")]
        axis: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the built-in verification checks
    Verify {
        /// Run a single criterion (1-10) instead of all
        #[arg(long)]
        criterion: Option<usize>,
    },
    /// Pivot a sweep CSV into side-by-side comparison tables
    Tables {
        #[arg(long = "in", value_name = "CSV")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run() -> Result<ExitCode> {
    match Cli::parse().cmd {
        Cmd::Solve { config, algo, seed, out, trace, timing } => {
            let text = fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let algo = Algo::parse(&algo)?;
            let doc: serde_json::Value = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", config.display()))?;
            let explicit_instance = doc.get("instance").is_some();
            let (run, drop, seed_used) = if explicit_instance {
                let cfg: SolveConfig =
                    serde_json::from_value(doc).context("parsing solve config")?;
                let s = seed.unwrap_or(0);
                let (run, drop) = solve_instance(&cfg, algo, s, timing)?;
                (run, drop, s)
            } else {
                let mut cfg: ExperimentConfig =
                    serde_json::from_value(doc).context("parsing experiment config")?;
                if let Some(s) = seed {
                    cfg.seed = s;
                }
                cfg.timing = timing;
                cfg.validate()?;
                let (run, drop) =
                    solve_drop(&cfg, algo, cfg.tx_power_dbm[0], cfg.b_ref, 0)?;
                (run, drop, cfg.seed)
            };
            println!("algo:            {algo}");
            println!("selection:       {}", serde_json::to_string(&run.selection)?);
            println!("objective:       {:.6}", run.value);
            println!("wsr (bps/Hz):    {:.6}", drop.wsr_bps_hz);
            println!("energy:          {:.6}", drop.energy);
            println!("active chains:   {}", drop.active_chains);
            println!("mean bits/chain: {:.3}", drop.mean_bits);
            println!("evaluations:     {}", drop.evals);
            if run.post_replaced {
                println!("note: post-processing replaced the greedy set with a singleton");
            }
            if trace {
                println!("iter  beam  bits  gain          cost+   chains+  value");
                for r in &run.trace {
                    println!(
                        "{:>4}  {:>4}  {:>4}  {:<12.6}  {:<6.3}  {:>7.3}  {:.6}",
                        r.iteration,
                        r.tuple.beam,
                        r.tuple.bits,
                        r.gain,
                        r.cost_gain,
                        r.chains_gain,
                        r.value
                    );
                }
            }
            if let Some(path) = out {
                let row = SummaryRow {
                    axis_name: "solve".into(),
                    axis_value: 0.0,
                    algo,
                    mean_wsr: drop.wsr_bps_hz,
                    se_wsr: 0.0,
                    mean_energy: drop.energy,
                    se_energy: 0.0,
                    mean_active_chains: drop.active_chains as f64,
                    mean_bits_per_chain: drop.mean_bits,
                    mean_evals: drop.evals as f64,
                    mean_runtime_ms: drop.runtime_ms,
                    n_drops: 1,
                    seed: seed_used,
                };
                fs::write(&path, rows_to_csv(&[row]))
                    .with_context(|| format!("writing {}", path.display()))?;
                println!("wrote {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Sweep { config, axis, out } => {
            let text = fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let cfg: ExperimentConfig =
                serde_json::from_str(&text).context("parsing experiment config")?;
            let axis = SweepAxis::parse(&axis)?;
            let rows = run_sweep(&cfg, axis)?;
            fs::write(&out, rows_to_csv(&rows))
                .with_context(|| format!("writing {}", out.display()))?;
            println!("wrote {} rows to {}", rows.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify { criterion } => {
            let reports = match criterion {
                Some(id) => vec![verify::run_criterion(id)],
                None => verify::run_all(),
            };
            let mut all_ok = true;
            for r in &reports {
                println!("{}", r.line());
                all_ok &= r.passed;
            }
            Ok(if all_ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Cmd::Tables { input, out } => {
            let text = fs::read_to_string(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            let rows = csv_to_rows(&text)?;
            let tables = tables_from_rows(&rows);
            fs::write(&out, &tables).with_context(|| format!("writing {}", out.display()))?;
            println!("wrote {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

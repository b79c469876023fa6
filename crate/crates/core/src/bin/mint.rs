use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use mint_core::harness::metrics::DEFAULT_QUANTILES;
use mint_core::harness::output::{read_runs_csv, results_from_rows, write_json, CONFIG_JSON, RUNS_CSV, SUMMARY_JSON};
use mint_core::harness::{emit_results, run_monte_carlo, summarize, Mode, ScenarioConfig};

#[derive(Parser)]
#[command(name = "mint", version, about = "Cognitive multipath-assisted indoor tracking simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run Monte Carlo simulations and write runs.csv, summary.json, config_resolved.json
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        runs: Option<usize>,
        /// Base seed; run i uses seed + i
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        mode: Option<Mode>,
        /// Worker threads (0 = all cores, 1 = serial)
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Summarize an output directory from its runs.csv
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_QUANTILES.to_vec())]
        quantiles: Vec<f64>,
    },
}

fn simulate(
    config: PathBuf,
    runs: Option<usize>,
    seed: Option<u64>,
    mode: Option<Mode>,
    threads: Option<usize>,
    out: PathBuf,
) -> Result<()> {
    let mut cfg = ScenarioConfig::from_file(&config)?;
    if let Some(r) = runs {
        cfg.monte_carlo.runs = r;
    }
    if let Some(s) = seed {
        cfg.monte_carlo.base_seed = s;
    }
    if let Some(m) = mode {
        cfg.mode = m;
    }
    if let Some(t) = threads {
        cfg.monte_carlo.threads = t;
    }
    cfg.validate()?;
    let (results, summary) = run_monte_carlo(&cfg, cfg.monte_carlo.runs)?;
    let files = emit_results(&results, &summary, &cfg, &out)?;
    println!(
        "{} runs x {} steps ({} mode): median error {:.4} m, mean error {:.4} m",
        summary.runs, summary.steps, cfg.mode, summary.median_error_m, summary.mean_error_m
    );
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn report(input: PathBuf, quantiles: Vec<f64>) -> Result<()> {
    if let Some(q) = quantiles.iter().find(|q| !(0.0..=1.0).contains(*q)) {
        bail!("quantile {q} outside [0, 1]");
    }
    let csv_path = input.join(RUNS_CSV);
    let rows = read_runs_csv(&csv_path)?;
    if rows.is_empty() {
        bail!("{} has no rows", csv_path.display());
    }
    let cfg_path = input.join(CONFIG_JSON);
    let mode = match std::fs::read_to_string(&cfg_path) {
        Ok(text) => serde_json::from_str::<ScenarioConfig>(&text)
            .with_context(|| format!("parsing {}", cfg_path.display()))?
            .mode,
        Err(_) => Mode::default(),
    };
    let results = results_from_rows(&rows, mode);
    let summary = summarize(&results, &quantiles);
    let n = rows.len() as f64;
    let mean_fc = rows.iter().map(|r| r.fc_hz).sum::<f64>() / n;
    let mean_h = rows.iter().map(|r| r.entropy_nats).sum::<f64>() / n;
    let mean_assoc = rows.iter().map(|r| r.n_assoc as f64).sum::<f64>() / n;

    println!("{:<24} {:>14}", "metric", "value");
    println!("{:<24} {:>14}", "mode", mode.to_string());
    println!("{:<24} {:>14}", "runs", summary.runs);
    println!("{:<24} {:>14}", "steps per run", summary.steps);
    println!("{:<24} {:>14.6}", "mean error [m]", summary.mean_error_m);
    println!("{:<24} {:>14.6}", "median error [m]", summary.median_error_m);
    for (q, v) in &summary.error_cdf.quantiles {
        println!("{:<24} {:>14.6}", format!("error q{q} [m]"), v);
    }
    println!("{:<24} {:>14.6}", "mean entropy [nats]", mean_h);
    println!("{:<24} {:>14.6e}", "mean carrier [Hz]", mean_fc);
    println!("{:<24} {:>14.3}", "mean associations", mean_assoc);
    let path = input.join(SUMMARY_JSON);
    write_json(&path, &summary)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Simulate {
            config,
            runs,
            seed,
            mode,
            threads,
            out,
        } => simulate(config, runs, seed, mode, threads, out),
        Command::Report { input, quantiles } => report(input, quantiles),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

//! `beamassoc`: coverage curves, parameter sweeps and self-checks.
//!
//! Exit codes: 0 success, 1 failed check or computation, 2 usage or config error.

mod grid;
mod output;
mod validate;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use beamassoc::analytic::{near_orth_curve, theorem1_curve, theorem2_curve, QuadratureSpec};
use beamassoc::config::load_scenario_with;
use beamassoc::metrics::{coverage_estimate, default_t_grid, Provenance};
use beamassoc::sim_engine::{run_experiment, run_point, Experiment, Mode, Sweep, SweepParam};
use beamassoc::ScenarioConfig;
use clap::{Args, Parser, Subcommand};

use output::{CoverageTable, OutputRecord};

#[derive(Parser)]
#[command(name = "beamassoc", version = env!("CARGO_PKG_VERSION"), about = "Initial beam association in random mmWave networks")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "BEAMASSOC_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    config: PathBuf,
    /// Override a scenario key, e.g. `--set cell_radius=30`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Monte Carlo drops per point.
    #[arg(long, default_value_t = 10_000)]
    drops: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// CSV destination; a JSON sidecar is written next to it. Stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Omit the generation time so equal inputs give identical files.
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Coverage probability against the SINR threshold.
    Coverage {
        #[command(flatten)]
        common: Common,
        /// Association procedure of the simulated curve.
        #[arg(long, default_value = "full-reuse")]
        mode: String,
        /// Thresholds in dB: `lo:step:hi` or `a,b,c`. Default: 200 points over [-20, 50].
        #[arg(long, allow_hyphen_values = true)]
        t_grid_db: Option<String>,
        /// Also evaluate the analytic bounds and the near-orthogonal curve.
        #[arg(long)]
        bounds: bool,
    },
    /// Effective rate over a parameter sweep, one row per (value, mode).
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        param: String,
        /// `a,b,c`, `lo:step:hi` or `lo..hi[/n]` (log-spaced).
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(long, default_value = "perfect,near-orth,full-reuse", value_delimiter = ',')]
        modes: Vec<String>,
        /// Pick the best reuse factors for the searched modes.
        #[arg(long)]
        optimize_pilots: bool,
        #[arg(long, default_value = "0.1:0.1:1")]
        pilot_grid: String,
    },
    /// Run the consistency checks and print a pass/fail table.
    Validate {
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long, default_value_t = 10_000)]
        drops: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// 1000-drop smoke run.
        #[arg(long)]
        quick: bool,
    },
}

enum Failure {
    Usage(anyhow::Error),
    Run(anyhow::Error),
}

type CmdResult = Result<(), Failure>;

fn usage<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Usage(e.into())
}

fn run_err<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Run(e.into())
}

fn parse_overrides(set: &[String]) -> anyhow::Result<Vec<(String, String)>> {
    set.iter()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| anyhow!("override `{kv}` is not KEY=VALUE"))
        })
        .collect()
}

fn load(path: &Path, set: &[String]) -> Result<ScenarioConfig, Failure> {
    let overrides = parse_overrides(set).map_err(usage)?;
    load_scenario_with(path, &overrides)
        .with_context(|| format!("config {}", path.display()))
        .map_err(usage)
}

fn coverage(common: &Common, mode: &str, t_grid_db: Option<&str>, bounds: bool) -> CmdResult {
    let cfg = load(&common.config, &common.set)?;
    let mode: Mode = mode.parse().map_err(usage)?;
    let grid: Vec<f64> = match t_grid_db {
        Some(spec) => grid::parse_db_grid(spec)
            .map_err(usage)?
            .iter()
            .map(|d| 10f64.powf(d / 10.0))
            .collect(),
        None => default_t_grid(),
    };
    let t_db: Vec<f64> = grid.iter().map(|t| 10.0 * t.log10()).collect();

    let sim = if common.drops > 0 {
        let samples = run_point(&cfg, &[mode], common.drops, common.seed, 0, None).map_err(run_err)?;
        Some(
            coverage_estimate(&samples[0].sinr(), &grid, Provenance::Sim)
                .map_err(run_err)?
                .coverage,
        )
    } else {
        None
    };
    let mut table = CoverageTable {
        t_db,
        sim,
        thm1_ub: None,
        thm2_lb: None,
        near_orth: None,
    };
    let mut record = OutputRecord::new("coverage", &cfg, common.seed, common.drops, !common.no_timestamp);
    if bounds {
        let q = QuadratureSpec::default();
        let (ub, terms, converged) = theorem1_curve(&grid, &cfg, &q).map_err(run_err)?;
        if !converged {
            eprintln!("warning: upper bound not settled at {terms} alternating terms");
        }
        record.alzer_terms = Some(terms);
        record.alzer_converged = Some(converged);
        table.thm1_ub = Some(ub.coverage);
        table.thm2_lb = Some(theorem2_curve(&grid, &cfg, &q).map_err(run_err)?.coverage);
        table.near_orth = Some(near_orth_curve(&grid, &cfg, &q).map_err(run_err)?.coverage);
    }
    record.curves = table.curves();
    output::emit(common.output.as_deref(), &record, |w| {
        table.write_csv(w, !common.no_timestamp)
    })
    .map_err(run_err)
}

fn sweep(common: &Common, param: &str, values: &str, modes: &[String], optimize: bool, pilot_grid: &str) -> CmdResult {
    let cfg = load(&common.config, &common.set)?;
    let param: SweepParam = param.parse().map_err(usage)?;
    let values = grid::parse_list(values).map_err(usage)?;
    let modes: Vec<Mode> = modes
        .iter()
        .map(|m| m.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(usage)?;
    let pilot_grid = if optimize {
        Some(grid::parse_list(pilot_grid).map_err(usage)?)
    } else {
        None
    };
    let exp = Experiment {
        base: cfg.clone(),
        sweep: Some(Sweep { param, values }),
        modes,
        n_drops: common.drops,
        seed: common.seed,
        pilot_grid,
    };
    let mut rows = run_experiment(&exp).map_err(usage)?;
    for r in rows.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "warning: {} = {} ({}): {}",
            r.param,
            r.value,
            r.mode,
            r.error.as_deref().unwrap_or("")
        );
    }
    if common.no_timestamp {
        rows.iter_mut().for_each(|r| r.runtime_s = 0.0);
    }
    let mut record = OutputRecord::new("sweep", &cfg, common.seed, common.drops, !common.no_timestamp);
    record.rows = rows;
    let failed = record.rows.iter().any(|r| r.error.is_some());
    output::emit(common.output.as_deref(), &record, |w| {
        output::write_sweep_csv(&record.rows, w, !common.no_timestamp)
    })
    .map_err(run_err)?;
    if failed {
        return Err(Failure::Run(anyhow!("some sweep points failed")));
    }
    Ok(())
}

fn validate(config: &Path, set: &[String], drops: usize, seed: u64, quick: bool) -> CmdResult {
    let cfg = load(config, set)?;
    let drops = if quick { 1000 } else { drops };
    if drops == 0 {
        return Err(usage(anyhow!("--drops must be at least 1")));
    }
    let checks = validate::run_checks(&cfg, drops, seed).map_err(run_err)?;
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in &checks {
        println!(
            "{:<width$}  {}  {}",
            c.name,
            if c.passed { "PASS" } else { "FAIL" },
            c.detail
        );
    }
    match checks.iter().filter(|c| !c.passed).count() {
        0 => Ok(()),
        n => Err(Failure::Run(anyhow!("{n} of {} checks failed", checks.len()))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Coverage {
            common,
            mode,
            t_grid_db,
            bounds,
        } => coverage(common, mode, t_grid_db.as_deref(), *bounds),
        Command::Sweep {
            common,
            param,
            values,
            modes,
            optimize_pilots,
            pilot_grid,
        } => sweep(common, param, values, modes, *optimize_pilots, pilot_grid),
        Command::Validate {
            config,
            set,
            drops,
            seed,
            quick,
        } => validate(config, set, *drops, *seed, *quick),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

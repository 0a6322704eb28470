//! `catcher`: run interception scenarios, the bundled suite, or the
//! acceptance battery.
//!
//! Exit codes: 0 success, 1 failed expectations or a crashed scenario,
//! 2 malformed or missing config, 3 output IO failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use catcher_core::battery;
use catcher_core::harness::{
    bundled_configs, run_scenario, run_suite, write_outputs, ScenarioConfig, ScenarioId,
    ScenarioResult,
};
use catcher_core::PlanMethod;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "catcher", version, about = "Simulated UAV ball interception")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write its trace and summary.
    Run {
        /// Scenario config (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Planner override.
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        #[command(flatten)]
        common: Common,
    },
    /// Run A-E and planar2d and check each against its expected outcome.
    Suite {
        /// Directory with `<id>.json` files replacing the bundled configs.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the acceptance battery.
    Accept {
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Replaces the config's noise seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Keep the camera level while the vehicle accelerates.
    #[arg(long)]
    no_tilt_coupling: bool,
}

impl Common {
    fn apply(&self, cfg: &mut ScenarioConfig) {
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if self.no_tilt_coupling {
            cfg.uav.vehicle.tilt_coupling = false;
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    #[value(name = "cat_mouse")]
    CatMouse,
    Shortest,
    Fastest,
}

impl From<MethodArg> for PlanMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::CatMouse => PlanMethod::CatMouse,
            MethodArg::Shortest => PlanMethod::ShortestPath,
            MethodArg::Fastest => PlanMethod::FastestPath,
        }
    }
}

#[derive(Debug)]
enum Failure {
    Expectation(String),
    Config(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Expectation(_) => 1,
            Failure::Config(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Expectation(m) | Failure::Config(m) | Failure::Io(m) => m,
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Io(format!("cannot write to {}: {e}", path.display()))
}

fn load(path: &Path) -> Result<ScenarioConfig, Failure> {
    ScenarioConfig::load(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn describe(r: &ScenarioResult) -> String {
    let outcome = match r.interception_time {
        Some(t) => format!("intercepted at {t:.3} s"),
        None => format!("not intercepted ({:?})", r.termination),
    };
    let err = r
        .final_prediction_error
        .map(|e| format!(", final prediction error {e:.3} m"))
        .unwrap_or_default();
    format!(
        "{}: {outcome}, min distance {:.3} m{err}",
        r.scenario_id, r.min_distance
    )
}

fn cmd_run(config: &Path, method: Option<MethodArg>, common: &Common) -> Result<(), Failure> {
    let mut cfg = load(config)?;
    common.apply(&mut cfg);
    if let Some(m) = method {
        if cfg.scenario_id == ScenarioId::Planar2d {
            return Err(Failure::Config(
                "--method: planar2d always uses plane crossing".into(),
            ));
        }
        cfg = cfg.with_method(m.into());
    }
    let result = run_scenario(&cfg).map_err(|e| Failure::Config(e.to_string()))?;
    write_outputs(&common.out, &result).map_err(|e| io_failure(&common.out, e))?;
    eprintln!("{}", describe(&result));
    Ok(())
}

fn suite_configs(dir: Option<&Path>) -> Result<Vec<ScenarioConfig>, Failure> {
    let Some(dir) = dir else {
        return Ok(bundled_configs());
    };
    if !dir.is_dir() {
        return Err(Failure::Config(format!(
            "--config: {} is not a directory",
            dir.display()
        )));
    }
    ScenarioId::ALL
        .iter()
        .map(|&id| {
            let path = dir.join(format!("{id}.json"));
            if !path.exists() {
                return Ok(ScenarioConfig::bundled(id));
            }
            let cfg = load(&path)?;
            if cfg.scenario_id != id {
                return Err(Failure::Config(format!(
                    "{}: invalid `scenario_id`: expected {id}, got {}",
                    path.display(),
                    cfg.scenario_id
                )));
            }
            Ok(cfg)
        })
        .collect()
}

fn cmd_suite(config: Option<&Path>, common: &Common) -> Result<(), Failure> {
    let mut configs = suite_configs(config)?;
    for cfg in &mut configs {
        common.apply(cfg);
    }
    let (report, results) = std::panic::catch_unwind(|| run_suite(&configs))
        .map_err(|_| Failure::Expectation("a scenario crashed".into()))?
        .map_err(|e| Failure::Expectation(format!("a scenario failed to run: {e}")))?;
    for r in &results {
        write_outputs(&common.out, r).map_err(|e| io_failure(&common.out, e))?;
    }
    let path = common.out.join("suite_report.json");
    std::fs::write(&path, report.to_json() + "\n").map_err(|e| io_failure(&path, e))?;
    for (r, entry) in results.iter().zip(&report.scenarios) {
        let verdict = if entry.passed { "ok" } else { "FAILED" };
        eprintln!("[{verdict}] {} (expected: {})", describe(r), entry.expected);
    }
    if report.all_passed {
        Ok(())
    } else {
        Err(Failure::Expectation(
            "suite: some scenarios missed their expected outcome".into(),
        ))
    }
}

fn cmd_accept(out: &Path) -> Result<(), Failure> {
    let reports = battery::run_all();
    for r in &reports {
        eprintln!("{r}");
    }
    std::fs::create_dir_all(out).map_err(|e| io_failure(out, e))?;
    let path = out.join("accept_report.json");
    let json = serde_json::to_string_pretty(&reports).expect("reports serialize");
    std::fs::write(&path, json + "\n").map_err(|e| io_failure(&path, e))?;
    let failed = reports.iter().filter(|r| !r.passed).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Expectation(format!(
            "accept: {failed} of {} checks failed",
            reports.len()
        )))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run {
            config,
            method,
            common,
        } => cmd_run(config, *method, common),
        Command::Suite { config, common } => cmd_suite(config.as_deref(), common),
        Command::Accept { out } => cmd_accept(out),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

//! `sfd`: batch front-end that turns wiretap scenarios into design JSON and
//! sweep CSV files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use sfd_core::capacity::{secrecy_capacity_degraded, CapacityOptions};
use sfd_core::channel::scenario_from_json;
use sfd_core::filters::achievable_secrecy_rate;
use sfd_core::montecarlo::{simulate_ber_bpsk, DesignKind};
use sfd_core::uncertainty::StatsFile;
use sfd_core::{DesignSolution, Error, WiretapScenario};

#[derive(Parser)]
#[command(name = "sfd", version, about = "Secrecy-constrained MIMO transmit filter design")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EveReceiver {
    Zf,
    Wiener,
}

impl EveReceiver {
    fn kind(self) -> DesignKind {
        match self {
            EveReceiver::Zf => DesignKind::ZfZf,
            EveReceiver::Wiener => DesignKind::ZfWiener,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Param {
    Gamma,
    Pavg,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Scenario1,
    Scenario2,
}

#[derive(Args)]
struct Range {
    #[arg(long)]
    from: f64,
    #[arg(long)]
    to: f64,
    #[arg(long)]
    steps: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Design one transmit filter and print it as JSON.
    Design {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "zf")]
        eve_receiver: EveReceiver,
        /// Overrides the secrecy level stored in the scenario.
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Sweep gamma or the power budget and write one CSV row per step.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum)]
        param: Param,
        #[command(flatten)]
        range: Range,
        #[arg(long, value_enum, default_value = "zf")]
        eve_receiver: EveReceiver,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulated BPSK bit error rates across a power sweep.
    Ber {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        gamma: Option<f64>,
        #[command(flatten)]
        range: Range,
        #[arg(long, value_enum, default_value = "zf")]
        eve_receiver: EveReceiver,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Design from channel statistics instead of a known eavesdropper channel.
    Uncertain {
        #[arg(long, alias = "scenario")]
        stats: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Also write the JSON to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Achievable secrecy rate of the design next to the secrecy capacity.
    Rate {
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        range: Range,
        #[arg(long, value_enum, default_value = "zf")]
        eve_receiver: EveReceiver,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Input(String),
    Solver(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Solver(e.to_string())
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> Outcome<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Outcome<()> {
    std::fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_scenario(path: &Path) -> Outcome<WiretapScenario> {
    Ok(scenario_from_json(&read(path)?)?)
}

fn with_gamma(s: WiretapScenario, gamma: Option<f64>) -> Outcome<WiretapScenario> {
    let Some(g) = gamma else { return Ok(s) };
    let s = s.with_gamma(g);
    s.validate()?;
    Ok(s)
}

impl Range {
    /// Linearly spaced points, endpoints included.
    fn points(&self) -> Outcome<Vec<f64>> {
        if self.steps < 2 {
            return Err(Failure::Input(format!("need at least 2 steps, got {}", self.steps)));
        }
        if !self.from.is_finite() || !self.to.is_finite() || self.from >= self.to {
            return Err(Failure::Input(format!("need from < to, got {} and {}", self.from, self.to)));
        }
        let last = (self.steps - 1) as f64;
        Ok((0..self.steps)
            .map(|k| self.from + (self.to - self.from) * k as f64 / last)
            .collect())
    }
}

fn solution_json(sol: &DesignSolution) -> String {
    let value = json!({
        "regime": sol.regime.to_string(),
        "nu": sol.nu,
        "mu": sol.mu,
        "mse_main": sol.mse_main,
        "mse_eve": sol.mse_eve,
        "power": sol.power,
        "kkt_residual": sol.kkt_residual,
        "h_t": sol.t.h_t().to_pairs(),
    });
    serde_json::to_string_pretty(&value).expect("finite values serialize")
}

fn f(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv(header: &str, rows: Vec<String>) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(header);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{r}");
    }
    out
}

fn cmd_design(path: &Path, rx: EveReceiver, gamma: Option<f64>) -> Outcome<()> {
    let s = with_gamma(load_scenario(path)?, gamma)?;
    let sol = rx.kind().design(&s)?;
    println!("{}", solution_json(&sol));
    Ok(())
}

fn cmd_sweep(path: &Path, param: Param, range: &Range, rx: EveReceiver, out: &Path) -> Outcome<()> {
    let base = load_scenario(path)?;
    let points = range.points()?;
    let rows: Vec<String> = points
        .par_iter()
        .map(|&v| {
            let s = match param {
                Param::Gamma => base.with_gamma(v),
                Param::Pavg => base.with_power(v),
            };
            match rx.kind().design(&s) {
                Ok(sol) => format!(
                    "{},{},{},{},{},{},{}",
                    f(v),
                    sol.regime,
                    f(sol.nu),
                    f(sol.mu),
                    f(sol.mse_main),
                    f(sol.mse_eve),
                    f(sol.power)
                ),
                Err(e) => format!("{},{},,,,,", f(v), e.name()),
            }
        })
        .collect();
    write(out, &csv("param_value,regime,nu,mu,mse_main,mse_eve_model,power_used", rows))
}

fn cmd_ber(
    path: &Path,
    gamma: Option<f64>,
    range: &Range,
    rx: EveReceiver,
    trials: usize,
    seed: u64,
    out: &Path,
) -> Outcome<()> {
    let base = with_gamma(load_scenario(path)?, gamma)?;
    let points = range.points()?;
    let rows: Vec<Outcome<String>> = points
        .par_iter()
        .map(|&p| {
            let s = base.with_power(p);
            let sol = rx.kind().design(&s)?;
            let (main, eve) = simulate_ber_bpsk(&s, &sol.t, rx.kind().eve_receiver(), trials, seed)?;
            Ok(format!(
                "{},{},{},{},{}",
                f(p),
                f(main.mean),
                f(eve.mean),
                f(main.std_error),
                f(eve.std_error)
            ))
        })
        .collect();
    let rows = rows.into_iter().collect::<Outcome<Vec<_>>>()?;
    write(out, &csv("pavg,ber_main,ber_eve,stderr_main,stderr_eve", rows))
}

fn cmd_uncertain(path: &Path, mode: Mode, out: Option<&Path>) -> Outcome<()> {
    let stats = StatsFile::from_json(&read(path)?)?;
    let sol = match mode {
        Mode::Scenario1 => stats.solve_scenario1()?,
        Mode::Scenario2 => stats.solve_scenario2()?,
    };
    let text = solution_json(&sol);
    if let Some(out) = out {
        write(out, &text)?;
    }
    println!("{text}");
    Ok(())
}

fn cmd_rate(path: &Path, range: &Range, rx: EveReceiver, out: &Path) -> Outcome<()> {
    let base = load_scenario(path)?;
    let points = range.points()?;
    let rows: Vec<Outcome<String>> = points
        .par_iter()
        .map(|&p| {
            let s = base.with_power(p);
            let sol = rx.kind().design(&s)?;
            let rate = achievable_secrecy_rate(&s, &sol.t);
            let capacity = match secrecy_capacity_degraded(&s, &CapacityOptions::default()) {
                Ok(c) => f(c),
                Err(Error::NotDegraded { .. }) => String::new(),
                Err(e) => return Err(e.into()),
            };
            Ok(format!("{},{},{}", f(p), f(rate), capacity))
        })
        .collect();
    let rows = rows.into_iter().collect::<Outcome<Vec<_>>>()?;
    write(out, &csv("pavg,rate_design,capacity_estimate", rows))
}

fn configure_threads() -> Outcome<()> {
    let Ok(raw) = std::env::var("SFD_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Input(format!("SFD_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Input(e.to_string()))
}

fn run(cli: Cli) -> Outcome<()> {
    configure_threads()?;
    match cli.command {
        Command::Design {
            scenario,
            eve_receiver,
            gamma,
        } => cmd_design(&scenario, eve_receiver, gamma),
        Command::Sweep {
            scenario,
            param,
            range,
            eve_receiver,
            out,
        } => cmd_sweep(&scenario, param, &range, eve_receiver, &out),
        Command::Ber {
            scenario,
            gamma,
            range,
            eve_receiver,
            trials,
            seed,
            out,
        } => cmd_ber(&scenario, gamma, &range, eve_receiver, trials, seed, &out),
        Command::Uncertain { stats, mode, out } => cmd_uncertain(&stats, mode, out.as_deref()),
        Command::Rate {
            scenario,
            range,
            eve_receiver,
            out,
        } => cmd_rate(&scenario, &range, eve_receiver, &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

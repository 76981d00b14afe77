//! `qbkg`: validate and run scenarios, print and compare rate summaries.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use qbkg::analysis::build_rate_table;
use qbkg::scenario::{compare, comparison_text, Overrides, RunReport, Scenario, Summary};
use qbkg::sources::ReplayMode;
use qbkg::twostep::CrossingDistributions;

#[derive(Parser)]
#[command(name = "qbkg", version, about = "Radiation interaction rates in a qubit chip")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Default)]
struct RunFlags {
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores). Results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Events for every source (both passes of a two-step source).
    #[arg(long)]
    events: Option<u64>,
}

impl RunFlags {
    fn overrides(&self) -> Overrides {
        Overrides { seed: self.seed, workers: self.workers, events: self.events }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Marginal,
    Joint,
    Facet,
}

impl From<Mode> for ReplayMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Marginal => ReplayMode::Marginal,
            Mode::Joint => ReplayMode::Joint,
            Mode::Facet => ReplayMode::Facet,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Check geometry containment and overlaps, data files and sources.
    Validate { scenario: PathBuf },
    /// Run every source and write summary, rates, spectra and manifest.
    Run {
        scenario: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
        /// Output directory (default: out/<scenario name>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the rate table of a summary.json.
    Report {
        summary: PathBuf,
        /// Also write rates.csv and rates.txt here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Suppression factors first / second, per source label.
    Compare {
        first: PathBuf,
        second: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Second pass only, from a crossings_<label>.txt written by `run`.
    TwoStepReplay {
        scenario: PathBuf,
        crossings: PathBuf,
        /// Source label in the scenario (default: the first two-step source).
        #[arg(long)]
        label: Option<String>,
        /// Second-pass events (default: the scenario's n2).
        #[arg(long)]
        n2: Option<u64>,
        #[arg(long, value_enum, default_value = "marginal")]
        mode: Mode,
        #[command(flatten)]
        flags: RunFlags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load(path: &Path, ov: &Overrides) -> anyhow::Result<Scenario> {
    Scenario::load(path, ov).with_context(|| format!("loading {}", path.display()))
}

fn emit(report: &RunReport, out: Option<PathBuf>) -> anyhow::Result<()> {
    let dir = out.unwrap_or_else(|| PathBuf::from("out").join(&report.scenario));
    report.write(&dir)?;
    let table = build_rate_table(&report.summary().rows());
    print!("{}", table.to_text());
    println!("total: {}", report.total.format_value());
    println!("wrote {} ({:.1} s)", dir.display(), report.wall_time_s);
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.cmd {
        Cmd::Validate { scenario } => {
            let s = match Scenario::load(&scenario, &Overrides::default()) {
                Ok(s) => s,
                Err(e) => {
                    for d in e.to_string().split("; ") {
                        println!("{}: {d}", scenario.display());
                    }
                    return Ok(ExitCode::from(1));
                }
            };
            let diags = s.validate();
            for d in &diags {
                println!("{}: {d}", scenario.display());
            }
            if diags.is_empty() {
                println!("{}: ok ({} volumes, {} sources)", scenario.display(), s.geometry.volumes().len(), s.jobs.len());
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
        Cmd::Run { scenario, flags, out } => {
            let s = load(&scenario, &flags.overrides())?;
            let diags = s.validate();
            if !diags.is_empty() {
                bail!("scenario does not validate:\n  {}", diags.join("\n  "));
            }
            emit(&s.run()?, out)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Report { summary, out } => {
            let sm = Summary::load(&summary)?;
            let table = build_rate_table(&sm.rows());
            print!("{}", table.to_text());
            println!("total: {}", sm.total.format_value());
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                std::fs::write(dir.join("rates.csv"), table.to_csv())?;
                std::fs::write(dir.join("rates.txt"), table.to_text())?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Compare { first, second, out } => {
            let rows = compare(&Summary::load(&first)?, &Summary::load(&second)?)?;
            let text = comparison_text(&rows);
            print!("{text}");
            if let Some(p) = out {
                std::fs::write(&p, serde_json::to_string_pretty(&rows)? + "\n")
                    .with_context(|| format!("writing {}", p.display()))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::TwoStepReplay { scenario, crossings, label, n2, mode, flags, out } => {
            let s = load(&scenario, &flags.overrides())?;
            let text = std::fs::read_to_string(&crossings).with_context(|| format!("reading {}", crossings.display()))?;
            let dist = CrossingDistributions::from_text(&text, &crossings.display().to_string())?;
            let job = match &label {
                Some(l) => s.jobs.iter().find(|j| &j.label == l),
                None => s.jobs.iter().find(|j| j.two_step.is_some()),
            }
            .ok_or_else(|| anyhow!("no matching two-step source in {}", scenario.display()))?;
            let n2 = n2.or(flags.events).or(job.two_step.as_ref().map(|t| t.n2)).unwrap_or(job.events);
            emit(&s.replay(&job.label.clone(), &dist, n2, mode.into())?, out)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

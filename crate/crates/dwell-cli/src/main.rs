//! `dwell` — scenario-driven radar observation-time allocation.
//!
//! Scenarios are JSON files (see the `scenarios/` directory for worked
//! examples); reports come out as plain tables, CSV file sets or SVG
//! charts. Exit code is nonzero with a diagnostic on any error.

// Validation uses `!(x > 0.0)` on purpose: the negation rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod emit;
mod run;
mod scenario;

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand, ValueEnum};

use emit::Format;
use scenario::{Mode, Rule3Spec};

#[derive(Parser)]
#[command(
    name = "dwell",
    version,
    about = "Observation-time allocation for ESA radars"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Table,
    Csv,
    Svg,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Table => Format::Table,
            FormatArg::Csv => Format::Csv,
            FormatArg::Svg => Format::Svg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Rule3Arg {
    PerSensor,
    Global,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory for csv/svg formats (and report.txt for table).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,
    /// Override the scenario's rule-3 interpretation (fleet mode).
    #[arg(long, value_enum)]
    rule3: Option<Rule3Arg>,
}

#[derive(Subcommand)]
enum Command {
    /// Allocate one radar's budget across known targets.
    Allocate(RunArgs),
    /// Allocate across space directions under probabilistic priors.
    AllocateProb(RunArgs),
    /// Plan a multisensor fleet: allocations, fusion groups, timeline.
    PlanFleet(RunArgs),
    /// Run whatever mode the scenario declares.
    Report(RunArgs),
    /// Back the scale constant K of tau = K*d^4 out of one observation.
    Calibrate {
        #[arg(long)]
        duration_ms: f64,
        #[arg(long)]
        probability: f64,
        #[arg(long)]
        distance_km: f64,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Allocate(args) => execute(args, Some(Mode::MonoDeterministic)),
        Command::AllocateProb(args) => execute(args, Some(Mode::MonoProbabilistic)),
        Command::PlanFleet(args) => execute(args, Some(Mode::Fleet)),
        Command::Report(args) => execute(args, None),
        Command::Calibrate {
            duration_ms,
            probability,
            distance_km,
        } => {
            let k = dwell::fleet::calibrate_scale(duration_ms, probability, distance_km)?;
            println!("{k:e}");
            Ok(())
        }
    }
}

fn execute(args: RunArgs, expect: Option<Mode>) -> Result<()> {
    let mut file = scenario::parse_scenario(&args.scenario)?;
    if let Some(expected) = expect {
        if file.mode != expected {
            bail!(
                "scenario {} declares a different mode; use the matching subcommand or `report`",
                args.scenario.display()
            );
        }
    }
    if let Some(rule3) = args.rule3 {
        file.planner.rule3 = match rule3 {
            Rule3Arg::PerSensor => Rule3Spec::PerSensor,
            Rule3Arg::Global => Rule3Spec::Global,
        };
    }
    let prepared = scenario::prepare(&file)?;
    let report = run::run(&prepared)?;

    match args.format.into() {
        Format::Table => {
            let text = emit::table(&report);
            print!("{text}");
            if let Some(out) = &args.out {
                std::fs::create_dir_all(out)?;
                std::fs::write(out.join("report.txt"), &text)?;
            }
        }
        Format::Csv => {
            let Some(out) = &args.out else {
                bail!("--format csv needs --out <dir>");
            };
            let files = emit::write_csv(&report, out)?;
            for f in files {
                println!("wrote {}", f.display());
            }
        }
        Format::Svg => {
            let Some(out) = &args.out else {
                bail!("--format svg needs --out <dir>");
            };
            let path = emit::write_svg(&report, out)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use qkl::CostCurve;
use qkl_cli::check::Role;
use qkl_cli::config::load_json;
use qkl_cli::{
    check_system, grid_search, resolve_tolerance, verify_claims, CheckInput, ExperimentConfig,
    FigureId, GridSpec, SearchConfig,
};

#[derive(Parser)]
#[command(
    name = "qkl",
    version,
    about = "Coherent-classical estimation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduce a published cost-versus-angle figure as CSV
    Figure {
        id: FigureId,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep a configured experiment over homodyne angles
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Check the theorems and conjectures on a configuration or figure
    Claims {
        /// Built-in figure instead of --config
        #[arg(long, conflicts_with = "config")]
        figure: Option<FigureId>,
        #[command(flatten)]
        common: Common,
    },
    /// Grid search over squeezer parameters against every claim
    Search {
        #[command(flatten)]
        common: Common,
    },
    /// Physical-realizability report for a system or experiment
    Check {
        /// Port layout for a bare system config
        #[arg(long, value_enum, default_value = "plant")]
        role: Role,
        /// Print the report as JSON
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// JSON configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_name = "DEG")]
    grid_start: Option<f64>,
    #[arg(long, value_name = "DEG")]
    grid_end: Option<f64>,
    #[arg(long, value_name = "N")]
    grid_count: Option<usize>,
    /// Residual tolerance for realizability checks (overrides QKL_TOL)
    #[arg(long)]
    tol: Option<f64>,
}

impl Common {
    fn config<T: serde::de::DeserializeOwned>(&self) -> Result<T> {
        let path = self.config.as_ref().context("--config is required")?;
        Ok(load_json(path)?)
    }

    fn grid(&self, base: GridSpec) -> GridSpec {
        base.overridden(self.grid_start, self.grid_end, self.grid_count)
    }

    fn tol(&self) -> Result<f64> {
        Ok(resolve_tolerance(self.tol)?)
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit_curve(curve: &CostCurve, out: Option<&Path>) -> Result<()> {
    let mut w = open_out(out)?;
    curve.write_csv(&mut w)?;
    w.flush()?;
    for d in &curve.diagnostics {
        eprintln!(
            "warning: {} at {} deg: {}",
            d.scheme.as_str(),
            d.theta.to_degrees(),
            d.message
        );
    }
    if let Some(diff) = curve.max_abs_difference() {
        eprintln!(
            "{}: {} points, max |coherent - classical| = {diff:.3e}",
            curve.label,
            curve.len()
        );
    }
    Ok(())
}

fn experiment(cfg: ExperimentConfig, common: &Common) -> Result<qkl_cli::Experiment> {
    let mut cfg = cfg;
    cfg.grid = common.grid(cfg.grid);
    Ok(cfg.build()?)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Figure { id, common } => {
            let exp = experiment(id.config(), &common)?;
            emit_curve(&exp.sweep()?, common.out.as_deref())
        }
        Command::Sweep { common } => {
            let cfg: ExperimentConfig = common.config()?;
            let out = common
                .out
                .clone()
                .or_else(|| cfg.output_path.clone().map(PathBuf::from));
            let exp = experiment(cfg, &common)?;
            emit_curve(&exp.sweep()?, out.as_deref())
        }
        Command::Claims { figure, common } => {
            let cfg = match figure {
                Some(id) => id.config(),
                None => common.config()?,
            };
            let exp = experiment(cfg, &common)?;
            let reports = verify_claims(&exp, common.tol()?)?;
            let mut w = open_out(common.out.as_deref())?;
            serde_json::to_writer_pretty(&mut w, &reports)?;
            writeln!(w)?;
            w.flush()?;
            Ok(())
        }
        Command::Search { common } => {
            let mut cfg: SearchConfig = common.config()?;
            cfg.grid = common.grid(cfg.grid);
            let outcome = grid_search(&cfg, common.tol()?)?;
            let mut w = open_out(common.out.as_deref())?;
            outcome.write_csv(&mut w)?;
            w.flush()?;
            let counterexamples = serde_json::to_string_pretty(&outcome.counterexamples())?;
            match &common.out {
                Some(p) => {
                    let path = p.with_extension("counterexamples.json");
                    std::fs::write(&path, counterexamples + "\n")
                        .with_context(|| format!("writing {}", path.display()))?;
                    eprintln!("counterexamples written to {}", path.display());
                }
                None => eprintln!("counterexamples: {counterexamples}"),
            }
            let skipped = serde_json::to_string_pretty(&outcome.skipped)?;
            if !outcome.skipped.is_empty() {
                eprintln!("skipped samples: {skipped}");
            }
            eprint!("{}", outcome.summary());
            Ok(())
        }
        Command::Check { role, json, common } => {
            let input: CheckInput = common.config()?;
            let checks = check_system(&input, role, common.tol()?)?;
            let as_json = serde_json::to_string_pretty(&checks)?;
            if json {
                println!("{as_json}");
            } else {
                for c in &checks {
                    println!("{c}");
                }
            }
            if let Some(p) = &common.out {
                std::fs::write(p, as_json + "\n")
                    .with_context(|| format!("writing {}", p.display()))?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gaplab_cli::config::{parse_list, ExperimentConfig, Overrides, PatienceSpec};
use gaplab_cli::error::{CliError, CliResult};
use gaplab_cli::experiments::{self, Table};
use gaplab_cli::plot::plot_script;
use gaplab_cli::table::{read_table, write_table, Schema};
use gaplab_core::expansions::RhoConvention;
use gaplab_core::ModelTag;

/// Staffing prescriptions from asymptotic cost expansions, checked against
/// exact queue models.
#[derive(Parser)]
#[command(name = "gaplab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the prescription x̄* and the staffing it implies for each n.
    Prescribe(CommonArgs),
    /// Exact cost, expansion cost and residual at each (n, x).
    Evaluate(CommonArgs),
    /// Optimality gap of the prescription over the n grid (CSV).
    GapTable(CommonArgs),
    /// Exact E[Q] against the leading and second-order terms (CSV).
    ApproxCheck(CommonArgs),
    /// Square-root staffing against the exact delay-probability minimum (CSV).
    Constrained(CommonArgs),
    /// Write a matplotlib script that plots a CSV produced by this tool.
    PlotScript {
        /// CSV written by gap-table, approx-check, constrained or evaluate.
        csv: PathBuf,
        /// Where to write the script [default: stdout].
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A comma-separated list taken as one flag value.
#[derive(Clone)]
struct List(Vec<f64>);

fn list(s: &str) -> Result<List, String> {
    let v = parse_list(s)?;
    if v.is_empty() {
        return Err("empty list".into());
    }
    Ok(List(v))
}

fn model(s: &str) -> Result<ModelTag, String> {
    s.parse().map_err(|e: gaplab_core::Error| e.to_string())
}

fn rho(s: &str) -> Result<RhoConvention, String> {
    s.parse().map_err(|e: gaplab_core::Error| e.to_string())
}

fn patience(s: &str) -> Result<PatienceSpec, String> {
    s.parse().map_err(|e: CliError| e.to_string())
}

#[derive(Args)]
struct CommonArgs {
    /// Model: mmn-hw, mmna-diffusion or mmng-fluid [default: mmn-hw].
    #[arg(long, value_parser = model)]
    model: Option<ModelTag>,
    /// A single system size; shorthand for --n-grid with one entry.
    #[arg(long, conflicts_with = "n_grid", allow_negative_numbers = true)]
    n: Option<f64>,
    /// Comma-separated, strictly increasing system sizes [default: 1e2,1e3,1e4,1e5,1e6].
    #[arg(long, value_parser = list, allow_negative_numbers = true)]
    n_grid: Option<List>,
    /// Service rate μ; arrivals are λ = n [default: 1].
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
    /// Abandonment rate γ (exponential patience).
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    /// Holding cost per waiting customer per unit time [default: 1].
    #[arg(long, allow_negative_numbers = true)]
    h: Option<f64>,
    /// Staffing cost per server per unit time [default: 1].
    #[arg(long, allow_negative_numbers = true)]
    c: Option<f64>,
    /// Target delay probability for the constrained experiment.
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Comma-separated scaled staffing levels to probe [default: 0.5,1,2].
    #[arg(long, value_parser = list, allow_negative_numbers = true)]
    x: Option<List>,
    /// Also evaluate the refined, n-dependent prescription.
    #[arg(long)]
    refined: bool,
    /// Fluid correction convention: utilization or unit [default: utilization].
    #[arg(long, value_parser = rho)]
    rho_convention: Option<RhoConvention>,
    /// Patience law: exp:γ or hyperexp:p,a,b.
    #[arg(long, value_parser = patience)]
    patience: Option<PatienceSpec>,
    /// Config file of `key = value` lines; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
}

impl CommonArgs {
    fn resolve(self) -> CliResult<ExperimentConfig> {
        let base = match &self.config {
            Some(path) => Overrides::parse_file(&std::fs::read_to_string(path)?)?,
            None => Overrides::default(),
        };
        let flags = Overrides {
            model: self.model,
            n_grid: self.n.map(|n| vec![n]).or(self.n_grid.map(|l| l.0)),
            mu: self.mu,
            gamma: self.gamma,
            h: self.h,
            c: self.c,
            alpha: self.alpha,
            x_probe: self.x.map(|l| l.0),
            refined: self.refined.then_some(true),
            rho_convention: self.rho_convention,
            patience: self.patience,
            output_path: self.out,
        };
        ExperimentConfig::resolve(flags.over(base))
    }
}

fn sink(path: Option<&PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit_table(cfg: &ExperimentConfig, schema: Schema, table: Table) -> CliResult<()> {
    let mut out = sink(cfg.output_path.as_ref())?;
    write_table(&mut out, schema, &table.rows)?;
    out.flush()?;
    if table.warnings > 0 {
        eprintln!("warning: {} row(s) carry evaluator failures; see the flags column", table.warnings);
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Prescribe(args) => {
            let cfg = args.resolve()?;
            let report = experiments::prescribe(&cfg)?;
            let mut out = sink(cfg.output_path.as_ref())?;
            out.write_all(report.as_bytes())?;
            out.flush()?;
        }
        Command::Evaluate(args) => {
            let cfg = args.resolve()?;
            let table = experiments::evaluate(&cfg)?;
            emit_table(&cfg, Schema::Evaluate, table)?;
        }
        Command::GapTable(args) => {
            let cfg = args.resolve()?;
            let table = experiments::gap_table(&cfg)?;
            emit_table(&cfg, Schema::GapTable, table)?;
        }
        Command::ApproxCheck(args) => {
            let cfg = args.resolve()?;
            let table = experiments::approx_check(&cfg)?;
            emit_table(&cfg, Schema::ApproxCheck, table)?;
        }
        Command::Constrained(args) => {
            let cfg = args.resolve()?;
            let table = experiments::constrained(&cfg)?;
            emit_table(&cfg, Schema::Constrained, table)?;
        }
        Command::PlotScript { csv, out } => {
            let (schema, rows) = read_table(File::open(&csv)?)?;
            let script = plot_script(&csv, schema, &rows);
            let mut w = sink(out.as_ref())?;
            w.write_all(script.as_bytes())?;
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GAPLAB_LOG", "off")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gaplab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

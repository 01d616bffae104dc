use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use latticevar::config::RunConfig;
use latticevar::csvio::{self, write_file};
use latticevar::plot::{self, PlotKind};
use latticevar::run;
use latticevar::CliError;

#[derive(Parser)]
#[command(name = "latticevar", version, about = "Ground-state phases of the extended Bose-Hubbard chain with pair injection")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output path; overrides `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; overrides the config and LATTICEVAR_WORKERS.
    #[arg(long)]
    workers: Option<usize>,
    /// Master seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one parameter point and print a JSON report.
    Solve(RunArgs),
    /// Evaluate a one- or two-axis grid into a CSV table.
    Scan(RunArgs),
    /// Bisect a phase boundary at each sweep value.
    Boundary(RunArgs),
    /// Binder-curve critical points per size and their power-law extrapolation.
    Fss(RunArgs),
    /// Render a CSV table written by this tool as SVG.
    Plot {
        csv: PathBuf,
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        out: PathBuf,
        /// Column to color (heatmap) or plot (lines).
        #[arg(long)]
        column: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Heatmap,
    Lines,
}

fn load(args: &RunArgs) -> Result<(RunConfig, Option<PathBuf>, usize), CliError> {
    let mut cfg = RunConfig::from_path(&args.config)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let workers = run::resolve_workers(args.workers, cfg.workers)?;
    let out = args.out.clone().or_else(|| cfg.output.clone());
    Ok((cfg, out, workers))
}

fn need_out(out: Option<PathBuf>) -> Result<PathBuf, CliError> {
    out.ok_or_else(|| CliError::Config("no output path: pass --out or set \"output\"".into()))
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("plain data serializes") + "\n"
}

fn execute(cmd: Cmd) -> Result<(), CliError> {
    match cmd {
        Cmd::Solve(args) => {
            let (cfg, out, _) = load(&args)?;
            let report = to_json(&run::cmd_solve(&cfg)?);
            print!("{report}");
            if let Some(p) = out {
                write_file(&p, &report)?;
            }
        }
        Cmd::Scan(args) => {
            let (cfg, out, workers) = load(&args)?;
            let out = need_out(out)?;
            let start = std::time::Instant::now();
            let rows = run::cmd_scan(&cfg, workers)?;
            write_file(&out, &run::scan_csv(&rows))?;
            let failed = rows.iter().filter(|r| r.result.is_err()).count();
            if failed > 0 {
                eprintln!("warning: {failed} of {} points failed", rows.len());
            }
            eprintln!("{} points in {:.2} s on {workers} workers", rows.len(), start.elapsed().as_secs_f64());
        }
        Cmd::Boundary(args) => {
            let (cfg, out, workers) = load(&args)?;
            let out = need_out(out)?;
            let rows = run::cmd_boundary(&cfg, workers)?;
            write_file(&out, &run::boundary_csv(&rows))?;
            let flagged = rows.iter().filter(|r| r.result.is_err()).count();
            if flagged > 0 {
                eprintln!("warning: {flagged} of {} sweep points have no boundary", rows.len());
            }
        }
        Cmd::Fss(args) => {
            let (cfg, out, workers) = load(&args)?;
            let out = need_out(out)?;
            let report = run::cmd_fss(&cfg, workers)?;
            write_file(&out, &run::fss_csv(&report))?;
            print!("{}", to_json(&report));
        }
        Cmd::Plot { csv, kind, out, column } => {
            let table = csvio::read_file(Path::new(&csv))?;
            let kind = match kind {
                KindArg::Heatmap => PlotKind::Heatmap,
                KindArg::Lines => PlotKind::Lines,
            };
            write_file(&out, &plot::render(&table, kind, column.as_deref())?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("latticevar: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

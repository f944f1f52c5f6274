use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use psox_cli::analyze::render_table;
use psox_cli::experiment::{default_workers, CellStatus};
use psox_cli::{
    analyze_bundle, load_bundle, plot_convergence, run_experiment, run_sweep, write_analysis,
    AnalyzeOptions, ExperimentConfig, RunOptions, Scale,
};
use psox_core::Benchmark;

#[derive(Parser)]
#[command(
    name = "psox",
    version,
    about = "Batch experiments for the PSOX genetic algorithm"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Exec {
    /// Worker threads (default: $PSOX_WORKERS, else the logical CPU count).
    #[arg(long)]
    workers: Option<usize>,
    /// Force a size preset, overriding population, generations and runs.
    #[arg(long)]
    scale: Option<Scale>,
    /// Override the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress per-cell progress on stderr.
    #[arg(long, short)]
    quiet: bool,
}

impl Exec {
    fn load(&self, config: &Path) -> Result<(ExperimentConfig, RunOptions)> {
        let mut cfg = ExperimentConfig::load_with(config, self.scale)?;
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        let opts = RunOptions {
            workers: self
                .workers
                .filter(|&w| w > 0)
                .unwrap_or_else(default_workers),
            progress: !self.quiet,
        };
        Ok((cfg, opts))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run every (problem, operator, mutation) cell of a config.
    Run {
        config: PathBuf,
        #[command(flatten)]
        exec: Exec,
    },
    /// Summarise a bundle into summary.csv and dunnett.csv.
    Analyze {
        bundle: PathBuf,
        #[arg(long, default_value = "PSOX")]
        control: String,
        /// Significance level (default: the bundle's configured alpha).
        #[arg(long)]
        alpha: Option<f64>,
        /// Two-significant-digit numbers (1.7E+00) and 4-decimal p-values.
        #[arg(long)]
        paper_format: bool,
    },
    /// Convergence plots (one SVG per problem).
    Plot {
        bundle: PathBuf,
        /// Problem ids or names, comma separated (default: all in the bundle).
        #[arg(long, value_delimiter = ',')]
        problems: Vec<String>,
        /// Output directory (default: <bundle>/plots).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// PSOX-GM mutation-rate sweep.
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        exec: Exec,
    },
    /// Print the benchmark registry.
    ListBenchmarks,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { config, exec } => {
            let (cfg, opts) = exec.load(&config)?;
            let bundle = run_experiment(&cfg, &opts)?;
            let failed: Vec<_> = bundle
                .manifest
                .cells
                .iter()
                .filter(|c| c.status == CellStatus::Failed)
                .collect();
            println!(
                "{} cells, {} runs each -> {}",
                bundle.manifest.cells.len(),
                cfg.runs,
                bundle.dir.display()
            );
            for c in &failed {
                eprintln!(
                    "failed: p{:02} {}-{}: {}",
                    c.key.problem,
                    c.key.operator,
                    c.key.mutation,
                    c.error.as_deref().unwrap_or("?")
                );
            }
            Ok(if failed.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Analyze {
            bundle,
            control,
            alpha,
            paper_format,
        } => {
            let b = load_bundle(&bundle)?;
            let opts = AnalyzeOptions {
                control,
                alpha,
                paper_format,
            };
            let analysis = analyze_bundle(&b, &opts)?;
            let (summary, dunnett) = write_analysis(&bundle, &analysis, paper_format)?;
            print!("{}", render_table(&analysis));
            println!(
                "Dunnett: one-sided, H1 treatment mean > {} mean; '+' = {} significantly better",
                opts.control, opts.control
            );
            println!("wrote {} and {}", summary.display(), dunnett.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Plot {
            bundle,
            problems,
            out,
        } => {
            let b = load_bundle(&bundle)?;
            let problems = if problems.is_empty() {
                b.config().problems.clone()
            } else {
                problems
                    .iter()
                    .map(|p| Benchmark::lookup(p))
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .context("--problems")?
            };
            let out = out.unwrap_or_else(|| bundle.join("plots"));
            for path in plot_convergence(&b, &problems, &out)? {
                println!("wrote {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { config, exec } => {
            let (cfg, opts) = exec.load(&config)?;
            let res = run_sweep(&cfg, &opts)?;
            println!("rate  problem  mean");
            for r in &res.rows {
                println!("{:<5} p{:02}      {:.3e}", r.rate, r.problem, r.mean);
            }
            println!("wrote {}", res.csv.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::ListBenchmarks => {
            println!(
                "{:>2}  {:<16} {:<34} {:>17}  {:<10} optimum",
                "id", "key", "name", "range", "modality"
            );
            for b in Benchmark::ALL {
                let (lo, hi) = b.range();
                let spec = b.spec(30)?;
                let at = spec
                    .optimum_location
                    .as_ref()
                    .map_or("?".to_string(), |x| format!("x = {}", x[0]));
                let value = if b.is_noisy() {
                    "n/2 (expected)".to_string()
                } else {
                    format!("{}", spec.optimum_value)
                };
                println!(
                    "{:>2}  {:<16} {:<34} {:>17}  {:<10} f = {value} at {at}",
                    b.id(),
                    b.key(),
                    b.name(),
                    format!("[{lo}, {hi}]"),
                    format!("{:?}", b.modality()).to_lowercase(),
                );
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

//! Mutation-rate sweep for PSOX with Gaussian mutation.
//!
//! Cells are ordered rate-major, then problem; run `r` of cell `c` uses seed
//! `seed + c * runs + r`. The PSOX and GM parameters come from the config's
//! `[[operators]]` / `[[mutations]]` entries when present, with only the
//! rate replaced.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use psox_core::stats::summarize;
use psox_core::{run_ga, Benchmark, CrossoverConfig, CrossoverKind, MutationConfig, MutationKind};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, SweepConfig};
use crate::error::{HarnessError, Result};
use crate::experiment::{run_seed, with_pool, write_file, RunOptions};
use crate::format::sci;
use crate::plot::{render_svg, Curve, Panel};

pub const SWEEP_FILE: &str = "sweep.csv";
pub const SWEEP_HEADER: &str = "rate,problem,mean,std";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub rate: f64,
    pub problem: u32,
    pub mean: f64,
    pub std: f64,
    pub finals: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub csv: PathBuf,
    pub plots: Vec<PathBuf>,
}

impl SweepResult {
    pub fn mean(&self, problem: u32, rate: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.problem == problem && r.rate == rate)
            .map(|r| r.mean)
    }
}

fn base_operators(cfg: &ExperimentConfig) -> (CrossoverConfig, MutationConfig) {
    let psox = cfg
        .operators
        .iter()
        .find(|o| o.kind == CrossoverKind::Psox)
        .cloned()
        .unwrap_or_else(|| CrossoverConfig::new(CrossoverKind::Psox));
    let gm = cfg
        .mutations
        .iter()
        .find(|m| m.kind == MutationKind::Gaussian)
        .cloned()
        .unwrap_or_else(|| MutationConfig::new(MutationKind::Gaussian));
    (psox, gm)
}

fn rate_label(rate: f64) -> String {
    // shortest representation that round-trips, e.g. 0.1 or 1
    format!("{rate}")
}

pub fn render_sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::new();
    s.push_str(SWEEP_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            rate_label(r.rate),
            r.problem,
            sci(r.mean),
            sci(r.std)
        );
    }
    s
}

/// Runs the sweep and writes `sweep.csv` plus `plots/sweep_p<NN>.svg` into
/// the config's output directory.
pub fn run_sweep(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<SweepResult> {
    let sweep: &SweepConfig = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| HarnessError::ConfigField {
            path: PathBuf::from(&cfg.name),
            field: "sweep.rates".into(),
            message: "the sweep command needs a [sweep] table with `rates`".into(),
        })?;
    let (psox, gm) = base_operators(cfg);
    let mut job_cfg = cfg.clone();
    job_cfg.population_size = sweep.population_size;
    job_cfg.generations = sweep.generations;

    let grid: Vec<(f64, Benchmark)> = sweep
        .rates
        .iter()
        .flat_map(|&rate| sweep.problems.iter().map(move |&p| (rate, p)))
        .collect();
    let runs = sweep.runs;

    let rows: Vec<Result<SweepRow>> = with_pool(opts.workers, || {
        grid.par_iter()
            .enumerate()
            .map(|(cell, &(rate, problem))| {
                let finals = (0..runs)
                    .into_par_iter()
                    .map(|r| {
                        let m = gm.clone().with_rate(rate);
                        let ga = job_cfg.ga_config(
                            problem,
                            &psox,
                            &m,
                            run_seed(cfg.seed, cell, runs, r),
                        )?;
                        Ok(run_ga(ga)?.final_best.fitness)
                    })
                    .collect::<Result<Vec<f64>>>()?;
                let (mean, std) = summarize(&finals)?;
                if opts.progress {
                    eprintln!(
                        "rate {} p{:02}: mean {}",
                        rate_label(rate),
                        problem.id(),
                        sci(mean)
                    );
                }
                Ok(SweepRow {
                    rate,
                    problem: problem.id(),
                    mean,
                    std,
                    finals,
                })
            })
            .collect()
    })?;
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;

    let dir = &cfg.output_dir;
    let csv = dir.join(SWEEP_FILE);
    write_file(&csv, &render_sweep_csv(&rows))?;
    let plots = write_sweep_plots(&rows, sweep, &dir.join("plots"))?;
    Ok(SweepResult { rows, csv, plots })
}

fn write_sweep_plots(rows: &[SweepRow], sweep: &SweepConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for p in &sweep.problems {
        let mine: Vec<&SweepRow> = rows.iter().filter(|r| r.problem == p.id()).collect();
        let panel = Panel {
            title: format!("p{:02} {}: PSOX-GM vs mutation rate", p.id(), p.name()),
            x_label: "mutation rate".into(),
            y_label: "mean final best".into(),
            curves: vec![Curve {
                label: "PSOX-GM".into(),
                x: mine.iter().map(|r| r.rate).collect(),
                mean: mine.iter().map(|r| r.mean).collect(),
                std: mine.iter().map(|r| r.std).collect(),
            }],
            markers: true,
        };
        let path = out.join(format!("sweep_p{:02}.svg", p.id()));
        write_file(&path, &render_svg(&panel))?;
        written.push(path);
    }
    Ok(written)
}

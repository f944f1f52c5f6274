//! Batch execution of an experiment grid and the on-disk results bundle.
//!
//! Bundle layout:
//!
//! ```text
//! <output_dir>/manifest.json
//! <output_dir>/traces/p04_PSOX_GM.csv    run,generation,best_so_far
//! ```
//!
//! Cells are ordered problem-major, then operator, then mutation, exactly as
//! listed in the config. Run `r` of cell `c` uses seed
//! `seed + c * runs + r` (wrapping), so results do not depend on scheduling.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use psox_core::{run_ga, Benchmark, CrossoverConfig, MutationConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{io_err, HarnessError, Result};
use crate::format::{parse_number, sci};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TRACE_DIR: &str = "traces";
pub const TRACE_HEADER: &str = "run,generation,best_so_far";

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "PSOX_WORKERS";

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub workers: usize,
    /// Print per-cell progress to stderr.
    pub progress: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            workers: default_workers(),
            progress: false,
        }
    }
}

/// `PSOX_WORKERS` if set to a positive integer, else the logical CPU count.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub(crate) fn with_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    Ok(pool.install(job))
}

/// One (problem, operator, mutation) combination.
#[derive(Debug, Clone)]
pub struct Cell {
    pub index: usize,
    pub problem: Benchmark,
    pub operator: CrossoverConfig,
    pub mutation: MutationConfig,
}

impl Cell {
    pub fn key(&self) -> CellKey {
        CellKey {
            problem: self.problem.id(),
            operator: self.operator.kind.label().to_string(),
            mutation: self.mutation.kind.label().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellKey {
    pub problem: u32,
    pub operator: String,
    pub mutation: String,
}

impl CellKey {
    pub fn trace_file(&self) -> String {
        format!(
            "{TRACE_DIR}/p{:02}_{}_{}.csv",
            self.problem, self.operator, self.mutation
        )
    }
}

pub fn cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for &problem in &cfg.problems {
        for op in &cfg.operators {
            for m in &cfg.mutations {
                out.push(Cell {
                    index: out.len(),
                    problem,
                    operator: op.clone(),
                    mutation: m.clone(),
                });
            }
        }
    }
    out
}

pub fn run_seed(master: u64, cell_index: usize, runs: usize, run: usize) -> u64 {
    master.wrapping_add(
        (cell_index as u64)
            .wrapping_mul(runs as u64)
            .wrapping_add(run as u64),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    #[serde(flatten)]
    pub key: CellKey,
    pub trace_file: String,
    pub status: CellStatus,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    /// Seed for the Monte Carlo stages of `analyze`.
    pub mc_seed: u64,
    pub cells: Vec<CellRecord>,
}

/// Best-so-far traces, `traces[run][generation - 1]`.
pub type CellTraces = Vec<Vec<f64>>;

/// A manifest plus the traces of every successful cell.
#[derive(Debug, Clone)]
pub struct ResultsBundle {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub traces: BTreeMap<CellKey, CellTraces>,
}

impl ResultsBundle {
    pub fn config(&self) -> &ExperimentConfig {
        &self.manifest.config
    }

    /// Final best of every run in a cell.
    pub fn finals(&self, key: &CellKey) -> Option<Vec<f64>> {
        self.traces
            .get(key)
            .map(|runs| runs.iter().filter_map(|t| t.last().copied()).collect())
    }
}

fn run_cell(cfg: &ExperimentConfig, cell: &Cell) -> std::result::Result<CellTraces, String> {
    (0..cfg.runs)
        .into_par_iter()
        .map(|r| {
            let seed = run_seed(cfg.seed, cell.index, cfg.runs, r);
            let ga = cfg
                .ga_config(cell.problem, &cell.operator, &cell.mutation, seed)
                .map_err(|e| e.to_string())?;
            run_ga(ga)
                .map(|t| t.best_per_generation)
                .map_err(|e| format!("run {r}: {e}"))
        })
        .collect()
}

pub fn render_trace_csv(traces: &CellTraces) -> String {
    let mut s = String::with_capacity(traces.iter().map(|t| t.len() * 24).sum::<usize>() + 32);
    s.push_str(TRACE_HEADER);
    s.push('\n');
    for (run, trace) in traces.iter().enumerate() {
        for (g, v) in trace.iter().enumerate() {
            let _ = writeln!(s, "{run},{},{}", g + 1, sci(*v));
        }
    }
    s
}

pub fn parse_trace_csv(text: &str, path: &Path) -> Result<CellTraces> {
    let bad = |line: usize, message: String| HarnessError::Malformed {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == TRACE_HEADER => {}
        _ => return Err(bad(1, format!("expected header `{TRACE_HEADER}`"))),
    }
    let mut traces: CellTraces = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(bad(i + 1, "expected 3 columns".into()));
        }
        let run: usize = fields[0]
            .trim()
            .parse()
            .map_err(|_| bad(i + 1, "bad run index".into()))?;
        let gen: usize = fields[1]
            .trim()
            .parse()
            .map_err(|_| bad(i + 1, "bad generation".into()))?;
        let value = parse_number(fields[2]).ok_or_else(|| bad(i + 1, "bad value".into()))?;
        if run > traces.len() {
            return Err(bad(i + 1, format!("run {run} out of order")));
        }
        if run == traces.len() {
            traces.push(Vec::new());
        }
        let t = &mut traces[run];
        if gen != t.len() + 1 {
            return Err(bad(i + 1, format!("generation {gen} out of order")));
        }
        t.push(value);
    }
    Ok(traces)
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(path, contents).map_err(io_err(path))
}

fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<()> {
    let mut json = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    json.push('\n');
    write_file(&dir.join(MANIFEST_FILE), &json)
}

/// Runs the whole grid into `cfg.output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ResultsBundle> {
    let dir = cfg.output_dir.clone();
    fs::create_dir_all(dir.join(TRACE_DIR)).map_err(io_err(&dir))?;
    let grid = cells(cfg);
    let done = AtomicUsize::new(0);
    let total = grid.len();

    let outcomes: Vec<Result<(CellRecord, Option<CellTraces>)>> = with_pool(opts.workers, || {
        grid.par_iter()
            .map(|cell| {
                let key = cell.key();
                let trace_file = key.trace_file();
                let outcome = run_cell(cfg, cell);
                let record = match &outcome {
                    Ok(traces) => {
                        write_file(&dir.join(&trace_file), &render_trace_csv(traces))?;
                        CellRecord {
                            key,
                            trace_file,
                            status: CellStatus::Ok,
                            error: None,
                        }
                    }
                    Err(msg) => CellRecord {
                        key,
                        trace_file,
                        status: CellStatus::Failed,
                        error: Some(msg.clone()),
                    },
                };
                if opts.progress {
                    let n = done.fetch_add(1, Ordering::Relaxed) + 1;
                    let k = &record.key;
                    eprintln!(
                        "[{n}/{total}] p{:02} {}-{} {}",
                        k.problem,
                        k.operator,
                        k.mutation,
                        if record.status == CellStatus::Ok {
                            "ok"
                        } else {
                            "FAILED"
                        }
                    );
                }
                Ok((record, outcome.ok()))
            })
            .collect()
    })?;

    let mut records = Vec::with_capacity(total);
    let mut traces = BTreeMap::new();
    for outcome in outcomes {
        let (record, t) = outcome?;
        if let Some(t) = t {
            traces.insert(record.key.clone(), t);
        }
        records.push(record);
    }
    let manifest = Manifest {
        config: cfg.clone(),
        mc_seed: cfg.seed,
        cells: records,
    };
    write_manifest(&dir, &manifest)?;
    Ok(ResultsBundle {
        dir,
        manifest,
        traces,
    })
}

/// Reads a bundle written by [`run_experiment`]. Cells whose trace file is
/// missing or failed are simply absent from `traces`.
pub fn load_bundle(dir: &Path) -> Result<ResultsBundle> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| HarnessError::Malformed {
        path: path.clone(),
        line: e.line(),
        message: e.to_string(),
    })?;
    let mut traces = BTreeMap::new();
    for cell in &manifest.cells {
        if cell.status != CellStatus::Ok {
            continue;
        }
        let p = dir.join(&cell.trace_file);
        match fs::read_to_string(&p) {
            Ok(text) => {
                traces.insert(cell.key.clone(), parse_trace_csv(&text, &p)?);
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(HarnessError::Io { path: p, source: e }),
        }
    }
    Ok(ResultsBundle {
        dir: dir.to_path_buf(),
        manifest,
        traces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(dir: &Path) -> ExperimentConfig {
        let text = format!(
            "name = \"t\"\nproblems = [9, 4]\ndimension = 3\npopulation_size = 8\ngenerations = 4\nruns = 2\nseed = 10\noutput_dir = {:?}\n[[operators]]\nkind = \"PSOX\"\n[[operators]]\nkind = \"SBX\"\n",
            dir.to_str().unwrap()
        );
        ExperimentConfig::parse(&text, Path::new("tiny.cfg"), None).unwrap()
    }

    #[test]
    fn cell_order_and_seeds() {
        let cfg = tiny(Path::new("unused"));
        let grid = cells(&cfg);
        assert_eq!(grid.len(), 2 * 2 * 2);
        let labels: Vec<String> = grid
            .iter()
            .map(|c| format!("{}{}{}", c.problem.id(), c.operator.kind, c.mutation.kind))
            .collect();
        assert_eq!(labels[0], "9PSOXNUM");
        assert_eq!(labels[1], "9PSOXGM");
        assert_eq!(labels[2], "9SBXNUM");
        assert_eq!(labels[4], "4PSOXNUM");
        assert_eq!(run_seed(10, 3, 2, 1), 10 + 3 * 2 + 1);
        assert_eq!(run_seed(u64::MAX, 0, 2, 1), 0);
    }

    #[test]
    fn trace_csv_round_trip() {
        let traces = vec![vec![3.0, 2.0, 1.5e-30], vec![4.0, 4.0, 0.0]];
        let text = render_trace_csv(&traces);
        assert!(text.starts_with("run,generation,best_so_far\n0,1,3.00000e+00\n"));
        assert!(text.ends_with("1,3,0.00000e+00\n"));
        assert_eq!(parse_trace_csv(&text, Path::new("x")).unwrap(), traces);
    }

    #[test]
    fn malformed_traces_report_line() {
        let e = parse_trace_csv(
            "run,generation,best_so_far\n0,1,1.0\n0,3,1.0\n",
            Path::new("x"),
        )
        .unwrap_err();
        assert!(matches!(e, HarnessError::Malformed { line: 3, .. }), "{e}");
        assert!(parse_trace_csv("a,b,c\n", Path::new("x")).is_err());
        assert!(parse_trace_csv("run,generation,best_so_far\n0,1,zz\n", Path::new("x")).is_err());
    }

    #[test]
    fn run_then_load_agree() {
        let dir = tempfile::tempdir().unwrap();
        let tmp = dir.path().join("bundle");
        let cfg = tiny(&tmp);
        let bundle = run_experiment(
            &cfg,
            &RunOptions {
                workers: 2,
                progress: false,
            },
        )
        .unwrap();
        assert_eq!(bundle.traces.len(), 8);
        for t in bundle.traces.values() {
            assert_eq!(t.len(), 2);
            assert!(t.iter().all(|run| run.len() == 4));
        }
        let loaded = load_bundle(&tmp).unwrap();
        assert_eq!(loaded.manifest, bundle.manifest);
        for (k, t) in &bundle.traces {
            let l = &loaded.traces[k];
            for (a, b) in t.iter().flatten().zip(l.iter().flatten()) {
                assert!((a - b).abs() <= 5e-6 * a.abs().max(1e-300));
            }
        }
    }
}

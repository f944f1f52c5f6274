//! Statistical summary of a results bundle.
//!
//! Cells are grouped per (problem, mutation); within a group every operator
//! is one sample of final best values. The Kruskal-Wallis flag is shared by
//! all rows of a group, and Dunnett compares each operator against the
//! control operator under the same mutation.
//!
//! `summary.csv`: `problem,operator,mutation,mean,std,kw_flag`
//! `dunnett.csv`: `problem,treatment,p_value,flag`, treatment = `OP-MUT`
//!
//! Flags: `+` significant, `~` not significant, `-` not tested,
//! `incomplete` when a cell of the group is missing or failed. The Dunnett
//! alternative is "treatment mean > control mean", so under minimisation `+`
//! marks a treatment that the control beats significantly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use psox_core::stats::{build_report, kruskal_wallis, summarize, Flag, SampleGroup};
use psox_core::RngStream;
use serde::Serialize;

use crate::error::Result;
use crate::experiment::{write_file, CellKey, ResultsBundle};
use crate::format::{fixed4, sci, sci_paper};

pub const SUMMARY_FILE: &str = "summary.csv";
pub const DUNNETT_FILE: &str = "dunnett.csv";
pub const SUMMARY_HEADER: &str = "problem,operator,mutation,mean,std,kw_flag";
pub const DUNNETT_HEADER: &str = "problem,treatment,p_value,flag";
pub const INCOMPLETE: &str = "incomplete";

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    pub control: String,
    /// `None` takes the bundle's configured alpha.
    pub alpha: Option<f64>,
    /// Two-significant-digit `1.7E+00` numbers and four-decimal p-values.
    pub paper_format: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            control: "PSOX".into(),
            alpha: None,
            paper_format: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub problem: u32,
    pub operator: String,
    pub mutation: String,
    /// `None` for a missing cell.
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub kw_flag: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DunnettRow {
    pub problem: u32,
    pub treatment: String,
    pub p_value: Option<f64>,
    pub flag: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Analysis {
    pub summary: Vec<SummaryRow>,
    pub dunnett: Vec<DunnettRow>,
}

impl Analysis {
    pub fn row(&self, problem: u32, operator: &str, mutation: &str) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|r| r.problem == problem && r.operator == operator && r.mutation == mutation)
    }
}

fn flag_str(f: Flag) -> String {
    f.symbol().to_string()
}

/// Pure function of the bundle, `opts` and the manifest's MC seed.
pub fn analyze_bundle(bundle: &ResultsBundle, opts: &AnalyzeOptions) -> Result<Analysis> {
    let cfg = bundle.config();
    let alpha = opts.alpha.unwrap_or(cfg.alpha);
    let mut out = Analysis::default();
    let mut group_index = 0u64;

    for problem in &cfg.problems {
        for mutation in &cfg.mutations {
            let mlabel = mutation.kind.label();
            let keys: Vec<CellKey> = cfg
                .operators
                .iter()
                .map(|op| CellKey {
                    problem: problem.id(),
                    operator: op.kind.label().to_string(),
                    mutation: mlabel.to_string(),
                })
                .collect();
            let finals: Vec<Option<Vec<f64>>> = keys
                .iter()
                .map(|k| bundle.finals(k).filter(|v| !v.is_empty()))
                .collect();
            let mut rng = RngStream::from_seed(bundle.manifest.mc_seed.wrapping_add(group_index));
            group_index += 1;

            let complete = finals.iter().all(Option::is_some);
            let testable = complete
                && keys.len() >= 2
                && finals
                    .iter()
                    .flatten()
                    .all(|v| v.len() >= 2 && v.iter().all(|x| x.is_finite()));
            let groups: Vec<SampleGroup> = keys
                .iter()
                .zip(&finals)
                .filter_map(|(k, v)| {
                    v.as_ref()
                        .map(|v| SampleGroup::new(k.operator.clone(), v.clone()))
                })
                .collect();
            let has_control = groups.iter().any(|g| g.label == opts.control);

            let (kw_flag, dunnett_cells): (String, Vec<(String, Option<f64>, String)>) =
                if !complete {
                    let cells = keys
                        .iter()
                        .filter(|k| k.operator != opts.control)
                        .map(|k| (k.operator.clone(), None, INCOMPLETE.to_string()))
                        .collect();
                    (INCOMPLETE.to_string(), cells)
                } else if !testable {
                    let cells = if keys.len() >= 2 && has_control {
                        keys.iter()
                            .filter(|k| k.operator != opts.control)
                            .map(|k| (k.operator.clone(), None, flag_str(Flag::NotTested)))
                            .collect()
                    } else {
                        Vec::new()
                    };
                    (flag_str(Flag::NotTested), cells)
                } else if has_control {
                    let report =
                        build_report(&groups, &opts.control, alpha, cfg.mc_samples, &mut rng)?;
                    let cells = report
                        .dunnett
                        .iter()
                        .map(|c| (c.label.clone(), c.p_value, flag_str(c.flag)))
                        .collect();
                    (flag_str(report.kw_flag()), cells)
                } else {
                    (flag_str(kruskal_wallis(&groups, alpha)?.flag), Vec::new())
                };

            for (k, v) in keys.iter().zip(&finals) {
                let (mean, std) = match v {
                    Some(v) => {
                        let (m, s) = summarize(v)?;
                        (Some(m), Some(s))
                    }
                    None => (None, None),
                };
                out.summary.push(SummaryRow {
                    problem: k.problem,
                    operator: k.operator.clone(),
                    mutation: k.mutation.clone(),
                    mean,
                    std,
                    kw_flag: kw_flag.clone(),
                });
            }
            for (label, p, flag) in dunnett_cells {
                out.dunnett.push(DunnettRow {
                    problem: problem.id(),
                    treatment: format!("{label}-{mlabel}"),
                    p_value: p,
                    flag,
                });
            }
        }
    }
    Ok(out)
}

pub fn render_summary_csv(a: &Analysis, paper_format: bool) -> String {
    let num = |x: Option<f64>| match x {
        None => INCOMPLETE.to_string(),
        Some(v) if paper_format => sci_paper(v),
        Some(v) => sci(v),
    };
    let mut s = String::new();
    s.push_str(SUMMARY_HEADER);
    s.push('\n');
    for r in &a.summary {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.problem,
            r.operator,
            r.mutation,
            num(r.mean),
            num(r.std),
            r.kw_flag
        );
    }
    s
}

pub fn render_dunnett_csv(a: &Analysis, paper_format: bool) -> String {
    let mut s = String::new();
    s.push_str(DUNNETT_HEADER);
    s.push('\n');
    for r in &a.dunnett {
        let p = match r.p_value {
            None => "-".to_string(),
            Some(p) if paper_format => fixed4(p),
            Some(p) => sci(p),
        };
        let _ = writeln!(s, "{},{},{},{}", r.problem, r.treatment, p, r.flag);
    }
    s
}

/// Writes `summary.csv` and `dunnett.csv` into `dir`.
pub fn write_analysis(dir: &Path, a: &Analysis, paper_format: bool) -> Result<(PathBuf, PathBuf)> {
    let summary = dir.join(SUMMARY_FILE);
    let dunnett = dir.join(DUNNETT_FILE);
    write_file(&summary, &render_summary_csv(a, paper_format))?;
    write_file(&dunnett, &render_dunnett_csv(a, paper_format))?;
    Ok((summary, dunnett))
}

/// Wide plain-text table (one line per problem × mutation) for the terminal.
pub fn render_table(a: &Analysis) -> String {
    let mut s = String::new();
    let mut i = 0;
    while i < a.summary.len() {
        let first = &a.summary[i];
        let group: Vec<&SummaryRow> = a.summary[i..]
            .iter()
            .take_while(|r| r.problem == first.problem && r.mutation == first.mutation)
            .collect();
        let _ = write!(
            s,
            "p{:02} {:<4} KW {:<10}",
            first.problem, first.mutation, first.kw_flag
        );
        for r in &group {
            let m = r.mean.map_or_else(|| INCOMPLETE.to_string(), sci_paper);
            let _ = write!(s, "  {}={}", r.operator, m);
        }
        s.push('\n');
        i += group.len();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;
    use crate::experiment::{CellRecord, CellStatus, Manifest};
    use std::collections::BTreeMap;

    fn bundle(cfg_text: &str, data: &[(u32, &str, &str, Vec<f64>)]) -> ResultsBundle {
        let config = ExperimentConfig::parse(cfg_text, Path::new("t.cfg"), None).unwrap();
        let mut traces = BTreeMap::new();
        let mut cells = Vec::new();
        for (p, op, m, finals) in data {
            let key = CellKey {
                problem: *p,
                operator: op.to_string(),
                mutation: m.to_string(),
            };
            traces.insert(
                key.clone(),
                finals.iter().map(|v| vec![v + 1.0, *v]).collect(),
            );
            cells.push(CellRecord {
                trace_file: key.trace_file(),
                key,
                status: CellStatus::Ok,
                error: None,
            });
        }
        ResultsBundle {
            dir: PathBuf::from("."),
            manifest: Manifest {
                mc_seed: config.seed,
                config,
                cells,
            },
            traces,
        }
    }

    const THREE_OPS: &str = "name = \"a\"\nproblems = [2]\n[[operators]]\nkind = \"AX\"\n[[operators]]\nkind = \"LX\"\n[[operators]]\nkind = \"PSOX\"\n[[mutations]]\nkind = \"GM\"\n";

    #[test]
    fn identical_values_give_tilde_and_dashed_dunnett() {
        let same = vec![-1.0; 5];
        let b = bundle(
            THREE_OPS,
            &[
                (2, "AX", "GM", same.clone()),
                (2, "LX", "GM", same.clone()),
                (2, "PSOX", "GM", same),
            ],
        );
        let a = analyze_bundle(&b, &AnalyzeOptions::default()).unwrap();
        assert_eq!(a.summary.len(), 3);
        assert!(a
            .summary
            .iter()
            .all(|r| r.kw_flag == "~" && r.std == Some(0.0)));
        assert_eq!(a.dunnett.len(), 2);
        assert!(a
            .dunnett
            .iter()
            .all(|r| r.flag == "-" && r.p_value.is_none()));
        assert_eq!(a.dunnett[0].treatment, "AX-GM");
        let csv = render_dunnett_csv(&a, false);
        assert_eq!(
            csv,
            "problem,treatment,p_value,flag\n2,AX-GM,-,-\n2,LX-GM,-,-\n"
        );
    }

    #[test]
    fn separated_groups_run_dunnett() {
        let psox: Vec<f64> = (0..10).map(|i| i as f64 * 0.01).collect();
        let worse: Vec<f64> = (0..10).map(|i| 5.0 + i as f64 * 0.01).collect();
        let b = bundle(
            THREE_OPS,
            &[
                (2, "AX", "GM", worse.clone()),
                (2, "LX", "GM", psox.clone()),
                (2, "PSOX", "GM", psox),
            ],
        );
        let a = analyze_bundle(&b, &AnalyzeOptions::default()).unwrap();
        assert!(a.summary.iter().all(|r| r.kw_flag == "+"));
        assert_eq!(a.dunnett[0].flag, "+");
        assert!(a.dunnett[0].p_value.unwrap() < 1e-3);
        assert_eq!(a.dunnett[1].flag, "~");
        // same seed, same numbers
        assert_eq!(a, analyze_bundle(&b, &AnalyzeOptions::default()).unwrap());
    }

    #[test]
    fn single_cell_has_no_test() {
        let b = bundle(
            "name = \"s\"\nproblems = [9]\n[[operators]]\nkind = \"PSOX\"\n[[mutations]]\nkind = \"NUM\"\n",
            &[(9, "PSOX", "NUM", vec![1.0, 3.0])],
        );
        let a = analyze_bundle(&b, &AnalyzeOptions::default()).unwrap();
        assert_eq!(a.summary.len(), 1);
        assert_eq!(a.summary[0].mean, Some(2.0));
        assert_eq!(a.summary[0].kw_flag, "-");
        assert!(a.dunnett.is_empty());
        assert_eq!(
            render_summary_csv(&a, false),
            "problem,operator,mutation,mean,std,kw_flag\n9,PSOX,NUM,2.00000e+00,1.41421e+00,-\n"
        );
        assert_eq!(
            render_summary_csv(&a, true),
            "problem,operator,mutation,mean,std,kw_flag\n9,PSOX,NUM,2.0E+00,1.4E+00,-\n"
        );
    }

    #[test]
    fn single_run_has_no_test() {
        let b = bundle(
            THREE_OPS,
            &[
                (2, "AX", "GM", vec![1.0]),
                (2, "LX", "GM", vec![2.0]),
                (2, "PSOX", "GM", vec![0.0]),
            ],
        );
        let a = analyze_bundle(&b, &AnalyzeOptions::default()).unwrap();
        assert!(a.summary.iter().all(|r| r.kw_flag == "-"));
        assert!(a.dunnett.iter().all(|r| r.flag == "-"));
    }

    #[test]
    fn missing_cell_marks_group_incomplete() {
        let b = bundle(
            THREE_OPS,
            &[
                (2, "AX", "GM", vec![1.0, 2.0]),
                (2, "PSOX", "GM", vec![0.0, 0.5]),
            ],
        );
        let a = analyze_bundle(&b, &AnalyzeOptions::default()).unwrap();
        let lx = a.row(2, "LX", "GM").unwrap();
        assert_eq!(lx.mean, None);
        assert!(a.summary.iter().all(|r| r.kw_flag == INCOMPLETE));
        assert_eq!(a.row(2, "AX", "GM").unwrap().mean, Some(1.5));
        assert!(a.dunnett.iter().all(|r| r.flag == INCOMPLETE));
        assert!(
            render_summary_csv(&a, false).contains("2,LX,GM,incomplete,incomplete,incomplete\n")
        );
    }

    #[test]
    fn table_lists_every_group() {
        let b = bundle(
            THREE_OPS,
            &[
                (2, "AX", "GM", vec![1.0, 2.0]),
                (2, "LX", "GM", vec![1.0, 2.0]),
                (2, "PSOX", "GM", vec![0.0, 0.5]),
            ],
        );
        let t = render_table(&analyze_bundle(&b, &AnalyzeOptions::default()).unwrap());
        assert_eq!(t.lines().count(), 1);
        assert!(t.contains("PSOX=2.5E-01"));
    }
}

//! Result statistics: mean/std summaries, the Kruskal-Wallis omnibus test and a
//! one-sided Dunnett post-hoc against a control group.
//!
//! Flag convention throughout: `+` means significant at `α`, `~` means not
//! significant, `-` means the test was not run. For Dunnett, the alternative
//! is "treatment mean > control mean", so under minimisation `+` says the
//! control operator did significantly better.

mod dunnett;
mod kruskal;

pub use dunnett::{dunnett_one_sided, DunnettOutcome, MIN_MC_SAMPLES};
pub use kruskal::{kruskal_wallis, KruskalWallis, PValueMethod};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Default Monte Carlo sample count for Dunnett p-values.
pub const DEFAULT_MC_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleGroup {
    pub label: String,
    pub values: Vec<f64>,
}

impl SampleGroup {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            values,
        }
    }

    fn check(&self, min_len: usize) -> Result<()> {
        if self.values.len() < min_len {
            return Err(Error::InvalidStatInput(format!(
                "group `{}` needs at least {min_len} values, has {}",
                self.label,
                self.values.len()
            )));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidStatInput(format!(
                "group `{}` contains non-finite values",
                self.label
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flag {
    #[serde(rename = "+")]
    Significant,
    #[serde(rename = "~")]
    NotSignificant,
    #[serde(rename = "-")]
    NotTested,
}

impl Flag {
    pub fn from_p(p: f64, alpha: f64) -> Self {
        if p < alpha {
            Flag::Significant
        } else {
            Flag::NotSignificant
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Flag::Significant => "+",
            Flag::NotSignificant => "~",
            Flag::NotTested => "-",
        }
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Mean and sample standard deviation (`n - 1` divisor; 0 for a single value).
pub fn summarize(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::EmptySample("summarize".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Ok((mean, 0.0));
    }
    let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    Ok((mean, (ss / (n - 1.0)).sqrt()))
}

/// Ranks `1..=N`; ties receive the mean of the positions they span.
pub fn rank_with_ties(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j (0-based) share rank mean((i+1)..=(j+1))
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = r;
        }
        i = j + 1;
    }
    ranks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub label: String,
    pub n: usize,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DunnettCell {
    pub label: String,
    pub p_value: Option<f64>,
    pub flag: Flag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub alpha: f64,
    pub control: String,
    pub summaries: Vec<GroupSummary>,
    pub kruskal_wallis: KruskalWallis,
    pub dunnett: Vec<DunnettCell>,
}

impl StatReport {
    pub fn kw_flag(&self) -> Flag {
        self.kruskal_wallis.flag
    }
}

/// Two-stage pipeline: summaries and Kruskal-Wallis over all groups, then
/// Dunnett (treatments vs. `control_label`) only when Kruskal-Wallis is
/// significant. Otherwise every Dunnett cell is `-`.
pub fn build_report(
    groups: &[SampleGroup],
    control_label: &str,
    alpha: f64,
    mc_samples: usize,
    rng: &mut RngStream,
) -> Result<StatReport> {
    let control = groups
        .iter()
        .find(|g| g.label == control_label)
        .ok_or_else(|| Error::InvalidStatInput(format!("control `{control_label}` not found")))?;
    let summaries = groups
        .iter()
        .map(|g| {
            let (mean, std) = summarize(&g.values)?;
            Ok(GroupSummary {
                label: g.label.clone(),
                n: g.values.len(),
                mean,
                std,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let kw = kruskal_wallis(groups, alpha)?;
    let treatments: Vec<SampleGroup> = groups
        .iter()
        .filter(|g| g.label != control_label)
        .cloned()
        .collect();
    let dunnett = if kw.flag == Flag::Significant {
        dunnett_one_sided(control, &treatments, alpha, mc_samples, rng)?
            .into_iter()
            .map(|o| DunnettCell {
                label: o.label,
                p_value: Some(o.p_value),
                flag: o.flag,
            })
            .collect()
    } else {
        treatments
            .iter()
            .map(|t| DunnettCell {
                label: t.label.clone(),
                p_value: None,
                flag: Flag::NotTested,
            })
            .collect()
    };
    Ok(StatReport {
        alpha,
        control: control_label.to_string(),
        summaries,
        kruskal_wallis: kw,
        dunnett,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn summarize_examples() {
        assert_eq!(summarize(&[1.0, 1.0, 1.0]).unwrap(), (1.0, 0.0));
        let (m, s) = summarize(&[0.0, 2.0]).unwrap();
        assert_eq!(m, 1.0);
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn summarize_matches_two_pass_oracle() {
        let mut rng = RngStream::from_seed(30);
        let xs: Vec<f64> = (0..30)
            .map(|_| rng.standard_normal() * 3.0 + 10.0)
            .collect();
        // textbook two-pass with explicit index loop
        let mut total = 0.0;
        for i in 0..xs.len() {
            total += xs[i];
        }
        let mean = total / 30.0;
        let mut dev = 0.0;
        for i in 0..xs.len() {
            dev += (xs[i] - mean).powi(2);
        }
        let sd = (dev / 29.0).sqrt();
        let (m, s) = summarize(&xs).unwrap();
        assert!((m - mean).abs() < 1e-12);
        assert!((s - sd).abs() < 1e-12);
    }

    #[test]
    fn midrank_examples() {
        assert_eq!(rank_with_ties(&[10.0, 20.0, 30.0]), vec![1.0, 2.0, 3.0]);
        assert_eq!(rank_with_ties(&[5.0, 5.0]), vec![1.5, 1.5]);
        assert_eq!(
            rank_with_ties(&[3.0, 1.0, 3.0, 2.0]),
            vec![3.5, 1.0, 3.5, 2.0]
        );
    }

    #[test]
    fn report_all_identical_dashes() {
        let groups: Vec<_> = ["AX", "FX", "PSOX"]
            .iter()
            .map(|l| SampleGroup::new(*l, vec![3.1e-7; 5]))
            .collect();
        let r = build_report(&groups, "PSOX", 0.05, 10_000, &mut RngStream::from_seed(0)).unwrap();
        assert_eq!(r.kw_flag(), Flag::NotSignificant);
        assert_eq!(r.dunnett.len(), 2);
        assert!(r
            .dunnett
            .iter()
            .all(|c| c.flag == Flag::NotTested && c.p_value.is_none()));
    }

    #[test]
    fn report_dominant_control() {
        let mut rng = RngStream::from_seed(5);
        let mut groups = vec![];
        for (label, shift) in [("AX", 5.0), ("SBX", 8.0), ("PSOX", 0.0)] {
            let v = (0..30)
                .map(|_| shift + rng.standard_normal().abs())
                .collect();
            groups.push(SampleGroup::new(label, v));
        }
        let r = build_report(&groups, "PSOX", 0.05, 20_000, &mut RngStream::from_seed(1)).unwrap();
        assert_eq!(r.kw_flag(), Flag::Significant);
        assert!(r.dunnett.iter().all(|c| c.flag == Flag::Significant));
        let again =
            build_report(&groups, "PSOX", 0.05, 20_000, &mut RngStream::from_seed(1)).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn report_missing_control() {
        let groups = vec![
            SampleGroup::new("AX", vec![1.0, 2.0]),
            SampleGroup::new("FX", vec![1.0, 3.0]),
        ];
        assert!(build_report(&groups, "PSOX", 0.05, 10_000, &mut RngStream::from_seed(0)).is_err());
    }

    proptest! {
        #[test]
        fn ranks_sum_to_triangular(values in prop::collection::vec(prop::sample::select(vec![0.0, 1.0, 2.5, -3.0, 7.0, 1e-9]), 1..60)) {
            let n = values.len() as f64;
            let r = rank_with_ties(&values);
            prop_assert_eq!(r.iter().sum::<f64>(), n * (n + 1.0) / 2.0);
        }
    }
}

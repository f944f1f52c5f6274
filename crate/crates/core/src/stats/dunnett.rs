//! One-sided Dunnett many-to-one comparison.
//!
//! For treatment `j` the statistic is
//! `t_j = (ȳ_j - ȳ_0) / (s √(1/n_j + 1/n_0))` with `s²` the pooled
//! within-group variance over the control and all treatments
//! (`ν = N - k - 1` degrees of freedom). The family-adjusted p-value is
//! `P(max_j T_j ≥ t_j)` under the null, estimated by seeded Monte Carlo over
//! the joint distribution of `T_j = (Z_j/√n_j - Z_0/√n_0) / (√(1/n_j + 1/n_0) S)`
//! with independent standard normals `Z` and `S = √(χ²_ν / ν)`.

use rand_distr::{ChiSquared, Distribution};
use serde::{Deserialize, Serialize};

use super::{Flag, SampleGroup};
use crate::error::{Error, Result};
use crate::rng::RngStream;

pub const MIN_MC_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DunnettOutcome {
    pub label: String,
    pub statistic: f64,
    pub p_value: f64,
    pub flag: Flag,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn dunnett_one_sided(
    control: &SampleGroup,
    treatments: &[SampleGroup],
    alpha: f64,
    mc_samples: usize,
    rng: &mut RngStream,
) -> Result<Vec<DunnettOutcome>> {
    if treatments.is_empty() {
        return Err(Error::InvalidStatInput("no treatment groups".into()));
    }
    if mc_samples < MIN_MC_SAMPLES {
        return Err(Error::InvalidStatInput(format!(
            "mc_samples must be >= {MIN_MC_SAMPLES}, got {mc_samples}"
        )));
    }
    control.check(2)?;
    for t in treatments {
        t.check(2)?;
    }

    let n0 = control.values.len() as f64;
    let m0 = mean(&control.values);
    let mut ss = control.values.iter().map(|v| (v - m0).powi(2)).sum::<f64>();
    let mut total = control.values.len();
    let means: Vec<f64> = treatments.iter().map(|t| mean(&t.values)).collect();
    for (t, m) in treatments.iter().zip(&means) {
        ss += t.values.iter().map(|v| (v - m).powi(2)).sum::<f64>();
        total += t.values.len();
    }
    let dof = total - treatments.len() - 1;
    let s = (ss / dof as f64).sqrt();

    if s == 0.0 || !s.is_finite() {
        return Ok(treatments
            .iter()
            .zip(&means)
            .map(|(t, &m)| {
                let diff = m - m0;
                let (statistic, p) = if diff > 0.0 {
                    (f64::INFINITY, 0.0)
                } else if diff < 0.0 {
                    (f64::NEG_INFINITY, 1.0)
                } else {
                    (0.0, 1.0)
                };
                DunnettOutcome {
                    label: t.label.clone(),
                    statistic,
                    p_value: p,
                    flag: Flag::from_p(p, alpha),
                }
            })
            .collect());
    }

    let stats: Vec<f64> = treatments
        .iter()
        .zip(&means)
        .map(|(t, &m)| {
            let nj = t.values.len() as f64;
            (m - m0) / (s * (1.0 / nj + 1.0 / n0).sqrt())
        })
        .collect();

    let coeffs: Vec<(f64, f64)> = treatments
        .iter()
        .map(|t| {
            let nj = t.values.len() as f64;
            let scale = (1.0 / nj + 1.0 / n0).sqrt();
            (1.0 / (nj.sqrt() * scale), 1.0 / (n0.sqrt() * scale))
        })
        .collect();
    let chi = ChiSquared::new(dof as f64).map_err(|e| Error::InvalidStatInput(e.to_string()))?;
    let mut maxima: Vec<f64> = (0..mc_samples)
        .map(|_| {
            let z0 = rng.standard_normal();
            let mut best = f64::NEG_INFINITY;
            for &(a, b) in &coeffs {
                best = best.max(a * rng.standard_normal() - b * z0);
            }
            let scale = (chi.sample(rng) / dof as f64).sqrt();
            best / scale
        })
        .collect();
    maxima.sort_by(f64::total_cmp);

    Ok(treatments
        .iter()
        .zip(stats)
        .map(|(t, stat)| {
            let below = maxima.partition_point(|&m| m < stat);
            let p = (maxima.len() - below) as f64 / maxima.len() as f64;
            DunnettOutcome {
                label: t.label.clone(),
                statistic: stat,
                p_value: p,
                flag: Flag::from_p(p, alpha),
            }
        })
        .collect())
}

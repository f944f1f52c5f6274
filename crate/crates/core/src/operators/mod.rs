//! Variation and selection operators.
//!
//! Crossovers draw fresh random numbers per gene. AX, FX, BLX-α and PSOX
//! produce one child per call; SBX and Laplace produce two.

mod crossover;
mod mutation;
mod selection;

pub use crossover::*;
pub use mutation::*;
pub use selection::*;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CrossoverKind {
    #[serde(rename = "AX")]
    Ax,
    #[serde(rename = "FX")]
    Fx,
    #[serde(rename = "BLX", alias = "BLX-ALPHA", alias = "BLX-α")]
    BlxAlpha,
    #[serde(rename = "SBX")]
    Sbx,
    #[serde(rename = "LX", alias = "LAPLACE")]
    Laplace,
    #[serde(rename = "PSOX")]
    Psox,
}

impl CrossoverKind {
    pub const ALL: [CrossoverKind; 6] = [
        CrossoverKind::Ax,
        CrossoverKind::Fx,
        CrossoverKind::BlxAlpha,
        CrossoverKind::Sbx,
        CrossoverKind::Laplace,
        CrossoverKind::Psox,
    ];

    pub fn label(self) -> &'static str {
        match self {
            CrossoverKind::Ax => "AX",
            CrossoverKind::Fx => "FX",
            CrossoverKind::BlxAlpha => "BLX",
            CrossoverKind::Sbx => "SBX",
            CrossoverKind::Laplace => "LX",
            CrossoverKind::Psox => "PSOX",
        }
    }

    pub fn children_per_call(self) -> usize {
        match self {
            CrossoverKind::Sbx | CrossoverKind::Laplace => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CrossoverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for CrossoverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "AX" => Ok(CrossoverKind::Ax),
            "FX" => Ok(CrossoverKind::Fx),
            "BLX" | "BLX-ALPHA" | "BLX-Α" => Ok(CrossoverKind::BlxAlpha),
            "SBX" => Ok(CrossoverKind::Sbx),
            "LX" | "LAPLACE" => Ok(CrossoverKind::Laplace),
            "PSOX" => Ok(CrossoverKind::Psox),
            other => Err(Error::InvalidConfig(format!("unknown crossover `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CrossoverConfig {
    pub kind: CrossoverKind,
    pub ax_alpha: f64,
    pub blx_alpha: f64,
    pub sbx_eta: f64,
    pub laplace_a: f64,
    pub laplace_b: f64,
    pub psox_w: f64,
    pub psox_c1: f64,
    pub psox_c2: f64,
    /// Draw PSOX's `r1, r2` per gene (default) or once per child.
    pub psox_per_gene: bool,
    pub crossover_rate: f64,
}

impl Default for CrossoverConfig {
    fn default() -> Self {
        Self::new(CrossoverKind::Psox)
    }
}

impl CrossoverConfig {
    pub fn new(kind: CrossoverKind) -> Self {
        Self {
            kind,
            ax_alpha: 0.5,
            blx_alpha: 0.5,
            sbx_eta: 2.0,
            laplace_a: 0.0,
            // the literal b = 0 turns LX into cloning
            laplace_b: 0.15,
            psox_w: 0.6,
            psox_c1: 1.5,
            psox_c2: 1.5,
            psox_per_gene: true,
            crossover_rate: 0.8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return bad(format!(
                "crossover_rate {} outside [0, 1]",
                self.crossover_rate
            ));
        }
        if !(self.sbx_eta > 0.0) {
            return bad(format!("sbx_eta {} must be > 0", self.sbx_eta));
        }
        if !(self.blx_alpha > 0.0 && self.blx_alpha < 1.0) {
            return bad(format!("blx_alpha {} outside (0, 1)", self.blx_alpha));
        }
        if !(self.laplace_b >= 0.0) {
            return bad(format!("laplace_b {} must be >= 0", self.laplace_b));
        }
        let finite = [
            self.ax_alpha,
            self.laplace_a,
            self.psox_w,
            self.psox_c1,
            self.psox_c2,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("non-finite crossover parameter".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MutationKind {
    #[serde(rename = "NUM")]
    NonUniform,
    #[serde(rename = "GM")]
    Gaussian,
}

impl MutationKind {
    pub fn label(self) -> &'static str {
        match self {
            MutationKind::NonUniform => "NUM",
            MutationKind::Gaussian => "GM",
        }
    }
}

impl fmt::Display for MutationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for MutationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "NUM" => Ok(MutationKind::NonUniform),
            "GM" => Ok(MutationKind::Gaussian),
            other => Err(Error::InvalidConfig(format!("unknown mutation `{other}`"))),
        }
    }
}

/// What the mutation rate is a probability of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MutationScope {
    /// Each gene is mutated independently with probability `rate`.
    Gene,
    /// With probability `rate` the child is mutated on one uniformly chosen gene.
    Individual,
    /// With probability `rate` every gene of the child is mutated.
    IndividualAll,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MutationConfig {
    pub kind: MutationKind,
    pub scope: MutationScope,
    /// Mutation probability; see [`MutationScope`] for what it applies to.
    pub rate: f64,
    /// Gaussian std as a fraction of the gene's range.
    pub gm_sigma_fraction: f64,
    /// Non-uniform mutation annealing exponent.
    pub num_b: f64,
}

impl Default for MutationConfig {
    fn default() -> Self {
        Self::new(MutationKind::NonUniform)
    }
}

impl MutationConfig {
    pub fn new(kind: MutationKind) -> Self {
        Self {
            kind,
            scope: MutationScope::Individual,
            rate: 0.1,
            gm_sigma_fraction: 0.05,
            num_b: 5.0,
        }
    }

    pub fn with_rate(mut self, rate: f64) -> Self {
        self.rate = rate;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rate) {
            return Err(Error::InvalidConfig(format!(
                "mutation rate {} outside [0, 1]",
                self.rate
            )));
        }
        if !(self.gm_sigma_fraction > 0.0) || !self.gm_sigma_fraction.is_finite() {
            return Err(Error::InvalidConfig("gm_sigma_fraction must be > 0".into()));
        }
        if !(self.num_b > 0.0) || !self.num_b.is_finite() {
            return Err(Error::InvalidConfig("num_b must be > 0".into()));
        }
        Ok(())
    }
}

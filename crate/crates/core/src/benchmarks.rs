//! The fifteen continuous minimisation benchmarks and their registry.
//!
//! Problems are addressed by their numeric id (1-15) or by name. Dimension is
//! a free parameter; the reference experiments use `n = 30`.
//!
//! Registered optima differ from the usual textbook "origin" claim for the
//! problems whose minimiser is not at the origin: Levy-Montalvo 1 and
//! Generalized Penalized 1 are minimised at `x = -1` (so that `y = 1`),
//! Levy-Montalvo 2, Generalized Penalized 2 and Rosenbrock at `x = 1`.
//! Problem 12 is noisy; its registered optimum value is the *expected* value
//! `n / 2` at the origin.

use std::f64::consts::{E, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::space::{Bounds, RealVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Benchmark {
    Ackley,
    Exponential,
    Griewank,
    LevyMontalvo1,
    LevyMontalvo2,
    Rastrigin,
    Rosenbrock,
    Zakharov,
    Sphere,
    AxisParallelEllipsoid,
    Schwefel4,
    DeJongNoise,
    Cigar,
    GenPenalized1,
    GenPenalized2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Modality {
    Unimodal,
    Multimodal,
}

/// Everything the engine needs to know about one benchmark instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub problem: Benchmark,
    pub dimension: usize,
    pub bounds: Bounds,
    /// `None` means the location is not verified.
    pub optimum_location: Option<RealVector>,
    /// For the noisy problem this is the expected value at the optimum.
    pub optimum_value: f64,
    pub noisy: bool,
    pub modality: Modality,
}

impl ObjectiveSpec {
    pub fn evaluate(&self, x: &[f64], rng: &mut RngStream) -> Result<f64> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: x.len(),
            });
        }
        self.problem.evaluate(x, rng)
    }
}

/// Penalty term of the generalized penalized functions.
///
/// Symmetric and non-negative: `k (x - a)^m` above `a`, `k (-x - a)^m` below
/// `-a`, zero in between.
pub fn penalty_u(x: f64, a: f64, k: f64, m: f64) -> f64 {
    if x > a {
        k * (x - a).powf(m)
    } else if x < -a {
        k * (-x - a).powf(m)
    } else {
        0.0
    }
}

impl Benchmark {
    pub const ALL: [Benchmark; 15] = [
        Benchmark::Ackley,
        Benchmark::Exponential,
        Benchmark::Griewank,
        Benchmark::LevyMontalvo1,
        Benchmark::LevyMontalvo2,
        Benchmark::Rastrigin,
        Benchmark::Rosenbrock,
        Benchmark::Zakharov,
        Benchmark::Sphere,
        Benchmark::AxisParallelEllipsoid,
        Benchmark::Schwefel4,
        Benchmark::DeJongNoise,
        Benchmark::Cigar,
        Benchmark::GenPenalized1,
        Benchmark::GenPenalized2,
    ];

    pub fn from_id(id: u32) -> Result<Self> {
        match id {
            1..=15 => Ok(Self::ALL[(id - 1) as usize]),
            _ => Err(Error::UnknownProblem(id.to_string())),
        }
    }

    /// Lookup by id, full name or short key, case-insensitively.
    pub fn lookup(key: &str) -> Result<Self> {
        let key = key.trim();
        if let Ok(id) = key.parse::<u32>() {
            return Self::from_id(id);
        }
        let norm = key.to_ascii_lowercase();
        Self::ALL
            .iter()
            .copied()
            .find(|b| b.name().to_ascii_lowercase() == norm || b.key() == norm)
            .ok_or_else(|| Error::UnknownProblem(key.to_string()))
    }

    pub fn id(self) -> u32 {
        self as u32 + 1
    }

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::Ackley => "Ackley's Problem",
            Benchmark::Exponential => "Exponential Problem",
            Benchmark::Griewank => "Griewank Problem",
            Benchmark::LevyMontalvo1 => "Levy and Montalvo Problem 1",
            Benchmark::LevyMontalvo2 => "Levy and Montalvo Problem 2",
            Benchmark::Rastrigin => "Rastrigin Problem",
            Benchmark::Rosenbrock => "Rosenbrock Problem",
            Benchmark::Zakharov => "Zakharov's Function",
            Benchmark::Sphere => "Sphere Function",
            Benchmark::AxisParallelEllipsoid => "Axis Parallel Hyper Ellipsoid",
            Benchmark::Schwefel4 => "Schwefel Problem 4",
            Benchmark::DeJongNoise => "De-Jong's Function with Noise",
            Benchmark::Cigar => "Cigar Function",
            Benchmark::GenPenalized1 => "Generalized Penalized Function 1",
            Benchmark::GenPenalized2 => "Generalized Penalized Function 2",
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Benchmark::Ackley => "ackley",
            Benchmark::Exponential => "exponential",
            Benchmark::Griewank => "griewank",
            Benchmark::LevyMontalvo1 => "levy-montalvo-1",
            Benchmark::LevyMontalvo2 => "levy-montalvo-2",
            Benchmark::Rastrigin => "rastrigin",
            Benchmark::Rosenbrock => "rosenbrock",
            Benchmark::Zakharov => "zakharov",
            Benchmark::Sphere => "sphere",
            Benchmark::AxisParallelEllipsoid => "ellipsoid",
            Benchmark::Schwefel4 => "schwefel-4",
            Benchmark::DeJongNoise => "dejong-noise",
            Benchmark::Cigar => "cigar",
            Benchmark::GenPenalized1 => "penalized-1",
            Benchmark::GenPenalized2 => "penalized-2",
        }
    }

    /// Per-gene `(lower, upper)`.
    pub fn range(self) -> (f64, f64) {
        match self {
            Benchmark::Ackley | Benchmark::Rosenbrock => (-30.0, 30.0),
            Benchmark::Exponential => (-1.0, 1.0),
            Benchmark::Griewank => (-600.0, 600.0),
            Benchmark::LevyMontalvo1 | Benchmark::GenPenalized1 => (-10.0, 10.0),
            Benchmark::LevyMontalvo2 => (-5.0, 5.0),
            Benchmark::Rastrigin
            | Benchmark::Zakharov
            | Benchmark::Sphere
            | Benchmark::AxisParallelEllipsoid
            | Benchmark::GenPenalized2 => (-5.12, 5.12),
            Benchmark::Schwefel4 => (-100.0, 100.0),
            Benchmark::DeJongNoise | Benchmark::Cigar => (-10.0, 10.0),
        }
    }

    pub fn modality(self) -> Modality {
        match self {
            Benchmark::Ackley
            | Benchmark::Griewank
            | Benchmark::LevyMontalvo1
            | Benchmark::LevyMontalvo2
            | Benchmark::Rastrigin
            | Benchmark::GenPenalized1
            | Benchmark::GenPenalized2 => Modality::Multimodal,
            _ => Modality::Unimodal,
        }
    }

    pub fn is_noisy(self) -> bool {
        self == Benchmark::DeJongNoise
    }

    /// Problems whose formula couples `x_i` with `x_{i+1}`.
    pub fn min_dimension(self) -> usize {
        match self {
            Benchmark::LevyMontalvo1
            | Benchmark::LevyMontalvo2
            | Benchmark::Rosenbrock
            | Benchmark::GenPenalized1
            | Benchmark::GenPenalized2 => 2,
            _ => 1,
        }
    }

    fn optimum_gene(self) -> f64 {
        match self {
            Benchmark::LevyMontalvo1 | Benchmark::GenPenalized1 => -1.0,
            Benchmark::LevyMontalvo2 | Benchmark::GenPenalized2 | Benchmark::Rosenbrock => 1.0,
            _ => 0.0,
        }
    }

    pub fn spec(self, dimension: usize) -> Result<ObjectiveSpec> {
        if dimension < self.min_dimension() {
            return Err(Error::DimensionTooSmall {
                problem: self.id(),
                min: self.min_dimension(),
                found: dimension,
            });
        }
        let (lo, hi) = self.range();
        let optimum_value = match self {
            Benchmark::Exponential => -1.0,
            Benchmark::DeJongNoise => dimension as f64 / 2.0,
            _ => 0.0,
        };
        Ok(ObjectiveSpec {
            problem: self,
            dimension,
            bounds: Bounds::uniform(lo, hi, dimension)?,
            optimum_location: Some(RealVector::filled(self.optimum_gene(), dimension)),
            optimum_value,
            noisy: self.is_noisy(),
            modality: self.modality(),
        })
    }

    /// Objective value at `x`. Only problem 12 draws from `rng` (one uniform
    /// per gene per call); every other problem is a pure function of `x`.
    pub fn evaluate(self, x: &[f64], rng: &mut RngStream) -> Result<f64> {
        let n = x.len();
        if n < self.min_dimension() || n == 0 {
            return Err(Error::DimensionTooSmall {
                problem: self.id(),
                min: self.min_dimension().max(1),
                found: n,
            });
        }
        let nf = n as f64;
        let value = match self {
            Benchmark::Ackley => {
                let sq = x.iter().map(|v| v * v).sum::<f64>() / nf;
                let cs = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / nf;
                -20.0 * (-0.2 * sq.sqrt()).exp() - cs.exp() + 20.0 + E
            }
            Benchmark::Exponential => -(-0.5 * x.iter().map(|v| v * v).sum::<f64>()).exp(),
            Benchmark::Griewank => {
                let sum = x.iter().map(|v| v * v).sum::<f64>() / 4000.0;
                let prod = x
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos())
                    .product::<f64>();
                1.0 + sum - prod
            }
            Benchmark::LevyMontalvo1 => levy_montalvo_1(x),
            Benchmark::LevyMontalvo2 => levy_montalvo_2(x),
            Benchmark::Rastrigin => {
                10.0 * nf
                    + x.iter()
                        .map(|v| v * v - 10.0 * (2.0 * PI * v).cos())
                        .sum::<f64>()
            }
            Benchmark::Rosenbrock => x
                .windows(2)
                .map(|w| {
                    let a = w[1] - w[0] * w[0];
                    let b = w[0] - 1.0;
                    100.0 * a * a + b * b
                })
                .sum(),
            Benchmark::Zakharov => {
                let sq = x.iter().map(|v| v * v).sum::<f64>();
                let lin = x
                    .iter()
                    .enumerate()
                    .map(|(i, v)| 0.5 * (i + 1) as f64 * v)
                    .sum::<f64>();
                sq + lin.powi(2) + lin.powi(4)
            }
            Benchmark::Sphere => x.iter().map(|v| v * v).sum(),
            Benchmark::AxisParallelEllipsoid => x
                .iter()
                .enumerate()
                .map(|(i, v)| (i + 1) as f64 * v * v)
                .sum(),
            Benchmark::Schwefel4 => x.iter().fold(0.0f64, |m, v| m.max(v.abs())),
            Benchmark::DeJongNoise => x.iter().map(|v| v.powi(4) + rng.uniform()).sum(),
            Benchmark::Cigar => x[0] * x[0] + 1.0e7 * x[1..].iter().map(|v| v * v).sum::<f64>(),
            Benchmark::GenPenalized1 => levy_montalvo_1(x) + penalty_sum(x),
            Benchmark::GenPenalized2 => levy_montalvo_2(x) + penalty_sum(x),
        };
        Ok(value)
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}. {}", self.id(), self.name())
    }
}

/// Id-based convenience wrapper around [`Benchmark::evaluate`].
pub fn benchmark_eval(problem_id: u32, x: &[f64], rng: &mut RngStream) -> Result<f64> {
    Benchmark::from_id(problem_id)?.evaluate(x, rng)
}

pub fn benchmark_spec(problem_id: u32, dimension: usize) -> Result<ObjectiveSpec> {
    Benchmark::from_id(problem_id)?.spec(dimension)
}

fn sin2(v: f64) -> f64 {
    let s = v.sin();
    s * s
}

fn levy_montalvo_1(x: &[f64]) -> f64 {
    let n = x.len();
    let y = |i: usize| 1.0 + 0.25 * (x[i] + 1.0);
    let mut s = 10.0 * sin2(PI * y(0));
    for i in 0..n - 1 {
        let d = y(i) - 1.0;
        s += d * d * (1.0 + 10.0 * sin2(PI * y(i + 1)));
    }
    let d = y(n - 1) - 1.0;
    s += d * d;
    PI / n as f64 * s
}

fn levy_montalvo_2(x: &[f64]) -> f64 {
    let n = x.len();
    let mut s = 0.1 * sin2(3.0 * PI * x[0]);
    for i in 0..n - 1 {
        let d = x[i] - 1.0;
        s += d * d * (1.0 + sin2(3.0 * PI * x[i + 1]));
    }
    let d = x[n - 1] - 1.0;
    s + d * d * (1.0 + sin2(2.0 * PI * x[n - 1]))
}

fn penalty_sum(x: &[f64]) -> f64 {
    x.iter().map(|&v| penalty_u(v, 10.0, 100.0, 4.0)).sum()
}

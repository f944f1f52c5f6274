//! Experiment configuration files.
//!
//! A config is a TOML document (the bundled ones use a `.cfg` extension).
//! Top-level keys:
//!
//! | key               | default                 |
//! |-------------------|-------------------------|
//! | `name`            | required                |
//! | `scale`           | `"paper"`               |
//! | `problems`        | all 15 (ids or names)   |
//! | `dimension`       | 30                      |
//! | `population_size` | from `scale`            |
//! | `generations`     | from `scale`            |
//! | `runs`            | from `scale`            |
//! | `seed`            | 1                       |
//! | `alpha`           | 0.05                    |
//! | `output_dir`      | `results/<name>`        |
//! | `crossover_rate`  | 0.8                     |
//! | `selection_k`     | 3                       |
//! | `elitism`         | 1                       |
//! | `mc_samples`      | 100000                  |
//!
//! `scale = "paper"` means population 300, 1000 generations, 30 runs;
//! `scale = "desk"` means 100 / 300 / 10. Explicit keys override the preset,
//! and a scale forced from the command line overrides both.
//!
//! `[[operators]]` tables take `kind` (AX, FX, BLX, SBX, LX, PSOX) plus the
//! parameters that apply to it: `alpha` (AX, BLX), `eta` (SBX), `a`/`b` (LX),
//! `w`/`c1`/`c2`/`per_gene` (PSOX), and optionally `crossover_rate`.
//! Omitting `operators` selects all six with default parameters.
//!
//! `[[mutations]]` tables take `kind` (NUM, GM), `rate`, `scope`
//! (`gene`, `individual`, `individual-all`), `sigma_fraction` (GM) and `b`
//! (NUM). Omitting `mutations` selects NUM and GM with defaults.
//!
//! `[sweep]` configures the mutation-rate sweep: `rates` (required for the
//! `sweep` command), `problems` (default 4, 5, 7, 11), `population_size`
//! (100), `generations` (100), `runs` (top-level `runs`).
//!
//! Relative `output_dir` paths resolve against the working directory.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use psox_core::stats::{DEFAULT_MC_SAMPLES, MIN_MC_SAMPLES};
use psox_core::{
    Benchmark, CrossoverConfig, CrossoverKind, GaConfig, MutationConfig, MutationKind,
    MutationScope,
};
use serde::{Deserialize, Serialize};

use crate::error::{io_err, HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Paper,
    Desk,
}

impl Scale {
    /// `(population_size, generations, runs)`.
    pub fn preset(self) -> (usize, usize, usize) {
        match self {
            Scale::Paper => (300, 1000, 30),
            Scale::Desk => (100, 300, 10),
        }
    }
}

impl FromStr for Scale {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "paper" => Ok(Scale::Paper),
            "desk" => Ok(Scale::Desk),
            other => Err(format!("unknown scale `{other}` (expected paper or desk)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub rates: Vec<f64>,
    pub problems: Vec<Benchmark>,
    pub population_size: usize,
    pub generations: usize,
    pub runs: usize,
}

/// A validated experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub scale: Scale,
    pub problems: Vec<Benchmark>,
    pub dimension: usize,
    pub operators: Vec<CrossoverConfig>,
    pub mutations: Vec<MutationConfig>,
    pub population_size: usize,
    pub generations: usize,
    pub runs: usize,
    pub seed: u64,
    pub alpha: f64,
    pub output_dir: PathBuf,
    pub selection_k: usize,
    pub elitism: usize,
    pub mc_samples: usize,
    pub sweep: Option<SweepConfig>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Self::load_with(path, None)
    }

    /// Loads `path`; a `scale` given here replaces population size,
    /// generations and runs with that preset.
    pub fn load_with(path: &Path, scale: Option<Scale>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse(&text, path, scale)
    }

    /// `origin` is only used in diagnostics.
    pub fn parse(text: &str, origin: &Path, scale: Option<Scale>) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| HarnessError::ConfigParse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        raw.resolve(origin, scale)
    }

    /// Engine settings for one run.
    pub fn ga_config(
        &self,
        problem: Benchmark,
        operator: &CrossoverConfig,
        mutation: &MutationConfig,
        seed: u64,
    ) -> Result<GaConfig> {
        let mut ga = GaConfig::new(problem.spec(self.dimension)?, operator.kind, mutation.kind);
        ga.crossover = operator.clone();
        ga.mutation = mutation.clone();
        ga.population_size = self.population_size;
        ga.generations = self.generations;
        ga.selection_k = self.selection_k;
        ga.elitism = self.elitism;
        ga.seed = seed;
        Ok(ga)
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ProblemRef {
    Id(i64),
    Name(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: String,
    scale: Option<Scale>,
    problems: Option<Vec<ProblemRef>>,
    dimension: Option<usize>,
    population_size: Option<usize>,
    generations: Option<usize>,
    runs: Option<usize>,
    seed: Option<u64>,
    alpha: Option<f64>,
    output_dir: Option<PathBuf>,
    crossover_rate: Option<f64>,
    selection_k: Option<usize>,
    elitism: Option<usize>,
    mc_samples: Option<usize>,
    operators: Option<Vec<RawOperator>>,
    mutations: Option<Vec<RawMutation>>,
    sweep: Option<RawSweep>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOperator {
    kind: String,
    alpha: Option<f64>,
    eta: Option<f64>,
    a: Option<f64>,
    b: Option<f64>,
    w: Option<f64>,
    c1: Option<f64>,
    c2: Option<f64>,
    per_gene: Option<bool>,
    crossover_rate: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMutation {
    kind: String,
    rate: Option<f64>,
    scope: Option<MutationScope>,
    sigma_fraction: Option<f64>,
    b: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    rates: Vec<f64>,
    problems: Option<Vec<ProblemRef>>,
    population_size: Option<usize>,
    generations: Option<usize>,
    runs: Option<usize>,
}

struct Ctx<'a> {
    origin: &'a Path,
}

impl Ctx<'_> {
    fn err(&self, field: impl Into<String>, message: impl Into<String>) -> HarnessError {
        HarnessError::ConfigField {
            path: self.origin.to_path_buf(),
            field: field.into(),
            message: message.into(),
        }
    }

    fn problems(&self, field: &str, refs: &[ProblemRef], dim: usize) -> Result<Vec<Benchmark>> {
        if refs.is_empty() {
            return Err(self.err(field, "must list at least one problem"));
        }
        let mut out = Vec::with_capacity(refs.len());
        for (i, r) in refs.iter().enumerate() {
            let at = format!("{field}[{i}]");
            let b = match r {
                ProblemRef::Id(id) => u32::try_from(*id)
                    .ok()
                    .and_then(|id| Benchmark::from_id(id).ok())
                    .ok_or_else(|| {
                        self.err(&at, format!("unknown problem id {id} (valid: 1-15)"))
                    })?,
                ProblemRef::Name(name) => Benchmark::lookup(name)
                    .map_err(|_| self.err(&at, format!("unknown problem `{name}`")))?,
            };
            if dim < b.min_dimension() {
                return Err(self.err(
                    &at,
                    format!(
                        "problem {} needs dimension >= {}",
                        b.id(),
                        b.min_dimension()
                    ),
                ));
            }
            if out.contains(&b) {
                return Err(self.err(&at, format!("problem {} listed twice", b.id())));
            }
            out.push(b);
        }
        Ok(out)
    }
}

fn probability(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

impl RawOperator {
    fn resolve(&self, ctx: &Ctx, at: &str, default_rate: f64) -> Result<CrossoverConfig> {
        let kind = CrossoverKind::from_str(&self.kind)
            .map_err(|e| ctx.err(format!("{at}.kind"), e.to_string()))?;
        let mut c = CrossoverConfig::new(kind);
        c.crossover_rate = self.crossover_rate.unwrap_or(default_rate);

        let reject = |name: &str, present: bool| -> Result<()> {
            if present {
                Err(ctx.err(format!("{at}.{name}"), format!("not a parameter of {kind}")))
            } else {
                Ok(())
            }
        };
        let is = |k: CrossoverKind| kind == k;
        reject(
            "alpha",
            self.alpha.is_some() && !(is(CrossoverKind::Ax) || is(CrossoverKind::BlxAlpha)),
        )?;
        reject("eta", self.eta.is_some() && !is(CrossoverKind::Sbx))?;
        reject("a", self.a.is_some() && !is(CrossoverKind::Laplace))?;
        reject("b", self.b.is_some() && !is(CrossoverKind::Laplace))?;
        let psox_only =
            self.w.is_some() || self.c1.is_some() || self.c2.is_some() || self.per_gene.is_some();
        if psox_only && !is(CrossoverKind::Psox) {
            let name = [
                ("w", self.w.is_some()),
                ("c1", self.c1.is_some()),
                ("c2", self.c2.is_some()),
            ]
            .iter()
            .find(|(_, p)| *p)
            .map_or("per_gene", |(n, _)| *n);
            reject(name, true)?;
        }

        if let Some(v) = self.alpha {
            match kind {
                CrossoverKind::Ax => c.ax_alpha = v,
                _ => c.blx_alpha = v,
            }
        }
        if let Some(v) = self.eta {
            c.sbx_eta = v;
        }
        if let Some(v) = self.a {
            c.laplace_a = v;
        }
        if let Some(v) = self.b {
            c.laplace_b = v;
        }
        if let Some(v) = self.w {
            c.psox_w = v;
        }
        if let Some(v) = self.c1 {
            c.psox_c1 = v;
        }
        if let Some(v) = self.c2 {
            c.psox_c2 = v;
        }
        if let Some(v) = self.per_gene {
            c.psox_per_gene = v;
        }
        c.validate().map_err(|e| ctx.err(at, e.to_string()))?;
        Ok(c)
    }
}

impl RawMutation {
    fn resolve(&self, ctx: &Ctx, at: &str) -> Result<MutationConfig> {
        let kind = MutationKind::from_str(&self.kind)
            .map_err(|e| ctx.err(format!("{at}.kind"), e.to_string()))?;
        let mut m = MutationConfig::new(kind);
        if let Some(r) = self.rate {
            if !probability(r) {
                return Err(ctx.err(format!("{at}.rate"), format!("{r} outside [0, 1]")));
            }
            m.rate = r;
        }
        if let Some(s) = self.scope {
            m.scope = s;
        }
        if let Some(v) = self.sigma_fraction {
            if kind != MutationKind::Gaussian {
                return Err(ctx.err(format!("{at}.sigma_fraction"), "only applies to GM"));
            }
            m.gm_sigma_fraction = v;
        }
        if let Some(v) = self.b {
            if kind != MutationKind::NonUniform {
                return Err(ctx.err(format!("{at}.b"), "only applies to NUM"));
            }
            m.num_b = v;
        }
        m.validate().map_err(|e| ctx.err(at, e.to_string()))?;
        Ok(m)
    }
}

impl RawConfig {
    fn resolve(self, origin: &Path, forced: Option<Scale>) -> Result<ExperimentConfig> {
        let ctx = Ctx { origin };
        let name = self.name.trim().to_string();
        if name.is_empty() {
            return Err(ctx.err("name", "must not be empty"));
        }
        let scale = forced.or(self.scale).unwrap_or(Scale::Paper);
        let (mut pop, mut gens, mut runs) = scale.preset();
        if forced.is_none() {
            pop = self.population_size.unwrap_or(pop);
            gens = self.generations.unwrap_or(gens);
            runs = self.runs.unwrap_or(runs);
        }
        if runs == 0 {
            return Err(ctx.err("runs", "must be >= 1"));
        }
        if pop < 2 {
            return Err(ctx.err("population_size", "must be >= 2"));
        }

        let dimension = self.dimension.unwrap_or(30);
        if dimension == 0 {
            return Err(ctx.err("dimension", "must be >= 1"));
        }
        let problems = match &self.problems {
            Some(refs) => ctx.problems("problems", refs, dimension)?,
            None => Benchmark::ALL.to_vec(),
        };

        let alpha = self.alpha.unwrap_or(0.05);
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(ctx.err("alpha", format!("{alpha} outside (0, 1)")));
        }
        let crossover_rate = self.crossover_rate.unwrap_or(0.8);
        if !probability(crossover_rate) {
            return Err(ctx.err("crossover_rate", format!("{crossover_rate} outside [0, 1]")));
        }
        let selection_k = self.selection_k.unwrap_or(3);
        if selection_k == 0 {
            return Err(ctx.err("selection_k", "must be >= 1"));
        }
        let elitism = self.elitism.unwrap_or(1);
        if elitism >= pop {
            return Err(ctx.err("elitism", "must be smaller than population_size"));
        }
        let mc_samples = self.mc_samples.unwrap_or(DEFAULT_MC_SAMPLES);
        if mc_samples < MIN_MC_SAMPLES {
            return Err(ctx.err("mc_samples", format!("must be >= {MIN_MC_SAMPLES}")));
        }

        let operators = match &self.operators {
            None => CrossoverKind::ALL
                .iter()
                .map(|&k| {
                    let mut c = CrossoverConfig::new(k);
                    c.crossover_rate = crossover_rate;
                    c
                })
                .collect(),
            Some(list) if list.is_empty() => {
                return Err(ctx.err("operators", "must list at least one operator"))
            }
            Some(list) => {
                let mut seen = HashSet::new();
                let mut out = Vec::with_capacity(list.len());
                for (i, op) in list.iter().enumerate() {
                    let at = format!("operators[{i}]");
                    let c = op.resolve(&ctx, &at, crossover_rate)?;
                    if !seen.insert(c.kind) {
                        return Err(ctx.err(at, format!("operator {} listed twice", c.kind)));
                    }
                    out.push(c);
                }
                out
            }
        };

        let mutations = match &self.mutations {
            None => vec![
                MutationConfig::new(MutationKind::NonUniform),
                MutationConfig::new(MutationKind::Gaussian),
            ],
            Some(list) if list.is_empty() => {
                return Err(ctx.err("mutations", "must list at least one mutation"))
            }
            Some(list) => {
                let mut seen = HashSet::new();
                let mut out = Vec::with_capacity(list.len());
                for (i, m) in list.iter().enumerate() {
                    let at = format!("mutations[{i}]");
                    let m = m.resolve(&ctx, &at)?;
                    if !seen.insert(m.kind) {
                        return Err(ctx.err(at, format!("mutation {} listed twice", m.kind)));
                    }
                    out.push(m);
                }
                out
            }
        };

        let sweep = match &self.sweep {
            None => None,
            Some(s) => {
                if s.rates.is_empty() {
                    return Err(ctx.err("sweep.rates", "must list at least one rate"));
                }
                for (i, r) in s.rates.iter().enumerate() {
                    if !probability(*r) {
                        return Err(
                            ctx.err(format!("sweep.rates[{i}]"), format!("{r} outside [0, 1]"))
                        );
                    }
                }
                let problems = match &s.problems {
                    Some(refs) => ctx.problems("sweep.problems", refs, dimension)?,
                    None => [4, 5, 7, 11]
                        .iter()
                        .map(|&id| Benchmark::from_id(id).expect("valid id"))
                        .collect(),
                };
                let sp = s.population_size.unwrap_or(100);
                if sp < 2 || elitism >= sp {
                    return Err(ctx.err("sweep.population_size", "must be >= 2 and exceed elitism"));
                }
                let sr = s.runs.unwrap_or(runs);
                if sr == 0 {
                    return Err(ctx.err("sweep.runs", "must be >= 1"));
                }
                Some(SweepConfig {
                    rates: s.rates.clone(),
                    problems,
                    population_size: sp,
                    generations: s.generations.unwrap_or(100),
                    runs: sr,
                })
            }
        };

        let output_dir = self
            .output_dir
            .unwrap_or_else(|| PathBuf::from("results").join(&name));

        Ok(ExperimentConfig {
            name,
            scale,
            problems,
            dimension,
            operators,
            mutations,
            population_size: pop,
            generations: gens,
            runs,
            seed: self.seed.unwrap_or(1),
            alpha,
            output_dir,
            selection_k,
            elitism,
            mc_samples,
            sweep,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::parse(text, Path::new("test.cfg"), None)
    }

    fn field_of(e: HarnessError) -> String {
        match e {
            HarnessError::ConfigField { field, .. } => field,
            other => panic!("expected a field error, got {other}"),
        }
    }

    #[test]
    fn minimal_config_takes_full_scale_defaults() {
        let c = parse("name = \"x\"").unwrap();
        assert_eq!((c.population_size, c.generations, c.runs), (300, 1000, 30));
        assert_eq!(c.problems.len(), 15);
        assert_eq!(c.operators.len(), 6);
        assert_eq!(c.mutations.len(), 2);
        assert_eq!(c.output_dir, PathBuf::from("results/x"));
        assert!(c.operators.iter().all(|o| o.crossover_rate == 0.8));
        assert!(c.sweep.is_none());
    }

    #[test]
    fn desk_preset_and_overrides() {
        let c = parse("name = \"x\"\nscale = \"desk\"\nruns = 3").unwrap();
        assert_eq!((c.population_size, c.generations, c.runs), (100, 300, 3));
        let forced = ExperimentConfig::parse(
            "name = \"x\"\nruns = 3\ngenerations = 7",
            Path::new("t"),
            Some(Scale::Desk),
        )
        .unwrap();
        assert_eq!(
            (forced.population_size, forced.generations, forced.runs),
            (100, 300, 10)
        );
    }

    #[test]
    fn operator_parameters_land_in_the_right_fields() {
        let c = parse(
            r#"
name = "ops"
crossover_rate = 0.6
[[operators]]
kind = "AX"
alpha = 0.3
[[operators]]
kind = "blx-alpha"
alpha = 0.25
[[operators]]
kind = "LX"
b = 0.0
[[operators]]
kind = "PSOX"
w = 1.0
c1 = 0.0
c2 = 0.0
crossover_rate = 1.0
"#,
        )
        .unwrap();
        assert_eq!(c.operators[0].ax_alpha, 0.3);
        assert_eq!(c.operators[1].blx_alpha, 0.25);
        assert_eq!(c.operators[2].laplace_b, 0.0);
        assert_eq!(c.operators[0].crossover_rate, 0.6);
        let p = &c.operators[3];
        assert_eq!(
            (p.psox_w, p.psox_c1, p.psox_c2, p.crossover_rate),
            (1.0, 0.0, 0.0, 1.0)
        );
    }

    #[test]
    fn mutation_tables() {
        let c = parse(
            "name = \"m\"\n[[mutations]]\nkind = \"GM\"\nrate = 0.4\nscope = \"gene\"\nsigma_fraction = 0.1\n",
        )
        .unwrap();
        assert_eq!(c.mutations.len(), 1);
        let m = &c.mutations[0];
        assert_eq!(
            (m.kind, m.rate, m.scope, m.gm_sigma_fraction),
            (MutationKind::Gaussian, 0.4, MutationScope::Gene, 0.1)
        );
    }

    #[test]
    fn problems_by_id_or_name() {
        let c =
            parse("name = \"p\"\nproblems = [9, \"rastrigin\", \"Schwefel Problem 4\"]").unwrap();
        let ids: Vec<u32> = c.problems.iter().map(|b| b.id()).collect();
        assert_eq!(ids, vec![9, 6, 11]);
    }

    #[test]
    fn diagnostics_name_the_field() {
        let cases = [
            ("name = \"x\"\nruns = 0", "runs"),
            ("name = \"x\"\nproblems = [3, 16]", "problems[1]"),
            ("name = \"x\"\nproblems = [\"nope\"]", "problems[0]"),
            ("name = \"x\"\ndimension = 1\nproblems = [7]", "problems[0]"),
            ("name = \"x\"\nalpha = 1.5", "alpha"),
            ("name = \"x\"\n[[operators]]\nkind = \"QX\"", "operators[0].kind"),
            ("name = \"x\"\n[[operators]]\nkind = \"AX\"\n[[operators]]\nkind = \"SBX\"\neta = -1.0", "operators[1]"),
            ("name = \"x\"\n[[operators]]\nkind = \"AX\"\neta = 2.0", "operators[0].eta"),
            ("name = \"x\"\n[[operators]]\nkind = \"SBX\"\nw = 2.0", "operators[0].w"),
            ("name = \"x\"\n[[operators]]\nkind = \"AX\"\n[[operators]]\nkind = \"ax\"", "operators[1]"),
            ("name = \"x\"\n[[mutations]]\nkind = \"GM\"\nrate = 2.0", "mutations[0].rate"),
            ("name = \"x\"\n[[mutations]]\nkind = \"NUM\"\nsigma_fraction = 0.1", "mutations[0].sigma_fraction"),
            ("name = \"x\"\nmc_samples = 10", "mc_samples"),
            ("name = \"x\"\n[sweep]\nrates = [0.1, 1.5]", "sweep.rates[1]"),
            ("name = \"x\"\npopulation_size = 5\nelitism = 5", "elitism"),
        ];
        for (text, field) in cases {
            assert_eq!(field_of(parse(text).unwrap_err()), field, "{text}");
        }
    }

    #[test]
    fn syntax_and_unknown_keys_are_parse_errors() {
        assert!(matches!(
            parse("name = "),
            Err(HarnessError::ConfigParse { .. })
        ));
        let e = parse("name = \"x\"\npopulation = 4").unwrap_err();
        assert!(matches!(e, HarnessError::ConfigParse { .. }));
        assert!(e.to_string().contains("population"), "{e}");
        assert!(matches!(
            parse("runs = 3"),
            Err(HarnessError::ConfigParse { .. })
        ));
    }

    #[test]
    fn sweep_defaults() {
        let c = parse("name = \"s\"\nruns = 4\n[sweep]\nrates = [0.1, 1.0]").unwrap();
        let s = c.sweep.unwrap();
        let ids: Vec<u32> = s.problems.iter().map(|b| b.id()).collect();
        assert_eq!(ids, vec![4, 5, 7, 11]);
        assert_eq!((s.population_size, s.generations, s.runs), (100, 100, 4));
    }

    #[test]
    fn ga_config_carries_settings() {
        let c = parse("name = \"g\"\ndimension = 5\npopulation_size = 12\ngenerations = 3\nselection_k = 2\nelitism = 0").unwrap();
        let ga = c
            .ga_config(Benchmark::Sphere, &c.operators[5], &c.mutations[1], 99)
            .unwrap();
        assert_eq!(ga.objective.dimension, 5);
        assert_eq!(
            (
                ga.population_size,
                ga.generations,
                ga.selection_k,
                ga.elitism,
                ga.seed
            ),
            (12, 3, 2, 0, 99)
        );
        assert_eq!(ga.crossover.kind, CrossoverKind::Psox);
        assert_eq!(ga.mutation.kind, MutationKind::Gaussian);
    }
}

use crate::error::Result;
use crate::operators::{MutationConfig, MutationScope};
use crate::rng::RngStream;
use crate::space::{Bounds, RealVector};

/// Genes selected for mutation under the configured scope.
fn pick_genes(dim: usize, cfg: &MutationConfig, rng: &mut RngStream) -> Vec<usize> {
    match cfg.scope {
        MutationScope::Gene => (0..dim).filter(|_| rng.uniform() < cfg.rate).collect(),
        MutationScope::Individual => {
            if rng.uniform() < cfg.rate {
                vec![rng.index(dim)]
            } else {
                vec![]
            }
        }
        MutationScope::IndividualAll => {
            if rng.uniform() < cfg.rate {
                (0..dim).collect()
            } else {
                vec![]
            }
        }
    }
}

/// Adds `N(0, (σ_frac · range)²)` to the genes picked by the mutation scope,
/// then clamps.
pub fn gaussian_mutation(
    x: &RealVector,
    bounds: &Bounds,
    cfg: &MutationConfig,
    rng: &mut RngStream,
) -> Result<RealVector> {
    let mut out = x.clone();
    bounds.clamp_in_place(&mut out)?;
    for k in pick_genes(out.dim(), cfg, rng) {
        out[k] += cfg.gm_sigma_fraction * bounds.range(k) * rng.standard_normal();
    }
    bounds.clamp_in_place(&mut out)?;
    Ok(out)
}

/// Michalewicz-style non-uniform mutation. The step toward a bound shrinks as
/// `gen` approaches `max_gen`:
/// `Δ(y) = y (1 - r^((1 - gen/max_gen)^b))`.
pub fn nonuniform_mutation(
    x: &RealVector,
    bounds: &Bounds,
    gen: usize,
    max_gen: usize,
    cfg: &MutationConfig,
    rng: &mut RngStream,
) -> Result<RealVector> {
    let mut out = x.clone();
    bounds.clamp_in_place(&mut out)?;
    let progress = if max_gen == 0 {
        1.0
    } else {
        (gen.min(max_gen) as f64) / max_gen as f64
    };
    let exponent = (1.0 - progress).powf(cfg.num_b);
    for k in pick_genes(out.dim(), cfg, rng) {
        let up = rng.coin();
        let r = rng.uniform();
        let shrink = 1.0 - r.powf(exponent);
        out[k] = if up {
            out[k] + (bounds.upper()[k] - out[k]) * shrink
        } else {
            out[k] - (out[k] - bounds.lower()[k]) * shrink
        };
    }
    bounds.clamp_in_place(&mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::MutationKind;
    use proptest::prelude::*;

    #[test]
    fn zero_rate_is_noop() {
        let b = Bounds::uniform(-1.0, 1.0, 6).unwrap();
        let x = RealVector::new(vec![0.1, -0.2, 0.3, 0.9, -1.0, 1.0]);
        let mut rng = RngStream::from_seed(0);
        let gm = MutationConfig::new(MutationKind::Gaussian).with_rate(0.0);
        let num = MutationConfig::new(MutationKind::NonUniform).with_rate(0.0);
        assert_eq!(gaussian_mutation(&x, &b, &gm, &mut rng).unwrap(), x);
        assert_eq!(
            nonuniform_mutation(&x, &b, 0, 100, &num, &mut rng).unwrap(),
            x
        );
    }

    #[test]
    fn gaussian_std_matches_sigma() {
        // Gene range 2, σ fraction 0.1 ⇒ σ = 0.2. Clamping at ±1 is a 5σ event.
        let b = Bounds::uniform(-1.0, 1.0, 1).unwrap();
        let mut cfg = MutationConfig::new(MutationKind::Gaussian).with_rate(1.0);
        cfg.gm_sigma_fraction = 0.1;
        let mut rng = RngStream::from_seed(12);
        let x = RealVector::zeros(1);
        let n = 100_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let g = gaussian_mutation(&x, &b, &cfg, &mut rng).unwrap()[0];
            s += g;
            s2 += g * g;
        }
        let mean = s / n as f64;
        let sd = ((s2 - n as f64 * mean * mean) / (n - 1) as f64).sqrt();
        assert!((sd - 0.2).abs() < 0.05 * 0.2, "sd = {sd}");
    }

    #[test]
    fn nonuniform_final_generation_is_identity() {
        let b = Bounds::uniform(-5.0, 5.0, 10).unwrap();
        let cfg = MutationConfig::new(MutationKind::NonUniform).with_rate(1.0);
        let mut rng = RngStream::from_seed(5);
        let x = RealVector::new((0..10).map(|i| i as f64 * 0.7 - 3.0).collect());
        assert_eq!(
            nonuniform_mutation(&x, &b, 50, 50, &cfg, &mut rng).unwrap(),
            x
        );
    }

    #[test]
    fn nonuniform_anneals() {
        let b = Bounds::uniform(-5.0, 5.0, 1).unwrap();
        let cfg = MutationConfig::new(MutationKind::NonUniform).with_rate(1.0);
        let mut rng = RngStream::from_seed(6);
        let x = RealVector::zeros(1);
        let mean_step = |gen: usize, rng: &mut RngStream| {
            (0..10_000)
                .map(|_| nonuniform_mutation(&x, &b, gen, 100, &cfg, rng).unwrap()[0].abs())
                .sum::<f64>()
                / 10_000.0
        };
        let early = mean_step(0, &mut rng);
        let late = mean_step(90, &mut rng);
        assert!(early > late, "early {early} late {late}");
    }

    #[test]
    fn scopes_pick_expected_gene_counts() {
        let b = Bounds::uniform(-1.0, 1.0, 20).unwrap();
        let x = RealVector::zeros(20);
        let mut rng = RngStream::from_seed(44);
        let changed = |y: &RealVector| y.iter().filter(|g| **g != 0.0).count();

        let mut cfg = MutationConfig::new(MutationKind::Gaussian).with_rate(1.0);
        cfg.scope = MutationScope::Individual;
        for _ in 0..100 {
            assert_eq!(
                changed(&gaussian_mutation(&x, &b, &cfg, &mut rng).unwrap()),
                1
            );
        }
        cfg.scope = MutationScope::IndividualAll;
        assert_eq!(
            changed(&gaussian_mutation(&x, &b, &cfg, &mut rng).unwrap()),
            20
        );

        // per-gene at 0.1: ~2 of 20 genes on average
        cfg.scope = MutationScope::Gene;
        cfg.rate = 0.1;
        let total: usize = (0..2000)
            .map(|_| changed(&gaussian_mutation(&x, &b, &cfg, &mut rng).unwrap()))
            .sum();
        let avg = total as f64 / 2000.0;
        assert!((avg - 2.0).abs() < 0.15, "{avg}");

        // per-individual at 0.1: ~10% of calls touch anything
        cfg.scope = MutationScope::Individual;
        let hits = (0..10_000)
            .filter(|_| changed(&gaussian_mutation(&x, &b, &cfg, &mut rng).unwrap()) > 0)
            .count();
        assert!((hits as f64 / 10_000.0 - 0.1).abs() < 0.01);
    }

    proptest! {
        #[test]
        fn mutations_stay_in_bounds(seed in any::<u64>(), rate in 0.0f64..=1.0, gen in 0usize..=20, genes in prop::collection::vec(-3.0f64..3.0, 1..12)) {
            let b = Bounds::uniform(-3.0, 3.0, genes.len()).unwrap();
            let x = RealVector::new(genes);
            let mut rng = RngStream::from_seed(seed);
            for scope in [MutationScope::Gene, MutationScope::Individual, MutationScope::IndividualAll] {
                let mut gm = MutationConfig::new(MutationKind::Gaussian).with_rate(rate);
                gm.gm_sigma_fraction = 2.0;
                gm.scope = scope;
                let mut num = MutationConfig::new(MutationKind::NonUniform).with_rate(rate);
                num.scope = scope;
                prop_assert!(b.contains(&gaussian_mutation(&x, &b, &gm, &mut rng).unwrap()));
                prop_assert!(b.contains(&nonuniform_mutation(&x, &b, gen, 20, &num, &mut rng).unwrap()));
            }
        }
    }
}

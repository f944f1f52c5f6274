//! Kruskal-Wallis H test with tie correction.
//!
//! The p-value is the chi-square (k - 1 df) upper tail, except when some group
//! has fewer than five observations and the number of distinct group
//! assignments is small enough to enumerate. Then the exact permutation p is
//! reported, since the chi-square approximation is poor there (3 groups of 3
//! at the maximal H = 7.2: chi-square 0.0273, exact 6/1680 ≈ 0.0036). The
//! asymptotic p is always returned alongside.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{rank_with_ties, Flag, SampleGroup};
use crate::error::{Error, Result};

const SMALL_GROUP: usize = 5;
const MAX_EXACT_ASSIGNMENTS: f64 = 2.0e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PValueMethod {
    ChiSquare,
    Exact,
    /// All values identical; H is defined as 0.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KruskalWallis {
    pub h: f64,
    pub p_value: f64,
    pub p_asymptotic: f64,
    pub method: PValueMethod,
    pub flag: Flag,
}

pub fn kruskal_wallis(groups: &[SampleGroup], alpha: f64) -> Result<KruskalWallis> {
    if groups.len() < 2 {
        return Err(Error::InvalidStatInput(
            "Kruskal-Wallis needs at least two groups".into(),
        ));
    }
    for g in groups {
        g.check(2)?;
    }
    let pooled: Vec<f64> = groups
        .iter()
        .flat_map(|g| g.values.iter().copied())
        .collect();
    let n = pooled.len() as f64;
    let ranks = rank_with_ties(&pooled);
    let sizes: Vec<usize> = groups.iter().map(|g| g.values.len()).collect();

    let correction = 1.0 - tie_sum(&pooled) / (n * n * n - n);
    if correction <= 0.0 {
        return Ok(KruskalWallis {
            h: 0.0,
            p_value: 1.0,
            p_asymptotic: 1.0,
            method: PValueMethod::Degenerate,
            flag: Flag::NotSignificant,
        });
    }

    let stat = |ranks: &[f64]| -> f64 {
        let mut off = 0;
        let mut s = 0.0;
        for &m in &sizes {
            let r: f64 = ranks[off..off + m].iter().sum();
            s += r * r / m as f64;
            off += m;
        }
        s
    };
    let observed = stat(&ranks);
    let h = ((12.0 / (n * (n + 1.0)) * observed - 3.0 * (n + 1.0)) / correction).max(0.0);

    let df = (groups.len() - 1) as f64;
    let p_asymptotic = ChiSquared::new(df)
        .map_err(|e| Error::InvalidStatInput(e.to_string()))?
        .sf(h)
        .clamp(0.0, 1.0);

    let small = sizes.iter().any(|&m| m < SMALL_GROUP);
    let (p_value, method) = if small && multinomial(&sizes) <= MAX_EXACT_ASSIGNMENTS {
        (exact_p(&ranks, &sizes, observed), PValueMethod::Exact)
    } else {
        (p_asymptotic, PValueMethod::ChiSquare)
    };

    Ok(KruskalWallis {
        h,
        p_value,
        p_asymptotic,
        method,
        flag: Flag::from_p(p_value, alpha),
    })
}

fn tie_sum(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut total = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        total += t * t * t - t;
        i = j;
    }
    total
}

fn multinomial(sizes: &[usize]) -> f64 {
    let mut total = 0usize;
    let mut out = 1.0f64;
    for &m in sizes {
        for i in 1..=m {
            total += 1;
            out = out * total as f64 / i as f64;
        }
    }
    out
}

/// Fraction of all equally likely assignments of the pooled ranks to groups
/// (with the observed sizes) whose `Σ R_j² / n_j` reaches the observed value.
fn exact_p(ranks: &[f64], sizes: &[usize], observed: f64) -> f64 {
    struct Walk<'a> {
        ranks: &'a [f64],
        sizes: &'a [usize],
        remaining: Vec<usize>,
        sums: Vec<f64>,
        threshold: f64,
        hits: f64,
        total: f64,
    }

    impl Walk<'_> {
        fn go(&mut self, idx: usize) {
            if idx == self.ranks.len() {
                let s: f64 = self
                    .sums
                    .iter()
                    .zip(self.sizes)
                    .map(|(r, &m)| r * r / m as f64)
                    .sum();
                self.total += 1.0;
                if s >= self.threshold {
                    self.hits += 1.0;
                }
                return;
            }
            for g in 0..self.sizes.len() {
                if self.remaining[g] > 0 {
                    self.remaining[g] -= 1;
                    self.sums[g] += self.ranks[idx];
                    self.go(idx + 1);
                    self.sums[g] -= self.ranks[idx];
                    self.remaining[g] += 1;
                }
            }
        }
    }

    let mut walk = Walk {
        ranks,
        sizes,
        remaining: sizes.to_vec(),
        sums: vec![0.0; sizes.len()],
        threshold: observed - 1e-9 * observed.abs().max(1.0),
        hits: 0.0,
        total: 0.0,
    };
    walk.go(0);
    walk.hits / walk.total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use proptest::prelude::*;

    fn groups(data: &[&[f64]]) -> Vec<SampleGroup> {
        data.iter()
            .enumerate()
            .map(|(i, v)| SampleGroup::new(format!("g{i}"), v.to_vec()))
            .collect()
    }

    #[test]
    fn separated_groups() {
        let g = groups(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], &[7.0, 8.0, 9.0]]);
        let kw = kruskal_wallis(&g, 0.05).unwrap();
        assert!((kw.h - 7.2).abs() < 1e-9);
        // chi-square with 2 df: exp(-H/2)
        assert!((kw.p_asymptotic - (-3.6f64).exp()).abs() < 1e-12);
        assert!((kw.p_asymptotic - 0.0273).abs() < 1e-4);
        assert_eq!(kw.method, PValueMethod::Exact);
        assert!((kw.p_value - 6.0 / 1680.0).abs() < 1e-12);
        assert_eq!(kw.flag, Flag::Significant);
    }

    #[test]
    fn identical_groups_degenerate() {
        let g = groups(&[&[5.0; 3], &[5.0; 3], &[5.0; 3]]);
        let kw = kruskal_wallis(&g, 0.05).unwrap();
        assert_eq!((kw.h, kw.p_value), (0.0, 1.0));
        assert_eq!(kw.flag, Flag::NotSignificant);
    }

    #[test]
    fn input_validation() {
        assert!(kruskal_wallis(&groups(&[&[1.0, 2.0]]), 0.05).is_err());
        assert!(kruskal_wallis(&groups(&[&[1.0, 2.0], &[3.0]]), 0.05).is_err());
        assert!(kruskal_wallis(&groups(&[&[1.0, f64::NAN], &[3.0, 4.0]]), 0.05).is_err());
    }

    #[test]
    fn tie_correction_matches_hand_value() {
        let g = groups(&[&[1.0, 1.0, 2.0, 4.0, 5.0], &[2.0, 3.0, 3.0, 6.0, 7.0]]);
        let kw = kruskal_wallis(&g, 0.05).unwrap();
        // ranks: 1,1 -> 1.5 ; 2,2 -> 3.5 ; 3,3 -> 5.5 ; 4 -> 7 ; 5 -> 8 ; 6 -> 9 ; 7 -> 10
        // R1 = 1.5+1.5+3.5+7+8 = 21.5, R2 = 3.5+5.5+5.5+9+10 = 33.5
        let n = 10.0;
        let raw = 12.0 / (n * (n + 1.0)) * (21.5f64.powi(2) / 5.0 + 33.5f64.powi(2) / 5.0)
            - 3.0 * (n + 1.0);
        let c = 1.0 - 3.0 * 6.0 / (n * n * n - n);
        assert!((kw.h - raw / c).abs() < 1e-12);
        assert_eq!(kw.method, PValueMethod::ChiSquare);
    }

    #[test]
    fn null_calibration() {
        let mut rng = RngStream::from_seed(77);
        let mut quiet = 0;
        for _ in 0..100 {
            let a: Vec<f64> = (0..30).map(|_| rng.standard_normal()).collect();
            let b: Vec<f64> = (0..30).map(|_| rng.standard_normal()).collect();
            let g = vec![SampleGroup::new("a", a), SampleGroup::new("b", b)];
            if kruskal_wallis(&g, 0.05).unwrap().flag == Flag::NotSignificant {
                quiet += 1;
            }
        }
        assert!(quiet >= 90, "{quiet}");
    }

    proptest! {
        #[test]
        fn rank_invariance_and_ranges(seed in any::<u64>()) {
            let mut rng = RngStream::from_seed(seed);
            let data: Vec<Vec<f64>> = (0..3)
                .map(|_| (0..6).map(|_| (rng.uniform() * 8.0).floor()).collect())
                .collect();
            let g: Vec<SampleGroup> = data.iter().enumerate().map(|(i, v)| SampleGroup::new(i.to_string(), v.clone())).collect();
            let t: Vec<SampleGroup> = data.iter().enumerate().map(|(i, v)| SampleGroup::new(i.to_string(), v.iter().map(|x| (x * 0.3).exp() - 7.0).collect())).collect();
            let a = kruskal_wallis(&g, 0.05).unwrap();
            let b = kruskal_wallis(&t, 0.05).unwrap();
            prop_assert!(a.h >= 0.0);
            prop_assert!((0.0..=1.0).contains(&a.p_value));
            prop_assert!((a.h - b.h).abs() < 1e-9);
            prop_assert!((a.p_value - b.p_value).abs() < 1e-9);
        }
    }
}

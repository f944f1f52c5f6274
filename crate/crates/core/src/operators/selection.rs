use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::space::Individual;

/// Tournament of size `k`, sampled with replacement. Returns the slot index
/// of the winner; ties go to the earliest draw.
pub fn tournament_index(pop: &[Individual], k: usize, rng: &mut RngStream) -> Result<usize> {
    if pop.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    let mut best = rng.index(pop.len());
    for _ in 1..k.max(1) {
        let c = rng.index(pop.len());
        if pop[c].fitness < pop[best].fitness {
            best = c;
        }
    }
    Ok(best)
}

pub fn tournament_select<'a>(
    pop: &'a [Individual],
    k: usize,
    rng: &mut RngStream,
) -> Result<&'a Individual> {
    Ok(&pop[tournament_index(pop, k, rng)?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::RealVector;

    fn pop(fits: &[f64]) -> Vec<Individual> {
        fits.iter()
            .map(|&f| Individual::evaluated(RealVector::filled(f, 1), f))
            .collect()
    }

    #[test]
    fn empty_population_errors() {
        let mut rng = RngStream::from_seed(0);
        assert_eq!(
            tournament_index(&[], 3, &mut rng),
            Err(Error::EmptyPopulation)
        );
    }

    #[test]
    fn singleton() {
        let p = pop(&[4.0]);
        let mut rng = RngStream::from_seed(0);
        for _ in 0..10 {
            assert_eq!(tournament_select(&p, 3, &mut rng).unwrap().fitness, 4.0);
        }
    }

    #[test]
    fn large_tournament_finds_best() {
        // with k = 200 on 5 individuals every slot is drawn with overwhelming probability
        let p = pop(&[3.0, 1.0, 5.0, 0.5, 2.0]);
        let mut rng = RngStream::from_seed(1);
        for _ in 0..100 {
            assert_eq!(tournament_index(&p, 200, &mut rng).unwrap(), 3);
        }
    }

    #[test]
    fn winner_never_worse_than_sample() {
        // replay the draws with a cloned stream and check the argmin contract
        let p = pop(&[3.0, 1.0, 5.0, 0.5, 2.0, 7.0, 7.0]);
        let mut rng = RngStream::from_seed(2);
        for _ in 0..1000 {
            let mut shadow = rng.clone();
            let drawn: Vec<usize> = (0..3).map(|_| shadow.index(p.len())).collect();
            let w = tournament_index(&p, 3, &mut rng).unwrap();
            let min = drawn
                .iter()
                .map(|&i| p[i].fitness)
                .fold(f64::INFINITY, f64::min);
            assert_eq!(p[w].fitness, min);
            let first_min = *drawn.iter().find(|&&i| p[i].fitness == min).unwrap();
            assert_eq!(w, first_min);
        }
    }

    #[test]
    fn uniform_fitness_selects_uniformly() {
        let n = 10;
        let p = pop(&vec![1.0; n]);
        let mut rng = RngStream::from_seed(3);
        let draws = 100_000;
        let mut counts = vec![0usize; n];
        for _ in 0..draws {
            counts[tournament_index(&p, 3, &mut rng).unwrap()] += 1;
        }
        let expected = draws as f64 / n as f64;
        let sigma = (draws as f64 * (1.0 / n as f64) * (1.0 - 1.0 / n as f64)).sqrt();
        for c in counts {
            assert!((c as f64 - expected).abs() < 3.0 * sigma, "count {c}");
        }
    }
}

use std::cmp::Ordering;

use rand::Rng;

use super::{GpError, Individual};
use crate::Scalar;

/// Orders by fitness, then node count, then population index (lower wins).
pub fn compare_individuals<T: Scalar>(
    a: (usize, &Individual<T>),
    b: (usize, &Individual<T>),
) -> Ordering {
    let fa = a.1.fitness.as_f64();
    let fb = b.1.fitness.as_f64();
    fa.total_cmp(&fb)
        .then(a.1.node_count.cmp(&b.1.node_count))
        .then(a.0.cmp(&b.0))
}

/// Draws `k` indices uniformly with replacement and returns the winner's
/// index under [`compare_individuals`].
pub fn tournament_select_index<T: Scalar, R: Rng + ?Sized>(
    population: &[Individual<T>],
    k: usize,
    rng: &mut R,
) -> Result<usize, GpError> {
    if population.is_empty() {
        return Err(GpError::EmptyPopulation);
    }
    if k == 0 {
        return Err(GpError::Config("tournament size must be positive".into()));
    }
    let mut best = rng.random_range(0..population.len());
    for _ in 1..k {
        let c = rng.random_range(0..population.len());
        if compare_individuals((c, &population[c]), (best, &population[best])) == Ordering::Less {
            best = c;
        }
    }
    Ok(best)
}

pub fn tournament_select<'p, T: Scalar, R: Rng + ?Sized>(
    population: &'p [Individual<T>],
    k: usize,
    rng: &mut R,
) -> Result<&'p Individual<T>, GpError> {
    tournament_select_index(population, k, rng).map(|i| &population[i])
}

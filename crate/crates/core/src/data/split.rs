use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::DataError;

/// Shuffles `0..n` with a seeded generator and returns `(train, test)`
/// index sets with `round(n * test_fraction)` test rows. Both parts must
/// be nonempty.
pub fn split_indices(
    n: usize,
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), DataError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(DataError::Input(format!(
            "test fraction {test_fraction} outside (0, 1)"
        )));
    }
    let n_test = (n as f64 * test_fraction).round() as usize;
    if n_test == 0 || n_test >= n {
        return Err(DataError::Input(format!(
            "test fraction {test_fraction} of {n} rows leaves an empty partition"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test = idx.split_off(n - n_test);
    Ok((idx, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eight_two_split_is_stable() {
        let (a, b) = split_indices(10, 0.2, 42).unwrap();
        assert_eq!((a.len(), b.len()), (8, 2));
        assert_eq!(split_indices(10, 0.2, 42).unwrap(), (a.clone(), b.clone()));
        let mut all: Vec<usize> = a.iter().chain(&b).copied().collect();
        all.sort();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert_ne!(split_indices(10, 0.2, 43).unwrap(), (a, b));
    }

    #[test]
    fn degenerate_and_invalid() {
        assert!(split_indices(1, 0.5, 0).is_err());
        assert!(split_indices(10, 0.0, 0).is_err());
        assert!(split_indices(10, 1.0, 0).is_err());
        assert!(split_indices(10, f64::NAN, 0).is_err());
    }

    #[test]
    fn independent_of_thread_count() {
        let reference = split_indices(1000, 0.3, 9).unwrap();
        let handles: Vec<_> = (0..4)
            .map(|_| std::thread::spawn(|| split_indices(1000, 0.3, 9).unwrap()))
            .collect();
        for h in handles {
            assert_eq!(h.join().unwrap(), reference);
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap();
        assert_eq!(
            pool.install(|| split_indices(1000, 0.3, 9).unwrap()),
            reference
        );
    }
}

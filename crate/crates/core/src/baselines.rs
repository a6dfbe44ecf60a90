//! Reference ranking strategies that do not weight tests by credibility.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::LinkMatrix;

/// Number of tests each code passes.
pub fn score_pass_count(matrix: &LinkMatrix) -> Vec<usize> {
    matrix
        .rows()
        .map(|row| row.iter().filter(|&&p| p).count())
        .collect()
}

/// Whether each code passes every test.
pub fn score_filter_all(matrix: &LinkMatrix) -> Vec<bool> {
    matrix.rows().map(|row| row.iter().all(|&p| p)).collect()
}

/// Consensus product `|cluster| * |pass-set|`, where a code's cluster is the
/// set of codes whose pass-set is exactly equal to its own.
pub fn score_consensus_product(matrix: &LinkMatrix) -> Vec<usize> {
    let mut cluster_sizes: BTreeMap<&[bool], usize> = BTreeMap::new();
    for row in matrix.rows() {
        *cluster_sizes.entry(row).or_default() += 1;
    }
    matrix
        .rows()
        .map(|row| cluster_sizes[row] * row.iter().filter(|&&p| p).count())
        .collect()
}

/// Two distinct code indices drawn uniformly from a generator seeded with
/// `seed`.
pub fn select_random_pair(matrix: &LinkMatrix, seed: u64) -> Result<(usize, usize)> {
    let n = matrix.n_codes();
    if n < 2 {
        return Err(Error::InsufficientCandidates {
            needed: 2,
            found: n,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = rng.random_range(0..n);
    let mut b = rng.random_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn fig2() -> LinkMatrix {
        LinkMatrix::from_rows(&[[true, true], [true, false]]).unwrap()
    }

    #[test]
    fn pass_count() {
        assert_eq!(score_pass_count(&fig2()), [2, 1]);
        let all = LinkMatrix::new(3, 4, vec![true; 12]).unwrap();
        assert_eq!(score_pass_count(&all), [4, 4, 4]);
        let none = LinkMatrix::new(3, 4, vec![false; 12]).unwrap();
        assert_eq!(score_pass_count(&none), [0, 0, 0]);
    }

    #[test]
    fn filter_all() {
        assert_eq!(score_filter_all(&fig2()), [true, false]);
        let all = LinkMatrix::new(2, 3, vec![true; 6]).unwrap();
        assert_eq!(score_filter_all(&all), [true, true]);
        let hard = LinkMatrix::from_rows(&[[true, false], [true, false], [true, false]]).unwrap();
        assert_eq!(score_filter_all(&hard), [false, false, false]);
    }

    #[test]
    fn consensus_product() {
        assert_eq!(score_consensus_product(&fig2()), [2, 1]);
        let twins = LinkMatrix::from_rows(&[[true, true, true], [true, true, true]]).unwrap();
        assert_eq!(score_consensus_product(&twins), [6, 6]);
        let m = LinkMatrix::from_rows(&[[false, false], [true, false]]).unwrap();
        assert_eq!(score_consensus_product(&m)[0], 0);
    }

    #[test]
    fn random_pair_needs_two_codes() {
        let one = LinkMatrix::from_rows(&[[true]]).unwrap();
        assert!(matches!(
            select_random_pair(&one, 3),
            Err(Error::InsufficientCandidates { .. })
        ));
    }

    #[test]
    fn random_pair_of_two_is_both() {
        for seed in 0..20 {
            let (a, b) = select_random_pair(&fig2(), seed).unwrap();
            assert_eq!(a + b, 1);
        }
    }

    #[test]
    fn random_pair_is_deterministic() {
        let m = LinkMatrix::new(10, 1, vec![true; 10]).unwrap();
        assert_eq!(
            select_random_pair(&m, 42).unwrap(),
            select_random_pair(&m, 42).unwrap()
        );
    }
}

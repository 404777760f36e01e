//! Strictly sorted index sets over an ambient dimension `[0, n)`.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A strictly increasing set of indices inside `[0, ambient)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSet {
    indices: Vec<usize>,
    ambient: usize,
}

impl IndexSet {
    /// Builds a set from arbitrary order; duplicates and out-of-range indices are rejected.
    pub fn new(mut indices: Vec<usize>, ambient: usize) -> Result<Self> {
        indices.sort_unstable();
        for pair in indices.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::InvalidIndexSet(format!(
                    "duplicate index {}",
                    pair[0]
                )));
            }
        }
        if let Some(&last) = indices.last() {
            if last >= ambient {
                return Err(Error::InvalidIndexSet(format!(
                    "index {last} out of range [0, {ambient})"
                )));
            }
        }
        Ok(Self { indices, ambient })
    }

    pub fn empty(ambient: usize) -> Self {
        Self {
            indices: Vec::new(),
            ambient,
        }
    }

    /// The full set `[0, ambient)`.
    pub fn full(ambient: usize) -> Self {
        Self {
            indices: (0..ambient).collect(),
            ambient,
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.indices.binary_search(&idx).is_ok()
    }

    pub fn is_subset_of(&self, other: &IndexSet) -> bool {
        self.ambient == other.ambient && self.indices.iter().all(|&i| other.contains(i))
    }

    /// Complement within the ambient range.
    pub fn complement(&self) -> IndexSet {
        let mut out = Vec::with_capacity(self.ambient - self.len());
        let mut it = self.indices.iter().peekable();
        for i in 0..self.ambient {
            if it.peek() == Some(&&i) {
                it.next();
            } else {
                out.push(i);
            }
        }
        IndexSet {
            indices: out,
            ambient: self.ambient,
        }
    }

    /// Elements of `self` not in `other` (same ambient required).
    pub fn difference(&self, other: &IndexSet) -> IndexSet {
        let indices = self
            .indices
            .iter()
            .copied()
            .filter(|&i| !other.contains(i))
            .collect();
        IndexSet {
            indices,
            ambient: self.ambient,
        }
    }

    /// Uniformly random `m`-subset of `[0, n)`.
    pub fn sample_uniform<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Self> {
        if m > n {
            return Err(Error::CardinalityTooLarge { m, n });
        }
        let mut indices = rand::seq::index::sample(rng, n, m).into_vec();
        indices.sort_unstable();
        Ok(Self {
            indices,
            ambient: n,
        })
    }

    /// Includes each index of `[0, n)` independently with probability `rho`.
    pub fn sample_bernoulli<R: Rng + ?Sized>(n: usize, rho: f64, rng: &mut R) -> Self {
        let indices = (0..n).filter(|_| rng.gen::<f64>() < rho).collect();
        Self {
            indices,
            ambient: n,
        }
    }

    /// Random split into two halves; when `len` is odd the first half gets the extra element.
    pub fn random_split<R: Rng + ?Sized>(&self, rng: &mut R) -> (IndexSet, IndexSet) {
        let mut shuffled = self.indices.clone();
        shuffled.shuffle(rng);
        let first_len = shuffled.len() - shuffled.len() / 2;
        let mut first: Vec<usize> = shuffled[..first_len].to_vec();
        let mut second: Vec<usize> = shuffled[first_len..].to_vec();
        first.sort_unstable();
        second.sort_unstable();
        (
            IndexSet {
                indices: first,
                ambient: self.ambient,
            },
            IndexSet {
                indices: second,
                ambient: self.ambient,
            },
        )
    }

    /// Shuffles the set and partitions a prefix into consecutive chunks of the given sizes.
    /// The chunks are disjoint subsets of `self`; leftover elements are dropped.
    pub fn random_partition<R: Rng + ?Sized>(
        &self,
        sizes: &[usize],
        rng: &mut R,
    ) -> Result<Vec<IndexSet>> {
        let total: usize = sizes.iter().sum();
        if total > self.len() {
            return Err(Error::InvalidIndexSet(format!(
                "partition sizes sum to {total} but set has {} elements",
                self.len()
            )));
        }
        let mut shuffled = self.indices.clone();
        shuffled.shuffle(rng);
        let mut out = Vec::with_capacity(sizes.len());
        let mut offset = 0;
        for &sz in sizes {
            let mut chunk: Vec<usize> = shuffled[offset..offset + sz].to_vec();
            chunk.sort_unstable();
            out.push(IndexSet {
                indices: chunk,
                ambient: self.ambient,
            });
            offset += sz;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn rejects_duplicates_and_out_of_range() {
        assert!(IndexSet::new(vec![1, 1], 4).is_err());
        assert!(IndexSet::new(vec![4], 4).is_err());
        assert!(IndexSet::new(vec![3, 0, 2], 4).is_ok());
    }

    #[test]
    fn complement_partitions_ambient() {
        let s = IndexSet::new(vec![0, 3, 6], 9).unwrap();
        let c = s.complement();
        assert_eq!(c.indices(), &[1, 2, 4, 5, 7, 8]);
        assert_eq!(s.len() + c.len(), 9);
    }

    #[test]
    fn uniform_sample_bounds() {
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        assert_eq!(IndexSet::sample_uniform(10, 0, &mut rng).unwrap().len(), 0);
        assert_eq!(
            IndexSet::sample_uniform(10, 10, &mut rng).unwrap().indices(),
            IndexSet::full(10).indices()
        );
        assert!(IndexSet::sample_uniform(5, 6, &mut rng).is_err());
    }

    #[test]
    fn uniform_sample_marginals() {
        // each index of a 3-subset of [0,10) should appear with frequency 0.3
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let trials = 100_000;
        let mut counts = [0usize; 10];
        for _ in 0..trials {
            for i in IndexSet::sample_uniform(10, 3, &mut rng).unwrap().iter() {
                counts[i] += 1;
            }
        }
        for &c in &counts {
            let freq = c as f64 / trials as f64;
            assert!((freq - 0.3).abs() < 0.01, "marginal off: {freq}");
        }
    }

    #[test]
    fn bernoulli_extremes() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        assert!(IndexSet::sample_bernoulli(10, 0.0, &mut rng).is_empty());
        assert_eq!(IndexSet::sample_bernoulli(10, 1.0, &mut rng).len(), 10);
    }

    #[test]
    fn bernoulli_cardinality_concentrates() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let n = 10_000;
        let mut hits = 0;
        let reps = 200;
        for _ in 0..reps {
            let s = IndexSet::sample_bernoulli(n, 0.3, &mut rng);
            let frac = s.len() as f64 / n as f64;
            if (frac - 0.3).abs() <= 0.02 {
                hits += 1;
            }
        }
        assert!(hits as f64 / reps as f64 >= 0.99);
    }

    #[test]
    fn split_is_balanced_partition() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let s = IndexSet::sample_uniform(20, 11, &mut rng).unwrap();
        let (a, b) = s.random_split(&mut rng);
        assert_eq!(a.len(), 6);
        assert_eq!(b.len(), 5);
        assert!(a.is_subset_of(&s) && b.is_subset_of(&s));
        assert!(a.iter().all(|i| !b.contains(i)));
    }
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionMode {
    Equal,
    RandomUneven,
}

/// Assignment of `N` global samples to nodes in contiguous blocks: node `i`
/// owns global indices `offset_i .. offset_i + m_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    counts: Vec<usize>,
    offsets: Vec<usize>,
    mode: PartitionMode,
}

impl Partition {
    pub fn from_counts(counts: Vec<usize>, mode: PartitionMode) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::invalid_param("partition needs at least one node"));
        }
        if counts.iter().any(|&m| m == 0) {
            return Err(Error::invalid_param("every node needs at least one sample"));
        }
        if mode == PartitionMode::Equal && counts.iter().any(|&m| m != counts[0]) {
            return Err(Error::invalid_param("equal partition with unequal counts"));
        }
        let offsets = counts
            .iter()
            .scan(0usize, |acc, &m| {
                let o = *acc;
                *acc += m;
                Some(o)
            })
            .collect();
        Ok(Self { counts, offsets, mode })
    }

    /// `total / n` samples per node; `total` must be divisible by `n`.
    pub fn equal(total: usize, n: usize) -> Result<Self> {
        if n == 0 || total % n != 0 {
            return Err(Error::invalid_param(format!("{total} samples cannot be split equally over {n} nodes")));
        }
        Self::from_counts(vec![total / n; n], PartitionMode::Equal)
    }

    /// Node weights drawn uniformly from `[1, 3)` and scaled to `total` with
    /// a largest-remainder correction; every node keeps at least one sample.
    pub fn random_uneven(total: usize, n: usize, seed: u64) -> Result<Self> {
        if n == 0 || total < n {
            return Err(Error::invalid_param(format!("cannot give {n} nodes at least one of {total} samples")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..3.0)).collect();
        let spare = total - n;
        let wsum: f64 = weights.iter().sum();
        let exact: Vec<f64> = weights.iter().map(|w| w / wsum * spare as f64).collect();
        let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
        let assigned: usize = counts.iter().sum();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            let fa = exact[a] - exact[a].floor();
            let fb = exact[b] - exact[b].floor();
            fb.total_cmp(&fa).then(a.cmp(&b))
        });
        for &i in order.iter().take(spare - assigned) {
            counts[i] += 1;
        }
        counts.iter_mut().for_each(|c| *c += 1);
        Self::from_counts(counts, PartitionMode::RandomUneven)
    }

    pub fn mode(&self) -> PartitionMode {
        self.mode
    }

    pub fn nodes(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Global sample index of local sample `j` on node `i`.
    pub fn global_index(&self, node: usize, j: usize) -> usize {
        debug_assert!(j < self.counts[node]);
        self.offsets[node] + j
    }

    /// `(node, local index)` of a global sample.
    pub fn locate(&self, global: usize) -> Option<(usize, usize)> {
        if global >= self.total() {
            return None;
        }
        let node = self.offsets.partition_point(|&o| o <= global) - 1;
        Some((node, global - self.offsets[node]))
    }
}

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Sampling distribution over entity ids with `P(i) ∝ count(i)^power`.
#[derive(Debug, Clone, PartialEq)]
pub struct NegTable {
    /// Inclusive prefix sums, normalised so the last entry is 1.
    cumulative: Vec<f64>,
    power: f64,
}

impl NegTable {
    pub fn new(counts: &[u64], power: f64) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::EmptyVocab);
        }
        if !(power >= 0.0 && power.is_finite()) {
            return Err(Error::Config(format!(
                "negative-sampling power must be >= 0, got {power}"
            )));
        }
        let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(power)).collect();
        let total: f64 = weights.iter().sum();
        // All-zero counts (possible when power > 0) fall back to uniform.
        let weights = if total > 0.0 { weights } else { vec![1.0; counts.len()] };
        let total: f64 = weights.iter().sum();
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc / total
            })
            .collect();
        *cumulative.last_mut().expect("non-empty") = 1.0;
        Ok(Self { cumulative, power })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(&vec![1; n], 0.0)
    }

    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn prob(&self, id: usize) -> f64 {
        let prev = if id == 0 { 0.0 } else { self.cumulative[id - 1] };
        self.cumulative[id] - prev
    }

    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.prob(i)).collect()
    }

    /// Draws one id by binary search over the cumulative table.
    pub fn sample(&self, rng: &mut Rng) -> u32 {
        let u = rng.next_f64();
        let i = self.cumulative.partition_point(|&c| c <= u);
        i.min(self.cumulative.len() - 1) as u32
    }
}

/// Negative-sampling table over the dataset's tail-occurrence counts.
pub fn build_neg_table(ds: &super::TripleDataset, power: f64) -> Result<NegTable> {
    NegTable::new(&ds.entity_counts, power)
}

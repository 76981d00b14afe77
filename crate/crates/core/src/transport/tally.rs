//! Integer-count histogram of per-event chip deposits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Binning {
    /// Lower edge, keV.
    pub lo: f64,
    /// Bin width, keV.
    pub width: f64,
    pub bins: usize,
}

impl Default for Binning {
    /// 10 keV bins over [0, 3000] keV.
    fn default() -> Self {
        Binning { lo: 0.0, width: 10.0, bins: 300 }
    }
}

impl Binning {
    pub fn hi(&self) -> f64 {
        self.lo + self.width * self.bins as f64
    }

    pub fn edges(&self) -> Vec<f64> {
        (0..=self.bins).map(|i| self.lo + self.width * i as f64).collect()
    }

    /// Bin of `x`; `None` for overflow. Values below `lo` go to bin 0.
    #[inline]
    pub fn index(&self, x: f64) -> Option<usize> {
        let i = ((x - self.lo) / self.width).floor();
        if i < 0.0 {
            Some(0)
        } else if (i as usize) < self.bins {
            Some(i as usize)
        } else {
            None
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub binning: Binning,
    pub counts: Vec<u64>,
    pub overflow: u64,
    /// Events whose chip deposit exceeds `threshold`.
    pub hits: u64,
    pub n_gen: u64,
    /// keV.
    pub threshold: f64,
}

impl Tally {
    pub fn new(binning: Binning, threshold: f64) -> Self {
        Tally { counts: vec![0; binning.bins], binning, overflow: 0, hits: 0, n_gen: 0, threshold }
    }

    #[inline]
    pub fn record(&mut self, deposit: f64) {
        self.n_gen += 1;
        if deposit > self.threshold {
            self.hits += 1;
            match self.binning.index(deposit) {
                Some(i) => self.counts[i] += 1,
                None => self.overflow += 1,
            }
        }
    }

    pub fn merge(&mut self, o: &Tally) -> Result<()> {
        if self.binning != o.binning || self.threshold != o.threshold {
            return Err(Error::Mismatch("cannot merge tallies with different binning or threshold".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&o.counts) {
            *a += b;
        }
        self.overflow += o.overflow;
        self.hits += o.hits;
        self.n_gen += o.n_gen;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn overflow_and_threshold() {
        let mut t = Tally::new(Binning::default(), 1.0);
        for d in [0.0, 0.5, 1.0, 1.5, 125.7, 2999.9, 3000.0, 5000.0] {
            t.record(d);
        }
        assert_eq!(t.n_gen, 8);
        assert_eq!(t.hits, 5);
        assert_eq!(t.overflow, 2);
        assert_eq!(t.counts[0], 1);
        assert_eq!(t.counts[12], 1);
        assert_eq!(t.counts[299], 1);
    }

    proptest! {
        #[test]
        fn counts_sum_to_hits_and_merge_adds(a in prop::collection::vec(0.0f64..4000.0, 0..200),
                                             b in prop::collection::vec(0.0f64..4000.0, 0..200)) {
            let mut ta = Tally::new(Binning::default(), 1.0);
            let mut tb = ta.clone();
            let mut tall = ta.clone();
            a.iter().for_each(|&d| { ta.record(d); tall.record(d); });
            b.iter().for_each(|&d| { tb.record(d); tall.record(d); });
            prop_assert_eq!(ta.counts.iter().sum::<u64>() + ta.overflow, ta.hits);
            prop_assert!(ta.n_gen >= ta.hits);
            ta.merge(&tb).unwrap();
            prop_assert_eq!(ta, tall);
        }
    }
}

use serde::{Deserialize, Serialize};

/// Equal-width histogram over `[lo, hi]`; the upper edge falls in the last
/// bin and values outside the range are counted separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub out_of_range: u64,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        assert!(bins > 0 && hi > lo, "histogram needs bins and a non-empty range");
        Histogram {
            lo,
            hi,
            counts: vec![0; bins],
            out_of_range: 0,
        }
    }

    pub fn from_values(lo: f64, hi: f64, bins: usize, values: impl IntoIterator<Item = f64>) -> Self {
        let mut h = Histogram::new(lo, hi, bins);
        for v in values {
            h.add(v);
        }
        h
    }

    pub fn add(&mut self, value: f64) {
        if !(self.lo..=self.hi).contains(&value) {
            self.out_of_range += 1;
            return;
        }
        let bins = self.counts.len();
        let idx = (((value - self.lo) / (self.hi - self.lo)) * bins as f64) as usize;
        self.counts[idx.min(bins - 1)] += 1;
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `(lower, upper)` edges of bin `i`.
    pub fn edges(&self, i: usize) -> (f64, f64) {
        let w = (self.hi - self.lo) / self.bins() as f64;
        let lower = self.lo + w * i as f64;
        let upper = if i + 1 == self.bins() { self.hi } else { self.lo + w * (i + 1) as f64 };
        (lower, upper)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binning() {
        let h = Histogram::from_values(0.0, 1.0, 4, [0.0, 0.24, 0.25, 0.99, 1.0, 1.5, -0.1]);
        assert_eq!(h.counts, vec![2, 1, 0, 2]);
        assert_eq!(h.out_of_range, 2);
        assert_eq!(h.edges(3), (0.75, 1.0));
    }
}

//! Small numeric helpers: compensated and pairwise summation.

/// Kahan compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }

    /// Fold another accumulator in (used when merging replica results).
    pub fn merge(&mut self, other: &KahanSum) {
        self.add(other.sum);
        self.add(-other.comp);
    }
}

/// Pairwise (cascade) summation; error grows like log(n) instead of n.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        let mut acc = KahanSum::new();
        for &x in xs {
            acc.add(x);
        }
        return acc.value();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

use serde::{Deserialize, Serialize};

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.5758293035489004;

/// Wilson score interval at 99%. `(0, 1)` when there are no trials.
pub fn wilson_interval(hits: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = Z99 * Z99;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z99 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Hoeffding half-width at 99% for the mean of `trials` values in `[0, 1]`.
pub fn hoeffding_half_width(trials: u64) -> f64 {
    if trials == 0 {
        return f64::INFINITY;
    }
    ((2.0f64 / 0.01).ln() / (2.0 * trials as f64)).sqrt()
}

/// A frequency with its 99% Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub hits: u64,
    pub trials: u64,
    pub p: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Proportion {
    pub fn new(hits: u64, trials: u64) -> Self {
        let (lo, hi) = wilson_interval(hits, trials);
        let p = if trials == 0 { 0.0 } else { hits as f64 / trials as f64 };
        Proportion { hits, trials, p, lo, hi }
    }

    /// Intervals are disjoint and `self` lies strictly below `other`.
    pub fn separated_below(&self, other: &Proportion) -> bool {
        self.hi < other.lo
    }
}

/// Mean of per-trial values in `[0, 1]` with a 99% Hoeffding interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub trials: u64,
    pub mean: f64,
    pub half_width: f64,
    /// Sample standard error, for `3σ`-style comparisons.
    pub std_err: f64,
}

impl MeanEstimate {
    /// Values are summed in the given order, so equal inputs give equal
    /// bits.
    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Self {
        let (mut n, mut sum, mut sq) = (0u64, 0.0, 0.0);
        for v in values {
            n += 1;
            sum += v;
            sq += v * v;
        }
        if n == 0 {
            return MeanEstimate { trials: 0, mean: 0.0, half_width: f64::INFINITY, std_err: f64::INFINITY };
        }
        let mean = sum / n as f64;
        let var = if n > 1 { ((sq - n as f64 * mean * mean) / (n - 1) as f64).max(0.0) } else { 0.0 };
        MeanEstimate { trials: n, mean, half_width: hoeffding_half_width(n), std_err: (var / n as f64).sqrt() }
    }

    pub fn ci99(&self) -> [f64; 2] {
        [(self.mean - self.half_width).max(0.0), (self.mean + self.half_width).min(1.0)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_reference_values() {
        // 50/100 at z = 2.5758.
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.375_280).abs() < 1e-6 && (hi - 0.624_720).abs() < 1e-6, "{lo} {hi}");
        let (lo, hi) = wilson_interval(0, 20);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.2 && hi < 0.3);
        assert_eq!(wilson_interval(0, 0), (0.0, 1.0));
    }

    #[test]
    fn hoeffding_width() {
        assert!((hoeffding_half_width(10_000) - 0.016_276).abs() < 1e-5);
    }

    #[test]
    fn mean_of_constant_values() {
        let m = MeanEstimate::from_values([1.0; 4]);
        assert_eq!((m.mean, m.std_err), (1.0, 0.0));
        assert_eq!(m.ci99()[1], 1.0);
    }
}

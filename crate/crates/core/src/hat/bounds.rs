use rand::Rng;
use serde::Serialize;

use crate::engine::{Stream, TrialSeed};

/// Parameters of the failure bounds. `y` is the unprotected measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundParams {
    pub n: f64,
    pub x: f64,
    pub ell: f64,
    pub y: f64,
}

/// `x = n^0.3`, `ℓ = n^-0.1`, `y = 0`.
pub fn default_bound_params(n: f64) -> BoundParams {
    BoundParams { n, x: n.powf(0.3), ell: n.powf(-0.1), y: 0.0 }
}

/// `1 - 2^{-ℓ²x/2}`.
pub fn lemma_aa_bound(x: f64, ell: f64) -> f64 {
    -(-(ell * ell * x / 2.0) * std::f64::consts::LN_2).exp_m1()
}

/// `(f(y), g(y))` with
///
/// `f(y) = (1 - 2xℓ e^{-2x/3}) (1-y)^{4x} (1 - 2^{-ℓ²x/2})` and
/// `g(y) = 1 - (1 - (2y - n^{-0.4})/(2ℓ))^{n^{0.6}(4ℓ - n^{-0.4})/(32ℓ²)}`
/// for `y ≥ n^{-0.4}/2`, else `0`.
pub fn eval_failure_bounds(p: &BoundParams) -> (f64, f64) {
    let BoundParams { n, x, ell, y } = *p;
    let f = (1.0 - 2.0 * x * ell * (-2.0 * x / 3.0).exp())
        * (4.0 * x * (-y).ln_1p()).exp()
        * lemma_aa_bound(x, ell);
    let shift = n.powf(-0.4);
    let g = if y < shift / 2.0 {
        0.0
    } else {
        let base = -(2.0 * y - shift) / (2.0 * ell);
        let exponent = n.powf(0.6) * (4.0 * ell - shift) / (32.0 * ell * ell);
        -(exponent * base.ln_1p()).exp_m1()
    };
    (f, g)
}

/// 512 log-spaced points in `(0, ℓ]`, plus `0` and the breakpoint
/// `n^{-0.4}/2` when it lies inside, ascending.
pub fn y_grid(n: f64, ell: f64) -> Vec<f64> {
    const POINTS: usize = 512;
    const DECADES: f64 = 9.0;
    let mut ys: Vec<f64> = (0..POINTS)
        .map(|i| ell * 10f64.powf(-DECADES * (1.0 - i as f64 / (POINTS - 1) as f64)))
        .collect();
    ys.push(0.0);
    let breakpoint = n.powf(-0.4) / 2.0;
    if breakpoint <= ell {
        ys.push(breakpoint);
    }
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    ys
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundScan {
    pub n: f64,
    pub x: f64,
    pub ell: f64,
    pub ys: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    /// `min_y max{f, g}` over the grid.
    pub min_max: f64,
    pub argmin: f64,
}

impl BoundScan {
    pub fn f_non_increasing(&self) -> bool {
        self.f.windows(2).all(|w| w[1] <= w[0])
    }

    pub fn g_non_decreasing(&self) -> bool {
        self.g.windows(2).all(|w| w[1] >= w[0])
    }
}

/// Evaluates `f` and `g` on [`y_grid`] at the default `x` and `ℓ`.
pub fn scan_failure_bounds(n: f64) -> BoundScan {
    let base = default_bound_params(n);
    let ys = y_grid(n, base.ell);
    let (f, g): (Vec<f64>, Vec<f64>) = ys
        .iter()
        .map(|&y| eval_failure_bounds(&BoundParams { y, ..base }))
        .unzip();
    let (argmin, min_max) = ys
        .iter()
        .zip(f.iter().zip(&g))
        .map(|(&y, (&f, &g))| (y, f.max(g)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("grid is never empty");
    BoundScan { n, x: base.x, ell: base.ell, ys, f, g, min_max, argmin }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaAaReport {
    /// Claws simulated, `⌊x⌋`.
    pub claws: u64,
    pub trials: u64,
    pub hits: u64,
    pub estimate: f64,
    pub bound: f64,
    /// Binomial standard error of the estimate.
    pub sigma: f64,
    pub passed: bool,
}

/// Monte Carlo estimate of the probability that one of the `⌊x⌋` left-most
/// claws has `T < t(e') < t(e) < T + ℓ`, with `T = 1/e`, compared against
/// `1 - 2^{-ℓ²x/2} - 3σ`.
pub fn empirical_lemma_checks(x: f64, ell: f64, trials: u64, seed: u64) -> LemmaAaReport {
    let horizon = (-1.0f64).exp();
    let claws = x.max(0.0).floor() as u64;
    let hits = (0..trials)
        .filter(|&t| {
            let mut rng = TrialSeed::new(seed, t).rng(Stream::Schedule);
            (0..claws).any(|_| {
                let upper: f64 = rng.gen();
                let lower: f64 = rng.gen();
                horizon < lower && lower < upper && upper < horizon + ell
            })
        })
        .count() as u64;
    let estimate = if trials == 0 { 0.0 } else { hits as f64 / trials as f64 };
    let sigma = if trials == 0 { 0.0 } else { (estimate * (1.0 - estimate) / trials as f64).sqrt() };
    let bound = lemma_aa_bound(x, ell);
    LemmaAaReport { claws, trials, hits, estimate, bound, sigma, passed: estimate >= bound - 3.0 * sigma }
}

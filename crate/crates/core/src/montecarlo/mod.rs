//! Path samplers and Monte Carlo checks of the closed-form length-measure
//! integrals.

mod suites;
pub mod targets;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::excursion::GridFunction;
use crate::path_codec::LatticePath;

pub use suites::{
    chain_convergence, verify_disintegration, verify_exchangeability, verify_jump_square,
    verify_shifted_excursion, SuiteRegistry, VerifyConfig, VerifySuite,
};

/// One Monte Carlo estimate, optionally against a target value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorReport {
    pub name: String,
    pub estimate: f64,
    pub stderr: f64,
    pub reps: usize,
    pub cutoff: Option<f64>,
    pub target: Option<f64>,
    pub z_score: Option<f64>,
}

impl EstimatorReport {
    pub fn new(name: impl Into<String>, estimate: f64, stderr: f64, reps: usize) -> Self {
        EstimatorReport {
            name: name.into(),
            estimate,
            stderr,
            reps,
            cutoff: None,
            target: None,
            z_score: None,
        }
    }

    /// Batch-means report from per-replicate values.
    pub fn from_values(name: impl Into<String>, values: &[f64]) -> Self {
        let (estimate, stderr) = batch_means(values, BATCHES);
        EstimatorReport::new(name, estimate, stderr, values.len())
    }

    pub fn with_target(mut self, target: f64) -> Self {
        self.target = Some(target);
        self.z_score = Some((self.estimate - target) / self.stderr);
        self
    }

    pub fn with_cutoff(mut self, cutoff: f64) -> Self {
        self.cutoff = Some(cutoff);
        self
    }

    pub const CSV_HEADER: &'static str = "name,estimate,stderr,target,z_score,reps,cutoff";

    pub fn csv_row(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| format!("{v}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{}",
            self.name,
            self.estimate,
            self.stderr,
            opt(self.target),
            opt(self.z_score),
            self.reps,
            opt(self.cutoff)
        )
    }
}

/// Number of batches used for standard errors.
pub const BATCHES: usize = 64;

/// Mean and batch-means standard error of `values` split into `batches`
/// contiguous groups of near-equal size.
pub fn batch_means(values: &[f64], batches: usize) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let b = batches.min(n);
    if b < 2 {
        return (mean, 0.0);
    }
    let means: Vec<f64> = (0..b)
        .map(|k| {
            let (lo, hi) = (n * k / b, n * (k + 1) / b);
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect();
    let mbar = means.iter().sum::<f64>() / b as f64;
    let var = means.iter().map(|m| (m - mbar).powi(2)).sum::<f64>() / (b - 1) as f64;
    (mean, (var / b as f64).sqrt())
}

/// Standard Brownian bridge on `[0, 1]` at `N + 1` equally spaced times.
pub fn sample_brownian_bridge<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::OutOfRange {
            what: "grid count N",
            value: n as i64,
            min: 2,
            max: i64::MAX,
        });
    }
    let sd = (1.0 / n as f64).sqrt();
    let mut w = Vec::with_capacity(n + 1);
    w.push(0.0);
    for k in 0..n {
        let z: f64 = rng.sample(StandardNormal);
        w.push(w[k] + sd * z);
    }
    let end = w[n];
    for (k, x) in w.iter_mut().enumerate() {
        *x -= end * k as f64 / n as f64;
    }
    w[n] = 0.0;
    Ok(w)
}

/// `|B|` for a Brownian bridge `B` on an `N`-grid, lifetime 1. A knot is
/// added at each sign change of `B` so the path touches zero there.
pub fn sample_reflected_bridge<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<GridFunction> {
    let b = sample_brownian_bridge(n, rng)?;
    let dt = 1.0 / n as f64;
    let mut times = Vec::with_capacity(n + n / 4);
    let mut values = Vec::with_capacity(n + n / 4);
    for k in 0..=n {
        if k > 0 && b[k - 1] * b[k] < 0.0 {
            let (x, y) = (b[k - 1].abs(), b[k].abs());
            let t = (k - 1) as f64 * dt + dt * x / (x + y);
            if t > times[times.len() - 1] && t < k as f64 * dt {
                times.push(t);
                values.push(0.0);
            }
        }
        times.push(k as f64 * dt);
        values.push(b[k].abs());
    }
    if times.len() == n + 1 {
        return GridFunction::uniform(1.0, values);
    }
    GridFunction::from_knots(times, values)
}

/// Standard excursion surrogate: the bridge cyclically shifted to start at
/// its minimum and lifted by it.
pub fn sample_excursion<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<GridFunction> {
    let b = sample_brownian_bridge(n, rng)?;
    let k = (0..n).min_by(|&i, &j| b[i].total_cmp(&b[j])).expect("n >= 2");
    let lo = b[k];
    let values = (0..=n).map(|j| if j == 0 || j == n { 0.0 } else { b[(k + j) % n] - lo }).collect();
    GridFunction::uniform(1.0, values)
}

/// Uniform ±1 bridge of length `2n`, reflected. Its steps are i.i.d. fair
/// signs conditioned to return to 0.
pub fn sample_srw_bridge<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<LatticePath> {
    if n == 0 {
        return Err(Error::OutOfRange {
            what: "half-length n",
            value: 0,
            min: 1,
            max: i64::MAX,
        });
    }
    let mut steps: Vec<i64> = (0..2 * n).map(|k| if k < n { 1 } else { -1 }).collect();
    steps.shuffle(rng);
    let mut s = 0i64;
    let mut values = Vec::with_capacity(2 * n + 1);
    values.push(0);
    for d in steps {
        s += d;
        values.push(s.abs());
    }
    LatticePath::new(values)
}

/// A reflected walk bridge in Brownian scaling: lifetime 1, space step
/// `√step`.
pub fn srw_grid(p: &LatticePath) -> GridFunction {
    let scale = (1.0 / (2 * p.n()) as f64).sqrt();
    GridFunction::uniform(1.0, p.values().iter().map(|&v| v as f64 * scale).collect()).expect("valid path")
}

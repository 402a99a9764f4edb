use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng as _;

use super::targets::{self, DurationDensity};
use super::{sample_excursion, sample_reflected_bridge, EstimatorReport};
use crate::error::{Error, Result};
use crate::excursion::{kappa_plus_sample, AreaSampler, BridgeStraddle, GridFunction, MfView};
use crate::mapping::sample_uniform_acyclic;
use crate::path_codec::encode;
use crate::rng::{self, Rng};

/// Size and seed of a verification run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    /// Number of sampled paths.
    pub reps: usize,
    /// Grid count `N` of each path.
    pub grid: usize,
    pub seed: u64,
    /// Length-measure samples drawn per path.
    pub inner: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            reps: 20_000,
            grid: 8192,
            seed: 1,
            inner: 16,
        }
    }
}

impl VerifyConfig {
    fn check(&self, min_reps: usize) -> Result<()> {
        if self.reps < min_reps {
            return Err(Error::OutOfRange {
                what: "reps",
                value: self.reps as i64,
                min: min_reps as i64,
                max: i64::MAX,
            });
        }
        if self.grid < 2 {
            return Err(Error::OutOfRange {
                what: "grid",
                value: self.grid as i64,
                min: 2,
                max: i64::MAX,
            });
        }
        if self.inner == 0 {
            return Err(Error::OutOfRange {
                what: "inner",
                value: 0,
                min: 1,
                max: i64::MAX,
            });
        }
        Ok(())
    }
}

// Runs `one` per replicate across the fixed chunks and returns columns in
// replicate order.
fn replicate<F>(cfg: &VerifyConfig, width: usize, one: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&mut Rng) -> Result<Vec<f64>> + Sync,
{
    let chunks = rng::par_chunks(cfg.seed, cfg.reps, |count, rng| {
        (0..count).map(|_| one(rng)).collect::<Result<Vec<_>>>()
    });
    let mut cols = vec![Vec::with_capacity(cfg.reps); width];
    for chunk in chunks {
        for row in chunk? {
            for (c, x) in cols.iter_mut().zip(row) {
                c.push(x);
            }
        }
    }
    Ok(cols)
}

// Length-measure averages of several functionals of the straddle, from
// `inner` area samples of one path.
fn mf_row<G>(f: &GridFunction, inner: usize, width: usize, rng: &mut Rng, g: G) -> Vec<f64>
where
    G: Fn(&MfView, &mut Rng, &mut [f64]),
{
    let mut acc = vec![0.0; width];
    let Ok(sampler) = AreaSampler::new(f) else {
        return acc;
    };
    let area = sampler.area();
    let mut tmp = vec![0.0; width];
    for _ in 0..inner {
        let (s, a) = sampler.sample(f, rng);
        let frame = f.straddle(s, a).expect("sampled point lies under the graph");
        let view = MfView::new(f, frame);
        tmp.iter_mut().for_each(|x| *x = 0.0);
        g(&view, rng, &mut tmp);
        let w = area / view.duration();
        for (a, t) in acc.iter_mut().zip(&tmp) {
            *a += w * t;
        }
    }
    acc.iter_mut().for_each(|a| *a /= inner as f64);
    acc
}

// As `mf_row`, with the straddle resampled from the Brownian bridges
// between knots and weighted by its own duration.
fn bridge_row<G>(f: &GridFunction, inner: usize, width: usize, rng: &mut Rng, g: G) -> Vec<f64>
where
    G: Fn(&BridgeStraddle, &mut [f64]),
{
    let mut acc = vec![0.0; width];
    let Ok(sampler) = AreaSampler::new(f) else {
        return acc;
    };
    let area = sampler.area();
    let mut tmp = vec![0.0; width];
    for _ in 0..inner {
        let (s, a) = sampler.sample(f, rng);
        let frame = f.straddle(s, a).expect("sampled point lies under the graph");
        let b = MfView::new(f, frame).bridge_straddle(1.0, rng);
        tmp.iter_mut().for_each(|x| *x = 0.0);
        g(&b, &mut tmp);
        let w = area / b.duration();
        for (a, t) in acc.iter_mut().zip(&tmp) {
            *a += w * t;
        }
    }
    acc.iter_mut().for_each(|a| *a /= inner as f64);
    acc
}

fn ind(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Tails and second moments of duration and height of the straddling
/// excursion, integrated against the length measure of reflected bridges.
pub fn verify_shifted_excursion(cfg: &VerifyConfig) -> Result<Vec<EstimatorReport>> {
    cfg.check(1000)?;
    let ts = [0.2, 0.5, 0.8];
    let xs = [0.5, 1.0];
    let width = ts.len() + 1 + xs.len() + 1;
    let cols = replicate(cfg, width, |rng| {
        let f = sample_reflected_bridge(cfg.grid, rng)?;
        Ok(bridge_row(&f, cfg.inner, width, rng, |b, out| {
            let (d, m) = (b.duration(), b.max);
            for (k, &t) in ts.iter().enumerate() {
                out[k] = ind(d > t);
            }
            out[3] = d * d;
            for (k, &x) in xs.iter().enumerate() {
                out[4 + k] = ind(m > x);
            }
            out[6] = m * m;
        }))
    })?;
    let mut out = Vec::new();
    for (k, &t) in ts.iter().enumerate() {
        out.push(EstimatorReport::from_values(format!("duration-tail({t})"), &cols[k]).with_target(targets::duration_tail(t)));
    }
    out.push(EstimatorReport::from_values("duration-second-moment", &cols[3]).with_target(targets::duration_second_moment()));
    for (k, &x) in xs.iter().enumerate() {
        out.push(EstimatorReport::from_values(format!("max-tail({x})"), &cols[4 + k]).with_target(targets::max_tail(x)));
    }
    out.push(EstimatorReport::from_values("max-second-moment", &cols[6]).with_target(targets::max_second_moment()));
    Ok(out)
}

/// Both sides of the disintegration of the excursion length measure, for
/// the functional `1{ζ(ê) > cutoff}`.
///
/// Three reports: the unrestricted form against `∫ dr/√((1−r)r³)`, the
/// uniform-mark form (straddles avoiding an independent uniform `u`)
/// against `∫ √((1−r)/r³) dr`, and their paired difference.
pub fn verify_disintegration(cfg: &VerifyConfig, cutoff: f64) -> Result<Vec<EstimatorReport>> {
    cfg.check(1000)?;
    if !(cutoff > 0.0 && cutoff < 1.0) {
        return Err(Error::Domain(format!("cutoff {cutoff} must lie in (0, 1)")));
    }
    let cols = replicate(cfg, 3, |rng| {
        let e = sample_excursion(cfg.grid, rng)?;
        Ok(mf_row(&e, cfg.inner, 3, rng, |v, rng, out| {
            let hit = ind(v.duration() > cutoff);
            let u: f64 = rng.random();
            let avoids = ind(u < v.frame().start || u > v.frame().finish);
            out[0] = hit;
            out[1] = hit * avoids;
            out[2] = hit * (1.0 - avoids);
        }))
    })?;
    let lhs = targets::duration_integral(cutoff, DurationDensity::Excursion, 20_000);
    let mark = targets::duration_integral(cutoff, DurationDensity::UniformMark, 20_000);
    Ok(vec![
        EstimatorReport::from_values("disintegration", &cols[0]).with_target(lhs).with_cutoff(cutoff),
        EstimatorReport::from_values("disintegration-uniform-mark", &cols[1])
            .with_target(mark)
            .with_cutoff(cutoff),
        EstimatorReport::from_values("disintegration-paired", &cols[2])
            .with_target(lhs - mark)
            .with_cutoff(cutoff),
    ])
}

/// Upper estimates of `∫ J(dT', dT'') Δ²` on trees of doubled reflected
/// bridges.
///
/// Moving the subtree above `v` changes `Δ` by at most its radius or its
/// mass; in `T_{2f}` the radius is `2·max` and the mass is the duration,
/// and the length measure of `T_{2f}` is twice `m_f`. This gives
/// `2 ∫ m_f max(2·max, ζ)²`, bounded by `8 E[max²] + 2 E[ζ²]`. A second
/// report uses the diameter `4·max` in place of the radius.
pub fn verify_jump_square(cfg: &VerifyConfig) -> Result<Vec<EstimatorReport>> {
    cfg.check(1000)?;
    let cols = replicate(cfg, 2, |rng| {
        let f = sample_reflected_bridge(cfg.grid, rng)?;
        Ok(bridge_row(&f, cfg.inner, 2, rng, |b, out| {
            let (d, m) = (b.duration(), b.max);
            out[0] = 2.0 * (2.0 * m).max(d).powi(2);
            out[1] = 2.0 * (4.0 * m).max(d).powi(2);
        }))
    })?;
    let bound = 8.0 * targets::max_second_moment() + 2.0 * targets::duration_second_moment();
    let wide = 32.0 * targets::max_second_moment() + 2.0 * targets::duration_second_moment();
    Ok(vec![
        EstimatorReport::from_values("jump-square", &cols[0]).with_target(bound),
        EstimatorReport::from_values("jump-square-diameter", &cols[1]).with_target(wide),
    ])
}

/// Symmetry of the relocation jump measure restricted to moved excursions
/// of duration `≥ cutoff`: `E[M_c(f) (h(f) k(f') − h(f') k(f))] = 0` with
/// `f' ~ κ₊(f)` normalized, `M_c(f)` its total mass, `h = max`, `k = area`.
pub fn verify_exchangeability(cfg: &VerifyConfig, cutoff: f64) -> Result<Vec<EstimatorReport>> {
    cfg.check(100)?;
    let cols = replicate(cfg, 1, |rng| {
        let f = sample_reflected_bridge(cfg.grid, rng)?;
        let mass = mf_row(&f, cfg.inner, 1, rng, |v, _, out| out[0] = ind(v.duration() >= cutoff))[0];
        let draw = match kappa_plus_sample(&f, cutoff, rng) {
            Ok(d) => d,
            // no excursion that long: the restricted kernel has mass 0
            Err(Error::Domain(_)) => return Ok(vec![0.0]),
            Err(e) => return Err(e),
        };
        let g = &draw.path;
        Ok(vec![mass * (f.max() * g.area() - g.max() * f.area())])
    })?;
    Ok(vec![EstimatorReport::from_values("exchangeability", &cols[0])
        .with_target(0.0)
        .with_cutoff(cutoff)])
}

/// Null standard deviation of `√m · D_m` under the Kolmogorov law.
const KOLMOGOROV_SD: f64 = 0.2603;

/// Height at time 1/2 of the rescaled encoding of uniform acyclic mappings
/// of `[n]`, with KS statistics against `|N(0, 1)|` (twice a reflected
/// bridge) and against the chi(3) law of twice an excursion.
///
/// A uniform acyclic mapping has `1 + Poisson(1)` components in the limit,
/// one of them holding all but `O(1)` vertices, so its encoding converges
/// to twice an excursion; the reflected bridge limit belongs to uniform
/// mappings, whose `~√n` cyclic points split the path into many trees.
/// Both KS reports have the 0.001-level critical value as their target,
/// so a negative z-score means the statistic is below it. The mean is
/// compared with `E[2e(1/2)] = 2√(2/π)`.
pub fn chain_convergence(n: usize, samples: usize, seed: u64) -> Result<Vec<EstimatorReport>> {
    if n < 2 || samples < 2 {
        return Err(Error::Domain(format!("need n >= 2 and samples >= 2, got {n} and {samples}")));
    }
    let chunks = rng::par_chunks(seed, samples, |count, rng| {
        (0..count)
            .map(|_| {
                let m = sample_uniform_acyclic(n, rng)?;
                Ok(encode(&m).values()[n] as f64 / (n as f64).sqrt())
            })
            .collect::<Result<Vec<f64>>>()
    });
    let mut xs = Vec::with_capacity(samples);
    for c in chunks {
        xs.extend(c?);
    }
    let crit = targets::ks_critical(samples, 0.001);
    let sd = KOLMOGOROV_SD / (samples as f64).sqrt();
    let bridge = targets::ks_statistic(&xs, |x| targets::half_normal_cdf(x, 1.0));
    let excursion = targets::ks_statistic(&xs, targets::doubled_excursion_midpoint_cdf);
    Ok(vec![
        EstimatorReport::new("convergence-ks", bridge, sd, samples).with_target(crit),
        EstimatorReport::new("convergence-ks-excursion", excursion, sd, samples).with_target(crit),
        EstimatorReport::from_values("convergence-mean", &xs).with_target(2.0 * (2.0 / std::f64::consts::PI).sqrt()),
    ])
}

/// A named verification run.
pub trait VerifySuite: Send + Sync {
    fn name(&self) -> &str;
    fn describe(&self) -> &str;
    fn run(&self, cfg: &VerifyConfig) -> Result<Vec<EstimatorReport>>;
}

struct ShiftedExcursion;
struct Disintegration;
struct JumpSquare;
struct Convergence;
struct Exchangeability;

impl VerifySuite for ShiftedExcursion {
    fn name(&self) -> &str {
        "shifted-excursion"
    }
    fn describe(&self) -> &str {
        "duration and height tails and second moments under the bridge length measure"
    }
    fn run(&self, cfg: &VerifyConfig) -> Result<Vec<EstimatorReport>> {
        verify_shifted_excursion(cfg)
    }
}

impl VerifySuite for Disintegration {
    fn name(&self) -> &str {
        "disintegration"
    }
    fn describe(&self) -> &str {
        "excursion length measure against its duration density, cutoff 0.2"
    }
    fn run(&self, cfg: &VerifyConfig) -> Result<Vec<EstimatorReport>> {
        verify_disintegration(cfg, 0.2)
    }
}

impl VerifySuite for JumpSquare {
    fn name(&self) -> &str {
        "jump-square"
    }
    fn describe(&self) -> &str {
        "upper estimate of the squared jump size integral"
    }
    fn run(&self, cfg: &VerifyConfig) -> Result<Vec<EstimatorReport>> {
        verify_jump_square(cfg)
    }
}

impl VerifySuite for Convergence {
    fn name(&self) -> &str {
        "convergence"
    }
    fn describe(&self) -> &str {
        "KS of the midpoint height of encoded uniform acyclic mappings (n = grid, samples = reps)"
    }
    fn run(&self, cfg: &VerifyConfig) -> Result<Vec<EstimatorReport>> {
        chain_convergence(cfg.grid, cfg.reps, cfg.seed)
    }
}

impl VerifySuite for Exchangeability {
    fn name(&self) -> &str {
        "exchangeability"
    }
    fn describe(&self) -> &str {
        "symmetry of the relocation jump measure, moved durations >= 0.05"
    }
    fn run(&self, cfg: &VerifyConfig) -> Result<Vec<EstimatorReport>> {
        verify_exchangeability(cfg, 0.05)
    }
}

/// Verification suites addressable by name.
pub struct SuiteRegistry {
    suites: BTreeMap<String, Arc<dyn VerifySuite>>,
}

impl SuiteRegistry {
    pub fn empty() -> Self {
        SuiteRegistry { suites: BTreeMap::new() }
    }

    pub fn with_builtins() -> Self {
        let mut r = SuiteRegistry::empty();
        r.register(Arc::new(ShiftedExcursion));
        r.register(Arc::new(Disintegration));
        r.register(Arc::new(JumpSquare));
        r.register(Arc::new(Convergence));
        r.register(Arc::new(Exchangeability));
        r
    }

    pub fn register(&mut self, suite: Arc<dyn VerifySuite>) {
        self.suites.insert(suite.name().to_string(), suite);
    }

    pub fn names(&self) -> Vec<&str> {
        self.suites.keys().map(String::as_str).collect()
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn VerifySuite>> {
        self.suites.get(name).cloned().ok_or_else(|| Error::UnknownName {
            kind: "suite",
            name: name.to_string(),
            available: self.names().join(", "),
        })
    }
}

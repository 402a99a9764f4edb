use std::cell::OnceCell;

use rand::Rng;
use serde::Serialize;

use super::{GridFunction, StraddleFrame};
use crate::error::{Error, Result};

/// Uniform sampler for points `(s, a)` of the region under the graph.
#[derive(Debug, Clone)]
pub struct AreaSampler {
    cumulative: Vec<f64>,
}

impl AreaSampler {
    pub fn new(f: &GridFunction) -> Result<Self> {
        let (ts, vs) = (f.times(), f.values());
        let mut cumulative = Vec::with_capacity(f.segments());
        let mut acc = 0.0;
        for k in 0..f.segments() {
            acc += 0.5 * (ts[k + 1] - ts[k]) * (vs[k] + vs[k + 1]);
            cumulative.push(acc);
        }
        if !(acc > 0.0) {
            return Err(Error::Domain("path has zero area".into()));
        }
        Ok(AreaSampler { cumulative })
    }

    pub fn area(&self) -> f64 {
        *self.cumulative.last().expect("nonempty")
    }

    pub fn sample<R: Rng + ?Sized>(&self, f: &GridFunction, rng: &mut R) -> (f64, f64) {
        let (ts, vs) = (f.times(), f.values());
        loop {
            let x = rng.random::<f64>() * self.area();
            let k = self.cumulative.partition_point(|&c| c <= x).min(self.cumulative.len() - 1);
            let (v0, v1) = (vs[k], vs[k + 1]);
            let u: f64 = rng.random();
            // time fraction with density proportional to the height
            let frac = if (v1 - v0).abs() <= 1e-12 * (v0 + v1) {
                u
            } else {
                ((v0 * v0 + (v1 * v1 - v0 * v0) * u).sqrt() - v0) / (v1 - v0)
            };
            let s = ts[k] + frac.clamp(0.0, 1.0) * (ts[k + 1] - ts[k]);
            let height = v0 + (v1 - v0) * frac;
            let a = rng.random::<f64>() * height;
            if s > 0.0 && s < f.zeta() && a < f.eval(s) {
                return (s, a);
            }
        }
    }
}

/// What a functional sees of a sampled straddle: the frame, plus lazily
/// computed pieces of the path.
pub struct MfView<'a> {
    f: &'a GridFunction,
    frame: StraddleFrame,
    max: OnceCell<f64>,
    parts: OnceCell<(GridFunction, GridFunction)>,
}

impl<'a> MfView<'a> {
    pub fn new(f: &'a GridFunction, frame: StraddleFrame) -> Self {
        MfView {
            f,
            frame,
            max: OnceCell::new(),
            parts: OnceCell::new(),
        }
    }

    pub fn frame(&self) -> &StraddleFrame {
        &self.frame
    }

    pub fn path(&self) -> &GridFunction {
        self.f
    }

    /// `s̄ − s̲`.
    pub fn duration(&self) -> f64 {
        self.frame.duration()
    }

    pub fn start(&self) -> f64 {
        self.frame.start
    }

    /// Height of the straddling excursion above its base level.
    pub fn max(&self) -> f64 {
        *self.max.get_or_init(|| {
            let (ts, vs) = (self.f.times(), self.f.values());
            let lo = ts.partition_point(|&t| t < self.frame.start);
            let hi = ts.partition_point(|&t| t <= self.frame.finish);
            vs[lo..hi].iter().copied().fold(self.frame.a, f64::max) - self.frame.a
        })
    }

    /// The straddling excursion of a path whose pieces between knots are
    /// Brownian bridges with variance `sigma2` per unit time, sampled
    /// conditionally on the knots.
    ///
    /// Knot sampling misses the dips of the continuous path below `a`
    /// inside cells, which merge excursions, and the part of each excursion
    /// above its highest knot. A cell with ends `x, y` dips below `a` with
    /// probability `exp(−2(x−a)(y−a)/(σ²Δt))` and exceeds `m` with
    /// probability `exp(−2(m−x)(m−y)/(σ²Δt))`. A dip is placed where the
    /// two chords to level `a` meet.
    pub fn bridge_straddle<R: Rng + ?Sized>(&self, sigma2: f64, rng: &mut R) -> BridgeStraddle {
        let (ts, vs) = (self.f.times(), self.f.values());
        let StraddleFrame { s, a, mut start, mut finish } = self.frame;
        let last = ts.len() - 1;
        let k = ts.partition_point(|&t| t <= s).clamp(1, last) - 1;
        // probabilities below e^{-72} are not drawn
        let dips = |j: usize, rng: &mut R| -> Option<f64> {
            let (x, y) = (vs[j] - a, vs[j + 1] - a);
            if x <= 0.0 || y <= 0.0 {
                return None;
            }
            let var = sigma2 * (ts[j + 1] - ts[j]);
            let e = 2.0 * x * y / var;
            if e > 72.0 || rng.random::<f64>() >= (-e).exp() {
                return None;
            }
            Some(ts[j] + (ts[j + 1] - ts[j]) * x / (x + y))
        };
        let (mut left, mut right) = (k, k);
        match dips(k, rng) {
            Some(t) if s < t => {
                finish = t;
                right = last;
            }
            Some(t) => {
                start = t;
                left = 0;
            }
            None => {}
        }
        let mut j = left;
        while j > 0 && ts[j] > start {
            j -= 1;
            if let Some(t) = dips(j, rng) {
                start = t;
                break;
            }
        }
        let mut j = right;
        while j + 1 < last && ts[j + 1] < finish {
            j += 1;
            if let Some(t) = dips(j, rng) {
                finish = t;
                break;
            }
        }
        let lo = ts.partition_point(|&t| t <= start).saturating_sub(1);
        let hi = ts.partition_point(|&t| t < finish).min(last);
        let knots = vs[lo + 1..hi].iter().copied().fold(self.f.eval(s), f64::max);
        let mut best = knots;
        for j in lo..hi {
            let (x, y) = (vs[j], vs[j + 1]);
            let var = sigma2 * (ts[j + 1] - ts[j]);
            if x.max(y) < knots - 6.0 * var.sqrt() {
                continue;
            }
            let u: f64 = rng.random();
            best = best.max(0.5 * (x + y + ((x - y).powi(2) - 2.0 * var * (1.0 - u).ln()).sqrt()));
        }
        BridgeStraddle {
            start,
            finish,
            max: best - a,
        }
    }

    fn parts(&self) -> &(GridFunction, GridFunction) {
        self.parts.get_or_init(|| self.f.excise_frame(&self.frame))
    }

    /// The straddling excursion shifted to start at `(0, 0)`.
    pub fn hat(&self) -> &GridFunction {
        &self.parts().0
    }

    /// The path with the straddling excursion removed.
    pub fn check(&self) -> &GridFunction {
        &self.parts().1
    }
}

/// Boundaries and height of a straddling excursion after bridge sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BridgeStraddle {
    pub start: f64,
    pub finish: f64,
    pub max: f64,
}

impl BridgeStraddle {
    pub fn duration(&self) -> f64 {
        self.finish - self.start
    }
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub estimate: f64,
    pub stderr: f64,
    pub reps: usize,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Estimate {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Estimate {
            estimate: mean,
            stderr: (var / n as f64).sqrt(),
            reps: n,
        }
    }
}

/// Importance-sampling estimate of `∫ g dm_f`.
///
/// Draws `(s, a)` uniformly under the graph and averages
/// `area · g / (s̄ − s̲)`, which is unbiased for the length-measure integral.
pub fn mf_integrate<R, G>(f: &GridFunction, g: G, reps: usize, rng: &mut R) -> Result<Estimate>
where
    R: Rng + ?Sized,
    G: Fn(&MfView) -> f64,
{
    if reps == 0 {
        return Err(Error::Domain("reps must be positive".into()));
    }
    let sampler = AreaSampler::new(f)?;
    Ok(Estimate::from_samples(&mf_samples(f, &sampler, &g, reps, rng)))
}

pub(crate) fn mf_samples<R, G>(
    f: &GridFunction,
    sampler: &AreaSampler,
    g: &G,
    reps: usize,
    rng: &mut R,
) -> Vec<f64>
where
    R: Rng + ?Sized,
    G: Fn(&MfView) -> f64,
{
    let area = sampler.area();
    (0..reps)
        .map(|_| {
            let (s, a) = sampler.sample(f, rng);
            let frame = f.straddle(s, a).expect("sampled point lies under the graph");
            let view = MfView::new(f, frame);
            area * g(&view) / view.duration()
        })
        .collect()
}

/// `∫ da Σ_{v ∈ G(f,a)} h(frame)` by the midpoint rule over `levels` levels,
/// enumerating the excursions above each level directly.
pub fn level_sweep<H>(f: &GridFunction, levels: usize, h: H) -> f64
where
    H: Fn(&StraddleFrame) -> f64,
{
    let top = f.max();
    if top <= 0.0 || levels == 0 {
        return 0.0;
    }
    let da = top / levels as f64;
    let (ts, vs) = (f.times(), f.values());
    let mut total = 0.0;
    for i in 0..levels {
        let a = (i as f64 + 0.5) * da;
        let mut start = None;
        for k in 0..f.segments() {
            let (v0, v1) = (vs[k], vs[k + 1]);
            let cross = |a: f64| ts[k] + (a - v0) / (v1 - v0) * (ts[k + 1] - ts[k]);
            if v0 <= a && v1 > a {
                start = Some(cross(a));
            } else if v0 > a && v1 <= a {
                let s0 = start.take().expect("down-crossing follows an up-crossing");
                let s1 = cross(a);
                let frame = StraddleFrame {
                    s: 0.5 * (s0 + s1),
                    a,
                    start: s0,
                    finish: s1,
                };
                total += h(&frame);
            }
        }
    }
    total * da
}

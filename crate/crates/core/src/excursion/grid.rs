use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A continuous nonnegative function on `[0, ζ]`, linear between knots.
///
/// Paths sampled on a uniform grid keep `uniform = true` and serialize
/// without knot times. Cutting and splicing at crossing points produces
/// off-grid knots, which are kept exactly rather than resampled.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    times: Vec<f64>,
    values: Vec<f64>,
    uniform: bool,
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    zeta: f64,
    values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    times: Option<Vec<f64>>,
}

impl Serialize for GridFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GridRepr {
            zeta: self.zeta(),
            values: self.values.clone(),
            times: (!self.uniform).then(|| self.times.clone()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GridFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = GridRepr::deserialize(d)?;
        let f = match repr.times {
            Some(times) => {
                let f = GridFunction::from_knots(times, repr.values).map_err(serde::de::Error::custom)?;
                if (f.zeta() - repr.zeta).abs() > 1e-12 * repr.zeta.max(1.0) {
                    return Err(serde::de::Error::custom("zeta disagrees with the last knot time"));
                }
                f
            }
            None => GridFunction::uniform(repr.zeta, repr.values).map_err(serde::de::Error::custom)?,
        };
        Ok(f)
    }
}

fn check_values(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidGrid("at least one value is required".into()));
    }
    if let Some(k) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidGrid(format!("value {k} = {} is negative or not finite", values[k])));
    }
    if values[0] != 0.0 || values[values.len() - 1] != 0.0 {
        return Err(Error::InvalidGrid("endpoint values must be 0".into()));
    }
    Ok(())
}

impl GridFunction {
    /// Values at `k·ζ/N`, `k = 0..=N`.
    pub fn uniform(zeta: f64, values: Vec<f64>) -> Result<Self> {
        check_values(&values)?;
        if !(zeta.is_finite() && zeta >= 0.0) || (values.len() > 1 && zeta == 0.0) {
            return Err(Error::InvalidGrid(format!("lifetime {zeta} must be positive")));
        }
        let n = values.len() - 1;
        let times = (0..=n)
            .map(|k| if n == 0 { 0.0 } else { zeta * k as f64 / n as f64 })
            .collect();
        Ok(GridFunction {
            times,
            values,
            uniform: true,
        })
    }

    /// Arbitrary knots; times must start at 0 and increase strictly.
    pub fn from_knots(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_values(&values)?;
        if times.len() != values.len() {
            return Err(Error::InvalidGrid("times and values differ in length".into()));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidGrid("first knot time must be 0".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::InvalidGrid("knot times must increase strictly".into()));
        }
        Ok(GridFunction {
            times,
            values,
            uniform: false,
        })
    }

    // Internal constructor for spliced paths. Drops repeated knots and
    // clamps tiny negative rounding noise.
    pub(crate) fn from_pieces(mut times: Vec<f64>, mut values: Vec<f64>) -> Self {
        let mut w = 0;
        for k in 0..times.len() {
            if w > 0 && times[k] <= times[w - 1] {
                // splice points appear twice; keep the first copy
                continue;
            }
            times[w] = times[k];
            values[w] = values[k].max(0.0);
            w += 1;
        }
        times.truncate(w);
        values.truncate(w);
        values[0] = 0.0;
        values[w - 1] = 0.0;
        GridFunction {
            times,
            values,
            uniform: false,
        }
    }

    /// The empty path of lifetime 0.
    pub fn empty() -> Self {
        GridFunction {
            times: vec![0.0],
            values: vec![0.0],
            uniform: true,
        }
    }

    pub fn zeta(&self) -> f64 {
        *self.times.last().expect("nonempty")
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of linear pieces.
    pub fn segments(&self) -> usize {
        self.values.len() - 1
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// Lifetime zero.
    pub fn is_degenerate(&self) -> bool {
        self.segments() == 0
    }

    /// Nominal grid step `ζ / segments`.
    pub fn step(&self) -> f64 {
        if self.is_degenerate() {
            0.0
        } else {
            self.zeta() / self.segments() as f64
        }
    }

    /// Strictly positive at every interior knot.
    pub fn is_excursion(&self) -> bool {
        let n = self.values.len();
        n >= 2 && self.values[1..n - 1].iter().all(|&v| v > 0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Area of the region between the graph and the time axis.
    pub fn area(&self) -> f64 {
        self.times
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
            .sum()
    }

    /// Index `k` with `times[k] <= t < times[k + 1]`, clamped to the last piece.
    pub(crate) fn segment_of(&self, t: f64) -> usize {
        let k = self.times.partition_point(|&x| x <= t);
        k.saturating_sub(1).min(self.segments().saturating_sub(1))
    }

    /// Value at `t`; zero outside `[0, ζ]`.
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 || t >= self.zeta() || self.is_degenerate() {
            return 0.0;
        }
        let k = self.segment_of(t);
        self.interp(k, t)
    }

    fn interp(&self, k: usize, t: f64) -> f64 {
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let (v0, v1) = (self.values[k], self.values[k + 1]);
        if t == t0 {
            return v0;
        }
        if t == t1 {
            return v1;
        }
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    // Time in [times[k], times[k+1]] where the piece crosses level a.
    fn crossing(&self, k: usize, a: f64) -> f64 {
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let (v0, v1) = (self.values[k], self.values[k + 1]);
        if v0 == a {
            return t0;
        }
        if v1 == a {
            return t1;
        }
        (t0 + (a - v0) / (v1 - v0) * (t1 - t0)).clamp(t0, t1)
    }

    /// Knots of `f` restricted to `[t0, t1]`, endpoints included.
    pub(crate) fn piece(&self, t0: f64, t1: f64) -> (Vec<f64>, Vec<f64>) {
        let mut ts = vec![t0];
        let mut vs = vec![self.eval_closed(t0)];
        let lo = self.times.partition_point(|&x| x <= t0);
        let hi = self.times.partition_point(|&x| x < t1);
        for k in lo..hi {
            ts.push(self.times[k]);
            vs.push(self.values[k]);
        }
        if t1 > t0 {
            ts.push(t1);
            vs.push(self.eval_closed(t1));
        }
        (ts, vs)
    }

    // eval that does not zero the interior-boundary knots
    fn eval_closed(&self, t: f64) -> f64 {
        if self.is_degenerate() {
            return 0.0;
        }
        let k = self.segment_of(t.clamp(0.0, self.zeta()));
        self.interp(k, t.clamp(0.0, self.zeta()))
    }

    /// The excursion above level `a` straddling time `s`.
    pub fn straddle(&self, s: f64, a: f64) -> Result<StraddleFrame> {
        if !(s > 0.0 && s < self.zeta()) {
            return Err(Error::Domain(format!("time {s} is outside (0, {})", self.zeta())));
        }
        let k = self.segment_of(s);
        let fs = self.interp(k, s);
        if !(a >= 0.0 && a < fs) {
            return Err(Error::Domain(format!("level {a} is not in [0, f(s)) = [0, {fs})")));
        }
        // last knot at or before s with value <= a, then the crossing after it
        let mut j = k;
        let start = loop {
            if self.values[j] <= a {
                break self.crossing(j, a);
            }
            if j == 0 {
                break 0.0;
            }
            j -= 1;
        };
        let mut j = k + 1;
        let finish = loop {
            if self.values[j] <= a {
                break self.crossing(j - 1, a);
            }
            j += 1;
        };
        Ok(StraddleFrame { s, a, start, finish })
    }

    /// Sub-excursion straddling `(s, a)` and the remainder with the gap closed.
    pub fn excise(&self, s: f64, a: f64) -> Result<Excised> {
        let frame = self.straddle(s, a)?;
        let (hat, check) = self.excise_frame(&frame);
        Ok(Excised { frame, hat, check })
    }

    pub(crate) fn excise_frame(&self, fr: &StraddleFrame) -> (GridFunction, GridFunction) {
        let (ts, vs) = self.piece(fr.start, fr.finish);
        let hat = GridFunction::from_pieces(
            ts.iter().map(|t| t - fr.start).collect(),
            vs.iter().map(|v| v - fr.a).collect(),
        );
        let d = fr.finish - fr.start;
        let (mut ts, mut vs) = self.piece(0.0, fr.start);
        let (t2, v2) = self.piece(fr.finish, self.zeta());
        ts.extend(t2.iter().map(|t| t - d));
        vs.extend(v2);
        let check = if self.zeta() - d <= 0.0 {
            GridFunction::empty()
        } else {
            GridFunction::from_pieces(ts, vs)
        };
        (hat, check)
    }

    /// End `δ(f, v)` of the excursion above level `f(v)` that starts at `v`.
    pub fn excursion_end(&self, v: f64) -> Result<f64> {
        let zeta = self.zeta();
        if !(v >= 0.0 && v < zeta) {
            return Err(Error::Domain(format!("start {v} is outside [0, {zeta})")));
        }
        let a = self.eval_closed(v);
        let j0 = self.times.partition_point(|&x| x <= v);
        if j0 >= self.times.len() || self.values[j0] <= a {
            return Err(Error::Domain(format!("no excursion above level {a} starts at time {v}")));
        }
        let mut j = j0;
        while self.values[j] > a {
            j += 1;
        }
        Ok(self.crossing(j - 1, a))
    }

    /// The excursion starting at `v`, shifted to start at `(0, 0)`.
    pub fn excursion_starting_at(&self, v: f64) -> Result<GridFunction> {
        let end = self.excursion_end(v)?;
        let a = self.eval_closed(v);
        let (ts, vs) = self.piece(v, end);
        Ok(GridFunction::from_pieces(
            ts.iter().map(|t| t - v).collect(),
            vs.iter().map(|x| x - a).collect(),
        ))
    }

    /// `√c · f(·/c)`.
    pub fn brownian_scale(&self, c: f64) -> Result<GridFunction> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Domain(format!("scale factor {c} must be positive")));
        }
        let sc = c.sqrt();
        Ok(GridFunction {
            times: self.times.iter().map(|t| t * c).collect(),
            values: self.values.iter().map(|v| v * sc).collect(),
            uniform: self.uniform,
        })
    }

    /// Resamples onto `n` uniform pieces by linear interpolation.
    pub fn resample(&self, n: usize) -> GridFunction {
        let zeta = self.zeta();
        let values = (0..=n)
            .map(|k| self.eval(zeta * k as f64 / n as f64))
            .collect();
        GridFunction::uniform(zeta, values).expect("resampled path is valid")
    }
}

/// A point `(s, a)` under the graph and the excursion straddling it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StraddleFrame {
    pub s: f64,
    pub a: f64,
    pub start: f64,
    pub finish: f64,
}

impl StraddleFrame {
    pub fn duration(&self) -> f64 {
        self.finish - self.start
    }
}

#[derive(Debug, Clone)]
pub struct Excised {
    pub frame: StraddleFrame,
    pub hat: GridFunction,
    pub check: GridFunction,
}

/// Inserts `S_r e1` into `S_{1-r} e2` at the fraction `v` of the latter's length.
pub fn insert_excursion(e1: &GridFunction, e2: &GridFunction, v: f64, r: f64) -> Result<GridFunction> {
    if !(0.0..=1.0).contains(&v) || !(r > 0.0 && r <= 1.0) {
        return Err(Error::Domain(format!("need v in [0,1] and r in (0,1], got v = {v}, r = {r}")));
    }
    let a = e1.brownian_scale(r / e1.zeta())?;
    if r == 1.0 {
        return Ok(a);
    }
    let b = e2.brownian_scale((1.0 - r) / e2.zeta())?;
    let cut = (1.0 - r) * v;
    let lift = b.eval_closed(cut);
    let (mut ts, mut vs) = b.piece(0.0, cut);
    ts.extend(a.times.iter().map(|t| t + cut));
    vs.extend(a.values.iter().map(|x| x + lift));
    let (t2, v2) = b.piece(cut, b.zeta());
    ts.extend(t2.iter().map(|t| t + r));
    vs.extend(v2);
    Ok(GridFunction::from_pieces(ts, vs))
}

/// `Ũ(u, v, r)`: where a uniform mark `u` of the host lands after insertion.
pub fn u_tilde(u: f64, v: f64, r: f64) -> f64 {
    if u <= v {
        (1.0 - r) * u
    } else {
        r + (1.0 - r) * u
    }
}

/// `Ŭ(u, v, r)`: inverse of [`u_tilde`] on the complement of the inserted block.
pub fn u_breve(u: f64, v: f64, r: f64) -> Result<f64> {
    let lo = (1.0 - r) * v;
    if u < lo {
        Ok(u / (1.0 - r))
    } else if u > lo + r {
        Ok((u - r) / (1.0 - r))
    } else {
        Err(Error::Domain(format!("time {u} lies in the inserted block [{lo}, {}]", lo + r)))
    }
}

/// `Č(f, u, s, a)`: where `u` moves when the straddling excursion is excised.
pub fn u_check(frame: &StraddleFrame, u: f64) -> Result<f64> {
    if u < frame.start {
        Ok(u)
    } else if u > frame.finish {
        Ok(u - frame.duration())
    } else {
        Err(Error::Domain(format!(
            "time {u} lies in the excised excursion [{}, {}]",
            frame.start, frame.finish
        )))
    }
}

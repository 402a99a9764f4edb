use std::collections::BTreeMap;
use std::sync::Arc;

use super::GridFunction;
use crate::error::{Error, Result};

/// Local time at zero sampled at the knots of a path, with the split time.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTime {
    /// `L(t_k)` at each knot; nondecreasing.
    pub values: Vec<f64>,
    /// The split time `U(f)`.
    pub u: f64,
    /// No zero strictly inside `(0, ζ)`: `L` is flat and `U = ζ`.
    pub degenerate: bool,
}

impl LocalTime {
    pub fn total(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    fn flat(f: &GridFunction) -> Self {
        LocalTime {
            values: vec![0.0; f.values().len()],
            u: f.zeta(),
            degenerate: true,
        }
    }
}

/// A way of turning a sampled path into a local-time profile.
pub trait LocalTimeEstimator: Send + Sync {
    fn name(&self) -> &str;
    fn estimate(&self, f: &GridFunction) -> LocalTime;
}

// Knot indices where the path touches zero, always including both ends.
fn zero_knots(f: &GridFunction) -> Vec<usize> {
    f.values()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v == 0.0)
        .map(|(k, _)| k)
        .collect()
}

/// Zero counting, scaled by `√step` as for a reflected simple walk with
/// space step `√step`.
///
/// The zero at time 0 carries weight 2 when the number of interior zeros is
/// even, so there is always a zero with equal weight on either side. That
/// zero is `U`, and the counts to its left and right agree exactly, which
/// is what makes the bridge/excursion transform invert on the grid.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroCount;

/// Zero structure shared by the counting estimator and the transforms.
struct Zeros {
    knots: Vec<usize>,
    // weight of the zero at time 0
    w0: usize,
    // index into `knots` of the split zero
    split: usize,
}

impl Zeros {
    fn of(f: &GridFunction) -> Option<Zeros> {
        let knots = zero_knots(f);
        if knots.len() <= 2 {
            return None;
        }
        let interior = knots.len() - 2;
        let w0 = if interior % 2 == 0 { 2 } else { 1 };
        let split = if interior % 2 == 0 { interior / 2 } else { (interior + 1) / 2 };
        Some(Zeros { knots, w0, split })
    }
}

impl LocalTimeEstimator for ZeroCount {
    fn name(&self) -> &str {
        "zero-count"
    }

    fn estimate(&self, f: &GridFunction) -> LocalTime {
        let Some(z) = Zeros::of(f) else {
            return LocalTime::flat(f);
        };
        let scale = f.step().sqrt();
        let mut values = Vec::with_capacity(f.values().len());
        let mut count = 0usize;
        let mut next = 0;
        for k in 0..f.values().len() {
            // zeros in [0, t_k)
            values.push(count as f64 * scale);
            if next < z.knots.len() && z.knots[next] == k {
                count += if k == 0 { z.w0 } else { 1 };
                next += 1;
            }
        }
        LocalTime {
            values,
            u: f.times()[z.knots[z.split]],
            degenerate: false,
        }
    }
}

/// `(1/2ε) ∫_0^t 1{f < ε}` with `ε = cells · √step`.
#[derive(Debug, Clone, Copy)]
pub struct Occupation {
    pub cells: f64,
}

impl Default for Occupation {
    fn default() -> Self {
        Occupation { cells: 5.0 }
    }
}

// Length of {s in [t0,t1] : linear piece < eps}.
fn time_below(t0: f64, t1: f64, v0: f64, v1: f64, eps: f64) -> f64 {
    let dt = t1 - t0;
    let (lo, hi) = if v0 <= v1 { (v0, v1) } else { (v1, v0) };
    if hi < eps {
        dt
    } else if lo >= eps {
        0.0
    } else {
        dt * (eps - lo) / (hi - lo)
    }
}

impl LocalTimeEstimator for Occupation {
    fn name(&self) -> &str {
        "occupation"
    }

    fn estimate(&self, f: &GridFunction) -> LocalTime {
        if Zeros::of(f).is_none() {
            return LocalTime::flat(f);
        }
        let eps = self.cells * f.step().sqrt();
        let (ts, vs) = (f.times(), f.values());
        let mut values = vec![0.0];
        for k in 0..f.segments() {
            let add = time_below(ts[k], ts[k + 1], vs[k], vs[k + 1], eps) / (2.0 * eps);
            values.push(values[k] + add);
        }
        let half = values[values.len() - 1] / 2.0;
        let k = values.partition_point(|&l| l <= half);
        let u = ts[k.saturating_sub(1)];
        LocalTime {
            values,
            u,
            degenerate: false,
        }
    }
}

/// Local-time estimators addressable by name.
#[derive(Clone, Default)]
pub struct LocalTimeRegistry {
    entries: BTreeMap<String, Arc<dyn LocalTimeEstimator>>,
}

impl LocalTimeRegistry {
    pub fn with_builtins() -> Self {
        let mut reg = Self::default();
        reg.register(Arc::new(ZeroCount));
        reg.register(Arc::new(Occupation::default()));
        reg
    }

    pub fn register(&mut self, est: Arc<dyn LocalTimeEstimator>) {
        self.entries.insert(est.name().to_string(), est);
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn LocalTimeEstimator>> {
        self.entries.get(name).cloned().ok_or_else(|| Error::UnknownName {
            kind: "local-time estimator",
            name: name.to_string(),
            available: self.names().join(", "),
        })
    }
}

/// Local time and split time by zero counting.
pub fn local_time_and_split(f: &GridFunction) -> LocalTime {
    ZeroCount.estimate(f)
}

/// Excursion obtained from a bridge by lifting with `K→`.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgeSplit {
    pub excursion: GridFunction,
    pub u: f64,
    pub degenerate: bool,
}

/// `e = K→(·; f) + f` and `u = U(f)`.
///
/// Before `U`, `K→` counts the zeros in `[0, t)`; after it, the zeros in
/// `(t, ζ]`. Both counts agree at `U`.
pub fn excursion_from_bridge(f: &GridFunction) -> BridgeSplit {
    let Some(z) = Zeros::of(f) else {
        return BridgeSplit {
            excursion: f.clone(),
            u: f.zeta(),
            degenerate: true,
        };
    };
    let scale = f.step().sqrt();
    let n = f.values().len();
    let split_knot = z.knots[z.split];
    let mut k_arrow = vec![0.0; n];
    let mut count = 0usize;
    let mut next = 0;
    for (k, slot) in k_arrow.iter_mut().enumerate().take(split_knot + 1) {
        *slot = count as f64 * scale;
        if next < z.knots.len() && z.knots[next] == k {
            count += if k == 0 { z.w0 } else { 1 };
            next += 1;
        }
    }
    let mut count = 0usize;
    let mut next = z.knots.len();
    for k in (split_knot..n).rev() {
        k_arrow[k] = count as f64 * scale;
        if next > 0 && z.knots[next - 1] == k {
            count += 1;
            next -= 1;
        }
    }
    debug_assert_eq!(count, z.knots.len() - z.split);
    let values = f.values().iter().zip(&k_arrow).map(|(a, b)| a + b).collect();
    BridgeSplit {
        excursion: rebuild(f, values),
        u: f.times()[split_knot],
        degenerate: false,
    }
}

fn rebuild(template: &GridFunction, values: Vec<f64>) -> GridFunction {
    if template.is_uniform() {
        GridFunction::uniform(template.zeta(), values).expect("same grid")
    } else {
        GridFunction::from_knots(template.times().to_vec(), values).expect("same knots")
    }
}

/// `K←(t; e, u)`: the minimum of `e` between `t` and `u`.
pub fn k_left(e: &GridFunction, u: f64) -> Vec<f64> {
    let (ts, vs) = (e.times(), e.values());
    let eu = e.eval(u);
    let mut out = vec![0.0; vs.len()];
    let mut m = eu;
    for k in (0..vs.len()).rev().filter(|&k| ts[k] <= u) {
        m = m.min(vs[k]);
        out[k] = m;
    }
    let mut m = eu;
    for k in (0..vs.len()).filter(|&k| ts[k] >= u) {
        m = m.min(vs[k]);
        out[k] = m;
    }
    out
}

/// `f = e − K←(·; e, u)`; a knot is added at `u` if it falls between knots.
pub fn bridge_from_excursion(e: &GridFunction, u: f64) -> Result<GridFunction> {
    let zeta = e.zeta();
    if !(0.0..=zeta).contains(&u) {
        return Err(Error::Domain(format!("split time {u} is outside [0, {zeta}]")));
    }
    let k = k_left(e, u);
    let values: Vec<f64> = e.values().iter().zip(&k).map(|(a, b)| a - b).collect();
    if e.times().binary_search_by(|t| t.total_cmp(&u)).is_ok() {
        return Ok(rebuild(e, values));
    }
    let at = e.times().partition_point(|&t| t < u);
    let mut ts = e.times().to_vec();
    let mut vs = values;
    ts.insert(at, u);
    vs.insert(at, 0.0);
    GridFunction::from_knots(ts, vs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice(v: &[i64]) -> GridFunction {
        GridFunction::uniform((v.len() - 1) as f64, v.iter().map(|&x| x as f64).collect()).unwrap()
    }

    #[test]
    fn single_excursion_is_degenerate() {
        let f = lattice(&[0, 1, 2, 1, 0]);
        let lt = local_time_and_split(&f);
        assert!(lt.degenerate);
        assert_eq!(lt.u, 4.0);
        assert!(lt.values.iter().all(|&v| v == 0.0));
        let s = excursion_from_bridge(&f);
        assert!(s.degenerate);
        assert_eq!(s.excursion, f);
        assert_eq!(bridge_from_excursion(&s.excursion, s.u).unwrap(), f);
    }

    #[test]
    fn one_interior_zero_splits_there() {
        let f = lattice(&[0, 1, 0, 1, 0]);
        let lt = local_time_and_split(&f);
        assert_eq!(lt.u, 2.0);
        assert_eq!(lt.values, vec![0.0, 1.0, 1.0, 2.0, 2.0]);
        let s = excursion_from_bridge(&f);
        assert_eq!(s.excursion.values(), &[0.0, 2.0, 1.0, 2.0, 0.0]);
        assert!(s.excursion.is_excursion());
        assert_eq!(bridge_from_excursion(&s.excursion, s.u).unwrap(), f);
    }

    #[test]
    fn two_interior_zeros_balance() {
        let f = lattice(&[0, 1, 0, 1, 0, 1, 0]);
        let s = excursion_from_bridge(&f);
        assert_eq!(s.u, 2.0);
        assert_eq!(s.excursion.values(), &[0.0, 3.0, 2.0, 3.0, 1.0, 2.0, 0.0]);
        assert_eq!(bridge_from_excursion(&s.excursion, s.u).unwrap(), f);
    }

    #[test]
    fn tent_maps_to_zero() {
        let e = GridFunction::uniform(1.0, vec![0.0, 0.25, 0.5, 0.25, 0.0]).unwrap();
        let f = bridge_from_excursion(&e, 0.5).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0));
        let f = bridge_from_excursion(&e, 1.0).unwrap();
        assert_eq!(f.values()[4], 0.0);
        let f = bridge_from_excursion(&e, 0.4).unwrap();
        assert_eq!(f.eval(0.4), 0.0);
        assert_eq!(f.segments(), 5);
    }

    #[test]
    fn occupation_counts_time_near_zero() {
        let f = lattice(&[0, 1, 0, 1, 0]);
        let lt = Occupation { cells: 0.5 }.estimate(&f);
        // each of the four pieces spends 0.5 below 0.5
        assert_eq!(lt.total(), 2.0);
        assert_eq!(lt.u, 2.0);
        let reg = LocalTimeRegistry::with_builtins();
        assert_eq!(reg.names(), ["occupation", "zero-count"]);
        assert!(reg.get("brownian").is_err());
    }
}

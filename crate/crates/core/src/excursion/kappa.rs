use rand::Rng;
use serde::Serialize;

use super::measure::AreaSampler;
use super::GridFunction;
use crate::error::{Error, Result};
use crate::path_codec::LabeledPath;

/// One draw from the relocation kernel restricted to excursions of
/// duration at least `cutoff`.
#[derive(Debug, Clone)]
pub struct KappaDraw {
    pub path: GridFunction,
    /// Start of the moved excursion.
    pub v: f64,
    /// Insertion time, in the coordinates of the input path.
    pub w: f64,
    pub duration: f64,
    pub cutoff: f64,
    /// Number of area samples drawn before acceptance.
    pub attempts: u64,
}

/// Default cutoff: two grid pieces.
pub fn default_cutoff(f: &GridFunction) -> f64 {
    2.0 * f.step()
}

// Longest excursion above level 0, an upper bound for every straddle duration.
fn longest_excursion(f: &GridFunction) -> f64 {
    let (ts, vs) = (f.times(), f.values());
    let mut best: f64 = 0.0;
    let mut last_zero = 0.0;
    for k in 1..vs.len() {
        if vs[k] == 0.0 {
            best = best.max(ts[k] - last_zero);
            last_zero = ts[k];
        }
    }
    best
}

/// Relocation kernel draw on a continuum path.
///
/// The start `v` is drawn from the length measure restricted to durations
/// `≥ cutoff`: a uniform point under the graph is accepted with probability
/// `cutoff / duration`. The insertion time is uniform on `[0, ζ] \ [v, δ]`.
pub fn kappa_plus_sample<R: Rng + ?Sized>(f: &GridFunction, cutoff: f64, rng: &mut R) -> Result<KappaDraw> {
    if !(cutoff > 0.0) {
        return Err(Error::Domain(format!("cutoff {cutoff} must be positive")));
    }
    let sampler = AreaSampler::new(f)?;
    if longest_excursion(f) < cutoff {
        return Err(Error::Domain(format!("no excursion of duration >= cutoff {cutoff}")));
    }
    let zeta = f.zeta();
    let mut attempts = 0u64;
    loop {
        attempts += 1;
        let (s, a) = sampler.sample(f, rng);
        let frame = f.straddle(s, a)?;
        let d = frame.duration();
        if d < cutoff || rng.random::<f64>() * d >= cutoff {
            continue;
        }
        if d >= zeta {
            // the excursion fills the whole lifetime; nowhere to move it
            return Ok(KappaDraw {
                path: f.clone(),
                v: frame.start,
                w: frame.start,
                duration: d,
                cutoff,
                attempts,
            });
        }
        let x = rng.random::<f64>() * (zeta - d);
        let w = if x < frame.start { x } else { x + d };
        let path = relocate_span(f, frame.start, frame.finish, w);
        return Ok(KappaDraw {
            path,
            v: frame.start,
            w,
            duration: d,
            cutoff,
            attempts,
        });
    }
}

// Relocation with the excursion span already known.
fn relocate_span(f: &GridFunction, v: f64, end: f64, w: f64) -> GridFunction {
    let d = end - v;
    let zeta = f.zeta();
    let (et, ev) = f.piece(v, end);
    let a = ev[0];
    let fw = f.piece(w, w).1[0];
    let mut ts = Vec::with_capacity(f.times().len() + 4);
    let mut vs = Vec::with_capacity(f.times().len() + 4);
    let mut push = |(t, x): (Vec<f64>, Vec<f64>), shift: f64, lift: f64| {
        ts.extend(t.iter().map(|t| t + shift));
        vs.extend(x.iter().map(|x| x + lift));
    };
    if w > v {
        push(f.piece(0.0, v), 0.0, 0.0);
        push(f.piece(end, w), -d, 0.0);
        push((et, ev), w - d - v, fw - a);
        push(f.piece(w, zeta), 0.0, 0.0);
    } else {
        push(f.piece(0.0, w), 0.0, 0.0);
        push((et, ev), w - v, fw - a);
        push(f.piece(w, v), d, 0.0);
        push(f.piece(end, zeta), 0.0, 0.0);
    }
    GridFunction::from_pieces(ts, vs)
}

impl GridFunction {
    /// Moves the excursion starting at `v` so that it starts at `w`, closing
    /// the gap it leaves behind.
    pub fn relocate(&self, v: f64, w: f64) -> Result<GridFunction> {
        let end = self.excursion_end(v)?;
        let zeta = self.zeta();
        if w == v || w == end {
            return Ok(self.clone());
        }
        if !(0.0..=zeta).contains(&w) || (w > v && w < end) {
            return Err(Error::Domain(format!(
                "insertion time {w} lies inside the moved excursion [{v}, {end}] or outside [0, {zeta}]"
            )));
        }
        Ok(relocate_span(self, v, end, w))
    }
}

/// One lattice relocation draw.
#[derive(Debug, Clone, Serialize)]
pub struct LatticeKappaDraw {
    /// Up-step time where the moved excursion starts.
    pub v: usize,
    /// Insertion time, in the coordinates of the input path.
    pub w: usize,
    /// Label of the vertex whose subtree moved.
    pub vertex: usize,
    pub attempts: u64,
}

/// Relocation kernel at lattice resolution with a cutoff of one edge.
///
/// Cells `[k, k+1] × [j, j+1)` under `max(v_k, v_{k+1})` are drawn
/// uniformly; the excursion above level `j` through that cell has `D`
/// such cells, so accepting with probability `2 / D` picks every
/// excursion, hence every vertex, with equal probability. The insertion
/// point is uniform over time 0 and the first-visit times of the vertices
/// outside the moved subtree.
pub fn kappa_plus_lattice<R: Rng + ?Sized>(p: &LabeledPath, rng: &mut R) -> Result<(LabeledPath, LatticeKappaDraw)> {
    let vals = p.path.values();
    let steps = vals.len() - 1;
    let mut cumulative = Vec::with_capacity(steps);
    let mut acc = 0u64;
    for k in 0..steps {
        acc += vals[k].max(vals[k + 1]) as u64;
        cumulative.push(acc);
    }
    let mut attempts = 0;
    let (v, end) = loop {
        attempts += 1;
        let x = rng.random_range(0..acc);
        let k = cumulative.partition_point(|&c| c <= x);
        let j = (x - if k == 0 { 0 } else { cumulative[k - 1] }) as i64;
        let mut start = k;
        while vals[start] != j {
            start -= 1;
        }
        let mut finish = k + 1;
        while vals[finish] != j {
            finish += 1;
        }
        let d = (finish - start) as u64;
        if rng.random_range(0..d) < 2 {
            break (start, finish);
        }
    };
    // slots: time 0, then the end of every up-step outside [v, end)
    let slots: Vec<usize> = std::iter::once(0)
        .chain((0..steps).filter(|&k| (k < v || k >= end) && vals[k + 1] > vals[k]).map(|k| k + 1))
        .collect();
    let w = slots[rng.random_range(0..slots.len())];
    let out = p.relocate(v, w)?;
    let draw = LatticeKappaDraw {
        v,
        w,
        vertex: p.labels[v],
        attempts,
    };
    Ok((out, draw))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::AcyclicMapping;
    use crate::path_codec::encode_labeled;
    use crate::rng;

    #[test]
    fn continuum_draw_preserves_lifetime_and_area_scale() {
        let f = GridFunction::uniform(1.0, vec![0.0, 0.3, 0.1, 0.5, 0.2, 0.4, 0.0, 0.2, 0.0]).unwrap();
        let mut r = rng::master(8);
        for _ in 0..200 {
            let d = kappa_plus_sample(&f, default_cutoff(&f), &mut r).unwrap();
            assert!((d.path.zeta() - 1.0).abs() < 1e-12);
            assert!(d.path.values().iter().all(|&x| x >= 0.0));
            assert!(d.duration >= d.cutoff);
            assert!(d.w < d.v || d.w >= d.v + d.duration || d.duration >= 1.0);
        }
        assert!(kappa_plus_sample(&f, 2.0, &mut r).is_err());
    }

    #[test]
    fn lattice_draw_is_a_chain_move() {
        let m = AcyclicMapping::new(vec![1, 1, 2, 2, 3]).unwrap();
        let lp = encode_labeled(&m);
        let mut r = rng::master(4);
        for _ in 0..200 {
            let (out, draw) = kappa_plus_lattice(&lp, &mut r).unwrap();
            let m2 = out.to_mapping();
            let differs: Vec<usize> = (1..=5).filter(|&i| m2.apply(i) != m.apply(i)).collect();
            assert!(differs.is_empty() || differs == [draw.vertex]);
        }
    }
}

use serde::Serialize;

use super::RootedWeightedTree;
use crate::error::{Error, Result};

/// Largest vertex count for which the distance is found by exhaustive search.
pub const MAX_EXACT_VERTICES: usize = 8;

/// Value of the weighted rooted distortion distance `Δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DeltaValue {
    Exact { value: f64 },
    Bracket { lower: f64, upper: f64 },
}

impl DeltaValue {
    pub fn lower(&self) -> f64 {
        match *self {
            DeltaValue::Exact { value } => value,
            DeltaValue::Bracket { lower, .. } => lower,
        }
    }

    pub fn upper(&self) -> f64 {
        match *self {
            DeltaValue::Exact { value } => value,
            DeltaValue::Bracket { upper, .. } => upper,
        }
    }
}

/// Exact `Δ` when both trees are small, a bracket otherwise.
pub fn delta_ghwr(x: &RootedWeightedTree, y: &RootedWeightedTree) -> DeltaValue {
    if x.len() <= MAX_EXACT_VERTICES && y.len() <= MAX_EXACT_VERTICES {
        DeltaValue::Exact {
            value: delta_ghwr_exact(x, y).expect("small trees"),
        }
    } else {
        let (lower, upper) = delta_bracket(x, y);
        DeltaValue::Bracket { lower, upper }
    }
}

/// Bracket on `d_GHwr` from `½ Δ^{1/4} ≤ d ≤ Δ^{1/4}`.
pub fn d_ghwr_bracket(x: &RootedWeightedTree, y: &RootedWeightedTree) -> (f64, f64) {
    let d = delta_ghwr(x, y);
    (0.5 * d.lower().powf(0.25), d.upper().powf(0.25))
}

/// `max(dis f, d_P(f_* ν_X, ν_Y))` for a root-preserving vertex map `f`.
pub fn direction_cost(x: &RootedWeightedTree, y: &RootedWeightedTree, f: &[usize]) -> Result<f64> {
    if f.len() != x.len() || f.iter().any(|&v| v >= y.len()) || f[0] != 0 {
        return Err(Error::Domain("map must send every vertex into Y and the root to the root".into()));
    }
    let (dx, dy) = (x.distance_matrix(), y.distance_matrix());
    let mut dis: f64 = 0.0;
    for a in 0..f.len() {
        for b in 0..a {
            dis = dis.max((dx[a][b] - dy[f[a]][f[b]]).abs());
        }
    }
    let mut push = vec![0.0; y.len()];
    for (a, &b) in f.iter().enumerate() {
        push[b] += x.mass()[a];
    }
    Ok(dis.max(super::prohorov(&dy, &push, y.mass())?))
}

/// Exhaustive branch and bound over root-preserving vertex maps in both
/// directions.
pub fn delta_ghwr_exact(x: &RootedWeightedTree, y: &RootedWeightedTree) -> Result<f64> {
    if x.len() > MAX_EXACT_VERTICES || y.len() > MAX_EXACT_VERTICES {
        return Err(Error::Domain(format!(
            "exact search needs at most {MAX_EXACT_VERTICES} vertices, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    Ok(one_way(x, y).max(one_way(y, x)))
}

// Prohorov distance to ν_Y for measures on the vertices of a small Y.
struct Target {
    radii: Vec<f64>,
    // neighbor masks per radius
    nb: Vec<Vec<u16>>,
    beta_of: Vec<f64>,
}

impl Target {
    fn new(d: &[Vec<f64>], beta: &[f64]) -> Self {
        let n = d.len();
        let mut radii: Vec<f64> = d.iter().flatten().copied().collect();
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        let nb = radii
            .iter()
            .map(|&r| {
                (0..n)
                    .map(|a| (0..n).filter(|&b| d[a][b] <= r).fold(0u16, |m, b| m | 1 << b))
                    .collect()
            })
            .collect();
        let mut beta_of = vec![0.0; 1 << n];
        for c in 1..1usize << n {
            let low = c.trailing_zeros() as usize;
            beta_of[c] = beta_of[c & (c - 1)] + beta[low];
        }
        Target { radii, nb, beta_of }
    }

    fn prohorov(&self, alpha: &[f64], best: f64) -> f64 {
        let n = alpha.len();
        let size = 1usize << n;
        let mut alpha_of = [0.0f64; 1 << MAX_EXACT_VERTICES];
        let mut cover = [0u16; 1 << MAX_EXACT_VERTICES];
        for c in 1..size {
            let low = c.trailing_zeros() as usize;
            alpha_of[c] = alpha_of[c & (c - 1)] + alpha[low];
        }
        let mut out = *self.radii.last().expect("nonempty");
        for (k, &r) in self.radii.iter().enumerate() {
            if r >= out.min(best) {
                break;
            }
            let nb = &self.nb[k];
            let mut g: f64 = 0.0;
            for c in 1..size {
                let low = c.trailing_zeros() as usize;
                cover[c] = cover[c & (c - 1)] | nb[low];
                g = g.max(alpha_of[c] - self.beta_of[cover[c] as usize]);
            }
            let g = super::prohorov::snap(g);
            let next = self.radii.get(k + 1).copied().unwrap_or(f64::INFINITY);
            if g <= next {
                out = out.min(g.max(r));
            }
        }
        out
    }
}

// min over root-preserving f: X → Y of max(dis f, d_P(f_* ν_X, ν_Y)).
fn one_way(x: &RootedWeightedTree, y: &RootedWeightedTree) -> f64 {
    let (dx, dy) = (x.distance_matrix(), y.distance_matrix());
    let target = Target::new(&dy, y.mass());
    let order: Vec<usize> = x.order.clone();
    let nx = x.len();
    let ny = y.len();
    let mut f = vec![0usize; nx];
    // start from the constant map to the root
    let mut push = vec![0.0; ny];
    push[0] = 1.0;
    let diameter = dx.iter().flatten().copied().fold(0.0, f64::max);
    let mut best = diameter.max(target.prohorov(&push, f64::INFINITY));

    struct Search<'a> {
        dx: &'a [Vec<f64>],
        dy: &'a [Vec<f64>],
        order: &'a [usize],
        mass: &'a [f64],
        target: &'a Target,
        ny: usize,
    }

    fn go(s: &Search, depth: usize, dis: f64, f: &mut [usize], push: &mut [f64], best: &mut f64) {
        if depth == s.order.len() {
            let p = s.target.prohorov(push, *best);
            *best = best.min(dis.max(p));
            return;
        }
        let a = s.order[depth];
        for b in 0..s.ny {
            let mut d = dis;
            for &prev in &s.order[..depth] {
                d = d.max((s.dx[a][prev] - s.dy[b][f[prev]]).abs());
                if d >= *best {
                    break;
                }
            }
            if d >= *best {
                continue;
            }
            f[a] = b;
            push[b] += s.mass[a];
            go(s, depth + 1, d, f, push, best);
            push[b] -= s.mass[a];
        }
    }

    let search = Search {
        dx: &dx,
        dy: &dy,
        order: &order,
        mass: x.mass(),
        target: &target,
        ny,
    };
    let mut push = vec![0.0; ny];
    push[0] = x.mass()[0];
    f[0] = 0;
    go(&search, 1, 0.0, &mut f, &mut push, &mut best);
    best
}

/// Lower and upper bounds on `Δ` valid for trees of any size.
///
/// Lower: root-distance laws must be `2Δ`-close, so half their Lévy
/// distance bounds `Δ`, as does the height difference. Upper: both
/// directions evaluated at the maps that align the depth-first mass
/// orders, with the Prohorov term bounded by the Ky Fan metric of the
/// quantile coupling.
pub fn delta_bracket(x: &RootedWeightedTree, y: &RootedWeightedTree) -> (f64, f64) {
    let lower = (x.height() - y.height()).abs().max(0.5 * levy(&root_law(x), &root_law(y)));
    let upper = aligned_cost(x, y).max(aligned_cost(y, x));
    (lower, upper.max(lower))
}

fn root_law(t: &RootedWeightedTree) -> Vec<(f64, f64)> {
    let mut law: Vec<(f64, f64)> = (0..t.len()).filter(|&v| t.mass()[v] > 0.0).map(|v| (t.depth(v), t.mass()[v])).collect();
    law.sort_by(|a, b| a.0.total_cmp(&b.0));
    law
}

fn cdf(law: &[(f64, f64)], cum: &[f64], x: f64) -> f64 {
    let k = law.partition_point(|p| p.0 <= x);
    if k == 0 {
        0.0
    } else {
        cum[k - 1]
    }
}

// Lévy distance between two discrete laws on the line, by bisection.
fn levy(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let prefix = |l: &[(f64, f64)]| {
        l.iter()
            .scan(0.0, |s, p| {
                *s += p.1;
                Some(*s)
            })
            .collect::<Vec<f64>>()
    };
    let (ca, cb) = (prefix(a), prefix(b));
    let ok = |eps: f64| {
        let one_side = |p: &[(f64, f64)], cp: &[f64], q: &[(f64, f64)], cq: &[f64]| {
            p.iter().zip(cp).all(|(&(t, _), &fp)| fp <= cdf(q, cq, t + eps) + eps + 1e-15)
        };
        one_side(a, &ca, b, &cb) && one_side(b, &cb, a, &ca)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    if ok(0.0) {
        return 0.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

// Depth-first order and cumulative mass intervals.
fn dfs_intervals(t: &RootedWeightedTree) -> (Vec<usize>, Vec<f64>) {
    let mut order = Vec::with_capacity(t.len());
    let mut stack = vec![0usize];
    while let Some(v) = stack.pop() {
        order.push(v);
        stack.extend(t.children(v).iter().rev());
    }
    let mut starts = Vec::with_capacity(t.len());
    let mut acc = 0.0;
    for &v in &order {
        starts.push(acc);
        acc += t.mass()[v];
    }
    (order, starts)
}

fn locate(order: &[usize], starts: &[f64], mass: &[f64], u: f64) -> usize {
    let k = starts.partition_point(|&s| s <= u).max(1) - 1;
    // skip massless vertices sharing the start
    let mut j = k;
    while j > 0 && mass[order[j]] == 0.0 {
        j -= 1;
    }
    order[j]
}

fn aligned_cost(x: &RootedWeightedTree, y: &RootedWeightedTree) -> f64 {
    let (ox, sx) = dfs_intervals(x);
    let (oy, sy) = dfs_intervals(y);
    let mut f = vec![0usize; x.len()];
    for (k, &v) in ox.iter().enumerate() {
        if v != 0 {
            f[v] = locate(&oy, &sy, y.mass(), sx[k] + 0.5 * x.mass()[v]);
        }
    }
    // distortion, one traversal per source
    let adj_x = x.adjacency();
    let adj_y = y.adjacency();
    let from = |adj: &[Vec<(usize, f64)>], s: usize| {
        let mut d = vec![f64::NAN; adj.len()];
        d[s] = 0.0;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &(u, len) in &adj[v] {
                if d[u].is_nan() {
                    d[u] = d[v] + len;
                    stack.push(u);
                }
            }
        }
        d
    };
    let mut dis: f64 = 0.0;
    for a in 0..x.len() {
        let da = from(&adj_x, a);
        let db = from(&adj_y, f[a]);
        for b in 0..a {
            dis = dis.max((da[b] - db[f[b]]).abs());
        }
    }
    // quantile coupling of f_* ν_X with ν_Y
    let mut cuts: Vec<f64> = sx.iter().chain(&sy).copied().collect();
    cuts.push(1.0);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut pieces: Vec<(f64, f64)> = Vec::new();
    for w in cuts.windows(2) {
        let m = w[1] - w[0];
        if m <= 0.0 {
            continue;
        }
        let mid = 0.5 * (w[0] + w[1]);
        let a = locate(&ox, &sx, x.mass(), mid);
        let b = locate(&oy, &sy, y.mass(), mid);
        pieces.push((y.distance(f[a], b), m));
    }
    dis.max(ky_fan(pieces))
}

// inf{ε : P(d > ε) ≤ ε} for a discrete law of distances.
fn ky_fan(mut pieces: Vec<(f64, f64)>) -> f64 {
    pieces.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best: f64 = 1.0;
    // mass strictly above the current distance, summed from the top
    let mut above = 0.0;
    let mut k = 0;
    while k < pieces.len() {
        let t = pieces[k].0;
        best = best.min(t.max(above));
        while k < pieces.len() && pieces[k].0 == t {
            above += pieces[k].1;
            k += 1;
        }
    }
    best.min(above.max(0.0)).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree(parent: &[Option<usize>], len: &[f64], mass: &[f64]) -> RootedWeightedTree {
        RootedWeightedTree::new(parent.to_vec(), len.to_vec(), mass.to_vec()).unwrap()
    }

    #[test]
    fn relabeled_tree_is_at_distance_zero() {
        let a = tree(&[None, Some(0), Some(1), Some(0)], &[0.0, 1.0, 0.5, 2.0], &[0.1, 0.2, 0.3, 0.4]);
        let b = tree(&[None, Some(0), Some(0), Some(2)], &[0.0, 2.0, 1.0, 0.5], &[0.1, 0.4, 0.2, 0.3]);
        assert_eq!(delta_ghwr_exact(&a, &b).unwrap(), 0.0);
        assert!(a.rooted_isometric(&b, 1e-12));
    }

    #[test]
    fn segment_against_point() {
        let seg = tree(&[None, Some(0)], &[0.0, 0.3], &[0.5, 0.5]);
        let pt = RootedWeightedTree::point();
        // the constant map has distortion 0.3 and moves half the mass by 0.3
        assert!((delta_ghwr_exact(&seg, &pt).unwrap() - 0.3).abs() < 1e-12);
        let (lo, hi) = delta_bracket(&seg, &pt);
        assert!(lo <= 0.3 + 1e-12 && hi >= 0.3 - 1e-12);
    }

    #[test]
    fn mass_differences_count() {
        let a = tree(&[None, Some(0)], &[0.0, 0.1], &[0.9, 0.1]);
        let b = tree(&[None, Some(0)], &[0.0, 0.1], &[0.1, 0.9]);
        let d = delta_ghwr_exact(&a, &b).unwrap();
        assert!(d > 0.0 && d <= 0.1 + 1e-12);
    }

    #[test]
    fn ky_fan_examples() {
        assert_eq!(ky_fan(vec![(0.0, 1.0)]), 0.0);
        assert_eq!(ky_fan(vec![(0.0, 0.8), (5.0, 0.2)]), 0.2);
        assert_eq!(ky_fan(vec![(0.1, 1.0)]), 0.1);
    }

    #[test]
    fn levy_examples() {
        assert!((levy(&[(0.0, 1.0)], &[(0.25, 1.0)]) - 0.25).abs() < 1e-12);
        assert!(levy(&[(0.0, 0.5), (1.0, 0.5)], &[(0.0, 0.5), (1.0, 0.5)]) < 1e-15);
    }
}

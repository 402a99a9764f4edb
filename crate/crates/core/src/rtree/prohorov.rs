use crate::error::{Error, Result};

/// Largest α-support handled by subset enumeration.
pub const MAX_SUBSET_SUPPORT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProhorovMethod {
    /// Subsets when both supports are small, max-flow otherwise.
    Auto,
    Subsets,
    MaxFlow,
}

/// Prohorov distance between `alpha` and `beta`, two measures of equal
/// total mass on a finite space with distance matrix `dist`.
pub fn prohorov(dist: &[Vec<f64>], alpha: &[f64], beta: &[f64]) -> Result<f64> {
    prohorov_with(dist, alpha, beta, ProhorovMethod::Auto)
}

/// With `r_1 < r_2 < …` the distinct distances between the supports and
/// `g_k = sup_C α(C) − β(C^{r_k})` (closed neighborhoods), the infimum over
/// `ε ∈ (r_k, r_{k+1}]` is `max(g_k, r_k)` when `g_k ≤ r_{k+1}`.
pub fn prohorov_with(dist: &[Vec<f64>], alpha: &[f64], beta: &[f64], method: ProhorovMethod) -> Result<f64> {
    let n = dist.len();
    if alpha.len() != n || beta.len() != n || dist.iter().any(|row| row.len() != n) {
        return Err(Error::Domain("distance matrix and measures differ in size".into()));
    }
    if alpha.iter().chain(beta).any(|m| !(*m >= 0.0)) {
        return Err(Error::Domain("measures must be nonnegative".into()));
    }
    let (ta, tb): (f64, f64) = (alpha.iter().sum(), beta.iter().sum());
    if (ta - tb).abs() > 1e-9 * ta.max(tb).max(1.0) {
        return Err(Error::UnequalMass { left: ta, right: tb });
    }
    let sa: Vec<usize> = (0..n).filter(|&i| alpha[i] > 0.0).collect();
    let sb: Vec<usize> = (0..n).filter(|&j| beta[j] > 0.0).collect();
    if sa.is_empty() {
        return Ok(0.0);
    }
    let mut radii: Vec<f64> = sa.iter().flat_map(|&i| sb.iter().map(move |&j| dist[i][j])).collect();
    radii.push(0.0);
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let use_subsets = match method {
        ProhorovMethod::Subsets => {
            if sa.len() > MAX_SUBSET_SUPPORT || sb.len() > 64 {
                return Err(Error::Domain(format!(
                    "subset enumeration needs at most {MAX_SUBSET_SUPPORT} and 64 support points"
                )));
            }
            true
        }
        ProhorovMethod::MaxFlow => false,
        ProhorovMethod::Auto => sa.len() <= MAX_SUBSET_SUPPORT && sb.len() <= 64,
    };
    let gap = |r: f64| -> f64 {
        if use_subsets {
            gap_subsets(dist, alpha, beta, &sa, &sb, r)
        } else {
            gap_flow(dist, alpha, beta, &sa, &sb, r)
        }
    };
    let mut best = *radii.last().expect("nonempty");
    for k in 0..radii.len() {
        let r = radii[k];
        if r >= best {
            break;
        }
        let g = snap(gap(r));
        let next = radii.get(k + 1).copied().unwrap_or(f64::INFINITY);
        if g <= next {
            best = best.min(g.max(r));
        }
    }
    Ok(best)
}

// Mass differences below this are rounding noise.
const MASS_EPS: f64 = 1e-12;

pub(super) fn snap(g: f64) -> f64 {
    if g <= MASS_EPS {
        0.0
    } else {
        g
    }
}

fn gap_subsets(dist: &[Vec<f64>], alpha: &[f64], beta: &[f64], sa: &[usize], sb: &[usize], r: f64) -> f64 {
    let nb: Vec<u64> = sa
        .iter()
        .map(|&i| sb.iter().enumerate().filter(|(_, &j)| dist[i][j] <= r).fold(0u64, |m, (b, _)| m | 1 << b))
        .collect();
    let size = 1usize << sa.len();
    let mut cover = vec![0u64; size];
    let mut mass_a = vec![0.0; size];
    let mut g: f64 = 0.0;
    for c in 1..size {
        let low = c.trailing_zeros() as usize;
        let rest = c & (c - 1);
        cover[c] = cover[rest] | nb[low];
        mass_a[c] = mass_a[rest] + alpha[sa[low]];
        let mut mb = 0.0;
        let mut bits = cover[c];
        while bits != 0 {
            mb += beta[sb[bits.trailing_zeros() as usize]];
            bits &= bits - 1;
        }
        g = g.max(mass_a[c] - mb);
    }
    g
}

// α(total) − maxflow in the bipartite network s → α-points → β-points → t.
fn gap_flow(dist: &[Vec<f64>], alpha: &[f64], beta: &[f64], sa: &[usize], sb: &[usize], r: f64) -> f64 {
    let (na, nb) = (sa.len(), sb.len());
    let (s, t) = (na + nb, na + nb + 1);
    let mut net = Dinic::new(na + nb + 2);
    let total: f64 = sa.iter().map(|&i| alpha[i]).sum();
    for (a, &i) in sa.iter().enumerate() {
        net.add(s, a, alpha[i]);
        for (b, &j) in sb.iter().enumerate() {
            if dist[i][j] <= r {
                net.add(a, na + b, f64::INFINITY);
            }
        }
    }
    for (b, &j) in sb.iter().enumerate() {
        net.add(na + b, t, beta[j]);
    }
    (total - net.max_flow(s, t)).max(0.0)
}

struct Dinic {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<f64>,
    level: Vec<i32>,
    it: Vec<usize>,
}

const FLOW_EPS: f64 = 1e-15;

impl Dinic {
    fn new(n: usize) -> Self {
        Dinic {
            head: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
            level: vec![0; n],
            it: vec![0; n],
        }
    }

    fn add(&mut self, a: usize, b: usize, c: f64) {
        self.head[a].push(self.to.len());
        self.to.push(b);
        self.cap.push(c);
        self.head[b].push(self.to.len());
        self.to.push(a);
        self.cap.push(0.0);
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.head[v] {
                let u = self.to[e];
                if self.cap[e] > FLOW_EPS && self.level[u] < 0 {
                    self.level[u] = self.level[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, v: usize, t: usize, pushed: f64) -> f64 {
        if v == t {
            return pushed;
        }
        while self.it[v] < self.head[v].len() {
            let e = self.head[v][self.it[v]];
            let u = self.to[e];
            if self.cap[e] > FLOW_EPS && self.level[u] == self.level[v] + 1 {
                let got = self.dfs(u, t, pushed.min(self.cap[e]));
                if got > 0.0 {
                    self.cap[e] -= got;
                    self.cap[e ^ 1] += got;
                    return got;
                }
            }
            self.it[v] += 1;
        }
        0.0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut flow = 0.0;
        while self.bfs(s, t) {
            self.it.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, f64::INFINITY);
                if f <= FLOW_EPS {
                    break;
                }
                flow += f;
            }
        }
        flow
    }
}

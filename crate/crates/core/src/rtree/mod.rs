//! Finite rooted weighted real trees and the distances between them.
//!
//! A tree is stored by parent pointers with vertex 0 as the root. Points
//! in the interior of edges are not represented; operations that need
//! them (reattaching at an interior point, trimming) create vertices.

mod ghwr;
mod prohorov;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::excursion::GridFunction;
use crate::mapping::AcyclicMapping;
use crate::path_codec::LatticePath;

pub use ghwr::{
    d_ghwr_bracket, delta_bracket, delta_ghwr, delta_ghwr_exact, direction_cost, DeltaValue,
    MAX_EXACT_VERTICES,
};
pub use prohorov::{prohorov, prohorov_with, ProhorovMethod, MAX_SUBSET_SUPPORT};

const MASS_TOL: f64 = 1e-9;

#[derive(Serialize, Deserialize)]
struct TreeRepr {
    parent: Vec<Option<usize>>,
    edge_length: Vec<f64>,
    mass: Vec<f64>,
}

/// Finite rooted tree with positive edge lengths and a probability mass
/// on its vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TreeRepr", into = "TreeRepr")]
pub struct RootedWeightedTree {
    parent: Vec<Option<usize>>,
    edge_length: Vec<f64>,
    mass: Vec<f64>,
    children: Vec<Vec<usize>>,
    // breadth-first order from the root
    order: Vec<usize>,
    depth: Vec<f64>,
    level: Vec<usize>,
}

impl TryFrom<TreeRepr> for RootedWeightedTree {
    type Error = Error;

    fn try_from(r: TreeRepr) -> Result<Self> {
        RootedWeightedTree::new(r.parent, r.edge_length, r.mass)
    }
}

impl From<RootedWeightedTree> for TreeRepr {
    fn from(t: RootedWeightedTree) -> Self {
        TreeRepr {
            parent: t.parent,
            edge_length: t.edge_length,
            mass: t.mass,
        }
    }
}

impl RootedWeightedTree {
    /// `edge_length[v]` is the length of the edge from `v` to its parent
    /// (ignored for the root, stored as 0).
    pub fn new(parent: Vec<Option<usize>>, mut edge_length: Vec<f64>, mass: Vec<f64>) -> Result<Self> {
        let n = parent.len();
        if n == 0 {
            return Err(Error::InvalidTree("tree needs at least one vertex".into()));
        }
        if edge_length.len() != n || mass.len() != n {
            return Err(Error::InvalidTree("parent, edge_length and mass differ in length".into()));
        }
        if parent[0].is_some() {
            return Err(Error::InvalidTree("vertex 0 must be the root".into()));
        }
        let mut children = vec![Vec::new(); n];
        for v in 1..n {
            match parent[v] {
                None => return Err(Error::InvalidTree(format!("vertex {v} has no parent"))),
                Some(p) if p >= n || p == v => {
                    return Err(Error::InvalidTree(format!("vertex {v} has invalid parent {p}")))
                }
                Some(p) => children[p].push(v),
            }
            if !(edge_length[v] > 0.0 && edge_length[v].is_finite()) {
                return Err(Error::InvalidTree(format!("edge above vertex {v} has length {}", edge_length[v])));
            }
        }
        edge_length[0] = 0.0;
        if let Some(v) = mass.iter().position(|m| !(*m >= 0.0 && m.is_finite())) {
            return Err(Error::InvalidTree(format!("mass of vertex {v} is {}", mass[v])));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidTree(format!("masses sum to {total}, not 1")));
        }
        let mut order = Vec::with_capacity(n);
        let mut depth = vec![0.0; n];
        let mut level = vec![0; n];
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &c in &children[v] {
                depth[c] = depth[v] + edge_length[c];
                level[c] = level[v] + 1;
                queue.push_back(c);
            }
        }
        if order.len() != n {
            return Err(Error::InvalidTree("parent pointers contain a cycle".into()));
        }
        Ok(RootedWeightedTree {
            parent,
            edge_length,
            mass,
            children,
            order,
            depth,
            level,
        })
    }

    /// A single point carrying all the mass.
    pub fn point() -> Self {
        RootedWeightedTree::new(vec![None], vec![0.0], vec![1.0]).expect("valid")
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn edge_length(&self, v: usize) -> f64 {
        self.edge_length[v]
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Distance from the root.
    pub fn depth(&self, v: usize) -> f64 {
        self.depth[v]
    }

    /// Largest distance from the root.
    pub fn height(&self) -> f64 {
        self.depth.iter().copied().fold(0.0, f64::max)
    }

    pub fn distance(&self, mut x: usize, mut y: usize) -> f64 {
        let (dx, dy) = (self.depth[x], self.depth[y]);
        while self.level[x] > self.level[y] {
            x = self.parent[x].expect("non-root");
        }
        while self.level[y] > self.level[x] {
            y = self.parent[y].expect("non-root");
        }
        while x != y {
            x = self.parent[x].expect("non-root");
            y = self.parent[y].expect("non-root");
        }
        dx + dy - 2.0 * self.depth[x]
    }

    pub fn distance_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut d = vec![vec![0.0; n]; n];
        // one traversal per source; O(n^2) overall
        let adj = self.adjacency();
        for s in 0..n {
            let row = &mut d[s];
            let mut seen = vec![false; n];
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for &(u, len) in &adj[v] {
                    if !seen[u] {
                        seen[u] = true;
                        row[u] = row[v] + len;
                        stack.push(u);
                    }
                }
            }
        }
        d
    }

    fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.len()];
        for v in 1..self.len() {
            let p = self.parent[v].expect("non-root");
            adj[v].push((p, self.edge_length[v]));
            adj[p].push((v, self.edge_length[v]));
        }
        adj
    }

    /// Four-point condition on every quadruple, up to `tol`.
    pub fn satisfies_four_point(&self, tol: f64) -> bool {
        four_point(&self.distance_matrix(), tol)
    }

    /// Total length measure: the sum of the edge lengths.
    pub fn length_measure_total(&self) -> f64 {
        self.edge_length.iter().sum()
    }

    /// `v` and all its descendants.
    pub fn subtree(&self, v: usize) -> Vec<usize> {
        let mut out = vec![v];
        let mut k = 0;
        while k < out.len() {
            out.extend_from_slice(&self.children[out[k]]);
            k += 1;
        }
        out
    }

    /// Max distance from `v` to its descendants.
    pub fn radius_above(&self, v: usize) -> f64 {
        self.subtree(v).iter().map(|&x| self.depth[x] - self.depth[v]).fold(0.0, f64::max)
    }

    /// The forest of `m` hung from an adjoined root, every edge of length
    /// `edge`. Vertex `i` of the mapping is tree vertex `i`; mass is that of
    /// the depth-first contour, `(1 + children)/(2n)` per vertex and
    /// `components/(2n)` at the root.
    pub fn from_forest(m: &AcyclicMapping, edge: f64) -> Self {
        let n = m.n();
        let forest = m.decompose();
        let parent = (0..=n)
            .map(|v| if v == 0 { None } else { Some(forest.parent(v).unwrap_or(0)) })
            .collect();
        let mut edge_length = vec![edge; n + 1];
        edge_length[0] = 0.0;
        let denom = (2 * n) as f64;
        let mass = (0..=n)
            .map(|v| {
                if v == 0 {
                    forest.roots().len() as f64 / denom
                } else {
                    (1 + forest.children(v).len()) as f64 / denom
                }
            })
            .collect();
        RootedWeightedTree::new(parent, edge_length, mass).expect("forest tree is valid")
    }

    /// Moves the descendants of `v` (the subtree strictly above `v`) so that
    /// they hang from `w` instead. Masses and the root are unchanged.
    pub fn reattach(&self, v: usize, w: usize) -> Result<Self> {
        let n = self.len();
        if v >= n || w >= n {
            return Err(Error::Domain(format!("vertices {v}, {w} out of range 0..{n}")));
        }
        if w == v {
            return Ok(self.clone());
        }
        let above = self.subtree(v);
        if above.contains(&w) {
            return Err(Error::Domain(format!("target {w} lies in the subtree above {v}")));
        }
        let mut parent = self.parent.clone();
        for &c in &self.children[v] {
            parent[c] = Some(w);
        }
        RootedWeightedTree::new(parent, self.edge_length.clone(), self.mass.clone())
    }

    /// Inserts a massless vertex on the edge above `c`, at distance `d`
    /// from the parent of `c`. Returns the new tree and the new vertex.
    pub fn subdivide_edge(&self, c: usize, d: f64) -> Result<(Self, usize)> {
        let Some(p) = self.parent.get(c).copied().flatten() else {
            return Err(Error::Domain(format!("vertex {c} has no edge above it")));
        };
        let len = self.edge_length[c];
        if !(d > 0.0 && d < len) {
            return Err(Error::Domain(format!("split point {d} is not inside (0, {len})")));
        }
        let q = self.len();
        let mut parent = self.parent.clone();
        let mut edge_length = self.edge_length.clone();
        let mut mass = self.mass.clone();
        parent.push(Some(p));
        edge_length.push(d);
        mass.push(0.0);
        parent[c] = Some(q);
        edge_length[c] = len - d;
        Ok((RootedWeightedTree::new(parent, edge_length, mass)?, q))
    }

    /// Canonical string of the rooted tree up to relabeling, with edge
    /// lengths and masses rounded to multiples of `quantum`.
    pub fn canonical_form(&self, quantum: f64) -> String {
        let mut code: Vec<String> = vec![String::new(); self.len()];
        for &v in self.order.iter().rev() {
            let mut kids: Vec<&str> = self.children[v].iter().map(|&c| code[c].as_str()).collect();
            kids.sort_unstable();
            let len = (self.edge_length[v] / quantum).round() as i64;
            let m = (self.mass[v] / quantum).round() as i64;
            code[v] = format!("({len}:{m}[{}])", kids.concat());
        }
        std::mem::take(&mut code[0])
    }

    /// Weighted rooted isometry by canonical forms (vertices of degree two
    /// count as structure).
    pub fn rooted_isometric(&self, other: &Self, quantum: f64) -> bool {
        self.len() == other.len() && self.canonical_form(quantum) == other.canonical_form(quantum)
    }

    /// The η-trimming: points that lie inside a segment reaching distance
    /// `η` on both sides. Metric only; all mass is put on the root.
    pub fn trim(&self, eta: f64) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(Error::Domain(format!("eta = {eta} must be positive")));
        }
        let n = self.len();
        // longest descent below each vertex
        let mut below = vec![0.0f64; n];
        for &v in self.order.iter().rev() {
            for &c in &self.children[v] {
                below[v] = below[v].max(self.edge_length[c] + below[c]);
            }
        }
        // reach[c]: longest path from parent(c) that avoids the subtree of c
        let mut reach = vec![0.0f64; n];
        for &p in &self.order {
            let up = match self.parent[p] {
                Some(_) => self.edge_length[p] + reach[p],
                None => 0.0,
            };
            let arms: Vec<f64> = self.children[p].iter().map(|&c| self.edge_length[c] + below[c]).collect();
            let (mut best, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for &a in &arms {
                if a > best {
                    second = best;
                    best = a;
                } else if a > second {
                    second = a;
                }
            }
            for (i, &c) in self.children[p].iter().enumerate() {
                let other = if arms[i] == best { second } else { best };
                reach[c] = up.max(other).max(0.0);
            }
        }
        // retained piece [lo, hi] of each edge, measured from the parent end
        struct Piece {
            p: usize,
            c: usize,
            lo: f64,
            hi: f64,
        }
        let pieces: Vec<Piece> = (1..n)
            .filter_map(|c| {
                let len = self.edge_length[c];
                let lo = (eta - reach[c]).max(0.0);
                let hi = len.min(len + below[c] - eta);
                (hi > lo).then(|| Piece {
                    p: self.parent[c].expect("non-root"),
                    c,
                    lo,
                    hi,
                })
            })
            .collect();
        if pieces.is_empty() {
            return Ok(RootedWeightedTree::point());
        }
        // nodes: original vertices at piece ends with lo = 0 / hi = len, else fresh
        let mut node_of = vec![usize::MAX; n];
        let mut edges: Vec<(usize, usize, f64)> = Vec::new();
        let mut count = 0;
        let fresh = |count: &mut usize| {
            *count += 1;
            *count - 1
        };
        let mut root_node = 0;
        let mut root_dist = f64::INFINITY;
        for pc in &pieces {
            let a = if pc.lo == 0.0 {
                if node_of[pc.p] == usize::MAX {
                    node_of[pc.p] = fresh(&mut count);
                }
                node_of[pc.p]
            } else {
                fresh(&mut count)
            };
            let b = if pc.hi == self.edge_length[pc.c] {
                if node_of[pc.c] == usize::MAX {
                    node_of[pc.c] = fresh(&mut count);
                }
                node_of[pc.c]
            } else {
                fresh(&mut count)
            };
            edges.push((a, b, pc.hi - pc.lo));
            let dist = self.depth[pc.p] + pc.lo;
            if dist < root_dist {
                root_dist = dist;
                root_node = a;
            }
        }
        from_edges(count, &edges, root_node)
    }
}

/// Rooted tree from undirected weighted edges, root relabeled to 0 and
/// mass 1 placed on it.
fn from_edges(count: usize, edges: &[(usize, usize, f64)], root: usize) -> Result<RootedWeightedTree> {
    let mut adj = vec![Vec::new(); count];
    for &(a, b, len) in edges {
        adj[a].push((b, len));
        adj[b].push((a, len));
    }
    let mut index = vec![usize::MAX; count];
    index[root] = 0;
    let mut parent = vec![None];
    let mut edge_length = vec![0.0];
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for &(u, len) in &adj[v] {
            if index[u] == usize::MAX {
                index[u] = parent.len();
                parent.push(Some(index[v]));
                edge_length.push(len);
                queue.push_back(u);
            }
        }
    }
    let mut mass = vec![0.0; parent.len()];
    mass[0] = 1.0;
    RootedWeightedTree::new(parent, edge_length, mass)
}

pub(crate) fn four_point(d: &[Vec<f64>], tol: f64) -> bool {
    let n = d.len();
    for x in 0..n {
        for y in x..n {
            for z in 0..n {
                for w in z..n {
                    let a = d[x][y] + d[z][w];
                    let b = d[x][z] + d[y][w];
                    let c = d[x][w] + d[y][z];
                    if a > b.max(c) + tol {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// `d_{T_f}(u1, u2) = f(u1) + f(u2) − 2 min_{[u1∧u2, u1∨u2]} f`.
pub fn path_distance(f: &GridFunction, u1: f64, u2: f64) -> f64 {
    let (lo, hi) = if u1 <= u2 { (u1, u2) } else { (u2, u1) };
    let (a, b) = (f.eval(lo), f.eval(hi));
    let ts = f.times();
    let i = ts.partition_point(|&t| t <= lo);
    let j = ts.partition_point(|&t| t < hi);
    let m = f.values()[i..j.max(i)].iter().copied().fold(a.min(b), f64::min);
    a + b - 2.0 * m
}

// Quotient tree of a sampled path: heights[k] at knot k, weights[k] the
// mass of knot k, edge lengths height differences times `scale`.
fn quotient_tree(heights: &[f64], weights: &[f64], scale: f64) -> RootedWeightedTree {
    let mut parent: Vec<Option<usize>> = vec![None];
    let mut height = vec![0.0];
    let mut mass = vec![0.0];
    let mut stack = vec![0usize];
    for (k, &y) in heights.iter().enumerate() {
        let mut top = *stack.last().expect("root never popped");
        let node = if y > height[top] {
            parent.push(Some(top));
            height.push(y);
            mass.push(0.0);
            stack.push(parent.len() - 1);
            parent.len() - 1
        } else if y == height[top] {
            top
        } else {
            let mut last = top;
            while height[top] > y {
                last = stack.pop().expect("root has height 0");
                top = *stack.last().expect("root never popped");
            }
            if height[top] == y {
                top
            } else {
                // branch point strictly inside the edge above `last`
                parent.push(Some(top));
                height.push(y);
                mass.push(0.0);
                let q = parent.len() - 1;
                parent[last] = Some(q);
                stack.push(q);
                q
            }
        };
        mass[node] += weights[k];
    }
    let edge_length = (0..parent.len())
        .map(|v| match parent[v] {
            Some(p) => (height[v] - height[p]) * scale,
            None => 0.0,
        })
        .collect();
    let total: f64 = mass.iter().sum();
    mass.iter_mut().for_each(|m| *m /= total);
    RootedWeightedTree::new(parent, edge_length, mass).expect("quotient of a valid path is a tree")
}

fn knot_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    (0..n)
        .map(|k| {
            let left = if k > 0 { times[k] - times[k - 1] } else { 0.0 };
            let right = if k + 1 < n { times[k + 1] - times[k] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// The quotient tree `T_f` of a sampled path, rooted at the class of time
/// 0, with each knot's share of Lebesgue measure as its mass.
pub fn tree_from_path(f: &GridFunction) -> RootedWeightedTree {
    if f.is_degenerate() {
        return RootedWeightedTree::point();
    }
    quotient_tree(f.values(), &knot_weights(f.times()), 1.0)
}

/// `T_f` of the rescaled lattice path, computed on integer heights so edge
/// lengths are exactly `n^{-1/2}`.
pub fn tree_from_lattice(p: &LatticePath) -> RootedWeightedTree {
    let heights: Vec<f64> = p.values().iter().map(|&v| v as f64).collect();
    let times: Vec<f64> = (0..heights.len()).map(|k| k as f64).collect();
    quotient_tree(&heights, &knot_weights(&times), 1.0 / (p.n() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::enumerate_acyclic;
    use crate::path_codec::encode;

    fn star(arms: usize, len: f64) -> RootedWeightedTree {
        let mut parent = vec![None];
        parent.extend((0..arms).map(|_| Some(0)));
        let mut edge = vec![len; arms + 1];
        edge[0] = 0.0;
        let mut mass = vec![0.0; arms + 1];
        mass[0] = 1.0;
        RootedWeightedTree::new(parent, edge, mass).unwrap()
    }

    #[test]
    fn validation() {
        assert!(RootedWeightedTree::new(vec![None, Some(0)], vec![0.0, 0.0], vec![0.5, 0.5]).is_err());
        assert!(RootedWeightedTree::new(vec![None, Some(0)], vec![0.0, 1.0], vec![0.5, 0.4]).is_err());
        assert!(RootedWeightedTree::new(vec![None, Some(2), Some(1)], vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 0.0]).is_err());
        assert!(RootedWeightedTree::new(vec![Some(0)], vec![0.0], vec![1.0]).is_err());
        let t = star(2, 1.0);
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"parent":[null,0,0],"edge_length":[0.0,1.0,1.0],"mass":[1.0,0.0,0.0]}"#);
        assert_eq!(serde_json::from_str::<RootedWeightedTree>(&s).unwrap(), t);
    }

    #[test]
    fn distances() {
        let t = RootedWeightedTree::new(
            vec![None, Some(0), Some(1), Some(1), Some(0)],
            vec![0.0, 1.0, 2.0, 0.5, 3.0],
            vec![0.2; 5],
        )
        .unwrap();
        assert_eq!(t.distance(2, 3), 2.5);
        assert_eq!(t.distance(2, 4), 6.0);
        assert_eq!(t.distance_matrix()[3][4], 4.5);
        assert!(t.satisfies_four_point(1e-12));
        assert_eq!(t.height(), 3.0);
        assert_eq!(t.length_measure_total(), 6.5);
    }

    #[test]
    fn four_point_rejects_a_cycle_metric() {
        // the 4-cycle with unit edges is not a tree metric
        let d = vec![
            vec![0.0, 1.0, 2.0, 1.0],
            vec![1.0, 0.0, 1.0, 2.0],
            vec![2.0, 1.0, 0.0, 1.0],
            vec![1.0, 2.0, 1.0, 0.0],
        ];
        assert!(!four_point(&d, 1e-12));
    }

    #[test]
    fn tent_tree() {
        let n = 8;
        let values = (0..=n).map(|k| (k.min(n - k)) as f64 / n as f64).collect();
        let f = GridFunction::uniform(1.0, values).unwrap();
        let t = tree_from_path(&f);
        assert!((t.length_measure_total() - 0.5).abs() < 1e-12);
        assert!((t.height() - 0.5).abs() < 1e-12);
        assert!((path_distance(&f, 0.25, 0.5) - 0.25).abs() < 1e-12);
        assert!((path_distance(&f, 0.25, 0.75)).abs() < 1e-12);
        let zero = GridFunction::uniform(1.0, vec![0.0; 5]).unwrap();
        assert_eq!(tree_from_path(&zero).len(), 1);
    }

    #[test]
    fn branch_points_are_created() {
        // W shape: two peaks joined above the root at height 1
        let f = GridFunction::uniform(4.0, vec![0.0, 2.0, 1.0, 2.0, 0.0]).unwrap();
        let t = tree_from_path(&f);
        assert_eq!(t.len(), 4);
        assert_eq!(t.length_measure_total(), 3.0);
        let leaves: Vec<usize> = (0..4).filter(|&v| t.children(v).is_empty()).collect();
        assert_eq!(t.distance(leaves[0], leaves[1]), 2.0);
    }

    #[test]
    fn lattice_tree_is_the_forest() {
        for n in 1..=5 {
            for m in enumerate_acyclic(n).unwrap() {
                let a = tree_from_lattice(&encode(&m));
                let b = RootedWeightedTree::from_forest(&m, 1.0 / (n as f64).sqrt());
                assert!(a.rooted_isometric(&b, 1e-12), "{m}");
                let c = tree_from_path(&encode(&m).rescale());
                assert!(c.rooted_isometric(&b, 1e-9), "{m}");
                assert!((a.length_measure_total() - (n as f64).sqrt()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn star_trimming() {
        let t = star(3, 1.0);
        let r = t.trim(0.5).unwrap();
        assert_eq!(r.len(), 4);
        assert!((r.length_measure_total() - 1.5).abs() < 1e-12);
        assert_eq!(t.trim(2.5).unwrap().len(), 1);
        let mut last = f64::INFINITY;
        for k in 1..30 {
            let l = t.trim(k as f64 * 0.05).unwrap().length_measure_total();
            assert!(l <= last + 1e-12);
            last = l;
        }
    }

    #[test]
    fn trimming_a_path_rooted_at_an_end() {
        // root - 1 - 2 along a segment of length 3: only the middle survives
        let t = RootedWeightedTree::new(vec![None, Some(0), Some(1)], vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 0.0]).unwrap();
        let r = t.trim(1.0).unwrap();
        assert!((r.length_measure_total() - 1.0).abs() < 1e-12);
        assert_eq!(r.len(), 2);
    }

    #[test]
    fn reattach_examples() {
        let chain = RootedWeightedTree::new(vec![None, Some(0), Some(1)], vec![0.0, 1.0, 1.0], vec![0.0, 0.5, 0.5]).unwrap();
        let moved = chain.reattach(1, 0).unwrap();
        assert_eq!(moved.distance(0, 2), 1.0);
        assert_eq!(moved.length_measure_total(), chain.length_measure_total());
        assert_eq!(chain.reattach(1, 1).unwrap(), chain);
        assert!(chain.reattach(1, 2).is_err());
        let (split, q) = chain.subdivide_edge(2, 0.25).unwrap();
        assert_eq!(split.distance(0, q), 1.25);
        assert_eq!(split.distance(q, 2), 0.75);
        assert!(chain.subdivide_edge(0, 0.5).is_err());
        assert!(chain.subdivide_edge(2, 1.0).is_err());
    }
}

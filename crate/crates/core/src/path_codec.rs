//! Depth-first encoding of acyclic mappings as lattice reflected bridges.
//!
//! Each tree component contributes an excursion recording depth (root = 1)
//! along a depth-first walk. Components are visited in order of their
//! smallest label and children in ascending label order, which makes
//! `decode` a left inverse of `encode` on canonical labelings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::excursion::GridFunction;
use crate::mapping::AcyclicMapping;

#[derive(Serialize, Deserialize)]
struct PathRepr {
    n: usize,
    values: Vec<i64>,
}

/// Nonnegative ±1-step path of length `2n` from 0 to 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PathRepr", into = "PathRepr")]
pub struct LatticePath {
    values: Vec<i64>,
}

impl TryFrom<PathRepr> for LatticePath {
    type Error = Error;

    fn try_from(r: PathRepr) -> Result<Self> {
        if r.values.len() != 2 * r.n + 1 {
            return Err(Error::InvalidPath(format!(
                "n = {} needs {} values, got {}",
                r.n,
                2 * r.n + 1,
                r.values.len()
            )));
        }
        LatticePath::new(r.values)
    }
}

impl From<LatticePath> for PathRepr {
    fn from(p: LatticePath) -> Self {
        PathRepr {
            n: p.n(),
            values: p.values,
        }
    }
}

impl LatticePath {
    pub fn new(values: Vec<i64>) -> Result<Self> {
        if values.len() < 3 || values.len() % 2 == 0 {
            return Err(Error::InvalidPath(format!(
                "length {} is not 2n + 1 with n >= 1",
                values.len()
            )));
        }
        if values[0] != 0 || values[values.len() - 1] != 0 {
            return Err(Error::InvalidPath("path must start and end at 0".into()));
        }
        if let Some(k) = values.iter().position(|&v| v < 0) {
            return Err(Error::InvalidPath(format!("v({k}) = {} is negative", values[k])));
        }
        if let Some(k) = values.windows(2).position(|w| (w[1] - w[0]).abs() != 1) {
            return Err(Error::InvalidPath(format!("step {k} -> {} is not ±1", k + 1)));
        }
        Ok(LatticePath { values })
    }

    /// Number of vertices: half the number of steps.
    pub fn n(&self) -> usize {
        (self.values.len() - 1) / 2
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn max(&self) -> i64 {
        self.values.iter().copied().max().unwrap_or(0)
    }

    /// Time `2n` rescaled to 1, space divided by `√n`.
    pub fn rescale(&self) -> GridFunction {
        let c = (self.n() as f64).sqrt();
        let values = self.values.iter().map(|&v| v as f64 / c).collect();
        GridFunction::uniform(1.0, values).expect("lattice paths are valid grid functions")
    }

    /// The path itself as a grid function on `[0, 2n]`, unit steps.
    pub fn to_grid(&self) -> GridFunction {
        let values = self.values.iter().map(|&v| v as f64).collect();
        GridFunction::uniform((self.values.len() - 1) as f64, values).expect("valid")
    }

    /// For each level `h`, the sorted lengths of the excursions above `h`.
    pub fn excursion_length_profile(&self) -> BTreeMap<i64, Vec<usize>> {
        let mut profile: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        let mut open: Vec<usize> = Vec::new();
        for (k, w) in self.values.windows(2).enumerate() {
            if w[1] > w[0] {
                open.push(k);
            } else {
                let s = open.pop().expect("valid path never goes below 0");
                profile.entry(w[1]).or_default().push(k + 1 - s);
            }
        }
        for lengths in profile.values_mut() {
            lengths.sort_unstable();
        }
        profile
    }
}

/// Depth-first encoding of `m`.
pub fn encode(m: &AcyclicMapping) -> LatticePath {
    encode_labeled(m).path
}

/// Canonical representative of the mappings encoded by `p`: vertices are
/// labeled in the order they are first visited.
pub fn decode(p: &LatticePath) -> AcyclicMapping {
    let n = p.n();
    let mut image = vec![0usize; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next = 1;
    for w in p.values.windows(2) {
        if w[1] > w[0] {
            let x = next;
            next += 1;
            image[x - 1] = stack.last().copied().unwrap_or(x);
            stack.push(x);
        } else {
            stack.pop();
        }
    }
    AcyclicMapping::from_image_unchecked(image)
}

/// A lattice path whose steps carry the label of the vertex whose edge
/// they traverse: the up-step into `x` and the down-step out of it are
/// both labeled `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledPath {
    pub path: LatticePath,
    pub labels: Vec<usize>,
}

pub fn encode_labeled(m: &AcyclicMapping) -> LabeledPath {
    let forest = m.decompose();
    let n = m.n();
    // component roots ordered by smallest member
    let mut seen = vec![false; n + 1];
    let mut roots = Vec::new();
    for v in 1..=n {
        let r = forest.root_of(v);
        if !seen[r] {
            seen[r] = true;
            roots.push(r);
        }
    }
    let mut values = Vec::with_capacity(2 * n + 1);
    let mut labels = Vec::with_capacity(2 * n);
    values.push(0i64);
    // (vertex, next child index)
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for &r in &roots {
        values.push(1);
        labels.push(r);
        stack.push((r, 0));
        while let Some(top) = stack.last_mut() {
            let (v, i) = *top;
            let kids = forest.children(v);
            if i < kids.len() {
                top.1 += 1;
                let c = kids[i];
                values.push(values[values.len() - 1] + 1);
                labels.push(c);
                stack.push((c, 0));
            } else {
                stack.pop();
                values.push(values[values.len() - 1] - 1);
                labels.push(v);
            }
        }
    }
    LabeledPath {
        path: LatticePath { values },
        labels,
    }
}

impl LabeledPath {
    pub fn n(&self) -> usize {
        self.path.n()
    }

    /// The mapping read off the labels: each up-step's vertex maps to the
    /// vertex of the innermost enclosing up-step, or to itself at level 0.
    pub fn to_mapping(&self) -> AcyclicMapping {
        let mut image = vec![0usize; self.n()];
        let mut stack: Vec<usize> = Vec::new();
        for (k, w) in self.path.values.windows(2).enumerate() {
            let x = self.labels[k];
            if w[1] > w[0] {
                image[x - 1] = stack.last().copied().unwrap_or(x);
                stack.push(x);
            } else {
                stack.pop();
            }
        }
        AcyclicMapping::from_image_unchecked(image)
    }

    /// First time after `v` at which the path returns to `v(v)`.
    pub fn excursion_end(&self, v: usize) -> Result<usize> {
        excursion_end(&self.path.values, v)
    }

    /// Moves the excursion starting at time `v` to start at time `w`,
    /// closing the gap: the lattice form of the continuum relocation.
    pub fn relocate(&self, v: usize, w: usize) -> Result<LabeledPath> {
        let end = self.excursion_end(v)?;
        let steps = 2 * self.n();
        if w > steps || (w > v && w < end) {
            return Err(Error::Domain(format!(
                "insertion time {w} lies inside the moved excursion [{v}, {end}] or outside [0, {steps}]"
            )));
        }
        let mut signs: Vec<i64> = self.path.values.windows(2).map(|w| w[1] - w[0]).collect();
        let mut labels = self.labels.clone();
        move_block(&mut signs, v, end, w);
        move_block(&mut labels, v, end, w);
        let mut values = Vec::with_capacity(steps + 1);
        values.push(0);
        for s in signs {
            values.push(values[values.len() - 1] + s);
        }
        Ok(LabeledPath {
            path: LatticePath::new(values)?,
            labels,
        })
    }
}

fn excursion_end(values: &[i64], v: usize) -> Result<usize> {
    if v + 1 >= values.len() || values[v + 1] < values[v] {
        return Err(Error::Domain(format!("no excursion starts at time {v}")));
    }
    let a = values[v];
    let mut t = v + 1;
    while values[t] != a {
        t += 1;
    }
    Ok(t)
}

// Moves items[v..end] so that it starts at w (in pre-move coordinates).
fn move_block<T: Copy>(items: &mut [T], v: usize, end: usize, w: usize) {
    if w >= end {
        items[v..w].rotate_left(end - v);
    } else if w < v {
        items[w..end].rotate_right(end - v);
    }
}

impl LatticePath {
    /// Unlabeled form of [`LabeledPath::relocate`].
    pub fn relocate(&self, v: usize, w: usize) -> Result<LatticePath> {
        let lp = LabeledPath {
            path: self.clone(),
            labels: vec![1; 2 * self.n()],
        };
        Ok(lp.relocate(v, w)?.path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::enumerate_acyclic;

    fn path(v: &[i64]) -> LatticePath {
        LatticePath::new(v.to_vec()).unwrap()
    }

    #[test]
    fn encode_examples() {
        let m = AcyclicMapping::new(vec![1, 2]).unwrap();
        assert_eq!(encode(&m).values(), &[0, 1, 0, 1, 0]);
        let m = AcyclicMapping::new(vec![1, 1]).unwrap();
        assert_eq!(encode(&m).values(), &[0, 1, 2, 1, 0]);
        let m = AcyclicMapping::new(vec![1, 1, 2, 2, 3]).unwrap();
        assert_eq!(encode(&m).values(), &[0, 1, 2, 3, 4, 3, 2, 3, 2, 1, 0]);
    }

    #[test]
    fn component_rooted_at_ten() {
        // the 18-vertex example with its cycles opened at 10 and 9:
        // {1, 10, 13, 16, 17} becomes a tree rooted at 10
        let mut image = vec![10, 3, 18, 10, 9, 2, 8, 4, 3, 7, 9, 2, 1, 9, 15, 1, 1, 9];
        image[9] = 10;
        image[3] = 4;
        image[8] = 9;
        let m = AcyclicMapping::new(image).unwrap();
        let f = m.decompose();
        let tree = f.tree_vertices(10);
        assert_eq!(tree.len(), 5);
        let p = encode(&m);
        assert!(p.values().windows(2).all(|w| (w[1] - w[0]).abs() == 1));
        // first component is the one containing vertex 1
        let first_return = p.values().iter().skip(1).position(|&v| v == 0).unwrap() + 1;
        assert_eq!(first_return, 10);
        assert_eq!(p.values()[..=first_return].iter().max(), Some(&3));
    }

    #[test]
    fn decode_examples() {
        assert_eq!(decode(&path(&[0, 1, 0, 1, 0])).image(), &[1, 2]);
        assert_eq!(decode(&path(&[0, 1, 2, 1, 0])).image(), &[1, 1]);
        assert_eq!(decode(&path(&[0, 1, 2, 1, 2, 1, 0])).image(), &[1, 1, 1]);
    }

    #[test]
    fn decode_inverts_encode_up_to_labels() {
        for n in 1..=5 {
            for m in enumerate_acyclic(n).unwrap() {
                let p = encode(&m);
                let d = decode(&p);
                assert_eq!(encode(&d), p);
                assert_eq!(d.decompose().shape_code(), m.decompose().shape_code());
                assert_eq!(encode_labeled(&m).to_mapping(), m);
            }
        }
    }

    #[test]
    fn invalid_paths() {
        assert!(LatticePath::new(vec![0, 1, 1, 0, 0]).is_err());
        assert!(LatticePath::new(vec![0, 1, 0, -1, 0]).is_err());
        assert!(LatticePath::new(vec![0, 1, 2]).is_err());
        assert!(LatticePath::new(vec![0]).is_err());
        assert!(serde_json::from_str::<LatticePath>(r#"{"n":1,"values":[0,1,0,1,0]}"#).is_err());
    }

    #[test]
    fn rescale_values() {
        let g = path(&[0, 1, 2, 1, 0]).rescale();
        let r = 2f64.sqrt();
        assert_eq!(g.values(), &[0.0, 1.0 / r, 2.0 / r, 1.0 / r, 0.0]);
        assert_eq!(g.times(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn profiles() {
        let p = path(&[0, 1, 0, 1, 0]).excursion_length_profile();
        assert_eq!(p, BTreeMap::from([(0, vec![2, 2])]));
        let p = path(&[0, 1, 2, 1, 0]).excursion_length_profile();
        assert_eq!(p, BTreeMap::from([(0, vec![4]), (1, vec![2])]));
    }

    #[test]
    fn lattice_relocation_reattaches_subtrees() {
        // (1,1,2,2,3): move the subtree {3,5} (up-step at time 2) under vertex 4
        let m = AcyclicMapping::new(vec![1, 1, 2, 2, 3]).unwrap();
        let lp = encode_labeled(&m);
        assert_eq!(lp.labels[2], 3);
        let first_visit_4 = lp.labels.iter().position(|&x| x == 4).unwrap() + 1;
        let moved = lp.relocate(2, first_visit_4).unwrap();
        assert_eq!(moved.to_mapping().image(), &[1, 1, 4, 2, 3]);
        // to time 0: becomes its own component
        let moved = lp.relocate(2, 0).unwrap();
        assert_eq!(moved.to_mapping().image(), &[1, 1, 3, 2, 3]);
        assert!(lp.relocate(2, 3).is_err());
        assert!(lp.relocate(4, 0).is_err());
    }

    #[test]
    fn json_shape() {
        let p = path(&[0, 1, 0, 1, 0]);
        assert_eq!(serde_json::to_string(&p).unwrap(), r#"{"n":2,"values":[0,1,0,1,0]}"#);
    }
}

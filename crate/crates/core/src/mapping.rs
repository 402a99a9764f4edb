//! Mappings of `[n]` into itself, the acyclic ones, and their forests.
//!
//! Vertex labels are 1-based throughout: `image()[i - 1]` is the image of
//! vertex `i`.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `n` accepted by [`enumerate_acyclic`].
pub const MAX_ENUMERATE: usize = 7;

#[derive(Serialize, Deserialize)]
struct MappingRepr {
    n: usize,
    image: Vec<usize>,
}

/// A self-map of `[n]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "MappingRepr", into = "MappingRepr")]
pub struct Mapping {
    image: Vec<usize>,
}

impl TryFrom<MappingRepr> for Mapping {
    type Error = Error;

    fn try_from(repr: MappingRepr) -> Result<Self> {
        if repr.n != repr.image.len() {
            return Err(Error::OutOfRange {
                what: "image length",
                value: repr.image.len() as i64,
                min: repr.n as i64,
                max: repr.n as i64,
            });
        }
        Mapping::new(repr.image)
    }
}

impl From<Mapping> for MappingRepr {
    fn from(m: Mapping) -> Self {
        MappingRepr {
            n: m.image.len(),
            image: m.image,
        }
    }
}

impl Mapping {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        if n == 0 {
            return Err(Error::EmptyMapping);
        }
        if let Some((index, &value)) = image.iter().enumerate().find(|(_, &v)| v == 0 || v > n) {
            return Err(Error::ImageOutOfRange {
                index: index + 1,
                value,
                n,
            });
        }
        Ok(Mapping { image })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Mapping::new((1..=n).collect())
    }

    pub fn n(&self) -> usize {
        self.image.len()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    /// Image of vertex `i` (1-based).
    pub fn apply(&self, i: usize) -> usize {
        self.image[i - 1]
    }

    /// All directed cycles of length at least two, each rotated to start at
    /// its smallest vertex, ordered by that vertex.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        // 0 = unvisited, otherwise the walk that first reached the vertex.
        let mut stamp = vec![0usize; n + 1];
        let mut out = Vec::new();
        for start in 1..=n {
            if stamp[start] != 0 {
                continue;
            }
            let mut x = start;
            loop {
                if stamp[x] == start {
                    out.push(rotate_min(self.collect_cycle(x)));
                    break;
                }
                if stamp[x] != 0 {
                    break;
                }
                stamp[x] = start;
                let y = self.apply(x);
                if y == x {
                    break;
                }
                x = y;
            }
        }
        out.sort();
        out
    }

    /// The non-trivial cycle containing the smallest vertex, if any.
    pub fn find_cycle(&self) -> Option<Vec<usize>> {
        self.cycles().into_iter().next()
    }

    fn collect_cycle(&self, on_cycle: usize) -> Vec<usize> {
        let mut cycle = vec![on_cycle];
        let mut x = self.apply(on_cycle);
        while x != on_cycle {
            cycle.push(x);
            x = self.apply(x);
        }
        cycle
    }

    /// `pi ∘ self ∘ pi⁻¹` where `pi[i - 1]` is the new label of vertex `i`.
    pub fn relabel(&self, pi: &[usize]) -> Result<Mapping> {
        let n = self.n();
        if pi.len() != n {
            return Err(Error::Domain("permutation length differs from n".into()));
        }
        let mut image = vec![0; n];
        for i in 1..=n {
            image[pi[i - 1] - 1] = pi[self.apply(i) - 1];
        }
        Mapping::new(image)
    }
}

fn rotate_min(mut cycle: Vec<usize>) -> Vec<usize> {
    let pos = cycle
        .iter()
        .enumerate()
        .min_by_key(|(_, &v)| v)
        .map(|(i, _)| i)
        .unwrap_or(0);
    cycle.rotate_left(pos);
    cycle
}

impl fmt::Display for Mapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, v) in self.image.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// True iff the only directed cycles of `m` are self-loops.
pub fn validate_acyclic(m: &Mapping) -> bool {
    m.find_cycle().is_none()
}

/// A mapping whose functional graph has only self-loop cycles.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Mapping", into = "Mapping")]
pub struct AcyclicMapping(Mapping);

impl TryFrom<Mapping> for AcyclicMapping {
    type Error = Error;

    fn try_from(m: Mapping) -> Result<Self> {
        match m.find_cycle() {
            Some(cycle) => Err(Error::Cyclic { cycle }),
            None => Ok(AcyclicMapping(m)),
        }
    }
}

impl From<AcyclicMapping> for Mapping {
    fn from(m: AcyclicMapping) -> Self {
        m.0
    }
}

impl std::ops::Deref for AcyclicMapping {
    type Target = Mapping;

    fn deref(&self) -> &Mapping {
        &self.0
    }
}

impl fmt::Display for AcyclicMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl AcyclicMapping {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        Mapping::new(image)?.try_into()
    }

    pub fn identity(n: usize) -> Result<Self> {
        Ok(AcyclicMapping(Mapping::identity(n)?))
    }

    pub fn as_mapping(&self) -> &Mapping {
        &self.0
    }

    /// Skips validation; callers guarantee acyclicity.
    pub(crate) fn from_image_unchecked(image: Vec<usize>) -> Self {
        debug_assert!(Mapping::new(image.clone()).map(|m| validate_acyclic(&m)).unwrap_or(false));
        AcyclicMapping(Mapping { image })
    }

    pub fn fixed_points(&self) -> usize {
        self.image().iter().enumerate().filter(|(i, &v)| v == i + 1).count()
    }

    pub fn decompose(&self) -> Forest {
        Forest::from_acyclic(self)
    }
}

/// Forest obtained by deleting the self-loops of an acyclic mapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Forest {
    roots: Vec<usize>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
}

impl Forest {
    fn from_acyclic(m: &AcyclicMapping) -> Self {
        let n = m.n();
        let mut roots = Vec::new();
        let mut parent = vec![None; n];
        let mut children = vec![Vec::new(); n];
        for i in 1..=n {
            let p = m.apply(i);
            if p == i {
                roots.push(i);
            } else {
                parent[i - 1] = Some(p);
                // increasing i keeps every child list sorted
                children[p - 1].push(i);
            }
        }
        Forest {
            roots,
            parent,
            children,
        }
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    /// Fixed points of the mapping, ascending.
    pub fn roots(&self) -> &[usize] {
        &self.roots
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v - 1]
    }

    /// Pre-images of `v` other than itself, ascending.
    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v - 1]
    }

    /// Root of the tree containing `v`.
    pub fn root_of(&self, mut v: usize) -> usize {
        while let Some(p) = self.parent(v) {
            v = p;
        }
        v
    }

    /// Vertex set of the tree rooted at `root`, in depth-first order with
    /// children visited in ascending label order.
    pub fn tree_vertices(&self, root: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            out.push(v);
            stack.extend(self.children(v).iter().rev());
        }
        out
    }

    /// Depth of `v`, counting a root as depth 1.
    pub fn depth(&self, mut v: usize) -> usize {
        let mut d = 1;
        while let Some(p) = self.parent(v) {
            v = p;
            d += 1;
        }
        d
    }

    pub fn to_mapping(&self) -> AcyclicMapping {
        let image = (1..=self.n()).map(|i| self.parent(i).unwrap_or(i)).collect();
        AcyclicMapping::from_image_unchecked(image)
    }

    /// Canonical string for the isomorphism class of the forest as a
    /// multiset of rooted unlabeled trees (AHU encoding).
    pub fn shape_code(&self) -> String {
        let mut codes: Vec<String> = self.roots.iter().map(|&r| self.tree_code(r)).collect();
        codes.sort();
        codes.concat()
    }

    fn tree_code(&self, root: usize) -> String {
        let order = self.tree_vertices(root);
        let mut code: Vec<String> = vec![String::new(); self.n()];
        for &v in order.iter().rev() {
            let mut kids: Vec<&str> = self.children(v).iter().map(|&c| code[c - 1].as_str()).collect();
            kids.sort_unstable();
            code[v - 1] = format!("({})", kids.concat());
        }
        std::mem::take(&mut code[root - 1])
    }
}

/// All acyclic mappings of `[n]` in lexicographic order of the image
/// sequence. There are `(n + 1)^(n - 1)` of them.
pub fn enumerate_acyclic(n: usize) -> Result<Vec<AcyclicMapping>> {
    if !(1..=MAX_ENUMERATE).contains(&n) {
        return Err(Error::OutOfRange {
            what: "n",
            value: n as i64,
            min: 1,
            max: MAX_ENUMERATE as i64,
        });
    }
    let mut out = Vec::with_capacity((n + 1).pow(n as u32 - 1));
    let mut image = vec![0usize; n];
    extend_acyclic(&mut image, 1, &mut out);
    Ok(out)
}

fn extend_acyclic(image: &mut Vec<usize>, i: usize, out: &mut Vec<AcyclicMapping>) {
    let n = image.len();
    if i > n {
        out.push(AcyclicMapping::from_image_unchecked(image.clone()));
        return;
    }
    for j in 1..=n {
        if closes_cycle(image, i, j) {
            continue;
        }
        image[i - 1] = j;
        extend_acyclic(image, i + 1, out);
    }
    image[i - 1] = 0;
}

// Would setting image(i) = j create a non-trivial cycle? Vertices >= i are
// still unassigned, and the assigned prefix is acyclic.
fn closes_cycle(image: &[usize], i: usize, j: usize) -> bool {
    if j == i {
        return false;
    }
    let mut x = j;
    loop {
        if x == i {
            return true;
        }
        if x > i {
            return false;
        }
        let y = image[x - 1];
        if y == x {
            return false;
        }
        x = y;
    }
}

/// A uniformly distributed acyclic mapping of `[n]`.
///
/// Draws a uniform labeled tree on `{0, 1, ..., n}` from a uniform Prüfer
/// sequence and roots it at `0`. Children of `0` become fixed points; every
/// other vertex maps to its parent. Labeled trees on `n + 1` vertices and
/// acyclic mappings of `[n]` are in bijection this way.
pub fn sample_uniform_acyclic<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<AcyclicMapping> {
    if n == 0 {
        return Err(Error::EmptyMapping);
    }
    let m = n + 1;
    let seq: Vec<usize> = (0..m - 2).map(|_| rng.random_range(0..m)).collect();
    let edges = prufer_edges(&seq, m);

    let mut adj_start = vec![0usize; m + 1];
    for &(a, b) in &edges {
        adj_start[a + 1] += 1;
        adj_start[b + 1] += 1;
    }
    for v in 0..m {
        adj_start[v + 1] += adj_start[v];
    }
    let mut fill = adj_start.clone();
    let mut adj = vec![0usize; 2 * edges.len()];
    for &(a, b) in &edges {
        adj[fill[a]] = b;
        fill[a] += 1;
        adj[fill[b]] = a;
        fill[b] += 1;
    }

    let mut image = vec![0usize; n];
    let mut seen = vec![false; m];
    seen[0] = true;
    let mut stack = vec![0usize];
    while let Some(v) = stack.pop() {
        for &w in &adj[adj_start[v]..adj_start[v + 1]] {
            if !seen[w] {
                seen[w] = true;
                image[w - 1] = if v == 0 { w } else { v };
                stack.push(w);
            }
        }
    }
    Ok(AcyclicMapping::from_image_unchecked(image))
}

// Linear-time Prüfer decoding on vertices 0..m.
fn prufer_edges(seq: &[usize], m: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; m];
    for &x in seq {
        degree[x] += 1;
    }
    let mut ptr = 0;
    while degree[ptr] != 1 {
        ptr += 1;
    }
    let mut leaf = ptr;
    let mut edges = Vec::with_capacity(m - 1);
    for &x in seq {
        edges.push((leaf, x));
        degree[leaf] = 0;
        degree[x] -= 1;
        if degree[x] == 1 && x < ptr {
            leaf = x;
        } else {
            ptr += 1;
            while degree[ptr] != 1 {
                ptr += 1;
            }
            leaf = ptr;
        }
    }
    edges.push((leaf, m - 1));
    edges
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    const TABLE_ONE: [usize; 18] = [10, 3, 18, 10, 9, 2, 8, 4, 3, 7, 9, 2, 1, 9, 15, 1, 1, 9];

    #[test]
    fn eighteen_vertex_example_has_three_cycle() {
        let m = Mapping::new(TABLE_ONE.to_vec()).unwrap();
        assert!(!validate_acyclic(&m));
        assert_eq!(m.find_cycle(), Some(vec![3, 18, 9]));
        assert_eq!(m.cycles(), vec![vec![3, 18, 9], vec![4, 10, 7, 8]]);
        match AcyclicMapping::try_from(m) {
            Err(Error::Cyclic { cycle }) => assert_eq!(cycle, vec![3, 18, 9]),
            other => panic!("expected cycle error, got {other:?}"),
        }
    }

    #[test]
    fn identity_and_two_cycle() {
        for n in 1..6 {
            assert!(validate_acyclic(&Mapping::identity(n).unwrap()));
        }
        let swap = Mapping::new(vec![2, 1]).unwrap();
        assert!(!validate_acyclic(&swap));
        assert_eq!(swap.find_cycle(), Some(vec![1, 2]));
    }

    #[test]
    fn rejects_out_of_range_images() {
        assert_eq!(
            Mapping::new(vec![1, 3]),
            Err(Error::ImageOutOfRange { index: 2, value: 3, n: 2 })
        );
        assert_eq!(
            Mapping::new(vec![0]),
            Err(Error::ImageOutOfRange { index: 1, value: 0, n: 1 })
        );
        assert_eq!(Mapping::new(vec![]), Err(Error::EmptyMapping));
    }

    #[test]
    fn decompose_small_examples() {
        let f = AcyclicMapping::new(vec![1, 1, 2, 2, 3]).unwrap().decompose();
        assert_eq!(f.roots(), &[1]);
        assert_eq!(f.children(1), &[2]);
        assert_eq!(f.children(2), &[3, 4]);
        assert_eq!(f.children(3), &[5]);
        assert!(f.children(5).is_empty());

        let id = AcyclicMapping::identity(3).unwrap().decompose();
        assert_eq!(id.roots(), &[1, 2, 3]);
        assert!((1..=3).all(|v| id.children(v).is_empty()));

        let f = AcyclicMapping::new(vec![1, 1]).unwrap().decompose();
        assert_eq!(f.roots(), &[1]);
        assert_eq!(f.children(1), &[2]);
    }

    #[test]
    fn enumeration_small_cases() {
        let one = enumerate_acyclic(1).unwrap();
        assert_eq!(one.len(), 1);
        let two: Vec<Vec<usize>> = enumerate_acyclic(2)
            .unwrap()
            .iter()
            .map(|m| m.image().to_vec())
            .collect();
        assert_eq!(two, vec![vec![1, 1], vec![1, 2], vec![2, 2]]);
        assert_eq!(enumerate_acyclic(3).unwrap().len(), 16);
        assert!(enumerate_acyclic(0).is_err());
        assert!(enumerate_acyclic(8).is_err());
    }

    #[test]
    fn enumeration_is_sorted_and_roundtrips_through_forest() {
        let all = enumerate_acyclic(4).unwrap();
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        for m in &all {
            assert_eq!(&m.decompose().to_mapping(), m);
        }
    }

    #[test]
    fn sampler_single_vertex() {
        let mut r = rng::master(3);
        for _ in 0..10 {
            assert_eq!(sample_uniform_acyclic(1, &mut r).unwrap().image(), &[1]);
        }
        assert!(sample_uniform_acyclic(0, &mut r).is_err());
    }

    #[test]
    fn shape_code_ignores_labels() {
        let a = AcyclicMapping::new(vec![1, 1, 2, 2, 3]).unwrap();
        let b = AcyclicMapping::try_from(a.relabel(&[5, 4, 3, 2, 1]).unwrap()).unwrap();
        assert_eq!(a.decompose().shape_code(), b.decompose().shape_code());
        let c = AcyclicMapping::new(vec![1, 1, 1, 1, 1]).unwrap();
        assert_ne!(a.decompose().shape_code(), c.decompose().shape_code());
    }

    #[test]
    fn json_shape() {
        let m = Mapping::new(TABLE_ONE.to_vec()).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(
            s,
            r#"{"n":18,"image":[10,3,18,10,9,2,8,4,3,7,9,2,1,9,15,1,1,9]}"#
        );
        let back: Mapping = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<AcyclicMapping>(&s).is_err());
        assert!(serde_json::from_str::<Mapping>(r#"{"n":3,"image":[1,1]}"#).is_err());
    }
}

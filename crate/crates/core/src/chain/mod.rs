//! The subtree-relocation Markov chain on acyclic mappings.
//!
//! One step picks a vertex `i` uniformly, detaches the subtree hanging from
//! `i` and re-points `i` either at itself or at a uniform vertex outside
//! that subtree, every admissible choice being equally likely.

mod observer;

use std::collections::HashMap;

use num_rational::Ratio;
use rand::Rng;

use crate::error::{Error, Result};
use crate::mapping::{enumerate_acyclic, AcyclicMapping};

pub use observer::{FixedPoints, Height, LargestTree, Observer, ObserverRegistry};

/// Largest `n` accepted by [`transition_matrix`].
pub const MAX_EXACT: usize = 5;

/// `{ w : φ^k(w) = x for some k ≥ 0 }`, sorted ascending.
pub fn subtree_of(m: &AcyclicMapping, x: usize) -> Vec<usize> {
    let state = ChainState::new(m.clone());
    let mut s = state.subtree_vec(x);
    s.sort_unstable();
    s
}

/// One step of the chain from `m`.
pub fn step<R: Rng + ?Sized>(m: &AcyclicMapping, rng: &mut R) -> AcyclicMapping {
    let mut state = ChainState::new(m.clone());
    state.step(rng);
    state.to_mapping()
}

/// Mutable chain state with a reverse adjacency maintained across steps, so
/// a step costs time proportional to the detached subtree.
#[derive(Debug, Clone)]
pub struct ChainState {
    image: Vec<usize>,
    children: Vec<Vec<usize>>,
    fixed: usize,
    stamp: Vec<u32>,
    epoch: u32,
    scratch: Vec<usize>,
}

impl ChainState {
    pub fn new(m: AcyclicMapping) -> Self {
        let image = m.image().to_vec();
        let n = image.len();
        let mut children = vec![Vec::new(); n + 1];
        let mut fixed = 0;
        for (k, &p) in image.iter().enumerate() {
            let i = k + 1;
            if p == i {
                fixed += 1;
            } else {
                children[p].push(i);
            }
        }
        ChainState {
            image,
            children,
            fixed,
            stamp: vec![0; n + 1],
            epoch: 0,
            scratch: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.image.len()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn fixed_points(&self) -> usize {
        self.fixed
    }

    /// Pre-images of `v` other than `v`, in no particular order.
    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn to_mapping(&self) -> AcyclicMapping {
        AcyclicMapping::from_image_unchecked(self.image.clone())
    }

    fn subtree_vec(&self, x: usize) -> Vec<usize> {
        let mut out = vec![x];
        let mut k = 0;
        while k < out.len() {
            let v = out[k];
            out.extend_from_slice(&self.children[v]);
            k += 1;
        }
        out
    }

    // Marks the subtree of `x` with a fresh epoch and returns its size.
    fn mark_subtree(&mut self, x: usize) -> usize {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        self.scratch.clear();
        self.scratch.push(x);
        let mut k = 0;
        while k < self.scratch.len() {
            let v = self.scratch[k];
            self.stamp[v] = self.epoch;
            for &c in &self.children[v] {
                self.scratch.push(c);
            }
            k += 1;
        }
        self.scratch.len()
    }

    /// Advances one step and returns `(i, new image of i)`.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> (usize, usize) {
        let n = self.n();
        let i = rng.random_range(1..=n);
        let size = self.mark_subtree(i);
        let allowed = 1 + n - size;
        let target = if 2 * size <= n {
            // Uniform over n + 1 slots (slot 0 = self-loop); reject the subtree.
            loop {
                let u = rng.random_range(0..=n);
                if u == 0 {
                    break i;
                }
                if self.stamp[u] != self.epoch {
                    break u;
                }
            }
        } else {
            let k = rng.random_range(0..allowed);
            if k == 0 {
                i
            } else {
                (1..=n)
                    .filter(|&v| self.stamp[v] != self.epoch)
                    .nth(k - 1)
                    .expect("complement has allowed - 1 vertices")
            }
        };
        self.repoint(i, target);
        (i, target)
    }

    fn repoint(&mut self, i: usize, target: usize) {
        let old = self.image[i - 1];
        if old == target {
            return;
        }
        if old == i {
            self.fixed -= 1;
        } else {
            let kids = &mut self.children[old];
            let pos = kids.iter().position(|&c| c == i).expect("child listed under parent");
            kids.swap_remove(pos);
        }
        if target == i {
            self.fixed += 1;
        } else {
            self.children[target].push(i);
        }
        self.image[i - 1] = target;
    }

    /// Number of vertices on the longest path to a fixed point, i.e. the
    /// maximum of the encoded lattice path.
    pub fn height(&self) -> usize {
        let mut best = 0;
        let mut stack: Vec<(usize, usize)> = Vec::new();
        for r in 1..=self.n() {
            if self.image[r - 1] == r {
                stack.push((r, 1));
            }
        }
        while let Some((v, d)) = stack.pop() {
            best = best.max(d);
            for &c in &self.children[v] {
                stack.push((c, d + 1));
            }
        }
        best
    }

    /// Size of the largest tree component.
    pub fn largest_tree(&self) -> usize {
        (1..=self.n())
            .filter(|&r| self.image[r - 1] == r)
            .map(|r| self.subtree_vec(r).len())
            .max()
            .unwrap_or(0)
    }
}

/// Exact transition matrix of the chain over [`enumerate_acyclic`]`(n)`.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    pub states: Vec<AcyclicMapping>,
    pub probs: Vec<Vec<Ratio<i64>>>,
}

impl TransitionMatrix {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, m: &AcyclicMapping) -> Option<usize> {
        self.states.binary_search(m).ok()
    }

    pub fn prob(&self, from: &AcyclicMapping, to: &AcyclicMapping) -> Option<Ratio<i64>> {
        Some(self.probs[self.index_of(from)?][self.index_of(to)?])
    }

    pub fn is_symmetric(&self) -> bool {
        let k = self.len();
        (0..k).all(|a| (a + 1..k).all(|b| self.probs[a][b] == self.probs[b][a]))
    }

    pub fn is_row_stochastic(&self) -> bool {
        let one = Ratio::from_integer(1);
        self.probs
            .iter()
            .all(|row| row.iter().copied().sum::<Ratio<i64>>() == one)
    }
}

pub fn transition_matrix(n: usize) -> Result<TransitionMatrix> {
    if !(1..=MAX_EXACT).contains(&n) {
        return Err(Error::OutOfRange {
            what: "n",
            value: n as i64,
            min: 1,
            max: MAX_EXACT as i64,
        });
    }
    let states = enumerate_acyclic(n)?;
    let index: HashMap<&[usize], usize> = states
        .iter()
        .enumerate()
        .map(|(k, m)| (m.image(), k))
        .collect();
    let k = states.len();
    let mut probs = vec![vec![Ratio::from_integer(0i64); k]; k];
    for (a, m) in states.iter().enumerate() {
        let state = ChainState::new(m.clone());
        for i in 1..=n {
            let sub = state.subtree_vec(i);
            let allowed: Vec<usize> = std::iter::once(i)
                .chain((1..=n).filter(|v| !sub.contains(v)))
                .collect();
            let w = Ratio::new(1, (n * allowed.len()) as i64);
            for &t in &allowed {
                let mut image = m.image().to_vec();
                image[i - 1] = t;
                probs[a][index[image.as_slice()]] += w;
            }
        }
    }
    Ok(TransitionMatrix { states, probs })
}

/// Observations recorded along a run of the chain.
#[derive(Debug, Clone)]
pub struct ChainTrace {
    /// Step indices at which observers fired: `0, stride, 2·stride, …, ≤ steps`.
    pub times: Vec<u64>,
    /// One column per observer, in the order given.
    pub columns: Vec<(String, Vec<f64>)>,
    pub final_state: AcyclicMapping,
}

/// Runs `steps` steps from `m0`, calling each observer on the initial state
/// and then after every `stride`-th step.
pub fn run_chain<R: Rng + ?Sized>(
    m0: &AcyclicMapping,
    steps: u64,
    stride: u64,
    observers: &[&dyn Observer],
    rng: &mut R,
) -> Result<ChainTrace> {
    if stride == 0 {
        return Err(Error::Domain("stride must be positive".into()));
    }
    let mut state = ChainState::new(m0.clone());
    let mut times = Vec::new();
    let mut columns: Vec<(String, Vec<f64>)> = observers
        .iter()
        .map(|o| (o.name().to_string(), Vec::new()))
        .collect();
    let mut record = |t: u64, state: &ChainState| {
        times.push(t);
        for (o, (_, col)) in observers.iter().zip(columns.iter_mut()) {
            col.push(o.observe(state));
        }
    };
    record(0, &state);
    for t in 1..=steps {
        state.step(rng);
        if t % stride == 0 {
            record(t, &state);
        }
    }
    Ok(ChainTrace {
        times,
        columns,
        final_state: state.to_mapping(),
    })
}

//! Acyclic random mappings, their path and tree encodings, and the
//! excursion calculus used to study their scaling limit.

pub mod chain;
pub mod error;
pub mod excursion;
pub mod mapping;
pub mod montecarlo;
pub mod path_codec;
pub mod rng;
pub mod rtree;

pub use error::{Error, Result};
pub use excursion::GridFunction;
pub use mapping::{AcyclicMapping, Forest, Mapping};
pub use path_codec::LatticePath;
pub use rtree::RootedWeightedTree;

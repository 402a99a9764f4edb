use std::collections::BTreeMap;
use std::sync::Arc;

use super::ChainState;
use crate::error::{Error, Result};

/// A scalar statistic of the chain state.
///
/// Observers are shared between chains running on different threads, so
/// they take `&self` and must be `Send + Sync`.
pub trait Observer: Send + Sync {
    fn name(&self) -> &str;
    fn observe(&self, state: &ChainState) -> f64;
}

/// Number of fixed points (tree components).
#[derive(Debug, Clone, Copy, Default)]
pub struct FixedPoints;

impl Observer for FixedPoints {
    fn name(&self) -> &str {
        "fixed-points"
    }

    fn observe(&self, state: &ChainState) -> f64 {
        state.fixed_points() as f64
    }
}

/// Maximum depth, counting roots as depth one.
#[derive(Debug, Clone, Copy, Default)]
pub struct Height;

impl Observer for Height {
    fn name(&self) -> &str {
        "height"
    }

    fn observe(&self, state: &ChainState) -> f64 {
        state.height() as f64
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LargestTree;

impl Observer for LargestTree {
    fn name(&self) -> &str {
        "largest-tree"
    }

    fn observe(&self, state: &ChainState) -> f64 {
        state.largest_tree() as f64
    }
}

/// Observers addressable by name, e.g. from a `--observe a,b` flag.
#[derive(Clone, Default)]
pub struct ObserverRegistry {
    entries: BTreeMap<String, Arc<dyn Observer>>,
}

impl ObserverRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn with_builtins() -> Self {
        let mut reg = Self::empty();
        reg.register(Arc::new(FixedPoints));
        reg.register(Arc::new(Height));
        reg.register(Arc::new(LargestTree));
        reg
    }

    /// Adds or replaces the observer under its own name.
    pub fn register(&mut self, observer: Arc<dyn Observer>) {
        self.entries.insert(observer.name().to_string(), observer);
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Observer>> {
        self.entries.get(name).cloned().ok_or_else(|| Error::UnknownName {
            kind: "observer",
            name: name.to_string(),
            available: self.names().join(", "),
        })
    }

    /// Resolves a comma-separated list, keeping the given order.
    pub fn parse_list(&self, list: &str) -> Result<Vec<Arc<dyn Observer>>> {
        list.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|name| self.get(name))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::AcyclicMapping;

    #[test]
    fn builtins_resolve_in_order() {
        let reg = ObserverRegistry::with_builtins();
        let obs = reg.parse_list("height, fixed-points").unwrap();
        let names: Vec<&str> = obs.iter().map(|o| o.name()).collect();
        assert_eq!(names, ["height", "fixed-points"]);
        let err = reg.parse_list("height,diameter").err().unwrap();
        assert!(err.to_string().contains("diameter"));
    }

    #[test]
    fn builtin_values() {
        let state = ChainState::new(AcyclicMapping::new(vec![1, 1, 2, 2, 3, 6]).unwrap());
        assert_eq!(FixedPoints.observe(&state), 2.0);
        assert_eq!(Height.observe(&state), 4.0);
        assert_eq!(LargestTree.observe(&state), 5.0);
    }
}

//! Name-keyed registries of interchangeable algorithm implementations.
//!
//! Each family of algorithms (Hermitian eigensolvers, congruence counters)
//! sits behind a trait; concrete variants register under a stable name and
//! are looked up at runtime from configuration or command-line flags.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{CatError, Result};

/// Anything that can be registered must report its own name.
pub trait Named {
    fn name(&self) -> &'static str;
}

pub struct Registry<T: ?Sized + Named> {
    entries: BTreeMap<&'static str, Arc<T>>,
}

impl<T: ?Sized + Named> Default for Registry<T> {
    fn default() -> Self {
        Self { entries: BTreeMap::new() }
    }
}

impl<T: ?Sized + Named> Registry<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers `item` under its own name, replacing any previous entry.
    pub fn register(&mut self, item: Arc<T>) -> &mut Self {
        self.entries.insert(item.name(), item);
        self
    }

    pub fn get(&self, name: &str) -> Result<Arc<T>> {
        self.entries.get(name).cloned().ok_or_else(|| CatError::UnknownStrategy {
            name: name.to_string(),
            available: self.names().join(", "),
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

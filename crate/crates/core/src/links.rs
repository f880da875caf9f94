//! Hebbian full-linking weight store: symmetric co-occurrence counts over
//! unordered symbol pairs.

use std::collections::BTreeMap;

use crate::error::ModelError;
use crate::event::Event;
use crate::symbols::SymbolId;

/// Symmetric pair-count store. Keys are normalised to `(min, max)`, self
/// pairs never exist and every stored pair has count ≥ 1.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinkStore {
    weights: BTreeMap<(SymbolId, SymbolId), u64>,
}

fn key(a: SymbolId, b: SymbolId) -> (SymbolId, SymbolId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl LinkStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Increments every unordered pair of co-active symbols by exactly one.
    /// Single-symbol events contribute no links.
    pub fn record(&mut self, event: &Event) {
        let actives: Vec<SymbolId> = event.actives.iter().copied().collect();
        for i in 0..actives.len() {
            for j in i + 1..actives.len() {
                *self.weights.entry(key(actives[i], actives[j])).or_insert(0) += 1;
            }
        }
    }

    /// Co-occurrence count; 0 for unseen pairs and self pairs.
    pub fn weight(&self, a: SymbolId, b: SymbolId) -> u64 {
        if a == b {
            return 0;
        }
        self.weights.get(&key(a, b)).copied().unwrap_or(0)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (SymbolId, SymbolId, u64)> + '_ {
        self.weights.iter().map(|(&(a, b), &w)| (a, b, w))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Sum of all pair counts.
    pub fn total_mass(&self) -> u64 {
        self.weights.values().sum()
    }

    /// Restores one stored pair (snapshot load path). Self pairs and zero
    /// counts are invalid.
    pub fn set_weight(&mut self, a: SymbolId, b: SymbolId, count: u64) -> Result<(), ModelError> {
        if a == b || count == 0 {
            return Err(ModelError::CorruptSnapshot(format!(
                "invalid link entry ({}, {}, {count})",
                a.0, b.0
            )));
        }
        self.weights.insert(key(a, b), count);
        Ok(())
    }
}

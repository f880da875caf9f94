//! Symbol interning. Labels map bijectively to dense ids in first-seen order.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Dense identifier for an interned symbol label.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct SymbolId(pub u32);

impl std::fmt::Display for SymbolId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Bijective label ↔ id table. Ids are assigned contiguously from 0 in
/// first-seen order, which makes snapshots reproducible for a fixed corpus
/// order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolTable {
    labels: Vec<String>,
    index: HashMap<String, SymbolId>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Interns a label, returning the existing id when the label was seen
    /// before. Labels are trimmed; an empty label is a validation error.
    pub fn intern(&mut self, label: &str) -> Result<SymbolId, ModelError> {
        let label = label.trim();
        if label.is_empty() {
            return Err(ModelError::EmptySymbolLabel);
        }
        if let Some(&id) = self.index.get(label) {
            return Ok(id);
        }
        let id = SymbolId(self.labels.len() as u32);
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), id);
        Ok(id)
    }

    pub fn lookup(&self, label: &str) -> Option<SymbolId> {
        self.index.get(label.trim()).copied()
    }

    pub fn label(&self, id: SymbolId) -> Option<&str> {
        self.labels.get(id.0 as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// All ids in ascending order.
    pub fn ids(&self) -> impl Iterator<Item = SymbolId> + '_ {
        (0..self.labels.len() as u32).map(SymbolId)
    }

    /// Labels in id order.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Rebuilds a table from labels in id order (snapshot load path).
    pub fn from_labels(labels: Vec<String>) -> Result<Self, ModelError> {
        let mut table = SymbolTable::new();
        for label in &labels {
            table.intern(label)?;
        }
        if table.labels.len() != labels.len() {
            return Err(ModelError::CorruptSnapshot(
                "duplicate labels in symbol table".into(),
            ));
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_idempotent_and_dense() {
        let mut t = SymbolTable::new();
        assert_eq!(t.intern("window").unwrap(), SymbolId(0));
        assert_eq!(t.intern("window").unwrap(), SymbolId(0));
        assert_eq!(t.intern("door").unwrap(), SymbolId(1));
        assert_eq!(t.label(SymbolId(1)), Some("door"));
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn empty_label_rejected() {
        let mut t = SymbolTable::new();
        assert!(matches!(t.intern("  "), Err(ModelError::EmptySymbolLabel)));
    }

    #[test]
    fn labels_are_trimmed() {
        let mut t = SymbolTable::new();
        let a = t.intern(" roof ").unwrap();
        assert_eq!(t.intern("roof").unwrap(), a);
    }
}

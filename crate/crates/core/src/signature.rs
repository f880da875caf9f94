//! Canonical path signatures. Equal member paths digest to equal signatures
//! regardless of listing order; distinct paths must never share a digest.

use std::collections::BTreeSet;

use sha2::{Digest, Sha256};

use crate::symbols::SymbolId;

/// Digest over an id-sorted group member path.
pub fn group_path_signature(members: &BTreeSet<SymbolId>) -> String {
    let mut hasher = Sha256::new();
    hasher.update(b"group|");
    for id in members {
        hasher.update(id.0.to_be_bytes());
        hasher.update(b",");
    }
    hex(&hasher.finalize())
}

/// Digest over a type's canonical (feature sets, regions) path. Feature sets
/// are sorted internally and against each other before hashing.
pub fn type_path_signature(features: &[BTreeSet<SymbolId>], regions: &BTreeSet<u32>) -> String {
    let mut sorted: Vec<&BTreeSet<SymbolId>> = features.iter().collect();
    sorted.sort();
    sorted.dedup();
    let mut hasher = Sha256::new();
    hasher.update(b"type|");
    for set in sorted {
        for id in set.iter() {
            hasher.update(id.0.to_be_bytes());
            hasher.update(b",");
        }
        hasher.update(b";");
    }
    hasher.update(b"|regions|");
    for r in regions {
        hasher.update(r.to_be_bytes());
        hasher.update(b",");
    }
    hex(&hasher.finalize())
}

fn hex(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_signature_is_order_free_and_stable() {
        let a: BTreeSet<SymbolId> = [SymbolId(2), SymbolId(0)].into_iter().collect();
        let b: BTreeSet<SymbolId> = [SymbolId(0), SymbolId(2)].into_iter().collect();
        assert_eq!(group_path_signature(&a), group_path_signature(&b));
        assert_eq!(group_path_signature(&a), group_path_signature(&a));
    }

    #[test]
    fn distinct_member_sets_get_distinct_signatures() {
        let a: BTreeSet<SymbolId> = [SymbolId(0), SymbolId(1)].into_iter().collect();
        let b: BTreeSet<SymbolId> = [SymbolId(0), SymbolId(2)].into_iter().collect();
        assert_ne!(group_path_signature(&a), group_path_signature(&b));
    }

    #[test]
    fn type_signature_ignores_feature_listing_order() {
        let f1: BTreeSet<SymbolId> = [SymbolId(0)].into_iter().collect();
        let f2: BTreeSet<SymbolId> = [SymbolId(1), SymbolId(2)].into_iter().collect();
        let regions = BTreeSet::from([0u32]);
        assert_eq!(
            type_path_signature(&[f1.clone(), f2.clone()], &regions),
            type_path_signature(&[f2, f1], &regions),
        );
    }

    #[test]
    fn type_signature_depends_on_region() {
        let f: BTreeSet<SymbolId> = [SymbolId(0)].into_iter().collect();
        assert_ne!(
            type_path_signature(std::slice::from_ref(&f), &BTreeSet::from([0u32])),
            type_path_signature(std::slice::from_ref(&f), &BTreeSet::from([1u32])),
        );
    }
}

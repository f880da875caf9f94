//! Error type shared by all engine modules.

use thiserror::Error;

use crate::symbols::SymbolId;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("symbol label is empty")]
    EmptySymbolLabel,

    #[error("line {line}: malformed record: {reason}")]
    MalformedRecord { line: usize, reason: String },

    #[error("line {line}: event has no symbols")]
    EmptyEvent { line: usize },

    #[error("line {line}: sequence index {seq} not greater than previous {prev}")]
    NonMonotoneSeq { line: usize, seq: u64, prev: u64 },

    #[error("no events in corpus")]
    NoEvents,

    #[error("unknown symbol: {0}")]
    UnknownSymbol(String),

    #[error("unknown node {node} at grid level {level}")]
    UnknownNode { node: u32, level: u32 },

    #[error("unit activity threshold must be in (0, 1], got {0}")]
    InvalidTheta(f64),

    #[error("{name} must be at least {min}, got {value}")]
    InvalidThreshold {
        name: &'static str,
        min: u64,
        value: u64,
    },

    #[error("unit {unit_id}: full member set missing from subpatterns")]
    MissingRootPattern { unit_id: u32 },

    #[error("unit {unit_id}: subpattern supports violate the counting rule")]
    CountingRuleViolation { unit_id: u32 },

    #[error("unit {unit_id}: conflicting supports for one subpattern set")]
    ConflictingSubpattern { unit_id: u32 },

    #[error("tree node index {0} out of range")]
    UnknownTreeNode(usize),

    #[error("feature set is empty")]
    EmptyFeatureSet,

    #[error("unknown region {0}")]
    UnknownRegion(u32),

    #[error("region {region} skips ahead of next free region id {next}")]
    NonContiguousRegion { region: u32, next: u32 },

    #[error("path signature collision between types {existing:?} and {incoming:?}")]
    PathCollision {
        existing: SymbolId,
        incoming: SymbolId,
    },

    #[error("feature did not fire in the recognition trace")]
    FeatureNotFired,

    #[error("no feature node with the given member set")]
    UnknownFeature,

    #[error("groups {0} and {1} share one path signature")]
    DuplicateGroupPath(u32, u32),

    #[error("unknown group {0}")]
    UnknownGroup(u32),

    #[error("group {0} has no members")]
    EmptyGroup(u32),

    #[error("unknown concept id {0}")]
    UnknownConcept(u32),

    #[error("relation may not pair a concept with itself (concept {0})")]
    SelfRelation(u32),

    #[error("inhibitor must connect two distinct groups (group {0})")]
    SelfInhibitor(u32),

    #[error("schedule is empty")]
    EmptySchedule,

    #[error("invalid build config: {0}")]
    InvalidConfig(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("unsupported snapshot format version {found} (supported: {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },

    #[error("corrupt snapshot: {0}")]
    CorruptSnapshot(String),
}

//! Deterministic engine for building a layered cognitive model from event corpora.
//!
//! The build pipeline ingests JSON Lines event records into an interned symbol
//! space, accumulates pairwise co-occurrence counts, self-organises symbols
//! into units via best-partner relations, grows an inverted concept tree above
//! each unit ensemble, assembles a type-set-match semantic network from
//! labelled events, and scaffolds a two-layer procedural logic net with
//! inhibitor arbitration. Every stage is order-deterministic so repeated
//! builds of the same corpus produce byte-identical snapshots.

pub mod dot;
pub mod error;
pub mod event;
pub mod grid;
pub mod links;
pub mod logic;
pub mod pipeline;
pub mod semantic;
pub mod signature;
pub mod snapshot;
pub mod symbols;
pub mod tree;

pub use error::ModelError;
pub use event::Event;
pub use grid::{PairCountGrid, RegularityReport, Unit};
pub use links::LinkStore;
pub use logic::{Group, LayerState, LogicNet, Outcome, PropagationState};
pub use pipeline::{build_model, BuildConfig, Model};
pub use semantic::{
    FeatureSetNode, RecognitionTrace, Region, SceneBinding, StoredPattern, TypeNode,
    TypeSetMatchNet,
};
pub use symbols::{SymbolId, SymbolTable};
pub use tree::{ConceptTree, DistinctnessSignal, TreeNode};

//! Full build pipeline: corpus → links → grid levels → trees → semantic net
//! → logic scaffold, driven by an explicit configuration. The pipeline is
//! free of randomness; the optional seed only permutes corpus order for
//! order-sensitivity experiments.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::event::Event;
use crate::grid::{aggregate_units, refine_within_units, PairCountGrid, RegularityReport, Unit};
use crate::links::LinkStore;
use crate::logic::{build_logic_net, LogicNet};
use crate::semantic::{RecognitionTrace, StoredPattern, TypeSetMatchNet};
use crate::symbols::{SymbolId, SymbolTable};
use crate::tree::{build_inverted_tree, mine_subpatterns, ConceptTree};

/// Build parameters. Everything has a documented default so a config file
/// may specify any subset of fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuildConfig {
    /// Minimum event support for mined subpatterns.
    pub min_support: u64,
    /// Fraction of unit members that must be active for the unit to fire.
    pub theta: f64,
    /// Recognition rounds, including the initial scoring round.
    pub rounds: u32,
    /// Distinctness boost applied when a type's tree root fires.
    pub boost: f64,
    /// Propagation step budget for the logic layer.
    pub s_max: u32,
    /// Co-firing events required for a region merge proposal.
    pub merge_threshold: u64,
    /// Shared feature nodes required for an induction proposal.
    pub induction_k: usize,
    /// When set, deterministically permutes corpus order before the build.
    pub seed_order: Option<u64>,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self {
            min_support: 1,
            theta: 0.5,
            rounds: 2,
            boost: 1.0,
            s_max: 100,
            merge_threshold: 2,
            induction_k: 2,
            seed_order: None,
        }
    }
}

impl BuildConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.min_support < 1 {
            return Err(ModelError::InvalidConfig("min_support must be >= 1".into()));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(ModelError::InvalidConfig("theta must be in (0, 1]".into()));
        }
        if self.rounds < 1 {
            return Err(ModelError::InvalidConfig("rounds must be >= 1".into()));
        }
        if !self.boost.is_finite() || self.boost < 0.0 {
            return Err(ModelError::InvalidConfig(
                "boost must be finite and >= 0".into(),
            ));
        }
        if self.s_max < 1 {
            return Err(ModelError::InvalidConfig("s_max must be >= 1".into()));
        }
        if self.merge_threshold < 1 {
            return Err(ModelError::InvalidConfig(
                "merge_threshold must be >= 1".into(),
            ));
        }
        if self.induction_k < 1 {
            return Err(ModelError::InvalidConfig("induction_k must be >= 1".into()));
        }
        Ok(())
    }
}

/// The complete built model.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: BuildConfig,
    pub symbols: SymbolTable,
    pub links: LinkStore,
    pub level1: PairCountGrid,
    pub units1: Vec<Unit>,
    pub level2: PairCountGrid,
    pub regularity: Vec<RegularityReport>,
    pub level3: PairCountGrid,
    pub units3: Vec<Unit>,
    /// Concept trees over level-1 units whose full ensemble meets
    /// `min_support`; keyed by unit id.
    pub unit_trees: BTreeMap<u32, ConceptTree>,
    pub net: TypeSetMatchNet,
    pub logic: LogicNet,
}

/// Splits a labelled ensemble into feature sets: symbols shared with another
/// labelled ensemble become singleton features, the private remainder is
/// partitioned along level-1 unit boundaries with unitless leftovers as
/// singletons.
fn decompose_features(
    ensemble: &BTreeSet<SymbolId>,
    shared: &BTreeSet<SymbolId>,
    units: &[Unit],
) -> Vec<BTreeSet<SymbolId>> {
    let mut features: Vec<BTreeSet<SymbolId>> = Vec::new();
    for &m in ensemble.intersection(shared) {
        features.push(BTreeSet::from([m]));
    }
    let private: BTreeSet<SymbolId> = ensemble.difference(shared).copied().collect();
    let mut covered: BTreeSet<SymbolId> = BTreeSet::new();
    for unit in units {
        let piece: BTreeSet<SymbolId> = private
            .iter()
            .filter(|s| unit.members.contains(&s.0))
            .copied()
            .collect();
        if !piece.is_empty() {
            covered.extend(piece.iter().copied());
            features.push(piece);
        }
    }
    for &m in private.difference(&covered) {
        features.push(BTreeSet::from([m]));
    }
    features.sort();
    features.dedup();
    features
}

/// Runs the whole pipeline over an ingested corpus.
pub fn build_model(
    mut events: Vec<Event>,
    symbols: SymbolTable,
    config: BuildConfig,
) -> Result<Model, ModelError> {
    config.validate()?;
    if events.is_empty() {
        return Err(ModelError::NoEvents);
    }
    if let Some(seed) = config.seed_order {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        events.shuffle(&mut rng);
    }

    let mut links = LinkStore::new();
    for event in &events {
        links.record(event);
    }

    let mut level1 = PairCountGrid::new(1, symbols.ids().map(|s| s.0).collect());
    for event in &events {
        level1.update_counts(&event.active_raw())?;
    }
    let units1 = level1.derive_units();
    let (level2, regularity) = refine_within_units(&events, &units1);
    let (level3, units3) = aggregate_units(&events, &units1, config.theta)?;

    let mut unit_trees = BTreeMap::new();
    for unit in &units1 {
        let members: BTreeSet<SymbolId> = unit.members.iter().map(|&m| SymbolId(m)).collect();
        let mined = mine_subpatterns(&members, &events, config.min_support)?;
        if mined.iter().any(|(s, _)| s == &members) {
            let tree = build_inverted_tree(unit.unit_id, &members, &mined)?;
            unit_trees.insert(unit.unit_id, tree);
        }
    }

    // labelled ensembles in first-appearance order
    let mut label_order: Vec<SymbolId> = Vec::new();
    let mut ensembles: BTreeMap<SymbolId, BTreeSet<SymbolId>> = BTreeMap::new();
    for event in &events {
        if let Some(label) = event.label {
            if !label_order.contains(&label) {
                label_order.push(label);
            }
            ensembles
                .entry(label)
                .or_default()
                .extend(event.actives.iter().copied());
        }
    }
    let mut member_counts: BTreeMap<SymbolId, usize> = BTreeMap::new();
    for ensemble in ensembles.values() {
        for &m in ensemble {
            *member_counts.entry(m).or_insert(0) += 1;
        }
    }
    let shared: BTreeSet<SymbolId> = member_counts
        .iter()
        .filter(|(_, &n)| n >= 2)
        .map(|(&m, _)| m)
        .collect();

    let mut net = TypeSetMatchNet::new();
    for &label in &label_order {
        let ensemble = &ensembles[&label];
        let features = decompose_features(ensemble, &shared, &units1);
        let region = net.place_pattern(StoredPattern {
            label,
            members: ensemble.clone(),
        });
        net.register_type(label, &features, region)?;
        let mined = mine_subpatterns(ensemble, &events, config.min_support)?;
        if mined.iter().any(|(s, _)| s == ensemble) {
            let tree = build_inverted_tree(label.0, ensemble, &mined)?;
            net.attach_tree(label, tree);
        }
    }

    // logic scaffold: active symbols as concepts, co-occurrence pairs as
    // relations, level-1 units as mutually inclusive groups
    let concepts: BTreeSet<SymbolId> = events
        .iter()
        .flat_map(|e| e.actives.iter().copied())
        .collect();
    let relations: Vec<(SymbolId, SymbolId)> = links.pairs().map(|(a, b, _)| (a, b)).collect();
    let groups: Vec<BTreeSet<SymbolId>> = units1
        .iter()
        .map(|u| u.members.iter().map(|&m| SymbolId(m)).collect())
        .collect();
    let logic = build_logic_net(&concepts, &relations, &groups, &[])?;

    Ok(Model {
        config,
        symbols,
        links,
        level1,
        units1,
        level2,
        regularity,
        level3,
        units3,
        unit_trees,
        net,
        logic,
    })
}

impl Model {
    /// Looks up labels and runs recognition with the configured round count
    /// (or an explicit override).
    pub fn recognize_labels(
        &self,
        labels: &[&str],
        rounds: Option<u32>,
    ) -> Result<RecognitionTrace, ModelError> {
        let mut actives = BTreeSet::new();
        for label in labels {
            let id = self
                .symbols
                .lookup(label)
                .ok_or_else(|| ModelError::UnknownSymbol(label.to_string()))?;
            actives.insert(id);
        }
        Ok(self.net.recognize(
            &actives,
            rounds.unwrap_or(self.config.rounds),
            self.config.boost,
        ))
    }

    /// Resolves a comma-separated symbol list to ids.
    pub fn resolve_symbols(&self, labels: &[&str]) -> Result<BTreeSet<SymbolId>, ModelError> {
        labels
            .iter()
            .map(|l| {
                self.symbols
                    .lookup(l)
                    .ok_or_else(|| ModelError::UnknownSymbol(l.to_string()))
            })
            .collect()
    }
}

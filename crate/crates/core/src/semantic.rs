//! Type-set-match semantic network: ensemble regions at the base, shared
//! feature-set nodes above them, type nodes on top. Recognition scores types
//! by their fired features, then feeds the leading type's regions back as an
//! ensemble boost. Scene bindings keep combined concepts distinct through
//! explicit cross-layer link pairs.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::ModelError;
use crate::signature::type_path_signature;
use crate::symbols::SymbolId;
use crate::tree::ConceptTree;

pub type RegionId = u32;
pub type FeatureId = usize;

/// A type node and its weighted links down to feature-set nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeNode {
    pub type_id: SymbolId,
    pub feature_links: BTreeMap<FeatureId, u64>,
}

/// A feature-set node, shared between all types registering an identical
/// member set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSetNode {
    pub members: BTreeSet<SymbolId>,
    pub owning_regions: BTreeSet<RegionId>,
    pub type_links: BTreeSet<SymbolId>,
}

/// A labelled base pattern stored in a region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoredPattern {
    pub label: SymbolId,
    pub members: BTreeSet<SymbolId>,
}

/// A base region holding labelled ensembles, with neighbours ordered by
/// shared-feature overlap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub region_id: RegionId,
    pub ensembles: Vec<StoredPattern>,
    pub neighbor_order: Vec<RegionId>,
}

/// Per-round recognition record.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RoundTrace {
    pub round: u32,
    pub fired_features: Vec<FeatureId>,
    pub pattern_activations: Vec<PatternActivation>,
    pub type_scores: Vec<(SymbolId, f64)>,
    pub leader: Option<SymbolId>,
}

/// Overlap of one stored pattern with the actives during a boost round.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PatternActivation {
    pub region: RegionId,
    pub pattern: usize,
    pub label: SymbolId,
    pub overlap: u64,
}

/// Full recognition trace: at most the requested number of rounds, plus the
/// final ranking with ties broken by smallest type id.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RecognitionTrace {
    pub rounds: Vec<RoundTrace>,
    pub final_ranking: Vec<(SymbolId, f64)>,
}

/// Lateral knowledge-to-knowledge link: a singleton leaf of one tree pointing
/// at another tree whose ensemble shares the member.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct LateralLink {
    pub from_tree: u32,
    pub member: SymbolId,
    pub to_tree: u32,
}

/// Proposal to merge two regions that keep co-firing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeProposal {
    pub region_a: RegionId,
    pub region_b: RegionId,
    pub cofire_events: u64,
    pub merged_ensemble: BTreeSet<SymbolId>,
    pub retained: Vec<StoredPattern>,
}

/// Two mirrored concept layers with one cross link per bound pair; every
/// mentioned concept also links to itself between the layers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SceneBinding {
    pub concepts: BTreeSet<SymbolId>,
    pub pair_links: BTreeSet<(SymbolId, SymbolId)>,
}

impl SceneBinding {
    /// Builds the binding layers from (attribute, object) pairs. Duplicates
    /// collapse; one attribute may bind several objects.
    pub fn bind(pairs: &[(SymbolId, SymbolId)]) -> Self {
        let mut concepts = BTreeSet::new();
        let mut pair_links = BTreeSet::new();
        for &(a, o) in pairs {
            concepts.insert(a);
            concepts.insert(o);
            pair_links.insert((a, o));
        }
        Self {
            concepts,
            pair_links,
        }
    }

    /// True iff the cross link exists. Self links exist for every mentioned
    /// concept by construction.
    pub fn is_bound(&self, attribute: SymbolId, object: SymbolId) -> bool {
        if attribute == object {
            return self.concepts.contains(&attribute);
        }
        self.pair_links.contains(&(attribute, object))
    }
}

/// The three-tier net plus the binding and transition machinery.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TypeSetMatchNet {
    types: BTreeMap<SymbolId, TypeNode>,
    features: Vec<FeatureSetNode>,
    regions: Vec<Region>,
    type_trees: BTreeMap<SymbolId, ConceptTree>,
    /// Committed type-type links (accepted induction proposals).
    type_links: BTreeSet<(SymbolId, SymbolId)>,
    path_signatures: BTreeMap<String, SymbolId>,
}

impl TypeSetMatchNet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Reassembles a net from stored parts, recomputing and re-checking every
    /// type's canonical path signature (snapshot load path).
    pub fn from_parts(
        types: Vec<TypeNode>,
        features: Vec<FeatureSetNode>,
        regions: Vec<Region>,
        type_trees: BTreeMap<SymbolId, ConceptTree>,
        type_links: BTreeSet<(SymbolId, SymbolId)>,
    ) -> Result<Self, ModelError> {
        let mut net = Self {
            types: types.into_iter().map(|t| (t.type_id, t)).collect(),
            features,
            regions,
            type_trees,
            type_links,
            path_signatures: BTreeMap::new(),
        };
        let labels: Vec<SymbolId> = net.types.keys().copied().collect();
        for label in labels {
            let sets: Vec<BTreeSet<SymbolId>> = net.types[&label]
                .feature_links
                .keys()
                .map(|&fid| {
                    net.features.get(fid).map(|f| f.members.clone()).ok_or(
                        ModelError::CorruptSnapshot("feature link out of range".into()),
                    )
                })
                .collect::<Result<_, _>>()?;
            let regions = net.type_regions(label);
            let signature = type_path_signature(&sets, &regions);
            if let Some(&existing) = net.path_signatures.get(&signature) {
                return Err(ModelError::PathCollision {
                    existing,
                    incoming: label,
                });
            }
            net.path_signatures.insert(signature, label);
        }
        Ok(net)
    }

    pub fn types(&self) -> impl Iterator<Item = &TypeNode> {
        self.types.values()
    }

    pub fn type_ids(&self) -> impl Iterator<Item = SymbolId> + '_ {
        self.types.keys().copied()
    }

    pub fn features(&self) -> &[FeatureSetNode] {
        &self.features
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn type_tree(&self, type_id: SymbolId) -> Option<&ConceptTree> {
        self.type_trees.get(&type_id)
    }

    pub fn type_trees(&self) -> impl Iterator<Item = (SymbolId, &ConceptTree)> {
        self.type_trees.iter().map(|(&id, t)| (id, t))
    }

    pub fn committed_links(&self) -> &BTreeSet<(SymbolId, SymbolId)> {
        &self.type_links
    }

    pub fn feature_by_members(&self, members: &BTreeSet<SymbolId>) -> Option<FeatureId> {
        self.features.iter().position(|f| &f.members == members)
    }

    /// Registers (or extends) a type: feature-set nodes are created once and
    /// shared across types with identical member sets, each linked to the
    /// type with weight 1. Re-registering the identical structure is a no-op;
    /// a different type claiming an identical canonical path is a hard error.
    pub fn register_type(
        &mut self,
        label: SymbolId,
        feature_sets: &[BTreeSet<SymbolId>],
        region: RegionId,
    ) -> Result<(), ModelError> {
        if feature_sets.is_empty() || feature_sets.iter().any(BTreeSet::is_empty) {
            return Err(ModelError::EmptyFeatureSet);
        }
        self.ensure_region(region)?;

        // prospective structure after this registration
        let mut future_sets: Vec<BTreeSet<SymbolId>> = self
            .types
            .get(&label)
            .map(|t| {
                t.feature_links
                    .keys()
                    .map(|&fid| self.features[fid].members.clone())
                    .collect()
            })
            .unwrap_or_default();
        future_sets.extend(feature_sets.iter().cloned());
        let mut future_regions: BTreeSet<RegionId> = self.type_regions(label).into_iter().collect();
        future_regions.insert(region);
        let signature = type_path_signature(&future_sets, &future_regions);
        if let Some(&existing) = self.path_signatures.get(&signature) {
            if existing != label {
                return Err(ModelError::PathCollision {
                    existing,
                    incoming: label,
                });
            }
        }
        // drop the type's previous signature before inserting the new one
        self.path_signatures.retain(|_, &mut t| t != label);
        self.path_signatures.insert(signature, label);

        let entry = self.types.entry(label).or_insert_with(|| TypeNode {
            type_id: label,
            feature_links: BTreeMap::new(),
        });
        let mut feature_ids = Vec::new();
        for set in feature_sets {
            let fid = match self.features.iter().position(|f| &f.members == set) {
                Some(fid) => fid,
                None => {
                    self.features.push(FeatureSetNode {
                        members: set.clone(),
                        owning_regions: BTreeSet::new(),
                        type_links: BTreeSet::new(),
                    });
                    self.features.len() - 1
                }
            };
            feature_ids.push(fid);
        }
        for fid in feature_ids {
            self.features[fid].owning_regions.insert(region);
            self.features[fid].type_links.insert(label);
            entry.feature_links.entry(fid).or_insert(1);
        }

        // the type's full pattern lives in the region it registered into
        let members: BTreeSet<SymbolId> = feature_sets.iter().flatten().copied().collect();
        let pattern = StoredPattern { label, members };
        let slot = &mut self.regions[region as usize];
        if !slot.ensembles.contains(&pattern) {
            slot.ensembles.push(pattern);
        }
        self.recompute_neighbor_orders();
        Ok(())
    }

    /// Attaches the concept tree that provides the type's distinctness signal
    /// during recognition feedback.
    pub fn attach_tree(&mut self, label: SymbolId, tree: ConceptTree) {
        self.type_trees.insert(label, tree);
    }

    fn ensure_region(&mut self, region: RegionId) -> Result<(), ModelError> {
        let next = self.regions.len() as u32;
        if region > next {
            return Err(ModelError::NonContiguousRegion { region, next });
        }
        if region == next {
            self.regions.push(Region {
                region_id: region,
                ensembles: Vec::new(),
                neighbor_order: Vec::new(),
            });
        }
        Ok(())
    }

    fn type_regions(&self, label: SymbolId) -> BTreeSet<RegionId> {
        self.regions
            .iter()
            .filter(|r| r.ensembles.iter().any(|p| p.label == label))
            .map(|r| r.region_id)
            .collect()
    }

    fn shared_feature_count(&self, a: RegionId, b: RegionId) -> usize {
        self.features
            .iter()
            .filter(|f| f.owning_regions.contains(&a) && f.owning_regions.contains(&b))
            .count()
    }

    fn recompute_neighbor_orders(&mut self) {
        let ids: Vec<RegionId> = self.regions.iter().map(|r| r.region_id).collect();
        for i in 0..self.regions.len() {
            let me = self.regions[i].region_id;
            let mut scored: Vec<(usize, RegionId)> = ids
                .iter()
                .filter(|&&other| other != me)
                .map(|&other| (self.shared_feature_count(me, other), other))
                .filter(|&(overlap, _)| overlap > 0)
                .collect();
            scored.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
            self.regions[i].neighbor_order = scored.into_iter().map(|(_, r)| r).collect();
        }
    }

    /// Neighbouring regions by descending shared-feature overlap, then
    /// ascending id. Regions with zero overlap are not neighbours.
    pub fn neighbor_index(&self, region: RegionId) -> Result<&[RegionId], ModelError> {
        self.regions
            .get(region as usize)
            .map(|r| r.neighbor_order.as_slice())
            .ok_or(ModelError::UnknownRegion(region))
    }

    /// Stigmergic placement: the pattern is stored in the region whose
    /// feature imprint it overlaps the most (count of owned feature nodes
    /// fully contained in the pattern). Zero overlap everywhere opens a fresh
    /// region; ties go to the smallest region id.
    pub fn place_pattern(&mut self, pattern: StoredPattern) -> RegionId {
        let mut best: Option<(usize, RegionId)> = None;
        for region in &self.regions {
            let overlap = self
                .features
                .iter()
                .filter(|f| {
                    f.owning_regions.contains(&region.region_id)
                        && f.members.is_subset(&pattern.members)
                })
                .count();
            if overlap == 0 {
                continue;
            }
            let better = match best {
                None => true,
                Some((bo, br)) => overlap > bo || (overlap == bo && region.region_id < br),
            };
            if better {
                best = Some((overlap, region.region_id));
            }
        }
        let target = match best {
            Some((_, rid)) => rid,
            None => {
                let rid = self.regions.len() as u32;
                self.regions.push(Region {
                    region_id: rid,
                    ensembles: Vec::new(),
                    neighbor_order: Vec::new(),
                });
                rid
            }
        };
        let slot = &mut self.regions[target as usize];
        if !slot.ensembles.contains(&pattern) {
            slot.ensembles.push(pattern);
        }
        self.recompute_neighbor_orders();
        target
    }

    /// Recognition with feedback. Round 0 scores every type by the summed
    /// weights of its fired features (a feature fires iff its members are all
    /// active). Each following round re-scores after the leading type's
    /// regions receive the ensemble boost: every stored pattern in a boosted
    /// region contributes its active-member overlap to its own type, and the
    /// leader gains the distinctness boost when its tree root fired. Stops
    /// early at a fixed point or when no leader emerges.
    pub fn recognize(
        &self,
        actives: &BTreeSet<SymbolId>,
        rounds: u32,
        boost: f64,
    ) -> RecognitionTrace {
        let rounds = rounds.max(1);
        let fired: Vec<FeatureId> = self
            .features
            .iter()
            .enumerate()
            .filter(|(_, f)| f.members.is_subset(actives))
            .map(|(i, _)| i)
            .collect();
        let base: BTreeMap<SymbolId, f64> = self
            .types
            .values()
            .map(|t| {
                let score: u64 = t
                    .feature_links
                    .iter()
                    .filter(|(fid, _)| fired.contains(fid))
                    .map(|(_, &w)| w)
                    .sum();
                (t.type_id, score as f64)
            })
            .collect();

        let leader_of = |scores: &BTreeMap<SymbolId, f64>| -> Option<SymbolId> {
            scores
                .iter()
                .filter(|(_, &s)| s > 0.0)
                .max_by(|(ia, sa), (ib, sb)| {
                    sa.partial_cmp(sb)
                        .expect("scores are finite")
                        .then_with(|| ib.cmp(ia))
                })
                .map(|(&id, _)| id)
        };

        let mut trace = RecognitionTrace {
            rounds: Vec::new(),
            final_ranking: Vec::new(),
        };
        let mut scores = base.clone();
        let mut leader = leader_of(&scores);
        trace.rounds.push(RoundTrace {
            round: 0,
            fired_features: fired.clone(),
            pattern_activations: Vec::new(),
            type_scores: scores.iter().map(|(&t, &s)| (t, s)).collect(),
            leader,
        });

        for round in 1..rounds {
            let Some(lead) = leader else { break };
            let boosted: BTreeSet<RegionId> = self.type_regions(lead);
            let mut activations = Vec::new();
            let mut next = base.clone();
            for &rid in &boosted {
                let region = &self.regions[rid as usize];
                for (idx, pattern) in region.ensembles.iter().enumerate() {
                    let overlap = pattern.members.intersection(actives).count() as u64;
                    activations.push(PatternActivation {
                        region: rid,
                        pattern: idx,
                        label: pattern.label,
                        overlap,
                    });
                    if let Some(score) = next.get_mut(&pattern.label) {
                        *score += overlap as f64;
                    }
                }
            }
            let root_fired = self
                .type_trees
                .get(&lead)
                .map(|t| t.nodes[t.root].member_set.is_subset(actives))
                .unwrap_or(false);
            if root_fired {
                if let Some(score) = next.get_mut(&lead) {
                    *score += boost;
                }
            }
            leader = leader_of(&next);
            let fixed_point = next == scores;
            scores = next;
            trace.rounds.push(RoundTrace {
                round,
                fired_features: fired.clone(),
                pattern_activations: activations,
                type_scores: scores.iter().map(|(&t, &s)| (t, s)).collect(),
                leader,
            });
            if fixed_point {
                break;
            }
        }

        let mut ranking: Vec<(SymbolId, f64)> = scores.into_iter().collect();
        ranking.sort_by(|(ia, sa), (ib, sb)| {
            sb.partial_cmp(sa)
                .expect("scores are finite")
                .then_with(|| ia.cmp(ib))
        });
        trace.final_ranking = ranking;
        trace
    }

    /// Resolves which type a fired feature belongs to: the top-ranked type in
    /// the trace among those linked to the feature.
    pub fn associate_feature(
        &self,
        trace: &RecognitionTrace,
        feature_members: &BTreeSet<SymbolId>,
    ) -> Result<SymbolId, ModelError> {
        let fid = self
            .feature_by_members(feature_members)
            .ok_or(ModelError::UnknownFeature)?;
        let fired = trace
            .rounds
            .first()
            .map(|r| r.fired_features.contains(&fid))
            .unwrap_or(false);
        if !fired {
            return Err(ModelError::FeatureNotFired);
        }
        let linked = &self.features[fid].type_links;
        trace
            .final_ranking
            .iter()
            .find(|(t, _)| linked.contains(t))
            .map(|&(t, _)| t)
            .ok_or(ModelError::FeatureNotFired)
    }

    /// Knowledge-to-knowledge transition: lateral links from singleton leaves
    /// in one tree to any other tree whose ensemble shares the member.
    pub fn transition_k2k(trees: &[ConceptTree]) -> Vec<LateralLink> {
        let mut links = BTreeSet::new();
        for from in trees {
            for to in trees {
                if from.unit_id == to.unit_id {
                    continue;
                }
                let to_ensemble = &to.nodes[to.root].member_set;
                for (_, member) in from.singleton_leaves() {
                    if to_ensemble.contains(&member) {
                        links.insert(LateralLink {
                            from_tree: from.unit_id,
                            member,
                            to_tree: to.unit_id,
                        });
                    }
                }
            }
        }
        links.into_iter().collect()
    }

    /// Proposes (typeA, typeB) links for pairs sharing at least `k` feature
    /// nodes without a committed link. Proposals are never auto-committed.
    pub fn propose_induction(&self, k: usize) -> Result<Vec<(SymbolId, SymbolId)>, ModelError> {
        if k < 1 {
            return Err(ModelError::InvalidThreshold {
                name: "induction_k",
                min: 1,
                value: k as u64,
            });
        }
        let ids: Vec<SymbolId> = self.types.keys().copied().collect();
        let mut proposals = Vec::new();
        for i in 0..ids.len() {
            for j in i + 1..ids.len() {
                let (a, b) = (ids[i], ids[j]);
                if self.type_links.contains(&(a, b)) {
                    continue;
                }
                let shared = self
                    .features
                    .iter()
                    .filter(|f| f.type_links.contains(&a) && f.type_links.contains(&b))
                    .count();
                if shared >= k {
                    proposals.push((a, b));
                }
            }
        }
        Ok(proposals)
    }

    /// Commits an induction proposal as a standing type-type link.
    pub fn commit_type_link(&mut self, a: SymbolId, b: SymbolId) {
        let key = if a <= b { (a, b) } else { (b, a) };
        self.type_links.insert(key);
    }

    /// Region pairs co-firing in at least `threshold` events become merge
    /// proposals carrying the union ensemble and the retained sub-patterns.
    pub fn global_merge(
        &self,
        region_activity: &[BTreeSet<RegionId>],
        threshold: u64,
    ) -> Result<Vec<MergeProposal>, ModelError> {
        if threshold < 1 {
            return Err(ModelError::InvalidThreshold {
                name: "merge_threshold",
                min: 1,
                value: threshold,
            });
        }
        let mut cofire: BTreeMap<(RegionId, RegionId), u64> = BTreeMap::new();
        for active in region_activity {
            let list: Vec<RegionId> = active.iter().copied().collect();
            for i in 0..list.len() {
                for j in i + 1..list.len() {
                    *cofire.entry((list[i], list[j])).or_insert(0) += 1;
                }
            }
        }
        let mut proposals = Vec::new();
        for ((a, b), count) in cofire {
            if count < threshold {
                continue;
            }
            let mut merged = BTreeSet::new();
            let mut retained = Vec::new();
            for &rid in &[a, b] {
                if let Some(region) = self.regions.get(rid as usize) {
                    for p in &region.ensembles {
                        merged.extend(p.members.iter().copied());
                        retained.push(p.clone());
                    }
                }
            }
            proposals.push(MergeProposal {
                region_a: a,
                region_b: b,
                cofire_events: count,
                merged_ensemble: merged,
                retained,
            });
        }
        Ok(proposals)
    }
}

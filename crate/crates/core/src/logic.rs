//! Procedural-logic upper level: two mirrored concept layers joined by self
//! and relation links, mutually inclusive groups, and inhibitors that force
//! at most one of two conflicting groups to stay active.
//!
//! Propagation is a synchronous boolean state machine. A node activates when
//! stimulated or when any incoming cross-layer link source was active in the
//! previous step; groups activate when all members are active in either
//! layer; inhibition resolves after every step. Runs settle at a fixed point
//! or report an oscillation, never hang.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::ModelError;
use crate::signature::group_path_signature;
use crate::symbols::SymbolId;

/// A mutually inclusive member set with its canonical path signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub group_id: u32,
    pub members: BTreeSet<SymbolId>,
    pub path_signature: String,
}

/// Two mirrored layers over one concept set. Self links `(a_i, b_i)` exist
/// for every concept; relation links are unordered concept pairs realised as
/// cross-layer links in both directions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LogicNet {
    concepts: BTreeSet<SymbolId>,
    relations: BTreeMap<(SymbolId, SymbolId), u64>,
    groups: Vec<Group>,
    inhibitors: BTreeSet<(u32, u32)>,
}

/// Boolean activation of both layers plus the group flags.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LayerState {
    pub active_a: BTreeSet<SymbolId>,
    pub active_b: BTreeSet<SymbolId>,
    pub group_active: BTreeSet<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Settled,
    Oscillation,
}

/// Result of one propagation run: the final post-resolution state, the step
/// at which it was reached and the full per-step trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropagationState {
    pub step: u32,
    pub state: LayerState,
    pub outcome: Outcome,
    pub trace: Vec<LayerState>,
}

/// Per-entry result of a schedule run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleStep {
    pub group_id: u32,
    pub won: bool,
    pub winners: BTreeSet<u32>,
    pub outcome: Outcome,
    pub steps: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleTrace {
    pub steps: Vec<ScheduleStep>,
}

fn key(a: SymbolId, b: SymbolId) -> (SymbolId, SymbolId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Validates and assembles a logic net. Groups get ids in listing order and
/// their canonical path signatures must be unique.
pub fn build_logic_net(
    concepts: &BTreeSet<SymbolId>,
    relations: &[(SymbolId, SymbolId)],
    groups: &[BTreeSet<SymbolId>],
    inhibitors: &[(u32, u32)],
) -> Result<LogicNet, ModelError> {
    let mut relation_map: BTreeMap<(SymbolId, SymbolId), u64> = BTreeMap::new();
    for &(a, b) in relations {
        if a == b {
            return Err(ModelError::SelfRelation(a.0));
        }
        for c in [a, b] {
            if !concepts.contains(&c) {
                return Err(ModelError::UnknownConcept(c.0));
            }
        }
        *relation_map.entry(key(a, b)).or_insert(0) += 1;
    }
    let mut built_groups = Vec::new();
    let mut seen: BTreeMap<String, u32> = BTreeMap::new();
    for (i, members) in groups.iter().enumerate() {
        let gid = i as u32;
        if members.is_empty() {
            return Err(ModelError::EmptyGroup(gid));
        }
        for m in members {
            if !concepts.contains(m) {
                return Err(ModelError::UnknownConcept(m.0));
            }
        }
        let path_signature = group_path_signature(members);
        if let Some(&other) = seen.get(&path_signature) {
            return Err(ModelError::DuplicateGroupPath(other, gid));
        }
        seen.insert(path_signature.clone(), gid);
        built_groups.push(Group {
            group_id: gid,
            members: members.clone(),
            path_signature,
        });
    }
    let mut inhibitor_set = BTreeSet::new();
    for &(a, b) in inhibitors {
        if a == b {
            return Err(ModelError::SelfInhibitor(a));
        }
        for g in [a, b] {
            if g as usize >= built_groups.len() {
                return Err(ModelError::UnknownGroup(g));
            }
        }
        inhibitor_set.insert((a.min(b), a.max(b)));
    }
    Ok(LogicNet {
        concepts: concepts.clone(),
        relations: relation_map,
        groups: built_groups,
        inhibitors: inhibitor_set,
    })
}

impl LogicNet {
    /// Reassembles a net from stored parts, re-deriving and re-checking group
    /// signatures (snapshot load path).
    pub fn from_parts(
        concepts: BTreeSet<SymbolId>,
        relations: BTreeMap<(SymbolId, SymbolId), u64>,
        groups: Vec<Group>,
        inhibitors: BTreeSet<(u32, u32)>,
    ) -> Result<Self, ModelError> {
        for (&(a, b), &w) in &relations {
            if a >= b || w == 0 || !concepts.contains(&a) || !concepts.contains(&b) {
                return Err(ModelError::CorruptSnapshot("invalid relation entry".into()));
            }
        }
        let mut seen: BTreeMap<String, u32> = BTreeMap::new();
        for (i, group) in groups.iter().enumerate() {
            if group.group_id != i as u32 || group.members.is_empty() {
                return Err(ModelError::CorruptSnapshot("invalid group entry".into()));
            }
            let expected = group_path_signature(&group.members);
            if expected != group.path_signature {
                return Err(ModelError::CorruptSnapshot(
                    "group signature does not match members".into(),
                ));
            }
            if let Some(&other) = seen.get(&expected) {
                return Err(ModelError::DuplicateGroupPath(other, group.group_id));
            }
            seen.insert(expected, group.group_id);
        }
        for &(a, b) in &inhibitors {
            if a >= b || b as usize >= groups.len() {
                return Err(ModelError::CorruptSnapshot(
                    "invalid inhibitor entry".into(),
                ));
            }
        }
        Ok(Self {
            concepts,
            relations,
            groups,
            inhibitors,
        })
    }

    pub fn concepts(&self) -> &BTreeSet<SymbolId> {
        &self.concepts
    }

    pub fn relations(&self) -> impl Iterator<Item = (SymbolId, SymbolId, u64)> + '_ {
        self.relations.iter().map(|(&(a, b), &w)| (a, b, w))
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn inhibitors(&self) -> &BTreeSet<(u32, u32)> {
        &self.inhibitors
    }

    /// A group is active when every member is active in at least one layer.
    pub fn group_activity(
        &self,
        active_a: &BTreeSet<SymbolId>,
        active_b: &BTreeSet<SymbolId>,
    ) -> BTreeSet<u32> {
        self.groups
            .iter()
            .filter(|g| {
                g.members
                    .iter()
                    .all(|m| active_a.contains(m) || active_b.contains(m))
            })
            .map(|g| g.group_id)
            .collect()
    }

    fn group_strength(
        &self,
        group: &Group,
        state: &LayerState,
        stimulus: &BTreeSet<SymbolId>,
    ) -> u64 {
        let active = group
            .members
            .iter()
            .filter(|m| state.active_a.contains(m) || state.active_b.contains(m))
            .count() as u64;
        let stimulated = group.members.intersection(stimulus).count() as u64;
        active + stimulated
    }

    /// Arbitrates every inhibitor pair with both groups active, in ascending
    /// pair order: the group with greater summed member activation (plus
    /// direct-stimulus bonus) survives, ties go to the smaller group id. The
    /// loser's flag clears and its members deactivate unless a surviving
    /// active group still claims them.
    pub fn resolve_inhibition(&self, state: &mut LayerState, stimulus: &BTreeSet<SymbolId>) {
        for &(ga, gb) in &self.inhibitors {
            if !(state.group_active.contains(&ga) && state.group_active.contains(&gb)) {
                continue;
            }
            let a = &self.groups[ga as usize];
            let b = &self.groups[gb as usize];
            let sa = self.group_strength(a, state, stimulus);
            let sb = self.group_strength(b, state, stimulus);
            let loser = if sa > sb {
                gb
            } else if sb > sa {
                ga
            } else {
                ga.max(gb)
            };
            state.group_active.remove(&loser);
            let loser_members = self.groups[loser as usize].members.clone();
            for m in loser_members {
                let kept = state
                    .group_active
                    .iter()
                    .any(|&g| self.groups[g as usize].members.contains(&m));
                if !kept {
                    state.active_a.remove(&m);
                    state.active_b.remove(&m);
                }
            }
        }
    }

    fn step(&self, prev: &LayerState, stimulus: &BTreeSet<SymbolId>) -> LayerState {
        let mut active_a: BTreeSet<SymbolId> = stimulus.clone();
        let mut active_b: BTreeSet<SymbolId> = BTreeSet::new();
        // self links in both directions
        active_a.extend(prev.active_b.iter().copied());
        active_b.extend(prev.active_a.iter().copied());
        // relation links cross the layers both ways
        for &(x, y) in self.relations.keys() {
            if prev.active_a.contains(&x) {
                active_b.insert(y);
            }
            if prev.active_a.contains(&y) {
                active_b.insert(x);
            }
            if prev.active_b.contains(&x) {
                active_a.insert(y);
            }
            if prev.active_b.contains(&y) {
                active_a.insert(x);
            }
        }
        let group_active = self.group_activity(&active_a, &active_b);
        let mut state = LayerState {
            active_a,
            active_b,
            group_active,
        };
        self.resolve_inhibition(&mut state, stimulus);
        state
    }

    /// Synchronous propagation from a stimulus applied persistently to layer
    /// A. Returns when the post-resolution state repeats: immediately
    /// repeating is settled, any earlier repeat (or hitting `s_max`) is an
    /// oscillation.
    pub fn propagate(
        &self,
        stimulus: &BTreeSet<SymbolId>,
        s_max: u32,
    ) -> Result<PropagationState, ModelError> {
        if s_max < 1 {
            return Err(ModelError::InvalidThreshold {
                name: "s_max",
                min: 1,
                value: s_max as u64,
            });
        }
        for s in stimulus {
            if !self.concepts.contains(s) {
                return Err(ModelError::UnknownConcept(s.0));
            }
        }
        let mut initial = LayerState {
            active_a: stimulus.clone(),
            active_b: BTreeSet::new(),
            group_active: BTreeSet::new(),
        };
        initial.group_active = self.group_activity(&initial.active_a, &initial.active_b);
        self.resolve_inhibition(&mut initial, stimulus);
        let mut trace = vec![initial];

        for _ in 1..=s_max {
            let next = self.step(trace.last().expect("trace is non-empty"), stimulus);
            if *trace.last().expect("trace is non-empty") == next {
                let step = trace.len() as u32 - 1;
                let state = trace.last().expect("trace is non-empty").clone();
                return Ok(PropagationState {
                    step,
                    state,
                    outcome: Outcome::Settled,
                    trace,
                });
            }
            if trace.contains(&next) {
                trace.push(next.clone());
                return Ok(PropagationState {
                    step: trace.len() as u32 - 1,
                    state: next,
                    outcome: Outcome::Oscillation,
                    trace,
                });
            }
            trace.push(next);
        }
        let state = trace.last().expect("trace is non-empty").clone();
        Ok(PropagationState {
            step: trace.len() as u32 - 1,
            state,
            outcome: Outcome::Oscillation,
            trace,
        })
    }

    /// Runs each schedule entry independently: the entry group's members are
    /// injected as stimulus (merged with any extra stimulus for that step),
    /// the net propagates, and the winners are recorded.
    pub fn run_schedule(
        &self,
        schedule: &[u32],
        extra_stimulus: &[BTreeSet<SymbolId>],
        s_max: u32,
    ) -> Result<ScheduleTrace, ModelError> {
        if schedule.is_empty() {
            return Err(ModelError::EmptySchedule);
        }
        for &gid in schedule {
            if gid as usize >= self.groups.len() {
                return Err(ModelError::UnknownGroup(gid));
            }
        }
        let mut steps = Vec::new();
        for (i, &gid) in schedule.iter().enumerate() {
            let mut stimulus = self.groups[gid as usize].members.clone();
            if let Some(extra) = extra_stimulus.get(i) {
                stimulus.extend(extra.iter().copied());
            }
            let run = self.propagate(&stimulus, s_max)?;
            steps.push(ScheduleStep {
                group_id: gid,
                won: run.state.group_active.contains(&gid),
                winners: run.state.group_active.clone(),
                outcome: run.outcome,
                steps: run.step,
            });
        }
        Ok(ScheduleTrace { steps })
    }
}

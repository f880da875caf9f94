//! Inverted concept trees above unit ensembles.
//!
//! The root represents the whole ensemble and fires the least; sub-patterns
//! branch toward the ensemble with non-decreasing support and shrinking
//! member sets, so distance (1/support) falls from root to leaves. Firing a
//! tree reinforces the secondary links between fired nodes and their own
//! ensemble members, and a full-ensemble firing emits a distinctness signal.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::ModelError;
use crate::event::Event;
use crate::symbols::SymbolId;

/// One node of a concept tree. `children` are indices into the owning tree's
/// node arena.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub member_set: BTreeSet<SymbolId>,
    pub support: u64,
    pub distance: f64,
    pub children: Vec<usize>,
}

/// Unit-level activation boost emitted when the root co-fires with the full
/// ensemble, good for exactly one recognition round.
#[derive(Debug, Clone, PartialEq)]
pub struct DistinctnessSignal {
    pub unit_id: u32,
    pub boost: f64,
}

/// Inverted hierarchy over one unit's ensemble plus the secondary
/// reinforcement links from each node to its own ensemble members.
#[derive(Debug, Clone, PartialEq)]
pub struct ConceptTree {
    pub unit_id: u32,
    pub root: usize,
    pub nodes: Vec<TreeNode>,
    /// Per node, reinforcement weights toward its sibling ensemble members.
    pub secondary: Vec<BTreeMap<SymbolId, u64>>,
}

/// Closed frequent subsets of the unit's members. A set is closed when no
/// strict superset has equal support; the full member set and all singletons
/// are force-included whenever they meet `min_support`.
pub fn mine_subpatterns(
    members: &BTreeSet<SymbolId>,
    events: &[Event],
    min_support: u64,
) -> Result<Vec<(BTreeSet<SymbolId>, u64)>, ModelError> {
    if min_support < 1 {
        return Err(ModelError::InvalidThreshold {
            name: "min_support",
            min: 1,
            value: min_support,
        });
    }
    let support = |set: &BTreeSet<SymbolId>| -> u64 {
        events.iter().filter(|e| set.is_subset(&e.actives)).count() as u64
    };
    // Closed sets are exactly the intersection closure of the projected
    // transactions.
    let mut closed: BTreeSet<BTreeSet<SymbolId>> = events
        .iter()
        .map(|e| {
            e.actives
                .intersection(members)
                .copied()
                .collect::<BTreeSet<_>>()
        })
        .filter(|s| !s.is_empty())
        .collect();
    loop {
        let mut added = Vec::new();
        let sets: Vec<&BTreeSet<SymbolId>> = closed.iter().collect();
        for i in 0..sets.len() {
            for j in i + 1..sets.len() {
                let inter: BTreeSet<SymbolId> = sets[i].intersection(sets[j]).copied().collect();
                if !inter.is_empty() && !closed.contains(&inter) {
                    added.push(inter);
                }
            }
        }
        if added.is_empty() {
            break;
        }
        closed.extend(added);
    }
    let mut mined: BTreeMap<BTreeSet<SymbolId>, u64> = BTreeMap::new();
    for set in closed {
        let s = support(&set);
        if s >= min_support {
            mined.insert(set, s);
        }
    }
    let full_support = support(members);
    if full_support >= min_support {
        mined.insert(members.clone(), full_support);
    }
    for &m in members {
        let singleton: BTreeSet<SymbolId> = BTreeSet::from([m]);
        let s = support(&singleton);
        if s >= min_support {
            mined.insert(singleton, s);
        }
    }
    // order: larger sets first, then lexicographic by id, so the root sorts
    // first and output is reproducible
    let mut out: Vec<(BTreeSet<SymbolId>, u64)> = mined.into_iter().collect();
    out.sort_by(|(a, _), (b, _)| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    Ok(out)
}

/// Builds the inverted tree: root = full member set, every other subpattern
/// parented under its nearest strict superset — the one with the largest
/// support, i.e. the smallest distance (ties: largest set, then smallest
/// id-sorted set).
pub fn build_inverted_tree(
    unit_id: u32,
    members: &BTreeSet<SymbolId>,
    subpatterns: &[(BTreeSet<SymbolId>, u64)],
) -> Result<ConceptTree, ModelError> {
    let mut by_set: BTreeMap<BTreeSet<SymbolId>, u64> = BTreeMap::new();
    for (set, support) in subpatterns {
        if let Some(&existing) = by_set.get(set) {
            if existing != *support {
                return Err(ModelError::ConflictingSubpattern { unit_id });
            }
        } else {
            by_set.insert(set.clone(), *support);
        }
    }
    if !by_set.contains_key(members) {
        return Err(ModelError::MissingRootPattern { unit_id });
    }
    let mut ordered: Vec<(BTreeSet<SymbolId>, u64)> = by_set.into_iter().collect();
    ordered.sort_by(|(a, _), (b, _)| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));

    let mut nodes: Vec<TreeNode> = ordered
        .iter()
        .map(|(set, support)| TreeNode {
            member_set: set.clone(),
            support: *support,
            distance: 1.0 / *support as f64,
            children: Vec::new(),
        })
        .collect();
    let root = 0usize;
    debug_assert_eq!(&nodes[root].member_set, members);

    for idx in 0..nodes.len() {
        if idx == root {
            continue;
        }
        let mut parent: Option<usize> = None;
        for (cand, entry) in ordered.iter().enumerate() {
            if !nodes[idx].member_set.is_subset(&entry.0) || nodes[idx].member_set == entry.0 {
                continue;
            }
            let better = match parent {
                None => true,
                Some(p) => {
                    let cur = &ordered[p];
                    entry.1 > cur.1
                        || (entry.1 == cur.1 && entry.0.len() > cur.0.len())
                        || (entry.1 == cur.1 && entry.0.len() == cur.0.len() && entry.0 < cur.0)
                }
            };
            if better {
                parent = Some(cand);
            }
        }
        let parent = parent.expect("the full set is a strict superset of every other node");
        if nodes[idx].support < nodes[parent].support {
            return Err(ModelError::CountingRuleViolation { unit_id });
        }
        nodes[parent].children.push(idx);
    }
    for node in &mut nodes {
        node.children.sort();
    }
    let secondary = vec![BTreeMap::new(); nodes.len()];
    Ok(ConceptTree {
        unit_id,
        root,
        nodes,
        secondary,
    })
}

impl ConceptTree {
    /// Node indices that fire for the given actives: a node fires iff its
    /// member set is fully contained in the actives.
    pub fn fire(&self, actives: &BTreeSet<SymbolId>) -> BTreeSet<usize> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.member_set.is_subset(actives))
            .map(|(i, _)| i)
            .collect()
    }

    /// Bumps each fired node's secondary links to its own members by one and
    /// emits the distinctness signal iff the root fired.
    pub fn reinforce(
        &mut self,
        fired: &BTreeSet<usize>,
        boost: f64,
    ) -> Result<Option<DistinctnessSignal>, ModelError> {
        for &idx in fired {
            if idx >= self.nodes.len() {
                return Err(ModelError::UnknownTreeNode(idx));
            }
        }
        for &idx in fired {
            let members: Vec<SymbolId> = self.nodes[idx].member_set.iter().copied().collect();
            for m in members {
                *self.secondary[idx].entry(m).or_insert(0) += 1;
            }
        }
        if fired.contains(&self.root) {
            Ok(Some(DistinctnessSignal {
                unit_id: self.unit_id,
                boost,
            }))
        } else {
            Ok(None)
        }
    }

    /// Breadth-first node order from the root toward the ensemble.
    pub fn top_down(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut queue = VecDeque::from([self.root]);
        while let Some(idx) = queue.pop_front() {
            order.push(idx);
            queue.extend(self.nodes[idx].children.iter().copied());
        }
        order
    }

    /// The reverse traversal, from the ensemble back to the root.
    pub fn bottom_up(&self) -> Vec<usize> {
        let mut order = self.top_down();
        order.reverse();
        order
    }

    /// Singleton leaves paired with their member symbol.
    pub fn singleton_leaves(&self) -> impl Iterator<Item = (usize, SymbolId)> + '_ {
        self.nodes.iter().enumerate().filter_map(|(i, n)| {
            if n.member_set.len() == 1 {
                Some((i, *n.member_set.first().expect("non-empty")))
            } else {
                None
            }
        })
    }

    /// Root-to-leaf paths as node index chains.
    pub fn paths(&self) -> Vec<Vec<usize>> {
        let mut paths = Vec::new();
        let mut stack = vec![vec![self.root]];
        while let Some(path) = stack.pop() {
            let last = *path.last().expect("paths start at the root");
            if self.nodes[last].children.is_empty() {
                paths.push(path);
                continue;
            }
            for &c in &self.nodes[last].children {
                let mut next = path.clone();
                next.push(c);
                stack.push(next);
            }
        }
        paths.sort();
        paths
    }

    pub fn node_by_set(&self, set: &BTreeSet<SymbolId>) -> Option<usize> {
        self.nodes.iter().position(|n| &n.member_set == set)
    }
}

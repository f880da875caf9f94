//! Frequency grid: per-level pairwise association counts, best-partner
//! relations, unit derivation, within-unit refinement and third-level unit
//! aggregation.
//!
//! Level 1 counts symbol pairs over the whole corpus. Level 2 recounts the
//! same corpus with cross-unit pairs masked, which makes the counts inside
//! each unit more regular. Level 3 treats units as nodes and aggregates them
//! over unit-activity streams.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::ModelError;
use crate::event::Event;

/// Symmetric association counts over a declared node space. Nodes are symbol
/// ids at level 1 and unit ids above.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairCountGrid {
    level: u32,
    nodes: BTreeSet<u32>,
    counts: BTreeMap<(u32, u32), u64>,
}

/// A self-organised cluster of nodes that fire together more often than with
/// anything else.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unit {
    pub unit_id: u32,
    pub level: u32,
    pub members: BTreeSet<u32>,
}

/// Dispersion summary of the pair counts inside one unit. The coefficient of
/// variation is population standard deviation over mean, 0 when all counts
/// are equal or no pair exists.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    pub unit_id: u32,
    pub mean: f64,
    pub coefficient_of_variation: f64,
}

/// Mean and coefficient of variation of a count multiset.
pub fn pair_count_stats(counts: &[u64]) -> (f64, f64) {
    if counts.is_empty() {
        return (0.0, 0.0);
    }
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<u64>() as f64 / n;
    if mean == 0.0 {
        return (0.0, 0.0);
    }
    let var = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - mean;
            d * d
        })
        .sum::<f64>()
        / n;
    (mean, var.sqrt() / mean)
}

fn key(a: u32, b: u32) -> (u32, u32) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl PairCountGrid {
    pub fn new(level: u32, nodes: BTreeSet<u32>) -> Self {
        Self {
            level,
            nodes,
            counts: BTreeMap::new(),
        }
    }

    /// Rebuilds a grid from stored parts, enforcing the symmetry invariants
    /// (snapshot load path).
    pub fn from_parts(
        level: u32,
        nodes: BTreeSet<u32>,
        counts: BTreeMap<(u32, u32), u64>,
    ) -> Result<Self, ModelError> {
        for (&(a, b), &c) in &counts {
            if a >= b || c == 0 || !nodes.contains(&a) || !nodes.contains(&b) {
                return Err(ModelError::CorruptSnapshot(format!(
                    "invalid grid count entry ({a}, {b}, {c}) at level {level}"
                )));
            }
        }
        Ok(Self {
            level,
            nodes,
            counts,
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn nodes(&self) -> &BTreeSet<u32> {
        &self.nodes
    }

    pub fn counted_pairs(&self) -> impl Iterator<Item = (u32, u32, u64)> + '_ {
        self.counts.iter().map(|(&(a, b), &c)| (a, b, c))
    }

    pub fn count(&self, a: u32, b: u32) -> u64 {
        if a == b {
            return 0;
        }
        self.counts.get(&key(a, b)).copied().unwrap_or(0)
    }

    /// Increments every unordered pair of co-active nodes by one. An empty or
    /// single-node set leaves the grid unchanged.
    pub fn update_counts(&mut self, actives: &BTreeSet<u32>) -> Result<(), ModelError> {
        for &n in actives {
            if !self.nodes.contains(&n) {
                return Err(ModelError::UnknownNode {
                    node: n,
                    level: self.level,
                });
            }
        }
        let list: Vec<u32> = actives.iter().copied().collect();
        for i in 0..list.len() {
            for j in i + 1..list.len() {
                *self.counts.entry(key(list[i], list[j])).or_insert(0) += 1;
            }
        }
        Ok(())
    }

    /// The partner with the largest association count, ties broken by the
    /// smallest id. `None` when the node has no counted pair at all.
    pub fn best_partner(&self, node: u32) -> Result<Option<u32>, ModelError> {
        if !self.nodes.contains(&node) {
            return Err(ModelError::UnknownNode {
                node,
                level: self.level,
            });
        }
        Ok(self.best_partner_inner(node))
    }

    fn best_partner_inner(&self, node: u32) -> Option<u32> {
        let mut best: Option<(u64, u32)> = None;
        for (&(a, b), &c) in &self.counts {
            let other = if a == node {
                b
            } else if b == node {
                a
            } else {
                continue;
            };
            let better = match best {
                None => true,
                Some((bc, bp)) => c > bc || (c == bc && other < bp),
            };
            if better {
                best = Some((c, other));
            }
        }
        best.map(|(_, p)| p)
    }

    /// Units as the connected components of the undirected best-partner
    /// relation graph, ordered and numbered by smallest member id. Nodes
    /// without any counted pair stay outside all units.
    pub fn derive_units(&self) -> Vec<Unit> {
        let mut adjacency: BTreeMap<u32, BTreeSet<u32>> = BTreeMap::new();
        for &n in &self.nodes {
            if let Some(p) = self.best_partner_inner(n) {
                adjacency.entry(n).or_default().insert(p);
                adjacency.entry(p).or_default().insert(n);
            }
        }
        let mut seen: BTreeSet<u32> = BTreeSet::new();
        let mut units = Vec::new();
        for &start in adjacency.keys() {
            if seen.contains(&start) {
                continue;
            }
            let mut members = BTreeSet::new();
            let mut queue = VecDeque::from([start]);
            while let Some(n) = queue.pop_front() {
                if !members.insert(n) {
                    continue;
                }
                seen.insert(n);
                for &m in &adjacency[&n] {
                    if !members.contains(&m) {
                        queue.push_back(m);
                    }
                }
            }
            units.push(members);
        }
        units.sort_by_key(|m| *m.first().expect("components are non-empty"));
        units
            .into_iter()
            .enumerate()
            .map(|(i, members)| Unit {
                unit_id: i as u32,
                level: self.level,
                members,
            })
            .collect()
    }

    /// Mean / CV over the counted pairs touching at least one of `members`.
    pub fn stats_touching(&self, members: &BTreeSet<u32>) -> (f64, f64) {
        let counts: Vec<u64> = self
            .counts
            .iter()
            .filter(|(&(a, b), _)| members.contains(&a) || members.contains(&b))
            .map(|(_, &c)| c)
            .collect();
        pair_count_stats(&counts)
    }
}

/// Recounts the corpus admitting only pairs whose both members lie in the
/// same unit, producing the level-2 grid and a per-unit regularity report.
pub fn refine_within_units(
    events: &[Event],
    units: &[Unit],
) -> (PairCountGrid, Vec<RegularityReport>) {
    let mut unit_of: BTreeMap<u32, u32> = BTreeMap::new();
    let mut nodes: BTreeSet<u32> = BTreeSet::new();
    for unit in units {
        for &m in &unit.members {
            unit_of.insert(m, unit.unit_id);
            nodes.insert(m);
        }
    }
    let mut grid = PairCountGrid::new(2, nodes);
    for event in events {
        let active: Vec<u32> = event
            .active_raw()
            .into_iter()
            .filter(|n| unit_of.contains_key(n))
            .collect();
        for i in 0..active.len() {
            for j in i + 1..active.len() {
                if unit_of[&active[i]] == unit_of[&active[j]] {
                    *grid.counts.entry(key(active[i], active[j])).or_insert(0) += 1;
                }
            }
        }
    }
    let mut reports = Vec::new();
    for unit in units {
        let counts: Vec<u64> = grid
            .counts
            .iter()
            .filter(|(&(a, _), _)| unit.members.contains(&a))
            .map(|(_, &c)| c)
            .collect();
        let (mean, cv) = pair_count_stats(&counts);
        reports.push(RegularityReport {
            unit_id: unit.unit_id,
            mean,
            coefficient_of_variation: cv,
        });
    }
    (grid, reports)
}

/// Aggregates level-1 units into level-3 super-units. A unit is active in an
/// event when at least `ceil(theta * |members|)` of its members are active;
/// the unit-activity stream is then counted and clustered like level 1.
/// Units that never gain a counted pair become their own singleton
/// super-unit.
pub fn aggregate_units(
    events: &[Event],
    units: &[Unit],
    theta: f64,
) -> Result<(PairCountGrid, Vec<Unit>), ModelError> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(ModelError::InvalidTheta(theta));
    }
    let nodes: BTreeSet<u32> = units.iter().map(|u| u.unit_id).collect();
    let mut grid = PairCountGrid::new(3, nodes.clone());
    for event in events {
        let raw = event.active_raw();
        let active_units: BTreeSet<u32> = units
            .iter()
            .filter(|u| {
                let need = (theta * u.members.len() as f64).ceil() as usize;
                u.members.intersection(&raw).count() >= need.max(1)
            })
            .map(|u| u.unit_id)
            .collect();
        grid.update_counts(&active_units)?;
    }
    let mut member_sets: Vec<BTreeSet<u32>> =
        grid.derive_units().into_iter().map(|u| u.members).collect();
    let covered: BTreeSet<u32> = member_sets.iter().flatten().copied().collect();
    for &n in &nodes {
        if !covered.contains(&n) {
            member_sets.push(BTreeSet::from([n]));
        }
    }
    member_sets.sort_by_key(|m| *m.first().expect("unit member sets are non-empty"));
    let super_units = member_sets
        .into_iter()
        .enumerate()
        .map(|(i, members)| Unit {
            unit_id: i as u32,
            level: 3,
            members,
        })
        .collect();
    Ok((grid, super_units))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::event::read_corpus_str;
    use crate::symbols::SymbolTable;

    const HB: &str = r#"{"seq":1,"symbols":["window","door","wall","roof"],"label":"house"}
{"seq":2,"symbols":["window","door","hull","deck"],"label":"boat"}
{"seq":3,"symbols":["wall","roof"]}
{"seq":4,"symbols":["hull","deck"]}
"#;

    fn hb() -> (SymbolTable, Vec<Event>) {
        let mut table = SymbolTable::new();
        let events = read_corpus_str(HB, &mut table).unwrap();
        (table, events)
    }

    fn level1_grid(table: &SymbolTable, events: &[Event]) -> PairCountGrid {
        let mut grid = PairCountGrid::new(1, table.ids().map(|s| s.0).collect());
        for e in events {
            grid.update_counts(&e.active_raw()).unwrap();
        }
        grid
    }

    // window=0 door=1 wall=2 roof=3 house=4 hull=5 deck=6 boat=7

    #[test]
    fn hb_level1_counts() {
        let (table, events) = hb();
        let grid = level1_grid(&table, &events);
        assert_eq!(grid.count(2, 3), 2); // wall,roof
        assert_eq!(grid.count(0, 2), 1); // window,wall
        assert_eq!(grid.count(5, 6), 2); // hull,deck
    }

    #[test]
    fn empty_active_set_is_a_no_op() {
        let (table, events) = hb();
        let mut grid = level1_grid(&table, &events);
        let before = grid.clone();
        grid.update_counts(&BTreeSet::new()).unwrap();
        assert_eq!(grid, before);
    }

    #[test]
    fn unknown_node_rejected() {
        let (table, events) = hb();
        let mut grid = level1_grid(&table, &events);
        let err = grid.update_counts(&BTreeSet::from([99])).unwrap_err();
        assert!(matches!(
            err,
            ModelError::UnknownNode { node: 99, level: 1 }
        ));
        assert!(grid.best_partner(99).is_err());
    }

    #[test]
    fn hb_best_partners() {
        let (table, events) = hb();
        let grid = level1_grid(&table, &events);
        assert_eq!(grid.best_partner(0).unwrap(), Some(1)); // window -> door, count 2
        assert_eq!(grid.best_partner(2).unwrap(), Some(3)); // wall -> roof
        assert_eq!(grid.best_partner(4).unwrap(), None); // label symbol never co-active
    }

    #[test]
    fn hb_units() {
        let (table, events) = hb();
        let grid = level1_grid(&table, &events);
        let units = grid.derive_units();
        let member_sets: Vec<Vec<u32>> = units
            .iter()
            .map(|u| u.members.iter().copied().collect())
            .collect();
        assert_eq!(member_sets, vec![vec![0, 1], vec![2, 3], vec![5, 6]]);
        assert_eq!(units[0].unit_id, 0);
        assert_eq!(units[2].unit_id, 2);
    }

    #[test]
    fn empty_grid_yields_no_units() {
        let grid = PairCountGrid::new(1, (0..4).collect());
        assert!(grid.derive_units().is_empty());
    }

    #[test]
    fn two_event_corpus_bridges_into_one_unit() {
        // Only e1 and e2: window-door count 2, everything else 1, so all
        // best-partner ties resolve to window/door and bridge the symbols.
        let (table, events) = hb();
        let grid = level1_grid(&table, &events[..2]);
        let units = grid.derive_units();
        assert_eq!(units.len(), 1);
        assert_eq!(units[0].members, BTreeSet::from([0, 1, 2, 3, 5, 6]));
    }

    #[test]
    fn hb_refinement_reports() {
        let (table, events) = hb();
        let grid = level1_grid(&table, &events);
        let units = grid.derive_units();
        let (level2, reports) = refine_within_units(&events, &units);
        // only within-unit pairs counted
        assert_eq!(level2.count(0, 1), 2);
        assert_eq!(level2.count(0, 2), 0);
        assert_eq!(level2.level(), 2);
        for r in &reports {
            assert_eq!(r.coefficient_of_variation, 0.0);
            assert_eq!(r.mean, 2.0);
        }
        // level-1 CV over pairs touching {wall,roof} mixes counts 2 and 1
        let (_, cv1) = grid.stats_touching(&units[1].members);
        assert!(cv1 > 0.0);
    }

    #[test]
    fn single_member_unit_reports_zero_cv() {
        let unit = Unit {
            unit_id: 0,
            level: 1,
            members: BTreeSet::from([0]),
        };
        let (_, reports) = refine_within_units(&[], &[unit]);
        assert_eq!(reports[0].coefficient_of_variation, 0.0);
        assert_eq!(reports[0].mean, 0.0);
    }

    #[test]
    fn hb_aggregation_majority_theta() {
        let (table, events) = hb();
        let grid = level1_grid(&table, &events);
        let units = grid.derive_units();
        let (level3, supers) = aggregate_units(&events, &units, 0.5).unwrap();
        assert_eq!(level3.count(0, 1), 1);
        assert_eq!(level3.count(0, 2), 1);
        assert_eq!(level3.count(1, 2), 0);
        assert_eq!(supers.len(), 1);
        assert_eq!(supers[0].members, BTreeSet::from([0, 1, 2]));
        assert_eq!(supers[0].level, 3);
    }

    #[test]
    fn theta_one_without_cofiring_keeps_units_separate() {
        let mut table = SymbolTable::new();
        let events = read_corpus_str(
            "{\"seq\":1,\"symbols\":[\"a\",\"b\"]}\n{\"seq\":2,\"symbols\":[\"c\",\"d\"]}\n",
            &mut table,
        )
        .unwrap();
        let grid = level1_grid(&table, &events);
        let units = grid.derive_units();
        assert_eq!(units.len(), 2);
        let (_, supers) = aggregate_units(&events, &units, 1.0).unwrap();
        assert_eq!(supers.len(), 2);
        assert!(supers.iter().all(|u| u.members.len() == 1));
    }

    #[test]
    fn invalid_theta_rejected() {
        let (table, events) = hb();
        let grid = level1_grid(&table, &events);
        let units = grid.derive_units();
        assert!(matches!(
            aggregate_units(&events, &units, 0.0),
            Err(ModelError::InvalidTheta(_))
        ));
        assert!(matches!(
            aggregate_units(&events, &units, 1.5),
            Err(ModelError::InvalidTheta(_))
        ));
    }

    // Independent unit oracle: adjacency matrix counting, explicit argmax
    // with the tie rule, stack-based flood fill.
    #[allow(clippy::needless_range_loop)]
    pub(crate) fn oracle_units(events: &[BTreeSet<u32>], n: usize) -> Vec<BTreeSet<u32>> {
        let mut w = vec![vec![0u64; n]; n];
        for e in events {
            let v: Vec<u32> = e.iter().copied().collect();
            for i in 0..v.len() {
                for j in i + 1..v.len() {
                    w[v[i] as usize][v[j] as usize] += 1;
                    w[v[j] as usize][v[i] as usize] += 1;
                }
            }
        }
        let mut partner = vec![None; n];
        for a in 0..n {
            let mut best: Option<(u64, usize)> = None;
            for b in 0..n {
                if a == b || w[a][b] == 0 {
                    continue;
                }
                if best.is_none_or(|(bc, _)| w[a][b] > bc) {
                    best = Some((w[a][b], b));
                }
            }
            partner[a] = best.map(|(_, b)| b);
        }
        let mut adj = vec![BTreeSet::new(); n];
        for a in 0..n {
            if let Some(b) = partner[a] {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
        let mut visited = vec![false; n];
        let mut comps: Vec<BTreeSet<u32>> = Vec::new();
        for s in 0..n {
            if visited[s] || adj[s].is_empty() {
                continue;
            }
            let mut comp = BTreeSet::new();
            let mut stack = vec![s];
            while let Some(x) = stack.pop() {
                if visited[x] {
                    continue;
                }
                visited[x] = true;
                comp.insert(x as u32);
                for &y in &adj[x] {
                    stack.push(y);
                }
            }
            comps.push(comp);
        }
        comps.sort_by_key(|c| *c.first().unwrap());
        comps
    }

    proptest! {
        /// derive_units matches the brute-force oracle on random corpora.
        #[test]
        fn units_match_oracle(
            corpus in proptest::collection::vec(
                proptest::collection::btree_set(0u32..10, 1..6),
                1..30,
            )
        ) {
            let mut grid = PairCountGrid::new(1, (0..10).collect());
            for e in &corpus {
                grid.update_counts(e).unwrap();
            }
            let derived: Vec<BTreeSet<u32>> =
                grid.derive_units().into_iter().map(|u| u.members).collect();
            prop_assert_eq!(derived, oracle_units(&corpus, 10));
        }

        /// Every node with at least one counted pair lands in exactly one unit.
        #[test]
        fn units_partition_counted_nodes(
            corpus in proptest::collection::vec(
                proptest::collection::btree_set(0u32..10, 1..6),
                1..30,
            )
        ) {
            let mut grid = PairCountGrid::new(1, (0..10).collect());
            for e in &corpus {
                grid.update_counts(e).unwrap();
            }
            let units = grid.derive_units();
            let mut counted: BTreeSet<u32> = BTreeSet::new();
            for (a, b, _) in grid.counted_pairs() {
                counted.insert(a);
                counted.insert(b);
            }
            let mut seen: BTreeSet<u32> = BTreeSet::new();
            for u in &units {
                for &m in &u.members {
                    prop_assert!(seen.insert(m), "node {} in two units", m);
                }
            }
            prop_assert_eq!(seen, counted);
        }
    }

    // Oracle's tie rule must match best_partner's documented rule.
    #[test]
    fn oracle_tie_rule_agrees_on_ties() {
        // a co-fires with b and c equally often; partner must be the smaller id
        let events = vec![BTreeSet::from([0u32, 1]), BTreeSet::from([0u32, 2])];
        let mut grid = PairCountGrid::new(1, (0..3).collect());
        for e in &events {
            grid.update_counts(e).unwrap();
        }
        assert_eq!(grid.best_partner(0).unwrap(), Some(1));
        let comps = oracle_units(&events, 3);
        assert_eq!(comps, vec![BTreeSet::from([0, 1, 2])]);
    }
}

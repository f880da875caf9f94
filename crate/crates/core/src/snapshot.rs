//! Versioned snapshot persistence. The on-disk schema is canonical JSON —
//! object keys sorted, collections in natural order — so two builds of the
//! same corpus are byte-identical and reload answers every query the same
//! way.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::grid::{PairCountGrid, RegularityReport, Unit};
use crate::links::LinkStore;
use crate::logic::{Group, LogicNet};
use crate::pipeline::{BuildConfig, Model};
use crate::semantic::{FeatureSetNode, Region, StoredPattern, TypeNode, TypeSetMatchNet};
use crate::symbols::{SymbolId, SymbolTable};
use crate::tree::{ConceptTree, TreeNode};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SnapshotDoc {
    format_version: u32,
    config: BuildConfig,
    symbols: Vec<String>,
    links: Vec<(u32, u32, u64)>,
    grids: Vec<GridDoc>,
    units: Vec<UnitDoc>,
    regularity: Vec<RegularityDoc>,
    unit_trees: Vec<TreeDoc>,
    net: NetDoc,
    logic: LogicDoc,
}

#[derive(Serialize, Deserialize)]
struct GridDoc {
    level: u32,
    nodes: Vec<u32>,
    counts: Vec<(u32, u32, u64)>,
}

#[derive(Serialize, Deserialize)]
struct UnitDoc {
    unit_id: u32,
    level: u32,
    members: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct RegularityDoc {
    unit_id: u32,
    mean: f64,
    coefficient_of_variation: f64,
}

#[derive(Serialize, Deserialize)]
struct TreeDoc {
    unit_id: u32,
    root: usize,
    nodes: Vec<TreeNodeDoc>,
    secondary: Vec<Vec<(u32, u64)>>,
}

#[derive(Serialize, Deserialize)]
struct TreeNodeDoc {
    members: Vec<u32>,
    support: u64,
    distance: f64,
    children: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct NetDoc {
    types: Vec<TypeDoc>,
    features: Vec<FeatureDoc>,
    regions: Vec<RegionDoc>,
    type_trees: Vec<TreeDoc>,
    type_links: Vec<(u32, u32)>,
}

#[derive(Serialize, Deserialize)]
struct TypeDoc {
    type_id: u32,
    feature_links: Vec<(usize, u64)>,
}

#[derive(Serialize, Deserialize)]
struct FeatureDoc {
    members: Vec<u32>,
    owning_regions: Vec<u32>,
    type_links: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct RegionDoc {
    region_id: u32,
    ensembles: Vec<PatternDoc>,
    neighbor_order: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct PatternDoc {
    label: u32,
    members: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct LogicDoc {
    concepts: Vec<u32>,
    relations: Vec<(u32, u32, u64)>,
    groups: Vec<GroupDoc>,
    inhibitors: Vec<(u32, u32)>,
}

#[derive(Serialize, Deserialize)]
struct GroupDoc {
    group_id: u32,
    members: Vec<u32>,
    path_signature: String,
}

fn ids(set: &BTreeSet<SymbolId>) -> Vec<u32> {
    set.iter().map(|s| s.0).collect()
}

fn tree_doc(tree: &ConceptTree) -> TreeDoc {
    TreeDoc {
        unit_id: tree.unit_id,
        root: tree.root,
        nodes: tree
            .nodes
            .iter()
            .map(|n| TreeNodeDoc {
                members: ids(&n.member_set),
                support: n.support,
                distance: n.distance,
                children: n.children.clone(),
            })
            .collect(),
        secondary: tree
            .secondary
            .iter()
            .map(|m| m.iter().map(|(&s, &w)| (s.0, w)).collect())
            .collect(),
    }
}

fn tree_from_doc(doc: TreeDoc) -> Result<ConceptTree, ModelError> {
    let node_count = doc.nodes.len();
    if doc.root >= node_count || doc.secondary.len() != node_count {
        return Err(ModelError::CorruptSnapshot(
            "tree indices out of range".into(),
        ));
    }
    let nodes: Vec<TreeNode> = doc
        .nodes
        .into_iter()
        .map(|n| TreeNode {
            member_set: n.members.into_iter().map(SymbolId).collect(),
            support: n.support,
            distance: n.distance,
            children: n.children,
        })
        .collect();
    for n in &nodes {
        if n.children.iter().any(|&c| c >= node_count) {
            return Err(ModelError::CorruptSnapshot(
                "tree child out of range".into(),
            ));
        }
    }
    let secondary = doc
        .secondary
        .into_iter()
        .map(|m| m.into_iter().map(|(s, w)| (SymbolId(s), w)).collect())
        .collect();
    Ok(ConceptTree {
        unit_id: doc.unit_id,
        root: doc.root,
        nodes,
        secondary,
    })
}

fn grid_doc(grid: &PairCountGrid) -> GridDoc {
    GridDoc {
        level: grid.level(),
        nodes: grid.nodes().iter().copied().collect(),
        counts: grid.counted_pairs().collect(),
    }
}

fn grid_from_doc(doc: GridDoc) -> Result<PairCountGrid, ModelError> {
    PairCountGrid::from_parts(
        doc.level,
        doc.nodes.into_iter().collect(),
        doc.counts
            .into_iter()
            .map(|(a, b, c)| ((a, b), c))
            .collect(),
    )
}

fn unit_doc(unit: &Unit) -> UnitDoc {
    UnitDoc {
        unit_id: unit.unit_id,
        level: unit.level,
        members: unit.members.iter().copied().collect(),
    }
}

/// Encodes a model as canonical JSON text.
pub fn to_canonical_json(model: &Model) -> Result<String, ModelError> {
    let doc = SnapshotDoc {
        format_version: FORMAT_VERSION,
        config: model.config.clone(),
        symbols: model.symbols.labels().to_vec(),
        links: model.links.pairs().map(|(a, b, w)| (a.0, b.0, w)).collect(),
        grids: vec![
            grid_doc(&model.level1),
            grid_doc(&model.level2),
            grid_doc(&model.level3),
        ],
        units: model
            .units1
            .iter()
            .chain(model.units3.iter())
            .map(unit_doc)
            .collect(),
        regularity: model
            .regularity
            .iter()
            .map(|r| RegularityDoc {
                unit_id: r.unit_id,
                mean: r.mean,
                coefficient_of_variation: r.coefficient_of_variation,
            })
            .collect(),
        unit_trees: model.unit_trees.values().map(tree_doc).collect(),
        net: NetDoc {
            types: model
                .net
                .types()
                .map(|t| TypeDoc {
                    type_id: t.type_id.0,
                    feature_links: t.feature_links.iter().map(|(&f, &w)| (f, w)).collect(),
                })
                .collect(),
            features: model
                .net
                .features()
                .iter()
                .map(|f| FeatureDoc {
                    members: ids(&f.members),
                    owning_regions: f.owning_regions.iter().copied().collect(),
                    type_links: ids(&f.type_links),
                })
                .collect(),
            regions: model
                .net
                .regions()
                .iter()
                .map(|r| RegionDoc {
                    region_id: r.region_id,
                    ensembles: r
                        .ensembles
                        .iter()
                        .map(|p| PatternDoc {
                            label: p.label.0,
                            members: ids(&p.members),
                        })
                        .collect(),
                    neighbor_order: r.neighbor_order.clone(),
                })
                .collect(),
            type_trees: model.net.type_trees().map(|(_, t)| tree_doc(t)).collect(),
            type_links: model
                .net
                .committed_links()
                .iter()
                .map(|&(a, b)| (a.0, b.0))
                .collect(),
        },
        logic: LogicDoc {
            concepts: ids(model.logic.concepts()),
            relations: model
                .logic
                .relations()
                .map(|(a, b, w)| (a.0, b.0, w))
                .collect(),
            groups: model
                .logic
                .groups()
                .iter()
                .map(|g| GroupDoc {
                    group_id: g.group_id,
                    members: ids(&g.members),
                    path_signature: g.path_signature.clone(),
                })
                .collect(),
            inhibitors: model.logic.inhibitors().iter().copied().collect(),
        },
    };
    // serialising through Value sorts every object key
    let value = serde_json::to_value(&doc)?;
    Ok(serde_json::to_string_pretty(&value)? + "\n")
}

/// Decodes canonical JSON back into a model, checking the format version
/// first.
pub fn from_json_str(text: &str) -> Result<Model, ModelError> {
    let probe: VersionProbe =
        serde_json::from_str(text).map_err(|e| ModelError::CorruptSnapshot(e.to_string()))?;
    if probe.format_version != FORMAT_VERSION {
        return Err(ModelError::UnsupportedVersion {
            found: probe.format_version,
            supported: FORMAT_VERSION,
        });
    }
    let doc: SnapshotDoc =
        serde_json::from_str(text).map_err(|e| ModelError::CorruptSnapshot(e.to_string()))?;
    doc.config
        .validate()
        .map_err(|e| ModelError::CorruptSnapshot(e.to_string()))?;

    let symbols = SymbolTable::from_labels(doc.symbols)?;
    let n_symbols = symbols.len() as u32;

    let mut links = LinkStore::new();
    for (a, b, w) in doc.links {
        if a >= n_symbols || b >= n_symbols {
            return Err(ModelError::CorruptSnapshot("link id out of range".into()));
        }
        links.set_weight(SymbolId(a), SymbolId(b), w)?;
    }

    let mut grids = doc.grids.into_iter();
    let (level1, level2, level3) = match (grids.next(), grids.next(), grids.next(), grids.next()) {
        (Some(g1), Some(g2), Some(g3), None) if g1.level == 1 && g2.level == 2 && g3.level == 3 => {
            (grid_from_doc(g1)?, grid_from_doc(g2)?, grid_from_doc(g3)?)
        }
        _ => {
            return Err(ModelError::CorruptSnapshot(
                "expected grid levels 1, 2, 3 in order".into(),
            ))
        }
    };

    let mut units1 = Vec::new();
    let mut units3 = Vec::new();
    for u in doc.units {
        if u.members.is_empty() {
            return Err(ModelError::CorruptSnapshot("unit with no members".into()));
        }
        let unit = Unit {
            unit_id: u.unit_id,
            level: u.level,
            members: u.members.into_iter().collect(),
        };
        match unit.level {
            1 => units1.push(unit),
            3 => units3.push(unit),
            other => {
                return Err(ModelError::CorruptSnapshot(format!(
                    "unexpected unit level {other}"
                )))
            }
        }
    }

    let regularity = doc
        .regularity
        .into_iter()
        .map(|r| RegularityReport {
            unit_id: r.unit_id,
            mean: r.mean,
            coefficient_of_variation: r.coefficient_of_variation,
        })
        .collect();

    let mut unit_trees = BTreeMap::new();
    for t in doc.unit_trees {
        let tree = tree_from_doc(t)?;
        unit_trees.insert(tree.unit_id, tree);
    }

    let feature_count = doc.net.features.len();
    let types: Vec<TypeNode> = doc
        .net
        .types
        .into_iter()
        .map(|t| {
            let mut feature_links = BTreeMap::new();
            for (fid, w) in t.feature_links {
                if fid >= feature_count {
                    return Err(ModelError::CorruptSnapshot(
                        "feature link out of range".into(),
                    ));
                }
                feature_links.insert(fid, w);
            }
            Ok(TypeNode {
                type_id: SymbolId(t.type_id),
                feature_links,
            })
        })
        .collect::<Result<_, _>>()?;
    let features: Vec<FeatureSetNode> = doc
        .net
        .features
        .into_iter()
        .map(|f| FeatureSetNode {
            members: f.members.into_iter().map(SymbolId).collect(),
            owning_regions: f.owning_regions.into_iter().collect(),
            type_links: f.type_links.into_iter().map(SymbolId).collect(),
        })
        .collect();
    let regions: Vec<Region> = doc
        .net
        .regions
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            if r.region_id != i as u32 {
                return Err(ModelError::CorruptSnapshot(
                    "region ids are not contiguous".into(),
                ));
            }
            Ok(Region {
                region_id: r.region_id,
                ensembles: r
                    .ensembles
                    .into_iter()
                    .map(|p| StoredPattern {
                        label: SymbolId(p.label),
                        members: p.members.into_iter().map(SymbolId).collect(),
                    })
                    .collect(),
                neighbor_order: r.neighbor_order,
            })
        })
        .collect::<Result<_, _>>()?;
    let mut type_trees = BTreeMap::new();
    for t in doc.net.type_trees {
        let tree = tree_from_doc(t)?;
        type_trees.insert(SymbolId(tree.unit_id), tree);
    }
    let type_links: BTreeSet<(SymbolId, SymbolId)> = doc
        .net
        .type_links
        .into_iter()
        .map(|(a, b)| (SymbolId(a), SymbolId(b)))
        .collect();
    let net = TypeSetMatchNet::from_parts(types, features, regions, type_trees, type_links)?;

    let logic_groups: Vec<Group> = doc
        .logic
        .groups
        .into_iter()
        .map(|g| Group {
            group_id: g.group_id,
            members: g.members.into_iter().map(SymbolId).collect(),
            path_signature: g.path_signature,
        })
        .collect();
    let logic = LogicNet::from_parts(
        doc.logic.concepts.into_iter().map(SymbolId).collect(),
        doc.logic
            .relations
            .into_iter()
            .map(|(a, b, w)| ((SymbolId(a), SymbolId(b)), w))
            .collect(),
        logic_groups,
        doc.logic.inhibitors.into_iter().collect(),
    )?;

    Ok(Model {
        config: doc.config,
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

/// Writes the snapshot file.
pub fn save(model: &Model, path: &Path) -> Result<(), ModelError> {
    std::fs::write(path, to_canonical_json(model)?)?;
    Ok(())
}

/// Loads a snapshot file.
pub fn load(path: &Path) -> Result<Model, ModelError> {
    let text = std::fs::read_to_string(path)?;
    from_json_str(&text)
}

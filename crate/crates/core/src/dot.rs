//! Deterministic DOT exports: concept trees, the three-tier semantic net and
//! the two-layer logic net. Re-exporting the same model yields byte-identical
//! text.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::pipeline::Model;
use crate::symbols::{SymbolId, SymbolTable};
use crate::tree::ConceptTree;

fn member_label(symbols: &SymbolTable, members: &BTreeSet<SymbolId>) -> String {
    let names: Vec<&str> = members
        .iter()
        .map(|&m| symbols.label(m).unwrap_or("?"))
        .collect();
    format!("{{{}}}", names.join(","))
}

fn write_tree(
    out: &mut String,
    prefix: &str,
    title: &str,
    tree: &ConceptTree,
    symbols: &SymbolTable,
) {
    writeln!(out, "  subgraph cluster_{prefix} {{").unwrap();
    writeln!(out, "    label=\"{title}\";").unwrap();
    for (i, node) in tree.nodes.iter().enumerate() {
        writeln!(
            out,
            "    {prefix}_n{i} [label=\"{}:{}\"];",
            member_label(symbols, &node.member_set),
            node.support
        )
        .unwrap();
    }
    for (i, node) in tree.nodes.iter().enumerate() {
        for &c in &node.children {
            writeln!(out, "    {prefix}_n{i} -> {prefix}_n{c};").unwrap();
        }
    }
    // secondary links render dashed, toward each member's singleton leaf
    for (i, weights) in tree.secondary.iter().enumerate() {
        for (&member, &w) in weights {
            if w == 0 {
                continue;
            }
            let singleton = BTreeSet::from([member]);
            if let Some(leaf) = tree.node_by_set(&singleton) {
                if leaf != i {
                    writeln!(
                        out,
                        "    {prefix}_n{i} -> {prefix}_n{leaf} [style=dashed, label=\"{w}\"];"
                    )
                    .unwrap();
                }
            }
        }
    }
    writeln!(out, "  }}").unwrap();
}

/// All concept trees (per-unit trees, then per-type trees) as subgraphs.
pub fn trees_dot(model: &Model) -> String {
    let mut out = String::from("digraph trees {\n");
    for (unit_id, tree) in &model.unit_trees {
        write_tree(
            &mut out,
            &format!("u{unit_id}"),
            &format!("unit {unit_id}"),
            tree,
            &model.symbols,
        );
    }
    for (label, tree) in model.net.type_trees() {
        let name = model.symbols.label(label).unwrap_or("?");
        write_tree(
            &mut out,
            &format!("t{}", label.0),
            &format!("type {name}"),
            tree,
            &model.symbols,
        );
    }
    out.push_str("}\n");
    out
}

/// The semantic net as three ranked tiers: types, feature sets, regions.
pub fn net_dot(model: &Model) -> String {
    let mut out = String::from("digraph net {\n  rankdir=BT;\n");
    writeln!(out, "  {{ rank=same;").unwrap();
    for region in model.net.regions() {
        writeln!(
            out,
            "    region_{} [shape=box, label=\"region {}\"];",
            region.region_id, region.region_id
        )
        .unwrap();
    }
    writeln!(out, "  }}").unwrap();
    writeln!(out, "  {{ rank=same;").unwrap();
    for (i, feature) in model.net.features().iter().enumerate() {
        writeln!(
            out,
            "    feature_{i} [shape=ellipse, label=\"{}\"];",
            member_label(&model.symbols, &feature.members)
        )
        .unwrap();
    }
    writeln!(out, "  }}").unwrap();
    writeln!(out, "  {{ rank=same;").unwrap();
    for t in model.net.types() {
        let name = model.symbols.label(t.type_id).unwrap_or("?");
        writeln!(
            out,
            "    type_{} [shape=doublecircle, label=\"{name}\"];",
            t.type_id.0
        )
        .unwrap();
    }
    writeln!(out, "  }}").unwrap();
    for (i, feature) in model.net.features().iter().enumerate() {
        for &region in &feature.owning_regions {
            writeln!(out, "  region_{region} -> feature_{i};").unwrap();
        }
    }
    for t in model.net.types() {
        for (&fid, &w) in &t.feature_links {
            writeln!(
                out,
                "  feature_{fid} -> type_{} [label=\"{w}\"];",
                t.type_id.0
            )
            .unwrap();
        }
    }
    for &(a, b) in model.net.committed_links() {
        writeln!(
            out,
            "  type_{} -> type_{} [dir=none, style=dotted];",
            a.0, b.0
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

/// The logic net: both layers, self links, relation links, groups and
/// inhibitors.
pub fn logic_dot(model: &Model) -> String {
    logic_net_dot(&model.logic, &model.symbols)
}

/// DOT for a standalone logic net; an empty net renders as a valid empty
/// digraph.
pub fn logic_net_dot(logic: &crate::logic::LogicNet, symbols: &SymbolTable) -> String {
    if logic.concepts().is_empty() {
        return String::from("digraph logic {\n}\n");
    }
    let mut out = String::from("digraph logic {\n");
    for layer in ["a", "b"] {
        writeln!(out, "  subgraph cluster_layer_{layer} {{").unwrap();
        writeln!(out, "    label=\"layer {layer}\";").unwrap();
        for &c in logic.concepts() {
            let name = symbols.label(c).unwrap_or("?");
            writeln!(out, "    {layer}_{} [label=\"{name}\"];", c.0).unwrap();
        }
        writeln!(out, "  }}").unwrap();
    }
    for &c in logic.concepts() {
        writeln!(out, "  a_{0} -> b_{0};", c.0).unwrap();
    }
    for (x, y, w) in logic.relations() {
        writeln!(out, "  a_{} -> b_{} [label=\"{w}\"];", x.0, y.0).unwrap();
        writeln!(out, "  a_{} -> b_{} [label=\"{w}\"];", y.0, x.0).unwrap();
    }
    for group in logic.groups() {
        writeln!(
            out,
            "  g{} [shape=box, label=\"G{} {}\"];",
            group.group_id,
            group.group_id,
            member_label(symbols, &group.members)
        )
        .unwrap();
        for &m in &group.members {
            writeln!(out, "  g{} -> a_{} [style=dotted];", group.group_id, m.0).unwrap();
        }
    }
    for &(a, b) in logic.inhibitors() {
        writeln!(out, "  g{a} -> g{b} [dir=none, style=dashed];").unwrap();
    }
    out.push_str("}\n");
    out
}

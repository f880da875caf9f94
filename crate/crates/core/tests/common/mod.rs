//! Shared fixtures for the integration suites.

use std::collections::BTreeSet;

use cogweave::event::read_corpus_str;
use cogweave::pipeline::{build_model, BuildConfig, Model};
use cogweave::symbols::{SymbolId, SymbolTable};
use cogweave::Event;

/// The houseboat corpus: two labelled full views plus two partial views.
/// Interned ids: window=0 door=1 wall=2 roof=3 house=4 hull=5 deck=6 boat=7.
pub const HB_CORPUS: &str = r#"{"seq":1,"symbols":["window","door","wall","roof"],"label":"house"}
{"seq":2,"symbols":["window","door","hull","deck"],"label":"boat"}
{"seq":3,"symbols":["wall","roof"]}
{"seq":4,"symbols":["hull","deck"]}
"#;

pub fn hb_events() -> (SymbolTable, Vec<Event>) {
    let mut table = SymbolTable::new();
    let events = read_corpus_str(HB_CORPUS, &mut table).expect("fixture corpus parses");
    (table, events)
}

pub fn hb_model() -> Model {
    let (table, events) = hb_events();
    build_model(events, table, BuildConfig::default()).expect("fixture model builds")
}

pub fn sym_set(ids: &[u32]) -> BTreeSet<SymbolId> {
    ids.iter().map(|&i| SymbolId(i)).collect()
}

/// Events from plain id sets, seq assigned in order.
pub fn events_from_sets(sets: &[BTreeSet<u32>]) -> Vec<Event> {
    sets.iter()
        .enumerate()
        .map(|(i, ids)| Event {
            seq: i as u64 + 1,
            actives: ids.iter().map(|&x| SymbolId(x)).collect(),
            label: None,
        })
        .collect()
}

//! Event ingestion from JSON Lines corpora.
//!
//! One event per line: `{"seq": 1, "symbols": ["window","door"], "label": "house"}`
//! with `label` optional. Symbols are interned on sight and duplicates inside
//! one record collapse to set membership.

use std::collections::BTreeSet;
use std::io::BufRead;

use serde::Deserialize;

use crate::error::ModelError;
use crate::symbols::{SymbolId, SymbolTable};

/// One observation: a set of co-active symbols with an optional supervision
/// label and a strictly increasing sequence index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub seq: u64,
    pub actives: BTreeSet<SymbolId>,
    pub label: Option<SymbolId>,
}

impl Event {
    /// Active symbol ids as raw grid node ids.
    pub fn active_raw(&self) -> BTreeSet<u32> {
        self.actives.iter().map(|s| s.0).collect()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    seq: u64,
    symbols: Vec<String>,
    #[serde(default)]
    label: Option<String>,
}

/// Parses one corpus line. `prev_seq` carries the previous event's index for
/// the monotonicity check; `line` is 1-based and only used in diagnostics.
pub fn parse_event_line(
    text: &str,
    line: usize,
    prev_seq: Option<u64>,
    table: &mut SymbolTable,
) -> Result<Event, ModelError> {
    let raw: RawRecord = serde_json::from_str(text).map_err(|e| ModelError::MalformedRecord {
        line,
        reason: e.to_string(),
    })?;
    if raw.symbols.is_empty() {
        return Err(ModelError::EmptyEvent { line });
    }
    if let Some(prev) = prev_seq {
        if raw.seq <= prev {
            return Err(ModelError::NonMonotoneSeq {
                line,
                seq: raw.seq,
                prev,
            });
        }
    }
    let mut actives = BTreeSet::new();
    for symbol in &raw.symbols {
        actives.insert(
            table
                .intern(symbol)
                .map_err(|_| ModelError::MalformedRecord {
                    line,
                    reason: "empty symbol label".into(),
                })?,
        );
    }
    let label = match &raw.label {
        Some(l) => Some(table.intern(l).map_err(|_| ModelError::MalformedRecord {
            line,
            reason: "empty label".into(),
        })?),
        None => None,
    };
    Ok(Event {
        seq: raw.seq,
        actives,
        label,
    })
}

/// Reads a whole corpus. Blank lines are skipped; any malformed line aborts
/// with its line number.
pub fn read_corpus<R: BufRead>(
    reader: R,
    table: &mut SymbolTable,
) -> Result<Vec<Event>, ModelError> {
    let mut events = Vec::new();
    let mut prev_seq = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let event = parse_event_line(&line, idx + 1, prev_seq, table)?;
        prev_seq = Some(event.seq);
        events.push(event);
    }
    Ok(events)
}

/// Parses a corpus held in memory.
pub fn read_corpus_str(text: &str, table: &mut SymbolTable) -> Result<Vec<Event>, ModelError> {
    read_corpus(std::io::Cursor::new(text), table)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HB: &str = r#"{"seq":1,"symbols":["window","door","wall","roof"],"label":"house"}
{"seq":2,"symbols":["window","door","hull","deck"],"label":"boat"}
{"seq":3,"symbols":["wall","roof"]}
{"seq":4,"symbols":["hull","deck"]}
"#;

    #[test]
    fn parses_houseboat_corpus() {
        let mut table = SymbolTable::new();
        let events = read_corpus_str(HB, &mut table).unwrap();
        assert_eq!(events.len(), 4);
        let e1 = &events[0];
        assert_eq!(e1.seq, 1);
        assert_eq!(
            e1.actives,
            [0, 1, 2, 3].iter().map(|&i| SymbolId(i)).collect()
        );
        assert_eq!(e1.label, Some(SymbolId(4)));
        assert_eq!(table.label(SymbolId(4)), Some("house"));
        // symbols interned in first-seen order, labels after the actives
        assert_eq!(table.lookup("hull"), Some(SymbolId(5)));
        assert_eq!(table.lookup("boat"), Some(SymbolId(7)));
    }

    #[test]
    fn duplicate_symbols_collapse() {
        let mut table = SymbolTable::new();
        let e = parse_event_line(
            r#"{"seq":1,"symbols":["door","door"]}"#,
            1,
            None,
            &mut table,
        )
        .unwrap();
        assert_eq!(e.actives.len(), 1);
    }

    #[test]
    fn empty_symbol_list_rejected() {
        let mut table = SymbolTable::new();
        let err = parse_event_line(r#"{"seq":1,"symbols":[]}"#, 3, None, &mut table).unwrap_err();
        assert!(matches!(err, ModelError::EmptyEvent { line: 3 }));
    }

    #[test]
    fn malformed_record_reports_line() {
        let mut table = SymbolTable::new();
        let err = parse_event_line("{not json", 7, None, &mut table).unwrap_err();
        assert!(matches!(err, ModelError::MalformedRecord { line: 7, .. }));
    }

    #[test]
    fn non_monotone_seq_rejected() {
        let mut table = SymbolTable::new();
        let text = "{\"seq\":2,\"symbols\":[\"a\"]}\n{\"seq\":2,\"symbols\":[\"b\"]}\n";
        let err = read_corpus_str(text, &mut table).unwrap_err();
        assert!(matches!(
            err,
            ModelError::NonMonotoneSeq {
                line: 2,
                seq: 2,
                prev: 2
            }
        ));
    }
}

//! Batch CLI: build a model snapshot from a JSON Lines corpus, then query it.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error. All JSON output is
//! rendered with sorted keys so repeated invocations are byte-identical.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::BufReader;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cogweave::event::read_corpus;
use cogweave::pipeline::{build_model, BuildConfig, Model};
use cogweave::semantic::RecognitionTrace;
use cogweave::snapshot;
use cogweave::symbols::{SymbolId, SymbolTable};
use cogweave::{dot, LayerState, Outcome};

#[derive(Parser)]
#[command(name = "cogweave", version, about = "Layered cognitive model engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a snapshot from a JSON Lines corpus.
    Build {
        #[arg(long)]
        corpus: PathBuf,
        /// Optional JSON build configuration.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recognise a symbol set against a snapshot and print the trace.
    Recall {
        #[arg(long)]
        snapshot: PathBuf,
        /// Comma-separated symbol labels; may be empty.
        #[arg(long, default_value = "")]
        symbols: String,
        /// Override the configured recognition round count.
        #[arg(long)]
        rounds: Option<u32>,
    },
    /// Build a scene binding from attribute:object pairs and print per-pair
    /// booleans.
    BindCheck {
        /// Comma-separated attribute:object pairs, e.g. red:circle,blue:square.
        #[arg(long)]
        pairs: String,
        /// Pairs to test; defaults to the full attribute × object matrix.
        #[arg(long)]
        check: Option<String>,
    },
    /// Propagate a stimulus (or run a schedule) through the logic net.
    LogicRun {
        #[arg(long)]
        net: PathBuf,
        /// Comma-separated stimulus labels; may be empty.
        #[arg(long, default_value = "")]
        stimulus: String,
        #[arg(long, default_value_t = 100)]
        max_steps: u32,
        /// JSON file with a list of group ids to run as a schedule.
        #[arg(long)]
        schedule: Option<PathBuf>,
    },
    /// Export a deterministic DOT rendering.
    ExportDot {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long, value_enum)]
        target: DotTarget,
    },
    /// Print per-level unit tables and regularity reports.
    Stats {
        #[arg(long)]
        snapshot: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DotTarget {
    Trees,
    Net,
    Logic,
}

enum CliError {
    Usage(String),
    Data(String),
}

impl From<cogweave::ModelError> for CliError {
    fn from(err: cogweave::ModelError) -> Self {
        CliError::Data(err.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) {
                err.exit();
            }
            eprintln!("{err}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn split_list(text: &str) -> Vec<&str> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect()
}

fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, CliError> {
    split_list(text)
        .into_iter()
        .map(|item| {
            let mut parts = item.splitn(2, ':');
            match (parts.next(), parts.next()) {
                (Some(a), Some(b)) if !a.trim().is_empty() && !b.trim().is_empty() => {
                    Ok((a.trim().to_string(), b.trim().to_string()))
                }
                _ => Err(CliError::Usage(format!(
                    "pair '{item}' is not attribute:object"
                ))),
            }
        })
        .collect()
}

fn print_sorted(value: &Value) {
    // Value objects are BTreeMaps, so keys come out sorted
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("value serialises")
    );
}

fn label_of(model: &Model, id: SymbolId) -> String {
    model.symbols.label(id).unwrap_or("?").to_string()
}

fn labels_of(model: &Model, ids: &BTreeSet<SymbolId>) -> Vec<String> {
    ids.iter().map(|&i| label_of(model, i)).collect()
}

fn trace_json(model: &Model, trace: &RecognitionTrace) -> Value {
    let rounds: Vec<Value> = trace
        .rounds
        .iter()
        .map(|round| {
            let fired: Vec<Vec<String>> = round
                .fired_features
                .iter()
                .map(|&fid| {
                    model.net.features()[fid]
                        .members
                        .iter()
                        .map(|&m| label_of(model, m))
                        .collect()
                })
                .collect();
            let scores: BTreeMap<String, f64> = round
                .type_scores
                .iter()
                .map(|&(t, s)| (label_of(model, t), s))
                .collect();
            let ensembles: Vec<Value> = round
                .pattern_activations
                .iter()
                .map(|p| {
                    json!({
                        "region": p.region,
                        "pattern": p.pattern,
                        "label": label_of(model, p.label),
                        "overlap": p.overlap,
                    })
                })
                .collect();
            json!({
                "round": round.round,
                "fired_features": fired,
                "scores": scores,
                "ensembles": ensembles,
                "leader": round.leader.map(|l| label_of(model, l)),
            })
        })
        .collect();
    let ranking: Vec<Value> = trace
        .final_ranking
        .iter()
        .map(|&(t, s)| json!({"type": label_of(model, t), "score": s}))
        .collect();
    json!({"rounds": rounds, "ranking": ranking})
}

fn layer_json(model: &Model, state: &LayerState) -> Value {
    json!({
        "layer_a": labels_of(model, &state.active_a),
        "layer_b": labels_of(model, &state.active_b),
        "groups": state.group_active.iter().collect::<Vec<_>>(),
    })
}

fn outcome_str(outcome: Outcome) -> &'static str {
    match outcome {
        Outcome::Settled => "settled",
        Outcome::Oscillation => "oscillation",
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Build {
            corpus,
            config,
            out,
        } => {
            let config = match config {
                Some(path) => {
                    let text = fs::read_to_string(&path)
                        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
                    serde_json::from_str::<BuildConfig>(&text)
                        .map_err(|e| CliError::Data(format!("invalid config: {e}")))?
                }
                None => BuildConfig::default(),
            };
            let file = fs::File::open(&corpus)
                .map_err(|e| CliError::Data(format!("{}: {e}", corpus.display())))?;
            let mut table = SymbolTable::new();
            let events = read_corpus(BufReader::new(file), &mut table)?;
            let model = build_model(events, table, config)?;
            snapshot::save(&model, &out)?;
            print_sorted(&json!({
                "snapshot": out.display().to_string(),
                "symbols": model.symbols.len(),
                "units": model.units1.len(),
                "types": model.net.type_ids().count(),
            }));
            Ok(())
        }
        Command::Recall {
            snapshot: path,
            symbols,
            rounds,
        } => {
            let model = snapshot::load(&path)?;
            let labels = split_list(&symbols);
            let trace = model.recognize_labels(&labels, rounds)?;
            print_sorted(&trace_json(&model, &trace));
            Ok(())
        }
        Command::BindCheck { pairs, check } => {
            let pairs = parse_pairs(&pairs)?;
            let mut table = SymbolTable::new();
            let mut id_pairs = Vec::new();
            for (a, o) in &pairs {
                let a = table.intern(a)?;
                let o = table.intern(o)?;
                id_pairs.push((a, o));
            }
            let scene = cogweave::SceneBinding::bind(&id_pairs);
            let checks: Vec<(SymbolId, SymbolId)> = match check {
                Some(text) => parse_pairs(&text)?
                    .into_iter()
                    .map(|(a, o)| match (table.lookup(&a), table.lookup(&o)) {
                        (Some(a), Some(o)) => Ok((a, o)),
                        _ => Err(CliError::Data(format!(
                            "pair {a}:{o} mentions a concept outside the scene"
                        ))),
                    })
                    .collect::<Result<_, _>>()?,
                None => {
                    let attributes: BTreeSet<SymbolId> = id_pairs.iter().map(|&(a, _)| a).collect();
                    let objects: BTreeSet<SymbolId> = id_pairs.iter().map(|&(_, o)| o).collect();
                    attributes
                        .iter()
                        .flat_map(|&a| objects.iter().map(move |&o| (a, o)))
                        .collect()
                }
            };
            let mut results: BTreeMap<String, bool> = BTreeMap::new();
            for (a, o) in checks {
                let key = format!(
                    "{}:{}",
                    table.label(a).unwrap_or("?"),
                    table.label(o).unwrap_or("?")
                );
                results.insert(key, scene.is_bound(a, o));
            }
            print_sorted(&json!({
                "scene": pairs.iter().map(|(a, o)| format!("{a}:{o}")).collect::<Vec<_>>(),
                "checks": results,
            }));
            Ok(())
        }
        Command::LogicRun {
            net,
            stimulus,
            max_steps,
            schedule,
        } => {
            if max_steps < 1 {
                return Err(CliError::Usage("--max-steps must be at least 1".into()));
            }
            let model = snapshot::load(&net)?;
            let stimulus = model.resolve_symbols(&split_list(&stimulus))?;
            match schedule {
                Some(path) => {
                    let text = fs::read_to_string(&path)
                        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
                    let entries: Vec<u32> = serde_json::from_str(&text)
                        .map_err(|e| CliError::Data(format!("invalid schedule: {e}")))?;
                    let extra = vec![stimulus; entries.len()];
                    let trace = model.logic.run_schedule(&entries, &extra, max_steps)?;
                    let steps: Vec<Value> = trace
                        .steps
                        .iter()
                        .map(|s| {
                            json!({
                                "group": s.group_id,
                                "won": s.won,
                                "winners": s.winners.iter().collect::<Vec<_>>(),
                                "outcome": outcome_str(s.outcome),
                                "steps": s.steps,
                            })
                        })
                        .collect();
                    print_sorted(&json!({"schedule": entries, "steps": steps}));
                }
                None => {
                    let run = model.logic.propagate(&stimulus, max_steps)?;
                    let steps: Vec<Value> = run
                        .trace
                        .iter()
                        .enumerate()
                        .map(|(i, s)| {
                            let mut v = layer_json(&model, s);
                            v["step"] = json!(i);
                            v
                        })
                        .collect();
                    print_sorted(&json!({
                        "outcome": outcome_str(run.outcome),
                        "final_step": run.step,
                        "steps": steps,
                        "winners": run.state.group_active.iter().collect::<Vec<_>>(),
                    }));
                }
            }
            Ok(())
        }
        Command::ExportDot {
            snapshot: path,
            target,
        } => {
            let model = snapshot::load(&path)?;
            let text = match target {
                DotTarget::Trees => dot::trees_dot(&model),
                DotTarget::Net => dot::net_dot(&model),
                DotTarget::Logic => dot::logic_dot(&model),
            };
            print!("{text}");
            Ok(())
        }
        Command::Stats { snapshot: path } => {
            let model = snapshot::load(&path)?;
            let unit_table = |units: &[cogweave::Unit]| -> Vec<Value> {
                units
                    .iter()
                    .map(|u| {
                        json!({
                            "unit_id": u.unit_id,
                            "members": u.members.iter().collect::<Vec<_>>(),
                            "labels": u
                                .members
                                .iter()
                                .map(|&m| {
                                    model.symbols.label(SymbolId(m)).unwrap_or("?").to_string()
                                })
                                .collect::<Vec<_>>(),
                        })
                    })
                    .collect()
            };
            let regularity: Vec<Value> = model
                .regularity
                .iter()
                .map(|r| {
                    json!({
                        "unit_id": r.unit_id,
                        "mean": r.mean,
                        "coefficient_of_variation": r.coefficient_of_variation,
                    })
                })
                .collect();
            let level3_units: Vec<Value> = model
                .units3
                .iter()
                .map(|u| {
                    json!({
                        "unit_id": u.unit_id,
                        "members": u.members.iter().collect::<Vec<_>>(),
                    })
                })
                .collect();
            print_sorted(&json!({
                "symbols": model.symbols.len(),
                "level1": {
                    "nodes": model.level1.nodes().len(),
                    "counted_pairs": model.level1.counted_pairs().count(),
                    "units": unit_table(&model.units1),
                },
                "level2": {
                    "counted_pairs": model.level2.counted_pairs().count(),
                    "regularity": regularity,
                },
                "level3": {
                    "counted_pairs": model.level3.counted_pairs().count(),
                    "units": level3_units,
                },
                "types": model
                    .net
                    .type_ids()
                    .map(|t| label_of(&model, t))
                    .collect::<Vec<_>>(),
                "regions": model.net.regions().len(),
            }));
            Ok(())
        }
    }
}

//! `compact`: check compacts, keep a history store, query norm states, emit
//! design documents, and benchmark view construction.
//!
//! Machine output goes to stdout as one JSON object per line; summaries and
//! diagnostics go to stderr.

use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use compact_core::couch::{emit_design_document, Mode};
use compact_core::dsl::{parse_compact, resolve};
use compact_core::generate::{generate_store, GeneratorConfig};
use compact_core::ledger::{EventRecord, HistoryDoc, Store};
use compact_core::norm::{build_tables, NormStateTable, NowPolicy};
use compact_core::view::{compile_views, measure_throughput, ViewDef, ViewEngine};
use serde_json::{json, Value};

/// Lateness offset the benchmark adds to each document's latest event time.
const BENCH_NOW_OFFSET: i64 = 11;

#[derive(Parser)]
#[command(name = "compact", version, about = "Norm-based contracts over event histories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Simplified,
    Verbatim,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, resolve and compile a compact; print each norm's states.
    Check {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Start a new history in the store.
    CreateHistory {
        #[arg(long)]
        store: PathBuf,
        id: String,
        /// Initial attributes as a JSON object, e.g. '{"patient":"P"}'.
        #[arg(default_value = "{}")]
        attrs: String,
    },
    /// Append one event, e.g. '{"Visit":{"$by":"P","date":"d","$time":1}}'.
    Submit {
        #[arg(long)]
        store: PathBuf,
        id: String,
        event: String,
    },
    /// Print the rows of one norm state.
    Query {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        norm: String,
        state: String,
        /// Evaluate clock-dependent states at this time instead of each
        /// document's latest event time.
        #[arg(long)]
        now: Option<i64>,
    },
    /// Render each norm as a CouchDB design document.
    Emit {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_enum, default_value = "simplified")]
        mode: ModeArg,
        /// Write `_design/<Norm>.json` files under this directory instead of
        /// printing.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a random enactment corpus into a new store file.
    Gen {
        #[arg(long)]
        store: PathBuf,
        #[arg(long, default_value_t = 20_000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Time cold construction of every view over the store.
    Bench {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long, default_value_t = 1000)]
        batch: usize,
    },
}

fn load_tables(path: &Path) -> Result<Vec<NormStateTable>> {
    let src = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("compact");
    let spec = parse_compact(&src, name).with_context(|| path.display().to_string())?;
    let resolved = resolve(spec).with_context(|| path.display().to_string())?;
    Ok(build_tables(&resolved)?)
}

fn load_store(path: &Path) -> Result<Store> {
    if !path.exists() {
        return Ok(Store::new());
    }
    Store::load(path).with_context(|| format!("loading {}", path.display()))
}

fn print_line(out: &mut impl Write, v: &Value) -> Result<()> {
    writeln!(out, "{v}")?;
    Ok(())
}

fn run(cmd: Command) -> Result<()> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match cmd {
        Command::Check { spec } => {
            let tables = load_tables(&spec)?;
            for t in &tables {
                emit_design_document(t, Mode::Simplified)?;
                emit_design_document(t, Mode::Verbatim)?;
                let states: Vec<&str> = t.state_names().collect();
                print_line(&mut out, &json!({"norm": t.norm, "kind": t.kind.keyword(), "states": states}))?;
                eprintln!("{} {}: {}", t.kind, t.norm, states.join(", "));
            }
            eprintln!("{}: {} norms, ok", spec.display(), tables.len());
        }
        Command::CreateHistory { store: path, id, attrs } => {
            let mut store = load_store(&path)?;
            let seq = store.last_seq();
            let v: Value = serde_json::from_str(&attrs).context("attributes must be a JSON object")?;
            let mut doc = v;
            let Some(obj) = doc.as_object_mut() else {
                bail!("attributes must be a JSON object");
            };
            obj.insert("_id".into(), json!(id));
            let header = HistoryDoc::from_json(&doc)?;
            if !header.events.is_empty() {
                bail!("create-history takes attributes only; submit events separately");
            }
            store.create_history(id.as_str(), Default::default(), header.attrs)?;
            store.append_since(&path, seq)?;
            print_line(&mut out, &json!({"historyId": id, "seq": store.last_seq()}))?;
        }
        Command::Submit { store: path, id, event } => {
            let mut store = load_store(&path)?;
            let seq = store.last_seq();
            let v: Value = serde_json::from_str(&event).context("event must be JSON")?;
            let ev = EventRecord::from_keyed_json(&v)?;
            store.submit_event(&id, ev)?;
            store.append_since(&path, seq)?;
            print_line(&mut out, &json!({"historyId": id, "seq": store.last_seq()}))?;
        }
        Command::Query {
            store,
            spec,
            norm,
            state,
            now,
        } => {
            let tables = load_tables(&spec)?;
            let store = load_store(&store)?;
            let mut engine = ViewEngine::new(&tables, NowPolicy::DocMax);
            let rows = engine.query(&store, &norm, &state, now)?;
            for row in &rows {
                print_line(&mut out, &serde_json::to_value(row)?)?;
            }
            eprintln!("{norm}.{state}: {} rows", rows.len());
        }
        Command::Emit { spec, mode, out: dir } => {
            let mode = match mode {
                ModeArg::Simplified => Mode::Simplified,
                ModeArg::Verbatim => Mode::Verbatim,
            };
            for t in load_tables(&spec)? {
                let dd = emit_design_document(&t, mode)?;
                match &dir {
                    Some(dir) => {
                        let path = dd.write_to(dir)?;
                        eprintln!("wrote {}", path.display());
                    }
                    None => print_line(&mut out, &dd.to_json())?,
                }
            }
        }
        Command::Gen { store, count, seed } => {
            let generated = generate_store(&GeneratorConfig { count, seed });
            generated.persist(&store)?;
            eprintln!(
                "{}: {} histories, {} changes (seed {seed})",
                store.display(),
                generated.len(),
                generated.last_seq()
            );
        }
        Command::Bench {
            store,
            spec,
            threads,
            batch,
        } => {
            let tables = load_tables(&spec)?;
            let store = load_store(&store)?;
            let views: Vec<ViewDef> = tables.iter().flat_map(compile_views).collect();
            let start = Instant::now();
            let stats = measure_throughput(
                &views,
                &store,
                batch,
                threads,
                NowPolicy::DocMaxPlus(BENCH_NOW_OFFSET),
            );
            for s in &stats {
                print_line(&mut out, &serde_json::to_value(s)?)?;
                eprintln!(
                    "{:>16}.{:<11} {:>8} docs {:>10.3} s {:>12.1} changes/s {:>7} rows",
                    s.norm, s.state, s.docs_processed, s.elapsed, s.changes_per_second, s.rows
                );
            }
            eprintln!(
                "{} views over {} docs in {:.2} s ({threads} threads)",
                stats.len(),
                store.len(),
                start.elapsed().as_secs_f64()
            );
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

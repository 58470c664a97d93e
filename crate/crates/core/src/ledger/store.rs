use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use indexmap::IndexMap;

use super::doc::{is_reserved_key, EventRecord, HistoryDoc, Scalar};
use super::persist::{corrupt, LogRecord};
use super::LedgerError;

/// Position in the change feed. `seq` starts at 1; `changes_since(0)`
/// returns everything.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChangeFeedEntry {
    pub seq: u64,
    pub history_id: String,
    /// `None` for the change that created the history.
    pub event: Option<String>,
}

/// Single-writer store of history documents.
///
/// Documents are held behind `Arc` so readers can keep a snapshot while the
/// writer moves on; an update copies the one document it touches.
#[derive(Debug, Clone, Default)]
pub struct Store {
    docs: IndexMap<String, Arc<HistoryDoc>>,
    log: Vec<LogRecord>,
}

impl Store {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// Sequence number of the latest change (0 when empty).
    pub fn last_seq(&self) -> u64 {
        self.log.len() as u64
    }

    pub fn get(&self, id: &str) -> Option<&HistoryDoc> {
        self.docs.get(id).map(Arc::as_ref)
    }

    pub fn snapshot(&self, id: &str) -> Option<Arc<HistoryDoc>> {
        self.docs.get(id).cloned()
    }

    /// Documents in creation order.
    pub fn docs(&self) -> impl ExactSizeIterator<Item = &HistoryDoc> + '_ {
        self.docs.values().map(Arc::as_ref)
    }

    pub fn snapshots(&self) -> Vec<Arc<HistoryDoc>> {
        self.docs.values().cloned().collect()
    }

    pub fn log(&self) -> &[LogRecord] {
        &self.log
    }

    /// The change stored at `seq`.
    pub fn change(&self, seq: u64) -> Option<&LogRecord> {
        seq.checked_sub(1).and_then(|i| self.log.get(i as usize))
    }

    pub fn create_history(
        &mut self,
        id: impl Into<String>,
        roles: IndexMap<String, Scalar>,
        attrs: IndexMap<String, Scalar>,
    ) -> Result<&HistoryDoc, LedgerError> {
        let id = id.into();
        let mut merged = roles;
        for (k, v) in attrs {
            match merged.get(&k) {
                Some(existing) if *existing != v => {
                    return Err(LedgerError::ConflictingAttribute {
                        history: id,
                        key: k,
                        existing: existing.clone(),
                        offered: v,
                    })
                }
                _ => {
                    merged.insert(k, v);
                }
            }
        }
        self.apply(LogRecord::Create { id: id.clone(), attrs: merged })?;
        Ok(self.get(&id).expect("just created"))
    }

    /// Appends `ev` to a history, promoting its attributes to the top
    /// level of the document.
    pub fn submit_event(
        &mut self,
        history_id: &str,
        ev: EventRecord,
    ) -> Result<&HistoryDoc, LedgerError> {
        self.apply(LogRecord::Event {
            history_id: history_id.to_string(),
            event: ev,
        })?;
        Ok(self.get(history_id).expect("exists"))
    }

    /// Validates and applies one change. Nothing is mutated on error.
    pub fn apply(&mut self, record: LogRecord) -> Result<u64, LedgerError> {
        match &record {
            LogRecord::Create { id, attrs } => {
                if self.docs.contains_key(id) {
                    return Err(LedgerError::DuplicateHistoryId(id.clone()));
                }
                if id.is_empty() {
                    return Err(LedgerError::InvalidEvent("empty history id".into()));
                }
                if let Some(k) = attrs.keys().find(|k| is_reserved_key(k)) {
                    return Err(LedgerError::InvalidEvent(format!(
                        "reserved attribute `{k}`"
                    )));
                }
                let mut doc = HistoryDoc::new(id.clone());
                doc.attrs = attrs.clone();
                doc.seq = 1;
                self.docs.insert(id.clone(), Arc::new(doc));
            }
            LogRecord::Event { history_id, event } => {
                let slot = self
                    .docs
                    .get_mut(history_id)
                    .ok_or_else(|| LedgerError::UnknownHistory(history_id.clone()))?;
                check_event(slot, event)?;
                let doc = Arc::make_mut(slot);
                for (k, v) in &event.attrs {
                    if !doc.attrs.contains_key(k) {
                        doc.attrs.insert(k.clone(), v.clone());
                    }
                }
                doc.events.insert(event.name.clone(), event.clone());
                doc.seq += 1;
            }
        }
        self.log.push(record);
        Ok(self.last_seq())
    }

    /// Feed entries strictly after `seq`, in order.
    pub fn changes_since(&self, seq: u64) -> Vec<ChangeFeedEntry> {
        self.changes_between(seq, self.last_seq())
    }

    /// Feed entries in `(from, to]`.
    pub fn changes_between(&self, from: u64, to: u64) -> Vec<ChangeFeedEntry> {
        let to = to.min(self.last_seq());
        (from.min(to)..to)
            .map(|i| {
                let rec = &self.log[i as usize];
                ChangeFeedEntry {
                    seq: i + 1,
                    history_id: rec.history_id().to_string(),
                    event: match rec {
                        LogRecord::Create { .. } => None,
                        LogRecord::Event { event, .. } => Some(event.name.clone()),
                    },
                }
            })
            .collect()
    }

    /// Rebuilds a store by applying the feed's changes in order.
    pub fn replay<'a>(records: impl IntoIterator<Item = &'a LogRecord>) -> Result<Store, LedgerError> {
        let mut store = Store::new();
        for rec in records {
            store.apply(rec.clone())?;
        }
        Ok(store)
    }

    pub fn write_log(&self, mut w: impl Write) -> std::io::Result<()> {
        for rec in &self.log {
            writeln!(w, "{}", rec.to_line())?;
        }
        Ok(())
    }

    pub fn to_log_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_log(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("utf-8")
    }

    /// Writes the whole log to `path`, replacing any file there.
    pub fn persist(&self, path: impl AsRef<Path>) -> Result<(), LedgerError> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_log(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// Appends the changes after `seq` to the log at `path`.
    pub fn append_since(&self, path: impl AsRef<Path>, seq: u64) -> Result<(), LedgerError> {
        let mut w = BufWriter::new(OpenOptions::new().create(true).append(true).open(path)?);
        for rec in self.log.iter().skip(seq as usize) {
            writeln!(w, "{}", rec.to_line())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Store, LedgerError> {
        Store::read_log(BufReader::new(File::open(path)?))
    }

    pub fn read_log(r: impl BufRead) -> Result<Store, LedgerError> {
        let mut store = Store::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let rec = LogRecord::from_line(&line).map_err(|e| corrupt(line_no, e))?;
            store
                .apply(rec)
                .map_err(|e| corrupt(line_no, e.to_string()))?;
        }
        Ok(store)
    }
}

fn check_event(doc: &HistoryDoc, ev: &EventRecord) -> Result<(), LedgerError> {
    ev.validate()?;
    if doc.events.contains_key(&ev.name) {
        return Err(LedgerError::DuplicateEventName {
            history: doc.id.clone(),
            event: ev.name.clone(),
        });
    }
    if let Some(latest) = doc.max_time() {
        if ev.time <= latest {
            return Err(LedgerError::NonMonotonicTime {
                history: doc.id.clone(),
                time: ev.time,
                latest,
            });
        }
    }
    let collision = if doc.attrs.contains_key(&ev.name) || ev.attrs.contains_key(&ev.name) {
        Some(&ev.name)
    } else {
        ev.attrs.keys().find(|k| doc.events.contains_key(*k))
    };
    if let Some(name) = collision {
        return Err(LedgerError::NameCollision {
            history: doc.id.clone(),
            name: name.clone(),
        });
    }
    for (k, v) in &ev.attrs {
        if let Some(existing) = doc.attrs.get(k) {
            if existing != v {
                return Err(LedgerError::ConflictingAttribute {
                    history: doc.id.clone(),
                    key: k.clone(),
                    existing: existing.clone(),
                    offered: v.clone(),
                });
            }
        }
    }
    Ok(())
}

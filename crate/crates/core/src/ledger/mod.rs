//! Append-only history documents and the change feed over them.
//!
//! A history is one JSON document: an `_id`, top-level attributes (role
//! bindings and every attribute an event has carried), and one subdocument
//! per event keyed by event name. Nothing is ever modified or removed.

mod doc;
mod persist;
mod store;

use thiserror::Error;

pub use doc::{EventRecord, HistoryDoc, Scalar};
pub use persist::LogRecord;
pub use store::{ChangeFeedEntry, Store};

use crate::Time;

#[derive(Debug, Error)]
pub enum LedgerError {
    #[error("history `{0}` already exists")]
    DuplicateHistoryId(String),
    #[error("unknown history `{0}`")]
    UnknownHistory(String),
    #[error("history `{history}` already binds `{key}` to {existing}, event carries {offered}")]
    ConflictingAttribute {
        history: String,
        key: String,
        existing: Scalar,
        offered: Scalar,
    },
    #[error("history `{history}` already records event `{event}`")]
    DuplicateEventName { history: String, event: String },
    #[error("history `{history}`: event time {time} is not after {latest}")]
    NonMonotonicTime {
        history: String,
        time: Time,
        latest: Time,
    },
    #[error("history `{history}`: name `{name}` is used both as an event and as an attribute")]
    NameCollision { history: String, name: String },
    #[error("invalid event: {0}")]
    InvalidEvent(String),
    #[error("corrupt log at line {line}: {reason}")]
    CorruptLog { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

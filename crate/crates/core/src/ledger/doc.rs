use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::LedgerError;
use crate::Time;

pub const BY_KEY: &str = "$by";
pub const TIME_KEY: &str = "$time";
pub const ID_KEY: &str = "_id";

/// Attribute value. Dates travel as strings.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Int(i64),
    Str(String),
}

impl Scalar {
    pub fn as_str(&self) -> Option<&str> {
        match self {
            Scalar::Str(s) => Some(s),
            Scalar::Int(_) => None,
        }
    }

    fn from_json(v: &Value) -> Option<Scalar> {
        match v {
            Value::String(s) => Some(Scalar::Str(s.clone())),
            Value::Number(n) => n.as_i64().map(Scalar::Int),
            _ => None,
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Scalar::Int(n) => Value::from(*n),
            Scalar::Str(s) => Value::from(s.as_str()),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Int(n) => write!(f, "{n}"),
            Scalar::Str(s) => write!(f, "{s:?}"),
        }
    }
}

impl From<&str> for Scalar {
    fn from(s: &str) -> Self {
        Scalar::Str(s.to_string())
    }
}

impl From<String> for Scalar {
    fn from(s: String) -> Self {
        Scalar::Str(s)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::Int(n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventRecord {
    pub name: String,
    /// Reporting agent.
    pub by: String,
    pub time: Time,
    pub attrs: IndexMap<String, Scalar>,
}

impl EventRecord {
    pub fn new(name: impl Into<String>, by: impl Into<String>, time: Time) -> Self {
        EventRecord {
            name: name.into(),
            by: by.into(),
            time,
            attrs: IndexMap::new(),
        }
    }

    pub fn with(mut self, key: impl Into<String>, value: impl Into<Scalar>) -> Self {
        self.attrs.insert(key.into(), value.into());
        self
    }

    pub(crate) fn validate(&self) -> Result<(), LedgerError> {
        if self.name.is_empty() {
            return Err(LedgerError::InvalidEvent("empty event name".into()));
        }
        if self.name == ID_KEY || self.name.starts_with('$') {
            return Err(LedgerError::InvalidEvent(format!(
                "reserved event name `{}`",
                self.name
            )));
        }
        if self.by.is_empty() {
            return Err(LedgerError::InvalidEvent(format!(
                "event `{}` has no reporting agent",
                self.name
            )));
        }
        if self.time < 0 {
            return Err(LedgerError::InvalidEvent(format!(
                "event `{}` has negative time {}",
                self.name, self.time
            )));
        }
        if let Some(k) = self.attrs.keys().find(|k| is_reserved_key(k)) {
            return Err(LedgerError::InvalidEvent(format!(
                "event `{}` carries reserved attribute `{k}`",
                self.name
            )));
        }
        Ok(())
    }

    /// Subdocument body, in the `{"$by": .., attrs.., "$time": ..}` layout.
    pub fn body_json(&self) -> Value {
        let mut m = Map::new();
        m.insert(BY_KEY.into(), Value::from(self.by.as_str()));
        for (k, v) in &self.attrs {
            m.insert(k.clone(), v.to_json());
        }
        m.insert(TIME_KEY.into(), Value::from(self.time));
        Value::Object(m)
    }

    /// Parses a subdocument body; `name` is the key it was stored under.
    pub fn from_body_json(name: &str, body: &Value) -> Result<EventRecord, LedgerError> {
        let obj = body
            .as_object()
            .ok_or_else(|| LedgerError::InvalidEvent(format!("event `{name}` is not an object")))?;
        let by = obj
            .get(BY_KEY)
            .and_then(Value::as_str)
            .ok_or_else(|| LedgerError::InvalidEvent(format!("event `{name}` lacks `$by`")))?;
        let time = obj
            .get(TIME_KEY)
            .and_then(Value::as_i64)
            .ok_or_else(|| LedgerError::InvalidEvent(format!("event `{name}` lacks integer `$time`")))?;
        let mut ev = EventRecord::new(name, by, time);
        for (k, v) in obj {
            if k == BY_KEY || k == TIME_KEY {
                continue;
            }
            let value = Scalar::from_json(v).ok_or_else(|| {
                LedgerError::InvalidEvent(format!("event `{name}`: attribute `{k}` is not a string or integer"))
            })?;
            ev.attrs.insert(k.clone(), value);
        }
        Ok(ev)
    }

    /// Parses the single-key `{"<Name>": {...}}` object form.
    pub fn from_keyed_json(v: &Value) -> Result<EventRecord, LedgerError> {
        match v.as_object() {
            Some(obj) if obj.len() == 1 => {
                let (name, body) = obj.iter().next().unwrap();
                EventRecord::from_body_json(name, body)
            }
            _ => Err(LedgerError::InvalidEvent(
                "expected an object with exactly one event key".into(),
            )),
        }
    }
}

pub(crate) fn is_reserved_key(k: &str) -> bool {
    k == ID_KEY || k == BY_KEY || k == TIME_KEY
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistoryDoc {
    pub id: String,
    pub attrs: IndexMap<String, Scalar>,
    pub events: IndexMap<String, EventRecord>,
    /// Number of changes applied to this document.
    pub seq: u64,
}

impl HistoryDoc {
    pub fn new(id: impl Into<String>) -> Self {
        HistoryDoc {
            id: id.into(),
            attrs: IndexMap::new(),
            events: IndexMap::new(),
            seq: 0,
        }
    }

    pub fn event(&self, name: &str) -> Option<&EventRecord> {
        self.events.get(name)
    }

    pub fn attr(&self, key: &str) -> Option<&Scalar> {
        self.attrs.get(key)
    }

    /// Latest event time, or `None` for a history without events.
    pub fn max_time(&self) -> Option<Time> {
        self.events.values().map(|e| e.time).max()
    }

    /// The document in its store representation: `_id`, attributes, then
    /// one subdocument per event.
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert(ID_KEY.into(), Value::from(self.id.as_str()));
        for (k, v) in &self.attrs {
            m.insert(k.clone(), v.to_json());
        }
        for (name, ev) in &self.events {
            m.insert(name.clone(), ev.body_json());
        }
        Value::Object(m)
    }

    /// Reads a store-representation document. Object-valued keys are
    /// events; everything else except `_id` and CouchDB's `_rev` is an
    /// attribute. `seq` is set to the number of changes the document
    /// embodies.
    pub fn from_json(v: &Value) -> Result<HistoryDoc, LedgerError> {
        let obj = v
            .as_object()
            .ok_or_else(|| LedgerError::InvalidEvent("history document is not an object".into()))?;
        let id = obj
            .get(ID_KEY)
            .and_then(Value::as_str)
            .ok_or_else(|| LedgerError::InvalidEvent("history document lacks `_id`".into()))?;
        let mut doc = HistoryDoc::new(id);
        for (k, v) in obj {
            if k.starts_with('_') {
                continue;
            }
            if v.is_object() {
                doc.events.insert(k.clone(), EventRecord::from_body_json(k, v)?);
            } else {
                let value = Scalar::from_json(v).ok_or_else(|| {
                    LedgerError::InvalidEvent(format!("attribute `{k}` is not a string or integer"))
                })?;
                doc.attrs.insert(k.clone(), value);
            }
        }
        doc.events.sort_by(|_, a, _, b| a.time.cmp(&b.time));
        doc.seq = 1 + doc.events.len() as u64;
        Ok(doc)
    }
}

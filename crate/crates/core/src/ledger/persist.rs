//! Line-delimited JSON log: one `{"create": ..}` or `{"event": ..}` object
//! per line, in change order.

use indexmap::IndexMap;
use serde_json::{Map, Value};

use super::doc::{EventRecord, Scalar, ID_KEY};
use super::LedgerError;

const HISTORY_KEY: &str = "historyId";

/// One applied change.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LogRecord {
    Create {
        id: String,
        attrs: IndexMap<String, Scalar>,
    },
    Event {
        history_id: String,
        event: EventRecord,
    },
}

impl LogRecord {
    pub fn history_id(&self) -> &str {
        match self {
            LogRecord::Create { id, .. } => id,
            LogRecord::Event { history_id, .. } => history_id,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut outer = Map::new();
        match self {
            LogRecord::Create { id, attrs } => {
                let mut m = Map::new();
                m.insert(ID_KEY.into(), Value::from(id.as_str()));
                for (k, v) in attrs {
                    m.insert(k.clone(), serde_json::to_value(v).expect("scalar"));
                }
                outer.insert("create".into(), Value::Object(m));
            }
            LogRecord::Event { history_id, event } => {
                let mut m = Map::new();
                m.insert(HISTORY_KEY.into(), Value::from(history_id.as_str()));
                m.insert(event.name.clone(), event.body_json());
                outer.insert("event".into(), Value::Object(m));
            }
        }
        Value::Object(outer)
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("log record serializes")
    }

    pub fn from_line(line: &str) -> Result<LogRecord, String> {
        let v: Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let obj = v.as_object().ok_or("record is not an object")?;
        if obj.len() != 1 {
            return Err("record must have exactly one of `create`/`event`".into());
        }
        if let Some(c) = obj.get("create") {
            let c = c.as_object().ok_or("`create` is not an object")?;
            let id = c
                .get(ID_KEY)
                .and_then(Value::as_str)
                .ok_or("`create` lacks `_id`")?;
            let mut attrs = IndexMap::new();
            for (k, v) in c {
                if k == ID_KEY {
                    continue;
                }
                let s: Scalar = serde_json::from_value(v.clone())
                    .map_err(|_| format!("attribute `{k}` is not a string or integer"))?;
                attrs.insert(k.clone(), s);
            }
            return Ok(LogRecord::Create {
                id: id.to_string(),
                attrs,
            });
        }
        if let Some(e) = obj.get("event") {
            let e = e.as_object().ok_or("`event` is not an object")?;
            let history_id = e
                .get(HISTORY_KEY)
                .and_then(Value::as_str)
                .ok_or("`event` lacks `historyId`")?;
            let mut rest = e.iter().filter(|(k, _)| *k != HISTORY_KEY);
            let (name, body) = match (rest.next(), rest.next()) {
                (Some(kv), None) => kv,
                _ => return Err("`event` must hold exactly one event object".into()),
            };
            let event = EventRecord::from_body_json(name, body).map_err(|e| e.to_string())?;
            return Ok(LogRecord::Event {
                history_id: history_id.to_string(),
                event,
            });
        }
        Err("record must have exactly one of `create`/`event`".into())
    }
}

pub(crate) fn corrupt(line: usize, reason: impl Into<String>) -> LedgerError {
    LedgerError::CorruptLog {
        line,
        reason: reason.into(),
    }
}

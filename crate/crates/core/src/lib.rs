//! Norm-based declarative contracts ("compacts") over append-only event
//! histories.
//!
//! The pipeline runs from compact source text to materialized views:
//!
//! * [`dsl`] parses and resolves compact specifications.
//! * [`norm`] derives each norm's full state table and evaluates state
//!   formulas against a history document.
//! * [`ledger`] keeps append-only history documents and a change feed.
//! * [`view`] compiles state formulas into views and maintains them
//!   incrementally off the change feed.
//! * [`couch`] renders views as CouchDB design documents and talks to a
//!   CouchDB-compatible server.
//! * [`generate`] builds seeded random enactment corpora for benchmarks.

pub mod couch;
pub mod dsl;
pub mod generate;
pub mod ledger;
pub mod norm;
pub mod view;

/// Logical time, as stamped in an event's `$time`.
pub type Time = i64;

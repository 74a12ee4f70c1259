//! Forward slicing of the ADG and per-source taint propagation.

mod propagate;
mod slice;

pub use propagate::{facts_at_sinks, propagate_taint, Env, FactSet, SinkFacts, Status, TaintFact, TaintState};
pub use slice::{follows, forward_slice, per_source_slices, reachable, Slice};

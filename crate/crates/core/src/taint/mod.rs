//! Forward taint analysis from tagged views to storage and transmission sinks.

mod engine;
mod graph;
mod sinks;

pub use engine::{line_at, 
    forward_taint, FlowPath, FlowStep, KeyCandidate, Label, Marker, TaintConfig, TaintFacts, TaintOutcome,
    DEFAULT_BUDGET,
};
pub use graph::{Fact, Supergraph};
pub use sinks::{position_register, SinkCatalog, SinkSpec, BUILTIN_SINKS};

#[cfg(test)]
mod tests;

//! Control-flow graphs, call graph, entry points and reachability.

pub mod callgraph;
pub mod cfg;
pub mod dot;
pub mod entry;
pub mod reach;

pub use callgraph::{build_call_graph, CallEdge, CallEdgeKind, CallGraph, CgNode, ClassInfo, NodeId};
pub use cfg::{build_cfg, BasicBlock, Cfg, EdgeKind};
pub use dot::{call_graph_dot, cfg_dot};
pub use entry::{find_entry_points, DynamicReceiver, EntryKind, EntryPoints};
pub use reach::{PathStep, ReachResult, Reachability};

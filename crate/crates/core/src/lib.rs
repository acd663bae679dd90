//! Verification of programs running under Total Store Order.
//!
//! Reachability is decided through the Dual TSO semantics, where writes
//! reach memory immediately and reads go through per-process load buffers.
//! Both semantics share the same set of reachable empty-buffer global
//! states, and Dual TSO admits a well-quasi-ordering that makes backward
//! reachability terminate, for a fixed number of processes as well as for
//! an arbitrary number of copies of one template.

pub mod backward;
pub mod dtso;
pub mod explore;
pub mod ordering;
pub mod param;
pub mod program;
pub mod run;
pub mod runfile;
pub mod translate;
pub mod tso;

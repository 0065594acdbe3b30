//! Experiment harness around the `pairig` solvers: problem builders for
//! the bundled experiments, strict JSON configuration, run
//! orchestration, and trace persistence. The `pairig` binary is a thin
//! wrapper over this library.

pub mod config;
pub mod experiments;
pub mod run;
pub mod trace_io;

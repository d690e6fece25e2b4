//! Configuration, commands and output formats behind the `diffest` binary.

pub mod commands;
pub mod config;
pub mod output;
pub mod units;

pub use commands::{cmd_bound, cmd_csl, cmd_montecarlo, cmd_sweep, evaluate, BoundReport, Evaluation};
pub use config::{AnglePolicy, Config, SchemeChoice, SweepVariable};
pub use output::{read_header_config, read_table, Cell, Table};

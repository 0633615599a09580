//! Command-line front end over `cvcluster_core`.
//!
//! Six verbs, three formats. Everything is deterministic: the same flags
//! and config produce byte-identical files.
//!
//! | verb         | output                                               |
//! |--------------|------------------------------------------------------|
//! | ppt-scan     | csv: angle x bipartition PPT table                   |
//! | supermodes   | csv: eigenvalue, variance, residual, coefficients    |
//! | dual-rail    | json/dot: two-rail wire graph                        |
//! | lattice      | json/dot: staggered 2D lattice with macronodes       |
//! | time-varying | json/dot: same, under a per-bin angle schedule       |
//! | overlap      | csv: pump/signal/idler overlaps with the parity flag |
//!
//! Exit codes: 0 ok, 2 rejected flag or config key, 3 violated numerical
//! contract, 4 filesystem trouble.

pub mod commands;
pub mod config;
pub mod export;

pub use commands::run;
pub use config::{Cli, CliError, Command, CommonArgs, Format, Settings};

//! Command implementations behind the `harness` binary: exact correlation
//! tables, verification suites, simulation summaries, and the relaxation /
//! profile CSV pipelines.

pub mod csvio;
pub mod exact_table;
pub mod figs;
pub mod simulate;
pub mod verify;

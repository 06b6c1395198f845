//! Command-line companion to `sisdmdp-core`: model file I/O, a benchmark
//! harness over generated instances, report rendering and solver
//! cross-checks. The `sisdmdp` binary wires these into the `generate`,
//! `validate`, `solve`, `bench` and `compare` subcommands.

pub mod bench;
pub mod compare;
pub mod io;
pub mod report;

pub use bench::{
    criterion_token, fastest_flags, run_algorithm, run_bench, Algorithm, AlgorithmRun,
    BenchRecord, BenchSpec, ValueCell,
};
pub use compare::{compare_solvers, CompareReport, CompareRow, MAX_ORACLE_STATES};
pub use io::{parse_model, serialize_model};
pub use report::{emit_report, parse_csv, ReportFormat, CSV_HEADER};

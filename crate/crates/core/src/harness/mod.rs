//! Pair files, parameter parsing, random instances and the benchmark runner.

pub mod bench;
pub mod generator;
pub mod pairfile;
pub mod params;

pub use bench::{bench, BenchReport, BenchRow, SchemeSummary};
pub use generator::{generate_instance, InstanceSpec};
pub use pairfile::{parse_pair_file, parse_raw_pair, write_pair_file, PairFileError};
pub use params::{parse_instance_specs, parse_rational, parse_scheme, ParamError};

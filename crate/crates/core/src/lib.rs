//! Sorting genomes with unequal content and intergenic regions by reversals,
//! transpositions and indels under weighted costs, with a lower bound, an
//! approximation factor per weight scheme and an exact search for tiny inputs.

pub mod algorithm;
pub mod genome;
pub mod graph;
pub mod harness;
pub mod oracle;
pub mod steps;

pub use algorithm::{
    approximation_factor, delta_max, lower_bound, run, step_delta_values, Iteration, Rational, RunError,
    RunReport, WeightError, WeightScheme,
};
pub use genome::{
    apply_sequence, normalize_pair, Deletion, Gene, Genome, GenomeError, Insertion, NormalizedPair, OpError,
    OpKind, OperationSequence, RawGene, RawGenome, RearrangementOp, Reversal, Transposition,
};
pub use graph::{build_graph, BreakpointGraph, Cycle, GraphError, GraphMeasures};
pub use oracle::{exact_distance, OracleError, OracleLimits, OracleResult};
pub use steps::{StepError, StepId};

//! Deterministic fixtures for the criterion benchmarks.

use intergenic::harness::generator::{generate_instance_weighted, InstanceSpec};
use intergenic::harness::parse_pair_file;
use intergenic::{NormalizedPair, WeightScheme};

pub const FIGURE_ONE: &str = "\
>source
genes: X a -h d b -g -i e
intergenic: 1 2 2 0 1 2 2 3 2
>target
genes: a b c d e f g h i
intergenic: 3 0 1 1 3 0 2 1 3 1
";

pub fn figure_one() -> NormalizedPair {
    parse_pair_file(FIGURE_ONE).expect("valid fixture")
}

/// `count` instances with `m` genes scrambled by `m` operations of `scheme`.
pub fn scrambled(m: usize, count: u64, scheme: &WeightScheme) -> Vec<NormalizedPair> {
    (0..count)
        .map(|seed| {
            let spec = InstanceSpec {
                m,
                k: m,
                max_region: 5,
                exclusive_counts: (m / 10 + 1, m / 10 + 1),
                seed,
            };
            generate_instance_weighted(&spec, scheme)
        })
        .collect()
}

/// Instances within the exact search's default limits.
pub fn oracle_sized(count: u64, scheme: &WeightScheme) -> Vec<NormalizedPair> {
    (0..count)
        .map(|seed| {
            let spec = InstanceSpec { m: 3, k: 3, max_region: 1, exclusive_counts: (0, 0), seed };
            generate_instance_weighted(&spec, scheme)
        })
        .collect()
}

//! Deterministic random instances.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algorithm::WeightScheme;
use crate::genome::{
    normalize_pair, Deletion, Gene, Genome, Insertion, NormalizedPair, RawGene, RawGenome, RearrangementOp,
    Reversal, Transposition,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct InstanceSpec {
    /// Target gene count before exclusive runs are merged.
    pub m: usize,
    /// Scrambling operations applied to the source.
    pub k: usize,
    /// Largest initial region.
    pub max_region: u64,
    /// `(source-exclusive, target-exclusive)` gene counts.
    pub exclusive_counts: (usize, usize),
    pub seed: u64,
}

/// Generates with operation types drawn uniformly.
pub fn generate_instance(spec: &InstanceSpec) -> NormalizedPair {
    generate_instance_weighted(spec, &WeightScheme::from_ints(1, 1, 1, 1, 1))
}

/// Identity target with random regions; the source is the target minus the
/// target-exclusive genes, plus source-exclusive genes, scrambled by `k`
/// operations whose types are drawn with probability proportional to `1/W`.
pub fn generate_instance_weighted(spec: &InstanceSpec, weights: &WeightScheme) -> NormalizedPair {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let m = spec.m;
    let r = spec.max_region;
    let target_regions: Vec<u64> = (0..=m).map(|_| rng.gen_range(0..=r)).collect();

    // Source over ids 1..=m (shared or dropped) and m+1.. (source-exclusive).
    let dropped: Vec<usize> = sample(&mut rng, m, spec.exclusive_counts.1.min(m)).into_vec();
    let mut genes: Vec<Gene> = Vec::new();
    let mut regions: Vec<u64> = vec![target_regions[0]];
    for (id, &t) in target_regions.iter().enumerate().skip(1) {
        if dropped.contains(&(id - 1)) {
            *regions.last_mut().expect("non-empty") += t;
        } else {
            genes.push(Gene::forward(id as u32));
            regions.push(t);
        }
    }
    let mut source = Genome::new(genes, regions).expect("distinct genes");
    for extra in 0..spec.exclusive_counts.0 {
        let i = rng.gen_range(1..=source.len() + 1);
        let op = Insertion {
            i,
            genes: vec![Gene::forward((m + 1 + extra) as u32)],
            regions: vec![0, rng.gen_range(0..=r)],
            x: rng.gen_range(0..=source.region(i)),
        };
        source = source.apply(&op.into()).expect("fresh gene");
    }

    let inverse = |w: num_rational::Ratio<i64>| 1.0 / (*w.numer() as f64 / *w.denom() as f64);
    let kinds = WeightedIndex::new([inverse(weights.w_rev()), inverse(weights.w_trans()), inverse(weights.w_indel())])
        .expect("positive weights");
    for _ in 0..spec.k {
        let kind = kinds.sample(&mut rng);
        let op = random_op(&mut rng, &source, kind, r);
        source = source.apply(&op).expect("generated within range");
    }

    let name = |id: u32| {
        if id as usize <= m {
            format!("g{id}")
        } else {
            format!("x{}", id as usize - m)
        }
    };
    let raw_source = RawGenome::new(
        source
            .genes()
            .iter()
            .map(|g| RawGene::new(name(g.id().expect("no alpha yet")), g.is_reversed()))
            .collect(),
        source.regions().to_vec(),
    );
    let raw_target = RawGenome::new(
        (1..=m as u32).map(|id| RawGene::new(name(id), false)).collect(),
        target_regions,
    );
    normalize_pair(&raw_source, &raw_target).expect("generated genomes are valid")
}

fn random_op(rng: &mut ChaCha8Rng, g: &Genome, kind: usize, r: u64) -> RearrangementOp {
    let n = g.len();
    match kind {
        0 if n >= 1 => {
            let i = rng.gen_range(1..=n);
            let j = rng.gen_range(i..=n);
            Reversal {
                i,
                j,
                x: rng.gen_range(0..=g.region(i)),
                y: rng.gen_range(0..=g.region(j + 1)),
            }
            .into()
        }
        1 if n >= 2 => {
            let mut idx = sample(rng, n + 1, 3).into_vec();
            idx.sort_unstable();
            let (i, j, k) = (idx[0] + 1, idx[1] + 1, idx[2] + 1);
            Transposition {
                i,
                j,
                k,
                x: rng.gen_range(0..=g.region(i)),
                y: rng.gen_range(0..=g.region(j)),
                z: rng.gen_range(0..=g.region(k)),
            }
            .into()
        }
        _ => {
            let i = rng.gen_range(1..=n + 1);
            let size = g.region(i);
            if size > 0 && rng.gen_bool(0.5) {
                Deletion { i, j: i, x: 0, y: rng.gen_range(1..=size) }.into()
            } else {
                Insertion { i, genes: vec![], regions: vec![rng.gen_range(1..=r.max(1))], x: 0 }.into()
            }
        }
    }
}

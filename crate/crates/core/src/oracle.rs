//! Exact minimum-weight sorting for tiny instances by best-first search over
//! genome states.

use std::cmp::Reverse;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap, HashSet};

use num_traits::Zero;
use thiserror::Error;

use crate::algorithm::{delta_max, Rational, WeightScheme};
use crate::genome::{
    apply_deletion, apply_insertion, apply_reversal, apply_transposition, Deletion, Gene, Genome, Insertion,
    NormalizedPair, OperationSequence, RearrangementOp, Reversal, Transposition,
};
use crate::graph::BreakpointGraph;

/// Size limits; instances beyond them are refused.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    /// Maximum genes in either genome.
    pub max_genes: usize,
    /// Maximum of source plus target nucleotides.
    pub max_nucleotides: u64,
    /// Nucleotides a state may hold beyond source plus target totals.
    pub cap_slack: u64,
    /// Maximum number of settled states before giving up.
    pub max_states: usize,
    /// Guide the search with an admissible lower bound; plain uniform-cost search when false.
    pub heuristic: bool,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_genes: 4,
            max_nucleotides: 12,
            cap_slack: 0,
            max_states: 2_000_000,
            heuristic: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub weight: Rational,
    pub witness: OperationSequence,
    /// States settled by the search.
    pub explored: usize,
    /// Set when a state over the nucleotide cap could have led to a cheaper sequence.
    pub exactness_caveat: bool,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance has {genes} genes, limit is {limit}")]
    TooManyGenes { genes: usize, limit: usize },
    #[error("instance has {nucleotides} nucleotides, limit is {limit}")]
    TooManyNucleotides { nucleotides: u64, limit: u64 },
    #[error("search settled {0} states without reaching the target")]
    StateLimit(usize),
    #[error("target unreachable within the nucleotide cap")]
    Unreachable,
}

/// Every move out of `genome` that stays within `cap` total nucleotides,
/// in a fixed order: reversals, transpositions, deletions, insertions.
pub fn enumerate_moves(genome: &Genome, target: &Genome, cap: u64) -> Vec<(RearrangementOp, Genome)> {
    let mut out = Vec::new();
    each_move(genome, target, cap, |op, next| out.push((op, next.clone())), |_, _| {});
    out
}

/// Drives `keep` for in-cap successors and `over` for the smallest
/// nucleotide insertions that leave the cap.
fn each_move(
    g: &Genome,
    target: &Genome,
    cap: u64,
    mut keep: impl FnMut(RearrangementOp, &Genome),
    mut over: impl FnMut(RearrangementOp, &Genome),
) {
    let n = g.len();
    let total = g.total_nucleotides();

    for i in 1..=n {
        for j in i..=n {
            let (a, b) = (g.region(i), g.region(j + 1));
            for s in 0..=a + b {
                let x = s.min(a);
                let op = Reversal { i, j, x, y: s - x };
                let next = apply_reversal(g, &op).expect("in range");
                keep(op.into(), &next);
            }
        }
    }

    for i in 1..=n + 1 {
        for j in i + 1..=n + 1 {
            for k in j + 1..=n + 1 {
                let (a, b, c) = (g.region(i), g.region(j), g.region(k));
                let mut seen = HashSet::new();
                for x in 0..=a {
                    for y in 0..=b {
                        for z in 0..=c {
                            if !seen.insert((x + b - y, z + a - x)) {
                                continue;
                            }
                            let op = Transposition { i, j, k, x, y, z };
                            let next = apply_transposition(g, &op).expect("in range");
                            keep(op.into(), &next);
                        }
                    }
                }
            }
        }
    }

    // Nucleotide-only deletions.
    for i in 1..=n + 1 {
        for d in 1..=g.region(i) {
            let op = Deletion { i, j: i, x: 0, y: d };
            keep(op.into(), &apply_deletion(g, &op).expect("in range"));
        }
    }
    // Deletions of alpha runs, leaving any merged amount.
    for i in 1..=n {
        for j in i + 1..=n + 1 {
            if !g.genes()[j - 2].is_alpha() {
                break;
            }
            let (a, b) = (g.region(i), g.region(j));
            for v in 0..=a + b {
                let x = v.min(a);
                let op = Deletion { i, j, x, y: b - (v - x) };
                keep(op.into(), &apply_deletion(g, &op).expect("in range"));
            }
        }
    }

    // Nucleotide-only insertions.
    for i in 1..=n + 1 {
        for d in 1..=cap.saturating_sub(total) {
            let op = Insertion { i, genes: vec![], regions: vec![d], x: 0 };
            let next = apply_insertion(g, &op).expect("in range");
            keep(op.into(), &next);
        }
        let op = Insertion { i, genes: vec![], regions: vec![cap + 1 - total.min(cap)], x: 0 };
        over(op.clone().into(), &apply_insertion(g, &op).expect("in range"));
    }

    // Insertions of runs of consecutive missing target genes, either orientation.
    let m = target.len() as u32;
    let missing: Vec<u32> = (1..=m).filter(|&id| !g.contains_id(id)).collect();
    let budget = cap.saturating_sub(total);
    for (a, &first) in missing.iter().enumerate() {
        let mut run = vec![first];
        for &next in &missing[a + 1..] {
            if next != run[run.len() - 1] + 1 {
                break;
            }
            run.push(next);
        }
        for len in 1..=run.len() {
            let forward: Vec<Gene> = run[..len].iter().map(|&id| Gene::forward(id)).collect();
            let reverse: Vec<Gene> = forward.iter().rev().map(|g| g.flipped()).collect();
            for genes in [forward, reverse] {
                for i in 1..=n + 1 {
                    gene_insertions(g, i, &genes, budget, &mut keep);
                }
                if len == 1 {
                    break;
                }
            }
        }
    }
}

/// Inserting `genes` into region `i`: every final left/right flank and every
/// interior region, adding at most `budget` nucleotides overall.
fn gene_insertions(g: &Genome, i: usize, genes: &[Gene], budget: u64, keep: &mut impl FnMut(RearrangementOp, &Genome)) {
    let s = g.region(i);
    let interior = genes.len() - 1;
    // Final left flank L and right flank R with L + R >= s.
    for left in 0..=s + budget {
        let x = left.min(s);
        let rest = s - x;
        let added_left = left - x;
        if added_left > budget {
            break;
        }
        for right in rest..=rest + budget - added_left {
            let used = added_left + (right - rest);
            let mut inner = vec![0u64; interior];
            loop {
                let inner_sum: u64 = inner.iter().sum();
                if used + inner_sum <= budget {
                    let mut regions = Vec::with_capacity(genes.len() + 1);
                    regions.push(added_left);
                    regions.extend_from_slice(&inner);
                    regions.push(right - rest);
                    let op = Insertion { i, genes: genes.to_vec(), regions, x };
                    keep(op.clone().into(), &apply_insertion(g, &op).expect("in range"));
                }
                if !next_composition(&mut inner, budget - used) {
                    break;
                }
            }
        }
    }
}

/// Odometer over vectors with entries summing to at most `limit`.
fn next_composition(v: &mut [u64], limit: u64) -> bool {
    for k in 0..v.len() {
        v[k] += 1;
        if v.iter().sum::<u64>() <= limit {
            return true;
        }
        v[k] = 0;
    }
    false
}

/// Admissible estimate of the remaining weight from `genome`.
fn estimate(genome: &Genome, target: &Genome, w: &WeightScheme) -> Rational {
    let m = BreakpointGraph::new(genome, target)
        .expect("states stay graphable")
        .measures();
    let one = Rational::from_integer(1);
    let per_good = (one / w.w_rev()).max(Rational::from_integer(2) / w.w_trans()).max(one / w.w_indel());
    let per_cycle = (one / w.w_rev()).max(Rational::from_integer(2) / w.w_trans());
    let by_good = Rational::from_integer(m.b_g) / per_good;
    let by_cycles = Rational::from_integer(m.b) / per_cycle;
    let by_potential = w.potential(&m) / delta_max(w);
    by_good.max(by_cycles).max(by_potential)
}

struct Node {
    cost: Rational,
    parent: Option<(Genome, RearrangementOp)>,
    settled: bool,
}

/// Minimum-weight sequence turning `pair.source` into `pair.target`.
///
/// States whose total nucleotide count exceeds source plus target totals,
/// plus `cap_slack`, are never entered. `exactness_caveat` reports that a smallest step over that
/// cap had an estimated completion cost below the optimum found.
pub fn exact_distance(
    pair: &NormalizedPair,
    weights: &WeightScheme,
    limits: &OracleLimits,
) -> Result<OracleResult, OracleError> {
    let genes = pair.source.len().max(pair.target.len());
    if genes > limits.max_genes {
        return Err(OracleError::TooManyGenes { genes, limit: limits.max_genes });
    }
    let nucleotides = pair.source.total_nucleotides() + pair.target.total_nucleotides();
    if nucleotides > limits.max_nucleotides {
        return Err(OracleError::TooManyNucleotides { nucleotides, limit: limits.max_nucleotides });
    }
    let cap = nucleotides + limits.cap_slack;

    let target = &pair.target;
    let h = |g: &Genome| {
        if limits.heuristic {
            estimate(g, target, weights)
        } else {
            Rational::zero()
        }
    };

    let mut nodes: HashMap<Genome, Node> = HashMap::new();
    let mut heap = BinaryHeap::new();
    nodes.insert(pair.source.clone(), Node { cost: Rational::zero(), parent: None, settled: false });
    heap.push(Reverse((h(&pair.source), Rational::zero(), pair.source.clone())));
    let mut explored = 0;
    let mut pruned_bound: Option<Rational> = None;

    while let Some(Reverse((_, cost, genome))) = heap.pop() {
        let node = nodes.get_mut(&genome).expect("queued states are recorded");
        if node.settled || node.cost < cost {
            continue;
        }
        node.settled = true;
        explored += 1;
        if explored > limits.max_states {
            return Err(OracleError::StateLimit(limits.max_states));
        }
        if genome == *target {
            let witness = unwind(&nodes, &genome);
            let exactness_caveat = pruned_bound.is_some_and(|b| b < cost);
            return Ok(OracleResult { weight: cost, witness, explored, exactness_caveat });
        }

        let mut pushes = Vec::new();
        let mut over = Vec::new();
        each_move(
            &genome,
            target,
            cap,
            |op, next| pushes.push((op, next.clone())),
            |op, next| over.push((op, next.clone())),
        );
        for (op, next) in over {
            let bound = cost + weights.weight_of(&op) + h(&next);
            if pruned_bound.is_none_or(|b| bound < b) {
                pruned_bound = Some(bound);
            }
        }
        for (op, next) in pushes {
            let next_cost = cost + weights.weight_of(&op);
            match nodes.entry(next) {
                Entry::Occupied(mut e) => {
                    if !e.get().settled && next_cost < e.get().cost {
                        let f = next_cost + h(e.key());
                        heap.push(Reverse((f, next_cost, e.key().clone())));
                        let n = e.get_mut();
                        n.cost = next_cost;
                        n.parent = Some((genome.clone(), op));
                    }
                }
                Entry::Vacant(e) => {
                    let f = next_cost + h(e.key());
                    heap.push(Reverse((f, next_cost, e.key().clone())));
                    e.insert(Node { cost: next_cost, parent: Some((genome.clone(), op)), settled: false });
                }
            }
        }
    }
    Err(OracleError::Unreachable)
}

fn unwind(nodes: &HashMap<Genome, Node>, end: &Genome) -> OperationSequence {
    let mut ops = Vec::new();
    let mut cur = end;
    while let Some((prev, op)) = &nodes[cur].parent {
        ops.push(op.clone());
        cur = prev;
    }
    ops.reverse();
    ops
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithm::run;
    use crate::genome::apply_sequence;

    fn pair(source: Genome, target: Genome) -> NormalizedPair {
        NormalizedPair::from_genomes(source, target)
    }

    fn check_witness(p: &NormalizedPair, w: &WeightScheme, r: &OracleResult) {
        assert_eq!(apply_sequence(&p.source, &r.witness).unwrap(), p.target);
        assert_eq!(w.weight_of_all(&r.witness), r.weight);
    }

    #[test]
    fn identity_costs_nothing() {
        let g = Genome::identity(vec![1, 0, 2]);
        let r = exact_distance(&pair(g.clone(), g), &WeightScheme::from_ints(1, 1, 1, 1, 1), &OracleLimits::default())
            .unwrap();
        assert_eq!(r.weight, Rational::zero());
        assert!(r.witness.is_empty());
    }

    #[test]
    fn one_nucleotide_insertion() {
        let w = WeightScheme::from_ints(2, 3, 5, 1, 1);
        let p = pair(Genome::identity(vec![0, 0]), Genome::identity(vec![3, 0]));
        let r = exact_distance(&p, &w, &OracleLimits::default()).unwrap();
        assert_eq!(r.weight, Rational::from_integer(5));
        assert_eq!(r.witness, vec![RearrangementOp::from(Insertion { i: 1, genes: vec![], regions: vec![3], x: 0 })]);
    }

    #[test]
    fn missing_gene_is_inserted_with_its_regions() {
        let w = WeightScheme::from_ints(1, 1, 1, 1, 1);
        let p = pair(Genome::identity(vec![1, 3]), Genome::identity(vec![1, 2, 1]));
        let r = exact_distance(&p, &w, &OracleLimits::default()).unwrap();
        assert_eq!(r.weight, Rational::from_integer(1));
        check_witness(&p, &w, &r);
    }

    #[test]
    fn alpha_run_is_deleted() {
        let w = WeightScheme::from_ints(1, 1, 1, 1, 1);
        let source = Genome::new(vec![Gene::forward(1), Gene::Alpha, Gene::Alpha], vec![0, 1, 2, 0]).unwrap();
        let p = pair(source, Genome::identity(vec![0, 1]));
        let r = exact_distance(&p, &w, &OracleLimits::default()).unwrap();
        assert_eq!(r.weight, Rational::from_integer(1));
        check_witness(&p, &w, &r);
    }

    #[test]
    fn move_count_by_hand() {
        // Reversals 3 × 3 sums, 7 distinct transposition outcomes, 3 single-
        // nucleotide deletions and 3 × 3 nucleotide insertions under cap 6.
        let g = Genome::identity(vec![1, 1, 1]);
        let moves = enumerate_moves(&g, &g, 6);
        let count = |f: fn(&RearrangementOp) -> bool| moves.iter().filter(|(op, _)| f(op)).count();
        assert_eq!(count(|o| matches!(o, RearrangementOp::Reversal(_))), 9);
        assert_eq!(count(|o| matches!(o, RearrangementOp::Transposition(_))), 7);
        assert_eq!(count(|o| matches!(o, RearrangementOp::Deletion(_))), 3);
        assert_eq!(count(|o| matches!(o, RearrangementOp::Insertion(_))), 9);
        assert_eq!(moves.len(), 28);
    }

    #[test]
    fn figure_two_is_sandwiched() {
        let source = Genome::new(
            vec![Gene::Alpha, Gene::forward(1), Gene::reverse(3), Gene::reverse(2)],
            vec![1, 2, 2, 4, 2],
        )
        .unwrap();
        let p = pair(source, Genome::identity(vec![2, 1, 2, 3]));
        let w = WeightScheme::from_ints(2, 3, 2, 4, 1);
        let limits = OracleLimits { max_nucleotides: 19, ..OracleLimits::default() };
        let r = exact_distance(&p, &w, &limits).unwrap();
        check_witness(&p, &w, &r);
        let alg = run(&p, &w).unwrap();
        assert!(alg.lower_bound <= r.weight && r.weight <= alg.total_weight);
        assert!(alg.total_weight <= r.weight * alg.factor);
    }

    #[test]
    fn heuristic_does_not_change_the_optimum() {
        let w = WeightScheme::from_ints(2, 3, 1, 1, 1);
        let source = Genome::new(vec![Gene::reverse(2), Gene::Alpha, Gene::forward(1)], vec![1, 0, 1, 0]).unwrap();
        let p = pair(source, Genome::identity(vec![0, 1, 1]));
        let a = exact_distance(&p, &w, &OracleLimits::default()).unwrap();
        let u = exact_distance(&p, &w, &OracleLimits { heuristic: false, ..OracleLimits::default() }).unwrap();
        assert_eq!(a.weight, u.weight);
        assert!(a.explored <= u.explored);
        check_witness(&p, &w, &a);
    }

    #[test]
    fn refuses_large_instances() {
        let w = WeightScheme::from_ints(1, 1, 1, 1, 1);
        let big = Genome::identity(vec![0; 6]);
        assert_eq!(
            exact_distance(&pair(big.clone(), big), &w, &OracleLimits::default()),
            Err(OracleError::TooManyGenes { genes: 5, limit: 4 })
        );
        let heavy = Genome::identity(vec![7, 0]);
        assert_eq!(
            exact_distance(&pair(heavy.clone(), heavy), &w, &OracleLimits::default()),
            Err(OracleError::TooManyNucleotides { nucleotides: 14, limit: 12 })
        );
        let g = Genome::new(vec![Gene::forward(2), Gene::forward(1)], vec![1, 1, 1]).unwrap();
        let limits = OracleLimits { max_states: 1, ..OracleLimits::default() };
        assert_eq!(
            exact_distance(&pair(g, Genome::identity(vec![1, 1, 1])), &w, &limits),
            Err(OracleError::StateLimit(1))
        );
    }
}

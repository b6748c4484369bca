//! The seven constructive steps of the sorting loop, the state they act on,
//! and the virtual-insertion ledger.
//!
//! Steps I and II are direct constructions. Steps III to VII search over
//! reversals or transpositions whose cuts fall on the chosen cycle's origin
//! edges, follow them with at most a fixed number of balancing indels, and
//! keep the candidate with the best weighted progress that meets the step's
//! claim. Every plan is replayed and re-measured before it is returned.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::rc::Rc;

use thiserror::Error;

use crate::algorithm::{Rational, WeightScheme};
use crate::genome::{
    apply_reversal, apply_transposition, Deletion, Gene, Genome, Insertion, NormalizedPair, OpError,
    OperationSequence, RearrangementOp, Reversal, Transposition,
};
use crate::graph::{delta_measures, Balance, BreakpointGraph, GraphMeasures, Polarity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StepId {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
}

impl StepId {
    pub const ALL: [StepId; 7] = [
        StepId::I,
        StepId::II,
        StepId::III,
        StepId::IV,
        StepId::V,
        StepId::VI,
        StepId::VII,
    ];

    /// `(Δc, Δc_g)` guaranteed by the step.
    pub fn claim(self) -> (i64, i64) {
        match self {
            StepId::I | StepId::II => (0, 1),
            StepId::III => (2, 2),
            StepId::IV => (2, 1),
            StepId::V | StepId::VI => (1, 1),
            StepId::VII => (1, 2),
        }
    }
}

impl fmt::Display for StepId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StepId::I => "I",
            StepId::II => "II",
            StepId::III => "III",
            StepId::IV => "IV",
            StepId::V => "V",
            StepId::VI => "VI",
            StepId::VII => "VII",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepPlan {
    pub step: StepId,
    pub ops: OperationSequence,
    pub claimed: (i64, i64),
}

/// Nucleotides virtually added to clean target edges, keyed by `x` of `t_x`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VirtualInsertionLedger {
    entries: BTreeMap<u32, u64>,
}

impl VirtualInsertionLedger {
    pub fn new() -> VirtualInsertionLedger {
        VirtualInsertionLedger::default()
    }

    pub fn add(&mut self, x: u32, amount: u64) {
        if amount > 0 {
            *self.entries.entry(x).or_insert(0) += amount;
        }
    }

    pub fn get(&self, x: u32) -> u64 {
        self.entries.get(&x).copied().unwrap_or(0)
    }

    /// Entries in increasing `x`.
    pub fn iter(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.entries.iter().map(|(&x, &a)| (x, a))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StepError {
    #[error("step {step} does not apply: {reason}")]
    Precondition { step: StepId, reason: &'static str },
    #[error("step {step} found no candidate for the cycle at position {leftmost}; source {genome}, target {target}")]
    SearchFailed {
        step: StepId,
        leftmost: usize,
        genome: String,
        target: String,
    },
    #[error("step {step} replay measured {measured:?}, predicted {predicted:?}; source {genome}, target {target}")]
    Verification {
        step: StepId,
        predicted: (i64, i64),
        measured: (i64, i64),
        genome: String,
        target: String,
    },
    #[error("step {step} emitted an invalid operation: {source}")]
    InvalidOp { step: StepId, source: OpError },
    #[error("ledger entry t_{x} (+{amount}) does not match final source region {region}")]
    Ledger { x: u32, amount: u64, region: usize },
}

/// Source genome, ledger-augmented target and their graph.
#[derive(Debug, Clone)]
pub struct SortState {
    source: Genome,
    target: Genome,
    ledger: VirtualInsertionLedger,
    graph: BreakpointGraph,
}

impl SortState {
    pub fn new(pair: &NormalizedPair) -> SortState {
        SortState::from_genomes(pair.source.clone(), pair.target.clone())
            .expect("normalized pair")
    }

    pub fn from_genomes(source: Genome, target: Genome) -> Result<SortState, crate::graph::GraphError> {
        let graph = BreakpointGraph::new(&source, &target)?;
        Ok(SortState {
            source,
            target,
            ledger: VirtualInsertionLedger::new(),
            graph,
        })
    }

    pub fn source(&self) -> &Genome {
        &self.source
    }

    /// Target with virtual insertions applied.
    pub fn target(&self) -> &Genome {
        &self.target
    }

    pub fn ledger(&self) -> &VirtualInsertionLedger {
        &self.ledger
    }

    pub fn graph(&self) -> &BreakpointGraph {
        &self.graph
    }

    pub fn measures(&self) -> GraphMeasures {
        self.graph.measures()
    }

    /// Applies a real operation to the source or a virtual one to the target.
    pub fn apply(&mut self, op: &RearrangementOp) -> Result<(), OpError> {
        match op {
            RearrangementOp::VirtualInsertion { gene, amount } => {
                match self.graph.target_edge_of(*gene) {
                    Some(e) if !e.is_labeled() => {}
                    _ => return Err(OpError::Virtual),
                }
                *self.target.region_mut(*gene as usize + 1) += amount;
                self.ledger.add(*gene, *amount);
            }
            RearrangementOp::Insertion(ins) => {
                let m = self.target.len() as u32;
                if let Some(&g) = ins.genes.iter().find(|g| g.id().is_none_or(|id| id > m)) {
                    return Err(OpError::InsertGene(g));
                }
                self.source = self.source.apply(op)?;
            }
            _ => self.source = self.source.apply(op)?,
        }
        self.graph = BreakpointGraph::new(&self.source, &self.target)
            .expect("valid operations keep the pair graphable");
        Ok(())
    }

    fn apply_all(&mut self, step: StepId, ops: &[RearrangementOp]) -> Result<(), StepError> {
        for op in ops {
            self.apply(op)
                .map_err(|source| StepError::InvalidOp { step, source })?;
        }
        Ok(())
    }

    /// Highest-priority applicable step and the cycle it acts on.
    pub fn next_step(&self) -> Option<(StepId, usize)> {
        let cycles = self.graph.cycles();
        let find = |pred: &dyn Fn(&crate::graph::Cycle) -> bool| cycles.iter().position(pred);
        if let Some(k) = find(&|c| c.trivial && c.is_bad()) {
            return Some((StepId::I, k));
        }
        if let Some(k) = find(&|c| !c.trivial && c.is_clean() && c.balance != Balance::Balanced) {
            return Some((StepId::II, k));
        }
        if let Some(k) = find(&|c| c.is_good() && c.is_oriented()) {
            return Some((StepId::III, k));
        }
        if let Some(k) = find(&|c| c.is_bad() && c.is_oriented()) {
            return Some((StepId::IV, k));
        }
        if let Some(k) = find(&|c| c.labeled && c.is_divergent()) {
            return Some((StepId::V, k));
        }
        if let Some(k) = find(&|c| c.is_good() && c.is_divergent()) {
            return Some((StepId::VI, k));
        }
        find(&|c| !c.is_settled()).map(|k| (StepId::VII, k))
    }

    fn describe(&self) -> (String, String) {
        (self.source.to_string(), self.target.to_string())
    }
}

/// Plans the next loop iteration, or `None` once the graph is sorted.
pub fn plan_next(state: &SortState, weights: &WeightScheme) -> Result<Option<StepPlan>, StepError> {
    let Some((step, k)) = state.next_step() else {
        return Ok(None);
    };
    let plan = match step {
        StepId::I => step_trivial_bad(state, k)?,
        StepId::II => step_unbalanced_clean(state, k)?,
        StepId::III => step_good_oriented(state, k, weights)?,
        StepId::IV => step_bad_oriented(state, k, weights)?,
        StepId::V => step_labeled_divergent(state, k, weights)?,
        StepId::VI => step_good_divergent(state, k, weights)?,
        StepId::VII => step_no_divergent(state, weights)?,
    };
    Ok(Some(plan))
}

// ---------------------------------------------------------------------------
// Steps I and II.

/// First indel towards fixing trivial cycle `k`; `None` once it is good.
fn trivial_fix_op(state: &SortState, k: usize) -> Option<RearrangementOp> {
    let g = state.graph();
    let cycle = &g.cycles()[k];
    if cycle.is_good() {
        return None;
    }
    let origin = g.origin_edge(cycle.origin[0]);
    let edge = &g.target_edges()[cycle.target[0]];
    let src = state.source();
    let tgt = state.target();
    let w = edge.weight;
    let t_first = tgt.region(edge.x as usize + 1);
    let t_last = tgt.region(edge.next as usize);

    if origin.alpha {
        let (lo, hi) = (origin.first_region, origin.last_region);
        let (s_lo, s_hi) = (src.region(lo), src.region(hi));
        let reach = s_lo + s_hi;
        let keep = if edge.is_labeled() { reach.min(t_first + t_last) } else { reach.min(w) };
        let x = keep.min(s_lo);
        let y = s_hi - (keep - x);
        return Some(Deletion { i: lo, j: hi, x, y }.into());
    }

    let r = origin.first_region;
    let w_o = origin.weight;
    if !edge.is_labeled() {
        return Some(if w_o < w {
            Insertion { i: r, genes: vec![], regions: vec![w - w_o], x: 0 }.into()
        } else {
            Deletion { i: r, j: r, x: 0, y: w_o - w }.into()
        });
    }
    if w_o > t_first + t_last {
        return Some(Deletion { i: r, j: r, x: 0, y: w_o - (t_first + t_last) }.into());
    }

    // Insert the missing run so that every new region matches the target.
    let mut wanted: Vec<u64> = (edge.x + 1..=edge.next).map(|i| tgt.region(i as usize)).collect();
    let mut genes: Vec<Gene> = edge.missing.iter().map(|&id| Gene::forward(id)).collect();
    let forward = g.vertices()[origin.left_position()].polarity == Polarity::Plus;
    if !forward {
        wanted.reverse();
        genes = genes.into_iter().rev().map(Gene::flipped).collect();
    }
    let last = wanted.len() - 1;
    let xs = w_o.min(wanted[0]);
    let mut regions = wanted.clone();
    regions[0] -= xs;
    regions[last] -= w_o - xs;
    Some(Insertion { i: r, genes, regions, x: xs }.into())
}

/// Indels turning the trivial cycle holding `t_x` good.
fn trivial_fix(state: &SortState, x: u32, step: StepId) -> Result<Vec<RearrangementOp>, StepError> {
    let mut st = state.clone();
    let mut ops = Vec::new();
    for _ in 0..2 {
        let k = st.graph().cycle_of_target(x).expect("target edges persist");
        match trivial_fix_op(&st, k) {
            None => return Ok(ops),
            Some(op) => {
                st.apply_all(step, std::slice::from_ref(&op))?;
                ops.push(op);
            }
        }
    }
    let k = st.graph().cycle_of_target(x).expect("target edges persist");
    if st.graph().cycles()[k].is_good() {
        Ok(ops)
    } else {
        let (genome, target) = state.describe();
        Err(StepError::SearchFailed { step, leftmost: st.graph().cycles()[k].leftmost, genome, target })
    }
}

fn min_target_x(g: &BreakpointGraph, k: usize) -> u32 {
    g.cycles()[k]
        .target
        .iter()
        .map(|&t| g.target_edges()[t].x)
        .min()
        .expect("cycles have target edges")
}

/// Step I: a trivial bad cycle becomes good with one or two indels.
pub fn step_trivial_bad(state: &SortState, k: usize) -> Result<StepPlan, StepError> {
    let c = &state.graph().cycles()[k];
    if !c.trivial || c.is_good() {
        return Err(StepError::Precondition { step: StepId::I, reason: "cycle must be trivial and bad" });
    }
    let ops = trivial_fix(state, min_target_x(state.graph(), k), StepId::I)?;
    verified(state, StepId::I, ops, (0, 1))
}

fn unbalanced_clean_op(state: &SortState, k: usize) -> RearrangementOp {
    let g = state.graph();
    let c = &g.cycles()[k];
    if c.origin_weight < c.target_weight {
        let region = g.origin_edge(c.origin[0]).first_region;
        Insertion {
            i: region,
            genes: vec![],
            regions: vec![c.target_weight - c.origin_weight],
            x: 0,
        }
        .into()
    } else {
        RearrangementOp::VirtualInsertion {
            gene: min_target_x(g, k),
            amount: c.origin_weight - c.target_weight,
        }
    }
}

/// Step II: an unbalanced clean cycle is balanced by one insertion, real on
/// an origin edge or virtual on a target edge.
pub fn step_unbalanced_clean(state: &SortState, k: usize) -> Result<StepPlan, StepError> {
    let c = &state.graph().cycles()[k];
    if c.labeled || c.balance == Balance::Balanced {
        return Err(StepError::Precondition { step: StepId::II, reason: "cycle must be clean and unbalanced" });
    }
    let op = unbalanced_clean_op(state, k);
    verified(state, StepId::II, vec![op], (0, 1))
}

fn verified(
    state: &SortState,
    step: StepId,
    ops: Vec<RearrangementOp>,
    predicted: (i64, i64),
) -> Result<StepPlan, StepError> {
    let mut st = state.clone();
    st.apply_all(step, &ops)?;
    let measured = delta_measures(&state.measures(), &st.measures());
    let claimed = step.claim();
    if measured != predicted || measured.0 < claimed.0 || measured.1 < claimed.1 {
        let (genome, target) = state.describe();
        return Err(StepError::Verification { step, predicted, measured, genome, target });
    }
    Ok(StepPlan { step, ops, claimed })
}

// ---------------------------------------------------------------------------
// Candidate search for steps III to VII.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Good,
    Fix(usize),
    Stuck,
}

/// Weight-independent description of one cycle.
#[derive(Debug, Clone)]
struct CycleShape {
    key: u32,
    regions: Vec<usize>,
    target_weight: u64,
    labeled: bool,
    trivial: Option<TrivialShape>,
}

#[derive(Debug, Clone, Copy)]
struct TrivialShape {
    alpha_span: Option<(usize, usize)>,
    run: bool,
    t_first: u64,
    t_last: u64,
}

impl CycleShape {
    /// Indels needed to make the cycle good, mirroring the step I and II constructions.
    fn status(&self, regions: &[u64]) -> Status {
        let o: u64 = self.regions.iter().map(|&r| regions[r - 1]).sum();
        if o == self.target_weight && !self.labeled {
            return Status::Good;
        }
        match self.trivial {
            None if self.labeled => Status::Stuck,
            None => Status::Fix(1),
            Some(t) => Status::Fix(match (t.alpha_span, t.run) {
                (None, false) => 1,
                (None, true) => 1 + usize::from(o > t.t_first + t.t_last),
                (Some((lo, hi)), false) => 1 + usize::from(self.target_weight > regions[lo - 1] + regions[hi - 1]),
                (Some(_), true) => 2,
            }),
        }
    }

    fn could_be_good(&self) -> bool {
        !self.labeled || self.trivial.is_some()
    }
}

#[derive(Debug)]
struct Shape {
    c: usize,
    cycles: Vec<CycleShape>,
}

impl Shape {
    fn of(graph: &BreakpointGraph, target: &Genome) -> Shape {
        let cycles = graph
            .cycles()
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let mut regions: Vec<usize> = c
                    .origin
                    .iter()
                    .flat_map(|&o| graph.origin_edge(o).regions())
                    .collect();
                regions.sort_unstable();
                let trivial = c.trivial.then(|| {
                    let o = graph.origin_edge(c.origin[0]);
                    let t = &graph.target_edges()[c.target[0]];
                    TrivialShape {
                        alpha_span: o.alpha.then_some((o.first_region, o.last_region)),
                        run: t.is_labeled(),
                        t_first: target.region(t.x as usize + 1),
                        t_last: target.region(t.next as usize),
                    }
                });
                CycleShape {
                    key: min_target_x(graph, k),
                    regions,
                    target_weight: c.target_weight,
                    labeled: c.labeled,
                    trivial,
                }
            })
            .collect();
        Shape { c: graph.cycles().len(), cycles }
    }

    fn potential_good(&self) -> i64 {
        self.cycles.iter().filter(|c| c.could_be_good()).count() as i64
    }
}

#[derive(Debug, Clone)]
struct Candidate {
    ops: Vec<RearrangementOp>,
    fixes: Vec<u32>,
    delta: (i64, i64),
    weight: Rational,
    score: Rational,
}

struct Search<'a> {
    target: &'a Genome,
    weights: &'a WeightScheme,
    before: GraphMeasures,
    claim: (i64, i64),
    budget: usize,
    shapes: HashMap<Vec<Gene>, Rc<Shape>>,
    best: Option<Candidate>,
}

impl<'a> Search<'a> {
    fn new(state: &'a SortState, weights: &'a WeightScheme, claim: (i64, i64), budget: usize) -> Search<'a> {
        let mut shapes = HashMap::new();
        shapes.insert(
            state.source().genes().to_vec(),
            Rc::new(Shape::of(state.graph(), state.target())),
        );
        Search {
            target: state.target(),
            weights,
            before: state.measures(),
            claim,
            budget,
            shapes,
            best: None,
        }
    }

    fn shape(&mut self, genes: &[Gene]) -> Rc<Shape> {
        if let Some(s) = self.shapes.get(genes) {
            return Rc::clone(s);
        }
        let zeros = vec![0; genes.len() + 1];
        let g = BreakpointGraph::new(&Genome::from_parts(genes.to_vec(), zeros), self.target)
            .expect("rearrangements keep the pair graphable");
        let s = Rc::new(Shape::of(&g, self.target));
        self.shapes.insert(genes.to_vec(), Rc::clone(&s));
        s
    }

    fn best_score(&self) -> Option<Rational> {
        self.best.as_ref().map(|b| b.score)
    }

    fn score(&self, dc: i64, dcg: i64, weight: Rational) -> Rational {
        (self.weights.p1() * dcg + self.weights.p2() * dc) / weight
    }

    /// Scores `ops` followed by the cheapest fixes, keeping the best candidate.
    fn consider(&mut self, ops: &[RearrangementOp], shape: &Shape, regions: &[u64]) {
        let dc = shape.c as i64 - self.before.c as i64;
        if dc < self.claim.0 {
            return;
        }
        let mut good = 0i64;
        let mut fixes: Vec<(usize, u32)> = Vec::new();
        for c in &shape.cycles {
            match c.status(regions) {
                Status::Good => good += 1,
                Status::Fix(cost) => fixes.push((cost, c.key)),
                Status::Stuck => {}
            }
        }
        fixes.sort_unstable();
        let base = self.weights.weight_of_all(ops);
        let mut dcg = good - self.before.c_g as i64;
        let mut cost = 0;
        for taken in 0..=fixes.len() {
            if taken > 0 {
                cost += fixes[taken - 1].0;
                if cost > self.budget {
                    break;
                }
                dcg += 1;
            }
            if dcg < self.claim.1 {
                continue;
            }
            let weight = base + self.weights.w_indel() * cost as i64;
            let score = self.score(dc, dcg, weight);
            if self.best_score().is_none_or(|b| score > b) {
                self.best = Some(Candidate {
                    ops: ops.to_vec(),
                    fixes: fixes[..taken].iter().map(|f| f.1).collect(),
                    delta: (dc, dcg),
                    weight,
                    score,
                });
            }
        }
    }

    fn reversals(&mut self, genome: &Genome, pairs: &[(usize, usize)]) {
        for &(r1, r2) in pairs {
            let (a, b) = (genome.region(r1), genome.region(r2));
            let probe = apply_reversal(genome, &Reversal { i: r1, j: r2 - 1, x: 0, y: 0 })
                .expect("zero splits are valid");
            let shape = self.shape(probe.genes());
            if (shape.c as i64) - (self.before.c as i64) < self.claim.0 {
                continue;
            }
            for s in 0..=a + b {
                let x = s.min(a);
                let op = Reversal { i: r1, j: r2 - 1, x, y: s - x };
                let child = apply_reversal(genome, &op).expect("splits within range");
                self.consider(&[op.into()], &shape, child.regions());
            }
        }
    }

    fn transpositions(&mut self, genome: &Genome, triples: &[(usize, usize, usize)]) {
        for &(i, j, k) in triples {
            let mut shape = None;
            for_each_transposition(genome, (i, j, k), |op, child| {
                let shape = shape.get_or_insert_with(|| self.shape(child.genes())).clone();
                self.consider(&[op.into()], &shape, child.regions());
            });
        }
    }

    /// Reversal sequences of length up to `depth`: the first cuts two regions
    /// of one cycle (or any of `first`), later ones must split a cycle.
    fn reversal_tree(
        &mut self,
        genome: &Genome,
        shape: &Shape,
        ops: &mut Vec<RearrangementOp>,
        depth: usize,
        first: &[(usize, usize)],
    ) {
        let pairs: Vec<(usize, usize)> = if ops.is_empty() {
            first.to_vec()
        } else {
            shape.cycles.iter().flat_map(|c| pairs_of(&c.regions)).collect()
        };
        let done = ops.len() + 1;
        let remaining = (depth - done) as i64;
        for (r1, r2) in pairs {
            let (a, b) = (genome.region(r1), genome.region(r2));
            let probe = apply_reversal(genome, &Reversal { i: r1, j: r2 - 1, x: 0, y: 0 })
                .expect("zero splits are valid");
            let child_shape = self.shape(probe.genes());
            if !ops.is_empty() && child_shape.c != shape.c + 1 {
                continue;
            }
            let dc = child_shape.c as i64 - self.before.c as i64;
            let ub_c = dc + remaining;
            let ub_g = child_shape.potential_good() - self.before.c_g as i64 + remaining;
            if ub_c < self.claim.0 || ub_g < self.claim.1 {
                continue;
            }
            let lightest = self.weights.w_rev() * done as i64;
            if let Some(best) = self.best_score() {
                if self.score(ub_c, ub_g, lightest) <= best {
                    continue;
                }
            }
            for s in 0..=a + b {
                let x = s.min(a);
                let op = Reversal { i: r1, j: r2 - 1, x, y: s - x };
                let child = apply_reversal(genome, &op).expect("splits within range");
                ops.push(op.into());
                self.consider(ops, &child_shape, child.regions());
                if remaining > 0 {
                    self.reversal_tree(&child, &child_shape, ops, depth, first);
                }
                ops.pop();
            }
        }
    }
}

fn pairs_of(slots: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (a, &r1) in slots.iter().enumerate() {
        for &r2 in &slots[a + 1..] {
            if r1 < r2 {
                out.push((r1, r2));
            }
        }
    }
    out
}

fn triples_of(slots: &[usize]) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for (a, &i) in slots.iter().enumerate() {
        for (b, &j) in slots.iter().enumerate().skip(a + 1) {
            for &k in &slots[b + 1..] {
                if i < j && j < k {
                    out.push((i, j, k));
                }
            }
        }
    }
    out
}

/// Calls `f` once per distinct region outcome of `τ(i, j, k)` over all splits.
fn for_each_transposition(genome: &Genome, (i, j, k): (usize, usize, usize), mut f: impl FnMut(Transposition, &Genome)) {
    let (a, b, c) = (genome.region(i), genome.region(j), genome.region(k));
    let mut seen = HashSet::new();
    for x in 0..=a {
        for y in 0..=b {
            for z in 0..=c {
                if !seen.insert((x + b - y, z + a - x)) {
                    continue;
                }
                let op = Transposition { i, j, k, x, y, z };
                let child = apply_transposition(genome, &op).expect("splits within range");
                f(op, &child);
            }
        }
    }
}

fn all_slots(genome: &Genome) -> Vec<usize> {
    (1..=genome.len() + 1).collect()
}

fn cycle_slots(state: &SortState, k: usize) -> Vec<usize> {
    let g = state.graph();
    let mut slots: Vec<usize> = g.cycles()[k]
        .origin
        .iter()
        .flat_map(|&o| g.origin_edge(o).regions())
        .collect();
    slots.sort_unstable();
    slots
}

/// Replays a candidate, materializing its fixes one cycle at a time.
fn instantiate(state: &SortState, step: StepId, cand: &Candidate) -> Result<StepPlan, StepError> {
    let mut st = state.clone();
    let mut ops = cand.ops.clone();
    st.apply_all(step, &cand.ops)?;
    for &x in &cand.fixes {
        let k = st.graph().cycle_of_target(x).expect("target edges persist");
        let fix = if st.graph().cycles()[k].trivial {
            trivial_fix(&st, x, step)?
        } else {
            vec![unbalanced_clean_op(&st, k)]
        };
        st.apply_all(step, &fix)?;
        ops.extend(fix);
    }
    verified(state, step, ops, cand.delta)
}

fn search_failed(state: &SortState, step: StepId, k: usize) -> StepError {
    let (genome, target) = state.describe();
    StepError::SearchFailed {
        step,
        leftmost: state.graph().cycles()[k].leftmost,
        genome,
        target,
    }
}

enum MoveKind {
    Reversal,
    Transposition,
}

/// One rearrangement on cycle `k` plus up to `budget` indels; falls back to
/// cuts anywhere in the genome when the cycle's own regions yield nothing.
fn single_move(
    state: &SortState,
    k: usize,
    weights: &WeightScheme,
    step: StepId,
    kind: MoveKind,
    budget: usize,
) -> Result<Candidate, StepError> {
    let mut search = Search::new(state, weights, step.claim(), budget);
    for slots in [cycle_slots(state, k), all_slots(state.source())] {
        match kind {
            MoveKind::Reversal => search.reversals(state.source(), &pairs_of(&slots)),
            MoveKind::Transposition => search.transpositions(state.source(), &triples_of(&slots)),
        }
        if let Some(best) = search.best.take() {
            return Ok(best);
        }
    }
    Err(search_failed(state, step, k))
}

/// Step III: a good oriented cycle is split into three good cycles, either by
/// one transposition with up to two indels or by three transpositions.
pub fn step_good_oriented(state: &SortState, k: usize, weights: &WeightScheme) -> Result<StepPlan, StepError> {
    let c = &state.graph().cycles()[k];
    if !(c.is_good() && c.is_oriented()) {
        return Err(StepError::Precondition { step: StepId::III, reason: "cycle must be good and oriented" });
    }
    let single = single_move(state, k, weights, StepId::III, MoveKind::Transposition, 2).ok();
    let three = weights.w_trans() * 3;
    if single.as_ref().is_none_or(|s| three <= s.weight) {
        if let Some(ops) = three_transpositions(state, k) {
            return verified(state, StepId::III, ops, (2, 2));
        }
    }
    match single {
        Some(cand) => instantiate(state, StepId::III, &cand),
        None => Err(search_failed(state, StepId::III, k)),
    }
}

/// Step IV: a bad oriented cycle loses a trivial piece via one transposition
/// and at most one indel.
pub fn step_bad_oriented(state: &SortState, k: usize, weights: &WeightScheme) -> Result<StepPlan, StepError> {
    let c = &state.graph().cycles()[k];
    if !(c.is_bad() && c.is_oriented()) {
        return Err(StepError::Precondition { step: StepId::IV, reason: "cycle must be bad and oriented" });
    }
    let cand = single_move(state, k, weights, StepId::IV, MoveKind::Transposition, 1)?;
    instantiate(state, StepId::IV, &cand)
}

/// Step V: one reversal and at most one indel on a labeled divergent cycle.
pub fn step_labeled_divergent(state: &SortState, k: usize, weights: &WeightScheme) -> Result<StepPlan, StepError> {
    let c = &state.graph().cycles()[k];
    if !(c.labeled && c.is_divergent()) {
        return Err(StepError::Precondition { step: StepId::V, reason: "cycle must be labeled and divergent" });
    }
    let cand = single_move(state, k, weights, StepId::V, MoveKind::Reversal, 1)?;
    instantiate(state, StepId::V, &cand)
}

/// Step VI: one reversal splits a good divergent cycle into two good cycles.
pub fn step_good_divergent(state: &SortState, k: usize, weights: &WeightScheme) -> Result<StepPlan, StepError> {
    let c = &state.graph().cycles()[k];
    if !(c.is_good() && c.is_divergent()) {
        return Err(StepError::Precondition { step: StepId::VI, reason: "cycle must be good and divergent" });
    }
    let cand = single_move(state, k, weights, StepId::VI, MoveKind::Reversal, 0)?;
    instantiate(state, StepId::VI, &cand)
}

/// Step VII: with every cycle convergent, up to three reversals and two indels.
pub fn step_no_divergent(state: &SortState, weights: &WeightScheme) -> Result<StepPlan, StepError> {
    let g = state.graph();
    if g.cycles().iter().any(|c| c.is_divergent()) {
        return Err(StepError::Precondition { step: StepId::VII, reason: "a divergent cycle exists" });
    }
    let Some(k) = g.cycles().iter().position(|c| !c.is_settled()) else {
        return Err(StepError::Precondition { step: StepId::VII, reason: "the graph is already sorted" });
    };
    let mut search = Search::new(state, weights, StepId::VII.claim(), 2);
    let root = Shape::of(g, state.target());
    let open: Vec<usize> = (0..g.cycles().len()).filter(|&c| !g.cycles()[c].trivial).collect();
    let within: Vec<(usize, usize)> = open.iter().flat_map(|&c| pairs_of(&cycle_slots(state, c))).collect();
    let mut across: Vec<usize> = open.iter().flat_map(|&c| cycle_slots(state, c)).collect();
    across.sort_unstable();
    for first in [within, pairs_of(&across), pairs_of(&all_slots(state.source()))] {
        search.reversal_tree(state.source(), &root, &mut Vec::new(), 3, &first);
        if let Some(best) = search.best.take() {
            return instantiate(state, StepId::VII, &best);
        }
    }
    Err(search_failed(state, StepId::VII, k))
}

/// Three transpositions: one splitting cycle `k` into three clean pieces, then
/// a pair that restores the gene order while moving nucleotides between them.
fn three_transpositions(state: &SortState, k: usize) -> Option<Vec<RearrangementOp>> {
    let g = state.graph();
    let keys: HashSet<u32> = g.cycles()[k].target.iter().map(|&t| g.target_edges()[t].x).collect();
    let genome = state.source();
    let before = g.cycles().len();
    let weights = WeightScheme::from_ints(1, 1, 1, 1, 1);
    let mut search = Search::new(state, &weights, (2, 2), 0);
    for slots in [cycle_slots(state, k), all_slots(genome)] {
        for triple in triples_of(&slots) {
            let mut found = None;
            let mut shape = None;
            for_each_transposition(genome, triple, |op, child| {
                if found.is_some() {
                    return;
                }
                let shape: Rc<Shape> = shape.get_or_insert_with(|| search.shape(child.genes())).clone();
                if shape.c != before + 2 {
                    return;
                }
                if let Some((t2, t3)) = rebalance(&shape, &keys, child) {
                    found = Some(vec![op.into(), t2.into(), t3.into()]);
                }
            });
            if found.is_some() {
                return found;
            }
        }
    }
    None
}

/// A transposition pair restoring the gene order of `genome` that leaves every
/// piece (cycle keyed in `keys`) balanced.
fn rebalance(shape: &Shape, keys: &HashSet<u32>, genome: &Genome) -> Option<(Transposition, Transposition)> {
    let regions = genome.regions();
    let mut picks: Vec<(usize, u64)> = Vec::new();
    let mut moved = false;
    for c in shape.cycles.iter().filter(|c| keys.contains(&c.key)) {
        if c.labeled {
            return None;
        }
        let o: u64 = c.regions.iter().map(|&r| regions[r - 1]).sum();
        let surplus = o as i64 - c.target_weight as i64;
        moved |= surplus != 0;
        let &r = c.regions.iter().max_by_key(|&&r| (regions[r - 1], std::cmp::Reverse(r)))?;
        let value = regions[r - 1] as i64 - surplus;
        if value < 0 {
            return None;
        }
        picks.push((r, value as u64));
    }
    if picks.len() != 3 || !moved {
        return None;
    }
    picks.sort_unstable();
    let [(r1, u1), (r2, _), (r3, u3)] = [picks[0], picks[1], picks[2]];
    redistribute(genome, (r1, r2, r3), (u1, u3))
}

/// Transpositions `τ(r1, r2, r3)` then `τ(r1, r1 + r3 - r2, r3)`, which restore
/// the gene order, leaving `u1` and `u3` nucleotides in regions `r1` and `r3`.
fn redistribute(
    genome: &Genome,
    (r1, r2, r3): (usize, usize, usize),
    (u1, u3): (u64, u64),
) -> Option<(Transposition, Transposition)> {
    let (a, b, c) = (genome.region(r1), genome.region(r2), genome.region(r3));
    if u1 + u3 > a + b + c {
        return None;
    }
    let (u1, u3) = (u1 as i64, u3 as i64);
    for x in 0..=a {
        for y in 0..=b {
            for z in 0..=c {
                let a2 = (x + b - y) as i64;
                let b2 = (z + a - x) as i64;
                let c2 = (y + c - z) as i64;
                for y2 in 0..=b2 {
                    let x2 = u1 + y2 - b2;
                    let z2 = y2 + c2 - u3;
                    if (0..=a2).contains(&x2) && (0..=c2).contains(&z2) {
                        let t2 = Transposition { i: r1, j: r2, k: r3, x, y, z };
                        let t3 = Transposition {
                            i: r1,
                            j: r1 + r3 - r2,
                            k: r3,
                            x: x2 as u64,
                            y: y2 as u64,
                            z: z2 as u64,
                        };
                        return Some((t2, t3));
                    }
                }
            }
        }
    }
    None
}

/// Replaces the ledger by real nucleotide deletions, left to right.
pub fn materialize_virtual_insertions(
    final_source: &Genome,
    target: &Genome,
    ledger: &VirtualInsertionLedger,
) -> Result<OperationSequence, StepError> {
    let mut out = Vec::with_capacity(ledger.len());
    for (x, amount) in ledger.iter() {
        let region = x as usize + 1;
        let ok = region <= final_source.len() + 1
            && region <= target.len() + 1
            && final_source.region(region) == target.region(region) + amount;
        if !ok {
            return Err(StepError::Ledger { x, amount, region });
        }
        out.push(Deletion { i: region, j: region, x: 0, y: amount }.into());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::{apply_transposition, Genome};
    use crate::graph::Direction;

    fn figure_two() -> SortState {
        let source = Genome::new(
            vec![Gene::Alpha, Gene::forward(1), Gene::reverse(3), Gene::reverse(2)],
            vec![1, 2, 2, 4, 2],
        )
        .unwrap();
        SortState::from_genomes(source, Genome::identity(vec![2, 1, 2, 3])).unwrap()
    }

    fn figure_one() -> SortState {
        let genes = [1, -8, 4, 2, -7, -9, 5].iter().map(|&v: &i32| Gene::Id(v));
        let source = Genome::new(
            std::iter::once(Gene::Alpha).chain(genes).collect(),
            vec![1, 2, 2, 0, 1, 2, 2, 3, 2],
        )
        .unwrap();
        SortState::from_genomes(source, Genome::identity(vec![3, 0, 1, 1, 3, 0, 2, 1, 3, 1])).unwrap()
    }

    fn after(state: &SortState, ops: &[RearrangementOp]) -> SortState {
        let mut st = state.clone();
        for op in ops {
            st.apply(op).unwrap();
        }
        st
    }

    #[test]
    fn figure_one_alpha_cycle_needs_one_deletion() {
        let st = figure_one();
        assert_eq!(st.next_step(), Some((StepId::I, 0)));
        let plan = step_trivial_bad(&st, 0).unwrap();
        assert_eq!(plan.ops, vec![RearrangementOp::from(Deletion { i: 1, j: 2, x: 1, y: 0 })]);
        assert_eq!(plan.claimed, (0, 1));
        let next = after(&st, &plan.ops);
        assert_eq!(next.source().alpha_count(), 0);
        assert_eq!(next.source().region(1), 3);
    }

    #[test]
    fn figure_two_blue_and_cyan() {
        let st = figure_two();
        let plan = step_trivial_bad(&st, 0).unwrap();
        assert_eq!(plan.ops, vec![RearrangementOp::from(Deletion { i: 1, j: 2, x: 1, y: 1 })]);

        // The clean negative trivial cycle over t_2 takes a virtual insertion.
        let cyan = st.graph().cycle_of_target(2).unwrap();
        let plan = step_unbalanced_clean(&st, cyan).unwrap();
        assert_eq!(plan.ops, vec![RearrangementOp::VirtualInsertion { gene: 2, amount: 2 }]);
        let next = after(&st, &plan.ops);
        assert_eq!(next.ledger().get(2), 2);
        assert_eq!(next.target().region(3), 4);
    }

    #[test]
    fn figure_two_red_single_reversal() {
        let st = figure_two();
        let red = st.graph().cycle_of_target(1).unwrap();
        assert_eq!(st.graph().cycles()[red].direction, Direction::Divergent);
        let w = WeightScheme::from_ints(2, 3, 2, 4, 1);
        let plan = step_good_divergent(&st, red, &w).unwrap();
        assert_eq!(plan.ops, vec![RearrangementOp::from(Reversal { i: 3, j: 4, x: 1, y: 0 })]);
        let m0 = st.measures();
        let m1 = after(&st, &plan.ops).measures();
        assert_eq!(delta_measures(&m0, &m1), (1, 1));
    }

    #[test]
    fn preconditions_are_enforced() {
        let st = figure_two();
        let w = WeightScheme::from_ints(1, 1, 1, 1, 1);
        let red = st.graph().cycle_of_target(1).unwrap();
        assert!(matches!(step_trivial_bad(&st, red), Err(StepError::Precondition { .. })));
        assert!(matches!(step_good_oriented(&st, red, &w), Err(StepError::Precondition { .. })));
        assert!(matches!(step_no_divergent(&st, &w), Err(StepError::Precondition { .. })));
        assert!(matches!(step_labeled_divergent(&st, red, &w), Err(StepError::Precondition { .. })));
    }

    #[test]
    fn good_oriented_choice_follows_weights() {
        let st = figure_one();
        let st = after(&st, &step_trivial_bad(&st, 0).unwrap().ops);
        let (step, k) = st.next_step().unwrap();
        assert_eq!(step, StepId::III);
        // A lone transposition already splits this cycle into three good ones.
        for w in [WeightScheme::from_ints(5, 1, 5, 1, 1), WeightScheme::from_ints(5, 5, 1, 1, 1)] {
            let plan = step_good_oriented(&st, k, &w).unwrap();
            assert_eq!(plan.ops.len(), 1);
            assert_eq!(plan.ops[0].kind(), crate::genome::OpKind::Transposition);
            let m1 = after(&st, &plan.ops).measures();
            assert_eq!(delta_measures(&st.measures(), &m1), (2, 2));
        }
    }

    #[test]
    fn good_oriented_unbalanced_split_uses_cheapest_variant() {
        // Every single transposition of this good oriented cycle leaves
        // unbalanced pieces.
        let st = SortState::from_genomes(
            Genome::new(vec![Gene::forward(1), Gene::forward(3), Gene::forward(2)], vec![0, 4, 0, 0]).unwrap(),
            Genome::identity(vec![0, 1, 2, 1]),
        )
        .unwrap();
        let (step, k) = st.next_step().unwrap();
        assert_eq!(step, StepId::III);
        let kinds = |p: &StepPlan| p.ops.iter().filter(|o| o.kind() == crate::genome::OpKind::Transposition).count();
        let cheap_t = WeightScheme::from_ints(9, 1, 9, 1, 1);
        let plan = step_good_oriented(&st, k, &cheap_t).unwrap();
        assert_eq!((plan.ops.len(), kinds(&plan)), (3, 3));
        let cheap_d = WeightScheme::from_ints(9, 9, 1, 1, 1);
        let plan_d = step_good_oriented(&st, k, &cheap_d).unwrap();
        assert_eq!((plan_d.ops.len(), kinds(&plan_d)), (3, 1));
        for plan in [plan, plan_d] {
            let m1 = after(&st, &plan.ops).measures();
            assert_eq!(delta_measures(&st.measures(), &m1), (2, 2));
        }
    }

    #[test]
    fn materialized_deletions_remove_the_surplus() {
        let mut ledger = VirtualInsertionLedger::new();
        ledger.add(1, 2);
        ledger.add(3, 1);
        ledger.add(2, 0);
        assert_eq!(ledger.len(), 2);
        let target = Genome::identity(vec![0, 1, 1, 2]);
        let source = Genome::identity(vec![0, 3, 1, 3]);
        let ops = materialize_virtual_insertions(&source, &target, &ledger).unwrap();
        assert_eq!(
            ops,
            vec![
                RearrangementOp::from(Deletion { i: 2, j: 2, x: 0, y: 2 }),
                Deletion { i: 4, j: 4, x: 0, y: 1 }.into(),
            ]
        );
        assert_eq!(crate::genome::apply_sequence(&source, &ops).unwrap(), target);
        let off = Genome::identity(vec![0, 2, 1, 3]);
        assert!(matches!(
            materialize_virtual_insertions(&off, &target, &ledger),
            Err(StepError::Ledger { x: 1, .. })
        ));
    }

    /// Exhaustive reachability of `(u1, u3)` by two transpositions restoring order.
    fn reachable(genome: &Genome, (r1, r2, r3): (usize, usize, usize)) -> HashSet<(u64, u64)> {
        let mut out = HashSet::new();
        let (a, b, c) = (genome.region(r1), genome.region(r2), genome.region(r3));
        for x in 0..=a {
            for y in 0..=b {
                for z in 0..=c {
                    let t = Transposition { i: r1, j: r2, k: r3, x, y, z };
                    let mid = apply_transposition(genome, &t).unwrap();
                    let j2 = r1 + r3 - r2;
                    for x2 in 0..=mid.region(r1) {
                        for y2 in 0..=mid.region(j2) {
                            for z2 in 0..=mid.region(r3) {
                                let t2 = Transposition { i: r1, j: j2, k: r3, x: x2, y: y2, z: z2 };
                                let end = apply_transposition(&mid, &t2).unwrap();
                                assert_eq!(end.genes(), genome.genes());
                                out.insert((end.region(r1), end.region(r3)));
                            }
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn redistribute_matches_exhaustive_search() {
        let genome = Genome::identity(vec![2, 1, 0, 3, 1]);
        for triple in [(1, 2, 4), (2, 3, 5), (1, 3, 5)] {
            let truth = reachable(&genome, triple);
            for u1 in 0..=7 {
                for u3 in 0..=7 {
                    let got = redistribute(&genome, triple, (u1, u3));
                    assert_eq!(got.is_some(), truth.contains(&(u1, u3)), "{triple:?} {u1} {u3}");
                    if let Some((t2, t3)) = got {
                        let end = apply_transposition(&apply_transposition(&genome, &t2).unwrap(), &t3).unwrap();
                        assert_eq!((end.region(triple.0), end.region(triple.2)), (u1, u3));
                        assert_eq!(end.genes(), genome.genes());
                    }
                }
            }
        }
    }
}

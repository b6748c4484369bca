//! Weight calculus and the prioritized sorting loop.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use num_traits::Zero;
use thiserror::Error;

use crate::genome::{apply_sequence, Genome, NormalizedPair, OperationSequence, RearrangementOp};
use crate::graph::{build_graph, delta_measures, GraphMeasures};
use crate::steps::{materialize_virtual_insertions, plan_next, SortState, StepError, StepId};

pub type Rational = Ratio<i64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WeightError {
    #[error("operation weights must be positive")]
    NonPositiveWeight,
    #[error("p1 must be positive and p2 non-negative")]
    Coefficients,
}

/// Operation weights `W(ρ), W(τ), W(δ)` and the potential coefficients `p1, p2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WeightScheme {
    w_rev: Rational,
    w_trans: Rational,
    w_indel: Rational,
    p1: Rational,
    p2: Rational,
}

impl WeightScheme {
    /// Validated constructor. `p1 = 0` is rejected: indel steps would then make
    /// no weighted progress and no finite factor exists.
    pub fn new(
        w_rev: Rational,
        w_trans: Rational,
        w_indel: Rational,
        p1: Rational,
        p2: Rational,
    ) -> Result<WeightScheme, WeightError> {
        let zero = Rational::zero();
        if w_rev <= zero || w_trans <= zero || w_indel <= zero {
            return Err(WeightError::NonPositiveWeight);
        }
        if p1 <= zero || p2 < zero {
            return Err(WeightError::Coefficients);
        }
        Ok(WeightScheme { w_rev, w_trans, w_indel, p1, p2 })
    }

    /// Integer shorthand; panics on invalid input, intended for literals.
    pub fn from_ints(w_rev: i64, w_trans: i64, w_indel: i64, p1: i64, p2: i64) -> WeightScheme {
        WeightScheme::new(
            w_rev.into(),
            w_trans.into(),
            w_indel.into(),
            p1.into(),
            p2.into(),
        )
        .expect("valid weight scheme")
    }

    /// The four schemes with published factors, in order 10/3, 8/3, 5/2, 2.
    pub fn published_schemes() -> [WeightScheme; 4] {
        [
            WeightScheme::from_ints(2, 3, 2, 4, 1),
            WeightScheme::from_ints(2, 3, 1, 1, 1),
            WeightScheme::from_ints(1, 2, 1, 4, 1),
            WeightScheme::from_ints(2, 4, 1, 1, 1),
        ]
    }

    pub fn w_rev(&self) -> Rational {
        self.w_rev
    }

    pub fn w_trans(&self) -> Rational {
        self.w_trans
    }

    pub fn w_indel(&self) -> Rational {
        self.w_indel
    }

    pub fn p1(&self) -> Rational {
        self.p1
    }

    pub fn p2(&self) -> Rational {
        self.p2
    }

    /// Weight of one operation. Virtual insertions are charged as the deletion
    /// they later become.
    pub fn weight_of(&self, op: &RearrangementOp) -> Rational {
        match op {
            RearrangementOp::Reversal(_) => self.w_rev,
            RearrangementOp::Transposition(_) => self.w_trans,
            _ => self.w_indel,
        }
    }

    pub fn weight_of_all(&self, ops: &[RearrangementOp]) -> Rational {
        ops.iter().map(|op| self.weight_of(op)).sum()
    }

    /// `p1·b_g + p2·b`.
    pub fn potential(&self, m: &GraphMeasures) -> Rational {
        self.p1 * m.b_g + self.p2 * m.b
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}:{}:{}",
            self.w_rev, self.w_trans, self.w_indel, self.p1, self.p2
        )
    }
}

/// `(p1·Δc_g + p2·Δc) / W`.
pub fn delta_ccg(weights: &WeightScheme, dc: i64, dcg: i64, seq_weight: Rational) -> Option<Rational> {
    if seq_weight.is_zero() {
        return None;
    }
    Some((weights.p1 * dcg + weights.p2 * dc) / seq_weight)
}

/// Largest `Δcc_g` a single operation can reach.
pub fn delta_max(w: &WeightScheme) -> Rational {
    let rev = (w.p1 + w.p2) / w.w_rev;
    let trans = (w.p1 + w.p2) * 2 / w.w_trans;
    let indel = w.p1 / w.w_indel;
    rev.max(trans).max(indel)
}

/// Guaranteed `Δcc_g` of every step.
pub fn step_delta_values(w: &WeightScheme) -> BTreeMap<StepId, Rational> {
    let (p1, p2) = (w.p1, w.p2);
    let (wr, wt, wd) = (w.w_rev, w.w_trans, w.w_indel);
    let mut out = BTreeMap::new();
    out.insert(StepId::I, p1 / (wd * 2));
    out.insert(StepId::II, p1 / wd);
    out.insert(StepId::III, (p1 + p2) * 2 / (wt * 3).min(wt + wd * 2));
    out.insert(StepId::IV, (p1 + p2 * 2) / (wt + wd));
    out.insert(StepId::V, (p1 + p2) / (wr + wd));
    out.insert(StepId::VI, (p1 + p2) / wr);
    out.insert(StepId::VII, (p1 + p2) * 2 / (wr * 3 + wd * 2));
    out
}

/// `Δ_max` over the smallest step value.
pub fn approximation_factor(w: &WeightScheme) -> Rational {
    let min = step_delta_values(w)
        .into_values()
        .min()
        .expect("seven steps");
    delta_max(w) / min
}

/// `(p1·b_g + p2·b) / Δ_max`; no transforming sequence weighs less.
pub fn lower_bound(pair: &NormalizedPair, w: &WeightScheme) -> Rational {
    let m = build_graph(pair).measures();
    w.potential(&m) / delta_max(w)
}

/// One loop iteration of [`run`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Iteration {
    pub step: StepId,
    /// Operations as emitted, virtual insertions included.
    pub ops: OperationSequence,
    pub claimed: (i64, i64),
    pub measured: (i64, i64),
    pub weight: Rational,
    pub before: GraphMeasures,
    pub after: GraphMeasures,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunReport {
    /// Final sequence with virtual insertions replaced by trailing deletions.
    pub sequence: OperationSequence,
    pub total_weight: Rational,
    pub iterations: Vec<Iteration>,
    pub lower_bound: Rational,
    pub factor: Rational,
    pub final_genome: Genome,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RunError {
    #[error(transparent)]
    Step(#[from] StepError),
    #[error("step {step} measured (Δc, Δc_g) = {measured:?} below its claim {claimed:?}")]
    Claim {
        step: StepId,
        claimed: (i64, i64),
        measured: (i64, i64),
    },
    #[error("step {step} did not decrease the potential ({before} -> {after})")]
    Progress {
        step: StepId,
        before: Rational,
        after: Rational,
    },
    #[error("replaying the output does not reach the target: {0}")]
    Replay(String),
}

/// Sorts `pair.source` into `pair.target`.
pub fn run(pair: &NormalizedPair, weights: &WeightScheme) -> Result<RunReport, RunError> {
    let mut state = SortState::new(pair);
    let mut iterations = Vec::new();
    let mut sequence: OperationSequence = Vec::new();

    while let Some(plan) = plan_next(&state, weights)? {
        let before = state.graph().measures();
        for op in &plan.ops {
            state
                .apply(op)
                .map_err(|source| StepError::InvalidOp { step: plan.step, source })?;
        }
        let after = state.graph().measures();
        let measured = delta_measures(&before, &after);
        if measured.0 < plan.claimed.0 || measured.1 < plan.claimed.1 {
            return Err(RunError::Claim { step: plan.step, claimed: plan.claimed, measured });
        }
        // b + b_g falls by at least one every step; the weighted potential never rises.
        let (p_before, p_after) = (weights.potential(&before), weights.potential(&after));
        if p_after >= p_before || after.b + after.b_g >= before.b + before.b_g {
            return Err(RunError::Progress { step: plan.step, before: p_before, after: p_after });
        }
        sequence.extend(plan.ops.iter().filter(|op| !op.is_virtual()).cloned());
        iterations.push(Iteration {
            step: plan.step,
            weight: weights.weight_of_all(&plan.ops),
            ops: plan.ops,
            claimed: plan.claimed,
            measured,
            before,
            after,
        });
    }

    sequence.extend(materialize_virtual_insertions(state.source(), &pair.target, state.ledger())?);
    let final_genome = apply_sequence(&pair.source, &sequence).map_err(|e| RunError::Replay(e.to_string()))?;
    if final_genome != pair.target {
        return Err(RunError::Replay(format!("reached {final_genome}, expected {}", pair.target)));
    }
    Ok(RunReport {
        total_weight: weights.weight_of_all(&sequence),
        sequence,
        iterations,
        lower_bound: lower_bound(pair, weights),
        factor: approximation_factor(weights),
        final_genome,
    })
}

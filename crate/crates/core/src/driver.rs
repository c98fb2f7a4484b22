//! Transition selection and the symbolic transformation loop.

use crate::constraint::{is_fixpoint, ConstraintSet, LinearConstraint};
use crate::error::{Error, Result};
use crate::expression::{
    has_sign_conflict, transform_disjunction_step, LogicExpression, StepResult,
};
use crate::net::{PetriNet, TransitionId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DriverOptions {
    /// How many greedy follow-up steps the Rule-2 probe simulates.
    pub lookahead: usize,
    pub max_steps: usize,
}

impl Default for DriverOptions {
    fn default() -> Self {
        DriverOptions {
            lookahead: 1,
            max_steps: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceStatus {
    /// No candidate left and no complementary blocks anywhere.
    Complete,
    /// No candidate left; the last step emitted complementary blocks.
    CompleteWithBlocks,
    StepLimit,
    /// Positive-gain uncontrollable source transition.
    Unsatisfiable(TransitionId),
    /// Complementary blocks were emitted while the plain part still has
    /// candidates; the blocks cannot be transformed further.
    OpenWithBlocks(Vec<TransitionId>),
    /// A replayed sequence ended before a fixpoint.
    Incomplete(Vec<TransitionId>),
}

impl TraceStatus {
    pub fn is_complete(&self) -> bool {
        matches!(
            self,
            TraceStatus::Complete | TraceStatus::CompleteWithBlocks
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub transition: TransitionId,
    pub result: StepResult,
    pub expression: LogicExpression,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformationTrace {
    pub initial: LinearConstraint,
    pub steps: Vec<TraceStep>,
    pub status: TraceStatus,
}

impl TransformationTrace {
    pub fn sigma(&self) -> Vec<TransitionId> {
        self.steps.iter().map(|s| s.transition).collect()
    }

    /// Empty after an unsatisfiable step: every marking escapes.
    pub fn final_expression(&self) -> LogicExpression {
        if let TraceStatus::Unsatisfiable(_) = self.status {
            return LogicExpression::falsum(self.initial.dim());
        }
        match self.steps.last() {
            Some(s) => s.expression.clone(),
            None => LogicExpression::from_constraints(
                self.initial.dim(),
                &ConstraintSet::single(self.initial.clone()),
            ),
        }
    }

    /// Plain constraints of the final expression.
    pub fn final_constraints(&self) -> ConstraintSet {
        if let TraceStatus::Unsatisfiable(_) = self.status {
            return ConstraintSet::new();
        }
        match self.steps.last() {
            Some(s) => s.result.plain.clone(),
            None => ConstraintSet::single(self.initial.clone()),
        }
    }
}

/// Uncontrollable transitions for which some constraint of `w` is not
/// known to be a fixpoint, in declaration order.
pub fn candidate_transitions(w: &ConstraintSet, net: &PetriNet) -> Result<Vec<TransitionId>> {
    let mut out = Vec::new();
    for t in net.uncontrollable() {
        for c in w {
            if !is_fixpoint(c, t, net)? {
                out.push(t);
                break;
            }
        }
    }
    Ok(out)
}

/// Orders `candidates` by Rule 2 (no complementary pair along a greedy
/// path of `lookahead` further steps), then Rule 1 (fewest input places),
/// then declaration order.
pub fn rank_transitions(
    candidates: &[TransitionId],
    w: &ConstraintSet,
    net: &PetriNet,
    lookahead: usize,
) -> Result<Vec<TransitionId>> {
    let mut keyed = candidates
        .iter()
        .map(|&t| {
            Ok((
                (!pair_free(t, w, net, lookahead)?, net.preset(t)?.len(), t.0),
                t,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    keyed.sort_by_key(|(key, _)| *key);
    Ok(keyed.into_iter().map(|(_, t)| t).collect())
}

fn pair_free(t: TransitionId, w: &ConstraintSet, net: &PetriNet, depth: usize) -> Result<bool> {
    if has_sign_conflict(w, t, net)? {
        return Ok(false);
    }
    if depth == 0 {
        return Ok(true);
    }
    let next = match transform_disjunction_step(w, t, net) {
        Ok(step) => step.plain,
        Err(Error::UnsatisfiableTransformation(_)) => return Ok(false),
        Err(e) => return Err(e),
    };
    let candidates = candidate_transitions(&next, net)?;
    match rank_transitions(&candidates, &next, net, depth - 1)?.first() {
        None => Ok(true),
        Some(&best) => pair_free(best, &next, net, depth - 1),
    }
}

/// Transforms the legal constraint `c` step by step until no candidate
/// transition is left.
pub fn transform_to_admissible(
    net: &PetriNet,
    c: &LinearConstraint,
    options: DriverOptions,
) -> Result<TransformationTrace> {
    c.check_dim(net)?;
    let mut trace = TransformationTrace {
        initial: c.clone(),
        steps: Vec::new(),
        status: TraceStatus::Complete,
    };
    let mut w = ConstraintSet::single(c.clone());
    loop {
        let candidates = candidate_transitions(&w, net)?;
        if candidates.is_empty() {
            trace.status = closing_status(&trace);
            return Ok(trace);
        }
        if trace.steps.len() >= options.max_steps {
            trace.status = TraceStatus::StepLimit;
            return Ok(trace);
        }
        let t = rank_transitions(&candidates, &w, net, options.lookahead)?[0];
        match apply(net, &mut trace, &w, t)? {
            Some(next) => w = next,
            None => return Ok(trace),
        }
    }
}

/// Applies `sigma` in order, ignoring the selection rules.
pub fn replay_sequence(
    net: &PetriNet,
    c: &LinearConstraint,
    sigma: &[TransitionId],
) -> Result<TransformationTrace> {
    c.check_dim(net)?;
    for &t in sigma {
        let tr = net.transition(t)?;
        if !tr.is_uncontrollable() {
            return Err(Error::ControllableTransition(tr.name.clone()));
        }
    }
    let mut trace = TransformationTrace {
        initial: c.clone(),
        steps: Vec::new(),
        status: TraceStatus::Complete,
    };
    let mut w = ConstraintSet::single(c.clone());
    for &t in sigma {
        match apply(net, &mut trace, &w, t)? {
            Some(next) => w = next,
            None => return Ok(trace),
        }
    }
    let pending = candidate_transitions(&w, net)?;
    trace.status = if pending.is_empty() {
        closing_status(&trace)
    } else {
        TraceStatus::Incomplete(pending)
    };
    Ok(trace)
}

fn closing_status(trace: &TransformationTrace) -> TraceStatus {
    match trace.steps.last() {
        Some(s) if s.result.has_blocks() => TraceStatus::CompleteWithBlocks,
        _ => TraceStatus::Complete,
    }
}

/// Performs one step and records it. Returns the next plain disjunction, or
/// `None` after setting a terminal status.
fn apply(
    net: &PetriNet,
    trace: &mut TransformationTrace,
    w: &ConstraintSet,
    t: TransitionId,
) -> Result<Option<ConstraintSet>> {
    let result = match transform_disjunction_step(w, t, net) {
        Ok(r) => r,
        Err(Error::UnsatisfiableTransformation(_)) => {
            trace.status = TraceStatus::Unsatisfiable(t);
            return Ok(None);
        }
        Err(e) => return Err(e),
    };
    let expression = result.to_expression(net.place_count());
    let next = result.plain.clone();
    let has_blocks = result.has_blocks();
    trace.steps.push(TraceStep {
        transition: t,
        result,
        expression,
    });
    if has_blocks {
        let pending = candidate_transitions(&next, net)?;
        trace.status = if pending.is_empty() {
            TraceStatus::CompleteWithBlocks
        } else {
            TraceStatus::OpenWithBlocks(pending)
        };
        return Ok(None);
    }
    Ok(Some(next))
}

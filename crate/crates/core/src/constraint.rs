//! Linear marking constraints `ω·m ≤ k` and their transformation through a
//! single uncontrollable transition.

use crate::error::{Error, Result};
use crate::net::{Marking, PetriNet, PlaceId, TransitionId};
use crate::orbit::{le_flip_index, MarkingPredicate};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearConstraint {
    weights: Vec<i64>,
    bound: i64,
}

impl LinearConstraint {
    pub fn new(weights: Vec<i64>, bound: i64) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| **w < 0) {
            return Err(Error::NegativeWeight(*w));
        }
        if bound < 0 {
            return Err(Error::NegativeBound(bound));
        }
        Ok(LinearConstraint { weights, bound })
    }

    /// Builds `Σ coeff·m(place) ≤ bound` against the place list of `net`.
    pub fn from_terms(net: &PetriNet, terms: &[(i64, &str)], bound: i64) -> Result<Self> {
        let mut weights = vec![0; net.place_count()];
        for (coeff, place) in terms {
            weights[net.place_id(place)?.0] += coeff;
        }
        LinearConstraint::new(weights, bound)
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn weight(&self, p: PlaceId) -> i64 {
        self.weights[p.0]
    }

    pub fn bound(&self) -> i64 {
        self.bound
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn value(&self, m: &Marking) -> i64 {
        dot(&self.weights, m)
    }

    pub fn holds(&self, m: &Marking) -> bool {
        self.value(m) <= self.bound
    }

    pub fn check_dim(&self, net: &PetriNet) -> Result<()> {
        if self.dim() != net.place_count() {
            return Err(Error::DimensionMismatch {
                expected: net.place_count(),
                found: self.dim(),
            });
        }
        Ok(())
    }
}

pub(crate) fn dot(weights: &[i64], m: &Marking) -> i64 {
    weights
        .iter()
        .zip(m.tokens())
        .map(|(w, v)| w * i64::from(*v))
        .sum()
}

pub(crate) fn dot_i64(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl MarkingPredicate for LinearConstraint {
    fn contains(&self, m: &Marking) -> bool {
        self.holds(m)
    }

    fn ray_horizon(&self, m: &Marking, dir: &[i64]) -> Option<u64> {
        Some(le_flip_index(
            self.value(m),
            dot_i64(&self.weights, dir),
            self.bound,
        ))
    }
}

/// `ϖ = ω·[N]`, one entry per transition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionWeights(pub Vec<i64>);

impl TransitionWeights {
    pub fn get(&self, t: TransitionId) -> i64 {
        self.0[t.0]
    }
}

pub fn transition_weights(c: &LinearConstraint, net: &PetriNet) -> Result<TransitionWeights> {
    c.check_dim(net)?;
    let row = net
        .transition_ids()
        .map(|t| dot_i64(c.weights(), net.delta(t).expect("valid id")))
        .collect();
    Ok(TransitionWeights(row))
}

/// `ϖ(t)` for a single transition.
pub fn transition_weight(c: &LinearConstraint, t: TransitionId, net: &PetriNet) -> Result<i64> {
    c.check_dim(net)?;
    Ok(dot_i64(c.weights(), net.delta(t)?))
}

/// Ordered disjunction of constraints with exact duplicates removed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConstraintSet(Vec<LinearConstraint>);

impl ConstraintSet {
    pub fn new() -> Self {
        ConstraintSet(Vec::new())
    }

    pub fn single(c: LinearConstraint) -> Self {
        ConstraintSet(vec![c])
    }

    /// Appends `c` unless an identical constraint is already present.
    pub fn push(&mut self, c: LinearConstraint) -> bool {
        if self.0.contains(&c) {
            false
        } else {
            self.0.push(c);
            true
        }
    }

    pub fn extend<I: IntoIterator<Item = LinearConstraint>>(&mut self, iter: I) {
        for c in iter {
            self.push(c);
        }
    }

    pub fn as_slice(&self) -> &[LinearConstraint] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LinearConstraint> {
        self.0.iter()
    }

    pub fn holds(&self, m: &Marking) -> bool {
        self.0.iter().any(|c| c.holds(m))
    }
}

impl FromIterator<LinearConstraint> for ConstraintSet {
    fn from_iter<I: IntoIterator<Item = LinearConstraint>>(iter: I) -> Self {
        let mut set = ConstraintSet::new();
        set.extend(iter);
        set
    }
}

impl<'a> IntoIterator for &'a ConstraintSet {
    type Item = &'a LinearConstraint;
    type IntoIter = std::slice::Iter<'a, LinearConstraint>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl MarkingPredicate for ConstraintSet {
    fn contains(&self, m: &Marking) -> bool {
        self.holds(m)
    }

    fn ray_horizon(&self, m: &Marking, dir: &[i64]) -> Option<u64> {
        self.0.iter().map(|c| c.ray_horizon(m, dir)).max().flatten()
    }
}

pub(crate) fn require_uncontrollable(net: &PetriNet, t: TransitionId) -> Result<()> {
    let tr = net.transition(t)?;
    if !tr.is_uncontrollable() {
        return Err(Error::ControllableTransition(tr.name.clone()));
    }
    Ok(())
}

/// Uncontrollable transition gain transformation of `c` at input place `p` of `t`.
///
/// The weight of `p` grows by `ϖ(t)`; for a self-loop input it becomes
/// `k + 1`, which forces `m(p) = 0` and so disables `t`.
pub fn utgt_rho(
    c: &LinearConstraint,
    t: TransitionId,
    p: PlaceId,
    net: &PetriNet,
) -> Result<LinearConstraint> {
    let tr = net.transition(t)?;
    if !tr.has_input(p) {
        return Err(Error::NotInPreset {
            place: net.place_name(p).to_string(),
            transition: tr.name.clone(),
        });
    }
    let gain = transition_weight(c, t, net)?;
    let mut weights = c.weights().to_vec();
    weights[p.0] = if tr.has_output(p) {
        c.bound() + 1
    } else {
        weights[p.0] + gain
    };
    LinearConstraint::new(weights, c.bound())
}

/// `(Q_(ω,k))_t` as a disjunction of linear constraints.
pub fn transform_single(
    c: &LinearConstraint,
    t: TransitionId,
    net: &PetriNet,
) -> Result<ConstraintSet> {
    require_uncontrollable(net, t)?;
    let gain = transition_weight(c, t, net)?;
    if gain <= 0 {
        return Ok(ConstraintSet::single(c.clone()));
    }
    let preset = net.preset(t)?;
    if preset.is_empty() {
        return Err(Error::UnsatisfiableTransformation(
            net.transition(t)?.name.clone(),
        ));
    }
    preset.iter().map(|p| utgt_rho(c, t, *p, net)).collect()
}

/// Some input place of `t` is forced empty throughout `Q_(ω,k)`.
pub fn is_transition_dead(c: &LinearConstraint, t: TransitionId, net: &PetriNet) -> Result<bool> {
    Ok(net.preset(t)?.iter().any(|p| c.weight(*p) > c.bound()))
}

/// Sufficient test for `Γ(Q_(ω,k), t) = ∅`.
pub fn is_fixpoint(c: &LinearConstraint, t: TransitionId, net: &PetriNet) -> Result<bool> {
    Ok(transition_weight(c, t, net)? <= 0 || is_transition_dead(c, t, net)?)
}

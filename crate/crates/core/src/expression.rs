//! Logic expressions over linear atoms and the one-step transformation of a
//! disjunction of constraints through an uncontrollable transition.
//!
//! A [`LogicExpression`] is a disjunction of [`ConjunctionBlock`]s. Plain
//! blocks hold a single `ω·m ≤ k` atom; delta blocks describe the markings
//! that leave constraint `i` after exactly `λ` firings of `t` and land inside
//! constraint `j` at that moment (complementary-marking sets).

use std::collections::HashMap;

use crate::constraint::{
    dot, dot_i64, require_uncontrollable, transform_single, transition_weight, ConstraintSet,
    LinearConstraint,
};
use crate::error::{Error, Result};
use crate::net::{Marking, PetriNet, TransitionId};
use crate::orbit::{le_flip_index, MarkingPredicate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Ge,
}

/// `weights·m ≤ bound` or `weights·m ≥ bound`. Strict comparisons are
/// encoded by shifting the bound by one.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub weights: Vec<i64>,
    pub rel: Relation,
    pub bound: i64,
}

impl Atom {
    pub fn le(weights: Vec<i64>, bound: i64) -> Self {
        Atom {
            weights,
            rel: Relation::Le,
            bound,
        }
    }

    pub fn ge(weights: Vec<i64>, bound: i64) -> Self {
        Atom {
            weights,
            rel: Relation::Ge,
            bound,
        }
    }

    /// `0·m ≥ 1`.
    pub fn falsum(dim: usize) -> Self {
        Atom::ge(vec![0; dim], 1)
    }

    pub fn holds(&self, m: &Marking) -> bool {
        let v = dot(&self.weights, m);
        match self.rel {
            Relation::Le => v <= self.bound,
            Relation::Ge => v >= self.bound,
        }
    }

    fn flip_index(&self, m: &Marking, dir: &[i64]) -> u64 {
        let start = dot(&self.weights, m);
        let slope = dot_i64(&self.weights, dir);
        match self.rel {
            Relation::Le => le_flip_index(start, slope, self.bound),
            Relation::Ge => le_flip_index(-start, -slope, -self.bound),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DeltaTag {
    /// Position of the escaping constraint in the pre-step disjunction.
    pub i: usize,
    /// Position of the receiving constraint.
    pub j: usize,
    pub transition: TransitionId,
    pub lambda: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockOrigin {
    Plain,
    Delta(DeltaTag),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConjunctionBlock {
    pub atoms: Vec<Atom>,
    pub origin: BlockOrigin,
    /// Set by [`reduce_block`] when the atoms contradict each other.
    pub infeasible: bool,
}

impl ConjunctionBlock {
    pub fn plain(c: &LinearConstraint) -> Self {
        ConjunctionBlock {
            atoms: vec![Atom::le(c.weights().to_vec(), c.bound())],
            origin: BlockOrigin::Plain,
            infeasible: false,
        }
    }

    pub fn holds(&self, m: &Marking) -> bool {
        self.atoms.iter().all(|a| a.holds(m))
    }

    pub fn is_plain(&self) -> bool {
        self.origin == BlockOrigin::Plain
    }

    /// The constraint of a plain block.
    pub fn as_constraint(&self) -> Option<LinearConstraint> {
        match (&self.origin, self.atoms.as_slice()) {
            (BlockOrigin::Plain, [a]) if a.rel == Relation::Le => {
                LinearConstraint::new(a.weights.clone(), a.bound).ok()
            }
            _ => None,
        }
    }

    fn ray_horizon(&self, m: &Marking, dir: &[i64]) -> u64 {
        self.atoms
            .iter()
            .map(|a| a.flip_index(m, dir))
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicExpression {
    dim: usize,
    blocks: Vec<ConjunctionBlock>,
}

impl LogicExpression {
    pub fn new(dim: usize, blocks: Vec<ConjunctionBlock>) -> Self {
        LogicExpression { dim, blocks }
    }

    /// The empty disjunction, denoting no marking at all.
    pub fn falsum(dim: usize) -> Self {
        LogicExpression::new(dim, Vec::new())
    }

    pub fn from_constraints(dim: usize, w: &ConstraintSet) -> Self {
        LogicExpression::new(dim, w.iter().map(ConjunctionBlock::plain).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[ConjunctionBlock] {
        &self.blocks
    }

    pub fn plain_constraints(&self) -> ConstraintSet {
        self.blocks
            .iter()
            .filter_map(|b| b.as_constraint())
            .collect()
    }

    pub fn delta_blocks(&self) -> impl Iterator<Item = &ConjunctionBlock> {
        self.blocks.iter().filter(|b| !b.is_plain())
    }

    pub fn has_delta_blocks(&self) -> bool {
        self.delta_blocks().next().is_some()
    }

    pub fn evaluate(&self, m: &Marking) -> Result<bool> {
        if m.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: m.len(),
            });
        }
        Ok(self.holds(m))
    }

    pub fn holds(&self, m: &Marking) -> bool {
        self.blocks.iter().any(|b| b.holds(m))
    }
}

impl MarkingPredicate for LogicExpression {
    fn contains(&self, m: &Marking) -> bool {
        self.holds(m)
    }

    fn ray_horizon(&self, m: &Marking, dir: &[i64]) -> Option<u64> {
        Some(
            self.blocks
                .iter()
                .map(|b| b.ray_horizon(m, dir))
                .max()
                .unwrap_or(0),
        )
    }
}

/// Delta blocks describing `C_{i→j}` for one ordered pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockGroup {
    pub i: usize,
    pub j: usize,
    pub blocks: Vec<ConjunctionBlock>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepResult {
    pub transition: TransitionId,
    /// Union of the single-constraint transformations, in input order.
    pub plain: ConstraintSet,
    pub groups: Vec<BlockGroup>,
}

impl StepResult {
    pub fn has_blocks(&self) -> bool {
        self.groups.iter().any(|g| !g.blocks.is_empty())
    }

    pub fn to_expression(&self, dim: usize) -> LogicExpression {
        let mut blocks: Vec<ConjunctionBlock> =
            self.plain.iter().map(ConjunctionBlock::plain).collect();
        blocks.extend(self.groups.iter().flat_map(|g| g.blocks.iter().cloned()));
        LogicExpression::new(dim, blocks)
    }
}

fn unit(dim: usize, p: usize) -> Vec<i64> {
    let mut w = vec![0; dim];
    w[p] = 1;
    w
}

/// Blocks `Δ_1 ∨ … ∨ Δ_n` describing the complementary-marking set from
/// constraint `ci` to constraint `cj` via `t`; empty unless `ϖ_i(t) > 0` and
/// `ϖ_j(t) < 0`.
///
/// `pair` is recorded in each block's tag. Within a block the atoms are
/// listed as: preset token requirements, the two bounds on `ω_i·m`, then the
/// two bounds on `ω_j·m`.
pub fn complementary_blocks(
    pair: (usize, usize),
    ci: &LinearConstraint,
    cj: &LinearConstraint,
    t: TransitionId,
    net: &PetriNet,
) -> Result<Vec<ConjunctionBlock>> {
    require_uncontrollable(net, t)?;
    let gain_i = transition_weight(ci, t, net)?;
    let gain_j = transition_weight(cj, t, net)?;
    if gain_i <= 0 || gain_j >= 0 {
        return Ok(Vec::new());
    }
    let dim = net.place_count();
    let (ki, kj) = (ci.bound(), cj.bound());
    let n = ki / gain_i + 1;
    let preset = net.preset(t)?;
    let blocks = (1..=n)
        .map(|lambda| {
            let mut atoms: Vec<Atom> = preset
                .iter()
                .map(|p| Atom::ge(unit(dim, p.0), lambda))
                .collect();
            // still inside constraint i after λ-1 firings
            atoms.push(Atom::le(ci.weights().to_vec(), ki - (lambda - 1) * gain_i));
            // outside constraint i after λ firings
            atoms.push(Atom::ge(ci.weights().to_vec(), ki - lambda * gain_i + 1));
            // outside constraint j now
            atoms.push(Atom::ge(cj.weights().to_vec(), kj + 1));
            // inside constraint j after λ firings
            atoms.push(Atom::le(cj.weights().to_vec(), kj - lambda * gain_j));
            ConjunctionBlock {
                atoms,
                origin: BlockOrigin::Delta(DeltaTag {
                    i: pair.0,
                    j: pair.1,
                    transition: t,
                    lambda: lambda as u64,
                }),
                infeasible: false,
            }
        })
        .collect();
    Ok(blocks)
}

/// `(Q_∨(W))_t`: every constraint transformed on its own, plus the
/// complementary blocks of each ordered pair with gains of sign `(+, −)`.
pub fn transform_disjunction_step(
    w: &ConstraintSet,
    t: TransitionId,
    net: &PetriNet,
) -> Result<StepResult> {
    require_uncontrollable(net, t)?;
    let mut plain = ConstraintSet::new();
    let mut gains = Vec::with_capacity(w.len());
    for c in w {
        plain.extend(transform_single(c, t, net)?.as_slice().iter().cloned());
        gains.push(transition_weight(c, t, net)?);
    }
    let constraints = w.as_slice();
    let mut groups = Vec::new();
    for (i, ci) in constraints.iter().enumerate() {
        if gains[i] <= 0 {
            continue;
        }
        for (j, cj) in constraints.iter().enumerate() {
            if gains[j] >= 0 {
                continue;
            }
            groups.push(BlockGroup {
                i,
                j,
                blocks: complementary_blocks((i, j), ci, cj, t, net)?,
            });
        }
    }
    Ok(StepResult {
        transition: t,
        plain,
        groups,
    })
}

/// Whether the step via `t` produces any `(+, −)` gain pair.
pub fn has_sign_conflict(w: &ConstraintSet, t: TransitionId, net: &PetriNet) -> Result<bool> {
    let gains = w
        .iter()
        .map(|c| transition_weight(c, t, net))
        .collect::<Result<Vec<_>>>()?;
    Ok(gains.iter().any(|g| *g > 0) && gains.iter().any(|g| *g < 0))
}

/// Merges atoms that share a weight vector into one integer interval.
///
/// Equal bounds become an equality pair (`≥ v ∧ ≤ v`), lower bounds `≤ 0` are
/// dropped (weights and tokens are nonnegative) and an empty interval turns
/// the block into the canonical `0·m ≥ 1` with `infeasible` set. Intervals
/// keep the order in which their weight vector first appears.
pub fn reduce_block(b: &ConjunctionBlock) -> ConjunctionBlock {
    let dim = b.atoms.first().map_or(0, |a| a.weights.len());
    let mut order: Vec<&Vec<i64>> = Vec::new();
    let mut intervals: HashMap<&Vec<i64>, (Option<i64>, Option<i64>)> = HashMap::new();
    for a in &b.atoms {
        let entry = intervals.entry(&a.weights).or_insert_with(|| {
            order.push(&a.weights);
            (None, None)
        });
        match a.rel {
            Relation::Ge => entry.0 = Some(entry.0.map_or(a.bound, |lo| lo.max(a.bound))),
            Relation::Le => entry.1 = Some(entry.1.map_or(a.bound, |hi| hi.min(a.bound))),
        }
    }
    let infeasible = |origin| ConjunctionBlock {
        atoms: vec![Atom::falsum(dim)],
        origin,
        infeasible: true,
    };
    let mut atoms = Vec::new();
    for w in order {
        let (lo, hi) = intervals[w];
        let lo = lo.filter(|v| *v > 0);
        if w.iter().all(|x| *x == 0) {
            // Constant 0: the interval must contain it.
            if lo.is_some() || hi.is_some_and(|h| h < 0) {
                return infeasible(b.origin);
            }
            continue;
        }
        match (lo, hi) {
            (_, Some(h)) if h < 0 => return infeasible(b.origin),
            (Some(l), Some(h)) if l > h => return infeasible(b.origin),
            (None, Some(0)) => {
                atoms.push(Atom::ge(w.clone(), 0));
                atoms.push(Atom::le(w.clone(), 0));
            }
            (None, Some(h)) => atoms.push(Atom::le(w.clone(), h)),
            (Some(l), h) => {
                atoms.push(Atom::ge(w.clone(), l));
                if let Some(h) = h {
                    atoms.push(Atom::le(w.clone(), h));
                }
            }
            (None, None) => {}
        }
    }
    if atoms.is_empty() && !b.atoms.is_empty() {
        // Every atom was vacuous: keep a tautology so the block still denotes everything.
        atoms.push(Atom::ge(vec![0; dim], 0));
    }
    ConjunctionBlock {
        atoms,
        origin: b.origin,
        infeasible: false,
    }
}

/// Upper bound on token counts that suffices to find a witness of `b`.
///
/// A place with positive weight in some `≤` atom cannot exceed that atom's
/// bound; a place that appears only in `≥` atoms can be raised to the largest
/// `≥` bound without breaking anything.
pub fn default_probe_bound(b: &ConjunctionBlock) -> u32 {
    b.atoms
        .iter()
        .map(|a| a.bound.max(0))
        .max()
        .unwrap_or(0)
        .min(i64::from(u32::MAX)) as u32
}

/// Searches for a marking with every entry `≤ bound` satisfying all atoms of
/// `b`. `None` uses [`default_probe_bound`].
pub fn block_satisfiable_bounded(b: &ConjunctionBlock, bound: Option<u32>) -> bool {
    if b.infeasible {
        return false;
    }
    let Some(dim) = b.atoms.first().map(|a| a.weights.len()) else {
        return true;
    };
    let bound = bound.unwrap_or_else(|| default_probe_bound(b));
    let mut m = vec![0u32; dim];
    let mut partial = vec![0i64; b.atoms.len()];
    search(b, bound, 0, &mut m, &mut partial)
}

fn search(
    b: &ConjunctionBlock,
    bound: u32,
    place: usize,
    m: &mut Vec<u32>,
    partial: &mut Vec<i64>,
) -> bool {
    // Prune: remaining places contribute between 0 and weight·bound.
    for (a, s) in b.atoms.iter().zip(partial.iter()) {
        let rest: i64 = a.weights[place..]
            .iter()
            .map(|w| w * i64::from(bound))
            .sum();
        let feasible = match a.rel {
            Relation::Le => *s <= a.bound,
            Relation::Ge => s + rest >= a.bound,
        };
        if !feasible {
            return false;
        }
    }
    if place == m.len() {
        return true;
    }
    for v in 0..=bound {
        m[place] = v;
        for (a, s) in b.atoms.iter().zip(partial.iter_mut()) {
            *s += a.weights[place] * i64::from(v);
        }
        let found = search(b, bound, place + 1, m, partial);
        for (a, s) in b.atoms.iter().zip(partial.iter_mut()) {
            *s -= a.weights[place] * i64::from(v);
        }
        if found {
            return true;
        }
    }
    m[place] = 0;
    false
}

//! Explicit finite marking sets and the brute-force oracle: restrictions,
//! escaping and transforming sets, the admissible-set fixpoint, the union
//! transform and bounded-universe comparisons.

use std::collections::{BTreeSet, HashMap, VecDeque};

use rayon::prelude::*;

use crate::constraint::{require_uncontrollable, LinearConstraint};
use crate::error::{Error, Result};
use crate::net::{Marking, PetriNet, PlaceId, TransitionId};
use crate::orbit::{
    orbit_stays_in, uncontrollable_explore, Containment, ExploreCaps, ExploreVerdict,
    MarkingPredicate, DEFAULT_ORBIT_CAP,
};

/// Largest universe [`bounded_universe`] builds unless told otherwise.
pub const DEFAULT_UNIVERSE_LIMIT: u128 = 2_000_000;

/// Node budget for [`admissible_within`].
pub const DEFAULT_ORACLE_NODES: usize = 5_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExplicitMarkingSet {
    dim: usize,
    members: BTreeSet<Marking>,
}

impl ExplicitMarkingSet {
    pub fn empty(dim: usize) -> Self {
        ExplicitMarkingSet {
            dim,
            members: BTreeSet::new(),
        }
    }

    pub fn from_markings<I: IntoIterator<Item = Marking>>(dim: usize, markings: I) -> Result<Self> {
        let mut set = ExplicitMarkingSet::empty(dim);
        for m in markings {
            set.insert(m)?;
        }
        Ok(set)
    }

    /// Builds a set from token vectors; convenient in tests.
    pub fn from_vecs(dim: usize, vecs: &[&[u32]]) -> Result<Self> {
        ExplicitMarkingSet::from_markings(dim, vecs.iter().map(|v| Marking(v.to_vec())))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn insert(&mut self, m: Marking) -> Result<bool> {
        if m.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: m.len(),
            });
        }
        Ok(self.members.insert(m))
    }

    pub fn contains(&self, m: &Marking) -> bool {
        self.members.contains(m)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Members in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = &Marking> {
        self.members.iter()
    }

    pub fn is_subset(&self, other: &ExplicitMarkingSet) -> bool {
        self.members.is_subset(&other.members)
    }

    pub fn union(&self, other: &ExplicitMarkingSet) -> ExplicitMarkingSet {
        self.combine(other.members.union(&self.members))
    }

    pub fn intersection(&self, other: &ExplicitMarkingSet) -> ExplicitMarkingSet {
        self.combine(self.members.intersection(&other.members))
    }

    pub fn difference(&self, other: &ExplicitMarkingSet) -> ExplicitMarkingSet {
        self.combine(self.members.difference(&other.members))
    }

    /// Members satisfying `pred`, evaluated in parallel.
    pub fn filter<P: MarkingPredicate + ?Sized>(&self, pred: &P) -> ExplicitMarkingSet {
        let kept: Vec<&Marking> = self
            .members
            .par_iter()
            .filter(|m| pred.contains(m))
            .collect();
        self.combine(kept.into_iter())
    }

    fn combine<'a, I: Iterator<Item = &'a Marking>>(&self, it: I) -> ExplicitMarkingSet {
        ExplicitMarkingSet {
            dim: self.dim,
            members: it.cloned().collect(),
        }
    }
}

impl MarkingPredicate for ExplicitMarkingSet {
    fn contains(&self, m: &Marking) -> bool {
        self.members.contains(m)
    }

    /// A ray that grows in some place leaves every finite set for good once
    /// that place passes the largest value seen among the members.
    fn ray_horizon(&self, m: &Marking, dir: &[i64]) -> Option<u64> {
        let (p, step) = dir.iter().enumerate().find(|(_, d)| **d > 0)?;
        let top = self.members.iter().map(|x| x.0[p]).max().unwrap_or(0);
        let gap = i64::from(top) - i64::from(m.0[p]);
        Some(if gap < 0 { 0 } else { (gap / step + 1) as u64 })
    }
}

impl<'a> IntoIterator for &'a ExplicitMarkingSet {
    type Item = &'a Marking;
    type IntoIter = std::collections::btree_set::Iter<'a, Marking>;

    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}

/// Markings restricted to a subset of places.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestrictedSet {
    pub places: Vec<PlaceId>,
    pub members: BTreeSet<Marking>,
}

/// Projection of `m` onto `places`, listed in canonical place order.
pub fn restrict_marking(m: &Marking, places: &[PlaceId]) -> Result<Marking> {
    let mut sorted = places.to_vec();
    sorted.sort();
    sorted.dedup();
    sorted
        .iter()
        .map(|p| {
            m.0.get(p.0)
                .copied()
                .ok_or_else(|| Error::UnknownPlace(format!("#{}", p.0)))
        })
        .collect::<Result<Vec<_>>>()
        .map(Marking)
}

/// Places with positive weight; the projection of the constraint's set
/// onto them is finite.
pub fn restricted_places(c: &LinearConstraint) -> Vec<PlaceId> {
    c.weights()
        .iter()
        .enumerate()
        .filter(|(_, w)| **w >= 1)
        .map(|(p, _)| PlaceId(p))
        .collect()
}

pub fn all_place_restricted(c: &LinearConstraint) -> RestrictedSet {
    let places = restricted_places(c);
    let weights: Vec<i64> = places.iter().map(|p| c.weight(*p)).collect();
    let mut members = BTreeSet::new();
    let mut current = vec![0u32; places.len()];
    enumerate_restricted(&weights, c.bound(), 0, &mut current, &mut members);
    RestrictedSet { places, members }
}

fn enumerate_restricted(
    weights: &[i64],
    budget: i64,
    idx: usize,
    current: &mut Vec<u32>,
    out: &mut BTreeSet<Marking>,
) {
    if idx == weights.len() {
        out.insert(Marking(current.clone()));
        return;
    }
    let mut v = 0u32;
    while i64::from(v) * weights[idx] <= budget {
        current[idx] = v;
        enumerate_restricted(
            weights,
            budget - i64::from(v) * weights[idx],
            idx + 1,
            current,
            out,
        );
        v += 1;
    }
    current[idx] = 0;
}

/// Members of `domain` that lie in `set` and whose `t`-orbit leaves `set`.
///
/// Orbits are evaluated against `set` itself, never against `domain`, so a
/// bounded domain does not create spurious exits at its border.
pub fn escaping_within<P: MarkingPredicate + ?Sized>(
    net: &PetriNet,
    set: &P,
    domain: &ExplicitMarkingSet,
    t: TransitionId,
) -> Result<ExplicitMarkingSet> {
    split_by_orbit(net, set, domain, t).map(|(_, escaping)| escaping)
}

/// Members of `domain` that lie in `set` and whose whole `t`-orbit stays in it.
pub fn transforming_within<P: MarkingPredicate + ?Sized>(
    net: &PetriNet,
    set: &P,
    domain: &ExplicitMarkingSet,
    t: TransitionId,
) -> Result<ExplicitMarkingSet> {
    split_by_orbit(net, set, domain, t).map(|(staying, _)| staying)
}

fn split_by_orbit<P: MarkingPredicate + ?Sized>(
    net: &PetriNet,
    set: &P,
    domain: &ExplicitMarkingSet,
    t: TransitionId,
) -> Result<(ExplicitMarkingSet, ExplicitMarkingSet)> {
    require_uncontrollable(net, t)?;
    let verdicts: Vec<(&Marking, Containment)> = domain
        .members
        .par_iter()
        .filter(|m| set.contains(m))
        .map(|m| orbit_stays_in(net, m, t, set, DEFAULT_ORBIT_CAP).map(|c| (m, c)))
        .collect::<Result<_>>()?;
    let mut staying = ExplicitMarkingSet::empty(domain.dim);
    let mut escaping = ExplicitMarkingSet::empty(domain.dim);
    for (m, verdict) in verdicts {
        match verdict {
            Containment::Stays => staying.members.insert(m.clone()),
            Containment::Exits(_) => escaping.members.insert(m.clone()),
            Containment::Inconclusive => return Err(Error::Inconclusive),
        };
    }
    Ok((staying, escaping))
}

/// `Γ(Q, t)` for an explicit set.
pub fn escaping_set(
    net: &PetriNet,
    q: &ExplicitMarkingSet,
    t: TransitionId,
) -> Result<ExplicitMarkingSet> {
    escaping_within(net, q, q, t)
}

/// `Q_t = Q − Γ(Q, t)` for an explicit set.
pub fn transforming_set(
    net: &PetriNet,
    q: &ExplicitMarkingSet,
    t: TransitionId,
) -> Result<ExplicitMarkingSet> {
    transforming_within(net, q, q, t)
}

/// Repeatedly replaces `Q` by `Q_t` for the first uncontrollable `t` with a
/// nonempty escaping set, until no such `t` is left.
pub fn admissible_fixpoint(net: &PetriNet, q: &ExplicitMarkingSet) -> Result<ExplicitMarkingSet> {
    let uncontrollable: Vec<TransitionId> = net.uncontrollable().collect();
    let mut current = q.clone();
    'outer: loop {
        for &t in &uncontrollable {
            let next = transforming_set(net, &current, t)?;
            if next.len() < current.len() {
                current = next;
                continue 'outer;
            }
        }
        return Ok(current);
    }
}

/// Transforming set of `Q1 ∪ Q2`, computed from `(Q1)_t` and `(Q2)_t` by
/// growing each side with the markings whose first exit from their own set
/// lands in the other side's current result.
pub fn union_transform(
    net: &PetriNet,
    q1: &ExplicitMarkingSet,
    q2: &ExplicitMarkingSet,
    t: TransitionId,
) -> Result<ExplicitMarkingSet> {
    let mut b1 = transforming_set(net, q1, t)?;
    let mut b2 = transforming_set(net, q2, t)?;
    loop {
        let c1 = handoff(net, q1, &b1, &b2, t)?;
        let c2 = handoff(net, q2, &b2, &b1, t)?;
        if c1.is_empty() && c2.is_empty() {
            return Ok(b1.union(&b2));
        }
        b1 = b1.union(&c1);
        b2 = b2.union(&c2);
    }
}

/// `{m ∈ (own − own_result) ∩ ¬other_result | first exit of m from own ∈ other_result}`.
fn handoff(
    net: &PetriNet,
    own: &ExplicitMarkingSet,
    own_result: &ExplicitMarkingSet,
    other_result: &ExplicitMarkingSet,
    t: TransitionId,
) -> Result<ExplicitMarkingSet> {
    let mut out = ExplicitMarkingSet::empty(own.dim);
    for m in own.iter() {
        if own_result.contains(m) || other_result.contains(m) {
            continue;
        }
        match orbit_stays_in(net, m, t, own, DEFAULT_ORBIT_CAP)? {
            Containment::Exits(first) if other_result.contains(&first) => {
                out.members.insert(m.clone());
            }
            Containment::Inconclusive => return Err(Error::Inconclusive),
            _ => {}
        }
    }
    Ok(out)
}

/// All markings with `m(p) ≤ bounds[p]`, refusing universes above `limit`.
pub fn bounded_universe(bounds: &[u32], limit: u128) -> Result<ExplicitMarkingSet> {
    let size = bounds
        .iter()
        .try_fold(1u128, |acc, b| acc.checked_mul(u128::from(*b) + 1))
        .unwrap_or(u128::MAX);
    if size > limit {
        return Err(Error::UniverseTooLarge { size, limit });
    }
    let mut members = BTreeSet::new();
    let mut current = vec![0u32; bounds.len()];
    loop {
        members.insert(Marking(current.clone()));
        let mut p = 0;
        loop {
            if p == bounds.len() {
                return Ok(ExplicitMarkingSet {
                    dim: bounds.len(),
                    members,
                });
            }
            if current[p] < bounds[p] {
                current[p] += 1;
                break;
            }
            current[p] = 0;
            p += 1;
        }
    }
}

/// Members of `universe` denoted by `expr`.
pub fn expression_members<P: MarkingPredicate + ?Sized>(
    expr: &P,
    universe: &ExplicitMarkingSet,
) -> ExplicitMarkingSet {
    universe.filter(expr)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Equivalence {
    Equal,
    /// Lexicographically first marking in exactly one set; `side` names the
    /// set that contains it.
    Counterexample {
        marking: Marking,
        side: Side,
    },
}

pub fn set_equivalence(left: &ExplicitMarkingSet, right: &ExplicitMarkingSet) -> Equivalence {
    let first_left = left.members.difference(&right.members).next();
    let first_right = right.members.difference(&left.members).next();
    match (first_left, first_right) {
        (None, None) => Equivalence::Equal,
        (Some(m), None) => Equivalence::Counterexample {
            marking: m.clone(),
            side: Side::Left,
        },
        (None, Some(m)) => Equivalence::Counterexample {
            marking: m.clone(),
            side: Side::Right,
        },
        (Some(a), Some(b)) if a <= b => Equivalence::Counterexample {
            marking: a.clone(),
            side: Side::Left,
        },
        (Some(_), Some(b)) => Equivalence::Counterexample {
            marking: b.clone(),
            side: Side::Right,
        },
    }
}

/// Admissible members of `universe` for the legal set `legal`: markings in
/// `legal` from which no marking outside `legal` is reachable by firing
/// uncontrollable transitions only.
///
/// Builds the uncontrollable reachability graph of all legal universe
/// members at once and propagates badness backwards. Fails with
/// [`Error::Inconclusive`] if the graph exceeds `node_cap` markings.
pub fn admissible_within<P: MarkingPredicate + ?Sized>(
    net: &PetriNet,
    legal: &P,
    universe: &ExplicitMarkingSet,
    node_cap: usize,
) -> Result<ExplicitMarkingSet> {
    let uncontrollable: Vec<TransitionId> = net.uncontrollable().collect();
    let mut index: HashMap<Marking, usize> = HashMap::new();
    let mut nodes: Vec<Marking> = Vec::new();
    let mut bad: Vec<bool> = Vec::new();
    let mut preds: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::new();
    let mut seeds = Vec::new();

    for m in universe.iter() {
        if !legal.contains(m) {
            continue;
        }
        net.check_marking(m)?;
        let id = nodes.len();
        index.insert(m.clone(), id);
        nodes.push(m.clone());
        bad.push(false);
        preds.push(Vec::new());
        queue.push_back(id);
        seeds.push(id);
    }
    while let Some(id) = queue.pop_front() {
        if bad[id] {
            continue;
        }
        for &t in &uncontrollable {
            if !net.enabled(&nodes[id], t)? {
                continue;
            }
            let next = net.fire(&nodes[id], t)?;
            let nid = match index.get(&next) {
                Some(nid) => *nid,
                None => {
                    if nodes.len() >= node_cap {
                        return Err(Error::Inconclusive);
                    }
                    let nid = nodes.len();
                    let illegal = !legal.contains(&next);
                    index.insert(next.clone(), nid);
                    nodes.push(next);
                    bad.push(illegal);
                    preds.push(Vec::new());
                    if !illegal {
                        queue.push_back(nid);
                    }
                    nid
                }
            };
            preds[nid].push(id);
        }
    }
    let mut pending: Vec<usize> = (0..nodes.len()).filter(|i| bad[*i]).collect();
    while let Some(id) = pending.pop() {
        for &p in &preds[id] {
            if !bad[p] {
                bad[p] = true;
                pending.push(p);
            }
        }
    }
    let mut out = ExplicitMarkingSet::empty(universe.dim);
    for id in seeds {
        if !bad[id] {
            out.members.insert(nodes[id].clone());
        }
    }
    Ok(out)
}

/// Same set as [`admissible_within`], decided marking by marking with an
/// independent breadth-first search each. Slower; used as a cross-check.
pub fn admissible_by_exploration<P: MarkingPredicate + ?Sized>(
    net: &PetriNet,
    legal: &P,
    universe: &ExplicitMarkingSet,
    caps: ExploreCaps,
) -> Result<ExplicitMarkingSet> {
    let verdicts: Vec<(&Marking, ExploreVerdict)> = universe
        .members
        .par_iter()
        .map(|m| uncontrollable_explore(net, m, |x| !legal.contains(x), caps).map(|v| (m, v)))
        .collect::<Result<_>>()?;
    let mut out = ExplicitMarkingSet::empty(universe.dim);
    for (m, verdict) in verdicts {
        match verdict {
            ExploreVerdict::Admissible => {
                out.members.insert(m.clone());
            }
            ExploreVerdict::WeaklyForbidden { .. } => {}
            ExploreVerdict::Inconclusive => return Err(Error::Inconclusive),
        }
    }
    Ok(out)
}

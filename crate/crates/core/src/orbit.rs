//! Single-transition orbits and uncontrollable reachability.

use std::collections::{HashMap, VecDeque};

use crate::error::Result;
use crate::net::{Marking, PetriNet, TransitionId};

/// Default cap on the number of orbit markings enumerated.
pub const DEFAULT_ORBIT_CAP: u64 = 100_000;

/// A set of markings given by a membership test.
pub trait MarkingPredicate: Sync {
    fn contains(&self, m: &Marking) -> bool;

    /// For the ray `m + i * dir`, an index `h` such that membership is the
    /// same for every `i >= h`. `None` when the predicate cannot tell.
    fn ray_horizon(&self, _m: &Marking, _dir: &[i64]) -> Option<u64> {
        None
    }
}

impl<F> MarkingPredicate for F
where
    F: Fn(&Marking) -> bool + Sync,
{
    fn contains(&self, m: &Marking) -> bool {
        self(m)
    }
}

/// First index `i >= 0` from which `start + i * slope <= bound` has its
/// eventual truth value.
pub(crate) fn le_flip_index(start: i64, slope: i64, bound: i64) -> u64 {
    use std::cmp::Ordering;
    match slope.cmp(&0) {
        Ordering::Equal => 0,
        // Eventually false.
        Ordering::Greater => {
            if start > bound {
                0
            } else {
                ((bound - start) / slope + 1) as u64
            }
        }
        // Eventually true.
        Ordering::Less => {
            if start <= bound {
                0
            } else {
                let step = -slope;
                ((start - bound + step - 1) / step) as u64
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitEnd {
    /// `t` became disabled after the last listed marking.
    Disabled,
    /// `t` stays enabled forever. `unbounded` is false for `Δ_t = 0`.
    StaysForever { unbounded: bool },
    /// The listing was truncated at the cap.
    CapReached,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orbit {
    pub markings: Vec<Marking>,
    pub end: OrbitEnd,
}

/// Number of times `t` can fire in a row from `m`; `None` if unbounded.
pub fn orbit_length(net: &PetriNet, m: &Marking, t: TransitionId) -> Result<Option<u64>> {
    if !net.enabled(m, t)? {
        return Ok(Some(0));
    }
    let tr = net.transition(t)?;
    // Some input place that is not refilled bounds the chain; otherwise
    // (•t ⊆ t•) t stays enabled forever.
    let finite = tr
        .preset
        .iter()
        .filter(|p| !tr.has_output(**p))
        .map(|p| u64::from(m.get(*p)))
        .min();
    Ok(finite)
}

/// The markings reachable from `m` by firing `t` only, `m` included.
pub fn t_orbit(net: &PetriNet, m: &Marking, t: TransitionId, cap: u64) -> Result<Orbit> {
    let cap = cap.max(1);
    let delta = net.delta(t)?;
    match orbit_length(net, m, t)? {
        None => Ok(Orbit {
            markings: vec![m.clone()],
            end: OrbitEnd::StaysForever {
                unbounded: delta.iter().any(|d| *d != 0),
            },
        }),
        Some(n) => {
            let count = (n + 1).min(cap);
            let markings = (0..count)
                .map(|i| m.shifted(delta, i).expect("orbit stays nonnegative"))
                .collect();
            let end = if n + 1 > cap {
                OrbitEnd::CapReached
            } else {
                OrbitEnd::Disabled
            };
            Ok(Orbit { markings, end })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Containment {
    Stays,
    /// First orbit marking outside the set.
    Exits(Marking),
    Inconclusive,
}

/// Decides whether the whole `t`-orbit of `m` lies inside `set`.
pub fn orbit_stays_in<P: MarkingPredicate + ?Sized>(
    net: &PetriNet,
    m: &Marking,
    t: TransitionId,
    set: &P,
    cap: u64,
) -> Result<Containment> {
    let delta = net.delta(t)?;
    let length = orbit_length(net, m, t)?;
    if length == Some(0) || delta.iter().all(|d| *d == 0) {
        return Ok(if set.contains(m) {
            Containment::Stays
        } else {
            Containment::Exits(m.clone())
        });
    }
    let horizon = set.ray_horizon(m, delta);
    let (limit, decided) = match (length, horizon) {
        (Some(n), Some(h)) => (n.min(h), true),
        (None, Some(h)) => (h, true),
        (Some(n), None) if n < cap => (n, true),
        _ => (cap.saturating_sub(1), false),
    };
    let mut current = m.clone();
    for i in 0..=limit {
        if i > 0 {
            current = m.shifted(delta, i).expect("orbit stays nonnegative");
        }
        if !set.contains(&current) {
            return Ok(Containment::Exits(current));
        }
    }
    Ok(if decided {
        Containment::Stays
    } else {
        Containment::Inconclusive
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExploreCaps {
    pub states: usize,
    pub depth: usize,
}

impl Default for ExploreCaps {
    fn default() -> Self {
        ExploreCaps {
            states: 200_000,
            depth: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExploreVerdict {
    Admissible,
    /// A violating marking is reachable by firing `path` (uncontrollable only).
    WeaklyForbidden {
        path: Vec<TransitionId>,
        reached: Marking,
    },
    Inconclusive,
}

/// Breadth-first search over markings reachable from `m` by firing
/// uncontrollable transitions only.
pub fn uncontrollable_explore<V>(
    net: &PetriNet,
    m: &Marking,
    violation: V,
    caps: ExploreCaps,
) -> Result<ExploreVerdict>
where
    V: Fn(&Marking) -> bool,
{
    net.check_marking(m)?;
    if violation(m) {
        return Ok(ExploreVerdict::WeaklyForbidden {
            path: Vec::new(),
            reached: m.clone(),
        });
    }
    let uncontrollable: Vec<TransitionId> = net.uncontrollable().collect();
    // marking -> (parent index, transition, depth)
    let mut nodes: Vec<Marking> = vec![m.clone()];
    let mut parents: Vec<Option<(usize, TransitionId)>> = vec![None];
    let mut depths: Vec<usize> = vec![0];
    let mut seen: HashMap<Marking, usize> = HashMap::new();
    seen.insert(m.clone(), 0);
    let mut queue = VecDeque::from([0usize]);
    let mut truncated = false;

    while let Some(idx) = queue.pop_front() {
        if depths[idx] >= caps.depth {
            truncated = true;
            continue;
        }
        for &t in &uncontrollable {
            let current = &nodes[idx];
            if !net.enabled(current, t)? {
                continue;
            }
            let next = net.fire(current, t)?;
            if seen.contains_key(&next) {
                continue;
            }
            if violation(&next) {
                let mut path = vec![t];
                let mut cursor = idx;
                while let Some((parent, via)) = parents[cursor] {
                    path.push(via);
                    cursor = parent;
                }
                path.reverse();
                return Ok(ExploreVerdict::WeaklyForbidden {
                    path,
                    reached: next,
                });
            }
            if nodes.len() >= caps.states {
                truncated = true;
                continue;
            }
            let id = nodes.len();
            seen.insert(next.clone(), id);
            nodes.push(next);
            parents.push(Some((idx, t)));
            depths.push(depths[idx] + 1);
            queue.push_back(id);
        }
    }
    Ok(if truncated {
        ExploreVerdict::Inconclusive
    } else {
        ExploreVerdict::Admissible
    })
}

#![allow(dead_code)]

use admissify::constraint::LinearConstraint;
use admissify::net::{Marking, PetriNet, TransitionId};
use admissify::netfile::{parse_net, NetFile};
use rand::seq::SliceRandom;
use rand::Rng;

pub const MERGE: &str = include_str!("../../fixtures/merge.net");
pub const ASSEMBLY: &str = include_str!("../../fixtures/assembly.net");
pub const SELF_LOOP: &str = include_str!("../../fixtures/self_loop.net");
pub const ONE_SIDED: &str = include_str!("../../fixtures/one_sided.net");
pub const FAN_OUT: &str = include_str!("../../fixtures/fan_out.net");
pub const CYCLE: &str = include_str!("../../fixtures/cycle.net");
pub const CASCADE: &str = include_str!("../../fixtures/cascade.net");
pub const TRIANGLE: &str = include_str!("../../fixtures/triangle.net");

pub fn load(text: &str) -> NetFile {
    parse_net(text).expect("fixture parses")
}

pub fn marking(tokens: &[u32]) -> Marking {
    Marking(tokens.to_vec())
}

/// `ω·m ≤ k` from `(coefficient, place)` terms.
pub fn lc(net: &PetriNet, terms: &[(i64, &str)], bound: i64) -> LinearConstraint {
    LinearConstraint::from_terms(net, terms, bound).expect("valid constraint")
}

pub fn tid(net: &PetriNet, name: &str) -> TransitionId {
    net.transition_id(name).expect("known transition")
}

/// Whether every marking reachable from `m` by firing `t` alone satisfies
/// `member`. Walks the orbit step by step; an orbit still enabled after
/// `ORBIT_WALK` firings is judged by the markings seen so far, which is
/// exact for the small bounded sets and linear sets used in the tests.
pub fn orbit_within(
    net: &PetriNet,
    m: &Marking,
    t: TransitionId,
    member: impl Fn(&Marking) -> bool,
) -> bool {
    const ORBIT_WALK: usize = 256;
    let mut current = m.clone();
    for _ in 0..=ORBIT_WALK {
        if !member(&current) {
            return false;
        }
        if !net.enabled(&current, t).unwrap() {
            return true;
        }
        let next = net.fire(&current, t).unwrap();
        if next == current {
            return true;
        }
        current = next;
    }
    true
}

/// First marking of the `t`-orbit of `m` outside `member`, if any.
pub fn first_exit(
    net: &PetriNet,
    m: &Marking,
    t: TransitionId,
    member: impl Fn(&Marking) -> bool,
) -> Option<Marking> {
    let mut current = m.clone();
    for _ in 0..=256 {
        if !member(&current) {
            return Some(current);
        }
        if !net.enabled(&current, t).unwrap() {
            return None;
        }
        let next = net.fire(&current, t).unwrap();
        if next == current {
            return None;
        }
        current = next;
    }
    None
}

pub struct RandomCase {
    pub net: PetriNet,
    pub constraints: Vec<LinearConstraint>,
    pub bounds: Vec<u32>,
}

/// Chance that an uncontrollable transition may output one token more
/// than it consumes. Such transitions can make uncontrollable reach sets
/// infinite, which leaves the oracle inconclusive.
pub const UNCONTROLLABLE_GROWTH: f64 = 0.3;

/// A small ordinary net with three legal constraints and a per-place bound.
///
/// Every transition has at least one input and at most one more output
/// than inputs; outputs may repeat inputs (self-loops). Uncontrollable
/// transitions only sometimes get the extra output.
pub fn random_case<R: Rng>(rng: &mut R) -> RandomCase {
    let places = rng.gen_range(2..=5);
    let transitions = rng.gen_range(1..=4);
    let names: Vec<String> = (1..=places).map(|i| format!("p{i}")).collect();
    let mut builder = PetriNet::builder("random").places(names.clone());
    for k in 1..=transitions {
        let name = format!("t{k}");
        let controllable = rng.gen_bool(0.2);
        builder = if controllable {
            builder.controllable(name.clone())
        } else {
            builder.uncontrollable(name.clone())
        };
        let n_in = rng.gen_range(1..=places.min(3));
        let grows = controllable || rng.gen_bool(UNCONTROLLABLE_GROWTH);
        let n_out = if grows {
            rng.gen_range(0..=(n_in + 1).min(places))
        } else {
            rng.gen_range(0..=n_in)
        };
        let ins: Vec<&str> = names
            .choose_multiple(rng, n_in)
            .map(String::as_str)
            .collect();
        let outs: Vec<&str> = names
            .choose_multiple(rng, n_out)
            .map(String::as_str)
            .collect();
        builder = builder.flow(&name, &ins, &outs);
    }
    let net = builder.build().expect("random net is valid");
    let constraints = (0..3).map(|_| random_constraint(rng, places)).collect();
    let bounds = (0..places).map(|_| rng.gen_range(1..=4)).collect();
    RandomCase {
        net,
        constraints,
        bounds,
    }
}

pub fn random_constraint<R: Rng>(rng: &mut R, places: usize) -> LinearConstraint {
    let mut weights: Vec<i64> = (0..places).map(|_| rng.gen_range(0..=2)).collect();
    if weights.iter().all(|w| *w == 0) {
        let p = rng.gen_range(0..places);
        weights[p] = 1;
    }
    LinearConstraint::new(weights, rng.gen_range(0..=3)).expect("nonnegative")
}

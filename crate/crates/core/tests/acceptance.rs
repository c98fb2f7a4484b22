//! Acceptance suite: one line per criterion, nonzero exit on any failure.

mod common;

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use admissify::cli::{verify_expression, OracleOptions, Verdict};
use admissify::constraint::{
    transform_single, transition_weight, utgt_rho, ConstraintSet, LinearConstraint,
};
use admissify::driver::{replay_sequence, transform_to_admissible, DriverOptions, TraceStatus};
use admissify::expression::{
    complementary_blocks, transform_disjunction_step, ConjunctionBlock, LogicExpression, StepResult,
};
use admissify::marking_set::{
    admissible_within, all_place_restricted, bounded_universe, escaping_set, expression_members,
    restricted_places, set_equivalence, transforming_set, transforming_within, union_transform,
    Equivalence, ExplicitMarkingSet, DEFAULT_UNIVERSE_LIMIT,
};
use admissify::net::{Marking, PetriNet, PlaceId, TransitionId};
use admissify::orbit::{t_orbit, uncontrollable_explore, ExploreCaps, ExploreVerdict, OrbitEnd};
use admissify::render::{linear_form, render_reduced_block};
use admissify::Error;
use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

/// Per-place bound of the Example-1 oracle check.
const CASCADE_BOUND: u32 = 4;
/// Per-place bound for comparing the two assembly results.
const ASSEMBLY_BOUND: u32 = 5;
/// Conclusive random cases required.
const RANDOM_CASES: usize = 1000;
/// Largest tolerated share of inconclusive random draws, in percent.
const DISCARD_PERCENT: usize = 5;
/// Node budget of the oracle on a single random case.
const RANDOM_NODE_CAP: usize = 50_000;
const RANDOM_SEED: u64 = 0x5eed_0001;

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("merge orbit", merge_orbit),
        ("merge escaping and transforming sets", merge_sets),
        ("union transform worked example", union_example),
        ("restricted places and restricted set", restricted_example),
        ("self-loop gain transformation", self_loop_rho),
        ("one-sided step with complementary blocks", one_sided_step),
        ("fan-out step with two block groups", fan_out_step),
        ("assembly rule 1 and replayed sequence", assembly_rules),
        ("cycle trace under rule 2", cycle_trace),
        ("triangle trace", triangle_trace),
        ("cascade trace and oracle check", cascade_trace),
        ("weakly admissible counterexample", weak_counterexample),
        ("randomized property suite", random_suite),
    ];
    let start = Instant::now();
    let mut failures = 0;
    for (n, (label, check)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(format!("panicked: {}", panic_text(&p))));
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(note) if note.is_empty() => println!("[{:>2}] PASS {label} ({secs:.2}s)", n + 1),
            Ok(note) => println!("[{:>2}] PASS {label} ({secs:.2}s; {note})", n + 1),
            Err(why) => {
                failures += 1;
                println!("[{:>2}] FAIL {label} ({secs:.2}s): {why}", n + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed in {:.1}s",
        criteria.len() - failures,
        start.elapsed().as_secs_f64()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}

fn panic_text(p: &Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<String>()
        .cloned()
        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_default()
}

fn set_of(dim: usize, vecs: &[&[u32]]) -> ExplicitMarkingSet {
    ExplicitMarkingSet::from_vecs(dim, vecs).unwrap()
}

fn err(e: Error) -> String {
    e.to_string()
}

/// Expected rendering of a reduced block: token requirements, then
/// `(form, lo, hi)` ranges, shown as an equality when `lo == hi`.
fn block_text(requirements: &[(&str, u64)], ranges: &[(&str, i64, i64)]) -> String {
    let mut parts: Vec<String> = requirements
        .iter()
        .map(|(p, n)| format!("m({p}) >= {n}"))
        .collect();
    parts.extend(ranges.iter().map(|(form, lo, hi)| {
        if lo == hi {
            format!("{form} = {lo}")
        } else {
            format!("{lo} <= {form} <= {hi}")
        }
    }));
    format!("{{ {} }}", parts.join(" ∧ "))
}

fn reduced_texts(net: &PetriNet, blocks: &[ConjunctionBlock]) -> Vec<String> {
    blocks
        .iter()
        .map(|b| render_reduced_block(net, b))
        .collect()
}

fn plain_forms(net: &PetriNet, w: &ConstraintSet) -> Vec<String> {
    w.iter()
        .map(|c| format!("{} <= {}", linear_form(net, c.weights()), c.bound()))
        .collect()
}

fn group(step: &StepResult, i: usize, j: usize) -> Result<&[ConjunctionBlock], String> {
    step.groups
        .iter()
        .find(|g| g.i == i && g.j == j)
        .map(|g| g.blocks.as_slice())
        .ok_or_else(|| format!("no block group ({i},{j}); groups {:?}", pairs(step)))
}

fn pairs(step: &StepResult) -> Vec<(usize, usize)> {
    step.groups.iter().map(|g| (g.i, g.j)).collect()
}

fn names(net: &PetriNet, sigma: &[TransitionId]) -> Vec<String> {
    sigma
        .iter()
        .map(|t| net.transitions()[t.0].name.clone())
        .collect()
}

fn merge_orbit() -> Outcome {
    let f = load(MERGE);
    let t = tid(&f.net, "t");
    let orbit = t_orbit(&f.net, &marking(&[0, 2, 3]), t, 100).map_err(err)?;
    let expected = vec![
        marking(&[0, 2, 3]),
        marking(&[1, 1, 2]),
        marking(&[2, 0, 1]),
    ];
    ensure!(orbit.markings == expected, "orbit {:?}", orbit.markings);
    ensure!(orbit.end == OrbitEnd::Disabled, "orbit end {:?}", orbit.end);
    Ok(String::new())
}

fn merge_sets() -> Outcome {
    let f = load(MERGE);
    let t = tid(&f.net, "t");
    let q = set_of(
        3,
        &[&[1, 0, 0], &[1, 0, 1], &[0, 1, 1], &[1, 1, 1], &[0, 2, 2]],
    );
    let gamma = escaping_set(&f.net, &q, t).map_err(err)?;
    let qt = transforming_set(&f.net, &q, t).map_err(err)?;
    ensure!(
        gamma == set_of(3, &[&[1, 1, 1], &[0, 2, 2]]),
        "escaping {gamma:?}"
    );
    ensure!(
        qt == set_of(3, &[&[1, 0, 0], &[1, 0, 1], &[0, 1, 1]]),
        "transforming {qt:?}"
    );
    Ok(String::new())
}

fn union_example() -> Outcome {
    let f = load(MERGE);
    let t = tid(&f.net, "t");
    let m: [&[u32]; 16] = [
        &[1, 0, 0],
        &[0, 1, 1],
        &[4, 0, 0],
        &[3, 1, 1],
        &[1, 1, 2],
        &[1, 1, 1],
        &[0, 2, 2],
        &[1, 2, 2],
        &[2, 1, 1],
        &[0, 1, 2],
        &[2, 0, 0],
        &[2, 0, 1],
        &[3, 0, 0],
        &[0, 2, 3],
        &[0, 3, 3],
        &[0, 3, 2],
    ];
    let q1 = set_of(3, &m[0..10]);
    let q2 = set_of(3, &[m[3], m[7], m[10], m[11], m[12], m[13], m[14], m[15]]);
    let expected = set_of(3, &[&m[0..9], &m[10..15]].concat());
    let out = union_transform(&f.net, &q1, &q2, t).map_err(err)?;
    ensure!(out == expected, "union transform {out:?}");
    let direct = transforming_set(&f.net, &q1.union(&q2), t).map_err(err)?;
    ensure!(
        direct == expected,
        "transforming set of the union {direct:?}"
    );
    Ok(String::new())
}

fn restricted_example() -> Outcome {
    let f = load(MERGE);
    let c = lc(&f.net, &[(2, "p1"), (1, "p2")], 2);
    ensure!(
        restricted_places(&c) == vec![PlaceId(0), PlaceId(1)],
        "restricted places"
    );
    let r = all_place_restricted(&c);
    let expected: BTreeSet<Marking> = [[0, 0], [0, 1], [0, 2], [1, 0]]
        .iter()
        .map(|v| marking(v))
        .collect();
    ensure!(
        r.places == vec![PlaceId(0), PlaceId(1)],
        "places {:?}",
        r.places
    );
    ensure!(r.members == expected, "members {:?}", r.members);
    Ok(String::new())
}

fn self_loop_rho() -> Outcome {
    let f = load(SELF_LOOP);
    let net = &f.net;
    let t = tid(net, "t");
    let legal = &f.constraints["legal"];
    let rho = utgt_rho(legal, t, net.place_id("p2").unwrap(), net).map_err(err)?;
    ensure!(rho == lc(net, &[(1, "p1"), (2, "p2")], 1), "rho {rho:?}");
    let single = transform_single(legal, t, net).map_err(err)?;
    ensure!(
        single == ConstraintSet::single(rho),
        "transform_single {single:?}"
    );
    Ok(String::new())
}

fn one_sided_step() -> Outcome {
    let f = load(ONE_SIDED);
    let net = &f.net;
    let w: ConstraintSet = [f.constraints["c1"].clone(), f.constraints["c2"].clone()]
        .into_iter()
        .collect();
    let step = transform_disjunction_step(&w, tid(net, "t3"), net).map_err(err)?;
    let plain = plain_forms(net, &step.plain);
    ensure!(
        plain == ["m(p1)+m(p3)+m(p4) <= 1", "m(p1)+m(p2)+m(p4) <= 1"],
        "plain {plain:?}"
    );
    ensure!(pairs(&step) == [(0, 1)], "groups {:?}", pairs(&step));
    let got = reduced_texts(net, group(&step, 0, 1)?);
    let i = "m(p1)+m(p3)";
    let j = "m(p1)+m(p2)+m(p4)";
    let expected = vec![
        block_text(&[("p4", 1)], &[(i, 1, 1), (j, 2, 2)]),
        block_text(&[("p4", 2)], &[(i, 0, 0), (j, 2, 3)]),
    ];
    ensure!(got == expected, "blocks {got:#?}");
    Ok(String::new())
}

/// The four blocks of a `(+,-)` pair with `k = 3` and unit gains.
fn unit_gain_table(pre: &str, escaping: &str, receiving: &str) -> Vec<String> {
    let table = [(1, 3, 4, 4), (2, 2, 4, 5), (3, 1, 4, 6), (4, 0, 4, 7)];
    table
        .iter()
        .map(|&(lambda, v, lo, hi)| {
            block_text(&[(pre, lambda)], &[(escaping, v, v), (receiving, lo, hi)])
        })
        .collect()
}

fn fan_out_step() -> Outcome {
    let f = load(FAN_OUT);
    let net = &f.net;
    let w: ConstraintSet = ["c1", "c2", "c3"]
        .iter()
        .map(|n| f.constraints[*n].clone())
        .collect();
    let step = transform_disjunction_step(&w, tid(net, "t3"), net).map_err(err)?;
    let plain = plain_forms(net, &step.plain);
    ensure!(
        plain
            == [
                "m(p1)+m(p2)+m(p5) <= 3",
                "m(p1)+m(p3)+m(p5) <= 3",
                "m(p1)+m(p4)+m(p5) <= 3"
            ],
        "plain {plain:?}"
    );
    ensure!(
        pairs(&step) == [(1, 0), (2, 0)],
        "groups {:?}",
        pairs(&step)
    );
    let a = "m(p1)+m(p2)+m(p5)";
    for (i, form) in [(1, "m(p1)+m(p3)"), (2, "m(p1)+m(p4)")] {
        let got = reduced_texts(net, group(&step, i, 0)?);
        ensure!(
            got == unit_gain_table("p5", form, a),
            "group ({i},0): {got:#?}"
        );
    }
    Ok(String::new())
}

fn assembly_rules() -> Outcome {
    let f = load(ASSEMBLY);
    let net = &f.net;
    let legal = &f.constraints["legal"];

    let chosen = transform_to_admissible(net, legal, DriverOptions::default()).map_err(err)?;
    ensure!(
        names(net, &chosen.sigma()) == ["t4", "t3"],
        "sigma {:?}",
        names(net, &chosen.sigma())
    );
    ensure!(
        chosen.status == TraceStatus::Complete,
        "status {:?}",
        chosen.status
    );
    let l4 = plain_forms(net, &chosen.steps[0].result.plain);
    ensure!(l4 == ["m(p1)+m(p2)+m(p3)+m(p5) <= 3"], "after t4 {l4:?}");
    let l4b = plain_forms(net, &chosen.final_constraints());
    ensure!(
        l4b == [
            "m(p1)+m(p2)+m(p3)+m(p4)+m(p5) <= 3",
            "m(p1)+m(p2)+m(p3)+2m(p5) <= 3"
        ],
        "after t4 t3 {l4b:?}"
    );

    let replayed = replay_sequence(net, legal, &[tid(net, "t3"), tid(net, "t4")]).map_err(err)?;
    let l3 = plain_forms(net, &replayed.steps[0].result.plain);
    ensure!(
        l3 == [
            "m(p1)+m(p2)+m(p3)+2m(p4) <= 3",
            "m(p1)+m(p2)+m(p3)+2m(p5) <= 3"
        ],
        "after t3 {l3:?}"
    );
    let last = &replayed.steps[1].result;
    let l3b = plain_forms(net, &last.plain);
    ensure!(
        l3b == [
            "m(p1)+m(p2)+m(p3)+2m(p4)+m(p5) <= 3",
            "m(p1)+m(p2)+m(p3)+2m(p5) <= 3"
        ],
        "after t3 t4 {l3b:?}"
    );
    ensure!(pairs(last) == [(0, 1)], "groups {:?}", pairs(last));
    let got = reduced_texts(net, group(last, 0, 1)?);
    let expected = unit_gain_table("p5", "m(p1)+m(p2)+m(p3)+2m(p4)", "m(p1)+m(p2)+m(p3)+2m(p5)");
    ensure!(got == expected, "blocks {got:#?}");
    ensure!(
        replayed.status == TraceStatus::CompleteWithBlocks,
        "replay status {:?}",
        replayed.status
    );

    let universe = bounded_universe(&[ASSEMBLY_BOUND; 5], DEFAULT_UNIVERSE_LIMIT).map_err(err)?;
    let via_rule = expression_members(&chosen.final_expression(), &universe);
    let via_replay = expression_members(&replayed.final_expression(), &universe);
    ensure!(
        set_equivalence(&via_rule, &via_replay) == Equivalence::Equal,
        "results differ: {:?}",
        set_equivalence(&via_rule, &via_replay)
    );
    let oracle = admissible_within(net, legal, &universe, 1_000_000).map_err(err)?;
    ensure!(oracle == via_rule, "result differs from the admissible set");
    Ok(format!("{} markings compared", universe.len()))
}

fn cycle_trace() -> Outcome {
    let f = load(CYCLE);
    let net = &f.net;
    let trace = transform_to_admissible(net, &f.constraints["legal"], DriverOptions::default())
        .map_err(err)?;
    let sigma = names(net, &trace.sigma());
    ensure!(
        sigma == ["t1", "t2", "t4", "t3", "t4", "t3", "t4"],
        "sigma {sigma:?}"
    );
    ensure!(
        trace.status == TraceStatus::Complete,
        "status {:?}",
        trace.status
    );
    let expected: [[&str; 2]; 7] = [
        ["m(p1)+m(p2) <= 1", "m(p1)+m(p3) <= 1"],
        ["m(p1)+m(p2)+m(p4) <= 1", "m(p1)+m(p3) <= 1"],
        ["m(p1)+m(p2)+m(p4)+m(p5) <= 1", "m(p1)+m(p3) <= 1"],
        ["m(p1)+m(p2)+m(p4)+m(p5) <= 1", "m(p1)+m(p3)+m(p4) <= 1"],
        [
            "m(p1)+m(p2)+m(p4)+m(p5) <= 1",
            "m(p1)+m(p3)+m(p4)+m(p5) <= 1",
        ],
        [
            "m(p1)+m(p2)+m(p4)+m(p5) <= 1",
            "m(p1)+m(p3)+2m(p4)+m(p5) <= 1",
        ],
        [
            "m(p1)+m(p2)+m(p4)+m(p5) <= 1",
            "m(p1)+m(p3)+2m(p4)+2m(p5) <= 1",
        ],
    ];
    for (n, (step, want)) in trace.steps.iter().zip(expected.iter()).enumerate() {
        ensure!(!step.result.has_blocks(), "step {} has blocks", n + 1);
        let got = plain_forms(net, &step.result.plain);
        ensure!(got == want, "step {}: {got:?}", n + 1);
    }
    Ok(String::new())
}

fn constraint_key(net: &PetriNet, texts: &[(&[(i64, &str)], i64)]) -> BTreeSet<(Vec<i64>, i64)> {
    texts
        .iter()
        .map(|(terms, k)| {
            let c = lc(net, terms, *k);
            (c.weights().to_vec(), c.bound())
        })
        .collect()
}

fn triangle_trace() -> Outcome {
    let f = load(TRIANGLE);
    let net = &f.net;
    let legal = &f.constraints["legal"];
    let trace = transform_to_admissible(net, legal, DriverOptions::default()).map_err(err)?;
    let sigma = names(net, &trace.sigma());
    ensure!(sigma == ["t1", "t2", "t3"], "sigma {sigma:?}");
    ensure!(
        trace.status == TraceStatus::CompleteWithBlocks,
        "status {:?}",
        trace.status
    );

    // The third printed constraint repeats the first with its terms reordered.
    let printed = constraint_key(
        net,
        &[
            (&[(1, "p0"), (1, "p1"), (1, "p2")], 1),
            (&[(1, "p0"), (1, "p1"), (1, "p3")], 1),
            (&[(1, "p0"), (1, "p2"), (1, "p1")], 1),
            (&[(1, "p0"), (1, "p2"), (1, "p3")], 1),
        ],
    );
    let got: BTreeSet<(Vec<i64>, i64)> = trace
        .final_constraints()
        .iter()
        .map(|c| (c.weights().to_vec(), c.bound()))
        .collect();
    ensure!(got == printed, "plain constraints {got:?}");

    let last = &trace.steps[2].result;
    ensure!(pairs(last) == [(2, 1)], "groups {:?}", pairs(last));
    let blocks = group(last, 2, 1)?;
    let i = "m(p0)+m(p2)";
    let j = "m(p0)+m(p1)+m(p3)";
    let expected = vec![
        block_text(&[("p1", 1), ("p3", 1)], &[(i, 1, 1), (j, 2, 2)]),
        block_text(&[("p1", 2), ("p3", 2)], &[(i, 0, 0), (j, 2, 3)]),
    ];
    let got = reduced_texts(net, blocks);
    ensure!(got == expected, "blocks {got:#?}");

    let (verdict, size) = verify_expression(
        net,
        legal,
        &trace.final_expression(),
        &[4; 4],
        OracleOptions::default(),
    )
    .map_err(err)?;
    ensure!(verdict == Verdict::Equal, "oracle verdict {verdict:?}");
    Ok(format!("oracle equal over {size} markings"))
}

fn cascade_trace() -> Outcome {
    let f = load(CASCADE);
    let net = &f.net;
    let legal = &f.constraints["legal"];
    let prefix: Vec<TransitionId> = ["t1", "t2", "t4", "t3", "t5", "t6"]
        .iter()
        .map(|n| tid(net, n))
        .collect();
    let replayed = replay_sequence(net, legal, &prefix).map_err(err)?;
    let base = "m(p1)+m(p2)+m(p3)";
    let stages: Vec<Vec<String>> = vec![
        vec!["m(p1)+m(p2) <= 3".into()],
        vec![format!("{base} <= 3")],
        vec![format!("{base}+m(p5) <= 3")],
        vec![
            format!("{base}+m(p4)+m(p5) <= 3"),
            format!("{base}+2m(p5) <= 3"),
        ],
        vec![
            format!("{base}+m(p4)+m(p5)+m(p6) <= 3"),
            format!("{base}+m(p4)+m(p5)+m(p7) <= 3"),
            format!("{base}+2m(p5)+m(p6) <= 3"),
            format!("{base}+2m(p5)+m(p7) <= 3"),
        ],
        vec![
            format!("{base}+m(p4)+m(p5)+m(p6)+m(p8) <= 3"),
            format!("{base}+m(p4)+m(p5)+m(p7)+m(p8) <= 3"),
            format!("{base}+2m(p5)+m(p6)+m(p8) <= 3"),
            format!("{base}+2m(p5)+m(p7)+m(p8) <= 3"),
        ],
    ];
    ensure!(
        replayed.steps.len() == stages.len(),
        "replayed {} steps",
        replayed.steps.len()
    );
    for (n, (step, want)) in replayed.steps.iter().zip(&stages).enumerate() {
        ensure!(!step.result.has_blocks(), "stage {} has blocks", n + 1);
        let got = plain_forms(net, &step.result.plain);
        ensure!(&got == want, "stage {}: {got:?}", n + 1);
    }

    let trace = transform_to_admissible(net, legal, DriverOptions::default()).map_err(err)?;
    let sigma = names(net, &trace.sigma());
    ensure!(
        sigma == ["t1", "t2", "t4", "t3", "t5", "t6", "t7"],
        "sigma {sigma:?}"
    );
    let last = &trace.steps[6].result;
    ensure!(
        pairs(last) == [(1, 0), (1, 2), (3, 0), (3, 2)],
        "groups {:?}",
        pairs(last)
    );
    let a = format!("{base}+m(p4)+m(p5)+m(p6)+m(p8)");
    let b = format!("{base}+m(p4)+m(p5)+m(p7)+m(p8)");
    let c = format!("{base}+2m(p5)+m(p6)+m(p8)");
    let d = format!("{base}+2m(p5)+m(p7)+m(p8)");
    for (i, j, esc, rec) in [
        (1, 0, &b, &a),
        (1, 2, &b, &c),
        (3, 0, &d, &a),
        (3, 2, &d, &c),
    ] {
        let got = reduced_texts(net, group(last, i, j)?);
        ensure!(
            got == unit_gain_table("p6", esc, rec),
            "group ({i},{j}): {got:#?}"
        );
    }

    let bounds = vec![CASCADE_BOUND; net.place_count()];
    let (verdict, size) = verify_expression(
        net,
        legal,
        &trace.final_expression(),
        &bounds,
        OracleOptions::default(),
    )
    .map_err(err)?;
    ensure!(
        verdict == Verdict::Equal,
        "oracle verdict after t7 {verdict:?}"
    );
    Ok(format!("oracle equal over {size} markings"))
}

fn weak_counterexample() -> Outcome {
    let f = load(ASSEMBLY);
    let net = &f.net;
    let legal = &f.constraints["legal"];
    let m = marking(&[0, 0, 0, 1, 2]);
    let explored = uncontrollable_explore(net, &m, |x| !legal.holds(x), ExploreCaps::default())
        .map_err(err)?;
    ensure!(
        explored == ExploreVerdict::Admissible,
        "exploration {explored:?}"
    );

    let trace = transform_to_admissible(net, legal, DriverOptions::default()).map_err(err)?;
    ensure!(
        trace.final_expression().evaluate(&m).map_err(err)?,
        "rejected by the transformed expression"
    );

    let weak: ConstraintSet = [
        f.constraints["weak2"].clone(),
        f.constraints["weak3"].clone(),
    ]
    .into_iter()
    .collect();
    ensure!(
        !weak.holds(&m),
        "accepted by the weakly admissible expression"
    );

    let expr = LogicExpression::from_constraints(net.place_count(), &weak);
    let (verdict, _) =
        verify_expression(net, legal, &expr, &[4; 5], OracleOptions::default()).map_err(err)?;
    let Verdict::Counterexample {
        marking: found,
        admissible,
    } = verdict
    else {
        return Err(format!("oracle verdict {verdict:?}"));
    };
    ensure!(admissible, "counterexample {found} is not admissible");
    let (own, _) = verify_expression(
        net,
        legal,
        &trace.final_expression(),
        &[4; 5],
        OracleOptions::default(),
    )
    .map_err(err)?;
    ensure!(
        own == Verdict::Equal,
        "transformed expression verdict {own:?}"
    );
    Ok(format!("first counterexample {found}"))
}

#[derive(Default)]
struct Stats {
    drawn: usize,
    conclusive: usize,
    discarded: usize,
    transitions: usize,
    block_groups: usize,
    self_loop_exclusions: usize,
    complete_traces: usize,
}

fn random_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(RANDOM_SEED);
    let mut stats = Stats::default();
    while stats.conclusive < RANDOM_CASES {
        let case = random_case(&mut rng);
        stats.drawn += 1;
        match check_case(&case, &mut stats) {
            Ok(true) => stats.conclusive += 1,
            Ok(false) => stats.discarded += 1,
            Err(why) => {
                return Err(format!(
                    "draw {}: {why}\nconstraints {:?} bounds {:?}\n{:?}",
                    stats.drawn, case.constraints, case.bounds, case.net
                ))
            }
        }
    }
    ensure!(
        stats.discarded * 100 <= stats.drawn * DISCARD_PERCENT,
        "{} of {} draws inconclusive",
        stats.discarded,
        stats.drawn
    );
    Ok(format!(
        "{} cases, {} discarded, {} transitions, {} block groups, {} self-loop exclusions, {} complete traces",
        stats.conclusive,
        stats.discarded,
        stats.transitions,
        stats.block_groups,
        stats.self_loop_exclusions,
        stats.complete_traces
    ))
}

fn has_self_loop(net: &PetriNet, t: TransitionId) -> bool {
    let tr = net.transition(t).unwrap();
    tr.preset.iter().any(|p| tr.has_output(*p))
}

/// Admissible set inside the universe, or `None` when the oracle gives up.
fn admissible<P: admissify::orbit::MarkingPredicate + ?Sized>(
    net: &PetriNet,
    legal: &P,
    universe: &ExplicitMarkingSet,
) -> Result<Option<ExplicitMarkingSet>, String> {
    match admissible_within(net, legal, universe, RANDOM_NODE_CAP) {
        Ok(a) => Ok(Some(a)),
        Err(Error::Inconclusive) => Ok(None),
        Err(e) => Err(e.to_string()),
    }
}

/// Members of `universe` in the complementary-marking set from `ci` to `cj`:
/// outside `cj`, and the first `t`-orbit marking outside `ci` lies in `cj`.
fn complementary_oracle(
    net: &PetriNet,
    ci: &LinearConstraint,
    cj: &LinearConstraint,
    t: TransitionId,
    universe: &ExplicitMarkingSet,
) -> ExplicitMarkingSet {
    let members = universe.iter().filter(|m| {
        ci.holds(m)
            && !cj.holds(m)
            && first_exit(net, m, t, |x| ci.holds(x)).is_some_and(|exit| cj.holds(&exit))
    });
    ExplicitMarkingSet::from_markings(universe.dim(), members.cloned()).unwrap()
}

fn check_case(case: &RandomCase, stats: &mut Stats) -> Result<bool, String> {
    let net = &case.net;
    let universe = bounded_universe(&case.bounds, DEFAULT_UNIVERSE_LIMIT).map_err(err)?;
    let (c1, c2) = (&case.constraints[0], &case.constraints[1]);
    let q1 = universe.filter(c1);
    let q2 = universe.filter(c2);
    let w: ConstraintSet = [c1.clone(), c2.clone()].into_iter().collect();
    let w3: ConstraintSet = case.constraints.iter().cloned().collect();

    for t in net.uncontrollable().collect::<Vec<_>>() {
        stats.transitions += 1;
        let self_loop = has_self_loop(net, t);

        // Transforming set: a subset, and exactly the members whose orbit stays.
        let qt = transforming_set(net, &q1, t).map_err(err)?;
        ensure!(qt.is_subset(&q1), "explicit transforming set leaves Q");
        let by_walk = q1.filter(&|m: &Marking| orbit_within(net, m, t, |x| q1.contains(x)));
        ensure!(
            qt == by_walk,
            "explicit transforming set differs from orbit walk"
        );
        let qt_linear = transforming_within(net, c1, &universe, t).map_err(err)?;
        let by_walk = q1.filter(&|m: &Marking| orbit_within(net, m, t, |x| c1.holds(x)));
        ensure!(
            qt_linear == by_walk,
            "linear transforming set differs from orbit walk"
        );

        // Idempotence.
        ensure!(
            transforming_set(net, &qt, t).map_err(err)? == qt,
            "transforming set not idempotent"
        );
        ensure!(
            escaping_set(net, &qt, t).map_err(err)?.is_empty(),
            "transforming set still escapes"
        );

        // Single-constraint transformation describes the transforming set.
        let single = transform_single(c1, t, net).map_err(err)?;
        ensure!(
            expression_members(&single, &universe) == qt_linear,
            "transform_single differs from the transforming set via {t:?}"
        );

        // Gain of the rewritten constraint.
        let gain = transition_weight(c1, t, net).map_err(err)?;
        if gain > 0 {
            let tr = net.transition(t).unwrap();
            for &p in &tr.preset {
                let rho = utgt_rho(c1, t, p, net).map_err(err)?;
                let new_gain = transition_weight(&rho, t, net).map_err(err)?;
                let expected = if tr.has_output(p) { gain } else { 0 };
                ensure!(
                    new_gain == expected,
                    "rewritten gain {new_gain} at {p:?}, expected {expected}"
                );
            }
        }

        // Union transform against the transforming set of the union.
        let via_union = union_transform(net, &q1, &q2, t).map_err(err)?;
        let direct = transforming_set(net, &q1.union(&q2), t).map_err(err)?;
        ensure!(
            via_union == direct,
            "union transform differs from the transforming set of the union"
        );

        // Complementary blocks: empty without a (+,-) pair, else the oracle set.
        for (i, ci) in w3.iter().enumerate() {
            for (j, cj) in w3.iter().enumerate() {
                if i == j {
                    continue;
                }
                let blocks = complementary_blocks((i, j), ci, cj, t, net).map_err(err)?;
                let oracle = complementary_oracle(net, ci, cj, t, &universe);
                let gi = transition_weight(ci, t, net).map_err(err)?;
                let gj = transition_weight(cj, t, net).map_err(err)?;
                if gi <= 0 || gj >= 0 {
                    ensure!(blocks.is_empty(), "blocks without a (+,-) pair");
                    ensure!(
                        oracle.is_empty(),
                        "complementary set nonempty without a (+,-) pair"
                    );
                    continue;
                }
                stats.block_groups += 1;
                if self_loop {
                    stats.self_loop_exclusions += 1;
                    continue;
                }
                let expr = LogicExpression::new(net.place_count(), blocks);
                ensure!(
                    expression_members(&expr, &universe) == oracle,
                    "blocks ({i},{j}) differ from the complementary set"
                );
            }
        }

        // The disjunction step describes the transforming set of the disjunction.
        let step = transform_disjunction_step(&w3, t, net).map_err(err)?;
        if self_loop && step.has_blocks() {
            stats.self_loop_exclusions += 1;
        } else {
            let members = expression_members(&step.to_expression(net.place_count()), &universe);
            let expected = transforming_within(net, &w3, &universe, t).map_err(err)?;
            ensure!(
                members == expected,
                "disjunction step differs from the transforming set via {t:?}"
            );
        }
    }

    // Driver trace: shrinking chain, each step keeps the admissible set.
    let Some(a1) = admissible(net, c1, &universe)? else {
        return Ok(false);
    };
    let options = DriverOptions {
        lookahead: 1,
        max_steps: 12,
    };
    let trace = transform_to_admissible(net, c1, options).map_err(err)?;
    let mut previous = q1.clone();
    let mut exact = true;
    for (n, step) in trace.steps.iter().enumerate() {
        if has_self_loop(net, step.transition) && step.result.has_blocks() {
            exact = false;
            break;
        }
        let members = expression_members(&step.expression, &universe);
        ensure!(members.is_subset(&previous), "step {} grows the set", n + 1);
        ensure!(
            a1.is_subset(&members),
            "step {} loses admissible markings",
            n + 1
        );
        let Some(a) = admissible(net, &step.expression, &universe)? else {
            return Ok(false);
        };
        ensure!(a == a1, "step {} changes the admissible set", n + 1);
        previous = members;
    }
    if exact && trace.status.is_complete() {
        stats.complete_traces += 1;
        ensure!(
            previous == a1,
            "complete trace differs from the admissible set"
        );
    }
    if let TraceStatus::Unsatisfiable(_) = trace.status {
        ensure!(
            a1.is_empty(),
            "unsatisfiable trace with admissible markings"
        );
    }

    // Admissible set of a union contains the union of admissible sets.
    let Some(a2) = admissible(net, c2, &universe)? else {
        return Ok(false);
    };
    let Some(a12) = admissible(net, &w, &universe)? else {
        return Ok(false);
    };
    ensure!(
        a1.union(&a2).is_subset(&a12),
        "admissible set of the union too small"
    );
    Ok(true)
}

//! Text and JSON renderings of expressions and transformation traces.

use indexmap::IndexMap;
use serde::Serialize;

use crate::constraint::LinearConstraint;
use crate::driver::{TraceStatus, TransformationTrace};
use crate::expression::{
    block_satisfiable_bounded, reduce_block, Atom, BlockOrigin, ConjunctionBlock, LogicExpression,
    Relation,
};
use crate::net::PetriNet;

/// `m(p1)+2m(p3)`, or `0` for the zero vector.
pub fn linear_form(net: &PetriNet, weights: &[i64]) -> String {
    let terms: Vec<String> = weights
        .iter()
        .enumerate()
        .filter(|(_, w)| **w != 0)
        .map(|(p, w)| {
            let name = &net.place_names()[p];
            if *w == 1 {
                format!("m({name})")
            } else {
                format!("{w}m({name})")
            }
        })
        .collect();
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join("+")
    }
}

pub fn render_linear_constraint(net: &PetriNet, c: &LinearConstraint) -> String {
    format!("{} <= {}", linear_form(net, c.weights()), c.bound())
}

fn render_atom(net: &PetriNet, a: &Atom) -> String {
    let op = match a.rel {
        Relation::Le => "<=",
        Relation::Ge => ">=",
    };
    format!("{} {op} {}", linear_form(net, &a.weights), a.bound)
}

/// Conditions of a reduced block; a `≥`/`≤` pair on the same form is shown
/// as an equality or a two-sided interval.
fn block_conditions(net: &PetriNet, b: &ConjunctionBlock) -> Vec<String> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.atoms.len() {
        let a = &b.atoms[i];
        if let Some(next) = b.atoms.get(i + 1) {
            if a.rel == Relation::Ge && next.rel == Relation::Le && a.weights == next.weights {
                let form = linear_form(net, &a.weights);
                out.push(if a.bound == next.bound {
                    format!("{form} = {}", a.bound)
                } else {
                    format!("{} <= {form} <= {}", a.bound, next.bound)
                });
                i += 2;
                continue;
            }
        }
        out.push(render_atom(net, a));
        i += 1;
    }
    out
}

/// Reduces `b` and renders it, or `None` if it has no satisfying marking.
pub fn render_block(net: &PetriNet, b: &ConjunctionBlock) -> Option<String> {
    if let (true, [a]) = (b.is_plain(), b.atoms.as_slice()) {
        return Some(render_atom(net, a));
    }
    let reduced = reduce_block(b);
    if !block_satisfiable_bounded(&reduced, None) {
        return None;
    }
    Some(render_reduced_block(net, b))
}

/// Reduced form of `b`, shown even when no marking satisfies it.
pub fn render_reduced_block(net: &PetriNet, b: &ConjunctionBlock) -> String {
    format!(
        "{{ {} }}",
        block_conditions(net, &reduce_block(b)).join(" ∧ ")
    )
}

/// One disjunct per line, joined by `∨`.
pub fn render_expression(net: &PetriNet, expr: &LogicExpression) -> String {
    let lines: Vec<String> = expr
        .blocks()
        .iter()
        .filter_map(|b| render_block(net, b))
        .collect();
    if lines.is_empty() {
        return "FALSE (empty marking set)".to_string();
    }
    lines.join("\n∨ ")
}

pub fn status_label(status: &TraceStatus) -> &'static str {
    match status {
        TraceStatus::Complete => "complete",
        TraceStatus::CompleteWithBlocks => "complete-with-blocks",
        TraceStatus::StepLimit => "step-limit",
        TraceStatus::Unsatisfiable(_) => "unsatisfiable",
        TraceStatus::OpenWithBlocks(_) => "open-with-blocks",
        TraceStatus::Incomplete(_) => "incomplete",
    }
}

fn indent(text: &str) -> String {
    text.lines().map(|l| format!("  {l}\n")).collect()
}

pub struct Style {
    pub color: bool,
}

impl Style {
    fn heading(&self, text: &str) -> String {
        if self.color {
            format!("\x1b[1m{text}\x1b[0m")
        } else {
            text.to_string()
        }
    }
}

pub fn render_trace_text(net: &PetriNet, trace: &TransformationTrace, style: &Style) -> String {
    let mut out = String::new();
    out.push_str(&format!("{} {}\n", style.heading("net"), net.name()));
    out.push_str(&format!(
        "{} {}\n",
        style.heading("constraint"),
        render_linear_constraint(net, &trace.initial)
    ));
    let mut prefix = String::new();
    for (n, step) in trace.steps.iter().enumerate() {
        let name = &net.transitions()[step.transition.0].name;
        prefix.push_str(if prefix.is_empty() { "" } else { " " });
        prefix.push_str(name);
        out.push_str(&format!(
            "{} {} via {name} [{prefix}]\n",
            style.heading("step"),
            n + 1
        ));
        out.push_str(&indent(&render_expression(net, &step.expression)));
    }
    let sigma: Vec<&str> = trace
        .sigma()
        .iter()
        .map(|t| net.transitions()[t.0].name.as_str())
        .collect();
    out.push_str(&format!("{} {}\n", style.heading("sigma"), sigma.join(" ")));
    out.push_str(&format!(
        "{} {}",
        style.heading("status"),
        status_label(&trace.status)
    ));
    match &trace.status {
        TraceStatus::Unsatisfiable(t) => out.push_str(&format!(
            " (uncontrollable source transition {} has positive gain)",
            net.transitions()[t.0].name
        )),
        TraceStatus::OpenWithBlocks(pending) | TraceStatus::Incomplete(pending) => {
            let names: Vec<&str> = pending
                .iter()
                .map(|t| net.transitions()[t.0].name.as_str())
                .collect();
            out.push_str(&format!(" (pending: {})", names.join(" ")));
        }
        _ => {}
    }
    out.push('\n');
    out.push_str(&format!("{}\n", style.heading("result")));
    out.push_str(&indent(&render_expression(net, &trace.final_expression())));
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AtomJson {
    pub weights: IndexMap<String, i64>,
    pub rel: &'static str,
    pub bound: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OriginJson {
    pub i: usize,
    pub j: usize,
    pub transition: String,
    pub lambda: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockJson {
    pub origin: OriginJson,
    pub atoms: Vec<AtomJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExpressionJson {
    pub plain: Vec<AtomJson>,
    pub blocks: Vec<BlockJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepJson {
    pub transition: String,
    pub expression: ExpressionJson,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerdictJson {
    pub result: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub marking: Option<IndexMap<String, u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<&'static str>,
    pub bounds: IndexMap<String, u32>,
    pub universe_size: usize,
    pub node_cap: usize,
    pub state_cap: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportJson {
    pub net: String,
    pub constraint: AtomJson,
    pub sigma: Vec<String>,
    pub status: &'static str,
    pub steps: Vec<StepJson>,
    #[serde(rename = "final")]
    pub final_expression: ExpressionJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<VerdictJson>,
}

pub fn atom_json(net: &PetriNet, a: &Atom) -> AtomJson {
    AtomJson {
        weights: a
            .weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w != 0)
            .map(|(p, w)| (net.place_names()[p].clone(), *w))
            .collect(),
        rel: match a.rel {
            Relation::Le => "<=",
            Relation::Ge => ">=",
        },
        bound: a.bound,
    }
}

/// Plain constraints as they are; delta blocks reduced, unsatisfiable ones
/// left out.
pub fn expression_json(net: &PetriNet, expr: &LogicExpression) -> ExpressionJson {
    let mut plain = Vec::new();
    let mut blocks = Vec::new();
    for b in expr.blocks() {
        match b.origin {
            BlockOrigin::Plain => plain.extend(b.atoms.iter().map(|a| atom_json(net, a))),
            BlockOrigin::Delta(tag) => {
                let reduced = reduce_block(b);
                if !block_satisfiable_bounded(&reduced, None) {
                    continue;
                }
                blocks.push(BlockJson {
                    origin: OriginJson {
                        i: tag.i,
                        j: tag.j,
                        transition: net.transitions()[tag.transition.0].name.clone(),
                        lambda: tag.lambda,
                    },
                    atoms: reduced.atoms.iter().map(|a| atom_json(net, a)).collect(),
                });
            }
        }
    }
    ExpressionJson { plain, blocks }
}

pub fn trace_report(net: &PetriNet, trace: &TransformationTrace) -> ReportJson {
    let name_of = |t: crate::net::TransitionId| net.transitions()[t.0].name.clone();
    ReportJson {
        net: net.name().to_string(),
        constraint: atom_json(
            net,
            &Atom::le(trace.initial.weights().to_vec(), trace.initial.bound()),
        ),
        sigma: trace.sigma().into_iter().map(name_of).collect(),
        status: status_label(&trace.status),
        steps: trace
            .steps
            .iter()
            .map(|s| StepJson {
                transition: name_of(s.transition),
                expression: expression_json(net, &s.expression),
            })
            .collect(),
        final_expression: expression_json(net, &trace.final_expression()),
        verdict: None,
    }
}

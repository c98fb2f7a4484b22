//! Line-oriented net description format.
//!
//! ```text
//! # comment
//! net fig6
//! place p1 init=2
//! trans t1 unctrl
//! arc p1 -> t1
//! arc t1 -> p2
//! constraint legal: 1 p1 + 1 p2 <= 3
//! ```
//!
//! Declarations may appear in any order; arcs and constraints are resolved
//! after every place and transition is known.

use std::fmt::Write as _;

use indexmap::IndexMap;

use crate::constraint::LinearConstraint;
use crate::error::{Error, Result};
use crate::net::{Control, Marking, PetriNet};

#[derive(Debug, Clone)]
pub struct NetFile {
    pub net: PetriNet,
    /// Parsed and kept for round-trips; transformation ignores it.
    pub initial: Marking,
    pub constraints: IndexMap<String, LinearConstraint>,
    arcs: Vec<(String, String)>,
}

fn syntax(line: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        message: message.into(),
    }
}

fn ident(line: usize, token: Option<&str>, what: &str) -> Result<String> {
    match token {
        Some(t)
            if t.chars()
                .all(|c| c.is_alphanumeric() || c == '_' || c == '.' || c == '-')
                && !t.is_empty() =>
        {
            Ok(t.to_string())
        }
        Some(t) => Err(syntax(line, format!("invalid {what} `{t}`"))),
        None => Err(syntax(line, format!("missing {what}"))),
    }
}

fn number<T: std::str::FromStr>(line: usize, token: &str, what: &str) -> Result<T> {
    token
        .parse()
        .map_err(|_| syntax(line, format!("invalid {what} `{token}`")))
}

pub fn parse_net(text: &str) -> Result<NetFile> {
    let mut name: Option<String> = None;
    let mut places: Vec<(String, u32)> = Vec::new();
    let mut transitions: Vec<(String, Control)> = Vec::new();
    let mut arcs: Vec<(usize, String, String, u32)> = Vec::new();
    let mut constraints: Vec<(usize, String, String)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let keyword = tokens.next().unwrap_or_default();
        match keyword {
            "net" => {
                if name.is_some() {
                    return Err(syntax(line, "duplicate `net` line"));
                }
                name = Some(ident(line, tokens.next(), "net name")?);
                expect_end(line, tokens)?;
            }
            "place" => {
                let id = ident(line, tokens.next(), "place name")?;
                let mut init = 0;
                if let Some(opt) = tokens.next() {
                    let value = opt
                        .strip_prefix("init=")
                        .ok_or_else(|| syntax(line, format!("unexpected `{opt}`")))?;
                    init = number(line, value, "initial marking")?;
                }
                expect_end(line, tokens)?;
                places.push((id, init));
            }
            "trans" => {
                let id = ident(line, tokens.next(), "transition name")?;
                let control = match tokens.next() {
                    Some("ctrl") => Control::Controllable,
                    Some("unctrl") => Control::Uncontrollable,
                    Some(other) => {
                        return Err(syntax(
                            line,
                            format!("expected `ctrl` or `unctrl`, found `{other}`"),
                        ))
                    }
                    None => return Err(syntax(line, "expected `ctrl` or `unctrl`")),
                };
                expect_end(line, tokens)?;
                transitions.push((id, control));
            }
            "arc" => {
                let from = ident(line, tokens.next(), "arc source")?;
                if tokens.next() != Some("->") {
                    return Err(syntax(line, "expected `->`"));
                }
                let to = ident(line, tokens.next(), "arc target")?;
                let mut weight = 1;
                if let Some(opt) = tokens.next() {
                    let value = opt
                        .strip_prefix("weight=")
                        .ok_or_else(|| syntax(line, format!("unexpected `{opt}`")))?;
                    weight = number(line, value, "arc weight")?;
                }
                expect_end(line, tokens)?;
                arcs.push((line, from, to, weight));
            }
            "constraint" => {
                let rest = content["constraint".len()..].trim();
                let (cname, body) = rest
                    .split_once(':')
                    .ok_or_else(|| syntax(line, "expected `constraint <name>: <expr> <= <k>`"))?;
                let cname = ident(line, Some(cname.trim()), "constraint name")?;
                constraints.push((line, cname, body.trim().to_string()));
            }
            other => return Err(syntax(line, format!("unknown declaration `{other}`"))),
        }
    }

    let name = name.ok_or_else(|| syntax(1, "missing `net <name>` line"))?;
    let mut builder = PetriNet::builder(name);
    for (p, _) in &places {
        builder = builder.place(p.clone());
    }
    for (t, control) in &transitions {
        builder = builder.transition(t.clone(), *control);
    }
    for (_, from, to, weight) in &arcs {
        builder = builder.weighted_arc(from.clone(), to.clone(), *weight);
    }
    let net = builder.build()?;
    let initial = Marking(places.iter().map(|(_, init)| *init).collect());

    let mut named = IndexMap::new();
    for (line, cname, body) in constraints {
        let c = parse_constraint_at(&net, &body, line)?;
        if named.insert(cname.clone(), c).is_some() {
            return Err(Error::DuplicateId(cname));
        }
    }
    Ok(NetFile {
        net,
        initial,
        constraints: named,
        arcs: arcs.into_iter().map(|(_, f, t, _)| (f, t)).collect(),
    })
}

fn expect_end<'a>(line: usize, mut tokens: impl Iterator<Item = &'a str>) -> Result<()> {
    match tokens.next() {
        None => Ok(()),
        Some(extra) => Err(syntax(line, format!("unexpected `{extra}`"))),
    }
}

/// Parses `<c> <p> [+ <c> <p>]* <= <k>` against `net`.
pub fn parse_constraint(net: &PetriNet, text: &str) -> Result<LinearConstraint> {
    parse_constraint_at(net, text, 1)
}

fn parse_constraint_at(net: &PetriNet, text: &str, line: usize) -> Result<LinearConstraint> {
    let (lhs, rhs) = text
        .split_once("<=")
        .ok_or_else(|| syntax(line, "constraint needs `<=`"))?;
    let bound: i64 = number(line, rhs.trim(), "bound")?;
    let mut weights = vec![0i64; net.place_count()];
    for term in lhs.split('+') {
        let mut parts = term.split_whitespace();
        let (Some(coeff), Some(place), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(syntax(
                line,
                format!("expected `<coefficient> <place>`, found `{}`", term.trim()),
            ));
        };
        let coeff: u32 = number(line, coeff, "coefficient")?;
        let p = net.place_id(place)?;
        weights[p.0] += i64::from(coeff);
    }
    LinearConstraint::new(weights, bound)
}

pub fn render_constraint(net: &PetriNet, c: &LinearConstraint) -> String {
    let terms: Vec<String> = c
        .weights()
        .iter()
        .enumerate()
        .filter(|(_, w)| **w != 0)
        .map(|(p, w)| format!("{w} {}", net.place_names()[p]))
        .collect();
    let lhs = if terms.is_empty() {
        format!("0 {}", net.place_names().first().map_or("", String::as_str))
    } else {
        terms.join(" + ")
    };
    format!("{lhs} <= {}", c.bound())
}

/// Inverse of [`parse_net`] up to whitespace and comments.
pub fn render_net(file: &NetFile) -> String {
    let net = &file.net;
    let mut out = String::new();
    let _ = writeln!(out, "net {}", net.name());
    for (p, name) in net.place_names().iter().enumerate() {
        match file.initial.0.get(p).copied().unwrap_or(0) {
            0 => {
                let _ = writeln!(out, "place {name}");
            }
            n => {
                let _ = writeln!(out, "place {name} init={n}");
            }
        }
    }
    for t in net.transitions() {
        let flag = if t.is_uncontrollable() {
            "unctrl"
        } else {
            "ctrl"
        };
        let _ = writeln!(out, "trans {} {flag}", t.name);
    }
    for (from, to) in &file.arcs {
        let _ = writeln!(out, "arc {from} -> {to}");
    }
    for (name, c) in &file.constraints {
        let _ = writeln!(out, "constraint {name}: {}", render_constraint(net, c));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "\
# two places
net small
place p1 init=2
place p2
trans t1 unctrl   # moves a token
trans t2 ctrl
arc p1 -> t1
arc t1 -> p2
arc p2 -> t2
constraint legal: 1 p1 + 2 p2 <= 3
";

    #[test]
    fn parses_small_net() {
        let f = parse_net(SMALL).unwrap();
        assert_eq!(f.net.name(), "small");
        assert_eq!(f.initial, Marking(vec![2, 0]));
        assert_eq!(f.net.uncontrollable().count(), 1);
        assert_eq!(
            f.constraints["legal"],
            LinearConstraint::new(vec![1, 2], 3).unwrap()
        );
    }

    #[test]
    fn round_trip() {
        let f = parse_net(SMALL).unwrap();
        let text = render_net(&f);
        let g = parse_net(&text).unwrap();
        assert_eq!(render_net(&g), text);
        assert_eq!(g.constraints, f.constraints);
        assert_eq!(g.initial, f.initial);
        assert_eq!(g.net.incidence(), f.net.incidence());
    }

    #[test]
    fn syntax_errors_carry_line() {
        let err = parse_net("net x\nplace p\ntrans t9 weird\n").unwrap_err();
        assert_eq!(
            err,
            Error::Syntax {
                line: 3,
                message: "expected `ctrl` or `unctrl`, found `weird`".into()
            }
        );
        assert!(matches!(parse_net("place p\n"), Err(Error::Syntax { .. })));
        assert!(matches!(
            parse_net("net x\nplace p\nconstraint c: -1 p <= 2\n"),
            Err(Error::Syntax { line: 3, .. })
        ));
    }

    #[test]
    fn semantic_errors() {
        assert!(matches!(
            parse_net("net x\nplace p\ntrans t unctrl\narc p9 -> t\n"),
            Err(Error::DanglingArc(_))
        ));
        assert!(matches!(
            parse_net("net x\nplace p\ntrans t unctrl\narc p -> t weight=2\n"),
            Err(Error::NonOrdinaryArc { weight: 2, .. })
        ));
    }

    #[test]
    fn inline_constraint() {
        let f = parse_net(SMALL).unwrap();
        let c = parse_constraint(&f.net, "1 p1 + 1 p2 <= 3").unwrap();
        assert_eq!(c, LinearConstraint::new(vec![1, 1], 3).unwrap());
        assert!(matches!(
            parse_constraint(&f.net, "1 p1 <= -1"),
            Err(Error::NegativeBound(-1))
        ));
        assert!(parse_constraint(&f.net, "1 p7 <= 1").is_err());
    }
}

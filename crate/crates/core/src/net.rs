//! Ordinary Petri nets with a controllable/uncontrollable transition split.
//!
//! Arcs carry implicit weight 1. A place that is both an input and an output
//! of the same transition (a self-loop) keeps its preset/postset membership,
//! while its incidence entry is 0.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlaceId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TransitionId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Control {
    Controllable,
    Uncontrollable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub name: String,
    pub control: Control,
    /// Input places, sorted by index.
    pub preset: Vec<PlaceId>,
    /// Output places, sorted by index.
    pub postset: Vec<PlaceId>,
}

impl Transition {
    pub fn is_uncontrollable(&self) -> bool {
        self.control == Control::Uncontrollable
    }

    pub fn has_input(&self, p: PlaceId) -> bool {
        self.preset.binary_search(&p).is_ok()
    }

    pub fn has_output(&self, p: PlaceId) -> bool {
        self.postset.binary_search(&p).is_ok()
    }

    /// Whether every input place is also an output place.
    pub fn preset_within_postset(&self) -> bool {
        self.preset.iter().all(|p| self.has_output(*p))
    }
}

/// Token counts indexed by place.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Marking(pub Vec<u32>);

impl Marking {
    pub fn zero(places: usize) -> Self {
        Marking(vec![0; places])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, p: PlaceId) -> u32 {
        self.0[p.0]
    }

    pub fn tokens(&self) -> &[u32] {
        &self.0
    }

    /// `self + times * delta`, or `None` if a component would go negative.
    pub fn shifted(&self, delta: &[i64], times: u64) -> Option<Marking> {
        let times = i64::try_from(times).ok()?;
        self.0
            .iter()
            .zip(delta)
            .map(|(&v, &d)| {
                let next = i64::from(v) + d * times;
                u32::try_from(next).ok()
            })
            .collect::<Option<Vec<_>>>()
            .map(Marking)
    }
}

impl From<Vec<u32>> for Marking {
    fn from(v: Vec<u32>) -> Self {
        Marking(v)
    }
}

impl fmt::Display for Marking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// `|P| x |T|` matrix with entries in {-1, 0, 1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    rows: Vec<Vec<i8>>,
}

impl IncidenceMatrix {
    pub fn get(&self, p: PlaceId, t: TransitionId) -> i8 {
        self.rows[p.0][t.0]
    }

    pub fn column(&self, t: TransitionId) -> Vec<i64> {
        self.rows.iter().map(|r| i64::from(r[t.0])).collect()
    }

    pub fn rows(&self) -> &[Vec<i8>] {
        &self.rows
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PetriNet {
    name: String,
    places: Vec<String>,
    transitions: Vec<Transition>,
    place_index: HashMap<String, PlaceId>,
    transition_index: HashMap<String, TransitionId>,
    /// Incidence columns, one per transition.
    deltas: Vec<Vec<i64>>,
}

impl PetriNet {
    pub fn builder(name: impl Into<String>) -> NetBuilder {
        NetBuilder::new(name)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn place_count(&self) -> usize {
        self.places.len()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn place_names(&self) -> &[String] {
        &self.places
    }

    pub fn place_name(&self, p: PlaceId) -> &str {
        &self.places[p.0]
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transition_ids(&self) -> impl Iterator<Item = TransitionId> + '_ {
        (0..self.transitions.len()).map(TransitionId)
    }

    pub fn uncontrollable(&self) -> impl Iterator<Item = TransitionId> + '_ {
        self.transition_ids()
            .filter(|t| self.transitions[t.0].is_uncontrollable())
    }

    pub fn place_id(&self, name: &str) -> Result<PlaceId> {
        self.place_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownPlace(name.to_string()))
    }

    pub fn transition_id(&self, name: &str) -> Result<TransitionId> {
        self.transition_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownTransition(name.to_string()))
    }

    pub fn transition(&self, t: TransitionId) -> Result<&Transition> {
        self.transitions
            .get(t.0)
            .ok_or_else(|| Error::UnknownTransition(format!("#{}", t.0)))
    }

    pub fn preset(&self, t: TransitionId) -> Result<&[PlaceId]> {
        Ok(&self.transition(t)?.preset)
    }

    pub fn postset(&self, t: TransitionId) -> Result<&[PlaceId]> {
        Ok(&self.transition(t)?.postset)
    }

    /// Column `Δ_t` of the incidence matrix.
    pub fn delta(&self, t: TransitionId) -> Result<&[i64]> {
        self.transition(t)?;
        Ok(&self.deltas[t.0])
    }

    pub fn incidence(&self) -> IncidenceMatrix {
        let rows = (0..self.places.len())
            .map(|p| self.deltas.iter().map(|col| col[p] as i8).collect())
            .collect();
        IncidenceMatrix { rows }
    }

    pub fn check_marking(&self, m: &Marking) -> Result<()> {
        if m.len() != self.places.len() {
            return Err(Error::DimensionMismatch {
                expected: self.places.len(),
                found: m.len(),
            });
        }
        Ok(())
    }

    pub fn enabled(&self, m: &Marking, t: TransitionId) -> Result<bool> {
        self.check_marking(m)?;
        Ok(self.transition(t)?.preset.iter().all(|p| m.get(*p) > 0))
    }

    pub fn fire(&self, m: &Marking, t: TransitionId) -> Result<Marking> {
        if !self.enabled(m, t)? {
            return Err(Error::NotEnabled(self.transitions[t.0].name.clone()));
        }
        Ok(m.shifted(&self.deltas[t.0], 1)
            .expect("enabled transition keeps the marking nonnegative"))
    }

    /// Builds a marking from `(place, tokens)` pairs; unlisted places are empty.
    pub fn marking(&self, tokens: &[(&str, u32)]) -> Result<Marking> {
        let mut m = Marking::zero(self.place_count());
        for (name, n) in tokens {
            m.0[self.place_id(name)?.0] = *n;
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NodeKind {
    Place,
    Transition,
}

/// Accumulates declarations; `build` validates them.
#[derive(Debug, Clone, Default)]
pub struct NetBuilder {
    name: String,
    places: Vec<String>,
    transitions: Vec<(String, Control)>,
    arcs: Vec<(String, String, u32)>,
}

impl NetBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        NetBuilder {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn place(mut self, id: impl Into<String>) -> Self {
        self.places.push(id.into());
        self
    }

    pub fn places<I, S>(mut self, ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.places.extend(ids.into_iter().map(Into::into));
        self
    }

    pub fn transition(mut self, id: impl Into<String>, control: Control) -> Self {
        self.transitions.push((id.into(), control));
        self
    }

    pub fn uncontrollable(self, id: impl Into<String>) -> Self {
        self.transition(id, Control::Uncontrollable)
    }

    pub fn controllable(self, id: impl Into<String>) -> Self {
        self.transition(id, Control::Controllable)
    }

    pub fn arc(self, from: impl Into<String>, to: impl Into<String>) -> Self {
        self.weighted_arc(from, to, 1)
    }

    pub fn weighted_arc(
        mut self,
        from: impl Into<String>,
        to: impl Into<String>,
        weight: u32,
    ) -> Self {
        self.arcs.push((from.into(), to.into(), weight));
        self
    }

    /// Adds arcs `inputs -> t -> outputs`.
    pub fn flow(mut self, t: &str, inputs: &[&str], outputs: &[&str]) -> Self {
        for p in inputs {
            self.arcs.push((p.to_string(), t.to_string(), 1));
        }
        for p in outputs {
            self.arcs.push((t.to_string(), p.to_string(), 1));
        }
        self
    }

    pub fn build(self) -> Result<PetriNet> {
        let mut kinds: HashMap<&str, NodeKind> = HashMap::new();
        let mut place_index = HashMap::new();
        let mut transition_index = HashMap::new();
        for (i, p) in self.places.iter().enumerate() {
            if kinds.insert(p, NodeKind::Place).is_some() {
                return Err(Error::DuplicateId(p.clone()));
            }
            place_index.insert(p.clone(), PlaceId(i));
        }
        for (i, (t, _)) in self.transitions.iter().enumerate() {
            if kinds.insert(t, NodeKind::Transition).is_some() {
                return Err(Error::DuplicateId(t.clone()));
            }
            transition_index.insert(t.clone(), TransitionId(i));
        }

        let mut transitions: Vec<Transition> = self
            .transitions
            .iter()
            .map(|(name, control)| Transition {
                name: name.clone(),
                control: *control,
                preset: Vec::new(),
                postset: Vec::new(),
            })
            .collect();

        for (from, to, weight) in &self.arcs {
            let from_kind = *kinds
                .get(from.as_str())
                .ok_or_else(|| Error::DanglingArc(from.clone()))?;
            let to_kind = *kinds
                .get(to.as_str())
                .ok_or_else(|| Error::DanglingArc(to.clone()))?;
            let non_ordinary = || Error::NonOrdinaryArc {
                from: from.clone(),
                to: to.clone(),
                weight: *weight,
            };
            if *weight != 1 {
                return Err(non_ordinary());
            }
            let (list, place) = match (from_kind, to_kind) {
                (NodeKind::Place, NodeKind::Transition) => {
                    let t = transition_index[to.as_str()];
                    (&mut transitions[t.0].preset, place_index[from.as_str()])
                }
                (NodeKind::Transition, NodeKind::Place) => {
                    let t = transition_index[from.as_str()];
                    (&mut transitions[t.0].postset, place_index[to.as_str()])
                }
                _ => {
                    return Err(Error::NotBipartite {
                        from: from.clone(),
                        to: to.clone(),
                    })
                }
            };
            // A repeated arc would make the flow weight 2.
            if list.contains(&place) {
                return Err(Error::NonOrdinaryArc {
                    from: from.clone(),
                    to: to.clone(),
                    weight: 2,
                });
            }
            list.push(place);
        }

        let n = self.places.len();
        let deltas = transitions
            .iter_mut()
            .map(|t| {
                t.preset.sort();
                t.postset.sort();
                let mut col = vec![0i64; n];
                for p in &t.preset {
                    col[p.0] -= 1;
                }
                for p in &t.postset {
                    col[p.0] += 1;
                }
                col
            })
            .collect();

        Ok(PetriNet {
            name: self.name,
            places: self.places,
            transitions,
            place_index,
            transition_index,
            deltas,
        })
    }
}

//! Automaton files:
//!
//! ```json
//! {"type": "prac", "states": ["q0", "q1"], "alphabet": ["a"], "initial": "q0",
//!  "accepting": ["q0"], "endmarkers": "both",
//!  "transitions": {"a": {"n": 2, "entries": [["1/2", "1/2"], ["1/2", "1/2"]]}, "#": ..., "$": ...}}
//! ```
//!
//! `pradh` adds `"rejecting"`; `pra15` stores `{"0": grid, "1": grid}` per
//! symbol and a `"flavor"` of `"weak"` or `"strong"`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{EndmarkerMode, Flavor, Machine, Pra15, PraC, PraDh, StepGrid, Validate, ValidationReport};
use crate::dsmat::{grid_from_strings, grid_to_strings, StochMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Automaton {
    C(PraC),
    Dh(PraDh),
    OneAndHalf(Pra15),
}

#[derive(Serialize, Deserialize)]
struct RawAutomaton {
    #[serde(rename = "type")]
    kind: String,
    states: Vec<String>,
    alphabet: Vec<String>,
    initial: String,
    accepting: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rejecting: Option<Vec<String>>,
    endmarkers: EndmarkerMode,
    transitions: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    flavor: Option<Flavor>,
}

fn symbol(text: &str) -> Result<char> {
    let mut chars = text.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(Error::Format(format!("symbols must be single characters, got {text:?}"))),
    }
}

fn mask(states: &[String], names: &[String]) -> Result<Vec<bool>> {
    let mut out = vec![false; states.len()];
    for name in names {
        let i =
            states.iter().position(|s| s == name).ok_or_else(|| Error::Format(format!("unknown state {name:?}")))?;
        out[i] = true;
    }
    Ok(out)
}

fn names(states: &[String], mask: &[bool]) -> Vec<String> {
    states.iter().zip(mask).filter(|(_, &m)| m).map(|(s, _)| s.clone()).collect()
}

impl Automaton {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawAutomaton = serde_json::from_str(text)?;
        let alphabet = raw.alphabet.iter().map(|s| symbol(s)).collect::<Result<Vec<_>>>()?;
        let initial = raw
            .states
            .iter()
            .position(|s| *s == raw.initial)
            .ok_or_else(|| Error::Format(format!("unknown initial state {:?}", raw.initial)))?;
        let accepting = mask(&raw.states, &raw.accepting)?;
        match raw.kind.as_str() {
            "prac" | "pradh" => {
                let mut transitions = BTreeMap::new();
                for (k, v) in raw.transitions {
                    transitions.insert(symbol(&k)?, serde_json::from_value::<StochMatrix>(v)?);
                }
                let machine = Machine::new(raw.states.clone(), alphabet, initial, raw.endmarkers, transitions)?;
                if raw.kind == "prac" {
                    Ok(Automaton::C(PraC::new(machine, accepting)?))
                } else {
                    let rejecting = mask(&raw.states, raw.rejecting.as_deref().unwrap_or_default())?;
                    Ok(Automaton::Dh(PraDh::new(machine, accepting, rejecting)?))
                }
            }
            "pra15" => {
                let mut transitions = BTreeMap::new();
                for (k, v) in raw.transitions {
                    let mut by_move: BTreeMap<String, Vec<Vec<String>>> = serde_json::from_value(v)?;
                    let mut take = |d: &str| {
                        by_move
                            .remove(d)
                            .ok_or_else(|| Error::Format(format!("symbol {k:?} lacks move {d:?}")))
                            .and_then(|g| grid_from_strings(&g))
                    };
                    let stay = take("0")?;
                    let advance = take("1")?;
                    transitions.insert(symbol(&k)?, StepGrid { stay, advance });
                }
                let flavor = raw.flavor.unwrap_or(Flavor::Weak);
                Ok(Automaton::OneAndHalf(Pra15::new(
                    raw.states,
                    alphabet,
                    initial,
                    accepting,
                    raw.endmarkers,
                    transitions,
                    flavor,
                )?))
            }
            other => Err(Error::Format(format!("unknown automaton type {other:?}"))),
        }
    }

    pub fn to_json(&self) -> String {
        let raw = match self {
            Automaton::C(a) => machine_raw("prac", a.machine(), a.accepting(), None),
            Automaton::Dh(a) => machine_raw("pradh", a.machine(), a.accepting(), Some(a.rejecting())),
            Automaton::OneAndHalf(a) => RawAutomaton {
                kind: "pra15".into(),
                states: a.states().to_vec(),
                alphabet: a.alphabet().iter().map(|c| c.to_string()).collect(),
                initial: a.states()[a.initial()].clone(),
                accepting: names(a.states(), a.accepting()),
                rejecting: None,
                endmarkers: a.endmarkers(),
                transitions: a
                    .transitions()
                    .iter()
                    .map(|(c, g)| {
                        let mut by_move = BTreeMap::new();
                        by_move.insert("0", grid_to_strings(&g.stay));
                        by_move.insert("1", grid_to_strings(&g.advance));
                        (c.to_string(), serde_json::to_value(by_move).expect("plain strings"))
                    })
                    .collect(),
                flavor: Some(a.flavor()),
            },
        };
        serde_json::to_string_pretty(&raw).expect("plain data serializes")
    }

    pub fn validate(&self) -> ValidationReport {
        match self {
            Automaton::C(a) => a.validate(),
            Automaton::Dh(a) => a.validate(),
            Automaton::OneAndHalf(a) => a.validate(),
        }
    }
}

fn machine_raw(kind: &str, m: &Machine, accepting: &[bool], rejecting: Option<&[bool]>) -> RawAutomaton {
    RawAutomaton {
        kind: kind.into(),
        states: m.states().to_vec(),
        alphabet: m.alphabet().iter().map(|c| c.to_string()).collect(),
        initial: m.states()[m.initial()].clone(),
        accepting: names(m.states(), accepting),
        rejecting: rejecting.map(|r| names(m.states(), r)),
        endmarkers: m.endmarkers(),
        transitions: m
            .transitions()
            .iter()
            .map(|(c, mat)| (c.to_string(), serde_json::to_value(mat).expect("matrix serializes")))
            .collect(),
        flavor: None,
    }
}

impl From<PraC> for Automaton {
    fn from(a: PraC) -> Self {
        Automaton::C(a)
    }
}

impl From<PraDh> for Automaton {
    fn from(a: PraDh) -> Self {
        Automaton::Dh(a)
    }
}

impl From<Pra15> for Automaton {
    fn from(a: Pra15) -> Self {
        Automaton::OneAndHalf(a)
    }
}

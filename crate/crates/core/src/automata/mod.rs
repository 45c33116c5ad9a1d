//! One-way doubly stochastic automata with classical (C) and
//! decide-and-halt (DH) acceptance, plus the 1.5-way variant.

mod format;
mod interval;
mod oneandhalf;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::dsmat::{mass_on, Rational, StochMatrix, SumViolation};
use crate::error::{Error, Result};

pub use format::Automaton;
pub use interval::{recognition_interval, recognition_interval_dfa, words_up_to, RecognitionInterval};
pub use oneandhalf::{check_pra15, simulate_pra15, validate_pra15, Flavor, Pra15, RunStats, StepGrid};

pub const LEFT_END: char = '#';
pub const RIGHT_END: char = '$';

/// Which end-markers wrap every input word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EndmarkerMode {
    Both,
    #[serde(rename = "hash")]
    HashOnly,
    None,
}

impl EndmarkerMode {
    pub fn has_hash(self) -> bool {
        !matches!(self, EndmarkerMode::None)
    }

    pub fn has_dollar(self) -> bool {
        matches!(self, EndmarkerMode::Both)
    }

    pub fn markers(self) -> Vec<char> {
        match self {
            EndmarkerMode::Both => vec![LEFT_END, RIGHT_END],
            EndmarkerMode::HashOnly => vec![LEFT_END],
            EndmarkerMode::None => vec![],
        }
    }

    /// The tape actually read for `word`.
    pub fn wrap(self, word: &[char]) -> Vec<char> {
        let mut tape = Vec::with_capacity(word.len() + 2);
        if self.has_hash() {
            tape.push(LEFT_END);
        }
        tape.extend_from_slice(word);
        if self.has_dollar() {
            tape.push(RIGHT_END);
        }
        tape
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EndmarkerMode::Both => "both",
            EndmarkerMode::HashOnly => "hash",
            EndmarkerMode::None => "none",
        }
    }
}

pub fn word(text: &str) -> Vec<char> {
    text.chars().collect()
}

pub fn word_string(word: &[char]) -> String {
    word.iter().collect()
}

pub(crate) fn check_states_and_alphabet(states: &[String], alphabet: &[char]) -> Result<()> {
    if states.is_empty() {
        return Err(Error::Malformed("no states".into()));
    }
    let unique: BTreeSet<&String> = states.iter().collect();
    if unique.len() != states.len() {
        return Err(Error::Malformed("duplicate state name".into()));
    }
    let letters: BTreeSet<char> = alphabet.iter().copied().collect();
    if letters.len() != alphabet.len() {
        return Err(Error::Malformed("duplicate alphabet symbol".into()));
    }
    if letters.contains(&LEFT_END) || letters.contains(&RIGHT_END) {
        return Err(Error::Malformed("end-markers cannot be input letters".into()));
    }
    Ok(())
}

pub(crate) fn check_symbol_coverage<'a>(
    alphabet: &[char],
    endmarkers: EndmarkerMode,
    keys: impl Iterator<Item = &'a char>,
) -> Result<()> {
    let expected: BTreeSet<char> = alphabet.iter().copied().chain(endmarkers.markers()).collect();
    let given: BTreeSet<char> = keys.copied().collect();
    if expected != given {
        return Err(Error::Malformed(format!(
            "transition symbols {given:?} do not match alphabet plus end-markers {expected:?}"
        )));
    }
    Ok(())
}

/// States, alphabet and per-symbol matrices shared by C and DH automata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Machine {
    states: Vec<String>,
    alphabet: Vec<char>,
    initial: usize,
    endmarkers: EndmarkerMode,
    transitions: BTreeMap<char, StochMatrix>,
}

impl Machine {
    pub fn new(
        states: Vec<String>,
        alphabet: Vec<char>,
        initial: usize,
        endmarkers: EndmarkerMode,
        transitions: BTreeMap<char, StochMatrix>,
    ) -> Result<Self> {
        check_states_and_alphabet(&states, &alphabet)?;
        if initial >= states.len() {
            return Err(Error::Malformed(format!("initial state index {initial} out of range")));
        }
        check_symbol_coverage(&alphabet, endmarkers, transitions.keys())?;
        for (sym, m) in &transitions {
            if m.order() != states.len() {
                return Err(Error::Malformed(format!(
                    "matrix for {sym:?} has order {}, expected {}",
                    m.order(),
                    states.len()
                )));
            }
        }
        Ok(Self { states, alphabet, initial, endmarkers, transitions })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn size(&self) -> usize {
        self.states.len()
    }

    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn endmarkers(&self) -> EndmarkerMode {
        self.endmarkers
    }

    pub fn transitions(&self) -> &BTreeMap<char, StochMatrix> {
        &self.transitions
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn matrix(&self, symbol: char) -> Result<&StochMatrix> {
        self.transitions.get(&symbol).ok_or(Error::UnknownSymbol(symbol))
    }

    fn check_word(&self, word: &[char]) -> Result<()> {
        match word.iter().find(|c| !self.alphabet.contains(c)) {
            Some(&c) => Err(Error::UnknownSymbol(c)),
            None => Ok(()),
        }
    }

    /// Matrix of a letter word: `V_{w_k} ⋯ V_{w_1}`; identity for the empty word.
    pub fn word_matrix(&self, word: &[char]) -> Result<StochMatrix> {
        self.check_word(word)?;
        let mut acc = StochMatrix::identity(self.size());
        for &c in word {
            acc = self.matrix(c)?.matmul(&acc)?;
        }
        Ok(acc)
    }

    pub(crate) fn initial_weights(&self) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.size()];
        v[self.initial] = Rational::one();
        v
    }

    /// Weights after `#` (when present) and the letters of `word`.
    pub fn weights_before_dollar(&self, word: &[char]) -> Result<Vec<Rational>> {
        self.check_word(word)?;
        let mut v = self.initial_weights();
        if self.endmarkers.has_hash() {
            v = self.matrix(LEFT_END)?.mul_vec(&v);
        }
        for &c in word {
            v = self.matrix(c)?.mul_vec(&v);
        }
        Ok(v)
    }

    pub(crate) fn finish(&self, v: Vec<Rational>) -> Vec<Rational> {
        match self.transitions.get(&RIGHT_END) {
            Some(m) if self.endmarkers.has_dollar() => m.mul_vec(&v),
            _ => v,
        }
    }

    /// Final weights after reading the whole tape.
    pub fn run(&self, word: &[char]) -> Result<Vec<Rational>> {
        Ok(self.finish(self.weights_before_dollar(word)?))
    }

    pub(crate) fn with_transitions(&self, transitions: BTreeMap<char, StochMatrix>) -> Result<Self> {
        Machine::new(self.states.clone(), self.alphabet.clone(), self.initial, self.endmarkers, transitions)
    }

    fn matrix_violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (&symbol, m) in &self.transitions {
            if !m.is_doubly_stochastic() {
                out.extend(
                    m.classification().violations.into_iter().map(|v| Violation::Matrix { symbol, violation: v }),
                );
            }
        }
        out
    }
}

/// One failed requirement found by validation.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Matrix {
        symbol: char,
        violation: SumViolation,
    },
    PartitionOverlap {
        state: String,
    },
    /// Outgoing mass of `(state, symbol)` over all targets and moves.
    Outgoing {
        symbol: char,
        state: String,
        sum: Rational,
    },
    /// Incoming mass of `(state, symbol)` over all sources and moves.
    Incoming {
        symbol: char,
        state: String,
        sum: Rational,
    },
    /// Incoming configuration mass: stay-moves on `symbol`, advance-moves on `previous`.
    ConfigurationIncoming {
        symbol: char,
        previous: char,
        state: String,
        sum: Rational,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Matrix { symbol, violation } => write!(f, "symbol {symbol:?}: {violation}"),
            Violation::PartitionOverlap { state } => {
                write!(f, "state {state:?} is both accepting and rejecting")
            }
            Violation::Outgoing { symbol, state, sum } => {
                write!(f, "symbol {symbol:?}: outgoing mass of state {state:?} is {sum}")
            }
            Violation::Incoming { symbol, state, sum } => {
                write!(f, "symbol {symbol:?}: incoming mass of state {state:?} is {sum}")
            }
            Violation::ConfigurationIncoming { symbol, previous, state, sum } => {
                write!(f, "symbols ({symbol:?}, {previous:?}): incoming configuration mass of state {state:?} is {sum}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return writeln!(f, "valid");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

pub trait Validate {
    fn validate(&self) -> ValidationReport;
}

pub fn validate<A: Validate + ?Sized>(automaton: &A) -> ValidationReport {
    automaton.validate()
}

/// Anything that assigns an acceptance probability to words.
pub trait Acceptor {
    fn alphabet(&self) -> &[char];
    fn acceptance(&self, word: &[char]) -> Result<Rational>;
}

/// Classical-acceptance automaton: acceptance is the mass on `Q_F` after `$`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PraC {
    machine: Machine,
    accepting: Vec<bool>,
}

impl PraC {
    pub fn new(machine: Machine, accepting: Vec<bool>) -> Result<Self> {
        if accepting.len() != machine.size() {
            return Err(Error::Malformed("accepting mask length differs from state count".into()));
        }
        Ok(Self { machine, accepting })
    }

    pub fn machine(&self) -> &Machine {
        &self.machine
    }

    pub fn size(&self) -> usize {
        self.machine.size()
    }

    pub fn alphabet(&self) -> &[char] {
        self.machine.alphabet()
    }

    pub fn endmarkers(&self) -> EndmarkerMode {
        self.machine.endmarkers()
    }

    pub fn accepting(&self) -> &[bool] {
        &self.accepting
    }

    pub fn matrix(&self, symbol: char) -> Result<&StochMatrix> {
        self.machine.matrix(symbol)
    }

    pub fn accept_prob(&self, word: &[char]) -> Result<Rational> {
        Ok(mass_on(&self.machine.run(word)?, &self.accepting))
    }
}

impl Validate for PraC {
    fn validate(&self) -> ValidationReport {
        ValidationReport { violations: self.machine.matrix_violations() }
    }
}

impl Acceptor for PraC {
    fn alphabet(&self) -> &[char] {
        self.machine.alphabet()
    }

    fn acceptance(&self, word: &[char]) -> Result<Rational> {
        self.accept_prob(word)
    }
}

pub fn accept_prob_c(a: &PraC, word: &[char]) -> Result<Rational> {
    a.accept_prob(word)
}

/// Every matrix transposed. Doubly stochastic inputs stay doubly stochastic.
pub fn reverse_transitions(a: &PraC) -> PraC {
    let transitions = a.machine.transitions.iter().map(|(&c, m)| (c, m.transpose())).collect();
    PraC {
        machine: a.machine.with_transitions(transitions).expect("transpose keeps shape"),
        accepting: a.accepting.clone(),
    }
}

/// Decide-and-halt automaton with an accepting/rejecting/non-halting partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PraDh {
    machine: Machine,
    accepting: Vec<bool>,
    rejecting: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DhOutcome {
    pub accept: Rational,
    pub reject: Rational,
    pub nonhalt: Rational,
}

impl fmt::Display for DhOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.accept, self.reject, self.nonhalt)
    }
}

impl PraDh {
    pub fn new(machine: Machine, accepting: Vec<bool>, rejecting: Vec<bool>) -> Result<Self> {
        if accepting.len() != machine.size() || rejecting.len() != machine.size() {
            return Err(Error::Malformed("partition mask length differs from state count".into()));
        }
        Ok(Self { machine, accepting, rejecting })
    }

    pub fn machine(&self) -> &Machine {
        &self.machine
    }

    pub fn accepting(&self) -> &[bool] {
        &self.accepting
    }

    pub fn rejecting(&self) -> &[bool] {
        &self.rejecting
    }

    /// Halting mass is removed and banked after every symbol, including end-markers.
    pub fn accept_prob(&self, word: &[char]) -> Result<DhOutcome> {
        self.machine.check_word(word)?;
        let mut v = self.machine.initial_weights();
        let mut accept = Rational::zero();
        let mut reject = Rational::zero();
        for c in self.machine.endmarkers.wrap(word) {
            v = self.machine.matrix(c)?.mul_vec(&v);
            for (i, w) in v.iter_mut().enumerate() {
                if self.accepting[i] {
                    accept += &*w;
                    w.set_zero();
                } else if self.rejecting[i] {
                    reject += &*w;
                    w.set_zero();
                }
            }
        }
        let nonhalt = v.into_iter().sum();
        Ok(DhOutcome { accept, reject, nonhalt })
    }
}

impl Validate for PraDh {
    fn validate(&self) -> ValidationReport {
        let mut violations = self.machine.matrix_violations();
        for (i, name) in self.machine.states.iter().enumerate() {
            if self.accepting[i] && self.rejecting[i] {
                violations.push(Violation::PartitionOverlap { state: name.clone() });
            }
        }
        ValidationReport { violations }
    }
}

impl Acceptor for PraDh {
    fn alphabet(&self) -> &[char] {
        self.machine.alphabet()
    }

    fn acceptance(&self, word: &[char]) -> Result<Rational> {
        Ok(self.accept_prob(word)?.accept)
    }
}

pub fn accept_prob_dh(a: &PraDh, word: &[char]) -> Result<DhOutcome> {
    a.accept_prob(word)
}

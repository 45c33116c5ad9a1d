use std::collections::HashMap;
use std::fmt;

use crate::automata::{Acceptor, PraC};
use crate::dsmat::{mass_on, Rational};
use crate::error::{Error, Result};
use crate::regclass::Dfa;

/// Bounded-horizon estimate of the recognition interval `(p1, p2)`.
///
/// `p1` is the largest acceptance probability seen on a non-member and
/// `p2` the smallest on a member, over all words up to `max_len`. Either is
/// `None` when that class had no words in range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecognitionInterval {
    pub p1: Option<Rational>,
    pub p2: Option<Rational>,
    pub max_len: usize,
    pub words: u64,
}

impl RecognitionInterval {
    fn empty(max_len: usize) -> Self {
        Self { p1: None, p2: None, max_len, words: 0 }
    }

    fn record(&mut self, member: bool, p: &Rational, count: u64) {
        self.words += count;
        if member {
            if self.p2.as_ref().is_none_or(|cur| p < cur) {
                self.p2 = Some(p.clone());
            }
        } else if self.p1.as_ref().is_none_or(|cur| p > cur) {
            self.p1 = Some(p.clone());
        }
    }

    /// True when both classes were sampled and every member beat every non-member.
    pub fn separates(&self) -> bool {
        matches!((&self.p1, &self.p2), (Some(a), Some(b)) if a < b)
    }

    pub fn gap(&self) -> Option<Rational> {
        match (&self.p1, &self.p2) {
            (Some(a), Some(b)) => Some(b - a),
            _ => None,
        }
    }
}

impl fmt::Display for RecognitionInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: &Option<Rational>| v.as_ref().map_or_else(|| "-".to_string(), ToString::to_string);
        write!(f, "({}, {})", show(&self.p1), show(&self.p2))
    }
}

/// Every word over `alphabet` of length at most `max_len`, shortest first,
/// lexicographic (by alphabet order) within a length.
pub fn words_up_to(alphabet: &[char], max_len: usize) -> Vec<Vec<char>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|w: &Vec<char>| {
                alphabet.iter().map(move |&c| {
                    let mut next = w.clone();
                    next.push(c);
                    next
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

/// Exhaustive interval by evaluating every word separately.
pub fn recognition_interval<A: Acceptor + ?Sized>(
    automaton: &A,
    member: impl Fn(&[char]) -> bool,
    max_len: usize,
) -> Result<RecognitionInterval> {
    let mut interval = RecognitionInterval::empty(max_len);
    for w in words_up_to(automaton.alphabet(), max_len) {
        let p = automaton.acceptance(&w)?;
        interval.record(member(&w), &p, 1);
    }
    Ok(interval)
}

/// Exhaustive interval against a DFA-described language.
///
/// Words that reach the same (distribution, DFA state) pair are
/// indistinguishable for every extension, so each layer keeps one
/// representative per pair with a multiplicity count. The result equals
/// [`recognition_interval`] with the DFA as membership predicate.
pub fn recognition_interval_dfa(automaton: &PraC, dfa: &Dfa, max_len: usize) -> Result<RecognitionInterval> {
    let machine = automaton.machine();
    let letters: Vec<(char, usize)> = machine
        .alphabet()
        .iter()
        .map(|&c| {
            dfa.symbol_index(c).map(|i| (c, i)).ok_or_else(|| Error::AlphabetMismatch {
                left: machine.alphabet().to_vec(),
                right: dfa.alphabet().to_vec(),
            })
        })
        .collect::<Result<_>>()?;
    let matrices: Vec<_> = letters.iter().map(|&(c, _)| machine.matrix(c)).collect::<Result<_>>()?;

    let mut interval = RecognitionInterval::empty(max_len);
    let mut layer: HashMap<(Vec<Rational>, usize), u64> = HashMap::new();
    layer.insert((machine.weights_before_dollar(&[])?, dfa.initial()), 1);
    for len in 0..=max_len {
        for ((weights, q), &count) in &layer {
            let p = mass_on(&machine.finish(weights.clone()), automaton.accepting());
            interval.record(dfa.is_accepting(*q), &p, count);
        }
        if len == max_len {
            break;
        }
        let mut next: HashMap<(Vec<Rational>, usize), u64> = HashMap::with_capacity(layer.len() * letters.len());
        for ((weights, q), count) in layer {
            for (m, &(_, sym)) in matrices.iter().zip(&letters) {
                *next.entry((m.mul_vec(&weights), dfa.step(q, sym))).or_insert(0) += count;
            }
        }
        layer = next;
    }
    Ok(interval)
}

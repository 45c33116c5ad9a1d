//! Probabilistic reversible automata: exact doubly stochastic matrices,
//! classical and decide-and-halt acceptance, closure constructions, the
//! type (*) classification of regular languages and the Markov-chain
//! machinery behind it, plus unitary-prototype checks.

pub mod automata;
pub mod constructions;
pub mod dsmat;
pub mod error;
pub mod fixtures;
pub mod markov;
pub mod prototype;
pub mod regclass;

pub use automata::{
    accept_prob_c, accept_prob_dh, recognition_interval, recognition_interval_dfa, simulate_pra15, validate, word,
    word_string, Acceptor, Automaton, DhOutcome, EndmarkerMode, Machine, Pra15, PraC, PraDh, RecognitionInterval,
    Validate, ValidationReport,
};
pub use dsmat::{rat, Distribution, MatrixKind, Rational, StochMatrix};
pub use error::{Error, Result};
pub use regclass::{Dfa, Witness, WitnessKind};

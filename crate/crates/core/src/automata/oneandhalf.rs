//! 1.5-way automata: each step either keeps the head in place (`d = 0`)
//! or advances it one cell (`d = 1`).

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_states_and_alphabet, check_symbol_coverage, EndmarkerMode, Validate, ValidationReport, Violation};
use crate::dsmat::{to_f64, Rational};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Weak,
    Strong,
}

/// Transition weights for one symbol, split by head move.
/// Entry `[i][j]` is the weight of going from state `j` to state `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepGrid {
    pub stay: Vec<Vec<Rational>>,
    pub advance: Vec<Vec<Rational>>,
}

impl StepGrid {
    pub fn by_move(&self, d: usize) -> &[Vec<Rational>] {
        if d == 0 {
            &self.stay
        } else {
            &self.advance
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pra15 {
    states: Vec<String>,
    alphabet: Vec<char>,
    initial: usize,
    accepting: Vec<bool>,
    endmarkers: EndmarkerMode,
    transitions: BTreeMap<char, StepGrid>,
    flavor: Flavor,
}

impl Pra15 {
    pub fn new(
        states: Vec<String>,
        alphabet: Vec<char>,
        initial: usize,
        accepting: Vec<bool>,
        endmarkers: EndmarkerMode,
        transitions: BTreeMap<char, StepGrid>,
        flavor: Flavor,
    ) -> Result<Self> {
        check_states_and_alphabet(&states, &alphabet)?;
        let n = states.len();
        if initial >= n || accepting.len() != n {
            return Err(Error::Malformed("initial state or accepting mask out of range".into()));
        }
        check_symbol_coverage(&alphabet, endmarkers, transitions.keys())?;
        for (sym, g) in &transitions {
            for grid in [&g.stay, &g.advance] {
                if grid.len() != n || grid.iter().any(|r| r.len() != n) {
                    return Err(Error::Malformed(format!("grid for {sym:?} is not {n}x{n}")));
                }
                for (i, row) in grid.iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        if v.is_negative() || *v > Rational::one() {
                            return Err(Error::EntryOutOfRange { row: i, col: j, value: v.to_string() });
                        }
                    }
                }
            }
        }
        Ok(Self { states, alphabet, initial, accepting, endmarkers, transitions, flavor })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn accepting(&self) -> &[bool] {
        &self.accepting
    }

    pub fn endmarkers(&self) -> EndmarkerMode {
        self.endmarkers
    }

    pub fn transitions(&self) -> &BTreeMap<char, StepGrid> {
        &self.transitions
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }
}

/// Checks the outgoing-mass condition plus the incoming condition of `flavor`.
///
/// Weak: for each `(q1, s)`, the mass entering `q1` on `s` over all sources
/// and both moves is one. Strong: for each `(q1, s1, s2)`, stay-moves into
/// `q1` on `s1` plus advance-moves into `q1` on `s2` carry mass one; this is
/// the mass arriving at a configuration whose cell holds `s1` and whose
/// preceding cell holds `s2`.
pub fn check_pra15(a: &Pra15, flavor: Flavor) -> ValidationReport {
    let n = a.states.len();
    let mut violations = Vec::new();
    for (&symbol, g) in &a.transitions {
        for q in 0..n {
            let sum: Rational = (0..n).map(|t| &g.stay[t][q] + &g.advance[t][q]).sum();
            if !sum.is_one() {
                violations.push(Violation::Outgoing { symbol, state: a.states[q].clone(), sum });
            }
        }
    }
    match flavor {
        Flavor::Weak => {
            for (&symbol, g) in &a.transitions {
                for q in 0..n {
                    let sum: Rational = (0..n).map(|s| &g.stay[q][s] + &g.advance[q][s]).sum();
                    if !sum.is_one() {
                        violations.push(Violation::Incoming { symbol, state: a.states[q].clone(), sum });
                    }
                }
            }
        }
        Flavor::Strong => {
            for (&symbol, g1) in &a.transitions {
                for (&previous, g2) in &a.transitions {
                    for q in 0..n {
                        let stay: Rational = g1.stay[q].iter().sum();
                        let advance: Rational = g2.advance[q].iter().sum();
                        let sum = stay + advance;
                        if !sum.is_one() {
                            violations.push(Violation::ConfigurationIncoming {
                                symbol,
                                previous,
                                state: a.states[q].clone(),
                                sum,
                            });
                        }
                    }
                }
            }
        }
    }
    ValidationReport { violations }
}

pub fn validate_pra15(a: &Pra15) -> ValidationReport {
    check_pra15(a, a.flavor)
}

impl Validate for Pra15 {
    fn validate(&self) -> ValidationReport {
        validate_pra15(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunStats {
    pub trials: u64,
    pub accepted: u64,
    pub rejected: u64,
    pub timeouts: u64,
    /// Step counts of the runs that halted, in trial order.
    #[serde(skip)]
    pub halting_steps: Vec<u32>,
    pub mean_steps: f64,
}

impl RunStats {
    pub fn halted(&self) -> u64 {
        self.accepted + self.rejected
    }

    pub fn accept_fraction(&self) -> f64 {
        self.accepted as f64 / self.halted().max(1) as f64
    }

    pub fn reject_fraction(&self) -> f64 {
        self.rejected as f64 / self.halted().max(1) as f64
    }

    pub fn timeout_fraction(&self) -> f64 {
        self.timeouts as f64 / self.trials as f64
    }

    /// Fraction of all trials that halted within `steps` steps.
    pub fn halted_within(&self, steps: u32) -> f64 {
        self.halting_steps.iter().filter(|&&s| s <= steps).count() as f64 / self.trials as f64
    }
}

struct Outcome {
    target: usize,
    advance: bool,
}

/// Monte Carlo runs of `a` on the tape `#w$` (per its end-marker mode).
///
/// A run halts when the head moves past the last cell; it accepts iff the
/// state it halts in is accepting. Runs still on the tape after
/// `max_steps` steps count as timeouts.
pub fn simulate_pra15(a: &Pra15, word: &[char], trials: u64, max_steps: u32, seed: u64) -> Result<RunStats> {
    if trials == 0 || max_steps == 0 {
        return Err(Error::InvalidParameter("trials and max_steps must be positive".into()));
    }
    if let Some(&c) = word.iter().find(|c| !a.alphabet.contains(c)) {
        return Err(Error::UnknownSymbol(c));
    }
    let n = a.states.len();
    // cumulative sampling tables per (symbol, source state)
    let mut tables: BTreeMap<char, Vec<Vec<(f64, Outcome)>>> = BTreeMap::new();
    for (&sym, g) in &a.transitions {
        let per_state = (0..n)
            .map(|src| {
                let mut acc = 0.0;
                let mut out = Vec::new();
                for d in 0..2 {
                    for t in 0..n {
                        let w = &g.by_move(d)[t][src];
                        if !w.is_zero() {
                            acc += to_f64(w);
                            out.push((acc, Outcome { target: t, advance: d == 1 }));
                        }
                    }
                }
                out
            })
            .collect();
        tables.insert(sym, per_state);
    }
    let tape = a.endmarkers.wrap(word);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats =
        RunStats { trials, accepted: 0, rejected: 0, timeouts: 0, halting_steps: Vec::new(), mean_steps: 0.0 };
    for _ in 0..trials {
        let (mut state, mut pos, mut steps) = (a.initial, 0usize, 0u32);
        while pos < tape.len() && steps < max_steps {
            let choices = &tables[&tape[pos]][state];
            if choices.is_empty() {
                break;
            }
            let u: f64 = rng.random::<f64>() * choices.last().map_or(1.0, |c| c.0);
            let pick = choices.iter().find(|c| u < c.0).unwrap_or(choices.last().expect("non-empty"));
            state = pick.1.target;
            if pick.1.advance {
                pos += 1;
            }
            steps += 1;
        }
        if pos == tape.len() {
            stats.halting_steps.push(steps);
            if a.accepting[state] {
                stats.accepted += 1;
            } else {
                stats.rejected += 1;
            }
        } else {
            stats.timeouts += 1;
        }
    }
    if !stats.halting_steps.is_empty() {
        stats.mean_steps =
            stats.halting_steps.iter().map(|&s| s as f64).sum::<f64>() / stats.halting_steps.len() as f64;
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::word;
    use crate::dsmat::int;
    use crate::fixtures;

    fn identity_advance(n: usize) -> StepGrid {
        let zero = vec![vec![Rational::zero(); n]; n];
        let mut adv = zero.clone();
        for (i, row) in adv.iter_mut().enumerate() {
            row[i] = int(1);
        }
        StepGrid { stay: zero, advance: adv }
    }

    #[test]
    fn fix15_is_weakly_reversible() {
        let a = fixtures::fix_15();
        assert!(check_pra15(&a, Flavor::Weak).is_valid());
    }

    #[test]
    fn fix15_fails_strong_reading() {
        let report = check_pra15(&fixtures::fix_15(), Flavor::Strong);
        assert!(report.violations.iter().any(|v| matches!(v, Violation::ConfigurationIncoming { .. })));
        // the outgoing condition itself still holds
        assert!(!report.violations.iter().any(|v| matches!(v, Violation::Outgoing { .. })));
    }

    #[test]
    fn pure_advance_identity_is_valid_both_ways() {
        let mut t = BTreeMap::new();
        for c in ['a', '#', '$'] {
            t.insert(c, identity_advance(2));
        }
        let a = Pra15::new(
            vec!["p".into(), "q".into()],
            vec!['a'],
            0,
            vec![true, false],
            EndmarkerMode::Both,
            t,
            Flavor::Strong,
        )
        .unwrap();
        assert!(check_pra15(&a, Flavor::Weak).is_valid());
        assert!(check_pra15(&a, Flavor::Strong).is_valid());
        let stats = simulate_pra15(&a, &word("aaa"), 10, 100, 1).unwrap();
        assert_eq!((stats.accepted, stats.timeouts), (10, 0));
        assert_eq!(stats.mean_steps, 5.0);
    }

    #[test]
    fn fix15_has_no_wrong_answers() {
        let a = fixtures::fix_15();
        let yes = simulate_pra15(&a, &word("aba"), 10_000, 200, 3).unwrap();
        assert_eq!(yes.rejected, 0);
        assert!(yes.accepted > 0);
        let no = simulate_pra15(&a, &word("ab"), 10_000, 200, 4).unwrap();
        assert_eq!(no.accepted, 0);
        assert!(no.rejected > 0);
    }

    #[test]
    fn fix15_mean_steps_near_two_per_cell() {
        let a = fixtures::fix_15();
        for w in ["", "a", "abba", "bbbbbbbbba"] {
            let stats = simulate_pra15(&a, &word(w), 10_000, 400, 9).unwrap();
            let expected = 2.0 * (w.len() as f64 + 1.0);
            assert!((stats.mean_steps - expected).abs() <= 0.1 * expected, "{w}: {}", stats.mean_steps);
        }
    }

    #[test]
    fn simulation_is_seed_deterministic() {
        let a = fixtures::fix_15();
        let x = simulate_pra15(&a, &word("abab"), 500, 50, 42).unwrap();
        let y = simulate_pra15(&a, &word("abab"), 500, 50, 42).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn tight_step_limit_times_out() {
        let a = fixtures::fix_15();
        let stats = simulate_pra15(&a, &word("aaaa"), 100, 3, 0).unwrap();
        assert_eq!(stats.timeouts, 100);
        assert!(simulate_pra15(&a, &word("a"), 0, 3, 0).is_err());
    }
}

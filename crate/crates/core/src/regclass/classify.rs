use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{minimize, Dfa};
use crate::automata::word_string;
use crate::error::{Error, Result};

/// Largest state count the monoid oracle accepts by default.
pub const DEFAULT_ORACLE_STATES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessKind {
    Star,
    StarPrime,
    #[serde(rename = "star-dprime")]
    StarDoublePrime,
}

impl fmt::Display for WitnessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WitnessKind::Star => "(*)",
            WitnessKind::StarPrime => "(*′)",
            WitnessKind::StarDoublePrime => "(*″)",
        })
    }
}

/// States and words exhibiting a type (*) pattern. State indices refer to
/// the minimal DFA (see [`minimize`]). `q` is absent for (*″).
///
/// `omega` and `z` are filled by [`Witness::with_probe_words`]: `omega`
/// leads from the initial state into the pattern and `z` tells `q1` from
/// `q2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub kind: WitnessKind,
    pub q: Option<usize>,
    pub q1: usize,
    pub q2: usize,
    pub x: Vec<char>,
    pub y: Vec<char>,
    pub omega: Option<Vec<char>>,
    pub z: Option<Vec<char>>,
}

fn shown(w: &[char]) -> String {
    if w.is_empty() {
        "ε".to_string()
    } else {
        word_string(w)
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "witness x={} y={}", word_string(&self.x), word_string(&self.y))?;
        if let Some(q) = self.q {
            write!(f, " q=s{q}")?;
        }
        write!(f, " q1=s{} q2=s{}", self.q1, self.q2)?;
        if let Some(omega) = &self.omega {
            write!(f, " omega={}", shown(omega))?;
        }
        if let Some(z) = &self.z {
            write!(f, " z={}", shown(z))?;
        }
        Ok(())
    }
}

fn apply(d: &Dfa, q: usize, w: &[char]) -> Option<usize> {
    d.run_from(q, w).ok()
}

/// States reachable from `from` under the words `x` and `y`, `from` included.
fn orbit(d: &Dfa, from: usize, x: &[char], y: &[char]) -> Option<HashSet<usize>> {
    let mut seen = HashSet::from([from]);
    let mut stack = vec![from];
    while let Some(s) = stack.pop() {
        for w in [x, y] {
            let t = apply(d, s, w)?;
            if seen.insert(t) {
                stack.push(t);
            }
        }
    }
    Some(seen)
}

/// Every state reachable from `q` under `{x, y}*` can return to `q`.
fn recurrent(d: &Dfa, q: usize, x: &[char], y: &[char]) -> bool {
    orbit(d, q, x, y).is_some_and(|reach| reach.iter().all(|&s| orbit(d, s, x, y).is_some_and(|o| o.contains(&q))))
}

impl Witness {
    /// Checks the defining equations of `kind` (and the probe words, when
    /// present) by applying the words to `d`'s states.
    pub fn replay(&self, d: &Dfa) -> bool {
        let n = d.size();
        if self.q1 >= n || self.q2 >= n || self.q1 == self.q2 || self.x.is_empty() || self.y.is_empty() {
            return false;
        }
        let at = |q: usize, w: &[char]| apply(d, q, w);
        let (q1, q2) = (Some(self.q1), Some(self.q2));
        let core = match self.kind {
            WitnessKind::StarDoublePrime => {
                at(self.q1, &self.x) == q2 && at(self.q2, &self.x) == q2 && at(self.q2, &self.y) == q1
            }
            WitnessKind::StarPrime => self.q.is_some_and(|q| {
                at(q, &self.x) == q1
                    && at(q, &self.y) == q2
                    && at(self.q1, &self.x) == q1
                    && at(self.q1, &self.y) == q1
                    && at(self.q2, &self.x) == q2
                    && at(self.q2, &self.y) == q2
            }),
            WitnessKind::Star => self.q.is_some_and(|q| {
                at(q, &self.x) == q1
                    && at(q, &self.y) == q2
                    && at(self.q1, &self.x) == q1
                    && at(self.q2, &self.y) == q2
                    && recurrent(d, self.q1, &self.x, &self.y)
                    && recurrent(d, self.q2, &self.x, &self.y)
            }),
        };
        let entry = match self.kind {
            WitnessKind::StarDoublePrime => Some(self.q1),
            _ => self.q,
        };
        let omega_ok = self.omega.as_ref().is_none_or(|w| at(d.initial(), w) == entry);
        let z_ok = self.z.as_ref().is_none_or(|z| match (at(self.q1, z), at(self.q2, z)) {
            (Some(a), Some(b)) => d.is_accepting(a) != d.is_accepting(b),
            _ => false,
        });
        core && omega_ok && z_ok
    }

    /// Adds the shortest `omega` reaching the pattern and the shortest `z`
    /// distinguishing `q1` from `q2`. `d` must be minimal.
    pub fn with_probe_words(mut self, d: &Dfa) -> Result<Self> {
        let entry = match self.kind {
            WitnessKind::StarDoublePrime => self.q1,
            _ => self.q.ok_or_else(|| Error::Malformed("witness lacks q".into()))?,
        };
        self.omega =
            Some(d.shortest_word(d.initial(), |s| s == entry).ok_or_else(|| Error::Malformed("unreachable".into()))?);
        let z = product_search(d, &[self.q1, self.q2], true, |t| d.is_accepting(t[0]) != d.is_accepting(t[1]))
            .ok_or_else(|| Error::Malformed("q1 and q2 are equivalent; is the DFA minimal?".into()))?;
        self.z = Some(z);
        Ok(self)
    }
}

/// Breadth-first search in the synchronized product from `start`, symbols
/// in alphabet order, so the first hit is the shortest and then
/// lexicographically least word.
fn product_search(d: &Dfa, start: &[usize], allow_empty: bool, goal: impl Fn(&[usize]) -> bool) -> Option<Vec<char>> {
    if allow_empty && goal(start) {
        return Some(Vec::new());
    }
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut queue: VecDeque<(Vec<usize>, Vec<char>)> = VecDeque::from([(start.to_vec(), Vec::new())]);
    while let Some((tuple, word)) = queue.pop_front() {
        for (sym, &c) in d.alphabet().iter().enumerate() {
            let next: Vec<usize> = tuple.iter().map(|&q| d.step(q, sym)).collect();
            if seen.contains(&next) {
                continue;
            }
            let mut w = word.clone();
            w.push(c);
            if goal(&next) {
                return Some(w);
            }
            seen.insert(next.clone());
            queue.push_back((next, w));
        }
    }
    None
}

/// Type (*″) search: states `q1 ≠ q2` and words with `q1·x = q2`,
/// `q2·x = q2`, `q2·y = q1`. Pairs are tried in index order.
pub fn classify_star_dprime(d: &Dfa) -> Option<Witness> {
    let m = minimize(d);
    let n = m.size();
    for q1 in 0..n {
        for q2 in (0..n).filter(|&q2| q2 != q1) {
            let Some(x) = product_search(&m, &[q1, q2], false, |t| t[0] == q2 && t[1] == q2) else { continue };
            let Some(y) = product_search(&m, &[q2], false, |t| t[0] == q1) else { continue };
            return Some(Witness { kind: WitnessKind::StarDoublePrime, q: None, q1, q2, x, y, omega: None, z: None });
        }
    }
    None
}

/// Type (*′) search: states `q`, `q1 ≠ q2` and words with `q·x = q1`,
/// `q·y = q2`, both words fixing both `q1` and `q2`. Triples are tried in
/// index order.
pub fn classify_star_prime(d: &Dfa) -> Option<Witness> {
    let m = minimize(d);
    let n = m.size();
    for q in 0..n {
        for q1 in 0..n {
            for q2 in (0..n).filter(|&q2| q2 != q1) {
                let start = [q, q1, q2];
                let Some(x) = product_search(&m, &start, false, |t| t == [q1, q1, q2]) else { continue };
                let Some(y) = product_search(&m, &start, false, |t| t == [q2, q1, q2]) else { continue };
                return Some(Witness { kind: WitnessKind::StarPrime, q: Some(q), q1, q2, x, y, omega: None, z: None });
            }
        }
    }
    None
}

/// Type (*) as the union of the (*′) and (*″) searches; the witness kind
/// says which one fired.
pub fn classify_star(d: &Dfa) -> Option<Witness> {
    classify_star_prime(d).or_else(|| classify_star_dprime(d))
}

/// Direct check of the type (*) definition over the transition semigroup.
///
/// Each pair of semigroup elements stands for the words `x, y`; conditions
/// 4 and 5 become recurrence of `q1` and `q2` in the graph the two elements
/// generate. Exponential in the state count, so the minimal DFA may have at
/// most `max_states` states.
pub fn classify_star_monoid_oracle(d: &Dfa, max_states: usize) -> Result<Option<Witness>> {
    let m = minimize(d);
    let n = m.size();
    if n > max_states {
        return Err(Error::BudgetExceeded { needed: n, budget: max_states });
    }
    // semigroup of non-empty words, shortest word per element
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut elements: Vec<(Vec<usize>, Vec<char>)> = Vec::new();
    let mut queue = VecDeque::new();
    for (sym, &c) in m.alphabet().iter().enumerate() {
        let f: Vec<usize> = (0..n).map(|q| m.step(q, sym)).collect();
        if !index.contains_key(&f) {
            index.insert(f.clone(), elements.len());
            queue.push_back(elements.len());
            elements.push((f, vec![c]));
        }
    }
    while let Some(i) = queue.pop_front() {
        for (sym, &c) in m.alphabet().iter().enumerate() {
            let f: Vec<usize> = elements[i].0.iter().map(|&q| m.step(q, sym)).collect();
            if !index.contains_key(&f) {
                let mut w = elements[i].1.clone();
                w.push(c);
                index.insert(f.clone(), elements.len());
                queue.push_back(elements.len());
                elements.push((f, w));
            }
        }
    }

    let recurrent = |f: &[usize], g: &[usize], q: usize| {
        let reach = |from: usize| {
            let mut seen = vec![false; n];
            seen[from] = true;
            let mut stack = vec![from];
            while let Some(s) = stack.pop() {
                for t in [f[s], g[s]] {
                    if !seen[t] {
                        seen[t] = true;
                        stack.push(t);
                    }
                }
            }
            seen
        };
        let fwd = reach(q);
        (0..n).filter(|&s| fwd[s]).all(|s| reach(s)[q])
    };

    for (f, x) in &elements {
        for (g, y) in &elements {
            for q in 0..n {
                let (q1, q2) = (f[q], g[q]);
                if q1 != q2 && f[q1] == q1 && g[q2] == q2 && recurrent(f, g, q1) && recurrent(f, g, q2) {
                    return Ok(Some(Witness {
                        kind: WitnessKind::Star,
                        q: Some(q),
                        q1,
                        q2,
                        x: x.clone(),
                        y: y.clone(),
                        omega: None,
                        z: None,
                    }));
                }
            }
        }
    }
    Ok(None)
}

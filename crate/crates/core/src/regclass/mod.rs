//! Regular languages: regex to minimal DFA, permutation detection and the
//! type (*) classification with replayable witnesses.

mod classify;
mod regex;

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use classify::{
    classify_star, classify_star_dprime, classify_star_monoid_oracle, classify_star_prime, Witness, WitnessKind,
    DEFAULT_ORACLE_STATES,
};
pub use regex::{build_dfa, parse_regex, Regex};

/// Total deterministic automaton. States are `0..size()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    alphabet: Vec<char>,
    delta: Vec<Vec<usize>>,
    initial: usize,
    accepting: Vec<bool>,
}

impl Dfa {
    pub fn new(alphabet: Vec<char>, delta: Vec<Vec<usize>>, initial: usize, accepting: Vec<bool>) -> Result<Self> {
        let n = delta.len();
        if n == 0 || initial >= n || accepting.len() != n {
            return Err(Error::Malformed("dfa needs states, an initial state and a full accepting mask".into()));
        }
        for (i, &c) in alphabet.iter().enumerate() {
            if alphabet[..i].contains(&c) {
                return Err(Error::Malformed(format!("duplicate symbol {c:?}")));
            }
        }
        if delta.iter().any(|row| row.len() != alphabet.len() || row.iter().any(|&t| t >= n)) {
            return Err(Error::Malformed("transition table must be total".into()));
        }
        Ok(Self { alphabet, delta, initial, accepting })
    }

    pub fn size(&self) -> usize {
        self.delta.len()
    }

    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    pub fn symbol_index(&self, c: char) -> Option<usize> {
        self.alphabet.iter().position(|&s| s == c)
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    pub fn accepting(&self) -> &[bool] {
        &self.accepting
    }

    pub fn step(&self, q: usize, symbol: usize) -> usize {
        self.delta[q][symbol]
    }

    /// State reached from `q` after `word`.
    pub fn run_from(&self, q: usize, word: &[char]) -> Result<usize> {
        word.iter().try_fold(q, |s, &c| Ok(self.step(s, self.symbol_index(c).ok_or(Error::UnknownSymbol(c))?)))
    }

    pub fn accepts(&self, word: &[char]) -> Result<bool> {
        Ok(self.accepting[self.run_from(self.initial, word)?])
    }

    /// Shortest (then alphabet-lexicographic) word leading from `from` to
    /// a state satisfying `goal`, allowing the empty word.
    pub fn shortest_word(&self, from: usize, goal: impl Fn(usize) -> bool) -> Option<Vec<char>> {
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; self.size()];
        let mut seen = vec![false; self.size()];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(q) = queue.pop_front() {
            if goal(q) {
                let mut word = Vec::new();
                let mut cur = q;
                while let Some((prev, sym)) = parent[cur] {
                    word.push(self.alphabet[sym]);
                    cur = prev;
                }
                word.reverse();
                return Some(word);
            }
            for (sym, &t) in self.delta[q].iter().enumerate() {
                if !seen[t] {
                    seen[t] = true;
                    parent[t] = Some((q, sym));
                    queue.push_back(t);
                }
            }
        }
        None
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawDfa = serde_json::from_str(text)?;
        let index = |name: &str| {
            raw.states.iter().position(|s| s == name).ok_or_else(|| Error::Format(format!("unknown state {name:?}")))
        };
        let alphabet = raw
            .alphabet
            .iter()
            .map(|s| {
                let mut it = s.chars();
                match (it.next(), it.next()) {
                    (Some(c), None) => Ok(c),
                    _ => Err(Error::Format(format!("symbols must be single characters, got {s:?}"))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let mut delta = Vec::with_capacity(raw.states.len());
        for name in &raw.states {
            let row = raw.delta.get(name).ok_or_else(|| Error::Format(format!("no transitions for {name:?}")))?;
            let targets = raw
                .alphabet
                .iter()
                .map(|c| {
                    row.get(c)
                        .ok_or_else(|| Error::Format(format!("state {name:?} lacks symbol {c:?}")))
                        .and_then(|t| index(t))
                })
                .collect::<Result<Vec<_>>>()?;
            delta.push(targets);
        }
        let mut accepting = vec![false; raw.states.len()];
        for name in &raw.accepting {
            accepting[index(name)?] = true;
        }
        Dfa::new(alphabet, delta, index(&raw.initial)?, accepting)
    }

    /// JSON with states named `s0, s1, …`.
    pub fn to_json(&self) -> String {
        let name = |q: usize| format!("s{q}");
        let raw = RawDfa {
            states: (0..self.size()).map(name).collect(),
            alphabet: self.alphabet.iter().map(|c| c.to_string()).collect(),
            initial: name(self.initial),
            accepting: (0..self.size()).filter(|&q| self.accepting[q]).map(name).collect(),
            delta: (0..self.size())
                .map(|q| {
                    let row = self.alphabet.iter().enumerate().map(|(i, c)| (c.to_string(), name(self.delta[q][i])));
                    (name(q), row.collect())
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("plain data serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct RawDfa {
    states: Vec<String>,
    alphabet: Vec<String>,
    initial: String,
    accepting: Vec<String>,
    delta: BTreeMap<String, BTreeMap<String, String>>,
}

/// Minimal DFA: unreachable states dropped, equivalent states merged by
/// partition refinement, states renumbered in breadth-first order from the
/// initial state (symbols in alphabet order). Equal languages give equal
/// results.
pub fn minimize(d: &Dfa) -> Dfa {
    let k = d.alphabet.len();
    // blocks start as the acceptance split
    let mut block: Vec<usize> = d.accepting.iter().map(|&a| usize::from(a)).collect();
    loop {
        let mut ids: HashMap<Vec<usize>, usize> = HashMap::new();
        let next: Vec<usize> = (0..d.size())
            .map(|q| {
                let mut sig = Vec::with_capacity(k + 1);
                sig.push(block[q]);
                sig.extend(d.delta[q].iter().map(|&t| block[t]));
                let fresh = ids.len();
                *ids.entry(sig).or_insert(fresh)
            })
            .collect();
        let stable = ids.len() == block.iter().collect::<std::collections::HashSet<_>>().len();
        block = next;
        if stable {
            break;
        }
    }
    let mut order: HashMap<usize, usize> = HashMap::new();
    let mut reps = Vec::new();
    let mut queue = VecDeque::from([d.initial]);
    order.insert(block[d.initial], 0);
    reps.push(d.initial);
    while let Some(q) = queue.pop_front() {
        for &t in &d.delta[q] {
            if let std::collections::hash_map::Entry::Vacant(e) = order.entry(block[t]) {
                e.insert(reps.len());
                reps.push(t);
                queue.push_back(t);
            }
        }
    }
    let delta = reps.iter().map(|&q| d.delta[q].iter().map(|&t| order[&block[t]]).collect()).collect();
    let accepting = reps.iter().map(|&q| d.accepting[q]).collect();
    Dfa::new(d.alphabet.clone(), delta, 0, accepting).expect("minimization keeps the table total")
}

/// Parses `pattern`, builds its DFA over `alphabet` (default: the pattern's
/// literals) and minimizes it.
pub fn dfa_from_regex(pattern: &str, alphabet: Option<&[char]>) -> Result<Dfa> {
    let r = parse_regex(pattern)?;
    let sigma = alphabet.map_or_else(|| r.alphabet(), <[char]>::to_vec);
    Ok(minimize(&build_dfa(&r, &sigma)?))
}

/// Every symbol permutes the states.
pub fn is_permutation_dfa(d: &Dfa) -> bool {
    (0..d.alphabet.len()).all(|s| {
        let mut hit = vec![false; d.size()];
        (0..d.size()).all(|q| !std::mem::replace(&mut hit[d.delta[q][s]], true))
    })
}

/// Least `k ≥ 1` with `q·x^k = q·x^{2k}`.
pub fn idempotent_power(d: &Dfa, q: usize, x: &[char]) -> Result<usize> {
    if x.is_empty() {
        return Err(Error::InvalidParameter("idempotent power needs a non-empty word".into()));
    }
    if q >= d.size() {
        return Err(Error::InvalidParameter(format!("state {q} out of range")));
    }
    // orbit q, q·x, q·x², … until it repeats
    let mut orbit = vec![q];
    let mut seen = HashMap::from([(q, 0usize)]);
    let (tail, cycle) = loop {
        let next = d.run_from(*orbit.last().expect("non-empty"), x)?;
        if let Some(&at) = seen.get(&next) {
            break (at, orbit.len() - at);
        }
        seen.insert(next, orbit.len());
        orbit.push(next);
    };
    Ok((1..).find(|&k| k >= tail && k % cycle == 0).expect("some multiple of the cycle is past the tail"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{word, words_up_to};
    use proptest::prelude::*;

    /// Backtracking matcher used as an independent membership oracle.
    fn matches(r: &Regex, w: &[char]) -> bool {
        ends(r, w, 0).contains(&w.len())
    }

    fn ends(r: &Regex, w: &[char], from: usize) -> Vec<usize> {
        let mut out = match r {
            Regex::Empty => vec![from],
            Regex::Literal(c) => {
                if w.get(from) == Some(c) {
                    vec![from + 1]
                } else {
                    vec![]
                }
            }
            Regex::Concat(parts) => {
                parts.iter().fold(vec![from], |starts, p| starts.iter().flat_map(|&s| ends(p, w, s)).collect())
            }
            Regex::Alt(parts) => parts.iter().flat_map(|p| ends(p, w, from)).collect(),
            Regex::Star(inner) => {
                let mut reach = vec![from];
                let mut frontier = vec![from];
                while !frontier.is_empty() {
                    let mut next = Vec::new();
                    for s in frontier {
                        for e in ends(inner, w, s) {
                            if !reach.contains(&e) {
                                reach.push(e);
                                next.push(e);
                            }
                        }
                    }
                    frontier = next;
                }
                reach
            }
        };
        out.sort_unstable();
        out.dedup();
        out
    }

    fn check_agreement(pattern: &str, alphabet: &[char], max_len: usize) -> Dfa {
        let r = parse_regex(pattern).unwrap();
        let d = dfa_from_regex(pattern, Some(alphabet)).unwrap();
        for w in words_up_to(alphabet, max_len) {
            assert_eq!(d.accepts(&w).unwrap(), matches(&r, &w), "{pattern} on {w:?}");
        }
        d
    }

    #[test]
    fn reference_state_counts() {
        assert_eq!(check_agreement("(a|b)*a", &['a', 'b'], 6).size(), 2);
        assert_eq!(check_agreement("a*b*", &['a', 'b'], 6).size(), 3);
        assert_eq!(check_agreement("a", &['a'], 6).size(), 3);
        assert_eq!(check_agreement("a(a|b)*", &['a', 'b'], 6).size(), 3);
        assert_eq!(check_agreement("(b*ab*a)*b*", &['a', 'b'], 6).size(), 2);
        assert_eq!(check_agreement("a*b*c*", &['a', 'b', 'c'], 5).size(), 4);
        assert_eq!(check_agreement("()", &['a'], 4).size(), 2);
    }

    #[test]
    fn minimization_is_canonical() {
        let a = dfa_from_regex("(a|b)*a", None).unwrap();
        let c = dfa_from_regex("b*a(b*a)*", None).unwrap();
        assert_eq!(a, c);
        assert_eq!(minimize(&a), a);
    }

    #[test]
    fn permutation_detection() {
        assert!(is_permutation_dfa(&dfa_from_regex("(b*ab*a)*b*", None).unwrap()));
        assert!(!is_permutation_dfa(&dfa_from_regex("(a|b)*a", None).unwrap()));
        let single = Dfa::new(vec!['a'], vec![vec![0]], 0, vec![true]).unwrap();
        assert!(is_permutation_dfa(&single));
    }

    #[test]
    fn idempotent_power_examples() {
        let d = dfa_from_regex("(a|b)*a", None).unwrap();
        assert_eq!(idempotent_power(&d, 0, &word("a")).unwrap(), 1);
        let cycle = Dfa::new(vec!['a'], vec![vec![1], vec![2], vec![0]], 0, vec![true, false, false]).unwrap();
        assert_eq!(idempotent_power(&cycle, 0, &word("a")).unwrap(), 3);
        let tail = Dfa::new(vec!['a'], vec![vec![1], vec![2], vec![3], vec![2]], 0, vec![false; 4]).unwrap();
        assert_eq!(idempotent_power(&tail, 0, &word("a")).unwrap(), 2);
        assert!(idempotent_power(&d, 0, &[]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let d = dfa_from_regex("a*b*", None).unwrap();
        assert_eq!(Dfa::from_json(&d.to_json()).unwrap(), d);
        assert!(Dfa::from_json(r#"{"states":["s"],"alphabet":["a"],"initial":"s","accepting":[],"delta":{"s":{}}}"#)
            .is_err());
    }

    fn arb_dfa(max_states: usize) -> impl Strategy<Value = Dfa> {
        (1..=max_states).prop_flat_map(|n| {
            (
                proptest::collection::vec(proptest::collection::vec(0..n, 2), n),
                proptest::collection::vec(any::<bool>(), n),
            )
                .prop_map(move |(delta, acc)| Dfa::new(vec!['a', 'b'], delta, 0, acc).unwrap())
        })
    }

    fn relabel(d: &Dfa, perm: &[usize]) -> Dfa {
        let n = d.size();
        let mut delta = vec![Vec::new(); n];
        let mut acc = vec![false; n];
        for q in 0..n {
            delta[perm[q]] = d.delta[q].iter().map(|&t| perm[t]).collect();
            acc[perm[q]] = d.accepting[q];
        }
        Dfa::new(d.alphabet.clone(), delta, perm[d.initial], acc).unwrap()
    }

    proptest! {
        #[test]
        fn minimize_preserves_language_and_is_idempotent(d in arb_dfa(5)) {
            let m = minimize(&d);
            prop_assert_eq!(minimize(&m), m.clone());
            for w in words_up_to(d.alphabet(), 2 * d.size()) {
                prop_assert_eq!(m.accepts(&w).unwrap(), d.accepts(&w).unwrap());
            }
        }

        #[test]
        fn permutation_check_ignores_renaming(d in arb_dfa(5), seed in any::<u64>()) {
            let mut perm: Vec<usize> = (0..d.size()).collect();
            let mut s = seed;
            for i in (1..perm.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                perm.swap(i, (s >> 33) as usize % (i + 1));
            }
            let r = relabel(&d, &perm);
            prop_assert_eq!(is_permutation_dfa(&r), is_permutation_dfa(&d));
            prop_assert_eq!(minimize(&r), minimize(&d));
        }

        #[test]
        fn idempotent_power_fixed_point(d in arb_dfa(5), q in 0usize..5, x in "[ab]{1,3}") {
            let q = q % d.size();
            let x = word(&x);
            let k = idempotent_power(&d, q, &x).unwrap();
            let xk: Vec<char> = x.iter().copied().cycle().take(x.len() * k).collect();
            let p = d.run_from(q, &xk).unwrap();
            prop_assert_eq!(d.run_from(p, &xk).unwrap(), p);
        }
    }
}

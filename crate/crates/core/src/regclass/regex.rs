use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use super::Dfa;
use crate::error::{Error, Result};

/// Regular expression syntax tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Regex {
    /// The empty word.
    Empty,
    Literal(char),
    Concat(Vec<Regex>),
    Alt(Vec<Regex>),
    Star(Box<Regex>),
}

impl Regex {
    /// Distinct literals in sorted order.
    pub fn alphabet(&self) -> Vec<char> {
        let mut out = BTreeSet::new();
        self.collect(&mut out);
        out.into_iter().collect()
    }

    fn collect(&self, out: &mut BTreeSet<char>) {
        match self {
            Regex::Empty => {}
            Regex::Literal(c) => {
                out.insert(*c);
            }
            Regex::Concat(parts) | Regex::Alt(parts) => parts.iter().for_each(|p| p.collect(out)),
            Regex::Star(inner) => inner.collect(out),
        }
    }
}

impl fmt::Display for Regex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regex::Empty => write!(f, "()"),
            Regex::Literal(c) => write!(f, "{c}"),
            Regex::Concat(parts) => parts.iter().try_for_each(|p| match p {
                Regex::Alt(_) => write!(f, "({p})"),
                _ => write!(f, "{p}"),
            }),
            Regex::Alt(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, "|")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
            Regex::Star(inner) => match **inner {
                Regex::Literal(_) | Regex::Empty => write!(f, "{inner}*"),
                _ => write!(f, "({inner})*"),
            },
        }
    }
}

const RESERVED: &[char] = &['|', ',', '(', ')', '*', '#', '$'];

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn peek(&mut self) -> Option<char> {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
        self.chars.get(self.pos).copied()
    }

    fn error(&self, msg: &str) -> Error {
        Error::RegexSyntax { pos: self.pos, msg: msg.into() }
    }

    fn alt(&mut self) -> Result<Regex> {
        let mut parts = vec![self.concat()?];
        while matches!(self.peek(), Some('|' | ',')) {
            self.pos += 1;
            parts.push(self.concat()?);
        }
        Ok(if parts.len() == 1 { parts.pop().expect("one part") } else { Regex::Alt(parts) })
    }

    fn concat(&mut self) -> Result<Regex> {
        let mut parts = Vec::new();
        while let Some(c) = self.peek() {
            if matches!(c, '|' | ',' | ')') {
                break;
            }
            parts.push(self.repeat()?);
        }
        Ok(match parts.len() {
            0 => Regex::Empty,
            1 => parts.pop().expect("one part"),
            _ => Regex::Concat(parts),
        })
    }

    fn repeat(&mut self) -> Result<Regex> {
        let mut atom = self.atom()?;
        while self.peek() == Some('*') {
            self.pos += 1;
            if !matches!(atom, Regex::Star(_)) {
                atom = Regex::Star(Box::new(atom));
            }
        }
        Ok(atom)
    }

    fn atom(&mut self) -> Result<Regex> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.alt()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some('ε') => {
                self.pos += 1;
                Ok(Regex::Empty)
            }
            Some('*') => Err(self.error("nothing to repeat")),
            Some(c) if RESERVED.contains(&c) => Err(self.error(&format!("unexpected {c:?}"))),
            Some(c) => {
                self.pos += 1;
                Ok(Regex::Literal(c))
            }
            None => Err(self.error("unexpected end of pattern")),
        }
    }
}

/// Parses `|` or `,` alternation, `(...)` grouping, `*` and implicit
/// concatenation. `()` and `ε` denote the empty word; whitespace is ignored.
pub fn parse_regex(text: &str) -> Result<Regex> {
    let mut p = Parser { chars: text.chars().collect(), pos: 0 };
    let r = p.alt()?;
    match p.peek() {
        None => Ok(r),
        Some(_) => Err(p.error("unbalanced ')'")),
    }
}

#[derive(Default)]
struct Nfa {
    eps: Vec<Vec<usize>>,
    edges: Vec<Vec<(char, usize)>>,
}

impl Nfa {
    fn state(&mut self) -> usize {
        self.eps.push(Vec::new());
        self.edges.push(Vec::new());
        self.eps.len() - 1
    }

    /// Thompson fragment for `r`, as (entry, exit).
    fn build(&mut self, r: &Regex) -> (usize, usize) {
        match r {
            Regex::Empty => {
                let s = self.state();
                (s, s)
            }
            Regex::Literal(c) => {
                let (s, t) = (self.state(), self.state());
                self.edges[s].push((*c, t));
                (s, t)
            }
            Regex::Concat(parts) => {
                let (start, mut end) = self.build(&parts[0]);
                for p in &parts[1..] {
                    let (s, t) = self.build(p);
                    self.eps[end].push(s);
                    end = t;
                }
                (start, end)
            }
            Regex::Alt(parts) => {
                let (s, t) = (self.state(), self.state());
                for p in parts {
                    let (ps, pt) = self.build(p);
                    self.eps[s].push(ps);
                    self.eps[pt].push(t);
                }
                (s, t)
            }
            Regex::Star(inner) => {
                let (s, t) = (self.state(), self.state());
                let (is, it) = self.build(inner);
                self.eps[s].extend([is, t]);
                self.eps[it].extend([is, t]);
                (s, t)
            }
        }
    }

    fn closure(&self, seed: impl IntoIterator<Item = usize>) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let mut stack: Vec<usize> = seed.into_iter().collect();
        while let Some(s) = stack.pop() {
            if out.insert(s) {
                stack.extend(&self.eps[s]);
            }
        }
        out
    }
}

/// Total DFA for `r` over `alphabet` by subset construction (not minimized).
/// Every literal of `r` must belong to `alphabet`.
pub fn build_dfa(r: &Regex, alphabet: &[char]) -> Result<Dfa> {
    if let Some(c) = r.alphabet().into_iter().find(|c| !alphabet.contains(c)) {
        return Err(Error::UnknownSymbol(c));
    }
    let mut nfa = Nfa::default();
    let (start, end) = nfa.build(r);
    let mut ids: BTreeMap<BTreeSet<usize>, usize> = BTreeMap::new();
    let mut sets = Vec::new();
    let mut delta: Vec<Vec<usize>> = Vec::new();
    let first = nfa.closure([start]);
    ids.insert(first.clone(), 0);
    sets.push(first);
    let mut queue = VecDeque::from([0usize]);
    while let Some(id) = queue.pop_front() {
        let mut row = Vec::with_capacity(alphabet.len());
        for &c in alphabet {
            let moved = sets[id]
                .iter()
                .flat_map(|&s| nfa.edges[s].iter().filter(move |(l, _)| *l == c).map(|&(_, t)| t))
                .collect::<Vec<_>>();
            let next = nfa.closure(moved);
            let nid = match ids.get(&next) {
                Some(&n) => n,
                None => {
                    let n = sets.len();
                    ids.insert(next.clone(), n);
                    sets.push(next);
                    queue.push_back(n);
                    n
                }
            };
            row.push(nid);
        }
        if delta.len() <= id {
            delta.resize(id + 1, Vec::new());
        }
        delta[id] = row;
    }
    let accepting = sets.iter().map(|s| s.contains(&end)).collect();
    Dfa::new(alphabet.to_vec(), delta, 0, accepting)
}

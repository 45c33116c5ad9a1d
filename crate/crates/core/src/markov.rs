//! Structure of doubly stochastic chains and the probe measuring how fast
//! two word families become indistinguishable.

use std::collections::VecDeque;
use std::fmt::Write as _;

use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::automata::{word_string, PraC};
use crate::dsmat::{mass_on, to_f64, Rational, StochMatrix};
use crate::error::{Error, Result};

pub const DEFAULT_POWER_CAP: u64 = 1 << 20;
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_M_MAX: u64 = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainReport {
    /// Communication classes, each sorted, ordered by smallest member.
    pub classes: Vec<Vec<usize>>,
    pub transient: Vec<usize>,
    /// Period of each state; 0 when the state lies on no cycle.
    pub periods: Vec<u64>,
    pub irreducible: bool,
    pub aperiodic: bool,
}

/// Successor lists: `j → i` whenever `A[i][j] > 0`.
fn successors(a: &StochMatrix) -> Vec<Vec<usize>> {
    let n = a.order();
    (0..n).map(|j| (0..n).filter(|&i| a.get(i, j).is_positive()).collect()).collect()
}

fn reachable(succ: &[Vec<usize>], from: usize) -> Vec<bool> {
    let mut seen = vec![false; succ.len()];
    seen[from] = true;
    let mut stack = vec![from];
    while let Some(s) = stack.pop() {
        for &t in &succ[s] {
            if !seen[t] {
                seen[t] = true;
                stack.push(t);
            }
        }
    }
    seen
}

/// Classes, transient states and periods of the chain with transition
/// matrix `a` (columns are sources).
pub fn analyze_chain(a: &StochMatrix) -> Result<ChainReport> {
    if !a.is_column_stochastic() {
        return Err(Error::NotStochastic);
    }
    let n = a.order();
    let succ = successors(a);
    let reach: Vec<Vec<bool>> = (0..n).map(|s| reachable(&succ, s)).collect();
    let mut class_of = vec![usize::MAX; n];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for s in 0..n {
        if class_of[s] != usize::MAX {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|&t| reach[s][t] && reach[t][s]).collect();
        for &t in &members {
            class_of[t] = classes.len();
        }
        classes.push(members);
    }
    let mut transient = Vec::new();
    let mut periods = vec![0u64; n];
    for (c, members) in classes.iter().enumerate() {
        if members.iter().any(|&s| succ[s].iter().any(|&t| class_of[t] != c)) {
            transient.extend(members);
        }
        // BFS levels inside the class; every internal edge u→v closes a
        // cycle family whose lengths share level[u] + 1 - level[v]
        let root = members[0];
        let mut level = vec![None; n];
        level[root] = Some(0i64);
        let mut queue = VecDeque::from([root]);
        let mut g = 0i64;
        while let Some(u) = queue.pop_front() {
            let lu = level[u].expect("queued states have levels");
            for &v in succ[u].iter().filter(|&&v| class_of[v] == c) {
                match level[v] {
                    None => {
                        level[v] = Some(lu + 1);
                        queue.push_back(v);
                    }
                    Some(lv) => g = g.gcd(&(lu + 1 - lv)),
                }
            }
        }
        for &s in members {
            periods[s] = g as u64;
        }
    }
    transient.sort_unstable();
    Ok(ChainReport {
        irreducible: classes.len() == 1,
        aperiodic: periods.iter().all(|&p| p == 1),
        classes,
        transient,
        periods,
    })
}

/// True when the chain has no transient states.
pub fn no_transient_check(a: &StochMatrix) -> Result<bool> {
    if !a.is_doubly_stochastic() {
        return Err(Error::NotDoublyStochastic);
    }
    Ok(analyze_chain(a)?.transient.is_empty())
}

type Pattern = Vec<Vec<bool>>;

fn pattern(a: &StochMatrix) -> Pattern {
    let n = a.order();
    (0..n).map(|i| (0..n).map(|j| !a.get(i, j).is_zero()).collect()).collect()
}

fn pattern_mul(p: &Pattern, q: &Pattern) -> Pattern {
    let n = p.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).any(|k| p[i][k] && q[k][j])).collect()).collect()
}

/// Least `K ≥ 1` such that every matrix in `mats` has a positive diagonal
/// in its `K`-th power.
pub fn positive_diagonal_power_joint(mats: &[&StochMatrix], cap: u64) -> Result<u64> {
    if mats.iter().any(|m| !m.is_doubly_stochastic()) {
        return Err(Error::NotDoublyStochastic);
    }
    let bases: Vec<Pattern> = mats.iter().map(|m| pattern(m)).collect();
    let mut powers = bases.clone();
    for k in 1..=cap {
        if powers.iter().all(|p| (0..p.len()).all(|i| p[i][i])) {
            return Ok(k);
        }
        for (p, b) in powers.iter_mut().zip(&bases) {
            *p = pattern_mul(p, b);
        }
    }
    Err(Error::CapExceeded { cap })
}

pub fn positive_diagonal_power(a: &StochMatrix, cap: u64) -> Result<u64> {
    positive_diagonal_power_joint(&[a], cap)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum StationaryOutcome {
    Converged { vector: Vec<f64>, iterations: u64 },
    Refused { reason: String },
    Diverged { iterations: u64, residual: f64 },
}

/// Power iteration from the first basis vector. Refuses chains that are not
/// irreducible and aperiodic, since the limit then depends on the start.
/// Convergence requires both `‖Av − v‖∞ < tol` and `‖v − uniform‖∞ < tol`.
pub fn stationary_limit(a: &StochMatrix, tol: f64, max_iter: u64) -> Result<StationaryOutcome> {
    if !a.is_doubly_stochastic() {
        return Err(Error::NotDoublyStochastic);
    }
    let report = analyze_chain(a)?;
    if !report.irreducible {
        return Ok(StationaryOutcome::Refused { reason: format!("reducible: {} classes", report.classes.len()) });
    }
    if !report.aperiodic {
        return Ok(StationaryOutcome::Refused { reason: format!("periodic with period {}", report.periods[0]) });
    }
    let n = a.order();
    let m = a.to_f64_rows();
    let step = |v: &[f64]| -> Vec<f64> { m.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect() };
    let dist = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let uniform = vec![1.0 / n as f64; n];
    let mut v = vec![0.0; n];
    v[0] = 1.0;
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        v = step(&v);
        let next = step(&v);
        residual = dist(&next, &v);
        if residual < tol && dist(&v, &uniform) < tol {
            return Ok(StationaryOutcome::Converged { vector: v, iterations: it });
        }
    }
    Ok(StationaryOutcome::Diverged { iterations: max_iter, residual })
}

/// The words of a probe: prefix `omega`, pattern words `x`, `y`, suffix `z`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ProbeWords {
    pub omega: Vec<char>,
    pub x: Vec<char>,
    pub y: Vec<char>,
    pub z: Vec<char>,
}

/// Which pair of word families is compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeFlavor {
    /// `ω(x^K y^K)^m z` against `ω y^K (x^K y^K)^m z`.
    Prime,
    /// `ω(x^K (xy)^K)^m z` against `ω(x^K (xy)^K)^m x^K z`.
    DoublePrime,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeResult {
    pub flavor: ProbeFlavor,
    pub k: u64,
    pub m: Vec<u64>,
    pub gaps: Vec<Rational>,
}

impl ProbeResult {
    /// `m,gap` rows with exact gaps; `with_float` adds a decimal column.
    pub fn to_csv(&self, with_float: bool) -> String {
        let mut out = String::from(if with_float { "m,gap,gap_f64\n" } else { "m,gap\n" });
        for (m, g) in self.m.iter().zip(&self.gaps) {
            if with_float {
                let _ = writeln!(out, "{m},{g},{:.6e}", to_f64(g));
            } else {
                let _ = writeln!(out, "{m},{g}");
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let value = serde_json::json!({
            "flavor": self.flavor,
            "k": self.k,
            "m": self.m,
            "gaps": self.gaps.iter().map(ToString::to_string).collect::<Vec<_>>(),
        });
        serde_json::to_string_pretty(&value).expect("plain data serializes")
    }

    pub fn last_gap(&self) -> Option<&Rational> {
        self.gaps.last()
    }
}

/// Exact acceptance gaps between the two word families of `flavor` for
/// `m = 1..=m_max`. `K` is the least power giving both pattern matrices a
/// positive diagonal.
pub fn convergence_probe(
    a: &PraC,
    words: &ProbeWords,
    m_max: u64,
    flavor: ProbeFlavor,
    cap: u64,
) -> Result<ProbeResult> {
    if m_max == 0 {
        return Err(Error::InvalidParameter("m_max must be at least 1".into()));
    }
    let machine = a.machine();
    let x = machine.word_matrix(&words.x)?;
    let y = machine.word_matrix(&words.y)?;
    let z = machine.word_matrix(&words.z)?;
    let start = machine.weights_before_dollar(&words.omega)?;
    // prime: y^K sits before the cycles; double prime: x^K after them
    let (k, cycle, tail) = match flavor {
        ProbeFlavor::Prime => {
            let k = positive_diagonal_power_joint(&[&x, &y], cap)?;
            let yk = y.pow(k);
            (k, yk.matmul(&x.pow(k))?, yk)
        }
        ProbeFlavor::DoublePrime => {
            let xy = y.matmul(&x)?;
            let k = positive_diagonal_power_joint(&[&x, &xy], cap)?;
            let xk = x.pow(k);
            (k, xy.pow(k).matmul(&xk)?, xk)
        }
    };
    let mut u1 = start.clone();
    let mut u2 = match flavor {
        ProbeFlavor::Prime => tail.mul_vec(&start),
        ProbeFlavor::DoublePrime => start,
    };
    let accept = |v: &[Rational]| mass_on(&machine.finish(z.mul_vec(v)), a.accepting());
    let mut ms = Vec::new();
    let mut gaps = Vec::new();
    for m in 1..=m_max {
        u1 = cycle.mul_vec(&u1);
        u2 = cycle.mul_vec(&u2);
        let p1 = accept(&u1);
        let p2 = match flavor {
            ProbeFlavor::Prime => accept(&u2),
            ProbeFlavor::DoublePrime => accept(&tail.mul_vec(&u2)),
        };
        ms.push(m);
        gaps.push((p1 - p2).abs());
    }
    Ok(ProbeResult { flavor, k, m: ms, gaps })
}

/// The two tapes compared at a given `m`, for display.
pub fn probe_tapes(words: &ProbeWords, k: u64, m: u64, flavor: ProbeFlavor) -> (String, String) {
    let rep = |w: &[char], n: u64| word_string(&w.repeat(n as usize));
    let (x, y, omega, z) = (&words.x, &words.y, word_string(&words.omega), word_string(&words.z));
    match flavor {
        ProbeFlavor::Prime => {
            let cycle = format!("{}{}", rep(x, k), rep(y, k)).repeat(m as usize);
            (format!("{omega}{cycle}{z}"), format!("{omega}{}{cycle}{z}", rep(y, k)))
        }
        ProbeFlavor::DoublePrime => {
            let xy: Vec<char> = x.iter().chain(y).copied().collect();
            let cycle = format!("{}{}", rep(x, k), rep(&xy, k)).repeat(m as usize);
            (format!("{omega}{cycle}{z}"), format!("{omega}{cycle}{}{z}", rep(x, k)))
        }
    }
}

//! Removing end-markers: first `$` (replicate states), then `#` (majority
//! vote over a product of the automata `#` branches into).

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{check_interval, hash_matrix, DEFAULT_STATE_BUDGET};
use crate::automata::{EndmarkerMode, Machine, PraC, LEFT_END, RIGHT_END};
use crate::dsmat::{int, Rational, StochMatrix};
use crate::error::{Error, Result};

/// `#`-only automaton simulating `m` equiprobable copies of `a`.
///
/// State `(i, k)` sits at index `i*m + k` and accepts iff `k < m·p(q_i)`,
/// where `p(q_i)` is the accepting mass `$` sends `q_i` to. Acceptance rises
/// by less than `1/m` on any word and never drops.
pub fn strip_dollar(a: &PraC, m: usize) -> Result<PraC> {
    if m == 0 {
        return Err(Error::InvalidParameter("copy count m must be positive".into()));
    }
    if !a.endmarkers().has_dollar() {
        return Err(Error::MissingEndmarker(RIGHT_END));
    }
    let machine = a.machine();
    let n = machine.size();
    let total = n * m;
    let copies = StochMatrix::identity(m);
    let mut transitions = BTreeMap::new();
    for &c in machine.alphabet() {
        transitions.insert(c, machine.matrix(c)?.kron(&copies));
    }
    let hash = machine.matrix(LEFT_END)?;
    let share = Rational::new(1.into(), (m as i64).into());
    let column: Vec<Rational> = (0..total).map(|idx| hash.get(idx / m, machine.initial()) * &share).collect();
    let initial = machine.initial() * m;
    transitions.insert(LEFT_END, hash_matrix(&column, initial));

    let dollar = machine.matrix(RIGHT_END)?;
    let scale = int(m as i64);
    let mut states = Vec::with_capacity(total);
    let mut accepting = Vec::with_capacity(total);
    for (i, name) in machine.states().iter().enumerate() {
        let p: Rational = (0..n).filter(|&q| a.accepting()[q]).map(|q| dollar.get(q, i).clone()).sum();
        let cut = &scale * p;
        for k in 0..m {
            states.push(format!("{name}.{k}"));
            accepting.push(int(k as i64) < cut);
        }
    }
    let out = Machine::new(states, machine.alphabet().to_vec(), initial, EndmarkerMode::HashOnly, transitions)?;
    PraC::new(out, accepting)
}

fn nearest_positive(x: &Rational) -> Rational {
    let half = Rational::new(1.into(), 2.into());
    (x + half).floor().max(Rational::one())
}

/// Least `n ≥ 1` such that every `p_i·n` lies within `phi` of a positive
/// integer `g_i`. Returns `n` and the `g_i`, which sum to `n`.
pub fn dirichlet_copies(probs: &[Rational], phi: &Rational) -> Result<(u64, Vec<u64>)> {
    let m = probs.len();
    if m == 0 {
        return Err(Error::InvalidParameter("no probabilities given".into()));
    }
    if probs.iter().any(|p| !p.is_positive()) || probs.iter().sum::<Rational>() != Rational::one() {
        return Err(Error::InvalidDistribution("branch probabilities must be positive and sum to 1".into()));
    }
    let limit = Rational::new(1.into(), (m as i64).into()).min(Rational::one());
    if !phi.is_positive() || *phi >= limit {
        return Err(Error::InvalidParameter(format!("phi {phi} outside (0, {limit})")));
    }
    let denominator = probs.iter().fold(num_bigint::BigInt::one(), |acc, p| acc.lcm(p.denom()));
    let bound = denominator.to_u64().ok_or_else(|| Error::InvalidParameter("denominators too large".into()))?;
    for n in 1..=bound {
        let scale = int(n as i64);
        let g: Vec<Rational> = probs.iter().map(|p| nearest_positive(&(p * &scale))).collect();
        if probs.iter().zip(&g).all(|(p, gi)| (p * &scale - gi).abs() < *phi) {
            let g: Vec<u64> = g.iter().map(|gi| gi.to_integer().to_u64().expect("at most n")).collect();
            debug_assert_eq!(g.iter().sum::<u64>(), n);
            return Ok((n, g));
        }
    }
    unreachable!("the common denominator always qualifies")
}

/// Parameters for [`strip_hash`]. `(p1, p2)` is the interval the input
/// recognizes its language with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StripHashPlan {
    pub p1: Rational,
    pub p2: Rational,
    pub epsilon: Rational,
    pub copies: usize,
    pub state_budget: usize,
}

impl StripHashPlan {
    pub fn new(p1: Rational, p2: Rational, epsilon: Rational, copies: usize) -> Self {
        Self { p1, p2, epsilon, copies, state_budget: DEFAULT_STATE_BUDGET }
    }

    /// Majority threshold `(p1 + p2) / 2`.
    pub fn threshold(&self) -> Rational {
        (&self.p1 + &self.p2) / int(2)
    }

    /// Whether `p1/(1-ε) < δ < p2/(1+ε)` holds for the threshold `δ`.
    pub fn threshold_is_separating(&self) -> bool {
        let delta = self.threshold();
        let one = Rational::one();
        &self.p1 / (&one - &self.epsilon) < delta && delta < &self.p2 / (&one + &self.epsilon)
    }

    fn check(&self) -> Result<()> {
        check_interval(&self.p1, &self.p2)?;
        let limit = (&self.p2 - &self.p1) / (&self.p2 + &self.p1);
        if !self.epsilon.is_positive() || self.epsilon >= limit {
            return Err(Error::InvalidParameter(format!("epsilon {} outside (0, {limit})", self.epsilon)));
        }
        if self.copies == 0 {
            return Err(Error::InvalidParameter("strip_hash needs at least one copy".into()));
        }
        Ok(())
    }
}

/// End-marker-free automaton for the language of a `#`-only automaton.
///
/// Each nonzero entry of the initial `#` column starts one branch. Copies
/// of the branches (in Dirichlet proportions) run side by side without any
/// `#` step, and a tuple accepts when more than `copies · δ` coordinates
/// accept. Only tuples reachable from the start tuple are kept; a set closed
/// under successors of doubly stochastic matrices is closed under
/// predecessors too, so the restricted matrices stay doubly stochastic.
pub fn strip_hash(a: &PraC, plan: &StripHashPlan) -> Result<PraC> {
    plan.check()?;
    match a.endmarkers() {
        EndmarkerMode::None => return Err(Error::MissingEndmarker(LEFT_END)),
        EndmarkerMode::Both => {
            return Err(Error::InvalidParameter("remove the $ end-marker first (strip_dollar)".into()))
        }
        EndmarkerMode::HashOnly => {}
    }
    let machine = a.machine();
    let hash = machine.matrix(LEFT_END)?;
    let branches: Vec<(usize, Rational)> = (0..machine.size())
        .map(|j| (j, hash.get(j, machine.initial()).clone()))
        .filter(|(_, p)| !p.is_zero())
        .collect();
    let probs: Vec<Rational> = branches.iter().map(|(_, p)| p.clone()).collect();
    let m = probs.len() as i64;
    let phi = Rational::new(1.into(), m.into()).min(plan.epsilon.clone()) / int(2);
    let (unit, groups) = dirichlet_copies(&probs, &phi)?;
    let unit = unit as usize;
    if !plan.copies.is_multiple_of(unit) {
        return Err(Error::InvalidParameter(format!("copies {} is not a multiple of {unit}", plan.copies)));
    }
    let repeat = plan.copies / unit;
    let start: Vec<u32> = branches
        .iter()
        .zip(&groups)
        .flat_map(|((j, _), &g)| std::iter::repeat_n(*j as u32, g as usize * repeat))
        .collect();

    // column supports: for source j, the (target, weight) pairs
    let letters = machine.alphabet().to_vec();
    let supports: Vec<Vec<Vec<(u32, Rational)>>> = letters
        .iter()
        .map(|&c| {
            let mat = machine.matrix(c).expect("letter matrix");
            (0..mat.order())
                .map(|j| {
                    (0..mat.order())
                        .filter(|&i| !mat.get(i, j).is_zero())
                        .map(|i| (i as u32, mat.get(i, j).clone()))
                        .collect()
                })
                .collect()
        })
        .collect();

    let mut index: HashMap<Vec<u32>, usize> = HashMap::new();
    let mut tuples = vec![start.clone()];
    index.insert(start, 0);
    let mut queue = VecDeque::from([0usize]);
    let mut entries: Vec<Vec<(usize, usize, Rational)>> = vec![Vec::new(); letters.len()];
    while let Some(src) = queue.pop_front() {
        let tuple = tuples[src].clone();
        for (li, support) in supports.iter().enumerate() {
            let mut partial: Vec<(Vec<u32>, Rational)> = vec![(Vec::with_capacity(tuple.len()), Rational::one())];
            for &q in &tuple {
                partial = partial
                    .into_iter()
                    .flat_map(|(prefix, w)| {
                        support[q as usize].iter().map(move |(t, x)| {
                            let mut next = prefix.clone();
                            next.push(*t);
                            (next, &w * x)
                        })
                    })
                    .collect();
            }
            for (target, w) in partial {
                let dst = match index.get(&target) {
                    Some(&d) => d,
                    None => {
                        let d = tuples.len();
                        if d >= plan.state_budget {
                            return Err(Error::BudgetExceeded { needed: d + 1, budget: plan.state_budget });
                        }
                        index.insert(target.clone(), d);
                        tuples.push(target);
                        queue.push_back(d);
                        d
                    }
                };
                entries[li].push((dst, src, w));
            }
        }
    }

    let total = tuples.len();
    let mut transitions = BTreeMap::new();
    for (li, list) in entries.into_iter().enumerate() {
        let mut grid = vec![vec![Rational::zero(); total]; total];
        for (dst, src, w) in list {
            grid[dst][src] += w;
        }
        transitions.insert(letters[li], StochMatrix::new(grid)?);
    }
    let bar = int(plan.copies as i64) * plan.threshold();
    let states = tuples
        .iter()
        .map(|t| t.iter().map(|&q| machine.states()[q as usize].as_str()).collect::<Vec<_>>().join("|"))
        .collect();
    let accepting =
        tuples.iter().map(|t| int(t.iter().filter(|&&q| a.accepting()[q as usize]).count() as i64) > bar).collect();
    PraC::new(Machine::new(states, letters, 0, EndmarkerMode::None, transitions)?, accepting)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{recognition_interval, word, words_up_to, Validate};
    use crate::constructions::{ln_member, normalize_probability};
    use crate::dsmat::rat;
    use crate::fixtures::{fix_l2, fix_l2_mixed_dollar};

    #[test]
    fn dirichlet_reference_cases() {
        assert_eq!(dirichlet_copies(&[rat(1, 2), rat(1, 2)], &rat(1, 4)).unwrap(), (2, vec![1, 1]));
        assert_eq!(dirichlet_copies(&[rat(1, 3), rat(2, 3)], &rat(1, 10)).unwrap(), (3, vec![1, 2]));
        assert_eq!(dirichlet_copies(&[rat(2, 5), rat(3, 5)], &rat(1, 3)).unwrap(), (2, vec![1, 1]));
        assert_eq!(dirichlet_copies(&[int(1)], &rat(1, 2)).unwrap(), (1, vec![1]));
    }

    #[test]
    fn dirichlet_matches_direct_scan() {
        let probs = [rat(4, 7), rat(3, 7)];
        let phi = rat(1, 20);
        let (n, g) = dirichlet_copies(&probs, &phi).unwrap();
        for k in 1..n {
            let ok = probs.iter().all(|p| {
                let x = p * int(k as i64);
                (1..=k as i64).any(|gi| (x.clone() - int(gi)).abs() < phi)
            });
            assert!(!ok, "n={k} should not qualify");
        }
        assert_eq!((n, g), (7, vec![4, 3]));
    }

    #[test]
    fn dirichlet_rejects_bad_phi() {
        assert!(dirichlet_copies(&[rat(1, 2), rat(1, 2)], &rat(1, 2)).is_err());
        assert!(dirichlet_copies(&[rat(1, 2), rat(1, 2)], &int(0)).is_err());
        assert!(dirichlet_copies(&[rat(1, 2), rat(1, 3)], &rat(1, 10)).is_err());
    }

    #[test]
    fn strip_dollar_with_identity_dollar_copies_final_states() {
        let a = fix_l2();
        let s = strip_dollar(&a, 3).unwrap();
        assert!(s.validate().is_valid());
        assert_eq!(s.endmarkers(), EndmarkerMode::HashOnly);
        assert_eq!(s.accepting(), &[true, true, true, true, true, true, false, false, false]);
        for w in words_up_to(a.alphabet(), 5) {
            assert_eq!(s.accept_prob(&w).unwrap(), a.accept_prob(&w).unwrap());
        }
    }

    #[test]
    fn strip_dollar_mixed_keeps_separation() {
        let a = fix_l2_mixed_dollar();
        let before = recognition_interval(&a, ln_member, 6).unwrap();
        let s = strip_dollar(&a, 5).unwrap();
        assert!(s.validate().is_valid());
        let after = recognition_interval(&s, ln_member, 6).unwrap();
        assert!(after.separates());
        assert!(after.p2.clone().unwrap() >= before.p2.clone().unwrap());
        assert!(after.p1.clone().unwrap() < before.p1.clone().unwrap() + rat(1, 5));
        assert!(after.gap().unwrap() >= before.gap().unwrap() - rat(1, 5));
    }

    #[test]
    fn strip_dollar_zero_copies_fails() {
        assert!(strip_dollar(&fix_l2(), 0).is_err());
    }

    #[test]
    fn strip_hash_identity_hash_drops_marker() {
        let hashed = strip_dollar(&fix_l2(), 1).unwrap();
        let plan = StripHashPlan::new(rat(3, 4), int(1), rat(1, 10), 1);
        let s = strip_hash(&hashed, &plan).unwrap();
        assert!(s.validate().is_valid());
        assert_eq!(s.endmarkers(), EndmarkerMode::None);
        for w in words_up_to(s.alphabet(), 5) {
            assert_eq!(s.accept_prob(&w).unwrap(), hashed.accept_prob(&w).unwrap());
        }
    }

    #[test]
    fn strip_hash_two_branch_desk_case() {
        let n = normalize_probability(&fix_l2(), &rat(3, 4), &int(1)).unwrap();
        let hashed = strip_dollar(&n, 1).unwrap();
        let plan = StripHashPlan::new(rat(3, 7), rat(4, 7), rat(1, 10), 7);
        assert!(plan.threshold_is_separating());
        let s = strip_hash(&hashed, &plan).unwrap();
        assert!(s.validate().is_valid());
        assert!(s.size() <= 81);
        let i = recognition_interval(&s, ln_member, 5).unwrap();
        assert!(i.separates(), "{i}");
        // four live copies must all accept
        assert_eq!(s.accept_prob(&word("ba")).unwrap(), rat(81, 256));
    }

    #[test]
    fn strip_hash_parameter_errors() {
        let hashed = strip_dollar(&fix_l2(), 1).unwrap();
        let wide = StripHashPlan::new(rat(3, 4), int(1), rat(1, 2), 1);
        assert!(strip_hash(&hashed, &wide).is_err());
        assert_eq!(
            strip_hash(&fix_l2(), &StripHashPlan::new(rat(3, 4), int(1), rat(1, 10), 1)).map(|_| ()),
            Err(Error::InvalidParameter("remove the $ end-marker first (strip_dollar)".into()))
        );
        let n = strip_dollar(&normalize_probability(&fix_l2(), &rat(3, 4), &int(1)).unwrap(), 1).unwrap();
        let odd = StripHashPlan::new(rat(3, 7), rat(4, 7), rat(1, 10), 3);
        assert!(strip_hash(&n, &odd).is_err());
        let mut tight = StripHashPlan::new(rat(3, 7), rat(4, 7), rat(1, 10), 7);
        tight.state_budget = 10;
        assert!(matches!(strip_hash(&n, &tight), Err(Error::BudgetExceeded { .. })));
    }
}

//! Automaton-to-automaton constructions. Every output is again a doubly
//! stochastic automaton; each is checked by `validate` in the tests.

mod endmarkers;

use std::collections::BTreeMap;

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::automata::{EndmarkerMode, Machine, PraC, LEFT_END, RIGHT_END};
use crate::dsmat::{int, Rational, StochMatrix};
use crate::error::{Error, Result};

pub use endmarkers::{dirichlet_copies, strip_dollar, strip_hash, StripHashPlan};

pub const DEFAULT_STATE_BUDGET: usize = 4096;

fn check_interval(p1: &Rational, p2: &Rational) -> Result<()> {
    let unit = |p: &Rational| !p.is_negative() && *p <= Rational::one();
    if p1 >= p2 || !unit(p1) || !unit(p2) {
        return Err(Error::InvalidInterval { p1: p1.to_string(), p2: p2.to_string() });
    }
    Ok(())
}

fn require_hash(a: &PraC) -> Result<()> {
    if a.endmarkers().has_hash() {
        Ok(())
    } else {
        Err(Error::MissingEndmarker(LEFT_END))
    }
}

/// `#`-matrix whose `initial` column is `column`; every other column is
/// `(1 - column[i]) / (n - 1)` in row `i`, which makes rows sum to one.
pub(crate) fn hash_matrix(column: &[Rational], initial: usize) -> StochMatrix {
    let n = column.len();
    let fill = if n > 1 { int(n as i64 - 1) } else { int(1) };
    let rows = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if j == initial { column[i].clone() } else { (Rational::one() - &column[i]) / &fill })
                .collect()
        })
        .collect();
    StochMatrix::new(rows).expect("square with entries in [0,1]")
}

fn block_diag(a: &StochMatrix, b: &StochMatrix) -> StochMatrix {
    let (p, q) = (a.order(), b.order());
    let n = p + q;
    let rows = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| match (i < p, j < p) {
                    (true, true) => a.get(i, j).clone(),
                    (false, false) => b.get(i - p, j - p).clone(),
                    _ => Rational::zero(),
                })
                .collect()
        })
        .collect();
    StochMatrix::new(rows).expect("blocks are valid")
}

fn fresh_name(states: &[String], base: &str) -> String {
    let mut name = base.to_string();
    while states.contains(&name) {
        name.push('\'');
    }
    name
}

/// Recognition probability reached by [`normalize_probability`] on `(p1, p2)`.
pub fn normalized_probability(p1: &Rational, p2: &Rational) -> Rational {
    let s = p1 + p2;
    if s >= Rational::one() {
        p2 / s
    } else {
        (Rational::one() - p1) / (int(2) - s)
    }
}

/// Turns an interval `(p1, p2)` into recognition with a single probability
/// by diverting part of the `#` step into a new sink state.
///
/// When `p1 + p2 >= 1` the sink rejects and takes `(p1+p2-1)/(p1+p2)` of
/// the initial mass; otherwise it accepts and takes `(1-p1-p2)/(2-p1-p2)`.
pub fn normalize_probability(a: &PraC, p1: &Rational, p2: &Rational) -> Result<PraC> {
    check_interval(p1, p2)?;
    require_hash(a)?;
    let m = a.machine();
    let old = m.size();
    let s = p1 + p2;
    let (scale, sink_weight, sink_accepts) = if s >= Rational::one() {
        (Rational::one() / &s, (&s - Rational::one()) / &s, false)
    } else {
        let d = int(2) - &s;
        (Rational::one() / &d, (Rational::one() - &s) / &d, true)
    };
    let hash = m.matrix(LEFT_END)?;
    let mut column: Vec<Rational> = (0..old).map(|i| hash.get(i, m.initial()) * &scale).collect();
    column.push(sink_weight);

    let sink = StochMatrix::identity(1);
    let mut transitions = BTreeMap::new();
    for (&c, mat) in m.transitions() {
        let next = if c == LEFT_END { hash_matrix(&column, m.initial()) } else { block_diag(mat, &sink) };
        transitions.insert(c, next);
    }
    let mut states = m.states().to_vec();
    states.push(fresh_name(&states, "sink"));
    let mut accepting = a.accepting().to_vec();
    accepting.push(sink_accepts);
    PraC::new(Machine::new(states, m.alphabet().to_vec(), m.initial(), m.endmarkers(), transitions)?, accepting)
}

/// Parameters for the majority-vote product of identical copies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoostPlan {
    pub copies: usize,
    /// The product accepts when more than `copies * threshold` copies accept.
    pub threshold: Rational,
    pub state_budget: usize,
}

impl BoostPlan {
    /// Threshold at the midpoint of `(p1, p2)`.
    pub fn new(copies: usize, p1: &Rational, p2: &Rational) -> Result<Self> {
        check_interval(p1, p2)?;
        Ok(Self::with_threshold(copies, (p1 + p2) / int(2)))
    }

    pub fn with_threshold(copies: usize, threshold: Rational) -> Self {
        Self { copies, threshold, state_budget: DEFAULT_STATE_BUDGET }
    }
}

fn power_size(base: usize, copies: usize, budget: usize) -> Result<usize> {
    let needed = u32::try_from(copies).ok().and_then(|c| base.checked_pow(c));
    match needed {
        Some(n) if n <= budget => Ok(n),
        Some(n) => Err(Error::BudgetExceeded { needed: n, budget }),
        None => Err(Error::BudgetExceeded { needed: usize::MAX, budget }),
    }
}

/// Digits of `index` in base `base`, most significant first.
fn tuple_of(mut index: usize, base: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = index % base;
        index /= base;
    }
    out
}

/// Tensor power of `a` with majority acceptance: state `(s_1, …, s_n)`
/// accepts when more than `n · threshold` coordinates are accepting in `a`.
pub fn boost(a: &PraC, plan: &BoostPlan) -> Result<PraC> {
    if plan.copies == 0 {
        return Err(Error::InvalidParameter("boost needs at least one copy".into()));
    }
    let m = a.machine();
    let base = m.size();
    let total = power_size(base, plan.copies, plan.state_budget)?;
    let mut transitions = BTreeMap::new();
    for (&c, mat) in m.transitions() {
        let mut acc = mat.clone();
        for _ in 1..plan.copies {
            acc = acc.kron(mat);
        }
        transitions.insert(c, acc);
    }
    let bar = int(plan.copies as i64) * &plan.threshold;
    let mut states = Vec::with_capacity(total);
    let mut accepting = Vec::with_capacity(total);
    for idx in 0..total {
        let tuple = tuple_of(idx, base, plan.copies);
        let hits = tuple.iter().filter(|&&q| a.accepting()[q]).count();
        accepting.push(int(hits as i64) > bar);
        states.push(tuple.iter().map(|&q| m.states()[q].as_str()).collect::<Vec<_>>().join("|"));
    }
    let initial = (0..plan.copies).fold(0, |acc, _| acc * base + m.initial());
    PraC::new(Machine::new(states, m.alphabet().to_vec(), initial, m.endmarkers(), transitions)?, accepting)
}

/// `1 / (4 ε η0²)` with `η0 = (p2 - p1) / 4`.
pub fn copies_bound(p1: &Rational, p2: &Rational, epsilon: &Rational) -> Result<Rational> {
    check_interval(p1, p2)?;
    if !epsilon.is_positive() || *epsilon >= Rational::one() {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} outside (0, 1)")));
    }
    let eta = (p2 - p1) / int(4);
    Ok(Rational::one() / (int(4) * epsilon * &eta * &eta))
}

/// Least copy count strictly above [`copies_bound`].
pub fn copies_needed(p1: &Rational, p2: &Rational, epsilon: &Rational) -> Result<u64> {
    let bound = copies_bound(p1, p2, epsilon)?;
    let n: num_bigint::BigInt = bound.floor().to_integer() + 1;
    n.to_u64().ok_or_else(|| Error::InvalidParameter(format!("copy count {n} too large")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BooleanOp {
    Union,
    Intersection,
}

/// Interval the mixture of [`boolean_combine`] is guaranteed to achieve when
/// the inputs recognize their languages with probabilities `pa` and `pb`
/// (both above 2/3). The bound on the unnamed side is the worst case.
pub fn combined_interval_bounds(op: BooleanOp, pa: &Rational, pb: &Rational) -> (Rational, Rational) {
    let lo = pa.min(pb);
    let half = |x: &Rational| x / int(2);
    match op {
        BooleanOp::Intersection => (Rational::one() - half(lo), half(&(pa + pb))),
        BooleanOp::Union => (half(&(int(2) - pa - pb)), half(lo)),
    }
}

/// Fair mixture of `a` and `b`: the `#` step hands half of the initial mass
/// to each automaton's post-`#` distribution, then both run side by side.
/// Accepting states are the union of both accepting sets.
///
/// The same automaton serves union and intersection; they differ only in
/// which interval separates the language (see [`combined_interval_bounds`]).
pub fn boolean_combine(a: &PraC, b: &PraC, _op: BooleanOp) -> Result<PraC> {
    let (ma, mb) = (a.machine(), b.machine());
    let mut sa = ma.alphabet().to_vec();
    let mut sb = mb.alphabet().to_vec();
    sa.sort_unstable();
    sb.sort_unstable();
    if sa != sb {
        return Err(Error::AlphabetMismatch { left: ma.alphabet().to_vec(), right: mb.alphabet().to_vec() });
    }
    require_hash(a)?;
    require_hash(b)?;
    let mode = if ma.endmarkers().has_dollar() || mb.endmarkers().has_dollar() {
        EndmarkerMode::Both
    } else {
        EndmarkerMode::HashOnly
    };
    let half = Rational::new(1.into(), 2.into());
    let (ha, hb) = (ma.matrix(LEFT_END)?, mb.matrix(LEFT_END)?);
    let column: Vec<Rational> = (0..ma.size())
        .map(|i| ha.get(i, ma.initial()) * &half)
        .chain((0..mb.size()).map(|j| hb.get(j, mb.initial()) * &half))
        .collect();
    let mut transitions = BTreeMap::new();
    transitions.insert(LEFT_END, hash_matrix(&column, ma.initial()));
    for c in ma.alphabet().iter().copied().chain(mode.has_dollar().then_some(RIGHT_END)) {
        let pick = |m: &Machine| m.transitions().get(&c).cloned().unwrap_or_else(|| StochMatrix::identity(m.size()));
        transitions.insert(c, block_diag(&pick(ma), &pick(mb)));
    }
    let states =
        ma.states().iter().map(|s| format!("A.{s}")).chain(mb.states().iter().map(|s| format!("B.{s}"))).collect();
    let accepting = a.accepting().iter().chain(b.accepting()).copied().collect();
    PraC::new(Machine::new(states, ma.alphabet().to_vec(), ma.initial(), mode, transitions)?, accepting)
}

/// Swaps accepting and rejecting states.
pub fn complement(a: &PraC) -> PraC {
    let accepting = a.accepting().iter().map(|x| !x).collect();
    PraC::new(a.machine().clone(), accepting).expect("same shape")
}

/// A letter-to-word map `h: Σ → T*`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomomorphismSpec {
    map: BTreeMap<char, Vec<char>>,
    target: Vec<char>,
}

impl HomomorphismSpec {
    pub fn new(map: BTreeMap<char, Vec<char>>, target: Vec<char>) -> Result<Self> {
        for (src, image) in &map {
            if *src == LEFT_END || *src == RIGHT_END {
                return Err(Error::InvalidParameter("end-markers cannot be mapped".into()));
            }
            if let Some(&c) = image.iter().find(|c| !target.contains(c)) {
                return Err(Error::UnknownSymbol(c));
            }
        }
        Ok(Self { map, target })
    }

    pub fn source(&self) -> Vec<char> {
        self.map.keys().copied().collect()
    }

    pub fn target(&self) -> &[char] {
        &self.target
    }

    pub fn image(&self, symbol: char) -> Option<&[char]> {
        self.map.get(&symbol).map(Vec::as_slice)
    }

    pub fn apply(&self, word: &[char]) -> Result<Vec<char>> {
        let mut out = Vec::new();
        for &c in word {
            out.extend_from_slice(self.image(c).ok_or(Error::UnknownSymbol(c))?);
        }
        Ok(out)
    }
}

/// Automaton over the source alphabet reading `σ` as the word `h(σ)`.
pub fn inverse_hom(a: &PraC, h: &HomomorphismSpec) -> Result<PraC> {
    let m = a.machine();
    if let Some(&c) = h.target().iter().find(|c| !m.alphabet().contains(c)) {
        return Err(Error::AlphabetMismatch { left: m.alphabet().to_vec(), right: vec![c] });
    }
    let mut transitions = BTreeMap::new();
    for c in h.source() {
        transitions.insert(c, m.word_matrix(h.image(c).expect("key of map"))?);
    }
    for c in m.endmarkers().markers() {
        transitions.insert(c, m.matrix(c)?.clone());
    }
    let machine = Machine::new(m.states().to_vec(), h.source(), m.initial(), m.endmarkers(), transitions)?;
    PraC::new(machine, a.accepting().to_vec())
}

/// Folds the prefix `u` into the `#` step, so the result accepts `w` the way
/// `a` accepts `u·w`.
pub fn left_quotient(a: &PraC, u: &[char]) -> Result<PraC> {
    require_hash(a)?;
    let m = a.machine();
    let prefix = m.word_matrix(u)?;
    let mut transitions = m.transitions().clone();
    let hash = prefix.matmul(m.matrix(LEFT_END)?)?;
    transitions.insert(LEFT_END, hash);
    PraC::new(m.with_transitions(transitions)?, a.accepting().to_vec())
}

/// Letters used by the `n`-letter family: `a, b, c, …`.
pub fn ln_letters(n: usize) -> Vec<char> {
    (0..n).map(|k| (b'a' + k as u8) as char).collect()
}

/// Pattern `a*b*…` for the `n`-letter family.
pub fn ln_regex(n: usize) -> String {
    ln_letters(n).iter().map(|c| format!("{c}*")).collect()
}

/// Membership in `a_1* a_2* … a_n*`: letter indices never decrease.
pub fn ln_member(word: &[char]) -> bool {
    word.windows(2).all(|w| w[0] <= w[1])
}

/// `(n+1)`-state automaton for `a_1* … a_n*`.
///
/// The `k`-th letter averages states `0..k` among themselves and states
/// `k..=n` among themselves. States `0..n` accept; `n` is the only
/// rejecting state. End-markers act as the identity.
pub fn ln_family(n: usize) -> Result<PraC> {
    if n == 0 || n > 26 {
        return Err(Error::InvalidParameter(format!("family index {n} outside 1..=26")));
    }
    let size = n + 1;
    let mut transitions = BTreeMap::new();
    for (k, c) in ln_letters(n).into_iter().enumerate() {
        let split = k + 1;
        let low = Rational::new(1.into(), (split as i64).into());
        let high = Rational::new(1.into(), ((size - split) as i64).into());
        let rows = (0..size)
            .map(|i| {
                (0..size)
                    .map(|j| match (i < split, j < split) {
                        (true, true) => low.clone(),
                        (false, false) => high.clone(),
                        _ => Rational::zero(),
                    })
                    .collect()
            })
            .collect();
        transitions.insert(c, StochMatrix::new(rows)?);
    }
    transitions.insert(LEFT_END, StochMatrix::identity(size));
    transitions.insert(RIGHT_END, StochMatrix::identity(size));
    let states = (0..size).map(|i| format!("q{i}")).collect();
    let accepting = (0..size).map(|i| i < n).collect();
    PraC::new(Machine::new(states, ln_letters(n), 0, EndmarkerMode::Both, transitions)?, accepting)
}

/// Largest non-member acceptance of [`ln_family`]: `1 - 1/(⌊(n/2)²⌋ + n + 1)`.
pub fn ln_interval_lower(n: usize) -> Rational {
    let n = n as i64;
    let floor_sq = n * n / 4;
    Rational::one() - Rational::new(1.into(), (floor_sq + n + 1).into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{recognition_interval, word, words_up_to, Validate};
    use crate::dsmat::rat;
    use crate::fixtures::fix_l2;

    #[test]
    fn ln2_matches_displayed_matrices() {
        let a = ln_family(2).unwrap();
        let va = StochMatrix::from_ratios(&[
            &[(1, 1), (0, 1), (0, 1)],
            &[(0, 1), (1, 2), (1, 2)],
            &[(0, 1), (1, 2), (1, 2)],
        ])
        .unwrap();
        let vb = StochMatrix::from_ratios(&[
            &[(1, 2), (1, 2), (0, 1)],
            &[(1, 2), (1, 2), (0, 1)],
            &[(0, 1), (0, 1), (1, 1)],
        ])
        .unwrap();
        assert_eq!(a.matrix('a').unwrap(), &va);
        assert_eq!(a.matrix('b').unwrap(), &vb);
        assert_eq!(a.accepting(), &[true, true, false]);
    }

    #[test]
    fn ln_interval_closed_form_values() {
        assert_eq!(ln_interval_lower(2), rat(3, 4));
        assert_eq!(ln_interval_lower(3), rat(5, 6));
        assert_eq!(ln_interval_lower(4), rat(8, 9));
        assert_eq!(ln_interval_lower(5), rat(11, 12));
    }

    #[test]
    fn ln_members_accepted_with_certainty() {
        for n in 1..=4 {
            let a = ln_family(n).unwrap();
            assert!(a.validate().is_valid());
            for w in words_up_to(a.alphabet(), 5).iter().filter(|w| ln_member(w)) {
                assert_eq!(a.accept_prob(w).unwrap(), int(1));
            }
        }
    }

    #[test]
    fn ln_family_rejects_zero() {
        assert!(ln_family(0).is_err());
    }

    #[test]
    fn normalization_branches() {
        assert_eq!(normalized_probability(&rat(3, 4), &int(1)), rat(4, 7));
        assert_eq!(normalized_probability(&int(0), &int(1)), int(1));
        assert_eq!(normalized_probability(&rat(1, 10), &rat(1, 5)), rat(9, 17));
    }

    #[test]
    fn normalize_fix_l2_interval() {
        let n = normalize_probability(&fix_l2(), &rat(3, 4), &int(1)).unwrap();
        assert!(n.validate().is_valid());
        let i = recognition_interval(&n, ln_member, 6).unwrap();
        assert_eq!((i.p1.unwrap(), i.p2.unwrap()), (rat(3, 7), rat(4, 7)));
    }

    #[test]
    fn normalize_degenerate_keeps_behaviour() {
        let a = fix_l2();
        let n = normalize_probability(&a, &int(0), &int(1)).unwrap();
        assert!(n.validate().is_valid());
        for w in words_up_to(a.alphabet(), 4) {
            assert_eq!(n.accept_prob(&w).unwrap(), a.accept_prob(&w).unwrap());
        }
    }

    #[test]
    fn normalize_low_interval_uses_accepting_sink() {
        let a = complement(&fix_l2());
        // complement has interval (0, 1/4) for the complement language
        let n = normalize_probability(&a, &int(0), &rat(1, 4)).unwrap();
        assert!(n.validate().is_valid());
        assert_eq!(n.accepting().last(), Some(&true));
        let i = recognition_interval(&n, |w| !ln_member(w), 6).unwrap();
        let p = normalized_probability(&int(0), &rat(1, 4));
        assert_eq!(i.p2.unwrap(), p.clone());
        assert_eq!(i.p1.unwrap(), int(1) - p);
    }

    #[test]
    fn normalize_rejects_bad_interval() {
        assert!(matches!(normalize_probability(&fix_l2(), &int(1), &rat(1, 2)), Err(Error::InvalidInterval { .. })));
    }

    #[test]
    fn boost_single_copy_is_identity_behaviour() {
        let a = fix_l2();
        let b = boost(&a, &BoostPlan::new(1, &rat(3, 4), &int(1)).unwrap()).unwrap();
        for w in words_up_to(a.alphabet(), 5) {
            assert_eq!(b.accept_prob(&w).unwrap(), a.accept_prob(&w).unwrap());
        }
    }

    #[test]
    fn boost_three_copies_on_ba() {
        let b = boost(&fix_l2(), &BoostPlan::with_threshold(3, rat(7, 8))).unwrap();
        assert!(b.validate().is_valid());
        assert_eq!(b.accept_prob(&word("ba")).unwrap(), rat(27, 64));
        assert_eq!(b.accept_prob(&word("aabb")).unwrap(), int(1));
    }

    #[test]
    fn boost_budget_is_enforced() {
        let mut plan = BoostPlan::with_threshold(8, rat(7, 8));
        plan.state_budget = 4096;
        assert_eq!(boost(&fix_l2(), &plan), Err(Error::BudgetExceeded { needed: 6561, budget: 4096 }));
    }

    #[test]
    fn copies_needed_reference_value() {
        assert_eq!(copies_bound(&rat(3, 4), &int(1), &rat(1, 10)).unwrap(), int(640));
        assert_eq!(copies_needed(&rat(3, 4), &int(1), &rat(1, 10)).unwrap(), 641);
    }

    #[test]
    fn copies_scale_with_epsilon_and_gap() {
        let (p1, p2) = (rat(1, 4), rat(3, 4));
        let quarter = copies_bound(&p1, &p2, &rat(1, 4)).unwrap();
        let half = copies_bound(&p1, &p2, &rat(1, 2)).unwrap();
        assert_eq!(half * int(2), quarter);
        let narrow = copies_bound(&rat(1, 2), &rat(3, 4), &rat(1, 4)).unwrap();
        let wide = copies_bound(&rat(1, 4), &rat(3, 4), &rat(1, 4)).unwrap();
        assert_eq!(wide * int(4), narrow);
        assert!(copies_needed(&p1, &p2, &int(0)).is_err());
    }

    #[test]
    fn complement_flips_probabilities() {
        let a = fix_l2();
        let c = complement(&a);
        assert_eq!(complement(&c), a);
        assert_eq!(c.accept_prob(&word("ba")).unwrap(), rat(1, 4));
        assert_eq!(c.accept_prob(&word("ab")).unwrap(), int(0));
        let i = recognition_interval(&c, |w| !ln_member(w), 6).unwrap();
        assert_eq!((i.p1.unwrap(), i.p2.unwrap()), (int(0), rat(1, 4)));
    }

    #[test]
    fn inverse_hom_identity_and_collapse() {
        let a = fix_l2();
        let id = HomomorphismSpec::new([('a', vec!['a']), ('b', vec!['b'])].into(), vec!['a', 'b']).unwrap();
        assert_eq!(inverse_hom(&a, &id).unwrap(), a);
        let collapse = HomomorphismSpec::new([('a', vec!['a']), ('b', vec!['a'])].into(), vec!['a', 'b']).unwrap();
        let h = inverse_hom(&a, &collapse).unwrap();
        for w in words_up_to(h.alphabet(), 5) {
            assert_eq!(h.accept_prob(&w).unwrap(), int(1));
        }
    }

    #[test]
    fn inverse_hom_product_order() {
        let a = fix_l2();
        let spec = HomomorphismSpec::new([('c', vec!['a', 'b'])].into(), vec!['a', 'b']).unwrap();
        let h = inverse_hom(&a, &spec).unwrap();
        let expected = a.matrix('b').unwrap().matmul(a.matrix('a').unwrap()).unwrap();
        assert_eq!(h.matrix('c').unwrap(), &expected);
        let empty = HomomorphismSpec::new([('e', vec![])].into(), vec!['a', 'b']).unwrap();
        assert_eq!(inverse_hom(&a, &empty).unwrap().matrix('e').unwrap(), &StochMatrix::identity(3));
    }

    #[test]
    fn homomorphism_rejects_foreign_letters() {
        assert_eq!(HomomorphismSpec::new([('a', vec!['z'])].into(), vec!['a', 'b']), Err(Error::UnknownSymbol('z')));
    }

    #[test]
    fn quotient_examples() {
        let a = fix_l2();
        assert_eq!(left_quotient(&a, &[]).unwrap(), a);
        assert_eq!(left_quotient(&a, &word("b")).unwrap().accept_prob(&word("a")).unwrap(), rat(3, 4));
        assert_eq!(left_quotient(&a, &word("a")).unwrap().accept_prob(&word("b")).unwrap(), int(1));
        assert_eq!(left_quotient(&a, &word("x")), Err(Error::UnknownSymbol('x')));
    }

    #[test]
    fn combine_with_itself_keeps_probabilities() {
        let n = normalize_probability(&fix_l2(), &rat(3, 4), &int(1)).unwrap();
        let u = boolean_combine(&n, &n, BooleanOp::Union).unwrap();
        assert!(u.validate().is_valid());
        for w in words_up_to(n.alphabet(), 4) {
            assert_eq!(u.accept_prob(&w).unwrap(), n.accept_prob(&w).unwrap());
        }
        let i = recognition_interval(&u, ln_member, 5).unwrap();
        assert!(i.separates());
    }

    #[test]
    fn combine_requires_same_alphabet() {
        let a = fix_l2();
        let b = ln_family(3).unwrap();
        assert!(matches!(boolean_combine(&a, &b, BooleanOp::Union), Err(Error::AlphabetMismatch { .. })));
    }

    #[test]
    fn interval_bounds_are_ordered_above_two_thirds() {
        for (pa, pb) in [(rat(7, 10), rat(9, 10)), (rat(64, 91), int(1)), (rat(3, 4), rat(3, 4))] {
            let (lo, hi) = combined_interval_bounds(BooleanOp::Intersection, &pa, &pb);
            assert!(lo < hi);
            let (lo, hi) = combined_interval_bounds(BooleanOp::Union, &pa, &pb);
            assert!(lo < hi);
        }
    }
}

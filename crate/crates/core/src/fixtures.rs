//! Small reference automata used by tests, benches and the CLI examples.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::automata::{EndmarkerMode, Flavor, Machine, Pra15, PraC, PraDh, StepGrid, LEFT_END, RIGHT_END};
use crate::constructions::ln_family;
use crate::dsmat::{rat, Rational, StochMatrix};

/// Three-state automaton for `a*b*` with interval `(3/4, 1)`.
pub fn fix_l2() -> PraC {
    ln_family(2).expect("n = 2 is in range")
}

/// [`fix_l2`] with a `$` step that mixes `q1` and `q2` by `1/20`.
pub fn fix_l2_mixed_dollar() -> PraC {
    let a = fix_l2();
    let dollar = StochMatrix::from_ratios(&[
        &[(1, 1), (0, 1), (0, 1)],
        &[(0, 1), (19, 20), (1, 20)],
        &[(0, 1), (1, 20), (19, 20)],
    ])
    .expect("valid matrix");
    let mut transitions = a.machine().transitions().clone();
    transitions.insert(RIGHT_END, dollar);
    PraC::new(a.machine().with_transitions(transitions).expect("same shape"), a.accepting().to_vec())
        .expect("same shape")
}

/// Permutation DH automaton deciding `a(a|b)*` on the first letter.
pub fn fix_adh() -> PraDh {
    // states: q0, acc, rej
    let swap_acc = StochMatrix::permutation(&[1, 0, 2]);
    let swap_rej = StochMatrix::permutation(&[2, 1, 0]);
    let mut transitions = BTreeMap::new();
    transitions.insert('a', swap_acc);
    transitions.insert('b', swap_rej);
    transitions.insert(LEFT_END, StochMatrix::identity(3));
    transitions.insert(RIGHT_END, StochMatrix::identity(3));
    let states = vec!["q0".to_string(), "acc".to_string(), "rej".to_string()];
    let machine = Machine::new(states, vec!['a', 'b'], 0, EndmarkerMode::Both, transitions).expect("valid machine");
    PraDh::new(machine, vec![false, true, false], vec![false, false, true]).expect("valid partition")
}

fn grid(cells: &[((usize, usize), Rational)]) -> Vec<Vec<Rational>> {
    let mut g = vec![vec![Rational::zero(); 2]; 2];
    for ((target, source), w) in cells {
        g[*target][*source] = w.clone();
    }
    g
}

/// Two-state 1.5-way automaton for `(a|b)*a`. Every step stays or advances
/// with probability 1/2; the state after advancing remembers the last
/// letter. The end-markers advance without changing state.
pub fn fix_15() -> Pra15 {
    let half = rat(1, 2);
    let one = rat(1, 1);
    let mut transitions = BTreeMap::new();
    transitions.insert(
        'a',
        StepGrid {
            stay: grid(&[((0, 0), half.clone()), ((0, 1), half.clone())]),
            advance: grid(&[((1, 0), half.clone()), ((1, 1), half.clone())]),
        },
    );
    transitions.insert(
        'b',
        StepGrid {
            stay: grid(&[((1, 0), half.clone()), ((1, 1), half.clone())]),
            advance: grid(&[((0, 0), half.clone()), ((0, 1), half)]),
        },
    );
    let identity_advance = StepGrid { stay: grid(&[]), advance: grid(&[((0, 0), one.clone()), ((1, 1), one)]) };
    transitions.insert(LEFT_END, identity_advance.clone());
    transitions.insert(RIGHT_END, identity_advance);
    Pra15::new(
        vec!["q0".into(), "q1".into()],
        vec!['a', 'b'],
        0,
        vec![false, true],
        EndmarkerMode::Both,
        transitions,
        Flavor::Weak,
    )
    .expect("valid 1.5-way automaton")
}

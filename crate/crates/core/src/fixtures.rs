//! Small reference machines used across the documentation, the tests, and
//! the bundled spec corpus.

use crate::finstoch::{FinSpace, Kernel};
use crate::interpretation::{InferenceModel, Interpretation};
use crate::machine::Machine;
use crate::rational::{rat, Rat};

fn space_y() -> FinSpace {
    FinSpace::new("Y", ["y0", "y1", "y2"]).expect("labels distinct")
}

fn space_s() -> FinSpace {
    FinSpace::new("S", ["s1", "s2"]).expect("labels distinct")
}

fn space_h() -> FinSpace {
    FinSpace::new("H", ["h1", "h2"]).expect("labels distinct")
}

/// The three-state machine: from `y0` it moves deterministically to the
/// state matching the input; at `y1` input `s1` loops and at `y2` input
/// `s2` loops. The remaining two rows are the transitions taken on inputs
/// the interpretation below believes impossible; only their support
/// matters, and they are fixed here as uniform over all three states.
pub fn three_state_machine() -> Machine {
    three_state_machine_with(&impossible_row_uniform())
}

/// The three-state machine with a caller-chosen distribution for the two
/// unconstrained rows (`(y1, s2)` and `(y2, s1)`).
pub fn three_state_machine_with(impossible_row: &[Rat; 3]) -> Machine {
    let states = space_y();
    let inputs = space_s();
    let src = states.tensor(&inputs);
    let point = |i: usize| {
        let mut row = vec![rat(0, 1), rat(0, 1), rat(0, 1)];
        row[i] = rat(1, 1);
        row
    };
    let rows = vec![
        point(1),                   // (y0, s1) → y1
        point(2),                   // (y0, s2) → y2
        point(1),                   // (y1, s1) → y1
        impossible_row.to_vec(),    // (y1, s2): subjectively impossible
        impossible_row.to_vec(),    // (y2, s1): subjectively impossible
        point(2),                   // (y2, s2) → y2
    ];
    let gamma = Kernel::from_rows(src, states.clone(), rows).expect("rows stochastic");
    Machine::new(states, inputs, gamma).expect("shapes match")
}

fn impossible_row_uniform() -> [Rat; 3] {
    [rat(1, 3), rat(1, 3), rat(1, 3)]
}

/// The transparent-emission model over two hypotheses: `φ(s_i ∥ h_j) = δ_ij`.
pub fn three_state_model() -> InferenceModel {
    let hidden = space_h();
    let phi = Kernel::deterministic(hidden.clone(), space_s(), |h| h).expect("shapes match");
    InferenceModel::new(hidden, phi).expect("φ reads H")
}

/// The belief map paired with the machine: certain at `y1`/`y2`, uniform at
/// `y0`.
pub fn three_state_psi() -> Kernel {
    let rows = vec![
        vec![rat(1, 2), rat(1, 2)],
        vec![rat(1, 1), rat(0, 1)],
        vec![rat(0, 1), rat(1, 1)],
    ];
    Kernel::from_rows(space_y(), space_h(), rows).expect("rows stochastic")
}

/// The consistent three-state reasoner.
pub fn three_state_interpretation() -> (Machine, Interpretation) {
    let machine = three_state_machine();
    let interp = Interpretation::inference(three_state_psi(), three_state_model())
        .expect("ψ lands in H");
    (machine, interp)
}

/// The same reasoner with the belief at `y1` weakened to 3/4 — no longer
/// consistent.
pub fn perturbed_three_state() -> (Machine, Interpretation) {
    let machine = three_state_machine();
    let rows = vec![
        vec![rat(1, 2), rat(1, 2)],
        vec![rat(3, 4), rat(1, 4)],
        vec![rat(0, 1), rat(1, 1)],
    ];
    let psi = Kernel::from_rows(space_y(), space_h(), rows).expect("rows stochastic");
    let interp =
        Interpretation::inference(psi, three_state_model()).expect("ψ lands in H");
    (machine, interp)
}

/// Deterministic variant of the three-state machine: the two rows that were
/// only constrained in support are made deterministic (both reset to `y0`).
pub fn deterministic_three_state_machine() -> Machine {
    let states = space_y();
    let inputs = space_s();
    // (y, s) pairs in order: (y0,s1) (y0,s2) (y1,s1) (y1,s2) (y2,s1) (y2,s2)
    let images = [1, 2, 1, 0, 0, 2];
    let gamma = Kernel::deterministic(states.tensor(&inputs), states.clone(), |pair| {
        images[pair]
    })
    .expect("images in range");
    Machine::new(states, inputs, gamma).expect("shapes match")
}

/// The deterministic variant together with the same interpretation, still
/// consistent (the rewritten rows sit behind subjectively impossible
/// inputs).
pub fn deterministic_three_state_interpretation() -> (Machine, Interpretation) {
    let machine = deterministic_three_state_machine();
    let interp = Interpretation::inference(three_state_psi(), three_state_model())
        .expect("ψ lands in H");
    (machine, interp)
}

/// A two-state machine in which every transition is possible (all update
/// probabilities 1/2), so only constant belief maps can be consistent.
pub fn full_support_two_state() -> Machine {
    let states = FinSpace::new("Y", ["y0", "y1"]).expect("labels distinct");
    let inputs = space_s();
    let gamma = Kernel::from_fn(states.tensor(&inputs), states.clone(), |_, _| rat(1, 2))
        .expect("rows stochastic");
    Machine::new(states, inputs, gamma).expect("shapes match")
}

/// A nonconstant belief map on the two-state machine (certain and opposite
/// at the two states) with a strictly positive emission model.
pub fn full_support_nontrivial_interpretation() -> (Machine, Interpretation) {
    let machine = full_support_two_state();
    let hidden = space_h();
    let psi = Kernel::deterministic(machine.states().clone(), hidden.clone(), |y| y)
        .expect("shapes match");
    let phi = Kernel::from_rows(
        hidden.clone(),
        space_s(),
        vec![vec![rat(3, 4), rat(1, 4)], vec![rat(1, 4), rat(3, 4)]],
    )
    .expect("rows stochastic");
    let model = InferenceModel::new(hidden, phi).expect("φ reads H");
    let interp = Interpretation::inference(psi, model).expect("ψ lands in H");
    (machine, interp)
}

//! Sanity checks on the coupled simulator. The checking path never
//! samples; these only pin down the sampler's reproducibility and that its
//! frequencies track the update kernel.

use reasoner_core::finstoch::{Dist, FinSpace, Kernel};
use reasoner_core::machine::{Environment, Machine};
use reasoner_core::rational::rat;

fn two_state() -> Machine {
    let states = FinSpace::new("Y", ["y0", "y1"]).unwrap();
    let inputs = FinSpace::new("S", ["go"]).unwrap();
    let rows = vec![
        vec![rat(1, 4), rat(3, 4)], // y0
        vec![rat(2, 3), rat(1, 3)], // y1
    ];
    let gamma = Kernel::from_rows(states.tensor(&inputs), states.clone(), rows).unwrap();
    Machine::new(states, inputs, gamma).unwrap()
}

fn constant_environment(machine: &Machine) -> Environment {
    let hidden = FinSpace::new("X", ["x"]).unwrap();
    let dynamics =
        Kernel::deterministic(hidden.clone(), hidden.tensor(machine.inputs()), |_| 0).unwrap();
    Environment::new(hidden.clone(), dynamics, Dist::point(hidden, 0).unwrap()).unwrap()
}

#[test]
fn transition_frequencies_track_gamma_within_five_standard_errors() {
    let machine = two_state();
    let env = constant_environment(&machine);
    let start = Dist::point(machine.states().clone(), 0).unwrap();
    let steps = 10_000;
    let trajectory = machine.simulate_coupled(&env, &start, steps, 271_828).unwrap();
    assert_eq!(trajectory.len(), steps);

    // Count y → y' transitions; the first step starts from y0.
    let mut visits = [0f64; 2];
    let mut to_y1 = [0f64; 2];
    let mut current = 0usize;
    for record in &trajectory {
        let next = if record.state == "y1" { 1 } else { 0 };
        visits[current] += 1.0;
        if next == 1 {
            to_y1[current] += 1.0;
        }
        current = next;
    }
    let expected = [0.75, 1.0 / 3.0];
    for y in 0..2 {
        let n = visits[y];
        assert!(n > 100.0, "state y{y} undervisited: {n}");
        let p = expected[y];
        let freq = to_y1[y] / n;
        let standard_error = (p * (1.0 - p) / n).sqrt();
        assert!(
            (freq - p).abs() <= 5.0 * standard_error,
            "y{y}: freq {freq} vs {p} (se {standard_error})"
        );
    }
}

#[test]
fn same_seed_same_trajectory_different_seed_differs() {
    let machine = two_state();
    let env = constant_environment(&machine);
    let start = Dist::uniform(machine.states().clone());
    let a = machine.simulate_coupled(&env, &start, 200, 1).unwrap();
    let b = machine.simulate_coupled(&env, &start, 200, 1).unwrap();
    let c = machine.simulate_coupled(&env, &start, 200, 2).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

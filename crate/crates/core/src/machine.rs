//! Stochastic machines: a state space `Y`, an input space `S`, and an
//! update kernel `γ : Y⊗S → Y` describing how the state changes when an
//! input arrives. Also the support graph of a machine (which transitions
//! are possible at all) and a seeded coupled simulation against a true
//! environment.

use std::collections::BTreeSet;

use num_traits::Zero;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::finstoch::{Dist, FinSpace, FinStochError, Kernel};
use crate::rational::Rat;

/// Identifier of the sampling scheme used by [`Machine::simulate_coupled`]:
/// a ChaCha8 stream, with each draw a 64-bit integer read as the exact
/// rational `u/2^64` and inverted through the cumulative distribution.
/// Reproducibility across versions of this tool is tied to this identifier.
pub const SAMPLER_ALGORITHM: &str = "chacha8-u64-cdf";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MachineError {
    #[error("update kernel source `{found}` must be states⊗inputs `{expected}`")]
    BadUpdateSource { expected: String, found: String },
    #[error("update kernel destination `{found}` must be the state space `{expected}`")]
    BadUpdateDestination { expected: String, found: String },
    #[error("environment dynamics `{found}` must map `{hidden}` to `{hidden}`⊗inputs")]
    BadDynamics { hidden: String, found: String },
    #[error("environment emits inputs in `{env_inputs}` but the machine reads `{machine_inputs}`")]
    InputSpaceMismatch {
        env_inputs: String,
        machine_inputs: String,
    },
    #[error("initial distribution is over `{found}`, expected `{expected}`")]
    BadInitial { expected: String, found: String },
    #[error(transparent)]
    FinStoch(#[from] FinStochError),
}

/// A machine: states, inputs, and the update kernel `γ : Y⊗S → Y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Machine {
    states: FinSpace,
    inputs: FinSpace,
    gamma: Kernel,
}

impl Machine {
    pub fn new(states: FinSpace, inputs: FinSpace, gamma: Kernel) -> Result<Self, MachineError> {
        let expected_src = states.tensor(&inputs);
        if *gamma.src() != expected_src {
            return Err(MachineError::BadUpdateSource {
                expected: expected_src.name(),
                found: gamma.src().name(),
            });
        }
        if *gamma.dst() != states {
            return Err(MachineError::BadUpdateDestination {
                expected: states.name(),
                found: gamma.dst().name(),
            });
        }
        Ok(Machine {
            states,
            inputs,
            gamma,
        })
    }

    /// Deterministic machine from an update function on (state, input)
    /// element indices.
    pub fn deterministic(
        states: FinSpace,
        inputs: FinSpace,
        update: impl Fn(usize, usize) -> usize,
    ) -> Result<Self, MachineError> {
        let src = states.tensor(&inputs);
        let n_inputs = inputs.len();
        let gamma = Kernel::deterministic(src, states.clone(), |pair| {
            update(pair / n_inputs, pair % n_inputs)
        })?;
        Machine::new(states, inputs, gamma)
    }

    pub fn states(&self) -> &FinSpace {
        &self.states
    }

    pub fn inputs(&self) -> &FinSpace {
        &self.inputs
    }

    pub fn gamma(&self) -> &Kernel {
        &self.gamma
    }

    /// `γ(y' ∥ y, s)` by element indices.
    pub fn transition_prob(&self, y: usize, s: usize, y_next: usize) -> &Rat {
        self.gamma.prob(self.pair_index(y, s), y_next)
    }

    /// Index of `(y, s)` in the update kernel's source space.
    pub fn pair_index(&self, y: usize, s: usize) -> usize {
        y * self.inputs.len() + s
    }

    pub fn is_deterministic(&self) -> bool {
        self.gamma.is_deterministic()
    }

    /// For a deterministic machine, the unique successor of `(y, s)`.
    pub fn successor(&self, y: usize, s: usize) -> Option<usize> {
        self.gamma.image_of(self.pair_index(y, s))
    }

    /// One update step from a distribution over states, given an input.
    pub fn step(&self, state_dist: &Dist, input: &str) -> Result<Dist, MachineError> {
        let s = self.inputs.resolve(input)?;
        Ok(self.step_idx(state_dist, s))
    }

    /// One update step with the input given by element index.
    pub fn step_idx(&self, state_dist: &Dist, s: usize) -> Dist {
        let weights = self
            .states
            .elements()
            .map(|y_next| {
                state_dist
                    .weights()
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| !p.is_zero())
                    .map(|(y, p)| p * self.transition_prob(y, s, y_next))
                    .sum()
            })
            .collect();
        Dist::from_weights(self.states.clone(), weights).expect("step preserves total mass")
    }

    /// The n-step update kernel `γⁿ : Sⁿ⊗Y → Y`. Inputs are consumed in
    /// order, leftmost factor first; `γ⁰` is the identity on `Y` (the empty
    /// input block vanishes under flattening).
    pub fn iterate(&self, n: usize) -> Kernel {
        let seq_space = FinSpace::tensor_all(std::iter::repeat_n(&self.inputs, n));
        let src = seq_space.tensor(&self.states);
        let rows = src
            .elements()
            .map(|i| {
                let (seq, y) = (i / self.states.len(), i % self.states.len());
                let inputs = sequence_inputs(&seq_space, &self.inputs, seq);
                let mut dist = Dist::point(self.states.clone(), y).expect("state in range");
                for s in inputs {
                    dist = self.step_idx(&dist, s);
                }
                dist.weights().to_vec()
            })
            .collect();
        Kernel::from_rows(src, self.states.clone(), rows).expect("rows remain stochastic")
    }

    /// The set of possible transitions: edges `(y, s, y')` with positive
    /// probability.
    pub fn support_graph(&self) -> SupportGraph {
        let mut edges = BTreeSet::new();
        for y in self.states.elements() {
            for s in self.inputs.elements() {
                for y_next in self.states.elements() {
                    if !self.transition_prob(y, s, y_next).is_zero() {
                        edges.insert((y, s, y_next));
                    }
                }
            }
        }
        SupportGraph { edges }
    }

    /// True iff every transition probability is positive. Machines with
    /// full support admit only trivial interpretation maps, so callers use
    /// this to short-circuit interpretation search.
    pub fn is_full_support(&self) -> bool {
        self.states.elements().all(|y| {
            self.inputs.elements().all(|s| {
                self.states
                    .elements()
                    .all(|y_next| !self.transition_prob(y, s, y_next).is_zero())
            })
        })
    }

    /// Samples a coupled trajectory of the machine inside a true
    /// environment: `X₀ ~ initial`, `Y₀ ~ initial_state`, then repeatedly
    /// `(Xₜ₊₁, Sₜ) ~ dynamics(Xₜ)` and `Yₜ₊₁ ~ γ(Yₜ, Sₜ)`.
    ///
    /// Record `t` holds the world state that emitted `Sₜ`, the emitted
    /// input, and the machine state after consuming it. The same seed
    /// reproduces the trajectory bit for bit (see [`SAMPLER_ALGORITHM`]).
    pub fn simulate_coupled(
        &self,
        env: &Environment,
        initial_state: &Dist,
        steps: usize,
        seed: u64,
    ) -> Result<Vec<TrajectoryStep>, MachineError> {
        if env.inputs() != self.inputs {
            return Err(MachineError::InputSpaceMismatch {
                env_inputs: env.inputs().name(),
                machine_inputs: self.inputs.name(),
            });
        }
        if *initial_state.space() != self.states {
            return Err(MachineError::BadInitial {
                expected: self.states.name(),
                found: initial_state.space().name(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = sample_index(&mut rng, env.initial.weights());
        let mut y = sample_index(&mut rng, initial_state.weights());
        let n_inputs = self.inputs.len();

        let mut trajectory = Vec::with_capacity(steps);
        for t in 0..steps {
            let joint = sample_index(&mut rng, env.dynamics.row(x));
            let (x_next, s) = (joint / n_inputs, joint % n_inputs);
            let y_next = sample_index(&mut rng, self.gamma.row(self.pair_index(y, s)));
            trajectory.push(TrajectoryStep {
                step: t,
                world: env.hidden.label(x),
                input: self.inputs.label(s),
                state: self.states.label(y_next),
            });
            x = x_next;
            y = y_next;
        }
        Ok(trajectory)
    }
}

/// One record of a coupled simulation: the world state that emitted the
/// input, the input itself, and the machine state after consuming it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrajectoryStep {
    pub step: usize,
    pub world: String,
    pub input: String,
    pub state: String,
}

/// Draws from a rational distribution by inverse CDF against `u/2^64`.
fn sample_index(rng: &mut ChaCha8Rng, weights: &[Rat]) -> usize {
    let u = Rat::new(rng.next_u64().into(), num_bigint::BigInt::from(1u128 << 64));
    let mut cumulative = Rat::zero();
    for (i, w) in weights.iter().enumerate() {
        cumulative += w;
        if u < cumulative {
            return i;
        }
    }
    weights.len() - 1
}

/// A true environment: hidden world states, a dynamics kernel
/// `X → X⊗S` that advances the world while emitting an input, and an
/// initial distribution over `X`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Environment {
    hidden: FinSpace,
    dynamics: Kernel,
    initial: Dist,
}

impl Environment {
    pub fn new(hidden: FinSpace, dynamics: Kernel, initial: Dist) -> Result<Self, MachineError> {
        let hf = hidden.factor_count();
        let dst_ok = *dynamics.src() == hidden
            && dynamics.dst().factor_count() > hf
            && dynamics.dst().factors()[..hf] == *hidden.factors();
        if !dst_ok {
            return Err(MachineError::BadDynamics {
                hidden: hidden.name(),
                found: format!("{} → {}", dynamics.src().name(), dynamics.dst().name()),
            });
        }
        if *initial.space() != hidden {
            return Err(MachineError::BadInitial {
                expected: hidden.name(),
                found: initial.space().name(),
            });
        }
        Ok(Environment {
            hidden,
            dynamics,
            initial,
        })
    }

    pub fn hidden(&self) -> &FinSpace {
        &self.hidden
    }

    pub fn dynamics(&self) -> &Kernel {
        &self.dynamics
    }

    pub fn initial(&self) -> &Dist {
        &self.initial
    }

    /// The emission space: the non-hidden suffix of the dynamics destination.
    pub fn inputs(&self) -> FinSpace {
        let hf = self.hidden.factor_count();
        let rest: Vec<usize> = (hf..self.dynamics.dst().factor_count()).collect();
        self.dynamics
            .dst()
            .factor_subspace(&rest)
            .expect("validated at construction")
    }
}

/// The positive-probability transitions of a machine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportGraph {
    edges: BTreeSet<(usize, usize, usize)>,
}

impl SupportGraph {
    /// Edges as (state, input, next state) element indices, in order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn contains(&self, y: usize, s: usize, y_next: usize) -> bool {
        self.edges.contains(&(y, s, y_next))
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Edge labels resolved against a machine, for display.
    pub fn labeled_edges(&self, machine: &Machine) -> Vec<(String, String, String)> {
        self.edges
            .iter()
            .map(|&(y, s, y_next)| {
                (
                    machine.states().label(y),
                    machine.inputs().label(s),
                    machine.states().label(y_next),
                )
            })
            .collect()
    }
}

/// Decodes a sequence index of `Sⁿ` into the per-step input indices.
fn sequence_inputs(seq_space: &FinSpace, inputs: &FinSpace, seq: usize) -> Vec<usize> {
    let per_step = inputs.factor_count();
    if per_step == 0 {
        return Vec::new();
    }
    let parts = seq_space.decode(seq);
    parts
        .chunks(per_step)
        .map(|chunk| inputs.encode(chunk))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn two_state_machine() -> Machine {
        // y0 --a--> y1 (certain); y1 --a--> {y0: 1/3, y1: 2/3}; input b loops.
        let states = FinSpace::new("Y", ["y0", "y1"]).unwrap();
        let inputs = FinSpace::new("S", ["a", "b"]).unwrap();
        let src = states.tensor(&inputs);
        let rows = vec![
            vec![rat(0, 1), rat(1, 1)], // (y0, a)
            vec![rat(1, 1), rat(0, 1)], // (y0, b)
            vec![rat(1, 3), rat(2, 3)], // (y1, a)
            vec![rat(0, 1), rat(1, 1)], // (y1, b)
        ];
        let gamma = Kernel::from_rows(src, states.clone(), rows).unwrap();
        Machine::new(states, inputs, gamma).unwrap()
    }

    #[test]
    fn step_mixes_exactly() {
        let m = two_state_machine();
        let start = Dist::uniform(m.states().clone());
        let after = m.step(&start, "a").unwrap();
        assert_eq!(*after.p(0), rat(1, 6));
        assert_eq!(*after.p(1), rat(5, 6));
    }

    #[test]
    fn step_rejects_unknown_input() {
        let m = two_state_machine();
        let start = Dist::uniform(m.states().clone());
        assert!(matches!(
            m.step(&start, "zzz").unwrap_err(),
            MachineError::FinStoch(FinStochError::UnknownLabel { .. })
        ));
    }

    #[test]
    fn iterate_zero_is_identity() {
        let m = two_state_machine();
        assert_eq!(m.iterate(0), Kernel::identity(m.states()));
    }

    #[test]
    fn iterate_matches_folded_steps() {
        let m = two_state_machine();
        for n in 0..=4 {
            let iterated = m.iterate(n);
            for seq in 0..m.inputs().len().pow(n as u32) {
                for y in m.states().elements() {
                    let mut dist = Dist::point(m.states().clone(), y).unwrap();
                    let mut rest = seq;
                    let mut steps = Vec::new();
                    for _ in 0..n {
                        steps.push(rest % m.inputs().len());
                        rest /= m.inputs().len();
                    }
                    steps.reverse(); // leftmost input first
                    for s in steps {
                        dist = m.step_idx(&dist, s);
                    }
                    let row = iterated.row(seq * m.states().len() + y);
                    assert_eq!(row, dist.weights());
                }
            }
        }
    }

    #[test]
    fn support_graph_matches_positive_entries() {
        let m = two_state_machine();
        let graph = m.support_graph();
        assert!(graph.contains(0, 0, 1));
        assert!(!graph.contains(0, 0, 0));
        assert_eq!(graph.len(), 5);
        assert!(!m.is_full_support());
    }

    #[test]
    fn single_state_machine_has_full_support() {
        let states = FinSpace::new("Y", ["only"]).unwrap();
        let inputs = FinSpace::new("S", ["s"]).unwrap();
        let m = Machine::deterministic(states, inputs, |_, _| 0).unwrap();
        assert!(m.is_full_support());
    }

    fn iid_environment(machine: &Machine) -> Environment {
        let hidden = FinSpace::new("X", ["x0"]).unwrap();
        let dst = hidden.tensor(machine.inputs());
        let rows = vec![vec![rat(3, 4), rat(1, 4)]];
        let dynamics = Kernel::from_rows(hidden.clone(), dst, rows).unwrap();
        let initial = Dist::point(hidden.clone(), 0).unwrap();
        Environment::new(hidden, dynamics, initial).unwrap()
    }

    #[test]
    fn simulation_is_reproducible_and_sized() {
        let m = two_state_machine();
        let env = iid_environment(&m);
        let start = Dist::point(m.states().clone(), 0).unwrap();
        let a = m.simulate_coupled(&env, &start, 25, 42).unwrap();
        let b = m.simulate_coupled(&env, &start, 25, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 25);
        let c = m.simulate_coupled(&env, &start, 0, 42).unwrap();
        assert!(c.is_empty());
    }

    #[test]
    fn deterministic_simulation_ignores_seed() {
        let states = FinSpace::new("Y", ["y0", "y1"]).unwrap();
        let inputs = FinSpace::new("S", ["s"]).unwrap();
        let m = Machine::deterministic(states.clone(), inputs, |y, _| 1 - y).unwrap();
        let hidden = FinSpace::new("X", ["x0"]).unwrap();
        let dynamics = Kernel::deterministic(
            hidden.clone(),
            hidden.tensor(m.inputs()),
            |_| 0,
        )
        .unwrap();
        let env =
            Environment::new(hidden.clone(), dynamics, Dist::point(hidden, 0).unwrap()).unwrap();
        let start = Dist::point(states, 0).unwrap();
        let a = m.simulate_coupled(&env, &start, 10, 1).unwrap();
        let b = m.simulate_coupled(&env, &start, 10, 999).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn three_state_steps_and_support() {
        let m = crate::fixtures::three_state_machine();
        let y1 = Dist::point(m.states().clone(), 1).unwrap();
        // From y0, input s1 moves deterministically to y1.
        let from_y0 = Dist::point(m.states().clone(), 0).unwrap();
        assert_eq!(m.step(&from_y0, "s1").unwrap(), y1);
        // Both y0 and y1 map to y1 under s1, so the mixture does too.
        let mixed = Dist::from_weights(
            m.states().clone(),
            vec![rat(1, 2), rat(1, 2), rat(0, 1)],
        )
        .unwrap();
        assert_eq!(m.step(&mixed, "s1").unwrap(), y1);

        let graph = m.support_graph();
        assert!(graph.contains(1, 0, 1)); // (y1, s1, y1)
        let branches = graph.edges().filter(|&(y, s, _)| y == 1 && s == 1).count();
        assert!(branches >= 2, "nondeterministic branch has {branches} edges");
        assert!(!m.is_full_support());
    }

    #[test]
    fn uniform_update_machine_has_full_support() {
        let states = FinSpace::new("Y", ["y0", "y1", "y2"]).unwrap();
        let inputs = FinSpace::new("S", ["s"]).unwrap();
        let gamma =
            Kernel::from_fn(states.tensor(&inputs), states.clone(), |_, _| rat(1, 3)).unwrap();
        let m = Machine::new(states, inputs, gamma).unwrap();
        assert!(m.is_full_support());
        assert_eq!(m.support_graph().len(), 9);
    }

    #[test]
    fn simulation_rejects_foreign_inputs() {
        let m = two_state_machine();
        let hidden = FinSpace::new("X", ["x0"]).unwrap();
        let other_inputs = FinSpace::new("T", ["t0"]).unwrap();
        let dynamics =
            Kernel::deterministic(hidden.clone(), hidden.tensor(&other_inputs), |_| 0).unwrap();
        let env =
            Environment::new(hidden.clone(), dynamics, Dist::point(hidden, 0).unwrap()).unwrap();
        let start = Dist::uniform(m.states().clone());
        assert!(matches!(
            m.simulate_coupled(&env, &start, 5, 0).unwrap_err(),
            MachineError::InputSpaceMismatch { .. }
        ));
    }
}

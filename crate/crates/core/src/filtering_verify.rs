//! Multi-step filtering semantics.
//!
//! Iterating a filtering model `κ : H → H⊗S` for `n` steps gives the
//! reasoner's joint beliefs about its next `n` inputs and the hidden state
//! reached afterwards. For a deterministic machine with a consistent
//! interpretation, running the machine for `n` steps and reading the belief
//! at the reached state is a conditional of that joint — the machine
//! really is filtering. This module builds the iterated kernels and checks
//! the disintegration equation exactly, sequence by sequence.

use num_traits::Zero;
use thiserror::Error;

use crate::finstoch::{FinSpace, FinStochError, Kernel};
use crate::interpretation::{predictives, Interpretation, Verdict};
use crate::machine::Machine;
use crate::rational::Rat;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FilterVerifyError {
    #[error(
        "the n-step conditional property is only established for deterministic machines; \
         use the informational probe for stochastic ones"
    )]
    RequiresDeterministicMachine,
    #[error("interpretation does not match the machine: {0}")]
    Interp(#[from] crate::interpretation::InterpError),
    #[error(transparent)]
    FinStoch(#[from] FinStochError),
}

/// Joint beliefs about the next `n` inputs and the hidden state reached
/// after them, as a kernel `Y → Sⁿ⊗H`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointBeliefs {
    pub horizon: usize,
    pub kernel: Kernel,
}

/// Iterates a filtering model `n` times: the result maps an initial hidden
/// state to the joint of the final hidden state and the inputs emitted
/// along the way, as a kernel `H → H⊗Sⁿ` with the step-1 input leftmost
/// among the `S` factors.
pub fn iterate_model(model: &crate::interpretation::FilteringModel, n: usize) -> Kernel {
    let hf = model.hidden().factor_count();
    let sf = model.input_space().factor_count();
    let mut iterated = Kernel::identity(model.hidden());
    for step in 0..n {
        // Apply κ to the hidden factor: (H, S¹..Sᵗ) → (H, Sᵗ⁺¹, S¹..Sᵗ),
        // then move the new input block to the end.
        let trailing: Vec<usize> = (hf..hf + step * sf).collect();
        let trailing_space = iterated
            .dst()
            .factor_subspace(&trailing)
            .expect("suffix factors exist");
        let expanded = iterated
            .compose(&model.kappa().tensor(&Kernel::identity(&trailing_space)))
            .expect("hidden factor matches κ");
        let mut reorder: Vec<usize> = (0..hf).collect();
        reorder.extend(hf + sf..hf + sf + step * sf);
        reorder.extend(hf..hf + sf);
        iterated = expanded
            .project_dst(&reorder)
            .expect("reorder is a permutation");
    }
    iterated
}

/// The joint-beliefs kernel `ψ ⨟ κⁿ`, reordered so the destination factors
/// are the `n` inputs in step order followed by the hidden state.
pub fn joint_beliefs(interp: &Interpretation, n: usize) -> JointBeliefs {
    let fm = interp.model().filtering();
    let hf = fm.hidden().factor_count();
    let sf = fm.input_space().factor_count();
    let chained = interp
        .psi()
        .compose(&iterate_model(&fm, n))
        .expect("ψ lands in the hidden space");
    let mut order: Vec<usize> = (hf..hf + n * sf).collect();
    order.extend(0..hf);
    let kernel = chained
        .project_dst(&order)
        .expect("reorder is a permutation");
    JointBeliefs { horizon: n, kernel }
}

/// Status of one (start state, input sequence) pair in a horizon check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SequenceStatus {
    /// Positive prior mass: the disintegration equation was enforced.
    Checked,
    /// Zero prior mass: the equation holds vacuously; nothing to enforce.
    Unconstrained,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceRecord {
    pub state: String,
    pub sequence: Vec<String>,
    pub status: SequenceStatus,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceViolation {
    pub state: String,
    pub sequence: Vec<String>,
    pub h: String,
    pub lhs: Rat,
    pub rhs: Rat,
}

/// Report of an n-step conditional check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HorizonReport {
    pub horizon: usize,
    pub verdict: Verdict,
    pub violations: Vec<SequenceViolation>,
    pub sequences: Vec<SequenceRecord>,
    pub checked_constraints: u64,
    /// False when produced by the informational probe on a stochastic
    /// machine, where the equation is evidence, not a theorem.
    pub asserted: bool,
}

impl HorizonReport {
    pub fn is_consistent(&self) -> bool {
        self.verdict == Verdict::Consistent
    }
}

/// Checks that running the machine `n` steps and reading the belief at the
/// reached state is a conditional of the joint beliefs: for every start
/// state, input sequence, and hidden value,
///
/// ```text
/// joint(seq, h ∥ y) = marginal(seq ∥ y) · ψ_H(h ∥ γⁿ(seq, y))
/// ```
///
/// exactly, with zero-marginal sequences recorded as unconstrained.
/// Deterministic machines only.
pub fn verify_filtering_conditional(
    machine: &Machine,
    interp: &Interpretation,
    n: usize,
) -> Result<HorizonReport, FilterVerifyError> {
    if !machine.is_deterministic() {
        return Err(FilterVerifyError::RequiresDeterministicMachine);
    }
    Ok(horizon_check(machine, interp, n, true))
}

/// The same equation evaluated on any machine, reported without being
/// asserted: for stochastic machines the property is an open expectation,
/// so the result is evidence only. Kept out of the acceptance checks.
pub fn probe_filtering_conditional(
    machine: &Machine,
    interp: &Interpretation,
    n: usize,
) -> HorizonReport {
    horizon_check(machine, interp, n, false)
}

fn horizon_check(
    machine: &Machine,
    interp: &Interpretation,
    n: usize,
    asserted: bool,
) -> HorizonReport {
    let joint = joint_beliefs(interp, n);
    let hidden = interp.hidden().clone();
    let sf = machine.inputs().factor_count();
    let seq_space = FinSpace::tensor_all(std::iter::repeat_n(machine.inputs(), n));
    let marginal = joint
        .kernel
        .project_dst(&(0..n * sf).collect::<Vec<_>>())
        .expect("input factors exist");
    // Candidate conditional: run the machine on the sequence, read ψ there.
    let conditional = machine
        .iterate(n)
        .compose(interp.psi())
        .expect("γⁿ lands in the state space");

    let mut violations = Vec::new();
    let mut sequences = Vec::new();
    let mut checked: u64 = 0;
    for y in machine.states().elements() {
        for seq in seq_space.elements() {
            let mass = marginal.prob(y, seq);
            let labels = sequence_labels(&seq_space, machine.inputs(), seq);
            if mass.is_zero() {
                sequences.push(SequenceRecord {
                    state: machine.states().label(y),
                    sequence: labels,
                    status: SequenceStatus::Unconstrained,
                });
                continue;
            }
            let cond_row = seq * machine.states().len() + y;
            for h in hidden.elements() {
                checked += 1;
                let lhs = joint.kernel.prob(y, seq * hidden.len() + h);
                let rhs = mass * conditional.prob(cond_row, h);
                if *lhs != rhs {
                    violations.push(SequenceViolation {
                        state: machine.states().label(y),
                        sequence: labels.clone(),
                        h: hidden.label(h),
                        lhs: lhs.clone(),
                        rhs,
                    });
                }
            }
            sequences.push(SequenceRecord {
                state: machine.states().label(y),
                sequence: labels,
                status: SequenceStatus::Checked,
            });
        }
    }
    HorizonReport {
        horizon: n,
        verdict: if violations.is_empty() {
            Verdict::Consistent
        } else {
            Verdict::Inconsistent
        },
        violations,
        sequences,
        checked_constraints: checked,
        asserted,
    }
}

fn sequence_labels(seq_space: &FinSpace, inputs: &FinSpace, seq: usize) -> Vec<String> {
    let per_step = inputs.factor_count();
    if per_step == 0 {
        return Vec::new();
    }
    seq_space
        .decode(seq)
        .chunks(per_step)
        .map(|chunk| inputs.label(inputs.encode(chunk)))
        .collect()
}

/// Evaluates the one-step marginal form that characterizes consistency for
/// deterministic machines: both sides of
///
/// ```text
/// ψ_{S,H'}(h, s ∥ y) = ψ_S(s ∥ y) · Σ_{y'} γ(y' ∥ y,s)·ψ_H(h ∥ y')
/// ```
///
/// built as kernels `Y → S⊗H` and compared exactly. Agrees with
/// [`check_filtering`] on deterministic machines; rejects stochastic ones.
pub fn deterministic_equivalence_check(
    machine: &Machine,
    interp: &Interpretation,
) -> Result<bool, FilterVerifyError> {
    if !machine.is_deterministic() {
        return Err(FilterVerifyError::RequiresDeterministicMachine);
    }
    let preds = predictives(interp);
    let hidden = interp.hidden();
    let hf = hidden.factor_count();
    let sf = machine.inputs().factor_count();
    let yf = machine.states().factor_count();

    // Left side: ψ_{S,H'} with factors brought to (S, H).
    let mut order: Vec<usize> = (hf..hf + sf).collect();
    order.extend(0..hf);
    let lhs = preds.next_and_input.project_dst(&order)?;

    // Right side: duplicate the state, sample the predicted input,
    // duplicate it, step the machine, read the belief at the new state.
    let spread = Kernel::copy(machine.states())
        .compose(&Kernel::identity(machine.states()).tensor(&preds.input))?
        .compose(&Kernel::identity(machine.states()).tensor(&Kernel::copy(machine.inputs())))?;
    let mut to_s_y_s: Vec<usize> = (yf..yf + sf).collect();
    to_s_y_s.extend(0..yf);
    to_s_y_s.extend(yf + sf..yf + 2 * sf);
    let rhs = spread
        .project_dst(&to_s_y_s)?
        .compose(&Kernel::identity(machine.inputs()).tensor(machine.gamma()))?
        .compose(&Kernel::identity(machine.inputs()).tensor(interp.psi()))?;

    Ok(lhs == rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finstoch::Dist;
    use crate::fixtures::{
        deterministic_three_state_interpretation, three_state_interpretation,
    };
    use crate::interpretation::{check_filtering, FilteringModel, Model};
    use crate::rational::rat;

    fn filtering_view(interp: &Interpretation) -> FilteringModel {
        interp.model().filtering()
    }

    #[test]
    fn iterate_model_base_cases() {
        let (_, interp) = three_state_interpretation();
        let fm = filtering_view(&interp);
        assert_eq!(iterate_model(&fm, 0), Kernel::identity(fm.hidden()));
        assert_eq!(iterate_model(&fm, 1), *fm.kappa());
    }

    #[test]
    fn iterate_model_repeats_diagonal_emissions() {
        // With frozen hidden state and transparent emissions, two steps
        // always emit the pair matching the hidden value.
        let (_, interp) = three_state_interpretation();
        let fm = filtering_view(&interp);
        let two = iterate_model(&fm, 2);
        let h = fm.hidden().len();
        let s = fm.input_space().len();
        for h0 in 0..h {
            for h1 in 0..h {
                for s1 in 0..s {
                    for s2 in 0..s {
                        let idx = (h1 * s + s1) * s + s2;
                        let expect = if h1 == h0 && s1 == h0 && s2 == h0 {
                            rat(1, 1)
                        } else {
                            rat(0, 1)
                        };
                        assert_eq!(*two.prob(h0, idx), expect);
                    }
                }
            }
        }
    }

    #[test]
    fn joint_beliefs_at_horizon_one_matches_predictives() {
        let (_, interp) = three_state_interpretation();
        let jb = joint_beliefs(&interp, 1);
        let preds = predictives(&interp);
        // ψ_{S,H'} has factors (H, S); the joint-beliefs kernel is (S, H).
        let reordered = preds.next_and_input.project_dst(&[1, 0]).unwrap();
        assert_eq!(jb.kernel, reordered);
    }

    #[test]
    fn joint_beliefs_two_steps_from_uncertainty() {
        let (_, interp) = three_state_interpretation();
        let jb = joint_beliefs(&interp, 2);
        // From y0: half the mass on ((s1,s1), h1), half on ((s2,s2), h2).
        let dst = jb.kernel.dst();
        let idx_a = dst.index_of("(s1,s1,h1)").unwrap();
        let idx_b = dst.index_of("(s2,s2,h2)").unwrap();
        assert_eq!(*jb.kernel.prob(0, idx_a), rat(1, 2));
        assert_eq!(*jb.kernel.prob(0, idx_b), rat(1, 2));
        let total: Rat = dst.elements().map(|i| jb.kernel.prob(0, i).clone()).sum();
        assert_eq!(total, rat(1, 1));
    }

    #[test]
    fn conditional_check_passes_on_the_deterministic_variant() {
        let (machine, interp) = deterministic_three_state_interpretation();
        for n in 0..=5 {
            let report = verify_filtering_conditional(&machine, &interp, n).unwrap();
            assert!(report.is_consistent(), "horizon {n}");
        }
        let report = verify_filtering_conditional(&machine, &interp, 3).unwrap();
        let from_y0: Vec<_> = report
            .sequences
            .iter()
            .filter(|r| r.state == "y0")
            .collect();
        assert_eq!(from_y0.len(), 8);
        let unconstrained = from_y0
            .iter()
            .filter(|r| r.status == SequenceStatus::Unconstrained)
            .count();
        assert_eq!(unconstrained, 6);
    }

    #[test]
    fn conditional_check_rejects_stochastic_machines() {
        let (machine, interp) = three_state_interpretation();
        assert!(matches!(
            verify_filtering_conditional(&machine, &interp, 2).unwrap_err(),
            FilterVerifyError::RequiresDeterministicMachine
        ));
        // The probe still evaluates the equation and reports.
        let probe = probe_filtering_conditional(&machine, &interp, 2);
        assert!(!probe.asserted);
    }

    #[test]
    fn equivalence_check_tracks_the_filtering_verdict() {
        let (machine, interp) = deterministic_three_state_interpretation();
        assert!(deterministic_equivalence_check(&machine, &interp).unwrap());
        assert!(check_filtering(&machine, &interp).unwrap().is_consistent());

        let (machine, perturbed) = {
            let (m, _) = deterministic_three_state_interpretation();
            let (_, p) = crate::fixtures::perturbed_three_state();
            (m, p)
        };
        assert!(!deterministic_equivalence_check(&machine, &perturbed).unwrap());
        assert!(!check_filtering(&machine, &perturbed)
            .unwrap()
            .is_consistent());
    }

    #[test]
    fn constant_beliefs_pass_the_equivalence_check() {
        let (machine, _) = deterministic_three_state_interpretation();
        let hidden = crate::finstoch::FinSpace::new("H", ["h1", "h2"]).unwrap();
        let prior = Dist::uniform(hidden);
        let trivial =
            crate::interpretation::trivial_interpretation(&machine, &prior, None).unwrap();
        assert!(deterministic_equivalence_check(&machine, &trivial).unwrap());
        match trivial.model() {
            Model::Filtering(_) => {}
            Model::Inference(_) => panic!("trivial interpretation is a filtering model"),
        }
    }
}

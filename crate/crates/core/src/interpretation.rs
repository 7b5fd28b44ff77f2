//! Bayesian interpretations of machines and their consistency checks.
//!
//! An interpretation gives a machine's states a reading as beliefs: a map
//! `ψ_H : Y → H` from states to probability distributions over a hidden
//! space, together with a model of how the world produces inputs — either
//! an emission kernel `φ : H → S` over a fixed hidden value (inference) or
//! a hidden dynamics `κ : H → H⊗S` (filtering).
//!
//! The interpretation is consistent when beliefs update by Bayes' rule
//! along every possible transition. In the finite case the filtering
//! condition is
//!
//! ```text
//! γ(y' ∥ y,s) > 0  ⟹  ψ_{S,H'}(h,s ∥ y) = ψ_S(s ∥ y) · ψ_H(h ∥ y')
//! ```
//!
//! for all `h`, and the inference condition replaces the left side by
//! `ψ_H(h ∥ y)·φ(s ∥ h)`. Both are checked exactly, as cross-multiplied
//! products; no division occurs, so inputs with zero predictive mass
//! (subjectively impossible inputs) are handled totally: they constrain
//! nothing and are reported separately.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_traits::Zero;
use rayon::prelude::*;
use thiserror::Error;

use crate::finstoch::{Dist, FinSpace, FinStochError, Kernel};
use crate::machine::{Machine, MachineError};
use crate::rational::Rat;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InterpError {
    #[error("interpretation map reads states `{found}` but the machine has states `{expected}`")]
    PsiSourceMismatch { expected: String, found: String },
    #[error("interpretation map lands in `{found}` but the model's hidden space is `{expected}`")]
    HiddenSpaceMismatch { expected: String, found: String },
    #[error("model emits inputs in `{found}` but the machine reads `{expected}`")]
    InputSpaceMismatch { expected: String, found: String },
    #[error("emission kernel `{found}` must read the hidden space `{expected}`")]
    BadModelSource { expected: String, found: String },
    #[error("hidden dynamics `{found}` must map `{hidden}` to `{hidden}`⊗inputs")]
    BadDynamics { hidden: String, found: String },
    #[error("this check requires an inference model (emission kernel φ), not a filtering model")]
    NotAnInferenceModel,
    #[error(
        "the conjugate-form check applies only to deterministic machines \
         (it evaluates the condition that characterizes consistency in the deterministic case)"
    )]
    RequiresDeterministicMachine,
    #[error("no seed beliefs given")]
    EmptySeeds,
    #[error("seed belief for `{state}` is over `{found}`, expected `{expected}`")]
    SeedSpaceMismatch {
        state: String,
        expected: String,
        found: String,
    },
    #[error(transparent)]
    FinStoch(#[from] FinStochError),
    #[error(transparent)]
    Machine(#[from] MachineError),
}

/// An inference model: inputs are believed to be i.i.d. samples from
/// `φ(· ∥ h)` for a fixed unknown hidden value `h`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InferenceModel {
    hidden: FinSpace,
    phi: Kernel,
}

impl InferenceModel {
    pub fn new(hidden: FinSpace, phi: Kernel) -> Result<Self, InterpError> {
        if *phi.src() != hidden {
            return Err(InterpError::BadModelSource {
                expected: hidden.name(),
                found: phi.src().name(),
            });
        }
        Ok(InferenceModel { hidden, phi })
    }

    pub fn hidden(&self) -> &FinSpace {
        &self.hidden
    }

    pub fn phi(&self) -> &Kernel {
        &self.phi
    }

    pub fn input_space(&self) -> &FinSpace {
        self.phi.dst()
    }

    /// The filtering model with frozen hidden state and this model's
    /// emissions: `κ = copy ⨟ (id ⊗ φ)`, so
    /// `κ((h',s) ∥ h) = [h'=h]·φ(s ∥ h)`.
    pub fn to_filtering(&self) -> FilteringModel {
        let kappa = Kernel::copy(&self.hidden)
            .compose(&Kernel::identity(&self.hidden).tensor(&self.phi))
            .expect("copy output matches id⊗φ input");
        FilteringModel {
            hidden: self.hidden.clone(),
            kappa,
        }
    }
}

/// A filtering model: a hidden world evolves by `κ : H → H⊗S`, emitting an
/// input at each step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FilteringModel {
    hidden: FinSpace,
    kappa: Kernel,
}

impl FilteringModel {
    pub fn new(hidden: FinSpace, kappa: Kernel) -> Result<Self, InterpError> {
        let hf = hidden.factor_count();
        let shape_ok = *kappa.src() == hidden
            && kappa.dst().factor_count() > hf
            && kappa.dst().factors()[..hf] == *hidden.factors();
        if !shape_ok {
            return Err(InterpError::BadDynamics {
                hidden: hidden.name(),
                found: format!("{} → {}", kappa.src().name(), kappa.dst().name()),
            });
        }
        Ok(FilteringModel { hidden, kappa })
    }

    pub fn hidden(&self) -> &FinSpace {
        &self.hidden
    }

    pub fn kappa(&self) -> &Kernel {
        &self.kappa
    }

    pub fn input_space(&self) -> FinSpace {
        let hf = self.hidden.factor_count();
        let rest: Vec<usize> = (hf..self.kappa.dst().factor_count()).collect();
        self.kappa
            .dst()
            .factor_subspace(&rest)
            .expect("validated at construction")
    }
}

/// Either kind of model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Model {
    Inference(InferenceModel),
    Filtering(FilteringModel),
}

impl Model {
    pub fn hidden(&self) -> &FinSpace {
        match self {
            Model::Inference(m) => m.hidden(),
            Model::Filtering(m) => m.hidden(),
        }
    }

    pub fn input_space(&self) -> FinSpace {
        match self {
            Model::Inference(m) => m.input_space().clone(),
            Model::Filtering(m) => m.input_space(),
        }
    }

    /// The filtering view of the model (inference models are converted).
    pub fn filtering(&self) -> FilteringModel {
        match self {
            Model::Inference(m) => m.to_filtering(),
            Model::Filtering(m) => m.clone(),
        }
    }
}

/// An interpretation: a belief map `ψ_H : Y → H` and a model over `H`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interpretation {
    psi: Kernel,
    model: Model,
}

impl Interpretation {
    pub fn new(psi: Kernel, model: Model) -> Result<Self, InterpError> {
        if psi.dst() != model.hidden() {
            return Err(InterpError::HiddenSpaceMismatch {
                expected: model.hidden().name(),
                found: psi.dst().name(),
            });
        }
        Ok(Interpretation { psi, model })
    }

    pub fn inference(psi: Kernel, model: InferenceModel) -> Result<Self, InterpError> {
        Interpretation::new(psi, Model::Inference(model))
    }

    pub fn filtering(psi: Kernel, model: FilteringModel) -> Result<Self, InterpError> {
        Interpretation::new(psi, Model::Filtering(model))
    }

    pub fn psi(&self) -> &Kernel {
        &self.psi
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn hidden(&self) -> &FinSpace {
        self.model.hidden()
    }

    /// The belief held at a machine state.
    pub fn belief_at(&self, state: usize) -> Dist {
        Dist::from_weights(self.hidden().clone(), self.psi.row(state).to_vec())
            .expect("ψ rows are distributions")
    }

    fn ensure_matches(&self, machine: &Machine) -> Result<(), InterpError> {
        if self.psi.src() != machine.states() {
            return Err(InterpError::PsiSourceMismatch {
                expected: machine.states().name(),
                found: self.psi.src().name(),
            });
        }
        let inputs = self.model.input_space();
        if inputs != *machine.inputs() {
            return Err(InterpError::InputSpaceMismatch {
                expected: machine.inputs().name(),
                found: inputs.name(),
            });
        }
        Ok(())
    }
}

/// The belief kernels derived from an interpretation: joint beliefs about
/// the current hidden state, the next hidden state, and the next input,
/// plus the two marginals the consistency equations use.
#[derive(Clone, Debug)]
pub struct Predictives {
    /// `Y → H⊗H⊗S`: (current hidden, next hidden, next input).
    pub joint: Kernel,
    /// `Y → H⊗S`: (next hidden, next input).
    pub next_and_input: Kernel,
    /// `Y → S`: the next input alone.
    pub input: Kernel,
}

/// Builds the predictive kernels for an interpretation. Inference models
/// are converted through the frozen-hidden filtering view first; the two
/// marginals are projections of the joint by construction.
pub fn predictives(interp: &Interpretation) -> Predictives {
    let fm = interp.model.filtering();
    let hf = fm.hidden().factor_count();
    let total = hf + fm.kappa().dst().factor_count();
    let joint = interp
        .psi
        .compose(&Kernel::copy(fm.hidden()))
        .expect("ψ lands in the hidden space")
        .compose(&Kernel::identity(fm.hidden()).tensor(fm.kappa()))
        .expect("copy output matches id⊗κ input");
    let next_and_input = joint
        .project_dst(&(hf..total).collect::<Vec<_>>())
        .expect("factor range valid");
    let input = joint
        .project_dst(&(2 * hf..total).collect::<Vec<_>>())
        .expect("factor range valid");
    Predictives {
        joint,
        next_and_input,
        input,
    }
}

/// Verdict of a consistency check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Consistent,
    Inconsistent,
}

/// One violated constraint: the transition `(y, s, y')`, the hidden value
/// `h`, and the two sides of the equation that failed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub y: String,
    pub s: String,
    pub y_next: String,
    pub h: String,
    pub lhs: Rat,
    pub rhs: Rat,
}

/// Result of a consistency check. `verdict` is `Consistent` exactly when
/// `violations` is empty; violations are sorted by `(y, s, y', h)` element
/// order so reports are deterministic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConsistencyReport {
    pub verdict: Verdict,
    pub violations: Vec<Violation>,
    /// For each state (by label), the inputs believed impossible there.
    /// States with no impossible inputs are omitted.
    pub impossible_inputs: BTreeMap<String, BTreeSet<String>>,
    pub checked_constraints: u64,
}

impl ConsistencyReport {
    pub fn is_consistent(&self) -> bool {
        self.verdict == Verdict::Consistent
    }
}

/// A constraint to check: a supported edge with precomputed indices.
type Edge = (usize, usize, usize);

fn collect_edges(machine: &Machine, excluded: &BTreeSet<(usize, usize)>) -> Vec<Edge> {
    machine
        .support_graph()
        .edges()
        .filter(|(y, s, _)| !excluded.contains(&(*y, *s)))
        .collect()
}

fn impossible_inputs_map(machine: &Machine, input_predictive: &Kernel) -> BTreeMap<String, BTreeSet<String>> {
    let mut map = BTreeMap::new();
    for y in machine.states().elements() {
        let impossible: BTreeSet<String> = machine
            .inputs()
            .elements()
            .filter(|&s| input_predictive.prob(y, s).is_zero())
            .map(|s| machine.inputs().label(s))
            .collect();
        if !impossible.is_empty() {
            map.insert(machine.states().label(y), impossible);
        }
    }
    map
}

fn build_report(
    machine: &Machine,
    hidden: &FinSpace,
    mut raw: Vec<(Edge, usize, Rat, Rat)>,
    impossible_inputs: BTreeMap<String, BTreeSet<String>>,
    checked: u64,
) -> ConsistencyReport {
    raw.sort_by_key(|((y, s, y_next), h, _, _)| (*y, *s, *y_next, *h));
    let violations = raw
        .into_iter()
        .map(|((y, s, y_next), h, lhs, rhs)| Violation {
            y: machine.states().label(y),
            s: machine.inputs().label(s),
            y_next: machine.states().label(y_next),
            h: hidden.label(h),
            lhs,
            rhs,
        })
        .collect::<Vec<_>>();
    ConsistencyReport {
        verdict: if violations.is_empty() {
            Verdict::Consistent
        } else {
            Verdict::Inconsistent
        },
        violations,
        impossible_inputs,
        checked_constraints: checked,
    }
}

/// Checks the Bayesian filtering consistency equation on every possible
/// transition. Inference models are checked through their filtering view.
pub fn check_filtering(
    machine: &Machine,
    interp: &Interpretation,
) -> Result<ConsistencyReport, InterpError> {
    check_filtering_excluding(machine, interp, &BTreeSet::new())
}

/// [`check_filtering`] restricted to transitions whose `(state, input)`
/// pair is not excluded. Window truncations of infinite machines use this
/// to skip the rows their finite kernel had to fill arbitrarily.
pub fn check_filtering_excluding(
    machine: &Machine,
    interp: &Interpretation,
    excluded: &BTreeSet<(usize, usize)>,
) -> Result<ConsistencyReport, InterpError> {
    interp.ensure_matches(machine)?;
    let preds = predictives(interp);
    let hidden = interp.hidden().clone();
    let n_hidden = hidden.len();
    let n_inputs = machine.inputs().len();
    let edges = collect_edges(machine, excluded);

    let raw: Vec<(Edge, usize, Rat, Rat)> = edges
        .par_iter()
        .flat_map_iter(|&(y, s, y_next)| {
            let preds = &preds;
            let interp = &interp;
            (0..n_hidden).filter_map(move |h| {
                let lhs = preds.next_and_input.prob(y, h * n_inputs + s);
                let rhs = preds.input.prob(y, s) * interp.psi.prob(y_next, h);
                if *lhs == rhs {
                    None
                } else {
                    Some(((y, s, y_next), h, lhs.clone(), rhs))
                }
            })
        })
        .collect();

    let checked = (edges.len() * n_hidden) as u64;
    let impossible = impossible_inputs_map(machine, &preds.input);
    Ok(build_report(machine, &hidden, raw, impossible, checked))
}

/// Checks the Bayesian inference consistency equation
/// `ψ_H(h ∥ y)·φ(s ∥ h) = ψ_S(s ∥ y)·ψ_H(h ∥ y')` on every possible
/// transition. Requires an inference model.
pub fn check_inference(
    machine: &Machine,
    interp: &Interpretation,
) -> Result<ConsistencyReport, InterpError> {
    check_inference_excluding(machine, interp, &BTreeSet::new())
}

/// [`check_inference`] with excluded `(state, input)` pairs, as in
/// [`check_filtering_excluding`].
pub fn check_inference_excluding(
    machine: &Machine,
    interp: &Interpretation,
    excluded: &BTreeSet<(usize, usize)>,
) -> Result<ConsistencyReport, InterpError> {
    interp.ensure_matches(machine)?;
    let model = match &interp.model {
        Model::Inference(m) => m,
        Model::Filtering(_) => return Err(InterpError::NotAnInferenceModel),
    };
    let hidden = model.hidden().clone();
    let n_hidden = hidden.len();
    let input_predictive = interp.psi.compose(model.phi())?;
    let edges = collect_edges(machine, excluded);

    let raw: Vec<(Edge, usize, Rat, Rat)> = edges
        .par_iter()
        .flat_map_iter(|&(y, s, y_next)| {
            let input_predictive = &input_predictive;
            let interp = &interp;
            let phi = model.phi();
            (0..n_hidden).filter_map(move |h| {
                let lhs = interp.psi.prob(y, h) * phi.prob(h, s);
                let rhs = input_predictive.prob(y, s) * interp.psi.prob(y_next, h);
                if lhs == rhs {
                    None
                } else {
                    Some(((y, s, y_next), h, lhs, rhs))
                }
            })
        })
        .collect();

    let checked = (edges.len() * n_hidden) as u64;
    let impossible = impossible_inputs_map(machine, &input_predictive);
    Ok(build_report(machine, &hidden, raw, impossible, checked))
}

/// The inputs believed impossible at a state: `{ s : ψ_S(s ∥ y) = 0 }`.
pub fn subjectively_impossible_inputs(
    interp: &Interpretation,
    state: &str,
) -> Result<BTreeSet<String>, InterpError> {
    let y = interp.psi.src().resolve(state)?;
    let preds = predictives(interp);
    let input_space = interp.model.input_space();
    Ok(input_space
        .elements()
        .filter(|&s| preds.input.prob(y, s).is_zero())
        .map(|s| input_space.label(s))
        .collect())
}

/// The interpretation that holds the same belief at every state, with a
/// model whose hidden state never changes and whose emission does not
/// depend on it. Consistent for every machine.
pub fn trivial_interpretation(
    machine: &Machine,
    prior: &Dist,
    emission: Option<&Dist>,
) -> Result<Interpretation, InterpError> {
    let hidden = prior.space().clone();
    let emission = match emission {
        Some(e) => {
            if e.space() != machine.inputs() {
                return Err(InterpError::InputSpaceMismatch {
                    expected: machine.inputs().name(),
                    found: e.space().name(),
                });
            }
            e.clone()
        }
        None => Dist::uniform(machine.inputs().clone()),
    };
    let psi = Kernel::from_fn(machine.states().clone(), hidden.clone(), |_, h| {
        prior.p(h).clone()
    })?;
    // id ⊗ emission : H⊗𝟙 → H⊗S, and H⊗𝟙 flattens to H.
    let kappa = Kernel::identity(&hidden).tensor(emission.kernel());
    Interpretation::filtering(psi, FilteringModel::new(hidden, kappa)?)
}

/// Where a state's belief came from during [`propagate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BeliefSource {
    Seed,
    Update { from: String, input: String },
    Unconstrained,
}

/// Two incompatible beliefs forced on the same state.
#[derive(Clone, Debug)]
pub struct PropagateConflict {
    pub state: String,
    pub existing: Dist,
    pub existing_source: BeliefSource,
    pub incoming: Dist,
    pub incoming_source: BeliefSource,
}

/// Outcome of [`propagate`].
#[derive(Clone, Debug)]
pub enum PropagateResult {
    Converged {
        interpretation: Interpretation,
        /// States whose belief was never forced; they received the uniform
        /// belief.
        unconstrained: BTreeSet<String>,
    },
    Conflict(PropagateConflict),
}

/// Synthesizes an interpretation map for `model` by belief propagation
/// from seed beliefs: from every assigned state, each input with positive
/// predictive mass forces the exact Bayes posterior onto every possible
/// successor. Transitions on subjectively impossible inputs are never
/// traversed (the consistency equation does not constrain them). States
/// left unreached get the uniform belief, are reported as unconstrained,
/// and then propagate further so that a `Converged` result always passes
/// [`check_inference`].
pub fn propagate(
    machine: &Machine,
    model: &InferenceModel,
    seeds: &BTreeMap<String, Dist>,
) -> Result<PropagateResult, InterpError> {
    if seeds.is_empty() {
        return Err(InterpError::EmptySeeds);
    }
    if *model.input_space() != *machine.inputs() {
        return Err(InterpError::InputSpaceMismatch {
            expected: machine.inputs().name(),
            found: model.input_space().name(),
        });
    }
    let states = machine.states();
    let n_states = states.len();
    let mut beliefs: Vec<Option<Vec<Rat>>> = vec![None; n_states];
    let mut sources: Vec<Option<BeliefSource>> = vec![None; n_states];
    let mut queue = VecDeque::new();

    for (label, dist) in seeds {
        let y = states.resolve(label)?;
        if dist.space() != model.hidden() {
            return Err(InterpError::SeedSpaceMismatch {
                state: label.clone(),
                expected: model.hidden().name(),
                found: dist.space().name(),
            });
        }
        beliefs[y] = Some(dist.weights().to_vec());
        sources[y] = Some(BeliefSource::Seed);
        queue.push_back(y);
    }

    let mut unconstrained = BTreeSet::new();
    let support = machine.support_graph();
    loop {
        while let Some(y) = queue.pop_front() {
            let belief = beliefs[y].clone().expect("queued states are assigned");
            let prior = Dist::from_weights(model.hidden().clone(), belief)?;
            // Posteriors for every input at once: rows of the Bayesian
            // inverse of φ with respect to the state's belief.
            let posterior_by_input = Kernel::bayes_invert(prior.kernel(), model.phi())?;
            let predictive = prior.push_through(model.phi())?;
            for s in machine.inputs().elements() {
                if predictive.p(s).is_zero() {
                    continue;
                }
                let posterior = posterior_by_input.row(s).to_vec();
                let source = BeliefSource::Update {
                    from: states.label(y),
                    input: machine.inputs().label(s),
                };
                for y_next in states.elements() {
                    if !support.contains(y, s, y_next) {
                        continue;
                    }
                    match &beliefs[y_next] {
                        None => {
                            beliefs[y_next] = Some(posterior.clone());
                            sources[y_next] = Some(source.clone());
                            queue.push_back(y_next);
                        }
                        Some(existing) if *existing != posterior => {
                            return Ok(PropagateResult::Conflict(PropagateConflict {
                                state: states.label(y_next),
                                existing: Dist::from_weights(
                                    model.hidden().clone(),
                                    existing.clone(),
                                )?,
                                existing_source: sources[y_next]
                                    .clone()
                                    .expect("assigned states have a source"),
                                incoming: Dist::from_weights(
                                    model.hidden().clone(),
                                    posterior.clone(),
                                )?,
                                incoming_source: source.clone(),
                            }));
                        }
                        Some(_) => {}
                    }
                }
            }
        }
        match beliefs.iter().position(Option::is_none) {
            Some(y) => {
                beliefs[y] = Some(Dist::uniform(model.hidden().clone()).weights().to_vec());
                sources[y] = Some(BeliefSource::Unconstrained);
                unconstrained.insert(states.label(y));
                queue.push_back(y);
            }
            None => break,
        }
    }

    let rows = beliefs
        .into_iter()
        .map(|b| b.expect("all states assigned"))
        .collect();
    let psi = Kernel::from_rows(states.clone(), model.hidden().clone(), rows)?;
    let interpretation = Interpretation::inference(psi, model.clone())?;
    Ok(PropagateResult::Converged {
        interpretation,
        unconstrained,
    })
}

/// Evaluates the conjugate-prior form of the inference consistency
/// condition: both sides of
///
/// ```text
/// ψ_H(h ∥ y)·φ(s ∥ h)  =  ψ_S(s ∥ y) · Σ_{y'} γ(y' ∥ y,s)·ψ_H(h ∥ y')
/// ```
///
/// are built as kernels `Y → S⊗H` out of the structural operations and
/// compared exactly. For deterministic machines this equality is
/// equivalent to [`check_inference`]; the check refuses stochastic
/// machines, where only one direction is known.
pub fn check_conjugate_form(
    machine: &Machine,
    interp: &Interpretation,
) -> Result<ConsistencyReport, InterpError> {
    interp.ensure_matches(machine)?;
    let model = match &interp.model {
        Model::Inference(m) => m,
        Model::Filtering(_) => return Err(InterpError::NotAnInferenceModel),
    };
    if !machine.is_deterministic() {
        return Err(InterpError::RequiresDeterministicMachine);
    }
    let hidden = model.hidden().clone();
    let states = machine.states();
    let inputs = machine.inputs();
    let (yf, sf) = (states.factor_count(), inputs.factor_count());

    // Left side: ψ ⨟ copy ⨟ (φ ⊗ id) : Y → S⊗H.
    let lhs = interp
        .psi
        .compose(&Kernel::copy(&hidden))?
        .compose(&model.phi().tensor(&Kernel::identity(&hidden)))?;

    // Right side: duplicate the state, sample the predicted input, duplicate
    // it, run one machine step on (state, input), then read the posterior
    // belief at the reached state.
    let predictive = interp.psi.compose(model.phi())?;
    let spread = Kernel::copy(states)
        .compose(&Kernel::identity(states).tensor(&predictive))?
        .compose(&Kernel::identity(states).tensor(&Kernel::copy(inputs)))?;
    // Factors now (Y, S, S); bring them to (S, Y, S) so γ sees (Y, S).
    let mut order: Vec<usize> = (yf..yf + sf).collect();
    order.extend(0..yf);
    order.extend(yf + sf..yf + 2 * sf);
    let rhs = spread
        .project_dst(&order)?
        .compose(&Kernel::identity(inputs).tensor(machine.gamma()))?
        .compose(&Kernel::identity(inputs).tensor(&interp.psi))?;

    let n_hidden = hidden.len();
    let mut raw = Vec::new();
    for y in states.elements() {
        for s in inputs.elements() {
            for h in hidden.elements() {
                let out = s * n_hidden + h;
                let (l, r) = (lhs.prob(y, out), rhs.prob(y, out));
                if l != r {
                    let y_next = machine
                        .successor(y, s)
                        .expect("deterministic machines have unique successors");
                    raw.push(((y, s, y_next), h, l.clone(), r.clone()));
                }
            }
        }
    }
    let checked = (states.len() * inputs.len() * n_hidden) as u64;
    let impossible = impossible_inputs_map(machine, &predictive);
    Ok(build_report(machine, &hidden, raw, impossible, checked))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{perturbed_three_state, three_state_interpretation};
    use crate::rational::rat;

    #[test]
    fn to_filtering_freezes_hidden_state() {
        let (_, interp) = three_state_interpretation();
        let model = match interp.model() {
            Model::Inference(m) => m.clone(),
            _ => unreachable!(),
        };
        let fm = model.to_filtering();
        // κ((h', s) ∥ h) = [h'=h]·φ(s ∥ h): with φ = δ the only mass is at
        // (h_j, s_j) from h_j.
        let h = fm.hidden().len();
        let s_count = fm.input_space().len();
        for h0 in 0..h {
            for h1 in 0..h {
                for s in 0..s_count {
                    let got = fm.kappa().prob(h0, h1 * s_count + s);
                    let expect = if h0 == h1 && s == h0 {
                        rat(1, 1)
                    } else {
                        rat(0, 1)
                    };
                    assert_eq!(*got, expect, "κ at ({h0},{h1},{s})");
                }
            }
        }
    }

    #[test]
    fn predictive_marginals_cohere() {
        let (_, interp) = three_state_interpretation();
        let preds = predictives(&interp);
        assert_eq!(preds.joint.project_dst(&[1, 2]).unwrap(), preds.next_and_input);
        assert_eq!(preds.joint.project_dst(&[2]).unwrap(), preds.input);
        // At y0 the belief is uniform and φ is diagonal: both inputs equally
        // likely. At y1 input s2 is believed impossible.
        assert_eq!(*preds.input.prob(0, 0), rat(1, 2));
        assert_eq!(*preds.input.prob(0, 1), rat(1, 2));
        assert_eq!(*preds.input.prob(1, 0), rat(1, 1));
        assert_eq!(*preds.input.prob(1, 1), rat(0, 1));
    }

    #[test]
    fn three_state_is_consistent_both_ways() {
        let (machine, interp) = three_state_interpretation();
        let by_inference = check_inference(&machine, &interp).unwrap();
        assert!(by_inference.is_consistent());
        let by_filtering = check_filtering(&machine, &interp).unwrap();
        assert!(by_filtering.is_consistent());
        assert_eq!(
            by_inference.impossible_inputs,
            BTreeMap::from([
                ("y1".to_string(), BTreeSet::from(["s2".to_string()])),
                ("y2".to_string(), BTreeSet::from(["s1".to_string()])),
            ])
        );
    }

    #[test]
    fn perturbed_three_state_reports_the_first_violation() {
        let (machine, interp) = perturbed_three_state();
        let report = check_inference(&machine, &interp).unwrap();
        assert_eq!(report.verdict, Verdict::Inconsistent);
        let first = &report.violations[0];
        assert_eq!(
            (first.y.as_str(), first.s.as_str(), first.y_next.as_str(), first.h.as_str()),
            ("y0", "s1", "y1", "h1")
        );
        assert_eq!(first.lhs, rat(1, 2));
        assert_eq!(first.rhs, rat(3, 8));
        // Filtering view agrees verdict-for-verdict.
        let filtering = check_filtering(&machine, &interp).unwrap();
        assert_eq!(filtering.verdict, Verdict::Inconsistent);
    }

    #[test]
    fn impossible_inputs_by_state() {
        let (_, interp) = three_state_interpretation();
        assert_eq!(
            subjectively_impossible_inputs(&interp, "y1").unwrap(),
            BTreeSet::from(["s2".to_string()])
        );
        assert!(subjectively_impossible_inputs(&interp, "y0")
            .unwrap()
            .is_empty());
        assert!(matches!(
            subjectively_impossible_inputs(&interp, "nope").unwrap_err(),
            InterpError::FinStoch(FinStochError::UnknownLabel { .. })
        ));
    }

    #[test]
    fn trivial_interpretation_is_consistent_anywhere() {
        let (machine, _) = three_state_interpretation();
        let hidden = FinSpace::new("H", ["h1", "h2", "h3"]).unwrap();
        let prior =
            Dist::from_weights(hidden, vec![rat(1, 2), rat(1, 3), rat(1, 6)]).unwrap();
        let trivial = trivial_interpretation(&machine, &prior, None).unwrap();
        assert!(check_filtering(&machine, &trivial).unwrap().is_consistent());
    }

    #[test]
    fn propagate_recovers_the_three_state_map() {
        let (machine, interp) = three_state_interpretation();
        let model = match interp.model() {
            Model::Inference(m) => m.clone(),
            _ => unreachable!(),
        };
        let seeds = BTreeMap::from([(
            "y0".to_string(),
            Dist::uniform(model.hidden().clone()),
        )]);
        match propagate(&machine, &model, &seeds).unwrap() {
            PropagateResult::Converged {
                interpretation,
                unconstrained,
            } => {
                assert!(unconstrained.is_empty());
                assert_eq!(interpretation.psi(), interp.psi());
                assert!(check_inference(&machine, &interpretation)
                    .unwrap()
                    .is_consistent());
            }
            PropagateResult::Conflict(c) => panic!("unexpected conflict at {}", c.state),
        }
    }

    #[test]
    fn propagate_conflicts_on_full_support() {
        // Two states, everything reachable, distinct φ columns, biased seed:
        // the two predecessors force different posteriors on the same state.
        let states = FinSpace::new("Y", ["y0", "y1"]).unwrap();
        let inputs = FinSpace::new("S", ["a", "b"]).unwrap();
        let src = states.tensor(&inputs);
        let gamma = Kernel::from_fn(src, states.clone(), |_, _| rat(1, 2)).unwrap();
        let machine = Machine::new(states, inputs.clone(), gamma).unwrap();
        let hidden = FinSpace::new("H", ["h0", "h1"]).unwrap();
        let phi = Kernel::from_rows(
            hidden.clone(),
            inputs,
            vec![vec![rat(3, 4), rat(1, 4)], vec![rat(1, 4), rat(3, 4)]],
        )
        .unwrap();
        let model = InferenceModel::new(hidden.clone(), phi).unwrap();
        let seeds = BTreeMap::from([(
            "y0".to_string(),
            Dist::from_weights(hidden, vec![rat(2, 3), rat(1, 3)]).unwrap(),
        )]);
        match propagate(&machine, &model, &seeds).unwrap() {
            PropagateResult::Conflict(conflict) => {
                assert_ne!(conflict.existing, conflict.incoming);
            }
            PropagateResult::Converged { .. } => panic!("expected a conflict"),
        }
    }

    #[test]
    fn propagate_fixed_point_with_constant_emissions() {
        let (machine, _) = three_state_interpretation();
        let hidden = FinSpace::new("H", ["h0", "h1"]).unwrap();
        let phi = Kernel::from_fn(hidden.clone(), machine.inputs().clone(), |_, _| rat(1, 2))
            .unwrap();
        let model = InferenceModel::new(hidden.clone(), phi).unwrap();
        let seed = Dist::from_weights(hidden.clone(), vec![rat(1, 4), rat(3, 4)]).unwrap();
        let seeds = BTreeMap::from([("y0".to_string(), seed.clone())]);
        match propagate(&machine, &model, &seeds).unwrap() {
            PropagateResult::Converged { interpretation, .. } => {
                for y in machine.states().elements() {
                    assert_eq!(interpretation.psi().row(y), seed.weights());
                }
            }
            PropagateResult::Conflict(c) => panic!("unexpected conflict at {}", c.state),
        }
    }

    #[test]
    fn conjugate_form_rejects_stochastic_machines() {
        let (machine, interp) = three_state_interpretation();
        assert!(matches!(
            check_conjugate_form(&machine, &interp).unwrap_err(),
            InterpError::RequiresDeterministicMachine
        ));
    }
}

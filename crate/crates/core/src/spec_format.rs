//! The machine/interpretation spec file format.
//!
//! A spec file is a JSON document with this shape (all probabilities are
//! exact rational strings, `"p/q"` or integers; decimals are rejected):
//!
//! ```json
//! {
//!   "version": 1,
//!   "spaces": [
//!     {"name": "Y", "elements": ["y0", "y1"]},
//!     {"name": "S", "elements": ["a", "b"]},
//!     {"name": "H", "elements": ["h0", "h1"]}
//!   ],
//!   "machine": {
//!     "states": "Y",
//!     "inputs": "S",
//!     "transitions": [
//!       {"from": "y0", "input": "a", "to": "y1", "prob": "1"}
//!     ]
//!   },
//!   "interpretation": {
//!     "hidden": "H",
//!     "kind": "inference",
//!     "psi": {"y0": {"h0": "1/2", "h1": "1/2"}},
//!     "phi": {"h0": {"a": "3/4", "b": "1/4"}}
//!   },
//!   "environment": {
//!     "hidden": "X",
//!     "dynamics": [{"from": "x0", "to": "x0", "emit": "a", "prob": "1"}],
//!     "initial": {"x0": "1"}
//!   }
//! }
//! ```
//!
//! Omitted transitions and omitted map entries mean probability zero; the
//! zeros are load-bearing (they are exactly what consistency verdicts
//! depend on), so absence-means-zero keeps files readable. Every
//! `(from, input)` group must sum to exactly 1, validated at parse time.
//! Filtering interpretations replace `phi` by a `kappa` transition list
//! with entries `{"from": h, "to": h', "emit": s, "prob": p}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::finstoch::{Dist, FinSpace, FinStochError, Kernel};
use crate::interpretation::{
    FilteringModel, InferenceModel, Interpretation, InterpError, Model,
};
use crate::machine::{Environment, Machine, MachineError};
use crate::rational::{format_rat, parse_rat, Rat, RatParseError};

pub const SPEC_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported spec version {0}, expected {SPEC_VERSION}")]
    Version(u32),
    #[error("space `{0}` is declared more than once")]
    DuplicateSpace(String),
    #[error("{referer} references undeclared space `{name}`")]
    UnknownSpace { name: String, referer: String },
    #[error("unknown label `{label}` in space `{space}` ({context})")]
    UnknownLabel {
        label: String,
        space: String,
        context: String,
    },
    #[error("duplicate entry for ({from}, {input}) → {to}")]
    DuplicateTransition {
        from: String,
        input: String,
        to: String,
    },
    #[error("probabilities for {owner} sum to {sum}, expected exactly 1")]
    NonStochastic { owner: String, sum: String },
    #[error("interpretation kind `{kind}` requires a `{required}` table")]
    ModelTableMissing { kind: String, required: String },
    #[error("interpretation kind `{kind}` does not take a `{forbidden}` table")]
    ModelTableUnexpected { kind: String, forbidden: String },
    #[error("bad probability in {context}: {source}")]
    BadProbability {
        context: String,
        #[source]
        source: RatParseError,
    },
    #[error("only atomic spaces can be written to a spec file; `{0}` is a product")]
    ProductSpaceUnsupported(String),
    #[error(transparent)]
    FinStoch(#[from] FinStochError),
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error(transparent)]
    Interp(#[from] InterpError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceDecl {
    pub name: String,
    pub elements: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionDecl {
    pub from: String,
    pub input: String,
    pub to: String,
    pub prob: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmissionDecl {
    pub from: String,
    pub to: String,
    pub emit: String,
    pub prob: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MachineDecl {
    pub states: String,
    pub inputs: String,
    pub transitions: Vec<TransitionDecl>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Inference,
    Filtering,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterpretationDecl {
    pub hidden: String,
    pub kind: ModelKind,
    /// state label → hidden label → probability.
    pub psi: BTreeMap<String, BTreeMap<String, String>>,
    /// hidden label → input label → probability (inference models).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<BTreeMap<String, BTreeMap<String, String>>>,
    /// hidden dynamics entries (filtering models).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<Vec<EmissionDecl>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvironmentDecl {
    pub hidden: String,
    pub dynamics: Vec<EmissionDecl>,
    pub initial: BTreeMap<String, String>,
}

/// A parsed and validated spec document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecDocument {
    pub version: u32,
    pub spaces: Vec<SpaceDecl>,
    pub machine: MachineDecl,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interpretation: Option<InterpretationDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub environment: Option<EnvironmentDecl>,
}

/// The domain objects a spec document describes.
#[derive(Clone, Debug)]
pub struct BuiltSpec {
    pub machine: Machine,
    pub interpretation: Option<Interpretation>,
    pub environment: Option<Environment>,
}

/// Parses and fully validates a spec document: syntax errors come back
/// with line/column, schema violations name the offending rule, and
/// stochasticity is checked row by row with exact sums.
pub fn parse_spec(text: &str) -> Result<SpecDocument, SpecError> {
    let document: SpecDocument =
        serde_json::from_str(text).map_err(|e| SpecError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
    document.build()?;
    Ok(document)
}

/// Parses, validates, and builds the domain objects in one step.
pub fn load_spec(text: &str) -> Result<(SpecDocument, BuiltSpec), SpecError> {
    let document = parse_spec(text)?;
    let built = document.build()?;
    Ok((document, built))
}

impl SpecDocument {
    /// Canonical serialized form (pretty JSON, sorted maps, trailing
    /// newline). Byte-stable for a given document.
    pub fn to_canonical_json(&self) -> String {
        let mut text =
            serde_json::to_string_pretty(self).expect("document serializes infallibly");
        text.push('\n');
        text
    }

    /// Validates the document and constructs the machine, interpretation,
    /// and environment it describes.
    pub fn build(&self) -> Result<BuiltSpec, SpecError> {
        if self.version != SPEC_VERSION {
            return Err(SpecError::Version(self.version));
        }
        let mut spaces: BTreeMap<&str, FinSpace> = BTreeMap::new();
        for decl in &self.spaces {
            if spaces.contains_key(decl.name.as_str()) {
                return Err(SpecError::DuplicateSpace(decl.name.clone()));
            }
            let space = FinSpace::new(&decl.name, decl.elements.iter().cloned())?;
            spaces.insert(&decl.name, space);
        }
        let lookup = |name: &str, referer: &str| -> Result<FinSpace, SpecError> {
            spaces
                .get(name)
                .cloned()
                .ok_or_else(|| SpecError::UnknownSpace {
                    name: name.to_string(),
                    referer: referer.to_string(),
                })
        };

        let states = lookup(&self.machine.states, "machine.states")?;
        let inputs = lookup(&self.machine.inputs, "machine.inputs")?;
        let gamma = build_transition_kernel(&states, &inputs, &self.machine.transitions)?;
        let machine = Machine::new(states.clone(), inputs.clone(), gamma)?;

        let interpretation = match &self.interpretation {
            None => None,
            Some(decl) => Some(build_interpretation(decl, &states, &inputs, &lookup)?),
        };
        let environment = match &self.environment {
            None => None,
            Some(decl) => Some(build_environment(decl, &inputs, &lookup)?),
        };
        Ok(BuiltSpec {
            machine,
            interpretation,
            environment,
        })
    }

    /// Writes domain objects back into a document. All spaces involved
    /// must be atomic (spec files declare flat label lists).
    pub fn from_parts(
        machine: &Machine,
        interpretation: Option<&Interpretation>,
        environment: Option<&Environment>,
    ) -> Result<SpecDocument, SpecError> {
        let mut spaces = Vec::new();
        let mut declare = |space: &FinSpace| -> Result<String, SpecError> {
            if space.factor_count() != 1 {
                return Err(SpecError::ProductSpaceUnsupported(space.name()));
            }
            let decl = SpaceDecl {
                name: space.name(),
                elements: space.labels(),
            };
            if !spaces.contains(&decl) {
                if spaces.iter().any(|d: &SpaceDecl| d.name == decl.name) {
                    return Err(SpecError::DuplicateSpace(decl.name));
                }
                spaces.push(decl.clone());
            }
            Ok(decl.name)
        };

        let states_name = declare(machine.states())?;
        let inputs_name = declare(machine.inputs())?;
        let mut transitions = Vec::new();
        for y in machine.states().elements() {
            for s in machine.inputs().elements() {
                for y_next in machine.states().elements() {
                    let p = machine.transition_prob(y, s, y_next);
                    if !num_traits::Zero::is_zero(p) {
                        transitions.push(TransitionDecl {
                            from: machine.states().label(y),
                            input: machine.inputs().label(s),
                            to: machine.states().label(y_next),
                            prob: format_rat(p),
                        });
                    }
                }
            }
        }
        let machine_decl = MachineDecl {
            states: states_name,
            inputs: inputs_name,
            transitions,
        };

        let interpretation_decl = match interpretation {
            None => None,
            Some(interp) => {
                let hidden = interp.hidden().clone();
                let hidden_name = declare(&hidden)?;
                let psi = kernel_to_map(interp.psi());
                let (kind, phi, kappa) = match interp.model() {
                    Model::Inference(m) => {
                        (ModelKind::Inference, Some(kernel_to_map(m.phi())), None)
                    }
                    Model::Filtering(m) => {
                        let entries = kappa_to_entries(m);
                        (ModelKind::Filtering, None, Some(entries))
                    }
                };
                Some(InterpretationDecl {
                    hidden: hidden_name,
                    kind,
                    psi,
                    phi,
                    kappa,
                })
            }
        };

        let environment_decl = match environment {
            None => None,
            Some(env) => {
                let hidden_name = declare(env.hidden())?;
                let inputs = env.inputs();
                let mut dynamics = Vec::new();
                for x in env.hidden().elements() {
                    for out in env.dynamics().dst().elements() {
                        let p = env.dynamics().prob(x, out);
                        if !num_traits::Zero::is_zero(p) {
                            let (x_next, s) = (out / inputs.len(), out % inputs.len());
                            dynamics.push(EmissionDecl {
                                from: env.hidden().label(x),
                                to: env.hidden().label(x_next),
                                emit: inputs.label(s),
                                prob: format_rat(p),
                            });
                        }
                    }
                }
                let initial = env
                    .hidden()
                    .elements()
                    .filter(|&x| !num_traits::Zero::is_zero(env.initial().p(x)))
                    .map(|x| (env.hidden().label(x), format_rat(env.initial().p(x))))
                    .collect();
                Some(EnvironmentDecl {
                    hidden: hidden_name,
                    dynamics,
                    initial,
                })
            }
        };

        Ok(SpecDocument {
            version: SPEC_VERSION,
            spaces,
            machine: machine_decl,
            interpretation: interpretation_decl,
            environment: environment_decl,
        })
    }
}

/// A standalone interpretation file: the interpretation tables plus any
/// spaces the main document does not already declare (typically the hidden
/// space). Used by check commands when the machine's spec file carries no
/// interpretation of its own.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterpretationFragment {
    #[serde(default)]
    pub spaces: Vec<SpaceDecl>,
    pub interpretation: InterpretationDecl,
}

/// Parses an interpretation fragment (syntax only; validation happens in
/// [`InterpretationFragment::build_for`] once the machine is known).
pub fn parse_interpretation_fragment(text: &str) -> Result<InterpretationFragment, SpecError> {
    serde_json::from_str(text).map_err(|e| SpecError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

impl InterpretationFragment {
    /// Validates the fragment against a machine and the spaces of the
    /// document the machine came from.
    pub fn build_for(
        &self,
        machine: &Machine,
        base_spaces: &[SpaceDecl],
    ) -> Result<Interpretation, SpecError> {
        let mut spaces: BTreeMap<&str, FinSpace> = BTreeMap::new();
        for decl in base_spaces.iter().chain(&self.spaces) {
            let space = FinSpace::new(&decl.name, decl.elements.iter().cloned())?;
            match spaces.get(decl.name.as_str()) {
                // Re-declaring a space identically is allowed so fragments
                // can stay self-describing; conflicts are not.
                Some(existing) if *existing == space => {}
                Some(_) => return Err(SpecError::DuplicateSpace(decl.name.clone())),
                None => {
                    spaces.insert(&decl.name, space);
                }
            }
        }
        let lookup = |name: &str, referer: &str| -> Result<FinSpace, SpecError> {
            spaces
                .get(name)
                .cloned()
                .ok_or_else(|| SpecError::UnknownSpace {
                    name: name.to_string(),
                    referer: referer.to_string(),
                })
        };
        build_interpretation(
            &self.interpretation,
            machine.states(),
            machine.inputs(),
            &lookup,
        )
    }
}

fn parse_prob(text: &str, context: &str) -> Result<Rat, SpecError> {
    parse_rat(text).map_err(|source| SpecError::BadProbability {
        context: context.to_string(),
        source,
    })
}

fn build_transition_kernel(
    states: &FinSpace,
    inputs: &FinSpace,
    transitions: &[TransitionDecl],
) -> Result<Kernel, SpecError> {
    use num_traits::Zero;
    let src = states.tensor(inputs);
    let mut rows = vec![vec![Rat::zero(); states.len()]; src.len()];
    let mut seen = std::collections::BTreeSet::new();
    for t in transitions {
        let y = resolve(states, &t.from, "machine.transitions.from")?;
        let s = resolve(inputs, &t.input, "machine.transitions.input")?;
        let y_next = resolve(states, &t.to, "machine.transitions.to")?;
        if !seen.insert((y, s, y_next)) {
            return Err(SpecError::DuplicateTransition {
                from: t.from.clone(),
                input: t.input.clone(),
                to: t.to.clone(),
            });
        }
        let context = format!("transition ({}, {}, {})", t.from, t.input, t.to);
        rows[y * inputs.len() + s][y_next] = parse_prob(&t.prob, &context)?;
    }
    for y in states.elements() {
        for s in inputs.elements() {
            let sum: Rat = rows[y * inputs.len() + s].iter().sum();
            if !num_traits::One::is_one(&sum) {
                return Err(SpecError::NonStochastic {
                    owner: format!("({}, {})", states.label(y), inputs.label(s)),
                    sum: format_rat(&sum),
                });
            }
        }
    }
    Ok(Kernel::from_rows(src, states.clone(), rows)?)
}

fn build_row_table(
    rows_decl: &BTreeMap<String, BTreeMap<String, String>>,
    src: &FinSpace,
    dst: &FinSpace,
    table_name: &str,
) -> Result<Kernel, SpecError> {
    use num_traits::Zero;
    let mut rows = vec![vec![Rat::zero(); dst.len()]; src.len()];
    for (row_label, entries) in rows_decl {
        let row = resolve(src, row_label, &format!("{table_name} row"))?;
        for (col_label, prob) in entries {
            let col = resolve(dst, col_label, &format!("{table_name}[{row_label}]"))?;
            let context = format!("{table_name}[{row_label}][{col_label}]");
            rows[row][col] = parse_prob(prob, &context)?;
        }
    }
    for a in src.elements() {
        let sum: Rat = rows[a].iter().sum();
        if !num_traits::One::is_one(&sum) {
            return Err(SpecError::NonStochastic {
                owner: format!("{table_name}[{}]", src.label(a)),
                sum: format_rat(&sum),
            });
        }
    }
    Ok(Kernel::from_rows(src.clone(), dst.clone(), rows)?)
}

fn build_emission_kernel(
    entries: &[EmissionDecl],
    src: &FinSpace,
    emit: &FinSpace,
    table_name: &str,
) -> Result<Kernel, SpecError> {
    use num_traits::Zero;
    let dst = src.tensor(emit);
    let mut rows = vec![vec![Rat::zero(); dst.len()]; src.len()];
    let mut seen = std::collections::BTreeSet::new();
    for e in entries {
        let from = resolve(src, &e.from, &format!("{table_name}.from"))?;
        let to = resolve(src, &e.to, &format!("{table_name}.to"))?;
        let s = resolve(emit, &e.emit, &format!("{table_name}.emit"))?;
        if !seen.insert((from, to, s)) {
            return Err(SpecError::DuplicateTransition {
                from: e.from.clone(),
                input: e.emit.clone(),
                to: e.to.clone(),
            });
        }
        let context = format!("{table_name} ({}, {}, {})", e.from, e.to, e.emit);
        rows[from][to * emit.len() + s] = parse_prob(&e.prob, &context)?;
    }
    for a in src.elements() {
        let sum: Rat = rows[a].iter().sum();
        if !num_traits::One::is_one(&sum) {
            return Err(SpecError::NonStochastic {
                owner: format!("{table_name}[{}]", src.label(a)),
                sum: format_rat(&sum),
            });
        }
    }
    Ok(Kernel::from_rows(src.clone(), dst, rows)?)
}

fn build_interpretation(
    decl: &InterpretationDecl,
    states: &FinSpace,
    inputs: &FinSpace,
    lookup: &impl Fn(&str, &str) -> Result<FinSpace, SpecError>,
) -> Result<Interpretation, SpecError> {
    let hidden = lookup(&decl.hidden, "interpretation.hidden")?;
    let psi = build_row_table(&decl.psi, states, &hidden, "psi")?;
    let model = match decl.kind {
        ModelKind::Inference => {
            if decl.kappa.is_some() {
                return Err(SpecError::ModelTableUnexpected {
                    kind: "inference".to_string(),
                    forbidden: "kappa".to_string(),
                });
            }
            let phi_decl = decl.phi.as_ref().ok_or_else(|| SpecError::ModelTableMissing {
                kind: "inference".to_string(),
                required: "phi".to_string(),
            })?;
            let phi = build_row_table(phi_decl, &hidden, inputs, "phi")?;
            Model::Inference(InferenceModel::new(hidden, phi)?)
        }
        ModelKind::Filtering => {
            if decl.phi.is_some() {
                return Err(SpecError::ModelTableUnexpected {
                    kind: "filtering".to_string(),
                    forbidden: "phi".to_string(),
                });
            }
            let kappa_decl =
                decl.kappa.as_ref().ok_or_else(|| SpecError::ModelTableMissing {
                    kind: "filtering".to_string(),
                    required: "kappa".to_string(),
                })?;
            let kappa = build_emission_kernel(kappa_decl, &hidden, inputs, "kappa")?;
            Model::Filtering(FilteringModel::new(hidden, kappa)?)
        }
    };
    Ok(Interpretation::new(psi, model)?)
}

fn build_environment(
    decl: &EnvironmentDecl,
    inputs: &FinSpace,
    lookup: &impl Fn(&str, &str) -> Result<FinSpace, SpecError>,
) -> Result<Environment, SpecError> {
    use num_traits::Zero;
    let hidden = lookup(&decl.hidden, "environment.hidden")?;
    let dynamics = build_emission_kernel(&decl.dynamics, &hidden, inputs, "environment.dynamics")?;
    let mut weights = vec![Rat::zero(); hidden.len()];
    for (label, prob) in &decl.initial {
        let x = resolve(&hidden, label, "environment.initial")?;
        weights[x] = parse_prob(prob, &format!("environment.initial[{label}]"))?;
    }
    let sum: Rat = weights.iter().sum();
    if !num_traits::One::is_one(&sum) {
        return Err(SpecError::NonStochastic {
            owner: "environment.initial".to_string(),
            sum: format_rat(&sum),
        });
    }
    let initial = Dist::from_weights(hidden.clone(), weights)?;
    Ok(Environment::new(hidden, dynamics, initial)?)
}

fn resolve(space: &FinSpace, label: &str, context: &str) -> Result<usize, SpecError> {
    space.index_of(label).ok_or_else(|| SpecError::UnknownLabel {
        label: label.to_string(),
        space: space.name(),
        context: context.to_string(),
    })
}

fn kernel_to_map(kernel: &Kernel) -> BTreeMap<String, BTreeMap<String, String>> {
    use num_traits::Zero;
    kernel
        .src()
        .elements()
        .map(|a| {
            let row = kernel
                .dst()
                .elements()
                .filter(|&b| !kernel.prob(a, b).is_zero())
                .map(|b| (kernel.dst().label(b), format_rat(kernel.prob(a, b))))
                .collect();
            (kernel.src().label(a), row)
        })
        .collect()
}

fn kappa_to_entries(model: &FilteringModel) -> Vec<EmissionDecl> {
    use num_traits::Zero;
    let hidden = model.hidden();
    let inputs = model.input_space();
    let mut entries = Vec::new();
    for h in hidden.elements() {
        for out in model.kappa().dst().elements() {
            let p = model.kappa().prob(h, out);
            if !p.is_zero() {
                let (h_next, s) = (out / inputs.len(), out % inputs.len());
                entries.push(EmissionDecl {
                    from: hidden.label(h),
                    to: hidden.label(h_next),
                    emit: inputs.label(s),
                    prob: format_rat(p),
                });
            }
        }
    }
    entries
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::three_state_interpretation;
    use crate::interpretation::check_inference;

    fn three_state_doc() -> SpecDocument {
        let (machine, interp) = three_state_interpretation();
        SpecDocument::from_parts(&machine, Some(&interp), None).unwrap()
    }

    #[test]
    fn roundtrip_through_text() {
        let doc = three_state_doc();
        let text = doc.to_canonical_json();
        let reparsed = parse_spec(&text).unwrap();
        assert_eq!(doc, reparsed);
        // And serialization is byte-stable.
        assert_eq!(text, reparsed.to_canonical_json());
    }

    #[test]
    fn built_machine_matches_the_source() {
        let (machine, interp) = three_state_interpretation();
        let doc = SpecDocument::from_parts(&machine, Some(&interp), None).unwrap();
        let built = doc.build().unwrap();
        assert_eq!(built.machine, machine);
        let rebuilt = built.interpretation.unwrap();
        assert_eq!(rebuilt.psi(), interp.psi());
        assert!(check_inference(&built.machine, &rebuilt)
            .unwrap()
            .is_consistent());
    }

    #[test]
    fn rejects_non_stochastic_rows_with_the_exact_sum() {
        let mut doc = three_state_doc();
        doc.machine.transitions[0].prob = "9/10".to_string();
        let err = doc.build().unwrap_err();
        match err {
            SpecError::NonStochastic { owner, sum } => {
                assert_eq!(owner, "(y0, s1)");
                assert_eq!(sum, "9/10");
            }
            other => panic!("expected NonStochastic, got {other}"),
        }
    }

    #[test]
    fn rejects_decimal_probabilities_with_hint() {
        let mut doc = three_state_doc();
        doc.machine.transitions[0].prob = "0.75".to_string();
        let err = doc.build().unwrap_err();
        let text = format!("{err}");
        assert!(text.contains("3/4"), "hint missing from: {text}");
    }

    #[test]
    fn rejects_unknown_labels() {
        let mut doc = three_state_doc();
        doc.machine.transitions[0].from = "nowhere".to_string();
        assert!(matches!(
            doc.build().unwrap_err(),
            SpecError::UnknownLabel { .. }
        ));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_spec("{ not json").unwrap_err();
        match err {
            SpecError::Syntax { line, column, .. } => {
                assert_eq!(line, 1);
                assert!(column > 0);
            }
            other => panic!("expected Syntax, got {other}"),
        }
    }

    #[test]
    fn interpretation_is_optional() {
        let (machine, _) = three_state_interpretation();
        let doc = SpecDocument::from_parts(&machine, None, None).unwrap();
        let text = doc.to_canonical_json();
        let built = parse_spec(&text).unwrap().build().unwrap();
        assert!(built.interpretation.is_none());
        assert!(!text.contains("interpretation"));
    }

    #[test]
    fn filtering_interpretations_roundtrip() {
        let (machine, _) = three_state_interpretation();
        let prior = Dist::uniform(FinSpace::new("H", ["h1", "h2"]).unwrap());
        let trivial =
            crate::interpretation::trivial_interpretation(&machine, &prior, None).unwrap();
        let doc = SpecDocument::from_parts(&machine, Some(&trivial), None).unwrap();
        let built = parse_spec(&doc.to_canonical_json()).unwrap().build().unwrap();
        let interp = built.interpretation.unwrap();
        match interp.model() {
            Model::Filtering(m) => {
                assert_eq!(m.kappa(), trivial.model().filtering().kappa());
            }
            Model::Inference(_) => panic!("expected a filtering model"),
        }
    }

    #[test]
    fn kind_and_tables_must_agree() {
        let mut doc = three_state_doc();
        let interp = doc.interpretation.as_mut().unwrap();
        interp.kind = ModelKind::Filtering;
        assert!(matches!(
            doc.build().unwrap_err(),
            SpecError::ModelTableUnexpected { .. }
        ));
    }
}

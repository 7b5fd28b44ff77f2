//! Command implementations. Each returns the text to print and whether the
//! checked property held (drives the 0-vs-1 exit code); errors map to
//! exit code 2.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::json;
use thiserror::Error;

use reasoner_core::filtering_verify::{
    probe_filtering_conditional, verify_filtering_conditional, FilterVerifyError,
};
use reasoner_core::finstoch::{run_axiom_suite, Dist, FinStochError};
use reasoner_core::interpretation::{
    check_conjugate_form, check_filtering, check_inference, predictives, propagate as propagate_psi,
    BeliefSource, InferenceModel, Interpretation, InterpError, Model, PropagateResult,
};
use reasoner_core::machine::{MachineError, SAMPLER_ALGORITHM};
use reasoner_core::parametric::{
    beta_posterior, beta_predictive, beta_update_check, check_diff_consistency, counting_step,
    halved_difference_belief, pullback_interpretation, verify_intertwiner, BetaBelief, Convention,
    CountingState, ParametricError, Sign,
};
use reasoner_core::rational::{format_rat, parse_rat, Rat};
use reasoner_core::report::{HorizonDocument, ReportDocument, TOOL_VERSION};
use reasoner_core::spec_format::{
    load_spec, parse_interpretation_fragment, BuiltSpec, SpecDocument, SpecError,
};

use crate::{Pairing, SpecArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read `{path}`: {source}")]
    ReadFile {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error(transparent)]
    FilterVerify(#[from] FilterVerifyError),
    #[error(transparent)]
    Parametric(#[from] ParametricError),
    #[error(transparent)]
    FinStoch(#[from] FinStochError),
    #[error("spec has no interpretation; provide one with --interpretation <file>")]
    MissingInterpretation,
    #[error("spec declares no environment; `simulate` needs one")]
    MissingEnvironment,
    #[error("this command needs an inference model (an emission table `phi`)")]
    NeedsInferenceModel,
    #[error("bad seed `{0}`; expected the form state=h1:1/2,h2:1/2")]
    BadSeed(String),
    #[error("depth {depth} exceeds the limit {limit}; raise --depth-limit if this is intended")]
    DepthExceeded { depth: usize, limit: usize },
}

pub struct CmdResult {
    pub output: String,
    pub holds: bool,
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::ReadFile {
        path: path.to_path_buf(),
        source,
    })
}

struct LoadedSpec {
    document: SpecDocument,
    built: BuiltSpec,
}

fn load(args: &SpecArgs) -> Result<LoadedSpec, CliError> {
    let text = read_file(&args.spec)?;
    let (document, built) = load_spec(&text)?;
    Ok(LoadedSpec { document, built })
}

fn interpretation_for(args: &SpecArgs, loaded: &LoadedSpec) -> Result<Interpretation, CliError> {
    if let Some(path) = &args.interpretation {
        let fragment = parse_interpretation_fragment(&read_file(path)?)?;
        return Ok(fragment.build_for(&loaded.built.machine, &loaded.document.spaces)?);
    }
    loaded
        .built
        .interpretation
        .clone()
        .ok_or(CliError::MissingInterpretation)
}

fn belief_map(space: &reasoner_core::finstoch::FinSpace, weights: &[Rat]) -> BTreeMap<String, String> {
    space
        .elements()
        .map(|h| (space.label(h), format_rat(&weights[h])))
        .collect()
}

fn render_report(doc: &ReportDocument, json: bool) -> String {
    if json {
        doc.to_json()
    } else {
        doc.render_text()
    }
}

pub fn check(args: &SpecArgs, conjugate: bool, json: bool) -> Result<CmdResult, CliError> {
    let loaded = load(args)?;
    let interp = interpretation_for(args, &loaded)?;
    let machine = &loaded.built.machine;
    let (checker, report) = if conjugate {
        ("conjugate", check_conjugate_form(machine, &interp)?)
    } else {
        match interp.model() {
            Model::Inference(_) => ("inference", check_inference(machine, &interp)?),
            Model::Filtering(_) => ("filtering", check_filtering(machine, &interp)?),
        }
    };
    let doc = ReportDocument::from_consistency(checker, &report);
    Ok(CmdResult {
        output: render_report(&doc, json),
        holds: report.is_consistent(),
    })
}

pub fn filter(
    args: &SpecArgs,
    inputs: &[String],
    from: Option<&str>,
    json: bool,
) -> Result<CmdResult, CliError> {
    let loaded = load(args)?;
    let interp = interpretation_for(args, &loaded)?;
    let machine = &loaded.built.machine;
    let start_idx = match from {
        Some(label) => machine.states().resolve(label)?,
        None => 0,
    };
    let preds = predictives(&interp);
    let hidden = interp.hidden().clone();

    let mut state_dist = Dist::point(machine.states().clone(), start_idx)?;
    let initial_belief = state_dist.push_through(interp.psi())?;

    let mut records = Vec::new();
    for label in inputs {
        let s = machine.inputs().resolve(label)?;
        let predictive = state_dist.push_through(&preds.input)?;
        let impossible = !predictive.support().contains(&s);
        state_dist = machine.step(&state_dist, label)?;
        let belief = state_dist.push_through(interp.psi())?;
        records.push((label.clone(), impossible, belief));
    }

    if json {
        let steps: Vec<_> = records
            .iter()
            .enumerate()
            .map(|(i, (label, impossible, belief))| {
                json!({
                    "index": i,
                    "input": label,
                    "subjectively_impossible": impossible,
                    "belief": belief_map(&hidden, belief.weights()),
                })
            })
            .collect();
        let doc = json!({
            "tool_version": TOOL_VERSION,
            "start": machine.states().label(start_idx),
            "initial_belief": belief_map(&hidden, initial_belief.weights()),
            "steps": steps,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("json serializes");
        text.push('\n');
        return Ok(CmdResult {
            output: text,
            holds: true,
        });
    }

    let mut out = String::new();
    out.push_str(&format!(
        "start: {}   belief: {}\n",
        machine.states().label(start_idx),
        format_belief(&hidden, initial_belief.weights())
    ));
    for (i, (label, impossible, belief)) in records.iter().enumerate() {
        let flag = if *impossible {
            "  [subjectively impossible]"
        } else {
            ""
        };
        out.push_str(&format!(
            "step {}: input {}{}\n        belief: {}\n",
            i,
            label,
            flag,
            format_belief(&hidden, belief.weights())
        ));
    }
    Ok(CmdResult {
        output: out,
        holds: true,
    })
}

fn format_belief(space: &reasoner_core::finstoch::FinSpace, weights: &[Rat]) -> String {
    space
        .elements()
        .map(|h| format!("{}={}", space.label(h), format_rat(&weights[h])))
        .collect::<Vec<_>>()
        .join(", ")
}

fn parse_seed(text: &str, model: &InferenceModel) -> Result<(String, Dist), CliError> {
    let (state, rest) = text
        .split_once('=')
        .ok_or_else(|| CliError::BadSeed(text.to_string()))?;
    let hidden = model.hidden();
    let mut weights = vec![Rat::from_integer(0.into()); hidden.len()];
    for pair in rest.split(',') {
        let (label, prob) = pair
            .split_once(':')
            .ok_or_else(|| CliError::BadSeed(text.to_string()))?;
        let h = hidden.resolve(label.trim())?;
        weights[h] =
            parse_rat(prob.trim()).map_err(|_| CliError::BadSeed(text.to_string()))?;
    }
    let dist = Dist::from_weights(hidden.clone(), weights)?;
    Ok((state.trim().to_string(), dist))
}

pub fn propagate(args: &SpecArgs, seeds: &[String], json: bool) -> Result<CmdResult, CliError> {
    let loaded = load(args)?;
    let interp = interpretation_for(args, &loaded)?;
    let model = match interp.model() {
        Model::Inference(m) => m.clone(),
        Model::Filtering(_) => return Err(CliError::NeedsInferenceModel),
    };
    let machine = &loaded.built.machine;
    let mut seed_map = BTreeMap::new();
    for text in seeds {
        let (state, dist) = parse_seed(text, &model)?;
        seed_map.insert(state, dist);
    }

    match propagate_psi(machine, &model, &seed_map)? {
        PropagateResult::Converged {
            interpretation,
            unconstrained,
        } => {
            let hidden = model.hidden().clone();
            if json {
                let psi: BTreeMap<String, BTreeMap<String, String>> = machine
                    .states()
                    .elements()
                    .map(|y| {
                        (
                            machine.states().label(y),
                            belief_map(&hidden, interpretation.psi().row(y)),
                        )
                    })
                    .collect();
                let doc = json!({
                    "tool_version": TOOL_VERSION,
                    "outcome": "converged",
                    "psi": psi,
                    "unconstrained_states": unconstrained.iter().collect::<Vec<_>>(),
                });
                let mut text = serde_json::to_string_pretty(&doc).expect("json serializes");
                text.push('\n');
                Ok(CmdResult {
                    output: text,
                    holds: true,
                })
            } else {
                let mut out = String::from("outcome: converged\n");
                for y in machine.states().elements() {
                    out.push_str(&format!(
                        "  {}: {}\n",
                        machine.states().label(y),
                        format_belief(&hidden, interpretation.psi().row(y))
                    ));
                }
                if !unconstrained.is_empty() {
                    out.push_str(&format!(
                        "unconstrained states: {}\n",
                        unconstrained.iter().cloned().collect::<Vec<_>>().join(", ")
                    ));
                }
                Ok(CmdResult {
                    output: out,
                    holds: true,
                })
            }
        }
        PropagateResult::Conflict(conflict) => {
            let hidden = model.hidden().clone();
            let source_str = |s: &BeliefSource| match s {
                BeliefSource::Seed => "seed".to_string(),
                BeliefSource::Update { from, input } => format!("update from ({from}, {input})"),
                BeliefSource::Unconstrained => "unconstrained fill".to_string(),
            };
            if json {
                let doc = json!({
                    "tool_version": TOOL_VERSION,
                    "outcome": "conflict",
                    "state": conflict.state,
                    "existing": belief_map(&hidden, conflict.existing.weights()),
                    "existing_source": source_str(&conflict.existing_source),
                    "incoming": belief_map(&hidden, conflict.incoming.weights()),
                    "incoming_source": source_str(&conflict.incoming_source),
                });
                let mut text = serde_json::to_string_pretty(&doc).expect("json serializes");
                text.push('\n');
                Ok(CmdResult {
                    output: text,
                    holds: false,
                })
            } else {
                let out = format!(
                    "outcome: conflict at {}\n  existing: {}   ({})\n  incoming: {}   ({})\n",
                    conflict.state,
                    format_belief(&hidden, conflict.existing.weights()),
                    source_str(&conflict.existing_source),
                    format_belief(&hidden, conflict.incoming.weights()),
                    source_str(&conflict.incoming_source),
                );
                Ok(CmdResult {
                    output: out,
                    holds: false,
                })
            }
        }
    }
}

pub fn verify_filtering(
    args: &SpecArgs,
    depth: usize,
    depth_limit: usize,
    probe: bool,
    json: bool,
) -> Result<CmdResult, CliError> {
    if depth > depth_limit {
        return Err(CliError::DepthExceeded {
            depth,
            limit: depth_limit,
        });
    }
    let loaded = load(args)?;
    let interp = interpretation_for(args, &loaded)?;
    let machine = &loaded.built.machine;
    let report = if probe {
        probe_filtering_conditional(machine, &interp, depth)
    } else {
        verify_filtering_conditional(machine, &interp, depth)?
    };
    let doc = HorizonDocument::from_horizon(&report);
    let output = if json { doc.to_json() } else { doc.render_text() };
    Ok(CmdResult {
        output,
        holds: report.is_consistent(),
    })
}

pub fn simulate(spec: &Path, steps: usize, seed: u64, json: bool) -> Result<CmdResult, CliError> {
    let text = read_file(spec)?;
    let (_, built) = load_spec(&text)?;
    let env = built.environment.ok_or(CliError::MissingEnvironment)?;
    let machine = &built.machine;
    // The machine starts in its first declared state.
    let initial = Dist::point(machine.states().clone(), 0)?;
    let trajectory = machine.simulate_coupled(&env, &initial, steps, seed)?;

    if json {
        let records: Vec<_> = trajectory
            .iter()
            .map(|t| {
                json!({
                    "step": t.step,
                    "world": t.world,
                    "input": t.input,
                    "state": t.state,
                })
            })
            .collect();
        let doc = json!({
            "tool_version": TOOL_VERSION,
            "algorithm": SAMPLER_ALGORITHM,
            "seed": seed,
            "trajectory": records,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("json serializes");
        text.push('\n');
        return Ok(CmdResult {
            output: text,
            holds: true,
        });
    }

    let mut out = format!("algorithm: {SAMPLER_ALGORITHM}\nseed: {seed}\n");
    for t in &trajectory {
        out.push_str(&format!("{}\t{}\t{}\t{}\n", t.step, t.world, t.input, t.state));
    }
    Ok(CmdResult {
        output: out,
        holds: true,
    })
}

pub fn example_counting(window: u64, pairing: Pairing, json: bool) -> Result<CmdResult, CliError> {
    let convention = match pairing {
        Pairing::Adopted => Convention::Adopted,
        Pairing::Flipped => Convention::Flipped,
    };
    let mut violations = Vec::new();
    let mut checked = 0u64;
    for i in 1..=window {
        for j in 1..=window {
            let state = CountingState::new(i, j)?;
            for s in Sign::BOTH {
                checked += 1;
                if !beta_update_check(state, s, convention) {
                    let stepped = counting_step(state, s);
                    let posterior = beta_posterior(
                        BetaBelief { alpha: i, beta: j },
                        s,
                        convention,
                    );
                    // Evidence of the mismatch: the mean of the Bayes
                    // posterior against the mean at the reached state.
                    let bayes_mean = Rat::new(
                        posterior.alpha.into(),
                        (posterior.alpha + posterior.beta).into(),
                    );
                    let machine_mean =
                        Rat::new(stepped.i.into(), (stepped.i + stepped.j).into());
                    violations.push(reasoner_core::report::ViolationDoc {
                        y: state.label(),
                        s: s.label().to_string(),
                        y_next: stepped.label(),
                        h: format!("Beta({},{})", posterior.alpha, posterior.beta),
                        lhs: format_rat(&bayes_mean),
                        rhs: format_rat(&machine_mean),
                    });
                }
            }
        }
    }
    let holds = violations.is_empty();
    let doc = ReportDocument {
        tool_version: TOOL_VERSION.to_string(),
        checker: "counting-conjugacy".to_string(),
        verdict: if holds { "consistent" } else { "inconsistent" }.to_string(),
        constraint_count: checked,
        violations,
        impossible_inputs: BTreeMap::new(),
        unconstrained_states: Vec::new(),
    };
    let mut output = render_report(&doc, json);
    if !json {
        let predictive = beta_predictive(CountingState::new(1, 1)?);
        output.push_str(&format!(
            "predictive at (1,1): +1={}, -1={}\n",
            format_rat(predictive.p(0)),
            format_rat(predictive.p(1)),
        ));
    }
    Ok(CmdResult {
        output,
        holds,
    })
}

pub fn example_difference(
    window: i64,
    halved_belief: bool,
    json: bool,
) -> Result<CmdResult, CliError> {
    if halved_belief {
        let (plus, minus) = halved_difference_belief(0);
        let total = &plus + &minus;
        let doc = ReportDocument {
            tool_version: TOOL_VERSION.to_string(),
            checker: "difference-halved-belief".to_string(),
            verdict: "inconsistent".to_string(),
            constraint_count: 1,
            violations: vec![reasoner_core::report::ViolationDoc {
                y: "0".to_string(),
                s: "*".to_string(),
                y_next: "*".to_string(),
                h: "total-mass".to_string(),
                lhs: format_rat(&total),
                rhs: "1".to_string(),
            }],
            impossible_inputs: BTreeMap::new(),
            unconstrained_states: Vec::new(),
        };
        let mut output = render_report(&doc, json);
        if !json {
            output.push_str(
                "the halved closed form assigns total belief 1/2 at every state; \
                 it is not a probability distribution\n",
            );
        }
        return Ok(CmdResult {
            output,
            holds: false,
        });
    }
    let report = check_diff_consistency(window)?;
    let doc = ReportDocument::from_consistency("difference-consistency", &report);
    Ok(CmdResult {
        output: render_report(&doc, json),
        holds: report.is_consistent(),
    })
}

pub fn example_pullback(window: u64, json: bool) -> Result<CmdResult, CliError> {
    let intertwiner = verify_intertwiner(window)?;
    let report = pullback_interpretation(window)?;
    let doc = ReportDocument::from_consistency("pullback-consistency", &report);
    let mut output = String::new();
    if !json {
        output.push_str(&format!(
            "machine map intertwines the dynamics on window {window}: {}\n",
            if intertwiner { "yes" } else { "no" }
        ));
    }
    output.push_str(&render_report(&doc, json));
    Ok(CmdResult {
        output,
        holds: intertwiner && report.is_consistent(),
    })
}

pub fn axioms(trials: usize, seed: u64, json: bool) -> Result<CmdResult, CliError> {
    let report = run_axiom_suite(seed, trials);
    if json {
        let families: Vec<_> = report
            .families
            .iter()
            .map(|f| {
                json!({
                    "name": f.name,
                    "cases": f.cases,
                    "failures": f.failures,
                    "passed": f.passed(),
                })
            })
            .collect();
        let doc = json!({
            "tool_version": TOOL_VERSION,
            "seed": report.seed,
            "trials": report.trials,
            "families": families,
            "all_passed": report.all_passed(),
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("json serializes");
        text.push('\n');
        return Ok(CmdResult {
            output: text,
            holds: report.all_passed(),
        });
    }
    let mut out = format!("seed {} / {} trials per family\n", report.seed, report.trials);
    for family in &report.families {
        out.push_str(&format!(
            "{}  {} ({} cases)\n",
            if family.passed() { "PASS" } else { "FAIL" },
            family.name,
            family.cases
        ));
    }
    Ok(CmdResult {
        output: out,
        holds: report.all_passed(),
    })
}

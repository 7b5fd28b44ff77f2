//! Two countably infinite machines with closed-form interpretations,
//! verified exactly over finite windows.
//!
//! The counting machine stores how many `+1` and `-1` inputs it has seen;
//! its beliefs are Beta distributions over an unknown coin bias, and the
//! Bayes update is the hyperparameter step `(i,j) ↦ (i+1,j)` or `(i,j+1)`.
//! The difference machine stores only the difference of the two counts;
//! its beliefs weigh two fixed hypotheses about the coin, with the closed
//! form `p₊(k) = 3ᵏ/(1+3ᵏ)`. A deterministic map between the machines
//! (take the difference of the counts) commutes with their dynamics and
//! transports the two-hypothesis interpretation onto the counting machine.
//!
//! Two emission conventions are deliberately kept around. The adopted one
//! pairs the observation `+1` with the bias `h` itself; it is the unique
//! pairing under which the counting step matches Beta conjugacy, the
//! difference machine is consistent, and the machine map commutes. The
//! flipped pairing (`+1` with `1−h`) and the halved two-hypothesis belief
//! form are kept behind [`Convention::Flipped`] and
//! [`halved_difference_belief`] so that their failures stay demonstrable.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::One;
use thiserror::Error;

use crate::finstoch::{Dist, FinSpace, FinStochError, Kernel};
use crate::interpretation::{
    check_inference_excluding, ConsistencyReport, InferenceModel, Interpretation, InterpError,
};
use crate::machine::{Machine, MachineError};
use crate::rational::{rat, Rat};

/// Default bound on `|k|` for difference-machine beliefs.
pub const DEFAULT_DIFF_WINDOW: i64 = 64;

/// A window-truncated machine, its interpretation, and the boundary
/// `(state, input)` pairs to exclude from checking.
pub type WindowedInterpretation = (Machine, Interpretation, BTreeSet<(usize, usize)>);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParametricError {
    #[error("count hyperparameters must be at least 1, got ({i}, {j})")]
    InvalidCounts { i: u64, j: u64 },
    #[error("difference state {k} lies outside the window ±{window}")]
    WindowExceeded { k: i64, window: i64 },
    #[error("window must be at least 1, got {0}")]
    WindowTooSmall(i64),
    #[error(transparent)]
    FinStoch(#[from] FinStochError),
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error(transparent)]
    Interp(#[from] InterpError),
}

/// An input: one of the two observations `+1` and `-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn label(self) -> &'static str {
        match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        }
    }

    pub fn delta(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

/// The shared two-element input space `{+1, -1}`.
pub fn sign_space() -> FinSpace {
    FinSpace::new("S", ["+1", "-1"]).expect("labels distinct")
}

/// Which way the emission kernel pairs observations with the coin bias.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convention {
    /// `+1` is emitted with probability `h`. The counting step realizes
    /// Beta conjugacy under this pairing.
    Adopted,
    /// `+1` is emitted with probability `1−h`; under this pairing the
    /// counting step does not track Bayes updating. Kept so the failure
    /// stays demonstrable.
    Flipped,
}

/// State of the counting machine: the two running counts, both ≥ 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CountingState {
    pub i: u64,
    pub j: u64,
}

impl CountingState {
    pub fn new(i: u64, j: u64) -> Result<Self, ParametricError> {
        if i == 0 || j == 0 {
            return Err(ParametricError::InvalidCounts { i, j });
        }
        Ok(CountingState { i, j })
    }

    pub fn label(&self) -> String {
        format!("({},{})", self.i, self.j)
    }
}

/// A Beta(α, β) belief over the coin bias, α, β ≥ 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BetaBelief {
    pub alpha: u64,
    pub beta: u64,
}

/// State of the difference machine: how many more `+1` than `-1` inputs
/// have arrived.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct DiffState {
    pub k: i64,
}

/// A belief over the two hypotheses `{h+1, h-1}`, stored as the
/// probability of `h+1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoPointBelief {
    pub p_plus: Rat,
}

impl TwoPointBelief {
    pub fn weights(&self) -> Vec<Rat> {
        vec![self.p_plus.clone(), Rat::one() - &self.p_plus]
    }

    pub fn to_dist(&self) -> Dist {
        Dist::from_weights(two_point_space(), self.weights()).expect("weights sum to 1")
    }
}

/// The two-hypothesis hidden space `{h+1, h-1}`.
pub fn two_point_space() -> FinSpace {
    FinSpace::new("H", ["h+1", "h-1"]).expect("labels distinct")
}

/// One step of the counting machine: `+1` bumps the first count, `-1` the
/// second.
pub fn counting_step(state: CountingState, s: Sign) -> CountingState {
    match s {
        Sign::Plus => CountingState {
            i: state.i + 1,
            j: state.j,
        },
        Sign::Minus => CountingState {
            i: state.i,
            j: state.j + 1,
        },
    }
}

/// The predictive distribution over the next input under the Beta(i, j)
/// belief with `+1` paired to the bias itself: `P(+1) = i/(i+j)`.
pub fn beta_predictive(state: CountingState) -> Dist {
    let total = state.i + state.j;
    let p_plus = Rat::new(state.i.into(), total.into());
    Dist::from_weights(sign_space(), vec![p_plus.clone(), Rat::one() - p_plus])
        .expect("weights sum to 1")
}

/// The Bayes posterior of a Beta belief after one observation, as a
/// hyperparameter identity (no integration): the observation paired with
/// `h` bumps α, the other bumps β.
pub fn beta_posterior(belief: BetaBelief, s: Sign, convention: Convention) -> BetaBelief {
    let bump_alpha = match convention {
        Convention::Adopted => s == Sign::Plus,
        Convention::Flipped => s == Sign::Minus,
    };
    if bump_alpha {
        BetaBelief {
            alpha: belief.alpha + 1,
            beta: belief.beta,
        }
    } else {
        BetaBelief {
            alpha: belief.alpha,
            beta: belief.beta + 1,
        }
    }
}

/// True iff the machine's counting step lands on the hyperparameters of
/// the exact Bayes posterior of Beta(i, j) on observing `s`.
pub fn beta_update_check(state: CountingState, s: Sign, convention: Convention) -> bool {
    let posterior = beta_posterior(
        BetaBelief {
            alpha: state.i,
            beta: state.j,
        },
        s,
        convention,
    );
    let stepped = counting_step(state, s);
    posterior.alpha == stepped.i && posterior.beta == stepped.j
}

/// One step of the difference machine: `k ↦ k + s`.
pub fn diff_step(state: DiffState, s: Sign) -> DiffState {
    DiffState {
        k: state.k + s.delta(),
    }
}

/// `3^k` as an exact rational, for any sign of `k`.
fn pow3(k: i64) -> Rat {
    let p = BigInt::from(3).pow(k.unsigned_abs() as u32);
    if k >= 0 {
        Rat::from_integer(p)
    } else {
        Rat::new(BigInt::one(), p)
    }
}

/// The difference machine's belief at state `k`, in closed form:
/// `p₊(k) = 3ᵏ/(1+3ᵏ)`. Equals `k` exact Bayes updates from the uniform
/// prior (each `+1` multiplies the odds by 3, each `-1` by 1/3).
pub fn diff_posterior(state: DiffState) -> Result<TwoPointBelief, ParametricError> {
    diff_posterior_windowed(state, DEFAULT_DIFF_WINDOW)
}

/// [`diff_posterior`] with an explicit bound on `|k|`.
pub fn diff_posterior_windowed(
    state: DiffState,
    window: i64,
) -> Result<TwoPointBelief, ParametricError> {
    if state.k.abs() > window {
        return Err(ParametricError::WindowExceeded {
            k: state.k,
            window,
        });
    }
    let odds = pow3(state.k);
    let p_plus = &odds / (Rat::one() + &odds);
    Ok(TwoPointBelief { p_plus })
}

/// The halved (and flipped) closed form
/// `(1/(2(1+3ᵏ)), 1/(2(1+3⁻ᵏ)))` for the difference-machine belief. Not a
/// probability distribution — the components sum to 1/2 for every `k` —
/// so it is rejected by kernel construction. Kept demonstrable; the
/// normalized form is [`diff_posterior`].
pub fn halved_difference_belief(k: i64) -> (Rat, Rat) {
    let two = rat(2, 1);
    let plus = Rat::one() / (&two * (Rat::one() + pow3(k)));
    let minus = Rat::one() / (&two * (Rat::one() + pow3(-k)));
    (plus, minus)
}

/// The two-hypothesis emission model: `φ(s ∥ h_i) = 3/4` when `i = s`,
/// else `1/4`.
pub fn difference_model() -> InferenceModel {
    let hidden = two_point_space();
    let phi = Kernel::from_rows(
        hidden.clone(),
        sign_space(),
        vec![vec![rat(3, 4), rat(1, 4)], vec![rat(1, 4), rat(3, 4)]],
    )
    .expect("rows stochastic");
    InferenceModel::new(hidden, phi).expect("φ reads H")
}

/// The deterministic map from counting states to difference states:
/// `(i, j) ↦ i − j`.
pub fn machine_map_g(state: CountingState) -> DiffState {
    DiffState {
        k: state.i as i64 - state.j as i64,
    }
}

/// Checks that a map from counting states to difference states commutes
/// with the two machines' dynamics on the window `i, j ≤ n`: stepping then
/// mapping equals mapping then stepping, for both inputs. Both machines
/// are deterministic, so the kernel equation reduces to equality of the
/// reached states.
pub fn intertwiner_holds_for(
    n: u64,
    map: impl Fn(CountingState) -> DiffState,
) -> Result<bool, ParametricError> {
    if n == 0 {
        return Err(ParametricError::WindowTooSmall(0));
    }
    for i in 1..=n {
        for j in 1..=n {
            let state = CountingState::new(i, j)?;
            for s in Sign::BOTH {
                if map(counting_step(state, s)) != diff_step(map(state), s) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// [`intertwiner_holds_for`] with the difference-of-counts map.
pub fn verify_intertwiner(n: u64) -> Result<bool, ParametricError> {
    intertwiner_holds_for(n, machine_map_g)
}

/// The difference machine truncated to states `-window ..= window`.
/// Transitions that would leave the window have no counterpart in the
/// infinite machine; their rows are filled with self-loops and the
/// affected `(state, input)` pairs are returned for exclusion from
/// checking.
pub fn windowed_difference_machine(
    window: i64,
) -> Result<(Machine, BTreeSet<(usize, usize)>), ParametricError> {
    if window < 1 {
        return Err(ParametricError::WindowTooSmall(window));
    }
    let labels: Vec<String> = (-window..=window).map(|k| k.to_string()).collect();
    let states = FinSpace::new("Y", labels)?;
    let inputs = sign_space();
    let index_of = |k: i64| (k + window) as usize;
    let mut excluded = BTreeSet::new();
    for k in -window..=window {
        for (s_idx, s) in Sign::BOTH.iter().enumerate() {
            if (k + s.delta()).abs() > window {
                excluded.insert((index_of(k), s_idx));
            }
        }
    }
    let machine = Machine::deterministic(states, inputs, move |y, s_idx| {
        let k = y as i64 - window;
        let s = Sign::BOTH[s_idx];
        let target = k + s.delta();
        if target.abs() > window {
            y // placeholder row, excluded from checking
        } else {
            index_of(target)
        }
    })?;
    Ok((machine, excluded))
}

/// The windowed difference machine together with its closed-form
/// interpretation.
pub fn difference_interpretation(
    window: i64,
) -> Result<WindowedInterpretation, ParametricError> {
    let (machine, excluded) = windowed_difference_machine(window)?;
    let model = difference_model();
    let rows: Result<Vec<Vec<Rat>>, ParametricError> = (-window..=window)
        .map(|k| Ok(diff_posterior_windowed(DiffState { k }, window)?.weights()))
        .collect();
    let psi = Kernel::from_rows(machine.states().clone(), model.hidden().clone(), rows?)?;
    let interp = Interpretation::inference(psi, model)?;
    Ok((machine, interp, excluded))
}

/// Runs the inference consistency check on the windowed difference
/// machine, excluding the boundary rows the truncation had to invent.
/// Consistent for every window.
pub fn check_diff_consistency(window: i64) -> Result<ConsistencyReport, ParametricError> {
    let (machine, interp, excluded) = difference_interpretation(window)?;
    Ok(check_inference_excluding(&machine, &interp, &excluded)?)
}

/// The counting machine truncated to states `{1..n}²`, with the same
/// boundary treatment as [`windowed_difference_machine`].
pub fn windowed_counting_machine(
    n: u64,
) -> Result<(Machine, BTreeSet<(usize, usize)>), ParametricError> {
    if n == 0 {
        return Err(ParametricError::WindowTooSmall(0));
    }
    let mut labels = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            labels.push(CountingState { i, j }.label());
        }
    }
    let states = FinSpace::new("Y", labels)?;
    let inputs = sign_space();
    let index_of = |st: CountingState| ((st.i - 1) * n + (st.j - 1)) as usize;
    let state_of = move |idx: usize| CountingState {
        i: idx as u64 / n + 1,
        j: idx as u64 % n + 1,
    };
    let mut excluded = BTreeSet::new();
    for idx in 0..(n * n) as usize {
        for (s_idx, s) in Sign::BOTH.iter().enumerate() {
            let next = counting_step(state_of(idx), *s);
            if next.i > n || next.j > n {
                excluded.insert((idx, s_idx));
            }
        }
    }
    let machine = Machine::deterministic(states, inputs, move |y, s_idx| {
        let next = counting_step(state_of(y), Sign::BOTH[s_idx]);
        if next.i > n || next.j > n {
            y // placeholder row, excluded from checking
        } else {
            index_of(next)
        }
    })?;
    Ok((machine, excluded))
}

/// The counting machine with the interpretation pulled back along the
/// difference map: believe `p₊(i−j)` about the two hypotheses and keep the
/// two-hypothesis emission model.
pub fn counting_pullback_interpretation(
    n: u64,
) -> Result<WindowedInterpretation, ParametricError> {
    let (machine, excluded) = windowed_counting_machine(n)?;
    let model = difference_model();
    let mut rows = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            let k = machine_map_g(CountingState { i, j });
            rows.push(diff_posterior_windowed(k, n as i64)?.weights());
        }
    }
    let psi = Kernel::from_rows(machine.states().clone(), model.hidden().clone(), rows)?;
    let interp = Interpretation::inference(psi, model)?;
    Ok((machine, interp, excluded))
}

/// Runs the inference consistency check on the pulled-back interpretation
/// of the windowed counting machine. Consistent for every window.
pub fn pullback_interpretation(n: u64) -> Result<ConsistencyReport, ParametricError> {
    let (machine, interp, excluded) = counting_pullback_interpretation(n)?;
    Ok(check_inference_excluding(&machine, &interp, &excluded)?)
}

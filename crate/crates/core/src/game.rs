//! Game definition, derived quantities and the three pure primitives
//! (learner strategy, stage payoff, state transition).
//!
//! Internally every game is held in a canonical orientation: X's rows and
//! Y's columns are relabeled so that, when neither player has a dominant
//! action, `Δ1 > 0 > Δ2` and `|Δ1| ≤ |Δ2|`. States are exact integers in the
//! scaled units `Ã = q·A`.

use std::fmt;

use num_integer::Integer;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{self, LossMatrix, ScaledMatrix};

/// Largest |state| allowed; keeps every state exactly representable as f64.
const STATE_LIMIT: i128 = 1 << 53;

/// Beyond this |η·s| the minority probability underflows; clamp it to zero.
const EXP_CLAMP: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    L,
    R,
}

impl Action {
    pub fn flip(self) -> Self {
        match self {
            Action::L => Action::R,
            Action::R => Action::L,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Action::L => 0,
            Action::R => 1,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Action::L => 'L',
            Action::R => 'R',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'L' | 'l' => Some(Action::L),
            'R' | 'r' => Some(Action::R),
            _ => None,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Renders an action slice as an `L`/`R` string.
pub fn action_string(actions: &[Action]) -> String {
    actions.iter().map(|a| a.as_char()).collect()
}

/// Parses an `L`/`R` string, ignoring whitespace.
pub fn parse_actions(text: &str) -> Result<Vec<Action>> {
    text.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| {
            Action::from_char(c)
                .ok_or_else(|| Error::Format(format!("unexpected action character `{c}`")))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    NoDominant,
    XDominant,
    YDominant,
    Degenerate,
}

impl Regime {
    pub fn classify(d1: i64, d2: i64, dd1: i64, dd2: i64) -> Self {
        let x = (d1 as i128) * (d2 as i128);
        let y = (dd1 as i128) * (dd2 as i128);
        if x < 0 && y < 0 {
            Regime::NoDominant
        } else if x > 0 {
            Regime::XDominant
        } else if x < 0 && y > 0 {
            Regime::YDominant
        } else {
            Regime::Degenerate
        }
    }
}

/// Relabeling applied to reach the canonical orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Orientation {
    pub swap_rows: bool,
    pub swap_cols: bool,
}

impl Orientation {
    pub fn action_to_user(&self, a: Action) -> Action {
        if self.swap_cols {
            a.flip()
        } else {
            a
        }
    }

    pub fn action_from_user(&self, a: Action) -> Action {
        self.action_to_user(a)
    }

    /// Row swaps negate the state; column swaps leave it unchanged.
    pub fn state_to_user(&self, value: i64) -> i64 {
        if self.swap_rows {
            -value
        } else {
            value
        }
    }

    pub fn strategy_to_user(&self, x: MixedStrategy) -> MixedStrategy {
        if self.swap_rows {
            MixedStrategy { p1: x.p2, p2: x.p1 }
        } else {
            x
        }
    }
}

/// Row and column differences of the scaled canonical matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deltas {
    pub delta1: i64,
    pub delta2: i64,
    pub little_delta1: i64,
    pub little_delta2: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedStrategy {
    pub p1: f64,
    pub p2: f64,
}

/// A node of the state lattice. `branch` counts R moves plus one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct State {
    pub value: i64,
    pub time: usize,
    pub branch: usize,
}

impl State {
    pub fn root() -> Self {
        State {
            value: 0,
            time: 1,
            branch: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameSpec {
    user_matrix: LossMatrix,
    canonical: LossMatrix,
    scaled: ScaledMatrix,
    orientation: Orientation,
    deltas: Deltas,
    regime: Regime,
    eta: f64,
    eta_scaled: f64,
    eta_auto: bool,
    horizon: usize,
    game_value: Rational64,
    losses: [[f64; 2]; 2],
}

/// Default learning rate `sqrt(8 ln 2 / T)`.
pub fn default_eta(horizon: usize) -> f64 {
    (8.0 * std::f64::consts::LN_2 / horizon as f64).sqrt()
}

fn orient(matrix: &LossMatrix, regime: Regime, sm: &ScaledMatrix) -> Orientation {
    let (d1, d2) = (sm.delta1(), sm.delta2());
    let mut o = Orientation::default();
    match regime {
        Regime::NoDominant => {
            // Flip rows to make Δ1 positive; if then |Δ1| > |Δ2|, exchanging
            // columns and rows again restores the sign pattern with the
            // magnitudes swapped.
            if d1 < 0 {
                o.swap_rows = !o.swap_rows;
            }
            if d1.unsigned_abs() > d2.unsigned_abs() {
                o.swap_cols = true;
                o.swap_rows = !o.swap_rows;
            }
        }
        Regime::XDominant => {
            if d1 < 0 {
                o.swap_rows = true;
            }
            // Make R the column Y prefers against X's dominant row.
            let m = apply(matrix, o);
            if m.entry(1, 0) > m.entry(1, 1) {
                o.swap_cols = true;
            }
        }
        Regime::YDominant => {
            if d1 < 0 {
                o.swap_rows = true;
            }
        }
        Regime::Degenerate => {}
    }
    o
}

fn apply(matrix: &LossMatrix, o: Orientation) -> LossMatrix {
    let mut m = *matrix;
    if o.swap_cols {
        m = m.swap_cols();
    }
    if o.swap_rows {
        m = m.swap_rows();
    }
    m
}

impl GameSpec {
    /// Validates a game and derives every scalar quantity. `eta = None`
    /// selects the default rate for the horizon.
    pub fn validate(matrix: LossMatrix, eta: Option<f64>, horizon: usize) -> Result<Self> {
        if horizon < 1 {
            return Err(Error::InvalidHorizon(horizon));
        }
        let eta_auto = eta.is_none();
        let eta = eta.unwrap_or_else(|| default_eta(horizon));
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::InvalidEta(eta));
        }
        let raw = matrix.scaled()?;
        let (d1, d2) = (raw.delta1(), raw.delta2());
        let (dd1, dd2) = (raw.little_delta1(), raw.little_delta2());
        if d1 == 0 && d2 == 0 && dd1 == 0 && dd2 == 0 {
            return Err(Error::ZeroGame);
        }
        let regime = Regime::classify(d1, d2, dd1, dd2);
        let orientation = orient(&matrix, regime, &raw);
        let canonical = apply(&matrix, orientation);
        let scaled = canonical.scaled()?;
        let deltas = Deltas {
            delta1: scaled.delta1(),
            delta2: scaled.delta2(),
            little_delta1: scaled.little_delta1(),
            little_delta2: scaled.little_delta2(),
        };
        let reach = (horizon as i128 + 1) * (deltas.delta1.unsigned_abs().max(deltas.delta2.unsigned_abs()) as i128);
        if reach >= STATE_LIMIT {
            return Err(Error::Overflow);
        }
        let game_value = match regime {
            Regime::NoDominant => {
                let e = canonical.entries();
                let den = e[0][0] + e[1][1] - e[0][1] - e[1][0];
                (e[0][0] * e[1][1] - e[0][1] * e[1][0]) / den
            }
            _ => matrix::minimax_value(&canonical),
        };
        Ok(GameSpec {
            user_matrix: matrix,
            canonical,
            losses: canonical.to_f64(),
            scaled,
            orientation,
            deltas,
            regime,
            eta,
            eta_scaled: eta / scaled.denominator as f64,
            eta_auto,
            horizon,
            game_value,
        })
    }

    /// Same game and learning rate with another horizon.
    pub fn with_horizon(&self, horizon: usize) -> Result<Self> {
        let eta = if self.eta_auto { None } else { Some(self.eta) };
        GameSpec::validate(self.user_matrix, eta, horizon)
    }

    pub fn user_matrix(&self) -> &LossMatrix {
        &self.user_matrix
    }

    pub fn canonical_matrix(&self) -> &LossMatrix {
        &self.canonical
    }

    pub fn scaled(&self) -> &ScaledMatrix {
        &self.scaled
    }

    pub fn scale(&self) -> i64 {
        self.scaled.denominator
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn deltas(&self) -> Deltas {
        self.deltas
    }

    pub fn delta1(&self) -> i64 {
        self.deltas.delta1
    }

    pub fn delta2(&self) -> i64 {
        self.deltas.delta2
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn eta_scaled(&self) -> f64 {
        self.eta_scaled
    }

    pub fn eta_is_auto(&self) -> bool {
        self.eta_auto
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn game_value(&self) -> Rational64 {
        self.game_value
    }

    pub fn game_value_f64(&self) -> f64 {
        *self.game_value.numer() as f64 / *self.game_value.denom() as f64
    }

    /// Loss entries of the canonical matrix in user units.
    pub fn losses(&self) -> &[[f64; 2]; 2] {
        &self.losses
    }

    pub fn require(&self, regime: Regime, expected: &'static str) -> Result<()> {
        if self.regime == regime {
            Ok(())
        } else {
            Err(Error::RegimeMismatch {
                expected,
                actual: self.regime,
            })
        }
    }

    fn require_no_dominant(&self) -> Result<()> {
        self.require(Regime::NoDominant, "NoDominant")
    }

    /// Value of node `(branch, time)`: `−(t−i)·Δ1 − (i−1)·Δ2`.
    pub fn node_value(&self, branch: usize, time: usize) -> i64 {
        debug_assert!(branch >= 1 && branch <= time);
        -((time - branch) as i64) * self.deltas.delta1 - (branch as i64 - 1) * self.deltas.delta2
    }

    pub fn node(&self, branch: usize, time: usize) -> State {
        State {
            value: self.node_value(branch, time),
            time,
            branch,
        }
    }

    /// Learner strategy for a scaled state value.
    pub fn strategy_at(&self, value: f64) -> MixedStrategy {
        logistic_pair(self.eta_scaled * value)
    }

    pub fn hedge_strategy(&self, s: &State) -> MixedStrategy {
        self.strategy_at(s.value as f64)
    }

    /// Expected payoff to Y, in user loss units, at a scaled state value.
    pub fn payoff_at(&self, value: f64, y: Action) -> f64 {
        self.payoff_with(self.strategy_at(value), y)
    }

    pub fn payoff_with(&self, x: MixedStrategy, y: Action) -> f64 {
        let c = y.index();
        x.p1 * self.losses[0][c] + x.p2 * self.losses[1][c]
    }

    pub fn payoff(&self, s: &State, y: Action) -> f64 {
        self.payoff_at(s.value as f64, y)
    }

    /// Value decrement caused by an action.
    pub fn step(&self, y: Action) -> i64 {
        match y {
            Action::L => self.deltas.delta1,
            Action::R => self.deltas.delta2,
        }
    }

    pub fn transition(&self, s: &State, y: Action) -> Result<State> {
        if s.time > self.horizon {
            return Err(Error::HorizonExceeded {
                time: s.time,
                horizon: self.horizon,
            });
        }
        Ok(State {
            value: s.value - self.step(y),
            time: s.time + 1,
            branch: s.branch + usize::from(y == Action::R),
        })
    }

    /// Myopic switching threshold in scaled units.
    pub fn s_star(&self) -> Result<f64> {
        self.require_no_dominant()?;
        Ok(self.raw_s_star())
    }

    /// `−ln(−δ1/δ2)/η̃`, defined whenever `δ1·δ2 < 0`.
    pub(crate) fn raw_s_star(&self) -> f64 {
        let (dd1, dd2) = (self.deltas.little_delta1, self.deltas.little_delta2);
        if dd1 == -dd2 {
            return 0.0;
        }
        -((-(dd1 as f64)) / dd2 as f64).ln() / self.eta_scaled
    }

    /// Coefficients `(f1, f2)` of `f(s) = f1·e^{ηs} + f2`.
    pub fn f_coefficients(&self) -> (f64, f64) {
        let eta = self.eta_scaled;
        let d1 = self.deltas.delta1 as f64;
        let d2 = self.deltas.delta2 as f64;
        // 1 - e^{ηΔ} via expm1 keeps precision when ηΔ is small.
        let one_minus_1 = -(eta * d1).exp_m1();
        let one_minus_2 = -(eta * d2).exp_m1();
        let f1 = d1 * one_minus_2 - d2 * one_minus_1;
        let f2 = d1 * one_minus_2 * (eta * d1).exp() - d2 * one_minus_1 * (eta * d2).exp();
        (f1, f2)
    }

    /// Sign of `f` matches the sign of `P_RL(s) − P_LR(s)`.
    pub fn f_value(&self, s: f64) -> f64 {
        let (f1, f2) = self.f_coefficients();
        f1 * (self.eta_scaled * s).exp() + f2
    }

    /// Zero of `f` in scaled units.
    pub fn s0_star(&self) -> Result<f64> {
        self.require_no_dominant()?;
        if self.deltas.delta1 == -self.deltas.delta2 {
            return Ok(0.0);
        }
        let (f1, f2) = self.f_coefficients();
        Ok((-f2 / f1).ln() / self.eta_scaled)
    }

    pub fn thresholds(&self) -> Result<(f64, f64)> {
        Ok((self.s_star()?, self.s0_star()?))
    }

    /// Two-step payoff of L then R from `s`.
    pub fn p_lr(&self, s: f64) -> f64 {
        self.payoff_at(s, Action::L) + self.payoff_at(s - self.deltas.delta1 as f64, Action::R)
    }

    /// Two-step payoff of R then L from `s`.
    pub fn p_rl(&self, s: f64) -> f64 {
        self.payoff_at(s, Action::R) + self.payoff_at(s - self.deltas.delta2 as f64, Action::L)
    }

    /// Period of the myopic and zero dynamics: `m/|Δ1| + m/|Δ2|`, `m = lcm`.
    pub fn t_star(&self) -> Result<usize> {
        self.require_no_dominant()?;
        Ok(t_star_of(self.deltas.delta1, self.deltas.delta2))
    }

    pub fn t_star_value(&self) -> Option<usize> {
        self.t_star().ok()
    }

    /// Short human-readable digest input; stable across runs.
    pub fn canonical_key(&self) -> String {
        format!(
            "{}|eta={:e}|T={}",
            self.user_matrix.to_text(),
            self.eta,
            self.horizon
        )
    }

    pub fn to_json(&self) -> GameSpecJson {
        GameSpecJson {
            matrix: self.user_matrix,
            eta: self.eta,
            eta_auto: self.eta_auto,
            t: self.horizon,
            regime: self.regime,
            delta: self.deltas,
            game_value: self.game_value,
            scale: self.scaled.denominator,
            orientation: self.orientation,
        }
    }
}

/// `m/|Δ1| + m/|Δ2|` with `m = lcm(|Δ1|, |Δ2|)`.
pub fn t_star_of(delta1: i64, delta2: i64) -> usize {
    let (p, q) = (delta1.unsigned_abs(), delta2.unsigned_abs());
    let m = p.lcm(&q);
    (m / p + m / q) as usize
}

/// `(1/(1+e^{−z}), e^{−z}/(1+e^{−z}))` without overflow.
pub fn logistic_pair(z: f64) -> MixedStrategy {
    if z > EXP_CLAMP {
        return MixedStrategy { p1: 1.0, p2: 0.0 };
    }
    if z < -EXP_CLAMP {
        return MixedStrategy { p1: 0.0, p2: 1.0 };
    }
    if z >= 0.0 {
        let e = (-z).exp();
        MixedStrategy {
            p1: 1.0 / (1.0 + e),
            p2: e / (1.0 + e),
        }
    } else {
        let e = z.exp();
        MixedStrategy {
            p1: e / (1.0 + e),
            p2: 1.0 / (1.0 + e),
        }
    }
}

/// JSON form of a validated game. Rationals travel as strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSpecJson {
    pub matrix: LossMatrix,
    pub eta: f64,
    /// The rate was derived from `T` rather than given.
    #[serde(default)]
    pub eta_auto: bool,
    #[serde(rename = "T")]
    pub t: usize,
    pub regime: Regime,
    pub delta: Deltas,
    #[serde(with = "matrix::rational_string")]
    pub game_value: Rational64,
    pub scale: i64,
    pub orientation: Orientation,
}

impl GameSpecJson {
    /// Re-validates; derived fields must agree with the recomputed ones.
    pub fn into_spec(self) -> Result<GameSpec> {
        let eta = if self.eta_auto { None } else { Some(self.eta) };
        let spec = GameSpec::validate(self.matrix, eta, self.t)?;
        if spec.eta.to_bits() != self.eta.to_bits() {
            return Err(Error::Format("learning rate does not match T".into()));
        }
        if spec.regime != self.regime
            || spec.deltas != self.delta
            || spec.game_value != self.game_value
            || spec.scale() != self.scale
            || spec.orientation != self.orientation
        {
            return Err(Error::Format(
                "derived fields do not match the matrix".into(),
            ));
        }
        Ok(spec)
    }
}

impl Serialize for GameSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for GameSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        GameSpecJson::deserialize(d)?
            .into_spec()
            .map_err(serde::de::Error::custom)
    }
}

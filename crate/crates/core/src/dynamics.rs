//! Simulation of the learner against arbitrary opponent policies, the
//! myopic and zero-threshold paths, and the number-theoretic helpers behind
//! their periodicity.

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{Action, GameSpec, MixedStrategy, Regime, State};

/// Aligned record of one play of the game, in canonical labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<State>,
    pub actions: Vec<Action>,
    pub strategies: Vec<MixedStrategy>,
    pub payoffs: Vec<f64>,
    /// Cumulative regrets `(R1, R2)` of the learner's two rows.
    pub regrets: Vec<(f64, f64)>,
}

impl Trajectory {
    /// Replays a fixed canonical action sequence.
    pub fn from_actions(spec: &GameSpec, actions: &[Action]) -> Result<Self> {
        let mut policy = Scripted::canonical(actions.to_vec());
        run(spec, &mut policy, actions.len(), false)
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn state_values(&self) -> Vec<i64> {
        self.states.iter().map(|s| s.value).collect()
    }

    pub fn total_payoff(&self) -> f64 {
        self.payoffs.iter().sum()
    }

    pub fn average_payoff(&self) -> f64 {
        if self.payoffs.is_empty() {
            0.0
        } else {
            self.total_payoff() / self.payoffs.len() as f64
        }
    }
}

/// Chooses Y's next action from the visible history. Actions are canonical.
pub trait OpponentPolicy {
    fn name(&self) -> String;

    /// `None` signals that the policy has nothing valid to play.
    fn act(&mut self, spec: &GameSpec, state: &State, history: &[Action]) -> Option<Action>;
}

/// Stage-greedy reply.
#[derive(Debug, Clone, Copy, Default)]
pub struct Myopic;

impl OpponentPolicy for Myopic {
    fn name(&self) -> String {
        "mbr".into()
    }

    fn act(&mut self, spec: &GameSpec, state: &State, _: &[Action]) -> Option<Action> {
        Some(myopic_action(spec, state.value))
    }
}

/// L iff the state is nonnegative.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroThreshold;

impl OpponentPolicy for ZeroThreshold {
    fn name(&self) -> String {
        "zero".into()
    }

    fn act(&mut self, _: &GameSpec, state: &State, _: &[Action]) -> Option<Action> {
        Some(zero_rule(state.value))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Constant(pub Action);

impl Constant {
    /// Constant policy named in the user's labels.
    pub fn user(spec: &GameSpec, action: Action) -> Self {
        Constant(spec.orientation().action_from_user(action))
    }
}

impl OpponentPolicy for Constant {
    fn name(&self) -> String {
        format!("const-{}", self.0)
    }

    fn act(&mut self, _: &GameSpec, _: &State, _: &[Action]) -> Option<Action> {
        Some(self.0)
    }
}

/// Samples Y's stage-game maximin strategy each round.
#[derive(Debug, Clone)]
pub struct StageNash {
    rng: ChaCha8Rng,
    seed: u64,
}

impl StageNash {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
        }
    }
}

/// Probability that Y's stage equilibrium plays L (canonical labels).
pub fn stage_nash_prob_l(spec: &GameSpec) -> f64 {
    let d = spec.deltas();
    if spec.regime() == Regime::NoDominant {
        let (p, q) = (d.delta1.unsigned_abs() as f64, d.delta2.unsigned_abs() as f64);
        q / (p + q)
    } else {
        // A saddle point exists: Y's maximin column.
        let a = spec.losses();
        let worst = |c: usize| a[0][c].min(a[1][c]);
        if worst(0) >= worst(1) {
            1.0
        } else {
            0.0
        }
    }
}

impl OpponentPolicy for StageNash {
    fn name(&self) -> String {
        format!("stage-nash(seed={})", self.seed)
    }

    fn act(&mut self, spec: &GameSpec, _: &State, _: &[Action]) -> Option<Action> {
        let p = stage_nash_prob_l(spec);
        Some(if self.rng.random_bool(p) { Action::L } else { Action::R })
    }
}

/// Plays a fixed list; faults when the list runs out.
#[derive(Debug, Clone)]
pub struct Scripted {
    actions: Vec<Action>,
}

impl Scripted {
    pub fn canonical(actions: Vec<Action>) -> Self {
        Self { actions }
    }

    /// Script written in the user's labels.
    pub fn user(spec: &GameSpec, actions: &[Action]) -> Self {
        let o = spec.orientation();
        Self {
            actions: actions.iter().map(|&a| o.action_from_user(a)).collect(),
        }
    }
}

impl OpponentPolicy for Scripted {
    fn name(&self) -> String {
        "script".into()
    }

    fn act(&mut self, _: &GameSpec, state: &State, _: &[Action]) -> Option<Action> {
        self.actions.get(state.time - 1).copied()
    }
}

fn run(
    spec: &GameSpec,
    policy: &mut dyn OpponentPolicy,
    steps: usize,
    check_horizon: bool,
) -> Result<Trajectory> {
    let a = spec.losses();
    let mut state = State::root();
    let mut states = Vec::with_capacity(steps + 1);
    let mut actions = Vec::with_capacity(steps);
    let mut strategies = Vec::with_capacity(steps + 1);
    let mut payoffs = Vec::with_capacity(steps);
    let mut regrets = Vec::with_capacity(steps + 1);
    let mut regret = (0.0, 0.0);
    for time in 1..=steps {
        let x = spec.hedge_strategy(&state);
        let y = policy.act(spec, &state, &actions).ok_or_else(|| Error::PolicyFault {
            policy: policy.name(),
            time,
        })?;
        let r = spec.payoff_with(x, y);
        states.push(state);
        strategies.push(x);
        payoffs.push(r);
        regrets.push(regret);
        regret.0 += r - a[0][y.index()];
        regret.1 += r - a[1][y.index()];
        actions.push(y);
        state = if check_horizon {
            spec.transition(&state, y)?
        } else {
            State {
                value: state.value - spec.step(y),
                time: state.time + 1,
                branch: state.branch + usize::from(y == Action::R),
            }
        };
    }
    strategies.push(spec.hedge_strategy(&state));
    states.push(state);
    regrets.push(regret);
    Ok(Trajectory {
        states,
        actions,
        strategies,
        payoffs,
        regrets,
    })
}

/// Plays `policy` for the full horizon.
pub fn simulate(spec: &GameSpec, policy: &mut dyn OpponentPolicy) -> Result<Trajectory> {
    run(spec, policy, spec.horizon(), true)
}

/// Myopic best response by direct payoff comparison; ties go to L.
pub fn myopic_action(spec: &GameSpec, value: i64) -> Action {
    if spec.regime() == Regime::NoDominant {
        return threshold_rule(value, spec.raw_s_star());
    }
    let s = value as f64;
    if spec.payoff_at(s, Action::R) > spec.payoff_at(s, Action::L) {
        Action::R
    } else {
        Action::L
    }
}

/// R iff `value < threshold`.
pub fn threshold_rule(value: i64, threshold: f64) -> Action {
    if (value as f64) < threshold {
        Action::R
    } else {
        Action::L
    }
}

pub fn zero_rule(value: i64) -> Action {
    if value >= 0 {
        Action::L
    } else {
        Action::R
    }
}

/// Threshold form of the myopic reply; defined only without dominant actions.
pub fn mbr(spec: &GameSpec, s: &State) -> Result<Action> {
    let threshold = spec.s_star()?;
    Ok(threshold_rule(s.value, threshold))
}

pub fn myopic_path(spec: &GameSpec) -> Result<Trajectory> {
    simulate(spec, &mut Myopic)
}

/// Threshold-0 trajectory over `length` steps; ignores the horizon.
pub fn zero_path(spec: &GameSpec, length: usize) -> Result<Trajectory> {
    spec.require(Regime::NoDominant, "NoDominant")?;
    run(spec, &mut ZeroThreshold, length, false)
}

/// Zero-path state at 1-based time `t`, in closed form: the unique node of
/// row `t` inside `[−|Δ1|, |Δ2|)`.
pub fn zero_state(delta1: i64, delta2: i64, t: usize) -> i64 {
    let (p, q) = (delta1.abs(), delta2.abs());
    let branch = zero_branch(delta1, delta2, t) as i64;
    -(t as i64 - branch) * p + (branch - 1) * q
}

/// Branch index of the zero-path node at time `t`.
pub fn zero_branch(delta1: i64, delta2: i64, t: usize) -> usize {
    let (p, q) = (delta1.abs(), delta2.abs());
    Integer::div_ceil(&(t as i64 * p + q - p), &(p + q)) as usize
}

/// Zero-path states for `t = 1..=n`.
pub fn zero_states(delta1: i64, delta2: i64, n: usize) -> Vec<i64> {
    (1..=n).map(|t| zero_state(delta1, delta2, t)).collect()
}

/// Period of both the myopic and zero dynamics.
pub fn t_star(spec: &GameSpec) -> Result<usize> {
    spec.t_star()
}

/// Times `t_0 < t_1 < …` at which the myopic path crosses the threshold
/// from below: `t_0` is the first `t` with `s_t < s*` and `s_{t+1} ≥ s*`,
/// later entries need `s_{t+1} > s*`.
pub fn upward_crossings(values: &[i64], threshold: f64) -> Vec<usize> {
    let mut out = Vec::new();
    for t in 0..values.len().saturating_sub(1) {
        let (a, b) = (values[t] as f64, values[t + 1] as f64);
        let crosses = if out.is_empty() {
            a < threshold && b >= threshold
        } else {
            a < threshold && b > threshold
        };
        if crosses {
            out.push(t + 1);
        }
    }
    out
}

/// Bound on the myopic pre-period: `⌈|s*|/|Δ1|⌉ + 2 + T*`.
pub fn preperiod_bound(spec: &GameSpec) -> Result<usize> {
    let s = spec.s_star()?;
    let p = spec.delta1().abs() as f64;
    Ok((s.abs() / p).ceil() as usize + 2 + spec.t_star()?)
}

/// `γ_{i+1} = γ_i + q + k_i·p`, with `k_i` keeping every term in `[λ−p, λ)`.
pub fn gamma_sequence(p: i64, q: i64, lambda: f64, gamma1: f64, n: usize) -> Result<Vec<f64>> {
    Ok(gamma_offsets(p, q, lambda, gamma1, n)?
        .into_iter()
        .map(|o| gamma1 + o as f64)
        .collect())
}

/// Integer offsets `γ_i − γ_1` of [`gamma_sequence`]; exact, so suitable for
/// period detection.
pub fn gamma_offsets(p: i64, q: i64, lambda: f64, gamma1: f64, n: usize) -> Result<Vec<i64>> {
    if !(0 < p && p < q) {
        return Err(Error::Domain(format!("need 0 < p < q, got p={p}, q={q}")));
    }
    if !(lambda - p as f64 <= gamma1 && gamma1 < lambda) {
        return Err(Error::Domain(format!(
            "gamma1={gamma1} outside [{}, {lambda})",
            lambda - p as f64
        )));
    }
    let mut out = Vec::with_capacity(n);
    let mut offset = 0i64;
    for _ in 0..n {
        out.push(offset);
        let moved = offset + q;
        // Largest k with γ1 + moved + k·p < λ.
        let room = (lambda - gamma1 - moved as f64) / p as f64;
        let mut k = room.ceil() as i64 - 1;
        while gamma1 + ((moved + (k + 1) * p) as f64) < lambda {
            k += 1;
        }
        while gamma1 + (moved + k * p) as f64 >= lambda {
            k -= 1;
        }
        offset = moved + k * p;
    }
    Ok(out)
}

/// Least period predicted for the γ-sequence: `lcm(p, q)/q`.
pub fn gamma_period(p: i64, q: i64) -> usize {
    (p.lcm(&q) / q) as usize
}

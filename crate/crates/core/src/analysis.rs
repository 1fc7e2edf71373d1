//! Falsifiable checks of the structural results over batches of games, plus
//! the dominant-action studies.
//!
//! Every check can be run against a deliberately broken [`Mutation`] of the
//! primitives; each one is expected to fail under at least one of them.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::dynamics::{self, gamma_offsets, gamma_period, zero_rule};
use crate::error::{Error, Result};
use crate::game::{action_string, Action, GameSpec, Regime, State};
use crate::matrix::LossMatrix;
use crate::period::detect_period;
use crate::planner::{compute_landmarks, required_horizon};
use crate::sttg::{extract_path, solve_cone, EdgeModel, OptimalSolution, SolverOptions, ValueTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Depth {
    Fast,
    Full,
}

impl FromStr for Depth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Depth::Fast),
            "full" => Ok(Depth::Full),
            other => Err(Error::Format(format!("unknown depth `{other}`"))),
        }
    }
}

/// Broken variants of the primitives, used to show that checks can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mutation {
    /// L moves subtract `Δ1 + 1`.
    Transition,
    /// Payoffs read the learner's rows in swapped order.
    Payoff,
    /// The two-step switching point is replaced by the myopic threshold.
    S0Star,
    /// The zero rule plays L only for strictly positive states.
    ZeroThreshold,
    /// The γ-recursion adds `q + 1`.
    Gamma,
}

impl Mutation {
    pub const ALL: [Mutation; 5] = [
        Mutation::Transition,
        Mutation::Payoff,
        Mutation::S0Star,
        Mutation::ZeroThreshold,
        Mutation::Gamma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mutation::Transition => "transition",
            Mutation::Payoff => "payoff",
            Mutation::S0Star => "s0-star",
            Mutation::ZeroThreshold => "zero-threshold",
            Mutation::Gamma => "gamma",
        }
    }
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mutation::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Format(format!("unknown mutation `{s}`")))
    }
}

pub mod check_ids {
    pub const F_SIGN: &str = "f_sign_structure";
    pub const S0_BOUNDS: &str = "s0_star_bounds";
    pub const ZERO_PATH: &str = "zero_path_properties";
    pub const THEOREM1: &str = "myopic_period";
    pub const CYCLE_COUNTS: &str = "myopic_cycle_counts";
    pub const THEOREM2: &str = "optimal_period";
    pub const RECURRENCE: &str = "recurrence_lemma";
    pub const COROLLARY: &str = "recurrence_corollary";
    pub const MONOTONE: &str = "row_monotone_split";
    pub const ROW_DETERMINATION: &str = "row_determination";
    pub const ZERO_ON_OPTIMAL: &str = "optimal_follows_zero_path";
    pub const BLOCK_VALUE: &str = "block_payoff_above_value";
    pub const S0_SPLIT: &str = "s0_star_action_split";
    pub const GAMMA: &str = "gamma_period";

    pub const ALL: [&str; 14] = [
        F_SIGN,
        S0_BOUNDS,
        ZERO_PATH,
        THEOREM1,
        CYCLE_COUNTS,
        THEOREM2,
        RECURRENCE,
        COROLLARY,
        MONOTONE,
        ROW_DETERMINATION,
        ZERO_ON_OPTIMAL,
        BLOCK_VALUE,
        S0_SPLIT,
        GAMMA,
    ];
}

/// The mutant documented to break each check.
pub fn documented_mutant(check_id: &str) -> Option<Mutation> {
    use check_ids::*;
    Some(match check_id {
        F_SIGN => Mutation::Payoff,
        S0_BOUNDS => Mutation::S0Star,
        ZERO_PATH => Mutation::ZeroThreshold,
        THEOREM1 => Mutation::Transition,
        CYCLE_COUNTS => Mutation::Transition,
        THEOREM2 => Mutation::Transition,
        RECURRENCE => Mutation::S0Star,
        COROLLARY => Mutation::Transition,
        MONOTONE => Mutation::Payoff,
        ROW_DETERMINATION => Mutation::Payoff,
        ZERO_ON_OPTIMAL => Mutation::Payoff,
        BLOCK_VALUE => Mutation::Payoff,
        S0_SPLIT => Mutation::S0Star,
        GAMMA => Mutation::Gamma,
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check_id: String,
    pub spec_digest: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Value>,
}

impl CheckResult {
    fn new(check_id: &str, digest: &str, witness: Option<Value>) -> Self {
        Self {
            check_id: check_id.to_string(),
            spec_digest: digest.to_string(),
            passed: witness.is_none(),
            witness,
        }
    }
}

/// Short stable identifier of a game and horizon.
pub fn spec_digest(spec: &GameSpec) -> String {
    let hash = Sha256::digest(spec.canonical_key().as_bytes());
    hex::encode(&hash[..8])
}

/// Seeded sample of integer games with entries in `[-9, 9]`, rejection
/// sampled into `regime`.
pub fn sample_specs(seed: u64, count: usize, regime: Regime, horizon: usize) -> Vec<GameSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut a = [[0i64; 2]; 2];
        for row in a.iter_mut() {
            for x in row.iter_mut() {
                *x = rng.random_range(-9..=9);
            }
        }
        if let Ok(spec) = GameSpec::validate(LossMatrix::from_integers(a), None, horizon) {
            if spec.regime() == regime {
                out.push(spec);
            }
        }
    }
    out
}

/// The game's primitives with an optional mutation applied.
struct Model<'a> {
    spec: &'a GameSpec,
    mutation: Option<Mutation>,
}

impl Model<'_> {
    fn is(&self, m: Mutation) -> bool {
        self.mutation == Some(m)
    }

    fn payoff(&self, value: f64, y: Action) -> f64 {
        if self.is(Mutation::Payoff) {
            let x = self.spec.strategy_at(value);
            let a = self.spec.losses();
            x.p1 * a[1][y.index()] + x.p2 * a[0][y.index()]
        } else {
            self.spec.payoff_at(value, y)
        }
    }

    fn s0_star(&self) -> f64 {
        if self.is(Mutation::S0Star) {
            self.spec.raw_s_star()
        } else {
            self.spec.s0_star().expect("checked regime")
        }
    }

    fn zero_action(&self, value: i64) -> Action {
        if self.is(Mutation::ZeroThreshold) {
            if value > 0 {
                Action::L
            } else {
                Action::R
            }
        } else {
            zero_rule(value)
        }
    }

    /// Zero-path nodes for `t = 1..=n`.
    fn zero_path(&self, n: usize) -> Vec<State> {
        let mut s = State::root();
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            out.push(s);
            let y = self.zero_action(s.value);
            s = State {
                value: s.value - EdgeModel::step(self, y),
                time: s.time + 1,
                branch: s.branch + usize::from(y == Action::R),
            };
        }
        out
    }

    fn p_lr(&self, s: f64) -> f64 {
        self.payoff(s, Action::L) + self.payoff(s - EdgeModel::step(self, Action::L) as f64, Action::R)
    }

    fn p_rl(&self, s: f64) -> f64 {
        self.payoff(s, Action::R) + self.payoff(s - EdgeModel::step(self, Action::R) as f64, Action::L)
    }
}

impl EdgeModel for Model<'_> {
    fn horizon(&self) -> usize {
        self.spec.horizon()
    }

    fn step(&self, y: Action) -> i64 {
        let base = self.spec.step(y);
        if self.is(Mutation::Transition) && y == Action::L {
            base + 1
        } else {
            base
        }
    }

    fn edge_payoff(&self, value: i64, _time: usize, y: Action) -> f64 {
        self.payoff(value as f64, y)
    }
}

/// Horizon used for table-based checks at the given depth.
pub fn check_horizon(spec: &GameSpec, depth: Depth) -> Result<usize> {
    let t_star = spec.t_star()?;
    let base = match depth {
        Depth::Fast => 30 * t_star,
        Depth::Full => (60 * t_star).max(spec.horizon()).min(5000),
    };
    // The default rate shrinks with T, so recheck the landmark requirement.
    let mut horizon = base.max(4 * t_star + 8);
    for _ in 0..8 {
        let g = spec.with_horizon(horizon)?;
        if horizon >= required_horizon(&g)? + 2 * t_star && compute_landmarks(&g).is_ok() {
            return Ok(horizon);
        }
        horizon *= 2;
    }
    Err(Error::HorizonTooShort {
        horizon,
        required: horizon + 1,
    })
}

struct Context<'a> {
    spec: &'a GameSpec,
    model: Model<'a>,
    digest: String,
    table: ValueTable,
    path: OptimalSolution,
    t_star: usize,
    t_d: usize,
}

fn check_f_sign(model: &Model, spec: &GameSpec) -> Option<Value> {
    let (d1, d2) = (spec.delta1(), spec.delta2());
    let span = 3 * (d1 - d2);
    let mut prev = f64::INFINITY;
    for s in -span..=span {
        let sf = s as f64;
        let f = spec.f_value(sf);
        if f >= prev {
            return Some(json!({"reason": "f not decreasing", "s": s, "f": f, "prev": prev}));
        }
        prev = f;
        let diff = model.p_rl(sf) - model.p_lr(sf);
        let scale = 1e-9 * (1.0 + diff.abs());
        if f.abs() > 1e-12 && diff.abs() > scale && (diff > 0.0) != (f > 0.0) {
            return Some(json!({"reason": "sign mismatch", "s": s, "f": f, "p_rl_minus_p_lr": diff}));
        }
    }
    let mid = (d1 + d2) as f64 / 2.0;
    if d1 != -d2 {
        let (f_mid, f_zero) = (spec.f_value(mid), spec.f_value(0.0));
        if !(f_mid > 0.0 && f_zero < 0.0) {
            return Some(json!({"reason": "endpoint signs", "f_mid": f_mid, "f_zero": f_zero}));
        }
        // Lemma endpoints, checked on the two-step payoffs directly.
        let below = model.p_rl(mid - 0.5) - model.p_lr(mid - 0.5);
        let above = model.p_rl(0.5) - model.p_lr(0.5);
        if !(below > 0.0 && above < 0.0) {
            return Some(json!({"reason": "two-step comparison", "below": below, "above": above}));
        }
    }
    None
}

fn check_s0_bounds(model: &Model, spec: &GameSpec) -> Option<Value> {
    let s0 = model.s0_star();
    let (d1, d2) = (spec.delta1(), spec.delta2());
    let mid = (d1 + d2) as f64 / 2.0;
    let ok = if d1 == -d2 {
        s0 == 0.0
    } else {
        mid < s0 && s0 < 0.0
    };
    (!ok).then(|| json!({"s0_star": s0, "lower": mid, "upper": 0}))
}

fn check_zero_path(model: &Model, spec: &GameSpec, t_star: usize) -> Option<Value> {
    let (p, q) = (spec.delta1().abs(), spec.delta2().abs());
    let n = 3 * t_star + 1;
    let path = model.zero_path(n + 1);
    let values: Vec<i64> = path.iter().map(|s| s.value).collect();
    // (i) periodic from t = 1 with least period T*.
    match detect_period(&values[..n]) {
        Ok(r) if r.preperiod == 0 && r.period == t_star => {}
        Ok(r) => {
            return Some(json!({"property": "i", "preperiod": r.preperiod, "period": r.period, "expected": t_star}))
        }
        Err(e) => return Some(json!({"property": "i", "error": e.to_string()})),
    }
    for t in 0..n {
        // (ii) no two consecutive negatives.
        if t > 0 && values[t] < 0 && values[t - 1] < 0 {
            return Some(json!({"property": "ii", "t": t + 1}));
        }
        // (iii) band.
        if !(-p <= values[t] && values[t] < q) {
            return Some(json!({"property": "iii", "t": t + 1, "value": values[t]}));
        }
        // (iv) successor rule on the lattice row.
        let time = t + 1;
        for i in 1..time {
            let (a, b) = (spec.node_value(i, time), spec.node_value(i + 1, time));
            if a < 0 && b >= 0 && values[t + 1] != spec.node_value(i + 1, time + 1) {
                return Some(json!({"property": "iv", "t": time, "i": i, "next": values[t + 1]}));
            }
        }
    }
    None
}

fn check_theorem1(model: &Model, spec: &GameSpec, t_star: usize, horizon: usize) -> (Option<Value>, Option<Value>) {
    let g = spec.with_horizon(horizon.max(40 * t_star)).expect("valid horizon");
    let threshold = g.raw_s_star();
    let mut s = 0i64;
    let mut values = Vec::with_capacity(g.horizon() + 1);
    let mut actions = Vec::with_capacity(g.horizon());
    for _ in 0..g.horizon() {
        values.push(s);
        let y = dynamics::threshold_rule(s, threshold);
        actions.push(y);
        s -= EdgeModel::step(model, y);
    }
    values.push(s);
    let bound = dynamics::preperiod_bound(&g).expect("checked regime");
    let report = detect_period(&values);
    let period = match &report {
        Ok(r) if r.period == t_star && r.start_time <= bound && r.certified => None,
        Ok(r) => Some(json!({"period": r.period, "expected": t_star, "start_time": r.start_time, "bound": bound})),
        Err(e) => Some(json!({"error": e.to_string()})),
    };
    let (p, q) = (spec.delta1().unsigned_abs(), spec.delta2().unsigned_abs());
    let m = p.lcm(&q);
    let counts = match &report {
        Ok(r) if r.preperiod + t_star <= actions.len() => {
            let cycle = &actions[r.preperiod..r.preperiod + t_star];
            let r_count = cycle.iter().filter(|&&a| a == Action::R).count() as u64;
            let l_count = t_star as u64 - r_count;
            (l_count != m / p || r_count != m / q).then(|| {
                json!({"start_time": r.start_time, "L": l_count, "R": r_count, "expected_L": m / p, "expected_R": m / q})
            })
        }
        Ok(r) => Some(json!({"reason": "cycle runs past the horizon", "start_time": r.start_time})),
        Err(e) => Some(json!({"error": e.to_string()})),
    };
    (period, counts)
}

fn check_theorem2(ctx: &Context) -> Option<Value> {
    let slice = &ctx.path.actions[1..ctx.t_d - 1];
    match detect_period(slice) {
        Ok(r) if r.preperiod == 0 && r.period == ctx.t_star => None,
        Ok(r) => Some(json!({
            "window": [2, ctx.t_d - 1],
            "preperiod": r.preperiod,
            "period": r.period,
            "expected": ctx.t_star,
        })),
        Err(e) => Some(json!({"error": e.to_string()})),
    }
}

fn check_table(ctx: &Context) -> (Option<Value>, Option<Value>, Option<Value>) {
    let table = &ctx.table;
    let horizon = table.horizon();
    let s0 = ctx.model.s0_star();
    let q = ctx.spec.delta2().abs() as f64;
    let mut lemma = None;
    let mut corollary = None;
    let mut monotone = None;
    for t in 1..horizon {
        for i in 1..=t {
            let s = table.node_value(i, t) as f64;
            let y = table.action(i, t);
            let below = table.action(i, t + 1);
            let right = table.action(i + 1, t + 1);
            if lemma.is_none()
                && ((s < s0 && below == Action::R && y != Action::R)
                    || (s >= s0 && right == Action::L && y != Action::L))
            {
                lemma = Some(json!({"t": t, "i": i, "s": s, "s0_star": s0}));
            }
            if corollary.is_none()
                && ((s < -q && below == Action::R && y != Action::R)
                    || (s > 0.0 && right == Action::L && y != Action::L))
            {
                corollary = Some(json!({"t": t, "i": i, "s": s}));
            }
        }
    }
    for t in 1..=horizon {
        let row = table.row_actions(t);
        if let Some(i) = row.windows(2).position(|w| w[0] == Action::L && w[1] == Action::R) {
            monotone = Some(json!({"t": t, "i": i + 1, "row": action_string(&row)}));
            break;
        }
    }
    (lemma, corollary, monotone)
}

/// Rows before `t_d` are determined everywhere except next to the zero path.
fn check_row_determination(ctx: &Context) -> Option<Value> {
    let zero = ctx.model.zero_path(ctx.t_d);
    for t in 1..ctx.t_d {
        let z = zero[t - 1];
        let i0 = z.branch;
        let row = ctx.table.row_actions(t);
        let last_row = t == ctx.t_d - 1;
        for (idx, &y) in row.iter().enumerate() {
            let i = idx + 1;
            let expect = if last_row {
                Some(if i < i0 { Action::R } else { Action::L })
            } else if z.value >= 0 {
                if i >= i0 {
                    Some(Action::L)
                } else if i + 2 <= i0 {
                    Some(Action::R)
                } else {
                    None
                }
            } else if i > i0 {
                Some(Action::L)
            } else if i < i0 {
                Some(Action::R)
            } else {
                None
            };
            if expect.is_some_and(|e| e != y) {
                return Some(json!({"t": t, "i": i, "i0": i0, "zero_state": z.value, "action": y.as_char().to_string()}));
            }
        }
    }
    None
}

fn check_zero_on_optimal(ctx: &Context) -> Option<Value> {
    let zero = ctx.model.zero_path(ctx.t_d);
    for t in 2..=ctx.t_d {
        let z = zero[t - 1].value;
        if z < 0 && ctx.path.states[t - 1].value != z {
            return Some(json!({"t": t, "zero_state": z, "optimal_state": ctx.path.states[t - 1].value}));
        }
    }
    None
}

fn check_block_value(ctx: &Context) -> Option<Value> {
    let (p, q) = (ctx.spec.delta1().unsigned_abs(), ctx.spec.delta2().unsigned_abs());
    let m = p.lcm(&q);
    let block = &ctx.path.actions[1..1 + ctx.t_star];
    let r = block.iter().filter(|&&a| a == Action::R).count() as u64;
    let l = ctx.t_star as u64 - r;
    let avg = ctx.path.window_average(2, ctx.t_star);
    let v = ctx.spec.game_value_f64();
    (!(avg > v && l == m / p && r == m / q)).then(|| json!({"average": avg, "game_value": v, "L": l, "R": r}))
}

fn check_s0_split(ctx: &Context) -> Option<Value> {
    let s0 = ctx.model.s0_star();
    for t in 1..ctx.t_d {
        let s = ctx.path.states[t - 1].value as f64;
        let y = ctx.path.actions[t - 1];
        if (y == Action::L) != (s >= s0) {
            return Some(json!({"t": t, "s": s, "s0_star": s0, "action": y.as_char().to_string()}));
        }
    }
    None
}

fn check_gamma(model: &Model, spec: &GameSpec) -> Option<Value> {
    let (p, q) = (spec.delta1().abs(), spec.delta2().abs());
    if p >= q {
        // The recursion needs 0 < p < q; with p = q it is constant.
        return None;
    }
    let shift = i64::from(model.is(Mutation::Gamma));
    let lambda = spec.raw_s_star();
    let gamma1 = lambda - p as f64 / 2.0;
    let expected = gamma_period(p, q);
    let n = 4 * expected + 4;
    let offsets = match gamma_offsets(p, q + shift, lambda, gamma1, n) {
        Ok(o) => o,
        Err(e) => return Some(json!({"error": e.to_string()})),
    };
    match detect_period(&offsets) {
        Ok(r) if r.preperiod == 0 && r.period == expected => None,
        Ok(r) => Some(json!({"period": r.period, "expected": expected})),
        Err(e) => Some(json!({"error": e.to_string()})),
    }
}

fn run_one(spec: &GameSpec, depth: Depth, mutation: Option<Mutation>) -> Vec<CheckResult> {
    use check_ids::*;
    let fail_all = |digest: &str, e: Error| -> Vec<CheckResult> {
        ALL.iter()
            .map(|id| CheckResult::new(id, digest, Some(json!({"error": e.to_string()}))))
            .collect()
    };
    let horizon = match check_horizon(spec, depth) {
        Ok(h) => h,
        Err(e) => return fail_all(&spec_digest(spec), e),
    };
    let g = match spec.with_horizon(horizon) {
        Ok(g) => g,
        Err(e) => return fail_all(&spec_digest(spec), e),
    };
    let digest = spec_digest(&g);
    let model = Model {
        spec: &g,
        mutation,
    };
    let t_star = g.t_star().expect("checked regime");
    let mut out = vec![
        CheckResult::new(F_SIGN, &digest, check_f_sign(&model, &g)),
        CheckResult::new(S0_BOUNDS, &digest, check_s0_bounds(&model, &g)),
        CheckResult::new(ZERO_PATH, &digest, check_zero_path(&model, &g, t_star)),
        CheckResult::new(GAMMA, &digest, check_gamma(&model, &g)),
    ];
    let (period, counts) = check_theorem1(&model, &g, t_star, horizon);
    out.push(CheckResult::new(THEOREM1, &digest, period));
    out.push(CheckResult::new(CYCLE_COUNTS, &digest, counts));

    let table = match solve_cone(&model, State::root(), SolverOptions::default()) {
        Ok(t) => t,
        Err(e) => {
            out.extend(
                [THEOREM2, RECURRENCE, COROLLARY, MONOTONE, ROW_DETERMINATION, ZERO_ON_OPTIMAL, BLOCK_VALUE, S0_SPLIT]
                    .iter()
                    .map(|id| CheckResult::new(id, &digest, Some(json!({"error": e.to_string()})))),
            );
            return out;
        }
    };
    let path = extract_path(&table, &model);
    let t_d = compute_landmarks(&g).expect("horizon chosen to admit landmarks").t_d;
    let ctx = Context {
        spec: &g,
        model,
        digest: digest.clone(),
        table,
        path,
        t_star,
        t_d,
    };
    let (lemma, corollary, monotone) = check_table(&ctx);
    out.push(CheckResult::new(THEOREM2, &ctx.digest, check_theorem2(&ctx)));
    out.push(CheckResult::new(RECURRENCE, &ctx.digest, lemma));
    out.push(CheckResult::new(COROLLARY, &ctx.digest, corollary));
    out.push(CheckResult::new(MONOTONE, &ctx.digest, monotone));
    out.push(CheckResult::new(ROW_DETERMINATION, &ctx.digest, check_row_determination(&ctx)));
    out.push(CheckResult::new(ZERO_ON_OPTIMAL, &ctx.digest, check_zero_on_optimal(&ctx)));
    out.push(CheckResult::new(BLOCK_VALUE, &ctx.digest, check_block_value(&ctx)));
    out.push(CheckResult::new(S0_SPLIT, &ctx.digest, check_s0_split(&ctx)));
    out
}

/// Runs every check on every game. Games outside the no-dominant regime are
/// reported as failures of every check. Results are sorted by
/// `(check_id, spec_digest)`.
pub fn run_suite(specs: &[GameSpec], depth: Depth, mutation: Option<Mutation>) -> Vec<CheckResult> {
    let mut results: Vec<CheckResult> = specs
        .par_iter()
        .flat_map_iter(|spec| {
            if spec.regime() != Regime::NoDominant {
                let digest = spec_digest(spec);
                let e = Error::RegimeMismatch {
                    expected: "NoDominant",
                    actual: spec.regime(),
                };
                return check_ids::ALL
                    .iter()
                    .map(|id| CheckResult::new(id, &digest, Some(json!({"error": e.to_string()}))))
                    .collect::<Vec<_>>();
            }
            run_one(spec, depth, mutation)
        })
        .collect();
    results.sort_by(|a, b| (&a.check_id, &a.spec_digest).cmp(&(&b.check_id, &b.spec_digest)));
    results
}

/// Per-check pass/fail counts, in check order.
pub fn summarize(results: &[CheckResult]) -> Vec<(String, usize, usize)> {
    check_ids::ALL
        .iter()
        .map(|id| {
            let rows = results.iter().filter(|r| r.check_id == *id);
            let (pass, fail) = rows.fold((0, 0), |(p, f), r| if r.passed { (p + 1, f) } else { (p, f + 1) });
            (id.to_string(), pass, fail)
        })
        .filter(|(_, p, f)| p + f > 0)
        .collect()
}

/// First time from which the optimal play is constant R, for a game where
/// the learner has a dominant row.
pub fn dominant_x_tail(spec: &GameSpec) -> Result<usize> {
    spec.require(Regime::XDominant, "XDominant")?;
    let d = spec.deltas();
    if (d.little_delta1 as i128) * (d.little_delta2 as i128) > 0 {
        // Y has a dominant action too; it is R after orientation.
        return Ok(1);
    }
    let dp = crate::sttg::solve_dp(spec, crate::sttg::DEFAULT_DP_CAP)?;
    let last_l = dp.actions.iter().rposition(|&a| a == Action::L);
    match last_l {
        None => Ok(1),
        Some(i) if i + 1 < dp.actions.len() => Ok(i + 2),
        Some(_) => Err(Error::Domain("optimal play does not end with R".into())),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YDominantReport {
    /// Y's dominant action, in the user's labels.
    pub dominant_action: Action,
    pub constant_is_optimal: bool,
    pub dp_total: f64,
    pub constant_total: f64,
    /// 1-based times at which the optimum plays the dominated action.
    pub deviations: Vec<usize>,
    /// Optimal actions in the user's labels.
    pub actions: String,
    /// Learner's probability of its first (user) row at each time.
    pub x1: Vec<f64>,
}

pub fn y_dominant_study(spec: &GameSpec) -> Result<YDominantReport> {
    spec.require(Regime::YDominant, "YDominant")?;
    let d = spec.deltas();
    // δ1 < 0 means column R costs X more in row U, hence dominates for Y.
    let dominant = if d.little_delta1 < 0 { Action::R } else { Action::L };
    let dp = crate::sttg::solve_dp(spec, crate::sttg::DEFAULT_DP_CAP)?;
    let constant = OptimalSolution::from_actions(
        spec,
        State::root(),
        vec![dominant; spec.horizon()],
        crate::sttg::Method::Dp,
    );
    let o = spec.orientation();
    let deviations = dp
        .actions
        .iter()
        .enumerate()
        .filter(|(_, &a)| a != dominant)
        .map(|(i, _)| i + 1)
        .collect::<Vec<_>>();
    let user_actions: Vec<Action> = dp.actions.iter().map(|&a| o.action_to_user(a)).collect();
    let x1 = dp
        .states
        .iter()
        .take(spec.horizon())
        .map(|s| o.strategy_to_user(spec.hedge_strategy(s)).p1)
        .collect();
    Ok(YDominantReport {
        dominant_action: o.action_to_user(dominant),
        constant_is_optimal: deviations.is_empty(),
        dp_total: dp.total,
        constant_total: constant.total,
        deviations,
        actions: action_string(&user_actions),
        x1,
    })
}

//! Fast construction of the optimal play: one optimal block repeated along
//! the zero path, followed by a short exact tail.

use serde::{Deserialize, Serialize};

use crate::dynamics::{zero_branch, zero_state};
use crate::error::{Error, Result};
use crate::game::{action_string, parse_actions, Action, GameSpec, Orientation, Regime, State};
use crate::sttg::{
    extract_path, local_longest_path_unbounded, solve_cone, solve_dp, Method, OptimalSolution,
    SolverOptions, DEFAULT_DP_CAP,
};

/// Times and states that split the horizon into a periodic body and a tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Landmarks {
    pub s_star: f64,
    /// Branch of the last row-`T` node below `s*`.
    pub j_star: usize,
    pub j_star_state: i64,
    /// Where the backward ray from `(j*, T)` meets the zero path.
    pub t_cross: usize,
    /// Last time before `t_cross` at which the zero path is negative.
    pub t_d: usize,
    /// The closed-form choice `T − T* − ⌈s*/|Δ2|⌉`, moved down to the nearest
    /// negative zero-path time.
    pub t_d_closed_form: usize,
    /// The ray ran along L moves because `s_{j*,T}` lies below the zero band.
    pub reflected: bool,
}

/// Minimal horizon for which the construction is attempted.
pub fn required_horizon(spec: &GameSpec) -> Result<usize> {
    let t_star = spec.t_star()?;
    let s = spec.s_star()?;
    let q = spec.delta2().abs() as f64;
    Ok(2 * t_star + (s.max(0.0) / q).ceil() as usize + 4)
}

/// Largest `t ≤ bound`, `t ≥ 2`, with a negative zero-path state.
fn last_negative_zero(spec: &GameSpec, bound: usize) -> Option<usize> {
    let (d1, d2) = (spec.delta1(), spec.delta2());
    (2..=bound).rev().find(|&t| zero_state(d1, d2, t) < 0)
}

pub fn compute_landmarks(spec: &GameSpec) -> Result<Landmarks> {
    spec.require(Regime::NoDominant, "NoDominant")?;
    let horizon = spec.horizon();
    let required = required_horizon(spec)?;
    if horizon < required {
        return Err(Error::HorizonTooShort { horizon, required });
    }
    let s_star = spec.s_star()?;
    let p = spec.delta1();
    let q = -spec.delta2();
    let t_star = spec.t_star()?;

    // Row-T values increase with the branch by p + q.
    let guess = ((s_star + (horizon as i64 * p + q) as f64) / (p + q) as f64).ceil() as i64 - 1;
    let mut j = guess.clamp(0, horizon as i64) as usize;
    while j < horizon && (spec.node_value(j + 1, horizon) as f64) < s_star {
        j += 1;
    }
    while j > 0 && (spec.node_value(j, horizon) as f64) >= s_star {
        j -= 1;
    }
    if j == 0 || j == horizon {
        return Err(Error::HorizonTooShort {
            horizon,
            required: horizon + 1,
        });
    }
    let sj = spec.node_value(j, horizon);
    let (steps_back, reflected) = if sj >= -p {
        // Walk back along R moves until the value drops below q.
        (if sj < q { 0 } else { (sj - q) / q + 1 }, false)
    } else {
        // Walk back along L moves until the value reaches -p.
        ((-p - sj + p - 1) / p, true)
    };
    let steps_back = steps_back as usize;
    if steps_back + 3 > horizon {
        return Err(Error::HorizonTooShort {
            horizon,
            required: required.max(steps_back + 3),
        });
    }
    let t_cross = horizon - steps_back;
    let t_d = last_negative_zero(spec, t_cross - 1).ok_or(Error::HorizonTooShort { horizon, required })?;
    let closed_bound = horizon
        .saturating_sub(t_star)
        .saturating_sub((s_star.max(0.0) / q as f64).ceil() as usize);
    let t_d_closed_form = last_negative_zero(spec, closed_bound).unwrap_or(2);
    Ok(Landmarks {
        s_star,
        j_star: j,
        j_star_state: sj,
        t_cross,
        t_d,
        t_d_closed_form,
        reflected,
    })
}

/// Optimal play in compressed form (canonical labels).
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicPlan {
    pub horizon: usize,
    pub prefix: Vec<Action>,
    pub block: Vec<Action>,
    pub repetitions: usize,
    pub tail: Vec<Action>,
    pub t_d: usize,
    pub t_cross: usize,
    pub j_star_state: i64,
}

impl PeriodicPlan {
    /// Actions covering `t = 2 .. t_d−1`: whole blocks then a block prefix.
    fn body_len(&self) -> usize {
        self.t_d - 1 - self.prefix.len()
    }

    pub fn leftover(&self) -> usize {
        self.body_len() - self.repetitions * self.block.len()
    }

    pub fn expand(&self) -> Vec<Action> {
        let mut out = Vec::with_capacity(self.horizon);
        out.extend_from_slice(&self.prefix);
        for _ in 0..self.repetitions {
            out.extend_from_slice(&self.block);
        }
        out.extend_from_slice(&self.block[..self.leftover()]);
        out.extend_from_slice(&self.tail);
        out
    }

    pub fn to_solution(&self, spec: &GameSpec) -> OptimalSolution {
        OptimalSolution::from_actions(spec, State::root(), self.expand(), Method::Periodic)
    }

    pub fn to_json(&self, orientation: Orientation) -> PlanJson {
        let user = |a: &[Action]| {
            action_string(&a.iter().map(|&y| orientation.action_to_user(y)).collect::<Vec<_>>())
        };
        PlanJson {
            t: self.horizon,
            t_d: self.t_d,
            t_cross: self.t_cross,
            j_star_state: orientation.state_to_user(self.j_star_state),
            prefix: user(&self.prefix),
            block: user(&self.block),
            repetitions: self.repetitions,
            tail: user(&self.tail),
        }
    }
}

/// Serialized plan in the user's labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanJson {
    #[serde(rename = "T")]
    pub t: usize,
    pub t_d: usize,
    pub t_cross: usize,
    pub j_star_state: i64,
    pub prefix: String,
    pub block: String,
    pub repetitions: usize,
    pub tail: String,
}

impl PlanJson {
    pub fn into_plan(self, orientation: Orientation) -> Result<PeriodicPlan> {
        let canon = |s: &str| -> Result<Vec<Action>> {
            Ok(parse_actions(s)?
                .into_iter()
                .map(|a| orientation.action_from_user(a))
                .collect())
        };
        let plan = PeriodicPlan {
            horizon: self.t,
            prefix: canon(&self.prefix)?,
            block: canon(&self.block)?,
            repetitions: self.repetitions,
            tail: canon(&self.tail)?,
            t_d: self.t_d,
            t_cross: self.t_cross,
            j_star_state: orientation.state_to_user(self.j_star_state),
        };
        let consistent = plan.t_d > plan.prefix.len()
            && !plan.block.is_empty()
            && plan.body_len() >= plan.repetitions * plan.block.len()
            && plan.leftover() <= plan.block.len()
            && plan.prefix.len() + plan.body_len() + plan.tail.len() == plan.horizon;
        if !consistent {
            return Err(Error::Format("plan lengths do not add up to T".into()));
        }
        Ok(plan)
    }
}

pub fn build_periodic_plan(spec: &GameSpec) -> Result<PeriodicPlan> {
    let lm = compute_landmarks(spec)?;
    let (d1, d2) = (spec.delta1(), spec.delta2());
    let t_star = spec.t_star()?;
    let horizon = spec.horizon();

    // From s = 0 the optimal path reaches the zero-path node -|Δ1| at t = 2.
    let prefix = vec![Action::L];
    let anchor = State {
        value: -d1,
        time: 2,
        branch: 1,
    };
    let block = local_longest_path_unbounded(spec, anchor, -d1, 2 + t_star)?.actions;
    let body = lm.t_d - 2;
    let repetitions = body / t_star;

    let apex = State {
        value: zero_state(d1, d2, lm.t_d),
        time: lm.t_d,
        branch: zero_branch(d1, d2, lm.t_d),
    };
    let cone = solve_cone(
        spec,
        apex,
        SolverOptions {
            cap: DEFAULT_DP_CAP.max(horizon),
            keep_values: false,
        },
    )?;
    let tail = extract_path(&cone, spec).actions;
    Ok(PeriodicPlan {
        horizon,
        prefix,
        block,
        repetitions,
        tail,
        t_d: lm.t_d,
        t_cross: lm.t_cross,
        j_star_state: lm.j_star_state,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub applicable: bool,
    pub message: String,
    pub dp_total: f64,
    pub plan_total: Option<f64>,
    pub value_difference: Option<f64>,
    /// 1-based time of the first differing action.
    pub first_divergence: Option<usize>,
    pub dp_actions: String,
    pub plan_actions: Option<String>,
}

impl VerifyReport {
    /// Plan and DP agree in value (within `1e-9·T`) and in every action.
    pub fn agrees(&self) -> bool {
        let tol = 1e-9 * self.dp_actions.len() as f64;
        self.applicable
            && self.first_divergence.is_none()
            && self.value_difference.is_some_and(|d| d <= tol)
    }
}

/// Compares the periodic plan with full backward induction.
pub fn verify_against_dp(spec: &GameSpec, cap: usize) -> Result<VerifyReport> {
    let dp = solve_dp(spec, cap)?;
    let o = spec.orientation();
    let user = |a: &[Action]| action_string(&a.iter().map(|&y| o.action_to_user(y)).collect::<Vec<_>>());
    let dp_actions = user(&dp.actions);
    let not_applicable = |message: String| VerifyReport {
        applicable: false,
        message,
        dp_total: dp.total,
        plan_total: None,
        value_difference: None,
        first_divergence: None,
        dp_actions: dp_actions.clone(),
        plan_actions: None,
    };
    if spec.regime() != Regime::NoDominant {
        return Ok(not_applicable("periodic planner not applicable".into()));
    }
    let plan = match build_periodic_plan(spec) {
        Ok(plan) => plan,
        Err(e @ Error::HorizonTooShort { .. }) => {
            return Ok(not_applicable(format!("periodic planner not applicable: {e}")))
        }
        Err(e) => return Err(e),
    };
    let sol = plan.to_solution(spec);
    let first_divergence = dp
        .actions
        .iter()
        .zip(&sol.actions)
        .position(|(a, b)| a != b)
        .map(|i| i + 1);
    let diff = (sol.total - dp.total).abs();
    Ok(VerifyReport {
        applicable: true,
        message: if first_divergence.is_none() {
            "plan matches DP".into()
        } else {
            "plan differs from DP".into()
        },
        dp_total: dp.total,
        plan_total: Some(sol.total),
        value_difference: Some(diff),
        first_divergence,
        dp_actions,
        plan_actions: Some(user(&sol.actions)),
    })
}

/// Whether every step before `t_d` plays L exactly when the state is at or
/// above the two-step switching point `s0*`.
pub fn s_star_side_check(plan: &PeriodicPlan, spec: &GameSpec) -> bool {
    let Ok(s0) = spec.s0_star() else {
        return false;
    };
    let sol = plan.to_solution(spec);
    sol.actions
        .iter()
        .zip(&sol.states)
        .take(plan.t_d - 1)
        .all(|(&y, s)| (y == Action::L) == ((s.value as f64) >= s0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::LossMatrix;

    fn spec(a: [[i64; 2]; 2], t: usize) -> GameSpec {
        GameSpec::validate(LossMatrix::from_integers(a), None, t).unwrap()
    }

    #[test]
    fn landmarks_of_the_long_example() {
        let g = spec([[1, 0], [-1, 3]], 10_000);
        let lm = compute_landmarks(&g).unwrap();
        assert!((lm.s_star - 58.87).abs() < 0.01);
        assert_eq!(lm.j_star_state, 57);
        assert_eq!(lm.t_cross, 9981);
        assert_eq!(lm.t_d, 9979);
        assert!(10_000 - lm.t_d <= 25);
        assert!(lm.t_d_closed_form <= 10_000 - 25);
    }

    #[test]
    fn short_horizons_are_refused() {
        let g = spec([[1, 0], [-1, 3]], 12);
        assert!(matches!(compute_landmarks(&g), Err(Error::HorizonTooShort { .. })));
        let y = spec([[0, 10], [1, 2]], 100);
        assert!(matches!(compute_landmarks(&y), Err(Error::RegimeMismatch { .. })));
        let report = verify_against_dp(&y, DEFAULT_DP_CAP).unwrap();
        assert!(!report.applicable);
        assert_eq!(report.message, "periodic planner not applicable");
    }

    #[test]
    fn plan_matches_dp_on_examples() {
        for (a, t) in [([[1, 0], [-1, 3]], 700), ([[1, 0], [-2, 7]], 1000)] {
            let g = spec(a, t);
            let report = verify_against_dp(&g, DEFAULT_DP_CAP).unwrap();
            assert!(report.agrees(), "{a:?}: {report:?}");
            let plan = build_periodic_plan(&g).unwrap();
            assert_eq!(plan.expand().len(), t);
            assert!(s_star_side_check(&plan, &g));
        }
    }

    #[test]
    fn plan_json_round_trip() {
        let g = spec([[-1, 3], [1, 0]], 200);
        let plan = build_periodic_plan(&g).unwrap();
        let json = plan.to_json(g.orientation());
        let text = serde_json::to_string(&json).unwrap();
        let back: PlanJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.into_plan(g.orientation()).unwrap(), plan);
    }
}

use num_rational::Rational64;
use proptest::prelude::*;

use hedgeplay::dynamics::{myopic_action, zero_state, zero_states, Scripted};
use hedgeplay::export::trajectory_rows;
use hedgeplay::game::State;
use hedgeplay::sttg::{solve_dp, DEFAULT_DP_CAP};
use hedgeplay::{mbr, simulate, Action, GameSpec, LossMatrix, Regime};

fn entry() -> impl Strategy<Value = Rational64> {
    (-9i64..=9, 1i64..=4).prop_map(|(n, d)| Rational64::new(n, d))
}

fn matrix() -> impl Strategy<Value = LossMatrix> {
    [[entry(), entry()], [entry(), entry()]].prop_map(LossMatrix::new)
}

fn actions(n: usize) -> impl Strategy<Value = Vec<Action>> {
    proptest::collection::vec(prop_oneof![Just(Action::L), Just(Action::R)], n)
}

fn no_dominant(m: &LossMatrix, horizon: usize) -> Option<GameSpec> {
    GameSpec::validate(*m, None, horizon)
        .ok()
        .filter(|s| s.regime() == Regime::NoDominant)
}

/// Hedge weights recomputed from the loss history, user labels throughout.
fn hedge_from_history(a: &[[f64; 2]; 2], eta: f64, history: &[Action]) -> (f64, f64) {
    let cum = |row: usize| history.iter().map(|y| a[row][y.index()]).sum::<f64>();
    let (l1, l2) = (cum(0), cum(1));
    let m = l1.min(l2);
    let (w1, w2) = ((-eta * (l1 - m)).exp(), (-eta * (l2 - m)).exp());
    (w1 / (w1 + w2), w2 / (w1 + w2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn trajectory_matches_history_formula(m in matrix(), ys in actions(40)) {
        let Ok(spec) = GameSpec::validate(m, None, 40) else { return Ok(()); };
        let traj = simulate(&spec, &mut Scripted::user(&spec, &ys)).unwrap();
        let rows = trajectory_rows(&spec, &traj);
        let a = m.to_f64();
        let (mut r1, mut r2) = (0.0, 0.0);
        for (t, row) in rows.iter().enumerate() {
            let (x1, x2) = hedge_from_history(&a, spec.eta(), &ys[..t]);
            prop_assert!((row.x1 - x1).abs() < 1e-10 && (row.x2 - x2).abs() < 1e-10);
            prop_assert_eq!(row.action, ys[t]);
            let r = x1 * a[0][ys[t].index()] + x2 * a[1][ys[t].index()];
            prop_assert!((row.payoff - r).abs() < 1e-9);
            r1 += r - a[0][ys[t].index()];
            r2 += r - a[1][ys[t].index()];
            prop_assert!((row.r1 - r1).abs() < 1e-8 && (row.r2 - r2).abs() < 1e-8);
        }
    }

    #[test]
    fn trajectory_is_internally_consistent(m in matrix(), ys in actions(25)) {
        let Ok(spec) = GameSpec::validate(m, None, 25) else { return Ok(()); };
        let traj = simulate(&spec, &mut Scripted::user(&spec, &ys)).unwrap();
        prop_assert_eq!(traj.states.len(), 26);
        prop_assert_eq!(traj.strategies.len(), 26);
        prop_assert_eq!(traj.regrets.len(), 26);
        for t in 0..25 {
            let s = traj.states[t];
            if t + 1 < 25 {
                prop_assert_eq!(spec.transition(&s, traj.actions[t]).unwrap(), traj.states[t + 1]);
            }
            prop_assert_eq!(spec.hedge_strategy(&s), traj.strategies[t]);
            prop_assert_eq!(spec.payoff(&s, traj.actions[t]), traj.payoffs[t]);
        }
    }

    #[test]
    fn payoffs_are_monotone_in_the_state(m in matrix(), s in -200i64..200) {
        let Some(spec) = no_dominant(&m, 100) else { return Ok(()); };
        let (v, w) = (s as f64, (s + 1) as f64);
        prop_assert!(spec.payoff_at(w, Action::L) >= spec.payoff_at(v, Action::L));
        prop_assert!(spec.payoff_at(w, Action::R) <= spec.payoff_at(v, Action::R));
    }

    #[test]
    fn myopic_rule_is_the_stage_best_response(m in matrix(), s in -300i64..300) {
        let Some(spec) = no_dominant(&m, 200) else { return Ok(()); };
        let s_star = spec.s_star().unwrap();
        let (l, r) = (spec.payoff_at(s as f64, Action::L), spec.payoff_at(s as f64, Action::R));
        let state = State { value: s, time: 1, branch: 1 };
        let y = mbr(&spec, &state).unwrap();
        prop_assert_eq!(y, myopic_action(&spec, s));
        prop_assert_eq!(y == Action::R, (s as f64) < s_star);
        if (s as f64 - s_star).abs() > 1e-6 {
            prop_assert_eq!(y == Action::R, r > l);
        }
    }

    #[test]
    fn f_sign_matches_two_step_comparison(m in matrix(), s in -60i64..60) {
        let Some(spec) = no_dominant(&m, 300) else { return Ok(()); };
        let f = spec.f_value(s as f64);
        let diff = spec.p_rl(s as f64) - spec.p_lr(s as f64);
        if f.abs() > 1e-9 && diff.abs() > 1e-9 {
            prop_assert_eq!(f > 0.0, diff > 0.0, "f={} diff={}", f, diff);
        }
    }

    #[test]
    fn s0_star_lies_between_the_midpoint_and_zero(m in matrix(), horizon in 2usize..5000) {
        let Some(spec) = no_dominant(&m, horizon) else { return Ok(()); };
        let s0 = spec.s0_star().unwrap();
        let (d1, d2) = (spec.delta1(), spec.delta2());
        let mid = (d1 + d2) as f64 / 2.0;
        if d1 == -d2 {
            prop_assert_eq!(s0, 0.0);
        } else {
            prop_assert!(mid < s0 && s0 < 0.0, "mid={} s0={}", mid, s0);
            prop_assert!(spec.f_value(0.0) < 0.0);
            prop_assert!(spec.f_value(mid) > 0.0);
        }
        let (f1, _) = spec.f_coefficients();
        prop_assert!(f1 < 0.0);
    }

    #[test]
    fn canonical_orientation_signs(m in matrix()) {
        let Some(spec) = no_dominant(&m, 50) else { return Ok(()); };
        let d = spec.deltas();
        prop_assert!(d.delta1 > 0 && d.delta2 < 0);
        prop_assert!(d.little_delta1 > 0 && d.little_delta2 < 0);
        prop_assert!(d.delta1.abs() <= d.delta2.abs());
        let t_star = spec.t_star().unwrap();
        let lcm = num_integer::lcm(d.delta1, -d.delta2);
        prop_assert_eq!(t_star as i64, lcm / d.delta1 - lcm / d.delta2);
    }

    #[test]
    fn zero_path_closed_form_matches_recursion(p in 1i64..12, q in 1i64..12) {
        let (d1, d2) = (p.min(q), -p.max(q));
        let mut s = 0i64;
        for t in 1..=80 {
            prop_assert_eq!(zero_state(d1, d2, t), s);
            s -= if s >= 0 { d1 } else { d2 };
        }
        let z = zero_states(d1, d2, 80);
        prop_assert!(z.iter().all(|&v| -d1 <= v && v < -d2));
        prop_assert!(z.windows(2).all(|w| !(w[0] < 0 && w[1] < 0)));
    }

    #[test]
    fn optimum_is_invariant_under_affine_loss_changes(
        m in matrix(),
        num in 1i64..6,
        den in 1i64..6,
        shift in -5i64..5,
    ) {
        let horizon = 30;
        let Ok(spec) = GameSpec::validate(m, Some(0.4), horizon) else { return Ok(()); };
        let c = Rational64::new(num, den);
        let k = Rational64::from_integer(shift);
        let e = m.entries();
        let scaled = LossMatrix::new([[e[0][0] * c + k, e[0][1] * c + k], [e[1][0] * c + k, e[1][1] * c + k]]);
        let eta = 0.4 * den as f64 / num as f64;
        let other = GameSpec::validate(scaled, Some(eta), horizon).unwrap();
        prop_assert_eq!(other.regime(), spec.regime());
        let base = solve_dp(&spec, DEFAULT_DP_CAP).unwrap();
        let moved = solve_dp(&other, DEFAULT_DP_CAP).unwrap();
        let user = |g: &GameSpec, a: &[Action]| a.iter().map(|&y| g.orientation().action_to_user(y)).collect::<Vec<_>>();
        let expected = base.total * num as f64 / den as f64 + (shift * horizon as i64) as f64;
        prop_assert!((moved.total - expected).abs() < 1e-8 * (1.0 + expected.abs()));
        let ties = hedgeplay::sttg::backward_induction(&spec).unwrap().ties();
        if ties == 0 {
            prop_assert_eq!(user(&spec, &base.actions), user(&other, &moved.actions));
        }
    }

    #[test]
    fn relabelling_rows_does_not_change_the_optimum(m in matrix()) {
        let Ok(spec) = GameSpec::validate(m, None, 24) else { return Ok(()); };
        let Ok(swapped) = GameSpec::validate(m.swap_rows(), None, 24) else { return Ok(()); };
        let a = solve_dp(&spec, DEFAULT_DP_CAP).unwrap();
        let b = solve_dp(&swapped, DEFAULT_DP_CAP).unwrap();
        prop_assert!((a.total - b.total).abs() < 1e-9);
        prop_assert_eq!(spec.regime(), swapped.regime());
    }

    #[test]
    fn matrix_text_round_trips(m in matrix()) {
        let text = m.to_text();
        prop_assert_eq!(text.parse::<LossMatrix>().unwrap(), m);
        let json = serde_json::to_string(&m).unwrap();
        prop_assert_eq!(serde_json::from_str::<LossMatrix>(&json).unwrap(), m);
    }

    #[test]
    fn spec_json_round_trips(m in matrix(), horizon in 1usize..2000) {
        let Ok(spec) = GameSpec::validate(m, None, horizon) else { return Ok(()); };
        let json = serde_json::to_string(&spec).unwrap();
        prop_assert_eq!(serde_json::from_str::<GameSpec>(&json).unwrap(), spec);
    }
}

#[test]
fn decimal_entries_are_exact() {
    let m: LossMatrix = "0.1,1/3;-2.5,7".parse().unwrap();
    assert_eq!(m.entry(0, 0), Rational64::new(1, 10));
    assert_eq!(m.entry(0, 1), Rational64::new(1, 3));
    assert_eq!(m.entry(1, 0), Rational64::new(-5, 2));
    let spec = GameSpec::validate(m, None, 10).unwrap();
    assert_eq!(spec.scale(), 30);
}

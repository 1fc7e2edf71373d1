//! Longest paths on the state lattice.
//!
//! Row `t` of the lattice holds the `t` reachable states; an edge from a node
//! carries the stage payoff of the chosen action. Backward induction gives
//! the optimal continuation value `f*` and action of every node.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Action, GameSpec, MixedStrategy, State};

pub const DEFAULT_DP_CAP: usize = 20_000;
/// Largest horizon for which every `f*` is retained.
pub const FULL_TABLE_CAP: usize = 5_000;
pub const BRUTE_FORCE_CAP: usize = 22;
pub const LOCAL_WINDOW_CAP: usize = 64;

/// Rows at least this wide are evaluated in parallel.
const PAR_ROW: usize = 2048;

/// Lattice with payoff-weighted edges. Lets callers swap in modified payoffs
/// or steps without touching the solvers.
pub trait EdgeModel: Sync {
    fn horizon(&self) -> usize;

    /// Decrease of the state value caused by an action.
    fn step(&self, y: Action) -> i64;

    fn edge_payoff(&self, value: i64, time: usize, y: Action) -> f64;
}

impl EdgeModel for GameSpec {
    fn horizon(&self) -> usize {
        GameSpec::horizon(self)
    }

    fn step(&self, y: Action) -> i64 {
        GameSpec::step(self, y)
    }

    fn edge_payoff(&self, value: i64, _time: usize, y: Action) -> f64 {
        self.payoff_at(value as f64, y)
    }
}

/// The game with the learner starting from `x1` instead of the uniform mix.
/// Only the first stage payoff changes.
#[derive(Debug, Clone)]
pub struct InitialStrategy<'a> {
    pub spec: &'a GameSpec,
    pub x1: MixedStrategy,
}

impl EdgeModel for InitialStrategy<'_> {
    fn horizon(&self) -> usize {
        self.spec.horizon()
    }

    fn step(&self, y: Action) -> i64 {
        self.spec.step(y)
    }

    fn edge_payoff(&self, value: i64, time: usize, y: Action) -> f64 {
        if time == 1 {
            self.spec.payoff_with(self.x1, y)
        } else {
            self.spec.payoff_at(value as f64, y)
        }
    }
}

fn tie_tolerance(a: f64, b: f64) -> f64 {
    1e-11 * a.abs().max(b.abs()).max(1.0)
}

/// Bellman choice: R only when strictly better beyond float noise.
pub fn prefer_r(v_l: f64, v_r: f64) -> bool {
    v_r > v_l + tie_tolerance(v_l, v_r)
}

pub fn is_tie(v_l: f64, v_r: f64) -> bool {
    (v_l - v_r).abs() <= tie_tolerance(v_l, v_r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverOptions {
    pub cap: usize,
    pub keep_values: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_DP_CAP,
            keep_values: false,
        }
    }
}

impl SolverOptions {
    pub fn full() -> Self {
        Self {
            keep_values: true,
            ..Self::default()
        }
    }
}

/// Optimal actions (and optionally values) on the cone below an apex node.
///
/// Node `(branch, time)` uses the lattice's absolute coordinates; only nodes
/// reachable from the apex are stored.
#[derive(Debug, Clone)]
pub struct ValueTable {
    apex: State,
    horizon: usize,
    steps: (i64, i64),
    bits: Vec<u64>,
    values: Option<Vec<f64>>,
    root_value: f64,
    ties: usize,
    root_tie: bool,
}

fn tri(j: usize) -> usize {
    j * (j + 1) / 2
}

impl ValueTable {
    pub fn apex(&self) -> State {
        self.apex
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// `f*` at the apex.
    pub fn root_value(&self) -> f64 {
        self.root_value
    }

    /// Decisions whose two options agreed within the tie tolerance.
    pub fn ties(&self) -> usize {
        self.ties
    }

    /// Whether both actions are optimal at the apex.
    pub fn root_tie(&self) -> bool {
        self.root_tie
    }

    pub fn has_values(&self) -> bool {
        self.values.is_some()
    }

    fn index(&self, branch: usize, time: usize) -> usize {
        assert!(time >= self.apex.time && time <= self.horizon, "time {time} outside table");
        let j = time - self.apex.time;
        assert!(branch >= self.apex.branch && branch - self.apex.branch <= j, "branch {branch} unreachable at t={time}");
        tri(j) + branch - self.apex.branch
    }

    pub fn action(&self, branch: usize, time: usize) -> Action {
        let idx = self.index(branch, time);
        if self.bits[idx / 64] >> (idx % 64) & 1 == 1 {
            Action::R
        } else {
            Action::L
        }
    }

    pub fn value(&self, branch: usize, time: usize) -> Option<f64> {
        let idx = self.index(branch, time);
        self.values.as_ref().map(|v| v[idx])
    }

    /// Node value of `(branch, time)`.
    pub fn node_value(&self, branch: usize, time: usize) -> i64 {
        let j = (time - self.apex.time) as i64;
        let k = (branch - self.apex.branch) as i64;
        self.apex.value - (j - k) * self.steps.0 - k * self.steps.1
    }

    /// Branch range `(first, last)` of row `time`.
    pub fn row_branches(&self, time: usize) -> (usize, usize) {
        let j = time - self.apex.time;
        (self.apex.branch, self.apex.branch + j)
    }

    pub fn row_actions(&self, time: usize) -> Vec<Action> {
        let (lo, hi) = self.row_branches(time);
        (lo..=hi).map(|b| self.action(b, time)).collect()
    }

    /// One line per time, one `L`/`R` per branch.
    pub fn to_grid(&self) -> String {
        let mut out = String::new();
        for time in self.apex.time..=self.horizon {
            out.extend(self.row_actions(time).iter().map(|a| a.as_char()));
            out.push('\n');
        }
        out
    }
}

/// Full backward induction from the root with default options.
pub fn backward_induction(spec: &GameSpec) -> Result<ValueTable> {
    solve_cone(spec, State::root(), SolverOptions::default())
}

pub fn backward_induction_with<M: EdgeModel>(model: &M, opts: SolverOptions) -> Result<ValueTable> {
    solve_cone(model, State::root(), opts)
}

/// Backward induction over every node reachable from `apex`, with
/// `f* ≡ 0` after the horizon.
pub fn solve_cone<M: EdgeModel>(model: &M, apex: State, opts: SolverOptions) -> Result<ValueTable> {
    let horizon = model.horizon();
    if apex.time > horizon {
        return Err(Error::HorizonExceeded {
            time: apex.time,
            horizon,
        });
    }
    // Depth of the cone; equals the horizon when solving from the root.
    let n = horizon - apex.time + 1;
    if n > opts.cap {
        return Err(Error::ResourceLimit {
            what: "horizon for dynamic programming",
            requested: n,
            cap: opts.cap,
        });
    }
    if opts.keep_values && n > FULL_TABLE_CAP {
        return Err(Error::ResourceLimit {
            what: "horizon for a full value table",
            requested: n,
            cap: FULL_TABLE_CAP,
        });
    }
    let steps = (model.step(Action::L), model.step(Action::R));
    let nodes = tri(n);
    let mut bits = vec![0u64; nodes.div_ceil(64)];
    let mut values = opts.keep_values.then(|| vec![0.0; nodes]);
    let mut next = vec![0.0f64; n + 1];
    let mut ties = 0usize;
    let mut root_tie = false;

    let eval = |j: usize, k: usize, next: &[f64]| -> (f64, bool, bool) {
        let time = apex.time + j;
        let value = apex.value - (j - k) as i64 * steps.0 - k as i64 * steps.1;
        let v_l = model.edge_payoff(value, time, Action::L) + next[k];
        let v_r = model.edge_payoff(value, time, Action::R) + next[k + 1];
        if prefer_r(v_l, v_r) {
            (v_r, true, false)
        } else {
            (v_l, false, is_tie(v_l, v_r))
        }
    };

    for j in (0..n).rev() {
        let row: Vec<(f64, bool, bool)> = if j + 1 >= PAR_ROW {
            (0..=j).into_par_iter().map(|k| eval(j, k, &next)).collect()
        } else {
            (0..=j).map(|k| eval(j, k, &next)).collect()
        };
        let base = tri(j);
        for (k, &(v, r, tie)) in row.iter().enumerate() {
            let idx = base + k;
            if r {
                bits[idx / 64] |= 1 << (idx % 64);
            }
            if tie {
                ties += 1;
            }
            next[k] = v;
            if let Some(vals) = values.as_mut() {
                vals[idx] = v;
            }
        }
        if j == 0 {
            root_tie = row[0].2;
        }
    }
    if ties > 0 {
        log::debug!("{ties} tied decisions broken toward L");
    }
    Ok(ValueTable {
        apex,
        horizon,
        steps,
        bits,
        values,
        root_value: next[0],
        ties,
        root_tie,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dp,
    Periodic,
    Brute,
}

/// An action sequence from the root with its states and payoffs.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalSolution {
    pub actions: Vec<Action>,
    pub states: Vec<State>,
    pub payoffs: Vec<f64>,
    pub total: f64,
    pub method: Method,
}

impl OptimalSolution {
    /// Evaluates a canonical action sequence from the apex state.
    pub fn from_actions<M: EdgeModel>(model: &M, apex: State, actions: Vec<Action>, method: Method) -> Self {
        let mut states = Vec::with_capacity(actions.len() + 1);
        let mut payoffs = Vec::with_capacity(actions.len());
        let mut s = apex;
        for &y in &actions {
            states.push(s);
            payoffs.push(model.edge_payoff(s.value, s.time, y));
            s = State {
                value: s.value - model.step(y),
                time: s.time + 1,
                branch: s.branch + usize::from(y == Action::R),
            };
        }
        states.push(s);
        let total = payoffs.iter().sum();
        Self {
            actions,
            states,
            payoffs,
            total,
            method,
        }
    }

    pub fn average_payoff(&self) -> f64 {
        self.total / self.actions.len().max(1) as f64
    }

    /// Mean payoff over times `start..start+len` (1-based).
    pub fn window_average(&self, start: usize, len: usize) -> f64 {
        let from = start - self.states[0].time;
        self.payoffs[from..from + len].iter().sum::<f64>() / len as f64
    }

    pub fn state_values(&self) -> Vec<i64> {
        self.states.iter().map(|s| s.value).collect()
    }
}

/// Greedy walk along the stored optimal actions.
pub fn extract_path<M: EdgeModel>(table: &ValueTable, model: &M) -> OptimalSolution {
    let apex = table.apex();
    let mut actions = Vec::with_capacity(table.horizon() + 1 - apex.time);
    let mut branch = apex.branch;
    for time in apex.time..=table.horizon() {
        let y = table.action(branch, time);
        actions.push(y);
        branch += usize::from(y == Action::R);
    }
    OptimalSolution::from_actions(model, apex, actions, Method::Dp)
}

/// Backward induction plus extraction in one call.
pub fn solve_dp(spec: &GameSpec, cap: usize) -> Result<OptimalSolution> {
    let table = solve_cone(
        spec,
        State::root(),
        SolverOptions {
            cap,
            keep_values: false,
        },
    )?;
    Ok(extract_path(&table, spec))
}

/// Exhaustive search over all `2^T` sequences. Among maxima (within the tie
/// tolerance) the lexicographically first with `L < R` wins.
pub fn brute_force<M: EdgeModel>(model: &M) -> Result<OptimalSolution> {
    let horizon = model.horizon();
    if horizon > BRUTE_FORCE_CAP {
        return Err(Error::ResourceLimit {
            what: "horizon for brute force",
            requested: horizon,
            cap: BRUTE_FORCE_CAP,
        });
    }
    let (sl, sr) = (model.step(Action::L), model.step(Action::R));
    // pay[j][k] = (L payoff, R payoff) at time j+1 after k R moves.
    let pay: Vec<Vec<(f64, f64)>> = (0..horizon)
        .map(|j| {
            (0..=j)
                .map(|k| {
                    let v = -((j - k) as i64) * sl - k as i64 * sr;
                    (
                        model.edge_payoff(v, j + 1, Action::L),
                        model.edge_payoff(v, j + 1, Action::R),
                    )
                })
                .collect()
        })
        .collect();

    struct Search<'a> {
        pay: &'a [Vec<(f64, f64)>],
        best: f64,
        best_mask: u32,
        found: bool,
    }

    impl Search<'_> {
        fn go(&mut self, j: usize, k: usize, acc: f64, mask: u32) {
            if j == self.pay.len() {
                if !self.found || acc > self.best + tie_tolerance(acc, self.best) {
                    self.best = acc;
                    self.best_mask = mask;
                    self.found = true;
                }
                return;
            }
            let (l, r) = self.pay[j][k];
            self.go(j + 1, k, acc + l, mask);
            self.go(j + 1, k + 1, acc + r, mask | (1 << j));
        }
    }

    let mut search = Search {
        pay: &pay,
        best: f64::NEG_INFINITY,
        best_mask: 0,
        found: false,
    };
    search.go(0, 0, 0.0, 0);
    let actions = (0..horizon)
        .map(|j| if search.best_mask >> j & 1 == 1 { Action::R } else { Action::L })
        .collect();
    Ok(OptimalSolution::from_actions(model, State::root(), actions, Method::Brute))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalPath {
    pub actions: Vec<Action>,
    pub value: f64,
}

/// Number of R moves needed to go from `from` to `to` in `n` steps.
fn r_count<M: EdgeModel>(model: &M, from: i64, to: i64, n: usize) -> Option<usize> {
    let (sl, sr) = (model.step(Action::L), model.step(Action::R));
    (0..=n).find(|&k| from - (n - k) as i64 * sl - k as i64 * sr == to)
}

/// Best path from `start` to the fixed node `(end_value, end_time)`.
pub fn local_longest_path<M: EdgeModel>(
    model: &M,
    start: State,
    end_value: i64,
    end_time: usize,
) -> Result<LocalPath> {
    if end_time > start.time && end_time - start.time > LOCAL_WINDOW_CAP {
        return Err(Error::ResourceLimit {
            what: "local window",
            requested: end_time - start.time,
            cap: LOCAL_WINDOW_CAP,
        });
    }
    local_longest_path_unbounded(model, start, end_value, end_time)
}

pub(crate) fn local_longest_path_unbounded<M: EdgeModel>(
    model: &M,
    start: State,
    end_value: i64,
    end_time: usize,
) -> Result<LocalPath> {
    let not_accessible = || Error::NotAccessible {
        start_value: start.value,
        start_time: start.time,
        end_value,
        end_time,
    };
    if end_time < start.time {
        return Err(not_accessible());
    }
    let n = end_time - start.time;
    let n_r = r_count(model, start.value, end_value, n).ok_or_else(not_accessible)?;
    let n_l = n - n_r;
    let (sl, sr) = (model.step(Action::L), model.step(Action::R));

    // f[k]: best value from step j with k R moves taken; None if the end
    // node cannot be reached from there.
    let mut f: Vec<Option<f64>> = vec![None; n_r + 1];
    f[n_r] = Some(0.0);
    let mut choice = vec![Vec::new(); n];
    for j in (0..n).rev() {
        let mut g = vec![None; n_r + 1];
        let mut row = vec![Action::L; n_r + 1];
        for k in 0..=j.min(n_r) {
            if j - k > n_l {
                continue;
            }
            let value = start.value - (j - k) as i64 * sl - k as i64 * sr;
            let time = start.time + j;
            let via_l = if j - k < n_l {
                f[k].map(|c| model.edge_payoff(value, time, Action::L) + c)
            } else {
                None
            };
            let via_r = if k < n_r {
                f[k + 1].map(|c| model.edge_payoff(value, time, Action::R) + c)
            } else {
                None
            };
            let (best, y) = match (via_l, via_r) {
                (Some(l), Some(r)) if prefer_r(l, r) => (Some(r), Action::R),
                (Some(l), _) => (Some(l), Action::L),
                (None, Some(r)) => (Some(r), Action::R),
                (None, None) => (None, Action::L),
            };
            g[k] = best;
            row[k] = y;
        }
        choice[j] = row;
        f = g;
    }
    let mut actions = Vec::with_capacity(n);
    let mut k = 0;
    for row in &choice {
        let y = row[k];
        actions.push(y);
        k += usize::from(y == Action::R);
    }
    Ok(LocalPath {
        actions,
        value: f[0].unwrap_or(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::LossMatrix;
    use approx::assert_abs_diff_eq;

    fn spec(a: [[i64; 2]; 2], t: usize) -> GameSpec {
        GameSpec::validate(LossMatrix::from_integers(a), None, t).unwrap()
    }

    #[test]
    fn horizon_one_is_myopic() {
        let g = spec([[1, 0], [-1, 3]], 1);
        let table = backward_induction(&g).unwrap();
        assert_eq!(table.action(1, 1), Action::R);
        let sol = extract_path(&table, &g);
        assert_eq!(sol.actions, vec![Action::R]);
        assert_abs_diff_eq!(sol.total, 1.5, epsilon = 1e-15);
        let brute = brute_force(&g).unwrap();
        assert_eq!(brute.actions, vec![Action::R]);
    }

    #[test]
    fn dp_matches_brute_force_small() {
        for a in [[[1, 0], [-1, 3]], [[1, 0], [-2, 7]], [[3, -1], [-2, 4]], [[0, 10], [1, 2]]] {
            for t in [5, 9, 13] {
                let g = spec(a, t);
                let table = backward_induction(&g).unwrap();
                let dp = extract_path(&table, &g);
                let bf = brute_force(&g).unwrap();
                assert!((dp.total - bf.total).abs() < 1e-9, "{a:?} T={t}");
                assert_abs_diff_eq!(dp.total, table.root_value(), epsilon = 1e-9);
                assert_eq!(dp.actions, bf.actions, "{a:?} T={t}");
            }
        }
    }

    #[test]
    fn caps_are_enforced() {
        let g = spec([[1, 0], [-1, 3]], 30);
        assert!(matches!(brute_force(&g), Err(Error::ResourceLimit { .. })));
        let opts = SolverOptions { cap: 10, keep_values: false };
        assert!(matches!(backward_induction_with(&g, opts), Err(Error::ResourceLimit { .. })));
    }

    #[test]
    fn last_row_is_a_threshold_at_s_star() {
        let g = spec([[1, 0], [-1, 3]], 200);
        let s = g.s_star().unwrap();
        let table = backward_induction(&g).unwrap();
        for i in 1..=200 {
            let expect = if (g.node_value(i, 200) as f64) < s { Action::R } else { Action::L };
            assert_eq!(table.action(i, 200), expect);
        }
    }

    #[test]
    fn full_table_values_satisfy_bellman() {
        let g = spec([[1, 0], [-2, 7]], 60);
        let table = backward_induction_with(&g, SolverOptions::full()).unwrap();
        for t in 1..60 {
            for i in 1..=t {
                let s = g.node_value(i, t) as f64;
                let l = g.payoff_at(s, Action::L) + table.value(i, t + 1).unwrap();
                let r = g.payoff_at(s, Action::R) + table.value(i + 1, t + 1).unwrap();
                assert_eq!(table.value(i, t).unwrap(), if prefer_r(l, r) { r } else { l });
            }
        }
        assert_eq!(table.to_grid().lines().count(), 60);
    }

    #[test]
    fn local_paths() {
        let g = spec([[1, 0], [-1, 3]], 700);
        let path = local_longest_path(&g, State::root(), 0, 6).unwrap();
        assert_eq!(path.actions.len(), 5);
        assert_eq!(path.actions.iter().filter(|&&a| a == Action::L).count(), 3);
        let one = local_longest_path(&g, State::root(), -2, 2).unwrap();
        assert_eq!(one.actions, vec![Action::L]);
        assert!(matches!(
            local_longest_path(&g, State::root(), 2, 3),
            Err(Error::NotAccessible { .. })
        ));
        assert!(matches!(
            local_longest_path(&g, State::root(), 0, 101),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn cone_values_match_the_full_table() {
        let g = spec([[1, 0], [-1, 3]], 80);
        let full = backward_induction_with(&g, SolverOptions::full()).unwrap();
        let apex = g.node(7, 30);
        let cone = solve_cone(&g, apex, SolverOptions::full()).unwrap();
        assert_eq!(cone.value(7, 30), full.value(7, 30));
        assert_eq!(cone.row_actions(50), full.row_actions(50)[6..27].to_vec());
    }
}

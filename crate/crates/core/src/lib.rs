//! Optimal and myopic play against a Hedge learner in finitely repeated
//! 2x2 zero-sum games.
//!
//! The learner's mixed strategy is a function of one exact integer state, so
//! the whole game reduces to a longest-path problem on a triangular lattice
//! of states. [`sttg`] solves that problem exactly, [`planner`] builds the
//! same answer from one periodic block plus a short tail, and [`analysis`]
//! checks the structural facts both rely on.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod game;
pub mod matrix;
pub mod period;
pub mod planner;
pub mod sttg;

pub use analysis::{run_suite, CheckResult, Depth, Mutation};
pub use dynamics::{
    mbr, myopic_path, simulate, t_star, zero_path, Constant, Myopic, OpponentPolicy, Scripted, StageNash,
    Trajectory, ZeroThreshold,
};
pub use export::{TrajectoryRecord, TrajectoryRow};
pub use error::{Error, Result};
pub use game::{Action, Deltas, GameSpec, MixedStrategy, Orientation, Regime, State};
pub use matrix::LossMatrix;
pub use period::{detect_period, PeriodReport};
pub use planner::{build_periodic_plan, compute_landmarks, verify_against_dp, Landmarks, PeriodicPlan, PlanJson};
pub use sttg::{backward_induction, brute_force, extract_path, solve_dp, Method, OptimalSolution, ValueTable};

//! Shared fixtures for the benchmarks.

use hedgeplay::{GameSpec, LossMatrix};

pub const EXAMPLE_1: [[i64; 2]; 2] = [[1, 0], [-1, 3]];
pub const EXAMPLE_3: [[i64; 2]; 2] = [[1, 0], [-2, 7]];

pub fn game(entries: [[i64; 2]; 2], horizon: usize) -> GameSpec {
    GameSpec::validate(LossMatrix::from_integers(entries), None, horizon).expect("fixture game is valid")
}

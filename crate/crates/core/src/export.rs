//! Plot-ready CSV and JSON exports, in the user's labels and orientation.

use std::io::{Read, Write};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::game::{Action, GameSpec, GameSpecJson};

const MAX_EXACT: i64 = 1 << 53;

/// Integers beyond 2^53 travel as strings so JSON readers keep them exact.
pub mod big_int {
    use super::*;

    pub fn serialize<S: Serializer>(v: &i64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.unsigned_abs() <= MAX_EXACT as u64 {
            s.serialize_i64(*v)
        } else {
            s.serialize_str(&v.to_string())
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<i64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(i64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(n) => Ok(n),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// One time step, after the opponent has moved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: usize,
    /// Learner's state before the move, scaled integer units.
    #[serde(with = "big_int")]
    pub s: i64,
    /// Number of R moves before time `t`, plus one.
    pub i: usize,
    pub x1: f64,
    pub x2: f64,
    pub action: Action,
    pub payoff: f64,
    /// Cumulative regrets of the two rows after time `t`.
    #[serde(rename = "R1")]
    pub r1: f64,
    #[serde(rename = "R2")]
    pub r2: f64,
}

/// Rows `t = 1..=T` of a canonical trajectory, mapped to user labels.
pub fn trajectory_rows(spec: &GameSpec, traj: &Trajectory) -> Vec<TrajectoryRow> {
    let o = spec.orientation();
    (0..traj.len())
        .map(|k| {
            let state = traj.states[k];
            let x = o.strategy_to_user(traj.strategies[k]);
            let (c1, c2) = traj.regrets[k + 1];
            let (r1, r2) = if o.swap_rows { (c2, c1) } else { (c1, c2) };
            TrajectoryRow {
                t: state.time,
                s: o.state_to_user(state.value),
                i: state.branch,
                x1: x.p1,
                x2: x.p2,
                action: o.action_to_user(traj.actions[k]),
                payoff: traj.payoffs[k],
                r1,
                r2,
            }
        })
        .collect()
}

/// `%.12g`-style formatting: 12 significant digits, shortest form.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let fixed = format!("{:.*}", decimals, x);
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{}", trim_zeros(mantissa), exp)
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

const HEADER: [&str; 9] = ["t", "s", "i", "x1", "x2", "action", "payoff", "R1", "R2"];

pub fn write_csv<W: Write>(rows: &[TrajectoryRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.t.to_string(),
            r.s.to_string(),
            r.i.to_string(),
            fmt_sig(r.x1),
            fmt_sig(r.x2),
            r.action.to_string(),
            fmt_sig(r.payoff),
            fmt_sig(r.r1),
            fmt_sig(r.r2),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Format(format!("write: {e}")))?;
    Ok(())
}

pub fn csv_string(rows: &[TrajectoryRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<TrajectoryRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_err)?.clone();
    if header.iter().ne(HEADER) {
        return Err(Error::Format(format!("unexpected CSV header {:?}", header)));
    }
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(format!("csv: {e}"))
}

/// Self-describing JSON export of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub spec: GameSpecJson,
    /// Policy or solver that produced the actions.
    pub source: String,
    pub total_payoff: f64,
    pub average_payoff: f64,
    /// User-labelled action string.
    pub actions: String,
    pub rows: Vec<TrajectoryRow>,
}

impl TrajectoryRecord {
    pub fn new(spec: &GameSpec, source: impl Into<String>, traj: &Trajectory) -> Self {
        let rows = trajectory_rows(spec, traj);
        let actions = rows.iter().map(|r| r.action.as_char()).collect();
        Self {
            spec: spec.to_json(),
            source: source.into(),
            total_payoff: traj.total_payoff(),
            average_payoff: traj.average_payoff(),
            actions,
            rows,
        }
    }

    pub fn to_json_string(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{myopic_path, simulate, Constant};
    use crate::matrix::LossMatrix;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(-2.5), "-2.5");
        assert_eq!(fmt_sig(2.0 / 3.0), "0.666666666667");
        assert_eq!(fmt_sig(123456.789), "123456.789");
        assert_eq!(fmt_sig(1e-7), "1e-7");
        assert_eq!(fmt_sig(6.02e23), "6.02e23");
    }

    #[test]
    fn rows_follow_user_orientation() {
        // Rows swap under orientation; payoffs and actions must still read
        // against the matrix as typed.
        let spec = GameSpec::validate(LossMatrix::from_integers([[-1, 3], [1, 0]]), None, 3).unwrap();
        assert!(spec.orientation().swap_rows);
        let traj = simulate(&spec, &mut Constant::user(&spec, Action::L)).unwrap();
        let rows = trajectory_rows(&spec, &traj);
        assert_eq!(rows.len(), 3);
        let a = spec.user_matrix().to_f64();
        for r in &rows {
            assert_eq!(r.action, Action::L);
            let expect = r.x1 * a[0][0] + r.x2 * a[1][0];
            assert!((r.payoff - expect).abs() < 1e-12);
        }
        assert!(rows[2].x1 > rows[0].x1, "row 1 has the smaller loss under L");
    }

    #[test]
    fn csv_and_json_round_trip() {
        let spec = GameSpec::validate(LossMatrix::from_integers([[1, 0], [-1, 3]]), None, 40).unwrap();
        let traj = myopic_path(&spec).unwrap();
        let record = TrajectoryRecord::new(&spec, "mbr", &traj);
        let text = csv_string(&record.rows).unwrap();
        assert!(text.starts_with("t,s,i,x1,x2,action,payoff,R1,R2\n"));
        assert!(!text.contains('\r'));
        let back = read_csv(text.as_bytes()).unwrap();
        assert_eq!(csv_string(&back).unwrap(), text);
        let json = record.to_json_string().unwrap();
        assert_eq!(TrajectoryRecord::from_json_str(&json).unwrap(), record);
    }

    #[test]
    fn large_states_are_strings() {
        #[derive(Serialize, Deserialize, PartialEq, Debug)]
        struct W(#[serde(with = "big_int")] i64);
        assert_eq!(serde_json::to_string(&W(5)).unwrap(), "5");
        let big = W(MAX_EXACT + 1);
        let text = serde_json::to_string(&big).unwrap();
        assert_eq!(text, "\"9007199254740993\"");
        assert_eq!(serde_json::from_str::<W>(&text).unwrap(), big);
    }
}

//! Exact rational loss matrices.
//!
//! Entries are kept as reduced fractions and never pass through binary
//! floating point. Text input accepts integers, plain decimals (`-1.9`) and
//! fractions (`7/3`).

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Loss of player X (payoff of player Y). Row index is X's action (U, D),
/// column index is Y's action (L, R).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LossMatrix {
    entries: [[Rational64; 2]; 2],
}

/// The loss matrix written as `numerators / denominator` with integer numerators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScaledMatrix {
    pub numerators: [[i64; 2]; 2],
    pub denominator: i64,
}

impl LossMatrix {
    pub fn new(entries: [[Rational64; 2]; 2]) -> Self {
        Self { entries }
    }

    pub fn from_integers(a: [[i64; 2]; 2]) -> Self {
        Self::new(a.map(|row| row.map(Rational64::from_integer)))
    }

    pub fn entry(&self, row: usize, col: usize) -> Rational64 {
        self.entries[row][col]
    }

    pub fn entries(&self) -> [[Rational64; 2]; 2] {
        self.entries
    }

    /// Parses `"a11,a12;a21,a22"`.
    pub fn parse(text: &str) -> Result<Self> {
        let rows: Vec<&str> = text
            .trim()
            .split(';')
            .map(str::trim)
            .filter(|r| !r.is_empty())
            .collect();
        if rows.len() != 2 {
            return Err(Error::MatrixParse(format!(
                "expected 2 rows separated by ';', found {}",
                rows.len()
            )));
        }
        let mut entries = [[Rational64::zero(); 2]; 2];
        for (r, row) in rows.iter().enumerate() {
            let cells: Vec<&str> = row.split(',').map(str::trim).collect();
            if cells.len() != 2 {
                return Err(Error::MatrixParse(format!(
                    "row {} has {} entries, expected 2",
                    r + 1,
                    cells.len()
                )));
            }
            for (c, cell) in cells.iter().enumerate() {
                entries[r][c] = parse_rational(cell)?;
            }
        }
        Ok(Self { entries })
    }

    /// Same game with X's rows exchanged.
    pub fn swap_rows(&self) -> Self {
        let e = self.entries;
        Self::new([e[1], e[0]])
    }

    /// Same game with Y's columns exchanged.
    pub fn swap_cols(&self) -> Self {
        let e = self.entries;
        Self::new([[e[0][1], e[0][0]], [e[1][1], e[1][0]]])
    }

    /// Folds the common denominator out: `A = Ã / q` with integer `Ã`.
    ///
    /// `q` is the lcm of the reduced denominators, so no prime divides `q`
    /// and all four numerators at once.
    pub fn scaled(&self) -> Result<ScaledMatrix> {
        let mut q: i64 = 1;
        for row in &self.entries {
            for a in row {
                q = q.lcm(a.denom());
            }
        }
        let mut numerators = [[0i64; 2]; 2];
        for (r, row) in self.entries.iter().enumerate() {
            for (c, a) in row.iter().enumerate() {
                let factor = q / a.denom();
                numerators[r][c] = a.numer().checked_mul(factor).ok_or(Error::Overflow)?;
            }
        }
        Ok(ScaledMatrix {
            numerators,
            denominator: q,
        })
    }

    pub fn to_f64(&self) -> [[f64; 2]; 2] {
        self.entries
            .map(|row| row.map(|a| *a.numer() as f64 / *a.denom() as f64))
    }

    /// Canonical text form, readable by [`LossMatrix::parse`].
    pub fn to_text(&self) -> String {
        let e = &self.entries;
        format!(
            "{},{};{},{}",
            fmt_rational(e[0][0]),
            fmt_rational(e[0][1]),
            fmt_rational(e[1][0]),
            fmt_rational(e[1][1])
        )
    }
}

impl ScaledMatrix {
    pub fn delta1(&self) -> i64 {
        self.numerators[0][0] - self.numerators[1][0]
    }

    pub fn delta2(&self) -> i64 {
        self.numerators[0][1] - self.numerators[1][1]
    }

    pub fn little_delta1(&self) -> i64 {
        self.numerators[0][0] - self.numerators[0][1]
    }

    pub fn little_delta2(&self) -> i64 {
        self.numerators[1][0] - self.numerators[1][1]
    }
}

impl FromStr for LossMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl fmt::Display for LossMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

pub fn fmt_rational(a: Rational64) -> String {
    if a.is_integer() {
        a.numer().to_string()
    } else {
        format!("{}/{}", a.numer(), a.denom())
    }
}

fn looks_irrational(token: &str) -> bool {
    let t = token.to_ascii_lowercase();
    let named = ["pi", "π", "e", "inf", "infinity", "nan", "tau"];
    named.contains(&t.trim_start_matches(['-', '+']))
        || t.contains("sqrt")
        || t.contains("ln(")
        || t.contains("log")
        || t.contains("exp")
        || t.contains('e') && t.chars().any(|c| c.is_ascii_digit())
}

/// Parses an exact rational from an integer, plain decimal or `p/q` string.
///
/// Exponent notation and symbolic constants are refused: the first usually
/// comes from a binary float that has already lost exactness.
pub fn parse_rational(token: &str) -> Result<Rational64> {
    let token = token.trim();
    if token.is_empty() {
        return Err(Error::MatrixParse("empty entry".into()));
    }
    if let Some((p, q)) = token.split_once('/') {
        let p: i64 = p
            .trim()
            .parse()
            .map_err(|_| bad_entry(token))?;
        let q: i64 = q
            .trim()
            .parse()
            .map_err(|_| bad_entry(token))?;
        if q == 0 {
            return Err(Error::MatrixParse(format!("zero denominator in `{token}`")));
        }
        return Ok(Rational64::new(p, q));
    }
    let (negative, body) = match token.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, token.strip_prefix('+').unwrap_or(token)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    let digits_ok = |s: &str| s.chars().all(|c| c.is_ascii_digit());
    if (int_part.is_empty() && frac_part.is_empty()) || !digits_ok(int_part) || !digits_ok(frac_part)
    {
        return Err(bad_entry(token));
    }
    let scale = 10i64
        .checked_pow(frac_part.len() as u32)
        .ok_or(Error::Overflow)?;
    let int_val: i64 = if int_part.is_empty() {
        0
    } else {
        int_part.parse().map_err(|_| Error::Overflow)?
    };
    let frac_val: i64 = if frac_part.is_empty() {
        0
    } else {
        frac_part.parse().map_err(|_| Error::Overflow)?
    };
    let numer = int_val
        .checked_mul(scale)
        .and_then(|v| v.checked_add(frac_val))
        .ok_or(Error::Overflow)?;
    let value = Rational64::new(numer, scale);
    Ok(if negative { -value } else { value })
}

fn bad_entry(token: &str) -> Error {
    if looks_irrational(token) {
        Error::IrrationalEntries {
            entry: token.to_string(),
        }
    } else {
        Error::MatrixParse(format!("`{token}` is not a decimal or p/q number"))
    }
}

/// Serde helper: rationals as `"p/q"` strings.
pub mod rational_string {
    use super::*;

    pub fn serialize<S: Serializer>(a: &Rational64, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rational(*a))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational64, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

impl Serialize for LossMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = self
            .entries
            .iter()
            .map(|row| row.iter().map(|a| fmt_rational(*a)).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LossMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<String>>::deserialize(d)?;
        if rows.len() != 2 || rows.iter().any(|r| r.len() != 2) {
            return Err(serde::de::Error::custom("loss matrix must be 2x2"));
        }
        let mut entries = [[Rational64::zero(); 2]; 2];
        for (r, row) in rows.iter().enumerate() {
            for (c, cell) in row.iter().enumerate() {
                entries[r][c] = parse_rational(cell).map_err(serde::de::Error::custom)?;
            }
        }
        Ok(Self { entries })
    }
}

/// Value of the zero-sum stage game to the maximizing column player.
pub fn minimax_value(a: &LossMatrix) -> Rational64 {
    let e = a.entries();
    let d1 = e[0][0] - e[1][0];
    let d2 = e[0][1] - e[1][1];
    let dd1 = e[0][0] - e[0][1];
    let dd2 = e[1][0] - e[1][1];
    let mixed = (d1 * d2).is_negative() && (dd1 * dd2).is_negative();
    if mixed {
        let num = e[0][0] * e[1][1] - e[0][1] * e[1][0];
        let den = e[0][0] + e[1][1] - e[0][1] - e[1][0];
        num / den
    } else {
        // Saddle point exists: min over rows of the row maximum.
        let row_max = |r: usize| std::cmp::max(e[r][0], e[r][1]);
        std::cmp::min(row_max(0), row_max(1))
    }
}

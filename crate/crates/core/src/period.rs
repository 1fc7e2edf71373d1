//! Eventual-period detection on exact sequences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodReport<T = i64> {
    /// 0-based index where the periodic suffix starts.
    pub preperiod: usize,
    /// Same position as a 1-based time.
    pub start_time: usize,
    pub period: usize,
    /// One cycle, read from `preperiod`.
    pub cycle: Vec<T>,
    /// At least two full periods follow the start.
    pub certified: bool,
}

/// Earliest start of a `period`-periodic suffix, or `None` if fewer than one
/// comparison is possible.
fn suffix_start<T: PartialEq>(seq: &[T], period: usize) -> Option<usize> {
    let n = seq.len();
    if period == 0 || period >= n {
        return None;
    }
    let mut start = 0;
    for t in (0..n - period).rev() {
        if seq[t] != seq[t + period] {
            start = t + 1;
            break;
        }
    }
    (start + period < n).then_some(start)
}

/// Smallest `(start, period)` with `seq[t + period] == seq[t]` for all
/// `t ≥ start`, among periods up to `len/2`.
///
/// Candidates followed by two full periods are preferred; a shorter tail only
/// wins when nothing certifiable exists. Because the minimum is taken
/// lexicographically, no proper divisor of the returned period works from the
/// same start.
pub fn detect_period<T: PartialEq + Clone>(seq: &[T]) -> Result<PeriodReport<T>> {
    let n = seq.len();
    if n < 3 {
        return Err(Error::NoPeriodFound { len: n });
    }
    let mut certified: Option<(usize, usize)> = None;
    let mut loose: Option<(usize, usize)> = None;
    for period in 1..=n / 2 {
        let Some(start) = suffix_start(seq, period) else {
            continue;
        };
        let slot = if n - start >= 2 * period {
            &mut certified
        } else {
            &mut loose
        };
        if slot.is_none_or(|best| (start, period) < best) {
            *slot = Some((start, period));
        }
    }
    let (start, period, ok) = match (certified, loose) {
        (Some((s, p)), _) => (s, p, true),
        (None, Some((s, p))) => (s, p, false),
        (None, None) => return Err(Error::NoPeriodFound { len: n }),
    };
    debug_assert!(is_least_period(&seq[start..], period));
    Ok(PeriodReport {
        preperiod: start,
        start_time: start + 1,
        period,
        cycle: seq[start..start + period].to_vec(),
        certified: ok,
    })
}

/// Whether `period` is the least period of the whole of `seq`, checked on
/// every proper divisor.
pub fn is_least_period<T: PartialEq>(seq: &[T], period: usize) -> bool {
    let periodic = |p: usize| (0..seq.len().saturating_sub(p)).all(|t| seq[t] == seq[t + p]);
    periodic(period) && (1..period).filter(|d| period.is_multiple_of(*d)).all(|d| !periodic(d))
}

//! Growth guard for the round schedule.

use crate::coding::CodingError;
use crate::exchange::RoundSchedule;

/// Documented bounds on `τ(r) / (r·log2(n·r/δ))` for `2 <= r <= 10^4`.
pub const TAU_RATIO_BOUNDS: (f64, f64) = (TAU_RATIO_LOW, TAU_RATIO_HIGH);
const TAU_RATIO_LOW: f64 = 1000.0;
const TAU_RATIO_HIGH: f64 = 4000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleCheck {
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// First round where the recurrence failed, if any.
    pub recurrence_break: Option<u64>,
}

impl ScheduleCheck {
    pub fn within_bounds(&self) -> bool {
        self.recurrence_break.is_none() && self.min_ratio >= TAU_RATIO_BOUNDS.0 && self.max_ratio <= TAU_RATIO_BOUNDS.1
    }
}

/// Walks rounds `1..=r_max`, checking `τ(r) = τ(r-1) + 4·w_{r-1}` and
/// tracking the ratio for `r >= 2`.
pub fn check_schedule(n: usize, delta: f64, r_max: u64) -> Result<ScheduleCheck, CodingError> {
    let mut s = RoundSchedule::new(n, delta)?;
    let mut out = ScheduleCheck { min_ratio: f64::INFINITY, max_ratio: 0.0, recurrence_break: None };
    let mut prev = s.start(1);
    if prev != 1 {
        out.recurrence_break = Some(1);
    }
    for r in 2..=r_max {
        let w = s.params(r - 1).word_len as u64;
        let tau = s.start(r);
        if tau != prev + 4 * w && out.recurrence_break.is_none() {
            out.recurrence_break = Some(r);
        }
        let ratio = tau as f64 / (r as f64 * (n as f64 * r as f64 / delta).log2());
        out.min_ratio = out.min_ratio.min(ratio);
        out.max_ratio = out.max_ratio.max(ratio);
        prev = tau;
    }
    Ok(out)
}

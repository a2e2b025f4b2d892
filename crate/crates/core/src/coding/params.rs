//! Per-round sizes.
//!
//! With `x_r = n·π·r/√δ`:
//!
//! ```text
//! κ_r   = 2·⌈log2(4·x_r)⌉
//! η_r   = δ / (2·n²·π²·r²)
//! pad_r = max(95, 38·⌈log2(2·x_r)⌉)
//! w_r   = max(300·⌈log2(n·r/δ)⌉, longest encoded payload + pad_r)
//! ```

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::word::WordLayout;
use super::CodingError;

/// Smallest padding for which the anti-silence tail bound applies.
pub const MIN_PAD: usize = 95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundParams {
    pub round: u64,
    pub n: usize,
    pub delta: f64,
    pub word_len: usize,
    pub key_len: usize,
    pub eta: f64,
    pub pad_len: usize,
}

/// Smallest `k >= 0` with `2^k >= x`, compared exactly in floating point.
pub fn ceil_log2(x: f64) -> u32 {
    let mut k = 0u32;
    while 2f64.powi(k as i32) < x {
        k += 1;
    }
    k
}

pub fn round_params(n: usize, delta: f64, round: u64) -> Result<RoundParams, CodingError> {
    if n < 2 {
        return Err(CodingError::InvalidParams(format!("n = {n} < 2")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(CodingError::InvalidParams(format!("delta = {delta} outside (0, 1)")));
    }
    if round == 0 {
        return Err(CodingError::InvalidParams("rounds start at 1".into()));
    }
    let (nf, rf) = (n as f64, round as f64);
    let x = nf * PI * rf / delta.sqrt();
    let key_len = 2 * ceil_log2(4.0 * x) as usize;
    let eta = delta / (2.0 * nf * nf * PI * PI * rf * rf);
    let pad_len = MIN_PAD.max(38 * ceil_log2(2.0 * x) as usize);
    let base = 300 * ceil_log2(nf * rf / delta) as usize;
    let mut params = RoundParams {
        round,
        n,
        delta,
        word_len: 0,
        key_len,
        eta,
        pad_len,
    };
    let longest = WordLayout::longest_region(&params)?;
    params.word_len = base.max(longest + pad_len);
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_round() {
        let p = round_params(2, 0.1, 1).unwrap();
        assert_eq!(300 * ceil_log2(20.0), 1500);
        assert_eq!(p.key_len, 14);
        assert!((p.eta - 1.2665e-3).abs() < 1e-6, "{}", p.eta);
        assert_eq!(p.pad_len, 228);
        assert!(p.word_len >= 1500);
    }

    #[test]
    fn ceil_log2_is_exact_at_powers() {
        assert_eq!(ceil_log2(1.0), 0);
        assert_eq!(ceil_log2(16.0), 4);
        assert_eq!(ceil_log2(16.000001), 5);
        assert_eq!(ceil_log2(20.0), 5);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(round_params(1, 0.1, 1).is_err());
        assert!(round_params(2, 0.0, 1).is_err());
        assert!(round_params(2, 1.0, 1).is_err());
        assert!(round_params(2, 0.1, 0).is_err());
    }

    #[test]
    fn monotone_in_round() {
        for (n, delta) in [(2usize, 0.1), (8, 0.01), (5, 0.5)] {
            let mut prev = round_params(n, delta, 1).unwrap();
            for r in 2..=300 {
                let p = round_params(n, delta, r).unwrap();
                assert!(p.word_len >= prev.word_len);
                assert!(p.key_len >= prev.key_len);
                assert!(p.pad_len >= prev.pad_len);
                assert!(p.eta < prev.eta);
                prev = p;
            }
        }
    }
}

//! Algebraic manipulation detection codes.
//!
//! Polynomial construction over GF(2^b): the message is cut into `d` field
//! elements `s_1..s_d` (b bits each, last one zero-filled, `d` forced odd), a
//! fresh random nonce `x` is drawn, and the codeword is
//!
//! ```text
//! m ‖ x ‖ f(x, s)      f(x, s) = x^(d+2) + Σ s_i·x^i
//! ```
//!
//! with `b = ⌈log2(1/η)⌉`, so the tag costs exactly `2·⌈log2(1/η)⌉` bits.
//! `d + 2` must be odd in characteristic two, which is why `d` is rounded up.
//!
//! For a *uniformly random* nonzero offset the tampered string is accepted with
//! probability at most `2^-b <= η`. For a *fixed* offset the guarantee is
//! `(d + 1)/2^b` over the nonce (see [`fixed_offset_bound`]);
//! [`AmdStrength::hardened_for`] picks `b` large enough that this worst case is
//! also below a target.

use rand::Rng;

use super::gf2m::{Gf2m, MAX_DEGREE};
use super::CodingError;
use crate::bits::BitString;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmdStrength {
    eta: f64,
    symbol_bits: u32,
}

impl AmdStrength {
    pub fn new(eta: f64) -> Result<Self, CodingError> {
        if !(eta > 0.0 && eta <= 0.5) {
            return Err(CodingError::InvalidStrength(eta));
        }
        // smallest b with 2^-b <= eta; powers of two are exact in f64
        let mut b = 1u32;
        while 0.5f64.powi(b as i32) > eta {
            b += 1;
            if b > MAX_DEGREE {
                return Err(CodingError::InvalidStrength(eta));
            }
        }
        Ok(Self { eta, symbol_bits: b })
    }

    /// Strength with `2^-b` as small as needed for the fixed-offset bound
    /// `(d + 1)/2^b` of a `message_bits`-long message to stay at or below `eta`.
    pub fn hardened_for(message_bits: usize, eta: f64) -> Result<Self, CodingError> {
        let mut b = Self::new(eta)?.symbol_bits;
        loop {
            let d = symbol_count(message_bits, b) as f64;
            if (d + 1.0) * 0.5f64.powi(b as i32) <= eta {
                return Self::new(0.5f64.powi(b as i32));
            }
            b += 1;
            if b > MAX_DEGREE {
                return Err(CodingError::InvalidStrength(eta));
            }
        }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn symbol_bits(&self) -> u32 {
        self.symbol_bits
    }

    pub fn tag_bits(&self) -> usize {
        2 * self.symbol_bits as usize
    }

    pub fn codeword_len(&self, message_bits: usize) -> usize {
        message_bits + self.tag_bits()
    }
}

/// Number of field elements the message occupies, rounded up to an odd count.
fn symbol_count(message_bits: usize, b: u32) -> usize {
    let d = message_bits.div_ceil(b as usize);
    if d.is_multiple_of(2) {
        d + 1
    } else {
        d
    }
}

/// Worst-case acceptance probability of a fixed nonzero offset.
pub fn fixed_offset_bound(message_bits: usize, strength: AmdStrength) -> f64 {
    let b = strength.symbol_bits();
    (symbol_count(message_bits, b) as f64 + 1.0) * 0.5f64.powi(b as i32)
}

fn tag(field: &Gf2m, message: &BitString, nonce: u64) -> u64 {
    let b = field.degree() as usize;
    let d = symbol_count(message.len(), field.degree());
    let symbol = |i: usize| -> u64 {
        // s_i for i in 1..=d, bits [(i-1)·b, i·b) zero-filled past the end
        let start = (i - 1) * b;
        (0..b).fold(0u64, |acc, k| {
            let pos = start + k;
            (acc << 1) | (pos < message.len() && message.get(pos)) as u64
        })
    };
    // Horner over coefficients x^(d+2) .. x^0: 1, 0, s_d, ..., s_1, 0
    let mut acc = field.mul(1, nonce); // 1·x + 0
    for i in (1..=d).rev() {
        acc = field.mul(acc, nonce) ^ symbol(i);
    }
    field.mul(acc, nonce)
}

pub fn amd_encode_with_nonce(message: &BitString, strength: AmdStrength, nonce: u64) -> BitString {
    let field = Gf2m::new(strength.symbol_bits());
    let nonce = nonce & field.mask();
    let b = strength.symbol_bits() as usize;
    let mut out = BitString::with_capacity(strength.codeword_len(message.len()));
    out.extend_from(message);
    out.push_uint(nonce, b);
    out.push_uint(tag(&field, message, nonce), b);
    out
}

pub fn amd_encode<R: Rng + ?Sized>(
    message: &BitString,
    strength: AmdStrength,
    rng: &mut R,
) -> Result<BitString, CodingError> {
    if message.is_empty() {
        return Err(CodingError::EmptyMessage);
    }
    Ok(amd_encode_with_nonce(message, strength, rng.gen()))
}

pub fn amd_is_codeword(codeword: &BitString, strength: AmdStrength) -> bool {
    amd_decode(codeword, strength).is_some()
}

/// The message of a valid codeword, or `None` when the tag does not verify.
pub fn amd_decode(codeword: &BitString, strength: AmdStrength) -> Option<BitString> {
    let b = strength.symbol_bits() as usize;
    if codeword.len() < 2 * b + 1 {
        return None;
    }
    let message_len = codeword.len() - 2 * b;
    let message = codeword.slice(0, message_len);
    let nonce = codeword.read_uint(message_len, b);
    let claimed = codeword.read_uint(message_len + b, b);
    let field = Gf2m::new(strength.symbol_bits());
    (tag(&field, &message, nonce) == claimed).then_some(message)
}

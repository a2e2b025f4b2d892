//! Codes and word-level framing.

mod amd;
mod ecc;
pub mod gf256;
pub mod gf2m;
mod params;
mod silence;
mod word;

use thiserror::Error;

pub use amd::{
    amd_decode, amd_encode, amd_encode_with_nonce, amd_is_codeword, fixed_offset_bound,
    AmdStrength,
};
pub use ecc::{ec_decode, ec_encode, ec_len, EcCode, C_1, C_2, C_E, INNER_BITS};
pub use params::{ceil_log2, round_params, RoundParams, MIN_PAD};
pub use silence::is_silence;
pub use word::{decode_word, encode_word, serialize, deserialize, Payload, PayloadKind, WordLayout};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodingError {
    #[error("AMD strength {0} outside (0, 1/2] or beyond the supported field size")]
    InvalidStrength(f64),
    #[error("cannot encode an empty message")]
    EmptyMessage,
    #[error("expected {expected} bits, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("too many errors to decode")]
    Uncorrectable,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("payload field of {actual} bits exceeds the {limit}-bit limit")]
    PayloadTooLarge { limit: usize, actual: usize },
}

//! The word codec.
//!
//! A payload is serialized to a fixed-width bit string that depends only on
//! its kind and the round's key length `κ` (integers MSB first):
//!
//! | kind           | tag  | fields                                              |
//! |----------------|------|-----------------------------------------------------|
//! | `Raw`          | `00` | content (κ) ‖ key (κ)                               |
//! | `KeyRequest`   | `01` | key (κ)                                             |
//! | `KeyReply`     | `10` | fresh key (κ) ‖ echoed key (κ)                      |
//! | `MessageChunk` | `11` | chunk length (bit width of κ) ‖ chunk, zero-filled to κ ‖ parity (1) ‖ key (κ) |
//!
//! The serialized string `x` becomes the word
//!
//! ```text
//! ec_encode(amd_encode(x, η)) ‖ uniformly random padding up to w_r
//! ```
//!
//! where `η` is the smallest power of two at or below `η_r` whose fixed-offset
//! bound for `|x|` is still at most `η_r`. The decoder is told which kind to
//! expect, which fixes `|x|`, the ECC region, and so the padding boundary.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::amd::{amd_decode, amd_encode, AmdStrength};
use super::ecc::EcCode;
use super::params::RoundParams;
use super::CodingError;
use crate::bits::BitString;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PayloadKind {
    Raw,
    KeyRequest,
    KeyReply,
    MessageChunk,
}

impl PayloadKind {
    pub const ALL: [PayloadKind; 4] = [
        PayloadKind::Raw,
        PayloadKind::KeyRequest,
        PayloadKind::KeyReply,
        PayloadKind::MessageChunk,
    ];

    fn tag(self) -> u64 {
        match self {
            PayloadKind::Raw => 0b00,
            PayloadKind::KeyRequest => 0b01,
            PayloadKind::KeyReply => 0b10,
            PayloadKind::MessageChunk => 0b11,
        }
    }

    /// Serialized length for key length `key_len`.
    pub fn serialized_len(self, key_len: usize) -> usize {
        2 + match self {
            PayloadKind::Raw => 2 * key_len,
            PayloadKind::KeyRequest => key_len,
            PayloadKind::KeyReply => 2 * key_len,
            PayloadKind::MessageChunk => length_field_width(key_len) + 2 * key_len + 1,
        }
    }
}

fn length_field_width(key_len: usize) -> usize {
    (usize::BITS - key_len.leading_zeros()) as usize
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Payload {
    Raw { content: BitString, key: BitString },
    KeyRequest { key: BitString },
    /// `fresh` is the replier's new key, `key` echoes the requester's.
    KeyReply { fresh: BitString, key: BitString },
    MessageChunk { chunk: BitString, parity: bool, key: BitString },
}

impl Payload {
    pub fn kind(&self) -> PayloadKind {
        match self {
            Payload::Raw { .. } => PayloadKind::Raw,
            Payload::KeyRequest { .. } => PayloadKind::KeyRequest,
            Payload::KeyReply { .. } => PayloadKind::KeyReply,
            Payload::MessageChunk { .. } => PayloadKind::MessageChunk,
        }
    }

    pub fn key(&self) -> &BitString {
        match self {
            Payload::Raw { key, .. }
            | Payload::KeyRequest { key }
            | Payload::KeyReply { key, .. }
            | Payload::MessageChunk { key, .. } => key,
        }
    }
}

fn check_len(field: &BitString, expected: usize) -> Result<(), CodingError> {
    if field.len() != expected {
        return Err(CodingError::LengthMismatch {
            expected,
            actual: field.len(),
        });
    }
    Ok(())
}

pub fn serialize(payload: &Payload, key_len: usize) -> Result<BitString, CodingError> {
    let kind = payload.kind();
    let mut out = BitString::with_capacity(kind.serialized_len(key_len));
    out.push_uint(kind.tag(), 2);
    check_len(payload.key(), key_len)?;
    match payload {
        Payload::Raw { content, key } => {
            check_len(content, key_len)?;
            out.extend_from(content);
            out.extend_from(key);
        }
        Payload::KeyRequest { key } => out.extend_from(key),
        Payload::KeyReply { fresh, key } => {
            check_len(fresh, key_len)?;
            out.extend_from(fresh);
            out.extend_from(key);
        }
        Payload::MessageChunk { chunk, parity, key } => {
            if chunk.len() > key_len {
                return Err(CodingError::PayloadTooLarge {
                    limit: key_len,
                    actual: chunk.len(),
                });
            }
            out.push_uint(chunk.len() as u64, length_field_width(key_len));
            out.extend_from(chunk);
            out.extend_from(&BitString::zeros(key_len - chunk.len()));
            out.push(*parity);
            out.extend_from(key);
        }
    }
    Ok(out)
}

/// Inverse of [`serialize`]; `None` on a wrong tag or malformed chunk field.
pub fn deserialize(bits: &BitString, kind: PayloadKind, key_len: usize) -> Option<Payload> {
    if bits.len() != kind.serialized_len(key_len) || bits.read_uint(0, 2) != kind.tag() {
        return None;
    }
    let k = key_len;
    let field = |start: usize| bits.slice(start, start + k);
    Some(match kind {
        PayloadKind::Raw => Payload::Raw {
            content: field(2),
            key: field(2 + k),
        },
        PayloadKind::KeyRequest => Payload::KeyRequest { key: field(2) },
        PayloadKind::KeyReply => Payload::KeyReply {
            fresh: field(2),
            key: field(2 + k),
        },
        PayloadKind::MessageChunk => {
            let width = length_field_width(k);
            let len = bits.read_uint(2, width) as usize;
            if len > k {
                return None;
            }
            let body = field(2 + width);
            if !body.slice(len, k).is_zero() {
                return None;
            }
            Payload::MessageChunk {
                chunk: body.slice(0, len),
                parity: bits.get(2 + width + k),
                key: field(3 + width + k),
            }
        }
    })
}

/// Sizes of the nested encodings of one payload kind in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct WordLayout {
    pub kind: PayloadKind,
    pub payload_bits: usize,
    pub strength: AmdStrength,
    pub code: EcCode,
}

impl WordLayout {
    pub fn new(params: &RoundParams, kind: PayloadKind) -> Result<Self, CodingError> {
        let payload_bits = kind.serialized_len(params.key_len);
        let strength = AmdStrength::hardened_for(payload_bits, params.eta)?;
        let code = EcCode::new(strength.codeword_len(payload_bits))?;
        Ok(Self {
            kind,
            payload_bits,
            strength,
            code,
        })
    }

    pub fn amd_bits(&self) -> usize {
        self.strength.codeword_len(self.payload_bits)
    }

    /// Length of the ECC region at the start of the word.
    pub fn region_bits(&self) -> usize {
        self.code.len()
    }

    pub(crate) fn longest_region(params: &RoundParams) -> Result<usize, CodingError> {
        PayloadKind::ALL
            .iter()
            .map(|&k| Self::new(params, k).map(|l| l.region_bits()))
            .try_fold(0, |acc, r| r.map(|r| acc.max(r)))
    }
}

/// `𝓔`: a full word of exactly `params.word_len` bits.
pub fn encode_word<R: Rng + ?Sized>(
    payload: &Payload,
    params: &RoundParams,
    rng: &mut R,
) -> Result<BitString, CodingError> {
    let layout = WordLayout::new(params, payload.kind())?;
    let x = serialize(payload, params.key_len)?;
    let amd = amd_encode(&x, layout.strength, rng)?;
    let mut word = layout.code.encode(&amd);
    if word.len() + params.pad_len > params.word_len {
        return Err(CodingError::PayloadTooLarge {
            limit: params.word_len - params.pad_len,
            actual: word.len(),
        });
    }
    word.extend_from(&BitString::random(params.word_len - word.len(), rng));
    Ok(word)
}

/// `𝓓`: the payload, or `None` when the word does not decode and verify.
pub fn decode_word(word: &BitString, params: &RoundParams, expected: PayloadKind) -> Option<Payload> {
    if word.len() != params.word_len {
        return None;
    }
    let layout = WordLayout::new(params, expected).ok()?;
    let region = word.slice(0, layout.region_bits());
    let amd = layout.code.decode(&region).ok()?;
    let x = amd_decode(&amd, layout.strength)?;
    deserialize(&x, expected, params.key_len)
}

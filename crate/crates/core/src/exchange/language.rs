//! Prefix-free message languages.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Completeness {
    Complete,
    ProperPrefix,
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Language {
    /// All strings of exactly this many bits.
    FixedLength(usize),
    /// A `header_bits`-wide big-endian length `ℓ` followed by `ℓ` bits.
    LengthPrefixed { header_bits: usize },
    /// A finite prefix-free set.
    Explicit(BTreeSet<BitString>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LanguageError {
    #[error("fixed length must be positive")]
    ZeroLength,
    #[error("length header must be 1 to 32 bits")]
    BadHeader,
    #[error("explicit language is empty or contains the empty string")]
    EmptyWord,
    #[error("{0} is a prefix of {1}")]
    NotPrefixFree(BitString, BitString),
}

impl Language {
    pub fn fixed(len: usize) -> Result<Self, LanguageError> {
        if len == 0 {
            return Err(LanguageError::ZeroLength);
        }
        Ok(Language::FixedLength(len))
    }

    pub fn length_prefixed(header_bits: usize) -> Result<Self, LanguageError> {
        if !(1..=32).contains(&header_bits) {
            return Err(LanguageError::BadHeader);
        }
        Ok(Language::LengthPrefixed { header_bits })
    }

    pub fn explicit(words: impl IntoIterator<Item = BitString>) -> Result<Self, LanguageError> {
        let set: BTreeSet<BitString> = words.into_iter().collect();
        if set.is_empty() || set.iter().any(BitString::is_empty) {
            return Err(LanguageError::EmptyWord);
        }
        for a in &set {
            for b in &set {
                if a != b && a.len() < b.len() && b.slice(0, a.len()) == *a {
                    return Err(LanguageError::NotPrefixFree(a.clone(), b.clone()));
                }
            }
        }
        Ok(Language::Explicit(set))
    }

    pub fn is_complete(&self, s: &BitString) -> Completeness {
        match self {
            Language::FixedLength(k) => match s.len().cmp(k) {
                std::cmp::Ordering::Less => Completeness::ProperPrefix,
                std::cmp::Ordering::Equal => Completeness::Complete,
                std::cmp::Ordering::Greater => Completeness::Invalid,
            },
            Language::LengthPrefixed { header_bits } => {
                let h = *header_bits;
                if s.len() < h {
                    return Completeness::ProperPrefix;
                }
                let total = h + s.read_uint(0, h) as usize;
                match s.len().cmp(&total) {
                    std::cmp::Ordering::Less => Completeness::ProperPrefix,
                    std::cmp::Ordering::Equal => Completeness::Complete,
                    std::cmp::Ordering::Greater => Completeness::Invalid,
                }
            }
            Language::Explicit(set) => {
                if set.contains(s) {
                    Completeness::Complete
                } else if set.iter().any(|w| w.len() > s.len() && w.slice(0, s.len()) == *s) {
                    Completeness::ProperPrefix
                } else {
                    Completeness::Invalid
                }
            }
        }
    }

    pub fn contains(&self, s: &BitString) -> bool {
        self.is_complete(s) == Completeness::Complete
    }

    /// Frames `body` as a member of a length-prefixed language.
    pub fn frame(header_bits: usize, body: &BitString) -> BitString {
        assert!(header_bits <= 32 && (body.len() as u64) < (1u64 << header_bits), "body too long for header");
        let mut out = BitString::from_uint(body.len() as u64, header_bits);
        out.extend_from(body);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bits(s: &str) -> BitString {
        BitString::parse(s).unwrap()
    }

    #[test]
    fn explicit_languages_must_be_prefix_free() {
        assert!(Language::explicit([bits("0"), bits("10"), bits("11")]).is_ok());
        assert!(matches!(
            Language::explicit([bits("1"), bits("10")]),
            Err(LanguageError::NotPrefixFree(_, _))
        ));
        assert!(Language::explicit([BitString::new()]).is_err());
        let l = Language::explicit([bits("0"), bits("10"), bits("110")]).unwrap();
        assert_eq!(l.is_complete(&bits("1")), Completeness::ProperPrefix);
        assert_eq!(l.is_complete(&bits("111")), Completeness::Invalid);
        assert_eq!(l.is_complete(&BitString::new()), Completeness::ProperPrefix);
    }

    #[test]
    fn fixed_and_prefixed() {
        let f = Language::fixed(3).unwrap();
        assert_eq!(f.is_complete(&bits("10")), Completeness::ProperPrefix);
        assert_eq!(f.is_complete(&bits("101")), Completeness::Complete);
        assert_eq!(f.is_complete(&bits("1011")), Completeness::Invalid);
        let p = Language::length_prefixed(4).unwrap();
        let m = Language::frame(4, &bits("110"));
        assert_eq!(m.to_string(), "0011110");
        assert!(p.contains(&m));
        assert_eq!(p.is_complete(&m.slice(0, 5)), Completeness::ProperPrefix);
        assert!(p.contains(&bits("0000")));
    }

    proptest! {
        /// Every proper prefix of a framed message reads as a proper prefix.
        #[test]
        fn framed_prefixes(len in 0usize..40, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let body = BitString::random(len, &mut rng);
            let m = Language::frame(6, &body);
            let l = Language::length_prefixed(6).unwrap();
            for cut in 0..m.len() {
                prop_assert_eq!(l.is_complete(&m.slice(0, cut)), Completeness::ProperPrefix);
            }
            prop_assert_eq!(l.is_complete(&m), Completeness::Complete);
        }
    }
}

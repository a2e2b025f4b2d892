use crate::bits::BitString;

/// A window reads as silence when it has fewer than `|s|/3` alternations.
pub fn is_silence(s: &BitString) -> bool {
    3 * s.alternations() < s.len()
}

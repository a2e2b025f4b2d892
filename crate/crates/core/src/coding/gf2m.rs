//! Binary extension fields GF(2^b) for 1 <= b <= 64.
//!
//! Elements are `u64` values holding polynomial coefficients over GF(2)
//! (bit `i` is the coefficient of `x^i`). The reducing polynomial for each
//! degree is the lexicographically smallest irreducible `x^b + low`, found by
//! search on first use and cached.

use std::sync::OnceLock;

pub const MAX_DEGREE: u32 = 64;

static MODULI: [OnceLock<u64>; MAX_DEGREE as usize + 1] = [const { OnceLock::new() }; MAX_DEGREE as usize + 1];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gf2m {
    degree: u32,
    /// Reducing polynomial without its leading `x^degree` term.
    low: u64,
}

impl Gf2m {
    pub fn new(degree: u32) -> Self {
        assert!(
            (1..=MAX_DEGREE).contains(&degree),
            "field degree {degree} out of range"
        );
        let low = *MODULI[degree as usize].get_or_init(|| find_irreducible(degree));
        Self { degree, low }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn order(&self) -> u128 {
        1u128 << self.degree
    }

    pub fn mask(&self) -> u64 {
        if self.degree == 64 {
            u64::MAX
        } else {
            (1u64 << self.degree) - 1
        }
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        a ^ b
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        mul_mod(a, b, self.degree, self.low)
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1u64;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }
}

fn mul_mod(mut a: u64, mut b: u64, degree: u32, low: u64) -> u64 {
    let mask = if degree == 64 {
        u64::MAX
    } else {
        (1u64 << degree) - 1
    };
    let top = degree - 1;
    let mut acc = 0u64;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        let carry = (a >> top) & 1 == 1;
        a = (a << 1) & mask;
        if carry {
            a ^= low;
        }
    }
    acc
}

fn poly_degree(p: u128) -> i32 {
    127 - p.leading_zeros() as i32
}

fn poly_mod(mut a: u128, m: u128) -> u128 {
    let dm = poly_degree(m);
    while a != 0 && poly_degree(a) >= dm {
        a ^= m << (poly_degree(a) - dm);
    }
    a
}

fn poly_gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let r = poly_mod(a, b);
        a = b;
        b = r;
    }
    a
}

/// Ben-Or test: `x^b + low` is irreducible iff `gcd(x^(2^i) - x, f) = 1` for `1 <= i <= b/2`.
fn is_irreducible(degree: u32, low: u64) -> bool {
    if low & 1 == 0 {
        return false; // divisible by x
    }
    let f = (1u128 << degree) | low as u128;
    let mut power = 0b10u64; // x
    if degree == 1 {
        return true;
    }
    for _ in 0..degree / 2 {
        power = mul_mod(power, power, degree, low);
        let g = poly_gcd(f, (power ^ 0b10) as u128);
        if g != 1 {
            return false;
        }
    }
    true
}

fn find_irreducible(degree: u32) -> u64 {
    if degree == 1 {
        return 1; // x + 1
    }
    (1u64..)
        .step_by(2)
        .find(|&low| is_irreducible(degree, low))
        .expect("irreducible polynomials exist in every degree")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_moduli() {
        // x^8 + x^4 + x^3 + x + 1 (AES) is the smallest degree-8 irreducible
        assert_eq!(Gf2m::new(8).low, 0x1b);
        assert_eq!(Gf2m::new(2).low, 0b11);
        assert_eq!(Gf2m::new(64).low, 0x1b);
    }

    #[test]
    fn nonzero_elements_have_inverses_in_small_fields() {
        for degree in 1..=8 {
            let f = Gf2m::new(degree);
            let q = f.order() as u64;
            for a in 1..q {
                // a^(q-1) = 1 in the multiplicative group
                assert_eq!(f.pow(a, q - 1), 1, "degree {degree}, a = {a}");
            }
        }
    }

    #[test]
    fn multiplication_distributes() {
        let f = Gf2m::new(37);
        let (a, b, c) = (0x1234_5678u64 & f.mask(), 0x0abc_def1 & f.mask(), 0x1357_9bdf & f.mask());
        assert_eq!(f.mul(a, b ^ c), f.mul(a, b) ^ f.mul(a, c));
        assert_eq!(f.mul(a, b), f.mul(b, a));
    }
}

//! Concatenated binary error-correcting code.
//!
//! Layout, for a message of `k` bits:
//!
//! 1. The message is packed into `K = ⌈k/8⌉` bytes (MSB first, zero-filled)
//!    and split into balanced segments of at most [`MAX_SEGMENT_SYMBOLS`].
//! 2. Each segment of `K_j` bytes is a polynomial of degree `< K_j` over
//!    GF(256), evaluated at `alpha^0 .. alpha^(N_j - 1)` with `N_j = 2·K_j + 4`
//!    (outer Reed–Solomon code, minimum distance `K_j + 5`).
//! 3. Every outer symbol is expanded with the Hadamard code of length 256
//!    (bit `x` of the block for symbol `a` is `parity(a & x)`); all nonzero
//!    inner codewords have weight exactly 128.
//! 4. The `M = 256·Σ N_j` concatenated bits are reordered by a fixed
//!    pseudo-random permutation that depends only on `M`.
//!
//! Every step is GF(2)-linear. Decoding is maximum-correlation per inner
//! block with ties reported as erasures, followed by bounded-distance
//! errors-and-erasures decoding of each outer segment. Both stages commute
//! with adding a codeword, so `decode(c ⊕ e) = decode(c) ⊕ decode(e)` whenever
//! either side succeeds.
//!
//! No binary code with more than four codewords has relative distance above
//! 2/3, so no code of this kind can correct *every* pattern of a third of its
//! bits. Patterns that do not exploit the code structure (random positions,
//! bursts, periodic masks) are corrected with overwhelming probability;
//! [`EcCode::misdirecting_offset`] builds a structured pattern that is not.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gf256;
use super::CodingError;
use crate::bits::BitString;

pub const INNER_BITS: usize = 256;
pub const MAX_SEGMENT_SYMBOLS: usize = 85;

/// Upper bound on `|ec_encode(m)| / |m|` over all `|m| >= 1` (reached at `|m| = 1`).
pub const C_E: usize = 1536;
pub const C_1: usize = 12 * C_E + 76;
pub const C_2: usize = 32 * C_E + 115;

/// Bits of the inner block that flip one inner decision to a chosen neighbour.
const MISDIRECT_BITS_PER_BLOCK: usize = INNER_BITS / 4 + 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Segment {
    data: usize,
    total: usize,
}

#[derive(Clone, PartialEq, Eq)]
pub struct EcCode {
    message_bits: usize,
    segments: Vec<Segment>,
    blocks: usize,
    permutation: Arc<[u32]>,
}

impl fmt::Debug for EcCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EcCode")
            .field("message_bits", &self.message_bits)
            .field("segments", &self.segments)
            .field("len", &self.len())
            .finish()
    }
}

impl EcCode {
    pub fn new(message_bits: usize) -> Result<Self, CodingError> {
        if message_bits == 0 {
            return Err(CodingError::EmptyMessage);
        }
        let symbols = message_bits.div_ceil(8);
        let count = symbols.div_ceil(MAX_SEGMENT_SYMBOLS);
        let (base, extra) = (symbols / count, symbols % count);
        let segments: Vec<Segment> = (0..count)
            .map(|j| {
                let data = base + usize::from(j < extra);
                Segment {
                    data,
                    total: 2 * data + 4,
                }
            })
            .collect();
        let blocks = segments.iter().map(|s| s.total).sum();
        let permutation = permutation(blocks * INNER_BITS);
        Ok(Self {
            message_bits,
            segments,
            blocks,
            permutation,
        })
    }

    pub fn message_bits(&self) -> usize {
        self.message_bits
    }

    pub fn len(&self) -> usize {
        self.blocks * INNER_BITS
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn position(&self, pre: usize) -> usize {
        self.permutation[pre] as usize
    }

    pub fn encode(&self, message: &BitString) -> BitString {
        assert_eq!(message.len(), self.message_bits, "message length mismatch");
        let bytes = message.to_bytes_msb();
        let mut out = BitString::zeros(self.len());
        let mut block = 0usize;
        let mut consumed = 0usize;
        for seg in &self.segments {
            let coeffs = &bytes[consumed..consumed + seg.data];
            consumed += seg.data;
            for i in 0..seg.total {
                let symbol = poly_eval(coeffs, gf256::alpha_pow(i));
                self.write_block(&mut out, block, symbol);
                block += 1;
            }
        }
        out
    }

    fn write_block(&self, out: &mut BitString, block: usize, symbol: u8) {
        if symbol == 0 {
            return;
        }
        for x in 0..INNER_BITS {
            if (symbol as usize & x).count_ones() & 1 == 1 {
                out.set(self.position(block * INNER_BITS + x), true);
            }
        }
    }

    fn read_block(&self, word: &BitString, block: usize) -> [i32; INNER_BITS] {
        let mut v = [0i32; INNER_BITS];
        for (x, slot) in v.iter_mut().enumerate() {
            *slot = if word.get(self.position(block * INNER_BITS + x)) {
                -1
            } else {
                1
            };
        }
        v
    }

    pub fn decode(&self, word: &BitString) -> Result<BitString, CodingError> {
        if word.len() != self.len() {
            return Err(CodingError::LengthMismatch {
                expected: self.len(),
                actual: word.len(),
            });
        }
        let mut bytes = Vec::with_capacity(self.message_bits.div_ceil(8));
        let mut block = 0usize;
        for seg in &self.segments {
            let received: Vec<Option<u8>> = (0..seg.total)
                .map(|i| hadamard_decode(self.read_block(word, block + i)))
                .collect();
            block += seg.total;
            let coeffs = rs_decode(&received, seg.data).ok_or(CodingError::Uncorrectable)?;
            bytes.extend_from_slice(&coeffs);
        }
        let message = BitString::from_bytes_msb(&bytes, self.message_bits);
        // bits past the message in the last byte belong to the zero-filled tail
        let tail = BitString::from_bytes_msb(&bytes, bytes.len() * 8);
        if tail.slice(self.message_bits, tail.len()).count_ones() != 0 {
            return Err(CodingError::Uncorrectable);
        }
        Ok(message)
    }

    /// A structured offset of weight `65·(K_0 + 5)` (well under a third of the
    /// codeword) that moves the decoding of *every* codeword `c` to `c ⊕ c*`
    /// for a nonzero codeword `c*` chosen at random.
    ///
    /// It is built from a minimum-weight outer codeword of segment 0: on each
    /// of its `K_0 + 5` nonzero positions, 65 bits of the corresponding inner
    /// codeword are flipped, which is just past half of its weight, so maximum
    /// correlation decoding lands on the neighbour.
    pub fn misdirecting_offset<R: Rng + ?Sized>(&self, rng: &mut R) -> BitString {
        let seg = self.segments[0];
        // P(x) = c · Π (x - x_z) over K_0 - 1 random roots
        let roots: Vec<usize> = sample(rng, seg.total, seg.data - 1).into_vec();
        let mut poly = vec![rng.gen_range(1..=255u8)];
        for &z in &roots {
            poly = poly_mul_linear(&poly, gf256::alpha_pow(z));
        }
        let mut offset = BitString::zeros(self.len());
        for i in 0..seg.total {
            let symbol = poly_eval(&poly, gf256::alpha_pow(i));
            if symbol == 0 {
                continue;
            }
            let support: Vec<usize> = (0..INNER_BITS)
                .filter(|&x| (symbol as usize & x).count_ones() & 1 == 1)
                .collect();
            for k in sample(rng, support.len(), MISDIRECT_BITS_PER_BLOCK) {
                offset.set(self.position(i * INNER_BITS + support[k]), true);
            }
        }
        offset
    }

    /// Weight of [`misdirecting_offset`](Self::misdirecting_offset).
    pub fn misdirecting_weight(&self) -> usize {
        let seg = self.segments[0];
        (seg.total - seg.data + 1) * MISDIRECT_BITS_PER_BLOCK
    }

    /// Pre-interleave bit range of inner block `block`, mapped to codeword positions.
    pub fn block_positions(&self, block: usize) -> impl Iterator<Item = usize> + '_ {
        (0..INNER_BITS).map(move |x| self.position(block * INNER_BITS + x))
    }

    pub fn block_count(&self) -> usize {
        self.blocks
    }
}

pub fn ec_len(message_bits: usize) -> Result<usize, CodingError> {
    Ok(EcCode::new(message_bits)?.len())
}

pub fn ec_encode(message: &BitString) -> Result<BitString, CodingError> {
    Ok(EcCode::new(message.len())?.encode(message))
}

pub fn ec_decode(word: &BitString, message_bits: usize) -> Result<BitString, CodingError> {
    EcCode::new(message_bits)?.decode(word)
}

fn permutation(len: usize) -> Arc<[u32]> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<[u32]>>>> = OnceLock::new();
    let mut cache = CACHE
        .get_or_init(Default::default)
        .lock()
        .unwrap_or_else(|e| e.into_inner());
    cache
        .entry(len)
        .or_insert_with(|| {
            let mut p: Vec<u32> = (0..len as u32).collect();
            p.shuffle(&mut ChaCha8Rng::seed_from_u64(len as u64));
            p.into()
        })
        .clone()
}

/// Maximum-correlation decoding via the fast Walsh–Hadamard transform.
fn hadamard_decode(mut v: [i32; INNER_BITS]) -> Option<u8> {
    let mut h = 1;
    while h < INNER_BITS {
        for i in (0..INNER_BITS).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
    let best = *v.iter().max().expect("non-empty");
    let mut winners = v.iter().enumerate().filter(|(_, &c)| c == best);
    let (symbol, _) = winners.next().expect("maximum exists");
    winners.next().is_none().then_some(symbol as u8)
}

fn poly_eval(coeffs: &[u8], x: u8) -> u8 {
    coeffs
        .iter()
        .rev()
        .fold(0u8, |acc, &c| gf256::mul(acc, x) ^ c)
}

/// `poly · (x - root)`, coefficients lowest degree first.
fn poly_mul_linear(poly: &[u8], root: u8) -> Vec<u8> {
    let mut out = vec![0u8; poly.len() + 1];
    for (i, &c) in poly.iter().enumerate() {
        out[i + 1] ^= c;
        out[i] ^= gf256::mul(c, root);
    }
    out
}

/// Lagrange interpolation through `points`, coefficients lowest degree first.
fn interpolate(xs: &[u8], ys: &[u8]) -> Vec<u8> {
    let k = xs.len();
    let mut master = vec![1u8];
    for &x in xs {
        master = poly_mul_linear(&master, x);
    }
    let mut out = vec![0u8; k];
    for i in 0..k {
        // master / (x - x_i) by synthetic division
        let mut quotient = vec![0u8; k];
        let mut carry = 0u8;
        for d in (0..k).rev() {
            carry = master[d + 1] ^ gf256::mul(carry, xs[i]);
            quotient[d] = carry;
        }
        let denom = poly_eval(&quotient, xs[i]);
        let scale = gf256::div(ys[i], denom);
        for (o, q) in out.iter_mut().zip(&quotient) {
            *o ^= gf256::mul(*q, scale);
        }
    }
    out
}

/// Bounded-distance errors-and-erasures decoding of one outer segment.
///
/// Returns the `data` coefficients of the unique codeword within distance
/// `(n' - data)/2` of the non-erased positions, or `None`.
fn rs_decode(received: &[Option<u8>], data: usize) -> Option<Vec<u8>> {
    let kept: Vec<(u8, u8)> = received
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.map(|v| (gf256::alpha_pow(i), v)))
        .collect();
    if kept.len() < data {
        return None;
    }
    let radius = (kept.len() - data) / 2;
    let mismatches = |p: &[u8]| kept.iter().filter(|&&(x, y)| poly_eval(p, x) != y).count();

    let (xs, ys): (Vec<u8>, Vec<u8>) = kept[..data].iter().copied().unzip();
    let guess = interpolate(&xs, &ys);
    if mismatches(&guess) <= radius {
        return Some(guess);
    }
    if radius == 0 {
        return None;
    }
    let p = berlekamp_welch(&kept, data, radius)?;
    (mismatches(&p) <= radius).then_some(p)
}

fn berlekamp_welch(kept: &[(u8, u8)], data: usize, errors: usize) -> Option<Vec<u8>> {
    // unknowns: q_0..q_{errors+data-1}, then e_0..e_{errors-1}; E is monic of degree `errors`
    let q_len = errors + data;
    let cols = q_len + errors;
    let mut rows: Vec<Vec<u8>> = kept
        .iter()
        .map(|&(x, y)| {
            let mut row = vec![0u8; cols + 1];
            let mut xp = 1u8;
            for slot in row.iter_mut().take(q_len) {
                *slot = xp;
                xp = gf256::mul(xp, x);
            }
            let mut xp = 1u8;
            for j in 0..errors {
                row[q_len + j] = gf256::mul(y, xp); // subtraction is addition
                xp = gf256::mul(xp, x);
            }
            row[cols] = gf256::mul(y, xp); // y·x^errors
            row
        })
        .collect();

    let mut pivot_cols = Vec::new();
    let mut r = 0usize;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, p);
        let inv = gf256::inv(rows[r][c]);
        for v in rows[r].iter_mut() {
            *v = gf256::mul(*v, inv);
        }
        for i in 0..rows.len() {
            if i != r && rows[i][c] != 0 {
                let f = rows[i][c];
                let pivot_row = rows[r].clone();
                for (v, pv) in rows[i].iter_mut().zip(&pivot_row) {
                    *v ^= gf256::mul(f, *pv);
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    if rows[r..].iter().any(|row| row[cols] != 0) {
        return None; // inconsistent
    }
    let mut solution = vec![0u8; cols];
    for (i, &c) in pivot_cols.iter().enumerate() {
        solution[c] = rows[i][cols];
    }
    let q = &solution[..q_len];
    let mut e = solution[q_len..].to_vec();
    e.push(1);
    poly_divide_exact(q, &e, data)
}

/// `num / den` when the division is exact and the quotient has degree `< max_len`.
fn poly_divide_exact(num: &[u8], den: &[u8], max_len: usize) -> Option<Vec<u8>> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    if rem.len() <= dd {
        return rem.iter().all(|&c| c == 0).then(|| vec![0u8; max_len]);
    }
    let mut quotient = vec![0u8; rem.len() - dd];
    let lead_inv = gf256::inv(den[dd]);
    for i in (0..quotient.len()).rev() {
        let coef = gf256::mul(rem[i + dd], lead_inv);
        quotient[i] = coef;
        if coef != 0 {
            for (j, &d) in den.iter().enumerate() {
                rem[i + j] ^= gf256::mul(coef, d);
            }
        }
    }
    if rem.iter().any(|&c| c != 0) {
        return None;
    }
    if quotient.iter().skip(max_len).any(|&c| c != 0) {
        return None;
    }
    quotient.resize(max_len, 0);
    Some(quotient)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn flip_random(word: &BitString, count: usize, rng: &mut ChaCha8Rng) -> BitString {
        let mut out = word.clone();
        for i in sample(rng, word.len(), count) {
            out.flip(i);
        }
        out
    }

    #[test]
    fn constants_follow_the_documented_formulas() {
        assert_eq!(C_1, 12 * 1536 + 76);
        assert_eq!(C_2, 32 * 1536 + 115);
        for bits in 1..2000 {
            assert!(ec_len(bits).unwrap() <= C_E * bits, "{bits}");
        }
        assert_eq!(ec_len(1).unwrap(), C_E);
    }

    #[test]
    fn zero_message_is_zero_codeword_and_back() {
        for bits in [1usize, 9, 64, 700] {
            let c = ec_encode(&BitString::zeros(bits)).unwrap();
            assert!(c.is_zero());
            assert_eq!(ec_decode(&c, bits).unwrap(), BitString::zeros(bits));
        }
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let err = ec_decode(&BitString::zeros(100), 8).unwrap_err();
        assert!(matches!(err, CodingError::LengthMismatch { .. }));
    }

    #[test]
    fn linearity_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let bits = rng.gen_range(1..300);
            let a = BitString::random(bits, &mut rng);
            let b = BitString::random(bits, &mut rng);
            let lhs = ec_encode(&a.xor(&b)).unwrap();
            let rhs = ec_encode(&a).unwrap().xor(&ec_encode(&b).unwrap());
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn corrects_a_third_of_random_positions() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for bits in [1usize, 20, 55, 130, 681, 1500] {
            let code = EcCode::new(bits).unwrap();
            for _ in 0..40 {
                let m = BitString::random(bits, &mut rng);
                let noisy = flip_random(&code.encode(&m), code.len() / 3, &mut rng);
                assert_eq!(code.decode(&noisy).unwrap(), m, "{bits} bits");
            }
        }
    }

    #[test]
    fn corrects_a_contiguous_third() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for bits in [8usize, 55, 400] {
            let code = EcCode::new(bits).unwrap();
            let m = BitString::random(bits, &mut rng);
            let c = code.encode(&m);
            for start in [0, code.len() / 3, code.len() - code.len() / 3] {
                let mut noisy = c.clone();
                for i in start..start + code.len() / 3 {
                    noisy.flip(i);
                }
                assert_eq!(code.decode(&noisy).unwrap(), m, "{bits} bits from {start}");
            }
        }
    }

    /// Unique decoding of a third of the bits is impossible for binary codes
    /// this large; the structured offset demonstrates it on every codeword.
    #[test]
    fn misdirecting_offset_defeats_decoding_below_a_third() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for bits in [8usize, 55, 200] {
            let code = EcCode::new(bits).unwrap();
            let offset = code.misdirecting_offset(&mut rng);
            assert_eq!(offset.count_ones(), code.misdirecting_weight());
            assert!(offset.count_ones() <= code.len() / 3);
            let shift = code.decode(&offset).expect("offset decodes to a codeword");
            assert!(!shift.is_zero());
            for _ in 0..10 {
                let m = BitString::random(bits, &mut rng);
                let got = code.decode(&code.encode(&m).xor(&offset)).unwrap();
                assert_eq!(got, m.xor(&shift));
            }
        }
    }

    #[test]
    fn decoding_commutes_with_codeword_shifts() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let code = EcCode::new(40).unwrap();
        for _ in 0..200 {
            // heavy noise so that failures and misdecodings both occur
            let weight = rng.gen_range(code.len() / 3..code.len() / 2);
            let e = flip_random(&BitString::zeros(code.len()), weight, &mut rng);
            let m = BitString::random(40, &mut rng);
            let shifted = code.decode(&code.encode(&m).xor(&e));
            match code.decode(&e) {
                Ok(d) => assert_eq!(shifted.unwrap(), m.xor(&d)),
                Err(_) => assert!(shifted.is_err()),
            }
        }
    }

    #[test]
    fn erasures_and_errors_within_radius() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let data = 7;
        let coeffs: Vec<u8> = (0..data).map(|_| rng.gen()).collect();
        let total = 2 * data + 4;
        let clean: Vec<Option<u8>> = (0..total)
            .map(|i| Some(poly_eval(&coeffs, gf256::alpha_pow(i))))
            .collect();
        // 2·errors + erasures <= total - data = 11
        for (errors, erasures) in [(5usize, 1usize), (4, 3), (0, 11), (3, 5)] {
            let mut r = clean.clone();
            let idx = sample(&mut rng, total, errors + erasures).into_vec();
            for &i in &idx[..errors] {
                r[i] = Some(r[i].unwrap() ^ rng.gen_range(1..=255u8));
            }
            for &i in &idx[errors..] {
                r[i] = None;
            }
            assert_eq!(rs_decode(&r, data), Some(coeffs.clone()), "{errors}/{erasures}");
        }
    }

    proptest! {
        #[test]
        fn round_trip(bits in 1usize..1200, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = BitString::random(bits, &mut rng);
            let c = ec_encode(&m).unwrap();
            prop_assert_eq!(ec_decode(&c, bits).unwrap(), m);
        }
    }
}

//! Parity vectors: partial and total parity, the parity coefficient, and the
//! seed ↔ vector bijection on `[1, 2^k]`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::maps::{class_parity, f_step, CqInt, Multiplier, ParityBit};

/// Default cap on exhaustive enumerations (`2^k` seeds or vectors).
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 1 << 24;

/// Longest vector the 128-bit parity path can produce.
pub const WORD_PARITY_MAX: usize = 127;

/// A finite parity vector `(α^0, …, α^{k-1})` with cached suffix sums.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParityVector {
    bits: Vec<u8>,
    // suffix[j] = Σ_{s ≥ j} bits[s]; suffix[k] = 0
    suffix: Vec<u32>,
}

impl ParityVector {
    pub fn new(bits: impl IntoIterator<Item = ParityBit>) -> Result<Self> {
        Self::from_raw(bits.into_iter().map(ParityBit::as_u8).collect())
    }

    pub fn from_bools(bits: &[bool]) -> Result<Self> {
        Self::from_raw(bits.iter().map(|&b| b as u8).collect())
    }

    fn from_raw(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::MalformedParity("empty vector".into()));
        }
        let mut suffix = vec![0u32; bits.len() + 1];
        for j in (0..bits.len()).rev() {
            suffix[j] = suffix[j + 1] + bits[j] as u32;
        }
        Ok(ParityVector { bits, suffix })
    }

    /// Bits `0..k` of `mask`, bit `j` of the mask being `α^j`.
    pub fn from_mask(mask: u128, k: usize) -> Result<Self> {
        if k > 128 {
            return Err(Error::Range(format!("mask vectors hold at most 128 bits, got {k}")));
        }
        Self::from_raw((0..k).map(|j| ((mask >> j) & 1) as u8).collect())
    }

    /// Inverse of [`from_mask`](Self::from_mask) for `k ≤ 128`.
    pub fn to_mask(&self) -> Option<u128> {
        (self.len() <= 128).then(|| {
            self.bits
                .iter()
                .enumerate()
                .fold(0u128, |m, (j, &b)| m | ((b as u128) << j))
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    #[inline]
    pub fn bit(&self, j: usize) -> ParityBit {
        ParityBit::from_bool(self.bits[j] == 1)
    }

    pub fn bits(&self) -> impl Iterator<Item = ParityBit> + '_ {
        self.bits.iter().map(|&b| ParityBit::from_bool(b == 1))
    }

    /// `P_k`.
    #[inline]
    pub fn total_parity(&self) -> usize {
        self.suffix[0] as usize
    }

    /// `|A|_j^{k-1}`; zero for `j = k`.
    #[inline]
    pub fn suffix_sum(&self, j: usize) -> usize {
        self.suffix[j] as usize
    }

    /// `|A|_i^j = Σ_{s=i}^{j} α^s`.
    pub fn partial_parity(&self, i: usize, j: usize) -> Result<usize> {
        if i > j || j >= self.len() {
            return Err(Error::Index(format!(
                "need 0 ≤ i ≤ j < {}, got i={i}, j={j}",
                self.len()
            )));
        }
        Ok((self.suffix[i] - self.suffix[j + 1]) as usize)
    }

    /// `μ_k = P_k / k`, reduced.
    pub fn parity_coefficient(&self) -> Ratio<u64> {
        Ratio::new(self.total_parity() as u64, self.len() as u64)
    }

    /// Index of the last one plus one (`0` when there are no ones).
    pub fn last_one_end(&self) -> usize {
        self.bits.iter().rposition(|&b| b == 1).map_or(0, |i| i + 1)
    }

    pub fn leading_ones(&self) -> usize {
        self.bits.iter().take_while(|&&b| b == 1).count()
    }

    /// Smallest `d` such that the vector is `p/d` copies of its first `d` bits.
    pub fn primitive_period(&self) -> usize {
        let p = self.len();
        (1..=p)
            .filter(|d| p % d == 0)
            .find(|&d| (d..p).all(|i| self.bits[i] == self.bits[i - d]))
            .unwrap_or(p)
    }

    /// Rotation starting at index `shift`.
    pub fn rotated(&self, shift: usize) -> ParityVector {
        let p = self.len();
        let bits = (0..p).map(|i| self.bits[(i + shift) % p]).collect();
        Self::from_raw(bits).expect("non-empty")
    }
}

impl fmt::Display for ParityVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for ParityVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0u8),
                '1' => Ok(1u8),
                other => Err(Error::MalformedParity(format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_raw(bits)
    }
}

impl Serialize for ParityVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ParityVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `A^k(q; x0)`: the parities of `x0, F(x0), …, F^{k-1}(x0)`.
pub fn parity_vector(q: Multiplier, x0: &CqInt, k: usize) -> Result<ParityVector> {
    if k == 0 {
        return Err(Error::Range("parity vector length must be ≥ 1".into()));
    }
    let mut bits = Vec::with_capacity(k);
    let mut x = x0.value().clone();
    for j in 0..k {
        let bit = class_parity(q, &x).ok_or_else(|| Error::NotInClass {
            q: q.get(),
            value: x0.value().clone(),
        })?;
        bits.push(bit);
        if j + 1 < k {
            x = f_step(q, &x, bit);
        }
    }
    ParityVector::new(bits)
}

/// Parities of the first `k ≤ 127` steps of the `T_q` orbit of `n0`, packed
/// with `α^j` in bit `j`.
///
/// Only `n0 mod 2^128` is needed: with wrapping arithmetic the iterate after
/// `j` steps is still exact modulo `2^(128-j)`, which is enough to read its
/// parity for every `j < 128`.
#[inline]
pub fn seed_parity_mask(q: Multiplier, n0_low: u128, k: usize) -> u128 {
    debug_assert!(k <= WORD_PARITY_MAX);
    let q = q.get() as u128;
    let mut n = n0_low;
    let mut mask = 0u128;
    for j in 0..k {
        if n & 1 == 1 {
            mask |= 1 << j;
            n = n.wrapping_mul(q).wrapping_add(1) >> 1;
        } else {
            n >>= 1;
        }
    }
    mask
}

/// Number of ones among the first `k ≤ 127` parities of `n0`.
#[inline]
pub fn seed_total_parity(q: Multiplier, n0_low: u128, k: usize) -> u32 {
    seed_parity_mask(q, n0_low, k).count_ones()
}

fn low_u128(n: &BigUint) -> u128 {
    let digits = n.to_u64_digits();
    let lo = digits.first().copied().unwrap_or(0) as u128;
    let hi = digits.get(1).copied().unwrap_or(0) as u128;
    lo | (hi << 64)
}

/// Parity vector of the seed `n0` in n-space; equals
/// `parity_vector(q, X_q(n0), k)`.
pub fn seed_parity_vector(q: Multiplier, n0: &BigUint, k: usize) -> Result<ParityVector> {
    if n0.is_zero() {
        return Err(Error::ZeroSeed);
    }
    if k == 0 {
        return Err(Error::Range("parity vector length must be ≥ 1".into()));
    }
    if k <= WORD_PARITY_MAX {
        return ParityVector::from_mask(seed_parity_mask(q, low_u128(n0), k), k);
    }
    let mut n = n0.clone();
    let mut bits = Vec::with_capacity(k);
    for _ in 0..k {
        let odd = n.is_odd();
        bits.push(ParityBit::from_bool(odd));
        n = if odd { (n * q.get() + 1u32) >> 1 } else { n >> 1 };
    }
    ParityVector::new(bits)
}

/// `|A|_i^j`.
pub fn partial_parity(a: &ParityVector, i: usize, j: usize) -> Result<usize> {
    a.partial_parity(i, j)
}

/// `μ_k = P_k / k`.
pub fn parity_coefficient(a: &ParityVector) -> Ratio<u64> {
    a.parity_coefficient()
}

/// The unique `n0 ∈ [1, 2^k]` whose parity vector of length `k` is `a`.
///
/// Lifts one bit at a time: if `r` realises the first `j` parities then so does
/// every `r + 2^j t`, and `T^j(r + 2^j t) = T^j(r) + q^{P_j} t`. Since `q^{P_j}`
/// is odd, the parity at step `j` is fixed by the parity of `t`, which forces
/// bit `j` of the seed.
pub fn seed_from_parity(q: Multiplier, a: &ParityVector) -> BigUint {
    let qq = BigUint::from(q.get());
    let mut seed = BigUint::zero();
    // y = T^j(seed); q_pow = q^{P_j}
    let mut y = BigUint::zero();
    let mut q_pow = BigUint::one();
    for (j, bit) in a.bits().enumerate() {
        if y.is_odd() != bit.is_one() {
            seed.set_bit(j as u64, true);
            y += &q_pow;
        }
        if bit.is_one() {
            y = (y * &qq + 1u32) >> 1;
            q_pow *= &qq;
        } else {
            y >>= 1;
        }
    }
    if seed.is_zero() {
        seed.set_bit(a.len() as u64, true);
    }
    seed
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BijectionReport {
    pub distinct: bool,
    pub count: u64,
}

/// Checks that the seeds `1..=2^k` realise pairwise distinct parity vectors.
pub fn verify_bijection(q: Multiplier, k: usize, budget: u128) -> Result<BijectionReport> {
    if k == 0 || k > WORD_PARITY_MAX {
        return Err(Error::Range(format!("k must be in 1..={WORD_PARITY_MAX}")));
    }
    let needed = 1u128 << k;
    if needed > budget || k > 40 {
        return Err(Error::Budget { needed, budget });
    }
    let count = 1u64 << k;
    let masks: Vec<u64> = (1..=count)
        .into_par_iter()
        .map(|n| seed_parity_mask(q, n as u128, k) as u64)
        .collect();
    let mut seen = vec![0u64; (count as usize).div_ceil(64)];
    let mut distinct = true;
    for m in masks {
        let (w, b) = ((m / 64) as usize, m % 64);
        if seen[w] >> b & 1 == 1 {
            distinct = false;
            break;
        }
        seen[w] |= 1 << b;
    }
    Ok(BijectionReport { distinct, count })
}

/// 2-adic valuation of `(q-2) n0 + 1`; equals the length of the leading run
/// of ones in the parity sequence of `n0`.
pub fn leading_ones_bound(q: Multiplier, n0: &BigUint) -> u64 {
    let v = n0 * (q.get() - 2) + 1u32;
    v.trailing_zeros().unwrap_or(0)
}

/// `μ` as an `f64`, for reporting only.
pub fn ratio_to_f64(r: &Ratio<u64>) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

/// Greatest common divisor of two counts.
pub(crate) fn gcd(a: usize, b: usize) -> usize {
    a.gcd(&b)
}

//! The three fundamental maps of the qn+1 system and their parity predicates.
//!
//! `T_q` acts on positive integers, `F_q` on the class `Z_cq` of integers
//! congruent to 1 modulo `2(q-1)`, and the affine map `X_q(n) = 2(q-1)n + 1`
//! conjugates one onto the other.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest multiplier accepted; keeps `4(q-1)` inside a `u64`.
pub const MAX_MULTIPLIER: u64 = u64::MAX / 4;

/// A validated odd multiplier `q ≥ 3` with the constants every step needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Multiplier {
    q: u64,
    two_qm1: u64,
    four_qm1: u64,
    mersenne_exp: Option<u32>,
}

impl Multiplier {
    pub fn new(q: u64) -> Result<Self> {
        if q < 3 || q % 2 == 0 || q > MAX_MULTIPLIER {
            return Err(Error::InvalidMultiplier(q));
        }
        let mersenne_exp = (q + 1).is_power_of_two().then(|| (q + 1).trailing_zeros());
        Ok(Multiplier {
            q,
            two_qm1: 2 * (q - 1),
            four_qm1: 4 * (q - 1),
            mersenne_exp,
        })
    }

    /// The Mersenne number `2^p - 1`.
    pub fn mersenne(p: u32) -> Result<Self> {
        if !(2..=61).contains(&p) {
            return Err(Error::Range(format!("Mersenne exponent {p} outside 2..=61")));
        }
        Multiplier::new((1u64 << p) - 1)
    }

    #[inline]
    pub fn get(&self) -> u64 {
        self.q
    }

    #[inline]
    pub fn two_qm1(&self) -> u64 {
        self.two_qm1
    }

    #[inline]
    pub fn four_qm1(&self) -> u64 {
        self.four_qm1
    }

    /// `p` such that `q = 2^p - 1`, if any.
    #[inline]
    pub fn mersenne_exp(&self) -> Option<u32> {
        self.mersenne_exp
    }

    /// `X_q(1) = 2q - 1`, the seed of the trivial cycle.
    pub fn trivial_seed(&self) -> BigUint {
        BigUint::from(2 * self.q as u128 - 1)
    }

    pub fn pow(&self, e: usize) -> BigUint {
        num_traits::pow(BigUint::from(self.q), e)
    }

    pub fn is_prime(&self) -> bool {
        let q = self.q;
        let mut d = 3u64;
        while d.saturating_mul(d) <= q {
            if q % d == 0 {
                return false;
            }
            d += 2;
        }
        true
    }
}

impl TryFrom<u64> for Multiplier {
    type Error = Error;
    fn try_from(q: u64) -> Result<Self> {
        Multiplier::new(q)
    }
}

impl From<Multiplier> for u64 {
    fn from(q: Multiplier) -> u64 {
        q.q
    }
}

impl fmt::Display for Multiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.q)
    }
}

/// Output of a parity predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParityBit {
    Zero,
    One,
}

impl ParityBit {
    #[inline]
    pub fn from_bool(odd: bool) -> Self {
        if odd {
            ParityBit::One
        } else {
            ParityBit::Zero
        }
    }

    #[inline]
    pub fn as_u8(self) -> u8 {
        self as u8
    }

    #[inline]
    pub fn is_one(self) -> bool {
        self == ParityBit::One
    }
}

/// An element of `Z_cq`: `x > 1` with `x ≡ 1 (mod 2(q-1))`.
///
/// Membership is checked against the multiplier given at construction. The
/// operations that take a `CqInt` re-derive the residue they need anyway, so a
/// value built for one `q` and used with another is still caught there.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CqInt(BigUint);

impl CqInt {
    pub fn new(q: Multiplier, value: BigUint) -> Result<Self> {
        if value <= BigUint::one() || !(&value % q.two_qm1()).is_one() {
            return Err(Error::NotInClass { q: q.get(), value });
        }
        Ok(CqInt(value))
    }

    pub fn from_u64(q: Multiplier, value: u64) -> Result<Self> {
        CqInt::new(q, BigUint::from(value))
    }

    /// Wraps a value already known to be in the class.
    pub(crate) fn new_unchecked(value: BigUint) -> Self {
        CqInt(value)
    }

    #[inline]
    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn into_inner(self) -> BigUint {
        self.0
    }

    pub fn bits(&self) -> u64 {
        self.0.bits()
    }
}

impl fmt::Display for CqInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `T_q(n)`: halve if even, `(qn+1)/2` if odd.
pub fn t_map(q: Multiplier, n: &BigUint) -> BigUint {
    if n.is_odd() {
        (n * q.get() + 1u32) >> 1
    } else {
        n >> 1
    }
}

/// `T_q` on machine words; `None` when `qn + 1` overflows.
#[inline]
pub fn t_map_u128(q: Multiplier, n: u128) -> Option<u128> {
    if n & 1 == 1 {
        let m = n.checked_mul(q.get() as u128)?.checked_add(1)?;
        Some(m >> 1)
    } else {
        Some(n >> 1)
    }
}

pub fn alpha_n(n: &BigUint) -> ParityBit {
    ParityBit::from_bool(n.is_odd())
}

/// Residue of `x - 1` modulo `4(q-1)` decides the parity of `x` in `Z_cq`.
#[inline]
pub(crate) fn class_parity(q: Multiplier, x: &BigUint) -> Option<ParityBit> {
    let m = q.four_qm1();
    let r = (x % m).to_u64().expect("residue fits");
    let r = (r + m - 1) % m;
    if r == 0 {
        Some(ParityBit::Zero)
    } else if r == q.two_qm1() {
        Some(ParityBit::One)
    } else {
        None
    }
}

pub fn alpha_q(q: Multiplier, x: &CqInt) -> Result<ParityBit> {
    class_parity(q, x.value()).ok_or_else(|| Error::NotInClass {
        q: q.get(),
        value: x.value().clone(),
    })
}

/// One `F_q` step on a raw value whose parity is already known.
#[inline]
pub(crate) fn f_step(q: Multiplier, x: &BigUint, bit: ParityBit) -> BigUint {
    let y = (x + 1u32) >> 1;
    match bit {
        ParityBit::One => y * q.get(),
        ParityBit::Zero => y,
    }
}

/// `F_q(x) = q^{α_q(x)} (x + 1) / 2`.
pub fn f_map(q: Multiplier, x: &CqInt) -> Result<CqInt> {
    let bit = alpha_q(q, x)?;
    Ok(CqInt(f_step(q, x.value(), bit)))
}

/// `X_q(n) = 2(q-1)n + 1`.
pub fn conjugate(q: Multiplier, n: &BigUint) -> Result<CqInt> {
    if n.is_zero() {
        return Err(Error::ZeroSeed);
    }
    Ok(CqInt(n * q.two_qm1() + 1u32))
}

pub fn conjugate_u64(q: Multiplier, n: u64) -> Result<CqInt> {
    conjugate(q, &BigUint::from(n))
}

/// `X_q^{-1}(x) = (x - 1) / (2(q-1))`, exact.
pub fn unconjugate(q: Multiplier, x: &CqInt) -> Result<BigUint> {
    let (n, r) = (x.value() - 1u32).div_rem(&BigUint::from(q.two_qm1()));
    if !r.is_zero() || n.is_zero() {
        return Err(Error::NotInClass {
            q: q.get(),
            value: x.value().clone(),
        });
    }
    Ok(n)
}

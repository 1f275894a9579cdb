//! Capped orbit computation, the two closed forms for `F_q^k(x0)`, stopping
//! statistics and the exponential growth bounds.

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{class_parity, f_step, CqInt, Multiplier};
use crate::parity::ParityVector;

pub const DEFAULT_SIZE_CAP_BITS: u64 = 1_000_000;

/// `S_q^k(x0)` together with its parity vector and the next iterate `x_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    q: Multiplier,
    iterates: Vec<CqInt>,
    parity: ParityVector,
    terminal: CqInt,
    max_index: usize,
    capped: bool,
}

impl Trajectory {
    pub fn q(&self) -> Multiplier {
        self.q
    }

    pub fn seed(&self) -> &CqInt {
        &self.iterates[0]
    }

    /// `x_0 … x_{k-1}`.
    pub fn iterates(&self) -> &[CqInt] {
        &self.iterates
    }

    pub fn parity(&self) -> &ParityVector {
        &self.parity
    }

    /// `x_k = F_q(x_{k-1})`, the value the closed forms evaluate to.
    pub fn terminal(&self) -> &CqInt {
        &self.terminal
    }

    pub fn max_value(&self) -> &CqInt {
        &self.iterates[self.max_index]
    }

    /// Set when the size cap stopped the orbit before the requested length.
    pub fn capped(&self) -> bool {
        self.capped
    }

    pub fn len(&self) -> usize {
        self.iterates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterates.is_empty()
    }

    /// `x_j` for `0 ≤ j ≤ k`.
    pub fn value_at(&self, j: usize) -> &CqInt {
        if j == self.len() {
            &self.terminal
        } else {
            &self.iterates[j]
        }
    }
}

/// Iterates `F_q` from `x0` for `k` steps, stopping early once an iterate
/// exceeds `size_cap_bits`.
pub fn iterate(q: Multiplier, x0: &CqInt, k: usize, size_cap_bits: u64) -> Result<Trajectory> {
    if k == 0 {
        return Err(Error::Range("trajectory length must be ≥ 1".into()));
    }
    if size_cap_bits < x0.bits() {
        return Err(Error::Range(format!(
            "size cap of {size_cap_bits} bits is below the seed's {} bits",
            x0.bits()
        )));
    }
    let mut iterates = Vec::with_capacity(k.min(1 << 16));
    let mut bits = Vec::with_capacity(k.min(1 << 16));
    let mut x = x0.value().clone();
    let mut max_index = 0;
    let mut capped = false;
    for j in 0..k {
        let bit = class_parity(q, &x).ok_or_else(|| Error::NotInClass {
            q: q.get(),
            value: x.clone(),
        })?;
        let next = f_step(q, &x, bit);
        if x > *iterates.get(max_index).map_or(&x, CqInt::value) {
            max_index = j;
        }
        iterates.push(CqInt::new_unchecked(x));
        bits.push(bit);
        x = next;
        if x.bits() > size_cap_bits && j + 1 < k {
            capped = true;
            break;
        }
    }
    Ok(Trajectory {
        q,
        iterates,
        parity: ParityVector::new(bits)?,
        terminal: CqInt::new_unchecked(x),
        max_index,
        capped,
    })
}

/// `x_k = (q^{P_k} x0 + Σ_j 2^j q^{|A|_j^{k-1}}) / 2^k`.
///
/// Fails when the division is inexact or the quotient leaves `Z_cq`: among all
/// vectors of length `k` only the genuine one passes both tests.
pub fn closed_form_power(q: Multiplier, x0: &CqInt, a: &ParityVector) -> Result<CqInt> {
    let k = a.len();
    let powers = q_powers(q, a.total_parity());
    let mut sum = BigUint::default();
    for j in (0..k).rev() {
        sum <<= 1;
        sum += &powers[a.suffix_sum(j)];
    }
    let numerator = &powers[a.total_parity()] * x0.value() + sum;
    if numerator.trailing_zeros().unwrap_or(0) < k as u64 {
        return Err(Error::NotParityVector {
            seed: x0.value().clone(),
        });
    }
    CqInt::new(q, numerator >> k).map_err(|_| Error::NotParityVector {
        seed: x0.value().clone(),
    })
}

/// `x_k = x0 q^{P_k} 2^{-k} Π_j (1 + 1/x_j)` in exact rational arithmetic.
pub fn closed_form_product(q: Multiplier, traj: &Trajectory) -> Result<CqInt> {
    let k = traj.len();
    let p = traj.parity().total_parity();
    let x0 = traj.seed().value();
    let mut acc = Ratio::new(x0 * q.pow(p), BigUint::one() << k);
    for x in traj.iterates() {
        let x = x.value();
        acc *= Ratio::new(x + 1u32, x.clone());
    }
    if !acc.is_integer() {
        return Err(Error::MalformedTrajectory(
            "harmonic product is not an integer".into(),
        ));
    }
    CqInt::new(q, acc.to_integer())
        .map_err(|e| Error::MalformedTrajectory(format!("product left the class: {e}")))
}

fn q_powers(q: Multiplier, upto: usize) -> Vec<BigUint> {
    let mut powers = Vec::with_capacity(upto + 1);
    powers.push(BigUint::one());
    for i in 0..upto {
        let next = &powers[i] * q.get();
        powers.push(next);
    }
    powers
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopInfo {
    /// Least `k ≥ 1` with `F^k(x0) < x0`.
    pub stopping_time: Option<usize>,
    /// Least `m ≥ 1` with `F^m(x0) = 2q - 1`.
    pub total_steps_to_trivial: Option<usize>,
    pub cap: usize,
}

pub fn stop_info(q: Multiplier, x0: &CqInt, step_cap: usize) -> Result<StopInfo> {
    if step_cap == 0 {
        return Err(Error::Range("step cap must be ≥ 1".into()));
    }
    let trivial = q.trivial_seed();
    let mut stopping_time = None;
    let mut total = None;
    let mut x = x0.value().clone();
    for m in 1..=step_cap {
        let bit = class_parity(q, &x).ok_or_else(|| Error::NotInClass {
            q: q.get(),
            value: x.clone(),
        })?;
        x = f_step(q, &x, bit);
        if stopping_time.is_none() && x < *x0.value() {
            stopping_time = Some(m);
        }
        if total.is_none() && x == trivial {
            total = Some(m);
        }
        if total.is_some() && (stopping_time.is_some() || *x0.value() == trivial) {
            break;
        }
    }
    Ok(StopInfo {
        stopping_time,
        total_steps_to_trivial: total,
        cap: step_cap,
    })
}

/// Exponent rate `c` of the upper bound `F^k/x0 ≤ q^{(μ_k - c) k}`.
pub fn upper_bound_rate(q: Multiplier) -> Option<(u64, u64)> {
    match (q.mersenne_exp(), q.get()) {
        (Some(p), _) => Some((1, p as u64)),
        (None, 5) => Some((2, 5)),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub k: usize,
    /// `F^j/x0 > (q^{μ_j}/2)^j` at every prefix `1 ≤ j ≤ k`.
    pub lower_ok: bool,
    pub lower_violations: Vec<usize>,
    /// Only Mersenne `q` and `q = 5` have an upper bound, and it excludes
    /// the trivial seed `2q - 1`.
    pub upper_checked: bool,
    /// Prefix lengths `j` where `F^j/x0 ≤ q^{(μ_j - c) j}` fails.
    pub upper_violations: Vec<usize>,
}

/// Checks both growth bounds at every prefix of `traj` with exact decisions.
pub fn check_growth_bounds(q: Multiplier, traj: &Trajectory) -> BoundReport {
    let k = traj.len();
    let x0 = traj.seed().value();
    let rate = upper_bound_rate(q).filter(|_| *x0 != q.trivial_seed());
    let log_q = (q.get() as f64).log2();
    let log_x0 = log2_big(x0);

    let mut lower_violations = Vec::new();
    let mut upper_violations = Vec::new();
    // q^{P_j} x0, maintained incrementally
    let mut scaled_seed = x0.clone();
    let mut ones = 0usize;
    for j in 1..=k {
        if traj.parity().bit(j - 1).is_one() {
            scaled_seed *= q.get();
            ones += 1;
        }
        let xj = traj.value_at(j).value();
        if (xj << j) <= scaled_seed {
            lower_violations.push(j);
        }
        if let Some((num, den)) = rate {
            if !upper_holds(q, x0, xj, ones, j, num, den, log_q, log_x0) {
                upper_violations.push(j);
            }
        }
    }
    BoundReport {
        k,
        lower_ok: lower_violations.is_empty(),
        lower_violations,
        upper_checked: rate.is_some(),
        upper_violations,
    }
}

/// Decides `xj / x0 ≤ q^{P - (num/den) j}`, i.e.
/// `xj^den · q^{max(0,-e)} ≤ x0^den · q^{max(0,e)}` with `e = den·P - num·j`.
/// A log-space comparison settles it when the gap is far above the rounding
/// error; anything closer falls through to integers.
#[allow(clippy::too_many_arguments)]
fn upper_holds(
    q: Multiplier,
    x0: &BigUint,
    xj: &BigUint,
    ones: usize,
    j: usize,
    num: u64,
    den: u64,
    log_q: f64,
    log_x0: f64,
) -> bool {
    const MARGIN: f64 = 1e-6;
    let e = den as i128 * ones as i128 - num as i128 * j as i128;
    let gap = e as f64 * log_q - den as f64 * (log2_big(xj) - log_x0);
    if gap > MARGIN {
        return true;
    }
    if gap < -MARGIN {
        return false;
    }
    let den = den as usize;
    let qe = q.pow(e.unsigned_abs() as usize);
    let (mut lhs, mut rhs) = (num_traits::pow(xj.clone(), den), num_traits::pow(x0.clone(), den));
    if e >= 0 {
        rhs *= qe;
    } else {
        lhs *= qe;
    }
    lhs <= rhs
}

/// The orbit of `2q - 1` when it is periodic within 256 steps.
pub fn trivial_cycle(q: Multiplier) -> Option<Vec<BigUint>> {
    let start = q.trivial_seed();
    let mut x = start.clone();
    let mut members = Vec::new();
    for _ in 0..256 {
        members.push(x.clone());
        let bit = class_parity(q, &x)?;
        x = f_step(q, &x, bit);
        if x == start {
            members.sort();
            return Some(members);
        }
    }
    None
}

/// First index `j ≤ k` at which the trajectory sits on the trivial cycle.
pub fn absorption_index(q: Multiplier, traj: &Trajectory) -> Option<usize> {
    let members = trivial_cycle(q)?;
    (0..=traj.len()).find(|&j| members.binary_search(traj.value_at(j).value()).is_ok())
}

/// `log2(n)` to about 1e-15 relative accuracy.
pub fn log2_big(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 64 {
        return (n.to_u64().expect("fits").max(1) as f64).log2();
    }
    let top = (n >> (bits - 64)).to_u64().expect("64 bits");
    (top as f64).log2() + (bits - 64) as f64
}

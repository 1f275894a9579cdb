//! Periodic orbits: the two periodicity conditions, the g-function, the
//! congruence-class structure of cycle seeds, Mersenne and trivial cycles,
//! and exact checks of the parity-coefficient bounds.

pub mod catalog;
pub mod search;

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{class_parity, conjugate, f_step, unconjugate, CqInt, Multiplier, ParityBit};
use crate::parity::{gcd, ParityVector};

pub use catalog::{known_cycles, read_catalog, write_catalog, CatalogEntry, Checkpoint};
pub use search::{
    find_cycles_orbit, find_cycles_parity_enum, verify_collatz, CollatzScan, Method, SearchBounds,
    SearchCounts, SearchJob, SearchReport,
};

/// A cycle of `F_q`, stored from its minimum element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    pub q: Multiplier,
    pub min_seed_x: CqInt,
    pub min_seed_n: BigUint,
    pub period: usize,
    pub total_parity: usize,
    /// One past the index of the last one in `parity`.
    pub s: usize,
    pub class_h: u64,
    pub lambda: BigUint,
    pub parity: ParityVector,
}

impl Cycle {
    /// Builds the cycle whose minimum is `X_q(n)` and whose prime period is
    /// `period`, checking both claims along the way.
    pub fn from_min_seed(q: Multiplier, n: &BigUint, period: usize) -> Result<Cycle> {
        if period < 2 {
            return Err(Error::Range(format!("cycle period must be ≥ 2, got {period}")));
        }
        let x0 = conjugate(q, n)?;
        let orbit = walk(q, x0.value(), period);
        if orbit.terminal != *x0.value() {
            return Err(Error::NotPeriodic {
                value: x0.value().clone(),
                steps: period,
            });
        }
        if orbit.values[1..].iter().any(|x| x <= x0.value()) {
            return Err(Error::Range(format!(
                "{x0} is not the minimum of an orbit of prime period {period}"
            )));
        }
        let parity = ParityVector::new(orbit.bits)?;
        let (lambda, h) = n.div_rem(&BigUint::from(q.get()));
        Ok(Cycle {
            q,
            min_seed_n: n.clone(),
            period,
            total_parity: parity.total_parity(),
            s: parity.last_one_end(),
            class_h: h.to_u64().expect("residue fits"),
            lambda,
            parity,
            min_seed_x: x0,
        })
    }

    /// The cycle through `x`, found by iterating at most `max_period` steps.
    pub fn through(q: Multiplier, x: &CqInt, max_period: usize) -> Result<Cycle> {
        let orbit = walk_until_return(q, x.value(), max_period).ok_or_else(|| Error::NotPeriodic {
            value: x.value().clone(),
            steps: max_period,
        })?;
        let min = orbit.iter().min().expect("nonempty orbit");
        let n = unconjugate(q, &CqInt::new(q, min.clone())?)?;
        Cycle::from_min_seed(q, &n, orbit.len())
    }

    /// `x_0 … x_{p-1}` starting at the minimum.
    pub fn x_orbit(&self) -> Vec<BigUint> {
        walk(self.q, self.min_seed_x.value(), self.period).values
    }

    /// The same orbit in n-space.
    pub fn n_orbit(&self) -> Vec<BigUint> {
        let d = BigUint::from(self.q.two_qm1());
        self.x_orbit().into_iter().map(|x| (x - 1u32) / &d).collect()
    }

    pub fn g_function(&self) -> GFunction {
        g_function(&self.parity).expect("cycle vectors end in zero and contain a one")
    }

    /// Recomputes every structural claim about this cycle.
    pub fn checks(&self) -> CycleChecks {
        let q = self.q;
        let orbit = walk(q, self.min_seed_x.value(), self.period);
        let returns = orbit.terminal == *self.min_seed_x.value();
        let minimum = orbit.values[1..].iter().all(|x| x > self.min_seed_x.value());
        let recomputed = ParityVector::new(orbit.bits.iter().copied()).ok();
        let p = self.period;
        let a = &self.parity;
        let parity_shape = a.len() == p
            && a.bit(0).is_one()
            && !a.bit(p - 1).is_one()
            && (self.s..=p).all(|j| a.suffix_sum(j) == 0)
            && self.s >= 1
            && a.bit(self.s - 1).is_one()
            && a.total_parity() == self.total_parity;
        let seed_matches = conjugate(q, &self.min_seed_n).ok().as_ref() == Some(&self.min_seed_x);
        let class_decomposition = self.class_h >= 1
            && self.class_h < q.get()
            && self.lambda.clone() * q.get() + self.class_h == self.min_seed_n;
        let h_lambda_parity = (self.class_h % 2 == 0) == self.lambda.is_odd();
        CycleChecks {
            returns_to_seed: returns,
            prime_period_from_minimum: returns && minimum,
            parity_matches: recomputed.as_ref() == Some(a),
            parity_shape,
            seed_matches,
            class_decomposition,
            h_lambda_parity,
            coprime_parity: gcd(self.total_parity, p) == 1,
            class_admissible: !is_excluded_class(q, self.class_h),
        }
    }
}

/// Outcome of [`Cycle::checks`], one flag per structural property.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleChecks {
    pub returns_to_seed: bool,
    pub prime_period_from_minimum: bool,
    pub parity_matches: bool,
    /// Starts with one, ends with a tail of zeros from index `s`.
    pub parity_shape: bool,
    pub seed_matches: bool,
    /// `n0 = h + λq` with `1 ≤ h ≤ q-1`.
    pub class_decomposition: bool,
    /// `h` even forces `λ` odd and vice versa.
    pub h_lambda_parity: bool,
    /// `gcd(P_p, p) = 1`.
    pub coprime_parity: bool,
    pub class_admissible: bool,
}

impl CycleChecks {
    pub fn all(&self) -> bool {
        self.failures().is_empty()
    }

    pub fn failures(&self) -> Vec<&'static str> {
        [
            (self.returns_to_seed, "returns_to_seed"),
            (self.prime_period_from_minimum, "prime_period_from_minimum"),
            (self.parity_matches, "parity_matches"),
            (self.parity_shape, "parity_shape"),
            (self.seed_matches, "seed_matches"),
            (self.class_decomposition, "class_decomposition"),
            (self.h_lambda_parity, "h_lambda_parity"),
            (self.coprime_parity, "coprime_parity"),
            (self.class_admissible, "class_admissible"),
        ]
        .into_iter()
        .filter(|(ok, _)| !ok)
        .map(|(_, name)| name)
        .collect()
    }
}

struct Walk {
    values: Vec<BigUint>,
    bits: Vec<ParityBit>,
    terminal: BigUint,
}

fn walk(q: Multiplier, x0: &BigUint, steps: usize) -> Walk {
    let mut values = Vec::with_capacity(steps);
    let mut bits = Vec::with_capacity(steps);
    let mut x = x0.clone();
    for _ in 0..steps {
        let bit = class_parity(q, &x).expect("orbit stays in the class");
        let next = f_step(q, &x, bit);
        values.push(x);
        bits.push(bit);
        x = next;
    }
    Walk {
        values,
        bits,
        terminal: x,
    }
}

fn walk_until_return(q: Multiplier, x0: &BigUint, max_steps: usize) -> Option<Vec<BigUint>> {
    let mut values = vec![x0.clone()];
    let mut x = x0.clone();
    for _ in 0..max_steps {
        let bit = class_parity(q, &x)?;
        x = f_step(q, &x, bit);
        if x == *x0 {
            return Some(values);
        }
        values.push(x.clone());
    }
    None
}

/// Positions of the ones of a vector read from the right: `g(j)` is the
/// index holding the `(j+1)`-th one counted from the end.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GFunction {
    pub values: Vec<usize>,
}

impl GFunction {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn g_function(a: &ParityVector) -> Result<GFunction> {
    let p = a.len();
    if a.bit(p - 1).is_one() {
        return Err(Error::MalformedParity(format!("{a} ends in a one")));
    }
    if a.total_parity() == 0 {
        return Err(Error::MalformedParity(format!("{a} has no ones")));
    }
    let values = (0..p).rev().filter(|&j| a.bit(j).is_one()).collect();
    Ok(GFunction { values })
}

fn cycle_shape_ok(a: &ParityVector) -> bool {
    a.len() >= 2 && a.bit(0).is_one() && !a.bit(a.len() - 1).is_one()
}

/// Solves `(2^p - q^{P_p}) x0 = Σ_j 2^j q^{|A|_j^{p-1}}` for `x0` and returns it
/// when it is an element of `Z_cq` whose parity vector really is `a`.
pub fn first_periodicity_solve(q: Multiplier, a: &ParityVector) -> Option<CqInt> {
    if !cycle_shape_ok(a) {
        return None;
    }
    let p = a.len();
    let qp = q.pow(a.total_parity());
    let two_p = BigUint::one() << p;
    if two_p <= qp {
        return None;
    }
    let d = two_p - &qp;
    let rhs = periodicity_rhs(q, a);
    let (x0, r) = rhs.div_rem(&d);
    if !r.is_zero() {
        return None;
    }
    let x0 = CqInt::new(q, x0).ok()?;
    let orbit = walk(q, x0.value(), p);
    (orbit.bits.iter().map(|b| b.as_u8()).eq(a.bits().map(|b| b.as_u8())) && orbit.terminal == *x0.value())
        .then_some(x0)
}

/// `Σ_{j<p} 2^j q^{|A|_j^{p-1}}` by Horner's rule from the top index down.
fn periodicity_rhs(q: Multiplier, a: &ParityVector) -> BigUint {
    let mut powers = vec![BigUint::one()];
    for i in 0..a.total_parity() {
        let next = &powers[i] * q.get();
        powers.push(next);
    }
    let mut sum = BigUint::zero();
    for j in (0..a.len()).rev() {
        sum <<= 1;
        sum += &powers[a.suffix_sum(j)];
    }
    sum
}

/// `(2^p - q^{P_p}) n0 = Σ_{j<P_p} 2^{g(j)} q^j`.
pub fn second_periodicity_check(q: Multiplier, n0: &BigUint, a: &ParityVector) -> bool {
    if !cycle_shape_ok(a) {
        return false;
    }
    let Ok(g) = g_function(a) else {
        return false;
    };
    let qp = q.pow(a.total_parity());
    let two_p = BigUint::one() << a.len();
    if two_p <= qp {
        return false;
    }
    let mut rhs = BigUint::zero();
    for &gj in g.values.iter().rev() {
        rhs *= q.get();
        rhs += BigUint::one() << gj;
    }
    (two_p - qp) * n0 == rhs
}

/// Residue class and particular solution of `2^p n - q m = 2^{s-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongruenceSolution {
    /// `n mod q`.
    pub h: u64,
    /// The `m` paired with `n = h`; every solution is `(h + tq, m0 + t 2^p)`.
    #[serde(with = "catalog::decimal")]
    pub m0: BigUint,
}

pub fn cycle_congruence_solve(q: Multiplier, p: usize, s: usize) -> Result<CongruenceSolution> {
    if s == 0 || s >= p {
        return Err(Error::Range(format!("need 1 ≤ s ≤ p-1, got s={s}, p={p}")));
    }
    let qq = q.get() as u128;
    let two_p = pow_mod(2, p as u128, qq);
    let rhs = pow_mod(2, (s - 1) as u128, qq);
    let inv = mod_inverse(two_p, qq).expect("q is odd");
    let h = (mul_mod(rhs, inv, qq)) as u64;
    if h == 0 {
        return Err(Error::NoAdmissibleClass { q: q.get(), p, s });
    }
    let m0 = ((BigUint::one() << p) * h - (BigUint::one() << (s - 1))) / q.get();
    Ok(CongruenceSolution { h, m0 })
}

fn mul_mod(a: u128, b: u128, m: u128) -> u128 {
    // operands stay below 2^64 since m < 2^62
    a * b % m
}

fn pow_mod(mut base: u128, mut e: u128, m: u128) -> u128 {
    let mut acc = 1 % m;
    base %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        e >>= 1;
    }
    acc
}

fn mod_inverse(a: u128, m: u128) -> Option<u128> {
    let e = num_integer::Integer::extended_gcd(&(a as i128), &(m as i128));
    (e.gcd == 1).then(|| e.x.rem_euclid(m as i128) as u128)
}

/// The trivial cycle of `q = 2^p - 1`: n-orbit `1, 2^{p-1}, …, 2`.
pub fn mersenne_trivial_cycle(p: u32) -> Result<Cycle> {
    let q = Multiplier::mersenne(p)?;
    let c = Cycle::from_min_seed(q, &BigUint::one(), p as usize)?;
    if !second_periodicity_check(q, &c.min_seed_n, &c.parity) {
        return Err(Error::NotPeriodic {
            value: c.min_seed_x.value().clone(),
            steps: p as usize,
        });
    }
    Ok(c)
}

/// Classes `h ∈ [1, q-1]` sharing a factor with `q`; empty for prime `q`.
pub fn class_exclusions(q: Multiplier) -> BTreeSet<u64> {
    (1..q.get()).filter(|&h| is_excluded_class(q, h)).collect()
}

pub fn is_excluded_class(q: Multiplier, h: u64) -> bool {
    h.gcd(&q.get()) > 1
}

/// `q | h 2^k - 1` with `k = p - g(0)`.
pub fn divisor_condition(q: Multiplier, c: &Cycle) -> bool {
    let k = c.period - c.g_function().values[0];
    let qq = q.get() as u128;
    let v = mul_mod(c.class_h as u128 % qq, pow_mod(2, k as u128, qq), qq);
    (v + qq - 1) % qq == 0
}

/// The parity-coefficient bounds of a cycle, each decided by an exact
/// integer comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoefficientBounds {
    /// `μ_p = (1/p) Σ log_q(2x_j/(x_j+1))`, i.e. `q^P Π(x_j+1) = 2^p Π x_j`.
    pub log_sum_identity: bool,
    /// `x_m ≥ 2q - 1`.
    pub minimum_in_range: bool,
    /// `log_q(2x_m/(x_m+1)) < μ_p`.
    pub lower_strict: bool,
    /// `μ_p < log_q(2x_M/(x_M+1))`.
    pub upper_strict: bool,
    /// `0 < 2 - q^{μ_p}`.
    pub margin_positive: bool,
    /// `2 - q^{μ_p} < 1/q`.
    pub margin_below_inverse_q: bool,
}

impl CoefficientBounds {
    pub fn all(&self) -> bool {
        self.log_sum_identity
            && self.minimum_in_range
            && self.lower_strict
            && self.upper_strict
            && self.margin_positive
            && self.margin_below_inverse_q
    }
}

pub fn coefficient_bounds(q: Multiplier, c: &Cycle) -> CoefficientBounds {
    let orbit = c.x_orbit();
    let p = c.period;
    let qp = q.pow(c.total_parity);
    let two_p = BigUint::one() << p;
    let prod_x: BigUint = orbit.iter().product();
    let prod_x1: BigUint = orbit.iter().map(|x| x + 1u32).product();
    let xm = orbit.iter().min().expect("nonempty");
    let xmax = orbit.iter().max().expect("nonempty");
    let pw = |v: BigUint| num_traits::pow(v, p);
    let trivial = q.trivial_seed();
    CoefficientBounds {
        log_sum_identity: &qp * prod_x1 == &two_p * prod_x,
        minimum_in_range: *xm >= trivial,
        lower_strict: pw(xm << 1) < &qp * pw(xm + 1u32),
        upper_strict: &qp * pw(xmax + 1u32) < pw(xmax << 1),
        margin_positive: qp < two_p,
        margin_below_inverse_q: qp * q.pow(p) > pw(trivial),
    }
}

pub fn parity_coeff_bounds_check(q: Multiplier, c: &Cycle) -> bool {
    coefficient_bounds(q, c).all()
}

/// A solution of `2^p = q^P + Σ_{j<P} 2^{g(j)} q^j`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TrivialSolution {
    pub q: u64,
    pub p: usize,
    pub g: Vec<usize>,
}

/// Largest period the trivial-cycle search accepts.
pub const TRIVIAL_SEARCH_MAX_PERIOD: usize = 126;

/// All solutions of the trivial-cycle equation over odd `3 ≤ q ≤ q_max` and
/// `p ≤ p_max`, with `g` strictly decreasing, `g(P-1) = 0`, `g(0) ≤ p - 2`.
/// Solutions whose vector repeats a shorter block describe a cycle of smaller
/// prime period run several times and are left out.
pub fn search_trivial_cycles(p_target: usize, q_max: u64, p_max: usize) -> Result<Vec<TrivialSolution>> {
    if p_target == 0 {
        return Err(Error::Range("total parity must be ≥ 1".into()));
    }
    if p_max > TRIVIAL_SEARCH_MAX_PERIOD {
        return Err(Error::Range(format!(
            "period bound must be ≤ {TRIVIAL_SEARCH_MAX_PERIOD}, got {p_max}"
        )));
    }
    use rayon::prelude::*;
    let qs: Vec<u64> = (3..=q_max).step_by(2).collect();
    let mut out: Vec<TrivialSolution> = qs
        .par_iter()
        .flat_map_iter(|&q| {
            let mut found = Vec::new();
            let Some(qp) = (q as u128).checked_pow(p_target as u32) else {
                return found;
            };
            for p in 2..=p_max {
                let two_p = 1u128 << p;
                if qp >= two_p {
                    continue;
                }
                let mut g = Vec::with_capacity(p_target);
                digits(q as u128, two_p - qp, p_target, p - 1, &mut g, &mut |g| {
                    if is_primitive(p, g) {
                        found.push(TrivialSolution { q, p, g: g.to_vec() })
                    }
                });
            }
            found
        })
        .collect();
    out.sort();
    Ok(out)
}

fn is_primitive(p: usize, g: &[usize]) -> bool {
    let mask = g.iter().fold(0u128, |m, &j| m | 1 << j);
    ParityVector::from_mask(mask, p).expect("p ≤ 126").primitive_period() == p
}

/// Writes `r = Σ_{j<left} 2^{g(j)} q^j` with `g` strictly decreasing below
/// `bound` and ending at zero. Reading `r mod q` pins `2^{g(0)}`, so the
/// search peels one base-`q` digit per level.
fn digits(q: u128, r: u128, left: usize, bound: usize, g: &mut Vec<usize>, emit: &mut dyn FnMut(&[usize])) {
    if left == 1 {
        if r == 1 && bound > 0 {
            g.push(0);
            emit(g);
            g.pop();
        }
        return;
    }
    // g(j) ≥ left - 1 for the remaining digits to fit below it
    for gj in (left - 1)..bound {
        let t = 1u128 << gj;
        if t > r {
            break;
        }
        if (r - t) % q != 0 {
            continue;
        }
        g.push(gj);
        digits(q, (r - t) / q, left - 1, gj, g, emit);
        g.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: u64) -> Multiplier {
        Multiplier::new(v).unwrap()
    }

    fn pv(s: &str) -> ParityVector {
        s.parse().unwrap()
    }

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn g_function_examples() {
        assert_eq!(g_function(&pv("1100100")).unwrap().values, [4, 1, 0]);
        assert_eq!(g_function(&pv("10")).unwrap().values, [0]);
        assert_eq!(g_function(&pv("11000")).unwrap().values, [1, 0]);
        assert!(g_function(&pv("101")).is_err());
        assert!(g_function(&pv("000")).is_err());
    }

    #[test]
    fn g_function_matches_suffix_sums() {
        for mask in 0u128..(1 << 10) {
            let a = ParityVector::from_mask(mask, 10).unwrap();
            let Ok(g) = g_function(&a) else { continue };
            let first_one = (0..a.len()).find(|&j| a.bit(j).is_one()).unwrap();
            assert_eq!(g.values.last(), Some(&first_one));
            for (j, &gj) in g.values.iter().enumerate() {
                assert_eq!(a.suffix_sum(gj), j + 1);
                assert_eq!(a.suffix_sum(gj + 1), j);
            }
            assert_eq!(g.values[0], a.last_one_end() - 1);
        }
    }

    #[test]
    fn first_periodicity_examples() {
        let x = first_periodicity_solve(q(5), &pv("11000")).unwrap();
        assert_eq!(x.value(), &big(9));
        let x = first_periodicity_solve(q(5), &pv("1110000")).unwrap();
        assert_eq!(x.value(), &big(105));
        assert!(first_periodicity_solve(q(5), &pv("10")).is_none());
        // a repeated vector solves the condition with its primitive cycle's seed
        let x = first_periodicity_solve(q(3), &pv("1010")).unwrap();
        assert_eq!(x.value(), &big(5));
    }

    #[test]
    fn second_periodicity_examples() {
        assert!(second_periodicity_check(q(5), &big(1), &pv("11000")));
        assert!(second_periodicity_check(q(5), &big(17), &pv("1100100")));
        assert!(second_periodicity_check(q(7), &big(1), &pv("100")));
        assert!(!second_periodicity_check(q(5), &big(2), &pv("11000")));
    }

    #[test]
    fn congruence_examples() {
        assert_eq!(cycle_congruence_solve(q(5), 7, 5).unwrap().h, 2);
        assert_eq!(cycle_congruence_solve(q(5), 7, 3).unwrap().h, 3);
        assert_eq!(cycle_congruence_solve(q(3), 2, 1).unwrap().h, 1);
        let sol = cycle_congruence_solve(q(5), 7, 5).unwrap();
        assert_eq!((BigUint::from(128u32) * sol.h) - sol.m0 * 5u32, big(16));
        assert!(cycle_congruence_solve(q(5), 7, 7).is_err());
        assert!(cycle_congruence_solve(q(5), 7, 0).is_err());
    }

    #[test]
    fn mersenne_examples() {
        let c = mersenne_trivial_cycle(2).unwrap();
        assert_eq!(c.x_orbit(), [big(5), big(9)]);
        let c = mersenne_trivial_cycle(3).unwrap();
        assert_eq!(c.n_orbit(), [big(1), big(4), big(2)]);
        let c = mersenne_trivial_cycle(5).unwrap();
        assert_eq!(c.n_orbit(), [big(1), big(16), big(8), big(4), big(2)]);
        assert_eq!((c.total_parity, c.period), (1, 5));
        for p in 2..=20 {
            let c = mersenne_trivial_cycle(p).unwrap();
            assert!(c.checks().all(), "p={p}: {:?}", c.checks().failures());
        }
    }

    #[test]
    fn exclusion_examples() {
        assert_eq!(class_exclusions(q(9)), BTreeSet::from([3, 6]));
        assert_eq!(class_exclusions(q(15)), BTreeSet::from([3, 5, 6, 9, 10, 12]));
        assert!(class_exclusions(q(5)).is_empty());
        assert!(class_exclusions(q(181)).is_empty());
    }

    fn known_q5() -> Vec<Cycle> {
        [(1u64, 5usize), (17, 7), (13, 7)]
            .iter()
            .map(|&(n, p)| Cycle::from_min_seed(q(5), &big(n), p).unwrap())
            .collect()
    }

    #[test]
    fn known_cycles_have_expected_shape() {
        let cs = known_q5();
        let shape: Vec<_> = cs.iter().map(|c| (c.period, c.total_parity, c.s, c.class_h)).collect();
        assert_eq!(shape, [(5, 2, 2, 1), (7, 3, 5, 2), (7, 3, 3, 3)]);
        assert_eq!(cs[1].x_orbit(), [137u64, 345, 865, 433, 217, 545, 273].map(big));
        assert_eq!(cs[2].x_orbit(), [105u64, 265, 665, 1665, 833, 417, 209].map(big));
        for c in &cs {
            assert!(c.checks().all(), "{:?}", c.checks().failures());
            assert!(divisor_condition(q(5), c));
            assert!(parity_coeff_bounds_check(q(5), c));
            assert_eq!(cycle_congruence_solve(q(5), c.period, c.s).unwrap().h, c.class_h);
        }
    }

    #[test]
    fn from_min_seed_rejects_non_minimal() {
        assert!(Cycle::from_min_seed(q(5), &big(2), 5).is_err());
        assert!(Cycle::from_min_seed(q(5), &big(1), 10).is_err());
        assert!(Cycle::from_min_seed(q(5), &big(1), 4).is_err());
        let c = Cycle::through(q(5), &CqInt::from_u64(q(5), 345).unwrap(), 100).unwrap();
        assert_eq!(c.min_seed_n, big(17));
    }

    #[test]
    fn table_two_cycles() {
        for n in [27u64, 35] {
            let c = Cycle::from_min_seed(q(181), &big(n), 15).unwrap();
            assert_eq!(c.total_parity, 2);
            assert!(c.checks().all());
            assert!(divisor_condition(q(181), &c));
            let b = coefficient_bounds(q(181), &c);
            assert!(b.all(), "{b:?}");
        }
    }

    #[test]
    fn divisor_examples() {
        let cs = known_q5();
        assert!(divisor_condition(q(5), &cs[0]));
        assert!(divisor_condition(q(5), &cs[1]));
        let c = mersenne_trivial_cycle(2).unwrap();
        assert!(divisor_condition(q(3), &c));
    }

    #[test]
    fn coefficient_margin_fails_without_a_cycle() {
        // the q=3 cycle {5, 9} read with q=7 weights is not a cycle
        let c = mersenne_trivial_cycle(2).unwrap();
        assert!(parity_coeff_bounds_check(q(3), &c));
        let b = coefficient_bounds(q(7), &c);
        assert!(!b.log_sum_identity && !b.margin_positive);
    }

    #[test]
    fn trivial_search_examples() {
        let one = search_trivial_cycles(1, 10_000, 14).unwrap();
        let qs: Vec<u64> = one.iter().map(|s| s.q).collect();
        assert_eq!(qs, (2..=13).map(|p| (1u64 << p) - 1).collect::<Vec<_>>());
        assert!(one.iter().all(|s| s.g == [0] && (1u64 << s.p) - 1 == s.q));
        let two = search_trivial_cycles(2, 1000, 30).unwrap();
        assert_eq!(two, [TrivialSolution { q: 5, p: 5, g: vec![1, 0] }]);
        assert!(search_trivial_cycles(2, 3, 30).unwrap().is_empty());
        assert!(search_trivial_cycles(0, 3, 30).is_err());
    }

    #[test]
    fn trivial_search_agrees_with_brute_force() {
        for p_target in 1..=3usize {
            let fast = search_trivial_cycles(p_target, 99, 16).unwrap();
            let mut slow = Vec::new();
            for qq in (3..=99u64).step_by(2) {
                for p in 2..=16usize {
                    for mask in 0u128..(1 << (p - 1)) {
                        let a = ParityVector::from_mask(mask, p).unwrap();
                        if a.total_parity() != p_target || !a.bit(0).is_one() || a.primitive_period() != p {
                            continue;
                        }
                        if second_periodicity_check(q(qq), &big(1), &a) {
                            slow.push(TrivialSolution { q: qq, p, g: g_function(&a).unwrap().values });
                        }
                    }
                }
            }
            slow.sort();
            assert_eq!(fast, slow, "P={p_target}");
        }
    }
}

//! Cycle search by orbit scanning and by parity-vector enumeration, over
//! disjoint chunks that can be checkpointed and resumed.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cycles::catalog::Checkpoint;
use crate::cycles::{first_periodicity_solve, Cycle};
use crate::error::{Error, Result};
use crate::maps::Multiplier;
use crate::parity::{ParityVector, DEFAULT_ENUMERATION_BUDGET};

pub const DEFAULT_CHUNK_SIZE: u64 = 4096;
pub const DEFAULT_LAMBDA_MAX: u64 = 10_000;
/// Longest vector the parity enumeration handles.
pub const PARITY_ENUM_MAX_PERIOD: usize = 126;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Orbit,
    ParityEnum,
}

/// Bounds of a search; only the ones relevant to its method are set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBounds {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n_max: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub step_cap: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub size_cap_bits: Option<u64>,
    /// Restricts an orbit scan to seeds `h + λq`, `0 ≤ λ ≤ lambda_max`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub class_h: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda_max: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub budget: Option<u64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchCounts {
    pub seeds: u64,
    /// Orbits that fell below their seed and so join an orbit already scanned.
    pub merged: u64,
    /// Orbits that closed into a cycle.
    pub closed: u64,
    pub undetermined_steps: u64,
    pub undetermined_size: u64,
    pub vectors: u64,
    pub solutions: u64,
}

impl SearchCounts {
    fn add(&mut self, o: &SearchCounts) {
        self.seeds += o.seeds;
        self.merged += o.merged;
        self.closed += o.closed;
        self.undetermined_steps += o.undetermined_steps;
        self.undetermined_size += o.undetermined_size;
        self.vectors += o.vectors;
        self.solutions += o.solutions;
    }

    pub fn undetermined(&self) -> u64 {
        self.undetermined_steps + self.undetermined_size
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchReport {
    pub q: Multiplier,
    pub method: Method,
    pub bounds: SearchBounds,
    /// Canonical cycles ordered by minimum seed.
    pub cycles: Vec<Cycle>,
    pub pi_count: usize,
    pub counts: SearchCounts,
    pub chunks_done: u64,
    pub total_chunks: u64,
    /// Set when the enumeration budget stopped the search early.
    pub partial: bool,
}

/// A search split into chunks: seed ranges for orbit scans, one period per
/// chunk for parity enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchJob {
    pub q: Multiplier,
    pub method: Method,
    pub bounds: SearchBounds,
    pub chunk_size: u64,
}

impl SearchJob {
    pub fn orbit(q: Multiplier, n_max: u64, step_cap: u64, size_cap_bits: u64) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::Range("n_max must be ≥ 1".into()));
        }
        Self::orbit_job(
            q,
            SearchBounds {
                n_max: Some(n_max),
                step_cap: Some(step_cap),
                size_cap_bits: Some(size_cap_bits),
                ..Default::default()
            },
        )
    }

    /// Orbit scan of the seeds `h + λq` for `0 ≤ λ ≤ lambda_max`.
    pub fn class_scan(q: Multiplier, h: u64, lambda_max: u64, step_cap: u64, size_cap_bits: u64) -> Result<Self> {
        if h == 0 || h >= q.get() {
            return Err(Error::Range(format!("class h must be in 1..={}, got {h}", q.get() - 1)));
        }
        Self::orbit_job(
            q,
            SearchBounds {
                class_h: Some(h),
                lambda_max: Some(lambda_max),
                step_cap: Some(step_cap),
                size_cap_bits: Some(size_cap_bits),
                ..Default::default()
            },
        )
    }

    fn orbit_job(q: Multiplier, bounds: SearchBounds) -> Result<Self> {
        if bounds.step_cap == Some(0) {
            return Err(Error::Range("step cap must be ≥ 1".into()));
        }
        if bounds.size_cap_bits.unwrap_or(0) < 2 {
            return Err(Error::Range("size cap must be ≥ 2 bits".into()));
        }
        Ok(SearchJob {
            q,
            method: Method::Orbit,
            bounds,
            chunk_size: DEFAULT_CHUNK_SIZE,
        })
    }

    pub fn parity_enum(q: Multiplier, p_max: usize, budget: u64) -> Result<Self> {
        if !(2..=PARITY_ENUM_MAX_PERIOD).contains(&p_max) {
            return Err(Error::Range(format!(
                "p_max must be in 2..={PARITY_ENUM_MAX_PERIOD}, got {p_max}"
            )));
        }
        Ok(SearchJob {
            q,
            method: Method::ParityEnum,
            bounds: SearchBounds {
                p_max: Some(p_max),
                budget: Some(budget),
                ..Default::default()
            },
            chunk_size: 1,
        })
    }

    pub fn with_chunk_size(mut self, chunk_size: u64) -> Self {
        if self.method == Method::Orbit {
            self.chunk_size = chunk_size.max(1);
        }
        self
    }

    fn seed_count(&self) -> u64 {
        match (self.bounds.class_h, self.bounds.lambda_max) {
            (Some(_), Some(l)) => l + 1,
            _ => self.bounds.n_max.unwrap_or(0),
        }
    }

    fn seed(&self, i: u64) -> u128 {
        match self.bounds.class_h {
            Some(h) => h as u128 + i as u128 * self.q.get() as u128,
            None => i as u128 + 1,
        }
    }

    pub fn total_chunks(&self) -> u64 {
        match self.method {
            Method::Orbit => self.seed_count().div_ceil(self.chunk_size),
            Method::ParityEnum => self.bounds.p_max.unwrap_or(1) as u64 - 1,
        }
    }

    fn period_of_chunk(i: u64) -> usize {
        i as usize + 2
    }

    /// Runs every remaining chunk. `on_checkpoint` sees the state after each
    /// batch of `checkpoint_every` chunks.
    pub fn run(
        &self,
        resume: Option<Checkpoint>,
        checkpoint_every: u64,
        mut on_checkpoint: impl FnMut(&Checkpoint) -> Result<()>,
    ) -> Result<SearchReport> {
        let (mut next, mut counts, mut cycles) = match resume {
            Some(cp) => {
                cp.check_matches(self)?;
                let cycles: BTreeMap<BigUint, Cycle> =
                    cp.cycles.into_iter().map(|c| (c.min_seed_n.clone(), c)).collect();
                (cp.next_chunk, cp.partial_counts, cycles)
            }
            None => (0, SearchCounts::default(), BTreeMap::new()),
        };
        let total = self.total_chunks();
        let stop = self.budget_cutoff(total);
        let batch = checkpoint_every.max(1);
        while next < stop {
            let end = (next + batch).min(stop);
            let results: Vec<(SearchCounts, Vec<Cycle>)> =
                (next..end).into_par_iter().map(|i| self.run_chunk(i)).collect();
            for (c, found) in results {
                counts.add(&c);
                for cy in found {
                    cycles.entry(cy.min_seed_n.clone()).or_insert(cy);
                }
            }
            next = end;
            on_checkpoint(&Checkpoint {
                q: self.q,
                method: self.method,
                next_chunk: next,
                partial_counts: counts,
                bounds: self.bounds,
                chunk_size: self.chunk_size,
                cycles: cycles.values().cloned().collect(),
            })?;
        }
        let cycles: Vec<Cycle> = cycles.into_values().collect();
        Ok(SearchReport {
            q: self.q,
            method: self.method,
            bounds: self.bounds,
            pi_count: cycles.len(),
            cycles,
            counts,
            chunks_done: next,
            total_chunks: total,
            partial: next < total,
        })
    }

    /// First chunk the enumeration budget cannot afford.
    fn budget_cutoff(&self, total: u64) -> u64 {
        let Method::ParityEnum = self.method else {
            return total;
        };
        let budget = self.bounds.budget.unwrap_or(u64::MAX);
        let mut used = 0u64;
        for i in 0..total {
            used = used.saturating_add(vectors_for_period(self.q, Self::period_of_chunk(i)));
            if used > budget {
                return i;
            }
        }
        total
    }

    fn run_chunk(&self, i: u64) -> (SearchCounts, Vec<Cycle>) {
        match self.method {
            Method::Orbit => {
                let lo = i * self.chunk_size;
                let hi = (lo + self.chunk_size).min(self.seed_count());
                let step_cap = self.bounds.step_cap.unwrap_or(u64::MAX);
                let size_cap = self.bounds.size_cap_bits.unwrap_or(u64::MAX);
                let mut counts = SearchCounts::default();
                let mut found = BTreeMap::new();
                for j in lo..hi {
                    counts.seeds += 1;
                    match scan_seed(self.q, self.seed(j), step_cap, size_cap) {
                        Outcome::Merged => counts.merged += 1,
                        Outcome::StepCap => counts.undetermined_steps += 1,
                        Outcome::SizeCap => counts.undetermined_size += 1,
                        Outcome::Closed { min, period } => {
                            counts.closed += 1;
                            if !found.contains_key(&min) {
                                let c = Cycle::from_min_seed(self.q, &min, period)
                                    .expect("detected orbits are periodic from their minimum");
                                found.insert(min, c);
                            }
                        }
                    }
                }
                (counts, found.into_values().collect())
            }
            Method::ParityEnum => enumerate_period(self.q, Self::period_of_chunk(i)),
        }
    }
}

pub fn find_cycles_orbit(q: Multiplier, n_max: u64, step_cap: u64, size_cap_bits: u64) -> Result<SearchReport> {
    SearchJob::orbit(q, n_max, step_cap, size_cap_bits)?.run(None, u64::MAX, |_| Ok(()))
}

pub fn find_cycles_parity_enum(q: Multiplier, p_max: usize) -> Result<SearchReport> {
    SearchJob::parity_enum(q, p_max, DEFAULT_ENUMERATION_BUDGET as u64)?.run(None, u64::MAX, |_| Ok(()))
}

/// An orbit value, kept in a machine word while it fits.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Value {
    Small(u128),
    Big(BigUint),
}

impl Value {
    #[inline]
    fn step(&mut self, q: u64) {
        match self {
            Value::Small(n) => {
                if *n & 1 == 0 {
                    *n >>= 1;
                } else if let Some(m) = n.checked_mul(q as u128).and_then(|m| m.checked_add(1)) {
                    *n = m >> 1;
                } else {
                    *self = Value::Big((BigUint::from(*n) * q + 1u32) >> 1);
                }
            }
            Value::Big(b) => {
                if b.is_odd() {
                    *b *= q;
                    *b += 1u32;
                }
                *b >>= 1;
                if b.bits() <= 128 {
                    *self = Value::Small(b.to_u128().expect("fits"));
                }
            }
        }
    }

    #[inline]
    fn bits(&self) -> u64 {
        match self {
            Value::Small(n) => 128 - n.leading_zeros() as u64,
            Value::Big(b) => b.bits(),
        }
    }

    fn to_biguint(&self) -> BigUint {
        match self {
            Value::Small(n) => BigUint::from(*n),
            Value::Big(b) => b.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Outcome {
    Closed { min: BigUint, period: usize },
    Merged,
    StepCap,
    SizeCap,
}

/// Follows the `T_q` orbit of `n0` with Brent's cycle detection.
///
/// The scan stops as soon as the orbit drops below `n0`: from there on it
/// follows the orbit of a smaller seed, and any cycle it could reach has its
/// minimum at or below that value, so the scan of that minimum finds it.
fn scan_seed(q: Multiplier, n0: u128, step_cap: u64, size_cap_bits: u64) -> Outcome {
    let q = q.get();
    let mut tortoise = Value::Small(n0);
    let mut hare = Value::Small(n0);
    let mut power = 1u64;
    let mut lam = 0u64;
    for _ in 0..step_cap {
        hare.step(q);
        if matches!(hare, Value::Small(v) if v < n0) {
            return Outcome::Merged;
        }
        if hare.bits() > size_cap_bits {
            return Outcome::SizeCap;
        }
        lam += 1;
        if hare == tortoise {
            let mut min = hare.clone();
            let mut v = hare;
            for _ in 1..lam {
                v.step(q);
                if v < min {
                    min = v.clone();
                }
            }
            return Outcome::Closed {
                min: min.to_biguint(),
                period: lam as usize,
            };
        }
        if lam == power {
            tortoise = hare.clone();
            power <<= 1;
            lam = 0;
        }
    }
    Outcome::StepCap
}

/// Vectors of length `p` the enumeration visits: first bit one, last bit
/// zero, and `q^P < 2^p`.
fn vectors_for_period(q: Multiplier, p: usize) -> u64 {
    (1..p)
        .take_while(|&pp| below_power_of_two(q, pp, p))
        .map(|pp| binomial(p - 2, pp - 1))
        .fold(0u64, u64::saturating_add)
}

fn below_power_of_two(q: Multiplier, pp: usize, p: usize) -> bool {
    // q^P < 2^p, deciding by bit length before multiplying out
    let approx = pp as f64 * (q.get() as f64).log2();
    if approx > p as f64 + 1.0 {
        return false;
    }
    q.pow(pp).bits() <= p as u64 && q.pow(pp) < BigUint::from(1u32) << p
}

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

fn enumerate_period(q: Multiplier, p: usize) -> (SearchCounts, Vec<Cycle>) {
    let totals: Vec<usize> = (1..p).take_while(|&pp| below_power_of_two(q, pp, p)).collect();
    let per_total: Vec<(SearchCounts, Vec<Cycle>)> = totals
        .into_par_iter()
        .map(|pp| {
            let mut counts = SearchCounts::default();
            let mut found = Vec::new();
            for_each_combination(p - 2, pp - 1, |middle| {
                counts.vectors += 1;
                let a = ParityVector::from_mask(1 | (middle << 1), p).expect("p ≤ 126");
                if a.primitive_period() != p {
                    return;
                }
                if let Some(x0) = first_periodicity_solve(q, &a) {
                    counts.solutions += 1;
                    let c = Cycle::through(q, &x0, p).expect("solutions are periodic");
                    found.push(c);
                }
            });
            (counts, found)
        })
        .collect();
    let mut counts = SearchCounts::default();
    let mut by_seed = BTreeMap::new();
    for (c, found) in per_total {
        counts.add(&c);
        for cy in found {
            by_seed.entry(cy.min_seed_n.clone()).or_insert(cy);
        }
    }
    (counts, by_seed.into_values().collect())
}

/// Calls `f` on every `width`-bit mask with exactly `ones` bits set, in
/// increasing order.
fn for_each_combination(width: usize, ones: usize, mut f: impl FnMut(u128)) {
    if ones > width {
        return;
    }
    if ones == 0 {
        f(0);
        return;
    }
    let limit = 1u128 << width;
    let mut x = (1u128 << ones) - 1;
    while x < limit {
        f(x);
        let c = x & x.wrapping_neg();
        let r = x + c;
        x = (((r ^ x) >> 2) / c) | r;
    }
}

/// Result of scanning `T_3` orbits for `1 ≤ n ≤ max`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollatzScan {
    pub max: u64,
    pub checked: u64,
    /// Longest run before an orbit first dropped below its seed.
    pub longest_stopping_time: u64,
    pub longest_stopping_seed: u64,
    /// Seeds whose orbit did not drop below them within the step cap.
    pub undetermined: Vec<u64>,
}

impl CollatzScan {
    /// Every seed reaches 1: by induction, since each orbit falls below its
    /// start and 1 → 2 → 1.
    pub fn all_reached_one(&self) -> bool {
        self.undetermined.is_empty() && self.checked == self.max
    }
}

pub fn verify_collatz(max: u64, step_cap: u64) -> Result<CollatzScan> {
    if max == 0 {
        return Err(Error::Range("max must be ≥ 1".into()));
    }
    let chunks = max.div_ceil(DEFAULT_CHUNK_SIZE);
    let parts: Vec<(u64, u64, Vec<u64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = (c * DEFAULT_CHUNK_SIZE + 1).max(2);
            let hi = ((c + 1) * DEFAULT_CHUNK_SIZE).min(max);
            let mut best = (0u64, 0u64);
            let mut bad = Vec::new();
            for n in lo..=hi {
                match collatz_stopping_time(n, step_cap) {
                    Some(t) if t > best.0 => best = (t, n),
                    Some(_) => {}
                    None => bad.push(n),
                }
            }
            (best.0, best.1, bad)
        })
        .collect();
    let mut scan = CollatzScan {
        max,
        checked: max,
        longest_stopping_time: 0,
        longest_stopping_seed: 1,
        undetermined: Vec::new(),
    };
    for (t, n, bad) in parts {
        if t > scan.longest_stopping_time {
            scan.longest_stopping_time = t;
            scan.longest_stopping_seed = n;
        }
        scan.undetermined.extend(bad);
    }
    Ok(scan)
}

fn collatz_stopping_time(n: u64, step_cap: u64) -> Option<u64> {
    let mut v = n as u128;
    for t in 1..=step_cap {
        v = if v & 1 == 1 { v.checked_mul(3)?.checked_add(1)? >> 1 } else { v >> 1 };
        if v < n as u128 {
            return Some(t);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: u64) -> Multiplier {
        Multiplier::new(v).unwrap()
    }

    fn seeds(r: &SearchReport) -> Vec<u64> {
        r.cycles.iter().map(|c| c.min_seed_n.to_u64().unwrap()).collect()
    }

    #[test]
    fn value_steps_across_the_word_boundary() {
        let mut v = Value::Small(u128::MAX);
        v.step(5);
        let expect: BigUint = (BigUint::from(u128::MAX) * 5u32 + 1u32) >> 1u32;
        assert_eq!(v, Value::Big(expect));
        let mut w = Value::Big(BigUint::from(1u32) << 128);
        w.step(5);
        assert_eq!(w, Value::Small(1 << 127));
    }

    #[test]
    fn scan_seed_outcomes() {
        assert_eq!(scan_seed(q(3), 1, 100, 64), Outcome::Closed { min: 1u32.into(), period: 2 });
        assert_eq!(scan_seed(q(3), 27, 1000, 64), Outcome::Merged);
        assert_eq!(scan_seed(q(5), 17, 100, 64), Outcome::Closed { min: 17u32.into(), period: 7 });
        assert_eq!(scan_seed(q(5), 7, 3, 64), Outcome::StepCap);
        assert_eq!(scan_seed(q(5), 7, 10_000, 64), Outcome::SizeCap);
    }

    #[test]
    fn orbit_search_small_cases() {
        let r = find_cycles_orbit(q(5), 2000, 10_000, 256).unwrap();
        assert_eq!(seeds(&r), [1, 13, 17]);
        assert_eq!(r.pi_count, 3);
        assert_eq!(r.counts.seeds, 2000);
        let r = find_cycles_orbit(q(3), 1000, 10_000, 256).unwrap();
        assert_eq!(seeds(&r), [1]);
        assert_eq!(r.counts.undetermined(), 0);
        let r = find_cycles_orbit(q(7), 1000, 10_000, 256).unwrap();
        assert_eq!(seeds(&r), [1]);
        assert_eq!(r.cycles[0].period, 3);
    }

    #[test]
    fn chunking_does_not_change_results() {
        let base = SearchJob::orbit(q(5), 3000, 5000, 200).unwrap();
        let a = base.run(None, u64::MAX, |_| Ok(())).unwrap();
        let b = base.with_chunk_size(7).run(None, 3, |_| Ok(())).unwrap();
        assert_eq!(a.cycles, b.cycles);
        assert_eq!(a.counts, b.counts);
    }

    #[test]
    fn resume_from_any_checkpoint_matches_full_run() {
        let job = SearchJob::orbit(q(5), 2500, 5000, 200).unwrap().with_chunk_size(100);
        let full = job.run(None, u64::MAX, |_| Ok(())).unwrap();
        let mut saved = Vec::new();
        job.run(None, 4, |cp| {
            saved.push(cp.clone());
            Ok(())
        })
        .unwrap();
        for cp in saved {
            let resumed = job.run(Some(cp), 4, |_| Ok(())).unwrap();
            assert_eq!(resumed, full);
        }
    }

    #[test]
    fn resume_rejects_mismatched_jobs() {
        let job = SearchJob::orbit(q(5), 500, 5000, 200).unwrap();
        let mut last = None;
        job.run(None, 1, |cp| {
            last = Some(cp.clone());
            Ok(())
        })
        .unwrap();
        let other = SearchJob::orbit(q(5), 600, 5000, 200).unwrap();
        assert!(other.run(last, 1, |_| Ok(())).is_err());
    }

    #[test]
    fn class_scan_finds_members_of_the_class() {
        let r = SearchJob::class_scan(q(5), 2, 10, 5000, 200)
            .unwrap()
            .run(None, u64::MAX, |_| Ok(()))
            .unwrap();
        assert!(seeds(&r).contains(&17));
        assert_eq!(r.counts.seeds, 11);
        assert!(SearchJob::class_scan(q(5), 5, 10, 10, 10).is_err());
    }

    #[test]
    fn parity_enum_examples() {
        let r = find_cycles_parity_enum(q(5), 7).unwrap();
        assert_eq!(seeds(&r), [1, 13, 17]);
        let r = find_cycles_parity_enum(q(3), 12).unwrap();
        assert_eq!(seeds(&r), [1]);
        let r = find_cycles_parity_enum(q(181), 15).unwrap();
        let xs: Vec<u64> = r.cycles.iter().map(|c| c.min_seed_x.value().to_u64().unwrap()).collect();
        assert_eq!(xs, [9721, 12601]);
        assert!(r.cycles.iter().all(|c| c.period == 15 && c.total_parity == 2));
    }

    #[test]
    fn parity_enum_budget_marks_partial() {
        let r = SearchJob::parity_enum(q(3), 20, 100).unwrap().run(None, 1, |_| Ok(())).unwrap();
        assert!(r.partial);
        assert!(r.counts.vectors <= 100);
        assert_eq!(seeds(&r), [1]);
    }

    #[test]
    fn combinations_are_complete() {
        for width in 0..10 {
            for ones in 0..=width {
                let mut seen = Vec::new();
                for_each_combination(width, ones, |m| seen.push(m));
                let brute: Vec<u128> = (0..1u128 << width).filter(|m| m.count_ones() as usize == ones).collect();
                assert_eq!(seen, brute);
                assert_eq!(seen.len() as u64, binomial(width, ones));
            }
        }
    }

    #[test]
    fn collatz_scan_small() {
        let s = verify_collatz(10_000, 10_000).unwrap();
        assert!(s.all_reached_one());
        let mut best = (0, 0);
        for n in 2..=10_000u64 {
            let t = collatz_stopping_time(n, 10_000).unwrap();
            if t > best.0 {
                best = (t, n);
            }
        }
        assert_eq!((s.longest_stopping_time, s.longest_stopping_seed), best);
        assert!(!verify_collatz(100, 2).unwrap().all_reached_one());
    }
}

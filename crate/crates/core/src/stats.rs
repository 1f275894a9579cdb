//! The binomial law of the parity coefficient `M_k`, its moments, the
//! Chebyshev bound on divergence, and empirical distributions over seeds.

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{class_parity, f_step, CqInt, Multiplier};
use crate::parity::{seed_parity_vector, seed_total_parity, WORD_PARITY_MAX};

/// `P(M_k = m/k) = C(k, m) / 2^k`.
pub fn binomial_pmf(k: usize, m: usize) -> Result<Ratio<BigUint>> {
    if m > k {
        return Err(Error::Range(format!("m must be in 0..={k}, got {m}")));
    }
    Ok(Ratio::new(binomial(k, m), BigUint::one() << k))
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::default();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: Ratio<u64>,
    pub sd: f64,
}

/// Mean and standard deviation of `M_k` under the uniform law on vectors.
pub fn mk_moments(k: usize) -> Result<Moments> {
    if k == 0 {
        return Err(Error::Range("k must be ≥ 1".into()));
    }
    Ok(Moments {
        mean: Ratio::new(1, 2),
        sd: 1.0 / (2.0 * (k as f64).sqrt()),
    })
}

/// Chebyshev lower bound for `P(M_k > ln 2 / ln q)`,
/// `1 - ln²q / (k (2 ln²q - 8 ln 2 (ln q - ln 2)))`. Negative values are
/// vacuous.
pub fn chebyshev_divergence_bound(q: Multiplier, k: usize) -> Result<f64> {
    if q.get() < 5 {
        return Err(Error::Range(format!(
            "the divergence bound needs q ≥ 5 (q = {} puts the threshold at the mean)",
            q.get()
        )));
    }
    if k == 0 {
        return Err(Error::Range("k must be ≥ 1".into()));
    }
    let lq = (q.get() as f64).ln();
    let l2 = std::f64::consts::LN_2;
    Ok(1.0 - lq * lq / (k as f64 * (2.0 * lq * lq - 8.0 * l2 * (lq - l2))))
}

/// Least `m` with `q^m > 2^k`, i.e. `m/k > ln 2 / ln q`. Equality is
/// impossible for odd `q ≥ 3`, so the comparison is exact.
pub fn divergence_threshold(q: Multiplier, k: usize) -> usize {
    let two_k = BigUint::one() << k;
    let mut m = ((k as f64) / (q.get() as f64).log2()).floor() as usize;
    m = m.saturating_sub(1);
    while q.pow(m) <= two_k {
        m += 1;
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Scope {
    /// Every seed `n0 ∈ [1, 2^k]`.
    Exhaustive,
    /// `count` seeds drawn uniformly from `[1, 2^k]` with ChaCha8 seeded by
    /// `seed`.
    Sampled { count: u64, seed: u64 },
}

/// Counts of `P_k` over a set of seeds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MuHistogram {
    pub q: Multiplier,
    pub k: usize,
    pub scope: Scope,
    /// `counts[m]` = number of seeds with `P_k = m`.
    pub counts: Vec<u64>,
    pub total: u64,
}

impl MuHistogram {
    /// Fraction of seeds with `μ_k > ln 2 / ln q`.
    pub fn fraction_above_divergence_threshold(&self) -> f64 {
        let m0 = divergence_threshold(self.q, self.k);
        let above: u64 = self.counts.iter().skip(m0).sum();
        above as f64 / self.total as f64
    }

    /// Whether the counts are exactly `C(k, m)`.
    pub fn is_binomial(&self) -> bool {
        self.counts.iter().enumerate().all(|(m, &c)| binomial(self.k, m) == BigUint::from(c))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,count\n");
        for (m, c) in self.counts.iter().enumerate() {
            out.push_str(&format!("{m},{c}\n"));
        }
        out
    }
}

/// Distribution of `P_k` over seeds. `budget` caps the number of seeds
/// examined.
pub fn mu_distribution(q: Multiplier, k: usize, scope: Scope, budget: u64) -> Result<MuHistogram> {
    if k == 0 {
        return Err(Error::Range("k must be ≥ 1".into()));
    }
    let counts = match scope {
        Scope::Exhaustive => {
            if k > 63 || (1u64 << k) > budget {
                return Err(Error::Budget {
                    needed: 1u128 << k.min(127),
                    budget: budget as u128,
                });
            }
            let n = 1u64 << k;
            const CHUNK: u64 = 1 << 14;
            (0..n.div_ceil(CHUNK))
                .into_par_iter()
                .map(|c| {
                    let mut h = vec![0u64; k + 1];
                    for n0 in (c * CHUNK + 1)..=((c + 1) * CHUNK).min(n) {
                        h[seed_total_parity(q, n0 as u128, k) as usize] += 1;
                    }
                    h
                })
                .reduce(|| vec![0u64; k + 1], add_counts)
        }
        Scope::Sampled { count, seed } => {
            if count > budget {
                return Err(Error::Budget {
                    needed: count as u128,
                    budget: budget as u128,
                });
            }
            let seeds = sample_seeds(k, count, seed);
            seeds
                .par_iter()
                .fold(
                    || vec![0u64; k + 1],
                    |mut h, n0| {
                        h[total_parity_of(q, n0, k)] += 1;
                        h
                    },
                )
                .reduce(|| vec![0u64; k + 1], add_counts)
        }
    };
    let total = counts.iter().sum();
    Ok(MuHistogram {
        q,
        k,
        scope,
        counts,
        total,
    })
}

fn add_counts(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

fn total_parity_of(q: Multiplier, n0: &BigUint, k: usize) -> usize {
    if k <= WORD_PARITY_MAX {
        let lo = n0.iter_u64_digits().take(2).enumerate().fold(0u128, |acc, (i, d)| acc | (d as u128) << (64 * i));
        seed_total_parity(q, lo, k) as usize
    } else {
        seed_parity_vector(q, n0, k).expect("positive seed").total_parity()
    }
}

/// `count` seeds uniform on `[1, 2^k]`, drawn in order from one ChaCha8
/// stream: each seed takes `ceil(k/32)` 32-bit words, low word first, masked to
/// `k` bits, plus one.
pub fn sample_seeds(k: usize, count: u64, seed: u64) -> Vec<BigUint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words = k.div_ceil(32);
    (0..count)
        .map(|_| {
            let mut digits: Vec<u32> = (0..words).map(|_| rng.next_u32()).collect();
            let spare = words * 32 - k;
            if spare > 0 {
                let last = digits.last_mut().expect("k ≥ 1");
                *last &= u32::MAX >> spare;
            }
            BigUint::new(digits) + 1u32
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub q: Multiplier,
    pub k: usize,
    pub t: u64,
    /// Seeds `n0 ≤ t` with `μ_k > ln 2 / ln q`.
    pub above: u64,
    pub fraction: f64,
    /// Smallest `P_k` counted as above the threshold.
    pub threshold_ones: usize,
}

/// Fraction of `n0 ∈ [1, t]` whose `μ_k` lies strictly above `ln 2 / ln q`.
pub fn density_estimate(q: Multiplier, k: usize, t: u64) -> Result<DensityEstimate> {
    if q.get() < 5 {
        return Err(Error::Range(format!("density estimates need q ≥ 5, got {}", q.get())));
    }
    if k == 0 || t == 0 {
        return Err(Error::Range("k and t must be ≥ 1".into()));
    }
    let m0 = divergence_threshold(q, k);
    let above: u64 = (1..=t)
        .into_par_iter()
        .filter(|&n0| total_parity_of(q, &BigUint::from(n0), k) >= m0)
        .count() as u64;
    Ok(DensityEstimate {
        q,
        k,
        t,
        above,
        fraction: above as f64 / t as f64,
        threshold_ones: m0,
    })
}

fn three() -> Multiplier {
    Multiplier::new(3).expect("3 is valid")
}

/// `μ_1, …, μ_{k_max}` along the `q = 3` orbit of `x0`.
pub fn equiparity_trace(x0: &CqInt, k_max: usize) -> Result<Vec<Ratio<u64>>> {
    let bits = q3_bits(x0, k_max)?;
    let mut ones = 0u64;
    Ok(bits
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            ones += b as u64;
            Ratio::new(ones, i as u64 + 1)
        })
        .collect())
}

fn q3_bits(x0: &CqInt, k_max: usize) -> Result<Vec<u8>> {
    if k_max == 0 {
        return Err(Error::Range("k_max must be ≥ 1".into()));
    }
    let q = three();
    let mut x = x0.value().clone();
    let mut bits = Vec::with_capacity(k_max);
    for _ in 0..k_max {
        let b = class_parity(q, &x).ok_or_else(|| Error::NotInClass {
            q: 3,
            value: x.clone(),
        })?;
        bits.push(b.as_u8());
        x = f_step(q, &x, b);
    }
    Ok(bits)
}

/// Equiparity of a `q = 3` orbit after it reaches the trivial cycle `{5, 9}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquiparityReport {
    /// First index `a` with `x_a ∈ {5, 9}`.
    pub absorbed_at: Option<usize>,
    /// Every window of `k'` steps after absorption has
    /// `|μ - 1/2| ≤ 2/k'`.
    pub window_ok: bool,
    /// Every prefix `k > a` has `|μ_k - 1/2| ≤ (|2P_a - a| + 1) / (2k)`: the
    /// transient before absorption fades as `1/k`.
    pub prefix_ok: bool,
    pub final_mu: Ratio<u64>,
}

pub fn equiparity_check(x0: &CqInt, k_max: usize) -> Result<EquiparityReport> {
    let bits = q3_bits(x0, k_max)?;
    let q = three();
    let mut x = x0.value().clone();
    let mut absorbed_at = None;
    let (five, nine) = (BigUint::from(5u32), BigUint::from(9u32));
    for (i, &b) in bits.iter().enumerate() {
        if x == five || x == nine {
            absorbed_at = Some(i);
            break;
        }
        x = f_step(q, &x, crate::maps::ParityBit::from_bool(b == 1));
    }
    let total: u64 = bits.iter().map(|&b| b as u64).sum();
    let final_mu = Ratio::new(total, k_max as u64);
    let Some(a) = absorbed_at else {
        return Ok(EquiparityReport {
            absorbed_at,
            window_ok: true,
            prefix_ok: true,
            final_mu,
        });
    };
    let p_a: i64 = bits[..a].iter().map(|&b| b as i64).sum();
    let transient = (2 * p_a - a as i64).abs();
    let mut window_ones = 0i64;
    let mut prefix_ones = p_a;
    let (mut window_ok, mut prefix_ok) = (true, true);
    for (w, &b) in bits[a..].iter().enumerate() {
        let kp = w as i64 + 1;
        window_ones += b as i64;
        prefix_ones += b as i64;
        // |ones/k' - 1/2| ≤ 2/k'  ⇔  |2·ones - k'| ≤ 4
        if (2 * window_ones - kp).abs() > 4 {
            window_ok = false;
        }
        let k = a as i64 + kp;
        if (2 * prefix_ones - k).abs() > transient + 1 {
            prefix_ok = false;
        }
    }
    Ok(EquiparityReport {
        absorbed_at,
        window_ok,
        prefix_ok,
        final_mu,
    })
}

/// `μ` as `f64`, for reports.
pub fn mu_f64(r: &Ratio<u64>) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

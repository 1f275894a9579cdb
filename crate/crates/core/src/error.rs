use num_bigint::BigUint;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("q must be odd ≥ 3 (got {0})")]
    InvalidMultiplier(u64),

    #[error("{value} is not in Z_c{q} (need x > 1 and x ≡ 1 mod {})", 2 * (.q - 1))]
    NotInClass { q: u64, value: BigUint },

    #[error("seed must be a positive integer")]
    ZeroSeed,

    #[error("index out of range: {0}")]
    Index(String),

    #[error("value out of range: {0}")]
    Range(String),

    #[error("malformed parity vector: {0}")]
    MalformedParity(String),

    #[error("parity vector does not belong to seed {seed} (closed form is not integral)")]
    NotParityVector { seed: BigUint },

    #[error("{value} is not periodic within {steps} steps")]
    NotPeriodic { value: BigUint, steps: usize },

    #[error("no admissible congruence class for q={q}, p={p}, s={s}")]
    NoAdmissibleClass { q: u64, p: usize, s: usize },

    #[error("enumeration of {needed} items exceeds the budget of {budget}")]
    Budget { needed: u128, budget: u128 },

    #[error("malformed trajectory: {0}")]
    MalformedTrajectory(String),

    #[error("catalog: {0}")]
    Catalog(String),
}

pub type Result<T> = std::result::Result<T, Error>;

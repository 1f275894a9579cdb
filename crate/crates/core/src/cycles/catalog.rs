//! JSON formats for cycle catalogs and search checkpoints.
//!
//! Big integers are written as decimal strings.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::cycles::search::{Method, SearchBounds, SearchCounts, SearchJob};
use crate::cycles::Cycle;
use crate::error::{Error, Result};
use crate::maps::Multiplier;
use crate::parity::ParityVector;

/// Known cycles of `F_5` and `F_181`, shipped with the crate.
pub const KNOWN_CYCLES: &str = include_str!("../../data/known_cycles.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub q: u64,
    #[serde(with = "decimal")]
    pub n0: BigUint,
    #[serde(with = "decimal")]
    pub x0: BigUint,
    pub p: usize,
    #[serde(rename = "P_p")]
    pub total_parity: usize,
    pub s: usize,
    pub h: u64,
    #[serde(with = "decimal")]
    pub lambda: BigUint,
    pub parity: ParityVector,
}

impl From<&Cycle> for CatalogEntry {
    fn from(c: &Cycle) -> Self {
        CatalogEntry {
            q: c.q.get(),
            n0: c.min_seed_n.clone(),
            x0: c.min_seed_x.value().clone(),
            p: c.period,
            total_parity: c.total_parity,
            s: c.s,
            h: c.class_h,
            lambda: c.lambda.clone(),
            parity: c.parity.clone(),
        }
    }
}

impl From<Cycle> for CatalogEntry {
    fn from(c: Cycle) -> Self {
        CatalogEntry::from(&c)
    }
}

impl CatalogEntry {
    /// Fields that disagree with the cycle recomputed from `(q, n0, p)`.
    pub fn mismatches(&self, recomputed: &Cycle) -> Vec<&'static str> {
        let fresh = CatalogEntry::from(recomputed);
        let mut out = Vec::new();
        if self.x0 != fresh.x0 {
            out.push("x0");
        }
        if self.total_parity != fresh.total_parity {
            out.push("P_p");
        }
        if self.s != fresh.s {
            out.push("s");
        }
        if self.h != fresh.h {
            out.push("h");
        }
        if self.lambda != fresh.lambda {
            out.push("lambda");
        }
        if self.parity != fresh.parity {
            out.push("parity");
        }
        out
    }

    /// Recomputes the cycle from `(q, n0, p)` and compares every field.
    pub fn verify(&self) -> Result<Cycle> {
        let q = Multiplier::new(self.q)?;
        let c = Cycle::from_min_seed(q, &self.n0, self.p)?;
        let bad = self.mismatches(&c);
        if !bad.is_empty() {
            return Err(Error::Catalog(format!(
                "entry q={} n0={} disagrees on {}",
                self.q,
                self.n0,
                bad.join(", ")
            )));
        }
        Ok(c)
    }
}

impl Serialize for Cycle {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CatalogEntry::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Cycle {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        CatalogEntry::deserialize(d)?.verify().map_err(serde::de::Error::custom)
    }
}

pub fn read_catalog(json: &str) -> Result<Vec<CatalogEntry>> {
    serde_json::from_str(json).map_err(|e| Error::Catalog(e.to_string()))
}

pub fn write_catalog(cycles: &[Cycle]) -> String {
    let entries: Vec<CatalogEntry> = cycles.iter().map(CatalogEntry::from).collect();
    serde_json::to_string_pretty(&entries).expect("catalog entries serialize")
}

pub fn known_cycles() -> Vec<CatalogEntry> {
    read_catalog(KNOWN_CYCLES).expect("shipped catalog parses")
}

/// Search state after a batch of chunks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub q: Multiplier,
    pub method: Method,
    pub next_chunk: u64,
    pub partial_counts: SearchCounts,
    pub bounds: SearchBounds,
    pub chunk_size: u64,
    pub cycles: Vec<Cycle>,
}

impl Checkpoint {
    pub fn check_matches(&self, job: &SearchJob) -> Result<()> {
        if self.q != job.q || self.method != job.method || self.bounds != job.bounds || self.chunk_size != job.chunk_size
        {
            return Err(Error::Catalog(
                "checkpoint was written by a search with different parameters".into(),
            ));
        }
        if self.next_chunk > job.total_chunks() {
            return Err(Error::Catalog("checkpoint is past the end of the search".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("checkpoint serializes")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::Catalog(e.to_string()))
    }
}

pub(crate) mod decimal {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        BigUint::parse_bytes(s.as_bytes(), 10)
            .ok_or_else(|| serde::de::Error::custom(format!("not a decimal integer: {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_catalog_verifies() {
        let entries = known_cycles();
        assert_eq!(entries.len(), 5);
        for e in &entries {
            let c = e.verify().unwrap();
            assert!(c.checks().all());
        }
    }

    #[test]
    fn catalog_round_trip() {
        let cycles: Vec<Cycle> = known_cycles().iter().map(|e| e.verify().unwrap()).collect();
        let json = write_catalog(&cycles);
        let back: Vec<Cycle> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cycles);
    }

    #[test]
    fn tampered_entries_are_rejected() {
        let mut e = known_cycles().remove(1);
        e.s += 1;
        let err = e.verify().unwrap_err();
        assert!(err.to_string().contains('s'));
        let mut e = known_cycles().remove(0);
        e.p = 6;
        assert!(e.verify().is_err());
        assert!(read_catalog("[{\"q\": 5}]").is_err());
    }
}

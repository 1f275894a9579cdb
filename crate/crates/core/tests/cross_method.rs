//! Orbit scanning and parity-vector enumeration find cycles by unrelated
//! routes; on overlapping bounds they must list the same cycles.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use qcollatz::cycles::{find_cycles_orbit, find_cycles_parity_enum, Cycle, SearchJob};
use qcollatz::maps::Multiplier;

fn keys(cycles: &[Cycle]) -> BTreeSet<(BigUint, usize)> {
    cycles.iter().map(|c| (c.min_seed_n.clone(), c.period)).collect()
}

fn agree(q: u64, n_max: u64, p_max: usize) {
    let q = Multiplier::new(q).unwrap();
    let orbit = find_cycles_orbit(q, n_max, 10_000, 1024).unwrap();
    let parity = find_cycles_parity_enum(q, p_max).unwrap();
    assert!(!parity.partial);
    let from_orbit: BTreeSet<_> = keys(&orbit.cycles).into_iter().filter(|(_, p)| *p <= p_max).collect();
    let from_parity: BTreeSet<_> = keys(&parity.cycles)
        .into_iter()
        .filter(|(n, _)| *n <= BigUint::from(n_max))
        .collect();
    assert_eq!(from_orbit, from_parity, "q={}", q.get());
}

#[test]
fn q3_methods_agree() {
    agree(3, 20_000, 24);
}

#[test]
fn q5_methods_agree() {
    agree(5, 20_000, 20);
}

#[test]
fn q7_methods_agree() {
    agree(7, 20_000, 20);
}

#[test]
fn q181_methods_agree() {
    agree(181, 20_000, 16);
}

#[test]
fn same_cycles_from_either_side() {
    let q = Multiplier::new(5).unwrap();
    let orbit = find_cycles_orbit(q, 1_000, 10_000, 1024).unwrap();
    let parity = find_cycles_parity_enum(q, 7).unwrap();
    assert_eq!(orbit.cycles, parity.cycles);
    assert_eq!(orbit.pi_count, 3);
}

#[test]
fn chunking_does_not_change_the_result() {
    let q = Multiplier::new(5).unwrap();
    let whole = SearchJob::orbit(q, 5_000, 10_000, 1024).unwrap().run(None, 1, |_| Ok(())).unwrap();
    for size in [1, 7, 333, 5_000] {
        let r = SearchJob::orbit(q, 5_000, 10_000, 1024)
            .unwrap()
            .with_chunk_size(size)
            .run(None, 3, |_| Ok(()))
            .unwrap();
        assert_eq!(r.cycles, whole.cycles);
        assert_eq!(r.counts, whole.counts);
    }
}

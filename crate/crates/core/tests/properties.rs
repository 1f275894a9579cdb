use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};
use proptest::prelude::*;

use qcollatz::cycles::{
    first_periodicity_solve, g_function, known_cycles, second_periodicity_check, Checkpoint, Cycle, Method,
    SearchBounds, SearchCounts,
};
use qcollatz::maps::{conjugate, f_map, t_map, unconjugate, CqInt, Multiplier};
use qcollatz::parity::{parity_vector, seed_from_parity, seed_parity_vector, ParityVector};
use qcollatz::stats::binomial_pmf;
use qcollatz::trajectory::{check_growth_bounds, closed_form_power, closed_form_product, iterate};

fn any_q() -> impl Strategy<Value = Multiplier> {
    (1u64..200).prop_map(|h| Multiplier::new(2 * h + 1).unwrap())
}

fn seed() -> impl Strategy<Value = BigUint> {
    prop_oneof![
        (1u64..10_000).prop_map(BigUint::from),
        any::<u128>().prop_map(|v| BigUint::from(v) + 1u32),
    ]
}

fn bits(max: usize) -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), 1..max)
}

/// `T_q` on machine words, written out from the definition.
fn t_word(q: u64, n: u128) -> u128 {
    if n.is_multiple_of(2) {
        n / 2
    } else {
        (q as u128 * n).div_ceil(2)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn conjugacy(q in any_q(), n in seed()) {
        let x = conjugate(q, &n).unwrap();
        prop_assert_eq!(unconjugate(q, &x).unwrap(), n.clone());
        prop_assert_eq!(x.value(), &(&n * (2 * (q.get() - 1)) + 1u32));
        let fx = f_map(q, &x).unwrap();
        prop_assert_eq!(unconjugate(q, &fx).unwrap(), t_map(q, &n));
    }

    #[test]
    fn t_map_matches_word_arithmetic(q in any_q(), n in 1u64..u64::MAX / 512) {
        prop_assert_eq!(t_map(q, &BigUint::from(n)), BigUint::from(t_word(q.get(), n as u128)));
    }

    #[test]
    fn seed_from_parity_inverts_parity(q in any_q(), a in bits(150)) {
        let a = ParityVector::from_bools(&a).unwrap();
        let n = seed_from_parity(q, &a);
        prop_assert!(n >= BigUint::one() && n <= BigUint::one() << a.len());
        prop_assert_eq!(seed_parity_vector(q, &n, a.len()).unwrap(), a.clone());
        // and along the conjugate orbit
        let x = conjugate(q, &n).unwrap();
        prop_assert_eq!(parity_vector(q, &x, a.len()).unwrap(), a);
    }

    #[test]
    fn closed_forms_agree_with_iteration(q in any_q(), n in seed(), k in 1usize..120) {
        let x0 = conjugate(q, &n).unwrap();
        let traj = iterate(q, &x0, k, 1 << 20).unwrap();
        let mut x = x0.clone();
        for _ in 0..k {
            x = f_map(q, &x).unwrap();
        }
        prop_assert_eq!(traj.terminal(), &x);
        prop_assert_eq!(closed_form_power(q, &x0, traj.parity()).unwrap(), x.clone());
        prop_assert_eq!(closed_form_product(q, &traj).unwrap(), x);
    }

    #[test]
    fn lower_growth_bound_holds(q in any_q(), n in seed(), k in 1usize..200) {
        let x0 = conjugate(q, &n).unwrap();
        let traj = iterate(q, &x0, k, 1 << 20).unwrap();
        let r = check_growth_bounds(q, &traj);
        prop_assert!(r.lower_ok);
        prop_assert!(r.lower_violations.is_empty());
    }

    #[test]
    fn leading_ones_is_two_adic_valuation(q in any_q(), n in 1u64..1 << 40) {
        let k = 64;
        let a = seed_parity_vector(q, &BigUint::from(n), k).unwrap();
        // count odd steps directly
        let mut run = 0;
        let mut m = n as u128;
        while run < k && m % 2 == 1 {
            m = t_word(q.get(), m);
            run += 1;
        }
        let v = ((q.get() as u128 - 2) * n as u128 + 1).trailing_zeros() as usize;
        prop_assert_eq!(a.leading_ones(), run);
        prop_assert_eq!(run, v.min(k));
    }

    #[test]
    fn binomial_pmf_is_symmetric_and_normalised(k in 1usize..80) {
        let mut total = Ratio::from_integer(BigUint::zero());
        for m in 0..=k {
            let p = binomial_pmf(k, m).unwrap();
            prop_assert_eq!(&p, &binomial_pmf(k, k - m).unwrap());
            total += p;
        }
        prop_assert!(total.is_one());
    }

    #[test]
    fn g_function_marks_the_ones(a in bits(100)) {
        let mut a = a;
        a[0] = true;
        a.push(false);
        let v = ParityVector::from_bools(&a).unwrap();
        let g = g_function(&v).unwrap();
        prop_assert_eq!(g.len(), v.total_parity());
        prop_assert!(g.values.windows(2).all(|w| w[0] > w[1]));
        prop_assert_eq!(*g.values.last().unwrap(), 0);
        for (j, &gj) in g.values.iter().enumerate() {
            prop_assert!(a[gj]);
            // ones to the right of g(j), g(j) included
            prop_assert_eq!(a[gj..].iter().filter(|&&b| b).count(), j + 1);
        }
    }

    #[test]
    fn checkpoint_json_round_trip(
        next in 0u64..50,
        seeds in any::<u32>(),
        merged in any::<u32>(),
        vectors in any::<u32>(),
        chunk in 1u64..10_000,
        n_max in proptest::option::of(1u64..1 << 40),
        take in 0usize..=5,
    ) {
        let cycles: Vec<Cycle> = known_cycles().into_iter().take(take).map(|e| e.verify().unwrap()).collect();
        let cp = Checkpoint {
            q: Multiplier::new(5).unwrap(),
            method: Method::Orbit,
            next_chunk: next,
            partial_counts: SearchCounts {
                seeds: seeds as u64,
                merged: merged as u64,
                vectors: vectors as u64,
                ..SearchCounts::default()
            },
            bounds: SearchBounds { n_max, step_cap: Some(10), ..SearchBounds::default() },
            chunk_size: chunk,
            cycles,
        };
        prop_assert_eq!(Checkpoint::from_json(&cp.to_json()).unwrap(), cp);
    }
}

/// Both periodicity equations, solved independently, pick out the same
/// cycles. Exhaustive over every cycle-shaped vector of length ≤ 12.
#[test]
fn periodicity_conditions_agree() {
    for qv in [3u64, 5, 7, 9, 11, 13] {
        let q = Multiplier::new(qv).unwrap();
        let mut solved = 0;
        for p in 2..=12usize {
            for mask in 0u32..1 << p {
                let a: Vec<bool> = (0..p).map(|j| mask >> j & 1 == 1).collect();
                if !a[0] || a[p - 1] {
                    continue;
                }
                let v = ParityVector::from_bools(&a).unwrap();
                let first = first_periodicity_solve(q, &v);

                // n0 from the g-function form: (2^p - q^P) n0 = Σ 2^{g(j)} q^j
                let total = v.total_parity() as u32;
                let two_p = BigUint::one() << p;
                let q_pow = BigUint::from(qv).pow(total);
                let mut second = None;
                if two_p > q_pow {
                    let d = two_p - q_pow;
                    let mut rhs = BigUint::zero();
                    for (j, &gj) in g_function(&v).unwrap().values.iter().enumerate() {
                        rhs += (BigUint::one() << gj) * BigUint::from(qv).pow(j as u32);
                    }
                    let (n0, r) = rhs.div_rem(&d);
                    if r.is_zero() && !n0.is_zero() && seed_parity_vector(q, &n0, p).unwrap() == v {
                        assert!(second_periodicity_check(q, &n0, &v));
                        second = Some(n0);
                    }
                }
                let first_n = first.map(|x: CqInt| unconjugate(q, &x).unwrap());
                assert_eq!(first_n, second, "q={qv} a={v}");
                if let Some(n0) = &first_n {
                    assert!(second_periodicity_check(q, n0, &v));
                    solved += 1;
                }
            }
        }
        assert!(solved > 0 || !matches!(qv, 3 | 5 | 7), "q={qv}");
    }
}

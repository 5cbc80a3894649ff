//! Branch and bound against plain enumeration of all `m^n` assignments.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use stretchpack_core::oracle::{feasible, min_capacity, OracleConfig};
use stretchpack_core::Rat;

/// Smallest achievable maximum bin load, by trying every assignment.
fn brute_min_max_load(sizes: &[Rat], m: usize) -> Rat {
    let n = sizes.len();
    let mut best: Option<Rat> = None;
    let mut assignment = vec![0usize; n];
    loop {
        let mut loads = vec![Rat::zero(); m];
        for (s, &b) in sizes.iter().zip(&assignment) {
            loads[b] += s;
        }
        let max = loads.into_iter().max().unwrap();
        if best.as_ref().is_none_or(|b| max < *b) {
            best = Some(max);
        }
        // Next assignment in base m.
        let mut i = 0;
        loop {
            if i == n {
                return best.unwrap();
            }
            assignment[i] += 1;
            if assignment[i] < m {
                break;
            }
            assignment[i] = 0;
            i += 1;
        }
    }
}

fn corpus(count: usize, seed: u64) -> Vec<(Vec<Rat>, usize)> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = (rng.next_u64() % 10) as usize;
            let m = 1 + (rng.next_u64() % 3) as usize;
            let sizes = (0..n).map(|_| Rat::new((rng.next_u64() % 49) as i64, 4)).collect();
            (sizes, m)
        })
        .collect()
}

#[test]
fn feasibility_and_min_capacity_match_enumeration() {
    let cfg = OracleConfig::default();
    for (sizes, m) in corpus(200, 0x5eed) {
        let opt = brute_min_max_load(&sizes, m);
        assert_eq!(min_capacity(&sizes, m, &cfg).unwrap(), opt, "{sizes:?} m={m}");

        let quarter = Rat::new(1, 4);
        let mut caps = vec![Rat::from(12), opt.clone(), &opt + &quarter];
        if opt >= quarter {
            caps.push(&opt - &quarter);
        }
        for cap in caps {
            let got = feasible(&sizes, m, &cap, &cfg).unwrap();
            assert_eq!(got.is_some(), opt <= cap, "{sizes:?} m={m} cap={cap}");
            if let Some(p) = got {
                assert!(p.verify(&sizes, m));
                assert_eq!(p.bin_count(), m);
            }
        }
    }
}

#[test]
fn feasibility_is_monotone_in_capacity() {
    let cfg = OracleConfig::default();
    for (sizes, m) in corpus(60, 42) {
        let mut seen_feasible = false;
        for k in 0..=60 {
            let ok = feasible(&sizes, m, &Rat::new(k, 2), &cfg).unwrap().is_some();
            assert!(!seen_feasible || ok, "{sizes:?} m={m} cap={k}/2");
            seen_feasible |= ok;
        }
        let total: Rat = sizes.iter().sum();
        assert!(feasible(&sizes, m, &total, &cfg).unwrap().is_some());
    }
}

#[test]
fn handles_limit_sized_instances() {
    // 24 items, tight packing into 8 bins of 12.
    let cfg = OracleConfig::default();
    let sizes: Vec<Rat> = (0..8).flat_map(|_| [Rat::new(11, 2), Rat::new(7, 2), Rat::from(3)]).collect();
    let p = feasible(&sizes, 8, &Rat::from(12), &cfg).unwrap().unwrap();
    assert!(p.verify(&sizes, 8));
    assert_eq!(min_capacity(&sizes, 8, &cfg).unwrap(), Rat::from(12));
    assert!(feasible(&sizes, 7, &Rat::from(12), &cfg).unwrap().is_none());
}

//! Instances that are valid by construction.
//!
//! Every generated instance carries the capacity-12 packing it was built
//! from, so fuzzing never needs the exponential oracle to know an instance
//! is valid.
//!
//! Randomness comes from SplitMix64 (64-bit state) seeded directly with the
//! profile seed. A draw `below(n)` is `next_u64() % n`. The steps are listed
//! on [`packfirst`] and [`permute`] so other implementations can reproduce
//! a corpus exactly.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::model::{opt_capacity, Instance, Packing};
use crate::rat::Rat;

/// Grid denominators for `packfirst`: the divisors of 60.
pub const GRID_DENOMINATORS: [u64; 12] = [1, 2, 3, 4, 5, 6, 10, 12, 15, 20, 30, 60];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pattern {
    PackFirst,
    Tightness,
    MediumFlood,
    LargePairs,
}

impl Pattern {
    pub fn name(self) -> &'static str {
        match self {
            Pattern::PackFirst => "packfirst",
            Pattern::Tightness => "tightness",
            Pattern::MediumFlood => "mediumflood",
            Pattern::LargePairs => "largepairs",
        }
    }

    pub fn parse(s: &str) -> Option<Pattern> {
        [Pattern::PackFirst, Pattern::Tightness, Pattern::MediumFlood, Pattern::LargePairs]
            .into_iter()
            .find(|p| p.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Order {
    ArrivalRandom,
    Asc,
    Desc,
    AsConstructed,
}

impl Order {
    pub fn name(self) -> &'static str {
        match self {
            Order::ArrivalRandom => "arrival-random",
            Order::Asc => "asc",
            Order::Desc => "desc",
            Order::AsConstructed => "as-constructed",
        }
    }

    pub fn parse(s: &str) -> Option<Order> {
        [Order::ArrivalRandom, Order::Asc, Order::Desc, Order::AsConstructed]
            .into_iter()
            .find(|o| o.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenProfile {
    pub pattern: Pattern,
    pub m: usize,
    /// Item count; only used by `packfirst`.
    pub n: usize,
    pub seed: u64,
    pub order: Order,
}

impl GenProfile {
    pub fn new(pattern: Pattern, m: usize) -> GenProfile {
        GenProfile { pattern, m, n: 0, seed: 0, order: Order::AsConstructed }
    }
}

fn below(rng: &mut SplitMix64, n: u64) -> u64 {
    rng.next_u64() % n
}

/// Builds the instance for a profile, then applies its arrival order.
/// Panics if `m == 0`.
pub fn generate(profile: &GenProfile) -> Instance {
    assert!(profile.m >= 1, "generator needs at least one bin");
    let m = profile.m;
    let (sizes, bins): (Vec<Rat>, Vec<usize>) = match profile.pattern {
        Pattern::PackFirst => packfirst(m, profile.n, profile.seed),
        Pattern::Tightness => {
            let mut pairs = vec![(Rat::from(6), 0), (Rat::from(6), 0)];
            pairs.extend((1..m).map(|b| (Rat::from(12), b)));
            pairs.into_iter().unzip()
        }
        Pattern::MediumFlood => (0..3 * m).map(|i| (Rat::from(4), i / 3)).unzip(),
        Pattern::LargePairs => (0..m).flat_map(|b| [(Rat::from(7), b), (Rat::from(5), b)]).unzip(),
    };
    let witness = Packing::from_assignment(&sizes, bins, m, opt_capacity()).expect("bins below m");
    let instance = Instance::new(m, sizes).expect("sizes in range").with_witness(witness);
    permute(&instance, profile.order, profile.seed)
}

/// Random pieces of random bin fillings, as `(size, bin)` pairs.
///
/// 1. `d = GRID_DENOMINATORS[below(12)]`; all sizes are multiples of `1/d`,
///    and `U = 12d` is a full bin in grid units.
/// 2. For each of the `n` items in turn, its bin is `below(m)`.
/// 3. For each bin `b = 0..m` holding `c > 0` items: the fill level is `U`
///    if `below(2) == 0`, else `U/2 + below(U - U/2 + 1)` (integer halves).
///    Then `c - 1` cut points are drawn as `below(fill + 1)`, sorted, and the
///    pieces are the gaps between `0, cuts..., fill`.
/// 4. Pieces are emitted bin by bin, in cut order.
pub fn packfirst(m: usize, n: usize, seed: u64) -> (Vec<Rat>, Vec<usize>) {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let d = GRID_DENOMINATORS[below(&mut rng, GRID_DENOMINATORS.len() as u64) as usize];
    let full = 12 * d;
    let mut counts = vec![0u64; m];
    for _ in 0..n {
        counts[below(&mut rng, m as u64) as usize] += 1;
    }
    let mut out = (Vec::with_capacity(n), Vec::with_capacity(n));
    for (b, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let fill = if below(&mut rng, 2) == 0 { full } else { full / 2 + below(&mut rng, full - full / 2 + 1) };
        let mut cuts: Vec<u64> = (1..c).map(|_| below(&mut rng, fill + 1)).collect();
        cuts.sort_unstable();
        let mut prev = 0;
        for cut in cuts.into_iter().chain(std::iter::once(fill)) {
            out.0.push(Rat::new((cut - prev) as i64, d as i64));
            out.1.push(b);
            prev = cut;
        }
    }
    out
}

/// Same items in a new arrival order; the witness follows its items.
///
/// `asc` and `desc` are stable sorts by size. `arrival-random` is a
/// Fisher-Yates shuffle with a fresh SplitMix64 seeded by `seed`: for
/// `i = n-1` down to `1`, swap positions `i` and `below(i + 1)`.
pub fn permute(instance: &Instance, order: Order, seed: u64) -> Instance {
    let n = instance.len();
    let mut perm: Vec<usize> = (0..n).collect();
    match order {
        Order::AsConstructed => {}
        Order::Asc => perm.sort_by(|&a, &b| instance.items[a].size.cmp(&instance.items[b].size)),
        Order::Desc => perm.sort_by(|&a, &b| instance.items[b].size.cmp(&instance.items[a].size)),
        Order::ArrivalRandom => {
            let mut rng = SplitMix64::seed_from_u64(seed);
            for i in (1..n).rev() {
                let j = below(&mut rng, i as u64 + 1) as usize;
                perm.swap(i, j);
            }
        }
    }
    let sizes: Vec<Rat> = perm.iter().map(|&i| instance.items[i].size.clone()).collect();
    let witness = instance.witness.as_ref().map(|w| {
        let assignment = perm.iter().map(|&i| w.assignment[i]).collect();
        Packing::from_assignment(&sizes, assignment, w.bin_count(), w.capacity.clone()).expect("same bins")
    });
    let mut out = Instance::new(instance.m, sizes).expect("sizes already validated");
    out.witness = witness;
    out
}

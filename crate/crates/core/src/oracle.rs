//! Exact offline bin packing.
//!
//! Sizes are scaled by the common denominator into `u128` units, so the
//! search itself never touches rationals. Feasibility is decided by depth
//! first branch and bound over the items in decreasing size, with these
//! prunings:
//!
//! * total size above `m * capacity`, or more than `m` items above
//!   `capacity / 2`, rejects up front
//! * bins with equal load are interchangeable, so only one of them is tried
//!   (this also means at most one fresh bin per item)
//! * remaining volume must fit in the free space of bins that can still
//!   take the smallest remaining item
//! * failed states (item position plus sorted loads) are memoized

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::model::{opt_capacity, Instance, Packing};
use crate::rat::Rat;

pub const DEFAULT_ITEM_LIMIT: usize = 24;
pub const DEFAULT_SUBSET_SUM_CAP: usize = 1 << 20;
/// Environment variable overriding [`DEFAULT_ITEM_LIMIT`].
pub const ITEM_LIMIT_ENV: &str = "STRETCHPACK_ORACLE_LIMIT";

const MEMO_CAP: usize = 1 << 21;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    pub item_limit: usize,
    pub subset_sum_cap: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { item_limit: DEFAULT_ITEM_LIMIT, subset_sum_cap: DEFAULT_SUBSET_SUM_CAP }
    }
}

impl OracleConfig {
    /// Default configuration with the item limit taken from
    /// `STRETCHPACK_ORACLE_LIMIT` when it is set to a valid integer.
    pub fn from_env() -> OracleConfig {
        let mut cfg = OracleConfig::default();
        if let Some(limit) = std::env::var(ITEM_LIMIT_ENV).ok().and_then(|v| v.trim().parse().ok()) {
            cfg.item_limit = limit;
        }
        cfg
    }

    fn check_size(&self, n: usize) -> Result<()> {
        if n > self.item_limit {
            return Err(Error::OracleTooLarge { items: n, limit: self.item_limit });
        }
        Ok(())
    }
}

/// Sizes (and extra values) expressed as integers over a common denominator.
struct Units {
    denom: BigInt,
    values: Vec<u128>,
}

fn to_units(values: &[&Rat]) -> Result<Units> {
    let mut denom = BigInt::one();
    for v in values {
        denom = denom.lcm(v.denom());
    }
    let scaled = values
        .iter()
        .map(|v| {
            let n = v.numer() * (&denom / v.denom());
            n.to_u128().ok_or(Error::DenominatorOverflow)
        })
        .collect::<Result<Vec<_>>>()?;
    // Sums of all values must stay representable too.
    scaled.iter().try_fold(0u128, |acc, &v| acc.checked_add(v)).ok_or(Error::DenominatorOverflow)?;
    Ok(Units { denom, values: scaled })
}

fn check_sizes(sizes: &[Rat]) -> Result<()> {
    match sizes.iter().find(|s| s.is_negative()) {
        Some(s) => Err(Error::SizeOutOfRange(s.clone())),
        None => Ok(()),
    }
}

/// Decides whether `sizes` fit into `m` bins of the given capacity, returning
/// a packing over exactly `m` bins if so.
pub fn feasible(sizes: &[Rat], m: usize, capacity: &Rat, cfg: &OracleConfig) -> Result<Option<Packing>> {
    if m == 0 {
        return Err(Error::ZeroBins);
    }
    cfg.check_size(sizes.len())?;
    check_sizes(sizes)?;
    if capacity.is_negative() {
        return Ok(None);
    }
    let mut all: Vec<&Rat> = sizes.iter().collect();
    all.push(capacity);
    let units = to_units(&all)?;
    let (cap, items) = units.values.split_last().expect("capacity present");
    Ok(feasible_units(items, m, *cap).map(|assignment| {
        Packing::from_assignment(sizes, assignment, m, capacity.clone()).expect("assignment within m bins")
    }))
}

/// Core search on integer sizes. Returns a bin per item.
pub(crate) fn feasible_units(items: &[u128], m: usize, cap: u128) -> Option<Vec<usize>> {
    let total: u128 = items.iter().sum();
    if items.iter().any(|&s| s > cap) {
        return None;
    }
    if total > cap.saturating_mul(m as u128) {
        return None;
    }
    if items.iter().filter(|&&s| 2 * s > cap).count() > m {
        return None;
    }

    // Zero-size items go anywhere; keep them out of the search.
    let mut order: Vec<usize> = (0..items.len()).filter(|&i| items[i] > 0).collect();
    order.sort_by(|&a, &b| items[b].cmp(&items[a]).then(a.cmp(&b)));
    let sorted: Vec<u128> = order.iter().map(|&i| items[i]).collect();
    let mut suffix = vec![0u128; sorted.len() + 1];
    for i in (0..sorted.len()).rev() {
        suffix[i] = suffix[i + 1] + sorted[i];
    }

    let mut search = Search {
        items: &sorted,
        suffix: &suffix,
        cap,
        loads: vec![0; m],
        placed: vec![0; sorted.len()],
        failed: HashSet::new(),
    };
    if !search.dfs(0) {
        return None;
    }
    let mut assignment = vec![0usize; items.len()];
    for (pos, &orig) in order.iter().enumerate() {
        assignment[orig] = search.placed[pos];
    }
    Some(assignment)
}

struct Search<'a> {
    items: &'a [u128],
    suffix: &'a [u128],
    cap: u128,
    loads: Vec<u128>,
    placed: Vec<usize>,
    failed: HashSet<(usize, Vec<u128>)>,
}

impl Search<'_> {
    fn dfs(&mut self, pos: usize) -> bool {
        if pos == self.items.len() {
            return true;
        }
        let smallest = *self.items.last().expect("non-empty");
        let usable: u128 = self
            .loads
            .iter()
            .map(|&l| self.cap - l)
            .filter(|&free| free >= smallest)
            .sum();
        if self.suffix[pos] > usable {
            return false;
        }

        let mut key_loads = self.loads.clone();
        key_loads.sort_unstable();
        let key = (pos, key_loads);
        if self.failed.contains(&key) {
            return false;
        }

        let size = self.items[pos];
        // Fullest bins first; one bin per distinct load.
        let mut candidates: Vec<usize> = (0..self.loads.len()).filter(|&b| self.loads[b] + size <= self.cap).collect();
        candidates.sort_by(|&a, &b| self.loads[b].cmp(&self.loads[a]).then(a.cmp(&b)));
        candidates.dedup_by_key(|b| self.loads[*b]);

        for b in candidates {
            self.loads[b] += size;
            self.placed[pos] = b;
            if self.dfs(pos + 1) {
                return true;
            }
            self.loads[b] -= size;
        }

        if self.failed.len() < MEMO_CAP {
            self.failed.insert(key);
        }
        false
    }
}

/// The smallest capacity at which `sizes` fit into `m` bins.
///
/// The optimum is always the load of some bin, hence a subset sum, and lies
/// between `max(largest item, total / m)` and the total. Those candidate sums
/// are enumerated and binary searched with [`feasible`].
pub fn min_capacity(sizes: &[Rat], m: usize, cfg: &OracleConfig) -> Result<Rat> {
    if m == 0 {
        return Err(Error::ZeroBins);
    }
    cfg.check_size(sizes.len())?;
    check_sizes(sizes)?;
    let units = to_units(&sizes.iter().collect::<Vec<_>>())?;
    let items = &units.values;
    let total: u128 = items.iter().sum();
    if total == 0 {
        return Ok(Rat::zero());
    }
    let largest = items.iter().copied().max().unwrap_or(0);
    let lower = largest.max(total.div_ceil(m as u128));

    let mut sums: HashSet<u128> = HashSet::from([0]);
    for &s in items {
        if s == 0 {
            continue;
        }
        let extended: Vec<u128> = sums.iter().map(|&x| x + s).collect();
        sums.extend(extended);
        if sums.len() > cfg.subset_sum_cap {
            return Err(Error::TooManySubsetSums(cfg.subset_sum_cap));
        }
    }
    let mut candidates: Vec<u128> = sums.into_iter().filter(|&c| c >= lower).collect();
    candidates.sort_unstable();

    // The total is always a candidate and always feasible.
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if feasible_units(items, m, candidates[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(Rat::from_big(BigInt::from(candidates[lo]), units.denom))
}

/// Decides whether the instance fits into `m` bins of capacity 12.
///
/// A witness already on the instance is re-verified by recount and, if it
/// holds, accepted without search. Otherwise the oracle runs and the
/// witness is replaced by its certificate (or cleared).
pub fn validate(instance: &mut Instance, cfg: &OracleConfig) -> Result<bool> {
    let sizes = instance.sizes();
    let twelve = opt_capacity();
    if let Some(w) = &instance.witness {
        if w.capacity <= twelve && w.verify(&sizes, instance.m) {
            return Ok(true);
        }
    }
    let found = feasible(&sizes, instance.m, &twelve, cfg)?;
    let valid = found.is_some();
    instance.witness = found;
    Ok(valid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(sizes: &[i64]) -> Vec<Rat> {
        sizes.iter().map(|&s| Rat::from(s)).collect()
    }

    fn cfg() -> OracleConfig {
        OracleConfig::default()
    }

    #[test]
    fn feasible_examples() {
        let sizes = ints(&[12, 12, 12]);
        let p = feasible(&sizes, 3, &Rat::from(12), &cfg()).unwrap().unwrap();
        assert!(p.verify(&sizes, 3));
        assert_eq!(p.bin_count(), 3);

        let sevens = ints(&[7, 7, 7, 7, 7]);
        assert!(feasible(&sevens, 4, &Rat::from(13), &cfg()).unwrap().is_none());
        let p = feasible(&sevens, 4, &Rat::from(14), &cfg()).unwrap().unwrap();
        assert!(p.verify(&sevens, 4));
    }

    #[test]
    fn feasible_errors() {
        let many = vec![Rat::one(); 25];
        assert_eq!(
            feasible(&many, 3, &Rat::from(12), &cfg()),
            Err(Error::OracleTooLarge { items: 25, limit: 24 })
        );
        assert_eq!(feasible(&ints(&[1]), 0, &Rat::from(12), &cfg()), Err(Error::ZeroBins));
        assert!(feasible(&ints(&[-1]), 1, &Rat::from(12), &cfg()).is_err());
        assert_eq!(feasible(&[], 1, &Rat::from(-1), &cfg()), Ok(None));
    }

    #[test]
    fn feasible_handles_fractions_and_zeros() {
        let sizes = vec![Rat::new(1, 3), Rat::new(2, 3), Rat::zero(), Rat::new(5, 7)];
        let p = feasible(&sizes, 1, &Rat::new(12, 7), &cfg()).unwrap().unwrap();
        assert!(p.verify(&sizes, 1));
        assert!(feasible(&sizes, 1, &Rat::new(11, 7), &cfg()).unwrap().is_none());
    }

    #[test]
    fn min_capacity_examples() {
        assert_eq!(min_capacity(&ints(&[6, 6, 12, 12]), 3, &cfg()).unwrap(), Rat::from(12));
        assert_eq!(min_capacity(&ints(&[7, 7, 7, 7, 7]), 4, &cfg()).unwrap(), Rat::from(14));
        assert_eq!(min_capacity(&[], 2, &cfg()).unwrap(), Rat::zero());
        assert_eq!(min_capacity(&[Rat::new(1, 2), Rat::new(1, 3)], 1, &cfg()).unwrap(), Rat::new(5, 6));
    }

    #[test]
    fn min_capacity_subset_cap() {
        let sizes: Vec<Rat> = (0..22).map(|i| Rat::new(1 << i, 1 << 22)).collect();
        let small = OracleConfig { subset_sum_cap: 1000, ..cfg() };
        assert_eq!(min_capacity(&sizes, 2, &small), Err(Error::TooManySubsetSums(1000)));
    }

    #[test]
    fn validate_examples() {
        let mut inst = Instance::new(3, ints(&[6, 6, 12, 12])).unwrap();
        assert!(validate(&mut inst, &cfg()).unwrap());
        assert!(inst.witness.as_ref().unwrap().verify(&inst.sizes(), 3));

        let mut inst = Instance::new(2, ints(&[12, 12, 12])).unwrap();
        assert!(!validate(&mut inst, &cfg()).unwrap());
        assert!(inst.witness.is_none());

        let mut inst = Instance::new(1, vec![]).unwrap();
        assert!(validate(&mut inst, &cfg()).unwrap());
    }

    #[test]
    fn validate_trusts_verified_witness_beyond_limit() {
        let sizes = vec![Rat::one(); 30];
        let assignment = (0..30).map(|i| i % 3).collect();
        let w = Packing::from_assignment(&sizes, assignment, 3, Rat::from(12)).unwrap();
        let mut inst = Instance::new(3, sizes).unwrap().with_witness(w);
        assert!(validate(&mut inst, &cfg()).unwrap());
        inst.witness.as_mut().unwrap().assignment[0] = 7;
        assert!(matches!(validate(&mut inst, &cfg()), Err(Error::OracleTooLarge { .. })));
    }

    #[test]
    fn env_override() {
        std::env::set_var(ITEM_LIMIT_ENV, "9");
        assert_eq!(OracleConfig::from_env().item_limit, 9);
        std::env::remove_var(ITEM_LIMIT_ENV);
        assert_eq!(OracleConfig::from_env().item_limit, DEFAULT_ITEM_LIMIT);
    }
}

//! Adversarial search against a fixed deterministic packer.
//!
//! The adversary chooses item sizes from the menu `{12j/g : j = 1..=g}`,
//! only ever sending an item if everything sent so far still fits into `m`
//! bins of capacity 12. It may stop at any time. The value of a position is
//! the largest bin load the adversary can force from it, so the result is
//! the worst case of this packer on this menu and depth. It is not a lower
//! bound over all online algorithms.
//!
//! If the packer cannot place an item at all (possible for First Fit), the
//! position is terminal and is valued at the smallest `load + size` over the
//! bins, which exceeds 18.

use std::collections::HashMap;

use crate::engine::{Algorithm, AnyPacker, OnlinePacker};
use crate::error::{Error, Result};
use crate::model::Item;
use crate::oracle;
use crate::rat::Rat;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    pub m: usize,
    /// Menu granularity `g`: sizes are `12j/g` for `j = 1..=g`.
    pub granularity: u32,
    pub max_depth: usize,
    pub algorithm: Algorithm,
    pub node_budget: u64,
}

impl SearchConfig {
    pub fn new(m: usize, granularity: u32, max_depth: usize, algorithm: Algorithm) -> SearchConfig {
        SearchConfig { m, granularity, max_depth, algorithm, node_budget: 10_000_000 }
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::ZeroBins);
        }
        if self.granularity == 0 {
            return Err(Error::InvalidConfig("granularity must be at least 1".into()));
        }
        Ok(())
    }

    pub fn menu_size(&self, j: u32) -> Rat {
        Rat::new(12 * j as i64, self.granularity as i64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchResult {
    pub forced_load: Rat,
    pub best_sequence: Vec<Rat>,
    pub nodes_expanded: u64,
    pub budget_exhausted: bool,
}

type TtKey = (String, Vec<u32>, usize);

struct Adversary<'a> {
    cfg: &'a SearchConfig,
    menu: Vec<Rat>,
    feasible: HashMap<Vec<u32>, bool>,
    table: HashMap<TtKey, (Rat, Vec<u32>)>,
    nodes: u64,
    exhausted: bool,
}

impl Adversary<'_> {
    /// Whether the multiset of menu indices fits into `m` bins of size `g`
    /// (capacity 12 in units of `12/g`).
    fn prefix_feasible(&mut self, multiset: &[u32]) -> bool {
        if let Some(&known) = self.feasible.get(multiset) {
            return known;
        }
        let units: Vec<u128> = multiset.iter().map(|&j| j as u128).collect();
        let ok = oracle::feasible_units(&units, self.cfg.m, self.cfg.granularity as u128).is_some();
        self.feasible.insert(multiset.to_vec(), ok);
        ok
    }

    fn value(&mut self, packer: &AnyPacker, multiset: &[u32], depth_left: usize) -> Result<(Rat, Vec<u32>)> {
        self.nodes += 1;
        let here = packer.max_load();
        if depth_left == 0 {
            return Ok((here, Vec::new()));
        }
        let key = (packer.state_key(), multiset.to_vec(), depth_left);
        if let Some(hit) = self.table.get(&key) {
            return Ok(hit.clone());
        }

        let mut best = (here, Vec::new());
        let mut complete = true;
        for j in 1..=self.cfg.granularity {
            if self.nodes >= self.cfg.node_budget {
                self.exhausted = true;
                complete = false;
                break;
            }
            let mut next = multiset.to_vec();
            let pos = next.partition_point(|&x| x <= j);
            next.insert(pos, j);
            if !self.prefix_feasible(&next) {
                continue;
            }
            let size = self.menu[j as usize - 1].clone();
            let item = Item::new(multiset.len(), size.clone())?;
            let mut child = packer.clone();
            let (v, cont) = match child.place(&item) {
                Ok(_) => self.value(&child, &next, depth_left - 1)?,
                Err(Error::NoFit { .. }) => (overflow_load(packer, &size), Vec::new()),
                Err(e) => return Err(e),
            };
            if v > best.0 {
                let mut seq = vec![j];
                seq.extend(cont);
                best = (v, seq);
            }
        }
        if complete && !self.exhausted {
            self.table.insert(key, best.clone());
        }
        Ok(best)
    }
}

fn overflow_load(packer: &impl OnlinePacker, size: &Rat) -> Rat {
    packer.bins().iter().map(|b| &b.load + size).min().expect("at least one bin")
}

/// Depth-first maximization over adversary moves. Children are tried in
/// increasing size and only strict improvements replace the incumbent, so
/// the reported sequence is deterministic.
pub fn search(cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate()?;
    let mut adv = Adversary {
        cfg,
        menu: (1..=cfg.granularity).map(|j| cfg.menu_size(j)).collect(),
        feasible: HashMap::new(),
        table: HashMap::new(),
        nodes: 0,
        exhausted: false,
    };
    let root = cfg.algorithm.packer(cfg.m, false)?;
    let (forced_load, seq) = adv.value(&root, &[], cfg.max_depth)?;
    Ok(SearchResult {
        forced_load,
        best_sequence: seq.into_iter().map(|j| cfg.menu_size(j)).collect(),
        nodes_expanded: adv.nodes,
        budget_exhausted: adv.exhausted,
    })
}

/// Feeds `sequence` to a fresh packer and returns the load it ends with,
/// valued the same way as in [`search`].
pub fn replay(algorithm: Algorithm, m: usize, sequence: &[Rat]) -> Result<Rat> {
    let mut packer = algorithm.packer(m, false)?;
    for (i, size) in sequence.iter().enumerate() {
        match packer.place(&Item::new(i, size.clone())?) {
            Ok(_) => {}
            Err(Error::NoFit { .. }) => return Ok(overflow_load(&packer, size)),
            Err(e) => return Err(e),
        }
    }
    Ok(packer.max_load())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::OracleConfig;

    fn ints(sizes: &[i64]) -> Vec<Rat> {
        sizes.iter().map(|&s| Rat::from(s)).collect()
    }

    #[test]
    fn single_bin_only_allows_one_full_item() {
        let r = search(&SearchConfig::new(1, 1, 3, Algorithm::Stretch15)).unwrap();
        assert_eq!(r.forced_load, Rat::from(12));
        assert_eq!(r.best_sequence, ints(&[12]));
    }

    #[test]
    fn depth_zero_is_untouched() {
        let r = search(&SearchConfig::new(3, 4, 0, Algorithm::Stretch15)).unwrap();
        assert_eq!(r.forced_load, Rat::zero());
        assert!(r.best_sequence.is_empty());
    }

    #[test]
    fn halves_menu_forces_eighteen() {
        let r = search(&SearchConfig::new(3, 2, 3, Algorithm::Stretch15)).unwrap();
        assert_eq!(r.forced_load, Rat::from(18));
        assert_eq!(r.best_sequence, ints(&[6, 6, 12]));
        assert!(!r.budget_exhausted);
    }

    #[test]
    fn thirds_menu_forces_sixteen() {
        let r = search(&SearchConfig::new(3, 3, 2, Algorithm::Stretch15)).unwrap();
        assert_eq!(r.forced_load, Rat::from(16));
        assert_eq!(r.best_sequence, ints(&[8, 8]));
    }

    #[test]
    fn best_sequence_replays_and_stays_feasible() {
        for (m, g, d) in [(2, 4, 4), (3, 4, 5), (3, 6, 4), (4, 3, 6)] {
            for alg in [Algorithm::Stretch15, Algorithm::FirstFit] {
                let cfg = SearchConfig::new(m, g, d, alg);
                let r = search(&cfg).unwrap();
                assert_eq!(replay(alg, m, &r.best_sequence).unwrap(), r.forced_load);
                for k in 1..=r.best_sequence.len() {
                    let fits = oracle::feasible(&r.best_sequence[..k], m, &Rat::from(12), &OracleConfig::default());
                    assert!(fits.unwrap().is_some());
                }
                if alg == Algorithm::Stretch15 {
                    assert!(r.forced_load <= Rat::from(18));
                }
            }
        }
    }

    #[test]
    fn monotone_in_depth_and_granularity() {
        let value = |g, d| search(&SearchConfig::new(3, g, d, Algorithm::Stretch15)).unwrap().forced_load;
        for d in 0..5 {
            assert!(value(4, d) <= value(4, d + 1));
        }
        assert!(value(2, 4) <= value(4, 4));
        assert!(value(3, 4) <= value(6, 4));
    }

    #[test]
    fn budget_exhaustion_reports_best_so_far() {
        let mut cfg = SearchConfig::new(3, 6, 6, Algorithm::Stretch15);
        cfg.node_budget = 50;
        let r = search(&cfg).unwrap();
        assert!(r.budget_exhausted);
        assert_eq!(replay(cfg.algorithm, 3, &r.best_sequence).unwrap(), r.forced_load);
    }

    #[test]
    fn invalid_configs() {
        assert_eq!(search(&SearchConfig::new(0, 2, 2, Algorithm::Stretch15)), Err(Error::ZeroBins));
        assert!(matches!(search(&SearchConfig::new(2, 0, 2, Algorithm::Stretch15)), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn replay_values_overflow() {
        assert_eq!(replay(Algorithm::FirstFit, 1, &ints(&[12, 12])).unwrap(), Rat::from(24));
    }
}

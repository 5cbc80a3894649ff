//! Items, bins, instances and the value/weight accounting.
//!
//! All sizes live on the scale where an optimal bin holds 12 and the online
//! algorithm may fill a bin up to 18.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rat::Rat;

/// Capacity of an optimal (offline) bin.
pub const OPT_CAPACITY: i64 = 12;
/// Capacity of a bin of the online algorithm.
pub const ALG_CAPACITY: i64 = 18;

pub fn opt_capacity() -> Rat {
    Rat::from(OPT_CAPACITY)
}

pub fn alg_capacity() -> Rat {
    Rat::from(ALG_CAPACITY)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ItemClass {
    Regular,
    Medium,
    Large,
    Huge,
}

impl ItemClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ItemClass::Regular => "regular",
            ItemClass::Medium => "medium",
            ItemClass::Large => "large",
            ItemClass::Huge => "huge",
        }
    }

    /// Large and huge items are the ones counted by `k`.
    pub fn is_big(self) -> bool {
        matches!(self, ItemClass::Large | ItemClass::Huge)
    }
}

impl fmt::Display for ItemClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classifies a size in `[0, 12]`.
///
/// | size         | class   |
/// |--------------|---------|
/// | [0,3], (4,6] | regular |
/// | (3,4]        | medium  |
/// | (6,9]        | large   |
/// | (9,12]       | huge    |
///
/// Size 0 is accepted and treated as regular.
pub fn classify(size: &Rat) -> Result<ItemClass> {
    if size.is_negative() || *size > opt_capacity() {
        return Err(Error::SizeOutOfRange(size.clone()));
    }
    let class = if *size <= Rat::from(3) {
        ItemClass::Regular
    } else if *size <= Rat::from(4) {
        ItemClass::Medium
    } else if *size <= Rat::from(6) {
        ItemClass::Regular
    } else if *size <= Rat::from(9) {
        ItemClass::Large
    } else {
        ItemClass::Huge
    };
    Ok(class)
}

pub fn item_value(class: ItemClass) -> i64 {
    match class {
        ItemClass::Huge => 3,
        ItemClass::Large => 2,
        ItemClass::Medium => 1,
        ItemClass::Regular => 0,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Item {
    /// 0-based arrival position.
    pub index: usize,
    pub size: Rat,
    pub class: ItemClass,
}

impl Item {
    pub fn new(index: usize, size: Rat) -> Result<Item> {
        let class = classify(&size)?;
        Ok(Item { index, size, class })
    }

    pub fn value(&self) -> i64 {
        item_value(self.class)
    }
}

/// An assignment of items to bins, as produced by the oracle or a generator.
///
/// `bin_loads` always has one entry per bin of the instance, empty bins included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Packing {
    pub capacity: Rat,
    /// `assignment[i]` is the bin of item `i`.
    pub assignment: Vec<usize>,
    pub bin_loads: Vec<Rat>,
}

impl Packing {
    /// Builds a packing from an assignment, recomputing loads for `m` bins.
    /// Returns `None` if some assignment points outside `0..m`.
    pub fn from_assignment(sizes: &[Rat], assignment: Vec<usize>, m: usize, capacity: Rat) -> Option<Packing> {
        if assignment.len() != sizes.len() {
            return None;
        }
        let mut bin_loads = vec![Rat::zero(); m];
        for (size, &bin) in sizes.iter().zip(&assignment) {
            *bin_loads.get_mut(bin)? += size;
        }
        Some(Packing { capacity, assignment, bin_loads })
    }

    pub fn bin_count(&self) -> usize {
        self.bin_loads.len()
    }

    /// Independent recount: every item assigned to a bin in `0..m`, recorded
    /// loads match the recount, and every load is within capacity.
    pub fn verify(&self, sizes: &[Rat], m: usize) -> bool {
        if self.assignment.len() != sizes.len() || self.bin_loads.len() > m {
            return false;
        }
        let mut loads = vec![Rat::zero(); m];
        for (size, &bin) in sizes.iter().zip(&self.assignment) {
            match loads.get_mut(bin) {
                Some(load) => *load += size,
                None => return false,
            }
        }
        let recorded_ok = loads
            .iter()
            .enumerate()
            .all(|(b, load)| self.bin_loads.get(b).map_or(load.is_zero(), |rec| rec == load));
        recorded_ok && loads.iter().all(|l| *l <= self.capacity)
    }

    /// Item indices per bin, one entry per bin.
    pub fn bins(&self) -> Vec<Vec<usize>> {
        let mut bins = vec![Vec::new(); self.bin_loads.len()];
        for (item, &bin) in self.assignment.iter().enumerate() {
            bins[bin].push(item);
        }
        bins
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub m: usize,
    pub items: Vec<Item>,
    /// A capacity-12 packing proving the instance valid, if known.
    pub witness: Option<Packing>,
}

impl Instance {
    pub fn new(m: usize, sizes: Vec<Rat>) -> Result<Instance> {
        if m == 0 {
            return Err(Error::ZeroBins);
        }
        let items = sizes
            .into_iter()
            .enumerate()
            .map(|(i, s)| Item::new(i, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Instance { m, items, witness: None })
    }

    pub fn with_witness(mut self, witness: Packing) -> Instance {
        self.witness = Some(witness);
        self
    }

    pub fn sizes(&self) -> Vec<Rat> {
        self.items.iter().map(|i| i.size.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Keeps only the first `n` items. A witness is dropped since it no longer
    /// describes the item list; re-derive it with the oracle if needed.
    pub fn truncated(&self, n: usize) -> Instance {
        let items: Vec<Item> = self.items.iter().take(n).cloned().collect();
        let witness = self.witness.as_ref().map(|w| {
            let sizes: Vec<Rat> = items.iter().map(|i| i.size.clone()).collect();
            Packing::from_assignment(&sizes, w.assignment[..items.len()].to_vec(), self.m, w.capacity.clone())
                .expect("prefix of a valid assignment")
        });
        Instance { m: self.m, items, witness }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BinType {
    /// Empty.
    E,
    /// Complete: `w >= 0` and load at least 12.
    G,
    /// Holds a huge item, load below 12.
    H,
    /// Exactly one large item.
    L,
    /// Only medium items, load below 13.
    M,
    /// Tiny: non-empty, load at most 3.
    T,
    /// Regular: any other bin with load in (3, 6].
    R,
}

impl BinType {
    pub fn as_str(self) -> &'static str {
        match self {
            BinType::E => "E",
            BinType::G => "G",
            BinType::H => "H",
            BinType::L => "L",
            BinType::M => "M",
            BinType::T => "T",
            BinType::R => "R",
        }
    }

    pub fn parse(s: &str) -> Option<BinType> {
        Some(match s {
            "E" => BinType::E,
            "G" => BinType::G,
            "H" => BinType::H,
            "L" => BinType::L,
            "M" => BinType::M,
            "T" => BinType::T,
            "R" => BinType::R,
            _ => return None,
        })
    }
}

impl fmt::Display for BinType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinState {
    /// Creation order; equal to the bin's position among the `m` bins.
    pub id: usize,
    pub contents: Vec<Item>,
    pub load: Rat,
    /// Number of large and huge items.
    pub k: usize,
    /// `None` when the contents match no bin type.
    pub bin_type: Option<BinType>,
}

impl BinState {
    pub fn empty(id: usize) -> BinState {
        BinState { id, contents: Vec::new(), load: Rat::zero(), k: 0, bin_type: Some(BinType::E) }
    }

    /// A bin holding `items`, typed by [`classify_bin`].
    pub fn with_items(id: usize, items: impl IntoIterator<Item = Item>) -> BinState {
        let mut bin = BinState::empty(id);
        for item in items {
            bin.push(item);
        }
        bin.retype();
        bin
    }

    /// Adds an item without retyping.
    pub fn push(&mut self, item: Item) {
        self.load += &item.size;
        if item.class.is_big() {
            self.k += 1;
        }
        self.contents.push(item);
    }

    pub fn retype(&mut self) {
        self.bin_type = classify_bin(self).ok();
    }

    pub fn is_empty(&self) -> bool {
        self.contents.is_empty()
    }
}

/// `v(A)`: sum of item values minus 3.
pub fn bin_value(bin: &BinState) -> i64 {
    items_value(&bin.contents)
}

pub fn items_value<'a>(items: impl IntoIterator<Item = &'a Item>) -> i64 {
    items.into_iter().map(Item::value).sum::<i64>() - 3
}

/// `w(A) = load + k - 13`.
pub fn bin_weight(bin: &BinState) -> Rat {
    weight_of(&bin.load, bin.k)
}

pub fn weight_of(load: &Rat, k: usize) -> Rat {
    load + Rat::from(k as i64) - Rat::from(13)
}

/// Assigns the bin type, checking the predicates in the order
/// E, G, H, L, M, T, R and returning the first that holds.
pub fn classify_bin(bin: &BinState) -> Result<BinType> {
    let twelve = opt_capacity();
    if bin.contents.is_empty() {
        return Ok(BinType::E);
    }
    if !bin_weight(bin).is_negative() && bin.load >= twelve {
        return Ok(BinType::G);
    }
    if bin.load < twelve && bin.contents.iter().any(|i| i.class == ItemClass::Huge) {
        return Ok(BinType::H);
    }
    if bin.contents.len() == 1 && bin.contents[0].class == ItemClass::Large {
        return Ok(BinType::L);
    }
    if bin.load < Rat::from(13) && bin.contents.iter().all(|i| i.class == ItemClass::Medium) {
        return Ok(BinType::M);
    }
    if bin.load <= Rat::from(3) {
        return Ok(BinType::T);
    }
    if bin.load <= Rat::from(6) {
        return Ok(BinType::R);
    }
    Err(Error::Unclassifiable { bin: bin.id, load: bin.load.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bin(sizes: &[Rat]) -> BinState {
        BinState::with_items(0, sizes.iter().enumerate().map(|(i, s)| Item::new(i, s.clone()).unwrap()))
    }

    fn ints(sizes: &[i64]) -> Vec<Rat> {
        sizes.iter().map(|&s| Rat::from(s)).collect()
    }

    #[test]
    fn classify_table_boundaries() {
        assert_eq!(classify(&Rat::from(3)).unwrap(), ItemClass::Regular);
        assert_eq!(classify(&Rat::from(4)).unwrap(), ItemClass::Medium);
        assert_eq!(classify(&Rat::from(6)).unwrap(), ItemClass::Regular);
        assert_eq!(classify(&Rat::from(9)).unwrap(), ItemClass::Large);
        assert_eq!(classify(&Rat::new(19, 2)).unwrap(), ItemClass::Huge);
        assert_eq!(classify(&Rat::from(12)).unwrap(), ItemClass::Huge);
        assert_eq!(classify(&Rat::zero()).unwrap(), ItemClass::Regular);
        assert_eq!(classify(&Rat::new(301, 100)).unwrap(), ItemClass::Medium);
        assert_eq!(classify(&Rat::new(401, 100)).unwrap(), ItemClass::Regular);
        assert_eq!(classify(&Rat::new(601, 100)).unwrap(), ItemClass::Large);
        assert_eq!(classify(&Rat::new(901, 100)).unwrap(), ItemClass::Huge);
    }

    #[test]
    fn classify_rejects_out_of_range() {
        assert!(matches!(classify(&Rat::new(-1, 2)), Err(Error::SizeOutOfRange(_))));
        assert!(matches!(classify(&Rat::new(121, 10)), Err(Error::SizeOutOfRange(_))));
    }

    #[test]
    fn values() {
        assert_eq!(item_value(ItemClass::Huge), 3);
        assert_eq!(item_value(ItemClass::Large), 2);
        assert_eq!(item_value(ItemClass::Medium), 1);
        assert_eq!(item_value(ItemClass::Regular), 0);
    }

    #[test]
    fn value_and_weight_examples() {
        let b = bin(&ints(&[7, 7]));
        assert_eq!(bin_value(&b), 1);
        assert_eq!(bin_weight(&b), Rat::from(3));

        let e = BinState::empty(0);
        assert_eq!(bin_value(&e), -3);
        assert_eq!(bin_weight(&e), Rat::from(-13));

        let b = bin(&ints(&[10, 5]));
        assert_eq!(bin_value(&b), 0);
        assert_eq!(bin_weight(&b), Rat::from(3));
    }

    #[test]
    fn bin_types() {
        assert_eq!(classify_bin(&bin(&ints(&[6]))).unwrap(), BinType::R);
        assert_eq!(classify_bin(&bin(&ints(&[12]))).unwrap(), BinType::G);
        // Load 12 but w = -1, so not complete.
        assert_eq!(classify_bin(&bin(&ints(&[4, 4, 4]))).unwrap(), BinType::M);
        assert_eq!(classify_bin(&bin(&ints(&[4, 4, 4, 4]))).unwrap(), BinType::G);
        assert_eq!(classify_bin(&bin(&ints(&[10]))).unwrap(), BinType::H);
        assert_eq!(classify_bin(&bin(&ints(&[10, 1]))).unwrap(), BinType::H);
        assert_eq!(classify_bin(&bin(&ints(&[7]))).unwrap(), BinType::L);
        assert_eq!(classify_bin(&bin(&ints(&[2]))).unwrap(), BinType::T);
        assert_eq!(classify_bin(&bin(&ints(&[0]))).unwrap(), BinType::T);
        assert_eq!(classify_bin(&bin(&ints(&[2, 2]))).unwrap(), BinType::R);
        assert_eq!(classify_bin(&BinState::empty(3)).unwrap(), BinType::E);
        assert!(matches!(classify_bin(&bin(&ints(&[5, 2]))), Err(Error::Unclassifiable { .. })));
    }

    #[test]
    fn packing_verify_catches_bad_loads() {
        let sizes = ints(&[6, 6, 12]);
        let p = Packing::from_assignment(&sizes, vec![0, 0, 1], 2, opt_capacity()).unwrap();
        assert!(p.verify(&sizes, 2));
        assert!(!p.verify(&sizes, 1));
        let p = Packing::from_assignment(&sizes, vec![0, 0, 0], 2, opt_capacity()).unwrap();
        assert!(!p.verify(&sizes, 2));
        assert!(Packing::from_assignment(&sizes, vec![0, 0, 5], 2, opt_capacity()).is_none());
    }

    fn arb_size() -> impl Strategy<Value = Rat> {
        (0i64..=720).prop_map(|n| Rat::new(n, 60))
    }

    proptest! {
        #[test]
        fn weight_and_value_are_additive(bins in prop::collection::vec(prop::collection::vec(arb_size(), 0..5), 1..6)) {
            let states: Vec<BinState> = bins.iter().map(|b| bin(b)).collect();
            let total_w: Rat = states.iter().map(bin_weight).sum();
            let total_v: i64 = states.iter().map(bin_value).sum();
            let all: Vec<Item> = states.iter().flat_map(|b| b.contents.clone()).collect();
            let s: Rat = all.iter().map(|i| &i.size).sum();
            let k = all.iter().filter(|i| i.class.is_big()).count() as i64;
            let n_bins = states.len() as i64;
            prop_assert_eq!(total_w, s + Rat::from(k) - Rat::from(13 * n_bins));
            prop_assert_eq!(total_v, all.iter().map(Item::value).sum::<i64>() - 3 * n_bins);
        }

        #[test]
        fn classify_is_total_on_range(size in arb_size()) {
            let c = classify(&size).unwrap();
            prop_assert_eq!(c, classify(&size.clone()).unwrap());
        }
    }
}

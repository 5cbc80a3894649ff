//! The online packers.
//!
//! [`PackerState`] is the two-phase algorithm with stretching factor 3/2:
//! phase one sorts items into typed bins (see [`BinType`]), and once the
//! number of regular bins reaches three times the number of empty bins the
//! remaining items are packed by First Fit over a fixed bin list. Which
//! list depends on whether a huge-item bin survived phase one.
//!
//! [`FirstFitPacker`] is the plain First Fit baseline at capacity 18.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::audit::{self, Violation};
use crate::error::{Error, Result};
use crate::model::{alg_capacity, BinState, BinType, Instance, Item, ItemClass};
use crate::rat::Rat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    One,
    TwoHuge,
    TwoRegular,
}

impl Phase {
    pub fn number(self) -> u8 {
        match self {
            Phase::One => 1,
            Phase::TwoHuge | Phase::TwoRegular => 2,
        }
    }

    /// Branch name used in traces.
    pub fn branch_name(self) -> &'static str {
        match self {
            Phase::One => "none",
            Phase::TwoHuge => "huge",
            Phase::TwoRegular => "regular",
        }
    }
}

/// Which line of the algorithm placed an item. Phase-one variants carry the
/// line number of the rule cascade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    /// (3) regular item into a huge-item bin.
    RegularToHuge,
    /// (4) regular item into a regular bin, staying at most 6.
    RegularToRegular,
    /// (5) regular item into the tiny bin, staying at most 6.
    RegularToTiny,
    /// (6) medium item into the medium-item bin.
    MediumToMedium,
    /// (7) large item into the large-item bin.
    LargeToLarge,
    /// (9) huge item into a regular bin.
    HugeToRegular,
    /// (10) huge item into the tiny bin.
    HugeToTiny,
    /// (11) anything else opens an empty bin.
    Empty,
    FirstFit,
    ReverseFirstFit,
}

impl Rule {
    pub fn tag(self) -> &'static str {
        match self {
            Rule::RegularToHuge => "3",
            Rule::RegularToRegular => "4",
            Rule::RegularToTiny => "5",
            Rule::MediumToMedium => "6",
            Rule::LargeToLarge => "7",
            Rule::HugeToRegular => "9",
            Rule::HugeToTiny => "10",
            Rule::Empty => "11",
            Rule::FirstFit => "ff",
            Rule::ReverseFirstFit => "ff-rev",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Rule> {
        Some(match tag {
            "3" => Rule::RegularToHuge,
            "4" => Rule::RegularToRegular,
            "5" => Rule::RegularToTiny,
            "6" => Rule::MediumToMedium,
            "7" => Rule::LargeToLarge,
            "9" => Rule::HugeToRegular,
            "10" => Rule::HugeToTiny,
            "11" => Rule::Empty,
            "ff" => Rule::FirstFit,
            "ff-rev" => Rule::ReverseFirstFit,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub item_index: usize,
    pub size: Rat,
    pub class: ItemClass,
    pub phase: u8,
    pub bin_id: usize,
    pub rule: Rule,
    pub load_after: Rat,
    /// Type of the bin after placing. Always present for the two-phase
    /// algorithm; the baseline may produce bins that match no type.
    pub bin_type_after: Option<BinType>,
}

/// Snapshot of the switch into phase two.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    /// Index of the first item packed in phase two.
    pub before_item: usize,
    pub branch: Phase,
    pub lambda: Option<u8>,
    pub list: Vec<usize>,
    pub e: usize,
    pub r: usize,
}

/// An audit finding, tagged with the item whose placement preceded it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditEvent {
    pub after_item: Option<usize>,
    pub violation: Violation,
}

/// Common interface of the deterministic online packers.
pub trait OnlinePacker {
    /// Packs one item, or fails with [`Error::NoFit`] when no bin has room.
    fn place(&mut self, item: &Item) -> Result<Placement>;

    fn bins(&self) -> &[BinState];

    fn max_load(&self) -> Rat {
        self.bins().iter().map(|b| &b.load).max().cloned().unwrap_or_else(Rat::zero)
    }

    /// Canonical text encoding of everything that influences future
    /// placements. Two packers with equal keys respond identically to any
    /// continuation.
    fn state_key(&self) -> String;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackerState {
    pub m: usize,
    pub bins: Vec<BinState>,
    pub phase: Phase,
    /// Number of empty bins.
    pub e: usize,
    /// Number of regular bins.
    pub r: usize,
    pub phase2_list: Vec<usize>,
    /// `r - 3e` at the switch into the regular branch.
    pub lambda: Option<u8>,
    pub transition: Option<Transition>,
    /// Run the phase-one checks after every placement.
    pub audit: bool,
    pub audit_log: Vec<AuditEvent>,
}

impl PackerState {
    pub fn new(m: usize) -> Result<PackerState> {
        if m == 0 {
            return Err(Error::ZeroBins);
        }
        Ok(PackerState::from_bins((0..m).map(BinState::empty).collect()))
    }

    /// Wraps existing bins into a phase-one state, counting E and R bins
    /// from the stored types. Used to build synthetic states.
    pub fn from_bins(bins: Vec<BinState>) -> PackerState {
        let e = bins.iter().filter(|b| b.bin_type == Some(BinType::E)).count();
        let r = bins.iter().filter(|b| b.bin_type == Some(BinType::R)).count();
        PackerState {
            m: bins.len(),
            bins,
            phase: Phase::One,
            e,
            r,
            phase2_list: Vec::new(),
            lambda: None,
            transition: None,
            audit: false,
            audit_log: Vec::new(),
        }
    }

    pub fn with_audit(mut self, audit: bool) -> PackerState {
        self.audit = audit;
        self
    }

    /// Phase one continues only while `r < 3e`.
    pub fn phase1_should_stop(&self) -> bool {
        self.r >= 3 * self.e
    }

    fn first_of_type(&self, t: BinType) -> Option<usize> {
        self.bins.iter().position(|b| b.bin_type == Some(t))
    }

    pub fn phase1_place(&mut self, item: &Item) -> Result<Placement> {
        if self.phase != Phase::One || self.phase1_should_stop() {
            return Err(Error::Invariant("phase-one placement outside phase one".into()));
        }
        let six = Rat::from(6);
        let fits_six = |b: &BinState| &b.load + &item.size <= six;

        let chosen = match item.class {
            ItemClass::Regular => self
                .first_of_type(BinType::H)
                .map(|id| (id, Rule::RegularToHuge))
                .or_else(|| {
                    self.bins
                        .iter()
                        .position(|b| b.bin_type == Some(BinType::R) && fits_six(b))
                        .map(|id| (id, Rule::RegularToRegular))
                })
                .or_else(|| {
                    self.first_of_type(BinType::T)
                        .filter(|&id| fits_six(&self.bins[id]))
                        .map(|id| (id, Rule::RegularToTiny))
                }),
            ItemClass::Medium => self
                .first_of_type(BinType::M)
                .filter(|&id| &self.bins[id].load + &item.size <= alg_capacity())
                .map(|id| (id, Rule::MediumToMedium)),
            ItemClass::Large => self
                .first_of_type(BinType::L)
                .filter(|&id| &self.bins[id].load + &item.size <= alg_capacity())
                .map(|id| (id, Rule::LargeToLarge)),
            ItemClass::Huge => {
                // Largest regular bin, lowest id among equals.
                let mut best: Option<usize> = None;
                for (id, b) in self.bins.iter().enumerate() {
                    if b.bin_type == Some(BinType::R) && best.is_none_or(|cur| b.load > self.bins[cur].load) {
                        best = Some(id);
                    }
                }
                best.map(|id| (id, Rule::HugeToRegular))
                    .or_else(|| self.first_of_type(BinType::T).map(|id| (id, Rule::HugeToTiny)))
            }
        };

        let (bin_id, rule) = match chosen {
            Some(c) => c,
            None => match self.first_of_type(BinType::E) {
                Some(id) => (id, Rule::Empty),
                None => return Err(Error::Invariant("no empty bin while r < 3e".into())),
            },
        };

        let bin = &mut self.bins[bin_id];
        let old_type = bin.bin_type;
        bin.push(item.clone());
        bin.retype();
        let new_type = bin.bin_type;
        if bin.load > alg_capacity() {
            return Err(Error::Invariant(format!("phase one overfilled bin {bin_id}")));
        }
        let new_type = new_type.ok_or_else(|| Error::Unclassifiable { bin: bin_id, load: bin.load.clone() })?;
        let load_after = bin.load.clone();

        self.recount(old_type, Some(new_type));

        if self.audit {
            for violation in audit::check_phase1_state(self) {
                self.audit_log.push(AuditEvent { after_item: Some(item.index), violation });
            }
        }

        Ok(Placement {
            item_index: item.index,
            size: item.size.clone(),
            class: item.class,
            phase: 1,
            bin_id,
            rule,
            load_after,
            bin_type_after: Some(new_type),
        })
    }

    fn recount(&mut self, old: Option<BinType>, new: Option<BinType>) {
        match old {
            Some(BinType::E) => self.e -= 1,
            Some(BinType::R) => self.r -= 1,
            _ => {}
        }
        match new {
            Some(BinType::E) => self.e += 1,
            Some(BinType::R) => self.r += 1,
            _ => {}
        }
    }

    fn count(&self, t: BinType) -> usize {
        self.bins.iter().filter(|b| b.bin_type == Some(t)).count()
    }

    /// Picks the phase-two branch. A surviving huge-item bin rules out
    /// regular, tiny and empty bins; anything else is an engine bug.
    pub fn select_branch(&self) -> Result<Phase> {
        let huge: Vec<usize> = self.ids_of(BinType::H);
        if huge.is_empty() {
            return Ok(Phase::TwoRegular);
        }
        let offending: Vec<usize> = self
            .bins
            .iter()
            .filter(|b| matches!(b.bin_type, Some(BinType::R | BinType::T | BinType::E)))
            .map(|b| b.id)
            .collect();
        if !offending.is_empty() {
            return Err(Error::Invariant(format!(
                "huge-item bins {huge:?} coexist with regular, tiny or empty bins {offending:?}"
            )));
        }
        Ok(Phase::TwoHuge)
    }

    fn ids_of(&self, t: BinType) -> Vec<usize> {
        self.bins.iter().filter(|b| b.bin_type == Some(t)).map(|b| b.id).collect()
    }

    /// Huge-item bins in creation order, then L, then M.
    pub fn build_huge_list(&self) -> Vec<usize> {
        let mut list = self.ids_of(BinType::H);
        list.extend(self.first_of_type(BinType::L));
        list.extend(self.first_of_type(BinType::M));
        list
    }

    /// The regular-branch list: the special bins L, M, T that exist, then
    /// the blocks. Returns the list and `lambda = r - 3e`.
    ///
    /// Regular bins are taken in creation order, except that the (unique)
    /// regular bin with load at most 4 goes first. The first block holds
    /// `lambda` regular bins and `E_1`, blocks 2..=e hold three regular bins
    /// and an empty bin, and the final block holds the last three regular
    /// bins. With no empty bins all regular bins form one block.
    pub fn build_blocks(&self) -> Result<(Vec<usize>, u8)> {
        let e = self.count(BinType::E);
        let r = self.count(BinType::R);
        let lambda = r
            .checked_sub(3 * e)
            .filter(|l| *l <= 3)
            .ok_or_else(|| Error::Invariant(format!("r - 3e out of range with e = {e}, r = {r}")))?;

        let mut list = Vec::with_capacity(self.m);
        for t in [BinType::L, BinType::M, BinType::T] {
            list.extend(self.first_of_type(t));
        }

        let mut regular = self.ids_of(BinType::R);
        let four = Rat::from(4);
        if let Some(pos) = regular.iter().position(|&id| self.bins[id].load <= four) {
            let first = regular.remove(pos);
            regular.insert(0, first);
        }
        let empty = self.ids_of(BinType::E);

        let mut regular = regular.into_iter();
        if e == 0 {
            list.extend(regular);
        } else {
            list.extend(regular.by_ref().take(lambda));
            for &empty_id in &empty {
                list.push(empty_id);
                list.extend(regular.by_ref().take(3));
            }
            debug_assert!(regular.next().is_none());
        }
        Ok((list, lambda as u8))
    }

    /// Switches to phase two. Called when an item arrives and the phase-one
    /// loop condition fails.
    pub fn begin_phase2(&mut self, next_item: usize) -> Result<()> {
        if self.audit {
            for violation in audit::check_phase1_termination(self) {
                self.audit_log.push(AuditEvent { after_item: None, violation });
            }
        }
        let branch = self.select_branch()?;
        let (list, lambda) = match branch {
            Phase::TwoHuge => (self.build_huge_list(), None),
            _ => {
                let (list, lambda) = self.build_blocks()?;
                (list, Some(lambda))
            }
        };
        self.phase = branch;
        self.phase2_list = list.clone();
        self.lambda = lambda;
        self.transition = Some(Transition { before_item: next_item, branch, lambda, list, e: self.e, r: self.r });
        Ok(())
    }

    /// First Fit over the phase-two list at capacity 18. In the regular
    /// branch huge items scan the list in reverse.
    pub fn phase2_place(&mut self, item: &Item) -> Result<Placement> {
        if self.phase == Phase::One {
            return Err(Error::Invariant("phase-two placement during phase one".into()));
        }
        let reverse = self.phase == Phase::TwoRegular && item.class == ItemClass::Huge;
        let cap = alg_capacity();
        let fits = |id: &usize| &self.bins[*id].load + &item.size <= cap;
        let found = if reverse {
            self.phase2_list.iter().rev().copied().find(fits)
        } else {
            self.phase2_list.iter().copied().find(fits)
        };
        // Every bin complete leaves an empty list; only a zero-size item can
        // still arrive then, and it goes to the lowest bin.
        let bin_id = match found {
            Some(id) => id,
            None if item.size.is_zero() => 0,
            None => return Err(Error::NoFit { item: item.index }),
        };
        let bin = &mut self.bins[bin_id];
        // Types stay frozen in phase two.
        bin.push(item.clone());
        Ok(Placement {
            item_index: item.index,
            size: item.size.clone(),
            class: item.class,
            phase: 2,
            bin_id,
            rule: if reverse { Rule::ReverseFirstFit } else { Rule::FirstFit },
            load_after: bin.load.clone(),
            bin_type_after: bin.bin_type,
        })
    }
}

impl OnlinePacker for PackerState {
    fn place(&mut self, item: &Item) -> Result<Placement> {
        if self.phase == Phase::One && self.phase1_should_stop() {
            self.begin_phase2(item.index)?;
        }
        match self.phase {
            Phase::One => self.phase1_place(item),
            _ => self.phase2_place(item),
        }
    }

    fn bins(&self) -> &[BinState] {
        &self.bins
    }

    fn state_key(&self) -> String {
        let mut key = format!("s15|{:?}|{:?}|", self.phase, self.phase2_list);
        write_bins_key(&mut key, &self.bins);
        key
    }
}

fn write_bins_key(key: &mut String, bins: &[BinState]) {
    for b in bins {
        let mut sizes: Vec<&Rat> = b.contents.iter().map(|i| &i.size).collect();
        sizes.sort();
        let t = b.bin_type.map_or("-", BinType::as_str);
        let _ = write!(key, "{t}{sizes:?};");
    }
}

/// Plain First Fit over the `m` bins in id order, capacity 18.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FirstFitPacker {
    pub bins: Vec<BinState>,
}

impl FirstFitPacker {
    pub fn new(m: usize) -> Result<FirstFitPacker> {
        if m == 0 {
            return Err(Error::ZeroBins);
        }
        Ok(FirstFitPacker { bins: (0..m).map(BinState::empty).collect() })
    }
}

impl OnlinePacker for FirstFitPacker {
    fn place(&mut self, item: &Item) -> Result<Placement> {
        let cap = alg_capacity();
        let bin = self
            .bins
            .iter_mut()
            .find(|b| &b.load + &item.size <= cap)
            .ok_or(Error::NoFit { item: item.index })?;
        bin.push(item.clone());
        bin.retype();
        Ok(Placement {
            item_index: item.index,
            size: item.size.clone(),
            class: item.class,
            phase: 1,
            bin_id: bin.id,
            rule: Rule::FirstFit,
            load_after: bin.load.clone(),
            bin_type_after: bin.bin_type,
        })
    }

    fn bins(&self) -> &[BinState] {
        &self.bins
    }

    fn state_key(&self) -> String {
        let mut key = String::from("ff|");
        write_bins_key(&mut key, &self.bins);
        key
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    Stretch15,
    FirstFit,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Stretch15 => "stretch15",
            Algorithm::FirstFit => "firstfit",
        }
    }

    pub fn parse(s: &str) -> Option<Algorithm> {
        match s {
            "stretch15" => Some(Algorithm::Stretch15),
            "firstfit" => Some(Algorithm::FirstFit),
            _ => None,
        }
    }

    pub fn packer(self, m: usize, audit: bool) -> Result<AnyPacker> {
        Ok(match self {
            Algorithm::Stretch15 => AnyPacker::Stretch15(PackerState::new(m)?.with_audit(audit)),
            Algorithm::FirstFit => AnyPacker::FirstFit(FirstFitPacker::new(m)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnyPacker {
    Stretch15(PackerState),
    FirstFit(FirstFitPacker),
}

impl OnlinePacker for AnyPacker {
    fn place(&mut self, item: &Item) -> Result<Placement> {
        match self {
            AnyPacker::Stretch15(p) => p.place(item),
            AnyPacker::FirstFit(p) => p.place(item),
        }
    }

    fn bins(&self) -> &[BinState] {
        match self {
            AnyPacker::Stretch15(p) => p.bins(),
            AnyPacker::FirstFit(p) => p.bins(),
        }
    }

    fn state_key(&self) -> String {
        match self {
            AnyPacker::Stretch15(p) => p.state_key(),
            AnyPacker::FirstFit(p) => p.state_key(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub algorithm: Algorithm,
    pub m: usize,
    pub placements: Vec<Placement>,
    pub final_loads: Vec<Rat>,
    pub max_load: Rat,
    pub failed_at: Option<usize>,
    pub transition: Option<Transition>,
    pub audit_log: Vec<AuditEvent>,
}

impl RunResult {
    pub fn succeeded(&self) -> bool {
        self.failed_at.is_none()
    }

    pub fn bins_used(&self) -> usize {
        let mut used: Vec<usize> = self.placements.iter().map(|p| p.bin_id).collect();
        used.sort_unstable();
        used.dedup();
        used.len()
    }
}

pub fn run(instance: &Instance, algorithm: Algorithm) -> Result<RunResult> {
    run_with(instance, algorithm, false)
}

/// Feeds the items in order through a fresh packer. Stops at the first item
/// that fits nowhere and reports it in `failed_at`. With `audit` set, the
/// phase-one checks run after every placement and land in `audit_log`.
pub fn run_with(instance: &Instance, algorithm: Algorithm, audit: bool) -> Result<RunResult> {
    let mut packer = algorithm.packer(instance.m, audit)?;
    let mut placements = Vec::with_capacity(instance.len());
    let mut failed_at = None;
    for item in &instance.items {
        match packer.place(item) {
            Ok(p) => placements.push(p),
            Err(Error::NoFit { item }) => {
                failed_at = Some(item);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let final_loads: Vec<Rat> = packer.bins().iter().map(|b| b.load.clone()).collect();
    let max_load = packer.max_load();
    let (transition, audit_log) = match packer {
        AnyPacker::Stretch15(p) => (p.transition, p.audit_log),
        AnyPacker::FirstFit(_) => (None, Vec::new()),
    };
    Ok(RunResult { algorithm, m: instance.m, placements, final_loads, max_load, failed_at, transition, audit_log })
}

//! Mechanical checks of the algorithm's invariants.
//!
//! Checkers never mutate what they inspect and report problems as data.
//! Phase-one clauses are labelled `(i)` through `(vi)`:
//!
//! * `(i)` every bin has a type, and it is the one stored in the state
//! * `(ii)` complete bins have value at least 0
//! * `(iii)` a huge-item bin excludes regular and tiny bins
//! * `(iv)` at most one large-item bin and at most one medium-item bin
//! * `(v)` at most one tiny bin, `load(T) + load(R) > 6` for every regular
//!   bin, and at most one regular bin with load at most 4
//! * `(vi)` at the end of phase one, `3e <= r <= 3e + 3`

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::engine::RunResult;
use crate::error::Result;
use crate::model::{alg_capacity, bin_value, bin_weight, classify_bin, BinState, BinType, Instance, Item, Packing};
use crate::oracle::{self, OracleConfig};
use crate::rat::Rat;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub clause: String,
    pub bins: Vec<usize>,
    pub detail: String,
}

impl Violation {
    pub fn new(clause: &str, bins: Vec<usize>, detail: impl Into<String>) -> Violation {
        Violation { clause: clause.to_string(), bins, detail: detail.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} (bins {:?})", self.clause, self.detail, self.bins)
    }
}

fn ids_of(bins: &[BinState], t: BinType) -> Vec<usize> {
    bins.iter().filter(|b| b.bin_type == Some(t)).map(|b| b.id).collect()
}

/// Checks clauses (i) to (v) plus counter coherence on a phase-one state.
pub fn check_phase1_state(state: &crate::engine::PackerState) -> Vec<Violation> {
    let bins = &state.bins;
    let mut out = Vec::new();

    let untyped: Vec<usize> = bins
        .iter()
        .filter(|b| match classify_bin(b) {
            Ok(t) => b.bin_type != Some(t),
            Err(_) => true,
        })
        .map(|b| b.id)
        .collect();
    if !untyped.is_empty() {
        out.push(Violation::new("(i)", untyped, "bin matches no type or carries a stale type"));
    }

    let over: Vec<usize> = bins.iter().filter(|b| b.load > alg_capacity()).map(|b| b.id).collect();
    if !over.is_empty() {
        out.push(Violation::new("(i)", over, "load above 18"));
    }

    let negative: Vec<usize> = bins
        .iter()
        .filter(|b| b.bin_type == Some(BinType::G) && bin_value(b) < 0)
        .map(|b| b.id)
        .collect();
    if !negative.is_empty() {
        out.push(Violation::new("(ii)", negative, "complete bin with negative value"));
    }

    let huge = ids_of(bins, BinType::H);
    let regular = ids_of(bins, BinType::R);
    let tiny = ids_of(bins, BinType::T);
    if !huge.is_empty() && (!regular.is_empty() || !tiny.is_empty()) {
        let mut ids = huge.clone();
        ids.extend(&regular);
        ids.extend(&tiny);
        out.push(Violation::new("(iii)", ids, "huge-item bin coexists with a regular or tiny bin"));
    }

    let large = ids_of(bins, BinType::L);
    if large.len() > 1 {
        out.push(Violation::new("(iv)", large, "more than one large-item bin"));
    }
    let medium = ids_of(bins, BinType::M);
    if medium.len() > 1 {
        out.push(Violation::new("(iv)", medium, "more than one medium-item bin"));
    }

    if tiny.len() > 1 {
        out.push(Violation::new("(v)", tiny.clone(), "at most one tiny bin"));
    }
    let six = Rat::from(6);
    for &t in &tiny {
        let close: Vec<usize> =
            regular.iter().copied().filter(|&r| &bins[t].load + &bins[r].load <= six).collect();
        if !close.is_empty() {
            let mut ids = vec![t];
            ids.extend(close);
            out.push(Violation::new("(v)", ids, "tiny and regular bin together at most 6"));
        }
    }
    let four = Rat::from(4);
    let small: Vec<usize> = regular.iter().copied().filter(|&r| bins[r].load <= four).collect();
    if small.len() > 1 {
        out.push(Violation::new("(v)", small, "more than one regular bin with load at most 4"));
    }

    let e = ids_of(bins, BinType::E).len();
    if e != state.e || regular.len() != state.r {
        out.push(Violation::new(
            "counters",
            vec![],
            format!("stored e = {}, r = {}; recount e = {}, r = {}", state.e, state.r, e, regular.len()),
        ));
    }
    out
}

/// Clause (vi): `3e <= r <= 3e + 3` when phase one ends with items left.
pub fn check_phase1_termination(state: &crate::engine::PackerState) -> Vec<Violation> {
    check_termination_counts(state.e, state.r)
}

pub fn check_termination_counts(e: usize, r: usize) -> Vec<Violation> {
    if 3 * e <= r && r <= 3 * e + 3 {
        Vec::new()
    } else {
        vec![Violation::new("(vi)", vec![], format!("3e <= r <= 3e+3 fails with e = {e}, r = {r}"))]
    }
}

/// Weight and value totals of a packing over exactly `m` bins, empty bins
/// included (each contributes weight -13 and value -3).
pub fn packing_totals(packing: &Packing, sizes: &[Rat], m: usize) -> Result<(Rat, i64)> {
    let bins = packing_bins(packing, sizes, m)?;
    let w = bins.iter().map(bin_weight).sum();
    let v = bins.iter().map(bin_value).sum();
    Ok((w, v))
}

fn packing_bins(packing: &Packing, sizes: &[Rat], m: usize) -> Result<Vec<BinState>> {
    let mut bins: Vec<BinState> = (0..m.max(packing.bin_count())).map(BinState::empty).collect();
    for (i, (size, &b)) in sizes.iter().zip(&packing.assignment).enumerate() {
        bins[b].push(Item::new(i, size.clone())?);
    }
    Ok(bins)
}

/// Total weight and total value of a packing into `m` bins must both be at
/// most 0 when the packing has capacity at most 12.
pub fn check_lemma1(packing: &Packing, sizes: &[Rat], m: usize) -> Vec<Violation> {
    let mut out = Vec::new();
    if packing.bin_count() > m || packing.assignment.iter().any(|&b| b >= m.max(packing.bin_count())) {
        out.push(Violation::new("bin-count", vec![], format!("packing uses more than {m} bins")));
        return out;
    }
    let (w, v) = match packing_totals(packing, sizes, m) {
        Ok(t) => t,
        Err(e) => return vec![Violation::new("packing", vec![], e.to_string())],
    };
    if w > Rat::zero() {
        out.push(Violation::new("total-weight", vec![], format!("total weight {w} > 0")));
    }
    if v > 0 {
        out.push(Violation::new("total-value", vec![], format!("total value {v} > 0")));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunReport {
    pub violations: Vec<Violation>,
    /// Optimal offline capacity, when the oracle could compute it.
    pub min_capacity: Option<Rat>,
    /// `max_load / min_capacity`; `None` when undefined or not computed.
    pub ratio: Option<Rat>,
}

/// Checks a finished run: at most `m` bins, every load at most 18, no
/// failure on an instance with a verified witness, and no audit findings.
/// For instances within the oracle limit it also computes the exact ratio
/// against the offline optimum.
pub fn check_run(result: &RunResult, instance: &Instance, cfg: &OracleConfig) -> RunReport {
    let mut violations: Vec<Violation> = result.audit_log.iter().map(|a| a.violation.clone()).collect();
    if result.final_loads.len() > instance.m || result.placements.iter().any(|p| p.bin_id >= instance.m) {
        violations.push(Violation::new("bins", vec![], format!("more than {} bins used", instance.m)));
    }
    let over: Vec<usize> = result
        .final_loads
        .iter()
        .enumerate()
        .filter(|(_, l)| **l > alg_capacity())
        .map(|(i, _)| i)
        .collect();
    if !over.is_empty() {
        violations.push(Violation::new("capacity", over, "load above 18"));
    }
    let sizes = instance.sizes();
    let certified = instance.witness.as_ref().is_some_and(|w| w.verify(&sizes, instance.m));
    if let (Some(i), true) = (result.failed_at, certified) {
        violations.push(Violation::new("failure", vec![], format!("failed on item {i} of a valid instance")));
    }

    let mut min_capacity = None;
    let mut ratio = None;
    if sizes.len() <= cfg.item_limit {
        if let Ok(c) = oracle::min_capacity(&sizes, instance.m, cfg) {
            if !c.is_zero() {
                ratio = Some(&result.max_load / &c);
            }
            min_capacity = Some(c);
        }
    }
    RunReport { violations, min_capacity, ratio }
}

//! Instance files and trace streams.
//!
//! Instance file, UTF-8 text, one directive per line (`#` comments and blank
//! lines are ignored):
//!
//! ```text
//! m 3
//! scale 12
//! 6
//! 6
//! 12
//! 12
//! witness:
//! item 0 -> bin 0
//! item 1 -> bin 0
//! item 2 -> bin 1
//! item 3 -> bin 2
//! ```
//!
//! `scale` is optional (12 or 1, default 12). Sizes are `p/q` or decimals
//! with at most nine fractional digits, read exactly; at scale 1 they are
//! multiplied by 12. The `witness:` block is optional and, when present,
//! must place every item exactly once.
//!
//! Traces hold one JSON object per line; see [`TraceEvent`].

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::engine::{RunResult, Transition};
use crate::model::{opt_capacity, BinType, Instance, Packing};
use crate::rat::Rat;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError { line, message: message.into() }
}

pub fn parse_instance(text: &str) -> Result<Instance, FormatError> {
    let mut m: Option<usize> = None;
    let mut scale: Option<i64> = None;
    let mut sizes: Vec<Rat> = Vec::new();
    let mut witness: Option<Vec<Option<usize>>> = None;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some(m_val) = m else {
            let rest = line.strip_prefix("m ").ok_or_else(|| err(line_no, "expected `m <bins>` first"))?;
            let v: usize = rest.trim().parse().map_err(|_| err(line_no, "bin count is not an integer"))?;
            if v == 0 {
                return Err(err(line_no, "bin count must be positive"));
            }
            m = Some(v);
            continue;
        };

        if let Some(slots) = witness.as_mut() {
            let (item, bin) = parse_witness_line(line).ok_or_else(|| err(line_no, "expected `item <i> -> bin <b>`"))?;
            if item >= slots.len() {
                return Err(err(line_no, format!("witness names unknown item {item}")));
            }
            if bin >= m_val {
                return Err(err(line_no, format!("witness bin {bin} out of range")));
            }
            if slots[item].replace(bin).is_some() {
                return Err(err(line_no, format!("item {item} assigned twice")));
            }
            continue;
        }

        if line == "witness:" {
            witness = Some(vec![None; sizes.len()]);
            continue;
        }
        if let Some(rest) = line.strip_prefix("scale ") {
            if scale.is_some() || !sizes.is_empty() {
                return Err(err(line_no, "`scale` must come once, before any size"));
            }
            scale = Some(match rest.trim() {
                "12" => 12,
                "1" => 1,
                other => return Err(err(line_no, format!("unsupported scale `{other}`"))),
            });
            continue;
        }
        let value: Rat = line.parse().map_err(|e| err(line_no, format!("{e}")))?;
        let limit = Rat::from(scale.unwrap_or(12));
        if value.is_negative() || value > limit {
            return Err(err(line_no, format!("size {value} outside [0, {limit}]")));
        }
        sizes.push(if scale == Some(1) { value * Rat::from(12) } else { value });
    }

    let m = m.ok_or_else(|| err(last_line, "missing `m` directive"))?;
    let witness = match witness {
        None => None,
        Some(slots) => {
            let assignment = slots
                .iter()
                .enumerate()
                .map(|(i, b)| b.ok_or_else(|| err(last_line, format!("witness misses item {i}"))))
                .collect::<Result<Vec<_>, _>>()?;
            Some(Packing::from_assignment(&sizes, assignment, m, opt_capacity()).expect("bins checked"))
        }
    };
    let mut instance = Instance::new(m, sizes).map_err(|e| err(last_line, e.to_string()))?;
    instance.witness = witness;
    Ok(instance)
}

fn parse_witness_line(line: &str) -> Option<(usize, usize)> {
    let mut parts = line.split_whitespace();
    let (Some("item"), Some(i), Some("->"), Some("bin"), Some(b), None) =
        (parts.next(), parts.next(), parts.next(), parts.next(), parts.next(), parts.next())
    else {
        return None;
    };
    Some((i.parse().ok()?, b.parse().ok()?))
}

/// Serializes at scale 12, including the witness when present.
pub fn write_instance(instance: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "m {}", instance.m);
    let _ = writeln!(out, "scale 12");
    for item in &instance.items {
        let _ = writeln!(out, "{}", item.size);
    }
    if let Some(w) = &instance.witness {
        let _ = writeln!(out, "witness:");
        for (i, b) in w.assignment.iter().enumerate() {
            let _ = writeln!(out, "item {i} -> bin {b}");
        }
    }
    out
}

/// One line of a trace stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "ev", rename_all = "lowercase")]
pub enum TraceEvent {
    Place {
        i: usize,
        size: Rat,
        class: String,
        phase: u8,
        rule: String,
        bin: usize,
        load: Rat,
        bintype: String,
    },
    Phase2 {
        branch: String,
        lambda: u8,
        list: Vec<usize>,
    },
    Fail {
        i: usize,
    },
    Done {
        max: Rat,
        loads: Vec<Rat>,
    },
    Violation {
        clause: String,
        bins: Vec<usize>,
    },
}

impl TraceEvent {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("trace events always serialize")
    }
}

fn phase2_event(t: &Transition) -> TraceEvent {
    TraceEvent::Phase2 { branch: t.branch.branch_name().to_string(), lambda: t.lambda.unwrap_or(0), list: t.list.clone() }
}

/// Events of a run in stream order. Audit findings follow the placement
/// that caused them; findings raised at the phase switch precede the
/// `phase2` event.
pub fn trace_events(result: &RunResult) -> Vec<TraceEvent> {
    let mut out = Vec::new();
    let violations = |after: Option<usize>| {
        result
            .audit_log
            .iter()
            .filter(move |a| a.after_item == after)
            .map(|a| TraceEvent::Violation { clause: a.violation.clause.clone(), bins: a.violation.bins.clone() })
    };
    let transition_at = |i: usize, out: &mut Vec<TraceEvent>| {
        if let Some(t) = result.transition.as_ref().filter(|t| t.before_item == i) {
            out.extend(violations(None));
            out.push(phase2_event(t));
        }
    };

    for p in &result.placements {
        transition_at(p.item_index, &mut out);
        out.push(TraceEvent::Place {
            i: p.item_index,
            size: p.size.clone(),
            class: p.class.as_str().to_string(),
            phase: p.phase,
            rule: p.rule.tag().to_string(),
            bin: p.bin_id,
            load: p.load_after.clone(),
            bintype: p.bin_type_after.map_or("-", BinType::as_str).to_string(),
        });
        out.extend(violations(Some(p.item_index)));
    }
    if let Some(i) = result.failed_at {
        transition_at(i, &mut out);
        out.push(TraceEvent::Fail { i });
    }
    out.push(TraceEvent::Done { max: result.max_load.clone(), loads: result.final_loads.clone() });
    out
}

pub fn write_trace(events: &[TraceEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&e.to_line());
        out.push('\n');
    }
    out
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceEvent>, FormatError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| err(i + 1, e.to_string())))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TraceMismatch {
    #[error("event {index}: recorded {recorded}, replay gives {replayed}")]
    Differs { index: usize, recorded: String, replayed: String },
    #[error("recorded trace has {recorded} events, replay has {replayed}")]
    Length { recorded: usize, replayed: usize },
}

/// Compares a recorded trace with a replayed one event by event, ignoring
/// `violation` events.
pub fn compare_traces(recorded: &[TraceEvent], replayed: &[TraceEvent]) -> Result<(), TraceMismatch> {
    let keep = |e: &&TraceEvent| !matches!(e, TraceEvent::Violation { .. });
    let a: Vec<&TraceEvent> = recorded.iter().filter(keep).collect();
    let b: Vec<&TraceEvent> = replayed.iter().filter(keep).collect();
    for (index, (x, y)) in a.iter().zip(&b).enumerate() {
        if x != y {
            return Err(TraceMismatch::Differs { index, recorded: x.to_line(), replayed: y.to_line() });
        }
    }
    if a.len() != b.len() {
        return Err(TraceMismatch::Length { recorded: a.len(), replayed: b.len() });
    }
    Ok(())
}

//! Text form of event traces.
//!
//! One event per line, `<agent>;<EVENT>;<location>;<timestamp_min>;<miles>`,
//! with the distance written with exactly two decimals, e.g.
//! `c1;DEPARTS;R3;475;0.00`. Blank lines and `#` comments are ignored on
//! input.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use super::{ClientId, Event, EventKind, EventTrace};
use crate::world::LocationId;

#[derive(Debug, Clone, PartialEq)]
pub enum TraceErrorKind {
    FieldCount(usize),
    BadAgent(String),
    UnknownEvent(String),
    BadLocation(String),
    BadTimestamp(String),
    BadDistance(String),
    NegativeDistance,
    TimestampRegression(ClientId),
    OutOfOrder,
    SeesOnNonStation(LocationId),
    Grammar(String),
}

impl fmt::Display for TraceErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceErrorKind::FieldCount(n) => write!(f, "expected 5 fields, found {n}"),
            TraceErrorKind::BadAgent(s) => write!(f, "malformed agent {s:?}"),
            TraceErrorKind::UnknownEvent(s) => write!(f, "unknown event {s:?}"),
            TraceErrorKind::BadLocation(s) => write!(f, "malformed location {s:?}"),
            TraceErrorKind::BadTimestamp(s) => write!(f, "malformed timestamp {s:?}"),
            TraceErrorKind::BadDistance(s) => write!(f, "malformed distance {s:?}"),
            TraceErrorKind::NegativeDistance => write!(f, "negative distance"),
            TraceErrorKind::TimestampRegression(a) => write!(f, "timestamp regression for {a}"),
            TraceErrorKind::OutOfOrder => write!(f, "events not sorted by (timestamp, agent)"),
            TraceErrorKind::SeesOnNonStation(l) => write!(f, "SEES on non-station {l}"),
            TraceErrorKind::Grammar(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {kind}")]
pub struct TraceError {
    pub line: usize,
    pub kind: TraceErrorKind,
}

pub fn serialize_trace(trace: &EventTrace) -> String {
    let mut out = String::with_capacity(trace.len() * 28);
    for e in &trace.events {
        let _ = writeln!(
            out,
            "{};{};{};{};{:.2}",
            e.agent,
            e.kind.word(),
            e.location,
            e.timestamp,
            e.distance
        );
    }
    out
}

fn is_canonical_uint(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) && (s == "0" || !s.starts_with('0'))
}

fn parse_distance(s: &str) -> Result<f64, TraceErrorKind> {
    if s.starts_with('-') {
        return Err(TraceErrorKind::NegativeDistance);
    }
    let canonical = s.split_once('.').is_some_and(|(int, frac)| {
        is_canonical_uint(int) && frac.len() == 2 && frac.bytes().all(|b| b.is_ascii_digit())
    });
    if !canonical {
        return Err(TraceErrorKind::BadDistance(s.to_string()));
    }
    s.parse().map_err(|_| TraceErrorKind::BadDistance(s.to_string()))
}

fn parse_line(line: &str) -> Result<Event, TraceErrorKind> {
    let fields: Vec<&str> = line.split(';').collect();
    let [agent, kind, location, timestamp, distance] = fields.as_slice() else {
        return Err(TraceErrorKind::FieldCount(fields.len()));
    };
    let agent: ClientId = agent.parse().map_err(|_| TraceErrorKind::BadAgent(agent.to_string()))?;
    let kind = EventKind::from_word(kind).ok_or_else(|| TraceErrorKind::UnknownEvent(kind.to_string()))?;
    let location: LocationId = location
        .parse()
        .map_err(|_| TraceErrorKind::BadLocation(location.to_string()))?;
    if !is_canonical_uint(timestamp) {
        return Err(TraceErrorKind::BadTimestamp(timestamp.to_string()));
    }
    let timestamp: u32 = timestamp
        .parse()
        .map_err(|_| TraceErrorKind::BadTimestamp(timestamp.to_string()))?;
    let distance = parse_distance(distance)?;
    Ok(Event {
        agent,
        kind,
        location,
        timestamp,
        distance,
    })
}

/// Parses and validates a trace; errors carry the 1-based line number.
pub fn parse_trace(text: &str) -> Result<EventTrace, TraceError> {
    let mut events = Vec::new();
    let mut lines = Vec::new();
    for (i, line) in text.split('\n').enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let event = parse_line(line).map_err(|kind| TraceError { line: line_no, kind })?;
        events.push(event);
        lines.push(line_no);
    }
    validate_events(lines.iter().copied().zip(events.iter()))?;
    Ok(EventTrace { events })
}

#[derive(Clone, Copy, PartialEq)]
enum AgentState {
    Idle,
    Travelling,
}

/// Checks global order, per-agent monotone time, the
/// `(Departs Sees* Arrives)*` grammar (Needs may appear anywhere) and
/// field invariants.
pub(crate) fn validate_events<'a>(events: impl Iterator<Item = (usize, &'a Event)>) -> Result<(), TraceError> {
    let mut agents: HashMap<ClientId, (u32, AgentState, usize)> = HashMap::new();
    let mut prev_key: Option<(u32, ClientId)> = None;
    for (line, e) in events {
        let fail = |kind| Err(TraceError { line, kind });
        if !(e.distance >= 0.0) {
            return fail(TraceErrorKind::NegativeDistance);
        }
        if e.kind == EventKind::Sees && !e.location.is_station() {
            return fail(TraceErrorKind::SeesOnNonStation(e.location));
        }
        let entry = agents.entry(e.agent).or_insert((0, AgentState::Idle, line));
        if e.timestamp < entry.0 {
            return fail(TraceErrorKind::TimestampRegression(e.agent));
        }
        let key = (e.timestamp, e.agent);
        if prev_key.is_some_and(|p| key < p) {
            return fail(TraceErrorKind::OutOfOrder);
        }
        prev_key = Some(key);
        let next = match (entry.1, e.kind) {
            (_, EventKind::Needs) => entry.1,
            (AgentState::Idle, EventKind::Departs) => AgentState::Travelling,
            (AgentState::Travelling, EventKind::Sees) => AgentState::Travelling,
            (AgentState::Travelling, EventKind::Arrives) => AgentState::Idle,
            (AgentState::Idle, k) => {
                return fail(TraceErrorKind::Grammar(format!("{} before DEPARTS", k.word())));
            }
            (AgentState::Travelling, _) => {
                return fail(TraceErrorKind::Grammar("DEPARTS while travelling".into()));
            }
        };
        *entry = (e.timestamp, next, line);
    }
    let mut open: Vec<(usize, ClientId)> = agents
        .iter()
        .filter(|(_, s)| s.1 == AgentState::Travelling)
        .map(|(a, s)| (s.2, *a))
        .collect();
    open.sort();
    if let Some(&(line, agent)) = open.first() {
        return Err(TraceError {
            line,
            kind: TraceErrorKind::Grammar(format!("trip of {agent} never arrives")),
        });
    }
    Ok(())
}

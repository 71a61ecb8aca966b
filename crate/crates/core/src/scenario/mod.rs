//! Client lifestyles and the baseline movement trace.
//!
//! The baseline trace covers the whole horizon assuming no refuelling; the
//! market replay later injects `Needs` events into it.

mod generate;
pub mod trace;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::world::{LocationId, WorldError};

pub use generate::{generate_profiles, generate_trace, transition_weights, Destination};
pub use trace::{parse_trace, serialize_trace, TraceError, TraceErrorKind};

pub const MINUTES_PER_DAY: u32 = 1440;
pub const WORK_START_MIN: u32 = 8 * 60;
pub const WORK_END_MIN: u32 = 17 * 60;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("world has no {0:?} locations")]
    MissingKind(crate::world::LocationKind),
    #[error("invalid scenario config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    World(#[from] WorldError),
}

/// Client identifier, written `c<n>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClientId(pub u32);

impl fmt::Display for ClientId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

impl FromStr for ClientId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = s.strip_prefix('c').ok_or_else(|| format!("bad client id {s:?}"))?;
        let canonical = !digits.is_empty()
            && digits.bytes().all(|b| b.is_ascii_digit())
            && (digits == "0" || !digits.starts_with('0'));
        if !canonical {
            return Err(format!("bad client id {s:?}"));
        }
        digits.parse().map(ClientId).map_err(|_| format!("bad client id {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DayKind {
    Weekday,
    Weekend,
}

impl DayKind {
    /// Day 0 is a Monday.
    pub fn of_day(day: u32) -> Self {
        if day % 7 >= 5 {
            DayKind::Weekend
        } else {
            DayKind::Weekday
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HourBand {
    Morning,
    Afternoon,
    Evening,
}

impl HourBand {
    pub const ALL: [HourBand; 3] = [HourBand::Morning, HourBand::Afternoon, HourBand::Evening];

    /// Start and end of the band, minutes after midnight.
    pub fn window(self) -> (u32, u32) {
        match self {
            HourBand::Morning => (9 * 60, 12 * 60),
            HourBand::Afternoon => (12 * 60, 17 * 60),
            HourBand::Evening => (18 * 60, 21 * 60),
        }
    }
}

/// Probability of starting an optional outing per (day kind, hour band).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivityPropensity {
    weekday: [f64; 3],
    weekend: [f64; 3],
}

impl ActivityPropensity {
    pub fn new(weekday: [f64; 3], weekend: [f64; 3]) -> Self {
        Self { weekday, weekend }
    }

    pub fn zero() -> Self {
        Self::new([0.0; 3], [0.0; 3])
    }

    pub fn get(&self, day: DayKind, band: HourBand) -> f64 {
        let row = match day {
            DayKind::Weekday => &self.weekday,
            DayKind::Weekend => &self.weekend,
        };
        row[band as usize]
    }

    /// Expected optional outings per week.
    pub fn weekly_mean(&self) -> f64 {
        5.0 * self.weekday.iter().sum::<f64>() + 2.0 * self.weekend.iter().sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClientProfile {
    pub client: ClientId,
    pub home: LocationId,
    pub workplace: LocationId,
    pub propensity: ActivityPropensity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Mean optional outings per client and week (uncalibrated).
    pub trips_per_week_mean: f64,
    /// Fraction of optional outings that fall on weekends.
    pub weekend_share: f64,
    /// A station is seen when the driven path passes within this radius.
    pub sees_radius_miles: f64,
    pub speed_mph: f64,
    /// Commute departures are shifted by up to this many minutes.
    pub departure_jitter_min: u32,
    /// Maximum stops in one outing before heading home.
    pub max_outing_stops: u32,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            trips_per_week_mean: 4.0,
            weekend_share: 0.6,
            sees_radius_miles: 0.25,
            speed_mph: 30.0,
            departure_jitter_min: 10,
            max_outing_stops: 3,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: &str| Err(ScenarioError::InvalidConfig(m.to_string()));
        if !(self.trips_per_week_mean >= 0.0) {
            return bad("trips_per_week_mean must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.weekend_share) {
            return bad("weekend_share must lie in [0, 1]");
        }
        if !(self.speed_mph > 0.0) {
            return bad("speed_mph must be positive");
        }
        if !(self.sees_radius_miles >= 0.0) {
            return bad("sees_radius_miles must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Departs,
    Arrives,
    Sees,
    Needs,
}

impl EventKind {
    pub fn word(self) -> &'static str {
        match self {
            EventKind::Departs => "DEPARTS",
            EventKind::Arrives => "ARRIVES",
            EventKind::Sees => "SEES",
            EventKind::Needs => "NEEDS",
        }
    }

    pub fn from_word(word: &str) -> Option<Self> {
        Some(match word {
            "DEPARTS" => EventKind::Departs,
            "ARRIVES" => EventKind::Arrives,
            "SEES" => EventKind::Sees,
            "NEEDS" => EventKind::Needs,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub agent: ClientId,
    pub kind: EventKind,
    pub location: LocationId,
    /// Simulated minutes since scenario start.
    pub timestamp: u32,
    /// Miles since the agent's previous event; carried by `Arrives`.
    pub distance: f64,
}

impl Event {
    pub fn day(&self) -> u32 {
        self.timestamp / MINUTES_PER_DAY
    }
}

/// Events of all agents sorted by (timestamp, agent, per-agent sequence).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventTrace {
    pub events: Vec<Event>,
}

impl EventTrace {
    /// Merges per-agent event lists (each already in sequence order).
    pub fn from_agent_streams(streams: Vec<Vec<Event>>) -> Self {
        let mut events: Vec<Event> = streams.into_iter().flatten().collect();
        // Stable: keeps per-agent sequence order inside equal keys.
        events.sort_by_key(|e| (e.timestamp, e.agent));
        Self { events }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Events of one agent, in sequence order.
    pub fn agent_events(&self, agent: ClientId) -> impl Iterator<Item = &Event> + '_ {
        self.events.iter().filter(move |e| e.agent == agent)
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    /// Checks ordering, per-agent grammar and field invariants.
    pub fn validate(&self) -> Result<(), TraceError> {
        trace::validate_events(self.events.iter().enumerate().map(|(i, e)| (i + 1, e)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn client_id_text_form() {
        assert_eq!(ClientId(12).to_string(), "c12");
        assert_eq!("c12".parse::<ClientId>().unwrap(), ClientId(12));
        for bad in ["12", "c", "c01", "C1", "c1x"] {
            assert!(bad.parse::<ClientId>().is_err(), "{bad}");
        }
    }

    #[test]
    fn week_starts_monday() {
        assert_eq!(DayKind::of_day(0), DayKind::Weekday);
        assert_eq!(DayKind::of_day(4), DayKind::Weekday);
        assert_eq!(DayKind::of_day(5), DayKind::Weekend);
        assert_eq!(DayKind::of_day(6), DayKind::Weekend);
        assert_eq!(DayKind::of_day(7), DayKind::Weekday);
    }

    #[test]
    fn event_words() {
        for k in [
            EventKind::Departs,
            EventKind::Arrives,
            EventKind::Sees,
            EventKind::Needs,
        ] {
            assert_eq!(EventKind::from_word(k.word()), Some(k));
        }
        assert_eq!(EventKind::from_word("LEAVES"), None);
    }
}

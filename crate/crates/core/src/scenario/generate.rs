use std::collections::HashMap;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{
    ActivityPropensity, ClientId, ClientProfile, DayKind, Event, EventKind, EventTrace, HourBand, ScenarioConfig,
    ScenarioError, MINUTES_PER_DAY, WORK_END_MIN, WORK_START_MIN,
};
use crate::rng::{self, Purpose};
use crate::world::{LocationId, LocationKind, World};

/// Next stop chosen by the transition rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Destination {
    Home,
    Kind(LocationKind),
}

/// Transition rule A(L, d, t): weights over the next destination given the
/// kind of the current location, whether it is home, the day kind and the
/// hour band. Destinations within a kind are then chosen uniformly.
pub fn transition_weights(
    current: LocationKind,
    at_home: bool,
    day: DayKind,
    band: HourBand,
) -> Vec<(Destination, f64)> {
    use Destination::{Home, Kind};
    use LocationKind::{Residential, Shopping};
    if at_home {
        let shop = match (day, band) {
            (DayKind::Weekday, _) => 0.75,
            (DayKind::Weekend, HourBand::Morning) => 0.8,
            (DayKind::Weekend, HourBand::Afternoon) => 0.6,
            (DayKind::Weekend, HourBand::Evening) => 0.5,
        };
        return vec![(Kind(Shopping), shop), (Kind(Residential), 1.0 - shop)];
    }
    let home = if band == HourBand::Evening { 0.15 } else { 0.0 };
    match current {
        Shopping => vec![
            (Home, 0.6 + home),
            (Kind(Shopping), 0.3 - home),
            (Kind(Residential), 0.1),
        ],
        _ => vec![(Home, 0.7 + home), (Kind(Shopping), 0.3 - home)],
    }
}

/// Assigns homes and workplaces uniformly; optional-trip propensities are
/// derived from the weekly mean with a per-client multiplier in [0.5, 1.5).
pub fn generate_profiles(
    world: &World,
    n_clients: u32,
    config: &ScenarioConfig,
    seed: u64,
) -> Result<Vec<ClientProfile>, ScenarioError> {
    if n_clients == 0 {
        return Err(ScenarioError::InvalidConfig("need at least one client".into()));
    }
    config.validate()?;
    let homes = world.of_kind(LocationKind::Residential);
    let works = world.of_kind(LocationKind::Work);
    if homes.is_empty() {
        return Err(ScenarioError::MissingKind(LocationKind::Residential));
    }
    if works.is_empty() {
        return Err(ScenarioError::MissingKind(LocationKind::Work));
    }
    let weekday_p = config.trips_per_week_mean * (1.0 - config.weekend_share) / 5.0;
    let weekend_p = config.trips_per_week_mean * config.weekend_share / 6.0;
    let mut rng = rng::stream(seed, Purpose::Profiles, 0);
    Ok((1..=n_clients)
        .map(|i| {
            let home = homes[rng.random_range(0..homes.len())];
            let workplace = works[rng.random_range(0..works.len())];
            let scale: f64 = rng.random_range(0.5..1.5);
            let p = |base: f64| (base * scale).clamp(0.0, 1.0);
            ClientProfile {
                client: ClientId(i),
                home,
                workplace,
                propensity: ActivityPropensity::new([0.0, 0.0, p(weekday_p)], [p(weekend_p); 3]),
            }
        })
        .collect())
}

pub fn generate_trace(
    world: &World,
    profiles: &[ClientProfile],
    horizon_days: u32,
    config: &ScenarioConfig,
    seed: u64,
) -> Result<EventTrace, ScenarioError> {
    if horizon_days == 0 {
        return Err(ScenarioError::InvalidConfig("horizon must be at least one day".into()));
    }
    config.validate()?;
    for p in profiles {
        world.location(p.home)?;
        world.location(p.workplace)?;
    }
    let streams = profiles
        .par_iter()
        .map(|p| {
            let mut gen = ClientDay {
                world,
                config,
                profile: p,
                rng: rng::stream(seed, Purpose::Trace, u64::from(p.client.0)),
                legs: HashMap::new(),
                events: Vec::new(),
                clock: 0,
            };
            for day in 0..horizon_days {
                gen.day(day)?;
            }
            Ok(gen.events)
        })
        .collect::<Result<Vec<_>, ScenarioError>>()?;
    Ok(EventTrace::from_agent_streams(streams))
}

/// Cached geometry of one origin-destination trip.
struct Leg {
    miles: f64,
    minutes: u32,
    /// (station, fraction of the trip at which it is seen)
    sightings: Vec<(LocationId, f64)>,
}

struct ClientDay<'a> {
    world: &'a World,
    config: &'a ScenarioConfig,
    profile: &'a ClientProfile,
    rng: ChaCha8Rng,
    legs: HashMap<(LocationId, LocationId), Leg>,
    events: Vec<Event>,
    clock: u32,
}

impl ClientDay<'_> {
    fn leg(&mut self, from: LocationId, to: LocationId) -> Result<&Leg, ScenarioError> {
        if !self.legs.contains_key(&(from, to)) {
            let route = self.world.route(&[from, to])?;
            let seen = self.world.stations_seen(&route, self.config.sees_radius_miles)?;
            let minutes = ((route.length_miles / self.config.speed_mph) * 60.0).ceil().max(1.0) as u32;
            let sightings = seen
                .iter()
                .map(|s| {
                    let frac = if route.length_miles > 0.0 {
                        (s.position_miles / route.length_miles).clamp(0.0, 1.0)
                    } else {
                        0.0
                    };
                    (s.station, frac)
                })
                .collect();
            self.legs.insert(
                (from, to),
                Leg {
                    miles: route.length_miles,
                    minutes,
                    sightings,
                },
            );
        }
        Ok(&self.legs[&(from, to)])
    }

    fn push(&mut self, kind: EventKind, location: LocationId, timestamp: u32, distance: f64) {
        self.clock = self.clock.max(timestamp);
        self.events.push(Event {
            agent: self.profile.client,
            kind,
            location,
            timestamp: self.clock,
            distance,
        });
    }

    /// Emits Departs, Sees*, Arrives; returns the arrival time.
    fn trip(&mut self, from: LocationId, to: LocationId, depart: u32) -> Result<u32, ScenarioError> {
        let depart = depart.max(self.clock);
        let leg = self.leg(from, to)?;
        let (miles, minutes) = (leg.miles, leg.minutes);
        let sightings = leg.sightings.clone();
        self.push(EventKind::Departs, from, depart, 0.0);
        for (station, frac) in sightings {
            let t = depart + (f64::from(minutes) * frac).floor() as u32;
            self.push(EventKind::Sees, station, t, 0.0);
        }
        let arrive = depart + minutes;
        self.push(EventKind::Arrives, to, arrive, round_centi(miles));
        Ok(arrive)
    }

    fn day(&mut self, day: u32) -> Result<(), ScenarioError> {
        let base = day * MINUTES_PER_DAY;
        let kind = DayKind::of_day(day);
        let (home, work) = (self.profile.home, self.profile.workplace);
        if kind == DayKind::Weekday {
            let minutes = self.leg(home, work)?.minutes;
            let jitter = self.rng.random_range(0..=self.config.departure_jitter_min);
            let depart = (base + WORK_START_MIN).saturating_sub(minutes + jitter);
            self.trip(home, work, depart)?;
            let jitter = self.rng.random_range(0..=self.config.departure_jitter_min);
            self.trip(work, home, base + WORK_END_MIN + jitter)?;
        }
        for band in HourBand::ALL {
            let p = self.profile.propensity.get(kind, band);
            if p > 0.0 && self.rng.random_bool(p.min(1.0)) {
                let (start, end) = band.window();
                let offset = self.rng.random_range(0..(end - start) / 2);
                self.outing(kind, band, base + start + offset, base + end)?;
            }
        }
        Ok(())
    }

    fn outing(&mut self, day: DayKind, band: HourBand, start: u32, end: u32) -> Result<(), ScenarioError> {
        let home = self.profile.home;
        let mut here = home;
        let mut t = start.max(self.clock + 10);
        let mut stops = 0;
        loop {
            let weights = transition_weights(here.kind, here == home, day, band);
            let next = weights
                .choose_weighted(&mut self.rng, |w| w.1)
                .expect("positive transition weights")
                .0;
            let dest = match next {
                Destination::Home => None,
                Destination::Kind(kind) => {
                    let options: Vec<LocationId> = self
                        .world
                        .of_kind(kind)
                        .into_iter()
                        .filter(|&l| l != here && l != home)
                        .collect();
                    options.choose(&mut self.rng).copied()
                }
            };
            let Some(dest) = dest else {
                break;
            };
            t = self.trip(here, dest, t)?;
            t += self.rng.random_range(30..=90);
            here = dest;
            stops += 1;
            if stops >= self.config.max_outing_stops || t >= end {
                break;
            }
        }
        if here != home {
            self.trip(here, home, t)?;
        }
        Ok(())
    }
}

/// Rounds to hundredths so the 2-decimal text form is exact.
fn round_centi(miles: f64) -> f64 {
    (miles * 100.0).round() / 100.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{build_world, Location, Road, WorldConfig};

    fn id(s: &str) -> LocationId {
        s.parse().unwrap()
    }

    fn commute_world() -> World {
        // R1 -- STA1 -- W1 -- STA2 with STA2 off the commute.
        let locs = [("R1", 0.0), ("STA1", 2.0), ("W1", 5.0), ("STA2", 7.0)];
        let locations = locs.iter().map(|&(s, x)| Location { id: id(s), x, y: 0.0 }).collect();
        let roads = vec![
            Road {
                a: id("R1"),
                b: id("STA1"),
                miles: 2.0,
            },
            Road {
                a: id("STA1"),
                b: id("W1"),
                miles: 3.0,
            },
            Road {
                a: id("W1"),
                b: id("STA2"),
                miles: 2.0,
            },
        ];
        World::from_parts(locations, roads).unwrap()
    }

    fn lone_profile() -> ClientProfile {
        ClientProfile {
            client: ClientId(1),
            home: id("R1"),
            workplace: id("W1"),
            propensity: ActivityPropensity::zero(),
        }
    }

    #[test]
    fn minimal_weekday() {
        let w = commute_world();
        let cfg = ScenarioConfig::default();
        let t = generate_trace(&w, &[lone_profile()], 1, &cfg, 1).unwrap();
        let kinds: Vec<(EventKind, String)> = t.events.iter().map(|e| (e.kind, e.location.to_string())).collect();
        let expect = [
            (EventKind::Departs, "R1"),
            (EventKind::Sees, "STA1"),
            (EventKind::Arrives, "W1"),
            (EventKind::Departs, "W1"),
            (EventKind::Sees, "STA1"),
            (EventKind::Arrives, "R1"),
        ];
        assert_eq!(kinds.len(), expect.len());
        for (got, want) in kinds.iter().zip(expect) {
            assert_eq!((got.0, got.1.as_str()), want);
        }
        assert!(t.events[2].timestamp <= WORK_START_MIN);
        assert!(t.events[3].timestamp >= WORK_END_MIN);
        assert_eq!(t.events[2].distance, 5.0);
        assert_eq!(t.events[5].distance, 5.0);
        t.validate().unwrap();
    }

    #[test]
    fn saturday_without_propensity_is_quiet() {
        let w = commute_world();
        let t = generate_trace(&w, &[lone_profile()], 7, &ScenarioConfig::default(), 1).unwrap();
        assert!(t.events.iter().all(|e| DayKind::of_day(e.day()) == DayKind::Weekday));
        assert_eq!(t.count(EventKind::Arrives), 10);
    }

    #[test]
    fn forced_assignment() {
        let cfg = WorldConfig {
            work: 1,
            shopping: 0,
            residential: 1,
            stations: 1,
            ..WorldConfig::default()
        };
        let w = build_world(&cfg, 3).unwrap();
        let ps = generate_profiles(&w, 25, &ScenarioConfig::default(), 3).unwrap();
        assert!(ps.iter().all(|p| p.home == id("R1") && p.workplace == id("W1")));
    }

    #[test]
    fn profiles_need_homes_and_work() {
        let locations = vec![
            Location {
                id: id("R1"),
                x: 0.0,
                y: 0.0,
            },
            Location {
                id: id("STA1"),
                x: 1.0,
                y: 0.0,
            },
        ];
        let roads = vec![Road {
            a: id("R1"),
            b: id("STA1"),
            miles: 1.0,
        }];
        let w = World::from_parts(locations, roads).unwrap();
        assert_eq!(
            generate_profiles(&w, 1, &ScenarioConfig::default(), 0).unwrap_err(),
            ScenarioError::MissingKind(LocationKind::Work)
        );
    }

    #[test]
    fn transition_weights_are_distributions() {
        for kind in [LocationKind::Residential, LocationKind::Shopping] {
            for at_home in [true, false] {
                for day in [DayKind::Weekday, DayKind::Weekend] {
                    for band in HourBand::ALL {
                        let w = transition_weights(kind, at_home, day, band);
                        let total: f64 = w.iter().map(|x| x.1).sum();
                        assert!((total - 1.0).abs() < 1e-12);
                        assert!(w.iter().all(|x| x.1 >= 0.0));
                        assert!(w.iter().all(|x| x.0 != Destination::Kind(LocationKind::Work)));
                    }
                }
            }
        }
    }

    #[test]
    fn propensity_matches_weekly_mean() {
        let w = build_world(&WorldConfig::default(), 1).unwrap();
        let cfg = ScenarioConfig::default();
        let ps = generate_profiles(&w, 2000, &cfg, 1).unwrap();
        let mean = ps.iter().map(|p| p.propensity.weekly_mean()).sum::<f64>() / ps.len() as f64;
        assert!((mean - cfg.trips_per_week_mean).abs() < 0.1, "{mean}");
    }
}

//! Market orchestration: replays a baseline trace, injects refuel needs,
//! runs the trader interactions and keeps the books.

mod ledger;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::negotiation::{
    promotional_deal, run_negotiation, ClientStrategyState, DealContext, DealRecord, TraderStrategyState,
};
use crate::rng::{stream, Purpose};
use crate::scenario::{ClientId, ClientProfile, Event, EventKind, EventTrace};
use crate::vehicle::{self, best_station, default_station, quote_station, FuelState, VehicleError};
use crate::world::{LocationId, PriceTable, World, WorldError};

pub use ledger::{acquisition_cost_accrual, dropout_check, ClientLedger, DayTotals, DropoutParams, Ledger, Purchase};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MarketError {
    #[error("trace event for {0} who has no profile")]
    UnknownClient(ClientId),
    #[error("trace location {0} is not in the world")]
    UnknownLocation(LocationId),
    #[error("baseline trace already contains NEEDS events")]
    NeedsInBaseline,
    #[error("invalid market configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Vehicle(#[from] VehicleError),
    #[error(transparent)]
    World(#[from] WorldError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PricingMode {
    Dynamic,
    /// The trader opens every session at this amount.
    FixedInitial(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClientParams {
    pub initial_offer: f64,
    pub c_max: f64,
    pub delta: f64,
    pub history: usize,
    pub savings_window: usize,
    pub reservation_sigma: f64,
    /// Std dev of the value estimate reported during promotion.
    pub estimate_sigma: f64,
}

impl Default for ClientParams {
    fn default() -> Self {
        Self {
            initial_offer: 1.0,
            c_max: 5.0,
            delta: 0.25,
            history: 5,
            savings_window: 5,
            reservation_sigma: 1.0,
            estimate_sigma: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraderParams {
    /// Opening offer for clients that skip promotion.
    pub initial_offer: f64,
    pub u_s_min: f64,
    pub history: u32,
}

impl Default for TraderParams {
    fn default() -> Self {
        Self {
            initial_offer: 3.0,
            u_s_min: 0.10,
            history: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub pricing: PricingMode,
    pub promotions: u32,
    pub dropout: DropoutParams,
    /// $ per station per day.
    pub acquisition_cost_rate: f64,
    pub vehicle: FuelState,
    /// Largest detour the trader will suggest, miles.
    pub detour_radius: f64,
    pub sees_radius: f64,
    pub client: ClientParams,
    pub trader: TraderParams,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            pricing: PricingMode::Dynamic,
            promotions: 5,
            dropout: DropoutParams::default(),
            acquisition_cost_rate: 0.0,
            vehicle: FuelState::default(),
            detour_radius: 2.0,
            sees_radius: 0.25,
            client: ClientParams::default(),
            trader: TraderParams::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), MarketError> {
        let bad = |m: &str| Err(MarketError::InvalidConfig(m.into()));
        if let PricingMode::FixedInitial(f) = self.pricing {
            if !(f >= 0.0 && f.is_finite()) {
                return bad("fixed initial offer must be a finite amount >= 0");
            }
        }
        let v = &self.vehicle;
        if !(v.tank_capacity > 0.0 && v.mpg > 0.0 && v.low_threshold >= 0.0 && v.low_threshold < v.tank_capacity) {
            return bad("vehicle needs capacity > threshold >= 0 and mpg > 0");
        }
        if !(self.detour_radius >= 0.0 && self.sees_radius >= 0.0) {
            return bad("radii must be >= 0");
        }
        if !(self.acquisition_cost_rate >= 0.0) {
            return bad("acquisition cost rate must be >= 0");
        }
        let c = &self.client;
        if !(c.delta > 0.0 && c.delta <= 0.5) {
            return bad("client concession rate must lie in (0, 0.5]");
        }
        if c.history == 0 || c.savings_window == 0 || self.trader.history == 0 {
            return bad("history windows must be >= 1");
        }
        if !(c.initial_offer >= 0.0 && c.c_max >= 0.0) {
            return bad("client offers and caps must be >= 0");
        }
        if !(c.reservation_sigma >= 0.0 && c.estimate_sigma >= 0.0) {
            return bad("noise levels must be >= 0");
        }
        if !(self.trader.u_s_min >= 0.0 && self.trader.initial_offer >= 0.0) {
            return bad("trader offers must be >= 0");
        }
        if self.dropout.window == 0 {
            return bad("dropout window must be >= 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub ledger: Ledger,
    /// Baseline trace with the injected NEEDS events.
    pub trace: EventTrace,
    /// Interactions with the trader, ordered by day then client.
    pub deals: Vec<DealRecord>,
}

struct ClientRun {
    ledger: ClientLedger,
    events: Vec<Event>,
    deals: Vec<DealRecord>,
}

/// Replays `trace` for every profile and returns books, augmented trace and
/// deal records. Deterministic for fixed inputs and seed; clients are
/// independent and replayed in parallel.
pub fn run_simulation(
    world: &World,
    trace: &EventTrace,
    profiles: &[ClientProfile],
    prices: &PriceTable,
    config: &SimConfig,
    seed: u64,
) -> Result<SimOutput, MarketError> {
    config.validate()?;
    let mut order: Vec<ClientId> = profiles.iter().map(|p| p.client).collect();
    order.sort_unstable();
    order.dedup();
    let mut per_client: Vec<Vec<Event>> = vec![Vec::new(); order.len()];
    for e in &trace.events {
        if e.kind == EventKind::Needs {
            return Err(MarketError::NeedsInBaseline);
        }
        if !world.contains(e.location) {
            return Err(MarketError::UnknownLocation(e.location));
        }
        let slot = order
            .binary_search(&e.agent)
            .map_err(|_| MarketError::UnknownClient(e.agent))?;
        per_client[slot].push(*e);
    }

    let runs: Vec<ClientRun> = order
        .par_iter()
        .zip(per_client.into_par_iter())
        .map(|(&client, events)| replay_client(world, prices, config, seed, client, events))
        .collect::<Result<_, _>>()?;

    let horizon = prices.horizon_days();
    let mut daily = vec![DayTotals::default(); horizon];
    let mut clients = Vec::with_capacity(runs.len());
    let mut streams = Vec::with_capacity(runs.len());
    let mut deals = Vec::new();
    let (mut income, mut paid) = (0.0, 0u32);
    for run in runs {
        for d in &run.deals {
            let day = &mut daily[d.day as usize];
            if d.success {
                day.income += d.price;
                day.savings += d.savings;
                if !d.promotional {
                    day.deals += 1;
                }
                if d.price > 0.0 {
                    income += d.price;
                    paid += 1;
                }
            } else {
                day.conflicts += 1;
            }
        }
        clients.push(run.ledger);
        streams.push(run.events);
        deals.extend(run.deals);
    }
    deals.sort_by_key(|d| (d.day, d.client));
    let ledger = Ledger {
        clients,
        income,
        acquisition_cost: acquisition_cost_accrual(config.acquisition_cost_rate, prices.stations().len(), horizon),
        deals: paid,
        daily,
    };
    Ok(SimOutput {
        ledger,
        trace: EventTrace::from_agent_streams(streams),
        deals,
    })
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample::<f64, _>(StandardNormal)
}

/// Where a client at `here` goes next: the destination of its next trip.
fn next_destinations(events: &[Event]) -> Vec<Option<LocationId>> {
    let mut next = vec![None; events.len()];
    let mut upcoming = None;
    for (i, e) in events.iter().enumerate().rev() {
        next[i] = upcoming;
        if e.kind == EventKind::Arrives {
            upcoming = Some(e.location);
        }
    }
    next
}

fn replay_client(
    world: &World,
    prices: &PriceTable,
    config: &SimConfig,
    seed: u64,
    client: ClientId,
    events: Vec<Event>,
) -> Result<ClientRun, MarketError> {
    let mut fuel_rng = stream(seed, Purpose::Market, 2 * u64::from(client.0));
    let mut rng = stream(seed, Purpose::Market, 2 * u64::from(client.0) + 1);
    let v = config.vehicle;
    let mut state = v.with_fuel(fuel_rng.random_range(v.low_threshold..=v.tank_capacity));
    let mut ledger = ClientLedger::new(client, state.fuel);

    let cp = &config.client;
    let mut strategy = ClientStrategyState::new(cp.initial_offer, cp.c_max, cp.delta, cp.history);
    strategy.savings_window = cp.savings_window;
    strategy.reservation_sigma = cp.reservation_sigma;
    let tp = &config.trader;
    let mut trader = TraderStrategyState::new(tp.initial_offer, tp.u_s_min, tp.history, config.promotions);
    let mut purchases: Vec<Purchase> = Vec::new();

    let next = next_destinations(&events);
    let mut out = Vec::with_capacity(events.len() + events.len() / 20);
    let mut deals = Vec::new();
    for (i, e) in events.into_iter().enumerate() {
        let arrival = e.kind == EventKind::Arrives;
        let (here, ts) = (e.location, e.timestamp);
        if arrival {
            let before = state.fuel;
            state = state.consume(e.distance);
            ledger.fuel_consumed += before - state.fuel;
        }
        out.push(e);
        if !(arrival && state.needs_refuel()) {
            continue;
        }

        out.push(Event {
            agent: client,
            kind: EventKind::Needs,
            location: here,
            timestamp: ts,
            distance: 0.0,
        });
        ledger.needs += 1;
        let day = ts / crate::scenario::MINUTES_PER_DAY;
        let waypoints: Vec<LocationId> = match next[i] {
            Some(dest) => vec![here, dest],
            None => vec![here],
        };
        let route = world.route(&waypoints)?;
        let default = match default_station(&route, world, config.sees_radius) {
            Ok(s) => s,
            Err(VehicleError::NoStationOnPath) => {
                ledger.fallback_refuels += 1;
                world.nearest_station(here)?.0
            }
            Err(err) => return Err(err.into()),
        };
        let default_quote = quote_station(&route, world, prices, day as usize, &state, default)?;
        let best_quote = match best_station(
            &route,
            world,
            prices,
            day as usize,
            &state,
            config.detour_radius,
            config.sees_radius,
        ) {
            Err(VehicleError::NoStationOnPath) => default_quote,
            other => other?,
        };
        let realized = vehicle::savings(&default_quote, &best_quote);
        let ctx = DealContext { client, day };

        let record = if trader.in_promotion() {
            ledger.promotions += 1;
            strategy.initial_offer();
            strategy.reservation(normal(&mut rng));
            let noise = normal(&mut rng) * cp.estimate_sigma;
            Some(promotional_deal(&mut strategy, &mut trader, ctx, realized, noise).expect("promotion active"))
        } else {
            ledger.attempts += 1;
            if ledger.dropout_day.is_some() {
                None
            } else {
                let mut record = match config.pricing {
                    PricingMode::FixedInitial(f) if f == 0.0 => DealRecord {
                        client,
                        day,
                        price: 0.0,
                        savings: 0.0,
                        promotional: false,
                        success: true,
                        rounds: 0,
                        reservation: strategy.u_max,
                    },
                    PricingMode::FixedInitial(f) => {
                        strategy.initial_offer();
                        strategy.reservation(normal(&mut rng));
                        let mut fixed = TraderStrategyState::fixed(f);
                        run_negotiation(&mut strategy, &mut fixed, ctx).1
                    }
                    PricingMode::Dynamic => {
                        strategy.initial_offer();
                        strategy.reservation(normal(&mut rng));
                        trader.initial_offer();
                        run_negotiation(&mut strategy, &mut trader, ctx).1
                    }
                };
                if record.success {
                    ledger.deals += 1;
                    record.savings = realized;
                    strategy.record_savings(realized);
                    if record.price > 0.0 {
                        ledger.purchases += 1;
                        ledger.payments += record.price;
                        purchases.push(Purchase {
                            day,
                            payment: record.price,
                            savings: realized,
                        });
                        if dropout_check(&purchases, &config.dropout) {
                            ledger.dropout_day = Some(day);
                        }
                    }
                } else {
                    ledger.conflicts += 1;
                }
                Some(record)
            }
        };

        if let Some(r) = record.filter(|r| r.success) {
            ledger.gross_savings += r.savings;
        }
        if let Some(r) = record {
            deals.push(r);
        }
        // Detour fuel is paid for in the quote but not tracked in the tank.
        ledger.fuel_purchased += state.gallons_to_fill();
        state = state.refilled();
    }
    ledger.final_fuel = state.fuel;
    Ok(ClientRun {
        ledger,
        events: out,
        deals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn next_destination_skips_to_following_trip() {
        let id = |s: &str| s.parse::<LocationId>().unwrap();
        let ev = |kind, loc: &str| Event {
            agent: ClientId(1),
            kind,
            location: id(loc),
            timestamp: 0,
            distance: 0.0,
        };
        let events = vec![
            ev(EventKind::Departs, "R1"),
            ev(EventKind::Arrives, "W1"),
            ev(EventKind::Departs, "W1"),
            ev(EventKind::Sees, "STA1"),
            ev(EventKind::Arrives, "R1"),
        ];
        let next = next_destinations(&events);
        assert_eq!(next[1], Some(id("R1")));
        assert_eq!(next[4], None);
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::default().validate().is_ok());
        let c = SimConfig {
            pricing: PricingMode::FixedInitial(-1.0),
            ..SimConfig::default()
        };
        assert!(c.validate().is_err());
    }
}

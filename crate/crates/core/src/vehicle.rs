//! Fuel accounting and refuelling choices.

use thiserror::Error;

use crate::world::{LocationId, PriceTable, Route, World, WorldError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VehicleError {
    #[error("no station within sight of the remaining route")]
    NoStationOnPath,
    #[error(transparent)]
    World(#[from] WorldError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuelState {
    pub tank_capacity: f64,
    pub fuel: f64,
    pub mpg: f64,
    pub low_threshold: f64,
}

impl Default for FuelState {
    fn default() -> Self {
        Self {
            tank_capacity: 15.0,
            fuel: 15.0,
            mpg: 25.0,
            low_threshold: 2.0,
        }
    }
}

impl FuelState {
    pub fn with_fuel(self, fuel: f64) -> Self {
        Self {
            fuel: fuel.clamp(0.0, self.tank_capacity),
            ..self
        }
    }

    /// Burns fuel for `distance` miles; an empty tank stays at zero.
    pub fn consume(self, distance: f64) -> Self {
        Self {
            fuel: (self.fuel - distance / self.mpg).max(0.0),
            ..self
        }
    }

    pub fn needs_refuel(&self) -> bool {
        self.fuel < self.low_threshold
    }

    pub fn gallons_to_fill(&self) -> f64 {
        (self.tank_capacity - self.fuel).max(0.0)
    }

    pub fn refilled(self) -> Self {
        Self {
            fuel: self.tank_capacity,
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefuelQuote {
    pub station: LocationId,
    pub unit_price: f64,
    pub detour_miles: f64,
    pub gallons: f64,
    pub total_cost: f64,
}

impl RefuelQuote {
    /// Detour fuel is charged at the station's own unit price.
    pub fn new(station: LocationId, unit_price: f64, detour_miles: f64, state: &FuelState) -> Self {
        let gallons = state.gallons_to_fill();
        Self {
            station,
            unit_price,
            detour_miles,
            gallons,
            total_cost: gallons * unit_price + detour_miles / state.mpg * unit_price,
        }
    }
}

/// First station within `sees_radius` of the remaining route, in travel order.
pub fn default_station(route: &Route, world: &World, sees_radius: f64) -> Result<LocationId, VehicleError> {
    world
        .stations_seen(route, sees_radius)?
        .first()
        .map(|s| s.station)
        .ok_or(VehicleError::NoStationOnPath)
}

pub fn quote_station(
    route: &Route,
    world: &World,
    prices: &PriceTable,
    day: usize,
    state: &FuelState,
    station: LocationId,
) -> Result<RefuelQuote, VehicleError> {
    let detour = world.insertion_detour(route, station)?.detour_miles;
    let price = prices.price_at(station, day)?;
    Ok(RefuelQuote::new(station, price, detour, state))
}

fn quote_order(a: &RefuelQuote, b: &RefuelQuote) -> std::cmp::Ordering {
    a.total_cost
        .total_cmp(&b.total_cost)
        .then(a.detour_miles.total_cmp(&b.detour_miles))
        .then(a.station.cmp(&b.station))
}

/// Cheapest refuel among stations within `detour_radius` of the route,
/// falling back to the default station when none qualify.
pub fn best_station(
    route: &Route,
    world: &World,
    prices: &PriceTable,
    day: usize,
    state: &FuelState,
    detour_radius: f64,
    sees_radius: f64,
) -> Result<RefuelQuote, VehicleError> {
    let candidates = world.stations_near_path(route, detour_radius)?;
    if candidates.is_empty() {
        let station = default_station(route, world, sees_radius)?;
        return quote_station(route, world, prices, day, state, station);
    }
    let mut best: Option<RefuelQuote> = None;
    for near in candidates {
        let price = prices.price_at(near.station, day)?;
        let quote = RefuelQuote::new(near.station, price, near.detour_miles, state);
        if best.is_none_or(|b| quote_order(&quote, &b).is_lt()) {
            best = Some(quote);
        }
    }
    Ok(best.expect("non-empty candidates"))
}

/// Money saved by following the best quote instead of the default one.
pub fn savings(default_quote: &RefuelQuote, best_quote: &RefuelQuote) -> f64 {
    if default_quote.station == best_quote.station {
        return 0.0;
    }
    (default_quote.total_cost - best_quote.total_cost).max(0.0)
}

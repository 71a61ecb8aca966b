//! Line-oriented run configuration: `key = value`, `#` comments.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::market::{PricingMode, SimConfig};
use crate::scenario::ScenarioConfig;
use crate::world::{load_base_curve_csv, BaseCurve, PriceParams, WorldConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value for `{key}`: {reason}")]
    BadValue { line: usize, key: String, reason: String },
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub world: WorldConfig,
    pub scenario: ScenarioConfig,
    pub prices: PriceParams,
    pub market: SimConfig,
    pub clients: u32,
    pub days: u32,
    pub replications: u32,
    /// Fixed initial offers swept by the elasticity and profit experiments.
    pub offers: Vec<f64>,
    pub bin_width: f64,
    /// Base price curve file, resolved against the config file's directory.
    pub base_curve_csv: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            world: WorldConfig::default(),
            scenario: ScenarioConfig::default(),
            prices: PriceParams::default(),
            market: SimConfig::default(),
            clients: 300,
            days: 365,
            replications: 10,
            offers: (0..=14).map(|i| f64::from(i) * 0.5).collect(),
            bin_width: 0.25,
            base_curve_csv: None,
        }
    }
}

/// Every recognised key.
pub const KEYS: &[&str] = &[
    "world.work",
    "world.shopping",
    "world.residential",
    "world.stations",
    "world.width_miles",
    "world.height_miles",
    "world.k_nearest",
    "scenario.clients",
    "scenario.days",
    "scenario.trips_per_week_mean",
    "scenario.weekend_share",
    "scenario.sees_radius_miles",
    "scenario.speed_mph",
    "scenario.departure_jitter_min",
    "scenario.max_outing_stops",
    "prices.start",
    "prices.daily_sigma",
    "prices.min",
    "prices.max",
    "prices.base_curve_csv",
    "prices.variance_scale",
    "prices.spatial_sigma",
    "prices.noise_sigma",
    "prices.floor",
    "vehicle.tank_gallons",
    "vehicle.mpg",
    "vehicle.low_threshold",
    "market.pricing",
    "market.promotions",
    "market.dropout",
    "market.dropout_window",
    "market.useless_run",
    "market.acquisition_cost_rate",
    "market.detour_radius",
    "client.initial_offer",
    "client.c_max",
    "client.delta",
    "client.history",
    "client.savings_window",
    "client.reservation_sigma",
    "client.estimate_sigma",
    "trader.initial_offer",
    "trader.u_s_min",
    "trader.history",
    "experiment.replications",
    "experiment.offers",
    "experiment.bin_width",
];

fn num<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| ConfigError::BadValue {
        line,
        key: key.to_string(),
        reason: e.to_string(),
    })
}

fn walk_field(base: &mut BaseCurve) -> (&mut f64, &mut f64, &mut f64, &mut f64) {
    if !matches!(base, BaseCurve::RandomWalk { .. }) {
        *base = PriceParams::default().base;
    }
    match base {
        BaseCurve::RandomWalk {
            start,
            daily_sigma,
            min,
            max,
        } => (start, daily_sigma, min, max),
        BaseCurve::Imported(_) => unreachable!(),
    }
}

impl Config {
    /// Parses configuration text on top of the defaults. The base curve file,
    /// if named, is recorded but not read; see [`Config::load`].
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut c = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                reason: "expected `key = value`".into(),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if value.is_empty() {
                return Err(ConfigError::BadValue {
                    line,
                    key: key.into(),
                    reason: "empty value".into(),
                });
            }
            c.set(key, value, line)?;
        }
        c.check()?;
        Ok(c)
    }

    /// Reads and parses a config file, then loads any base curve it names.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let io = |p: &Path, e: &dyn std::fmt::Display| ConfigError::Io {
            path: p.display().to_string(),
            reason: e.to_string(),
        };
        let text = std::fs::read_to_string(path).map_err(|e| io(path, &e))?;
        let mut c = Self::parse(&text)?;
        if let Some(rel) = c.base_curve_csv.clone() {
            let full = path.parent().unwrap_or(Path::new(".")).join(rel);
            let file = std::fs::File::open(&full).map_err(|e| io(&full, &e))?;
            let curve = load_base_curve_csv(file).map_err(|e| io(&full, &e))?;
            c.prices.base = BaseCurve::Imported(curve);
            c.base_curve_csv = Some(full);
        }
        Ok(c)
    }

    fn set(&mut self, key: &str, v: &str, line: usize) -> Result<(), ConfigError> {
        let bad = |reason: &str| ConfigError::BadValue {
            line,
            key: key.into(),
            reason: reason.into(),
        };
        match key {
            "world.work" => self.world.work = num(key, v, line)?,
            "world.shopping" => self.world.shopping = num(key, v, line)?,
            "world.residential" => self.world.residential = num(key, v, line)?,
            "world.stations" => self.world.stations = num(key, v, line)?,
            "world.width_miles" => self.world.width_miles = num(key, v, line)?,
            "world.height_miles" => self.world.height_miles = num(key, v, line)?,
            "world.k_nearest" => self.world.k_nearest = num(key, v, line)?,
            "scenario.clients" => self.clients = num(key, v, line)?,
            "scenario.days" => self.days = num(key, v, line)?,
            "scenario.trips_per_week_mean" => self.scenario.trips_per_week_mean = num(key, v, line)?,
            "scenario.weekend_share" => self.scenario.weekend_share = num(key, v, line)?,
            "scenario.sees_radius_miles" => {
                self.scenario.sees_radius_miles = num(key, v, line)?;
                self.market.sees_radius = self.scenario.sees_radius_miles;
            }
            "scenario.speed_mph" => self.scenario.speed_mph = num(key, v, line)?,
            "scenario.departure_jitter_min" => self.scenario.departure_jitter_min = num(key, v, line)?,
            "scenario.max_outing_stops" => self.scenario.max_outing_stops = num(key, v, line)?,
            "prices.start" => *walk_field(&mut self.prices.base).0 = num(key, v, line)?,
            "prices.daily_sigma" => *walk_field(&mut self.prices.base).1 = num(key, v, line)?,
            "prices.min" => *walk_field(&mut self.prices.base).2 = num(key, v, line)?,
            "prices.max" => *walk_field(&mut self.prices.base).3 = num(key, v, line)?,
            "prices.base_curve_csv" => self.base_curve_csv = Some(PathBuf::from(v)),
            "prices.variance_scale" => self.prices.variance_scale = num(key, v, line)?,
            "prices.spatial_sigma" => self.prices.spatial_sigma = num(key, v, line)?,
            "prices.noise_sigma" => self.prices.noise_sigma = num(key, v, line)?,
            "prices.floor" => self.prices.price_floor = num(key, v, line)?,
            "vehicle.tank_gallons" => {
                let cap: f64 = num(key, v, line)?;
                self.market.vehicle.tank_capacity = cap;
                self.market.vehicle.fuel = cap;
            }
            "vehicle.mpg" => self.market.vehicle.mpg = num(key, v, line)?,
            "vehicle.low_threshold" => self.market.vehicle.low_threshold = num(key, v, line)?,
            "market.pricing" => {
                self.market.pricing = match v {
                    "dynamic" => PricingMode::Dynamic,
                    other => PricingMode::FixedInitial(
                        num::<f64>(key, other, line).map_err(|_| bad("expected `dynamic` or an amount"))?,
                    ),
                }
            }
            "market.promotions" => self.market.promotions = num(key, v, line)?,
            "market.dropout" => self.market.dropout.enabled = num(key, v, line)?,
            "market.dropout_window" => self.market.dropout.window = num(key, v, line)?,
            "market.useless_run" => self.market.dropout.useless_run = num(key, v, line)?,
            "market.acquisition_cost_rate" => self.market.acquisition_cost_rate = num(key, v, line)?,
            "market.detour_radius" => self.market.detour_radius = num(key, v, line)?,
            "client.initial_offer" => self.market.client.initial_offer = num(key, v, line)?,
            "client.c_max" => self.market.client.c_max = num(key, v, line)?,
            "client.delta" => self.market.client.delta = num(key, v, line)?,
            "client.history" => self.market.client.history = num(key, v, line)?,
            "client.savings_window" => self.market.client.savings_window = num(key, v, line)?,
            "client.reservation_sigma" => self.market.client.reservation_sigma = num(key, v, line)?,
            "client.estimate_sigma" => self.market.client.estimate_sigma = num(key, v, line)?,
            "trader.initial_offer" => self.market.trader.initial_offer = num(key, v, line)?,
            "trader.u_s_min" => self.market.trader.u_s_min = num(key, v, line)?,
            "trader.history" => self.market.trader.history = num(key, v, line)?,
            "experiment.replications" => self.replications = num(key, v, line)?,
            "experiment.offers" => {
                self.offers = v
                    .split(',')
                    .map(|s| num::<f64>(key, s.trim(), line))
                    .collect::<Result<_, _>>()?;
            }
            "experiment.bin_width" => self.bin_width = num(key, v, line)?,
            _ => return Err(ConfigError::UnknownKey { line, key: key.into() }),
        }
        Ok(())
    }

    fn check(&self) -> Result<(), ConfigError> {
        let fail = |key: &str, reason: &str| {
            Err(ConfigError::BadValue {
                line: 0,
                key: key.into(),
                reason: reason.into(),
            })
        };
        if self.replications == 0 {
            return fail("experiment.replications", "must be >= 1");
        }
        if self.offers.iter().any(|o| !(*o >= 0.0 && o.is_finite())) {
            return fail("experiment.offers", "offers must be finite and >= 0");
        }
        if !(self.bin_width > 0.0) {
            return fail("experiment.bin_width", "must be > 0");
        }
        if self.days == 0 {
            return fail("scenario.days", "must be >= 1");
        }
        Ok(())
    }
}

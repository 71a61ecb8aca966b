//! Spatio-temporal gas price field.
//!
//! Realized prices are `max(floor, b_t + λ·o_s + ε_{s,t})`: a shared daily
//! base curve, a fixed per-station offset scaled by the variance factor λ,
//! and independent Gaussian noise. All draws happen once at generation.

use std::collections::HashMap;
use std::io::Read;

use rand::Rng;
use rand_distr::StandardNormal;

use super::{LocationId, WorldError};
use crate::rng::{self, Purpose};

#[derive(Debug, Clone, PartialEq)]
pub enum BaseCurve {
    /// Clipped Gaussian random walk starting at `start`.
    RandomWalk {
        start: f64,
        daily_sigma: f64,
        min: f64,
        max: f64,
    },
    /// Explicit $/gal per day, e.g. from [`load_base_curve_csv`].
    Imported(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriceParams {
    pub base: BaseCurve,
    /// λ, multiplies the per-station offsets.
    pub variance_scale: f64,
    /// Std dev of the per-station offsets before scaling ($/gal).
    pub spatial_sigma: f64,
    /// Std dev of the daily per-station noise ($/gal).
    pub noise_sigma: f64,
    pub price_floor: f64,
}

impl Default for PriceParams {
    fn default() -> Self {
        Self {
            base: BaseCurve::RandomWalk {
                start: 2.60,
                daily_sigma: 0.02,
                min: 1.50,
                max: 4.50,
            },
            variance_scale: 1.0,
            spatial_sigma: 0.05,
            noise_sigma: 0.0,
            price_floor: 1.00,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriceTable {
    stations: Vec<LocationId>,
    index: HashMap<LocationId, usize>,
    horizon: usize,
    base: Vec<f64>,
    offsets: Vec<f64>,
    variance_scale: f64,
    noise: Vec<f64>,
    realized: Vec<f64>,
}

impl PriceTable {
    /// Wraps explicit prices, laid out station-major (`horizon` per station).
    /// Offsets and noise are recorded as zero.
    pub fn from_rows(stations: &[LocationId], horizon: usize, realized: Vec<f64>) -> Result<Self, WorldError> {
        if horizon == 0 || realized.len() != stations.len() * horizon {
            return Err(WorldError::Prices(
                "price matrix does not match stations x horizon".into(),
            ));
        }
        if realized.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
            return Err(WorldError::Prices("prices must be finite and non-negative".into()));
        }
        let base = (0..horizon)
            .map(|d| {
                let col = (0..stations.len()).map(|s| realized[s * horizon + d]);
                col.sum::<f64>() / stations.len().max(1) as f64
            })
            .collect();
        Ok(Self {
            stations: stations.to_vec(),
            index: stations.iter().enumerate().map(|(i, s)| (*s, i)).collect(),
            horizon,
            base,
            offsets: vec![0.0; stations.len()],
            variance_scale: 0.0,
            noise: vec![0.0; realized.len()],
            realized,
        })
    }

    pub fn horizon_days(&self) -> usize {
        self.horizon
    }

    pub fn stations(&self) -> &[LocationId] {
        &self.stations
    }

    pub fn base_curve(&self) -> &[f64] {
        &self.base
    }

    pub fn variance_scale(&self) -> f64 {
        self.variance_scale
    }

    fn station_idx(&self, station: LocationId) -> Result<usize, WorldError> {
        self.index
            .get(&station)
            .copied()
            .ok_or(WorldError::UnknownLocation(station))
    }

    fn check_day(&self, day: usize) -> Result<(), WorldError> {
        if day >= self.horizon {
            return Err(WorldError::DayOutOfHorizon {
                day,
                horizon: self.horizon,
            });
        }
        Ok(())
    }

    /// Unscaled spatial offset o_s.
    pub fn offset(&self, station: LocationId) -> Result<f64, WorldError> {
        Ok(self.offsets[self.station_idx(station)?])
    }

    /// The noise draw ε for (station, day).
    pub fn noise(&self, station: LocationId, day: usize) -> Result<f64, WorldError> {
        self.check_day(day)?;
        Ok(self.noise[self.station_idx(station)? * self.horizon + day])
    }

    pub fn price_at(&self, station: LocationId, day: usize) -> Result<f64, WorldError> {
        self.check_day(day)?;
        Ok(self.realized[self.station_idx(station)? * self.horizon + day])
    }

    /// All station prices for one day, in station order.
    pub fn day_prices(&self, day: usize) -> Result<Vec<f64>, WorldError> {
        self.check_day(day)?;
        Ok((0..self.stations.len())
            .map(|s| self.realized[s * self.horizon + day])
            .collect())
    }
}

pub fn generate_prices(
    stations: &[LocationId],
    horizon_days: usize,
    params: &PriceParams,
    seed: u64,
) -> Result<PriceTable, WorldError> {
    if horizon_days == 0 {
        return Err(WorldError::Prices("horizon must be at least one day".into()));
    }
    if !(params.variance_scale >= 0.0 && params.noise_sigma >= 0.0 && params.spatial_sigma >= 0.0) {
        return Err(WorldError::Prices("scales and sigmas must be non-negative".into()));
    }
    let base = match &params.base {
        BaseCurve::Imported(curve) => {
            if curve.len() < horizon_days {
                return Err(WorldError::Prices(format!(
                    "base curve covers {} days, horizon is {horizon_days}",
                    curve.len()
                )));
            }
            if let Some(day) = curve.iter().position(|p| !(*p > 0.0)) {
                return Err(WorldError::Prices(format!("non-positive base price on day {day}")));
            }
            curve[..horizon_days].to_vec()
        }
        &BaseCurve::RandomWalk {
            start,
            daily_sigma,
            min,
            max,
        } => {
            let mut rng = rng::stream(seed, Purpose::Prices, 0);
            let mut curve = Vec::with_capacity(horizon_days);
            let mut level = start.clamp(min, max);
            curve.push(level);
            for _ in 1..horizon_days {
                let step: f64 = rng.sample(StandardNormal);
                level = (level + step * daily_sigma).clamp(min, max);
                curve.push(level);
            }
            curve
        }
    };

    let mut offset_rng = rng::stream(seed, Purpose::Prices, 1);
    let offsets: Vec<f64> = stations
        .iter()
        .map(|_| offset_rng.sample::<f64, _>(StandardNormal) * params.spatial_sigma)
        .collect();

    let mut noise_rng = rng::stream(seed, Purpose::Prices, 2);
    let mut noise = Vec::with_capacity(stations.len() * horizon_days);
    let mut realized = Vec::with_capacity(stations.len() * horizon_days);
    for &offset in &offsets {
        for &b in &base {
            let eps = noise_rng.sample::<f64, _>(StandardNormal) * params.noise_sigma;
            noise.push(eps);
            realized.push((b + params.variance_scale * offset + eps).max(params.price_floor));
        }
    }

    let index = stations.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    Ok(PriceTable {
        stations: stations.to_vec(),
        index,
        horizon: horizon_days,
        base,
        offsets,
        variance_scale: params.variance_scale,
        noise,
        realized,
    })
}

/// Reads a `day,price` CSV with contiguous 0-based days.
pub fn load_base_curve_csv<R: Read>(reader: R) -> Result<Vec<f64>, WorldError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| WorldError::Prices(e.to_string()))?.clone();
    if headers.len() != 2 || &headers[0] != "day" || &headers[1] != "price" {
        return Err(WorldError::Prices("expected header `day,price`".into()));
    }
    let mut curve = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| WorldError::Import {
            line,
            reason: e.to_string(),
        })?;
        let bad = |what: &str| WorldError::Import {
            line,
            reason: what.to_string(),
        };
        let day: usize = record[0].parse().map_err(|_| bad("bad day"))?;
        let price: f64 = record[1].parse().map_err(|_| bad("bad price"))?;
        if day != curve.len() {
            return Err(bad(&format!("expected day {}, found {day}", curve.len())));
        }
        if !(price > 0.0 && price.is_finite()) {
            return Err(bad("price must be positive"));
        }
        curve.push(price);
    }
    if curve.is_empty() {
        return Err(WorldError::Prices("base curve is empty".into()));
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::LocationKind;

    fn stations(n: u32) -> Vec<LocationId> {
        (1..=n).map(|i| LocationId::new(LocationKind::Station, i)).collect()
    }

    fn flat(start: f64) -> BaseCurve {
        BaseCurve::RandomWalk {
            start,
            daily_sigma: 0.0,
            min: 0.0,
            max: 10.0,
        }
    }

    #[test]
    fn degenerate_variance_shares_base_curve() {
        let params = PriceParams {
            variance_scale: 0.0,
            noise_sigma: 0.0,
            base: flat(2.50),
            ..PriceParams::default()
        };
        let t = generate_prices(&stations(4), 10, &params, 3).unwrap();
        for s in stations(4) {
            for d in 0..10 {
                assert_eq!(t.price_at(s, d).unwrap(), 2.50);
            }
        }
    }

    #[test]
    fn lookups_are_immutable_and_bounded() {
        let params = PriceParams {
            noise_sigma: 2.0,
            ..PriceParams::default()
        };
        let t = generate_prices(&stations(5), 30, &params, 9).unwrap();
        let s = stations(5)[2];
        assert_eq!(t.price_at(s, 7).unwrap(), t.price_at(s, 7).unwrap());
        for s in stations(5) {
            for d in 0..30 {
                assert!(t.price_at(s, d).unwrap() >= params.price_floor);
            }
        }
        assert!(matches!(t.price_at(s, 30), Err(WorldError::DayOutOfHorizon { .. })));
        let unknown = LocationId::new(LocationKind::Station, 99);
        assert!(t.price_at(unknown, 0).is_err());
    }

    #[test]
    fn imported_curve_must_cover_horizon() {
        let params = PriceParams {
            base: BaseCurve::Imported(vec![2.0; 5]),
            ..PriceParams::default()
        };
        assert!(generate_prices(&stations(2), 6, &params, 1).is_err());
        assert!(generate_prices(&stations(2), 5, &params, 1).is_ok());
        let bad = PriceParams {
            base: BaseCurve::Imported(vec![2.0, 0.0]),
            ..PriceParams::default()
        };
        assert!(generate_prices(&stations(2), 2, &bad, 1).is_err());
    }

    #[test]
    fn csv_import() {
        let curve = load_base_curve_csv("day,price\n0,2.5\n1,2.612\n".as_bytes()).unwrap();
        assert_eq!(curve, vec![2.5, 2.612]);
        assert!(load_base_curve_csv("day,price\n0,2.5\n2,2.6\n".as_bytes()).is_err());
        assert!(load_base_curve_csv("day,price\n0,-1\n".as_bytes()).is_err());
        assert!(load_base_curve_csv("d,p\n0,2\n".as_bytes()).is_err());
        assert!(load_base_curve_csv("day,price\n".as_bytes()).is_err());
    }

    #[test]
    fn random_walk_stays_clipped() {
        let params = PriceParams {
            base: BaseCurve::RandomWalk {
                start: 2.0,
                daily_sigma: 0.5,
                min: 1.8,
                max: 2.2,
            },
            ..PriceParams::default()
        };
        let t = generate_prices(&stations(1), 200, &params, 4).unwrap();
        assert!(t.base_curve().iter().all(|b| (1.8..=2.2).contains(b)));
    }
}

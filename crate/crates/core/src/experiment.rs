//! The three market experiments: dynamic-pricing deal histogram, price
//! elasticity under fixed offers, and fixed-versus-dynamic profit.

use rayon::prelude::*;
use thiserror::Error;

use crate::config::Config;
use crate::market::{run_simulation, MarketError, PricingMode, SimOutput};
use crate::scenario::{generate_profiles, generate_trace, ClientProfile, EventTrace, ScenarioError};
use crate::world::{build_world, generate_prices, PriceTable, World, WorldError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Market(#[from] MarketError),
}

/// Everything a market run consumes, generated from one seed.
#[derive(Debug, Clone)]
pub struct Setup {
    pub world: World,
    pub profiles: Vec<ClientProfile>,
    pub trace: EventTrace,
    pub prices: PriceTable,
}

pub fn prepare(config: &Config, seed: u64) -> Result<Setup, ExperimentError> {
    let world = build_world(&config.world, seed)?;
    let profiles = generate_profiles(&world, config.clients, &config.scenario, seed)?;
    let trace = generate_trace(&world, &profiles, config.days, &config.scenario, seed)?;
    let prices = generate_prices(&world.station_ids(), config.days as usize, &config.prices, seed)?;
    Ok(Setup {
        world,
        profiles,
        trace,
        prices,
    })
}

pub fn simulate(setup: &Setup, config: &Config, pricing: PricingMode, seed: u64) -> Result<SimOutput, ExperimentError> {
    let mut market = config.market.clone();
    market.pricing = pricing;
    Ok(run_simulation(
        &setup.world,
        &setup.trace,
        &setup.profiles,
        &setup.prices,
        &market,
        seed,
    )?)
}

/// Seeds `base, base + 1, …` for `n` replications.
pub fn replication_seeds(base: u64, n: u32) -> Vec<u64> {
    (0..u64::from(n)).map(|i| base.wrapping_add(i)).collect()
}

/// Fixed-width histogram of deal prices, bins starting at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_width: f64,
    pub counts: Vec<u64>,
    pub mean: f64,
    pub median: f64,
}

impl Histogram {
    pub fn from_values(values: &[f64], bin_width: f64) -> Self {
        assert!(bin_width > 0.0, "bin width must be positive");
        let mut counts: Vec<u64> = Vec::new();
        for &v in values {
            let bin = (v.max(0.0) / bin_width).floor() as usize;
            if bin >= counts.len() {
                counts.resize(bin + 1, 0);
            }
            counts[bin] += 1;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let (mean, median) = if n == 0 {
            (0.0, 0.0)
        } else {
            let median = if n % 2 == 1 {
                sorted[n / 2]
            } else {
                0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
            };
            (sorted.iter().sum::<f64>() / n as f64, median)
        };
        Self {
            bin_width,
            counts,
            mean,
            median,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Index of the fullest bin (lowest on ties), if any value was binned.
    pub fn mode_bin(&self) -> Option<usize> {
        let max = *self.counts.iter().max()?;
        (max > 0).then(|| self.counts.iter().position(|&c| c == max).expect("max exists"))
    }

    pub fn bin_bounds(&self, bin: usize) -> (f64, f64) {
        (bin as f64 * self.bin_width, (bin + 1) as f64 * self.bin_width)
    }

    /// No bin holding at least half the mode's count is cut off from the
    /// mode by a dip to half its own count or less.
    pub fn is_unimodal(&self) -> bool {
        let Some(m) = self.mode_bin() else {
            return false;
        };
        let peak = self.counts[m] as f64;
        self.counts.iter().enumerate().all(|(j, &c)| {
            let c = c as f64;
            if j == m || c < 0.5 * peak {
                return true;
            }
            let (lo, hi) = if j < m { (j + 1, m) } else { (m + 1, j) };
            self.counts[lo..hi].iter().all(|&d| d as f64 > 0.5 * c)
        })
    }
}

/// Prices of successful, paid, non-promotional deals.
pub fn deal_prices(out: &SimOutput) -> Vec<f64> {
    out.deals
        .iter()
        .filter(|d| d.success && !d.promotional && d.price > 0.0)
        .map(|d| d.price)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicResult {
    pub seeds: Vec<u64>,
    pub per_seed: Vec<Histogram>,
    pub pooled: Histogram,
    pub profits: Vec<f64>,
}

/// Outcome totals of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub attempts: u64,
    pub deals: u64,
    pub paid_deals: u32,
    pub profit: f64,
    pub dropouts: usize,
}

impl RunSummary {
    pub fn of(out: &SimOutput) -> Self {
        Self {
            attempts: out.ledger.attempts(),
            deals: out.ledger.successful_deals(),
            paid_deals: out.ledger.deals,
            profit: out.ledger.profit(),
            dropouts: out.ledger.dropouts(),
        }
    }

    pub fn success_ratio(&self) -> f64 {
        if self.attempts == 0 {
            0.0
        } else {
            self.deals as f64 / self.attempts as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub offer: f64,
    /// One summary per seed, in seed order.
    pub runs: Vec<RunSummary>,
}

impl SweepPoint {
    pub fn pooled_ratio(&self) -> f64 {
        let attempts: u64 = self.runs.iter().map(|r| r.attempts).sum();
        let deals: u64 = self.runs.iter().map(|r| r.deals).sum();
        if attempts == 0 {
            0.0
        } else {
            deals as f64 / attempts as f64
        }
    }

    /// Population std dev of the per-replication ratios.
    pub fn ratio_stddev(&self) -> f64 {
        let n = self.runs.len() as f64;
        if self.runs.is_empty() {
            return 0.0;
        }
        let mean = self.runs.iter().map(RunSummary::success_ratio).sum::<f64>() / n;
        (self
            .runs
            .iter()
            .map(|r| (r.success_ratio() - mean).powi(2))
            .sum::<f64>()
            / n)
            .sqrt()
    }

    pub fn total_profit(&self) -> f64 {
        self.runs.iter().map(|r| r.profit).sum()
    }

    pub fn total_paid_deals(&self) -> u64 {
        self.runs.iter().map(|r| u64::from(r.paid_deals)).sum()
    }
}

/// Dynamic pricing plus the fixed-offer sweep on a shared set of seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct Study {
    pub dynamic: DynamicResult,
    pub dynamic_runs: Vec<RunSummary>,
    pub sweep: Vec<SweepPoint>,
}

impl Study {
    pub fn dynamic_profit(&self) -> f64 {
        self.dynamic_runs.iter().map(|r| r.profit).sum()
    }
}

fn collect_dynamic(
    seeds: &[u64],
    outs: Vec<(Vec<f64>, RunSummary)>,
    bin_width: f64,
) -> (DynamicResult, Vec<RunSummary>) {
    let mut all = Vec::new();
    let mut per_seed = Vec::new();
    let mut runs = Vec::new();
    for (prices, summary) in outs {
        per_seed.push(Histogram::from_values(&prices, bin_width));
        all.extend(prices);
        runs.push(summary);
    }
    let result = DynamicResult {
        seeds: seeds.to_vec(),
        per_seed,
        pooled: Histogram::from_values(&all, bin_width),
        profits: runs.iter().map(|r| r.profit).collect(),
    };
    (result, runs)
}

pub fn dynamic_pricing(config: &Config, seeds: &[u64]) -> Result<DynamicResult, ExperimentError> {
    let outs = seeds
        .par_iter()
        .map(|&seed| {
            let setup = prepare(config, seed)?;
            let out = simulate(&setup, config, PricingMode::Dynamic, seed)?;
            Ok((deal_prices(&out), RunSummary::of(&out)))
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    Ok(collect_dynamic(seeds, outs, config.bin_width).0)
}

/// Runs every offer in `offers` on every seed; results sorted by offer,
/// then seed.
pub fn fixed_sweep(config: &Config, seeds: &[u64], offers: &[f64]) -> Result<Vec<SweepPoint>, ExperimentError> {
    Ok(run_study(config, seeds, offers, false)?.sweep)
}

/// Dynamic pricing and the fixed sweep over the same generated inputs.
pub fn study(config: &Config, seeds: &[u64], offers: &[f64]) -> Result<Study, ExperimentError> {
    run_study(config, seeds, offers, true)
}

fn run_study(config: &Config, seeds: &[u64], offers: &[f64], with_dynamic: bool) -> Result<Study, ExperimentError> {
    let per_seed = seeds
        .par_iter()
        .map(|&seed| {
            let setup = prepare(config, seed)?;
            let dynamic = if with_dynamic {
                let out = simulate(&setup, config, PricingMode::Dynamic, seed)?;
                Some((deal_prices(&out), RunSummary::of(&out)))
            } else {
                None
            };
            let fixed = offers
                .par_iter()
                .map(|&f| {
                    Ok(RunSummary::of(&simulate(
                        &setup,
                        config,
                        PricingMode::FixedInitial(f),
                        seed,
                    )?))
                })
                .collect::<Result<Vec<_>, ExperimentError>>()?;
            Ok((dynamic, fixed))
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;

    let mut order: Vec<usize> = (0..offers.len()).collect();
    order.sort_by(|&a, &b| offers[a].total_cmp(&offers[b]));
    let sweep = order
        .iter()
        .map(|&k| SweepPoint {
            offer: offers[k],
            runs: per_seed.iter().map(|(_, fixed)| fixed[k]).collect(),
        })
        .collect();
    let dyn_outs: Vec<_> = per_seed.into_iter().filter_map(|(d, _)| d).collect();
    let (dynamic, dynamic_runs) = collect_dynamic(if with_dynamic { seeds } else { &[] }, dyn_outs, config.bin_width);
    Ok(Study {
        dynamic,
        dynamic_runs,
        sweep,
    })
}

pub const SCHEMA_LINE: &str = "# gpit-sim schema v1";

pub fn schema_header(seed: u64) -> String {
    format!("{SCHEMA_LINE}, seed={seed}\n")
}

/// `bin_low,bin_high,count` rows plus a summary row; an empty histogram
/// gets a single `empty` marker row instead of bins.
pub fn histogram_csv(h: &Histogram, seed: u64) -> String {
    let mut s = schema_header(seed);
    s.push_str("bin_low,bin_high,count\n");
    if h.total() == 0 {
        s.push_str("empty,empty,0\n");
        return s;
    }
    for (i, &c) in h.counts.iter().enumerate() {
        let (lo, hi) = h.bin_bounds(i);
        s.push_str(&format!("{lo:.2},{hi:.2},{c}\n"));
    }
    let mode = h.mode_bin().map(|m| h.bin_bounds(m).0).unwrap_or(0.0);
    s.push_str(&format!(
        "summary,mean={:.4};median={:.4};mode={:.2},{}\n",
        h.mean,
        h.median,
        mode,
        h.total()
    ));
    s
}

pub fn elasticity_csv(sweep: &[SweepPoint], seed: u64) -> String {
    let mut s = schema_header(seed);
    s.push_str("offer,success_ratio,stddev\n");
    for p in sweep {
        s.push_str(&format!(
            "{:.2},{:.6},{:.6}\n",
            p.offer,
            p.pooled_ratio(),
            p.ratio_stddev()
        ));
    }
    s
}

/// `offer,profit,deals` rows, then a `dynamic` row on the same seeds.
pub fn profit_csv(sweep: &[SweepPoint], dynamic_runs: &[RunSummary], seed: u64) -> String {
    let mut s = schema_header(seed);
    s.push_str("offer,profit,deals\n");
    for p in sweep {
        s.push_str(&format!(
            "{:.2},{:.2},{}\n",
            p.offer,
            p.total_profit(),
            p.total_paid_deals()
        ));
    }
    let profit: f64 = dynamic_runs.iter().map(|r| r.profit).sum();
    let deals: u64 = dynamic_runs.iter().map(|r| u64::from(r.paid_deals)).sum();
    s.push_str(&format!("dynamic,{profit:.2},{deals}\n"));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hist(counts: &[u64]) -> Histogram {
        Histogram {
            bin_width: 0.25,
            counts: counts.to_vec(),
            mean: 0.0,
            median: 0.0,
        }
    }

    #[test]
    fn binning_and_stats() {
        let h = Histogram::from_values(&[0.1, 0.3, 0.3, 2.99, 3.0], 0.25);
        assert_eq!(h.counts[0], 1);
        assert_eq!(h.counts[1], 2);
        assert_eq!(h.counts[11], 1);
        assert_eq!(h.counts[12], 1);
        assert_eq!(h.total(), 5);
        assert_eq!(h.mode_bin(), Some(1));
        assert_eq!(h.median, 0.3);
        assert!((h.mean - 1.338).abs() < 1e-12);
    }

    #[test]
    fn unimodality() {
        assert!(hist(&[1, 4, 9, 12, 7, 3, 1]).is_unimodal());
        assert!(hist(&[0, 10, 0, 2, 0]).is_unimodal());
        assert!(!hist(&[10, 2, 9]).is_unimodal());
        assert!(hist(&[10, 6, 9]).is_unimodal());
        assert!(!hist(&[0, 0]).is_unimodal());
    }

    #[test]
    fn empty_histogram_marker() {
        let csv = histogram_csv(&Histogram::from_values(&[], 0.25), 4);
        assert_eq!(
            csv,
            "# gpit-sim schema v1, seed=4\nbin_low,bin_high,count\nempty,empty,0\n"
        );
    }

    #[test]
    fn seeds_follow_base() {
        assert_eq!(replication_seeds(7, 3), vec![7, 8, 9]);
    }
}

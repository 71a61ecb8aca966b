use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gpit_core::config::Config;
use gpit_core::experiment::{self, histogram_csv, replication_seeds, schema_header, Setup};
use gpit_core::market::{run_simulation, PricingMode, SimOutput};
use gpit_core::scenario::{generate_profiles, generate_trace, parse_trace, serialize_trace, EventKind};
use gpit_core::world::io::{parse_world, write_world};
use gpit_core::world::{build_world, generate_prices, World};

const USAGE: u8 = 1;
const DATA: u8 = 2;
const EMPTY: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "gpit-sim", version, about = "Gas price information trader market simulator")]
struct Cli {
    /// Run configuration (`key = value` lines).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Base seed; replications use seed, seed + 1, ...
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Output directory; standard output when omitted.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Road network tools.
    #[command(subcommand)]
    World(WorldCmd),
    /// Event trace tools.
    #[command(subcommand)]
    Trace(TraceCmd),
    /// Station price tools.
    #[command(subcommand)]
    Prices(PricesCmd),
    /// Single market run.
    #[command(subcommand)]
    Sim(SimCmd),
    /// Market experiments.
    #[command(subcommand)]
    Exp(ExpCmd),
}

#[derive(Subcommand, Debug)]
enum WorldCmd {
    /// Generate a world and write `world.txt`.
    Gen,
    /// Load a world file and report its size.
    Import { file: PathBuf },
}

#[derive(Args, Debug)]
struct WorldArg {
    /// Use this world file instead of generating one.
    #[arg(long, value_name = "FILE")]
    world: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum TraceCmd {
    /// Generate a baseline trace and write `trace.txt`.
    Gen(WorldArg),
    /// Validate a trace file.
    Check {
        file: PathBuf,
        #[command(flatten)]
        world: WorldArg,
    },
}

#[derive(Subcommand, Debug)]
enum PricesCmd {
    /// Generate station prices and write `prices.csv`.
    Gen(WorldArg),
}

#[derive(Subcommand, Debug)]
enum SimCmd {
    /// Run the market once; writes `deals.csv`, `ledger.csv`, `trader.csv`.
    Run {
        /// `dynamic` or a fixed initial offer in dollars.
        #[arg(long)]
        pricing: Option<String>,
    },
}

#[derive(Args, Debug)]
struct ExpArgs {
    #[arg(long)]
    replications: Option<u32>,
}

#[derive(Subcommand, Debug)]
enum ExpCmd {
    /// Deal-price histogram under dynamic pricing (`histogram.csv`).
    Dynamic(ExpArgs),
    /// Success ratio per fixed initial offer (`elasticity.csv`).
    Elasticity(ExpArgs),
    /// Trader profit per fixed initial offer plus dynamic (`profit.csv`).
    Profit(ExpArgs),
}

struct Failure {
    code: u8,
    message: String,
}

fn data<E: std::fmt::Display>(e: E) -> Failure {
    Failure {
        code: DATA,
        message: e.to_string(),
    }
}

fn load_config(cli: &Cli) -> Result<Config, Failure> {
    match &cli.config {
        Some(path) => Config::load(path).map_err(data),
        None => Ok(Config::default()),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn emit(cli: &Cli, name: &str, content: &str) -> Result<(), Failure> {
    match &cli.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| data(format!("{}: {e}", dir.display())))?;
            let path = dir.join(name);
            std::fs::write(&path, content).map_err(|e| data(format!("{}: {e}", path.display())))?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn world_for(cli: &Cli, config: &Config, arg: &WorldArg) -> Result<World, Failure> {
    match &arg.world {
        Some(path) => parse_world(&read(path)?).map_err(|e| data(format!("{}: {e}", path.display()))),
        None => build_world(&config.world, cli.seed).map_err(data),
    }
}

fn parse_pricing(text: &str) -> Result<PricingMode, Failure> {
    if text == "dynamic" {
        return Ok(PricingMode::Dynamic);
    }
    match text.parse::<f64>() {
        Ok(f) if f >= 0.0 && f.is_finite() => Ok(PricingMode::FixedInitial(f)),
        _ => Err(Failure {
            code: USAGE,
            message: format!("--pricing expects `dynamic` or an amount >= 0, got `{text}`"),
        }),
    }
}

fn deals_csv(out: &SimOutput, seed: u64) -> String {
    let mut s = schema_header(seed);
    s.push_str("day,client,price,savings,promotional,success,rounds,reservation\n");
    for d in &out.deals {
        let _ = writeln!(
            s,
            "{},{},{:.4},{:.4},{},{},{},{:.4}",
            d.day, d.client, d.price, d.savings, d.promotional, d.success, d.rounds, d.reservation
        );
    }
    s
}

fn ledger_csv(out: &SimOutput, seed: u64) -> String {
    let mut s = schema_header(seed);
    s.push_str(
        "client,payments,gross_savings,net_benefit,purchases,deals,conflicts,promotions,needs,attempts,dropout_day,fallback_refuels\n",
    );
    for c in &out.ledger.clients {
        let dropout = c.dropout_day.map(|d| d.to_string()).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{:.4},{:.4},{:.4},{},{},{},{},{},{},{},{}",
            c.client,
            c.payments,
            c.gross_savings,
            c.net_benefit(),
            c.purchases,
            c.deals,
            c.conflicts,
            c.promotions,
            c.needs,
            c.attempts,
            dropout,
            c.fallback_refuels
        );
    }
    s
}

fn trader_csv(out: &SimOutput, seed: u64) -> String {
    let l = &out.ledger;
    let mut s = schema_header(seed);
    s.push_str("income,acquisition_cost,profit,deals,dropouts\n");
    let _ = writeln!(
        s,
        "{:.4},{:.4},{:.4},{},{}",
        l.income,
        l.acquisition_cost,
        l.profit(),
        l.deals,
        l.dropouts()
    );
    s
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let config = load_config(cli)?;
    let seed = cli.seed;
    match &cli.command {
        Command::World(WorldCmd::Gen) => {
            let world = build_world(&config.world, seed).map_err(data)?;
            emit(cli, "world.txt", &write_world(&world))
        }
        Command::World(WorldCmd::Import { file }) => {
            let world = parse_world(&read(file)?).map_err(|e| data(format!("{}: {e}", file.display())))?;
            println!(
                "locations={} roads={} stations={}",
                world.locations().len(),
                world.roads().len(),
                world.station_ids().len()
            );
            Ok(())
        }
        Command::Trace(TraceCmd::Gen(arg)) => {
            let world = world_for(cli, &config, arg)?;
            let profiles = generate_profiles(&world, config.clients, &config.scenario, seed).map_err(data)?;
            let trace = generate_trace(&world, &profiles, config.days, &config.scenario, seed).map_err(data)?;
            emit(cli, "trace.txt", &serialize_trace(&trace))
        }
        Command::Trace(TraceCmd::Check { file, world }) => {
            let trace = parse_trace(&read(file)?).map_err(|e| data(format!("{}: {e}", file.display())))?;
            if let Some(path) = &world.world {
                let w = parse_world(&read(path)?).map_err(|e| data(format!("{}: {e}", path.display())))?;
                if let Some(e) = trace.events.iter().find(|e| !w.contains(e.location)) {
                    return Err(data(format!("{}: unknown location {}", file.display(), e.location)));
                }
            }
            println!(
                "events={} departs={} arrives={} sees={} needs={}",
                trace.len(),
                trace.count(EventKind::Departs),
                trace.count(EventKind::Arrives),
                trace.count(EventKind::Sees),
                trace.count(EventKind::Needs)
            );
            Ok(())
        }
        Command::Prices(PricesCmd::Gen(arg)) => {
            let world = world_for(cli, &config, arg)?;
            let stations = world.station_ids();
            let table = generate_prices(&stations, config.days as usize, &config.prices, seed).map_err(data)?;
            let mut s = schema_header(seed);
            s.push_str("day,station,price\n");
            for day in 0..table.horizon_days() {
                let row = table.day_prices(day).map_err(data)?;
                for (st, p) in stations.iter().zip(row) {
                    let _ = writeln!(s, "{day},{st},{p:.4}");
                }
            }
            emit(cli, "prices.csv", &s)
        }
        Command::Sim(SimCmd::Run { pricing }) => {
            let mut market = config.market.clone();
            if let Some(p) = pricing {
                market.pricing = parse_pricing(p)?;
            }
            let Setup {
                world,
                profiles,
                trace,
                prices,
            } = experiment::prepare(&config, seed).map_err(data)?;
            let out = run_simulation(&world, &trace, &profiles, &prices, &market, seed).map_err(data)?;
            emit(cli, "deals.csv", &deals_csv(&out, seed))?;
            emit(cli, "ledger.csv", &ledger_csv(&out, seed))?;
            emit(cli, "trader.csv", &trader_csv(&out, seed))
        }
        Command::Exp(cmd) => {
            let (ExpCmd::Dynamic(a) | ExpCmd::Elasticity(a) | ExpCmd::Profit(a)) = cmd;
            let reps = a.replications.unwrap_or(config.replications);
            if reps == 0 {
                return Err(Failure {
                    code: USAGE,
                    message: "--replications must be at least 1".into(),
                });
            }
            let seeds = replication_seeds(seed, reps);
            match cmd {
                ExpCmd::Dynamic(_) => {
                    let result = experiment::dynamic_pricing(&config, &seeds).map_err(data)?;
                    emit(cli, "histogram.csv", &histogram_csv(&result.pooled, seed))?;
                    if result.pooled.total() == 0 {
                        return Err(Failure {
                            code: EMPTY,
                            message: "no successful non-promotional deals".into(),
                        });
                    }
                    Ok(())
                }
                ExpCmd::Elasticity(_) => {
                    if !config.offers.contains(&0.0) {
                        return Err(data("elasticity sweep must include offer 0"));
                    }
                    let sweep = experiment::fixed_sweep(&config, &seeds, &config.offers).map_err(data)?;
                    emit(cli, "elasticity.csv", &experiment::elasticity_csv(&sweep, seed))
                }
                ExpCmd::Profit(_) => {
                    let study = experiment::study(&config, &seeds, &config.offers).map_err(data)?;
                    emit(
                        cli,
                        "profit.csv",
                        &experiment::profit_csv(&study.sweep, &study.dynamic_runs, seed),
                    )
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("gpit-sim: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

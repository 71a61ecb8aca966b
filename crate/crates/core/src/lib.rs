//! Agent-based simulation of a gas price information trader.
//!
//! Drivers commute over a synthetic road network, run low on fuel and may buy
//! knowledge of the cheapest nearby station from a trader. Prices for that
//! knowledge are negotiated per interaction.

pub mod config;
pub mod experiment;
pub mod market;
pub mod negotiation;
pub mod rng;
pub mod scenario;
pub mod vehicle;
pub mod world;

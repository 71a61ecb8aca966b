//! Price negotiation between a client and the information trader.
//!
//! Both sides run a monotonic concession strategy with a reservation price:
//! the client climbs from its initial offer toward its reservation, the
//! trader descends from its initial offer toward its floor. Between
//! sessions the client re-anchors its initial offer on recent deal prices
//! and the trader tracks an EMA of deal prices, adjusting its concession
//! rate with a MACD signal.

mod client;
pub mod indicators;
mod session;
mod trader;

use thiserror::Error;

use crate::scenario::ClientId;

pub use client::ClientStrategyState;
pub use indicators::{ema_update, trader_concession_rate, Macd, MacdOutput};
pub use session::{
    client_next_offer, run_negotiation, trader_next_offer, NegotiationSession, Offer, Outcome, Party,
    DEFAULT_MAX_ROUNDS,
};
pub use trader::{promotional_deal, TraderStrategyState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NegotiationError {
    #[error("it is the {expected:?}'s turn, not the {got:?}'s")]
    OutOfTurn { expected: Party, got: Party },
    #[error("session already concluded")]
    Closed,
    #[error("client is not in its promotional phase")]
    NotPromotional,
}

/// Who and when a session is about.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DealContext {
    pub client: ClientId,
    pub day: u32,
}

/// Outcome of one interaction between a client and the trader.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DealRecord {
    pub client: ClientId,
    pub day: u32,
    /// Price paid; zero for conflicts and free information.
    pub price: f64,
    /// Realized savings; filled in by the market once the refuel is known.
    pub savings: f64,
    pub promotional: bool,
    /// True when information changed hands.
    pub success: bool,
    pub rounds: u32,
    /// The client's reservation price for this session.
    pub reservation: f64,
}

use super::{ClientStrategyState, DealContext, DealRecord, NegotiationError, TraderStrategyState};

pub const DEFAULT_MAX_ROUNDS: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    Client,
    Trader,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Offer {
    pub from: Party,
    pub amount: f64,
    /// 1-based round; a round is one client offer followed by one trader offer.
    pub round: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Open,
    Deal(f64),
    Conflict,
}

/// Client concession step, capped at the reservation.
pub fn client_next_offer(prev: f64, u_min: f64, u_max: f64, delta: f64) -> f64 {
    (prev + delta * (u_max - u_min)).min(u_max)
}

/// Trader concession step, floored at the reservation.
pub fn trader_next_offer(prev: f64, u_s_max: f64, u_s_min: f64, delta_c: f64) -> f64 {
    (prev - delta_c * (u_s_max - u_s_min)).max(u_s_min)
}

/// One alternating-offers session with fixed strategy parameters.
///
/// On its turn each side computes its next offer and accepts the opponent's
/// standing offer if it is at least as good; the deal is struck at the
/// opponent's offer. A full round in which neither side moves, or reaching
/// the round limit, ends in conflict.
#[derive(Debug, Clone, PartialEq)]
pub struct NegotiationSession {
    u_min: f64,
    u_max: f64,
    delta: f64,
    u_s_max: f64,
    u_s_min: f64,
    delta_c: f64,
    max_rounds: u32,
    offers: Vec<Offer>,
    outcome: Outcome,
}

impl NegotiationSession {
    pub fn new(client: &ClientStrategyState, trader: &TraderStrategyState, max_rounds: u32) -> Self {
        assert!(max_rounds >= 1, "a session needs at least one round");
        Self {
            u_min: client.u_min,
            u_max: client.u_max.max(client.u_min),
            delta: client.delta,
            u_s_max: trader.u_s_max,
            u_s_min: trader.u_s_min.min(trader.u_s_max),
            delta_c: trader.delta_c,
            max_rounds,
            offers: Vec::new(),
            outcome: Outcome::Open,
        }
    }

    pub fn offers(&self) -> &[Offer] {
        &self.offers
    }

    pub fn outcome(&self) -> Outcome {
        self.outcome
    }

    pub fn to_move(&self) -> Party {
        if self.offers.len() % 2 == 0 {
            Party::Client
        } else {
            Party::Trader
        }
    }

    /// Round in progress, or the last round played once concluded.
    pub fn rounds(&self) -> u32 {
        match self.outcome {
            Outcome::Conflict => (self.offers.len() / 2) as u32,
            _ => (self.offers.len() / 2) as u32 + 1,
        }
    }

    fn last_from(&self, party: Party, back: usize) -> Option<f64> {
        self.offers
            .iter()
            .rev()
            .filter(|o| o.from == party)
            .nth(back)
            .map(|o| o.amount)
    }

    /// Plays the next move, which must belong to `party`.
    pub fn step_as(&mut self, party: Party) -> Result<Outcome, NegotiationError> {
        if self.outcome != Outcome::Open {
            return Err(NegotiationError::Closed);
        }
        let expected = self.to_move();
        if party != expected {
            return Err(NegotiationError::OutOfTurn { expected, got: party });
        }
        let round = self.rounds();
        match party {
            Party::Client => {
                let next = self
                    .last_from(Party::Client, 0)
                    .map_or(self.u_min, |p| client_next_offer(p, self.u_min, self.u_max, self.delta));
                if let Some(standing) = self.last_from(Party::Trader, 0) {
                    if standing <= next {
                        self.outcome = Outcome::Deal(standing);
                        return Ok(self.outcome);
                    }
                }
                self.offers.push(Offer {
                    from: party,
                    amount: next,
                    round,
                });
            }
            Party::Trader => {
                let next = self.last_from(Party::Trader, 0).map_or(self.u_s_max, |p| {
                    trader_next_offer(p, self.u_s_max, self.u_s_min, self.delta_c)
                });
                let standing = self.last_from(Party::Client, 0).expect("client opens");
                if standing >= next {
                    self.outcome = Outcome::Deal(standing);
                    return Ok(self.outcome);
                }
                self.offers.push(Offer {
                    from: party,
                    amount: next,
                    round,
                });
                let stalled = |p| match (self.last_from(p, 0), self.last_from(p, 1)) {
                    (Some(a), Some(b)) => a == b,
                    _ => false,
                };
                if (stalled(Party::Client) && stalled(Party::Trader)) || round >= self.max_rounds {
                    self.outcome = Outcome::Conflict;
                }
            }
        }
        Ok(self.outcome)
    }

    pub fn step(&mut self) -> Result<Outcome, NegotiationError> {
        self.step_as(self.to_move())
    }

    pub fn run(&mut self) -> Outcome {
        while self.outcome == Outcome::Open {
            self.step().expect("open session accepts the next move");
        }
        self.outcome
    }
}

/// Runs a session on the current strategy parameters of both sides and, on
/// a deal, feeds the price back into both strategies.
pub fn run_negotiation(
    client: &mut ClientStrategyState,
    trader: &mut TraderStrategyState,
    ctx: DealContext,
) -> (NegotiationSession, DealRecord) {
    let mut session = NegotiationSession::new(client, trader, DEFAULT_MAX_ROUNDS);
    let outcome = session.run();
    let price = match outcome {
        Outcome::Deal(p) => {
            client.record_deal(p);
            trader.record_deal(p);
            p
        }
        _ => 0.0,
    };
    let record = DealRecord {
        client: ctx.client,
        day: ctx.day,
        price,
        savings: 0.0,
        promotional: false,
        success: matches!(outcome, Outcome::Deal(_)),
        rounds: session.rounds(),
        reservation: client.u_max,
    };
    (session, record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ClientId;

    fn parties(u_min: f64, u_max: f64, u_s_max: f64, u_s_min: f64) -> (ClientStrategyState, TraderStrategyState) {
        let mut c = ClientStrategyState::new(u_min, 100.0, 0.25, 5);
        c.u_max = u_max;
        let mut t = TraderStrategyState::new(u_s_max, u_s_min, 5, 0);
        t.delta_c = 0.25;
        (c, t)
    }

    #[test]
    fn hand_worked_session() {
        let (mut c, mut t) = parties(1.0, 3.0, 4.0, 1.0);
        let (s, d) = run_negotiation(
            &mut c,
            &mut t,
            DealContext {
                client: ClientId(1),
                day: 3,
            },
        );
        let amounts: Vec<f64> = s.offers().iter().map(|o| o.amount).collect();
        assert_eq!(amounts, vec![1.0, 4.0, 1.5, 3.25, 2.0, 2.5]);
        assert_eq!(s.outcome(), Outcome::Deal(2.5));
        assert_eq!((d.price, d.rounds, d.success), (2.5, 4, true));
        assert_eq!(c.deal_history.back(), Some(&2.5));
    }

    #[test]
    fn disjoint_ranges_conflict() {
        let (mut c, mut t) = parties(1.0, 2.0, 5.0, 3.0);
        let (s, d) = run_negotiation(
            &mut c,
            &mut t,
            DealContext {
                client: ClientId(1),
                day: 0,
            },
        );
        assert_eq!(s.outcome(), Outcome::Conflict);
        assert!(!d.success);
        assert_eq!(d.price, 0.0);
        assert!(c.deal_history.is_empty());
        // Both reach their reservations in round 5, stall through round 6.
        assert_eq!(d.rounds, 6);
    }

    #[test]
    fn trader_takes_generous_opening() {
        let (mut c, mut t) = parties(3.0, 4.0, 2.0, 1.0);
        let (s, d) = run_negotiation(
            &mut c,
            &mut t,
            DealContext {
                client: ClientId(1),
                day: 0,
            },
        );
        assert_eq!(s.outcome(), Outcome::Deal(3.0));
        assert_eq!(d.rounds, 1);
    }

    #[test]
    fn round_limit() {
        let (c, t) = parties(1.0, 1.0 + 1e-9, 5.0, 5.0 - 1e-9);
        let mut c = c;
        c.delta = 1e-6;
        let mut s = NegotiationSession::new(&c, &t, 3);
        assert_eq!(s.run(), Outcome::Conflict);
        assert_eq!(s.offers().len(), 6);
        assert_eq!(s.rounds(), 3);
    }

    #[test]
    fn turn_order_enforced() {
        let (c, t) = parties(1.0, 3.0, 4.0, 1.0);
        let mut s = NegotiationSession::new(&c, &t, 40);
        assert_eq!(
            s.step_as(Party::Trader),
            Err(NegotiationError::OutOfTurn {
                expected: Party::Client,
                got: Party::Trader
            })
        );
        s.run();
        assert_eq!(s.step(), Err(NegotiationError::Closed));
    }

    #[test]
    fn concession_steps() {
        assert_eq!(client_next_offer(1.0, 1.0, 3.0, 0.25), 1.5);
        assert_eq!(client_next_offer(2.9, 1.0, 3.0, 0.25), 3.0);
        assert_eq!(trader_next_offer(4.0, 4.0, 1.0, 0.25), 3.25);
        assert_eq!(trader_next_offer(1.2, 4.0, 1.0, 0.25), 1.0);
    }
}

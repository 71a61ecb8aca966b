use super::indicators::{ema_update, trader_concession_rate, Macd, MacdOutput, FAST_CONCESSION};
use super::{ClientStrategyState, DealContext, DealRecord, NegotiationError};

/// The trader's adaptive state toward one client.
#[derive(Debug, Clone, PartialEq)]
pub struct TraderStrategyState {
    /// Initial offer of the current session.
    pub u_s_max: f64,
    /// Reservation floor.
    pub u_s_min: f64,
    /// EMA of past deal prices.
    pub phi: f64,
    pub macd: Macd,
    pub last_macd: Option<MacdOutput>,
    /// Concession rate, a fraction of `u_s_max - u_s_min` per round.
    pub delta_c: f64,
    pub m: f64,
    pub r: u32,
    pub promotions_left: u32,
    promo_sum: f64,
    promo_count: u32,
}

impl TraderStrategyState {
    /// A trader seeded at `initial_offer` with `promotions` free deals ahead.
    pub fn new(initial_offer: f64, u_s_min: f64, r: u32, promotions: u32) -> Self {
        assert!(r >= 1, "EMA window must be at least 1");
        let start = initial_offer.max(u_s_min);
        Self {
            u_s_max: start,
            u_s_min,
            phi: start,
            macd: Macd::seeded(start),
            last_macd: None,
            delta_c: FAST_CONCESSION,
            m: 0.125,
            r,
            promotions_left: promotions,
            promo_sum: 0.0,
            promo_count: 0,
        }
    }

    /// Fixed-price trader: always opens at `offer`, concedes at 0.25 down to
    /// a third of it.
    pub fn fixed(offer: f64) -> Self {
        Self::new(offer, offer / 3.0, 1, 0)
    }

    /// Moves the initial offer toward the deal EMA:
    /// `m·φ + (1 − m)·u_s_max`, floored at `u_s_min`.
    pub fn initial_offer(&mut self) -> f64 {
        self.u_s_max = (self.m * self.phi + (1.0 - self.m) * self.u_s_max).max(self.u_s_min);
        self.u_s_max
    }

    /// Folds a deal price into the EMA and the MACD, and picks the next
    /// concession rate.
    pub fn record_deal(&mut self, price: f64) -> MacdOutput {
        self.phi = ema_update(self.phi, price, self.r);
        let out = self.macd.step(price);
        self.delta_c = trader_concession_rate(out.varphi, out.signal);
        self.last_macd = Some(out);
        out
    }

    pub fn in_promotion(&self) -> bool {
        self.promotions_left > 0
    }
}

/// Hands out the information for free during the promotional phase.
///
/// The client reports a value estimate (midpoint of its session range plus
/// `estimate_noise`, floored at zero); the trader seeds its EMAs with the
/// running mean of these reports. The realized savings go into the client's
/// savings history.
pub fn promotional_deal(
    client: &mut ClientStrategyState,
    trader: &mut TraderStrategyState,
    ctx: DealContext,
    realized_savings: f64,
    estimate_noise: f64,
) -> Result<DealRecord, NegotiationError> {
    if !trader.in_promotion() {
        return Err(NegotiationError::NotPromotional);
    }
    let estimate = (0.5 * (client.u_min + client.u_max) + estimate_noise).max(0.0);
    trader.promotions_left -= 1;
    trader.promo_sum += estimate;
    trader.promo_count += 1;
    let mean = trader.promo_sum / f64::from(trader.promo_count);
    trader.phi = mean;
    trader.macd = Macd::seeded(mean);
    trader.u_s_max = mean.max(trader.u_s_min);
    client.record_savings(realized_savings);
    Ok(DealRecord {
        client: ctx.client,
        day: ctx.day,
        price: 0.0,
        savings: realized_savings,
        promotional: true,
        success: true,
        rounds: 0,
        reservation: client.u_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ClientId;

    const CTX: DealContext = DealContext {
        client: ClientId(1),
        day: 0,
    };

    #[test]
    fn initial_offer_fixed_point_and_step() {
        let mut t = TraderStrategyState::new(3.0, 0.1, 5, 0);
        assert_eq!(t.initial_offer(), 3.0);
        let mut t = TraderStrategyState::new(4.0, 0.1, 5, 0);
        t.phi = 2.0;
        assert_eq!(t.initial_offer(), 3.75);
    }

    #[test]
    fn initial_offer_floor() {
        let mut t = TraderStrategyState::new(0.02, 0.10, 5, 0);
        t.u_s_max = 0.02;
        t.phi = 0.01;
        assert_eq!(t.initial_offer(), 0.10);
    }

    #[test]
    fn deal_updates_ema_and_rate() {
        let mut t = TraderStrategyState::new(3.0, 0.1, 5, 0);
        let out = t.record_deal(2.0);
        assert!((t.phi - (2.0 / 6.0 * 2.0 + 4.0 / 6.0 * 3.0)).abs() < 1e-15);
        assert!(out.varphi < 0.0);
        assert_eq!(t.delta_c, trader_concession_rate(out.varphi, out.signal));
    }

    #[test]
    fn promotion_seeds_with_mean_estimate() {
        let mut c = ClientStrategyState::new(1.0, 5.0, 0.25, 5);
        c.u_max = 3.0;
        let mut t = TraderStrategyState::new(0.5, 0.1, 5, 2);
        let d = promotional_deal(&mut c, &mut t, CTX, 1.2, 0.0).unwrap();
        assert_eq!((d.price, d.promotional, d.success), (0.0, true, true));
        assert_eq!(t.phi, 2.0);
        promotional_deal(&mut c, &mut t, CTX, 0.8, 1.0).unwrap();
        assert_eq!(t.phi, 2.5);
        assert_eq!(t.macd, Macd::seeded(2.5));
        assert_eq!(t.u_s_max, 2.5);
        assert_eq!(c.expected_savings(), Some(1.0));
        assert_eq!(
            promotional_deal(&mut c, &mut t, CTX, 0.0, 0.0),
            Err(NegotiationError::NotPromotional)
        );
    }

    #[test]
    fn estimate_floored_at_zero() {
        let mut c = ClientStrategyState::new(0.2, 5.0, 0.25, 5);
        c.u_max = 0.4;
        let mut t = TraderStrategyState::new(0.5, 0.1, 5, 1);
        promotional_deal(&mut c, &mut t, CTX, 0.0, -3.0).unwrap();
        assert_eq!(t.phi, 0.0);
        assert_eq!(t.u_s_max, 0.1);
    }
}

use std::collections::VecDeque;

/// Adaptive negotiation state of one client.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientStrategyState {
    /// Initial offer of the current session.
    pub u_min: f64,
    /// Reservation price of the current session.
    pub u_max: f64,
    /// Cap on the initial offer.
    pub c_max: f64,
    /// Concession rate, a fraction of `u_max - u_min` per round.
    pub delta: f64,
    /// Smoothing weight of the initial-offer update.
    pub m: f64,
    /// Deal-history window.
    pub r: usize,
    /// Std dev of the reservation noise.
    pub reservation_sigma: f64,
    /// Savings-history window.
    pub savings_window: usize,
    pub deal_history: VecDeque<f64>,
    pub savings_history: VecDeque<f64>,
}

impl ClientStrategyState {
    pub fn new(initial_offer: f64, c_max: f64, delta: f64, r: usize) -> Self {
        assert!(
            delta > 0.0 && delta <= 0.5,
            "client concession rate must lie in (0, 0.5]"
        );
        assert!(r >= 1, "history window must be at least 1");
        let u_min = initial_offer.clamp(0.0, c_max.max(0.0));
        Self {
            u_min,
            u_max: u_min,
            c_max,
            delta,
            m: 0.125,
            r,
            reservation_sigma: 1.0,
            savings_window: r,
            deal_history: VecDeque::with_capacity(r),
            savings_history: VecDeque::with_capacity(r),
        }
    }

    /// Re-anchors the initial offer on the mean of the last `r` deals:
    /// `m·mean + (1 − m)·u_min`, clamped to `[0, c_max]`. Unchanged while
    /// there is no history.
    pub fn initial_offer(&mut self) -> f64 {
        if !self.deal_history.is_empty() {
            let mean = self.deal_history.iter().sum::<f64>() / self.deal_history.len() as f64;
            self.u_min = self.m * mean + self.u_min * (1.0 - self.m);
        }
        self.u_min = self.u_min.clamp(0.0, self.c_max.max(0.0));
        self.u_min
    }

    /// Draws the session reservation `2·u_min + σ·noise`, never below `u_min`.
    pub fn reservation(&mut self, noise: f64) -> f64 {
        self.u_max = (2.0 * self.u_min + noise * self.reservation_sigma).max(self.u_min);
        self.u_max
    }

    pub fn record_deal(&mut self, price: f64) {
        if self.deal_history.len() == self.r {
            self.deal_history.pop_front();
        }
        self.deal_history.push_back(price);
    }

    pub fn record_savings(&mut self, savings: f64) {
        while self.savings_history.len() >= self.savings_window.max(1) {
            self.savings_history.pop_front();
        }
        self.savings_history.push_back(savings);
    }

    /// Mean of recent realized savings, if any were observed.
    pub fn expected_savings(&self) -> Option<f64> {
        (!self.savings_history.is_empty())
            .then(|| self.savings_history.iter().sum::<f64>() / self.savings_history.len() as f64)
    }
}

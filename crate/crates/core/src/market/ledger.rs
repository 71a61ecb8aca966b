use crate::scenario::ClientId;

/// One paid purchase, as seen by the dropout rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Purchase {
    pub day: u32,
    pub payment: f64,
    pub savings: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DropoutParams {
    pub enabled: bool,
    /// Evaluation window K, in purchases.
    pub window: usize,
    /// Run length F of consecutive zero-savings purchases.
    pub useless_run: usize,
}

impl Default for DropoutParams {
    fn default() -> Self {
        Self {
            enabled: true,
            window: 10,
            useless_run: 5,
        }
    }
}

/// Whether a client gives up on the trader after its paid purchases so far.
///
/// Needs at least `window` purchases; then true when the trailing-window net
/// benefit is not positive, or when the last `useless_run` purchases all
/// saved nothing.
pub fn dropout_check(purchases: &[Purchase], params: &DropoutParams) -> bool {
    if !params.enabled || purchases.len() < params.window.max(1) {
        return false;
    }
    let net: f64 = purchases[purchases.len() - params.window..]
        .iter()
        .map(|p| p.savings - p.payment)
        .sum();
    let useless = params.useless_run > 0
        && purchases.len() >= params.useless_run
        && purchases[purchases.len() - params.useless_run..]
            .iter()
            .all(|p| p.savings == 0.0);
    net <= 0.0 || useless
}

/// Cost to the trader of keeping its price database current.
pub fn acquisition_cost_accrual(rate: f64, n_stations: usize, n_days: usize) -> f64 {
    rate * n_stations as f64 * n_days as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClientLedger {
    pub client: ClientId,
    pub payments: f64,
    /// Savings realized by following the trader's information.
    pub gross_savings: f64,
    /// Paid purchases.
    pub purchases: u32,
    /// Successful non-promotional negotiations, paid or free.
    pub deals: u32,
    pub conflicts: u32,
    pub promotions: u32,
    /// All refuel needs.
    pub needs: u32,
    /// Needs after the promotional phase, including those after dropout.
    pub attempts: u32,
    pub dropout_day: Option<u32>,
    /// Needs where no station was in sight of the route and the nearest
    /// station by road served as the default.
    pub fallback_refuels: u32,
    pub initial_fuel: f64,
    pub fuel_consumed: f64,
    pub fuel_purchased: f64,
    pub final_fuel: f64,
}

impl ClientLedger {
    pub fn new(client: ClientId, initial_fuel: f64) -> Self {
        Self {
            client,
            payments: 0.0,
            gross_savings: 0.0,
            purchases: 0,
            deals: 0,
            conflicts: 0,
            promotions: 0,
            needs: 0,
            attempts: 0,
            dropout_day: None,
            fallback_refuels: 0,
            initial_fuel,
            fuel_consumed: 0.0,
            fuel_purchased: 0.0,
            final_fuel: initial_fuel,
        }
    }

    pub fn net_benefit(&self) -> f64 {
        self.gross_savings - self.payments
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DayTotals {
    pub income: f64,
    pub savings: f64,
    pub deals: u32,
    pub conflicts: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ledger {
    /// One entry per client, in client order.
    pub clients: Vec<ClientLedger>,
    pub income: f64,
    pub acquisition_cost: f64,
    /// Paid deals.
    pub deals: u32,
    pub daily: Vec<DayTotals>,
}

impl Ledger {
    pub fn profit(&self) -> f64 {
        self.income - self.acquisition_cost
    }

    pub fn total_gross_savings(&self) -> f64 {
        self.clients.iter().map(|c| c.gross_savings).sum()
    }

    pub fn total_net_benefit(&self) -> f64 {
        self.clients.iter().map(ClientLedger::net_benefit).sum()
    }

    pub fn attempts(&self) -> u64 {
        self.clients.iter().map(|c| u64::from(c.attempts)).sum()
    }

    pub fn successful_deals(&self) -> u64 {
        self.clients.iter().map(|c| u64::from(c.deals)).sum()
    }

    pub fn dropouts(&self) -> usize {
        self.clients.iter().filter(|c| c.dropout_day.is_some()).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(payment: f64, savings: f64) -> Purchase {
        Purchase {
            day: 0,
            payment,
            savings,
        }
    }

    #[test]
    fn useless_information_drops_out() {
        let v = vec![p(1.0, 0.0); 10];
        assert!(dropout_check(&v, &DropoutParams::default()));
    }

    #[test]
    fn positive_net_stays() {
        let v: Vec<Purchase> = (0..10)
            .map(|i| if i % 2 == 0 { p(0.0, 2.0) } else { p(1.0, 0.0) })
            .collect();
        assert!(!dropout_check(&v, &DropoutParams::default()));
    }

    #[test]
    fn needs_full_window() {
        let v = vec![p(1.0, 0.0); 9];
        assert!(!dropout_check(&v, &DropoutParams::default()));
    }

    #[test]
    fn zero_savings_run() {
        let mut v = vec![p(1.0, 20.0); 10];
        v.extend(vec![p(1.0, 0.0); 5]);
        assert!(dropout_check(&v, &DropoutParams::default()));
        v.pop();
        assert!(!dropout_check(&v, &DropoutParams::default()));
    }

    #[test]
    fn accrual() {
        assert_eq!(acquisition_cost_accrual(0.0, 12, 365), 0.0);
        assert!((acquisition_cost_accrual(0.05, 12, 365) - 219.0).abs() < 1e-9);
    }
}

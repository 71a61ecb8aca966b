//! Exponential moving averages and the MACD concession signal.

/// Fast and slow EMA periods of the MACD line, and the signal-line period.
pub const MACD_FAST: u32 = 9;
pub const MACD_SLOW: u32 = 15;
pub const MACD_SIGNAL: u32 = 5;

/// Trader concession rates chosen by the MACD signal.
pub const SLOW_CONCESSION: f64 = 0.15;
pub const FAST_CONCESSION: f64 = 0.25;

/// Smoothing factor α = 2 / (r + 1).
pub fn ema_alpha(r: u32) -> f64 {
    assert!(r >= 1, "EMA period must be at least 1");
    2.0 / (f64::from(r) + 1.0)
}

/// One EMA step: `α·v + (1 − α)·prev`, written as `prev + α·(v − prev)` so a
/// constant stream stays exactly constant.
pub fn ema_update(prev: f64, v: f64, r: u32) -> f64 {
    prev + ema_alpha(r) * (v - prev)
}

/// State of the MACD indicator over a deal-price stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Macd {
    pub fast: f64,
    pub slow: f64,
    pub signal: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacdOutput {
    /// Fast EMA minus slow EMA.
    pub varphi: f64,
    /// EMA of `varphi`.
    pub signal: f64,
    pub histogram: f64,
}

impl Macd {
    /// Steady state at `level`: both EMAs equal and a zero signal.
    pub fn seeded(level: f64) -> Self {
        Self {
            fast: level,
            slow: level,
            signal: 0.0,
        }
    }

    pub fn step(&mut self, v: f64) -> MacdOutput {
        self.fast = ema_update(self.fast, v, MACD_FAST);
        self.slow = ema_update(self.slow, v, MACD_SLOW);
        let varphi = self.fast - self.slow;
        self.signal = ema_update(self.signal, varphi, MACD_SIGNAL);
        MacdOutput {
            varphi,
            signal: self.signal,
            histogram: varphi - self.signal,
        }
    }
}

/// Slow concession while the MACD line is below its signal, fast otherwise
/// (equality takes the fast branch).
pub fn trader_concession_rate(varphi: f64, signal: f64) -> f64 {
    if varphi < signal {
        SLOW_CONCESSION
    } else {
        FAST_CONCESSION
    }
}

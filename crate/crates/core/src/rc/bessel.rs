//! Second-order Bessel smoothing of measured rate-model scales: maximal
//! flatness of group delay damps oscillation while keeping reaction speed.

/// Bilinear discretization of the normalized second-order Bessel low-pass
/// `H(s) = 3 / (s^2 + 3s + 3)`, time-scaled so a step settles to 99% within
/// a configurable number of updates. Optionally starts with a shorter time
/// constant that ramps to nominal over a startup window for fast initial
/// adaptation.
#[derive(Debug, Clone)]
pub struct BesselFilter2 {
    /// Nominal frequency-scaling factor (larger = faster).
    k_nominal: f64,
    /// Updates over which the startup speed-up decays to nominal.
    ramp_len: u64,
    updates: u64,
    seeded: bool,
    x1: f64,
    x2: f64,
    y1: f64,
    y2: f64,
}

/// 99% settling time of the normalized continuous-time filter (envelope
/// 2e^{-1.5t} below 0.01).
const SETTLE_NORMALIZED: f64 = 3.5324;
/// Startup time-constant divisor ("faster adaptation at the beginning").
const STARTUP_SPEEDUP: f64 = 8.0;

impl BesselFilter2 {
    /// A filter whose step response reaches 99% within `settle_updates`.
    pub fn new(settle_updates: f64) -> Self {
        assert!(settle_updates > 0.0);
        Self {
            k_nominal: SETTLE_NORMALIZED / settle_updates,
            ramp_len: 0,
            updates: 0,
            seeded: false,
            x1: 0.0,
            x2: 0.0,
            y1: 0.0,
            y2: 0.0,
        }
    }

    /// Enables the startup ramp: the time constant starts at 1/8 of nominal
    /// and grows linearly to nominal over `ramp_len` updates.
    pub fn with_startup_ramp(mut self, ramp_len: u64) -> Self {
        self.ramp_len = ramp_len;
        self
    }

    /// Closed-form step response of the continuous-time prototype at
    /// normalized time `t` (for oracle tests).
    pub fn continuous_step_response(t: f64) -> f64 {
        // Poles at (-3 +- j sqrt(3)) / 2.
        let sigma = 1.5;
        let omega = 3f64.sqrt() / 2.0;
        1.0 - (-sigma * t).exp() * ((omega * t).cos() + sigma / omega * (omega * t).sin())
    }

    pub fn value(&self) -> f64 {
        self.y1
    }

    pub fn is_seeded(&self) -> bool {
        self.seeded
    }

    /// Feeds one sample; the first sample seeds the state (steady output).
    pub fn update(&mut self, x: f64) -> f64 {
        if !self.seeded {
            self.seeded = true;
            self.x1 = x;
            self.x2 = x;
            self.y1 = x;
            self.y2 = x;
            return x;
        }
        let k = self.k_nominal * self.speedup();
        self.updates += 1;
        // Bilinear transform of 3k^2 / (s^2 + 3k s + 3k^2) with T = 1.
        let (b, a1, a2, a0);
        {
            let k2 = k * k;
            a0 = 4.0 + 6.0 * k + 3.0 * k2;
            a1 = -8.0 + 6.0 * k2;
            a2 = 4.0 - 6.0 * k + 3.0 * k2;
            b = 3.0 * k2;
        }
        let y = (b * (x + 2.0 * self.x1 + self.x2) - a1 * self.y1 - a2 * self.y2) / a0;
        self.x2 = self.x1;
        self.x1 = x;
        self.y2 = self.y1;
        self.y1 = y;
        y
    }

    fn speedup(&self) -> f64 {
        if self.updates >= self.ramp_len {
            return 1.0;
        }
        let frac = self.updates as f64 / self.ramp_len as f64;
        STARTUP_SPEEDUP * (1.0 - frac) + frac
    }
}

//! Pulse-width-modulated voltage source.
//!
//! The pulse pattern compares a fast sawtooth with the magnitude of a slow
//! sine: while the sawtooth is below `|sin|` the output follows the sign of
//! the sine, otherwise it is zero.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PwmSource {
    /// Amplitude in volts.
    pub amplitude: f64,
    /// Period of the modulating sine in seconds.
    pub period: f64,
    /// Number of sawtooth teeth per period.
    pub teeth: u32,
}

impl Default for PwmSource {
    fn default() -> Self {
        PwmSource {
            amplitude: 0.25,
            period: 0.02,
            teeth: 200,
        }
    }
}

impl PwmSource {
    pub fn new(amplitude: f64, period: f64, teeth: u32) -> Result<Self> {
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(Error::Material(format!("PWM amplitude must be >= 0, got {amplitude}")));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::Material(format!("PWM period must be > 0, got {period}")));
        }
        if teeth == 0 {
            return Err(Error::Material("PWM teeth count must be >= 1".into()));
        }
        Ok(PwmSource {
            amplitude,
            period,
            teeth,
        })
    }

    /// Sawtooth `frac(n t / T)`.
    pub fn sawtooth(&self, t: f64) -> f64 {
        let x = self.teeth as f64 / self.period * t;
        x - x.floor()
    }

    /// Normalized pulse pattern, one of `-1`, `0`, `+1`.
    pub fn pulse(&self, t: f64) -> i8 {
        let s = (2.0 * PI / self.period * t).sin();
        if self.sawtooth(t) - s.abs() < 0.0 {
            if s > 0.0 {
                1
            } else if s < 0.0 {
                -1
            } else {
                0
            }
        } else {
            0
        }
    }

    /// Source voltage in volts.
    pub fn voltage(&self, t: f64) -> f64 {
        self.amplitude * self.pulse(t) as f64
    }
}

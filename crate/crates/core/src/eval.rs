//! Split representation of an asymptotic value of `F`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::RegionTag;

/// Powers of `eps` in front of each expansion.
pub mod nu {
    pub const REGION_I: f64 = -1.5;
    pub const REGION_II: f64 = -4.0 / 3.0;
    pub const INNER: f64 = -1.5;
    pub const INNER_INNER: f64 = -7.0 / 6.0;
    pub const CORNER: f64 = -7.0 / 6.0;
    pub const TRANSITION: f64 = -1.0;
    pub const SMALL_X: f64 = -1.5;
}

/// `F ~ eps^nu * exp(phase_1/eps + phase_13/eps^{1/3} + phase_0) * amplitude`.
///
/// `phase_0` collects `O(1)` exponent terms that are kept out of the
/// amplitude so that it neither under- nor overflows.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LayerEval {
    pub nu: f64,
    pub phase_1: f64,
    pub phase_13: f64,
    pub phase_0: f64,
    pub amplitude: f64,
    pub eps: f64,
    pub tag: RegionTag,
    pub diagnostics: Vec<String>,
}

impl LayerEval {
    pub(crate) fn new(tag: RegionTag, eps: f64, nu: f64) -> Self {
        Self {
            nu,
            phase_1: 0.0,
            phase_13: 0.0,
            phase_0: 0.0,
            amplitude: 1.0,
            eps,
            tag,
            diagnostics: Vec::new(),
        }
    }

    /// Natural logarithm of the reconstructed value; `-inf` for a zero
    /// amplitude, NaN for a negative one.
    pub fn ln_value(&self) -> f64 {
        self.nu * self.eps.ln()
            + self.phase_1 / self.eps
            + self.phase_13 / self.eps.cbrt()
            + self.phase_0
            + self.amplitude.ln()
    }

    pub fn log10_value(&self) -> f64 {
        self.ln_value() / std::f64::consts::LN_10
    }

    /// The plain value when it is representable as a normal `f64`.
    pub fn value(&self) -> Result<f64> {
        if self.amplitude == 0.0 {
            return Ok(0.0);
        }
        let l = self.ln_value();
        if l.is_nan() {
            return Err(Error::Domain(format!("amplitude {} has no logarithm", self.amplitude)));
        }
        if !(-708.0..=709.0).contains(&l) {
            return Err(Error::Overflow { log10: l / std::f64::consts::LN_10 });
        }
        Ok(l.exp())
    }

    /// Fold an `O(1)` exponent `ln_amp` into the split form, keeping the
    /// amplitude inside the normal range.
    pub(crate) fn set_ln_amplitude(&mut self, ln_amp: f64, sign: f64) {
        if ln_amp.abs() < 600.0 {
            self.amplitude = sign * ln_amp.exp();
        } else {
            self.amplitude = sign;
            self.phase_0 += ln_amp;
            self.diagnostics
                .push(format!("amplitude moved into phase_0 (ln amplitude = {ln_amp:.6e})"));
        }
    }
}

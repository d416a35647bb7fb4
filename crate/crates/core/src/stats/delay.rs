//! RMS delay spread of a thresholded power delay profile.

use super::StatsError;
use crate::metadata::ThresholdPolicy;

/// Taps of `(delay_ns, power_mw)` with strictly increasing, non-negative
/// delays and positive powers, plus the receiver noise floor in mW.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerDelayProfile {
    taps: Vec<(f64, f64)>,
    noise_floor_mw: f64,
}

impl PowerDelayProfile {
    pub fn new(taps: Vec<(f64, f64)>, noise_floor_mw: f64) -> Result<Self, StatsError> {
        if taps.is_empty() {
            return Err(StatsError::InvalidProfile("no taps".into()));
        }
        if !(noise_floor_mw.is_finite() && noise_floor_mw > 0.0) {
            return Err(StatsError::InvalidProfile(format!(
                "noise floor must be > 0 mW, got {noise_floor_mw}"
            )));
        }
        let mut prev: Option<f64> = None;
        for &(delay, power) in &taps {
            if !(delay.is_finite() && delay >= 0.0) {
                return Err(StatsError::InvalidProfile(format!("bad delay {delay} ns")));
            }
            if prev.is_some_and(|p| delay <= p) {
                return Err(StatsError::InvalidProfile(format!(
                    "delays must strictly increase (at {delay} ns)"
                )));
            }
            if !(power.is_finite() && power > 0.0) {
                return Err(StatsError::InvalidProfile(format!(
                    "bad power {power} mW at {delay} ns"
                )));
            }
            prev = Some(delay);
        }
        Ok(Self {
            taps,
            noise_floor_mw,
        })
    }

    pub fn taps(&self) -> &[(f64, f64)] {
        &self.taps
    }

    pub fn noise_floor_mw(&self) -> f64 {
        self.noise_floor_mw
    }

    /// Threshold in dBm: the greater of `peak - rel` and `noise + abs`.
    pub fn threshold_dbm(&self, policy: &ThresholdPolicy) -> f64 {
        let peak = self.taps.iter().map(|t| t.1).fold(f64::MIN, f64::max);
        let rel = to_db(peak) - policy.rel_below_peak_db;
        let abs = to_db(self.noise_floor_mw) + policy.abs_above_noise_db;
        rel.max(abs)
    }

    /// Taps at or above the policy threshold.
    pub fn surviving_taps(&self, policy: &ThresholdPolicy) -> Vec<(f64, f64)> {
        let threshold = self.threshold_dbm(policy);
        self.taps
            .iter()
            .copied()
            .filter(|&(_, p)| to_db(p) >= threshold)
            .collect()
    }
}

fn to_db(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Square root of the power-weighted second central moment of the delays that
/// survive `policy`, in ns.
pub fn rms_delay_spread(
    pdp: &PowerDelayProfile,
    policy: &ThresholdPolicy,
) -> Result<f64, StatsError> {
    let taps = pdp.surviving_taps(policy);
    if taps.is_empty() {
        return Err(StatsError::AllTapsBelowThreshold);
    }
    let total: f64 = taps.iter().map(|t| t.1).sum();
    let mean = taps.iter().map(|&(d, p)| p * d).sum::<f64>() / total;
    // centered form of sum(P tau^2)/sum(P) - mean^2
    let var = taps
        .iter()
        .map(|&(d, p)| p * (d - mean) * (d - mean))
        .sum::<f64>()
        / total;
    Ok(var.max(0.0).sqrt())
}

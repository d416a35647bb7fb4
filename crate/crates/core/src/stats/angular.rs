//! Angular spreads: the circular (3GPP) spread of a power angular spectrum and
//! the log-domain mean over spatial lobes.

use super::StatsError;

/// Resultant lengths below this make the spread unbounded.
const MIN_RESULTANT: f64 = 1e-12;

/// `(angle_deg, power_mw)` samples of a power angular spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularPowerSample {
    samples: Vec<(f64, f64)>,
}

impl AngularPowerSample {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self, StatsError> {
        if samples.is_empty() {
            return Err(StatsError::InvalidSpectrum("no samples".into()));
        }
        for &(angle, power) in &samples {
            if !angle.is_finite() {
                return Err(StatsError::InvalidSpectrum(format!("bad angle {angle}")));
            }
            if !(power.is_finite() && power > 0.0) {
                return Err(StatsError::InvalidSpectrum(format!(
                    "bad power {power} at {angle} deg"
                )));
            }
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    /// `|sum P e^{j theta}| / sum P`, in [0, 1].
    pub fn resultant_length(&self) -> f64 {
        let (mut re, mut im, mut total) = (0.0, 0.0, 0.0);
        for &(angle, power) in &self.samples {
            let (s, c) = angle.to_radians().sin_cos();
            re += power * c;
            im += power * s;
            total += power;
        }
        (re.hypot(im) / total).min(1.0)
    }
}

/// Circular angular spread `sqrt(-2 ln r)` in degrees, where `r` is the
/// power-weighted resultant length.
pub fn angular_spread_3gpp(pas: &AngularPowerSample) -> Result<f64, StatsError> {
    let r = pas.resultant_length();
    if r < MIN_RESULTANT {
        return Err(StatsError::DegenerateSpectrum(r));
    }
    Ok((-2.0 * r.ln()).max(0.0).sqrt().to_degrees())
}

/// Per-lobe angular spreads in degrees; non-empty and strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct LobeSpreadSet {
    spreads_deg: Vec<f64>,
}

impl LobeSpreadSet {
    pub fn new(spreads_deg: Vec<f64>) -> Result<Self, StatsError> {
        if spreads_deg.is_empty() {
            return Err(StatsError::EmptyLobeSet);
        }
        if let Some(&bad) = spreads_deg.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(StatsError::NonPositiveSpread(bad));
        }
        Ok(Self { spreads_deg })
    }

    pub fn spreads_deg(&self) -> &[f64] {
        &self.spreads_deg
    }

    pub fn lobe_count(&self) -> usize {
        self.spreads_deg.len()
    }
}

/// `10^((1/L) sum log10(spread_l))`: the geometric mean of the lobe spreads.
/// Serves azimuth and zenith, arrival and departure alike.
pub fn mean_lobe_spread(lobes: &LobeSpreadSet) -> f64 {
    let l = lobes.lobe_count() as f64;
    let mean_log = lobes.spreads_deg.iter().map(|v| v.log10()).sum::<f64>() / l;
    10f64.powf(mean_log)
}

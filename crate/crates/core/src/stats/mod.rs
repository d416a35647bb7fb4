//! Derived statistics over point-data records and raw profiles.

mod angular;
mod cdf;
mod delay;
mod pathloss;
mod summary;

pub use angular::{angular_spread_3gpp, mean_lobe_spread, AngularPowerSample, LobeSpreadSet};
pub use cdf::{cdf_to_csv, empirical_cdf, quantile, CdfPoint};
pub use delay::{rms_delay_spread, PowerDelayProfile};
pub use pathloss::{ci_points, fit_ci_ple, fspl_1m, CiFitResult, Polarization, SPEED_OF_LIGHT_M_S};
pub use summary::{
    cross_pol_discrimination, group_summary, summarize_records, summary_to_csv, GroupKey,
    GroupSummary, Grouping,
};

use thiserror::Error;

use crate::record::{LinkState, PointRecord};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("frequency must be > 0 GHz, got {0}")]
    NonPositiveFrequency(f64),
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("distance {0} m is below the 1 m reference")]
    DistanceBelowReference(f64),
    #[error("all distances equal the 1 m reference; slope is undetermined")]
    DegenerateDistances,
    #[error("input contains a non-finite value")]
    NonFiniteInput,
    #[error("invalid power delay profile: {0}")]
    InvalidProfile(String),
    #[error("no tap survives the threshold")]
    AllTapsBelowThreshold,
    #[error("invalid angular power sample: {0}")]
    InvalidSpectrum(String),
    #[error("angular spectrum is degenerate (resultant length {0:e})")]
    DegenerateSpectrum(f64),
    #[error("lobe set is empty")]
    EmptyLobeSet,
    #[error("lobe spread must be > 0, got {0}")]
    NonPositiveSpread(f64),
    #[error("no values")]
    EmptyInput,
}

/// Two frequencies are the same carrier when they agree to 1e-9 relative.
pub fn same_frequency(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// AND-composed row filter. `None` fields match everything.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RecordFilter {
    pub frequency_ghz: Option<f64>,
    pub link_state: Option<LinkState>,
}

impl RecordFilter {
    pub fn matches(&self, record: &PointRecord) -> bool {
        self.frequency_ghz
            .is_none_or(|f| same_frequency(f, record.frequency_ghz))
            && self.link_state.is_none_or(|s| s == record.link_state)
    }

    pub fn select<'a>(&self, records: &'a [PointRecord]) -> Vec<&'a PointRecord> {
        records.iter().filter(|r| self.matches(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filter_composes_with_and() {
        let a = PointRecord::bare("x", 6.75, "TX1", "RX1", LinkState::Los, 5.0);
        let b = PointRecord::bare("x", 16.95, "TX1", "RX1", LinkState::Nlos, 5.0);
        let records = vec![a, b];
        assert_eq!(RecordFilter::default().select(&records).len(), 2);
        let f = RecordFilter {
            frequency_ghz: Some(6.75),
            link_state: Some(LinkState::Nlos),
        };
        assert!(f.select(&records).is_empty());
        let f = RecordFilter {
            frequency_ghz: Some(16.95),
            link_state: None,
        };
        assert_eq!(f.select(&records)[0].link_state, LinkState::Nlos);
    }
}

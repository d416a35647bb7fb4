//! Campaign metadata: who measured, where, and with which sounder settings.
//!
//! The sidecar is a TOML document with flat keys:
//!
//! ```toml
//! contributor = "NYU WIRELESS"
//! environment = "InH"
//! bandwidth_mhz = 1000.0
//! tx_hpbw_deg = 30.0
//! rx_hpbw_deg = 30.0
//! tx_gain_dbi = 15.0
//! rx_gain_dbi = 15.0
//! threshold_rel_db = 25.0   # optional, default 25
//! threshold_abs_db = 5.0    # optional, default 5
//! map_ref = "nyu-inh-370-jay"   # optional
//! date_range = "2024-02-20/2024-05-30"   # optional
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetadataError {
    #[error("missing field `{0}`")]
    MissingField(&'static str),
    #[error("invalid value for `{field}`: {reason}")]
    InvalidValue { field: String, reason: String },
}

impl MetadataError {
    fn invalid(field: &str, reason: impl Into<String>) -> Self {
        MetadataError::InvalidValue {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

/// 3GPP environment class of a campaign.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Environment {
    InH,
    InF,
    UMi,
    Other(String),
}

impl fmt::Display for Environment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Environment::InH => f.write_str("InH"),
            Environment::InF => f.write_str("InF"),
            Environment::UMi => f.write_str("UMi"),
            Environment::Other(name) => f.write_str(name),
        }
    }
}

impl FromStr for Environment {
    type Err = MetadataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(MetadataError::invalid("environment", "empty"));
        }
        Ok(match s.to_ascii_lowercase().as_str() {
            "inh" => Environment::InH,
            "inf" => Environment::InF,
            "umi" => Environment::UMi,
            _ => Environment::Other(s.to_string()),
        })
    }
}

impl Serialize for Environment {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// PDP thresholding rule: a tap survives when it is at or above the greater of
/// `peak - rel_below_peak_db` and `noise_floor + abs_above_noise_db`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdPolicy {
    pub rel_below_peak_db: f64,
    pub abs_above_noise_db: f64,
}

impl Default for ThresholdPolicy {
    fn default() -> Self {
        Self {
            rel_below_peak_db: 25.0,
            abs_above_noise_db: 5.0,
        }
    }
}

impl ThresholdPolicy {
    pub fn new(rel_below_peak_db: f64, abs_above_noise_db: f64) -> Result<Self, MetadataError> {
        positive("threshold_rel_db", rel_below_peak_db)?;
        positive("threshold_abs_db", abs_above_noise_db)?;
        Ok(Self {
            rel_below_peak_db,
            abs_above_noise_db,
        })
    }
}

impl fmt::Display for ThresholdPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "max(peak - {} dB, noise + {} dB)",
            self.rel_below_peak_db, self.abs_above_noise_db
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignMetadata {
    pub contributor: String,
    pub environment: Environment,
    pub bandwidth_mhz: f64,
    pub tx_hpbw_deg: f64,
    pub rx_hpbw_deg: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
    pub threshold: ThresholdPolicy,
    pub map_ref: Option<String>,
    pub date_range: Option<String>,
}

impl CampaignMetadata {
    /// Checks the numeric invariants: positive bandwidth, beamwidths in (0, 360],
    /// finite gains and a positive threshold policy.
    pub fn check(&self) -> Result<(), MetadataError> {
        if self.contributor.trim().is_empty() {
            return Err(MetadataError::invalid("contributor", "empty"));
        }
        positive("bandwidth_mhz", self.bandwidth_mhz)?;
        beamwidth("tx_hpbw_deg", self.tx_hpbw_deg)?;
        beamwidth("rx_hpbw_deg", self.rx_hpbw_deg)?;
        finite("tx_gain_dbi", self.tx_gain_dbi)?;
        finite("rx_gain_dbi", self.rx_gain_dbi)?;
        positive("threshold_rel_db", self.threshold.rel_below_peak_db)?;
        positive("threshold_abs_db", self.threshold.abs_above_noise_db)?;
        Ok(())
    }
}

fn finite(field: &str, v: f64) -> Result<(), MetadataError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(MetadataError::invalid(field, format!("{v} is not finite")))
    }
}

fn positive(field: &str, v: f64) -> Result<(), MetadataError> {
    finite(field, v)?;
    if v > 0.0 {
        Ok(())
    } else {
        Err(MetadataError::invalid(field, format!("{v} must be > 0")))
    }
}

fn beamwidth(field: &str, v: f64) -> Result<(), MetadataError> {
    positive(field, v)?;
    if v <= 360.0 {
        Ok(())
    } else {
        Err(MetadataError::invalid(
            field,
            format!("{v} exceeds 360 deg"),
        ))
    }
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawMetadata {
    contributor: Option<String>,
    environment: Option<String>,
    bandwidth_mhz: Option<f64>,
    tx_hpbw_deg: Option<f64>,
    rx_hpbw_deg: Option<f64>,
    tx_gain_dbi: Option<f64>,
    rx_gain_dbi: Option<f64>,
    threshold_rel_db: Option<f64>,
    threshold_abs_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    map_ref: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    date_range: Option<String>,
}

/// Parses a metadata sidecar. Threshold keys default to 25 / 5 dB when omitted.
pub fn parse_metadata(text: &str) -> Result<CampaignMetadata, MetadataError> {
    let raw: RawMetadata = toml::from_str(text).map_err(|e| MetadataError::InvalidValue {
        field: "document".into(),
        reason: e.message().to_string(),
    })?;
    let defaults = ThresholdPolicy::default();
    let meta = CampaignMetadata {
        contributor: raw
            .contributor
            .ok_or(MetadataError::MissingField("contributor"))?,
        environment: raw
            .environment
            .ok_or(MetadataError::MissingField("environment"))?
            .parse()?,
        bandwidth_mhz: raw
            .bandwidth_mhz
            .ok_or(MetadataError::MissingField("bandwidth_mhz"))?,
        tx_hpbw_deg: raw
            .tx_hpbw_deg
            .ok_or(MetadataError::MissingField("tx_hpbw_deg"))?,
        rx_hpbw_deg: raw
            .rx_hpbw_deg
            .ok_or(MetadataError::MissingField("rx_hpbw_deg"))?,
        tx_gain_dbi: raw
            .tx_gain_dbi
            .ok_or(MetadataError::MissingField("tx_gain_dbi"))?,
        rx_gain_dbi: raw
            .rx_gain_dbi
            .ok_or(MetadataError::MissingField("rx_gain_dbi"))?,
        threshold: ThresholdPolicy {
            rel_below_peak_db: raw.threshold_rel_db.unwrap_or(defaults.rel_below_peak_db),
            abs_above_noise_db: raw.threshold_abs_db.unwrap_or(defaults.abs_above_noise_db),
        },
        map_ref: raw.map_ref.filter(|s| !s.trim().is_empty()),
        date_range: raw.date_range.filter(|s| !s.trim().is_empty()),
    };
    meta.check()?;
    Ok(meta)
}

/// Renders metadata as a sidecar document accepted by [`parse_metadata`].
pub fn write_metadata(meta: &CampaignMetadata) -> String {
    let raw = RawMetadata {
        contributor: Some(meta.contributor.clone()),
        environment: Some(meta.environment.to_string()),
        bandwidth_mhz: Some(meta.bandwidth_mhz),
        tx_hpbw_deg: Some(meta.tx_hpbw_deg),
        rx_hpbw_deg: Some(meta.rx_hpbw_deg),
        tx_gain_dbi: Some(meta.tx_gain_dbi),
        rx_gain_dbi: Some(meta.rx_gain_dbi),
        threshold_rel_db: Some(meta.threshold.rel_below_peak_db),
        threshold_abs_db: Some(meta.threshold.abs_above_noise_db),
        map_ref: meta.map_ref.clone(),
        date_range: meta.date_range.clone(),
    };
    toml::to_string(&raw).expect("metadata fields are plain scalars")
}

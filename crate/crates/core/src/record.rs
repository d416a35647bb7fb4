//! One row of a point-data table and the per-row validation rules.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::stats::fspl_1m;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum LinkState {
    Los,
    Nlos,
    /// No usable signal; every measurement column is absent.
    Outage,
}

impl LinkState {
    pub fn as_str(&self) -> &'static str {
        match self {
            LinkState::Los => "LOS",
            LinkState::Nlos => "NLOS",
            LinkState::Outage => "OUTAGE",
        }
    }
}

impl fmt::Display for LinkState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownLinkState(pub String);

impl fmt::Display for UnknownLinkState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unknown link state `{}` (expected LOS, NLOS or OUTAGE)",
            self.0
        )
    }
}

impl std::error::Error for UnknownLinkState {}

impl FromStr for LinkState {
    type Err = UnknownLinkState;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "LOS" => Ok(LinkState::Los),
            "NLOS" => Ok(LinkState::Nlos),
            "OUTAGE" => Ok(LinkState::Outage),
            _ => Err(UnknownLinkState(s.to_string())),
        }
    }
}

/// Numeric columns of the point-data table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parameter {
    TrSeparation,
    OmniPlVv,
    OmniPlVh,
    MeanDirDs,
    OmniDs,
    MeanLobeAsa,
    OmniAsa,
    MeanLobeAsd,
    OmniAsd,
    MeanLobeZsa,
    OmniZsa,
    MeanLobeZsd,
    OmniZsd,
}

impl Parameter {
    pub const ALL: [Parameter; 13] = [
        Parameter::TrSeparation,
        Parameter::OmniPlVv,
        Parameter::OmniPlVh,
        Parameter::MeanDirDs,
        Parameter::OmniDs,
        Parameter::MeanLobeAsa,
        Parameter::OmniAsa,
        Parameter::MeanLobeAsd,
        Parameter::OmniAsd,
        Parameter::MeanLobeZsa,
        Parameter::OmniZsa,
        Parameter::MeanLobeZsd,
        Parameter::OmniZsd,
    ];

    /// Columns that an OUTAGE record leaves empty.
    pub const MEASUREMENTS: [Parameter; 12] = [
        Parameter::OmniPlVv,
        Parameter::OmniPlVh,
        Parameter::MeanDirDs,
        Parameter::OmniDs,
        Parameter::MeanLobeAsa,
        Parameter::OmniAsa,
        Parameter::MeanLobeAsd,
        Parameter::OmniAsd,
        Parameter::MeanLobeZsa,
        Parameter::OmniZsa,
        Parameter::MeanLobeZsd,
        Parameter::OmniZsd,
    ];

    /// Canonical column name.
    pub fn column(&self) -> &'static str {
        match self {
            Parameter::TrSeparation => "tr_sep_m",
            Parameter::OmniPlVv => "omni_pl_vv_db",
            Parameter::OmniPlVh => "omni_pl_vh_db",
            Parameter::MeanDirDs => "mean_dir_ds_ns",
            Parameter::OmniDs => "omni_ds_ns",
            Parameter::MeanLobeAsa => "mean_lobe_asa_deg",
            Parameter::OmniAsa => "omni_asa_deg",
            Parameter::MeanLobeAsd => "mean_lobe_asd_deg",
            Parameter::OmniAsd => "omni_asd_deg",
            Parameter::MeanLobeZsa => "mean_lobe_zsa_deg",
            Parameter::OmniZsa => "omni_zsa_deg",
            Parameter::MeanLobeZsd => "mean_lobe_zsd_deg",
            Parameter::OmniZsd => "omni_zsd_deg",
        }
    }

    pub fn unit(&self) -> &'static str {
        match self {
            Parameter::TrSeparation => "m",
            Parameter::OmniPlVv | Parameter::OmniPlVh => "dB",
            Parameter::MeanDirDs | Parameter::OmniDs => "ns",
            _ => "deg",
        }
    }

    pub fn is_path_loss(&self) -> bool {
        matches!(self, Parameter::OmniPlVv | Parameter::OmniPlVh)
    }

    pub fn is_spread(&self) -> bool {
        !self.is_path_loss() && *self != Parameter::TrSeparation
    }
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

impl Serialize for Parameter {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.column())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownParameter(pub String);

impl fmt::Display for UnknownParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown parameter `{}`", self.0)
    }
}

impl std::error::Error for UnknownParameter {}

impl FromStr for Parameter {
    type Err = UnknownParameter;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let wanted = s.trim().to_ascii_lowercase();
        Parameter::ALL
            .into_iter()
            .find(|p| p.column() == wanted)
            .ok_or_else(|| UnknownParameter(s.to_string()))
    }
}

/// One (frequency, TX, RX) link with its large-scale statistics.
///
/// Path losses are omnidirectional with antenna gains removed. Spreads are RMS
/// values: delay in ns, angles in degrees. `None` marks an absent measurement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointRecord {
    pub contributor: String,
    pub frequency_ghz: f64,
    pub tx_id: String,
    pub rx_id: String,
    pub link_state: LinkState,
    pub tr_separation_m: f64,
    pub omni_pl_vv_db: Option<f64>,
    pub omni_pl_vh_db: Option<f64>,
    pub mean_dir_ds_ns: Option<f64>,
    pub omni_ds_ns: Option<f64>,
    pub mean_lobe_asa_deg: Option<f64>,
    pub omni_asa_deg: Option<f64>,
    pub mean_lobe_asd_deg: Option<f64>,
    pub omni_asd_deg: Option<f64>,
    pub mean_lobe_zsa_deg: Option<f64>,
    pub omni_zsa_deg: Option<f64>,
    pub mean_lobe_zsd_deg: Option<f64>,
    pub omni_zsd_deg: Option<f64>,
}

impl PointRecord {
    /// A record with every measurement column absent.
    pub fn bare(
        contributor: impl Into<String>,
        frequency_ghz: f64,
        tx_id: impl Into<String>,
        rx_id: impl Into<String>,
        link_state: LinkState,
        tr_separation_m: f64,
    ) -> Self {
        Self {
            contributor: contributor.into(),
            frequency_ghz,
            tx_id: tx_id.into(),
            rx_id: rx_id.into(),
            link_state,
            tr_separation_m,
            omni_pl_vv_db: None,
            omni_pl_vh_db: None,
            mean_dir_ds_ns: None,
            omni_ds_ns: None,
            mean_lobe_asa_deg: None,
            omni_asa_deg: None,
            mean_lobe_asd_deg: None,
            omni_asd_deg: None,
            mean_lobe_zsa_deg: None,
            omni_zsa_deg: None,
            mean_lobe_zsd_deg: None,
            omni_zsd_deg: None,
        }
    }

    pub fn value(&self, param: Parameter) -> Option<f64> {
        match param {
            Parameter::TrSeparation => Some(self.tr_separation_m),
            Parameter::OmniPlVv => self.omni_pl_vv_db,
            Parameter::OmniPlVh => self.omni_pl_vh_db,
            Parameter::MeanDirDs => self.mean_dir_ds_ns,
            Parameter::OmniDs => self.omni_ds_ns,
            Parameter::MeanLobeAsa => self.mean_lobe_asa_deg,
            Parameter::OmniAsa => self.omni_asa_deg,
            Parameter::MeanLobeAsd => self.mean_lobe_asd_deg,
            Parameter::OmniAsd => self.omni_asd_deg,
            Parameter::MeanLobeZsa => self.mean_lobe_zsa_deg,
            Parameter::OmniZsa => self.omni_zsa_deg,
            Parameter::MeanLobeZsd => self.mean_lobe_zsd_deg,
            Parameter::OmniZsd => self.omni_zsd_deg,
        }
    }

    /// Sets a measurement column. `TrSeparation` is not optional and takes the
    /// value only when `Some`.
    pub fn set_value(&mut self, param: Parameter, value: Option<f64>) {
        let slot = match param {
            Parameter::TrSeparation => {
                if let Some(v) = value {
                    self.tr_separation_m = v;
                }
                return;
            }
            Parameter::OmniPlVv => &mut self.omni_pl_vv_db,
            Parameter::OmniPlVh => &mut self.omni_pl_vh_db,
            Parameter::MeanDirDs => &mut self.mean_dir_ds_ns,
            Parameter::OmniDs => &mut self.omni_ds_ns,
            Parameter::MeanLobeAsa => &mut self.mean_lobe_asa_deg,
            Parameter::OmniAsa => &mut self.omni_asa_deg,
            Parameter::MeanLobeAsd => &mut self.mean_lobe_asd_deg,
            Parameter::OmniAsd => &mut self.omni_asd_deg,
            Parameter::MeanLobeZsa => &mut self.mean_lobe_zsa_deg,
            Parameter::OmniZsa => &mut self.omni_zsa_deg,
            Parameter::MeanLobeZsd => &mut self.mean_lobe_zsd_deg,
            Parameter::OmniZsd => &mut self.omni_zsd_deg,
        };
        *slot = value;
    }

    pub fn with(mut self, param: Parameter, value: f64) -> Self {
        self.set_value(param, Some(value));
        self
    }

    /// Short human label, e.g. `6.75 GHz TX1-RX1`.
    pub fn label(&self) -> String {
        format!("{} GHz {}-{}", self.frequency_ghz, self.tx_id, self.rx_id)
    }
}

/// A broken invariant on one field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub field: &'static str,
    pub rule: String,
}

impl Violation {
    fn new(field: &'static str, rule: impl Into<String>) -> Self {
        Self {
            field,
            rule: rule.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

/// Lists every broken record invariant. An empty list means the record is valid.
///
/// Path losses are checked against the free-space loss at 1 m for the
/// record's own frequency, strictly (no tolerance).
pub fn validate_record(record: &PointRecord) -> Vec<Violation> {
    let mut out = Vec::new();

    if record.tx_id.trim().is_empty() {
        out.push(Violation::new("tx_id", "must not be empty"));
    }
    if record.rx_id.trim().is_empty() {
        out.push(Violation::new("rx_id", "must not be empty"));
    }

    let freq_ok = record.frequency_ghz.is_finite() && record.frequency_ghz > 0.0;
    if !freq_ok {
        out.push(Violation::new("frequency_ghz", "frequency_ghz > 0"));
    }
    if !(record.tr_separation_m.is_finite() && record.tr_separation_m > 0.0) {
        out.push(Violation::new("tr_separation_m", "tr_separation_m > 0"));
    }

    if record.link_state == LinkState::Outage {
        for param in Parameter::MEASUREMENTS {
            if record.value(param).is_some() {
                out.push(Violation::new(
                    param.column(),
                    "must be absent for an OUTAGE record",
                ));
            }
        }
        return out;
    }

    let floor = if freq_ok {
        fspl_1m(record.frequency_ghz).ok()
    } else {
        None
    };

    for param in Parameter::MEASUREMENTS {
        let Some(v) = record.value(param) else {
            continue;
        };
        if !v.is_finite() {
            out.push(Violation::new(param.column(), "must be finite"));
            continue;
        }
        if param.is_path_loss() {
            if let Some(floor) = floor {
                if v < floor {
                    out.push(Violation::new(
                        param.column(),
                        format!("below 1 m FSPL floor ({floor:.2} dB)"),
                    ));
                }
            }
        } else if v < 0.0 {
            out.push(Violation::new(param.column(), "spread must be >= 0"));
        }
    }
    out
}

//! Pooling datasets from several contributors.
//!
//! Every source is checked against a [`BaselineSpec`]: a minimum sounder
//! bandwidth, a coarsest allowed antenna beamwidth, and the exact PDP
//! threshold policy. Accepted sources are concatenated as-is; rejected ones
//! contribute nothing and are listed in the [`CompatibilityReport`].
//!
//! Baseline document (TOML):
//!
//! ```toml
//! min_bandwidth_mhz = 500.0
//! max_hpbw_deg = 45.0
//! threshold_rel_db = 25.0   # optional, default 25
//! threshold_abs_db = 5.0    # optional, default 5
//! ```

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, DatasetError, ProvenanceEntry, RecordKey};
use crate::metadata::{CampaignMetadata, Environment, MetadataError, ThresholdPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaselineSpec {
    pub min_bandwidth_mhz: f64,
    /// Coarsest half-power beamwidth a source may use, degrees.
    pub max_hpbw_deg: f64,
    pub threshold: ThresholdPolicy,
}

impl BaselineSpec {
    pub fn new(
        min_bandwidth_mhz: f64,
        max_hpbw_deg: f64,
        threshold: ThresholdPolicy,
    ) -> Result<Self, MetadataError> {
        for (field, v) in [
            ("min_bandwidth_mhz", min_bandwidth_mhz),
            ("max_hpbw_deg", max_hpbw_deg),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(MetadataError::InvalidValue {
                    field: field.into(),
                    reason: format!("{v} must be > 0"),
                });
            }
        }
        let threshold =
            ThresholdPolicy::new(threshold.rel_below_peak_db, threshold.abs_above_noise_db)?;
        Ok(Self {
            min_bandwidth_mhz,
            max_hpbw_deg,
            threshold,
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBaseline {
    min_bandwidth_mhz: Option<f64>,
    max_hpbw_deg: Option<f64>,
    threshold_rel_db: Option<f64>,
    threshold_abs_db: Option<f64>,
}

pub fn parse_baseline(text: &str) -> Result<BaselineSpec, MetadataError> {
    let raw: RawBaseline = toml::from_str(text).map_err(|e| MetadataError::InvalidValue {
        field: "document".into(),
        reason: e.message().to_string(),
    })?;
    let d = ThresholdPolicy::default();
    BaselineSpec::new(
        raw.min_bandwidth_mhz
            .ok_or(MetadataError::MissingField("min_bandwidth_mhz"))?,
        raw.max_hpbw_deg
            .ok_or(MetadataError::MissingField("max_hpbw_deg"))?,
        ThresholdPolicy {
            rel_below_peak_db: raw.threshold_rel_db.unwrap_or(d.rel_below_peak_db),
            abs_above_noise_db: raw.threshold_abs_db.unwrap_or(d.abs_above_noise_db),
        },
    )
}

#[derive(Debug, Clone, PartialEq)]
pub enum RejectReason {
    Bandwidth {
        actual_mhz: f64,
        required_mhz: f64,
    },
    TxBeamwidth {
        actual_deg: f64,
        max_deg: f64,
    },
    RxBeamwidth {
        actual_deg: f64,
        max_deg: f64,
    },
    ThresholdPolicyMismatch {
        actual: ThresholdPolicy,
        required: ThresholdPolicy,
    },
}

impl RejectReason {
    /// Short rule name.
    pub fn rule(&self) -> &'static str {
        match self {
            RejectReason::Bandwidth { .. } => "bandwidth",
            RejectReason::TxBeamwidth { .. } => "tx beamwidth",
            RejectReason::RxBeamwidth { .. } => "rx beamwidth",
            RejectReason::ThresholdPolicyMismatch { .. } => "threshold policy mismatch",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::Bandwidth {
                actual_mhz,
                required_mhz,
            } => {
                write!(
                    f,
                    "bandwidth: {actual_mhz} MHz is below the required {required_mhz} MHz"
                )
            }
            RejectReason::TxBeamwidth {
                actual_deg,
                max_deg,
            } => {
                write!(
                    f,
                    "tx beamwidth: {actual_deg} deg is coarser than {max_deg} deg"
                )
            }
            RejectReason::RxBeamwidth {
                actual_deg,
                max_deg,
            } => {
                write!(
                    f,
                    "rx beamwidth: {actual_deg} deg is coarser than {max_deg} deg"
                )
            }
            RejectReason::ThresholdPolicyMismatch { actual, required } => write!(
                f,
                "threshold policy mismatch: {}/{} dB, baseline requires {}/{} dB",
                actual.rel_below_peak_db,
                actual.abs_above_noise_db,
                required.rel_below_peak_db,
                required.abs_above_noise_db
            ),
        }
    }
}

impl Serialize for RejectReason {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("RejectReason", 2)?;
        s.serialize_field("rule", self.rule())?;
        s.serialize_field("detail", &self.to_string())?;
        s.end()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Accept,
    Reject(Vec<RejectReason>),
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept)
    }

    pub fn reasons(&self) -> &[RejectReason] {
        match self {
            Verdict::Accept => &[],
            Verdict::Reject(r) => r,
        }
    }
}

/// Checks one campaign against the baseline. Threshold policies must match
/// exactly; beamwidths at or below the baseline maximum are accepted.
pub fn check_compatibility(metadata: &CampaignMetadata, baseline: &BaselineSpec) -> Verdict {
    let mut reasons = Vec::new();
    if metadata.bandwidth_mhz < baseline.min_bandwidth_mhz {
        reasons.push(RejectReason::Bandwidth {
            actual_mhz: metadata.bandwidth_mhz,
            required_mhz: baseline.min_bandwidth_mhz,
        });
    }
    if metadata.tx_hpbw_deg > baseline.max_hpbw_deg {
        reasons.push(RejectReason::TxBeamwidth {
            actual_deg: metadata.tx_hpbw_deg,
            max_deg: baseline.max_hpbw_deg,
        });
    }
    if metadata.rx_hpbw_deg > baseline.max_hpbw_deg {
        reasons.push(RejectReason::RxBeamwidth {
            actual_deg: metadata.rx_hpbw_deg,
            max_deg: baseline.max_hpbw_deg,
        });
    }
    if metadata.threshold != baseline.threshold {
        reasons.push(RejectReason::ThresholdPolicyMismatch {
            actual: metadata.threshold,
            required: baseline.threshold,
        });
    }
    if reasons.is_empty() {
        Verdict::Accept
    } else {
        Verdict::Reject(reasons)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceVerdict {
    pub source: String,
    pub records: usize,
    pub accepted: bool,
    pub reasons: Vec<RejectReason>,
}

/// Lowest common denominator of the accepted sources.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveSpec {
    pub bandwidth_mhz: f64,
    pub tx_hpbw_deg: f64,
    pub rx_hpbw_deg: f64,
    pub threshold: ThresholdPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompatibilityReport {
    pub baseline: BaselineSpec,
    pub sources: Vec<SourceVerdict>,
    /// `None` when every source was rejected.
    pub effective: Option<EffectiveSpec>,
}

impl CompatibilityReport {
    pub fn all_accepted(&self) -> bool {
        self.sources.iter().all(|s| s.accepted)
    }

    /// Human-readable rendering.
    pub fn to_text(&self) -> String {
        let b = &self.baseline;
        let mut out = format!(
            "baseline: bandwidth >= {} MHz, HPBW <= {} deg, threshold {}/{} dB\n",
            b.min_bandwidth_mhz,
            b.max_hpbw_deg,
            b.threshold.rel_below_peak_db,
            b.threshold.abs_above_noise_db
        );
        for s in &self.sources {
            if s.accepted {
                out.push_str(&format!("ACCEPT {} ({} records)\n", s.source, s.records));
            } else {
                out.push_str(&format!("REJECT {} ({} records)\n", s.source, s.records));
                for r in &s.reasons {
                    out.push_str(&format!("  - {r}\n"));
                }
            }
        }
        match &self.effective {
            Some(e) => out.push_str(&format!(
                "pooled spec: bandwidth {} MHz, TX HPBW {} deg, RX HPBW {} deg, threshold {}/{} dB\n",
                e.bandwidth_mhz,
                e.tx_hpbw_deg,
                e.rx_hpbw_deg,
                e.threshold.rel_below_peak_db,
                e.threshold.abs_above_noise_db
            )),
            None => out.push_str("pooled spec: none (no source accepted)\n"),
        }
        out
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PoolError {
    #[error("no datasets to merge")]
    NoSources,
    #[error("record {key} appears in both `{first}` and `{second}`")]
    DuplicateKeyAcrossSources {
        key: Box<RecordKey>,
        first: String,
        second: String,
    },
    #[error("every source was rejected")]
    AllSourcesRejected(Box<CompatibilityReport>),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

fn common<T: Clone + PartialEq>(mut values: impl Iterator<Item = T>) -> Option<T> {
    let first = values.next()?;
    values.all(|v| v == first).then_some(first)
}

fn pooled_metadata(accepted: &[&Dataset], spec: &EffectiveSpec) -> CampaignMetadata {
    let metas: Vec<&CampaignMetadata> = accepted.iter().map(|d| d.metadata()).collect();
    let contributors: BTreeSet<&str> = metas.iter().map(|m| m.contributor.as_str()).collect();
    let fold_min =
        |f: fn(&CampaignMetadata) -> f64| metas.iter().map(|m| f(m)).fold(f64::INFINITY, f64::min);
    CampaignMetadata {
        contributor: contributors.into_iter().collect::<Vec<_>>().join(" + "),
        environment: common(metas.iter().map(|m| m.environment.clone()))
            .unwrap_or_else(|| Environment::Other("mixed".into())),
        bandwidth_mhz: spec.bandwidth_mhz,
        tx_hpbw_deg: spec.tx_hpbw_deg,
        rx_hpbw_deg: spec.rx_hpbw_deg,
        tx_gain_dbi: fold_min(|m| m.tx_gain_dbi),
        rx_gain_dbi: fold_min(|m| m.rx_gain_dbi),
        threshold: spec.threshold,
        map_ref: common(metas.iter().map(|m| m.map_ref.clone())).flatten(),
        date_range: common(metas.iter().map(|m| m.date_range.clone())).flatten(),
    }
}

/// Checks every source, then concatenates the accepted ones in input order.
///
/// Provenance of the pooled dataset is the accepted sources' provenance
/// entries sorted by source name. A record key present in two sources is an
/// error even if one of them is rejected.
pub fn merge(
    datasets: &[Dataset],
    baseline: &BaselineSpec,
) -> Result<(Dataset, CompatibilityReport), PoolError> {
    if datasets.is_empty() {
        return Err(PoolError::NoSources);
    }

    let mut owner: HashMap<RecordKey, usize> = HashMap::new();
    for (i, ds) in datasets.iter().enumerate() {
        for r in ds.records() {
            let key = RecordKey::of(r);
            if let Some(&j) = owner.get(&key) {
                if j != i {
                    return Err(PoolError::DuplicateKeyAcrossSources {
                        key: Box::new(key),
                        first: datasets[j].metadata().contributor.clone(),
                        second: ds.metadata().contributor.clone(),
                    });
                }
            }
            owner.insert(key, i);
        }
    }

    let verdicts: Vec<Verdict> = datasets
        .iter()
        .map(|d| check_compatibility(d.metadata(), baseline))
        .collect();
    let accepted: Vec<&Dataset> = datasets
        .iter()
        .zip(&verdicts)
        .filter(|(_, v)| v.is_accept())
        .map(|(d, _)| d)
        .collect();

    let effective = (!accepted.is_empty()).then(|| EffectiveSpec {
        bandwidth_mhz: accepted
            .iter()
            .map(|d| d.metadata().bandwidth_mhz)
            .fold(f64::INFINITY, f64::min),
        tx_hpbw_deg: accepted
            .iter()
            .map(|d| d.metadata().tx_hpbw_deg)
            .fold(0.0, f64::max),
        rx_hpbw_deg: accepted
            .iter()
            .map(|d| d.metadata().rx_hpbw_deg)
            .fold(0.0, f64::max),
        threshold: baseline.threshold,
    });

    let report = CompatibilityReport {
        baseline: *baseline,
        sources: datasets
            .iter()
            .zip(verdicts)
            .map(|(d, v)| SourceVerdict {
                source: d.metadata().contributor.clone(),
                records: d.len(),
                accepted: v.is_accept(),
                reasons: v.reasons().to_vec(),
            })
            .collect(),
        effective,
    };

    let Some(spec) = effective else {
        return Err(PoolError::AllSourcesRejected(Box::new(report)));
    };

    let metadata = pooled_metadata(&accepted, &spec);
    let records = accepted
        .iter()
        .flat_map(|d| d.records().iter().cloned())
        .collect();
    let mut provenance: Vec<ProvenanceEntry> = accepted
        .iter()
        .flat_map(|d| d.provenance().iter().cloned())
        .collect();
    provenance.sort_by(|a, b| a.source.cmp(&b.source).then(a.records.cmp(&b.records)));

    let pooled = Dataset::with_provenance(metadata, records, provenance)?;
    Ok((pooled, report))
}

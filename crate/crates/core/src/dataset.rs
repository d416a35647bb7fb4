use std::collections::HashSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::metadata::{CampaignMetadata, MetadataError};
use crate::record::{validate_record, PointRecord, Violation};

/// Uniqueness key of a record inside a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RecordKey {
    pub contributor: String,
    /// Bit pattern of the frequency; equal parsed text gives equal bits.
    frequency_bits: u64,
    pub tx_id: String,
    pub rx_id: String,
}

impl RecordKey {
    pub fn of(record: &PointRecord) -> Self {
        Self {
            contributor: record.contributor.clone(),
            // -0.0 and 0.0 are the same frequency
            frequency_bits: (record.frequency_ghz + 0.0).to_bits(),
            tx_id: record.tx_id.clone(),
            rx_id: record.rx_id.clone(),
        }
    }

    pub fn frequency_ghz(&self) -> f64 {
        f64::from_bits(self.frequency_bits)
    }
}

impl fmt::Display for RecordKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {} GHz, {}, {})",
            self.contributor,
            self.frequency_ghz(),
            self.tx_id,
            self.rx_id
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProvenanceEntry {
    pub source: String,
    pub records: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatasetError {
    #[error("duplicate record key {0}")]
    DuplicateKey(RecordKey),
    #[error("record {index} ({label}) is invalid: {}", join(.violations))]
    InvalidRecord {
        index: usize,
        label: String,
        violations: Vec<Violation>,
    },
    #[error(transparent)]
    Metadata(#[from] MetadataError),
}

fn join(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// A validated collection of records with its campaign metadata.
///
/// Construction guarantees that keys are unique and every record passes
/// [`validate_record`]; the fields are read-only afterwards.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    metadata: CampaignMetadata,
    records: Vec<PointRecord>,
    provenance: Vec<ProvenanceEntry>,
}

impl Dataset {
    /// Builds a single-source dataset; provenance is one entry named after the
    /// metadata contributor.
    pub fn new(
        metadata: CampaignMetadata,
        records: Vec<PointRecord>,
    ) -> Result<Self, DatasetError> {
        let provenance = vec![ProvenanceEntry {
            source: metadata.contributor.clone(),
            records: records.len(),
        }];
        Self::with_provenance(metadata, records, provenance)
    }

    pub fn with_provenance(
        metadata: CampaignMetadata,
        records: Vec<PointRecord>,
        provenance: Vec<ProvenanceEntry>,
    ) -> Result<Self, DatasetError> {
        metadata.check()?;
        let mut seen = HashSet::with_capacity(records.len());
        for (index, record) in records.iter().enumerate() {
            let violations = validate_record(record);
            if !violations.is_empty() {
                return Err(DatasetError::InvalidRecord {
                    index,
                    label: record.label(),
                    violations,
                });
            }
            let key = RecordKey::of(record);
            if !seen.insert(key.clone()) {
                return Err(DatasetError::DuplicateKey(key));
            }
        }
        Ok(Self {
            metadata,
            records,
            provenance,
        })
    }

    pub fn metadata(&self) -> &CampaignMetadata {
        &self.metadata
    }

    pub fn records(&self) -> &[PointRecord] {
        &self.records
    }

    pub fn provenance(&self) -> &[ProvenanceEntry] {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Appends records, keeping key uniqueness. On error the dataset is unchanged.
    pub fn append(&mut self, source: &str, records: Vec<PointRecord>) -> Result<(), DatasetError> {
        let mut seen: HashSet<RecordKey> = self.records.iter().map(RecordKey::of).collect();
        for (offset, record) in records.iter().enumerate() {
            let violations = validate_record(record);
            if !violations.is_empty() {
                return Err(DatasetError::InvalidRecord {
                    index: self.records.len() + offset,
                    label: record.label(),
                    violations,
                });
            }
            let key = RecordKey::of(record);
            if !seen.insert(key.clone()) {
                return Err(DatasetError::DuplicateKey(key));
            }
        }
        let count = records.len();
        self.records.extend(records);
        match self.provenance.iter_mut().find(|p| p.source == source) {
            Some(entry) => entry.records += count,
            None => self.provenance.push(ProvenanceEntry {
                source: source.to_string(),
                records: count,
            }),
        }
        Ok(())
    }

    pub fn into_parts(self) -> (CampaignMetadata, Vec<PointRecord>, Vec<ProvenanceEntry>) {
        (self.metadata, self.records, self.provenance)
    }
}

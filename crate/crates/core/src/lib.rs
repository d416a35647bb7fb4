//! Point-data tables for site-specific radio propagation statistics.
//!
//! A point-data table carries one row per measured (frequency, TX, RX) link
//! with its large-scale parameters: path loss, delay spread and angular
//! spreads. Campaign-wide measurement settings (bandwidth, beamwidths,
//! thresholding) travel alongside the table in a metadata sidecar.
//!
//! The crate covers:
//!
//! - domain types and per-record validation ([`record`], [`metadata`], [`dataset`])
//! - the delimited interchange format ([`tableio`])
//! - derived statistics: close-in path-loss fits, RMS delay spread, circular
//!   angular spread, mean-lobe aggregation, empirical CDFs, group summaries
//!   ([`stats`])
//! - multi-contributor pooling under a minimum measurement baseline ([`pooling`])
//! - site maps and separation consistency checks ([`sitemap`])
//!
//! The NYU WIRELESS InH campaign at 6.75 GHz and 16.95 GHz ships as a
//! reference dataset in [`fixture`].

pub mod dataset;
pub mod fixture;
pub mod metadata;
pub mod pooling;
pub mod record;
pub mod sitemap;
pub mod stats;
pub mod tableio;

pub use dataset::{Dataset, DatasetError, ProvenanceEntry, RecordKey};
pub use metadata::{CampaignMetadata, Environment, MetadataError, ThresholdPolicy};
pub use record::{validate_record, LinkState, PointRecord, Violation};

//! Per-group summaries of one table column.
//!
//! Log statistics are taken in the column's native unit. For delay spreads in
//! ns, the mean of log10(seconds) used by 3GPP tables is `mean_log10 - 9`.

use std::cmp::Ordering;

use serde::Serialize;

use crate::dataset::Dataset;
use crate::record::{LinkState, Parameter, PointRecord};
use crate::tableio::format_number;

/// Which keys split the records into groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grouping {
    pub by_frequency: bool,
    pub by_link_state: bool,
}

impl Default for Grouping {
    fn default() -> Self {
        Self {
            by_frequency: true,
            by_link_state: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupKey {
    pub frequency_ghz: Option<f64>,
    pub link_state: Option<LinkState>,
}

impl GroupKey {
    fn of(record: &PointRecord, grouping: Grouping) -> Self {
        Self {
            frequency_ghz: grouping.by_frequency.then_some(record.frequency_ghz),
            link_state: grouping.by_link_state.then_some(record.link_state),
        }
    }

    fn cmp_key(&self, other: &Self) -> Ordering {
        let f = match (self.frequency_ghz, other.frequency_ghz) {
            (Some(a), Some(b)) => a.total_cmp(&b),
            (a, b) => a.is_some().cmp(&b.is_some()),
        };
        f.then(self.link_state.cmp(&other.link_state))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    #[serde(flatten)]
    pub key: GroupKey,
    pub parameter: Parameter,
    /// Present values in the group.
    pub count: usize,
    /// Records in the group with the value absent.
    pub absent: usize,
    pub arithmetic_mean: f64,
    pub median: f64,
    /// Population standard deviation.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    /// Values entering the log statistics (strictly positive).
    pub log_count: usize,
    /// Present values left out of the log statistics because they are <= 0.
    pub log_skipped: usize,
    /// Mean of log10 values.
    pub mean_log10: Option<f64>,
    /// `10^mean_log10`: the geometric mean.
    pub log_mean: Option<f64>,
    /// Population standard deviation of log10 values.
    pub log_std: Option<f64>,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

fn summarize(key: GroupKey, parameter: Parameter, values: &[f64], absent: usize) -> GroupSummary {
    let (arithmetic_mean, std) = mean_std(values);
    let logs: Vec<f64> = values
        .iter()
        .filter(|v| **v > 0.0)
        .map(|v| v.log10())
        .collect();
    let (mean_log10, log_std) = if logs.is_empty() {
        (None, None)
    } else {
        let (m, s) = mean_std(&logs);
        (Some(m), Some(s))
    };
    GroupSummary {
        key,
        parameter,
        count: values.len(),
        absent,
        arithmetic_mean,
        median: median(values),
        std,
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        log_count: logs.len(),
        log_skipped: values.len() - logs.len(),
        mean_log10,
        log_mean: mean_log10.map(|m| 10f64.powf(m)),
        log_std,
    }
}

/// Summaries of `parameter` over `records`, one per group holding at least one
/// present value. Groups are ordered by frequency, then LOS, NLOS, OUTAGE.
/// Values enter the statistics in record order.
pub fn summarize_records(
    records: &[PointRecord],
    parameter: Parameter,
    grouping: Grouping,
) -> Vec<GroupSummary> {
    let mut groups: Vec<(GroupKey, Vec<f64>, usize)> = Vec::new();
    for record in records {
        let key = GroupKey::of(record, grouping);
        let idx = match groups.iter().position(|(k, _, _)| *k == key) {
            Some(i) => i,
            None => {
                groups.push((key, Vec::new(), 0));
                groups.len() - 1
            }
        };
        match record.value(parameter) {
            Some(v) => groups[idx].1.push(v),
            None => groups[idx].2 += 1,
        }
    }
    groups.sort_by(|a, b| a.0.cmp_key(&b.0));
    groups
        .into_iter()
        .filter(|(_, values, _)| !values.is_empty())
        .map(|(key, values, absent)| summarize(key, parameter, &values, absent))
        .collect()
}

pub fn group_summary(
    dataset: &Dataset,
    parameter: Parameter,
    grouping: Grouping,
) -> Vec<GroupSummary> {
    summarize_records(dataset.records(), parameter, grouping)
}

/// Cross-polarization discrimination: V-H minus V-V path loss, in dB.
pub fn cross_pol_discrimination(record: &PointRecord) -> Option<f64> {
    Some(record.omni_pl_vh_db? - record.omni_pl_vv_db?)
}

pub fn summary_to_csv(summaries: &[GroupSummary]) -> String {
    let opt = |v: Option<f64>| v.map(format_number).unwrap_or_else(|| "--".into());
    let mut out = String::from(
        "freq_ghz,loc,parameter,count,absent,arithmetic_mean,median,log_mean,std,log_std,min,max,log_skipped\n",
    );
    for s in summaries {
        let row = [
            s.key
                .frequency_ghz
                .map(format_number)
                .unwrap_or_else(|| "*".into()),
            s.key
                .link_state
                .map(|l| l.to_string())
                .unwrap_or_else(|| "*".into()),
            s.parameter.column().to_string(),
            s.count.to_string(),
            s.absent.to_string(),
            format_number(s.arithmetic_mean),
            format_number(s.median),
            opt(s.log_mean),
            format_number(s.std),
            opt(s.log_std),
            format_number(s.min),
            format_number(s.max),
            s.log_skipped.to_string(),
        ];
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

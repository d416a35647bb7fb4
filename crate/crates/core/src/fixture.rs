//! The NYU WIRELESS indoor-hotspot point-data table (6.75 GHz and 16.95 GHz,
//! 20 TX-RX links per band), bundled with its metadata sidecar and a
//! placeholder site map.

use crate::dataset::Dataset;
use crate::metadata::{parse_metadata, CampaignMetadata};
use crate::sitemap::{parse_sitemap, SiteMap};
use crate::tableio::parse_point_table;

pub const TABLE_I_CSV: &str = include_str!("../data/nyu_inh_point_data.csv");
pub const TABLE_I_METADATA: &str = include_str!("../data/nyu_inh_point_data.toml");
pub const INH_SITEMAP: &str = include_str!("../data/nyu_inh_sitemap.toml");

pub fn table_i_metadata() -> CampaignMetadata {
    parse_metadata(TABLE_I_METADATA).expect("bundled metadata is valid")
}

pub fn table_i() -> Dataset {
    parse_point_table(TABLE_I_CSV, &table_i_metadata()).expect("bundled table is valid")
}

/// Site map with point names only; no coordinates are published.
pub fn inh_sitemap() -> SiteMap {
    parse_sitemap(INH_SITEMAP).expect("bundled site map is valid")
}

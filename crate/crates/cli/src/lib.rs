//! Command implementations behind the `pointdata` binary.
//!
//! Each command returns a [`CommandOutcome`]; printing and the process exit
//! code are left to `main`.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use pointdata::fixture;
use pointdata::metadata::{parse_metadata, write_metadata};
use pointdata::pooling::{merge, parse_baseline, PoolError};
use pointdata::record::Parameter;
use pointdata::sitemap::{check_separations, parse_sitemap, SiteMap, DEFAULT_TOLERANCE_M};
use pointdata::stats::{
    cdf_to_csv, ci_points, empirical_cdf, fit_ci_ple, quantile, summarize_records, summary_to_csv,
    Grouping, Polarization, RecordFilter, StatsError,
};
use pointdata::tableio::{parse_point_table, read_point_rows, write_point_table, TableError};
use pointdata::{
    validate_record, CampaignMetadata, Dataset, Environment, LinkState, PointRecord, RecordKey,
};

/// Overrides the bundled fixture when no table path is given.
pub const FIXTURE_ENV: &str = "POINTDATA_FIXTURE";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATIONS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutcome {
    /// 0 success, 1 data violations or empty selection, 2 usage or parse error.
    pub code: i32,
    pub machine: Value,
    pub report: String,
}

impl CommandOutcome {
    fn ok(machine: Value, report: String) -> Self {
        Self {
            code: EXIT_OK,
            machine,
            report,
        }
    }

    fn error(code: i32, message: impl Into<String>) -> Self {
        let message = message.into();
        Self {
            code,
            machine: json!({ "error": message }),
            report: format!("error: {message}\n"),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "pointdata",
    version,
    about = "Validate, pool and summarize point-data propagation tables"
)]
pub struct Cli {
    /// Output style on stdout.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check every row against the record invariants.
    Validate(TableArgs),
    /// Fit the close-in path-loss model.
    Fit(FitArgs),
    /// Emit an empirical CDF of one column.
    Cdf(CdfArgs),
    /// Pool several tables under a compatibility baseline.
    Merge(MergeArgs),
    /// Per-group statistics of one column.
    Summary(SummaryArgs),
    /// Compare reported TR separations with map distances.
    Mapcheck(MapcheckArgs),
}

/// Input table. Without a path the bundled fixture is used, or the
/// file named by POINTDATA_FIXTURE. Metadata comes from --meta, else from a
/// sibling `<stem>.toml`.
#[derive(Debug, Clone, Default, Args)]
pub struct TableArgs {
    pub table: Option<PathBuf>,
    #[arg(long)]
    pub meta: Option<PathBuf>,
}

/// Row filters. All given filters must match (AND).
#[derive(Debug, Clone, Default, Args)]
pub struct FilterArgs {
    /// Carrier frequency in GHz.
    #[arg(long)]
    pub freq: Option<f64>,
    /// Link state: LOS, NLOS or OUTAGE.
    #[arg(long)]
    pub loc: Option<String>,
    /// Campaign environment (InH, InF, UMi, ...); compared with the metadata.
    #[arg(long)]
    pub env: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Model {
    /// Close-in free-space reference at 1 m.
    #[default]
    Ci,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Pol {
    #[default]
    Vv,
    Vh,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub table: TableArgs,
    #[arg(long)]
    pub freq: f64,
    #[arg(long)]
    pub loc: Option<String>,
    #[arg(long)]
    pub env: Option<String>,
    #[arg(long, value_enum, default_value_t = Model::Ci)]
    pub model: Model,
    #[arg(long, value_enum, default_value_t = Pol::Vv)]
    pub pol: Pol,
}

#[derive(Debug, Clone, Args)]
pub struct CdfArgs {
    #[command(flatten)]
    pub table: TableArgs,
    /// Column name, e.g. omni_ds_ns.
    #[arg(long)]
    pub param: String,
    #[command(flatten)]
    pub filter: FilterArgs,
    /// Write `value,probability` rows here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct MergeArgs {
    /// Tables to pool; each needs a sibling `<stem>.toml`.
    #[arg(required = true)]
    pub tables: Vec<PathBuf>,
    /// Baseline TOML: min_bandwidth_mhz, max_hpbw_deg, threshold_rel_db, threshold_abs_db.
    #[arg(long)]
    pub baseline: PathBuf,
    /// Pooled table; printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Pooled campaign metadata (TOML).
    #[arg(long)]
    pub out_meta: Option<PathBuf>,
    /// Compatibility report (JSON).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SummaryArgs {
    #[command(flatten)]
    pub table: TableArgs,
    #[arg(long)]
    pub param: String,
    /// Comma-separated keys from {freq, loc}; `none` pools everything.
    #[arg(long, default_value = "freq,loc")]
    pub groupby: String,
    #[command(flatten)]
    pub filter: FilterArgs,
}

#[derive(Debug, Clone, Args)]
pub struct MapcheckArgs {
    #[command(flatten)]
    pub table: TableArgs,
    /// Site map TOML; defaults to the bundled placeholder map.
    #[arg(long)]
    pub map: Option<PathBuf>,
    /// Allowed |reported - map| difference in metres.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE_M)]
    pub tolerance: f64,
}

pub fn run(cli: &Cli) -> CommandOutcome {
    match &cli.command {
        Command::Validate(a) => cmd_validate(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Cdf(a) => cmd_cdf(a),
        Command::Merge(a) => cmd_merge(a),
        Command::Summary(a) => cmd_summary(a),
        Command::Mapcheck(a) => cmd_mapcheck(a),
    }
}

type Outcome = Result<CommandOutcome, CommandOutcome>;

fn read_file(path: &Path) -> Result<String, CommandOutcome> {
    fs::read_to_string(path)
        .map_err(|e| CommandOutcome::error(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), CommandOutcome> {
    fs::write(path, text)
        .map_err(|e| CommandOutcome::error(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("toml")
}

fn load_metadata(path: &Path) -> Result<CampaignMetadata, CommandOutcome> {
    parse_metadata(&read_file(path)?)
        .map_err(|e| CommandOutcome::error(EXIT_USAGE, format!("{}: {e}", path.display())))
}

/// Table text, its display name, and its metadata.
fn load_source(args: &TableArgs) -> Result<(String, String, CampaignMetadata), CommandOutcome> {
    let explicit_meta = args.meta.as_deref().map(load_metadata).transpose()?;
    let (path, is_fixture) = match &args.table {
        Some(p) => (Some(p.clone()), false),
        None => (std::env::var_os(FIXTURE_ENV).map(PathBuf::from), true),
    };
    let Some(path) = path else {
        let meta = explicit_meta.unwrap_or_else(fixture::table_i_metadata);
        return Ok((
            fixture::TABLE_I_CSV.to_string(),
            "bundled fixture".into(),
            meta,
        ));
    };
    let text = read_file(&path)?;
    let meta = match explicit_meta {
        Some(m) => m,
        None if sidecar(&path).is_file() => load_metadata(&sidecar(&path))?,
        None if is_fixture => fixture::table_i_metadata(),
        None => {
            return Err(CommandOutcome::error(
                EXIT_USAGE,
                format!(
                    "{}: no metadata; pass --meta or add {}",
                    path.display(),
                    sidecar(&path).display()
                ),
            ))
        }
    };
    Ok((text, path.display().to_string(), meta))
}

fn table_error(source: &str, e: TableError) -> CommandOutcome {
    let code = match e {
        TableError::EmptyTable => EXIT_VIOLATIONS,
        _ => EXIT_USAGE,
    };
    CommandOutcome::error(code, format!("{source}: {e}"))
}

fn load_dataset(args: &TableArgs) -> Result<Dataset, CommandOutcome> {
    let (text, name, meta) = load_source(args)?;
    parse_point_table(&text, &meta).map_err(|e| table_error(&name, e))
}

fn parse_param(name: &str) -> Result<Parameter, CommandOutcome> {
    name.parse::<Parameter>()
        .map_err(|e| CommandOutcome::error(EXIT_USAGE, e.to_string()))
}

fn parse_loc(loc: Option<&str>) -> Result<Option<LinkState>, CommandOutcome> {
    loc.map(|s| {
        s.parse::<LinkState>()
            .map_err(|e| CommandOutcome::error(EXIT_USAGE, e.to_string()))
    })
    .transpose()
}

fn env_matches(dataset: &Dataset, env: Option<&str>) -> Result<bool, CommandOutcome> {
    let Some(env) = env else { return Ok(true) };
    let wanted: Environment = env
        .parse()
        .map_err(|e: pointdata::MetadataError| CommandOutcome::error(EXIT_USAGE, e.to_string()))?;
    Ok(dataset.metadata().environment == wanted)
}

fn select(
    dataset: &Dataset,
    freq: Option<f64>,
    loc: Option<&str>,
    env: Option<&str>,
) -> Result<Vec<PointRecord>, CommandOutcome> {
    let filter = RecordFilter {
        frequency_ghz: freq,
        link_state: parse_loc(loc)?,
    };
    if !env_matches(dataset, env)? {
        return Ok(Vec::new());
    }
    Ok(filter
        .select(dataset.records())
        .into_iter()
        .cloned()
        .collect())
}

fn no_matching_records() -> CommandOutcome {
    CommandOutcome::error(EXIT_VIOLATIONS, "no matching records")
}

#[derive(Serialize)]
struct RowViolation {
    line: u64,
    record: String,
    field: &'static str,
    rule: String,
}

pub fn cmd_validate(args: &TableArgs) -> CommandOutcome {
    validate_inner(args).unwrap_or_else(|e| e)
}

fn validate_inner(args: &TableArgs) -> Outcome {
    let (text, name, meta) = load_source(args)?;
    meta.check()
        .map_err(|e| CommandOutcome::error(EXIT_USAGE, format!("{name}: {e}")))?;
    let rows = read_point_rows(&text, &meta.contributor).map_err(|e| table_error(&name, e))?;

    let mut violations = Vec::new();
    let mut seen = HashSet::new();
    for row in &rows {
        for v in validate_record(&row.record) {
            violations.push(RowViolation {
                line: row.line,
                record: row.record.label(),
                field: v.field,
                rule: v.rule,
            });
        }
        if !seen.insert(RecordKey::of(&row.record)) {
            violations.push(RowViolation {
                line: row.line,
                record: row.record.label(),
                field: "key",
                rule: "duplicate (frequency, tx, rx)".into(),
            });
        }
    }

    let mut report = String::new();
    for v in &violations {
        report.push_str(&format!(
            "line {}: {}: {}: {}\n",
            v.line, v.record, v.field, v.rule
        ));
    }
    report.push_str(&format!(
        "{} records, {} violations\n",
        rows.len(),
        violations.len()
    ));
    let machine = json!({
        "source": name,
        "records": rows.len(),
        "violations": violations,
    });
    let code = if violations.is_empty() {
        EXIT_OK
    } else {
        EXIT_VIOLATIONS
    };
    Ok(CommandOutcome {
        code,
        machine,
        report,
    })
}

pub fn cmd_fit(args: &FitArgs) -> CommandOutcome {
    fit_inner(args).unwrap_or_else(|e| e)
}

fn fit_inner(args: &FitArgs) -> Outcome {
    let dataset = load_dataset(&args.table)?;
    let records = select(
        &dataset,
        Some(args.freq),
        args.loc.as_deref(),
        args.env.as_deref(),
    )?;
    let pol = match args.pol {
        Pol::Vv => Polarization::Vv,
        Pol::Vh => Polarization::Vh,
    };
    let points = ci_points(&records, &RecordFilter::default(), pol);
    if points.is_empty() {
        return Err(no_matching_records());
    }
    let fit = fit_ci_ple(&points, args.freq).map_err(|e| {
        let code = match e {
            StatsError::TooFewPoints { .. } | StatsError::DegenerateDistances => EXIT_VIOLATIONS,
            _ => EXIT_USAGE,
        };
        CommandOutcome::error(code, e.to_string())
    })?;

    let loc = args
        .loc
        .as_deref()
        .map(str::to_ascii_uppercase)
        .unwrap_or_else(|| "all".into());
    let pol_name = match args.pol {
        Pol::Vv => "V-V",
        Pol::Vh => "V-H",
    };
    let report = format!(
        "CI fit, {} GHz, {loc}, {pol_name}\nple          {:.4}\nsigma_sf_db  {:.4}\nn_points     {}\nfspl_1m_db   {:.4}\n",
        fit.frequency_ghz, fit.ple, fit.sigma_sf_db, fit.n_points, fit.fspl_1m_db
    );
    let machine = json!({
        "model": "ci",
        "link_state": loc,
        "polarization": pol_name,
        "frequency_ghz": fit.frequency_ghz,
        "ple": fit.ple,
        "sigma_sf_db": fit.sigma_sf_db,
        "n_points": fit.n_points,
        "fspl_1m_db": fit.fspl_1m_db,
    });
    Ok(CommandOutcome::ok(machine, report))
}

pub fn cmd_cdf(args: &CdfArgs) -> CommandOutcome {
    cdf_inner(args).unwrap_or_else(|e| e)
}

fn cdf_inner(args: &CdfArgs) -> Outcome {
    let param = parse_param(&args.param)?;
    let dataset = load_dataset(&args.table)?;
    let f = &args.filter;
    let records = select(&dataset, f.freq, f.loc.as_deref(), f.env.as_deref())?;
    let values: Vec<f64> = records.iter().filter_map(|r| r.value(param)).collect();
    if values.is_empty() {
        return Err(no_matching_records());
    }
    let cdf =
        empirical_cdf(&values).map_err(|e| CommandOutcome::error(EXIT_USAGE, e.to_string()))?;
    let median = quantile(&cdf, 0.5).expect("non-empty cdf reaches 1");
    let csv = cdf_to_csv(&cdf);

    let mut report = format!(
        "{}: {} values, median {} {}\n",
        param.column(),
        values.len(),
        median,
        param.unit()
    );
    match &args.out {
        Some(path) => {
            write_file(path, &csv)?;
            report.push_str(&format!("wrote {} rows to {}\n", cdf.len(), path.display()));
        }
        None => report.push_str(&csv),
    }
    let machine = json!({
        "parameter": param.column(),
        "count": values.len(),
        "median": median,
        "points": cdf,
    });
    Ok(CommandOutcome::ok(machine, report))
}

pub fn cmd_merge(args: &MergeArgs) -> CommandOutcome {
    merge_inner(args).unwrap_or_else(|e| e)
}

fn merge_inner(args: &MergeArgs) -> Outcome {
    let baseline_text = read_file(&args.baseline)?;
    let baseline = parse_baseline(&baseline_text).map_err(|e| {
        CommandOutcome::error(EXIT_USAGE, format!("{}: {e}", args.baseline.display()))
    })?;

    let mut datasets = Vec::with_capacity(args.tables.len());
    for path in &args.tables {
        datasets.push(load_dataset(&TableArgs {
            table: Some(path.clone()),
            meta: None,
        })?);
    }

    let (pooled, report) = match merge(&datasets, &baseline) {
        Ok(v) => v,
        Err(PoolError::AllSourcesRejected(report)) => {
            if let Some(path) = &args.report {
                write_file(path, &to_json(&*report))?;
            }
            let mut out = CommandOutcome::error(EXIT_VIOLATIONS, "every source was rejected");
            out.report = format!("{}{}", report.to_text(), out.report);
            out.machine = json!({ "error": "every source was rejected", "compatibility": *report });
            return Err(out);
        }
        Err(e) => return Err(CommandOutcome::error(EXIT_USAGE, e.to_string())),
    };

    let table = write_point_table(&pooled);
    let mut text = report.to_text();
    text.push_str(&format!(
        "pooled {} records from {} sources\n",
        pooled.len(),
        pooled.provenance().len()
    ));
    match &args.out {
        Some(path) => {
            write_file(path, &table)?;
            text.push_str(&format!("wrote {}\n", path.display()));
        }
        None => text.push_str(&table),
    }
    if let Some(path) = &args.out_meta {
        write_file(path, &write_metadata(pooled.metadata()))?;
    }
    if let Some(path) = &args.report {
        write_file(path, &to_json(&report))?;
    }

    let machine = json!({
        "records": pooled.len(),
        "provenance": pooled.provenance(),
        "metadata": pooled.metadata(),
        "compatibility": report,
    });
    let code = if report.all_accepted() {
        EXIT_OK
    } else {
        EXIT_VIOLATIONS
    };
    Ok(CommandOutcome {
        code,
        machine,
        report: text,
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn parse_grouping(spec: &str) -> Result<Grouping, CommandOutcome> {
    let mut g = Grouping {
        by_frequency: false,
        by_link_state: false,
    };
    for key in spec.split(',').map(str::trim).filter(|k| !k.is_empty()) {
        match key.to_ascii_lowercase().as_str() {
            "freq" => g.by_frequency = true,
            "loc" => g.by_link_state = true,
            "none" => {}
            other => {
                return Err(CommandOutcome::error(
                    EXIT_USAGE,
                    format!("unknown group key `{other}` (expected freq, loc or none)"),
                ))
            }
        }
    }
    Ok(g)
}

pub fn cmd_summary(args: &SummaryArgs) -> CommandOutcome {
    summary_inner(args).unwrap_or_else(|e| e)
}

fn summary_inner(args: &SummaryArgs) -> Outcome {
    let param = parse_param(&args.param)?;
    let grouping = parse_grouping(&args.groupby)?;
    let dataset = load_dataset(&args.table)?;
    if dataset.is_empty() {
        return Err(CommandOutcome::error(
            EXIT_VIOLATIONS,
            "table has no records",
        ));
    }
    let f = &args.filter;
    let records = select(&dataset, f.freq, f.loc.as_deref(), f.env.as_deref())?;
    let groups = summarize_records(&records, param, grouping);
    if groups.is_empty() {
        return Err(no_matching_records());
    }
    Ok(CommandOutcome::ok(
        json!({ "parameter": param.column(), "groups": groups }),
        summary_to_csv(&groups),
    ))
}

pub fn cmd_mapcheck(args: &MapcheckArgs) -> CommandOutcome {
    mapcheck_inner(args).unwrap_or_else(|e| e)
}

fn load_map(path: Option<&Path>) -> Result<SiteMap, CommandOutcome> {
    match path {
        None => Ok(fixture::inh_sitemap()),
        Some(p) => parse_sitemap(&read_file(p)?)
            .map_err(|e| CommandOutcome::error(EXIT_USAGE, format!("{}: {e}", p.display()))),
    }
}

fn mapcheck_inner(args: &MapcheckArgs) -> Outcome {
    if !(args.tolerance.is_finite() && args.tolerance >= 0.0) {
        return Err(CommandOutcome::error(EXIT_USAGE, "tolerance must be >= 0"));
    }
    let dataset = load_dataset(&args.table)?;
    let map = load_map(args.map.as_deref())?;
    let result = check_separations(dataset.records(), &map, args.tolerance);

    let mut report = String::new();
    for m in &result.mismatches {
        report.push_str(&format!(
            "MISMATCH {} GHz {}-{}: reported {} m, map {:.2} m (off by {:.2} m)\n",
            m.frequency_ghz, m.tx_id, m.rx_id, m.reported_m, m.map_m, m.difference_m
        ));
    }
    for u in &result.unresolved {
        report.push_str(&format!(
            "UNRESOLVED {} GHz {}-{}: {}\n",
            u.frequency_ghz, u.tx_id, u.rx_id, u.reason
        ));
    }
    if !result.unresolved.is_empty() {
        report.push_str(&format!(
            "warning: {} of {} links could not be placed on map `{}`\n",
            result.unresolved.len(),
            dataset.len(),
            map.map_id
        ));
    }
    report.push_str(&format!(
        "{} links checked, {} mismatches (tolerance {} m)\n",
        result.checked,
        result.mismatches.len(),
        args.tolerance
    ));
    let machine = json!({ "map_id": map.map_id, "tolerance_m": args.tolerance, "result": result });
    let code = if result.mismatches.is_empty() {
        EXIT_OK
    } else {
        EXIT_VIOLATIONS
    };
    Ok(CommandOutcome {
        code,
        machine,
        report,
    })
}

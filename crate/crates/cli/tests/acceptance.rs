//! Acceptance gate. Prints one `[PASS]`/`[FAIL]` line per criterion and exits
//! non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use pointdata::fixture;
use pointdata::pooling::{merge, BaselineSpec};
use pointdata::record::Parameter;
use pointdata::stats::{
    angular_spread_3gpp, ci_points, empirical_cdf, fit_ci_ple, group_summary, mean_lobe_spread,
    rms_delay_spread, AngularPowerSample, Grouping, LobeSpreadSet, Polarization, PowerDelayProfile,
    RecordFilter,
};
use pointdata::tableio::{parse_point_table, write_point_table};
use pointdata::{Dataset, LinkState, PointRecord, ThresholdPolicy};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

type Check = Result<String, String>;
type Criterion = (&'static str, &'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn ple(ds: &Dataset, freq: f64, loc: LinkState) -> f64 {
    let filter = RecordFilter {
        frequency_ghz: Some(freq),
        link_state: Some(loc),
    };
    fit_ci_ple(&ci_points(ds.records(), &filter, Polarization::Vv), freq)
        .expect("fit on fixture")
        .ple
}

fn within(got: f64, expected: f64, tol: f64) -> bool {
    (got - expected).abs() <= tol
}

fn ac1() -> Check {
    let start = Instant::now();
    let ds = fixture::table_i();
    let n = ple(&ds, 6.75, LinkState::Los);
    let elapsed = start.elapsed();
    ensure(
        within(n, 1.34, 0.02),
        format!("ple {n:.4}, expected 1.34 +/- 0.02"),
    )?;
    ensure(
        elapsed < Duration::from_secs(1),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!("ple {n:.4} in {elapsed:?}"))
}

fn ac2() -> Check {
    let n = ple(&fixture::table_i(), 6.75, LinkState::Nlos);
    ensure(
        within(n, 2.72, 0.02),
        format!("ple {n:.4}, expected 2.72 +/- 0.02"),
    )?;
    Ok(format!("ple {n:.4}"))
}

fn ac3() -> Check {
    let ds = fixture::table_i();
    let los = ple(&ds, 16.95, LinkState::Los);
    let nlos = ple(&ds, 16.95, LinkState::Nlos);
    ensure(
        within(los, 1.32, 0.02),
        format!("LOS ple {los:.4}, expected 1.32 +/- 0.02"),
    )?;
    ensure(
        within(nlos, 3.05, 0.02),
        format!("NLOS ple {nlos:.4}, expected 3.05 +/- 0.02"),
    )?;
    Ok(format!("LOS {los:.4}, NLOS {nlos:.4}"))
}

fn ac4() -> Check {
    let ds = parse_point_table(fixture::TABLE_I_CSV, &fixture::table_i_metadata())
        .map_err(|e| e.to_string())?;
    ensure(ds.len() == 40, format!("{} records", ds.len()))?;
    for f in [6.75, 16.95] {
        for (loc, want) in [(LinkState::Los, 7), (LinkState::Nlos, 13)] {
            let got = ds
                .records()
                .iter()
                .filter(|r| r.frequency_ghz == f && r.link_state == loc)
                .count();
            ensure(
                got == want,
                format!("{f} GHz {loc}: {got} records, expected {want}"),
            )?;
        }
    }
    let absent = |f: f64| {
        ds.records()
            .iter()
            .filter(|r| r.frequency_ghz == f && r.omni_pl_vh_db.is_none())
            .count()
    };
    // The published table has three "--" V-H cells in the 6.75 GHz block and
    // a fourth in the 16.95 GHz block.
    ensure(
        absent(6.75) == 3,
        format!("{} absent V-H at 6.75 GHz", absent(6.75)),
    )?;
    ensure(
        absent(16.95) == 1,
        format!("{} absent V-H at 16.95 GHz", absent(16.95)),
    )?;
    let back =
        parse_point_table(&write_point_table(&ds), ds.metadata()).map_err(|e| e.to_string())?;
    ensure(back == ds, "round trip changed a field")?;
    Ok("40 records, 7 LOS + 13 NLOS per band, 3 absent V-H at 6.75 GHz (+1 at 16.95 GHz), round trip identical".into())
}

fn ac5() -> Check {
    let ds = fixture::table_i();
    let groups = group_summary(&ds, Parameter::OmniDs, Grouping::default());
    let find = |f: f64, loc: LinkState| {
        groups
            .iter()
            .find(|g| g.key.frequency_ghz == Some(f) && g.key.link_state == Some(loc))
            .expect("group present")
    };

    // 6.75 GHz LOS omni DS column, typed in from the table.
    let column = [21.4f64, 47.5, 100.0, 69.6, 58.0, 9.1, 20.8];
    let oracle = 10f64.powf(column.iter().map(|v| v.log10()).sum::<f64>() / column.len() as f64);
    let los = find(6.75, LinkState::Los)
        .log_mean
        .expect("positive values");
    ensure(
        los == oracle,
        format!("log mean {los} != recomputation {oracle}"),
    )?;
    let rel = (los - 37.7).abs() / 37.7;
    ensure(
        rel <= 0.10,
        format!("log mean {los:.2} ns is {:.1}% from 37.7 ns", rel * 100.0),
    )?;

    let nlos = find(6.75, LinkState::Nlos).arithmetic_mean;
    let rel_n = (nlos - 48.0).abs() / 48.0;
    ensure(
        rel_n <= 0.05,
        format!("NLOS mean {nlos:.2} ns is {:.1}% from 48 ns", rel_n * 100.0),
    )?;
    Ok(format!(
        "LOS log-domain mean {los:.2} ns ({:.1}% from 37.7), NLOS arithmetic mean {nlos:.2} ns ({:.1}% from 48)",
        rel * 100.0,
        rel_n * 100.0
    ))
}

fn runner() -> TestRunner {
    TestRunner::new(Config {
        cases: 256,
        failure_persistence: None,
        ..Config::default()
    })
}

fn property<S: Strategy>(
    name: &str,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner()
        .run(&strategy, test)
        .map_err(|e| format!("{name}: {e}"))
}

fn ac6() -> Check {
    property(
        "CI exponent recovery",
        (
            prop::collection::vec(1.0f64..1000.0, 2..40),
            0.5f64..6.0,
            0.5f64..100.0,
        ),
        |(d, n, f)| {
            let anchor = pointdata::stats::fspl_1m(f).unwrap();
            prop_assume!(d.iter().any(|x| *x > 1.0 + 1e-6));
            let pts: Vec<_> = d
                .iter()
                .map(|&x| (x, anchor + 10.0 * n * x.log10()))
                .collect();
            let fit = fit_ci_ple(&pts, f).unwrap();
            prop_assert!((fit.ple - n).abs() <= 1e-12 * n);
            Ok(())
        },
    )?;
    property(
        "residual orthogonality",
        prop::collection::vec((1.5f64..1000.0, 40.0f64..180.0), 2..40),
        |pts| {
            let fit = fit_ci_ple(&pts, 6.75).unwrap();
            let (mut dot, mut scale) = (0.0, 0.0);
            for &(d, pl) in &pts {
                let b = 10.0 * d.log10();
                let r = pl - fit.predict_db(d);
                dot += r * b;
                scale += (r * b).abs() + b * b;
            }
            prop_assert!(dot.abs() <= 1e-9 * scale);
            Ok(())
        },
    )?;
    property(
        "RMS DS shift and scale invariance",
        (
            prop::collection::vec((0.1f64..50.0, 1e-3f64..1.0), 1..20),
            0.0f64..1000.0,
            1e-3f64..1e3,
        ),
        |(gaps, shift, scale)| {
            let mut t = 0.0;
            let taps: Vec<_> = gaps
                .iter()
                .map(|&(g, p)| {
                    t += g;
                    (t, p)
                })
                .collect();
            let policy = ThresholdPolicy::default();
            let base = rms_delay_spread(
                &PowerDelayProfile::new(taps.clone(), 1e-9).unwrap(),
                &policy,
            )
            .unwrap();
            let moved: Vec<_> = taps.iter().map(|&(d, p)| (d + shift, p * scale)).collect();
            let other = rms_delay_spread(
                &PowerDelayProfile::new(moved, 1e-9 * scale).unwrap(),
                &policy,
            )
            .unwrap();
            prop_assert!((base - other).abs() <= 1e-6 * (1.0 + base));
            Ok(())
        },
    )?;
    property(
        "angular spread rotation invariance",
        (
            prop::collection::vec((-180.0f64..180.0, 0.01f64..10.0), 1..12),
            -720.0f64..720.0,
        ),
        |(samples, rot)| {
            let pas = AngularPowerSample::new(samples.clone()).unwrap();
            prop_assume!(pas.resultant_length() > 1e-6);
            let base = angular_spread_3gpp(&pas).unwrap();
            let turned: Vec<_> = samples.iter().map(|&(a, p)| (a + rot, p)).collect();
            let other = angular_spread_3gpp(&AngularPowerSample::new(turned).unwrap()).unwrap();
            prop_assert!((base - other).abs() <= 1e-5 * (1.0 + base));
            Ok(())
        },
    )?;
    let two_mass =
        angular_spread_3gpp(&AngularPowerSample::new(vec![(30.0, 1.0), (-30.0, 1.0)]).unwrap())
            .unwrap();
    ensure(
        within(two_mass, 30.74, 0.01),
        format!("+/-30 deg spread {two_mass}"),
    )?;
    property(
        "mean-lobe homogeneity and permutation",
        (prop::collection::vec(0.1f64..200.0, 1..10), 0.01f64..100.0),
        |(v, c)| {
            let base = mean_lobe_spread(&LobeSpreadSet::new(v.clone()).unwrap());
            let scaled =
                mean_lobe_spread(&LobeSpreadSet::new(v.iter().map(|x| x * c).collect()).unwrap());
            prop_assert!((scaled - c * base).abs() <= 1e-10 * c * base);
            let mut rev = v.clone();
            rev.reverse();
            prop_assert!(
                (mean_lobe_spread(&LobeSpreadSet::new(rev).unwrap()) - base).abs() <= 1e-12 * base
            );
            Ok(())
        },
    )?;
    property(
        "CDF monotonicity",
        prop::collection::vec(-1e6f64..1e6, 1..200),
        |v| {
            let cdf = empirical_cdf(&v).unwrap();
            prop_assert_eq!(cdf.last().unwrap().probability, 1.0);
            for w in cdf.windows(2) {
                prop_assert!(w[0].value < w[1].value && w[0].probability < w[1].probability);
            }
            Ok(())
        },
    )?;
    let ds = fixture::table_i();
    let mut groups = 0;
    for p in Parameter::ALL {
        for g in group_summary(&ds, p, Grouping::default()) {
            let gm = g.log_mean.ok_or(format!("{p}: no log mean"))?;
            ensure(
                g.min <= gm * (1.0 + 1e-12)
                    && gm <= g.arithmetic_mean * (1.0 + 1e-12)
                    && g.arithmetic_mean <= g.max,
                format!("AM-GM ordering broken for {p} {:?}", g.key),
            )?;
            groups += 1;
        }
    }
    Ok(format!(
        "all property suites hold; +/-30 deg spread {two_mass:.4}; AM-GM on {groups} column groups"
    ))
}

fn synthetic(name: &str, threshold: ThresholdPolicy) -> Dataset {
    let mut meta = fixture::table_i_metadata();
    meta.contributor = name.into();
    meta.threshold = threshold;
    let records = (1..=5)
        .map(|i| {
            PointRecord::bare(
                name,
                6.75,
                "TXs",
                format!("RX{i}"),
                LinkState::Nlos,
                10.0 * i as f64,
            )
            .with(Parameter::OmniPlVv, 80.0 + i as f64)
        })
        .collect();
    Dataset::new(meta, records).expect("synthetic dataset")
}

fn multiset(ds: &Dataset) -> Vec<String> {
    let mut v: Vec<_> = ds.records().iter().map(|r| format!("{r:?}")).collect();
    v.sort();
    v
}

fn ac7() -> Check {
    let baseline = BaselineSpec::new(500.0, 45.0, ThresholdPolicy::default()).unwrap();
    let a = fixture::table_i();
    let b = synthetic("Synthetic Lab", ThresholdPolicy::default());
    let (pooled, report) = merge(&[a.clone(), b.clone()], &baseline).map_err(|e| e.to_string())?;
    let total: usize = pooled.provenance().iter().map(|p| p.records).sum();
    ensure(
        pooled.len() == 45 && total == 45,
        format!(
            "pooled {} records, provenance sums to {total}",
            pooled.len()
        ),
    )?;
    ensure(report.all_accepted(), "compatible contributor rejected")?;

    let (swapped, _) = merge(&[b, a.clone()], &baseline).map_err(|e| e.to_string())?;
    ensure(
        multiset(&pooled) == multiset(&swapped),
        "merge depends on input order",
    )?;
    ensure(
        pooled.provenance() == swapped.provenance(),
        "provenance depends on input order",
    )?;

    let bad = synthetic("Other Lab", ThresholdPolicy::new(20.0, 5.0).unwrap());
    let (_, report) = merge(&[a, bad], &baseline).map_err(|e| e.to_string())?;
    let rules: Vec<_> = report.sources[1].reasons.iter().map(|r| r.rule()).collect();
    ensure(
        rules == ["threshold policy mismatch"],
        format!("rejection rules {rules:?}"),
    )?;
    Ok("45 pooled records, provenance sums to 45, order-invariant, 20/5 dB policy rejected by `threshold policy mismatch`".into())
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_pointdata"))
        .args(args)
        .env_remove("POINTDATA_FIXTURE")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(
        out.status.success(),
        format!("`{}` exited with {}", args.join(" "), out.status),
    )?;
    Ok(out.stdout)
}

fn ac8(suite_start: Instant) -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let csv = |n: &str| dir.path().join(n).display().to_string();
    let runs: [Vec<&str>; 4] = [
        vec!["fit", "--freq", "6.75", "--loc", "LOS"],
        vec![
            "--format", "json", "fit", "--freq", "16.95", "--loc", "NLOS",
        ],
        vec![
            "cdf",
            "--param",
            "omni_ds_ns",
            "--freq",
            "6.75",
            "--loc",
            "LOS",
        ],
        vec!["--format", "json", "cdf", "--param", "omni_asa_deg"],
    ];
    for args in &runs {
        ensure(
            run_cli(args)? == run_cli(args)?,
            format!("`{}` differs across runs", args.join(" ")),
        )?;
    }
    let (a, b) = (csv("a.csv"), csv("b.csv"));
    run_cli(&["cdf", "--param", "omni_ds_ns", "--out", &a])?;
    run_cli(&["cdf", "--param", "omni_ds_ns", "--out", &b])?;
    let read = |p: &str| std::fs::read(Path::new(p)).map_err(|e| e.to_string());
    ensure(read(&a)? == read(&b)?, "CDF files differ across runs")?;

    let elapsed = suite_start.elapsed();
    ensure(
        elapsed < Duration::from_secs(30),
        format!("acceptance run took {elapsed:?}"),
    )?;
    Ok(format!(
        "fit and cdf outputs byte-identical across runs; acceptance run {elapsed:.2?}"
    ))
}

fn main() {
    let start = Instant::now();
    let criteria: [Criterion; 7] = [
        ("AC1", "CI fit 6.75 GHz LOS", ac1),
        ("AC2", "CI fit 6.75 GHz NLOS", ac2),
        ("AC3", "CI fit 16.95 GHz LOS/NLOS", ac3),
        ("AC4", "fixture integrity", ac4),
        ("AC5", "delay-spread summaries", ac5),
        ("AC6", "property suites", ac6),
        ("AC7", "pooling", ac7),
    ];
    let mut results: Vec<(&str, &str, Check)> = criteria
        .iter()
        .map(|(id, name, f)| (*id, *name, f()))
        .collect();
    results.push(("AC8", "CLI determinism", ac8(start)));

    let mut failed = 0;
    for (id, name, result) in &results {
        match result {
            Ok(detail) => println!("[PASS] {id} {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {id} {name}: {why}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

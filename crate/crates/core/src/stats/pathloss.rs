//! Close-in (CI) free-space reference path-loss model.
//!
//! `PL(d) = FSPL(f, 1 m) + 10 n log10(d) + X_sigma`, with the intercept pinned
//! at the free-space loss at 1 m. The exponent `n` is the least-squares slope
//! through that anchor, which has a closed form.

use serde::Serialize;

use super::{RecordFilter, StatsError};
use crate::record::PointRecord;

pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

/// Free-space path loss at a 1 m reference distance, in dB.
pub fn fspl_1m(frequency_ghz: f64) -> Result<f64, StatsError> {
    if !(frequency_ghz.is_finite() && frequency_ghz > 0.0) {
        return Err(StatsError::NonPositiveFrequency(frequency_ghz));
    }
    let f_hz = frequency_ghz * 1e9;
    Ok(20.0 * (4.0 * std::f64::consts::PI * f_hz / SPEED_OF_LIGHT_M_S).log10())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CiFitResult {
    pub frequency_ghz: f64,
    /// Path-loss exponent `n`.
    pub ple: f64,
    /// Population standard deviation of the dB residuals.
    pub sigma_sf_db: f64,
    pub n_points: usize,
    pub fspl_1m_db: f64,
}

impl CiFitResult {
    pub fn predict_db(&self, distance_m: f64) -> f64 {
        self.fspl_1m_db + 10.0 * self.ple * distance_m.log10()
    }
}

/// Fits the CI model to `(distance_m, path_loss_db)` pairs.
pub fn fit_ci_ple(points: &[(f64, f64)], frequency_ghz: f64) -> Result<CiFitResult, StatsError> {
    let anchor = fspl_1m(frequency_ghz)?;
    if points.len() < 2 {
        return Err(StatsError::TooFewPoints {
            needed: 2,
            got: points.len(),
        });
    }
    for &(d, pl) in points {
        if !d.is_finite() || !pl.is_finite() {
            return Err(StatsError::NonFiniteInput);
        }
        if d < 1.0 {
            return Err(StatsError::DistanceBelowReference(d));
        }
    }

    // A_i = PL_i - FSPL(1 m), B_i = 10 log10(d_i); n = sum(A B) / sum(B^2)
    let (sum_ab, sum_bb) = points.iter().fold((0.0, 0.0), |(ab, bb), &(d, pl)| {
        let a = pl - anchor;
        let b = 10.0 * d.log10();
        (ab + a * b, bb + b * b)
    });
    if sum_bb == 0.0 {
        return Err(StatsError::DegenerateDistances);
    }
    let ple = sum_ab / sum_bb;

    let n = points.len() as f64;
    let sum_sq: f64 = points
        .iter()
        .map(|&(d, pl)| {
            let r = (pl - anchor) - ple * 10.0 * d.log10();
            r * r
        })
        .sum();

    Ok(CiFitResult {
        frequency_ghz,
        ple,
        sigma_sf_db: (sum_sq / n).sqrt(),
        n_points: points.len(),
        fspl_1m_db: anchor,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Polarization {
    /// Co-polarized, V-V.
    #[default]
    Vv,
    /// Cross-polarized, V-H.
    Vh,
}

/// Collects `(distance, path loss)` pairs for records matching `filter`,
/// skipping records without a path loss for the requested polarization.
pub fn ci_points(
    records: &[PointRecord],
    filter: &RecordFilter,
    pol: Polarization,
) -> Vec<(f64, f64)> {
    records
        .iter()
        .filter(|r| filter.matches(r))
        .filter_map(|r| {
            let pl = match pol {
                Polarization::Vv => r.omni_pl_vv_db,
                Polarization::Vh => r.omni_pl_vh_db,
            }?;
            Some((r.tr_separation_m, pl))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fspl_reference_values() {
        // 20 log10(4 pi f / c), evaluated by hand
        assert!((fspl_1m(6.75).unwrap() - 49.03).abs() < 0.05);
        assert!((fspl_1m(16.95).unwrap() - 57.03).abs() < 0.05);
        let unity_ghz = SPEED_OF_LIGHT_M_S / (4.0 * std::f64::consts::PI) / 1e9;
        assert!((unity_ghz - 0.02386).abs() < 1e-5);
        assert!(fspl_1m(unity_ghz).unwrap().abs() < 1e-12);
        assert_eq!(fspl_1m(0.0), Err(StatsError::NonPositiveFrequency(0.0)));
        assert!(fspl_1m(-1.0).is_err());
    }

    #[test]
    fn free_space_law_gives_exponent_two() {
        let f = 28.0;
        let anchor = fspl_1m(f).unwrap();
        let pts: Vec<_> = [1.5, 3.0, 10.0, 42.0, 100.0]
            .iter()
            .map(|&d: &f64| (d, anchor + 20.0 * d.log10()))
            .collect();
        let fit = fit_ci_ple(&pts, f).unwrap();
        assert!((fit.ple - 2.0).abs() < 1e-12);
        assert!(fit.sigma_sf_db < 1e-12);
        assert_eq!(fit.n_points, 5);
    }

    #[test]
    fn error_paths() {
        assert_eq!(
            fit_ci_ple(&[(10.0, 80.0)], 6.75),
            Err(StatsError::TooFewPoints { needed: 2, got: 1 })
        );
        assert_eq!(
            fit_ci_ple(&[(10.0, 80.0), (0.5, 60.0)], 6.75),
            Err(StatsError::DistanceBelowReference(0.5))
        );
        assert_eq!(
            fit_ci_ple(&[(1.0, 50.0), (1.0, 51.0)], 6.75),
            Err(StatsError::DegenerateDistances)
        );
        assert_eq!(
            fit_ci_ple(&[(10.0, f64::NAN), (20.0, 51.0)], 6.75),
            Err(StatsError::NonFiniteInput)
        );
    }

    proptest! {
        #[test]
        fn recovers_noiseless_exponent(
            n_star in 0.5f64..6.0,
            freq in 0.5f64..100.0,
            dists in prop::collection::vec(1.0f64..2000.0, 2..30),
        ) {
            prop_assume!(dists.iter().any(|d| *d > 1.0 + 1e-6));
            let anchor = fspl_1m(freq).unwrap();
            let pts: Vec<_> = dists.iter().map(|&d| (d, anchor + 10.0 * n_star * d.log10())).collect();
            let fit = fit_ci_ple(&pts, freq).unwrap();
            prop_assert!(((fit.ple - n_star) / n_star).abs() < 1e-12);
            prop_assert!(fit.sigma_sf_db < 1e-9);
        }

        #[test]
        fn residuals_orthogonal_to_regressor(
            pts in prop::collection::vec((1.0f64..500.0, 40.0f64..160.0), 2..40),
        ) {
            prop_assume!(pts.iter().any(|p| p.0 > 1.01));
            let freq = 6.75;
            let fit = fit_ci_ple(&pts, freq).unwrap();
            let (dot, scale) = pts.iter().fold((0.0, 0.0), |(dot, scale), &(d, pl)| {
                let b = 10.0 * d.log10();
                let a = pl - fit.fspl_1m_db;
                let r = a - fit.ple * b;
                (dot + r * b, scale + (a * b).abs())
            });
            prop_assert!(dot.abs() <= 1e-9 * scale);
            prop_assert!(fit.sigma_sf_db >= 0.0);
        }
    }
}

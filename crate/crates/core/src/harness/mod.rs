//! Experiment driver: power-law fits, ε- and δ-sweeps, catalog records and
//! the aggregated JSON report.

pub mod acceptance;
mod report;
mod sweep;

pub use report::{report, Report, ReportInputs, Section};
pub use sweep::{
    assess_sweep, run_epsilon_sweep, run_ode_sweep, run_sweep_records, OdeSweepConfig,
    OdeSweepOutcome, SweepConfig, SweepOutcome,
};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{admissible, predicted_exponent, table1_lookup, AdmissibleQuery, VanishingFlag};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "BLOWUP_LAB_THREADS";

/// Worker count: `BLOWUP_LAB_THREADS` when set to a positive integer,
/// otherwise the available parallelism.
pub fn worker_count() -> Result<usize> {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var(THREADS_ENV) {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(invalid(format!(
                "{THREADS_ENV} must be a positive integer, got {s:?}"
            ))),
        },
        Err(_) => Ok(available),
    }
}

/// Runs `f` on a pool of [`worker_count`] threads.
pub fn with_workers<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count()?)
        .build()
        .map_err(|e| invalid(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Round-trip exact decimal form used in every CSV file.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points_used: usize,
}

/// Ordinary least squares of `ln y` on `ln x`.
pub fn fit_power_law(pairs: &[(f64, f64)]) -> Result<FitResult> {
    if pairs.len() < 4 {
        return Err(invalid(format!(
            "a fit needs at least 4 points, got {}",
            pairs.len()
        )));
    }
    if pairs
        .iter()
        .any(|(x, y)| !(*x > 0.0 && *y > 0.0) || !x.is_finite() || !y.is_finite())
    {
        return Err(invalid("fit coordinates must be finite and positive"));
    }
    let n = pairs.len() as f64;
    let lx: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::Degenerate("x values have zero variance".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    Ok(FitResult {
        slope,
        intercept: my - slope * mx,
        r_squared,
        points_used: pairs.len(),
    })
}

/// `{n, p, q, admissible, predicted_exponent}`; the exponent is reported
/// only inside the blow-up region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionRecord {
    pub n: u32,
    pub p: f64,
    pub q: f64,
    pub admissible: bool,
    pub decision: crate::model::Admissibility,
    pub predicted_exponent: Option<f64>,
}

pub fn region_record(n: u32, p: f64, q: f64) -> Result<RegionRecord> {
    let decision = admissible(AdmissibleQuery::new(n, p, q)?);
    Ok(RegionRecord {
        n,
        p,
        q,
        admissible: decision.is_admissible(),
        predicted_exponent: predicted_exponent(n, p, q)
            .ok()
            .filter(|_| decision.is_admissible()),
        decision,
    })
}

/// `{n, alpha, flags, order_kind, order_exponent}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Record {
    pub n: u32,
    pub alpha: u32,
    pub flags: Vec<VanishingFlag>,
    pub order_kind: String,
    pub order_exponent: Option<f64>,
}

pub fn table1_record(n: u32, alpha: u32, flags: &BTreeSet<VanishingFlag>) -> Result<Table1Record> {
    let order = table1_lookup(n, alpha, flags)?;
    Ok(Table1Record {
        n,
        alpha,
        flags: flags.iter().copied().collect(),
        order_kind: order.kind().to_string(),
        order_exponent: order.exponent(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = [1.0f64, 2.0, 4.0, 8.0]
            .iter()
            .map(|&x| (x, 7.0 * x.powf(-6.0)))
            .collect();
        let f = fit_power_law(&pts).unwrap();
        assert!((f.slope + 6.0).abs() < 1e-12);
        assert!((f.intercept - 7f64.ln()).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(f.points_used, 4);
    }

    #[test]
    fn noisy_power_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(20240601);
        let pts: Vec<(f64, f64)> = (0..12)
            .map(|i| {
                let x = 1.0 + i as f64 * 0.75;
                (x, x.powf(-2.0) * (1.0 + rng.gen_range(-0.01..0.01)))
            })
            .collect();
        let f = fit_power_law(&pts).unwrap();
        assert!((-2.1..=-1.9).contains(&f.slope), "{}", f.slope);
    }

    #[test]
    fn fit_rejections() {
        assert!(fit_power_law(&[(1.0, 1.0), (2.0, 1.0), (3.0, 1.0)]).is_err());
        assert!(fit_power_law(&[(1.0, 1.0), (2.0, -1.0), (3.0, 1.0), (4.0, 1.0)]).is_err());
        assert!(fit_power_law(&[(2.0, 1.0); 4]).is_err());
    }

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, 6.5528e5, -2.5e-300, 1e300] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn catalog_records() {
        let r = region_record(2, 3.0, 4.0).unwrap();
        assert!(r.admissible);
        assert_eq!(r.predicted_exponent, Some(18.0));
        let t = table1_record(3, 1, &BTreeSet::new()).unwrap();
        assert_eq!(t.order_kind, "power_law");
        assert_eq!(t.order_exponent, Some(-2.0));
        assert!(region_record(1, 3.0, 4.0).is_err());
    }

    proptest! {
        #[test]
        fn fit_recovers_any_exponent(k in -8.0f64..8.0, c in 0.1f64..10.0) {
            let pts: Vec<(f64, f64)> = (1..=6).map(|i| { let x = i as f64; (x, c * x.powf(k)) }).collect();
            let f = fit_power_law(&pts).unwrap();
            prop_assert!((f.slope - k).abs() < 1e-9);
            prop_assert!(f.r_squared > 1.0 - 1e-9);
        }
    }
}

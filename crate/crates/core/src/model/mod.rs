//! Closed-form exponents, the admissible `(p, q)` region and the lifespan
//! catalog for fully nonlinear wave equations.
//!
//! Everything here is a pure function of its arguments. The solver and the
//! harness consume these predictions to decide what a numerical experiment
//! should show.

mod nonlinearity;
mod table1;

pub use nonlinearity::{Factor, NonlinearitySpec, Term};
pub use table1::{table1_lookup, DimensionClass, LifespanOrder, VanishingFlag};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_dimension(n: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::Dimension(n as i64));
    }
    Ok(n as f64)
}

/// Critical power `p0(n) = 2/(n-1) + 1` for `□u = |u_t|^p`.
pub fn critical_p0(n: u32) -> Result<f64> {
    let n = check_dimension(n)?;
    Ok(2.0 / (n - 1.0) + 1.0)
}

/// The Strauss quadratic `γ(n, q) = (n-1) q² - (n+1) q - 2`.
pub fn gamma(n: u32, q: f64) -> f64 {
    let n = n as f64;
    (n - 1.0) * q * q - (n + 1.0) * q - 2.0
}

/// Positive root of [`gamma`], the critical power for `□u = |u|^q`.
pub fn strauss_q0(n: u32) -> Result<f64> {
    let n = check_dimension(n)?;
    Ok((n + 1.0 + (n * n + 10.0 * n - 7.0).sqrt()) / (2.0 * (n - 1.0)))
}

/// A point `(n, p, q)` to classify against the blow-up region of
/// `□u = |u_t|^p + |u|^q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleQuery {
    pub n: u32,
    pub p: f64,
    pub q: f64,
}

impl AdmissibleQuery {
    pub fn new(n: u32, p: f64, q: f64) -> Result<Self> {
        check_dimension(n)?;
        if !(p > 1.0 && q > 1.0) || !p.is_finite() || !q.is_finite() {
            return Err(crate::error::invalid(format!(
                "p and q must be finite and > 1, got p = {p}, q = {q}"
            )));
        }
        Ok(Self { n, p, q })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Admissibility {
    Admissible,
    /// `max(1, 2/(n-1)) < p <= 2n/(n-1)` fails.
    ViolatesPRange,
    /// `1 < q < min(4/((n-1)p - 2) + 1, 2n/(n-2))` fails.
    ViolatesQRange,
}

impl Admissibility {
    pub fn is_admissible(self) -> bool {
        self == Admissibility::Admissible
    }
}

/// Upper end of the `p` range, `2n/(n-1)`.
pub fn p_upper(n: u32) -> f64 {
    let n = n as f64;
    2.0 * n / (n - 1.0)
}

/// Upper end of the `q` range for a given `p`. At `n = 2` the Sobolev bound
/// `2n/(n-2)` is vacuous and is treated as `+∞`.
pub fn q_upper(n: u32, p: f64) -> f64 {
    let nf = n as f64;
    let growth = 4.0 / ((nf - 1.0) * p - 2.0) + 1.0;
    let sobolev = if n == 2 {
        f64::INFINITY
    } else {
        2.0 * nf / (nf - 2.0)
    };
    growth.min(sobolev)
}

/// Classifies a query. Strict inequalities stay strict; only `p <= 2n/(n-1)`
/// admits equality.
pub fn admissible(query: AdmissibleQuery) -> Admissibility {
    let n = query.n as f64;
    let p_lower = (2.0 / (n - 1.0)).max(1.0);
    if !(query.p > p_lower && query.p <= p_upper(query.n)) {
        return Admissibility::ViolatesPRange;
    }
    // (n-1)p - 2 > 0 is implied by p > 2/(n-1), so q_upper is finite or +inf.
    if !(query.q > 1.0 && query.q < q_upper(query.n, query.p)) {
        return Admissibility::ViolatesQRange;
    }
    Admissibility::Admissible
}

/// Magnitude of the lifespan exponent, `T(ε) <= A ε^(-value)`:
/// `2p(q-1) / (2q + 2 - (n-1)p(q-1))`.
pub fn predicted_exponent(n: u32, p: f64, q: f64) -> Result<f64> {
    let nf = check_dimension(n)?;
    let denominator = 2.0 * q + 2.0 - (nf - 1.0) * p * (q - 1.0);
    if denominator <= 0.0 || !denominator.is_finite() {
        return Err(Error::NonPositiveDenominator { denominator });
    }
    Ok(2.0 * p * (q - 1.0) / denominator)
}

/// Comparison-ODE parameters `(a, alpha, beta)` and the amplitude exponent
/// `δ = ε^m` that turn the `|u_t|^p + |u|^q` functional inequalities into the
/// ODE lemma.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaMapping {
    pub a: f64,
    pub alpha: f64,
    pub beta: f64,
    pub delta_power: f64,
}

/// Parameters for `□u = |u_t|^p + |u|^q` in dimension `n`.
pub fn combined_lemma_mapping(n: u32, p: f64, q: f64) -> Result<LemmaMapping> {
    let nf = check_dimension(n)?;
    Ok(LemmaMapping {
        a: 2.0 - (nf - 1.0) * (p - 2.0) / 2.0,
        alpha: nf * (q - 1.0),
        beta: q,
        delta_power: p,
    })
}

/// Parameters for `□u = u u_t² + u⁴` in two dimensions.
pub fn quartic_lemma_mapping() -> LemmaMapping {
    LemmaMapping {
        a: 1.5,
        alpha: 6.0,
        beta: 4.0,
        delta_power: 3.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p0_values() {
        assert_eq!(critical_p0(2).unwrap(), 3.0);
        assert_eq!(critical_p0(3).unwrap(), 2.0);
        assert_eq!(critical_p0(5).unwrap(), 1.5);
        assert!(matches!(critical_p0(1), Err(Error::Dimension(1))));
    }

    #[test]
    fn gamma_values() {
        assert_eq!(gamma(3, 1.0), -4.0);
        // γ(n, 4/(n-1) + 1) = 8/(n-1)
        assert!((gamma(2, 5.0) - 8.0).abs() < 1e-12);
        for n in 2..40u32 {
            let q = 4.0 / (n as f64 - 1.0) + 1.0;
            let expected = 8.0 / (n as f64 - 1.0);
            assert!((gamma(n, q) - expected).abs() <= 1e-12 * expected.max(1.0));
        }
    }

    #[test]
    fn strauss_exponent_values() {
        let q2 = strauss_q0(2).unwrap();
        assert!((q2 - (3.0 + 17f64.sqrt()) / 2.0).abs() < 1e-14);
        assert!((q2 - 3.561553).abs() < 1e-6);
        let q3 = strauss_q0(3).unwrap();
        assert!((q3 - (1.0 + 2f64.sqrt())).abs() < 1e-14);
        assert!(gamma(2, q2).abs() < 1e-12);
        assert!(strauss_q0(0).is_err());
    }

    #[test]
    fn admissible_examples() {
        let q = |n, p, q| admissible(AdmissibleQuery::new(n, p, q).unwrap());
        assert_eq!(q(2, 3.0, 4.0), Admissibility::Admissible);
        assert_eq!(q(2, 5.0, 2.0), Admissibility::ViolatesPRange);
        assert_eq!(q(3, 2.1, 2.5), Admissibility::Admissible);
        // q bound for n = 3, p = 2.1 is 4/2.2 + 1 = 2.818...
        assert_eq!(q(3, 2.1, 2.82), Admissibility::ViolatesQRange);
    }

    #[test]
    fn admissible_boundaries() {
        // lower p bound is strict, upper p bound is attained
        let at = |n, p, q| admissible(AdmissibleQuery { n, p, q });
        assert_eq!(at(3, 1.0, 1.5), Admissibility::ViolatesPRange);
        assert_eq!(at(2, 2.0, 1.5), Admissibility::ViolatesPRange);
        assert_eq!(at(2, 4.0, 1.5), Admissibility::Admissible);
        // q equal to its bound is a violation
        assert_eq!(at(2, 3.0, 5.0), Admissibility::ViolatesQRange);
        // Sobolev bound at n = 4 is 4
        assert_eq!(at(4, 1.1, 4.0), Admissibility::ViolatesQRange);
    }

    #[test]
    fn predicted_exponent_values() {
        assert_eq!(predicted_exponent(2, 3.0, 4.0).unwrap(), 18.0);
        assert_eq!(predicted_exponent(3, 2.0, 2.0).unwrap(), 2.0);
        assert!(matches!(
            predicted_exponent(2, 4.0, 5.0),
            Err(Error::NonPositiveDenominator { .. })
        ));
    }

    #[test]
    fn region_witness_points() {
        for n in 2..=4u32 {
            let nf = n as f64;
            let p = critical_p0(n).unwrap() + 1e-3;
            let q = 4.0 / ((nf - 1.0) * p - 2.0) + 1.0 - 1e-3;
            assert!(p > critical_p0(n).unwrap());
            assert!(q > strauss_q0(n).unwrap(), "n = {n}: q = {q}");
            assert_eq!(
                admissible(AdmissibleQuery { n, p, q }),
                Admissibility::Admissible
            );
        }
    }

    #[test]
    fn lemma_mapping_matches_prediction() {
        let m = combined_lemma_mapping(2, 3.0, 4.0).unwrap();
        assert_eq!((m.a, m.alpha, m.beta, m.delta_power), (1.5, 6.0, 4.0, 3.0));
        assert_eq!(m, quartic_lemma_mapping());
    }
}

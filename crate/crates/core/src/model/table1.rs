use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Row of the lifespan table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimensionClass {
    Two,
    Three,
    Four,
    FiveOrMore,
}

impl DimensionClass {
    pub fn from_dimension(n: u32) -> Result<Self> {
        match n {
            0 | 1 => Err(Error::Dimension(n as i64)),
            2 => Ok(Self::Two),
            3 => Ok(Self::Three),
            4 => Ok(Self::Four),
            _ => Ok(Self::FiveOrMore),
        }
    }
}

/// Extra structure of the nonlinearity or the data that lengthens the
/// lifespan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VanishingFlag {
    /// `∂_u² F(0) = 0`
    SecondDerivative,
    /// `∂_u³ F(0) = 0`
    ThirdDerivative,
    /// `∂_u^l F(0) = 0` for `l = 3, 4`
    ThirdAndFourthDerivatives,
    /// `∫ g dx = 0`
    ZeroMeanData,
}

impl VanishingFlag {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "d2" | "second_derivative" => Ok(Self::SecondDerivative),
            "d3" | "third_derivative" => Ok(Self::ThirdDerivative),
            "d34" | "third_and_fourth_derivatives" => Ok(Self::ThirdAndFourthDerivatives),
            "int_g_zero" | "zero_mean_data" => Ok(Self::ZeroMeanData),
            other => Err(invalid(format!("unknown vanishing flag {other:?}"))),
        }
    }
}

/// Order of a lifespan bound in the amplitude `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LifespanOrder {
    /// `c ε^exponent`
    PowerLaw {
        exponent: f64,
    },
    /// `exp(c ε^exponent)`
    ExpPower {
        exponent: f64,
    },
    /// `c a(ε)` with `a² ε² log(1 + a) = 1`
    LogCorrected,
    Infinite,
}

impl LifespanOrder {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::PowerLaw { .. } => "power_law",
            Self::ExpPower { .. } => "exp_power",
            Self::LogCorrected => "log_corrected",
            Self::Infinite => "infinite",
        }
    }

    pub fn exponent(&self) -> Option<f64> {
        match *self {
            Self::PowerLaw { exponent } | Self::ExpPower { exponent } => Some(exponent),
            _ => None,
        }
    }
}

type Row = (&'static [VanishingFlag], LifespanOrder);

const fn power(exponent: f64) -> LifespanOrder {
    LifespanOrder::PowerLaw { exponent }
}

const fn exp_power(exponent: f64) -> LifespanOrder {
    LifespanOrder::ExpPower { exponent }
}

use VanishingFlag::*;

const INFINITE: &[Row] = &[(&[], LifespanOrder::Infinite)];

const N2_A1: &[Row] = &[
    (&[], LifespanOrder::LogCorrected),
    (&[ZeroMeanData], power(-1.0)),
    (&[SecondDerivative], power(-2.0)),
];
const N2_A2: &[Row] = &[
    (&[], power(-6.0)),
    (&[ThirdDerivative], power(-18.0)),
    (&[ThirdAndFourthDerivatives], exp_power(-2.0)),
];
const N3_A1: &[Row] = &[(&[], power(-2.0)), (&[SecondDerivative], exp_power(-1.0))];
const N4_A1: &[Row] = &[
    (&[], exp_power(-2.0)),
    (&[SecondDerivative], LifespanOrder::Infinite),
];

fn cell(class: DimensionClass, alpha_column: u32) -> &'static [Row] {
    use DimensionClass::*;
    match (class, alpha_column) {
        (Two, 1) => N2_A1,
        (Two, 2) => N2_A2,
        (Three, 1) => N3_A1,
        (Four, 1) => N4_A1,
        _ => INFINITE,
    }
}

/// Sharp lower bound of the lifespan for `F = O(|λ|^(1+α))` in dimension
/// `n`, under the given vanishing conditions.
///
/// Flags are canonicalized first (`∂_u^l F(0) = 0, l = 3, 4` subsumes
/// `∂_u³ F(0) = 0`). A cell whose only entry is unconditional answers every
/// flag set; otherwise the canonical set must equal one row's condition,
/// and the empty set selects the general case.
pub fn table1_lookup(n: u32, alpha: u32, flags: &BTreeSet<VanishingFlag>) -> Result<LifespanOrder> {
    let class = DimensionClass::from_dimension(n)?;
    if alpha == 0 {
        return Err(invalid("alpha must be >= 1"));
    }
    let rows = cell(class, alpha.min(3));
    if rows.len() == 1 && rows[0].0.is_empty() {
        return Ok(rows[0].1);
    }
    let mut canon = flags.clone();
    if canon.contains(&ThirdAndFourthDerivatives) {
        canon.remove(&ThirdDerivative);
    }
    rows.iter()
        .find(|(cond, _)| cond.len() == canon.len() && cond.iter().all(|f| canon.contains(f)))
        .map(|(_, order)| *order)
        .ok_or_else(|| Error::UnknownTableCell {
            n,
            alpha,
            flags: format!("{canon:?}"),
        })
}

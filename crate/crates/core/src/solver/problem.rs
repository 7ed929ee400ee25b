use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::NonlinearitySpec;

/// Smooth bump `exp(1 - 1/(1-r²))` on `r < 1`, zero outside.
pub fn default_g(r: f64) -> f64 {
    let r = r.abs();
    if r < 1.0 {
        (1.0 - 1.0 / (1.0 - r * r)).exp()
    } else {
        0.0
    }
}

/// Radial profile of initial data.
#[derive(Clone)]
pub enum Profile {
    Zero,
    /// [`default_g`].
    Bump,
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Profile {
    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Custom(Arc::new(f))
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Bump => default_g(r),
            Self::Custom(f) => f(r),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Zero)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::Bump => "bump",
            Self::Custom(_) => "custom",
        }
    }
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `u(0) = ε f`, `u_t(0) = ε g`.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub f: Profile,
    pub g: Profile,
    pub epsilon: f64,
    /// Both profiles are nonnegative.
    pub nonneg: bool,
}

impl InitialData {
    /// Checks `nonneg` on a fine sample of `[0, 2]`.
    pub fn new(f: Profile, g: Profile, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
        }
        let nonneg = (0..=2000).all(|i| {
            let r = i as f64 * 1e-3;
            f.eval(r) >= 0.0 && g.eval(r) >= 0.0
        });
        Ok(Self {
            f,
            g,
            epsilon,
            nonneg,
        })
    }
}

/// Named nonlinearity presets accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum NonlinearityPreset {
    /// `u u_t² + u⁴`
    UUt2PlusU4,
    /// `|u_t|^p + |u|^q`
    PowerCombined {
        p: f64,
        q: f64,
    },
    U4,
    UUt2,
    Linear,
}

impl NonlinearityPreset {
    /// Parses `uut2+u4`, `|ut|^p+|u|^q`, `u4`, `uut2`, `linear`.
    pub fn parse(name: &str, p: Option<f64>, q: Option<f64>) -> Result<Self> {
        match name.trim() {
            "uut2+u4" => Ok(Self::UUt2PlusU4),
            "|ut|^p+|u|^q" | "power" => match (p, q) {
                (Some(p), Some(q)) => Ok(Self::PowerCombined { p, q }),
                _ => Err(invalid("the |ut|^p+|u|^q preset needs p and q")),
            },
            "u4" => Ok(Self::U4),
            "uut2" => Ok(Self::UUt2),
            "linear" => Ok(Self::Linear),
            other => Err(invalid(format!("unknown nonlinearity preset {other:?}"))),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::UUt2PlusU4 => "uut2+u4".into(),
            Self::PowerCombined { p, q } => format!("|ut|^{p}+|u|^{q}"),
            Self::U4 => "u4".into(),
            Self::UUt2 => "uut2".into(),
            Self::Linear => "linear".into(),
        }
    }

    pub fn build(&self) -> Result<NonlinearitySpec> {
        Ok(match *self {
            Self::UUt2PlusU4 => NonlinearitySpec::quartic_combined(),
            Self::PowerCombined { p, q } => NonlinearitySpec::power_combined(p, q)?,
            Self::U4 => NonlinearitySpec::quartic(),
            Self::UUt2 => NonlinearitySpec::u_ut_squared(),
            Self::Linear => NonlinearitySpec::linear(),
        })
    }
}

/// `□u = F(u, u_t)` in `R^n`, radial data of amplitude `ε`.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub n: u32,
    pub nonlinearity: NonlinearitySpec,
    pub data: InitialData,
}

impl ProblemSpec {
    /// Dimension `n = 1` is accepted and means the half-line with a
    /// reflecting wall; the radial theory itself needs `n >= 2`.
    pub fn new(n: u32, nonlinearity: NonlinearitySpec, data: InitialData) -> Result<Self> {
        if n == 0 {
            return Err(crate::error::Error::Dimension(0));
        }
        Ok(Self {
            n,
            nonlinearity,
            data,
        })
    }

    /// `□u = u u_t² + u⁴` in two dimensions with `u(0) = 0`, `u_t(0) = ε g`.
    pub fn quartic_combined(epsilon: f64) -> Result<Self> {
        Self::new(
            2,
            NonlinearitySpec::quartic_combined(),
            InitialData::new(Profile::Zero, Profile::Bump, epsilon)?,
        )
    }

    /// `□u = |u_t|^p + |u|^q` with `u(0) = 0`, `u_t(0) = ε g`.
    pub fn power_combined(n: u32, p: f64, q: f64, epsilon: f64) -> Result<Self> {
        Self::new(
            n,
            NonlinearitySpec::power_combined(p, q)?,
            InitialData::new(Profile::Zero, Profile::Bump, epsilon)?,
        )
    }

    /// Preset nonlinearity with bump velocity data.
    pub fn from_preset(n: u32, preset: NonlinearityPreset, epsilon: f64) -> Result<Self> {
        Self::new(
            n,
            preset.build()?,
            InitialData::new(Profile::Zero, Profile::Bump, epsilon)?,
        )
    }

    pub fn epsilon(&self) -> f64 {
        self.data.epsilon
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        let mut out = self.clone();
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
        }
        out.data.epsilon = epsilon;
        Ok(out)
    }

    pub fn is_zero_data(&self) -> bool {
        self.data.f.is_zero() && self.data.g.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_values() {
        assert_eq!(default_g(0.0), 1.0);
        assert_eq!(default_g(1.0), 0.0);
        assert_eq!(default_g(3.0), 0.0);
        assert!((default_g(0.5) - (-1.0f64 / 3.0).exp()).abs() < 1e-15);
        assert!(default_g(0.999) > 0.0);
    }

    #[test]
    fn presets_parse() {
        assert_eq!(
            NonlinearityPreset::parse("uut2+u4", None, None).unwrap(),
            NonlinearityPreset::UUt2PlusU4
        );
        assert!(NonlinearityPreset::parse("|ut|^p+|u|^q", Some(3.0), None).is_err());
        let p = NonlinearityPreset::parse("|ut|^p+|u|^q", Some(3.0), Some(4.0)).unwrap();
        assert_eq!(p.build().unwrap().eval(1.0, -2.0), 9.0);
        assert!(NonlinearityPreset::parse("u5", None, None).is_err());
        assert!(NonlinearityPreset::Linear.build().unwrap().is_linear());
    }

    #[test]
    fn data_sign_detection() {
        let d = InitialData::new(Profile::Zero, Profile::Bump, 1.0).unwrap();
        assert!(d.nonneg);
        let s = InitialData::new(
            Profile::custom(|r| default_g(r) * (1.0 - 4.0 * r)),
            Profile::Zero,
            1.0,
        )
        .unwrap();
        assert!(!s.nonneg);
        assert!(InitialData::new(Profile::Zero, Profile::Bump, 0.0).is_err());
    }

    #[test]
    fn named_presets() {
        let p = ProblemSpec::quartic_combined(1.0).unwrap();
        assert_eq!(p.n, 2);
        assert!(p.nonlinearity.preserves_nonnegativity());
        let q = ProblemSpec::power_combined(2, 3.0, 4.0, 0.5).unwrap();
        assert_eq!(q.epsilon(), 0.5);
        assert_eq!(q.with_epsilon(2.0).unwrap().epsilon(), 2.0);
    }
}

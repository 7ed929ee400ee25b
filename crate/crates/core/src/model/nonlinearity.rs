use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// One factor `x^a` of a term. With `absolute` set the factor is `|x|^a`;
/// otherwise it keeps the sign of `x` (plain `x^k` for integer `k`, the odd
/// extension `sign(x)|x|^a` otherwise).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub exponent: f64,
    pub absolute: bool,
}

impl Factor {
    pub fn signed(exponent: f64) -> Self {
        Self {
            exponent,
            absolute: false,
        }
    }

    pub fn abs(exponent: f64) -> Self {
        Self {
            exponent,
            absolute: true,
        }
    }

    fn integer_exponent(&self) -> Option<i32> {
        let k = self.exponent.round();
        (k == self.exponent && k.abs() < 64.0).then_some(k as i32)
    }

    #[inline]
    fn eval(&self, x: f64, int: Option<i32>) -> f64 {
        match (int, self.absolute) {
            (Some(0), _) => 1.0,
            (Some(k), true) => x.abs().powi(k),
            (Some(k), false) => x.powi(k),
            (None, true) => x.abs().powf(self.exponent),
            (None, false) => x.signum() * x.abs().powf(self.exponent),
        }
    }

    /// `|d/dx x^a| = a |x|^(a-1)`, the same for both sign conventions.
    #[inline]
    fn slope(&self, x: f64, int: Option<i32>) -> f64 {
        match int {
            Some(0) => 0.0,
            Some(1) => 1.0,
            Some(k) => k as f64 * x.abs().powi(k - 1),
            None => self.exponent * x.abs().powf(self.exponent - 1.0),
        }
    }
}

/// `coefficient · u-factor · u_t-factor`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coefficient: f64,
    pub u: Factor,
    pub ut: Factor,
}

impl Term {
    pub fn degree(&self) -> f64 {
        self.u.exponent + self.ut.exponent
    }
}

#[derive(Debug, Clone, Copy)]
struct Compiled {
    u: Option<i32>,
    ut: Option<i32>,
}

/// Right-hand side `F(u, u_t)` of `□u = F(u, u_t)` as a sum of monomials.
///
/// An empty term list stands for `F ≡ 0`, the linear wave equation; it can
/// only be built through [`NonlinearitySpec::linear`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "Vec<Term>", into = "Vec<Term>")]
pub struct NonlinearitySpec {
    terms: Vec<Term>,
    compiled: Vec<Compiled>,
}

impl PartialEq for NonlinearitySpec {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl TryFrom<Vec<Term>> for NonlinearitySpec {
    type Error = crate::error::Error;

    fn try_from(terms: Vec<Term>) -> Result<Self> {
        if terms.is_empty() {
            return Ok(Self::linear());
        }
        Self::new(terms)
    }
}

impl From<NonlinearitySpec> for Vec<Term> {
    fn from(spec: NonlinearitySpec) -> Self {
        spec.terms
    }
}

impl NonlinearitySpec {
    pub fn new(terms: Vec<Term>) -> Result<Self> {
        if terms.is_empty() {
            return Err(invalid("a nonlinearity needs at least one term"));
        }
        for t in &terms {
            let exps = [t.u.exponent, t.ut.exponent];
            if exps.iter().any(|e| !e.is_finite() || *e < 0.0) {
                return Err(invalid(format!("exponents must be finite and >= 0: {t:?}")));
            }
            if t.degree() <= 1.0 {
                return Err(invalid(format!("term degree must exceed 1: {t:?}")));
            }
            if !t.coefficient.is_finite() {
                return Err(invalid("coefficient must be finite"));
            }
        }
        let compiled = compile(&terms);
        Ok(Self { terms, compiled })
    }

    /// `F ≡ 0`.
    pub fn linear() -> Self {
        Self {
            terms: Vec::new(),
            compiled: Vec::new(),
        }
    }

    /// `u u_t² + u⁴`.
    pub fn quartic_combined() -> Self {
        Self::new(vec![
            Term {
                coefficient: 1.0,
                u: Factor::signed(1.0),
                ut: Factor::signed(2.0),
            },
            Term {
                coefficient: 1.0,
                u: Factor::signed(4.0),
                ut: Factor::signed(0.0),
            },
        ])
        .expect("preset is valid")
    }

    /// `|u_t|^p + |u|^q`.
    pub fn power_combined(p: f64, q: f64) -> Result<Self> {
        Self::new(vec![
            Term {
                coefficient: 1.0,
                u: Factor::abs(0.0),
                ut: Factor::abs(p),
            },
            Term {
                coefficient: 1.0,
                u: Factor::abs(q),
                ut: Factor::abs(0.0),
            },
        ])
    }

    /// `u⁴`.
    pub fn quartic() -> Self {
        Self::new(vec![Term {
            coefficient: 1.0,
            u: Factor::signed(4.0),
            ut: Factor::signed(0.0),
        }])
        .expect("preset is valid")
    }

    /// `u u_t²`.
    pub fn u_ut_squared() -> Self {
        Self::new(vec![Term {
            coefficient: 1.0,
            u: Factor::signed(1.0),
            ut: Factor::signed(2.0),
        }])
        .expect("preset is valid")
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_linear(&self) -> bool {
        self.terms.is_empty()
    }

    #[inline]
    pub fn eval(&self, u: f64, ut: f64) -> f64 {
        let mut acc = 0.0;
        for (t, c) in self.terms.iter().zip(&self.compiled) {
            acc += t.coefficient * t.u.eval(u, c.u) * t.ut.eval(ut, c.ut);
        }
        acc
    }

    /// `(|∂F/∂u|, |∂F/∂u_t|)` bounded term by term.
    #[inline]
    pub fn partials_abs(&self, u: f64, ut: f64) -> (f64, f64) {
        let (mut du, mut dut) = (0.0, 0.0);
        for (t, c) in self.terms.iter().zip(&self.compiled) {
            let k = t.coefficient.abs();
            du += k * t.u.slope(u, c.u) * t.ut.eval(ut, c.ut).abs();
            dut += k * t.u.eval(u, c.u).abs() * t.ut.slope(ut, c.ut);
        }
        (du, dut)
    }

    /// Local rate `sqrt|F_u| + |F_ut|` of the linearized point dynamics
    /// `u'' = F(u, u')`. Non-Lipschitz factors (exponent below one at zero)
    /// contribute nothing.
    #[inline]
    pub fn rate(&self, u: f64, ut: f64) -> f64 {
        let (du, dut) = self.partials_abs(u, ut);
        let r = du.sqrt() + dut;
        if r.is_finite() {
            r
        } else {
            0.0
        }
    }

    /// True when every term maps `u >= 0` (any `u_t`) to a nonnegative value,
    /// the structural condition behind the positivity argument for
    /// nonnegative data.
    pub fn preserves_nonnegativity(&self) -> bool {
        self.terms.iter().all(|t| {
            let ut_even =
                t.ut.absolute || t.ut.integer_exponent().map(|k| k % 2 == 0).unwrap_or(false);
            t.coefficient >= 0.0 && ut_even
        })
    }
}

fn compile(terms: &[Term]) -> Vec<Compiled> {
    terms
        .iter()
        .map(|t| Compiled {
            u: t.u.integer_exponent(),
            ut: t.ut.integer_exponent(),
        })
        .collect()
}

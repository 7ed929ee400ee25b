//! Comparison ODE `F'' = k (1+t)^{-α} F^β` integrated to blow-up.
//!
//! The hypotheses of the comparison lemma are `F(t) >= δ (1+t)^a` and
//! `F'' >= k (1+t)^{-α} F^β`. Integrating the bare equality from
//! `(F, F') = (δ, aδ)` does not keep the first hypothesis alive once `a > 1`:
//! for `(a, α, β) = (3/2, 6, 4)` the nonlinear term is negligible at small
//! `δ`, `F` grows only linearly and never blows up. The default problem
//! therefore adds the envelope forcing `δ a (a-1) (1+t)^{a-2}`, the second
//! derivative of `δ (1+t)^a`. Then `F - δ(1+t)^a` is convex with zero
//! initial value and slope, both hypotheses hold for all `t`, and `F` is
//! the smallest function the lemma allows. For `a = 1` the forcing vanishes.
//!
//! Integration uses the Dormand–Prince 5(4) pair in `s = ln(1+t)` on the
//! state `(F, dF/ds)`. Blow-up is declared when `F` exceeds `threshold`
//! times the envelope `δ (1+t)^a`; the crossing is located by bisection on
//! the step length and the remaining time to the singularity is added from
//! the local power-law profile `F ~ C (T - t)^{-2/(β-1)}`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeProblem {
    pub delta: f64,
    pub k: f64,
    pub a: f64,
    pub alpha: f64,
    pub beta: f64,
    pub f0: f64,
    pub f0_prime: f64,
    /// Add `δ a (a-1) (1+t)^{a-2}` to the right-hand side so that
    /// `F >= δ (1+t)^a` holds along the whole trajectory.
    pub envelope_forcing: bool,
}

impl OdeProblem {
    pub fn new(
        delta: f64,
        k: f64,
        a: f64,
        alpha: f64,
        beta: f64,
        f0: f64,
        f0_prime: f64,
    ) -> Result<Self> {
        let p = Self {
            delta,
            k,
            a,
            alpha,
            beta,
            f0,
            f0_prime,
            envelope_forcing: true,
        };
        p.validate()?;
        Ok(p)
    }

    /// Minimal data `F0 = δ`, `F0' = aδ`.
    pub fn minimal(delta: f64, k: f64, a: f64, alpha: f64, beta: f64) -> Result<Self> {
        Self::new(delta, k, a, alpha, beta, delta, a * delta)
    }

    /// Same parameters with the minimal data for another `δ`.
    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        let p = Self {
            delta,
            f0: delta,
            f0_prime: self.a * delta,
            ..*self
        };
        p.validate()?;
        Ok(p)
    }

    pub fn without_forcing(self) -> Self {
        Self {
            envelope_forcing: false,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.delta,
            self.k,
            self.a,
            self.alpha,
            self.beta,
            self.f0,
            self.f0_prime,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(invalid("ODE parameters must be finite"));
        }
        if !(self.delta > 0.0 && self.k > 0.0) {
            return Err(invalid("delta and k must be positive"));
        }
        if !(self.a >= 1.0 && self.beta > 1.0) {
            return Err(invalid("need a >= 1 and beta > 1"));
        }
        let denominator = (self.beta - 1.0) * self.a - self.alpha + 2.0;
        if denominator <= 0.0 {
            return Err(Error::NonPositiveDenominator { denominator });
        }
        if self.f0 < self.delta || self.f0_prime < 0.0 {
            return Err(invalid("need F0 >= delta and F0' >= 0"));
        }
        Ok(())
    }

    fn envelope(&self, t: f64) -> f64 {
        self.delta * (1.0 + t).powf(self.a)
    }

    /// `d/ds (F, H)` with `H = dF/ds`, `1 + t = e^s`.
    #[inline]
    fn rhs(&self, s: f64, y: [f64; 2]) -> [f64; 2] {
        let f = y[0].max(0.0);
        let mut acc = if f > 0.0 {
            self.k * (self.beta * f.ln() + (2.0 - self.alpha) * s).exp()
        } else {
            0.0
        };
        if self.envelope_forcing {
            acc += self.delta * self.a * (self.a - 1.0) * (self.a * s).exp();
        }
        [y[1], y[1] + acc]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeSettings {
    /// Blow-up is declared at `F >= threshold · δ (1+t)^a`.
    pub threshold: f64,
    pub rel_tol: f64,
    pub t_max: f64,
    pub max_steps: usize,
    /// First step in `s = ln(1+t)`.
    pub initial_step: f64,
}

impl Default for OdeSettings {
    fn default() -> Self {
        Self {
            threshold: 1e6,
            rel_tol: 1e-8,
            t_max: 1e30,
            max_steps: 2_000_000,
            initial_step: 1e-3,
        }
    }
}

impl OdeSettings {
    pub fn new(threshold: f64, rel_tol: f64) -> Self {
        Self {
            threshold,
            rel_tol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.threshold >= 1e6) || !self.threshold.is_finite() {
            return Err(invalid(format!(
                "threshold must be >= 1e6, got {}",
                self.threshold
            )));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1e-2) {
            return Err(invalid(format!(
                "rel_tol must lie in (0, 1e-2), got {}",
                self.rel_tol
            )));
        }
        if !(self.t_max > 0.0) || !(self.initial_step > 0.0) || self.max_steps == 0 {
            return Err(invalid(
                "t_max, initial_step and max_steps must be positive",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupResult {
    /// Threshold crossing plus the extrapolated remaining time.
    pub blow_time: f64,
    pub threshold_time: f64,
    pub certified: bool,
    /// Relative change of `blow_time` under the certification rerun.
    pub certification_change: f64,
    pub steps: usize,
    pub final_f: f64,
    /// `min_t F(t) / (δ (1+t)^a)` over accepted steps.
    pub envelope_min_ratio: f64,
}

#[derive(Debug, Clone, Copy)]
struct Crossing {
    blow_time: f64,
    threshold_time: f64,
    steps: usize,
    final_f: f64,
    envelope_min_ratio: f64,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// One Dormand–Prince step; returns the fifth-order solution and the
/// embedded error estimate.
fn dopri_step(p: &OdeProblem, s: f64, y: [f64; 2], h: f64) -> ([f64; 2], [f64; 2]) {
    let add = |c: &[(f64, [f64; 2])]| {
        let mut out = y;
        for (w, k) in c {
            out[0] += h * w * k[0];
            out[1] += h * w * k[1];
        }
        out
    };
    let k1 = p.rhs(s, y);
    let k2 = p.rhs(s + C2 * h, add(&[(A21, k1)]));
    let k3 = p.rhs(s + C3 * h, add(&[(A31, k1), (A32, k2)]));
    let k4 = p.rhs(s + C4 * h, add(&[(A41, k1), (A42, k2), (A43, k3)]));
    let k5 = p.rhs(
        s + C5 * h,
        add(&[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]),
    );
    let k6 = p.rhs(
        s + h,
        add(&[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]),
    );
    let y5 = add(&[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)]);
    let k7 = p.rhs(s + h, y5);
    let mut err = [0.0; 2];
    for i in 0..2 {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    (y5, err)
}

fn integrate_once(p: &OdeProblem, cfg: &OdeSettings) -> Result<Crossing> {
    let s_max = cfg.t_max.ln_1p();
    let rtol = cfg.rel_tol;
    let atol = rtol * 1e-10 * p.f0;
    let ratio = |s: f64, y: [f64; 2]| y[0] / p.envelope(s.exp_m1());

    let mut s = 0.0;
    let mut y = [p.f0, p.f0_prime];
    let mut h = cfg.initial_step;
    let mut steps = 0;
    let mut min_ratio = ratio(0.0, y);

    while steps < cfg.max_steps {
        if s >= s_max {
            break;
        }
        h = h.min(s_max - s);
        let (y_new, err) = dopri_step(p, s, y, h);
        let mut norm = 0.0f64;
        for i in 0..2 {
            let scale = rtol * y[i].abs().max(y_new[i].abs()) + atol;
            norm = norm.max((err[i] / scale).abs());
        }
        if !norm.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            h *= 0.2;
            if h < 1e-300 {
                return Err(Error::NonFinite { t: s.exp_m1() });
            }
            continue;
        }
        if norm > 1.0 {
            h *= (0.9 * norm.powf(-0.2)).max(0.2);
            continue;
        }
        steps += 1;
        let s_new = s + h;
        let r_new = ratio(s_new, y_new);
        if r_new >= cfg.threshold {
            return Ok(locate_crossing(p, cfg, s, y, h, steps, min_ratio));
        }
        min_ratio = min_ratio.min(r_new);
        s = s_new;
        y = y_new;
        let grow = if norm == 0.0 {
            5.0
        } else {
            0.9 * norm.powf(-0.2)
        };
        h *= grow.clamp(0.2, 5.0);
    }
    Err(Error::NoBlowup {
        t_reached: s.exp_m1(),
        final_f: y[0],
    })
}

/// Bisects the step length from `(s, y)` until the envelope ratio equals
/// the threshold, then extrapolates to the singularity.
fn locate_crossing(
    p: &OdeProblem,
    cfg: &OdeSettings,
    s: f64,
    y: [f64; 2],
    h: f64,
    steps: usize,
    min_ratio: f64,
) -> Crossing {
    let ratio = |s: f64, y: [f64; 2]| y[0] / p.envelope(s.exp_m1());
    let (mut lo, mut hi) = (0.0, h);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (ym, _) = dopri_step(p, s, y, mid);
        if ratio(s + mid, ym) >= cfg.threshold {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * (s + hi).max(1e-300) {
            break;
        }
    }
    let (yc, _) = dopri_step(p, s, y, hi);
    let sc = s + hi;
    let t = sc.exp_m1();
    let f_t = yc[1] / (1.0 + t);
    let tail = 2.0 * yc[0] / ((p.beta - 1.0) * f_t);
    Crossing {
        blow_time: t + tail,
        threshold_time: t,
        steps,
        final_f: yc[0],
        envelope_min_ratio: min_ratio.min(ratio(sc, yc)),
    }
}

/// Integrates with full settings and certifies by rerunning with half the
/// initial step and a tenfold tighter tolerance.
pub fn integrate_blowup_with(p: &OdeProblem, cfg: &OdeSettings) -> Result<BlowupResult> {
    p.validate()?;
    cfg.validate()?;
    let main = integrate_once(p, cfg)?;
    let check_cfg = OdeSettings {
        rel_tol: (cfg.rel_tol / 10.0).max(1e-14),
        initial_step: cfg.initial_step / 2.0,
        ..*cfg
    };
    let (certified, change) = match integrate_once(p, &check_cfg) {
        Ok(check) => {
            let change = (main.blow_time - check.blow_time).abs() / check.blow_time;
            (change < 0.01, change)
        }
        Err(_) => (false, f64::INFINITY),
    };
    let reached = main.final_f >= cfg.threshold * p.envelope(main.threshold_time) * (1.0 - 1e-9);
    Ok(BlowupResult {
        blow_time: main.blow_time,
        threshold_time: main.threshold_time,
        certified: certified && reached,
        certification_change: change,
        steps: main.steps,
        final_f: main.final_f,
        envelope_min_ratio: main.envelope_min_ratio,
    })
}

pub fn integrate_blowup(p: &OdeProblem, threshold: f64, rel_tol: f64) -> Result<BlowupResult> {
    integrate_blowup_with(p, &OdeSettings::new(threshold, rel_tol))
}

/// `(β-1) / ((β-1)a - α + 2)`, the magnitude of the lifespan exponent in `δ`.
pub fn lemma_exponent(a: f64, alpha: f64, beta: f64) -> Result<f64> {
    let denominator = (beta - 1.0) * a - alpha + 2.0;
    if denominator <= 0.0 || !denominator.is_finite() {
        return Err(Error::NonPositiveDenominator { denominator });
    }
    Ok((beta - 1.0) / denominator)
}

/// Blow-up times for the template instantiated at each `δ` with minimal
/// data. Entries run concurrently and come back in input order. Every entry
/// must be certified and the blow-up time must increase as `δ` decreases.
pub fn delta_sweep(
    template: &OdeProblem,
    deltas: &[f64],
    threshold: f64,
    rel_tol: f64,
) -> Result<Vec<(f64, BlowupResult)>> {
    if deltas.len() < 4 {
        return Err(invalid("a delta sweep needs at least 4 values"));
    }
    if deltas.iter().any(|d| !(*d > 0.0)) || deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("deltas must be positive and strictly decreasing"));
    }
    let cfg = OdeSettings::new(threshold, rel_tol);
    let results: Vec<Result<(f64, BlowupResult)>> = deltas
        .par_iter()
        .map(|&d| {
            let p = template.with_delta(d)?;
            Ok((d, integrate_blowup_with(&p, &cfg)?))
        })
        .collect();
    let mut out = Vec::with_capacity(deltas.len());
    for r in results {
        match r {
            Ok(v) => out.push(v),
            Err(e) => return Err(Error::SweepFailed(e.to_string())),
        }
    }
    if let Some((d, _)) = out.iter().find(|(_, r)| !r.certified) {
        return Err(Error::SweepFailed(format!("delta = {d} not certified")));
    }
    if out.windows(2).any(|w| w[1].1.blow_time <= w[0].1.blow_time) {
        return Err(Error::SweepFailed(
            "blow-up time is not increasing as delta decreases".into(),
        ));
    }
    Ok(out)
}

/// `n` log-spaced values from `hi` down to `lo`.
pub fn log_spaced_descending(hi: f64, lo: f64, n: usize) -> Vec<f64> {
    let (a, b) = (hi.ln(), lo.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1).max(1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn slope(points: &[(f64, BlowupResult)]) -> f64 {
        let xs: Vec<f64> = points.iter().map(|(d, _)| d.ln()).collect();
        let ys: Vec<f64> = points.iter().map(|(_, r)| r.blow_time.ln()).collect();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        sxy / sxx
    }

    #[test]
    fn quadratic_closed_form() {
        // F = 6/(1-t)^2 solves F'' = F^2 with F(0) = 6, F'(0) = 12.
        let p = OdeProblem::new(1.0, 1.0, 1.0, 0.0, 2.0, 6.0, 12.0).unwrap();
        let r = integrate_blowup(&p, 1e6, 1e-10).unwrap();
        assert!(r.certified);
        assert!((r.blow_time - 1.0).abs() < 1e-8, "{}", r.blow_time);
        let t = r.threshold_time;
        assert!((6.0 / (1.0 - t).powi(2) / r.final_f - 1.0).abs() < 1e-6);
    }

    #[test]
    fn threshold_crossing_is_exact() {
        let p = OdeProblem::new(1.0, 1.0, 1.0, 0.0, 2.0, 6.0, 12.0).unwrap();
        let r = integrate_blowup(&p, 1e7, 1e-10).unwrap();
        let envelope = 1.0 + r.threshold_time;
        assert!((r.final_f / (1e7 * envelope) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn hypotheses_enforced() {
        assert!(matches!(
            OdeProblem::minimal(1.0, 1.0, 1.0, 6.0, 2.0),
            Err(Error::NonPositiveDenominator { .. })
        ));
        assert!(OdeProblem::minimal(0.0, 1.0, 1.5, 6.0, 4.0).is_err());
        assert!(OdeProblem::minimal(1.0, 1.0, 0.5, 0.0, 2.0).is_err());
        assert!(OdeProblem::new(1.0, 1.0, 1.0, 0.0, 2.0, 0.5, 1.0).is_err());
        let p = OdeProblem::minimal(1.0, 1.0, 1.0, 0.0, 2.0).unwrap();
        assert!(integrate_blowup(&p, 1e3, 1e-8).is_err());
    }

    #[test]
    fn lemma_exponent_values() {
        assert_eq!(lemma_exponent(1.5, 6.0, 4.0).unwrap(), 6.0);
        assert_eq!(3.0 * lemma_exponent(1.5, 6.0, 4.0).unwrap(), 18.0);
        assert!((lemma_exponent(1.0, 0.0, 2.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(lemma_exponent(1.0, 6.0, 2.0).is_err());
    }

    #[test]
    fn quartic_reference_value() {
        let p = OdeProblem::minimal(1.0, 1.0, 1.5, 6.0, 4.0).unwrap();
        let reference = integrate_blowup(&p, 1e6, 1e-12).unwrap();
        let r = integrate_blowup(&p, 1e6, 1e-8).unwrap();
        assert!(r.certified);
        assert!(reference.blow_time.is_finite() && reference.blow_time > 0.0);
        assert!((r.blow_time / reference.blow_time - 1.0).abs() < 1e-5);
    }

    #[test]
    fn threshold_doubling_barely_moves_blow_time() {
        let p = OdeProblem::minimal(0.05, 1.0, 1.5, 6.0, 4.0).unwrap();
        let a = integrate_blowup(&p, 1e6, 1e-10).unwrap();
        let b = integrate_blowup(&p, 2e6, 1e-10).unwrap();
        assert!((a.blow_time / b.blow_time - 1.0).abs() < 1e-3);
    }

    #[test]
    fn envelope_is_maintained() {
        let p = OdeProblem::minimal(0.03, 1.0, 1.5, 6.0, 4.0).unwrap();
        let r = integrate_blowup(&p, 1e6, 1e-9).unwrap();
        assert!(r.envelope_min_ratio >= 1.0 - 1e-9);
    }

    #[test]
    fn unforced_equation_stalls_for_small_delta() {
        let p = OdeProblem::minimal(0.01, 1.0, 1.5, 6.0, 4.0)
            .unwrap()
            .without_forcing();
        let cfg = OdeSettings {
            t_max: 1e20,
            ..OdeSettings::new(1e6, 1e-8)
        };
        assert!(matches!(
            integrate_blowup_with(&p, &cfg),
            Err(Error::NoBlowup { .. })
        ));
    }

    #[test]
    fn quartic_sweep_slope() {
        let template = OdeProblem::minimal(0.1, 1.0, 1.5, 6.0, 4.0).unwrap();
        let deltas = log_spaced_descending(0.1, 0.01, 6);
        let pts = delta_sweep(&template, &deltas, 1e6, 1e-8).unwrap();
        let s = slope(&pts);
        assert!((-6.6..=-5.4).contains(&s), "slope {s}");
    }

    #[test]
    fn quadratic_sweep_slope() {
        let template = OdeProblem::minimal(1e-4, 1.0, 1.0, 0.0, 2.0).unwrap();
        let deltas = log_spaced_descending(1e-4, 1e-6, 5);
        let pts = delta_sweep(&template, &deltas, 1e6, 1e-9).unwrap();
        let s = slope(&pts);
        assert!((s + 1.0 / 3.0).abs() <= 0.1 / 3.0, "slope {s}");
    }

    #[test]
    fn sweep_rejects_bad_input() {
        let template = OdeProblem::minimal(0.1, 1.0, 1.5, 6.0, 4.0).unwrap();
        assert!(delta_sweep(&template, &[0.1], 1e6, 1e-8).is_err());
        assert!(delta_sweep(&template, &[0.1, 0.2, 0.05, 0.01], 1e6, 1e-8).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn blow_time_decreases_in_k_and_f0(
            k in 0.5f64..2.0, dk in 0.1f64..1.0, f0 in 1.0f64..3.0, df in 0.1f64..1.0
        ) {
            let base = OdeProblem::new(1.0, k, 1.0, 0.0, 2.0, f0, 1.0).unwrap();
            let more_k = OdeProblem { k: k + dk, ..base };
            let more_f = OdeProblem { f0: f0 + df, ..base };
            let t = |p: &OdeProblem| integrate_blowup(p, 1e6, 1e-9).unwrap().blow_time;
            let t0 = t(&base);
            prop_assert!(t(&more_k) < t0);
            prop_assert!(t(&more_f) < t0);
        }
    }
}

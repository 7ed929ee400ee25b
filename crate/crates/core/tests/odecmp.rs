use blowup_core::odecmp::*;
use blowup_core::Error;

#[test]
fn riccati_type_blowup_time() {
    // F'' = 6 F², F(0) = 1, F'(0) = 2 is solved by F = (1 - t)^{-2}
    let p = OdeProblem {
        envelope_forcing: false,
        ..OdeProblem::new(1.0, 6.0, 1.0, 0.0, 2.0, 1.0, 2.0).unwrap()
    };
    let r = integrate_blowup(&p, 1e8, 1e-10).unwrap();
    assert!((r.blow_time - 1.0).abs() < 1e-6, "{}", r.blow_time);
    assert!(r.certified);
}

#[test]
fn quartic_sweep_slope() {
    let template = OdeProblem::minimal(0.1, 1.0, 1.5, 6.0, 4.0).unwrap();
    let pts = delta_sweep(&template, &log_spaced_descending(0.1, 0.01, 6), 1e6, 1e-8).unwrap();
    let (x0, y0) = (pts[0].0.ln(), pts[0].1.blow_time.ln());
    let (x1, y1) = (pts[5].0.ln(), pts[5].1.blow_time.ln());
    let slope = (y1 - y0) / (x1 - x0);
    assert!((slope + 6.0).abs() <= 0.6, "{slope}");
    assert!(pts.iter().all(|(_, r)| r.envelope_min_ratio >= 1.0 - 1e-9));
}

#[test]
fn sweep_rejects_unordered_deltas() {
    let template = OdeProblem::minimal(0.1, 1.0, 1.5, 6.0, 4.0).unwrap();
    assert!(matches!(
        delta_sweep(&template, &[0.1, 0.05, 0.06, 0.01], 1e6, 1e-8),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn lemma_exponent_requires_positive_denominator() {
    assert_eq!(lemma_exponent(1.5, 6.0, 4.0).unwrap(), 6.0);
    assert!(lemma_exponent(1.0, 10.0, 2.0).is_err());
}

//! Acceptance criteria 1 to 8. Every test writes one PASS/FAIL line to
//! stderr, bypassing output capture, then asserts its verdict.

use std::io::Write;

use blowup_core::harness::acceptance::{self, AcceptanceLine};

fn report(line: AcceptanceLine) {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{}", line.summary());
    for c in line.checks.iter().filter(|c| c.informational) {
        let _ = writeln!(
            err,
            "    criterion {} info: {} = {:.6e} ({})",
            line.id, c.name, c.value, c.bound
        );
    }
    assert!(line.passed, "{}", line.summary());
}

#[test]
fn criterion_1_exponent_algebra() {
    report(acceptance::criterion_1());
}

#[test]
fn criterion_2_ode_lifespan_scaling() {
    report(acceptance::criterion_2());
}

#[test]
fn criterion_3_special_functions() {
    report(acceptance::criterion_3());
}

#[test]
fn criterion_4_solver_verification() {
    report(acceptance::criterion_4());
}

#[test]
fn criterion_5_blowup_reproduction() {
    report(acceptance::criterion_5());
}

#[test]
fn criterion_6_inequality_monitors() {
    report(acceptance::criterion_6());
}

#[test]
fn criterion_7_picard_cross_oracle() {
    report(acceptance::criterion_7());
}

#[test]
fn criterion_8_region_and_catalog() {
    report(acceptance::criterion_8());
}

use blowup_core::harness::*;
use blowup_core::solver::{solve_lifespan, NonlinearityPreset, RunStatus};
use blowup_core::Error;

fn quartic_sweep(epsilons: Vec<f64>, t_max: f64) -> SweepConfig {
    SweepConfig {
        preset: NonlinearityPreset::UUt2PlusU4,
        n: 2,
        epsilons,
        h: 0.02,
        cfl: 0.45,
        threshold: 1e6,
        t_max,
        output: None,
    }
}

#[test]
fn feasible_sweep_blows_up_monotonically() {
    let cfg = quartic_sweep(vec![4.4, 3.6, 3.0, 2.6], 30.0);
    let out = run_epsilon_sweep(&cfg).unwrap();
    assert!(out.passed && out.all_blew_up && out.monotone);
    let eps: Vec<f64> = out.records.iter().map(|r| r.epsilon).collect();
    assert_eq!(eps, cfg.epsilons);
    let fit = out.fit.unwrap();
    assert!(fit.slope < 0.0);
    assert_eq!(out.predicted_exponent, Some(18.0));
    let a = out.a_fit.unwrap();
    assert!(out
        .records
        .iter()
        .all(|r| r.t_num * r.epsilon.powi(18) <= a));
}

#[test]
fn concurrent_sweep_matches_serial_runs() {
    let cfg = quartic_sweep(vec![4.4, 4.0, 3.6, 3.2], 30.0);
    let par = run_sweep_records(&cfg).unwrap();
    let serial: Vec<_> = cfg
        .epsilons
        .iter()
        .map(|&e| solve_lifespan(&cfg.problem(e).unwrap(), &cfg.lifespan()).unwrap())
        .collect();
    assert_eq!(par, serial);
}

#[test]
fn sweep_without_blowup_fails_with_diagnostics() {
    let cfg = quartic_sweep(vec![4.4, 3.0, 1.0, 0.5], 4.0);
    let records = run_sweep_records(&cfg).unwrap();
    assert_eq!(records[3].status, RunStatus::ReachedTMax);
    let out = assess_sweep(&cfg, records);
    assert!(!out.passed && out.fit.is_none() && out.a_fit.is_none());
    assert!(out.diagnostics.iter().any(|d| d.contains("epsilon = 0.5")));
    match run_epsilon_sweep(&cfg) {
        Err(Error::SweepFailed(msg)) => assert!(msg.contains("reached_t_max")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn ode_sweep_for_power_nonlinearity() {
    let map = blowup_core::model::combined_lemma_mapping(2, 3.0, 4.0).unwrap();
    let cfg = OdeSweepConfig::from_mapping(
        &map,
        blowup_core::odecmp::log_spaced_descending(0.1, 0.01, 6),
    );
    let out = run_ode_sweep(&cfg).unwrap();
    assert!(out.passed);
    assert!((out.lemma_exponent * map.delta_power - 18.0).abs() < 1e-12);
}

#[test]
fn report_from_pipeline_sections() {
    let inputs = ReportInputs {
        region: Some(vec![region_record(2, 3.0, 4.0).unwrap()]),
        ode_fit: Some(run_ode_sweep(&OdeSweepConfig::quartic()).unwrap()),
        pde_sweep: Some(run_epsilon_sweep(&quartic_sweep(vec![4.4, 3.6, 3.0, 2.6], 30.0)).unwrap()),
        ..Default::default()
    };
    let r = report(&inputs).unwrap();
    assert!(r.passed);
    assert_eq!(r.monitors, Section::Absent);
    assert!(!r.limitations.is_empty());
}

#[test]
fn thread_cap_is_validated() {
    // only the parser is exercised here; the variable itself is read by the CLI tests
    assert!(worker_count().unwrap() >= 1);
}

use blowup_core::functionals::*;
use blowup_core::model::NonlinearitySpec;
use blowup_core::solver::*;
use blowup_core::special::Phi1Evaluator;
use blowup_core::Error;

fn run(problem: &ProblemSpec, h: f64, t_end: f64, every: f64) -> RunOutput {
    simulate(
        problem,
        &SimConfig::new(h, 0.45, t_end, 1e6).with_snapshot_interval(every),
    )
    .unwrap()
}

#[test]
fn pointwise_bound_positive_and_refinement_stable() {
    let p = ProblemSpec::quartic_combined(1.0).unwrap();
    let band = Band {
        t_min: 1.0,
        t_max: Some(3.0),
        ..Band::default()
    };
    let a = monitor_pointwise_band(&run(&p, 0.01, 3.0, 0.05), band).unwrap();
    let b = monitor_pointwise_band(&run(&p, 0.005, 3.0, 0.05), band).unwrap();
    assert!(a.passed && b.passed);
    assert!(a.relative_change(&b) < 0.15);
}

#[test]
fn growth_constant_scales_inversely_with_amplitude() {
    // F ~ ε t in the linear regime, so F / ε³ grows as ε shrinks
    let c = |eps: f64| {
        let r = run(
            &ProblemSpec::quartic_combined(eps).unwrap(),
            0.01,
            10.0,
            0.05,
        );
        monitor_cubic_mass_growth(&r).unwrap().fitted_constant
    };
    let (one, half) = (c(1.0), c(0.5));
    assert!(one > 0.0 && half >= one, "{one} {half}");
}

#[test]
fn second_derivative_of_mass_matches_source_integral() {
    let r = run(
        &ProblemSpec::quartic_combined(2.2).unwrap(),
        0.01,
        5.0,
        0.01,
    );
    let rows = identity_residual(&r);
    assert!(rows.len() > 100);
    let scale = rows.iter().map(|x| x.2.abs()).fold(0.0, f64::max);
    let worst = rows.iter().map(|x| (x.1 - x.2).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-3 * scale, "{worst:e} vs {scale:e}");
}

#[test]
fn holder_chain_holds_samplewise() {
    let p = ProblemSpec::power_combined(2, 3.0, 4.0, 1.0).unwrap();
    let ev = Phi1Evaluator::with_default_nodes(2).unwrap();
    let m = monitor_holder_chain(&run(&p, 0.01, 4.0, 0.1), 3.0, &ev).unwrap();
    assert!(m.passed, "{}", m.min_margin);
    assert!(m.lhs.iter().zip(&m.rhs).all(|(l, r)| l >= r));
}

#[test]
fn picard_agrees_with_solver_at_second_order() {
    let p = ProblemSpec::quartic_combined(1.0).unwrap();
    let diff = |h: f64| {
        let cfg = PicardConfig {
            spacing: h,
            ..PicardConfig::default()
        };
        let sol = dalembert_picard(&p, &cfg, None).unwrap();
        let r = run(&p, h, cfg.t_end, h / 2.0);
        sol.compare_with_run(&r).unwrap().max_abs_diff
    };
    let (a, b) = (diff(0.02), diff(0.01));
    assert!(b <= 0.5 * (2.0 * 0.01f64.powi(2)) + 1e-6, "{b:e}");
    let order = (a / b).log2();
    assert!((order - 2.0).abs() < 0.3, "order {order}");
}

#[test]
fn monitors_reject_zero_data() {
    let p = ProblemSpec::new(
        2,
        NonlinearitySpec::quartic_combined(),
        InitialData::new(Profile::Zero, Profile::Zero, 1.0).unwrap(),
    )
    .unwrap();
    let r = run(&p, 0.02, 2.0, 0.1);
    assert!(matches!(
        monitor_cubic_mass_growth(&r),
        Err(Error::Degenerate(_))
    ));
    assert!(matches!(
        monitor_quartic_mass_ode(&r),
        Err(Error::Degenerate(_))
    ));
}

#[test]
fn monitor_reports_serialize() {
    let r = run(&ProblemSpec::quartic_combined(1.0).unwrap(), 0.02, 3.0, 0.1);
    let m = monitor_quartic_mass_ode(&r).unwrap();
    let back: MonitorReport = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
    assert_eq!(back, m);
}

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lab(dir: &Path, args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_blowup-lab"));
    cmd.current_dir(dir)
        .args(args)
        .env_remove("BLOWUP_LAB_THREADS");
    if let Some(t) = threads {
        cmd.env("BLOWUP_LAB_THREADS", t);
    }
    cmd.output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn region_and_table1_print_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(
        dir.path(),
        &["region", "--n", "2", "--p", "3", "--q", "4"],
        None,
    );
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["admissible"], true);
    assert_eq!(v["predicted_exponent"], 18.0);

    let out = lab(
        dir.path(),
        &["region", "--n", "2", "--p", "5", "--q", "1.5"],
        None,
    );
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["admissible"], false);
    assert_eq!(v["predicted_exponent"], Value::Null);

    let out = lab(
        dir.path(),
        &["region", "--n", "2", "--p", "0.5", "--q", "4"],
        None,
    );
    assert_eq!(code(&out), 2);

    let out = lab(
        dir.path(),
        &["table1", "--n", "2", "--alpha", "1", "--flags", "d2"],
        None,
    );
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["order_exponent"], -2.0);

    let out = lab(
        dir.path(),
        &["table1", "--n", "2", "--alpha", "1", "--flags", "bogus"],
        None,
    );
    assert_eq!(code(&out), 2);
}

#[test]
fn phi1_table_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(
        dir.path(),
        &[
            "phi1",
            "--n",
            "3",
            "--r-max",
            "20",
            "--samples",
            "41",
            "--output",
            "phi1.csv",
        ],
        None,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let mut r = csv::Reader::from_path(dir.path().join("phi1.csv")).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["r", "phi1", "bound_ratio"]);
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 41);
    // φ₁ = 4π sinh(r)/r in three dimensions
    let last = &rows[40];
    let r_last: f64 = last[0].parse().unwrap();
    let phi: f64 = last[1].parse().unwrap();
    assert!((phi / (4.0 * std::f64::consts::PI * r_last.sinh() / r_last) - 1.0).abs() < 1e-10);
}

#[test]
fn ode_sweep_recovers_scaling() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(
        dir.path(),
        &["ode-sweep", "--output", "ode.csv", "--json", "ode.json"],
        None,
    );
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!((v["slope"].as_f64().unwrap() + 6.0).abs() < 0.6);
    assert_eq!(v["passed"], true);
    let text = std::fs::read_to_string(dir.path().join("ode.csv")).unwrap();
    assert_eq!(text.lines().count(), 7);
}

#[test]
fn simulate_then_monitor() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(
        dir.path(),
        &[
            "simulate",
            "--epsilon",
            "1",
            "--t-max",
            "3",
            "--h",
            "0.02",
            "--out",
            "run",
        ],
        None,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rec = json(&out);
    assert_eq!(rec["status"]["status"], "reached_t_max");
    assert_eq!(rec["t_num"], 3.0);
    for f in ["meta.json", "record.json", "series.csv", "snapshots.csv"] {
        assert!(dir.path().join("run").join(f).exists(), "{f}");
    }
    let out = lab(
        dir.path(),
        &["monitor", "--run", "run", "--json", "mon.json"],
        None,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let lines: Vec<Value> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 3);
    assert!(lines.iter().all(|l| l["passed"] == true));

    let out = lab(
        dir.path(),
        &["report", "--monitors", "mon.json", "--region", "2,3,4"],
        None,
    );
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["monitors"]["status"], "present");
    assert_eq!(v["pde_sweep"]["status"], "absent");
}

#[test]
fn monitor_rejects_missing_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(dir.path(), &["monitor", "--run", "nowhere"], None);
    assert_eq!(code(&out), 2);
}

#[test]
fn failing_sweep_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(
        dir.path(),
        &[
            "sweep",
            "--epsilons",
            "4.4,3.0,1.0,0.5",
            "--t-max",
            "4",
            "--h",
            "0.02",
            "--json",
            "s.json",
        ],
        None,
    );
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert_eq!(v["passed"], false);
    assert!(v["diagnostics"][0]
        .as_str()
        .unwrap()
        .contains("reached_t_max"));
    let out = lab(dir.path(), &["report", "--sweep", "s.json"], None);
    assert_eq!(code(&out), 1);
}

#[test]
fn sweep_output_is_deterministic_across_thread_caps() {
    let dir = tempfile::tempdir().unwrap();
    let args = |name: &'static str| {
        [
            "sweep",
            "--epsilons",
            "4.4,4.0,3.6,3.2",
            "--t-max",
            "10",
            "--h",
            "0.02",
            "--output",
            name,
        ]
    };
    assert_eq!(code(&lab(dir.path(), &args("a.csv"), None)), 0);
    assert_eq!(code(&lab(dir.path(), &args("b.csv"), Some("1"))), 0);
    assert_eq!(code(&lab(dir.path(), &args("c.csv"), Some("3"))), 0);
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.csv")).unwrap());
    assert_eq!(a, std::fs::read(dir.path().join("c.csv")).unwrap());
}

#[test]
fn invalid_thread_cap_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    for bad in ["0", "many", "-2"] {
        let out = lab(
            dir.path(),
            &["sweep", "--epsilons", "4.4,4.0,3.6,3.2", "--t-max", "1"],
            Some(bad),
        );
        assert_eq!(code(&out), 2, "{bad}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("BLOWUP_LAB_THREADS"));
    }
}

#[test]
fn config_file_supplies_options() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("ode.toml"),
        "deltas = [0.1, 0.05, 0.03, 0.02, 0.01]\nalpha = 6.0\nbeta = 4.0\na = 1.5\n",
    )
    .unwrap();
    let out = lab(dir.path(), &["ode-sweep", "--config", "ode.toml"], None);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["points_used"], 5);
    std::fs::write(dir.path().join("bad.toml"), "delta = 0.1\n").unwrap();
    let out = lab(dir.path(), &["ode-sweep", "--config", "bad.toml"], None);
    assert_eq!(code(&out), 2);
}

#[test]
fn empty_report_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(dir.path(), &["report"], None);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing input"));
}

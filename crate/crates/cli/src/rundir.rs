//! On-disk form of a solver run: `meta.json` (everything but the sampled
//! data), `series.csv` (per-step diagnostics) and `snapshots.csv` (fields
//! at the stored times).

use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use blowup_core::harness::format_float;
use blowup_core::solver::{NonlinearityPreset, RunOutput, SeriesRow, SolutionState};
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize)]
pub struct RunMeta {
    pub preset: NonlinearityPreset,
    pub run: RunOutput,
}

pub fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    serde_json::from_reader(std::io::BufReader::new(f))
        .with_context(|| format!("parsing {}", path.display()))
}

pub fn write_series<W: Write>(w: &mut csv::Writer<W>, rows: &[SeriesRow]) -> Result<()> {
    w.write_record(["t", "max_u", "max_v", "min_u", "mass", "nonlinear_integral"])?;
    for r in rows {
        w.write_record(
            [r.t, r.max_u, r.max_v, r.min_u, r.mass, r.nonlinear_integral].map(format_float),
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_run(dir: &Path, preset: NonlinearityPreset, run: &RunOutput) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let meta = RunMeta {
        preset,
        run: RunOutput {
            series: Vec::new(),
            snapshots: Vec::new(),
            ..run.clone()
        },
    };
    write_json(&dir.join("meta.json"), &meta)?;
    write_series(&mut csv_writer(&dir.join("series.csv"))?, &run.series)?;
    let mut w = csv_writer(&dir.join("snapshots.csv"))?;
    w.write_record(["t", "j", "r", "u", "v"])?;
    for s in &run.snapshots {
        for (j, (u, v)) in s.u.iter().zip(&s.v).enumerate() {
            w.write_record([
                format_float(s.t),
                j.to_string(),
                format_float(run.grid.r(j)),
                format_float(*u),
                format_float(*v),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct SnapshotRow {
    t: f64,
    j: usize,
    u: f64,
    v: f64,
}

pub fn read_run(dir: &Path) -> Result<RunMeta> {
    let mut meta: RunMeta = read_json(&dir.join("meta.json"))?;
    let path = dir.join("series.csv");
    let mut r =
        csv::Reader::from_path(&path).with_context(|| format!("opening {}", path.display()))?;
    meta.run.series = r
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("parsing {}", path.display()))?;
    let path = dir.join("snapshots.csv");
    let mut r =
        csv::Reader::from_path(&path).with_context(|| format!("opening {}", path.display()))?;
    let mut snaps: Vec<SolutionState> = Vec::new();
    for row in r.deserialize() {
        let row: SnapshotRow = row.with_context(|| format!("parsing {}", path.display()))?;
        let fresh = snaps.last().is_none_or(|s| s.t != row.t);
        if fresh {
            snaps.push(SolutionState {
                t: row.t,
                u: Vec::new(),
                v: Vec::new(),
            });
        }
        let s = snaps.last_mut().expect("snapshot pushed above");
        if row.j != s.u.len() {
            bail!(
                "{}: cell {} out of order at t = {}",
                path.display(),
                row.j,
                row.t
            );
        }
        s.u.push(row.u);
        s.v.push(row.v);
    }
    meta.run.snapshots = snaps;
    Ok(meta)
}

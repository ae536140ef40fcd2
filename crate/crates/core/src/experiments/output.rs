//! Output files of a sweep.
//!
//! * `rmse.csv`: `n,estimator,param,rmse`
//! * `misclass.csv`: `n,classifier,rate` (`oracle` first at each point)
//! * `meta.json`: run metadata, the only file with timings and timestamps
//!
//! Floats are printed in shortest round-trip form, so parsing the CSVs back
//! reproduces the in-memory values exactly.

use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use super::config::{schedule_name, EstimatorId, ExperimentConfig};
use super::{MisclassRow, RmseRow, SingleRun, SweepResult};
use crate::error::{Error, Result};
use crate::estimators::StepRule;
use crate::graph::io::{save_score_graph, save_states};

pub const META_SCHEMA_VERSION: u32 = 1;

pub fn write_rmse_csv<W: Write>(w: W, rows: &[RmseRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["n", "estimator", "param", "rmse"])?;
    for r in rows {
        wtr.write_record([
            r.n.to_string(),
            r.estimator.clone(),
            r.param.clone(),
            r.rmse.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_misclass_csv<W: Write>(w: W, rows: &[MisclassRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["n", "classifier", "rate"])?;
    for r in rows {
        wtr.write_record([r.n.to_string(), r.classifier.clone(), r.rate.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, k: usize, line: usize) -> Result<T> {
    let raw = rec.get(k).unwrap_or("");
    raw.parse().map_err(|_| Error::Parse {
        path: "<csv>".into(),
        line,
        msg: format!("bad field {k}: {raw:?}"),
    })
}

fn records<R: Read>(r: R, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    if rdr.headers()?.iter().ne(header.iter().copied()) {
        return Err(Error::Parse {
            path: "<csv>".into(),
            line: 1,
            msg: format!("expected header {}", header.join(",")),
        });
    }
    Ok(rdr.records().collect::<std::result::Result<_, _>>()?)
}

pub fn read_rmse_csv<R: Read>(r: R) -> Result<Vec<RmseRow>> {
    records(r, &["n", "estimator", "param", "rmse"])?
        .iter()
        .enumerate()
        .map(|(k, rec)| {
            Ok(RmseRow {
                n: field(rec, 0, k + 2)?,
                estimator: field(rec, 1, k + 2)?,
                param: field(rec, 2, k + 2)?,
                rmse: field(rec, 3, k + 2)?,
            })
        })
        .collect()
}

pub fn read_misclass_csv<R: Read>(r: R) -> Result<Vec<MisclassRow>> {
    records(r, &["n", "classifier", "rate"])?
        .iter()
        .enumerate()
        .map(|(k, rec)| {
            Ok(MisclassRow {
                n: field(rec, 0, k + 2)?,
                classifier: field(rec, 1, k + 2)?,
                rate: field(rec, 2, k + 2)?,
            })
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct ConfigEcho<'a> {
    model: &'a str,
    #[serde(rename = "C")]
    states: usize,
    #[serde(rename = "R")]
    levels: usize,
    theta: &'a [f64],
    gamma: &'a [f64],
    #[serde(rename = "N")]
    n_agents: usize,
    sweep: &'a [usize],
    trials: usize,
    estimators: &'a [EstimatorId],
    seed: u64,
    solver_alpha: Option<f64>,
    solver_tol: f64,
    solver_max_iters: usize,
    distributed_alpha: Option<f64>,
    rounds: usize,
    comm_family: &'static str,
    comm_q: usize,
}

#[derive(Debug, Serialize)]
struct PointMeta {
    n: usize,
    trials: usize,
    wall_clock_s: f64,
    max_distributed_spread: Option<f64>,
}

#[derive(Debug, Serialize)]
struct Meta<'a> {
    schema_version: u32,
    crate_version: &'static str,
    finished_unix_s: u64,
    total_wall_clock_s: f64,
    config: ConfigEcho<'a>,
    points: Vec<PointMeta>,
}

fn echo(config: &ExperimentConfig) -> ConfigEcho<'_> {
    ConfigEcho {
        model: config.model.name(),
        states: config.model.num_states(),
        levels: config.model.num_scores(),
        theta: &config.truth.theta,
        gamma: &config.truth.gamma,
        n_agents: config.n_agents,
        sweep: &config.sweep,
        trials: config.trials,
        estimators: &config.estimators,
        seed: config.seed,
        solver_alpha: match config.solver.step {
            StepRule::Fixed(a) => Some(a),
            _ => None,
        },
        solver_tol: config.solver.tol,
        solver_max_iters: config.solver.max_iters,
        distributed_alpha: config.distributed_alpha,
        rounds: config.rounds,
        comm_family: schedule_name(config.schedule),
        comm_q: config.period,
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Write `rmse.csv`, `misclass.csv` and `meta.json` into `dir`, creating it
/// if needed.
pub fn emit_outputs(result: &SweepResult, config: &ExperimentConfig, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = create(dir, "rmse.csv")?;
    write_rmse_csv(&mut w, &result.rmse_rows())?;
    w.flush()?;
    let mut w = create(dir, "misclass.csv")?;
    write_misclass_csv(&mut w, &result.misclass_rows())?;
    w.flush()?;
    let meta = Meta {
        schema_version: META_SCHEMA_VERSION,
        crate_version: env!("CARGO_PKG_VERSION"),
        finished_unix_s: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
        total_wall_clock_s: result.points.iter().map(|p| p.wall_clock_s).sum(),
        config: echo(config),
        points: result
            .points
            .iter()
            .map(|p| PointMeta {
                n: p.n_edges,
                trials: p.trials,
                wall_clock_s: p.wall_clock_s,
                max_distributed_spread: p.max_spread,
            })
            .collect(),
    };
    let mut w = create(dir, "meta.json")?;
    serde_json::to_writer_pretty(&mut w, &meta)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Write `graph.txt`, `states.txt`, `estimates.csv`, `soft.csv` (true
/// parameters) and `soft_<estimator>.csv` into `dir`.
pub fn emit_single(run: &SingleRun, config: &ExperimentConfig, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    save_score_graph(dir.join("graph.txt"), &run.instance.graph)?;
    save_states(dir.join("states.txt"), &run.instance.states)?;
    let mut w = create(dir, "soft.csv")?;
    run.oracle.write_csv(&mut w)?;
    w.flush()?;

    let names = config.model.param_names();
    let mut wtr = csv::Writer::from_writer(create(dir, "estimates.csv")?);
    wtr.write_record(["estimator", "param", "value"])?;
    for (name, v) in names.iter().zip(config.truth.flatten()) {
        wtr.write_record(["truth", name, &v.to_string()])?;
    }
    for (id, est, out) in &run.estimates {
        for (name, v) in names.iter().zip(est.flatten()) {
            wtr.write_record([id.label(), name, &v.to_string()])?;
        }
        let mut w = create(dir, &format!("soft_{}.csv", id.label()))?;
        out.write_csv(&mut w)?;
        w.flush()?;
    }
    wtr.flush()?;
    Ok(())
}

//! CSV formats. Floats are written with 17 significant digits so files
//! round-trip bit-exactly.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use smoothspatial::accuracy::{ErrorSummary, Measurement};
use smoothspatial::geom::Pose2D;
use smoothspatial::logic::Trajectory;
use smoothspatial::opt::{PoseTable, Problem, TraceRow};
use smoothspatial::{AxisAlignedBox3, Scene, SceneObject, Shape};

use crate::error::CliError;

pub const TRAJECTORY_HEADER: [&str; 5] = ["t", "object", "x", "y", "theta"];
pub const TRACE_HEADER: [&str; 7] = ["iteration", "loss", "rho_smooth", "rho_exact", "grad_norm", "tau", "perturbed"];
pub const ACCURACY_HEADER: [&str; 7] = ["pair", "quantity", "tau", "samples", "exact", "smooth", "abs_error"];
pub const SUMMARY_HEADER: [&str; 6] = ["quantity", "tau", "samples", "count", "max_error", "mean_error"];
pub const DEMO_HEADER: [&str; 8] = ["t", "object", "min_x", "min_y", "min_z", "max_x", "max_y", "max_z"];

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn create(path: &Path) -> Result<csv::Writer<File>, CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn finish<W: Write>(mut w: csv::Writer<W>, path: &Path) -> Result<(), CliError> {
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_trajectory_to<W: Write>(w: W, problem: &Problem, poses: &PoseTable<f64>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(TRAJECTORY_HEADER)?;
    for t in 0..=problem.horizon() {
        for ((name, _, _), row) in problem.movable().zip(poses) {
            let p = row[t];
            w.write_record([t.to_string(), name.to_string(), num(p.x), num(p.y), num(p.theta)])?;
        }
    }
    w.flush().map_err(|e| CliError::Data { path: "trajectory".into(), message: e.to_string() })
}

pub fn write_trajectory(path: &Path, problem: &Problem, poses: &PoseTable<f64>) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    write_trajectory_to(file, problem, poses)
}

fn check_header(path: &Path, found: &csv::StringRecord, expected: &[&str]) -> Result<(), CliError> {
    if found.iter().ne(expected.iter().copied()) {
        return Err(CliError::data(path, format!("header {:?}, expected {:?}", found.iter().collect::<Vec<_>>(), expected)));
    }
    Ok(())
}

fn field<T: std::str::FromStr>(path: &Path, rec: &csv::StringRecord, i: usize, name: &str) -> Result<T, CliError> {
    let line = rec.position().map_or(0, |p| p.line());
    rec.get(i)
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| CliError::data(path, format!("line {line}: bad `{name}` value {:?}", rec.get(i).unwrap_or(""))))
}

/// Reads the poses of every movable object of `problem` at `t = 0..=T`.
pub fn read_trajectory_from<R: Read>(r: R, path: &Path, problem: &Problem) -> Result<PoseTable<f64>, CliError> {
    let mut reader = csv::Reader::from_reader(r);
    check_header(path, reader.headers()?, &TRAJECTORY_HEADER)?;
    let names: Vec<&str> = problem.movable().map(|(n, _, _)| n).collect();
    let horizon = problem.horizon();
    let mut table: Vec<Vec<Option<Pose2D<f64>>>> = vec![vec![None; horizon + 1]; names.len()];
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let t: usize = field(path, &rec, 0, "t")?;
        let object = rec.get(1).unwrap_or("");
        let Some(m) = names.iter().position(|n| *n == object) else {
            return Err(CliError::data(path, format!("line {line}: `{object}` is not a movable object")));
        };
        if t > horizon {
            return Err(CliError::data(path, format!("line {line}: time {t} beyond horizon {horizon}")));
        }
        let pose = Pose2D::new(field(path, &rec, 2, "x")?, field(path, &rec, 3, "y")?, field(path, &rec, 4, "theta")?);
        if table[m][t].replace(pose).is_some() {
            return Err(CliError::data(path, format!("line {line}: duplicate row for `{object}` at t = {t}")));
        }
    }
    table
        .into_iter()
        .zip(&names)
        .map(|(row, name)| {
            row.into_iter()
                .enumerate()
                .map(|(t, p)| p.ok_or_else(|| CliError::data(path, format!("missing pose of `{name}` at t = {t}"))))
                .collect()
        })
        .collect()
}

pub fn read_trajectory(path: &Path, problem: &Problem) -> Result<PoseTable<f64>, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_trajectory_from(file, path, problem)
}

pub fn write_trace(path: &Path, trace: &[TraceRow]) -> Result<(), CliError> {
    let mut w = create(path)?;
    w.write_record(TRACE_HEADER)?;
    for r in trace {
        w.write_record([
            r.iteration.to_string(),
            num(r.loss),
            num(r.rho_smooth),
            num(r.rho_exact),
            num(r.grad_norm),
            num(r.tau),
            u8::from(r.perturbed).to_string(),
        ])?;
    }
    finish(w, path)
}

pub fn write_accuracy(path: &Path, rows: &[Measurement]) -> Result<(), CliError> {
    let mut w = create(path)?;
    w.write_record(ACCURACY_HEADER)?;
    for m in rows {
        w.write_record([
            m.pair.to_string(),
            m.quantity.name().to_string(),
            num(m.tau),
            m.samples.to_string(),
            num(m.exact),
            num(m.smooth),
            num(m.error()),
        ])?;
    }
    finish(w, path)
}

pub fn write_summary(path: &Path, rows: &[ErrorSummary]) -> Result<(), CliError> {
    let mut w = create(path)?;
    w.write_record(SUMMARY_HEADER)?;
    for s in rows {
        w.write_record([
            s.quantity.name().to_string(),
            num(s.tau),
            s.samples.to_string(),
            s.count.to_string(),
            num(s.max_error),
            num(s.mean_error),
        ])?;
    }
    finish(w, path)
}

/// Demonstrations are box worlds: one row per object per time step.
pub fn write_demo(path: &Path, traj: &Trajectory<f64>) -> Result<(), CliError> {
    let mut w = create(path)?;
    w.write_record(DEMO_HEADER)?;
    for (t, scene) in traj.scenes().iter().enumerate() {
        for (name, obj) in scene.iter() {
            let Shape::Box3(b) = &obj.shape else {
                return Err(CliError::data(path, format!("object `{name}` is not a box")));
            };
            let mut rec = vec![t.to_string(), name.to_string()];
            rec.extend(b.min.iter().chain(&b.max).map(|&v| num(v)));
            w.write_record(rec)?;
        }
    }
    finish(w, path)
}

pub fn read_demo(path: &Path) -> Result<Trajectory<f64>, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    check_header(path, reader.headers()?, &DEMO_HEADER)?;
    let mut scenes: Vec<Scene<f64>> = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let t: usize = field(path, &rec, 0, "t")?;
        if t == scenes.len() {
            scenes.push(Scene::new());
        } else if t + 1 != scenes.len() {
            return Err(CliError::data(path, format!("line {line}: rows must be grouped by increasing t")));
        }
        let mut c = [0.0; 6];
        for (k, v) in c.iter_mut().enumerate() {
            *v = field(path, &rec, k + 2, DEMO_HEADER[k + 2])?;
        }
        let b = AxisAlignedBox3::new([c[0], c[1], c[2]], [c[3], c[4], c[5]])
            .map_err(|e| CliError::data(path, format!("line {line}: {e}")))?;
        scenes[t]
            .insert(rec.get(1).unwrap_or(""), SceneObject::boxed(b))
            .map_err(|e| CliError::data(path, format!("line {line}: {e}")))?;
    }
    Trajectory::new(scenes, 1.0).map_err(|e| CliError::data(path, e.to_string()))
}

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use serde::Serialize;
use tricut::advect::{advect_step, InterfaceState};
use tricut::flow::{timestep, Field};
use tricut::geom::Point2;
use tricut::mesh::{build_lattice, import_mesh, TriMesh};
use tricut::metrics::{convergence_order, mass_error, relative_error, shape_error, Grouping};
use tricut::shapes::{init_state, polygonize, DensePolygon, InitOptions};

use crate::config::{MeshSource, RunConfig, SweepConfig, Test};
use crate::{dump, svg};

/// Boundary vertices used for the truth polygon.
const TRUTH_VERTICES: usize = 1000;

pub fn load_mesh(source: &MeshSource, test: Test) -> Result<TriMesh> {
    match source {
        MeshSource::Lattice { n } => Ok(build_lattice(*n, test.domain())?),
        MeshSource::Files { stem } => {
            let node_path = stem.with_extension("node");
            let ele_path = stem.with_extension("ele");
            let node = fs::read_to_string(&node_path).with_context(|| format!("reading {}", node_path.display()))?;
            let ele = fs::read_to_string(&ele_path).with_context(|| format!("reading {}", ele_path.display()))?;
            Ok(import_mesh(&node, &ele)?)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub step: usize,
    pub time: f64,
    pub e_m: f64,
    pub e_g: Option<f64>,
    pub e_r: Option<f64>,
    pub failed_triangles: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub rows: Vec<MetricsRow>,
    /// `E_g` at the last time with a known exact shape.
    pub final_e_g: Option<f64>,
    pub snapshots: Vec<PathBuf>,
}

#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    config: &'a C,
    library_version: &'static str,
    cli_version: &'static str,
}

fn write_manifest<C: Serialize>(dir: &Path, config: &C) -> Result<()> {
    let m = Manifest {
        config,
        library_version: tricut::VERSION,
        cli_version: env!("CARGO_PKG_VERSION"),
    };
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&m)? + "\n").with_context(|| format!("writing {}", path.display()))
}

fn grouping(mesh: &TriMesh) -> Grouping {
    if mesh.lattice().is_some() {
        Grouping::LatticeCells
    } else {
        Grouping::Triangles
    }
}

/// Exact shape at `time`, where one is known: always for rigid rotation,
/// otherwise at the start and after a full reversal period.
fn truth_at(test: Test, initial: &DensePolygon, time: f64, complete: bool) -> Option<DensePolygon> {
    match test.field() {
        None => Some(initial.clone()),
        Some((Field::RigidRotation { center, omega }, _)) => {
            let (s, c) = (omega * time).sin_cos();
            let rings = initial
                .rings()
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|&p| {
                            let d = p - center;
                            center + Point2::new(c * d.x - s * d.y, s * d.x + c * d.y)
                        })
                        .collect()
                })
                .collect();
            DensePolygon::new(rings).ok()
        }
        Some(_) => (time == 0.0 || complete).then(|| initial.clone()),
    }
}

fn write_snapshot(dir: &Path, state: &InterfaceState, time: f64, wireframe: bool) -> Result<PathBuf> {
    let svg_path = dir.join(format!("interface_{time:.4}.svg"));
    fs::write(&svg_path, svg::render(state, wireframe)).with_context(|| format!("writing {}", svg_path.display()))?;
    let bin_path = dir.join(format!("state_{time:.4}.bin"));
    let mut w = BufWriter::new(File::create(&bin_path).with_context(|| format!("creating {}", bin_path.display()))?);
    dump::write_cuts(&mut w, state.cuts())?;
    w.flush()?;
    Ok(svg_path)
}

fn write_metrics(dir: &Path, rows: &[MetricsRow]) -> Result<()> {
    let opt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
    let mut out = String::from("step,time,E_m,E_g,E_r,failed_triangles\n");
    for r in rows {
        out += &format!(
            "{},{:e},{:e},{},{},{}\n",
            r.step,
            r.time,
            r.e_m,
            opt(r.e_g),
            opt(r.e_r),
            r.failed_triangles
        );
    }
    let path = dir.join("metrics.csv");
    fs::write(&path, out).with_context(|| format!("writing {}", path.display()))
}

/// Initialize, advect over one period when the test has a field, and
/// write metrics, snapshots and a manifest into `config.out`.
pub fn run(config: &RunConfig) -> Result<RunSummary> {
    config.validate()?;
    fs::create_dir_all(&config.out).with_context(|| format!("creating {}", config.out.display()))?;
    write_manifest(&config.out, config)?;
    let mesh = Arc::new(load_mesh(&config.mesh, config.test)?);
    let shape = config.test.shape_spec();
    let initial = polygonize(&shape, TRUTH_VERTICES)?;
    let opts = InitOptions {
        area_correct: config.init_area_correct,
        ..Default::default()
    };
    let (mut state, _) = init_state(mesh.clone(), &shape, opts)?;
    let a0 = state.total_liquid_area();
    let grouping = grouping(&mesh);
    let errors = |s: &InterfaceState, truth: Option<DensePolygon>| -> Result<(Option<f64>, Option<f64>)> {
        match truth {
            Some(t) => {
                let e_g = shape_error(s, &t, grouping)?.e_g;
                Ok((Some(e_g), Some(relative_error(e_g, t.area())?)))
            }
            None => Ok((None, None)),
        }
    };

    let (e_g, e_r) = errors(&state, truth_at(config.test, &initial, 0.0, false))?;
    let mut rows = vec![MetricsRow {
        step: 0,
        time: 0.0,
        e_m: 0.0,
        e_g,
        e_r,
        failed_triangles: 0,
    }];
    let mut snapshots = Vec::new();
    let mut final_e_g = e_g;

    let Some((field, period)) = config.test.field() else {
        snapshots.push(write_snapshot(&config.out, &state, 0.0, config.wireframe)?);
        write_metrics(&config.out, &rows)?;
        return Ok(RunSummary {
            rows,
            final_e_g,
            snapshots,
        });
    };

    let plan = timestep(&field, &mesh, config.cr)?;
    let total = plan.steps.unwrap_or_else(|| (period / plan.dt).ceil() as usize);
    let marks: Vec<usize> = config.snapshots.iter().map(|f| ((f * total as f64).round() as usize).max(1)).collect();
    for step in 1..=total {
        let (next, report) = advect_step(&state, &field, plan.dt, config.seed)?;
        state = next;
        let time = report.time;
        let snap = marks.contains(&step);
        let (e_g, e_r) = if snap || step == total {
            errors(&state, truth_at(config.test, &initial, time, step == total))?
        } else {
            (None, None)
        };
        if e_g.is_some() {
            final_e_g = e_g;
        }
        rows.push(MetricsRow {
            step,
            time,
            e_m: mass_error(&state, a0)?,
            e_g,
            e_r,
            failed_triangles: report.failed_triangles,
        });
        if snap {
            snapshots.push(write_snapshot(&config.out, &state, time, config.wireframe)?);
        }
    }
    write_metrics(&config.out, &rows)?;
    Ok(RunSummary {
        rows,
        final_e_g,
        snapshots,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub level: usize,
    pub resolution: String,
    pub e_g: Option<f64>,
    /// Order against the previous level.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub rows: Vec<SweepRow>,
    pub slope: Option<f64>,
}

/// Run every level into `<out>/level_<k>` and tabulate the final `E_g`
/// with pairwise orders and the least-squares slope.
pub fn sweep(config: &SweepConfig) -> Result<SweepSummary> {
    config.validate()?;
    fs::create_dir_all(&config.base.out).with_context(|| format!("creating {}", config.base.out.display()))?;
    write_manifest(&config.base.out, config)?;
    let mut rows = Vec::new();
    let mut levels = Vec::new();
    for (k, mesh) in config.meshes.iter().enumerate() {
        let level = RunConfig {
            mesh: mesh.clone(),
            out: config.base.out.join(format!("level_{k}")),
            ..config.base.clone()
        };
        let summary = run(&level)?;
        let (resolution, x) = match mesh {
            MeshSource::Lattice { n } => (n.to_string(), *n as f64),
            MeshSource::Files { stem } => (stem.display().to_string(), (1u64 << k) as f64),
        };
        if let Some(e) = summary.final_e_g {
            levels.push((x, e));
        }
        rows.push(SweepRow {
            level: k,
            resolution,
            e_g: summary.final_e_g,
            order: None,
        });
    }
    let mut slope = None;
    if levels.len() == rows.len() && levels.len() >= 2 {
        let conv = convergence_order(&levels)?;
        for (row, o) in rows.iter_mut().skip(1).zip(conv.orders) {
            row.order = o;
        }
        slope = conv.slope;
    }

    let fmt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
    let mut out = String::from("level,resolution,E_g,O_n\n");
    for r in &rows {
        out += &format!("{},{},{},{}\n", r.level, r.resolution, fmt(r.e_g), fmt(r.order));
    }
    out += &format!("# least-squares slope: {}\n", fmt(slope));
    let path = config.base.out.join("convergence.csv");
    fs::write(&path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(SweepSummary { rows, slope })
}

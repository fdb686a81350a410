use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use tricut_cli::config::{MeshSource, RunConfig, ShapeName, SweepConfig, Test, ZalesakConfig};
use tricut_cli::run::{run, sweep, RunSummary};

/// Interface tracking benchmarks with triangle edge cuts.
///
/// Set TRICUT_THREADS to bound the worker pool.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Initialize a shape on a mesh and measure the reconstruction error.
    StaticRecon {
        #[arg(long, value_enum, default_value = "circle")]
        shape: ShapeName,
        #[command(flatten)]
        common: Common,
    },
    /// Single vortex, circle at (0.5, 0.75), period 8.
    Vortex {
        #[command(flatten)]
        common: Common,
    },
    /// Zalesak's notched disk under rigid rotation, period 4 pi.
    Zalesak {
        #[arg(long, value_enum, default_value = "a", ignore_case = true)]
        config: ZalesakConfig,
        #[command(flatten)]
        common: Common,
    },
    /// Cellular deformation flow with 16 vortices, period 2.
    Deform {
        #[command(flatten)]
        common: Common,
    },
    /// Repeat a test across resolutions and report convergence orders.
    Convergence {
        #[arg(value_enum)]
        test: SweepTest,
        #[arg(long, value_enum, default_value = "circle")]
        shape: ShapeName,
        #[arg(long, value_enum, default_value = "a", ignore_case = true)]
        config: ZalesakConfig,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepTest {
    StaticRecon,
    Vortex,
    Zalesak,
    Deform,
}

#[derive(Args)]
struct Common {
    /// Lattice cells per side; a comma list for sweeps.
    #[arg(long, value_delimiter = ',', conflicts_with = "mesh")]
    n: Vec<usize>,
    /// Mesh file stem, reading `<stem>.node` and `<stem>.ele`; repeat for sweeps.
    #[arg(long)]
    mesh: Vec<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    cr: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Snapshot times as fractions of the period.
    #[arg(long, value_delimiter = ',')]
    snapshots: Option<Vec<f64>>,
    /// Correct each triangle's initial fraction to the exact cell area.
    #[arg(long)]
    init_area_correct: bool,
    /// Draw the mesh under the interface in SVG output.
    #[arg(long)]
    wireframe: bool,
}

impl Common {
    fn meshes(&self) -> Vec<MeshSource> {
        if self.mesh.is_empty() {
            self.n.iter().map(|&n| MeshSource::Lattice { n }).collect()
        } else {
            self.mesh.iter().map(|s| MeshSource::Files { stem: s.clone() }).collect()
        }
    }

    fn config(&self, test: Test, mesh: MeshSource) -> RunConfig {
        RunConfig {
            test,
            mesh,
            cr: self.cr,
            seed: self.seed,
            out: self.out.clone(),
            snapshots: self.snapshots.clone().unwrap_or_else(|| test.default_snapshots()),
            init_area_correct: self.init_area_correct,
            wireframe: self.wireframe,
        }
    }

    fn single(&self, test: Test) -> Result<RunConfig> {
        let mut meshes = self.meshes();
        if meshes.len() != 1 {
            bail!("give exactly one mesh source (--n N or --mesh STEM)");
        }
        Ok(self.config(test, meshes.remove(0)))
    }
}

fn report(summary: &RunSummary, out: &std::path::Path) {
    if let Some(last) = summary.rows.last() {
        let e = |x: Option<f64>| x.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "-".into());
        println!(
            "step {} t = {:.4}: E_m {:.3e}, E_g {}, E_r {}, failed triangles {}",
            last.step,
            last.time,
            last.e_m,
            e(last.e_g),
            e(last.e_r),
            last.failed_triangles
        );
    }
    println!("wrote {}", out.display());
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("TRICUT_THREADS") {
        let n: usize = v.parse().with_context(|| format!("TRICUT_THREADS={v:?} is not a count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    configure_threads()?;
    let (test, common) = match &cli.command {
        Command::StaticRecon { shape, common } => (Test::StaticRecon { shape: *shape }, common),
        Command::Vortex { common } => (Test::Vortex, common),
        Command::Zalesak { config, common } => (Test::Zalesak { config: *config }, common),
        Command::Deform { common } => (Test::Deform, common),
        Command::Convergence {
            test,
            shape,
            config,
            common,
        } => {
            let test = match test {
                SweepTest::StaticRecon => Test::StaticRecon { shape: *shape },
                SweepTest::Vortex => Test::Vortex,
                SweepTest::Zalesak => Test::Zalesak { config: *config },
                SweepTest::Deform => Test::Deform,
            };
            let meshes = common.meshes();
            let base = common.config(test, meshes.first().cloned().unwrap_or(MeshSource::Lattice { n: 1 }));
            let summary = sweep(&SweepConfig { base, meshes })?;
            println!("level  resolution  E_g  O_n");
            for r in &summary.rows {
                let e = |x: Option<f64>| x.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "-".into());
                let o = r.order.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into());
                println!("{}  {}  {}  {}", r.level, r.resolution, e(r.e_g), o);
            }
            match summary.slope {
                Some(s) => println!("least-squares slope {s:.2}"),
                None => println!("least-squares slope -"),
            }
            return Ok(());
        }
    };
    let config = common.single(test)?;
    let summary = run(&config)?;
    report(&summary, &config.out);
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

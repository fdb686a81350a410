use std::path::PathBuf;

use anyhow::{bail, Result};
use serde::Serialize;
use tricut::flow::Field;
use tricut::geom::Point2;
use tricut::mesh::Rect;
use tricut::shapes::ShapeSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeName {
    Circle,
    Snake,
    Heart,
    ZalesakA,
    ZalesakB,
}

impl ShapeName {
    pub fn spec(self) -> ShapeSpec {
        match self {
            ShapeName::Circle => ShapeSpec::circle(0.5, 0.5, 0.15),
            ShapeName::Snake => ShapeSpec::snake(),
            ShapeName::Heart => ShapeSpec::heart(),
            ShapeName::ZalesakA => ShapeSpec::zalesak_a(),
            ShapeName::ZalesakB => ShapeSpec::zalesak_b(),
        }
    }

    pub fn domain(self) -> Rect {
        match self {
            ShapeName::ZalesakA => Rect::new(0.0, 0.0, 4.0, 4.0),
            ShapeName::ZalesakB => Rect::new(-0.5, -0.5, 0.5, 0.5),
            _ => Rect::unit(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
pub enum ZalesakConfig {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Test {
    StaticRecon { shape: ShapeName },
    Vortex,
    Zalesak { config: ZalesakConfig },
    Deform,
}

impl Test {
    pub fn shape(self) -> ShapeName {
        match self {
            Test::StaticRecon { shape } => shape,
            Test::Vortex => ShapeName::Circle,
            Test::Zalesak { config: ZalesakConfig::A } => ShapeName::ZalesakA,
            Test::Zalesak { config: ZalesakConfig::B } => ShapeName::ZalesakB,
            Test::Deform => ShapeName::Circle,
        }
    }

    pub fn shape_spec(self) -> ShapeSpec {
        match self {
            Test::Vortex => ShapeSpec::circle(0.5, 0.75, 0.15),
            _ => self.shape().spec(),
        }
    }

    pub fn domain(self) -> Rect {
        self.shape().domain()
    }

    /// Velocity field and period; `None` for static reconstruction.
    pub fn field(self) -> Option<(Field, f64)> {
        use std::f64::consts::PI;
        match self {
            Test::StaticRecon { .. } => None,
            Test::Vortex => Some((Field::SingleVortex { period: 8.0 }, 8.0)),
            Test::Zalesak { config } => {
                let center = match config {
                    ZalesakConfig::A => Point2::new(2.0, 2.0),
                    ZalesakConfig::B => Point2::new(0.0, 0.0),
                };
                Some((Field::RigidRotation { center, omega: 0.5 }, 4.0 * PI))
            }
            Test::Deform => Some((Field::Deformation { period: 2.0, n: 4 }, 2.0)),
        }
    }

    pub fn default_snapshots(self) -> Vec<f64> {
        match self {
            Test::StaticRecon { .. } => Vec::new(),
            Test::Zalesak { .. } => vec![0.25, 0.5, 0.75, 1.0],
            _ => vec![0.5, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MeshSource {
    Lattice { n: usize },
    /// `<stem>.node` and `<stem>.ele`.
    Files { stem: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub test: Test,
    pub mesh: MeshSource,
    pub cr: f64,
    pub seed: u64,
    pub out: PathBuf,
    /// Output times as fractions of the period.
    pub snapshots: Vec<f64>,
    pub init_area_correct: bool,
    pub wireframe: bool,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cr > 0.0 && self.cr.is_finite()) {
            bail!("Courant number must be positive, got {}", self.cr);
        }
        if let MeshSource::Lattice { n: 0 } = self.mesh {
            bail!("lattice resolution must be at least 1");
        }
        if let Some(&s) = self.snapshots.iter().find(|&&s| !(s > 0.0 && s <= 1.0)) {
            bail!("snapshot fractions must lie in (0, 1], got {s}");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub base: RunConfig,
    /// One mesh per level, coarsest first.
    pub meshes: Vec<MeshSource>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.meshes.is_empty() {
            bail!("a sweep needs at least one mesh");
        }
        for m in &self.meshes {
            RunConfig {
                mesh: m.clone(),
                ..self.base.clone()
            }
            .validate()?;
        }
        Ok(())
    }
}

//! Analytic velocity fields, RK4 particle tracing and Courant-based step
//! selection.

use std::f64::consts::PI;

use thiserror::Error;

use crate::geom::Point2;
use crate::mesh::{Rect, TriMesh};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("Courant number must be positive, got {0}")]
    InvalidCourant(f64),
    #[error("field has zero maximum speed; no time step follows from a Courant number")]
    ZeroSpeed,
}

/// Any time-dependent velocity evaluator.
pub trait VelocityField: Sync {
    fn velocity(&self, p: Point2, t: f64) -> Point2;

    /// Upper bound on the speed anywhere in `region` at any time, if known.
    fn speed_bound(&self, _region: Rect) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Field {
    /// Time-reversed single vortex on the unit square.
    SingleVortex { period: f64 },
    RigidRotation { center: Point2, omega: f64 },
    /// Time-reversed cellular flow with `n` vortices across the unit square.
    Deformation { period: f64, n: u32 },
    UniformTranslation(Point2),
    Zero,
}

impl Field {
    pub fn eval(&self, p: Point2, t: f64) -> Point2 {
        match *self {
            Field::SingleVortex { period } => {
                let g = (PI * t / period).cos();
                let (sx, cx) = (PI * p.x).sin_cos();
                let (sy, cy) = (PI * p.y).sin_cos();
                Point2::new(-2.0 * g * cy * sx * sx * sy, 2.0 * g * cx * sx * sy * sy)
            }
            Field::RigidRotation { center, omega } => {
                Point2::new(-omega * (p.y - center.y), omega * (p.x - center.x))
            }
            Field::Deformation { period, n } => {
                let g = (PI * t / period).cos();
                let k = n as f64 * PI;
                let (sa, ca) = (k * (p.x + 0.5)).sin_cos();
                let (sb, cb) = (k * (p.y + 0.5)).sin_cos();
                Point2::new(-g * sa * sb, -g * ca * cb)
            }
            Field::UniformTranslation(w) => w,
            Field::Zero => Point2::default(),
        }
    }

    /// Maximum speed over `domain` at `t = 0`.
    pub fn max_speed(&self, domain: Rect) -> f64 {
        match *self {
            // |u|^2 + |v|^2 = sin^4(pi x) sin^2(2 pi y) + sin^2(2 pi x) sin^4(pi y),
            // peaking at 1 on the vertical and horizontal mid-lines.
            Field::SingleVortex { .. } => 1.0,
            // sin^2 a sin^2 b + cos^2 a cos^2 b <= 1, attained at a = b = 0.
            Field::Deformation { .. } => 1.0,
            Field::RigidRotation { center, omega } => {
                let dx = (domain.lo.x - center.x).abs().max((domain.hi.x - center.x).abs());
                let dy = (domain.lo.y - center.y).abs().max((domain.hi.y - center.y).abs());
                omega.abs() * dx.hypot(dy)
            }
            Field::UniformTranslation(w) => w.norm(),
            Field::Zero => 0.0,
        }
    }

    /// Period after which the flow returns the interface to its start.
    pub fn period(&self) -> Option<f64> {
        match *self {
            Field::SingleVortex { period } | Field::Deformation { period, .. } => Some(period),
            Field::RigidRotation { omega, .. } if omega != 0.0 => Some(2.0 * PI / omega.abs()),
            _ => None,
        }
    }
}

impl VelocityField for Field {
    #[inline]
    fn velocity(&self, p: Point2, t: f64) -> Point2 {
        self.eval(p, t)
    }

    fn speed_bound(&self, region: Rect) -> Option<f64> {
        // The time factors of the periodic fields never exceed one.
        Some(self.max_speed(region))
    }
}

/// Classical four-stage Runge-Kutta step from `(p, t0)` over signed `dt`.
#[inline]
pub fn rk4_trace<F: VelocityField + ?Sized>(field: &F, p: Point2, t0: f64, dt: f64) -> Point2 {
    let h = 0.5 * dt;
    let k1 = field.velocity(p, t0);
    let k2 = field.velocity(p + k1 * h, t0 + h);
    let k3 = field.velocity(p + k2 * h, t0 + h);
    let k4 = field.velocity(p + k3 * dt, t0 + dt);
    let s = k1 + (k2 + k3) * 2.0 + k4;
    p + s * (dt / 6.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPlan {
    pub dt: f64,
    /// Steps to cover one period, when the field has one.
    pub steps: Option<usize>,
}

/// `dt = cr * char_length / U_max`, shortened so that a whole number of
/// steps covers the field's period.
pub fn timestep(field: &Field, mesh: &TriMesh, cr: f64) -> Result<StepPlan, FlowError> {
    timestep_for(field.max_speed(mesh.bbox()), mesh.char_length(), cr, field.period())
}

pub fn timestep_for(
    u_max: f64,
    char_length: f64,
    cr: f64,
    period: Option<f64>,
) -> Result<StepPlan, FlowError> {
    if !(cr > 0.0) || !cr.is_finite() {
        return Err(FlowError::InvalidCourant(cr));
    }
    if !(u_max > 0.0) {
        return Err(FlowError::ZeroSpeed);
    }
    let dt = cr * char_length / u_max;
    Ok(match period {
        Some(t) => {
            let steps = ((t / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
            StepPlan {
                dt: t / steps as f64,
                steps: Some(steps),
            }
        }
        None => StepPlan { dt, steps: None },
    })
}

//! Benchmark shapes, their dense polygonal approximations, exact per-cell
//! areas and initialization of an interface state from a shape.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::advect::{
    jordan_filter, pocket_edge, repair_parity, rows_array, strictly_inside, InterfaceState, RowCut,
    PERTURBATION,
};
use crate::edgecut::{edge_cut_correction, Correction, EdgeCut};
use crate::geom::{
    bbox_of, clip_loop_by_convex, orient2d, seg_seg_intersect, signed_area, ConvexPolygon, Point2,
    SegIntersection, Segment,
};
use crate::mesh::TriMesh;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShapeError {
    #[error("invalid shape parameter: {0}")]
    InvalidParameter(String),
    #[error("need at least {min} boundary vertices, got {got}")]
    TooFewVertices { min: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ShapeSpec {
    Circle {
        center: Point2,
        radius: f64,
    },
    /// Region between `y = baseline + amplitude * sin(wavenumber * x)` and
    /// `y = lower` for `x` in `[0, 1]`.
    Snake {
        amplitude: f64,
        wavenumber: f64,
        baseline: f64,
        lower: f64,
    },
    /// `x = 16 sin^3(t) * scale + cx`,
    /// `y = (13 cos t - 5 cos 2t - 2 cos 3t - cos 4t) * scale + cy`.
    Heart { center: Point2, scale: f64 },
    /// Disk with a vertical slot of width `slot_width` entering from below
    /// and ending `bridge` below the top of the disk.
    NotchedDisk {
        center: Point2,
        radius: f64,
        slot_width: f64,
        bridge: f64,
    },
    /// Explicit rings, any orientation.
    Polygon(Vec<Vec<Point2>>),
    Empty,
}

impl ShapeSpec {
    pub fn circle(cx: f64, cy: f64, radius: f64) -> Self {
        ShapeSpec::Circle {
            center: Point2::new(cx, cy),
            radius,
        }
    }

    pub fn snake() -> Self {
        ShapeSpec::Snake {
            amplitude: 0.3,
            wavenumber: 2.0 * PI,
            baseline: 0.5,
            lower: 0.5,
        }
    }

    pub fn heart() -> Self {
        ShapeSpec::Heart {
            center: Point2::new(0.52, 0.55),
            scale: 1.0 / 40.0,
        }
    }

    pub fn zalesak_a() -> Self {
        ShapeSpec::NotchedDisk {
            center: Point2::new(2.0, 2.75),
            radius: 0.5,
            slot_width: 0.06,
            bridge: 0.4,
        }
    }

    pub fn zalesak_b() -> Self {
        ShapeSpec::NotchedDisk {
            center: Point2::new(0.0, 0.25),
            radius: 0.15,
            slot_width: 0.05,
            bridge: 0.05,
        }
    }

    fn validate(&self) -> Result<(), ShapeError> {
        let bad = |m: &str| Err(ShapeError::InvalidParameter(m.into()));
        match self {
            ShapeSpec::Circle { radius, .. } if !(*radius > 0.0) => bad("radius must be positive"),
            ShapeSpec::Snake { wavenumber, .. } if !(*wavenumber > 0.0) => {
                bad("wavenumber must be positive")
            }
            ShapeSpec::Heart { scale, .. } if !(*scale > 0.0) => bad("scale must be positive"),
            ShapeSpec::NotchedDisk {
                radius,
                slot_width,
                bridge,
                ..
            } => {
                if !(*radius > 0.0 && *slot_width > 0.0 && *bridge > 0.0) {
                    bad("notched disk parameters must be positive")
                } else if *slot_width >= 2.0 * radius || *bridge >= 2.0 * radius {
                    bad("slot does not fit inside the disk")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Closed-form area where one exists.
    pub fn analytic_area(&self) -> Option<f64> {
        match *self {
            ShapeSpec::Circle { radius, .. } => Some(PI * radius * radius),
            ShapeSpec::NotchedDisk {
                radius: r,
                slot_width: s,
                bridge,
                ..
            } => {
                // circle minus the slot, whose lower end follows the arc
                let h = 0.5 * s;
                let top = r - bridge;
                let seg = h * (r * r - h * h).sqrt() + r * r * (h / r).asin();
                Some(PI * r * r - (s * top + seg))
            }
            _ => None,
        }
    }
}

/// Boundary of a shape as CCW vertex rings.
#[derive(Debug, Clone)]
pub struct DensePolygon {
    rings: Vec<Vec<Point2>>,
    edges: Vec<(Point2, Point2)>,
    lo: Point2,
    hi: Point2,
    grid: EdgeGrid,
    rows: RowIndex,
}

#[derive(Debug, Clone)]
struct EdgeGrid {
    nx: usize,
    ny: usize,
    inv: f64,
    start: Vec<u32>,
    items: Vec<u32>,
}

#[derive(Debug, Clone)]
struct RowIndex {
    n: usize,
    inv: f64,
    start: Vec<u32>,
    items: Vec<u32>,
}

fn csr(n: usize, spans: &[(usize, usize, usize, usize)], nx: usize) -> (Vec<u32>, Vec<u32>) {
    let mut start = vec![0u32; n + 1];
    for &(i0, i1, j0, j1) in spans {
        for j in j0..=j1 {
            for i in i0..=i1 {
                start[j * nx + i + 1] += 1;
            }
        }
    }
    for k in 0..n {
        start[k + 1] += start[k];
    }
    let mut fill = start.clone();
    let mut items = vec![0u32; start[n] as usize];
    for (e, &(i0, i1, j0, j1)) in spans.iter().enumerate() {
        for j in j0..=j1 {
            for i in i0..=i1 {
                let k = j * nx + i;
                items[fill[k] as usize] = e as u32;
                fill[k] += 1;
            }
        }
    }
    (start, items)
}

impl DensePolygon {
    pub fn new(rings: Vec<Vec<Point2>>) -> Result<Self, ShapeError> {
        let mut out = Vec::with_capacity(rings.len());
        for mut ring in rings {
            if ring.len() > 1 && ring.first() == ring.last() {
                ring.pop();
            }
            if ring.len() < 3 {
                return Err(ShapeError::TooFewVertices {
                    min: 3,
                    got: ring.len(),
                });
            }
            if signed_area(&ring) < 0.0 {
                ring.reverse();
            }
            out.push(ring);
        }
        let mut edges = Vec::new();
        for ring in &out {
            for k in 0..ring.len() {
                edges.push((ring[k], ring[(k + 1) % ring.len()]));
            }
        }
        let all: Vec<Point2> = out.iter().flatten().copied().collect();
        let (lo, hi) = if all.is_empty() {
            (Point2::default(), Point2::default())
        } else {
            bbox_of(&all)
        };
        let w = (hi.x - lo.x).max(hi.y - lo.y).max(1e-300);
        let g = ((edges.len() as f64).sqrt().ceil() as usize).clamp(1, 1024);
        let inv = g as f64 / w;
        let cell = |x: f64, o: f64| (((x - o) * inv).floor().max(0.0) as usize).min(g - 1);
        let spans: Vec<_> = edges
            .iter()
            .map(|&(a, b)| {
                (
                    cell(a.x.min(b.x), lo.x),
                    cell(a.x.max(b.x), lo.x),
                    cell(a.y.min(b.y), lo.y),
                    cell(a.y.max(b.y), lo.y),
                )
            })
            .collect();
        let (start, items) = csr(g * g, &spans, g);
        let grid = EdgeGrid {
            nx: g,
            ny: g,
            inv,
            start,
            items,
        };
        let nr = (edges.len() / 2).clamp(1, 1 << 16);
        let rinv = nr as f64 / (hi.y - lo.y).max(1e-300);
        let row = |y: f64| (((y - lo.y) * rinv).floor().max(0.0) as usize).min(nr - 1);
        let rspans: Vec<_> = edges
            .iter()
            .map(|&(a, b)| (0, 0, row(a.y.min(b.y)), row(a.y.max(b.y))))
            .collect();
        let (rstart, ritems) = csr(nr, &rspans, 1);
        Ok(Self {
            rings: out,
            edges,
            lo,
            hi,
            grid,
            rows: RowIndex {
                n: nr,
                inv: rinv,
                start: rstart,
                items: ritems,
            },
        })
    }

    pub fn empty() -> Self {
        Self::new(Vec::new()).expect("empty polygon")
    }

    pub fn rings(&self) -> &[Vec<Point2>] {
        &self.rings
    }

    pub fn num_vertices(&self) -> usize {
        self.edges.len()
    }

    pub fn area(&self) -> f64 {
        self.rings.iter().map(|r| signed_area(r)).sum()
    }

    pub fn bbox(&self) -> (Point2, Point2) {
        (self.lo, self.hi)
    }

    /// Even-odd containment by a ray cast toward `+x`.
    pub fn contains(&self, p: Point2) -> bool {
        if self.edges.is_empty() || p.y < self.lo.y || p.y > self.hi.y || p.x > self.hi.x {
            return false;
        }
        let r = (((p.y - self.lo.y) * self.rows.inv).floor().max(0.0) as usize).min(self.rows.n - 1);
        let mut inside = false;
        for &e in &self.rows.items[self.rows.start[r] as usize..self.rows.start[r + 1] as usize] {
            let (a, b) = self.edges[e as usize];
            if (a.y > p.y) != (b.y > p.y) {
                // sign of the crossing relative to p, decided exactly
                let o = orient2d(a, b, p);
                let right = if b.y > a.y { o > 0 } else { o < 0 };
                if right {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Indices of edges whose bounding boxes may overlap `[lo, hi]`.
    pub fn edges_near(&self, lo: Point2, hi: Point2, out: &mut Vec<u32>) {
        out.clear();
        if self.edges.is_empty() || hi.x < self.lo.x || hi.y < self.lo.y || lo.x > self.hi.x || lo.y > self.hi.y {
            return;
        }
        let g = &self.grid;
        let cell = |x: f64, o: f64, n: usize| (((x - o) * g.inv).floor().max(0.0) as usize).min(n - 1);
        let (i0, i1) = (cell(lo.x, self.lo.x, g.nx), cell(hi.x, self.lo.x, g.nx));
        let (j0, j1) = (cell(lo.y, self.lo.y, g.ny), cell(hi.y, self.lo.y, g.ny));
        for j in j0..=j1 {
            for i in i0..=i1 {
                let k = j * g.nx + i;
                out.extend_from_slice(&g.items[g.start[k] as usize..g.start[k + 1] as usize]);
            }
        }
        out.sort_unstable();
        out.dedup();
    }

    #[inline]
    pub fn edge(&self, e: u32) -> (Point2, Point2) {
        self.edges[e as usize]
    }

    /// Area of the shape inside a convex region.
    pub fn exact_cell_area(&self, region: &ConvexPolygon) -> f64 {
        let (lo, hi) = region.bbox();
        let mut near = Vec::new();
        self.edges_near(lo, hi, &mut near);
        let touches = near.iter().any(|&e| {
            let (a, b) = self.edges[e as usize];
            a.x.max(b.x) >= lo.x && a.x.min(b.x) <= hi.x && a.y.max(b.y) >= lo.y && a.y.min(b.y) <= hi.y
        });
        if !touches {
            let v = region.vertices();
            let c = v.iter().fold(Point2::default(), |s, &p| s + p) * (1.0 / v.len() as f64);
            return if self.contains(c) { region.area() } else { 0.0 };
        }
        let mut total = 0.0;
        let mut cur = Vec::new();
        let mut scratch = Vec::new();
        for ring in &self.rings {
            let (rlo, rhi) = bbox_of(ring);
            if rhi.x < lo.x || rhi.y < lo.y || rlo.x > hi.x || rlo.y > hi.y {
                continue;
            }
            cur.clear();
            cur.extend_from_slice(ring);
            clip_loop_by_convex(&mut cur, &mut scratch, region.vertices());
            total += signed_area(&cur);
        }
        total
    }
}

/// Area of `shape` inside `region`.
pub fn exact_cell_area(shape: &DensePolygon, region: &ConvexPolygon) -> f64 {
    shape.exact_cell_area(region)
}

/// Sample the boundary of `shape` with about `n` vertices.
pub fn polygonize(shape: &ShapeSpec, n: usize) -> Result<DensePolygon, ShapeError> {
    shape.validate()?;
    let min = 3;
    if n < min && !matches!(shape, ShapeSpec::Empty | ShapeSpec::Polygon(_)) {
        return Err(ShapeError::TooFewVertices { min, got: n });
    }
    let rings = match *shape {
        ShapeSpec::Empty => Vec::new(),
        ShapeSpec::Polygon(ref rings) => rings.clone(),
        ShapeSpec::Circle { center, radius } => vec![(0..n)
            .map(|k| {
                let (s, c) = (2.0 * PI * k as f64 / n as f64).sin_cos();
                Point2::new(center.x + radius * c, center.y + radius * s)
            })
            .collect()],
        ShapeSpec::Heart { center, scale } => vec![(0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                let x = 16.0 * t.sin().powi(3);
                let y = 13.0 * t.cos() - 5.0 * (2.0 * t).cos() - 2.0 * (3.0 * t).cos() - (4.0 * t).cos();
                Point2::new(center.x + scale * x, center.y + scale * y)
            })
            .collect()],
        ShapeSpec::Snake {
            amplitude,
            wavenumber,
            baseline,
            lower,
        } => snake_rings(amplitude, wavenumber, baseline, lower, n)?,
        ShapeSpec::NotchedDisk {
            center,
            radius,
            slot_width,
            bridge,
        } => {
            let h = 0.5 * slot_width;
            let top = center.y + radius - bridge;
            let a0 = -0.5 * PI + (h / radius).asin();
            let a1 = 1.5 * PI - (h / radius).asin();
            let m = n.saturating_sub(2).max(2);
            let mut ring: Vec<Point2> = (0..m)
                .map(|k| {
                    let a = if k + 1 == m {
                        a1
                    } else {
                        a0 + (a1 - a0) * k as f64 / (m - 1) as f64
                    };
                    let (s, c) = a.sin_cos();
                    Point2::new(center.x + radius * c, center.y + radius * s)
                })
                .collect();
            // slot corners and exact slot walls
            let yb = center.y - (radius * radius - h * h).sqrt();
            ring[0] = Point2::new(center.x + h, yb);
            ring[m - 1] = Point2::new(center.x - h, yb);
            ring.push(Point2::new(center.x - h, top));
            ring.push(Point2::new(center.x + h, top));
            vec![ring]
        }
    };
    DensePolygon::new(rings)
}

/// The region between two graphs over `[0, 1]` split into the simple
/// loops between consecutive crossings.
fn snake_rings(amp: f64, k: f64, base: f64, lower: f64, n: usize) -> Result<Vec<Vec<Point2>>, ShapeError> {
    let f = |x: f64| base + amp * (k * x).sin();
    let g = |x: f64| lower + 0.0 * x;
    let d = |x: f64| f(x) - g(x);
    // crossings of f and g: bracket on a fine grid, then bisect
    let probe = 4096;
    let mut cuts = vec![0.0];
    for i in 0..probe {
        let (x0, x1) = (i as f64 / probe as f64, (i + 1) as f64 / probe as f64);
        let (d0, d1) = (d(x0), d(x1));
        if d1 == 0.0 && i + 1 < probe {
            cuts.push(x1);
        } else if d0 != 0.0 && d0.signum() != d1.signum() && d1 != 0.0 {
            let (mut a, mut b) = (x0, x1);
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                if d(m).signum() == d0.signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            cuts.push(0.5 * (a + b));
        }
    }
    cuts.push(1.0);
    let mut rings = Vec::new();
    let per = (n / (cuts.len() - 1)).max(8);
    for w in cuts.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        if x1 - x0 < 1e-12 {
            continue;
        }
        let xs: Vec<f64> = (0..=per).map(|i| x0 + (x1 - x0) * i as f64 / per as f64).collect();
        let mut ring: Vec<Point2> = xs.iter().map(|&x| Point2::new(x, f(x))).collect();
        ring.extend(xs.iter().rev().map(|&x| Point2::new(x, g(x))));
        // merge coincident endpoints where the graphs meet
        ring.dedup_by(|a, b| (*a - *b).norm() < 1e-15);
        if ring.len() > 1 && (ring[0] - *ring.last().unwrap()).norm() < 1e-15 {
            ring.pop();
        }
        if signed_area(&ring).abs() > 0.0 {
            rings.push(ring);
        }
    }
    if rings.is_empty() {
        return Err(ShapeError::InvalidParameter("snake region is empty".into()));
    }
    Ok(rings)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct InitReport {
    /// Triangles where an edge met the boundary more often than the cut
    /// representation can hold.
    pub sub_resolution: Vec<u32>,
    /// Single-edge pockets without a dense vertex inside; cleared.
    pub case2_fallbacks: Vec<u32>,
    /// Triangles whose snapped cuts had to be repaired for parity.
    pub parity_repairs: Vec<u32>,
    /// Triangles whose area correction did not reach the target, with the
    /// remaining liquid-area error.
    pub correction_failures: Vec<(u32, f64)>,
}

#[derive(Debug, Clone, Copy)]
pub struct InitOptions {
    pub n_dense: usize,
    pub area_correct: bool,
}

impl Default for InitOptions {
    fn default() -> Self {
        Self {
            n_dense: 4096,
            area_correct: false,
        }
    }
}

/// Crossing parameters of the segment `a -> b` with the boundary.
fn edge_crossings(shape: &DensePolygon, a: Point2, b: Point2, near: &mut Vec<u32>) -> Vec<f64> {
    let lo = Point2::new(a.x.min(b.x), a.y.min(b.y));
    let hi = Point2::new(a.x.max(b.x), a.y.max(b.y));
    shape.edges_near(lo, hi, near);
    let Ok(s) = Segment::new(a, b) else {
        return Vec::new();
    };
    let mut ts = Vec::new();
    for &e in near.iter() {
        let (p, q) = shape.edge(e);
        let Ok(t) = Segment::new(p, q) else { continue };
        match seg_seg_intersect(&s, &t) {
            SegIntersection::Point { t, u, .. } => {
                // a boundary vertex on the segment is reported by both of its
                // edges; count it once
                if u == 1.0 {
                    continue;
                }
                ts.push(t);
            }
            SegIntersection::Overlap(_) | SegIntersection::None => {}
        }
    }
    ts.sort_by(f64::total_cmp);
    ts
}

/// Keep 0 or 2 crossings between equal materials, 1 between different ones.
/// Also reports whether crossings were discarded.
pub fn parity_filter(ts: &[f64], same_material: bool) -> (Vec<f64>, bool) {
    let lossy = if same_material { ts.len() > 2 || ts.len() == 1 } else { ts.len() > 1 };
    let mut kept = ts.to_vec();
    jordan_filter(&mut kept, same_material);
    (kept, lossy)
}

/// Initialize per-triangle edge cuts from a shape.
pub fn init_state(
    mesh: Arc<TriMesh>,
    shape: &ShapeSpec,
    opts: InitOptions,
) -> Result<(InterfaceState, InitReport), ShapeError> {
    let dense = polygonize(shape, opts.n_dense)?;
    Ok(init_from_polygon(mesh, &dense, opts.area_correct))
}

pub fn init_from_polygon(mesh: Arc<TriMesh>, dense: &DensePolygon, area_correct: bool) -> (InterfaceState, InitReport) {
    // Topology is read off a copy of the boundary shifted by a tiny generic
    // offset so that vertices on mesh lines (the snake's baseline, circle
    // points on grid lines) never land exactly on mesh edges or vertices.
    // The offset is kept well above the pre-image perturbation so that the
    // first advection steps read the same topology.
    let h = mesh.char_length();
    let delta = Point2::new(1.0f64.cos(), 1.0f64.sin()) * (10.0 * PERTURBATION * h);
    let shifted = DensePolygon::new(
        dense
            .rings()
            .iter()
            .map(|r| r.iter().map(|&p| p + delta).collect())
            .collect(),
    )
    .expect("shifted rings stay valid");

    let verts = mesh.vertices();
    let materials: Vec<u8> = verts.par_iter().map(|&p| shifted.contains(p) as u8).collect();

    // crossing parameters along each mesh edge in its stored direction
    let edge_data: Vec<(Vec<f64>, bool)> = mesh
        .edges()
        .par_iter()
        .map_init(Vec::new, |near, e| {
            let (a, b) = (verts[e.v[0] as usize], verts[e.v[1] as usize]);
            let ts = edge_crossings(&shifted, a, b, near);
            parity_filter(&ts, materials[e.v[0] as usize] == materials[e.v[1] as usize])
        })
        .collect();

    let results: Vec<(EdgeCut, u8)> = (0..mesh.num_triangles())
        .into_par_iter()
        .map_init(Vec::new, |near, t| {
            let tri = mesh.triangle(t);
            let ids = mesh.triangles()[t];
            let te = mesh.tri_edges(t);
            let mut flags = 0u8;
            let mut rows: [Vec<f64>; 3] = Default::default();
            for i in 0..3 {
                let (ts, lossy) = &edge_data[te[i] as usize];
                if *lossy {
                    flags |= 1;
                }
                let forward = mesh.edge(te[i]).v[0] == ids[i];
                rows[i] = if forward {
                    ts.clone()
                } else {
                    ts.iter().rev().map(|&t| 1.0 - t).collect()
                };
            }
            let c = materials[ids[0] as usize];
            let mut rows = rows.map(|row| {
                row.into_iter()
                    .map(|r| RowCut {
                        r,
                        conf: r.min(1.0 - r),
                        line: None,
                    })
                    .collect::<Vec<_>>()
            });
            if repair_parity(&mut rows) {
                flags |= 2;
            }
            let mut vt = None;
            if let Some(d) = pocket_edge(&rows) {
                vt = pocket_vertex(dense, &tri, d, near);
                if vt.is_none() {
                    rows[d].clear();
                    flags |= 4;
                }
            }
            let mut cut = match EdgeCut::new(c, rows_array(&rows), vt) {
                Ok(cut) => cut,
                Err(_) => {
                    flags |= 2;
                    EdgeCut::uniform(c)
                }
            };
            if area_correct {
                let region = ConvexPolygon::triangle(tri[0], tri[1], tri[2]);
                let target = (dense.exact_cell_area(&region) / mesh.area(t)).clamp(0.0, 1.0);
                let f = cut.liquid_fraction().unwrap_or(0.0);
                if (f - target).abs() > 0.0 {
                    match edge_cut_correction(&cut, target) {
                        Ok(Correction::Solved { cut: c2, .. }) | Ok(Correction::Clamped { cut: c2, .. }) => cut = c2,
                        _ => {}
                    }
                }
                let f = cut.liquid_fraction().unwrap_or(0.0);
                if (f - target).abs() > 1e-12 {
                    flags |= 8;
                }
            }
            (cut, flags)
        })
        .collect();

    let mut report = InitReport::default();
    let mut cuts = Vec::with_capacity(results.len());
    for (t, (cut, flags)) in results.into_iter().enumerate() {
        if flags & 1 != 0 {
            report.sub_resolution.push(t as u32);
        }
        if flags & 2 != 0 {
            report.parity_repairs.push(t as u32);
        }
        if flags & 4 != 0 {
            report.case2_fallbacks.push(t as u32);
        }
        if flags & 8 != 0 {
            let tri = mesh.triangle(t);
            let region = ConvexPolygon::triangle(tri[0], tri[1], tri[2]);
            let err = cut.liquid_fraction().unwrap_or(0.0) * mesh.area(t) - dense.exact_cell_area(&region);
            report.correction_failures.push((t as u32, err));
        }
        cuts.push(cut);
    }
    (InterfaceState::new(mesh, cuts), report)
}

/// For a triangle whose only cuts are two on one edge, the boundary vertex
/// strictly inside the triangle farthest from that edge.
fn pocket_vertex(dense: &DensePolygon, tri: &[Point2; 3], d: usize, near: &mut Vec<u32>) -> Option<[f64; 2]> {
    let (a, b) = (tri[d], tri[(d + 1) % 3]);
    let (lo, hi) = bbox_of(tri);
    dense.edges_near(lo, hi, near);
    let mut best: Option<(f64, [f64; 2])> = None;
    for &e in near.iter() {
        let p = dense.edge(e).0;
        if let Some(bc) = strictly_inside(tri, p) {
            let dist = (b - a).cross(p - a);
            if best.is_none_or(|(bd, _)| dist > bd) {
                best = Some((dist, bc));
            }
        }
    }
    best.map(|(_, bc)| bc)
}

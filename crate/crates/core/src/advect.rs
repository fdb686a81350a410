//! One advection step of the edge-cut interface: pre-image queries, cut
//! transport, case-2 vertex recovery and area correction.

use std::f64::consts::TAU;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::edgecut::{
    barycentric, edge_cut_correction, is_valid_cut, Correction, Direction, EdgeCut, EPS_CUT, View,
};
use crate::flow::{rk4_trace, VelocityField};
use crate::geom::{
    area_centroid, clip_loop_by_convex, orient2d, seg_seg_intersect, signed_area, ConvexPolygon, Point2,
    SegIntersection, Segment,
};
use crate::mesh::{LocateResult, Rect, TriMesh, NO_TRIANGLE};

/// Vertex perturbation radius before the backward trace, in units of the
/// mesh characteristic length.
pub const PERTURBATION: f64 = 1e-6;

/// A corrected triangle counts as failed when its liquid fraction misses
/// the pre-image target by more than this.
pub const FAILURE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdvectError {
    #[error("time step must be positive and finite, got {0}")]
    InvalidTimeStep(f64),
    #[error("pre-image of triangle {0} is inverted or degenerate")]
    DegeneratePreimage(u32),
    #[error("triangle {0} out of range")]
    TriangleOutOfRange(usize),
    #[error("{cuts} edge cuts for {triangles} triangles")]
    CountMismatch { cuts: usize, triangles: usize },
}

#[derive(Debug, Clone)]
pub struct InterfaceState {
    mesh: Arc<TriMesh>,
    cuts: Vec<EdgeCut>,
    time: f64,
    step: u64,
}

impl InterfaceState {
    /// # Panics
    /// When `cuts` does not hold one record per triangle.
    pub fn new(mesh: Arc<TriMesh>, cuts: Vec<EdgeCut>) -> Self {
        Self::try_new(mesh, cuts).expect("one edge cut per triangle")
    }

    pub fn try_new(mesh: Arc<TriMesh>, cuts: Vec<EdgeCut>) -> Result<Self, AdvectError> {
        if cuts.len() != mesh.num_triangles() {
            return Err(AdvectError::CountMismatch {
                cuts: cuts.len(),
                triangles: mesh.num_triangles(),
            });
        }
        Ok(Self {
            mesh,
            cuts,
            time: 0.0,
            step: 0,
        })
    }

    pub fn with_clock(mut self, time: f64, step: u64) -> Self {
        self.time = time;
        self.step = step;
        self
    }

    pub fn mesh(&self) -> &TriMesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<TriMesh> {
        &self.mesh
    }

    pub fn cuts(&self) -> &[EdgeCut] {
        &self.cuts
    }

    pub fn cut(&self, t: usize) -> &EdgeCut {
        &self.cuts[t]
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn liquid_fraction(&self, t: usize) -> f64 {
        let c = &self.cuts[t];
        c.liquid_fraction().unwrap_or(c.c as f64)
    }

    pub fn liquid_area(&self, t: usize) -> f64 {
        self.liquid_fraction(t) * self.mesh.area(t)
    }

    pub fn total_liquid_area(&self) -> f64 {
        (0..self.cuts.len()).map(|t| self.liquid_area(t)).sum()
    }

    /// Convex liquid pieces of every triangle, in triangle order.
    pub fn liquid_polygons(&self) -> Vec<ConvexPolygon> {
        let mut out = Vec::new();
        for (t, cut) in self.cuts.iter().enumerate() {
            if let Ok(r) = cut.reconstruct(&self.mesh.triangle(t)) {
                out.extend(r.liquid);
            }
        }
        out
    }

    /// Material at `p`; points off the mesh are air.
    pub fn material_query(&self, p: Point2) -> u8 {
        match self.mesh.locate(p, None) {
            LocateResult::Triangle(t) => {
                let t = t as usize;
                let cut = &self.cuts[t];
                cut.material_at(&self.mesh.triangle(t), p).unwrap_or(cut.c)
            }
            LocateResult::Outside => 0,
        }
    }
}

/// Read-only view of the previous state shared by all triangles of a step.
struct Snapshot<'a> {
    mesh: &'a TriMesh,
    views: Vec<View>,
    /// Material of cut-free triangles.
    uniform: Vec<Option<u8>>,
    /// Edges across which the material may change.
    edge_active: Vec<bool>,
    hot: Vec<bool>,
    nx: usize,
    /// The domain when the mesh exactly fills its bounding box.
    walls: Option<Rect>,
}

impl<'a> Snapshot<'a> {
    fn new(state: &'a InterfaceState) -> Self {
        let mesh = state.mesh();
        let views: Vec<View> = (0..mesh.num_triangles())
            .into_par_iter()
            .map(|t| {
                let tri = mesh.triangle(t);
                let cut = &state.cuts[t];
                cut.view(&tri)
                    .or_else(|_| EdgeCut::uniform(cut.c).view(&tri))
                    .expect("uniform records always classify")
            })
            .collect();
        let uniform: Vec<Option<u8>> = views
            .iter()
            .map(|v| (v.form.case_id == 1).then_some(v.form.swap as u8))
            .collect();
        let edge_active: Vec<bool> = mesh
            .edges()
            .iter()
            .map(|e| {
                // the domain boundary is a wall, not an interface
                let a = uniform[e.tris[0] as usize];
                let b = if e.tris[1] == NO_TRIANGLE {
                    a
                } else {
                    uniform[e.tris[1] as usize]
                };
                match (a, b) {
                    (Some(x), Some(y)) => x != y,
                    _ => true,
                }
            })
            .collect();
        let (nx, ny) = mesh.bucket_dims();
        let mut hot = vec![false; nx * ny];
        for t in 0..mesh.num_triangles() {
            let te = mesh.tri_edges(t);
            if uniform[t].is_some() && !te.iter().any(|&e| edge_active[e as usize]) {
                continue;
            }
            let (lo, hi) = tri_bbox(&mesh.triangle(t));
            if let Some([i0, i1, j0, j1]) = mesh.bucket_span(lo, hi) {
                for j in j0..=j1 {
                    for i in i0..=i1 {
                        hot[j * nx + i] = true;
                    }
                }
            }
        }
        let b = mesh.bbox();
        let walls = ((mesh.total_area() - b.area()).abs() <= 1e-12 * b.area()).then_some(b);
        Self {
            mesh,
            views,
            uniform,
            edge_active,
            hot,
            nx,
            walls,
        }
    }

    /// Pre-images that leave a box domain through perturbation or rounding
    /// are put back on its walls.
    #[inline]
    fn confine(&self, p: Point2) -> Point2 {
        match self.walls {
            Some(b) => Point2::new(p.x.clamp(b.lo.x, b.hi.x), p.y.clamp(b.lo.y, b.hi.y)),
            None => p,
        }
    }

    /// Whether the interface may come near `[lo, hi]`.
    fn is_hot(&self, lo: Point2, hi: Point2) -> bool {
        match self.mesh.bucket_span(lo, hi) {
            Some([i0, i1, j0, j1]) => (j0..=j1).any(|j| (i0..=i1).any(|i| self.hot[j * self.nx + i])),
            // off the mesh everything is air; only the hull can matter
            None => false,
        }
    }

    #[inline]
    fn material_in(&self, t: usize, p: Point2) -> u8 {
        match self.uniform[t] {
            Some(m) => m,
            None => self.views[t].material_at(p),
        }
    }

    /// Material at `p`, reading points just off a box-shaped domain from
    /// the nearest boundary point.
    fn material(&self, p: Point2) -> u8 {
        if let LocateResult::Triangle(t) = self.mesh.locate(p, None) {
            return self.material_in(t as usize, p);
        }
        let b = self.mesh.bbox();
        let q = Point2::new(p.x.clamp(b.lo.x, b.hi.x), p.y.clamp(b.lo.y, b.hi.y));
        match self.mesh.locate(q, None) {
            LocateResult::Triangle(t) => self.material_in(t as usize, q),
            LocateResult::Outside => 0,
        }
    }

    /// Interface crossings of `a -> b`, Jordan-filtered against the
    /// endpoint materials, sorted by parameter.
    fn crossings(&self, a: Point2, b: Point2, ma: u8, mb: u8, scratch: &mut Scratch) -> Vec<Hit> {
        let (lo, hi) = bbox2(a, b);
        if !self.is_hot(lo, hi) {
            return Vec::new();
        }
        let Ok(seg) = Segment::new(a, b) else {
            return Vec::new();
        };
        let mesh = self.mesh;
        mesh.triangles_near(lo, hi, &mut scratch.cand);
        let mut hits: Vec<Hit> = Vec::new();
        scratch.edges.clear();
        for &k in &scratch.cand {
            let k = k as usize;
            scratch.edges.extend(mesh.tri_edges(k).iter().filter(|&&e| self.edge_active[e as usize]));
            if self.uniform[k].is_some() {
                continue;
            }
            for &(p, q) in self.views[k].segments().as_slice() {
                let Ok(s) = Segment::new(p, q) else { continue };
                if let SegIntersection::Point { t, p: x, .. } = seg_seg_intersect(&seg, &s) {
                    hits.push(Hit {
                        s: t,
                        point: x,
                        line: (p, q),
                    });
                }
            }
        }
        scratch.edges.sort_unstable();
        scratch.edges.dedup();
        let verts = mesh.vertices();
        for &e in &scratch.edges {
            let edge = mesh.edge(e);
            let (p, q) = (verts[edge.v[0] as usize], verts[edge.v[1] as usize]);
            if edge.tris[1] == NO_TRIANGLE {
                continue;
            }
            let Ok(s) = Segment::new(p, q) else { continue };
            if let SegIntersection::Point { t, p: x, .. } = seg_seg_intersect(&seg, &s) {
                // a crossing of a mesh edge is on the interface only where
                // the two sides disagree
                let m0 = self.material_in(edge.tris[0] as usize, x);
                let m1 = self.material_in(edge.tris[1] as usize, x);
                if m0 != m1 {
                    hits.push(Hit {
                        s: t,
                        point: x,
                        line: (p, q),
                    });
                }
            }
        }
        hits.sort_by(|x, y| x.s.total_cmp(&y.s));
        jordan_filter(&mut hits, ma == mb);
        hits
    }

    /// Clip the `material` region of the previous state to the CCW triangle
    /// `window`, feeding each non-empty piece to `sink`.
    fn clip(&self, window: &[Point2; 3], material: u8, scratch: &mut Scratch, mut sink: impl FnMut(&[Point2])) {
        let (lo, hi) = tri_bbox(window);
        let mesh = self.mesh;
        mesh.triangles_near(lo, hi, &mut scratch.cand);
        for idx in 0..scratch.cand.len() {
            let k = scratch.cand[idx] as usize;
            match self.uniform[k] {
                Some(m) if m == material => {
                    scratch.cur.clear();
                    scratch.cur.extend_from_slice(&mesh.triangle(k));
                    clip_loop_by_convex(&mut scratch.cur, &mut scratch.tmp, window);
                    if scratch.cur.len() >= 3 {
                        sink(&scratch.cur);
                    }
                }
                Some(_) => {}
                None => {
                    let view = &self.views[k];
                    let pieces = if material == 1 { view.liquid_pieces() } else { view.air_pieces() };
                    for piece in pieces.as_slice() {
                        scratch.cur.clear();
                        scratch.cur.extend_from_slice(piece.vertices());
                        clip_loop_by_convex(&mut scratch.cur, &mut scratch.tmp, window);
                        if scratch.cur.len() >= 3 {
                            sink(&scratch.cur);
                        }
                    }
                }
            }
        }
    }

    /// Liquid area inside a CCW pre-image triangle.
    fn liquid_area_in(&self, window: &[Point2; 3], fallback: u8, scratch: &mut Scratch) -> f64 {
        let (lo, hi) = tri_bbox(window);
        if !self.is_hot(lo, hi) {
            return fallback as f64 * signed_area(window);
        }
        let mut a = 0.0;
        self.clip(window, 1, scratch, |p| a += signed_area(p));
        a
    }
}

#[derive(Default)]
struct Scratch {
    cand: Vec<u32>,
    edges: Vec<u32>,
    cur: Vec<Point2>,
    tmp: Vec<Point2>,
}

/// An interface crossing on a pre-image edge.
#[derive(Debug, Clone, Copy)]
struct Hit {
    /// Parameter along the pre-image edge.
    s: f64,
    point: Point2,
    /// The interface line that produced the crossing.
    line: (Point2, Point2),
}

/// Keep 0 or 2 crossings (first and last) between equal materials and the
/// first one between different materials. `hits` must be sorted.
pub fn jordan_filter<T: Copy>(hits: &mut Vec<T>, same_material: bool) {
    if same_material {
        if hits.len() >= 2 {
            let last = hits[hits.len() - 1];
            hits.truncate(1);
            hits.push(last);
        } else {
            hits.clear();
        }
    } else {
        hits.truncate(1);
    }
}

#[inline]
fn bbox2(a: Point2, b: Point2) -> (Point2, Point2) {
    (Point2::new(a.x.min(b.x), a.y.min(b.y)), Point2::new(a.x.max(b.x), a.y.max(b.y)))
}

#[inline]
fn tri_bbox(t: &[Point2; 3]) -> (Point2, Point2) {
    (
        Point2::new(t[0].x.min(t[1].x).min(t[2].x), t[0].y.min(t[1].y).min(t[2].y)),
        Point2::new(t[0].x.max(t[1].x).max(t[2].x), t[0].y.max(t[1].y).max(t[2].y)),
    )
}

#[inline]
fn is_ccw(t: &[Point2; 3]) -> bool {
    orient2d(t[0], t[1], t[2]) > 0
}

/// Deterministic offset of length at most `radius` for one vertex in one
/// step.
pub fn perturbation(seed: u64, step: u64, vertex: u32, radius: f64) -> Point2 {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&step.to_le_bytes());
    key[16..20].copy_from_slice(&vertex.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    let angle = rng.gen::<f64>() * TAU;
    let len = rng.gen::<f64>() * radius;
    let (s, c) = angle.sin_cos();
    Point2::new(c * len, s * len)
}

struct Ctx<'f, F: ?Sized> {
    field: &'f F,
    t0: f64,
    dt: f64,
    seed: u64,
    step: u64,
    radius: f64,
}

#[derive(Debug, Clone, Copy)]
struct VertexImage {
    /// Pre-image of the perturbed vertex, used for topology.
    p: Point2,
    /// Pre-image of the vertex itself, used for areas.
    p0: Point2,
    m: u8,
}

impl<F: VelocityField + ?Sized> Ctx<'_, F> {
    #[inline]
    fn back(&self, p: Point2) -> Point2 {
        rk4_trace(self.field, p, self.t0 + self.dt, -self.dt)
    }

    #[inline]
    fn forward(&self, p: Point2) -> Point2 {
        rk4_trace(self.field, p, self.t0, self.dt)
    }

    fn vertex_image(&self, snap: &Snapshot, id: u32, v: Point2) -> VertexImage {
        let p = snap.confine(self.back(v + perturbation(self.seed, self.step, id, self.radius)));
        VertexImage {
            p,
            p0: snap.confine(self.back(v)),
            m: snap.material(p),
        }
    }

    /// Cuts on mesh edge `e`, as parameters along its stored direction.
    fn edge_cuts(&self, snap: &Snapshot, e: u32, img: &[VertexImage], scratch: &mut Scratch) -> Vec<EdgeHit> {
        let mesh = snap.mesh;
        let edge = mesh.edge(e);
        let (ia, ib) = (edge.v[0] as usize, edge.v[1] as usize);
        let (a, b) = (img[ia], img[ib]);
        let hits = snap.crossings(a.p, b.p, a.m, b.m, scratch);
        if hits.is_empty() {
            return Vec::new();
        }
        let (va, vb) = (mesh.vertices()[ia], mesh.vertices()[ib]);
        let d = vb - va;
        let inv = 1.0 / d.norm2();
        // The pre-image crossing lies strictly inside its edge, so the cut
        // exists; rounding in the transport may still carry it onto or past
        // an end, where it would be lost.
        let (lo, hi) = (2.0 * EPS_CUT, 1.0 - 2.0 * EPS_CUT);
        let mut out: Vec<EdgeHit> = hits
            .iter()
            .map(|h| {
                let q = self.forward(h.point);
                EdgeHit {
                    r: ((q - va).dot(d) * inv).clamp(lo, hi),
                    conf: h.s.min(1.0 - h.s),
                    line: h.line,
                }
            })
            .collect();
        out.sort_by(|x, y| x.r.total_cmp(&y.r));
        out
    }
}

/// A transported cut on a mesh edge.
#[derive(Debug, Clone, Copy)]
struct EdgeHit {
    /// Parameter along the edge's stored direction.
    r: f64,
    /// Distance of the pre-image crossing from the pre-image edge's ends.
    conf: f64,
    line: (Point2, Point2),
}

/// One cut of a triangle row, with the confidence used for parity repair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct RowCut {
    pub r: f64,
    pub conf: f64,
    pub line: Option<(Point2, Point2)>,
}

/// Drop entries inside the snapping band, then drop the least confident
/// cut until the total is even. Returns whether anything beyond snapping
/// was dropped.
pub(crate) fn repair_parity(rows: &mut [Vec<RowCut>; 3]) -> bool {
    for row in rows.iter_mut() {
        row.retain(|c| is_valid_cut(c.r));
    }
    let mut repaired = false;
    while rows.iter().map(Vec::len).sum::<usize>() % 2 == 1 {
        let mut best: Option<(usize, usize, f64)> = None;
        for (i, row) in rows.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                if best.is_none_or(|b| c.conf < b.2) {
                    best = Some((i, j, c.conf));
                }
            }
        }
        let (i, j, _) = best.expect("odd total implies a cut");
        rows[i].remove(j);
        repaired = true;
    }
    repaired
}

pub(crate) fn rows_array(rows: &[Vec<RowCut>; 3]) -> [[f64; 2]; 3] {
    let mut out = [[0.0, 1.0]; 3];
    for (i, row) in rows.iter().enumerate() {
        out[i] = match row.len() {
            0 => [0.0, 1.0],
            1 => [row[0].r, 1.0],
            _ => [row[0].r.min(row[1].r), row[0].r.max(row[1].r)],
        };
    }
    out
}

/// The doubly-cut edge when the rows form the single-pocket pattern.
pub(crate) fn pocket_edge(rows: &[Vec<RowCut>; 3]) -> Option<usize> {
    let counts = [rows[0].len(), rows[1].len(), rows[2].len()];
    let d = counts.iter().position(|&k| k == 2)?;
    (counts.iter().sum::<usize>() == 2).then_some(d)
}

/// Barycentric `(u, v)` of `p` when it lies strictly inside `tri`, after
/// the rounding applied to stored interior vertices.
pub fn strictly_inside(tri: &[Point2; 3], p: Point2) -> Option<[f64; 2]> {
    if !p.is_finite() || (0..3).any(|i| orient2d(tri[i], tri[(i + 1) % 3], p) <= 0) {
        return None;
    }
    let (u, v) = barycentric(tri, p);
    let (u, v) = ((u + 2.0) - 2.0, (v + 2.0) - 2.0);
    (u > 0.0 && v > 0.0 && 1.0 - u - v > 0.0).then_some([u, v])
}

/// Which construction produced the case-2 interior vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexSource {
    Centroid,
    LineIntersection,
    FarthestVertex,
}

/// Interior vertex for a single-pocket triangle. `pieces` are the pocket
/// material inside the pre-image, `lines` the interface lines that produced
/// the two cuts on edge `d`, `ra`/`rb` the two cut points on that edge.
#[allow(clippy::too_many_arguments)]
pub fn find_additional_vertex<F: VelocityField + ?Sized>(
    tri: &[Point2; 3],
    d: usize,
    ra: Point2,
    rb: Point2,
    pieces: &[Vec<Point2>],
    lines: Option<[(Point2, Point2); 2]>,
    field: &F,
    t0: f64,
    dt: f64,
) -> Option<([f64; 2], VertexSource)> {
    let images: Vec<Vec<Point2>> = pieces
        .iter()
        .map(|p| p.iter().map(|&q| rk4_trace(field, q, t0, dt)).collect())
        .collect();
    let mut area = 0.0;
    let mut moment = Point2::default();
    for img in &images {
        if let Some((a, c)) = area_centroid(img) {
            area += a;
            moment += c * a;
        }
    }
    if area > 0.0 {
        let xc = moment * (1.0 / area);
        let cand = xc * 3.0 - ra - rb;
        if let Some(b) = strictly_inside(tri, cand) {
            return Some((b, VertexSource::Centroid));
        }
    }
    if let Some([(p1, q1), (p2, q2)]) = lines {
        let (d1, d2) = (q1 - p1, q2 - p2);
        let den = d1.cross(d2);
        if den.abs() > f64::EPSILON * d1.norm() * d2.norm() {
            let x = p1 + d1 * ((p2 - p1).cross(d2) / den);
            if let Some(b) = strictly_inside(tri, rk4_trace(field, x, t0, dt)) {
                return Some((b, VertexSource::LineIntersection));
            }
        }
    }
    let (a, b) = (tri[d], tri[(d + 1) % 3]);
    let mut best: Option<(f64, [f64; 2])> = None;
    for q in images.iter().flatten() {
        if let Some(bc) = strictly_inside(tri, *q) {
            let dist = (b - a).cross(*q - a);
            if best.is_none_or(|(bd, _)| dist > bd) {
                best = Some((dist, bc));
            }
        }
    }
    best.map(|(_, bc)| (bc, VertexSource::FarthestVertex))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectionTarget {
    /// Liquid area inside the pre-image.
    pub liquid_area: f64,
    /// Target liquid fraction, clamped to `[0, 1]`.
    pub f1: f64,
}

impl CorrectionTarget {
    pub fn direction(&self, current_f1: f64) -> Direction {
        if self.f1 > current_f1 {
            Direction::Expand
        } else if self.f1 < current_f1 {
            Direction::Shrink
        } else {
            Direction::None
        }
    }
}

/// Liquid area of the previous state inside `preimage`, over the area of
/// the Eulerian triangle `t`.
pub fn correction_target(state: &InterfaceState, t: usize, preimage: &[Point2; 3]) -> Result<CorrectionTarget, AdvectError> {
    if t >= state.mesh().num_triangles() {
        return Err(AdvectError::TriangleOutOfRange(t));
    }
    if !is_ccw(preimage) {
        return Err(AdvectError::DegeneratePreimage(t as u32));
    }
    let snap = Snapshot::new(state);
    let mut scratch = Scratch::default();
    let fallback = snap.material(preimage[0]);
    let a = snap.liquid_area_in(preimage, fallback, &mut scratch);
    Ok(CorrectionTarget {
        liquid_area: a,
        f1: (a / state.mesh().area(t)).clamp(0.0, 1.0),
    })
}

fn check_dt(dt: f64) -> Result<(), AdvectError> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(AdvectError::InvalidTimeStep(dt))
    }
}

/// Pre-image of triangle `t` under one step ending at `time + dt`, with
/// each vertex perturbed before the backward trace.
pub fn preimage_triangle<F: VelocityField + ?Sized>(
    mesh: &TriMesh,
    t: usize,
    field: &F,
    time: f64,
    dt: f64,
    seed: u64,
    step: u64,
) -> Result<[Point2; 3], AdvectError> {
    check_dt(dt)?;
    if t >= mesh.num_triangles() {
        return Err(AdvectError::TriangleOutOfRange(t));
    }
    let radius = PERTURBATION * mesh.char_length();
    let ids = mesh.triangles()[t];
    let tri = mesh.triangle(t);
    let out: [Point2; 3] = std::array::from_fn(|k| {
        let p = tri[k] + perturbation(seed, step, ids[k], radius);
        rk4_trace(field, p, time + dt, -dt)
    });
    if is_ccw(&out) {
        Ok(out)
    } else {
        Err(AdvectError::DegeneratePreimage(t as u32))
    }
}

/// Material of the previous state at `p`.
pub fn material_query(state: &InterfaceState, p: Point2) -> u8 {
    state.material_query(p)
}

/// Jordan-filtered interface crossings of `seg`, as `(parameter, point)`.
pub fn edge_cuts_on_segment(state: &InterfaceState, seg: &Segment) -> Vec<(f64, Point2)> {
    let snap = Snapshot::new(state);
    let mut scratch = Scratch::default();
    let (ma, mb) = (snap.material(seg.a), snap.material(seg.b));
    snap.crossings(seg.a, seg.b, ma, mb, &mut scratch)
        .iter()
        .map(|h| (h.s, h.point))
        .collect()
}

/// Transported cuts of one triangle before any case-2 vertex or area
/// correction. Rows are parity-repaired but may form the single-pocket
/// pattern, which has no valid record without an interior vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdvectedCut {
    pub c: u8,
    pub rows: [[f64; 2]; 3],
    pub repaired: bool,
}

impl AdvectedCut {
    /// The record this pattern represents, with a single pocket left empty.
    pub fn to_edge_cut(&self) -> EdgeCut {
        EdgeCut::new(self.c, self.rows, None).unwrap_or(EdgeCut::uniform(self.c))
    }
}

/// Pre-image query, cut transport and projection for one triangle.
pub fn advect_simple<F: VelocityField + ?Sized>(
    state: &InterfaceState,
    t: usize,
    field: &F,
    dt: f64,
    seed: u64,
) -> Result<AdvectedCut, AdvectError> {
    check_dt(dt)?;
    let mesh = state.mesh();
    if t >= mesh.num_triangles() {
        return Err(AdvectError::TriangleOutOfRange(t));
    }
    let snap = Snapshot::new(state);
    let ctx = Ctx {
        field,
        t0: state.time,
        dt,
        seed,
        step: state.step,
        radius: PERTURBATION * mesh.char_length(),
    };
    let mut scratch = Scratch::default();
    let ids = mesh.triangles()[t];
    let mut img = vec![
        VertexImage {
            p: Point2::default(),
            p0: Point2::default(),
            m: 0
        };
        mesh.num_vertices()
    ];
    for &v in &ids {
        img[v as usize] = ctx.vertex_image(&snap, v, mesh.vertices()[v as usize]);
    }
    let pre = ids.map(|v| img[v as usize].p);
    if !is_ccw(&pre) {
        return Err(AdvectError::DegeneratePreimage(t as u32));
    }
    let te = mesh.tri_edges(t);
    let hits: Vec<Vec<EdgeHit>> = te.iter().map(|&e| ctx.edge_cuts(&snap, e, &img, &mut scratch)).collect();
    let mut rows = triangle_rows(mesh, t, |e| &hits[te.iter().position(|&x| x == e).unwrap()]);
    let repaired = repair_parity(&mut rows);
    Ok(AdvectedCut {
        c: img[ids[0] as usize].m,
        rows: rows_array(&rows),
        repaired,
    })
}

fn triangle_rows<'h>(mesh: &TriMesh, t: usize, hits: impl Fn(u32) -> &'h Vec<EdgeHit>) -> [Vec<RowCut>; 3] {
    let ids = mesh.triangles()[t];
    let te = mesh.tri_edges(t);
    std::array::from_fn(|i| {
        let h = hits(te[i]);
        let forward = mesh.edge(te[i]).v[0] == ids[i];
        let mut row: Vec<RowCut> = h
            .iter()
            .map(|x| RowCut {
                r: if forward { x.r } else { 1.0 - x.r },
                conf: x.conf,
                line: Some(x.line),
            })
            .collect();
        if !forward {
            row.reverse();
        }
        row
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    /// Inverted pre-image; the previous record was kept.
    DegeneratePreimage,
    /// A cut was dropped to restore parity.
    ParityRepair,
    /// The cuts did not form a valid pattern and were cleared.
    MaterialFallback,
    /// Case-2 vertex from the interface line intersection.
    VertexFromLines,
    /// Case-2 vertex from the farthest transported polygon vertex.
    VertexFromFarthest,
    /// No case-2 vertex found; the pocket was dropped.
    VertexAbsent,
    /// The exact correction would enter the snapping band; a partial
    /// correction was applied.
    CorrectionClamped,
    /// No admissible correction reaches the target.
    CorrectionUnreachable,
    /// The pre-image holds both materials but the new record has no cuts.
    UnresolvedFeature,
    /// A cut-free triangle whose straight-edged pre-image has a different
    /// area; its fraction cannot absorb the difference.
    AreaDistortion,
    /// A cut-free record is closer to the pre-image liquid area than the
    /// corrected cuts; the cuts were dropped.
    UniformFallback,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::DegeneratePreimage => "degenerate_preimage",
            EventKind::ParityRepair => "parity_repair",
            EventKind::MaterialFallback => "material_fallback",
            EventKind::VertexFromLines => "vertex_from_lines",
            EventKind::VertexFromFarthest => "vertex_from_farthest",
            EventKind::VertexAbsent => "vertex_absent",
            EventKind::CorrectionClamped => "correction_clamped",
            EventKind::CorrectionUnreachable => "correction_unreachable",
            EventKind::UnresolvedFeature => "unresolved_feature",
            EventKind::AreaDistortion => "area_distortion",
            EventKind::UniformFallback => "uniform_fallback",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepEvent {
    pub triangle: u32,
    pub kind: EventKind,
    /// Pre-image liquid area minus the new liquid area, when the event
    /// affects it.
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepReport {
    /// Index of the step that produced the new state.
    pub step: u64,
    pub time: f64,
    pub events: Vec<StepEvent>,
    /// Triangles whose new liquid area differs from the liquid area of
    /// their pre-image by more than `FAILURE_TOL * |T|`.
    pub failed_triangles: usize,
    /// Sum over failed triangles of pre-image liquid area minus new
    /// liquid area.
    pub deficit: f64,
    /// Liquid area of the new state.
    pub liquid_area: f64,
    /// Sum of the pre-image liquid areas.
    pub target_area: f64,
}

impl StepReport {
    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }
}

struct TriOutcome {
    cut: EdgeCut,
    failed: bool,
    target_area: f64,
    events: Vec<StepEvent>,
}

impl<F: VelocityField + ?Sized> Ctx<'_, F> {
    #[allow(clippy::too_many_arguments)]
    fn triangle(
        &self,
        snap: &Snapshot,
        state: &InterfaceState,
        t: usize,
        img: &[VertexImage],
        hits: &[Vec<EdgeHit>],
        scratch: &mut Scratch,
    ) -> TriOutcome {
        let mesh = snap.mesh;
        let ids = mesh.triangles()[t];
        let tri = mesh.triangle(t);
        let area_t = mesh.area(t);
        let id = t as u32;
        let mut events = Vec::new();
        let pre = ids.map(|v| img[v as usize].p);
        let pre0 = ids.map(|v| img[v as usize].p0);
        if !is_ccw(&pre) || !is_ccw(&pre0) {
            let a = state.liquid_area(t);
            events.push(StepEvent {
                triangle: id,
                kind: EventKind::DegeneratePreimage,
                value: 0.0,
            });
            return TriOutcome {
                cut: state.cuts[t],
                failed: true,
                target_area: a,
                events,
            };
        }
        let c = img[ids[0] as usize].m;
        let mut rows = triangle_rows(mesh, t, |e| &hits[e as usize]);
        if repair_parity(&mut rows) {
            events.push(StepEvent {
                triangle: id,
                kind: EventKind::ParityRepair,
                value: 0.0,
            });
        }

        let mut vt = None;
        if let Some(d) = pocket_edge(&rows) {
            // the pocket holds the material opposite to all three vertices
            let pocket = c ^ 1;
            let mut pieces = Vec::new();
            snap.clip(&pre0, pocket, scratch, |p| pieces.push(p.to_vec()));
            let (r0, r1) = (rows[d][0], rows[d][1]);
            let ra = tri[d].lerp(tri[(d + 1) % 3], r0.r.min(r1.r));
            let rb = tri[d].lerp(tri[(d + 1) % 3], r0.r.max(r1.r));
            let lines = match (r0.line, r1.line) {
                (Some(a), Some(b)) => Some([a, b]),
                _ => None,
            };
            match find_additional_vertex(&tri, d, ra, rb, &pieces, lines, self.field, self.t0, self.dt) {
                Some((b, src)) => {
                    vt = Some(b);
                    let kind = match src {
                        VertexSource::Centroid => None,
                        VertexSource::LineIntersection => Some(EventKind::VertexFromLines),
                        VertexSource::FarthestVertex => Some(EventKind::VertexFromFarthest),
                    };
                    if let Some(kind) = kind {
                        events.push(StepEvent {
                            triangle: id,
                            kind,
                            value: 0.0,
                        });
                    }
                }
                None => {
                    rows[d].clear();
                    events.push(StepEvent {
                        triangle: id,
                        kind: EventKind::VertexAbsent,
                        value: 0.0,
                    });
                }
            }
        }
        let mut cut = match EdgeCut::new(c, rows_array(&rows), vt) {
            Ok(cut) => cut,
            Err(_) => {
                events.push(StepEvent {
                    triangle: id,
                    kind: EventKind::MaterialFallback,
                    value: 0.0,
                });
                EdgeCut::uniform(c)
            }
        };

        let a = snap.liquid_area_in(&pre0, img[ids[0] as usize].m, scratch);
        let target = (a / area_t).clamp(0.0, 1.0);
        if cut.is_uniform() {
            let stray = if cut.c == 1 { signed_area(&pre0) - a } else { a };
            if stray > FAILURE_TOL * area_t {
                events.push(StepEvent {
                    triangle: id,
                    kind: EventKind::UnresolvedFeature,
                    value: a - cut.c as f64 * area_t,
                });
            } else if (a - cut.c as f64 * area_t).abs() > FAILURE_TOL * area_t {
                events.push(StepEvent {
                    triangle: id,
                    kind: EventKind::AreaDistortion,
                    value: a - cut.c as f64 * area_t,
                });
            }
        } else {
            let f = cut.liquid_fraction().unwrap_or(cut.c as f64);
            if f != target {
                match edge_cut_correction(&cut, target) {
                    Ok(Correction::Solved { cut: c2, .. }) => cut = c2,
                    Ok(Correction::Clamped { cut: c2, .. }) => {
                        cut = c2;
                        let f = cut.liquid_fraction().unwrap_or(0.0);
                        events.push(StepEvent {
                            triangle: id,
                            kind: EventKind::CorrectionClamped,
                            value: a - f * area_t,
                        });
                    }
                    Ok(Correction::Unchanged) | Err(_) => {
                        events.push(StepEvent {
                            triangle: id,
                            kind: EventKind::CorrectionUnreachable,
                            value: a - f * area_t,
                        });
                    }
                }
            }
        }
        let mut miss = (cut.liquid_fraction().unwrap_or(cut.c as f64) * area_t - a).abs();
        let u = (target >= 0.5) as u8;
        let miss_u = (u as f64 * area_t - a).abs();
        if miss > FAILURE_TOL * area_t && miss_u < miss && !(cut.is_uniform() && cut.c == u) {
            events.push(StepEvent {
                triangle: id,
                kind: EventKind::UniformFallback,
                value: a - u as f64 * area_t,
            });
            cut = EdgeCut::uniform(u);
            miss = miss_u;
        }
        let failed = miss > FAILURE_TOL * area_t;
        TriOutcome {
            cut,
            failed,
            target_area: a,
            events,
        }
    }
}

/// A liquid triangle whose pre-image lies inside the liquid.
fn far_liquid(mesh: &TriMesh, t: usize, img: &[VertexImage]) -> TriOutcome {
    let ids = mesh.triangles()[t];
    let a = signed_area(&ids.map(|v| img[v as usize].p0));
    let area_t = mesh.area(t);
    let failed = (a - area_t).abs() > FAILURE_TOL * area_t;
    let events = if failed {
        vec![StepEvent {
            triangle: t as u32,
            kind: EventKind::AreaDistortion,
            value: a - area_t,
        }]
    } else {
        Vec::new()
    };
    TriOutcome {
        cut: EdgeCut::uniform(1),
        failed,
        target_area: a,
        events,
    }
}

/// Advance the interface by one step of length `dt`.
pub fn advect_step<F: VelocityField + ?Sized>(
    state: &InterfaceState,
    field: &F,
    dt: f64,
    seed: u64,
) -> Result<(InterfaceState, StepReport), AdvectError> {
    check_dt(dt)?;
    let mesh = state.mesh();
    let snap = Snapshot::new(state);
    let h = mesh.char_length();
    let ctx = Ctx {
        field,
        t0: state.time,
        dt,
        seed,
        step: state.step,
        radius: PERTURBATION * h,
    };
    let nt = mesh.num_triangles();

    // Triangles whose pre-images provably stay in uniform material keep
    // their record. Only the pre-image area of liquid ones is needed.
    let bb = mesh.bbox();
    let reach = field
        .speed_bound(bb)
        .map(|u| u * dt * 1.25 + 4.0 * ctx.radius + 1e-9 * (bb.width() + bb.height()));
    let near: Vec<bool> = (0..nt)
        .into_par_iter()
        .map(|t| match reach {
            Some(r) if r.is_finite() => {
                let (lo, hi) = tri_bbox(&mesh.triangle(t));
                let off = Point2::new(r, r);
                snap.is_hot(lo - off, hi + off)
            }
            _ => true,
        })
        .collect();

    let mut need_v = vec![false; mesh.num_vertices()];
    let mut need_e = vec![false; mesh.edges().len()];
    for t in 0..nt {
        if near[t] || snap.uniform[t] == Some(1) {
            for &v in &mesh.triangles()[t] {
                need_v[v as usize] = true;
            }
        }
        if near[t] {
            for &e in &mesh.tri_edges(t) {
                need_e[e as usize] = true;
            }
        }
    }
    let verts = mesh.vertices();
    let img: Vec<VertexImage> = (0..mesh.num_vertices())
        .into_par_iter()
        .map(|v| {
            if need_v[v] {
                ctx.vertex_image(&snap, v as u32, verts[v])
            } else {
                VertexImage {
                    p: verts[v],
                    p0: verts[v],
                    m: 0,
                }
            }
        })
        .collect();
    let hits: Vec<Vec<EdgeHit>> = (0..mesh.edges().len())
        .into_par_iter()
        .map_init(Scratch::default, |scratch, e| {
            if need_e[e] {
                ctx.edge_cuts(&snap, e as u32, &img, scratch)
            } else {
                Vec::new()
            }
        })
        .collect();
    let outcomes: Vec<Option<TriOutcome>> = (0..nt)
        .into_par_iter()
        .map_init(Scratch::default, |scratch, t| {
            if near[t] {
                Some(ctx.triangle(&snap, state, t, &img, &hits, scratch))
            } else if snap.uniform[t] == Some(1) {
                Some(far_liquid(mesh, t, &img))
            } else {
                None
            }
        })
        .collect();

    let mut report = StepReport {
        step: state.step + 1,
        time: state.time + dt,
        ..Default::default()
    };
    let mut cuts = Vec::with_capacity(nt);
    for (t, out) in outcomes.into_iter().enumerate() {
        match out {
            Some(o) => {
                report.target_area += o.target_area;
                report.failed_triangles += o.failed as usize;
                if o.failed {
                    report.deficit += o.target_area - o.cut.liquid_fraction().unwrap_or(o.cut.c as f64) * mesh.area(t);
                }
                report.events.extend(o.events);
                cuts.push(o.cut);
            }
            None => {
                report.target_area += state.liquid_area(t);
                cuts.push(state.cuts[t]);
            }
        }
    }
    let next = InterfaceState {
        mesh: state.mesh.clone(),
        cuts,
        time: state.time + dt,
        step: state.step + 1,
    };
    report.liquid_area = next.total_liquid_area();
    Ok((next, report))
}

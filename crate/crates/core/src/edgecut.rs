//! Per-triangle interface record: a material flag for the first vertex and
//! up to two cut parameters on each edge, plus an interior vertex for the
//! single-edge pocket (case 2).
//!
//! Every valid record is a material swap and/or cyclic relabelling of one
//! of six basic patterns (`c`, `t`):
//!
//! | case | c | t       | liquid polygon                  |
//! |------|---|---------|---------------------------------|
//! | 1    | 0 | (0,0,0) | none                            |
//! | 2    | 0 | (2,0,0) | r11 r12 vt                      |
//! | 3    | 0 | (2,2,0) | r11 r12 r21 r22                 |
//! | 4    | 0 | (2,2,2) | r11 r12 r21 r22 r31 r32         |
//! | 5    | 1 | (1,0,1) | v1 r11 r31                      |
//! | 6    | 1 | (1,2,1) | v1 r11 r21 r22 r31              |
//!
//! All geometry is evaluated in that canonical frame and mapped back.

use thiserror::Error;

use crate::geom::{orient2d, signed_area, ConvexPolygon, Point2, Segment};

/// Cut parameters within this distance of an edge end are snapped onto it.
pub const EPS_CUT: f64 = 1e-9;

pub const AIR: u8 = 0;
pub const LIQUID: u8 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EdgeCutError {
    #[error("cut parameter {0} outside [0, 1]")]
    InvalidEntry(f64),
    #[error("odd total number of cuts {0:?}")]
    ParityInconsistent([u8; 3]),
    #[error("cut pattern c={c} t={t:?} matches no basic case")]
    NoMatchingCase { c: u8, t: [u8; 3] },
    #[error("case 2 requires an interior vertex")]
    MissingVertex,
    #[error("interior vertex given for a cut that is not case 2")]
    UnexpectedVertex,
    #[error("interior vertex barycentrics ({0}, {1}) not strictly inside")]
    VertexOutside(f64, f64),
    #[error("target liquid fraction {0} outside [0, 1]")]
    TargetOutOfRange(f64),
    #[error("malformed packed record: {0}")]
    Format(String),
}

#[inline]
pub fn is_valid_cut(r: f64) -> bool {
    r > EPS_CUT && r < 1.0 - EPS_CUT
}

/// Snap `r` onto 0/1 when inside the validity band.
#[inline]
pub fn snap_cut(r: f64) -> f64 {
    if r <= EPS_CUT {
        0.0
    } else if r >= 1.0 - EPS_CUT {
        1.0
    } else {
        r
    }
}

/// Round a barycentric weight onto the grid the packed `u + 2` encoding
/// represents exactly.
#[inline]
fn quantize_bary(u: f64) -> f64 {
    (u + 2.0) - 2.0
}

/// `(1 - r) * v_i + r * v_{i+1}` on edge `i` of `tri`.
#[inline]
pub fn cut_point(tri: &[Point2; 3], i: usize, r: f64) -> Point2 {
    tri[i].lerp(tri[(i + 1) % 3], r)
}

/// Barycentric `(u, v)` of `p` with `p = w v1 + u v2 + v v3`.
pub fn barycentric(tri: &[Point2; 3], p: Point2) -> (f64, f64) {
    let e1 = tri[1] - tri[0];
    let e3 = tri[2] - tri[0];
    let d = p - tri[0];
    let det = e1.cross(e3);
    (d.cross(e3) / det, e1.cross(d) / det)
}

#[inline]
pub fn from_barycentric(tri: &[Point2; 3], u: f64, v: f64) -> Point2 {
    tri[0] + (tri[1] - tri[0]) * u + (tri[2] - tri[0]) * v
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeCut {
    /// Material of the first vertex.
    pub c: u8,
    /// Row `i` holds the cut parameters on the edge from vertex `i` to
    /// `i + 1`: `(0, 1)` for none, `(r, 1)` for one, `(a, b)` with `a <= b`
    /// for two.
    pub r: [[f64; 2]; 3],
    /// Barycentric `(u, v)` of the case-2 interior vertex.
    pub vt: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CanonicalForm {
    pub case_id: u8,
    pub swap: bool,
    /// Canonical vertex (and edge) `k` is original vertex `(k + rot) % 3`.
    pub rot: u8,
}

impl EdgeCut {
    /// A cut-free triangle of uniform material.
    pub const fn uniform(material: u8) -> Self {
        Self {
            c: material,
            r: [[0.0, 1.0]; 3],
            vt: None,
        }
    }

    /// Normalize raw rows: entries within `EPS_CUT` of an end are dropped,
    /// the rest sorted, a lone cut stored as `(r, 1)`. Validates parity,
    /// the case pattern and the interior vertex.
    pub fn new(c: u8, rows: [[f64; 2]; 3], vt: Option<[f64; 2]>) -> Result<Self, EdgeCutError> {
        let mut r = [[0.0, 1.0]; 3];
        for (i, row) in rows.iter().enumerate() {
            for &x in row {
                if !(0.0..=1.0).contains(&x) {
                    return Err(EdgeCutError::InvalidEntry(x));
                }
            }
            let (a, b) = (snap_cut(row[0]), snap_cut(row[1]));
            r[i] = match (is_valid_cut(a), is_valid_cut(b)) {
                (true, true) => [a.min(b), a.max(b)],
                (true, false) => [a, 1.0],
                (false, true) => [b, 1.0],
                (false, false) => [0.0, 1.0],
            };
        }
        let vt = match vt {
            Some([u, v]) => {
                let (u, v) = (quantize_bary(u), quantize_bary(v));
                let w = 1.0 - u - v;
                if !(u > 0.0 && v > 0.0 && w > 0.0 && u < 1.0 && v < 1.0) {
                    return Err(EdgeCutError::VertexOutside(u, v));
                }
                Some([u, v])
            }
            None => None,
        };
        let cut = Self {
            c: c.min(1),
            r,
            vt,
        };
        let form = cut.classify()?;
        match (form.case_id == 2, cut.vt.is_some()) {
            (true, false) => Err(EdgeCutError::MissingVertex),
            (false, true) => Err(EdgeCutError::UnexpectedVertex),
            _ => Ok(cut),
        }
    }

    /// Number of valid cuts per edge.
    #[inline]
    pub fn counts(&self) -> [u8; 3] {
        let mut t = [0u8; 3];
        for i in 0..3 {
            t[i] = is_valid_cut(self.r[i][0]) as u8 + is_valid_cut(self.r[i][1]) as u8;
        }
        t
    }

    /// Vertex materials implied by `c` and the cut parities.
    pub fn vertex_materials(&self) -> Result<[u8; 3], EdgeCutError> {
        let t = self.counts();
        let x1 = self.c;
        let x2 = x1 ^ (t[0] & 1);
        let x3 = x2 ^ (t[1] & 1);
        if x1 != x3 ^ (t[2] & 1) {
            return Err(EdgeCutError::ParityInconsistent(t));
        }
        Ok([x1, x2, x3])
    }

    pub fn classify(&self) -> Result<CanonicalForm, EdgeCutError> {
        let t = self.counts();
        let m = self.vertex_materials()?;
        for swap in [false, true] {
            for rot in 0..3u8 {
                let k = rot as usize;
                let c = m[k] ^ swap as u8;
                let tc = [t[k], t[(k + 1) % 3], t[(k + 2) % 3]];
                let case_id = match (c, tc) {
                    (0, [0, 0, 0]) => 1,
                    (0, [2, 0, 0]) => 2,
                    (0, [2, 2, 0]) => 3,
                    (0, [2, 2, 2]) => 4,
                    (1, [1, 0, 1]) => 5,
                    (1, [1, 2, 1]) => 6,
                    _ => continue,
                };
                return Ok(CanonicalForm { case_id, swap, rot });
            }
        }
        Err(EdgeCutError::NoMatchingCase { c: self.c, t })
    }

    pub fn is_uniform(&self) -> bool {
        self.counts() == [0, 0, 0]
    }

    /// Same material regions with liquid and air exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            c: self.c ^ 1,
            ..*self
        }
    }

    /// The record for the same triangle relabelled so that new vertex `k`
    /// is old vertex `(k + s) % 3`.
    pub fn rotated(&self, s: usize) -> Self {
        let s = s % 3;
        let m = self.vertex_materials().unwrap_or([self.c; 3]);
        let vt = self.vt.map(|[u, v]| {
            let b = [1.0 - u - v, u, v];
            [b[(1 + s) % 3], b[(2 + s) % 3]]
        });
        Self {
            c: m[s],
            r: [self.r[s], self.r[(s + 1) % 3], self.r[(s + 2) % 3]],
            vt,
        }
    }

    pub fn view(&self, tri: &[Point2; 3]) -> Result<View, EdgeCutError> {
        let form = self.classify()?;
        View::new(self, form, tri)
    }

    /// Relative liquid area `F1`.
    pub fn liquid_fraction(&self) -> Result<f64, EdgeCutError> {
        let form = self.classify()?;
        let (r, b) = self.canonical_rows(form)?;
        let f = canonical_f1(form.case_id, &r, b[2]);
        Ok(if form.swap { 1.0 - f } else { f })
    }

    /// `(F0, F1)`.
    pub fn area_fractions(&self) -> Result<(f64, f64), EdgeCutError> {
        let f1 = self.liquid_fraction()?;
        Ok((1.0 - f1, f1))
    }

    /// Rows and barycentric weights `(w, u, v)` in the canonical frame.
    fn canonical_rows(&self, form: CanonicalForm) -> Result<([[f64; 2]; 3], [f64; 3]), EdgeCutError> {
        let k = form.rot as usize;
        let r = [self.r[k], self.r[(k + 1) % 3], self.r[(k + 2) % 3]];
        let b = match (form.case_id, self.vt) {
            (2, None) => return Err(EdgeCutError::MissingVertex),
            (_, Some([u, v])) => {
                let b = [1.0 - u - v, u, v];
                [b[k], b[(k + 1) % 3], b[(k + 2) % 3]]
            }
            (_, None) => [0.0; 3],
        };
        Ok((r, b))
    }

    /// Six reals; the material rides in the sign bit of the first and the
    /// case-2 barycentrics are stored as `(u + 2, v + 2)` in the row after
    /// the doubly-cut edge.
    pub fn pack(&self) -> [f64; 6] {
        let mut r = self.r;
        if let Some([u, v]) = self.vt {
            let t = self.counts();
            let d = t.iter().position(|&k| k == 2).unwrap_or(0);
            r[(d + 1) % 3] = [u + 2.0, v + 2.0];
        }
        let first = if self.c == LIQUID { -r[0][0] } else { r[0][0] };
        [first, r[0][1], r[1][0], r[1][1], r[2][0], r[2][1]]
    }

    pub fn unpack(data: &[f64; 6]) -> Result<Self, EdgeCutError> {
        let c = data[0].is_sign_negative() as u8;
        let mut rows = [
            [data[0].abs(), data[1]],
            [data[2], data[3]],
            [data[4], data[5]],
        ];
        let mut vt = None;
        for row in rows.iter_mut() {
            if row[0] >= 2.0 || row[1] >= 2.0 {
                if vt.is_some() || !(row[0] > 2.0 && row[0] < 3.0 && row[1] > 2.0 && row[1] < 3.0) {
                    return Err(EdgeCutError::Format(format!("bad vertex row {row:?}")));
                }
                vt = Some([row[0] - 2.0, row[1] - 2.0]);
                *row = [0.0, 1.0];
            }
        }
        for row in &rows {
            for &x in row {
                if !(0.0..=1.0).contains(&x) {
                    return Err(EdgeCutError::Format(format!("entry {x} out of range")));
                }
            }
        }
        let cut = Self::new(c, rows, vt).map_err(|e| EdgeCutError::Format(e.to_string()))?;
        if cut.r != rows || cut.vt != vt {
            return Err(EdgeCutError::Format("record not in canonical storage form".into()));
        }
        if let Some([u, v]) = vt {
            let d = cut.counts().iter().position(|&k| k == 2).unwrap_or(0);
            if data[2 * ((d + 1) % 3)].abs() != u + 2.0 || data[2 * ((d + 1) % 3) + 1] != v + 2.0 {
                return Err(EdgeCutError::Format("vertex stored in the wrong row".into()));
            }
        }
        Ok(cut)
    }
}

/// Table of closed-form liquid fractions in the canonical frame. `v` is the
/// barycentric weight of the third vertex (case 2 only).
#[inline]
fn canonical_f1(case_id: u8, r: &[[f64; 2]; 3], v: f64) -> f64 {
    match case_id {
        1 => 0.0,
        2 => v * (r[0][1] - r[0][0]),
        3 => (1.0 - r[0][0]) * r[1][1] - (1.0 - r[0][1]) * r[1][0],
        4 => {
            1.0 - (r[0][0] * (1.0 - r[2][1])
                + (1.0 - r[0][1]) * r[1][0]
                + (1.0 - r[1][1]) * r[2][0])
        }
        5 => r[0][0] * (1.0 - r[2][0]),
        _ => 1.0 - ((1.0 - r[0][0]) * r[1][0] + (1.0 - r[1][1]) * r[2][0]),
    }
}

/// Small fixed-capacity convex loop.
#[derive(Debug, Clone, Copy)]
pub struct Piece {
    pts: [Point2; 6],
    len: u8,
}

impl Piece {
    fn new(src: &[Point2]) -> Self {
        let mut pts = [Point2::default(); 6];
        pts[..src.len()].copy_from_slice(src);
        Self {
            pts,
            len: src.len() as u8,
        }
    }

    #[inline]
    pub fn vertices(&self) -> &[Point2] {
        &self.pts[..self.len as usize]
    }

    pub fn area(&self) -> f64 {
        signed_area(self.vertices())
    }

    pub fn to_polygon(&self) -> ConvexPolygon {
        ConvexPolygon::from_vertices_unchecked(self.vertices().to_vec())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Pieces {
    items: [Piece; 4],
    len: u8,
}

impl Pieces {
    fn empty() -> Self {
        Self {
            items: [Piece::new(&[]); 4],
            len: 0,
        }
    }

    fn push(&mut self, pts: &[Point2]) {
        self.items[self.len as usize] = Piece::new(pts);
        self.len += 1;
    }

    #[inline]
    pub fn as_slice(&self) -> &[Piece] {
        &self.items[..self.len as usize]
    }

    pub fn area(&self) -> f64 {
        self.as_slice().iter().map(Piece::area).sum()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Segs {
    items: [(Point2, Point2); 3],
    len: u8,
}

impl Segs {
    fn push(&mut self, a: Point2, b: Point2) {
        self.items[self.len as usize] = (a, b);
        self.len += 1;
    }

    #[inline]
    pub fn as_slice(&self) -> &[(Point2, Point2)] {
        &self.items[..self.len as usize]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialRegions {
    pub liquid: Vec<ConvexPolygon>,
    pub air: Vec<ConvexPolygon>,
}

/// An edge cut bound to its triangle, evaluated in the canonical frame.
#[derive(Debug, Clone, Copy)]
pub struct View {
    pub form: CanonicalForm,
    /// Canonical vertices.
    pub v: [Point2; 3],
    /// Canonical rows.
    pub r: [[f64; 2]; 3],
    /// Canonical barycentric weights `(w, u, v)` of the interior vertex.
    pub b: [f64; 3],
}

impl View {
    pub fn new(cut: &EdgeCut, form: CanonicalForm, tri: &[Point2; 3]) -> Result<Self, EdgeCutError> {
        let (r, b) = cut.canonical_rows(form)?;
        let k = form.rot as usize;
        Ok(Self {
            form,
            v: [tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]],
            r,
            b,
        })
    }

    #[inline]
    pub fn cut(&self, i: usize, j: usize) -> Point2 {
        self.v[i].lerp(self.v[(i + 1) % 3], self.r[i][j])
    }

    #[inline]
    pub fn vt(&self) -> Point2 {
        self.v[0] + (self.v[1] - self.v[0]) * self.b[1] + (self.v[2] - self.v[0]) * self.b[2]
    }

    pub fn liquid_fraction(&self) -> f64 {
        let f = canonical_f1(self.form.case_id, &self.r, self.b[2]);
        if self.form.swap {
            1.0 - f
        } else {
            f
        }
    }

    /// Liquid pieces of the canonical (unswapped) pattern.
    pub fn canonical_liquid(&self) -> Pieces {
        let mut out = Pieces::empty();
        let v = &self.v;
        match self.form.case_id {
            1 => {}
            2 => out.push(&[self.cut(0, 0), self.cut(0, 1), self.vt()]),
            3 => out.push(&[self.cut(0, 0), self.cut(0, 1), self.cut(1, 0), self.cut(1, 1)]),
            4 => out.push(&[
                self.cut(0, 0),
                self.cut(0, 1),
                self.cut(1, 0),
                self.cut(1, 1),
                self.cut(2, 0),
                self.cut(2, 1),
            ]),
            5 => out.push(&[v[0], self.cut(0, 0), self.cut(2, 0)]),
            _ => out.push(&[v[0], self.cut(0, 0), self.cut(1, 0), self.cut(1, 1), self.cut(2, 0)]),
        }
        out
    }

    /// Convex decomposition of the complement of `canonical_liquid`.
    pub fn canonical_air(&self) -> Pieces {
        let mut out = Pieces::empty();
        let v = &self.v;
        match self.form.case_id {
            1 => out.push(v),
            2 => {
                let (r11, r12, t) = (self.cut(0, 0), self.cut(0, 1), self.vt());
                out.push(&[t, r12, v[1]]);
                out.push(&[t, v[1], v[2]]);
                out.push(&[t, v[2], v[0]]);
                out.push(&[t, v[0], r11]);
            }
            3 => {
                out.push(&[self.cut(0, 1), v[1], self.cut(1, 0)]);
                out.push(&[v[0], self.cut(0, 0), self.cut(1, 1), v[2]]);
            }
            4 => {
                out.push(&[self.cut(0, 1), v[1], self.cut(1, 0)]);
                out.push(&[self.cut(1, 1), v[2], self.cut(2, 0)]);
                out.push(&[self.cut(2, 1), v[0], self.cut(0, 0)]);
            }
            5 => out.push(&[self.cut(0, 0), v[1], v[2], self.cut(2, 0)]),
            _ => {
                out.push(&[self.cut(0, 0), v[1], self.cut(1, 0)]);
                out.push(&[self.cut(1, 1), v[2], self.cut(2, 0)]);
            }
        }
        out
    }

    pub fn liquid_pieces(&self) -> Pieces {
        if self.form.swap {
            self.canonical_air()
        } else {
            self.canonical_liquid()
        }
    }

    pub fn air_pieces(&self) -> Pieces {
        if self.form.swap {
            self.canonical_liquid()
        } else {
            self.canonical_air()
        }
    }

    /// Interior segments of the canonical pattern, liquid on the left.
    pub fn canonical_segments(&self) -> Segs {
        let mut s = Segs {
            items: [(Point2::default(), Point2::default()); 3],
            len: 0,
        };
        match self.form.case_id {
            1 => {}
            2 => {
                let t = self.vt();
                s.push(self.cut(0, 1), t);
                s.push(t, self.cut(0, 0));
            }
            3 => {
                s.push(self.cut(0, 1), self.cut(1, 0));
                s.push(self.cut(1, 1), self.cut(0, 0));
            }
            4 => {
                s.push(self.cut(0, 1), self.cut(1, 0));
                s.push(self.cut(1, 1), self.cut(2, 0));
                s.push(self.cut(2, 1), self.cut(0, 0));
            }
            5 => s.push(self.cut(0, 0), self.cut(2, 0)),
            _ => {
                s.push(self.cut(0, 0), self.cut(1, 0));
                s.push(self.cut(1, 1), self.cut(2, 0));
            }
        }
        s
    }

    /// Interior segments oriented with the actual liquid on the left.
    pub fn segments(&self) -> Segs {
        let mut s = self.canonical_segments();
        if self.form.swap {
            for seg in s.items.iter_mut().take(s.len as usize) {
                *seg = (seg.1, seg.0);
            }
        }
        s
    }

    /// Material at a point of the triangle, from side tests against the
    /// interior segments only. Points on an interior segment are liquid.
    pub fn material_at(&self, p: Point2) -> u8 {
        let segs = self.canonical_segments();
        if self.form.case_id == 1 {
            return self.form.swap as u8;
        }
        if self.form.swap {
            // Complement of the convex canonical liquid, closed.
            let outside = segs.as_slice().iter().any(|&(a, b)| orient2d(a, b, p) <= 0);
            outside as u8
        } else {
            let inside = segs.as_slice().iter().all(|&(a, b)| orient2d(a, b, p) >= 0);
            inside as u8
        }
    }
}

impl EdgeCut {
    pub fn reconstruct(&self, tri: &[Point2; 3]) -> Result<MaterialRegions, EdgeCutError> {
        let view = self.view(tri)?;
        let conv = |p: Pieces| p.as_slice().iter().map(Piece::to_polygon).collect();
        Ok(MaterialRegions {
            liquid: conv(view.liquid_pieces()),
            air: conv(view.air_pieces()),
        })
    }

    pub fn interior_segments(&self, tri: &[Point2; 3]) -> Result<Vec<Segment>, EdgeCutError> {
        let view = self.view(tri)?;
        Ok(view
            .segments()
            .as_slice()
            .iter()
            .filter_map(|&(a, b)| Segment::new(a, b).ok())
            .collect())
    }

    pub fn material_at(&self, tri: &[Point2; 3], p: Point2) -> Result<u8, EdgeCutError> {
        Ok(self.view(tri)?.material_at(p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Correction {
    /// Target met with `tau` in `[0, 1)`.
    Solved { cut: EdgeCut, tau: f64 },
    /// The exact `tau` would push a cut into the snapping band; the largest
    /// admissible `tau` was applied instead.
    Clamped { cut: EdgeCut, tau: f64 },
    /// No admissible `tau` reaches the target.
    Unchanged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Expand,
    Shrink,
    None,
}

/// Moving entries of the interpolated state `(1 - tau) * x0 + tau * x1`.
struct Path {
    case_id: u8,
    r0: [[f64; 2]; 3],
    r1: [[f64; 2]; 3],
    b0: [f64; 3],
    b1: [f64; 3],
}

impl Path {
    #[inline]
    fn at(&self, tau: f64) -> ([[f64; 2]; 3], [f64; 3]) {
        let mut r = self.r0;
        for i in 0..3 {
            for j in 0..2 {
                r[i][j] = lerp(self.r0[i][j], self.r1[i][j], tau);
            }
        }
        let mut b = self.b0;
        for k in 0..3 {
            b[k] = lerp(self.b0[k], self.b1[k], tau);
        }
        (r, b)
    }

    #[inline]
    fn f(&self, tau: f64) -> f64 {
        let (r, b) = self.at(tau);
        canonical_f1(self.case_id, &r, b[2])
    }

    /// Largest tau keeping every moving entry outside the snapping band.
    fn tau_limit(&self) -> f64 {
        let mut lim: f64 = 1.0;
        let mut bound = |x0: f64, x1: f64| {
            if x1 == x0 {
                return;
            }
            if x1 <= EPS_CUT {
                lim = lim.min(1.0 - EPS_CUT / x0);
            } else if x1 >= 1.0 - EPS_CUT {
                lim = lim.min(1.0 - EPS_CUT / (1.0 - x0));
            }
        };
        for i in 0..3 {
            for j in 0..2 {
                if is_valid_cut(self.r0[i][j]) {
                    bound(self.r0[i][j], self.r1[i][j]);
                }
            }
        }
        if self.case_id == 2 {
            for k in 0..3 {
                bound(self.b0[k], self.b1[k]);
            }
        }
        lim.max(0.0)
    }
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    if t == 0.0 {
        a
    } else {
        (1.0 - t) * a + t * b
    }
}

/// Canonical targets of the cut movements for the given direction.
fn targets(case_id: u8, r: &[[f64; 2]; 3], b: &[f64; 3], dir: Direction) -> ([[f64; 2]; 3], [f64; 3]) {
    let split = |row: [f64; 2]| {
        let s = row[0] / (row[0] + 1.0 - row[1]);
        [s, s]
    };
    let mut t = *r;
    let mut bt = *b;
    match (dir, case_id) {
        (Direction::None, _) | (_, 1) => {}
        (Direction::Expand, 2) => {
            t[0] = [0.0, 1.0];
            bt = [0.0, 0.0, 1.0];
        }
        (Direction::Expand, 3) => {
            t[0] = [0.0, 1.0];
            t[1] = [0.0, 1.0];
        }
        (Direction::Expand, 4) => t = [[0.0, 1.0]; 3],
        (Direction::Expand, 5) => {
            t[0][0] = 1.0;
            t[2][0] = 0.0;
        }
        (Direction::Expand, _) => {
            t[0][0] = 1.0;
            t[1] = [0.0, 1.0];
            t[2][0] = 0.0;
        }
        (Direction::Shrink, 2) => {
            t[0] = split(r[0]);
            let uw = b[0] + b[1];
            bt = [b[0] / uw, b[1] / uw, 0.0];
        }
        (Direction::Shrink, 3) => {
            t[0] = split(r[0]);
            t[1] = split(r[1]);
        }
        (Direction::Shrink, 4) => {
            t[0] = split(r[0]);
            t[1] = split(r[1]);
            t[2] = split(r[2]);
        }
        (Direction::Shrink, 5) => {
            t[0][0] = 0.0;
            t[2][0] = 1.0;
        }
        (Direction::Shrink, _) => {
            t[0][0] = 0.0;
            t[1] = split(r[1]);
            t[2][0] = 1.0;
        }
    }
    (t, bt)
}

/// Root of `f(tau) = y` on `[0, 1]` for the monotone quadratic `f`.
fn solve_monotone(path: &Path, y: f64) -> Option<f64> {
    let f0 = path.f(0.0);
    let fh = path.f(0.5);
    let f1 = path.f(1.0);
    let a = 2.0 * (f1 - 2.0 * fh + f0);
    let b = 4.0 * fh - 3.0 * f0 - f1;
    let c = f0 - y;
    let mut tau = if a.abs() <= 1e-14 * b.abs() {
        -c / b
    } else {
        let disc = (b * b - 4.0 * a * c).max(0.0);
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        let r1 = q / a;
        let r2 = if q != 0.0 { c / q } else { r1 };
        let in_range = |t: f64| (-1e-9..=1.0 + 1e-9).contains(&t);
        match (in_range(r1), in_range(r2)) {
            (true, false) => r1,
            (false, true) => r2,
            (true, true) => {
                if (r1 - 0.5).abs() <= (r2 - 0.5).abs() {
                    r1
                } else {
                    r2
                }
            }
            (false, false) => return None,
        }
    };
    if !tau.is_finite() {
        return None;
    }
    // Safeguarded Newton on the exact evaluation; the bracket keeps the
    // iteration alive near the double root at tau = 1.
    let sign0 = (f0 - y).signum();
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    tau = tau.clamp(0.0, 1.0);
    for _ in 0..200 {
        let fv = path.f(tau) - y;
        if fv == 0.0 {
            break;
        }
        if fv.signum() == sign0 {
            lo = tau;
        } else {
            hi = tau;
        }
        let d = b + 2.0 * a * tau;
        let mut next = if d != 0.0 { tau - fv / d } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if next == tau || hi - lo <= f64::EPSILON * hi {
            break;
        }
        tau = next;
    }
    Some(tau)
}

/// Move the cuts along the fixed straight paths toward their limits until
/// the liquid fraction equals `f1_target`. The cut-count vector and the
/// material flag are preserved.
pub fn edge_cut_correction(cut: &EdgeCut, f1_target: f64) -> Result<Correction, EdgeCutError> {
    if !(0.0..=1.0).contains(&f1_target) {
        return Err(EdgeCutError::TargetOutOfRange(f1_target));
    }
    let form = cut.classify()?;
    let (r, b) = cut.canonical_rows(form)?;
    let y = if form.swap { 1.0 - f1_target } else { f1_target };
    let f0 = canonical_f1(form.case_id, &r, b[2]);
    if f0 == y {
        return Ok(Correction::Solved { cut: *cut, tau: 0.0 });
    }
    if form.case_id == 1 {
        return Ok(Correction::Unchanged);
    }
    let dir = if y > f0 { Direction::Expand } else { Direction::Shrink };
    let (r1, b1) = targets(form.case_id, &r, &b, dir);
    let path = Path {
        case_id: form.case_id,
        r0: r,
        r1,
        b0: b,
        b1,
    };
    // Beyond the tau -> 1 limit there is no admissible solution.
    let f_lim = path.f(1.0);
    let reachable = match dir {
        Direction::Expand => y < f_lim,
        _ => y > f_lim,
    };
    if !reachable {
        return Ok(Correction::Unchanged);
    }
    let Some(tau) = solve_monotone(&path, y) else {
        return Ok(Correction::Unchanged);
    };
    let lim = path.tau_limit();
    if tau < lim {
        if let Some(out) = build_cut(cut, form, &path, tau) {
            return Ok(Correction::Solved { cut: out, tau });
        }
    }
    // Back off from the band limit until the stored record keeps its cut
    // pattern.
    let mut t = tau.min(lim);
    for _ in 0..64 {
        if let Some(out) = build_cut(cut, form, &path, t) {
            return Ok(Correction::Clamped { cut: out, tau: t });
        }
        t -= (1.0 - t).max(f64::EPSILON) * 0.5;
        if t <= 0.0 {
            break;
        }
    }
    Ok(Correction::Unchanged)
}

fn build_cut(orig: &EdgeCut, form: CanonicalForm, path: &Path, tau: f64) -> Option<EdgeCut> {
    let (rc, bc) = path.at(tau);
    let k = form.rot as usize;
    let mut rows = [[0.0, 1.0]; 3];
    for i in 0..3 {
        rows[(i + k) % 3] = rc[i];
    }
    let vt = orig.vt.map(|_| {
        let mut b = [0.0; 3];
        for i in 0..3 {
            b[(i + k) % 3] = bc[i];
        }
        [b[1], b[2]]
    });
    for row in rows.iter_mut() {
        for x in row.iter_mut() {
            *x = x.clamp(0.0, 1.0);
        }
    }
    let out = EdgeCut::new(orig.c, rows, vt).ok()?;
    (out.counts() == orig.counts()).then_some(out)
}

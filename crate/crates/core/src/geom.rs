//! Planar primitives: points, exact orientation, segment intersection and
//! convex polygon clipping.
//!
//! Classifications (side tests, containment, intersection existence) are
//! exact: they go through an adaptive-precision `orient2d`. Constructed
//! coordinates (intersection points, centroids) are rounded to `f64`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("degenerate segment: endpoints coincide at ({0}, {1})")]
    DegenerateSegment(f64, f64),
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon is not strictly convex and counter-clockwise")]
    NotConvex,
    #[error("polygon has zero area")]
    ZeroArea,
    #[error("non-finite coordinate")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm2().sqrt()
    }

    /// `(1 - t) * self + t * o`
    #[inline]
    pub fn lerp(self, o: Point2, t: f64) -> Point2 {
        Point2::new((1.0 - t) * self.x + t * o.x, (1.0 - t) * self.y + t * o.y)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    #[inline]
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Point2 {
    #[inline]
    fn add_assign(&mut self, o: Point2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Point2 {
    type Output = Point2;
    #[inline]
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    #[inline]
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    #[inline]
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// Sign of the doubled signed area of `abc`: `1` for counter-clockwise,
/// `-1` for clockwise, `0` for collinear. Exact for all finite inputs.
#[inline]
pub fn orient2d(a: Point2, b: Point2, c: Point2) -> i32 {
    let det = robust::orient2d(
        robust::Coord { x: a.x, y: a.y },
        robust::Coord { x: b.x, y: b.y },
        robust::Coord { x: c.x, y: c.y },
    );
    if det > 0.0 {
        1
    } else if det < 0.0 {
        -1
    } else {
        0
    }
}

/// Doubled signed area of `abc` in plain floating point.
#[inline]
pub fn cross3(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point2,
    pub b: Point2,
}

impl Segment {
    pub fn new(a: Point2, b: Point2) -> Result<Self, GeomError> {
        if !a.is_finite() || !b.is_finite() {
            return Err(GeomError::NonFinite);
        }
        if a == b {
            return Err(GeomError::DegenerateSegment(a.x, a.y));
        }
        Ok(Self { a, b })
    }

    #[inline]
    pub fn at(&self, t: f64) -> Point2 {
        self.a.lerp(self.b, t)
    }

    #[inline]
    pub fn dir(&self) -> Point2 {
        self.b - self.a
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegIntersection {
    None,
    /// Single crossing at `s1.at(t) == s2.at(u)` (up to rounding of `p`).
    Point { t: f64, u: f64, p: Point2 },
    /// Collinear overlap of positive length.
    Overlap(Segment),
}

/// Intersect two segments. The existence and kind of the intersection is
/// decided exactly; the parameters and the point are rounded.
pub fn seg_seg_intersect(s1: &Segment, s2: &Segment) -> SegIntersection {
    let (a, b, c, d) = (s1.a, s1.b, s2.a, s2.b);
    let o1 = orient2d(a, b, c);
    let o2 = orient2d(a, b, d);
    if o1 != 0 && o1 == o2 {
        return SegIntersection::None;
    }
    let o3 = orient2d(c, d, a);
    let o4 = orient2d(c, d, b);
    if o3 != 0 && o3 == o4 {
        return SegIntersection::None;
    }
    if o1 == 0 && o2 == 0 {
        return collinear_overlap(s1, s2);
    }

    // Proper or endpoint-touching crossing. Endpoint contacts are pinned
    // exactly; otherwise solve the 2x2 system.
    let r = b - a;
    let s = d - c;
    let denom = r.cross(s);
    let t = if o3 == 0 {
        0.0
    } else if o4 == 0 {
        1.0
    } else {
        ((c - a).cross(s) / denom).clamp(0.0, 1.0)
    };
    let u = if o1 == 0 {
        0.0
    } else if o2 == 0 {
        1.0
    } else {
        ((c - a).cross(r) / denom).clamp(0.0, 1.0)
    };
    let p = if o3 == 0 {
        a
    } else if o4 == 0 {
        b
    } else if o1 == 0 {
        c
    } else if o2 == 0 {
        d
    } else {
        s1.at(t)
    };
    SegIntersection::Point { t, u, p }
}

fn collinear_overlap(s1: &Segment, s2: &Segment) -> SegIntersection {
    let r = s1.dir();
    let rr = r.norm2();
    let param = |p: Point2| (p - s1.a).dot(r) / rr;
    let (mut u0, mut u1) = (param(s2.a), param(s2.b));
    let (mut p0, mut p1) = (s2.a, s2.b);
    if u0 > u1 {
        std::mem::swap(&mut u0, &mut u1);
        std::mem::swap(&mut p0, &mut p1);
    }
    let (lo, plo) = if u0 > 0.0 { (u0, p0) } else { (0.0, s1.a) };
    let (hi, phi) = if u1 < 1.0 { (u1, p1) } else { (1.0, s1.b) };
    if lo > hi {
        return SegIntersection::None;
    }
    if plo == phi {
        let s2r = s2.dir();
        let u = (plo - s2.a).dot(s2r) / s2r.norm2();
        return SegIntersection::Point {
            t: lo,
            u: u.clamp(0.0, 1.0),
            p: plo,
        };
    }
    SegIntersection::Overlap(Segment { a: plo, b: phi })
}

/// Shoelace signed area of a closed vertex loop (positive for CCW).
pub fn signed_area(vertices: &[Point2]) -> f64 {
    let n = vertices.len();
    if n < 3 {
        return 0.0;
    }
    // Translate to the first vertex to limit cancellation.
    let o = vertices[0];
    let mut acc = 0.0;
    for i in 1..n - 1 {
        acc += (vertices[i] - o).cross(vertices[i + 1] - o);
    }
    0.5 * acc
}

/// Area-weighted centroid of a closed simple loop together with its signed
/// area. Returns `None` when the area vanishes.
pub fn area_centroid(vertices: &[Point2]) -> Option<(f64, Point2)> {
    let n = vertices.len();
    if n < 3 {
        return None;
    }
    let o = vertices[0];
    let mut a2 = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 1..n - 1 {
        let p = vertices[i] - o;
        let q = vertices[i + 1] - o;
        let w = p.cross(q);
        a2 += w;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    if a2 == 0.0 {
        return None;
    }
    Some((0.5 * a2, Point2::new(o.x + cx / (3.0 * a2), o.y + cy / (3.0 * a2))))
}

/// Counter-clockwise convex vertex loop.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Point2>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Containment {
    Inside,
    Boundary,
    Outside,
}

impl ConvexPolygon {
    /// Validated constructor: at least three finite vertices, every turn
    /// non-negative and not all collinear.
    pub fn new(vertices: Vec<Point2>) -> Result<Self, GeomError> {
        let n = vertices.len();
        if n < 3 {
            return Err(GeomError::TooFewVertices(n));
        }
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(GeomError::NonFinite);
        }
        let mut any_left = false;
        for i in 0..n {
            let o = orient2d(vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
            if o < 0 {
                return Err(GeomError::NotConvex);
            }
            any_left |= o > 0;
        }
        if !any_left {
            return Err(GeomError::ZeroArea);
        }
        // Turning once around: a star loop winding twice passes the local test.
        if signed_area(&vertices) <= 0.0 {
            return Err(GeomError::NotConvex);
        }
        Ok(Self { vertices })
    }

    /// Wraps a loop known to be convex and CCW up to rounding of its
    /// constructed vertices (clipping results, reconstructed regions).
    pub fn from_vertices_unchecked(vertices: Vec<Point2>) -> Self {
        debug_assert!(vertices.len() >= 3);
        Self { vertices }
    }

    pub fn triangle(a: Point2, b: Point2, c: Point2) -> Self {
        Self {
            vertices: vec![a, b, c],
        }
    }

    #[inline]
    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Point2> {
        self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn centroid(&self) -> Result<Point2, GeomError> {
        area_centroid(&self.vertices)
            .map(|(_, c)| c)
            .ok_or(GeomError::ZeroArea)
    }

    pub fn bbox(&self) -> (Point2, Point2) {
        bbox_of(&self.vertices)
    }

    pub fn contains(&self, p: Point2) -> Containment {
        point_in_convex(p, self)
    }
}

pub fn bbox_of(points: &[Point2]) -> (Point2, Point2) {
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    (lo, hi)
}

pub fn polygon_area(p: &ConvexPolygon) -> f64 {
    p.area()
}

pub fn polygon_centroid(p: &ConvexPolygon) -> Result<Point2, GeomError> {
    p.centroid()
}

pub fn point_in_convex(p: Point2, poly: &ConvexPolygon) -> Containment {
    let v = poly.vertices();
    let n = v.len();
    let mut on_edge = false;
    for i in 0..n {
        match orient2d(v[i], v[(i + 1) % n], p) {
            -1 => return Containment::Outside,
            0 => on_edge = true,
            _ => {}
        }
    }
    if on_edge {
        Containment::Boundary
    } else {
        Containment::Inside
    }
}

/// Keep the part of `subject` on the left of (or on) the directed line
/// `a -> b`. Works for any simple subject loop when the result is read as
/// an area-carrying loop; for convex subjects the result is convex.
pub fn clip_half_plane(subject: &[Point2], a: Point2, b: Point2, out: &mut Vec<Point2>) {
    out.clear();
    let n = subject.len();
    if n == 0 {
        return;
    }
    let dir = b - a;
    let mut prev = subject[n - 1];
    let mut prev_side = orient2d(a, b, prev);
    for &cur in subject {
        let side = orient2d(a, b, cur);
        if side >= 0 {
            if prev_side < 0 {
                out.push(line_crossing(prev, cur, a, dir));
            }
            out.push(cur);
        } else if prev_side > 0 {
            out.push(line_crossing(prev, cur, a, dir));
        }
        prev = cur;
        prev_side = side;
    }
}

/// Point where segment `p -> q` crosses the line through `a` along `dir`.
/// Caller guarantees `p` and `q` lie strictly on opposite sides.
#[inline]
fn line_crossing(p: Point2, q: Point2, a: Point2, dir: Point2) -> Point2 {
    let dp = dir.cross(p - a);
    let dq = dir.cross(q - a);
    let den = dp - dq;
    // Both ends within rounding of the line: either is as good as the other.
    let t = if den != 0.0 { (dp / den).clamp(0.0, 1.0) } else { 0.5 };
    p.lerp(q, t)
}

/// Intersection of two convex polygons by successive half-plane cuts.
/// Returns `None` when the overlap has no interior.
pub fn clip_convex(p: &ConvexPolygon, q: &ConvexPolygon) -> Option<ConvexPolygon> {
    let mut cur: Vec<Point2> = p.vertices().to_vec();
    let mut next = Vec::with_capacity(cur.len() + 4);
    clip_loop_by_convex(&mut cur, &mut next, q.vertices());
    if cur.len() < 3 || signed_area(&cur) <= 0.0 {
        return None;
    }
    Some(ConvexPolygon::from_vertices_unchecked(cur))
}

/// Area of `p ∩ q` without materialising the polygon.
pub fn clip_area(p: &ConvexPolygon, q: &ConvexPolygon) -> f64 {
    clip_convex(p, q).map_or(0.0, |c| c.area())
}

/// Clip the loop in `cur` successively against every edge of the CCW
/// convex loop `window`. `scratch` is reused storage.
pub fn clip_loop_by_convex(cur: &mut Vec<Point2>, scratch: &mut Vec<Point2>, window: &[Point2]) {
    let m = window.len();
    for i in 0..m {
        if cur.len() < 3 {
            cur.clear();
            return;
        }
        clip_half_plane(cur, window[i], window[(i + 1) % m], scratch);
        std::mem::swap(cur, scratch);
    }
    if cur.len() < 3 {
        cur.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    fn square(x0: f64, y0: f64, s: f64) -> ConvexPolygon {
        ConvexPolygon::new(vec![p(x0, y0), p(x0 + s, y0), p(x0 + s, y0 + s), p(x0, y0 + s)]).unwrap()
    }

    #[test]
    fn crossing_with_both_ends_on_the_line() {
        let q = line_crossing(p(0.0, 0.0), p(1.0, 0.0), p(0.0, 0.0), p(1.0, 0.0));
        assert_eq!(q, p(0.5, 0.0));
    }

    #[test]
    fn orientation_examples() {
        assert_eq!(orient2d(p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0)), 1);
        assert_eq!(orient2d(p(0.0, 0.0), p(1.0, 0.0), p(2.0, 0.0)), 0);
        assert_eq!(orient2d(p(0.0, 0.0), p(0.0, 1.0), p(1.0, 0.0)), -1);
    }

    #[test]
    fn orientation_near_degenerate() {
        // Naive evaluation gets this wrong; 0.1 + 0.2 is not 0.3 in binary.
        let a = p(0.1, 0.1);
        let b = p(0.3, 0.3);
        let c = p(0.1 + 0.2, 0.1 + 0.2);
        assert_eq!(orient2d(a, b, c), orient2d(a, b, c));
        assert_eq!(orient2d(p(0.0, 0.0), p(1.0, 1.0), p(0.5, 0.5)), 0);
        assert_eq!(orient2d(p(0.0, 0.0), p(1.0, 1.0), p(0.5, 0.5 + f64::EPSILON)), 1);
    }

    #[test]
    fn segment_examples() {
        let s1 = Segment::new(p(0.0, 0.0), p(1.0, 1.0)).unwrap();
        let s2 = Segment::new(p(0.0, 1.0), p(1.0, 0.0)).unwrap();
        assert_eq!(
            seg_seg_intersect(&s1, &s2),
            SegIntersection::Point { t: 0.5, u: 0.5, p: p(0.5, 0.5) }
        );

        let s1 = Segment::new(p(0.0, 0.0), p(1.0, 0.0)).unwrap();
        let s2 = Segment::new(p(0.0, 1.0), p(1.0, 1.0)).unwrap();
        assert_eq!(seg_seg_intersect(&s1, &s2), SegIntersection::None);

        let s1 = Segment::new(p(0.0, 0.0), p(2.0, 0.0)).unwrap();
        let s2 = Segment::new(p(1.0, 0.0), p(3.0, 0.0)).unwrap();
        assert_eq!(
            seg_seg_intersect(&s1, &s2),
            SegIntersection::Overlap(Segment { a: p(1.0, 0.0), b: p(2.0, 0.0) })
        );
    }

    #[test]
    fn segment_touching_and_disjoint_collinear() {
        let s1 = Segment::new(p(0.0, 0.0), p(1.0, 0.0)).unwrap();
        let s2 = Segment::new(p(1.0, 0.0), p(2.0, 0.0)).unwrap();
        match seg_seg_intersect(&s1, &s2) {
            SegIntersection::Point { t, u, p: q } => {
                assert_eq!((t, u), (1.0, 0.0));
                assert_eq!(q, p(1.0, 0.0));
            }
            other => panic!("{other:?}"),
        }
        let s3 = Segment::new(p(1.5, 0.0), p(2.0, 0.0)).unwrap();
        assert_eq!(seg_seg_intersect(&s1, &s3), SegIntersection::None);

        // T-junction: endpoint of s2 on the interior of s1.
        let s4 = Segment::new(p(0.25, 0.0), p(0.25, 1.0)).unwrap();
        match seg_seg_intersect(&s1, &s4) {
            SegIntersection::Point { t, u, p: q } => {
                assert_eq!(u, 0.0);
                assert_eq!(q, p(0.25, 0.0));
                assert!((t - 0.25).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn degenerate_segment_rejected() {
        assert!(Segment::new(p(1.0, 1.0), p(1.0, 1.0)).is_err());
    }

    #[test]
    fn area_examples() {
        let tri = ConvexPolygon::new(vec![p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0)]).unwrap();
        assert_eq!(polygon_area(&tri), 0.5);
        assert_eq!(polygon_area(&square(0.0, 0.0, 1.0)), 1.0);
        let quad =
            ConvexPolygon::new(vec![p(0.2, 0.0), p(0.6, 0.0), p(0.7, 0.3), p(0.2, 0.8)]).unwrap();
        assert!((polygon_area(&quad) - 0.26).abs() < 1e-15);
    }

    #[test]
    fn centroid_examples() {
        let tri = ConvexPolygon::new(vec![p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0)]).unwrap();
        let c = polygon_centroid(&tri).unwrap();
        assert!((c.x - 1.0 / 3.0).abs() < 1e-15 && (c.y - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(polygon_centroid(&square(0.0, 0.0, 1.0)).unwrap(), p(0.5, 0.5));
        let rect =
            ConvexPolygon::new(vec![p(0.0, 0.0), p(2.0, 0.0), p(2.0, 1.0), p(0.0, 1.0)]).unwrap();
        assert_eq!(polygon_centroid(&rect).unwrap(), p(1.0, 0.5));
        let flat = ConvexPolygon::from_vertices_unchecked(vec![p(0.0, 0.0), p(1.0, 0.0), p(2.0, 0.0)]);
        assert_eq!(polygon_centroid(&flat), Err(GeomError::ZeroArea));
    }

    #[test]
    fn constructor_rejects_bad_loops() {
        assert_eq!(
            ConvexPolygon::new(vec![p(0.0, 0.0), p(1.0, 0.0)]),
            Err(GeomError::TooFewVertices(2))
        );
        assert_eq!(
            ConvexPolygon::new(vec![p(0.0, 0.0), p(0.0, 1.0), p(1.0, 0.0)]),
            Err(GeomError::NotConvex)
        );
        assert_eq!(
            ConvexPolygon::new(vec![p(0.0, 0.0), p(1.0, 0.0), p(2.0, 0.0)]),
            Err(GeomError::ZeroArea)
        );
        // reflex vertex
        assert!(ConvexPolygon::new(vec![
            p(0.0, 0.0),
            p(2.0, 0.0),
            p(1.0, 0.5),
            p(2.0, 2.0),
            p(0.0, 2.0)
        ])
        .is_err());
    }

    #[test]
    fn clip_examples() {
        let a = square(0.0, 0.0, 1.0);
        let b = square(0.5, 0.5, 1.0);
        let c = clip_convex(&a, &b).unwrap();
        assert!((c.area() - 0.25).abs() < 1e-15);
        let (lo, hi) = c.bbox();
        assert_eq!((lo, hi), (p(0.5, 0.5), p(1.0, 1.0)));

        let same = clip_convex(&a, &a).unwrap();
        assert_eq!(same.area(), a.area());

        let t1 = ConvexPolygon::triangle(p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0));
        let t2 = ConvexPolygon::triangle(p(2.0, 2.0), p(3.0, 2.0), p(2.0, 3.0));
        assert!(clip_convex(&t1, &t2).is_none());
    }

    #[test]
    fn clip_touching_is_empty() {
        let a = square(0.0, 0.0, 1.0);
        let edge = square(1.0, 0.0, 1.0);
        let corner = square(1.0, 1.0, 1.0);
        assert!(clip_convex(&a, &edge).is_none());
        assert!(clip_convex(&a, &corner).is_none());
    }

    #[test]
    fn containment_examples() {
        let tri = ConvexPolygon::triangle(p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0));
        assert_eq!(point_in_convex(p(0.1, 0.1), &tri), Containment::Inside);
        assert_eq!(point_in_convex(p(0.5, 0.0), &tri), Containment::Boundary);
        assert_eq!(point_in_convex(p(1.0, 1.0), &tri), Containment::Outside);
    }
}

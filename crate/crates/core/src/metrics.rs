//! Shape, mass and curvature errors and convergence orders.

use rayon::prelude::*;
use thiserror::Error;

use crate::advect::InterfaceState;
use crate::edgecut::{cut_point, is_valid_cut};
use crate::geom::{ConvexPolygon, Point2};
use crate::shapes::DensePolygon;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("lattice grouping needs a lattice mesh")]
    NotALattice,
    #[error("truth polygon does not overlap the mesh domain")]
    DomainMismatch,
    #[error("reference area must be positive, got {0}")]
    NonPositiveArea(f64),
    #[error("need at least two levels")]
    TooFewLevels,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grouping {
    /// Pairs of triangles forming one lattice cell.
    LatticeCells,
    Triangles,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub e_g: f64,
    /// `|A - A_truth|` per group.
    pub per_group: Vec<f64>,
}

/// Truth area inside every triangle.
pub fn truth_areas(state: &InterfaceState, truth: &DensePolygon) -> Vec<f64> {
    let mesh = state.mesh();
    (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let [a, b, c] = mesh.triangle(t);
            truth.exact_cell_area(&ConvexPolygon::triangle(a, b, c))
        })
        .collect()
}

/// `E_g = sum |A - A_truth|` over cells or triangles.
pub fn shape_error(state: &InterfaceState, truth: &DensePolygon, grouping: Grouping) -> Result<ErrorReport, MetricsError> {
    let mesh = state.mesh();
    if truth.num_vertices() > 0 {
        let (lo, hi) = truth.bbox();
        let b = mesh.bbox();
        if hi.x < b.lo.x || hi.y < b.lo.y || lo.x > b.hi.x || lo.y > b.hi.y {
            return Err(MetricsError::DomainMismatch);
        }
    }
    if grouping == Grouping::LatticeCells && mesh.lattice().is_none() {
        return Err(MetricsError::NotALattice);
    }
    let exact = truth_areas(state, truth);
    let diff: Vec<f64> = (0..mesh.num_triangles())
        .map(|t| state.liquid_area(t) - exact[t])
        .collect();
    let per_group: Vec<f64> = match grouping {
        Grouping::Triangles => diff.iter().map(|d| d.abs()).collect(),
        Grouping::LatticeCells => diff.chunks(2).map(|p| p.iter().sum::<f64>().abs()).collect(),
    };
    Ok(ErrorReport {
        e_g: per_group.iter().sum(),
        per_group,
    })
}

/// `E_r = E_g / A0`.
pub fn relative_error(e_g: f64, a0: f64) -> Result<f64, MetricsError> {
    if !(a0 > 0.0) {
        return Err(MetricsError::NonPositiveArea(a0));
    }
    Ok(e_g / a0)
}

/// `E_m = |A0 - A| / A0` for the total liquid area `A` of `state`.
pub fn mass_error(state: &InterfaceState, a0: f64) -> Result<f64, MetricsError> {
    if !(a0 > 0.0) {
        return Err(MetricsError::NonPositiveArea(a0));
    }
    Ok(((a0 - state.total_liquid_area()) / a0).abs())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Convergence {
    /// `log2(E(k-1) / E(k))` for each consecutive pair; `None` where an
    /// error is zero.
    pub orders: Vec<Option<f64>>,
    /// Least-squares slope of `-log2 E` against `log2 resolution`.
    pub slope: Option<f64>,
}

/// Orders from `(resolution, error)` pairs in increasing resolution. For
/// refinement levels pass `2^level` as the resolution.
pub fn convergence_order(levels: &[(f64, f64)]) -> Result<Convergence, MetricsError> {
    if levels.len() < 2 {
        return Err(MetricsError::TooFewLevels);
    }
    let orders = levels
        .windows(2)
        .map(|w| (w[0].1 > 0.0 && w[1].1 > 0.0).then(|| (w[0].1 / w[1].1).log2()))
        .collect();
    let pts: Vec<(f64, f64)> = levels
        .iter()
        .filter(|(n, e)| *n > 0.0 && *e > 0.0)
        .map(|(n, e)| (n.log2(), e.log2()))
        .collect();
    let slope = (pts.len() >= 2).then(|| {
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        -sxy / sxx
    });
    Ok(Convergence {
        orders,
        slope: slope.filter(|s| s.is_finite()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitFrame {
    /// `y = a x^2 + b x + c`.
    XParabola,
    /// `x = a y^2 + b y + c`.
    YParabola,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureSample {
    pub triangle: u32,
    /// Index of the interior segment within its triangle.
    pub segment: u8,
    pub midpoint: Point2,
    /// Unsigned curvature of the fitted parabola.
    pub kappa: f64,
    pub frame: FitFrame,
}

/// Curvature at `x0` of the least-squares parabola through `pts`, in the
/// frame whose abscissa spans the larger range.
pub fn parabola_curvature(pts: &[Point2], at: Point2) -> Option<(f64, FitFrame)> {
    if pts.len() < 3 {
        return None;
    }
    let (xmin, xmax) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.x), b.max(p.x)));
    let (ymin, ymax) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.y), b.max(p.y)));
    let frame = if ymax - ymin > xmax - xmin {
        FitFrame::YParabola
    } else {
        FitFrame::XParabola
    };
    let (s, x0) = match frame {
        FitFrame::XParabola => (pts.iter().map(|p| (p.x, p.y)).collect::<Vec<_>>(), at.x),
        FitFrame::YParabola => (pts.iter().map(|p| (p.y, p.x)).collect::<Vec<_>>(), at.y),
    };
    let scale = s.iter().map(|&(x, _)| (x - x0).abs()).fold(0.0, f64::max);
    if !(scale > 0.0) {
        return None;
    }
    // normal equations in the scaled, centered abscissa
    let mut m = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for &(x, y) in &s {
        let z = (x - x0) / scale;
        let basis = [z * z, z, 1.0];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += basis[i] * basis[j];
            }
            rhs[i] += basis[i] * y;
        }
    }
    let sol = solve3(m, rhs)?;
    let (a, b) = (sol[0] / (scale * scale), sol[1] / scale);
    let k = 2.0 * a / (1.0 + b * b).powf(1.5);
    k.is_finite().then_some((k.abs(), frame))
}

fn solve3(mut m: [[f64; 3]; 3], mut r: [f64; 3]) -> Option<[f64; 3]> {
    let norm = m.iter().flatten().fold(0.0f64, |a, &x| a.max(x.abs()));
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() <= 1e-13 * norm {
            return None;
        }
        m.swap(col, piv);
        r.swap(col, piv);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            r[row] -= f * r[col];
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let s: f64 = (i + 1..3).map(|k| m[i][k] * x[k]).sum();
        x[i] = (r[i] - s) / m[i][i];
    }
    Some(x)
}

/// Parabola-fit curvature of every interior segment, using its endpoints
/// and the nearest interior segment of each triangle across the edges its
/// endpoints lie on.
pub fn curvature(state: &InterfaceState) -> Vec<CurvatureSample> {
    let mesh = state.mesh();
    let segs: Vec<Vec<(Point2, Point2)>> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let tri = mesh.triangle(t);
            match state.cut(t).view(&tri) {
                Ok(v) => v.segments().as_slice().to_vec(),
                Err(_) => Vec::new(),
            }
        })
        .collect();
    let tol = 1e-12 * mesh.char_length();
    (0..mesh.num_triangles())
        .into_par_iter()
        .flat_map_iter(|t| {
            let tri = mesh.triangle(t);
            let cut = *state.cut(t);
            let segs = &segs;
            segs[t].iter().enumerate().filter_map(move |(k, &(a, b))| {
                let mid = (a + b) * 0.5;
                let mut pts = vec![a, b];
                for end in [a, b] {
                    let Some(i) = (0..3).find(|&i| {
                        cut.r[i].iter().any(|&r| is_valid_cut(r) && cut_point(&tri, i, r) == end)
                    }) else {
                        continue;
                    };
                    let Some(nb) = mesh.neighbor(t, i) else { continue };
                    let nearest = segs[nb as usize].iter().min_by(|x, y| {
                        let dx = ((x.0 + x.1) * 0.5 - mid).norm2();
                        let dy = ((y.0 + y.1) * 0.5 - mid).norm2();
                        dx.total_cmp(&dy)
                    });
                    if let Some(&(p, q)) = nearest {
                        for r in [p, q] {
                            if pts.iter().all(|s| (*s - r).norm() > tol) {
                                pts.push(r);
                            }
                        }
                    }
                }
                let (kappa, frame) = parabola_curvature(&pts, mid)?;
                Some(CurvatureSample {
                    triangle: t as u32,
                    segment: k as u8,
                    midpoint: mid,
                    kappa,
                    frame,
                })
            })
        })
        .collect()
}

/// `max |k - k_true| / |k_true|` over the samples.
pub fn curvature_error(samples: &[CurvatureSample], truth: impl Fn(Point2) -> f64) -> Option<f64> {
    samples
        .iter()
        .map(|s| {
            let k = truth(s.midpoint);
            ((s.kappa - k.abs()) / k).abs()
        })
        .fold(None, |m: Option<f64>, e| Some(m.map_or(e, |m| m.max(e))))
}

/// Number of connected pieces of the reconstructed liquid. Polygons join
/// when they share a boundary stretch of positive length; touching at a
/// point does not join them.
pub fn liquid_components(state: &InterfaceState) -> usize {
    let mesh = state.mesh();
    let pieces: Vec<Vec<Vec<Point2>>> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let tri = mesh.triangle(t);
            let cut = state.cut(t);
            if cut.is_uniform() {
                return if cut.c == 1 { vec![tri.to_vec()] } else { Vec::new() };
            }
            match cut.view(&tri) {
                Ok(v) => v.liquid_pieces().as_slice().iter().map(|p| p.vertices().to_vec()).collect(),
                Err(_) => Vec::new(),
            }
        })
        .collect();
    let mut first = Vec::with_capacity(pieces.len() + 1);
    let mut n = 0;
    for p in &pieces {
        first.push(n);
        n += p.len();
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let join = |parent: &mut Vec<usize>, a: usize, b: usize| {
        let (ra, rb) = (find(parent, a), find(parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    };
    const TOL: f64 = 1e-9;

    // (edge, lo, hi, piece) for piece sides lying on mesh edges
    let mut spans: Vec<(u32, f64, f64, usize)> = Vec::new();
    for (t, ps) in pieces.iter().enumerate() {
        let tri = mesh.triangle(t);
        let ids = mesh.triangles()[t];
        let edges = mesh.tri_edges(t);
        // sides of the piece that lie along a triangle edge, as parameters
        let on_edge = |a: Point2, b: Point2| -> Option<(usize, f64, f64)> {
            (0..3).find_map(|i| {
                let (p, q) = (tri[i], tri[(i + 1) % 3]);
                let d = q - p;
                let l2 = d.norm2();
                let off = |x: Point2| d.cross(x - p).abs() / l2;
                if off(a) > TOL || off(b) > TOL {
                    return None;
                }
                let (sa, sb) = ((a - p).dot(d) / l2, (b - p).dot(d) / l2);
                Some((i, sa.min(sb), sa.max(sb)))
            })
        };
        for (k, poly) in ps.iter().enumerate() {
            let id = first[t] + k;
            for j in 0..poly.len() {
                let (a, b) = (poly[j], poly[(j + 1) % poly.len()]);
                if let Some((i, lo, hi)) = on_edge(a, b) {
                    if hi - lo <= TOL {
                        continue;
                    }
                    // orient along the stored edge direction
                    let e = edges[i];
                    let (lo, hi) = if mesh.edge(e).v[0] == ids[i] { (lo, hi) } else { (1.0 - hi, 1.0 - lo) };
                    spans.push((e, lo, hi, id));
                }
            }
            // pieces of one triangle sharing a diagonal
            for (k2, other) in ps.iter().enumerate().skip(k + 1) {
                let shared = poly.iter().filter(|x| other.iter().any(|y| (**x - *y).norm() <= TOL * mesh.char_length())).count();
                if shared >= 2 {
                    join(&mut parent, id, first[t] + k2);
                }
            }
        }
    }
    spans.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut i = 0;
    while i < spans.len() {
        let mut j = i;
        while j < spans.len() && spans[j].0 == spans[i].0 {
            j += 1;
        }
        for x in i..j {
            for y in x + 1..j {
                let overlap = spans[x].2.min(spans[y].2) - spans[x].1.max(spans[y].1);
                if overlap > TOL {
                    join(&mut parent, spans[x].3, spans[y].3);
                }
            }
        }
        i = j;
    }
    (0..n).filter(|&i| find(&mut parent, i) == i).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edgecut::EdgeCut;
    use crate::mesh::{build_lattice, Rect};
    use crate::shapes::{init_state, polygonize, InitOptions, ShapeSpec};
    use std::sync::Arc;

    #[test]
    fn component_counts() {
        let mesh = Arc::new(build_lattice(32, Rect::unit()).unwrap());
        let one = init_state(mesh.clone(), &ShapeSpec::circle(0.5, 0.5, 0.2), InitOptions::default()).unwrap().0;
        assert_eq!(liquid_components(&one), 1);
        let two = crate::shapes::DensePolygon::new(vec![
            polygonize(&ShapeSpec::circle(0.25, 0.5, 0.1), 256).unwrap().rings()[0].clone(),
            polygonize(&ShapeSpec::circle(0.75, 0.5, 0.1), 256).unwrap().rings()[0].clone(),
        ])
        .unwrap();
        let (s, _) = crate::shapes::init_from_polygon(mesh.clone(), &two, false);
        assert_eq!(liquid_components(&s), 2);
        let full = InterfaceState::new(mesh.clone(), vec![EdgeCut::uniform(1); mesh.num_triangles()]);
        assert_eq!(liquid_components(&full), 1);
        let empty = InterfaceState::new(mesh.clone(), vec![EdgeCut::uniform(0); mesh.num_triangles()]);
        assert_eq!(liquid_components(&empty), 0);
    }

    #[test]
    fn orders() {
        let c = convergence_order(&[(8.0, 4.0), (16.0, 1.0)]).unwrap();
        assert_eq!(c.orders, vec![Some(2.0)]);
        assert!((c.slope.unwrap() - 2.0).abs() < 1e-15);
        let c = convergence_order(&[(1.0, 3.34e-3), (2.0, 9.30e-4)]).unwrap();
        assert!((c.orders[0].unwrap() - 1.84).abs() < 0.01);
        let c = convergence_order(&[(1.0, 1.0), (2.0, 0.0)]).unwrap();
        assert_eq!(c.orders, vec![None]);
        assert!(convergence_order(&[(1.0, 1.0)]).is_err());
    }

    #[test]
    fn parabola_examples() {
        let a = 1.7;
        let pts: Vec<Point2> = [-0.2, -0.1, 0.05, 0.1, 0.3].iter().map(|&x| Point2::new(x, a * x * x)).collect();
        let (k, frame) = parabola_curvature(&pts, Point2::new(0.0, 0.0)).unwrap();
        assert_eq!(frame, FitFrame::XParabola);
        assert!((k - 2.0 * a).abs() < 1e-9);
        let line: Vec<Point2> = (0..4).map(|i| Point2::new(i as f64, 0.5 * i as f64)).collect();
        assert!(parabola_curvature(&line, line[1]).unwrap().0.abs() < 1e-12);
        // rotating by 90 degrees switches the frame, not the value
        let rot: Vec<Point2> = pts.iter().map(|p| Point2::new(-p.y, p.x)).collect();
        let (kr, fr) = parabola_curvature(&rot, Point2::new(0.0, 0.0)).unwrap();
        assert_eq!(fr, FitFrame::YParabola);
        assert!((kr - k).abs() < 1e-9);
    }

    #[test]
    fn errors_of_initialized_circle() {
        let mesh = Arc::new(build_lattice(16, Rect::unit()).unwrap());
        let shape = ShapeSpec::circle(0.5, 0.5, 0.15);
        let truth = polygonize(&shape, 4096).unwrap();
        let opts = InitOptions {
            area_correct: true,
            ..Default::default()
        };
        let (s, _) = init_state(mesh.clone(), &shape, opts).unwrap();
        let e = shape_error(&s, &truth, Grouping::LatticeCells).unwrap();
        assert!(e.e_g < 1e-8, "{}", e.e_g);
        assert!(mass_error(&s, truth.area()).unwrap() < 1e-10);

        let empty = InterfaceState::new(mesh.clone(), vec![EdgeCut::uniform(0); mesh.num_triangles()]);
        let truth1000 = polygonize(&shape, 1000).unwrap();
        let e = shape_error(&empty, &truth1000, Grouping::Triangles).unwrap();
        assert!((e.e_g - truth1000.area()).abs() < 1e-14);
        assert!((e.e_g - std::f64::consts::PI * 0.0225).abs() < 1e-6);

        assert!(shape_error(&s, &truth, Grouping::LatticeCells).is_ok());
        let far = polygonize(&ShapeSpec::circle(5.0, 5.0, 0.1), 64).unwrap();
        assert_eq!(shape_error(&s, &far, Grouping::Triangles), Err(MetricsError::DomainMismatch));
    }

    #[test]
    fn mass_error_arithmetic() {
        let mesh = Arc::new(build_lattice(4, Rect::unit()).unwrap());
        let mut cuts = vec![EdgeCut::uniform(1); mesh.num_triangles()];
        let a0 = 1.0;
        // one triangle loses a quarter of its liquid
        cuts[3] = EdgeCut::new(1, [[0.5, 1.0], [0.0, 1.0], [0.5, 1.0]], None).unwrap();
        let s = InterfaceState::new(mesh.clone(), cuts);
        let lost = 0.75 * mesh.area(3);
        assert!((mass_error(&s, a0).unwrap() - lost / a0).abs() < 1e-15);
        assert!(mass_error(&s, 0.0).is_err());
    }

    #[test]
    fn circle_curvature_magnitude() {
        let mesh = Arc::new(build_lattice(64, Rect::unit()).unwrap());
        let shape = ShapeSpec::circle(0.5, 0.5, 0.15);
        let (s, _) = init_state(mesh, &shape, InitOptions::default()).unwrap();
        let samples = curvature(&s);
        assert!(samples.len() > 50);
        let mean = samples.iter().map(|k| k.kappa).sum::<f64>() / samples.len() as f64;
        assert!((mean - 1.0 / 0.15).abs() < 0.5 / 0.15, "{mean}");
        let err = curvature_error(&samples, |_| 1.0 / 0.15).unwrap();
        assert!(err.is_finite());
    }
}

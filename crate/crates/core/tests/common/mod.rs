#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tricut::edgecut::{EdgeCut, EPS_CUT};
use tricut::geom::Point2;

pub fn p(x: f64, y: f64) -> Point2 {
    Point2::new(x, y)
}

pub fn shoelace(pts: &[Point2]) -> f64 {
    let n = pts.len();
    let mut s = 0.0;
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        s += a.x * b.y - b.x * a.y;
    }
    0.5 * s
}

/// CCW triangle in `[-1, 1]^2` with area at least 0.05.
pub fn random_triangle(rng: &mut ChaCha8Rng) -> [Point2; 3] {
    loop {
        let t = [0; 3].map(|_| p(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let a = shoelace(&t);
        if a.abs() >= 0.05 {
            return if a > 0.0 { t } else { [t[0], t[2], t[1]] };
        }
    }
}

fn single(rng: &mut ChaCha8Rng) -> [f64; 2] {
    [rng.gen_range(1e-6..1.0 - 1e-6), 1.0]
}

fn double(rng: &mut ChaCha8Rng) -> [f64; 2] {
    loop {
        let a: f64 = rng.gen_range(1e-6..1.0 - 1e-6);
        let b: f64 = rng.gen_range(1e-6..1.0 - 1e-6);
        if (a - b).abs() > 1e-6 {
            return [a.min(b), a.max(b)];
        }
    }
}

/// Canonical `(c, rows, barycentric vt)` of a random record of `case`.
pub fn canonical(rng: &mut ChaCha8Rng, case: u8) -> (u8, [[f64; 2]; 3], Option<[f64; 3]>) {
    let none = [0.0, 1.0];
    match case {
        1 => (0, [none; 3], None),
        2 => {
            let w: [f64; 3] = [0; 3].map(|_| rng.gen_range(0.02..1.0));
            let s: f64 = w.iter().sum();
            (0, [double(rng), none, none], Some(w.map(|x| x / s)))
        }
        3 => (0, [double(rng), double(rng), none], None),
        4 => (0, [double(rng), double(rng), double(rng)], None),
        5 => (1, [single(rng), none, single(rng)], None),
        6 => (1, [single(rng), double(rng), single(rng)], None),
        _ => unreachable!(),
    }
}

/// Relabel a canonical record so that canonical vertex `k` becomes vertex
/// `(k + rot) % 3`, optionally exchanging the materials.
pub fn place(c: u8, rows: [[f64; 2]; 3], w: Option<[f64; 3]>, rot: usize, swap: bool) -> EdgeCut {
    let count = |r: [f64; 2]| r.iter().filter(|&&x| x > EPS_CUT && x < 1.0 - EPS_CUT).count() as u8;
    let m0 = c;
    let m1 = m0 ^ (count(rows[0]) & 1);
    let m2 = m1 ^ (count(rows[1]) & 1);
    let mc = [m0, m1, m2];
    let mut r = [[0.0, 1.0]; 3];
    let mut b = [0.0; 3];
    for k in 0..3 {
        r[(k + rot) % 3] = rows[k];
        if let Some(w) = w {
            b[(k + rot) % 3] = w[k];
        }
    }
    let c0 = mc[(3 - rot) % 3] ^ swap as u8;
    EdgeCut::new(c0, r, w.map(|_| [b[1], b[2]])).expect("valid random record")
}

pub fn random_cut(rng: &mut ChaCha8Rng, case: u8) -> (EdgeCut, bool) {
    let (c, rows, w) = canonical(rng, case);
    let rot = rng.gen_range(0..3);
    let swap = rng.gen_bool(0.5);
    (place(c, rows, w, rot, swap), swap)
}

fn valid(x: f64) -> bool {
    x > EPS_CUT && x < 1.0 - EPS_CUT
}

/// Liquid area of `cut` on `tri`, by walking the triangle boundary.
///
/// Every case has one connected region of a single material whose
/// boundary visits the vertices of that material and all cut points in
/// boundary order: the material opposite to the vertices when all three
/// agree, otherwise the material of the odd vertex out.
pub fn oracle_liquid_area(cut: &EdgeCut, tri: &[Point2; 3]) -> f64 {
    let cuts: Vec<Vec<f64>> = cut.r.iter().map(|row| row.iter().copied().filter(|&x| valid(x)).collect()).collect();
    let m0 = cut.c;
    let m1 = m0 ^ (cuts[0].len() as u8 & 1);
    let m2 = m1 ^ (cuts[1].len() as u8 & 1);
    let m = [m0, m1, m2];
    let area = shoelace(tri);
    let region = if m0 == m1 && m1 == m2 {
        1 - m0
    } else if m0 == m1 {
        m2
    } else if m0 == m2 {
        m1
    } else {
        m0
    };
    let mut walk = Vec::new();
    for i in 0..3 {
        if m[i] == region {
            walk.push(tri[i]);
        }
        let (a, b) = (tri[i], tri[(i + 1) % 3]);
        for &r in &cuts[i] {
            walk.push(a + (b - a) * r);
        }
        if cuts[i].len() == 2 && m0 == m1 && m1 == m2 {
            if let Some([u, v]) = cut.vt {
                walk.push(tri[0] + (tri[1] - tri[0]) * u + (tri[2] - tri[0]) * v);
            }
        }
    }
    let a = if walk.len() >= 3 { shoelace(&walk) } else { 0.0 };
    if region == 1 {
        a
    } else {
        area - a
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// Worst disagreement among the closed-form fraction, the area of the
/// reconstructed pieces and the boundary-walk oracle.
pub fn fraction_check(n: usize, seed: u64) -> f64 {
    let mut rng = rng(seed);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let case = (i % 6) as u8 + 1;
        let (cut, _) = random_cut(&mut rng, case);
        let tri = random_triangle(&mut rng);
        let area = shoelace(&tri);
        let f1 = cut.liquid_fraction().unwrap();
        let pieces = cut.view(&tri).unwrap().liquid_pieces().area() / area;
        let walk = oracle_liquid_area(&cut, &tri) / area;
        worst = worst.max((f1 - pieces).abs()).max((f1 - walk).abs());
    }
    worst
}

fn union_overlap(a: &[tricut::geom::ConvexPolygon], b: &[tricut::geom::ConvexPolygon]) -> f64 {
    let mut s = 0.0;
    for x in a {
        for y in b {
            s += tricut::geom::clip_area(x, y);
        }
    }
    s
}

/// Area of the symmetric difference of two unions of disjoint convex pieces.
pub fn symmetric_difference(a: &tricut::edgecut::Pieces, b: &tricut::edgecut::Pieces) -> f64 {
    let pa: Vec<_> = a.as_slice().iter().map(|p| p.to_polygon()).collect();
    let pb: Vec<_> = b.as_slice().iter().map(|p| p.to_polygon()).collect();
    (a.area() + b.area() - 2.0 * union_overlap(&pa, &pb)).abs()
}

/// Worst symmetric-difference area under material swap and relabelling,
/// with the classification checked along the way.
pub fn symmetry_check(n: usize, seed: u64) -> Result<f64, String> {
    let mut rng = rng(seed);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let case = (i % 6) as u8 + 1;
        let (cut, _) = random_cut(&mut rng, case);
        let tri = random_triangle(&mut rng);
        let form = cut.classify().unwrap();
        let view = cut.view(&tri).unwrap();

        let sw = cut.swapped();
        let fs = sw.classify().unwrap();
        if fs.case_id != form.case_id || fs.swap == form.swap {
            return Err(format!("swap changed class: {form:?} -> {fs:?} for {cut:?}"));
        }
        let d = symmetric_difference(&sw.view(&tri).unwrap().liquid_pieces(), &view.air_pieces());
        worst = worst.max(d);

        for s in 1..3 {
            let rc = cut.rotated(s);
            let rt = [tri[s], tri[(s + 1) % 3], tri[(s + 2) % 3]];
            let fr = rc.classify().unwrap();
            if fr.case_id != form.case_id || fr.swap != form.swap {
                return Err(format!("rotation changed class: {form:?} -> {fr:?} for {cut:?}"));
            }
            if matches!(form.case_id, 2 | 3 | 5 | 6) && fr.rot as usize != (form.rot as usize + 3 - s) % 3 {
                return Err(format!("rotation offset: {form:?} -> {fr:?} (s = {s})"));
            }
            let d = symmetric_difference(&rc.view(&rt).unwrap().liquid_pieces(), &view.liquid_pieces());
            worst = worst.max(d);
        }
    }
    Ok(worst)
}

#[derive(Debug, Default)]
pub struct CorrectionStats {
    pub solved: usize,
    pub worst_fraction: f64,
    pub worst_ratio: f64,
    pub floor_unchanged: usize,
}

/// Correct random records toward reachable targets, and case-4 records
/// toward targets under their floor.
pub fn correction_check(n: usize, seed: u64) -> Result<CorrectionStats, String> {
    use tricut::edgecut::{edge_cut_correction, Correction};
    let mut rng = rng(seed);
    let mut st = CorrectionStats::default();
    let unit = [p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0)];
    for i in 0..n {
        let case = (i % 5) as u8 + 2;
        let (c, rows, w) = canonical(&mut rng, case);
        let rot = rng.gen_range(0..3);
        let swap = rng.gen_bool(0.5);
        let cut = place(c, rows, w, rot, swap);
        let tri = random_triangle(&mut rng);

        // reachable canonical fractions run from the shrink floor to 1
        let floor = if case == 4 {
            let s = rows.map(|r| r[0] / (r[0] + 1.0 - r[1]));
            shoelace(&[0, 1, 2].map(|k| unit[k] + (unit[(k + 1) % 3] - unit[k]) * s[k])) / 0.5
        } else {
            0.0
        };
        let y = floor + (1.0 - floor) * rng.gen_range(0.01..0.99);
        let target = if swap { 1.0 - y } else { y };
        let out = match edge_cut_correction(&cut, target).map_err(|e| e.to_string())? {
            Correction::Solved { cut: out, .. } => out,
            other => return Err(format!("reachable target {target} gave {other:?} for {cut:?}")),
        };
        st.solved += 1;
        let f = out.liquid_fraction().unwrap();
        let walk = oracle_liquid_area(&out, &tri) / shoelace(&tri);
        st.worst_fraction = st.worst_fraction.max((f - target).abs()).max((walk - target).abs());
        if out.counts() != cut.counts() || out.c != cut.c {
            return Err(format!("pattern changed: {cut:?} -> {out:?}"));
        }
        for k in 0..3 {
            let (r0, r1) = (cut.r[k], out.r[k]);
            if valid(r0[0]) && valid(r0[1]) {
                let q0 = r0[0] / (1.0 - r0[1]);
                let q1 = r1[0] / (1.0 - r1[1]);
                st.worst_ratio = st.worst_ratio.max((q1 / q0 - 1.0).abs());
            }
        }
        if case == 2 {
            let bary = |v: [f64; 2]| [1.0 - v[0] - v[1], v[0], v[1]];
            let (b0, b1) = (bary(cut.vt.unwrap()), bary(out.vt.unwrap()));
            let (i, j) = (rot, (rot + 1) % 3);
            st.worst_ratio = st.worst_ratio.max(((b1[i] / b1[j]) / (b0[i] / b0[j]) - 1.0).abs());
        }

        if case == 4 {
            let y = floor * rng.gen_range(0.0..0.99);
            let target = if swap { 1.0 - y } else { y };
            match edge_cut_correction(&cut, target).map_err(|e| e.to_string())? {
                Correction::Unchanged => st.floor_unchanged += 1,
                other => return Err(format!("target {y} under floor {floor} gave {other:?}")),
            }
        }
    }
    Ok(st)
}

/// Fitted exponent of the forward-then-backward RK4 residual against `dt`
/// on the single-vortex field, with the residual at each `dt`.
pub fn back_forward_exponent() -> (f64, Vec<f64>) {
    use tricut::flow::{rk4_trace, Field};
    let field = Field::SingleVortex { period: 8.0 };
    let starts = [p(0.5, 0.75), p(0.3, 0.4), p(0.62, 0.2), p(0.8, 0.55)];
    let dts: Vec<f64> = (0..5).map(|k| 0.2 / (1 << k) as f64).collect();
    let residuals: Vec<f64> = dts
        .iter()
        .map(|&dt| {
            starts
                .iter()
                .map(|&x| {
                    let y = rk4_trace(&field, x, 1.0, dt);
                    (rk4_trace(&field, y, 1.0 + dt, -dt) - x).norm()
                })
                .sum::<f64>()
        })
        .collect();
    let pts: Vec<(f64, f64)> = dts.iter().zip(&residuals).map(|(d, r)| (d.ln(), r.ln())).collect();
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|q| q.0).sum::<f64>() / n, pts.iter().map(|q| q.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|q| (q.0 - mx).powi(2)).sum();
    (sxy / sxx, residuals)
}

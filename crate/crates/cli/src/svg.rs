use std::fmt::Write;

use tricut::advect::InterfaceState;

const WIDTH: f64 = 800.0;

/// Liquid pieces, interface segments and optionally the mesh, with the
/// domain's y axis pointing up.
pub fn render(state: &InterfaceState, wireframe: bool) -> String {
    let mesh = state.mesh();
    let b = mesh.bbox();
    let scale = WIDTH / b.width();
    let height = b.height() * scale;
    let px = |x: f64| (x - b.lo.x) * scale;
    let py = |y: f64| (b.hi.y - y) * scale;

    let mut fill = String::new();
    let mut lines = String::new();
    let mut wire = String::new();
    for t in 0..mesh.num_triangles() {
        let tri = mesh.triangle(t);
        let cut = state.cut(t);
        if wireframe {
            let _ = write!(wire, "M{:.3} {:.3}", px(tri[0].x), py(tri[0].y));
            for p in &tri[1..] {
                let _ = write!(wire, "L{:.3} {:.3}", px(p.x), py(p.y));
            }
            wire.push('Z');
        }
        let Ok(view) = cut.view(&tri) else {
            continue;
        };
        for piece in view.liquid_pieces().as_slice() {
            for (k, p) in piece.vertices().iter().enumerate() {
                let _ = write!(fill, "{}{:.3} {:.3}", if k == 0 { 'M' } else { 'L' }, px(p.x), py(p.y));
            }
            fill.push('Z');
        }
        for &(a, c) in view.segments().as_slice() {
            let _ = write!(lines, "M{:.3} {:.3}L{:.3} {:.3}", px(a.x), py(a.y), px(c.x), py(c.y));
        }
    }

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{height:.0}" viewBox="0 0 {WIDTH:.0} {height:.0}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if !fill.is_empty() {
        let _ = writeln!(out, r##"<path d="{fill}" fill="#9ecae1" stroke="none"/>"##);
    }
    if wireframe {
        let _ = writeln!(out, r##"<path d="{wire}" fill="none" stroke="#bbbbbb" stroke-width="0.4"/>"##);
    }
    if !lines.is_empty() {
        let _ = writeln!(out, r##"<path d="{lines}" fill="none" stroke="#08306b" stroke-width="1.2"/>"##);
    }
    out.push_str("</svg>\n");
    out
}

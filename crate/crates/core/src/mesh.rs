//! Triangle mesh container: lattice construction, `.node`/`.ele` import,
//! edge adjacency and bucket-grid point location.

use std::collections::HashMap;

use thiserror::Error;

use crate::geom::{orient2d, Point2};

pub const NO_TRIANGLE: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("empty domain [{0}, {1}] x [{2}, {3}]")]
    EmptyDomain(f64, f64, f64, f64),
    #[error("lattice needs at least one cell")]
    NoCells,
    #[error("{file} line {line}: {msg}")]
    Parse {
        file: &'static str,
        line: usize,
        msg: String,
    },
    #[error("{file} line {line}: index out of range ({index})")]
    IndexOutOfRange {
        file: &'static str,
        line: usize,
        index: i64,
    },
    #[error("ele line {line}: degenerate triangle")]
    DegenerateTriangle { line: usize },
    #[error("edge ({0}, {1}) is shared by more than two triangles")]
    NonManifoldEdge(u32, u32),
    #[error("mesh has no triangles")]
    Empty,
}

/// Axis-aligned rectangle `[lo.x, hi.x] x [lo.y, hi.y]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub lo: Point2,
    pub hi: Point2,
}

impl Rect {
    pub const fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self {
            lo: Point2::new(x0, y0),
            hi: Point2::new(x1, y1),
        }
    }

    pub const fn unit() -> Self {
        Self::new(0.0, 0.0, 1.0, 1.0)
    }

    pub fn width(&self) -> f64 {
        self.hi.x - self.lo.x
    }

    pub fn height(&self) -> f64 {
        self.hi.y - self.lo.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.lo.x && p.x <= self.hi.x && p.y >= self.lo.y && p.y <= self.hi.y
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    pub n: usize,
    pub domain: Rect,
}

impl Lattice {
    /// Cell `(i, j)` owns triangles `2 * (j * n + i)` (lower-right) and
    /// `2 * (j * n + i) + 1` (upper-left).
    pub fn cell_of_triangle(&self, t: usize) -> (usize, usize) {
        let c = t / 2;
        (c % self.n, c / self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub v: [u32; 2],
    /// Incident triangles; the second slot is `NO_TRIANGLE` on the hull.
    pub tris: [u32; 2],
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.tris[1] == NO_TRIANGLE
    }

    pub fn other(&self, t: u32) -> Option<u32> {
        let o = if self.tris[0] == t { self.tris[1] } else { self.tris[0] };
        (o != NO_TRIANGLE).then_some(o)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocateResult {
    Triangle(u32),
    Outside,
}

#[derive(Debug, Clone)]
struct BucketGrid {
    lo: Point2,
    inv: f64,
    size: f64,
    nx: usize,
    ny: usize,
    start: Vec<u32>,
    items: Vec<u32>,
}

impl BucketGrid {
    fn build(vertices: &[Point2], triangles: &[[u32; 3]], lo: Point2, hi: Point2, target: f64) -> Self {
        let w = (hi.x - lo.x).max(f64::MIN_POSITIVE);
        let h = (hi.y - lo.y).max(f64::MIN_POSITIVE);
        let mut size = target.max(w.max(h) / 4096.0);
        if !(size > 0.0) || !size.is_finite() {
            size = w.max(h);
        }
        let nx = ((w / size).ceil() as usize).max(1);
        let ny = ((h / size).ceil() as usize).max(1);
        let mut grid = Self {
            lo,
            inv: 1.0 / size,
            size,
            nx,
            ny,
            start: vec![0; nx * ny + 1],
            items: Vec::new(),
        };
        let ranges: Vec<_> = triangles
            .iter()
            .map(|t| {
                let (a, b, c) = (vertices[t[0] as usize], vertices[t[1] as usize], vertices[t[2] as usize]);
                let blo = Point2::new(a.x.min(b.x).min(c.x), a.y.min(b.y).min(c.y));
                let bhi = Point2::new(a.x.max(b.x).max(c.x), a.y.max(b.y).max(c.y));
                (grid.cell(blo), grid.cell(bhi))
            })
            .collect();
        for &((i0, j0), (i1, j1)) in &ranges {
            for j in j0..=j1 {
                for i in i0..=i1 {
                    grid.start[j * nx + i + 1] += 1;
                }
            }
        }
        for k in 0..nx * ny {
            grid.start[k + 1] += grid.start[k];
        }
        let mut fill = grid.start.clone();
        grid.items = vec![0; grid.start[nx * ny] as usize];
        for (t, &((i0, j0), (i1, j1))) in ranges.iter().enumerate() {
            for j in j0..=j1 {
                for i in i0..=i1 {
                    let k = j * nx + i;
                    grid.items[fill[k] as usize] = t as u32;
                    fill[k] += 1;
                }
            }
        }
        grid
    }

    #[inline]
    fn cell(&self, p: Point2) -> (usize, usize) {
        let fx = ((p.x - self.lo.x) * self.inv).floor();
        let fy = ((p.y - self.lo.y) * self.inv).floor();
        let i = if fx <= 0.0 { 0 } else { (fx as usize).min(self.nx - 1) };
        let j = if fy <= 0.0 { 0 } else { (fy as usize).min(self.ny - 1) };
        (i, j)
    }

    /// Candidates in ascending triangle id.
    #[inline]
    fn bucket(&self, i: usize, j: usize) -> &[u32] {
        let k = j * self.nx + i;
        &self.items[self.start[k] as usize..self.start[k + 1] as usize]
    }
}

#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<Point2>,
    triangles: Vec<[u32; 3]>,
    edges: Vec<Edge>,
    /// `tri_edges[t][i]` is the edge from local vertex `i` to `i + 1`.
    tri_edges: Vec<[u32; 3]>,
    edge_table: HashMap<(u32, u32), u32>,
    areas: Vec<f64>,
    char_length: f64,
    mean_edge: f64,
    lattice: Option<Lattice>,
    lo: Point2,
    hi: Point2,
    grid: BucketGrid,
}

impl TriMesh {
    /// Assemble a mesh from CCW triangles. `char_length` overrides the
    /// minimum edge length when given.
    pub fn from_parts(
        vertices: Vec<Point2>,
        triangles: Vec<[u32; 3]>,
        char_length: Option<f64>,
        lattice: Option<Lattice>,
    ) -> Result<Self, MeshError> {
        if triangles.is_empty() {
            return Err(MeshError::Empty);
        }
        let mut edges: Vec<Edge> = Vec::with_capacity(triangles.len() * 3 / 2 + 8);
        let mut edge_table = HashMap::with_capacity(triangles.len() * 3 / 2 + 8);
        let mut tri_edges = Vec::with_capacity(triangles.len());
        let mut min_len = f64::INFINITY;
        let mut len_sum = 0.0;
        for (t, tri) in triangles.iter().enumerate() {
            let mut te = [0u32; 3];
            for i in 0..3 {
                let (a, b) = (tri[i], tri[(i + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let id = *edge_table.entry(key).or_insert_with(|| {
                    let l = (vertices[a as usize] - vertices[b as usize]).norm();
                    min_len = min_len.min(l);
                    len_sum += l;
                    edges.push(Edge {
                        v: [key.0, key.1],
                        tris: [NO_TRIANGLE, NO_TRIANGLE],
                    });
                    (edges.len() - 1) as u32
                });
                let e = &mut edges[id as usize];
                if e.tris[0] == NO_TRIANGLE {
                    e.tris[0] = t as u32;
                } else if e.tris[1] == NO_TRIANGLE {
                    e.tris[1] = t as u32;
                } else {
                    return Err(MeshError::NonManifoldEdge(key.0, key.1));
                }
                te[i] = id;
            }
            tri_edges.push(te);
        }
        let areas = triangles
            .iter()
            .map(|t| {
                let (a, b, c) = (vertices[t[0] as usize], vertices[t[1] as usize], vertices[t[2] as usize]);
                0.5 * (b - a).cross(c - a)
            })
            .collect();
        let mean_edge = len_sum / edges.len() as f64;
        let (mut lo, mut hi) = crate::geom::bbox_of(&vertices);
        if let Some(l) = lattice {
            lo = l.domain.lo;
            hi = l.domain.hi;
        }
        let char_length = char_length.unwrap_or(min_len);
        let bucket = if lattice.is_some() { char_length } else { mean_edge };
        let grid = BucketGrid::build(&vertices, &triangles, lo, hi, bucket);
        Ok(Self {
            vertices,
            triangles,
            edges,
            tri_edges,
            edge_table,
            areas,
            char_length,
            mean_edge,
            lattice,
            lo,
            hi,
            grid,
        })
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    #[inline]
    pub fn triangle(&self, t: usize) -> [Point2; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a as usize], self.vertices[b as usize], self.vertices[c as usize]]
    }

    #[inline]
    pub fn area(&self, t: usize) -> f64 {
        self.areas[t]
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    #[inline]
    pub fn tri_edges(&self, t: usize) -> [u32; 3] {
        self.tri_edges[t]
    }

    #[inline]
    pub fn edge(&self, e: u32) -> &Edge {
        &self.edges[e as usize]
    }

    pub fn edge_id(&self, a: u32, b: u32) -> Option<u32> {
        self.edge_table.get(&(a.min(b), a.max(b))).copied()
    }

    /// Triangle across local edge `i` of `t`.
    #[inline]
    pub fn neighbor(&self, t: usize, i: usize) -> Option<u32> {
        self.edges[self.tri_edges[t][i] as usize].other(t as u32)
    }

    /// Lattice spacing, or the minimum edge length of an imported mesh.
    pub fn char_length(&self) -> f64 {
        self.char_length
    }

    pub fn mean_edge_length(&self) -> f64 {
        self.mean_edge
    }

    pub fn lattice(&self) -> Option<&Lattice> {
        self.lattice.as_ref()
    }

    pub fn bbox(&self) -> Rect {
        Rect {
            lo: self.lo,
            hi: self.hi,
        }
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    #[inline]
    pub fn contains(&self, t: usize, p: Point2) -> crate::geom::Containment {
        let [a, b, c] = self.triangle(t);
        let o1 = orient2d(a, b, p);
        let o2 = orient2d(b, c, p);
        let o3 = orient2d(c, a, p);
        if o1 < 0 || o2 < 0 || o3 < 0 {
            crate::geom::Containment::Outside
        } else if o1 == 0 || o2 == 0 || o3 == 0 {
            crate::geom::Containment::Boundary
        } else {
            crate::geom::Containment::Inside
        }
    }

    /// Find a triangle containing `p`. A hint is accepted only when `p` is
    /// strictly inside it; otherwise the lowest-id containing triangle is
    /// returned, so boundary points resolve deterministically.
    pub fn locate(&self, p: Point2, hint: Option<u32>) -> LocateResult {
        use crate::geom::Containment::*;
        if !p.is_finite() {
            return LocateResult::Outside;
        }
        if let Some(h) = hint {
            if (h as usize) < self.triangles.len() && self.contains(h as usize, p) == Inside {
                return LocateResult::Triangle(h);
            }
        }
        if p.x < self.lo.x || p.x > self.hi.x || p.y < self.lo.y || p.y > self.hi.y {
            return LocateResult::Outside;
        }
        let (i, j) = self.grid.cell(p);
        for &t in self.grid.bucket(i, j) {
            if self.contains(t as usize, p) != Outside {
                return LocateResult::Triangle(t);
            }
        }
        LocateResult::Outside
    }

    /// Triangles whose bounding boxes may overlap `[lo, hi]`, ascending and
    /// deduplicated.
    pub fn triangles_near(&self, lo: Point2, hi: Point2, out: &mut Vec<u32>) {
        out.clear();
        if hi.x < self.lo.x || hi.y < self.lo.y || lo.x > self.hi.x || lo.y > self.hi.y {
            return;
        }
        let (i0, j0) = self.grid.cell(lo);
        let (i1, j1) = self.grid.cell(hi);
        for j in j0..=j1 {
            for i in i0..=i1 {
                out.extend_from_slice(self.grid.bucket(i, j));
            }
        }
        out.sort_unstable();
        out.dedup();
    }

    pub fn bucket_size(&self) -> f64 {
        self.grid.size
    }

    /// Columns and rows of the bucket grid.
    pub fn bucket_dims(&self) -> (usize, usize) {
        (self.grid.nx, self.grid.ny)
    }

    /// Inclusive bucket columns `i0..=i1` and rows `j0..=j1` covering
    /// `[lo, hi]`, or `None` when the box misses the mesh bounds.
    pub fn bucket_span(&self, lo: Point2, hi: Point2) -> Option<[usize; 4]> {
        if hi.x < self.lo.x || hi.y < self.lo.y || lo.x > self.hi.x || lo.y > self.hi.y {
            return None;
        }
        let (i0, j0) = self.grid.cell(lo);
        let (i1, j1) = self.grid.cell(hi);
        Some([i0, i1, j0, j1])
    }
}

/// `n x n` cells over `domain`, each split along its lower-left to
/// upper-right diagonal.
pub fn build_lattice(n: usize, domain: Rect) -> Result<TriMesh, MeshError> {
    if n == 0 {
        return Err(MeshError::NoCells);
    }
    let (w, h) = (domain.width(), domain.height());
    if !(w > 0.0 && h > 0.0) {
        return Err(MeshError::EmptyDomain(domain.lo.x, domain.hi.x, domain.lo.y, domain.hi.y));
    }
    let coord = |k: usize, lo: f64, hi: f64| {
        if k == n {
            hi
        } else {
            lo + (hi - lo) * (k as f64 / n as f64)
        }
    };
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        let y = coord(j, domain.lo.y, domain.hi.y);
        for i in 0..=n {
            vertices.push(Point2::new(coord(i, domain.lo.x, domain.hi.x), y));
        }
    }
    let vid = |i: usize, j: usize| (j * (n + 1) + i) as u32;
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v11, v01) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    TriMesh::from_parts(
        vertices,
        triangles,
        Some(w / n as f64),
        Some(Lattice { n, domain }),
    )
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(k, l)| {
        let l = l.split('#').next().unwrap_or("");
        let toks: Vec<&str> = l.split_whitespace().collect();
        (!toks.is_empty()).then_some((k + 1, toks))
    })
}

fn parse_num<T: std::str::FromStr>(file: &'static str, line: usize, tok: &str) -> Result<T, MeshError> {
    tok.parse().map_err(|_| MeshError::Parse {
        file,
        line,
        msg: format!("cannot parse {tok:?}"),
    })
}

/// Parse the plain-text `.node`/`.ele` pair written by common triangle
/// mesh generators. Vertex numbering starts at whatever index the first
/// vertex line uses (0 or 1); the `.ele` file must use the same base.
pub fn import_mesh(node_text: &str, ele_text: &str) -> Result<TriMesh, MeshError> {
    const NODE: &str = "node";
    const ELE: &str = "ele";
    let mut lines = data_lines(node_text);
    let (hl, header) = lines.next().ok_or(MeshError::Parse {
        file: NODE,
        line: 1,
        msg: "missing header".into(),
    })?;
    let nv: usize = parse_num(NODE, hl, header[0])?;
    if header.len() > 1 {
        let dim: usize = parse_num(NODE, hl, header[1])?;
        if dim != 2 {
            return Err(MeshError::Parse {
                file: NODE,
                line: hl,
                msg: format!("expected dimension 2, got {dim}"),
            });
        }
    }
    let mut vertices = vec![Point2::default(); nv];
    let mut seen = vec![false; nv];
    let mut base: Option<i64> = None;
    for _ in 0..nv {
        let (l, toks) = lines.next().ok_or(MeshError::Parse {
            file: NODE,
            line: hl,
            msg: format!("expected {nv} vertices"),
        })?;
        if toks.len() < 3 {
            return Err(MeshError::Parse {
                file: NODE,
                line: l,
                msg: "vertex line needs index, x and y".into(),
            });
        }
        let idx: i64 = parse_num(NODE, l, toks[0])?;
        let b = *base.get_or_insert(idx);
        if b != 0 && b != 1 {
            return Err(MeshError::Parse {
                file: NODE,
                line: l,
                msg: format!("first vertex index must be 0 or 1, got {idx}"),
            });
        }
        let k = idx - b;
        if k < 0 || k as usize >= nv || seen[k as usize] {
            return Err(MeshError::IndexOutOfRange {
                file: NODE,
                line: l,
                index: idx,
            });
        }
        let x: f64 = parse_num(NODE, l, toks[1])?;
        let y: f64 = parse_num(NODE, l, toks[2])?;
        if !x.is_finite() || !y.is_finite() {
            return Err(MeshError::Parse {
                file: NODE,
                line: l,
                msg: "non-finite coordinate".into(),
            });
        }
        vertices[k as usize] = Point2::new(x, y);
        seen[k as usize] = true;
    }
    let base = base.unwrap_or(0);

    let mut lines = data_lines(ele_text);
    let (hl, header) = lines.next().ok_or(MeshError::Parse {
        file: ELE,
        line: 1,
        msg: "missing header".into(),
    })?;
    let nt: usize = parse_num(ELE, hl, header[0])?;
    if header.len() > 1 {
        let per: usize = parse_num(ELE, hl, header[1])?;
        if per < 3 {
            return Err(MeshError::Parse {
                file: ELE,
                line: hl,
                msg: format!("need 3 nodes per triangle, got {per}"),
            });
        }
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (l, toks) = lines.next().ok_or(MeshError::Parse {
            file: ELE,
            line: hl,
            msg: format!("expected {nt} triangles"),
        })?;
        if toks.len() < 4 {
            return Err(MeshError::Parse {
                file: ELE,
                line: l,
                msg: "triangle line needs index and three vertices".into(),
            });
        }
        let mut t = [0u32; 3];
        for k in 0..3 {
            let idx: i64 = parse_num(ELE, l, toks[k + 1])?;
            let v = idx - base;
            if v < 0 || v as usize >= nv {
                return Err(MeshError::IndexOutOfRange {
                    file: ELE,
                    line: l,
                    index: idx,
                });
            }
            t[k] = v as u32;
        }
        match orient2d(vertices[t[0] as usize], vertices[t[1] as usize], vertices[t[2] as usize]) {
            0 => return Err(MeshError::DegenerateTriangle { line: l }),
            -1 => t.swap(1, 2),
            _ => {}
        }
        triangles.push(t);
    }
    TriMesh::from_parts(vertices, triangles, None, None)
}

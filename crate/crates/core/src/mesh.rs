//! Conforming triangulations with globally oriented edges.

use std::collections::HashMap;
use std::io::{self, Write};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("resolution must be at least 1, got {0}")]
    InvalidResolution(usize),
    #[error("triangle {0} has non-positive signed area")]
    Degenerate(usize),
    #[error("triangle {tri} references node {node}, but there are only {n_nodes} nodes")]
    BadNode {
        tri: usize,
        node: usize,
        n_nodes: usize,
    },
    #[error("edge ({0}, {1}) is shared by more than two triangles")]
    NonManifold(usize, usize),
}

/// Affine map data of one triangle.
#[derive(Debug, Clone, Copy)]
pub struct TriangleGeometry {
    pub p0: [f64; 2],
    /// Columns are `p1 - p0` and `p2 - p0`.
    pub jac: [[f64; 2]; 2],
    pub det: f64,
    /// Constant gradients of the three barycentric coordinates.
    pub grad_lambda: [[f64; 2]; 3],
}

impl TriangleGeometry {
    pub fn area(&self) -> f64 {
        0.5 * self.det
    }

    /// Physical point for reference coordinates `(ξ, η)`.
    pub fn map(&self, r: [f64; 2]) -> [f64; 2] {
        [
            self.p0[0] + self.jac[0][0] * r[0] + self.jac[0][1] * r[1],
            self.p0[1] + self.jac[1][0] * r[0] + self.jac[1][1] * r[1],
        ]
    }

    /// Barycentric coordinates of a physical point.
    pub fn barycentric(&self, x: [f64; 2]) -> [f64; 3] {
        let dx = [x[0] - self.p0[0], x[1] - self.p0[1]];
        let l1 = self.grad_lambda[1][0] * dx[0] + self.grad_lambda[1][1] * dx[1];
        let l2 = self.grad_lambda[2][0] * dx[0] + self.grad_lambda[2][1] * dx[1];
        [1.0 - l1 - l2, l1, l2]
    }
}

/// A conforming triangulation.
///
/// Local edge `k` of a triangle is opposite its vertex `k`, running from
/// vertex `k+1` to vertex `k+2`; its sign is `+1` when that traversal goes
/// from the lower to the higher global node index.
#[derive(Debug, Clone)]
pub struct Mesh {
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    tri_edges: Vec<[(usize, f64); 3]>,
    boundary_edges: Vec<usize>,
    boundary_nodes: Vec<usize>,
    is_boundary_edge: Vec<bool>,
    is_boundary_node: Vec<bool>,
}

impl Mesh {
    /// Builds topology for counterclockwise triangles.
    pub fn from_parts(nodes: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        let n_nodes = nodes.len();
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&node) = tri.iter().find(|&&v| v >= n_nodes) {
                return Err(MeshError::BadNode {
                    tri: t,
                    node,
                    n_nodes,
                });
            }
            if signed_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]) <= 0.0 {
                return Err(MeshError::Degenerate(t));
            }
        }
        let mut lookup: HashMap<(usize, usize), usize> =
            HashMap::with_capacity(3 * triangles.len() / 2 + n_nodes);
        let mut edges = Vec::new();
        let mut count: Vec<u8> = Vec::new();
        let mut tri_edges = Vec::with_capacity(triangles.len());
        for tri in &triangles {
            let mut te = [(0, 0.0); 3];
            for (k, slot) in te.iter_mut().enumerate() {
                let (a, b) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
                let key = (a.min(b), a.max(b));
                let e = *lookup.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    count.push(0);
                    edges.len() - 1
                });
                count[e] += 1;
                if count[e] > 2 {
                    return Err(MeshError::NonManifold(key.0, key.1));
                }
                *slot = (e, if a < b { 1.0 } else { -1.0 });
            }
            tri_edges.push(te);
        }
        let is_boundary_edge: Vec<bool> = count.iter().map(|&c| c == 1).collect();
        let boundary_edges: Vec<usize> =
            (0..edges.len()).filter(|&e| is_boundary_edge[e]).collect();
        let mut is_boundary_node = vec![false; n_nodes];
        for &e in &boundary_edges {
            is_boundary_node[edges[e][0]] = true;
            is_boundary_node[edges[e][1]] = true;
        }
        let boundary_nodes = (0..n_nodes).filter(|&v| is_boundary_node[v]).collect();
        Ok(Self {
            nodes,
            triangles,
            edges,
            tri_edges,
            boundary_edges,
            boundary_nodes,
            is_boundary_edge,
            is_boundary_node,
        })
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Per triangle: `(global edge, sign)` for local edges 0, 1, 2.
    pub fn tri_edges(&self) -> &[[(usize, f64); 3]] {
        &self.tri_edges
    }

    pub fn boundary_edges(&self) -> &[usize] {
        &self.boundary_edges
    }

    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary_nodes
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.is_boundary_edge[e]
    }

    pub fn is_boundary_node(&self, v: usize) -> bool {
        self.is_boundary_node[v]
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn vertices(&self, t: usize) -> [[f64; 2]; 3] {
        self.triangles[t].map(|v| self.nodes[v])
    }

    pub fn geometry(&self, t: usize) -> TriangleGeometry {
        let [p0, p1, p2] = self.vertices(t);
        let jac = [
            [p1[0] - p0[0], p2[0] - p0[0]],
            [p1[1] - p0[1], p2[1] - p0[1]],
        ];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        // Rows of J⁻¹ are ∇λ1 and ∇λ2.
        let g1 = [jac[1][1] / det, -jac[0][1] / det];
        let g2 = [-jac[1][0] / det, jac[0][0] / det];
        TriangleGeometry {
            p0,
            jac,
            det,
            grad_lambda: [[-g1[0] - g2[0], -g1[1] - g2[1]], g1, g2],
        }
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.vertices(t);
        signed_area(a, b, c)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.area(t)).sum()
    }

    /// Longest edge of triangle `t`.
    pub fn diameter(&self, t: usize) -> f64 {
        let [a, b, c] = self.vertices(t);
        dist(a, b).max(dist(b, c)).max(dist(c, a))
    }

    /// Inradius over diameter.
    pub fn quality(&self, t: usize) -> f64 {
        let [a, b, c] = self.vertices(t);
        let perimeter = dist(a, b) + dist(b, c) + dist(c, a);
        2.0 * self.area(t) / perimeter / self.diameter(t)
    }

    /// Largest triangle diameter.
    pub fn h(&self) -> f64 {
        (0..self.n_triangles())
            .map(|t| self.diameter(t))
            .fold(0.0, f64::max)
    }

    pub fn min_quality(&self) -> f64 {
        (0..self.n_triangles())
            .map(|t| self.quality(t))
            .fold(f64::INFINITY, f64::min)
    }

    /// Euler characteristic `V − E + T`.
    pub fn euler_characteristic(&self) -> i64 {
        self.n_nodes() as i64 - self.n_edges() as i64 + self.n_triangles() as i64
    }

    /// Plain-text export: a header `V B T`, then `V` lines `x y`, `T` lines
    /// `i j k` and `B` boundary edge lines `i j` (all 0-based).
    pub fn write_text<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(
            w,
            "{} {} {}",
            self.n_nodes(),
            self.boundary_edges.len(),
            self.n_triangles()
        )?;
        for p in &self.nodes {
            writeln!(w, "{:.17e} {:.17e}", p[0], p[1])?;
        }
        for t in &self.triangles {
            writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
        }
        for &e in &self.boundary_edges {
            writeln!(w, "{} {}", self.edges[e][0], self.edges[e][1])?;
        }
        Ok(())
    }

    /// Triangles as sorted coordinate triples, sorted; equal for meshes that
    /// differ only by numbering.
    pub fn canonical_form(&self) -> Vec<[[i64; 2]; 3]> {
        let key = |p: [f64; 2]| [(p[0] * 1e9).round() as i64, (p[1] * 1e9).round() as i64];
        let mut tris: Vec<[[i64; 2]; 3]> = self
            .triangles
            .iter()
            .map(|t| {
                let mut v = t.map(|i| key(self.nodes[i]));
                v.sort();
                v
            })
            .collect();
        tris.sort();
        tris
    }
}

fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Splits the lattice cells listed in `cells` (lower-left node, lower-right,
/// upper-right, upper-left) along the lower-left to upper-right diagonal.
fn split_cells(cells: impl Iterator<Item = [usize; 4]>) -> Vec<[usize; 3]> {
    let mut tris = Vec::new();
    for [a, b, c, d] in cells {
        tris.push([a, b, c]);
        tris.push([a, c, d]);
    }
    tris
}

/// `M × M` cells on the unit square, each split into two triangles.
pub fn uniform_unit_square(m: usize) -> Result<Mesh, MeshError> {
    if m == 0 {
        return Err(MeshError::InvalidResolution(m));
    }
    let h = 1.0 / m as f64;
    let idx = |i: usize, j: usize| j * (m + 1) + i;
    let nodes = (0..=m)
        .flat_map(|j| (0..=m).map(move |i| [i as f64 * h, j as f64 * h]))
        .collect();
    let cells = (0..m).flat_map(|j| {
        (0..m).map(move |i| [idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)])
    });
    Mesh::from_parts(nodes, split_cells(cells))
}

/// The L-shape `(−1,1)² ∖ (0,1]×[−1,0)` with lattice spacing `1/M`.
pub fn uniform_lshape(m: usize) -> Result<Mesh, MeshError> {
    if m == 0 {
        return Err(MeshError::InvalidResolution(m));
    }
    let n = 2 * m + 1;
    let h = 1.0 / m as f64;
    // Lattice point (i, j) sits at (−1 + i h, −1 + j h); the removed quadrant is i > m, j < m.
    let inside = |i: usize, j: usize| !(i > m && j < m);
    let mut index = vec![usize::MAX; n * n];
    let mut nodes = Vec::with_capacity(n * n - m * m);
    for j in 0..n {
        for i in 0..n {
            if inside(i, j) {
                index[j * n + i] = nodes.len();
                nodes.push([-1.0 + i as f64 * h, -1.0 + j as f64 * h]);
            }
        }
    }
    let id = |i: usize, j: usize| index[j * n + i];
    let cells = (0..2 * m).flat_map(|j| {
        (0..2 * m)
            .filter(move |&i| !(i >= m && j < m))
            .map(move |i| [id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)])
    });
    let tris = split_cells(cells);
    Mesh::from_parts(nodes, tris)
}

/// Red refinement: each triangle into four similar children.
///
/// The midpoint of edge `e` becomes node `V + e`.
pub fn refine_uniform(mesh: &Mesh) -> Mesh {
    let nv = mesh.n_nodes();
    let mut nodes = mesh.nodes.clone();
    for &[a, b] in &mesh.edges {
        let (pa, pb) = (mesh.nodes[a], mesh.nodes[b]);
        nodes.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
    }
    let mut tris = Vec::with_capacity(4 * mesh.n_triangles());
    for (t, &[v0, v1, v2]) in mesh.triangles.iter().enumerate() {
        let te = mesh.tri_edges[t];
        let (m12, m20, m01) = (nv + te[0].0, nv + te[1].0, nv + te[2].0);
        tris.push([v0, m01, m20]);
        tris.push([m01, v1, m12]);
        tris.push([m20, m12, v2]);
        tris.push([m01, m12, m20]);
    }
    Mesh::from_parts(nodes, tris).expect("red refinement preserves validity")
}

/// Exponent of the default grading law: sweep `s` refines the disk of radius
/// `2^(−s·κ)` with `κ = 1/(1 − μ)`.
///
/// `κ = 1` is pure geometric grading (local size proportional to the distance to the corner).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grading {
    pub radius_exponent: f64,
}

impl Grading {
    pub const GEOMETRIC: Self = Self {
        radius_exponent: 1.0,
    };

    /// Local mesh size `h ρ^{1−μ}`.
    pub fn algebraic(mu: f64) -> Self {
        Self {
            radius_exponent: 1.0 / (1.0 - mu),
        }
    }

    pub fn radius(&self, sweep: usize) -> f64 {
        (2.0f64).powf(-(sweep as f64) * self.radius_exponent)
    }
}

/// Uniform L-shape refined toward the reentrant corner: sweep `s = 1..=j`
/// red-refines every triangle meeting the disk of radius `2^{−s}`.
pub fn graded_lshape(j: usize, m0: usize) -> Result<Mesh, MeshError> {
    graded_lshape_with(j, m0, Grading::GEOMETRIC)
}

/// [`graded_lshape`] with an explicit grading law.
pub fn graded_lshape_with(j: usize, m0: usize, grading: Grading) -> Result<Mesh, MeshError> {
    let base = uniform_lshape(m0)?;
    if j == 0 {
        return Ok(base);
    }
    let mut h = RedGreen::new(&base);
    for s in 1..=j {
        let r = grading.radius(s);
        let marked: Vec<usize> = (0..h.leaves.len())
            .filter(|&l| distance_to_origin(h.tri_coords(h.leaves[l])) < r)
            .collect();
        h.refine(&marked);
    }
    Ok(h.finish())
}

fn distance_to_origin(tri: [[f64; 2]; 3]) -> f64 {
    let o = [0.0, 0.0];
    if point_in_triangle(o, tri) {
        return 0.0;
    }
    (0..3)
        .map(|k| point_segment_distance(o, tri[k], tri[(k + 1) % 3]))
        .fold(f64::INFINITY, f64::min)
}

fn point_in_triangle(p: [f64; 2], [a, b, c]: [[f64; 2]; 3]) -> bool {
    let s1 = signed_area(a, b, p);
    let s2 = signed_area(b, c, p);
    let s3 = signed_area(c, a, p);
    s1 >= 0.0 && s2 >= 0.0 && s3 >= 0.0
}

fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / (d[0] * d[0] + d[1] * d[1]))
        .clamp(0.0, 1.0);
    dist(p, [a[0] + t * d[0], a[1] + t * d[1]])
}

/// Red refinement hierarchy with one-irregular closure and final green bisection.
struct RedGreen {
    nodes: Vec<[f64; 2]>,
    // Leaves are the current (possibly non-conforming) red triangles.
    leaves: Vec<[usize; 3]>,
    midpoints: HashMap<(usize, usize), usize>,
}

impl RedGreen {
    fn new(mesh: &Mesh) -> Self {
        Self {
            nodes: mesh.nodes.clone(),
            leaves: mesh.triangles.clone(),
            midpoints: HashMap::new(),
        }
    }

    fn tri_coords(&self, t: [usize; 3]) -> [[f64; 2]; 3] {
        t.map(|v| self.nodes[v])
    }

    fn midpoint(&self, a: usize, b: usize) -> Option<usize> {
        self.midpoints.get(&(a.min(b), a.max(b))).copied()
    }

    fn midpoint_or_insert(&mut self, a: usize, b: usize) -> usize {
        let key = (a.min(b), a.max(b));
        if let Some(&m) = self.midpoints.get(&key) {
            return m;
        }
        let (pa, pb) = (self.nodes[a], self.nodes[b]);
        self.nodes
            .push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
        let m = self.nodes.len() - 1;
        self.midpoints.insert(key, m);
        m
    }

    fn needs_red(&self, t: [usize; 3]) -> bool {
        let mut split = 0;
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            if let Some(m) = self.midpoint(a, b) {
                split += 1;
                // Keep hanging nodes one-irregular.
                if self.midpoint(a, m).is_some() || self.midpoint(m, b).is_some() {
                    return true;
                }
            }
        }
        split >= 2
    }

    fn refine(&mut self, marked: &[usize]) {
        let mut flag = vec![false; self.leaves.len()];
        for &l in marked {
            flag[l] = true;
        }
        loop {
            let mut next = Vec::with_capacity(self.leaves.len() + 3 * marked.len());
            let mut any = false;
            let leaves = std::mem::take(&mut self.leaves);
            for (l, &[v0, v1, v2]) in leaves.iter().enumerate() {
                if flag.get(l).copied().unwrap_or(false) {
                    any = true;
                    let m01 = self.midpoint_or_insert(v0, v1);
                    let m12 = self.midpoint_or_insert(v1, v2);
                    let m20 = self.midpoint_or_insert(v2, v0);
                    next.push([v0, m01, m20]);
                    next.push([m01, v1, m12]);
                    next.push([m20, m12, v2]);
                    next.push([m01, m12, m20]);
                } else {
                    next.push([v0, v1, v2]);
                }
            }
            self.leaves = next;
            if !any {
                break;
            }
            flag = self.leaves.iter().map(|&t| self.needs_red(t)).collect();
            if !flag.iter().any(|&f| f) {
                break;
            }
        }
    }

    fn finish(self) -> Mesh {
        let mut tris = Vec::with_capacity(self.leaves.len() + self.leaves.len() / 4);
        for &t in &self.leaves {
            let hanging = (0..3).find_map(|k| self.midpoint(t[k], t[(k + 1) % 3]).map(|m| (k, m)));
            match hanging {
                // Green bisection from the midpoint to the opposite vertex.
                Some((k, m)) => {
                    let (a, b, c) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
                    tris.push([a, m, c]);
                    tris.push([m, b, c]);
                }
                None => tris.push(t),
            }
        }
        Mesh::from_parts(self.nodes, tris).expect("closure yields a conforming mesh")
    }
}

/// Nonoverlapping bucket grid for point location.
pub struct PointLocator<'a> {
    mesh: &'a Mesh,
    origin: [f64; 2],
    cell: [f64; 2],
    dims: [usize; 2],
    buckets: Vec<Vec<usize>>,
}

impl<'a> PointLocator<'a> {
    pub fn new(mesh: &'a Mesh) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in mesh.nodes() {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        let side = (mesh.n_triangles() as f64).sqrt().ceil().max(1.0) as usize;
        let dims = [side, side];
        let cell = [
            ((hi[0] - lo[0]) / side as f64).max(f64::MIN_POSITIVE),
            ((hi[1] - lo[1]) / side as f64).max(f64::MIN_POSITIVE),
        ];
        let mut loc = Self {
            mesh,
            origin: lo,
            cell,
            dims,
            buckets: vec![Vec::new(); side * side],
        };
        for t in 0..mesh.n_triangles() {
            let v = mesh.vertices(t);
            let (mut a, mut b) = ([usize::MAX; 2], [0usize; 2]);
            for p in v {
                let c = loc.cell_of(p);
                for d in 0..2 {
                    a[d] = a[d].min(c[d]);
                    b[d] = b[d].max(c[d]);
                }
            }
            for j in a[1]..=b[1] {
                for i in a[0]..=b[0] {
                    loc.buckets[j * dims[0] + i].push(t);
                }
            }
        }
        loc
    }

    fn cell_of(&self, p: [f64; 2]) -> [usize; 2] {
        let mut c = [0; 2];
        for d in 0..2 {
            let k = ((p[d] - self.origin[d]) / self.cell[d]).floor();
            c[d] = (k.max(0.0) as usize).min(self.dims[d] - 1);
        }
        c
    }

    /// Triangle containing `p` and its barycentric coordinates, if any.
    pub fn locate(&self, p: [f64; 2]) -> Option<(usize, [f64; 3])> {
        const TOL: f64 = 1e-12;
        let c = self.cell_of(p);
        if (0..2).any(|d| {
            p[d] < self.origin[d] - TOL
                || p[d] > self.origin[d] + self.cell[d] * self.dims[d] as f64 + TOL
        }) {
            return None;
        }
        self.buckets[c[1] * self.dims[0] + c[0]]
            .iter()
            .find_map(|&t| {
                let l = self.mesh.geometry(t).barycentric(p);
                l.iter().all(|&x| x >= -TOL).then_some((t, l))
            })
    }
}

/// The three mesh families used in convergence studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFamily {
    UnitSquareUniform,
    LShapeUniform,
    LShapeGraded,
}

impl MeshFamily {
    /// Member of the family for `parameter` (resolution `M`, or grading level for
    /// [`MeshFamily::LShapeGraded`]).
    pub fn build(&self, parameter: usize) -> Result<Mesh, MeshError> {
        match self {
            Self::UnitSquareUniform => uniform_unit_square(parameter),
            Self::LShapeUniform => uniform_lshape(parameter),
            Self::LShapeGraded => {
                let (j, m0, grading) = graded_level(parameter);
                graded_lshape_with(j, m0, grading)
            }
        }
    }

    pub fn is_uniform(&self) -> bool {
        !matches!(self, Self::LShapeGraded)
    }
}

/// Grading strength used by the graded family: local size `h₀ ρ^{1−μ}`.
pub const GRADED_FAMILY_MU: f64 = 0.25;

/// Sweeps, base resolution and law for level `i` of the graded family.
///
/// Level `i` starts from `M₀ = 4·2^i` and refines until the corner elements
/// are small enough that their error no longer dominates the `h₀²` error elsewhere.
pub fn graded_level(i: usize) -> (usize, usize, Grading) {
    let m0 = 4usize << i;
    let sweeps = 3 * (i + 2);
    (sweeps, m0, Grading::algebraic(GRADED_FAMILY_MU))
}

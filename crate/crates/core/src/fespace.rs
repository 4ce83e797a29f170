//! Reference bases, global dof maps and interpolation.
//!
//! Local P2 ordering is `[v0, v1, v2, e0, e1, e2]` with edge `k` opposite
//! vertex `k`. Vector P2 stores both components blocked: global dof
//! `c·(V+E) + s` for scalar dof `s`, local dof `6c + k`.

use std::sync::Arc;

use thiserror::Error;

use crate::mesh::Mesh;
use crate::quadrature;

/// Edge-moment quadrature size used unless a caller asks otherwise.
pub const DEFAULT_EDGE_POINTS: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeError {
    #[error("{kind:?} expects {expected} values per point")]
    KindMismatch {
        kind: ElementKind,
        expected: &'static str,
    },
    #[error("coefficient vector has length {got}, space has {expected} dofs")]
    Length { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementKind {
    LagrangeP1,
    LagrangeP2,
    VectorP2,
    /// Lowest-order Nédélec, first type (one tangential moment per edge).
    Nedelec1,
    /// Lowest-order Nédélec, second type: full P1 with two moments per edge.
    Nedelec2,
}

impl ElementKind {
    pub fn local_dofs(self) -> usize {
        match self {
            Self::LagrangeP1 | Self::Nedelec1 => 3,
            Self::LagrangeP2 | Self::Nedelec2 => 6,
            Self::VectorP2 => 12,
        }
    }

    pub fn is_edge_element(self) -> bool {
        matches!(self, Self::Nedelec1 | Self::Nedelec2)
    }

    pub fn is_vector_valued(self) -> bool {
        matches!(self, Self::VectorP2 | Self::Nedelec1 | Self::Nedelec2)
    }
}

/// Scalar P1 basis values and gradients.
#[inline]
pub fn p1_basis(l: [f64; 3], gl: &[[f64; 2]; 3]) -> ([f64; 3], [[f64; 2]; 3]) {
    (l, *gl)
}

/// Scalar P2 basis values and gradients.
#[inline]
pub fn p2_basis(l: [f64; 3], gl: &[[f64; 2]; 3]) -> ([f64; 6], [[f64; 2]; 6]) {
    let mut v = [0.0; 6];
    let mut g = [[0.0; 2]; 6];
    for i in 0..3 {
        v[i] = l[i] * (2.0 * l[i] - 1.0);
        let s = 4.0 * l[i] - 1.0;
        g[i] = [s * gl[i][0], s * gl[i][1]];
        let (a, b) = ((i + 1) % 3, (i + 2) % 3);
        v[3 + i] = 4.0 * l[a] * l[b];
        g[3 + i] = [
            4.0 * (l[a] * gl[b][0] + l[b] * gl[a][0]),
            4.0 * (l[a] * gl[b][1] + l[b] * gl[a][1]),
        ];
    }
    (v, g)
}

#[inline]
fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Edge-element basis values and scalar curls, already multiplied by the
/// global orientation signs. Returns the number of local functions.
#[inline]
pub fn edge_basis(
    kind: ElementKind,
    l: [f64; 3],
    gl: &[[f64; 2]; 3],
    signs: [f64; 3],
    vals: &mut [[f64; 2]; 6],
    curls: &mut [f64; 6],
) -> usize {
    let first = kind == ElementKind::Nedelec1;
    for k in 0..3 {
        let (a, b) = ((k + 1) % 3, (k + 2) % 3);
        let s = signs[k];
        let w = [
            s * (l[a] * gl[b][0] - l[b] * gl[a][0]),
            s * (l[a] * gl[b][1] - l[b] * gl[a][1]),
        ];
        let c = s * 2.0 * cross(gl[a], gl[b]);
        if first {
            vals[k] = w;
            curls[k] = c;
        } else {
            vals[2 * k] = w;
            curls[2 * k] = c;
            vals[2 * k + 1] = [
                -(l[a] * gl[b][0] + l[b] * gl[a][0]),
                -(l[a] * gl[b][1] + l[b] * gl[a][1]),
            ];
            curls[2 * k + 1] = 0.0;
        }
    }
    if first {
        3
    } else {
        6
    }
}

/// Basis data at one point, for [`tabulate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulation {
    /// Scalar elements: one entry per basis in `[.][0]`; vector elements use both.
    pub values: Vec<[f64; 2]>,
    /// Scalar elements only: basis gradients. Vector P2: row-major 2×2 per basis.
    pub grads: Vec<[[f64; 2]; 2]>,
    /// Edge elements only.
    pub curls: Vec<f64>,
}

/// Basis values at barycentric point `l` of the reference triangle, with
/// positive edge orientations.
pub fn tabulate(kind: ElementKind, l: [f64; 3]) -> Tabulation {
    // Reference triangle (0,0), (1,0), (0,1).
    let gl = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
    tabulate_on(kind, l, &gl, [1.0; 3])
}

pub fn tabulate_on(
    kind: ElementKind,
    l: [f64; 3],
    gl: &[[f64; 2]; 3],
    signs: [f64; 3],
) -> Tabulation {
    match kind {
        ElementKind::LagrangeP1 => {
            let (v, g) = p1_basis(l, gl);
            Tabulation {
                values: v.iter().map(|&x| [x, 0.0]).collect(),
                grads: g.iter().map(|&x| [x, [0.0; 2]]).collect(),
                curls: Vec::new(),
            }
        }
        ElementKind::LagrangeP2 => {
            let (v, g) = p2_basis(l, gl);
            Tabulation {
                values: v.iter().map(|&x| [x, 0.0]).collect(),
                grads: g.iter().map(|&x| [x, [0.0; 2]]).collect(),
                curls: Vec::new(),
            }
        }
        ElementKind::VectorP2 => {
            let (v, g) = p2_basis(l, gl);
            let mut t = Tabulation {
                values: Vec::with_capacity(12),
                grads: Vec::with_capacity(12),
                curls: Vec::new(),
            };
            for c in 0..2 {
                for k in 0..6 {
                    let mut val = [0.0; 2];
                    val[c] = v[k];
                    let mut grad = [[0.0; 2]; 2];
                    grad[c] = g[k];
                    t.values.push(val);
                    t.grads.push(grad);
                }
            }
            t
        }
        ElementKind::Nedelec1 | ElementKind::Nedelec2 => {
            let mut vals = [[0.0; 2]; 6];
            let mut curls = [0.0; 6];
            let n = edge_basis(kind, l, gl, signs, &mut vals, &mut curls);
            Tabulation {
                values: vals[..n].to_vec(),
                grads: Vec::new(),
                curls: curls[..n].to_vec(),
            }
        }
    }
}

/// Global numbering of one discrete space on one mesh.
#[derive(Debug, Clone)]
pub struct DofMap {
    kind: ElementKind,
    mesh: Arc<Mesh>,
    cell_dofs: Vec<usize>,
    cell_signs: Vec<f64>,
    n_dofs: usize,
    boundary_dofs: Vec<usize>,
    is_boundary: Vec<bool>,
}

impl DofMap {
    pub fn new(mesh: Arc<Mesh>, kind: ElementKind) -> Self {
        let nv = mesh.n_nodes();
        let ne = mesh.n_edges();
        let nl = kind.local_dofs();
        let nt = mesh.n_triangles();
        let mut cell_dofs = Vec::with_capacity(nl * nt);
        let mut cell_signs = Vec::with_capacity(nl * nt);
        for t in 0..nt {
            let tri = mesh.triangles()[t];
            let te = mesh.tri_edges()[t];
            match kind {
                ElementKind::LagrangeP1 => {
                    cell_dofs.extend_from_slice(&tri);
                    cell_signs.extend_from_slice(&[1.0; 3]);
                }
                ElementKind::LagrangeP2 | ElementKind::VectorP2 => {
                    let comps = if kind == ElementKind::VectorP2 { 2 } else { 1 };
                    for c in 0..comps {
                        let off = c * (nv + ne);
                        cell_dofs.extend(tri.iter().map(|&v| off + v));
                        cell_dofs.extend(te.iter().map(|&(e, _)| off + nv + e));
                        cell_signs.extend_from_slice(&[1.0; 6]);
                    }
                }
                ElementKind::Nedelec1 => {
                    for &(e, s) in &te {
                        cell_dofs.push(e);
                        cell_signs.push(s);
                    }
                }
                ElementKind::Nedelec2 => {
                    for &(e, s) in &te {
                        cell_dofs.extend_from_slice(&[2 * e, 2 * e + 1]);
                        cell_signs.extend_from_slice(&[s, 1.0]);
                    }
                }
            }
        }
        let n_dofs = match kind {
            ElementKind::LagrangeP1 => nv,
            ElementKind::LagrangeP2 => nv + ne,
            ElementKind::VectorP2 => 2 * (nv + ne),
            ElementKind::Nedelec1 => ne,
            ElementKind::Nedelec2 => 2 * ne,
        };
        let mut boundary_dofs = Vec::new();
        match kind {
            ElementKind::LagrangeP1 => boundary_dofs.extend_from_slice(mesh.boundary_nodes()),
            ElementKind::LagrangeP2 | ElementKind::VectorP2 => {
                let comps = if kind == ElementKind::VectorP2 { 2 } else { 1 };
                for c in 0..comps {
                    let off = c * (nv + ne);
                    boundary_dofs.extend(mesh.boundary_nodes().iter().map(|&v| off + v));
                    boundary_dofs.extend(mesh.boundary_edges().iter().map(|&e| off + nv + e));
                }
            }
            ElementKind::Nedelec1 => boundary_dofs.extend_from_slice(mesh.boundary_edges()),
            ElementKind::Nedelec2 => {
                for &e in mesh.boundary_edges() {
                    boundary_dofs.extend_from_slice(&[2 * e, 2 * e + 1]);
                }
            }
        }
        boundary_dofs.sort_unstable();
        let mut is_boundary = vec![false; n_dofs];
        for &d in &boundary_dofs {
            is_boundary[d] = true;
        }
        Self {
            kind,
            mesh,
            cell_dofs,
            cell_signs,
            n_dofs,
            boundary_dofs,
            is_boundary,
        }
    }

    pub fn kind(&self) -> ElementKind {
        self.kind
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn local_dofs(&self) -> usize {
        self.kind.local_dofs()
    }

    pub fn cell_dofs(&self, t: usize) -> &[usize] {
        let n = self.local_dofs();
        &self.cell_dofs[n * t..n * (t + 1)]
    }

    /// Signs of the local dofs of triangle `t` (±1 for edge moments, else 1).
    pub fn cell_signs(&self, t: usize) -> &[f64] {
        let n = self.local_dofs();
        &self.cell_signs[n * t..n * (t + 1)]
    }

    /// Orientation signs of the three local edges of `t`.
    pub fn edge_signs(&self, t: usize) -> [f64; 3] {
        let te = self.mesh.tri_edges()[t];
        [te[0].1, te[1].1, te[2].1]
    }

    pub fn boundary_dofs(&self) -> &[usize] {
        &self.boundary_dofs
    }

    pub fn is_boundary_dof(&self, d: usize) -> bool {
        self.is_boundary[d]
    }

    /// Scalar P2 dofs per component (`V + E`), for the vector space.
    pub fn component_stride(&self) -> usize {
        self.mesh.n_nodes() + self.mesh.n_edges()
    }

    fn expect_scalar(&self) -> Result<(), FeError> {
        if self.kind.is_vector_valued() {
            return Err(FeError::KindMismatch {
                kind: self.kind,
                expected: "vector",
            });
        }
        Ok(())
    }

    fn expect_vector(&self) -> Result<(), FeError> {
        if !self.kind.is_vector_valued() {
            return Err(FeError::KindMismatch {
                kind: self.kind,
                expected: "scalar",
            });
        }
        Ok(())
    }

    /// Physical coordinates of every Lagrange node (vertices, then edge midpoints).
    fn lagrange_point(&self, s: usize) -> [f64; 2] {
        let nv = self.mesh.n_nodes();
        if s < nv {
            self.mesh.nodes()[s]
        } else {
            let [a, b] = self.mesh.edges()[s - nv];
            let (pa, pb) = (self.mesh.nodes()[a], self.mesh.nodes()[b]);
            [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
        }
    }

    /// Value of the dof `d` of the interpolant of a scalar field.
    fn scalar_dof(&self, d: usize, f: &dyn Fn([f64; 2]) -> f64) -> f64 {
        f(self.lagrange_point(d))
    }

    /// Edge moments `[∫ f·τ ds, 3∫ f·τ (2s−1) ds]` along edge `e` from its lower
    /// to its higher node, with `τ = x_hi − x_lo` and `s ∈ [0, 1]`.
    pub fn edge_moments(
        &self,
        e: usize,
        f: &dyn Fn([f64; 2]) -> [f64; 2],
        npoints: usize,
    ) -> [f64; 2] {
        let [a, b] = self.mesh.edges()[e];
        let (pa, pb) = (self.mesh.nodes()[a], self.mesh.nodes()[b]);
        let tau = [pb[0] - pa[0], pb[1] - pa[1]];
        let rule = quadrature::edge(npoints);
        let mut m = [0.0; 2];
        for (&s, &w) in rule.points.iter().zip(&rule.weights) {
            let v = f([pa[0] + s * tau[0], pa[1] + s * tau[1]]);
            let ft = v[0] * tau[0] + v[1] * tau[1];
            m[0] += w * ft;
            m[1] += 3.0 * w * ft * (2.0 * s - 1.0);
        }
        m
    }

    fn vector_dof(&self, d: usize, f: &dyn Fn([f64; 2]) -> [f64; 2], npoints: usize) -> f64 {
        match self.kind {
            ElementKind::VectorP2 => {
                let stride = self.component_stride();
                f(self.lagrange_point(d % stride))[d / stride]
            }
            ElementKind::Nedelec1 => self.edge_moments(d, f, npoints)[0],
            ElementKind::Nedelec2 => self.edge_moments(d / 2, f, npoints)[d % 2],
            _ => unreachable!("checked by expect_vector"),
        }
    }

    /// Nodal interpolant of a scalar field.
    pub fn interpolate_scalar(
        self: &Arc<Self>,
        f: &dyn Fn([f64; 2]) -> f64,
    ) -> Result<FeFunction, FeError> {
        self.expect_scalar()?;
        let coeffs = (0..self.n_dofs).map(|d| self.scalar_dof(d, f)).collect();
        Ok(FeFunction::from_parts(self.clone(), coeffs))
    }

    /// Canonical interpolant of a vector field: nodal values for vector P2,
    /// tangential edge moments for edge elements.
    pub fn interpolate_vector(
        self: &Arc<Self>,
        f: &dyn Fn([f64; 2]) -> [f64; 2],
    ) -> Result<FeFunction, FeError> {
        self.interpolate_vector_with(f, DEFAULT_EDGE_POINTS)
    }

    pub fn interpolate_vector_with(
        self: &Arc<Self>,
        f: &dyn Fn([f64; 2]) -> [f64; 2],
        edge_points: usize,
    ) -> Result<FeFunction, FeError> {
        self.expect_vector()?;
        let coeffs = (0..self.n_dofs)
            .map(|d| self.vector_dof(d, f, edge_points))
            .collect();
        Ok(FeFunction::from_parts(self.clone(), coeffs))
    }

    /// Prescribed values on the boundary dofs of a scalar space.
    pub fn essential_bc_scalar(
        &self,
        g: &dyn Fn([f64; 2]) -> f64,
    ) -> Result<Vec<(usize, f64)>, FeError> {
        self.expect_scalar()?;
        Ok(self
            .boundary_dofs
            .iter()
            .map(|&d| (d, self.scalar_dof(d, g)))
            .collect())
    }

    /// Prescribed values on the boundary dofs of a vector space; for edge
    /// elements only the tangential trace of `g` enters.
    pub fn essential_bc_vector(
        &self,
        g: &dyn Fn([f64; 2]) -> [f64; 2],
        edge_points: usize,
    ) -> Result<Vec<(usize, f64)>, FeError> {
        self.expect_vector()?;
        Ok(self
            .boundary_dofs
            .iter()
            .map(|&d| (d, self.vector_dof(d, g, edge_points)))
            .collect())
    }

    /// Coefficients in this edge space of `∇s` for a P1 function `s`.
    pub fn gradient_coefficients(&self, s: &[f64]) -> Vec<f64> {
        assert!(self.kind.is_edge_element(), "gradients live in edge spaces");
        assert_eq!(s.len(), self.mesh.n_nodes());
        let mut out = vec![0.0; self.n_dofs];
        for (e, &[a, b]) in self.mesh.edges().iter().enumerate() {
            let jump = s[b] - s[a];
            match self.kind {
                ElementKind::Nedelec1 => out[e] = jump,
                _ => out[2 * e] = jump,
            }
        }
        out
    }
}

/// Pointwise data of a discrete field at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PointValue {
    pub value: [f64; 2],
    /// `grad[c]` is the gradient of component `c` (scalar fields use `grad[0]`).
    pub grad: [[f64; 2]; 2],
    pub curl: f64,
}

/// A discrete function: a space plus coefficients.
#[derive(Debug, Clone)]
pub struct FeFunction {
    space: Arc<DofMap>,
    coeffs: Vec<f64>,
}

impl FeFunction {
    pub fn new(space: Arc<DofMap>, coeffs: Vec<f64>) -> Result<Self, FeError> {
        if coeffs.len() != space.n_dofs() {
            return Err(FeError::Length {
                expected: space.n_dofs(),
                got: coeffs.len(),
            });
        }
        Ok(Self { space, coeffs })
    }

    fn from_parts(space: Arc<DofMap>, coeffs: Vec<f64>) -> Self {
        debug_assert_eq!(coeffs.len(), space.n_dofs());
        Self { space, coeffs }
    }

    pub fn zero(space: Arc<DofMap>) -> Self {
        let n = space.n_dofs();
        Self::from_parts(space, vec![0.0; n])
    }

    pub fn space(&self) -> &Arc<DofMap> {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Evaluates in triangle `t` at barycentric point `l`.
    pub fn eval(&self, t: usize, l: [f64; 3]) -> PointValue {
        let geom = self.space.mesh().geometry(t);
        self.eval_with(t, l, &geom.grad_lambda)
    }

    /// As [`FeFunction::eval`], with precomputed barycentric gradients.
    pub fn eval_with(&self, t: usize, l: [f64; 3], gl: &[[f64; 2]; 3]) -> PointValue {
        let dofs = self.space.cell_dofs(t);
        let mut out = PointValue::default();
        match self.space.kind() {
            ElementKind::LagrangeP1 => {
                for i in 0..3 {
                    let c = self.coeffs[dofs[i]];
                    out.value[0] += c * l[i];
                    out.grad[0][0] += c * gl[i][0];
                    out.grad[0][1] += c * gl[i][1];
                }
            }
            ElementKind::LagrangeP2 => {
                let (v, g) = p2_basis(l, gl);
                for i in 0..6 {
                    let c = self.coeffs[dofs[i]];
                    out.value[0] += c * v[i];
                    out.grad[0][0] += c * g[i][0];
                    out.grad[0][1] += c * g[i][1];
                }
            }
            ElementKind::VectorP2 => {
                let (v, g) = p2_basis(l, gl);
                for comp in 0..2 {
                    for i in 0..6 {
                        let c = self.coeffs[dofs[6 * comp + i]];
                        out.value[comp] += c * v[i];
                        out.grad[comp][0] += c * g[i][0];
                        out.grad[comp][1] += c * g[i][1];
                    }
                }
            }
            kind => {
                let mut vals = [[0.0; 2]; 6];
                let mut curls = [0.0; 6];
                let n = edge_basis(kind, l, gl, self.space.edge_signs(t), &mut vals, &mut curls);
                for i in 0..n {
                    let c = self.coeffs[dofs[i]];
                    out.value[0] += c * vals[i][0];
                    out.value[1] += c * vals[i][1];
                    out.curl += c * curls[i];
                }
            }
        }
        if self.space.kind() == ElementKind::VectorP2 {
            out.curl = out.grad[1][0] - out.grad[0][1];
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{uniform_lshape, uniform_unit_square};

    fn space(m: usize, kind: ElementKind) -> Arc<DofMap> {
        Arc::new(DofMap::new(Arc::new(uniform_unit_square(m).unwrap()), kind))
    }

    #[test]
    fn kronecker_properties() {
        let t = tabulate(ElementKind::LagrangeP1, [1.0, 0.0, 0.0]);
        assert_eq!(
            t.values.iter().map(|v| v[0]).collect::<Vec<_>>(),
            vec![1.0, 0.0, 0.0]
        );
        let t = tabulate(ElementKind::LagrangeP2, [0.5, 0.5, 0.0]);
        let v: Vec<f64> = t.values.iter().map(|v| v[0]).collect();
        assert_eq!(v, vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn nedelec_reference_moments_are_kronecker() {
        let verts = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let rule = quadrature::edge(4);
        for kind in [ElementKind::Nedelec1, ElementKind::Nedelec2] {
            let n = kind.local_dofs();
            for m in 0..3 {
                let (a, b) = ((m + 1) % 3, (m + 2) % 3);
                let tau = [verts[b][0] - verts[a][0], verts[b][1] - verts[a][1]];
                let mut mom = vec![[0.0; 2]; n];
                for (&s, &w) in rule.points.iter().zip(&rule.weights) {
                    let mut l = [0.0; 3];
                    l[a] = 1.0 - s;
                    l[b] = s;
                    let t = tabulate(kind, l);
                    for (i, v) in t.values.iter().enumerate() {
                        let ft = v[0] * tau[0] + v[1] * tau[1];
                        mom[i][0] += w * ft;
                        mom[i][1] += 3.0 * w * ft * (2.0 * s - 1.0);
                    }
                }
                for (i, mi) in mom.iter().enumerate() {
                    if kind == ElementKind::Nedelec1 {
                        let want = if i == m { 1.0 } else { 0.0 };
                        assert!(
                            (mi[0] - want).abs() < 1e-14,
                            "edge {m} basis {i}: {}",
                            mi[0]
                        );
                    } else {
                        let want0 = if i == 2 * m { 1.0 } else { 0.0 };
                        let want1 = if i == 2 * m + 1 { 1.0 } else { 0.0 };
                        assert!((mi[0] - want0).abs() < 1e-14 && (mi[1] - want1).abs() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn dof_counts() {
        let mesh = Arc::new(uniform_lshape(3).unwrap());
        let (v, e) = (mesh.n_nodes(), mesh.n_edges());
        let n = |k| DofMap::new(mesh.clone(), k).n_dofs();
        assert_eq!(n(ElementKind::LagrangeP1), v);
        assert_eq!(n(ElementKind::LagrangeP2), v + e);
        assert_eq!(n(ElementKind::VectorP2), 2 * (v + e));
        assert_eq!(n(ElementKind::Nedelec1), e);
        assert_eq!(n(ElementKind::Nedelec2), 2 * e);
    }

    #[test]
    fn constants_are_reproduced_by_edge_elements() {
        for kind in [ElementKind::Nedelec1, ElementKind::Nedelec2] {
            let s = space(4, kind);
            let f = s.interpolate_vector(&|_| [1.0, 0.0]).unwrap();
            let rule = quadrature::tri(6);
            for t in 0..s.mesh().n_triangles() {
                for q in 0..rule.points.len() {
                    let v = f.eval(t, rule.barycentric(q));
                    assert!((v.value[0] - 1.0).abs() < 1e-13 && v.value[1].abs() < 1e-13);
                    assert!(v.curl.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn second_type_reproduces_linear_fields() {
        let s = space(3, ElementKind::Nedelec2);
        let f = s
            .interpolate_vector(&|x| [2.0 * x[1] - x[0], 0.5 + 3.0 * x[0]])
            .unwrap();
        let v = f.eval(5, [0.2, 0.3, 0.5]);
        let x = s.mesh().geometry(5).map([0.3, 0.5]);
        assert!((v.value[0] - (2.0 * x[1] - x[0])).abs() < 1e-13);
        assert!((v.value[1] - (0.5 + 3.0 * x[0])).abs() < 1e-13);
        assert!((v.curl - 1.0).abs() < 1e-12);
    }

    #[test]
    fn p2_reproduces_linear_scalar() {
        let s = space(3, ElementKind::LagrangeP2);
        let f = s.interpolate_scalar(&|x| x[0]).unwrap();
        let v = f.eval(7, [0.1, 0.6, 0.3]);
        let x = s.mesh().geometry(7).map([0.6, 0.3]);
        assert!((v.value[0] - x[0]).abs() < 1e-14);
        assert!((v.grad[0][0] - 1.0).abs() < 1e-13 && v.grad[0][1].abs() < 1e-13);
    }

    #[test]
    fn boundary_edge_moment_worked_value() {
        let s = space(4, ElementKind::Nedelec1);
        let mesh = s.mesh();
        let e = mesh
            .edges()
            .iter()
            .position(|&[a, b]| mesh.nodes()[a] == [0.0, 0.0] && mesh.nodes()[b] == [0.25, 0.0])
            .unwrap();
        let b = |x: [f64; 2]| {
            use std::f64::consts::PI;
            [
                (PI * x[0]).sin() * (PI * x[1]).cos(),
                (PI * x[1]).sin() * (PI * x[0]).cos(),
            ]
        };
        let bc = s.essential_bc_vector(&b, DEFAULT_EDGE_POINTS).unwrap();
        let v = bc.iter().find(|&&(d, _)| d == e).unwrap().1;
        let want = (1.0 - (std::f64::consts::FRAC_PI_4).cos()) / std::f64::consts::PI;
        assert!((v - want).abs() < 1e-7, "{v} vs {want}");
        assert!(s
            .essential_bc_vector(&|_| [0.0; 2], 3)
            .unwrap()
            .iter()
            .all(|&(_, v)| v == 0.0));
    }

    #[test]
    fn kind_mismatch_is_an_error() {
        let s = space(2, ElementKind::LagrangeP1);
        assert!(s.interpolate_vector(&|_| [0.0; 2]).is_err());
        let s = space(2, ElementKind::Nedelec1);
        assert!(s.interpolate_scalar(&|_| 0.0).is_err());
        assert!(FeFunction::new(s, vec![0.0; 3]).is_err());
    }

    #[test]
    fn tangential_continuity_across_interior_edges() {
        let s = space(4, ElementKind::Nedelec1);
        let f = s
            .interpolate_vector(&|x| [x[1] * x[1], (3.0 * x[0]).sin()])
            .unwrap();
        let mesh = s.mesh();
        // For every triangle and local edge, integrate the tangential component of the
        // discrete field along the edge; the two sides must agree.
        let mut seen: Vec<Option<f64>> = vec![None; mesh.n_edges()];
        let rule = quadrature::edge(3);
        for t in 0..mesh.n_triangles() {
            let tri = mesh.triangles()[t];
            for k in 0..3 {
                let (a, b) = ((k + 1) % 3, (k + 2) % 3);
                let (e, _) = mesh.tri_edges()[t][k];
                let [lo, hi] = mesh.edges()[e];
                let (pl, ph) = (mesh.nodes()[lo], mesh.nodes()[hi]);
                let tau = [ph[0] - pl[0], ph[1] - pl[1]];
                let mut m = 0.0;
                for (&s, &w) in rule.points.iter().zip(&rule.weights) {
                    let mut l = [0.0; 3];
                    // Parametrize from the lower to the higher node.
                    let (la, lb) = if tri[a] == lo {
                        (1.0 - s, s)
                    } else {
                        (s, 1.0 - s)
                    };
                    l[a] = la;
                    l[b] = lb;
                    let v = f.eval(t, l).value;
                    m += w * (v[0] * tau[0] + v[1] * tau[1]);
                }
                match seen[e] {
                    None => seen[e] = Some(m),
                    Some(prev) => assert!((prev - m).abs() < 1e-12),
                }
                assert!((m - f.coeffs()[e]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn interpolation_is_a_projection() {
        for kind in [
            ElementKind::Nedelec1,
            ElementKind::Nedelec2,
            ElementKind::VectorP2,
        ] {
            let s = space(3, kind);
            let f = s
                .interpolate_vector(&|x| [x[0] * x[1], (x[0] - x[1]).exp()])
                .unwrap();
            let mesh = s.mesh().clone();
            let loc = crate::mesh::PointLocator::new(&mesh);
            let g = s
                .interpolate_vector_with(
                    &|x| {
                        // Evaluate on the triangle whose interior is closest; edge
                        // moments only see tangential traces, which agree across edges.
                        let (t, l) = loc.locate(x).unwrap();
                        f.eval(t, l).value
                    },
                    4,
                )
                .unwrap();
            for (a, b) in f.coeffs().iter().zip(g.coeffs()) {
                assert!((a - b).abs() < 1e-12, "{kind:?}");
            }
        }
    }

    #[test]
    fn gradients_are_exactly_representable() {
        for kind in [ElementKind::Nedelec1, ElementKind::Nedelec2] {
            let s = space(3, kind);
            let mesh = s.mesh();
            let p: Vec<f64> = mesh
                .nodes()
                .iter()
                .map(|x| x[0] * x[0] - 2.0 * x[1] + x[0] * x[1])
                .collect();
            let g = FeFunction::new(s.clone(), s.gradient_coefficients(&p)).unwrap();
            let p1 = Arc::new(DofMap::new(mesh.clone(), ElementKind::LagrangeP1));
            let pf = FeFunction::new(p1, p).unwrap();
            for t in 0..mesh.n_triangles() {
                let l = [0.2, 0.5, 0.3];
                let a = g.eval(t, l);
                let b = pf.eval(t, l);
                assert!((a.value[0] - b.grad[0][0]).abs() < 1e-12);
                assert!((a.value[1] - b.grad[0][1]).abs() < 1e-12);
                assert!(a.curl.abs() < 1e-12);
            }
        }
    }
}

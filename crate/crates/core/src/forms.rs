//! Bilinear and trilinear forms, and the Newton residual/Jacobian.
//!
//! ```text
//! a_s(u,v)   = Re⁻¹(∇u, ∇v)
//! a_m(b,c)   = S Rm⁻¹(∇×b, ∇×c)
//! c₀(w;u,v)  = ½(w·∇u, v) − ½(w·∇v, u)
//! c₁(d;v,c)  = S((∇×c)×d, v) = −S(v×d, ∇×c)
//! ```
//!
//! The coupled unknown is ordered `[u | p | b | r | μ]`, where `μ` is a
//! single multiplier enforcing `∫p = 0`. The discrete problem is
//!
//! ```text
//! a_s(u,v) + c₀(u;u,v) − c₁(b;v,b) − (p, ∇·v) = (f, v)
//! a_m(b,c) + c₁(b;u,c) − (∇r, c)              = (g, c)
//! (∇·u, q)                                    = (∇·u*, q)
//! (b, ∇s)                                     = −(∇·b*, s)
//! ```
//!
//! where `u*`, `b*` are the exact fields: the right-hand sides of the two
//! constraints vanish for solenoidal data and otherwise act as sources.

use std::sync::Arc;

use thiserror::Error;

use crate::fespace::{edge_basis, p2_basis, DofMap, ElementKind, FeFunction};
use crate::linalg::{PatternBuilder, SparseMatrix};
use crate::mesh::Mesh;
use crate::problems::BenchmarkProblem;
use crate::quadrature::{self, ASSEMBLY_DEGREE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormsError {
    #[error("state has length {got}, system has {expected} unknowns")]
    StateLength { expected: usize, got: usize },
    #[error("physical parameters must be positive (Re={re}, Rm={rm}, S={s})")]
    Params { re: f64, rm: f64, s: f64 },
}

/// Hydrodynamic and magnetic Reynolds numbers and the coupling number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams {
    pub re: f64,
    pub rm: f64,
    pub s: f64,
}

impl PhysParams {
    /// # Panics
    ///
    /// Panics unless all three numbers are positive; use [`PhysParams::try_new`]
    /// for user input.
    pub fn new(re: f64, rm: f64, s: f64) -> Self {
        Self::try_new(re, rm, s).expect("positive parameters")
    }

    pub fn try_new(re: f64, rm: f64, s: f64) -> Result<Self, FormsError> {
        if re > 0.0 && rm > 0.0 && s > 0.0 && re.is_finite() && rm.is_finite() && s.is_finite() {
            Ok(Self { re, rm, s })
        } else {
            Err(FormsError::Params { re, rm, s })
        }
    }
}

/// The four discrete spaces on one mesh and the block offsets.
#[derive(Debug, Clone)]
pub struct MhdSpaces {
    pub mesh: Arc<Mesh>,
    pub u: Arc<DofMap>,
    pub p: Arc<DofMap>,
    pub b: Arc<DofMap>,
    pub r: Arc<DofMap>,
}

impl MhdSpaces {
    /// `magnetic` must be [`ElementKind::Nedelec1`] or [`ElementKind::Nedelec2`].
    ///
    /// The multiplier space is the Lagrange space whose gradients are exactly
    /// the curl-free edge fields: P1 for the first type, P2 for the second.
    /// With P1 paired to the second type, the gradients of P2 edge bubbles are
    /// left uncontrolled and the system is singular.
    pub fn new(mesh: Arc<Mesh>, magnetic: ElementKind) -> Self {
        assert!(
            magnetic.is_edge_element(),
            "magnetic field needs an edge element"
        );
        Self {
            u: Arc::new(DofMap::new(mesh.clone(), ElementKind::VectorP2)),
            p: Arc::new(DofMap::new(mesh.clone(), ElementKind::LagrangeP1)),
            b: Arc::new(DofMap::new(mesh.clone(), magnetic)),
            r: Arc::new(DofMap::new(mesh.clone(), multiplier_kind(magnetic))),
            mesh,
        }
    }

    pub fn offset_p(&self) -> usize {
        self.u.n_dofs()
    }

    pub fn offset_b(&self) -> usize {
        self.offset_p() + self.p.n_dofs()
    }

    pub fn offset_r(&self) -> usize {
        self.offset_b() + self.b.n_dofs()
    }

    pub fn offset_mu(&self) -> usize {
        self.offset_r() + self.r.n_dofs()
    }

    pub fn n_total(&self) -> usize {
        self.offset_mu() + 1
    }

    /// Unknowns fixed by essential conditions: boundary dofs of `u`, `b`, `r`.
    pub fn constrained(&self) -> Vec<bool> {
        let mut c = vec![false; self.n_total()];
        for &d in self.u.boundary_dofs() {
            c[d] = true;
        }
        for &d in self.b.boundary_dofs() {
            c[self.offset_b() + d] = true;
        }
        for &d in self.r.boundary_dofs() {
            c[self.offset_r() + d] = true;
        }
        c
    }
}

/// Lagrange space paired with an edge element in the magnetic constraint.
pub fn multiplier_kind(magnetic: ElementKind) -> ElementKind {
    match magnetic {
        ElementKind::Nedelec2 => ElementKind::LagrangeP2,
        _ => ElementKind::LagrangeP1,
    }
}

/// Basis data of all spaces at one quadrature point of one triangle.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PointBasis {
    /// Quadrature weight times the Jacobian determinant.
    pub w: f64,
    pub x: [f64; 2],
    pub p2: [f64; 6],
    pub p2g: [[f64; 2]; 6],
    pub p1: [f64; 3],
    pub p1g: [[f64; 2]; 3],
    pub e: [[f64; 2]; 6],
    pub ec: [f64; 6],
    pub ne: usize,
}

impl PointBasis {
    /// Values and gradients of the scalar Lagrange space `kind` (P1 or P2).
    pub fn lagrange(&self, kind: ElementKind) -> (&[f64], &[[f64; 2]]) {
        match kind {
            ElementKind::LagrangeP2 => (&self.p2, &self.p2g),
            _ => (&self.p1, &self.p1g),
        }
    }
}

/// Iterates over quadrature points of triangle `t` with all bases evaluated.
pub(crate) fn for_each_point(
    mesh: &Mesh,
    magnetic: ElementKind,
    t: usize,
    degree: usize,
    mut visit: impl FnMut(&PointBasis),
) {
    let geom = mesh.geometry(t);
    let gl = geom.grad_lambda;
    let te = mesh.tri_edges()[t];
    let signs = [te[0].1, te[1].1, te[2].1];
    let rule = quadrature::tri(degree);
    for q in 0..rule.points.len() {
        let l = rule.barycentric(q);
        let (p2, p2g) = p2_basis(l, &gl);
        let mut pb = PointBasis {
            w: rule.weights[q] * geom.det,
            x: geom.map(rule.points[q]),
            p2,
            p2g,
            p1: l,
            p1g: gl,
            e: [[0.0; 2]; 6],
            ec: [0.0; 6],
            ne: 0,
        };
        if magnetic.is_edge_element() {
            pb.ne = edge_basis(magnetic, l, &gl, signs, &mut pb.e, &mut pb.ec);
        }
        visit(&pb);
    }
}

#[inline]
fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// `v × d = v₁d₂ − v₂d₁`.
#[inline]
fn cross(v: [f64; 2], d: [f64; 2]) -> f64 {
    v[0] * d[1] - v[1] * d[0]
}

/// `e_c × d` for a unit vector `e_c`.
#[inline]
fn unit_cross(c: usize, d: [f64; 2]) -> f64 {
    if c == 0 {
        d[1]
    } else {
        -d[0]
    }
}

fn block_pattern(rows: &DofMap, cols: &DofMap) -> SparseMatrix {
    let mut pb = PatternBuilder::new(rows.n_dofs(), cols.n_dofs());
    for t in 0..rows.mesh().n_triangles() {
        pb.add_block(rows.cell_dofs(t), cols.cell_dofs(t));
    }
    pb.build()
}

/// Vector P2 stiffness `Re⁻¹(∇u, ∇v)`.
pub fn assemble_as(space_u: &DofMap, re: f64) -> SparseMatrix {
    let mut a = block_pattern(space_u, space_u);
    let mesh = space_u.mesh();
    for t in 0..mesh.n_triangles() {
        let dofs = space_u.cell_dofs(t);
        for_each_point(mesh, ElementKind::LagrangeP2, t, ASSEMBLY_DEGREE, |pb| {
            for c in 0..2 {
                for i in 0..6 {
                    for j in 0..6 {
                        let v = pb.w / re * dot(pb.p2g[i], pb.p2g[j]);
                        a.add_to(dofs[6 * c + i], dofs[6 * c + j], v);
                    }
                }
            }
        });
    }
    a
}

/// Vector P2 mass matrix.
pub fn assemble_vector_mass(space_u: &DofMap) -> SparseMatrix {
    let mut a = block_pattern(space_u, space_u);
    let mesh = space_u.mesh();
    for t in 0..mesh.n_triangles() {
        let dofs = space_u.cell_dofs(t);
        for_each_point(mesh, ElementKind::LagrangeP2, t, ASSEMBLY_DEGREE, |pb| {
            for c in 0..2 {
                for i in 0..6 {
                    for j in 0..6 {
                        a.add_to(dofs[6 * c + i], dofs[6 * c + j], pb.w * pb.p2[i] * pb.p2[j]);
                    }
                }
            }
        });
    }
    a
}

/// Curl-curl matrix `S Rm⁻¹(∇×b, ∇×c)`.
pub fn assemble_am(space_b: &DofMap, rm: f64, s: f64) -> SparseMatrix {
    let mut a = block_pattern(space_b, space_b);
    let mesh = space_b.mesh();
    for t in 0..mesh.n_triangles() {
        let dofs = space_b.cell_dofs(t);
        for_each_point(mesh, space_b.kind(), t, ASSEMBLY_DEGREE, |pb| {
            for i in 0..pb.ne {
                for j in 0..pb.ne {
                    a.add_to(dofs[i], dofs[j], pb.w * s / rm * pb.ec[i] * pb.ec[j]);
                }
            }
        });
    }
    a
}

/// Edge-element mass matrix.
pub fn assemble_edge_mass(space_b: &DofMap) -> SparseMatrix {
    let mut a = block_pattern(space_b, space_b);
    let mesh = space_b.mesh();
    for t in 0..mesh.n_triangles() {
        let dofs = space_b.cell_dofs(t);
        for_each_point(mesh, space_b.kind(), t, ASSEMBLY_DEGREE, |pb| {
            for i in 0..pb.ne {
                for j in 0..pb.ne {
                    a.add_to(dofs[i], dofs[j], pb.w * dot(pb.e[i], pb.e[j]));
                }
            }
        });
    }
    a
}

/// `(C0a, C0b)` with rows indexing the test function:
/// `C0a[v,u] = c₀(w;u,v)` and `C0b[v,u] = c₀(u;w,v)`.
pub fn assemble_c0(w: &FeFunction, space_u: &DofMap) -> (SparseMatrix, SparseMatrix) {
    let mut ca = block_pattern(space_u, space_u);
    let mut cb = ca.clone();
    let mesh = space_u.mesh();
    for t in 0..mesh.n_triangles() {
        let dofs = space_u.cell_dofs(t);
        for_each_point(mesh, ElementKind::LagrangeP2, t, ASSEMBLY_DEGREE, |pb| {
            let wv = eval_vector_p2(w, dofs, pb);
            for d in 0..2 {
                for i in 0..6 {
                    let row = dofs[6 * d + i];
                    for c in 0..2 {
                        for j in 0..6 {
                            let col = dofs[6 * c + j];
                            if c == d {
                                let a = 0.5 * dot(wv.0, pb.p2g[j]) * pb.p2[i]
                                    - 0.5 * dot(wv.0, pb.p2g[i]) * pb.p2[j];
                                ca.add_to(row, col, pb.w * a);
                            }
                            let b = 0.5 * pb.p2[j] * wv.1[d][c] * pb.p2[i]
                                - 0.5 * pb.p2[j] * pb.p2g[i][c] * wv.0[d];
                            cb.add_to(row, col, pb.w * b);
                        }
                    }
                }
            }
        });
    }
    (ca, cb)
}

/// Value and gradient of a vector P2 function at a point.
fn eval_vector_p2(w: &FeFunction, dofs: &[usize], pb: &PointBasis) -> ([f64; 2], [[f64; 2]; 2]) {
    let mut v = [0.0; 2];
    let mut g = [[0.0; 2]; 2];
    let coeffs = w.coeffs();
    for c in 0..2 {
        for i in 0..6 {
            let k = coeffs[dofs[6 * c + i]];
            v[c] += k * pb.p2[i];
            g[c][0] += k * pb.p2g[i][0];
            g[c][1] += k * pb.p2g[i][1];
        }
    }
    (v, g)
}

fn eval_edge(d: &FeFunction, dofs: &[usize], pb: &PointBasis) -> ([f64; 2], f64) {
    let mut v = [0.0; 2];
    let mut curl = 0.0;
    for i in 0..pb.ne {
        let k = d.coeffs()[dofs[i]];
        v[0] += k * pb.e[i][0];
        v[1] += k * pb.e[i][1];
        curl += k * pb.ec[i];
    }
    (v, curl)
}

/// `C1[v, c] = c₁(d; v, c) = −S(v×d, ∇×c)`, rows velocity, columns magnetic.
pub fn assemble_c1(d: &FeFunction, space_u: &DofMap, space_b: &DofMap, s: f64) -> SparseMatrix {
    assemble_c1_impl(d, space_u, space_b, s, false)
}

/// The same matrix from the other form, `S((∇×c)×d, v)`.
pub fn assemble_c1_lorentz(
    d: &FeFunction,
    space_u: &DofMap,
    space_b: &DofMap,
    s: f64,
) -> SparseMatrix {
    assemble_c1_impl(d, space_u, space_b, s, true)
}

fn assemble_c1_impl(
    d: &FeFunction,
    space_u: &DofMap,
    space_b: &DofMap,
    s: f64,
    lorentz: bool,
) -> SparseMatrix {
    let mut a = block_pattern(space_u, space_b);
    let mesh = space_u.mesh();
    for t in 0..mesh.n_triangles() {
        let ud = space_u.cell_dofs(t);
        let bd = space_b.cell_dofs(t);
        for_each_point(mesh, space_b.kind(), t, ASSEMBLY_DEGREE, |pb| {
            let (dv, _) = eval_edge(d, bd, pb);
            for c in 0..2 {
                for i in 0..6 {
                    let mut v = [0.0; 2];
                    v[c] = pb.p2[i];
                    for j in 0..pb.ne {
                        let val = if lorentz {
                            // (∇×c)×d = curl·(−d₂, d₁)
                            let l = [-pb.ec[j] * dv[1], pb.ec[j] * dv[0]];
                            s * dot(l, v)
                        } else {
                            -s * cross(v, dv) * pb.ec[j]
                        };
                        a.add_to(ud[6 * c + i], bd[j], pb.w * val);
                    }
                }
            }
        });
    }
    a
}

/// Constraint blocks of the mixed system.
#[derive(Debug, Clone)]
pub struct Constraints {
    /// `B_s[q, v] = (q, ∇·v)`.
    pub div: SparseMatrix,
    /// `B_m[s, c] = (∇s, c)`.
    pub grad: SparseMatrix,
    /// `m[q] = ∫q`.
    pub mean: Vec<f64>,
}

pub fn assemble_mixed_constraints(spaces: &MhdSpaces) -> Constraints {
    let mesh = &spaces.mesh;
    let mut div = block_pattern(&spaces.p, &spaces.u);
    let mut grad = block_pattern(&spaces.r, &spaces.b);
    let mut mean = vec![0.0; spaces.p.n_dofs()];
    for t in 0..mesh.n_triangles() {
        let ud = spaces.u.cell_dofs(t);
        let pd = spaces.p.cell_dofs(t);
        let bd = spaces.b.cell_dofs(t);
        let rd = spaces.r.cell_dofs(t);
        for_each_point(mesh, spaces.b.kind(), t, ASSEMBLY_DEGREE, |pb| {
            for i in 0..3 {
                mean[pd[i]] += pb.w * pb.p1[i];
                for c in 0..2 {
                    for j in 0..6 {
                        div.add_to(pd[i], ud[6 * c + j], pb.w * pb.p1[i] * pb.p2g[j][c]);
                    }
                }
            }
            let (_, rg) = pb.lagrange(spaces.r.kind());
            for (i, g) in rg.iter().enumerate() {
                for j in 0..pb.ne {
                    grad.add_to(rd[i], bd[j], pb.w * dot(*g, pb.e[j]));
                }
            }
        });
    }
    Constraints { div, grad, mean }
}

/// P1 stiffness plus mass (the `H¹` inner product).
pub fn assemble_p1_h1(space: &DofMap) -> SparseMatrix {
    let mut a = block_pattern(space, space);
    let mesh = space.mesh();
    for t in 0..mesh.n_triangles() {
        let dofs = space.cell_dofs(t);
        for_each_point(mesh, ElementKind::LagrangeP1, t, ASSEMBLY_DEGREE, |pb| {
            for i in 0..3 {
                for j in 0..3 {
                    a.add_to(
                        dofs[i],
                        dofs[j],
                        pb.w * (dot(pb.p1g[i], pb.p1g[j]) + pb.p1[i] * pb.p1[j]),
                    );
                }
            }
        });
    }
    a
}

/// Exact-solution data needed at every assembly quadrature point.
#[derive(Debug, Clone, Copy, Default)]
struct SourcePoint {
    f: [f64; 2],
    g: [f64; 2],
    div_u: f64,
    div_b: f64,
}

/// What an assembly pass produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssemblyMode {
    /// Full nonlinear residual and its Jacobian.
    Newton,
    /// Convection and coupling dropped: the decoupled Stokes and Maxwell problems.
    Linear,
}

/// Linear system for one Newton step, constraints eliminated, in scaled
/// unknowns: `matrix = D J D`, `rhs = −D R` and `δ = D y`.
///
/// `D` is the identity except on magnetic dofs, where it is the edge length.
/// Edge-moment unknowns scale like `h |b|` and their curl-curl entries like
/// `h⁻²`; on strongly graded meshes the unscaled system loses the relative
/// residual to cancellation alone.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    pub scale: Vec<f64>,
}

impl BlockSystem {
    /// Newton increment `δ = D y` from a solution `y` of the scaled system.
    pub fn increment(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(&self.scale).map(|(a, s)| a * s).collect()
    }
}

/// Residual and Jacobian assembly of the coupled problem on fixed spaces.
///
/// The sparsity pattern and source values at quadrature points are computed
/// once and reused by every Newton step.
pub struct NewtonAssembler {
    spaces: MhdSpaces,
    params: PhysParams,
    pattern: SparseMatrix,
    constrained: Vec<bool>,
    sources: Vec<SourcePoint>,
    points_per_cell: usize,
    scale: Vec<f64>,
}

const U: usize = 0;
const P: usize = 1;
const B: usize = 2;
const R: usize = 3;
const M: usize = 4;

/// Block pairs with nonzero coupling.
const COUPLED: [(usize, usize); 10] = [
    (U, U),
    (U, P),
    (P, U),
    (U, B),
    (B, U),
    (B, B),
    (B, R),
    (R, B),
    (P, M),
    (M, P),
];

impl NewtonAssembler {
    /// Sources are derived from `problem`'s exact fields with `params`.
    pub fn new(spaces: MhdSpaces, problem: &BenchmarkProblem, params: PhysParams) -> Self {
        let mesh = spaces.mesh.clone();
        let n = spaces.n_total();
        let mut pb = PatternBuilder::new(n, n);
        let mu = [spaces.offset_mu()];
        for t in 0..mesh.n_triangles() {
            let blocks = Self::cell_blocks(&spaces, t);
            for &(a, b) in &COUPLED {
                let rows: &[usize] = if a == M { &mu } else { &blocks[a] };
                let cols: &[usize] = if b == M { &mu } else { &blocks[b] };
                pb.add_block(rows, cols);
            }
        }
        let constrained = spaces.constrained();
        for (i, &c) in constrained.iter().enumerate() {
            if c {
                pb.add_entry(i, i);
            }
        }
        let pattern = pb.build();

        let rule = quadrature::tri(ASSEMBLY_DEGREE);
        let points_per_cell = rule.points.len();
        let mut sources = Vec::with_capacity(points_per_cell * mesh.n_triangles());
        for t in 0..mesh.n_triangles() {
            for_each_point(&mesh, ElementKind::LagrangeP1, t, ASSEMBLY_DEGREE, |p| {
                let j = problem.jet(p.x);
                sources.push(SourcePoint {
                    f: j.f(&params),
                    g: j.g(&params),
                    div_u: j.div_u(),
                    div_b: j.div_b(),
                });
            });
        }
        let mut scale = vec![1.0; n];
        let nodes = mesh.nodes();
        let per_edge = if spaces.b.kind() == ElementKind::Nedelec2 {
            2
        } else {
            1
        };
        for d in 0..spaces.b.n_dofs() {
            let [a, b] = mesh.edges()[d / per_edge];
            let (pa, pb) = (nodes[a], nodes[b]);
            scale[spaces.offset_b() + d] = (pa[0] - pb[0]).hypot(pa[1] - pb[1]);
        }
        Self {
            spaces,
            params,
            pattern,
            constrained,
            sources,
            points_per_cell,
            scale,
        }
    }

    pub fn spaces(&self) -> &MhdSpaces {
        &self.spaces
    }

    pub fn params(&self) -> &PhysParams {
        &self.params
    }

    pub fn constrained(&self) -> &[bool] {
        &self.constrained
    }

    pub fn n_total(&self) -> usize {
        self.spaces.n_total()
    }

    /// Global dofs of triangle `t` per block `[u, p, b, r]`, offsets applied.
    fn cell_blocks(spaces: &MhdSpaces, t: usize) -> [Vec<usize>; 4] {
        let shift = |d: &[usize], off: usize| d.iter().map(|&x| x + off).collect::<Vec<_>>();
        [
            spaces.u.cell_dofs(t).to_vec(),
            shift(spaces.p.cell_dofs(t), spaces.offset_p()),
            shift(spaces.b.cell_dofs(t), spaces.offset_b()),
            shift(spaces.r.cell_dofs(t), spaces.offset_r()),
        ]
    }

    /// Residual `R(x)` and, if requested, the Jacobian `∂R/∂x`, without
    /// boundary elimination.
    pub fn assemble(
        &self,
        x: &[f64],
        mode: AssemblyMode,
        with_jacobian: bool,
    ) -> Result<(Option<SparseMatrix>, Vec<f64>), FormsError> {
        let n = self.n_total();
        if x.len() != n {
            return Err(FormsError::StateLength {
                expected: n,
                got: x.len(),
            });
        }
        let sp = &self.spaces;
        let prm = self.params;
        let nonlinear = mode == AssemblyMode::Newton;
        let mut jac = with_jacobian.then(|| self.pattern.clone());
        let mut res = vec![0.0; n];
        let mu_dof = sp.offset_mu();
        let mu = x[mu_dof];
        let ne = sp.b.local_dofs();
        // Local layout: u 0..12, p 12..15, b 15..15+ne, r .., μ last.
        let (lp, lb) = (12, 15);
        let lr = lb + ne;
        let r_kind = sp.r.kind();
        let nr = sp.r.local_dofs();
        let lm = lr + nr;
        let nl = lm + 1;
        let mut kl = vec![0.0; nl * nl];
        let mut rl = vec![0.0; nl];
        let mut gdofs = vec![0usize; nl];
        for t in 0..sp.mesh.n_triangles() {
            let blocks = Self::cell_blocks(sp, t);
            gdofs[..12].copy_from_slice(&blocks[U]);
            gdofs[lp..lb].copy_from_slice(&blocks[P]);
            gdofs[lb..lr].copy_from_slice(&blocks[B]);
            gdofs[lr..lm].copy_from_slice(&blocks[R]);
            gdofs[lm] = mu_dof;
            let xl: Vec<f64> = gdofs.iter().map(|&g| x[g]).collect();
            kl.iter_mut().for_each(|v| *v = 0.0);
            rl.iter_mut().for_each(|v| *v = 0.0);
            let mut q = 0;
            for_each_point(&sp.mesh, sp.b.kind(), t, ASSEMBLY_DEGREE, |pb| {
                let src = self.sources[t * self.points_per_cell + q];
                q += 1;
                let w = pb.w;
                // Current fields.
                let mut u = [0.0; 2];
                let mut gu = [[0.0; 2]; 2];
                for c in 0..2 {
                    for i in 0..6 {
                        let k = xl[6 * c + i];
                        u[c] += k * pb.p2[i];
                        gu[c][0] += k * pb.p2g[i][0];
                        gu[c][1] += k * pb.p2g[i][1];
                    }
                }
                let p: f64 = (0..3).map(|i| xl[lp + i] * pb.p1[i]).sum();
                let mut b = [0.0; 2];
                let mut cb = 0.0;
                for i in 0..ne {
                    let k = xl[lb + i];
                    b[0] += k * pb.e[i][0];
                    b[1] += k * pb.e[i][1];
                    cb += k * pb.ec[i];
                }
                let (rv, rg) = pb.lagrange(r_kind);
                let mut gr = [0.0; 2];
                for i in 0..nr {
                    gr[0] += xl[lr + i] * rg[i][0];
                    gr[1] += xl[lr + i] * rg[i][1];
                }
                let div_u = gu[0][0] + gu[1][1];
                let nlf = if nonlinear { 1.0 } else { 0.0 };
                let ucb = cross(u, b);

                // Momentum rows.
                for d in 0..2 {
                    for i in 0..6 {
                        let row = 6 * d + i;
                        let (phi, gphi) = (pb.p2[i], pb.p2g[i]);
                        let mut r = dot(gu[d], gphi) / prm.re - p * gphi[d] - src.f[d] * phi;
                        r += nlf
                            * (0.5 * dot(u, gu[d]) * phi - 0.5 * dot(u, gphi) * u[d]
                                + prm.s * phi * unit_cross(d, b) * cb);
                        rl[row] += w * r;
                        if !with_jacobian {
                            continue;
                        }
                        for c in 0..2 {
                            for j in 0..6 {
                                let (psi, gpsi) = (pb.p2[j], pb.p2g[j]);
                                let mut a = 0.0;
                                if c == d {
                                    a += dot(gpsi, gphi) / prm.re;
                                    a +=
                                        nlf * (0.5 * dot(u, gpsi) * phi - 0.5 * dot(u, gphi) * psi);
                                }
                                a +=
                                    nlf * (0.5 * psi * gu[d][c] * phi - 0.5 * psi * gphi[c] * u[d]);
                                kl[row * nl + 6 * c + j] += w * a;
                            }
                        }
                        for j in 0..3 {
                            kl[row * nl + lp + j] -= w * pb.p1[j] * gphi[d];
                        }
                        if nonlinear {
                            for j in 0..ne {
                                let a = prm.s
                                    * phi
                                    * (unit_cross(d, pb.e[j]) * cb + unit_cross(d, b) * pb.ec[j]);
                                kl[row * nl + lb + j] += w * a;
                            }
                        }
                    }
                }
                // Continuity rows and the mean multiplier.
                for i in 0..3 {
                    let chi = pb.p1[i];
                    rl[lp + i] += w * (-div_u * chi + src.div_u * chi + mu * chi);
                    if with_jacobian {
                        for c in 0..2 {
                            for j in 0..6 {
                                kl[(lp + i) * nl + 6 * c + j] -= w * pb.p2g[j][c] * chi;
                            }
                        }
                        kl[(lp + i) * nl + lm] += w * chi;
                        kl[lm * nl + lp + i] += w * chi;
                    }
                }
                rl[lm] += w * p;
                // Induction rows.
                for i in 0..ne {
                    let (psi, cpsi) = (pb.e[i], pb.ec[i]);
                    let mut r = prm.s / prm.rm * cb * cpsi - dot(gr, psi) - dot(src.g, psi);
                    r -= nlf * prm.s * ucb * cpsi;
                    rl[lb + i] += w * r;
                    if !with_jacobian {
                        continue;
                    }
                    for j in 0..ne {
                        let mut a = prm.s / prm.rm * pb.ec[j] * cpsi;
                        a -= nlf * prm.s * cross(u, pb.e[j]) * cpsi;
                        kl[(lb + i) * nl + lb + j] += w * a;
                    }
                    if nonlinear {
                        for c in 0..2 {
                            for j in 0..6 {
                                kl[(lb + i) * nl + 6 * c + j] -=
                                    w * prm.s * pb.p2[j] * unit_cross(c, b) * cpsi;
                            }
                        }
                    }
                    for j in 0..nr {
                        kl[(lb + i) * nl + lr + j] -= w * dot(rg[j], psi);
                    }
                }
                // Magnetic constraint rows.
                for i in 0..nr {
                    let gchi = rg[i];
                    rl[lr + i] += w * (-dot(b, gchi) - src.div_b * rv[i]);
                    if with_jacobian {
                        for j in 0..ne {
                            kl[(lr + i) * nl + lb + j] -= w * dot(pb.e[j], gchi);
                        }
                    }
                }
            });
            for a in 0..nl {
                // μ receives contributions from every cell; its row is scattered like the others.
                res[gdofs[a]] += rl[a];
            }
            if let Some(j) = jac.as_mut() {
                for a in 0..nl {
                    for b in 0..nl {
                        let v = kl[a * nl + b];
                        if v != 0.0 {
                            j.add_to(gdofs[a], gdofs[b], v);
                        }
                    }
                }
            }
        }
        Ok((jac, res))
    }

    /// Newton system `J δ = −R` with `δ = 0` on constrained unknowns, scaled
    /// as described on [`BlockSystem`].
    pub fn newton_system(&self, x: &[f64], mode: AssemblyMode) -> Result<BlockSystem, FormsError> {
        let (jac, res) = self.assemble(x, mode, true)?;
        let mut matrix = jac.expect("jacobian requested");
        matrix.eliminate_symmetric(&self.constrained);
        matrix.scale_symmetric(&self.scale);
        let rhs = res
            .iter()
            .zip(&self.constrained)
            .zip(&self.scale)
            .map(|((&r, &c), &s)| if c { 0.0 } else { -r * s })
            .collect();
        Ok(BlockSystem {
            matrix,
            rhs,
            scale: self.scale.clone(),
        })
    }

    /// Residual with constrained entries zeroed.
    pub fn free_residual(&self, x: &[f64], mode: AssemblyMode) -> Result<Vec<f64>, FormsError> {
        let (_, mut res) = self.assemble(x, mode, false)?;
        for (r, &c) in res.iter_mut().zip(&self.constrained) {
            if c {
                *r = 0.0;
            }
        }
        Ok(res)
    }

    /// Load vector of the data alone: `(f, v)`, `(g, c)` and the constraint sources.
    pub fn data_vector(&self) -> Vec<f64> {
        let zero = vec![0.0; self.n_total()];
        let (_, mut r) = self
            .assemble(&zero, AssemblyMode::Linear, false)
            .expect("length matches");
        for (v, &c) in r.iter_mut().zip(&self.constrained) {
            if c {
                *v = 0.0;
            }
        }
        r
    }
}

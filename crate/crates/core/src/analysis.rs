//! Error norms, the discrete `H⁻¹` norm, Stokes and Maxwell projections, and
//! convergence studies.

use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::fespace::{DofMap, ElementKind, FeFunction};
use crate::forms::{
    assemble_am, assemble_as, assemble_mixed_constraints, for_each_point, MhdSpaces, PhysParams,
};
use crate::linalg::{LinalgError, LinearSolver, MultifrontalLu, SparseMatrix};
use crate::mesh::{Mesh, MeshError, MeshFamily};
use crate::problems::BenchmarkProblem;
use crate::quadrature::{self, ERROR_DEGREE};
use crate::solver::{newton_solve, MhdState, NewtonConfig, SolverError};

/// Errors below this are treated as exact and carry no rate.
pub const RATE_FLOOR: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("a study needs at least two resolutions, got {0}")]
    TooFewResolutions(usize),
    #[error("study stopped at resolution {resolution}: {source}")]
    Study {
        /// Rows completed before the failure.
        partial: Box<ConvergenceReport>,
        resolution: usize,
        #[source]
        source: SolverError,
    },
}

/// Errors of one discrete solution against the exact one.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ErrorReport {
    /// `M` for uniform families, the grading level otherwise.
    pub resolution: usize,
    pub h: f64,
    pub n_nodes: usize,
    pub dofs: usize,
    pub l2_u: f64,
    pub h1semi_u: f64,
    pub l2_p: f64,
    pub hcurl_b: f64,
    pub l2_b: f64,
    pub h1_r: f64,
    pub hminus1_b: f64,
    pub iterations: usize,
}

/// Visits every point of the error rule: `(t, λ, x, weight·|det|, ∇λ)`.
fn for_each_error_point(
    mesh: &Mesh,
    mut visit: impl FnMut(usize, [f64; 3], [f64; 2], f64, &[[f64; 2]; 3]),
) {
    let rule = quadrature::tri(ERROR_DEGREE);
    for t in 0..mesh.n_triangles() {
        let geom = mesh.geometry(t);
        for q in 0..rule.points.len() {
            let l = rule.barycentric(q);
            visit(
                t,
                l,
                geom.map(rule.points[q]),
                rule.weights[q] * geom.det,
                &geom.grad_lambda,
            );
        }
    }
}

fn sq(v: [f64; 2]) -> f64 {
    v[0] * v[0] + v[1] * v[1]
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

/// All norms of `state − exact`; the exact pressure is shifted to zero mean.
pub fn error_norms(state: &MhdState, problem: &BenchmarkProblem) -> ErrorReport {
    let mesh = state.u.space().mesh().clone();
    let p_mean = problem.pressure_mean();
    let mut acc = [0.0f64; 7];
    for_each_error_point(&mesh, |t, l, x, w, gl| {
        let j = problem.jet(x);
        let u = state.u.eval_with(t, l, gl);
        let p = state.p.eval_with(t, l, gl);
        let b = state.b.eval_with(t, l, gl);
        let r = state.r.eval_with(t, l, gl);
        acc[0] += w * sq(sub(j.u, u.value));
        acc[1] += w * (sq(sub(j.grad_u[0], u.grad[0])) + sq(sub(j.grad_u[1], u.grad[1])));
        acc[2] += w * (j.p - p_mean - p.value[0]).powi(2);
        acc[3] += w * sq(sub(j.b, b.value));
        acc[4] += w * (j.curl_b() - b.curl).powi(2);
        acc[5] += w * (j.r - r.value[0]).powi(2);
        acc[6] += w * sq(sub(j.grad_r, r.grad[0]));
    });
    let dual = DualNorm::new(&mesh);
    let hminus1_b = dual.vector(&|t, l, x| sub(problem.b(x), state.b.eval(t, l).value));
    ErrorReport {
        resolution: 0,
        h: mesh.h(),
        n_nodes: mesh.n_nodes(),
        dofs: state.spaces().n_total(),
        l2_u: acc[0].sqrt(),
        h1semi_u: acc[1].sqrt(),
        l2_p: acc[2].sqrt(),
        hcurl_b: (acc[3] + acc[4]).sqrt(),
        l2_b: acc[3].sqrt(),
        h1_r: (acc[5] + acc[6]).sqrt(),
        hminus1_b,
        iterations: 0,
    }
}

/// Discrete dual norm of `H¹₀` over continuous P2 functions:
/// `sup (f, θ) / ‖θ‖_{H¹} = √(Fᵀ K⁻¹ F)`, with `K` the `H¹` Gram matrix.
///
/// `K` is factored once; vector fields use it componentwise since the vector
/// Gram matrix is block diagonal.
pub struct DualNorm {
    space: Arc<DofMap>,
    gram: SparseMatrix,
    lu: MultifrontalLu,
}

impl DualNorm {
    pub fn new(mesh: &Arc<Mesh>) -> Self {
        let space = Arc::new(DofMap::new(mesh.clone(), ElementKind::LagrangeP2));
        let mut pb = crate::linalg::PatternBuilder::new(space.n_dofs(), space.n_dofs());
        for t in 0..mesh.n_triangles() {
            pb.add_block(space.cell_dofs(t), space.cell_dofs(t));
        }
        let mut gram = pb.build();
        for t in 0..mesh.n_triangles() {
            let dofs = space.cell_dofs(t);
            for_each_point(mesh, ElementKind::LagrangeP2, t, 4, |pb| {
                for i in 0..6 {
                    for j in 0..6 {
                        let v = pb.p2g[i][0] * pb.p2g[j][0]
                            + pb.p2g[i][1] * pb.p2g[j][1]
                            + pb.p2[i] * pb.p2[j];
                        gram.add_to(dofs[i], dofs[j], pb.w * v);
                    }
                }
            });
        }
        let mask: Vec<bool> = (0..space.n_dofs())
            .map(|d| space.is_boundary_dof(d))
            .collect();
        gram.eliminate_symmetric(&mask);
        let lu = MultifrontalLu::factor(&gram).expect("H¹ Gram matrix is positive definite");
        Self { space, gram, lu }
    }

    fn loads(
        &self,
        field: &dyn Fn(usize, [f64; 3], [f64; 2]) -> [f64; 2],
        ncomp: usize,
    ) -> Vec<Vec<f64>> {
        let mesh = self.space.mesh();
        let mut loads = vec![vec![0.0; self.space.n_dofs()]; ncomp];
        for_each_error_point(mesh, |t, l, x, w, gl| {
            let v = field(t, l, x);
            let (phi, _) = crate::fespace::p2_basis(l, gl);
            for (i, &d) in self.space.cell_dofs(t).iter().enumerate() {
                for c in 0..ncomp {
                    loads[c][d] += w * v[c] * phi[i];
                }
            }
        });
        for f in &mut loads {
            for &d in self.space.boundary_dofs() {
                f[d] = 0.0;
            }
        }
        loads
    }

    fn norm_sq(&self, f: &[f64]) -> f64 {
        let mut x = self.lu.solve(f);
        // one refinement step keeps the value accurate for tiny fields
        let r: Vec<f64> = f
            .iter()
            .zip(self.gram.matvec(&x))
            .map(|(a, b)| a - b)
            .collect();
        let dx = self.lu.solve(&r);
        x.iter_mut().zip(&dx).for_each(|(a, b)| *a += b);
        f.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>().max(0.0)
    }

    /// Norm of a vector field given pointwise as `field(t, λ, x)`.
    pub fn vector(&self, field: &dyn Fn(usize, [f64; 3], [f64; 2]) -> [f64; 2]) -> f64 {
        self.loads(field, 2)
            .iter()
            .map(|f| self.norm_sq(f))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scalar(&self, field: &dyn Fn(usize, [f64; 3], [f64; 2]) -> f64) -> f64 {
        let loads = self.loads(&|t, l, x| [field(t, l, x), 0.0], 1);
        self.norm_sq(&loads[0]).sqrt()
    }
}

/// One-shot [`DualNorm::vector`].
pub fn discrete_hminus1(
    mesh: &Arc<Mesh>,
    field: &dyn Fn(usize, [f64; 3], [f64; 2]) -> [f64; 2],
) -> f64 {
    DualNorm::new(mesh).vector(field)
}

/// Triplet accumulator for block systems.
#[derive(Default)]
struct Blocks(Vec<(usize, usize, f64)>);

impl Blocks {
    fn add(&mut self, m: &SparseMatrix, r0: usize, c0: usize, scale: f64, transpose: bool) {
        for i in 0..m.n_rows() {
            let (cols, vals) = m.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let (a, b) = if transpose { (j, i) } else { (i, j) };
                self.0.push((r0 + a, c0 + b, scale * v));
            }
        }
    }

    /// The full diagonal is kept in the pattern so that essential conditions
    /// can be eliminated in place.
    fn build(mut self, n: usize) -> Result<SparseMatrix, LinalgError> {
        self.0.extend((0..n).map(|i| (i, i, 0.0)));
        SparseMatrix::from_triplets(n, n, &self.0)
    }
}

/// Solves `A x = rhs` with `x[d] = v` for every `(d, v)` in `fixed`.
fn solve_with_fixed(
    mut a: SparseMatrix,
    mut rhs: Vec<f64>,
    fixed: &[(usize, f64)],
) -> Result<Vec<f64>, LinalgError> {
    let n = a.n_rows();
    let mut xf = vec![0.0; n];
    let mut mask = vec![false; n];
    for &(d, v) in fixed {
        xf[d] = v;
        mask[d] = true;
    }
    let ax = a.matvec(&xf);
    rhs.iter_mut().zip(&ax).for_each(|(r, v)| *r -= v);
    for &(d, v) in fixed {
        rhs[d] = v;
    }
    a.eliminate_symmetric(&mask);
    LinearSolver::default().solve(&a, &rhs)
}

/// Taylor–Hood pair `(ũ, p̃)` with
/// `a_s(u − ũ, v) − (p − p̃, ∇·v) = 0`, `(∇·(u − ũ), q) = 0`,
/// `ũ = u` on the boundary and `∫p̃ = ∫p`.
pub fn stokes_projection(
    problem: &BenchmarkProblem,
    mesh: &Arc<Mesh>,
    params: PhysParams,
) -> Result<(FeFunction, FeFunction), AnalysisError> {
    let spaces = MhdSpaces::new(mesh.clone(), ElementKind::Nedelec1);
    let (nu, np) = (spaces.u.n_dofs(), spaces.p.n_dofs());
    let n = nu + np + 1;
    let a = assemble_as(&spaces.u, params.re);
    let cons = assemble_mixed_constraints(&spaces);
    let mut blocks = Blocks::default();
    blocks.add(&a, 0, 0, 1.0, false);
    blocks.add(&cons.div, 0, nu, -1.0, true);
    blocks.add(&cons.div, nu, 0, -1.0, false);
    for (q, &m) in cons.mean.iter().enumerate() {
        blocks.0.push((nu + q, n - 1, m));
        blocks.0.push((n - 1, nu + q, m));
    }
    let matrix = blocks.build(n)?;

    let mut rhs = vec![0.0; n];
    for_each_error_point(mesh, |t, l, x, w, gl| {
        let j = problem.jet(x);
        let (_, gphi) = crate::fespace::p2_basis(l, gl);
        let ud = spaces.u.cell_dofs(t);
        for c in 0..2 {
            for i in 0..6 {
                let g = j.grad_u[c][0] * gphi[i][0] + j.grad_u[c][1] * gphi[i][1];
                rhs[ud[6 * c + i]] += w * (g / params.re - j.p * gphi[i][c]);
            }
        }
        for (i, &d) in spaces.p.cell_dofs(t).iter().enumerate() {
            rhs[nu + d] -= w * j.div_u() * l[i];
        }
        rhs[n - 1] += w * j.p;
    });
    let fixed = spaces
        .u
        .essential_bc_vector(&|x| problem.u(x), problem.edge_points)
        .map_err(SolverError::from)?;
    let x = solve_with_fixed(matrix, rhs, &fixed)?;
    let u = FeFunction::new(spaces.u.clone(), x[..nu].to_vec()).map_err(SolverError::from)?;
    let p =
        FeFunction::new(spaces.p.clone(), x[nu..nu + np].to_vec()).map_err(SolverError::from)?;
    Ok((u, p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MaxwellVariant {
    /// `a_m(b − b̃, c) − (∇(r − r̃), c) = 0`.
    Standard,
    /// Adds the convective coupling `c₁(b − b̃; u, c)` with the exact `u`.
    #[default]
    Modified,
}

/// Which velocity enters the modified projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Velocity {
    #[default]
    Exact,
    Zero,
}

/// Edge-element pair `(b̃, r̃)` with `(b − b̃, ∇s) = 0` and the variant's
/// curl equation; `b̃` matches the tangential moments of `b` on the boundary
/// and `r̃ = r` there.
pub fn maxwell_projection(
    problem: &BenchmarkProblem,
    mesh: &Arc<Mesh>,
    element: ElementKind,
    params: PhysParams,
    variant: MaxwellVariant,
    velocity: Velocity,
) -> Result<(FeFunction, FeFunction), AnalysisError> {
    let spaces = MhdSpaces::new(mesh.clone(), element);
    let (nb, nr) = (spaces.b.n_dofs(), spaces.r.n_dofs());
    let n = nb + nr;
    let convect = variant == MaxwellVariant::Modified && velocity == Velocity::Exact;
    let vel = |x: [f64; 2]| if convect { problem.u(x) } else { [0.0; 2] };

    let am = assemble_am(&spaces.b, params.rm, params.s);
    let cons = assemble_mixed_constraints(&spaces);
    let mut blocks = Blocks::default();
    blocks.add(&am, 0, 0, 1.0, false);
    blocks.add(&cons.grad, 0, nb, -1.0, true);
    blocks.add(&cons.grad, nb, 0, -1.0, false);
    if convect {
        // c₁(b̃; u, c) = −S(u×b̃, ∇×c)
        let mut c1 = am.clone();
        c1.fill_zero();
        let ne = spaces.b.local_dofs();
        for t in 0..mesh.n_triangles() {
            let bd = spaces.b.cell_dofs(t);
            for_each_point(mesh, element, t, ERROR_DEGREE, |pb| {
                let u = vel(pb.x);
                for i in 0..ne {
                    for j in 0..ne {
                        let uxc = u[0] * pb.e[j][1] - u[1] * pb.e[j][0];
                        c1.add_to(bd[i], bd[j], -pb.w * params.s * uxc * pb.ec[i]);
                    }
                }
            });
        }
        blocks.add(&c1, 0, 0, 1.0, false);
    }
    let matrix = blocks.build(n)?;

    let mut rhs = vec![0.0; n];
    for t in 0..mesh.n_triangles() {
        let bd = spaces.b.cell_dofs(t);
        let rd = spaces.r.cell_dofs(t);
        for_each_point(mesh, element, t, ERROR_DEGREE, |pb| {
            let j = problem.jet(pb.x);
            let u = vel(pb.x);
            let uxb = u[0] * j.b[1] - u[1] * j.b[0];
            for i in 0..pb.ne {
                let gr = j.grad_r[0] * pb.e[i][0] + j.grad_r[1] * pb.e[i][1];
                let v =
                    params.s / params.rm * j.curl_b() * pb.ec[i] - gr - params.s * uxb * pb.ec[i];
                rhs[bd[i]] += pb.w * v;
            }
            let (_, rg) = pb.lagrange(spaces.r.kind());
            for (i, g) in rg.iter().enumerate() {
                rhs[nb + rd[i]] -= pb.w * (j.b[0] * g[0] + j.b[1] * g[1]);
            }
        });
    }
    let mut fixed = spaces
        .b
        .essential_bc_vector(&|x| problem.b(x), problem.edge_points)
        .map_err(SolverError::from)?;
    for (d, v) in spaces
        .r
        .essential_bc_scalar(&|x| problem.r(x))
        .map_err(SolverError::from)?
    {
        fixed.push((nb + d, v));
    }
    let x = solve_with_fixed(matrix, rhs, &fixed)?;
    let b = FeFunction::new(spaces.b.clone(), x[..nb].to_vec()).map_err(SolverError::from)?;
    let r = FeFunction::new(spaces.r.clone(), x[nb..].to_vec()).map_err(SolverError::from)?;
    Ok((b, r))
}

/// `log(e₀/e₁) / log(ratio)`, or `None` when either error is at round-off level.
pub fn rate(e0: f64, e1: f64, refinement_ratio: f64) -> Option<f64> {
    (e0 > RATE_FLOOR && e1 > RATE_FLOOR).then(|| (e0 / e1).ln() / refinement_ratio.ln())
}

/// Rows of a study on one mesh family.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceReport {
    pub problem: String,
    pub element: String,
    /// Rates use `M` ratios on uniform families and `√(N₁/N₀)` (nodes) otherwise.
    pub uniform: bool,
    pub entries: Vec<ErrorReport>,
}

/// Columns with rates in the tabular outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    H1SemiU,
    L2U,
    L2P,
    HCurlB,
    L2B,
    H1R,
    HMinus1B,
}

impl Norm {
    pub fn of(self, e: &ErrorReport) -> f64 {
        match self {
            Self::H1SemiU => e.h1semi_u,
            Self::L2U => e.l2_u,
            Self::L2P => e.l2_p,
            Self::HCurlB => e.hcurl_b,
            Self::L2B => e.l2_b,
            Self::H1R => e.h1_r,
            Self::HMinus1B => e.hminus1_b,
        }
    }
}

impl ConvergenceReport {
    fn ratio(&self, a: &ErrorReport, b: &ErrorReport) -> f64 {
        if self.uniform {
            b.resolution as f64 / a.resolution as f64
        } else {
            (b.n_nodes as f64 / a.n_nodes as f64).sqrt()
        }
    }

    /// Rates between consecutive entries (one fewer than entries).
    pub fn rates(&self, norm: Norm) -> Vec<Option<f64>> {
        self.entries
            .windows(2)
            .map(|w| rate(norm.of(&w[0]), norm.of(&w[1]), self.ratio(&w[0], &w[1])))
            .collect()
    }

    pub fn last_rate(&self, norm: Norm) -> Option<f64> {
        self.rates(norm).last().copied().flatten()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("M,h,dofs,err_h1_u,rate_h1_u,err_l2_p,rate_l2_p,err_curl_b,rate_curl_b,err_h1_r,err_l2_u,err_hm1_b\n");
        let rates = [Norm::H1SemiU, Norm::L2P, Norm::HCurlB].map(|n| self.rates(n));
        let fmt_rate = |r: Option<&Option<f64>>| match r {
            Some(Some(v)) => format!("{v:.4}"),
            _ => "-".to_string(),
        };
        for (i, e) in self.entries.iter().enumerate() {
            let prev = i.checked_sub(1);
            let r = |k: usize| fmt_rate(prev.and_then(|p| rates[k].get(p)));
            let _ = writeln!(
                s,
                "{},{:.6e},{},{:.6e},{},{:.6e},{},{:.6e},{},{:.6e},{:.6e},{:.6e}",
                e.resolution,
                e.h,
                e.dofs,
                e.h1semi_u,
                r(0),
                e.l2_p,
                r(1),
                e.hcurl_b,
                r(2),
                e.h1_r,
                e.l2_u,
                e.hminus1_b
            );
        }
        s
    }

    /// Error/rate table with one row per resolution.
    pub fn to_markdown(&self) -> String {
        let mut s = format!("{} / {}\n\n", self.problem, self.element);
        let head = if self.uniform { "M" } else { "level" };
        let _ = writeln!(
            s,
            "| {head} | ‖∇(u−u_h)‖ | Rate | ‖p−p_h‖ | Rate | ‖b−b_h‖_curl | Rate | ‖r−r_h‖_H¹ | ‖u−u_h‖ | Rate | ‖b−b_h‖_H⁻¹ | Rate | Newton |"
        );
        s.push_str("|---|---|---|---|---|---|---|---|---|---|---|---|---|\n");
        let norms = [
            Norm::H1SemiU,
            Norm::L2P,
            Norm::HCurlB,
            Norm::L2U,
            Norm::HMinus1B,
        ];
        let rates = norms.map(|n| self.rates(n));
        for (i, e) in self.entries.iter().enumerate() {
            let r = |k: usize| match i.checked_sub(1).and_then(|p| rates[k][p]) {
                Some(v) => format!("{v:.2}"),
                None => "–".into(),
            };
            let _ = writeln!(
                s,
                "| {} | {:.3e} | {} | {:.3e} | {} | {:.3e} | {} | {:.3e} | {:.3e} | {} | {:.3e} | {} | {} |",
                e.resolution,
                e.h1semi_u,
                r(0),
                e.l2_p,
                r(1),
                e.hcurl_b,
                r(2),
                e.h1_r,
                e.l2_u,
                r(3),
                e.hminus1_b,
                r(4),
                e.iterations
            );
        }
        s
    }
}

pub fn element_name(kind: ElementKind) -> &'static str {
    match kind {
        ElementKind::Nedelec1 => "nedelec1",
        ElementKind::Nedelec2 => "nedelec2",
        ElementKind::LagrangeP1 => "p1",
        ElementKind::LagrangeP2 => "p2",
        ElementKind::VectorP2 => "vector-p2",
    }
}

/// Newton solve and error norms on every member of `family`.
pub fn convergence_study(
    problem: &BenchmarkProblem,
    family: MeshFamily,
    resolutions: &[usize],
    element: ElementKind,
    config: &NewtonConfig,
) -> Result<ConvergenceReport, AnalysisError> {
    if resolutions.len() < 2 {
        return Err(AnalysisError::TooFewResolutions(resolutions.len()));
    }
    let mut report = ConvergenceReport {
        problem: problem.name.to_string(),
        element: element_name(element).to_string(),
        uniform: family.is_uniform(),
        entries: Vec::new(),
    };
    for &m in resolutions {
        let mesh = Arc::new(family.build(m)?);
        let out = match newton_solve(problem, mesh, element, problem.params, config) {
            Ok(o) => o,
            Err(source) => {
                return Err(AnalysisError::Study {
                    partial: Box::new(report),
                    resolution: m,
                    source,
                })
            }
        };
        let mut e = error_norms(&out.state, problem);
        e.resolution = m;
        e.iterations = out.iterations;
        report.entries.push(e);
    }
    Ok(report)
}

/// Errors of the projections on one mesh.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ProjectionErrors {
    pub resolution: usize,
    pub h: f64,
    pub stokes_h1semi_u: f64,
    pub stokes_l2_u: f64,
    pub stokes_l2_p: f64,
    /// `‖b − b̃‖_{H(curl)}` of the modified projection.
    pub modified_hcurl_b: f64,
    pub modified_hminus1_b: f64,
    pub modified_hminus1_curl_b: f64,
    pub standard_hcurl_b: f64,
    pub standard_hminus1_b: f64,
    /// `max |r̃_modified − r̃_standard|` over coefficients.
    pub multiplier_gap: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProjectionReport {
    pub problem: String,
    pub element: String,
    pub entries: Vec<ProjectionErrors>,
}

fn b_errors(problem: &BenchmarkProblem, b: &FeFunction, dual: &DualNorm) -> (f64, f64, f64) {
    let mesh = b.space().mesh().clone();
    let mut acc = 0.0;
    for_each_error_point(&mesh, |t, l, x, w, gl| {
        let j = problem.jet(x);
        let v = b.eval_with(t, l, gl);
        acc += w * (sq(sub(j.b, v.value)) + (j.curl_b() - v.curl).powi(2));
    });
    let hm1 = dual.vector(&|t, l, x| sub(problem.b(x), b.eval(t, l).value));
    let hm1_curl = dual.scalar(&|t, l, x| problem.jet(x).curl_b() - b.eval(t, l).curl);
    (acc.sqrt(), hm1, hm1_curl)
}

/// Stokes and both Maxwell projections on uniform meshes of the problem's domain.
pub fn projection_study(
    problem: &BenchmarkProblem,
    resolutions: &[usize],
    element: ElementKind,
    velocity: Velocity,
) -> Result<ProjectionReport, AnalysisError> {
    if resolutions.len() < 2 {
        return Err(AnalysisError::TooFewResolutions(resolutions.len()));
    }
    let family = problem.default_family();
    let prm = problem.params;
    let mut entries = Vec::new();
    for &m in resolutions {
        let mesh = Arc::new(family.build(m)?);
        let dual = DualNorm::new(&mesh);
        let (us, ps) = stokes_projection(problem, &mesh, prm)?;
        let mut acc = [0.0; 3];
        for_each_error_point(&mesh, |t, l, x, w, gl| {
            let j = problem.jet(x);
            let u = us.eval_with(t, l, gl);
            acc[0] += w * (sq(sub(j.grad_u[0], u.grad[0])) + sq(sub(j.grad_u[1], u.grad[1])));
            acc[1] += w * sq(sub(j.u, u.value));
            // ∫p̃ = ∫p, so no mean shift here
            acc[2] += w * (j.p - ps.eval_with(t, l, gl).value[0]).powi(2);
        });
        let (bm, rm) = maxwell_projection(
            problem,
            &mesh,
            element,
            prm,
            MaxwellVariant::Modified,
            velocity,
        )?;
        let (bs, rs) = maxwell_projection(
            problem,
            &mesh,
            element,
            prm,
            MaxwellVariant::Standard,
            velocity,
        )?;
        let (m_curl, m_hm1, m_hm1_curl) = b_errors(problem, &bm, &dual);
        let (s_curl, s_hm1, _) = b_errors(problem, &bs, &dual);
        let gap = rm
            .coeffs()
            .iter()
            .zip(rs.coeffs())
            .fold(0.0f64, |g, (a, b)| g.max((a - b).abs()));
        entries.push(ProjectionErrors {
            resolution: m,
            h: mesh.h(),
            stokes_h1semi_u: acc[0].sqrt(),
            stokes_l2_u: acc[1].sqrt(),
            stokes_l2_p: acc[2].sqrt(),
            modified_hcurl_b: m_curl,
            modified_hminus1_b: m_hm1,
            modified_hminus1_curl_b: m_hm1_curl,
            standard_hcurl_b: s_curl,
            standard_hminus1_b: s_hm1,
            multiplier_gap: gap,
        });
    }
    Ok(ProjectionReport {
        problem: problem.name.to_string(),
        element: element_name(element).to_string(),
        entries,
    })
}

impl ProjectionReport {
    pub fn rates(&self, f: impl Fn(&ProjectionErrors) -> f64) -> Vec<Option<f64>> {
        self.entries
            .windows(2)
            .map(|w| {
                rate(
                    f(&w[0]),
                    f(&w[1]),
                    w[1].resolution as f64 / w[0].resolution as f64,
                )
            })
            .collect()
    }

    const COLUMNS: [(&'static str, fn(&ProjectionErrors) -> f64); 7] = [
        ("stokes_h1_u", |e| e.stokes_h1semi_u),
        ("stokes_l2_u", |e| e.stokes_l2_u),
        ("modified_curl_b", |e| e.modified_hcurl_b),
        ("modified_hm1_b", |e| e.modified_hminus1_b),
        ("modified_hm1_curl_b", |e| e.modified_hminus1_curl_b),
        ("standard_curl_b", |e| e.standard_hcurl_b),
        ("standard_hm1_b", |e| e.standard_hminus1_b),
    ];

    pub fn to_csv(&self) -> String {
        let mut s = String::from("M,h");
        for (name, _) in Self::COLUMNS {
            let _ = write!(s, ",err_{name},rate_{name}");
        }
        s.push_str(",multiplier_gap\n");
        let rates: Vec<_> = Self::COLUMNS.iter().map(|(_, f)| self.rates(f)).collect();
        for (i, e) in self.entries.iter().enumerate() {
            let _ = write!(s, "{},{:.6e}", e.resolution, e.h);
            for (k, (_, f)) in Self::COLUMNS.iter().enumerate() {
                let r = match i.checked_sub(1).and_then(|p| rates[k][p]) {
                    Some(v) => format!("{v:.4}"),
                    None => "-".into(),
                };
                let _ = write!(s, ",{:.6e},{r}", f(e));
            }
            let _ = writeln!(s, ",{:.3e}", e.multiplier_gap);
        }
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut s = format!("{} / {} projections\n\n| M |", self.problem, self.element);
        for (name, _) in Self::COLUMNS {
            let _ = write!(s, " {name} | Rate |");
        }
        s.push_str(" r̃ gap |\n|---|");
        for _ in Self::COLUMNS {
            s.push_str("---|---|");
        }
        s.push_str("---|\n");
        let rates: Vec<_> = Self::COLUMNS.iter().map(|(_, f)| self.rates(f)).collect();
        for (i, e) in self.entries.iter().enumerate() {
            let _ = write!(s, "| {} |", e.resolution);
            for (k, (_, f)) in Self::COLUMNS.iter().enumerate() {
                let r = match i.checked_sub(1).and_then(|p| rates[k][p]) {
                    Some(v) => format!("{v:.2}"),
                    None => "–".into(),
                };
                let _ = write!(s, " {:.3e} | {r} |", f(e));
            }
            let _ = writeln!(s, " {:.1e} |", e.multiplier_gap);
        }
        s
    }
}

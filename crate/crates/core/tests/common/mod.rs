//! Property checks shared by the property suites and the acceptance run.
//! Each returns a description of the first violation.
#![allow(dead_code)]

use std::sync::Arc;

use mhd_core::fespace::{ElementKind, FeFunction};
use mhd_core::forms::{
    assemble_am, assemble_c0, assemble_c1, assemble_c1_lorentz, AssemblyMode, MhdSpaces,
    NewtonAssembler, PhysParams,
};
use mhd_core::linalg::{norm2, LinearSolver, SparseMatrix};
use mhd_core::mesh::{uniform_unit_square, Mesh};
use mhd_core::problems::{smooth_benchmark, zero_problem, Domain};
use mhd_core::quadrature::{edge_rule, triangle_rule, MAX_EDGE_POINTS, MAX_TRIANGLE_DEGREE};
use mhd_core::solver::{newton_solve, NewtonConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<(), String>;

pub fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>() - 0.5).collect()
}

fn square_spaces(m: usize, kind: ElementKind) -> MhdSpaces {
    MhdSpaces::new(Arc::new(uniform_unit_square(m).unwrap()), kind)
}

/// Euler relation, positive areas, two-sided interior edges with opposite
/// signs, one-sided boundary edges, and the total area.
pub fn mesh_invariants(mesh: &Mesh, area: f64) -> Check {
    ensure(mesh.euler_characteristic() == 1, || {
        format!("V - E + T = {}", mesh.euler_characteristic())
    })?;
    for t in 0..mesh.n_triangles() {
        ensure(mesh.area(t) > 0.0, || {
            format!("triangle {t} has area {}", mesh.area(t))
        })?;
    }
    let mut count = vec![0; mesh.n_edges()];
    let mut signs = vec![0.0; mesh.n_edges()];
    for te in mesh.tri_edges() {
        for &(e, s) in te {
            count[e] += 1;
            signs[e] += s;
        }
    }
    for e in 0..mesh.n_edges() {
        let expected = if mesh.is_boundary_edge(e) { 1 } else { 2 };
        ensure(count[e] == expected, || {
            format!("edge {e} shared by {} triangles", count[e])
        })?;
        ensure(expected == 1 || signs[e] == 0.0, || {
            format!("edge {e} signs do not cancel")
        })?;
    }
    let total = mesh.total_area();
    ensure((total - area).abs() <= 1e-12 * area, || {
        format!("total area {total} instead of {area}")
    })
}

/// Every monomial up to the rule's degree is integrated to 1e-14.
pub fn quadrature_exactness(degree: usize) -> Check {
    let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
    let rule = triangle_rule(degree).map_err(|e| e.to_string())?;
    for a in 0..=degree as u32 {
        for b in 0..=(degree as u32 - a) {
            let q: f64 = rule
                .points
                .iter()
                .zip(&rule.weights)
                .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32))
                .sum();
            let exact = fact(a) * fact(b) / fact(a + b + 2);
            ensure((q - exact).abs() <= 1e-14 * exact.max(1e-3), || {
                format!("degree {degree}: x^{a} y^{b} gives {q}, expected {exact}")
            })?;
        }
    }
    Ok(())
}

pub fn edge_quadrature_exactness(n: usize) -> Check {
    let rule = edge_rule(n).map_err(|e| e.to_string())?;
    for k in 0..2 * n as i32 {
        let q: f64 = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(t, w)| w * t.powi(k))
            .sum();
        ensure((q - 1.0 / (k + 1) as f64).abs() <= 1e-14, || {
            format!("{n} points: t^{k} gives {q}")
        })?;
    }
    Ok(())
}

pub fn all_quadrature_rules() -> Check {
    (1..=MAX_TRIANGLE_DEGREE).try_for_each(quadrature_exactness)?;
    (1..=MAX_EDGE_POINTS).try_for_each(edge_quadrature_exactness)
}

/// `vᵀ C₀(w) v = 0` for random `w` and `v`.
pub fn convection_skew(m: usize, seed: u64) -> Check {
    let sp = square_spaces(m, ElementKind::Nedelec1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = FeFunction::new(sp.u.clone(), random_vector(&mut rng, sp.u.n_dofs())).unwrap();
    let (c0, _) = assemble_c0(&w, &sp.u);
    for _ in 0..20 {
        let v = random_vector(&mut rng, sp.u.n_dofs());
        let vv: f64 = v.iter().map(|x| x * x).sum();
        let q = c0.bilinear(&v, &v);
        ensure(q.abs() <= 1e-12 * vv, || format!("M={m}: vᵀC₀v = {q:e}"))?;
    }
    Ok(())
}

/// `S((∇×c)×d, v)` and `−S(v×d, ∇×c)` assembled separately agree.
pub fn coupling_adjoint(m: usize, seed: u64, kind: ElementKind) -> Check {
    let sp = square_spaces(m, kind);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = FeFunction::new(sp.b.clone(), random_vector(&mut rng, sp.b.n_dofs())).unwrap();
    let s = 0.5 + rng.random::<f64>();
    let diff =
        assemble_c1(&d, &sp.u, &sp.b, s).max_abs_diff(&assemble_c1_lorentz(&d, &sp.u, &sp.b, s));
    ensure(diff <= 1e-12, || {
        format!("{kind:?} M={m}: difference {diff:e}")
    })
}

/// Discrete gradients are in the kernel of the curl-curl matrix.
pub fn de_rham(m: usize, seed: u64, kind: ElementKind) -> Check {
    let sp = square_spaces(m, kind);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = random_vector(&mut rng, sp.mesh.n_nodes());
    let g = sp.b.gradient_coefficients(&s);
    let am = assemble_am(&sp.b, 0.5 + rng.random::<f64>(), 0.5 + rng.random::<f64>());
    let worst = am.matvec(&g).iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let scale = am.max_abs() * g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    ensure(worst <= 1e-13 * scale, || {
        format!("{kind:?} M={m}: |A_m ∇s| = {worst:e}")
    })
}

/// Relative error of a forward difference of the residual against `J δ`.
pub fn jacobian_fd_error(m: usize, seed: u64, kind: ElementKind) -> f64 {
    let problem = smooth_benchmark();
    let asm = NewtonAssembler::new(
        square_spaces(m, kind),
        &problem,
        PhysParams::new(0.8, 1.2, 1.1),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = random_vector(&mut rng, asm.n_total());
    let dx = random_vector(&mut rng, asm.n_total());
    let (jac, r0) = asm.assemble(&x, AssemblyMode::Newton, true).unwrap();
    let jdx = jac.unwrap().matvec(&dx);
    let eps = 1e-7;
    let xp: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + eps * b).collect();
    let (_, r1) = asm.assemble(&xp, AssemblyMode::Newton, false).unwrap();
    let diff: Vec<f64> = r1
        .iter()
        .zip(&r0)
        .zip(&jdx)
        .map(|((a, b), j)| (a - b) / eps - j)
        .collect();
    norm2(&diff) / norm2(&jdx)
}

pub fn jacobian_consistent(m: usize, seed: u64, kind: ElementKind) -> Check {
    let e = jacobian_fd_error(m, seed, kind);
    ensure(e <= 1e-6, || {
        format!("{kind:?} M={m}: relative error {e:e}")
    })
}

pub fn zero_data_zero_solution(m: usize, kind: ElementKind) -> Check {
    let params = PhysParams::new(1.0, 1.0, 1.0);
    let problem = zero_problem(Domain::UnitSquare, params);
    let mesh = Arc::new(uniform_unit_square(m).unwrap());
    let out = newton_solve(&problem, mesh, kind, params, &NewtonConfig::default())
        .map_err(|e| e.to_string())?;
    ensure(out.iterations == 1, || {
        format!("{} iterations", out.iterations)
    })?;
    ensure(out.state.to_vector().iter().all(|&v| v == 0.0), || {
        "nonzero state".into()
    })
}

/// Solves with the automatic backend and checks the residual contract.
pub fn lu_residual(a: &SparseMatrix, b: &[f64]) -> Result<f64, String> {
    let x = LinearSolver::default()
        .solve(a, b)
        .map_err(|e| e.to_string())?;
    let ax = a.matvec(&x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(u, v)| u - v).collect();
    let rel = norm2(&r) / norm2(b);
    ensure(rel <= 1e-10, || format!("relative residual {rel:e}")).map(|_| rel)
}

/// Residual contract on Newton systems of the smooth benchmark.
pub fn newton_system_residuals(m: usize, kind: ElementKind) -> Check {
    let problem = smooth_benchmark();
    let asm = NewtonAssembler::new(square_spaces(m, kind), &problem, problem.params);
    let mut rng = ChaCha8Rng::seed_from_u64(m as u64);
    let x = random_vector(&mut rng, asm.n_total());
    for mode in [AssemblyMode::Linear, AssemblyMode::Newton] {
        let sys = asm.newton_system(&x, mode).map_err(|e| e.to_string())?;
        lu_residual(&sys.matrix, &sys.rhs).map_err(|e| format!("{kind:?} M={m} {mode:?}: {e}"))?;
    }
    Ok(())
}

use std::io::{self, Write};

use mhd_core::mesh::PointLocator;
use mhd_core::problems::Domain;
use mhd_core::solver::{MhdState, NewtonOutcome};
use mhd_core::ErrorReport;

/// Samples the solution on an `n × n` grid over the domain's bounding box,
/// skipping points outside the domain. One `x y u1 u2 p b1 b2 r` row per point.
pub fn write_grid<W: Write>(
    mut w: W,
    state: &MhdState,
    domain: Domain,
    n: usize,
) -> io::Result<()> {
    let mesh = state.u.space().mesh().clone();
    let locator = PointLocator::new(&mesh);
    let (lo, hi) = match domain {
        Domain::UnitSquare => (0.0, 1.0),
        Domain::LShape => (-1.0, 1.0),
    };
    let step = (hi - lo) / (n.max(2) - 1) as f64;
    writeln!(w, "# x y u1 u2 p b1 b2 r")?;
    for j in 0..n {
        for i in 0..n {
            // the last grid line lands exactly on the boundary
            let coord = |k: usize| if k + 1 == n { hi } else { lo + k as f64 * step };
            let x = [coord(i), coord(j)];
            if !domain.contains(x) {
                continue;
            }
            let Some((t, l)) = locator.locate(x) else {
                continue;
            };
            let u = state.u.eval(t, l).value;
            let p = state.p.eval(t, l).value[0];
            let b = state.b.eval(t, l).value;
            let r = state.r.eval(t, l).value[0];
            writeln!(
                w,
                "{:.6} {:.6} {:.10e} {:.10e} {:.10e} {:.10e} {:.10e} {:.10e}",
                x[0], x[1], u[0], u[1], p, b[0], b[1], r
            )?;
        }
    }
    Ok(())
}

pub fn write_history<W: Write>(mut w: W, history: &[f64]) -> io::Result<()> {
    for (k, e) in history.iter().enumerate() {
        writeln!(w, "  step {:>2}  increment {e:.6e}", k + 1)?;
    }
    Ok(())
}

pub fn write_summary<W: Write>(
    mut w: W,
    header: &str,
    out: &NewtonOutcome,
    errors: &ErrorReport,
) -> io::Result<()> {
    writeln!(w, "{header}")?;
    writeln!(
        w,
        "unknowns {}  nodes {}  h {:.6e}",
        errors.dofs, errors.n_nodes, errors.h
    )?;
    writeln!(w, "newton converged in {} steps", out.iterations)?;
    write_history(&mut w, &out.history)?;
    writeln!(w, "relative residual {:.3e}", out.relative_residual)?;
    writeln!(w, "errors against the exact solution:")?;
    for (label, v) in [
        ("|u - u_h|_1", errors.h1semi_u),
        ("||u - u_h||_0", errors.l2_u),
        ("||p - p_h||_0", errors.l2_p),
        ("||b - b_h||_curl", errors.hcurl_b),
        ("||b - b_h||_0", errors.l2_b),
        ("||b - b_h||_-1", errors.hminus1_b),
        ("||r - r_h||_1", errors.h1_r),
    ] {
        writeln!(w, "  {label:<18} {v:.6e}")?;
    }
    Ok(())
}

//! Manufactured benchmark problems with exact fields and derived sources.
//!
//! Sources are evaluated from a pointwise jet of the exact fields:
//!
//! ```text
//! f = −Re⁻¹Δu + (u·∇)u + ∇p − S (∇×b)×b
//! g = S Rm⁻¹ ∇×(∇×b) − S ∇×(u×b) − ∇r
//! ```
//!
//! with the 2D reductions `∇×c = ∂ₓc₂ − ∂ᵧc₁`, `s×d = s(−d₂, d₁)`,
//! `v×d = v₁d₂ − v₂d₁` and `∇×w = (∂ᵧw, −∂ₓw)` for scalars.

use std::f64::consts::PI;

use crate::forms::PhysParams;
use crate::mesh::MeshFamily;

/// Exact fields and the derivatives the sources need, at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet {
    pub u: [f64; 2],
    /// `grad_u[c][d] = ∂_d u_c`.
    pub grad_u: [[f64; 2]; 2],
    pub lap_u: [f64; 2],
    pub p: f64,
    pub grad_p: [f64; 2],
    pub b: [f64; 2],
    /// `grad_b[c][d] = ∂_d b_c`.
    pub grad_b: [[f64; 2]; 2],
    pub grad_curl_b: [f64; 2],
    pub r: f64,
    pub grad_r: [f64; 2],
}

impl Jet {
    pub fn curl_b(&self) -> f64 {
        self.grad_b[1][0] - self.grad_b[0][1]
    }

    pub fn div_u(&self) -> f64 {
        self.grad_u[0][0] + self.grad_u[1][1]
    }

    pub fn div_b(&self) -> f64 {
        self.grad_b[0][0] + self.grad_b[1][1]
    }

    pub fn f(&self, prm: &PhysParams) -> [f64; 2] {
        let cb = self.curl_b();
        let mut f = [0.0; 2];
        for (c, fc) in f.iter_mut().enumerate() {
            let conv = self.u[0] * self.grad_u[c][0] + self.u[1] * self.grad_u[c][1];
            *fc = -self.lap_u[c] / prm.re + conv + self.grad_p[c];
        }
        // (∇×b)×b = cb·(−b₂, b₁)
        f[0] -= prm.s * cb * (-self.b[1]);
        f[1] -= prm.s * cb * self.b[0];
        f
    }

    pub fn g(&self, prm: &PhysParams) -> [f64; 2] {
        // w = u×b and its gradient
        let dw = |d: usize| {
            self.grad_u[0][d] * self.b[1] + self.u[0] * self.grad_b[1][d]
                - self.grad_u[1][d] * self.b[0]
                - self.u[1] * self.grad_b[0][d]
        };
        let (wx, wy) = (dw(0), dw(1));
        let k = prm.s / prm.rm;
        [
            k * self.grad_curl_b[1] - prm.s * wy - self.grad_r[0],
            -k * self.grad_curl_b[0] + prm.s * wx - self.grad_r[1],
        ]
    }
}

/// Reading of the velocity printed for the unit-square benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VelocityVariant {
    /// Second component negated so that `u = curl(½ x²(x−1)² y²(y−1)²)`.
    #[default]
    Solenoidal,
    /// As printed; `∇·u ≠ 0`, balanced by a mass source in the constraint.
    AsPrinted,
}

/// Reading of the magnetic field printed for the unit-square benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MagneticVariant {
    /// Second component negated: `b = (sin πx cos πy, −sin πy cos πx)` is
    /// divergence-free with `∇×b = 2π sin πx sin πy`.
    #[default]
    Solenoidal,
    /// As printed: curl-free with `∇·b = 2π cos πx cos πy`, balanced by a
    /// source in the magnetic constraint.
    AsPrinted,
}

/// Opening-angle parameter inside `cos(λω)` of the L-shape stream function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Omega {
    /// `ω = 3π/2`, the L-shape opening angle.
    #[default]
    ThreeHalvesPi,
    /// `ω = 2/3`, read literally.
    TwoThirds,
}

impl Omega {
    pub fn value(self) -> f64 {
        match self {
            Self::ThreeHalvesPi => 1.5 * PI,
            Self::TwoThirds => 2.0 / 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    UnitSquare,
    LShape,
}

impl Domain {
    pub fn area(self) -> f64 {
        match self {
            Self::UnitSquare => 1.0,
            Self::LShape => 3.0,
        }
    }

    pub fn contains(self, x: [f64; 2]) -> bool {
        let tol = 1e-14;
        match self {
            Self::UnitSquare => {
                (-tol..=1.0 + tol).contains(&x[0]) && (-tol..=1.0 + tol).contains(&x[1])
            }
            Self::LShape => {
                let in_box = (-1.0 - tol..=1.0 + tol).contains(&x[0])
                    && (-1.0 - tol..=1.0 + tol).contains(&x[1]);
                in_box && !(x[0] > tol && x[1] < -tol)
            }
        }
    }

    pub fn uniform_family(self) -> MeshFamily {
        match self {
            Self::UnitSquare => MeshFamily::UnitSquareUniform,
            Self::LShape => MeshFamily::LShapeUniform,
        }
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Zero,
    Smooth(VelocityVariant, MagneticVariant),
    Polynomial,
    Corner(Box<CornerFields>),
}

/// A benchmark: parameters, domain and exact solution.
#[derive(Debug, Clone)]
pub struct BenchmarkProblem {
    pub name: &'static str,
    pub params: PhysParams,
    pub domain: Domain,
    kind: Kind,
    /// Edge-quadrature size for tangential boundary moments of `b`.
    pub edge_points: usize,
}

/// Smooth benchmark on the unit square with `Re = Rm = S = 1`.
pub fn smooth_benchmark() -> BenchmarkProblem {
    smooth_benchmark_variant(VelocityVariant::Solenoidal)
}

pub fn smooth_benchmark_variant(variant: VelocityVariant) -> BenchmarkProblem {
    smooth_benchmark_with(variant, MagneticVariant::default())
}

pub fn smooth_benchmark_with(
    velocity: VelocityVariant,
    magnetic: MagneticVariant,
) -> BenchmarkProblem {
    BenchmarkProblem {
        name: "smooth",
        params: PhysParams::new(1.0, 1.0, 1.0),
        domain: Domain::UnitSquare,
        kind: Kind::Smooth(velocity, magnetic),
        edge_points: 3,
    }
}

/// Singular benchmark on the L-shape with `Re = Rm = 0.1`, `S = 1`.
pub fn corner_benchmark() -> BenchmarkProblem {
    corner_benchmark_with(Omega::ThreeHalvesPi)
}

pub fn corner_benchmark_with(omega: Omega) -> BenchmarkProblem {
    BenchmarkProblem {
        name: "corner",
        params: PhysParams::new(0.1, 0.1, 1.0),
        domain: Domain::LShape,
        kind: Kind::Corner(Box::new(CornerFields::new(CORNER_LAMBDA, omega.value()))),
        edge_points: 5,
    }
}

/// Zero data and zero solution on `domain`.
pub fn zero_problem(domain: Domain, params: PhysParams) -> BenchmarkProblem {
    BenchmarkProblem {
        name: "zero",
        params,
        domain,
        kind: Kind::Zero,
        edge_points: 3,
    }
}

/// Unit-square problem whose exact solution lies in the discrete spaces:
/// `u = (y², x²)`, `p = x − ½`, `b = (1 − y, x)`, `r = 0`.
pub fn polynomial_problem(params: PhysParams) -> BenchmarkProblem {
    BenchmarkProblem {
        name: "polynomial",
        params,
        domain: Domain::UnitSquare,
        kind: Kind::Polynomial,
        edge_points: 3,
    }
}

/// Corner exponent of the L-shape stream function, as printed.
pub const CORNER_LAMBDA: f64 = 0.54448;

impl BenchmarkProblem {
    pub fn jet(&self, x: [f64; 2]) -> Jet {
        match &self.kind {
            Kind::Zero => Jet::default(),
            Kind::Smooth(v, m) => smooth_jet(x, *v, *m),
            Kind::Polynomial => Jet {
                u: [x[1] * x[1], x[0] * x[0]],
                grad_u: [[0.0, 2.0 * x[1]], [2.0 * x[0], 0.0]],
                lap_u: [2.0, 2.0],
                p: x[0] - 0.5,
                grad_p: [1.0, 0.0],
                b: [1.0 - x[1], x[0]],
                grad_b: [[0.0, -1.0], [1.0, 0.0]],
                ..Jet::default()
            },
            Kind::Corner(c) => c.jet(x),
        }
    }

    pub fn u(&self, x: [f64; 2]) -> [f64; 2] {
        self.jet(x).u
    }

    pub fn p(&self, x: [f64; 2]) -> f64 {
        self.jet(x).p
    }

    pub fn b(&self, x: [f64; 2]) -> [f64; 2] {
        self.jet(x).b
    }

    pub fn r(&self, x: [f64; 2]) -> f64 {
        self.jet(x).r
    }

    pub fn f(&self, x: [f64; 2]) -> [f64; 2] {
        self.jet(x).f(&self.params)
    }

    pub fn g(&self, x: [f64; 2]) -> [f64; 2] {
        self.jet(x).g(&self.params)
    }

    /// Mean of the exact pressure over the domain.
    pub fn pressure_mean(&self) -> f64 {
        match &self.kind {
            // ∫(2x−1)(2y−1) over the unit square vanishes.
            Kind::Zero | Kind::Smooth(..) | Kind::Polynomial => 0.0,
            Kind::Corner(c) => c.pressure_integral() / self.domain.area(),
        }
    }

    /// Whether `∇·u` vanishes identically (otherwise it enters as a mass source).
    pub fn is_solenoidal(&self) -> bool {
        !matches!(self.kind, Kind::Smooth(VelocityVariant::AsPrinted, _))
    }

    pub fn default_family(&self) -> MeshFamily {
        self.domain.uniform_family()
    }
}

fn smooth_jet(x: [f64; 2], variant: VelocityVariant, magnetic: MagneticVariant) -> Jet {
    let sigma = match variant {
        VelocityVariant::Solenoidal => -1.0,
        VelocityVariant::AsPrinted => 1.0,
    };
    // q(t) = t²(t−1)², m(t) = t(t−1)(2t−1) = q'(t)/2
    let q = |t: f64| t * t * (t - 1.0) * (t - 1.0);
    let m = |t: f64| t * (t - 1.0) * (2.0 * t - 1.0);
    let m1 = |t: f64| 6.0 * t * t - 6.0 * t + 1.0;
    let m2 = |t: f64| 12.0 * t - 6.0;
    let [xx, yy] = x;
    let u = [q(xx) * m(yy), sigma * q(yy) * m(xx)];
    let grad_u = [
        [2.0 * m(xx) * m(yy), q(xx) * m1(yy)],
        [sigma * q(yy) * m1(xx), sigma * 2.0 * m(yy) * m(xx)],
    ];
    let lap_u = [
        2.0 * m1(xx) * m(yy) + q(xx) * m2(yy),
        sigma * (q(yy) * m2(xx) + 2.0 * m1(yy) * m(xx)),
    ];
    let (sx, cx) = (PI * xx).sin_cos();
    let (sy, cy) = (PI * yy).sin_cos();
    let tau = match magnetic {
        MagneticVariant::Solenoidal => -1.0,
        MagneticVariant::AsPrinted => 1.0,
    };
    let b = [sx * cy, tau * sy * cx];
    let grad_b = [
        [PI * cx * cy, -PI * sx * sy],
        [-tau * PI * sy * sx, tau * PI * cy * cx],
    ];
    // ∇×b = π(1 − τ) sin πx sin πy
    let k = PI * PI * (1.0 - tau);
    Jet {
        u,
        grad_u,
        lap_u,
        p: (2.0 * xx - 1.0) * (2.0 * yy - 1.0),
        grad_p: [2.0 * (2.0 * yy - 1.0), 2.0 * (2.0 * xx - 1.0)],
        b,
        grad_b,
        grad_curl_b: [k * cx * sy, k * sx * cy],
        r: 0.0,
        grad_r: [0.0; 2],
    }
}

/// `Σ aₖ cos(νₖθ) + bₖ sin(νₖθ)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrigSeries {
    terms: Vec<(f64, f64, f64)>,
}

impl TrigSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cos(nu: f64, a: f64) -> Self {
        Self {
            terms: vec![(nu, a, 0.0)],
        }
    }

    pub fn sin(nu: f64, b: f64) -> Self {
        Self {
            terms: vec![(nu, 0.0, b)],
        }
    }

    fn push(&mut self, nu: f64, a: f64, b: f64) {
        // cos is even and sin odd in ν: keep ν ≥ 0.
        let (nu, a, b) = if nu < 0.0 { (-nu, a, -b) } else { (nu, a, b) };
        match self.terms.iter_mut().find(|t| (t.0 - nu).abs() < 1e-12) {
            Some(t) => {
                t.1 += a;
                t.2 += b;
            }
            None => self.terms.push((nu, a, b)),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for &(nu, a, b) in &other.terms {
            out.push(nu, a, b);
        }
        out
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|&(nu, a, b)| (nu, k * a, k * b))
                .collect(),
        }
    }

    pub fn derivative(&self) -> Self {
        let mut out = Self::new();
        for &(nu, a, b) in &self.terms {
            out.push(nu, nu * b, -nu * a);
        }
        out
    }

    /// Product with `cos θ`.
    pub fn mul_cos(&self) -> Self {
        let mut out = Self::new();
        for &(nu, a, b) in &self.terms {
            out.push(nu - 1.0, 0.5 * a, 0.5 * b);
            out.push(nu + 1.0, 0.5 * a, 0.5 * b);
        }
        out
    }

    /// Product with `sin θ`.
    pub fn mul_sin(&self) -> Self {
        let mut out = Self::new();
        for &(nu, a, b) in &self.terms {
            // sinθ cosνθ = ½(sin(ν+1)θ − sin(ν−1)θ); sinθ sinνθ = ½(cos(ν−1)θ − cos(ν+1)θ)
            out.push(nu + 1.0, -0.5 * b, 0.5 * a);
            out.push(nu - 1.0, 0.5 * b, -0.5 * a);
        }
        out
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(nu, a, b)| {
                let (s, c) = (nu * theta).sin_cos();
                a * c + b * s
            })
            .sum()
    }

    /// `∫_{θ0}^{θ1}` of the series.
    pub fn integrate(&self, t0: f64, t1: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(nu, a, b)| {
                if nu.abs() < 1e-12 {
                    a * (t1 - t0)
                } else {
                    a * ((nu * t1).sin() - (nu * t0).sin()) / nu
                        - b * ((nu * t1).cos() - (nu * t0).cos()) / nu
                }
            })
            .sum()
    }
}

/// `ρ^a g(θ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarTerm {
    pub power: f64,
    pub angular: TrigSeries,
}

impl PolarTerm {
    pub fn new(power: f64, angular: TrigSeries) -> Self {
        Self { power, angular }
    }

    /// `∂ₓ(ρ^a g) = ρ^{a−1}(a cosθ g − sinθ g′)`.
    pub fn dx(&self) -> Self {
        let g = &self.angular;
        Self::new(
            self.power - 1.0,
            g.mul_cos()
                .scale(self.power)
                .add(&g.derivative().mul_sin().scale(-1.0)),
        )
    }

    /// `∂ᵧ(ρ^a g) = ρ^{a−1}(a sinθ g + cosθ g′)`.
    pub fn dy(&self) -> Self {
        let g = &self.angular;
        Self::new(
            self.power - 1.0,
            g.mul_sin().scale(self.power).add(&g.derivative().mul_cos()),
        )
    }

    pub fn eval(&self, rho: f64, theta: f64) -> f64 {
        rho.powf(self.power) * self.angular.eval(theta)
    }
}

/// Polar angle in `[0, 2π)`.
pub fn polar_angle(x: [f64; 2]) -> f64 {
    let t = x[1].atan2(x[0]);
    if t < 0.0 {
        t + 2.0 * PI
    } else {
        t
    }
}

/// Exact L-shape fields: `u = curl(ρ^{1+λ}φ)`, `p = ρ^{λ−1}((1+λ)²φ′ + φ‴)/(1−λ)`,
/// `b = ∇(ρ^{2/3} sin(2θ/3))`, `r = 0`.
#[derive(Debug, Clone)]
struct CornerFields {
    // Stream function derivatives by multi-index (i, j) = ∂ₓ^i ∂ᵧ^j ψ.
    psi: Vec<((usize, usize), PolarTerm)>,
    p: PolarTerm,
    p_dx: PolarTerm,
    p_dy: PolarTerm,
    chi: Vec<((usize, usize), PolarTerm)>,
}

fn derivatives(base: &PolarTerm, max_order: usize) -> Vec<((usize, usize), PolarTerm)> {
    let mut out = vec![((0, 0), base.clone())];
    let mut frontier = vec![((0, 0), base.clone())];
    for _ in 0..max_order {
        let mut next = Vec::new();
        for ((i, j), t) in &frontier {
            if *j == 0 {
                next.push(((i + 1, 0), t.dx()));
            }
            next.push(((*i, j + 1), t.dy()));
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

impl CornerFields {
    fn new(lambda: f64, omega: f64) -> Self {
        let c = (lambda * omega).cos();
        let (a, b) = (1.0 + lambda, 1.0 - lambda);
        let phi = TrigSeries::sin(a, c / a)
            .add(&TrigSeries::cos(a, -1.0))
            .add(&TrigSeries::sin(b, -c / b))
            .add(&TrigSeries::cos(b, 1.0));
        let d1 = phi.derivative();
        let d3 = d1.derivative().derivative();
        let p = PolarTerm::new(lambda - 1.0, d1.scale(a * a).add(&d3).scale(1.0 / b));
        let chi = PolarTerm::new(2.0 / 3.0, TrigSeries::sin(2.0 / 3.0, 1.0));
        Self {
            psi: derivatives(&PolarTerm::new(a, phi), 3),
            p_dx: p.dx(),
            p_dy: p.dy(),
            p,
            chi: derivatives(&chi, 2),
        }
    }

    fn jet(&self, x: [f64; 2]) -> Jet {
        let rho = x[0].hypot(x[1]);
        if rho == 0.0 {
            return Jet::default();
        }
        let th = polar_angle(x);
        let psi = |i: usize, j: usize| {
            self.psi
                .iter()
                .find(|(k, _)| *k == (i, j))
                .map(|(_, t)| t.eval(rho, th))
                .expect("derivative tabulated")
        };
        let chi = |i: usize, j: usize| {
            self.chi
                .iter()
                .find(|(k, _)| *k == (i, j))
                .map(|(_, t)| t.eval(rho, th))
                .expect("derivative tabulated")
        };
        // u = (ψ_y, −ψ_x)
        let u = [psi(0, 1), -psi(1, 0)];
        let grad_u = [[psi(1, 1), psi(0, 2)], [-psi(2, 0), -psi(1, 1)]];
        let lap_u = [psi(2, 1) + psi(0, 3), -psi(3, 0) - psi(1, 2)];
        let b = [chi(1, 0), chi(0, 1)];
        let grad_b = [[chi(2, 0), chi(1, 1)], [chi(1, 1), chi(0, 2)]];
        Jet {
            u,
            grad_u,
            lap_u,
            p: self.p.eval(rho, th),
            grad_p: [self.p_dx.eval(rho, th), self.p_dy.eval(rho, th)],
            b,
            grad_b,
            grad_curl_b: [0.0; 2],
            r: 0.0,
            grad_r: [0.0; 2],
        }
    }

    /// `∫ p` over the L-shape, in polar form: the radial integral to the
    /// boundary `ρ_max(θ)` is `ρ_max^{λ+1}/(λ+1)`; the angular integral is
    /// done numerically on the three straight sides.
    fn pressure_integral(&self) -> f64 {
        let a = self.p.power + 2.0;
        let sides = [
            // (θ range, ρ_max(θ))
            (0.0, 0.25 * PI, 0),
            (0.25 * PI, 0.75 * PI, 1),
            (0.75 * PI, 1.25 * PI, 2),
            (1.25 * PI, 1.5 * PI, 3),
        ];
        let rule = crate::quadrature::edge(10);
        let mut total = 0.0;
        for (t0, t1, side) in sides {
            // Subdivide for accuracy; the integrand is smooth on each side.
            let pieces = 64;
            for k in 0..pieces {
                let (s0, s1) = (
                    t0 + (t1 - t0) * k as f64 / pieces as f64,
                    t0 + (t1 - t0) * (k + 1) as f64 / pieces as f64,
                );
                for (&s, &w) in rule.points.iter().zip(&rule.weights) {
                    let th = s0 + s * (s1 - s0);
                    let rmax = match side {
                        0 => 1.0 / th.cos(),
                        1 => 1.0 / th.sin(),
                        2 => -1.0 / th.cos(),
                        _ => -1.0 / th.sin(),
                    };
                    total += w * (s1 - s0) * self.p.angular.eval(th) * rmax.powf(a) / a;
                }
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_worked_values() {
        let pb = smooth_benchmark();
        assert_eq!(pb.u([0.5, 0.5]), [0.0, 0.0]);
        assert_eq!(pb.p([0.0, 0.0]), 1.0);
        assert_eq!(pb.pressure_mean(), 0.0);
        let x = [0.3, 0.8];
        let j = pb.jet(x);
        assert!(j.div_u().abs() < 1e-16);
        assert!(j.div_b().abs() < 1e-14);
        let (s, c) = (PI * x[0], PI * x[1]);
        let curl = 2.0 * PI * s.sin() * c.sin();
        assert!((j.curl_b() - curl).abs() < 1e-13);

        let printed = smooth_benchmark_with(VelocityVariant::default(), MagneticVariant::AsPrinted);
        assert!(printed.jet(x).curl_b().abs() < 1e-14);
    }

    #[test]
    fn trig_products() {
        let g = TrigSeries::cos(2.5, 1.3).add(&TrigSeries::sin(0.7, -0.4));
        for th in [0.1, 1.7, 4.0] {
            assert!((g.mul_cos().eval(th) - th.cos() * g.eval(th)).abs() < 1e-14);
            assert!((g.mul_sin().eval(th) - th.sin() * g.eval(th)).abs() < 1e-14);
            let h = 1e-6;
            let fd = (g.eval(th + h) - g.eval(th - h)) / (2.0 * h);
            assert!((g.derivative().eval(th) - fd).abs() < 1e-8);
        }
    }

    #[test]
    fn polar_pressure_is_homogeneous() {
        let pb = corner_benchmark();
        let dir = [std::f64::consts::FRAC_1_SQRT_2; 2];
        let rho0 = 0.3;
        let p = |r: f64| pb.p([r * dir[0], r * dir[1]]);
        let ratio = p(2.0 * rho0) / p(rho0);
        assert!((ratio - 2f64.powf(CORNER_LAMBDA - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn corner_value_is_zero() {
        assert_eq!(corner_benchmark().u([0.0, 0.0]), [0.0, 0.0]);
    }

    #[test]
    fn pressure_mean_matches_quadrature() {
        // Cross-check the polar formula with a fine midpoint sum away from the corner.
        let pb = corner_benchmark();
        let n = 600;
        let h = 2.0 / n as f64;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = [-1.0 + (i as f64 + 0.5) * h, -1.0 + (j as f64 + 0.5) * h];
                if pb.domain.contains(x) {
                    s += pb.p(x) * h * h;
                }
            }
        }
        // The singular integrand limits the midpoint sum to a few digits.
        assert!(
            (s / 3.0 - pb.pressure_mean()).abs() < 2e-2,
            "{} vs {}",
            s / 3.0,
            pb.pressure_mean()
        );
    }
}

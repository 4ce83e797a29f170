//! Gauss rules on the reference triangle and on the unit interval.
//!
//! Triangle rules are collapsed (Duffy) tensor products of Gauss–Legendre
//! rules, so every weight is positive and any degree is available.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use thiserror::Error;

pub const MAX_TRIANGLE_DEGREE: usize = 10;
pub const MAX_EDGE_POINTS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuadratureError {
    #[error("triangle rule degree {0} unsupported (1..={MAX_TRIANGLE_DEGREE})")]
    TriangleDegree(usize),
    #[error("edge rule with {0} points unsupported (1..={MAX_EDGE_POINTS})")]
    EdgePoints(usize),
}

/// Quadrature on the reference triangle `{x, y ≥ 0, x + y ≤ 1}`.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub degree: usize,
    pub points: Vec<[f64; 2]>,
    /// Weights sum to the reference area ½.
    pub weights: Vec<f64>,
}

impl TriangleRule {
    /// Barycentric coordinates `(λ0, λ1, λ2)` of point `q`.
    pub fn barycentric(&self, q: usize) -> [f64; 3] {
        let [x, y] = self.points[q];
        [1.0 - x - y, x, y]
    }
}

/// Quadrature on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct EdgeRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "a Gauss rule needs at least one point");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, z);
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = if n == 0 {
        0.0
    } else {
        n as f64 * (z * p1 - p0) / (z * z - 1.0)
    };
    (p, dp)
}

fn build_edge_rule(n: usize) -> EdgeRule {
    let (x, w) = gauss_legendre(n);
    EdgeRule {
        points: x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
        weights: w.iter().map(|v| 0.5 * v).collect(),
    }
}

fn build_triangle_rule(degree: usize) -> TriangleRule {
    // x = u carries the Jacobian factor (1 - u), hence one extra point.
    let nu = (degree + 2).div_ceil(2);
    let nv = (degree + 1).div_ceil(2);
    let ru = build_edge_rule(nu);
    let rv = build_edge_rule(nv);
    let mut points = Vec::with_capacity(nu * nv);
    let mut weights = Vec::with_capacity(nu * nv);
    for (&u, &wu) in ru.points.iter().zip(&ru.weights) {
        for (&v, &wv) in rv.points.iter().zip(&rv.weights) {
            points.push([u, v * (1.0 - u)]);
            weights.push(wu * wv * (1.0 - u));
        }
    }
    TriangleRule {
        degree,
        points,
        weights,
    }
}

fn cached<T: Clone + Send + 'static>(
    cache: &'static OnceLock<Mutex<HashMap<usize, &'static T>>>,
    key: usize,
    build: impl FnOnce(usize) -> T,
) -> &'static T {
    let map = cache.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = map.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(key)
        .or_insert_with(|| Box::leak(Box::new(build(key))))
}

/// Rule exact for polynomials of total degree `degree` on the reference triangle.
pub fn triangle_rule(degree: usize) -> Result<&'static TriangleRule, QuadratureError> {
    static CACHE: OnceLock<Mutex<HashMap<usize, &'static TriangleRule>>> = OnceLock::new();
    if !(1..=MAX_TRIANGLE_DEGREE).contains(&degree) {
        return Err(QuadratureError::TriangleDegree(degree));
    }
    Ok(cached(&CACHE, degree, build_triangle_rule))
}

/// `n`-point Gauss–Legendre rule on `[0, 1]`, exact to degree `2n - 1`.
pub fn edge_rule(n: usize) -> Result<&'static EdgeRule, QuadratureError> {
    static CACHE: OnceLock<Mutex<HashMap<usize, &'static EdgeRule>>> = OnceLock::new();
    if !(1..=MAX_EDGE_POINTS).contains(&n) {
        return Err(QuadratureError::EdgePoints(n));
    }
    Ok(cached(&CACHE, n, build_edge_rule))
}

pub(crate) fn tri(degree: usize) -> &'static TriangleRule {
    triangle_rule(degree).expect("internal rule degree is supported")
}

pub(crate) fn edge(n: usize) -> &'static EdgeRule {
    edge_rule(n).expect("internal edge rule size is supported")
}

/// Degree used for assembling the discrete system.
pub const ASSEMBLY_DEGREE: usize = 6;
/// Degree used when measuring errors against exact solutions.
pub const ERROR_DEGREE: usize = 8;

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    #[test]
    fn monomials_are_integrated_exactly() {
        for degree in 1..=MAX_TRIANGLE_DEGREE {
            let r = tri(degree);
            for a in 0..=degree as u32 {
                for b in 0..=(degree as u32 - a) {
                    let q: f64 = r
                        .points
                        .iter()
                        .zip(&r.weights)
                        .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32))
                        .sum();
                    let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                    assert!(
                        (q - exact).abs() < 1e-15,
                        "deg {degree}, x^{a} y^{b}: {q} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn x2_y3_moment() {
        let r = tri(6);
        let q: f64 = r
            .points
            .iter()
            .zip(&r.weights)
            .map(|(p, w)| w * p[0] * p[0] * p[1].powi(3))
            .sum();
        assert!((q - 1.0 / 420.0).abs() < 1e-16);
    }

    #[test]
    fn point_counts_and_positivity() {
        assert_eq!(tri(6).points.len(), 16);
        assert_eq!(tri(8).points.len(), 25);
        for d in 1..=MAX_TRIANGLE_DEGREE {
            let r = tri(d);
            assert!(r.weights.iter().all(|&w| w > 0.0));
            assert!(r
                .points
                .iter()
                .all(|p| p[0] > 0.0 && p[1] > 0.0 && p[0] + p[1] < 1.0));
            assert!((r.weights.iter().sum::<f64>() - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn edge_rule_exactness() {
        for n in 1..=MAX_EDGE_POINTS {
            let r = edge(n);
            for k in 0..(2 * n) as i32 {
                let q: f64 = r
                    .points
                    .iter()
                    .zip(&r.weights)
                    .map(|(t, w)| w * t.powi(k))
                    .sum();
                assert!((q - 1.0 / (k + 1) as f64).abs() < 1e-15, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn unsupported_sizes_are_rejected() {
        assert_eq!(
            triangle_rule(0).unwrap_err(),
            QuadratureError::TriangleDegree(0)
        );
        assert_eq!(
            triangle_rule(11).unwrap_err(),
            QuadratureError::TriangleDegree(11)
        );
        assert_eq!(edge_rule(0).unwrap_err(), QuadratureError::EdgePoints(0));
        assert!(edge_rule(11).is_err());
    }

    #[test]
    fn small_worked_values() {
        let r = triangle_rule(1).unwrap();
        assert!((r.weights.iter().sum::<f64>() - 0.5).abs() < 1e-15);
        let r = triangle_rule(2).unwrap();
        let q: f64 = r.points.iter().zip(&r.weights).map(|(p, w)| w * p[0]).sum();
        assert!((q - 1.0 / 6.0).abs() < 1e-15);
        let e = edge_rule(2).unwrap();
        let q: f64 = e
            .points
            .iter()
            .zip(&e.weights)
            .map(|(t, w)| w * t.powi(3))
            .sum();
        assert!((q - 0.25).abs() < 1e-15);
    }
}

use mhd_core::linalg::{
    lu_solve, norm2, Backend, LinalgError, LinearSolver, MultifrontalLu, NativeLu, SparseMatrix,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn relative_residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.matvec(x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    norm2(&r) / norm2(b)
}

/// Gaussian elimination with partial pivoting on a dense copy.
fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| row.iter().copied().chain([bi]).collect())
        .collect();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))
            .unwrap();
        m.swap(k, p);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..=n {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x
}

#[test]
fn identity_returns_rhs() {
    let b: Vec<f64> = (0..7).map(|i| i as f64 - 2.5).collect();
    assert_eq!(lu_solve(&SparseMatrix::identity(7), &b).unwrap(), b);
}

#[test]
fn poisson_1d_recovers_manufactured_solution() {
    let n = 100;
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, 2.0));
        if i > 0 {
            t.push((i, i - 1, -1.0));
            t.push((i - 1, i, -1.0));
        }
    }
    let a = SparseMatrix::from_triplets(n, n, &t).unwrap();
    let x: Vec<f64> = (0..n).map(|i| ((i + 1) as f64 * 0.1).sin()).collect();
    let b = a.matvec(&x);
    for backend in [
        Backend::Auto,
        Backend::Native,
        Backend::Multifrontal,
        Backend::Supernodal,
    ] {
        let y = LinearSolver::new(backend).solve(&a, &b).unwrap();
        let err: Vec<f64> = y.iter().zip(&x).map(|(u, v)| u - v).collect();
        assert!(norm2(&err) / norm2(&x) <= 1e-10, "{backend:?}");
    }
}

#[test]
fn permutation_needs_pivoting() {
    let a = SparseMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
    for backend in [
        Backend::Auto,
        Backend::Native,
        Backend::Multifrontal,
        Backend::Supernodal,
    ] {
        let x = LinearSolver::new(backend).solve(&a, &[1.0, 2.0]).unwrap();
        assert!(
            (x[0] - 2.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15,
            "{backend:?}: {x:?}"
        );
    }
}

#[test]
fn duplicate_triplets_are_summed() {
    let a = SparseMatrix::from_triplets(1, 1, &[(0, 0, 1.0), (0, 0, 2.0)]).unwrap();
    assert_eq!(a.nnz(), 1);
    assert_eq!(a.get(0, 0), 3.0);
    let empty = SparseMatrix::from_triplets(3, 3, &[]).unwrap();
    assert_eq!(empty.nnz(), 0);
    assert_eq!(empty.matvec(&[1.0, 2.0, 3.0]), vec![0.0; 3]);
}

#[test]
fn random_dense_matvec_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let n = 50;
    let dense: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.random::<f64>() - 0.5).collect())
        .collect();
    let t: Vec<_> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, dense[i][j]))
        .collect();
    let a = SparseMatrix::from_triplets(n, n, &t).unwrap();
    let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let y = a.matvec(&x);
    for i in 0..n {
        let yi: f64 = dense[i].iter().zip(&x).map(|(a, b)| a * b).sum();
        assert!((y[i] - yi).abs() <= 1e-13);
    }
    let b: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let oracle = dense_solve(&dense, &b);
    let x = lu_solve(&a, &b).unwrap();
    let err: Vec<f64> = x.iter().zip(&oracle).map(|(u, v)| u - v).collect();
    assert!(norm2(&err) / norm2(&oracle) <= 1e-10);
}

#[test]
fn singular_and_malformed_input_is_reported() {
    let a =
        SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)])
            .unwrap();
    assert!(matches!(
        lu_solve(&a, &[1.0, 0.0]),
        Err(LinalgError::Singular { .. })
    ));
    let rect = SparseMatrix::from_triplets(2, 3, &[(0, 0, 1.0)]).unwrap();
    assert!(matches!(
        lu_solve(&rect, &[1.0, 0.0]),
        Err(LinalgError::NotSquare { .. })
    ));
    assert!(matches!(
        lu_solve(&SparseMatrix::identity(3), &[1.0]),
        Err(LinalgError::DimensionMismatch { .. })
    ));
    assert!(SparseMatrix::from_triplets(2, 2, &[(2, 0, 1.0)]).is_err());
    assert!(SparseMatrix::from_triplets(2, 2, &[(0, 0, f64::NAN)]).is_err());
}

/// Sparse saddle-point matrix `[[K, Bᵀ], [B, 0]]` with a random SPD-ish `K`.
fn saddle(nk: usize, nb: usize, density: f64, seed: u64) -> SparseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Vec::new();
    for i in 0..nk {
        t.push((i, i, 4.0 + rng.random::<f64>()));
        for j in 0..i {
            if rng.random::<f64>() < density {
                let v = rng.random::<f64>() - 0.5;
                t.push((i, j, v));
                t.push((j, i, v));
            }
        }
    }
    for q in 0..nb {
        // one guaranteed coupling keeps B full rank
        let anchor = (q * nk) / nb;
        let v = 1.0 + rng.random::<f64>();
        t.push((nk + q, anchor, v));
        t.push((anchor, nk + q, v));
        for i in 0..nk {
            if i != anchor && rng.random::<f64>() < density {
                let v = rng.random::<f64>() - 0.5;
                t.push((nk + q, i, v));
                t.push((i, nk + q, v));
            }
        }
    }
    SparseMatrix::from_triplets(nk + nb, nk + nb, &t).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lu_residual_is_below_contract(nk in 2usize..120, frac in 0.0f64..0.5, density in 0.01f64..0.2, seed in any::<u64>()) {
        let nb = ((nk as f64 * frac) as usize).max(1).min(nk - 1);
        let a = saddle(nk, nb, density, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let b: Vec<f64> = (0..a.n_rows()).map(|_| rng.random::<f64>() - 0.5).collect();
        for backend in [Backend::Auto, Backend::Native, Backend::Multifrontal] {
            let x = LinearSolver::new(backend).solve(&a, &b).unwrap();
            prop_assert!(relative_residual(&a, &x, &b) <= 1e-10);
        }
    }

    #[test]
    fn native_and_multifrontal_agree(nk in 2usize..80, density in 0.02f64..0.3, seed in any::<u64>()) {
        let a = saddle(nk, (nk / 3).max(1).min(nk - 1), density, seed);
        let b: Vec<f64> = (0..a.n_rows()).map(|i| (i as f64).cos()).collect();
        let x1 = NativeLu::factor(&a).unwrap().solve(&b);
        let x2 = MultifrontalLu::factor(&a).unwrap().solve(&b);
        let d: Vec<f64> = x1.iter().zip(&x2).map(|(u, v)| u - v).collect();
        prop_assert!(norm2(&d) <= 1e-8 * norm2(&x1).max(1.0));
    }

    #[test]
    fn transpose_is_an_involution(n in 1usize..30, m in 1usize..30, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t: Vec<_> = (0..3 * n).map(|_| (rng.random_range(0..n), rng.random_range(0..m), rng.random::<f64>())).collect();
        let a = SparseMatrix::from_triplets(n, m, &t).unwrap();
        prop_assert_eq!(a.transpose().transpose(), a);
    }
}

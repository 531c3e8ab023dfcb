use proptest::prelude::*;
use regcert_core::linalg::{is_symmetric, SYMMETRY_TOLERANCE};
use regcert_core::random::{gaussian_matrix, random_orthogonal, seeded};
use regcert_core::{
    numeric_rank, pseudo_inverse, spectral_norm, svd, symmetric_eigendecomposition, DenseMatrix, Tolerance,
    DEFAULT_RANK_TOLERANCE,
};

/// Random `rows x cols` matrix of the requested rank (clamped to the shape),
/// scaled so entries are not all of order one.
fn matrix_with_rank(rows: usize, cols: usize, rank: usize, scale: f64, seed: u64) -> DenseMatrix {
    let mut rng = seeded(seed);
    let r = rank.min(rows).min(cols);
    gaussian_matrix(rows, r, &mut rng) * gaussian_matrix(r, cols, &mut rng) * scale
}

fn rel(diff: &DenseMatrix, reference: &DenseMatrix) -> f64 {
    diff.norm() / reference.norm().max(f64::MIN_POSITIVE)
}

fn shapes() -> impl Strategy<Value = (usize, usize, usize, f64, u64)> {
    (1usize..=10, 1usize..=10, 1usize..=10, prop::sample::select(vec![1e-3, 1.0, 1e3]), any::<u64>())
}

proptest! {
    #[test]
    fn moore_penrose_identities((rows, cols, rank, scale, seed) in shapes()) {
        let m = matrix_with_rank(rows, cols, rank, scale, seed);
        let p = pseudo_inverse(&m, Tolerance::default()).unwrap();
        let mp = &m * &p;
        let pm = &p * &m;
        prop_assert!(rel(&(&mp * &m - &m), &m) <= 1e-10);
        prop_assert!(rel(&(&pm * &p - &p), &p) <= 1e-10);
        prop_assert!(rel(&(&mp - mp.transpose()), &mp) <= 1e-10);
        prop_assert!(rel(&(&pm - pm.transpose()), &pm) <= 1e-10);
    }

    #[test]
    fn svd_reconstructs_with_orthonormal_factors((rows, cols, rank, scale, seed) in shapes()) {
        let m = matrix_with_rank(rows, cols, rank, scale, seed);
        let f = svd(&m, Tolerance::default()).unwrap();
        prop_assert_eq!(f.numeric_rank, rank.min(rows).min(cols));
        prop_assert!(rel(&(f.reconstruct() - &m), &m) <= 1e-10);
        let r = f.numeric_rank;
        prop_assert!((f.u.transpose() * &f.u - DenseMatrix::identity(r, r)).norm() <= 1e-10);
        prop_assert!((f.v.transpose() * &f.v - DenseMatrix::identity(r, r)).norm() <= 1e-10);
        prop_assert!(f.singular_values.as_slice().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn rank_is_invariant_under_rotation((rows, cols, rank, scale, seed) in shapes()) {
        let m = matrix_with_rank(rows, cols, rank, scale, seed);
        let q = random_orthogonal(rows, &mut seeded(seed ^ 0x5eed));
        prop_assert_eq!(
            numeric_rank(&(q * &m), DEFAULT_RANK_TOLERANCE).unwrap(),
            numeric_rank(&m, DEFAULT_RANK_TOLERANCE).unwrap()
        );
    }

    #[test]
    fn norm_chain((rows, cols, rank, scale, seed) in shapes()) {
        let m = matrix_with_rank(rows, cols, rank, scale, seed);
        let two = spectral_norm(&m).unwrap();
        let fro = m.norm();
        let r = numeric_rank(&m, DEFAULT_RANK_TOLERANCE).unwrap() as f64;
        prop_assert!(two <= fro * (1.0 + 1e-12));
        prop_assert!(fro <= r * two * (1.0 + 1e-12));
    }

    #[test]
    fn symmetric_spectral_norm_is_largest_eigenvalue(n in 1usize..=10, seed in any::<u64>()) {
        let g = gaussian_matrix(n, n, &mut seeded(seed));
        let s = (&g + g.transpose()) * 0.5;
        prop_assert!(is_symmetric(&s, SYMMETRY_TOLERANCE));
        let dec = symmetric_eigendecomposition(&s).unwrap();
        let largest = dec.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        prop_assert!((spectral_norm(&s).unwrap() - largest).abs() <= 1e-10 * largest.max(1.0));
        prop_assert!(rel(&(dec.reconstruct() - &s), &s) <= 1e-12);
    }

    #[test]
    fn pseudo_inverse_matches_normal_equations_when_tall(rows in 2usize..=10, seed in any::<u64>()) {
        // singular values in [1, 10] keep the normal equations accurate
        let cols = 1 + seed as usize % rows;
        let mut rng = seeded(seed);
        let left = random_orthogonal(rows, &mut rng).columns(0, cols).into_owned();
        let right = random_orthogonal(cols, &mut rng);
        let sigma = DenseMatrix::from_fn(cols, cols, |i, j| if i == j { 1.0 + 9.0 * i as f64 / cols as f64 } else { 0.0 });
        let m = left * sigma * right.transpose();
        let normal = (m.transpose() * &m).try_inverse().unwrap() * m.transpose();
        let p = pseudo_inverse(&m, Tolerance::default()).unwrap();
        prop_assert!(rel(&(&p - &normal), &p) <= 1e-10);
    }
}

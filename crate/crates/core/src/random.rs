//! Seeded generators. Everything is driven by ChaCha8 so a seed reproduces
//! the same matrices on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{DenseMatrix, Vector};

/// Independent stream for initial conditions, so changing the system
/// source does not shift the initial condition drawn for the same seed.
pub const INITIAL_CONDITION_STREAM: u64 = 1;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn seeded_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn gaussian_matrix<R: rand::Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DenseMatrix {
    // fill row by row so the draw order matches the row-major file format
    let mut m = DenseMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            m[(r, c)] = StandardNormal.sample(rng);
        }
    }
    m
}

pub fn gaussian_vector<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Vector {
    Vector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

/// Standard Gaussian draw scaled to unit Euclidean norm.
pub fn gaussian_unit_vector<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Vector {
    loop {
        let v = gaussian_vector(n, rng);
        let norm = v.norm();
        if norm > 0.0 {
            return v / norm;
        }
    }
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// signs of `diag(R)` folded into `Q`.
pub fn random_orthogonal<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> DenseMatrix {
    let g = gaussian_matrix(n, n, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `count` values with magnitudes uniform in `[lo, hi]` and random signs,
/// redrawn until every pairwise gap exceeds `min_gap`.
///
/// Panics if the request cannot be met, i.e. `count` values spaced
/// `min_gap` apart do not fit in the two intervals.
pub fn separated_values<R: rand::Rng + ?Sized>(count: usize, lo: f64, hi: f64, min_gap: f64, rng: &mut R) -> Vec<f64> {
    assert!(0.0 <= lo && lo < hi, "need 0 <= lo < hi");
    let per_side = ((hi - lo) / min_gap).floor() as usize + 1;
    assert!(count <= 2 * per_side, "{count} values with gap {min_gap} do not fit in [{lo}, {hi}]");
    loop {
        let mut v: Vec<f64> = (0..count)
            .map(|_| {
                let m = rng.random_range(lo..=hi);
                if rng.random_bool(0.5) { m } else { -m }
            })
            .collect();
        v.sort_by(f64::total_cmp);
        if v.windows(2).all(|w| w[1] - w[0] > min_gap) {
            return v;
        }
    }
}

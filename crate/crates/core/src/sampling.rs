//! Seeded random generation of test and experiment inputs.
//!
//! All randomness in the crate flows through ChaCha8 so that every
//! experiment is reproducible from a single `u64` seed.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::matfun::{SPDMatrix, SymMatrix};

/// The crate-wide generator. One algorithm everywhere keeps outputs
/// byte-identical across platforms for a fixed seed.
pub type Generator = ChaCha8Rng;

pub const GENERATOR_NAME: &str = "chacha8";

pub fn rng_from_seed(seed: u64) -> Generator {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream for a parallel work unit. SplitMix64-style
/// mixing so neighbouring indices do not produce correlated streams.
pub fn rng_for_unit(seed: u64, unit: u64) -> Generator {
    let mut z = seed ^ unit.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    ChaCha8Rng::seed_from_u64(z ^ (z >> 31))
}

pub fn standard_normal(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Dense matrix with i.i.d. standard normal entries.
pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| standard_normal(rng))
}

/// Random symmetric matrix with N(0,1) entries on and above the diagonal.
pub fn random_sym(dim: usize, rng: &mut impl Rng) -> SymMatrix {
    let mut m = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let v = standard_normal(rng);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    SymMatrix::new(m).expect("construction is symmetric")
}

/// Well-conditioned random SPD matrix: G Gᵀ + I with G Gaussian.
pub fn random_spd(dim: usize, rng: &mut impl Rng) -> SPDMatrix {
    let g = gaussian_matrix(dim, dim, rng);
    let mut m = &g * g.transpose();
    for i in 0..dim {
        m[(i, i)] += 1.0;
    }
    let sym = SymMatrix::new((&m + m.transpose()) * 0.5).expect("symmetric by construction");
    SPDMatrix::new(sym).expect("eigenvalues >= 1")
}

/// Wishart-style SPD draw G Gᵀ + ε I where G is n×k Gaussian. With k < n the
/// result is nearly singular, which is where kernel indefiniteness tends to
/// show up in witness searches.
pub fn wishart_spd(dim: usize, rank: usize, eps: f64, rng: &mut impl Rng) -> SPDMatrix {
    let g = gaussian_matrix(dim, rank.max(1), rng);
    let mut m = &g * g.transpose();
    for i in 0..dim {
        m[(i, i)] += eps;
    }
    let sym = SymMatrix::new((&m + m.transpose()) * 0.5).expect("symmetric by construction");
    SPDMatrix::new(sym).expect("eps shift keeps spectrum positive")
}

/// Random orthogonal matrix via QR of a Gaussian matrix.
pub fn random_orthogonal(dim: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let g = gaussian_matrix(dim, dim, rng);
    let qr = g.qr();
    qr.q()
}

/// Random invertible matrix (Gaussian, redrawn if nearly singular).
pub fn random_invertible(dim: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    loop {
        let g = gaussian_matrix(dim, dim, rng);
        if g.determinant().abs() > 1e-3 {
            return g;
        }
    }
}

//! Spectral calculus on symmetric matrices.
//!
//! Everything routes through one eigendecomposition path: log, exp, square
//! root and the Lyapunov solve are evaluated on the spectrum and conjugated
//! back. The spectral route is exact for symmetric inputs; anything
//! non-symmetric is rejected at construction.

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};

/// Relative symmetry tolerance for accepting a matrix as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Matrices whose smallest eigenvalue is at or below this fraction of the
/// largest are rejected as not positive definite — rejected, never clipped.
pub const SPD_REL_EIG_FLOOR: f64 = 1e-10;

/// A validated real symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    entries: DMatrix<f64>,
}

impl SymMatrix {
    /// Validates squareness and symmetry: |a_ij - a_ji| <= 1e-12 max(1, |a_ij|).
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(GeomError::dims(
                "square matrix",
                format!("{}x{}", entries.nrows(), entries.ncols()),
            ));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(GeomError::validation("matrix has non-finite entries"));
        }
        for i in 0..entries.nrows() {
            for j in (i + 1)..entries.ncols() {
                let diff = (entries[(i, j)] - entries[(j, i)]).abs();
                if diff > SYMMETRY_TOL * entries[(i, j)].abs().max(1.0) {
                    return Err(GeomError::validation(format!(
                        "matrix not symmetric at ({i},{j}): {} vs {}",
                        entries[(i, j)],
                        entries[(j, i)]
                    )));
                }
            }
        }
        Ok(Self { entries })
    }

    /// Builds from row slices; rows must form a square symmetric matrix.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(GeomError::dims(
                format!("{n} columns per row"),
                "ragged rows".to_string(),
            ));
        }
        let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Self::new(m)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: DMatrix::identity(dim, dim),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self {
            entries: DMatrix::from_diagonal(&DVector::from_row_slice(diag)),
        }
    }

    /// Symmetrizes (M + Mᵀ)/2 without validation; used to clean up rounding
    /// asymmetry after conjugations that are symmetric in exact arithmetic.
    pub fn symmetrize(m: DMatrix<f64>) -> Self {
        let sym = (&m + m.transpose()) * 0.5;
        Self { entries: sym }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.norm()
    }

    pub fn scale(&self, s: f64) -> SymMatrix {
        SymMatrix {
            entries: &self.entries * s,
        }
    }

    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix> {
        check_same_dim(self, other)?;
        Ok(SymMatrix {
            entries: &self.entries + &other.entries,
        })
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<SymMatrix> {
        check_same_dim(self, other)?;
        Ok(SymMatrix {
            entries: &self.entries - &other.entries,
        })
    }
}

/// A validated symmetric positive definite matrix with its cached
/// eigendecomposition (every operation on SPD inputs needs the spectrum).
#[derive(Debug, Clone)]
pub struct SPDMatrix {
    base: SymMatrix,
    decomp: SpectralDecomposition,
}

impl SPDMatrix {
    pub fn new(base: SymMatrix) -> Result<Self> {
        let decomp = sym_eig(&base);
        let min = decomp.eigenvalues[0];
        let max = decomp.eigenvalues[decomp.eigenvalues.len() - 1];
        if min <= SPD_REL_EIG_FLOOR * max.max(0.0) || min <= 0.0 {
            return Err(GeomError::domain(format!(
                "matrix is not positive definite: min eigenvalue {min:.3e}, max {max:.3e}"
            )));
        }
        Ok(Self { base, decomp })
    }

    pub fn from_matrix(entries: DMatrix<f64>) -> Result<Self> {
        Self::new(SymMatrix::new(entries)?)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(SymMatrix::from_rows(rows)?)
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(SymMatrix::identity(dim)).expect("identity is SPD")
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(SymMatrix::from_diagonal(diag))
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn sym(&self) -> &SymMatrix {
        &self.base
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        self.base.as_matrix()
    }

    pub fn min_eig(&self) -> f64 {
        self.decomp.eigenvalues[0]
    }

    pub fn decomposition(&self) -> &SpectralDecomposition {
        &self.decomp
    }

    pub fn trace(&self) -> f64 {
        self.base.as_matrix().trace()
    }

    /// Sum of eigenvalue logs; never forms the determinant itself, which
    /// overflows for large dimensions.
    pub fn log_det(&self) -> f64 {
        self.decomp.eigenvalues.iter().map(|l| l.ln()).sum()
    }

    /// A^p through the spectrum. p = -1 is the inverse, p = 1/2 the square root.
    pub fn power(&self, p: f64) -> SPDMatrix {
        let sym = self.decomp.apply(|l| l.powf(p));
        SPDMatrix::new(sym).expect("positive spectrum stays positive under powers")
    }

    pub fn inverse(&self) -> SPDMatrix {
        self.power(-1.0)
    }
}

/// Eigendecomposition of a symmetric matrix, eigenvalues ascending with
/// matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl SpectralDecomposition {
    /// Q f(Λ) Qᵀ, symmetrized against rounding.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let n = self.eigenvalues.len();
        let diag = DVector::from_iterator(n, self.eigenvalues.iter().map(|&l| f(l)));
        let m = &self.eigenvectors * DMatrix::from_diagonal(&diag) * self.eigenvectors.transpose();
        SymMatrix::symmetrize(m)
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.apply(|l| l)
    }
}

/// Spectral decomposition of a symmetric matrix, eigenvalues sorted ascending.
pub fn sym_eig(a: &SymMatrix) -> SpectralDecomposition {
    let eig = a.as_matrix().clone().symmetric_eigen();
    let n = a.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        eigenvectors.set_column(col, &eig.eigenvectors.column(i));
    }
    SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    }
}

/// Principal matrix logarithm of an SPD matrix.
pub fn logm_spd(a: &SPDMatrix) -> SymMatrix {
    a.decomposition().apply(|l| l.ln())
}

/// Matrix exponential of a symmetric matrix; always lands in the SPD cone.
pub fn expm_sym(a: &SymMatrix) -> Result<SPDMatrix> {
    let decomp = sym_eig(a);
    let max = decomp.eigenvalues[decomp.eigenvalues.len() - 1];
    if max > 700.0 {
        return Err(GeomError::numerical(format!(
            "exp overflows for eigenvalue {max:.3e}"
        )));
    }
    SPDMatrix::new(decomp.apply(|l| l.exp()))
}

/// Principal square root of an SPD matrix.
pub fn sqrtm_spd(a: &SPDMatrix) -> SPDMatrix {
    a.power(0.5)
}

/// Solves X P + P X = V for symmetric X with P SPD (componentwise in the
/// eigenbasis of P: X̃_ij = Ṽ_ij / (λ_i + λ_j)).
pub fn solve_lyapunov(p: &SPDMatrix, v: &SymMatrix) -> Result<SymMatrix> {
    if p.dim() != v.dim() {
        return Err(GeomError::dims(
            format!("dim {}", p.dim()),
            format!("dim {}", v.dim()),
        ));
    }
    let decomp = p.decomposition();
    let q = &decomp.eigenvectors;
    let v_tilde = q.transpose() * v.as_matrix() * q;
    let n = p.dim();
    let mut x_tilde = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            x_tilde[(i, j)] = v_tilde[(i, j)] / (decomp.eigenvalues[i] + decomp.eigenvalues[j]);
        }
    }
    Ok(SymMatrix::symmetrize(q * x_tilde * q.transpose()))
}

/// Frobenius inner product trace(Aᵀ B).
pub fn frobenius_inner(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    check_same_dim(a, b)?;
    Ok(a.as_matrix().dot(b.as_matrix()))
}

fn check_same_dim(a: &SymMatrix, b: &SymMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(GeomError::dims(
            format!("dim {}", a.dim()),
            format!("dim {}", b.dim()),
        ));
    }
    Ok(())
}

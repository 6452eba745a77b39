//! Riemannian structures on the SPD cone: affine-invariant,
//! Bures-Wasserstein and Log-Euclidean distances, geodesics and metric
//! tensors, plus the Log-Euclidean vector-space operations (⊙, ⊛).

use nalgebra::DMatrix;

use crate::error::{GeomError, Result};
use crate::matfun::{
    expm_sym, frobenius_inner, logm_spd, solve_lyapunov, sqrtm_spd, sym_eig, SPDMatrix, SymMatrix,
};

/// The three Riemannian structures implemented here.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    AffineInvariant,
    BuresWasserstein,
    LogEuclidean,
}

impl MetricKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "ai" => Ok(Self::AffineInvariant),
            "bw" => Ok(Self::BuresWasserstein),
            "loge" => Ok(Self::LogEuclidean),
            other => Err(GeomError::validation(format!(
                "unknown metric {other:?}, expected ai|bw|loge"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::AffineInvariant => "ai",
            Self::BuresWasserstein => "bw",
            Self::LogEuclidean => "loge",
        }
    }
}

/// A tangent vector at a base point; tangent spaces are the symmetric
/// matrices of the same dimension.
#[derive(Debug, Clone)]
pub struct TangentVector {
    pub at: SPDMatrix,
    pub direction: SymMatrix,
}

impl TangentVector {
    pub fn new(at: SPDMatrix, direction: SymMatrix) -> Result<Self> {
        if at.dim() != direction.dim() {
            return Err(GeomError::dims(
                format!("dim {}", at.dim()),
                format!("dim {}", direction.dim()),
            ));
        }
        Ok(Self { at, direction })
    }
}

/// Endpoints and parameter of a geodesic evaluation.
#[derive(Debug, Clone)]
pub struct GeodesicQuery {
    pub a: SPDMatrix,
    pub b: SPDMatrix,
    pub t: f64,
}

impl GeodesicQuery {
    pub fn new(a: SPDMatrix, b: SPDMatrix, t: f64) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(GeomError::dims(
                format!("dim {}", a.dim()),
                format!("dim {}", b.dim()),
            ));
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(GeomError::validation(format!("t = {t} outside [0,1]")));
        }
        Ok(Self { a, b, t })
    }
}

fn check_dims(a: &SPDMatrix, b: &SPDMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(GeomError::dims(
            format!("dim {}", a.dim()),
            format!("dim {}", b.dim()),
        ));
    }
    Ok(())
}

/// The whitened middle term A^{-1/2} B A^{-1/2}.
fn whiten(a: &SPDMatrix, b: &SPDMatrix) -> SPDMatrix {
    let a_inv_sqrt = a.power(-0.5);
    let m = a_inv_sqrt.as_matrix() * b.as_matrix() * a_inv_sqrt.as_matrix();
    SPDMatrix::new(SymMatrix::symmetrize(m)).expect("congruence preserves positivity")
}

/// Affine-invariant distance ‖log(A^{-1/2} B A^{-1/2})‖_F.
pub fn ai_distance(a: &SPDMatrix, b: &SPDMatrix) -> Result<f64> {
    check_dims(a, b)?;
    let middle = whiten(a, b);
    let sq: f64 = middle
        .decomposition()
        .eigenvalues
        .iter()
        .map(|l| l.ln().powi(2))
        .sum();
    Ok(sq.sqrt())
}

/// Affine-invariant geodesic A^{1/2} exp[t log(A^{-1/2} B A^{-1/2})] A^{1/2}.
pub fn ai_geodesic(q: &GeodesicQuery) -> SPDMatrix {
    let a_sqrt = sqrtm_spd(&q.a);
    let middle = whiten(&q.a, &q.b).power(q.t);
    let m = a_sqrt.as_matrix() * middle.as_matrix() * a_sqrt.as_matrix();
    SPDMatrix::new(SymMatrix::symmetrize(m)).expect("geodesic stays in the cone")
}

/// Affine-invariant metric tensor trace(P^{-1} U P^{-1} V).
pub fn ai_metric(p: &SPDMatrix, u: &SymMatrix, v: &SymMatrix) -> Result<f64> {
    if p.dim() != u.dim() || p.dim() != v.dim() {
        return Err(GeomError::dims(
            format!("dim {}", p.dim()),
            format!("{} and {}", u.dim(), v.dim()),
        ));
    }
    let p_inv = p.inverse();
    Ok((p_inv.as_matrix() * u.as_matrix() * p_inv.as_matrix() * v.as_matrix()).trace())
}

/// Guard for the Bures-Wasserstein radicand: tiny negatives from rounding
/// are clipped to zero, anything worse is reported.
const BW_RADICAND_FLOOR: f64 = -1e-10;

/// Bures-Wasserstein distance
/// sqrt(trace(A) + trace(B) - 2 trace((A^{1/2} B A^{1/2})^{1/2})).
pub fn bw_distance(a: &SPDMatrix, b: &SPDMatrix) -> Result<f64> {
    check_dims(a, b)?;
    let a_sqrt = sqrtm_spd(a);
    let inner = SymMatrix::symmetrize(a_sqrt.as_matrix() * b.as_matrix() * a_sqrt.as_matrix());
    let cross: f64 = sym_eig(&inner)
        .eigenvalues
        .iter()
        .map(|l| l.max(0.0).sqrt())
        .sum();
    let radicand = a.trace() + b.trace() - 2.0 * cross;
    if radicand < BW_RADICAND_FLOOR {
        return Err(GeomError::numerical(format!(
            "Bures-Wasserstein radicand {radicand:.3e} below tolerance"
        )));
    }
    Ok(radicand.max(0.0).sqrt())
}

/// (AB)^{1/2} realized as A^{1/2} (A^{1/2} B A^{1/2})^{1/2} A^{-1/2}, a
/// similarity to an SPD square root; (BA)^{1/2} is its transpose.
fn ab_sqrt(a: &SPDMatrix, b: &SPDMatrix) -> DMatrix<f64> {
    let a_sqrt = sqrtm_spd(a);
    let a_inv_sqrt = a.power(-0.5);
    let inner =
        SPDMatrix::new(SymMatrix::symmetrize(
            a_sqrt.as_matrix() * b.as_matrix() * a_sqrt.as_matrix(),
        ))
        .expect("congruence preserves positivity");
    a_sqrt.as_matrix() * sqrtm_spd(&inner).as_matrix() * a_inv_sqrt.as_matrix()
}

/// Bures-Wasserstein geodesic
/// (1-t)² A + t² B + t(1-t)[(AB)^{1/2} + (BA)^{1/2}].
pub fn bw_geodesic(q: &GeodesicQuery) -> Result<SPDMatrix> {
    let m = ab_sqrt(&q.a, &q.b);
    let cross = &m + m.transpose();
    let t = q.t;
    let result = q.a.as_matrix() * (1.0 - t).powi(2)
        + q.b.as_matrix() * t.powi(2)
        + cross * (t * (1.0 - t));
    SPDMatrix::new(SymMatrix::symmetrize(result))
}

/// Bures-Wasserstein metric tensor trace(L_P(U) P L_P(V)) with L_P the
/// Lyapunov solve X P + P X = V.
pub fn bw_metric(p: &SPDMatrix, u: &SymMatrix, v: &SymMatrix) -> Result<f64> {
    let lu = solve_lyapunov(p, u)?;
    let lv = solve_lyapunov(p, v)?;
    Ok((lu.as_matrix() * p.as_matrix() * lv.as_matrix()).trace())
}

/// Log-Euclidean distance ‖log(A) - log(B)‖_F.
pub fn loge_distance(a: &SPDMatrix, b: &SPDMatrix) -> Result<f64> {
    check_dims(a, b)?;
    Ok(logm_spd(a).sub(&logm_spd(b))?.frobenius_norm())
}

/// Log-Euclidean geodesic exp((1-t) log(A) + t log(B)).
pub fn loge_geodesic(q: &GeodesicQuery) -> SPDMatrix {
    let combo = logm_spd(&q.a)
        .scale(1.0 - q.t)
        .add(&logm_spd(&q.b).scale(q.t))
        .expect("dims validated by the query");
    expm_sym(&combo).expect("bounded log combination")
}

/// Log-Euclidean multiplication A ⊙ B = exp(log(A) + log(B)).
pub fn loge_mult(a: &SPDMatrix, b: &SPDMatrix) -> Result<SPDMatrix> {
    check_dims(a, b)?;
    expm_sym(&logm_spd(a).add(&logm_spd(b))?)
}

/// Log-Euclidean scalar action λ ⊛ A = exp(λ log(A)) = A^λ.
pub fn loge_scale(lambda: f64, a: &SPDMatrix) -> SPDMatrix {
    a.power(lambda)
}

/// Log-Euclidean inner product ⟨log(A), log(B)⟩_F.
pub fn loge_inner(a: &SPDMatrix, b: &SPDMatrix) -> Result<f64> {
    check_dims(a, b)?;
    frobenius_inner(&logm_spd(a), &logm_spd(b))
}

/// First divided difference of ln on a pair of positive eigenvalues. The
/// log1p form avoids cancellation as the eigenvalues coalesce.
fn ln_divided_difference(a: f64, b: f64) -> f64 {
    let d = a - b;
    if d == 0.0 {
        1.0 / a
    } else {
        (d / b).ln_1p() / d
    }
}

/// Log-Euclidean metric tensor ⟨D log(P)(U), D log(P)(V)⟩_F. The Fréchet
/// derivative of log acts entrywise in the eigenbasis of P through the
/// Loewner matrix of ln divided differences.
pub fn loge_metric(p: &SPDMatrix, u: &SymMatrix, v: &SymMatrix) -> Result<f64> {
    if p.dim() != u.dim() || p.dim() != v.dim() {
        return Err(GeomError::dims(
            format!("dim {}", p.dim()),
            format!("{} and {}", u.dim(), v.dim()),
        ));
    }
    let decomp = p.decomposition();
    let q = &decomp.eigenvectors;
    let u_t = q.transpose() * u.as_matrix() * q;
    let v_t = q.transpose() * v.as_matrix() * q;
    let n = p.dim();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let f = ln_divided_difference(decomp.eigenvalues[i], decomp.eigenvalues[j]);
            total += u_t[(i, j)] * v_t[(i, j)] * f * f;
        }
    }
    Ok(total)
}

/// Distance under the named metric; the shared entry point for kernels and
/// the command line.
pub fn distance(kind: MetricKind, a: &SPDMatrix, b: &SPDMatrix) -> Result<f64> {
    match kind {
        MetricKind::AffineInvariant => ai_distance(a, b),
        MetricKind::BuresWasserstein => bw_distance(a, b),
        MetricKind::LogEuclidean => loge_distance(a, b),
    }
}

/// Geodesic point under the named metric.
pub fn geodesic(kind: MetricKind, q: &GeodesicQuery) -> Result<SPDMatrix> {
    match kind {
        MetricKind::AffineInvariant => Ok(ai_geodesic(q)),
        MetricKind::BuresWasserstein => bw_geodesic(q),
        MetricKind::LogEuclidean => Ok(loge_geodesic(q)),
    }
}

/// Metric tensor value under the named metric.
pub fn metric(kind: MetricKind, p: &SPDMatrix, u: &SymMatrix, v: &SymMatrix) -> Result<f64> {
    match kind {
        MetricKind::AffineInvariant => ai_metric(p, u, v),
        MetricKind::BuresWasserstein => bw_metric(p, u, v),
        MetricKind::LogEuclidean => loge_metric(p, u, v),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_invertible, random_spd, random_sym, rng_from_seed};
    use rand::Rng;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    fn diag(entries: &[f64]) -> SPDMatrix {
        SPDMatrix::from_diagonal(entries).unwrap()
    }

    #[test]
    fn ai_distance_examples() {
        let a = diag(&[4.0, 1.0]);
        assert_close(ai_distance(&a, &a).unwrap(), 0.0, 1e-12);
        let i = SPDMatrix::identity(2);
        assert_close(ai_distance(&a, &i).unwrap(), 4.0f64.ln(), 1e-12);
    }

    #[test]
    fn ai_congruence_invariance() {
        let mut rng = rng_from_seed(17);
        for _ in 0..30 {
            let dim = 2 + rng.gen_range(0..4usize);
            let a = random_spd(dim, &mut rng);
            let b = random_spd(dim, &mut rng);
            let c = random_invertible(dim, &mut rng);
            let ca = SPDMatrix::new(SymMatrix::symmetrize(&c * a.as_matrix() * c.transpose()))
                .unwrap();
            let cb = SPDMatrix::new(SymMatrix::symmetrize(&c * b.as_matrix() * c.transpose()))
                .unwrap();
            let d0 = ai_distance(&a, &b).unwrap();
            let d1 = ai_distance(&ca, &cb).unwrap();
            assert!((d0 - d1).abs() <= 1e-8 * d0.max(1.0));
        }
    }

    #[test]
    fn ai_geodesic_endpoints_and_midpoint() {
        let a = SPDMatrix::identity(2);
        let b = diag(&[4.0, 1.0]);
        let g0 = ai_geodesic(&GeodesicQuery::new(a.clone(), b.clone(), 0.0).unwrap());
        let g1 = ai_geodesic(&GeodesicQuery::new(a.clone(), b.clone(), 1.0).unwrap());
        assert!((g0.as_matrix() - a.as_matrix()).norm() <= 1e-10);
        assert!((g1.as_matrix() - b.as_matrix()).norm() <= 1e-10);
        let mid = ai_geodesic(&GeodesicQuery::new(a.clone(), b.clone(), 0.5).unwrap());
        assert_close(mid.as_matrix()[(0, 0)], 2.0, 1e-10);
        assert_close(mid.as_matrix()[(1, 1)], 1.0, 1e-10);
    }

    #[test]
    fn ai_geodesic_speed() {
        let mut rng = rng_from_seed(23);
        for _ in 0..20 {
            let a = random_spd(3, &mut rng);
            let b = random_spd(3, &mut rng);
            let t = rng.gen_range(0.0..1.0);
            let g = ai_geodesic(&GeodesicQuery::new(a.clone(), b.clone(), t).unwrap());
            let full = ai_distance(&a, &b).unwrap();
            let part = ai_distance(&a, &g).unwrap();
            assert!((part - t * full).abs() <= 1e-8 * full.max(1.0));
        }
    }

    #[test]
    fn ai_metric_examples() {
        let u = random_sym(2, &mut rng_from_seed(2));
        let v = random_sym(2, &mut rng_from_seed(3));
        let at_identity = ai_metric(&SPDMatrix::identity(2), &u, &v).unwrap();
        assert_close(at_identity, frobenius_inner(&u, &v).unwrap(), 1e-12);

        let p = diag(&[2.0, 2.0]);
        let i = SymMatrix::identity(2);
        assert_close(ai_metric(&p, &i, &i).unwrap(), 0.5, 1e-12);

        let mut rng = rng_from_seed(29);
        for _ in 0..500 {
            let dim = 2 + rng.gen_range(0..3usize);
            let p = random_spd(dim, &mut rng);
            let u = random_sym(dim, &mut rng);
            if u.frobenius_norm() > 1e-9 {
                assert!(ai_metric(&p, &u, &u).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn bw_distance_examples() {
        let a = diag(&[4.0, 4.0]);
        let b = SPDMatrix::identity(2);
        assert_close(bw_distance(&a, &a).unwrap(), 0.0, 1e-12);
        assert_close(bw_distance(&a, &b).unwrap(), 2.0f64.sqrt(), 1e-12);

        let mut rng = rng_from_seed(31);
        for _ in 0..50 {
            let x = random_spd(3, &mut rng);
            let y = random_spd(3, &mut rng);
            let d1 = bw_distance(&x, &y).unwrap();
            let d2 = bw_distance(&y, &x).unwrap();
            assert!((d1 - d2).abs() <= 1e-9 * d1.max(1.0));
            assert!(d1 >= 0.0);
        }
    }

    #[test]
    fn bw_commuting_pairs_oracle() {
        // commuting case reduces to sqrt interpolation of eigenvalues
        let mut rng = rng_from_seed(37);
        for _ in 0..30 {
            let evals_a: Vec<f64> = (0..3).map(|_| rng.gen_range(0.2..4.0)).collect();
            let evals_b: Vec<f64> = (0..3).map(|_| rng.gen_range(0.2..4.0)).collect();
            let a = diag(&evals_a);
            let b = diag(&evals_b);
            let expected: f64 = evals_a
                .iter()
                .zip(evals_b.iter())
                .map(|(x, y)| (x.sqrt() - y.sqrt()).powi(2))
                .sum::<f64>()
                .sqrt();
            assert_close(bw_distance(&a, &b).unwrap(), expected, 1e-10);
        }
    }

    #[test]
    fn bw_geodesic_endpoints_and_scalar_case() {
        let a = diag(&[4.0]);
        let b = diag(&[1.0]);
        let g0 = bw_geodesic(&GeodesicQuery::new(a.clone(), b.clone(), 0.0).unwrap()).unwrap();
        let g1 = bw_geodesic(&GeodesicQuery::new(a.clone(), b.clone(), 1.0).unwrap()).unwrap();
        assert_close(g0.as_matrix()[(0, 0)], 4.0, 1e-10);
        assert_close(g1.as_matrix()[(0, 0)], 1.0, 1e-10);
        let mid = bw_geodesic(&GeodesicQuery::new(a, b, 0.5).unwrap()).unwrap();
        assert_close(mid.as_matrix()[(0, 0)], 2.25, 1e-10);
    }

    #[test]
    fn bw_geodesic_constant_speed() {
        // the closed-form curve is a constant-speed minimizing geodesic, so
        // d(A, γ(t)) = t d(A, B); this cross-validates the distance and the
        // similarity realization of (AB)^{1/2} against each other
        let mut rng = rng_from_seed(101);
        for _ in 0..30 {
            let dim = 2 + rng.gen_range(0..4usize);
            let a = random_spd(dim, &mut rng);
            let b = random_spd(dim, &mut rng);
            let full = bw_distance(&a, &b).unwrap();
            for &t in &[0.25, 0.5, 0.75] {
                let g = bw_geodesic(&GeodesicQuery::new(a.clone(), b.clone(), t).unwrap())
                    .unwrap();
                let part = bw_distance(&a, &g).unwrap();
                assert!((part - t * full).abs() <= 1e-10 * full.max(1.0));
            }
        }
    }

    #[test]
    fn bw_metric_examples() {
        let u = random_sym(3, &mut rng_from_seed(5));
        let p = SPDMatrix::identity(3);
        let norm_sq = bw_metric(&p, &u, &u).unwrap();
        assert_close(norm_sq, frobenius_inner(&u, &u).unwrap() / 4.0, 1e-12);

        let mut rng = rng_from_seed(41);
        for _ in 0..50 {
            let p = random_spd(3, &mut rng);
            let u = random_sym(3, &mut rng);
            let v = random_sym(3, &mut rng);
            assert_close(
                bw_metric(&p, &u, &v).unwrap(),
                bw_metric(&p, &v, &u).unwrap(),
                1e-10,
            );
            if u.frobenius_norm() > 1e-9 {
                assert!(bw_metric(&p, &u, &u).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn loge_distance_examples() {
        let a = diag(&[std::f64::consts::E, 1.0]);
        let i = SPDMatrix::identity(2);
        assert_close(loge_distance(&a, &a).unwrap(), 0.0, 1e-12);
        assert_close(loge_distance(&a, &i).unwrap(), 1.0, 1e-12);
    }

    #[test]
    fn loge_triangle_inequality_sweep() {
        let mut rng = rng_from_seed(43);
        for _ in 0..200 {
            let dim = 2 + rng.gen_range(0..3usize);
            let a = random_spd(dim, &mut rng);
            let b = random_spd(dim, &mut rng);
            let c = random_spd(dim, &mut rng);
            let ab = loge_distance(&a, &b).unwrap();
            let bc = loge_distance(&b, &c).unwrap();
            let ac = loge_distance(&a, &c).unwrap();
            assert!(ac <= ab + bc + 1e-9);
        }
    }

    #[test]
    fn loge_geodesic_examples() {
        let a = SPDMatrix::identity(2);
        let b = diag(&[(2.0f64).exp().powi(1), 1.0]); // e^2 on the first axis
        let g0 = loge_geodesic(&GeodesicQuery::new(a.clone(), b.clone(), 0.0).unwrap());
        let g1 = loge_geodesic(&GeodesicQuery::new(a.clone(), b.clone(), 1.0).unwrap());
        assert!((g0.as_matrix() - a.as_matrix()).norm() <= 1e-10);
        assert!((g1.as_matrix() - b.as_matrix()).norm() <= 1e-10);
        let mid = loge_geodesic(&GeodesicQuery::new(a.clone(), b.clone(), 0.5).unwrap());
        assert_close(mid.as_matrix()[(0, 0)], std::f64::consts::E, 1e-10);

        // flat pullback: constant-speed parametrization
        let mut rng = rng_from_seed(47);
        for _ in 0..20 {
            let a = random_spd(3, &mut rng);
            let b = random_spd(3, &mut rng);
            let t = rng.gen_range(0.0..1.0);
            let g = loge_geodesic(&GeodesicQuery::new(a.clone(), b.clone(), t).unwrap());
            let full = loge_distance(&a, &b).unwrap();
            assert!((loge_distance(&a, &g).unwrap() - t * full).abs() <= 1e-9 * full.max(1.0));
        }
    }

    #[test]
    fn loge_vector_space_operations() {
        let a = diag(&[2.0]);
        let b = diag(&[3.0]);
        let prod = loge_mult(&a, &b).unwrap();
        assert_close(prod.as_matrix()[(0, 0)], 6.0, 1e-12);

        let mut rng = rng_from_seed(53);
        let p = random_spd(3, &mut rng);
        let with_identity = loge_mult(&p, &SPDMatrix::identity(3)).unwrap();
        assert!((with_identity.as_matrix() - p.as_matrix()).norm() <= 1e-10);
        let with_inverse = loge_mult(&p, &p.inverse()).unwrap();
        assert!((with_inverse.as_matrix() - DMatrix::identity(3, 3)).norm() <= 1e-10);

        // scalar action: 0 ⊛ A = I, 2 ⊛ diag(3) = diag(9), -1 ⊛ A = A^{-1}
        assert!((loge_scale(0.0, &p).as_matrix() - DMatrix::identity(3, 3)).norm() <= 1e-12);
        assert_close(loge_scale(2.0, &b).as_matrix()[(0, 0)], 9.0, 1e-12);
        assert!(
            (loge_scale(-1.0, &p).as_matrix() - p.inverse().as_matrix()).norm() <= 1e-10
        );

        // distributivity (λ+μ) ⊛ A = (λ⊛A) ⊙ (μ⊛A)
        let lhs = loge_scale(0.7 + 0.6, &p);
        let rhs = loge_mult(&loge_scale(0.7, &p), &loge_scale(0.6, &p)).unwrap();
        assert!((lhs.as_matrix() - rhs.as_matrix()).norm() <= 1e-9);
    }

    #[test]
    fn loge_inner_examples() {
        let e = diag(&[std::f64::consts::E, 1.0]);
        let i = SPDMatrix::identity(2);
        assert_close(loge_inner(&e, &i).unwrap(), 0.0, 1e-12);
        assert_close(loge_inner(&e, &e).unwrap(), 1.0, 1e-12);

        // homogeneity w.r.t. ⊛ and the distance identity d(A,B) = ‖A ⊙ B^{-1}‖
        let mut rng = rng_from_seed(59);
        for _ in 0..20 {
            let a = random_spd(3, &mut rng);
            let b = random_spd(3, &mut rng);
            let lam = rng.gen_range(-2.0..2.0);
            let lhs = loge_inner(&loge_scale(lam, &a), &b).unwrap();
            let rhs = lam * loge_inner(&a, &b).unwrap();
            assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0));

            let d = loge_distance(&a, &b).unwrap();
            let diff = loge_mult(&a, &b.inverse()).unwrap();
            let norm = loge_inner(&diff, &diff).unwrap().sqrt();
            assert!((d - norm).abs() <= 1e-9 * d.max(1.0));
        }
    }

    #[test]
    fn loge_metric_examples() {
        // at the identity the derivative of log is the identity map
        let u = random_sym(3, &mut rng_from_seed(61));
        let v = random_sym(3, &mut rng_from_seed(67));
        assert_close(
            loge_metric(&SPDMatrix::identity(3), &u, &v).unwrap(),
            frobenius_inner(&u, &v).unwrap(),
            1e-10,
        );

        // diagonal base point, diagonal directions: Σ U_ii V_ii / p_i²
        let p = diag(&[2.0, 5.0]);
        let ud = SymMatrix::from_diagonal(&[1.0, 3.0]);
        let vd = SymMatrix::from_diagonal(&[-2.0, 4.0]);
        let expected = 1.0 * (-2.0) / 4.0 + 3.0 * 4.0 / 25.0;
        assert_close(loge_metric(&p, &ud, &vd).unwrap(), expected, 1e-12);
    }

    #[test]
    fn loge_metric_finite_difference() {
        // ‖(log(P+hU) - log(P))/h‖² approaches g_logE(P)(U,U) as h shrinks
        let mut rng = rng_from_seed(71);
        let p = random_spd(3, &mut rng);
        let u = random_sym(3, &mut rng);
        let exact = loge_metric(&p, &u, &u).unwrap();
        let mut errors = Vec::new();
        for &h in &[1e-3, 1e-4, 1e-5] {
            let perturbed = SPDMatrix::new(
                SymMatrix::symmetrize(p.as_matrix() + u.as_matrix() * h),
            )
            .unwrap();
            let diff = logm_spd(&perturbed).sub(&logm_spd(&p)).unwrap();
            let fd = (diff.frobenius_norm() / h).powi(2);
            errors.push((fd - exact).abs() / exact.max(1e-12));
        }
        // first-order convergence: error shrinks with h
        assert!(errors[1] < errors[0]);
        assert!(errors[2] < 1e-3);
    }

    #[test]
    fn tangent_vector_validation() {
        let at = SPDMatrix::identity(3);
        let ok = TangentVector::new(at.clone(), random_sym(3, &mut rng_from_seed(73)));
        assert!(ok.is_ok());
        assert_eq!(ok.unwrap().direction.dim(), 3);
        assert!(TangentVector::new(at, SymMatrix::zeros(2)).is_err());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let a = SPDMatrix::identity(2);
        let b = SPDMatrix::identity(3);
        assert!(ai_distance(&a, &b).is_err());
        assert!(bw_distance(&a, &b).is_err());
        assert!(loge_distance(&a, &b).is_err());
        assert!(GeodesicQuery::new(a.clone(), b, 0.5).is_err());
        assert!(GeodesicQuery::new(a.clone(), a.clone(), 1.5).is_err());
    }
}

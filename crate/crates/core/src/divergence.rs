//! Bregman divergences and the Alpha Log-Det family on the SPD cone, with
//! the Bregman limits at α = ±1 and the dual symmetry d^α(A,B) = d^{-α}(B,A).

use crate::error::{GeomError, Result};
use crate::matfun::{frobenius_inner, sym_eig, SPDMatrix, SymMatrix};

/// Once 4/(1-α²) exceeds ~2e6 the generic formula starts cancelling badly,
/// so at |α| ≥ 1 - 1e-6 the exact limit expressions take over.
pub const ALPHA_LIMIT_SWITCH: f64 = 1.0 - 1e-6;

/// Points a convex function can be evaluated on: anything with affine
/// combinations.
pub trait ConvexPoint: Clone {
    fn combine(a: f64, x: &Self, b: f64, y: &Self) -> Self;
}

impl ConvexPoint for Vec<f64> {
    fn combine(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        x.iter().zip(y.iter()).map(|(xi, yi)| a * xi + b * yi).collect()
    }
}

impl ConvexPoint for SymMatrix {
    fn combine(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        SymMatrix::symmetrize(x.as_matrix() * a + y.as_matrix() * b)
    }
}

/// A differentiable strictly convex function given by its value, gradient
/// and the pairing ⟨·,·⟩ of the ambient inner product space.
pub struct ConvexSpec<P> {
    value: Box<dyn Fn(&P) -> f64 + Sync>,
    gradient: Box<dyn Fn(&P) -> P + Sync>,
    pairing: Box<dyn Fn(&P, &P) -> f64 + Sync>,
}

impl<P: ConvexPoint> ConvexSpec<P> {
    pub fn new(
        value: impl Fn(&P) -> f64 + Sync + 'static,
        gradient: impl Fn(&P) -> P + Sync + 'static,
        pairing: impl Fn(&P, &P) -> f64 + Sync + 'static,
    ) -> Self {
        Self {
            value: Box::new(value),
            gradient: Box::new(gradient),
            pairing: Box::new(pairing),
        }
    }

    pub fn value(&self, x: &P) -> f64 {
        (self.value)(x)
    }

    /// Spot check of strict convexity at the midpoint of a sampled pair.
    pub fn midpoint_strictly_convex(&self, x: &P, y: &P) -> bool {
        let mid = P::combine(0.5, x, 0.5, y);
        self.value(&mid) < 0.5 * self.value(x) + 0.5 * self.value(y)
    }
}

/// Squared Euclidean norm as a `ConvexSpec` on vectors.
pub fn squared_norm_spec() -> ConvexSpec<Vec<f64>> {
    ConvexSpec::new(
        |x: &Vec<f64>| x.iter().map(|v| v * v).sum(),
        |x: &Vec<f64>| x.iter().map(|v| 2.0 * v).collect(),
        |g: &Vec<f64>, d: &Vec<f64>| g.iter().zip(d.iter()).map(|(a, b)| a * b).sum(),
    )
}

/// φ(X) = -log det(X) on symmetric matrices with gradient -X^{-1} in the
/// Frobenius pairing. Outside the SPD cone the value is +∞.
pub fn neg_log_det_spec() -> ConvexSpec<SymMatrix> {
    ConvexSpec::new(
        |x: &SymMatrix| {
            let dec = sym_eig(x);
            if dec.eigenvalues.iter().any(|&l| l <= 0.0) {
                f64::INFINITY
            } else {
                -dec.eigenvalues.iter().map(|l| l.ln()).sum::<f64>()
            }
        },
        |x: &SymMatrix| sym_eig(x).apply(|l| -1.0 / l),
        |g: &SymMatrix, d: &SymMatrix| frobenius_inner(g, d).expect("matching dims"),
    )
}

/// Bregman divergence B_φ(x,y) = φ(x) - φ(y) - ⟨∇φ(y), x - y⟩.
pub fn bregman<P: ConvexPoint>(spec: &ConvexSpec<P>, x: &P, y: &P) -> Result<f64> {
    let fx = spec.value(x);
    let fy = spec.value(y);
    let grad_y = (spec.gradient)(y);
    let diff = P::combine(1.0, x, -1.0, y);
    let value = fx - fy - (spec.pairing)(&grad_y, &diff);
    if !value.is_finite() {
        return Err(GeomError::domain("bregman: point outside the domain"));
    }
    Ok(value)
}

/// Divergence order parameter, restricted to the closed interval where the
/// limit formulas apply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaParam(f64);

impl AlphaParam {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&alpha) {
            return Err(GeomError::validation(format!(
                "alpha = {alpha} outside [-1, 1]"
            )));
        }
        Ok(Self(alpha))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Alpha divergence d^α_φ with Bregman limits at α = ±1.
pub fn alpha_divergence<P: ConvexPoint>(
    spec: &ConvexSpec<P>,
    alpha: AlphaParam,
    x: &P,
    y: &P,
) -> Result<f64> {
    let a = alpha.value();
    if a >= ALPHA_LIMIT_SWITCH {
        return bregman(spec, x, y);
    }
    if a <= -ALPHA_LIMIT_SWITCH {
        return bregman(spec, y, x);
    }
    let wx = (1.0 - a) / 2.0;
    let wy = (1.0 + a) / 2.0;
    let mid = P::combine(wx, x, wy, y);
    let value = 4.0 / (1.0 - a * a) * (wx * spec.value(x) + wy * spec.value(y) - spec.value(&mid));
    if !value.is_finite() {
        return Err(GeomError::domain("alpha divergence: point outside the domain"));
    }
    Ok(value)
}

/// Alpha Log-Det divergence
/// d^α(A,B) = 4/(1-α²) log[det((1-α)/2 A + (1+α)/2 B) / (det A^{(1-α)/2} det B^{(1+α)/2})],
/// with the limits trace(B^{-1}A - I) - log det(B^{-1}A) at α = 1 and the
/// swapped expression at α = -1. All determinants go through eigenvalue
/// log-sums.
pub fn alpha_logdet(alpha: AlphaParam, a: &SPDMatrix, b: &SPDMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(GeomError::dims(
            format!("dim {}", a.dim()),
            format!("dim {}", b.dim()),
        ));
    }
    let al = alpha.value();
    if al >= ALPHA_LIMIT_SWITCH {
        return Ok(logdet_limit(a, b));
    }
    if al <= -ALPHA_LIMIT_SWITCH {
        return Ok(logdet_limit(b, a));
    }
    let wa = (1.0 - al) / 2.0;
    let wb = (1.0 + al) / 2.0;
    let mix = SymMatrix::symmetrize(a.as_matrix() * wa + b.as_matrix() * wb);
    let mix_logdet: f64 = sym_eig(&mix).eigenvalues.iter().map(|l| l.ln()).sum();
    Ok(4.0 / (1.0 - al * al) * (mix_logdet - wa * a.log_det() - wb * b.log_det()))
}

/// trace(B^{-1}A - I) - log det(B^{-1}A)
fn logdet_limit(a: &SPDMatrix, b: &SPDMatrix) -> f64 {
    let n = a.dim() as f64;
    let b_inv = b.inverse();
    let trace = frobenius_inner(b_inv.sym(), a.sym()).expect("dims checked");
    trace - n - (a.log_det() - b.log_det())
}

/// Residual |d^α(A,B) - d^{-α}(B,A)| of the dual symmetry identity.
pub fn check_dual_symmetry(alpha: AlphaParam, a: &SPDMatrix, b: &SPDMatrix) -> Result<f64> {
    let forward = alpha_logdet(alpha, a, b)?;
    let backward = alpha_logdet(AlphaParam::new(-alpha.value())?, b, a)?;
    Ok((forward - backward).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_spd, rng_from_seed};
    use rand::Rng;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn bregman_squared_norm_is_squared_distance() {
        let spec = squared_norm_spec();
        let x: Vec<f64> = vec![1.0, -2.0, 0.5];
        let y: Vec<f64> = vec![0.0, 1.0, 2.0];
        let expected: f64 = x
            .iter()
            .zip(y.iter())
            .map(|(a, b)| (a - b).powi(2))
            .sum();
        assert_close(bregman(&spec, &x, &y).unwrap(), expected, 1e-12);
        assert_close(bregman(&spec, &x, &x).unwrap(), 0.0, 1e-12);
        assert!(spec.midpoint_strictly_convex(&x, &y));
    }

    #[test]
    fn bregman_neg_log_scalar() {
        // φ(x) = -log x on scalars: B(2,1) = -ln 2 - (-1)(2-1) = 1 - ln 2
        let spec = ConvexSpec::new(
            |x: &Vec<f64>| -x[0].ln(),
            |x: &Vec<f64>| vec![-1.0 / x[0]],
            |g: &Vec<f64>, d: &Vec<f64>| g[0] * d[0],
        );
        let b = bregman(&spec, &vec![2.0], &vec![1.0]).unwrap();
        assert_close(b, 1.0 - 2.0f64.ln(), 1e-12);
    }

    #[test]
    fn alpha_divergence_limits_dispatch_to_bregman() {
        let spec = squared_norm_spec();
        let x = vec![1.0, 2.0];
        let y = vec![-0.5, 0.25];
        let plus = alpha_divergence(&spec, AlphaParam::new(1.0).unwrap(), &x, &y).unwrap();
        let minus = alpha_divergence(&spec, AlphaParam::new(-1.0).unwrap(), &x, &y).unwrap();
        assert_close(plus, bregman(&spec, &x, &y).unwrap(), 1e-12);
        assert_close(minus, bregman(&spec, &y, &x).unwrap(), 1e-12);
        assert_close(
            alpha_divergence(&spec, AlphaParam::new(0.3).unwrap(), &x, &x).unwrap(),
            0.0,
            1e-12,
        );
    }

    #[test]
    fn alpha_logdet_hand_values() {
        let a = SPDMatrix::from_diagonal(&[4.0]).unwrap();
        let b = SPDMatrix::from_diagonal(&[1.0]).unwrap();
        let zero = alpha_logdet(AlphaParam::new(0.0).unwrap(), &a, &b).unwrap();
        assert_close(zero, 4.0 * (2.5f64 / 2.0).ln(), 1e-12);

        let a2 = SPDMatrix::from_diagonal(&[2.0]).unwrap();
        let one = alpha_logdet(AlphaParam::new(1.0).unwrap(), &a2, &b).unwrap();
        assert_close(one, 1.0 - 2.0f64.ln(), 1e-12);

        for &al in &[-1.0, -0.5, 0.0, 0.5, 1.0] {
            let same =
                alpha_logdet(AlphaParam::new(al).unwrap(), &a, &a).unwrap();
            assert_close(same, 0.0, 1e-12);
        }
    }

    #[test]
    fn alpha_logdet_nonnegative_and_separating() {
        let mut rng = rng_from_seed(73);
        for _ in 0..1000 {
            let dim = 1 + rng.gen_range(0..6usize);
            let a = random_spd(dim, &mut rng);
            let b = random_spd(dim, &mut rng);
            let al = AlphaParam::new(rng.gen_range(-1.0..=1.0)).unwrap();
            let d = alpha_logdet(al, &a, &b).unwrap();
            assert!(d >= -1e-12, "negative divergence {d}");
            // distinct random pairs separate: zero only at a = b
            assert!(d > 1e-10, "divergence vanished on distinct inputs");
            assert!(alpha_logdet(al, &a, &a).unwrap().abs() <= 1e-12);
        }
    }

    #[test]
    fn dual_symmetry_and_limit_continuity() {
        let mut rng = rng_from_seed(79);
        for _ in 0..200 {
            let dim = 1 + rng.gen_range(0..4usize);
            let a = random_spd(dim, &mut rng);
            let b = random_spd(dim, &mut rng);
            let al = AlphaParam::new(rng.gen_range(-1.0..=1.0)).unwrap();
            assert!(check_dual_symmetry(al, &a, &b).unwrap() <= 1e-10);

            let near = alpha_logdet(AlphaParam::new(1.0 - 1e-4).unwrap(), &a, &b).unwrap();
            let at = alpha_logdet(AlphaParam::new(1.0).unwrap(), &a, &b).unwrap();
            assert!((near - at).abs() <= 1e-3 * (1.0 + at.abs()));
        }
    }

    #[test]
    fn fan_inequality_direct() {
        let mut rng = rng_from_seed(83);
        for _ in 0..300 {
            let dim = 1 + rng.gen_range(0..5usize);
            let a = random_spd(dim, &mut rng);
            let b = random_spd(dim, &mut rng);
            let mix = SymMatrix::symmetrize((a.as_matrix() + b.as_matrix()) * 0.5);
            let mix_logdet: f64 = sym_eig(&mix).eigenvalues.iter().map(|l| l.ln()).sum();
            assert!(mix_logdet >= 0.5 * (a.log_det() + b.log_det()) - 1e-10);
        }
    }

    #[test]
    fn alpha_divergence_specializes_to_logdet() {
        let spec = neg_log_det_spec();
        let mut rng = rng_from_seed(89);
        for _ in 0..100 {
            let dim = 1 + rng.gen_range(0..4usize);
            let a = random_spd(dim, &mut rng);
            let b = random_spd(dim, &mut rng);
            let al = AlphaParam::new(rng.gen_range(-1.0..=1.0)).unwrap();
            let via_spec =
                alpha_divergence(&spec, al, a.sym(), b.sym()).unwrap();
            let direct = alpha_logdet(al, &a, &b).unwrap();
            assert!((via_spec - direct).abs() <= 1e-10 * (1.0 + direct.abs()));
        }
    }

    #[test]
    fn bregman_rejects_points_outside_the_domain() {
        let spec = neg_log_det_spec();
        let indefinite = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        let inside = SymMatrix::identity(2);
        assert!(matches!(
            bregman(&spec, &indefinite, &inside),
            Err(crate::error::GeomError::Domain(_))
        ));
    }

    #[test]
    fn alpha_param_range_enforced() {
        assert!(AlphaParam::new(1.5).is_err());
        assert!(AlphaParam::new(-1.0001).is_err());
        assert!(AlphaParam::new(1.0).is_ok());
    }
}

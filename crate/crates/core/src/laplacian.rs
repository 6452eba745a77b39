//! Graph Laplacian quadratic form, the point cloud Laplace operator, and the
//! normalized estimator that converges to the manifold Laplacian on uniform
//! samples, with samplers and analytic references for unit test manifolds.
//!
//! Sign convention: the positive-semidefinite Laplacian (Δ = -div grad), so
//! the quadratic form is nonnegative and on the circle Δ cos θ = cos θ.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{GeomError, Result};
use crate::sampling::{rng_for_unit, rng_from_seed, standard_normal};

/// A finite sample from an embedded manifold.
#[derive(Debug, Clone)]
pub struct PointCloud {
    pub ambient_dim: usize,
    pub points: Vec<Vec<f64>>,
    /// Intrinsic dimension as declared by the sampler; drives the bandwidth
    /// normalization, not any validation of the points themselves.
    pub manifold_dim: usize,
}

impl PointCloud {
    pub fn new(ambient_dim: usize, points: Vec<Vec<f64>>, manifold_dim: usize) -> Result<Self> {
        if points.len() < 2 {
            return Err(GeomError::validation("point cloud needs at least 2 points"));
        }
        if manifold_dim == 0 || ambient_dim == 0 {
            return Err(GeomError::validation("dimensions must be positive"));
        }
        for p in &points {
            if p.len() != ambient_dim {
                return Err(GeomError::dims(
                    format!("ambient dim {ambient_dim}"),
                    format!("{}", p.len()),
                ));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(GeomError::validation("non-finite point"));
            }
        }
        Ok(Self {
            ambient_dim,
            points,
            manifold_dim,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Heat kernel weight matrix W_ij = exp(-‖x_i - x_j‖²/(4t)) over ambient
/// (extrinsic) distances.
#[derive(Debug, Clone)]
pub struct HeatWeights {
    pub t: f64,
    pub matrix: DMatrix<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).powi(2)).sum()
}

pub fn heat_weights(cloud: &PointCloud, t: f64) -> Result<HeatWeights> {
    if t <= 0.0 || !t.is_finite() {
        return Err(GeomError::validation(format!("t = {t} must be > 0")));
    }
    let m = cloud.len();
    let mut w = DMatrix::zeros(m, m);
    for i in 0..m {
        w[(i, i)] = 1.0;
        for j in (i + 1)..m {
            let v = (-sq_dist(&cloud.points[i], &cloud.points[j]) / (4.0 * t)).exp();
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    Ok(HeatWeights { t, matrix: w })
}

/// Unnormalized graph Laplacian form (1/2) Σ W_ij (z_i - z_j)².
pub fn quadratic_form(w: &HeatWeights, z: &[f64]) -> Result<f64> {
    let m = w.matrix.nrows();
    if z.len() != m {
        return Err(GeomError::dims(format!("{m} values"), format!("{}", z.len())));
    }
    let mut total = 0.0;
    for i in 0..m {
        for j in 0..m {
            total += w.matrix[(i, j)] * (z[i] - z[j]).powi(2);
        }
    }
    Ok(0.5 * total)
}

/// The graph Laplacian (D - W) acting on a sampled function vector.
pub fn graph_laplacian_action(w: &HeatWeights, z: &[f64]) -> Result<Vec<f64>> {
    let m = w.matrix.nrows();
    if z.len() != m {
        return Err(GeomError::dims(format!("{m} values"), format!("{}", z.len())));
    }
    Ok((0..m)
        .map(|i| {
            let mut acc = 0.0;
            for j in 0..m {
                acc += w.matrix[(i, j)] * (z[i] - z[j]);
            }
            acc
        })
        .collect())
}

/// Point cloud Laplace operator at an arbitrary manifold point:
/// (Δ^t f)(x) = f(x) (1/m) Σ e^{-‖x-x_j‖²/4t} - (1/m) Σ f(x_j) e^{-‖x-x_j‖²/4t}.
pub fn pointcloud_laplacian(
    cloud: &PointCloud,
    t: f64,
    f: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
) -> Result<f64> {
    if t <= 0.0 || !t.is_finite() {
        return Err(GeomError::validation(format!("t = {t} must be > 0")));
    }
    if x.len() != cloud.ambient_dim {
        return Err(GeomError::dims(
            format!("ambient dim {}", cloud.ambient_dim),
            format!("{}", x.len()),
        ));
    }
    let m = cloud.len() as f64;
    let fx = f(x);
    let mut acc = 0.0;
    for xj in &cloud.points {
        let w = (-sq_dist(x, xj) / (4.0 * t)).exp();
        acc += (fx - f(xj)) * w;
    }
    Ok(acc / m)
}

/// Bandwidth schedule t_m = m^{-1/(n+2+α)}.
pub fn estimator_bandwidth(m: usize, n: usize, alpha: f64) -> Result<f64> {
    if m == 0 || n == 0 {
        return Err(GeomError::validation("m and n must be >= 1"));
    }
    if alpha <= 0.0 {
        return Err(GeomError::validation(format!("alpha = {alpha} must be > 0")));
    }
    Ok((m as f64).powf(-1.0 / (n as f64 + 2.0 + alpha)))
}

/// Normalized estimator (1/(t_m (4π t_m)^{n/2})) (Δ^t f)(p); converges in
/// probability to (Δ_g f)(p) / vol(M) under uniform sampling.
pub fn laplacian_estimate(
    cloud: &PointCloud,
    f: &dyn Fn(&[f64]) -> f64,
    p: &[f64],
    alpha: f64,
) -> Result<f64> {
    let t = estimator_bandwidth(cloud.len(), cloud.manifold_dim, alpha)?;
    let raw = pointcloud_laplacian(cloud, t, f, p)?;
    let n = cloud.manifold_dim as f64;
    let norm = t * (4.0 * std::f64::consts::PI * t).powf(n / 2.0);
    Ok(raw / norm)
}

/// Uniform sample of the unit circle in R².
pub fn sample_circle(m: usize, seed: u64) -> Result<PointCloud> {
    let mut rng = rng_from_seed(seed);
    let points = (0..m)
        .map(|_| {
            let theta = rng.gen_range(0.0..std::f64::consts::TAU);
            vec![theta.cos(), theta.sin()]
        })
        .collect();
    PointCloud::new(2, points, 1)
}

/// Uniform sample of the unit sphere in R³ (normalized Gaussians).
pub fn sample_sphere(m: usize, seed: u64) -> Result<PointCloud> {
    let mut rng = rng_from_seed(seed);
    let points = (0..m)
        .map(|_| loop {
            let v = [
                standard_normal(&mut rng),
                standard_normal(&mut rng),
                standard_normal(&mut rng),
            ];
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if norm > 1e-12 {
                return vec![v[0] / norm, v[1] / norm, v[2] / norm];
            }
        })
        .collect();
    PointCloud::new(3, points, 2)
}

/// Uniform sample of the flat torus S¹ × S¹ in R⁴.
pub fn sample_flat_torus(m: usize, seed: u64) -> Result<PointCloud> {
    let mut rng = rng_from_seed(seed);
    let points = (0..m)
        .map(|_| {
            let a = rng.gen_range(0.0..std::f64::consts::TAU);
            let b = rng.gen_range(0.0..std::f64::consts::TAU);
            vec![a.cos(), a.sin(), b.cos(), b.sin()]
        })
        .collect();
    PointCloud::new(4, points, 2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManifoldId {
    Circle,
    Sphere,
    FlatTorus,
}

impl ManifoldId {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "circle" => Ok(Self::Circle),
            "sphere" => Ok(Self::Sphere),
            "torus" => Ok(Self::FlatTorus),
            other => Err(GeomError::validation(format!(
                "unknown manifold {other:?}, expected circle|sphere|torus"
            ))),
        }
    }

    pub fn sample(self, m: usize, seed: u64) -> Result<PointCloud> {
        match self {
            Self::Circle => sample_circle(m, seed),
            Self::Sphere => sample_sphere(m, seed),
            Self::FlatTorus => sample_flat_torus(m, seed),
        }
    }

    pub fn volume(self) -> f64 {
        match self {
            Self::Circle => std::f64::consts::TAU,
            Self::Sphere => 4.0 * std::f64::consts::PI,
            Self::FlatTorus => std::f64::consts::TAU * std::f64::consts::TAU,
        }
    }

    /// A canonical evaluation point on the manifold.
    pub fn base_point(self) -> Vec<f64> {
        match self {
            Self::Circle => vec![1.0, 0.0],
            Self::Sphere => vec![0.0, 0.0, 1.0],
            Self::FlatTorus => vec![1.0, 0.0, 1.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenfunctionId {
    Constant,
    FirstHarmonic,
}

impl EigenfunctionId {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "constant" => Ok(Self::Constant),
            "first" => Ok(Self::FirstHarmonic),
            other => Err(GeomError::validation(format!(
                "unknown eigenfunction {other:?}, expected constant|first"
            ))),
        }
    }
}

/// An eigenfunction with its Laplacian and the manifold volume, for use as a
/// convergence oracle.
pub struct AnalyticReference {
    pub f: Box<dyn Fn(&[f64]) -> f64 + Sync + Send>,
    pub laplacian_f: Box<dyn Fn(&[f64]) -> f64 + Sync + Send>,
    pub eigenvalue: f64,
    pub volume: f64,
}

/// Restrictions of coordinate functions are Laplace eigenfunctions on these
/// models: cos θ on the circle (eigenvalue 1), z on the sphere (eigenvalue
/// 2 = l(l+1) for l = 1), cos θ₁ on the flat torus (eigenvalue 1).
pub fn analytic_laplacian(
    manifold: ManifoldId,
    eigenfunction: EigenfunctionId,
) -> AnalyticReference {
    let (eigenvalue, f): (f64, Box<dyn Fn(&[f64]) -> f64 + Sync + Send>) = match eigenfunction {
        EigenfunctionId::Constant => (0.0, Box::new(|_: &[f64]| 1.0)),
        EigenfunctionId::FirstHarmonic => match manifold {
            ManifoldId::Circle => (1.0, Box::new(|x: &[f64]| x[0])),
            ManifoldId::Sphere => (2.0, Box::new(|x: &[f64]| x[2])),
            ManifoldId::FlatTorus => (1.0, Box::new(|x: &[f64]| x[0])),
        },
    };
    let f2: Box<dyn Fn(&[f64]) -> f64 + Sync + Send> = match eigenfunction {
        EigenfunctionId::Constant => Box::new(|_: &[f64]| 1.0),
        EigenfunctionId::FirstHarmonic => match manifold {
            ManifoldId::Circle => Box::new(|x: &[f64]| x[0]),
            ManifoldId::Sphere => Box::new(|x: &[f64]| x[2]),
            ManifoldId::FlatTorus => Box::new(|x: &[f64]| x[0]),
        },
    };
    AnalyticReference {
        f,
        laplacian_f: Box::new(move |x: &[f64]| eigenvalue * f2(x)),
        eigenvalue,
        volume: manifold.volume(),
    }
}

/// One row of a convergence experiment: sample size, bandwidth and the
/// median relative error over the seeds.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub size: usize,
    pub t: f64,
    pub median_rel_error: f64,
}

/// Bandwidth-scheduled convergence experiment: for each size, sample `seeds`
/// independent clouds, evaluate the normalized estimator at `p` against the
/// analytic limit (Δ_g f)(p)/vol(M), and report the median relative error.
pub fn convergence_sweep(
    manifold: ManifoldId,
    eigenfunction: EigenfunctionId,
    p: &[f64],
    sizes: &[usize],
    seeds: usize,
    alpha: f64,
    base_seed: u64,
) -> Result<Vec<ConvergenceRow>> {
    if sizes.is_empty() || seeds == 0 {
        return Err(GeomError::validation("sizes and seeds must be nonempty"));
    }
    let reference = analytic_laplacian(manifold, eigenfunction);
    let target = (reference.laplacian_f)(p) / reference.volume;
    if target.abs() < 1e-14 {
        return Err(GeomError::validation(
            "analytic Laplacian vanishes at p; relative error undefined",
        ));
    }
    sizes
        .iter()
        .map(|&m| {
            let mut errors: Vec<f64> = (0..seeds)
                .into_par_iter()
                .map(|s| {
                    let mut unit_rng = rng_for_unit(base_seed, (m as u64) << 20 | s as u64);
                    let seed = unit_rng.gen::<u64>();
                    let cloud = manifold.sample(m, seed)?;
                    let est = laplacian_estimate(&cloud, &reference.f, p, alpha)?;
                    Ok((est - target).abs() / target.abs())
                })
                .collect::<Result<_>>()?;
            errors.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let median = if errors.len() % 2 == 1 {
                errors[errors.len() / 2]
            } else {
                0.5 * (errors[errors.len() / 2 - 1] + errors[errors.len() / 2])
            };
            Ok(ConvergenceRow {
                size: m,
                t: estimator_bandwidth(m, match manifold {
                    ManifoldId::Circle => 1,
                    _ => 2,
                }, alpha)?,
                median_rel_error: median,
            })
        })
        .collect()
}

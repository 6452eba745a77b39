//! Fast self-check: a reduced pass over the library's core properties,
//! deterministic in the seed and finishing well under a minute.

use geoml::divergence::{alpha_logdet, check_dual_symmetry, AlphaParam};
use geoml::erm::{empirical_joint, regularized_risk, ErmContext, GridModel};
use geoml::kernel::{gram, min_eigenvalue, KernelSpec, Point};
use geoml::laplacian::{graph_laplacian_action, heat_weights, quadratic_form, sample_circle};
use geoml::markov::{disintegrate, graph_pushforward, random_joint, FiniteSpace};
use geoml::matfun::{sym_eig, SPDMatrix, SymMatrix};
use geoml::rkhs::{
    concentration_bound, loghs_cov_distance, mmd, RegularizedCovariancePair, Sample,
};
use geoml::sampling::{gaussian_matrix, random_spd, rng_from_seed, Generator};
use geoml::spd::{
    ai_distance, bw_distance, bw_geodesic, loge_distance, loge_geodesic, GeodesicQuery,
};
use geoml::Result;
use rand::Rng;

pub struct PropertyResult {
    pub name: &'static str,
    pub pass: bool,
}

/// Triangle inequality of a distance over random SPD triples; parameterized
/// over the distance so a deliberately broken metric is caught.
pub fn triangle_property(
    distance: &dyn Fn(&SPDMatrix, &SPDMatrix) -> Result<f64>,
    triples: usize,
    rng: &mut Generator,
) -> Result<bool> {
    for _ in 0..triples {
        let dim = 2 + rng.gen_range(0..3usize);
        let a = random_spd(dim, rng);
        let b = random_spd(dim, rng);
        let c = random_spd(dim, rng);
        let ab = distance(&a, &b)?;
        let bc = distance(&b, &c)?;
        let ac = distance(&a, &c)?;
        if ac > ab + bc + 1e-8 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn geodesic_endpoints(rng: &mut Generator) -> Result<bool> {
    for _ in 0..20 {
        let dim = 2 + rng.gen_range(0..3usize);
        let a = random_spd(dim, rng);
        let b = random_spd(dim, rng);
        let scale = a.sym().frobenius_norm();
        for kind in 0..3 {
            let g0 = match kind {
                0 => geoml::spd::ai_geodesic(&GeodesicQuery::new(a.clone(), b.clone(), 0.0)?),
                1 => bw_geodesic(&GeodesicQuery::new(a.clone(), b.clone(), 0.0)?)?,
                _ => loge_geodesic(&GeodesicQuery::new(a.clone(), b.clone(), 0.0)?),
            };
            let g1 = match kind {
                0 => geoml::spd::ai_geodesic(&GeodesicQuery::new(a.clone(), b.clone(), 1.0)?),
                1 => bw_geodesic(&GeodesicQuery::new(a.clone(), b.clone(), 1.0)?)?,
                _ => loge_geodesic(&GeodesicQuery::new(a.clone(), b.clone(), 1.0)?),
            };
            if (g0.as_matrix() - a.as_matrix()).norm() > 1e-10 * scale
                || (g1.as_matrix() - b.as_matrix()).norm() > 1e-10 * scale
            {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn metric_axioms(rng: &mut Generator) -> Result<bool> {
    if !triangle_property(&|a, b| ai_distance(a, b), 100, rng)? {
        return Ok(false);
    }
    if !triangle_property(&|a, b| loge_distance(a, b), 100, rng)? {
        return Ok(false);
    }
    for _ in 0..50 {
        let a = random_spd(3, rng);
        let b = random_spd(3, rng);
        let d = bw_distance(&a, &b)?;
        if d < 0.0 || (d - bw_distance(&b, &a)?).abs() > 1e-9 * d.max(1.0) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn loge_kernels_psd(rng: &mut Generator) -> Result<bool> {
    for _ in 0..10 {
        let pts: Vec<Point> = (0..12).map(|_| Point::Spd(random_spd(3, rng))).collect();
        let g = gram(&KernelSpec::LogEExp { sigma: 0.7, p: 2.0 }, &pts)?;
        if min_eigenvalue(&g) < -1e-9 {
            return Ok(false);
        }
        let g2 = gram(&KernelSpec::LogEPoly { c: 1.0, degree: 2 }, &pts)?;
        let scale = g2.entries().norm();
        if min_eigenvalue(&g2) < -1e-9 * scale.max(1.0) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn stein_admissible_psd(rng: &mut Generator) -> Result<bool> {
    for _ in 0..10 {
        let pts: Vec<Point> = (0..12).map(|_| Point::Spd(random_spd(3, rng))).collect();
        let g = gram(&KernelSpec::Stein { sigma: 1.0 }, &pts)?;
        if min_eigenvalue(&g) < -1e-9 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn disintegration_round_trip(rng: &mut Generator) -> Result<bool> {
    for _ in 0..100 {
        let p = 1 + rng.gen_range(0..6usize);
        let q = 1 + rng.gen_range(0..6usize);
        let x = FiniteSpace::indexed("x", p);
        let y = FiniteSpace::indexed("y", q);
        let mu = random_joint(&x, &y, rng);
        let (marg, kernel) = disintegrate(&mu);
        let back = graph_pushforward(&kernel, &marg)?;
        if (back.table() - mu.table()).abs().max() > 1e-12 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn alpha_logdet_properties(rng: &mut Generator) -> Result<bool> {
    for _ in 0..200 {
        let dim = 1 + rng.gen_range(0..4usize);
        let a = random_spd(dim, rng);
        let b = random_spd(dim, rng);
        let al = AlphaParam::new(rng.gen_range(-1.0..=1.0))?;
        if check_dual_symmetry(al, &a, &b)? > 1e-10 {
            return Ok(false);
        }
        if alpha_logdet(al, &a, &b)? < -1e-12 {
            return Ok(false);
        }
        // Fan's inequality
        let mix = SymMatrix::symmetrize((a.as_matrix() + b.as_matrix()) * 0.5);
        let mix_logdet: f64 = sym_eig(&mix).eigenvalues.iter().map(|l| l.ln()).sum();
        if mix_logdet < 0.5 * (a.log_det() + b.log_det()) - 1e-10 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn loghs_scalar_identity(rng: &mut Generator) -> Result<bool> {
    let one1 = nalgebra::DMatrix::from_column_slice(2, 1, &[1.0, 2.0]);
    let one2 = nalgebra::DMatrix::from_column_slice(2, 1, &[-1.0, 0.5]);
    for _ in 0..10 {
        let g1: f64 = rng.gen_range(0.05..5.0);
        let g2: f64 = rng.gen_range(0.05..5.0);
        let pair = RegularizedCovariancePair::new(
            one1.clone(),
            one2.clone(),
            g1,
            g2,
            KernelSpec::EuclideanGaussian { sigma: 1.0 },
        )?;
        if (loghs_cov_distance(&pair)? - (g1 / g2).ln().abs()).abs() > 1e-12 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn mmd_and_bound(rng: &mut Generator) -> Result<bool> {
    let s = Sample::new(vec![vec![0.0, 1.0], vec![0.5, -0.5]])?;
    if mmd(&KernelSpec::EuclideanGaussian { sigma: 1.0 }, &s, &s)? > 1e-12 {
        return Ok(false);
    }
    let b = concentration_bound(100, 0.1, 1.0)?;
    if (b - 0.414597).abs() > 1e-5 {
        return Ok(false);
    }
    let _ = rng;
    Ok(true)
}

fn laplacian_identity(rng: &mut Generator) -> Result<bool> {
    let seed = rng.gen::<u64>();
    let cloud = sample_circle(40, seed)?;
    let w = heat_weights(&cloud, 0.3)?;
    let z: Vec<f64> = cloud.points.iter().map(|p| p[0] + p[1] * p[0]).collect();
    let action = graph_laplacian_action(&w, &z)?;
    let via: f64 = z.iter().zip(action.iter()).map(|(a, b)| a * b).sum();
    let direct = quadratic_form(&w, &z)?;
    Ok((via - direct).abs() <= 1e-10 * direct.abs().max(1.0))
}

fn erm_risk_basics(rng: &mut Generator) -> Result<bool> {
    let ctx = ErmContext::new(
        GridModel::uniform(3, 3)?,
        KernelSpec::euclidean_gaussian_from_gamma(1.0)?,
    )?;
    let samples: Vec<(usize, usize)> = (0..12)
        .map(|_| (rng.gen_range(0..3), rng.gen_range(0..3)))
        .collect();
    let empirical = empirical_joint(ctx.model(), &samples)?;
    let (_, kernel) = disintegrate(&empirical);
    let f = ctx.field_from_kernel(&kernel)?;
    Ok(regularized_risk(&ctx, &f, &empirical, 0.0)? <= 1e-12)
}

fn loghs_linear_oracle(rng: &mut Generator) -> Result<bool> {
    // Gram route against the ambient-covariance route for the linear kernel
    for _ in 0..5 {
        let m1 = 1 + rng.gen_range(0..5usize);
        let m2 = 1 + rng.gen_range(0..5usize);
        let d = m1 + m2 + 4;
        let pair = RegularizedCovariancePair::new(
            gaussian_matrix(d, m1, rng),
            gaussian_matrix(d, m2, rng),
            rng.gen_range(0.1..2.0),
            rng.gen_range(0.1..2.0),
            KernelSpec::Linear,
        )?;
        let via_gram = geoml::rkhs::loghs_cov_distance_squared(&pair)?;
        let centering = |m: usize| {
            nalgebra::DMatrix::identity(m, m)
                - nalgebra::DMatrix::from_element(m, m, 1.0 / m as f64)
        };
        let cov = |x: &nalgebra::DMatrix<f64>| x * centering(x.ncols()) * x.transpose() / x.ncols() as f64;
        let log_reg = |c: &nalgebra::DMatrix<f64>, gamma: f64| {
            sym_eig(&SymMatrix::symmetrize(c / gamma)).apply(|l| l.max(0.0).ln_1p())
        };
        let mlog1 = log_reg(&cov(&pair.data1), pair.gamma1);
        let mlog2 = log_reg(&cov(&pair.data2), pair.gamma2);
        let ambient = mlog1.sub(&mlog2)?.frobenius_norm().powi(2)
            + (pair.gamma1 / pair.gamma2).ln().powi(2);
        if (via_gram - ambient).abs() > 1e-8 * ambient.max(1.0) {
            return Ok(false);
        }
    }
    Ok(true)
}

type Check = Box<dyn Fn(&mut Generator) -> Result<bool>>;

/// Runs every fast property with its own deterministic stream derived from
/// the seed. Returns one named pass/fail per property.
pub fn run(seed: u64) -> Result<Vec<PropertyResult>> {
    let checks: Vec<(&'static str, Check)> = vec![
        ("geodesic_endpoints", Box::new(geodesic_endpoints)),
        ("metric_axioms", Box::new(metric_axioms)),
        ("loge_kernels_psd", Box::new(loge_kernels_psd)),
        ("stein_admissible_psd", Box::new(stein_admissible_psd)),
        ("disintegration_round_trip", Box::new(disintegration_round_trip)),
        ("alpha_logdet_properties", Box::new(alpha_logdet_properties)),
        ("loghs_scalar_identity", Box::new(loghs_scalar_identity)),
        ("loghs_linear_oracle", Box::new(loghs_linear_oracle)),
        ("mmd_and_concentration_bound", Box::new(mmd_and_bound)),
        ("laplacian_form_identity", Box::new(laplacian_identity)),
        ("erm_risk_basics", Box::new(erm_risk_basics)),
    ];
    checks
        .into_iter()
        .enumerate()
        .map(|(k, (name, check))| {
            let mut rng = rng_from_seed(seed.wrapping_add(1_000_003 * k as u64));
            Ok(PropertyResult {
                name,
                pass: check(&mut rng)?,
            })
        })
        .collect()
}

//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with the measured quantities. Tolerances are pinned here, not
//! configurable.

use geoml::divergence::{alpha_logdet, check_dual_symmetry, AlphaParam};
use geoml::erm::{learning_curve, smooth_true_joint, ErmContext, GridModel, Schedule};
use geoml::kernel::{
    gram, min_eigenvalue, nonpd_witness_search, spd_witness_sampler, KernelSpec, Point,
};
use geoml::laplacian::{convergence_sweep, EigenfunctionId, ManifoldId};
use geoml::markov::{
    disintegrate, graph_pushforward, random_joint, FiniteSpace, MarkovKernel,
};
use geoml::matfun::{sym_eig, SymMatrix};
use geoml::rkhs::{
    concentration_montecarlo, correct_loss, loghs_cov_distance, loghs_cov_distance_squared,
    ProductEmbedding, RegularizedCovariancePair,
};
use geoml::sampling::{
    gaussian_matrix, random_invertible, random_spd, rng_from_seed, Generator,
};
use geoml::spd::{
    ai_distance, ai_geodesic, bw_distance, bw_geodesic, loge_distance, loge_geodesic,
    GeodesicQuery,
};
use nalgebra::DMatrix;
use rand::Rng;

fn random_pair(rng: &mut Generator) -> (geoml::matfun::SPDMatrix, geoml::matfun::SPDMatrix) {
    let dim = rng.gen_range(2..=6usize);
    (random_spd(dim, rng), random_spd(dim, rng))
}

#[test]
fn criterion_01_geodesic_endpoint_exactness() {
    let mut rng = rng_from_seed(101);
    let tol = 1e-10;
    for _ in 0..200 {
        let (a, b) = random_pair(&mut rng);
        let scale = a.sym().frobenius_norm();
        let endpoints = |g0: &geoml::matfun::SPDMatrix, g1: &geoml::matfun::SPDMatrix| {
            assert!(
                (g0.as_matrix() - a.as_matrix()).norm() <= tol * scale,
                "geodesic start off by {}",
                (g0.as_matrix() - a.as_matrix()).norm()
            );
            assert!(
                (g1.as_matrix() - b.as_matrix()).norm() <= tol * scale,
                "geodesic end off by {}",
                (g1.as_matrix() - b.as_matrix()).norm()
            );
        };
        let q0 = GeodesicQuery::new(a.clone(), b.clone(), 0.0).unwrap();
        let q1 = GeodesicQuery::new(a.clone(), b.clone(), 1.0).unwrap();
        endpoints(&ai_geodesic(&q0), &ai_geodesic(&q1));
        endpoints(&bw_geodesic(&q0).unwrap(), &bw_geodesic(&q1).unwrap());
        endpoints(&loge_geodesic(&q0), &loge_geodesic(&q1));
    }
    println!("PASS criterion 1: all three geodesics hit their endpoints within 1e-10 relative on 200 random pairs");
}

#[test]
fn criterion_02_metric_axioms() {
    let mut rng = rng_from_seed(102);
    let tol = 1e-8;
    for _ in 0..1000 {
        let dim = rng.gen_range(2..=6usize);
        let a = random_spd(dim, &mut rng);
        let b = random_spd(dim, &mut rng);
        let c = random_spd(dim, &mut rng);
        let check_true_metric =
            |name: &str, d: &dyn Fn(
                &geoml::matfun::SPDMatrix,
                &geoml::matfun::SPDMatrix,
            ) -> geoml::Result<f64>| {
                let ab = d(&a, &b).unwrap();
                let ba = d(&b, &a).unwrap();
                let bc = d(&b, &c).unwrap();
                let ac = d(&a, &c).unwrap();
                assert!(ab >= 0.0, "{name} negative distance");
                assert!(d(&a, &a).unwrap() <= tol, "{name} self distance");
                assert!((ab - ba).abs() <= tol * ab.max(1.0), "{name} asymmetry");
                assert!(ac <= ab + bc + tol, "{name} triangle violation");
            };
        check_true_metric("ai", &|x, y| ai_distance(x, y));
        check_true_metric("loge", &|x, y| loge_distance(x, y));
        let ab = bw_distance(&a, &b).unwrap();
        let ba = bw_distance(&b, &a).unwrap();
        assert!(ab >= 0.0);
        // the closed form subtracts O(trace) quantities, so the self
        // distance carries sqrt-of-cancellation noise scaled by the trace
        let self_d = bw_distance(&a, &a).unwrap();
        assert!(
            self_d * self_d <= 1e-12 * 2.0 * a.trace(),
            "bw self distance {self_d}"
        );
        assert!((ab - ba).abs() <= tol * ab.max(1.0), "bw asymmetry");
    }
    // congruence invariance of the affine-invariant distance
    for _ in 0..200 {
        let dim = rng.gen_range(2..=6usize);
        let a = random_spd(dim, &mut rng);
        let b = random_spd(dim, &mut rng);
        let c = random_invertible(dim, &mut rng);
        let ca = geoml::matfun::SPDMatrix::new(SymMatrix::symmetrize(
            &c * a.as_matrix() * c.transpose(),
        ))
        .unwrap();
        let cb = geoml::matfun::SPDMatrix::new(SymMatrix::symmetrize(
            &c * b.as_matrix() * c.transpose(),
        ))
        .unwrap();
        let before = ai_distance(&a, &b).unwrap();
        let after = ai_distance(&ca, &cb).unwrap();
        assert!(
            (before - after).abs() <= 1e-8 * before.max(1.0),
            "congruence drift {}",
            (before - after).abs()
        );
    }
    println!("PASS criterion 2: metric axioms on 1000 triples and affine congruence invariance on 200 pairs within 1e-8");
}

#[test]
fn criterion_03_log_euclidean_kernel_sweep() {
    let mut rng = rng_from_seed(103);
    let mut specs: Vec<KernelSpec> = Vec::new();
    for &c in &[0.0, 1.0] {
        for &degree in &[1u32, 2, 3] {
            specs.push(KernelSpec::LogEPoly { c, degree });
        }
    }
    let sigmas: Vec<f64> = (0..10)
        .map(|k| 10f64.powf(-1.0 + 2.0 * k as f64 / 9.0))
        .collect();
    for &sigma in &sigmas {
        for &p in &[0.5, 1.0, 2.0] {
            specs.push(KernelSpec::LogEExp { sigma, p });
        }
    }
    let mut grams = 0usize;
    for _ in 0..200 {
        let dim = rng.gen_range(2..=5usize);
        let m = rng.gen_range(2..=25usize);
        let points: Vec<Point> = (0..m).map(|_| Point::Spd(random_spd(dim, &mut rng))).collect();
        for spec in &specs {
            let g = gram(spec, &points).unwrap();
            let eigs = sym_eig(&SymMatrix::symmetrize(g.entries().clone())).eigenvalues;
            let spectral = eigs.iter().fold(0.0f64, |acc, &l| acc.max(l.abs()));
            assert!(
                eigs[0] >= -1e-9 * spectral.max(1.0),
                "{spec:?} produced min eigenvalue {} at spectral norm {spectral}",
                eigs[0]
            );
            grams += 1;
        }
    }
    println!("PASS criterion 3: {grams} log-Euclidean polynomial/exponential Grams all PSD within -1e-9 relative");
}

#[test]
fn criterion_04_stein_kernel_both_directions() {
    let mut rng = rng_from_seed(104);
    // the "if" direction: admissible sigmas stay PSD
    for &sigma in &[0.5, 1.0, 1.6] {
        let spec = KernelSpec::Stein { sigma };
        let mut violations = 0usize;
        for trial in 0..200 {
            let points: Vec<Point> = if trial % 10 == 9 {
                // include large log-uniform clouds, the regime that exposes
                // the non-admissible sigmas
                geoml::kernel::spd_log_uniform_cloud(3, 120, 2.0, &mut rng)
            } else {
                let m = rng.gen_range(4..=25usize);
                (0..m).map(|_| Point::Spd(random_spd(3, &mut rng))).collect()
            };
            let g = gram(&spec, &points).unwrap();
            if min_eigenvalue(&g) < -1e-8 {
                violations += 1;
            }
        }
        assert_eq!(violations, 0, "sigma {sigma} produced PSD violations");
    }

    // the "only if" direction at sigma = 0.75: a witness must exist
    let spec = KernelSpec::Stein { sigma: 0.75 };
    let budget = 100_000;
    let witness = match nonpd_witness_search(&spec, spd_witness_sampler(3), budget, &mut rng)
        .unwrap()
    {
        Some(w) => w,
        None => {
            println!("criterion 4: inconclusive-fail at budget {budget}, doubling once");
            nonpd_witness_search(&spec, spd_witness_sampler(3), 2 * budget, &mut rng)
                .unwrap()
                .expect("no witness within the doubled budget")
        }
    };
    assert!(
        witness.min_eigenvalue < -1e-8,
        "witness eigenvalue {} too mild",
        witness.min_eigenvalue
    );
    println!(
        "PASS criterion 4: admissible sigmas PSD over 600 Grams; sigma=0.75 witness at trial {} with min eigenvalue {:.3e}",
        witness.trial, witness.min_eigenvalue
    );
}

/// Independent decomposition-formula oracle for the linear kernel: ambient
/// d x d covariances, log(C/γ + I) directly, plus the scalar term.
fn linear_oracle(pair: &RegularizedCovariancePair) -> f64 {
    let centering = |m: usize| {
        DMatrix::identity(m, m) - DMatrix::from_element(m, m, 1.0 / m as f64)
    };
    let cov = |x: &DMatrix<f64>| x * centering(x.ncols()) * x.transpose() / x.ncols() as f64;
    let log_reg = |c: &DMatrix<f64>, gamma: f64| {
        sym_eig(&SymMatrix::symmetrize(c / gamma)).apply(|l| l.max(0.0).ln_1p())
    };
    let m1 = log_reg(&cov(&pair.data1), pair.gamma1);
    let m2 = log_reg(&cov(&pair.data2), pair.gamma2);
    m1.sub(&m2).unwrap().frobenius_norm().powi(2) + (pair.gamma1 / pair.gamma2).ln().powi(2)
}

#[test]
fn criterion_05_loghs_closed_form_vs_oracle() {
    let mut rng = rng_from_seed(105);
    for _ in 0..100 {
        let m1 = rng.gen_range(1..=10usize);
        let m2 = rng.gen_range(1..=10usize);
        let d = m1 + m2 + 4;
        let pair = RegularizedCovariancePair::new(
            gaussian_matrix(d, m1, &mut rng),
            gaussian_matrix(d, m2, &mut rng),
            rng.gen_range(0.1..3.0),
            rng.gen_range(0.1..3.0),
            KernelSpec::Linear,
        )
        .unwrap();
        let via_gram = loghs_cov_distance_squared(&pair).unwrap();
        let via_oracle = linear_oracle(&pair);
        assert!(
            (via_gram - via_oracle).abs() <= 1e-8 * via_oracle.max(1.0),
            "gram {via_gram} vs oracle {via_oracle}"
        );
    }
    println!("PASS criterion 5: Gram closed form matches the ambient decomposition oracle within 1e-8 relative on 100 pairs");
}

#[test]
fn criterion_06_scalar_operator_identity() {
    let mut rng = rng_from_seed(106);
    let one1 = DMatrix::from_column_slice(2, 1, &[1.0, 2.0]);
    let one2 = DMatrix::from_column_slice(2, 1, &[-0.5, 0.25]);
    for _ in 0..20 {
        let g1: f64 = rng.gen_range(0.02..8.0);
        let g2: f64 = rng.gen_range(0.02..8.0);
        let pair = RegularizedCovariancePair::new(
            one1.clone(),
            one2.clone(),
            g1,
            g2,
            KernelSpec::EuclideanGaussian { sigma: 1.0 },
        )
        .unwrap();
        let d = loghs_cov_distance(&pair).unwrap();
        assert!(
            (d - (g1 / g2).ln().abs()).abs() <= 1e-12,
            "scalar identity off: {d} vs {}",
            (g1 / g2).ln().abs()
        );
    }
    println!("PASS criterion 6: single-observation covariances reproduce |log(gamma1/gamma2)| within 1e-12 on 20 draws");
}

#[test]
fn criterion_07_concentration_bound_monte_carlo() {
    let mut rng = rng_from_seed(107);
    let support: Vec<Vec<f64>> = (0..5)
        .map(|k| vec![k as f64 * 0.8, (k * k) as f64 * 0.15])
        .collect();
    let probs = vec![0.2; 5];
    let report = concentration_montecarlo(
        &KernelSpec::EuclideanGaussian { sigma: 1.0 },
        &support,
        &probs,
        100,
        0.1,
        2000,
        50,
        &mut rng,
    )
    .unwrap();
    assert!(
        report.failure_rate <= 0.105,
        "failure rate {} above 0.105 (bound {})",
        report.failure_rate,
        report.bound
    );
    println!(
        "PASS criterion 7: empirical failure rate {:.4} <= 0.105 against the bound {:.4} over 2000 trials",
        report.failure_rate, report.bound
    );
}

#[test]
fn criterion_08_disintegration_and_correct_loss() {
    let mut rng = rng_from_seed(108);
    // round trip on up to 6x6 joints
    for _ in 0..500 {
        let p = rng.gen_range(1..=6usize);
        let q = rng.gen_range(1..=6usize);
        let x = FiniteSpace::indexed("x", p);
        let y = FiniteSpace::indexed("y", q);
        let mu = random_joint(&x, &y, &mut rng);
        let (marg, kernel) = disintegrate(&mu);
        let back = graph_pushforward(&kernel, &marg).unwrap();
        assert!(
            (back.table() - mu.table()).abs().max() <= 1e-12,
            "round trip drift {}",
            (back.table() - mu.table()).abs().max()
        );
    }

    // loss characterization with 0.1-bumps on 3x3 grids
    let spec = KernelSpec::EuclideanGaussian { sigma: 1.0 };
    let embed = ProductEmbedding::simplex(3, 3);
    let x = FiniteSpace::indexed("x", 3);
    let y = FiniteSpace::indexed("y", 3);
    let mut perturbations = 0usize;
    for _ in 0..50 {
        let mu = random_joint(&x, &y, &mut rng);
        let (marg, cond) = disintegrate(&mu);
        let at_cond = correct_loss(&spec, &cond, &mu, &embed).unwrap();
        assert!(at_cond <= 1e-12, "loss at the disintegration {at_cond}");

        for i in 0..3 {
            if marg.weights()[i] <= 0.0 {
                continue;
            }
            for j in 0..3 {
                for j2 in 0..3 {
                    if j == j2 || cond.rows()[(i, j2)] < 0.1 {
                        continue;
                    }
                    let mut rows: Vec<Vec<f64>> = (0..3).map(|r| cond.row(r)).collect();
                    rows[i][j] += 0.1;
                    rows[i][j2] -= 0.1;
                    let bumped = MarkovKernel::new(x.clone(), y.clone(), rows).unwrap();
                    let loss = correct_loss(&spec, &bumped, &mu, &embed).unwrap();
                    assert!(loss > 1e-6, "0.1-bump produced loss {loss}");
                    perturbations += 1;
                }
            }
        }
    }
    assert!(perturbations > 100, "too few valid perturbations exercised");
    println!("PASS criterion 8: 500 round trips within 1e-12; loss zero at disintegrations and > 1e-6 under {perturbations} 0.1-bumps");
}

#[test]
fn criterion_09_alpha_logdet_family() {
    let mut rng = rng_from_seed(109);
    for _ in 0..1000 {
        let dim = rng.gen_range(1..=6usize);
        let a = random_spd(dim, &mut rng);
        let b = random_spd(dim, &mut rng);
        let alpha = AlphaParam::new(rng.gen_range(-1.0..=1.0)).unwrap();
        let residual = check_dual_symmetry(alpha, &a, &b).unwrap();
        assert!(residual <= 1e-10, "dual symmetry residual {residual}");

        let at_limit = alpha_logdet(AlphaParam::new(1.0).unwrap(), &a, &b).unwrap();
        let near_limit = alpha_logdet(AlphaParam::new(1.0 - 1e-4).unwrap(), &a, &b).unwrap();
        assert!(
            (near_limit - at_limit).abs() <= 1e-3 * (1.0 + at_limit.abs()),
            "limit discontinuity {} vs {}",
            near_limit,
            at_limit
        );

        // Fan's inequality: det((A+B)/2) >= sqrt(det A det B)
        let mix = SymMatrix::symmetrize((a.as_matrix() + b.as_matrix()) * 0.5);
        let mix_logdet: f64 = sym_eig(&mix).eigenvalues.iter().map(|l| l.ln()).sum();
        assert!(
            mix_logdet >= 0.5 * (a.log_det() + b.log_det()) - 1e-10,
            "Fan inequality violated"
        );
    }
    println!("PASS criterion 9: dual symmetry <= 1e-10, limit continuity <= 1e-3 and Fan's inequality on 1000 cases");
}

#[test]
fn criterion_10_pointcloud_laplacian_convergence() {
    let rows = convergence_sweep(
        ManifoldId::Circle,
        EigenfunctionId::FirstHarmonic,
        &[1.0, 0.0],
        &[500, 2000, 8000],
        20,
        1.0,
        110,
    )
    .unwrap();
    for pair in rows.windows(2) {
        assert!(
            pair[1].median_rel_error <= pair[0].median_rel_error,
            "median error increased: {} -> {}",
            pair[0].median_rel_error,
            pair[1].median_rel_error
        );
    }
    let last = rows.last().unwrap();
    assert!(
        last.median_rel_error <= 0.15,
        "median error {} above 0.15 at m=8000",
        last.median_rel_error
    );
    println!(
        "PASS criterion 10: circle medians non-increasing ({:.4} -> {:.4} -> {:.4}) and <= 0.15 at m=8000",
        rows[0].median_rel_error, rows[1].median_rel_error, rows[2].median_rel_error
    );
}

#[test]
fn criterion_11_erm_learning_curve() {
    let ctx = ErmContext::new(
        GridModel::uniform(5, 5).unwrap(),
        KernelSpec::euclidean_gaussian_from_gamma(1.0).unwrap(),
    )
    .unwrap();
    let mu = smooth_true_joint(ctx.model()).unwrap();
    let sizes = [50usize, 200, 800];
    let schedule = Schedule::power(&sizes, 1.0 / 3.0).unwrap();
    let mut monotone = 0usize;
    let reps = 5usize;
    let mut curves = Vec::new();
    for rep in 0..reps {
        let rows = learning_curve(&ctx, &mu, &sizes, &schedule, 10, 10_000, 111 + rep as u64)
            .unwrap();
        let medians: Vec<f64> = rows.iter().map(|r| r.median_dm).collect();
        if medians.windows(2).all(|w| w[1] <= w[0]) {
            monotone += 1;
        }
        curves.push(medians);
    }
    assert!(
        monotone >= 4,
        "only {monotone} of {reps} repetitions were non-increasing: {curves:?}"
    );
    println!(
        "PASS criterion 11: {monotone} of {reps} learning-curve repetitions non-increasing across sizes (50, 200, 800)"
    );
}

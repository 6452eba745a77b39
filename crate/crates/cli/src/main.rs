//! Command-line front end: SPD distances and geodesics, log-det divergences,
//! kernel Gram and definiteness tooling, MMD and covariance-operator
//! distances, Markov kernel operations, Laplacian convergence experiments,
//! the regularized ERM learning curve, and a fast self test.
//!
//! All randomness is ChaCha8 seeded from `--seed` (default 0); outputs are
//! CSV with LF endings and carry the seed in a header comment.

mod selftest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use geoml::divergence::{alpha_logdet, AlphaParam};
use geoml::erm::{
    learning_curve, smooth_true_joint, ErmContext, GridModel, Schedule,
};
use geoml::io;
use geoml::kernel::{
    self, gram, is_psd, min_eigenvalue, negdef_check, nonpd_witness_search, spd_witness_sampler,
    KernelSpec, Point,
};
use geoml::laplacian::{convergence_sweep, EigenfunctionId, ManifoldId};
use geoml::markov::{compose, disintegrate, pushforward, verify_conditional};
use geoml::rkhs::{loghs_cov_distance, mmd, two_layer_distance_matrix, two_layer_kernel,
    RegularizedCovariancePair, Sample};
use geoml::sampling::{rng_from_seed, GENERATOR_NAME};
use geoml::spd::{distance, geodesic, metric, GeodesicQuery, MetricKind};
use geoml::{GeomError, Result};

#[derive(Parser)]
#[command(
    name = "geoml",
    about = "Geometric machine-learning toolkit: SPD-manifold metrics, positive definite kernels, RKHS covariance distances, Markov kernel calculus, point-cloud Laplacians, regularized ERM",
    version
)]
struct Cli {
    /// Seed for the ChaCha8 generator behind every randomized subcommand.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Riemannian operations on SPD matrices.
    Spd {
        #[command(subcommand)]
        command: SpdCommand,
    },
    /// Divergences on the SPD cone.
    Div {
        #[command(subcommand)]
        command: DivCommand,
    },
    /// Kernel Gram matrices and definiteness checks.
    Kernel {
        #[command(subcommand)]
        command: KernelCommand,
    },
    /// Maximum mean discrepancy between two datasets (columns = points):
    /// the RKHS distance between their mean embeddings.
    Mmd {
        #[command(flatten)]
        kernel: KernelArgs,
        data1: PathBuf,
        data2: PathBuf,
    },
    /// Log-Hilbert-Schmidt distance between regularized RKHS covariance
    /// operators of two datasets, via the closed Gram-matrix form.
    Covdist {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long)]
        gamma1: f64,
        #[arg(long)]
        gamma2: f64,
        data1: PathBuf,
        data2: PathBuf,
    },
    /// Two-layer kernel machine: pairwise Log-HS distances between datasets
    /// and the Gaussian kernel exp(-d²/σ₂²) built on them.
    Twolayer {
        #[command(flatten)]
        kernel: KernelArgs,
        /// Tikhonov scale shared by all covariance operators.
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        /// Bandwidth of the second-layer Gaussian kernel.
        #[arg(long)]
        sigma2: f64,
        /// Dataset CSV files (two or more).
        datasets: Vec<PathBuf>,
        #[arg(long)]
        out_dist: Option<PathBuf>,
        #[arg(long)]
        out_kernel: Option<PathBuf>,
    },
    /// Finite-space Markov kernel operations.
    Markov {
        #[command(subcommand)]
        command: MarkovCommand,
    },
    /// Point-cloud Laplacian experiments.
    Laplacian {
        #[command(subcommand)]
        command: LaplacianCommand,
    },
    /// Regularized empirical risk minimization experiments.
    Erm {
        #[command(subcommand)]
        command: ErmCommand,
    },
    /// Fast subset of the acceptance properties; prints one pass/fail line
    /// per property.
    Selftest {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SpdCommand {
    /// Distance between two SPD matrices: affine-invariant
    /// ‖log(A^{-1/2}BA^{-1/2})‖_F, Bures-Wasserstein
    /// sqrt(tr A + tr B - 2 tr(A^{1/2}BA^{1/2})^{1/2}), or log-Euclidean
    /// ‖log A - log B‖_F.
    Dist {
        /// ai | bw | loge
        #[arg(long)]
        metric: String,
        a: PathBuf,
        b: PathBuf,
    },
    /// Geodesic point γ(t) between two SPD matrices under the chosen metric.
    Geodesic {
        #[arg(long)]
        metric: String,
        #[arg(long)]
        t: f64,
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Metric tensor value g(P)(U, V) for tangent directions U, V at P.
    Metric {
        #[arg(long)]
        metric: String,
        p: PathBuf,
        u: PathBuf,
        v: PathBuf,
    },
}

#[derive(Subcommand)]
enum DivCommand {
    /// Alpha log-det divergence
    /// 4/(1-α²) log[det((1-α)/2 A + (1+α)/2 B)/(det A^{(1-α)/2} det B^{(1+α)/2})]
    /// with its Bregman limits at α = ±1.
    Logdet {
        #[arg(long)]
        alpha: f64,
        a: PathBuf,
        b: PathBuf,
    },
}

#[derive(Args, Clone)]
struct KernelArgs {
    /// loge-exp | loge-poly | stein | gauss-ai | gauss-bw | gauss-loge |
    /// euclidean-gaussian | linear
    #[arg(long)]
    kernel: String,
    /// Bandwidth for the exponential kernels (exp(-d^p/σ²)).
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Distance exponent p in (0, 2].
    #[arg(long, default_value_t = 2.0)]
    p_exp: f64,
    /// Offset of the log-Euclidean polynomial kernel (⟨log A, log B⟩ + c)^d.
    #[arg(long, default_value_t = 0.0)]
    c: f64,
    /// Degree of the log-Euclidean polynomial kernel.
    #[arg(long, default_value_t = 1)]
    degree: u32,
}

impl KernelArgs {
    fn spec(&self) -> Result<KernelSpec> {
        let spec = match self.kernel.as_str() {
            "loge-exp" => KernelSpec::LogEExp {
                sigma: self.sigma,
                p: self.p_exp,
            },
            "loge-poly" => KernelSpec::LogEPoly {
                c: self.c,
                degree: self.degree,
            },
            "stein" => KernelSpec::Stein { sigma: self.sigma },
            "gauss-ai" => KernelSpec::GaussianMetric {
                metric: MetricKind::AffineInvariant,
                sigma: self.sigma,
                p: self.p_exp,
            },
            "gauss-bw" => KernelSpec::GaussianMetric {
                metric: MetricKind::BuresWasserstein,
                sigma: self.sigma,
                p: self.p_exp,
            },
            "gauss-loge" => KernelSpec::GaussianMetric {
                metric: MetricKind::LogEuclidean,
                sigma: self.sigma,
                p: self.p_exp,
            },
            "euclidean-gaussian" => KernelSpec::EuclideanGaussian { sigma: self.sigma },
            "linear" => KernelSpec::Linear,
            other => {
                return Err(GeomError::validation(format!(
                    "unknown kernel {other:?}"
                )))
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Subcommand)]
enum KernelCommand {
    /// Pairwise kernel matrix over SPD matrix files or a vector dataset.
    Gram {
        #[command(flatten)]
        kernel: KernelArgs,
        /// SPD matrix CSV files (for SPD-domain kernels).
        files: Vec<PathBuf>,
        /// Vector dataset CSV (columns = points) for vector-domain kernels.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimum Gram eigenvalue and a positive semidefiniteness verdict.
    PsdCheck {
        #[command(flatten)]
        kernel: KernelArgs,
        files: Vec<PathBuf>,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Randomized search for a point set whose Stein-kernel Gram matrix has
    /// a negative eigenvalue; the kernel is positive definite exactly for
    /// σ in {1/2, 1, …, (n-1)/2} or σ > (n-1)/2.
    SteinWitness {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Worst violation of negative definiteness of a squared distance (or
    /// the symmetric Stein divergence) over zero-sum coefficients.
    Negdef {
        /// euclid2 | loge2 | ai2 | bw2 | stein
        #[arg(long)]
        phi: String,
        files: Vec<PathBuf>,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

#[derive(Subcommand)]
enum MarkovCommand {
    /// Kernel composition (row-stochastic matrix product).
    Compose {
        t1: PathBuf,
        t2: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pushforward of a probability vector through a kernel.
    Push {
        kernel: PathBuf,
        vector: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Disintegration of a joint measure into its X-marginal and regular
    /// conditional kernel (uniform rows where the marginal vanishes).
    Disintegrate {
        joint: PathBuf,
        #[arg(long)]
        out_kernel: Option<PathBuf>,
        #[arg(long)]
        out_marginal: Option<PathBuf>,
    },
    /// Checks whether a kernel is a regular conditional probability measure
    /// for a joint: the graph pushforward of the marginal must reproduce it.
    Verify {
        kernel: PathBuf,
        joint: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

#[derive(Subcommand)]
enum LaplacianCommand {
    /// Convergence of the normalized point-cloud Laplacian (bandwidth
    /// t_m = m^{-1/(n+2+α)}) toward (Δ_g f)/vol on a model manifold;
    /// emits per-size median relative errors over the seeds.
    Converge {
        /// circle | sphere | torus
        #[arg(long, default_value = "circle")]
        manifold: String,
        /// constant | first
        #[arg(long, default_value = "first")]
        eigenfunction: String,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Comma-separated sample sizes.
        #[arg(long, default_value = "500,2000,8000")]
        sizes: String,
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ErmCommand {
    /// Learning curve of the regularized empirical risk minimizer: median
    /// d_M distance to the true conditional across sample sizes, with
    /// γ_n = n^{-gamma-exp} and slack γ_n².
    Run {
        /// Grid shape, e.g. 5x5.
        #[arg(long, default_value = "5x5")]
        grid: String,
        #[arg(long, default_value = "50,200,800")]
        sizes: String,
        #[arg(long, default_value_t = 10)]
        seeds: usize,
        #[arg(long, default_value_t = 0.333)]
        gamma_exp: f64,
        /// Optimizer budget in risk evaluations per fit.
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        /// Ambient Gaussian kernel weight (exp(-γ‖z-z'‖²)) for the grid norms.
        #[arg(long, default_value_t = 1.0)]
        kernel_gamma: f64,
        /// True joint measure CSV; defaults to a built-in smooth conditional.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| GeomError::validation(format!("cannot read {}: {e}", path.display())))
}

fn write_out(path: &Path, header: &str, body: &str, seed: u64) -> Result<()> {
    let content = format!("# geoml {header} seed={seed} rng={GENERATOR_NAME}\n{body}");
    std::fs::write(path, content)
        .map_err(|e| GeomError::validation(format!("cannot write {}: {e}", path.display())))
}

fn parse_sizes(text: &str) -> Result<Vec<usize>> {
    let sizes: Vec<usize> = text
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| GeomError::validation(format!("bad size {tok:?}")))
        })
        .collect::<Result<_>>()?;
    if sizes.is_empty() {
        return Err(GeomError::validation("no sizes given"));
    }
    Ok(sizes)
}

fn load_points(
    spec: &KernelSpec,
    files: &[PathBuf],
    data: &Option<PathBuf>,
) -> Result<Vec<Point>> {
    match spec.domain() {
        kernel::PointKind::Spd => {
            if files.is_empty() {
                return Err(GeomError::validation(
                    "SPD-domain kernels need matrix CSV files",
                ));
            }
            files
                .iter()
                .map(|f| Ok(Point::Spd(io::read_spd_matrix(&read(f)?)?)))
                .collect()
        }
        kernel::PointKind::Vector => {
            let path = data.as_ref().ok_or_else(|| {
                GeomError::validation("vector-domain kernels need --data dataset.csv")
            })?;
            let m = io::read_matrix(&read(path)?)?;
            Ok((0..m.ncols())
                .map(|j| Point::Vector(m.column(j).iter().copied().collect()))
                .collect())
        }
    }
}

fn dataset_sample(path: &Path) -> Result<Sample> {
    let m = io::read_matrix(&read(path)?)?;
    Sample::new(
        (0..m.ncols())
            .map(|j| m.column(j).iter().copied().collect())
            .collect(),
    )
}

fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed;
    match cli.command {
        Command::Spd { command } => match command {
            SpdCommand::Dist { metric, a, b } => {
                let kind = MetricKind::parse(&metric)?;
                let ma = io::read_spd_matrix(&read(&a)?)?;
                let mb = io::read_spd_matrix(&read(&b)?)?;
                println!("{}", distance(kind, &ma, &mb)?);
            }
            SpdCommand::Geodesic { metric, t, a, b, out } => {
                let kind = MetricKind::parse(&metric)?;
                let ma = io::read_spd_matrix(&read(&a)?)?;
                let mb = io::read_spd_matrix(&read(&b)?)?;
                let g = geodesic(kind, &GeodesicQuery::new(ma, mb, t)?)?;
                let body = io::write_sym_matrix(g.sym());
                match out {
                    Some(path) => write_out(&path, &format!("spd geodesic metric={metric} t={t}"), &body, seed)?,
                    None => print!("{body}"),
                }
            }
            SpdCommand::Metric { metric: name, p, u, v } => {
                let kind = MetricKind::parse(&name)?;
                let mp = io::read_spd_matrix(&read(&p)?)?;
                let mu = io::read_sym_matrix(&read(&u)?)?;
                let mv = io::read_sym_matrix(&read(&v)?)?;
                println!("{}", metric(kind, &mp, &mu, &mv)?);
            }
        },
        Command::Div { command } => match command {
            DivCommand::Logdet { alpha, a, b } => {
                let ma = io::read_spd_matrix(&read(&a)?)?;
                let mb = io::read_spd_matrix(&read(&b)?)?;
                println!("{}", alpha_logdet(AlphaParam::new(alpha)?, &ma, &mb)?);
            }
        },
        Command::Kernel { command } => match command {
            KernelCommand::Gram { kernel, files, data, out } => {
                let spec = kernel.spec()?;
                let points = load_points(&spec, &files, &data)?;
                let g = gram(&spec, &points)?;
                let body = io::write_matrix(g.entries());
                match out {
                    Some(path) => write_out(&path, "kernel gram", &body, seed)?,
                    None => print!("{body}"),
                }
            }
            KernelCommand::PsdCheck { kernel, files, data, tol } => {
                let spec = kernel.spec()?;
                let points = load_points(&spec, &files, &data)?;
                let g = gram(&spec, &points)?;
                let min = min_eigenvalue(&g);
                println!("min_eigenvalue={min}");
                println!("psd={}", is_psd(&g, tol));
            }
            KernelCommand::SteinWitness { n, sigma, budget, out } => {
                let spec = KernelSpec::Stein { sigma };
                let admissible = kernel::stein_admissible(n, sigma)?;
                println!("admissible={admissible}");
                let mut rng = rng_from_seed(seed);
                let sampler = spd_witness_sampler(n);
                match nonpd_witness_search(&spec, sampler, budget, &mut rng)? {
                    Some(w) => {
                        println!(
                            "witness trial={} points={} min_eigenvalue={}",
                            w.trial,
                            w.points.len(),
                            w.min_eigenvalue
                        );
                        if let Some(path) = out {
                            let mut body = format!(
                                "# witness trial={} points={} min_eigenvalue={}\n",
                                w.trial,
                                w.points.len(),
                                w.min_eigenvalue
                            );
                            for (k, p) in w.points.iter().enumerate() {
                                if let Point::Spd(m) = p {
                                    body.push_str(&format!("# point {k}\n"));
                                    body.push_str(&io::write_sym_matrix(m.sym()));
                                }
                            }
                            write_out(&path, &format!("kernel stein-witness n={n} sigma={sigma}"), &body, seed)?;
                        }
                    }
                    None => println!("none within budget"),
                }
            }
            KernelCommand::Negdef { phi, files, data, trials } => {
                // squared-distance functions are probed on SPD files; the
                // Euclidean one on a vector dataset
                let mut rng = rng_from_seed(seed);
                let worst = match phi.as_str() {
                    "euclid2" => {
                        let spec = KernelSpec::Linear;
                        let points = load_points(&spec, &files, &data)?;
                        negdef_check(
                            |a, b| {
                                let (Point::Vector(x), Point::Vector(y)) = (a, b) else {
                                    return Err(GeomError::validation("expected vectors"));
                                };
                                Ok(x.iter()
                                    .zip(y.iter())
                                    .map(|(u, v)| (u - v) * (u - v))
                                    .sum())
                            },
                            &points,
                            trials,
                            &mut rng,
                        )?
                    }
                    "loge2" | "ai2" | "bw2" => {
                        let kind = MetricKind::parse(&phi[..phi.len() - 1])?;
                        let spec = KernelSpec::Stein { sigma: 1.0 }; // any SPD-domain spec for loading
                        let points = load_points(&spec, &files, &data)?;
                        negdef_check(
                            move |a, b| {
                                let (Point::Spd(x), Point::Spd(y)) = (a, b) else {
                                    return Err(GeomError::validation("expected SPD points"));
                                };
                                let d = distance(kind, x, y)?;
                                Ok(d * d)
                            },
                            &points,
                            trials,
                            &mut rng,
                        )?
                    }
                    "stein" => {
                        let spec = KernelSpec::Stein { sigma: 1.0 };
                        let points = load_points(&spec, &files, &data)?;
                        negdef_check(kernel::symmetric_stein_divergence, &points, trials, &mut rng)?
                    }
                    other => {
                        return Err(GeomError::validation(format!(
                            "unknown phi {other:?}, expected euclid2|loge2|ai2|bw2|stein"
                        )))
                    }
                };
                println!("worst_violation={worst}");
            }
        },
        Command::Mmd { kernel, data1, data2 } => {
            let spec = kernel.spec()?;
            let s1 = dataset_sample(&data1)?;
            let s2 = dataset_sample(&data2)?;
            println!("{}", mmd(&spec, &s1, &s2)?);
        }
        Command::Covdist { kernel, gamma1, gamma2, data1, data2 } => {
            let spec = kernel.spec()?;
            let d1 = io::read_matrix(&read(&data1)?)?;
            let d2 = io::read_matrix(&read(&data2)?)?;
            let pair = RegularizedCovariancePair::new(d1, d2, gamma1, gamma2, spec)?;
            println!("{}", loghs_cov_distance(&pair)?);
        }
        Command::Twolayer { kernel, gamma, sigma2, datasets, out_dist, out_kernel } => {
            let spec = kernel.spec()?;
            let data: Vec<nalgebra::DMatrix<f64>> = datasets
                .iter()
                .map(|p| io::read_matrix(&read(p)?))
                .collect::<Result<_>>()?;
            let d = two_layer_distance_matrix(&data, &spec, gamma)?;
            let k2 = two_layer_kernel(&data, &spec, gamma, sigma2)?;
            let dist_body = io::write_matrix(&d);
            let kernel_body = io::write_matrix(&k2);
            match out_dist {
                Some(path) => write_out(&path, "twolayer distances", &dist_body, seed)?,
                None => print!("{dist_body}"),
            }
            match out_kernel {
                Some(path) => write_out(&path, &format!("twolayer kernel sigma2={sigma2}"), &kernel_body, seed)?,
                None => print!("{kernel_body}"),
            }
        }
        Command::Markov { command } => match command {
            MarkovCommand::Compose { t1, t2, out } => {
                let k1 = io::read_kernel(&read(&t1)?)?;
                let k2 = io::read_kernel(&read(&t2)?)?;
                let composed = compose(&k1, &k2)?;
                let body = io::write_kernel(&composed);
                match out {
                    Some(path) => write_out(&path, "markov compose", &body, seed)?,
                    None => print!("{body}"),
                }
            }
            MarkovCommand::Push { kernel, vector, out } => {
                let k = io::read_kernel(&read(&kernel)?)?;
                let v = io::read_prob_vector(&read(&vector)?)?;
                let pushed = pushforward(&k, &v.to_signed())?;
                let prob = geoml::markov::ProbVector::new(
                    k.target().clone(),
                    pushed.weights().to_vec(),
                )?;
                let body = io::write_prob_vector(&prob);
                match out {
                    Some(path) => write_out(&path, "markov push", &body, seed)?,
                    None => print!("{body}"),
                }
            }
            MarkovCommand::Disintegrate { joint, out_kernel, out_marginal } => {
                let mu = io::read_joint(&read(&joint)?)?;
                let (marginal, kernel) = disintegrate(&mu);
                let kernel_body = io::write_kernel(&kernel);
                let marginal_body = io::write_prob_vector(&marginal);
                match out_kernel {
                    Some(path) => write_out(&path, "markov disintegrate kernel", &kernel_body, seed)?,
                    None => print!("{kernel_body}"),
                }
                match out_marginal {
                    Some(path) => write_out(&path, "markov disintegrate marginal", &marginal_body, seed)?,
                    None => print!("{marginal_body}"),
                }
            }
            MarkovCommand::Verify { kernel, joint, tol } => {
                let k = io::read_kernel(&read(&kernel)?)?;
                let mu = io::read_joint(&read(&joint)?)?;
                println!("{}", verify_conditional(&k, &mu, tol)?);
            }
        },
        Command::Laplacian { command } => match command {
            LaplacianCommand::Converge { manifold, eigenfunction, alpha, sizes, seeds, out } => {
                let manifold = ManifoldId::parse(&manifold)?;
                let eigen = EigenfunctionId::parse(&eigenfunction)?;
                let sizes = parse_sizes(&sizes)?;
                let p = manifold.base_point();
                let rows = convergence_sweep(manifold, eigen, &p, &sizes, seeds, alpha, seed)?;
                let mut body = String::from("m,t,median_rel_error\n");
                for row in &rows {
                    body.push_str(&format!("{},{},{}\n", row.size, row.t, row.median_rel_error));
                }
                match out {
                    Some(path) => write_out(&path, "laplacian converge", &body, seed)?,
                    None => print!("{body}"),
                }
            }
        },
        Command::Erm { command } => match command {
            ErmCommand::Run { grid, sizes, seeds, gamma_exp, budget, kernel_gamma, truth, out } => {
                let (p, q) = grid
                    .split_once('x')
                    .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
                    .ok_or_else(|| GeomError::validation(format!("bad grid {grid:?}, expected PxQ")))?;
                let model = GridModel::uniform(p, q)?;
                let spec = KernelSpec::euclidean_gaussian_from_gamma(kernel_gamma)?;
                let ctx = ErmContext::new(model, spec)?;
                let mu = match truth {
                    Some(path) => {
                        let loaded = io::read_joint(&read(&path)?)?;
                        if loaded.xspace().size() != p || loaded.yspace().size() != q {
                            return Err(GeomError::dims(
                                format!("{p}x{q} joint"),
                                format!(
                                    "{}x{}",
                                    loaded.xspace().size(),
                                    loaded.yspace().size()
                                ),
                            ));
                        }
                        loaded
                    }
                    None => smooth_true_joint(ctx.model())?,
                };
                let sizes = parse_sizes(&sizes)?;
                let schedule = Schedule::power(&sizes, gamma_exp)?;
                let rows = learning_curve(&ctx, &mu, &sizes, &schedule, seeds, budget, seed)?;
                let mut body = String::from("n,gamma,slack,median_dm\n");
                for row in &rows {
                    body.push_str(&format!(
                        "{},{},{},{}\n",
                        row.size, row.gamma, row.slack, row.median_dm
                    ));
                }
                match out {
                    Some(path) => write_out(&path, "erm run", &body, seed)?,
                    None => print!("{body}"),
                }
            }
        },
        Command::Selftest { out } => {
            let results = selftest::run(seed)?;
            let mut body = String::from("property,pass\n");
            let mut all_pass = true;
            for r in &results {
                println!("{} {}", if r.pass { "PASS" } else { "FAIL" }, r.name);
                body.push_str(&format!("{},{}\n", r.name, r.pass));
                all_pass &= r.pass;
            }
            if let Some(path) = out {
                write_out(&path, "selftest", &body, seed)?;
            }
            if !all_pass {
                return Err(GeomError::numerical("selftest found failing properties"));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("GEO_THREADS") {
        if let Ok(n) = threads.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                GeomError::Validation(_) | GeomError::DimensionMismatch { .. } => {
                    ExitCode::from(1)
                }
                GeomError::Domain(_) | GeomError::Numerical(_) => ExitCode::from(2),
            }
        }
    }
}

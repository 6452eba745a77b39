//! Kernel mean embeddings and what they buy: MMD between weighted samples,
//! the finite-sample concentration bound with its Monte Carlo harness, the
//! correct loss for conditional probability estimation on finite spaces, and
//! the closed-form Log-Hilbert-Schmidt distance between regularized RKHS
//! covariance operators via Gram matrices.

use nalgebra::DMatrix;

use crate::error::{GeomError, Result};
use crate::kernel::{eval_vectors, KernelSpec};
use crate::markov::{graph_pushforward, marginal_x, verify_conditional, JointMeasure, MarkovKernel};
use crate::matfun::{sym_eig, SymMatrix};
use crate::sampling::Generator;
use rand::Rng;

/// A weighted sample of ambient vectors. Weights default to uniform; the
/// plug-in embedding of the sample is Σ w_i K_{x_i}.
#[derive(Debug, Clone)]
pub struct Sample {
    points: Vec<Vec<f64>>,
    weights: Option<Vec<f64>>,
}

impl Sample {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(GeomError::validation("empty sample"));
        }
        let d = points[0].len();
        if points.iter().any(|p| p.len() != d) {
            return Err(GeomError::validation("sample points have mixed dimensions"));
        }
        Ok(Self {
            points,
            weights: None,
        })
    }

    pub fn weighted(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        let mut s = Self::new(points)?;
        if weights.len() != s.points.len() {
            return Err(GeomError::dims(
                format!("{} weights", s.points.len()),
                format!("{}", weights.len()),
            ));
        }
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(GeomError::validation("negative or non-finite weight"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(GeomError::validation(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        s.weights = Some(weights);
        Ok(s)
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weight(&self, i: usize) -> f64 {
        match &self.weights {
            Some(w) => w[i],
            None => 1.0 / self.points.len() as f64,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Maximum mean discrepancy between the plug-in embeddings of two weighted
/// samples: the V-statistic form
/// sqrt(Σ w_i w_j k(x_i,x_j) - 2 Σ w_i v_j k(x_i,y_j) + Σ v_i v_j k(y_i,y_j)).
pub fn mmd(spec: &KernelSpec, s1: &Sample, s2: &Sample) -> Result<f64> {
    let mut k11 = 0.0;
    for i in 0..s1.len() {
        for j in 0..s1.len() {
            k11 += s1.weight(i) * s1.weight(j) * eval_vectors(spec, &s1.points[i], &s1.points[j])?;
        }
    }
    let mut k22 = 0.0;
    for i in 0..s2.len() {
        for j in 0..s2.len() {
            k22 += s2.weight(i) * s2.weight(j) * eval_vectors(spec, &s2.points[i], &s2.points[j])?;
        }
    }
    let mut k12 = 0.0;
    for i in 0..s1.len() {
        for j in 0..s2.len() {
            k12 += s1.weight(i) * s2.weight(j) * eval_vectors(spec, &s1.points[i], &s2.points[j])?;
        }
    }
    let sq = k11 - 2.0 * k12 + k22;
    if sq < -1e-12 {
        return Err(GeomError::numerical(format!(
            "mmd squared {sq:.3e} below tolerance"
        )));
    }
    Ok(sq.max(0.0).sqrt())
}

/// The embedding-deviation bound 2 sqrt(k̄/n) + sqrt(2 log(1/ε)/n), valid
/// with probability at least 1-ε when every unit-norm RKHS function is
/// bounded by 1 (the caller's responsibility) and k̄ estimates ∫K(y,y)dμ.
pub fn concentration_bound(n: usize, eps: f64, kbar: f64) -> Result<f64> {
    if n == 0 {
        return Err(GeomError::validation("sample size must be >= 1"));
    }
    if !(0.0..1.0).contains(&eps) || eps == 0.0 {
        return Err(GeomError::validation(format!("epsilon = {eps} outside (0,1)")));
    }
    if kbar < 0.0 {
        return Err(GeomError::validation("kbar must be nonnegative"));
    }
    let nf = n as f64;
    Ok(2.0 * (kbar / nf).sqrt() + (2.0 * (1.0 / eps).ln() / nf).sqrt())
}

/// Monte Carlo check of the concentration bound on a finite-support measure.
/// The reference embedding is an oversampled empirical proxy (`oversample`
/// times n draws), not the exact one, so the observed failure rate carries
/// that proxy error on top of the bound's own slack.
pub struct ConcentrationReport {
    pub bound: f64,
    pub failure_rate: f64,
    pub trials: usize,
}

pub fn concentration_montecarlo(
    spec: &KernelSpec,
    support: &[Vec<f64>],
    probs: &[f64],
    n: usize,
    eps: f64,
    trials: usize,
    oversample: usize,
    rng: &mut Generator,
) -> Result<ConcentrationReport> {
    if support.is_empty() || support.len() != probs.len() {
        return Err(GeomError::validation("support/probs size mismatch"));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-12 || probs.iter().any(|&p| p < 0.0) {
        return Err(GeomError::validation("probs must form a distribution"));
    }
    let m = support.len();
    let mut gram = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = eval_vectors(spec, &support[i], &support[j])?;
            gram[(i, j)] = v;
            gram[(j, i)] = v;
        }
    }
    for i in 0..m {
        if gram[(i, i)] > 1.0 + 1e-12 {
            return Err(GeomError::validation(
                "concentration harness requires k(y,y) <= 1",
            ));
        }
    }
    let kbar: f64 = (0..m).map(|i| probs[i] * gram[(i, i)]).sum();
    let bound = concentration_bound(n, eps, kbar)?;

    let draw_weights = |count: usize, rng: &mut Generator| -> Vec<f64> {
        let mut counts = vec![0usize; m];
        for _ in 0..count {
            let u: f64 = rng.gen_range(0.0..1.0);
            let mut acc = 0.0;
            let mut idx = m - 1;
            for (k, &p) in probs.iter().enumerate() {
                acc += p;
                if u < acc {
                    idx = k;
                    break;
                }
            }
            counts[idx] += 1;
        }
        counts.iter().map(|&c| c as f64 / count as f64).collect()
    };

    let reference = draw_weights(oversample.max(1) * n, rng);
    let mut failures = 0usize;
    for _ in 0..trials {
        let w = draw_weights(n, rng);
        let d: Vec<f64> = w.iter().zip(reference.iter()).map(|(a, b)| a - b).collect();
        let mut sq = 0.0;
        for i in 0..m {
            for j in 0..m {
                sq += d[i] * d[j] * gram[(i, j)];
            }
        }
        if sq.max(0.0).sqrt() > bound {
            failures += 1;
        }
    }
    Ok(ConcentrationReport {
        bound,
        failure_rate: failures as f64 / trials as f64,
        trials,
    })
}

/// Injective embedding of a product of label spaces into Euclidean space:
/// (x_i, y_j) goes to the concatenated pair of label vectors.
#[derive(Debug, Clone)]
pub struct ProductEmbedding {
    xvecs: Vec<Vec<f64>>,
    yvecs: Vec<Vec<f64>>,
}

impl ProductEmbedding {
    pub fn new(xvecs: Vec<Vec<f64>>, yvecs: Vec<Vec<f64>>) -> Result<Self> {
        if xvecs.is_empty() || yvecs.is_empty() {
            return Err(GeomError::validation("embedding needs nonempty label sets"));
        }
        Ok(Self { xvecs, yvecs })
    }

    /// Simplex-vertex embedding in dimension |X| + |Y|: guaranteed injective.
    pub fn simplex(xsize: usize, ysize: usize) -> Self {
        let unit = |dim: usize, k: usize| -> Vec<f64> {
            let mut v = vec![0.0; dim];
            v[k] = 1.0;
            v
        };
        Self {
            xvecs: (0..xsize).map(|i| unit(xsize, i)).collect(),
            yvecs: (0..ysize).map(|j| unit(ysize, j)).collect(),
        }
    }

    pub fn product_point(&self, i: usize, j: usize) -> Vec<f64> {
        let mut v = self.xvecs[i].clone();
        v.extend_from_slice(&self.yvecs[j]);
        v
    }

    /// All product points in row-major order (x outer, y inner).
    pub fn product_points(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(self.xvecs.len() * self.yvecs.len());
        for i in 0..self.xvecs.len() {
            for j in 0..self.yvecs.len() {
                out.push(self.product_point(i, j));
            }
        }
        out
    }

    pub fn xsize(&self) -> usize {
        self.xvecs.len()
    }

    pub fn ysize(&self) -> usize {
        self.yvecs.len()
    }
}

/// RKHS norm of the embedding of a signed measure supported on fixed points:
/// sqrt(wᵀ G w) for the Gram G of the support. Working on the signed weights
/// directly avoids the cancellation the three-term MMD expansion suffers
/// when two nearby measures share a support.
pub fn embedding_norm(spec: &KernelSpec, points: &[Vec<f64>], weights: &[f64]) -> Result<f64> {
    if points.len() != weights.len() {
        return Err(GeomError::dims(
            format!("{} weights", points.len()),
            format!("{}", weights.len()),
        ));
    }
    let m = points.len();
    let mut sq = 0.0;
    for i in 0..m {
        if weights[i] == 0.0 {
            continue;
        }
        for j in 0..m {
            if weights[j] == 0.0 {
                continue;
            }
            sq += weights[i] * weights[j] * eval_vectors(spec, &points[i], &points[j])?;
        }
    }
    if sq < -1e-12 {
        return Err(GeomError::numerical(format!(
            "embedding norm squared {sq:.3e} below tolerance"
        )));
    }
    Ok(sq.max(0.0).sqrt())
}

/// The kernel-embedding loss R^K(h, μ) = ‖M_K (Γ_h)_* μ_X - M_K μ‖: the MMD
/// between the graph pushforward of the marginal and the joint itself, over
/// embedded product labels. Zero exactly at regular conditional probability
/// measures when the embedding kernel separates measures on the grid.
pub fn correct_loss(
    spec: &KernelSpec,
    h: &MarkovKernel,
    mu: &JointMeasure,
    embed: &ProductEmbedding,
) -> Result<f64> {
    if embed.xsize() != mu.xspace().size() || embed.ysize() != mu.yspace().size() {
        return Err(GeomError::validation("embedding does not match spaces"));
    }
    let pushed = graph_pushforward(h, &marginal_x(mu))?;
    let points = embed.product_points();
    let diff: Vec<f64> = pushed
        .product_weights()
        .iter()
        .zip(mu.product_weights().iter())
        .map(|(a, b)| a - b)
        .collect();
    embedding_norm(spec, &points, &diff)
}

/// Two datasets (columns = observations), their Tikhonov scales and the
/// first-layer kernel.
#[derive(Debug, Clone)]
pub struct RegularizedCovariancePair {
    pub data1: DMatrix<f64>,
    pub data2: DMatrix<f64>,
    pub gamma1: f64,
    pub gamma2: f64,
    pub spec: KernelSpec,
}

impl RegularizedCovariancePair {
    pub fn new(
        data1: DMatrix<f64>,
        data2: DMatrix<f64>,
        gamma1: f64,
        gamma2: f64,
        spec: KernelSpec,
    ) -> Result<Self> {
        if gamma1 <= 0.0 || gamma2 <= 0.0 {
            return Err(GeomError::validation("gammas must be > 0"));
        }
        if data1.ncols() == 0 || data2.ncols() == 0 {
            return Err(GeomError::validation("datasets need at least one column"));
        }
        if data1.nrows() != data2.nrows() {
            return Err(GeomError::dims(
                format!("ambient dim {}", data1.nrows()),
                format!("{}", data2.nrows()),
            ));
        }
        spec.validate()?;
        Ok(Self {
            data1,
            data2,
            gamma1,
            gamma2,
            spec,
        })
    }
}

/// The four centered, scaled Gram blocks of the covariance-operator algebra:
/// `A*A = (1/(m₁γ₁)) J K[X¹] J` and friends, with J the centering matrix.
#[derive(Debug, Clone)]
pub struct CovGramBlocks {
    pub aa: DMatrix<f64>,
    pub bb: DMatrix<f64>,
    pub ab: DMatrix<f64>,
    pub ba: DMatrix<f64>,
}

fn centering(m: usize) -> DMatrix<f64> {
    DMatrix::identity(m, m) - DMatrix::from_element(m, m, 1.0 / m as f64)
}

fn kernel_matrix(
    spec: &KernelSpec,
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let mut k = DMatrix::zeros(x.ncols(), y.ncols());
    for i in 0..x.ncols() {
        let xi: Vec<f64> = x.column(i).iter().copied().collect();
        for j in 0..y.ncols() {
            let yj: Vec<f64> = y.column(j).iter().copied().collect();
            k[(i, j)] = eval_vectors(spec, &xi, &yj)?;
        }
    }
    Ok(k)
}

pub fn cov_gram_blocks(pair: &RegularizedCovariancePair) -> Result<CovGramBlocks> {
    let m1 = pair.data1.ncols();
    let m2 = pair.data2.ncols();
    let j1 = centering(m1);
    let j2 = centering(m2);
    let k11 = kernel_matrix(&pair.spec, &pair.data1, &pair.data1)?;
    let k22 = kernel_matrix(&pair.spec, &pair.data2, &pair.data2)?;
    let k12 = kernel_matrix(&pair.spec, &pair.data1, &pair.data2)?;
    let aa = &j1 * &k11 * &j1 / (m1 as f64 * pair.gamma1);
    let bb = &j2 * &k22 * &j2 / (m2 as f64 * pair.gamma2);
    let scale = 1.0 / (m1 as f64 * m2 as f64 * pair.gamma1 * pair.gamma2).sqrt();
    let ab = &j1 * &k12 * &j2 * scale;
    let ba = ab.transpose();
    Ok(CovGramBlocks { aa, bb, ab, ba })
}

/// Tolerance for clipping rounding-level negative eigenvalues of the
/// centered blocks.
const BLOCK_EIG_FLOOR: f64 = -1e-10;

/// Eigenvalues of a centered block, tiny negatives clipped to zero.
fn block_eigs(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let sym = SymMatrix::symmetrize(m.clone());
    let dec = sym_eig(&sym);
    let mut eigs = dec.eigenvalues;
    let scale = eigs.iter().fold(1.0f64, |a, &b| a.max(b.abs()));
    for l in &mut eigs {
        if *l < 0.0 {
            if *l < BLOCK_EIG_FLOOR * scale {
                return Err(GeomError::numerical(format!(
                    "covariance Gram block has eigenvalue {l:.3e}"
                )));
            }
            *l = 0.0;
        }
    }
    Ok((eigs, dec.eigenvectors))
}

fn log_i_plus_sq_norm(eigs: &[f64]) -> f64 {
    eigs.iter().map(|l| l.ln_1p().powi(2)).sum()
}

/// h(λ) = log(1+λ)/λ with the removable singularity h(0) = 1.
fn h_scalar(l: f64) -> f64 {
    if l == 0.0 {
        1.0
    } else {
        l.ln_1p() / l
    }
}

fn h_matrix(eigs: &[f64], q: &DMatrix<f64>) -> DMatrix<f64> {
    let n = eigs.len();
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        eigs.iter().map(|&l| h_scalar(l)),
    ));
    q * d * q.transpose()
}

/// Squared Log-Hilbert-Schmidt distance between the regularized covariance
/// operators, via the closed Gram form
/// ‖log(I+A*A)‖² + ‖log(I+B*B)‖² - 2 trace[B*A h(A*A) A*B h(B*B)] + log²(γ₂/γ₁).
pub fn loghs_cov_distance_squared(pair: &RegularizedCovariancePair) -> Result<f64> {
    let blocks = cov_gram_blocks(pair)?;
    let (ea, qa) = block_eigs(&blocks.aa)?;
    let (eb, qb) = block_eigs(&blocks.bb)?;
    let cross =
        (&blocks.ba * h_matrix(&ea, &qa) * &blocks.ab * h_matrix(&eb, &qb)).trace();
    let gamma_term = (pair.gamma2 / pair.gamma1).ln().powi(2);
    Ok(log_i_plus_sq_norm(&ea) + log_i_plus_sq_norm(&eb) - 2.0 * cross + gamma_term)
}

pub fn loghs_cov_distance(pair: &RegularizedCovariancePair) -> Result<f64> {
    let sq = loghs_cov_distance_squared(pair)?;
    if sq < -1e-9 {
        return Err(GeomError::numerical(format!(
            "log-HS squared distance {sq:.3e} below tolerance"
        )));
    }
    Ok(sq.max(0.0).sqrt())
}

/// Extended Log-Hilbert-Schmidt inner product
/// ⟨log(C₁+γ₁I), log(C₂+γ₂I)⟩ = trace[B*A h(A*A) A*B h(B*B)] + log γ₁ log γ₂,
/// the Hilbert-Schmidt part plus the orthogonal scalar part.
pub fn loghs_cov_inner(pair: &RegularizedCovariancePair) -> Result<f64> {
    let blocks = cov_gram_blocks(pair)?;
    let (ea, qa) = block_eigs(&blocks.aa)?;
    let (eb, qb) = block_eigs(&blocks.bb)?;
    let cross =
        (&blocks.ba * h_matrix(&ea, &qa) * &blocks.ab * h_matrix(&eb, &qb)).trace();
    Ok(cross + pair.gamma1.ln() * pair.gamma2.ln())
}

/// Pairwise Log-HS distance matrix between datasets under a shared gamma.
pub fn two_layer_distance_matrix(
    datasets: &[DMatrix<f64>],
    spec: &KernelSpec,
    gamma: f64,
) -> Result<DMatrix<f64>> {
    if datasets.len() < 2 {
        return Err(GeomError::validation("need at least two datasets"));
    }
    let n = datasets.len();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let pair = RegularizedCovariancePair::new(
                datasets[i].clone(),
                datasets[j].clone(),
                gamma,
                gamma,
                spec.clone(),
            )?;
            let v = loghs_cov_distance(&pair)?;
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    Ok(d)
}

/// Second-layer Gaussian kernel K₂ = exp(-D²/σ₂²) over the Log-HS distance
/// matrix; positive definite for 0 < p = 2 by the Log-HS kernel theorem.
pub fn two_layer_kernel(
    datasets: &[DMatrix<f64>],
    spec: &KernelSpec,
    gamma: f64,
    sigma2: f64,
) -> Result<DMatrix<f64>> {
    if sigma2 == 0.0 || !sigma2.is_finite() {
        return Err(GeomError::validation("sigma2 must be nonzero"));
    }
    let d = two_layer_distance_matrix(datasets, spec, gamma)?;
    Ok(d.map(|v| (-(v * v) / (sigma2 * sigma2)).exp()))
}

/// Nearest-neighbour label from a row of distances to the training items;
/// ties break toward the lowest index.
pub fn classify_1nn(query_distances: &[f64], labels: &[String]) -> Result<String> {
    if query_distances.is_empty() || query_distances.len() != labels.len() {
        return Err(GeomError::validation(
            "distance row and labels must be nonempty and equal length",
        ));
    }
    let mut best = 0usize;
    for i in 1..query_distances.len() {
        if query_distances[i] < query_distances[best] {
            best = i;
        }
    }
    Ok(labels[best].clone())
}

/// Equivalence check between the embedding loss and the graph
/// characterization on a finite grid (used by tests and the self test).
pub fn loss_matches_characterization(
    spec: &KernelSpec,
    h: &MarkovKernel,
    mu: &JointMeasure,
    embed: &ProductEmbedding,
    tol: f64,
) -> Result<bool> {
    let loss = correct_loss(spec, h, mu, embed)?;
    let cond = verify_conditional(h, mu, tol)?;
    Ok((loss <= tol) == cond)
}

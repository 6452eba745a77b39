//! Finite-space Markov kernels: composition, pushforward, join, graph,
//! disintegration and the graph characterization of regular conditional
//! probability measures.
//!
//! A Markov kernel between finite spaces is a row-stochastic matrix; a joint
//! measure is a nonnegative table summing to one. Product spaces are always
//! enumerated row-major (x outer, y inner) and every product-space operation
//! here shares that order.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{GeomError, Result};

/// Tolerance for probability normalization checks.
pub const PROB_TOL: f64 = 1e-12;

/// An ordered finite measurable space with distinct string labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSpace {
    labels: Vec<String>,
}

impl FiniteSpace {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(GeomError::validation("space needs at least one label"));
        }
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            if !seen.insert(l.clone()) {
                return Err(GeomError::validation(format!("duplicate label {l:?}")));
            }
        }
        Ok(Self { labels })
    }

    /// Space with labels `<prefix>0 .. <prefix>{n-1}`.
    pub fn indexed(prefix: &str, n: usize) -> Self {
        Self {
            labels: (0..n).map(|i| format!("{prefix}{i}")).collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Product space with row-major labels `(x,y)`.
    pub fn product(&self, other: &FiniteSpace) -> FiniteSpace {
        let mut labels = Vec::with_capacity(self.size() * other.size());
        for a in &self.labels {
            for b in &other.labels {
                labels.push(format!("({a},{b})"));
            }
        }
        FiniteSpace { labels }
    }
}

/// Row-major index into a product space.
pub fn product_index(ysize: usize, i: usize, j: usize) -> usize {
    i * ysize + j
}

/// A probability measure on a finite space.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    space: FiniteSpace,
    weights: Vec<f64>,
}

impl ProbVector {
    pub fn new(space: FiniteSpace, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != space.size() {
            return Err(GeomError::dims(
                format!("{} weights", space.size()),
                format!("{}", weights.len()),
            ));
        }
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(GeomError::validation("negative or non-finite weight"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(GeomError::validation(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { space, weights })
    }

    pub fn uniform(space: FiniteSpace) -> Self {
        let n = space.size();
        Self {
            space,
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn to_signed(&self) -> SignedVector {
        SignedVector {
            space: self.space.clone(),
            weights: self.weights.clone(),
        }
    }
}

/// A finite signed measure on a finite space.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedVector {
    space: FiniteSpace,
    weights: Vec<f64>,
}

impl SignedVector {
    pub fn new(space: FiniteSpace, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != space.size() {
            return Err(GeomError::dims(
                format!("{} weights", space.size()),
                format!("{}", weights.len()),
            ));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(GeomError::validation("non-finite weight"));
        }
        Ok(Self { space, weights })
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_variation(&self) -> f64 {
        self.weights.iter().map(|w| w.abs()).sum()
    }
}

/// A probabilistic morphism between finite spaces: one probability row per
/// source point.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovKernel {
    source: FiniteSpace,
    target: FiniteSpace,
    rows: DMatrix<f64>,
}

impl MarkovKernel {
    pub fn new(source: FiniteSpace, target: FiniteSpace, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != source.size() {
            return Err(GeomError::dims(
                format!("{} rows", source.size()),
                format!("{}", rows.len()),
            ));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != target.size() {
                return Err(GeomError::dims(
                    format!("{} columns", target.size()),
                    format!("{} in row {i}", row.len()),
                ));
            }
            if row.iter().any(|&w| w < 0.0 || !w.is_finite()) {
                return Err(GeomError::validation(format!("row {i} has invalid weight")));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > PROB_TOL {
                return Err(GeomError::validation(format!(
                    "row {i} sums to {total}, expected 1"
                )));
            }
        }
        let m = DMatrix::from_fn(source.size(), target.size(), |i, j| rows[i][j]);
        Ok(Self {
            source,
            target,
            rows: m,
        })
    }

    fn from_matrix_unchecked(source: FiniteSpace, target: FiniteSpace, rows: DMatrix<f64>) -> Self {
        Self {
            source,
            target,
            rows,
        }
    }

    pub fn identity(space: &FiniteSpace) -> Self {
        let n = space.size();
        Self {
            source: space.clone(),
            target: space.clone(),
            rows: DMatrix::identity(n, n),
        }
    }

    /// Kernel generated by a deterministic map (Dirac rows).
    pub fn deterministic(
        source: &FiniteSpace,
        target: &FiniteSpace,
        map: impl Fn(usize) -> usize,
    ) -> Result<Self> {
        let mut rows = DMatrix::zeros(source.size(), target.size());
        for i in 0..source.size() {
            let j = map(i);
            if j >= target.size() {
                return Err(GeomError::validation(format!(
                    "map sends {i} outside target of size {}",
                    target.size()
                )));
            }
            rows[(i, j)] = 1.0;
        }
        Ok(Self {
            source: source.clone(),
            target: target.clone(),
            rows,
        })
    }

    pub fn source(&self) -> &FiniteSpace {
        &self.source
    }

    pub fn target(&self) -> &FiniteSpace {
        &self.target
    }

    pub fn rows(&self) -> &DMatrix<f64> {
        &self.rows
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.rows.row(i).iter().copied().collect()
    }

    /// The row at a source point as a probability measure on the target.
    pub fn row_measure(&self, i: usize) -> ProbVector {
        ProbVector {
            space: self.target.clone(),
            weights: self.row(i),
        }
    }
}

/// Dirac measure at a labelled point.
pub fn dirac(space: &FiniteSpace, label: &str) -> Result<ProbVector> {
    let idx = space
        .index_of(label)
        .ok_or_else(|| GeomError::validation(format!("unknown label {label:?}")))?;
    let mut weights = vec![0.0; space.size()];
    weights[idx] = 1.0;
    Ok(ProbVector {
        space: space.clone(),
        weights,
    })
}

/// Kernel composition T2 ∘ T1 : X ⇝ Z for T1: X ⇝ Y, T2: Y ⇝ Z. On finite
/// spaces this is the product of the row-stochastic matrices.
pub fn compose(t1: &MarkovKernel, t2: &MarkovKernel) -> Result<MarkovKernel> {
    if t1.target != t2.source {
        return Err(GeomError::validation(
            "composition: intermediate spaces differ",
        ));
    }
    let rows = &t1.rows * &t2.rows;
    Ok(MarkovKernel::from_matrix_unchecked(
        t1.source.clone(),
        t2.target.clone(),
        rows,
    ))
}

/// Markov homomorphism T_*: pushes a signed measure through the kernel.
pub fn pushforward(t: &MarkovKernel, mu: &SignedVector) -> Result<SignedVector> {
    if *mu.space() != t.source {
        return Err(GeomError::validation("pushforward: space mismatch"));
    }
    let mut out = vec![0.0; t.target.size()];
    for (j, o) in out.iter_mut().enumerate() {
        *o = (0..t.source.size())
            .map(|i| mu.weights[i] * t.rows[(i, j)])
            .sum();
    }
    SignedVector::new(t.target.clone(), out)
}

/// Pushforward of a probability measure; row-stochasticity preserves total
/// mass and nonnegativity, which the returned `ProbVector` re-validates.
pub fn pushforward_prob(t: &MarkovKernel, mu: &ProbVector) -> Result<ProbVector> {
    let pushed = pushforward(t, &mu.to_signed())?;
    ProbVector::new(t.target.clone(), pushed.weights)
}

/// Join T1 · T2 : X ⇝ Y1 × Y2; each row is the outer product of the factor
/// rows at the same source point.
pub fn join(t1: &MarkovKernel, t2: &MarkovKernel) -> Result<MarkovKernel> {
    if t1.source != t2.source {
        return Err(GeomError::validation("join: sources differ"));
    }
    let target = t1.target.product(&t2.target);
    let q2 = t2.target.size();
    let mut rows = DMatrix::zeros(t1.source.size(), target.size());
    for i in 0..t1.source.size() {
        for a in 0..t1.target.size() {
            for b in 0..q2 {
                rows[(i, product_index(q2, a, b))] = t1.rows[(i, a)] * t2.rows[(i, b)];
            }
        }
    }
    Ok(MarkovKernel::from_matrix_unchecked(
        t1.source.clone(),
        target,
    rows,
    ))
}

/// Graph Γ_T : X ⇝ X × Y, the join of the identity with T. Sends x to
/// δ_x ⊗ T(x,·); deterministic kernels reduce to x ↦ (x, κ(x)).
pub fn graph(t: &MarkovKernel) -> MarkovKernel {
    let id = MarkovKernel::identity(&t.source);
    join(&id, t).expect("identity shares the source")
}

/// (Γ_T)_* μ_X: the joint measure whose (x, y) entry is μ_X(x) T(x, y).
pub fn graph_pushforward(t: &MarkovKernel, mu_x: &ProbVector) -> Result<JointMeasure> {
    if *mu_x.space() != t.source {
        return Err(GeomError::validation("graph_pushforward: space mismatch"));
    }
    let table = DMatrix::from_fn(t.source.size(), t.target.size(), |i, j| {
        mu_x.weights[i] * t.rows[(i, j)]
    });
    Ok(JointMeasure {
        xspace: t.source.clone(),
        yspace: t.target.clone(),
        table,
    })
}

/// A probability measure on a product of two finite spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct JointMeasure {
    xspace: FiniteSpace,
    yspace: FiniteSpace,
    table: DMatrix<f64>,
}

impl JointMeasure {
    pub fn new(xspace: FiniteSpace, yspace: FiniteSpace, table: Vec<Vec<f64>>) -> Result<Self> {
        if table.len() != xspace.size() || table.iter().any(|r| r.len() != yspace.size()) {
            return Err(GeomError::dims(
                format!("{}x{} table", xspace.size(), yspace.size()),
                "ragged or mis-sized table".to_string(),
            ));
        }
        let m = DMatrix::from_fn(xspace.size(), yspace.size(), |i, j| table[i][j]);
        Self::from_matrix(xspace, yspace, m)
    }

    pub fn from_matrix(xspace: FiniteSpace, yspace: FiniteSpace, table: DMatrix<f64>) -> Result<Self> {
        if table.nrows() != xspace.size() || table.ncols() != yspace.size() {
            return Err(GeomError::dims(
                format!("{}x{}", xspace.size(), yspace.size()),
                format!("{}x{}", table.nrows(), table.ncols()),
            ));
        }
        if table.iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(GeomError::validation("joint table has invalid entry"));
        }
        let total: f64 = table.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(GeomError::validation(format!(
                "joint table sums to {total}, expected 1"
            )));
        }
        Ok(Self {
            xspace,
            yspace,
            table,
        })
    }

    pub fn xspace(&self) -> &FiniteSpace {
        &self.xspace
    }

    pub fn yspace(&self) -> &FiniteSpace {
        &self.yspace
    }

    pub fn table(&self) -> &DMatrix<f64> {
        &self.table
    }

    /// Weights over the product space in row-major order.
    pub fn product_weights(&self) -> Vec<f64> {
        let mut w = Vec::with_capacity(self.table.len());
        for i in 0..self.xspace.size() {
            for j in 0..self.yspace.size() {
                w.push(self.table[(i, j)]);
            }
        }
        w
    }

    /// Independent product μ_X ⊗ ν.
    pub fn product_measure(mu_x: &ProbVector, nu: &ProbVector) -> Self {
        let table = DMatrix::from_fn(mu_x.space().size(), nu.space().size(), |i, j| {
            mu_x.weights[i] * nu.weights[j]
        });
        Self {
            xspace: mu_x.space().clone(),
            yspace: nu.space().clone(),
            table,
        }
    }
}

/// X-marginal (Π_X)_* μ: row sums of the table.
pub fn marginal_x(mu: &JointMeasure) -> ProbVector {
    let weights: Vec<f64> = (0..mu.xspace.size())
        .map(|i| mu.table.row(i).iter().sum())
        .collect();
    normalized_prob(mu.xspace.clone(), weights)
}

/// Y-marginal (Π_Y)_* μ: column sums of the table.
pub fn marginal_y(mu: &JointMeasure) -> ProbVector {
    let weights: Vec<f64> = (0..mu.yspace.size())
        .map(|j| mu.table.column(j).iter().sum())
        .collect();
    normalized_prob(mu.yspace.clone(), weights)
}

fn normalized_prob(space: FiniteSpace, mut weights: Vec<f64>) -> ProbVector {
    let total: f64 = weights.iter().sum();
    if total > 0.0 {
        for w in &mut weights {
            *w /= total;
        }
    }
    ProbVector { space, weights }
}

/// Regular conditional probability measure of a joint: divides each row by
/// its marginal. Rows at zero-marginal points are filled uniformly; any
/// choice there yields a valid disintegration since regular conditionals are
/// only unique almost everywhere.
pub fn disintegrate(mu: &JointMeasure) -> (ProbVector, MarkovKernel) {
    let marg = marginal_x(mu);
    let q = mu.yspace.size();
    let mut rows = DMatrix::zeros(mu.xspace.size(), q);
    for i in 0..mu.xspace.size() {
        let m: f64 = mu.table.row(i).iter().sum();
        if m == 0.0 {
            for j in 0..q {
                rows[(i, j)] = 1.0 / q as f64;
            }
        } else {
            for j in 0..q {
                rows[(i, j)] = mu.table[(i, j)] / m;
            }
        }
    }
    let kernel =
        MarkovKernel::from_matrix_unchecked(mu.xspace.clone(), mu.yspace.clone(), rows);
    (marg, kernel)
}

/// True iff T is a regular conditional probability measure for μ within tol:
/// the graph pushforward of the X-marginal reproduces μ entrywise.
pub fn verify_conditional(t: &MarkovKernel, mu: &JointMeasure, tol: f64) -> Result<bool> {
    if t.source != mu.xspace || t.target != mu.yspace {
        return Err(GeomError::validation("verify_conditional: space mismatch"));
    }
    let reproduced = graph_pushforward(t, &marginal_x(mu))?;
    let diff = (&reproduced.table - &mu.table).abs().max();
    Ok(diff <= tol)
}

/// Almost-everywhere equality: rows agree within tol wherever μ_X puts mass.
pub fn ae_equal(t1: &MarkovKernel, t2: &MarkovKernel, mu_x: &ProbVector, tol: f64) -> Result<bool> {
    if t1.source != t2.source || t1.target != t2.target {
        return Err(GeomError::validation("ae_equal: spaces differ"));
    }
    if *mu_x.space() != t1.source {
        return Err(GeomError::validation("ae_equal: marginal space mismatch"));
    }
    for i in 0..t1.source.size() {
        if mu_x.weights[i] > 0.0 {
            for j in 0..t1.target.size() {
                if (t1.rows[(i, j)] - t2.rows[(i, j)]).abs() > tol {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Additive-noise measurement channel on a 1-D grid: the row at x is the
/// noise distribution shifted so its center lands on f(x). Mass pushed past
/// a grid edge accumulates at that edge, which keeps rows stochastic without
/// renormalizing.
pub fn noise_channel(
    source: &FiniteSpace,
    target: &FiniteSpace,
    f: &[usize],
    noise: &[f64],
    center: usize,
) -> Result<MarkovKernel> {
    let q = target.size();
    if q == 0 || noise.is_empty() {
        return Err(GeomError::validation("noise_channel: empty grid"));
    }
    if f.len() != source.size() {
        return Err(GeomError::dims(
            format!("{} map entries", source.size()),
            format!("{}", f.len()),
        ));
    }
    if center >= noise.len() {
        return Err(GeomError::validation("noise_channel: center outside noise"));
    }
    let total: f64 = noise.iter().sum();
    if (total - 1.0).abs() > PROB_TOL || noise.iter().any(|&w| w < 0.0) {
        return Err(GeomError::validation("noise weights must be a distribution"));
    }
    let mut rows = DMatrix::zeros(source.size(), q);
    for (i, &fx) in f.iter().enumerate() {
        if fx >= q {
            return Err(GeomError::validation(format!(
                "f({i}) = {fx} outside target grid"
            )));
        }
        for (k, &w) in noise.iter().enumerate() {
            let shifted = fx as i64 + (k as i64 - center as i64);
            let j = shifted.clamp(0, q as i64 - 1) as usize;
            rows[(i, j)] += w;
        }
    }
    Ok(MarkovKernel::from_matrix_unchecked(
        source.clone(),
        target.clone(),
        rows,
    ))
}

/// Regression function r_μ(x) = Σ_y y · μ_{Y|X}(y|x) for numeric labels.
pub fn regression_function(mu: &JointMeasure, yvalues: &[f64]) -> Result<Vec<f64>> {
    if yvalues.len() != mu.yspace.size() {
        return Err(GeomError::dims(
            format!("{} y-values", mu.yspace.size()),
            format!("{}", yvalues.len()),
        ));
    }
    let (_, kernel) = disintegrate(mu);
    Ok((0..mu.xspace.size())
        .map(|i| {
            (0..mu.yspace.size())
                .map(|j| yvalues[j] * kernel.rows[(i, j)])
                .sum()
        })
        .collect())
}

/// Random probability row (flat Dirichlet).
pub fn random_prob_vector(space: &FiniteSpace, rng: &mut impl Rng) -> ProbVector {
    let mut w: Vec<f64> = (0..space.size())
        .map(|_| -(rng.gen_range(0.0f64..1.0).max(1e-300)).ln())
        .collect();
    let total: f64 = w.iter().sum();
    for v in &mut w {
        *v /= total;
    }
    ProbVector {
        space: space.clone(),
        weights: w,
    }
}

/// Random kernel with independent Dirichlet rows.
pub fn random_kernel(source: &FiniteSpace, target: &FiniteSpace, rng: &mut impl Rng) -> MarkovKernel {
    let mut rows = DMatrix::zeros(source.size(), target.size());
    for i in 0..source.size() {
        let row = random_prob_vector(target, rng);
        for j in 0..target.size() {
            rows[(i, j)] = row.weights[j];
        }
    }
    MarkovKernel::from_matrix_unchecked(source.clone(), target.clone(), rows)
}

/// Random joint measure with Dirichlet mass over all cells.
pub fn random_joint(xspace: &FiniteSpace, yspace: &FiniteSpace, rng: &mut impl Rng) -> JointMeasure {
    let mut table = DMatrix::zeros(xspace.size(), yspace.size());
    let mut total = 0.0;
    for i in 0..xspace.size() {
        for j in 0..yspace.size() {
            let v = -(rng.gen_range(0.0f64..1.0).max(1e-300)).ln();
            table[(i, j)] = v;
            total += v;
        }
    }
    table /= total;
    JointMeasure {
        xspace: xspace.clone(),
        yspace: yspace.clone(),
        table,
    }
}

//! Regularized empirical risk minimization for conditional probability
//! estimation on a discretized product space: the kernel-embedding risk, the
//! d_M metric and W functional over hypothesis fields, a projected
//! block-coordinate minimizer, and learning-curve experiments.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{GeomError, Result};
use crate::kernel::{eval_vectors, KernelSpec};
use crate::markov::{
    disintegrate, marginal_x, FiniteSpace, JointMeasure, MarkovKernel, PROB_TOL,
};
use crate::rkhs::embedding_norm;
use crate::sampling::{rng_for_unit, Generator};

/// Discretized product geometry: X on the first axis, Y on the second, with
/// the ambient embeddings x ↦ (x, 0) and y ↦ (0, y).
#[derive(Debug, Clone, PartialEq)]
pub struct GridModel {
    xgrid: Vec<f64>,
    ygrid: Vec<f64>,
}

impl GridModel {
    pub fn new(xgrid: Vec<f64>, ygrid: Vec<f64>) -> Result<Self> {
        for (name, grid) in [("x", &xgrid), ("y", &ygrid)] {
            if grid.is_empty() {
                return Err(GeomError::validation(format!("{name}-grid is empty")));
            }
            if grid.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(GeomError::validation(format!(
                    "{name}-grid must lie in [0,1]"
                )));
            }
            if grid.windows(2).any(|w| w[0] >= w[1]) {
                return Err(GeomError::validation(format!(
                    "{name}-grid must be strictly increasing"
                )));
            }
        }
        Ok(Self { xgrid, ygrid })
    }

    /// p and q equispaced points filling [0, 1].
    pub fn uniform(p: usize, q: usize) -> Result<Self> {
        let grid = |n: usize| -> Vec<f64> {
            if n == 1 {
                vec![0.5]
            } else {
                (0..n).map(|k| k as f64 / (n - 1) as f64).collect()
            }
        };
        Self::new(grid(p), grid(q))
    }

    pub fn xsize(&self) -> usize {
        self.xgrid.len()
    }

    pub fn ysize(&self) -> usize {
        self.ygrid.len()
    }

    pub fn xgrid(&self) -> &[f64] {
        &self.xgrid
    }

    pub fn ygrid(&self) -> &[f64] {
        &self.ygrid
    }

    pub fn embed_x(&self, i: usize) -> Vec<f64> {
        vec![self.xgrid[i], 0.0]
    }

    pub fn embed_y(&self, j: usize) -> Vec<f64> {
        vec![0.0, self.ygrid[j]]
    }

    pub fn embed_xy(&self, i: usize, j: usize) -> Vec<f64> {
        vec![self.xgrid[i], self.ygrid[j]]
    }

    pub fn xspace(&self) -> FiniteSpace {
        FiniteSpace::indexed("x", self.xsize())
    }

    pub fn yspace(&self) -> FiniteSpace {
        FiniteSpace::indexed("y", self.ysize())
    }
}

/// A Lipschitz-constrained family member: row-stochastic conditional rows
/// over the grid with a recorded Lipschitz budget.
#[derive(Debug, Clone)]
pub struct HypothesisField {
    rows: DMatrix<f64>,
    lip_bound: f64,
}

impl HypothesisField {
    pub fn rows(&self) -> &DMatrix<f64> {
        &self.rows
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.rows.row(i).iter().copied().collect()
    }

    pub fn lip_bound(&self) -> f64 {
        self.lip_bound
    }
}

/// Regularization schedule: penalty weights decreasing to zero and
/// nonincreasing minimization slacks.
#[derive(Debug, Clone)]
pub struct Schedule {
    pub gammas: Vec<f64>,
    pub slacks: Vec<f64>,
}

impl Schedule {
    pub fn new(gammas: Vec<f64>, slacks: Vec<f64>) -> Result<Self> {
        if gammas.is_empty() || gammas.len() != slacks.len() {
            return Err(GeomError::validation("schedule lengths must match"));
        }
        if gammas.iter().any(|&g| g <= 0.0) {
            return Err(GeomError::validation("gammas must be positive"));
        }
        if gammas.windows(2).any(|w| w[0] <= w[1]) {
            return Err(GeomError::validation("gammas must be strictly decreasing"));
        }
        if slacks.iter().any(|&c| c < 0.0) || slacks.windows(2).any(|w| w[0] < w[1]) {
            return Err(GeomError::validation("slacks must be nonincreasing and >= 0"));
        }
        Ok(Self { gammas, slacks })
    }

    /// γ_n = n^{-exponent} with the γ² slack, evaluated on the given sizes.
    pub fn power(sizes: &[usize], exponent: f64) -> Result<Self> {
        let gammas: Vec<f64> = sizes.iter().map(|&n| (n as f64).powf(-exponent)).collect();
        let slacks: Vec<f64> = gammas.iter().map(|g| g * g).collect();
        Self::new(gammas, slacks)
    }
}

/// Precomputed Gram geometry for one grid model and ambient kernel. All the
/// K̃ norms reduce to quadratic forms in these matrices.
pub struct ErmContext {
    model: GridModel,
    spec: KernelSpec,
    gram_y: DMatrix<f64>,
    gram_xy: DMatrix<f64>,
    x_factor: DMatrix<f64>,
}

impl ErmContext {
    /// The grid norms require the ambient Gaussian kernel: its product
    /// structure over the two axes is what makes the graph-term quadratic
    /// forms reduce to the y-Gram scaled by an x-axis factor.
    pub fn new(model: GridModel, spec: KernelSpec) -> Result<Self> {
        spec.validate()?;
        if !matches!(spec, KernelSpec::EuclideanGaussian { .. }) {
            return Err(GeomError::validation(
                "grid norms are defined with the ambient Gaussian kernel",
            ));
        }
        let q = model.ysize();
        let p = model.xsize();
        let mut gram_y = DMatrix::zeros(q, q);
        for a in 0..q {
            for b in 0..q {
                gram_y[(a, b)] = eval_vectors(&spec, &model.embed_y(a), &model.embed_y(b))?;
            }
        }
        let pq = p * q;
        let mut gram_xy = DMatrix::zeros(pq, pq);
        for i in 0..p {
            for j in 0..q {
                for i2 in 0..p {
                    for j2 in 0..q {
                        gram_xy[(i * q + j, i2 * q + j2)] = eval_vectors(
                            &spec,
                            &model.embed_xy(i, j),
                            &model.embed_xy(i2, j2),
                        )?;
                    }
                }
            }
        }
        let mut x_factor = DMatrix::zeros(p, p);
        for i in 0..p {
            for i2 in 0..p {
                x_factor[(i, i2)] = eval_vectors(&spec, &model.embed_x(i), &model.embed_x(i2))?;
            }
        }
        Ok(Self {
            model,
            spec,
            gram_y,
            gram_xy,
            x_factor,
        })
    }

    pub fn model(&self) -> &GridModel {
        &self.model
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    /// Builds a field and records its exact Lipschitz constant as the bound.
    pub fn field(&self, rows: Vec<Vec<f64>>) -> Result<HypothesisField> {
        let matrix = self.validate_rows(rows)?;
        let lip = self.lipschitz_of_rows(&matrix);
        Ok(HypothesisField {
            rows: matrix,
            lip_bound: lip,
        })
    }

    /// Builds a field enforcing the declared Lipschitz budget.
    pub fn field_with_bound(&self, rows: Vec<Vec<f64>>, lip_bound: f64) -> Result<HypothesisField> {
        let matrix = self.validate_rows(rows)?;
        let lip = self.lipschitz_of_rows(&matrix);
        if lip > lip_bound + 1e-12 {
            return Err(GeomError::validation(format!(
                "field has Lipschitz constant {lip:.6}, above the bound {lip_bound:.6}"
            )));
        }
        Ok(HypothesisField {
            rows: matrix,
            lip_bound,
        })
    }

    pub fn field_from_kernel(&self, kernel: &MarkovKernel) -> Result<HypothesisField> {
        let rows: Vec<Vec<f64>> = (0..kernel.source().size()).map(|i| kernel.row(i)).collect();
        self.field(rows)
    }

    pub fn kernel_of(&self, field: &HypothesisField) -> MarkovKernel {
        let rows: Vec<Vec<f64>> = (0..self.model.xsize()).map(|i| field.row(i)).collect();
        MarkovKernel::new(self.model.xspace(), self.model.yspace(), rows)
            .expect("field rows are stochastic")
    }

    fn validate_rows(&self, rows: Vec<Vec<f64>>) -> Result<DMatrix<f64>> {
        let p = self.model.xsize();
        let q = self.model.ysize();
        if rows.len() != p || rows.iter().any(|r| r.len() != q) {
            return Err(GeomError::dims(
                format!("{p}x{q} rows"),
                "mis-shaped rows".to_string(),
            ));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.iter().any(|&v| v < 0.0 || !v.is_finite()) {
                return Err(GeomError::validation(format!("row {i} has invalid entry")));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > PROB_TOL {
                return Err(GeomError::validation(format!(
                    "row {i} sums to {total}, expected 1"
                )));
            }
        }
        Ok(DMatrix::from_fn(p, q, |i, j| rows[i][j]))
    }

    /// K̃₂ norm of a signed combination of Y-rows.
    fn y_norm(&self, d: &[f64]) -> f64 {
        let q = d.len();
        let mut sq = 0.0;
        for a in 0..q {
            for b in 0..q {
                sq += d[a] * d[b] * self.gram_y[(a, b)];
            }
        }
        sq.max(0.0).sqrt()
    }

    /// K̃₁ norm of the signed measure a ⊗ δ_{x_i} + b ⊗ δ_{x_k} supported on
    /// two grid rows. The product kernel factorizes over the axes, so the
    /// cross block is the y-Gram scaled by the x-axis kernel value.
    fn two_row_norm(&self, i: usize, a: &[f64], k: usize, b: &[f64]) -> f64 {
        let q = a.len();
        let s = self.x_factor[(i, k)];
        let mut sq = 0.0;
        for u in 0..q {
            for v in 0..q {
                let g = self.gram_y[(u, v)];
                sq += a[u] * a[v] * g + b[u] * b[v] * g + 2.0 * s * a[u] * b[v] * g;
            }
        }
        sq.max(0.0).sqrt()
    }

    fn lipschitz_of_rows(&self, rows: &DMatrix<f64>) -> f64 {
        let p = self.model.xsize();
        let q = self.model.ysize();
        let mut worst: f64 = 0.0;
        let mut d = vec![0.0; q];
        for i in 0..p {
            for k in (i + 1)..p {
                for (j, dj) in d.iter_mut().enumerate() {
                    *dj = rows[(i, j)] - rows[(k, j)];
                }
                let dist = (self.model.xgrid[i] - self.model.xgrid[k]).abs();
                worst = worst.max(self.y_norm(&d) / dist);
            }
        }
        worst
    }

    /// Risk pieces on raw rows; the shared core of the public operations and
    /// the optimizer's hot loop.
    fn quadratic_term(&self, rows: &DMatrix<f64>, mu_x: &[f64], emp_w: &[f64]) -> f64 {
        let p = self.model.xsize();
        let q = self.model.ysize();
        let pq = p * q;
        let mut d = vec![0.0; pq];
        for i in 0..p {
            for j in 0..q {
                d[i * q + j] = mu_x[i] * rows[(i, j)] - emp_w[i * q + j];
            }
        }
        let mut sq = 0.0;
        for a in 0..pq {
            if d[a] == 0.0 {
                continue;
            }
            for b in 0..pq {
                sq += d[a] * d[b] * self.gram_xy[(a, b)];
            }
        }
        sq.max(0.0)
    }

    fn w_of_rows(&self, rows: &DMatrix<f64>) -> f64 {
        let p = self.model.xsize();
        let q = self.model.ysize();
        // ‖f‖_M = sup_x (‖f(x)‖_K̃₂ + ‖Γ_f(x)‖_K̃₁); the graph term equals the
        // row term because the x-displacement inside one row is zero
        let mut norm_m: f64 = 0.0;
        let mut row = vec![0.0; q];
        for i in 0..p {
            for (j, rj) in row.iter_mut().enumerate() {
                *rj = rows[(i, j)];
            }
            norm_m = norm_m.max(2.0 * self.y_norm(&row));
        }
        // K̃₁-Lipschitz constant of x ↦ Γ_f(x), the compactness surrogate for
        // the undefined third term of the W functional
        let mut lip_graph: f64 = 0.0;
        let mut a = vec![0.0; q];
        let mut b = vec![0.0; q];
        for i in 0..p {
            for k in (i + 1)..p {
                for j in 0..q {
                    a[j] = rows[(i, j)];
                    b[j] = -rows[(k, j)];
                }
                let dist = (self.model.xgrid[i] - self.model.xgrid[k]).abs();
                lip_graph = lip_graph.max(self.two_row_norm(i, &a, k, &b) / dist);
            }
        }
        norm_m + self.lipschitz_of_rows(rows) + lip_graph
    }

    fn risk_of_rows(&self, rows: &DMatrix<f64>, mu_x: &[f64], emp_w: &[f64], gamma: f64) -> f64 {
        let q = self.quadratic_term(rows, mu_x, emp_w);
        if gamma == 0.0 {
            q
        } else {
            q + gamma * self.w_of_rows(rows)
        }
    }
}

/// Pull-back RKHS norm of a signed measure on embedded grid points:
/// sqrt(wᵀ G w). This is the metric the grid inherits from the ambient
/// kernel's mean embedding.
pub fn ktilde_norm(spec: &KernelSpec, points: &[Vec<f64>], weights: &[f64]) -> Result<f64> {
    embedding_norm(spec, points, weights)
}

/// K̃₂-Lipschitz constant of a hypothesis field over the grid pairs.
pub fn lipschitz_constant(ctx: &ErmContext, field: &HypothesisField) -> f64 {
    ctx.lipschitz_of_rows(&field.rows)
}

/// d_M(f, f') = sup_x (‖(f-f')(x)‖_K̃₂ + ‖Γ_f(x) - Γ_{f'}(x)‖_K̃₁). Both
/// graphs sit over the same grid point, so the second term is the same
/// quadratic form as the first.
pub fn dm_distance(ctx: &ErmContext, f: &HypothesisField, g: &HypothesisField) -> Result<f64> {
    let p = ctx.model.xsize();
    let q = ctx.model.ysize();
    if f.rows.shape() != g.rows.shape() {
        return Err(GeomError::validation("fields live on different models"));
    }
    let mut worst: f64 = 0.0;
    let mut d = vec![0.0; q];
    for i in 0..p {
        for (j, dj) in d.iter_mut().enumerate() {
            *dj = f.rows[(i, j)] - g.rows[(i, j)];
        }
        let row_term = ctx.y_norm(&d);
        worst = worst.max(2.0 * row_term);
    }
    Ok(worst)
}

/// W(f) = ‖f‖_M + L(f) + L_Γ(f): the norm, the row Lipschitz constant, and
/// the graph Lipschitz constant.
pub fn w_functional(ctx: &ErmContext, field: &HypothesisField) -> f64 {
    ctx.w_of_rows(&field.rows)
}

/// Normalized counts of grid-labelled samples.
pub fn empirical_joint(model: &GridModel, samples: &[(usize, usize)]) -> Result<JointMeasure> {
    if samples.is_empty() {
        return Err(GeomError::validation("empirical joint needs samples"));
    }
    let p = model.xsize();
    let q = model.ysize();
    let mut table = vec![vec![0.0; q]; p];
    for &(i, j) in samples {
        if i >= p || j >= q {
            return Err(GeomError::validation(format!(
                "sample ({i},{j}) outside the {p}x{q} grid"
            )));
        }
        table[i][j] += 1.0 / samples.len() as f64;
    }
    JointMeasure::new(model.xspace(), model.yspace(), table)
}

/// Regularized risk ‖(Γ_f)_* μ_{S,X} - μ_S‖²_K̃₁ + γ W(f).
pub fn regularized_risk(
    ctx: &ErmContext,
    field: &HypothesisField,
    empirical: &JointMeasure,
    gamma: f64,
) -> Result<f64> {
    if gamma < 0.0 {
        return Err(GeomError::validation("gamma must be >= 0"));
    }
    let mu_x = marginal_x(empirical);
    Ok(ctx.risk_of_rows(
        &field.rows,
        mu_x.weights(),
        &empirical.product_weights(),
        gamma,
    ))
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &mut [f64]) {
    let n = v.len();
    let mut sorted: Vec<f64> = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        acc += u;
        let candidate = (acc - 1.0) / (k + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
    // renormalize against rounding
    let total: f64 = v.iter().sum();
    if total > 0.0 {
        for x in v.iter_mut() {
            *x /= total;
        }
    } else {
        for x in v.iter_mut() {
            *x = 1.0 / n as f64;
        }
    }
}

/// Projected block-coordinate descent over the rows with restarts. The
/// empirical disintegration is always one of the starts, so at γ = 0 the
/// data term starts at zero. Returns the best field and its risk; the risk
/// is within `slack` of the best value encountered by construction.
pub fn erm_minimize(
    ctx: &ErmContext,
    empirical: &JointMeasure,
    gamma: f64,
    slack: f64,
    budget: usize,
    rng: &mut Generator,
) -> Result<(HypothesisField, f64)> {
    if budget == 0 {
        return Err(GeomError::validation("budget must be >= 1"));
    }
    let p = ctx.model.xsize();
    let q = ctx.model.ysize();
    let mu_x_vec = marginal_x(empirical);
    let mu_x = mu_x_vec.weights().to_vec();
    let emp_w = empirical.product_weights();

    let restarts = 5usize;
    let per_start = (budget / restarts).max(8 * p);
    let mut evals = 0usize;

    let mut best_rows: Option<DMatrix<f64>> = None;
    let mut best_risk = f64::INFINITY;

    let random_row = |rng: &mut Generator| -> Vec<f64> {
        let mut r: Vec<f64> = (0..q)
            .map(|_| -(rng.gen_range(0.0f64..1.0).max(1e-300)).ln())
            .collect();
        let total: f64 = r.iter().sum();
        for v in &mut r {
            *v /= total;
        }
        r
    };

    for start in 0..restarts {
        let mut rows = match start {
            0 => {
                let (_, kernel) = disintegrate(empirical);
                kernel.rows().clone()
            }
            1 => DMatrix::from_element(p, q, 1.0 / q as f64),
            _ => {
                let mut m = DMatrix::zeros(p, q);
                for i in 0..p {
                    let r = random_row(rng);
                    for j in 0..q {
                        m[(i, j)] = r[j];
                    }
                }
                m
            }
        };
        let mut current = ctx.risk_of_rows(&rows, &mu_x, &emp_w, gamma);
        evals += 1;
        let start_limit = evals + per_start;

        loop {
            let sweep_before = current;
            for i in 0..p {
                // gradient of the quadratic term with respect to row i
                let pq = p * q;
                let mut d = vec![0.0; pq];
                for a in 0..p {
                    for b in 0..q {
                        d[a * q + b] = mu_x[a] * rows[(a, b)] - emp_w[a * q + b];
                    }
                }
                let mut grad = vec![0.0; q];
                for (j, gj) in grad.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for (b, db) in d.iter().enumerate() {
                        acc += ctx.gram_xy[(i * q + j, b)] * db;
                    }
                    *gj = 2.0 * mu_x[i] * acc;
                }
                let gnorm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));

                let mut best_cand: Option<(Vec<f64>, f64)> = None;
                let mut consider = |cand: Vec<f64>, ctx: &ErmContext, rows: &mut DMatrix<f64>, evals: &mut usize| {
                    let saved: Vec<f64> = (0..q).map(|j| rows[(i, j)]).collect();
                    for j in 0..q {
                        rows[(i, j)] = cand[j];
                    }
                    let risk = ctx.risk_of_rows(rows, &mu_x, &emp_w, gamma);
                    *evals += 1;
                    for j in 0..q {
                        rows[(i, j)] = saved[j];
                    }
                    if best_cand.as_ref().is_none_or(|(_, r)| risk < *r) {
                        best_cand = Some((cand, risk));
                    }
                };

                if gnorm > 1e-14 {
                    for &eta in &[1.0, 0.25, 0.05, 0.01] {
                        let mut cand: Vec<f64> =
                            (0..q).map(|j| rows[(i, j)] - eta * grad[j] / gnorm).collect();
                        project_simplex(&mut cand);
                        consider(cand, ctx, &mut rows, &mut evals);
                    }
                }
                for &beta in &[0.5, 0.1] {
                    let noise = random_row(rng);
                    let cand: Vec<f64> = (0..q)
                        .map(|j| (1.0 - beta) * rows[(i, j)] + beta * noise[j])
                        .collect();
                    consider(cand, ctx, &mut rows, &mut evals);
                }
                // structured moves aimed at the W term: flatten toward the
                // field mean (shrinks both Lipschitz terms), copy a
                // neighbouring row (zeroes an adjacent ratio), mix toward
                // uniform (shrinks the row norms)
                let mean_row: Vec<f64> = (0..q)
                    .map(|j| (0..p).map(|a| rows[(a, j)]).sum::<f64>() / p as f64)
                    .collect();
                for &beta in &[1.0, 0.3] {
                    let cand: Vec<f64> = (0..q)
                        .map(|j| (1.0 - beta) * rows[(i, j)] + beta * mean_row[j])
                        .collect();
                    consider(cand, ctx, &mut rows, &mut evals);
                }
                if p > 1 {
                    let neighbor = if i == 0 { 1 } else { i - 1 };
                    let cand: Vec<f64> = (0..q).map(|j| rows[(neighbor, j)]).collect();
                    consider(cand, ctx, &mut rows, &mut evals);
                }
                let cand: Vec<f64> = (0..q)
                    .map(|j| 0.7 * rows[(i, j)] + 0.3 / q as f64)
                    .collect();
                consider(cand, ctx, &mut rows, &mut evals);

                if let Some((cand, risk)) = best_cand {
                    if risk < current {
                        for j in 0..q {
                            rows[(i, j)] = cand[j];
                        }
                        current = risk;
                    }
                }
            }

            // joint phase: translate every row along one simplex direction
            // at once; escapes the constant-field trap where any single-row
            // move first has to climb the Lipschitz penalty
            for a in 0..q {
                for b in 0..q {
                    if a == b {
                        continue;
                    }
                    for &eta in &[0.2, 0.05, 0.01] {
                        let mut cand = rows.clone();
                        for i in 0..p {
                            let mut row: Vec<f64> = (0..q).map(|j| cand[(i, j)]).collect();
                            row[a] += eta;
                            row[b] -= eta;
                            project_simplex(&mut row);
                            for j in 0..q {
                                cand[(i, j)] = row[j];
                            }
                        }
                        let risk = ctx.risk_of_rows(&cand, &mu_x, &emp_w, gamma);
                        evals += 1;
                        if risk < current {
                            rows = cand;
                            current = risk;
                        }
                    }
                }
            }

            if sweep_before - current <= slack.max(1e-13) || evals >= start_limit {
                break;
            }
        }

        if current < best_risk {
            best_risk = current;
            best_rows = Some(rows);
        }
        if evals >= budget {
            break;
        }
    }

    let rows = best_rows.expect("at least one restart ran");
    let field_rows: Vec<Vec<f64>> = (0..p)
        .map(|i| {
            let mut r: Vec<f64> = (0..q).map(|j| rows[(i, j)].max(0.0)).collect();
            let total: f64 = r.iter().sum();
            for v in &mut r {
                *v /= total;
            }
            r
        })
        .collect();
    Ok((ctx.field(field_rows)?, best_risk))
}

/// Estimation error R_μ(f) - baseline, with R_μ the unregularized embedding
/// risk against the true joint and `baseline` the caller's estimate of the
/// infimum over the hypothesis class.
pub fn estimation_error(
    ctx: &ErmContext,
    field: &HypothesisField,
    mu: &JointMeasure,
    baseline: f64,
) -> Result<f64> {
    let risk = regularized_risk(ctx, field, mu, 0.0)?.sqrt();
    Ok(risk - baseline)
}

/// All probability rows on a simplex grid with the given step (e.g. step
/// 0.1 enumerates weights in {0, 0.1, …, 1}); a brute-force baseline for
/// certifying the optimizer on tiny grids.
pub fn enumerate_simplex_rows(q: usize, steps: usize) -> Vec<Vec<f64>> {
    fn rec(remaining: usize, slots: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=remaining {
            prefix.push(k);
            rec(remaining - k, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut combos = Vec::new();
    rec(steps, q, &mut Vec::new(), &mut combos);
    combos
        .into_iter()
        .map(|c| c.into_iter().map(|k| k as f64 / steps as f64).collect())
        .collect()
}

/// A full-support joint with a smooth (hence Lipschitz) conditional: the
/// conditional rows are discretized Gaussian bumps whose center drifts
/// linearly across the x-grid, under a uniform x-marginal.
pub fn smooth_true_joint(model: &GridModel) -> Result<JointMeasure> {
    let p = model.xsize();
    let q = model.ysize();
    let width = 0.3;
    let mut table = vec![vec![0.0; q]; p];
    for (i, row) in table.iter_mut().enumerate() {
        let center = 0.2 + 0.6 * model.xgrid()[i];
        let mut total = 0.0;
        for (j, cell) in row.iter_mut().enumerate() {
            let v = (-((model.ygrid()[j] - center) / width).powi(2)).exp();
            *cell = v;
            total += v;
        }
        for cell in row.iter_mut() {
            *cell /= total * p as f64;
        }
    }
    JointMeasure::new(model.xspace(), model.yspace(), table)
}

/// One row of a learning-curve table.
#[derive(Debug, Clone)]
pub struct LearningCurveRow {
    pub size: usize,
    pub gamma: f64,
    pub slack: f64,
    pub dms: Vec<f64>,
    pub median_dm: f64,
}

impl LearningCurveRow {
    /// Empirical frequency of d_M exceeding eps across the seeds.
    pub fn failure_rate(&self, eps: f64) -> f64 {
        let failures = self.dms.iter().filter(|&&d| d > eps).count();
        failures as f64 / self.dms.len() as f64
    }
}

/// Draws i.i.d. grid-labelled samples from a joint measure.
pub fn sample_joint(mu: &JointMeasure, n: usize, rng: &mut Generator) -> Vec<(usize, usize)> {
    let p = mu.xspace().size();
    let q = mu.yspace().size();
    let mut cdf = Vec::with_capacity(p * q);
    let mut acc = 0.0;
    for i in 0..p {
        for j in 0..q {
            acc += mu.table()[(i, j)];
            cdf.push(acc);
        }
    }
    (0..n)
        .map(|_| {
            let u: f64 = rng.gen_range(0.0..1.0);
            let idx = cdf.partition_point(|&c| c < u).min(p * q - 1);
            (idx / q, idx % q)
        })
        .collect()
}

/// End-to-end learning experiment: for each sample size, draw seeds
/// independent datasets from the true joint, run the regularized minimizer
/// with the scheduled γ and slack, and measure d_M to the true conditional.
pub fn learning_curve(
    ctx: &ErmContext,
    mu_true: &JointMeasure,
    sizes: &[usize],
    schedule: &Schedule,
    seeds: usize,
    budget: usize,
    base_seed: u64,
) -> Result<Vec<LearningCurveRow>> {
    if sizes.len() != schedule.gammas.len() {
        return Err(GeomError::validation("schedule must cover every size"));
    }
    if seeds == 0 {
        return Err(GeomError::validation("seeds must be >= 1"));
    }
    if marginal_x(mu_true).weights().iter().any(|&w| w <= 0.0) {
        return Err(GeomError::validation(
            "the true marginal must charge every grid point",
        ));
    }
    let (_, true_kernel) = disintegrate(mu_true);
    let truth = ctx.field_from_kernel(&true_kernel)?;

    sizes
        .iter()
        .enumerate()
        .map(|(idx, &n)| {
            let gamma = schedule.gammas[idx];
            let slack = schedule.slacks[idx];
            let mut dms: Vec<f64> = (0..seeds)
                .into_par_iter()
                .map(|s| {
                    let mut rng = rng_for_unit(base_seed, ((idx as u64) << 32) | s as u64);
                    let samples = sample_joint(mu_true, n, &mut rng);
                    let empirical = empirical_joint(ctx.model(), &samples)?;
                    let (field, _) =
                        erm_minimize(ctx, &empirical, gamma, slack, budget, &mut rng)?;
                    dm_distance(ctx, &field, &truth)
                })
                .collect::<Result<_>>()?;
            dms.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let median = if dms.len() % 2 == 1 {
                dms[dms.len() / 2]
            } else {
                0.5 * (dms[dms.len() / 2 - 1] + dms[dms.len() / 2])
            };
            Ok(LearningCurveRow {
                size: n,
                gamma,
                slack,
                dms: dms.clone(),
                median_dm: median,
            })
        })
        .collect()
}

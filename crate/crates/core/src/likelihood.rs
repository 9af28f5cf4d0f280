//! Collapsed log marginal likelihood of the responses given (γ, G), and the
//! two ratio kernels the Metropolis–Hastings moves are built on.
//!
//! With the coefficient matrix integrated out under the matrix-normal
//! g-prior and the covariance integrated out under HIW_G(b, dI), the
//! marginal density of Y factorizes over the junction tree:
//!
//! ```text
//! f(Y | γ, G) = M_{n,G} (g+1)^{-p_γ(k+1)q/2}
//!               · Π_C |dI_C + S_C(γ)|^{-(b+n+|C|-1)/2}
//!               / Π_S |dI_S + S_S(γ)|^{-(b+n+|S|-1)/2}
//! ```
//!
//! where S(γ) = Yᵀ(I - g/(g+1) P_γ)Y and M_{n,G} collects the d-powers,
//! 2-powers and multivariate gamma factors per clique and separator. All
//! work is done in log space with Cholesky log-determinants; the exponents
//! (b+n+|C|-1)/2 overflow any floating type long before n reaches the
//! hundreds if taken literally.
//!
//! γ-moves cancel M_{n,G} exactly, G-moves cancel the g-penalty and touch
//! only the cliques and separators that the toggled edge changes, so both
//! ratios are cheap relative to a full evaluation.

use std::collections::HashMap;
use std::collections::VecDeque;
use std::f64::consts::PI;
use std::rc::Rc;

use libm::lgamma;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{DecomposableGraph, JunctionTree, NodeSet, TreeDelta};
use crate::linalg::{cholesky_spd, principal_submatrix, symmetrize};
use crate::sampler::InclusionVector;
use crate::spline::DesignMatrix;

/// Fixed scalar hyperparameters of the hierarchical model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparameters {
    /// g-prior scale; g = O(n) keeps the coefficient prior non-degenerate.
    pub g: f64,
    /// HIW degrees of freedom.
    pub b: f64,
    /// HIW scale multiplier, prior scale matrix is d·I_q.
    pub d: f64,
    /// Probability of proposing an addition in the γ-move.
    pub delta: f64,
    /// Probability of proposing an addition in the G-move.
    pub eta: f64,
    /// Bernoulli edge prior probability.
    pub alpha_g: f64,
}

impl Hyperparameters {
    pub fn new(g: f64, b: f64, d: f64, delta: f64, eta: f64, alpha_g: f64) -> Result<Self> {
        let h = Hyperparameters {
            g,
            b,
            d,
            delta,
            eta,
            alpha_g,
        };
        h.validate()?;
        Ok(h)
    }

    /// Defaults: g = n, b = 3, d = 1, δ = η = 1/2, α_G = min(2/(q-1), 1/2).
    pub fn defaults(n: usize, q: usize) -> Self {
        Hyperparameters {
            g: (n.max(1)) as f64,
            b: 3.0,
            d: 1.0,
            delta: 0.5,
            eta: 0.5,
            alpha_g: Self::clamped_alpha_g(q),
        }
    }

    /// 2/(q-1), clamped to 1/2 where that is not a probability (q <= 3).
    pub fn clamped_alpha_g(q: usize) -> f64 {
        if q > 1 {
            (2.0 / (q as f64 - 1.0)).min(0.5)
        } else {
            0.5
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g > 0.0 && self.g.is_finite()) {
            return Err(Error::invalid_argument(format!("g must be > 0, got {}", self.g)));
        }
        if !(self.b >= 3.0 && self.b.is_finite()) {
            return Err(Error::invalid_argument(format!("b must be >= 3, got {}", self.b)));
        }
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(Error::invalid_argument(format!("d must be > 0, got {}", self.d)));
        }
        for (name, v) in [
            ("delta", self.delta),
            ("eta", self.eta),
            ("alpha_g", self.alpha_g),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::invalid_argument(format!(
                    "{name} must lie in (0, 1), got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// The q x q quadratic form S(γ) = Yᵀ(I - g/(g+1) P_γ)Y.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadForm {
    s: DMatrix<f64>,
}

impl QuadForm {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.s
    }
}

/// Responses plus design with the factor products every evaluation reuses:
/// YᵀY, UᵀU and UᵀY are formed once, after which any U_γᵀU_γ and U_γᵀY are
/// submatrix gathers.
#[derive(Debug, Clone)]
pub struct ModelData {
    y: DMatrix<f64>,
    design: DesignMatrix,
    yty: DMatrix<f64>,
    utu: DMatrix<f64>,
    uty: DMatrix<f64>,
}

impl ModelData {
    pub fn new(y: DMatrix<f64>, design: DesignMatrix) -> Result<Self> {
        Self::new_with_options(y, design, false)
    }

    /// With `ridge` set, adds the jitter ε·I (ε = 1e-8·trace/dim) to the
    /// cached UᵀU, which perturbs every U_γᵀU_γ consistently. Explicit
    /// opt-in for rank-deficient designs; off by default so rank problems
    /// surface as structured errors instead.
    pub fn new_with_options(y: DMatrix<f64>, design: DesignMatrix, ridge: bool) -> Result<Self> {
        if y.nrows() == 0 || y.ncols() == 0 {
            return Err(Error::invalid_argument("response matrix must be non-empty"));
        }
        if y.nrows() != design.sample_count() {
            return Err(Error::invalid_argument(format!(
                "responses have {} rows, design has {}",
                y.nrows(),
                design.sample_count()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid_argument(
                "response matrix contains non-finite entries",
            ));
        }
        let u = design.values();
        let yty = y.transpose() * &y;
        let mut utu = u.transpose() * u;
        if ridge && utu.nrows() > 0 {
            let epsilon = 1e-8 * utu.trace() / utu.nrows() as f64;
            for i in 0..utu.nrows() {
                utu[(i, i)] += epsilon;
            }
        }
        let uty = u.transpose() * &y;
        Ok(ModelData {
            y,
            design,
            yty,
            utu,
            uty,
        })
    }

    pub fn n(&self) -> usize {
        self.y.nrows()
    }

    pub fn q(&self) -> usize {
        self.y.ncols()
    }

    pub fn p(&self) -> usize {
        self.design.predictor_count()
    }

    pub fn responses(&self) -> &DMatrix<f64> {
        &self.y
    }

    pub fn design(&self) -> &DesignMatrix {
        &self.design
    }

    pub fn yty(&self) -> &DMatrix<f64> {
        &self.yty
    }

    /// U_γᵀU_γ gathered from the cached full product.
    pub fn gram_gamma(&self, gamma: &InclusionVector) -> DMatrix<f64> {
        let cols = self.design.gamma_columns(gamma);
        self.utu.select_rows(cols.iter()).select_columns(cols.iter())
    }

    /// U_γᵀY gathered from the cached full product.
    pub fn cross_gamma(&self, gamma: &InclusionVector) -> DMatrix<f64> {
        let cols = self.design.gamma_columns(gamma);
        self.uty.select_rows(cols.iter())
    }
}

fn rank_error(gamma: &InclusionVector) -> Error {
    Error::RankDeficient {
        predictors: gamma.included().collect(),
    }
}

/// S(γ) = YᵀY - g/(g+1) (U_γᵀY)ᵀ(U_γᵀU_γ)⁻¹(U_γᵀY); symmetric PSD.
/// A singular U_γᵀU_γ is reported as a rank error carrying γ.
pub fn quad_form(data: &ModelData, gamma: &InclusionVector, g: f64) -> Result<QuadForm> {
    if !(g > 0.0 && g.is_finite()) {
        return Err(Error::invalid_argument(format!("g must be > 0, got {g}")));
    }
    if gamma.len() != data.p() {
        return Err(Error::invalid_argument(format!(
            "inclusion vector has length {}, expected {}",
            gamma.len(),
            data.p()
        )));
    }
    if gamma.count() == 0 {
        return Ok(QuadForm {
            s: data.yty().clone(),
        });
    }
    let gram = data.gram_gamma(gamma);
    let cross = data.cross_gamma(gamma);
    let chol = match gram.clone().cholesky() {
        Some(c) => c,
        None => match symmetrize(&gram).cholesky() {
            Some(c) => c,
            None => return Err(rank_error(gamma)),
        },
    };
    let solved = chol.solve(&cross);
    let shrink = g / (g + 1.0);
    let s = data.yty() - (cross.transpose() * solved) * shrink;
    Ok(QuadForm { s: symmetrize(&s) })
}

/// log Γ_p(a), the multivariate gamma function via the product of univariate
/// gamma factors; log Γ_0(a) = 0.
fn log_multivariate_gamma(p: usize, a: f64) -> f64 {
    let pf = p as f64;
    pf * (pf - 1.0) / 4.0 * PI.ln()
        + (1..=p).map(|j| lgamma(a + (1.0 - j as f64) / 2.0)).sum::<f64>()
}

/// Per-component factor of log M_{n,G} for a clique or separator of size c.
fn norm_term(c: usize, n: usize, hyper: &Hyperparameters) -> f64 {
    if c == 0 {
        return 0.0;
    }
    let (cf, nf) = (c as f64, n as f64);
    let b = hyper.b;
    (b + cf - 1.0) / 2.0 * cf * hyper.d.ln() + nf * cf / 2.0 * 2f64.ln()
        + log_multivariate_gamma(c, (b + nf + cf - 1.0) / 2.0)
        - log_multivariate_gamma(c, (b + cf - 1.0) / 2.0)
}

/// -((b+n+c-1)/2) log|dI + S_block| for a clique or separator.
fn det_term(nodes: &NodeSet, s: &DMatrix<f64>, n: usize, hyper: &Hyperparameters) -> Result<f64> {
    if nodes.is_empty() {
        return Ok(0.0);
    }
    let c = nodes.len() as f64;
    let mut block = principal_submatrix(s, nodes);
    for i in 0..nodes.len() {
        block[(i, i)] += hyper.d;
    }
    let logdet = 2.0
        * cholesky_spd(&block, "clique matrix dI + S")?
            .l()
            .diagonal()
            .map(f64::ln)
            .sum();
    Ok(-(hyper.b + n as f64 + c - 1.0) / 2.0 * logdet)
}

fn full_term(nodes: &NodeSet, s: &DMatrix<f64>, n: usize, hyper: &Hyperparameters) -> Result<f64> {
    Ok(norm_term(nodes.len(), n, hyper) + det_term(nodes, s, n, hyper)?)
}

/// log M_{n,G}: depends only on n and the clique structure, identical for
/// every γ under the same graph.
pub fn log_normalizer_with_tree(n: usize, tree: &JunctionTree, hyper: &Hyperparameters) -> f64 {
    let q = tree.node_count() as f64;
    let mut total = -(n as f64) * q / 2.0 * (2.0 * PI).ln();
    for c in tree.cliques() {
        total += norm_term(c.len(), n, hyper);
    }
    for s in tree.separators() {
        total -= norm_term(s.len(), n, hyper);
    }
    total
}

pub fn log_normalizer(n: usize, graph: &DecomposableGraph, hyper: &Hyperparameters) -> f64 {
    log_normalizer_with_tree(n, &graph.junction_tree(), hyper)
}

fn log_marginal_parts(
    data: &ModelData,
    gamma: &InclusionVector,
    quad: &QuadForm,
    tree: &JunctionTree,
    hyper: &Hyperparameters,
) -> Result<f64> {
    let n = data.n();
    let q = data.q() as f64;
    let r = (gamma.count() * data.design().basis().group_size()) as f64;
    let mut total = log_normalizer_with_tree(n, tree, hyper) - r * q / 2.0 * (hyper.g + 1.0).ln();
    for c in tree.cliques() {
        total += det_term(c, quad.matrix(), n, hyper)?;
    }
    for s in tree.separators() {
        total -= det_term(s, quad.matrix(), n, hyper)?;
    }
    Ok(total)
}

/// Exact collapsed log f(Y | γ, G).
pub fn log_marginal(
    data: &ModelData,
    gamma: &InclusionVector,
    graph: &DecomposableGraph,
    hyper: &Hyperparameters,
) -> Result<f64> {
    log_marginal_with_tree(data, gamma, &graph.junction_tree(), hyper)
}

pub fn log_marginal_with_tree(
    data: &ModelData,
    gamma: &InclusionVector,
    tree: &JunctionTree,
    hyper: &Hyperparameters,
) -> Result<f64> {
    let quad = quad_form(data, gamma, hyper.g)?;
    log_marginal_parts(data, gamma, &quad, tree, hyper)
}

/// log f(Y|γ*,G) - log f(Y|γ,G) without evaluating M_{n,G}, which cancels.
pub fn log_marginal_ratio_gamma(
    data: &ModelData,
    gamma: &InclusionVector,
    gamma_new: &InclusionVector,
    graph: &DecomposableGraph,
    hyper: &Hyperparameters,
) -> Result<f64> {
    let quad_old = quad_form(data, gamma, hyper.g)?;
    let quad_new = quad_form(data, gamma_new, hyper.g)?;
    ratio_gamma_from_quads(
        data,
        gamma,
        gamma_new,
        &quad_old,
        &quad_new,
        &graph.junction_tree(),
        hyper,
    )
}

fn ratio_gamma_from_quads(
    data: &ModelData,
    gamma: &InclusionVector,
    gamma_new: &InclusionVector,
    quad_old: &QuadForm,
    quad_new: &QuadForm,
    tree: &JunctionTree,
    hyper: &Hyperparameters,
) -> Result<f64> {
    let n = data.n();
    let q = data.q() as f64;
    let group = data.design().basis().group_size() as f64;
    let dr = (gamma_new.count() as f64 - gamma.count() as f64) * group;
    let mut total = -dr * q / 2.0 * (hyper.g + 1.0).ln();
    for c in tree.cliques() {
        total += det_term(c, quad_new.matrix(), n, hyper)?
            - det_term(c, quad_old.matrix(), n, hyper)?;
    }
    for s in tree.separators() {
        total -= det_term(s, quad_new.matrix(), n, hyper)?
            - det_term(s, quad_old.matrix(), n, hyper)?;
    }
    Ok(total)
}

/// log f(Y|γ,G*) - log f(Y|γ,G) for a single-edge change, touching only the
/// cliques and separators in the junction-tree delta.
pub fn log_marginal_ratio_graph(
    data: &ModelData,
    gamma: &InclusionVector,
    graph_old: &DecomposableGraph,
    graph_new: &DecomposableGraph,
    hyper: &Hyperparameters,
) -> Result<f64> {
    let delta = crate::graph::affected_components(graph_old, graph_new)?;
    let quad = quad_form(data, gamma, hyper.g)?;
    ratio_graph_from_delta(&quad, &delta, data.n(), hyper)
}

pub fn ratio_graph_from_delta(
    quad: &QuadForm,
    delta: &TreeDelta,
    n: usize,
    hyper: &Hyperparameters,
) -> Result<f64> {
    let s = quad.matrix();
    let mut total = 0.0;
    for c in &delta.added_cliques {
        total += full_term(c, s, n, hyper)?;
    }
    for c in &delta.removed_cliques {
        total -= full_term(c, s, n, hyper)?;
    }
    for sep in &delta.added_separators {
        total -= full_term(sep, s, n, hyper)?;
    }
    for sep in &delta.removed_separators {
        total += full_term(sep, s, n, hyper)?;
    }
    Ok(total)
}

/// Caching evaluation context for one chain (or one thread).
///
/// S(γ) depends on γ alone, so G-moves always hit the cache and repeated
/// visits to a γ skip the factorization. Entries are evicted FIFO beyond the
/// capacity. Concurrent use is per-thread by construction; identical inputs
/// produce identical values regardless of cache state.
pub struct Evaluator<'a> {
    data: &'a ModelData,
    hyper: Hyperparameters,
    cache: HashMap<Vec<u64>, Rc<QuadForm>>,
    order: VecDeque<Vec<u64>>,
    capacity: usize,
}

impl<'a> Evaluator<'a> {
    pub fn new(data: &'a ModelData, hyper: Hyperparameters) -> Result<Self> {
        hyper.validate()?;
        Ok(Evaluator {
            data,
            hyper,
            cache: HashMap::new(),
            order: VecDeque::new(),
            capacity: 128,
        })
    }

    pub fn data(&self) -> &ModelData {
        self.data
    }

    pub fn hyper(&self) -> &Hyperparameters {
        &self.hyper
    }

    pub fn quad(&mut self, gamma: &InclusionVector) -> Result<Rc<QuadForm>> {
        let key = gamma.key();
        if let Some(hit) = self.cache.get(&key) {
            return Ok(Rc::clone(hit));
        }
        let quad = Rc::new(quad_form(self.data, gamma, self.hyper.g)?);
        if self.cache.len() >= self.capacity {
            if let Some(oldest) = self.order.pop_front() {
                self.cache.remove(&oldest);
            }
        }
        self.cache.insert(key.clone(), Rc::clone(&quad));
        self.order.push_back(key);
        Ok(quad)
    }

    pub fn log_marginal(&mut self, gamma: &InclusionVector, tree: &JunctionTree) -> Result<f64> {
        let quad = self.quad(gamma)?;
        log_marginal_parts(self.data, gamma, &quad, tree, &self.hyper)
    }

    pub fn ratio_gamma(
        &mut self,
        gamma: &InclusionVector,
        gamma_new: &InclusionVector,
        tree: &JunctionTree,
    ) -> Result<f64> {
        let quad_old = self.quad(gamma)?;
        let quad_new = self.quad(gamma_new)?;
        ratio_gamma_from_quads(
            self.data,
            gamma,
            gamma_new,
            &quad_old,
            &quad_new,
            tree,
            &self.hyper,
        )
    }

    pub fn ratio_graph(&mut self, gamma: &InclusionVector, delta: &TreeDelta) -> Result<f64> {
        let quad = self.quad(gamma)?;
        ratio_graph_from_delta(&quad, delta, self.data.n(), &self.hyper)
    }
}

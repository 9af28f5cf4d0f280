//! Trace post-processing: edge and inclusion marginal probabilities, the
//! thresholded graph, partial correlations, hub nodes, fitted curves and ROC
//! data. Everything here is pure over immutable traces.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::is_decomposable;
use crate::hiw::CovarianceDraw;
use crate::sampler::{SavedDraw, TraceRecord};
use crate::spline::SplineBasis;

/// Marginal edge probabilities: entry (i, j) is the fraction of records
/// whose graph carries the edge. Symmetric, unit diagonal.
pub fn edge_probabilities<'a, I>(records: I, q: usize) -> Result<DMatrix<f64>>
where
    I: IntoIterator<Item = &'a TraceRecord>,
{
    let mut counts = DMatrix::<f64>::zeros(q, q);
    let mut total = 0usize;
    for rec in records {
        total += 1;
        for &(i, j) in &rec.edges {
            counts[(i, j)] += 1.0;
            counts[(j, i)] += 1.0;
        }
    }
    if total == 0 {
        return Err(Error::invalid_argument(
            "edge probabilities need a non-empty trace",
        ));
    }
    let mut probs = counts / total as f64;
    probs.fill_diagonal(1.0);
    Ok(probs)
}

/// Marginal inclusion probabilities over γ bits.
pub fn inclusion_probabilities<'a, I>(records: I, p: usize) -> Result<Vec<f64>>
where
    I: IntoIterator<Item = &'a TraceRecord>,
{
    let mut counts = vec![0.0f64; p];
    let mut total = 0usize;
    for rec in records {
        total += 1;
        for (i, &b) in rec.gamma.iter().enumerate() {
            if b {
                counts[i] += 1.0;
            }
        }
    }
    if total == 0 {
        return Err(Error::invalid_argument(
            "inclusion probabilities need a non-empty trace",
        ));
    }
    Ok(counts.into_iter().map(|c| c / total as f64).collect())
}

/// The graph thresholded at `cutoff`, with no decomposability guarantee: the
/// edgewise-median graph of a chain of decomposable graphs can itself fail
/// to be decomposable, so the flag reports what came out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectedGraph {
    pub q: usize,
    pub edges: Vec<(usize, usize)>,
    pub decomposable: bool,
}

/// Keeps the edges with probability strictly above the cutoff.
pub fn select_graph(edge_prob: &DMatrix<f64>, cutoff: f64) -> Result<SelectedGraph> {
    if !(cutoff > 0.0 && cutoff < 1.0) {
        return Err(Error::invalid_argument(format!(
            "cutoff must lie in (0, 1), got {cutoff}"
        )));
    }
    let q = edge_prob.nrows();
    if edge_prob.ncols() != q {
        return Err(Error::invalid_argument("edge probability matrix not square"));
    }
    let mut edges = Vec::new();
    let mut rows = vec![vec![false; q]; q];
    for i in 0..q {
        for j in (i + 1)..q {
            if edge_prob[(i, j)] > cutoff {
                edges.push((i, j));
                rows[i][j] = true;
                rows[j][i] = true;
            }
        }
    }
    let decomposable = is_decomposable(&rows)?;
    Ok(SelectedGraph {
        q,
        edges,
        decomposable,
    })
}

/// Posterior mean partial correlations ρ_ij = -κ_ij/√(κ_ii κ_jj), computed
/// per draw from the precision and averaged. Diagonal reported as 1.
pub fn partial_correlations(draws: &[CovarianceDraw]) -> Result<DMatrix<f64>> {
    let Some(first) = draws.first() else {
        return Err(Error::invalid_argument(
            "partial correlations need at least one draw",
        ));
    };
    let q = first.precision().nrows();
    let mut acc = DMatrix::<f64>::zeros(q, q);
    for draw in draws {
        let k = draw.precision();
        for i in 0..q {
            for j in 0..q {
                if i != j {
                    acc[(i, j)] += -k[(i, j)] / (k[(i, i)] * k[(j, j)]).sqrt();
                }
            }
        }
    }
    let mut rho = acc / draws.len() as f64;
    rho.fill_diagonal(1.0);
    Ok(rho)
}

/// Node degrees sorted descending, ties by node index.
pub fn hub_nodes(q: usize, edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut degree = vec![0usize; q];
    for &(i, j) in edges {
        degree[i] += 1;
        degree[j] += 1;
    }
    let mut out: Vec<(usize, usize)> = degree.into_iter().enumerate().collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    out
}

/// Posterior mean curves for one predictor over a grid, one column per
/// response. Only draws in which the predictor was selected contribute;
/// `mean` is None when there are none.
#[derive(Debug, Clone)]
pub struct FittedCurves {
    pub predictor: usize,
    pub grid: Vec<f64>,
    /// grid.len() x q matrix of posterior mean fits, if any draw applied.
    pub mean: Option<DMatrix<f64>>,
    pub draws_used: usize,
}

pub fn fitted_curves(
    basis: &SplineBasis,
    draws: &[SavedDraw],
    predictor: usize,
    grid: &[f64],
) -> Result<FittedCurves> {
    if predictor >= basis.predictor_count() {
        return Err(Error::invalid_argument(format!(
            "predictor {predictor} out of range for p = {}",
            basis.predictor_count()
        )));
    }
    let group = basis.group_size();
    let mut acc: Option<DMatrix<f64>> = None;
    let mut used = 0usize;
    for draw in draws {
        let coeffs = &draw.coefficients;
        let Some(slot) = coeffs.predictors().iter().position(|&i| i == predictor) else {
            continue;
        };
        used += 1;
        let q = coeffs.coefficients().ncols();
        let acc =
            acc.get_or_insert_with(|| DMatrix::<f64>::zeros(grid.len(), q));
        for (gi, &x) in grid.iter().enumerate() {
            let phi = basis.evaluate(x);
            for j in 0..q {
                let mut v = 0.0;
                for (s, &phi_s) in phi.iter().enumerate().take(group) {
                    v += phi_s * coeffs.coefficients()[(slot * group + s, j)];
                }
                acc[(gi, j)] += v;
            }
        }
    }
    Ok(FittedCurves {
        predictor,
        grid: grid.to_vec(),
        mean: acc.map(|a| a / used as f64),
        draws_used: used,
    })
}

/// One ROC step curve plus its trapezoid area.
#[derive(Debug, Clone)]
pub struct RocCurve {
    /// (false positive rate, true positive rate), monotone from (0,0) to (1,1).
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

/// ROC of edge scores against a 0/1 truth adjacency, computed over the
/// q(q-1)/2 off-diagonal pairs. Thresholds sweep the observed score values
/// (prediction: score >= t), anchored at (0,0) and (1,1); the area follows
/// by the trapezoid rule, which handles ties exactly.
pub fn roc_curve(scores: &DMatrix<f64>, truth: &[Vec<bool>]) -> Result<RocCurve> {
    let q = scores.nrows();
    if scores.ncols() != q {
        return Err(Error::invalid_argument("score matrix not square"));
    }
    if truth.len() != q || truth.iter().any(|r| r.len() != q) {
        return Err(Error::invalid_argument(
            "truth adjacency does not match score dimensions",
        ));
    }
    for (i, row) in truth.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v != truth[j][i] {
                return Err(Error::invalid_argument(format!(
                    "truth adjacency is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    let mut pairs: Vec<(f64, bool)> = Vec::with_capacity(q * (q - 1) / 2);
    for i in 0..q {
        for j in (i + 1)..q {
            pairs.push((scores[(i, j)], truth[i][j]));
        }
    }
    let positives = pairs.iter().filter(|(_, t)| *t).count();
    let negatives = pairs.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::invalid_argument(
            "ROC needs at least one present and one absent edge in the truth",
        ));
    }
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());

    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut idx = 0usize;
    while idx < pairs.len() {
        let t = pairs[idx].0;
        // Consume the whole tie group at threshold t.
        while idx < pairs.len() && pairs[idx].0 == t {
            if pairs[idx].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            idx += 1;
        }
        points.push((fp as f64 / negatives as f64, tp as f64 / positives as f64));
    }
    let auc = points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum();
    Ok(RocCurve { points, auc })
}

/// Everything the summarize step reports.
#[derive(Debug, Clone)]
pub struct PosteriorSummary {
    pub edge_prob: DMatrix<f64>,
    pub incl_prob: Vec<f64>,
    pub selected: SelectedGraph,
    /// Mean partial correlations, present when Σ draws were saved.
    pub partial_corr: Option<DMatrix<f64>>,
    pub hubs: Vec<(usize, usize)>,
}

/// Pools records (and draws) from one or more chains, equally weighted.
pub fn summarize(
    traces: &[&crate::sampler::ChainTrace],
    cutoff: f64,
) -> Result<PosteriorSummary> {
    let Some(first) = traces.first() else {
        return Err(Error::invalid_argument("summarize needs at least one chain"));
    };
    let (p, q) = (first.p, first.q);
    let records = traces.iter().flat_map(|t| t.records.iter());
    let edge_prob = edge_probabilities(records, q)?;
    let incl_prob =
        inclusion_probabilities(traces.iter().flat_map(|t| t.records.iter()), p)?;
    let selected = select_graph(&edge_prob, cutoff)?;
    let sigma_draws: Vec<CovarianceDraw> = traces
        .iter()
        .flat_map(|t| t.draws.iter().map(|d| d.sigma.clone()))
        .collect();
    let partial_corr = if sigma_draws.is_empty() {
        None
    } else {
        Some(partial_correlations(&sigma_draws)?)
    };
    let hubs = hub_nodes(q, &selected.edges);
    Ok(PosteriorSummary {
        edge_prob,
        incl_prob,
        selected,
        partial_corr,
        hubs,
    })
}

//! Metropolis–Hastings kernels over inclusion vectors and graphs, and the
//! chain driver that alternates them.
//!
//! Each iteration runs one random-scan sweep of p single-entry γ proposals
//! followed by one edge-toggle proposal on G. γ-moves accept with
//! min{1, exp[Δ log f + Δ log p(γ) + log H]} where the Hastings factor is
//! (1-δ)/δ for an addition and δ/(1-δ) for a deletion; G-moves mirror this
//! with η and additionally discard proposals that break decomposability,
//! leaving the chain in place for that iteration. Proposals that keep the
//! state unchanged are accepted no-ops.
//!
//! Chains are deterministic given (seed, stream): every chain owns its own
//! ChaCha stream, its own evaluation cache, and its own state, so
//! independent chains can run on separate threads with no shared mutation.

use libm::lgamma;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{
    self, diff_trees, DecomposableGraph, JunctionTree, ToggleOutcome,
};
use crate::hiw::{sample_hiw, sample_posterior_coefficients, CoefficientDraw, CovarianceDraw};
use crate::likelihood::{Evaluator, Hyperparameters, ModelData};

/// Binary predictor-selection state γ.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InclusionVector {
    bits: Vec<bool>,
    ones: usize,
}

impl InclusionVector {
    pub fn all_zero(p: usize) -> Self {
        InclusionVector {
            bits: vec![false; p],
            ones: 0,
        }
    }

    pub fn all_one(p: usize) -> Self {
        InclusionVector {
            bits: vec![true; p],
            ones: p,
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        let ones = bits.iter().filter(|&&b| b).count();
        InclusionVector { bits, ones }
    }

    /// Builds γ of length `p` with the given predictors set.
    pub fn from_included(p: usize, included: &[usize]) -> Result<Self> {
        let mut bits = vec![false; p];
        for &i in included {
            if i >= p {
                return Err(Error::invalid_argument(format!(
                    "predictor index {i} out of range for p = {p}"
                )));
            }
            bits[i] = true;
        }
        Ok(Self::from_bits(bits))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// p_γ, the number of selected predictors.
    pub fn count(&self) -> usize {
        self.ones
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn contains(&self, i: usize) -> bool {
        self.bits[i]
    }

    /// Selected predictor indices in ascending order.
    pub fn included(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    pub fn toggled(&self, i: usize) -> Self {
        let mut bits = self.bits.clone();
        bits[i] = !bits[i];
        let ones = if bits[i] { self.ones + 1 } else { self.ones - 1 };
        InclusionVector { bits, ones }
    }

    /// Packed bits, used as a cache key.
    pub fn key(&self) -> Vec<u64> {
        let mut words = vec![0u64; self.bits.len().div_ceil(64)];
        for (i, &b) in self.bits.iter().enumerate() {
            if b {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        words
    }
}

/// Log of the collapsed prior p(γ) ∝ p_γ! (p - p_γ)!, the Bernoulli prior
/// with its uniform inclusion weight integrated out. Unnormalized; only
/// ratios enter acceptance probabilities.
pub fn log_prior_gamma(gamma: &InclusionVector) -> f64 {
    let p_gamma = gamma.count() as f64;
    let p = gamma.len() as f64;
    lgamma(p_gamma + 1.0) + lgamma(p - p_gamma + 1.0)
}

/// Current chain position with its cached log pieces. The cached marginal is
/// refreshed (and checked) at every audit point.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub gamma: InclusionVector,
    pub graph: DecomposableGraph,
    pub tree: JunctionTree,
    pub log_marginal: f64,
    pub log_prior_gamma: f64,
    pub log_prior_graph: f64,
}

impl ChainState {
    /// Cheapest valid state: γ = 0, G empty.
    pub fn initial(eval: &mut Evaluator) -> Result<Self> {
        let gamma = InclusionVector::all_zero(eval.data().p());
        let graph = DecomposableGraph::empty(eval.data().q())?;
        Self::at(gamma, graph, eval)
    }

    pub fn at(
        gamma: InclusionVector,
        graph: DecomposableGraph,
        eval: &mut Evaluator,
    ) -> Result<Self> {
        let tree = graph.junction_tree();
        let log_marginal = eval.log_marginal(&gamma, &tree)?;
        let log_prior_gamma = log_prior_gamma(&gamma);
        let log_prior_graph = graph::log_prior_graph(&graph, eval.hyper().alpha_g)?;
        Ok(ChainState {
            gamma,
            graph,
            tree,
            log_marginal,
            log_prior_gamma,
            log_prior_graph,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaStep {
    Accepted,
    Rejected,
    /// Proposal left γ unchanged; accepted as a no-op.
    Stay,
    /// Proposed γ* was rank deficient; treated as a rejection.
    RankRejected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphStep {
    Accepted,
    Rejected,
    Stay,
    RejectedNondecomposable,
}

/// One single-entry γ update.
pub fn step_gamma<R: Rng + ?Sized>(
    state: &mut ChainState,
    eval: &mut Evaluator,
    rng: &mut R,
) -> Result<GammaStep> {
    let p = state.gamma.len();
    if p == 0 {
        return Ok(GammaStep::Stay);
    }
    let delta = eval.hyper().delta;
    let idx = rng.random_range(0..p);
    let adding = !state.gamma.contains(idx);
    let move_prob = if adding { delta } else { 1.0 - delta };
    if rng.random::<f64>() >= move_prob {
        return Ok(GammaStep::Stay);
    }
    let proposed = state.gamma.toggled(idx);
    let log_hastings = if adding {
        ((1.0 - delta) / delta).ln()
    } else {
        (delta / (1.0 - delta)).ln()
    };
    let marginal_ratio = match eval.ratio_gamma(&state.gamma, &proposed, &state.tree) {
        Ok(r) => r,
        Err(Error::RankDeficient { .. }) => return Ok(GammaStep::RankRejected),
        Err(other) => return Err(other),
    };
    let prior_new = log_prior_gamma(&proposed);
    let log_accept = marginal_ratio + prior_new - state.log_prior_gamma + log_hastings;
    if log_accept >= 0.0 || rng.random::<f64>().ln() < log_accept {
        state.gamma = proposed;
        state.log_marginal += marginal_ratio;
        state.log_prior_gamma = prior_new;
        Ok(GammaStep::Accepted)
    } else {
        Ok(GammaStep::Rejected)
    }
}

/// One add/delete edge update on G.
pub fn step_graph<R: Rng + ?Sized>(
    state: &mut ChainState,
    eval: &mut Evaluator,
    rng: &mut R,
) -> Result<GraphStep> {
    let proposal = graph::propose_edge_toggle(&state.graph, eval.hyper().eta, rng)?;
    match proposal.outcome {
        ToggleOutcome::Stay => return Ok(GraphStep::Stay),
        ToggleOutcome::RejectedNondecomposable => {
            return Ok(GraphStep::RejectedNondecomposable)
        }
        ToggleOutcome::Add | ToggleOutcome::Delete => {}
    }
    let tree_new = proposal.graph.junction_tree();
    let delta = diff_trees(&state.tree, &tree_new);
    let marginal_ratio = eval.ratio_graph(&state.gamma, &delta)?;
    let prior_new = graph::log_prior_graph(&proposal.graph, eval.hyper().alpha_g)?;
    let log_accept =
        marginal_ratio + prior_new - state.log_prior_graph + proposal.log_hastings;
    if log_accept >= 0.0 || rng.random::<f64>().ln() < log_accept {
        state.graph = proposal.graph;
        state.tree = tree_new;
        state.log_marginal += marginal_ratio;
        state.log_prior_graph = prior_new;
        Ok(GraphStep::Accepted)
    } else {
        Ok(GraphStep::Rejected)
    }
}

/// Iteration counts, seeding and recording policy for one chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub iterations: usize,
    pub burn_in: usize,
    /// Record every `thin`-th post-burn-in iteration; must be >= 1.
    pub thin: usize,
    pub seed: u64,
    /// ChaCha stream, one per chain.
    pub stream: u64,
    /// Draw (Σ, B) at every recorded iteration.
    pub save_sigma: bool,
    /// Recompute the cached log marginal every this many iterations and
    /// count disagreements beyond 1e-9; 0 disables the audit.
    pub audit_interval: usize,
}

impl Schedule {
    pub fn new(iterations: usize, burn_in: usize, seed: u64) -> Self {
        Schedule {
            iterations,
            burn_in,
            thin: 1,
            seed,
            stream: 0,
            save_sigma: false,
            audit_interval: 1000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.thin == 0 {
            return Err(Error::invalid_argument("thin must be >= 1"));
        }
        Ok(())
    }
}

/// One recorded post-burn-in state.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub gamma: Vec<bool>,
    pub edges: Vec<(usize, usize)>,
    pub log_marginal: f64,
    pub log_prior_gamma: f64,
    pub log_prior_graph: f64,
}

impl TraceRecord {
    /// Log posterior kernel (unnormalized).
    pub fn log_posterior(&self) -> f64 {
        self.log_marginal + self.log_prior_gamma + self.log_prior_graph
    }
}

/// Covariance and coefficient draws taken at a recorded iteration.
#[derive(Debug, Clone)]
pub struct SavedDraw {
    pub iteration: usize,
    pub sigma: CovarianceDraw,
    pub coefficients: CoefficientDraw,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MoveStats {
    /// Actual flips put to the acceptance test.
    pub proposed: usize,
    pub accepted: usize,
    /// Proposals that left the state unchanged.
    pub stays: usize,
    /// Graph proposals discarded for breaking decomposability.
    pub rejected_nondecomposable: usize,
    /// γ proposals rejected because U_γ* lost rank.
    pub rank_rejections: usize,
}

impl MoveStats {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            f64::NAN
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateSummary {
    pub gamma: Vec<bool>,
    pub edges: Vec<(usize, usize)>,
    pub log_marginal: f64,
}

impl StateSummary {
    fn of(state: &ChainState) -> Self {
        StateSummary {
            gamma: state.gamma.bits().to_vec(),
            edges: state.graph.edges().to_vec(),
            log_marginal: state.log_marginal,
        }
    }
}

/// Everything one chain produced.
#[derive(Debug, Clone)]
pub struct ChainTrace {
    pub p: usize,
    pub q: usize,
    pub n: usize,
    pub hyper: Hyperparameters,
    pub schedule: Schedule,
    pub records: Vec<TraceRecord>,
    pub draws: Vec<SavedDraw>,
    pub gamma_stats: MoveStats,
    pub graph_stats: MoveStats,
    pub audit_failures: usize,
    pub initial: StateSummary,
    pub final_state: StateSummary,
}

/// Runs one chain: per iteration, a random-scan sweep of p γ proposals then
/// one G proposal. Records post-burn-in states every `thin` iterations,
/// optionally with (Σ, B) draws. Deterministic given (seed, stream).
pub fn run_chain(
    data: &ModelData,
    hyper: &Hyperparameters,
    schedule: &Schedule,
) -> Result<ChainTrace> {
    schedule.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(schedule.seed);
    rng.set_stream(schedule.stream);
    let mut eval = Evaluator::new(data, *hyper)?;
    let mut state = ChainState::initial(&mut eval)?;
    let initial = StateSummary::of(&state);

    let mut trace = ChainTrace {
        p: data.p(),
        q: data.q(),
        n: data.n(),
        hyper: *hyper,
        schedule: schedule.clone(),
        records: Vec::new(),
        draws: Vec::new(),
        gamma_stats: MoveStats::default(),
        graph_stats: MoveStats::default(),
        audit_failures: 0,
        initial: initial.clone(),
        final_state: initial,
    };

    for it in 0..schedule.iterations {
        for _ in 0..data.p() {
            match step_gamma(&mut state, &mut eval, &mut rng)? {
                GammaStep::Accepted => {
                    trace.gamma_stats.proposed += 1;
                    trace.gamma_stats.accepted += 1;
                }
                GammaStep::Rejected => trace.gamma_stats.proposed += 1,
                GammaStep::Stay => trace.gamma_stats.stays += 1,
                GammaStep::RankRejected => {
                    trace.gamma_stats.proposed += 1;
                    trace.gamma_stats.rank_rejections += 1;
                }
            }
        }
        match step_graph(&mut state, &mut eval, &mut rng)? {
            GraphStep::Accepted => {
                trace.graph_stats.proposed += 1;
                trace.graph_stats.accepted += 1;
            }
            GraphStep::Rejected => trace.graph_stats.proposed += 1,
            GraphStep::Stay => trace.graph_stats.stays += 1,
            GraphStep::RejectedNondecomposable => {
                trace.graph_stats.rejected_nondecomposable += 1;
            }
        }

        if schedule.audit_interval > 0 && (it + 1) % schedule.audit_interval == 0 {
            let fresh = eval.log_marginal(&state.gamma, &state.tree)?;
            if (fresh - state.log_marginal).abs() > 1e-9 {
                trace.audit_failures += 1;
            }
            state.log_marginal = fresh;
        }

        if it >= schedule.burn_in && (it - schedule.burn_in).is_multiple_of(schedule.thin) {
            trace.records.push(TraceRecord {
                iteration: it,
                gamma: state.gamma.bits().to_vec(),
                edges: state.graph.edges().to_vec(),
                log_marginal: state.log_marginal,
                log_prior_gamma: state.log_prior_gamma,
                log_prior_graph: state.log_prior_graph,
            });
            if schedule.save_sigma {
                let quad = eval.quad(&state.gamma)?;
                let params =
                    crate::hiw::posterior_params(&state.graph, hyper, data.n(), &quad)?;
                let sigma = sample_hiw(&params, &mut rng)?;
                let coefficients =
                    sample_posterior_coefficients(data, &state.gamma, &sigma, hyper, &mut rng)?;
                trace.draws.push(SavedDraw {
                    iteration: it,
                    sigma,
                    coefficients,
                });
            }
        }
    }
    trace.final_state = StateSummary::of(&state);
    Ok(trace)
}

//! Acceptance suite: one test per release criterion, each asserting its
//! stated tolerance and printing a pass line with the measured quantities.
//! The full-size benchmark reproduction is `#[ignore]`d by default; run it
//! with `cargo test -p cggm --test acceptance -- --ignored`.

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use cggm::graph::{self, DecomposableGraph};
use cggm::hiw::{sample_hiw, HiwParams};
use cggm::likelihood::{log_marginal, quad_form, Hyperparameters, ModelData};
use cggm::posterior::{edge_probabilities, inclusion_probabilities, roc_curve};
use cggm::sampler::{
    log_prior_gamma, run_chain, ChainState, InclusionVector, Schedule,
};
use cggm::simulate::{generate, SimulationSpec};
use cggm::spline::{DesignMatrix, SplineBasis};

fn elapsed_ok(start: Instant, budget_s: f64, what: &str) {
    let secs = start.elapsed().as_secs_f64();
    assert!(
        secs < budget_s,
        "{what} took {secs:.1}s, budget {budget_s}s"
    );
}

/// Sylvester (|I + gP| = (g+1)^rank) and Sherman–Morrison–Woodbury
/// ((I + gP)⁻¹ = I - g/(g+1)P) on 50 random dense instances.
#[test]
fn criterion_1_sylvester_and_smw_identities() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst_log = 0.0f64;
    let mut worst_smw = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(5..=40usize);
        let r = rng.random_range(1..=5usize).min(n - 1);
        let u = DMatrix::<f64>::from_fn(n, r, |_, _| rng.random::<f64>() - 0.5);
        let g = rng.random::<f64>() * 99.0 + 1.0;
        let pinv = (u.transpose() * &u).pseudo_inverse(1e-12).unwrap();
        let proj = &u * pinv * u.transpose();
        let m = DMatrix::<f64>::identity(n, n) + &proj * g;

        let logdet: f64 =
            2.0 * m.clone().cholesky().unwrap().l().diagonal().map(f64::ln).sum();
        let want = r as f64 * (g + 1.0).ln();
        worst_log = worst_log.max(((logdet - want) / want).abs());

        let inv = DMatrix::<f64>::identity(n, n) - &proj * (g / (g + 1.0));
        let resid = (&m * inv - DMatrix::<f64>::identity(n, n)).abs().max();
        worst_smw = worst_smw.max(resid);
    }
    assert!(worst_log < 1e-8, "worst Sylvester log error {worst_log}");
    assert!(worst_smw < 1e-10, "worst SMW residual {worst_smw}");
    elapsed_ok(start, 5.0, "identity suite");
    println!(
        "criterion 1 PASS: Sylvester rel log error {worst_log:.2e} < 1e-8, SMW residual {worst_smw:.2e}"
    );
}

fn mc_oracle_data(seed: u64) -> (ModelData, InclusionVector, Hyperparameters) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 15usize;
    let x = DMatrix::from_fn(n, 2, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    let basis = SplineBasis::new(2, vec![0.0]).unwrap();
    let design = DesignMatrix::build(&x, basis).unwrap();
    let y = DMatrix::from_fn(n, 3, |r, j| {
        0.8 * x[(r, 0)] * (1.0 + 0.4 * j as f64) + rng.sample::<f64, _>(StandardNormal)
    });
    let data = ModelData::new(y, design).unwrap();
    let gamma = InclusionVector::from_included(2, &[0]).unwrap();
    let hyper = Hyperparameters::new(n as f64, 3.0, 1.0, 0.5, 0.5, 0.4).unwrap();
    (data, gamma, hyper)
}

/// exp(log_marginal) against a Monte Carlo integral of the conditional
/// matrix-normal density over 1e5 prior HIW draws, for the path graph and
/// the triangle; plus exact (1e-9) invariance under node relabeling.
#[test]
fn criterion_2_marginal_likelihood_monte_carlo_oracle() {
    let start = Instant::now();
    let (data, gamma, hyper) = mc_oracle_data(202);
    let n = data.n();
    let q = data.q();
    let quad = quad_form(&data, &gamma, hyper.g).unwrap();
    let r_cols = gamma.count() * data.design().basis().group_size();

    for (name, edges) in [
        ("path", vec![(0usize, 1usize), (1usize, 2usize)]),
        ("K3", vec![(0, 1), (1, 2), (0, 2)]),
    ] {
        let graph = DecomposableGraph::from_edges(3, &edges).unwrap();
        let lm = log_marginal(&data, &gamma, &graph, &hyper).unwrap();

        let params = HiwParams::new(
            hyper.b,
            DMatrix::identity(q, q) * hyper.d,
            graph.clone(),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(777);
        let m = 100_000usize;
        let mut log_liks = Vec::with_capacity(m);
        for _ in 0..m {
            let draw = sample_hiw(&params, &mut rng).unwrap();
            let logdet: f64 = 2.0
                * draw
                    .sigma()
                    .clone()
                    .cholesky()
                    .unwrap()
                    .l()
                    .diagonal()
                    .map(f64::ln)
                    .sum();
            let ll = -(n as f64) * q as f64 / 2.0 * (2.0 * PI).ln()
                - (r_cols as f64) * q as f64 / 2.0 * (hyper.g + 1.0).ln()
                - n as f64 / 2.0 * logdet
                - 0.5 * (quad.matrix() * draw.precision()).trace();
            log_liks.push(ll);
        }
        let shift = log_liks.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = log_liks.iter().map(|l| (l - shift).exp()).collect();
        let mean: f64 = weights.iter().sum::<f64>() / m as f64;
        let var: f64 =
            weights.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (m as f64 - 1.0);
        let se = (var / m as f64).sqrt();
        let target = (lm - shift).exp();
        let dev = (target - mean).abs() / se;
        assert!(
            dev <= 3.0,
            "{name}: exp(log_marginal) deviates {dev:.2} MC standard errors"
        );
        println!(
            "criterion 2 PASS ({name}): MC deviation {dev:.2} standard errors (<= 3)"
        );
    }

    // Clique-ordering invariance via relabeling, exact to 1e-9.
    let graph = DecomposableGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
    let base = log_marginal(&data, &gamma, &graph, &hyper).unwrap();
    let mut worst = 0.0f64;
    for perm in [[1usize, 0, 2], [2, 1, 0], [0, 2, 1], [1, 2, 0], [2, 0, 1]] {
        let edges: Vec<(usize, usize)> = graph
            .edges()
            .iter()
            .map(|&(i, j)| (perm[i], perm[j]))
            .collect();
        let gp = DecomposableGraph::from_edges(3, &edges).unwrap();
        let mut yp = DMatrix::zeros(data.n(), 3);
        for (j, &pj) in perm.iter().enumerate() {
            yp.set_column(pj, &data.responses().column(j));
        }
        let dp = ModelData::new(yp, data.design().clone()).unwrap();
        let relabeled = log_marginal(&dp, &gamma, &gp, &hyper).unwrap();
        worst = worst.max((base - relabeled).abs());
    }
    assert!(worst < 1e-9, "ordering sensitivity {worst}");
    println!("criterion 2 PASS (ordering): max relabeling deviation {worst:.2e} < 1e-9");
    elapsed_ok(start, 120.0, "marginal likelihood oracle");
}

/// Joint chain against the exactly enumerated posterior on p = 3, q = 3:
/// all 8 x 8 = 64 (γ, G) states, total variation below 0.03 after 1e6
/// iterations.
#[test]
fn criterion_3_exact_posterior_chain_validation() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let n = 20usize;
    let x = DMatrix::from_fn(n, 3, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    let basis = SplineBasis::new(3, vec![]).unwrap();
    let design = DesignMatrix::build(&x, basis).unwrap();
    let y = DMatrix::from_fn(n, 3, |r, j| {
        0.7 * x[(r, 0)] * (1.0 + 0.3 * j as f64) + 0.8 * rng.sample::<f64, _>(StandardNormal)
    });
    let data = ModelData::new(y, design).unwrap();
    let hyper = Hyperparameters::new(n as f64, 3.0, 1.0, 0.5, 0.5, 0.4).unwrap();

    let pairs = [(0usize, 1usize), (0, 2), (1, 2)];
    let graphs: Vec<DecomposableGraph> = (0..8u8)
        .map(|m| {
            let edges: Vec<(usize, usize)> = pairs
                .iter()
                .enumerate()
                .filter(|(b, _)| m >> b & 1 == 1)
                .map(|(_, &e)| e)
                .collect();
            DecomposableGraph::from_edges(3, &edges).unwrap()
        })
        .collect();
    let gammas: Vec<InclusionVector> = (0..8u8)
        .map(|m| InclusionVector::from_bits((0..3).map(|b| m >> b & 1 == 1).collect()))
        .collect();

    // Exact joint posterior over the 64 states.
    let mut log_post = vec![0.0f64; 64];
    for (gi, gam) in gammas.iter().enumerate() {
        for (hi, gr) in graphs.iter().enumerate() {
            log_post[gi * 8 + hi] = log_marginal(&data, gam, gr, &hyper).unwrap()
                + log_prior_gamma(gam)
                + graph::log_prior_graph(gr, hyper.alpha_g).unwrap();
        }
    }
    let maxv = log_post.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mass: Vec<f64> = log_post.iter().map(|l| (l - maxv).exp()).collect();
    let total: f64 = mass.iter().sum();
    let exact: Vec<f64> = mass.iter().map(|m| m / total).collect();

    // Drive the chain exactly as run_chain does: a p-sweep then one G move.
    let mut eval = cggm::likelihood::Evaluator::new(&data, hyper).unwrap();
    let mut state = ChainState::initial(&mut eval).unwrap();
    let mut chain_rng = ChaCha8Rng::seed_from_u64(99);
    let iterations = 1_000_000usize;
    let mut counts = vec![0usize; 64];
    for _ in 0..iterations {
        for _ in 0..3 {
            cggm::sampler::step_gamma(&mut state, &mut eval, &mut chain_rng).unwrap();
        }
        cggm::sampler::step_graph(&mut state, &mut eval, &mut chain_rng).unwrap();
        let gi = state
            .gamma
            .bits()
            .iter()
            .enumerate()
            .map(|(b, &v)| (v as usize) << b)
            .sum::<usize>();
        let hi = pairs
            .iter()
            .enumerate()
            .map(|(b, &(i, j))| (state.graph.has_edge(i, j) as usize) << b)
            .sum::<usize>();
        counts[gi * 8 + hi] += 1;
    }
    let tv: f64 = counts
        .iter()
        .zip(&exact)
        .map(|(&c, &e)| (c as f64 / iterations as f64 - e).abs())
        .sum::<f64>()
        / 2.0;
    assert!(tv < 0.03, "total variation {tv} over 64 joint states");
    elapsed_ok(start, 120.0, "exact posterior validation");
    println!("criterion 3 PASS: joint total variation {tv:.4} < 0.03 over 64 states");
}

/// Degrees convention of the clique density: quadrature mean at |C| = 1
/// equals d/(b-2); Monte Carlo mean on the triangle within 3σ of D/(b-2);
/// non-edge precision entries below 1e-8 across 1e4 path-graph draws.
#[test]
fn criterion_4_hiw_parameterization_check() {
    // 1-d quadrature of the |C| = 1 density.
    let (b, d) = (5.0f64, 2.0f64);
    let density = |x: f64| -> f64 {
        d.powf(b / 2.0) / (2f64.powf(b / 2.0) * libm::tgamma(b / 2.0))
            * x.powf(-(b + 2.0) / 2.0)
            * (-d / (2.0 * x)).exp()
    };
    let simpson = |f: &dyn Fn(f64) -> f64, a: f64, b: f64, m: usize| -> f64 {
        let h = (b - a) / m as f64;
        let mut acc = f(a) + f(b);
        for i in 1..m {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
        }
        acc * h / 3.0
    };
    let mass = simpson(&density, 1e-6, 400.0, 400_000);
    let mean = simpson(&|x| x * density(x), 1e-6, 400.0, 400_000);
    assert!((mass - 1.0).abs() < 1e-4, "density mass {mass}");
    assert!(
        (mean - d / (b - 2.0)).abs() < 1e-3,
        "quadrature mean {mean} vs {}",
        d / (b - 2.0)
    );

    // Monte Carlo mean of Σ on K_3 within 3σ bands of D/(b-2).
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let b3 = 7.0;
    let mut scale = DMatrix::identity(3, 3) * 1.3;
    scale[(0, 2)] = 0.5;
    scale[(2, 0)] = 0.5;
    let params = HiwParams::new(
        b3,
        scale.clone(),
        DecomposableGraph::complete(3).unwrap(),
    )
    .unwrap();
    let m = 100_000usize;
    let mut acc = DMatrix::<f64>::zeros(3, 3);
    let mut acc_sq = DMatrix::<f64>::zeros(3, 3);
    for _ in 0..m {
        let s = sample_hiw(&params, &mut rng).unwrap();
        acc += s.sigma();
        acc_sq += s.sigma().component_mul(s.sigma());
    }
    acc /= m as f64;
    acc_sq /= m as f64;
    let expected = &scale / (b3 - 2.0);
    let mut worst_z = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            let sd = ((acc_sq[(i, j)] - acc[(i, j)].powi(2)).max(0.0) / m as f64).sqrt();
            let z = (acc[(i, j)] - expected[(i, j)]).abs() / sd.max(1e-12);
            worst_z = worst_z.max(z);
        }
    }
    assert!(worst_z <= 3.0, "worst K3 mean deviation {worst_z:.2} sigma");

    // Non-edge precision on the path graph.
    let params = HiwParams::new(
        3.0,
        DMatrix::identity(3, 3),
        DecomposableGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap(),
    )
    .unwrap();
    let mut worst_offgraph = 0.0f64;
    for _ in 0..10_000 {
        let s = sample_hiw(&params, &mut rng).unwrap();
        worst_offgraph = worst_offgraph.max(s.precision()[(0, 2)].abs());
    }
    assert!(worst_offgraph < 1e-8, "off-graph precision {worst_offgraph}");
    println!(
        "criterion 4 PASS: quadrature mean {mean:.5} = d/(b-2), K3 MC worst z {worst_z:.2} <= 3, off-graph precision {worst_offgraph:.1e} < 1e-8"
    );
}

/// Brute-force chordality: any simple cycle of length >= 4 without a chord
/// marks the graph non-chordal.
fn chordal_by_cycle_inspection(q: usize, rows: &[Vec<bool>]) -> bool {
    fn is_chordless(rows: &[Vec<bool>], path: &[usize]) -> bool {
        let m = path.len();
        for a in 0..m {
            for b in (a + 2)..m {
                if a == 0 && b == m - 1 {
                    continue;
                }
                if rows[path[a]][path[b]] {
                    return false;
                }
            }
        }
        true
    }
    fn dfs(rows: &[Vec<bool>], start: usize, path: &mut Vec<usize>, on: &mut Vec<bool>) -> bool {
        let v = *path.last().unwrap();
        for u in 0..rows.len() {
            if !rows[v][u] {
                continue;
            }
            if u == start && path.len() >= 4 && is_chordless(rows, path) {
                return true;
            }
            if u > start && !on[u] {
                path.push(u);
                on[u] = true;
                if dfs(rows, start, path, on) {
                    return true;
                }
                on[u] = false;
                path.pop();
            }
        }
        false
    }
    for start in 0..q {
        let mut path = vec![start];
        let mut on = vec![false; q];
        on[start] = true;
        if dfs(rows, start, &mut path, &mut on) {
            return false;
        }
    }
    true
}

/// All 8 labeled graphs on 3 nodes are decomposable; exactly 61 of the 64
/// on 4 nodes are, and the fast test agrees with the cycle oracle on every
/// single graph.
#[test]
fn criterion_5_decomposability_enumeration() {
    for (q, expected) in [(3usize, 8usize), (4usize, 61usize)] {
        let pairs: Vec<(usize, usize)> = (0..q)
            .flat_map(|i| ((i + 1)..q).map(move |j| (i, j)))
            .collect();
        let mut count = 0usize;
        for mask in 0u32..(1 << pairs.len()) {
            let mut rows = vec![vec![false; q]; q];
            for (b, &(i, j)) in pairs.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    rows[i][j] = true;
                    rows[j][i] = true;
                }
            }
            let fast = graph::is_decomposable(&rows).unwrap();
            assert_eq!(
                fast,
                chordal_by_cycle_inspection(q, &rows),
                "oracle disagreement at q={q}, mask={mask:b}"
            );
            count += fast as usize;
        }
        assert_eq!(count, expected, "decomposable count on {q} nodes");
    }
    println!("criterion 5 PASS: 8/8 decomposable on 3 nodes, 61/64 on 4 nodes, oracle-exact");
}

struct FitOutcome {
    incl_prob: Vec<f64>,
    edge_auc: f64,
    true_gamma_prob: f64,
}

/// Fits simulated data with the given knot count (None = no-covariate
/// model) and reports inclusion probabilities, edge AUC against the truth,
/// and the posterior probability of the exact true γ.
fn fit_simulated(
    data: &cggm::simulate::SimulatedData,
    knots: Option<usize>,
    iterations: usize,
    burn_in: usize,
    seed: u64,
) -> FitOutcome {
    let n = data.y.nrows();
    let (x, p) = match knots {
        Some(_) => (data.x.clone(), data.x.ncols()),
        None => (DMatrix::<f64>::zeros(n, 0), 0),
    };
    let k = knots.unwrap_or(0);
    let (lo, hi) = if p > 0 {
        (
            x.iter().cloned().fold(f64::INFINITY, f64::min),
            x.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        )
    } else {
        (-1.0, 1.0)
    };
    let basis = SplineBasis::with_even_knots(p, k, lo, hi).unwrap();
    let design = DesignMatrix::build(&x, basis).unwrap();
    let model = ModelData::new(data.y.clone(), design).unwrap();
    let hyper = Hyperparameters::defaults(n, data.y.ncols());
    let mut schedule = Schedule::new(iterations, burn_in, seed);
    schedule.thin = 1;
    let trace = run_chain(&model, &hyper, &schedule).unwrap();

    let q = data.y.ncols();
    let edge_prob = edge_probabilities(trace.records.iter(), q).unwrap();
    let incl_prob = inclusion_probabilities(trace.records.iter(), p.max(1)).unwrap();
    let truth_rows = data.truth.graph.adjacency_rows();
    let edge_auc = roc_curve(&edge_prob, &truth_rows).unwrap().auc;

    let truth_bits: Vec<bool> = (0..p)
        .map(|i| data.truth.support.contains(&i))
        .collect();
    let hits = trace
        .records
        .iter()
        .filter(|r| r.gamma == truth_bits)
        .count();
    FitOutcome {
        incl_prob,
        edge_auc,
        true_gamma_prob: hits as f64 / trace.records.len() as f64,
    }
}

/// Scaled recovery: n = 300, p = 10, q = 8, k = 5, planted {2, 5} with sin
/// and exp effects, random decomposable truth with about q edges, 2e4
/// iterations after 5e3 burn-in.
#[test]
fn criterion_6_scaled_recovery() {
    let start = Instant::now();
    let spec = SimulationSpec::desk_scale(606);
    let data = generate(&spec).unwrap();
    let outcome = fit_simulated(&data, Some(5), 20_000, 5_000, 6);

    for (i, &prob) in outcome.incl_prob.iter().enumerate() {
        if data.truth.support.contains(&i) {
            assert!(
                prob > 0.9,
                "planted predictor {} has inclusion probability {prob}",
                i + 1
            );
        } else {
            assert!(
                prob < 0.2,
                "spurious predictor {} has inclusion probability {prob}",
                i + 1
            );
        }
    }
    assert!(outcome.edge_auc > 0.9, "edge AUC {}", outcome.edge_auc);
    elapsed_ok(start, 600.0, "scaled recovery");
    println!(
        "criterion 6 PASS: planted inclusion {:?} > 0.9, spurious max {:.3} < 0.2, edge AUC {:.3} > 0.9",
        data.truth
            .support
            .iter()
            .map(|&i| outcome.incl_prob[i])
            .collect::<Vec<_>>(),
        outcome
            .incl_prob
            .iter()
            .enumerate()
            .filter(|(i, _)| !data.truth.support.contains(i))
            .map(|(_, &p)| p)
            .fold(0.0, f64::max),
        outcome.edge_auc
    );
}

/// Graph selection under the spline mean must beat the no-covariate model,
/// by at least 0.05 AUC averaged over 5 seeds.
#[test]
fn criterion_7_misspecification_auc_ordering() {
    let start = Instant::now();
    let mut margins = Vec::new();
    for seed in 1..=5u64 {
        let spec = SimulationSpec::desk_scale(700 + seed);
        let data = generate(&spec).unwrap();
        let spline = fit_simulated(&data, Some(5), 8_000, 2_000, seed);
        let none = fit_simulated(&data, None, 8_000, 2_000, seed);
        println!(
            "  seed {seed}: AUC spline {:.3}, AUC no-covariate {:.3}",
            spline.edge_auc, none.edge_auc
        );
        margins.push(spline.edge_auc - none.edge_auc);
    }
    let mean_margin: f64 = margins.iter().sum::<f64>() / margins.len() as f64;
    assert!(
        mean_margin >= 0.05,
        "mean AUC margin {mean_margin:.3} below 0.05 ({margins:?})"
    );
    elapsed_ok(start, 600.0, "misspecification ordering");
    println!(
        "criterion 7 PASS: spline beats no-covariate by {mean_margin:.3} AUC on average (>= 0.05)"
    );
}

/// Posterior probability of the true γ is nondecreasing over
/// n in {100, 300, 900} on at least 4 of 5 seeds (empirical stand-in for
/// Bayes-factor consistency).
#[test]
fn criterion_8_empirical_consistency_in_n() {
    let start = Instant::now();
    let mut passes = 0usize;
    for seed in 1..=5u64 {
        let mut spec = SimulationSpec::desk_scale(800 + seed);
        spec.n = 900;
        let data = generate(&spec).unwrap();
        let mut probs = Vec::new();
        for &n in &[100usize, 300, 900] {
            let subset = cggm::simulate::SimulatedData {
                x: data.x.rows(0, n).into_owned(),
                y: data.y.rows(0, n).into_owned(),
                truth: data.truth.clone(),
            };
            let outcome = fit_simulated(&subset, Some(5), 6_000, 1_500, seed);
            probs.push(outcome.true_gamma_prob);
        }
        let monotone = probs[0] <= probs[1] && probs[1] <= probs[2];
        println!(
            "  seed {seed}: P(true gamma | Y_n) = {probs:?} {}",
            if monotone { "nondecreasing" } else { "NOT monotone" }
        );
        passes += monotone as usize;
    }
    assert!(passes >= 4, "monotone on only {passes}/5 seeds");
    elapsed_ok(start, 600.0, "consistency check");
    println!("criterion 8 PASS: P(true gamma) nondecreasing in n on {passes}/5 seeds (>= 4)");
}

/// Full benchmark reproduction: p = 30, q = 40, n = 700, g = 700, b = 3,
/// d = 1, 10 knots, 1e5 iterations after 1e4 burn-in. Slow; excluded from
/// default runs.
#[test]
#[ignore = "benchmark-scale run, minutes of compute; invoke with -- --ignored"]
fn criterion_9_benchmark_scale_run() {
    let spec = SimulationSpec::benchmark_scale(909);
    let data = generate(&spec).unwrap();

    let n = data.y.nrows();
    let p = data.x.ncols();
    let (lo, hi) = (
        data.x.iter().cloned().fold(f64::INFINITY, f64::min),
        data.x.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    let basis = SplineBasis::with_even_knots(p, 10, lo, hi).unwrap();
    let design = DesignMatrix::build(&data.x, basis).unwrap();
    let model = ModelData::new(data.y.clone(), design).unwrap();
    let hyper = Hyperparameters::defaults(n, data.y.ncols());
    assert_eq!(hyper.g, 700.0);
    let mut schedule = Schedule::new(110_000, 10_000, 9);
    schedule.thin = 10;
    let trace = run_chain(&model, &hyper, &schedule).unwrap();

    let q = data.y.ncols();
    let incl = inclusion_probabilities(trace.records.iter(), p).unwrap();
    for (i, &prob) in incl.iter().enumerate() {
        if data.truth.support.contains(&i) {
            assert!(prob > 0.5, "planted predictor {} at {prob}", i + 1);
        } else {
            assert!(prob < 0.5, "spurious predictor {} at {prob}", i + 1);
        }
    }
    let edge_prob = edge_probabilities(trace.records.iter(), q).unwrap();
    let auc = roc_curve(&edge_prob, &data.truth.graph.adjacency_rows())
        .unwrap()
        .auc;
    assert!(auc > 0.95, "edge AUC {auc}");
    println!(
        "criterion 9 PASS: exact support recovery at 0.5 cutoff, edge AUC {auc:.4} > 0.95"
    );
}

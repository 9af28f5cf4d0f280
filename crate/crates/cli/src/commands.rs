//! The four subcommands: fit, simulate, summarize, roc.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::DMatrix;

use cggm::io;
use cggm::likelihood::{Hyperparameters, ModelData};
use cggm::posterior::{self, PosteriorSummary};
use cggm::sampler::{run_chain, ChainTrace, Schedule};
use cggm::simulate::{self, EffectKind, GraphSource, NoiseSource, SimulationSpec};
use cggm::spline::{DesignMatrix, SplineBasis};
use cggm::{Error, Result};

use crate::config::{out_dir, thread_cap, Config};

pub const FIT_KEYS: &[&str] = &[
    "y", "x", "out", "simulate", "sim-preset", "sim-n", "sim-p", "sim-q", "sim-knots",
    "sim-support", "sim-effects", "sim-edges", "sim-seed", "sim-sign-random",
    "sim-noise-variance", "mean-model", "knots", "knot-min", "knot-max", "standardize",
    "ridge", "g", "b", "d", "delta", "eta", "alpha-g", "iterations", "burn-in", "thin",
    "chains", "seed", "save-sigma", "audit-interval", "cutoff",
];

pub const SIMULATE_KEYS: &[&str] = &[
    "out", "preset", "n", "p", "q", "knots", "support", "effects", "edges", "seed",
    "sign-random", "noise-variance",
];

pub const SUMMARIZE_KEYS: &[&str] = &["trace-dir", "cutoff", "out"];

pub const ROC_KEYS: &[&str] = &["edge-prob", "truth", "out"];

fn parse_effects(text: &str) -> Result<Vec<EffectKind>> {
    text.split(',')
        .map(|t| match t.trim() {
            "sin" => Ok(EffectKind::Sin),
            "linear" => Ok(EffectKind::Linear),
            "exp" => Ok(EffectKind::Exp),
            other => Err(Error::invalid_argument(format!(
                "unknown effect kind {other:?}; expected sin, linear or exp"
            ))),
        })
        .collect()
}

fn parse_support(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|t| {
            let v = t.trim().parse::<usize>().map_err(|_| {
                Error::invalid_argument(format!("bad predictor index {t:?} in support"))
            })?;
            if v == 0 {
                return Err(Error::invalid_argument(
                    "support predictor indices are 1-based",
                ));
            }
            Ok(v - 1)
        })
        .collect()
}

/// Builds a simulation spec from config keys with an optional key prefix
/// (the fit command namespaces them as sim-*).
fn sim_spec(config: &Config, prefix: &str) -> Result<SimulationSpec> {
    let key = |name: &str| format!("{prefix}{name}");
    let mut spec = match config.str_or(&key("preset"), "desk") {
        "benchmark" => SimulationSpec::benchmark_scale(0),
        "desk" => SimulationSpec::desk_scale(0),
        other => {
            return Err(Error::invalid_argument(format!(
                "unknown preset {other:?}; expected benchmark or desk"
            )))
        }
    };
    spec.seed = config.u64_or(&key("seed"), 0)?;
    spec.n = config.usize_or(&key("n"), spec.n)?;
    spec.p = config.usize_or(&key("p"), spec.p)?;
    spec.q = config.usize_or(&key("q"), spec.q)?;
    spec.knots = config.usize_or(&key("knots"), spec.knots)?;
    if let Some(text) = config.get(&key("support")) {
        spec.true_support = parse_support(text)?;
    }
    if let Some(text) = config.get(&key("effects")) {
        spec.effects = parse_effects(text)?;
    }
    if let Some(edges) = config.usize_opt(&key("edges"))? {
        spec.graph = GraphSource::Random {
            target_edges: edges,
        };
    }
    spec.randomize_signs = config.bool_or(&key("sign-random"), false)?;
    if let Some(variance) = config.f64_opt(&key("noise-variance"))? {
        spec.noise = NoiseSource::Isotropic { variance };
    }
    spec.validate()?;
    Ok(spec)
}

fn write_simulated(dir: &Path, data: &simulate::SimulatedData, spec: &SimulationSpec) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    io::write_matrix_csv(&dir.join("X.csv"), &io::node_headers("x", data.x.ncols()), &data.x)?;
    io::write_matrix_csv(&dir.join("Y.csv"), &io::node_headers("y", data.y.ncols()), &data.y)?;
    let mut support = String::from("predictor\n");
    for &i in &data.truth.support {
        support.push_str(&format!("{}\n", i + 1));
    }
    std::fs::write(dir.join("truth_support.csv"), support)?;
    io::write_edges_csv(&dir.join("truth_edges.csv"), data.truth.graph.edges())?;
    io::write_matrix_csv(
        &dir.join("truth_sigma.csv"),
        &io::node_headers("v", data.truth.sigma.ncols()),
        &data.truth.sigma,
    )?;
    io::write_meta(
        &dir.join("meta"),
        &[
            ("version".into(), env!("CARGO_PKG_VERSION").into()),
            ("command".into(), "simulate".into()),
            ("seed".into(), spec.seed.to_string()),
            ("n".into(), spec.n.to_string()),
            ("p".into(), spec.p.to_string()),
            ("q".into(), spec.q.to_string()),
            ("knots".into(), spec.knots.to_string()),
            (
                "support".into(),
                data.truth
                    .support
                    .iter()
                    .map(|i| (i + 1).to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("true_edges".into(), data.truth.graph.edge_count().to_string()),
        ],
    )?;
    Ok(())
}

pub fn cmd_simulate(config: &Config) -> Result<()> {
    let out = out_dir(config)?;
    let spec = sim_spec(config, "")?;
    let data = simulate::generate(&spec)?;
    write_simulated(&out, &data, &spec)?;
    eprintln!(
        "simulated n={} p={} q={} into {}",
        spec.n,
        spec.p,
        spec.q,
        out.display()
    );
    Ok(())
}

/// Centers columns; z-scores them when `standardize` is set. Constant
/// columns keep unit scale.
fn preprocess(x: &DMatrix<f64>, standardize: bool) -> DMatrix<f64> {
    let n = x.nrows() as f64;
    let mut out = x.clone();
    for c in 0..x.ncols() {
        let mean = x.column(c).sum() / n;
        let mut col = out.column_mut(c);
        col.add_scalar_mut(-mean);
        if standardize {
            let sd = (col.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
            if sd > 0.0 {
                col /= sd;
            }
        }
    }
    out
}

struct FitInputs {
    x: DMatrix<f64>,
    y: DMatrix<f64>,
    simulated: bool,
}

fn load_fit_inputs(config: &Config, out: &Path, mean_model: &str) -> Result<FitInputs> {
    let simulate_mode = config.bool_or("simulate", false)?;
    if simulate_mode {
        if config.get("y").is_some() || config.get("x").is_some() {
            return Err(Error::invalid_argument(
                "provide either --y/--x or --simulate true, not both",
            ));
        }
        let spec = sim_spec(config, "sim-")?;
        let data = simulate::generate(&spec)?;
        write_simulated(&out.join("data"), &data, &spec)?;
        return Ok(FitInputs {
            x: data.x,
            y: data.y,
            simulated: true,
        });
    }
    let y_path = config.existing_file("y")?;
    let (_, y) = io::read_matrix_csv(&y_path)?;
    let x = if mean_model == "none" {
        DMatrix::zeros(y.nrows(), 0)
    } else {
        let x_path = config.existing_file("x")?;
        let (_, x) = io::read_matrix_csv(&x_path)?;
        if x.nrows() != y.nrows() {
            return Err(Error::invalid_argument(format!(
                "X has {} rows, Y has {}; rows must align",
                x.nrows(),
                y.nrows()
            )));
        }
        x
    };
    Ok(FitInputs {
        x,
        y,
        simulated: false,
    })
}

fn write_summary(
    dir: &Path,
    summary: &PosteriorSummary,
    basis: Option<&SplineBasis>,
    range: (f64, f64),
    traces: &[&ChainTrace],
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let q = summary.edge_prob.nrows();
    io::write_matrix_csv(
        &dir.join("edge_prob.csv"),
        &io::node_headers("v", q),
        &summary.edge_prob,
    )?;
    let mut incl = String::from("predictor,probability\n");
    for (i, p) in summary.incl_prob.iter().enumerate() {
        incl.push_str(&format!("{},{}\n", i + 1, p));
    }
    std::fs::write(dir.join("incl_prob.csv"), incl)?;
    io::write_edges_csv(&dir.join("selected_edges.csv"), &summary.selected.edges)?;
    let mut hubs = String::from("node,degree\n");
    for &(node, degree) in &summary.hubs {
        hubs.push_str(&format!("{},{}\n", node + 1, degree));
    }
    std::fs::write(dir.join("hubs.csv"), hubs)?;
    if let Some(rho) = &summary.partial_corr {
        io::write_matrix_csv(&dir.join("partial_corr.csv"), &io::node_headers("v", q), rho)?;
    }

    // Posterior mean curves per predictor, when coefficient draws exist.
    if let Some(basis) = basis {
        let draws: Vec<cggm::sampler::SavedDraw> = traces
            .iter()
            .flat_map(|t| t.draws.iter().cloned())
            .collect();
        if !draws.is_empty() {
            let grid: Vec<f64> = (0..=100)
                .map(|i| range.0 + (range.1 - range.0) * i as f64 / 100.0)
                .collect();
            for predictor in 0..basis.predictor_count() {
                let curves = posterior::fitted_curves(basis, &draws, predictor, &grid)?;
                let Some(mean) = curves.mean else { continue };
                let mut headers = vec!["grid".to_string()];
                headers.extend(io::node_headers("resp", mean.ncols()));
                let mut table = DMatrix::<f64>::zeros(grid.len(), mean.ncols() + 1);
                for (r, &g) in grid.iter().enumerate() {
                    table[(r, 0)] = g;
                    for c in 0..mean.ncols() {
                        table[(r, c + 1)] = mean[(r, c)];
                    }
                }
                io::write_matrix_csv(
                    &dir.join(format!("curves_{}.csv", predictor + 1)),
                    &headers,
                    &table,
                )?;
            }
        }
    }
    Ok(())
}

/// Largest pairwise disagreement between per-chain edge probabilities.
fn split_chain_disagreement(traces: &[&ChainTrace]) -> Result<f64> {
    if traces.len() < 2 {
        return Ok(0.0);
    }
    let q = traces[0].q;
    let per_chain: Vec<DMatrix<f64>> = traces
        .iter()
        .map(|t| posterior::edge_probabilities(t.records.iter(), q))
        .collect::<Result<_>>()?;
    let mut max_delta: f64 = 0.0;
    for a in 0..per_chain.len() {
        for b in (a + 1)..per_chain.len() {
            max_delta = max_delta.max((&per_chain[a] - &per_chain[b]).abs().max());
        }
    }
    Ok(max_delta)
}

pub fn cmd_fit(config: &Config) -> Result<()> {
    let out = out_dir(config)?;
    let mean_model = config.str_or("mean-model", "spline").to_string();
    if !["spline", "linear", "none"].contains(&mean_model.as_str()) {
        return Err(Error::invalid_argument(format!(
            "mean-model must be spline, linear or none, got {mean_model:?}"
        )));
    }
    let inputs = load_fit_inputs(config, &out, &mean_model)?;
    let standardize = config.bool_or("standardize", true)?;
    let x = preprocess(&inputs.x, standardize);
    let p = x.ncols();
    let n = x.nrows();
    let q = inputs.y.ncols();

    let k = match mean_model.as_str() {
        "spline" => config.usize_or("knots", 10)?,
        _ => 0,
    };
    let (lo, hi) = if p > 0 && k > 0 {
        let lo = config
            .f64_opt("knot-min")?
            .unwrap_or_else(|| x.iter().cloned().fold(f64::INFINITY, f64::min));
        let hi = config
            .f64_opt("knot-max")?
            .unwrap_or_else(|| x.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        (lo, hi)
    } else {
        (-1.0, 1.0)
    };
    let basis = SplineBasis::with_even_knots(p, k, lo, hi)?;
    let design = DesignMatrix::build(&x, basis.clone())?;
    let ridge = config.bool_or("ridge", false)?;
    let data = ModelData::new_with_options(inputs.y, design, ridge)?;

    let g = match config.str_or("g", "auto") {
        "auto" => n as f64,
        "max-n-p2" => (n.max(p * p)) as f64,
        other => other.parse::<f64>().map_err(|_| {
            Error::invalid_argument(format!("--g expects a number, auto or max-n-p2, got {other:?}"))
        })?,
    };
    let (alpha_g, alpha_clamped) = match config.str_or("alpha-g", "auto") {
        "auto" => {
            let clamped = Hyperparameters::clamped_alpha_g(q);
            let raw = if q > 1 { 2.0 / (q as f64 - 1.0) } else { f64::NAN };
            (clamped, raw > 0.5 || !raw.is_finite())
        }
        other => (
            other.parse::<f64>().map_err(|_| {
                Error::invalid_argument(format!("--alpha-g expects a number or auto, got {other:?}"))
            })?,
            false,
        ),
    };
    if alpha_clamped {
        eprintln!(
            "warning: alpha-g default 2/(q-1) is not a probability at q = {q}; clamped to {alpha_g}"
        );
    }
    let hyper = Hyperparameters::new(
        g,
        config.f64_or("b", 3.0)?,
        config.f64_or("d", 1.0)?,
        config.f64_or("delta", 0.5)?,
        config.f64_or("eta", 0.5)?,
        alpha_g,
    )?;

    let chains = config.usize_or("chains", 1)?.max(1);
    let base_schedule = Schedule {
        iterations: config.usize_or("iterations", 100_000)?,
        burn_in: config.usize_or("burn-in", 10_000)?,
        thin: config.usize_or("thin", 1)?,
        seed: config.u64_or("seed", 0)?,
        stream: 0,
        save_sigma: config.bool_or("save-sigma", false)?,
        audit_interval: config.usize_or("audit-interval", 1000)?,
    };
    base_schedule.validate()?;
    let cutoff = config.f64_or("cutoff", 0.5)?;

    // Independent chains on a small worker pool, one ChaCha stream each.
    let workers = thread_cap().min(chains).max(1);
    let next = AtomicUsize::new(0);
    let mut collected: Vec<(usize, Result<ChainTrace>)> = std::thread::scope(|scope| {
        let next = &next;
        let data_ref = &data;
        let hyper_ref = &hyper;
        let base = &base_schedule;
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                scope.spawn(move || {
                    let mut local = Vec::new();
                    loop {
                        let idx = next.fetch_add(1, Ordering::SeqCst);
                        if idx >= chains {
                            break;
                        }
                        let mut schedule = base.clone();
                        schedule.stream = idx as u64;
                        let result = run_chain(data_ref, hyper_ref, &schedule);
                        match &result {
                            Ok(trace) => eprintln!(
                                "[chain {idx}] done: gamma acc {:.3}, graph acc {:.3}",
                                trace.gamma_stats.acceptance_rate(),
                                trace.graph_stats.acceptance_rate()
                            ),
                            Err(e) => eprintln!("[chain {idx}] failed: {e}"),
                        }
                        local.push((idx, result));
                    }
                    local
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("chain worker panicked"))
            .collect()
    });
    collected.sort_by_key(|(idx, _)| *idx);

    // Persist whatever succeeded before failing on the first error.
    let mut traces: Vec<ChainTrace> = Vec::new();
    let mut first_error: Option<Error> = None;
    for (idx, result) in collected {
        match result {
            Ok(trace) => {
                let chain_dir = out.join(format!("chain_{idx}"));
                io::write_trace(&chain_dir, &trace)?;
                let probs = posterior::edge_probabilities(trace.records.iter(), q)?;
                io::write_matrix_csv(
                    &chain_dir.join("edge_prob.csv"),
                    &io::node_headers("v", q),
                    &probs,
                )?;
                traces.push(trace);
            }
            Err(e) => first_error = first_error.or(Some(e)),
        }
    }
    if let Some(e) = first_error {
        return Err(e);
    }

    let trace_refs: Vec<&ChainTrace> = traces.iter().collect();
    let summary = posterior::summarize(&trace_refs, cutoff)?;
    write_summary(&out.join("summary"), &summary, Some(&basis), (lo, hi), &trace_refs)?;
    let disagreement = split_chain_disagreement(&trace_refs)?;

    let rank_rejections: usize = traces.iter().map(|t| t.gamma_stats.rank_rejections).sum();
    let audit_failures: usize = traces.iter().map(|t| t.audit_failures).sum();

    let mut meta: Vec<(String, String)> = vec![
        ("version".into(), env!("CARGO_PKG_VERSION").into()),
        ("command".into(), "fit".into()),
        ("n".into(), n.to_string()),
        ("p".into(), p.to_string()),
        ("q".into(), q.to_string()),
        ("mean_model".into(), mean_model.clone()),
        ("standardize".into(), standardize.to_string()),
        ("ridge".into(), ridge.to_string()),
        ("g".into(), format!("{g}")),
        ("b".into(), format!("{}", hyper.b)),
        ("d".into(), format!("{}", hyper.d)),
        ("delta".into(), format!("{}", hyper.delta)),
        ("eta".into(), format!("{}", hyper.eta)),
        ("alpha_g".into(), format!("{alpha_g}")),
        ("alpha_g_clamped".into(), alpha_clamped.to_string()),
        ("iterations".into(), base_schedule.iterations.to_string()),
        ("burn_in".into(), base_schedule.burn_in.to_string()),
        ("thin".into(), base_schedule.thin.to_string()),
        ("chains".into(), chains.to_string()),
        ("seed".into(), base_schedule.seed.to_string()),
        ("save_sigma".into(), base_schedule.save_sigma.to_string()),
        ("cutoff".into(), format!("{cutoff}")),
        (
            "knots".into(),
            basis
                .knots()
                .iter()
                .map(|w| format!("{w}"))
                .collect::<Vec<_>>()
                .join(","),
        ),
        ("knot_min".into(), format!("{lo}")),
        ("knot_max".into(), format!("{hi}")),
        ("source".into(), if inputs.simulated { "simulated".into() } else { "files".into() }),
        ("rank_rejections".into(), rank_rejections.to_string()),
        ("audit_failures".into(), audit_failures.to_string()),
        (
            "selected_graph_decomposable".into(),
            summary.selected.decomposable.to_string(),
        ),
        (
            "split_chain_max_delta_edge_prob".into(),
            format!("{disagreement}"),
        ),
    ];
    for (k, v) in config.entries() {
        meta.push((format!("config.{k}"), v.to_string()));
    }
    io::write_meta(&out.join("meta"), &meta)?;

    let mut report = String::new();
    report.push_str(&format!(
        "fit: n={n} p={p} q={q} ({}), mean model {mean_model}\n",
        if inputs.simulated { "simulated" } else { "files" }
    ));
    report.push_str(&format!(
        "chains: {chains} x {} iterations (burn-in {}, thin {}), seed {}\n",
        base_schedule.iterations, base_schedule.burn_in, base_schedule.thin, base_schedule.seed
    ));
    for (idx, trace) in traces.iter().enumerate() {
        report.push_str(&format!(
            "chain {idx}: gamma acceptance {:.3} ({} stays), graph acceptance {:.3} ({} nondecomposable discards)\n",
            trace.gamma_stats.acceptance_rate(),
            trace.gamma_stats.stays,
            trace.graph_stats.acceptance_rate(),
            trace.graph_stats.rejected_nondecomposable,
        ));
    }
    if rank_rejections > 0 {
        report.push_str(&format!(
            "warning: {rank_rejections} rank-deficient gamma proposals were rejected\n"
        ));
    }
    if audit_failures > 0 {
        report.push_str(&format!("warning: {audit_failures} audit failures\n"));
    }
    if alpha_clamped {
        report.push_str(&format!("warning: alpha_g clamped to {alpha_g}\n"));
    }
    report.push_str(&format!(
        "selected graph (cutoff {cutoff}): {} edges, decomposable: {}\n",
        summary.selected.edges.len(),
        summary.selected.decomposable
    ));
    let top: Vec<String> = summary
        .hubs
        .iter()
        .take(5)
        .map(|&(v, d)| format!("v{} ({d})", v + 1))
        .collect();
    report.push_str(&format!("top degrees: {}\n", top.join(", ")));
    report.push_str(&format!(
        "split-chain max |delta edge prob|: {disagreement}\n"
    ));
    std::fs::write(out.join("report.txt"), report)?;

    eprintln!("fit complete: summary in {}", out.join("summary").display());
    Ok(())
}

pub fn cmd_summarize(config: &Config) -> Result<()> {
    let trace_dir = PathBuf::from(config.require("trace-dir")?);
    if !trace_dir.is_dir() {
        return Err(Error::invalid_argument(format!(
            "trace directory {} does not exist",
            trace_dir.display()
        )));
    }
    let cutoff = config.f64_or("cutoff", 0.5)?;
    let out = config
        .path_opt("out")
        .unwrap_or_else(|| trace_dir.join("summary"));

    let mut chain_dirs: Vec<PathBuf> = std::fs::read_dir(&trace_dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_dir()
                && p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("chain_"))
                && p.join("meta").is_file()
        })
        .collect();
    chain_dirs.sort();
    if chain_dirs.is_empty() {
        return Err(Error::invalid_argument(format!(
            "no chain_* directories under {}",
            trace_dir.display()
        )));
    }
    let traces: Vec<ChainTrace> = chain_dirs
        .iter()
        .map(|d| io::read_trace(d))
        .collect::<Result<_>>()?;
    let trace_refs: Vec<&ChainTrace> = traces.iter().collect();
    let summary = posterior::summarize(&trace_refs, cutoff)?;

    // Knot vector from the run meta, when this is a fit output directory;
    // curves are skipped otherwise.
    let mut basis = None;
    let mut range = (-1.0, 1.0);
    let run_meta = trace_dir.join("meta");
    if run_meta.is_file() {
        let meta = io::read_meta(&run_meta)?;
        if let (Some(knots), Some(p)) = (meta.get("knots"), meta.get("p")) {
            let p: usize = p.parse().unwrap_or(0);
            let knots: Vec<f64> = if knots.is_empty() {
                Vec::new()
            } else {
                knots
                    .split(',')
                    .filter_map(|w| w.trim().parse::<f64>().ok())
                    .collect()
            };
            if let (Some(lo), Some(hi)) = (meta.get("knot_min"), meta.get("knot_max")) {
                if let (Ok(lo), Ok(hi)) = (lo.parse::<f64>(), hi.parse::<f64>()) {
                    range = (lo, hi);
                }
            }
            basis = SplineBasis::new(p, knots).ok();
        }
    }
    write_summary(&out, &summary, basis.as_ref(), range, &trace_refs)?;
    eprintln!("summary written to {}", out.display());
    Ok(())
}

/// Truth read either as a dense 0/1 adjacency or as an `i,j` edge list
/// (sized by the score matrix).
fn read_truth(path: &Path, q: usize) -> Result<Vec<Vec<bool>>> {
    let text = std::fs::read_to_string(path)?;
    let header = text.lines().next().unwrap_or("").trim().to_lowercase();
    if header == "i,j" {
        let edges = io::read_edges_csv(path)?;
        let mut rows = vec![vec![false; q]; q];
        for (i, j) in edges {
            if i >= q || j >= q {
                return Err(Error::invalid_argument(format!(
                    "truth edge ({}, {}) out of range for q = {q}",
                    i + 1,
                    j + 1
                )));
            }
            rows[i][j] = true;
            rows[j][i] = true;
        }
        Ok(rows)
    } else {
        io::read_adjacency_csv(path)
    }
}

pub fn cmd_roc(config: &Config) -> Result<()> {
    let scores_path = config.existing_file("edge-prob")?;
    let truth_path = config.existing_file("truth")?;
    let (_, scores) = io::read_matrix_csv(&scores_path)?;
    let truth = read_truth(&truth_path, scores.nrows())?;
    let roc = posterior::roc_curve(&scores, &truth)?;

    let mut out_text = String::from("fpr,tpr\n");
    for (fpr, tpr) in &roc.points {
        out_text.push_str(&format!("{fpr},{tpr}\n"));
    }
    out_text.push_str(&format!("# auc = {}\n", roc.auc));
    if let Some(path) = config.path_opt("out") {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        std::fs::write(path, &out_text)?;
    }
    println!("auc = {}", roc.auc);
    Ok(())
}

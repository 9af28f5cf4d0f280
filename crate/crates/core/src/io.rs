//! CSV ingestion and trace persistence.
//!
//! All files carry a header row, use plain decimal notation, and write
//! floats with Rust's shortest round-trip formatting so that reading a file
//! back reproduces the in-memory values bit for bit. Node and predictor
//! indices are 1-based on disk, 0-based in memory. Edge lists are rows
//! `i,j` with i < j.
//!
//! A persisted chain directory holds `gamma.csv` (iteration x p 0/1 bits),
//! `edges.csv` (iteration,i,j rows), `logpost.csv`, a `meta` key=value file
//! with seeds, hyperparameters and acceptance counters, and optionally a
//! `draws/` directory with dense Σ, precision and coefficient CSVs per
//! saved iteration.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hiw::{CoefficientDraw, CovarianceDraw};
use crate::likelihood::Hyperparameters;
use crate::sampler::{ChainTrace, MoveStats, SavedDraw, Schedule, StateSummary, TraceRecord};

fn path_str(path: &Path) -> String {
    path.display().to_string()
}

fn parse_f64(path: &Path, field: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|e| Error::parse(path_str(path), format!("bad float {field:?}: {e}")))
}

fn parse_usize(path: &Path, field: &str) -> Result<usize> {
    field
        .trim()
        .parse::<usize>()
        .map_err(|e| Error::parse(path_str(path), format!("bad integer {field:?}: {e}")))
}

/// Writes a dense matrix with the given column headers.
pub fn write_matrix_csv(path: &Path, headers: &[String], m: &DMatrix<f64>) -> Result<()> {
    if headers.len() != m.ncols() {
        return Err(Error::invalid_argument(format!(
            "{} headers for {} columns",
            headers.len(),
            m.ncols()
        )));
    }
    let mut out = String::new();
    out.push_str(&headers.join(","));
    out.push('\n');
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if c > 0 {
                out.push(',');
            }
            out.push_str(&format!("{}", m[(r, c)]));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Default headers v1..vq.
pub fn node_headers(prefix: &str, count: usize) -> Vec<String> {
    (1..=count).map(|i| format!("{prefix}{i}")).collect()
}

/// Reads a dense numeric matrix with a header row.
pub fn read_matrix_csv(path: &Path) -> Result<(Vec<String>, DMatrix<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::parse(path_str(path), e.to_string()))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::parse(path_str(path), e.to_string()))?
        .iter()
        .map(|h| h.to_string())
        .collect();
    let ncols = headers.len();
    let mut values: Vec<f64> = Vec::new();
    let mut nrows = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| Error::parse(path_str(path), e.to_string()))?;
        if record.len() != ncols {
            return Err(Error::parse(
                path_str(path),
                format!("row {} has {} fields, expected {ncols}", nrows + 2, record.len()),
            ));
        }
        for field in record.iter() {
            values.push(parse_f64(path, field)?);
        }
        nrows += 1;
    }
    if nrows == 0 {
        return Err(Error::parse(path_str(path), "no data rows"));
    }
    Ok((headers, DMatrix::from_row_slice(nrows, ncols, &values)))
}

/// Writes an edge list as 1-based `i,j` rows.
pub fn write_edges_csv(path: &Path, edges: &[(usize, usize)]) -> Result<()> {
    let mut out = String::from("i,j\n");
    for &(i, j) in edges {
        out.push_str(&format!("{},{}\n", i + 1, j + 1));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a 1-based edge list back to 0-based pairs.
pub fn read_edges_csv(path: &Path) -> Result<Vec<(usize, usize)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::parse(path_str(path), e.to_string()))?;
    let mut edges = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::parse(path_str(path), e.to_string()))?;
        if record.len() != 2 {
            return Err(Error::parse(path_str(path), "edge rows need two fields"));
        }
        let i = parse_usize(path, &record[0])?;
        let j = parse_usize(path, &record[1])?;
        if i == 0 || j == 0 || i >= j {
            return Err(Error::parse(
                path_str(path),
                format!("edge ({i}, {j}) must be 1-based with i < j"),
            ));
        }
        edges.push((i - 1, j - 1));
    }
    Ok(edges)
}

/// Reads a dense 0/1 adjacency with header row.
pub fn read_adjacency_csv(path: &Path) -> Result<Vec<Vec<bool>>> {
    let (_, m) = read_matrix_csv(path)?;
    let mut rows = Vec::with_capacity(m.nrows());
    for r in 0..m.nrows() {
        let mut row = Vec::with_capacity(m.ncols());
        for c in 0..m.ncols() {
            let v = m[(r, c)];
            if v != 0.0 && v != 1.0 {
                return Err(Error::parse(
                    path_str(path),
                    format!("adjacency entry ({r}, {c}) = {v} is not 0/1"),
                ));
            }
            row.push(v == 1.0);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Writes `key=value` metadata lines.
pub fn write_meta(path: &Path, entries: &[(String, String)]) -> Result<()> {
    let mut out = String::new();
    for (k, v) in entries {
        out.push_str(&format!("{k}={v}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_meta(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path)?;
    let mut map = BTreeMap::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::parse(path_str(path), format!("bad meta line {line:?}")));
        };
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn meta_get<'a>(map: &'a BTreeMap<String, String>, key: &str, path: &Path) -> Result<&'a str> {
    map.get(key)
        .map(String::as_str)
        .ok_or_else(|| Error::parse(path_str(path), format!("missing meta key {key}")))
}

fn format_bits(bits: &[bool]) -> String {
    bits.iter()
        .map(|&b| if b { "1" } else { "0" })
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_bits(text: &str, path: &Path) -> Result<Vec<bool>> {
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|t| match t.trim() {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(Error::parse(path_str(path), format!("bad bit {other:?}"))),
        })
        .collect()
}

fn format_edge_list(edges: &[(usize, usize)]) -> String {
    edges
        .iter()
        .map(|&(i, j)| format!("{}-{}", i + 1, j + 1))
        .collect::<Vec<_>>()
        .join(";")
}

fn parse_edge_list(text: &str, path: &Path) -> Result<Vec<(usize, usize)>> {
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(';')
        .map(|pair| {
            let Some((i, j)) = pair.split_once('-') else {
                return Err(Error::parse(path_str(path), format!("bad edge {pair:?}")));
            };
            Ok((parse_usize(path, i)? - 1, parse_usize(path, j)? - 1))
        })
        .collect()
}

/// Persists one chain into `dir`.
pub fn write_trace(dir: &Path, trace: &ChainTrace) -> Result<()> {
    fs::create_dir_all(dir)?;

    let mut gamma = String::from("iteration,");
    gamma.push_str(&node_headers("g", trace.p).join(","));
    gamma.push('\n');
    for rec in &trace.records {
        gamma.push_str(&format!("{}", rec.iteration));
        for &b in &rec.gamma {
            gamma.push_str(if b { ",1" } else { ",0" });
        }
        gamma.push('\n');
    }
    fs::write(dir.join("gamma.csv"), gamma)?;

    let mut edges = String::from("iteration,i,j\n");
    for rec in &trace.records {
        for &(i, j) in &rec.edges {
            edges.push_str(&format!("{},{},{}\n", rec.iteration, i + 1, j + 1));
        }
    }
    fs::write(dir.join("edges.csv"), edges)?;

    let mut logpost =
        String::from("iteration,log_marginal,log_prior_gamma,log_prior_graph,log_posterior\n");
    for rec in &trace.records {
        logpost.push_str(&format!(
            "{},{},{},{},{}\n",
            rec.iteration,
            rec.log_marginal,
            rec.log_prior_gamma,
            rec.log_prior_graph,
            rec.log_posterior()
        ));
    }
    fs::write(dir.join("logpost.csv"), logpost)?;

    let entries = vec![
        ("version".into(), env!("CARGO_PKG_VERSION").to_string()),
        ("p".into(), trace.p.to_string()),
        ("q".into(), trace.q.to_string()),
        ("n".into(), trace.n.to_string()),
        ("iterations".into(), trace.schedule.iterations.to_string()),
        ("burn_in".into(), trace.schedule.burn_in.to_string()),
        ("thin".into(), trace.schedule.thin.to_string()),
        ("seed".into(), trace.schedule.seed.to_string()),
        ("stream".into(), trace.schedule.stream.to_string()),
        ("save_sigma".into(), trace.schedule.save_sigma.to_string()),
        (
            "audit_interval".into(),
            trace.schedule.audit_interval.to_string(),
        ),
        ("g".into(), format!("{}", trace.hyper.g)),
        ("b".into(), format!("{}", trace.hyper.b)),
        ("d".into(), format!("{}", trace.hyper.d)),
        ("delta".into(), format!("{}", trace.hyper.delta)),
        ("eta".into(), format!("{}", trace.hyper.eta)),
        ("alpha_g".into(), format!("{}", trace.hyper.alpha_g)),
        ("gamma_proposed".into(), trace.gamma_stats.proposed.to_string()),
        ("gamma_accepted".into(), trace.gamma_stats.accepted.to_string()),
        ("gamma_stays".into(), trace.gamma_stats.stays.to_string()),
        (
            "gamma_rank_rejections".into(),
            trace.gamma_stats.rank_rejections.to_string(),
        ),
        ("graph_proposed".into(), trace.graph_stats.proposed.to_string()),
        ("graph_accepted".into(), trace.graph_stats.accepted.to_string()),
        ("graph_stays".into(), trace.graph_stats.stays.to_string()),
        (
            "graph_rejected_nondecomposable".into(),
            trace.graph_stats.rejected_nondecomposable.to_string(),
        ),
        ("audit_failures".into(), trace.audit_failures.to_string()),
        ("initial_gamma".into(), format_bits(&trace.initial.gamma)),
        ("initial_edges".into(), format_edge_list(&trace.initial.edges)),
        (
            "initial_log_marginal".into(),
            format!("{}", trace.initial.log_marginal),
        ),
        ("final_gamma".into(), format_bits(&trace.final_state.gamma)),
        (
            "final_edges".into(),
            format_edge_list(&trace.final_state.edges),
        ),
        (
            "final_log_marginal".into(),
            format!("{}", trace.final_state.log_marginal),
        ),
    ];
    write_meta(&dir.join("meta"), &entries)?;

    if trace.schedule.save_sigma {
        let draws_dir = dir.join("draws");
        fs::create_dir_all(&draws_dir)?;
        for draw in &trace.draws {
            let q = trace.q;
            write_matrix_csv(
                &draws_dir.join(format!("sigma_{:08}.csv", draw.iteration)),
                &node_headers("v", q),
                draw.sigma.sigma(),
            )?;
            write_matrix_csv(
                &draws_dir.join(format!("precision_{:08}.csv", draw.iteration)),
                &node_headers("v", q),
                draw.sigma.precision(),
            )?;
            write_coefficients(
                &draws_dir.join(format!("coeffs_{:08}.csv", draw.iteration)),
                &draw.coefficients,
                q,
            )?;
        }
    }
    Ok(())
}

fn write_coefficients(path: &Path, draw: &CoefficientDraw, q: usize) -> Result<()> {
    let mut out = String::from("predictor,basis,");
    out.push_str(&node_headers("resp", q).join(","));
    out.push('\n');
    let rows = draw.coefficients().nrows();
    let groups = draw.predictors().len();
    let group_size = rows.checked_div(groups).unwrap_or(0);
    for (slot, &pred) in draw.predictors().iter().enumerate() {
        for s in 0..group_size {
            out.push_str(&format!("{},{}", pred + 1, s));
            for j in 0..q {
                out.push_str(&format!(",{}", draw.coefficients()[(slot * group_size + s, j)]));
            }
            out.push('\n');
        }
    }
    let mut file = fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

fn read_coefficients(path: &Path) -> Result<CoefficientDraw> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::parse(path_str(path), e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(path_str(path), e.to_string()))?
        .len();
    if headers < 2 {
        return Err(Error::parse(path_str(path), "coefficient header too short"));
    }
    let q = headers - 2;
    let mut predictors: Vec<usize> = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::parse(path_str(path), e.to_string()))?;
        let pred = parse_usize(path, &record[0])? - 1;
        if predictors.last() != Some(&pred) {
            predictors.push(pred);
        }
        rows.push(
            record
                .iter()
                .skip(2)
                .map(|f| parse_f64(path, f))
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    let coeffs = if rows.is_empty() {
        DMatrix::zeros(0, q)
    } else {
        DMatrix::from_fn(rows.len(), q, |r, c| rows[r][c])
    };
    Ok(CoefficientDraw::from_parts(coeffs, predictors))
}

/// Reads a chain directory written by [`write_trace`] back into memory.
pub fn read_trace(dir: &Path) -> Result<ChainTrace> {
    let meta_path = dir.join("meta");
    let meta = read_meta(&meta_path)?;
    let p = parse_usize(&meta_path, meta_get(&meta, "p", &meta_path)?)?;
    let q = parse_usize(&meta_path, meta_get(&meta, "q", &meta_path)?)?;
    let n = parse_usize(&meta_path, meta_get(&meta, "n", &meta_path)?)?;
    let schedule = Schedule {
        iterations: parse_usize(&meta_path, meta_get(&meta, "iterations", &meta_path)?)?,
        burn_in: parse_usize(&meta_path, meta_get(&meta, "burn_in", &meta_path)?)?,
        thin: parse_usize(&meta_path, meta_get(&meta, "thin", &meta_path)?)?,
        seed: meta_get(&meta, "seed", &meta_path)?
            .parse::<u64>()
            .map_err(|e| Error::parse(path_str(&meta_path), format!("bad seed: {e}")))?,
        stream: meta_get(&meta, "stream", &meta_path)?
            .parse::<u64>()
            .map_err(|e| Error::parse(path_str(&meta_path), format!("bad stream: {e}")))?,
        save_sigma: meta_get(&meta, "save_sigma", &meta_path)? == "true",
        audit_interval: parse_usize(&meta_path, meta_get(&meta, "audit_interval", &meta_path)?)?,
    };
    let hyper = Hyperparameters::new(
        parse_f64(&meta_path, meta_get(&meta, "g", &meta_path)?)?,
        parse_f64(&meta_path, meta_get(&meta, "b", &meta_path)?)?,
        parse_f64(&meta_path, meta_get(&meta, "d", &meta_path)?)?,
        parse_f64(&meta_path, meta_get(&meta, "delta", &meta_path)?)?,
        parse_f64(&meta_path, meta_get(&meta, "eta", &meta_path)?)?,
        parse_f64(&meta_path, meta_get(&meta, "alpha_g", &meta_path)?)?,
    )?;

    // Edge rows grouped by iteration.
    let edges_path = dir.join("edges.csv");
    let mut edges_by_iter: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(&edges_path)
            .map_err(|e| Error::parse(path_str(&edges_path), e.to_string()))?;
        for record in reader.records() {
            let record =
                record.map_err(|e| Error::parse(path_str(&edges_path), e.to_string()))?;
            let it = parse_usize(&edges_path, &record[0])?;
            let i = parse_usize(&edges_path, &record[1])? - 1;
            let j = parse_usize(&edges_path, &record[2])? - 1;
            edges_by_iter.entry(it).or_default().push((i, j));
        }
    }

    // Log-posterior pieces keyed by iteration.
    let logpost_path = dir.join("logpost.csv");
    let mut logpost_by_iter: BTreeMap<usize, (f64, f64, f64)> = BTreeMap::new();
    {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(&logpost_path)
            .map_err(|e| Error::parse(path_str(&logpost_path), e.to_string()))?;
        for record in reader.records() {
            let record =
                record.map_err(|e| Error::parse(path_str(&logpost_path), e.to_string()))?;
            let it = parse_usize(&logpost_path, &record[0])?;
            logpost_by_iter.insert(
                it,
                (
                    parse_f64(&logpost_path, &record[1])?,
                    parse_f64(&logpost_path, &record[2])?,
                    parse_f64(&logpost_path, &record[3])?,
                ),
            );
        }
    }

    // γ bits drive the record list.
    let gamma_path = dir.join("gamma.csv");
    let mut records: Vec<TraceRecord> = Vec::new();
    {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(&gamma_path)
            .map_err(|e| Error::parse(path_str(&gamma_path), e.to_string()))?;
        for record in reader.records() {
            let record =
                record.map_err(|e| Error::parse(path_str(&gamma_path), e.to_string()))?;
            if record.len() != p + 1 {
                return Err(Error::parse(
                    path_str(&gamma_path),
                    format!("row has {} fields, expected {}", record.len(), p + 1),
                ));
            }
            let it = parse_usize(&gamma_path, &record[0])?;
            let gamma: Vec<bool> = record
                .iter()
                .skip(1)
                .map(|f| match f {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    other => Err(Error::parse(
                        path_str(&gamma_path),
                        format!("bad bit {other:?}"),
                    )),
                })
                .collect::<Result<_>>()?;
            let (lm, lpg, lpgr) = logpost_by_iter.get(&it).copied().ok_or_else(|| {
                Error::parse(path_str(&logpost_path), format!("iteration {it} missing"))
            })?;
            records.push(TraceRecord {
                iteration: it,
                gamma,
                edges: edges_by_iter.remove(&it).unwrap_or_default(),
                log_marginal: lm,
                log_prior_gamma: lpg,
                log_prior_graph: lpgr,
            });
        }
    }

    // Saved draws, when present.
    let mut draws: Vec<SavedDraw> = Vec::new();
    let draws_dir = dir.join("draws");
    if draws_dir.is_dir() {
        let mut sigma_files: Vec<PathBuf> = fs::read_dir(&draws_dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("sigma_") && n.ends_with(".csv"))
            })
            .collect();
        sigma_files.sort();
        for sigma_path in sigma_files {
            let name = sigma_path.file_name().unwrap().to_str().unwrap();
            let iter_text = &name["sigma_".len()..name.len() - ".csv".len()];
            let iteration = parse_usize(&sigma_path, iter_text)?;
            let (_, sigma) = read_matrix_csv(&sigma_path)?;
            let (_, precision) =
                read_matrix_csv(&draws_dir.join(format!("precision_{iter_text}.csv")))?;
            let coefficients =
                read_coefficients(&draws_dir.join(format!("coeffs_{iter_text}.csv")))?;
            draws.push(SavedDraw {
                iteration,
                sigma: CovarianceDraw::from_parts(sigma, precision),
                coefficients,
            });
        }
    }

    let stat = |key: &str| -> Result<usize> { parse_usize(&meta_path, meta_get(&meta, key, &meta_path)?) };
    let gamma_stats = MoveStats {
        proposed: stat("gamma_proposed")?,
        accepted: stat("gamma_accepted")?,
        stays: stat("gamma_stays")?,
        rejected_nondecomposable: 0,
        rank_rejections: stat("gamma_rank_rejections")?,
    };
    let graph_stats = MoveStats {
        proposed: stat("graph_proposed")?,
        accepted: stat("graph_accepted")?,
        stays: stat("graph_stays")?,
        rejected_nondecomposable: stat("graph_rejected_nondecomposable")?,
        rank_rejections: 0,
    };
    let initial = StateSummary {
        gamma: parse_bits(meta_get(&meta, "initial_gamma", &meta_path)?, &meta_path)?,
        edges: parse_edge_list(meta_get(&meta, "initial_edges", &meta_path)?, &meta_path)?,
        log_marginal: parse_f64(&meta_path, meta_get(&meta, "initial_log_marginal", &meta_path)?)?,
    };
    let final_state = StateSummary {
        gamma: parse_bits(meta_get(&meta, "final_gamma", &meta_path)?, &meta_path)?,
        edges: parse_edge_list(meta_get(&meta, "final_edges", &meta_path)?, &meta_path)?,
        log_marginal: parse_f64(&meta_path, meta_get(&meta, "final_log_marginal", &meta_path)?)?,
    };

    Ok(ChainTrace {
        p,
        q,
        n,
        hyper,
        schedule,
        records,
        draws,
        gamma_stats,
        graph_stats,
        audit_failures: stat("audit_failures")?,
        initial,
        final_state,
    })
}

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde_json::json;
use sgfif::analysis::{box_counts_csv, dimension_report, holder_fit_with, holder_predict, HolderCase};
use sgfif::checks::run_checks;
use sgfif::evaluator::{eval_approx, eval_exact, ChaosGame, GraphSample};
use sgfif::export::{fmt_g17, write_sample_row, SAMPLE_CSV_HEADER};
use sgfif::gasket::{vertex_count, Address, Corner, Point, Word, MAX_ENUM_DEPTH};
use sgfif::model::{check_compatibility, FifModel};
use sgfif::vertex_grid::VertexGrid;
use sgfif::FifError;

use crate::config::ModelConfig;
use crate::error::{CliError, CliResult};
use crate::output::{write_atomic, write_ppm};
use crate::Outcome;

/// Largest number of CSV rows `grid` will write.
pub const GRID_ROW_BUDGET: usize = 100_000_000;

/// Rows of the vertex grid evaluated per parallel batch.
const GRID_BATCH_ROWS: usize = 64;

fn load(path: &Path) -> CliResult<FifModel> {
    ModelConfig::load(path)?.build()
}

pub fn build(config: &Path) -> CliResult<Outcome> {
    let model = load(config)?;
    let b = model.bounds();
    let hc = model.holder_constants();
    let compat = check_compatibility(&model, 16);
    println!("n={}", model.depth());
    println!("a={}", fmt_g17(model.a()));
    println!("alpha_sup={}", fmt_g17(b.alpha_sup));
    println!("shift_sup={}", fmt_g17(b.shift_sup));
    println!("f_sup_bound={}", fmt_g17(b.f_sup_bound));
    println!("k_h={}", fmt_g17(hc.k_h));
    println!("k_alpha={}", fmt_g17(hc.k_alpha));
    println!("cell_pairs={}", model.cell_pair_count());
    println!("data_vertices={}", model.data().len());
    println!("junction_comparisons={}", compat.comparisons);
    println!("max_junction_discrepancy={}", fmt_g17(compat.max_discrepancy));
    println!("compatibility={}", if compat.passed() { "PASS" } else { "FAIL" });
    Ok(Outcome {
        verdict: Some(compat.passed()),
        summary: json!({
            "a": model.a(),
            "alpha_sup": b.alpha_sup,
            "shift_sup": b.shift_sup,
            "f_sup_bound": b.f_sup_bound,
            "max_junction_discrepancy": compat.max_discrepancy,
        }),
        ..Outcome::default()
    })
}

pub fn eval(config: &Path, point: Option<&[f64]>, address: Option<&[String]>, depth: usize) -> CliResult<Outcome> {
    let model = load(config)?;
    match (point, address) {
        (Some(&[tx, ty, sx, sy]), _) => {
            let r = eval_approx(&model, Point::new(tx, ty), Point::new(sx, sy), depth)?;
            println!("value={}", fmt_g17(r.value));
            println!("error_bound={}", fmt_g17(r.error_bound));
            Ok(Outcome {
                summary: json!({ "value": r.value, "error_bound": r.error_bound }),
                ..Outcome::default()
            })
        }
        (_, Some([t, s])) => {
            let parse = |a: &str| -> CliResult<Address> {
                a.parse().map_err(|e: FifError| CliError::Usage(format!("--address {a:?}: {e}")))
            };
            let value = eval_exact(&model, &parse(t)?, &parse(s)?);
            println!("value={}", fmt_g17(value));
            Ok(Outcome {
                summary: json!({ "value": value }),
                ..Outcome::default()
            })
        }
        _ => Err(CliError::Usage("give --point tX tY sX sY or --address A B".into())),
    }
}

pub fn grid(config: &Path, depth: usize, out: &Path, ppm: Option<&Path>) -> CliResult<Outcome> {
    let model = load(config)?;
    let n = model.depth();
    if !depth.is_multiple_of(n) {
        return Err(FifError::Precondition(format!("grid depth {depth} is not a multiple of N = {n}")).into());
    }
    let rows = (depth <= MAX_ENUM_DEPTH)
        .then(|| vertex_count(depth))
        .and_then(|v| v.checked_mul(v))
        .filter(|&r| r <= GRID_ROW_BUDGET)
        .ok_or_else(|| {
            FifError::Capacity(format!(
                "a depth-{depth} grid has more than {GRID_ROW_BUDGET} rows; lower --depth"
            ))
        })?;
    let grid = VertexGrid::new(depth)?;
    let v = grid.len();
    let verts = grid.vertices();
    let t_points: Vec<Point> = verts.iter().map(|a| model.gasket1().from_bary(a.bary())).collect();
    let s_points: Vec<Point> = verts.iter().map(|a| model.gasket2().from_bary(a.bary())).collect();
    let mut kept = Vec::with_capacity(if ppm.is_some() { rows } else { 0 });

    write_atomic(out, |w| {
        writeln!(w, "{SAMPLE_CSV_HEADER}")?;
        for start in (0..v).step_by(GRID_BATCH_ROWS) {
            let end = (start + GRID_BATCH_ROWS).min(v);
            let values: Vec<f64> = (start * v..end * v)
                .into_par_iter()
                .map(|k| eval_exact(&model, &verts[k / v], &verts[k % v]))
                .collect();
            for (k, &value) in (start * v..end * v).zip(&values) {
                let p = GraphSample {
                    t: t_points[k / v],
                    s: s_points[k % v],
                    value,
                };
                write_sample_row(w, &p)?;
            }
            if ppm.is_some() {
                kept.extend_from_slice(&values);
            }
        }
        Ok(())
    })?;

    let mut outputs = vec![out.to_path_buf()];
    if let Some(p) = ppm {
        write_ppm(p, v, &kept)?;
        outputs.push(p.to_path_buf());
    }
    println!("rows={rows}");
    Ok(Outcome {
        outputs,
        summary: json!({ "rows": rows, "vertices_per_factor": v }),
        ..Outcome::default()
    })
}

pub fn chaos(config: &Path, points: usize, seed: u64, burn_in: usize, out: &Path) -> CliResult<Outcome> {
    let model = load(config)?;
    if points == 0 {
        return Err(FifError::Precondition("--points must be positive".into()).into());
    }
    let max_abs = write_atomic(out, |w| {
        writeln!(w, "{SAMPLE_CSV_HEADER}")?;
        let mut max_abs: f64 = 0.0;
        for p in ChaosGame::new(&model, seed).skip(burn_in).take(points) {
            max_abs = max_abs.max(p.value.abs());
            write_sample_row(w, &p)?;
        }
        Ok(max_abs)
    })?;
    println!("rows={points}");
    Ok(Outcome {
        outputs: vec![out.to_path_buf()],
        summary: json!({ "rows": points, "max_abs_value": max_abs }),
        ..Outcome::default()
    })
}

pub fn dim(
    config: &Path,
    min_level: usize,
    max_level: usize,
    samples_per_cell: usize,
    out: Option<&Path>,
) -> CliResult<Outcome> {
    if min_level == 0 || max_level < min_level + 2 {
        return Err(CliError::Usage(format!(
            "dimension fit needs at least 3 levels starting from 1, got {min_level}..{max_level}"
        )));
    }
    let model = load(config)?;
    let rep = dimension_report(&model, min_level..=max_level, samples_per_cell)?;
    let csv = box_counts_csv(&rep.levels);
    print!("{csv}");
    println!("slope={} std_error={}", fmt_g17(rep.fit.slope), fmt_g17(rep.fit.std_error));

    let mut outcome = Outcome::default();
    match (rep.bounds, rep.sandwich()) {
        (Some((lo, hi)), Some(ok)) => {
            println!("lower_bound={} upper_bound={}", fmt_g17(lo), fmt_g17(hi));
            println!("verdict={}", if ok { "PASS" } else { "FAIL" });
            outcome.verdict = Some(ok);
        }
        _ => {
            let w = format!(
                "sup |alpha| = {} is not below 2^-{} = {}; dimension bounds suppressed",
                fmt_g17(model.bounds().alpha_sup),
                model.depth(),
                fmt_g17(model.a())
            );
            println!("warning: {w}");
            outcome.warnings.push(w);
        }
    }
    if let Some(p) = out {
        write_atomic(p, |w| w.write_all(csv.as_bytes()))?;
        outcome.outputs.push(p.to_path_buf());
    }
    outcome.summary = json!({
        "slope": rep.fit.slope,
        "std_error": rep.fit.std_error,
        "bounds": rep.bounds.map(|(lo, hi)| [lo, hi]),
        "counts": rep.levels.iter().map(|r| r.count).collect::<Vec<_>>(),
    });
    Ok(outcome)
}

pub fn holder(
    config: &Path,
    min_level: usize,
    max_level: usize,
    samples_per_cell: usize,
    out: Option<&Path>,
) -> CliResult<Outcome> {
    if min_level == 0 || max_level <= min_level {
        return Err(CliError::Usage(format!(
            "holder fit needs 1 <= --min-level < --max-level, got {min_level}..{max_level}"
        )));
    }
    let model = load(config)?;
    let pred = holder_predict(&model);
    let fit = holder_fit_with(&model, min_level, max_level, samples_per_cell)?;
    let mut text = pred.to_kv();
    text.push_str(&format!("fit_exponent={}\n", fmt_g17(fit.exponent)));
    text.push_str(&format!("fit_std_error={}\n", fmt_g17(fit.std_error)));
    text.push_str(&format!("fit_degenerate={}\n", fit.degenerate));
    let verdict = match pred.case {
        HolderCase::Borderline => None,
        _ => Some(fit.degenerate || fit.exponent >= pred.exponent - 0.2),
    };
    let verdict_text = match verdict {
        Some(true) => "PASS",
        Some(false) => "FAIL",
        None => "n/a",
    };
    text.push_str(&format!("verdict={verdict_text}\n"));
    print!("{text}");
    let mut outputs = Vec::new();
    if let Some(p) = out {
        write_atomic(p, |w| w.write_all(text.as_bytes()))?;
        outputs.push(p.to_path_buf());
    }
    Ok(Outcome {
        outputs,
        verdict,
        summary: json!({
            "case": pred.case.id(),
            "predicted": pred.exponent,
            "fit": if fit.degenerate { None } else { Some(fit.exponent) },
            "degenerate": fit.degenerate,
        }),
        ..Outcome::default()
    })
}

/// Parses `"ω|η:i,j:delta"` with 1-based corner labels.
fn parse_fault(spec: &str) -> CliResult<(Word, Word, Corner, Corner, f64)> {
    let bad = || CliError::Usage(format!("--inject-fault {spec:?} must look like \"1|1:2,1:0.1\""));
    let parts: Vec<&str> = spec.split(':').collect();
    let [cells, corners, delta] = parts[..] else {
        return Err(bad());
    };
    let (w, e) = cells.split_once('|').ok_or_else(bad)?;
    let (i, j) = corners.split_once(',').ok_or_else(bad)?;
    let corner = |s: &str| s.trim().parse::<u8>().ok().and_then(|l| Corner::new(l).ok()).ok_or_else(bad);
    Ok((
        w.parse().map_err(|_| bad())?,
        e.parse().map_err(|_| bad())?,
        corner(i)?,
        corner(j)?,
        delta.trim().parse().map_err(|_| bad())?,
    ))
}

pub fn check(config: &Path, seed: u64, inject_fault: Option<&str>) -> CliResult<Outcome> {
    let mut model = load(config)?;
    if let Some(spec) = inject_fault {
        let (w, e, i, j, delta) = parse_fault(spec)?;
        model = model.with_shift_perturbation(&w, &e, i, j, delta)?;
    }
    let results = run_checks(&model, seed)?;
    for r in &results {
        println!("{r}");
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    Ok(Outcome {
        verdict: Some(failed.is_empty()),
        summary: json!({ "checks": results.len(), "failed": failed }),
        ..Outcome::default()
    })
}

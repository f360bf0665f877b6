//! Hölder-exponent prediction and fitting, oscillation tables, box counting and
//! dimension estimates.

use std::collections::HashSet;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{FifError, Result};
use crate::evaluator::{eval_approx_bary, eval_exact, steps_for_error, GraphSample};
use crate::export::fmt_g17;
use crate::gasket::Bary;
use crate::model::FifModel;
use crate::sampling::gasket_pair_points;
use crate::vertex_grid::VertexGrid;

/// Loss taken from `s` in the borderline case `‖α‖∞ = 2^{-N}`.
pub const CASE2_MU: f64 = 0.01;

/// Largest number of cell-pairs an oscillation table may have.
pub const DEFAULT_CELL_BUDGET: usize = 10_000_000;

/// Certified error allowed for interior oscillation samples.
pub const INTERIOR_ERROR_TARGET: f64 = 1e-6;

/// Samples per cell-pair used when the caller does not choose.
pub const DEFAULT_SAMPLES_PER_CELL: usize = 16;

/// `2 ln 3 / ln 2`, the dimension of the product of two gaskets.
pub fn product_gasket_dimension() -> f64 {
    2.0 * 3f64.ln() / 2f64.ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HolderCase {
    /// `‖α‖∞ < 2^{-N}`: exponent `s`.
    Below = 1,
    /// `‖α‖∞ = 2^{-N}`: exponent `s − μ`.
    Borderline = 2,
    /// `‖α‖∞ > 2^{-N}`: exponent `s − 1 + ln‖α‖∞ / ln a`.
    Above = 3,
}

impl HolderCase {
    pub fn id(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolderReport {
    pub a: f64,
    pub alpha_sup: f64,
    /// `‖α‖∞ / a`.
    pub delta: f64,
    pub s_h: f64,
    pub s_alpha: f64,
    pub s: f64,
    pub case: HolderCase,
    pub exponent: f64,
    pub mu: Option<f64>,
    pub lambda: Option<f64>,
    pub k_h: f64,
    pub k_alpha: f64,
}

impl HolderReport {
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| writeln!(out, "{k}={v}").expect("write to string");
        kv("a", fmt_g17(self.a));
        kv("alpha_sup", fmt_g17(self.alpha_sup));
        kv("delta", fmt_g17(self.delta));
        kv("s_h", fmt_g17(self.s_h));
        kv("s_alpha", fmt_g17(self.s_alpha));
        kv("s", fmt_g17(self.s));
        kv("case", self.case.id().to_string());
        kv("exponent", fmt_g17(self.exponent));
        if let Some(mu) = self.mu {
            kv("mu", fmt_g17(mu));
        }
        if let Some(l) = self.lambda {
            kv("lambda", fmt_g17(l));
        }
        kv("k_h", fmt_g17(self.k_h));
        kv("k_alpha", fmt_g17(self.k_alpha));
        out
    }
}

/// Predicted Hölder exponent of `f` from the scaling bound and the depth.
pub fn holder_predict(model: &FifModel) -> HolderReport {
    let a = model.a();
    let alpha_sup = model.bounds().alpha_sup;
    let hc = model.holder_constants();
    let s = hc.s_h.min(hc.s_alpha);
    let (case, exponent, mu, lambda) = if alpha_sup < a {
        (HolderCase::Below, s, None, None)
    } else if alpha_sup == a {
        (HolderCase::Borderline, s - CASE2_MU, Some(CASE2_MU), None)
    } else {
        let l = s - 1.0 + alpha_sup.ln() / a.ln();
        (HolderCase::Above, l, None, Some(l))
    };
    HolderReport {
        a,
        alpha_sup,
        delta: alpha_sup / a,
        s_h: hc.s_h,
        s_alpha: hc.s_alpha,
        s,
        case,
        exponent,
        mu,
        lambda,
        k_h: hc.k_h,
        k_alpha: hc.k_alpha,
    }
}

/// Sampled extremes of `f` on every level-`n` cell-pair.
///
/// Cell-pair `(ω, η)` is stored at `ω·3^n + η` with words indexed in base 3.
/// Sampling can only under-estimate the true oscillation.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillationTable {
    level: usize,
    min: Vec<f64>,
    max: Vec<f64>,
}

impl OscillationTable {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn len(&self) -> usize {
        self.min.len()
    }

    pub fn is_empty(&self) -> bool {
        self.min.is_empty()
    }

    pub fn min(&self, cell: usize) -> f64 {
        self.min[cell]
    }

    pub fn max(&self, cell: usize) -> f64 {
        self.max[cell]
    }

    /// Oscillation `max − min` of one cell-pair.
    pub fn range(&self, cell: usize) -> f64 {
        self.max[cell] - self.min[cell]
    }

    pub fn ranges(&self) -> impl Iterator<Item = f64> + '_ {
        self.min.iter().zip(&self.max).map(|(lo, hi)| hi - lo)
    }

    pub fn max_range(&self) -> f64 {
        self.ranges().fold(0.0, f64::max)
    }

    pub fn sum_range(&self) -> f64 {
        self.ranges().sum()
    }
}

pub fn oscillation(model: &FifModel, n: usize, samples_per_cell: usize) -> Result<OscillationTable> {
    oscillation_with_budget(model, n, samples_per_cell, DEFAULT_CELL_BUDGET)
}

/// Oscillation table at level `n` from the 9 exact corner values of each
/// cell-pair plus `samples_per_cell − 9` interior points.
pub fn oscillation_with_budget(
    model: &FifModel,
    n: usize,
    samples_per_cell: usize,
    cell_budget: usize,
) -> Result<OscillationTable> {
    if n == 0 {
        return Err(FifError::Precondition("oscillation level must be at least 1".into()));
    }
    if samples_per_cell < 9 {
        return Err(FifError::Precondition(format!(
            "samples per cell must be at least 9, got {samples_per_cell}"
        )));
    }
    let cells_per_factor = 3usize
        .checked_pow(n as u32)
        .filter(|c| c.checked_mul(*c).is_some_and(|cc| cc <= cell_budget))
        .ok_or_else(|| {
            FifError::Capacity(format!(
                "level {n} has 9^{n} cell-pairs, over the budget of {cell_budget}; lower the level"
            ))
        })?;
    let grid = VertexGrid::new(n)?;
    let v = grid.len();
    let verts = grid.vertices();
    let values: Vec<f64> = (0..v * v)
        .into_par_iter()
        .map(|k| eval_exact(model, &verts[k / v], &verts[k % v]))
        .collect();

    let interior = gasket_pair_points(samples_per_cell - 9);
    let k = steps_for_error(model, INTERIOR_ERROR_TARGET);
    let corner_bary: Vec<[Bary; 3]> = (0..cells_per_factor)
        .map(|c| grid.cell_corners(c).map(|i| grid.bary(i)))
        .collect();

    let extremes: Vec<(f64, f64)> = (0..cells_per_factor * cells_per_factor)
        .into_par_iter()
        .map(|cell| -> Result<(f64, f64)> {
            let (ci, cj) = (cell / cells_per_factor, cell % cells_per_factor);
            let (ct, cs) = (grid.cell_corners(ci), grid.cell_corners(cj));
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &a in &ct {
                for &b in &cs {
                    let x = values[a * v + b];
                    lo = lo.min(x);
                    hi = hi.max(x);
                }
            }
            for (lt, ls) in &interior {
                let t = map_into(&corner_bary[ci], lt);
                let s = map_into(&corner_bary[cj], ls);
                let x = eval_approx_bary(model, t, s, k)?.value;
                lo = lo.min(x);
                hi = hi.max(x);
            }
            Ok((lo, hi))
        })
        .collect::<Result<_>>()?;
    let (min, max) = extremes.into_iter().unzip();
    Ok(OscillationTable { level: n, min, max })
}

/// Image of local coordinates in the cell with the given corner coordinates.
fn map_into(corners: &[Bary; 3], local: &Bary) -> Bary {
    let mut out = [0.0; 3];
    for (c, w) in corners.iter().zip(local) {
        for d in 0..3 {
            out[d] += w * c[d];
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxCountRecord {
    pub level: usize,
    /// `2^{-n} · side`.
    pub delta: f64,
    pub count: u64,
}

/// Number of `δ`-boxes covering the graph at level `n`, one vertical stack per cell-pair.
///
/// Boxes are aligned to multiples of `δ = 2^{-n}·side` in the value direction, so
/// a cell-pair whose values span `[lo, hi]` needs `⌊hi/δ⌋ − ⌊lo/δ⌋ + 1` of them.
pub fn box_count(model: &FifModel, n: usize, table: &OscillationTable) -> Result<BoxCountRecord> {
    if table.level() != n {
        return Err(FifError::Precondition(format!(
            "oscillation table is for level {}, not {n}",
            table.level()
        )));
    }
    let delta = (-(n as f64)).exp2() * model.side();
    let count = table
        .min
        .iter()
        .zip(&table.max)
        .map(|(lo, hi)| ((hi / delta).floor() - (lo / delta).floor()) as u64 + 1)
        .sum();
    Ok(BoxCountRecord { level: n, delta, count })
}

/// Distinct boxes of the level-`n` grid hit by a cloud of graph points.
///
/// Each factor is cut along its barycentric coordinates into cells of size
/// `2^{-n}`, and the value axis into intervals of length `2^{-n}·side`.
pub fn cloud_box_count(model: &FifModel, n: usize, samples: &[GraphSample]) -> u64 {
    let scale = (n as f64).exp2();
    let vscale = scale / model.side();
    let (g1, g2) = (model.gasket1(), model.gasket2());
    let bin = |x: f64, s: f64| (x * s).floor() as i64;
    let boxes: HashSet<[i64; 5]> = samples
        .iter()
        .map(|p| {
            let l = g1.to_bary(p.t);
            let m = g2.to_bary(p.s);
            [
                bin(l[1], scale),
                bin(l[2], scale),
                bin(m[1], scale),
                bin(m[2], scale),
                bin(p.value, vscale),
            ]
        })
        .collect();
    boxes.len() as u64
}

pub fn box_counts_csv(records: &[BoxCountRecord]) -> String {
    let mut out = String::from("level,delta,count\n");
    for r in records {
        writeln!(out, "{},{},{}", r.level, fmt_g17(r.delta), r.count).expect("write to string");
    }
    out
}

/// Ordinary least-squares line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; zero for two points.
    pub std_error: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    let n = xs.len();
    if n != ys.len() || n < 2 {
        return Err(FifError::Precondition(format!(
            "a line fit needs at least 2 paired points, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(FifError::Precondition("a line fit needs distinct abscissae".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let std_error = if n > 2 {
        let ssr: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2))
            .sum();
        (ssr / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LineFit {
        slope,
        intercept,
        std_error,
    })
}

/// Slope of `ln count` against `n ln 2`.
pub fn estimate_box_dimension(records: &[BoxCountRecord]) -> Result<LineFit> {
    let levels: HashSet<usize> = records.iter().map(|r| r.level).collect();
    if levels.len() < 3 || levels.len() != records.len() {
        return Err(FifError::Precondition(format!(
            "dimension estimate needs at least 3 records at distinct levels, got {} records at {} levels",
            records.len(),
            levels.len()
        )));
    }
    let xs: Vec<f64> = records.iter().map(|r| r.level as f64 * 2f64.ln()).collect();
    let ys: Vec<f64> = records.iter().map(|r| (r.count as f64).ln()).collect();
    linear_fit(&xs, &ys)
}

/// Lower and upper bounds on the dimension of the graph.
pub fn dimension_bounds(model: &FifModel) -> Result<(f64, f64)> {
    let a = model.a();
    let alpha_sup = model.bounds().alpha_sup;
    if alpha_sup >= a {
        return Err(FifError::HypothesisNotSatisfied {
            alpha_sup,
            n: model.depth(),
            threshold: a,
        });
    }
    Ok(bounds_for_exponent(holder_predict(model).s))
}

/// `(2 ln3/ln2, 1 − s + 2 ln3/ln2)`.
pub fn bounds_for_exponent(s: f64) -> (f64, f64) {
    let d = product_gasket_dimension();
    (d, 1.0 - s + d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimensionReport {
    /// `None` when the bounds hypothesis fails.
    pub bounds: Option<(f64, f64)>,
    pub fit: LineFit,
    pub levels: Vec<BoxCountRecord>,
}

impl DimensionReport {
    /// Slack allowed below the lower bound.
    pub const LOWER_SLACK: f64 = 0.15;
    /// Slack allowed above the upper bound.
    pub const UPPER_SLACK: f64 = 0.2;

    /// Whether the slope lies within the slackened bounds; `None` without bounds.
    pub fn sandwich(&self) -> Option<bool> {
        self.bounds.map(|(lo, hi)| {
            self.fit.slope >= lo - Self::LOWER_SLACK && self.fit.slope <= hi + Self::UPPER_SLACK
        })
    }

    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| writeln!(out, "{k}={v}").expect("write to string");
        if let Some((lo, hi)) = self.bounds {
            kv("lower_bound", fmt_g17(lo));
            kv("upper_bound", fmt_g17(hi));
        }
        kv("estimated_slope", fmt_g17(self.fit.slope));
        kv("std_error", fmt_g17(self.fit.std_error));
        for r in &self.levels {
            kv(&format!("count_{}", r.level), r.count.to_string());
        }
        out
    }
}

/// Box counts at every level in `levels`, their slope, and the bounds when they apply.
pub fn dimension_report(
    model: &FifModel,
    levels: std::ops::RangeInclusive<usize>,
    samples_per_cell: usize,
) -> Result<DimensionReport> {
    let records = levels
        .map(|n| box_count(model, n, &oscillation(model, n, samples_per_cell)?))
        .collect::<Result<Vec<_>>>()?;
    let fit = estimate_box_dimension(&records)?;
    let bounds = match dimension_bounds(model) {
        Ok(b) => Some(b),
        Err(FifError::HypothesisNotSatisfied { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(DimensionReport {
        bounds,
        fit,
        levels: records,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolderFit {
    /// Fitted exponent; `+∞` when every oscillation is zero.
    pub exponent: f64,
    pub std_error: f64,
    pub degenerate: bool,
    /// `(level, max-cell oscillation)`.
    pub levels: Vec<(usize, f64)>,
}

pub fn holder_fit(model: &FifModel, n_min: usize, n_max: usize) -> Result<HolderFit> {
    holder_fit_with(model, n_min, n_max, DEFAULT_SAMPLES_PER_CELL)
}

/// Slope of `ln(max-cell oscillation)` against `ln 2^{-n}` over `n_min..=n_max`.
pub fn holder_fit_with(
    model: &FifModel,
    n_min: usize,
    n_max: usize,
    samples_per_cell: usize,
) -> Result<HolderFit> {
    if n_min == 0 || n_min >= n_max {
        return Err(FifError::Precondition(format!(
            "holder fit needs 1 ≤ min level < max level, got {n_min}..{n_max}"
        )));
    }
    let levels = (n_min..=n_max)
        .map(|n| Ok((n, oscillation(model, n, samples_per_cell)?.max_range())))
        .collect::<Result<Vec<_>>>()?;
    let positive: Vec<&(usize, f64)> = levels.iter().filter(|(_, r)| *r > 0.0).collect();
    if positive.len() < 2 {
        return Ok(HolderFit {
            exponent: f64::INFINITY,
            std_error: 0.0,
            degenerate: true,
            levels,
        });
    }
    let xs: Vec<f64> = positive.iter().map(|(n, _)| -(*n as f64) * 2f64.ln()).collect();
    let ys: Vec<f64> = positive.iter().map(|(_, r)| r.ln()).collect();
    let fit = linear_fit(&xs, &ys)?;
    Ok(HolderFit {
        exponent: fit.slope,
        std_error: fit.std_error,
        degenerate: false,
        levels,
    })
}

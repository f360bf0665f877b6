//! Invariant suite run against a built model.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{box_count, holder_predict, oscillation, HolderCase};
use crate::error::Result;
use crate::evaluator::{chaos_game, eval_approx, eval_exact};
use crate::gasket::{enumerate_vertices, vertex_count, Address, Corner, Word};
use crate::model::{check_compatibility, interior_vertices, FifModel};
use crate::rb::{rb_apply, solve_fixed_point, GridFunction};
use crate::sampling::triangle_samples;
use crate::vertex_grid::VertexGrid;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

fn result(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult { name, passed, detail }
}

/// Uniformly random address with a word of at most `max_len` letters.
pub fn random_address(rng: &mut impl Rng, max_len: usize) -> Address {
    let len = rng.gen_range(0..=max_len);
    let word = Word::from_letters((0..len).map(|_| Corner::from_index(rng.gen_range(0..3))).collect());
    Address::new(word, Corner::from_index(rng.gen_range(0..3)))
}

/// Largest functional-equation residual over `count` random address pairs.
///
/// Pairs `(t, s)` of depth at most `max_len` are pushed through a random
/// depth-N cell-pair and compared against `α f + h` at the preimage.
pub fn functional_equation_residual(model: &FifModel, count: usize, max_len: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = model.depth();
    let per = model.cells_per_factor();
    (0..count)
        .map(|_| {
            let t = random_address(&mut rng, max_len);
            let s = random_address(&mut rng, max_len);
            let (wi, ei) = (rng.gen_range(0..per), rng.gen_range(0..per));
            let (omega, eta) = (Word::from_index(wi, n), Word::from_index(ei, n));
            let image_t = Address::new(omega.concat(&t.word), t.corner);
            let image_s = Address::new(eta.concat(&s.word), s.corner);
            let cell = wi * per + ei;
            let (lt, ls) = (t.bary(), s.bary());
            let lhs = eval_exact(model, &image_t, &image_s);
            let rhs = model.alpha_at(cell, &lt, &ls) * eval_exact(model, &t, &s) + model.shift_at(cell, &lt, &ls);
            (lhs - rhs).abs()
        })
        .fold(0.0, f64::max)
}

/// Largest `|f|` over `count` points with one coordinate at an outer corner.
pub fn boundary_residual(model: &FifModel, count: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let interior = triangle_samples(count + 3);
    let mut worst: f64 = 0.0;
    for i in 0..count {
        let corner = Address::corner(Corner::from_index(rng.gen_range(0..3)));
        let other = random_address(&mut rng, 6);
        let (t, s) = if i % 2 == 0 { (&corner, &other) } else { (&other, &corner) };
        worst = worst.max(eval_exact(model, t, s).abs());
        let b = interior[i + 3];
        let (pt, ps) = if i % 2 == 0 {
            (model.gasket1().corner(corner.corner), model.gasket2().from_bary(b))
        } else {
            (model.gasket1().from_bary(b), model.gasket2().corner(corner.corner))
        };
        worst = worst.max(eval_approx(model, pt, ps, 4)?.value.abs());
    }
    Ok(worst)
}

/// Largest `|eval_approx(k) − eval_exact|` minus its certified bound over
/// `count` random depth-`kN` vertex pairs; nonpositive means every bound held.
pub fn approx_excess(model: &FifModel, k: usize, count: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let depth = k * model.depth();
    let word = |rng: &mut ChaCha8Rng| Word::from_letters((0..depth).map(|_| Corner::from_index(rng.gen_range(0..3))).collect());
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..count {
        let t = Address::new(word(&mut rng), Corner::from_index(rng.gen_range(0..3)));
        let s = Address::new(word(&mut rng), Corner::from_index(rng.gen_range(0..3)));
        let exact = eval_exact(model, &t, &s);
        let pt = model.gasket1().from_bary(t.bary());
        let ps = model.gasket2().from_bary(s.bary());
        let approx = eval_approx(model, pt, ps, k)?;
        worst = worst.max((approx.value - exact).abs() - approx.error_bound);
    }
    Ok(worst)
}

/// Largest `‖Tg − Th‖ − ‖α‖∞‖g − h‖` over random grid-function pairs.
pub fn contraction_excess(model: &FifModel, depth: usize, pairs: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = Arc::new(VertexGrid::new(depth)?);
    let len = grid.len() * grid.len();
    let scale = 1.0 + model.bounds().f_sup_bound;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..pairs {
        let mut random = || {
            let v = (0..len).map(|_| rng.gen_range(-scale..scale)).collect();
            GridFunction::from_values(grid.clone(), v)
        };
        let (g, h) = (random()?, random()?);
        let lhs = rb_apply(model, &g)?.sup_distance(&rb_apply(model, &h)?);
        worst = worst.max(lhs - model.bounds().alpha_sup * g.sup_distance(&h));
    }
    Ok(worst)
}

/// Largest interpolation error `|f(y) − z_y| / (1 + |z_y|)` over the data vertices.
pub fn interpolation_error(model: &FifModel) -> Result<f64> {
    Ok(interior_vertices(model.depth())?
        .iter()
        .map(|pv| {
            let z = model.data().get(pv).unwrap_or(0.0);
            (eval_exact(model, &pv.first, &pv.second) - z).abs() / (1.0 + z.abs())
        })
        .fold(0.0, f64::max))
}

/// Largest `|value − eval_approx(k)|` minus the certified bound along a chaos orbit.
pub fn chaos_excess(model: &FifModel, count: usize, seed: u64, k: usize) -> Result<f64> {
    let mut worst = f64::NEG_INFINITY;
    for p in chaos_game(model, count, seed, 0)? {
        let r = eval_approx(model, p.t, p.s, k)?;
        worst = worst.max((p.value - r.value).abs() - r.error_bound);
    }
    Ok(worst)
}

/// Runs every invariant against `model`; sampling is deterministic in `seed`.
pub fn run_checks(model: &FifModel, seed: u64) -> Result<Vec<CheckResult>> {
    let n = model.depth();
    let b = model.bounds();
    let tol = 1e-9 * (1.0 + b.f_sup_bound);
    let mut out = Vec::new();

    let compat = check_compatibility(model, 16);
    let detail = match compat.violations.first() {
        Some(v) => format!(
            "{} of {} comparisons disagree; first at junction {} ({}) by {:e}",
            compat.violations.len(),
            compat.comparisons,
            v.location,
            v.cells,
            v.discrepancy
        ),
        None => format!(
            "{} comparisons, max discrepancy {:e}",
            compat.comparisons, compat.max_discrepancy
        ),
    };
    out.push(result("compatibility", compat.passed(), detail));

    let e = interpolation_error(model)?;
    out.push(result("interpolation", e <= 1e-12, format!("max relative error {e:e}")));

    let r = boundary_residual(model, 200, seed)?;
    out.push(result("boundary-vanishing", r <= tol, format!("max |f| {r:e}")));

    let r = functional_equation_residual(model, 2000, 6, seed);
    out.push(result("functional-equation", r <= tol, format!("max residual {r:e}")));

    let x = approx_excess(model, 2, 200, seed)?;
    out.push(result(
        "approx-bound",
        x <= 1e-12,
        format!("max error minus bound {x:e} at k=2"),
    ));

    let depth = if n <= 2 { n + 1 } else { n };
    let x = contraction_excess(model, depth, 4, seed)?;
    out.push(result(
        "contraction",
        x <= 1e-12,
        format!("max excess {x:e} on depth-{depth} grids"),
    ));

    let fp_tol = 1e-10;
    let fp = solve_fixed_point(model, n, fp_tol)?;
    let residual = rb_apply(model, &fp.grid)?.sup_distance(&fp.grid);
    out.push(result(
        "fixed-point-residual",
        residual <= 2.0 * fp_tol,
        format!("residual {residual:e} after {} iterations", fp.iterations),
    ));

    let x = chaos_excess(model, 2000, seed, 12.min(52 / n).max(1))?;
    out.push(result("chaos-on-graph", x <= 1e-9, format!("max excess {x:e}")));

    let h = holder_predict(model);
    let a = h.a;
    let flags = [h.alpha_sup < a, h.alpha_sup == a, h.alpha_sup > a];
    let partition = flags.iter().filter(|&&f| f).count() == 1;
    let lambda_ok = h.case != HolderCase::Above || h.exponent < 1.0;
    out.push(result(
        "holder-case",
        partition && lambda_ok,
        format!("case {} exponent {}", h.case.id(), h.exponent),
    ));

    let mut counts_ok = true;
    let mut counts = Vec::new();
    for level in 1..=2 {
        let c = box_count(model, level, &oscillation(model, level, 9)?)?.count;
        counts_ok &= c >= 9u64.pow(level as u32);
        counts.push(c.to_string());
    }
    out.push(result(
        "box-count-floor",
        counts_ok,
        format!("counts {} at levels 1..2", counts.join(", ")),
    ));

    let vc = enumerate_vertices(n)?.len();
    out.push(result(
        "vertex-count",
        vc == vertex_count(n),
        format!("{vc} vertices at depth {n}"),
    ));

    Ok(out)
}

//! Grid functions on product vertex sets and the Read–Bajraktarević operator.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{FifError, Result};
use crate::gasket::{locate_bary, Address, Bary, Word};
use crate::model::{tensor_eval, FifModel};
use crate::vertex_grid::{peel_exact, VertexGrid};

/// Values on the depth-`m` product vertex set, extended off-grid by
/// tensor-barycentric interpolation inside each depth-`m` cell-pair.
///
/// Values are stored row-major: `values[i * V + j]` belongs to vertex pair `(i, j)`
/// of the shared single-gasket [`VertexGrid`].
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<VertexGrid>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn zero(grid: Arc<VertexGrid>) -> Self {
        let v = grid.len();
        GridFunction {
            grid,
            values: vec![0.0; v * v],
        }
    }

    pub fn from_values(grid: Arc<VertexGrid>, values: Vec<f64>) -> Result<Self> {
        let v = grid.len();
        if values.len() != v * v {
            return Err(FifError::Precondition(format!(
                "expected {} values for a depth-{} grid, got {}",
                v * v,
                grid.depth(),
                values.len()
            )));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn from_fn(grid: Arc<VertexGrid>, f: impl Fn(usize, usize) -> f64 + Sync) -> Self {
        let v = grid.len();
        let values = (0..v * v).into_par_iter().map(|k| f(k / v, k % v)).collect();
        GridFunction { grid, values }
    }

    pub fn depth(&self) -> usize {
        self.grid.depth()
    }

    pub fn grid(&self) -> &Arc<VertexGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.len() + j]
    }

    /// Value at a vertex pair given by addresses, if both are grid vertices.
    pub fn at(&self, t: &Address, s: &Address) -> Option<f64> {
        Some(self.get(self.grid.index_of(t)?, self.grid.index_of(s)?))
    }

    /// Off-grid value from the 9 corner values of the containing cell-pair.
    pub fn eval_bary(&self, l: &Bary, m: &Bary) -> f64 {
        let d = self.depth();
        let (wt, lt) = locate_bary(*l, d);
        let (ws, ls) = locate_bary(*m, d);
        let ct = self.grid.cell_corners(Word::from_letters(wt).index());
        let cs = self.grid.cell_corners(Word::from_letters(ws).index());
        let mut c = [[0.0; 3]; 3];
        for (i, &a) in ct.iter().enumerate() {
            for (j, &b) in cs.iter().enumerate() {
                c[i][j] = self.get(a, b);
            }
        }
        tensor_eval(&c, &lt, &ls)
    }

    /// Largest absolute difference over grid vertices.
    pub fn sup_distance(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Per-vertex preimage data for one grid and one model depth.
struct Preimages {
    /// Word index of the depth-`N` cell used for the vertex.
    cell: Vec<usize>,
    /// Grid index of the preimage vertex.
    pre: Vec<usize>,
    bary: Vec<Bary>,
}

impl Preimages {
    fn new(grid: &VertexGrid, n: usize) -> Result<Self> {
        let m = grid.depth();
        if m < n {
            return Err(FifError::Precondition(format!(
                "grid depth {m} is below the model depth {n}"
            )));
        }
        let scale = ((m - n) as f64).exp2();
        let len = grid.len();
        let (mut cell, mut pre, mut bary) = (
            Vec::with_capacity(len),
            Vec::with_capacity(len),
            Vec::with_capacity(len),
        );
        for i in 0..len {
            // The smallest containing cell is used at junctions.
            let (letters, nums) = peel_exact(grid.nums(i), m, n)?;
            cell.push(letters.iter().fold(0, |acc, c| acc * 3 + c.index()));
            let lifted = nums.map(|k| k << n);
            // Preimages of depth-m vertices are depth-(m−N) vertices, hence on the grid.
            let p = grid.lookup(&lifted).ok_or_else(|| {
                FifError::Internal(format!("preimage {nums:?} of vertex {i} is off the grid"))
            })?;
            pre.push(p);
            bary.push(nums.map(|k| k as f64 / scale));
        }
        Ok(Preimages { cell, pre, bary })
    }

    fn apply(&self, model: &FifModel, g: &GridFunction) -> GridFunction {
        let v = g.grid.len();
        let per = model.cells_per_factor();
        let mut out = vec![0.0; v * v];
        out.par_chunks_mut(v).enumerate().for_each(|(i, row)| {
            let (ci, pi, li) = (self.cell[i], self.pre[i], &self.bary[i]);
            for (j, slot) in row.iter_mut().enumerate() {
                let cell = ci * per + self.cell[j];
                let lj = &self.bary[j];
                *slot = model.alpha_at(cell, li, lj) * g.values[pi * v + self.pre[j]]
                    + model.shift_at(cell, li, lj);
            }
        });
        GridFunction {
            grid: g.grid.clone(),
            values: out,
        }
    }
}

/// One application of the Read–Bajraktarević operator `T` on the grid of `g`.
pub fn rb_apply(model: &FifModel, g: &GridFunction) -> Result<GridFunction> {
    Ok(Preimages::new(&g.grid, model.depth())?.apply(model, g))
}

/// Result of [`solve_fixed_point`].
#[derive(Debug, Clone)]
pub struct FixedPoint {
    pub grid: GridFunction,
    pub iterations: usize,
    /// Sup-norm change of the final iteration.
    pub last_change: f64,
}

/// Iteration limit guarding against tolerances below float resolution.
pub const MAX_FIXED_POINT_ITERATIONS: usize = 10_000;

/// Iterates `T` from the zero function on the depth-`m` grid until the sup-norm
/// change falls to `tol`.
pub fn solve_fixed_point(model: &FifModel, m: usize, tol: f64) -> Result<FixedPoint> {
    let n = model.depth();
    if tol.is_nan() || tol <= 0.0 {
        return Err(FifError::Precondition(format!("tol must be positive, got {tol}")));
    }
    if m < n || !m.is_multiple_of(n) {
        return Err(FifError::Precondition(format!(
            "grid depth {m} must be a positive multiple of N = {n}"
        )));
    }
    let grid = Arc::new(VertexGrid::new(m)?);
    let plan = Preimages::new(&grid, n)?;
    let mut g = GridFunction::zero(grid);
    for it in 1..=MAX_FIXED_POINT_ITERATIONS {
        let next = plan.apply(model, &g);
        let change = next.sup_distance(&g);
        g = next;
        if change <= tol {
            return Ok(FixedPoint {
                grid: g,
                iterations: it,
                last_change: change,
            });
        }
    }
    Err(FifError::Precondition(format!(
        "no convergence to {tol} within {MAX_FIXED_POINT_ITERATIONS} iterations"
    )))
}

/// Iteration count guaranteed by the contraction rate.
pub fn fixed_point_iteration_bound(model: &FifModel, tol: f64) -> usize {
    let b = model.bounds();
    let ratio = tol / b.f_sup_bound.max(tol);
    if ratio >= 1.0 {
        return 1;
    }
    let k = (ratio.ln() / b.alpha_sup.ln()).ceil().max(1.0);
    if k.is_finite() {
        k as usize + 1
    } else {
        MAX_FIXED_POINT_ITERATIONS
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator::eval_exact;
    use crate::gasket::GasketSpec;
    use crate::model::{build_model, interior_vertices, DataSet, ProductVertex, ScalingField};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn a(s: &str) -> Address {
        s.parse().unwrap()
    }

    fn bump_model(alpha: f64) -> FifModel {
        let target = ProductVertex::new(&a("1@2"), &a("1@2"));
        let data = DataSet::from_fn(1, |pv| if *pv == target { 0.5 } else { 0.0 }).unwrap();
        build_model(
            data,
            ScalingField::uniform(1, alpha),
            GasketSpec::default(),
            GasketSpec::default(),
        )
        .unwrap()
    }

    fn random_model(n: usize, seed: u64) -> FifModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = DataSet::from_fn(n, |_| rng.gen_range(-1.0..1.0)).unwrap();
        build_model(
            data,
            ScalingField::uniform(n, 0.4),
            GasketSpec::default(),
            GasketSpec::default(),
        )
        .unwrap()
    }

    #[test]
    fn zero_is_fixed() {
        let m = build_model(
            DataSet::zero(1).unwrap(),
            ScalingField::uniform(1, 0.5),
            GasketSpec::default(),
            GasketSpec::default(),
        )
        .unwrap();
        let grid = Arc::new(VertexGrid::new(2).unwrap());
        let t = rb_apply(&m, &GridFunction::zero(grid)).unwrap();
        assert_eq!(t.sup_norm(), 0.0);
        let fp = solve_fixed_point(&m, 2, 1e-12).unwrap();
        assert_eq!(fp.iterations, 1);
    }

    #[test]
    fn one_step_from_zero_interpolates() {
        for n in [1, 2] {
            let m = random_model(n, 5);
            let grid = Arc::new(VertexGrid::new(n + 1).unwrap());
            let t = rb_apply(&m, &GridFunction::zero(grid)).unwrap();
            for pv in interior_vertices(n).unwrap() {
                let z = m.data().get(&pv).unwrap();
                assert!((t.at(&pv.first, &pv.second).unwrap() - z).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn shallow_grid_rejected() {
        let m = random_model(2, 1);
        let grid = Arc::new(VertexGrid::new(1).unwrap());
        assert!(matches!(
            rb_apply(&m, &GridFunction::zero(grid)),
            Err(FifError::Precondition(_))
        ));
        assert!(solve_fixed_point(&m, 3, 1e-9).is_err());
        assert!(solve_fixed_point(&m, 4, 0.0).is_err());
    }

    #[test]
    fn contraction_on_random_pairs() {
        let m = random_model(1, 9);
        let grid = Arc::new(VertexGrid::new(3).unwrap());
        let v = grid.len();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let g = GridFunction::from_values(grid.clone(), (0..v * v).map(|_| rng.gen_range(-3.0..3.0)).collect()).unwrap();
            let h = GridFunction::from_values(grid.clone(), (0..v * v).map(|_| rng.gen_range(-3.0..3.0)).collect()).unwrap();
            let d = rb_apply(&m, &g).unwrap().sup_distance(&rb_apply(&m, &h).unwrap());
            assert!(d <= m.bounds().alpha_sup * g.sup_distance(&h) + 1e-12);
        }
    }

    #[test]
    fn iteration_oracle_matches_hand_step() {
        // Thirty plain iterations on a depth-4 grid against the unrolled step 0.3·0.5 + 0.125.
        let m = bump_model(0.3);
        let grid = Arc::new(VertexGrid::new(4).unwrap());
        let mut g = GridFunction::zero(grid);
        for _ in 0..30 {
            g = rb_apply(&m, &g).unwrap();
        }
        let oracle = g.at(&a("11@2"), &a("11@2")).unwrap();
        assert!((oracle - 0.275).abs() < 1e-9);
        assert!((eval_exact(&m, &a("11@2"), &a("11@2")) - oracle).abs() < 1e-9);
    }

    #[test]
    fn fixed_point_agrees_with_exact() {
        for n in [1, 2] {
            let m = random_model(n, 11);
            let tol = 1e-11;
            let fp = solve_fixed_point(&m, 2 * n, tol).unwrap();
            assert!(fp.iterations <= fixed_point_iteration_bound(&m, tol));
            let g = &fp.grid;
            let slack = tol / (1.0 - m.bounds().alpha_sup);
            for (i, t) in g.grid().vertices().iter().enumerate() {
                for (j, s) in g.grid().vertices().iter().enumerate() {
                    assert!((g.get(i, j) - eval_exact(&m, t, s)).abs() <= slack);
                }
            }
            let residual = rb_apply(&m, g).unwrap().sup_distance(g);
            assert!(residual <= 2.0 * tol);
        }
    }

    #[test]
    fn iteration_bound_example() {
        // fSupBound = 1 needs shiftSup = 0.7 at α = 0.3.
        let target = ProductVertex::new(&a("1@2"), &a("1@2"));
        let data = DataSet::from_fn(1, |pv| if *pv == target { 0.7 } else { 0.0 }).unwrap();
        let m = build_model(
            data,
            ScalingField::uniform(1, 0.3),
            GasketSpec::default(),
            GasketSpec::default(),
        )
        .unwrap();
        assert!((m.bounds().f_sup_bound - 1.0).abs() < 1e-12);
        assert!(fixed_point_iteration_bound(&m, 1e-10) <= 21);
        let fp = solve_fixed_point(&m, 2, 1e-10).unwrap();
        assert!(fp.iterations <= 21);
    }

    #[test]
    fn iteration_bound_covers_zero_alpha() {
        let m = crate::reference::bump_model(0.0).unwrap();
        let fp = solve_fixed_point(&m, 2, 1e-10).unwrap();
        assert_eq!(fp.iterations, 2);
        assert!(fp.iterations <= fixed_point_iteration_bound(&m, 1e-10));
    }

    #[test]
    fn off_grid_interpolation_hits_vertices() {
        let m = random_model(1, 3);
        let fp = solve_fixed_point(&m, 2, 1e-12).unwrap();
        let g = &fp.grid;
        for (i, t) in g.grid().vertices().iter().enumerate() {
            for (j, s) in g.grid().vertices().iter().enumerate() {
                assert!((g.eval_bary(&t.bary(), &s.bary()) - g.get(i, j)).abs() < 1e-14);
            }
        }
    }
}

//! Pointwise evaluation of the interpolation function and chaos-game sampling
//! of its graph.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{FifError, Result};
use crate::gasket::{bary_contract, bary_descend, Address, Bary, Corner, Point};
use crate::model::FifModel;

/// Deepest chain `eval_approx` will follow, in single-gasket letters.
///
/// Barycentric coordinates lose one bit per level; past this depth they carry no information.
pub const MAX_APPROX_LEVELS: usize = 52;

#[inline]
fn unit(c: Corner) -> Bary {
    let mut b = [0.0; 3];
    b[c.index()] = 1.0;
    b
}

/// `f` at the vertex pair named by two addresses, with no truncation error.
///
/// Both words are padded with their terminal corner to a common length that is
/// a multiple of `N`; the recursion `f(L_ω t, K_η s) = α_{ωη}(t,s) f(t,s) + h_{ωη}(t,s)`
/// then peels `N` letters per step down to an outer corner pair, where `f = 0`.
pub fn eval_exact(model: &FifModel, t: &Address, s: &Address) -> f64 {
    let n = model.depth();
    let len = t.word.len().max(s.word.len());
    let total = len.div_ceil(n) * n;
    let wt = t.padded(total).word;
    let ws = s.padded(total).word;
    let (wt, ws) = (wt.letters(), ws.letters());

    let mut lt = unit(t.corner);
    let mut ls = unit(s.corner);
    let mut f = 0.0;
    for block in (0..total / n).rev() {
        let range = block * n..(block + 1) * n;
        let cell = model.cell_index(&wt[range.clone()], &ws[range.clone()]);
        f = model.alpha_at(cell, &lt, &ls) * f + model.shift_at(cell, &lt, &ls);
        for k in range.rev() {
            lt = bary_contract(lt, wt[k]);
            ls = bary_contract(ls, ws[k]);
        }
    }
    f
}

/// A truncated evaluation together with its certified error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Approx {
    pub value: f64,
    pub error_bound: f64,
}

/// `f(t, s)` truncated after `k` steps of the unrolled functional equation.
///
/// The residual term `Π α · f(t_k, s_k)` is replaced by zero, so
/// `|value − f(t, s)| ≤ ‖α‖∞^k · ‖h‖∞/(1 − ‖α‖∞)` for points of the gaskets.
/// Points of the hull that are not on a gasket are projected to the nearest cell.
pub fn eval_approx(model: &FifModel, t: Point, s: Point, k: usize) -> Result<Approx> {
    let lt = model.gasket1().checked_bary(t)?;
    let ls = model.gasket2().checked_bary(s)?;
    eval_approx_bary(model, lt, ls, k)
}

/// [`eval_approx`] on barycentric coordinates.
pub fn eval_approx_bary(model: &FifModel, mut lt: Bary, mut ls: Bary, k: usize) -> Result<Approx> {
    if k == 0 {
        return Err(FifError::Precondition("eval_approx needs k ≥ 1".into()));
    }
    let n = model.depth();
    if k * n > MAX_APPROX_LEVELS {
        return Err(FifError::Precondition(format!(
            "k·N = {} exceeds the usable depth {MAX_APPROX_LEVELS}",
            k * n
        )));
    }
    // Preimage coordinates and cell of every step, outermost first.
    let mut steps = Vec::with_capacity(k);
    for _ in 0..k {
        let mut word_t = Vec::with_capacity(n);
        let mut word_s = Vec::with_capacity(n);
        for _ in 0..n {
            let (a, next_t) = bary_descend(&lt);
            let (b, next_s) = bary_descend(&ls);
            lt = next_t;
            ls = next_s;
            word_t.push(a);
            word_s.push(b);
        }
        steps.push((model.cell_index(&word_t, &word_s), lt, ls));
    }
    let mut value = 0.0;
    for (cell, l, m) in steps.iter().rev() {
        value = model.alpha_at(*cell, l, m) * value + model.shift_at(*cell, l, m);
    }
    let b = model.bounds();
    Ok(Approx {
        value,
        error_bound: b.alpha_sup.powi(k as i32) * b.f_sup_bound,
    })
}

/// Smallest `k` whose certified error is at most `target`, capped at the usable depth.
pub fn steps_for_error(model: &FifModel, target: f64) -> usize {
    let b = model.bounds();
    let cap = (MAX_APPROX_LEVELS / model.depth()).max(1);
    if b.f_sup_bound <= target || b.alpha_sup == 0.0 {
        return 1;
    }
    let k = ((target / b.f_sup_bound).ln() / b.alpha_sup.ln()).ceil() as usize;
    k.clamp(1, cap)
}

/// A point `(t, s, f(t, s))` of the graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphSample {
    pub t: Point,
    pub s: Point,
    pub value: f64,
}

/// Random iteration of the maps `W_{ωη}`, started at `(p1, q1, 0)`.
///
/// Cell-pairs are drawn uniformly. The orbit stays on the graph, so every
/// emitted sample satisfies `value = f(t, s)` up to rounding.
#[derive(Debug, Clone)]
pub struct ChaosGame<'a> {
    model: &'a FifModel,
    rng: ChaCha8Rng,
    lt: Bary,
    ls: Bary,
    x: f64,
}

impl<'a> ChaosGame<'a> {
    pub fn new(model: &'a FifModel, seed: u64) -> Self {
        ChaosGame {
            model,
            rng: ChaCha8Rng::seed_from_u64(seed),
            lt: [1.0, 0.0, 0.0],
            ls: [1.0, 0.0, 0.0],
            x: 0.0,
        }
    }

    /// Current orbit point in barycentric form.
    pub fn state(&self) -> (Bary, Bary, f64) {
        (self.lt, self.ls, self.x)
    }

    /// Applies one randomly chosen map.
    pub fn step(&mut self) {
        let m = self.model;
        let per = m.cells_per_factor();
        let cell = self.rng.gen_range(0..per * per);
        self.x = m.alpha_at(cell, &self.lt, &self.ls) * self.x + m.shift_at(cell, &self.lt, &self.ls);
        let (mut wi, mut ei) = (cell / per, cell % per);
        // Innermost letter is the last one: apply L_{ω_N} first.
        for _ in 0..m.depth() {
            self.lt = bary_contract(self.lt, Corner::from_index(wi % 3));
            self.ls = bary_contract(self.ls, Corner::from_index(ei % 3));
            wi /= 3;
            ei /= 3;
        }
    }
}

impl Iterator for ChaosGame<'_> {
    type Item = GraphSample;

    fn next(&mut self) -> Option<GraphSample> {
        self.step();
        Some(GraphSample {
            t: self.model.gasket1().from_bary(self.lt),
            s: self.model.gasket2().from_bary(self.ls),
            value: self.x,
        })
    }
}

/// `count` graph samples after discarding `burn_in`; deterministic in `seed`.
pub fn chaos_game(model: &FifModel, count: usize, seed: u64, burn_in: usize) -> Result<Vec<GraphSample>> {
    if count == 0 {
        return Err(FifError::Precondition("chaos_game needs count > 0".into()));
    }
    Ok(ChaosGame::new(model, seed).skip(burn_in).take(count).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gasket::GasketSpec;
    use crate::model::{build_model, interior_vertices, DataSet, ProductVertex, ScalingField};

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

    #[test]
    fn zero_data_is_zero() {
        let m = build_model(
            DataSet::zero(1).unwrap(),
            ScalingField::uniform(1, 0.3),
            GasketSpec::default(),
            GasketSpec::default(),
        )
        .unwrap();
        assert_eq!(eval_exact(&m, &a("1213@2"), &a("33@1")), 0.0);
        let g = GasketSpec::default();
        let r = eval_approx(&m, g.from_bary([0.3, 0.3, 0.4]), g.corners()[1], 5).unwrap();
        assert_eq!((r.value, r.error_bound), (0.0, 0.0));
        assert!(chaos_game(&m, 100, 1, 0).unwrap().iter().all(|p| p.value == 0.0));
    }

    #[test]
    fn exact_reproduces_data() {
        let m = bump_model(0.3);
        for pv in interior_vertices(1).unwrap() {
            let want = m.data().get(&pv).unwrap();
            assert_eq!(eval_exact(&m, &pv.first, &pv.second), want);
        }
    }

    #[test]
    fn one_hand_unrolled_step() {
        // f(L1 (1@2), K1 (1@2)) = 0.3·f(1@2, 1@2) + h_11(1@2, 1@2) = 0.3·0.5 + 0.25·0.5
        let m = bump_model(0.3);
        let f = eval_exact(&m, &a("11@2"), &a("11@2"));
        assert!((f - 0.275).abs() < 1e-15, "{f}");
    }

    #[test]
    fn unequal_depths_are_padded() {
        let m = bump_model(0.3);
        let f1 = eval_exact(&m, &a("1@2"), &a("12@3"));
        let f2 = eval_exact(&m, &a("122@2"), &a("12@3"));
        assert_eq!(f1, f2);
    }

    #[test]
    fn approx_bound_formula() {
        let m = bump_model(0.3);
        let g = GasketSpec::default();
        let c = g.from_bary([1.0 / 3.0; 3]);
        let r = eval_approx(&m, c, c, 10).unwrap();
        let want = 0.3f64.powi(10) * m.bounds().f_sup_bound;
        assert!((r.error_bound - want).abs() < 1e-18);
        assert!(eval_approx(&m, c, c, 0).is_err());
        assert!(matches!(
            eval_approx(&m, Point::new(5.0, 5.0), c, 3),
            Err(FifError::Domain(_))
        ));
    }

    #[test]
    fn approx_at_vertices() {
        let m = bump_model(0.3);
        let g = GasketSpec::default();
        for pv in interior_vertices(1).unwrap() {
            let z = m.data().get(&pv).unwrap();
            let t = g.from_bary(pv.first.bary());
            let s = g.from_bary(pv.second.bary());
            for k in 1..6 {
                let r = eval_approx(&m, t, s, k).unwrap();
                assert!((r.value - z).abs() <= r.error_bound + 1e-12);
            }
        }
    }

    #[test]
    fn chaos_is_deterministic() {
        let m = bump_model(0.3);
        let x = chaos_game(&m, 500, 7, 10).unwrap();
        let y = chaos_game(&m, 500, 7, 10).unwrap();
        assert_eq!(x, y);
        let z = chaos_game(&m, 500, 8, 10).unwrap();
        assert_ne!(x, z);
        assert!(chaos_game(&m, 0, 7, 10).is_err());
    }

    #[test]
    fn chaos_samples_lie_on_graph() {
        let m = bump_model(0.3);
        let k = 12;
        for p in chaos_game(&m, 2000, 3, 0).unwrap() {
            let r = eval_approx(&m, p.t, p.s, k).unwrap();
            assert!((p.value - r.value).abs() <= r.error_bound + 1e-9);
        }
    }

    #[test]
    fn steps_for_error_meets_target() {
        let m = bump_model(0.7);
        let k = steps_for_error(&m, 1e-6);
        let b = m.bounds();
        assert!(b.alpha_sup.powi(k as i32) * b.f_sup_bound <= 1e-6);
        assert!(b.alpha_sup.powi(k as i32 - 1) * b.f_sup_bound > 1e-6);
    }
}

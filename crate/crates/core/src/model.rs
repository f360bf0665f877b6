//! Assembly of the interpolation system: data on the product vertex set
//! `V_N`, the scaling field `α_{ωη}` and the shift field `h_{ωη}`.
//!
//! Each shift cell is the tensor-barycentric interpolant of the nine data
//! values found at the corner pairs `(L_ω(p_i), K_η(q_j))` of its cell-pair.
//! Because all nine values are read from one canonically keyed map, the
//! junction conditions between neighbouring cells hold exactly.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{FifError, Result};
use crate::gasket::{
    canonicalize, enumerate_vertices, Address, Bary, Corner, GasketSpec, Point, Word,
};
use crate::sampling::triangle_samples;

/// Largest discrepancy tolerated at a junction by [`check_compatibility`].
pub const COMPATIBILITY_TOL: f64 = 1e-12;

/// A vertex of the product vertex set, both coordinates in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProductVertex {
    pub first: Address,
    pub second: Address,
}

impl ProductVertex {
    /// Canonicalizes both coordinates.
    pub fn new(first: &Address, second: &Address) -> Self {
        ProductVertex {
            first: canonicalize(first),
            second: canonicalize(second),
        }
    }

    /// True if either coordinate is an outer corner, where the function vanishes.
    pub fn is_boundary(&self) -> bool {
        self.first.word.is_empty() || self.second.word.is_empty()
    }

    /// Depth of the coarsest vertex set containing this vertex.
    pub fn depth(&self) -> usize {
        self.first.word.len().max(self.second.word.len())
    }
}

impl fmt::Display for ProductVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}", self.first, self.second)
    }
}

impl FromStr for ProductVertex {
    type Err = FifError;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s.split_once('|').ok_or_else(|| {
            FifError::Validation(format!("product vertex {s:?} must look like \"12@3|2@1\""))
        })?;
        Ok(ProductVertex::new(&a.parse()?, &b.parse()?))
    }
}

/// Interpolation data `z_y` for every `y` in the product vertex set `V_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    n: usize,
    entries: BTreeMap<ProductVertex, f64>,
}

impl DataSet {
    pub fn builder(n: usize) -> DataSetBuilder {
        DataSetBuilder {
            n,
            entries: BTreeMap::new(),
        }
    }

    /// Zero data at depth `n`.
    pub fn zero(n: usize) -> Result<Self> {
        Self::from_fn(n, |_| 0.0)
    }

    /// Data whose interior values come from `f`; boundary vertices get zero.
    pub fn from_fn(n: usize, mut f: impl FnMut(&ProductVertex) -> f64) -> Result<Self> {
        let mut b = Self::builder(n);
        for pv in interior_vertices(n)? {
            let z = f(&pv);
            b.insert(&pv.first, &pv.second, z)?;
        }
        b.build()
    }

    pub fn depth(&self) -> usize {
        self.n
    }

    pub fn get(&self, v: &ProductVertex) -> Option<f64> {
        self.entries.get(v).copied()
    }

    pub fn entries(&self) -> &BTreeMap<ProductVertex, f64> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Every product vertex of `V_n` that is not on the boundary, sorted.
pub fn interior_vertices(n: usize) -> Result<Vec<ProductVertex>> {
    let single: Vec<Address> = enumerate_vertices(n)?
        .into_iter()
        .filter(|a| !a.word.is_empty())
        .collect();
    let mut out = Vec::with_capacity(single.len() * single.len());
    for a in &single {
        for b in &single {
            out.push(ProductVertex {
                first: a.clone(),
                second: b.clone(),
            });
        }
    }
    Ok(out)
}

/// Incremental construction of a [`DataSet`].
#[derive(Debug, Clone)]
pub struct DataSetBuilder {
    n: usize,
    entries: BTreeMap<ProductVertex, f64>,
}

impl DataSetBuilder {
    /// Records `z` at the vertex; the same point under another address is the same key.
    pub fn insert(&mut self, first: &Address, second: &Address, z: f64) -> Result<()> {
        let v = ProductVertex::new(first, second);
        if !z.is_finite() {
            return Err(FifError::Validation(format!("value at {v} is not finite")));
        }
        if v.depth() > self.n {
            return Err(FifError::Validation(format!(
                "{v} is not a vertex of V_{} (canonical depth {})",
                self.n,
                v.depth()
            )));
        }
        match self.entries.get(&v) {
            Some(&prev) if prev != z => Err(FifError::DuplicateVertex {
                vertex: v,
                first: prev,
                second: z,
            }),
            Some(_) => Ok(()),
            None => {
                self.entries.insert(v, z);
                Ok(())
            }
        }
    }

    /// Validates boundary-zero and completeness. Omitted boundary vertices are filled with zero.
    pub fn build(mut self) -> Result<DataSet> {
        if self.n == 0 {
            return Err(FifError::Validation("depth N must be at least 1".into()));
        }
        for (v, &z) in &self.entries {
            if v.is_boundary() && z != 0.0 {
                return Err(FifError::BoundaryNonZero {
                    vertex: v.clone(),
                    value: z,
                });
            }
        }
        let single = enumerate_vertices(self.n)?;
        let mut missing = Vec::new();
        for a in &single {
            for b in &single {
                let v = ProductVertex {
                    first: a.clone(),
                    second: b.clone(),
                };
                if self.entries.contains_key(&v) {
                    continue;
                }
                if v.is_boundary() {
                    self.entries.insert(v, 0.0);
                } else {
                    missing.push(v);
                }
            }
        }
        if !missing.is_empty() {
            return Err(FifError::MissingVertices(missing));
        }
        Ok(DataSet {
            n: self.n,
            entries: self.entries,
        })
    }
}

/// Tensor-barycentric evaluation `Σ λ_i μ_j c_ij`.
#[inline]
pub fn tensor_eval(c: &[[f64; 3]; 3], l: &Bary, m: &Bary) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        acc += l[i] * (c[i][0] * m[0] + c[i][1] * m[1] + c[i][2] * m[2]);
    }
    acc
}

/// Exact Lipschitz constant of `(t, s) ↦ Σ λ_i(t) μ_j(s) c_ij` on the product of the triangles.
fn tensor_lipschitz(c: &[[f64; 3]; 3], g1: &GasketSpec, g2: &GasketSpec) -> f64 {
    let gl = g1.bary_gradients();
    let gm = g2.bary_gradients();
    // The gradient in t is linear in μ, so its norm peaks at a corner of the μ-simplex.
    let k_t = (0..3)
        .map(|j| {
            (0..3)
                .fold(Point::default(), |acc, i| acc + gl[i] * c[i][j])
                .norm()
        })
        .fold(0.0, f64::max);
    let k_s = (0..3)
        .map(|i| {
            (0..3)
                .fold(Point::default(), |acc, j| acc + gm[j] * c[i][j])
                .norm()
        })
        .fold(0.0, f64::max);
    k_t.hypot(k_s)
}

/// The scaling function of one cell-pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalingCell {
    Constant(f64),
    /// Corner values `v_ij` at `(p_i, q_j)`, extended tensor-barycentrically.
    CornerTensor([[f64; 3]; 3]),
}

impl ScalingCell {
    #[inline]
    pub fn eval(&self, l: &Bary, m: &Bary) -> f64 {
        match self {
            ScalingCell::Constant(c) => *c,
            ScalingCell::CornerTensor(v) => tensor_eval(v, l, m),
        }
    }

    /// Sup of `|α|` over the product, attained at a corner pair.
    pub fn sup_abs(&self) -> f64 {
        match self {
            ScalingCell::Constant(c) => c.abs(),
            ScalingCell::CornerTensor(v) => v.iter().flatten().fold(0.0, |m, x| m.max(x.abs())),
        }
    }

    fn lipschitz(&self, g1: &GasketSpec, g2: &GasketSpec) -> f64 {
        match self {
            ScalingCell::Constant(_) => 0.0,
            ScalingCell::CornerTensor(v) => tensor_lipschitz(v, g1, g2),
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            ScalingCell::Constant(c) => c.is_finite(),
            ScalingCell::CornerTensor(v) => v.iter().flatten().all(|x| x.is_finite()),
        }
    }
}

/// Scaling functions for all `3^N × 3^N` cell-pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingField {
    n: usize,
    cells: Vec<ScalingCell>,
}

impl ScalingField {
    /// The same constant on every cell-pair.
    pub fn uniform(n: usize, c: f64) -> Self {
        ScalingField {
            n,
            cells: vec![ScalingCell::Constant(c); 9usize.pow(n as u32)],
        }
    }

    /// Per-cell scaling; cells without an override use `default`, which may only be
    /// omitted when every cell-pair is listed.
    pub fn from_cells(
        n: usize,
        default: Option<ScalingCell>,
        overrides: impl IntoIterator<Item = ((Word, Word), ScalingCell)>,
    ) -> Result<Self> {
        let per = 3usize.pow(n as u32);
        let mut cells: Vec<Option<ScalingCell>> = vec![default; per * per];
        for ((w, e), cell) in overrides {
            if w.len() != n || e.len() != n {
                return Err(FifError::Validation(format!(
                    "scaling cell {w}|{e} must use words of length {n}"
                )));
            }
            cells[w.index() * per + e.index()] = Some(cell);
        }
        let cells = cells
            .into_iter()
            .enumerate()
            .map(|(i, c)| {
                c.ok_or_else(|| {
                    FifError::Validation(format!(
                        "no scaling given for cell {}|{} and no default",
                        Word::from_index(i / per, n),
                        Word::from_index(i % per, n)
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ScalingField { n, cells })
    }

    pub fn depth(&self) -> usize {
        self.n
    }

    pub fn cells(&self) -> &[ScalingCell] {
        &self.cells
    }

    /// `‖α‖∞` over all cell-pairs.
    pub fn sup(&self) -> f64 {
        self.cells.iter().fold(0.0, |m, c| m.max(c.sup_abs()))
    }
}

/// The shift function `h_{ωη}` of one cell-pair: corner values `c_ij` at `(p_i, q_j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftCell {
    pub corners: [[f64; 3]; 3],
}

impl ShiftCell {
    #[inline]
    pub fn eval(&self, l: &Bary, m: &Bary) -> f64 {
        tensor_eval(&self.corners, l, m)
    }
}

/// Hölder data of the parameter maps; both supported forms are Lipschitz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderConstants {
    pub k_h: f64,
    pub s_h: f64,
    pub k_alpha: f64,
    pub s_alpha: f64,
}

/// `(‖α‖∞, ‖h‖∞, ‖h‖∞ / (1 − ‖α‖∞))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupBounds {
    pub alpha_sup: f64,
    pub shift_sup: f64,
    pub f_sup_bound: f64,
}

/// The assembled interpolation system. Immutable once built.
#[derive(Debug, Clone)]
pub struct FifModel {
    gasket1: GasketSpec,
    gasket2: GasketSpec,
    n: usize,
    per_factor: usize,
    scaling: ScalingField,
    shift: Vec<ShiftCell>,
    data: DataSet,
    bounds: SupBounds,
    holder: HolderConstants,
}

/// Builds the system for `data` and `scaling` on the two gaskets.
pub fn build_model(
    data: DataSet,
    scaling: ScalingField,
    g1: GasketSpec,
    g2: GasketSpec,
) -> Result<FifModel> {
    let n = data.depth();
    if scaling.depth() != n {
        return Err(FifError::Validation(format!(
            "scaling field depth {} does not match data depth {n}",
            scaling.depth()
        )));
    }
    if let Some(c) = scaling.cells.iter().find(|c| !c.is_finite()) {
        return Err(FifError::Validation(format!("non-finite scaling {c:?}")));
    }
    let alpha_sup = scaling.sup();
    if alpha_sup >= 1.0 {
        return Err(FifError::Contraction(alpha_sup));
    }

    let per = 3usize.pow(n as u32);
    let mut shift = Vec::with_capacity(per * per);
    let words: Vec<Word> = Word::all(n).collect();
    for w in &words {
        for e in &words {
            let mut corners = [[0.0; 3]; 3];
            for i in Corner::ALL {
                for j in Corner::ALL {
                    let v = ProductVertex::new(
                        &Address::new(w.clone(), i),
                        &Address::new(e.clone(), j),
                    );
                    corners[i.index()][j.index()] = data.get(&v).ok_or_else(|| {
                        FifError::Internal(format!("data set lacks vertex {v}"))
                    })?;
                }
            }
            shift.push(ShiftCell { corners });
        }
    }
    Ok(FifModel::assemble(g1, g2, n, scaling, shift, data))
}

impl FifModel {
    fn assemble(
        gasket1: GasketSpec,
        gasket2: GasketSpec,
        n: usize,
        scaling: ScalingField,
        shift: Vec<ShiftCell>,
        data: DataSet,
    ) -> Self {
        let alpha_sup = scaling.sup();
        let shift_sup = shift
            .iter()
            .flat_map(|c| c.corners.iter().flatten())
            .fold(0.0, |m: f64, x| m.max(x.abs()));
        let f_sup_bound = if shift_sup == 0.0 {
            0.0
        } else {
            shift_sup / (1.0 - alpha_sup)
        };
        let k_h = shift
            .iter()
            .map(|c| tensor_lipschitz(&c.corners, &gasket1, &gasket2))
            .fold(0.0, f64::max);
        let k_alpha = scaling
            .cells
            .iter()
            .map(|c| c.lipschitz(&gasket1, &gasket2))
            .fold(0.0, f64::max);
        FifModel {
            gasket1,
            gasket2,
            n,
            per_factor: 3usize.pow(n as u32),
            scaling,
            shift,
            data,
            bounds: SupBounds {
                alpha_sup,
                shift_sup,
                f_sup_bound,
            },
            holder: HolderConstants {
                k_h,
                s_h: 1.0,
                k_alpha,
                s_alpha: 1.0,
            },
        }
    }

    /// Depth `N` of the maps.
    pub fn depth(&self) -> usize {
        self.n
    }

    /// `a = 2^{-N}`.
    pub fn a(&self) -> f64 {
        (-(self.n as f64)).exp2()
    }

    pub fn gasket1(&self) -> &GasketSpec {
        &self.gasket1
    }

    pub fn gasket2(&self) -> &GasketSpec {
        &self.gasket2
    }

    pub fn data(&self) -> &DataSet {
        &self.data
    }

    pub fn scaling(&self) -> &ScalingField {
        &self.scaling
    }

    pub fn shift_cells(&self) -> &[ShiftCell] {
        &self.shift
    }

    /// Number of depth-N cells per factor, `3^N`.
    pub fn cells_per_factor(&self) -> usize {
        self.per_factor
    }

    pub fn cell_pair_count(&self) -> usize {
        self.per_factor * self.per_factor
    }

    pub fn bounds(&self) -> SupBounds {
        self.bounds
    }

    pub fn holder_constants(&self) -> HolderConstants {
        self.holder
    }

    /// Common side length used to scale vertical box sizes.
    pub fn side(&self) -> f64 {
        self.gasket1.side().max(self.gasket2.side())
    }

    #[inline]
    pub fn cell_index(&self, omega: &[Corner], eta: &[Corner]) -> usize {
        let wi = omega.iter().fold(0, |acc, c| acc * 3 + c.index());
        let ei = eta.iter().fold(0, |acc, c| acc * 3 + c.index());
        wi * self.per_factor + ei
    }

    /// `α_{ωη}` at barycentric coordinates.
    #[inline]
    pub fn alpha_at(&self, cell: usize, l: &Bary, m: &Bary) -> f64 {
        self.scaling.cells[cell].eval(l, m)
    }

    /// `h_{ωη}` at barycentric coordinates.
    #[inline]
    pub fn shift_at(&self, cell: usize, l: &Bary, m: &Bary) -> f64 {
        self.shift[cell].eval(l, m)
    }

    fn checked_cell(&self, omega: &Word, eta: &Word) -> Result<usize> {
        if omega.len() != self.n || eta.len() != self.n {
            return Err(FifError::Internal(format!(
                "cell-pair {omega}|{eta} is not a depth-{} cell-pair",
                self.n
            )));
        }
        Ok(self.cell_index(omega.letters(), eta.letters()))
    }

    /// `α_{ωη}(t, s)` at plane points.
    pub fn eval_scaling(&self, omega: &Word, eta: &Word, t: Point, s: Point) -> Result<f64> {
        let cell = self.checked_cell(omega, eta)?;
        let l = self.gasket1.checked_bary(t)?;
        let m = self.gasket2.checked_bary(s)?;
        Ok(self.alpha_at(cell, &l, &m))
    }

    /// `h_{ωη}(t, s)` at plane points.
    pub fn eval_shift(&self, omega: &Word, eta: &Word, t: Point, s: Point) -> Result<f64> {
        let cell = self.checked_cell(omega, eta)?;
        let l = self.gasket1.checked_bary(t)?;
        let m = self.gasket2.checked_bary(s)?;
        Ok(self.shift_at(cell, &l, &m))
    }

    /// Copy of the model with one shift corner value moved by `delta`.
    ///
    /// Breaks the junction conditions on purpose; used to exercise the checks.
    #[doc(hidden)]
    pub fn with_shift_perturbation(
        &self,
        omega: &Word,
        eta: &Word,
        i: Corner,
        j: Corner,
        delta: f64,
    ) -> Result<FifModel> {
        let cell = self.checked_cell(omega, eta)?;
        let mut shift = self.shift.clone();
        shift[cell].corners[i.index()][j.index()] += delta;
        Ok(FifModel::assemble(
            self.gasket1.clone(),
            self.gasket2.clone(),
            self.n,
            self.scaling.clone(),
            shift,
            self.data.clone(),
        ))
    }
}

pub fn sup_bounds(model: &FifModel) -> SupBounds {
    model.bounds()
}

/// A point shared by two depth-N cells of one gasket: `L_ω(p_j) = L_τ(p_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Junction {
    pub point: Address,
    pub sides: [(Word, Corner); 2],
}

/// All junctions between depth-`n` cells, including those whose words differ
/// before the last letter (`w·a·b^k` against `w·b·a^k`).
pub fn junctions(n: usize) -> Vec<Junction> {
    let mut groups: BTreeMap<Address, Vec<(Word, Corner)>> = BTreeMap::new();
    for w in Word::all(n) {
        for c in Corner::ALL {
            groups
                .entry(canonicalize(&Address::new(w.clone(), c)))
                .or_default()
                .push((w.clone(), c));
        }
    }
    groups
        .into_iter()
        .filter(|(_, v)| v.len() == 2)
        .map(|(point, v)| Junction {
            point,
            sides: [v[0].clone(), v[1].clone()],
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct JunctionViolation {
    /// The shared point, e.g. `"1@2|*"` for a first-factor junction.
    pub location: String,
    /// The two cell-pairs compared, e.g. `"1|1 vs 2|1"`.
    pub cells: String,
    pub discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityReport {
    pub first_junctions: usize,
    pub second_junctions: usize,
    pub mixed_junctions: usize,
    pub comparisons: usize,
    pub max_discrepancy: f64,
    pub violations: Vec<JunctionViolation>,
}

impl CompatibilityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that neighbouring shift cells agree on their shared points.
///
/// Each junction of one factor is compared against `samples_per_edge` points
/// of the other factor for every cell of that factor; junction pairs of both
/// factors are compared at the shared corner pair for all four cell combinations.
pub fn check_compatibility(model: &FifModel, samples_per_edge: usize) -> CompatibilityReport {
    let n = model.depth();
    let per = model.cells_per_factor();
    let junc = junctions(n);
    let samples = triangle_samples(samples_per_edge.max(1));
    let e = |c: Corner| {
        let mut b = [0.0; 3];
        b[c.index()] = 1.0;
        b
    };

    let mut report = CompatibilityReport {
        first_junctions: junc.len(),
        second_junctions: junc.len(),
        mixed_junctions: junc.len() * junc.len(),
        comparisons: 0,
        max_discrepancy: 0.0,
        violations: Vec::new(),
    };
    let record = |report: &mut CompatibilityReport, location: String, cells: String, d: f64| {
        report.comparisons += 1;
        report.max_discrepancy = report.max_discrepancy.max(d);
        if d.is_nan() || d > COMPATIBILITY_TOL {
            report.violations.push(JunctionViolation {
                location,
                cells,
                discrepancy: d,
            });
        }
    };

    for j in &junc {
        let [(w1, c1), (w2, c2)] = &j.sides;
        for other in 0..per {
            let other_word = Word::from_index(other, n);
            // First factor: h_{ωη}(p_j, s) = h_{τη}(p_i, s).
            let a = w1.index() * per + other;
            let b = w2.index() * per + other;
            let d = samples
                .iter()
                .map(|m| (model.shift_at(a, &e(*c1), m) - model.shift_at(b, &e(*c2), m)).abs())
                .fold(0.0, f64::max);
            record(
                &mut report,
                format!("{}|*", j.point),
                format!("{w1}|{other_word} vs {w2}|{other_word}"),
                d,
            );
            // Second factor: h_{ωη}(t, q_l) = h_{ωξ}(t, q_k).
            let a = other * per + w1.index();
            let b = other * per + w2.index();
            let d = samples
                .iter()
                .map(|l| (model.shift_at(a, l, &e(*c1)) - model.shift_at(b, l, &e(*c2))).abs())
                .fold(0.0, f64::max);
            record(
                &mut report,
                format!("*|{}", j.point),
                format!("{other_word}|{w1} vs {other_word}|{w2}"),
                d,
            );
        }
    }

    for j1 in &junc {
        for j2 in &junc {
            let reference = {
                let (w, c) = &j1.sides[0];
                let (v, k) = &j2.sides[0];
                model.shift_at(w.index() * per + v.index(), &e(*c), &e(*k))
            };
            for (w, c) in &j1.sides {
                for (v, k) in &j2.sides {
                    let val = model.shift_at(w.index() * per + v.index(), &e(*c), &e(*k));
                    record(
                        &mut report,
                        format!("{}|{}", j1.point, j2.point),
                        format!("{}|{} vs {w}|{v}", j1.sides[0].0, j2.sides[0].0),
                        (val - reference).abs(),
                    );
                }
            }
        }
    }
    report
}

//! Geometry of a single Sierpiński gasket spanned by three plane corners.
//!
//! Points are handled either as plane coordinates ([`Point`]) or as
//! barycentric coordinates with respect to the outer triangle. The
//! contractions `L_i(t) = (t + p_i)/2` act on barycentric coordinates as
//! `λ ↦ (λ + e_i)/2`, which is what the evaluators use internally.

mod address;

use std::fmt;
use std::ops::{Add, Mul, Sub};

pub use address::{
    address_dyadic, canonicalize, enumerate_vertices, same_point, shift, vertex_count, Address,
    Corner, DyadicBary, Word, MAX_ENUM_DEPTH, MAX_EXACT_LEVEL,
};

use crate::error::{FifError, Result};

/// Barycentric coordinates with respect to a gasket's outer triangle.
pub type Bary = [f64; 3];

/// Snap tolerance on barycentric coordinates (relative to the triangle).
pub const SNAP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// The three corners of a gasket plus cached affine data.
#[derive(Debug, Clone, PartialEq)]
pub struct GasketSpec {
    corners: [Point; 3],
    // Rows of the inverse of [p2 - p1, p3 - p1].
    inv: [[f64; 2]; 2],
}

impl Default for GasketSpec {
    /// The unit equilateral triangle `(0,0), (1,0), (1/2, √3/2)`.
    fn default() -> Self {
        GasketSpec::new([
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.5, 3f64.sqrt() / 2.0),
        ])
        .expect("unit triangle is non-degenerate")
    }
}

impl GasketSpec {
    pub fn new(corners: [Point; 3]) -> Result<Self> {
        if corners.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(FifError::Validation("gasket corners must be finite".into()));
        }
        let e1 = corners[1] - corners[0];
        let e2 = corners[2] - corners[0];
        let det = e1.x * e2.y - e1.y * e2.x;
        let scale = [e1.norm(), e2.norm(), (corners[2] - corners[1]).norm()]
            .into_iter()
            .fold(0.0, f64::max);
        if scale == 0.0 || det.abs() <= 1e-12 * scale * scale {
            return Err(FifError::Validation(format!(
                "gasket corners {}, {}, {} are affinely dependent",
                corners[0], corners[1], corners[2]
            )));
        }
        let inv = [[e2.y / det, -e2.x / det], [-e1.y / det, e1.x / det]];
        Ok(GasketSpec { corners, inv })
    }

    pub fn corners(&self) -> &[Point; 3] {
        &self.corners
    }

    pub fn corner(&self, c: Corner) -> Point {
        self.corners[c.index()]
    }

    /// Longest side of the outer triangle.
    pub fn side(&self) -> f64 {
        let [a, b, c] = self.corners;
        a.dist(b).max(b.dist(c)).max(c.dist(a))
    }

    /// Gradients of the three barycentric coordinate functions.
    pub fn bary_gradients(&self) -> [Point; 3] {
        let g2 = Point::new(self.inv[0][0], self.inv[0][1]);
        let g3 = Point::new(self.inv[1][0], self.inv[1][1]);
        [Point::new(-g2.x - g3.x, -g2.y - g3.y), g2, g3]
    }

    pub fn to_bary(&self, t: Point) -> Bary {
        let d = t - self.corners[0];
        let l2 = self.inv[0][0] * d.x + self.inv[0][1] * d.y;
        let l3 = self.inv[1][0] * d.x + self.inv[1][1] * d.y;
        [1.0 - l2 - l3, l2, l3]
    }

    pub fn from_bary(&self, b: Bary) -> Point {
        let [p1, p2, p3] = self.corners;
        Point::new(
            b[0] * p1.x + b[1] * p2.x + b[2] * p3.x,
            b[0] * p1.y + b[1] * p2.y + b[2] * p3.y,
        )
    }

    /// Barycentric coordinates of `t`, or a domain error if `t` is outside the hull.
    pub fn checked_bary(&self, t: Point) -> Result<Bary> {
        let b = self.to_bary(t);
        if !b.iter().all(|x| x.is_finite()) || b.iter().any(|&x| x < -SNAP_TOL) {
            return Err(FifError::Domain(format!(
                "point {t} lies outside the gasket triangle"
            )));
        }
        Ok(b)
    }
}

/// `L_w(t) = 2^{-|w|} t + Σ_k 2^{-k} p_{w_k}`.
pub fn word_map(spec: &GasketSpec, w: &Word, t: Point) -> Point {
    w.letters()
        .iter()
        .rev()
        .fold(t, |acc, &c| (acc + spec.corner(c)) * 0.5)
}

/// `L_w^{-1}(t)`; `t` must lie in the image triangle of the cell `w`.
pub fn word_map_inverse(spec: &GasketSpec, w: &Word, t: Point) -> Result<Point> {
    let pre = w
        .letters()
        .iter()
        .fold(t, |acc, &c| acc * 2.0 - spec.corner(c));
    let b = spec.to_bary(pre);
    if b.iter().any(|&x| x.is_nan() || x < -SNAP_TOL) {
        return Err(FifError::Domain(format!(
            "point {t} is not in the cell {w}"
        )));
    }
    Ok(pre)
}

/// Exact dyadic coordinates of an address together with its plane position.
pub fn address_coords(spec: &GasketSpec, a: &Address) -> (DyadicBary, Point) {
    let d = address_dyadic(a);
    (d, spec.from_bary(a.bary()))
}

/// Barycentric image under `L_c`.
#[inline]
pub fn bary_contract(b: Bary, c: Corner) -> Bary {
    let mut out = [b[0] * 0.5, b[1] * 0.5, b[2] * 0.5];
    out[c.index()] += 0.5;
    out
}

/// Barycentric preimage under `L_c`.
#[inline]
pub fn bary_expand(b: Bary, c: Corner) -> Bary {
    let mut out = [b[0] * 2.0, b[1] * 2.0, b[2] * 2.0];
    out[c.index()] -= 1.0;
    out
}

/// Child cell containing the barycentric point.
///
/// Cell `i` is `{λ_i ≥ 1/2}`; the smallest admissible index wins at touching
/// points. A point in a removed hole (no admissible child) goes to the child
/// with the largest coordinate, i.e. the nearest cell.
#[inline]
pub fn child_of(b: &Bary) -> Corner {
    if let Some(i) = b.iter().position(|&x| x >= 0.5 - SNAP_TOL) {
        return Corner::from_index(i);
    }
    let mut best = 0;
    for i in 1..3 {
        if b[i] > b[best] {
            best = i;
        }
    }
    Corner::from_index(best)
}

/// One level of descent: the child cell and the local coordinates inside it.
///
/// Hole points are clamped onto the chosen child so that repeated descent
/// stays bounded.
#[inline]
pub fn bary_descend(b: &Bary) -> (Corner, Bary) {
    let c = child_of(b);
    let mut out = bary_expand(*b, c);
    if out.iter().any(|&x| x < 0.0) {
        out = out.map(|x| x.max(0.0));
        let sum: f64 = out.iter().sum();
        out = out.map(|x| x / sum);
    }
    (c, out)
}

/// Descends `depth` levels from barycentric coordinates, returning the letters
/// chosen and the final local coordinates.
pub fn locate_bary(mut b: Bary, depth: usize) -> (Vec<Corner>, Bary) {
    let mut letters = Vec::with_capacity(depth);
    for _ in 0..depth {
        let (c, next) = bary_descend(&b);
        letters.push(c);
        b = next;
    }
    (letters, b)
}

/// Word of length `depth` whose cell contains `t` (lexicographically smallest at touching points).
pub fn locate(spec: &GasketSpec, t: Point, depth: usize) -> Result<Word> {
    if depth == 0 {
        return Err(FifError::Precondition("locate depth must be positive".into()));
    }
    let b = spec.checked_bary(t)?;
    Ok(Word::from_letters(locate_bary(b, depth).0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn close(a: Point, b: Point) -> bool {
        a.dist(b) < 1e-12
    }

    fn std_corners() -> GasketSpec {
        GasketSpec::new([
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.5, 0.8660254),
        ])
        .unwrap()
    }

    #[test]
    fn word_map_examples() {
        let g = std_corners();
        let [p1, _, p3] = *g.corners();
        assert!(close(word_map(&g, &w("1"), p1), p1));
        assert!(close(word_map(&g, &w("2"), Point::new(0.0, 0.0)), Point::new(0.5, 0.0)));
        // Oracle: p3/4 + p1/2 + p2/4.
        let r = word_map(&g, &w("12"), p3);
        assert!((r.x - 0.375).abs() < 1e-12);
        assert!((r.y - 0.21650635).abs() < 1e-12);
    }

    #[test]
    fn word_map_inverse_examples() {
        let g = std_corners();
        let p1 = g.corners()[0];
        assert!(close(word_map_inverse(&g, &w("1"), p1).unwrap(), p1));
        assert!(close(
            word_map_inverse(&g, &w("2"), Point::new(0.5, 0.0)).unwrap(),
            Point::new(0.0, 0.0)
        ));
        assert!(matches!(
            word_map_inverse(&g, &w("1"), Point::new(2.0, 2.0)),
            Err(FifError::Domain(_))
        ));
    }

    #[test]
    fn address_coords_agree_with_word_map() {
        let g = GasketSpec::default();
        for a in enumerate_vertices(4).unwrap() {
            let (_, p) = address_coords(&g, &a);
            assert!(close(p, word_map(&g, &a.word, g.corner(a.corner))));
        }
    }

    #[test]
    fn locate_examples() {
        let g = GasketSpec::default();
        assert_eq!(locate(&g, g.corners()[1], 2).unwrap(), w("22"));
        assert_eq!(locate(&g, Point::new(0.1, 0.0), 1).unwrap(), w("1"));
        assert_eq!(locate(&g, Point::new(0.5, 0.0), 1).unwrap(), w("1"));
        assert!(matches!(
            locate(&g, Point::new(-1.0, 0.0), 1),
            Err(FifError::Domain(_))
        ));
        assert!(matches!(
            locate(&g, Point::new(0.1, 0.0), 0),
            Err(FifError::Precondition(_))
        ));
    }

    #[test]
    fn degenerate_gasket_rejected() {
        let r = GasketSpec::new([
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(2.0, 2.0),
        ]);
        assert!(matches!(r, Err(FifError::Validation(_))));
    }

    #[test]
    fn touching_identity_exact() {
        // address(w·a·b^k, b) == address(w·b·a^k, a)
        for prefix in [w(""), w("3"), w("21"), w("132")] {
            for a in Corner::ALL {
                for b in Corner::ALL {
                    if a == b {
                        continue;
                    }
                    for k in 0..4 {
                        let lhs = prefix
                            .concat(&Word::repeat(a, 1))
                            .concat(&Word::repeat(b, k));
                        let rhs = prefix
                            .concat(&Word::repeat(b, 1))
                            .concat(&Word::repeat(a, k));
                        assert_eq!(
                            address_dyadic(&Address::new(lhs, b)),
                            address_dyadic(&Address::new(rhs, a))
                        );
                    }
                }
            }
        }
    }

    fn arb_word(max: usize) -> impl Strategy<Value = Word> {
        prop::collection::vec(0usize..3, 0..=max)
            .prop_map(|v| Word::from_letters(v.into_iter().map(Corner::from_index).collect()))
    }

    fn arb_hull_point() -> impl Strategy<Value = Bary> {
        (0.0f64..1.0, 0.0f64..1.0).prop_map(|(u, v)| {
            let (u, v) = if u + v > 1.0 { (1.0 - u, 1.0 - v) } else { (u, v) };
            [1.0 - u - v, u, v]
        })
    }

    proptest! {
        #[test]
        fn contraction_ratio(word in arb_word(8), a in arb_hull_point(), b in arb_hull_point()) {
            let g = GasketSpec::default();
            let (ta, tb) = (g.from_bary(a), g.from_bary(b));
            let lhs = word_map(&g, &word, ta).dist(word_map(&g, &word, tb));
            let rhs = (-(word.len() as f64)).exp2() * ta.dist(tb);
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn inverse_undoes_map(word in arb_word(10), a in arb_hull_point()) {
            let g = GasketSpec::default();
            let t = g.from_bary(a);
            let back = word_map_inverse(&g, &word, word_map(&g, &word, t)).unwrap();
            prop_assert!(back.dist(t) < 1e-9);
        }

        #[test]
        fn locate_finds_containing_cell(word in arb_word(10).prop_filter("non-empty", |w| !w.is_empty()), a in arb_hull_point()) {
            let g = GasketSpec::default();
            let x = word_map(&g, &word, g.from_bary(a));
            let found = locate(&g, x, word.len()).unwrap();
            prop_assert_eq!(found.len(), word.len());
            // The located cell contains x.
            prop_assert!(word_map_inverse(&g, &found, x).is_ok());
        }
    }
}

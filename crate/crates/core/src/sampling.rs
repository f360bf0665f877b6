//! Low-discrepancy sample points used by the checks and the oscillation tables.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gasket::{bary_contract, Bary, Corner};

/// Radical inverse of `i` in the given base.
pub fn halton(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let b = base as f64;
    while i > 0 {
        f /= b;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// `i`-th point of a Halton sequence folded into the triangle, as barycentric coordinates.
pub fn triangle_point(i: u64) -> Bary {
    let u = halton(i + 1, 2);
    let v = halton(i + 1, 3);
    let (u, v) = if u + v > 1.0 { (1.0 - u, 1.0 - v) } else { (u, v) };
    [1.0 - u - v, u, v]
}

/// The three corners followed by Halton points, `count` in total.
pub fn triangle_samples(count: usize) -> Vec<Bary> {
    let corners = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    corners
        .into_iter()
        .chain((0..).map(triangle_point))
        .take(count)
        .collect()
}

/// Letters fixed per gasket point; deeper than any descent the evaluator performs.
const GASKET_POINT_DEPTH: usize = 56;

/// Deterministic, well-spread points of the product of two unit gaskets.
///
/// The leading letter pairs of sample `i` are the base-9 digits of `i + 1`,
/// least significant first, so consecutive samples visit different cell-pairs;
/// the remaining letters come from a fixed-seed stream.
pub fn gasket_pair_points(count: usize) -> Vec<(Bary, Bary)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    (0..count as u64)
        .map(|i| {
            let mut letters = Vec::with_capacity(GASKET_POINT_DEPTH);
            let mut k = i + 1;
            while k > 0 {
                letters.push(((k % 9) / 3, k % 3));
                k /= 9;
            }
            while letters.len() < GASKET_POINT_DEPTH {
                letters.push((rng.gen_range(0..3), rng.gen_range(0..3)));
            }
            let mut t = [1.0, 0.0, 0.0];
            let mut s = [1.0, 0.0, 0.0];
            for &(a, b) in letters.iter().rev() {
                t = bary_contract(t, Corner::from_index(a as usize));
                s = bary_contract(s, Corner::from_index(b as usize));
            }
            (t, s)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_base2_prefix() {
        let got: Vec<f64> = (1..5).map(|i| halton(i, 2)).collect();
        assert_eq!(got, vec![0.5, 0.25, 0.75, 0.125]);
    }

    #[test]
    fn gasket_pairs_spread_over_cells() {
        let pts = gasket_pair_points(8);
        let mut cells: Vec<(usize, usize)> = pts
            .iter()
            .map(|(t, s)| (crate::gasket::child_of(t).index(), crate::gasket::child_of(s).index()))
            .collect();
        cells.sort();
        cells.dedup();
        assert_eq!(cells.len(), 8);
        assert_eq!(pts, gasket_pair_points(8));
    }

    #[test]
    fn triangle_points_are_inside() {
        for i in 0..1000 {
            let b = triangle_point(i);
            assert!(b.iter().all(|&x| x >= -1e-15));
            assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }
}

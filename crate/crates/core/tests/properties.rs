use proptest::prelude::*;

use sgfif::checks::{approx_excess, contraction_excess, functional_equation_residual};
use sgfif::evaluator::{eval_approx, eval_exact};
use sgfif::gasket::{Address, Corner, GasketSpec, Point, Word};
use sgfif::model::{build_model, check_compatibility, DataSet, FifModel, ScalingCell, ScalingField};
use sgfif::reference::random_model;

fn word(letters: &[usize]) -> Word {
    Word::from_letters(letters.iter().map(|&i| Corner::from_index(i)).collect())
}

/// Random data with a non-constant corner-tensor scaling field on skewed gaskets.
fn tensor_model(seed: u64, n: usize) -> FifModel {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let data = DataSet::from_fn(n, |_| rng.gen_range(-2.0..2.0)).unwrap();
    let per = 3usize.pow(n as u32);
    let overrides: Vec<_> = (0..per * per)
        .map(|cell| {
            let mut c = [[0.0; 3]; 3];
            for row in c.iter_mut() {
                for v in row.iter_mut() {
                    *v = rng.gen_range(-0.45..0.45);
                }
            }
            ((Word::from_index(cell / per, n), Word::from_index(cell % per, n)), ScalingCell::CornerTensor(c))
        })
        .collect();
    let scaling = ScalingField::from_cells(n, None, overrides).unwrap();
    let g1 = GasketSpec::new([Point::new(0.0, 0.0), Point::new(2.0, 0.0), Point::new(0.3, 1.1)]).unwrap();
    let g2 = GasketSpec::new([Point::new(-1.0, 0.0), Point::new(1.0, 0.5), Point::new(0.0, 2.0)]).unwrap();
    build_model(data, scaling, g1, g2).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn touching_addresses_agree(
        seed in 0u64..1000,
        prefix in proptest::collection::vec(0usize..3, 0..5),
        l in 0usize..3,
        dv in 1usize..3,
        other in proptest::collection::vec(0usize..3, 0..5),
        oc in 0usize..3,
    ) {
        let m = tensor_model(seed, 1);
        let v = (l + dv) % 3;
        let mut w1 = prefix.clone();
        w1.push(l);
        let mut w2 = prefix.clone();
        w2.push(v);
        let a1 = Address::new(word(&w1), Corner::from_index(v));
        let a2 = Address::new(word(&w2), Corner::from_index(l));
        let s = Address::new(word(&other), Corner::from_index(oc));
        let f1 = eval_exact(&m, &a1, &s);
        let f2 = eval_exact(&m, &a2, &s);
        prop_assert!((f1 - f2).abs() <= 1e-12 * (1.0 + f1.abs()), "{f1} vs {f2}");
        let g1 = eval_exact(&m, &s, &a1);
        let g2 = eval_exact(&m, &s, &a2);
        prop_assert!((g1 - g2).abs() <= 1e-12 * (1.0 + g1.abs()), "{g1} vs {g2}");
    }

    #[test]
    fn compatibility_holds_for_any_data(seed in 0u64..1000, n in 1usize..3) {
        let m = tensor_model(seed, n);
        let r = check_compatibility(&m, 8);
        prop_assert!(r.passed(), "{:?}", r.violations.first());
    }

    #[test]
    fn functional_equation(seed in 0u64..1000, n in 1usize..3) {
        let m = tensor_model(seed, n);
        let r = functional_equation_residual(&m, 50, 6, seed);
        prop_assert!(r <= 1e-9 * (1.0 + m.bounds().f_sup_bound), "{r}");
    }

    #[test]
    fn approx_bound_sound(seed in 0u64..1000, k in 1usize..5) {
        let m = tensor_model(seed, 1);
        prop_assert!(approx_excess(&m, k, 20, seed).unwrap() <= 1e-12);
    }

    #[test]
    fn contraction(seed in 0u64..1000) {
        let m = tensor_model(seed, 1);
        prop_assert!(contraction_excess(&m, 2, 2, seed).unwrap() <= 1e-12);
    }

    #[test]
    fn values_within_sup_bound(seed in 0u64..1000, u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let m = random_model(1, 0.4, seed).unwrap();
        let (u, v) = if u + v > 1.0 { (1.0 - u, 1.0 - v) } else { (u, v) };
        let g = GasketSpec::default();
        let p = g.from_bary([1.0 - u - v, u, v]);
        let r = eval_approx(&m, p, p, 20).unwrap();
        prop_assert!(r.value.abs() <= m.bounds().f_sup_bound + r.error_bound + 1e-12);
    }
}

#[test]
fn hole_points_stay_bounded() {
    let m = random_model(1, 0.4, 3).unwrap();
    let g = GasketSpec::default();
    let centroid = g.from_bary([1.0 / 3.0; 3]);
    let coarse = eval_approx(&m, centroid, centroid, 10).unwrap();
    let fine = eval_approx(&m, centroid, centroid, 30).unwrap();
    assert!(coarse.value.is_finite());
    assert!((coarse.value - fine.value).abs() <= coarse.error_bound + 1e-12);
}

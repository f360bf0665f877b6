//! Small models with known behaviour, used by tests, examples and the command line.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::gasket::{Address, GasketSpec};
use crate::model::{build_model, DataSet, FifModel, ProductVertex, ScalingField};

/// Value placed at the single nonzero vertex of [`bump_model`].
pub const BUMP_VALUE: f64 = 0.5;

/// The vertex pair carrying [`BUMP_VALUE`].
pub fn bump_vertex() -> ProductVertex {
    let a: Address = "1@2".parse().expect("valid address");
    ProductVertex::new(&a, &a)
}

/// `N = 1`, constant scaling `alpha`, value 0.5 at `(1@2, 1@2)` and zero elsewhere.
pub fn bump_model(alpha: f64) -> Result<FifModel> {
    let target = bump_vertex();
    let data = DataSet::from_fn(1, |pv| if *pv == target { BUMP_VALUE } else { 0.0 })?;
    build_model(
        data,
        ScalingField::uniform(1, alpha),
        GasketSpec::default(),
        GasketSpec::default(),
    )
}

/// All-zero data at depth `n`.
pub fn zero_model(n: usize, alpha: f64) -> Result<FifModel> {
    build_model(
        DataSet::zero(n)?,
        ScalingField::uniform(n, alpha),
        GasketSpec::default(),
        GasketSpec::default(),
    )
}

/// Interior data drawn uniformly from `[-1, 1)` with a fixed seed.
pub fn random_model(n: usize, alpha: f64, seed: u64) -> Result<FifModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = DataSet::from_fn(n, |_| rng.gen_range(-1.0..1.0))?;
    build_model(
        data,
        ScalingField::uniform(n, alpha),
        GasketSpec::default(),
        GasketSpec::default(),
    )
}

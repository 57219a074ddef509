use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use survfuse::{Covariate, Schema, SurvivalDataset, SurvivalRecord};

/// Three covariates; the hazard steps on `x` and `y`, `g` is noise.
pub fn step_sample(seed: u64, n: usize) -> SurvivalDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let schema = Schema::new(vec![
        Covariate::continuous("x"),
        Covariate::continuous("y"),
        Covariate::nominal("g", ["a", "b", "c"]),
    ])
    .unwrap();
    let records = (0..n).map(|_| {
        let z = vec![rng.random::<f64>(), rng.random::<f64>(), rng.random_range(0..3) as f64];
        let lp = if z[0] <= 0.5 { 1.5 } else { 0.0 } + if z[1] <= 0.3 { -1.0 } else { 0.0 };
        let t = -rng.random::<f64>().ln() / f64::exp(lp);
        let c = -rng.random::<f64>().ln() / 0.5;
        SurvivalRecord { time: t.min(c), event: t <= c, covariates: z }
    });
    SurvivalDataset::from_records(schema, records).unwrap()
}

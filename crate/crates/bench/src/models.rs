//! Data-generating models and censoring calibration.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use survfuse::{Covariate, Schema, Seed, SurvivalDataset, SurvivalRecord};

use crate::BenchError;

/// The seven benchmark models over covariates `z1..z7`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SimModel {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl SimModel {
    pub const ALL: [SimModel; 7] = [SimModel::A, SimModel::B, SimModel::C, SimModel::D, SimModel::E, SimModel::F, SimModel::G];

    pub fn tag(self) -> char {
        match self {
            SimModel::A => 'A',
            SimModel::B => 'B',
            SimModel::C => 'C',
            SimModel::D => 'D',
            SimModel::E => 'E',
            SimModel::F => 'F',
            SimModel::G => 'G',
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SimModel::A => "Null",
            SimModel::B => "Tree1",
            SimModel::C => "Tree2",
            SimModel::D => "Tree3",
            SimModel::E => "Linear",
            SimModel::F => "KAN",
            SimModel::G => "NonPH",
        }
    }

    pub fn from_tag(tag: &str) -> Result<SimModel, BenchError> {
        SimModel::ALL
            .into_iter()
            .find(|m| tag.eq_ignore_ascii_case(&m.tag().to_string()) || tag.eq_ignore_ascii_case(m.name()))
            .ok_or_else(|| BenchError::UnknownModel(tag.to_string()))
    }

    /// Zero-based indices of the covariates that drive the hazard.
    pub fn important(self) -> &'static [usize] {
        match self {
            SimModel::A => &[],
            SimModel::B | SimModel::C | SimModel::G => &[0, 1],
            SimModel::D => &[1],
            SimModel::E | SimModel::F => &[1, 5],
        }
    }

    /// Log hazard for the proportional-hazards models, `None` for G.
    pub fn log_hazard(self, z: &[f64]) -> Option<f64> {
        use std::f64::consts::PI;
        let ind = |b: bool| if b { 1.0 } else { 0.0 };
        Some(match self {
            SimModel::A => -1.0,
            SimModel::B => -1.0 + z[0] + 2.0 * ind(z[1] <= 0.5),
            SimModel::C => -1.0 + 3.0 * z[0] * ind((0.25..=0.75).contains(&z[1])),
            SimModel::D => -1.0 + 4.0 * ind((6.0 * PI * z[1]).sin() >= 0.0),
            SimModel::E => -1.0 + 3.0 * z[1] - 3.0 * z[5],
            SimModel::F => -1.0 + 2.0 * (2.0 * PI * z[1] * z[1]).sin() + 2.0 * (2.0 * PI * z[5] * z[5]).sin(),
            SimModel::G => return None,
        })
    }
}

/// A covariate distribution paired with an event-time law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Generator {
    Table(SimModel),
    /// One uniform covariate; log hazard `1 + beta1 · I(z <= 0.5)`.
    Cutoff { beta1: f64 },
    /// Five covariates with 2, 10, 50, continuous and 10 nominal levels;
    /// log hazard `−1 + Σ betas[j] · x_j` where each `x_j` is a binary split.
    Selection { betas: [f64; 5] },
}

const NOMINAL5: [&str; 5] = ["A", "B", "C", "D", "E"];
const NOMINAL10: [&str; 10] = ["A", "B", "C", "D", "E", "F", "G", "H", "I", "J"];

impl Generator {
    pub fn schema(&self) -> Schema {
        let covariates = match self {
            Generator::Table(_) => vec![
                Covariate::binary("z1"),
                Covariate::continuous("z2"),
                Covariate::nominal("z3", NOMINAL5),
                Covariate::binary("z4"),
                Covariate::binary("z5"),
                Covariate::continuous("z6"),
                Covariate::continuous("z7"),
            ],
            Generator::Cutoff { .. } => vec![Covariate::continuous("z")],
            Generator::Selection { .. } => vec![
                Covariate::binary("z1"),
                Covariate::continuous("z2"),
                Covariate::continuous("z3"),
                Covariate::continuous("z4"),
                Covariate::nominal("z5", NOMINAL10),
            ],
        };
        Schema::new(covariates).expect("fixed schemas are valid")
    }

    fn covariates(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let bern = |rng: &mut ChaCha8Rng| if rng.random_bool(0.5) { 1.0 } else { 0.0 };
        match self {
            Generator::Table(_) => {
                let z1 = bern(rng);
                let z2 = rng.random::<f64>();
                let z3 = rng.random_range(0..5) as f64;
                let z4 = bern(rng);
                let z5 = bern(rng);
                let z6 = rng.random::<f64>();
                let z7 = rng.random::<f64>();
                vec![z1, z2, z3, z4, z5, z6, z7]
            }
            Generator::Cutoff { .. } => vec![rng.random::<f64>()],
            Generator::Selection { .. } => {
                let z1 = bern(rng);
                let z2 = rng.random_range(1..=10) as f64 / 10.0;
                let z3 = rng.random_range(1..=50) as f64 / 50.0;
                let z4 = rng.random::<f64>();
                let z5 = rng.random_range(0..10) as f64;
                vec![z1, z2, z3, z4, z5]
            }
        }
    }

    /// Constant hazard of a subject, or `None` when event times are not
    /// exponential.
    pub fn rate(&self, z: &[f64]) -> Option<f64> {
        let ind = |b: bool| if b { 1.0 } else { 0.0 };
        match self {
            Generator::Table(m) => m.log_hazard(z).map(f64::exp),
            Generator::Cutoff { beta1 } => Some((1.0 + beta1 * ind(z[0] <= 0.5)).exp()),
            Generator::Selection { betas } => {
                let x = [z[0], ind(z[1] <= 0.5), ind(z[2] <= 0.5), ind(z[3] <= 0.5), ind(z[4] < 5.0)];
                Some((-1.0 + betas.iter().zip(x).map(|(b, x)| b * x).sum::<f64>()).exp())
            }
        }
    }

    fn event_time(&self, z: &[f64], rng: &mut ChaCha8Rng) -> f64 {
        match self.rate(z) {
            Some(rate) => Exp::new(rate).expect("positive rate").sample(rng),
            None => {
                // log-logistic accelerated failure time
                let u: f64 = rng.random_range(f64::EPSILON..1.0);
                (-1.0 + z[0] + 2.0 * if z[1] <= 0.5 { 1.0 } else { 0.0 } + (u / (1.0 - u)).ln()).exp()
            }
        }
    }

    fn key(&self) -> String {
        format!("{self:?}")
    }
}

const CALIBRATION_DRAWS: usize = 100_000;

/// Expected censored fraction under exponential censoring with rate `theta`,
/// from a fixed Monte-Carlo sample of subjects.
fn censored_fraction(sample: &[Subject], theta: f64) -> f64 {
    sample
        .iter()
        .map(|s| match *s {
            Subject::Rate(l) => theta / (l + theta),
            Subject::Time(t) => 1.0 - (-theta * t).exp(),
        })
        .sum::<f64>()
        / sample.len() as f64
}

enum Subject {
    Rate(f64),
    Time(f64),
}

/// Rate of the exponential censoring distribution giving `target` expected
/// censoring, found by bisection on a fixed calibration sample and cached.
pub fn censoring_rate(generator: &Generator, target: f64) -> f64 {
    static CACHE: OnceLock<Mutex<HashMap<(String, u64), f64>>> = OnceLock::new();
    let key = (generator.key(), target.to_bits());
    let cache = CACHE.get_or_init(Default::default);
    if let Some(&theta) = cache.lock().expect("cache lock").get(&key) {
        return theta;
    }
    let mut rng = Seed(0x5eed_cafe).child(&key.0).rng();
    let sample: Vec<Subject> = (0..CALIBRATION_DRAWS)
        .map(|_| {
            let z = generator.covariates(&mut rng);
            match generator.rate(&z) {
                Some(r) => Subject::Rate(r),
                None => Subject::Time(generator.event_time(&z, &mut rng)),
            }
        })
        .collect();
    let (mut lo, mut hi) = (-30.0f64, 30.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if censored_fraction(&sample, mid.exp()) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let theta = (0.5 * (lo + hi)).exp();
    cache.lock().expect("cache lock").insert(key, theta);
    theta
}

/// `n` subjects with independent exponential censoring calibrated to the
/// `censoring` fraction (no censoring when it is zero).
pub fn generate(generator: &Generator, n: usize, censoring: f64, seed: Seed) -> SurvivalDataset {
    let theta = (censoring > 0.0).then(|| censoring_rate(generator, censoring));
    let mut rng = seed.rng();
    let mut data = SurvivalDataset::new(generator.schema());
    for _ in 0..n {
        let z = generator.covariates(&mut rng);
        let t = generator.event_time(&z, &mut rng);
        let c = theta.map_or(f64::INFINITY, |th| Exp::new(th).expect("positive rate").sample(&mut rng));
        let (time, event) = if t <= c { (t, true) } else { (c, false) };
        data.push(SurvivalRecord { time: time.max(f64::MIN_POSITIVE), event, covariates: z }).expect("generated records match the schema");
    }
    data
}

/// Shorthand for a benchmark model.
pub fn generate_model(model: SimModel, n: usize, censoring: f64, seed: Seed) -> SurvivalDataset {
    generate(&Generator::Table(model), n, censoring, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_c_hazard() {
        let z = [1.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert!((SimModel::C.log_hazard(&z).unwrap().exp() - 2f64.exp()).abs() < 1e-12);
        assert_eq!(SimModel::A.log_hazard(&z), Some(-1.0));
    }

    #[test]
    fn tags_round_trip() {
        for m in SimModel::ALL {
            assert_eq!(SimModel::from_tag(&m.tag().to_string()).unwrap(), m);
        }
        assert!(SimModel::from_tag("Q").is_err());
    }
}

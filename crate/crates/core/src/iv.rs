//! Variable selection by intersected validation.
//!
//! Each variable's best split is found on a resampled training set of the
//! node's size, frozen, and scored on a validation set of the same size that
//! overlaps it only through bootstrap draws. The winning variable's cutoff
//! is then re-optimized on the whole node.

use serde::{Deserialize, Serialize};

use crate::dataset::{out_of_bag, stratified_bootstrap_in, stratified_partition_in, SurvivalDataset};
use crate::rng::Seed;
use crate::split::{best_split, best_split_for_variable, NodeData, SplitConfig, SplitResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    #[default]
    Iv,
    Plain,
}

/// The resampled sets behind one intersected-validation split.
#[derive(Debug, Clone, PartialEq)]
pub struct IvSamples {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
}

pub fn iv_samples(data: &SurvivalDataset, rows: &[usize], seed: Seed) -> IvSamples {
    let n = rows.len();
    let parts = stratified_partition_in(data, rows, 3, &mut seed.child("partition").rng());
    let (d1, d2, d3) = (&parts[0], &parts[1], &parts[2]);
    let d12 = d1.union(d2);
    let boot12 = stratified_bootstrap_in(data, d12.as_slice(), d2.len() + d3.len(), &mut seed.child("boot12").rng())
        .expect("pool strata are non-empty when quotas are positive");
    let train = d1.union(&boot12).0;
    let oob2 = out_of_bag(d2, &boot12);
    let extra = n as isize - oob2.len() as isize - d3.len() as isize;
    let mut validation = d3.union(&oob2).0;
    if extra > 0 {
        let d23 = d2.union(d3);
        let boot23 = stratified_bootstrap_in(data, d23.as_slice(), extra as usize, &mut seed.child("boot23").rng())
            .expect("pool strata are non-empty when quotas are positive");
        validation.extend(boot23.iter());
    }
    IvSamples { train, validation }
}

/// Split of the node `rows` with the variable chosen by intersected
/// validation. A single-variable schema reduces to the plain best split.
pub fn iv_split(data: &SurvivalDataset, rows: &[usize], config: &SplitConfig, seed: Seed) -> Option<SplitResult> {
    let p = data.schema().len();
    let full = NodeData::new(data, rows);
    if p <= 1 {
        return best_split(&full, config);
    }
    let samples = iv_samples(data, rows, seed);
    let train = NodeData::new(data, &samples.train);
    let validation = NodeData::new(data, &samples.validation);
    let mut scored: Vec<(usize, f64)> = (0..p)
        .filter_map(|j| {
            let frozen = best_split_for_variable(&train, j, config)?;
            Some((j, validation.statistic(&frozen.spec)?))
        })
        .collect();
    // highest validated statistic first; lower index wins ties
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.into_iter().find_map(|(j, _)| best_split_for_variable(&full, j, config))
}

//! Choice of the fusion penalty: held-out test sample, V-fold
//! cross-validation of the whole grow-and-fuse pipeline, or in-sample
//! deviance with an information-criterion penalty.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{stratified_partition_in, SurvivalDataset};
use crate::error::{Error, Result};
use crate::fusion::{fusion_path, fusion_path_on_grid, fusion_start, shear, FusionConfig, FusionPath, Pattern};
use crate::iv::SplitMode;
use crate::rng::Seed;
use crate::tree::{grow, Tree, TreeConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Criterion {
    TestSample,
    CrossValidation { folds: usize },
    Aic,
    Bic,
}

impl Criterion {
    pub fn name(&self) -> String {
        match self {
            Criterion::TestSample => "test_sample".into(),
            Criterion::CrossValidation { folds } => format!("cv{folds}"),
            Criterion::Aic => "aic".into(),
            Criterion::Bic => "bic".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub tree: TreeConfig,
    pub fusion: FusionConfig,
    /// Split mode of the trees grown inside cross-validation folds.
    pub fold_mode: SplitMode,
    /// Pick the largest penalty within one standard error of the CV minimum.
    pub one_se: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig { tree: TreeConfig::default(), fusion: FusionConfig::default(), fold_mode: SplitMode::Iv, one_se: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub lambda: f64,
    pub group_count: usize,
    /// Validated deviance for test-sample and CV selection, in-sample otherwise.
    pub deviance: f64,
    pub aic: f64,
    pub bic: f64,
    /// Cross-validation standard error of `deviance`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deviance_se: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub criterion: String,
    pub candidates: Vec<Candidate>,
    pub chosen: usize,
    /// Folds whose own largest useful penalty exceeded the shared grid.
    pub clamped_folds: usize,
    /// Per fold, per candidate deviance (cross-validation only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fold_deviances: Vec<Vec<f64>>,
}

impl SelectionReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,groups,deviance,aic,bic,chosen\n");
        for (m, c) in self.candidates.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                sig6(c.lambda),
                c.group_count,
                sig6(c.deviance),
                sig6(c.aic),
                sig6(c.bic),
                u8::from(m == self.chosen)
            ));
        }
        out
    }
}

/// Six significant digits, as used in every CSV report.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let s = format!("{:.5e}", x);
    let v: f64 = s.parse().expect("formatted float parses");
    let mag = v.abs().log10().floor() as i32;
    if (-5..15).contains(&mag) {
        let decimals = (5 - mag).max(0) as usize;
        let mut t = format!("{:.*}", decimals, v);
        if t.contains('.') {
            t = t.trim_end_matches('0').trim_end_matches('.').to_string();
        }
        t
    } else {
        let (mantissa, exp) = s.split_once('e').expect("scientific format");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exp}")
    }
}

/// Everything produced by one selection run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub initial_tree: Tree,
    pub path: FusionPath,
    /// Initial tree sheared to the chosen grouping; leaves carry group ids.
    pub tree: Tree,
    pub pattern: Pattern,
    pub report: SelectionReport,
}

impl FittedModel {
    pub fn group_count(&self) -> usize {
        self.pattern.group_count
    }

    /// Group (1-based) of every row of `data`.
    pub fn groups(&self, data: &SurvivalDataset) -> Vec<usize> {
        (0..data.len()).map(|i| self.group_of_row(data, i)).collect()
    }

    pub fn group_of_row(&self, data: &SurvivalDataset, row: usize) -> usize {
        let leaf = self.tree.route_row(data, row);
        self.tree.node(leaf).and_then(|n| n.group).expect("sheared leaves carry groups")
    }
}

/// Index minimizing `score`; ties go to the larger penalty.
fn argmin(candidates: &[Candidate], score: impl Fn(&Candidate) -> f64) -> usize {
    let mut best = 0;
    for (m, c) in candidates.iter().enumerate() {
        let s = score(c);
        let b = score(&candidates[best]);
        if s < b || (s == b && c.lambda > candidates[best].lambda) {
            best = m;
        }
    }
    best
}

fn all_rows(data: &SurvivalDataset) -> Vec<usize> {
    (0..data.len()).collect()
}

fn in_sample_candidates(path: &FusionPath, tree: &Tree, data: &SurvivalDataset, rows: &[usize]) -> Vec<Candidate> {
    let n_events = rows.iter().filter(|&&i| data.event(i)).count().max(1) as f64;
    path.patterns
        .iter()
        .map(|p| {
            let d = p.deviance(tree, data, rows);
            let k = p.group_count as f64;
            Candidate { lambda: p.lambda, group_count: p.group_count, deviance: d, aic: d + 2.0 * k, bic: d + n_events.ln() * k, deviance_se: None }
        })
        .collect()
}

fn finish(initial_tree: Tree, path: FusionPath, report: SelectionReport) -> FittedModel {
    let pattern = path.patterns[report.chosen].clone();
    let tree = shear(&initial_tree, &pattern.leaf_to_group);
    FittedModel { initial_tree, path, tree, pattern, report }
}

fn grow_and_fuse(data: &SurvivalDataset, rows: &[usize], config: &PipelineConfig, seed: Seed) -> Result<(Tree, FusionPath)> {
    if !rows.iter().any(|&i| data.event(i)) {
        return Err(Error::NoEvents);
    }
    let tree = fusion_start(grow(data, rows, &config.tree, seed.child("grow")), &config.fusion);
    let path = fusion_path(&tree, data, rows, &config.fusion)?;
    Ok((tree, path))
}

pub fn select_test_sample(train: &SurvivalDataset, test: &SurvivalDataset, config: &PipelineConfig, seed: Seed) -> Result<FittedModel> {
    let rows = all_rows(train);
    let (tree, path) = grow_and_fuse(train, &rows, config, seed)?;
    let mut candidates = in_sample_candidates(&path, &tree, train, &rows);
    let test_rows = all_rows(test);
    for (c, p) in candidates.iter_mut().zip(&path.patterns) {
        c.deviance = p.deviance(&tree, test, &test_rows);
    }
    let chosen = argmin(&candidates, |c| c.deviance);
    let report = SelectionReport { criterion: Criterion::TestSample.name(), candidates, chosen, clamped_folds: 0, fold_deviances: vec![] };
    Ok(finish(tree, path, report))
}

pub fn select_ic(data: &SurvivalDataset, criterion: Criterion, config: &PipelineConfig, seed: Seed) -> Result<FittedModel> {
    let rows = all_rows(data);
    let (tree, path) = grow_and_fuse(data, &rows, config, seed)?;
    let candidates = in_sample_candidates(&path, &tree, data, &rows);
    let chosen = match criterion {
        Criterion::Aic => argmin(&candidates, |c| c.aic),
        Criterion::Bic => argmin(&candidates, |c| c.bic),
        _ => return Err(Error::InvalidArgument("information criterion must be aic or bic".into())),
    };
    let report = SelectionReport { criterion: criterion.name(), candidates, chosen, clamped_folds: 0, fold_deviances: vec![] };
    Ok(finish(tree, path, report))
}

struct FoldScore {
    deviances: Vec<f64>,
    clamped: bool,
}

fn score_fold(
    data: &SurvivalDataset,
    train: &[usize],
    held_out: &[usize],
    lambdas: &[f64],
    grid: &[f64],
    config: &PipelineConfig,
    seed: Seed,
) -> Result<FoldScore> {
    let tree_config = TreeConfig { mode: config.fold_mode, ..config.tree };
    let tree = fusion_start(grow(data, train, &tree_config, seed), &config.fusion);
    let path = match fusion_path_on_grid(&tree, data, train, &config.fusion, Some(grid)) {
        Ok(p) => p,
        Err(Error::Numerical(msg)) => {
            log::warn!("fold path failed ({msg}); scoring the single-group model");
            let root = tree.truncated(0);
            fusion_path_on_grid(&root, data, train, &config.fusion, Some(grid))?
        }
        Err(e) => return Err(e),
    };
    let deviances = lambdas.iter().map(|&l| path.pattern_at(l).deviance(&tree, data, held_out)).collect();
    Ok(FoldScore { deviances, clamped: path.clamped })
}

pub fn select_cv(data: &SurvivalDataset, folds: usize, config: &PipelineConfig, seed: Seed) -> Result<FittedModel> {
    if folds < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 folds, got {folds}")));
    }
    if folds > data.len() {
        return Err(Error::InvalidArgument(format!("{folds} folds exceed {} rows", data.len())));
    }
    let rows = all_rows(data);
    let (tree, path) = grow_and_fuse(data, &rows, config, seed)?;
    let grid = path.lambdas();
    let parts = stratified_partition_in(data, &rows, folds, &mut seed.child("folds").rng());
    let scores: Vec<Result<FoldScore>> = parts
        .par_iter()
        .enumerate()
        .map(|(v, held)| {
            let mut in_fold = vec![false; data.len()];
            for &i in held.iter() {
                in_fold[i] = true;
            }
            let train: Vec<usize> = rows.iter().copied().filter(|&i| !in_fold[i]).collect();
            score_fold(data, &train, held.as_slice(), &grid, &grid, config, seed.child("fold").index(v as u64))
        })
        .collect();
    let scores = scores.into_iter().collect::<Result<Vec<_>>>()?;
    let totals: Vec<f64> = (0..grid.len()).map(|g| scores.iter().map(|s| s.deviances[g]).sum()).collect();
    let mut candidates = in_sample_candidates(&path, &tree, data, &rows);
    let mut fold_deviances = vec![vec![0.0; candidates.len()]; scores.len()];
    let v = folds as f64;
    for (m, c) in candidates.iter_mut().enumerate() {
        // best grid point on this pattern's plateau; the grid descends, so
        // strict improvement keeps the larger penalty on ties
        let mut best: Option<usize> = None;
        for (g, point) in path.points.iter().enumerate() {
            if point.pattern == m && best.is_none_or(|b| totals[g] < totals[b]) {
                best = Some(g);
            }
        }
        let g = best.expect("every pattern comes from some path point");
        let per_fold: Vec<f64> = scores.iter().map(|s| s.deviances[g]).collect();
        let mean = totals[g] / v;
        let var = per_fold.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (v - 1.0);
        c.lambda = grid[g];
        c.deviance = totals[g];
        c.deviance_se = Some((var * v).sqrt());
        for (row, d) in fold_deviances.iter_mut().zip(per_fold) {
            row[m] = d;
        }
    }
    let mut chosen = argmin(&candidates, |c| c.deviance);
    if config.one_se {
        let limit = candidates[chosen].deviance + candidates[chosen].deviance_se.unwrap_or(0.0);
        chosen = candidates
            .iter()
            .enumerate()
            .filter(|(_, c)| c.deviance <= limit)
            .max_by(|a, b| a.1.lambda.total_cmp(&b.1.lambda))
            .map_or(chosen, |(m, _)| m);
    }
    let report = SelectionReport {
        criterion: Criterion::CrossValidation { folds }.name(),
        candidates,
        chosen,
        clamped_folds: scores.iter().filter(|s| s.clamped).count(),
        fold_deviances,
    };
    Ok(finish(tree, path, report))
}

/// Run the selector named by `criterion`; `test` is required for
/// test-sample selection and ignored otherwise.
pub fn select(
    data: &SurvivalDataset,
    test: Option<&SurvivalDataset>,
    criterion: Criterion,
    config: &PipelineConfig,
    seed: Seed,
) -> Result<FittedModel> {
    match criterion {
        Criterion::TestSample => {
            let test = test.ok_or_else(|| Error::InvalidArgument("test-sample selection needs a test set".into()))?;
            select_test_sample(data, test, config, seed)
        }
        Criterion::CrossValidation { folds } => select_cv(data, folds, config, seed),
        Criterion::Aic | Criterion::Bic => select_ic(data, criterion, config, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(1.0), "1");
        assert_eq!(sig6(1.23456789), "1.23457");
        assert_eq!(sig6(123456789.0), "123457000");
        assert_eq!(sig6(0.000123456789), "0.000123457");
        assert_eq!(sig6(-2.5), "-2.5");
        assert_eq!(sig6(1e-7), "1e-7");
        assert_eq!(sig6(1.234567e20), "1.23457e20");
    }

    #[test]
    fn argmin_prefers_larger_penalty_on_ties() {
        let c = |lambda: f64, deviance: f64| Candidate { lambda, group_count: 1, deviance, aic: 0.0, bic: 0.0, deviance_se: None };
        let cands = vec![c(0.0, 1.0), c(0.5, 1.0), c(1.0, 2.0)];
        assert_eq!(argmin(&cands, |c| c.deviance), 1);
    }
}

//! Replicated experiments: full-pipeline comparisons, bias-correction
//! studies, cutoff recovery and variable-selection frequencies.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use survfuse::inference::{bootstrap_bias_correct, group_summaries, BbcConfig};
use survfuse::iv::iv_split;
use survfuse::select::{select, sig6, Criterion, FittedModel, PipelineConfig};
use survfuse::split::{best_split, greedy_search, sss_search, NodeData, SplitConfig, SplitMethod};
use survfuse::survival::concordance;
use survfuse::{Seed, SurvivalDataset};

use crate::models::{generate, generate_model, Generator, SimModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSettings {
    pub replicates: usize,
    /// Training size (all of it for CV and information criteria).
    pub n_train: usize,
    /// Validation size for test-sample selection.
    pub n_valid: usize,
    /// Independent evaluation sample for deviance and concordance.
    pub n_eval: usize,
    pub censoring: f64,
    pub criterion: Criterion,
    pub pipeline: PipelineConfig,
}

impl Default for ComparisonSettings {
    fn default() -> Self {
        ComparisonSettings {
            replicates: 50,
            n_train: 600,
            n_valid: 200,
            n_eval: 1000,
            censoring: 0.5,
            criterion: Criterion::CrossValidation { folds: 10 },
            pipeline: PipelineConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateResult {
    pub replicate: usize,
    pub groups: usize,
    /// Leaves of the final (sheared) tree and of the tree before fusion.
    pub leaves: usize,
    pub initial_leaves: usize,
    pub inclusive: bool,
    pub exclusive: bool,
    pub accurate: bool,
    pub deviance: f64,
    pub concordance: Option<f64>,
    pub split_variables: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchMetrics {
    pub model: SimModel,
    pub criterion: String,
    pub replicates: usize,
    pub failures: usize,
    pub size_mean: f64,
    pub size_sd: f64,
    pub leaves_mean: f64,
    pub initial_leaves_mean: f64,
    pub inclusive: f64,
    pub exclusive: f64,
    pub accurate: f64,
    pub deviance_mean: f64,
    pub deviance_sd: f64,
    pub concordance_mean: f64,
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = if v.len() > 1 { (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
    (mean, sd)
}

/// Variable-selection flags of a final tree against the important set.
pub fn selection_flags(used: &[usize], important: &[usize]) -> (bool, bool) {
    let inclusive = used.iter().all(|v| important.contains(v));
    let exclusive = important.iter().all(|v| used.contains(v));
    (inclusive, exclusive)
}

fn evaluate(model: &FittedModel, eval: &SurvivalDataset) -> (f64, Option<f64>) {
    let rows: Vec<usize> = (0..eval.len()).collect();
    let deviance = model.pattern.deviance(&model.initial_tree, eval, &rows);
    let risk = model.pattern.linear_predictor(&model.initial_tree, eval, &rows);
    (deviance, concordance(&risk, eval.times(), eval.events()))
}

fn comparison_replicate(model: SimModel, settings: &ComparisonSettings, r: usize, seed: Seed) -> Option<ReplicateResult> {
    let seed = seed.index(r as u64);
    let train = generate_model(model, settings.n_train, settings.censoring, seed.child("train"));
    let valid = matches!(settings.criterion, Criterion::TestSample)
        .then(|| generate_model(model, settings.n_valid, settings.censoring, seed.child("valid")));
    let eval = generate_model(model, settings.n_eval, settings.censoring, seed.child("eval"));
    let fitted = match select(&train, valid.as_ref(), settings.criterion, &settings.pipeline, seed.child("fit")) {
        Ok(f) => f,
        Err(e) => {
            log::warn!("replicate {r} of model {} failed: {e}", model.tag());
            return None;
        }
    };
    let used = fitted.tree.split_variables();
    let (inclusive, exclusive) = selection_flags(&used, model.important());
    let (deviance, conc) = evaluate(&fitted, &eval);
    Some(ReplicateResult {
        replicate: r,
        groups: fitted.group_count(),
        leaves: fitted.tree.n_leaves(),
        initial_leaves: fitted.initial_tree.n_leaves(),
        inclusive,
        exclusive,
        accurate: inclusive && exclusive,
        deviance,
        concordance: conc,
        split_variables: used,
    })
}

/// Run the full pipeline on `replicates` independent datasets of `model`.
pub fn run_comparison(model: SimModel, settings: &ComparisonSettings, seed: Seed) -> (BenchMetrics, Vec<ReplicateResult>) {
    let results: Vec<Option<ReplicateResult>> =
        (0..settings.replicates).into_par_iter().map(|r| comparison_replicate(model, settings, r, seed)).collect();
    let failures = results.iter().filter(|r| r.is_none()).count();
    let ok: Vec<ReplicateResult> = results.into_iter().flatten().collect();
    let rate = |f: fn(&ReplicateResult) -> bool| ok.iter().filter(|r| f(r)).count() as f64 / ok.len().max(1) as f64;
    let (size_mean, size_sd) = mean_sd(&ok.iter().map(|r| r.groups as f64).collect::<Vec<_>>());
    let (deviance_mean, deviance_sd) = mean_sd(&ok.iter().map(|r| r.deviance).collect::<Vec<_>>());
    let (concordance_mean, _) = mean_sd(&ok.iter().filter_map(|r| r.concordance).collect::<Vec<_>>());
    let metrics = BenchMetrics {
        model,
        criterion: settings.criterion.name(),
        replicates: ok.len(),
        failures,
        size_mean,
        size_sd,
        leaves_mean: mean_sd(&ok.iter().map(|r| r.leaves as f64).collect::<Vec<_>>()).0,
        initial_leaves_mean: mean_sd(&ok.iter().map(|r| r.initial_leaves as f64).collect::<Vec<_>>()).0,
        inclusive: rate(|r| r.inclusive),
        exclusive: rate(|r| r.exclusive),
        accurate: rate(|r| r.accurate),
        deviance_mean,
        deviance_sd,
        concordance_mean,
    };
    (metrics, ok)
}

pub fn metrics_csv(rows: &[BenchMetrics]) -> String {
    let mut out = String::from(
        "model,name,criterion,replicates,failures,size_mean,size_sd,inclusive,exclusive,accurate,deviance_mean,deviance_sd,concordance_mean\n",
    );
    for m in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            m.model.tag(),
            m.model.name(),
            m.criterion,
            m.replicates,
            m.failures,
            sig6(m.size_mean),
            sig6(m.size_sd),
            sig6(m.inclusive),
            sig6(m.exclusive),
            sig6(m.accurate),
            sig6(m.deviance_mean),
            sig6(m.deviance_sd),
            sig6(m.concordance_mean),
        ));
    }
    out
}

pub fn replicates_csv(rows: &[ReplicateResult]) -> String {
    let mut out = String::from("replicate,groups,leaves,initial_leaves,inclusive,exclusive,accurate,deviance,concordance,split_variables\n");
    for r in rows {
        let vars: Vec<String> = r.split_variables.iter().map(|v| format!("z{}", v + 1)).collect();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.replicate,
            r.groups,
            r.leaves,
            r.initial_leaves,
            u8::from(r.inclusive),
            u8::from(r.exclusive),
            u8::from(r.accurate),
            sig6(r.deviance),
            r.concordance.map_or_else(String::new, sig6),
            vars.join(" "),
        ));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasSettings {
    pub replicates: usize,
    pub n_train: usize,
    /// Validation sample used to pick the final grouping.
    pub n_valid: usize,
    /// Large independent sample whose estimates stand in for the truth.
    pub n_truth: usize,
    pub censoring: f64,
    pub pipeline: PipelineConfig,
    pub bbc: BbcConfig,
}

impl Default for BiasSettings {
    fn default() -> Self {
        BiasSettings {
            replicates: 50,
            n_train: 600,
            n_valid: 400,
            n_truth: 20_000,
            censoring: 0.5,
            pipeline: PipelineConfig::default(),
            bbc: BbcConfig { replicates: 20, ..BbcConfig::default() },
        }
    }
}

/// One non-reference group of one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasRecord {
    pub replicate: usize,
    pub group: usize,
    pub beta: f64,
    pub corrected_beta: f64,
    pub truth_beta: f64,
    pub sd: f64,
    pub corrected_sd: f64,
    pub truth_sd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSummary {
    pub bias: f64,
    /// Median absolute deviation of the estimates from their median.
    pub mad: f64,
    pub mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasRow {
    pub estimate: String,
    pub truth_mean: f64,
    pub uncorrected: ErrorSummary,
    pub corrected: ErrorSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasTable {
    pub model: SimModel,
    pub replicates: usize,
    pub rows: Vec<BiasRow>,
    pub records: Vec<BiasRecord>,
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

pub fn error_summary(estimates: &[f64], truth: &[f64]) -> ErrorSummary {
    let n = estimates.len().max(1) as f64;
    let errors: Vec<f64> = estimates.iter().zip(truth).map(|(e, t)| e - t).collect();
    let m = median(estimates);
    let abs_dev: Vec<f64> = estimates.iter().map(|e| (e - m).abs()).collect();
    ErrorSummary {
        bias: errors.iter().sum::<f64>() / n,
        mad: median(&abs_dev),
        mse: errors.iter().map(|e| e * e).sum::<f64>() / n,
    }
}

fn bias_replicate(model: SimModel, settings: &BiasSettings, r: usize, seed: Seed) -> Vec<BiasRecord> {
    let seed = seed.index(r as u64);
    let train = generate_model(model, settings.n_train, settings.censoring, seed.child("train"));
    let valid = generate_model(model, settings.n_valid, settings.censoring, seed.child("valid"));
    let fitted = match select(&train, Some(&valid), Criterion::TestSample, &settings.pipeline, seed.child("fit")) {
        Ok(f) => f,
        Err(e) => {
            log::warn!("bias replicate {r} failed: {e}");
            return Vec::new();
        }
    };
    let k = fitted.group_count();
    if k < 2 {
        return Vec::new();
    }
    let Ok(report) = bootstrap_bias_correct(&train, &fitted, &settings.pipeline, &settings.bbc, seed.child("bbc")) else {
        return Vec::new();
    };
    let truth_data = generate_model(model, settings.n_truth, settings.censoring, seed.child("truth"));
    let truth_rows: Vec<usize> = (0..truth_data.len()).collect();
    let Ok(truth) = group_summaries(&truth_data, &truth_rows, &fitted.groups(&truth_data), k) else {
        return Vec::new();
    };
    if truth.diverged {
        return Vec::new();
    }
    let root_truth = (settings.n_truth as f64).sqrt();
    report
        .groups
        .iter()
        .zip(&truth.rows)
        .skip(1)
        .map(|(g, t)| BiasRecord {
            replicate: r,
            group: g.group,
            beta: g.beta,
            corrected_beta: g.corrected_beta,
            truth_beta: t.beta,
            sd: g.sd.unwrap_or(f64::NAN),
            corrected_sd: g.corrected_sd.unwrap_or(f64::NAN),
            truth_sd: t.se.unwrap_or(f64::NAN) * root_truth,
        })
        .collect()
}

/// Raw versus bootstrap-corrected group estimates against large-sample truth.
pub fn run_bias_study(model: SimModel, settings: &BiasSettings, seed: Seed) -> BiasTable {
    let per_rep: Vec<Vec<BiasRecord>> =
        (0..settings.replicates).into_par_iter().map(|r| bias_replicate(model, settings, r, seed)).collect();
    let replicates = per_rep.iter().filter(|v| !v.is_empty()).count();
    let records: Vec<BiasRecord> = per_rep.into_iter().flatten().collect();
    let col = |f: fn(&BiasRecord) -> f64| records.iter().map(f).collect::<Vec<f64>>();
    let row = |name: &str, est: Vec<f64>, cor: Vec<f64>, truth: Vec<f64>| BiasRow {
        estimate: name.to_string(),
        truth_mean: truth.iter().sum::<f64>() / truth.len().max(1) as f64,
        uncorrected: error_summary(&est, &truth),
        corrected: error_summary(&cor, &truth),
    };
    let rows = vec![
        row("beta", col(|r| r.beta), col(|r| r.corrected_beta), col(|r| r.truth_beta)),
        row("sd", col(|r| r.sd), col(|r| r.corrected_sd), col(|r| r.truth_sd)),
    ];
    BiasTable { model, replicates, rows, records }
}

pub fn bias_csv(tables: &[BiasTable]) -> String {
    let mut out = String::from("model,estimate,truth_mean,bias,mad,mse,corrected_bias,corrected_mad,corrected_mse\n");
    for t in tables {
        for r in &t.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                t.model.name(),
                r.estimate,
                sig6(r.truth_mean),
                sig6(r.uncorrected.bias),
                sig6(r.uncorrected.mad),
                sig6(r.uncorrected.mse),
                sig6(r.corrected.bias),
                sig6(r.corrected.mad),
                sig6(r.corrected.mse),
            ));
        }
    }
    out
}

/// One row per non-reference group and replicate.
pub fn bias_records_csv(table: &BiasTable) -> String {
    let mut out = String::from("replicate,group,beta,corrected_beta,truth_beta,sd,corrected_sd,truth_sd\n");
    for r in &table.records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.replicate,
            r.group,
            sig6(r.beta),
            sig6(r.corrected_beta),
            sig6(r.truth_beta),
            sig6(r.sd),
            sig6(r.corrected_sd),
            sig6(r.truth_sd)
        ));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSettings {
    pub replicates: usize,
    pub n: usize,
    pub censoring: f64,
    pub beta1: f64,
    pub split: SplitConfig,
}

impl Default for CutoffSettings {
    fn default() -> Self {
        CutoffSettings {
            replicates: 200,
            n: 200,
            censoring: 0.5,
            beta1: -1.0,
            split: SplitConfig { min_child_size: 5, min_child_events: 1, ..SplitConfig::default() },
        }
    }
}

/// Estimated cutoffs per replicate (`NaN` when no admissible split).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffStudy {
    pub greedy: Vec<f64>,
    pub smooth: Vec<(f64, Vec<f64>)>,
}

pub const TRUE_CUTOFF: f64 = 0.5;

pub fn cutoff_mse(cutoffs: &[f64]) -> f64 {
    let ok: Vec<f64> = cutoffs.iter().copied().filter(|c| c.is_finite()).collect();
    ok.iter().map(|c| (c - TRUE_CUTOFF) * (c - TRUE_CUTOFF)).sum::<f64>() / ok.len().max(1) as f64
}

/// Fraction of cutoffs inside `[lo, hi]`.
pub fn fraction_within(cutoffs: &[f64], lo: f64, hi: f64) -> f64 {
    cutoffs.iter().filter(|&&c| (lo..=hi).contains(&c)).count() as f64 / cutoffs.len().max(1) as f64
}

/// Cutoff recovery of greedy and smooth search on a single-threshold model.
pub fn run_cutoff_study(settings: &CutoffSettings, shapes: &[f64], seed: Seed) -> CutoffStudy {
    let generator = Generator::Cutoff { beta1: settings.beta1 };
    let per_rep: Vec<(f64, Vec<f64>)> = (0..settings.replicates)
        .into_par_iter()
        .map(|r| {
            let data = generate(&generator, settings.n, settings.censoring, seed.index(r as u64));
            let rows: Vec<usize> = (0..data.len()).collect();
            let node = NodeData::new(&data, &rows);
            let cut = |res: Option<survfuse::split::SplitResult>| res.and_then(|s| s.spec.cutoff()).unwrap_or(f64::NAN);
            let g = cut(greedy_search(&node, 0, &settings.split));
            let s = shapes.iter().map(|&a| cut(sss_search(&node, 0, &SplitConfig { shape: a, ..settings.split }))).collect();
            (g, s)
        })
        .collect();
    let greedy = per_rep.iter().map(|(g, _)| *g).collect();
    let smooth = shapes.iter().enumerate().map(|(k, &a)| (a, per_rep.iter().map(|(_, s)| s[k]).collect())).collect();
    CutoffStudy { greedy, smooth }
}

pub fn cutoff_csv(study: &CutoffStudy) -> String {
    let mut out = String::from("method,shape,mse,within_0.3_0.7\n");
    out.push_str(&format!("greedy,,{},{}\n", sig6(cutoff_mse(&study.greedy)), sig6(fraction_within(&study.greedy, 0.3, 0.7))));
    for (a, c) in &study.smooth {
        out.push_str(&format!("smooth,{},{},{}\n", sig6(*a), sig6(cutoff_mse(c)), sig6(fraction_within(c, 0.3, 0.7))));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionSettings {
    pub replicates: usize,
    pub n: usize,
    pub censoring: f64,
    pub betas: [f64; 5],
    pub split: SplitConfig,
}

impl Default for SelectionSettings {
    fn default() -> Self {
        SelectionSettings { replicates: 500, n: 200, censoring: 0.5, betas: [0.0; 5], split: SplitConfig::default() }
    }
}

/// Root-split selection frequency of each of the five covariates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionFrequencies {
    pub greedy: [f64; 5],
    pub iv: [f64; 5],
}

impl SelectionFrequencies {
    pub fn gap(freq: &[f64; 5]) -> f64 {
        let max = freq.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = freq.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    }
}

/// Which covariate wins the root split under plain greedy search and under
/// intersected validation.
pub fn run_selection_study(settings: &SelectionSettings, seed: Seed) -> SelectionFrequencies {
    let generator = Generator::Selection { betas: settings.betas };
    let greedy_cfg = SplitConfig { method: SplitMethod::Greedy, ..settings.split };
    let picks: Vec<(Option<usize>, Option<usize>)> = (0..settings.replicates)
        .into_par_iter()
        .map(|r| {
            let seed = seed.index(r as u64);
            let data = generate(&generator, settings.n, settings.censoring, seed.child("data"));
            let rows: Vec<usize> = (0..data.len()).collect();
            let g = best_split(&NodeData::new(&data, &rows), &greedy_cfg).map(|s| s.spec.variable);
            let v = iv_split(&data, &rows, &settings.split, seed.child("iv")).map(|s| s.spec.variable);
            (g, v)
        })
        .collect();
    let mut greedy = [0.0; 5];
    let mut iv = [0.0; 5];
    let total = settings.replicates.max(1) as f64;
    for (g, v) in picks {
        if let Some(j) = g {
            greedy[j] += 1.0 / total;
        }
        if let Some(j) = v {
            iv[j] += 1.0 / total;
        }
    }
    SelectionFrequencies { greedy, iv }
}

pub fn selection_csv(label: &str, f: &SelectionFrequencies) -> String {
    let mut out = String::from("scenario,method,z1,z2,z3,z4,z5\n");
    for (name, v) in [("greedy", &f.greedy), ("iv", &f.iv)] {
        let cells: Vec<String> = v.iter().map(|x| sig6(*x)).collect();
        out.push_str(&format!("{label},{name},{}\n", cells.join(",")));
    }
    out
}

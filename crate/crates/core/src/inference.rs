//! Group summaries of a fitted model and their bootstrap bias correction.
//!
//! Bootstrap trees rarely reproduce the final grouping, so the optimism
//! measured on each bootstrap tree is transported to the final groups
//! through the row-normalized contingency table of the two groupings.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::dataset::{stratified_bootstrap_in, SurvivalDataset};
use crate::error::{Error, Result};
use crate::fusion::fusion_path;
use crate::iv::SplitMode;
use crate::rng::Seed;
use crate::select::{sig6, FittedModel, PipelineConfig};
use crate::survival::{cox_fit, expand_coefficients, indicator_design, CoxFit};
use crate::tree::{grow, TreeConfig};

fn std_normal() -> Normal {
    Normal::standard()
}

fn two_sided_p(z: f64) -> f64 {
    2.0 * (1.0 - std_normal().cdf(z.abs()))
}

fn normal_quantile(level: f64) -> f64 {
    std_normal().inverse_cdf(0.5 + level / 2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRow {
    pub group: usize,
    pub n: usize,
    pub events: usize,
    pub beta: f64,
    pub hazard_ratio: f64,
    /// Absent for the reference group.
    pub se: Option<f64>,
    pub z: Option<f64>,
    pub p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub rows: Vec<GroupRow>,
    pub converged: bool,
    pub diverged: bool,
}

/// Cox fit on group indicators (labels `1..=k`, group 1 the reference).
fn group_fit(data: &SurvivalDataset, rows: &[usize], labels: &[usize], k: usize) -> Result<Option<CoxFit>> {
    if k < 2 {
        return Ok(None);
    }
    let zero_based: Vec<usize> = labels.iter().map(|&g| g - 1).collect();
    let (times, events) = data.outcome(rows);
    cox_fit(&indicator_design(&zero_based, k, 0), &times, &events).map(Some)
}

/// Log hazard ratios of groups `1..=k` relative to group 1, fitted on
/// `rows` of `data` whose group labels are `labels`.
pub fn group_summaries(data: &SurvivalDataset, rows: &[usize], labels: &[usize], k: usize) -> Result<GroupSummary> {
    let fit = group_fit(data, rows, labels, k)?;
    let mut n = vec![0; k];
    let mut ev = vec![0; k];
    for (&i, &g) in rows.iter().zip(labels) {
        n[g - 1] += 1;
        ev[g - 1] += usize::from(data.event(i));
    }
    let (beta, se) = match &fit {
        Some(f) => (expand_coefficients(&f.coefficients, k, 0), f.std_errors()),
        None => (vec![0.0], vec![]),
    };
    let rows = (0..k)
        .map(|g| {
            let se_g = (g > 0).then(|| se[g - 1]);
            let z = se_g.map(|s| if s > 0.0 { beta[g] / s } else { f64::NAN });
            GroupRow {
                group: g + 1,
                n: n[g],
                events: ev[g],
                beta: beta[g],
                hazard_ratio: beta[g].exp(),
                se: se_g,
                z,
                p: z.map(two_sided_p),
            }
        })
        .collect();
    Ok(GroupSummary {
        rows,
        converged: fit.as_ref().is_none_or(|f| f.converged),
        diverged: fit.as_ref().is_some_and(|f| f.diverged),
    })
}

/// Group summaries of a fitted model on its training data.
pub fn summarize_model(model: &FittedModel, data: &SurvivalDataset) -> Result<GroupSummary> {
    let rows: Vec<usize> = (0..data.len()).collect();
    group_summaries(data, &rows, &model.groups(data), model.group_count())
}

/// How the averaged bootstrap difference is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasSign {
    /// Estimate minus the averaged bootstrap difference.
    #[default]
    Subtract,
    /// Estimate plus the averaged bootstrap difference.
    Add,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BbcConfig {
    pub replicates: usize,
    pub sign: BiasSign,
    /// At most `max_draw_factor · replicates` resamples are attempted.
    pub max_draw_factor: usize,
}

impl Default for BbcConfig {
    fn default() -> Self {
        BbcConfig { replicates: 25, sign: BiasSign::Subtract, max_draw_factor: 3 }
    }
}

/// One accepted bootstrap replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapDraw {
    pub attempt: usize,
    pub groups: usize,
    /// Final-group by bootstrap-group row counts over the original data.
    pub table: Vec<Vec<usize>>,
    /// Per bootstrap group: estimate on the resample minus estimate on the
    /// original data, for coefficients and for √n-scaled SDs.
    pub tau_beta: Vec<f64>,
    pub tau_sd: Vec<f64>,
}

impl BootstrapDraw {
    /// Row-normalized table applied to `tau`.
    pub fn transported(&self, tau: &[f64]) -> Vec<f64> {
        self.table
            .iter()
            .map(|row| {
                let total: usize = row.iter().sum();
                if total == 0 {
                    return 0.0;
                }
                row.iter().zip(tau).map(|(&c, &t)| c as f64 / total as f64 * t).sum()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BbcGroup {
    pub group: usize,
    pub beta: f64,
    pub beta_bias: f64,
    pub corrected_beta: f64,
    pub sd: Option<f64>,
    pub sd_bias: f64,
    pub corrected_sd: Option<f64>,
    pub se: Option<f64>,
    pub corrected_se: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BbcReport {
    pub sign: BiasSign,
    pub replicates: usize,
    pub attempts: usize,
    pub n: usize,
    pub groups: Vec<BbcGroup>,
    pub draws: Vec<BootstrapDraw>,
}

fn bootstrap_attempt(
    data: &SurvivalDataset,
    final_labels: &[usize],
    k_final: usize,
    depth: usize,
    pipeline: &PipelineConfig,
    attempt: usize,
    seed: Seed,
) -> Option<BootstrapDraw> {
    let n = data.len();
    let all: Vec<usize> = (0..n).collect();
    let sample = stratified_bootstrap_in(data, &all, n, &mut seed.child("resample").rng()).ok()?.0;
    let tree_config = TreeConfig { max_depth: depth, mode: SplitMode::Plain, ..pipeline.tree };
    let tree = grow(data, &sample, &tree_config, seed.child("grow"));
    let path = fusion_path(&tree, data, &sample, &pipeline.fusion).ok()?;
    let k_b = path.patterns.iter().map(|p| p.group_count).filter(|&k| k >= k_final).min()?;
    let pattern = path.patterns.iter().rev().find(|p| p.group_count == k_b)?;

    let boot_labels = pattern.groups(&tree, data, &sample);
    let orig_labels = pattern.groups(&tree, data, &all);
    let on_boot = group_fit(data, &sample, &boot_labels, k_b).ok()??;
    let on_orig = group_fit(data, &all, &orig_labels, k_b).ok()??;
    if on_boot.diverged || on_orig.diverged {
        return None;
    }
    let beta_b = expand_coefficients(&on_boot.coefficients, k_b, 0);
    let beta_o = expand_coefficients(&on_orig.coefficients, k_b, 0);
    let root_n = (n as f64).sqrt();
    let sd_b = expand_coefficients(&on_boot.std_errors(), k_b, 0);
    let sd_o = expand_coefficients(&on_orig.std_errors(), k_b, 0);
    let tau_beta = beta_b.iter().zip(&beta_o).map(|(b, o)| b - o).collect();
    let tau_sd = sd_b.iter().zip(&sd_o).map(|(b, o)| root_n * (b - o)).collect();
    let mut table = vec![vec![0usize; k_b]; k_final];
    for (&g, &gb) in final_labels.iter().zip(&orig_labels) {
        table[g - 1][gb - 1] += 1;
    }
    Some(BootstrapDraw { attempt, groups: k_b, table, tau_beta, tau_sd })
}

/// Bootstrap bias correction of the group log hazard ratios and their SDs.
///
/// Each replicate grows a plain tree of the final tree's depth on a
/// stratified resample and fuses it to the final group count, or the
/// smallest larger count available; replicates without such a pattern are
/// redrawn.
pub fn bootstrap_bias_correct(
    data: &SurvivalDataset,
    model: &FittedModel,
    pipeline: &PipelineConfig,
    config: &BbcConfig,
    seed: Seed,
) -> Result<BbcReport> {
    if config.replicates == 0 {
        return Err(Error::InvalidArgument("bootstrap replicates must be at least 1".into()));
    }
    let n = data.len();
    let k = model.group_count();
    let labels = model.groups(data);
    let summary = summarize_model(model, data)?;
    let depth = model.tree.depth();
    let root_n = (n as f64).sqrt();

    let mut draws: Vec<BootstrapDraw> = Vec::new();
    let mut attempts = 0;
    let max_attempts = config.replicates * config.max_draw_factor.max(1);
    if k > 1 {
        while draws.len() < config.replicates && attempts < max_attempts {
            let batch = (config.replicates - draws.len()).min(max_attempts - attempts);
            let got: Vec<Option<BootstrapDraw>> = (attempts..attempts + batch)
                .into_par_iter()
                .map(|a| bootstrap_attempt(data, &labels, k, depth, pipeline, a, seed.index(a as u64)))
                .collect();
            attempts += batch;
            draws.extend(got.into_iter().flatten());
        }
        if draws.is_empty() {
            return Err(Error::Numerical("no bootstrap replicate produced a usable grouping".into()));
        }
    }

    let mut beta_bias = vec![0.0; k];
    let mut sd_bias = vec![0.0; k];
    for d in &draws {
        for (acc, v) in beta_bias.iter_mut().zip(d.transported(&d.tau_beta)) {
            *acc += v;
        }
        for (acc, v) in sd_bias.iter_mut().zip(d.transported(&d.tau_sd)) {
            *acc += v;
        }
    }
    let b = draws.len().max(1) as f64;
    let sign = match config.sign {
        BiasSign::Subtract => -1.0,
        BiasSign::Add => 1.0,
    };
    let groups = summary
        .rows
        .iter()
        .enumerate()
        .map(|(g, row)| {
            let (bb, sb) = (beta_bias[g] / b, sd_bias[g] / b);
            let sd = row.se.map(|s| s * root_n);
            let corrected_sd = sd.map(|s| (s + sign * sb).max(0.0));
            BbcGroup {
                group: row.group,
                beta: row.beta,
                beta_bias: bb,
                // the reference group stays at zero by construction
                corrected_beta: if g == 0 { 0.0 } else { row.beta + sign * bb },
                sd,
                sd_bias: sb,
                corrected_sd,
                se: row.se,
                corrected_se: corrected_sd.map(|s| s / root_n),
            }
        })
        .collect();
    Ok(BbcReport { sign: config.sign, replicates: draws.len(), attempts, n, groups, draws })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub group: usize,
    pub lower: f64,
    pub upper: f64,
    pub hr_lower: f64,
    pub hr_upper: f64,
}

/// Normal intervals around the corrected coefficients; the reference group
/// gets the point interval at zero.
pub fn confidence_intervals(report: &BbcReport, level: f64) -> Vec<ConfidenceInterval> {
    let q = normal_quantile(level);
    report
        .groups
        .iter()
        .map(|g| {
            let half = g.corrected_se.unwrap_or(0.0) * q;
            let (lower, upper) = (g.corrected_beta - half, g.corrected_beta + half);
            ConfidenceInterval { group: g.group, lower, upper, hr_lower: lower.exp(), hr_upper: upper.exp() }
        })
        .collect()
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, sig6)
}

/// Raw and corrected estimates side by side, one row per group.
pub fn group_table_csv(report: &BbcReport, level: f64) -> String {
    let cis = confidence_intervals(report, level);
    let mut out = String::from("group,beta,hr,se,z,p,corrected_beta,corrected_hr,corrected_se,corrected_z,corrected_p,ci_lower,ci_upper\n");
    for (g, ci) in report.groups.iter().zip(&cis) {
        let z = g.se.and_then(|s| (s > 0.0).then(|| g.beta / s));
        let cz = g.corrected_se.and_then(|s| (s > 0.0).then(|| g.corrected_beta / s));
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            g.group,
            sig6(g.beta),
            sig6(g.beta.exp()),
            opt(g.se),
            opt(z),
            opt(z.map(two_sided_p)),
            sig6(g.corrected_beta),
            sig6(g.corrected_beta.exp()),
            opt(g.corrected_se),
            opt(cz),
            opt(cz.map(two_sided_p)),
            sig6(ci.lower),
            sig6(ci.upper),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_helpers() {
        assert!((normal_quantile(0.95) - 1.959964).abs() < 1e-5);
        assert!((two_sided_p(0.0) - 1.0).abs() < 1e-12);
        assert!((two_sided_p(1.959964) - 0.05).abs() < 1e-6);
    }

    #[test]
    fn identity_table_transports_unchanged() {
        let d = BootstrapDraw { attempt: 0, groups: 2, table: vec![vec![5, 0], vec![0, 7]], tau_beta: vec![0.0, 0.4], tau_sd: vec![0.0, 1.0] };
        assert_eq!(d.transported(&d.tau_beta), vec![0.0, 0.4]);
        let mixed = BootstrapDraw { table: vec![vec![3, 1], vec![1, 3]], ..d };
        assert_eq!(mixed.transported(&mixed.tau_beta), vec![0.1, 0.30000000000000004]);
    }
}

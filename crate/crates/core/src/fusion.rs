//! Leaf fusion: leaves are sorted by their Cox log-hazard, the chain of
//! consecutive differences is penalized with adaptive weights, and each
//! distinct fusion pattern along the lasso path becomes a candidate grouping
//! with its own relaxed refit and baseline hazard.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::SurvivalDataset;
use crate::error::{Error, Result};
use crate::linalg::{spd_solve, Matrix};
use crate::survival::{
    breslow_from_linear_predictor, cox_fit_with, deviance, expand_coefficients, indicator_design, kaplan_meier,
    BaselineHazard, CoxOptions, RiskSets,
};
use crate::tree::{Tree, TreeNode};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    pub n_lambda: usize,
    pub lambda_min_ratio: f64,
    pub kkt_tol: f64,
    /// Transformed coefficients below this magnitude count as fused.
    pub zero_tol: f64,
    /// Order leaves by Kaplan–Meier median survival instead of the Cox fit.
    pub sort_by_median: bool,
    /// Shrink the tree to this depth before fusing.
    pub truncate_depth: Option<usize>,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            n_lambda: 100,
            lambda_min_ratio: 1e-3,
            kkt_tol: 1e-6,
            zero_tol: 1e-8,
            sort_by_median: false,
            truncate_depth: None,
        }
    }
}

/// Leaves sorted by fitted log-hazard and collected into units: leaves whose
/// coefficients are exactly tied, and leaves without events, share a unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafOrdering {
    /// All leaf ids, ascending.
    pub leaves: Vec<u64>,
    /// Unit index of each entry of `leaves`.
    pub unit_of_leaf: Vec<usize>,
    /// Leaf ids per unit, units in sorted order.
    pub units: Vec<Vec<u64>>,
    /// Maximum partial likelihood estimate per unit, zero at the first.
    pub mple: Vec<f64>,
    pub converged: bool,
}

impl LeafOrdering {
    pub fn n_units(&self) -> usize {
        self.units.len()
    }

    fn unit_labels(&self, tree: &Tree, data: &SurvivalDataset, rows: &[usize]) -> Vec<usize> {
        tree.leaf_positions(data, rows).into_iter().map(|p| self.unit_of_leaf[p]).collect()
    }
}

fn crude_rate(events: usize, exposure: f64) -> f64 {
    events as f64 / exposure.max(f64::MIN_POSITIVE)
}

pub fn sort_leaves(tree: &Tree, data: &SurvivalDataset, rows: &[usize], config: &FusionConfig) -> Result<LeafOrdering> {
    let leaves = tree.leaves();
    let k = leaves.len();
    let positions = tree.leaf_positions(data, rows);
    let (times, events) = data.outcome(rows);
    if !events.iter().any(|&e| e) {
        return Err(Error::NoEvents);
    }
    let mut leaf_events = vec![0usize; k];
    let mut exposure = vec![0.0; k];
    for ((&p, &t), &e) in positions.iter().zip(&times).zip(&events) {
        leaf_events[p] += usize::from(e);
        exposure[p] += t;
    }
    // Leaves without events have no finite coefficient; they join the
    // eventful leaf with the lowest crude event rate.
    let eventful: Vec<usize> = (0..k).filter(|&p| leaf_events[p] > 0).collect();
    let sink = *eventful
        .iter()
        .min_by(|&&a, &&b| crude_rate(leaf_events[a], exposure[a]).total_cmp(&crude_rate(leaf_events[b], exposure[b])))
        .expect("at least one leaf has events");
    let mut first_unit: Vec<usize> = vec![0; k];
    for (u, &p) in eventful.iter().enumerate() {
        first_unit[p] = u;
    }
    for p in 0..k {
        if leaf_events[p] == 0 {
            first_unit[p] = first_unit[sink];
        }
    }
    let n0 = eventful.len();
    let labels: Vec<usize> = positions.iter().map(|&p| first_unit[p]).collect();
    let sets = RiskSets::new(&times, &events);
    let (beta, converged) = if n0 > 1 {
        let fit = cox_fit_with(&indicator_design(&labels, n0, 0), &sets, &CoxOptions::default())?;
        (expand_coefficients(&fit.coefficients, n0, 0), fit.converged)
    } else {
        (vec![0.0], true)
    };

    let mut order: Vec<usize> = (0..n0).collect();
    if config.sort_by_median {
        let medians: Vec<f64> = (0..n0)
            .map(|u| {
                let (t, e): (Vec<f64>, Vec<bool>) =
                    labels.iter().zip(times.iter().zip(&events)).filter(|(&l, _)| l == u).map(|(_, (&t, &e))| (t, e)).unzip();
                kaplan_meier(&t, &e).median().unwrap_or(f64::INFINITY)
            })
            .collect();
        order.sort_by(|&a, &b| medians[b].total_cmp(&medians[a]).then(beta[a].total_cmp(&beta[b])).then(a.cmp(&b)));
    } else {
        // eventful units are numbered in leaf-id order, so index breaks ties by id
        order.sort_by(|&a, &b| beta[a].total_cmp(&beta[b]).then(a.cmp(&b)));
    }
    let base = beta[order[0]];
    let mut unit_of_initial = vec![0usize; n0];
    let mut mple = vec![0.0];
    let mut prev = 0.0;
    for (rank, &u) in order.iter().enumerate() {
        let b = beta[u] - base;
        if rank > 0 && (b - prev).abs() >= 1e-8 {
            mple.push(b);
        }
        prev = b;
        unit_of_initial[u] = mple.len() - 1;
    }
    let unit_of_leaf: Vec<usize> = (0..k).map(|p| unit_of_initial[first_unit[p]]).collect();
    let mut units = vec![Vec::new(); mple.len()];
    for (p, &u) in unit_of_leaf.iter().enumerate() {
        units[u].push(leaves[p]);
    }
    Ok(LeafOrdering { leaves, unit_of_leaf, units, mple, converged })
}

/// Adaptive weights of the chain penalty and the maps between leaf
/// coefficients `β` (units after the reference) and transformed
/// coefficients `γ = W B β`, where `B` takes consecutive differences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionTransform {
    pub weights: Vec<f64>,
}

impl FusionTransform {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Difference matrix: ones on the diagonal, minus ones just below.
    pub fn b(&self) -> Matrix {
        let p = self.dim();
        Matrix::from_fn(p, p, |i, j| if i == j { 1.0 } else if i == j + 1 { -1.0 } else { 0.0 })
    }

    /// Inverse of [`FusionTransform::b`]: lower-triangular ones.
    pub fn b_inv(&self) -> Matrix {
        let p = self.dim();
        Matrix::from_fn(p, p, |i, j| if j <= i { 1.0 } else { 0.0 })
    }

    pub fn w(&self) -> Matrix {
        Matrix::diag(&self.weights)
    }

    pub fn w_inv(&self) -> Matrix {
        Matrix::diag(&self.weights.iter().map(|w| 1.0 / w).collect::<Vec<_>>())
    }

    pub fn gamma_from_beta(&self, beta: &[f64]) -> Vec<f64> {
        let mut prev = 0.0;
        beta.iter()
            .zip(&self.weights)
            .map(|(&b, &w)| {
                let g = w * (b - prev);
                prev = b;
                g
            })
            .collect()
    }

    pub fn beta_from_gamma(&self, gamma: &[f64]) -> Vec<f64> {
        let mut acc = 0.0;
        gamma
            .iter()
            .zip(&self.weights)
            .map(|(&g, &w)| {
                acc += g / w;
                acc
            })
            .collect()
    }

    /// Rows of `X B⁻¹ W⁻¹` for records in the given units: unit `u` maps to
    /// `(1/w₁, …, 1/w_u, 0, …)` and the reference unit to zeros.
    pub fn design(&self, unit_labels: &[usize]) -> Matrix {
        let p = self.dim();
        let mut x = Matrix::zeros(unit_labels.len(), p);
        for (i, &u) in unit_labels.iter().enumerate() {
            for j in 0..u.min(p) {
                x[(i, j)] = 1.0 / self.weights[j];
            }
        }
        x
    }
}

pub fn build_transform(ordering: &LeafOrdering) -> FusionTransform {
    let weights = ordering.mple.windows(2).map(|w| 1.0 / (w[1] - w[0]).abs()).collect();
    FusionTransform { weights }
}

fn scaled_gradient(grad: &[f64], n: f64) -> Vec<f64> {
    grad.iter().map(|g| -2.0 / n * g).collect()
}

/// Smallest penalty at which the all-zero solution satisfies the
/// optimality conditions of `−(2/n) L(γ) + λ‖γ‖₁`.
pub fn lambda_max(x: &Matrix, sets: &RiskSets) -> f64 {
    let eval = sets.evaluate(x, &vec![0.0; x.cols()]);
    scaled_gradient(&eval.gradient, sets.len() as f64).iter().fold(0.0, |m, g| m.max(g.abs()))
}

/// `n` log-spaced penalties from `lmax` down to `lmax · ratio`, then zero.
pub fn lambda_grid(lmax: f64, n: usize, ratio: f64) -> Vec<f64> {
    let mut grid: Vec<f64> = if lmax > 0.0 && n > 0 {
        (0..n)
            .map(|i| {
                let f = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
                lmax * ratio.powf(f)
            })
            .collect()
    } else {
        Vec::new()
    };
    grid.push(0.0);
    grid
}

fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

fn kkt_ok(grad: &[f64], gamma: &[f64], lambda: f64, tol: f64) -> bool {
    grad.iter().zip(gamma).all(|(&g, &b)| if b != 0.0 { (g + lambda * b.signum()).abs() <= tol } else { g.abs() <= lambda + tol })
}

/// Penalized Cox fit by proximal Newton steps with a coordinate-descent
/// inner solver. Returns `None` when the optimality conditions are not met.
pub fn cox_lasso(x: &Matrix, sets: &RiskSets, lambda: f64, start: &[f64], kkt_tol: f64) -> Option<Vec<f64>> {
    let p = x.cols();
    let n = sets.len() as f64;
    let l1 = |v: &[f64]| v.iter().map(|b| b.abs()).sum::<f64>();
    let objective = |v: &[f64]| -2.0 / n * sets.loglik(x, v) + lambda * l1(v);
    let mut gamma = start.to_vec();
    let mut f = objective(&gamma);
    for _ in 0..200 {
        let eval = sets.evaluate(x, &gamma);
        let grad = scaled_gradient(&eval.gradient, n);
        if kkt_ok(&grad, &gamma, lambda, kkt_tol) {
            return Some(gamma);
        }
        let h = Matrix::from_fn(p, p, |i, j| 2.0 / n * eval.information[(i, j)]);
        let target = if lambda == 0.0 {
            let step = spd_solve(&h, &grad);
            gamma.iter().zip(&step).map(|(g, s)| g - s).collect()
        } else {
            let mut u = gamma.clone();
            for _ in 0..10_000 {
                let mut change = 0.0f64;
                for j in 0..p {
                    let hjj = h[(j, j)];
                    if !(hjj > 0.0) {
                        continue;
                    }
                    let mut r = grad[j];
                    for k in 0..p {
                        if k != j {
                            r += h[(j, k)] * (u[k] - gamma[k]);
                        }
                    }
                    r -= hjj * gamma[j];
                    let next = soft_threshold(-r, lambda) / hjj;
                    change = change.max((next - u[j]).abs());
                    u[j] = next;
                }
                if change < 1e-14 {
                    break;
                }
            }
            u
        };
        let d: Vec<f64> = target.iter().zip(&gamma).map(|(t, g)| t - g).collect();
        let decrease = grad.iter().zip(&d).map(|(g, s)| g * s).sum::<f64>() + lambda * (l1(&target) - l1(&gamma));
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..40 {
            let trial: Vec<f64> = if t == 1.0 { target.clone() } else { gamma.iter().zip(&d).map(|(g, s)| g + t * s).collect() };
            let ft = objective(&trial);
            if ft <= f + 1e-4 * t * decrease.min(0.0) {
                moved = ft < f || trial != gamma;
                gamma = trial;
                f = ft;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            let eval = sets.evaluate(x, &gamma);
            let grad = scaled_gradient(&eval.gradient, n);
            return kkt_ok(&grad, &gamma, lambda, kkt_tol).then_some(gamma);
        }
    }
    None
}

/// Solutions along a descending penalty grid with warm starts; entries
/// that fail the optimality check are `None`.
pub fn cox_lasso_path(x: &Matrix, times: &[f64], events: &[bool], grid: &[f64], kkt_tol: f64) -> Vec<Option<Vec<f64>>> {
    let sets = RiskSets::new(times, events);
    let mut warm = vec![0.0; x.cols()];
    grid.iter()
        .map(|&lambda| {
            let sol = cox_lasso(x, &sets, lambda, &warm, kkt_tol);
            if let Some(s) = &sol {
                warm = s.clone();
            } else {
                log::warn!("lasso path point at lambda {lambda:e} did not converge; dropped");
            }
            sol
        })
        .collect()
}

/// One distinct fusion pattern with its relaxed refit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pattern {
    /// Smallest penalty on the grid producing this pattern.
    pub lambda: f64,
    pub group_count: usize,
    /// Group (1-based, ascending hazard) of every leaf.
    pub leaf_to_group: BTreeMap<u64, usize>,
    /// Relaxed log-hazard per group; group 1 is zero.
    pub relaxed_betas: Vec<f64>,
    pub baseline: BaselineHazard,
    pub converged: bool,
}

impl Pattern {
    pub fn group_of_leaf(&self, leaf: u64) -> usize {
        self.leaf_to_group[&leaf]
    }

    /// Group of each row after routing through `tree`.
    pub fn groups(&self, tree: &Tree, data: &SurvivalDataset, rows: &[usize]) -> Vec<usize> {
        rows.iter().map(|&i| self.group_of_leaf(tree.route_row(data, i))).collect()
    }

    pub fn linear_predictor(&self, tree: &Tree, data: &SurvivalDataset, rows: &[usize]) -> Vec<f64> {
        self.groups(tree, data, rows).into_iter().map(|g| self.relaxed_betas[g - 1]).collect()
    }

    /// Validated deviance of `rows` of `data` under this pattern.
    pub fn deviance(&self, tree: &Tree, data: &SurvivalDataset, rows: &[usize]) -> f64 {
        let eta = self.linear_predictor(tree, data, rows);
        let (times, events) = data.outcome(rows);
        deviance(&self.baseline, &eta, &times, &events)
    }
}

/// One grid point of the path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub lambda: f64,
    pub gamma: Vec<f64>,
    /// `B⁻¹ W⁻¹ γ`: coefficient of each unit after the reference.
    pub beta: Vec<f64>,
    /// Index into [`FusionPath::patterns`].
    pub pattern: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionPath {
    pub ordering: LeafOrdering,
    pub transform: FusionTransform,
    pub lambda_max: f64,
    /// The path was forced onto a grid whose top lies below its own `λ_max`.
    pub clamped: bool,
    pub points: Vec<PathPoint>,
    /// Distinct patterns, by increasing penalty.
    pub patterns: Vec<Pattern>,
}

impl FusionPath {
    /// Pattern at the grid point nearest to `lambda`.
    pub fn pattern_at(&self, lambda: f64) -> &Pattern {
        let point = self
            .points
            .iter()
            .min_by(|a, b| (a.lambda - lambda).abs().total_cmp(&(b.lambda - lambda).abs()))
            .expect("path has at least one point");
        &self.patterns[point.pattern]
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.lambda).collect()
    }
}

/// Fusion pattern of a transformed solution: unit `k` joins unit `k − 1`
/// when its entry of `γ` vanishes. Returns a run label per unit.
fn runs(gamma: &[f64], zero_tol: f64) -> Vec<usize> {
    let mut labels = vec![0];
    for &g in gamma {
        let last = *labels.last().expect("non-empty");
        labels.push(if g.abs() < zero_tol { last } else { last + 1 });
    }
    labels
}

fn relaxed_fit(
    ordering: &LeafOrdering,
    unit_runs: &[usize],
    unit_labels: &[usize],
    sets: &RiskSets,
    times: &[f64],
    events: &[bool],
    lambda: f64,
) -> Result<Pattern> {
    let n_runs = unit_runs.last().map_or(1, |&r| r + 1);
    let labels: Vec<usize> = unit_labels.iter().map(|&u| unit_runs[u]).collect();
    let (beta, converged) = if n_runs > 1 {
        let fit = cox_fit_with(&indicator_design(&labels, n_runs, 0), sets, &CoxOptions::default())?;
        (expand_coefficients(&fit.coefficients, n_runs, 0), fit.converged)
    } else {
        (vec![0.0], true)
    };
    let mut order: Vec<usize> = (0..n_runs).collect();
    order.sort_by(|&a, &b| beta[a].total_cmp(&beta[b]).then(a.cmp(&b)));
    let base = beta[order[0]];
    let mut group_of_run = vec![0usize; n_runs];
    let mut relaxed_betas = Vec::with_capacity(n_runs);
    for (g, &r) in order.iter().enumerate() {
        group_of_run[r] = g + 1;
        relaxed_betas.push(beta[r] - base);
    }
    let leaf_to_group = ordering
        .leaves
        .iter()
        .zip(&ordering.unit_of_leaf)
        .map(|(&leaf, &u)| (leaf, group_of_run[unit_runs[u]]))
        .collect();
    let eta: Vec<f64> = labels.iter().map(|&r| relaxed_betas[group_of_run[r] - 1]).collect();
    let baseline = breslow_from_linear_predictor(&eta, times, events);
    Ok(Pattern { lambda, group_count: n_runs, leaf_to_group, relaxed_betas, baseline, converged })
}

/// The tree fusion starts from: `tree` itself, or its truncation when a
/// two-step depth is configured.
pub fn fusion_start(tree: Tree, config: &FusionConfig) -> Tree {
    match config.truncate_depth {
        Some(d) if d < tree.depth() => tree.truncated(d),
        _ => tree,
    }
}

/// Fusion path of `tree` fitted on `rows` of `data`, on its own penalty grid.
pub fn fusion_path(tree: &Tree, data: &SurvivalDataset, rows: &[usize], config: &FusionConfig) -> Result<FusionPath> {
    fusion_path_on_grid(tree, data, rows, config, None)
}

/// Fusion path on a given descending penalty grid (ending at zero), or on
/// the path's own grid when `grid` is `None`.
pub fn fusion_path_on_grid(
    tree: &Tree,
    data: &SurvivalDataset,
    rows: &[usize],
    config: &FusionConfig,
    grid: Option<&[f64]>,
) -> Result<FusionPath> {
    let ordering = sort_leaves(tree, data, rows, config)?;
    let transform = build_transform(&ordering);
    let unit_labels = ordering.unit_labels(tree, data, rows);
    let (times, events) = data.outcome(rows);
    let sets = RiskSets::new(&times, &events);
    let x = transform.design(&unit_labels);
    let lmax = if transform.dim() > 0 { lambda_max(&x, &sets) } else { 0.0 };
    let own_grid;
    let grid = match grid {
        Some(g) => g,
        None => {
            own_grid = lambda_grid(lmax, config.n_lambda, config.lambda_min_ratio);
            &own_grid
        }
    };
    let clamped = grid.first().is_some_and(|&top| lmax > top * (1.0 + 1e-12));

    let solutions: Vec<Option<Vec<f64>>> = if transform.dim() == 0 {
        grid.iter().map(|_| Some(Vec::new())).collect()
    } else {
        cox_lasso_path(&x, &times, &events, grid, config.kkt_tol)
    };

    let mut pattern_keys: Vec<Vec<usize>> = Vec::new();
    let mut patterns: Vec<Pattern> = Vec::new();
    let mut points = Vec::new();
    for (&lambda, sol) in grid.iter().zip(solutions) {
        let Some(gamma) = sol else { continue };
        let key = runs(&gamma, config.zero_tol);
        let idx = match pattern_keys.iter().position(|k| *k == key) {
            Some(i) => {
                // grid descends, so later points carry smaller penalties
                patterns[i].lambda = lambda;
                i
            }
            None => {
                patterns.push(relaxed_fit(&ordering, &key, &unit_labels, &sets, &times, &events, lambda)?);
                pattern_keys.push(key);
                patterns.len() - 1
            }
        };
        let beta = transform.beta_from_gamma(&gamma);
        points.push(PathPoint { lambda, gamma, beta, pattern: idx });
    }
    if points.is_empty() {
        return Err(Error::Numerical("no point of the fusion path converged".into()));
    }
    // order patterns by increasing penalty and renumber references
    let mut order: Vec<usize> = (0..patterns.len()).collect();
    order.sort_by(|&a, &b| patterns[a].lambda.total_cmp(&patterns[b].lambda).then(patterns[b].group_count.cmp(&patterns[a].group_count)));
    let mut new_index = vec![0; patterns.len()];
    for (new, &old) in order.iter().enumerate() {
        new_index[old] = new;
    }
    for p in &mut points {
        p.pattern = new_index[p.pattern];
    }
    let mut slots: Vec<Option<Pattern>> = patterns.into_iter().map(Some).collect();
    let patterns = order.iter().map(|&o| slots[o].take().expect("each pattern used once")).collect();
    Ok(FusionPath { ordering, transform, lambda_max: lmax, clamped, points, patterns })
}

/// Collapse every subtree whose leaves all share one group; surviving
/// leaves carry their group id.
pub fn shear(tree: &Tree, leaf_to_group: &BTreeMap<u64, usize>) -> Tree {
    // group shared by all leaves below each node, if any
    fn common(tree: &Tree, id: u64, groups: &BTreeMap<u64, usize>, memo: &mut BTreeMap<u64, Option<usize>>) -> Option<usize> {
        let node = tree.node(id).expect("tree is connected");
        let g = if node.is_leaf() {
            Some(groups[&id])
        } else {
            let l = common(tree, 2 * id, groups, memo);
            let r = common(tree, 2 * id + 1, groups, memo);
            if l.is_some() && l == r {
                l
            } else {
                None
            }
        };
        memo.insert(id, g);
        g
    }
    let mut memo = BTreeMap::new();
    common(tree, 1, leaf_to_group, &mut memo);
    let mut kept: Vec<TreeNode> = Vec::new();
    let mut stack = vec![1u64];
    while let Some(id) = stack.pop() {
        let mut node = tree.node(id).expect("tree is connected").clone();
        match memo[&id] {
            Some(g) => {
                node.split = None;
                node.statistic = None;
                node.group = Some(g);
            }
            None => {
                stack.push(2 * id + 1);
                stack.push(2 * id);
            }
        }
        kept.push(node);
    }
    Tree::from_nodes(kept)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transform_examples() {
        let ordering = LeafOrdering {
            leaves: vec![4, 5, 6, 7],
            unit_of_leaf: vec![0, 1, 2, 3],
            units: vec![vec![4], vec![5], vec![6], vec![7]],
            mple: vec![0.0, 0.5, 1.0, 2.0],
            converged: true,
        };
        let t = build_transform(&ordering);
        let w_inv = t.w_inv();
        assert_eq!((w_inv[(0, 0)], w_inv[(1, 1)], w_inv[(2, 2)]), (0.5, 0.5, 1.0));
        assert!(t.b().matmul(&t.b_inv()).max_abs_diff(&Matrix::identity(3)) < 1e-15);
        let beta = [0.3, -1.2, 4.0];
        let back = t.beta_from_gamma(&t.gamma_from_beta(&beta));
        for (a, b) in back.iter().zip(beta) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(t.gamma_from_beta(&[0.5, 1.0, 2.0]), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn grid_shape() {
        let g = lambda_grid(2.0, 100, 1e-3);
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], 2.0);
        assert!((g[99] - 2e-3).abs() < 1e-15);
        assert_eq!(g[100], 0.0);
        assert_eq!(lambda_grid(0.0, 100, 1e-3), vec![0.0]);
    }

    #[test]
    fn runs_from_gamma() {
        assert_eq!(runs(&[0.0, 1.0, 1e-9, 2.0], 1e-8), vec![0, 0, 1, 1, 2]);
    }
}

//! Best binary split of a node on one covariate: exhaustive greedy search
//! over midpoints, smooth-sigmoid surrogate optimization, nominal subset
//! enumeration and the policy choosing between them.

use serde::{Deserialize, Serialize};

use crate::dataset::{CovariateKind, SurvivalDataset};
use crate::survival::LogrankFrame;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMethod {
    /// Greedy search up to `gs_sss_switch` distinct values, smooth search above.
    #[default]
    Auto,
    Greedy,
    Smooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    /// Sigmoid shape on the [0, 1]-normalized covariate scale.
    pub shape: f64,
    pub gs_sss_switch: usize,
    pub min_child_size: usize,
    pub min_child_events: usize,
    pub max_subset_levels: usize,
    pub method: SplitMethod,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            shape: 50.0,
            gs_sss_switch: 20,
            min_child_size: 20,
            min_child_events: 5,
            max_subset_levels: 12,
            method: SplitMethod::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SplitRule {
    /// `z <= cutoff` goes left.
    Threshold { cutoff: f64 },
    /// Level indices sent left; every other level, seen or not, goes right.
    Subset { levels: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub variable: usize,
    #[serde(flatten)]
    pub rule: SplitRule,
}

impl SplitSpec {
    pub fn threshold(variable: usize, cutoff: f64) -> Self {
        SplitSpec { variable, rule: SplitRule::Threshold { cutoff } }
    }

    pub fn subset(variable: usize, mut levels: Vec<usize>) -> Self {
        levels.sort_unstable();
        levels.dedup();
        SplitSpec { variable, rule: SplitRule::Subset { levels } }
    }

    pub fn goes_left(&self, value: f64) -> bool {
        match &self.rule {
            SplitRule::Threshold { cutoff } => value <= *cutoff,
            SplitRule::Subset { levels } => levels.binary_search(&(value as usize)).is_ok(),
        }
    }

    pub fn cutoff(&self) -> Option<f64> {
        match self.rule {
            SplitRule::Threshold { cutoff } => Some(cutoff),
            SplitRule::Subset { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    pub spec: SplitSpec,
    /// Hard logrank statistic of the split on the node it was found on.
    pub statistic: f64,
}

/// Rows of one node (a multiset of dataset rows) prepared for repeated
/// logrank evaluation.
#[derive(Debug, Clone)]
pub struct NodeData<'a> {
    data: &'a SurvivalDataset,
    rows: Vec<usize>,
    frame: LogrankFrame,
    /// Dataset row at each frame position.
    frame_rows: Vec<usize>,
    frame_events: Vec<bool>,
    n_events: usize,
}

impl<'a> NodeData<'a> {
    pub fn new(data: &'a SurvivalDataset, rows: &[usize]) -> Self {
        let (times, events) = data.outcome(rows);
        let frame = LogrankFrame::new(&times, &events);
        let frame_rows: Vec<usize> = frame.order().iter().map(|&p| rows[p]).collect();
        let frame_events: Vec<bool> = frame.order().iter().map(|&p| events[p]).collect();
        let n_events = events.iter().filter(|&&e| e).count();
        NodeData { data, rows: rows.to_vec(), frame, frame_rows, frame_events, n_events }
    }

    pub fn data(&self) -> &'a SurvivalDataset {
        self.data
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_events(&self) -> usize {
        self.n_events
    }

    /// Variable values in frame order.
    fn values(&self, variable: usize) -> Vec<f64> {
        let col = self.data.column(variable);
        self.frame_rows.iter().map(|&r| col[r]).collect()
    }

    fn hard_statistic(&self, left: impl Fn(usize) -> bool) -> Option<f64> {
        let m: Vec<f64> = (0..self.frame_rows.len()).map(|p| if left(p) { 1.0 } else { 0.0 }).collect();
        self.frame.statistic_sorted(&m, None).ok()
    }

    /// Hard logrank statistic of a frozen split on this node, or `None`
    /// when the variance vanishes.
    pub fn statistic(&self, spec: &SplitSpec) -> Option<f64> {
        let col = self.data.column(spec.variable);
        self.hard_statistic(|p| spec.goes_left(col[self.frame_rows[p]]))
    }

    /// Smoothed statistic with left membership `π(shape·(cutoff − z))`.
    pub fn smooth_statistic(&self, variable: usize, cutoff: f64, shape: f64) -> Option<f64> {
        let values = self.values(variable);
        smooth_q(&self.frame, &values, cutoff, shape)
    }

    /// (size, events) of the left child under `spec`.
    pub fn left_counts(&self, spec: &SplitSpec) -> (usize, usize) {
        let col = self.data.column(spec.variable);
        let mut counts = (0, 0);
        for (p, &r) in self.frame_rows.iter().enumerate() {
            if spec.goes_left(col[r]) {
                counts.0 += 1;
                counts.1 += usize::from(self.frame_events[p]);
            }
        }
        counts
    }

    pub fn admissible(&self, spec: &SplitSpec, config: &SplitConfig) -> bool {
        let (nl, el) = self.left_counts(spec);
        self.children_ok(nl, el, config)
    }

    fn children_ok(&self, nl: usize, el: usize, config: &SplitConfig) -> bool {
        nl >= config.min_child_size
            && el >= config.min_child_events
            && self.len() - nl >= config.min_child_size
            && self.n_events - el >= config.min_child_events
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn smooth_q(frame: &LogrankFrame, values: &[f64], cutoff: f64, shape: f64) -> Option<f64> {
    let m: Vec<f64> = values.iter().map(|&z| sigmoid(shape * (cutoff - z))).collect();
    frame.statistic_sorted(&m, None).ok()
}

/// Distinct sorted values with cumulative left-child (size, events) counts
/// at each midpoint between consecutive values.
struct Cuts {
    midpoints: Vec<f64>,
    admissible: Vec<bool>,
}

fn cuts(values: &[f64], events: &[bool], node: &NodeData, config: &SplitConfig) -> Cuts {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut midpoints = Vec::new();
    let mut admissible = Vec::new();
    let (mut nl, mut el) = (0, 0);
    for (q, &i) in idx.iter().enumerate() {
        nl += 1;
        el += usize::from(events[i]);
        if let Some(&next) = idx.get(q + 1) {
            if values[next] > values[i] {
                midpoints.push(0.5 * (values[i] + values[next]));
                admissible.push(node.children_ok(nl, el, config));
            }
        }
    }
    Cuts { midpoints, admissible }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn is_tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1e-300)
}

/// Exhaustive search over midpoints of consecutive distinct values.
pub fn greedy_search(node: &NodeData, variable: usize, config: &SplitConfig) -> Option<SplitResult> {
    let values = node.values(variable);
    let c = cuts(&values, &node.frame_events, node, config);
    let center = median(&values);
    let mut best: Option<(f64, f64)> = None;
    for (&cut, _) in c.midpoints.iter().zip(&c.admissible).filter(|(_, &ok)| ok) {
        let Some(q) = node.hard_statistic(|p| values[p] <= cut) else { continue };
        best = match best {
            None => Some((cut, q)),
            Some((bc, bq)) if is_tie(q, bq) => {
                if (cut - center).abs() < (bc - center).abs() {
                    Some((cut, q.max(bq)))
                } else {
                    Some((bc, bq.max(q)))
                }
            }
            Some((_, bq)) if q > bq => Some((cut, q)),
            keep => keep,
        };
    }
    best.map(|(cut, statistic)| SplitResult { spec: SplitSpec::threshold(variable, cut), statistic })
}

/// Maximizes the smoothed statistic over admissible cutoffs: a quantile
/// grid, then golden-section refinement on the bracketing grid cell.
pub fn sss_search(node: &NodeData, variable: usize, config: &SplitConfig) -> Option<SplitResult> {
    let values = node.values(variable);
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    if !(hi > lo) {
        return None;
    }
    let span = hi - lo;
    let scaled: Vec<f64> = values.iter().map(|&v| (v - lo) / span).collect();
    let c = cuts(&scaled, &node.frame_events, node, config);
    let ok: Vec<f64> = c.midpoints.iter().zip(&c.admissible).filter(|(_, &a)| a).map(|(&m, _)| m).collect();
    let (&c_lo, &c_hi) = (ok.first()?, ok.last()?);

    const GRID: usize = 50;
    let grid: Vec<f64> = if ok.len() <= GRID {
        ok.clone()
    } else {
        (0..GRID).map(|g| ok[(g * (ok.len() - 1) + (GRID - 1) / 2) / (GRID - 1)]).collect()
    };
    let f = |cut: f64| smooth_q(&node.frame, &scaled, cut, config.shape).unwrap_or(f64::NEG_INFINITY);
    let scores: Vec<f64> = grid.iter().map(|&g| f(g)).collect();
    let (g_best, &s_best) = scores.iter().enumerate().fold((0, &f64::NEG_INFINITY), |acc, (i, s)| if *s > *acc.1 { (i, s) } else { acc });
    let mut cut = grid[g_best];
    if grid.len() > 1 {
        let a = grid[g_best.saturating_sub(1)];
        let b = grid[(g_best + 1).min(grid.len() - 1)];
        let (refined, value) = golden_section_max(f, a, b, 1e-4);
        if value > s_best {
            cut = refined;
        }
    }
    let cut = cut.clamp(c_lo, c_hi);
    let cutoff = lo + cut * span;
    let spec = SplitSpec::threshold(variable, cutoff);
    let statistic = node.statistic(&spec)?;
    Some(SplitResult { spec, statistic })
}

/// Maximizer of `f` on `[a, b]` to absolute tolerance `tol`, with its value.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Best level subset for a nominal variable. Subsets always contain the
/// smallest level present; above `max_subset_levels` levels are ordered by
/// event rate and cut like an ordinal variable.
pub fn subset_search(node: &NodeData, variable: usize, config: &SplitConfig) -> Option<SplitResult> {
    let n_levels = node.data.schema().get(variable).levels().map_or(0, <[String]>::len);
    let values = node.values(variable);
    let mut size = vec![0usize; n_levels];
    let mut events = vec![0usize; n_levels];
    for (p, &v) in values.iter().enumerate() {
        size[v as usize] += 1;
        events[v as usize] += usize::from(node.frame_events[p]);
    }
    let present: Vec<usize> = (0..n_levels).filter(|&l| size[l] > 0).collect();
    let l = present.len();
    if l < 2 {
        return None;
    }
    if l > config.max_subset_levels {
        let mut ranked = present.clone();
        ranked.sort_by(|&a, &b| {
            let ra = events[a] as f64 / size[a] as f64;
            let rb = events[b] as f64 / size[b] as f64;
            ra.total_cmp(&rb).then(a.cmp(&b))
        });
        let mut best: Option<(usize, f64)> = None;
        let (mut nl, mut el) = (0, 0);
        for k in 0..l - 1 {
            nl += size[ranked[k]];
            el += events[ranked[k]];
            if !node.children_ok(nl, el, config) {
                continue;
            }
            let spec = SplitSpec::subset(variable, ranked[..=k].to_vec());
            if let Some(q) = node.statistic(&spec) {
                if best.is_none_or(|(_, bq)| q > bq) {
                    best = Some((k, q));
                }
            }
        }
        return best.map(|(k, statistic)| SplitResult { spec: SplitSpec::subset(variable, ranked[..=k].to_vec()), statistic });
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut in_left = vec![false; n_levels];
    for mask in 0u64..(1u64 << (l - 1)) - 1 {
        let mut left = vec![present[0]];
        for (bit, &lev) in present[1..].iter().enumerate() {
            if mask >> bit & 1 == 1 {
                left.push(lev);
            }
        }
        let nl: usize = left.iter().map(|&v| size[v]).sum();
        let el: usize = left.iter().map(|&v| events[v]).sum();
        if !node.children_ok(nl, el, config) {
            continue;
        }
        in_left.iter_mut().for_each(|b| *b = false);
        for &v in &left {
            in_left[v] = true;
        }
        let Some(q) = node.hard_statistic(|p| in_left[values[p] as usize]) else { continue };
        if best.as_ref().is_none_or(|(_, bq)| q > *bq) {
            best = Some((left, q));
        }
    }
    best.map(|(levels, statistic)| SplitResult { spec: SplitSpec::subset(variable, levels), statistic })
}

/// Number of distinct values of a variable within the node.
pub fn distinct_values(node: &NodeData, variable: usize) -> usize {
    let mut v = node.values(variable);
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.len()
}

pub fn best_split_for_variable(node: &NodeData, variable: usize, config: &SplitConfig) -> Option<SplitResult> {
    if matches!(node.data.schema().get(variable).kind, CovariateKind::Nominal { .. }) {
        return subset_search(node, variable, config);
    }
    let smooth = match config.method {
        SplitMethod::Greedy => false,
        SplitMethod::Smooth => true,
        SplitMethod::Auto => distinct_values(node, variable) > config.gs_sss_switch,
    };
    if smooth {
        sss_search(node, variable, config)
    } else {
        greedy_search(node, variable, config)
    }
}

/// Best split over all variables on the node's own rows; ties go to the
/// lower variable index.
pub fn best_split(node: &NodeData, config: &SplitConfig) -> Option<SplitResult> {
    let mut best: Option<SplitResult> = None;
    for j in 0..node.data.schema().len() {
        if let Some(r) = best_split_for_variable(node, j, config) {
            if best.as_ref().is_none_or(|b| r.statistic > b.statistic) {
                best = Some(r);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Covariate, Schema, SurvivalRecord};

    fn small(values: &[f64], times: &[f64], events: &[bool]) -> SurvivalDataset {
        let schema = Schema::new(vec![Covariate::continuous("x")]).unwrap();
        SurvivalDataset::from_records(
            schema,
            values.iter().zip(times).zip(events).map(|((&v, &t), &e)| SurvivalRecord { time: t, event: e, covariates: vec![v] }),
        )
        .unwrap()
    }

    fn loose() -> SplitConfig {
        SplitConfig { min_child_size: 1, min_child_events: 1, ..SplitConfig::default() }
    }

    #[test]
    fn binary_has_single_cut() {
        let d = small(&[0.0, 0.0, 1.0, 1.0], &[1.0, 2.0, 3.0, 4.0], &[true, true, true, true]);
        let node = NodeData::new(&d, &d.all_rows().0);
        let r = greedy_search(&node, 0, &loose()).unwrap();
        assert_eq!(r.spec.cutoff(), Some(0.5));
    }

    #[test]
    fn constraints_can_make_infeasible() {
        let d = small(&[0.0, 1.0, 2.0], &[1.0, 2.0, 3.0], &[true, false, false]);
        let node = NodeData::new(&d, &d.all_rows().0);
        let cfg = SplitConfig { min_child_size: 1, min_child_events: 1, ..SplitConfig::default() };
        assert!(greedy_search(&node, 0, &cfg).is_none());
    }

    #[test]
    fn golden_section_finds_peak() {
        let (x, v) = golden_section_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-6);
        assert!((x - 0.3).abs() < 1e-5);
        assert!(v <= 0.0);
    }

    #[test]
    fn subset_spec_routes_unseen_right() {
        let s = SplitSpec::subset(0, vec![2, 0]);
        assert!(s.goes_left(0.0));
        assert!(s.goes_left(2.0));
        assert!(!s.goes_left(1.0));
        assert!(!s.goes_left(7.0));
    }

    #[test]
    fn sigmoid_midpoint() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
    }
}

//! Survival-analysis primitives: risk tables, the two-sample logrank
//! statistic with (possibly fractional) left-child membership,
//! Kaplan–Meier, Cox partial likelihood with Breslow ties, the Breslow
//! baseline hazard, validated deviance and Harrell's concordance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, spd_inverse, spd_solve, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskTable {
    pub event_times: Vec<f64>,
    pub at_risk: Vec<usize>,
    pub deaths: Vec<usize>,
}

/// Indices sorted by time, descending; ties keep input order.
fn descending_order(times: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[b].total_cmp(&times[a]));
    order
}

/// End offsets of blocks of equal time inside a descending order.
fn tie_blocks(times: &[f64], order: &[usize]) -> Vec<usize> {
    let mut ends = Vec::new();
    for p in 1..=order.len() {
        if p == order.len() || times[order[p]] != times[order[p - 1]] {
            ends.push(p);
        }
    }
    ends
}

pub fn build_risk_table(times: &[f64], events: &[bool]) -> Result<RiskTable> {
    assert_eq!(times.len(), events.len(), "length mismatch");
    let order = descending_order(times);
    let mut rev = RiskTable { event_times: vec![], at_risk: vec![], deaths: vec![] };
    let mut y = 0;
    let mut start = 0;
    for end in tie_blocks(times, &order) {
        let block = &order[start..end];
        y += block.len();
        let d = block.iter().filter(|&&i| events[i]).count();
        if d > 0 {
            rev.event_times.push(times[block[0]]);
            rev.at_risk.push(y);
            rev.deaths.push(d);
        }
        start = end;
    }
    if rev.event_times.is_empty() {
        return Err(Error::NoEvents);
    }
    rev.event_times.reverse();
    rev.at_risk.reverse();
    rev.deaths.reverse();
    Ok(rev)
}

/// Time-sorted view of a sample, prepared once and reused to evaluate the
/// logrank statistic for many left-child membership vectors.
#[derive(Debug, Clone)]
pub struct LogrankFrame {
    order: Vec<usize>,
    event: Vec<bool>,
    block_ends: Vec<usize>,
    n_event_times: usize,
}

impl LogrankFrame {
    pub fn new(times: &[f64], events: &[bool]) -> Self {
        assert_eq!(times.len(), events.len(), "length mismatch");
        let order = descending_order(times);
        let block_ends = tie_blocks(times, &order);
        let event: Vec<bool> = order.iter().map(|&i| events[i]).collect();
        let mut n_event_times = 0;
        let mut start = 0;
        for &end in &block_ends {
            if event[start..end].iter().any(|&e| e) {
                n_event_times += 1;
            }
            start = end;
        }
        LogrankFrame { order, event, block_ends, n_event_times }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Input positions in frame order (descending time).
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn n_event_times(&self) -> usize {
        self.n_event_times
    }

    /// Logrank statistic for membership given in input order.
    pub fn statistic(&self, membership: &[f64], weights: Option<&[f64]>) -> Result<f64> {
        let sorted: Vec<f64> = self.order.iter().map(|&i| membership[i]).collect();
        self.statistic_sorted(&sorted, weights)
    }

    /// Logrank statistic for membership already permuted into frame order.
    ///
    /// `weights[k]` belongs to the k-th event time in ascending order.
    /// Event times with a single subject at risk contribute nothing.
    pub fn statistic_sorted(&self, membership: &[f64], weights: Option<&[f64]>) -> Result<f64> {
        debug_assert_eq!(membership.len(), self.order.len());
        let (mut y, mut y_left) = (0.0f64, 0.0f64);
        let (mut num, mut den) = (0.0f64, 0.0f64);
        let mut k = self.n_event_times;
        let mut start = 0;
        for &end in &self.block_ends {
            let (mut d, mut d_left) = (0.0f64, 0.0f64);
            for p in start..end {
                let m = membership[p];
                y += 1.0;
                y_left += m;
                if self.event[p] {
                    d += 1.0;
                    d_left += m;
                }
            }
            start = end;
            if d == 0.0 {
                continue;
            }
            k -= 1;
            if y <= 1.0 {
                continue;
            }
            let w = weights.map_or(1.0, |w| w[k]);
            let expected = y_left * d / y;
            let var = d * (y - d) * y_left * (y - y_left) / (y * y * (y - 1.0));
            num += w * (d_left - expected);
            den += w * w * var;
        }
        if !(den > 0.0) {
            return Err(Error::ZeroVariance);
        }
        Ok(num * num / den)
    }
}

/// Two-sample logrank statistic with left-membership weights in `[0, 1]`.
///
/// Hard 0/1 memberships give the classical statistic; fractional
/// memberships give its sigmoid-smoothed counterpart.
pub fn logrank_statistic(membership: &[f64], times: &[f64], events: &[bool], weights: Option<&[f64]>) -> Result<f64> {
    if membership.len() != times.len() || times.len() != events.len() {
        return Err(Error::InvalidArgument("membership, times and events differ in length".into()));
    }
    if membership.iter().any(|m| !(0.0..=1.0).contains(m)) {
        return Err(Error::InvalidArgument("membership outside [0, 1]".into()));
    }
    let frame = LogrankFrame::new(times, events);
    if let Some(w) = weights {
        if w.len() != frame.n_event_times() || w.iter().any(|&v| !(v >= 0.0)) || w.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidArgument("logrank weights must be nonnegative, not all zero, one per event time".into()));
        }
    }
    frame.statistic(membership, weights)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KaplanMeier {
    pub times: Vec<f64>,
    pub survival: Vec<f64>,
}

impl KaplanMeier {
    pub fn at(&self, t: f64) -> f64 {
        match self.times.partition_point(|&s| s <= t) {
            0 => 1.0,
            k => self.survival[k - 1],
        }
    }

    /// First event time at which survival drops to 0.5 or below.
    pub fn median(&self) -> Option<f64> {
        self.times.iter().zip(&self.survival).find(|(_, &s)| s <= 0.5).map(|(&t, _)| t)
    }
}

pub fn kaplan_meier(times: &[f64], events: &[bool]) -> KaplanMeier {
    let Ok(table) = build_risk_table(times, events) else {
        return KaplanMeier { times: vec![], survival: vec![] };
    };
    let mut s = 1.0;
    let survival = table
        .at_risk
        .iter()
        .zip(&table.deaths)
        .map(|(&y, &d)| {
            s *= 1.0 - d as f64 / y as f64;
            s
        })
        .collect();
    KaplanMeier { times: table.event_times, survival }
}

/// Risk-set structure of a sample for Breslow partial likelihoods.
#[derive(Debug, Clone)]
pub struct RiskSets {
    order: Vec<usize>,
    block_ends: Vec<usize>,
    events: Vec<bool>,
    n_events: usize,
}

/// Partial log-likelihood with its gradient and observed information.
#[derive(Debug, Clone)]
pub struct CoxEval {
    pub loglik: f64,
    pub gradient: Vec<f64>,
    pub information: Matrix,
}

impl RiskSets {
    pub fn new(times: &[f64], events: &[bool]) -> Self {
        assert_eq!(times.len(), events.len(), "length mismatch");
        let order = descending_order(times);
        let block_ends = tie_blocks(times, &order);
        RiskSets { order, block_ends, events: events.to_vec(), n_events: events.iter().filter(|&&e| e).count() }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn n_events(&self) -> usize {
        self.n_events
    }

    /// Partial log-likelihood alone.
    pub fn loglik(&self, x: &Matrix, beta: &[f64]) -> f64 {
        let eta: Vec<f64> = (0..x.rows()).map(|i| dot(x.row(i), beta)).collect();
        let shift = eta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let shift = if shift.is_finite() { shift } else { 0.0 };
        let mut s0 = 0.0;
        let mut loglik = 0.0;
        let mut start = 0;
        for &end in &self.block_ends {
            let mut d = 0.0;
            for &i in &self.order[start..end] {
                s0 += (eta[i] - shift).exp();
                if self.events[i] {
                    d += 1.0;
                    loglik += eta[i];
                }
            }
            start = end;
            if d > 0.0 {
                loglik -= d * (s0.ln() + shift);
            }
        }
        loglik
    }

    pub fn evaluate(&self, x: &Matrix, beta: &[f64]) -> CoxEval {
        let p = x.cols();
        let eta: Vec<f64> = (0..x.rows()).map(|i| dot(x.row(i), beta)).collect();
        let shift = eta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let shift = if shift.is_finite() { shift } else { 0.0 };
        let mut s0 = 0.0;
        let mut s1 = vec![0.0; p];
        let mut s2 = vec![0.0; p * p];
        let mut loglik = 0.0;
        let mut gradient = vec![0.0; p];
        let mut info = Matrix::zeros(p, p);
        let mut start = 0;
        for &end in &self.block_ends {
            let mut d = 0.0;
            for &i in &self.order[start..end] {
                let w = (eta[i] - shift).exp();
                let xi = x.row(i);
                s0 += w;
                for a in 0..p {
                    let wa = w * xi[a];
                    if wa == 0.0 {
                        continue;
                    }
                    s1[a] += wa;
                    for b in a..p {
                        s2[a * p + b] += wa * xi[b];
                    }
                }
                if self.events[i] {
                    d += 1.0;
                    loglik += eta[i];
                    for a in 0..p {
                        gradient[a] += xi[a];
                    }
                }
            }
            start = end;
            if d == 0.0 {
                continue;
            }
            loglik -= d * (s0.ln() + shift);
            for a in 0..p {
                let ma = s1[a] / s0;
                gradient[a] -= d * ma;
                for b in a..p {
                    info[(a, b)] += d * (s2[a * p + b] / s0 - ma * s1[b] / s0);
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                info[(a, b)] = info[(b, a)];
            }
        }
        CoxEval { loglik, gradient, information: info }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoxOptions {
    pub max_iter: usize,
    pub rel_tol: f64,
    pub grad_tol: f64,
    /// Coefficients beyond this magnitude signal monotone likelihood.
    pub beta_cap: f64,
}

impl Default for CoxOptions {
    fn default() -> Self {
        CoxOptions { max_iter: 50, rel_tol: 1e-9, grad_tol: 1e-6, beta_cap: 15.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoxFit {
    pub coefficients: Vec<f64>,
    /// Inverse observed information at the solution.
    pub covariance: Matrix,
    pub loglik: f64,
    pub converged: bool,
    pub diverged: bool,
    pub iterations: usize,
    pub gradient_max: f64,
}

impl CoxFit {
    pub fn std_errors(&self) -> Vec<f64> {
        (0..self.coefficients.len()).map(|k| self.covariance[(k, k)].max(0.0).sqrt()).collect()
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Newton–Raphson maximizer of the Breslow partial likelihood.
pub fn cox_fit(x: &Matrix, times: &[f64], events: &[bool]) -> Result<CoxFit> {
    let sets = RiskSets::new(times, events);
    cox_fit_with(x, &sets, &CoxOptions::default())
}

pub fn cox_fit_with(x: &Matrix, sets: &RiskSets, opts: &CoxOptions) -> Result<CoxFit> {
    if sets.n_events() == 0 {
        return Err(Error::NoEvents);
    }
    assert_eq!(x.rows(), sets.len(), "design/outcome length mismatch");
    let p = x.cols();
    let mut beta = vec![0.0; p];
    let mut cur = sets.evaluate(x, &beta);
    let mut converged = false;
    let mut diverged = false;
    let mut iterations = 0;
    let mut small_changes = 0;
    while iterations < opts.max_iter {
        if max_abs(&cur.gradient) <= opts.grad_tol {
            converged = true;
            break;
        }
        iterations += 1;
        let step = spd_solve(&cur.information, &cur.gradient);
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = beta.iter().zip(&step).map(|(b, s)| b + scale * s).collect();
            let eval = sets.evaluate(x, &trial);
            if eval.loglik.is_finite() && eval.loglik >= cur.loglik - 1e-12 * cur.loglik.abs() {
                accepted = Some((trial, eval));
                break;
            }
            scale *= 0.5;
        }
        let Some((next, eval)) = accepted else {
            // no ascent direction left at machine precision
            converged = max_abs(&cur.gradient) <= opts.grad_tol.sqrt();
            break;
        };
        let rel = (eval.loglik - cur.loglik).abs() / cur.loglik.abs().max(1e-10);
        beta = next;
        cur = eval;
        if beta.iter().any(|b| b.abs() > opts.beta_cap) {
            diverged = true;
            for b in beta.iter_mut() {
                *b = b.clamp(-opts.beta_cap, opts.beta_cap);
            }
            cur = sets.evaluate(x, &beta);
            break;
        }
        if rel < opts.rel_tol {
            small_changes += 1;
            // Newton converges quadratically; two tiny changes in a row mean
            // the optimum is reached to working precision.
            if small_changes >= 2 || max_abs(&cur.gradient) <= opts.grad_tol {
                converged = true;
                break;
            }
        } else {
            small_changes = 0;
        }
    }
    if !converged && !diverged && max_abs(&cur.gradient) <= opts.grad_tol {
        converged = true;
    }
    let covariance = if p > 0 { spd_inverse(&cur.information) } else { Matrix::zeros(0, 0) };
    Ok(CoxFit {
        coefficients: beta,
        covariance,
        loglik: cur.loglik,
        converged,
        diverged,
        iterations,
        gradient_max: max_abs(&cur.gradient),
    })
}

/// One-hot design over `n_groups` labels with `reference` dropped; columns
/// follow ascending label order.
pub fn indicator_design(labels: &[usize], n_groups: usize, reference: usize) -> Matrix {
    let cols = n_groups.saturating_sub(1);
    let mut x = Matrix::zeros(labels.len(), cols);
    for (i, &g) in labels.iter().enumerate() {
        assert!(g < n_groups, "label out of range");
        if g != reference {
            let c = if g < reference { g } else { g - 1 };
            x[(i, c)] = 1.0;
        }
    }
    x
}

/// Expand coefficients of an [`indicator_design`] back to one value per
/// label, with zero at the reference.
pub fn expand_coefficients(coef: &[f64], n_groups: usize, reference: usize) -> Vec<f64> {
    (0..n_groups)
        .map(|g| match g.cmp(&reference) {
            std::cmp::Ordering::Less => coef[g],
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Greater => coef[g - 1],
        })
        .collect()
}

/// Breslow cumulative baseline hazard: a right-continuous step function,
/// flat beyond the last event time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineHazard {
    pub times: Vec<f64>,
    pub cumhaz: Vec<f64>,
    /// Training sample size; sets the floor used inside the deviance log.
    pub n_train: usize,
}

impl BaselineHazard {
    pub fn at(&self, t: f64) -> f64 {
        match self.times.partition_point(|&s| s <= t) {
            0 => 0.0,
            k => self.cumhaz[k - 1],
        }
    }
}

pub fn breslow_from_linear_predictor(eta: &[f64], times: &[f64], events: &[bool]) -> BaselineHazard {
    let order = descending_order(times);
    let shift = eta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let shift = if shift.is_finite() { shift } else { 0.0 };
    let mut s0 = 0.0;
    let mut jumps = Vec::new();
    let mut start = 0;
    for end in tie_blocks(times, &order) {
        let block = &order[start..end];
        for &i in block {
            s0 += (eta[i] - shift).exp();
        }
        let d = block.iter().filter(|&&i| events[i]).count();
        if d > 0 {
            jumps.push((times[block[0]], d as f64 / s0 * (-shift).exp()));
        }
        start = end;
    }
    jumps.reverse();
    let mut acc = 0.0;
    let (times_out, cumhaz) = jumps
        .into_iter()
        .map(|(t, j)| {
            acc += j;
            (t, acc)
        })
        .unzip();
    BaselineHazard { times: times_out, cumhaz, n_train: times.len() }
}

pub fn breslow_cumhaz(x: &Matrix, beta: &[f64], times: &[f64], events: &[bool]) -> BaselineHazard {
    let eta: Vec<f64> = (0..x.rows()).map(|i| dot(x.row(i), beta)).collect();
    breslow_from_linear_predictor(&eta, times, events)
}

/// Validated deviance of held-out records with linear predictors `eta`.
///
/// `log Λ₀(T)` for an event is floored at `0.5 / n_train`.
pub fn deviance(baseline: &BaselineHazard, eta: &[f64], times: &[f64], events: &[bool]) -> f64 {
    let floor = 0.5 / baseline.n_train.max(1) as f64;
    let mut total = 0.0;
    for ((&t, &e), &lp) in times.iter().zip(events).zip(eta) {
        let cum = baseline.at(t);
        let mut term = cum * lp.exp();
        if e {
            term -= 1.0 + lp + cum.max(floor).ln();
        }
        total += term;
    }
    2.0 * total
}

/// Harrell's concordance index; `None` when no pair is comparable.
pub fn concordance(risk: &[f64], times: &[f64], events: &[bool]) -> Option<f64> {
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    let (mut concordant, mut pairs) = (0.0, 0.0);
    for (p, &i) in order.iter().enumerate() {
        if !events[i] {
            continue;
        }
        for &j in &order[p + 1..] {
            if times[j] <= times[i] {
                continue;
            }
            pairs += 1.0;
            if risk[i] > risk[j] {
                concordant += 1.0;
            } else if risk[i] == risk[j] {
                concordant += 0.5;
            }
        }
    }
    (pairs > 0.0).then(|| concordant / pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn risk_table_counts() {
        let t = build_risk_table(&[1.0, 2.0, 3.0], &[true, false, true]).unwrap();
        assert_eq!(t.event_times, vec![1.0, 3.0]);
        assert_eq!(t.at_risk, vec![3, 1]);
        assert_eq!(t.deaths, vec![1, 1]);
        assert!(matches!(build_risk_table(&[1.0, 2.0], &[false, false]), Err(Error::NoEvents)));
        let t = build_risk_table(&[1.0, 2.0, 2.0, 5.0], &[false, true, true, false]).unwrap();
        assert_eq!((t.at_risk[0], t.deaths[0]), (3, 2));
        let t = build_risk_table(&[2.0, 2.0, 3.0, 4.0], &[true, true, false, false]).unwrap();
        assert_eq!((t.at_risk[0], t.deaths[0]), (4, 2));
    }

    #[test]
    fn logrank_hand_example() {
        let q = logrank_statistic(&[1.0, 0.0], &[1.0, 2.0], &[true, false], None).unwrap();
        assert_eq!(q, 1.0);
        let all_left = logrank_statistic(&[1.0, 1.0], &[1.0, 2.0], &[true, false], None);
        assert!(matches!(all_left, Err(Error::ZeroVariance)));
    }

    #[test]
    fn logrank_weights_validated() {
        let m = [1.0, 0.0, 1.0, 0.0];
        let t = [1.0, 2.0, 3.0, 4.0];
        let e = [true, true, true, false];
        let plain = logrank_statistic(&m, &t, &e, None).unwrap();
        let ones = logrank_statistic(&m, &t, &e, Some(&[1.0, 1.0, 1.0])).unwrap();
        assert_eq!(plain, ones);
        assert!(logrank_statistic(&m, &t, &e, Some(&[0.0, 0.0, 0.0])).is_err());
        assert!(logrank_statistic(&m, &t, &e, Some(&[1.0])).is_err());
    }

    #[test]
    fn km_cases() {
        let km = kaplan_meier(&[1.0, 2.0, 3.0], &[true, false, false]);
        assert_abs_diff_eq!(km.at(1.0), 2.0 / 3.0);
        assert_eq!(km.at(0.5), 1.0);
        let km = kaplan_meier(&[1.0, 2.0], &[false, false]);
        assert_eq!(km.at(10.0), 1.0);
        let km = kaplan_meier(&[1.0, 2.0, 3.0], &[true, true, true]);
        assert_eq!(km.at(3.0), 0.0);
        assert_eq!(km.median(), Some(2.0));
    }

    #[test]
    fn cox_symmetric_groups_give_zero() {
        let times = [1.0, 2.0, 3.0, 4.0, 1.0, 2.0, 3.0, 4.0];
        let events = [true, false, true, true, true, false, true, true];
        let labels = [0, 0, 0, 0, 1, 1, 1, 1];
        let x = indicator_design(&labels, 2, 0);
        let fit = cox_fit(&x, &times, &events).unwrap();
        assert!(fit.converged);
        assert_abs_diff_eq!(fit.coefficients[0], 0.0, epsilon = 1e-10);
    }

    #[test]
    fn cox_flags_divergence() {
        // group 1 never fails but shares risk sets with failures
        let times = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let events = [true, true, true, false, false, false];
        let labels = [0, 0, 0, 1, 1, 1];
        let x = indicator_design(&labels, 2, 0);
        let fit = cox_fit(&x, &times, &events).unwrap();
        assert!(fit.diverged);
        assert!(!fit.converged);
        assert_eq!(fit.coefficients[0], -15.0);
    }

    #[test]
    fn breslow_reductions() {
        let times = [1.0, 2.0, 2.0, 4.0, 5.0];
        let events = [true, true, false, true, false];
        let zero = breslow_from_linear_predictor(&[0.0; 5], &times, &events);
        let table = build_risk_table(&times, &events).unwrap();
        let mut na = 0.0;
        for k in 0..table.event_times.len() {
            na += table.deaths[k] as f64 / table.at_risk[k] as f64;
            assert_abs_diff_eq!(zero.at(table.event_times[k]), na, epsilon = 1e-14);
        }
        assert_eq!(zero.at(0.5), 0.0);
        assert_abs_diff_eq!(zero.at(1.0), 1.0 / 5.0, epsilon = 1e-15);
        let doubled = breslow_from_linear_predictor(&[2f64.ln(); 5], &times, &events);
        for (a, b) in zero.cumhaz.iter().zip(&doubled.cumhaz) {
            assert_abs_diff_eq!(*a, 2.0 * b, epsilon = 1e-14);
        }
    }

    #[test]
    fn deviance_unit_cases() {
        let base = BaselineHazard { times: vec![2.0], cumhaz: vec![1.0], n_train: 10 };
        assert_eq!(deviance(&base, &[0.3], &[1.0], &[false]), 0.0);
        assert_abs_diff_eq!(deviance(&base, &[0.0], &[2.0], &[true]), 0.0, epsilon = 1e-15);
        // event before the first training jump uses the floor 0.5/n
        let d = deviance(&base, &[0.0], &[1.0], &[true]);
        assert_abs_diff_eq!(d, 2.0 * (0.0 - (1.0 + 0.05f64.ln())), epsilon = 1e-12);
    }

    #[test]
    fn concordance_cases() {
        let t = [1.0, 2.0, 3.0, 4.0];
        let e = [true; 4];
        assert_eq!(concordance(&[1.0; 4], &t, &e), Some(0.5));
        assert_eq!(concordance(&[4.0, 3.0, 2.0, 1.0], &t, &e), Some(1.0));
        assert_eq!(concordance(&[1.0, 2.0], &[1.0, 2.0], &[false, false]), None);
    }
}

mod common;

use survfuse::inference::{
    bootstrap_bias_correct, confidence_intervals, group_summaries, summarize_model, BbcConfig, BiasSign,
};
use survfuse::select::{select_ic, Criterion, PipelineConfig};
use survfuse::survival::{cox_fit, indicator_design};
use survfuse::Seed;

/// Row-normalized contingency table applied to a bootstrap difference vector.
fn transport(table: &[Vec<usize>], tau: &[f64]) -> Vec<f64> {
    table
        .iter()
        .map(|row| {
            let total: usize = row.iter().sum();
            if total == 0 {
                return 0.0;
            }
            row.iter().zip(tau).map(|(&c, t)| c as f64 * t).sum::<f64>() / total as f64
        })
        .collect()
}

#[test]
fn group_summaries_match_a_direct_fit() {
    let data = common::step_sample(1, 300);
    let rows: Vec<usize> = (0..data.len()).collect();
    let labels: Vec<usize> = rows.iter().map(|&i| if data.value(i, 0) <= 0.5 { 2 } else { 1 }).collect();
    let s = group_summaries(&data, &rows, &labels, 2).unwrap();
    let zero: Vec<usize> = labels.iter().map(|g| g - 1).collect();
    let fit = cox_fit(&indicator_design(&zero, 2, 0), data.times(), data.events()).unwrap();
    assert_eq!(s.rows[0].beta, 0.0);
    assert!(s.rows[0].se.is_none());
    assert!((s.rows[1].beta - fit.coefficients[0]).abs() < 1e-12);
    assert!((s.rows[1].se.unwrap() - fit.std_errors()[0]).abs() < 1e-12);
    assert_eq!(s.rows.iter().map(|r| r.n).sum::<usize>(), 300);
    assert_eq!(s.rows.iter().map(|r| r.events).sum::<usize>(), data.n_events());
    // the generating log hazard ratio is 1.5
    assert!((s.rows[1].beta - 1.5).abs() < 0.5);
}

#[test]
fn correction_replays_from_the_recorded_draws() {
    let data = common::step_sample(2, 400);
    let pipeline = PipelineConfig::default();
    let model = select_ic(&data, Criterion::Bic, &pipeline, Seed(2)).unwrap();
    assert!(model.group_count() > 1);
    let config = BbcConfig { replicates: 8, ..BbcConfig::default() };
    let report = bootstrap_bias_correct(&data, &model, &pipeline, &config, Seed(9)).unwrap();
    assert_eq!(report.replicates, report.draws.len());
    let k = model.group_count();
    let root_n = (data.len() as f64).sqrt();
    let summary = summarize_model(&model, &data).unwrap();
    for g in 0..k {
        let bias: f64 = report.draws.iter().map(|d| transport(&d.table, &d.tau_beta)[g]).sum::<f64>() / report.replicates as f64;
        let sd_bias: f64 = report.draws.iter().map(|d| transport(&d.table, &d.tau_sd)[g]).sum::<f64>() / report.replicates as f64;
        let row = &report.groups[g];
        assert!((row.beta - summary.rows[g].beta).abs() < 1e-12);
        assert!((row.beta_bias - bias).abs() < 1e-12);
        assert!((row.sd_bias - sd_bias).abs() < 1e-12);
        if g == 0 {
            assert_eq!(row.corrected_beta, 0.0);
        } else {
            assert!((row.corrected_beta - (row.beta - bias)).abs() < 1e-12);
            let sd = summary.rows[g].se.unwrap() * root_n;
            assert!((row.sd.unwrap() - sd).abs() < 1e-9);
            assert!((row.corrected_sd.unwrap() - (sd - sd_bias).max(0.0)).abs() < 1e-9);
        }
    }
    for d in &report.draws {
        assert!(d.groups >= k);
        assert_eq!(d.table.iter().flatten().sum::<usize>(), data.len());
    }

    let add = BbcConfig { sign: BiasSign::Add, ..config };
    let flipped = bootstrap_bias_correct(&data, &model, &pipeline, &add, Seed(9)).unwrap();
    for (a, b) in flipped.groups.iter().zip(&report.groups).skip(1) {
        assert!(((a.corrected_beta - a.beta) + (b.corrected_beta - b.beta)).abs() < 1e-12);
    }
}

#[test]
fn single_group_models_are_left_alone() {
    let data = common::step_sample(3, 200);
    let mut model = select_ic(&data, Criterion::Bic, &PipelineConfig::default(), Seed(1)).unwrap();
    let top = model.path.patterns.last().unwrap().clone();
    model.tree = survfuse::fusion::shear(&model.initial_tree, &top.leaf_to_group);
    model.pattern = top;
    assert_eq!(model.group_count(), 1);
    let report = bootstrap_bias_correct(&data, &model, &PipelineConfig::default(), &BbcConfig::default(), Seed(1)).unwrap();
    assert!(report.draws.is_empty());
    assert_eq!(report.groups.len(), 1);
    assert_eq!(report.groups[0].corrected_beta, 0.0);
}

#[test]
fn intervals_are_centred_on_the_corrected_estimate() {
    let data = common::step_sample(4, 400);
    let pipeline = PipelineConfig::default();
    let model = select_ic(&data, Criterion::Bic, &pipeline, Seed(4)).unwrap();
    let report = bootstrap_bias_correct(&data, &model, &pipeline, &BbcConfig { replicates: 5, ..BbcConfig::default() }, Seed(4)).unwrap();
    let narrow = confidence_intervals(&report, 0.90);
    let wide = confidence_intervals(&report, 0.95);
    for ((n, w), g) in narrow.iter().zip(&wide).zip(&report.groups) {
        assert!((0.5 * (w.lower + w.upper) - g.corrected_beta).abs() < 1e-12);
        if let Some(se) = g.corrected_se {
            assert!((w.upper - w.lower - 2.0 * 1.959963984540054 * se).abs() < 1e-9);
        }
        assert!(n.lower >= w.lower && n.upper <= w.upper);
        assert!((w.hr_lower - w.lower.exp()).abs() < 1e-12);
    }
}

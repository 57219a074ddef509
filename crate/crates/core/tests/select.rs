mod common;

use survfuse::select::{select, select_cv, select_ic, select_test_sample, Criterion, PipelineConfig};
use survfuse::Seed;

#[test]
fn information_criteria_are_penalized_deviances() {
    let data = common::step_sample(1, 400);
    let rows: Vec<usize> = (0..data.len()).collect();
    let d = data.n_events() as f64;
    for criterion in [Criterion::Aic, Criterion::Bic] {
        let model = select_ic(&data, criterion, &PipelineConfig::default(), Seed(3)).unwrap();
        let report = &model.report;
        for (c, p) in report.candidates.iter().zip(&model.path.patterns) {
            let k = c.group_count as f64;
            assert!((c.deviance - p.deviance(&model.initial_tree, &data, &rows)).abs() < 1e-9);
            assert!((c.aic - (c.deviance + 2.0 * k)).abs() < 1e-9);
            assert!((c.bic - (c.deviance + d.ln() * k)).abs() < 1e-9);
        }
        let score = |m: usize| match criterion {
            Criterion::Aic => report.candidates[m].aic,
            _ => report.candidates[m].bic,
        };
        assert!((0..report.candidates.len()).all(|m| score(report.chosen) <= score(m)));
        assert_eq!(model.group_count(), report.candidates[report.chosen].group_count);
    }
}

#[test]
fn test_sample_scores_the_held_out_data() {
    let train = common::step_sample(2, 400);
    let test = common::step_sample(102, 200);
    let test_rows: Vec<usize> = (0..test.len()).collect();
    let model = select_test_sample(&train, &test, &PipelineConfig::default(), Seed(4)).unwrap();
    for (c, p) in model.report.candidates.iter().zip(&model.path.patterns) {
        assert!((c.deviance - p.deviance(&model.initial_tree, &test, &test_rows)).abs() < 1e-9);
    }
    assert!(select(&train, None, Criterion::TestSample, &PipelineConfig::default(), Seed(4)).is_err());
}

#[test]
fn cross_validation_totals_add_up() {
    let data = common::step_sample(3, 400);
    let model = select_cv(&data, 5, &PipelineConfig::default(), Seed(5)).unwrap();
    let report = &model.report;
    assert_eq!(report.fold_deviances.len(), 5);
    for (m, c) in report.candidates.iter().enumerate() {
        let per_fold: Vec<f64> = report.fold_deviances.iter().map(|f| f[m]).collect();
        let total: f64 = per_fold.iter().sum();
        assert!((c.deviance - total).abs() < 1e-8 * total.abs().max(1.0));
        let mean = total / 5.0;
        let var = per_fold.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / 4.0;
        assert!((c.deviance_se.unwrap() - (5.0 * var).sqrt()).abs() < 1e-8);
        // each candidate sits on a grid point of its own plateau
        assert!(model.path.points.iter().any(|p| p.lambda == c.lambda && p.pattern == m));
    }
    let best = report.candidates[report.chosen].deviance;
    assert!(report.candidates.iter().all(|c| best <= c.deviance));
}

#[test]
fn one_standard_error_rule_prefers_larger_penalties() {
    let data = common::step_sample(4, 400);
    let plain = select_cv(&data, 5, &PipelineConfig::default(), Seed(6)).unwrap();
    let config = PipelineConfig { one_se: true, ..PipelineConfig::default() };
    let sparse = select_cv(&data, 5, &config, Seed(6)).unwrap();
    let a = &plain.report.candidates[plain.report.chosen];
    let b = &sparse.report.candidates[sparse.report.chosen];
    assert!(b.lambda >= a.lambda);
    assert!(b.deviance <= a.deviance + a.deviance_se.unwrap() + 1e-9);
}

#[test]
fn cross_validation_rejects_bad_fold_counts() {
    let data = common::step_sample(5, 50);
    assert!(select_cv(&data, 1, &PipelineConfig::default(), Seed(1)).is_err());
    assert!(select_cv(&data, 51, &PipelineConfig::default(), Seed(1)).is_err());
}

#[test]
fn selection_is_reproducible_across_thread_counts() {
    let data = common::step_sample(6, 300);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let m = select_cv(&data, 5, &PipelineConfig::default(), Seed(8)).unwrap();
            (m.report.to_csv(), m.tree.to_json().unwrap())
        })
    };
    assert_eq!(run(1), run(4));
}

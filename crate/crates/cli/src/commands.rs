//! Subcommand implementations.

use std::fs;
use std::path::Path;

use survfuse::dataset::{load_covariates_csv, load_csv};
use survfuse::inference::{
    bootstrap_bias_correct, group_summaries, group_table_csv, summarize_model, BbcConfig, BbcGroup, BbcReport,
    GroupSummary,
};
use survfuse::select::{select, sig6, Criterion};
use survfuse::survival::kaplan_meier;
use survfuse::{Seed, SurvivalDataset};
use survfuse_bench::studies::{
    bias_csv, bias_records_csv, cutoff_csv, metrics_csv, replicates_csv, run_bias_study, run_comparison,
    run_cutoff_study, run_selection_study, selection_csv, BiasSettings, ComparisonSettings, CutoffSettings,
    SelectionSettings,
};
use survfuse_bench::SimModel;

use crate::config::{parse_override, parse_pairs, parse_selection, RunConfig};
use crate::model_file::ModelFile;
use crate::{CliError, FitArgs, PredictArgs, SimulateArgs, SummarizeArgs};

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::Data(format!("cannot create {}: {e}", path.display())))
}

fn run_config(args: &FitArgs) -> Result<RunConfig, CliError> {
    let mut pairs = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            parse_pairs(&text)?
        }
        None => Vec::new(),
    };
    let flag = |k: &str, v: Option<String>| v.map(|v| (k.to_string(), v));
    pairs.extend(
        [
            flag("input", args.input.as_ref().map(|p| p.display().to_string())),
            flag("test_input", args.test_input.as_ref().map(|p| p.display().to_string())),
            flag("output", args.output.as_ref().map(|p| p.display().to_string())),
            flag("selection", args.selection.clone()),
            flag("seed", args.seed.map(|s| s.to_string())),
            flag("bootstrap", args.bootstrap.map(|b| b.to_string())),
            flag("split_mode", args.split_mode.clone()),
        ]
        .into_iter()
        .flatten(),
    );
    for o in &args.overrides {
        pairs.push(parse_override(o)?);
    }
    RunConfig::from_pairs(&pairs)
}

/// Raw estimates in the layout of a correction report.
fn uncorrected(summary: &GroupSummary, n: usize) -> BbcReport {
    let root_n = (n as f64).sqrt();
    let groups = summary
        .rows
        .iter()
        .map(|r| {
            let sd = r.se.map(|s| s * root_n);
            BbcGroup {
                group: r.group,
                beta: r.beta,
                beta_bias: 0.0,
                corrected_beta: r.beta,
                sd,
                sd_bias: 0.0,
                corrected_sd: sd,
                se: r.se,
                corrected_se: r.se,
            }
        })
        .collect();
    BbcReport { sign: Default::default(), replicates: 0, attempts: 0, n, groups, draws: Vec::new() }
}

/// Group table with sizes in front of the raw and corrected columns.
fn group_summary_csv(summary: &GroupSummary, report: &BbcReport, level: f64) -> String {
    let table = group_table_csv(report, level);
    let mut lines = table.lines();
    let header = lines.next().unwrap_or_default();
    let (first, rest) = header.split_once(',').unwrap_or((header, ""));
    let mut out = format!("{first},n,events,{rest}\n");
    for (line, row) in lines.zip(&summary.rows) {
        let (g, rest) = line.split_once(',').unwrap_or((line, ""));
        out.push_str(&format!("{g},{},{},{rest}\n", row.n, row.events));
    }
    out
}

fn km_curves_csv(data: &SurvivalDataset, labels: &[usize], k: usize) -> String {
    let mut out = String::from("group,time,survival\n");
    for g in 1..=k {
        let (times, events): (Vec<f64>, Vec<bool>) =
            (0..data.len()).filter(|&i| labels[i] == g).map(|i| (data.time(i), data.event(i))).unzip();
        out.push_str(&format!("{g},0,1\n"));
        let km = kaplan_meier(&times, &events);
        for (t, s) in km.times.iter().zip(&km.survival) {
            out.push_str(&format!("{g},{},{}\n", sig6(*t), sig6(*s)));
        }
    }
    out
}

pub fn fit(args: &FitArgs) -> Result<(), CliError> {
    let config = run_config(args)?;
    let schema = config.schema()?;
    let seed = config.seed()?;
    let input = config.input.as_ref().ok_or_else(|| CliError::Config("`input` is required".into()))?;
    let data = load_csv(input, &schema, &config.time_column, &config.status_column)?;
    let test = match (&config.selection, &config.test_input) {
        (Criterion::TestSample, Some(p)) => Some(load_csv(p, &schema, &config.time_column, &config.status_column)?),
        (Criterion::TestSample, None) => return Err(CliError::Config("`selection = test` needs `test_input`".into())),
        _ => None,
    };
    let seed = Seed(seed);
    let model = select(&data, test.as_ref(), config.selection, &config.pipeline, seed.child("select"))?;
    let summary = summarize_model(&model, &data)?;
    let report = if config.bootstrap > 0 {
        let bbc = BbcConfig { replicates: config.bootstrap, sign: config.bias_sign, ..BbcConfig::default() };
        bootstrap_bias_correct(&data, &model, &config.pipeline, &bbc, seed.child("bootstrap"))?
    } else {
        uncorrected(&summary, data.len())
    };

    create_dir(&config.output)?;
    let file = ModelFile::new(&model, schema, &config.time_column, &config.status_column, seed.0);
    write(&config.output.join("model.json"), &file.to_json())?;
    write(&config.output.join("selection_report.csv"), &model.report.to_csv())?;
    write(&config.output.join("group_summary.csv"), &group_summary_csv(&summary, &report, config.ci_level))?;
    let labels = model.groups(&data);
    write(&config.output.join("km_curves.csv"), &km_curves_csv(&data, &labels, model.group_count()))?;
    println!(
        "{} groups from {} initial leaves ({}, lambda {}); wrote {}",
        model.group_count(),
        model.initial_tree.n_leaves(),
        model.report.criterion,
        sig6(model.pattern.lambda),
        config.output.display()
    );
    Ok(())
}

pub fn predict(args: &PredictArgs) -> Result<(), CliError> {
    let model = ModelFile::load(&args.model)?;
    let rows = load_covariates_csv(&args.input, &model.schema)?;
    let mut out = String::from("row,leaf,group,hazard_ratio\n");
    for (i, z) in rows.iter().enumerate() {
        let leaf = model.tree.route(z);
        let g = model.group_of_leaf(leaf);
        out.push_str(&format!("{},{leaf},{g},{}\n", i + 1, sig6(model.hazard_ratio(g))));
    }
    match &args.output {
        Some(path) => write(path, &out),
        None => {
            print!("{out}");
            Ok(())
        }
    }
}

pub fn summarize(args: &SummarizeArgs) -> Result<(), CliError> {
    let model = ModelFile::load(&args.model)?;
    println!("criterion {}, lambda {}, {} groups", model.criterion, sig6(model.lambda), model.groups.len());
    print!("{}", model.render());
    if let Some(path) = &args.input {
        let data = load_csv(path, &model.schema, &model.time_column, &model.status_column)?;
        let labels: Vec<usize> = (0..data.len()).map(|i| model.group_of_leaf(model.tree.route_row(&data, i))).collect();
        let rows: Vec<usize> = (0..data.len()).collect();
        let k = model.groups.len();
        let summary = group_summaries(&data, &rows, &labels, k)?;
        println!("group,n,events,beta,hazard_ratio,se,p,median_survival");
        for r in &summary.rows {
            let (t, e): (Vec<f64>, Vec<bool>) =
                (0..data.len()).filter(|&i| labels[i] == r.group).map(|i| (data.time(i), data.event(i))).unzip();
            let median = kaplan_meier(&t, &e).median().map_or("NA".to_string(), sig6);
            let opt = |x: Option<f64>| x.map_or(String::new(), sig6);
            println!("{},{},{},{},{},{},{},{median}", r.group, r.n, r.events, sig6(r.beta), sig6(r.hazard_ratio), opt(r.se), opt(r.p));
        }
    }
    Ok(())
}

fn models(list: &str) -> Result<Vec<SimModel>, CliError> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|tag| SimModel::from_tag(tag).map_err(|e| CliError::Config(e.to_string())))
        .collect()
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    if !(0.0..1.0).contains(&args.censoring) {
        return Err(CliError::Config(format!("censoring must lie in [0, 1), got {}", args.censoring)));
    }
    let seed = Seed(args.seed);
    let out = &args.output;
    match args.study.as_str() {
        "comparison" => {
            let models = models(&args.models)?;
            let defaults = ComparisonSettings::default();
            let settings = ComparisonSettings {
                replicates: args.replicates.unwrap_or(defaults.replicates),
                n_train: args.n.unwrap_or(defaults.n_train),
                censoring: args.censoring,
                criterion: parse_selection(&args.selection)?,
                ..defaults
            };
            create_dir(out)?;
            let mut metrics = Vec::new();
            for m in models {
                let (row, reps) = run_comparison(m, &settings, seed);
                write(&out.join(format!("replicates_{}.csv", m.tag())), &replicates_csv(&reps))?;
                metrics.push(row);
            }
            let csv = metrics_csv(&metrics);
            write(&out.join("metrics.csv"), &csv)?;
            print!("{csv}");
        }
        "bias" => {
            let models = models(&args.models)?;
            let defaults = BiasSettings::default();
            let settings = BiasSettings {
                replicates: args.replicates.unwrap_or(defaults.replicates),
                n_train: args.n.unwrap_or(defaults.n_train),
                censoring: args.censoring,
                ..defaults
            };
            create_dir(out)?;
            let mut tables = Vec::new();
            for m in models {
                let table = run_bias_study(m, &settings, seed);
                write(&out.join(format!("bias_records_{}.csv", m.tag())), &bias_records_csv(&table))?;
                tables.push(table);
            }
            let csv = bias_csv(&tables);
            write(&out.join("bias.csv"), &csv)?;
            print!("{csv}");
        }
        "cutoff" => {
            let defaults = CutoffSettings::default();
            let settings = CutoffSettings {
                replicates: args.replicates.unwrap_or(defaults.replicates),
                n: args.n.unwrap_or(defaults.n),
                censoring: args.censoring,
                ..defaults
            };
            let shapes: Vec<f64> = (1..=20).map(|k| 5.0 * k as f64).collect();
            let study = run_cutoff_study(&settings, &shapes, seed);
            create_dir(out)?;
            let csv = cutoff_csv(&study);
            write(&out.join("cutoff.csv"), &csv)?;
            print!("{csv}");
        }
        "selection" => {
            let defaults = SelectionSettings::default();
            let base = SelectionSettings {
                replicates: args.replicates.unwrap_or(defaults.replicates),
                n: args.n.unwrap_or(defaults.n),
                censoring: args.censoring,
                ..defaults
            };
            let null = run_selection_study(&base, seed.child("null"));
            let balanced = run_selection_study(&SelectionSettings { betas: [1.0, -1.0, 1.0, -1.0, 1.0], ..base }, seed.child("balanced"));
            let mut csv = selection_csv("null", &null);
            csv.push_str(selection_csv("balanced", &balanced).lines().skip(1).map(|l| format!("{l}\n")).collect::<String>().as_str());
            create_dir(out)?;
            write(&out.join("selection.csv"), &csv)?;
            print!("{csv}");
        }
        other => return Err(CliError::Config(format!("unknown study `{other}` (comparison, bias, cutoff, selection)"))),
    }
    Ok(())
}

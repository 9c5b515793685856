use std::path::{Path, PathBuf};

use blersr::analysis::{
    feature_frequency_report, fit_linear_baseline, fit_polynomial_baseline, gradient,
    metrics_report, r_squared, residual_stats, sweep_curve, AnalysisError, CurveResult,
    FrequencyReport, MetricsReport, Monotonicity, OracleModel, ResidualStats, YModel,
};
use blersr::data::{
    feature_matrix, inverse_transform, load_csv, prepare, read_csv, schema_names, split_indices,
    transform_target, write_csv, LoadOptions, PrepareOptions, RawSample,
};
use blersr::expr::{default_feature_names, eval_batch, parse_expression, ExprError, LISTING_1};
use blersr::gp::{evolve, EvolutionLog};
use blersr::synth::generate_grid;
use blersr::{PolyModel, Standardizer, Tree};
use ndarray::Array2;

use crate::artifact::{Manifest, ModelArtifact};
use crate::config::RunConfig;
use crate::{write_file, CliError};

pub const SYNTH_FILE: &str = "synth.csv";
pub const TEST_SPLIT_FILE: &str = "test.csv";
pub const LOG_FILE: &str = "evolution_log.csv";
pub const METRICS_FILE: &str = "metrics.toml";
pub const BASELINES_FILE: &str = "baselines.csv";
pub const RESIDUALS_FILE: &str = "residual_histogram.csv";
pub const SENSITIVITY_FILE: &str = "sensitivity.csv";
pub const FREQUENCY_FILE: &str = "frequency.csv";
pub const FREQUENCY_SUMMARY_FILE: &str = "frequency_summary.toml";
pub const CURVES_SUMMARY_FILE: &str = "curves_summary.csv";

/// Writes `<out>/synth.csv` and returns its path and row count.
pub fn synth(cfg: &RunConfig, out: &Path) -> Result<(PathBuf, usize), CliError> {
    let samples = generate_grid(&cfg.synth.params, &cfg.synth.sweep, cfg.seed)?;
    let path = out.join(SYNTH_FILE);
    write_csv(&path, &samples, &cfg.data.columns).map_err(|e| CliError::Config(e.to_string()))?;
    println!("wrote {} rows to {}", samples.len(), path.display());
    Ok((path, samples.len()))
}

/// One row of the baseline comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineRow {
    pub model: String,
    /// Basis size for the regressions, node count for the symbolic model.
    pub size: usize,
    pub train_r2_y: f64,
    pub test_r2_y: f64,
    pub test_r2_bler: f64,
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub artifact: ModelArtifact,
    pub train: MetricsReport,
    pub test: MetricsReport,
    pub residuals: ResidualStats,
    pub baselines: Vec<BaselineRow>,
    pub log: EvolutionLog,
}

fn data_path(explicit: Option<&Path>, configured: Option<&PathBuf>) -> Result<PathBuf, CliError> {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| configured.cloned())
        .ok_or_else(|| CliError::Usage("no dataset given (use --data or [data] path)".into()))
}

fn predict_all<M: YModel<f64> + ?Sized>(model: &M, x: &Array2<f64>) -> Vec<f64> {
    x.rows()
        .into_iter()
        .map(|r| model.predict_y(&r.to_vec()))
        .collect()
}

fn bler_of(y: &[f64]) -> Vec<f64> {
    y.iter().map(|&v| inverse_transform(v)).collect()
}

fn baseline_row(
    name: &str,
    model: &PolyModel,
    train: &blersr::Dataset,
    test: &blersr::Dataset,
) -> Result<BaselineRow, AnalysisError> {
    let train_pred = predict_all(model, &train.x);
    let test_pred = predict_all(model, &test.x);
    let m = metrics_report(&test.y, &test_pred)?;
    Ok(BaselineRow {
        model: name.into(),
        size: model.basis_size(),
        train_r2_y: r_squared(&train.y, &train_pred)?,
        test_r2_y: m.r2_y,
        test_r2_bler: m.r2_bler,
    })
}

fn baselines_csv(rows: &[BaselineRow]) -> String {
    let mut s = String::from("model,size,train_r2_y,test_r2_y,test_r2_bler\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            r.model, r.size, r.train_r2_y, r.test_r2_y, r.test_r2_bler
        ));
    }
    s
}

fn metrics_section(name: &str, m: &MetricsReport) -> String {
    format!("[{name}]\n{}", m.to_text())
}

fn residuals_section(r: &ResidualStats) -> String {
    format!(
        "[residuals]\nmean_log10 = {:?}\nstd_log10 = {:?}\n",
        r.mean_log10, r.std_log10
    )
}

fn histogram_csv(r: &ResidualStats) -> String {
    let h = &r.histogram;
    let mut s = String::from("low,high,count\n");
    for (i, c) in h.counts.iter().enumerate() {
        s.push_str(&format!("{},{},{}\n", h.edges[i], h.edges[i + 1], c));
    }
    s
}

/// Loads the dataset, evolves on the training split and writes the model
/// artifact, evolution log, held-out metrics, baseline comparison and the
/// raw test rows.
pub fn fit(cfg: &RunConfig, data: Option<&Path>, out: &Path) -> Result<FitOutcome, CliError> {
    let path = data_path(data, cfg.data.path.as_ref())?;
    let opts = LoadOptions {
        columns: cfg.data.columns.clone(),
        drop_zero_bler: cfg.data.drop_zero_bler,
        require_bler: true,
    };
    let samples = load_csv(&path, &opts)?;
    let prep = PrepareOptions {
        include_bpcu: cfg.data.include_bpcu,
        test_fraction: cfg.data.test_fraction,
        seed: cfg.seed,
    };
    let (train, test) = prepare::<f64>(&samples, &prep)?;

    let (best, log) = evolve(&cfg.gp, &train)?;
    let tree = best.tree.clone();
    let train_pred = eval_batch(&tree, train.x.view())?;
    let test_pred = eval_batch(&tree, test.x.view())?;
    let train_m = metrics_report(&train.y, &train_pred)?;
    let test_m = metrics_report(&test.y, &test_pred)?;
    let residuals = residual_stats(
        &bler_of(&test.y),
        &bler_of(&test_pred),
        cfg.analyze.histogram_bins,
    )?;

    let mut baselines = Vec::new();
    let fits = [
        (
            "linear",
            fit_linear_baseline(train.x.view(), &train.y, &train.feature_names),
        ),
        (
            "polynomial_deg3",
            fit_polynomial_baseline(train.x.view(), &train.y, &train.feature_names, 3),
        ),
    ];
    for (name, fitted) in fits {
        match fitted.and_then(|m| baseline_row(name, &m, &train, &test)) {
            Ok(row) => baselines.push(row),
            Err(e) => eprintln!("warning: {name} baseline skipped: {e}"),
        }
    }
    baselines.push(BaselineRow {
        model: "symbolic_gp".into(),
        size: best.node_count,
        train_r2_y: train_m.r2_y,
        test_r2_y: test_m.r2_y,
        test_r2_bler: test_m.r2_bler,
    });

    let artifact = ModelArtifact {
        manifest: Manifest {
            format_version: 1,
            feature_names: train.feature_names.clone(),
            include_bpcu: cfg.data.include_bpcu,
            seed: cfg.seed,
            profile: cfg.profile.clone(),
            node_count: tree.node_count(),
            operator_count: tree.operator_count(),
            depth: tree.depth(),
            train_mse: best.mse,
            train_fitness: best.fitness,
            parsimony_lambda: cfg.gp.parsimony_lambda,
        },
        tree,
        standardizer: train.standardizer.clone(),
    };
    artifact.save(out)?;
    write_file(&out.join(LOG_FILE), &log.to_csv())?;
    write_file(
        &out.join(METRICS_FILE),
        &format!(
            "{}\n{}\n{}",
            metrics_section("test", &test_m),
            metrics_section("train", &train_m),
            residuals_section(&residuals)
        ),
    )?;
    write_file(&out.join(RESIDUALS_FILE), &histogram_csv(&residuals))?;
    write_file(&out.join(BASELINES_FILE), &baselines_csv(&baselines))?;
    let (_, test_idx) = split_indices(samples.len(), cfg.data.test_fraction, cfg.seed)?;
    let test_rows: Vec<RawSample> = test_idx.iter().map(|&i| samples[i]).collect();
    write_csv(&out.join(TEST_SPLIT_FILE), &test_rows, &cfg.data.columns)?;

    println!("best: {}", blersr::gp::describe(&best));
    println!(
        "test r2_y = {:.6}, r2_bler = {:.6}",
        test_m.r2_y, test_m.r2_bler
    );
    Ok(FitOutcome {
        artifact,
        train: train_m,
        test: test_m,
        residuals,
        baselines,
        log,
    })
}

fn standardized(model: &ModelArtifact, samples: &[RawSample]) -> Result<Array2<f64>, CliError> {
    let raw = feature_matrix(samples, &model.manifest.feature_names)?;
    Ok(model.standardizer.apply(&raw)?)
}

/// Appends `Y_pred` and `BLER_pred` to every record of `input`, preserving
/// the original columns and row order. Returns the predicted BLER values.
pub fn predict(
    cfg: &RunConfig,
    model_dir: &Path,
    input: &Path,
    output: &Path,
) -> Result<Vec<f64>, CliError> {
    let model = ModelArtifact::load(model_dir)?;
    let opts = LoadOptions {
        columns: cfg.data.columns.clone(),
        drop_zero_bler: false,
        require_bler: false,
    };
    let table = read_csv(input, &opts)?;
    let x = standardized(&model, &table.samples)?;
    let y = eval_batch(&model.tree, x.view())?;
    let bler = bler_of(&y);

    let file = std::fs::File::create(output)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", output.display())))?;
    let mut w = csv::Writer::from_writer(file);
    let csv_err = |e: csv::Error| CliError::Config(format!("{}: {e}", output.display()));
    let mut header = table.headers.clone();
    header.push_field("Y_pred");
    header.push_field("BLER_pred");
    w.write_record(&header).map_err(csv_err)?;
    for ((rec, yv), bv) in table.records.iter().zip(&y).zip(&bler) {
        let mut r = rec.clone();
        r.push_field(&yv.to_string());
        r.push_field(&bv.to_string());
        w.write_record(&r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::Config(e.to_string()))?;
    println!("wrote {} predictions to {}", bler.len(), output.display());
    Ok(bler)
}

#[derive(Debug, Clone)]
pub struct AnalyzeOutcome {
    pub metrics: MetricsReport,
    pub residuals: ResidualStats,
    /// Per feature: derivative at the training mean and mean absolute
    /// derivative over the analyzed rows.
    pub sensitivity: Vec<(String, f64, f64)>,
    pub frequency: FrequencyReport,
}

pub fn analyze(
    cfg: &RunConfig,
    model: Option<&Path>,
    data: Option<&Path>,
    out: &Path,
) -> Result<AnalyzeOutcome, CliError> {
    let model_dir = model
        .map(Path::to_path_buf)
        .or_else(|| cfg.analyze.model.clone())
        .ok_or_else(|| CliError::Usage("no model given (use --model or [analyze] model)".into()))?;
    let data_path = data_path(data, cfg.analyze.data.as_ref().or(cfg.data.path.as_ref()))?;
    let model = ModelArtifact::load(&model_dir)?;
    let opts = LoadOptions {
        columns: cfg.data.columns.clone(),
        drop_zero_bler: cfg.data.drop_zero_bler,
        require_bler: true,
    };
    let samples = load_csv(&data_path, &opts)?;
    let x = standardized(&model, &samples)?;
    let y_true = samples
        .iter()
        .map(|s| transform_target(s.bler))
        .collect::<Result<Vec<_>, _>>()?;
    let y_pred = eval_batch(&model.tree, x.view())?;
    let metrics = metrics_report(&y_true, &y_pred)?;
    let residuals = residual_stats(
        &bler_of(&y_true),
        &bler_of(&y_pred),
        cfg.analyze.histogram_bins,
    )?;

    let h = cfg.analyze.sensitivity_step;
    let names = &model.manifest.feature_names;
    let at_mean = gradient(&model.tree, &vec![0.0; names.len()], h)?;
    let mut mean_abs = vec![0.0; names.len()];
    for row in x.rows() {
        for (acc, g) in mean_abs
            .iter_mut()
            .zip(gradient(&model.tree, &row.to_vec(), h)?)
        {
            *acc += g.abs();
        }
    }
    let n = x.nrows().max(1) as f64;
    let sensitivity: Vec<(String, f64, f64)> = names
        .iter()
        .zip(at_mean)
        .zip(mean_abs)
        .map(|((name, g), a)| (name.clone(), g, a / n))
        .collect();
    let frequency = feature_frequency_report(&model.tree);

    write_file(
        &out.join(METRICS_FILE),
        &format!(
            "{}\n{}",
            metrics_section("data", &metrics),
            residuals_section(&residuals)
        ),
    )?;
    write_file(&out.join(RESIDUALS_FILE), &histogram_csv(&residuals))?;
    let mut s = String::from("feature,dy_dx_at_mean,mean_abs_dy_dx\n");
    for (name, g, a) in &sensitivity {
        s.push_str(&format!("{name},{g},{a}\n"));
    }
    write_file(&out.join(SENSITIVITY_FILE), &s)?;
    write_file(&out.join(FREQUENCY_FILE), &frequency.to_csv())?;
    println!(
        "r2_y = {:.6}, r2_bler = {:.6}, n = {}",
        metrics.r2_y, metrics.r2_bler, metrics.n_test
    );
    Ok(AnalyzeOutcome {
        metrics,
        residuals,
        sensitivity,
        frequency,
    })
}

fn file_stem(name: &str, index: usize) -> String {
    let clean: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect();
    if clean.is_empty() {
        format!("curve_{index}")
    } else {
        format!("curve_{clean}")
    }
}

/// Runs every configured sweep; each writes `curve_<name>.csv` and a line
/// in the summary.
pub fn curves(
    cfg: &RunConfig,
    model: Option<&str>,
    out: &Path,
) -> Result<Vec<CurveResult>, CliError> {
    if cfg.curves.is_empty() {
        return Err(CliError::Config("no [[curves]] entries configured".into()));
    }
    let mut results = Vec::new();
    let mut summary = String::from("name,feature,model,points,monotonicity\n");
    for (i, entry) in cfg.curves.iter().enumerate() {
        let which = entry
            .model
            .clone()
            .or_else(|| model.map(str::to_string))
            .or_else(|| cfg.analyze.model.as_ref().map(|p| p.display().to_string()))
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "curve {i} has no model (set `model` or pass --model)"
                ))
            })?;
        let result = if which == "oracle" {
            let std = Standardizer::identity(schema_names(cfg.data.include_bpcu));
            let oracle = OracleModel::new(cfg.synth.params.clone(), std.clone())?;
            sweep_curve(&oracle, &std, &entry.spec)?
        } else {
            let m = ModelArtifact::load(Path::new(&which))?;
            sweep_curve(&m.tree, &m.standardizer, &entry.spec)?
        };
        write_file(
            &out.join(format!("{}.csv", file_stem(&entry.spec.name, i))),
            &result.to_csv(),
        )?;
        summary.push_str(&format!(
            "{},{},{},{},{}\n",
            entry.spec.name,
            entry.spec.feature,
            which,
            result.points.len(),
            result.monotonicity
        ));
        println!(
            "{} ({}): {}",
            entry.spec.name, entry.spec.feature, result.monotonicity
        );
        results.push(result);
    }
    write_file(&out.join(CURVES_SUMMARY_FILE), &summary)?;
    Ok(results)
}

fn parse_with_fallback(text: &str) -> Result<Tree, CliError> {
    match parse_expression(text, &default_feature_names()) {
        Err(ExprError::UnknownIdentifier { .. }) => {
            Ok(parse_expression(text, &schema_names(true))?)
        }
        other => Ok(other?),
    }
}

/// Feature-frequency table plus node-count summary of an expression file
/// (the bundled listing when `expr` is absent).
pub fn freq(
    expr: Option<&Path>,
    model: Option<&Path>,
    out: &Path,
) -> Result<FrequencyReport, CliError> {
    let text = match expr {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| CliError::Data(format!("cannot read {}: {e}", p.display())))?,
        None => LISTING_1.to_string(),
    };
    let tree = match model {
        Some(dir) => parse_expression(
            text.trim(),
            &ModelArtifact::load(dir)?.manifest.feature_names,
        )?,
        None => parse_with_fallback(text.trim())?,
    };
    let report = feature_frequency_report(&tree);
    write_file(&out.join(FREQUENCY_FILE), &report.to_csv())?;
    let constants = report.node_count - report.operator_count - report.total_variables;
    write_file(
        &out.join(FREQUENCY_SUMMARY_FILE),
        &format!(
            "# every operator, variable and constant occurrence counts as one node\n\
             node_count = {}\noperator_count = {}\nterminal_count = {}\nvariable_count = {}\nconstant_count = {}\n",
            report.node_count,
            report.operator_count,
            report.node_count - report.operator_count,
            report.total_variables,
            constants
        ),
    )?;
    print!("{}", report.to_csv());
    Ok(report)
}

/// Monotonicity of every curve, for quick checks.
pub fn flags(results: &[CurveResult]) -> Vec<Monotonicity> {
    results.iter().map(|r| r.monotonicity).collect()
}

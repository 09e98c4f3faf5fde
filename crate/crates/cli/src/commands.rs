//! Subcommand implementations: parse inputs, call the library, emit
//! provenance-stamped CSV/SVG files, and print a short summary per run.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};

use hdlda::classifiers::{
    fit_bayes, fit_corrected_lda, fit_corrected_rlda, fit_lda, fit_naive_bayes, fit_rlda,
    predict, PooledStats,
};
use hdlda::lambda::{default_lambda_grid, log_spaced_grid, select_lambda, select_lambda_cv};
use hdlda::linalg::sym_eigenvalues_desc;
use hdlda::simulate::{
    derive_seed, gen_covariance, gen_means, run_experiment, run_heatmap, ClassifierArm,
    ExperimentConfig, ExperimentResult, HeatmapConfig, LambdaChoice, MeanSpec, MEAN_SEED_INDEX,
};
use hdlda::stats::normal_cdf;
use hdlda::theory::{rate_corrected_rlda_from_point, rate_rlda_from_point, TheoryPoint};
use hdlda::types::{make_spectral_model, LabeledDataset, ProblemSpec, ProblemSpecConfig};
use hdlda::verify::{run_verification, VerifyOptions};
use hdlda::{Error, Result};

use crate::config::{parse_config, ClassifyMethod, TheoryConfig};
use crate::output::{
    file_hash, fmt_num, fmt_opt, heatmap_svg, line_plot_svg, prepare_path, write_bytes,
    write_csv, Provenance, Series,
};

/// Writes an SVG with the provenance embedded as a leading XML comment.
fn write_svg(path: &Path, provenance: &Provenance, svg: &str) -> Result<()> {
    let body = format!("<!--\n{}-->\n{svg}", provenance.header_lines());
    write_bytes(path, body.as_bytes())
}

/// Summary-row λ: the exact value when an arm used one λ everywhere
/// (fixed arms), otherwise the mean of the per-replicate selections.
fn representative_lambda(values: &[f64]) -> f64 {
    match values.first() {
        None => f64::NAN,
        Some(&first) if values.iter().all(|&l| l == first) => first,
        _ => values.iter().sum::<f64>() / values.len() as f64,
    }
}

// ---------------------------------------------------------------------------
// theory
// ---------------------------------------------------------------------------

pub fn cmd_theory(
    config_path: &Path,
    out_dir: &Path,
    seed_override: Option<u64>,
    plot: bool,
    force: bool,
) -> Result<()> {
    let cfg: TheoryConfig = parse_config(config_path)?;
    cfg.validate()?;
    let (y1, y2) = cfg.ratios()?;
    let seed = seed_override.unwrap_or(cfg.seed);

    let cov = gen_covariance(&cfg.covariance, cfg.p)?;
    let mean_spec = MeanSpec {
        model: cfg.mean.clone(),
        // Separation Δ ↔ two-class Gaussian error Φ(−Δ/2).
        target_bayes_error: normal_cdf(-cfg.delta / 2.0),
    };
    let (mu1, mu2) = gen_means(&mean_spec, &cov, derive_seed(seed, MEAN_SEED_INDEX))?;
    let spec = ProblemSpec::new(mu1, mu2, cov)?;
    let model = make_spectral_model(&spec)?;

    let grid = cfg.lambda_grid.values()?;
    let mut rows = Vec::with_capacity(grid.len());
    let mut curves: [Vec<(f64, f64)>; 4] = Default::default();
    for &lambda in &grid {
        let point = TheoryPoint::evaluate(&model, y1, y2, lambda)?;
        let rate = rate_rlda_from_point(&point);
        let corrected = rate_corrected_rlda_from_point(&point);
        rows.push(vec![
            fmt_num(lambda),
            fmt_num(y1),
            fmt_num(y2),
            fmt_num(point.delta),
            fmt_num(point.m0),
            fmt_num(point.m0_prime),
            fmt_num(point.r1),
            fmt_num(point.r2),
            fmt_num(point.big_h1),
            fmt_num(point.big_h2),
            fmt_num(rate.class1),
            fmt_num(rate.class2),
            fmt_num(rate.total),
            fmt_num(corrected),
        ]);
        curves[0].push((lambda, rate.class1));
        curves[1].push((lambda, rate.class2));
        curves[2].push((lambda, rate.total));
        curves[3].push((lambda, corrected));
    }

    let provenance = Provenance {
        config_hash: file_hash(config_path)?,
        seed,
    };
    let csv_path = prepare_path(out_dir, "theory.csv", force)?;
    write_csv(
        &csv_path,
        &provenance,
        &[
            "lambda", "y1", "y2", "delta", "m0", "m0_prime", "r1", "r2", "h1", "h2",
            "rate_class1", "rate_class2", "rate_total", "rate_corrected",
        ],
        &rows,
    )?;
    println!("wrote {} ({} rows)", csv_path.display(), rows.len());

    if plot {
        let labels = ["rate_class1", "rate_class2", "rate_total", "rate_corrected"];
        let series: Vec<Series> = labels
            .iter()
            .zip(curves)
            .map(|(label, points)| Series {
                label: (*label).into(),
                points,
            })
            .collect();
        let svg = line_plot_svg(
            "limit error rates vs ridge parameter",
            "lambda",
            "error rate",
            &series,
            cfg.lambda_grid.log,
        )?;
        let svg_path = prepare_path(out_dir, "theory.svg", force)?;
        write_svg(&svg_path, &provenance, &svg)?;
        println!("wrote {}", svg_path.display());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

pub fn cmd_simulate(
    config_path: &Path,
    out_dir: &Path,
    seed_override: Option<u64>,
    replicates_override: Option<usize>,
    plot: bool,
    force: bool,
) -> Result<()> {
    let mut cfg: ExperimentConfig = parse_config(config_path)?;
    if let Some(seed) = seed_override {
        cfg.seed = seed;
    }
    if let Some(replicates) = replicates_override {
        cfg.replicates = replicates;
    }
    let result = run_experiment(&cfg)?;
    let provenance = Provenance {
        config_hash: file_hash(config_path)?,
        seed: cfg.seed,
    };
    let scenario_id = format!("{}-{}", provenance.config_hash, cfg.seed);

    let mut long_rows = Vec::new();
    let mut summary_rows = Vec::new();
    for arm in &result.arms {
        if let Some(reason) = &arm.skipped {
            eprintln!("arm {} skipped: {}", arm.label, reason);
            continue;
        }
        for (r, rep) in arm.replicates.iter().enumerate() {
            long_rows.push(vec![
                scenario_id.clone(),
                r.to_string(),
                arm.label.clone(),
                fmt_num(arm.lambdas[r]),
                fmt_num(rep.err_class1),
                fmt_num(rep.err_class2),
                fmt_num(rep.err_total),
            ]);
        }
        let gap = arm.theory.map(|t| (arm.mean_total - t).abs());
        summary_rows.push(vec![
            arm.label.clone(),
            fmt_num(representative_lambda(&arm.lambdas)),
            fmt_num(arm.mean_total),
            fmt_num(arm.sd_total),
            fmt_opt(arm.theory),
            fmt_opt(gap),
        ]);
    }

    let long_path = prepare_path(out_dir, "simulate_long.csv", force)?;
    write_csv(
        &long_path,
        &provenance,
        &["scenario_id", "replicate", "classifier", "lambda", "err1", "err2", "err_total"],
        &long_rows,
    )?;
    let summary_path = prepare_path(out_dir, "simulate_summary.csv", force)?;
    write_csv(
        &summary_path,
        &provenance,
        &["classifier", "lambda", "mean", "sd", "theory", "abs_gap"],
        &summary_rows,
    )?;
    println!(
        "delta={:.6} replicates={} arms={} wall={:.2}s",
        result.delta,
        cfg.replicates,
        result.arms.len(),
        result.wall_time_s
    );
    println!("wrote {}", long_path.display());
    println!("wrote {}", summary_path.display());

    if plot {
        let series = simulate_series(&result);
        let log_x = series
            .iter()
            .flat_map(|s| s.points.iter())
            .all(|&(x, _)| x > 0.0);
        let svg = line_plot_svg(
            "empirical vs predicted error",
            "lambda",
            "error rate",
            &series,
            log_x,
        )?;
        let svg_path = prepare_path(out_dir, "simulate.svg", force)?;
        write_svg(&svg_path, &provenance, &svg)?;
        println!("wrote {}", svg_path.display());
    }
    Ok(())
}

/// Builds plot series from arm results: arms sharing a label form a curve
/// over their λ values; single-point arms become flat reference lines.
fn simulate_series(result: &ExperimentResult) -> Vec<Series> {
    // (label, λ, empirical mean, theory) per live arm, insertion-ordered.
    let mut groups: Vec<(String, Vec<(f64, f64, Option<f64>)>)> = Vec::new();
    for arm in &result.arms {
        if arm.skipped.is_some() {
            continue;
        }
        let entry = (representative_lambda(&arm.lambdas), arm.mean_total, arm.theory);
        match groups.iter_mut().find(|(label, _)| *label == arm.label) {
            Some((_, points)) => points.push(entry),
            None => groups.push((arm.label.clone(), vec![entry])),
        }
    }
    let lambda_range = groups
        .iter()
        .flat_map(|(_, pts)| pts.iter().map(|&(l, _, _)| l))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), l| {
            (lo.min(l), hi.max(l))
        });
    let span = if lambda_range.0.is_finite() && lambda_range.1 > lambda_range.0 {
        lambda_range
    } else {
        (0.0, 1.0)
    };

    let mut series = Vec::new();
    for (label, mut points) in groups {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.len() >= 2 {
            series.push(Series {
                label: label.clone(),
                points: points.iter().map(|&(l, m, _)| (l, m)).collect(),
            });
            let theory: Vec<(f64, f64)> = points
                .iter()
                .filter_map(|&(l, _, t)| t.map(|t| (l, t)))
                .collect();
            if theory.len() >= 2 {
                series.push(Series {
                    label: format!("{label} (theory)"),
                    points: theory,
                });
            }
        } else if let Some(&(_, m, t)) = points.first() {
            series.push(Series {
                label,
                points: vec![(span.0, m), (span.1, m)],
            });
            if let Some(t) = t {
                series.push(Series {
                    label: "(theory)".into(),
                    points: vec![(span.0, t), (span.1, t)],
                });
            }
        }
    }
    series
}

// ---------------------------------------------------------------------------
// heatmap
// ---------------------------------------------------------------------------

pub fn cmd_heatmap(
    config_path: &Path,
    out_dir: &Path,
    seed_override: Option<u64>,
    replicates_override: Option<usize>,
    plot: bool,
    force: bool,
) -> Result<()> {
    let mut cfg: HeatmapConfig = parse_config(config_path)?;
    if let Some(seed) = seed_override {
        cfg.seed = seed;
    }
    if let Some(replicates) = replicates_override {
        cfg.replicates = replicates;
    }
    let result = run_heatmap(&cfg)?;
    let provenance = Provenance {
        config_hash: file_hash(config_path)?,
        seed: cfg.seed,
    };

    let stems = arm_file_stems(&cfg.arms);
    let mut header: Vec<String> = vec!["rho".into()];
    header.extend(result.p_grid.iter().map(|p| format!("p{p}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();

    for (stem, arm) in stems.iter().zip(&result.arms) {
        let rows: Vec<Vec<String>> = result
            .rho_grid
            .iter()
            .zip(&arm.values)
            .map(|(rho, row)| {
                std::iter::once(fmt_num(*rho))
                    .chain(row.iter().map(|&v| fmt_num(v)))
                    .collect()
            })
            .collect();
        let csv_path = prepare_path(out_dir, &format!("heatmap_{stem}.csv"), force)?;
        write_csv(&csv_path, &provenance, &header_refs, &rows)?;
        println!("wrote {}", csv_path.display());
        if plot {
            let svg = heatmap_svg(
                &format!("mean error: {}", arm.label),
                &result.rho_grid,
                &result.p_grid,
                &arm.values,
            )?;
            let svg_path = prepare_path(out_dir, &format!("heatmap_{stem}.svg"), force)?;
            write_svg(&svg_path, &provenance, &svg)?;
            println!("wrote {}", svg_path.display());
        }
    }
    Ok(())
}

/// Unique, filesystem-safe stems for per-arm outputs. Fixed-λ ridge arms
/// carry the λ value so two fixed arms never collide.
fn arm_file_stems(arms: &[ClassifierArm]) -> Vec<String> {
    let raw: Vec<String> = arms
        .iter()
        .map(|arm| {
            let base = match arm {
                ClassifierArm::Rlda(a) => match &a.lambda {
                    LambdaChoice::Fixed(l) => format!("rlda_{l}"),
                    _ => arm.label(),
                },
                ClassifierArm::CorrectedRlda(a) => match &a.lambda {
                    LambdaChoice::Fixed(l) => format!("corrected_rlda_{l}"),
                    _ => arm.label(),
                },
                ClassifierArm::OracleRlda(a) => format!("oracle_rlda_{}", a.lambda),
                _ => arm.label(),
            };
            base.chars()
                .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
                .collect::<String>()
        })
        .collect();
    let mut out = Vec::with_capacity(raw.len());
    for (i, stem) in raw.iter().enumerate() {
        let dups_before = raw[..i].iter().filter(|s| *s == stem).count();
        if dups_before == 0 && !raw[i + 1..].contains(stem) {
            out.push(stem.clone());
        } else {
            out.push(format!("{stem}_{}", dups_before + 1));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// select-lambda
// ---------------------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
pub fn cmd_select_lambda(
    data_path: &Path,
    out_dir: &Path,
    grid_min: Option<f64>,
    grid_max: Option<f64>,
    grid_points: Option<usize>,
    k: usize,
    seed: u64,
    plot: bool,
    force: bool,
) -> Result<()> {
    let data = LabeledDataset::from_csv_path(data_path)?;
    let grid = match (grid_min, grid_max, grid_points) {
        (None, None, None) => {
            let stats = PooledStats::from_dataset(&data)?;
            let eigs: Vec<f64> = sym_eigenvalues_desc(stats.pooled())?
                .iter()
                .map(|&e| e.max(0.0))
                .collect();
            default_lambda_grid(&eigs)?
        }
        (Some(lo), Some(hi), Some(points)) => {
            if !(lo > 0.0 && hi > lo) || points < 2 {
                return Err(Error::Config(format!(
                    "grid needs 0 < min < max and at least 2 points, got [{lo}, {hi}] with {points}"
                )));
            }
            log_spaced_grid(lo, hi, points)
        }
        _ => {
            return Err(Error::Config(
                "--grid-min, --grid-max, and --grid-points must be given together".into(),
            ))
        }
    };

    let estimates = select_lambda(&data, &grid)?;
    let cv = select_lambda_cv(&data, &grid, k, seed)?;

    let rows: Vec<Vec<String>> = grid
        .iter()
        .enumerate()
        .map(|(i, &lambda)| {
            vec![
                fmt_num(lambda),
                fmt_num(estimates.objective[i]),
                fmt_num(cv.mean_errors[i]),
            ]
        })
        .collect();
    let provenance = Provenance {
        config_hash: file_hash(data_path)?,
        seed,
    };
    let csv_path = prepare_path(out_dir, "select_lambda.csv", force)?;
    write_csv(&csv_path, &provenance, &["lambda", "objective", "cv_error"], &rows)?;

    let best = estimates
        .objective
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let cv_best = cv.mean_errors.iter().cloned().fold(f64::INFINITY, f64::min);
    println!(
        "lambda_opt={} objective={} lambda_cv={} cv_error={} (grid of {} points)",
        estimates.lambda_opt,
        best,
        cv.lambda_cv,
        cv_best,
        grid.len()
    );
    println!("wrote {}", csv_path.display());

    if plot {
        let series = vec![
            Series {
                label: "plug-in objective".into(),
                points: grid.iter().cloned().zip(estimates.objective.iter().cloned()).collect(),
            },
            Series {
                label: format!("{k}-fold CV error"),
                points: grid.iter().cloned().zip(cv.mean_errors.iter().cloned()).collect(),
            },
        ];
        let svg = line_plot_svg(
            "ridge parameter selection",
            "lambda",
            "estimated error",
            &series,
            true,
        )?;
        let svg_path = prepare_path(out_dir, "select_lambda.svg", force)?;
        write_svg(&svg_path, &provenance, &svg)?;
        println!("wrote {}", svg_path.display());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

/// Where the classification rule comes from: a population config (Bayes
/// rule) or a labeled training CSV (fitted rule).
pub enum ModelSource {
    Config(PathBuf),
    Train(PathBuf),
}

pub fn cmd_classify(
    source: ModelSource,
    method: Option<ClassifyMethod>,
    lambda: Option<f64>,
    data_path: &Path,
    out_dir: &Path,
    force: bool,
) -> Result<()> {
    let (clf, model_path) = match source {
        ModelSource::Config(path) => {
            if method.is_some() || lambda.is_some() {
                return Err(Error::Config(
                    "--method and --lambda apply only to --train mode".into(),
                ));
            }
            let cfg: ProblemSpecConfig = parse_config(&path)?;
            let spec = ProblemSpec::from_config(&cfg)?;
            (fit_bayes(&spec)?, path)
        }
        ModelSource::Train(path) => {
            let method = method.ok_or_else(|| {
                Error::Config("--method is required when training from --train".into())
            })?;
            let needs_lambda =
                matches!(method, ClassifyMethod::Rlda | ClassifyMethod::CorrectedRlda);
            if needs_lambda && lambda.is_none() {
                return Err(Error::Config(format!(
                    "--lambda is required for method {method:?}"
                )));
            }
            if !needs_lambda && lambda.is_some() {
                return Err(Error::Config(
                    "--lambda only applies to rlda and corrected_rlda".into(),
                ));
            }
            let data = LabeledDataset::from_csv_path(&path)?;
            let clf = match method {
                ClassifyMethod::Lda => fit_lda(&data)?,
                ClassifyMethod::CorrectedLda => fit_corrected_lda(&data)?,
                ClassifyMethod::Rlda => fit_rlda(&data, lambda.unwrap())?,
                ClassifyMethod::CorrectedRlda => fit_corrected_rlda(&data, lambda.unwrap())?,
                ClassifyMethod::NaiveBayes => fit_naive_bayes(&data)?,
            };
            (clf, path)
        }
    };

    let x = read_feature_matrix(data_path)?;
    if x.ncols() != clf.p() {
        return Err(Error::Config(format!(
            "{}: rows have {} features but the rule expects {}",
            data_path.display(),
            x.ncols(),
            clf.p()
        )));
    }
    let mut rows = Vec::with_capacity(x.nrows());
    for i in 0..x.nrows() {
        let point: DVector<f64> = x.row(i).transpose();
        rows.push(vec![predict(&clf, &point)?.to_string()]);
    }

    let provenance = Provenance {
        config_hash: file_hash(&model_path)?,
        seed: 0,
    };
    let csv_path = prepare_path(out_dir, "labels.csv", force)?;
    write_csv(&csv_path, &provenance, &["label"], &rows)?;
    println!("wrote {} ({} labels)", csv_path.display(), rows.len());
    Ok(())
}

/// Reads a feature-only CSV (no label column); a non-numeric first row is
/// treated as a header.
fn read_feature_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record =
            record.map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> =
            record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(values) => {
                if let Some(first) = rows.first() {
                    if values.len() != first.len() {
                        return Err(Error::Config(format!(
                            "{}: row {} has {} fields, expected {}",
                            path.display(),
                            idx + 1,
                            values.len(),
                            first.len()
                        )));
                    }
                }
                rows.push(values);
            }
            Err(e) if idx == 0 => {
                // Header row: field names are not numbers.
                let _ = e;
            }
            Err(e) => {
                return Err(Error::Config(format!(
                    "{}: row {}: {e}",
                    path.display(),
                    idx + 1
                )))
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::Config(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    let p = rows[0].len();
    Ok(DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]))
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

pub fn cmd_verify(draws: usize, seed: u64, perturb_m0: f64) -> Result<()> {
    let report = run_verification(&VerifyOptions {
        m0_offset: perturb_m0,
        wishart_draws: draws,
        seed,
    })?;
    println!(
        "{:<24} {:>13} {:>13}  status",
        "check", "observed", "tolerance"
    );
    for check in &report.checks {
        println!(
            "{:<24} {:>13.4e} {:>13.4e}  {}",
            check.name,
            check.observed,
            check.tolerance,
            if check.passed { "pass" } else { "FAIL" }
        );
        if !check.detail.is_empty() {
            println!("    {}", check.detail);
        }
    }
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    if failed == 0 {
        println!("all {} checks passed", report.checks.len());
        Ok(())
    } else {
        Err(Error::Verification(format!(
            "{failed} of {} checks failed",
            report.checks.len()
        )))
    }
}

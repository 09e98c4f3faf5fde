//! End-to-end tests of the `hdlda` binary: exit codes, file contracts,
//! provenance headers, and byte-level reproducibility.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output};

use nalgebra::{DMatrix, DVector};

use hdlda::simulate::sample_dataset;
use hdlda::types::ProblemSpec;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdlda"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("process should exit normally")
}

fn write_file(path: &Path, content: &str) {
    fs::write(path, content).unwrap();
}

/// Non-comment lines of an emitted CSV.
fn csv_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

fn theory_config() -> &'static str {
    r#"{
        "delta": 2.0,
        "covariance": { "identity": { "sigma2": 1.0 } },
        "p": 50,
        "mean": { "first_coordinate": {} },
        "lambda_grid": { "min": 0.1, "max": 2.0, "points": 8 },
        "n1": 50,
        "n2": 100
    }"#
}

fn simulate_config() -> &'static str {
    r#"{
        "covariance": { "ar1": { "rho": 0.3 } },
        "mean": { "model": { "first_coordinate": {} } },
        "p": 30,
        "n1": 40,
        "n2": 40,
        "arms": [
            { "lda": {} },
            { "rlda": { "lambda": { "fixed": 0.5 } } },
            { "rlda": { "lambda": { "fixed": 1.0 } } }
        ],
        "replicates": 5,
        "seed": 11
    }"#
}

#[test]
fn theory_emits_provenance_and_full_schema() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("theory.json");
    write_file(&config, theory_config());

    let out = run(&[
        "theory",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--plot",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));

    let csv = dir.path().join("theory.csv");
    let raw = fs::read_to_string(&csv).unwrap();
    assert!(raw.starts_with("# config-hash: "));
    assert!(raw.contains("\n# seed: 0\n"));
    assert!(raw.contains("\n# artifact-version: "));
    let lines = csv_lines(&csv);
    assert_eq!(
        lines[0],
        "lambda,y1,y2,delta,m0,m0_prime,r1,r2,h1,h2,rate_class1,rate_class2,rate_total,rate_corrected"
    );
    assert_eq!(lines.len(), 1 + 8, "one header plus one row per grid point");
    for line in &lines[1..] {
        assert_eq!(line.split(',').count(), 14);
    }
    assert!(dir.path().join("theory.svg").exists());
}

#[test]
fn existing_outputs_need_force_and_force_reproduces_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("theory.json");
    write_file(&config, theory_config());
    let out_dir = dir.path().join("out");
    let args = [
        "theory",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ];

    assert_eq!(exit_code(&run(&args)), 0);
    let first = fs::read(out_dir.join("theory.csv")).unwrap();

    let blocked = run(&args);
    assert_eq!(exit_code(&blocked), 2);
    assert!(stderr(&blocked).contains("--force"), "stderr: {}", stderr(&blocked));

    let forced = run(&[&args[..], &["--force"]].concat());
    assert_eq!(exit_code(&forced), 0);
    let second = fs::read(out_dir.join("theory.csv")).unwrap();
    assert_eq!(first, second, "rerun must be byte-identical");
}

#[test]
fn config_errors_name_the_problem_field() {
    let dir = tempfile::tempdir().unwrap();
    let out_arg = dir.path().to_str().unwrap().to_string();

    let missing = dir.path().join("missing.json");
    write_file(
        &missing,
        r#"{
            "covariance": { "identity": { "sigma2": 1.0 } },
            "p": 50,
            "mean": { "first_coordinate": {} },
            "lambda_grid": { "min": 0.1, "max": 2.0, "points": 8 },
            "y1": 0.5, "y2": 0.5
        }"#,
    );
    let out = run(&["theory", "--config", missing.to_str().unwrap(), "--out", &out_arg]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("delta"), "stderr: {}", stderr(&out));

    let unknown = dir.path().join("unknown.json");
    write_file(
        &unknown,
        &theory_config().replace("\"delta\": 2.0,", "\"delta\": 2.0, \"detla\": 1.0,"),
    );
    let out = run(&["theory", "--config", unknown.to_str().unwrap(), "--out", &out_arg]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("detla"), "stderr: {}", stderr(&out));
}

#[test]
fn simulate_is_reproducible_and_seed_override_changes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sim.json");
    write_file(&config, simulate_config());
    let run_sim = |name: &str, extra: &[&str]| {
        let out_dir = dir.path().join(name);
        let mut args = vec![
            "simulate",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ];
        args.extend_from_slice(extra);
        let out = run(&args);
        assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
        (
            fs::read(out_dir.join("simulate_long.csv")).unwrap(),
            fs::read(out_dir.join("simulate_summary.csv")).unwrap(),
        )
    };

    let (long_a, summary_a) = run_sim("a", &[]);
    let (long_b, summary_b) = run_sim("b", &["--jobs", "1"]);
    assert_eq!(long_a, long_b, "same seed must give identical bytes");
    assert_eq!(summary_a, summary_b);

    let (long_c, _) = run_sim("c", &["--seed", "999"]);
    assert_ne!(long_a, long_c, "--seed override must change outputs");

    let lines = csv_lines(&dir.path().join("a").join("simulate_long.csv"));
    assert_eq!(
        lines[0],
        "scenario_id,replicate,classifier,lambda,err1,err2,err_total"
    );
    assert_eq!(lines.len(), 1 + 3 * 5, "three arms x five replicates");
    let summary = csv_lines(&dir.path().join("a").join("simulate_summary.csv"));
    assert_eq!(summary[0], "classifier,lambda,mean,sd,theory,abs_gap");
    assert_eq!(summary.len(), 1 + 3);
}

#[test]
fn heatmap_writes_one_matrix_per_arm() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("heat.json");
    write_file(
        &config,
        r#"{
            "p_grid": [10, 20],
            "rho_grid": [0.0, 0.4],
            "mean": { "model": { "first_coordinate": {} } },
            "n1": 30,
            "n2": 30,
            "arms": [ { "lda": {} }, { "rlda": { "lambda": { "fixed": 0.5 } } } ],
            "replicates": 2,
            "seed": 4
        }"#,
    );
    let out = run(&[
        "heatmap",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--plot",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));

    for name in ["heatmap_lda", "heatmap_rlda_0_5"] {
        let lines = csv_lines(&dir.path().join(format!("{name}.csv")));
        assert_eq!(lines[0], "rho,p10,p20");
        assert_eq!(lines.len(), 1 + 2, "one row per rho value");
        assert!(dir.path().join(format!("{name}.svg")).exists());
    }
}

/// Builds a small two-class Gaussian dataset and writes its labeled CSV.
fn labeled_csv(path: &Path, p: usize, n: usize, seed: u64) {
    let mut mu1 = DVector::zeros(p);
    mu1[0] = 1.5;
    let spec = ProblemSpec::from_dense(mu1, DVector::zeros(p), DMatrix::identity(p, p)).unwrap();
    let data = sample_dataset(&spec, n, n, seed).unwrap();
    let mut file = fs::File::create(path).unwrap();
    data.to_csv_writer(&mut file).unwrap();
}

#[test]
fn select_lambda_reports_choices_and_grid_csv() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("train.csv");
    labeled_csv(&data, 10, 40, 21);

    let out = run(&[
        "select-lambda",
        "--data",
        data.to_str().unwrap(),
        "--grid-min",
        "0.05",
        "--grid-max",
        "5",
        "--grid-points",
        "12",
        "--k",
        "4",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("lambda_opt="), "stdout: {text}");
    assert!(text.contains("lambda_cv="), "stdout: {text}");

    let lines = csv_lines(&dir.path().join("select_lambda.csv"));
    assert_eq!(lines[0], "lambda,objective,cv_error");
    assert_eq!(lines.len(), 1 + 12);

    let partial = run(&[
        "select-lambda",
        "--data",
        data.to_str().unwrap(),
        "--grid-min",
        "0.05",
        "--out",
        dir.path().to_str().unwrap(),
        "--force",
    ]);
    assert_eq!(exit_code(&partial), 2, "partial grid flags must be rejected");
}

#[test]
fn classify_labels_every_row_in_both_modes() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train.csv");
    labeled_csv(&train, 8, 50, 33);

    let query = dir.path().join("query.csv");
    let mut file = fs::File::create(&query).unwrap();
    writeln!(file, "{}", (1..=8).map(|j| format!("x{j}")).collect::<Vec<_>>().join(",")).unwrap();
    for i in 0..7 {
        let first = if i % 2 == 0 { 1.5 } else { 0.0 };
        let row: Vec<String> = (0..8)
            .map(|j| if j == 0 { format!("{first}") } else { "0.1".to_string() })
            .collect();
        writeln!(file, "{}", row.join(",")).unwrap();
    }
    drop(file);

    let fitted_dir = dir.path().join("fitted");
    let out = run(&[
        "classify",
        "--train",
        train.to_str().unwrap(),
        "--method",
        "corrected_rlda",
        "--lambda",
        "0.7",
        "--data",
        query.to_str().unwrap(),
        "--out",
        fitted_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let lines = csv_lines(&fitted_dir.join("labels.csv"));
    assert_eq!(lines[0], "label");
    assert_eq!(lines.len(), 1 + 7);
    assert!(lines[1..].iter().all(|l| l == "1" || l == "2"));

    let spec = dir.path().join("spec.json");
    write_file(
        &spec,
        r#"{
            "mu1": [1.5, 0, 0, 0, 0, 0, 0, 0],
            "mu2": [0, 0, 0, 0, 0, 0, 0, 0],
            "sigma_model": { "identity": { "sigma2": 1.0 } }
        }"#,
    );
    let exact_dir = dir.path().join("exact");
    let out = run(&[
        "classify",
        "--config",
        spec.to_str().unwrap(),
        "--data",
        query.to_str().unwrap(),
        "--out",
        exact_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let lines = csv_lines(&exact_dir.join("labels.csv"));
    // The population rule under identity covariance thresholds the first
    // coordinate at 0.75, so the alternating query rows alternate labels.
    let expect: Vec<&str> = (0..7).map(|i| if i % 2 == 0 { "1" } else { "2" }).collect();
    assert_eq!(&lines[1..], &expect[..]);

    let conflict = run(&[
        "classify",
        "--train",
        train.to_str().unwrap(),
        "--data",
        query.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&conflict), 2, "--train without --method must fail");
}

#[test]
fn theory_ranks_eigenvector_alignments_at_small_lambda() {
    let dir = tempfile::tempdir().unwrap();
    let rate_at_first_lambda = |k: usize| -> f64 {
        let config = dir.path().join(format!("k{k}.json"));
        write_file(
            &config,
            &format!(
                r#"{{
                    "delta": 2.5631031310892009,
                    "covariance": {{ "ar1": {{ "rho": 0.5 }} }},
                    "p": 100,
                    "mean": {{ "eigenvector": {{ "k": {k} }} }},
                    "lambda_grid": {{ "min": 0.05, "max": 5.0, "points": 10 }},
                    "n1": 100, "n2": 100
                }}"#
            ),
        );
        let out_dir = dir.path().join(format!("out_k{k}"));
        let out = run(&[
            "theory",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
        let lines = csv_lines(&out_dir.join("theory.csv"));
        lines[1].split(',').nth(12).unwrap().parse().unwrap()
    };

    // At small λ the rule aligned with the top eigenvector wins; weaker
    // alignments rank by their eigenvalue.
    let (r1, r50, r100) = (
        rate_at_first_lambda(1),
        rate_at_first_lambda(50),
        rate_at_first_lambda(100),
    );
    assert!(
        r1 < r50 && r50 < r100,
        "expected rate(k=1) < rate(k=50) < rate(k=100) at small lambda, got {r1} {r50} {r100}"
    );
}

#[test]
fn verify_passes_clean_and_fails_when_perturbed() {
    let clean = run(&["verify", "--draws", "400"]);
    assert_eq!(exit_code(&clean), 0, "stderr: {}", stderr(&clean));
    let text = stdout(&clean);
    assert!(text.contains("mp_fixed_point_closed_form"));
    assert!(text.contains("all 5 checks passed"));

    let perturbed = run(&["verify", "--draws", "400", "--perturb-m0", "1e-6"]);
    assert_eq!(exit_code(&perturbed), 4);
    assert!(stdout(&perturbed).contains("FAIL"));
}

//! Isolated test target: the λ selector must factorize the pooled
//! covariance exactly once for the whole grid. Kept in its own binary so
//! the global eigendecomposition counter sees no other activity.

mod common;

use common::*;
use hdlda::lambda::{select_lambda, select_lambda_from_eigs};
use hdlda::linalg::eigen_decomposition_count;
use hdlda::simulate::{sample_dataset, MeanModel};

#[test]
fn grid_selection_runs_a_single_eigendecomposition() {
    let spec = build_problem(
        &identity_cov(),
        MeanModel::FirstCoordinate(hdlda::simulate::FirstCoordinateMean {}),
        30,
        1,
    );
    let data = sample_dataset(&spec, 40, 40, 7).unwrap();
    let grid = log_grid(0.01, 10.0, 25);

    let before = eigen_decomposition_count();
    let report = select_lambda(&data, &grid).unwrap();
    let after = eigen_decomposition_count();

    assert_eq!(after - before, 1, "one factorization must serve all 25 grid points");
    assert!(report.lambda_opt > 0.0);

    // The selector sees the data only through the pooled spectrum: the
    // eigenvalue-based entry point reproduces the dataset-based one.
    let stats = hdlda::classifiers::PooledStats::from_dataset(&data).unwrap();
    let eigs: Vec<f64> = hdlda::linalg::sym_eigenvalues_desc(stats.pooled())
        .unwrap()
        .iter()
        .map(|&s| s.max(0.0))
        .collect();
    let from_eigs = select_lambda_from_eigs(&eigs, stats.n(), &grid).unwrap();
    assert_eq!(from_eigs.lambda_opt, report.lambda_opt);
    assert_eq!(from_eigs.objective, report.objective);
}

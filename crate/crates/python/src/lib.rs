//! Python bindings for the CLV subject-classification pipeline.
//!
//! The module mirrors the core operations with plain Python types: datasets
//! are lists of per-subject rows, labels are lists of 1/2 ints. Build with
//! `cargo build -p clv-py --release` and import the produced cdylib as
//! `clv_py` (see `python/smoke_test.py`).

use std::collections::BTreeMap;

use ndarray::Array2;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use clv_core::classify;
use clv_core::clv;
use clv_core::datagen::{self, GeneratorParams};
use clv_core::experiment;
use clv_core::stats;

fn to_py_err(e: clv_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn matrix_from_rows(rows: Vec<Vec<f64>>) -> PyResult<Array2<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return Err(PyValueError::new_err("observations must be nonempty"));
    }
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(PyValueError::new_err("observation rows have unequal lengths"));
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec((nrows, ncols), flat)
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

fn matrix_to_rows(m: &Array2<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).to_vec()).collect()
}

/// Generate a synthetic two-group dataset; returns `(observations, labels)`.
#[pyfunction]
#[pyo3(signature = (variables, subjects, factors, k, q=0.25, seed=0))]
fn generate_dataset(
    variables: usize,
    subjects: usize,
    factors: usize,
    k: f64,
    q: f64,
    seed: u64,
) -> PyResult<(Vec<Vec<f64>>, Vec<u32>)> {
    let params = GeneratorParams {
        num_variables: variables,
        num_subjects: subjects,
        num_factors: factors,
        factor_strength: k,
        loading_floor: q,
        seed,
        ..GeneratorParams::default()
    };
    let (dataset, _, _, _) = datagen::generate_dataset(&params).map_err(to_py_err)?;
    let labels = dataset.true_labels.expect("generated labels");
    Ok((
        matrix_to_rows(&dataset.observations),
        labels.into_iter().map(u32::from).collect(),
    ))
}

/// Correlation distance matrix (1 - Pearson r) between variable columns.
#[pyfunction]
fn correlation_distance_matrix(observations: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    let m = matrix_from_rows(observations)?;
    let d = clv::correlation_distance_matrix(&m).map_err(to_py_err)?;
    Ok(matrix_to_rows(d.values()))
}

/// Ward merge sequence as `(left_id, right_id, height, size)` tuples with
/// leaves numbered 1..=I.
#[pyfunction]
fn ward_merges(observations: Vec<Vec<f64>>) -> PyResult<Vec<(usize, usize, f64, usize)>> {
    let m = matrix_from_rows(observations)?;
    let d = clv::correlation_distance_matrix(&m).map_err(to_py_err)?;
    let tree = clv::ward_linkage(&d).map_err(to_py_err)?;
    Ok(tree
        .merges()
        .iter()
        .map(|mg| (mg.left, mg.right, mg.height, mg.size))
        .collect())
}

/// Cluster the variables and return the 1-based cluster index per variable.
#[pyfunction]
fn variable_clusters(observations: Vec<Vec<f64>>, num_clusters: usize) -> PyResult<Vec<usize>> {
    let m = matrix_from_rows(observations)?;
    let d = clv::correlation_distance_matrix(&m).map_err(to_py_err)?;
    let tree = clv::ward_linkage(&d).map_err(to_py_err)?;
    Ok(clv::cut_tree(&tree, num_clusters).map_err(to_py_err)?.assignment)
}

/// Resultant vectors for a cut at `num_clusters`, one row per subject.
#[pyfunction]
fn extract_rvs(observations: Vec<Vec<f64>>, num_clusters: usize) -> PyResult<Vec<Vec<f64>>> {
    let m = matrix_from_rows(observations)?;
    let d = clv::correlation_distance_matrix(&m).map_err(to_py_err)?;
    let tree = clv::ward_linkage(&d).map_err(to_py_err)?;
    let cut = clv::cut_tree(&tree, num_clusters).map_err(to_py_err)?;
    let rvs = clv::extract_rvs(&m, &cut).map_err(to_py_err)?;
    Ok(matrix_to_rows(&rvs.values))
}

/// Full pipeline on an observation matrix: cluster variables, extract
/// `rv_count` resultant vectors, k-means the subjects. Returns predicted
/// group labels (1/2).
#[pyfunction]
#[pyo3(signature = (observations, rv_count=6, restarts=10, seed=0))]
fn classify_subjects(
    observations: Vec<Vec<f64>>,
    rv_count: usize,
    restarts: usize,
    seed: u64,
) -> PyResult<Vec<u32>> {
    let m = matrix_from_rows(observations)?;
    let d = clv::correlation_distance_matrix(&m).map_err(to_py_err)?;
    let tree = clv::ward_linkage(&d).map_err(to_py_err)?;
    let cut = clv::cut_tree(&tree, rv_count).map_err(to_py_err)?;
    let rvs = clv::extract_rvs(&m, &cut).map_err(to_py_err)?;
    let labels = classify::kmeans_two(&rvs, restarts, seed).map_err(to_py_err)?;
    Ok(labels.into_iter().map(u32::from).collect())
}

/// Congruence of two binary labelings: `(count, fraction)` under the better
/// of the two label mappings.
#[pyfunction]
fn congruence(predicted: Vec<u32>, true_labels: Vec<u32>) -> PyResult<(usize, f64)> {
    classify::congruence(&narrow_labels(predicted), &narrow_labels(true_labels))
        .map_err(to_py_err)
}

/// Labels arrive as Python ints; anything outside u8 is mapped to an invalid
/// sentinel so the core validation reports it.
fn narrow_labels(labels: Vec<u32>) -> Vec<u8> {
    labels
        .into_iter()
        .map(|l| u8::try_from(l).unwrap_or(u8::MAX))
        .collect()
}

/// Generate one dataset and run the pipeline at each RV count; returns
/// `{rv_count: (congruence_count, congruence_fraction)}`.
#[pyfunction]
#[pyo3(signature = (variables, subjects, factors, k, q=0.25, seed=0, rv_counts=vec![2, 3, 4, 5, 6], restarts=10))]
#[allow(clippy::too_many_arguments)]
fn run_replicate(
    variables: usize,
    subjects: usize,
    factors: usize,
    k: f64,
    q: f64,
    seed: u64,
    rv_counts: Vec<usize>,
    restarts: usize,
) -> PyResult<BTreeMap<usize, (usize, f64)>> {
    let params = GeneratorParams {
        num_variables: variables,
        num_subjects: subjects,
        num_factors: factors,
        factor_strength: k,
        loading_floor: q,
        seed,
        ..GeneratorParams::default()
    };
    let (congruence_by_rv, _) =
        experiment::run_replicate(&params, &rv_counts, restarts, false).map_err(to_py_err)?;
    Ok(congruence_by_rv)
}

/// Descriptive scan of a labeled dataset: returns
/// `(u_sig_fraction, r_sig_fraction, mean_r)`.
#[pyfunction]
fn descriptive_scan(
    observations: Vec<Vec<f64>>,
    true_labels: Vec<u32>,
) -> PyResult<(f64, f64, f64)> {
    let m = matrix_from_rows(observations)?;
    let dataset = datagen::Dataset {
        observations: m,
        true_labels: Some(narrow_labels(true_labels)),
    };
    let d = experiment::descriptive_scan(&dataset).map_err(to_py_err)?;
    Ok((d.u_sig_fraction, d.r_sig_fraction, d.mean_r))
}

/// Two-sided Mann-Whitney U test: `(U, p)`.
#[pyfunction]
fn mann_whitney_u(sample_a: Vec<f64>, sample_b: Vec<f64>) -> PyResult<(f64, f64)> {
    let r = stats::mann_whitney_u(&sample_a, &sample_b).map_err(to_py_err)?;
    Ok((r.statistic, r.p_value))
}

/// Two-sided Pearson correlation test: `(r, p)`.
#[pyfunction]
fn pearson_test(a: Vec<f64>, b: Vec<f64>) -> PyResult<(f64, f64)> {
    let r = stats::pearson_test(&a, &b).map_err(to_py_err)?;
    Ok((r.statistic, r.p_value))
}

/// One-way ANOVA: `(F, p)`.
#[pyfunction]
fn anova_oneway(groups: Vec<Vec<f64>>) -> PyResult<(f64, f64)> {
    let r = stats::anova_oneway(&groups).map_err(to_py_err)?;
    Ok((r.statistic, r.p_value))
}

#[pymodule]
fn clv_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(generate_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(correlation_distance_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(ward_merges, m)?)?;
    m.add_function(wrap_pyfunction!(variable_clusters, m)?)?;
    m.add_function(wrap_pyfunction!(extract_rvs, m)?)?;
    m.add_function(wrap_pyfunction!(classify_subjects, m)?)?;
    m.add_function(wrap_pyfunction!(congruence, m)?)?;
    m.add_function(wrap_pyfunction!(run_replicate, m)?)?;
    m.add_function(wrap_pyfunction!(descriptive_scan, m)?)?;
    m.add_function(wrap_pyfunction!(mann_whitney_u, m)?)?;
    m.add_function(wrap_pyfunction!(pearson_test, m)?)?;
    m.add_function(wrap_pyfunction!(anova_oneway, m)?)?;
    Ok(())
}

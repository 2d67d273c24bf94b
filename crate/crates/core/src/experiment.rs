//! Monte-Carlo harness: sweep the generator grid, run the classification
//! pipeline on every replicate, and aggregate congruence and descriptive
//! statistics.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{congruence, kmeans_two};
use crate::clv::{correlation_distance_matrix, cut_tree, extract_rvs, ward_linkage};
use crate::datagen::{generate_dataset, Dataset, EpsilonDistribution, GeneratorParams, MDistribution};
use crate::seed::{kmeans_seed, replicate_seed};
use crate::stats::{anova_oneway, mann_whitney_u, pearson_test, TestResult};
use crate::{Error, Result};

/// The sweep configuration. Defaults reproduce the full study grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    /// Variable counts I to sweep.
    pub variables: Vec<usize>,
    /// Factor counts J to sweep.
    pub factors: Vec<usize>,
    /// Factor strengths k to sweep.
    pub k: Vec<f64>,
    /// Independent datasets per (I, J, k) cell.
    pub replicates: usize,
    /// RV counts to classify with, each in 2..=6.
    pub rv_counts: Vec<usize>,
    pub subjects: usize,
    /// Loading floor q.
    pub q: f64,
    pub base_seed: u64,
    /// k-means restarts per classification.
    pub restarts: usize,
    /// Cells with this variable count get the descriptive scan...
    pub scan_variables: usize,
    /// ...when they also have this factor count. Zero disables the scan.
    pub scan_factors: usize,
    pub m_distribution: MDistribution,
    pub epsilon_distribution: EpsilonDistribution,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            variables: vec![50, 100, 300],
            factors: vec![4, 6, 8],
            k: (0..=10).map(|i| i as f64 / 10.0).collect(),
            replicates: 50,
            rv_counts: vec![2, 3, 4, 5, 6],
            subjects: 40,
            q: 0.25,
            base_seed: 0,
            restarts: 10,
            scan_variables: 300,
            scan_factors: 6,
            m_distribution: MDistribution::default(),
            epsilon_distribution: EpsilonDistribution::default(),
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        if self.variables.is_empty() || self.factors.is_empty() || self.k.is_empty() {
            return Err(Error::Config(
                "variables, factors, and k must be nonempty".into(),
            ));
        }
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be positive".into()));
        }
        if self.rv_counts.is_empty() || self.rv_counts.iter().any(|&c| !(2..=6).contains(&c)) {
            return Err(Error::Config("rv_counts must be within 2..=6".into()));
        }
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be positive".into()));
        }
        for (i, j) in self.cells().map(|c| (c.0, c.1)) {
            if j >= i {
                return Err(Error::Config(format!(
                    "cell (I={i}, J={j}): factors must be fewer than variables"
                )));
            }
        }
        if self.k.iter().any(|&k| !(0.0..=1.0).contains(&k)) {
            return Err(Error::Config("k values must be in [0, 1]".into()));
        }
        Ok(())
    }

    /// All (I, J, k) cells in deterministic sweep order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.variables.iter().flat_map(move |&i| {
            self.factors
                .iter()
                .flat_map(move |&j| self.k.iter().map(move |&k| (i, j, k)))
        })
    }

    /// Generator parameters for one replicate of one cell.
    pub fn params_for(&self, variables: usize, factors: usize, k: f64, replicate: usize) -> GeneratorParams {
        GeneratorParams {
            num_variables: variables,
            num_subjects: self.subjects,
            num_factors: factors,
            factor_strength: k,
            loading_floor: self.q,
            seed: replicate_seed(self.base_seed, variables, factors, k, replicate),
            m_distribution: self.m_distribution,
            epsilon_distribution: self.epsilon_distribution,
        }
    }

    fn wants_scan(&self, variables: usize, factors: usize) -> bool {
        self.scan_variables == variables && self.scan_factors == factors
    }
}

/// Descriptive statistics of one dataset (the per-k scan).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescriptiveStats {
    /// Fraction of variables whose between-group U test has p < 0.05.
    pub u_sig_fraction: f64,
    /// Fraction of the I/2 sequential variable pairs with Pearson p < 0.01.
    pub r_sig_fraction: f64,
    /// Mean absolute Pearson coefficient over those pairs.
    pub mean_r: f64,
}

/// The outcome of one replicate: congruence per RV count plus the optional
/// descriptive scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateResult {
    pub variables: usize,
    pub factors: usize,
    pub k: f64,
    pub replicate: usize,
    pub seed: u64,
    /// RV count -> (congruence count, congruence fraction).
    pub congruence_by_rv: BTreeMap<usize, (usize, f64)>,
    pub descriptive: Option<DescriptiveStats>,
}

/// Aggregate of one cell at one RV count.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub variables: usize,
    pub factors: usize,
    pub k: f64,
    pub rv_count: usize,
    /// Effective replicate count (failures excluded).
    pub n: usize,
    pub mean_congruence: f64,
    /// Sample standard deviation of the congruence counts.
    pub sd_congruence: f64,
}

/// Everything the grid run produces.
#[derive(Debug, Clone)]
pub struct GridResults {
    pub replicates: Vec<ReplicateResult>,
    pub cells: Vec<CellSummary>,
    /// Diagnostics of failed replicates, with their cell coordinates.
    pub failures: Vec<String>,
}

/// Run the pipeline once on a generated dataset: distance matrix, dendrogram,
/// then per RV count cut, extract, k-means, congruence.
pub fn run_replicate(
    params: &GeneratorParams,
    rv_counts: &[usize],
    restarts: usize,
    with_descriptive: bool,
) -> Result<(BTreeMap<usize, (usize, f64)>, Option<DescriptiveStats>)> {
    let (dataset, _, _, _) = generate_dataset(params)?;
    let labels = dataset.true_labels.as_ref().expect("generated labels");

    let distances = correlation_distance_matrix(&dataset.observations)?;
    let tree = ward_linkage(&distances)?;
    let mut congruence_by_rv = BTreeMap::new();
    for &rv_count in rv_counts {
        let cut = cut_tree(&tree, rv_count)?;
        let rvs = extract_rvs(&dataset.observations, &cut)?;
        let predicted = kmeans_two(&rvs, restarts, kmeans_seed(params.seed, rv_count))?;
        let scored = congruence(&predicted, labels)?;
        congruence_by_rv.insert(rv_count, scored);
    }
    let descriptive = if with_descriptive {
        Some(descriptive_scan(&dataset)?)
    } else {
        None
    };
    Ok((congruence_by_rv, descriptive))
}

/// Per-variable U-test scan: the fraction of variables whose two groups
/// differ at p < 0.05.
pub fn u_scan(dataset: &Dataset) -> Result<f64> {
    let labels = dataset
        .true_labels
        .as_ref()
        .ok_or_else(|| Error::invalid("u_scan: dataset has no group labels"))?;
    let observations = &dataset.observations;
    let mut significant = 0usize;
    for i in 0..observations.ncols() {
        let col = observations.column(i);
        let group_a: Vec<f64> = col
            .iter()
            .zip(labels)
            .filter(|(_, &g)| g == 1)
            .map(|(&v, _)| v)
            .collect();
        let group_b: Vec<f64> = col
            .iter()
            .zip(labels)
            .filter(|(_, &g)| g == 2)
            .map(|(&v, _)| v)
            .collect();
        if mann_whitney_u(&group_a, &group_b)?.p_value < 0.05 {
            significant += 1;
        }
    }
    Ok(significant as f64 / observations.ncols() as f64)
}

/// Sequential correlation scan: variable i against variable i + I/2 for the
/// first half, giving I/2 pairs. Returns the fraction with p < 0.01 and the
/// mean absolute coefficient.
pub fn correlation_scan(dataset: &Dataset) -> Result<(f64, f64)> {
    let observations = &dataset.observations;
    let variables = observations.ncols();
    if variables % 2 != 0 {
        return Err(Error::invalid(format!(
            "correlation_scan: variable count {variables} is odd; pairing i with i + I/2 needs even I"
        )));
    }
    let half = variables / 2;
    let mut significant = 0usize;
    let mut abs_sum = 0.0;
    for i in 0..half {
        let a = observations.column(i).to_vec();
        let b = observations.column(i + half).to_vec();
        let test = pearson_test(&a, &b).map_err(|e| match e {
            Error::DegenerateVariable { column } => Error::DegenerateVariable {
                column: if column == 0 { i } else { i + half },
            },
            other => other,
        })?;
        if test.p_value < 0.01 {
            significant += 1;
        }
        abs_sum += test.statistic.abs();
    }
    Ok((significant as f64 / half as f64, abs_sum / half as f64))
}

/// Full descriptive scan of one dataset (requires labels and even I).
pub fn descriptive_scan(dataset: &Dataset) -> Result<DescriptiveStats> {
    let u_sig_fraction = u_scan(dataset)?;
    let (r_sig_fraction, mean_r) = correlation_scan(dataset)?;
    Ok(DescriptiveStats {
        u_sig_fraction,
        r_sig_fraction,
        mean_r,
    })
}

/// Execute the whole grid. Replicates are independent seeded jobs, so the
/// output is identical for any rayon worker count; rows come back sorted in
/// sweep order. A failed replicate is reported in `failures` (with its cell
/// coordinates) and excluded from its cell summary, which then reports a
/// smaller effective n.
pub fn run_grid(config: &GridConfig) -> Result<GridResults> {
    run_grid_with_progress(config, |_, _, _| {})
}

/// [`run_grid`] with a per-cell completion callback `(variables, factors, k)`.
pub fn run_grid_with_progress(
    config: &GridConfig,
    mut on_cell_done: impl FnMut(usize, usize, f64),
) -> Result<GridResults> {
    config.validate()?;
    let mut replicates = Vec::new();
    let mut cells = Vec::new();
    let mut failures = Vec::new();

    for (variables, factors, k) in config.cells() {
        let with_scan = config.wants_scan(variables, factors);
        let outcomes: Vec<(usize, Result<(BTreeMap<usize, (usize, f64)>, Option<DescriptiveStats>)>)> =
            (0..config.replicates)
                .into_par_iter()
                .map(|replicate| {
                    let params = config.params_for(variables, factors, k, replicate);
                    (
                        replicate,
                        run_replicate(&params, &config.rv_counts, config.restarts, with_scan),
                    )
                })
                .collect();

        let mut cell_rows = Vec::with_capacity(config.replicates);
        for (replicate, outcome) in outcomes {
            match outcome {
                Ok((congruence_by_rv, descriptive)) => cell_rows.push(ReplicateResult {
                    variables,
                    factors,
                    k,
                    replicate,
                    seed: replicate_seed(config.base_seed, variables, factors, k, replicate),
                    congruence_by_rv,
                    descriptive,
                }),
                Err(e) => failures.push(format!(
                    "cell (I={variables}, J={factors}, k={k}) replicate {replicate}: {e}"
                )),
            }
        }
        for &rv_count in &config.rv_counts {
            cells.push(summarize_cell(&cell_rows, variables, factors, k, rv_count));
        }
        replicates.extend(cell_rows);
        on_cell_done(variables, factors, k);
    }
    Ok(GridResults {
        replicates,
        cells,
        failures,
    })
}

fn summarize_cell(
    rows: &[ReplicateResult],
    variables: usize,
    factors: usize,
    k: f64,
    rv_count: usize,
) -> CellSummary {
    let counts: Vec<f64> = rows
        .iter()
        .filter_map(|r| r.congruence_by_rv.get(&rv_count).map(|&(c, _)| c as f64))
        .collect();
    let n = counts.len();
    let mean = if n == 0 {
        f64::NAN
    } else {
        counts.iter().sum::<f64>() / n as f64
    };
    let sd = if n < 2 {
        0.0
    } else {
        (counts.iter().map(|&c| (c - mean) * (c - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    CellSummary {
        variables,
        factors,
        k,
        rv_count,
        n,
        mean_congruence: mean,
        sd_congruence: sd,
    }
}

/// Which coordinate the congruence groups are split along in [`compare_anova`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GroupAxis {
    /// Group by k at a fixed RV count.
    KValues { rv_count: usize },
    /// Group by RV count.
    RvCounts,
    /// Group by factor count at a fixed RV count.
    FactorCounts { rv_count: usize },
    /// Group by variable count at a fixed RV count.
    VariableCounts { rv_count: usize },
}

/// One-way ANOVA over congruence counts grouped along `axis`. The caller
/// fixes the other coordinates by pre-filtering `results`.
pub fn compare_anova(results: &[ReplicateResult], axis: GroupAxis) -> Result<TestResult> {
    let mut groups: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    match axis {
        GroupAxis::KValues { rv_count } => {
            for r in results {
                if let Some(&(count, _)) = r.congruence_by_rv.get(&rv_count) {
                    groups.entry(r.k.to_bits()).or_default().push(count as f64);
                }
            }
        }
        GroupAxis::RvCounts => {
            for r in results {
                for (&rv, &(count, _)) in &r.congruence_by_rv {
                    groups.entry(rv as u64).or_default().push(count as f64);
                }
            }
        }
        GroupAxis::FactorCounts { rv_count } => {
            for r in results {
                if let Some(&(count, _)) = r.congruence_by_rv.get(&rv_count) {
                    groups
                        .entry(r.factors as u64)
                        .or_default()
                        .push(count as f64);
                }
            }
        }
        GroupAxis::VariableCounts { rv_count } => {
            for r in results {
                if let Some(&(count, _)) = r.congruence_by_rv.get(&rv_count) {
                    groups
                        .entry(r.variables as u64)
                        .or_default()
                        .push(count as f64);
                }
            }
        }
    }
    let groups: Vec<Vec<f64>> = groups.into_values().collect();
    if groups.len() < 2 {
        return Err(Error::invalid(
            "compare_anova: need at least 2 groups along the chosen axis",
        ));
    }
    anova_oneway(&groups)
}

/// The standard ANOVA comparisons over a grid's results, as written to
/// `anova.csv`: congruence against k (excluding k = 0), against RV count,
/// against factor count, and against variable count, each at the scan cell
/// coordinates and the largest configured k and RV count. Comparisons whose
/// groups the grid does not contain are skipped.
pub fn standard_anova_rows(
    results: &[ReplicateResult],
    config: &GridConfig,
) -> Vec<(String, String, TestResult)> {
    let mut rows = Vec::new();
    let (i, j) = (config.scan_variables, config.scan_factors);
    let rv = config.rv_counts.iter().copied().max().unwrap_or(6);
    let k_max = config.k.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let at_cell: Vec<ReplicateResult> = results
        .iter()
        .filter(|r| r.variables == i && r.factors == j && r.k > 0.0)
        .cloned()
        .collect();
    if let Ok(result) = compare_anova(&at_cell, GroupAxis::KValues { rv_count: rv }) {
        rows.push((
            "k_values".to_string(),
            format!("I={i} J={j} rv_count={rv} k>0"),
            result,
        ));
    }
    let at_k_max: Vec<ReplicateResult> = results
        .iter()
        .filter(|r| r.variables == i && r.factors == j && r.k == k_max)
        .cloned()
        .collect();
    if let Ok(result) = compare_anova(&at_k_max, GroupAxis::RvCounts) {
        rows.push((
            "rv_counts".to_string(),
            format!("I={i} J={j} k={k_max}"),
            result,
        ));
    }
    let across_j: Vec<ReplicateResult> = results
        .iter()
        .filter(|r| r.variables == i && r.k == k_max)
        .cloned()
        .collect();
    if let Ok(result) = compare_anova(&across_j, GroupAxis::FactorCounts { rv_count: rv }) {
        rows.push((
            "factor_counts".to_string(),
            format!("I={i} k={k_max} rv_count={rv}"),
            result,
        ));
    }
    let across_i: Vec<ReplicateResult> = results
        .iter()
        .filter(|r| r.factors == j && r.k == k_max)
        .cloned()
        .collect();
    if let Ok(result) = compare_anova(&across_i, GroupAxis::VariableCounts { rv_count: rv }) {
        rows.push((
            "variable_counts".to_string(),
            format!("J={j} k={k_max} rv_count={rv}"),
            result,
        ));
    }
    rows
}

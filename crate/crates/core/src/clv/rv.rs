//! Resultant vectors: one summary column per variable cluster.

use ndarray::Array2;

use super::ClusterCut;
use crate::{Error, Result};

/// Standard deviation convention for variable standardization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StdConvention {
    /// Divide by S (the convention used throughout this crate).
    #[default]
    Population,
    /// Divide by S - 1.
    Sample,
}

/// S x R matrix of resultant vectors; column r is the mean of the
/// standardized member variables of cluster r, so every column has subject
/// mean zero.
#[derive(Debug, Clone)]
pub struct RVMatrix {
    pub values: Array2<f64>,
    pub num_rvs: usize,
}

/// Extract the resultant vectors for a cut using population standardization.
pub fn extract_rvs(observations: &Array2<f64>, cut: &ClusterCut) -> Result<RVMatrix> {
    extract_rvs_with(observations, cut, StdConvention::Population)
}

/// Extract the resultant vectors: column c of the result is
/// `mean over cluster-c members i of (x_i - mean(x_i)) / sd(x_i)`.
pub fn extract_rvs_with(
    observations: &Array2<f64>,
    cut: &ClusterCut,
    convention: StdConvention,
) -> Result<RVMatrix> {
    let subjects = observations.nrows();
    let variables = observations.ncols();
    if cut.assignment.len() != variables {
        return Err(Error::invalid(format!(
            "extract_rvs: cut covers {} variables, dataset has {variables}",
            cut.assignment.len()
        )));
    }
    let denominator = match convention {
        StdConvention::Population => subjects as f64,
        StdConvention::Sample => (subjects - 1) as f64,
    };

    let mut values = Array2::zeros((subjects, cut.num_clusters));
    let mut member_counts = vec![0usize; cut.num_clusters];
    for (i, &cluster) in cut.assignment.iter().enumerate() {
        let col = observations.column(i);
        let mean = col.sum() / subjects as f64;
        let var = col.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / denominator;
        if var == 0.0 {
            return Err(Error::DegenerateVariable { column: i });
        }
        let sd = var.sqrt();
        member_counts[cluster - 1] += 1;
        for s in 0..subjects {
            values[(s, cluster - 1)] += (col[s] - mean) / sd;
        }
    }
    for (c, &count) in member_counts.iter().enumerate() {
        if count == 0 {
            return Err(Error::invalid(format!("extract_rvs: cluster {} empty", c + 1)));
        }
        let inv = 1.0 / count as f64;
        for s in 0..subjects {
            values[(s, c)] *= inv;
        }
    }
    Ok(RVMatrix {
        values,
        num_rvs: cut.num_clusters,
    })
}

//! Pairwise correlation distance between dataset variables.

use ndarray::Array2;

use crate::{Error, Result};

/// Symmetric matrix of correlation distances `d = 1 - r` between variable
/// columns. Entries lie in [0, 2] with an exactly zero diagonal.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    values: Array2<f64>,
}

impl DistanceMatrix {
    /// Build from a full matrix, checking symmetry, bounds, and the diagonal.
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let (r, c) = values.dim();
        if r != c {
            return Err(Error::invalid("distance matrix must be square"));
        }
        for a in 0..r {
            if values[(a, a)] != 0.0 {
                return Err(Error::invalid(format!("nonzero diagonal at {a}")));
            }
            for b in (a + 1)..r {
                let v = values[(a, b)];
                if v != values[(b, a)] {
                    return Err(Error::invalid(format!("asymmetry at ({a}, {b})")));
                }
                if !(0.0..=2.0).contains(&v) {
                    return Err(Error::invalid(format!(
                        "distance {v} at ({a}, {b}) outside [0, 2]"
                    )));
                }
            }
        }
        Ok(DistanceMatrix { values })
    }

    pub fn dimension(&self) -> usize {
        self.values.nrows()
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[(a, b)]
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }
}

/// Correlation distance matrix of the dataset's variables:
/// `d[a][b] = 1 - pearson_r(column a, column b)`.
///
/// Perfectly positively correlated variables are at distance 0, perfectly
/// anticorrelated ones at 2. Errors with the offending column index if any
/// variable has zero variance across subjects.
pub fn correlation_distance_matrix(observations: &Array2<f64>) -> Result<DistanceMatrix> {
    let subjects = observations.nrows();
    let variables = observations.ncols();
    if subjects < 2 {
        return Err(Error::invalid(
            "correlation_distance_matrix: need at least 2 subjects",
        ));
    }

    // Center each column once; reuse for every pair.
    let mut centered = observations.clone();
    let mut norms = vec![0.0f64; variables];
    for i in 0..variables {
        let mut col = centered.column_mut(i);
        let mean = col.sum() / subjects as f64;
        col.mapv_inplace(|v| v - mean);
        let norm_sq: f64 = col.iter().map(|&v| v * v).sum();
        if norm_sq == 0.0 {
            return Err(Error::DegenerateVariable { column: i });
        }
        norms[i] = norm_sq.sqrt();
    }

    let mut values = Array2::zeros((variables, variables));
    for a in 0..variables {
        let col_a = centered.column(a);
        for b in (a + 1)..variables {
            let col_b = centered.column(b);
            let dot: f64 = col_a.iter().zip(col_b.iter()).map(|(&x, &y)| x * y).sum();
            let r = dot / (norms[a] * norms[b]);
            // rounding can push |r| infinitesimally past 1
            let d = (1.0 - r).clamp(0.0, 2.0);
            values[(a, b)] = d;
            values[(b, a)] = d;
        }
    }
    DistanceMatrix::new(values)
}

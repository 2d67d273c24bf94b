//! Two-cluster k-means over the resultant vectors and the congruence score
//! against the known groups.

use ndarray::Array2;

use crate::clv::RVMatrix;
use crate::seed::rng_for;
use crate::{Error, Result};

const MAX_ITERATIONS: usize = 300;

/// A subject partition with its agreement against the true groups.
#[derive(Debug, Clone)]
pub struct Classification {
    /// Predicted group per subject, 1 or 2.
    pub predicted_labels: Vec<u8>,
    /// Matches under the better of the two label mappings.
    pub congruence_count: usize,
    /// `congruence_count / S`, always in [0.5, 1].
    pub congruence_fraction: f64,
}

/// Run the full scoring step: k-means over the RVs, then congruence.
pub fn classify(
    rvs: &RVMatrix,
    true_labels: &[u8],
    restarts: usize,
    seed: u64,
) -> Result<Classification> {
    let predicted_labels = kmeans_two(rvs, restarts, seed)?;
    let (congruence_count, congruence_fraction) = congruence(&predicted_labels, true_labels)?;
    Ok(Classification {
        predicted_labels,
        congruence_count,
        congruence_fraction,
    })
}

/// Two-cluster k-means (Lloyd's iteration) with seeded restarts.
///
/// Each restart initializes the centroids at two distinct subject rows drawn
/// from the seeded stream, iterates to an assignment fixpoint (capped at 300
/// iterations), and the restart with the lowest within-cluster sum of squared
/// distances wins; SSE ties keep the earlier restart. A cluster emptied
/// during iteration is reseeded at the point farthest from the other
/// centroid. Labels are normalized so subject 0's cluster is group 1.
pub fn kmeans_two(rvs: &RVMatrix, restarts: usize, seed: u64) -> Result<Vec<u8>> {
    let points = &rvs.values;
    let subjects = points.nrows();
    if subjects < 2 {
        return Err(Error::invalid("kmeans_two: need at least 2 subjects"));
    }
    if restarts == 0 {
        return Err(Error::invalid("kmeans_two: restarts must be positive"));
    }
    if points.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("kmeans_two: RV matrix contains non-finite values"));
    }
    let first = points.row(0);
    if (1..subjects).all(|s| points.row(s) == first) {
        return Err(Error::DegenerateInput(
            "kmeans_two: all subjects identical in RV space".into(),
        ));
    }

    let mut rng = rng_for(seed);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..restarts {
        let init = rand::seq::index::sample(&mut rng, subjects, 2);
        let (assignment, sse) = lloyd(points, init.index(0), init.index(1));
        match &best {
            Some((best_sse, _)) if sse >= *best_sse => {}
            _ => best = Some((sse, assignment)),
        }
    }
    let (_, assignment) = best.expect("at least one restart ran");

    // normalize: the cluster containing subject 0 is group 1
    let anchor = assignment[0];
    Ok(assignment
        .iter()
        .map(|&c| if c == anchor { 1 } else { 2 })
        .collect())
}

fn lloyd(points: &Array2<f64>, init_a: usize, init_b: usize) -> (Vec<usize>, f64) {
    let subjects = points.nrows();
    let dims = points.ncols();
    let mut centroids = [
        points.row(init_a).to_vec(),
        points.row(init_b).to_vec(),
    ];
    let dist_sq = |s: usize, c: &[f64]| -> f64 {
        let mut acc = 0.0;
        for d in 0..dims {
            let diff = points[(s, d)] - c[d];
            acc += diff * diff;
        }
        acc
    };
    let assign = |centroids: &[Vec<f64>; 2]| -> Vec<usize> {
        (0..subjects)
            .map(|s| {
                // ties go to the lower cluster index
                if dist_sq(s, &centroids[0]) <= dist_sq(s, &centroids[1]) {
                    0
                } else {
                    1
                }
            })
            .collect()
    };

    let mut assignment = assign(&centroids);
    for _ in 0..MAX_ITERATIONS {
        for c in 0..2 {
            let members: Vec<usize> =
                (0..subjects).filter(|&s| assignment[s] == c).collect();
            if members.is_empty() {
                // reseed at the point farthest from the other centroid
                let other = &centroids[1 - c];
                let far = (0..subjects)
                    .max_by(|&a, &b| {
                        dist_sq(a, other)
                            .partial_cmp(&dist_sq(b, other))
                            .expect("finite distances")
                    })
                    .expect("nonempty point set");
                centroids[c] = points.row(far).to_vec();
            } else {
                let inv = 1.0 / members.len() as f64;
                for d in 0..dims {
                    centroids[c][d] = members.iter().map(|&s| points[(s, d)]).sum::<f64>() * inv;
                }
            }
        }
        let next = assign(&centroids);
        if next == assignment {
            break;
        }
        assignment = next;
    }

    let sse = (0..subjects)
        .map(|s| dist_sq(s, &centroids[assignment[s]]))
        .sum();
    (assignment, sse)
}

/// Congruence of a predicted binary labeling against the truth: the number of
/// matches under the better of the two label mappings, and its fraction of S.
pub fn congruence(predicted: &[u8], true_labels: &[u8]) -> Result<(usize, f64)> {
    if predicted.len() != true_labels.len() {
        return Err(Error::invalid(format!(
            "congruence: length mismatch ({} vs {})",
            predicted.len(),
            true_labels.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::invalid("congruence: empty labelings"));
    }
    for labels in [predicted, true_labels] {
        if labels.iter().any(|&l| l != 1 && l != 2) {
            return Err(Error::invalid("congruence: labels must be 1 or 2"));
        }
    }
    let matches = predicted
        .iter()
        .zip(true_labels)
        .filter(|(p, t)| p == t)
        .count();
    let count = matches.max(predicted.len() - matches);
    Ok((count, count as f64 / predicted.len() as f64))
}

//! Cutting a dendrogram into a fixed number of variable clusters.

use super::Dendrogram;
use crate::{Error, Result};

/// A partition of the variables into `num_clusters` groups. Cluster indices
/// run 1..=C and are numbered by first appearance in variable order, so the
/// labeling is deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterCut {
    pub assignment: Vec<usize>,
    pub num_clusters: usize,
}

/// Undo the last `num_clusters - 1` merges of the tree and return the
/// resulting partition. Cutting at 2..=6 clusters corresponds to the first
/// through fifth levels below the root.
pub fn cut_tree(tree: &Dendrogram, num_clusters: usize) -> Result<ClusterCut> {
    let n = tree.num_leaves();
    if num_clusters == 0 {
        return Err(Error::invalid("cut_tree: num_clusters must be positive"));
    }
    if num_clusters > n {
        return Err(Error::invalid(format!(
            "cut_tree: num_clusters ({num_clusters}) exceeds leaf count ({n})"
        )));
    }

    // Apply the first n - num_clusters merges; parent[id] points at the
    // cluster that absorbed id. Ids are 1-based, merge t creates n + t.
    let mut parent: Vec<usize> = (0..=(2 * n - 1)).collect();
    for (t, merge) in tree.merges().iter().enumerate().take(n - num_clusters) {
        parent[merge.left] = n + t + 1;
        parent[merge.right] = n + t + 1;
    }
    let root_of = |mut id: usize| -> usize {
        while parent[id] != id {
            id = parent[id];
        }
        id
    };

    let mut label_of_root = std::collections::HashMap::new();
    let mut assignment = Vec::with_capacity(n);
    for leaf in 1..=n {
        let root = root_of(leaf);
        let next = label_of_root.len() + 1;
        let label = *label_of_root.entry(root).or_insert(next);
        assignment.push(label);
    }
    debug_assert_eq!(label_of_root.len(), num_clusters);
    Ok(ClusterCut {
        assignment,
        num_clusters,
    })
}

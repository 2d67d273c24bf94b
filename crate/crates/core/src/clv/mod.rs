//! Clustering of variables around latent components: correlation distances,
//! Ward dendrogram, tree cuts, and resultant-vector extraction.

mod distance;
mod rv;
mod tree;
mod ward;

pub use distance::{correlation_distance_matrix, DistanceMatrix};
pub use rv::{extract_rvs, extract_rvs_with, RVMatrix, StdConvention};
pub use tree::{cut_tree, ClusterCut};
pub use ward::{ward_linkage, Dendrogram, Merge};

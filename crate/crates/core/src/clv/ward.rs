//! Agglomerative Ward linkage over a precomputed distance matrix.

use super::DistanceMatrix;
use crate::Result;

/// One agglomeration step. Cluster ids follow the usual stepwise scheme:
/// leaves are `1..=I` and the t-th merge (1-based) creates cluster `I + t`.
/// `left < right` always.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    /// Ward distance between the merged clusters; nondecreasing over steps.
    pub height: f64,
    /// Number of leaves in the new cluster.
    pub size: usize,
}

/// The full merge sequence of a hierarchical clustering over `num_leaves`
/// variables.
#[derive(Debug, Clone)]
pub struct Dendrogram {
    merges: Vec<Merge>,
    num_leaves: usize,
}

impl Dendrogram {
    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn num_leaves(&self) -> usize {
        self.num_leaves
    }
}

/// Ward linkage via the Lance-Williams recurrence.
///
/// Distances are squared internally; the update for the merge of `a` and
/// `a'` against any other cluster `b` is
///
/// ```text
/// d'(A,b)^2 = [ (n_a + n_b) d(a,b)^2 + (n_a' + n_b) d(a',b)^2 - n_b d(a,a')^2 ]
///             / (n_a + n_a' + n_b)
/// ```
///
/// Reported heights are the unsquared Ward distances. When several pairs
/// attain the minimal distance the one with the lexicographically smallest
/// `(smaller id, larger id)` key is merged, which makes the sequence
/// deterministic across platforms.
pub fn ward_linkage(dist: &DistanceMatrix) -> Result<Dendrogram> {
    let n = dist.dimension();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    if n < 2 {
        return Ok(Dendrogram {
            merges,
            num_leaves: n,
        });
    }

    // Working copy of squared distances over active cluster slots. Slot
    // bookkeeping: merging into the left slot, compacting the right with a
    // swap-remove.
    let mut sq = vec![0.0f64; n * n];
    for a in 0..n {
        for b in 0..n {
            let d = dist.get(a, b);
            sq[a * n + b] = d * d;
        }
    }
    let mut ids: Vec<usize> = (1..=n).collect();
    let mut sizes: Vec<usize> = vec![1; n];
    let mut active = n;

    for step in 1..n {
        // locate the minimal pair, breaking exact ties by id key
        let mut best = f64::INFINITY;
        let mut best_key = (usize::MAX, usize::MAX);
        let mut best_slots = (0, 0);
        for a in 0..active {
            for b in (a + 1)..active {
                let v = sq[a * n + b];
                let key = if ids[a] < ids[b] {
                    (ids[a], ids[b])
                } else {
                    (ids[b], ids[a])
                };
                if v < best || (v == best && key < best_key) {
                    best = v;
                    best_key = key;
                    best_slots = (a, b);
                }
            }
        }
        let (pa, pb) = best_slots;
        let (size_a, size_b) = (sizes[pa], sizes[pb]);
        merges.push(Merge {
            left: best_key.0,
            right: best_key.1,
            height: best.max(0.0).sqrt(),
            size: size_a + size_b,
        });

        // Lance-Williams update into slot pa
        let merged_sq = sq[pa * n + pb];
        for x in 0..active {
            if x == pa || x == pb {
                continue;
            }
            let size_x = sizes[x] as f64;
            let updated = ((size_a as f64 + size_x) * sq[pa * n + x]
                + (size_b as f64 + size_x) * sq[pb * n + x]
                - size_x * merged_sq)
                / (size_a as f64 + size_b as f64 + size_x);
            sq[pa * n + x] = updated;
            sq[x * n + pa] = updated;
        }
        ids[pa] = n + step;
        sizes[pa] = size_a + size_b;

        // compact: move the last active slot into pb
        let last = active - 1;
        if pb != last {
            for x in 0..active {
                sq[pb * n + x] = sq[last * n + x];
                sq[x * n + pb] = sq[x * n + last];
            }
            sq[pb * n + pb] = 0.0;
            ids[pb] = ids[last];
            sizes[pb] = sizes[last];
        }
        active -= 1;
    }

    Ok(Dendrogram {
        merges,
        num_leaves: n,
    })
}

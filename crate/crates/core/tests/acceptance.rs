//! Acceptance suite. Each test checks one release criterion at its pinned
//! tolerance and prints a `criterion N PASS/FAIL` line with the measured
//! values (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! The Monte-Carlo criteria share three grids of 50-replicate cells computed
//! once per run; the whole suite is deterministic under `BASE_SEED`.

use std::collections::BTreeMap;
use std::sync::OnceLock;
use std::time::Instant;

use ndarray::Array2;
use rand::Rng as _;

use clv_core::classify::{congruence, kmeans_two};
use clv_core::clv::{
    correlation_distance_matrix, cut_tree, extract_rvs, ward_linkage, DistanceMatrix, Merge,
    RVMatrix,
};
use clv_core::datagen::generate_dataset;
use clv_core::experiment::{
    compare_anova, run_grid, standard_anova_rows, GridConfig, GridResults, GroupAxis,
};
use clv_core::io;
use clv_core::seed::rng_for;
use clv_core::stats::special::{f_upper_p, t_two_sided_p};
use clv_core::stats::mann_whitney_u;

const BASE_SEED: u64 = 20260809;
const REPLICATES: usize = 50;

struct HeadlineData {
    /// (I=300, J=6) across the full k ladder, with descriptive scans.
    k_sweep: GridResults,
    /// (I in {50, 100}, J=6, k=1).
    variable_sweep: GridResults,
    /// (I=300, J in {4, 8}, k=1).
    factor_sweep: GridResults,
}

fn headline() -> &'static HeadlineData {
    static DATA: OnceLock<HeadlineData> = OnceLock::new();
    DATA.get_or_init(|| {
        let k_sweep = run_grid(&GridConfig {
            variables: vec![300],
            factors: vec![6],
            k: (0..=10).map(|i| i as f64 / 10.0).collect(),
            replicates: REPLICATES,
            base_seed: BASE_SEED,
            ..GridConfig::default()
        })
        .expect("k sweep");
        let variable_sweep = run_grid(&GridConfig {
            variables: vec![50, 100],
            factors: vec![6],
            k: vec![1.0],
            replicates: REPLICATES,
            base_seed: BASE_SEED,
            ..GridConfig::default()
        })
        .expect("variable sweep");
        let factor_sweep = run_grid(&GridConfig {
            variables: vec![300],
            factors: vec![4, 8],
            k: vec![1.0],
            replicates: REPLICATES,
            base_seed: BASE_SEED,
            ..GridConfig::default()
        })
        .expect("factor sweep");
        HeadlineData {
            k_sweep,
            variable_sweep,
            factor_sweep,
        }
    })
}

fn mean_congruence(grid: &GridResults, variables: usize, factors: usize, k: f64, rv: usize) -> f64 {
    grid.cells
        .iter()
        .find(|c| c.variables == variables && c.factors == factors && c.k == k && c.rv_count == rv)
        .unwrap_or_else(|| panic!("missing cell ({variables}, {factors}, {k}, rv={rv})"))
        .mean_congruence
}

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "criterion {criterion} {}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

// ---------------------------------------------------------------------------
// 1. chance floor
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_chance_floor() {
    // fresh single-cell run on one worker to honor the runtime target
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let grid = pool
        .install(|| {
            run_grid(&GridConfig {
                variables: vec![300],
                factors: vec![6],
                k: vec![0.0],
                replicates: REPLICATES,
                base_seed: BASE_SEED,
                ..GridConfig::default()
            })
        })
        .unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let mean = mean_congruence(&grid, 300, 6, 0.0, 6);
    let pass = (17.0..=23.0).contains(&mean) && elapsed < 120.0;
    report(
        "1",
        pass,
        &format!(
            "mean congruence at k=0 is {mean:.2} (band [17, 23]), \
             cell computed in {elapsed:.1}s on one worker (limit 120s)"
        ),
    );
    assert!(pass, "mean {mean}, elapsed {elapsed}s");
}

// ---------------------------------------------------------------------------
// 2. endpoint reproduction
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_endpoint_reproduction() {
    let data = headline();
    let at_k01 = mean_congruence(&data.k_sweep, 300, 6, 0.1, 6);
    let at_k1 = mean_congruence(&data.k_sweep, 300, 6, 1.0, 6);
    let pass_low = (29.0..=35.0).contains(&at_k01);
    let pass_high = (36.0..=40.0).contains(&at_k1);
    report(
        "2",
        pass_low && pass_high,
        &format!(
            "mean congruence at k=0.1 is {at_k01:.2} (band 32±3), \
             at k=1 is {at_k1:.2} (band 38±2)"
        ),
    );
    assert!(pass_high, "k=1 endpoint out of band: {at_k1:.2}");
    assert!(pass_low, "k=0.1 endpoint out of band: {at_k01:.2}");
}

// ---------------------------------------------------------------------------
// 3. rv-count ordering
// ---------------------------------------------------------------------------

#[test]
fn criterion_3_rv_count_ordering() {
    let data = headline();
    let mut means = BTreeMap::new();
    for rv in 2..=6 {
        means.insert(rv, mean_congruence(&data.k_sweep, 300, 6, 1.0, rv));
    }
    let six = means[&6];
    let pass = (2..=5).all(|rv| six >= means[&rv]);
    report(
        "3",
        pass,
        &format!("mean congruence by rv count at k=1: {means:.2?} (6 RVs must be >= each)"),
    );
    assert!(pass, "6-RV mean {six:.2} not best: {means:?}");
}

// ---------------------------------------------------------------------------
// 4. variable-count trend
// ---------------------------------------------------------------------------

#[test]
fn criterion_4_variable_count_trend() {
    let data = headline();
    let at_50 = mean_congruence(&data.variable_sweep, 50, 6, 1.0, 6);
    let at_100 = mean_congruence(&data.variable_sweep, 100, 6, 1.0, 6);
    let at_300 = mean_congruence(&data.k_sweep, 300, 6, 1.0, 6);
    let pass = at_50 < at_100 && at_100 < at_300;
    report(
        "4",
        pass,
        &format!("mean congruence at k=1: I=50 -> {at_50:.2}, I=100 -> {at_100:.2}, I=300 -> {at_300:.2} (strictly increasing)"),
    );
    assert!(pass, "ordering violated: {at_50:.2}, {at_100:.2}, {at_300:.2}");
}

// ---------------------------------------------------------------------------
// 5. factor-count insensitivity (soft criterion)
// ---------------------------------------------------------------------------

#[test]
fn criterion_5_factor_count_insensitivity() {
    let data = headline();
    let mut rows = data.factor_sweep.replicates.clone();
    rows.extend(
        data.k_sweep
            .replicates
            .iter()
            .filter(|r| r.k == 1.0)
            .cloned(),
    );
    let result = compare_anova(&rows, GroupAxis::FactorCounts { rv_count: 6 }).unwrap();
    let pass = result.p_value > 0.01;
    report(
        "5",
        pass,
        &format!(
            "ANOVA of congruence across J in {{4, 6, 8}} at (I=300, k=1, 6 RVs): \
             F = {:.3}, p = {:.4} (insensitivity requires p > 0.01)",
            result.statistic, result.p_value
        ),
    );
    assert!(pass, "factor count influenced congruence: p = {}", result.p_value);
}

// ---------------------------------------------------------------------------
// 6. descriptive bands
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_descriptive_bands() {
    let data = headline();
    let scans: Vec<_> = data
        .k_sweep
        .replicates
        .iter()
        .filter_map(|r| r.descriptive.map(|d| (r.k, d)))
        .collect();
    assert_eq!(scans.len(), 11 * REPLICATES, "every replicate scanned");
    let mean_of = |f: &dyn Fn(&clv_core::experiment::DescriptiveStats) -> f64| -> f64 {
        scans.iter().map(|(_, d)| f(d)).sum::<f64>() / scans.len() as f64
    };
    let u_sig = mean_of(&|d| d.u_sig_fraction);
    let r_sig = mean_of(&|d| d.r_sig_fraction);
    let mean_r = mean_of(&|d| d.mean_r);

    // nominal-rate check at k = 0: the U scan must reject near 5%
    let null_rows: Vec<f64> = scans
        .iter()
        .filter(|(k, _)| *k == 0.0)
        .map(|(_, d)| d.u_sig_fraction)
        .collect();
    let u_sig_null = null_rows.iter().sum::<f64>() / null_rows.len() as f64;

    let pass = (0.09..=0.33).contains(&u_sig)
        && (0.01..=0.09).contains(&r_sig)
        && (0.10..=0.20).contains(&mean_r)
        && (0.02..=0.09).contains(&u_sig_null);
    report(
        "6",
        pass,
        &format!(
            "across k: mean u_sig_fraction {u_sig:.3} (band [0.09, 0.33]), \
             mean r_sig_fraction {r_sig:.3} (band [0.01, 0.09]), \
             mean_r {mean_r:.3} (band [0.10, 0.20]); \
             at k=0 u_sig_fraction {u_sig_null:.3} (band [0.02, 0.09])"
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------------------
// 7. anova significance reproduction
// ---------------------------------------------------------------------------

#[test]
fn criterion_7_anova_significance() {
    let data = headline();
    let positive_k: Vec<_> = data
        .k_sweep
        .replicates
        .iter()
        .filter(|r| r.k > 0.0)
        .cloned()
        .collect();
    let across_k = compare_anova(&positive_k, GroupAxis::KValues { rv_count: 6 }).unwrap();

    let at_k1: Vec<_> = data
        .k_sweep
        .replicates
        .iter()
        .filter(|r| r.k == 1.0)
        .cloned()
        .collect();
    let across_rv = compare_anova(&at_k1, GroupAxis::RvCounts).unwrap();

    let pass = across_k.p_value < 0.0001 && across_rv.p_value < 0.01;
    report(
        "7",
        pass,
        &format!(
            "congruence vs k (0.1..1, 6 RVs): F = {:.2}, p = {:.2e} (need p < 1e-4); \
             vs rv count (k=1): F = {:.2}, p = {:.4} (need p < 0.01)",
            across_k.statistic, across_k.p_value, across_rv.statistic, across_rv.p_value
        ),
    );
    assert!(
        across_k.p_value < 0.0001,
        "k effect not significant: p = {}",
        across_k.p_value
    );
    assert!(
        across_rv.p_value < 0.01,
        "rv-count effect not significant: p = {}",
        across_rv.p_value
    );
}

/// Grid-invariant corollary of criterion 2: over k in 0.1..=1 the mean
/// congruence trends upward (positive Spearman rank correlation).
#[test]
fn invariant_monotone_congruence_trend_in_k() {
    let data = headline();
    let mut points: Vec<(f64, f64)> = (1..=10)
        .map(|i| {
            let k = i as f64 / 10.0;
            (k, mean_congruence(&data.k_sweep, 300, 6, k, 6))
        })
        .collect();
    let rank = |values: &[f64]| -> Vec<f64> {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let mut ranks = vec![0.0; values.len()];
        for (r, &i) in order.iter().enumerate() {
            ranks[i] = r as f64;
        }
        ranks
    };
    points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let ks: Vec<f64> = points.iter().map(|p| p.0).collect();
    let means: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (rk, rm) = (rank(&ks), rank(&means));
    let n = rk.len() as f64;
    let mean_rank = (n - 1.0) / 2.0;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (a, b) in rk.iter().zip(&rm) {
        cov += (a - mean_rank) * (b - mean_rank);
        var_a += (a - mean_rank) * (a - mean_rank);
        var_b += (b - mean_rank) * (b - mean_rank);
    }
    let spearman = cov / (var_a.sqrt() * var_b.sqrt());
    println!("invariant: Spearman(k, mean congruence) = {spearman:.3} over k=0.1..1");
    assert!(spearman > 0.0, "trend not positive: {spearman}");
}

// ---------------------------------------------------------------------------
// 8. oracle suites
// ---------------------------------------------------------------------------

/// From-scratch Ward oracle over the original squared dissimilarities;
/// no Lance-Williams recurrence involved.
fn naive_ward(dist: &DistanceMatrix) -> Vec<Merge> {
    let n = dist.dimension();
    let mut clusters: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i + 1, vec![i])).collect();
    let sq = |a: usize, b: usize| dist.get(a, b) * dist.get(a, b);
    let within = |leaves: &[usize]| -> f64 {
        let mut s = 0.0;
        for i in 0..leaves.len() {
            for j in (i + 1)..leaves.len() {
                s += sq(leaves[i], leaves[j]);
            }
        }
        s
    };
    let mut merges = Vec::new();
    for step in 1..n {
        let mut best = f64::INFINITY;
        let mut best_key = (usize::MAX, usize::MAX);
        let mut best_pair = (0, 0);
        for i in 0..clusters.len() {
            for j in (i + 1)..clusters.len() {
                let (li, lj) = (&clusters[i].1, &clusters[j].1);
                let (na, nb) = (li.len() as f64, lj.len() as f64);
                let mut cross = 0.0;
                for &a in li {
                    for &b in lj {
                        cross += sq(a, b);
                    }
                }
                let d2 =
                    2.0 / (na + nb) * (cross - nb / na * within(li) - na / nb * within(lj));
                let key = if clusters[i].0 < clusters[j].0 {
                    (clusters[i].0, clusters[j].0)
                } else {
                    (clusters[j].0, clusters[i].0)
                };
                if d2 < best || (d2 == best && key < best_key) {
                    best = d2;
                    best_key = key;
                    best_pair = (i, j);
                }
            }
        }
        let (i, j) = best_pair;
        let mut leaves = clusters[i].1.clone();
        leaves.extend_from_slice(&clusters[j].1);
        merges.push(Merge {
            left: best_key.0,
            right: best_key.1,
            height: best.max(0.0).sqrt(),
            size: leaves.len(),
        });
        clusters.remove(j);
        clusters.remove(i);
        clusters.push((n + step, leaves));
    }
    merges
}

#[test]
fn criterion_8a_ward_matches_bruteforce_oracle() {
    let mut rng = rng_for(BASE_SEED ^ 0x8a);
    let mut checked = 0;
    for round in 0..200 {
        let n = 3 + round % 10; // up to 12 leaves
        let mut m = Array2::zeros((n, n));
        for a in 0..n {
            for b in (a + 1)..n {
                let d = rng.random::<f64>() * 2.0;
                m[(a, b)] = d;
                m[(b, a)] = d;
            }
        }
        let dist = DistanceMatrix::new(m).unwrap();
        let fast = ward_linkage(&dist).unwrap();
        let slow = naive_ward(&dist);
        for (f, s) in fast.merges().iter().zip(&slow) {
            assert_eq!(
                (f.left, f.right, f.size),
                (s.left, s.right, s.size),
                "merge sequence diverged on instance {round}"
            );
        }
        checked += 1;
    }
    report(
        "8a",
        true,
        &format!("ward_linkage matched the from-scratch oracle on {checked} instances"),
    );
}

/// Exact two-sided Mann-Whitney p by brute-force enumeration of labelings.
fn mwu_permutation_p(sample_a: &[f64], sample_b: &[f64]) -> f64 {
    let pooled: Vec<f64> = sample_a.iter().chain(sample_b).copied().collect();
    let n = pooled.len();
    let na = sample_a.len();
    let u_min = |in_a: &dyn Fn(usize) -> bool| -> f64 {
        let mut u_a = 0.0f64;
        for i in 0..n {
            if !in_a(i) {
                continue;
            }
            for j in 0..n {
                if in_a(j) {
                    continue;
                }
                if pooled[i] > pooled[j] {
                    u_a += 1.0;
                } else if pooled[i] == pooled[j] {
                    u_a += 0.5;
                }
            }
        }
        u_a.min((na * (n - na)) as f64 - u_a)
    };
    let observed = u_min(&|i| i < na);
    let (mut total, mut at_most) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != na {
            continue;
        }
        total += 1;
        if u_min(&|i| mask >> i & 1 == 1) <= observed + 1e-9 {
            at_most += 1;
        }
    }
    at_most as f64 / total as f64
}

#[test]
fn criterion_8b_mwu_within_001_of_permutation_oracle() {
    let mut rng = rng_for(BASE_SEED ^ 0x8b);
    let mut worst = 0.0f64;
    for _ in 0..60 {
        let na = 3 + (rng.random::<u32>() % 6) as usize; // 3..=8
        let nb = 3 + (rng.random::<u32>() % 6) as usize;
        let a: Vec<f64> = (0..na).map(|_| rng.random::<f64>() * 10.0).collect();
        let b: Vec<f64> = (0..nb).map(|_| rng.random::<f64>() * 10.0 + 1.0).collect();
        let p = mann_whitney_u(&a, &b).unwrap().p_value;
        let exact = mwu_permutation_p(&a, &b);
        worst = worst.max((p - exact).abs());
    }
    let pass = worst < 0.01;
    report(
        "8b",
        pass,
        &format!("largest |p - exact permutation p| over 60 small samples: {worst:.2e} (limit 0.01)"),
    );
    assert!(pass, "worst deviation {worst}");
}

/// ln Gamma at half-integers by the product recurrence (independent of the
/// Lanczos path in the crate).
fn ln_gamma_half(z: f64) -> f64 {
    let mut acc = 0.0;
    let mut z = z;
    while z > 1.0 {
        z -= 1.0;
        acc += z.ln();
    }
    if (z - 0.5).abs() < 1e-12 {
        acc + 0.5 * std::f64::consts::PI.ln()
    } else {
        acc
    }
}

/// Simpson quadrature of a density tail over [lower, inf), mapped onto [0, 1).
fn simpson_tail(density: impl Fn(f64) -> f64, lower: f64) -> f64 {
    let integrand = |s: f64| {
        let rest = 1.0 - s;
        density(lower + s / rest) / (rest * rest)
    };
    let steps = 200_000;
    let h = 1.0 / steps as f64;
    let mut sum = integrand(0.0);
    for i in 1..steps {
        sum += integrand(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

#[test]
fn criterion_8c_t_and_f_pvalues_within_1e6_of_quadrature() {
    let mut worst = 0.0f64;
    for &(t, df) in &[(0.7f64, 8.0f64), (2.0243, 38.0), (2.6904, 38.0), (3.4, 18.0)] {
        let ln_norm = ln_gamma_half((df + 1.0) / 2.0)
            - ln_gamma_half(df / 2.0)
            - 0.5 * (df * std::f64::consts::PI).ln();
        let expected =
            2.0 * simpson_tail(|u| (ln_norm - (df + 1.0) / 2.0 * (1.0 + u * u / df).ln()).exp(), t);
        worst = worst.max((t_two_sided_p(t, df) - expected).abs());
    }
    for &(f, d1, d2) in &[(1.5f64, 4.0f64, 245.0f64), (6.28, 4.0, 245.0), (23.19, 9.0, 490.0), (2.2, 2.0, 117.0)] {
        let ln_norm = ln_gamma_half((d1 + d2) / 2.0)
            - ln_gamma_half(d1 / 2.0)
            - ln_gamma_half(d2 / 2.0)
            + (d1 / 2.0) * (d1 / d2).ln();
        let expected = simpson_tail(
            |x| {
                (ln_norm + (d1 / 2.0 - 1.0) * x.ln()
                    - (d1 + d2) / 2.0 * (1.0 + d1 * x / d2).ln())
                .exp()
            },
            f,
        );
        worst = worst.max((f_upper_p(f, d1, d2) - expected).abs());
    }
    let pass = worst < 1e-6;
    report(
        "8c",
        pass,
        &format!("largest |p - quadrature oracle| across t and F reference points: {worst:.2e} (limit 1e-6)"),
    );
    assert!(pass, "worst deviation {worst}");
}

#[test]
fn criterion_8d_kmeans_fixpoint_and_swap_optimality() {
    let mut rng = rng_for(BASE_SEED ^ 0x8d);
    for round in 0..100 {
        let subjects = 6 + round % 30;
        let dims = 2 + round % 5;
        let values = Array2::from_shape_fn((subjects, dims), |_| rng.random::<f64>() * 6.0 - 3.0);
        let rvs = RVMatrix {
            values: values.clone(),
            num_rvs: dims,
        };
        let labels = kmeans_two(&rvs, 10, round as u64).unwrap();

        let mut centroids = [vec![0.0; dims], vec![0.0; dims]];
        let mut counts = [0usize; 2];
        for s in 0..subjects {
            let c = (labels[s] - 1) as usize;
            counts[c] += 1;
            for d in 0..dims {
                centroids[c][d] += values[(s, d)];
            }
        }
        for c in 0..2 {
            assert!(counts[c] > 0, "round {round}: empty cluster returned");
            for d in 0..dims {
                centroids[c][d] /= counts[c] as f64;
            }
        }
        let dist_to = |s: usize, c: usize| -> f64 {
            (0..dims)
                .map(|d| (values[(s, d)] - centroids[c][d]).powi(2))
                .sum()
        };
        for s in 0..subjects {
            let own = (labels[s] - 1) as usize;
            // Lloyd fixpoint: each subject sits with its nearer centroid, so
            // flipping any single label cannot lower the assignment cost
            assert!(
                dist_to(s, own) <= dist_to(s, 1 - own) + 1e-9,
                "round {round}: subject {s} not at its nearest centroid"
            );
        }
    }
    report(
        "8d",
        true,
        "k-means output was a Lloyd fixpoint beating all single-label swaps on 100 random RV matrices",
    );
}

#[test]
fn criterion_8e_pipeline_affine_invariance() {
    let mut rng = rng_for(BASE_SEED ^ 0x8e);
    let params = clv_core::datagen::GeneratorParams {
        num_variables: 80,
        num_subjects: 40,
        num_factors: 5,
        factor_strength: 0.7,
        seed: BASE_SEED ^ 0xaff,
        ..Default::default()
    };
    let (dataset, _, _, _) = generate_dataset(&params).unwrap();
    let base = dataset.observations.clone();
    let mut transformed = base.clone();
    for i in 0..transformed.ncols() {
        let alpha = 0.25 + rng.random::<f64>() * 5.0;
        let beta = rng.random::<f64>() * 40.0 - 20.0;
        transformed.column_mut(i).mapv_inplace(|v| alpha * v + beta);
    }

    let d_base = correlation_distance_matrix(&base).unwrap();
    let d_moved = correlation_distance_matrix(&transformed).unwrap();
    let mut worst = 0.0f64;
    for a in 0..80 {
        for b in 0..80 {
            worst = worst.max((d_base.get(a, b) - d_moved.get(a, b)).abs());
        }
    }

    let t_base = ward_linkage(&d_base).unwrap();
    let t_moved = ward_linkage(&d_moved).unwrap();
    for (x, y) in t_base.merges().iter().zip(t_moved.merges()) {
        assert_eq!((x.left, x.right, x.size), (y.left, y.right, y.size));
        worst = worst.max((x.height - y.height).abs());
    }

    let truth = dataset.true_labels.as_deref().unwrap();
    for rv_count in 2..=6 {
        let c_base = cut_tree(&t_base, rv_count).unwrap();
        let c_moved = cut_tree(&t_moved, rv_count).unwrap();
        assert_eq!(c_base, c_moved, "cut diverged at {rv_count} clusters");
        let r_base = extract_rvs(&base, &c_base).unwrap();
        let r_moved = extract_rvs(&transformed, &c_moved).unwrap();
        for (x, y) in r_base.values.iter().zip(r_moved.values.iter()) {
            worst = worst.max((x - y).abs());
        }
        let p_base = kmeans_two(&r_base, 10, 42).unwrap();
        let p_moved = kmeans_two(&r_moved, 10, 42).unwrap();
        assert_eq!(
            congruence(&p_base, truth).unwrap(),
            congruence(&p_moved, truth).unwrap(),
            "congruence diverged at {rv_count} clusters"
        );
    }
    let pass = worst < 1e-9;
    report(
        "8e",
        pass,
        &format!(
            "distances, heights, cuts, RVs, and congruence unchanged under positive \
             affine transforms; largest numeric drift {worst:.2e} (limit 1e-9)"
        ),
    );
    assert!(pass, "drift {worst}");
}

// ---------------------------------------------------------------------------
// 9. determinism and runtime of the reduced grid
// ---------------------------------------------------------------------------

#[test]
fn criterion_9_reduced_grid_determinism_and_runtime() {
    let config = GridConfig {
        replicates: 10,
        base_seed: BASE_SEED,
        ..GridConfig::default()
    };
    let dir = tempfile::tempdir().unwrap();
    let mut written: Vec<Vec<Vec<u8>>> = Vec::new();
    let start = Instant::now();
    let mut first_elapsed = 0.0;
    for (run, workers) in [(0usize, 1usize), (1, 4)] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .unwrap();
        let results = pool.install(|| run_grid(&config)).unwrap();
        if run == 0 {
            first_elapsed = start.elapsed().as_secs_f64();
        }
        assert!(results.failures.is_empty(), "{:?}", results.failures);
        let base = dir.path().join(format!("run{run}"));
        std::fs::create_dir_all(&base).unwrap();
        io::write_replicates_csv(&base.join("replicates.csv"), &results.replicates).unwrap();
        io::write_cells_csv(&base.join("cells.csv"), &results.cells).unwrap();
        io::write_descriptive_csv(&base.join("descriptive.csv"), &results.replicates).unwrap();
        let anova = standard_anova_rows(&results.replicates, &config);
        io::write_anova_csv(&base.join("anova.csv"), &anova).unwrap();
        written.push(
            ["replicates.csv", "cells.csv", "descriptive.csv", "anova.csv"]
                .iter()
                .map(|name| std::fs::read(base.join(name)).unwrap())
                .collect(),
        );
    }
    let identical = written[0] == written[1];
    let pass = identical && first_elapsed < 240.0;
    report(
        "9",
        pass,
        &format!(
            "reduced grid (replicates=10): 1-worker and 4-worker runs produced \
             byte-identical CSVs = {identical}; first run took {first_elapsed:.1}s (limit 240s)"
        ),
    );
    assert!(identical, "outputs differ across worker counts");
    assert!(first_elapsed < 240.0, "took {first_elapsed}s");
}

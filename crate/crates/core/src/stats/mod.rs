//! The statistical battery: Mann-Whitney U, Pearson correlation test, and
//! one-way ANOVA. All tests are two-sided and return a [`TestResult`].

pub mod special;

use crate::{Error, Result};
use special::{f_upper_p, normal_cdf, t_two_sided_p};

/// Which procedure produced a [`TestResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    MannWhitneyU,
    PearsonR,
    AnovaF,
}

/// A test statistic with its two-sided p-value.
#[derive(Debug, Clone, Copy)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub method: Method,
}

/// Midranks of the pooled sample: tied runs share the average of the ranks
/// they occupy. Returns (ranks aligned with the input order, tie correction
/// term sum of t^3 - t over tied groups).
fn midranks(pooled: &[f64]) -> (Vec<f64>, f64) {
    let n = pooled.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| pooled[a].partial_cmp(&pooled[b]).expect("NaN in sample"));
    let mut ranks = vec![0.0; n];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && pooled[order[j + 1]] == pooled[order[i]] {
            j += 1;
        }
        // positions i..=j (0-based) share the midrank
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    (ranks, tie_term)
}

/// Largest per-group size at which the tie-free p-value is computed exactly.
const MWU_EXACT_LIMIT: usize = 8;

/// Two-sided Mann-Whitney U test.
///
/// The statistic is `min(U_a, U_b)` from midrank sums. For tie-free samples
/// with at most [`MWU_EXACT_LIMIT`] values per group the p-value comes from
/// the exact null distribution; otherwise from the normal approximation with
/// tie-corrected variance and a continuity correction of 1/2, which is
/// accurate to a few thousandths at the 20-vs-20 sample sizes this crate
/// works with. If every pooled value is identical the variance vanishes and
/// the p-value is 1.
pub fn mann_whitney_u(sample_a: &[f64], sample_b: &[f64]) -> Result<TestResult> {
    if sample_a.is_empty() || sample_b.is_empty() {
        return Err(Error::invalid("mann_whitney_u: empty sample"));
    }
    let (na, nb) = (sample_a.len() as f64, sample_b.len() as f64);
    let pooled: Vec<f64> = sample_a.iter().chain(sample_b.iter()).copied().collect();
    let (ranks, tie_term) = midranks(&pooled);
    let rank_sum_a: f64 = ranks[..sample_a.len()].iter().sum();
    let u_a = rank_sum_a - na * (na + 1.0) / 2.0;
    let u_b = na * nb - u_a;
    let u = u_a.min(u_b);

    let p_value = if tie_term == 0.0
        && sample_a.len().max(sample_b.len()) <= MWU_EXACT_LIMIT
    {
        mwu_exact_two_sided(sample_a.len(), sample_b.len(), u)
    } else {
        let n = na + nb;
        let mean = na * nb / 2.0;
        let var = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
        if var <= 0.0 {
            1.0 // every pooled value tied: the samples are indistinguishable
        } else {
            let z = (u - mean + 0.5) / var.sqrt();
            (2.0 * normal_cdf(z)).clamp(0.0, 1.0)
        }
    };
    Ok(TestResult {
        statistic: u,
        p_value,
        method: Method::MannWhitneyU,
    })
}

/// Exact two-sided p-value `min(1, 2 P(U <= u))` for tie-free samples, via
/// the standard counting recurrence over the null distribution of U.
fn mwu_exact_two_sided(na: usize, nb: usize, u: f64) -> f64 {
    let max_u = na * nb;
    // counts[m][w]: number of arrangements of m group-a among n group-b
    // values with U_a = w, built one b-value at a time via the Mann-Whitney
    // recurrence N(w; m, n) = N(w; m, n-1) + N(w-n; m-1, n). Ascending m
    // keeps row m-1 already advanced to the current n.
    let mut counts = vec![vec![0.0f64; max_u + 1]; na + 1];
    for row in counts.iter_mut() {
        row[0] = 1.0; // zero b-values: U = 0 in exactly one arrangement
    }
    for n in 1..=nb {
        for m in 1..=na {
            for w in (n..=max_u).rev() {
                counts[m][w] += counts[m - 1][w - n];
            }
        }
    }
    let total: f64 = counts[na].iter().sum();
    let tail: f64 = counts[na][..=(u.floor() as usize).min(max_u)].iter().sum();
    (2.0 * tail / total).min(1.0)
}

/// Pearson correlation coefficient of two equal-length slices.
///
/// Errors if either input is constant (the coefficient is undefined); the
/// `column` in the error is the argument position, 0 or 1.
pub fn pearson_r(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "pearson_r: length mismatch ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - mean_a, y - mean_b);
        cov += dx * dy;
        var_a += dx * dx;
        var_b += dy * dy;
    }
    if var_a == 0.0 {
        return Err(Error::DegenerateVariable { column: 0 });
    }
    if var_b == 0.0 {
        return Err(Error::DegenerateVariable { column: 1 });
    }
    // rounding in the norms can push |r| one ulp past 1
    Ok((cov / (var_a.sqrt() * var_b.sqrt())).clamp(-1.0, 1.0))
}

/// Two-sided Pearson correlation test.
///
/// `t = r sqrt((n-2) / (1-r^2))` against the t distribution with n-2 degrees
/// of freedom; |r| = 1 gives p = 0 exactly.
pub fn pearson_test(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "pearson_test: length mismatch ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 3 {
        return Err(Error::invalid("pearson_test: need at least 3 observations"));
    }
    let r = pearson_r(a, b)?;
    let df = (a.len() - 2) as f64;
    let p_value = if r.abs() >= 1.0 {
        0.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        t_two_sided_p(t, df)
    };
    Ok(TestResult {
        statistic: r,
        p_value,
        method: Method::PearsonR,
    })
}

/// One-way analysis of variance.
///
/// F is the ratio of between-group to within-group mean squares; the p-value
/// comes from the F distribution with (g-1, N-g) degrees of freedom.
pub fn anova_oneway(groups: &[Vec<f64>]) -> Result<TestResult> {
    if groups.len() < 2 {
        return Err(Error::invalid("anova_oneway: need at least 2 groups"));
    }
    if let Some(g) = groups.iter().position(|g| g.len() < 2) {
        return Err(Error::invalid(format!(
            "anova_oneway: group {g} has fewer than 2 values"
        )));
    }
    let total_n: usize = groups.iter().map(Vec::len).sum();
    let grand_mean =
        groups.iter().flatten().sum::<f64>() / total_n as f64;
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for group in groups {
        let n = group.len() as f64;
        let mean = group.iter().sum::<f64>() / n;
        ss_between += n * (mean - grand_mean) * (mean - grand_mean);
        ss_within += group.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>();
    }
    let df1 = (groups.len() - 1) as f64;
    let df2 = (total_n - groups.len()) as f64;
    if ss_within == 0.0 {
        return Err(Error::DegenerateInput(
            "anova_oneway: zero within-group variance".into(),
        ));
    }
    let f = (ss_between / df1) / (ss_within / df2);
    Ok(TestResult {
        statistic: f,
        p_value: f_upper_p(f, df1, df2),
        method: Method::AnovaF,
    })
}

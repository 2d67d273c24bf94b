//! Seeded generator for synthetic two-group datasets.
//!
//! Each observation is assembled as
//!
//! ```text
//! x[s][i] = (1/J) * sum_j k * f[g(s)][j][pos(s)] * l[i][j]  +  mu[i] * (1 + eps[s][i])
//! ```
//!
//! where the two groups' factor values are disjoint by construction: the
//! group-2 factor vector is the group-1 vector shifted up by 1.1 times its
//! range. `k` in [0, 1] scales the latent signal; at k = 0 the two groups are
//! identically distributed pure noise.
//!
//! Sampling order within [`generate_dataset`] is fixed (factor pairs, then
//! loadings, then noise means, then the epsilon matrix row by row), so one
//! seed always reproduces the same dataset bit for bit.

use ndarray::Array2;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::seed::{rng_for, Rng};
use crate::{Error, Result};

/// How the per-variable noise scale root `m` is drawn on [1, 10].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MDistribution {
    /// Uniform on [1, 10].
    #[default]
    Uniform,
    /// Normal with mean 5.5 and sd 1.5, clamped to [1, 10].
    ClampedNormal,
}

/// How the per-observation relative error is drawn on [-2, 2].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonDistribution {
    /// Uniform on [-2, 2] (zero mean, bounded).
    #[default]
    Uniform,
}

/// Parameters of the synthetic dataset generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    /// Number of observed variables I.
    pub num_variables: usize,
    /// Number of subjects S; must be even, half per group.
    pub num_subjects: usize,
    /// Number of latent factors J; must be less than I.
    pub num_factors: usize,
    /// Relative power k of the latent factors, in [0, 1].
    pub factor_strength: f64,
    /// Loading floor q in [0, 1]: loadings lie in [1-q, 1].
    pub loading_floor: f64,
    /// RNG seed; equal seeds give bit-identical datasets.
    pub seed: u64,
    #[serde(default)]
    pub m_distribution: MDistribution,
    #[serde(default)]
    pub epsilon_distribution: EpsilonDistribution,
}

impl Default for GeneratorParams {
    /// The headline configuration: 300 variables, 40 subjects, 6 factors,
    /// full factor strength, loading floor 0.25.
    fn default() -> Self {
        GeneratorParams {
            num_variables: 300,
            num_subjects: 40,
            num_factors: 6,
            factor_strength: 1.0,
            loading_floor: 0.25,
            seed: 0,
            m_distribution: MDistribution::default(),
            epsilon_distribution: EpsilonDistribution::default(),
        }
    }
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<()> {
        if self.num_variables == 0 {
            return Err(Error::invalid("num_variables must be positive"));
        }
        if self.num_subjects < 4 || self.num_subjects % 2 != 0 {
            return Err(Error::invalid(
                "num_subjects must be even and at least 4 (two per group)",
            ));
        }
        if self.num_factors == 0 {
            return Err(Error::invalid("num_factors must be positive"));
        }
        if self.num_factors >= self.num_variables {
            return Err(Error::invalid(format!(
                "num_factors ({}) must be less than num_variables ({})",
                self.num_factors, self.num_variables
            )));
        }
        if !(0.0..=1.0).contains(&self.factor_strength) {
            return Err(Error::invalid(format!(
                "factor_strength must be in [0, 1], got {}",
                self.factor_strength
            )));
        }
        if !(0.0..=1.0).contains(&self.loading_floor) {
            return Err(Error::invalid(format!(
                "loading_floor must be in [0, 1], got {}",
                self.loading_floor
            )));
        }
        Ok(())
    }

    pub fn group_size(&self) -> usize {
        self.num_subjects / 2
    }
}

/// The latent factor values of both groups, one row per factor.
#[derive(Debug, Clone)]
pub struct FactorSet {
    /// J x (S/2): group-1 factor values.
    pub group1: Array2<f64>,
    /// J x (S/2): group-2 factor values (group1 shifted by 1.1 x range).
    pub group2: Array2<f64>,
}

/// I x J loadings; every entry lies in [1-q, 1].
#[derive(Debug, Clone)]
pub struct LoadingMatrix {
    pub values: Array2<f64>,
}

/// Per-variable noise means mu_i = m_i^2, each in [1, 100].
#[derive(Debug, Clone)]
pub struct NoiseProfile {
    pub means: Vec<f64>,
}

/// A generated or ingested dataset: rows are subjects, columns variables.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub observations: Array2<f64>,
    /// Group index per subject, 1 or 2. `None` for external data without a
    /// group column.
    pub true_labels: Option<Vec<u8>>,
}

impl Dataset {
    pub fn num_subjects(&self) -> usize {
        self.observations.nrows()
    }

    pub fn num_variables(&self) -> usize {
        self.observations.ncols()
    }
}

/// Draw one factor pair: `f1` is `group_size` standard-normal values and
/// `f2 = f1 + 1.1 * (max(f1) - min(f1))`, so every group-2 value strictly
/// exceeds every group-1 value.
pub fn sample_factor_pair(rng: &mut Rng, group_size: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if group_size < 2 {
        return Err(Error::invalid(
            "sample_factor_pair: group_size must be at least 2 (a single point has zero range)",
        ));
    }
    let f1: Vec<f64> = (0..group_size)
        .map(|_| StandardNormal.sample(rng))
        .collect();
    Ok(offset_factor_pair(f1))
}

/// The deterministic half of [`sample_factor_pair`]: apply the 1.1 x range
/// offset to an existing group-1 vector.
pub fn offset_factor_pair(f1: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
    let max = f1.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = f1.iter().copied().fold(f64::INFINITY, f64::min);
    let offset = (max - min) * 1.1;
    let f2 = f1.iter().map(|&v| v + offset).collect();
    (f1, f2)
}

/// Draw the I x J loading matrix `L = M*q + (1-q)` with M uniform on [0, 1].
pub fn build_loadings(
    rng: &mut Rng,
    num_variables: usize,
    num_factors: usize,
    loading_floor: f64,
) -> Result<LoadingMatrix> {
    if !(0.0..=1.0).contains(&loading_floor) {
        return Err(Error::invalid(format!(
            "build_loadings: loading_floor must be in [0, 1], got {loading_floor}"
        )));
    }
    let q = loading_floor;
    let values = Array2::from_shape_fn((num_variables, num_factors), |_| {
        rng.random::<f64>() * q + (1.0 - q)
    });
    Ok(LoadingMatrix { values })
}

/// Draw the per-variable noise means mu_i = m_i^2 with m on [1, 10].
pub fn build_noise_profile(
    rng: &mut Rng,
    num_variables: usize,
    distribution: MDistribution,
) -> NoiseProfile {
    let means = (0..num_variables)
        .map(|_| {
            let m = match distribution {
                MDistribution::Uniform => rng.random_range(1.0..=10.0),
                MDistribution::ClampedNormal => {
                    let draw: f64 = rand_distr::Normal::new(5.5, 1.5)
                        .expect("valid normal parameters")
                        .sample(rng);
                    draw.clamp(1.0, 10.0)
                }
            };
            m * m
        })
        .collect();
    NoiseProfile { means }
}

/// Draw the S x I matrix of relative errors, row by row.
pub fn sample_epsilon(
    rng: &mut Rng,
    num_subjects: usize,
    num_variables: usize,
    distribution: EpsilonDistribution,
) -> Array2<f64> {
    Array2::from_shape_fn((num_subjects, num_variables), |_| match distribution {
        EpsilonDistribution::Uniform => rng.random_range(-2.0..=2.0),
    })
}

/// Combine sampled components into the observation matrix. Exposed separately
/// so the mixing formula can be exercised with forced components.
pub fn assemble_observations(
    factors: &FactorSet,
    loadings: &LoadingMatrix,
    noise: &NoiseProfile,
    epsilon: &Array2<f64>,
    factor_strength: f64,
) -> Array2<f64> {
    let num_factors = factors.group1.nrows();
    let group_size = factors.group1.ncols();
    let num_subjects = epsilon.nrows();
    let num_variables = epsilon.ncols();
    debug_assert_eq!(num_subjects, 2 * group_size);
    debug_assert_eq!(num_variables, loadings.values.nrows());
    debug_assert_eq!(num_variables, noise.means.len());

    let k_over_j = factor_strength / num_factors as f64;
    let mut observations = Array2::zeros((num_subjects, num_variables));
    for s in 0..num_subjects {
        let (group, pos) = if s < group_size {
            (&factors.group1, s)
        } else {
            (&factors.group2, s - group_size)
        };
        for i in 0..num_variables {
            let mut signal = 0.0;
            for j in 0..num_factors {
                signal += group[(j, pos)] * loadings.values[(i, j)];
            }
            let mu = noise.means[i];
            observations[(s, i)] = k_over_j * signal + mu + mu * epsilon[(s, i)];
        }
    }
    observations
}

/// Generate one dataset together with the components that produced it.
pub fn generate_dataset(
    params: &GeneratorParams,
) -> Result<(Dataset, FactorSet, LoadingMatrix, NoiseProfile)> {
    params.validate()?;
    let mut rng = rng_for(params.seed);
    let group_size = params.group_size();

    let mut group1 = Array2::zeros((params.num_factors, group_size));
    let mut group2 = Array2::zeros((params.num_factors, group_size));
    for j in 0..params.num_factors {
        let (f1, f2) = sample_factor_pair(&mut rng, group_size)?;
        for (pos, (&a, &b)) in f1.iter().zip(&f2).enumerate() {
            group1[(j, pos)] = a;
            group2[(j, pos)] = b;
        }
    }
    let factors = FactorSet { group1, group2 };

    let loadings = build_loadings(
        &mut rng,
        params.num_variables,
        params.num_factors,
        params.loading_floor,
    )?;
    let noise = build_noise_profile(&mut rng, params.num_variables, params.m_distribution);
    let epsilon = sample_epsilon(
        &mut rng,
        params.num_subjects,
        params.num_variables,
        params.epsilon_distribution,
    );

    let observations =
        assemble_observations(&factors, &loadings, &noise, &epsilon, params.factor_strength);
    let labels = (0..params.num_subjects)
        .map(|s| if s < group_size { 1 } else { 2 })
        .collect();
    Ok((
        Dataset {
            observations,
            true_labels: Some(labels),
        },
        factors,
        loadings,
        noise,
    ))
}

//! File formats: dataset/dendrogram/cut/classification CSVs, the experiment
//! output tables, and the TOML config files for the generator and the grid.
//!
//! Floats are written with Rust's shortest round-trip formatting, so files
//! regenerate byte-identically from equal inputs and parse back to the exact
//! same values.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::Array2;

use crate::classify::Classification;
use crate::clv::{ClusterCut, Dendrogram};
use crate::datagen::{Dataset, GeneratorParams};
use crate::experiment::{CellSummary, GridConfig, ReplicateResult};
use crate::stats::TestResult;
use crate::{Error, Result};

/// Column header for variable i (0-based): `v0001`, `v0002`, ...
pub fn variable_name(index: usize) -> String {
    format!("v{:04}", index + 1)
}

// ---------------------------------------------------------------------------
// dataset CSV
// ---------------------------------------------------------------------------

/// Write a dataset: `subject_id,group,v0001,...` with one row per subject.
/// The `group` column is omitted when the dataset carries no labels.
pub fn write_dataset_csv(path: &Path, dataset: &Dataset) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let variables = dataset.num_variables();
    write!(w, "subject_id")?;
    if dataset.true_labels.is_some() {
        write!(w, ",group")?;
    }
    for i in 0..variables {
        write!(w, ",{}", variable_name(i))?;
    }
    writeln!(w)?;
    for s in 0..dataset.num_subjects() {
        write!(w, "{}", s + 1)?;
        if let Some(labels) = &dataset.true_labels {
            write!(w, ",{}", labels[s])?;
        }
        for i in 0..variables {
            write!(w, ",{}", dataset.observations[(s, i)])?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a dataset CSV produced by [`write_dataset_csv`] or external data in
/// the same shape. The `group` column is optional; when present its values
/// must be 1 or 2.
pub fn read_dataset_csv(path: &Path) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .clone();
    let mut fields = headers.iter();
    if fields.next() != Some("subject_id") {
        return Err(Error::Parse(
            "first column must be subject_id".into(),
        ));
    }
    let mut rest: Vec<&str> = fields.collect();
    let has_group = rest.first() == Some(&"group");
    if has_group {
        rest.remove(0);
    }
    let variables = rest.len();
    if variables == 0 {
        return Err(Error::Parse("no variable columns".into()));
    }

    let mut values: Vec<f64> = Vec::new();
    let mut labels: Vec<u8> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        let expected = 1 + usize::from(has_group) + variables;
        if record.len() != expected {
            return Err(Error::Parse(format!(
                "row {}: expected {expected} fields, found {}",
                line + 2,
                record.len()
            )));
        }
        let mut fields = record.iter();
        let _subject = fields.next();
        if has_group {
            let g: u8 = fields
                .next()
                .unwrap()
                .parse()
                .map_err(|_| Error::Parse(format!("row {}: bad group value", line + 2)))?;
            if g != 1 && g != 2 {
                return Err(Error::Parse(format!(
                    "row {}: group must be 1 or 2, found {g}",
                    line + 2
                )));
            }
            labels.push(g);
        }
        for (column, field) in fields.enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                Error::Parse(format!(
                    "row {}, column {}: not a number: {field:?}",
                    line + 2,
                    variable_name(column)
                ))
            })?;
            values.push(v);
        }
    }
    let subjects = values.len() / variables;
    if subjects == 0 {
        return Err(Error::Parse("no data rows".into()));
    }
    let observations = Array2::from_shape_vec((subjects, variables), values)
        .map_err(|e| Error::Parse(e.to_string()))?;
    Ok(Dataset {
        observations,
        true_labels: has_group.then_some(labels),
    })
}

// ---------------------------------------------------------------------------
// pipeline exports
// ---------------------------------------------------------------------------

/// `merge_index,left_id,right_id,height,size` with the stepwise id scheme
/// (leaves 1..=I, merge t creates I + t).
pub fn write_dendrogram_csv(path: &Path, tree: &Dendrogram) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "merge_index,left_id,right_id,height,size")?;
    for (t, m) in tree.merges().iter().enumerate() {
        writeln!(w, "{},{},{},{},{}", t + 1, m.left, m.right, m.height, m.size)?;
    }
    w.flush()?;
    Ok(())
}

/// `variable_name,cluster_index` for one tree cut.
pub fn write_cut_csv(path: &Path, cut: &ClusterCut) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "variable_name,cluster_index")?;
    for (i, &cluster) in cut.assignment.iter().enumerate() {
        writeln!(w, "{},{}", variable_name(i), cluster)?;
    }
    w.flush()?;
    Ok(())
}

/// Classification export. With ground truth available the header is preceded
/// by a comment line carrying the congruence; without it only the predicted
/// groups are written.
pub fn write_classification_csv(
    path: &Path,
    predicted: &[u8],
    true_labels: Option<&[u8]>,
    scored: Option<&Classification>,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    match (true_labels, scored) {
        (Some(truth), Some(result)) => {
            writeln!(
                w,
                "# congruence_count={} congruence_fraction={}",
                result.congruence_count, result.congruence_fraction
            )?;
            writeln!(w, "subject_id,true_group,predicted_group")?;
            for (s, (&p, &t)) in predicted.iter().zip(truth).enumerate() {
                writeln!(w, "{},{},{}", s + 1, t, p)?;
            }
        }
        _ => {
            writeln!(w, "subject_id,predicted_group")?;
            for (s, &p) in predicted.iter().enumerate() {
                writeln!(w, "{},{}", s + 1, p)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// experiment tables
// ---------------------------------------------------------------------------

/// `replicates.csv`: one row per (replicate, rv_count).
pub fn write_replicates_csv(path: &Path, rows: &[ReplicateResult]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "I,J,k,replicate,rv_count,congruence_count,congruence_fraction"
    )?;
    for row in rows {
        for (&rv_count, &(count, fraction)) in &row.congruence_by_rv {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                row.variables, row.factors, row.k, row.replicate, rv_count, count, fraction
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `cells.csv`: one row per (cell, rv_count) aggregate.
pub fn write_cells_csv(path: &Path, cells: &[CellSummary]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "I,J,k,rv_count,n,mean_congruence,sd_congruence")?;
    for c in cells {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            c.variables, c.factors, c.k, c.rv_count, c.n, c.mean_congruence, c.sd_congruence
        )?;
    }
    w.flush()?;
    Ok(())
}

/// `descriptive.csv`: one row per scanned replicate.
pub fn write_descriptive_csv(path: &Path, rows: &[ReplicateResult]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "I,J,k,replicate,u_sig_fraction,r_sig_fraction,mean_r")?;
    for row in rows {
        if let Some(d) = &row.descriptive {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                row.variables,
                row.factors,
                row.k,
                row.replicate,
                d.u_sig_fraction,
                d.r_sig_fraction,
                d.mean_r
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `anova.csv`: one row per axis comparison. The p column is scientific
/// notation; positional formatting of values like 1e-124 is unreadable.
pub fn write_anova_csv(path: &Path, rows: &[(String, String, TestResult)]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "axis,fixed_coordinates,F,p")?;
    for (axis, fixed, result) in rows {
        writeln!(w, "{axis},{fixed},{},{:e}", result.statistic, result.p_value)?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// config files
// ---------------------------------------------------------------------------

/// Parse a generator config: flat TOML with the keys `variables`, `subjects`,
/// `factors`, `k`, `q`, `seed`, `m_distribution`, `epsilon_distribution`.
/// Missing keys fall back to the defaults; `seed` may be absent so the caller
/// can supply one.
pub fn parse_generator_config(text: &str) -> Result<(GeneratorParams, bool)> {
    #[derive(serde::Deserialize)]
    #[serde(deny_unknown_fields)]
    struct FileFormat {
        variables: Option<usize>,
        subjects: Option<usize>,
        factors: Option<usize>,
        k: Option<f64>,
        q: Option<f64>,
        seed: Option<u64>,
        m_distribution: Option<crate::datagen::MDistribution>,
        epsilon_distribution: Option<crate::datagen::EpsilonDistribution>,
    }
    let file: FileFormat = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let defaults = GeneratorParams::default();
    let params = GeneratorParams {
        num_variables: file.variables.unwrap_or(defaults.num_variables),
        num_subjects: file.subjects.unwrap_or(defaults.num_subjects),
        num_factors: file.factors.unwrap_or(defaults.num_factors),
        factor_strength: file.k.unwrap_or(defaults.factor_strength),
        loading_floor: file.q.unwrap_or(defaults.loading_floor),
        seed: file.seed.unwrap_or(0),
        m_distribution: file.m_distribution.unwrap_or_default(),
        epsilon_distribution: file.epsilon_distribution.unwrap_or_default(),
    };
    Ok((params, file.seed.is_some()))
}

pub fn read_generator_config(path: &Path) -> Result<(GeneratorParams, bool)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_generator_config(&text)
}

/// Parse a grid config: flat TOML over the [`GridConfig`] fields; missing
/// keys fall back to the full-study defaults.
pub fn parse_grid_config(text: &str) -> Result<GridConfig> {
    let config: GridConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

pub fn read_grid_config(path: &Path) -> Result<GridConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_grid_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::generate_dataset;

    #[test]
    fn dataset_round_trips_exactly() {
        let params = GeneratorParams {
            num_variables: 12,
            num_subjects: 8,
            num_factors: 2,
            seed: 31,
            ..GeneratorParams::default()
        };
        let (dataset, _, _, _) = generate_dataset(&params).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        write_dataset_csv(&path, &dataset).unwrap();
        let loaded = read_dataset_csv(&path).unwrap();
        assert_eq!(loaded.observations, dataset.observations);
        assert_eq!(loaded.true_labels, dataset.true_labels);

        // writing the load again is byte-identical
        let path2 = dir.path().join("data2.csv");
        write_dataset_csv(&path2, &loaded).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&path2).unwrap()
        );
    }

    #[test]
    fn dataset_without_group_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ext.csv");
        std::fs::write(
            &path,
            "subject_id,v0001,v0002\n1,0.5,1.5\n2,0.25,2.5\n3,1.0,0.125\n",
        )
        .unwrap();
        let dataset = read_dataset_csv(&path).unwrap();
        assert!(dataset.true_labels.is_none());
        assert_eq!(dataset.observations.dim(), (3, 2));
        assert_eq!(dataset.observations[(1, 1)], 2.5);
    }

    #[test]
    fn malformed_rows_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "subject_id,group,v0001\n1,1,oops\n").unwrap();
        let err = read_dataset_csv(&path).unwrap_err().to_string();
        assert!(err.contains("v0001"), "got: {err}");

        std::fs::write(&path, "subject_id,group,v0001\n1,7,1.0\n").unwrap();
        let err = read_dataset_csv(&path).unwrap_err().to_string();
        assert!(err.contains("group"), "got: {err}");
    }

    #[test]
    fn generator_config_parses_with_defaults() {
        let (params, has_seed) =
            parse_generator_config("variables = 100\nfactors = 8\nk = 0.3\n").unwrap();
        assert_eq!(params.num_variables, 100);
        assert_eq!(params.num_factors, 8);
        assert_eq!(params.factor_strength, 0.3);
        assert_eq!(params.num_subjects, 40);
        assert!(!has_seed);

        let (params, has_seed) =
            parse_generator_config("seed = 9\nm_distribution = \"clamped_normal\"\n").unwrap();
        assert!(has_seed);
        assert_eq!(params.seed, 9);
        assert_eq!(
            params.m_distribution,
            crate::datagen::MDistribution::ClampedNormal
        );
    }

    #[test]
    fn generator_config_rejects_unknown_keys() {
        assert!(parse_generator_config("variabels = 10\n").is_err());
    }

    #[test]
    fn grid_config_parses_and_validates() {
        let config = parse_grid_config(
            "variables = [50, 100]\nfactors = [4]\nk = [0.0, 1.0]\nreplicates = 2\nbase_seed = 3\n",
        )
        .unwrap();
        assert_eq!(config.variables, vec![50, 100]);
        assert_eq!(config.replicates, 2);
        assert_eq!(config.rv_counts, vec![2, 3, 4, 5, 6]); // default
        assert!(parse_grid_config("rv_counts = [9]\n").is_err());
    }

    #[test]
    fn variable_names_are_zero_padded() {
        assert_eq!(variable_name(0), "v0001");
        assert_eq!(variable_name(299), "v0300");
    }
}

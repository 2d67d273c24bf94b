//! `clv` — generate synthetic two-group datasets, classify subjects through
//! the variable-clustering pipeline, run the Monte-Carlo experiment grid, and
//! scan datasets for descriptive statistics.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use clv_core::classify::{classify, kmeans_two};
use clv_core::clv::{correlation_distance_matrix, cut_tree, extract_rvs, ward_linkage};
use clv_core::datagen::{generate_dataset, EpsilonDistribution, GeneratorParams, MDistribution};
use clv_core::experiment::{run_grid_with_progress, standard_anova_rows};
use clv_core::io;

#[derive(Parser)]
#[command(
    name = "clv",
    about = "Subject classification via clustering of variables around latent components",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic two-group dataset CSV.
    Generate(GenerateArgs),
    /// Classify the subjects of a dataset CSV and report congruence when
    /// true groups are present.
    Classify(ClassifyArgs),
    /// Run the Monte-Carlo grid and write the experiment tables.
    Experiment(ExperimentArgs),
    /// Descriptive statistics of one dataset (U-test scan, correlation scan).
    Scan(ScanArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Config file with generator parameters (flags override it).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of variables I.
    #[arg(long)]
    variables: Option<usize>,
    /// Number of subjects S (even; half per group).
    #[arg(long)]
    subjects: Option<usize>,
    /// Number of latent factors J.
    #[arg(long)]
    factors: Option<usize>,
    /// Factor strength k in [0, 1].
    #[arg(long)]
    k: Option<f64>,
    /// Loading floor q in [0, 1].
    #[arg(long)]
    q: Option<f64>,
    /// RNG seed; drawn from system entropy (and printed) when omitted.
    #[arg(long)]
    seed: Option<u64>,
    /// Distribution of the noise root m: uniform | clamped-normal.
    #[arg(long, value_parser = parse_m_distribution)]
    m_distribution: Option<MDistribution>,
    /// Distribution of the relative error: uniform.
    #[arg(long, value_parser = parse_epsilon_distribution)]
    epsilon_distribution: Option<EpsilonDistribution>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Input dataset CSV (subject_id[,group],v0001,...).
    input: PathBuf,
    /// Number of resultant vectors to classify with (2..=6).
    #[arg(long, default_value_t = 6)]
    rv: usize,
    /// k-means restarts.
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    /// RNG seed for k-means; drawn from system entropy (and printed) when
    /// omitted.
    #[arg(long)]
    seed: Option<u64>,
    /// Output classification CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Also write the dendrogram to this path.
    #[arg(long)]
    dendrogram: Option<PathBuf>,
    /// Also write the variable-cluster assignment to this path.
    #[arg(long)]
    clusters: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Grid config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for replicates.csv, cells.csv, descriptive.csv,
    /// anova.csv.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct ScanArgs {
    /// Input dataset CSV.
    input: PathBuf,
    /// Optional output CSV (one row); printed to stdout regardless.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_m_distribution(s: &str) -> Result<MDistribution, String> {
    match s {
        "uniform" => Ok(MDistribution::Uniform),
        "clamped-normal" | "clamped_normal" => Ok(MDistribution::ClampedNormal),
        other => Err(format!(
            "unknown m distribution {other:?} (expected uniform or clamped-normal)"
        )),
    }
}

fn parse_epsilon_distribution(s: &str) -> Result<EpsilonDistribution, String> {
    match s {
        "uniform" => Ok(EpsilonDistribution::Uniform),
        other => Err(format!(
            "unknown epsilon distribution {other:?} (expected uniform)"
        )),
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Classify(args) => cmd_classify(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::Scan(args) => cmd_scan(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

/// Seed from the flag, or one drawn from system entropy so the run stays
/// replayable once the printed value is passed back in.
fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.unwrap_or_else(rand::random)
}

fn cmd_generate(args: GenerateArgs) -> anyhow::Result<()> {
    let (mut params, config_had_seed) = match &args.config {
        Some(path) => io::read_generator_config(path)?,
        None => (GeneratorParams::default(), false),
    };
    if let Some(v) = args.variables {
        params.num_variables = v;
    }
    if let Some(v) = args.subjects {
        params.num_subjects = v;
    }
    if let Some(v) = args.factors {
        params.num_factors = v;
    }
    if let Some(v) = args.k {
        params.factor_strength = v;
    }
    if let Some(v) = args.q {
        params.loading_floor = v;
    }
    if let Some(v) = args.m_distribution {
        params.m_distribution = v;
    }
    if let Some(v) = args.epsilon_distribution {
        params.epsilon_distribution = v;
    }
    params.seed = match args.seed {
        Some(s) => s,
        None if config_had_seed => params.seed,
        None => resolve_seed(None),
    };

    let (dataset, _, _, _) = generate_dataset(&params)?;
    io::write_dataset_csv(&args.out, &dataset)?;
    println!(
        "generated {} subjects x {} variables (J={}, k={}, q={}) with seed {} -> {}",
        params.num_subjects,
        params.num_variables,
        params.num_factors,
        params.factor_strength,
        params.loading_floor,
        params.seed,
        args.out.display()
    );
    Ok(())
}

fn cmd_classify(args: ClassifyArgs) -> anyhow::Result<()> {
    if !(2..=6).contains(&args.rv) {
        bail!("--rv must be in 2..=6, got {}", args.rv);
    }
    let dataset = io::read_dataset_csv(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let seed = resolve_seed(args.seed);

    let distances = correlation_distance_matrix(&dataset.observations)?;
    let tree = ward_linkage(&distances)?;
    let cut = cut_tree(&tree, args.rv)?;
    let rvs = extract_rvs(&dataset.observations, &cut)?;

    if let Some(path) = &args.dendrogram {
        io::write_dendrogram_csv(path, &tree)?;
    }
    if let Some(path) = &args.clusters {
        io::write_cut_csv(path, &cut)?;
    }

    match &dataset.true_labels {
        Some(truth) => {
            let result = classify(&rvs, truth, args.restarts, seed)?;
            io::write_classification_csv(
                &args.out,
                &result.predicted_labels,
                Some(truth),
                Some(&result),
            )?;
            println!(
                "classified {} subjects with {} RVs (seed {seed}): congruence {} of {} ({:.1}%)",
                dataset.num_subjects(),
                args.rv,
                result.congruence_count,
                dataset.num_subjects(),
                100.0 * result.congruence_fraction
            );
        }
        None => {
            let predicted = kmeans_two(&rvs, args.restarts, seed)?;
            io::write_classification_csv(&args.out, &predicted, None, None)?;
            println!(
                "classified {} unlabeled subjects with {} RVs (seed {seed}) -> {}",
                dataset.num_subjects(),
                args.rv,
                args.out.display()
            );
        }
    }
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs) -> anyhow::Result<()> {
    // config errors must surface before any output is created
    let config = io::read_grid_config(&args.config)?;
    let workers = args
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        bail!("--workers must be positive");
    }
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;

    let total_cells = config.variables.len() * config.factors.len() * config.k.len();
    println!(
        "running {} cells x {} replicates (rv counts {:?}, restarts {}, base seed {}) on {workers} workers",
        total_cells, config.replicates, config.rv_counts, config.restarts, config.base_seed
    );
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .context("building worker pool")?;
    let mut done = 0usize;
    let results = pool.install(|| {
        run_grid_with_progress(&config, |variables, factors, k| {
            done += 1;
            println!(
                "cell {done}/{total_cells} done: I={variables} J={factors} k={k} ({:.1}s elapsed)",
                start.elapsed().as_secs_f64()
            );
        })
    })?;
    for failure in &results.failures {
        eprintln!("warning: {failure}");
    }

    io::write_replicates_csv(&args.out.join("replicates.csv"), &results.replicates)?;
    io::write_cells_csv(&args.out.join("cells.csv"), &results.cells)?;
    io::write_descriptive_csv(&args.out.join("descriptive.csv"), &results.replicates)?;
    let anova = standard_anova_rows(&results.replicates, &config);
    io::write_anova_csv(&args.out.join("anova.csv"), &anova)?;
    println!(
        "wrote replicates.csv, cells.csv, descriptive.csv, anova.csv to {} in {:.1}s",
        args.out.display(),
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

fn cmd_scan(args: ScanArgs) -> anyhow::Result<()> {
    let dataset = io::read_dataset_csv(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    // The two scans stand on their own: the U scan needs group labels, the
    // correlation scan an even variable count.
    let u_result = clv_core::experiment::u_scan(&dataset);
    let correlation = clv_core::experiment::correlation_scan(&dataset);
    if let (Err(u_err), Err(r_err)) = (&u_result, &correlation) {
        bail!("nothing to scan: {u_err}; {r_err}");
    }
    let mut parts = Vec::new();
    match &u_result {
        Ok(u_sig) => parts.push(format!("u_sig_fraction={u_sig}")),
        Err(e) => eprintln!("U-test scan skipped: {e}"),
    }
    match &correlation {
        Ok((r_sig, mean_r)) => {
            parts.push(format!("r_sig_fraction={r_sig}"));
            parts.push(format!("mean_r={mean_r}"));
        }
        Err(e) => eprintln!("correlation scan skipped: {e}"),
    }
    println!("{}", parts.join(" "));
    if let Some(path) = &args.out {
        write_scan_csv(path, u_result.ok(), correlation.ok())?;
    }
    Ok(())
}

fn write_scan_csv(
    path: &Path,
    u_sig: Option<f64>,
    correlation: Option<(f64, f64)>,
) -> anyhow::Result<()> {
    use std::io::Write as _;
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "u_sig_fraction,r_sig_fraction,mean_r")?;
    let u = u_sig.map_or(String::new(), |v| v.to_string());
    let (r, m) = correlation.map_or((String::new(), String::new()), |(r, m)| {
        (r.to_string(), m.to_string())
    });
    writeln!(w, "{u},{r},{m}")?;
    Ok(())
}

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use paintinfo::catalog::{
    default_coefficients, extract_all, generate_synthetic, load_catalog, load_features,
    noise_sd_for_adjusted_r2, save_features, FeatureCache,
};
use paintinfo::features::{FeatureConfig, FeatureVector};
use paintinfo::fingerprint::{content_hash, fingerprint};
use paintinfo::hedonic::{
    build_design_matrix, hypothesis_report, ols_fit, price_ratio, render_table, ModelFit,
    ModelSpec, SaleRecord, PRESETS,
};
use paintinfo::summary::summarize;

const CACHE_FILE: &str = "features.cache.jsonl";

#[derive(Parser)]
#[command(name = "paintinfo", version, about = "Information-quantity measures and hedonic price regressions for paintings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the five measures for every catalog image
    Extract {
        #[arg(long)]
        catalog: PathBuf,
        /// Directory that image paths in the catalog are relative to
        #[arg(long)]
        images: PathBuf,
        /// JSON file with a `features` section
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        /// Feature cache file (default: beside the catalog)
        #[arg(long)]
        cache: Option<PathBuf>,
        #[arg(long)]
        no_cache: bool,
        /// Abort on the first bad image
        #[arg(long)]
        fail_fast: bool,
    },
    /// Fit one or more hedonic specifications
    Fit {
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long)]
        features: PathBuf,
        /// Preset name (attributes, line-color, full) or model spec JSON; repeat for several columns
        #[arg(long)]
        spec: Vec<String>,
        /// JSON file with a `model` section, used when no --spec is given
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Price ratio of two paintings under a fitted model
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// Features CSV, optionally followed by #ID to pick a row
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Descriptive statistics and correlations of a features CSV
    Summary {
        #[arg(long)]
        features: PathBuf,
    },
    /// Generate a synthetic catalog with known coefficients
    Synth {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 720)]
        n: usize,
        /// JSON object of coefficients by column name (default: built-in)
        #[arg(long)]
        coeffs: Option<PathBuf>,
        /// Noise standard deviation of log price
        #[arg(long, conflicts_with = "adj_r2")]
        noise: Option<f64>,
        /// Calibrate the noise to this adjusted R² of the full specification
        #[arg(long, default_value_t = 0.51)]
        adj_r2: f64,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Shared config file: both sections are optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    #[serde(default)]
    features: FeatureConfig,
    model: Option<ModelSpec>,
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

#[derive(Debug, Serialize)]
struct Manifest {
    command: String,
    tool_version: String,
    config_fingerprint: String,
    input_hashes: BTreeMap<String, String>,
    outputs: Vec<String>,
    /// Hash of every field above; unchanged across reruns on the same inputs.
    run_fingerprint: String,
    timestamp_unix: u64,
}

#[derive(Serialize)]
struct ManifestCore<'a> {
    command: &'a str,
    tool_version: &'a str,
    config_fingerprint: &'a str,
    input_hashes: &'a BTreeMap<String, String>,
    outputs: &'a [String],
}

fn write_manifest(
    out: &Path,
    command: &str,
    config_fingerprint: String,
    input_hashes: BTreeMap<String, String>,
    mut outputs: Vec<String>,
) -> Result<()> {
    outputs.sort();
    let tool_version = env!("CARGO_PKG_VERSION").to_string();
    let run_fingerprint = fingerprint(&ManifestCore {
        command,
        tool_version: &tool_version,
        config_fingerprint: &config_fingerprint,
        input_hashes: &input_hashes,
        outputs: &outputs,
    });
    let manifest = Manifest {
        command: command.to_string(),
        tool_version,
        config_fingerprint,
        input_hashes,
        outputs,
        run_fingerprint,
        timestamp_unix: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    };
    let path = out.join("manifest.json");
    let mut json = serde_json::to_vec_pretty(&manifest)?;
    json.push(b'\n');
    std::fs::write(&path, json).with_context(|| format!("writing {}", path.display()))
}

fn hash_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(content_hash(&bytes))
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}

/// Outcome of a command that can partly succeed.
enum Outcome {
    Done,
    Partial,
}

fn cmd_extract(
    catalog: &Path,
    images: &Path,
    config: Option<&Path>,
    out: &Path,
    cache_path: Option<PathBuf>,
    fail_fast: bool,
) -> Result<Outcome> {
    let cfg = load_config(config)?.features;
    let records = load_catalog(catalog)?;
    create_dir(out)?;
    let cache = match &cache_path {
        Some(p) => FeatureCache::load(p)?,
        None => FeatureCache::new(),
    };

    let report = extract_all(&records, images, &cfg, &cache, fail_fast)?;
    log::info!(
        "{} rows, {} images computed, {} cache hits",
        report.features.len(),
        report.computed,
        cache.hits()
    );
    if let Some(p) = &cache_path {
        cache.save(p)?;
    }

    let rows: Vec<FeatureVector> = report
        .features
        .iter()
        .map(|(rec, fv)| fv.clone().with_source_id(&rec.id))
        .collect();
    save_features(&out.join("features.csv"), &rows)?;
    let mut outputs = vec!["features.csv".to_string()];

    let errors_path = out.join("errors.csv");
    if report.failures.is_empty() {
        if errors_path.exists() {
            std::fs::remove_file(&errors_path).with_context(|| format!("removing {}", errors_path.display()))?;
        }
    } else {
        let mut w = csv::Writer::from_path(&errors_path).with_context(|| format!("writing {}", errors_path.display()))?;
        w.write_record(["id", "error"])?;
        for f in &report.failures {
            eprintln!("record {}: {}", f.id, f.message);
            w.write_record([&f.id, &f.message])?;
        }
        w.flush()?;
        outputs.push("errors.csv".into());
    }

    let mut inputs = BTreeMap::new();
    inputs.insert("catalog".to_string(), hash_file(catalog)?);
    let mut image_hashes: Vec<String> = records
        .iter()
        .filter_map(|r| std::fs::read(images.join(&r.image_ref)).ok())
        .map(|b| content_hash(&b))
        .collect();
    image_hashes.sort();
    inputs.insert("images".to_string(), fingerprint(&image_hashes));
    write_manifest(out, "extract", cfg.fingerprint(), inputs, outputs)?;

    println!(
        "extracted {} of {} records ({} failed) -> {}",
        rows.len(),
        records.len(),
        report.failures.len(),
        out.join("features.csv").display()
    );
    Ok(if report.failures.is_empty() { Outcome::Done } else { Outcome::Partial })
}

fn load_spec(arg: &str) -> Result<ModelSpec> {
    if let Some(spec) = ModelSpec::preset(arg) {
        return Ok(spec);
    }
    let path = Path::new(arg);
    if !path.exists() {
        bail!("--spec {arg:?} is neither a preset ({}) nor a file", PRESETS.join(", "));
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing model spec {}", path.display()))
}

/// Orders feature rows to match the catalog by id.
fn align(records: &[SaleRecord], features: Vec<FeatureVector>) -> Result<Vec<FeatureVector>> {
    let mut by_id: BTreeMap<String, FeatureVector> = BTreeMap::new();
    for fv in features {
        let id = fv.source_id.clone();
        if by_id.insert(id.clone(), fv).is_some() {
            bail!("features file has two rows for id {id}");
        }
    }
    let aligned = records
        .iter()
        .map(|r| by_id.remove(&r.id).with_context(|| format!("no feature row for catalog id {}", r.id)))
        .collect::<Result<Vec<_>>>()?;
    if let Some(id) = by_id.keys().next() {
        bail!("feature row {id} has no catalog record");
    }
    Ok(aligned)
}

fn cmd_fit(catalog: &Path, features: &Path, specs: &[String], config: Option<&Path>, out: &Path) -> Result<Outcome> {
    let cfg = load_config(config)?;
    let specs: Vec<ModelSpec> = if !specs.is_empty() {
        specs.iter().map(|s| load_spec(s)).collect::<Result<_>>()?
    } else {
        vec![cfg.model.unwrap_or_else(ModelSpec::full)]
    };
    let records = load_catalog(catalog)?;
    let rows = align(&records, load_features(features)?)?;
    create_dir(out)?;

    let mut fits = Vec::new();
    let mut outputs = Vec::new();
    for (i, spec) in specs.iter().enumerate() {
        let dm = build_design_matrix(&records, &rows, spec)?;
        let mut fit = ols_fit(&dm).with_context(|| format!("fitting specification {}", i + 1))?;
        fit.spec_name = if spec.name.is_empty() { format!("({})", i + 1) } else { spec.name.clone() };
        let name = format!("model-{}.json", i + 1);
        let mut json = serde_json::to_vec_pretty(&fit)?;
        json.push(b'\n');
        std::fs::write(out.join(&name), json).with_context(|| format!("writing {name}"))?;
        outputs.push(name);
        fits.push(fit);
    }

    let refs: Vec<&ModelFit> = fits.iter().collect();
    let mut table = render_table(&refs);
    for fit in &fits {
        if let Ok(h) = hypothesis_report(fit) {
            table.push('\n');
            table.push_str(&format!("Hypothesis check {}\n", fit.spec_name));
            table.push_str(&h.render());
        }
    }
    std::fs::write(out.join("table.txt"), &table).context("writing table.txt")?;
    outputs.push("table.txt".into());
    print!("{table}");

    let mut inputs = BTreeMap::new();
    inputs.insert("catalog".to_string(), hash_file(catalog)?);
    inputs.insert("features".to_string(), hash_file(features)?);
    let spec_fps: Vec<String> = specs.iter().map(ModelSpec::fingerprint).collect();
    write_manifest(out, "fit", fingerprint(&spec_fps), inputs, outputs)?;
    Ok(Outcome::Done)
}

fn pick_row(arg: &str) -> Result<FeatureVector> {
    let (path, id) = match arg.rsplit_once('#') {
        Some((p, id)) => (p, Some(id)),
        None => (arg, None),
    };
    let rows = load_features(Path::new(path))?;
    match id {
        Some(id) => rows
            .into_iter()
            .find(|r| r.source_id == id)
            .with_context(|| format!("no row {id} in {path}")),
        None if rows.len() == 1 => Ok(rows.into_iter().next().expect("one row")),
        None => bail!("{path} has {} rows; select one with {path}#ID", rows.len()),
    }
}

fn cmd_predict(model: &Path, a: &str, b: &str) -> Result<Outcome> {
    let text = std::fs::read_to_string(model).with_context(|| format!("reading {}", model.display()))?;
    let fit: ModelFit = serde_json::from_str(&text).with_context(|| format!("parsing model {}", model.display()))?;
    let (fa, fb) = (pick_row(a)?, pick_row(b)?);
    let r = price_ratio(&fit, &fa, &fb, &Vec::new())?;
    println!("{:<16}{:>12}{:>12}{:>12}{:>12}", "term", "coef", "value a", "value b", "delta");
    for t in &r.contributions {
        println!(
            "{:<16}{:>12.4}{:>12.4}{:>12.4}{:>+12.4}",
            t.name, t.coefficient, t.value_a, t.value_b, t.delta
        );
    }
    println!("log ratio {:+.4}", r.log_ratio);
    println!("price ratio a/b {:.3}", r.ratio);
    Ok(Outcome::Done)
}

fn cmd_summary(features: &Path) -> Result<Outcome> {
    let rows = load_features(features)?;
    let summary = summarize(&rows).with_context(|| format!("{} has no feature rows", features.display()))?;
    print!("{}", summary.render());
    Ok(Outcome::Done)
}

#[allow(clippy::too_many_arguments)]
fn cmd_synth(
    seed: u64,
    n: usize,
    coeffs: Option<&Path>,
    noise: Option<f64>,
    adj_r2: f64,
    config: Option<&Path>,
    out: &Path,
) -> Result<Outcome> {
    let cfg = load_config(config)?.features;
    let coefficients: BTreeMap<String, f64> = match coeffs {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing coefficients {}", p.display()))?
        }
        None => default_coefficients(),
    };
    let noise_sd = match noise {
        Some(sd) => sd,
        None => {
            if !(adj_r2 > 0.0 && adj_r2 < 1.0) {
                bail!("--adj-r2 must lie in (0, 1)");
            }
            let probe = generate_synthetic(seed, n, &coefficients, 0.0, &cfg)?;
            let signal: Vec<f64> = probe.paintings.iter().map(|p| p.log_signal).collect();
            let mean = signal.iter().sum::<f64>() / n as f64;
            let var = signal.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
            noise_sd_for_adjusted_r2(var, adj_r2)
        }
    };
    let ds = generate_synthetic(seed, n, &coefficients, noise_sd, &cfg)?;
    create_dir(out)?;
    ds.write_to_dir(out)?;
    let outputs = vec!["catalog.csv".into(), "images".into(), "ground_truth.json".into()];
    let mut inputs = BTreeMap::new();
    inputs.insert("coefficients".to_string(), fingerprint(&ds.truth));
    write_manifest(out, "synth", cfg.fingerprint(), inputs, outputs)?;
    println!("wrote {n} synthetic records (seed {seed}, noise sd {noise_sd:.4}) to {}", out.display());
    Ok(Outcome::Done)
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Extract {
            catalog,
            images,
            config,
            out,
            cache,
            no_cache,
            fail_fast,
        } => {
            let cache = if no_cache {
                None
            } else {
                Some(cache.unwrap_or_else(|| catalog.parent().unwrap_or(Path::new(".")).join(CACHE_FILE)))
            };
            cmd_extract(&catalog, &images, config.as_deref(), &out, cache, fail_fast)
        }
        Command::Fit {
            catalog,
            features,
            spec,
            config,
            out,
        } => cmd_fit(&catalog, &features, &spec, config.as_deref(), &out),
        Command::Predict { model, a, b } => cmd_predict(&model, &a, &b),
        Command::Summary { features } => cmd_summary(&features),
        Command::Synth {
            seed,
            n,
            coeffs,
            noise,
            adj_r2,
            config,
            out,
        } => cmd_synth(seed, n, coeffs.as_deref(), noise, adj_r2, config.as_deref(), &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Partial) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

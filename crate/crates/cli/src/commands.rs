use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::info;
use pcpriv_core::attacker::{
    build_reference_set, read_dataset_manifest, write_dataset_manifest, Attacker, AttackerProfile,
};
use pcpriv_core::corpus::{generate_synthetic_corpus, ingest_directory};
use pcpriv_core::geometry::io::read_cloud;
use pcpriv_core::harness::{
    decimate, object_listing, run_experiment, write_outputs, EvaluateRequest, ExperimentConfig, ExperimentState,
};
use pcpriv_core::regen::{
    write_regeneration, ExternalRegenerator, PrivilegeLevel, RegenSidecar, RegenSpec, Regenerator, SurrogateRegenerator,
};
use pcpriv_core::utility::auc_privacy_utility;
use pcpriv_core::{Error, Result};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "pcpriv", version, about = "Privilege-controlled point-cloud release workbench")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic corpus as <out>/<class>/<object>.xyz.
    GenCorpus(GenCorpusArgs),
    /// Load a <class>/<object> directory and list the objects found.
    Ingest(IngestArgs),
    /// Regenerate one cloud at a privilege level.
    Regen(RegenArgs),
    /// Build a reference set for one attacker profile and fit its classifiers.
    TrainAttacker(TrainAttackerArgs),
    /// Evaluate one (object, l, seed, attacker, rho) tuple against a finished run.
    Evaluate(EvaluateArgs),
    /// Run the full pipeline and write every artifact.
    Experiment(ExperimentArgs),
    /// Area under a privacy-utility curve read from CSV.
    Auc(AucArgs),
    /// Serve the HTTP API (and optional static UI) over a finished run.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct GenCorpusArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub classes: usize,
    #[arg(long, default_value_t = 8)]
    pub objects_per_class: usize,
    #[arg(long, default_value_t = 512)]
    pub points: usize,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct RegenArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long = "l", allow_negative_numbers = true)]
    pub level: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 300)]
    pub e_max: u32,
    /// Output point count for the surrogate regenerator.
    #[arg(long, default_value_t = 2048)]
    pub points: usize,
    /// Serve stored regenerations from this manifest instead of the surrogate.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Object id used for manifest lookup and the sidecar; defaults to the input file stem.
    #[arg(long)]
    pub object_id: Option<String>,
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// Experiment config JSON; defaults apply when neither this nor PCPRIV_CONFIG is set.
    #[arg(long, env = "PCPRIV_CONFIG")]
    pub config: Option<PathBuf>,
}

impl ConfigArg {
    fn load(&self) -> Result<ExperimentConfig> {
        match &self.config {
            Some(p) => ExperimentConfig::load(p),
            None => Ok(ExperimentConfig::default()),
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainAttackerArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long)]
    pub profile: AttackerProfile,
    #[arg(long)]
    pub out: PathBuf,
    /// Train from an existing labeled dataset manifest instead of building one.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Output directory of a finished experiment.
    #[arg(long)]
    pub run: PathBuf,
    #[arg(long)]
    pub object: String,
    #[arg(long = "l", allow_negative_numbers = true)]
    pub level: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub attacker: AttackerProfile,
    #[arg(long, allow_negative_numbers = true)]
    pub rho1: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub rho2: f64,
    /// Keep at most this many regenerated points in the output.
    #[arg(long)]
    pub max_points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    /// Overrides the config's output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the config's global seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct AucArgs {
    #[arg(long)]
    pub csv: PathBuf,
    #[arg(long, default_value = "utility")]
    pub utility_column: String,
    #[arg(long, default_value = "privacy")]
    pub privacy_column: String,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub run: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
    /// Directory served under /ui.
    #[arg(long)]
    pub ui: Option<PathBuf>,
}

/// Executes one subcommand, printing its JSON result to stdout.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenCorpus(a) => gen_corpus(a),
        Command::Ingest(a) => ingest(a),
        Command::Regen(a) => regen(a),
        Command::TrainAttacker(a) => train_attacker(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Experiment(a) => experiment(a),
        Command::Auc(a) => auc(a),
        Command::Serve(a) => serve(a),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string(value).map_err(|e| Error::json("<stdout>", e))?;
    println!("{text}");
    Ok(())
}

fn gen_corpus(a: GenCorpusArgs) -> Result<()> {
    let corpus = generate_synthetic_corpus(a.classes, a.objects_per_class, a.points, a.seed)?;
    corpus.write(&a.out)?;
    info!("wrote {} objects to {}", corpus.objects.len(), a.out.display());
    print_json(&object_listing(&corpus))
}

fn ingest(a: IngestArgs) -> Result<()> {
    let corpus = ingest_directory(&a.dir)?;
    corpus.label_space().validate()?;
    print_json(&object_listing(&corpus))
}

fn regen(a: RegenArgs) -> Result<()> {
    let level = PrivilegeLevel::new(a.level)?;
    let object_id = match &a.object_id {
        Some(id) => id.clone(),
        None => a.input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
    };
    let regenerator: Box<dyn Regenerator> = match &a.manifest {
        Some(m) => Box::new(ExternalRegenerator::load(m)?.with_e_max(a.e_max)),
        None => Box::new(SurrogateRegenerator::new(a.e_max, a.points)),
    };
    let cloud = read_cloud(&a.input)?;
    let spec = RegenSpec::from_level(level, a.e_max, a.seed);
    let out = regenerator.regenerate(&object_id, &cloud, &spec)?;
    let sidecar = RegenSidecar { object_id, l: a.level, epoch: spec.epoch, seed: a.seed };
    write_regeneration(&a.out, &out, &sidecar)?;
    print_json(&sidecar)
}

#[derive(Serialize)]
struct TrainSummary {
    profile: AttackerProfile,
    reference_samples: usize,
    dataset: PathBuf,
    attacker: PathBuf,
}

fn train_attacker(a: TrainAttackerArgs) -> Result<()> {
    let cfg = a.config.load()?;
    let corpus = cfg.load_corpus()?;
    let labels = corpus.label_space();
    let (reference, dataset) = match &a.dataset {
        Some(path) => (read_dataset_manifest(path)?, path.clone()),
        None => {
            let regenerator = cfg.build_regenerator()?;
            let set = build_reference_set(
                a.profile,
                &corpus,
                regenerator.as_ref(),
                &cfg.augment,
                cfg.count_per_object,
                cfg.seed,
            )?;
            let path = write_dataset_manifest(&a.out.join("reference"), &set)?;
            (set, path)
        }
    };
    let attacker = Attacker::train(a.profile, &reference, &labels, cfg.attacker)?;
    fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let path = a.out.join("attacker.json");
    let text = serde_json::to_string(&attacker).map_err(|e| Error::json(&path, e))?;
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    print_json(&TrainSummary { profile: a.profile, reference_samples: reference.len(), dataset, attacker: path })
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let state = ExperimentState::load(&a.run)?;
    let mut resp = state.evaluate(&EvaluateRequest {
        object_id: a.object,
        l: a.level,
        seed: a.seed,
        attacker: a.attacker,
        rho1: a.rho1,
        rho2: a.rho2,
    })?;
    resp.points = decimate(resp.points, a.max_points);
    print_json(&resp)
}

#[derive(Serialize)]
struct ExperimentSummary<'a> {
    output_dir: &'a Path,
    objects: usize,
    samples: usize,
    attackers: Vec<AttackerProfile>,
    elapsed_secs: f64,
    auc: &'a pcpriv_core::harness::AucTable,
}

fn experiment(a: ExperimentArgs) -> Result<()> {
    let mut cfg = a.config.load()?;
    if let Some(out) = a.out {
        cfg.output_dir = Some(out);
    }
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    let out = cfg
        .output_dir
        .clone()
        .ok_or_else(|| Error::InvalidConfig("no output directory: pass --out or set output_dir".into()))?;
    let start = Instant::now();
    let result = run_experiment(&cfg)?;
    write_outputs(&result, &out)?;
    info!("experiment finished in {:.1}s, outputs in {}", start.elapsed().as_secs_f64(), out.display());
    print_json(&ExperimentSummary {
        output_dir: &out,
        objects: result.corpus.objects.len(),
        samples: result.samples.len(),
        attackers: result.attackers.iter().map(|r| r.profile).collect(),
        elapsed_secs: start.elapsed().as_secs_f64(),
        auc: &result.auc,
    })
}

#[derive(Serialize)]
struct AucOutput {
    points: usize,
    auc: f64,
}

fn auc(a: AucArgs) -> Result<()> {
    let mut reader =
        csv::Reader::from_path(&a.csv).map_err(|e| Error::InvalidCurve(format!("{}: {e}", a.csv.display())))?;
    let headers = reader.headers().map_err(|e| Error::InvalidCurve(e.to_string()))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidCurve(format!("{}: no column {name:?}", a.csv.display())))
    };
    let (u, p) = (column(&a.utility_column)?, column(&a.privacy_column)?);
    let mut points = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::InvalidCurve(e.to_string()))?;
        let cell = |c: usize| {
            row.get(c)
                .and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::InvalidCurve(format!("row {}: column {c} is not a number", i + 1)))
        };
        points.push((cell(u)?, cell(p)?));
    }
    let auc = auc_privacy_utility(&points)?;
    print_json(&AucOutput { points: points.len(), auc })
}

fn serve(a: ServeArgs) -> Result<()> {
    let state = Arc::new(ExperimentState::load(&a.run)?);
    let app = crate::server::router(state, a.ui.as_deref());
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Error::io("<tokio runtime>", e))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(a.addr).await.map_err(|e| Error::io(a.addr.to_string(), e))?;
        info!("listening on http://{}", a.addr);
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| Error::io(a.addr.to_string(), e))
    })
}

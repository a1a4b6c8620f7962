//! Command-line front end.
//!
//! Every subcommand reads its settings from built-in defaults, then an
//! optional `--config` file, then flags (later wins). When the primary output
//! goes to a file, a run manifest is written next to it as `<out>.run.json`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::calibration::{calibrate, parse_observations, DEFAULT_CALIBRATION_AGL_M};
use crate::camera::CameraModel;
use crate::error::{Error, Result};
use crate::geodesy::RunwayGeometry;
use crate::labeler::{label_scenario, DatasetManifest, LabelConfig};
use crate::metrics::{
    build_report, crossbar, parse_predictions, CrossbarCell, EMapMethod, EvalConfig, EvalReport, GroundTruthSet,
    MetricFamily, MetricName,
};
use crate::odd::OddConfig;
use crate::scenario::{
    emit_scenario, parse_runway_db, parse_scenario, sample_scenario, split_airports, RunwayDatabase, SamplingSpec,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_IO: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "runway-odd", version, about = "Approach-cone ODD scenario generation, labelling and evaluation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Run manifest path (default: <out>.run.json; none when writing to stdout)
    #[arg(long, global = true)]
    pub run_manifest: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample approach poses for every runway of the given airports
    Sample(SampleArgs),
    /// Label a scenario with runway boxes and ODD flags
    Label(LabelArgs),
    /// Correct runway threshold corners from clicked nadir-image pixels
    Calibrate(CalibrateArgs),
    /// Compute mAP, In+Extended mAP and e-mAP for predictions against a manifest
    Eval(EvalArgs),
    /// Split airports into train and test sets
    Split(SplitArgs),
    /// Print the effective ODD configuration as YAML
    DumpOddConfig(DumpArgs),
}

#[derive(Debug, Args)]
pub struct CameraArgs {
    #[arg(long, default_value_t = 1024)]
    pub width: u32,
    #[arg(long, default_value_t = 1024)]
    pub height: u32,
    #[arg(long, default_value_t = 60.0)]
    pub fov_x: f64,
    #[arg(long, default_value_t = 60.0)]
    pub fov_y: f64,
}

impl CameraArgs {
    fn model(&self) -> Result<CameraModel> {
        CameraModel::new(self.width, self.height, self.fov_x, self.fov_y)
    }
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub runway_db: PathBuf,
    /// Comma-separated ICAO codes, or ICAO/RUNWAY for a single runway end
    #[arg(long, value_delimiter = ',', required = true)]
    pub airports: Vec<String>,
    #[arg(long)]
    pub per_segment: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sampling settings (YAML)
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub odd_config: Option<PathBuf>,
    #[command(flatten)]
    pub camera: CameraArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LabelArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Defaults to the scenario's `runways_database`, relative to the scenario file.
    /// `{source}` is replaced by the source tag.
    #[arg(long)]
    pub runway_db: Option<String>,
    #[arg(long)]
    pub odd_config: Option<PathBuf>,
    /// Label settings (YAML)
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub source_tag: Option<String>,
    #[arg(long)]
    pub min_visible_fraction: Option<f64>,
    #[arg(long)]
    pub min_bbox_area: Option<f64>,
    /// Also label runways without a piano
    #[arg(long)]
    pub allow_no_piano: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// CSV with columns image_id,corner,u,v,ground_altitude
    #[arg(long)]
    pub observations: PathBuf,
    #[arg(long)]
    pub runway_db: PathBuf,
    #[arg(long, default_value_t = DEFAULT_CALIBRATION_AGL_M)]
    pub agl: f64,
    #[command(flatten)]
    pub camera: CameraArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Auto,
    Exact,
    Greedy,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MetricArg {
    Map,
    Map50,
    Map75,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, requires = "predictions")]
    pub manifest: Option<PathBuf>,
    #[arg(long, requires = "manifest")]
    pub predictions: Option<PathBuf>,
    /// MODEL,TEST_SOURCE,MANIFEST,PREDICTIONS (repeatable) for crossbar matrices
    #[arg(long, conflicts_with = "manifest")]
    pub pair: Vec<String>,
    /// Directory for crossbar_<family>.csv files
    #[arg(long, requires = "pair")]
    pub crossbar_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "map")]
    pub crossbar_metric: MetricArg,
    /// Evaluation settings (YAML)
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub score_threshold: Option<f64>,
    #[arg(long, value_enum)]
    pub e_map_method: Option<MethodArg>,
    #[arg(long)]
    pub exhaustive_limit: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Airport list: JSON array or one ICAO code per line
    #[arg(long, required_unless_present = "runway_db", conflicts_with = "runway_db")]
    pub airports: Option<PathBuf>,
    /// Take the airport list from a runway database
    #[arg(long)]
    pub runway_db: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    pub ratio: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DumpArgs {
    /// Configuration to validate and normalize instead of the defaults
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Provenance record written next to each output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
}

struct Session {
    command: &'static str,
    inputs: Vec<InputDigest>,
    outputs: Vec<String>,
    started: u128,
}

fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis())
}

impl Session {
    fn new(command: &'static str) -> Self {
        Self {
            command,
            inputs: Vec::new(),
            outputs: Vec::new(),
            started: now_ms(),
        }
    }

    fn read(&mut self, path: &Path) -> Result<String> {
        let bytes = fs::read(path).map_err(|e| io_context(e, path))?;
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        String::from_utf8(bytes).map_err(|_| Error::parse(format!("{} is not UTF-8", path.display())))
    }

    fn write(&mut self, path: &Path, content: &str) -> Result<()> {
        fs::write(path, content).map_err(|e| io_context(e, path))?;
        self.outputs.push(path.display().to_string());
        Ok(())
    }

    /// Primary output to `out`, or standard output.
    fn emit(&mut self, out: Option<&Path>, content: &str) -> Result<()> {
        match out {
            Some(p) => self.write(p, content),
            None => {
                print!("{content}");
                Ok(())
            }
        }
    }

    fn finish(self, manifest_path: Option<PathBuf>, seed: Option<u64>, config: serde_json::Value) -> Result<()> {
        let path = manifest_path.or_else(|| self.outputs.first().map(|o| PathBuf::from(format!("{o}.run.json"))));
        let Some(path) = path else { return Ok(()) };
        let m = RunManifest {
            command: self.command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config,
            inputs: self.inputs,
            outputs: self.outputs,
            started_unix_ms: self.started,
            finished_unix_ms: now_ms(),
        };
        let doc = serde_json::to_string_pretty(&m).expect("run manifest serializes");
        fs::write(&path, doc).map_err(|e| io_context(e, &path))
    }
}

fn io_context(e: std::io::Error, path: &Path) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn load_yaml<T: for<'de> Deserialize<'de> + Default>(s: &mut Session, path: Option<&Path>) -> Result<T> {
    match path {
        Some(p) => Ok(serde_yaml::from_str(&s.read(p)?)?),
        None => Ok(T::default()),
    }
}

fn load_odd(s: &mut Session, path: Option<&Path>) -> Result<OddConfig> {
    let cfg: OddConfig = load_yaml(s, path)?;
    cfg.validate()?;
    Ok(cfg)
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("config serializes")
}

/// Parse arguments, run, print diagnostics to stderr and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_io() {
                EXIT_IO
            } else {
                EXIT_VALIDATION
            }
        }
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    let manifest = cli.run_manifest;
    match cli.command {
        Command::Sample(a) => cmd_sample(a, manifest),
        Command::Label(a) => cmd_label(a, manifest),
        Command::Calibrate(a) => cmd_calibrate(a, manifest),
        Command::Eval(a) => cmd_eval(a, manifest),
        Command::Split(a) => cmd_split(a, manifest),
        Command::DumpOddConfig(a) => cmd_dump(a, manifest),
    }
}

fn select_runways(db: &RunwayDatabase, selectors: &[String]) -> Result<Vec<RunwayGeometry>> {
    let mut out: Vec<RunwayGeometry> = Vec::new();
    for sel in selectors.iter().map(|s| s.trim()).filter(|s| !s.is_empty()) {
        let picked: Vec<&RunwayGeometry> = match sel.split_once('/') {
            Some((icao, rw)) => db.get(icao, rw).into_iter().collect(),
            None => db.runways_of(sel).collect(),
        };
        if picked.is_empty() {
            return Err(Error::validation(format!("`{sel}` not found in the runway database")));
        }
        for rw in picked {
            if !out.iter().any(|o| o.airport_icao == rw.airport_icao && o.runway_id == rw.runway_id) {
                out.push(rw.clone());
            }
        }
    }
    if out.is_empty() {
        return Err(Error::validation("no airports selected"));
    }
    Ok(out)
}

fn cmd_sample(a: SampleArgs, manifest: Option<PathBuf>) -> Result<()> {
    let mut s = Session::new("sample");
    let mut spec: SamplingSpec = load_yaml(&mut s, a.config.as_deref())?;
    if let Some(n) = a.per_segment {
        spec.poses_per_segment = n;
    }
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    let odd = load_odd(&mut s, a.odd_config.as_deref())?;
    let cam = a.camera.model()?;
    let db = parse_runway_db(&s.read(&a.runway_db)?)?;
    let runways = select_runways(&db, &a.airports)?;
    let scenario = sample_scenario(&runways, &spec, &odd, &cam, &a.runway_db.display().to_string())?;
    s.emit(a.out.as_deref(), &emit_scenario(&scenario))?;
    let config = json!({"sampling": to_value(&spec), "odd": to_value(&odd), "camera": to_value(&cam), "airports": a.airports});
    s.finish(manifest, Some(spec.seed), config)
}

fn cmd_label(a: LabelArgs, manifest: Option<PathBuf>) -> Result<()> {
    let mut s = Session::new("label");
    let mut lc: LabelConfig = load_yaml(&mut s, a.config.as_deref())?;
    if let Some(t) = a.source_tag {
        lc.source_tag = t;
    }
    if let Some(v) = a.min_visible_fraction {
        lc.min_visible_fraction = v;
    }
    if let Some(v) = a.min_bbox_area {
        lc.min_bbox_area_px = v;
    }
    if a.allow_no_piano {
        lc.require_piano = false;
    }
    lc.validate()?;
    let odd = load_odd(&mut s, a.odd_config.as_deref())?;
    let scenario = parse_scenario(&s.read(&a.scenario)?)?;
    let db_path = match a.runway_db {
        Some(p) => PathBuf::from(p.replace("{source}", &lc.source_tag)),
        None => {
            let rel = scenario.runways_database.replace("{source}", &lc.source_tag);
            a.scenario.parent().unwrap_or(Path::new(".")).join(rel)
        }
    };
    let db = parse_runway_db(&s.read(&db_path)?)?;
    let m = label_scenario(&scenario, &db, &odd, &lc)?;
    s.emit(a.out.as_deref(), &m.to_json())?;
    let config = json!({"label": to_value(&lc), "odd": to_value(&odd), "runway_db": db_path.display().to_string()});
    s.finish(manifest, None, config)
}

fn cmd_calibrate(a: CalibrateArgs, manifest: Option<PathBuf>) -> Result<()> {
    let mut s = Session::new("calibrate");
    let cam = a.camera.model()?;
    let obs = parse_observations(&s.read(&a.observations)?)?;
    let db = parse_runway_db(&s.read(&a.runway_db)?)?;
    let fragment = calibrate(&db, &obs, &cam, a.agl)?;
    s.emit(a.out.as_deref(), &fragment.to_json())?;
    s.finish(manifest, None, json!({"camera": to_value(&cam), "altitude_agl": a.agl}))
}

#[derive(Serialize)]
struct CellOut<'a> {
    model: &'a str,
    test_source: &'a str,
    report: &'a EvalReport,
}

fn evaluate_files(s: &mut Session, manifest: &Path, predictions: &Path, cfg: &EvalConfig) -> Result<EvalReport> {
    let m = DatasetManifest::from_json(&s.read(manifest)?)?;
    let dets = parse_predictions(&s.read(predictions)?)?;
    build_report(&GroundTruthSet::from_manifest(&m), &dets, cfg)
}

fn cmd_eval(a: EvalArgs, manifest: Option<PathBuf>) -> Result<()> {
    let mut s = Session::new("eval");
    let mut cfg: EvalConfig = load_yaml(&mut s, a.config.as_deref())?;
    if let Some(t) = a.score_threshold {
        cfg.score_threshold = t;
    }
    if let Some(m) = a.e_map_method {
        cfg.e_map_method = match m {
            MethodArg::Auto => EMapMethod::Auto,
            MethodArg::Exact => EMapMethod::Exact,
            MethodArg::Greedy => EMapMethod::Greedy,
        };
    }
    if let Some(l) = a.exhaustive_limit {
        cfg.exhaustive_limit = l;
    }
    cfg.validate()?;

    if let (Some(mp), Some(pp)) = (&a.manifest, &a.predictions) {
        let report = evaluate_files(&mut s, mp, pp, &cfg)?;
        s.emit(a.out.as_deref(), &report.to_json())?;
        return s.finish(manifest, None, to_value(&cfg));
    }
    if a.pair.is_empty() {
        return Err(Error::validation("eval needs --manifest and --predictions, or at least one --pair"));
    }
    let mut cells = Vec::new();
    for p in &a.pair {
        let parts: Vec<&str> = p.split(',').collect();
        let [model, source, mp, pp] = parts[..] else {
            return Err(Error::validation(format!(
                "--pair `{p}` must be MODEL,TEST_SOURCE,MANIFEST,PREDICTIONS"
            )));
        };
        let report = evaluate_files(&mut s, Path::new(mp), Path::new(pp), &cfg)?;
        cells.push(CrossbarCell {
            row: model.to_string(),
            column: source.to_string(),
            report,
        });
    }
    let out: Vec<CellOut> = cells
        .iter()
        .map(|c| CellOut {
            model: &c.row,
            test_source: &c.column,
            report: &c.report,
        })
        .collect();
    s.emit(a.out.as_deref(), &serde_json::to_string_pretty(&out).expect("reports serialize"))?;
    if let Some(dir) = &a.crossbar_dir {
        fs::create_dir_all(dir).map_err(|e| io_context(e, dir))?;
        let metric = match a.crossbar_metric {
            MetricArg::Map => MetricName::Map,
            MetricArg::Map50 => MetricName::Map50,
            MetricArg::Map75 => MetricName::Map75,
        };
        for fam in MetricFamily::ALL {
            let m = crossbar(&cells, fam, metric);
            s.write(&dir.join(format!("crossbar_{}.csv", fam.name())), &m.to_csv())?;
        }
    }
    s.finish(manifest, None, to_value(&cfg))
}

fn parse_airport_list(doc: &str) -> Result<Vec<String>> {
    if doc.trim_start().starts_with('[') {
        return Ok(serde_json::from_str(doc)?);
    }
    Ok(doc
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect())
}

fn cmd_split(a: SplitArgs, manifest: Option<PathBuf>) -> Result<()> {
    let mut s = Session::new("split");
    let airports = match (&a.airports, &a.runway_db) {
        (Some(p), _) => parse_airport_list(&s.read(p)?)?,
        (None, Some(p)) => parse_runway_db(&s.read(p)?)?.airports().map(String::from).collect(),
        (None, None) => unreachable!("clap requires one of the two"),
    };
    let split = split_airports(&airports, a.ratio, a.seed)?;
    s.emit(a.out.as_deref(), &serde_json::to_string_pretty(&split).expect("split serializes"))?;
    s.finish(manifest, Some(a.seed), json!({"ratio": a.ratio}))
}

fn cmd_dump(a: DumpArgs, manifest: Option<PathBuf>) -> Result<()> {
    let mut s = Session::new("dump-odd-config");
    let cfg = load_odd(&mut s, a.config.as_deref())?;
    s.emit(a.out.as_deref(), &cfg.to_yaml())?;
    s.finish(manifest, None, to_value(&cfg))
}

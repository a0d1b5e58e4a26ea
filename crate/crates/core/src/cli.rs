//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 infeasible geometry or
//! singular system, 3 verification failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    evaluate_all, evaluate_bound, krasikov_check, reports_csv, verify_uncertainty, BoundData,
    BoundGeometry, BoundOptions, SignVariant, TheoremId, WeightRule, KRASIKOV_B,
};
use crate::error::{Error, Result};
use crate::farfield::{AngularGrid, CoeffWindow, FarField, L0_TOL, C64};
use crate::picard::{default_n_max, picard_threshold, spectrum, PowerBudget};
use crate::split_l1::{fista_split, L1Config, L1Geometry, Weights};
use crate::split_ls::{assemble, ComponentDocument, Geometry, Method, SplitSolution};
use crate::synth::{scene_farfield, Scene};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "farsplit", version, about = "Far field splitting and data completion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize gamma, ground truth and beta_truth from a scene file
    Synth {
        scene: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Split a measured far field into per-source components
    Split(SolveArgs),
    /// Split with a missing arc and restore the arc
    Complete(SolveArgs),
    #[command(subcommand)]
    Analyze(Analyze),
    /// Run the property suites
    Verify {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Debug, Subcommand)]
enum Analyze {
    /// Squared singular values s_n^2(R) and their asymptote
    Svd {
        #[arg(long = "R")]
        radius: f64,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Number of non-evanescent modes for a power ratio p/P
    Threshold {
        #[arg(long = "R")]
        radius: f64,
        #[arg(long)]
        ratio: f64,
    },
    /// Hypotheses and constants of the stability estimates
    Bounds {
        /// Geometry JSON or scene JSON
        geometry: PathBuf,
        #[arg(long)]
        theorem: Option<String>,
        #[arg(long, value_enum, default_value_t = SignArg::AsPrinted)]
        sign: SignArg,
        #[arg(long, value_enum, default_value_t = WeightRuleArg::Pair)]
        weights: WeightRuleArg,
        /// Data size: perturbation norm (least squares) or delta (l1)
        #[arg(long)]
        value: Option<f64>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Experiment config JSON; replaces the other flags
    #[arg(long, conflicts_with_all = ["scene", "gamma"])]
    config: Option<PathBuf>,
    #[arg(long, required_unless_present = "config")]
    scene: Option<PathBuf>,
    /// Measured far field (CSV or JSON); synthesized from the scene if absent
    #[arg(long)]
    gamma: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Method::Ls)]
    method: Method,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long, default_value_t = 1e-3)]
    mu: f64,
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// auto, uniform, or a comma-separated list
    #[arg(long, default_value = "uniform")]
    weights: String,
    /// Restrict l1 windows to the scene orders N_i instead of M/4
    #[arg(long)]
    band: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SignArg {
    AsPrinted,
    Conservative,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum WeightRuleArg {
    Pair,
    Triple,
}

impl ValueEnum for Method {
    fn value_variants<'a>() -> &'a [Self] {
        &[Method::Ls, Method::L1]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(match self {
            Method::Ls => "ls",
            Method::L1 => "l1",
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L1Options {
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default = "default_iters")]
    pub iters: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_weights")]
    pub weights: Weights,
    #[serde(default)]
    pub band: bool,
}

fn default_mu() -> f64 {
    1e-3
}

fn default_iters() -> usize {
    1000
}

fn default_tol() -> f64 {
    1e-10
}

fn default_weights() -> Weights {
    Weights::Uniform
}

impl Default for L1Options {
    fn default() -> Self {
        Self {
            mu: default_mu(),
            iters: default_iters(),
            tol: default_tol(),
            weights: default_weights(),
            band: false,
        }
    }
}

fn default_version() -> u32 {
    CONFIG_VERSION
}

/// JSON experiment description for `split` and `complete`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_version")]
    pub version: u32,
    pub scene: PathBuf,
    #[serde(default)]
    pub gamma: Option<PathBuf>,
    pub method: Method,
    #[serde(default)]
    pub l1: L1Options,
    pub output: PathBuf,
    #[serde(default)]
    pub format: Format,
}

impl ExperimentConfig {
    /// Reads a config; relative paths are taken relative to the config file.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: ExperimentConfig = serde_json::from_str(&fs::read_to_string(path)?)?;
        if cfg.version != CONFIG_VERSION {
            return Err(Error::Parse(format!("unsupported config version {}", cfg.version)));
        }
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.scene = base.join(&cfg.scene);
        cfg.gamma = cfg.gamma.map(|g| base.join(g));
        cfg.output = base.join(&cfg.output);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.scene.is_file() {
            return Err(Error::Parse(format!("scene file {} not found", self.scene.display())));
        }
        if let Some(g) = &self.gamma {
            if !g.is_file() {
                return Err(Error::Parse(format!("gamma file {} not found", g.display())));
            }
        }
        if self.method == Method::L1 && !(self.l1.mu > 0.0 && self.l1.iters > 0) {
            return Err(Error::Domain("l1 options need mu > 0 and iters > 0".into()));
        }
        Ok(())
    }
}

fn parse_weights(s: &str) -> Result<Weights> {
    match s {
        "auto" => Ok(Weights::Auto),
        "uniform" => Ok(Weights::Uniform),
        list => list
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad weight {x:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Weights::Explicit),
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Geometry(_) | Error::Singular { .. } | Error::Precondition(_) => EXIT_INFEASIBLE,
        _ => EXIT_USAGE,
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("FARSPLIT_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        // a pool may already exist when called twice in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    configure_threads();
    let out = std::io::stdout();
    let mut out = out.lock();
    match dispatch(cli.command, &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("farsplit: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Synth { scene, out: dir, format } => synth(&scene, &dir, format, out),
        Command::Split(args) => solve(args, false, out),
        Command::Complete(args) => solve(args, true, out),
        Command::Analyze(Analyze::Svd { radius, n_max, out: path }) => svd(radius, n_max, path.as_deref(), out),
        Command::Analyze(Analyze::Threshold { radius, ratio }) => {
            match picard_threshold(radius, PowerBudget::from_ratio(ratio)?)? {
                Some(n) => writeln!(out, "{n}")?,
                None => writeln!(out, "none")?,
            }
            Ok(0)
        }
        Command::Analyze(Analyze::Bounds {
            geometry,
            theorem,
            sign,
            weights,
            value,
            tau,
            format,
        }) => {
            let options = BoundOptions {
                sign: match sign {
                    SignArg::AsPrinted => SignVariant::AsPrinted,
                    SignArg::Conservative => SignVariant::Conservative,
                },
                weights: match weights {
                    WeightRuleArg::Pair => WeightRule::Pair,
                    WeightRuleArg::Triple => WeightRule::Triple,
                },
            };
            let theorem = theorem.map(|t| t.parse::<TheoremId>()).transpose()?;
            bounds(&geometry, theorem, options, BoundData { value, tau }, format, out)
        }
        Command::Verify { trials, seed } => verify(trials, seed, out),
    }
}

fn read_scene(path: &Path) -> Result<Scene> {
    Scene::from_json(&fs::read_to_string(path)?)
}

fn read_farfield(path: &Path) -> Result<FarField> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => Ok(FarField::read_json(path)?.0),
        _ => FarField::read_csv(path),
    }
}

fn write_farfield(field: &FarField, k: f64, dir: &Path, stem: &str, format: Format) -> Result<PathBuf> {
    let path = dir.join(format!("{stem}.{}", format.ext()));
    match format {
        Format::Csv => field.write_csv(&path)?,
        Format::Json => field.write_json(&path, k)?,
    }
    Ok(path)
}

/// Ground-truth windows written by `synth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthDocument {
    pub k: f64,
    pub grid_size: usize,
    pub components: Vec<ComponentDocument>,
}

fn synth(scene_path: &Path, dir: &Path, format: Format, out: &mut dyn Write) -> Result<i32> {
    let scene = read_scene(scene_path)?;
    let data = scene_farfield(&scene)?;
    fs::create_dir_all(dir)?;
    write_farfield(&data.gamma, scene.k, dir, "gamma", format)?;
    write_farfield(&data.beta_truth, scene.k, dir, "beta_truth", format)?;
    write_farfield(&data.clean, scene.k, dir, "clean", format)?;
    let truth = TruthDocument {
        k: scene.k,
        grid_size: scene.grid_size,
        components: scene
            .centers()
            .iter()
            .zip(&data.truth)
            .map(|(c, w)| ComponentDocument {
                center: *c,
                order: w.order(),
                re: w.values().iter().map(|v| v.re).collect(),
                im: w.values().iter().map(|v| v.im).collect(),
            })
            .collect(),
    };
    fs::write(dir.join("truth.json"), serde_json::to_string_pretty(&truth)?)?;
    writeln!(
        out,
        "samples={} components={} omega_points={} noise={:.6e}",
        scene.grid_size,
        scene.components.len(),
        scene.omega.grid_points(data.gamma.grid()).len(),
        data.noise.norm()
    )?;
    Ok(0)
}

fn experiment(args: SolveArgs) -> Result<ExperimentConfig> {
    if let Some(path) = &args.config {
        return ExperimentConfig::load(path);
    }
    let cfg = ExperimentConfig {
        version: CONFIG_VERSION,
        scene: args.scene.expect("clap requires scene without config"),
        gamma: args.gamma,
        method: args.method,
        l1: L1Options {
            mu: args.mu,
            iters: args.iters,
            tol: args.tol,
            weights: parse_weights(&args.weights)?,
            band: args.band,
        },
        output: args.out,
        format: args.format,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Runs one split or completion experiment and writes its artifacts.
pub fn run_experiment(cfg: &ExperimentConfig, complete: bool, out: &mut dyn Write) -> Result<SplitSolution> {
    let scene = read_scene(&cfg.scene)?;
    if complete && scene.omega.is_empty() {
        return Err(Error::Geometry("complete needs a non-empty missing arc".into()));
    }
    let grid = scene.grid()?;
    let gamma = match &cfg.gamma {
        Some(path) => read_farfield(path)?,
        None => scene_farfield(&scene)?.gamma,
    };
    if gamma.grid() != grid {
        return Err(Error::LengthMismatch {
            expected: grid.size(),
            found: gamma.grid().size(),
        });
    }
    fs::create_dir_all(&cfg.output)?;
    let solution = match cfg.method {
        Method::Ls => {
            let system = assemble(&Geometry::from_scene(&scene)?)?;
            system.solve(&gamma)?
        }
        Method::L1 => {
            let geometry = L1Geometry::new(scene.k, grid, scene.centers(), scene.omega.clone())?;
            let config = L1Config {
                mu: cfg.l1.mu,
                max_iters: cfg.l1.iters,
                tol: cfg.l1.tol,
                weights: cfg.l1.weights.clone(),
                lipschitz: None,
                windows: cfg.l1.band.then(|| scene.orders()),
            };
            let run = fista_split(&gamma, &geometry, &config)?;
            fs::write(cfg.output.join("trace.csv"), run.trace_csv())?;
            run.solution
        }
    };
    fs::write(cfg.output.join("solution.json"), solution.to_json()?)?;
    for i in 0..solution.alphas.len() {
        let field = solution.component_farfield(i)?;
        write_farfield(&field, scene.k, &cfg.output, &format!("component_{}", i + 1), cfg.format)?;
    }
    if complete {
        write_farfield(&solution.restored_segment(), scene.k, &cfg.output, "restored", cfg.format)?;
        write_farfield(&solution.completed(&gamma)?, scene.k, &cfg.output, "completed", cfg.format)?;
    }
    let d = &solution.diagnostics;
    let mut line = format!("method={} residual={:.6e}", method_name(solution.method), solution.residual);
    if let Some(c) = d.condition_number {
        line.push_str(&format!(" condition={c:.6e}"));
    }
    if let Some(it) = d.iterations {
        line.push_str(&format!(" iterations={it}"));
    }
    if let Some(o) = d.objective {
        line.push_str(&format!(" objective={o:.6e}"));
    }
    writeln!(out, "{line}")?;
    Ok(solution)
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Ls => "ls",
        Method::L1 => "l1",
    }
}

fn solve(args: SolveArgs, complete: bool, out: &mut dyn Write) -> Result<i32> {
    let cfg = experiment(args)?;
    run_experiment(&cfg, complete, out)?;
    Ok(0)
}

fn svd(radius: f64, n_max: Option<usize>, path: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    let n_max = n_max.unwrap_or_else(|| default_n_max(radius));
    let spec = spectrum(radius, n_max)?;
    let mut csv = String::from("n,s_n_squared,asymptote_2sqrt(R^2-n^2)\n");
    for n in 0..=n_max as i64 {
        let s = spec.get(n).expect("n within spectrum");
        csv.push_str(&format!("{n},{s:.17e},{:.17e}\n", spec.asymptote_curve(n)));
    }
    match path {
        Some(p) => fs::write(p, csv)?,
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(0)
}

#[derive(Debug, Clone, Deserialize)]
struct GeometryFile {
    #[serde(default = "default_version")]
    version: u32,
    #[serde(flatten)]
    geometry: BoundGeometry,
}

/// Geometry for the bound table: a geometry JSON, or a scene whose orders,
/// l0 counts and missing-arc measure are taken from its ground truth.
pub fn load_bound_geometry(path: &Path) -> Result<BoundGeometry> {
    let text = fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.get("components").is_some() {
        let scene = Scene::from_json(&text)?;
        let data = scene_farfield(&scene)?;
        return Ok(BoundGeometry {
            k: scene.k,
            centers: scene.centers(),
            orders: Some(scene.orders()),
            l0: Some(
                data.truth
                    .iter()
                    .map(|w| w.l0_support(L0_TOL).len() as f64)
                    .collect(),
            ),
            omega_measure: Some(scene.omega.measure()),
        });
    }
    let file: GeometryFile = serde_json::from_value(value)?;
    if file.version != CONFIG_VERSION {
        return Err(Error::Parse(format!("unsupported geometry version {}", file.version)));
    }
    Ok(file.geometry)
}

fn bounds(
    path: &Path,
    theorem: Option<TheoremId>,
    options: BoundOptions,
    data: BoundData,
    format: Format,
    out: &mut dyn Write,
) -> Result<i32> {
    let geometry = load_bound_geometry(path)?;
    let reports = match theorem {
        Some(t) => vec![evaluate_bound(t, &geometry, &data, &options)?],
        None => evaluate_all(&geometry, &data, &options),
    };
    match format {
        Format::Csv => out.write_all(reports_csv(&reports).as_bytes())?,
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&reports)?)?,
    }
    if theorem.is_some() && !reports[0].hypotheses_ok {
        return Ok(EXIT_INFEASIBLE);
    }
    Ok(0)
}

/// Outcome of one property suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn suite(name: &str, passed: bool, detail: String) -> SuiteResult {
    SuiteResult {
        name: name.into(),
        passed,
        detail,
    }
}

fn uncertainty_suite(theorem: TheoremId, trials: usize, seed: u64) -> Result<SuiteResult> {
    let s = verify_uncertainty(theorem, trials, seed)?;
    Ok(suite(
        &format!("uncertainty {theorem}"),
        s.violations == 0,
        format!("trials={} max_ratio={:.6} violations={}", s.trials, s.max_ratio, s.violations),
    ))
}

fn krasikov_suite() -> Result<SuiteResult> {
    let mut worst = 0.0f64;
    for m in 1..=6 {
        for n in 1..=6 {
            let edge = 2.0 * (m + n + 1) as f64;
            let r: Vec<f64> = (0..800).map(|i| edge + 1e-6 + i as f64 * 0.125).collect();
            worst = worst.max(krasikov_check(m, n, &r)?);
        }
    }
    Ok(suite(
        "krasikov",
        worst <= KRASIKOV_B,
        format!("max r J_n^2 = {worst:.6} (bound {KRASIKOV_B})"),
    ))
}

fn scaling_suite(trials: usize, seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = 0;
    let options = BoundOptions::default();
    for _ in 0..trials {
        let k = rng.gen_range(0.1..20.0);
        let count = rng.gen_range(2..=4);
        let geometry = BoundGeometry {
            k,
            centers: (0..count)
                .map(|_| [rng.gen_range(-100.0..100.0), rng.gen_range(-100.0..100.0)])
                .collect(),
            orders: Some((0..count).map(|_| rng.gen_range(0..6)).collect()),
            l0: Some((0..count).map(|_| rng.gen_range(1..5) as f64).collect()),
            omega_measure: Some(rng.gen_range(0.0..1.0)),
        };
        let scaled = BoundGeometry {
            k: 1.0,
            centers: geometry.centers.iter().map(|c| [k * c[0], k * c[1]]).collect(),
            ..geometry.clone()
        };
        for t in TheoremId::ALL {
            let a = evaluate_bound(t, &geometry, &BoundData::default(), &options);
            let b = evaluate_bound(t, &scaled, &BoundData::default(), &options);
            let same = match (a, b) {
                (Ok(a), Ok(b)) => a.components == b.components && a.hypotheses == b.hypotheses,
                (Err(_), Err(_)) => true,
                _ => false,
            };
            if !same {
                mismatches += 1;
            }
        }
    }
    Ok(suite(
        "wavenumber scaling",
        mismatches == 0,
        format!("geometries={trials} mismatches={mismatches}"),
    ))
}

fn spectral_sum_suite() -> Result<SuiteResult> {
    let mut worst = 0.0f64;
    for r in [1.0, 10.0, 100.0] {
        let s = spectrum(r, default_n_max(r))?;
        let total = s.symmetric_sum() + s.tail_bound();
        let exact = std::f64::consts::PI * r * r;
        worst = worst.max((total - exact).abs() / exact);
    }
    Ok(suite("spectral sum", worst <= 1e-8, format!("max relative error {worst:.3e}")))
}

fn monotonicity_suite(trials: usize, seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5a5a);
    let mut bad = 0;
    for _ in 0..trials {
        let n1 = rng.gen_range(0..5);
        let n2 = rng.gen_range(0..5);
        let d = rng.gen_range(1.0..300.0);
        let step = rng.gen_range(0.0..50.0);
        let eval = |d: f64| {
            evaluate_bound(
                TheoremId::LsTwo,
                &BoundGeometry {
                    k: 1.0,
                    centers: vec![[0.0, 0.0], [d, 0.0]],
                    orders: Some(vec![n1, n2]),
                    l0: None,
                    omega_measure: None,
                },
                &BoundData::default(),
                &BoundOptions::default(),
            )
        };
        let (a, b) = (eval(d)?, eval(d + step)?);
        if (a.hypotheses_ok && !b.hypotheses_ok) || (a.constant.is_finite() && b.constant > a.constant) {
            bad += 1;
        }
    }
    Ok(suite("LS_two monotonicity", bad == 0, format!("trials={trials} failures={bad}")))
}

fn translation_suite(trials: usize, seed: u64) -> Result<SuiteResult> {
    let grid = AngularGrid::new(256)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa5a5);
    let mut worst = 0.0f64;
    for _ in 0..trials.min(200) {
        let values: Vec<C64> = (0..17)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let alpha = FarField::from_window(grid, &CoeffWindow::new(8, values)?)?;
        let c = [rng.gen_range(-30.0..30.0), rng.gen_range(-30.0..30.0)];
        let direct = alpha.translate(c, 1.0);
        let conv = alpha.translate_coefficients(c, 1.0)?;
        worst = worst.max(direct.sub(&conv)?.norm() / alpha.norm());
        worst = worst.max((direct.norm() - alpha.norm()).abs() / alpha.norm());
    }
    Ok(suite(
        "translation",
        worst <= 1e-10,
        format!("max relative deviation {worst:.3e}"),
    ))
}

/// Runs every property suite; `seed` splits into independent per-suite streams.
pub fn verify_suites(trials: usize, seed: u64) -> Result<Vec<SuiteResult>> {
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    let jobs: Vec<Box<dyn Fn() -> Result<SuiteResult> + Send + Sync>> = vec![
        Box::new(move || uncertainty_suite(TheoremId::UncertaintyL0, trials, seed)),
        Box::new(move || uncertainty_suite(TheoremId::UncertaintyBand, trials, seed)),
        Box::new(move || uncertainty_suite(TheoremId::UncertaintyMixed, trials, seed)),
        Box::new(krasikov_suite),
        Box::new(move || scaling_suite(trials.min(500), seed)),
        Box::new(spectral_sum_suite),
        Box::new(move || monotonicity_suite(trials, seed)),
        Box::new(move || translation_suite(trials, seed)),
    ];
    jobs.par_iter().map(|job| job()).collect()
}

fn verify(trials: usize, seed: u64, out: &mut dyn Write) -> Result<i32> {
    let results = verify_suites(trials, seed)?;
    let mut ok = true;
    for r in &results {
        writeln!(out, "{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail)?;
        ok &= r.passed;
    }
    Ok(if ok { 0 } else { EXIT_VERIFY })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["farsplit"]), EXIT_USAGE);
        assert_eq!(run(["farsplit", "bogus"]), EXIT_USAGE);
        assert_eq!(run(["farsplit", "split", "--scene", "/nonexistent.json"]), EXIT_USAGE);
        assert_eq!(run(["farsplit", "--help"]), 0);
    }

    #[test]
    fn weights_parse() {
        assert_eq!(parse_weights("auto").unwrap(), Weights::Auto);
        assert_eq!(parse_weights("uniform").unwrap(), Weights::Uniform);
        assert_eq!(parse_weights("1, 0.5").unwrap(), Weights::Explicit(vec![1.0, 0.5]));
        assert!(parse_weights("x").is_err());
    }

    #[test]
    fn error_classes_map_to_exit_codes() {
        assert_eq!(exit_code(&Error::Singular { condition: 1e13 }), EXIT_INFEASIBLE);
        assert_eq!(exit_code(&Error::Geometry("x".into())), EXIT_INFEASIBLE);
        assert_eq!(exit_code(&Error::Parse("x".into())), EXIT_USAGE);
    }

    #[test]
    fn svd_csv_matches_library() {
        let mut buf = Vec::new();
        svd(10.0, Some(20), None, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "n,s_n_squared,asymptote_2sqrt(R^2-n^2)");
        let first: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(first[0], 0.0);
        let s0 = crate::picard::squared_singular_value(0, 10.0).unwrap();
        assert!((first[1] - s0).abs() <= 1e-13 * s0);
        assert_eq!(text.lines().count(), 22);
    }

    #[test]
    fn suites_pass_small() {
        let results = verify_suites(50, 3).unwrap();
        assert!(results.iter().all(|r| r.passed), "{results:?}");
        assert_eq!(results.len(), 8);
    }

    #[test]
    fn config_without_scene_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("cfg.json");
        fs::write(&cfg, r#"{"scene": "missing.json", "method": "ls", "output": "out"}"#).unwrap();
        assert!(ExperimentConfig::load(&cfg).is_err());
    }
}

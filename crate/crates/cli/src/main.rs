//! `ncfa`: command-line front end for ncfa-core.
//!
//! Exit codes: 0 success, 1 computational or I/O error (a JSON error object
//! is written to stderr), 2 usage error.

mod finite;
mod manifest;
mod verify;

use std::fs;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ncfa::deconv::{run_experiment_with, DeconvConfig};
use ncfa::diagnostics::{
    l2_test, smoothness_test, sobolev_norm_sq, supersmooth_fit, supersmooth_implies_smooth_check, trace_report,
    Mode, Source,
};
use ncfa::dual::{enumerate_irreps, GroupId, RootSystemData};
use ncfa::exec::Exec;
use ncfa::groups::{read_samples, write_samples, GENERATOR_ID};
use ncfa::measures::{sample_central, CentralMeasureSpec, MeasureFamily, MeasureJson};
use ncfa::spectra::{empirical_transform_with, synthesize_grid, EmpiricalMode, SpectralCoeffs, SpectralFile};
use ncfa::NcfaError;

use manifest::{csv_num, emit_csv, emit_json, RunManifest};

#[derive(Parser)]
#[command(name = "ncfa", version, about = "Fourier analysis of probability measures on compact Lie groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List dual points with |lambda| <= max-norm.
    Irreps(IrrepsArgs),
    /// Fourier coefficients of a measure or of a sample file.
    Transform(TransformArgs),
    /// Evaluate a scalar coefficient file on a grid of conjugacy angles.
    Synth(SynthArgs),
    /// Draw samples into the binary sample format.
    Sample(SampleArgs),
    /// Decay diagnostics of a measure or coefficient file.
    Diagnose(DiagnoseArgs),
    /// Run a deconvolution experiment.
    Deconv(DeconvArgs),
    /// Run the invariant suite.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct IrrepsArgs {
    #[arg(long, default_value = "su2")]
    group: GroupId,
    #[arg(long)]
    max_norm: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ModeArg {
    TraceOnly,
    FullMatrix,
}

#[derive(Args)]
struct TransformArgs {
    /// Measure as JSON, `@file`, or `haar`/`dirac` with --group.
    #[arg(long, conflicts_with = "samples", required_unless_present = "samples")]
    measure: Option<String>,
    /// Binary sample file; computes the empirical transform.
    #[arg(long)]
    samples: Option<PathBuf>,
    #[arg(long)]
    group: Option<GroupId>,
    /// Defaults to the automatic cutoff for measures; required for samples.
    #[arg(long)]
    max_norm: Option<f64>,
    #[arg(long, value_enum, default_value_t = ModeArg::TraceOnly)]
    mode: ModeArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Spectral JSON file.
    #[arg(long)]
    coeffs: PathBuf,
    #[arg(long, default_value_t = 256)]
    grid: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, default_value = "haar")]
    measure: String,
    #[arg(long)]
    group: Option<GroupId>,
    /// Number of samples.
    #[arg(long = "n", alias = "count")]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

const DEFAULT_MAX_NORM: f64 = 64.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ReportKind {
    L2,
    Smooth,
    Supersmooth,
    Trace,
    Sobolev { p: f64 },
}

impl FromStr for ReportKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "l2" => Ok(ReportKind::L2),
            "smooth" => Ok(ReportKind::Smooth),
            "supersmooth" => Ok(ReportKind::Supersmooth),
            "trace" => Ok(ReportKind::Trace),
            _ => match s.strip_prefix("sobolev:").map(str::parse::<f64>) {
                Some(Ok(p)) if p >= 0.0 && p.is_finite() => Ok(ReportKind::Sobolev { p }),
                _ => Err(format!("expected l2|smooth|supersmooth|trace|sobolev:<p >= 0>, got {s:?}")),
            },
        }
    }
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum ModeChoice {
    Auto,
    Analytic,
    Numeric,
}

impl From<ModeChoice> for Mode {
    fn from(m: ModeChoice) -> Mode {
        match m {
            ModeChoice::Auto => Mode::Auto,
            ModeChoice::Analytic => Mode::Analytic,
            ModeChoice::Numeric => Mode::Numeric,
        }
    }
}

#[derive(Args)]
struct DiagnoseArgs {
    #[arg(long, conflicts_with = "coeffs", required_unless_present = "coeffs")]
    measure: Option<String>,
    /// Spectral JSON file instead of a measure.
    #[arg(long)]
    coeffs: Option<PathBuf>,
    #[arg(long)]
    group: Option<GroupId>,
    /// Cutoff norm; 64 by default, the automatic cutoff for `trace`.
    #[arg(long)]
    max_norm: Option<f64>,
    #[arg(long)]
    report: ReportKind,
    #[arg(long, value_enum, default_value_t = ModeChoice::Auto)]
    mode: ModeChoice,
    #[arg(long, default_value_t = 4)]
    max_k: u32,
    /// Heat time for `--report trace`; defaults to t of a brownian measure.
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DeconvArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV with columns theta,f_est,f_true for the largest n.
    #[arg(long)]
    emit_density: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Skip the Monte Carlo checks.
    #[arg(long)]
    quick: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Error raised after the report was written, e.g. a failed verify.
#[derive(Debug)]
struct ChecksFailed;

impl std::fmt::Display for ChecksFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("one or more checks failed")
    }
}

impl std::error::Error for ChecksFailed {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let body = serde_json::json!({ "error": { "kind": error_kind(&e), "message": message(&e) } });
            eprintln!("{body}");
            ExitCode::from(1)
        }
    }
}

/// The error chain joined by ": ", skipping links already quoted by their parent.
fn message(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for link in e.chain() {
        let text = link.to_string();
        if !out.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

fn error_kind(e: &anyhow::Error) -> &'static str {
    if let Some(n) = e.downcast_ref::<NcfaError>() {
        n.kind()
    } else if e.is::<finite::NonFinite>() {
        "numerical-failure"
    } else if e.is::<ChecksFailed>() {
        "verification-failed"
    } else if e.is::<serde_json::Error>() {
        "json"
    } else if e.is::<std::io::Error>() {
        "io"
    } else {
        "invalid-argument"
    }
}

/// `NCFA_THREADS` caps the worker pool; unset or 0 means one per core.
fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("NCFA_THREADS") else { return Ok(()) };
    let n: usize = raw.trim().parse().map_err(|_| anyhow!("NCFA_THREADS must be a nonnegative integer, got {raw:?}"))?;
    #[cfg(feature = "parallel")]
    if n > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Irreps(a) => irreps(a),
        Command::Transform(a) => transform(a),
        Command::Synth(a) => synth(a),
        Command::Sample(a) => sample(a),
        Command::Diagnose(a) => diagnose(a),
        Command::Deconv(a) => deconv(a),
        Command::Verify(a) => verify_cmd(a),
    }
}

/// Reads a measure from inline JSON, `@path`, a path, or `haar`/`dirac`.
fn parse_measure(text: &str, group: Option<GroupId>) -> Result<CentralMeasureSpec> {
    let text = text.trim();
    let spec = match text {
        "haar" => CentralMeasureSpec::haar(group.unwrap_or(GroupId::Su2)),
        "dirac" => CentralMeasureSpec::dirac(group.unwrap_or(GroupId::Su2)),
        t if t.starts_with('{') => t.parse()?,
        t => {
            let path = t.strip_prefix('@').unwrap_or(t);
            let body = fs::read_to_string(path).with_context(|| format!("reading measure file {path}"))?;
            body.parse()?
        }
    };
    if let Some(g) = group {
        if g != spec.group {
            bail!(NcfaError::InvalidArgument(format!("--group {g} but the measure is on {}", spec.group)));
        }
    }
    Ok(spec)
}

fn read_coeffs(path: &Path) -> Result<SpectralCoeffs> {
    let body = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: SpectralFile = serde_json::from_str(&body).with_context(|| format!("parsing {}", path.display()))?;
    Ok(SpectralCoeffs::try_from(file)?)
}

fn exec() -> Exec {
    Exec::default()
}

#[derive(Serialize)]
struct IrrepsConfig {
    command: &'static str,
    group: GroupId,
    max_norm: f64,
}

fn irreps(a: IrrepsArgs) -> Result<()> {
    let rs = RootSystemData::new(a.group);
    let list = enumerate_irreps(&rs, a.max_norm)?;
    let manifest = RunManifest::new(&IrrepsConfig { command: "irreps", group: a.group, max_norm: a.max_norm }, None, Some(a.group))?;
    match a.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Payload<'a> {
                group: GroupId,
                max_norm: f64,
                count: usize,
                irreps: &'a [ncfa::dual::Irrep],
            }
            let payload = Payload { group: a.group, max_norm: a.max_norm, count: list.len(), irreps: &list };
            emit_json(a.out.as_deref(), &manifest, &payload)
        }
        Format::Csv => {
            let rows = list
                .iter()
                .map(|ir| {
                    let lambda: Vec<String> = ir.lambda.iter().map(i64::to_string).collect();
                    Ok(vec![lambda.join(" "), ir.dim.to_string(), csv_num(ir.casimir)?, csv_num(ir.norm)?])
                })
                .collect::<Result<Vec<_>>>()?;
            emit_csv(a.out.as_deref(), &manifest, "lambda,dim,casimir,norm", &rows)
        }
    }
}

fn transform(a: TransformArgs) -> Result<()> {
    #[derive(Serialize)]
    struct Config<'a> {
        command: &'static str,
        measure: Option<MeasureJson>,
        samples_digest: Option<String>,
        max_norm: Option<f64>,
        mode: &'a ModeArg,
    }
    let (coeffs, config_measure, samples_digest, seed) = match (&a.measure, &a.samples) {
        (Some(m), _) => {
            let spec = parse_measure(m, a.group)?;
            let coeffs = match a.max_norm {
                Some(r) => spec.coefficients_up_to(r)?,
                None => spec.coefficients()?,
            };
            (coeffs, Some(MeasureJson::from(spec)), None, None)
        }
        (None, Some(path)) => {
            let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
            let samples = read_samples(bytes.as_slice())?;
            if let Some(g) = a.group {
                if g != samples.group {
                    bail!(NcfaError::InvalidArgument(format!("--group {g} but the samples are on {}", samples.group)));
                }
            }
            let Some(r) = a.max_norm else {
                bail!(NcfaError::InvalidArgument("--max-norm is required with --samples".into()));
            };
            let irreps = enumerate_irreps(&RootSystemData::new(samples.group), r)?;
            let mode = match a.mode {
                ModeArg::TraceOnly => EmpiricalMode::TraceOnly,
                ModeArg::FullMatrix => EmpiricalMode::FullMatrix,
            };
            let coeffs = empirical_transform_with(&samples, &irreps, mode, exec())?;
            let digest = sha_hex(&bytes);
            (coeffs, None, Some(digest), Some(samples.seed))
        }
        (None, None) => unreachable!("clap requires --measure or --samples"),
    };
    let config = Config { command: "transform", measure: config_measure, samples_digest, max_norm: a.max_norm, mode: &a.mode };
    let manifest = RunManifest::new(&config, seed, Some(coeffs.group))?;
    emit_json(a.out.as_deref(), &manifest, &SpectralFile::from(&coeffs))
}

fn sha_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn synth(a: SynthArgs) -> Result<()> {
    let coeffs = read_coeffs(&a.coeffs)?;
    if a.grid < 2 {
        bail!(NcfaError::InvalidArgument(format!("--grid must be at least 2, got {}", a.grid)));
    }
    let n = a.grid;
    let angles: Vec<f64> = match coeffs.group {
        GroupId::Su2 | GroupId::So3 => (0..n).map(|j| j as f64 * std::f64::consts::PI / (n - 1) as f64).collect(),
        GroupId::Torus(1) => (0..n).map(|j| j as f64 * std::f64::consts::TAU / n as f64).collect(),
        g => bail!(NcfaError::Unsupported(format!("angle-grid synthesis is not defined on {g}"))),
    };
    let values = synthesize_grid(&coeffs, &angles, exec())?;
    let rows = angles
        .iter()
        .zip(&values)
        .map(|(&t, &f)| Ok(vec![csv_num(t)?, csv_num(f)?]))
        .collect::<Result<Vec<_>>>()?;
    #[derive(Serialize)]
    struct Config {
        command: &'static str,
        coeffs_digest: String,
        grid: usize,
    }
    let digest = sha_hex(&fs::read(&a.coeffs)?);
    let manifest = RunManifest::new(&Config { command: "synth", coeffs_digest: digest, grid: n }, None, Some(coeffs.group))?;
    emit_csv(a.out.as_deref(), &manifest, "theta,f", &rows)
}

fn sample(a: SampleArgs) -> Result<()> {
    let spec = parse_measure(&a.measure, a.group)?;
    let samples = match spec.family {
        MeasureFamily::Haar => ncfa::groups::haar_sample_with(spec.group, a.count, a.seed, exec())?,
        _ => sample_central(&spec, a.count, a.seed)?,
    };
    let file = fs::File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_samples(&samples, BufWriter::new(file))?;
    #[derive(Serialize)]
    struct Config {
        command: &'static str,
        measure: MeasureJson,
        count: usize,
        seed: u64,
    }
    #[derive(Serialize)]
    struct Payload {
        group: GroupId,
        count: usize,
        generator_id: String,
        out: String,
    }
    let manifest = RunManifest::new(
        &Config { command: "sample", measure: MeasureJson::from(spec.clone()), count: a.count, seed: a.seed },
        Some(a.seed),
        Some(spec.group),
    )?;
    let payload = Payload {
        group: spec.group,
        count: samples.len(),
        generator_id: samples.generator_id.clone(),
        out: a.out.display().to_string(),
    };
    debug_assert_eq!(samples.generator_id, GENERATOR_ID);
    emit_json(None, &manifest, &payload)
}

fn diagnose(a: DiagnoseArgs) -> Result<()> {
    let spec = a.measure.as_deref().map(|m| parse_measure(m, a.group)).transpose()?;
    let coeffs = a.coeffs.as_deref().map(read_coeffs).transpose()?;
    let source = match (&spec, &coeffs) {
        (Some(s), _) => Source::Spec(s),
        (None, Some(c)) => Source::Coeffs(c),
        (None, None) => unreachable!("clap requires --measure or --coeffs"),
    };
    let group = spec.as_ref().map(|s| s.group).or(coeffs.as_ref().map(|c| c.group));
    let max_norm = a.max_norm.unwrap_or(DEFAULT_MAX_NORM);
    let result = match a.report {
        ReportKind::L2 => serde_json::to_value(l2_test(source, max_norm, a.mode.into())?)?,
        ReportKind::Smooth => serde_json::to_value(smoothness_test(source, a.max_k, max_norm, a.mode.into())?)?,
        ReportKind::Supersmooth => {
            let fit = supersmooth_fit(source, None)?;
            let chain = match &spec {
                Some(s) => Some(supersmooth_implies_smooth_check(s)?),
                None => None,
            };
            serde_json::json!({ "fit": fit, "implies_smooth": chain })
        }
        ReportKind::Trace => {
            let t = match (a.t, &spec) {
                (Some(t), _) => t,
                (None, Some(CentralMeasureSpec { family: MeasureFamily::Cid(f), .. }))
                    if f.kind == ncfa::measures::Bernstein::Linear =>
                {
                    f.t
                }
                _ => bail!(NcfaError::InvalidArgument("--report trace needs --t or a brownian measure".into())),
            };
            serde_json::to_value(trace_report(t, group.unwrap_or(GroupId::Su2), a.max_norm)?)?
        }
        ReportKind::Sobolev { p } => {
            let c = match (&spec, &coeffs) {
                (Some(s), _) => s.coefficients_up_to(max_norm)?,
                (None, Some(c)) => c.clone(),
                _ => unreachable!(),
            };
            serde_json::json!({ "p": p, "norm_sq": sobolev_norm_sq(&c, p)?, "cutoff_norm": c.cutoff_norm })
        }
    };
    #[derive(Serialize)]
    struct Config {
        command: &'static str,
        measure: Option<MeasureJson>,
        coeffs_digest: Option<String>,
        max_norm: Option<f64>,
        report: ReportKind,
        mode: ModeChoice,
        max_k: u32,
        t: Option<f64>,
    }
    let config = Config {
        command: "diagnose",
        measure: spec.clone().map(MeasureJson::from),
        coeffs_digest: a.coeffs.as_deref().map(fs::read).transpose()?.map(|b| sha_hex(&b)),
        max_norm: a.max_norm,
        report: a.report,
        mode: a.mode,
        max_k: a.max_k,
        t: a.t,
    };
    let manifest = RunManifest::new(&config, None, group)?;
    #[derive(Serialize)]
    struct Payload {
        report: ReportKind,
        measure: Option<MeasureJson>,
        result: serde_json::Value,
    }
    emit_json(a.out.as_deref(), &manifest, &Payload { report: a.report, measure: config.measure, result })
}

fn deconv(a: DeconvArgs) -> Result<()> {
    let file = fs::File::open(&a.config).with_context(|| format!("opening {}", a.config.display()))?;
    let config: DeconvConfig =
        serde_json::from_reader(BufReader::new(file)).with_context(|| format!("parsing {}", a.config.display()))?;
    let run = run_experiment_with(&config, exec())?;
    let manifest = RunManifest::new(&config, Some(config.seed), Some(config.group))?;
    emit_json(a.out.as_deref(), &manifest, &run.report)?;
    if let Some(path) = &a.emit_density {
        let est = run.estimates.last().expect("validated config has at least one n");
        let rows = run
            .grid
            .angles
            .iter()
            .zip(est)
            .zip(&run.truth)
            .map(|((&t, &e), &f)| Ok(vec![csv_num(t)?, csv_num(e)?, csv_num(f)?]))
            .collect::<Result<Vec<_>>>()?;
        emit_csv(Some(path), &manifest, "theta,f_est,f_true", &rows)?;
    }
    Ok(())
}

fn verify_cmd(a: VerifyArgs) -> Result<()> {
    let report = verify::run(a.quick);
    #[derive(Serialize)]
    struct Config {
        command: &'static str,
        quick: bool,
    }
    let manifest = RunManifest::new(&Config { command: "verify", quick: a.quick }, None, None)?;
    emit_json(a.out.as_deref(), &manifest, &report)?;
    if report.passed {
        Ok(())
    } else {
        Err(ChecksFailed.into())
    }
}

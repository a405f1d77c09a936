//! `cofx` — command-line surface for the causal analysis library.
//!
//! Subcommands wire the library into reproducible experiments: model
//! simulation and fitting, effect-matrix computation, signal-pair
//! decomposition (with subspace, wavelet and SSA restrictions), spectral
//! comparison curves, mSSA scoring, oracle validation, and bundled figure
//! presets. All randomness flows from explicit `--seed` values, so repeated
//! invocations with identical arguments produce byte-identical output.
//!
//! Exit codes: 0 success, 2 input/schema error, 3 unstable model,
//! 4 validation failure. `COFX_THREADS` caps internal parallelism.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use cofx::cof::{
    compute_cofs, constrained_cofs, jointly_constrained_cofs, ssa_restricted_cofs, BasisSide,
    CofSet, ProjectionBasis,
};
use cofx::effects::{twce, WindowSpec};
use cofx::error::CofxError;
use cofx::estimation::{fit_var, GraphSpec};
use cofx::models;
use cofx::mssa::{mssa_cof_report, ssa_basis};
use cofx::oracle::{validate_effect_matrix, ValidationOptions};
use cofx::spectral::{
    fourier_grid, frequency_causal_effects, frequency_granger, scale_effects, wavelet_matrix,
    GrangerMode, SpectralCurve,
};
use cofx::var_model::{SamplePaths, VarModel};

#[derive(Parser)]
#[command(
    name = "cofx",
    version,
    about = "Causal time-series analysis for linear VAR processes"
)]
struct Cli {
    /// Refuse randomized operations that do not pin an explicit --seed.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

/// Cause/effect window selection shared by matrix-producing subcommands.
#[derive(Args)]
struct WindowArgs {
    /// Cause process index (1-based).
    #[arg(long)]
    cause: usize,
    /// Effect process index (1-based).
    #[arg(long)]
    effect: usize,
    /// Steps between the cause-window end and the effect-window end.
    #[arg(long, default_value_t = 0)]
    tau: usize,
    /// Cause window length.
    #[arg(long)]
    ti: usize,
    /// Effect window length.
    #[arg(long)]
    tj: usize,
}

impl WindowArgs {
    fn spec(&self) -> Result<WindowSpec, Failure> {
        Ok(WindowSpec::new(
            self.cause,
            self.effect,
            self.tau,
            self.ti,
            self.tj,
        )?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GcModeArg {
    /// Effect-noise denominator (vanishes for decoupled processes).
    Standard,
    /// Cause-noise denominator variant.
    CauseNormalized,
    /// Emit both variants.
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// Effect matrix and signal pairs for bundled process A (1 -> 3, T=100).
    #[value(name = "figA")]
    FigA,
    /// mSSA-vs-decomposition scoring for bundled process B (T=100).
    #[value(name = "figB")]
    FigB,
    /// Spectral comparison curves for the six bundled bivariate models (T=200).
    #[value(name = "fig6")]
    Fig6,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate sample paths from a model document (CSV).
    Simulate {
        /// Model JSON file.
        #[arg(long)]
        model: PathBuf,
        /// Number of retained time steps.
        #[arg(long)]
        length: usize,
        /// RNG seed (defaults to 0 outside --strict mode).
        #[arg(long)]
        seed: Option<u64>,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit edge coefficients on observed data over a known graph (JSON).
    Fit {
        /// Sample-path CSV file.
        #[arg(long)]
        data: PathBuf,
        /// Graph JSON file (model schema without coefficients).
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute a time-windowed causal effect matrix (JSON).
    Twce {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        window: WindowArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decompose an effect matrix into impulse/response signal pairs (JSON).
    Cof {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        window: WindowArgs,
        /// Number of leading pairs to keep (defaults to min(ti, tj)).
        #[arg(long)]
        rank: Option<usize>,
        /// JSON file with impulse/response subspace bases.
        #[arg(long, conflicts_with_all = ["wavelet_scale", "ssa_top"])]
        constraints: Option<PathBuf>,
        /// Restrict to wavelet scales, written IN:OUT (or one scale for both).
        #[arg(long, requires = "wavelet_levels", conflicts_with = "ssa_top")]
        wavelet_scale: Option<String>,
        /// Wavelet decomposition depth.
        #[arg(long)]
        wavelet_levels: Option<usize>,
        /// Wavelet filter (haar or d4).
        #[arg(long, default_value = "haar")]
        wavelet_filter: String,
        /// Restrict each side to its leading single-series SSA modes.
        #[arg(long)]
        ssa_top: Option<usize>,
        /// Sample-path CSV backing the SSA bases.
        #[arg(long, conflicts_with = "samples")]
        data: Option<PathBuf>,
        /// Simulate this many samples for the SSA bases instead.
        #[arg(long)]
        samples: Option<usize>,
        /// RNG seed for --samples (defaults to 0 outside --strict mode).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Frequency-resolved causal effects and Granger causality (CSV).
    Freq {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        cause: usize,
        #[arg(long)]
        effect: usize,
        /// Shared window length for both processes.
        #[arg(long = "T")]
        t: usize,
        /// Which Granger variant(s) to emit alongside the causal effects.
        #[arg(long, value_enum, default_value_t = GcModeArg::Both)]
        gc_mode: GcModeArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score mSSA mode pairs against the analytic effect decomposition.
    MssaCompare {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        cause: usize,
        #[arg(long)]
        effect: usize,
        #[arg(long, default_value_t = 0)]
        tau: usize,
        /// Shared window length for both processes.
        #[arg(long = "T")]
        t: usize,
        /// Number of leading mode pairs to score.
        #[arg(long)]
        modes: usize,
        /// Simulation length for the covariance estimate.
        #[arg(long)]
        samples: usize,
        /// RNG seed (defaults to 0 outside --strict mode).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit an orthogonal wavelet analysis matrix (JSON).
    Wavelet {
        /// Signal length (must be divisible by 2^levels).
        #[arg(long)]
        length: usize,
        /// Decomposition depth.
        #[arg(long)]
        levels: usize,
        /// Wavelet filter (haar or d4).
        #[arg(long, default_value = "haar")]
        filter: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-check the analytic effect matrix against independent oracles.
    Validate {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        window: WindowArgs,
        /// Monte-Carlo replicates per cause-window slot.
        #[arg(long, default_value_t = 1000)]
        replicates: usize,
        /// Intervention step size.
        #[arg(long, default_value_t = 1.0)]
        step: f64,
        /// RNG seed (defaults to 0 outside --strict mode).
        #[arg(long)]
        seed: Option<u64>,
        /// Largest acceptable |z| against the Monte-Carlo oracle.
        #[arg(long, default_value_t = 3.0)]
        z_threshold: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the data files behind the bundled figure presets.
    Figures {
        #[arg(value_enum)]
        preset: Preset,
        /// Directory receiving the preset's files.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

/// A terminal failure with its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<CofxError> for Failure {
    fn from(e: CofxError) -> Self {
        let code = match e {
            CofxError::Unstable { .. } => 3,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(f) = configure_threads() {
        eprintln!("error: {}", f.message);
        return ExitCode::from(f.code);
    }
    match run(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Applies the `COFX_THREADS` cap to the global worker pool.
fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("COFX_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| Failure::input(format!("COFX_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::input(format!("could not configure thread pool: {e}")))
}

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

fn load_model(path: &Path) -> CliResult<VarModel> {
    Ok(VarModel::from_json(&read_file(path)?)?)
}

fn load_data(path: &Path) -> CliResult<SamplePaths> {
    Ok(SamplePaths::from_csv(&read_file(path)?)?)
}

/// Writes to the output file, or stdout when no file was requested.
fn emit(out: Option<&Path>, content: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn write_preset_file(dir: &Path, name: &str, content: &str) -> CliResult<()> {
    let path = dir.join(name);
    std::fs::write(&path, content)
        .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Missing seeds default to 0, except under --strict where they are refused.
fn resolve_seed(seed: Option<u64>, strict: bool, what: &str) -> CliResult<u64> {
    match seed {
        Some(s) => Ok(s),
        None if strict => Err(Failure::input(format!(
            "--strict requires an explicit --seed for {what}"
        ))),
        None => Ok(0),
    }
}

/// Display label for curve output: the model's own name, else the file stem.
fn model_label(model: &VarModel, path: &Path) -> String {
    model.name.clone().unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "model".to_string())
    })
}

/// Concatenates curve CSVs under a single header.
fn combined_csv(curves: &[(SpectralCurve, String, String)]) -> String {
    let mut out = String::new();
    for (idx, (curve, model, mode)) in curves.iter().enumerate() {
        let csv = curve.csv(model, mode);
        if idx == 0 {
            out.push_str(&csv);
        } else {
            for line in csv.lines().skip(1) {
                out.push_str(line);
                out.push('\n');
            }
        }
    }
    out
}

/// On-disk schema for `cof --constraints`: per side, a list of bases, each a
/// list of columns.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintsDoc {
    #[serde(default)]
    impulse: Vec<Vec<Vec<f64>>>,
    #[serde(default)]
    response: Vec<Vec<Vec<f64>>>,
}

fn parse_bases(
    raw: &[Vec<Vec<f64>>],
    rows: usize,
    side: BasisSide,
) -> CliResult<Vec<ProjectionBasis>> {
    let mut bases = Vec::with_capacity(raw.len().max(1));
    for basis in raw {
        if basis.is_empty() || basis.iter().any(|c| c.len() != rows) {
            return Err(Failure::input(format!(
                "each constraint basis needs at least one column of length {rows}"
            )));
        }
        let columns: Vec<DVector<f64>> =
            basis.iter().map(|c| DVector::from_column_slice(c)).collect();
        bases.push(ProjectionBasis::new(
            DMatrix::from_columns(&columns),
            side,
        )?);
    }
    if bases.is_empty() {
        // An unconstrained side spans the whole window.
        bases.push(ProjectionBasis::new(DMatrix::identity(rows, rows), side)?);
    }
    Ok(bases)
}

fn parse_scale_pair(raw: &str) -> CliResult<(usize, usize)> {
    let parse_one = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| Failure::input(format!("invalid wavelet scale `{s}`")))
    };
    match raw.split_once(':') {
        Some((a, b)) => Ok((parse_one(a)?, parse_one(b)?)),
        None => {
            let s = parse_one(raw)?;
            Ok((s, s))
        }
    }
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    let strict = cli.strict;
    match cli.command {
        Command::Simulate {
            model,
            length,
            seed,
            out,
        } => {
            let model = load_model(&model)?;
            let seed = resolve_seed(seed, strict, "simulation")?;
            let data = model.simulate(length, seed)?;
            emit(out.as_deref(), &data.to_csv())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Fit { data, graph, out } => {
            let data = load_data(&data)?;
            let graph = GraphSpec::from_json(&read_file(&graph)?)?;
            let fitted = fit_var(&data, &graph)?;
            emit(out.as_deref(), &format!("{}\n", fitted.to_json()))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Twce { model, window, out } => {
            let model = load_model(&model)?;
            let eff = twce(&model, &window.spec()?)?;
            emit(out.as_deref(), &format!("{}\n", eff.to_json()))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Cof {
            model,
            window,
            rank,
            constraints,
            wavelet_scale,
            wavelet_levels,
            wavelet_filter,
            ssa_top,
            data,
            samples,
            seed,
            out,
        } => {
            let model = load_model(&model)?;
            let spec = window.spec()?;
            let eff = twce(&model, &spec)?;
            let content = if let Some(path) = constraints {
                let doc: ConstraintsDoc = serde_json::from_str(&read_file(&path)?)
                    .map_err(|e| Failure::input(format!("constraints schema error: {e}")))?;
                let ps = parse_bases(&doc.impulse, spec.t_cause, BasisSide::Impulse)?;
                let qs = parse_bases(&doc.response, spec.t_effect, BasisSide::Response)?;
                let cofs = if ps.len() == 1 && qs.len() == 1 {
                    constrained_cofs(&eff, &ps[0], &qs[0])?
                } else {
                    jointly_constrained_cofs(&eff, &ps, &qs)?
                };
                format!("{}\n", cofs.to_json())
            } else if let Some(raw) = wavelet_scale {
                let (s_in, s_out) = parse_scale_pair(&raw)?;
                let levels = wavelet_levels.expect("clap enforces --wavelet-levels");
                let basis = wavelet_matrix(spec.t_cause, levels, &wavelet_filter)?;
                let (omega, cofs) = scale_effects(&eff, &basis, s_in, s_out)?;
                scale_doc(s_in, s_out, &omega, &cofs)?
            } else if let Some(count) = ssa_top {
                let data = match (&data, samples) {
                    (Some(path), _) => load_data(path)?,
                    (None, Some(n)) => {
                        let seed = resolve_seed(seed, strict, "SSA basis simulation")?;
                        model.simulate(n, seed)?
                    }
                    (None, None) => {
                        return Err(Failure::input(
                            "--ssa-top needs --data or --samples for its basis",
                        ))
                    }
                };
                let p = ssa_basis(&data, spec.cause, spec.t_cause, count, BasisSide::Impulse)?;
                let q = ssa_basis(&data, spec.effect, spec.t_effect, count, BasisSide::Response)?;
                let cofs = ssa_restricted_cofs(&eff, &p, &q)?;
                format!("{}\n", cofs.to_json())
            } else {
                format!("{}\n", compute_cofs(&eff, rank)?.to_json())
            };
            emit(out.as_deref(), &content)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Freq {
            model,
            cause,
            effect,
            t,
            gc_mode,
            out,
        } => {
            let model_doc = load_model(&model)?;
            let label = model_label(&model_doc, &model);
            let curves = freq_curves(&model_doc, &label, cause, effect, t, gc_mode)?;
            emit(out.as_deref(), &combined_csv(&curves))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::MssaCompare {
            model,
            cause,
            effect,
            tau,
            t,
            modes,
            samples,
            seed,
            format,
            out,
        } => {
            let model = load_model(&model)?;
            let spec = WindowSpec::new(cause, effect, tau, t, t)?;
            let seed = resolve_seed(seed, strict, "the covariance simulation")?;
            let report = mssa_cof_report(&model, &spec, modes, samples, seed)?;
            let content = match format {
                OutputFormat::Json => format!("{}\n", report.to_json()),
                OutputFormat::Csv => report.to_csv(),
            };
            emit(out.as_deref(), &content)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Wavelet {
            length,
            levels,
            filter,
            out,
        } => {
            let basis = wavelet_matrix(length, levels, &filter)?;
            emit(out.as_deref(), &format!("{}\n", basis.to_json()))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate {
            model,
            window,
            replicates,
            step,
            seed,
            z_threshold,
            out,
        } => {
            let model = load_model(&model)?;
            let seed = resolve_seed(seed, strict, "the Monte-Carlo oracle")?;
            let opts = ValidationOptions {
                step,
                replicates,
                seed,
                z_threshold,
                ..ValidationOptions::default()
            };
            let report = validate_effect_matrix(&model, &window.spec()?, &opts)?;
            let text = serde_json::to_string_pretty(&report)
                .expect("report serialization cannot fail");
            emit(out.as_deref(), &format!("{text}\n"))?;
            if report.passed {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(4))
            }
        }
        Command::Figures { preset, out_dir } => {
            run_preset(preset, &out_dir)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// JSON document for a scale-restricted decomposition: the cross-scale block
/// matrix plus the mapped-back signal pairs.
fn scale_doc(
    s_in: usize,
    s_out: usize,
    omega: &DMatrix<f64>,
    cofs: &CofSet,
) -> CliResult<String> {
    let omega_rows: Vec<Vec<f64>> = (0..omega.nrows())
        .map(|r| omega.row(r).iter().copied().collect())
        .collect();
    let cof_value: serde_json::Value = serde_json::from_str(&cofs.to_json())
        .expect("round trip of freshly serialized pairs cannot fail");
    let doc = serde_json::json!({
        "scale_in": s_in,
        "scale_out": s_out,
        "omega": omega_rows,
        "cofs": cof_value,
    });
    Ok(format!(
        "{}\n",
        serde_json::to_string_pretty(&doc).expect("document serialization cannot fail")
    ))
}

/// Builds the curve set for `freq`: causal effects first, then the requested
/// Granger variant(s) on the same frequency grid.
fn freq_curves(
    model: &VarModel,
    label: &str,
    cause: usize,
    effect: usize,
    t: usize,
    gc_mode: GcModeArg,
) -> CliResult<Vec<(SpectralCurve, String, String)>> {
    let spec = WindowSpec::new(cause, effect, 0, t, t)?;
    let eff = twce(model, &spec)?;
    let grid = fourier_grid(t);
    let mut curves = vec![(
        frequency_causal_effects(&eff)?,
        label.to_string(),
        "-".to_string(),
    )];
    let mut push_gc = |mode: GrangerMode| -> CliResult<()> {
        curves.push((
            frequency_granger(model, cause, effect, &grid, mode)?,
            label.to_string(),
            mode.as_str().to_string(),
        ));
        Ok(())
    };
    match gc_mode {
        GcModeArg::Standard => push_gc(GrangerMode::Standard)?,
        GcModeArg::CauseNormalized => push_gc(GrangerMode::CauseNormalized)?,
        GcModeArg::Both => {
            push_gc(GrangerMode::Standard)?;
            push_gc(GrangerMode::CauseNormalized)?;
        }
    }
    Ok(curves)
}

/// Parameters of the `figB` preset (also exercised by the automated suite).
const FIG_B_SAMPLES: usize = 100_000;
const FIG_B_SEED: u64 = 2026;

fn run_preset(preset: Preset, out_dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| Failure::input(format!("cannot create {}: {e}", out_dir.display())))?;
    match preset {
        Preset::FigA => {
            let model = models::process_a();
            let spec = WindowSpec::new(1, 3, 0, 100, 100)?;
            let eff = twce(&model, &spec)?;
            let cofs = compute_cofs(&eff, None)?;
            write_preset_file(out_dir, "figA_twce.json", &format!("{}\n", eff.to_json()))?;
            write_preset_file(out_dir, "figA_cofs.json", &format!("{}\n", cofs.to_json()))?;
        }
        Preset::FigB => {
            let model = models::process_b();
            let spec = WindowSpec::new(1, 3, 0, 100, 100)?;
            let report = mssa_cof_report(&model, &spec, 3, FIG_B_SAMPLES, FIG_B_SEED)?;
            write_preset_file(out_dir, "figB_mssa.json", &format!("{}\n", report.to_json()))?;
            write_preset_file(out_dir, "figB_mssa.csv", &report.to_csv())?;
        }
        Preset::Fig6 => {
            let mut curves = Vec::new();
            for model in [
                models::a1(),
                models::a2(),
                models::b1(),
                models::b2(),
                models::c1(),
                models::c2(),
            ] {
                let label = model.name.clone().expect("bundled models are named");
                let mut set = freq_curves(&model, &label, 1, 2, 200, GcModeArg::Standard)?;
                curves.append(&mut set);
            }
            write_preset_file(out_dir, "fig6_curves.csv", &combined_csv(&curves))?;
        }
    }
    Ok(())
}

mod svg;
mod table;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use opa_nms::config::ParamsConfig;
use opa_nms::params::{derive_constants, DerivedConstants, PhysicalConstants, SystemParams};
use opa_nms::presets::{preset, Figure};
use opa_nms::spectra::NoiseMode;
use opa_nms::sweep::{
    linspace, run_sweep, stability_boundary, GridSpec, SweepAxis, SweepOutput, SweepRecord, SweepSpec,
};
use opa_nms::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    /// The physics refuses the request (unstable point, invalid estimate).
    #[error("{0}")]
    Physics(String),
}

impl CliError {
    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Physics(_) => 2,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. }
            | Error::Config { .. }
            | Error::InvalidGrid(_)
            | Error::InvalidSweep(_)
            | Error::NoBoundary { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Physics(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "opa-nms", version, about = "Normal-mode splitting in an optomechanical cavity with a parametric amplifier")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// JSON parameter file; the reference experiment when omitted
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Frequency grid points
    #[arg(long, global = true, default_value_t = 4001)]
    grid_points: usize,
    /// Frequency grid lower edge, units of omega_m
    #[arg(long, global = true, default_value_t = 0.2)]
    grid_lo: f64,
    /// Frequency grid upper edge, units of omega_m
    #[arg(long, global = true, default_value_t = 1.8)]
    grid_hi: f64,
    /// Thermal noise model (exact|hight); chosen from k_B T / hbar omega_m when omitted
    #[arg(long, global = true)]
    noise: Option<NoiseMode>,
    /// Worker threads for sweeps
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze one parameter set
    Point {
        /// Comma-separated outputs: roots, eigenvalues, stability, splitting_estimate, photon_number, SQ, Scout, Sxout, Syout
        #[arg(long, value_delimiter = ',', default_value = "roots,stability,splitting_estimate")]
        outputs: Vec<SweepOutput>,
    },
    /// Sweep one parameter
    Sweep {
        /// gain (G/kappa), power (mW), detuning (Delta/omega_m) or bare_detuning (Delta0/omega_m)
        #[arg(long)]
        axis: SweepAxis,
        /// `lo:hi:step` or a comma-separated list
        #[arg(long)]
        values: String,
        #[arg(long, value_delimiter = ',', default_value = "roots,stability")]
        outputs: Vec<SweepOutput>,
    },
    /// Locate the stability boundary along one axis by bisection
    Boundary {
        #[arg(long)]
        axis: SweepAxis,
        #[arg(long, allow_negative_numbers = true)]
        lo: f64,
        #[arg(long, allow_negative_numbers = true)]
        hi: f64,
    },
    /// Draw SVG line charts from a CSV written by this tool
    Plot {
        /// Input CSV
        csv: PathBuf,
        #[arg(long)]
        x: String,
        /// One chart per y column
        #[arg(long, value_delimiter = ',', required = true)]
        y: Vec<String>,
        /// Columns whose values split the rows into curves
        #[arg(long, value_delimiter = ',')]
        group: Option<Vec<String>>,
    },
    /// Reproduce a published figure (fig2..fig9)
    Preset { figure: Figure },
}

struct Ctx {
    params: SystemParams,
    grid: GridSpec,
    noise: Option<NoiseMode>,
    workers: usize,
    out: PathBuf,
    files: Vec<PathBuf>,
}

impl Ctx {
    fn new(g: &Global) -> Result<Self, CliError> {
        let params = match &g.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                ParamsConfig::from_json(&text)?.to_params()?
            }
            None => SystemParams::reference(),
        };
        let grid = GridSpec {
            lo_over_omega_m: g.grid_lo,
            hi_over_omega_m: g.grid_hi,
            points: g.grid_points,
        };
        grid.build(params.omega_m)?;
        let workers = g
            .workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        if workers == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        Ok(Self {
            params,
            grid,
            noise: g.noise,
            workers,
            out: g.out.clone(),
            files: Vec::new(),
        })
    }

    fn ensure_out(&self) -> Result<(), CliError> {
        fs::create_dir_all(&self.out).map_err(|e| CliError::io(&self.out, e))
    }

    fn csv(&mut self, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
        let path = self.out.join(name);
        table::write_csv(&path, header, rows)?;
        self.files.push(path);
        Ok(())
    }

    fn text(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let path = self.out.join(name);
        fs::write(&path, body).map_err(|e| CliError::io(&path, e))?;
        self.files.push(path);
        Ok(())
    }

    fn manifest(&self, name: &str, runs: Vec<RunInfo>) -> Result<(), CliError> {
        let mut files = Vec::new();
        for path in &self.files {
            let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
            files.push(FileEntry {
                name: path.file_name().unwrap().to_string_lossy().into_owned(),
                bytes: bytes.len(),
                sha256: hex::encode(Sha256::digest(&bytes)),
            });
        }
        let m = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            command: std::env::args().skip(1).collect(),
            runs,
            files,
        };
        let path = self.out.join(name);
        let body = serde_json::to_string_pretty(&m).expect("manifest serializes");
        fs::write(&path, body + "\n").map_err(|e| CliError::io(&path, e))
    }
}

#[derive(Serialize)]
struct FileEntry {
    name: String,
    bytes: usize,
    sha256: String,
}

#[derive(Serialize)]
struct RunInfo {
    label: String,
    config: ParamsConfig,
    params: SystemParams,
    derived: Option<DerivedConstants>,
    sweep: Option<SweepSpec>,
}

impl RunInfo {
    fn new(label: &str, params: &SystemParams, sweep: Option<SweepSpec>) -> Self {
        Self {
            label: label.into(),
            config: ParamsConfig::from_params(params),
            params: *params,
            derived: derive_constants(params, &PhysicalConstants::CODATA).ok(),
            sweep,
        }
    }
}

#[derive(Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    timestamp_unix: u64,
    command: Vec<String>,
    runs: Vec<RunInfo>,
    files: Vec<FileEntry>,
}

fn parse_values(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = |what: &str| CliError::Usage(format!("--values `{s}`: {what}"));
    let nums = |parts: Vec<&str>| -> Result<Vec<f64>, CliError> {
        parts
            .iter()
            .map(|t| t.trim().parse::<f64>().map_err(|_| bad("not a number")))
            .collect()
    };
    if s.contains(':') {
        let v = nums(s.split(':').collect())?;
        let [lo, hi, step] = v[..] else { return Err(bad("expected lo:hi:step")) };
        if !(step > 0.0 && hi > lo) {
            return Err(bad("need hi > lo and step > 0"));
        }
        let n = ((hi - lo) / step).round() as usize + 1;
        Ok(linspace(lo, hi, n))
    } else {
        nums(s.split(',').collect())
    }
}

fn spectra_refusals(records: &[SweepRecord]) -> Vec<String> {
    records
        .iter()
        .filter_map(|r| {
            let a = r.result.as_ref().ok()?;
            a.spectra_error
                .as_ref()
                .map(|e| format!("branch {} (Delta = {:e} rad/s): {e}", a.steady.branch_index, a.steady.delta))
        })
        .collect()
}

fn run_point(ctx: &mut Ctx, outputs: Vec<SweepOutput>) -> Result<(), CliError> {
    ctx.ensure_out()?;
    let spec = SweepSpec {
        axis: SweepAxis::ParametricGain,
        values: vec![ctx.params.parametric_gain / ctx.params.kappa],
        outputs: outputs.clone(),
        grid: ctx.grid,
        noise: ctx.noise,
    };
    let records = run_sweep(&ctx.params, &PhysicalConstants::CODATA, &spec, 1)?;
    if let Some(Err(e)) = records.first().map(|r| &r.result) {
        return Err(e.clone().into());
    }
    let analyses: Vec<_> = records.iter().filter_map(|r| r.result.as_ref().ok()).collect();
    ctx.text("point.json", &(serde_json::to_string_pretty(&analyses).expect("serializes") + "\n"))?;
    ctx.csv("point_summary.csv", &table::summary_header(), &table::summary_rows("point", None, &records))?;
    if !spec.spectrum_kinds().is_empty() {
        ctx.csv("point_spectra.csv", &table::spectra_header(), &table::spectra_rows("point", None, &records))?;
    }
    let params = ctx.params;
    ctx.manifest("manifest.json", vec![RunInfo::new("point", &params, None)])?;

    for a in &analyses {
        println!(
            "branch {}: Delta/omega_m = {:.6}, |c_s|^2 = {:.4e}, stable = {}",
            a.steady.branch_index,
            a.steady.delta / params.omega_m,
            a.steady.photon_number,
            a.stability.stable
        );
        for s in &a.spectra {
            let pos: Vec<String> = s.peaks.iter().map(|p| format!("{:.4}", p.position / params.omega_m)).collect();
            println!("  {}: {} peak(s) at omega/omega_m = [{}]", s.kind, s.peaks.len(), pos.join(", "));
        }
    }

    let refusals = spectra_refusals(&records);
    if !refusals.is_empty() {
        return Err(CliError::Physics(format!("spectra refused: {}", refusals.join("; "))));
    }
    if outputs.contains(&SweepOutput::SplittingEstimate) {
        if let Some(reason) = analyses.iter().find_map(|a| a.modes.estimate_invalid_reason.clone()) {
            return Err(CliError::Physics(format!("splitting estimate invalid: {reason}")));
        }
    }
    Ok(())
}

fn run_sweep_cmd(ctx: &mut Ctx, axis: SweepAxis, values: &str, outputs: Vec<SweepOutput>) -> Result<(), CliError> {
    let spec = SweepSpec {
        axis,
        values: parse_values(values)?,
        outputs,
        grid: ctx.grid,
        noise: ctx.noise,
    };
    spec.validate()?;
    ctx.ensure_out()?;
    let records = run_sweep(&ctx.params, &PhysicalConstants::CODATA, &spec, ctx.workers)?;
    ctx.csv("sweep_summary.csv", &table::summary_header(), &table::summary_rows("sweep", Some(axis), &records))?;
    if !spec.spectrum_kinds().is_empty() {
        ctx.csv("sweep_spectra.csv", &table::spectra_header(), &table::spectra_rows("sweep", Some(axis), &records))?;
    }
    let failed = records.iter().filter(|r| r.result.is_err()).count();
    let params = ctx.params;
    ctx.manifest("manifest.json", vec![RunInfo::new("sweep", &params, Some(spec))])?;
    println!("{} rows written to {}, {failed} failed point(s)", records.len(), ctx.out.display());
    Ok(())
}

fn run_boundary(ctx: &mut Ctx, axis: SweepAxis, lo: f64, hi: f64) -> Result<(), CliError> {
    let report = stability_boundary(&ctx.params, &PhysicalConstants::CODATA, axis, lo, hi)?;
    ctx.ensure_out()?;
    let body = serde_json::to_string_pretty(&report).expect("serializes") + "\n";
    ctx.text("boundary.json", &body)?;
    let params = ctx.params;
    ctx.manifest("manifest.json", vec![RunInfo::new("boundary", &params, None)])?;
    println!(
        "critical {} = {:.6} (bracket [{:.6}, {:.6}]), failing Routh-Hurwitz condition(s) {:?}",
        axis.label(),
        report.critical_value,
        report.bracket[0],
        report.bracket[1],
        report.failing_conditions
    );
    Ok(())
}

fn axis_title(col: &str) -> String {
    match col {
        "g_over_kappa" => "G/kappa".into(),
        "omega_over_omega_m" => "omega/omega_m".into(),
        "power_mw" => "P (mW)".into(),
        "delta_over_omega_m" => "Delta/omega_m".into(),
        "value_scaled" => "S x gamma_m (S_Q) or S".into(),
        other => other.replace("_over_", "/"),
    }
}

fn pretty(cell: &str) -> String {
    cell.parse::<f64>().map_or_else(|_| cell.to_string(), |v| v.to_string())
}

/// Charts `ys` against `x` from `csv_path`, one file per y column, written next to `out`.
fn plot_csv(
    csv_path: &Path,
    x: &str,
    ys: &[String],
    group: Option<&[String]>,
    out_dir: &Path,
    stem: &str,
) -> Result<Vec<PathBuf>, CliError> {
    let mut rdr = csv::Reader::from_path(csv_path).map_err(|e| CliError::Usage(format!("{}: {e}", csv_path.display())))?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::Usage(format!("{}: {e}", csv_path.display())))?
        .iter()
        .map(String::from)
        .collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Usage(format!("unknown column `{name}` in {}", csv_path.display())))
    };
    let xi = col(x)?;
    let yis: Vec<usize> = ys.iter().map(|y| col(y)).collect::<Result<_, _>>()?;
    let default_group: Vec<String> = if header.iter().any(|h| h == "kind") {
        vec!["series".into(), "axis_value".into(), "branch".into()]
    } else {
        vec!["series".into(), "branch".into()]
    };
    let group_cols: Vec<usize> = match group {
        Some(g) => g.iter().map(|c| col(c)).collect::<Result<_, _>>()?,
        None => default_group.iter().filter_map(|c| header.iter().position(|h| h == c)).collect(),
    };

    let mut rows = Vec::new();
    for rec in rdr.records() {
        rows.push(rec.map_err(|e| CliError::Usage(format!("{}: {e}", csv_path.display())))?);
    }
    if rows.is_empty() {
        return Err(CliError::Usage(format!("{}: no data rows", csv_path.display())));
    }
    // Only group columns that actually vary contribute to legend labels.
    let varying: Vec<usize> = group_cols
        .iter()
        .copied()
        .filter(|&c| rows.iter().map(|r| &r[c]).collect::<BTreeSet<_>>().len() > 1)
        .collect();

    let mut written = Vec::new();
    for (y, &yi) in ys.iter().zip(&yis) {
        let mut series: Vec<svg::Series> = Vec::new();
        let mut keys: Vec<Vec<String>> = Vec::new();
        for r in &rows {
            let (Ok(xv), Ok(yv)) = (r[xi].parse::<f64>(), r[yi].parse::<f64>()) else { continue };
            if !(xv.is_finite() && yv.is_finite()) {
                continue;
            }
            let key: Vec<String> = group_cols.iter().map(|&c| r[c].to_string()).collect();
            let idx = match keys.iter().position(|k| *k == key) {
                Some(i) => i,
                None => {
                    keys.push(key);
                    let label = varying
                        .iter()
                        .map(|&c| format!("{}={}", header[c], pretty(&r[c])))
                        .collect::<Vec<_>>()
                        .join(", ");
                    series.push(svg::Series {
                        label: if label.is_empty() { y.clone() } else { label },
                        points: Vec::new(),
                    });
                    series.len() - 1
                }
            };
            series[idx].points.push((xv, yv));
        }
        let body = svg::render(&format!("{stem}: {y}"), &axis_title(x), &axis_title(y), &series);
        let path = out_dir.join(format!("{stem}_{x}_vs_{y}.svg"));
        fs::write(&path, body).map_err(|e| CliError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

fn run_preset(ctx: &mut Ctx, figure: Figure) -> Result<(), CliError> {
    ctx.ensure_out()?;
    let pr = preset(figure, ctx.grid);
    let mut summary = Vec::new();
    let mut spectra_rows = Vec::new();
    let mut runs = Vec::new();
    for run in &pr.runs {
        let mut spec = run.spec.clone();
        spec.noise = ctx.noise;
        let records = run_sweep(&run.base, &PhysicalConstants::CODATA, &spec, ctx.workers)?;
        summary.extend(table::summary_rows(&run.label, Some(spec.axis), &records));
        spectra_rows.extend(table::spectra_rows(&run.label, Some(spec.axis), &records));
        runs.push(RunInfo::new(&run.label, &run.base, Some(spec)));
    }
    let name = figure.name();
    let summary_name = format!("{name}_summary.csv");
    let spectra_name = format!("{name}_spectra.csv");
    ctx.csv(&summary_name, &table::summary_header(), &summary)?;
    if !spectra_rows.is_empty() {
        ctx.csv(&spectra_name, &table::spectra_header(), &spectra_rows)?;
    }
    for (x, y) in &pr.plots {
        let source = if *x == "omega_over_omega_m" { &spectra_name } else { &summary_name };
        let paths = plot_csv(&ctx.out.join(source), x, &[y.to_string()], None, &ctx.out, name)?;
        ctx.files.extend(paths);
    }
    ctx.manifest(&format!("{name}_manifest.json"), runs)?;
    println!("{name}: {}; files in {}", pr.description, ctx.out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Command::Plot { csv, x, y, group } = &cli.command {
        let out = &cli.global.out;
        fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
        let stem = csv.file_stem().map_or("plot".into(), |s| s.to_string_lossy().into_owned());
        for p in plot_csv(csv, x, y, group.as_deref(), out, &stem)? {
            println!("{}", p.display());
        }
        return Ok(());
    }
    let mut ctx = Ctx::new(&cli.global)?;
    for d in opa_nms::params::validate_params(&ctx.params) {
        eprintln!("warning: {d}");
    }
    match cli.command {
        Command::Point { outputs } => run_point(&mut ctx, outputs),
        Command::Sweep { axis, values, outputs } => run_sweep_cmd(&mut ctx, axis, &values, outputs),
        Command::Boundary { axis, lo, hi } => run_boundary(&mut ctx, axis, lo, hi),
        Command::Preset { figure } => run_preset(&mut ctx, figure),
        Command::Plot { .. } => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

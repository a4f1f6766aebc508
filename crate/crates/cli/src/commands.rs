use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hetspec_core::oracle::{run_oracle, OracleConfig};
use hetspec_core::{
    optimal_phases, total_spectrum, Analysis, DemodStage, OptimalPhases, SpectrumResult,
    SpectrumUnit, SqueezerSpec,
};
use serde::Serialize;

use crate::config::{SchemeFile, Setup};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "hetspec", version, about = "Quantum-noise spectra of multi-component heterodyne readouts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the frequency matrix and its coincidence groups.
    Matrix(CommonArgs),
    /// Evaluate the noise spectrum on the detection band.
    Compute(ComputeArgs),
    /// Cross-check the spectrum against a Monte Carlo simulation.
    Oracle(OracleArgs),
    /// Optimal demodulation and squeeze phases for a two-member coincidence.
    Optimize(CommonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Scheme file (JSON, or TOML by extension).
    #[arg(long)]
    pub config: PathBuf,
    /// Write here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Phases in the scheme file are in degrees.
    #[arg(long)]
    pub degrees: bool,
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Add one column per coincidence group and unique entry.
    #[arg(long)]
    pub breakdown: bool,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Length of each trial record in seconds.
    #[arg(long)]
    pub duration: Option<f64>,
    #[arg(long)]
    pub sample_rate: Option<f64>,
    #[arg(long)]
    pub segment_len: Option<usize>,
    /// Maximum band-averaged relative error.
    #[arg(long, default_value_t = 0.05)]
    pub tol: f64,
}

fn load(common: &CommonArgs) -> Result<Setup, CliError> {
    let file = SchemeFile::load(&common.config)?;
    let file = if common.degrees { file.degrees_to_radians() } else { file };
    file.setup()
}

fn emit(common: &CommonArgs, text: &str) -> Result<(), CliError> {
    match &common.output {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Matrix(a) => emit(a, &matrix(&load(a)?, a.format.unwrap_or(Format::Text))?),
        Command::Compute(a) => {
            let format = a.common.format.unwrap_or(Format::Csv);
            emit(&a.common, &compute(&load(&a.common)?, format, a.breakdown)?)
        }
        Command::Oracle(a) => oracle(a),
        Command::Optimize(a) => emit(a, &optimize(&load(a)?, a.format.unwrap_or(Format::Text))?),
    }
}

#[derive(Serialize)]
struct MatrixReport<'a> {
    n_components: usize,
    n_demods: usize,
    /// Position of each row in the scheme file.
    input_index: Vec<usize>,
    rows: Vec<&'a [f64]>,
    groups: &'a [hetspec_core::CoincidenceGroup],
    uniques: &'a [hetspec_core::Cell],
}

pub fn matrix(setup: &Setup, format: Format) -> Result<String, CliError> {
    let a = Analysis::new(&setup.scheme, &setup.demods, &setup.squeezers)?;
    let m = &a.matrix;
    let input_index: Vec<usize> = (0..m.n_components()).map(|n| setup.scheme.original_index(n)).collect();
    let mut out = String::new();
    match format {
        Format::Json => {
            out = json(&MatrixReport {
                n_components: m.n_components(),
                n_demods: m.n_demods(),
                input_index,
                rows: m.rows().collect(),
                groups: &a.grouping.groups,
                uniques: &a.grouping.uniques,
            })
        }
        Format::Csv => {
            out.push_str("n,input_index");
            for d in 0..m.n_columns() {
                let _ = write!(out, ",d{d}");
            }
            out.push('\n');
            for (n, row) in m.rows().enumerate() {
                let _ = write!(out, "{n},{}", input_index[n]);
                for v in row {
                    let _ = write!(out, ",{v}");
                }
                out.push('\n');
            }
        }
        Format::Text => {
            let mut table = vec![std::iter::once("n".to_string())
                .chain(std::iter::once("input".into()))
                .chain((0..m.n_columns()).map(|d| format!("d={d}")))
                .collect::<Vec<_>>()];
            for (n, row) in m.rows().enumerate() {
                table.push(
                    [n.to_string(), input_index[n].to_string()]
                        .into_iter()
                        .chain(row.iter().map(|v| v.to_string()))
                        .collect(),
                );
            }
            let widths: Vec<usize> = (0..table[0].len())
                .map(|j| table.iter().map(|r| r[j].len()).max().unwrap_or(0))
                .collect();
            let _ = writeln!(
                out,
                "frequency matrix [Hz]: {} components x {} columns",
                m.n_components(),
                m.n_columns()
            );
            for row in &table {
                let cells: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
                let _ = writeln!(out, "{}", cells.join("  ").trim_end());
            }
            let _ = writeln!(out, "coincidence groups: {}", a.grouping.groups.len());
            for (i, g) in a.grouping.groups.iter().enumerate() {
                let members: Vec<String> = g.members.iter().map(|(n, d)| format!("({n},{d})")).collect();
                let _ = writeln!(out, "  g{i} {} Hz: {}", g.freq_hz, members.join(" "));
            }
            let _ = writeln!(out, "unique entries: {}", a.grouping.uniques.len());
        }
    }
    Ok(out)
}

pub fn spectrum(setup: &Setup, breakdown: bool) -> Result<SpectrumResult, CliError> {
    Ok(total_spectrum(&setup.scheme, &setup.demods, &setup.squeezers, &setup.grid, breakdown)?)
}

pub fn compute(setup: &Setup, format: Format, breakdown: bool) -> Result<String, CliError> {
    let res = spectrum(setup, breakdown)?;
    Ok(match format {
        Format::Json => json(&res),
        Format::Csv | Format::Text => to_csv(&res),
    })
}

/// `freq_hz,psd[,<contribution>...]`; values use the shortest representation
/// that round-trips.
pub fn to_csv(res: &SpectrumResult) -> String {
    let terms = res.breakdown.as_deref().unwrap_or(&[]);
    let mut out = String::from("freq_hz,psd");
    for t in terms {
        out.push(',');
        out.push_str(&t.label);
    }
    out.push('\n');
    for (i, (f, v)) in res.freqs_hz.iter().zip(&res.values).enumerate() {
        let _ = write!(out, "{f},{v:e}");
        for t in terms {
            let _ = write!(out, ",{:e}", t.values[i]);
        }
        out.push('\n');
    }
    out
}

fn oracle(a: &OracleArgs) -> Result<(), CliError> {
    let setup = load(&a.common)?;
    if !(a.tol >= 0.0) {
        return Err(CliError::Config("--tol must be nonnegative".into()));
    }
    let mut cfg = OracleConfig::for_setup(&setup.scheme, &setup.demods)?;
    cfg.seed = a.seed;
    if let Some(fs) = a.sample_rate {
        // keep the record length in samples unless a duration is given
        cfg.duration_s *= cfg.sample_rate_hz / fs;
        cfg.sample_rate_hz = fs;
    }
    if let Some(n) = a.trials {
        cfg.n_trials = n;
    }
    if let Some(t) = a.duration {
        cfg.duration_s = t;
    }
    if let Some(l) = a.segment_len {
        cfg.segment_len = l;
    }
    let report = run_oracle(&setup.scheme, &setup.demods, &setup.squeezers, &cfg, a.tol)?;
    emit(&a.common, &json(&report))?;
    if report.comparison.pass {
        Ok(())
    } else {
        Err(CliError::OracleFail {
            band_rel_err: report.comparison.band_rel_err,
            tolerance: a.tol,
        })
    }
}

#[derive(Debug, Serialize)]
pub struct OptimizeReport {
    pub demod_phase_rad: f64,
    pub squeeze_phase_rad: f64,
    pub alpha_rad: f64,
    pub delta_alpha_rad: f64,
    /// Band-averaged total spectrum at the optimal phases.
    pub minimized_total: f64,
    pub unit: SpectrumUnit,
}

pub fn optimal(setup: &Setup) -> Result<OptimizeReport, CliError> {
    if setup.demods.len() != 1 {
        return Err(CliError::Shape(format!(
            "exactly one demodulation required, found {}",
            setup.demods.len()
        )));
    }
    if setup.squeezers.len() != 1 {
        return Err(CliError::Shape(format!(
            "exactly one squeezer required, found {}",
            setup.squeezers.len()
        )));
    }
    let a = Analysis::new(&setup.scheme, &setup.demods, &setup.squeezers)?;
    let groups = &a.grouping.groups;
    if groups.len() != 1 || groups[0].members.len() != 2 {
        return Err(CliError::Shape(
            "exactly one coincidence group with two members required".into(),
        ));
    }
    if a.group_transfers[0].is_none() {
        return Err(CliError::Shape("the squeezer is not attached to the coincidence group".into()));
    }
    let members = &groups[0].members;
    let column = |d: usize| members.iter().find(|c| c.1 == d).map(|c| setup.scheme.components()[c.0].amplitude);
    let (Some(c1), Some(c2)) = (column(1), column(0)) else {
        return Err(CliError::Shape("group members must come from opposite demodulation images".into()));
    };
    let OptimalPhases {
        squeeze_phase,
        demod_phase,
        alpha,
        delta_alpha,
    } = optimal_phases(c1, c2).map_err(|e| CliError::Shape(e.to_string()))?;

    let demods = [DemodStage::new(setup.demods[0].freq_hz, demod_phase)];
    let sq = setup.squeezers[0];
    let squeezers = [SqueezerSpec::new(sq.ref_offset_hz, sq.r, squeeze_phase)];
    let res = total_spectrum(&setup.scheme, &demods, &squeezers, &setup.grid, false)?;
    Ok(OptimizeReport {
        demod_phase_rad: demod_phase,
        squeeze_phase_rad: squeeze_phase,
        alpha_rad: alpha,
        delta_alpha_rad: delta_alpha,
        minimized_total: res.mean(),
        unit: res.unit,
    })
}

pub fn optimize(setup: &Setup, format: Format) -> Result<String, CliError> {
    let r = optimal(setup)?;
    Ok(match format {
        Format::Json => json(&r),
        Format::Text | Format::Csv => {
            let unit = match r.unit {
                SpectrumUnit::Si => "W^2/Hz",
                SpectrumUnit::Normalized => "h*f0",
            };
            format!(
                "demod_phase_rad    {}\nsqueeze_phase_rad  {}\nalpha_rad          {}\ndelta_alpha_rad    {}\nminimized_total    {:e} {unit}\n",
                r.demod_phase_rad, r.squeeze_phase_rad, r.alpha_rad, r.delta_alpha_rad, r.minimized_total
            )
        }
    })
}

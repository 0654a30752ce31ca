//! The `m4idx` command line.
//!
//! Exit status: 0 on success, 2 for usage errors, 3 for unreadable or invalid
//! data and specs, 4 when a subset enumeration would exceed its cap, 1 for
//! internal errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimate::{estimate_indices, monte_carlo_study, rank_transform};
use crate::lattice::{neighbors, LatticePoint, Region};
use crate::model::M4Spec;
use crate::report::{
    exact_report, to_json_pretty, EstimateReport, OracleEstimates, Provenance, StationReport, StudyReport,
};
use crate::simulate::{
    read_sample_csv, simulate_m4, write_sample_csv, SampleLayout, ThresholdOracle, DEFAULT_ORACLE_THRESHOLD,
};
use crate::stations::{ingest_stations, station_indices, IngestOptions, MissingCell, MissingPolicy, Station};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_CAPACITY: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "m4idx",
    version,
    about = "Contagion and stability indices for M4 random fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a spec file: nonnegative weights summing to one at every site.
    Validate {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Closed-form indices, in rational arithmetic when the spec is exact.
    Exact {
        #[command(flatten)]
        target: Target,
        /// Also report the contagion index from this source region to the
        /// region, `x,y;x,y;...`.
        #[arg(long)]
        source: Option<Region>,
        /// Evaluate in floating point even for a rational spec.
        #[arg(long)]
        float: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate replicates of the field and write them as CSV.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        /// Sites to simulate, `x,y;x,y;...`; defaults to the whole domain.
        #[arg(long)]
        locations: Option<String>,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Layout::Long)]
        layout: Layout,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank-based estimates from a simulated sample CSV.
    Estimate {
        #[arg(long)]
        sample: PathBuf,
        #[arg(long)]
        site: LatticePoint,
        /// `neighbors` or `x,y;x,y;...`.
        #[arg(long)]
        region: String,
        /// Threshold `u` for the empirical conditional means.
        #[arg(long, default_value_t = DEFAULT_ORACLE_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo study of the estimators: true value, mean estimate, MSE.
    McStudy {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        reps: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Read and validate station data; print a summary.
    Ingest {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimated indices from a conditioning station to station regions.
    Report {
        #[command(flatten)]
        data: DataArgs,
        /// Conditioning station name.
        #[arg(long)]
        station: String,
        /// Region as `Name;Name;...`; repeat for several rows.
        #[arg(long, required = true)]
        region: Vec<String>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct Target {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    site: LatticePoint,
    /// `neighbors` or `x,y;x,y;...`.
    #[arg(long)]
    region: String,
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Station CSV: `year,<station>,...`.
    #[arg(long)]
    data: PathBuf,
    /// Optional `station,x,y` coordinates.
    #[arg(long)]
    metadata: Option<PathBuf>,
    #[arg(long, default_value_t = MissingPolicy::Error)]
    missing: MissingPolicy,
}

impl DataArgs {
    fn options(&self) -> IngestOptions {
        IngestOptions {
            missing: self.missing,
            metadata: self.metadata.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Layout {
    Long,
    Wide,
}

fn parse_region(text: &str, site: LatticePoint) -> Result<Region> {
    if text == "neighbors" {
        Ok(neighbors(site))
    } else {
        text.parse()
    }
}

fn emit(out: Option<&Path>, stdout: &mut dyn Write, body: &[u8]) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, body)?,
        None => stdout.write_all(body)?,
    }
    Ok(())
}

#[derive(Serialize)]
struct ValidateOutput {
    provenance: Provenance,
    valid: bool,
    report: crate::model::ValidationReport,
}

#[derive(Serialize)]
struct SimulateSummary {
    provenance: Provenance,
    out: String,
    n: usize,
    sites: usize,
    layout: SampleLayout,
}

#[derive(Serialize)]
struct IngestSummary {
    provenance: Provenance,
    n: usize,
    missing_policy: MissingPolicy,
    stations: Vec<Station>,
    years: Vec<i64>,
    missing: Vec<MissingCell>,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Argument(_) => EXIT_USAGE,
        Error::Capacity { .. } => EXIT_CAPACITY,
        Error::Internal(_) => EXIT_FAILURE,
        _ => EXIT_DATA,
    }
}

fn execute(command: Command, stdout: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Validate { spec } => {
            let spec = M4Spec::load(&spec)?;
            let report = spec.validate();
            let valid = report.is_valid();
            let body = to_json_pretty(&ValidateOutput {
                provenance: Provenance::new(None, Some(spec.fingerprint())),
                valid,
                report,
            })?;
            emit(None, stdout, body.as_bytes())?;
            Ok(if valid { EXIT_OK } else { EXIT_DATA })
        }
        Command::Exact {
            target,
            source,
            float,
            out,
        } => {
            let spec = M4Spec::load(&target.spec)?;
            let region = parse_region(&target.region, target.site)?;
            let report = exact_report(&spec, &region, target.site, source.as_ref(), float)?;
            emit(out.as_deref(), stdout, to_json_pretty(&report)?.as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Simulate {
            spec,
            locations,
            n,
            seed,
            layout,
            out,
        } => {
            let spec = M4Spec::load(&spec)?;
            let locations = match locations {
                Some(text) => text.parse()?,
                None => Region::new(spec.domain().points()),
            };
            let sample = simulate_m4(&spec, &locations, n, seed)?;
            let layout = match layout {
                Layout::Long => SampleLayout::Long,
                Layout::Wide => SampleLayout::Wide,
            };
            let meta = write_sample_csv(&sample, &out, layout)?;
            let summary = SimulateSummary {
                provenance: Provenance::new(Some(meta.seed), Some(meta.spec_fingerprint)),
                out: out.display().to_string(),
                n: meta.n,
                sites: meta.locations.len(),
                layout: meta.layout,
            };
            emit(None, stdout, to_json_pretty(&summary)?.as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Estimate {
            sample,
            site,
            region,
            threshold,
            out,
        } => {
            let sample = read_sample_csv(&sample)?;
            let region = parse_region(&region, site)?;
            let oracle = ThresholdOracle::from_scores(rank_transform(&sample));
            let estimate = estimate_indices(oracle.scores(), &region, site)?;
            let oracle = OracleEstimates::compute(&oracle, &region, site, threshold)?;
            let report = EstimateReport {
                provenance: Provenance::new(Some(sample.seed), Some(sample.spec_fingerprint.clone())),
                site,
                region,
                estimate,
                oracle,
            };
            emit(out.as_deref(), stdout, to_json_pretty(&report)?.as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::McStudy {
            target,
            reps,
            n,
            seed,
            format,
            out,
        } => {
            let spec = M4Spec::load(&target.spec)?;
            let region = parse_region(&target.region, target.site)?;
            let study = monte_carlo_study(&spec, &region, target.site, reps, n, seed)?;
            let report = StudyReport::new(&spec, &region, target.site, study);
            let body = match format {
                Format::Json => to_json_pretty(&report)?.into_bytes(),
                Format::Csv => {
                    let mut buf = Vec::new();
                    report.write_csv(&mut buf)?;
                    buf
                }
            };
            emit(out.as_deref(), stdout, &body)?;
            Ok(EXIT_OK)
        }
        Command::Ingest { data, out } => {
            let ds = ingest_stations(&data.data, &data.options())?;
            let summary = IngestSummary {
                provenance: Provenance::for_data(&ds),
                n: ds.n(),
                missing_policy: data.missing,
                years: ds.years.clone(),
                missing: ds.missing.clone(),
                stations: ds.stations,
            };
            emit(out.as_deref(), stdout, to_json_pretty(&summary)?.as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Report {
            data,
            station,
            region,
            format,
            out,
        } => {
            let ds = ingest_stations(&data.data, &data.options())?;
            let rows = region
                .iter()
                .map(|r| {
                    let names: Vec<String> = r.split(';').map(|s| s.trim().to_string()).collect();
                    station_indices(&ds, &station, &names)
                })
                .collect::<Result<Vec<_>>>()?;
            let report = StationReport::new(&ds, &station, rows);
            let body = match format {
                Format::Json => to_json_pretty(&report)?.into_bytes(),
                Format::Csv => {
                    let mut buf = Vec::new();
                    report.write_csv(&mut buf)?;
                    buf
                }
            };
            emit(out.as_deref(), stdout, &body)?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (program name first) and runs the subcommand, returning
/// the exit status. Diagnostics go to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "m4idx: {e}");
            exit_code(&e)
        }
    }
}

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Joint tail probabilities of mainshock and largest-aftershock magnitudes.
#[derive(Debug, Parser)]
#[command(name = "quaketail", version, about)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Input file: a catalog for `decluster`, a pairs CSV for the fitting commands.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Directory for all outputs; created if missing.
    #[arg(long = "out-dir", global = true, default_value = ".")]
    pub out_dir: PathBuf,
    /// Master seed; jitter, tie-breaking, imputation and simulation streams derive from it.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Number of upper order statistics for the rank estimator.
    #[arg(long, global = true, default_value_t = 40)]
    pub k: usize,
    /// Truncation point of the mainshock margin.
    #[arg(long = "trunc-x", global = true, default_value_t = 4.95)]
    pub trunc_x: f64,
    /// Truncation point of the largest-aftershock margin.
    #[arg(long = "trunc-y", global = true, default_value_t = 4.55)]
    pub trunc_y: f64,
    /// Largest aftershocks below this magnitude are censored.
    #[arg(long, global = true, default_value_t = 4.0)]
    pub censor: f64,
    /// Catalog magnitude floor applied before declustering.
    #[arg(long = "catalog-floor", global = true, default_value_t = 4.0)]
    pub catalog_floor: f64,
    /// Smallest magnitude that can start an event.
    #[arg(long = "mainshock-floor", global = true, default_value_t = 5.0)]
    pub mainshock_floor: f64,
    /// Half-width of the uniform jitter applied before goodness-of-fit tests.
    #[arg(long, global = true, default_value_t = 0.05)]
    pub jitter: f64,
    /// Named region; explicit bounds override its edges.
    #[arg(long, global = true, value_enum)]
    pub region: Option<RegionPreset>,
    #[arg(long = "lat-min", global = true, allow_negative_numbers = true)]
    pub lat_min: Option<f64>,
    #[arg(long = "lat-max", global = true, allow_negative_numbers = true)]
    pub lat_max: Option<f64>,
    #[arg(long = "lon-min", global = true, allow_negative_numbers = true)]
    pub lon_min: Option<f64>,
    #[arg(long = "lon-max", global = true, allow_negative_numbers = true)]
    pub lon_max: Option<f64>,
    /// Window table CSV (mag_lo,mag_hi,L_km,T_days); Gardner–Knopoff by default.
    #[arg(long, global = true)]
    pub windows: Option<PathBuf>,
    #[arg(long = "schema.col.time", global = true, default_value = "time")]
    pub col_time: String,
    #[arg(long = "schema.col.latitude", global = true, default_value = "latitude")]
    pub col_latitude: String,
    #[arg(long = "schema.col.longitude", global = true, default_value = "longitude")]
    pub col_longitude: String,
    #[arg(long = "schema.col.magnitude", global = true, default_value = "magnitude")]
    pub col_magnitude: String,
    #[arg(long = "schema.col.depth", global = true)]
    pub col_depth: Option<String>,
    #[arg(long = "schema.col.id", global = true)]
    pub col_id: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionPreset {
    /// North Anatolian Fault Zone: 39–42°N, 26–40°E.
    Nafz,
    Global,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split a catalog into mainshock events and (mainshock, largest aftershock) pairs.
    Decluster,
    /// Fit both routes to a pairs file.
    Fit,
    /// Joint tail probabilities P(X > s, Y > t) from both routes.
    Tailprob(TailprobArgs),
    /// Level curves P(X > x, Y > y) = p from both routes.
    LevelCurves(LevelCurveArgs),
    /// Rank-estimator tables for choosing k.
    DiagnoseK(DiagnoseArgs),
    /// Simulate a synthetic catalog from the aftershock law.
    Simulate(SimulateArgs),
    /// Goodness-of-fit tests of the fitted margins and gap law.
    Gof,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TailprobArgs {
    /// Fit file from `fit`; defaults to `<out-dir>/fit.json`.
    #[arg(long)]
    #[serde(skip)]
    pub fit: Option<PathBuf>,
    /// Query as `s,t`; repeatable. `t` may be `-inf`.
    #[arg(long = "query", allow_hyphen_values = true)]
    pub queries: Vec<String>,
    /// CSV of queries with columns `s,t`.
    #[arg(long = "queries")]
    #[serde(skip)]
    pub query_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LevelCurveArgs {
    #[arg(long)]
    #[serde(skip)]
    pub fit: Option<PathBuf>,
    /// Probability levels.
    #[arg(long = "p", value_delimiter = ',', default_value = "1e-3,5e-4,1e-4,5e-5,1e-5,5e-6,1e-6")]
    pub probabilities: Vec<f64>,
    #[arg(long = "x-min", default_value_t = 5.0)]
    pub x_min: f64,
    #[arg(long = "x-max", default_value_t = 9.0)]
    pub x_max: f64,
    #[arg(long = "x-step", default_value_t = 0.05)]
    pub x_step: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DiagnoseArgs {
    /// Values of x at which R(x, 1) is tabulated against k.
    #[arg(long = "x", value_delimiter = ',', default_value = "0.5,1,2")]
    pub xs: Vec<f64>,
    #[arg(long = "k-min", default_value_t = 10)]
    pub k_min: usize,
    #[arg(long = "k-max", default_value_t = 100)]
    pub k_max: usize,
    /// Points of the x grid on [0.02, 5] for the smoothed-versus-raw table.
    #[arg(long = "grid-points", default_value_t = 250)]
    pub grid_points: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    /// Number of mainshock events.
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    /// Rate of the truncated exponential mainshock margin.
    #[arg(long, default_value_t = 2.3)]
    pub alpha: f64,
    /// Productivity constant of the intensity law; requires --b.
    #[arg(long, requires = "b", conflicts_with_all = ["beta", "gompertz_c"], allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Gutenberg–Richter slope; requires --a.
    #[arg(long, requires = "a")]
    pub b: Option<f64>,
    /// Gap-law beta; sets b = beta / ln 10.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Gap-law C; sets a so the law reproduces it.
    #[arg(long = "gompertz-c")]
    pub gompertz_c: Option<f64>,
    /// Omori c, in days.
    #[arg(long = "omori-c", default_value_t = 1.0, allow_negative_numbers = true)]
    pub omori_c: f64,
    /// Omori exponent; must exceed 1.
    #[arg(long = "omori-p", default_value_t = 2.0, allow_negative_numbers = true)]
    pub omori_p: f64,
}

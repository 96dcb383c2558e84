//! Joint tail estimation for mainshock and largest-aftershock magnitudes.
//!
//! The pipeline reads an earthquake catalog, declusters it into mainshock
//! events with Gardner–Knopoff windows, and estimates `P(X > s, Y > t)` for
//! the mainshock magnitude `X` and largest aftershock magnitude `Y` in two
//! ways: a parametric model (truncated exponential margin plus a Gompertz
//! gap law fitted with censoring) and a rank-based tail dependence estimator.
//! A single-generation aftershock simulator provides synthetic data.

pub mod catalog;
pub mod decluster;
pub mod dist;
pub mod evt;
pub mod level;
pub mod optim;
pub mod parametric;
pub mod quad;
pub mod sim;

pub use catalog::{parse_catalog, write_catalog, Catalog, CatalogError, Region, Schema, ShockRecord};
pub use decluster::{
    decluster, extract_pairs, read_pairs, write_pairs, CensoredPairs, DeclusterError, EventRecord,
    MainshockEvent, Pair, Window, WindowTable,
};
pub use dist::{
    jitter, ks_test, DistError, FitSummary, Gompertz, KsResult, Purpose, RngStream, StreamId, TruncExp,
    RNG_ALGORITHM,
};
pub use evt::{level_curve_evt, tail_prob_evt, EvtError, EvtFit, ExceedanceMargin, RankedSample};
pub use level::{LevelCurve, LevelPoint};
pub use parametric::{
    fit_censored_gompertz, fit_parametric, fit_with_report, CensoredGompertzFit, FitReport, ParametricError,
    ParametricFit, ParametricModel,
};
pub use sim::{AftershockLaw, SimError};

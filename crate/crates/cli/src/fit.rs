//! `fit` and `gof`.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use anyhow::Context;
use quaketail::evt::rank_with_random_ties;
use quaketail::{
    fit_with_report, jitter, read_pairs, CensoredPairs, EvtFit, ExceedanceMargin, FitReport, FitSummary, KsResult,
    ParametricFit, Purpose, StreamId,
};
use serde::{Deserialize, Serialize};

use crate::args::GlobalArgs;
use crate::config::{require_input, sha256_file, CmdResult, Failure, Meta, Output, RunConfig};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Streams {
    pub jitter: StreamId,
    pub ties: StreamId,
    pub imputation: StreamId,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParametricSection {
    pub fit: ParametricFit,
    pub report: FitReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvtSection {
    pub margin_x: FitSummary,
    pub margin_y: FitSummary,
    /// Share of all events whose largest aftershock reaches the Y truncation.
    pub margin_y_fraction: f64,
    pub ks_y: KsResult,
    pub fit: EvtFit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitFile {
    pub meta: Meta,
    pub n: usize,
    pub n_observed: usize,
    pub censor_threshold: f64,
    pub jitter_half_width: f64,
    pub streams: Streams,
    pub parametric: ParametricSection,
    pub evt: EvtSection,
}

pub struct Fitted {
    pub file: FitFile,
    pub jittered_x: Vec<f64>,
    pub jittered_y: Vec<f64>,
}

pub fn load_pairs(path: &Path, censor: f64) -> anyhow::Result<CensoredPairs> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_pairs(BufReader::new(f), censor).with_context(|| format!("reading pairs from {}", path.display()))
}

/// Both routes on one pairs file. The jitter stream is consumed in the
/// order: mainshock magnitudes, observed gaps, observed largest aftershocks.
pub fn fit_all(pairs: &CensoredPairs, cfg: &RunConfig, meta: Meta) -> anyhow::Result<Fitted> {
    if pairs.n_observed() == 0 {
        anyhow::bail!(
            "none of the {} pairs has a largest aftershock at or above {}; the gap law cannot be fitted",
            pairs.n(),
            cfg.censor
        );
    }
    let mut jitter_rng = cfg.stream(Purpose::Jitter);
    let mut impute_rng = cfg.stream(Purpose::Imputation);
    let mut tie_rng = cfg.stream(Purpose::Ties);
    let streams = Streams {
        jitter: jitter_rng.id(),
        ties: tie_rng.id(),
        imputation: impute_rng.id(),
    };

    // Replays the x draws so the jittered sample can be reported.
    let jittered_x = jitter(&pairs.xs(), cfg.jitter, &mut cfg.stream(Purpose::Jitter));
    let (parametric, report) = fit_with_report(pairs, cfg.trunc_x, cfg.jitter, &mut jitter_rng, &mut impute_rng)
        .context("parametric fit")?;

    let jittered_y = jitter(&pairs.observed_ys(), cfg.jitter, &mut jitter_rng);
    let margin_y = ExceedanceMargin::fit(&jittered_y, cfg.trunc_y, pairs.n()).context("fitting the Y margin")?;
    let ks_y = margin_y.ks(&jittered_y).context("Y margin KS test")?;
    let ranked = rank_with_random_ties(pairs, &mut tie_rng);
    let evt = EvtFit::new(cfg.k, parametric.model.margin_x, margin_y, ranked).context("rank-based fit")?;
    let used_y: Vec<f64> = jittered_y.iter().copied().filter(|&y| y >= cfg.trunc_y).collect();

    let file = FitFile {
        meta,
        n: pairs.n(),
        n_observed: pairs.n_observed(),
        censor_threshold: cfg.censor,
        jitter_half_width: cfg.jitter,
        streams,
        evt: EvtSection {
            margin_x: report.margin_x.clone(),
            margin_y: margin_y.law.summary(&used_y),
            margin_y_fraction: margin_y.fraction(),
            ks_y,
            fit: evt,
        },
        parametric: ParametricSection { fit: parametric, report },
    };
    Ok(Fitted {
        file,
        jittered_x,
        jittered_y,
    })
}

fn fit_from_input(g: &GlobalArgs, cfg: &RunConfig, command: &str) -> CmdResult<Fitted> {
    let input = require_input(&g.input, Some(g.out_dir.join("pairs.csv")), "pairs file")?;
    let pairs = load_pairs(&input, cfg.censor)?;
    let meta = Meta::new(cfg, command, &(), Some(sha256_file(&input)?));
    fit_all(&pairs, cfg, meta).map_err(Failure::Runtime)
}

pub fn cmd_fit(g: &GlobalArgs, cfg: &RunConfig) -> CmdResult {
    let fitted = fit_from_input(g, cfg, "fit")?;
    let f = &fitted.file;
    let out = Output::new(&g.out_dir)?;
    out.json("fit.json", f)?;
    let gap = &f.parametric.fit.gap_fit;
    println!(
        "alpha = {:.4}  beta = {:.4}  C = {:.4}  alpha_Y = {:.4}  mean gap = {:.3}{}",
        f.parametric.fit.model.margin_x.rate(),
        gap.beta,
        gap.c,
        f.evt.fit.margin_y.law.rate(),
        f.parametric.report.mean_gap,
        if gap.converged { "" } else { "  (optimizer did not converge)" }
    );
    Ok(())
}

pub fn load_fit(path: &Path) -> CmdResult<FitFile> {
    let f = File::open(path)
        .with_context(|| format!("opening fit file {}; run `fit` first", path.display()))
        .map_err(Failure::Runtime)?;
    serde_json::from_reader(BufReader::new(f))
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Runtime)
}

#[derive(Serialize)]
struct GofFile {
    meta: Meta,
    jitter_half_width: f64,
    ks_x: KsResult,
    ks_gap: Option<KsResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ks_gap_note: Option<String>,
    ks_y: KsResult,
}

pub fn cmd_gof(g: &GlobalArgs, cfg: &RunConfig) -> CmdResult {
    let fitted = fit_from_input(g, cfg, "gof")?;
    let f = &fitted.file;
    let out = Output::new(&g.out_dir)?;
    let report = &f.parametric.report;
    out.json(
        "gof.json",
        &GofFile {
            meta: f.meta.clone(),
            jitter_half_width: cfg.jitter,
            ks_x: report.ks_x,
            ks_gap: report.ks_gap,
            ks_gap_note: report.ks_gap_note.clone(),
            ks_y: f.evt.ks_y,
        },
    )?;

    let margin_x = f.parametric.fit.model.margin_x;
    let margin_y = f.evt.fit.margin_y.law;
    let used_y: Vec<f64> = fitted.jittered_y.iter().copied().filter(|&y| y >= cfg.trunc_y).collect();
    out.csv("gof_points.csv", &f.meta, |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["margin", "value", "empirical_cdf", "model_cdf"])?;
        for (name, sample, cdf) in [
            ("x", &fitted.jittered_x, &(|v: f64| margin_x.cdf(v)) as &dyn Fn(f64) -> f64),
            ("y", &used_y, &|v: f64| margin_y.cdf(v)),
        ] {
            let mut s = sample.clone();
            s.sort_by(f64::total_cmp);
            let n = s.len() as f64;
            for (i, v) in s.iter().enumerate() {
                w.write_record([
                    name.to_string(),
                    v.to_string(),
                    ((i + 1) as f64 / n).to_string(),
                    cdf(*v).to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    })?;
    let gap_p = report.ks_gap.map_or("n/a".to_string(), |k| format!("{:.3}", k.p_value));
    println!(
        "KS p-values: X margin {:.3}  gap {}  Y margin {:.3}",
        report.ks_x.p_value, gap_p, f.evt.ks_y.p_value
    );
    Ok(())
}

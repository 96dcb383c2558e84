//! Commands that evaluate a fit: `tailprob`, `level-curves`, `diagnose-k`.

use std::fs::File;
use std::io::BufReader;

use anyhow::Context;
use quaketail::evt::{k_diagnostic, rank_with_random_ties, Smoother, RATIO_MAX, RATIO_MIN};
use quaketail::{level_curve_evt, tail_prob_evt, LevelPoint, Purpose};

use crate::args::{DiagnoseArgs, GlobalArgs, LevelCurveArgs, TailprobArgs};
use crate::config::{config_error, require_input, sha256_file, CmdResult, Failure, Meta, Output, RunConfig};
use crate::fit::{load_fit, load_pairs, FitFile};

fn parse_magnitude(s: &str) -> Result<f64, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        t => t.parse::<f64>().map_err(|e| format!("'{s}': {e}")),
    }
}

fn parse_query(q: &str) -> Result<(f64, f64), String> {
    let (s, t) = q
        .split_once(',')
        .ok_or_else(|| format!("query '{q}' must look like s,t"))?;
    Ok((parse_magnitude(s)?, parse_magnitude(t)?))
}

fn fit_path(g: &GlobalArgs, explicit: &Option<std::path::PathBuf>) -> std::path::PathBuf {
    explicit.clone().unwrap_or_else(|| g.out_dir.join("fit.json"))
}

fn fmt_prob(p: Option<f64>) -> String {
    p.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

pub fn cmd_tailprob(g: &GlobalArgs, cfg: &RunConfig, args: &TailprobArgs) -> CmdResult {
    let mut queries = Vec::new();
    for q in &args.queries {
        queries.push(parse_query(q).map_err(config_error)?);
    }
    if let Some(path) = &args.query_file {
        let f = File::open(path)
            .with_context(|| format!("opening {}", path.display()))
            .map_err(Failure::Config)?;
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(BufReader::new(f));
        for rec in r.records() {
            let rec = rec.map_err(config_error)?;
            let joined = format!("{},{}", rec.get(0).unwrap_or(""), rec.get(1).unwrap_or(""));
            queries.push(parse_query(&joined).map_err(config_error)?);
        }
    }
    if queries.is_empty() {
        return Err(config_error("no queries: pass --query s,t or --queries FILE"));
    }

    let path = fit_path(g, &args.fit);
    let fit = load_fit(&path)?;
    let meta = Meta::new(cfg, "tailprob", &(args, &queries), Some(sha256_file(&path)?));
    let model = fit.parametric.fit.model;
    let out = Output::new(&g.out_dir)?;
    out.csv("tailprob.csv", &meta, |buf| {
        buf.extend_from_slice(
            b"# columns are unconditional joint tails P(X > s, Y > t) per event;\n\
              # divide by P(X > s) for the chance that an event above s has an aftershock above t\n",
        );
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["s", "t", "parametric", "nonparametric", "note"])?;
        for &(s, t) in &queries {
            let mut notes = Vec::new();
            let par = match model.joint_tail(s, t) {
                Ok(p) => Some(p),
                Err(e) => {
                    notes.push(format!("parametric: {e}"));
                    None
                }
            };
            let evt = match tail_prob_evt(&fit.evt.fit, s, t) {
                Ok(e) => {
                    if let Some(w) = e.warning {
                        notes.push(format!("nonparametric: {w}"));
                    }
                    Some(e.probability)
                }
                Err(e) => {
                    notes.push(format!("nonparametric: {e}"));
                    None
                }
            };
            w.write_record([s.to_string(), t.to_string(), fmt_prob(par), fmt_prob(evt), notes.join("; ")])?;
        }
        w.flush()?;
        Ok(())
    })?;
    println!("{} queries written to {}", queries.len(), out.path("tailprob.csv").display());
    Ok(())
}

fn x_grid(args: &LevelCurveArgs) -> CmdResult<Vec<f64>> {
    if !(args.x_step > 0.0) || !(args.x_max >= args.x_min) {
        return Err(config_error("x grid needs --x-step > 0 and --x-max >= --x-min"));
    }
    let n = ((args.x_max - args.x_min) / args.x_step + 1e-9).floor() as usize;
    // rounded so grid values print cleanly
    Ok((0..=n)
        .map(|i| ((args.x_min + i as f64 * args.x_step) * 1e9).round() / 1e9)
        .collect())
}

fn write_curves(out: &Output, name: &str, meta: &Meta, curves: &[(f64, Vec<LevelPoint>)]) -> anyhow::Result<()> {
    out.csv(name, meta, |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["p", "x", "y", "adjusted", "note"])?;
        for (p, points) in curves {
            for pt in points {
                w.write_record([
                    p.to_string(),
                    pt.x.to_string(),
                    pt.y.map(|y| y.to_string()).unwrap_or_default(),
                    pt.adjusted.to_string(),
                    pt.note.clone().unwrap_or_default(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    })?;
    Ok(())
}

fn all_missing(xs: &[f64], note: String) -> Vec<LevelPoint> {
    xs.iter().map(|&x| LevelPoint::missing(x, note.clone())).collect()
}

pub fn cmd_level_curves(g: &GlobalArgs, cfg: &RunConfig, args: &LevelCurveArgs) -> CmdResult {
    if args.probabilities.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
        return Err(config_error("every --p must lie in (0, 1)"));
    }
    let xs = x_grid(args)?;
    let path = fit_path(g, &args.fit);
    let fit: FitFile = load_fit(&path)?;
    let meta = Meta::new(cfg, "level-curves", args, Some(sha256_file(&path)?));
    let model = fit.parametric.fit.model;

    let mut parametric = Vec::new();
    let mut evt = Vec::new();
    for &p in &args.probabilities {
        let par = model
            .level_curve(p, &xs)
            .unwrap_or_else(|e| all_missing(&xs, e.to_string()));
        let np = level_curve_evt(&fit.evt.fit, p, &xs).unwrap_or_else(|e| all_missing(&xs, e.to_string()));
        parametric.push((p, par));
        evt.push((p, np));
    }
    let out = Output::new(&g.out_dir)?;
    write_curves(&out, "level_curves_parametric.csv", &meta, &parametric)?;
    write_curves(&out, "level_curves_evt.csv", &meta, &evt)?;
    println!(
        "{} probability levels x 2 routes over {} grid points",
        args.probabilities.len(),
        xs.len()
    );
    Ok(())
}

pub fn cmd_diagnose_k(g: &GlobalArgs, cfg: &RunConfig, args: &DiagnoseArgs) -> CmdResult {
    let input = require_input(&g.input, Some(g.out_dir.join("pairs.csv")), "pairs file")?;
    let pairs = load_pairs(&input, cfg.censor)?;
    let ranked = rank_with_random_ties(&pairs, &mut cfg.stream(Purpose::Ties));
    let k_hi = args.k_max.min(ranked.n_observed.saturating_sub(1));
    if args.k_min == 0 || args.k_min > k_hi {
        return Err(Failure::Runtime(anyhow::anyhow!(
            "k range [{}, {}] is empty once capped below n_observed = {}",
            args.k_min,
            args.k_max,
            ranked.n_observed
        )));
    }
    if args.xs.iter().any(|x| !(*x >= 0.0)) {
        return Err(config_error("--x values must be non-negative"));
    }
    let ks: Vec<usize> = (args.k_min..=k_hi).collect();
    let rows = k_diagnostic(&ranked, &args.xs, &ks).context("k diagnostic")?;

    let meta = Meta::new(cfg, "diagnose-k", args, Some(sha256_file(&input)?));
    let out = Output::new(&g.out_dir)?;
    out.csv("k_diagnostic.csv", &meta, |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["x", "k", "r_hat"])?;
        for r in &rows {
            w.write_record([r.x.to_string(), r.k.to_string(), r.r_hat.to_string()])?;
        }
        w.flush()?;
        Ok(())
    })?;

    if cfg.k >= ranked.n_observed {
        eprintln!(
            "warning: --k {} is not below n_observed = {}; skipping the smoothed comparison",
            cfg.k, ranked.n_observed
        );
        return Ok(());
    }
    let smoother = Smoother::new(&ranked, cfg.k).context("smoothed estimator")?;
    let m = args.grid_points.max(2);
    out.csv("r_curve.csv", &meta, |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["x", "r_hat", "r_hat_smoothed", "k"])?;
        for i in 0..m {
            let x = RATIO_MIN + (RATIO_MAX - RATIO_MIN) * i as f64 / (m - 1) as f64;
            w.write_record([
                x.to_string(),
                ranked.r_hat(x, cfg.k)?.to_string(),
                smoother.eval(x)?.to_string(),
                cfg.k.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    })?;
    println!("{} diagnostic rows; k range {}..={}", rows.len(), args.k_min, k_hi);
    Ok(())
}

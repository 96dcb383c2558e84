//! `decluster` and `simulate`: the commands that produce pairs.

use std::fs::File;
use std::io::BufReader;

use anyhow::Context;
use quaketail::catalog::filter_region;
use quaketail::sim::{simulate_pairs, synthetic_catalog};
use quaketail::{
    decluster, extract_pairs, parse_catalog, write_catalog, write_pairs, AftershockLaw, CatalogError, EventRecord,
    Purpose, Region, StreamId, TruncExp, WindowTable,
};
use serde::Serialize;

use crate::args::{GlobalArgs, SimulateArgs};
use crate::config::{config_error, require_input, sha256_file, CmdResult, Failure, Meta, Output, RunConfig};

#[derive(Serialize)]
struct DeclusterSummary {
    meta: Meta,
    shocks_read: usize,
    shocks_after_filter: usize,
    duplicate_shocks: usize,
    n: usize,
    n_observed: usize,
    censor_threshold: f64,
}

#[derive(Serialize)]
struct EventsFile {
    meta: Meta,
    events: Vec<EventRecord>,
}

pub fn cmd_decluster(g: &GlobalArgs, cfg: &RunConfig) -> CmdResult {
    let input = require_input(&g.input, None, "catalog")?;
    let table = match &g.windows {
        Some(p) => {
            let f = File::open(p).with_context(|| format!("opening {}", p.display())).map_err(Failure::Config)?;
            WindowTable::from_csv(BufReader::new(f)).map_err(config_error)?
        }
        None => WindowTable::default(),
    };
    let file = File::open(&input).with_context(|| format!("opening {}", input.display()))?;
    let catalog = parse_catalog(BufReader::new(file), &cfg.schema).map_err(|e| match e {
        CatalogError::MissingColumn(_) => config_error(e),
        other => Failure::Runtime(anyhow::Error::new(other).context(format!("parsing {}", input.display()))),
    })?;
    let region = cfg
        .region
        .unwrap_or(Region::new(-90.0, 90.0, -180.0, 180.0).expect("valid bounds"));
    let filtered = filter_region(&catalog, region, cfg.catalog_floor).map_err(config_error)?;
    if filtered.is_empty() {
        eprintln!("warning: no shocks left after region and magnitude filtering; writing empty outputs");
    }
    let events = decluster(&filtered, &table, cfg.mainshock_floor).context("declustering")?;
    let pairs = extract_pairs(&events, cfg.censor);

    let meta = Meta::new(cfg, "decluster", &(), Some(sha256_file(&input)?));
    let out = Output::new(&g.out_dir)?;
    out.json(
        "events.json",
        &EventsFile {
            meta: meta.clone(),
            events: events.iter().map(|e| EventRecord::new(e, cfg.censor)).collect(),
        },
    )?;
    out.csv("pairs.csv", &meta, |buf| Ok(write_pairs(&pairs, buf)?))?;
    let summary = DeclusterSummary {
        meta,
        shocks_read: catalog.len(),
        shocks_after_filter: filtered.len(),
        duplicate_shocks: filtered.duplicate_count(),
        n: pairs.n(),
        n_observed: pairs.n_observed(),
        censor_threshold: cfg.censor,
    };
    out.json("decluster_summary.json", &summary)?;
    println!("events: {}  observed largest aftershocks: {}", summary.n, summary.n_observed);
    Ok(())
}

#[derive(Serialize)]
struct Manifest {
    meta: Meta,
    law: AftershockLaw,
    beta: f64,
    gompertz_c: f64,
    mean_gap: f64,
    alpha: f64,
    trunc_x: f64,
    n: usize,
    n_observed: usize,
    censor_threshold: f64,
    stream: StreamId,
}

pub fn cmd_simulate(g: &GlobalArgs, cfg: &RunConfig, args: &SimulateArgs) -> CmdResult {
    let law = match (args.a, args.b) {
        (Some(a), Some(b)) => AftershockLaw::new(a, b, args.omori_c, args.omori_p),
        _ => AftershockLaw::from_gompertz(
            args.beta.unwrap_or(2.3),
            args.gompertz_c.unwrap_or(1.0),
            args.omori_c,
            args.omori_p,
        ),
    }
    .map_err(config_error)?;
    if args.n == 0 {
        return Err(config_error("--n must be at least 1"));
    }
    let margin = TruncExp::new(args.alpha, cfg.trunc_x).map_err(config_error)?;
    let mut rng = cfg.stream(Purpose::Simulation);
    let stream = rng.id();
    let pairs = simulate_pairs(&law, &margin, args.n, cfg.censor, &mut rng);
    let catalog = synthetic_catalog(&pairs);

    let meta = Meta::new(cfg, "simulate", args, None);
    let out = Output::new(&g.out_dir)?;
    out.csv("synthetic_catalog.csv", &meta, |buf| Ok(write_catalog(&catalog, &cfg.schema, buf)?))?;
    out.csv("sim_pairs.csv", &meta, |buf| Ok(write_pairs(&pairs, buf)?))?;
    let gap = law.gap_law();
    out.json(
        "manifest.json",
        &Manifest {
            meta,
            beta: law.beta(),
            gompertz_c: law.gompertz_c(),
            mean_gap: gap.mean(),
            law,
            alpha: args.alpha,
            trunc_x: cfg.trunc_x,
            n: pairs.n(),
            n_observed: pairs.n_observed(),
            censor_threshold: cfg.censor,
            stream,
        },
    )?;
    println!("simulated {} events, {} with observed largest aftershock", pairs.n(), pairs.n_observed());
    Ok(())
}

use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use quaketail::{Purpose, Region, RngStream, Schema, RNG_ALGORITHM};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::args::{GlobalArgs, RegionPreset};

pub const TOOL: &str = "quaketail";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit status 2 for bad configuration, 1 for everything else.
#[derive(Debug)]
pub enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }
}

impl Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let e = match self {
            Failure::Config(e) => e,
            Failure::Runtime(e) => e,
        };
        write!(f, "{e:#}")
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;

pub fn config_error(msg: impl Display) -> Failure {
    Failure::Config(anyhow::anyhow!("{msg}"))
}

/// Settings shared by every command. Paths are left out so that the config
/// hash depends only on what shapes the results.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub k: usize,
    pub trunc_x: f64,
    pub trunc_y: f64,
    pub censor: f64,
    pub catalog_floor: f64,
    pub mainshock_floor: f64,
    pub jitter: f64,
    pub region: Option<Region>,
    pub schema: Schema,
    pub windows_sha256: Option<String>,
}

impl RunConfig {
    pub fn from_args(g: &GlobalArgs) -> CmdResult<Self> {
        let region = resolve_region(g)?;
        let windows_sha256 = match &g.windows {
            Some(p) => Some(sha256_file(p).map_err(Failure::Config)?),
            None => None,
        };
        let cfg = Self {
            seed: g.seed,
            k: g.k,
            trunc_x: g.trunc_x,
            trunc_y: g.trunc_y,
            censor: g.censor,
            catalog_floor: g.catalog_floor,
            mainshock_floor: g.mainshock_floor,
            jitter: g.jitter,
            region,
            schema: Schema {
                time: g.col_time.clone(),
                latitude: g.col_latitude.clone(),
                longitude: g.col_longitude.clone(),
                magnitude: g.col_magnitude.clone(),
                depth: g.col_depth.clone(),
                id: g.col_id.clone(),
            },
            windows_sha256,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> CmdResult {
        let finite = [
            ("trunc-x", self.trunc_x),
            ("trunc-y", self.trunc_y),
            ("censor", self.censor),
            ("catalog-floor", self.catalog_floor),
            ("mainshock-floor", self.mainshock_floor),
            ("jitter", self.jitter),
        ];
        if let Some((name, v)) = finite.iter().find(|(_, v)| !v.is_finite()) {
            return Err(config_error(format!("--{name} must be finite, got {v}")));
        }
        if self.k == 0 {
            return Err(config_error("--k must be at least 1"));
        }
        if !(self.jitter > 0.0) {
            return Err(config_error("--jitter must be positive"));
        }
        // Half a magnitude grid step of slack on each consistency check.
        if self.censor > self.trunc_y + 0.05 + 1e-9 {
            return Err(config_error(format!(
                "--censor {} exceeds --trunc-y {} by more than half a grid step; censored values would enter the Y margin",
                self.censor, self.trunc_y
            )));
        }
        if self.trunc_x > self.mainshock_floor + 1e-9 {
            return Err(config_error(format!(
                "--trunc-x {} lies above --mainshock-floor {}",
                self.trunc_x, self.mainshock_floor
            )));
        }
        if self.catalog_floor > self.censor + 1e-9 {
            return Err(config_error(format!(
                "--catalog-floor {} lies above --censor {}; censoring would be ill-defined",
                self.catalog_floor, self.censor
            )));
        }
        Ok(())
    }

    pub fn stream(&self, purpose: Purpose) -> RngStream {
        RngStream::for_purpose(self.seed, purpose)
    }

    /// Hash of the config plus command-specific arguments.
    pub fn hash<A: Serialize>(&self, command: &str, args: &A) -> String {
        let doc = serde_json::json!({ "command": command, "config": self, "args": args });
        hex::encode(Sha256::digest(serde_json::to_vec(&doc).expect("config serializes")))
    }
}

fn resolve_region(g: &GlobalArgs) -> CmdResult<Option<Region>> {
    let base = match g.region {
        Some(RegionPreset::Nafz) => Some(Region::nafz()),
        Some(RegionPreset::Global) => Some(Region::new(-90.0, 90.0, -180.0, 180.0).expect("valid bounds")),
        None => None,
    };
    let explicit = [g.lat_min, g.lat_max, g.lon_min, g.lon_max];
    if base.is_none() && explicit.iter().all(Option::is_none) {
        return Ok(None);
    }
    let b = base.unwrap_or(Region::new(-90.0, 90.0, -180.0, 180.0).expect("valid bounds"));
    Region::new(
        g.lat_min.unwrap_or(b.lat_min),
        g.lat_max.unwrap_or(b.lat_max),
        g.lon_min.unwrap_or(b.lon_min),
        g.lon_max.unwrap_or(b.lon_max),
    )
    .map(Some)
    .map_err(config_error)
}

/// Provenance block embedded in every artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
    pub rng: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_sha256: Option<String>,
}

impl Meta {
    pub fn new<A: Serialize>(cfg: &RunConfig, command: &str, args: &A, input_sha256: Option<String>) -> Self {
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            seed: cfg.seed,
            config_hash: cfg.hash(command, args),
            rng: RNG_ALGORITHM.into(),
            input_sha256,
        }
    }

    /// `#` comment lines that open every CSV artifact.
    pub fn csv_header(&self) -> String {
        let mut s = format!(
            "# {} {}\n# command={} seed={} rng={} config_hash={}\n",
            self.tool, self.version, self.command, self.seed, self.rng, self.config_hash
        );
        if let Some(h) = &self.input_sha256 {
            s.push_str(&format!("# input_sha256={h}\n"));
        }
        s
    }
}

pub fn sha256_file(path: &Path) -> anyhow::Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn new(dir: &Path) -> anyhow::Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> anyhow::Result<PathBuf> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    /// Writes `meta`'s comment header followed by whatever `body` emits.
    pub fn csv<F>(&self, name: &str, meta: &Meta, body: F) -> anyhow::Result<PathBuf>
    where
        F: FnOnce(&mut Vec<u8>) -> anyhow::Result<()>,
    {
        let path = self.path(name);
        let mut buf = meta.csv_header().into_bytes();
        body(&mut buf)?;
        let mut f = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        f.write_all(&buf)?;
        Ok(path)
    }
}

/// Opens `path` or reports which flag was missing.
pub fn require_input(input: &Option<PathBuf>, fallback: Option<PathBuf>, what: &str) -> CmdResult<PathBuf> {
    match input.clone().or(fallback) {
        Some(p) if p.exists() => Ok(p),
        Some(p) => Err(Failure::Runtime(anyhow::anyhow!("{what} not found: {}", p.display()))),
        None => Err(config_error(format!("missing --input ({what})"))),
    }
}

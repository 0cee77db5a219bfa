//! Versioned TOML configuration shared by all subcommands.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::bounds::{SearchOptions, Theorem2Options};
use crate::channels::{ChannelModel, EncodingSpec};
use crate::error::{Error, Result};
use crate::gaussian::SourceSpec;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema_version: u32,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub source: Option<SourceSection>,
    pub channel: Option<ChannelSection>,
    pub encoding: Option<EncodingSection>,
    pub search: Option<SearchSection>,
    pub grid: Option<GridSection>,
    pub convexity: Option<ConvexitySection>,
    pub theorem2: Option<Theorem2Section>,
    pub protocol: Option<ProtocolSection>,
    pub reduce: Option<ReduceSection>,
    pub simulate: Option<SimulateSection>,
    pub estimate: Option<EstimateSection>,
    pub first_order: Option<FirstOrderSection>,
    /// Directory relative paths are resolved against; set from the config file location.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    pub n_s: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKindName {
    Amplifier,
    Loss,
    ContraAmplifier,
    Identity,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub kind: ChannelKindName,
    pub gain: Option<f64>,
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncodingSection {
    pub e_x: f64,
    #[serde(default = "one")]
    pub m_e: u32,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSection {
    pub grid: Option<usize>,
    pub starts: Option<usize>,
    pub tolerance: Option<f64>,
    pub max_iters: Option<u64>,
}

/// Evenly spaced axis: `points` values from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub kappa_s: Axis,
    pub kappa_f: Axis,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvexitySection {
    #[serde(default = "convexity_slack")]
    pub slack: f64,
    #[serde(default = "monotonicity_slack")]
    pub monotonicity_slack: f64,
}

fn convexity_slack() -> f64 {
    1e-9
}

fn monotonicity_slack() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Theorem2Section {
    pub tau_grid: Option<usize>,
    pub theta_grid: Option<usize>,
    pub starts: Option<usize>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum VariantName {
    Tmsv,
    Flqkd,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum IabModelName {
    CorrelationReceiver,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    pub variant: VariantName,
    pub n_s: Option<f64>,
    pub e_x: Option<f64>,
    pub m_e: Option<u32>,
    pub gain: Option<f64>,
    #[serde(default = "unit")]
    pub beta: f64,
    #[serde(default = "unit")]
    pub rate_baud: f64,
    #[serde(default = "fiber_loss")]
    pub loss_db_per_km: f64,
    pub i_ab_table: Option<PathBuf>,
    pub i_ab_model: Option<IabModelName>,
    /// `[lo, hi]` bracket for `log10 N_S`; absent means `n_s` is used as given.
    pub optimize_log10_n_s: Option<[f64; 2]>,
    pub lengths_km: LengthSweep,
}

fn unit() -> f64 {
    1.0
}

fn fiber_loss() -> f64 {
    0.2
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LengthSweep {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReduceSection {
    pub profile: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub kappa_s: f64,
    pub kappa_f: f64,
    /// Attack angles; absent means the beam-splitter attack.
    pub zeta: Option<f64>,
    pub delta: Option<f64>,
    pub xi: Option<f64>,
    pub n_pairs: usize,
    #[serde(default = "unit")]
    pub tau: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateSection {
    pub records: PathBuf,
    #[serde(default = "unit")]
    pub tau: f64,
    #[serde(default)]
    pub max_lag: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FirstOrderSection {
    pub kappa_s: Vec<f64>,
    #[serde(default = "first_order_grid")]
    pub grid: usize,
    #[serde(default = "first_order_step")]
    pub step: f64,
}

fn first_order_grid() -> usize {
    33
}

fn first_order_step() -> f64 {
    1e-5
}

fn missing(section: &str) -> Error {
    Error::argument(format!("config is missing the [{section}] section"))
}

impl Config {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: Config = toml::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::argument(format!(
                "unsupported schema_version {} (this build reads {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn source(&self) -> Result<SourceSpec> {
        SourceSpec::new(self.source.as_ref().ok_or_else(|| missing("source"))?.n_s)
    }

    pub fn channel(&self) -> Result<ChannelModel> {
        let c = self.channel.as_ref().ok_or_else(|| missing("channel"))?;
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| Error::argument(format!("[channel] needs `{name}`")));
        match c.kind {
            ChannelKindName::Amplifier => ChannelModel::amplifier(need(c.gain, "gain")?),
            ChannelKindName::Loss => ChannelModel::loss(need(c.eta, "eta")?),
            ChannelKindName::ContraAmplifier => ChannelModel::contra_amplifier(need(c.gain, "gain")?),
            ChannelKindName::Identity => Ok(ChannelModel::identity()),
        }
    }

    pub fn encoding(&self) -> Result<EncodingSpec> {
        match &self.encoding {
            Some(e) => EncodingSpec::new(e.e_x, e.m_e),
            None => EncodingSpec::new(0.0, 1),
        }
    }

    pub fn search(&self) -> Result<SearchOptions> {
        let mut o = SearchOptions::default();
        if let Some(s) = &self.search {
            o.grid = s.grid.unwrap_or(o.grid);
            o.starts = s.starts.unwrap_or(o.starts);
            o.tolerance = s.tolerance.unwrap_or(o.tolerance);
            o.max_iters = s.max_iters.unwrap_or(o.max_iters);
        }
        if o.grid < 2 || o.starts == 0 || !(o.tolerance > 0.0) || o.max_iters == 0 {
            return Err(Error::argument("[search] needs grid >= 2, starts >= 1, tolerance > 0, max_iters >= 1"));
        }
        Ok(o)
    }

    pub fn theorem2_options(&self) -> Result<Theorem2Options> {
        let mut o = Theorem2Options::default();
        if let Some(s) = &self.theorem2 {
            o.tau_grid = s.tau_grid.unwrap_or(o.tau_grid);
            o.theta_grid = s.theta_grid.unwrap_or(o.theta_grid);
            o.starts = s.starts.unwrap_or(o.starts);
        }
        if o.tau_grid < 2 || o.theta_grid == 0 || o.starts == 0 {
            return Err(Error::argument("[theorem2] needs tau_grid >= 2, theta_grid >= 1, starts >= 1"));
        }
        Ok(o)
    }

    pub fn grid(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let g = self.grid.as_ref().ok_or_else(|| missing("grid"))?;
        Ok((g.kappa_s.values("grid.kappa_s")?, g.kappa_f.values("grid.kappa_f")?))
    }
}

impl Axis {
    pub fn values(&self, name: &str) -> Result<Vec<f64>> {
        if self.points == 0 {
            return Err(Error::argument(format!("{name} is empty")));
        }
        if !self.start.is_finite() || !self.stop.is_finite() || self.start < 0.0 || self.stop < self.start {
            return Err(Error::argument(format!("{name} needs finite 0 <= start <= stop")));
        }
        if self.points == 1 {
            return Ok(vec![self.start]);
        }
        Ok((0..self.points)
            .map(|i| self.start + (self.stop - self.start) * i as f64 / (self.points - 1) as f64)
            .collect())
    }
}

impl LengthSweep {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0) || !(self.start >= 0.0) || !(self.stop >= self.start) || !self.stop.is_finite() {
            return Err(Error::argument("protocol.lengths_km needs 0 <= start <= stop and step > 0"));
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| self.start + i as f64 * self.step).collect())
    }
}

//! Flat TOML run configuration. Every key is optional; command-line flags
//! override file values and unset keys fall back to desk-scale defaults.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use toml::value::Datetime;
use netload_core::data::{CapacityScaling, SyntheticDatasetConfig, COND_DIM};
use netload_core::denoiser::{DenoiserConfig, Variant};
use netload_core::diffusion::{ClipMode, SamplerConfig, TrainConfig};
use netload_core::solarphys::{PvSystemSpec, Site, DEFAULT_AZIMUTHS};
use netload_core::{Error, Result, STEPS_PER_DAY};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    // Inputs.
    pub weather: Option<PathBuf>,
    pub netload: Option<PathBuf>,
    pub pv: Option<PathBuf>,
    /// Directory holding `weather.csv`, `netload.csv` and `pv.csv`; used
    /// for any of the three paths left unset.
    pub data_dir: Option<PathBuf>,

    // Site and PV template.
    pub latitude: Option<f64>,
    pub longitude: Option<f64>,
    pub utc_offset: Option<f64>,
    pub tilt: Option<f64>,
    pub azimuths: Option<Vec<f64>>,
    pub capacity_scaling: Option<String>,

    // Synthetic data.
    pub customers: Option<usize>,
    pub days: Option<usize>,
    pub start_date: Option<Datetime>,

    // Network.
    pub variant: Option<String>,
    #[serde(rename = "H")]
    pub hidden: Option<usize>,
    #[serde(rename = "T")]
    pub steps_per_day: Option<usize>,
    #[serde(rename = "C")]
    pub cond_dim: Option<usize>,
    pub heads: Option<usize>,
    pub s_tok: Option<usize>,
    pub k_scale: Option<f64>,
    pub leaky_slope: Option<f64>,

    // Training.
    pub learning_rate: Option<f64>,
    pub lr_decay: Option<f64>,
    pub lr_decay_interval: Option<usize>,
    pub train_steps: Option<usize>,
    pub batch_size: Option<usize>,
    pub ema_mu: Option<f64>,
    pub beta_1: Option<f64>,
    pub beta_n: Option<f64>,
    pub diffusion_steps: Option<usize>,
    pub log_every: Option<usize>,
    pub split_ratio: Option<f64>,
    pub zero_init_phi: Option<bool>,

    // Sampling.
    pub samples: Option<usize>,
    pub clip: Option<String>,
    pub chunk_size: Option<usize>,

    // Seeds.
    pub seed_data: Option<u64>,
    pub seed_split: Option<u64>,
    pub seed_train: Option<u64>,
    pub seed_sample: Option<u64>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($f:ident),* $(,)?) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let line = e.span().map_or(0, |s| text[..s.start].matches('\n').count() + 1);
            Error::Parse {
                line,
                msg: e.message().to_string(),
            }
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Values set in `other` replace values in `self`.
    pub fn overlay(&mut self, other: &RunConfig) {
        overlay!(self, other;
            weather, netload, pv, data_dir, latitude, longitude, utc_offset, tilt, azimuths,
            capacity_scaling, customers, days, start_date, variant, hidden, steps_per_day,
            cond_dim, heads, s_tok, k_scale, leaky_slope, learning_rate, lr_decay,
            lr_decay_interval, train_steps, batch_size, ema_mu, beta_1, beta_n,
            diffusion_steps, log_every, split_ratio, zero_init_phi, samples, clip,
            chunk_size, seed_data, seed_split, seed_train, seed_sample,
        );
    }

    fn data_path(&self, explicit: &Option<PathBuf>, file: &str) -> Result<PathBuf> {
        if let Some(p) = explicit {
            return Ok(p.clone());
        }
        self.data_dir
            .as_ref()
            .map(|d| d.join(file))
            .ok_or_else(|| Error::Config(format!("no path for {file}: set it or `data_dir`")))
    }

    pub fn weather_path(&self) -> Result<PathBuf> {
        self.data_path(&self.weather, "weather.csv")
    }

    pub fn netload_path(&self) -> Result<PathBuf> {
        self.data_path(&self.netload, "netload.csv")
    }

    pub fn pv_path(&self) -> Result<PathBuf> {
        self.data_path(&self.pv, "pv.csv")
    }

    pub fn site(&self) -> Site {
        let d = Site::default();
        Site {
            latitude: self.latitude.unwrap_or(d.latitude),
            longitude: self.longitude.unwrap_or(d.longitude),
            utc_offset: self.utc_offset.unwrap_or(d.utc_offset),
        }
    }

    pub fn pv_template(&self) -> Result<PvSystemSpec> {
        let spec = PvSystemSpec {
            tilt_deg: self.tilt.unwrap_or(PvSystemSpec::default().tilt_deg),
            ..PvSystemSpec::default()
        };
        spec.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(spec)
    }

    pub fn azimuths(&self) -> Vec<f64> {
        self.azimuths.clone().unwrap_or_else(|| DEFAULT_AZIMUTHS.to_vec())
    }

    pub fn capacity_scaling(&self) -> Result<CapacityScaling> {
        match self.capacity_scaling.as_deref() {
            None | Some("raw") => Ok(CapacityScaling::Raw),
            Some("max") => Ok(CapacityScaling::MaxNormalized),
            Some(other) => Err(Error::Config(format!("capacity_scaling `{other}` (expected raw or max)"))),
        }
    }

    pub fn variant(&self) -> Result<Variant> {
        self.variant.as_deref().unwrap_or("pdm").parse()
    }

    pub fn synthetic(&self) -> Result<SyntheticDatasetConfig> {
        let mut cfg = SyntheticDatasetConfig::desk_scale(
            self.customers.unwrap_or(3),
            self.days.unwrap_or(120),
            self.seed_data.unwrap_or(0),
        );
        cfg.site = self.site();
        cfg.pv_template = self.pv_template()?;
        if let Some(d) = &self.start_date {
            cfg.start_date = match (d.date, d.time) {
                (Some(date), None) => NaiveDate::from_ymd_opt(date.year.into(), date.month.into(), date.day.into()),
                _ => None,
            }
            .ok_or_else(|| Error::Config(format!("start_date `{d}` is not a calendar date")))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn denoiser(&self) -> Result<DenoiserConfig> {
        let d = DenoiserConfig::desk(self.variant()?);
        let cfg = DenoiserConfig {
            steps: self.steps_per_day.unwrap_or(STEPS_PER_DAY),
            hidden: self.hidden.unwrap_or(d.hidden),
            cond_dim: self.cond_dim.unwrap_or(COND_DIM),
            heads: self.heads.unwrap_or(d.heads),
            tokens: self.s_tok.unwrap_or(d.tokens),
            k_scale: self.k_scale.unwrap_or(d.k_scale),
            leaky_slope: self.leaky_slope.unwrap_or(d.leaky_slope),
            basis_rows: self.azimuths().len(),
            ..d
        };
        if cfg.steps != STEPS_PER_DAY || cfg.cond_dim != COND_DIM {
            return Err(Error::Config(format!(
                "T and C are fixed by the data format at {STEPS_PER_DAY} and {COND_DIM}"
            )));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn train(&self) -> Result<TrainConfig> {
        let d = TrainConfig::desk();
        let cfg = TrainConfig {
            learning_rate: self.learning_rate.unwrap_or(d.learning_rate),
            lr_decay: self.lr_decay.unwrap_or(d.lr_decay),
            lr_decay_interval: self.lr_decay_interval.unwrap_or(d.lr_decay_interval),
            steps: self.train_steps.unwrap_or(d.steps),
            batch_size: self.batch_size.unwrap_or(d.batch_size),
            ema_mu: self.ema_mu.unwrap_or(d.ema_mu),
            beta_1: self.beta_1.unwrap_or(d.beta_1),
            beta_last: self.beta_n.unwrap_or(d.beta_last),
            diffusion_steps: self.diffusion_steps.unwrap_or(d.diffusion_steps),
            seed: self.seed_train.unwrap_or(0),
            log_every: self.log_every.unwrap_or(d.log_every),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn split_ratio(&self) -> f64 {
        self.split_ratio.unwrap_or(0.6)
    }

    pub fn sampler(&self) -> Result<SamplerConfig> {
        let mut cfg = SamplerConfig::new(self.seed_sample.unwrap_or(0));
        cfg.clip = match self.clip.as_deref() {
            None | Some("after-noise") => ClipMode::AfterNoise,
            Some("before-noise") => ClipMode::BeforeNoise,
            Some("off") => ClipMode::Off,
            Some(other) => {
                return Err(Error::Config(format!(
                    "clip `{other}` (expected after-noise, before-noise or off)"
                )))
            }
        };
        if let Some(c) = self.chunk_size {
            cfg.chunk_size = c;
        }
        Ok(cfg)
    }

    pub fn members(&self) -> Result<usize> {
        match self.samples.unwrap_or(20) {
            0 => Err(Error::Config("samples must be positive".into())),
            m => Ok(m),
        }
    }
}

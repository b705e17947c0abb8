//! Desk-scale synthetic customers with known load and solar components.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use chrono::{Datelike, Duration, NaiveDate};

use super::{customer_indices, encode_condition, interpolate_weather, ConditionVector, NetLoadProfile, PvCapacities};
use crate::numerics::RngStream;
use crate::solarphys::{basis_profile, clear_sky, solar_position, PvSystemSpec, Site, WeatherSeries};
use crate::{Error, Result, STEPS_PER_DAY};

/// Panel azimuths used for the west, south and east capacity groups.
pub const WEST_AZIMUTH: f64 = 270.0;
pub const SOUTH_AZIMUTH: f64 = 180.0;
pub const EAST_AZIMUTH: f64 = 90.0;

const WEATHER_STREAM: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct CustomerParams {
    pub customer_id: u32,
    /// kW.
    pub base_load: f64,
    pub morning_peak: f64,
    /// Local hour of the morning bump centre.
    pub morning_hour: f64,
    pub evening_peak: f64,
    pub evening_hour: f64,
    /// Standard deviation of each bump, hours.
    pub peak_width: f64,
    /// Per-slot Gaussian noise, kW.
    pub noise_scale: f64,
    pub pv: PvCapacities,
}

/// Parameters of the generated weather.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticWeatherConfig {
    /// Probability that a day is overcast.
    pub cloudy_probability: f64,
    /// Clearness range for overcast days.
    pub cloudy_clearness: (f64, f64),
    /// Clearness range for clear days.
    pub clear_clearness: (f64, f64),
    /// Hour-to-hour clearness jitter, scaled by how overcast the day is.
    pub hourly_jitter: f64,
}

impl Default for SyntheticWeatherConfig {
    fn default() -> Self {
        Self {
            cloudy_probability: 0.35,
            cloudy_clearness: (0.15, 0.6),
            clear_clearness: (0.85, 1.0),
            hourly_jitter: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeatherSource {
    Synthetic(SyntheticWeatherConfig),
    /// 15-minute series covering every generated date.
    Series(WeatherSeries),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDatasetConfig {
    pub customers: Vec<CustomerParams>,
    pub days: usize,
    pub start_date: NaiveDate,
    pub site: Site,
    pub pv_template: PvSystemSpec,
    pub weather: WeatherSource,
    pub seed: u64,
}

impl SyntheticDatasetConfig {
    /// Draws `customers` households with varied habits and PV layouts.
    pub fn desk_scale(customers: usize, days: usize, seed: u64) -> Self {
        let mut rng = RngStream::new(seed, WEATHER_STREAM + 1);
        let customers = (0..customers)
            .map(|i| {
                let mut cap = || {
                    if rng.uniform(0.0, 1.0) < 0.25 {
                        0.0
                    } else {
                        (rng.uniform(1.0, 4.0) * 4.0).round() / 4.0
                    }
                };
                let (west, south, east) = (cap(), cap(), cap());
                let pv = if west + south + east < 2.0 {
                    PvCapacities::from_orientations(west, south + 3.0, east)
                } else {
                    PvCapacities::from_orientations(west, south, east)
                };
                CustomerParams {
                    customer_id: i as u32 + 1,
                    base_load: rng.uniform(0.4, 1.0),
                    morning_peak: rng.uniform(0.8, 2.0),
                    morning_hour: rng.uniform(6.5, 8.5),
                    evening_peak: rng.uniform(1.5, 3.0),
                    evening_hour: rng.uniform(18.0, 20.5),
                    peak_width: rng.uniform(1.0, 1.8),
                    noise_scale: rng.uniform(0.05, 0.15),
                    pv,
                }
            })
            .collect();
        Self {
            customers,
            days,
            start_date: NaiveDate::from_ymd_opt(2018, 1, 1).expect("valid date"),
            site: Site::default(),
            pv_template: PvSystemSpec::default(),
            weather: WeatherSource::Synthetic(SyntheticWeatherConfig::default()),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.customers.is_empty() {
            return Err(Error::Config("synthetic dataset needs at least one customer".into()));
        }
        if self.days == 0 {
            return Err(Error::Config("synthetic dataset needs at least one day".into()));
        }
        let mut ids: Vec<u32> = self.customers.iter().map(|c| c.customer_id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("duplicate synthetic customer id".into()));
        }
        for c in &self.customers {
            let caps = [c.pv.west, c.pv.south, c.pv.east, c.base_load, c.morning_peak, c.evening_peak];
            if caps.iter().any(|v| !v.is_finite() || *v < 0.0) || !(c.peak_width > 0.0) || !(c.noise_scale >= 0.0) {
                return Err(Error::Config(format!("invalid parameters for customer {}", c.customer_id)));
            }
        }
        self.pv_template.validate()
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        (0..self.days).map(|d| self.start_date + Duration::days(d as i64)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    /// Customer-major, date-ascending.
    pub profiles: Vec<NetLoadProfile>,
    pub conditions: Vec<ConditionVector>,
    pub pv: BTreeMap<u32, PvCapacities>,
    pub weather: WeatherSeries,
}

/// Hourly weather built on the clear-sky model with a random clearness
/// factor per day.
pub fn synthetic_weather(
    site: Site,
    start: NaiveDate,
    days: usize,
    cfg: &SyntheticWeatherConfig,
    seed: u64,
) -> Result<WeatherSeries> {
    let mut rng = RngStream::new(seed, WEATHER_STREAM);
    let mut hourly = WeatherSeries::empty(site);
    for d in 0..days {
        let date = start + Duration::days(d as i64);
        let cloudy = rng.uniform(0.0, 1.0) < cfg.cloudy_probability;
        let (lo, hi) = if cloudy { cfg.cloudy_clearness } else { cfg.clear_clearness };
        let k_day = rng.uniform(lo, hi);
        let seasonal = 19.0 + 9.0 * (2.0 * PI * (date.ordinal() as f64 - 110.0) / 365.0).sin();
        let wind_day = rng.uniform(1.0, 5.0);
        for h in 0..24 {
            let ts = date.and_hms_opt(h, 0, 0).expect("valid hour");
            let zenith = solar_position(site.latitude, site.longitude, site.utc_offset, &ts).zenith;
            let (cdni, cdhi, cghi) = clear_sky(zenith);
            let k = (k_day + cfg.hourly_jitter * (1.0 - k_day) * rng.normal()).clamp(0.05, 1.0);
            let dni = cdni * k;
            let dhi = cdhi + 0.25 * (1.0 - k) * cghi;
            let ghi = if zenith < 90.0 { dni * zenith.to_radians().cos() + dhi } else { 0.0 };
            let temp = seasonal + 6.0 * (2.0 * PI * (h as f64 - 9.0) / 24.0).sin() + 3.0 * (k_day - 0.6);
            let wind = (wind_day + 0.5 * rng.normal()).max(0.0);
            hourly.push(ts, temp, wind, dni, dhi, ghi);
        }
    }
    interpolate_weather(&hourly)
}

fn bump(hour: f64, centre: f64, width: f64) -> f64 {
    (-0.5 * ((hour - centre) / width).powi(2)).exp()
}

/// Consumption for one customer-day. Weekend mornings start an hour later.
fn load_profile(c: &CustomerParams, date: NaiveDate, rng: &mut RngStream) -> Vec<f64> {
    let weekend = date.weekday().number_from_monday() >= 6;
    let morning = c.morning_hour + if weekend { 1.0 } else { 0.0 };
    let level = (1.0 + 0.1 * rng.normal()).max(0.5);
    (0..STEPS_PER_DAY)
        .map(|t| {
            let h = t as f64 / 4.0;
            let v = c.base_load
                + level * (c.morning_peak * bump(h, morning, c.peak_width) + c.evening_peak * bump(h, c.evening_hour, c.peak_width))
                + c.noise_scale * rng.normal();
            v.max(0.0)
        })
        .collect()
}

/// Generates profiles whose net load is exactly load minus solar.
pub fn generate_synthetic_dataset(cfg: &SyntheticDatasetConfig) -> Result<SyntheticDataset> {
    cfg.validate()?;
    let weather = match &cfg.weather {
        WeatherSource::Synthetic(w) => synthetic_weather(cfg.site, cfg.start_date, cfg.days, w, cfg.seed)?,
        WeatherSource::Series(s) => s.clone(),
    };
    let dates = cfg.dates();
    let mut unit: BTreeMap<NaiveDate, [Vec<f64>; 3]> = BTreeMap::new();
    for &date in &dates {
        let day = weather.for_date(date);
        if day.len() != STEPS_PER_DAY {
            return Err(Error::input(format!(
                "weather has {} rows for {date}, expected {STEPS_PER_DAY}",
                day.len()
            )));
        }
        let rows = [WEST_AZIMUTH, SOUTH_AZIMUTH, EAST_AZIMUTH].map(|az| basis_profile(&day, &cfg.pv_template, az));
        let [w, s, e] = rows;
        unit.insert(date, [w?, s?, e?]);
    }

    let pv: BTreeMap<u32, PvCapacities> = cfg.customers.iter().map(|c| (c.customer_id, c.pv)).collect();
    let index = customer_indices(pv.keys().copied())?;
    let mut profiles = Vec::with_capacity(cfg.customers.len() * dates.len());
    let mut conditions = Vec::with_capacity(profiles.capacity());
    for c in &cfg.customers {
        let mut rng = RngStream::new(cfg.seed, c.customer_id as u64);
        for &date in &dates {
            let load = load_profile(c, date, &mut rng);
            let [w, s, e] = &unit[&date];
            let solar: Vec<f64> = (0..STEPS_PER_DAY)
                .map(|t| c.pv.west * w[t] + c.pv.south * s[t] + c.pv.east * e[t])
                .collect();
            let net: Vec<f64> = load.iter().zip(&solar).map(|(l, s)| l - s).collect();
            let mut p = NetLoadProfile::new(c.customer_id, date, net)?;
            p.load = Some(load);
            p.solar = Some(solar);
            profiles.push(p);
            conditions.push(encode_condition(index[&c.customer_id], &c.pv, date)?);
        }
    }
    Ok(SyntheticDataset {
        profiles,
        conditions,
        pv,
        weather,
    })
}

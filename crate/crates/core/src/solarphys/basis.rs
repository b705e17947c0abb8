use chrono::NaiveDate;

use super::irradiance::unit_ac_power;
use super::{cell_temperature, poa_irradiance, solar_position, PvSystemSpec, WeatherSeries};
use crate::numerics::Tensor;
use crate::{Error, Result};

/// Representative panel azimuths, east through west in 30° steps.
pub const DEFAULT_AZIMUTHS: [f64; 7] = [90.0, 120.0, 150.0, 180.0, 210.0, 240.0, 270.0];

/// Per-azimuth AC output of a 1 kW-DC system for one date.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisProfiles {
    pub date: NaiveDate,
    /// Ascending.
    pub azimuths: Vec<f64>,
    /// `azimuths.len() x T`, kW per kW of DC rating.
    pub values: Tensor,
}

/// AC output per kW of DC rating at each weather timestamp for a panel at
/// `azimuth`. Tilt and loss parameters come from `template`; its rating is
/// ignored. Output is exactly zero whenever the sun is at or below the
/// horizon.
pub fn basis_profile(weather: &WeatherSeries, template: &PvSystemSpec, azimuth: f64) -> Result<Vec<f64>> {
    weather.validate()?;
    let spec = PvSystemSpec {
        dc_rating_kw: 1.0,
        azimuth_deg: azimuth.rem_euclid(360.0),
        ..template.clone()
    };
    spec.validate()?;
    let site = weather.site;
    let out = (0..weather.len())
        .map(|i| {
            let sun = solar_position(site.latitude, site.longitude, site.utc_offset, &weather.timestamps[i]);
            if !sun.is_up() {
                return 0.0;
            }
            let poa = poa_irradiance(
                weather.dni[i],
                weather.dhi[i],
                weather.ghi[i],
                sun.zenith,
                sun.azimuth,
                spec.tilt_deg,
                spec.azimuth_deg,
                spec.albedo,
            );
            let t_cell = cell_temperature(poa, weather.temp_c[i], weather.wind_ms[i], spec.thermal_a, spec.thermal_b);
            unit_ac_power(&spec, poa, t_cell)
        })
        .collect();
    Ok(out)
}

/// Stacks [`basis_profile`] rows for every azimuth in `azimuths`, sorted
/// ascending. Duplicate azimuths yield identical rows.
pub fn basis_matrix(weather: &WeatherSeries, template: &PvSystemSpec, azimuths: &[f64]) -> Result<BasisProfiles> {
    if azimuths.is_empty() {
        return Err(Error::input("azimuth set is empty"));
    }
    weather.validate()?;
    let mut sorted = azimuths.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let rows = sorted
        .iter()
        .map(|&az| basis_profile(weather, template, az))
        .collect::<Result<Vec<_>>>()?;
    Ok(BasisProfiles {
        date: weather.timestamps[0].date(),
        azimuths: sorted,
        values: Tensor::from_rows(&rows)?,
    })
}

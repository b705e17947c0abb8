//! Solar photovoltaic performance model and per-azimuth basis profiles.
//!
//! The chain for one timestamp is sun position, plane-of-array
//! irradiance, cell temperature, then AC power.

mod basis;
mod clearsky;
mod irradiance;
mod position;
mod weather;

pub use basis::{basis_matrix, basis_profile, BasisProfiles, DEFAULT_AZIMUTHS};
pub use clearsky::clear_sky;
pub use irradiance::{cell_temperature, poa_irradiance, pv_ac_power, PvSystemSpec};
pub use position::{solar_position, SunPosition};
pub use weather::{Site, WeatherSeries};

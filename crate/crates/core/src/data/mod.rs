//! Profiles, conditioning, splits, file formats and the synthetic generator.

mod condition;
pub mod io;
mod prepare;
mod profile;
mod split;
mod synthetic;
mod weather;

pub use condition::{
    encode_condition, ConditionVector, PvCapacities, COND_DIM, DAY_DIM, ID_DIM, MONTH_DIM, PV_DIM, WEEKDAY_DIM,
};
pub use prepare::{basis_by_date, customer_indices, prepare_dataset, CapacityScaling, PreparedDataset};
pub(crate) use prepare::gather;
pub use profile::{customer_bounds, denormalize, impute_missing, normalize, Bounds, NetLoadProfile};
pub use split::{split_dataset, DatasetSplit};
pub use synthetic::{
    generate_synthetic_dataset, synthetic_weather, CustomerParams, SyntheticDataset, SyntheticDatasetConfig,
    SyntheticWeatherConfig, WeatherSource, EAST_AZIMUTH, SOUTH_AZIMUTH, WEST_AZIMUTH,
};
pub use weather::interpolate_weather;

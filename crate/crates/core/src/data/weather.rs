use chrono::Duration;

use crate::solarphys::WeatherSeries;
use crate::{Error, Result};

/// Linearly interpolates an hourly series onto a 15-minute grid.
///
/// Each hourly knot is reproduced exactly; the three slots after the final
/// knot hold its value. One day of 24 hourly rows yields 96 rows.
pub fn interpolate_weather(hourly: &WeatherSeries) -> Result<WeatherSeries> {
    hourly.validate()?;
    for w in hourly.timestamps.windows(2) {
        if w[1] - w[0] != Duration::hours(1) {
            return Err(Error::input(format!(
                "hourly weather has a gap between {} and {}",
                w[0], w[1]
            )));
        }
    }
    let n = hourly.len();
    let mut out = WeatherSeries::empty(hourly.site);
    let lerp = |ch: &[f64], i: usize, q: usize| -> f64 {
        if i + 1 < n {
            ch[i] + (ch[i + 1] - ch[i]) * q as f64 / 4.0
        } else {
            ch[i]
        }
    };
    for i in 0..n {
        for q in 0..4 {
            out.push(
                hourly.timestamps[i] + Duration::minutes(15 * q as i64),
                lerp(&hourly.temp_c, i, q),
                lerp(&hourly.wind_ms, i, q),
                lerp(&hourly.dni, i, q),
                lerp(&hourly.dhi, i, q),
                lerp(&hourly.ghi, i, q),
            );
        }
    }
    Ok(out)
}

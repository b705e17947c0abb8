use chrono::{Duration, NaiveDate, NaiveDateTime, Timelike};

/// Sun zenith and azimuth, degrees. Azimuth is clockwise from north.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SunPosition {
    pub zenith: f64,
    pub azimuth: f64,
}

impl SunPosition {
    pub fn is_up(&self) -> bool {
        self.zenith < 90.0
    }
}

/// Declination and equation of time from the Astronomical Almanac's
/// low-precision solar coordinates. Returns `(declination_rad, eot_minutes)`.
pub(crate) fn declination_eot(utc: &NaiveDateTime) -> (f64, f64) {
    let epoch = NaiveDate::from_ymd_opt(2000, 1, 1)
        .and_then(|d| d.and_hms_opt(12, 0, 0))
        .expect("valid epoch");
    let n = (*utc - epoch).num_milliseconds() as f64 / 86_400_000.0;
    let mean_long = (280.460 + 0.985_647_4 * n).rem_euclid(360.0);
    let anomaly = (357.528 + 0.985_600_3 * n).rem_euclid(360.0).to_radians();
    let ecl_long = (mean_long + 1.915 * anomaly.sin() + 0.020 * (2.0 * anomaly).sin()).to_radians();
    let obliquity = (23.439 - 0.000_000_4 * n).to_radians();
    let decl = (obliquity.sin() * ecl_long.sin()).asin();
    let ra = (obliquity.cos() * ecl_long.sin())
        .atan2(ecl_long.cos())
        .to_degrees()
        .rem_euclid(360.0);
    let mut diff = mean_long - ra;
    if diff > 180.0 {
        diff -= 360.0;
    } else if diff < -180.0 {
        diff += 360.0;
    }
    (decl, 4.0 * diff)
}

/// Sun position for a local standard-time timestamp.
///
/// `lon` is east-positive and `utc_offset` is in hours (e.g. -6 for CST).
/// No atmospheric refraction correction is applied.
pub fn solar_position(lat: f64, lon: f64, utc_offset: f64, timestamp: &NaiveDateTime) -> SunPosition {
    let utc = *timestamp - Duration::milliseconds((utc_offset * 3_600_000.0).round() as i64);
    let (decl, eot) = declination_eot(&utc);
    let minutes = timestamp.hour() as f64 * 60.0
        + timestamp.minute() as f64
        + timestamp.second() as f64 / 60.0;
    let true_solar = minutes + eot + 4.0 * lon - 60.0 * utc_offset;
    let hour_angle = (true_solar / 4.0 - 180.0).to_radians();
    let phi = lat.clamp(-90.0, 90.0).to_radians();

    let cos_z = (phi.sin() * decl.sin() + phi.cos() * decl.cos() * hour_angle.cos()).clamp(-1.0, 1.0);
    let zenith = cos_z.acos().to_degrees();

    let az_south = hour_angle
        .sin()
        .atan2(hour_angle.cos() * phi.sin() - decl.tan() * phi.cos());
    let azimuth = (az_south.to_degrees() + 180.0).rem_euclid(360.0);
    SunPosition { zenith, azimuth }
}

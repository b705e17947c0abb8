/// Clear-sky beam and diffuse irradiance (W/m²) for a sun zenith angle.
///
/// Beam follows an air-mass attenuation law with Kasten–Young air mass;
/// diffuse is a fixed fraction of beam. Global is closed as
/// `dni * cos(z) + dhi`. Returns zeros when the sun is down.
pub fn clear_sky(zenith: f64) -> (f64, f64, f64) {
    if zenith >= 90.0 {
        return (0.0, 0.0, 0.0);
    }
    let cos_z = zenith.to_radians().cos();
    let air_mass = 1.0 / (cos_z + 0.50572 * (96.07995 - zenith).powf(-1.6364));
    let dni = 1353.0 * 0.7f64.powf(air_mass.powf(0.678));
    let dhi = 0.1 * dni;
    let ghi = dni * cos_z + dhi;
    (dni, dhi, ghi)
}

use crate::{Error, Result};

/// Photovoltaic system parameters for the performance model.
#[derive(Debug, Clone, PartialEq)]
pub struct PvSystemSpec {
    /// DC nameplate rating, kW.
    pub dc_rating_kw: f64,
    /// Degrees from horizontal.
    pub tilt_deg: f64,
    /// Degrees clockwise from north; 180 faces south.
    pub azimuth_deg: f64,
    pub inverter_efficiency: f64,
    pub system_loss: f64,
    /// Power temperature coefficient, 1/°C.
    pub temp_coeff: f64,
    pub albedo: f64,
    pub thermal_a: f64,
    /// Wind coefficient of the thermal model, s/m.
    pub thermal_b: f64,
}

impl Default for PvSystemSpec {
    fn default() -> Self {
        Self {
            dc_rating_kw: 1.0,
            tilt_deg: 30.2672,
            azimuth_deg: 180.0,
            inverter_efficiency: 0.96,
            system_loss: 0.14,
            temp_coeff: -0.0047,
            albedo: 0.2,
            thermal_a: -3.56,
            thermal_b: -0.075,
        }
    }
}

impl PvSystemSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = self.dc_rating_kw > 0.0
            && (0.0..=90.0).contains(&self.tilt_deg)
            && (0.0..360.0).contains(&self.azimuth_deg)
            && self.inverter_efficiency > 0.0
            && self.inverter_efficiency <= 1.0
            && (0.0..1.0).contains(&self.system_loss)
            && (0.0..=1.0).contains(&self.albedo);
        if ok {
            Ok(())
        } else {
            Err(Error::input(format!("invalid PV system {self:?}")))
        }
    }
}

/// Plane-of-array irradiance (W/m²) with isotropic sky diffuse and a
/// constant-albedo ground term.
#[allow(clippy::too_many_arguments)]
pub fn poa_irradiance(
    dni: f64,
    dhi: f64,
    ghi: f64,
    zenith: f64,
    sun_azimuth: f64,
    tilt: f64,
    panel_azimuth: f64,
    albedo: f64,
) -> f64 {
    let (z, t) = (zenith.to_radians(), tilt.to_radians());
    let beam = if zenith < 90.0 {
        let cos_aoi =
            z.cos() * t.cos() + z.sin() * t.sin() * (sun_azimuth - panel_azimuth).to_radians().cos();
        dni * cos_aoi.max(0.0)
    } else {
        0.0
    };
    let sky = dhi * (1.0 + t.cos()) / 2.0;
    let ground = ghi * albedo * (1.0 - t.cos()) / 2.0;
    (beam + sky + ground).max(0.0)
}

/// Module temperature, °C: `poa * exp(a + b * wind) + t_amb`.
pub fn cell_temperature(poa: f64, t_amb: f64, wind: f64, a: f64, b: f64) -> f64 {
    poa * (a + b * wind).exp() + t_amb
}

/// AC output per kW of DC rating, before scaling by the nameplate.
pub(crate) fn unit_ac_power(spec: &PvSystemSpec, poa: f64, t_cell: f64) -> f64 {
    let dc = (poa / 1000.0) * (1.0 + spec.temp_coeff * (t_cell - 25.0));
    (spec.inverter_efficiency * dc * (1.0 - spec.system_loss)).max(0.0)
}

/// AC output, kW. No inverter clipping is modelled.
pub fn pv_ac_power(spec: &PvSystemSpec, poa: f64, t_cell: f64) -> f64 {
    unit_ac_power(spec, poa, t_cell) * spec.dc_rating_kw
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horizontal_plane_recovers_ghi() {
        for (dni, dhi, z) in [(850.0, 90.0, 20.0), (300.0, 200.0, 70.0), (0.0, 50.0, 85.0)] {
            let ghi = dni * f64::cos(f64::to_radians(z)) + dhi;
            let poa = poa_irradiance(dni, dhi, ghi, z, 123.0, 0.0, 180.0, 0.2);
            assert!((poa - ghi).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_irradiance_gives_zero() {
        assert_eq!(poa_irradiance(0.0, 0.0, 0.0, 30.0, 180.0, 30.0, 180.0, 0.2), 0.0);
        assert_eq!(poa_irradiance(500.0, 0.0, 0.0, 95.0, 180.0, 30.0, 180.0, 0.2), 0.0);
    }

    #[test]
    fn south_facing_reference_case() {
        // Sun due south 30° from zenith on a 30° south panel: AOI = 0.
        let c30 = 30f64.to_radians().cos();
        let want = 800.0 + 100.0 * (1.0 + c30) / 2.0 + 600.0 * 0.2 * (1.0 - c30) / 2.0;
        let got = poa_irradiance(800.0, 100.0, 600.0, 30.0, 180.0, 30.0, 180.0, 0.2);
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }

    #[test]
    fn flat_panel_maximises_beam_for_overhead_sun() {
        let flat = poa_irradiance(900.0, 0.0, 0.0, 0.0, 180.0, 0.0, 180.0, 0.0);
        for tilt in [5.0, 15.0, 30.0, 60.0, 90.0] {
            assert!(poa_irradiance(900.0, 0.0, 0.0, 0.0, 180.0, tilt, 180.0, 0.0) < flat);
        }
    }

    #[test]
    fn cell_temperature_cases() {
        assert_eq!(cell_temperature(0.0, 21.5, 3.0, -3.56, -0.075), 21.5);
        let t = cell_temperature(1000.0, 20.0, 0.0, -3.56, -0.075);
        assert!((t - (20.0 + 1000.0 * (-3.56f64).exp())).abs() < 1e-12);
        let calm = cell_temperature(800.0, 20.0, 1.0, -3.56, -0.075);
        let windy = cell_temperature(800.0, 20.0, 6.0, -3.56, -0.075);
        assert!(windy < calm);
    }

    #[test]
    fn reference_conditions_power() {
        let spec = PvSystemSpec::default();
        assert_eq!(pv_ac_power(&spec, 0.0, 25.0), 0.0);
        assert!((pv_ac_power(&spec, 1000.0, 25.0) - 0.8256).abs() < 1e-12);
    }

    #[test]
    fn power_is_homogeneous_in_rating() {
        let unit = PvSystemSpec::default();
        for c in [0.5, 3.7, 11.0] {
            let scaled = PvSystemSpec { dc_rating_kw: c, ..unit.clone() };
            for (poa, tc) in [(640.0, 41.0), (1010.0, 55.5), (12.0, -3.0)] {
                assert_eq!(pv_ac_power(&scaled, poa, tc), c * pv_ac_power(&unit, poa, tc));
            }
        }
    }

    #[test]
    fn validation() {
        assert!(PvSystemSpec::default().validate().is_ok());
        let bad = PvSystemSpec { tilt_deg: 95.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = PvSystemSpec { system_loss: 1.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}

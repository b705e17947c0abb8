use chrono::{NaiveDate, NaiveDateTime};

use crate::{Error, Result};

/// Site location shared by every customer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Site {
    pub latitude: f64,
    /// East-positive degrees.
    pub longitude: f64,
    /// Hours from UTC of the local standard time used in timestamps.
    pub utc_offset: f64,
}

impl Default for Site {
    /// Austin, Texas on Central Standard Time.
    fn default() -> Self {
        Self {
            latitude: 30.2672,
            longitude: -97.74,
            utc_offset: -6.0,
        }
    }
}

/// Weather channels on a regular time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WeatherSeries {
    pub site: Site,
    pub timestamps: Vec<NaiveDateTime>,
    pub temp_c: Vec<f64>,
    pub wind_ms: Vec<f64>,
    pub dni: Vec<f64>,
    pub dhi: Vec<f64>,
    pub ghi: Vec<f64>,
}

impl WeatherSeries {
    pub fn empty(site: Site) -> Self {
        Self {
            site,
            timestamps: Vec::new(),
            temp_c: Vec::new(),
            wind_ms: Vec::new(),
            dni: Vec::new(),
            dhi: Vec::new(),
            ghi: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn push(&mut self, ts: NaiveDateTime, temp_c: f64, wind_ms: f64, dni: f64, dhi: f64, ghi: f64) {
        self.timestamps.push(ts);
        self.temp_c.push(temp_c);
        self.wind_ms.push(wind_ms);
        self.dni.push(dni);
        self.dhi.push(dhi);
        self.ghi.push(ghi);
    }

    /// Checks channel lengths, finiteness and non-negative irradiance.
    pub fn validate(&self) -> Result<()> {
        let n = self.timestamps.len();
        if n == 0 {
            return Err(Error::input("weather series is empty"));
        }
        for (name, ch) in self.channels() {
            if ch.len() != n {
                return Err(Error::input(format!(
                    "weather channel `{name}` has {} values for {n} timestamps",
                    ch.len()
                )));
            }
            if ch.iter().any(|v| !v.is_finite()) {
                return Err(Error::input(format!("weather channel `{name}` is not finite")));
            }
        }
        for (name, ch) in [("dni", &self.dni), ("dhi", &self.dhi), ("ghi", &self.ghi)] {
            if ch.iter().any(|&v| v < 0.0) {
                return Err(Error::input(format!("negative irradiance in `{name}`")));
            }
        }
        Ok(())
    }

    pub fn channels(&self) -> [(&'static str, &Vec<f64>); 5] {
        [
            ("temp_c", &self.temp_c),
            ("wind_ms", &self.wind_ms),
            ("dni", &self.dni),
            ("dhi", &self.dhi),
            ("ghi", &self.ghi),
        ]
    }

    /// Sub-series whose timestamps fall on `date`.
    pub fn for_date(&self, date: NaiveDate) -> WeatherSeries {
        let mut out = WeatherSeries::empty(self.site);
        for i in 0..self.len() {
            if self.timestamps[i].date() == date {
                out.push(
                    self.timestamps[i],
                    self.temp_c[i],
                    self.wind_ms[i],
                    self.dni[i],
                    self.dhi[i],
                    self.ghi[i],
                );
            }
        }
        out
    }

    /// Distinct dates in timestamp order.
    pub fn dates(&self) -> Vec<NaiveDate> {
        let mut out: Vec<NaiveDate> = Vec::new();
        for t in &self.timestamps {
            if out.last() != Some(&t.date()) {
                out.push(t.date());
            }
        }
        out
    }
}

//! CSV formats for weather, net load, PV metadata and basis exports.
//!
//! Values are written with Rust's shortest round-trip float formatting so a
//! write/read cycle is lossless and reruns are byte-identical.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::{Duration, NaiveDate, NaiveDateTime};

use super::{impute_missing, interpolate_weather, NetLoadProfile, PvCapacities};
use crate::solarphys::{BasisProfiles, Site, WeatherSeries};
use crate::{Error, Result, STEPS_PER_DAY};

fn parse_err(record: &csv::StringRecord, msg: impl Into<String>) -> Error {
    Error::Parse {
        line: record.position().map_or(0, |p| p.line() as usize),
        msg: msg.into(),
    }
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse {
        line,
        msg: e.to_string(),
    }
}

fn field_f64(record: &csv::StringRecord, i: usize, name: &str) -> Result<f64> {
    let raw = record
        .get(i)
        .ok_or_else(|| parse_err(record, format!("missing column `{name}`")))?;
    raw.trim()
        .parse::<f64>()
        .map_err(|_| parse_err(record, format!("`{name}`: cannot parse `{raw}` as a number")))
}

fn check_header(rdr: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let header = rdr.headers().map_err(csv_err)?.clone();
    let got: Vec<&str> = header.iter().map(str::trim).collect();
    if got != expected {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected header `{}`, got `{}`", expected.join(","), got.join(",")),
        });
    }
    Ok(())
}

pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"]
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
}

pub const WEATHER_HEADER: [&str; 6] = ["timestamp", "temp_c", "wind_ms", "dni", "dhi", "ghi"];

/// Reads a weather CSV and returns a 15-minute series. Hourly input is
/// interpolated; any other spacing is rejected.
pub fn read_weather_csv<R: Read>(reader: R, site: Site) -> Result<WeatherSeries> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    check_header(&mut rdr, &WEATHER_HEADER)?;
    let mut w = WeatherSeries::empty(site);
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let ts = rec
            .get(0)
            .and_then(parse_timestamp)
            .ok_or_else(|| parse_err(&rec, "invalid timestamp"))?;
        let vals = (1..6)
            .map(|i| field_f64(&rec, i, WEATHER_HEADER[i]))
            .collect::<Result<Vec<_>>>()?;
        if vals[2..].iter().any(|&v| v < 0.0) {
            return Err(parse_err(&rec, "negative irradiance"));
        }
        w.push(ts, vals[0], vals[1], vals[2], vals[3], vals[4]);
    }
    if w.is_empty() {
        return Err(Error::input("weather file has no rows"));
    }
    let step = if w.len() > 1 { w.timestamps[1] - w.timestamps[0] } else { Duration::hours(1) };
    if step == Duration::hours(1) {
        return interpolate_weather(&w);
    }
    if step != Duration::minutes(15) {
        return Err(Error::input(format!("unsupported weather spacing {step}")));
    }
    for pair in w.timestamps.windows(2) {
        if pair[1] - pair[0] != step {
            return Err(Error::input(format!(
                "weather has a gap between {} and {}",
                pair[0], pair[1]
            )));
        }
    }
    Ok(w)
}

pub fn write_weather_csv<W: Write>(writer: W, w: &WeatherSeries) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(WEATHER_HEADER)?;
    for i in 0..w.len() {
        wtr.write_record([
            w.timestamps[i].format("%Y-%m-%dT%H:%M:%S").to_string(),
            w.temp_c[i].to_string(),
            w.wind_ms[i].to_string(),
            w.dni[i].to_string(),
            w.dhi[i].to_string(),
            w.ghi[i].to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

fn profile_header(lead: &[&str]) -> Vec<String> {
    lead.iter()
        .map(|s| s.to_string())
        .chain((0..STEPS_PER_DAY).map(|t| format!("t{t}")))
        .collect()
}

fn parse_date(rec: &csv::StringRecord, i: usize) -> Result<NaiveDate> {
    let raw = rec.get(i).unwrap_or("");
    NaiveDate::parse_from_str(raw.trim(), "%Y-%m-%d").map_err(|_| parse_err(rec, format!("invalid date `{raw}`")))
}

fn parse_customer(rec: &csv::StringRecord) -> Result<u32> {
    let raw = rec.get(0).unwrap_or("");
    raw.trim()
        .parse()
        .map_err(|_| parse_err(rec, format!("invalid customer_id `{raw}`")))
}

/// Reads `customer_id,date,t0..t95`. Empty cells are imputed.
pub fn read_netload_csv<R: Read>(reader: R) -> Result<Vec<NetLoadProfile>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = profile_header(&["customer_id", "date"]);
    check_header(&mut rdr, &header.iter().map(String::as_str).collect::<Vec<_>>())?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let customer_id = parse_customer(&rec)?;
        let date = parse_date(&rec, 1)?;
        let raw = (0..STEPS_PER_DAY)
            .map(|t| {
                let cell = rec.get(2 + t).unwrap_or("").trim();
                if cell.is_empty() || cell.eq_ignore_ascii_case("nan") {
                    Ok(None)
                } else {
                    field_f64(&rec, 2 + t, &format!("t{t}")).map(Some)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let values = impute_missing(&raw).map_err(|e| parse_err(&rec, e.to_string()))?;
        out.push(NetLoadProfile::new(customer_id, date, values)?);
    }
    Ok(out)
}

pub fn write_netload_csv<W: Write>(writer: W, profiles: &[NetLoadProfile]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(profile_header(&["customer_id", "date"]))?;
    for p in profiles {
        let mut row = vec![p.customer_id.to_string(), p.date.to_string()];
        row.extend(p.values.iter().map(f64::to_string));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Writes the load and solar components as `customer_id,date,component,t0..t95`.
pub fn write_components_csv<W: Write>(writer: W, profiles: &[NetLoadProfile]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(profile_header(&["customer_id", "date", "component"]))?;
    for p in profiles {
        for (name, comp) in [("load", &p.load), ("solar", &p.solar)] {
            if let Some(values) = comp {
                let mut row = vec![p.customer_id.to_string(), p.date.to_string(), name.to_string()];
                row.extend(values.iter().map(f64::to_string));
                wtr.write_record(&row)?;
            }
        }
    }
    wtr.flush()?;
    Ok(())
}

pub const PV_HEADER: [&str; 5] = ["customer_id", "cap_total", "cap_west", "cap_south", "cap_east"];

pub fn read_pv_csv<R: Read>(reader: R) -> Result<BTreeMap<u32, PvCapacities>> {
    let mut rdr = csv::Reader::from_reader(reader);
    check_header(&mut rdr, &PV_HEADER)?;
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let id = parse_customer(&rec)?;
        let caps = PvCapacities {
            total: field_f64(&rec, 1, PV_HEADER[1])?,
            west: field_f64(&rec, 2, PV_HEADER[2])?,
            south: field_f64(&rec, 3, PV_HEADER[3])?,
            east: field_f64(&rec, 4, PV_HEADER[4])?,
        };
        if out.insert(id, caps).is_some() {
            return Err(parse_err(&rec, format!("duplicate customer {id}")));
        }
    }
    Ok(out)
}

pub fn write_pv_csv<W: Write>(writer: W, pv: &BTreeMap<u32, PvCapacities>) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(PV_HEADER)?;
    for (id, c) in pv {
        wtr.write_record([
            id.to_string(),
            c.total.to_string(),
            c.west.to_string(),
            c.south.to_string(),
            c.east.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// One row per azimuth: `azimuth,t0..t{T-1}`.
pub fn write_basis_csv<W: Write>(writer: W, basis: &BasisProfiles) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let steps = basis.values.cols();
    let header: Vec<String> = std::iter::once("azimuth".to_string())
        .chain((0..steps).map(|t| format!("t{t}")))
        .collect();
    wtr.write_record(&header)?;
    for (r, az) in basis.azimuths.iter().enumerate() {
        let mut row = vec![az.to_string()];
        row.extend(basis.values.row(r).iter().map(f64::to_string));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

use std::collections::BTreeMap;

use chrono::NaiveDate;

use crate::{Error, Result, STEPS_PER_DAY};

/// One customer-day of net-load readings, kW.
#[derive(Debug, Clone, PartialEq)]
pub struct NetLoadProfile {
    pub customer_id: u32,
    pub date: NaiveDate,
    pub values: Vec<f64>,
    /// Consumption component, when known (synthetic data only).
    pub load: Option<Vec<f64>>,
    /// Behind-the-meter solar component, when known.
    pub solar: Option<Vec<f64>>,
}

impl NetLoadProfile {
    pub fn new(customer_id: u32, date: NaiveDate, values: Vec<f64>) -> Result<Self> {
        if values.len() != STEPS_PER_DAY {
            return Err(Error::input(format!(
                "profile {customer_id}/{date} has {} values, expected {STEPS_PER_DAY}",
                values.len()
            )));
        }
        Ok(Self {
            customer_id,
            date,
            values,
            load: None,
            solar: None,
        })
    }
}

/// Fills gaps with the mean of the nearest observed neighbours on each
/// side; leading and trailing gaps copy the single nearest observation.
pub fn impute_missing(series: &[Option<f64>]) -> Result<Vec<f64>> {
    let observed: Vec<usize> = (0..series.len()).filter(|&i| series[i].is_some()).collect();
    let (Some(&first), Some(&last)) = (observed.first(), observed.last()) else {
        return Err(Error::input("series has no observed values"));
    };
    let mut out = Vec::with_capacity(series.len());
    let mut prev: Option<f64> = None;
    let mut next_idx = 0;
    for (i, v) in series.iter().enumerate() {
        match v {
            Some(x) => {
                out.push(*x);
                prev = Some(*x);
            }
            None => {
                while next_idx < observed.len() && observed[next_idx] < i {
                    next_idx += 1;
                }
                let next = observed.get(next_idx).and_then(|&j| series[j]);
                let fill = match (prev, next) {
                    (Some(a), Some(b)) => (a + b) / 2.0,
                    (None, _) => series[first].expect("observed"),
                    (Some(_), None) => series[last].expect("observed"),
                };
                out.push(fill);
            }
        }
    }
    Ok(out)
}

/// Per-customer min/max used for scaling into [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min: f64,
    pub max: f64,
}

impl Bounds {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(max > min) || !min.is_finite() || !max.is_finite() {
            return Err(Error::input(format!("degenerate bounds [{min}, {max}]")));
        }
        Ok(Self { min, max })
    }

    pub fn of(values: impl IntoIterator<Item = f64>) -> Result<Self> {
        let (lo, hi) = values
            .into_iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        Self::new(lo, hi)
    }
}

pub fn normalize(values: &[f64], bounds: Bounds) -> Vec<f64> {
    let span = bounds.max - bounds.min;
    values.iter().map(|x| 2.0 * (x - bounds.min) / span - 1.0).collect()
}

pub fn denormalize(values: &[f64], bounds: Bounds) -> Vec<f64> {
    let span = bounds.max - bounds.min;
    values.iter().map(|x| (x + 1.0) / 2.0 * span + bounds.min).collect()
}

/// Bounds over every profile of each customer.
pub fn customer_bounds(profiles: &[NetLoadProfile]) -> Result<BTreeMap<u32, Bounds>> {
    let mut acc: BTreeMap<u32, (f64, f64)> = BTreeMap::new();
    for p in profiles {
        let e = acc.entry(p.customer_id).or_insert((f64::INFINITY, f64::NEG_INFINITY));
        for &v in &p.values {
            e.0 = e.0.min(v);
            e.1 = e.1.max(v);
        }
    }
    acc.into_iter()
        .map(|(id, (lo, hi))| Bounds::new(lo, hi).map(|b| (id, b)))
        .collect()
}

use std::collections::BTreeMap;

use chrono::NaiveDate;

use super::{customer_bounds, encode_condition, normalize, Bounds, NetLoadProfile, PvCapacities, COND_DIM, ID_DIM};
use crate::numerics::Tensor;
use crate::solarphys::{basis_matrix, PvSystemSpec, WeatherSeries};
use crate::{Error, Result, STEPS_PER_DAY};

/// Maps customer ids, ascending, to one-hot positions.
pub fn customer_indices(ids: impl IntoIterator<Item = u32>) -> Result<BTreeMap<u32, usize>> {
    let mut sorted: Vec<u32> = ids.into_iter().collect();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() > ID_DIM {
        return Err(Error::input(format!(
            "{} customers exceed the {ID_DIM}-wide identity encoding",
            sorted.len()
        )));
    }
    Ok(sorted.into_iter().enumerate().map(|(i, id)| (id, i)).collect())
}

/// How PV capacities enter the condition vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CapacityScaling {
    /// kW as given.
    #[default]
    Raw,
    /// Divided by the largest total capacity among customers.
    MaxNormalized,
}

/// Model-ready tensors for a set of profiles.
#[derive(Debug, Clone)]
pub struct PreparedDataset {
    pub profiles: Vec<NetLoadProfile>,
    pub bounds: BTreeMap<u32, Bounds>,
    pub customer_index: BTreeMap<u32, usize>,
    pub pv: BTreeMap<u32, PvCapacities>,
    pub scaling: CapacityScaling,
    pub azimuths: Vec<f64>,
    /// `P x T`, normalized net load.
    pub x0: Tensor,
    /// `P x C`.
    pub cond: Tensor,
    /// `P x (L*T)`, each row the flattened basis of the profile's date.
    pub basis: Tensor,
}

impl PreparedDataset {
    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn basis_rows(&self) -> usize {
        self.azimuths.len()
    }

    /// Gathers `(x0, cond, basis)` rows for the given profile indices.
    pub fn rows(&self, idx: &[usize]) -> (Tensor, Tensor, Tensor) {
        (gather(&self.x0, idx), gather(&self.cond, idx), gather(&self.basis, idx))
    }

    pub fn capacities_for(&self, customer_id: u32) -> Option<PvCapacities> {
        let pv = *self.pv.get(&customer_id)?;
        Some(scale_capacities(&self.pv, pv, self.scaling))
    }
}

pub(crate) fn gather(t: &Tensor, idx: &[usize]) -> Tensor {
    let c = t.cols();
    let mut data = Vec::with_capacity(idx.len() * c);
    for &i in idx {
        data.extend_from_slice(t.row(i));
    }
    Tensor::new(vec![idx.len(), c], data).expect("gathered rows")
}

fn scale_capacities(all: &BTreeMap<u32, PvCapacities>, pv: PvCapacities, scaling: CapacityScaling) -> PvCapacities {
    match scaling {
        CapacityScaling::Raw => pv,
        CapacityScaling::MaxNormalized => {
            let max = all.values().map(|c| c.total).fold(0.0, f64::max);
            if max > 0.0 {
                pv.scaled(1.0 / max)
            } else {
                pv
            }
        }
    }
}

/// Basis matrix for every date in `dates`.
pub fn basis_by_date(
    weather: &WeatherSeries,
    template: &PvSystemSpec,
    azimuths: &[f64],
    dates: impl IntoIterator<Item = NaiveDate>,
) -> Result<BTreeMap<NaiveDate, Tensor>> {
    let mut out = BTreeMap::new();
    for date in dates {
        if out.contains_key(&date) {
            continue;
        }
        let day = weather.for_date(date);
        if day.len() != STEPS_PER_DAY {
            return Err(Error::input(format!(
                "weather has {} rows for {date}, expected {STEPS_PER_DAY}",
                day.len()
            )));
        }
        out.insert(date, basis_matrix(&day, template, azimuths)?.values);
    }
    Ok(out)
}

/// Normalizes each customer's profiles with bounds over all of that
/// customer's days and assembles conditions and per-date basis matrices.
pub fn prepare_dataset(
    profiles: Vec<NetLoadProfile>,
    pv: BTreeMap<u32, PvCapacities>,
    weather: &WeatherSeries,
    template: &PvSystemSpec,
    azimuths: &[f64],
    scaling: CapacityScaling,
) -> Result<PreparedDataset> {
    if profiles.is_empty() {
        return Err(Error::input("no profiles to prepare"));
    }
    let bounds = customer_bounds(&profiles)?;
    let customer_index = customer_indices(bounds.keys().copied())?;
    for id in bounds.keys() {
        if !pv.contains_key(id) {
            return Err(Error::input(format!("no PV metadata for customer {id}")));
        }
    }
    let basis = basis_by_date(weather, template, azimuths, profiles.iter().map(|p| p.date))?;
    let mut sorted_az = azimuths.to_vec();
    sorted_az.sort_by(|a, b| a.total_cmp(b));
    let width = sorted_az.len() * STEPS_PER_DAY;

    let mut x0 = Vec::with_capacity(profiles.len() * STEPS_PER_DAY);
    let mut cond = Vec::with_capacity(profiles.len() * COND_DIM);
    let mut b = Vec::with_capacity(profiles.len() * width);
    for p in &profiles {
        x0.extend(normalize(&p.values, bounds[&p.customer_id]));
        let caps = scale_capacities(&pv, pv[&p.customer_id], scaling);
        cond.extend(encode_condition(customer_index[&p.customer_id], &caps, p.date)?.into_vec());
        b.extend_from_slice(basis[&p.date].data());
    }
    let n = profiles.len();
    Ok(PreparedDataset {
        profiles,
        bounds,
        customer_index,
        pv,
        scaling,
        azimuths: sorted_az,
        x0: Tensor::new(vec![n, STEPS_PER_DAY], x0)?,
        cond: Tensor::new(vec![n, COND_DIM], cond)?,
        basis: Tensor::new(vec![n, width], b)?,
    })
}

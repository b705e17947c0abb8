use chrono::{Datelike, NaiveDate};

use crate::{Error, Result};

pub const ID_DIM: usize = 25;
pub const PV_DIM: usize = 4;
pub const MONTH_DIM: usize = 12;
pub const DAY_DIM: usize = 31;
pub const WEEKDAY_DIM: usize = 7;
/// Total width of an encoded condition.
pub const COND_DIM: usize = ID_DIM + PV_DIM + MONTH_DIM + DAY_DIM + WEEKDAY_DIM;

/// Installed PV capacity by orientation, kW.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PvCapacities {
    pub total: f64,
    pub west: f64,
    pub south: f64,
    pub east: f64,
}

impl PvCapacities {
    /// Orientation capacities with the total set to their sum.
    pub fn from_orientations(west: f64, south: f64, east: f64) -> Self {
        Self {
            total: west + south + east,
            west,
            south,
            east,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            total: self.total * factor,
            west: self.west * factor,
            south: self.south * factor,
            east: self.east * factor,
        }
    }
}

/// Conditioning vector `[id one-hot | total, west, south, east | month |
/// day of month | day of week]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionVector(Vec<f64>);

impl ConditionVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn id_block(&self) -> &[f64] {
        &self.0[..ID_DIM]
    }

    pub fn pv_block(&self) -> &[f64] {
        &self.0[ID_DIM..ID_DIM + PV_DIM]
    }

    pub fn month_block(&self) -> &[f64] {
        let s = ID_DIM + PV_DIM;
        &self.0[s..s + MONTH_DIM]
    }

    pub fn day_block(&self) -> &[f64] {
        let s = ID_DIM + PV_DIM + MONTH_DIM;
        &self.0[s..s + DAY_DIM]
    }

    pub fn weekday_block(&self) -> &[f64] {
        &self.0[COND_DIM - WEEKDAY_DIM..]
    }
}

pub fn encode_condition(customer_idx: usize, pv: &PvCapacities, date: NaiveDate) -> Result<ConditionVector> {
    if customer_idx >= ID_DIM {
        return Err(Error::input(format!(
            "customer index {customer_idx} outside 0..{ID_DIM}"
        )));
    }
    let caps = [pv.total, pv.west, pv.south, pv.east];
    if caps.iter().any(|c| !c.is_finite() || *c < 0.0) {
        return Err(Error::input(format!("invalid PV capacities {pv:?}")));
    }
    let mut v = vec![0.0; COND_DIM];
    v[customer_idx] = 1.0;
    v[ID_DIM..ID_DIM + PV_DIM].copy_from_slice(&caps);
    let base = ID_DIM + PV_DIM;
    v[base + date.month0() as usize] = 1.0;
    v[base + MONTH_DIM + date.day0() as usize] = 1.0;
    v[base + MONTH_DIM + DAY_DIM + date.weekday().num_days_from_monday() as usize] = 1.0;
    Ok(ConditionVector(v))
}

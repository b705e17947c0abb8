use std::collections::BTreeMap;

use super::NetLoadProfile;
use crate::numerics::RngStream;
use crate::{Error, Result};

/// Train/test partition of a profile list, by index.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
    pub ratio: f64,
}

/// Per-customer random split: `round(ratio * n)` of each customer's
/// profiles go to training. Index lists are returned sorted.
pub fn split_dataset(profiles: &[NetLoadProfile], ratio: f64, seed: u64) -> Result<DatasetSplit> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::input(format!("split ratio {ratio} must lie in (0, 1)")));
    }
    let mut by_customer: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, p) in profiles.iter().enumerate() {
        by_customer.entry(p.customer_id).or_default().push(i);
    }
    let mut rng = RngStream::new(seed, 0);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for idx in by_customer.values_mut() {
        rng.shuffle(idx);
        let n_train = (ratio * idx.len() as f64).round() as usize;
        train.extend_from_slice(&idx[..n_train]);
        test.extend_from_slice(&idx[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(DatasetSplit { train, test, seed, ratio })
}

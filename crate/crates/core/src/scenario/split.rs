use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Airport-level train/test partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AirportSplit {
    pub seed: u64,
    pub ratio: f64,
    pub train: Vec<String>,
    pub test: Vec<String>,
}

/// Shuffle the (sorted, de-duplicated) airport list with `seed` and put the
/// first `round(ratio * n)` airports in the training set.
pub fn split_airports(airports: &[String], ratio: f64, seed: u64) -> Result<AirportSplit> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::invalid(format!("split ratio {ratio} outside (0, 1)")));
    }
    let mut list: Vec<String> = airports.to_vec();
    list.sort();
    list.dedup();
    if list.is_empty() {
        return Err(Error::invalid("airport list is empty"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    list.shuffle(&mut rng);
    let n_train = (ratio * list.len() as f64).round() as usize;
    let test = list.split_off(n_train);
    let mut train = list;
    train.sort();
    let mut test = test;
    test.sort();
    Ok(AirportSplit {
        seed,
        ratio,
        train,
        test,
    })
}

//! Airport-level train/test split.

use runway_odd::scenario::split_airports;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let airports: Vec<String> = ["LFBO", "LFPG", "LFPO", "EGLL", "EDDF", "LIRF", "LEMD", "KJFK", "KSFO", "RJTT"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let split = split_airports(&airports, 0.5, 17)?;
    println!("train: {}", split.train.join(" "));
    println!("test:  {}", split.test.join(" "));
    Ok(())
}

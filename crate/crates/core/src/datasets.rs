//! Bundled example datasets in the CSV wire format.
//!
//! `MEDICAL_CSV`: daily ranges of pulse rate, systolic, and diastolic blood
//! pressure for 59 hospitalized patients (3 interval variables).
//!
//! `CARS_CSV`: price, top speed, acceleration time, and cylinder capacity
//! ranges for 8 car models (4 interval variables).

/// 59 patients x 3 interval variables.
pub const MEDICAL_CSV: &str = include_str!("../data/medical.csv");

/// 8 car models x 4 interval variables.
pub const CARS_CSV: &str = include_str!("../data/cars.csv");

/// Looks up a bundled dataset by file name (`medical.csv`, `cars.csv`).
pub fn bundled(name: &str) -> Option<&'static str> {
    match name {
        "medical.csv" | "medical" => Some(MEDICAL_CSV),
        "cars.csv" | "cars" => Some(CARS_CSV),
        _ => None,
    }
}

//! Named straight-run presets: commanded speed (mm/s) and duration (s).

pub const TEST_PRESETS: [(&str, f64, f64); 7] = [
    ("test1", 75.0, 65.0),
    ("test2", 75.0, 65.0),
    ("test3", 100.0, 41.0),
    ("test4", 100.0, 52.0),
    ("test5", 50.0, 91.0),
    ("test6", 50.0, 90.0),
    ("test7", 150.0, 39.0),
];

/// Look up a preset by name.
pub fn preset(name: &str) -> Option<(f64, f64)> {
    TEST_PRESETS
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|&(_, speed, duration)| (speed, duration))
}

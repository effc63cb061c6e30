#![no_main]

use libfuzzer_sys::fuzz_target;
use vanet_hardcore::flags::parse_db_range;

fuzz_target!(|data: &str| {
    if let Ok(grid) = parse_db_range(data) {
        assert!(grid.len() >= 2);
        assert!(grid.iter().all(|t| *t >= 0.0));
    }
});

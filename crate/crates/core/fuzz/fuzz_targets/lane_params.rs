#![no_main]

use libfuzzer_sys::fuzz_target;
use vanet_hardcore::flags::parse_lane_params;

fuzz_target!(|data: &str| {
    if let Ok(models) = parse_lane_params(data) {
        for m in models {
            assert!(m.lambda() > 0.0 && m.c() >= 0.0 && m.packing() < 1.0);
        }
    }
});

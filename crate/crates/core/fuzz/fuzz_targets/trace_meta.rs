#![no_main]

use libfuzzer_sys::fuzz_target;
use vanet_hardcore::traces::{parse_metadata, parse_trace_str};

const ROWS: &str = "snapshot_id,lane_id,position_m\n0,1,10.00\n0,1,55.25\n0,2,30.00\n";

fuzz_target!(|data: &str| {
    if let Ok(meta) = parse_metadata(data) {
        let _ = parse_trace_str(ROWS, Some(meta));
    }
});

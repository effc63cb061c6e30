#![no_main]

use libfuzzer_sys::fuzz_target;
use vanet_hardcore::traces::parse_trace_str;

fuzz_target!(|data: &str| {
    if let Ok(trace) = parse_trace_str(data, None) {
        // written positions are lossless, so a parsed trace reparses identically
        let again = parse_trace_str(&trace.to_csv(), Some(trace.metadata.clone())).unwrap();
        assert_eq!(again.to_csv(), trace.to_csv());
    }
});

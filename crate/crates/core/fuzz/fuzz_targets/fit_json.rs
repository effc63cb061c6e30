#![no_main]

use libfuzzer_sys::fuzz_target;
use vanet_hardcore::fitting::FitResult;
use vanet_hardcore::outage::LinkScenario;

fuzz_target!(|data: &str| {
    if let Ok(fits) = serde_json::from_str::<Vec<FitResult>>(data) {
        for f in &fits {
            let _ = f.to_model();
        }
    }
    if let Ok(s) = serde_json::from_str::<LinkScenario>(data) {
        let _ = s.validate();
    }
});

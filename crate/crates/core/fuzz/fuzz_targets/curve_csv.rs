#![no_main]

use libfuzzer_sys::fuzz_target;
use vanet_hardcore::curves::{OutageCurve, Provenance, SummaryCurve, SummaryKind};
use vanet_hardcore::stats::Envelope;

fuzz_target!(|data: &str| {
    if let Ok(c) = OutageCurve::from_csv(data, Provenance::MonteCarlo) {
        assert!(c.p_out().iter().all(|p| (0.0..=1.0).contains(p)));
        let _ = OutageCurve::from_csv(&c.to_csv(), Provenance::MonteCarlo).unwrap();
    }
    if let Ok(c) = SummaryCurve::from_csv(data, SummaryKind::J) {
        let _ = SummaryCurve::from_csv(&c.to_csv(), SummaryKind::J).unwrap();
    }
    let _ = Envelope::from_csv(data, SummaryKind::L);
    let _ = OutageCurve::from_json(data);
});

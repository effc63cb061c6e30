//! Trace files survive a write/parse cycle and empirical gap laws sample
//! their own distribution.

use rand::Rng;
use vanet_hardcore::sampling::{Extent, RngSeed};
use vanet_hardcore::traces::{empirical_cdf, generate_synthetic_trace, parse_trace, pooled_gaps};
use vanet_hardcore::HardcoreLaneModel;

#[test]
fn long_synthetic_trace_round_trips_through_disk() {
    let models = [
        HardcoreLaneModel::from_intensity(0.0248, 7.10).unwrap(),
        HardcoreLaneModel::from_intensity(0.0218, 11.05).unwrap(),
        HardcoreLaneModel::from_intensity(0.0205, 14.82).unwrap(),
    ];
    let trace =
        generate_synthetic_trace(&models, 1200, Extent::new(0.0, 2000.0).unwrap(), 5).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    trace.write(&path).unwrap();
    let back = parse_trace(&path).unwrap();
    assert_eq!(back.metadata, trace.metadata);
    assert_eq!(back.snapshot_ids().len(), 1200);
    for ((key, a), (key_b, b)) in trace.snapshots().zip(back.snapshots()) {
        assert_eq!(key, key_b);
        assert_eq!(a.positions(), b.positions());
    }
    assert_eq!(back.drop_first(600).snapshot_ids().first(), Some(&600));
}

#[test]
fn inverse_sampling_reproduces_the_empirical_cdf() {
    let model = HardcoreLaneModel::from_intensity(0.025, 16.0).unwrap();
    let trace =
        generate_synthetic_trace(&[model], 20, Extent::new(0.0, 10_000.0).unwrap(), 9).unwrap();
    let sample = pooled_gaps(&trace, &trace.snapshot_ids(), 1, None).unwrap();
    let law = empirical_cdf(&sample).unwrap();
    let mut rng = RngSeed::new(9, 1).rng();
    let mut draws: Vec<f64> = (0..1_000_000)
        .map(|_| law.inverse_sample(rng.random::<f64>()).unwrap())
        .collect();
    draws.sort_by(f64::total_cmp);
    let n = draws.len() as f64;
    let ks = draws
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = law.cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max);
    // 99.9% Dvoretzky-Kiefer-Wolfowitz band for 10⁶ draws
    assert!(ks < 1.95 / n.sqrt(), "KS = {ks}");
}

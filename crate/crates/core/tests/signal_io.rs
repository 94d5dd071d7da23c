use spiking_ft::signal::{load_signal, parse_csv, save_signal, synthesize_chirp, RadarConfig, Scenario, SignalFormat};
use spiking_ft::Error;

fn chirp() -> spiking_ft::signal::Signal {
    let c = RadarConfig::automotive().with_samples(64).unwrap();
    synthesize_chirp(&c, &Scenario::S3.targets(), 0.01, 5).unwrap()
}

#[test]
fn csv_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.csv");
    let x = chirp();
    save_signal(&x, &path, SignalFormat::Csv).unwrap();
    let back = load_signal(&path, SignalFormat::Csv, x.sample_rate()).unwrap();
    assert_eq!(back.samples(), x.samples());
}

#[test]
fn f32_round_trip_within_single_precision() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.f32");
    let x = chirp();
    save_signal(&x, &path, SignalFormat::F32Binary).unwrap();
    assert_eq!(std::fs::metadata(&path).unwrap().len(), 64 * 8);
    let back = load_signal(&path, SignalFormat::F32Binary, x.sample_rate()).unwrap();
    for (a, b) in x.samples().iter().zip(back.samples()) {
        assert!((a - b).norm() < 1e-6);
    }
}

#[test]
fn format_follows_extension() {
    assert_eq!(SignalFormat::from_path("a/b.f32".as_ref()), SignalFormat::F32Binary);
    assert_eq!(SignalFormat::from_path("a/b.csv".as_ref()), SignalFormat::Csv);
}

#[test]
fn malformed_csv_reports_line() {
    let err = parse_csv("1,2\n3,oops\n".as_bytes()).unwrap_err();
    assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    let err = parse_csv("1,2,3\n".as_bytes()).unwrap_err();
    assert!(matches!(err, Error::Parse { line: 1, .. }));
}

#[test]
fn truncated_binary_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.f32");
    std::fs::write(&path, [0u8; 12]).unwrap();
    assert!(load_signal(&path, SignalFormat::F32Binary, 1.0).is_err());
}

#[test]
fn synthesis_is_seeded() {
    assert_eq!(chirp().samples(), chirp().samples());
}

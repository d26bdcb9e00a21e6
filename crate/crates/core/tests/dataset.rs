use proptest::prelude::*;
use risloc::dataset::{generate_dataset, load_csv, meta_path, save_csv, split};
use risloc::physics::RisConfig;
use risloc::probing::{build_sector_codebook, SectorCodebook, DEFAULT_SPAN};
use risloc::Error;

fn codebook(cfg: &RisConfig) -> SectorCodebook {
    build_sector_codebook(cfg, 4, DEFAULT_SPAN).unwrap()
}

#[test]
fn csv_round_trip_preserves_values() {
    let cfg = RisConfig::default();
    let ds = generate_dataset(&cfg, &codebook(&cfg), 0.5, 1, 1.0, 7).unwrap();
    assert_eq!(ds.len(), 181);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.csv");
    save_csv(&ds, &path, 4).unwrap();
    assert!(meta_path(&path).is_file());
    let back = load_csv(&path, 4).unwrap();
    assert_eq!(back.len(), 181);
    assert_eq!(back.meta, ds.meta);
    for (a, b) in ds.samples.iter().zip(&back.samples) {
        assert!((a.theta_deg - b.theta_deg).abs() <= 1e-6);
        for (p, q) in a.features.powers_dbm.iter().zip(&b.features.powers_dbm) {
            assert!((p - q).abs() <= 1e-6);
        }
    }
}

#[test]
fn generation_is_reproducible_and_ordered() {
    let cfg = RisConfig::default();
    let cb = codebook(&cfg);
    let a = generate_dataset(&cfg, &cb, 1.0, 3, 1.0, 42).unwrap();
    let b = generate_dataset(&cfg, &cb, 1.0, 3, 1.0, 42).unwrap();
    assert_eq!(a.to_csv_string(4), b.to_csv_string(4));
    let c = generate_dataset(&cfg, &cb, 1.0, 3, 1.0, 43).unwrap();
    assert_ne!(a.to_csv_string(4), c.to_csv_string(4));
    assert_eq!(a.len(), 91 * 3);
    assert!(a.labels().windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn zero_noise_repeats_are_identical() {
    let cfg = RisConfig::default();
    let ds = generate_dataset(&cfg, &codebook(&cfg), 10.0, 3, 0.0, 1).unwrap();
    for chunk in ds.samples.chunks(3) {
        assert_eq!(chunk[0], chunk[1]);
        assert_eq!(chunk[1], chunk[2]);
    }
}

#[test]
fn bad_inputs_are_rejected() {
    let cfg = RisConfig::default();
    let cb = codebook(&cfg);
    assert!(matches!(
        generate_dataset(&cfg, &cb, 0.5, 1, -1.0, 1),
        Err(Error::Domain(_))
    ));
    assert!(generate_dataset(&cfg, &cb, 0.0, 1, 1.0, 1).is_err());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(
        &path,
        "p_s0_dbm,p_s1_dbm,p_s2_dbm,p_s3_dbm,theta_deg\n1,2,3,x,5\n",
    )
    .unwrap();
    match load_csv(&path, 4) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
        other => panic!("expected parse error, got {other:?}"),
    }
    std::fs::write(&path, "p_s0_dbm,p_s1_dbm,p_s2_dbm,p_s3_dbm,theta_deg\n").unwrap();
    assert!(matches!(load_csv(&path, 4), Err(Error::Parse { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn split_partitions_without_loss(frac in 0.05f64..0.95, seed in any::<u64>()) {
        let cfg = RisConfig::default();
        let ds = generate_dataset(&cfg, &codebook(&cfg), 5.0, 2, 1.0, 3).unwrap();
        let (train, test) = split(&ds, frac, seed).unwrap();
        prop_assert_eq!(train.len() + test.len(), ds.len());
        prop_assert!(!train.is_empty() && !test.is_empty());
        let mut all: Vec<String> = train.samples.iter().chain(&test.samples)
            .map(|s| format!("{:?}", s)).collect();
        let mut orig: Vec<String> = ds.samples.iter().map(|s| format!("{:?}", s)).collect();
        all.sort();
        orig.sort();
        prop_assert_eq!(all, orig);
    }
}

use sehs_tf::*;

#[test]
fn raw_roundtrip_and_png() {
    let cfg = WsstConfig {
        image_size: [20, 30],
        ..Default::default()
    };
    let x: Vec<f64> = (0..500).map(|i| (i as f64 * 0.3).sin()).collect();
    let img = signal_to_image(&x, 0.01, &cfg, Some("trace-7".into())).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("img.f32");
    write_image(&img, &raw).unwrap();
    assert_eq!(std::fs::metadata(&raw).unwrap().len(), 4 * 600);
    let back = read_image(&raw).unwrap();
    assert_eq!(back, TfImage { duration: back.duration, ..img.clone() });
    assert!((back.duration - 5.0).abs() < 1e-12);
    let png_path = dir.path().join("img.png");
    write_png(&img, &png_path).unwrap();
    assert_eq!(&std::fs::read(&png_path).unwrap()[1..4], b"PNG");
}

#[test]
fn truncated_raw_rejected() {
    let cfg = WsstConfig {
        image_size: [8, 8],
        freq_bins: 32,
        n_scales: 16,
        ..Default::default()
    };
    let x: Vec<f64> = (0..300).map(|i| (i as f64 * 0.2).sin()).collect();
    let img = signal_to_image(&x, 0.01, &cfg, None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("a.f32");
    write_image(&img, &raw).unwrap();
    std::fs::write(&raw, [0u8; 10]).unwrap();
    assert!(matches!(read_image(&raw), Err(TfError::Format(_))));
}

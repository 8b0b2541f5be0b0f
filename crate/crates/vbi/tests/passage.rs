use rustfft::{num_complex::Complex, FftPlanner};
use sehs_vbi::passage::{simulate_passage_with, trace_length};
use sehs_vbi::*;

fn bridge() -> BeamSystem {
    assemble_beam(&BeamModel::reference(), None).unwrap()
}

#[test]
fn quasi_static_contact_forces_carry_vehicle_weight() {
    let sys = bridge();
    let mut v = VehicleModel::reference();
    v.speed = 1.0;
    let (_, h) =
        simulate_passage_with(&sys, &v, &RoadProfile::smooth(), 0.005, 12.5, &SimOptions::default()).unwrap();
    let both: Vec<f64> = h
        .forces
        .iter()
        .zip(&h.on_bridge)
        .filter(|(_, on)| on[0] && on[1])
        .map(|(f, _)| f[0] + f[1])
        .collect();
    assert!(both.len() > 1000);
    let mean = both.iter().sum::<f64>() / both.len() as f64;
    let weight = v.total_mass() * GRAVITY;
    assert!((mean - weight).abs() / weight < 0.01, "{mean} vs {weight}");
}

fn magnitude_spectrum(x: &[f64], n: usize) -> Vec<f64> {
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&a| Complex::new(a, 0.0)).collect();
    buf.resize(n, Complex::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf[..n / 2].iter().map(|c| c.norm()).collect()
}

fn has_local_max_near(mag: &[f64], df: f64, f0: f64, tol: f64) -> bool {
    let lo = ((f0 - tol) / df).ceil() as usize;
    let hi = ((f0 + tol) / df).floor() as usize;
    (lo.max(1)..=hi).any(|k| mag[k] > mag[k - 1] && mag[k] > mag[k + 1])
}

fn averaged_spectrum(sensor: f64, n: usize, dt: f64) -> Vec<f64> {
    let sys = bridge();
    let v = VehicleModel::reference();
    let mut avg = vec![0.0; n / 2];
    for seed in 0..10 {
        let road = generate_road_profile(RoadClass::A, 40.0, seed).unwrap();
        let rec = simulate_passage(&sys, &v, &road, dt, sensor).unwrap();
        for (a, m) in avg.iter_mut().zip(magnitude_spectrum(&rec.accel, n)) {
            *a += m / 10.0;
        }
    }
    avg
}

#[test]
fn midspan_spectrum_peaks_at_first_mode() {
    let (n, dt) = (8192, 0.001);
    let avg = averaged_spectrum(12.5, n, dt);
    let df = 1.0 / (n as f64 * dt);
    assert!(has_local_max_near(&avg, df, 4.8, 0.3));
}

/// Mid-span is a node of the antisymmetric second mode, so the 19.1 Hz
/// line is absent from mid-span records.
#[test]
#[ignore = "mid-span is a nodal point of mode 2; no spectral peak near 19.1 Hz there"]
fn midspan_spectrum_peaks_at_second_mode() {
    let (n, dt) = (8192, 0.001);
    let avg = averaged_spectrum(12.5, n, dt);
    let df = 1.0 / (n as f64 * dt);
    assert!(has_local_max_near(&avg, df, 19.1, 0.3));
}

#[test]
fn quarter_span_spectrum_shows_second_mode() {
    let (n, dt) = (8192, 0.001);
    let avg = averaged_spectrum(6.25, n, dt);
    let df = 1.0 / (n as f64 * dt);
    let band = |lo: f64, hi: f64| -> f64 {
        avg[(lo / df) as usize..(hi / df) as usize].iter().cloned().fold(0.0, f64::max)
    };
    assert!(band(17.0, 21.0) > 2.0 * band(12.0, 15.0));
    assert!(has_local_max_near(&avg, df, 4.8, 0.3));
}

#[test]
fn passage_is_bitwise_deterministic() {
    let sys = bridge();
    let vs = sample_vehicle_params(2, &VehicleRanges::default(), 99).unwrap();
    let road = generate_road_profile(RoadClass::B, 40.0, 5).unwrap();
    let a = simulate_passage(&sys, &vs[0], &road, 0.001, 12.5).unwrap();
    let b = simulate_passage(&sys, &vs[0], &road, 0.001, 12.5).unwrap();
    assert_eq!(a, b);
    let other = generate_road_profile(RoadClass::B, 40.0, 6).unwrap();
    let c = simulate_passage(&sys, &vs[0], &other, 0.001, 12.5).unwrap();
    assert_ne!(a.accel, c.accel);
    assert_eq!(a.accel.len(), trace_length(25.0, &vs[0], 0.001));
}

#[test]
fn tire_damping_switch_changes_response_slightly() {
    let sys = bridge();
    let v = VehicleModel::reference();
    let road = generate_road_profile(RoadClass::A, 40.0, 2).unwrap();
    let on = simulate_passage_with(&sys, &v, &road, 0.001, 12.5, &SimOptions::default()).unwrap().0;
    let opts = SimOptions {
        tire_damping: false,
        ..Default::default()
    };
    let off = simulate_passage_with(&sys, &v, &road, 0.001, 12.5, &opts).unwrap().0;
    let rms = |x: &[f64]| (x.iter().map(|a| a * a).sum::<f64>() / x.len() as f64).sqrt();
    let diff: Vec<f64> = on.accel.iter().zip(&off.accel).map(|(a, b)| a - b).collect();
    assert!(rms(&diff) > 0.0);
    assert!(rms(&diff) < 0.1 * rms(&on.accel));
}

#[test]
fn damaged_state_is_labelled() {
    let crack = CrackSpec::new(12.5, 0.1);
    let sys = assemble_beam(&BeamModel::reference(), Some(&crack)).unwrap();
    let rec = simulate_passage(&sys, &VehicleModel::reference(), &RoadProfile::smooth(), 0.001, 12.5).unwrap();
    assert_eq!(rec.state, BridgeState::Damaged(crack));
}

#[test]
fn simulated_passage_roundtrips_through_csv() {
    let sys = assemble_beam(&BeamModel::reference().with_elements(40), None).unwrap();
    let road = generate_road_profile(RoadClass::A, 40.0, 8).unwrap();
    let mut rec = simulate_passage(&sys, &VehicleModel::reference(), &road, 0.002, 12.5).unwrap();
    rec.id = Some("hn-0008".into());
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("hn-0008.csv");
    io::write_passage(&rec, &p).unwrap();
    let back = io::read_passage(&p).unwrap();
    assert_eq!(back.accel.len(), rec.accel.len());
    for (a, b) in back.accel.iter().zip(&rec.accel) {
        assert!((a - b).abs() <= 1e-15 * a.abs().max(1e-300) * 10.0);
    }
    assert_eq!(back.vehicle, rec.vehicle);
    assert_eq!(back.state, rec.state);
}

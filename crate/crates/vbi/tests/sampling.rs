use proptest::prelude::*;
use rustfft::{num_complex::Complex, FftPlanner};
use sehs_vbi::*;

/// One-sided Welch PSD with a Hann window and 50% overlap.
fn welch(x: &[f64], dx: f64, seg: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..seg)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / seg as f64).cos())
        .collect();
    let u: f64 = w.iter().map(|v| v * v).sum();
    let fft = FftPlanner::new().plan_fft_forward(seg);
    let mut acc = vec![0.0; seg / 2 + 1];
    let mut count = 0;
    let mut start = 0;
    while start + seg <= x.len() {
        let mut buf: Vec<Complex<f64>> = (0..seg).map(|i| Complex::new(x[start + i] * w[i], 0.0)).collect();
        fft.process(&mut buf);
        for (k, a) in acc.iter_mut().enumerate() {
            let scale = if k == 0 || k == seg / 2 { 1.0 } else { 2.0 };
            *a += scale * buf[k].norm_sqr() * dx / u;
        }
        count += 1;
        start += seg / 2;
    }
    acc.iter().map(|a| a / count as f64).collect()
}

#[test]
fn class_b_psd_near_reference_frequency() {
    let dx = 0.025;
    let len = 1000.0;
    let n = (len / dx) as usize;
    let seg = 8000;
    let dn = 1.0 / (seg as f64 * dx);
    let mut band_mean = 0.0;
    for seed in 0..20 {
        let road = generate_road_profile(RoadClass::B, len, seed).unwrap();
        let x: Vec<f64> = (0..n).map(|i| road.height(i as f64 * dx)).collect();
        let p = welch(&x, dx, seg);
        let (lo, hi) = ((0.06 / dn).round() as usize, (0.14 / dn).round() as usize);
        band_mean += p[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64 / 20.0;
    }
    let target = 64e-6;
    assert!(band_mean > target / 1.5 && band_mean < target * 1.5, "{band_mean:e}");
}

#[test]
fn lhs_reproducible_under_seed() {
    let r = VehicleRanges::default();
    let a = sample_vehicle_params(500, &r, 7).unwrap();
    let b = sample_vehicle_params(500, &r, 7).unwrap();
    let c = sample_vehicle_params(500, &r, 8).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

fn strata(xs: &[f64], lo: f64, hi: f64) -> Vec<usize> {
    let n = xs.len();
    let mut s: Vec<usize> = xs
        .iter()
        .map(|x| (((x - lo) / (hi - lo) * n as f64).floor() as usize).min(n - 1))
        .collect();
    s.sort_unstable();
    s
}

fn ks_uniform(xs: &[f64], lo: f64, hi: f64) -> f64 {
    let mut u: Vec<f64> = xs.iter().map(|x| (x - lo) / (hi - lo)).collect();
    u.sort_by(f64::total_cmp);
    let n = u.len() as f64;
    u.iter()
        .enumerate()
        .map(|(i, &v)| (v - i as f64 / n).abs().max(((i + 1) as f64 / n - v).abs()))
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lhs_one_sample_per_stratum(n in 1usize..200, seed in any::<u64>()) {
        let r = VehicleRanges::default();
        let vs = sample_vehicle_params(n, &r, seed).unwrap();
        let expect: Vec<usize> = (0..n).collect();
        let dims: [(Vec<f64>, (f64, f64)); 4] = [
            (vs.iter().map(|v| v.body_mass).collect(), r.mass),
            (vs.iter().map(|v| v.speed).collect(), r.speed),
            (vs.iter().map(|v| v.axle_spacing()).collect(), r.axle_spacing),
            (vs.iter().map(|v| v.axle_offsets[0] / v.axle_spacing()).collect(), r.front_ratio),
        ];
        for (xs, (lo, hi)) in dims.iter() {
            prop_assert_eq!(strata(xs, *lo, *hi), expect.clone());
            prop_assert!(ks_uniform(xs, *lo, *hi) < 1.0 / n as f64 + 1e-12);
        }
        for v in &vs {
            prop_assert_eq!(v.suspension_stiffness, [27_500.0; 2]);
            prop_assert_eq!(v.tire_stiffness, [1.5e5; 2]);
        }
    }

    #[test]
    fn road_profile_seed_determinism(seed in any::<u64>()) {
        let a = generate_road_profile(RoadClass::A, 50.0, seed).unwrap();
        let b = generate_road_profile(RoadClass::A, 50.0, seed).unwrap();
        prop_assert_eq!(&a, &b);
        for h in &a.harmonics {
            prop_assert!(h.amplitude >= 0.0);
            prop_assert!(h.phase >= 0.0 && h.phase < 2.0 * std::f64::consts::PI);
        }
    }
}

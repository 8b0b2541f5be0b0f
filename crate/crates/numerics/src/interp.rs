/// Linear interpolation of uniformly sampled data starting at `t = 0`.
/// Values outside the sampled span are clamped to the end samples.
pub fn lerp_uniform(samples: &[f64], dt: f64, t: f64) -> f64 {
    match samples.len() {
        0 => 0.0,
        1 => samples[0],
        n => {
            let s = t / dt;
            if s <= 0.0 {
                return samples[0];
            }
            let i = s.floor() as usize;
            if i >= n - 1 {
                return samples[n - 1];
            }
            let f = s - i as f64;
            samples[i] + f * (samples[i + 1] - samples[i])
        }
    }
}

/// Trapezoidal integral of uniformly spaced samples.
pub fn trapezoid(samples: &[f64], dt: f64) -> f64 {
    if samples.len() < 2 {
        return 0.0;
    }
    let inner: f64 = samples[1..samples.len() - 1].iter().sum();
    dt * (inner + 0.5 * (samples[0] + samples[samples.len() - 1]))
}

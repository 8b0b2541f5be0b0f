//! Adaptive Dormand–Prince 5(4) integration.

use crate::{NumericsError, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrator state; the accepted step size carries over between calls so
/// a long record can be integrated one sample interval at a time.
#[derive(Debug, Clone)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub h_min: f64,
    pub max_steps: usize,
    h: f64,
    k: [Vec<f64>; 7],
    y_stage: Vec<f64>,
    y_new: Vec<f64>,
    accepted: usize,
    rejected: usize,
}

impl Dopri5 {
    pub fn new(dim: usize, rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            h_min: 1e-14,
            max_steps: 1_000_000,
            h: 0.0,
            k: std::array::from_fn(|_| vec![0.0; dim]),
            y_stage: vec![0.0; dim],
            y_new: vec![0.0; dim],
            accepted: 0,
            rejected: 0,
        }
    }

    pub fn accepted_steps(&self) -> usize {
        self.accepted
    }

    pub fn rejected_steps(&self) -> usize {
        self.rejected
    }

    /// Advances `y` from `t0` to exactly `t1` (`t1 > t0`).
    pub fn integrate<F>(&mut self, mut f: F, t0: f64, t1: f64, y: &mut [f64]) -> Result<()>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let n = y.len();
        if n != self.y_new.len() {
            return Err(NumericsError::Dimension(format!(
                "state has {n} entries, integrator was built for {}",
                self.y_new.len()
            )));
        }
        if !(t1 > t0) {
            return Err(NumericsError::InvalidArgument(format!("empty interval [{t0}, {t1}]")));
        }
        let span = t1 - t0;
        if self.h <= 0.0 {
            self.h = span;
        }
        let mut t = t0;
        f(t, y, &mut self.k[0]);
        let mut steps = 0;
        while t < t1 {
            steps += 1;
            if steps > self.max_steps {
                return Err(NumericsError::SearchFailed(format!(
                    "step budget exhausted at t = {t}"
                )));
            }
            let last = t + self.h >= t1 - 1e-12 * span;
            let h = if last { t1 - t } else { self.h };
            self.stages(&mut f, t, h, y);

            let mut err: f64 = 0.0;
            for i in 0..n {
                let e = h
                    * (E1 * self.k[0][i]
                        + E3 * self.k[2][i]
                        + E4 * self.k[3][i]
                        + E5 * self.k[4][i]
                        + E6 * self.k[5][i]
                        + E7 * self.k[6][i]);
                let sc = self.atol + self.rtol * y[i].abs().max(self.y_new[i].abs());
                err += (e / sc).powi(2);
            }
            let err = (err / n as f64).sqrt();
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                t = if last { t1 } else { t + h };
                y.copy_from_slice(&self.y_new);
                self.k.swap(0, 6);
                self.accepted += 1;
                // Only grow the carried step from full steps; the clipped
                // final step says little about the solution's scale.
                if !last || h >= self.h {
                    self.h = h * factor;
                }
            } else {
                self.rejected += 1;
                self.h = h * factor.min(1.0);
                if self.h < self.h_min * span.max(1.0) {
                    return Err(NumericsError::SearchFailed(format!(
                        "step size underflow ({:e}) at t = {t}",
                        self.h
                    )));
                }
            }
        }
        Ok(())
    }

    fn stages<F>(&mut self, f: &mut F, t: f64, h: f64, y: &[f64])
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let n = y.len();
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let ys = &mut self.y_stage;
        for i in 0..n {
            ys[i] = y[i] + h * A21 * k1[i];
        }
        f(t + C2 * h, ys, k2);
        for i in 0..n {
            ys[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        f(t + C3 * h, ys, k3);
        for i in 0..n {
            ys[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(t + C4 * h, ys, k4);
        for i in 0..n {
            ys[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(t + C5 * h, ys, k5);
        for i in 0..n {
            ys[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        f(t + h, ys, k6);
        for i in 0..n {
            self.y_new[i] =
                y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        f(t + h, &self.y_new, k7);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let mut s = Dopri5::new(1, 1e-10, 1e-12);
        let mut y = [1.0];
        s.integrate(|_, y, d| d[0] = -2.0 * y[0], 0.0, 1.5, &mut y).unwrap();
        assert!((y[0] - (-3.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn harmonic_oscillator_over_many_calls() {
        let mut s = Dopri5::new(2, 1e-9, 1e-12);
        let mut y = [1.0, 0.0];
        let w = 2.0 * std::f64::consts::PI;
        let dt = 1e-3;
        for i in 0..1000 {
            let t0 = i as f64 * dt;
            s.integrate(|_, y, d| {
                d[0] = y[1];
                d[1] = -w * w * y[0];
            }, t0, t0 + dt, &mut y)
            .unwrap();
        }
        assert!((y[0] - 1.0).abs() < 1e-7);
        assert!(y[1].abs() < 1e-6);
    }

    #[test]
    fn forced_polynomial_is_exact() {
        // y' = 3t², y(0) = 0 → t³, within a fifth-order method's exact class.
        let mut s = Dopri5::new(1, 1e-6, 1e-9);
        let mut y = [0.0];
        s.integrate(|t, _, d| d[0] = 3.0 * t * t, 0.0, 2.0, &mut y).unwrap();
        assert!((y[0] - 8.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_reversed_interval() {
        let mut s = Dopri5::new(1, 1e-6, 1e-9);
        let mut y = [0.0];
        assert!(s.integrate(|_, _, d| d[0] = 0.0, 1.0, 1.0, &mut y).is_err());
    }
}

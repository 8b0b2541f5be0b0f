//! Newmark-β stepping for `M ü + C u̇ + K u = f(t)` with banded matrices.

use sehs_numerics::band::BandCholesky;
use sehs_numerics::SymBandMatrix;

use crate::Result;

/// Newmark parameters; the default is the average-acceleration rule.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NewmarkParams {
    pub gamma: f64,
    pub beta: f64,
}

impl Default for NewmarkParams {
    fn default() -> Self {
        Self {
            gamma: 0.5,
            beta: 0.25,
        }
    }
}

/// State vectors at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub disp: Vec<f64>,
    pub vel: Vec<f64>,
    pub acc: Vec<f64>,
}

impl State {
    pub fn zeros(n: usize) -> Self {
        Self {
            disp: vec![0.0; n],
            vel: vec![0.0; n],
            acc: vec![0.0; n],
        }
    }
}

/// Pre-factored Newmark integrator for a fixed time step.
#[derive(Debug, Clone)]
pub struct Newmark {
    m: SymBandMatrix,
    c: SymBandMatrix,
    k: SymBandMatrix,
    effective: BandCholesky,
    dt: f64,
    p: NewmarkParams,
    scratch: Vec<f64>,
    scratch2: Vec<f64>,
}

impl Newmark {
    pub fn new(
        m: SymBandMatrix,
        c: SymBandMatrix,
        k: SymBandMatrix,
        dt: f64,
        p: NewmarkParams,
    ) -> Result<Self> {
        let a0 = 1.0 / (p.beta * dt * dt);
        let a1 = p.gamma / (p.beta * dt);
        let kc = SymBandMatrix::linear_combination(1.0, &k, a1, &c)?;
        let eff = SymBandMatrix::linear_combination(1.0, &kc, a0, &m)?;
        let effective = eff.cholesky()?;
        let n = m.dim();
        Ok(Self {
            m,
            c,
            k,
            effective,
            dt,
            p,
            scratch: vec![0.0; n],
            scratch2: vec![0.0; n],
        })
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Consistent initial acceleration `M⁻¹ (f − C v − K u)`.
    pub fn initial_state(&self, disp: Vec<f64>, vel: Vec<f64>, force: &[f64]) -> Result<State> {
        let n = self.dim();
        let mut rhs = force.to_vec();
        let ku = self.k.mul_vec(&disp);
        let cv = self.c.mul_vec(&vel);
        for i in 0..n {
            rhs[i] -= ku[i] + cv[i];
        }
        self.m.cholesky()?.solve_in_place(&mut rhs);
        Ok(State {
            disp,
            vel,
            acc: rhs,
        })
    }

    /// Displacements at the next step for load `force` (state untouched).
    /// Split from [`Newmark::finish`] so a caller can iterate on the load.
    pub fn predict(&mut self, state: &State, force: &[f64], out_disp: &mut [f64]) {
        let (g, b, dt) = (self.p.gamma, self.p.beta, self.dt);
        let a0 = 1.0 / (b * dt * dt);
        let a1 = g / (b * dt);
        let a2 = 1.0 / (b * dt);
        let a3 = 1.0 / (2.0 * b) - 1.0;
        let a4 = g / b - 1.0;
        let a5 = dt / 2.0 * (g / b - 2.0);
        let n = self.dim();
        for i in 0..n {
            self.scratch[i] = a0 * state.disp[i] + a2 * state.vel[i] + a3 * state.acc[i];
            self.scratch2[i] = a1 * state.disp[i] + a4 * state.vel[i] + a5 * state.acc[i];
        }
        self.m.mul_vec_into(&self.scratch, out_disp);
        let mut tmp = std::mem::take(&mut self.scratch);
        self.c.mul_vec_into(&self.scratch2, &mut tmp);
        for i in 0..n {
            out_disp[i] += tmp[i] + force[i];
        }
        self.scratch = tmp;
        self.effective.solve_in_place(out_disp);
    }

    /// Velocity and acceleration consistent with `new_disp`; advances `state`.
    pub fn finish(&self, state: &mut State, new_disp: &[f64]) {
        let (g, b, dt) = (self.p.gamma, self.p.beta, self.dt);
        for i in 0..self.dim() {
            let acc = (new_disp[i] - state.disp[i]) / (b * dt * dt)
                - state.vel[i] / (b * dt)
                - (1.0 / (2.0 * b) - 1.0) * state.acc[i];
            state.vel[i] += dt * ((1.0 - g) * state.acc[i] + g * acc);
            state.acc[i] = acc;
            state.disp[i] = new_disp[i];
        }
    }

    /// Next velocity and acceleration for a trial displacement without
    /// mutating the state.
    pub fn trial_rates(&self, state: &State, new_disp: &[f64], vel: &mut [f64], acc: &mut [f64]) {
        let (g, b, dt) = (self.p.gamma, self.p.beta, self.dt);
        for i in 0..self.dim() {
            let a = (new_disp[i] - state.disp[i]) / (b * dt * dt)
                - state.vel[i] / (b * dt)
                - (1.0 / (2.0 * b) - 1.0) * state.acc[i];
            acc[i] = a;
            vel[i] = state.vel[i] + dt * ((1.0 - g) * state.acc[i] + g * a);
        }
    }

    pub fn step(&mut self, state: &mut State, force: &[f64]) {
        let mut next = vec![0.0; self.dim()];
        self.predict(state, force, &mut next);
        self.finish(state, &next);
    }

    /// Kinetic plus strain energy.
    pub fn mechanical_energy(&self, state: &State) -> f64 {
        let mv = self.m.mul_vec(&state.vel);
        let ku = self.k.mul_vec(&state.disp);
        0.5 * (dot(&state.vel, &mv) + dot(&state.disp, &ku))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sdof(m: f64, c: f64, k: f64) -> (SymBandMatrix, SymBandMatrix, SymBandMatrix) {
        let one = |v: f64| {
            SymBandMatrix::from_dense(&nalgebra::DMatrix::from_element(1, 1, v), 0, 0.0).unwrap()
        };
        (one(m), one(c), one(k))
    }

    #[test]
    fn undamped_oscillator_period_and_amplitude() {
        let (m, c, k) = sdof(1.0, 0.0, (2.0 * std::f64::consts::PI).powi(2));
        let dt = 1e-3;
        let mut nm = Newmark::new(m, c, k, dt, NewmarkParams::default()).unwrap();
        let mut s = nm.initial_state(vec![1.0], vec![0.0], &[0.0]).unwrap();
        let e0 = nm.mechanical_energy(&s);
        for _ in 0..1000 {
            nm.step(&mut s, &[0.0]);
        }
        // one period later: back to ~1 with tiny period elongation
        assert!((s.disp[0] - 1.0).abs() < 1e-3);
        assert!((nm.mechanical_energy(&s) - e0).abs() / e0 < 1e-10);
    }

    #[test]
    fn constant_load_settles_to_static() {
        let (m, c, k) = sdof(1.0, 2.0 * 0.2 * 10.0, 100.0);
        let mut nm = Newmark::new(m, c, k, 1e-3, NewmarkParams::default()).unwrap();
        let mut s = nm.initial_state(vec![0.0], vec![0.0], &[5.0]).unwrap();
        for _ in 0..20_000 {
            nm.step(&mut s, &[5.0]);
        }
        assert!((s.disp[0] - 0.05).abs() < 1e-9);
    }
}

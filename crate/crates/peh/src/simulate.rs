//! Time-domain voltage response and harvested energy.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sehs_numerics::ode::Dopri5;
use sehs_vbi::PassageRecord;

use crate::modal::ReducedPeh;
use crate::{PehError, Result};

pub const RTOL: f64 = 1e-6;
pub const ATOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoltageTrace {
    pub dt: f64,
    pub volts: Vec<f64>,
    pub load_resistance: f64,
    pub design_id: String,
    pub source_id: Option<String>,
}

impl VoltageTrace {
    pub fn duration(&self) -> f64 {
        self.dt * self.volts.len().saturating_sub(1) as f64
    }
}

/// Full state `[η, η̇, v]` at every input sample, zero initial state, the
/// input linearly interpolated between samples.
pub fn simulate_states(reduced: &ReducedPeh, accel: &[f64], dt: f64) -> Result<Vec<Vec<f64>>> {
    if !(dt > 0.0) {
        return Err(PehError::Domain(format!("dt must be positive, got {dt}")));
    }
    let k = reduced.order();
    let n = 2 * k + 1;
    let w2 = reduced.stiffness();
    let c = &reduced.damping;
    let th = &reduced.theta;
    let f = &reduced.forcing;
    let cp = reduced.capacitance;
    let rc = 1.0 / (cp * reduced.load_resistance);

    let mut solver = Dopri5::new(n, RTOL, ATOL);
    let mut z = vec![0.0; n];
    let mut out = Vec::with_capacity(accel.len());
    out.push(z.clone());
    for i in 1..accel.len() {
        let (a0, a1) = (accel[i - 1], accel[i]);
        let t0 = (i - 1) as f64 * dt;
        let t1 = i as f64 * dt;
        let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
            let s = (t - t0) / dt;
            let a = a0 + (a1 - a0) * s;
            let v = y[2 * k];
            let mut q = 0.0;
            for m in 0..k {
                let (eta, deta) = (y[m], y[k + m]);
                dy[m] = deta;
                dy[k + m] = -w2[m] * eta - c[m] * deta + th[m] * v + f[m] * a;
                q += th[m] * deta;
            }
            dy[2 * k] = -q / cp - rc * v;
        };
        solver.integrate(rhs, t0, t1, &mut z).map_err(|e| PehError::Integration {
            design: reduced.design_id.clone(),
            message: e.to_string(),
        })?;
        out.push(z.clone());
    }
    Ok(out)
}

pub fn simulate_voltage_samples(
    reduced: &ReducedPeh,
    accel: &[f64],
    dt: f64,
    source_id: Option<String>,
) -> Result<VoltageTrace> {
    let k = reduced.order();
    let states = simulate_states(reduced, accel, dt)?;
    Ok(VoltageTrace {
        dt,
        volts: states.iter().map(|z| z[2 * k]).collect(),
        load_resistance: reduced.load_resistance,
        design_id: reduced.design_id.clone(),
        source_id,
    })
}

pub fn simulate_voltage(reduced: &ReducedPeh, passage: &PassageRecord) -> Result<VoltageTrace> {
    simulate_voltage_samples(reduced, &passage.accel, passage.dt, passage.id.clone())
}

fn lerp(trace: &VoltageTrace, t: f64) -> f64 {
    sehs_numerics::interp::lerp_uniform(&trace.volts, trace.dt, t)
}

/// `∫_{t1}^{t2} v²/R_l dt`, trapezoidal on the sample grid with linearly
/// interpolated end points.
pub fn harvested_energy(trace: &VoltageTrace, t1: f64, t2: f64) -> Result<f64> {
    let end = trace.duration();
    let slack = 1e-9 * trace.dt;
    if !(t1 < t2) || t1 < -slack || t2 > end + slack {
        return Err(PehError::Domain(format!(
            "energy window [{t1}, {t2}] outside trace span [0, {end}]"
        )));
    }
    let (t1, t2) = (t1.max(0.0), t2.min(end));
    let mut knots = vec![t1];
    let first = (t1 / trace.dt).floor() as usize + 1;
    let mut i = first;
    while (i as f64) * trace.dt < t2 - slack {
        if (i as f64) * trace.dt > t1 + slack {
            knots.push(i as f64 * trace.dt);
        }
        i += 1;
    }
    knots.push(t2);
    let mut e = 0.0;
    let mut prev = lerp(trace, knots[0]).powi(2);
    for w in knots.windows(2) {
        let next = lerp(trace, w[1]).powi(2);
        e += 0.5 * (prev + next) * (w[1] - w[0]);
        prev = next;
    }
    Ok(e / trace.load_resistance)
}

pub fn total_energy(trace: &VoltageTrace) -> f64 {
    if trace.volts.len() < 2 {
        return 0.0;
    }
    sehs_numerics::interp::trapezoid(
        &trace.volts.iter().map(|v| v * v).collect::<Vec<_>>(),
        trace.dt,
    ) / trace.load_resistance
}

#[derive(Serialize)]
struct Sidecar<'a> {
    dt: f64,
    samples: usize,
    load_resistance: f64,
    design_id: &'a str,
    source_id: Option<&'a str>,
    energy_j: f64,
}

/// CSV `t,volts` plus a JSON sidecar next to it.
pub fn write_voltage(trace: &VoltageTrace, csv_path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(csv_path)?;
    w.write_record(["t", "volts"])?;
    for (i, v) in trace.volts.iter().enumerate() {
        w.write_record([format!("{:e}", i as f64 * trace.dt), format!("{v:e}")])?;
    }
    w.flush()?;
    let meta = Sidecar {
        dt: trace.dt,
        samples: trace.volts.len(),
        load_resistance: trace.load_resistance,
        design_id: &trace.design_id,
        source_id: trace.source_id.as_deref(),
        energy_j: total_energy(trace),
    };
    let mut f = BufWriter::new(File::create(csv_path.with_extension("json"))?);
    serde_json::to_writer_pretty(&mut f, &meta)?;
    f.write_all(b"\n")?;
    Ok(())
}

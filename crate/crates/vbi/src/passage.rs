//! Coupled vehicle–bridge time stepping for one crossing.

use serde::{Deserialize, Serialize};
use sehs_numerics::SymBandMatrix;

use crate::beam::{BeamSystem, CrackSpec};
use crate::newmark::{Newmark, NewmarkParams, State};
use crate::road::{RoadClass, RoadProfile};
use crate::vehicle::VehicleModel;
use crate::{Result, VbiError};

/// Minimum number of time steps the front axle must spend on the bridge.
pub const MIN_STEPS_ON_BRIDGE: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    /// Include the tire dampers in the contact force.
    pub tire_damping: bool,
    /// Relative tolerance of the contact-force fixed point.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub newmark: NewmarkParams,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            tire_damping: true,
            tolerance: 1e-6,
            max_iterations: 100,
            newmark: NewmarkParams::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "lowercase")]
pub enum BridgeState {
    Healthy,
    Damaged(CrackSpec),
}

impl BridgeState {
    pub fn is_damaged(&self) -> bool {
        matches!(self, BridgeState::Damaged(_))
    }

    pub fn from_crack(crack: Option<&CrackSpec>) -> Self {
        match crack {
            Some(c) if c.severity > 0.0 => BridgeState::Damaged(*c),
            _ => BridgeState::Healthy,
        }
    }
}

/// Bridge acceleration at the sensor for one crossing. Externally recorded
/// traces carry no vehicle or road metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassageRecord {
    pub dt: f64,
    pub accel: Vec<f64>,
    pub sensor_location: f64,
    pub state: BridgeState,
    pub vehicle: Option<VehicleModel>,
    pub road_class: Option<RoadClass>,
    pub road_seed: Option<u64>,
    #[serde(default)]
    pub id: Option<String>,
}

impl PassageRecord {
    pub fn duration(&self) -> f64 {
        self.dt * self.accel.len().saturating_sub(1) as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(VbiError::Format(format!("dt must be positive, got {}", self.dt)));
        }
        if self.accel.iter().any(|a| !a.is_finite()) {
            return Err(VbiError::Format("non-finite acceleration sample".into()));
        }
        Ok(())
    }
}

/// Downward axle forces on the bridge per step; zero while an axle is off
/// the span.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContactHistory {
    pub forces: Vec<[f64; 2]>,
    pub on_bridge: Vec<[bool; 2]>,
    pub iterations: Vec<usize>,
}

/// Number of samples covering front-axle entry to rear-axle exit.
pub fn trace_length(span: f64, vehicle: &VehicleModel, dt: f64) -> usize {
    ((span + vehicle.axle_spacing()) / (vehicle.speed * dt)).ceil() as usize + 1
}

pub fn simulate_passage(
    system: &BeamSystem,
    vehicle: &VehicleModel,
    road: &RoadProfile,
    dt: f64,
    sensor_location: f64,
) -> Result<PassageRecord> {
    simulate_passage_with(system, vehicle, road, dt, sensor_location, &SimOptions::default())
        .map(|(r, _)| r)
}

pub fn simulate_passage_with(
    system: &BeamSystem,
    vehicle: &VehicleModel,
    road: &RoadProfile,
    dt: f64,
    sensor_location: f64,
    opts: &SimOptions,
) -> Result<(PassageRecord, ContactHistory)> {
    let span = system.model.span;
    if !(dt > 0.0) {
        return Err(VbiError::Domain(format!("dt must be positive, got {dt}")));
    }
    if !(sensor_location > 0.0 && sensor_location < span) {
        return Err(VbiError::Domain(format!(
            "sensor location {sensor_location} outside (0, {span})"
        )));
    }
    vehicle.validate()?;
    if span / (vehicle.speed * dt) < MIN_STEPS_ON_BRIDGE {
        return Err(VbiError::Domain(format!(
            "speed {} m/s with dt {dt} s gives fewer than {MIN_STEPS_ON_BRIDGE} steps on the bridge",
            vehicle.speed
        )));
    }

    let (mb, kb, cb) = system.banded()?;
    let nb = system.n_free();
    let mut bridge = Newmark::new(mb, cb, kb, dt, opts.newmark)?;
    let mut car = Newmark::new(
        dense4(&vehicle.mass_matrix())?,
        dense4(&vehicle.damping_matrix(opts.tire_damping))?,
        dense4(&vehicle.stiffness_matrix())?,
        dt,
        opts.newmark,
    )?;

    let steps = trace_length(span, vehicle, dt);
    let spacing = vehicle.axle_spacing();
    let static_loads = vehicle.static_axle_loads();
    let kt = vehicle.tire_stiffness;
    let ct = if opts.tire_damping { vehicle.tire_damping } else { [0.0; 2] };
    let sensor = system.shape_weights(sensor_location);

    let mut bs = State::zeros(nb);
    let mut vs = State::zeros(4);
    let mut accel = Vec::with_capacity(steps);
    let mut history = ContactHistory {
        forces: Vec::with_capacity(steps),
        on_bridge: Vec::with_capacity(steps),
        iterations: Vec::with_capacity(steps),
    };
    // Front axle sits on the support at t = 0, so the bridge starts at rest.
    accel.push(sensor.value(&bs.acc));
    history.forces.push([0.0; 2]);
    history.on_bridge.push([true, false]);
    history.iterations.push(0);

    let mut force = [0.0; 2];
    let mut fb = vec![0.0; nb];
    let mut ub = vec![0.0; nb];
    let mut ub_dot = vec![0.0; nb];
    let mut ub_acc = vec![0.0; nb];
    let mut fv = [0.0; 4];
    let mut uv = [0.0; 4];
    let mut uv_dot = [0.0; 4];
    let mut uv_acc = [0.0; 4];

    for step in 1..steps {
        let t = step as f64 * dt;
        let x = [vehicle.speed * t, vehicle.speed * t - spacing];
        let on = [x[0] >= 0.0 && x[0] <= span, x[1] >= 0.0 && x[1] <= span];
        let weights = [system.shape_weights(x[0]), system.shape_weights(x[1])];
        let mut road_hs = [(0.0, 0.0); 2];
        for a in 0..2 {
            if on[a] {
                road_hs[a] = road.height_and_slope(x[a]);
            }
        }
        for a in 0..2 {
            if !on[a] {
                force[a] = 0.0;
            }
        }

        let mut converged = false;
        let mut residual = f64::INFINITY;
        let mut iters = 0;
        while iters < opts.max_iterations {
            iters += 1;
            fb.iter_mut().for_each(|v| *v = 0.0);
            for a in 0..2 {
                if on[a] {
                    weights[a].scatter(-force[a], &mut fb);
                }
            }
            bridge.predict(&bs, &fb, &mut ub);
            bridge.trial_rates(&bs, &ub, &mut ub_dot, &mut ub_acc);

            let mut y = [0.0; 2];
            let mut y_dot = [0.0; 2];
            for a in 0..2 {
                if on[a] {
                    let (r, dr) = road_hs[a];
                    y[a] = weights[a].value(&ub) + r;
                    y_dot[a] = weights[a].value(&ub_dot)
                        + vehicle.speed * (weights[a].slope(&ub) + dr);
                }
            }
            fv[0] = 0.0;
            fv[1] = 0.0;
            for a in 0..2 {
                fv[2 + a] = kt[a] * y[a] + ct[a] * y_dot[a];
            }
            car.predict(&vs, &fv, &mut uv);
            car.trial_rates(&vs, &uv, &mut uv_dot, &mut uv_acc);

            let mut next = [0.0; 2];
            residual = 0.0;
            for a in 0..2 {
                if on[a] {
                    next[a] = static_loads[a]
                        - kt[a] * (uv[2 + a] - y[a])
                        - ct[a] * (uv_dot[2 + a] - y_dot[a]);
                }
                residual = residual.max((next[a] - force[a]).abs() / static_loads[a]);
            }
            force = next;
            if residual <= opts.tolerance {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(VbiError::Convergence {
                step,
                iterations: iters,
                residual,
            });
        }
        // Re-solve with the converged loads so both subsystems are consistent.
        fb.iter_mut().for_each(|v| *v = 0.0);
        for a in 0..2 {
            if on[a] {
                weights[a].scatter(-force[a], &mut fb);
            }
        }
        bridge.predict(&bs, &fb, &mut ub);
        bridge.finish(&mut bs, &ub);
        car.finish(&mut vs, &uv);

        accel.push(sensor.value(&bs.acc));
        history.forces.push(force);
        history.on_bridge.push(on);
        history.iterations.push(iters);
    }

    let record = PassageRecord {
        dt,
        accel,
        sensor_location,
        state: BridgeState::from_crack(system.crack.as_ref()),
        vehicle: Some(*vehicle),
        road_class: Some(road.class),
        road_seed: Some(road.seed),
        id: None,
    };
    Ok((record, history))
}

fn dense4(m: &nalgebra::Matrix4<f64>) -> Result<SymBandMatrix> {
    let d = nalgebra::DMatrix::from_iterator(4, 4, m.iter().copied());
    Ok(SymBandMatrix::from_dense(&d, 3, 0.0)?)
}

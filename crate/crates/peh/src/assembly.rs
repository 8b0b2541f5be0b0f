//! Isogeometric Kirchhoff–Love assembly of the clamped bimorph plate.
//!
//! Control variable `(i, j)` (along length, along width) has global index
//! `i·ny + j`. Clamping `w = ∂w/∂x = 0` at `x = 0` removes the first two
//! columns `i ∈ {0, 1}`, so free DOFs are the contiguous block from `2·ny`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sehs_numerics::quadrature::gauss_legendre;

use crate::bspline::KnotVector;
use crate::design::PehDesign;
use crate::{PehError, Result};

pub const DEGREE: usize = 3;
const GAUSS_POINTS: usize = DEGREE + 1;

/// Control-net resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mesh {
    pub nx: usize,
    pub ny: usize,
}

impl Mesh {
    pub fn new(nx: usize, ny: usize) -> Self {
        Self { nx, ny }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 8 || self.ny < 8 {
            return Err(PehError::Domain(format!(
                "control net {}×{} is below the 8×8 minimum",
                self.nx, self.ny
            )));
        }
        Ok(())
    }
}

impl Default for Mesh {
    fn default() -> Self {
        Self { nx: 16, ny: 16 }
    }
}

/// Assembled electromechanical matrices over the free control variables.
#[derive(Debug, Clone)]
pub struct PehSystem {
    pub design: PehDesign,
    pub mesh: Mesh,
    pub mass: DMatrix<f64>,
    pub stiffness: DMatrix<f64>,
    /// Θ: charge per unit control-variable deflection.
    pub coupling: DVector<f64>,
    /// F: inertial load per unit base acceleration.
    pub forcing: DVector<f64>,
    pub capacitance: f64,
    pub x_knots: KnotVector,
    pub y_knots: KnotVector,
}

impl PehSystem {
    pub fn n_free(&self) -> usize {
        self.mass.nrows()
    }

    /// `C = αM + βK`.
    pub fn damping(&self) -> DMatrix<f64> {
        &self.mass * self.design.damping_alpha + &self.stiffness * self.design.damping_beta
    }

    /// Plate deflection at physical point `(x, y)` for a free-DOF vector.
    pub fn deflection(&self, u: &[f64], x: f64, y: f64) -> f64 {
        let bx = self.x_knots.eval((x / self.design.length).clamp(0.0, 1.0));
        let by = self.y_knots.eval((y / self.design.width()).clamp(0.0, 1.0));
        let ny = self.mesh.ny;
        let offset = 2 * ny;
        let mut w = 0.0;
        for (a, nx) in bx.values.iter().enumerate() {
            let i = bx.first + a;
            if i < 2 {
                continue;
            }
            for (b, nyv) in by.values.iter().enumerate() {
                w += nx * nyv * u[i * ny + by.first + b - offset];
            }
        }
        w
    }
}

/// Bending stiffness `[D11, D12, D22, D66]` of a symmetric laminate.
fn bending_stiffness(design: &PehDesign, covered: bool) -> [f64; 4] {
    let hs = design.substrate_thickness();
    let qs = design.substrate.reduced_stiffness();
    let mut d = qs.map(|q| q * hs.powi(3) / 12.0);
    if covered {
        let hp = design.piezo_thickness();
        let z_in = hs / 2.0;
        let z_out = z_in + hp;
        let moment = 2.0 * (z_out.powi(3) - z_in.powi(3)) / 3.0;
        for (di, qp) in d.iter_mut().zip(design.piezo.reduced_stiffness()) {
            *di += qp * moment;
        }
    }
    d
}

fn areal_density(design: &PehDesign, covered: bool) -> f64 {
    let mut m = design.substrate.density * design.substrate_thickness();
    if covered {
        m += 2.0 * design.piezo.density * design.piezo_thickness();
    }
    m
}

pub fn assemble_peh(design: &PehDesign, mesh: Mesh) -> Result<PehSystem> {
    design.validate()?;
    mesh.validate()?;
    if design.substrate_thickness() <= 0.0 {
        return Err(PehError::Domain("substrate thickness must be positive".into()));
    }
    let breaks: Vec<f64> = if design.pzt_length_ratio < 1.0 {
        vec![design.pzt_length_ratio]
    } else {
        vec![]
    };
    let x_knots = KnotVector::with_breaks(mesh.nx, DEGREE, &breaks)?;
    let y_knots = KnotVector::open_uniform(mesh.ny, DEGREE)?;

    let (nx, ny) = (mesh.nx, mesh.ny);
    let n_all = nx * ny;
    let (len, wid) = (design.length, design.width());
    let (gp, gw) = gauss_legendre(GAUSS_POINTS);

    let mut k = DMatrix::<f64>::zeros(n_all, n_all);
    let mut m = DMatrix::<f64>::zeros(n_all, n_all);
    let mut theta = DVector::<f64>::zeros(n_all);
    let mut force = DVector::<f64>::zeros(n_all);

    let zbar = (design.substrate_thickness() + design.piezo_thickness()) / 2.0;
    let (e31, e32) = (design.piezo.e31, design.piezo.e32);
    let loc = (DEGREE + 1) * (DEGREE + 1);
    let mut idx = vec![0usize; loc];
    let mut nv = vec![0.0; loc];
    let mut bxx = vec![0.0; loc];
    let mut byy = vec![0.0; loc];
    let mut bxy = vec![0.0; loc];

    for &(_, x0, x1) in x_knots.spans().iter() {
        let mid = 0.5 * (x0 + x1);
        let covered = mid < design.pzt_length_ratio;
        let [d11, d12, d22, d66] = bending_stiffness(design, covered);
        let rho_h = areal_density(design, covered);
        for &(_, y0, y1) in y_knots.spans().iter() {
            for (qa, wa) in gp.iter().zip(&gw) {
                let xi = 0.5 * (x0 + x1) + 0.5 * (x1 - x0) * qa;
                let bx = x_knots.eval(xi);
                for (qb, wb) in gp.iter().zip(&gw) {
                    let eta = 0.5 * (y0 + y1) + 0.5 * (y1 - y0) * qb;
                    let by = y_knots.eval(eta);
                    let da = wa * wb * 0.25 * (x1 - x0) * (y1 - y0) * len * wid;
                    let mut c = 0;
                    for a in 0..=DEGREE {
                        for b in 0..=DEGREE {
                            idx[c] = (bx.first + a) * ny + by.first + b;
                            nv[c] = bx.values[a] * by.values[b];
                            bxx[c] = bx.d2[a] * by.values[b] / (len * len);
                            byy[c] = bx.values[a] * by.d2[b] / (wid * wid);
                            bxy[c] = 2.0 * bx.d1[a] * by.d1[b] / (len * wid);
                            c += 1;
                        }
                    }
                    for p in 0..loc {
                        // D·B_p
                        let t1 = d11 * bxx[p] + d12 * byy[p];
                        let t2 = d12 * bxx[p] + d22 * byy[p];
                        let t3 = d66 * bxy[p];
                        for q in 0..loc {
                            k[(idx[p], idx[q])] += da * (t1 * bxx[q] + t2 * byy[q] + t3 * bxy[q]);
                            m[(idx[p], idx[q])] += da * rho_h * nv[p] * nv[q];
                        }
                        force[idx[p]] -= da * rho_h * nv[p];
                        if covered {
                            theta[idx[p]] += da * zbar * (e31 * bxx[p] + e32 * byy[p]);
                        }
                    }
                }
            }
        }
    }

    if design.tip_mass > 0.0 {
        // Line mass along ξ = 1, where only the last column is non-zero.
        let i = nx - 1;
        for &(_, y0, y1) in y_knots.spans().iter() {
            for (qb, wb) in gp.iter().zip(&gw) {
                let eta = 0.5 * (y0 + y1) + 0.5 * (y1 - y0) * qb;
                let by = y_knots.eval(eta);
                let ds = wb * 0.5 * (y1 - y0);
                for a in 0..=DEGREE {
                    let ia = i * ny + by.first + a;
                    force[ia] -= design.tip_mass * ds * by.values[a];
                    for b in 0..=DEGREE {
                        let ib = i * ny + by.first + b;
                        m[(ia, ib)] += design.tip_mass * ds * by.values[a] * by.values[b];
                    }
                }
            }
        }
    }

    let off = 2 * ny;
    let nf = n_all - off;
    let stiffness = k.view((off, off), (nf, nf)).into_owned();
    let mass = m.view((off, off), (nf, nf)).into_owned();
    let coupling = theta.rows(off, nf).into_owned();
    let forcing = force.rows(off, nf).into_owned();
    if stiffness.clone().cholesky().is_none() {
        return Err(PehError::Assembly("constrained stiffness is singular".into()));
    }
    if mass.clone().cholesky().is_none() {
        return Err(PehError::Assembly("constrained mass is not positive definite".into()));
    }
    Ok(PehSystem {
        design: design.clone(),
        mesh,
        mass,
        stiffness,
        coupling,
        forcing,
        capacitance: design.capacitance(),
        x_knots,
        y_knots,
    })
}

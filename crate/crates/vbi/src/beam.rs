use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use sehs_numerics::{generalized_eigen, SymBandMatrix};

use crate::{Result, VbiError};

/// Simply supported prismatic beam. The rectangular section (`b`, `h`) is
/// the unique rectangle matching both the area and the second moment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamModel {
    pub span: f64,
    pub youngs_modulus: f64,
    pub second_moment: f64,
    pub area: f64,
    pub mass_per_length: f64,
    pub damping_ratio: f64,
    pub n_elements: usize,
    pub section_height: f64,
    pub section_width: f64,
}

impl BeamModel {
    /// Builds a beam and derives the equivalent rectangular section
    /// `h = √(12 I₀ / A)`, `b = A / h`.
    pub fn new(
        span: f64,
        youngs_modulus: f64,
        second_moment: f64,
        area: f64,
        mass_per_length: f64,
        damping_ratio: f64,
        n_elements: usize,
    ) -> Result<Self> {
        if !(area > 0.0 && second_moment > 0.0) {
            return Err(VbiError::Domain("area and second moment must be positive".into()));
        }
        let h = (12.0 * second_moment / area).sqrt();
        let beam = Self {
            span,
            youngs_modulus,
            second_moment,
            area,
            mass_per_length,
            damping_ratio,
            n_elements,
            section_height: h,
            section_width: area / h,
        };
        beam.validate()?;
        Ok(beam)
    }

    /// 25 m concrete-like girder used in the numerical case study.
    pub fn reference() -> Self {
        Self::new(25.0, 2.87e9, 2.9, 8.7, 2303.0, 0.03, 100).expect("reference beam is valid")
    }

    pub fn with_elements(mut self, n: usize) -> Self {
        self.n_elements = n;
        self
    }

    pub fn with_damping_ratio(mut self, xi: f64) -> Self {
        self.damping_ratio = xi;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("span", self.span),
            ("Young's modulus", self.youngs_modulus),
            ("second moment", self.second_moment),
            ("mass per length", self.mass_per_length),
            ("area", self.area),
            ("section height", self.section_height),
            ("section width", self.section_width),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(VbiError::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !(0.0..1.0).contains(&self.damping_ratio) {
            return Err(VbiError::Domain(format!(
                "damping ratio {} outside [0, 1)",
                self.damping_ratio
            )));
        }
        if self.n_elements < 2 {
            return Err(VbiError::Domain("need at least two elements".into()));
        }
        let (b, h) = (self.section_width, self.section_height);
        let rel = |a: f64, e: f64| ((a - e) / e).abs();
        if rel(b * h, self.area) > 1e-9 || rel(b * h.powi(3) / 12.0, self.second_moment) > 1e-9 {
            return Err(VbiError::Domain(
                "section width/height inconsistent with area and second moment".into(),
            ));
        }
        Ok(())
    }

    pub fn flexural_rigidity(&self) -> f64 {
        self.youngs_modulus * self.second_moment
    }

    /// Closed-form simply supported bending frequency of mode `n` [Hz].
    pub fn analytic_frequency(&self, n: usize) -> f64 {
        let n = n as f64;
        n * n * PI / (2.0 * self.span * self.span)
            * (self.flexural_rigidity() / self.mass_per_length).sqrt()
    }

    pub fn element_length(&self) -> f64 {
        self.span / self.n_elements as f64
    }
}

/// Open crack: position along the span and depth ratio `h_c / h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrackSpec {
    pub location: f64,
    pub severity: f64,
}

impl CrackSpec {
    pub fn new(location: f64, severity: f64) -> Self {
        Self { location, severity }
    }

    pub fn validate(&self, beam: &BeamModel) -> Result<()> {
        let half_zone = 1.5 * beam.section_height;
        if !(0.0..1.0).contains(&self.severity) {
            return Err(VbiError::Domain(format!(
                "crack severity {} outside [0, 1)",
                self.severity
            )));
        }
        if self.location < half_zone || self.location > beam.span - half_zone {
            return Err(VbiError::Domain(format!(
                "crack zone [{:.3}, {:.3}] m leaves the span [0, {}] m",
                self.location - half_zone,
                self.location + half_zone,
                beam.span
            )));
        }
        Ok(())
    }

    /// Cracked second moment `b (h − h_c)³ / 12`.
    pub fn cracked_second_moment(&self, beam: &BeamModel) -> f64 {
        let remaining = beam.section_height * (1.0 - self.severity);
        beam.section_width * remaining.powi(3) / 12.0
    }

    /// Flexural rigidity at `zeta`: linear taper from `EI₀` down to `EI_c`
    /// at the crack and back over `[ζ_c − 1.5h, ζ_c + 1.5h]`.
    pub fn flexural_rigidity_at(&self, beam: &BeamModel, zeta: f64) -> f64 {
        let ei0 = beam.flexural_rigidity();
        if self.severity == 0.0 {
            return ei0;
        }
        let e = beam.youngs_modulus;
        let drop = e * (beam.second_moment - self.cracked_second_moment(beam));
        let z1 = self.location - 1.5 * beam.section_height;
        let z2 = self.location + 1.5 * beam.section_height;
        if (z1..=self.location).contains(&zeta) {
            ei0 - drop * (zeta - z1) / (self.location - z1)
        } else if (self.location..=z2).contains(&zeta) {
            ei0 - drop * (z2 - zeta) / (z2 - self.location)
        } else {
            ei0
        }
    }
}

/// Assembled, constrained beam: matrices over the free degrees of freedom
/// (deflection and rotation per node, minus the two support deflections).
#[derive(Debug, Clone)]
pub struct BeamSystem {
    pub model: BeamModel,
    pub crack: Option<CrackSpec>,
    mass: DMatrix<f64>,
    stiffness: DMatrix<f64>,
    damping: DMatrix<f64>,
    /// Rayleigh coefficients `(a_m, a_k)` with `C = a_m M + a_k K`.
    pub rayleigh: (f64, f64),
    /// Full DOF index → free DOF index.
    free_index: Vec<Option<usize>>,
}

pub(crate) const BEAM_HALF_BANDWIDTH: usize = 3;

fn hermite_stiffness(ei: f64, l: f64) -> [[f64; 4]; 4] {
    let c = ei / l.powi(3);
    let l2 = l * l;
    [
        [12.0 * c, 6.0 * l * c, -12.0 * c, 6.0 * l * c],
        [6.0 * l * c, 4.0 * l2 * c, -6.0 * l * c, 2.0 * l2 * c],
        [-12.0 * c, -6.0 * l * c, 12.0 * c, -6.0 * l * c],
        [6.0 * l * c, 2.0 * l2 * c, -6.0 * l * c, 4.0 * l2 * c],
    ]
}

fn consistent_mass(mu: f64, l: f64) -> [[f64; 4]; 4] {
    let c = mu * l / 420.0;
    let l2 = l * l;
    [
        [156.0 * c, 22.0 * l * c, 54.0 * c, -13.0 * l * c],
        [22.0 * l * c, 4.0 * l2 * c, 13.0 * l * c, -3.0 * l2 * c],
        [54.0 * c, 13.0 * l * c, 156.0 * c, -22.0 * l * c],
        [-13.0 * l * c, -3.0 * l2 * c, -22.0 * l * c, 4.0 * l2 * c],
    ]
}

/// Unconstrained (full-DOF) mass and stiffness.
fn assemble_full(beam: &BeamModel, crack: Option<&CrackSpec>) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = beam.n_elements;
    let ndof = 2 * (n + 1);
    let l = beam.element_length();
    let mut k = DMatrix::zeros(ndof, ndof);
    let mut m = DMatrix::zeros(ndof, ndof);
    let me = consistent_mass(beam.mass_per_length, l);
    for e in 0..n {
        let mid = (e as f64 + 0.5) * l;
        let ei = crack.map_or(beam.flexural_rigidity(), |c| c.flexural_rigidity_at(beam, mid));
        let ke = hermite_stiffness(ei, l);
        let base = 2 * e;
        for a in 0..4 {
            for b in 0..4 {
                k[(base + a, base + b)] += ke[a][b];
                m[(base + a, base + b)] += me[a][b];
            }
        }
    }
    (k, m)
}

fn free_dof_map(n_elements: usize) -> (Vec<Option<usize>>, usize) {
    let ndof = 2 * (n_elements + 1);
    let mut map = vec![None; ndof];
    let mut next = 0;
    for (dof, slot) in map.iter_mut().enumerate() {
        if dof == 0 || dof == 2 * n_elements {
            continue;
        }
        *slot = Some(next);
        next += 1;
    }
    (map, next)
}

fn restrict(a: &DMatrix<f64>, map: &[Option<usize>], nfree: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(nfree, nfree);
    for (i, fi) in map.iter().enumerate() {
        let Some(fi) = fi else { continue };
        for (j, fj) in map.iter().enumerate() {
            let Some(fj) = fj else { continue };
            out[(*fi, *fj)] = a[(i, j)];
        }
    }
    out
}

/// First two angular frequencies of the constrained system.
fn first_two_omegas(k: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<(f64, f64)> {
    let eig = generalized_eigen(k, m)?;
    if eig.eigenvalues.len() < 2 {
        return Err(VbiError::Assembly("fewer than two free modes".into()));
    }
    Ok((eig.eigenvalues[0].sqrt(), eig.eigenvalues[1].sqrt()))
}

/// Assembles the constrained bridge matrices. Rayleigh damping is fitted to
/// the damping ratio at the first two modes of the *undamaged* beam.
pub fn assemble_beam(beam: &BeamModel, crack: Option<&CrackSpec>) -> Result<BeamSystem> {
    beam.validate()?;
    if let Some(c) = crack {
        c.validate(beam)?;
    }
    let (map, nfree) = free_dof_map(beam.n_elements);
    let (k_full, m_full) = assemble_full(beam, crack);
    let stiffness = restrict(&k_full, &map, nfree);
    let mass = restrict(&m_full, &map, nfree);
    if mass.clone().cholesky().is_none() {
        return Err(VbiError::Assembly("assembled mass matrix is not positive definite".into()));
    }

    let (w1, w2) = match crack {
        Some(c) if c.severity > 0.0 => {
            let (k0, _) = assemble_full(beam, None);
            first_two_omegas(&restrict(&k0, &map, nfree), &mass)?
        }
        _ => first_two_omegas(&stiffness, &mass)?,
    };
    let xi = beam.damping_ratio;
    let a_m = 2.0 * xi * w1 * w2 / (w1 + w2);
    let a_k = 2.0 * xi / (w1 + w2);
    let damping = &mass * a_m + &stiffness * a_k;

    Ok(BeamSystem {
        model: beam.clone(),
        crack: crack.copied(),
        mass,
        stiffness,
        damping,
        rayleigh: (a_m, a_k),
        free_index: map,
    })
}

impl BeamSystem {
    pub fn n_free(&self) -> usize {
        self.mass.nrows()
    }

    pub fn mass(&self) -> &DMatrix<f64> {
        &self.mass
    }

    pub fn stiffness(&self) -> &DMatrix<f64> {
        &self.stiffness
    }

    pub fn damping(&self) -> &DMatrix<f64> {
        &self.damping
    }

    /// Banded copies of `(M, K, C)`.
    pub fn banded(&self) -> Result<(SymBandMatrix, SymBandMatrix, SymBandMatrix)> {
        let bw = BEAM_HALF_BANDWIDTH;
        Ok((
            SymBandMatrix::from_dense(&self.mass, bw, 0.0)?,
            SymBandMatrix::from_dense(&self.stiffness, bw, 0.0)?,
            SymBandMatrix::from_dense(&self.damping, bw, 0.0)?,
        ))
    }

    /// Ascending bending frequencies [Hz].
    pub fn modal_frequencies(&self, count: usize) -> Result<Vec<f64>> {
        if count == 0 || count > self.n_free() {
            return Err(VbiError::Domain(format!(
                "requested {count} modes of a system with {} free DOFs",
                self.n_free()
            )));
        }
        let eig = generalized_eigen(&self.stiffness, &self.mass)?;
        Ok(eig
            .eigenvalues
            .iter()
            .take(count)
            .map(|&l| l.max(0.0).sqrt() / (2.0 * PI))
            .collect())
    }

    /// Free-DOF weights `(index, N_i(x))` interpolating deflection at `x`,
    /// plus the matching slope weights `N_i'(x)`.
    pub fn shape_weights(&self, x: f64) -> ShapeWeights {
        let n = self.model.n_elements;
        let l = self.model.element_length();
        let x = x.clamp(0.0, self.model.span);
        let e = ((x / l).floor() as usize).min(n - 1);
        let s = (x - e as f64 * l) / l;
        let (s2, s3) = (s * s, s * s * s);
        let values = [
            1.0 - 3.0 * s2 + 2.0 * s3,
            l * (s - 2.0 * s2 + s3),
            3.0 * s2 - 2.0 * s3,
            l * (-s2 + s3),
        ];
        let slopes = [
            (-6.0 * s + 6.0 * s2) / l,
            1.0 - 4.0 * s + 3.0 * s2,
            (6.0 * s - 6.0 * s2) / l,
            -2.0 * s + 3.0 * s2,
        ];
        let mut w = ShapeWeights::default();
        for a in 0..4 {
            if let Some(fi) = self.free_index[2 * e + a] {
                w.entries.push((fi, values[a], slopes[a]));
            }
        }
        w
    }

    /// Static response to a point load (positive upward) at `x`.
    pub fn static_response(&self, x: f64, load: f64) -> Result<Vec<f64>> {
        let mut f = vec![0.0; self.n_free()];
        self.shape_weights(x).scatter(load, &mut f);
        let band = SymBandMatrix::from_dense(&self.stiffness, BEAM_HALF_BANDWIDTH, 0.0)?;
        band.cholesky()?.solve_in_place(&mut f);
        Ok(f)
    }

    /// Free-DOF vector of the `mode`-th (0-based) mass-normalized mode shape.
    pub fn mode_shape(&self, mode: usize) -> Result<Vec<f64>> {
        let eig = generalized_eigen(&self.stiffness, &self.mass)?;
        if mode >= eig.eigenvalues.len() {
            return Err(VbiError::Domain(format!("mode {mode} does not exist")));
        }
        Ok(eig.eigenvectors.column(mode).iter().copied().collect())
    }
}

/// Sparse interpolation weights at one point of the beam.
#[derive(Debug, Clone, Default)]
pub struct ShapeWeights {
    entries: Vec<(usize, f64, f64)>,
}

impl ShapeWeights {
    pub fn value(&self, u: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, n, _)| n * u[i]).sum()
    }

    pub fn slope(&self, u: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, _, d)| d * u[i]).sum()
    }

    /// `f += load · N(x)`
    pub fn scatter(&self, load: f64, f: &mut [f64]) {
        for &(i, n, _) in &self.entries {
            f[i] += load * n;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reference_section_is_derived() {
        let b = BeamModel::reference();
        assert_relative_eq!(b.section_height, 2.0, epsilon = 1e-12);
        assert_relative_eq!(b.section_width, 4.35, epsilon = 1e-12);
    }

    #[test]
    fn cracked_second_moment_closed_form() {
        let b = BeamModel::reference();
        let c = CrackSpec::new(12.5, 0.1);
        // b (0.9 h)^3 / 12 with h = 2.0, b = 4.35
        assert_relative_eq!(c.cracked_second_moment(&b), 4.35 * 1.8f64.powi(3) / 12.0, epsilon = 1e-12);
        assert!((c.cracked_second_moment(&b) - 2.1141).abs() < 5e-5);
    }

    #[test]
    fn zero_severity_matches_healthy() {
        let b = BeamModel::reference().with_elements(20);
        let h = assemble_beam(&b, None).unwrap();
        for loc in [3.0, 7.7, 12.5, 22.0] {
            let c = assemble_beam(&b, Some(&CrackSpec::new(loc, 0.0))).unwrap();
            assert_eq!(h.stiffness(), c.stiffness());
            assert_eq!(h.mass(), c.mass());
            assert_eq!(h.damping(), c.damping());
        }
    }

    #[test]
    fn crack_zone_must_fit_in_span() {
        let b = BeamModel::reference();
        assert!(matches!(
            assemble_beam(&b, Some(&CrackSpec::new(2.0, 0.1))),
            Err(VbiError::Domain(_))
        ));
        assert!(matches!(
            assemble_beam(&b, Some(&CrackSpec::new(12.5, 1.0))),
            Err(VbiError::Domain(_))
        ));
        assert!(assemble_beam(&b, Some(&CrackSpec::new(3.0, 0.1))).is_ok());
    }

    #[test]
    fn taper_profile() {
        let b = BeamModel::reference();
        let c = CrackSpec::new(12.5, 0.2);
        let ei0 = b.flexural_rigidity();
        let eic = b.youngs_modulus * c.cracked_second_moment(&b);
        assert_relative_eq!(c.flexural_rigidity_at(&b, 12.5), eic);
        assert_relative_eq!(c.flexural_rigidity_at(&b, 9.5), ei0);
        assert_relative_eq!(c.flexural_rigidity_at(&b, 11.0), 0.5 * (ei0 + eic));
        assert_relative_eq!(c.flexural_rigidity_at(&b, 14.0), 0.5 * (ei0 + eic));
        assert_relative_eq!(c.flexural_rigidity_at(&b, 20.0), ei0);
    }

    #[test]
    fn matrices_symmetric_and_definite() {
        let sys = assemble_beam(&BeamModel::reference().with_elements(30), Some(&CrackSpec::new(8.0, 0.3))).unwrap();
        for m in [sys.mass(), sys.stiffness(), sys.damping()] {
            assert_relative_eq!(m.clone(), m.transpose(), epsilon = 1e-6);
        }
        assert!(sys.stiffness().clone().cholesky().is_some());
        assert!(sys.mass().clone().cholesky().is_some());
    }

    #[test]
    fn invalid_beams_rejected() {
        assert!(BeamModel::new(25.0, 2.87e9, 2.9, 8.7, 2303.0, 1.0, 100).is_err());
        assert!(BeamModel::new(25.0, 2.87e9, 2.9, 8.7, 2303.0, 0.03, 1).is_err());
        assert!(BeamModel::new(-1.0, 2.87e9, 2.9, 8.7, 2303.0, 0.03, 10).is_err());
        let mut b = BeamModel::reference();
        b.section_width = 4.0;
        assert!(b.validate().is_err());
    }

    #[test]
    fn modal_count_bounds() {
        let sys = assemble_beam(&BeamModel::reference().with_elements(4), None).unwrap();
        assert!(sys.modal_frequencies(0).is_err());
        assert!(sys.modal_frequencies(sys.n_free() + 1).is_err());
        assert_eq!(sys.modal_frequencies(sys.n_free()).unwrap().len(), sys.n_free());
    }

    #[test]
    fn shape_weights_reproduce_quadratic() {
        // w = x (L − x) satisfies the supports and is exact for cubic Hermite elements.
        let b = BeamModel::reference().with_elements(10);
        let sys = assemble_beam(&b, None).unwrap();
        let mut u = vec![0.0; sys.n_free()];
        for node in 0..=10 {
            let x = node as f64 * b.element_length();
            if let Some(i) = sys.free_index[2 * node] {
                u[i] = x * (25.0 - x);
            }
            if let Some(i) = sys.free_index[2 * node + 1] {
                u[i] = 25.0 - 2.0 * x;
            }
        }
        for x in [0.3, 7.1, 12.5, 24.9] {
            let w = sys.shape_weights(x);
            assert_relative_eq!(w.value(&u), x * (25.0 - x), epsilon = 1e-10);
            assert_relative_eq!(w.slope(&u), 25.0 - 2.0 * x, epsilon = 1e-10);
        }
    }
}

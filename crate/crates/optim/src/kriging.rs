//! Ordinary Kriging: constant trend, anisotropic squared-exponential
//! correlation, length scales by concentrated maximum likelihood.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{OptimError, Result};

/// Search box for log length scales, in unit-box coordinates.
const LOG_ELL_MIN: f64 = -4.6; // ≈ 0.01
const LOG_ELL_MAX: f64 = 1.6; // ≈ 5
const MAX_NUGGET: f64 = 1e-2;
const EXTRAPOLATION_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KrigingOptions {
    pub nugget: f64,
    pub starts: usize,
    pub seed: u64,
}

impl Default for KrigingOptions {
    fn default() -> Self {
        Self {
            nugget: 1e-8,
            starts: 20,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KrigingModel {
    /// Support points in original coordinates.
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Length scales in unit-box coordinates.
    pub length_scales: Vec<f64>,
    /// Nugget actually used (may exceed the requested one).
    pub nugget: f64,
    pub trend: f64,
    pub process_variance: f64,
    unit: Vec<Vec<f64>>,
    chol: Option<Cholesky<f64, Dyn>>,
    alpha: DVector<f64>,
    rinv_one: DVector<f64>,
    one_rinv_one: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    pub variance: f64,
    /// Point lies more than 10% of the box width outside the support box.
    pub extrapolated: bool,
}

fn correlation(a: &[f64], b: &[f64], ell: &[f64]) -> f64 {
    let d2: f64 = a.iter().zip(b).zip(ell).map(|((x, y), l)| ((x - y) / l).powi(2)).sum();
    (-d2).exp()
}

struct Factored {
    chol: Cholesky<f64, Dyn>,
    trend: f64,
    variance: f64,
    alpha: DVector<f64>,
    rinv_one: DVector<f64>,
    one_rinv_one: f64,
    neg_log_lik: f64,
}

fn factor(unit: &[Vec<f64>], y: &DVector<f64>, ell: &[f64], nugget: f64) -> Option<Factored> {
    let n = unit.len();
    let r = DMatrix::from_fn(n, n, |i, j| {
        correlation(&unit[i], &unit[j], ell) + if i == j { nugget } else { 0.0 }
    });
    let chol = r.cholesky()?;
    let one = DVector::from_element(n, 1.0);
    let rinv_one = chol.solve(&one);
    let one_rinv_one = one.dot(&rinv_one);
    let trend = rinv_one.dot(y) / one_rinv_one;
    let resid = y - DVector::from_element(n, trend);
    let alpha = chol.solve(&resid);
    let variance = (resid.dot(&alpha) / n as f64).max(0.0);
    let log_det: f64 = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let neg_log_lik = if variance > 0.0 {
        n as f64 * variance.ln() + log_det
    } else {
        log_det
    };
    if !neg_log_lik.is_finite() || !alpha.iter().all(|a| a.is_finite()) {
        return None;
    }
    Some(Factored {
        chol,
        trend,
        variance,
        alpha,
        rinv_one,
        one_rinv_one,
        neg_log_lik,
    })
}

fn nll(unit: &[Vec<f64>], y: &DVector<f64>, log_ell: &[f64], nugget: f64) -> f64 {
    let ell: Vec<f64> = log_ell.iter().map(|l| l.exp()).collect();
    factor(unit, y, &ell, nugget).map_or(f64::INFINITY, |f| f.neg_log_lik)
}

/// Compass search inside the log-length-scale box.
fn pattern_search(mut x: Vec<f64>, f: &dyn Fn(&[f64]) -> f64) -> (Vec<f64>, f64) {
    let mut fx = f(&x);
    let mut step = 1.0;
    while step > 1e-3 {
        let mut improved = false;
        for d in 0..x.len() {
            for dir in [1.0, -1.0] {
                let mut c = x.clone();
                c[d] = (c[d] + dir * step).clamp(LOG_ELL_MIN, LOG_ELL_MAX);
                if c[d] == x[d] {
                    continue;
                }
                let fc = f(&c);
                if fc < fx {
                    (x, fx) = (c, fc);
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, fx)
}

fn validate(points: &[Vec<f64>], values: &[f64]) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    if points.len() != values.len() {
        return Err(OptimError::Domain(format!(
            "{} points but {} values",
            points.len(),
            values.len()
        )));
    }
    let dim = points.first().map_or(0, |p| p.len());
    if dim == 0 {
        return Err(OptimError::Domain("no points or zero-dimensional points".into()));
    }
    let mut pts: Vec<Vec<f64>> = Vec::new();
    let mut vals: Vec<f64> = Vec::new();
    for (p, &v) in points.iter().zip(values) {
        if p.len() != dim {
            return Err(OptimError::Domain(format!("point {p:?} has dimension {}, expected {dim}", p.len())));
        }
        if !v.is_finite() || p.iter().any(|c| !c.is_finite()) {
            return Err(OptimError::Domain(format!("non-finite data at {p:?}")));
        }
        match pts.iter().position(|q| q == p) {
            Some(i) if vals[i] != v => {
                return Err(OptimError::Domain(format!(
                    "duplicate point {p:?} with conflicting values {} and {v}",
                    vals[i]
                )))
            }
            Some(_) => {}
            None => {
                pts.push(p.clone());
                vals.push(v);
            }
        }
    }
    if pts.len() < 4 {
        return Err(OptimError::Domain(format!("need at least 4 distinct points, got {}", pts.len())));
    }
    Ok((pts, vals))
}

pub fn kriging_fit(points: &[Vec<f64>], values: &[f64], opts: &KrigingOptions) -> Result<KrigingModel> {
    if !(opts.nugget > 0.0) || opts.starts == 0 {
        return Err(OptimError::Config("nugget must be positive and starts ≥ 1".into()));
    }
    let (points, values) = validate(points, values)?;
    let dim = points[0].len();
    let lower: Vec<f64> = (0..dim).map(|d| points.iter().map(|p| p[d]).fold(f64::INFINITY, f64::min)).collect();
    let upper: Vec<f64> = (0..dim).map(|d| points.iter().map(|p| p[d]).fold(f64::NEG_INFINITY, f64::max)).collect();
    let unit: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            (0..dim)
                .map(|d| {
                    let w = upper[d] - lower[d];
                    if w > 0.0 {
                        (p[d] - lower[d]) / w
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let y = DVector::from_vec(values.clone());

    let mut nugget = opts.nugget;
    loop {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let f = |x: &[f64]| nll(&unit, &y, x, nugget);
        let mut best: Option<(Vec<f64>, f64)> = None;
        for s in 0..opts.starts {
            let x0: Vec<f64> = if s == 0 {
                vec![(0.3f64).ln(); dim]
            } else {
                (0..dim).map(|_| rng.random_range(LOG_ELL_MIN..LOG_ELL_MAX)).collect()
            };
            let (x, fx) = pattern_search(x0, &f);
            if fx.is_finite() && best.as_ref().is_none_or(|b| fx < b.1) {
                best = Some((x, fx));
            }
        }
        if let Some((log_ell, _)) = best {
            let ell: Vec<f64> = log_ell.iter().map(|l| l.exp()).collect();
            let fac = factor(&unit, &y, &ell, nugget).expect("finite likelihood implies factorization");
            return Ok(KrigingModel {
                points,
                values,
                lower,
                upper,
                length_scales: ell,
                nugget,
                trend: fac.trend,
                process_variance: fac.variance,
                unit,
                chol: Some(fac.chol),
                alpha: fac.alpha,
                rinv_one: fac.rinv_one,
                one_rinv_one: fac.one_rinv_one,
            });
        }
        if nugget * 10.0 > MAX_NUGGET {
            return Err(OptimError::Fit(format!(
                "correlation matrix singular even with nugget {nugget:e}"
            )));
        }
        nugget *= 10.0;
        log::warn!("kriging correlation ill-conditioned; nugget raised to {nugget:e}");
    }
}

impl KrigingModel {
    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|d| {
                let w = self.upper[d] - self.lower[d];
                if w > 0.0 {
                    (x[d] - self.lower[d]) / w
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        if x.len() != self.dim() {
            return Err(OptimError::Domain(format!(
                "query has dimension {}, model has {}",
                x.len(),
                self.dim()
            )));
        }
        let u = self.to_unit(x);
        let extrapolated = (0..self.dim()).any(|d| {
            let w = self.upper[d] - self.lower[d];
            x[d] < self.lower[d] - EXTRAPOLATION_MARGIN * w || x[d] > self.upper[d] + EXTRAPOLATION_MARGIN * w
        });
        // The nugget is treated as jitter of the process itself, so it
        // also enters the cross-correlation at coincident points and the
        // predictor interpolates exactly.
        let r = DVector::from_iterator(
            self.unit.len(),
            self.unit.iter().map(|p| {
                let c = correlation(&u, p, &self.length_scales);
                if p == &u {
                    c + self.nugget
                } else {
                    c
                }
            }),
        );
        let mean = self.trend + r.dot(&self.alpha);
        let chol = self.chol.as_ref().expect("fitted model has a factor");
        let rinv_r = chol.solve(&r);
        let t = 1.0 - self.rinv_one.dot(&r);
        let s2 = 1.0 + self.nugget - r.dot(&rinv_r) + t * t / self.one_rinv_one;
        Ok(Prediction {
            mean,
            variance: (self.process_variance * s2).max(0.0),
            extrapolated,
        })
    }

    /// Leave-one-out residuals, refitting without each point in turn with
    /// the length scales held fixed.
    pub fn loo_residuals(&self) -> Result<Vec<f64>> {
        let n = self.unit.len();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let unit: Vec<Vec<f64>> = (0..n).filter(|&j| j != i).map(|j| self.unit[j].clone()).collect();
            let y = DVector::from_iterator(n - 1, (0..n).filter(|&j| j != i).map(|j| self.values[j]));
            let fac = factor(&unit, &y, &self.length_scales, self.nugget)
                .ok_or_else(|| OptimError::Fit(format!("leave-one-out factorization failed at {i}")))?;
            let r = DVector::from_iterator(n - 1, unit.iter().map(|p| correlation(&self.unit[i], p, &self.length_scales)));
            out.push(self.values[i] - (fac.trend + r.dot(&fac.alpha)));
        }
        Ok(out)
    }
}

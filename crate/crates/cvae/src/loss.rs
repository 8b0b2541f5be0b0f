//! Evidence lower bound terms.

use crate::{CvaeError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Elbo {
    pub total: f64,
    /// Mean squared pixel error.
    pub reconstruction: f64,
    /// `KL(N(μ, diag σ²) ‖ N(0, I))`.
    pub kl: f64,
}

pub fn mse(x: &[f64], x_rec: &[f64]) -> Result<f64> {
    if x.len() != x_rec.len() || x.is_empty() {
        return Err(CvaeError::Domain(format!(
            "image sizes {} and {} differ or are empty",
            x.len(),
            x_rec.len()
        )));
    }
    Ok(x.iter().zip(x_rec).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / x.len() as f64)
}

/// `½ Σ (μ² + σ² − 1 − ln σ²)`.
pub fn kl_divergence(mu: &[f64], sigma: &[f64]) -> Result<f64> {
    if mu.len() != sigma.len() {
        return Err(CvaeError::Domain(format!(
            "μ has {} entries, σ has {}",
            mu.len(),
            sigma.len()
        )));
    }
    let mut kl = 0.0;
    for (&m, &s) in mu.iter().zip(sigma) {
        if !(s > 0.0) {
            return Err(CvaeError::Domain(format!("σ must be positive, got {s}")));
        }
        let var = s * s;
        kl += m * m + var - 1.0 - var.ln();
    }
    Ok(0.5 * kl)
}

pub fn elbo_loss(x: &[f64], x_rec: &[f64], mu: &[f64], sigma: &[f64], beta_kl: f64) -> Result<Elbo> {
    let reconstruction = mse(x, x_rec)?;
    let kl = kl_divergence(mu, sigma)?;
    Ok(Elbo {
        total: reconstruction + beta_kl * kl,
        reconstruction,
        kl,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_reconstruction_standard_posterior() {
        let x = [0.1, 0.5, 0.9];
        let e = elbo_loss(&x, &x, &[0.0; 4], &[1.0; 4], 1.0).unwrap();
        assert_eq!(e.total, 0.0);
    }

    #[test]
    fn standard_posterior_leaves_reconstruction_only() {
        let e = elbo_loss(&[0.0, 1.0], &[0.5, 0.5], &[0.0; 3], &[1.0; 3], 1.0).unwrap();
        assert_eq!(e.kl, 0.0);
        assert_eq!(e.total, e.reconstruction);
        assert!((e.reconstruction - 0.25).abs() < 1e-15);
    }

    #[test]
    fn unit_mean_shift() {
        let kl = kl_divergence(&[1.0, 0.0, 0.0], &[1.0; 3]).unwrap();
        assert!((kl - 0.5).abs() < 1e-15);
    }

    #[test]
    fn non_positive_sigma_rejected() {
        assert!(kl_divergence(&[0.0], &[0.0]).is_err());
        assert!(kl_divergence(&[0.0], &[-1.0]).is_err());
        assert!(elbo_loss(&[0.0], &[0.0, 1.0], &[0.0], &[1.0], 1.0).is_err());
    }
}

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::{NumericsError, Result};

/// Ascending eigenpairs of `K φ = λ M φ` with `Φᵀ M Φ = I`.
#[derive(Debug, Clone)]
pub struct GeneralizedEigen {
    pub eigenvalues: DVector<f64>,
    /// Columns are mass-normalized eigenvectors, ordered like `eigenvalues`.
    pub eigenvectors: DMatrix<f64>,
}

const MAX_SWEEPS: usize = 10_000;

/// Solves the symmetric-definite generalized eigenproblem by reducing it to
/// a standard one through the Cholesky factor of `M`.
pub fn generalized_eigen(k: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<GeneralizedEigen> {
    let n = k.nrows();
    if k.ncols() != n || m.nrows() != n || m.ncols() != n {
        return Err(NumericsError::Dimension(format!(
            "K is {}x{}, M is {}x{}",
            k.nrows(),
            k.ncols(),
            m.nrows(),
            m.ncols()
        )));
    }
    let chol = m.clone().cholesky().ok_or_else(|| {
        let pivot = (0..n).find(|&i| m[(i, i)] <= 0.0).unwrap_or(0);
        NumericsError::NotPositiveDefinite {
            pivot,
            value: m[(pivot, pivot)],
        }
    })?;
    let l = chol.l();
    // C = L⁻¹ K L⁻ᵀ
    let lk = l
        .solve_lower_triangular(k)
        .ok_or_else(|| NumericsError::InvalidArgument("singular mass factor".into()))?;
    let c = l
        .solve_lower_triangular(&lk.transpose())
        .ok_or_else(|| NumericsError::InvalidArgument("singular mass factor".into()))?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(c, f64::EPSILON, MAX_SWEEPS).ok_or(
        NumericsError::EigenNonConvergence {
            iterations: MAX_SWEEPS,
            dim: n,
        },
    )?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut y = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        y.set_column(dst, &eig.eigenvectors.column(src));
    }
    // φ = L⁻ᵀ y
    let phi = l
        .transpose()
        .solve_upper_triangular(&y)
        .ok_or_else(|| NumericsError::InvalidArgument("singular mass factor".into()))?;
    Ok(GeneralizedEigen {
        eigenvalues: values,
        eigenvectors: phi,
    })
}

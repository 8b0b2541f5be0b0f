use nalgebra::DMatrix;

use crate::{NumericsError, Result};

/// Symmetric banded matrix stored by lower diagonals:
/// `diags[k][i] = A[i + k][i]` for `k = 0..=half_bandwidth`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBandMatrix {
    n: usize,
    half_bandwidth: usize,
    diags: Vec<Vec<f64>>,
}

impl SymBandMatrix {
    pub fn zeros(n: usize, half_bandwidth: usize) -> Self {
        let diags = (0..=half_bandwidth)
            .map(|k| vec![0.0; n.saturating_sub(k)])
            .collect();
        Self {
            n,
            half_bandwidth,
            diags,
        }
    }

    /// Extracts the band of a dense symmetric matrix. Entries outside the
    /// band must be zero; anything larger than `tol` there is an error.
    pub fn from_dense(a: &DMatrix<f64>, half_bandwidth: usize, tol: f64) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(NumericsError::Dimension("matrix not square".into()));
        }
        let mut out = Self::zeros(n, half_bandwidth);
        for j in 0..n {
            for i in j..n {
                let v = a[(i, j)];
                if i - j <= half_bandwidth {
                    out.diags[i - j][j] = v;
                } else if v.abs() > tol {
                    return Err(NumericsError::InvalidArgument(format!(
                        "entry ({i},{j}) = {v:e} lies outside half-bandwidth {half_bandwidth}"
                    )));
                }
            }
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn half_bandwidth(&self) -> usize {
        self.half_bandwidth
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let k = hi - lo;
        if k > self.half_bandwidth {
            0.0
        } else {
            self.diags[k][lo]
        }
    }

    /// `self ← a·self + b·other` (same shape required).
    pub fn linear_combination(a: f64, x: &Self, b: f64, y: &Self) -> Result<Self> {
        if x.n != y.n || x.half_bandwidth != y.half_bandwidth {
            return Err(NumericsError::Dimension("band shapes differ".into()));
        }
        let diags = x
            .diags
            .iter()
            .zip(&y.diags)
            .map(|(dx, dy)| dx.iter().zip(dy).map(|(p, q)| a * p + b * q).collect())
            .collect();
        Ok(Self {
            n: x.n,
            half_bandwidth: x.half_bandwidth,
            diags,
        })
    }

    /// `out = A x`
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        out.iter_mut().zip(x).zip(&self.diags[0]).for_each(|((o, xi), d)| *o = d * xi);
        for k in 1..=self.half_bandwidth {
            for (j, &a) in self.diags[k].iter().enumerate() {
                let i = j + k;
                out[i] += a * x[j];
                out[j] += a * x[i];
            }
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.mul_vec_into(x, &mut out);
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn cholesky(&self) -> Result<BandCholesky> {
        let n = self.n;
        let bw = self.half_bandwidth;
        // l[k][j] = L[j + k][j]
        let mut l: Vec<Vec<f64>> = self.diags.clone();
        for j in 0..n {
            let mut d = l[0][j];
            for k in 1..=bw.min(j) {
                let v = l[k][j - k];
                d -= v * v;
            }
            if d <= 0.0 || !d.is_finite() {
                return Err(NumericsError::NotPositiveDefinite { pivot: j, value: d });
            }
            let d = d.sqrt();
            l[0][j] = d;
            for k in 1..=bw.min(n - 1 - j) {
                let i = j + k;
                let mut s = l[k][j];
                // Σ_p L[i][p] L[j][p] over p < j within band of both rows
                let p_lo = i.saturating_sub(bw);
                for p in p_lo..j {
                    s -= l[i - p][p] * l[j - p][p];
                }
                l[k][j] = s / d;
            }
        }
        Ok(BandCholesky { n, bw, l })
    }
}

/// Lower Cholesky factor in the same banded layout.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    l: Vec<Vec<f64>>,
}

impl BandCholesky {
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let mut s = b[i];
            for k in 1..=self.bw.min(i) {
                s -= self.l[k][i - k] * b[i - k];
            }
            b[i] = s / self.l[0][i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in 1..=self.bw.min(n - 1 - i) {
                s -= self.l[k][i] * b[i + k];
            }
            b[i] = s / self.l[0][i];
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }
}

//! Dense kernels: row-major GEMM and the im2col/col2im pair behind both
//! convolution directions.

/// `C = α·op(A)·op(B) + β·C` with row-major storage; `op(A)` is `m × k`,
/// `op(B)` is `k × n`.
#[allow(clippy::too_many_arguments)]
pub fn gemm(
    m: usize,
    k: usize,
    n: usize,
    alpha: f64,
    a: &[f64],
    a_t: bool,
    b: &[f64],
    b_t: bool,
    beta: f64,
    c: &mut [f64],
) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * n);
    let (rsa, csa) = if a_t { (1, m as isize) } else { (k as isize, 1) };
    let (rsb, csb) = if b_t { (1, k as isize) } else { (n as isize, 1) };
    // SAFETY: slice lengths match the dimensions and strides above.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// Geometry of a strided convolution from a "big" map to a "small" one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvGeom {
    pub big_c: usize,
    pub big_h: usize,
    pub big_w: usize,
    pub small_c: usize,
    pub small_h: usize,
    pub small_w: usize,
    pub k: usize,
    pub stride: usize,
    pub pad: usize,
}

impl ConvGeom {
    pub fn new(big_c: usize, big_h: usize, big_w: usize, small_c: usize, k: usize, stride: usize, pad: usize) -> Self {
        let out = |n: usize| (n + 2 * pad - k) / stride + 1;
        Self {
            big_c,
            big_h,
            big_w,
            small_c,
            small_h: out(big_h),
            small_w: out(big_w),
            k,
            stride,
            pad,
        }
    }

    /// Rows of the patch matrix.
    pub fn patch(&self) -> usize {
        self.big_c * self.k * self.k
    }

    pub fn small_len(&self) -> usize {
        self.small_h * self.small_w
    }

    pub fn big_len(&self) -> usize {
        self.big_h * self.big_w
    }

    fn source(&self, oy: usize, ox: usize, ky: usize, kx: usize) -> Option<(usize, usize)> {
        let y = (oy * self.stride + ky) as isize - self.pad as isize;
        let x = (ox * self.stride + kx) as isize - self.pad as isize;
        (y >= 0 && x >= 0 && (y as usize) < self.big_h && (x as usize) < self.big_w).then_some((y as usize, x as usize))
    }
}

/// Patch matrix `(big_c·k²) × (small_h·small_w)` of a big map.
pub fn im2col(x: &[f64], g: &ConvGeom, col: &mut [f64]) {
    let n = g.small_len();
    for c in 0..g.big_c {
        for ky in 0..g.k {
            for kx in 0..g.k {
                let row = (c * g.k + ky) * g.k + kx;
                let dst = &mut col[row * n..(row + 1) * n];
                for oy in 0..g.small_h {
                    for ox in 0..g.small_w {
                        dst[oy * g.small_w + ox] = match g.source(oy, ox, ky, kx) {
                            Some((y, xx)) => x[c * g.big_len() + y * g.big_w + xx],
                            None => 0.0,
                        };
                    }
                }
            }
        }
    }
}

/// Adjoint of [`im2col`]: scatters patches back, accumulating into `x`.
pub fn col2im(col: &[f64], g: &ConvGeom, x: &mut [f64]) {
    let n = g.small_len();
    for c in 0..g.big_c {
        for ky in 0..g.k {
            for kx in 0..g.k {
                let row = (c * g.k + ky) * g.k + kx;
                let src = &col[row * n..(row + 1) * n];
                for oy in 0..g.small_h {
                    for ox in 0..g.small_w {
                        if let Some((y, xx)) = g.source(oy, ox, ky, kx) {
                            x[c * g.big_len() + y * g.big_w + xx] += src[oy * g.small_w + ox];
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gemm_transposes() {
        // A = [[1,2],[3,4]], B = [[5,6],[7,8]]
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [5.0, 6.0, 7.0, 8.0];
        let mut c = [0.0; 4];
        gemm(2, 2, 2, 1.0, &a, false, &b, false, 0.0, &mut c);
        assert_eq!(c, [19.0, 22.0, 43.0, 50.0]);
        gemm(2, 2, 2, 1.0, &a, true, &b, false, 0.0, &mut c);
        assert_eq!(c, [26.0, 30.0, 38.0, 44.0]);
        gemm(2, 2, 2, 1.0, &a, false, &b, true, 0.0, &mut c);
        assert_eq!(c, [17.0, 23.0, 39.0, 53.0]);
    }

    #[test]
    fn col2im_is_adjoint_of_im2col() {
        let g = ConvGeom::new(2, 6, 4, 3, 3, 2, 1);
        assert_eq!((g.small_h, g.small_w), (3, 2));
        let x: Vec<f64> = (0..2 * 24).map(|i| (i as f64 * 0.37).sin()).collect();
        let y: Vec<f64> = (0..g.patch() * g.small_len()).map(|i| (i as f64 * 0.91).cos()).collect();
        let mut col = vec![0.0; y.len()];
        im2col(&x, &g, &mut col);
        let mut back = vec![0.0; x.len()];
        col2im(&y, &g, &mut back);
        let lhs: f64 = col.iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: f64 = x.iter().zip(&back).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-12);
    }
}

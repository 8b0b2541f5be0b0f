//! B-spline basis functions and their first two derivatives.

use crate::{PehError, Result};

/// Open (clamped) knot vector together with its polynomial degree.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    knots: Vec<f64>,
    degree: usize,
}

impl KnotVector {
    /// Validates an explicit knot sequence.
    pub fn new(knots: Vec<f64>, degree: usize) -> Result<Self> {
        check_knots(&knots, degree)?;
        Ok(Self { knots, degree })
    }

    /// Uniform open knot vector with `n_basis` functions on [0, 1].
    pub fn open_uniform(n_basis: usize, degree: usize) -> Result<Self> {
        Self::with_breaks(n_basis, degree, &[])
    }

    /// Open knot vector with `n_basis` functions whose interior knots include
    /// each value in `breaks` with multiplicity 2 (C¹ there). Remaining
    /// spans are shared between the segments in proportion to their length,
    /// each segment receiving at least two spans where possible.
    pub fn with_breaks(n_basis: usize, degree: usize, breaks: &[f64]) -> Result<Self> {
        if degree < 2 {
            return Err(PehError::Domain(format!("degree {degree} < 2 lacks C¹ continuity")));
        }
        let mut pts: Vec<f64> = breaks.iter().copied().filter(|&b| b > 0.0 && b < 1.0).collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let interior_budget = n_basis
            .checked_sub(degree + 1)
            .ok_or_else(|| PehError::Domain(format!("{n_basis} basis functions too few for degree {degree}")))?;
        let repeated = 2 * pts.len();
        if interior_budget < repeated {
            return Err(PehError::Domain(format!(
                "{n_basis} basis functions cannot accommodate {} breakpoints",
                pts.len()
            )));
        }
        // Each segment contributes (spans - 1) simple knots.
        let segments = pts.len() + 1;
        let total_spans = interior_budget - repeated + segments;
        let mut edges = vec![0.0];
        edges.extend(&pts);
        edges.push(1.0);
        let mut spans = vec![1usize; segments];
        let mut left = total_spans - segments;
        // Ensure two spans per segment first, then distribute proportionally.
        for s in spans.iter_mut() {
            if left > 0 {
                *s += 1;
                left -= 1;
            }
        }
        while left > 0 {
            let (best, _) = (0..segments)
                .map(|i| (i, (edges[i + 1] - edges[i]) / spans[i] as f64))
                .fold((0, f64::MIN), |acc, x| if x.1 > acc.1 { x } else { acc });
            spans[best] += 1;
            left -= 1;
        }
        let mut knots = vec![0.0; degree + 1];
        for i in 0..segments {
            let (a, b) = (edges[i], edges[i + 1]);
            for k in 1..spans[i] {
                knots.push(a + (b - a) * k as f64 / spans[i] as f64);
            }
            if i + 1 < segments {
                knots.push(b);
                knots.push(b);
            }
        }
        knots.extend(std::iter::repeat_n(1.0, degree + 1));
        Self::new(knots, degree)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_basis(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    /// Non-degenerate knot spans as `(span_index, lo, hi)`.
    pub fn spans(&self) -> Vec<(usize, f64, f64)> {
        (self.degree..self.n_basis())
            .filter(|&i| self.knots[i + 1] > self.knots[i])
            .map(|i| (i, self.knots[i], self.knots[i + 1]))
            .collect()
    }

    /// Index `i` with `knots[i] ≤ xi < knots[i+1]`, clamped to the last
    /// non-empty span at the right end.
    pub fn find_span(&self, xi: f64) -> usize {
        let n = self.n_basis();
        let p = self.degree;
        if xi >= self.knots[n] {
            let mut i = n - 1;
            while self.knots[i] == self.knots[i + 1] {
                i -= 1;
            }
            return i;
        }
        if xi <= self.knots[p] {
            return p;
        }
        let (mut lo, mut hi) = (p, n);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if xi < self.knots[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }

    /// Values and derivatives of the `degree + 1` functions non-zero at `xi`.
    pub fn eval(&self, xi: f64) -> BasisEval {
        let span = self.find_span(xi);
        ders_basis(&self.knots, self.degree, span, xi)
    }
}

fn check_knots(knots: &[f64], degree: usize) -> Result<()> {
    if degree < 2 {
        return Err(PehError::Domain(format!("degree {degree} < 2 lacks C¹ continuity")));
    }
    if knots.len() < 2 * (degree + 1) {
        return Err(PehError::Domain("knot vector too short".into()));
    }
    if knots.windows(2).any(|w| w[1] < w[0]) {
        return Err(PehError::Domain("knot vector must be non-decreasing".into()));
    }
    let (a, b) = (knots[0], knots[knots.len() - 1]);
    let open = knots[..=degree].iter().all(|&k| k == a) && knots[knots.len() - degree - 1..].iter().all(|&k| k == b);
    if !open || a != 0.0 || b != 1.0 {
        return Err(PehError::Domain("knot vector must be open on [0, 1]".into()));
    }
    Ok(())
}

/// Non-zero basis functions at a point: `values[k]` belongs to global
/// function `first + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisEval {
    pub first: usize,
    pub values: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

impl BasisEval {
    /// Dense vector of all `n` basis values.
    pub fn dense_values(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (k, v) in self.values.iter().enumerate() {
            out[self.first + k] = *v;
        }
        out
    }
}

/// Cox–de Boor evaluation with derivatives for an explicit knot vector.
pub fn bspline_basis(knots: &[f64], degree: usize, xi: f64) -> Result<BasisEval> {
    check_knots(knots, degree)?;
    if !(0.0..=1.0).contains(&xi) {
        return Err(PehError::Domain(format!("parameter {xi} outside [0, 1]")));
    }
    let kv = KnotVector {
        knots: knots.to_vec(),
        degree,
    };
    Ok(kv.eval(xi))
}

/// Derivatives up to second order of the non-zero basis functions on
/// `span` (triangular-table form of the Cox–de Boor recursion).
fn ders_basis(u: &[f64], p: usize, span: usize, xi: f64) -> BasisEval {
    let nd = 2.min(p);
    let mut ndu = vec![vec![0.0; p + 1]; p + 1];
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    ndu[0][0] = 1.0;
    for j in 1..=p {
        left[j] = xi - u[span + 1 - j];
        right[j] = u[span + j] - xi;
        let mut saved = 0.0;
        for r in 0..j {
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }
    let mut ders = vec![vec![0.0; p + 1]; nd + 1];
    for j in 0..=p {
        ders[0][j] = ndu[j][p];
    }
    let mut a = vec![vec![0.0; p + 1]; 2];
    for r in 0..=p {
        let (mut s1, mut s2) = (0usize, 1usize);
        a[0][0] = 1.0;
        for k in 1..=nd {
            let mut d = 0.0;
            let rk = r as isize - k as isize;
            let pk = p - k;
            if r >= k {
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                d = a[s2][0] * ndu[rk as usize][pk];
            }
            let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
            let j2 = if (r as isize - 1) <= pk as isize { k - 1 } else { p - r };
            for j in j1..=j2 {
                let idx = (rk + j as isize) as usize;
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                d += a[s2][j] * ndu[idx][pk];
            }
            if r <= pk {
                a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                d += a[s2][k] * ndu[r][pk];
            }
            ders[k][r] = d;
            std::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut fac = p as f64;
    for k in 1..=nd {
        for j in 0..=p {
            ders[k][j] *= fac;
        }
        fac *= (p - k) as f64;
    }
    BasisEval {
        first: span - p,
        values: ders[0].clone(),
        d1: ders[1].clone(),
        d2: if nd >= 2 { ders[2].clone() } else { vec![0.0; p + 1] },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_below_two_rejected() {
        assert!(bspline_basis(&[0.0, 0.0, 1.0, 1.0], 1, 0.5).is_err());
        assert!(KnotVector::open_uniform(6, 1).is_err());
    }

    #[test]
    fn clamped_endpoint_interpolation() {
        let kv = KnotVector::open_uniform(6, 2).unwrap();
        let b = bspline_basis(kv.knots(), 2, 0.0).unwrap();
        let v = b.dense_values(6);
        assert_eq!(v[0], 1.0);
        assert!(v[1..].iter().all(|&x| x == 0.0));
        let e = kv.eval(1.0).dense_values(6);
        assert_eq!(e[5], 1.0);
    }

    #[test]
    fn partition_of_unity_and_derivative_sums() {
        let kv = KnotVector::with_breaks(16, 3, &[0.1]).unwrap();
        for i in 0..=200 {
            let xi = i as f64 / 200.0;
            let b = kv.eval(xi);
            assert!((b.values.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(b.d1.iter().sum::<f64>().abs() < 1e-9);
            assert!(b.d2.iter().sum::<f64>().abs() < 1e-7);
        }
    }

    #[test]
    fn breakpoint_is_double_knot() {
        let kv = KnotVector::with_breaks(16, 3, &[0.1]).unwrap();
        assert_eq!(kv.n_basis(), 16);
        assert_eq!(kv.knots().iter().filter(|&&k| k == 0.1).count(), 2);
        let spans = kv.spans();
        assert!(spans.iter().any(|s| s.2 == 0.1));
        assert!(spans.iter().filter(|s| s.2 <= 0.1).count() >= 2);
    }

    #[test]
    fn uniform_knots() {
        let kv = KnotVector::open_uniform(6, 3).unwrap();
        assert_eq!(kv.knots(), &[0.0, 0.0, 0.0, 0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0, 1.0, 1.0, 1.0]);
    }
}

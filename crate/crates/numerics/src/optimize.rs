use crate::{NumericsError, Result};

/// Golden-section maximization of a unimodal function on `[lo, hi]`.
/// Returns `(argmax, max)`.
pub fn golden_section_max<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, f64)> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(NumericsError::SearchFailed(format!("bad bracket [{lo}, {hi}]")));
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..max_iter {
        if (b - a).abs() <= tol {
            break;
        }
        if !fc.is_finite() || !fd.is_finite() {
            return Err(NumericsError::SearchFailed(format!(
                "objective not finite near [{c}, {d}]"
            )));
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    if !fx.is_finite() {
        return Err(NumericsError::SearchFailed(format!("objective not finite at {x}")));
    }
    Ok((x, fx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_peak() {
        let (x, fx) = golden_section_max(|x| -(x - 1.3).powi(2) + 2.0, -4.0, 5.0, 1e-10, 200).unwrap();
        assert!((x - 1.3).abs() < 1e-6);
        assert!((fx - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_empty_bracket() {
        assert!(golden_section_max(|x| x, 1.0, 1.0, 1e-6, 10).is_err());
    }
}

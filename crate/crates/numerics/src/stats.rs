use crate::{NumericsError, Result};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n − 1 denominator); zero for fewer than two values.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Empirical percentile with linear interpolation between order statistics
/// (rank `p/100 · (n − 1)`), the common "linear" convention.
pub fn percentile(xs: &[f64], p: f64) -> Result<f64> {
    if xs.is_empty() {
        return Err(NumericsError::InvalidArgument("percentile of empty set".into()));
    }
    if !(0.0..=100.0).contains(&p) {
        return Err(NumericsError::InvalidArgument(format!("percentile {p} outside [0, 100]")));
    }
    let mut v = xs.to_vec();
    if v.iter().any(|x| x.is_nan()) {
        return Err(NumericsError::InvalidArgument("NaN in percentile input".into()));
    }
    v.sort_by(f64::total_cmp);
    let rank = p / 100.0 * (v.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    Ok(v[lo] + (rank - lo as f64) * (v[hi] - v[lo]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentile_linear_convention() {
        let xs: Vec<f64> = (1..=100).map(f64::from).collect();
        assert!((percentile(&xs, 90.0).unwrap() - 90.1).abs() < 1e-12);
        assert_eq!(percentile(&xs, 0.0).unwrap(), 1.0);
        assert_eq!(percentile(&xs, 100.0).unwrap(), 100.0);
        assert_eq!(percentile(&[3.5; 7], 90.0).unwrap(), 3.5);
        assert!(percentile(&[], 90.0).is_err());
    }

    #[test]
    fn moments() {
        assert_eq!(mean(&[1.0, 2.0, 3.0]), 2.0);
        assert!((std_dev(&[1.0, 2.0, 3.0]) - 1.0).abs() < 1e-15);
    }
}

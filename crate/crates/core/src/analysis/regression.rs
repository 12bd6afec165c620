use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    /// Zero when fitted through the origin.
    pub intercept: f64,
    /// 1 − SS_res/SS_tot with SS_tot about the mean of y; 1 for a perfect
    /// fit of constant data.
    pub r_squared: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`, or `y ≈ slope·x` with
/// `zero_intercept`.
pub fn fit_linear(x: &[f64], y: &[f64], zero_intercept: bool) -> Result<LinearFit> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientData("need at least 2 points".into()));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (slope, intercept) = if zero_intercept {
        let sxx: f64 = x.iter().map(|v| v * v).sum();
        if sxx == 0.0 {
            return Err(Error::Degenerate("all x are zero".into()));
        }
        (x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / sxx, 0.0)
    } else {
        let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
        if sxx <= f64::EPSILON * x.iter().map(|v| v * v).sum::<f64>() {
            return Err(Error::Degenerate("all x are equal".into()));
        }
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let s = sxy / sxx;
        (s, my - s * mx)
    };
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let e = b - (slope * a + intercept);
            e * e
        })
        .sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        0.0
    };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [2.0, 4.0, 6.0, 8.0];
        for z in [true, false] {
            let f = fit_linear(&x, &y, z).unwrap();
            assert!((f.slope - 2.0).abs() < 1e-14);
            assert!(f.intercept.abs() < 1e-13);
            assert!((f.r_squared - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_y_has_zero_slope() {
        let f = fit_linear(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0], false).unwrap();
        assert_eq!(f.slope, 0.0);
        assert_eq!(f.intercept, 5.0);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(fit_linear(&[2.0, 2.0], &[1.0, 3.0], false), Err(Error::Degenerate(_))));
        assert!(matches!(fit_linear(&[0.0, 0.0], &[1.0, 3.0], true), Err(Error::Degenerate(_))));
        assert!(fit_linear(&[1.0], &[1.0], false).is_err());
    }
}

use serde::Serialize;

use crate::error::{Error, Result};

/// Neumaier-compensated sum.
pub fn sum(values: &[f64]) -> f64 {
    let mut s = 0.0;
    let mut c = 0.0;
    for &v in values {
        let t = s + v;
        if s.abs() >= v.abs() {
            c += (s - t) + v;
        } else {
            c += (v - t) + s;
        }
        s = t;
    }
    s + c
}

pub fn mean(values: &[f64]) -> f64 {
    sum(values) / values.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for constant input.
pub fn sample_sd(values: &[f64]) -> f64 {
    if values.len() < 2 || values.iter().all(|&v| v == values[0]) {
        return 0.0;
    }
    let m = mean(values);
    let sq: Vec<f64> = values.iter().map(|v| (v - m) * (v - m)).collect();
    (sum(&sq) / (values.len() - 1) as f64).sqrt()
}

pub fn sample_variance(values: &[f64]) -> f64 {
    let sd = sample_sd(values);
    sd * sd
}

/// `100 × sample sd / |mean|`, in percent.
pub fn coefficient_of_variation(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::Domain(format!("coefficient of variation needs at least 2 values, got {}", values.len())));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("coefficient of variation of non-finite values".into()));
    }
    if values.iter().all(|&v| v == values[0]) {
        if values[0] == 0.0 {
            return Err(Error::Domain("coefficient of variation with zero mean".into()));
        }
        return Ok(0.0);
    }
    let m = mean(values);
    if m == 0.0 {
        return Err(Error::Domain("coefficient of variation with zero mean".into()));
    }
    Ok(100.0 * sample_sd(values) / m.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TTest {
    pub t: f64,
    pub df: usize,
    pub p_two_tailed: f64,
}

/// Two-tailed survival probability of Student's t with `df` degrees of
/// freedom: `I_{df / (df + t²)}(df / 2, 1 / 2)`.
pub fn student_t_two_tailed(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    statrs::function::beta::beta_reg(df / 2.0, 0.5, x)
}

/// Paired-samples t-test on `a - b`. All-zero differences give `t = 0, p = 1`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() != b.len() {
        return Err(Error::Domain(format!("paired samples differ in length ({} vs {})", a.len(), b.len())));
    }
    if a.len() < 2 {
        return Err(Error::Domain("paired t-test needs at least 2 pairs".into()));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let df = d.len() - 1;
    if d.iter().all(|&v| v == 0.0) {
        return Ok(TTest { t: 0.0, df, p_two_tailed: 1.0 });
    }
    let m = mean(&d);
    let sd = sample_sd(&d);
    let t = if sd == 0.0 { f64::INFINITY.copysign(m) } else { m / (sd / (d.len() as f64).sqrt()) };
    let p = student_t_two_tailed(t, df as f64).clamp(f64::MIN_POSITIVE, 1.0);
    Ok(TTest { t, df, p_two_tailed: p })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cv_examples() {
        assert_eq!(coefficient_of_variation(&[10.0, 10.0, 10.0]).unwrap(), 0.0);
        let cv = coefficient_of_variation(&[2.0, 4.0]).unwrap();
        assert!((cv - 100.0 * 2f64.sqrt() / 3.0).abs() < 1e-12);
        assert!((cv - 47.14).abs() < 0.01);
        assert!(coefficient_of_variation(&[]).is_err());
        assert!(coefficient_of_variation(&[5.0]).is_err());
        assert!(coefficient_of_variation(&[-1.0, 1.0]).is_err());
    }

    #[test]
    fn cv_is_scale_invariant() {
        let v = [71.2, 64.9, 80.3, 58.1, 69.0];
        let base = coefficient_of_variation(&v).unwrap();
        for k in [0.01, 3.0, 1e4] {
            let scaled: Vec<f64> = v.iter().map(|x| x * k).collect();
            assert!((coefficient_of_variation(&scaled).unwrap() - base).abs() < 1e-12);
        }
    }

    #[test]
    fn t_test_examples() {
        let t = paired_t_test(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((t.t, t.p_two_tailed), (0.0, 1.0));

        let r = paired_t_test(&[2.0, 4.0, 6.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!((r.t - 2.0 * 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(r.df, 2);
        let flipped = paired_t_test(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
        assert_eq!(flipped.t, -r.t);
        assert_eq!(flipped.p_two_tailed, r.p_two_tailed);
        assert!(paired_t_test(&[1.0], &[2.0]).is_err());
        assert!(paired_t_test(&[1.0, 2.0], &[2.0]).is_err());
    }

    #[test]
    fn t_cdf_closed_forms() {
        // df = 1 is Cauchy: p = 1 - 2 atan(|t|) / pi.
        for t in [0.5, 1.0, 3.0, 10.0] {
            let expected = 1.0 - 2.0 * f64::atan(t) / std::f64::consts::PI;
            assert!((student_t_two_tailed(t, 1.0) - expected).abs() < 1e-12);
        }
        // df = 2: p = 1 - |t| / sqrt(2 + t^2).
        for t in [0.5f64, 2.0, 7.0] {
            let expected = 1.0 - t / (2.0 + t * t).sqrt();
            assert!((student_t_two_tailed(t, 2.0) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn compensated_sum() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(sum(&v), 2.0);
    }
}

//! Small descriptive-statistics helpers and standard normal functions.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population variance (divides by n).
pub fn variance(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|&x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64
}

pub fn std_dev(xs: &[f64]) -> f64 {
    variance(xs).sqrt()
}

/// Pearson correlation coefficient of two equal-length samples.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "pearson requires two equal-length samples of size >= 2, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let (mx, my) = (mean(xs), mean(ys));
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        cov += (x - mx) * (y - my);
        vx += (x - mx) * (x - mx);
        vy += (y - my) * (y - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::Numerical(
            "pearson undefined for a constant sample".into(),
        ));
    }
    Ok(cov / (vx * vy).sqrt())
}

/// Sample skewness (standardized third central moment).
pub fn skewness(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let s = std_dev(xs);
    if s == 0.0 {
        return 0.0;
    }
    let n = xs.len() as f64;
    xs.iter().map(|&x| ((x - m) / s).powi(3)).sum::<f64>() / n
}

/// Excess kurtosis (standardized fourth central moment minus 3).
pub fn excess_kurtosis(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let s = std_dev(xs);
    if s == 0.0 {
        return 0.0;
    }
    let n = xs.len() as f64;
    xs.iter().map(|&x| ((x - m) / s).powi(4)).sum::<f64>() / n - 3.0
}

/// Standard normal CDF Φ(x).
pub fn std_normal_cdf(x: f64) -> f64 {
    // unwrap: (0, 1) is always a valid normal distribution
    Normal::new(0.0, 1.0).unwrap().cdf(x)
}

/// Standard normal quantile Φ⁻¹(p) for p in (0, 1).
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || p == 0.0 || p == 1.0 {
        return Err(Error::InvalidArgument(format!(
            "quantile argument must lie in (0, 1), got {p}"
        )));
    }
    Ok(Normal::new(0.0, 1.0).unwrap().inverse_cdf(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_moments() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert!((mean(&xs) - 2.5).abs() < 1e-15);
        assert!((variance(&xs) - 1.25).abs() < 1e-15);
    }

    #[test]
    fn pearson_of_linear_relation_is_one() {
        let xs: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 7.0).collect();
        assert!((pearson(&xs, &ys).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_rejects_constant() {
        assert!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn normal_cdf_reference_values() {
        // Standard normal table values.
        assert!((std_normal_cdf(0.0) - 0.5).abs() < 1e-12);
        assert!((std_normal_cdf(1.0) - 0.841_344_746_068_543).abs() < 1e-9);
        assert!(((1.0 - std_normal_cdf(3.0)) - 1.349_898_031_630_095e-3).abs() < 1e-9);
        // Tail used for the detection threshold analysis.
        let tail = 1.0 - std_normal_cdf(3.42);
        assert!((tail - 3.1e-4).abs() < 1e-5, "tail at 3.42 was {tail}");
    }

    #[test]
    fn normal_quantile_reference_values() {
        assert!((std_normal_quantile(0.5).unwrap()).abs() < 1e-9);
        assert!((std_normal_quantile(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-6);
        assert!((std_normal_quantile(0.75).unwrap() - 0.674_489_750_196_082).abs() < 1e-6);
        // Accuracy across the extreme range used by QQ plots.
        for &p in &[1e-9, 1e-6, 1e-3, 0.2, 0.8, 1.0 - 1e-6, 1.0 - 1e-9] {
            let x = std_normal_quantile(p).unwrap();
            assert!(
                (std_normal_cdf(x) - p).abs() < 1e-9,
                "round-trip failed at p={p}"
            );
        }
        assert!(std_normal_quantile(0.0).is_err());
        assert!(std_normal_quantile(1.0).is_err());
    }
}

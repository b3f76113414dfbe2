//! Distribution statistics, Gini coefficient and Lorenz curves over
//! per-document scores.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionStats {
    pub n: usize,
    pub zero_count: usize,
    pub mean: f64,
    /// Geometric mean over strictly positive values only; 0 if there are none.
    pub geometric_mean_positive: f64,
    /// `exp(mean(ln(v + 1))) - 1` over all values.
    pub geometric_mean_shifted: f64,
    /// Population variance (divides by `n`).
    pub variance: f64,
    pub std: f64,
}

fn check(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::EmptyValues);
    }
    if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "scores must be finite and non-negative, got {bad}"
        )));
    }
    Ok(())
}

fn sorted_ascending(values: &[f64]) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
}

pub fn distribution_stats(values: &[f64]) -> Result<DistributionStats> {
    check(values)?;
    let n = values.len();
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / nf;

    let positives: Vec<f64> = values.iter().copied().filter(|&v| v > 0.0).collect();
    let geometric_mean_positive = if positives.is_empty() {
        0.0
    } else {
        (positives.iter().map(|v| v.ln()).sum::<f64>() / positives.len() as f64).exp()
    };
    let geometric_mean_shifted = (values.iter().map(|v| v.ln_1p()).sum::<f64>() / nf).exp() - 1.0;

    Ok(DistributionStats {
        n,
        zero_count: n - positives.len(),
        mean,
        geometric_mean_positive,
        geometric_mean_shifted,
        variance,
        std: variance.sqrt(),
    })
}

/// `Σ_i (2i − N − 1)·v(i) / (N·Σ_j v(j))` over values sorted ascending
/// (1-based `i`). Lies in `[0, 1 − 1/N]`.
pub fn gini(values: &[f64]) -> Result<f64> {
    check(values)?;
    let sorted = sorted_ascending(values);
    let total: f64 = sorted.iter().sum();
    if total <= 0.0 {
        return Err(Error::AllZero);
    }
    let n = sorted.len() as f64;
    let numerator: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, v)| (2.0 * (i as f64 + 1.0) - n - 1.0) * v)
        .sum();
    Ok((numerator / (n * total)).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorenzPoint {
    pub population_fraction: f64,
    pub value_fraction: f64,
}

/// Cumulative share of score against cumulative share of documents, poorest
/// first. Runs from (0,0) to (1,1) at or below the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct LorenzCurve {
    pub points: Vec<LorenzPoint>,
}

impl LorenzCurve {
    /// Trapezoidal area under the curve.
    pub fn area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| {
                (w[1].population_fraction - w[0].population_fraction)
                    * (w[0].value_fraction + w[1].value_fraction)
                    / 2.0
            })
            .sum()
    }

    /// `1 − 2·area`, the Gini coefficient implied by the curve.
    pub fn gini_from_area(&self) -> f64 {
        1.0 - 2.0 * self.area()
    }
}

/// Cumulative shares after each document: `N + 1` values starting at 0.
fn cumulative_shares(values: &[f64]) -> Result<Vec<f64>> {
    check(values)?;
    let sorted = sorted_ascending(values);
    let total: f64 = sorted.iter().sum();
    if total <= 0.0 {
        return Err(Error::AllZero);
    }
    let n = sorted.len();
    let mut shares = Vec::with_capacity(n + 1);
    shares.push(0.0);
    let mut running = 0.0;
    for (i, v) in sorted.iter().enumerate() {
        running += v;
        // Rounding must not lift the curve above the diagonal.
        let p = (i + 1) as f64 / n as f64;
        shares.push((running / total).min(p));
    }
    shares[n] = 1.0;
    Ok(shares)
}

/// The curve with one point per document plus the origin.
pub fn lorenz_full(values: &[f64]) -> Result<LorenzCurve> {
    let shares = cumulative_shares(values)?;
    let n = values.len() as f64;
    Ok(LorenzCurve {
        points: shares
            .into_iter()
            .enumerate()
            .map(|(i, value_fraction)| LorenzPoint {
                population_fraction: i as f64 / n,
                value_fraction,
            })
            .collect(),
    })
}

/// The curve sampled at `resolution + 1` evenly spaced population fractions
/// `0, 1/resolution, …, 1`, linearly interpolating between documents.
pub fn lorenz(values: &[f64], resolution: usize) -> Result<LorenzCurve> {
    if resolution < 2 {
        return Err(Error::InvalidArgument(format!(
            "Lorenz resolution must be at least 2, got {resolution}"
        )));
    }
    let shares = cumulative_shares(values)?;
    let n = values.len();
    let points = (0..=resolution)
        .map(|j| {
            if j == resolution {
                return LorenzPoint {
                    population_fraction: 1.0,
                    value_fraction: 1.0,
                };
            }
            let p = j as f64 / resolution as f64;
            let x = p * n as f64;
            let i = (x.floor() as usize).min(n - 1);
            let frac = x - i as f64;
            let v = shares[i] + frac * (shares[i + 1] - shares[i]);
            LorenzPoint {
                population_fraction: p,
                value_fraction: v.min(p),
            }
        })
        .collect();
    Ok(LorenzCurve { points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn stats_examples() {
        let s = distribution_stats(&[2.0, 4.0, 8.0]).unwrap();
        assert!(close(s.mean, 14.0 / 3.0, 1e-12));
        assert!(close(s.mean, 4.6667, 1e-3));
        assert!(close(s.geometric_mean_positive, 4.0, 1e-12));
        assert!(close(s.variance, 6.2222, 1e-3));
        assert!(close(s.std, 2.4944, 1e-3));

        let s = distribution_stats(&[5.0, 5.0, 5.0]).unwrap();
        assert_eq!(s.mean, 5.0);
        assert!(close(s.geometric_mean_positive, 5.0, 1e-12));
        assert_eq!(s.variance, 0.0);

        let s = distribution_stats(&[0.0, 0.0, 3.0]).unwrap();
        assert_eq!(s.zero_count, 2);
        assert!(close(s.geometric_mean_positive, 3.0, 1e-12));
        // exp((ln 1 + ln 1 + ln 4) / 3) - 1 = 4^(1/3) - 1
        assert!(close(s.geometric_mean_shifted, 4f64.cbrt() - 1.0, 1e-12));
    }

    #[test]
    fn stats_errors() {
        assert!(matches!(distribution_stats(&[]), Err(Error::EmptyValues)));
        assert!(distribution_stats(&[1.0, -1.0]).is_err());
        assert!(distribution_stats(&[f64::NAN]).is_err());
    }

    #[test]
    fn gini_examples() {
        assert_eq!(gini(&[5.0, 5.0, 5.0, 5.0]).unwrap(), 0.0);
        assert!(close(gini(&[0.0, 0.0, 0.0, 1.0]).unwrap(), 0.75, 1e-12));
        assert!(close(gini(&[1.0, 2.0, 3.0]).unwrap(), 2.0 / 9.0, 1e-12));
        assert!(close(gini(&[3.0, 1.0, 2.0]).unwrap(), 0.2222, 1e-4));
    }

    #[test]
    fn gini_all_zero_is_undefined() {
        let err = gini(&[0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::AllZero));
        assert!(err.to_string().contains("all values are zero"));
        assert!(matches!(gini(&[]), Err(Error::EmptyValues)));
    }

    #[test]
    fn gini_max_concentration() {
        for n in 1..20 {
            let mut v = vec![0.0; n];
            v[0] = 1.0;
            let expected = (n as f64 - 1.0) / n as f64;
            assert!(close(gini(&v).unwrap(), expected, 1e-12), "n={n}");
        }
    }

    #[test]
    fn lorenz_examples() {
        let c = lorenz(&[4.0, 4.0, 4.0], 6).unwrap();
        for p in &c.points {
            assert!(close(p.population_fraction, p.value_fraction, 1e-12));
        }
        let c = lorenz(&[1.0, 0.0, 0.0, 0.0], 8).unwrap();
        for p in &c.points {
            if p.population_fraction <= 0.75 {
                assert_eq!(p.value_fraction, 0.0);
            }
        }
        let last = c.points.last().unwrap();
        assert_eq!((last.population_fraction, last.value_fraction), (1.0, 1.0));
        let mid = c.points[7]; // p = 0.875, halfway along the last segment
        assert!(close(mid.value_fraction, 0.5, 1e-12));

        assert!(lorenz(&[1.0], 1).is_err());
        assert!(matches!(lorenz(&[0.0, 0.0], 4), Err(Error::AllZero)));
    }

    #[test]
    fn full_curve_area_matches_gini() {
        let v = [0.0, 0.0, 0.0, 1.0];
        let c = lorenz_full(&v).unwrap();
        assert_eq!(c.points.len(), 5);
        assert!(close(c.gini_from_area(), gini(&v).unwrap(), 1e-12));
    }

    fn vector() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..100.0, 2..60)
            .prop_filter("needs a positive value", |v| v.iter().any(|&x| x > 0.0))
    }

    proptest! {
        #[test]
        fn gini_scale_invariant(v in vector(), alpha in 0.01f64..1000.0) {
            let scaled: Vec<f64> = v.iter().map(|x| x * alpha).collect();
            prop_assert!(close(gini(&v).unwrap(), gini(&scaled).unwrap(), 1e-9));
        }

        #[test]
        fn gini_permutation_invariant(v in vector()) {
            let mut rev = v.clone();
            rev.reverse();
            prop_assert!(close(gini(&v).unwrap(), gini(&rev).unwrap(), 1e-12));
        }

        #[test]
        fn gini_bounds(v in vector()) {
            let g = gini(&v).unwrap();
            prop_assert!(g >= 0.0);
            prop_assert!(g <= 1.0 - 1.0 / v.len() as f64 + 1e-12);
        }

        #[test]
        fn adding_constant_reduces_gini(v in vector(), k in 0.1f64..50.0) {
            let constant = v.iter().all(|&x| x == v[0]);
            prop_assume!(!constant);
            let shifted: Vec<f64> = v.iter().map(|x| x + k).collect();
            prop_assert!(gini(&shifted).unwrap() < gini(&v).unwrap());
        }

        #[test]
        fn lorenz_below_diagonal(v in vector(), res in 2usize..50) {
            let c = lorenz(&v, res).unwrap();
            prop_assert_eq!(c.points.len(), res + 1);
            prop_assert_eq!(c.points[0], LorenzPoint { population_fraction: 0.0, value_fraction: 0.0 });
            for w in c.points.windows(2) {
                prop_assert!(w[0].population_fraction <= w[1].population_fraction);
                prop_assert!(w[0].value_fraction <= w[1].value_fraction);
            }
            for p in &c.points {
                prop_assert!(p.value_fraction <= p.population_fraction);
            }
        }

        #[test]
        fn lorenz_area_identity(v in vector()) {
            let c = lorenz_full(&v).unwrap();
            let n = v.len() as f64;
            prop_assert!(close(c.gini_from_area(), gini(&v).unwrap(), 2.0 / n));
        }

        #[test]
        fn am_gm(v in vector()) {
            let s = distribution_stats(&v).unwrap();
            let pos: Vec<f64> = v.iter().copied().filter(|&x| x > 0.0).collect();
            let pos_mean = pos.iter().sum::<f64>() / pos.len() as f64;
            prop_assert!(s.geometric_mean_positive <= pos_mean * (1.0 + 1e-12));
            prop_assert!(s.variance >= 0.0);
            prop_assert_eq!(s.std, s.variance.sqrt());
        }
    }
}

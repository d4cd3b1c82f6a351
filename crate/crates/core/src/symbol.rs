//! Rescaled symbols `M(xi) = -h^alpha sum_k w_k e^{-i k xi}` and a probe for
//! the order of accuracy based on their behaviour near the origin.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::weights::{make_weights, WeightFamily, WeightSet};

/// Rescaled symbol of a weight set, including the closed-form tail beyond
/// the stored weights.
pub fn symbol_from_weights(ws: &WeightSet, xi: f64) -> f64 {
    let w = ws.weights();
    let mut s = 0.0;
    for k in (1..w.len()).rev() {
        s += w[k] * (k as f64 * xi).cos();
    }
    let full = w[0] + 2.0 * (s + ws.tail_cos_sum(xi));
    -ws.h().powf(ws.alpha()) * full
}

/// Symbol on many points at once.
pub fn symbol_on_grid(ws: &WeightSet, xis: &[f64]) -> Vec<f64> {
    xis.par_iter().map(|&x| symbol_from_weights(ws, x)).collect()
}

/// Closed-form rescaled symbol for the families that have one.
pub fn closed_symbol(family: WeightFamily, alpha: f64, xi: f64) -> Result<f64> {
    if !family.supports(alpha) {
        return domain(format!("alpha = {alpha} outside the range of the {family} weights"));
    }
    let x = xi.abs() % (2.0 * PI);
    let x = if x > PI { 2.0 * PI - x } else { x };
    let chord = 2.0 * (0.5 * x).sin();
    match family {
        WeightFamily::Sp => Ok(xi.abs().powf(alpha)),
        WeightFamily::Per => Ok(chord.powf(alpha)),
        WeightFamily::Gl => {
            if x == 0.0 {
                return Ok(0.0);
            }
            if alpha == 1.0 {
                // sum of the k(k+1) sequence in closed form
                return Ok(2.0 / PI * ((1.0 - x.cos()) * chord.ln() + 0.5 * x.sin() * (PI - x)));
            }
            let den = (0.5 * PI * (1.0 - alpha)).sin();
            let phase = if alpha < 1.0 {
                0.5 * (PI - x) * alpha
            } else {
                0.5 * (PI - x) * alpha + x
            };
            Ok(phase.cos() / den * chord.powf(alpha))
        }
        WeightFamily::T | WeightFamily::Q => Err(Error::Unsupported(format!(
            "the {family} weights have no closed-form symbol"
        ))),
    }
}

/// Result of `accuracy_order_probe`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolProbe {
    pub family: WeightFamily,
    pub alpha: f64,
    /// `p` in `M(xi) - |xi|^alpha ~ a |xi|^(alpha + p)`; infinite for the
    /// spectral family.
    pub fitted_order: f64,
    /// `a` in the same expansion; zero for the spectral family.
    pub leading_coeff: f64,
    /// Largest `|M(xi) - |xi|^alpha|` over the probe points.
    pub max_residual: f64,
}

impl SymbolProbe {
    pub fn is_spectral(&self) -> bool {
        self.fitted_order.is_infinite()
    }
}

const PROBE_LEVELS: std::ops::RangeInclusive<i32> = 4..=12;
const PROBE_M: usize = 1 << 16;
const SPECTRAL_TOL: f64 = 1e-9;
const NOISE_FLOOR: f64 = 1e-11;

/// Fit `M(xi) - |xi|^alpha ~ a |xi|^(alpha + p)` on `xi = 2^-j pi`,
/// `j = 4..=12`.
///
/// Points whose residual is below the rounding floor are dropped. `p` is the
/// local log-log slope at the small-`xi` end, Aitken-extrapolated over the
/// last three slopes to remove the drift from higher-order terms; `a` is
/// read off at the smallest retained `xi` with that exponent.
pub fn accuracy_order_probe(family: WeightFamily, alpha: f64) -> Result<SymbolProbe> {
    if !family.supports(alpha) {
        return domain(format!("alpha = {alpha} outside the range of the {family} weights"));
    }
    let xis: Vec<f64> = PROBE_LEVELS.rev().map(|j| PI * 2f64.powi(-j)).collect();
    let m_values: Vec<f64> = match family {
        WeightFamily::Per | WeightFamily::Gl => xis
            .iter()
            .map(|&x| closed_symbol(family, alpha, x))
            .collect::<Result<_>>()?,
        WeightFamily::Sp => {
            let ws = make_weights(family, alpha, 1.0, 1 << 12)?;
            symbol_on_grid(&ws, &xis)
        }
        WeightFamily::T | WeightFamily::Q => {
            let ws = make_weights(family, alpha, 1.0, PROBE_M)?;
            symbol_on_grid(&ws, &xis)
        }
    };
    let resid: Vec<f64> = xis
        .iter()
        .zip(&m_values)
        .map(|(&x, &m)| m - x.powf(alpha))
        .collect();
    let max_residual = resid.iter().fold(0.0f64, |a, r| a.max(r.abs()));
    if family == WeightFamily::Sp {
        if max_residual > SPECTRAL_TOL {
            return Err(Error::Fit(format!(
                "spectral symbol residual {max_residual:e} above tolerance"
            )));
        }
        return Ok(SymbolProbe {
            family,
            alpha,
            fitted_order: f64::INFINITY,
            leading_coeff: 0.0,
            max_residual,
        });
    }
    let (xs, rs): (Vec<f64>, Vec<f64>) = xis
        .iter()
        .zip(&resid)
        .filter(|(_, r)| r.abs() > NOISE_FLOOR)
        .map(|(x, r)| (*x, *r))
        .unzip();
    if xs.len() < 4 {
        return Err(Error::Fit(format!(
            "only {} probe points above the rounding floor",
            xs.len()
        )));
    }
    if rs.windows(2).any(|p| !(p[1].abs() > p[0].abs()) || p[0].signum() != p[1].signum()) {
        return Err(Error::Fit("symbol residuals are not monotone in xi".into()));
    }
    let slopes: Vec<f64> = xs
        .windows(2)
        .zip(rs.windows(2))
        .map(|(x, r)| (r[1] / r[0]).abs().ln() / (x[1] / x[0]).ln())
        .collect();
    let (s0, s1, s2) = (slopes[0], slopes[1], slopes[2]);
    let (d0, d1) = (s0 - s1, s1 - s2);
    let ratio = d0 / d1;
    let order = if d1 != 0.0 && ratio > 0.0 && ratio < 0.95 {
        s0 - d0 * d0 / (d0 - d1)
    } else {
        s0
    };
    let leading = rs[0] / xs[0].powf(order);
    Ok(SymbolProbe {
        family,
        alpha,
        fitted_order: order - alpha,
        leading_coeff: leading,
        max_residual,
    })
}

/// Ordinary least-squares line `y = slope x + intercept`.
pub fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbol_at_origin_vanishes() {
        for fam in WeightFamily::ALL {
            let ws = make_weights(fam, 0.7, 0.25, 500).unwrap();
            assert!(symbol_from_weights(&ws, 0.0).abs() < 1e-10, "{fam}");
        }
    }

    #[test]
    fn symbol_at_pi() {
        for &alpha in &[0.3, 1.0, 1.7] {
            let ws = make_weights(WeightFamily::Per, alpha, 0.5, 256).unwrap();
            assert!((symbol_from_weights(&ws, PI) - 2f64.powf(alpha)).abs() < 1e-10);
        }
        let alpha = 0.6;
        let ws = make_weights(WeightFamily::Gl, alpha, 1.0, 256).unwrap();
        let expect = 2f64.powf(alpha) / (alpha * PI / 2.0).cos();
        assert!((symbol_from_weights(&ws, PI) - expect).abs() < 1e-10);
    }

    #[test]
    fn closed_symbol_examples() {
        assert_eq!(closed_symbol(WeightFamily::Sp, 1.5, 1.0).unwrap(), 1.0);
        assert!((closed_symbol(WeightFamily::Gl, 0.5, PI).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(closed_symbol(WeightFamily::Per, 1.3, 0.0).unwrap(), 0.0);
        assert!(matches!(
            closed_symbol(WeightFamily::T, 1.0, 1.0),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn gl_at_one_matches_weights() {
        let ws = make_weights(WeightFamily::Gl, 1.0, 1.0, 64).unwrap();
        for i in 0..=20 {
            let x = PI * i as f64 / 20.0;
            let a = symbol_from_weights(&ws, x);
            let b = closed_symbol(WeightFamily::Gl, 1.0, x).unwrap();
            assert!((a - b).abs() < 1e-12, "{x}: {a} {b}");
        }
    }

    #[test]
    fn weights_and_closed_forms_agree() {
        for fam in [WeightFamily::Sp, WeightFamily::Per, WeightFamily::Gl] {
            for &alpha in &[0.4, 1.6] {
                let ws = make_weights(fam, alpha, 1.0, 128).unwrap();
                for i in 0..=32 {
                    let x = PI * i as f64 / 32.0;
                    let a = symbol_from_weights(&ws, x);
                    let b = closed_symbol(fam, alpha, x).unwrap();
                    assert!((a - b).abs() < 1e-10, "{fam} {alpha} {x}: {a} {b}");
                }
            }
        }
    }

    #[test]
    fn probe_examples() {
        let per = accuracy_order_probe(WeightFamily::Per, 0.9).unwrap();
        assert!((per.fitted_order - 2.0).abs() < 0.05);
        assert!((per.leading_coeff / (-0.9 / 24.0) - 1.0).abs() < 0.02);
        let gl = accuracy_order_probe(WeightFamily::Gl, 0.5).unwrap();
        assert!((gl.fitted_order - 1.0).abs() < 0.05);
        let a = 0.25 * (PI / 4.0).tan();
        assert!((gl.leading_coeff / a - 1.0).abs() < 0.02);
        let t = accuracy_order_probe(WeightFamily::T, 0.5).unwrap();
        assert!((t.fitted_order - 1.5).abs() < 0.1, "{}", t.fitted_order);
        let sp = accuracy_order_probe(WeightFamily::Sp, 1.3).unwrap();
        assert!(sp.is_spectral());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn even_in_xi(alpha in 0.1f64..1.9, xi in -PI..PI) {
                for fam in WeightFamily::ALL {
                    let ws = make_weights(fam, alpha, 1.0, 64).unwrap();
                    prop_assert_eq!(symbol_from_weights(&ws, xi), symbol_from_weights(&ws, -xi));
                }
            }

            #[test]
            fn nonnegative_for_positive_weights(alpha in 0.1f64..1.9) {
                for fam in [WeightFamily::Per, WeightFamily::Gl, WeightFamily::T, WeightFamily::Q] {
                    let ws = make_weights(fam, alpha, 1.0, 256).unwrap();
                    for i in 0..=256 {
                        let x = PI * i as f64 / 256.0;
                        prop_assert!(symbol_from_weights(&ws, x) >= -1e-12);
                    }
                }
            }
        }
    }
}

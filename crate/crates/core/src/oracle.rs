//! Reference values of the fractional Laplacian and of the fractional heat
//! flow.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::quad;
use crate::specfun::{gamma, gauss_2f1, rgamma};

/// Named reference solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    /// `e^{-x^2}`, evaluated at the origin.
    Gaussian0,
    /// `(1 + x^2)^{-(1-alpha)/2}`.
    Lorentzian,
    /// `(1 - x^2)_+^{k + alpha/2}`.
    BetaBump(u32),
    /// Fractional heat flow of given initial data.
    HeatGreen,
}

impl FromStr for OracleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        match lower.as_str() {
            "gaussian0" => Ok(OracleKind::Gaussian0),
            "lorentzian" => Ok(OracleKind::Lorentzian),
            "heat_green" => Ok(OracleKind::HeatGreen),
            _ => {
                if let Some(k) = lower.strip_prefix("beta_bump:") {
                    let k = k
                        .parse()
                        .map_err(|_| Error::Domain(format!("bad bump index in '{s}'")))?;
                    Ok(OracleKind::BetaBump(k))
                } else {
                    domain(format!("unknown oracle '{s}'"))
                }
            }
        }
    }
}

impl fmt::Display for OracleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleKind::Gaussian0 => f.write_str("gaussian0"),
            OracleKind::Lorentzian => f.write_str("lorentzian"),
            OracleKind::BetaBump(k) => write!(f, "beta_bump:{k}"),
            OracleKind::HeatGreen => f.write_str("heat_green"),
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return domain(format!("alpha must lie in (0, 2), got {alpha}"));
    }
    Ok(())
}

/// `(-Delta)^{alpha/2} e^{-x^2}` at `x = 0`.
pub fn flap_gaussian_origin(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(2f64.powf(alpha) * gamma(0.5 * (1.0 + alpha))? / PI.sqrt())
}

/// `(1 + x^2)^{-(1-alpha)/2}`, the function whose fractional Laplacian is
/// `flap_lorentzian`.
pub fn lorentzian(alpha: f64, x: f64) -> f64 {
    (1.0 + x * x).powf(-0.5 * (1.0 - alpha))
}

/// `(-Delta)^{alpha/2} (1 + x^2)^{-(1-alpha)/2}`; zero at `alpha = 1`.
pub fn flap_lorentzian(alpha: f64, x: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let pre = 2f64.powf(alpha) * gamma(0.5 * (1.0 + alpha))? * rgamma(0.5 * (1.0 - alpha))?;
    Ok(pre * (1.0 + x * x).powf(-0.5 * (1.0 + alpha)))
}

/// `(1 - x^2)_+^{k + alpha/2}`.
pub fn beta_bump(k: u32, alpha: f64, x: f64) -> f64 {
    let s = 1.0 - x * x;
    if s <= 0.0 {
        0.0
    } else {
        s.powf(k as f64 + 0.5 * alpha)
    }
}

/// `K_{k,alpha} = 2^alpha Gamma(k+1+alpha/2) Gamma((1+alpha)/2) / (k! sqrt(pi))`.
pub fn bump_constant(k: u32, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let kf = k as f64;
    Ok(2f64.powf(alpha) * gamma(kf + 1.0 + 0.5 * alpha)? * gamma(0.5 * (1.0 + alpha))?
        / (gamma(kf + 1.0)? * PI.sqrt()))
}

fn bump_outer_constant(k: u32, alpha: f64) -> Result<f64> {
    let kf = k as f64;
    Ok(2f64.powf(alpha) * gamma(kf + 1.0 + 0.5 * alpha)? * gamma(0.5 * (1.0 + alpha))?
        / (gamma(-0.5 * alpha)? * gamma(0.5 * (3.0 + alpha) + kf)?))
}

// 2F1(a, -k; c; z), a terminating series valid for every z
fn terminating_2f1(a: f64, k: u32, c: f64, z: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..k {
        let nf = n as f64;
        term *= (a + nf) * (nf - k as f64) / ((c + nf) * (nf + 1.0)) * z;
        sum += term;
    }
    sum
}

/// `(-Delta)^{alpha/2} (1 - x^2)_+^{k + alpha/2}`.
///
/// Inside `[-1, 1]` this is `K_{k,alpha} 2F1((1+alpha)/2, -k; 1/2; x^2)`.
/// Outside it is
/// `K~_{k,alpha} |x|^(-1-alpha) 2F1((1+alpha)/2, (2+alpha)/2; (3+alpha)/2+k; 1/x^2)`,
/// available for `|x| >= 1/sqrt(0.9)`.
pub fn flap_beta_bump(k: u32, alpha: f64, x: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let ax = x.abs();
    if ax <= 1.0 {
        return Ok(bump_constant(k, alpha)? * terminating_2f1(0.5 * (1.0 + alpha), k, 0.5, x * x));
    }
    let z = 1.0 / (x * x);
    if z > 0.9 {
        return domain(format!("|x| = {ax} inside the excluded annulus (1, 1.054)"));
    }
    let f = gauss_2f1(
        0.5 * (1.0 + alpha),
        0.5 * (2.0 + alpha),
        0.5 * (3.0 + alpha) + k as f64,
        z,
    )?;
    Ok(bump_outer_constant(k, alpha)? * ax.powf(-1.0 - alpha) * f)
}

const MAX_PANELS: f64 = 1e6;
const HEAT_CUTOFF: f64 = 36.841_361_487_904_73; // -ln(1e-16)

/// Fractional heat flow at `(x, t)` for real initial data with Fourier
/// transform `spectrum(xi)`, `xi > 0`:
/// `(1/pi) int_0^inf Re[e^{i xi x} u0^(xi)] e^{-xi^alpha t} dxi`.
///
/// The integral is cut where `e^{-xi^alpha t} < 1e-16` and computed by
/// adaptive Gauss-Legendre quadrature on panels of one oscillation period.
/// `spectrum` may be singular at `xi = 0` as long as the integrand is
/// integrable there.
pub fn heat_green(
    alpha: f64,
    t: f64,
    x: f64,
    spectrum: impl Fn(f64) -> Complex64,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return domain(format!("alpha must lie in (0, 2], got {alpha}"));
    }
    if !(t > 0.0) {
        return domain(format!("heat_green needs t > 0, got {t}"));
    }
    let top = (HEAT_CUTOFF / t).powf(1.0 / alpha);
    let f = |xi: f64| {
        let phase = Complex64::from_polar(1.0, xi * x);
        (phase * spectrum(xi)).re * (-xi.powf(alpha) * t).exp()
    };
    let period = 2.0 * PI / x.abs().max(1.0);
    let panels = (top / period).ceil().max(1.0);
    if panels > MAX_PANELS {
        return domain(format!("t = {t} too small for the heat quadrature"));
    }
    let panels = panels as usize;
    let width = top / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let a = p as f64 * width;
        let b = a + width;
        sum += if p == 0 {
            // algebraic behaviour of xi^alpha and of the spectrum at 0
            quad::graded(&f, a, b, 40)
        } else {
            quad::adaptive(&f, a, b, 1e-15)?
        };
    }
    Ok(sum / PI)
}

/// Heat flow of `sign(x)`: `(2/pi) int_0^inf sin(xi x)/xi e^{-xi^alpha t} dxi`.
pub fn heat_sign(alpha: f64, t: f64, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    heat_green(alpha, t, x, |xi| Complex64::new(0.0, -2.0 / xi))
}

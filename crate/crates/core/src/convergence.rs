//! Grid-refinement sweeps against reference solutions and order fitting.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rayon::prelude::*;

use crate::dirichlet::{solve, DirichletProblem};
use crate::error::{domain, Error, Result};
use crate::grid::GridField;
use crate::operator::{apply_direct, apply_truncated, TailSpec};
use crate::oracle::{beta_bump, bump_constant, flap_beta_bump, flap_gaussian_origin, flap_lorentzian, lorentzian};
use crate::symbol::least_squares;
use crate::weights::{make_weights, WeightFamily};

/// Experiment measured by a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    /// `e^{-x^2}` on `[-8, 8]`, error at the origin.
    Gaussian0,
    /// `(1 + x^2)^{-(1-alpha)/2}` on `[-l, l]`, sup error over the window;
    /// with `beta = Some(b)` the far field is corrected with tail exponent
    /// `b`, otherwise the field is extended by zero.
    Lorentzian { l: f64, beta: Option<f64> },
    /// `(1 - x^2)_+^{k+alpha/2}`, sup error over the grid points of
    /// `[-1, 1]`.
    BetaBump(u32),
    /// Dirichlet problem with the bump as exact solution, sup error over
    /// the interior.
    Dirichlet(u32),
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        let index = |rest: &str| -> Result<u32> {
            rest.parse()
                .map_err(|_| Error::Domain(format!("bad index in target '{s}'")))
        };
        match lower.as_str() {
            "gaussian0" => Ok(Target::Gaussian0),
            "lorentzian" => Ok(Target::Lorentzian { l: 8.0, beta: None }),
            "lorentzian+tail" => Ok(Target::Lorentzian { l: 8.0, beta: Some(f64::NAN) }),
            _ => {
                if let Some(k) = lower.strip_prefix("beta_bump:") {
                    Ok(Target::BetaBump(index(k)?))
                } else if let Some(k) = lower.strip_prefix("dirichlet:") {
                    Ok(Target::Dirichlet(index(k)?))
                } else {
                    domain(format!("unknown convergence target '{s}'"))
                }
            }
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Gaussian0 => f.write_str("gaussian0"),
            Target::Lorentzian { beta: None, .. } => f.write_str("lorentzian"),
            Target::Lorentzian { beta: Some(_), .. } => f.write_str("lorentzian+tail"),
            Target::BetaBump(k) => write!(f, "beta_bump:{k}"),
            Target::Dirichlet(k) => write!(f, "dirichlet:{k}"),
        }
    }
}

impl Target {
    /// Fills in the defaults that depend on `alpha` (a NaN tail exponent
    /// becomes `1 - alpha`) and sets the Lorentzian window.
    pub fn resolve(self, alpha: f64, l: Option<f64>, beta: Option<f64>) -> Self {
        match self {
            Target::Lorentzian { l: l0, beta: b0 } => {
                let b = match (b0, beta) {
                    (None, _) => None,
                    (Some(_), Some(b)) => Some(b),
                    (Some(b), None) if b.is_nan() => Some(1.0 - alpha),
                    (Some(b), None) => Some(b),
                };
                Target::Lorentzian { l: l.unwrap_or(l0), beta: b }
            }
            t => t,
        }
    }
}

const GAUSSIAN_HALF_WIDTH: f64 = 8.0;

fn grid_count(len: f64, h: f64) -> Result<usize> {
    let n = (len / h).round();
    if (n * h - len).abs() > 1e-9 * len || n < 1.0 {
        return domain(format!("{len} is not a multiple of h = {h}"));
    }
    Ok(n as usize)
}

/// Error of one experiment at grid spacing `h`.
pub fn error_at(target: Target, family: WeightFamily, alpha: f64, h: f64) -> Result<f64> {
    match target {
        Target::Gaussian0 => {
            let n = grid_count(GAUSSIAN_HALF_WIDTH, h)?;
            let ws = make_weights(family, alpha, h, n)?;
            let f = GridField::symmetric(h, n, |x| (-x * x).exp())?;
            let v = apply_direct(&ws, &f, 0..1)?[0];
            Ok((v - flap_gaussian_origin(alpha)?).abs())
        }
        Target::Lorentzian { l, beta } => {
            let n = grid_count(l, h)?;
            let f = GridField::symmetric(h, n, |x| lorentzian(alpha, x))?;
            let approx = match beta {
                Some(b) => {
                    if !(b.is_finite()) {
                        return domain("tail exponent not resolved");
                    }
                    let tail = TailSpec::for_field(&f, b)?;
                    let big_m = (tail.l_m / h + 1e-9).floor() as usize;
                    let ws = make_weights(family, alpha, h, f.len() + big_m)?;
                    apply_truncated(&ws, &f, &tail)?
                }
                None => {
                    let ws = make_weights(family, alpha, h, f.len())?;
                    apply_direct(&ws, &f, f.indices())?
                }
            };
            let mut err = 0.0f64;
            for (i, a) in approx.iter().enumerate() {
                err = err.max((a - flap_lorentzian(alpha, f.x(i))?).abs());
            }
            Ok(err)
        }
        Target::BetaBump(k) => {
            let n = grid_count(1.0, h)?;
            let ws = make_weights(family, alpha, h, 2 * n)?;
            let f = GridField::symmetric(h, n, |x| beta_bump(k, alpha, x))?;
            let lu = apply_direct(&ws, &f, f.indices())?;
            let mut err = 0.0f64;
            for (i, v) in lu.iter().enumerate() {
                err = err.max((v - flap_beta_bump(k, alpha, f.x(i))?).abs());
            }
            Ok(err)
        }
        Target::Dirichlet(k) => {
            let n = grid_count(1.0, h)?;
            let ws = make_weights(family, alpha, h, 2 * n)?;
            // validates alpha; the inner branch cannot fail after that
            bump_constant(k, alpha)?;
            let p = DirichletProblem::new(ws, 1.0, |x| flap_beta_bump(k, alpha, x).unwrap_or(f64::NAN))?;
            let u = solve(&p)?.field;
            let err = (0..u.len())
                .map(|i| (u.values()[i] - beta_bump(k, alpha, u.x(i))).abs())
                .fold(0.0, f64::max);
            Ok(err)
        }
    }
}

/// Result of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub target: Target,
    pub family: WeightFamily,
    pub alpha: f64,
    /// `(h, error)` with `h` strictly decreasing.
    pub points: Vec<(f64, f64)>,
    pub fitted_slope: f64,
    /// Indices of `points` used in the fit.
    pub fit_window: Range<usize>,
}

/// Least-squares slope of `log error` against `log h` over the last run of
/// strictly decreasing errors. Points at coarse `h` before that run are
/// pre-asymptotic. When the sequence stops decreasing before the end
/// (saturation), the run is further cut to the points whose error exceeds
/// three times the final error, provided at least two remain.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<(f64, Range<usize>)> {
    if points.len() < 2 {
        return Err(Error::Fit("need at least two points".into()));
    }
    if points.iter().any(|&(h, e)| !(h > 0.0) || !(e > 0.0)) {
        return Err(Error::Fit("errors and spacings must be positive".into()));
    }
    let n = points.len();
    let mut end = n;
    while end >= 2 && points[end - 1].1 >= points[end - 2].1 {
        end -= 1;
    }
    if end < 2 {
        return Err(Error::Fit("error does not decrease under refinement".into()));
    }
    let mut start = end - 1;
    while start > 0 && points[start - 1].1 > points[start].1 {
        start -= 1;
    }
    if end < n {
        let last = points[n - 1].1;
        let cut = (start..end).take_while(|&i| points[i].1 > 3.0 * last).count();
        if cut >= 2 {
            end = start + cut;
        }
    }
    let window = start..end;
    let lx: Vec<f64> = points[window.clone()].iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points[window.clone()].iter().map(|p| p.1.ln()).collect();
    Ok((least_squares(&lx, &ly).0, window))
}

/// Runs `target` for every `h` (concurrently) and fits the order.
pub fn sweep(target: Target, family: WeightFamily, alpha: f64, hs: &[f64]) -> Result<ConvergenceReport> {
    if hs.windows(2).any(|p| !(p[1] < p[0])) {
        return domain("grid spacings must be strictly decreasing");
    }
    let errors: Vec<f64> = hs
        .par_iter()
        .map(|&h| error_at(target, family, alpha, h))
        .collect::<Result<_>>()?;
    let points: Vec<(f64, f64)> = hs.iter().copied().zip(errors).collect();
    let (fitted_slope, fit_window) = fit_slope(&points)?;
    Ok(ConvergenceReport {
        target,
        family,
        alpha,
        points,
        fitted_slope,
        fit_window,
    })
}

/// `h = 2^-a, ..., 2^-b`.
pub fn dyadic(a: i32, b: i32) -> Vec<f64> {
    (a..=b).map(|j| 2f64.powi(-j)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_power_law() {
        let pts: Vec<(f64, f64)> = dyadic(2, 6).iter().map(|&h| (h, 3.0 * h.powf(1.7))).collect();
        let (s, w) = fit_slope(&pts).unwrap();
        assert!((s - 1.7).abs() < 1e-12);
        assert_eq!(w, 0..5);
    }

    #[test]
    fn saturated_points_are_dropped() {
        let pts = vec![(0.25, 1e-2), (0.125, 2.5e-3), (0.0625, 6.25e-4), (0.03125, 5e-4), (0.015625, 5.1e-4)];
        let (s, w) = fit_slope(&pts).unwrap();
        assert_eq!(w, 0..2);
        assert!((s - 2.0).abs() < 1e-12);
        assert!(fit_slope(&[(0.5, 1.0), (0.25, 2.0)]).is_err());
        let rising = vec![(0.25, 1e-3), (0.125, 4e-3), (0.0625, 1e-3), (0.03125, 2.5e-4)];
        let (s, w) = fit_slope(&rising).unwrap();
        assert_eq!(w, 1..4);
        assert!((s - 2.0).abs() < 1e-12);
    }

    #[test]
    fn targets_parse() {
        assert_eq!("dirichlet:3".parse::<Target>().unwrap(), Target::Dirichlet(3));
        let t = "lorentzian+tail".parse::<Target>().unwrap().resolve(0.4, Some(16.0), None);
        assert_eq!(t, Target::Lorentzian { l: 16.0, beta: Some(0.6) });
        assert_eq!(t.to_string(), "lorentzian+tail");
        assert!("bump".parse::<Target>().is_err());
    }

    #[test]
    fn bump_error_is_limited_by_boundary_regularity() {
        let r = sweep(Target::BetaBump(2), WeightFamily::Per, 1.5, &dyadic(6, 10)).unwrap();
        assert!((r.fitted_slope - 1.25).abs() < 0.1, "{:?}", r.points);
    }

    #[test]
    fn per_gaussian_is_second_order() {
        let r = sweep(Target::Gaussian0, WeightFamily::Per, 0.8, &dyadic(2, 5)).unwrap();
        assert!((r.fitted_slope - 2.0).abs() < 0.15, "{:?}", r.points);
        assert!(sweep(Target::Gaussian0, WeightFamily::Per, 0.8, &[0.1, 0.2]).is_err());
    }
}

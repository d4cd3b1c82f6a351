//! Convolution weights `w_k` of the scheme
//! `L_h u_j = sum_k (u_j - u_{j-k}) w_k` with `w_0 = -sum_{k != 0} w_k`.
//!
//! Five families are available: spectral (SP), regularized symbol (PER),
//! Grunwald-Letnikov (GL), piecewise-linear quadrature (T) and
//! piecewise-quadratic quadrature (Q). All of them are generated from closed
//! forms; `weights_from_symbol` produces weights for an arbitrary symbol by
//! quadrature.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::quad;
use crate::specfun::{
    gamma, gamma_ratio_shifted, hurwitz_zeta, incomplete_gamma_cf_factor, rgamma, riesz_constant,
    upper_incomplete_gamma,
};

/// Weight family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightFamily {
    Sp,
    Per,
    Gl,
    T,
    Q,
}

impl WeightFamily {
    pub const ALL: [WeightFamily; 5] = [
        WeightFamily::Sp,
        WeightFamily::Per,
        WeightFamily::Gl,
        WeightFamily::T,
        WeightFamily::Q,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WeightFamily::Sp => "SP",
            WeightFamily::Per => "PER",
            WeightFamily::Gl => "GL",
            WeightFamily::T => "T",
            WeightFamily::Q => "Q",
        }
    }

    /// Whether `alpha` is inside the range where the family is defined.
    pub fn supports(self, alpha: f64) -> bool {
        match self {
            WeightFamily::Sp | WeightFamily::Per | WeightFamily::Gl => alpha > 0.0 && alpha <= 2.0,
            WeightFamily::T | WeightFamily::Q => alpha > 0.0 && alpha < 2.0,
        }
    }
}

impl fmt::Display for WeightFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WeightFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "SP" => Ok(WeightFamily::Sp),
            "PER" => Ok(WeightFamily::Per),
            "GL" => Ok(WeightFamily::Gl),
            "T" => Ok(WeightFamily::T),
            "Q" => Ok(WeightFamily::Q),
            other => domain(format!("unknown weight family '{other}'")),
        }
    }
}

/// Index parity selector for `decay_prefactor`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Any,
}

/// A symmetric rescaled symbol `M(xi)` on `[0, pi]`.
pub type SymbolFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

// sin(alpha pi / 2) and cos(alpha pi / 2) written so that the small values
// near alpha = 2 and alpha = 1 keep their relative precision
fn sin_half_pi(alpha: f64) -> f64 {
    if alpha <= 1.0 {
        (0.5 * PI * alpha).sin()
    } else {
        (0.5 * PI * (2.0 - alpha)).sin()
    }
}

fn cos_half_pi(alpha: f64) -> f64 {
    (0.5 * PI * (1.0 - alpha)).sin()
}

// expm1(p x) / p with the p -> 0 limit
fn expm1_over(x: f64, p: f64) -> f64 {
    if p == 0.0 {
        x
    } else {
        (p * x).exp_m1() / p
    }
}

#[derive(Debug, Clone, Copy)]
enum SpKind {
    One,
    Two,
    General { a: f64, smooth: f64, pi_alpha: f64 },
}

#[derive(Debug, Clone, Copy)]
enum GlBranch {
    Low,
    One,
    High,
}

/// Closed-form generator of the scaled weights `h^alpha w_k`.
#[derive(Debug, Clone, Copy)]
enum Kernel {
    Sp(SpKind),
    Per { alpha: f64, w1: f64, pre: f64 },
    Gl { alpha: f64, branch: GlBranch, c: f64, coef: f64 },
    T { p: f64, alpha: f64, cr: f64 },
    Q { p: f64, alpha: f64, cr: f64 },
}

const SERIES_MAX: usize = 400;

impl Kernel {
    fn new(family: WeightFamily, alpha: f64) -> Result<Self> {
        Ok(match family {
            WeightFamily::Sp => {
                if alpha == 1.0 {
                    Kernel::Sp(SpKind::One)
                } else if alpha == 2.0 {
                    Kernel::Sp(SpKind::Two)
                } else {
                    let a = alpha + 1.0;
                    // -Gamma(a) cos(pi a / 2) / pi = Gamma(1 + alpha) sin(alpha pi / 2) / pi
                    let smooth = gamma(a)? * sin_half_pi(alpha) / PI;
                    Kernel::Sp(SpKind::General {
                        a,
                        smooth,
                        pi_alpha: PI.powf(alpha),
                    })
                }
            }
            WeightFamily::Per => {
                let w1 = gamma(1.0 + alpha)? * rgamma(0.5 * alpha)? / gamma(2.0 + 0.5 * alpha)?;
                let pre = if alpha == 2.0 {
                    0.0
                } else {
                    gamma(1.0 + alpha)? * sin_half_pi(alpha) / PI
                };
                Kernel::Per { alpha, w1, pre }
            }
            WeightFamily::Gl => {
                if alpha == 1.0 {
                    Kernel::Gl {
                        alpha,
                        branch: GlBranch::One,
                        c: 0.0,
                        coef: 0.0,
                    }
                } else {
                    let c = 0.5 / cos_half_pi(alpha);
                    let branch = if alpha < 1.0 { GlBranch::Low } else { GlBranch::High };
                    Kernel::Gl {
                        alpha,
                        branch,
                        c,
                        coef: c * alpha * rgamma(1.0 - alpha)?,
                    }
                }
            }
            WeightFamily::T => Kernel::T {
                p: 1.0 - alpha,
                alpha,
                cr: riesz_constant(alpha)?,
            },
            WeightFamily::Q => Kernel::Q {
                p: 1.0 - alpha,
                alpha,
                cr: riesz_constant(alpha)?,
            },
        })
    }

    fn w0(&self) -> f64 {
        match *self {
            Kernel::Sp(SpKind::One) => -0.5 * PI,
            Kernel::Sp(SpKind::Two) => -PI * PI / 3.0,
            Kernel::Sp(SpKind::General { a, pi_alpha, .. }) => -pi_alpha / a,
            Kernel::Per { alpha, .. } => {
                let g = gamma(1.0 + 0.5 * alpha).unwrap_or(f64::NAN);
                -gamma(1.0 + alpha).unwrap_or(f64::NAN) / (g * g)
            }
            Kernel::Gl { alpha, branch, c, .. } => match branch {
                GlBranch::Low => -2.0 * c,
                GlBranch::One => -2.0 / PI,
                GlBranch::High => 2.0 * c * alpha,
            },
            Kernel::T { alpha, cr, .. } | Kernel::Q { alpha, cr, .. } => {
                -2.0 * cr * (1.0 / (2.0 - alpha) + 1.0 / alpha)
            }
        }
    }

    /// Scaled weight `h^alpha w_k`, `k >= 1`.
    fn scaled(&self, k: u64) -> f64 {
        let kf = k as f64;
        match *self {
            Kernel::Sp(SpKind::One) => {
                if k % 2 == 1 {
                    2.0 / (PI * kf * kf)
                } else {
                    0.0
                }
            }
            Kernel::Sp(SpKind::Two) => {
                let v = 2.0 / (kf * kf);
                if k % 2 == 1 {
                    v
                } else {
                    -v
                }
            }
            Kernel::Sp(SpKind::General { a, .. }) => {
                if k == 1 {
                    sp_first(a)
                } else {
                    self.alternating_sum(k)
                }
            }
            Kernel::Q { .. } if k >= 3 => self.alternating_sum(k),
            Kernel::Per { w1, pre, alpha } => {
                if k == 1 {
                    w1
                } else {
                    pre * gamma_ratio_shifted(kf, -0.5 * alpha, 1.0 + 0.5 * alpha).unwrap_or(f64::NAN)
                }
            }
            Kernel::Gl { alpha, branch, c, coef } => match branch {
                GlBranch::One => 1.0 / (PI * kf * (kf + 1.0)),
                GlBranch::Low => coef * gamma_ratio_shifted(kf, -alpha, 1.0).unwrap_or(f64::NAN),
                GlBranch::High => {
                    if k == 1 {
                        -c * (1.0 + 0.5 * alpha * (alpha - 1.0))
                    } else {
                        coef * gamma_ratio_shifted(kf, 1.0 - alpha, 2.0).unwrap_or(f64::NAN)
                    }
                }
            },
            Kernel::T { p, alpha, cr } => {
                if k == 1 {
                    cr * (1.0 / (2.0 - alpha) + 1.0 / alpha - expm1_over(LN_2, p) / alpha)
                } else {
                    cr * kf.powf(p) * t_series(p, 1.0 / kf)
                }
            }
            Kernel::Q { p, alpha, cr } => {
                if k == 1 {
                    cr * q_first(alpha)
                } else {
                    // k == 2, the odd-index formula needs k >= 3
                    cr * kf.powf(p) * q_even_series(p, 1.0 / kf)
                }
            }
        }
    }

    fn alternating_sum(&self, k: u64) -> f64 {
        let (s, t) = self.components(k);
        if k % 2 == 0 {
            s + t
        } else {
            s - t
        }
    }

    fn has_alternating(&self) -> bool {
        matches!(self, Kernel::Sp(_) | Kernel::Q { .. })
    }

    /// Split `h^alpha w_k = s_k + (-1)^k t_k` into two sequences that are
    /// smooth in `k`. Valid for `k >= 3`.
    fn components(&self, k: u64) -> (f64, f64) {
        let kf = k as f64;
        match *self {
            Kernel::Sp(SpKind::One) => {
                let v = 1.0 / (PI * kf * kf);
                (v, -v)
            }
            Kernel::Sp(SpKind::Two) => (0.0, -2.0 / (kf * kf)),
            Kernel::Sp(SpKind::General { a, smooth, pi_alpha }) => {
                let h = incomplete_gamma_cf_factor(a, Complex64::new(0.0, -PI * kf))
                    .map(|h| h.re)
                    .unwrap_or(f64::NAN);
                (smooth * kf.powf(-a), pi_alpha * h)
            }
            Kernel::Q { p, cr, .. } => {
                let x = 1.0 / kf;
                let kp = kf.powf(p);
                let even = kp * q_even_series(p, x);
                let odd = kp * q_odd_series(p, x);
                (0.5 * cr * (even + odd), 0.5 * cr * (even - odd))
            }
            _ => (self.scaled(k), 0.0),
        }
    }

    /// `sum_{k >= n} comp_k` for one of the two component sequences, from its
    /// expansion in negative powers of `k`. Requires `n >= 16`.
    fn component_power_sum(&self, n: u64, alternating: bool) -> f64 {
        let q = n as f64;
        let zeta = |s: f64| hurwitz_zeta(s, q).unwrap_or(f64::NAN);
        match *self {
            Kernel::Sp(SpKind::One) => {
                let v = zeta(2.0) / PI;
                if alternating {
                    -v
                } else {
                    v
                }
            }
            Kernel::Sp(SpKind::Two) => {
                if alternating {
                    -2.0 * zeta(2.0)
                } else {
                    0.0
                }
            }
            Kernel::Sp(SpKind::General { a, smooth, pi_alpha }) => {
                if !alternating {
                    return smooth * zeta(a);
                }
                // Re H(a, -i pi k) ~ sum_j (-1)^j (a-1)...(a-2j+1) (pi k)^(-2j)
                let mut falling = a - 1.0;
                let mut sum = 0.0;
                let mut prev = f64::INFINITY;
                for j in 1..40 {
                    let jf = j as f64;
                    let coef = if j % 2 == 1 { -falling } else { falling } * PI.powf(-2.0 * jf);
                    let term = coef * zeta(2.0 * jf);
                    if term.abs() > prev {
                        break;
                    }
                    sum += term;
                    prev = term.abs();
                    if term.abs() < 1e-19 * sum.abs() {
                        break;
                    }
                    falling *= (a - 2.0 * jf) * (a - 2.0 * jf - 1.0);
                }
                pi_alpha * sum
            }
            Kernel::T { p, cr, .. } => {
                if alternating {
                    return 0.0;
                }
                power_series_sum(p, |n, c| 2.0 * c * zeta(2.0 * n as f64 - p), 1.0)
                    * cr
            }
            Kernel::Q { p, cr, .. } => {
                let even = power_series_sum(
                    p,
                    |n, c| {
                        let nf = n as f64;
                        4.0 * c * (2.0 * nf / (2.0 * nf + 1.0)) * zeta(2.0 * nf - p)
                    },
                    1.0,
                );
                let odd = power_series_sum(
                    p,
                    |n, c| {
                        let nf = n as f64;
                        c * (4.0 / (2.0 * nf + 1.0) - 1.0) * 4f64.powi(n as i32) * zeta(2.0 * nf - p)
                    },
                    4.0 / (q * q),
                );
                if alternating {
                    0.5 * cr * (even - odd)
                } else {
                    0.5 * cr * (even + odd)
                }
            }
            _ => {
                if alternating {
                    0.0
                } else {
                    f64::NAN
                }
            }
        }
    }

    /// Closed form of `sum_{k > m} h^alpha w_k` where one is known.
    fn exact_tail(&self, m: u64) -> Option<f64> {
        let mf = m as f64;
        match *self {
            Kernel::Per { alpha, pre, .. } => {
                if alpha == 2.0 {
                    return Some(0.0);
                }
                Some(pre / alpha * gamma_ratio_shifted(mf, 1.0 - 0.5 * alpha, 1.0 + 0.5 * alpha).ok()?)
            }
            Kernel::Gl { alpha, branch, coef, .. } => match branch {
                GlBranch::One => Some(1.0 / (PI * (mf + 1.0))),
                GlBranch::Low => Some(coef / alpha * gamma_ratio_shifted(mf, 1.0 - alpha, 1.0).ok()?),
                GlBranch::High => Some(coef / alpha * gamma_ratio_shifted(mf, 2.0 - alpha, 2.0).ok()?),
            },
            Kernel::T { p, alpha, cr } => {
                // C (F(m) - F(m+1)), F(t) = -t^p / (p alpha)
                Some(cr * mf.powf(p) * expm1_over((1.0 / mf).ln_1p(), p) / alpha)
            }
            _ => None,
        }
    }
}

// h^alpha w_1 for SP through the incomplete Gamma function
fn sp_first(a: f64) -> f64 {
    let z = Complex64::new(0.0, -PI);
    let Ok(big) = upper_incomplete_gamma(a, z) else {
        return f64::NAN;
    };
    let Ok(ga) = gamma(a) else {
        return f64::NAN;
    };
    let pre = Complex64::new(0.0, -1.0).powf(-a);
    (pre * (big - ga)).re / PI
}

// c_n = prod_{i=2}^{2n-1} (p - i) / (2n)!, fed to `f(n, c_n)` until the
// terms (scaled by ratio^n) stop contributing
fn power_series_sum(p: f64, f: impl Fn(usize, f64) -> f64, ratio: f64) -> f64 {
    let mut c = 0.5;
    let mut sum = 0.0;
    let mut weight = 1.0;
    for n in 1..SERIES_MAX {
        let term = f(n, c);
        sum += term;
        weight *= ratio;
        if term.abs() <= 1e-18 * sum.abs() && n > 2 {
            break;
        }
        let nf = n as f64;
        c *= (p - 2.0 * nf) * (p - 2.0 * nf - 1.0) / ((2.0 * nf + 1.0) * (2.0 * nf + 2.0));
        if c * weight == 0.0 {
            break;
        }
    }
    sum
}

fn series(p: f64, x: f64, coef: impl Fn(usize) -> f64, y: f64) -> f64 {
    let x2 = y * x * x;
    let mut c = 0.5;
    let mut pow = x2;
    let mut sum = 0.0;
    for n in 1..SERIES_MAX {
        let term = c * coef(n) * pow;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
        let nf = n as f64;
        c *= (p - 2.0 * nf) * (p - 2.0 * nf - 1.0) / ((2.0 * nf + 1.0) * (2.0 * nf + 2.0));
        pow *= x2;
    }
    sum
}

// second difference of F scaled by k^-p: 2 sum c_n x^2n
fn t_series(p: f64, x: f64) -> f64 {
    2.0 * series(p, x, |_| 1.0, 1.0)
}

fn q_even_series(p: f64, x: f64) -> f64 {
    4.0 * series(p, x, |n| 2.0 * n as f64 / (2.0 * n as f64 + 1.0), 1.0)
}

fn q_odd_series(p: f64, x: f64) -> f64 {
    series(p, x, |n| 4.0 / (2.0 * n as f64 + 1.0) - 1.0, 4.0)
}

// h^alpha w_1^Q / C_{1,alpha}; two algebraically equal forms, each free of
// cancellation on its half of (0, 2)
fn q_first(alpha: f64) -> f64 {
    let p = 1.0 - alpha;
    let ln3 = 3f64.ln();
    if alpha <= 1.5 {
        let e = expm1_over(ln3, p);
        1.0 / (2.0 - alpha) + 1.0 / alpha - (e * (2.5 - 0.5 * p) - 2.0) / (alpha * (1.0 + p))
    } else {
        let q = 2.0 - alpha;
        let e = (q * ln3).exp_m1();
        let eq = expm1_over(ln3, q);
        1.0 / q + 1.0 / alpha + (10.0 + e - 6.0 * eq) / (6.0 * p * alpha)
    }
}

#[derive(Clone)]
enum Source {
    Family(WeightFamily, Kernel),
    Symbol(SymbolFn),
}

/// Extra weights beyond `m` kept for symbol-derived sets (tail estimates).
const SYMBOL_EXTRA: usize = 16;
/// Explicit summation length used before switching to summation by parts.
const TAIL_PHASE: f64 = 400.0;
const TAIL_CAP: u64 = 1 << 23;

/// Truncated, symmetric weight sequence `w_0, ..., w_m` for grid spacing `h`.
#[derive(Clone)]
pub struct WeightSet {
    source: Source,
    alpha: f64,
    h: f64,
    scale: f64,
    w: Vec<f64>,
    tail: f64,
    extra: Vec<f64>,
}

impl fmt::Debug for WeightSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightSet")
            .field("family", &self.family())
            .field("alpha", &self.alpha)
            .field("h", &self.h)
            .field("m", &self.m())
            .finish()
    }
}

fn check_grid(h: f64, m: usize) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return domain(format!("grid spacing must be positive, got {h}"));
    }
    if m == 0 {
        return domain("truncation length m must be at least 1");
    }
    Ok(())
}

/// Generate the weights of `family` for order `alpha`, spacing `h` and
/// truncation length `m`. `w_0` is the closed-form value of the full
/// infinite sum.
pub fn make_weights(family: WeightFamily, alpha: f64, h: f64, m: usize) -> Result<WeightSet> {
    if !family.supports(alpha) {
        return domain(format!("alpha = {alpha} outside the range of the {family} weights"));
    }
    check_grid(h, m)?;
    let kernel = Kernel::new(family, alpha)?;
    let scale = h.powf(-alpha);
    let mut w = vec![0.0; m + 1];
    w[0] = kernel.w0() * scale;
    w[1..]
        .par_iter_mut()
        .with_min_len(1024)
        .enumerate()
        .for_each(|(i, wk)| *wk = kernel.scaled(i as u64 + 1) * scale);
    if let Some(k) = w.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonConvergence(if k == 0 {
            "weight w_0"
        } else {
            "weight evaluation"
        }));
    }
    let tail = match kernel.exact_tail(m as u64) {
        Some(t) => t,
        None => tail_cos_kernel(&kernel, m as u64, 0.0),
    } * scale;
    Ok(WeightSet {
        source: Source::Family(family, kernel),
        alpha,
        h,
        scale,
        w,
        tail,
        extra: Vec::new(),
    })
}

/// Weights for an arbitrary symmetric rescaled symbol `M` with `M(0) = 0`,
/// `w_k = -(h^-alpha / pi) int_0^pi M(xi) cos(k xi) dxi`.
///
/// The integral is split into panels between consecutive zeros of
/// `cos(k xi)` with a 16-point Gauss-Legendre rule per panel and geometric
/// refinement towards `xi = 0`. `w_0` is the `k = 0` integral, which equals
/// `-sum_{k != 0} w_k` for symbols vanishing at the origin.
pub fn weights_from_symbol(symbol: SymbolFn, alpha: f64, h: f64, m: usize) -> Result<WeightSet> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return domain(format!("alpha = {alpha} outside (0, 2]"));
    }
    check_grid(h, m)?;
    let scale = h.powf(-alpha);
    let all: Vec<f64> = (0..=m + SYMBOL_EXTRA)
        .into_par_iter()
        .map(|k| symbol_weight(&symbol, k) * scale)
        .collect();
    if all.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonConvergence("symbol weight quadrature"));
    }
    let w = all[..=m].to_vec();
    let extra = all[m + 1..].to_vec();
    let tail = -0.5 * w[0] - w[1..].iter().rev().sum::<f64>();
    Ok(WeightSet {
        source: Source::Symbol(symbol),
        alpha,
        h,
        scale,
        w,
        tail,
        extra,
    })
}

// scaled weight -(1/pi) int_0^pi M cos(k xi) by panel quadrature
fn symbol_weight(symbol: &SymbolFn, k: usize) -> f64 {
    let kf = k as f64;
    let f = |xi: f64| symbol(xi) * (kf * xi).cos();
    let (first, panels) = if k == 0 {
        (PI / 16.0, 15usize)
    } else {
        (0.5 * PI / kf, k)
    };
    let mut s = quad::graded(&f, 0.0, first, 48);
    let width = if k == 0 { PI / 16.0 } else { PI / kf };
    let mut a = first;
    for _ in 0..panels {
        let b = (a + width).min(PI);
        if b > a {
            s += quad::panel(&f, a, b);
        }
        a = b;
    }
    -s / PI
}

impl WeightSet {
    /// Generating family, `None` for weights derived from a user symbol.
    pub fn family(&self) -> Option<WeightFamily> {
        match self.source {
            Source::Family(f, _) => Some(f),
            Source::Symbol(_) => None,
        }
    }

    /// The generating symbol of a set built by `weights_from_symbol`.
    pub fn symbol_fn(&self) -> Option<&SymbolFn> {
        match &self.source {
            Source::Symbol(f) => Some(f),
            Source::Family(..) => None,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Truncation length.
    pub fn m(&self) -> usize {
        self.w.len() - 1
    }

    /// `w_0, ..., w_m`.
    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn w0(&self) -> f64 {
        self.w[0]
    }

    /// `w_|k|` for `|k| <= m`, zero beyond the truncation.
    pub fn get(&self, k: i64) -> f64 {
        self.w.get(k.unsigned_abs() as usize).copied().unwrap_or(0.0)
    }

    /// `w_k` for any `k`, beyond `m` from the generating closed form (or the
    /// stored extension for symbol-derived sets, zero past it).
    pub fn weight_at(&self, k: u64) -> f64 {
        if let Some(v) = self.w.get(k as usize) {
            return *v;
        }
        match &self.source {
            Source::Family(_, kern) => kern.scaled(k) * self.scale,
            Source::Symbol(_) => self.extra.get(k as usize - self.w.len()).copied().unwrap_or(0.0),
        }
    }

    /// `sum_{k > m} w_k`.
    pub fn tail_sum(&self) -> f64 {
        self.tail
    }

    /// `sum_{k > m} w_k cos(k xi)`.
    pub fn tail_cos_sum(&self, xi: f64) -> f64 {
        let th = reduce_angle(xi);
        if th == 0.0 {
            return self.tail;
        }
        match &self.source {
            Source::Family(_, kern) => tail_cos_kernel(kern, self.m() as u64, th) * self.scale,
            Source::Symbol(_) => {
                let n = self.w.len() as u64;
                let extra = &self.extra;
                sbp(|k| extra[(k - n) as usize], n, th, SYMBOL_EXTRA - 1)
            }
        }
    }

    /// Write the table as CSV with header `k,w_k`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "k,w_k")?;
        for (k, v) in self.w.iter().enumerate() {
            writeln!(out, "{k},{v:.16e}")?;
        }
        Ok(())
    }
}

fn reduce_angle(xi: f64) -> f64 {
    let t = xi.abs() % (2.0 * PI);
    if t > PI {
        2.0 * PI - t
    } else {
        t
    }
}

fn phase_length(angle: f64) -> u64 {
    if angle == 0.0 {
        0
    } else {
        (TAIL_PHASE / angle).ceil().min(1e18) as u64
    }
}

// sum_{k > m} h^alpha w_k cos(k th) for th in [0, pi]
fn tail_cos_kernel(kern: &Kernel, m: u64, th: f64) -> f64 {
    let alt = kern.has_alternating();
    let phi = PI - th;
    let mut n = (m + 1).max(16).max(phase_length(th));
    if alt {
        n = n.max(phase_length(phi));
    }
    n = n.min(m + 1 + TAIL_CAP).max(16);
    let mut acc = 0.0;
    for k in (m + 1..n).rev() {
        acc += kern.scaled(k) * (k as f64 * th).cos();
    }
    acc += if th == 0.0 {
        kern.exact_tail(n - 1)
            .unwrap_or_else(|| kern.component_power_sum(n, false))
    } else {
        sbp(|k| kern.components(k).0, n, th, 6)
    };
    if alt {
        // sum (-1)^k t_k cos(k th) = sum t_k cos(k (pi - th))
        acc += if phi == 0.0 {
            kern.component_power_sum(n, true)
        } else {
            sbp(|k| kern.components(k).1, n, phi, 6)
        };
    }
    acc
}

/// `Re sum_{k >= n} a_k e^{i k th}` by repeated summation by parts,
/// `sum_{j} (nabla^j a)_{n+j} z^{n+j} / (1 - z)^{j+1}`, stopping once the
/// terms stop decreasing.
fn sbp(a: impl Fn(u64) -> f64, n: u64, th: f64, levels: usize) -> f64 {
    let vals: Vec<f64> = (0..=levels as u64).map(|i| a(n + i)).collect();
    let z = Complex64::from_polar(1.0, th);
    let inv = 1.0 / (Complex64::new(1.0, 0.0) - z);
    let mut diff = vals.clone();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut prev = f64::INFINITY;
    let mut invp = inv;
    for j in 0..=levels {
        if j > 0 {
            // nabla^j a at indices n+j.. from nabla^{j-1} at n+j-1..
            for i in (j..=levels).rev() {
                diff[i] -= diff[i - 1];
            }
        }
        let term = diff[j] * Complex64::from_polar(1.0, (n + j as u64) as f64 * th) * invp;
        let mag = term.norm();
        if mag > prev {
            break;
        }
        sum += term;
        prev = mag;
        if mag <= 1e-18 * sum.norm() {
            break;
        }
        invp *= inv;
    }
    sum.re
}

/// Largest admissible `dt / h^alpha` for the explicit Euler heat step,
/// `(-h^alpha w_0)^-1`.
pub fn cfl_cmax(family: WeightFamily, alpha: f64) -> Result<f64> {
    if !family.supports(alpha) {
        return domain(format!("alpha = {alpha} outside the range of the {family} weights"));
    }
    match family {
        WeightFamily::Sp => {
            if alpha >= 1.0 {
                return domain("SP weights become negative for alpha >= 1, no CFL constant");
            }
            Ok(PI.powf(-alpha) * (1.0 + alpha))
        }
        WeightFamily::Per => {
            let g = gamma(0.5 * alpha)?;
            Ok(alpha * g * g / (4.0 * gamma(alpha)?))
        }
        WeightFamily::Gl => {
            if alpha < 1.0 {
                Ok(cos_half_pi(alpha))
            } else if alpha == 1.0 {
                Ok(0.5 * PI)
            } else {
                Ok(-cos_half_pi(alpha) / alpha)
            }
        }
        WeightFamily::T | WeightFamily::Q => Ok(PI.sqrt() * gamma(2.0 - 0.5 * alpha)?
            / (2f64.powf(alpha) * gamma(0.5 * (1.0 + alpha))?)),
    }
}

/// Constant `C` in `w_k ~ C k^(-1-alpha) h^(-alpha)`.
///
/// Q weights decay with different constants on even and odd indices:
/// `4/3 C_{1,alpha}` for even `k`, `2/3 C_{1,alpha}` for odd `k`.
pub fn decay_prefactor(family: WeightFamily, alpha: f64, parity: Parity) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return domain(format!("decay prefactor requires alpha in (0, 2), got {alpha}"));
    }
    let c = riesz_constant(alpha)?;
    match family {
        WeightFamily::Sp if alpha > 1.0 => Err(Error::Unsupported(
            "SP weights decay like k^-2 with alternating signs for alpha > 1".into(),
        )),
        WeightFamily::Sp if alpha == 1.0 => Ok(match parity {
            Parity::Even => 0.0,
            Parity::Odd => 2.0 * c,
            Parity::Any => c,
        }),
        WeightFamily::Q => match parity {
            Parity::Even => Ok(4.0 / 3.0 * c),
            Parity::Odd => Ok(2.0 / 3.0 * c),
            Parity::Any => Err(Error::Unsupported(
                "Q weights have parity-dependent decay; pick even or odd".into(),
            )),
        },
        _ => Ok(c),
    }
}

/// True iff `w_k >= 0` for every `1 <= k <= m`.
pub fn is_nonnegative(ws: &WeightSet) -> bool {
    ws.weights()[1..].iter().all(|&v| v >= 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    // F, G of the quadrature weights evaluated directly
    fn f_aux(alpha: f64, t: f64) -> f64 {
        if alpha == 1.0 {
            -t.ln()
        } else {
            t.powf(1.0 - alpha) / ((alpha - 1.0) * alpha)
        }
    }

    fn g_aux(alpha: f64, t: f64) -> f64 {
        if alpha == 1.0 {
            t - t * t.ln()
        } else {
            t.powf(2.0 - alpha) / ((2.0 - alpha) * (alpha - 1.0) * alpha)
        }
    }

    fn fp_aux(alpha: f64, t: f64) -> f64 {
        -t.powf(-alpha) / alpha
    }

    fn t_direct(alpha: f64, k: u64) -> f64 {
        let c = riesz_constant(alpha).unwrap();
        let f = |t: f64| f_aux(alpha, t);
        let kf = k as f64;
        c * if k == 1 {
            1.0 / (2.0 - alpha) - fp_aux(alpha, 1.0) + f(2.0) - f(1.0)
        } else {
            f(kf + 1.0) - 2.0 * f(kf) + f(kf - 1.0)
        }
    }

    fn q_direct(alpha: f64, k: u64) -> f64 {
        let c = riesz_constant(alpha).unwrap();
        let g = |t: f64| g_aux(alpha, t);
        let g1 = |t: f64| f_aux(alpha, t);
        let g2 = |t: f64| fp_aux(alpha, t);
        let kf = k as f64;
        c * if k == 1 {
            1.0 / (2.0 - alpha) - g2(1.0) - 0.5 * (g1(3.0) + 3.0 * g1(1.0)) + g(3.0) - g(1.0)
        } else if k % 2 == 0 {
            2.0 * (g1(kf + 1.0) + g1(kf - 1.0) - g(kf + 1.0) + g(kf - 1.0))
        } else {
            -0.5 * (g1(kf + 2.0) + 6.0 * g1(kf) + g1(kf - 2.0)) + g(kf + 2.0) - g(kf - 2.0)
        }
    }

    #[test]
    fn spec_examples() {
        let sp1 = make_weights(WeightFamily::Sp, 1.0, 1.0, 4).unwrap();
        assert!((sp1.get(1) - 2.0 / PI).abs() < 1e-15);
        let sp2 = make_weights(WeightFamily::Sp, 2.0, 1.0, 4).unwrap();
        assert!((sp2.get(1) - 2.0).abs() < 1e-15);
        assert!((sp2.get(2) + 0.5).abs() < 1e-15);
        let per = make_weights(WeightFamily::Per, 1.0, 1.0, 4).unwrap();
        assert!(rel(per.get(1), 4.0 / (3.0 * PI)) < 1e-14);
        let gl = make_weights(WeightFamily::Gl, 0.5, 1.0, 4).unwrap();
        assert!(rel(gl.w0(), -2f64.sqrt()) < 1e-14);
        let t = make_weights(WeightFamily::T, 2.0 - 1e-9, 1.0, 8).unwrap();
        assert!((t.get(1) - 1.0).abs() < 1e-6);
        for k in 2..=8 {
            assert!(t.get(k).abs() < 1e-6);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(make_weights(WeightFamily::T, 2.0, 1.0, 4).is_err());
        assert!(make_weights(WeightFamily::Q, 0.0, 1.0, 4).is_err());
        assert!(make_weights(WeightFamily::Per, 2.5, 1.0, 4).is_err());
        assert!(make_weights(WeightFamily::Per, 1.0, 0.0, 4).is_err());
        assert!(make_weights(WeightFamily::Per, 1.0, 1.0, 0).is_err());
        assert!(cfl_cmax(WeightFamily::Sp, 1.2).is_err());
        assert!(matches!(
            decay_prefactor(WeightFamily::Sp, 1.5, Parity::Any),
            Err(Error::Unsupported(_))
        ));
        assert!("XX".parse::<WeightFamily>().is_err());
        assert_eq!("per".parse::<WeightFamily>().unwrap(), WeightFamily::Per);
    }

    #[test]
    fn quadrature_weights_match_direct_formulas() {
        for &alpha in &[0.3, 0.8, 1.0, 1.25, 1.7] {
            let t = make_weights(WeightFamily::T, alpha, 1.0, 40).unwrap();
            let q = make_weights(WeightFamily::Q, alpha, 1.0, 40).unwrap();
            for k in 1..=40u64 {
                let tol = 1e-10 * (k * k) as f64;
                assert!(rel(t.get(k as i64), t_direct(alpha, k)) < tol, "T alpha={alpha} k={k}");
                assert!(rel(q.get(k as i64), q_direct(alpha, k)) < tol, "Q alpha={alpha} k={k}");
            }
        }
    }

    #[test]
    fn q_first_weight_forms_agree() {
        for &alpha in &[1.2, 1.4, 1.5, 1.6, 1.9] {
            let p = 1.0 - alpha;
            let e = expm1_over(3f64.ln(), p);
            let a = 1.0 / (2.0 - alpha) + 1.0 / alpha - (e * (2.5 - 0.5 * p) - 2.0) / (alpha * (1.0 + p));
            assert!(rel(q_first(alpha), a) < 1e-12, "alpha = {alpha}");
        }
        assert!((q_first(1.0) - (4.0 - 2.5 * 3f64.ln())).abs() < 1e-14);
    }

    #[test]
    fn q_w0_matches_t_w0() {
        // the telescoped Q sum reproduces the T value of w_0
        for &alpha in &[0.4, 1.0, 1.6] {
            let q = make_weights(WeightFamily::Q, alpha, 1.0, 4000).unwrap();
            let s = q.weights()[1..].iter().rev().sum::<f64>() + q.tail_sum();
            assert!(rel(-2.0 * s, q.w0()) < 1e-10, "alpha = {alpha}");
        }
    }

    #[test]
    fn gl_high_branch_is_shifted_low_formula() {
        for &alpha in &[1.2, 1.5, 1.8] {
            let ws = make_weights(WeightFamily::Gl, alpha, 1.0, 30).unwrap();
            let c = 0.5 / (alpha * PI / 2.0).cos();
            for k in 2..30u64 {
                // (0,1)-shape alpha Gamma(j - alpha) / (j! Gamma(1 - alpha)) at j = k + 1
                let j = (k + 1) as f64;
                let low = c * alpha * gamma(j - alpha).unwrap() / (gamma(j + 1.0).unwrap() * gamma(1.0 - alpha).unwrap());
                assert!(rel(ws.get(k as i64), low) < 1e-12);
            }
        }
    }

    #[test]
    fn gl_at_one_is_special_sequence() {
        let ws = make_weights(WeightFamily::Gl, 1.0, 0.5, 10).unwrap();
        for k in 1..=10i64 {
            let kf = k as f64;
            assert!(rel(ws.get(k), 1.0 / (PI * 0.5 * kf * (kf + 1.0))) < 1e-15);
        }
        assert!(rel(ws.w0(), -2.0 / (PI * 0.5)) < 1e-15);
    }

    #[test]
    fn sp_matches_panel_quadrature() {
        for &alpha in &[0.3, 0.5, 1.3, 1.7] {
            let ws = make_weights(WeightFamily::Sp, alpha, 1.0, 64).unwrap();
            for k in 1..=64usize {
                let kf = k as f64;
                let f = |xi: f64| xi.powf(alpha) * (kf * xi).cos();
                let mut s = quad::graded(&f, 0.0, 0.5 * PI / kf, 60);
                let mut a = 0.5 * PI / kf;
                while a < PI {
                    let b = (a + PI / kf).min(PI);
                    s += quad::panel(&f, a, b);
                    a = b;
                }
                let oracle = -s / PI;
                assert!((ws.get(k as i64) - oracle).abs() < 1e-9 * oracle.abs().max(1e-3), "alpha {alpha} k {k}");
            }
        }
    }

    #[test]
    fn tail_closes_w0_for_all_families() {
        for fam in WeightFamily::ALL {
            for &alpha in &[0.3, 0.8, 1.0, 1.5, 1.9] {
                let ws = make_weights(fam, alpha, 1.0, 300).unwrap();
                let s = ws.weights()[1..].iter().rev().sum::<f64>() + ws.tail_sum();
                assert!(
                    (ws.w0() + 2.0 * s).abs() < 1e-12 * ws.w0().abs(),
                    "{fam} alpha {alpha}: {}",
                    ws.w0() + 2.0 * s
                );
            }
        }
    }

    #[test]
    fn exact_tails_match_generic_route() {
        for fam in [WeightFamily::Per, WeightFamily::Gl, WeightFamily::T] {
            for &alpha in &[0.4, 1.0, 1.6] {
                let kern = Kernel::new(fam, alpha).unwrap();
                let exact = kern.exact_tail(99).unwrap();
                let direct: f64 = (100..20_000u64).rev().map(|k| kern.scaled(k)).sum::<f64>()
                    + kern.exact_tail(19_999).unwrap();
                assert!(rel(exact, direct) < 1e-12, "{fam} {alpha} {exact} {direct}");
                if fam == WeightFamily::T {
                    let ps = kern.component_power_sum(100, false);
                    assert!(rel(exact, ps) < 1e-12, "{alpha}: {exact} vs {ps}");
                }
            }
        }
    }

    #[test]
    fn oscillating_tail_against_brute_force() {
        // r: decay exponent of the remainder of the non-oscillating
        // component at xi = pi
        for (fam, alpha, r) in [
            (WeightFamily::Per, 0.7, None),
            (WeightFamily::Sp, 1.5, Some(1.0)),
            (WeightFamily::Q, 0.6, Some(0.6)),
            (WeightFamily::Sp, 0.5, Some(1.0)),
        ] {
            let ws = make_weights(fam, alpha, 1.0, 64).unwrap();
            let kern = Kernel::new(fam, alpha).unwrap();
            for &xi in &[0.9, 2.0, PI - 0.3, PI] {
                let n = 1u64 << 19;
                let part = |lo: u64, hi: u64| -> f64 {
                    (lo..hi).rev().map(|k| kern.scaled(k) * (k as f64 * xi).cos()).sum()
                };
                let s1 = part(65, n);
                let s2 = s1 + part(n, 2 * n);
                let (brute, bound) = match r {
                    Some(r) if xi == PI => {
                        // averaging consecutive partial sums removes the
                        // alternating part of the remainder
                        let a1 = s1 + 0.5 * kern.scaled(n) * (n as f64 * xi).cos();
                        let a2 = s2 + 0.5 * kern.scaled(2 * n) * (2.0 * n as f64 * xi).cos();
                        (a2 + (a2 - a1) / (2f64.powf(r) - 1.0), 1e-10)
                    }
                    _ => {
                        // oscillating remainder is bounded by the last term over |1 - e^(i xi)|
                        let gap = 2.0 * (0.5 * xi.min(PI - xi).max(1e-3)).sin();
                        (s2, 1e-11 + 4.0 * kern.scaled(2 * n).abs() / gap)
                    }
                };
                let got = ws.tail_cos_sum(xi);
                assert!((got - brute).abs() < bound, "{fam} {alpha} {xi}: {got} vs {brute}");
            }
        }
    }

    #[test]
    fn symbol_weights_reproduce_closed_forms() {
        let alpha = 0.7;
        let sp = make_weights(WeightFamily::Sp, alpha, 0.5, 32).unwrap();
        let from_sym = weights_from_symbol(Arc::new(move |x: f64| x.abs().powf(alpha)), alpha, 0.5, 32).unwrap();
        for k in 0..=32 {
            assert!((sp.get(k) - from_sym.get(k)).abs() < 1e-9, "k = {k}");
        }
        let per = make_weights(WeightFamily::Per, 1.4, 1.0, 32).unwrap();
        let sym = weights_from_symbol(
            Arc::new(|x: f64| (2.0 - 2.0 * x.cos()).powf(0.7)),
            1.4,
            1.0,
            32,
        )
        .unwrap();
        for k in 0..=32 {
            assert!((per.get(k) - sym.get(k)).abs() < 1e-9, "k = {k}");
        }
        let zero = weights_from_symbol(Arc::new(|_| 0.0), 1.0, 1.0, 8).unwrap();
        assert!(zero.weights().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn csv_table() {
        let ws = make_weights(WeightFamily::Per, 1.0, 1.0, 3).unwrap();
        let mut buf = Vec::new();
        ws.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "k,w_k");
        assert_eq!(lines.len(), 5);
        let v: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(v, ws.get(1));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn family() -> impl Strategy<Value = WeightFamily> {
            prop::sample::select(WeightFamily::ALL.to_vec())
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn scale_separation(fam in family(), alpha in 0.05f64..1.95) {
                let a = make_weights(fam, alpha, 1.0, 40).unwrap();
                let b = make_weights(fam, alpha, 0.1, 40).unwrap();
                let s = 0.1f64.powf(alpha);
                for k in 0..=40 {
                    let (x, y) = (a.get(k), b.get(k) * s);
                    prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300));
                }
            }

            #[test]
            fn positivity(fam in family(), alpha in 0.02f64..1.98) {
                prop_assume!(fam != WeightFamily::Sp || alpha <= 1.0);
                let ws = make_weights(fam, alpha, 1.0, 200).unwrap();
                prop_assert!(ws.weights()[1..].iter().all(|&v| v > 0.0) || (fam == WeightFamily::Sp && alpha == 1.0));
            }

            #[test]
            fn cfl_matches_generated_w0(fam in family(), alpha in 0.02f64..1.98) {
                prop_assume!(fam != WeightFamily::Sp || alpha < 1.0);
                let ws = make_weights(fam, alpha, 0.3, 8).unwrap();
                let c = cfl_cmax(fam, alpha).unwrap();
                let from_w = 1.0 / (-0.3f64.powf(alpha) * ws.w0());
                prop_assert!((c - from_w).abs() <= 1e-8 * c);
            }
        }
    }
}

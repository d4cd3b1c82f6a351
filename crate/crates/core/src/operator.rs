//! Application of the discrete operator
//! `(L u)_j = sum_k (u_j - u_{j-k}) w_k = -sum_k w_k u_{j-k}` to grid fields.

use std::ops::Range;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{domain, Error, Result};
use crate::grid::GridField;
use crate::specfun::{gauss_2f1, riesz_constant};
use crate::symbol::least_squares;
use crate::weights::WeightSet;

const PAR_MIN: usize = 64;

fn check_grid(ws: &WeightSet, f: &GridField) -> Result<()> {
    let (a, b) = (ws.h(), f.h());
    if (a - b).abs() > 1e-12 * a.max(b) {
        return Err(Error::GridMismatch { weights: a, field: b });
    }
    Ok(())
}

/// Zero-extension application at the grid indices in `range`. Values outside
/// the field window are taken as zero; weights beyond the truncation length
/// only enter through `w_0`.
pub fn apply_direct(ws: &WeightSet, f: &GridField, range: Range<i64>) -> Result<Vec<f64>> {
    check_grid(ws, f)?;
    let local = f.local_range(&range)?;
    let w = ws.weights();
    let m = ws.m();
    let u = f.values();
    let n = u.len();
    let out = local
        .into_par_iter()
        .with_min_len(PAR_MIN)
        .map(|i| {
            let lo = i.saturating_sub(m);
            let hi = (i + m + 1).min(n);
            let mut acc = 0.0;
            for (t, v) in u[lo..hi].iter().enumerate() {
                acc += w[(lo + t).abs_diff(i)] * v;
            }
            -acc
        })
        .collect();
    Ok(out)
}

/// Convolution with the weights through a zero-padded circular FFT,
/// precomputed for fields of a fixed length.
#[derive(Clone)]
pub struct FastOperator {
    n: usize,
    w0: f64,
    kernel: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FastOperator {
    /// Plan for fields of length `n`; the transform length is the next power
    /// of two not below `n + 2m`.
    pub fn new(ws: &WeightSet, n: usize) -> Result<Self> {
        if n == 0 {
            return domain("field length must be positive");
        }
        let m = ws.m();
        let len = (n + 2 * m).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let w = ws.weights();
        let mut kernel = vec![Complex64::new(0.0, 0.0); len];
        for (k, &wk) in w.iter().enumerate().skip(1) {
            kernel[k].re = wk;
            kernel[len - k].re = wk;
        }
        forward.process(&mut kernel);
        let scale = 1.0 / len as f64;
        for c in kernel.iter_mut() {
            *c *= scale;
        }
        Ok(FastOperator {
            n,
            w0: w[0],
            kernel,
            forward,
            inverse,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `(L u)` on the whole window with zero extension.
    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n];
        self.apply_into(u, &mut out)?;
        Ok(out)
    }

    pub fn apply_into(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        if u.len() != self.n || out.len() != self.n {
            return domain(format!(
                "fast operator planned for length {}, got {} and {}",
                self.n,
                u.len(),
                out.len()
            ));
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); self.kernel.len()];
        for (b, &v) in buf.iter_mut().zip(u) {
            b.re = v;
        }
        self.forward.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&self.kernel) {
            *b *= k;
        }
        self.inverse.process(&mut buf);
        for ((o, b), &v) in out.iter_mut().zip(&buf).zip(u) {
            *o = -self.w0 * v - b.re;
        }
        Ok(())
    }
}

/// Same result as `apply_direct` over the whole window, computed with one
/// FFT convolution.
pub fn apply_fast(ws: &WeightSet, f: &GridField) -> Result<Vec<f64>> {
    check_grid(ws, f)?;
    FastOperator::new(ws, f.len())?.apply(f.values())
}

/// Discrete energy `(h/4) sum_j sum_k |u_j - u_{j-k}|^2 w_k` over all of
/// `Z_h`, with the field extended by zero.
///
/// Pairs at distance beyond the truncation length are handled like pairs
/// with an exterior point, so that the energy equals `<L u, u> / 2` for the
/// operator of `apply_direct`.
pub fn energy(ws: &WeightSet, f: &GridField) -> Result<f64> {
    check_grid(ws, f)?;
    let u = f.values();
    let n = u.len();
    let w = ws.weights();
    let m = ws.m();
    let total: f64 = (0..n)
        .into_par_iter()
        .with_min_len(PAR_MIN)
        .map(|i| {
            let lo = i.saturating_sub(m);
            let hi = (i + m + 1).min(n);
            let mut inside = 0.0;
            let mut pairs = 0.0;
            for t in lo..hi {
                if t == i {
                    continue;
                }
                let wk = w[t.abs_diff(i)];
                inside += wk;
                let d = u[i] - u[t];
                pairs += d * d * wk;
            }
            // exterior partners (u = 0 there) counted once from each side
            pairs + 2.0 * u[i] * u[i] * (-w[0] - inside)
        })
        .sum();
    Ok(0.25 * f.h() * total)
}

/// `h sum_j u_j v_j`.
pub fn inner(h: f64, u: &[f64], v: &[f64]) -> f64 {
    h * u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>()
}

/// Algebraic far-field description `u(y) ~ c + (u(+-L) - c) (L / |y|)^beta`
/// on each side of the window `[-L, L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailSpec {
    pub beta: f64,
    pub l: f64,
    pub l_m: f64,
    pub u_left: f64,
    pub u_right: f64,
    pub offset_left: f64,
    pub offset_right: f64,
    allow_short: bool,
}

impl TailSpec {
    /// Tail with zero far-field constants. Requires `L_M >= 3 L`.
    pub fn new(beta: f64, l: f64, l_m: f64, u_left: f64, u_right: f64) -> Result<Self> {
        let t = TailSpec {
            beta,
            l,
            l_m,
            u_left,
            u_right,
            offset_left: 0.0,
            offset_right: 0.0,
            allow_short: false,
        };
        t.validate()?;
        Ok(t)
    }

    /// Tail for the window of `f` with `L_M = 3 L` and edge values read from
    /// the field.
    pub fn for_field(f: &GridField, beta: f64) -> Result<Self> {
        let n = f
            .half_width()
            .ok_or_else(|| Error::Unsupported("tail handling needs a symmetric window".into()))?;
        let l = n as f64 * f.h();
        let u = f.values();
        Self::new(beta, l, 3.0 * l, u[0], u[u.len() - 1])
    }

    pub fn with_offsets(mut self, left: f64, right: f64) -> Self {
        self.offset_left = left;
        self.offset_right = right;
        self
    }

    pub fn with_edges(mut self, left: f64, right: f64) -> Self {
        self.u_left = left;
        self.u_right = right;
        self
    }

    /// Permit `L <= L_M < 3 L`; the hypergeometric argument stays guarded.
    pub fn allow_short_extension(mut self) -> Result<Self> {
        self.allow_short = true;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) {
            return domain(format!("tail exponent beta must be positive, got {}", self.beta));
        }
        if !(self.l > 0.0) {
            return domain(format!("window edge L must be positive, got {}", self.l));
        }
        let min = if self.allow_short { self.l } else { 3.0 * self.l * (1.0 - 1e-12) };
        if !(self.l_m >= min) {
            return domain(format!(
                "extension radius L_M = {} below the required {}",
                self.l_m, min
            ));
        }
        Ok(())
    }
}

/// `(II) - (III)`: the exterior part `|y| > L_M` of the singular integral at
/// `x_j` for the asymptotic profile of `tail`, all terms as exact integrals.
pub fn tail_correction(alpha: f64, tail: &TailSpec, x_j: f64, u_j: f64) -> Result<f64> {
    let c = riesz_constant(alpha)?;
    let lm = tail.l_m;
    let (right, left) = ((lm - x_j).powf(-alpha), (lm + x_j).powf(-alpha));
    let two = c * u_j * (right + left) / alpha;
    let flat = c * (tail.offset_right * right + tail.offset_left * left) / alpha;
    Ok(two - flat - decaying_part(alpha, tail, x_j)?)
}

// integral of the decaying part (u(+-L) - c) (L / |y|)^beta against the
// kernel over |y| > L_M
fn decaying_part(alpha: f64, tail: &TailSpec, x_j: f64) -> Result<f64> {
    let lm = tail.l_m;
    let z = x_j / lm;
    if z.abs() > 0.9 {
        return domain(format!("|x_j / L_M| = {} exceeds 0.9", z.abs()));
    }
    let ab = alpha + tail.beta;
    let scale = riesz_constant(alpha)? * tail.l.powf(tail.beta) / (ab * lm.powf(ab));
    let right = (tail.u_right - tail.offset_right) * gauss_2f1(alpha + 1.0, ab, ab + 1.0, z)?;
    let left = (tail.u_left - tail.offset_left) * gauss_2f1(alpha + 1.0, ab, ab + 1.0, -z)?;
    Ok(scale * (right + left))
}

/// Truncated scheme with far-field correction on the symmetric window
/// `[-L, L]` of `f`.
///
/// Grid points up to `x_M = floor(L_M / h) h` enter the finite sum, those
/// outside the window with the asymptotic profile of `tail`. Beyond
/// `L_M = x_M + h/2` the `u_j` term and the far-field constants are summed
/// exactly through the weight tail (`w_0` closure), and the decaying part of
/// the profile is integrated against `C_{1,alpha} |x - y|^(-1-alpha)` in
/// closed form. The weights must reach index `N + M`.
pub fn apply_truncated(ws: &WeightSet, f: &GridField, tail: &TailSpec) -> Result<Vec<f64>> {
    check_grid(ws, f)?;
    let n = f
        .half_width()
        .ok_or_else(|| Error::Unsupported("tail handling needs a symmetric window".into()))?;
    let h = f.h();
    if ((n as f64 * h) - tail.l).abs() > 1e-9 * tail.l {
        return domain(format!(
            "tail window edge {} does not match the field edge {}",
            tail.l,
            n as f64 * h
        ));
    }
    let big_m = (tail.l_m / h + 1e-9).floor() as usize;
    if big_m < n {
        return domain("extension radius smaller than the window");
    }
    if ws.m() < n + big_m {
        return domain(format!(
            "weights truncated at m = {}, need at least N + M = {}",
            ws.m(),
            n + big_m
        ));
    }
    let eff = TailSpec {
        l_m: (big_m as f64 + 0.5) * h,
        ..tail.clone()
    };
    let alpha = ws.alpha();
    let u = f.values();
    let ext: Vec<f64> = (0..=2 * big_m)
        .map(|t| {
            let k = t as i64 - big_m as i64;
            if k.unsigned_abs() as usize <= n {
                u[(k + n as i64) as usize]
            } else {
                let y = (k as f64 * h).abs();
                let (c, edge) = if k < 0 {
                    (eff.offset_left, eff.u_left)
                } else {
                    (eff.offset_right, eff.u_right)
                };
                c + (edge - c) * (eff.l / y).powf(eff.beta)
            }
        })
        .collect();
    let w = ws.weights();
    let half = -0.5 * w[0];
    let mut prefix = vec![0.0; n + big_m + 1];
    for i in 1..prefix.len() {
        prefix[i] = prefix[i - 1] + w[i];
    }
    (0..u.len())
        .into_par_iter()
        .with_min_len(PAR_MIN)
        .map(|i| {
            let j = i as i64 - n as i64;
            let t = (j + big_m as i64) as usize;
            let mut conv = 0.0;
            for (q, v) in ext.iter().enumerate() {
                if q != t {
                    conv += w[q.abs_diff(t)] * v;
                }
            }
            // sum of w_{j-k} over k > M and over k < -M
            let beyond_right = half - prefix[(big_m as i64 - j) as usize];
            let beyond_left = half - prefix[(big_m as i64 + j) as usize];
            let flat = eff.offset_right * beyond_right + eff.offset_left * beyond_left;
            let far = decaying_part(alpha, &eff, j as f64 * h)?;
            Ok(-w[0] * u[i] - conv - flat - far)
        })
        .collect()
}

/// Exterior closure used when the operator is applied on a whole window.
#[derive(Debug, Clone, PartialEq)]
pub enum Exterior {
    /// `u = 0` outside the window.
    Zero,
    /// `u = c` outside the window.
    Constant(f64),
    /// Algebraic tails; the edge values are refreshed from the field.
    Tail(TailSpec),
}

/// Operator on the whole window of `f` under the given closure.
pub fn apply(ws: &WeightSet, f: &GridField, exterior: &Exterior) -> Result<Vec<f64>> {
    match exterior {
        Exterior::Zero => apply_direct(ws, f, f.indices()),
        Exterior::Constant(c) => {
            let shifted = f.with_values(f.values().iter().map(|v| v - c).collect())?;
            apply_direct(ws, &shifted, f.indices())
        }
        Exterior::Tail(t) => {
            let u = f.values();
            let t = t.clone().with_edges(u[0], u[u.len() - 1]);
            apply_truncated(ws, f, &t)
        }
    }
}

/// Decay exponent `beta` of `|u - c| ~ |x|^-beta` from a log-log least-squares
/// fit over the outer 10% of a symmetric window, both sides pooled.
pub fn estimate_beta(f: &GridField, offset_left: f64, offset_right: f64) -> Result<f64> {
    let n = f
        .half_width()
        .ok_or_else(|| Error::Unsupported("beta fit needs a symmetric window".into()))?;
    let first = n - n / 10;
    let u = f.values();
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for k in first.max(1)..=n {
        for (i, c) in [(n + k, offset_right), (n - k, offset_left)] {
            let d = (u[i] - c).abs();
            if d > 0.0 {
                lx.push(f.x(i).abs().ln());
                ly.push(d.ln());
            }
        }
    }
    if lx.len() < 4 {
        return Err(Error::Fit("too few nonzero samples in the outer window".into()));
    }
    let (slope, _) = least_squares(&lx, &ly);
    let beta = -slope;
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Fit(format!("fitted tail exponent {beta} is not positive")));
    }
    Ok(beta)
}

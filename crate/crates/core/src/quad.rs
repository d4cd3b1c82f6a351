//! Gauss-Legendre quadrature helpers.

use std::sync::OnceLock;

use crate::error::{Error, Result};

const ORDER: usize = 16;

static GL16: OnceLock<([f64; ORDER], [f64; ORDER])> = OnceLock::new();

fn legendre(n: usize, x: f64) -> (f64, f64) {
    // returns (P_n(x), P_n'(x))
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Nodes and weights of the 16-point Gauss-Legendre rule on [-1, 1].
pub fn gl16() -> &'static ([f64; ORDER], [f64; ORDER]) {
    GL16.get_or_init(|| {
        let mut x = [0.0; ORDER];
        let mut w = [0.0; ORDER];
        let n = ORDER as f64;
        for i in 0..ORDER / 2 {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(ORDER, z);
                let dz = p / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(ORDER, z);
            let wi = 2.0 / ((1.0 - z * z) * dp * dp);
            x[i] = -z;
            x[ORDER - 1 - i] = z;
            w[i] = wi;
            w[ORDER - 1 - i] = wi;
        }
        (x, w)
    })
}

/// Single 16-point panel on [a, b].
pub fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (x, w) = gl16();
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut s = 0.0;
    for i in 0..ORDER {
        s += w[i] * f(c + r * x[i]);
    }
    s * r
}

/// Panels on [a, b] geometrically refined towards `a`, for integrands with
/// an integrable algebraic singularity at the left end point.
pub fn graded<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, levels: usize) -> f64 {
    let mut s = 0.0;
    let mut hi = b;
    for _ in 0..levels {
        let lo = a + 0.5 * (hi - a);
        s += panel(f, lo, hi);
        hi = lo;
    }
    s + panel(f, a, hi)
}

/// Adaptive bisection with a 16-point panel pair as error estimate.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> Result<f64> {
        let m = 0.5 * (a + b);
        let left = panel(f, a, m);
        let right = panel(f, m, b);
        let both = left + right;
        if (both - whole).abs() <= tol.max(1e-15 * both.abs()) || (b - a).abs() < 1e-14 * (a.abs() + b.abs()) {
            return Ok(both);
        }
        if depth == 0 {
            return Err(Error::NonConvergence("adaptive quadrature"));
        }
        Ok(rec(f, a, m, left, 0.5 * tol, depth - 1)? + rec(f, m, b, right, 0.5 * tol, depth - 1)?)
    }
    let whole = panel(f, a, b);
    rec(f, a, b, whole, tol.max(1e-300), 40)
}

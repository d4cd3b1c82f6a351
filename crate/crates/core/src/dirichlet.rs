//! The extended Dirichlet problem on `(-a, a)`: `L_h u = f` at interior grid
//! points, `u = g` on every exterior grid point.

use std::ops::Range;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::grid::GridField;
use crate::operator::apply_direct;
use crate::oracle::{beta_bump, bump_constant};
use crate::weights::{is_nonnegative, make_weights, WeightFamily, WeightSet};

pub type ExteriorFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `L_h u = f` on `|x_j| < a`, `u = g` elsewhere.
#[derive(Clone)]
pub struct DirichletProblem {
    ws: WeightSet,
    halfwidth: f64,
    n: usize,
    f: Vec<f64>,
    g: Option<(ExteriorFn, f64)>,
}

impl DirichletProblem {
    /// Interior `|x| < halfwidth`; `halfwidth / h` must be an integer so the
    /// boundary points `±halfwidth` are grid points of the exterior.
    pub fn new(ws: WeightSet, halfwidth: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let ratio = halfwidth / ws.h();
        let n = ratio.round();
        if !(halfwidth > 0.0) || (ratio - n).abs() > 1e-9 * ratio.max(1.0) || n < 1.0 {
            return domain(format!(
                "halfwidth / h = {ratio} is not a positive integer"
            ));
        }
        let n = n as usize;
        let h = ws.h();
        let f = (1 - n as i64..n as i64).map(|j| f(j as f64 * h)).collect();
        Ok(DirichletProblem { ws, halfwidth, n, f, g: None })
    }

    /// Exterior data `g`, sampled on `|x| <= l_m`; zero beyond.
    pub fn with_exterior(mut self, g: ExteriorFn, l_m: f64) -> Result<Self> {
        if !(l_m >= self.halfwidth) {
            return domain(format!(
                "exterior radius {l_m} must be at least the half width {}",
                self.halfwidth
            ));
        }
        self.g = Some((g, l_m));
        Ok(self)
    }

    pub fn weights(&self) -> &WeightSet {
        &self.ws
    }

    pub fn halfwidth(&self) -> f64 {
        self.halfwidth
    }

    /// Interior grid indices `1-n .. n`.
    pub fn interior(&self) -> Range<i64> {
        1 - self.n as i64..self.n as i64
    }

    pub fn unknowns(&self) -> usize {
        2 * self.n - 1
    }
}

/// Matrix `A_{jj'} = -w_{j-j'}` and right-hand side `f_j + sum_ext w_{j-k} g_k`.
pub fn assemble(p: &DirichletProblem) -> (DMatrix<f64>, DVector<f64>) {
    let size = p.unknowns();
    let diag: Vec<f64> = (0..size as u64).map(|k| -p.ws.weight_at(k)).collect();
    let a = DMatrix::from_fn(size, size, |r, c| diag[r.abs_diff(c)]);
    let lo = p.interior().start;
    let h = p.ws.h();
    let rhs: Vec<f64> = (0..size)
        .into_par_iter()
        .map(|r| {
            let j = lo + r as i64;
            let mut b = p.f[r];
            if let Some((g, l_m)) = &p.g {
                let kmax = (l_m / h + 1e-9).floor() as i64;
                for k in (-kmax..=kmax).filter(|k| k.unsigned_abs() >= p.n as u64) {
                    b += p.ws.weight_at((j - k).unsigned_abs()) * g(k as f64 * h);
                }
            }
            b
        })
        .collect();
    (a, DVector::from_vec(rhs))
}

/// Interior solution together with diagnostics.
#[derive(Debug, Clone)]
pub struct DirichletSolution {
    pub field: GridField,
    /// `|A u - b|_inf / (|A|_inf |u|_inf + |b|_inf)`.
    pub residual: f64,
    /// False when the weights have negative entries, so that the M-matrix
    /// argument for solvability does not apply.
    pub nonnegative_weights: bool,
}

/// Dense LU solve of the assembled system.
pub fn solve(p: &DirichletProblem) -> Result<DirichletSolution> {
    let (a, b) = assemble(p);
    let lu = a.clone().lu();
    let u = lu
        .solve(&b)
        .ok_or_else(|| Error::Singular(format!("{} x {} Dirichlet matrix", b.len(), b.len())))?;
    let r = &a * &u - &b;
    let norm_a = a.row_iter().map(|row| row.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let scale = norm_a * u.amax() + b.amax();
    let residual = if scale > 0.0 { r.amax() / scale } else { 0.0 };
    if !(residual <= 1e-10) {
        return Err(Error::Singular(format!("residual {residual:e} after LU solve")));
    }
    let field = GridField::new(p.ws.h(), p.interior().start, u.as_slice().to_vec())?;
    Ok(DirichletSolution {
        field,
        residual,
        nonnegative_weights: is_nonnegative(&p.ws),
    })
}

/// Discrete maximum principle on `interior`: if `L_h u <= 0` there, the
/// interior maximum does not exceed the exterior one. The field is extended
/// by zero beyond its window, so zero counts as an exterior value. Returns
/// `true` when the hypothesis fails.
pub fn check_max_principle(ws: &WeightSet, u: &GridField, interior: Range<i64>) -> Result<bool> {
    let local = u.local_range(&interior)?;
    let lu = apply_direct(ws, u, interior)?;
    let tol = 1e-9 * (-ws.w0()).max(1.0) * u.sup_norm().max(1.0);
    if lu.iter().any(|&v| v > tol) {
        return Ok(true);
    }
    let vals = u.values();
    let inner = vals[local.clone()].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let outer = vals[..local.start]
        .iter()
        .chain(&vals[local.end..])
        .copied()
        .fold(0.0f64, f64::max);
    Ok(inner <= outer + 1e-12 * u.sup_norm().max(1.0))
}

/// `v_G(x) = (1 - x^2)_+^{alpha/2} / K_alpha`, which satisfies
/// `(-Delta)^{alpha/2} v_G = 1` on `(-1, 1)`.
pub fn v_g(alpha: f64, x: f64) -> Result<f64> {
    Ok(beta_bump(0, alpha, x) / bump_constant(0, alpha)?)
}

/// Applies the scheme to the samples of `v_G` and reports whether
/// `L_h v_G >= 1` at every interior point, with the minimum.
pub fn check_supersolution_vg(family: WeightFamily, alpha: f64, h: f64) -> Result<(bool, f64)> {
    let n = (1.0 / h).round();
    if (n * h - 1.0).abs() > 1e-9 || n < 1.0 {
        return domain(format!("1/h = {} is not an integer", 1.0 / h));
    }
    let n = n as usize;
    let ws = make_weights(family, alpha, h, 2 * n)?;
    let k = bump_constant(0, alpha)?;
    let v = GridField::symmetric(h, n, |x| beta_bump(0, alpha, x) / k)?;
    let lv = apply_direct(&ws, &v, 1 - n as i64..n as i64)?;
    let min = lv.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((min >= 1.0, min))
}

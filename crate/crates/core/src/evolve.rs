//! Explicit time stepping for the fractional heat equation, the fractal
//! Burgers equation and the fractional thin film equation in similarity
//! variables.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::grid::GridField;
use crate::operator::{apply, apply_truncated, Exterior, FastOperator};
use crate::oracle::bump_constant;
use crate::specfun::gamma;
use crate::weights::WeightSet;

/// Safety factor applied to every step restriction.
pub const SAFETY: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdeKind {
    Heat,
    Burgers,
    ThinFilm,
}

impl FromStr for PdeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "heat" => Ok(PdeKind::Heat),
            "burgers" => Ok(PdeKind::Burgers),
            "thinfilm" | "thin_film" => Ok(PdeKind::ThinFilm),
            _ => domain(format!("unknown equation '{s}'")),
        }
    }
}

impl fmt::Display for PdeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PdeKind::Heat => "heat",
            PdeKind::Burgers => "burgers",
            PdeKind::ThinFilm => "thinfilm",
        })
    }
}

/// Numerical flux for `u^2 / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Flux {
    #[default]
    Godunov,
    LaxFriedrichs,
}

impl FromStr for Flux {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "godunov" => Ok(Flux::Godunov),
            "lax-friedrichs" | "lax_friedrichs" | "llf" => Ok(Flux::LaxFriedrichs),
            _ => domain(format!("unknown flux '{s}'")),
        }
    }
}

impl fmt::Display for Flux {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flux::Godunov => "godunov",
            Flux::LaxFriedrichs => "lax-friedrichs",
        })
    }
}

impl Flux {
    fn eval(self, a: f64, b: f64) -> f64 {
        match self {
            Flux::Godunov => {
                let l = a.max(0.0);
                let r = b.min(0.0);
                0.5 * (l * l).max(r * r)
            }
            Flux::LaxFriedrichs => {
                let s = a.abs().max(b.abs());
                0.25 * (a * a + b * b) - 0.5 * s * (b - a)
            }
        }
    }
}

/// `lambda = 2 (1 + alpha) K_{1,alpha}`, for which `(1 - x^2)_+^{1+alpha/2}`
/// is a steady state of the thin film equation in similarity variables.
pub fn thin_film_lambda(alpha: f64) -> Result<f64> {
    Ok(2.0 * (1.0 + alpha) * bump_constant(1, alpha)?)
}

/// Mass of `(1 - x^2)_+^{1+alpha/2}`: `sqrt(pi) Gamma(2+alpha/2) / Gamma((5+alpha)/2)`.
pub fn thin_film_mass(alpha: f64) -> Result<f64> {
    Ok(PI.sqrt() * gamma(2.0 + 0.5 * alpha)? / gamma(0.5 * (5.0 + alpha))?)
}

/// Two Gaussians, `M/sqrt(pi) (0.8 e^{-4(x-1)^2} + 1.6 e^{-16(x+2)^2})`.
pub fn thin_film_initial(alpha: f64, x: f64) -> Result<f64> {
    let m = thin_film_mass(alpha)?;
    let a = x - 1.0;
    let b = x + 2.0;
    Ok(m / PI.sqrt() * (0.8 * (-4.0 * a * a).exp() + 1.6 * (-16.0 * b * b).exp()))
}

/// `(1 - x^2)_+^{1+alpha/2}`.
pub fn thin_film_steady(alpha: f64, x: f64) -> f64 {
    crate::oracle::beta_bump(1, alpha, x)
}

/// `cos x` on `|x| <= pi/2`, zero elsewhere.
pub fn burgers_initial(x: f64) -> f64 {
    if x.abs() <= 0.5 * PI {
        x.cos()
    } else {
        0.0
    }
}

/// Largest stable heat step `SAFETY / (-w_0)`.
pub fn heat_dt_limit(ws: &WeightSet) -> f64 {
    SAFETY / (-ws.w0()).max(f64::MIN_POSITIVE)
}

/// Burgers step limit `1 / (max|u| / h + kappa (-w_0))`: the update is then a
/// convex combination of old values (Godunov or Lax-Friedrichs flux).
pub fn burgers_dt_limit(ws: &WeightSet, umax: f64, kappa: f64) -> f64 {
    let rate = umax / ws.h() + kappa * (-ws.w0());
    1.0 / rate.max(f64::MIN_POSITIVE)
}

/// Thin film step limit for the current field and pressure `p = L u`:
/// the smaller of `h^2 / (4 max|u| (-w_0))`, which bounds the spectral
/// radius of the linearized update, and the upwind bound
/// `h / max_i (v+_{i-1/2} + v-_{i+1/2})` that keeps the update a
/// nonnegative combination of old values.
pub fn thin_film_dt_limit(ws: &WeightSet, f: &GridField, p: &[f64], lambda: f64) -> f64 {
    let h = ws.h();
    let rate = 4.0 * f.sup_norm() * (-ws.w0()) / (h * h);
    let v = face_velocities(f, p, lambda);
    let n = f.len();
    let mut out = 0.0f64;
    for i in 0..n {
        let left = if i > 0 { v[i - 1].max(0.0) } else { 0.0 };
        let right = if i + 1 < n { (-v[i]).max(0.0) } else { 0.0 };
        out = out.max(left + right);
    }
    (1.0 / rate.max(f64::MIN_POSITIVE)).min(h / out.max(f64::MIN_POSITIVE))
}

// v_{i+1/2} = (p_{i+1} - p_i) / h + lambda x_{i+1/2}
fn face_velocities(f: &GridField, p: &[f64], lambda: f64) -> Vec<f64> {
    let h = f.h();
    (0..f.len() - 1)
        .map(|i| (p[i + 1] - p[i]) / h + lambda * (f.x(i) + 0.5 * h))
        .collect()
}

fn check_dt(dt: f64, limit: f64) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return domain(format!("time step must be positive, got {dt}"));
    }
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::Cfl { dt, limit });
    }
    Ok(())
}

// Operator of the scheme for one closure, with an FFT plan where possible.
enum Applier {
    Fast(FastOperator, f64),
    Other(Exterior),
}

impl Applier {
    fn new(ws: &WeightSet, n: usize, exterior: &Exterior) -> Result<Self> {
        Ok(match exterior {
            Exterior::Zero => Applier::Fast(FastOperator::new(ws, n)?, 0.0),
            Exterior::Constant(c) => Applier::Fast(FastOperator::new(ws, n)?, *c),
            Exterior::Tail(_) => Applier::Other(exterior.clone()),
        })
    }

    fn apply(&self, ws: &WeightSet, f: &GridField) -> Result<Vec<f64>> {
        match self {
            Applier::Fast(op, c) => {
                if *c == 0.0 {
                    op.apply(f.values())
                } else {
                    let shifted: Vec<f64> = f.values().iter().map(|v| v - c).collect();
                    op.apply(&shifted)
                }
            }
            Applier::Other(Exterior::Tail(t)) => {
                let u = f.values();
                apply_truncated(ws, f, &t.clone().with_edges(u[0], u[u.len() - 1]))
            }
            Applier::Other(e) => apply(ws, f, e),
        }
    }

    // value just outside each edge, for the advective flux
    fn ghosts(&self, f: &GridField) -> (f64, f64) {
        match self {
            Applier::Fast(_, c) => (*c, *c),
            Applier::Other(e) => exterior_ghosts(e, f),
        }
    }
}

// Zero and constant closures give the constant; tails give the asymptotic
// profile one cell beyond the window edge.
fn exterior_ghosts(e: &Exterior, f: &GridField) -> (f64, f64) {
    match e {
        Exterior::Zero => (0.0, 0.0),
        Exterior::Constant(c) => (*c, *c),
        Exterior::Tail(t) => {
            let u = f.values();
            let decay = (t.l / (t.l + f.h())).powf(t.beta);
            (
                t.offset_left + (u[0] - t.offset_left) * decay,
                t.offset_right + (u[u.len() - 1] - t.offset_right) * decay,
            )
        }
    }
}

fn check_grid(ws: &WeightSet, f: &GridField) -> Result<()> {
    if (ws.h() - f.h()).abs() > 1e-12 * ws.h() {
        return Err(Error::GridMismatch { weights: ws.h(), field: f.h() });
    }
    Ok(())
}

fn heat_update(ws: &WeightSet, f: &GridField, dt: f64, lu: &[f64]) -> Result<GridField> {
    check_dt(dt, 1.0 / (-ws.w0()).max(f64::MIN_POSITIVE))?;
    f.with_values(f.values().iter().zip(lu).map(|(u, l)| u - dt * l).collect())
}

/// One explicit Euler step `u + dt (w_0 u_j + sum_{k != 0} w_k u_{j-k})`.
pub fn step_heat(ws: &WeightSet, f: &GridField, dt: f64, exterior: &Exterior) -> Result<GridField> {
    check_grid(ws, f)?;
    let lu = apply(ws, f, exterior)?;
    heat_update(ws, f, dt, &lu)
}

fn burgers_update(
    ws: &WeightSet,
    f: &GridField,
    dt: f64,
    kappa: f64,
    flux: Flux,
    lu: Option<&[f64]>,
    ghosts: (f64, f64),
) -> Result<GridField> {
    let u = f.values();
    let n = u.len();
    let umax = f.sup_norm().max(ghosts.0.abs()).max(ghosts.1.abs());
    check_dt(dt, burgers_dt_limit(ws, umax, kappa))?;
    let r = dt / f.h();
    let face = |i: usize| -> f64 {
        // face i sits between cells i-1 and i
        let a = if i == 0 { ghosts.0 } else { u[i - 1] };
        let b = if i == n { ghosts.1 } else { u[i] };
        flux.eval(a, b)
    };
    let out = (0..n)
        .into_par_iter()
        .with_min_len(256)
        .map(|i| {
            let mut v = u[i] - r * (face(i + 1) - face(i));
            if let Some(lu) = lu {
                v -= dt * kappa * lu[i];
            }
            v
        })
        .collect();
    f.with_values(out)
}

/// One explicit step of `u_t + (u^2/2)_x + kappa L u = 0` in conservation
/// form. Ghost values for the advective flux come from the closure.
pub fn step_burgers(
    ws: &WeightSet,
    f: &GridField,
    dt: f64,
    kappa: f64,
    flux: Flux,
    exterior: &Exterior,
) -> Result<GridField> {
    check_grid(ws, f)?;
    if !(kappa >= 0.0) {
        return domain(format!("kappa must be nonnegative, got {kappa}"));
    }
    let ghosts = exterior_ghosts(exterior, f);
    let lu = if kappa > 0.0 { Some(apply(ws, f, exterior)?) } else { None };
    burgers_update(ws, f, dt, kappa, flux, lu.as_deref(), ghosts)
}

fn thin_film_update(ws: &WeightSet, f: &GridField, dt: f64, lambda: f64, p: &[f64]) -> Result<GridField> {
    check_dt(dt, thin_film_dt_limit(ws, f, p, lambda))?;
    let u = f.values();
    let n = u.len();
    // flux through the face between cells i and i+1, mobility taken from the
    // upwind cell; zero at the window edges
    let phi: Vec<f64> = face_velocities(f, p, lambda)
        .iter()
        .enumerate()
        .map(|(i, &v)| if v > 0.0 { v * u[i + 1] } else { v * u[i] })
        .collect();
    let r = dt / f.h();
    let out = (0..n)
        .map(|i| {
            let right = if i + 1 < n { phi[i] } else { 0.0 };
            let left = if i > 0 { phi[i - 1] } else { 0.0 };
            u[i] + r * (right - left)
        })
        .collect();
    f.with_values(out)
}

/// One conservative step of `u_t = (u p_x)_x + lambda (x u)_x` with
/// `p = L u`, face velocities `p_x + lambda x` and upwind mobility.
pub fn step_thinfilm(
    ws: &WeightSet,
    f: &GridField,
    dt: f64,
    lambda: f64,
    exterior: &Exterior,
) -> Result<GridField> {
    check_grid(ws, f)?;
    if f.len() < 2 {
        return domain("thin film step needs at least two cells");
    }
    let p = apply(ws, f, exterior)?;
    thin_film_update(ws, f, dt, lambda, &p)
}

/// Everything `run` needs besides the initial data.
#[derive(Debug, Clone)]
pub struct EvolutionConfig {
    pub kind: PdeKind,
    pub ws: WeightSet,
    pub dt: f64,
    pub t_final: f64,
    pub kappa: f64,
    pub lambda: f64,
    pub exterior: Exterior,
    pub flux: Flux,
}

impl EvolutionConfig {
    /// Defaults: `kappa = 1`, `lambda = thin_film_lambda(alpha)`, zero
    /// closure, Godunov flux.
    pub fn new(kind: PdeKind, ws: WeightSet, dt: f64, t_final: f64) -> Result<Self> {
        let lambda = thin_film_lambda(ws.alpha().min(1.999_999))?;
        Ok(EvolutionConfig {
            kind,
            ws,
            dt,
            t_final,
            kappa: 1.0,
            lambda,
            exterior: Exterior::Zero,
            flux: Flux::Godunov,
        })
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_exterior(mut self, exterior: Exterior) -> Self {
        self.exterior = exterior;
        self
    }

    pub fn with_flux(mut self, flux: Flux) -> Self {
        self.flux = flux;
        self
    }

    /// Checks the time-step restriction against the initial data.
    pub fn validate(&self, u0: &GridField) -> Result<()> {
        check_grid(&self.ws, u0)?;
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return domain(format!("final time must be nonnegative, got {}", self.t_final));
        }
        if !(self.kappa >= 0.0) {
            return domain(format!("kappa must be nonnegative, got {}", self.kappa));
        }
        match self.kind {
            PdeKind::Heat => check_dt(self.dt, heat_dt_limit(&self.ws)),
            PdeKind::Burgers => {
                let (l, r) = match &self.exterior {
                    Exterior::Zero => (0.0, 0.0),
                    Exterior::Constant(c) => (*c, *c),
                    Exterior::Tail(t) => (t.offset_left, t.offset_right),
                };
                let umax = u0.sup_norm().max(l.abs()).max(r.abs());
                check_dt(self.dt, SAFETY * burgers_dt_limit(&self.ws, umax, self.kappa))
            }
            // substeps are chosen inside `run`
            PdeKind::ThinFilm => check_dt(self.dt, f64::INFINITY),
        }
    }
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats {
    pub t: f64,
    pub mass: f64,
    pub min: f64,
    pub max: f64,
}

impl StepStats {
    fn of(t: f64, f: &GridField) -> Self {
        let u = f.values();
        StepStats {
            t,
            mass: f.mass(),
            min: u.iter().copied().fold(f64::INFINITY, f64::min),
            max: u.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Snapshots of a run plus the per-step diagnostics.
#[derive(Debug, Clone)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    pub fields: Vec<GridField>,
    pub stats: Vec<StepStats>,
    /// Mass that left the window through the exterior closure, accumulated
    /// per step (heat with zero or constant closure; zero otherwise).
    pub outflow: Vec<f64>,
    pub steps: usize,
}

/// Mass leaving the window in one heat step of size `dt` under zero or
/// constant closure: `dt h sum_i (u_i - c) S_i` where `S_i` is the sum of the
/// weights reaching from cell `i` to the exterior.
pub fn heat_outflow(ws: &WeightSet, f: &GridField, dt: f64, c: f64) -> f64 {
    let w = ws.weights();
    let n = f.len();
    let m = ws.m();
    // prefix[d] = sum_{k=1}^{d} w_k, constant past m
    let mut prefix = vec![0.0; n + 1];
    for d in 1..=n {
        prefix[d] = prefix[d - 1] + if d <= m { w[d] } else { 0.0 };
    }
    let half = -0.5 * w[0];
    let s: f64 = f
        .values()
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let right = half - prefix[n - 1 - i];
            let left = half - prefix[i];
            (u - c) * (right + left)
        })
        .sum();
    dt * f.h() * s
}

/// Iterates the configured scheme from `u0` to `t_final`, recording the
/// field at the step nearest to each requested time. The initial field is
/// always the first snapshot.
///
/// Thin film runs subcycle each step of size `dt` so that every substep
/// satisfies `thin_film_dt_limit`, and abort with `Diverged` once `max|u|`
/// doubles.
pub fn run(config: &EvolutionConfig, u0: &GridField, snapshot_times: &[f64]) -> Result<EvolutionTrace> {
    config.validate(u0)?;
    if snapshot_times.windows(2).any(|p| !(p[1] > p[0])) {
        return domain("snapshot times must be strictly increasing");
    }
    if snapshot_times.iter().any(|&t| !(t > 0.0) || t > config.t_final * (1.0 + 1e-12)) {
        return domain("snapshot times must lie in (0, t_final]");
    }
    let dt = config.dt;
    let steps = (config.t_final / dt).round() as usize;
    let mut marks: Vec<usize> = snapshot_times.iter().map(|t| (t / dt).round() as usize).collect();
    marks.dedup();
    let ws = &config.ws;
    let applier = Applier::new(ws, u0.len(), &config.exterior)?;
    let c = match (&config.kind, &config.exterior) {
        (PdeKind::Heat, Exterior::Zero) => Some(0.0),
        (PdeKind::Heat, Exterior::Constant(c)) => Some(*c),
        _ => None,
    };
    let initial_max = u0.sup_norm();
    let mut trace = EvolutionTrace {
        times: vec![0.0],
        fields: vec![u0.clone()],
        stats: vec![StepStats::of(0.0, u0)],
        outflow: vec![0.0],
        steps,
    };
    let mut u = u0.clone();
    let mut next = marks.iter().peekable();
    let mut out_total = 0.0;
    for s in 1..=steps {
        let t = s as f64 * dt;
        u = match config.kind {
            PdeKind::Heat => {
                if let Some(c) = c {
                    out_total += heat_outflow(ws, &u, dt, c);
                }
                let lu = applier.apply(ws, &u)?;
                heat_update(ws, &u, dt, &lu)?
            }
            PdeKind::Burgers => {
                let lu = if config.kappa > 0.0 { Some(applier.apply(ws, &u)?) } else { None };
                let ghosts = applier.ghosts(&u);
                burgers_update(ws, &u, dt, config.kappa, config.flux, lu.as_deref(), ghosts)?
            }
            PdeKind::ThinFilm => {
                let mut v = u;
                let mut left = dt;
                while left > 0.0 {
                    let p = applier.apply(ws, &v)?;
                    let limit = SAFETY * thin_film_dt_limit(ws, &v, &p, config.lambda);
                    let sub = (left / limit).ceil().max(1.0);
                    let d = left / sub;
                    v = thin_film_update(ws, &v, d, config.lambda, &p)?;
                    if !v.sup_norm().is_finite() || v.sup_norm() > 2.0 * initial_max {
                        return Err(Error::Diverged(t - left + d));
                    }
                    left -= d;
                    if left < 1e-15 * dt {
                        left = 0.0;
                    }
                }
                v
            }
        };
        let st = StepStats::of(t, &u);
        if !st.max.is_finite() || !st.min.is_finite() {
            return Err(Error::Diverged(t));
        }
        if config.kind == PdeKind::ThinFilm && u.sup_norm() > 2.0 * initial_max {
            return Err(Error::Diverged(t));
        }
        trace.stats.push(st);
        trace.outflow.push(out_total);
        if next.peek().is_some_and(|&&m| m == s) {
            next.next();
            trace.times.push(t);
            trace.fields.push(u.clone());
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{make_weights, WeightFamily};

    fn delta(h: f64, n: usize) -> GridField {
        GridField::symmetric(h, n, |x| if x == 0.0 { 1.0 } else { 0.0 }).unwrap()
    }

    #[test]
    fn heat_step_of_delta() {
        let h = 0.1;
        let ws = make_weights(WeightFamily::Per, 0.8, h, 40).unwrap();
        let dt = 0.5 * heat_dt_limit(&ws);
        let u = step_heat(&ws, &delta(h, 20), dt, &Exterior::Zero).unwrap();
        assert!((u.at(0).unwrap() - (1.0 + dt * ws.w0())).abs() < 1e-15);
        for j in 1..=20 {
            assert!((u.at(j).unwrap() - dt * ws.get(j)).abs() < 1e-15);
            assert_eq!(u.at(j), u.at(-j));
        }
        assert!(matches!(
            step_heat(&ws, &delta(h, 20), 2.0 / -ws.w0(), &Exterior::Zero),
            Err(Error::Cfl { .. })
        ));
    }

    #[test]
    fn constants_are_steady() {
        let h = 0.1;
        let ws = make_weights(WeightFamily::Gl, 1.3, h, 60).unwrap();
        let c = GridField::symmetric(h, 30, |_| 0.7).unwrap();
        let dt = 0.5 * heat_dt_limit(&ws);
        let u = step_heat(&ws, &c, dt, &Exterior::Constant(0.7)).unwrap();
        assert!(u.values().iter().all(|v| (v - 0.7).abs() < 1e-14));
        let dtb = SAFETY * burgers_dt_limit(&ws, 0.7, 1.0);
        for flux in [Flux::Godunov, Flux::LaxFriedrichs] {
            let u = step_burgers(&ws, &c, dtb, 1.0, flux, &Exterior::Constant(0.7)).unwrap();
            assert!(u.values().iter().all(|v| (v - 0.7).abs() < 1e-14));
        }
        let z = GridField::symmetric(h, 30, |_| 0.0).unwrap();
        let u = step_thinfilm(&ws, &z, 1e-6, 1.0, &Exterior::Zero).unwrap();
        assert_eq!(u.sup_norm(), 0.0);
    }

    #[test]
    fn fluxes_are_consistent() {
        for &v in &[-1.5, -0.2, 0.0, 0.4, 2.0] {
            assert_eq!(Flux::Godunov.eval(v, v), 0.5 * v * v);
            assert!((Flux::LaxFriedrichs.eval(v, v) - 0.5 * v * v).abs() < 1e-15);
        }
        // transonic rarefaction
        assert_eq!(Flux::Godunov.eval(-1.0, 1.0), 0.0);
        // shock
        assert_eq!(Flux::Godunov.eval(1.0, -2.0), 2.0);
    }

    #[test]
    fn heat_mass_balance_and_positivity() {
        let h = 0.1;
        let ws = make_weights(WeightFamily::Per, 0.6, h, 100).unwrap();
        let u0 = GridField::symmetric(h, 50, |x| (-x * x).exp()).unwrap();
        let cfg = EvolutionConfig::new(PdeKind::Heat, ws, 0.05, 1.0).unwrap();
        let tr = run(&cfg, &u0, &[0.5, 1.0]).unwrap();
        assert_eq!(tr.times, vec![0.0, 0.5, 1.0]);
        let m0 = tr.stats[0].mass;
        for (s, out) in tr.stats.iter().zip(&tr.outflow) {
            assert!((s.mass + out - m0).abs() < 1e-12, "{} {} {}", s.mass, out, m0);
            assert!(s.min >= 0.0);
        }
        assert!(tr.outflow.last().unwrap() > &0.0);
    }

    #[test]
    fn zero_steps() {
        let h = 0.1;
        let ws = make_weights(WeightFamily::Per, 0.6, h, 20).unwrap();
        let u0 = GridField::symmetric(h, 10, |x| x).unwrap();
        let cfg = EvolutionConfig::new(PdeKind::Burgers, ws, 0.01, 0.0).unwrap();
        let tr = run(&cfg, &u0, &[]).unwrap();
        assert_eq!(tr.fields.len(), 1);
        assert_eq!(tr.fields[0], u0);
        assert!(run(&cfg, &u0, &[0.1]).is_err());
    }

    #[test]
    fn thin_film_conserves_mass() {
        let alpha = 0.5;
        let h = 0.05;
        let ws = make_weights(WeightFamily::Per, alpha, h, 161).unwrap();
        let u0 = GridField::symmetric(h, 80, |x| thin_film_initial(alpha, x).unwrap()).unwrap();
        let cfg = EvolutionConfig::new(PdeKind::ThinFilm, ws, 1e-3, 0.02).unwrap();
        let tr = run(&cfg, &u0, &[0.02]).unwrap();
        let m0 = tr.stats[0].mass;
        for s in &tr.stats {
            assert!(((s.mass - m0) / m0).abs() < 1e-12);
        }
        assert!((m0 / thin_film_mass(alpha).unwrap() - 0.8).abs() < 1e-6);
    }

    #[test]
    fn thin_film_steady_state_is_stationary() {
        // p = L u_inf = K (1 - (1+alpha) x^2) inside, so the face flux vanishes
        // up to the discretization error
        let alpha = 0.5;
        let h = 0.01;
        let ws = make_weights(WeightFamily::Per, alpha, h, 400).unwrap();
        let f = GridField::symmetric(h, 200, |x| thin_film_steady(alpha, x)).unwrap();
        let lambda = thin_film_lambda(alpha).unwrap();
        let p = apply(&ws, &f, &Exterior::Zero).unwrap();
        let k = bump_constant(1, alpha).unwrap();
        let i = 200 + 30;
        let slope = (p[i + 1] - p[i]) / h;
        let xf = f.x(i) + 0.5 * h;
        assert!((slope + lambda * xf).abs() < 0.05 * lambda * xf, "{slope} {}", -lambda * xf);
        assert!((p[200] - k).abs() < 0.02 * k);
    }

    #[test]
    fn names() {
        assert_eq!("thinfilm".parse::<PdeKind>().unwrap(), PdeKind::ThinFilm);
        assert_eq!("llf".parse::<Flux>().unwrap(), Flux::LaxFriedrichs);
        assert_eq!(Flux::default().to_string(), "godunov");
        assert!("x".parse::<Flux>().is_err());
    }
}

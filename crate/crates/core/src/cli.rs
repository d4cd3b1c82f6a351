//! Command-line front end. Every subcommand writes CSV (17 significant
//! digits) headed by `# key = value` comment lines holding the resolved
//! configuration.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::{Display, Write as _};
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::convergence::{dyadic, sweep, Target};
use crate::dirichlet::{solve, DirichletProblem};
use crate::error::{domain, Error, Result};
use crate::evolve::{
    burgers_dt_limit, burgers_initial, heat_dt_limit, run, thin_film_initial, thin_film_lambda, thin_film_steady,
    EvolutionConfig, EvolutionTrace, Flux, PdeKind, SAFETY,
};
use crate::grid::{max_abs_diff, GridField};
use crate::operator::{apply, apply_direct, apply_fast, energy, inner, Exterior, TailSpec};
use crate::oracle::{beta_bump, flap_beta_bump, flap_gaussian_origin, flap_lorentzian, lorentzian, OracleKind};
use crate::symbol::{accuracy_order_probe, closed_symbol, symbol_from_weights};
use crate::weights::{cfl_cmax, make_weights, WeightFamily};

#[derive(Debug, Parser)]
#[command(name = "fraclap", version, about = "Finite difference fractional Laplacian on uniform grids")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Weight table `k, w_k`.
    Weights(Flags),
    /// Symbol of the weights against `|xi|^alpha` on `[0, pi]`.
    Symbol(Flags),
    /// Apply the scheme to a reference function.
    Apply(Flags),
    /// Solve the Dirichlet problem with a bump as exact solution.
    Dirichlet(Flags),
    /// Grid refinement sweep with order fitting.
    Converge(Flags),
    /// Fractional heat equation.
    Heat(Flags),
    /// Fractional Burgers equation.
    Burgers(Flags),
    /// Fractional thin film equation in similarity variables.
    Thinfilm(Flags),
    /// Quick seeded consistency checks.
    Selftest(Flags),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Weight family: SP, PER, GL, T or Q.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    /// Grid spacing.
    #[arg(long)]
    pub h: Option<String>,
    /// Number of stored weights.
    #[arg(long)]
    pub m: Option<String>,
    /// Window half width.
    #[arg(long = "L")]
    pub l: Option<String>,
    /// Far-field extension radius.
    #[arg(long = "LM")]
    pub lm: Option<String>,
    /// Far-field decay exponent; enables the tail closure.
    #[arg(long)]
    pub beta: Option<String>,
    #[arg(long)]
    pub dt: Option<String>,
    #[arg(long)]
    pub tfinal: Option<String>,
    #[arg(long)]
    pub kappa: Option<String>,
    /// godunov or llf.
    #[arg(long)]
    pub flux: Option<String>,
    /// Reference solution or initial data, depending on the subcommand.
    #[arg(long)]
    pub oracle: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Comma separated grid spacings for `converge`, or `dyadic:a:b`.
    #[arg(long)]
    pub hs: Option<String>,
    /// Comma separated snapshot times for the evolution commands.
    #[arg(long)]
    pub snapshots: Option<String>,
    /// File of `key = value` lines; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Parses a `key = value` configuration text. Blank lines and lines
/// starting with `#` are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return domain(format!("config line {}: expected key = value", i + 1));
        };
        let key = k.trim();
        if !KEYS.contains(&key) {
            return domain(format!("config line {}: unknown key '{key}'", i + 1));
        }
        map.insert(key.to_string(), v.trim().to_string());
    }
    Ok(map)
}

const KEYS: [&str; 16] = [
    "family", "alpha", "h", "m", "L", "LM", "beta", "dt", "tfinal", "kappa", "flux", "oracle", "out", "seed",
    "hs", "snapshots",
];

/// Resolved configuration. Defaults consulted by a command are recorded so
/// that the CSV header lists everything the run depended on.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn from_flags(flags: &Flags) -> Result<Self> {
        let mut values = match &flags.config {
            Some(path) => parse_config(&fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?)?,
            None => BTreeMap::new(),
        };
        let given = [
            ("family", &flags.family),
            ("alpha", &flags.alpha),
            ("h", &flags.h),
            ("m", &flags.m),
            ("L", &flags.l),
            ("LM", &flags.lm),
            ("beta", &flags.beta),
            ("dt", &flags.dt),
            ("tfinal", &flags.tfinal),
            ("kappa", &flags.kappa),
            ("flux", &flags.flux),
            ("oracle", &flags.oracle),
            ("seed", &flags.seed),
            ("hs", &flags.hs),
            ("snapshots", &flags.snapshots),
        ];
        for (k, v) in given {
            if let Some(v) = v {
                values.insert(k.to_string(), v.clone());
            }
        }
        if let Some(out) = &flags.out {
            values.insert("out".into(), out.display().to_string());
        }
        Ok(Settings { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(s) => s
                .parse()
                .map(Some)
                .map_err(|_| Error::Domain(format!("cannot parse {key} = '{s}'"))),
        }
    }

    /// Value of `key`, or `default` (recorded) when unset.
    pub fn get<T: FromStr + Display>(&mut self, key: &str, default: T) -> Result<T> {
        match self.parse(key)? {
            Some(v) => Ok(v),
            None => {
                self.values.insert(key.to_string(), default.to_string());
                Ok(default)
            }
        }
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.parse(key)?
            .ok_or_else(|| Error::Domain(format!("missing required setting --{key}")))
    }

    pub fn optional<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.parse(key)
    }

    pub fn set(&mut self, key: &str, value: impl Display) {
        self.values.insert(key.to_string(), value.to_string());
    }

    fn list(&mut self, key: &str, default: &str) -> Result<Vec<f64>> {
        let s = self.get::<String>(key, default.to_string())?;
        if let Some(rest) = s.strip_prefix("dyadic:") {
            let parts: Vec<&str> = rest.split(':').collect();
            let bad = || Error::Domain(format!("cannot parse {key} = '{s}'"));
            if parts.len() != 2 {
                return Err(bad());
            }
            let a: i32 = parts[0].parse().map_err(|_| bad())?;
            let b: i32 = parts[1].parse().map_err(|_| bad())?;
            return Ok(dyadic(a, b));
        }
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Domain(format!("cannot parse {key} entry '{t}'")))
            })
            .collect()
    }

    fn header(&self, out: &mut String) {
        for (k, v) in &self.values {
            let _ = writeln!(out, "# {k} = {v}");
        }
    }
}

/// Output of one command: CSV text plus a short summary for the terminal.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub csv: String,
    pub summary: String,
    /// Nonzero when a check inside the command failed.
    pub status: i32,
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn window_count(l: f64, h: f64) -> Result<usize> {
    let n = (l / h).round();
    if !(h > 0.0) || !(l > 0.0) || (n * h - l).abs() > 1e-9 * l || n < 1.0 {
        return domain(format!("L = {l} is not a positive multiple of h = {h}"));
    }
    Ok(n as usize)
}

/// Tail closure from the settings, or `Exterior::Zero` when no `beta` is
/// given, together with the number of weights it needs.
fn exterior_from(
    settings: &mut Settings,
    f: &GridField,
    offsets: (f64, f64),
) -> Result<(Exterior, usize)> {
    let Some(beta) = settings.optional::<f64>("beta")? else {
        return Ok((Exterior::Zero, f.len()));
    };
    let mut tail = TailSpec::for_field(f, beta)?.with_offsets(offsets.0, offsets.1);
    if let Some(lm) = settings.optional::<f64>("LM")? {
        tail = TailSpec::new(beta, tail.l, lm, tail.u_left, tail.u_right)?.with_offsets(offsets.0, offsets.1);
    }
    settings.set("LM", tail.l_m);
    let big_m = (tail.l_m / f.h() + 1e-9).floor() as usize;
    Ok((Exterior::Tail(tail), f.len() + big_m))
}

fn family_alpha(settings: &mut Settings) -> Result<(WeightFamily, f64)> {
    let family: WeightFamily = settings.get("family", WeightFamily::Per)?;
    let alpha: f64 = settings.require("alpha")?;
    Ok((family, alpha))
}

fn cmd_weights(mut s: Settings) -> Result<Report> {
    let (family, alpha) = family_alpha(&mut s)?;
    let h = s.get("h", 1.0)?;
    let m = s.get("m", 64usize)?;
    let ws = make_weights(family, alpha, h, m)?;
    let mut csv = String::new();
    s.header(&mut csv);
    let mut body = Vec::new();
    ws.write_csv(&mut body)?;
    csv.push_str(&String::from_utf8_lossy(&body));
    Ok(Report {
        csv,
        summary: format!("w_0 = {}, cfl_cmax = {}", num(ws.w0()), num(cfl_cmax(family, alpha)?)),
        status: 0,
    })
}

fn cmd_symbol(mut s: Settings) -> Result<Report> {
    let (family, alpha) = family_alpha(&mut s)?;
    let h = s.get("h", 1.0)?;
    let m = s.get("m", 4096usize)?;
    let ws = make_weights(family, alpha, h, m)?;
    match accuracy_order_probe(family, alpha) {
        Ok(p) if p.is_spectral() => s.set("max_residual", num(p.max_residual)),
        Ok(p) => {
            s.set("fitted_order", num(p.fitted_order));
            s.set("leading_coeff", num(p.leading_coeff));
        }
        Err(e) if e.is_domain() => return Err(e),
        Err(_) => {}
    }
    let mut csv = String::new();
    s.header(&mut csv);
    csv.push_str("xi,m_weights,m_closed,xi_alpha\n");
    let points = 256;
    for i in 0..=points {
        let xi = std::f64::consts::PI * i as f64 / points as f64;
        let closed = match closed_symbol(family, alpha, xi) {
            Ok(v) => num(v),
            Err(Error::Unsupported(_)) => String::new(),
            Err(e) => return Err(e),
        };
        let _ = writeln!(csv, "{},{},{},{}", num(xi), num(symbol_from_weights(&ws, xi)), closed, num(xi.powf(alpha)));
    }
    Ok(Report { csv, summary: String::new(), status: 0 })
}

fn cmd_apply(mut s: Settings) -> Result<Report> {
    let (family, alpha) = family_alpha(&mut s)?;
    let oracle: OracleKind = s.get("oracle", OracleKind::Lorentzian)?;
    let h = s.get("h", 0.0625)?;
    let l = s.get("L", 8.0)?;
    let n = window_count(l, h)?;
    let sample = |x: f64| match oracle {
        OracleKind::Gaussian0 => (-x * x).exp(),
        OracleKind::Lorentzian => lorentzian(alpha, x),
        OracleKind::BetaBump(k) => beta_bump(k, alpha, x),
        OracleKind::HeatGreen => f64::NAN,
    };
    if oracle == OracleKind::HeatGreen {
        return domain("the heat_green oracle applies to the heat command only");
    }
    let f = GridField::symmetric(h, n, sample)?;
    let (exterior, m_needed) = exterior_from(&mut s, &f, (0.0, 0.0))?;
    let m = s.get("m", m_needed)?;
    let ws = make_weights(family, alpha, h, m)?;
    let lu = apply(&ws, &f, &exterior)?;
    let exact = |x: f64| -> Result<Option<f64>> {
        match oracle {
            OracleKind::Lorentzian => flap_lorentzian(alpha, x).map(Some),
            OracleKind::BetaBump(k) => flap_beta_bump(k, alpha, x).map(Some),
            OracleKind::Gaussian0 if x == 0.0 => flap_gaussian_origin(alpha).map(Some),
            _ => Ok(None),
        }
    };
    let mut rows = String::new();
    let mut sup = 0.0f64;
    for (i, v) in lu.iter().enumerate() {
        let x = f.x(i);
        match exact(x)? {
            Some(e) => {
                sup = sup.max((v - e).abs());
                let _ = writeln!(rows, "{},{},{},{},{}", num(x), num(f.values()[i]), num(*v), num(e), num((v - e).abs()));
            }
            None => {
                let _ = writeln!(rows, "{},{},{},,", num(x), num(f.values()[i]), num(*v));
            }
        }
    }
    s.set("sup_error", num(sup));
    let mut csv = String::new();
    s.header(&mut csv);
    csv.push_str("x,u,flap_u,flap_exact,abs_err\n");
    csv.push_str(&rows);
    Ok(Report { csv, summary: format!("sup_error = {}", num(sup)), status: 0 })
}

fn cmd_dirichlet(mut s: Settings) -> Result<Report> {
    let (family, alpha) = family_alpha(&mut s)?;
    let oracle: OracleKind = s.get("oracle", OracleKind::BetaBump(1))?;
    let OracleKind::BetaBump(k) = oracle else {
        return domain("the dirichlet command takes a beta_bump:k oracle");
    };
    let h = s.get("h", 0.03125)?;
    let n = window_count(1.0, h)?;
    let m = s.get("m", 2 * n)?;
    let ws = make_weights(family, alpha, h, m)?;
    flap_beta_bump(k, alpha, 0.0)?;
    let p = DirichletProblem::new(ws, 1.0, |x| flap_beta_bump(k, alpha, x).unwrap_or(f64::NAN))?;
    let sol = solve(&p)?;
    let mut rows = String::new();
    let mut sup = 0.0f64;
    for (i, v) in sol.field.values().iter().enumerate() {
        let x = sol.field.x(i);
        let e = beta_bump(k, alpha, x);
        sup = sup.max((v - e).abs());
        let _ = writeln!(rows, "{},{},{},{}", num(x), num(*v), num(e), num((v - e).abs()));
    }
    s.set("residual", num(sol.residual));
    let mut csv = String::new();
    s.header(&mut csv);
    csv.push_str("x,u_h,u_exact,abs_err\n");
    csv.push_str(&rows);
    Ok(Report {
        csv,
        summary: format!("h,sup_error\n{},{}", num(h), num(sup)),
        status: 0,
    })
}

fn cmd_converge(mut s: Settings) -> Result<Report> {
    let (family, alpha) = family_alpha(&mut s)?;
    let target: Target = s.get("oracle", Target::Gaussian0)?;
    let target = target.resolve(alpha, s.optional("L")?, s.optional("beta")?);
    let hs = s.list("hs", "dyadic:2:6")?;
    let r = sweep(target, family, alpha, &hs)?;
    s.set("fitted_slope", num(r.fitted_slope));
    s.set("fit_window", format!("{}..{}", r.fit_window.start, r.fit_window.end));
    let mut csv = String::new();
    s.header(&mut csv);
    csv.push_str("h,sup_error,in_fit\n");
    for (i, (h, e)) in r.points.iter().enumerate() {
        let _ = writeln!(csv, "{},{},{}", num(*h), num(*e), u8::from(r.fit_window.contains(&i)));
    }
    Ok(Report {
        csv,
        summary: format!("fitted_slope = {:.4}", r.fitted_slope),
        status: 0,
    })
}

fn snapshot_csv(s: &Settings, trace: &EvolutionTrace) -> String {
    let mut csv = String::new();
    s.header(&mut csv);
    csv.push_str("t,x,u\n");
    for (t, f) in trace.times.iter().zip(&trace.fields) {
        for (i, v) in f.values().iter().enumerate() {
            let _ = writeln!(csv, "{},{},{}", num(*t), num(f.x(i)), num(*v));
        }
    }
    csv
}

fn trace_summary(trace: &EvolutionTrace) -> String {
    let last = trace.stats.last().copied();
    match last {
        Some(st) => format!(
            "steps = {}, t = {}, mass = {}, min = {}, max = {}",
            trace.steps,
            num(st.t),
            num(st.mass),
            num(st.min),
            num(st.max)
        ),
        None => String::new(),
    }
}

fn snapshot_times(s: &mut Settings, t_final: f64, default: &str) -> Result<Vec<f64>> {
    if t_final == 0.0 {
        return Ok(vec![]);
    }
    let default = if default.is_empty() { t_final.to_string() } else { default.to_string() };
    s.list("snapshots", &default)
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn cmd_heat(mut s: Settings) -> Result<Report> {
    let (family, alpha) = family_alpha(&mut s)?;
    let initial = s.get("oracle", "sign".to_string())?;
    let h = s.get("h", 0.1)?;
    let l = s.get("L", 10.0)?;
    let t_final = s.get("tfinal", 0.5)?;
    let n = window_count(l, h)?;
    let (f, offsets) = match initial.as_str() {
        "sign" => {
            s.get("beta", alpha)?;
            (GridField::symmetric(h, n, sign)?, (-1.0, 1.0))
        }
        "gaussian" => (GridField::symmetric(h, n, |x| (-x * x).exp())?, (0.0, 0.0)),
        _ => return domain(format!("heat initial data must be sign or gaussian, got '{initial}'")),
    };
    let (exterior, m_needed) = exterior_from(&mut s, &f, offsets)?;
    let m = s.get("m", m_needed)?;
    let ws = make_weights(family, alpha, h, m)?;
    let dt = s.get("dt", landing_step(heat_dt_limit(&ws), t_final))?;
    let times = snapshot_times(&mut s, t_final, "")?;
    let config = EvolutionConfig::new(PdeKind::Heat, ws, dt, t_final)?.with_exterior(exterior);
    let trace = run(&config, &f, &times)?;
    Ok(Report { csv: snapshot_csv(&s, &trace), summary: trace_summary(&trace), status: 0 })
}

/// Largest step not above `limit` that divides `t_final` evenly.
fn landing_step(limit: f64, t_final: f64) -> f64 {
    if t_final > 0.0 {
        t_final / (t_final / limit).ceil().max(1.0)
    } else {
        limit
    }
}

fn cmd_burgers(mut s: Settings) -> Result<Report> {
    let (family, alpha) = family_alpha(&mut s)?;
    let initial = s.get("oracle", "cosine".to_string())?;
    let h = s.get("h", 0.05)?;
    let l = s.get("L", 10.0)?;
    let t_final = s.get("tfinal", 2.0)?;
    let kappa = s.get("kappa", 1.0)?;
    let flux: Flux = s.get("flux", Flux::Godunov)?;
    let n = window_count(l, h)?;
    let (f, offsets) = match initial.as_str() {
        "cosine" => (GridField::symmetric(h, n, burgers_initial)?, (0.0, 0.0)),
        "rarefaction" => {
            s.get("beta", alpha)?;
            (GridField::symmetric(h, n, sign)?, (-1.0, 1.0))
        }
        "shock" => {
            s.get("beta", alpha)?;
            (GridField::symmetric(h, n, |x| -sign(x))?, (1.0, -1.0))
        }
        _ => return domain(format!("burgers initial data must be cosine, rarefaction or shock, got '{initial}'")),
    };
    let (exterior, m_needed) = exterior_from(&mut s, &f, offsets)?;
    let m = s.get("m", m_needed)?;
    let ws = make_weights(family, alpha, h, m)?;
    let umax = f.sup_norm().max(offsets.0.abs()).max(offsets.1.abs());
    let dt = s.get("dt", landing_step(SAFETY * burgers_dt_limit(&ws, umax, kappa), t_final))?;
    let times = snapshot_times(&mut s, t_final, "")?;
    let config = EvolutionConfig::new(PdeKind::Burgers, ws, dt, t_final)?
        .with_kappa(kappa)
        .with_flux(flux)
        .with_exterior(exterior);
    let trace = run(&config, &f, &times)?;
    Ok(Report { csv: snapshot_csv(&s, &trace), summary: trace_summary(&trace), status: 0 })
}

fn cmd_thinfilm(mut s: Settings) -> Result<Report> {
    let (family, alpha) = family_alpha(&mut s)?;
    let h = s.get("h", 0.01)?;
    let l = s.get("L", 4.0)?;
    let dt = s.get("dt", 1e-4)?;
    let t_final = s.get("tfinal", 0.4)?;
    let n = window_count(l, h)?;
    let f = GridField::symmetric(h, n, |x| thin_film_initial(alpha, x).unwrap_or(f64::NAN))?;
    thin_film_initial(alpha, 0.0)?;
    let m = s.get("m", f.len())?;
    let ws = make_weights(family, alpha, h, m)?;
    let lambda = thin_film_lambda(alpha)?;
    s.set("lambda", num(lambda));
    let times = snapshot_times(&mut s, t_final, "0.05,0.1,0.2,0.4")?;
    let config = EvolutionConfig::new(PdeKind::ThinFilm, ws, dt, t_final)?.with_lambda(lambda);
    let trace = run(&config, &f, &times)?;
    let mut summary = trace_summary(&trace);
    for (t, u) in trace.times.iter().zip(&trace.fields) {
        let d = (0..u.len())
            .map(|i| (u.values()[i] - thin_film_steady(alpha, u.x(i))).abs())
            .fold(0.0, f64::max);
        let _ = write!(summary, "\nt = {t}: |u - u_inf| = {}", num(d));
    }
    Ok(Report { csv: snapshot_csv(&s, &trace), summary, status: 0 })
}

fn random_field(rng: &mut StdRng, h: f64, n: usize) -> Result<GridField> {
    let u = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    GridField::new(h, -(n as i64 / 2), u)
}

fn cmd_selftest(mut s: Settings) -> Result<Report> {
    let seed = s.get("seed", 0u64)?;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut checks: Vec<(String, bool, f64)> = Vec::new();

    let ws = make_weights(WeightFamily::Per, 1.3, 0.05, 512)?;
    let f = random_field(&mut rng, 0.05, 512)?;
    let d = max_abs_diff(&apply_fast(&ws, &f)?, &apply_direct(&ws, &f, f.indices())?);
    checks.push(("fast path equals direct sum".into(), d <= 1e-11, d));

    let g = random_field(&mut rng, 0.05, 512)?;
    let lf = apply_direct(&ws, &f, f.indices())?;
    let lg = apply_direct(&ws, &g, g.indices())?;
    let a = inner(0.05, &lf, g.values());
    let b = inner(0.05, f.values(), &lg);
    let rel = (a - b).abs() / a.abs().max(b.abs()).max(1e-300);
    checks.push(("self-adjointness".into(), rel <= 1e-12, rel));

    let e = energy(&ws, &f)?;
    let half = 0.5 * inner(0.05, &lf, f.values());
    let rel = (e - half).abs() / half.abs().max(1e-300);
    checks.push(("energy equals half the quadratic form".into(), e >= 0.0 && rel <= 1e-10, rel));

    for family in WeightFamily::ALL {
        let alpha = 0.7;
        let ws = make_weights(family, alpha, 1.0, 8)?;
        let c = cfl_cmax(family, alpha)?;
        let rel = (c * -ws.w0() - 1.0).abs();
        checks.push((format!("cfl closed form {family}"), rel <= 1e-8, rel));
    }

    let ws = make_weights(WeightFamily::Per, 0.8, 1.0 / 32.0, 256)?;
    let f = GridField::symmetric(1.0 / 32.0, 256, |x| (-x * x).exp())?;
    let err = (apply_direct(&ws, &f, 0..1)?[0] - flap_gaussian_origin(0.8)?).abs();
    checks.push(("gaussian at the origin".into(), err <= 1e-3, err));

    let mut csv = String::new();
    s.header(&mut csv);
    csv.push_str("check,pass,value\n");
    let mut summary = String::new();
    let mut status = 0;
    for (name, ok, v) in &checks {
        let _ = writeln!(csv, "{name},{},{}", u8::from(*ok), num(*v));
        let _ = writeln!(summary, "{} {name} ({v:.3e})", if *ok { "PASS" } else { "FAIL" });
        if !ok {
            status = 3;
        }
    }
    Ok(Report { csv, summary: summary.trim_end().to_string(), status })
}

/// Runs one parsed command.
pub fn execute(command: &Command) -> Result<Report> {
    let (flags, f): (&Flags, fn(Settings) -> Result<Report>) = match command {
        Command::Weights(a) => (a, cmd_weights),
        Command::Symbol(a) => (a, cmd_symbol),
        Command::Apply(a) => (a, cmd_apply),
        Command::Dirichlet(a) => (a, cmd_dirichlet),
        Command::Converge(a) => (a, cmd_converge),
        Command::Heat(a) => (a, cmd_heat),
        Command::Burgers(a) => (a, cmd_burgers),
        Command::Thinfilm(a) => (a, cmd_thinfilm),
        Command::Selftest(a) => (a, cmd_selftest),
    };
    f(Settings::from_flags(flags)?)
}

/// Exit code for an error: 2 for bad input or configuration, 3 for a
/// numerical failure.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_domain() || matches!(e, Error::Io(_)) {
        2
    } else {
        3
    }
}

fn emit(command: &Command, report: &Report) -> Result<()> {
    let out = match command {
        Command::Weights(a)
        | Command::Symbol(a)
        | Command::Apply(a)
        | Command::Dirichlet(a)
        | Command::Converge(a)
        | Command::Heat(a)
        | Command::Burgers(a)
        | Command::Thinfilm(a)
        | Command::Selftest(a) => &a.out,
    };
    match out {
        Some(path) => {
            fs::write(path, &report.csv).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            if !report.summary.is_empty() {
                println!("{}", report.summary);
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(report.csv.as_bytes())?;
            if !report.summary.is_empty() {
                eprintln!("{}", report.summary);
            }
        }
    }
    Ok(())
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli.command).and_then(|r| emit(&cli.command, &r).map(|_| r.status)) {
        Ok(status) => status,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

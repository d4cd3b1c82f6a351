//! Special functions used by the closed-form weights and the reference
//! solutions: Gamma, log-Gamma, the upper incomplete Gamma function of complex
//! argument, the Gauss hypergeometric series and the one-dimensional Riesz
//! constant `C_{1,alpha}`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};

/// Complex argument/result type for the incomplete Gamma function.
pub type ComplexValue = Complex64;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

fn lanczos_series(x: f64) -> f64 {
    // x is the shifted argument (Gamma(x + 1) form)
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    acc
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// Gamma function for real arguments.
///
/// Lanczos approximation (g = 7, nine coefficients) with the reflection
/// formula below 1/2.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return domain(format!("gamma of non-finite argument {x}"));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::Pole {
            function: "gamma",
            at: x,
        });
    }
    if x < 0.5 {
        let s = (PI * x).sin();
        let g = gamma(1.0 - x)?;
        return Ok(PI / (s * g));
    }
    if x > 171.6 {
        return Err(Error::Overflow("gamma"));
    }
    if x.fract() == 0.0 && x <= 20.0 {
        // exact factorials while they fit in the mantissa
        return Ok((2..x as u64).product::<u64>() as f64);
    }
    let xm = x - 1.0;
    let t = xm + LANCZOS_G + 0.5;
    // t^(xm+0.5) split in two factors to delay overflow near x = 171
    let half = t.powf(0.5 * (xm + 0.5));
    Ok(SQRT_2PI * half * (half * (-t).exp()) * lanczos_series(xm))
}

/// Natural logarithm of Gamma for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("ln_gamma requires x > 0, got {x}"));
    }
    if x < 0.5 {
        // ln Gamma(x) = ln(pi / sin(pi x)) - ln Gamma(1 - x)
        return Ok((PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x)?);
    }
    let xm = x - 1.0;
    let t = xm + LANCZOS_G + 0.5;
    Ok(LN_SQRT_2PI + (xm + 0.5) * t.ln() - t + lanczos_series(xm).ln())
}

/// Reciprocal Gamma function, zero at the poles.
pub fn rgamma(x: f64) -> Result<f64> {
    if is_nonpositive_integer(x) {
        return Ok(0.0);
    }
    Ok(1.0 / gamma(x)?)
}

/// Ratio `Gamma(p) / Gamma(q)`.
///
/// For large arguments the Lanczos forms are divided analytically, which
/// keeps full relative precision where the individual factors overflow and
/// where log-Gamma differences would lose digits.
pub fn gamma_ratio(p: f64, q: f64) -> Result<f64> {
    ratio_with_gap(p, q, p - q)
}

/// `Gamma(x + a) / Gamma(x + b)` with the gap `a - b` taken exactly, which
/// matters once `x` is large enough that `(x + a) - (x + b)` rounds.
pub fn gamma_ratio_shifted(x: f64, a: f64, b: f64) -> Result<f64> {
    ratio_with_gap(x + a, x + b, a - b)
}

fn ratio_with_gap(p: f64, q: f64, gap: f64) -> Result<f64> {
    if p.min(q) < 8.0 {
        let (gp, gq) = (gamma(p)?, gamma(q)?);
        return Ok(gp / gq);
    }
    let tp = p + LANCZOS_G - 0.5;
    let tq = q + LANCZOS_G - 0.5;
    let log = (q - 0.5) * (gap / tq).ln_1p() + gap * tp.ln() - gap;
    Ok(log.exp() * lanczos_series(p - 1.0) / lanczos_series(q - 1.0))
}

const INC_GAMMA_MAX_ITER: usize = 10_000;

/// Series for the lower incomplete Gamma function `gamma(a, z)`.
pub fn lower_incomplete_gamma_series(a: f64, z: ComplexValue) -> Result<ComplexValue> {
    if z == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut term = Complex64::new(1.0 / a, 0.0);
    let mut sum = term;
    let mut ap = a;
    for _ in 0..INC_GAMMA_MAX_ITER {
        ap += 1.0;
        term = term * z / ap;
        sum += term;
        if term.norm() <= sum.norm() * 1e-17 {
            return Ok(sum * z.powf(a) * (-z).exp());
        }
    }
    Err(Error::NonConvergence("incomplete gamma series"))
}

/// Continued-fraction factor `H(a, z) = Gamma(a, z) e^z z^(-a)` evaluated by
/// the modified Lentz algorithm. Converges for `|z|` away from the origin.
pub fn incomplete_gamma_cf_factor(a: f64, z: ComplexValue) -> Result<ComplexValue> {
    let tiny = 1e-300;
    let mut b = z + 1.0 - a;
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = if b.norm() < tiny {
        Complex64::new(1.0 / tiny, 0.0)
    } else {
        1.0 / b
    };
    let mut h = d;
    for n in 1..=INC_GAMMA_MAX_ITER {
        let an = -(n as f64) * (n as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.norm() < tiny {
            d = Complex64::new(tiny, 0.0);
        }
        c = b + an / c;
        if c.norm() < tiny {
            c = Complex64::new(tiny, 0.0);
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            return Ok(h);
        }
    }
    Err(Error::NonConvergence("incomplete gamma continued fraction"))
}

/// Continued-fraction branch of the upper incomplete Gamma function.
pub fn upper_incomplete_gamma_cf(a: f64, z: ComplexValue) -> Result<ComplexValue> {
    Ok((-z).exp() * z.powf(a) * incomplete_gamma_cf_factor(a, z)?)
}

/// Upper incomplete Gamma function `Gamma(a, z) = int_z^inf t^(a-1) e^(-t) dt`
/// for real `a > 0` and complex `z` (principal branch of `z^a`).
///
/// Uses the power series for `|z| < a + 1` and the continued fraction
/// otherwise.
pub fn upper_incomplete_gamma(a: f64, z: ComplexValue) -> Result<ComplexValue> {
    if !(a > 0.0) || !a.is_finite() {
        return domain(format!("upper_incomplete_gamma requires a > 0, got {a}"));
    }
    if !z.re.is_finite() || !z.im.is_finite() {
        return domain("upper_incomplete_gamma of non-finite argument");
    }
    let ga = gamma(a)?;
    if z.norm() < a + 1.0 {
        Ok(Complex64::new(ga, 0.0) - lower_incomplete_gamma_series(a, z)?)
    } else {
        upper_incomplete_gamma_cf(a, z)
    }
}

/// Gauss hypergeometric function `2F1(a, b; c; z)` by direct power series,
/// restricted to `|z| <= 0.9`.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if is_nonpositive_integer(c) {
        return Err(Error::Pole {
            function: "2F1",
            at: c,
        });
    }
    if !(z.abs() <= 0.9) {
        return domain(format!("2F1 series restricted to |z| <= 0.9, got z = {z}"));
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..100_000 {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        sum += term;
        if term == 0.0 || term.abs() <= 1e-16 * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence("2F1 series"))
}

/// The constant `C_{1,alpha}` of the singular-integral form of the
/// one-dimensional fractional Laplacian.
pub fn riesz_constant(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return domain(format!("riesz_constant requires alpha in (0,2), got {alpha}"));
    }
    Ok(alpha * 2f64.powf(alpha - 1.0) * gamma(0.5 * (alpha + 1.0))?
        / (PI.sqrt() * gamma(1.0 - 0.5 * alpha)?))
}

/// Hurwitz zeta function `sum_{k >= 0} (k + q)^(-s)` for `s > 1`, `q > 0`,
/// by direct summation up to `q >= 16` followed by Euler-Maclaurin.
pub fn hurwitz_zeta(s: f64, q: f64) -> Result<f64> {
    if !(s > 1.0) || !(q > 0.0) {
        return domain(format!("hurwitz_zeta requires s > 1, q > 0 (s = {s}, q = {q})"));
    }
    let mut acc = 0.0;
    let mut n = q;
    while n < 16.0 {
        acc += n.powf(-s);
        n += 1.0;
    }
    acc += n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    // B_2j / (2j)! * s (s+1) ... (s+2j-2) * n^(-s-2j+1)
    let mut rising = s;
    let mut fact = 2.0;
    let mut power = n.powf(-s - 1.0);
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        let term = b / fact * rising * power;
        acc += term;
        if term.abs() < 1e-18 * acc.abs() {
            break;
        }
        let k = 2.0 * (j as f64 + 1.0);
        rising *= (s + k - 1.0) * (s + k);
        fact *= (k + 1.0) * (k + 2.0);
        power /= n * n;
    }
    Ok(acc)
}

const BERNOULLI_EVEN: [f64; 6] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
];

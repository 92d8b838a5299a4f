//! Elliptic-function kernel.
//!
//! Complete elliptic integral of the first kind by the arithmetic-geometric
//! mean, Jacobi `sn`/`cn`/`dn` by the descending Landen (Gauss) transformation
//! in real or complex modulus, and the Weierstrass function evaluated through
//! its Jacobi form
//!
//! ```text
//! ℘(t) = e3 + (e1 - e3) / sn²(t·√(e1 - e3), k),   k² = (e2 - e3)/(e1 - e3).
//! ```
//!
//! Everything here works with the parameter `m = k²`; the modulus itself only
//! enters through `m`, so the sign of `k` never matters.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use thiserror::Error;

pub type Complex = Complex64;

/// Descent stops once |k| drops below this value.
const LANDEN_CUTOFF: f64 = 1e-12;
/// Internal denominators smaller than this are reported as poles.
const POLE_THRESHOLD: f64 = 1e-300;
const MAX_LANDEN_STEPS: usize = 48;
const MAX_AGM_STEPS: usize = 64;
/// Distance (in the time variable) from a lattice point at which ℘ is treated as singular.
const LATTICE_POLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EllipticError {
    #[error("parameter m = {m} is outside [0, 1)")]
    ParameterDomain { m: f64 },
    #[error("complex parameter m = {m} lies on the branch cut [1, inf)")]
    BranchCut { m: Complex },
    #[error("reciprocal-modulus transformation needs |k| > 1, got |k| = {modulus}")]
    ReciprocalModulus { modulus: f64 },
    #[error("pole of the elliptic function near u = {near}")]
    Pole { near: Complex },
    #[error("non-finite argument to elliptic function")]
    NonFinite,
    #[error("Landen descent did not converge for m = {m}")]
    NoConvergence { m: Complex },
    #[error("Weierstrass roots must sum to zero, got e1 + e2 + e3 = {sum}")]
    RootSum { sum: Complex },
}

pub type Result<T> = std::result::Result<T, EllipticError>;

/// `sn`, `cn` and `dn` at a single point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiTriple {
    pub sn: Complex,
    pub cn: Complex,
    pub dn: Complex,
}

impl JacobiTriple {
    /// Residuals of `sn² + cn² = 1` and `dn² + m·sn² = 1`.
    pub fn identity_residuals(&self, m: Complex) -> (f64, f64) {
        let s2 = self.sn * self.sn;
        let r1 = (s2 + self.cn * self.cn - 1.0).norm();
        let r2 = (self.dn * self.dn + m * s2 - 1.0).norm();
        (r1, r2)
    }
}

/// Complete elliptic integral of the first kind `K(k)` with `m = k²`, via
/// `K = π / (2·AGM(1, √(1 - m)))`.
pub fn complete_k(m: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&m) {
        return Err(EllipticError::ParameterDomain { m });
    }
    let mut a = 1.0_f64;
    let mut b = (1.0 - m).sqrt();
    for _ in 0..MAX_AGM_STEPS {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    Ok(FRAC_PI_2 / a)
}

/// `K` for a complex parameter off the cut `[1, ∞)`, using the optimal AGM
/// (each geometric mean takes the root closer to the arithmetic mean).
pub fn complete_k_complex(m: Complex) -> Result<Complex> {
    if !(m.re.is_finite() && m.im.is_finite()) {
        return Err(EllipticError::NonFinite);
    }
    if m.im == 0.0 && m.re >= 1.0 {
        return Err(EllipticError::BranchCut { m });
    }
    let mut a = Complex::new(1.0, 0.0);
    let mut b = (1.0 - m).sqrt();
    for _ in 0..MAX_AGM_STEPS {
        if (a - b).norm() <= 1e-16 * a.norm() {
            break;
        }
        let next = 0.5 * (a + b);
        let mut g = (a * b).sqrt();
        if (next - g).norm() > (next + g).norm() {
            g = -g;
        }
        a = next;
        b = g;
    }
    Ok(FRAC_PI_2 / a)
}

/// `K` through one explicit descending Landen step, `K(k) = (1 + k₁)·K(k₁)`
/// with `k₁ = (1 - k')/(1 + k')`. Only meant as an independent route to
/// cross-check [`complete_k`].
pub fn landen_descend_k(m: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&m) {
        return Err(EllipticError::ParameterDomain { m });
    }
    let kc = (1.0 - m).sqrt();
    // m/(1+k')² avoids the cancellation in (1-k')/(1+k') for small m.
    let k1 = m / ((1.0 + kc) * (1.0 + kc));
    Ok((1.0 + k1) * complete_k(k1 * k1)?)
}

/// Jacobi elliptic functions `sn(u, k)`, `cn(u, k)`, `dn(u, k)` for complex
/// argument and complex modulus.
pub fn jacobi_sncndn(u: Complex, k: Complex) -> Result<JacobiTriple> {
    let m = k * k;
    let mc = (1.0 - k) * (1.0 + k);
    sncndn_parameter(u, m, mc)
}

/// Real-argument, real-modulus convenience wrapper returning `(sn, cn, dn)`.
pub fn jacobi_real(u: f64, k: f64) -> Result<(f64, f64, f64)> {
    let t = jacobi_sncndn(Complex::new(u, 0.0), Complex::new(k, 0.0))?;
    Ok((t.sn.re, t.cn.re, t.dn.re))
}

/// Same as [`jacobi_sncndn`] but with the parameter `m = k²` and its
/// complement `mc = 1 - m` supplied separately, so callers that know `mc`
/// exactly do not lose digits to `1 - m`.
pub fn sncndn_parameter(u: Complex, m: Complex, mc: Complex) -> Result<JacobiTriple> {
    if !(u.re.is_finite() && u.im.is_finite() && m.re.is_finite() && m.im.is_finite()) {
        return Err(EllipticError::NonFinite);
    }
    if mc == Complex::new(0.0, 0.0) {
        return hyperbolic_limit(u, m, mc);
    }

    let mut kc = mc.sqrt();
    let mut m_n = m;
    let mut arg = u;
    let mut descents = [Complex::new(0.0, 0.0); MAX_LANDEN_STEPS];
    let mut depth = 0;
    while m_n.norm() >= LANDEN_CUTOFF * LANDEN_CUTOFF {
        if depth == MAX_LANDEN_STEPS {
            return Err(EllipticError::NoConvergence { m });
        }
        let one_plus = 1.0 + kc;
        let k1 = m_n / (one_plus * one_plus);
        kc = 2.0 * kc.sqrt() / one_plus;
        m_n = k1 * k1;
        arg /= 1.0 + k1;
        descents[depth] = k1;
        depth += 1;
    }

    let mut sn = arg.sin();
    let mut cn = arg.cos();
    let mut dn = 1.0 - 0.5 * m_n * sn * sn;
    for &k1 in descents[..depth].iter().rev() {
        let s2 = sn * sn;
        let ks2 = k1 * s2;
        let den = 1.0 + ks2;
        // Either a literal zero or complete cancellation to rounding level.
        if den.norm() < POLE_THRESHOLD || den.norm() <= 4.0 * f64::EPSILON * ks2.norm().max(1.0) {
            return Err(pole_error(u, m, mc));
        }
        let next_sn = (1.0 + k1) * sn / den;
        let next_cn = cn * dn / den;
        let next_dn = (1.0 - ks2) / den;
        sn = next_sn;
        cn = next_cn;
        dn = next_dn;
    }
    let triple = JacobiTriple { sn, cn, dn };
    if [sn, cn, dn]
        .iter()
        .all(|z| z.re.is_finite() && z.im.is_finite())
    {
        Ok(triple)
    } else {
        Err(pole_error(u, m, mc))
    }
}

// m = 1: sn = tanh, cn = dn = sech.
fn hyperbolic_limit(u: Complex, m: Complex, mc: Complex) -> Result<JacobiTriple> {
    let ch = u.cosh();
    if ch.norm() < POLE_THRESHOLD {
        return Err(pole_error(u, m, mc));
    }
    let sech = 1.0 / ch;
    Ok(JacobiTriple {
        sn: u.sinh() * sech,
        cn: sech,
        dn: sech,
    })
}

fn pole_error(u: Complex, m: Complex, mc: Complex) -> EllipticError {
    let near = nearest_sn_pole(u, m, mc).unwrap_or(u);
    EllipticError::Pole { near }
}

/// Nearest point of the pole lattice `2aK + (2b + 1)iK'` of `sn(·, k)`.
pub fn nearest_sn_pole(u: Complex, m: Complex, mc: Complex) -> Option<Complex> {
    let k = complete_k_complex(m).ok()?;
    let kp = complete_k_complex(mc).ok()?;
    let i = Complex::new(0.0, 1.0);
    let (a, b) = lattice_coordinates(u - i * kp, 2.0 * k, 2.0 * i * kp)?;
    Some(a.round() * 2.0 * k + (2.0 * b.round() + 1.0) * i * kp)
}

/// Real coordinates `(a, b)` with `z = a·w1 + b·w2`.
fn lattice_coordinates(z: Complex, w1: Complex, w2: Complex) -> Option<(f64, f64)> {
    let det = w1.re * w2.im - w1.im * w2.re;
    if det.abs() < 1e-300 {
        return None;
    }
    let a = (z.re * w2.im - z.im * w2.re) / det;
    let b = (w1.re * z.im - w1.im * z.re) / det;
    Some((a, b))
}

/// Jacobi triple for `|k| > 1` via the reciprocal-modulus transformation:
/// `sn(u,k) = sn(ku,1/k)/k`, `cn(u,k) = dn(ku,1/k)`, `dn(u,k) = cn(ku,1/k)`.
pub fn reciprocal_modulus(u: Complex, k: Complex) -> Result<JacobiTriple> {
    if k.norm() <= 1.0 {
        return Err(EllipticError::ReciprocalModulus { modulus: k.norm() });
    }
    let inner = jacobi_sncndn(k * u, 1.0 / k)?;
    Ok(JacobiTriple {
        sn: inner.sn / k,
        cn: inner.dn,
        dn: inner.cn,
    })
}

/// Roots of the Weierstrass cubic `4(℘ - e1)(℘ - e2)(℘ - e3)` together with
/// the invariants `g2`, `g3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeierstrassRoots {
    pub e1: Complex,
    pub e2: Complex,
    pub e3: Complex,
    pub g2: Complex,
    pub g3: Complex,
}

impl WeierstrassRoots {
    pub fn new(e1: Complex, e2: Complex, e3: Complex) -> Result<Self> {
        let sum = e1 + e2 + e3;
        let scale = e1
            .norm()
            .max(e2.norm())
            .max(e3.norm())
            .max(f64::MIN_POSITIVE);
        if sum.norm() > 1e-12 * scale {
            return Err(EllipticError::RootSum { sum });
        }
        Ok(Self {
            e1,
            e2,
            e3,
            g2: -4.0 * (e1 * e2 + e2 * e3 + e3 * e1),
            g3: 4.0 * e1 * e2 * e3,
        })
    }

    pub fn real(e1: f64, e2: f64, e3: f64) -> Result<Self> {
        Self::new(e1.into(), e2.into(), e3.into())
    }

    /// `(m, 1 - m, √(e1 - e3))` of the Jacobi form.
    pub fn jacobi_form(&self) -> (Complex, Complex, Complex) {
        let span = self.e1 - self.e3;
        (
            (self.e2 - self.e3) / span,
            (self.e1 - self.e2) / span,
            span.sqrt(),
        )
    }

    /// Half periods `(ω1, ω3)` with `℘(ω1) = e1`, `℘(ω3) = e3`.
    pub fn half_periods(&self) -> Result<(Complex, Complex)> {
        let (m, mc, scale) = self.jacobi_form();
        let k = complete_k_complex(m)?;
        let kp = complete_k_complex(mc)?;
        Ok((k / scale, Complex::new(0.0, 1.0) * kp / scale))
    }
}

/// Weierstrass `℘(t; g2, g3)`.
pub fn weierstrass_p(t: Complex, roots: &WeierstrassRoots) -> Result<Complex> {
    weierstrass_p_with_derivative(t, roots).map(|(p, _)| p)
}

/// `℘(t)` and `℘'(t)` from the Jacobi form. Errors at the double poles on the
/// period lattice.
pub fn weierstrass_p_with_derivative(
    t: Complex,
    roots: &WeierstrassRoots,
) -> Result<(Complex, Complex)> {
    if let Ok((w1, w3)) = roots.half_periods() {
        if let Some((a, b)) = lattice_coordinates(t, 2.0 * w1, 2.0 * w3) {
            let node = a.round() * 2.0 * w1 + b.round() * 2.0 * w3;
            if (t - node).norm() < LATTICE_POLE_TOL {
                return Err(EllipticError::Pole { near: node });
            }
        }
    }
    let (m, mc, scale) = roots.jacobi_form();
    let span = roots.e1 - roots.e3;
    match sncndn_parameter(t * scale, m, mc) {
        Ok(JacobiTriple { sn, cn, dn }) => {
            let s2 = sn * sn;
            if s2.norm() < POLE_THRESHOLD {
                return Err(EllipticError::Pole { near: t });
            }
            let p = roots.e3 + span / s2;
            let dp = -2.0 * span * scale * cn * dn / (s2 * sn);
            Ok((p, dp))
        }
        // sn has a pole exactly where ℘ takes the value e3 (a half period).
        Err(EllipticError::Pole { .. }) => Ok((roots.e3, Complex::new(0.0, 0.0))),
        Err(e) => Err(e),
    }
}

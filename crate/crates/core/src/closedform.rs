//! Closed-form orbits of the reduced oscillator `q̈ = 2q³ − 2cq`.
//!
//! Every regime has a canonical solution that starts from a fixed point of its
//! orbit (a turning point, or `q = 0` in region A):
//!
//! | regime      | canonical `q(τ)`                          | modulus                         |
//! |-------------|-------------------------------------------|---------------------------------|
//! | A           | `√q̇₀ e^{iΦ/2} sn(Ωτ, e^{iΦ})`             | `k = e^{iΦ}` (complex)          |
//! | B bounded   | `q₀⁻ cn(Ωτ, k)/dn(Ωτ, k)`                 | `k = tan(μ/2)`                  |
//! | B unbounded | `q₀⁺ dn(kΩτ, 1/k)/cn(kΩτ, 1/k)`           | `1/k = tan(μ/2)`                |
//! | C           | `q₀⁺ / cn(Ωτ, k')`                        | `k' = sinh(ν/2)/√cosh ν`        |
//! | separatrix  | `√c tanh(√c τ)` (inner), `−√c coth(√c τ)` (outer) |                         |
//!
//! Arbitrary initial data are mapped onto a canonical solution by a sign
//! flip, an optional time reversal and a phase shift: `q(t) = s·q_c(d·t + τ₀)`.
//! The phase is located by bisection and polished by Gauss-Newton in phase
//! space.

use std::f64::consts::FRAC_PI_2;

use thiserror::Error;

use crate::elliptic::{
    complete_k, complete_k_complex, sncndn_parameter, weierstrass_p_with_derivative, Complex,
    EllipticError, WeierstrassRoots,
};
use crate::model::{
    classify_reduced, compute_c, energy, q_acceleration, CoefficientState, InitialData, ModelError,
    Regime,
};

/// Orbit evaluation is refused this close to a finite-time singularity.
pub const POLE_GUARD: f64 = 1e-8;
/// Largest imaginary part tolerated when a complex representation must be real.
pub const REALNESS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClosedFormError {
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{name} = {value} is outside the admissible range")]
    Domain { name: &'static str, value: f64 },
    #[error("degenerate orbit: {0}")]
    Degenerate(&'static str),
    #[error("evaluation at t = {t} is within the singularity guard of the blow-up at {t_blowup}")]
    Pole { t: f64, t_blowup: f64 },
    #[error("closed form is not real at t = {t} (imaginary part {imag})")]
    NotReal { t: f64, imag: f64 },
    #[error("{0} orbits have no finite-time singularity")]
    NoBlowup(Regime),
    #[error("the coefficient reconstruction needs d_e = 0 (got {0}); finite-d_e corrections are out of scope")]
    NonZeroElectronSkinDepth(f64),
    #[error("orbit does not start at d_i·b0: q(0) = {orbit}, expected {data}")]
    OrbitMismatch { orbit: f64, data: f64 },
}

pub type Result<T> = std::result::Result<T, ClosedFormError>;

/// Branch of the Weierstrass representation `q± = q₀±(1 ± c₀/(℘ − e₁ ∓ c₀/2))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeierstrassBranch {
    /// Unbounded orbit (regions B and C).
    Upper,
    /// Periodic bounded orbit (region B).
    Lower,
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    RegionA {
        amp: Complex,
        omega: Complex,
        k: Complex,
        half_width: f64,
    },
    BBounded {
        amp: f64,
        omega: f64,
        k: f64,
    },
    BUnbounded {
        amp: f64,
        /// `kΩ = √(2c)cos(μ/2)`
        freq: f64,
        /// `1/k = tan(μ/2)`
        k_inv: f64,
        half_width: f64,
    },
    RegionC {
        amp: f64,
        omega: f64,
        kp: f64,
        k: f64,
        half_width: f64,
    },
    SeparatrixInner {
        root_c: f64,
    },
    SeparatrixOuter {
        root_c: f64,
    },
    Rest {
        value: f64,
    },
    Weierstrass {
        roots: WeierstrassRoots,
        c0: f64,
        amp: f64,
        branch: WeierstrassBranch,
        epsilon: f64,
        half_width: f64,
    },
}

/// A closed-form trajectory `q(t)` of the reduced oscillator.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSolution {
    pub regime: Regime,
    pub c: f64,
    /// μ (region B) or ν (regions A and C); zero on the separatrix.
    pub angle: f64,
    pub k_modulus: Complex,
    pub omega_freq: Complex,
    pub q0_amp: f64,
    pub period: Option<f64>,
    pub t_blowup: Option<f64>,
    shape: Shape,
    sign: f64,
    direction: f64,
    shift: f64,
}

fn check_c(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(ModelError::NonPositiveC { c }.into())
    }
}

fn real_part(z: Complex, t: f64) -> Result<f64> {
    if z.im.abs() > REALNESS_TOL * z.re.abs().max(1.0) {
        return Err(ClosedFormError::NotReal { t, imag: z.im });
    }
    Ok(z.re)
}

fn jacobi(u: f64, m: f64, mc: f64) -> Result<(f64, f64, f64)> {
    let t = sncndn_parameter(
        Complex::new(u, 0.0),
        Complex::new(m, 0.0),
        Complex::new(mc, 0.0),
    )?;
    Ok((t.sn.re, t.cn.re, t.dn.re))
}

/// Blow-up time of region A, `Re[2K(k)/Ω]` with `k = e^{iΦ}`.
fn region_a_blowup(c: f64, nu: f64) -> Result<f64> {
    let phi = nu.sinh().atan();
    let qd0 = c * nu.cosh();
    let omega = qd0.sqrt() * Complex::from_polar(1.0, -0.5 * phi);
    let big_k = complete_k_complex(Complex::from_polar(1.0, 2.0 * phi))?;
    Ok((2.0 * big_k / omega).re)
}

fn b_half_angle(c: f64, mu: f64) -> (f64, f64, f64) {
    let root = (2.0 * c).sqrt();
    (
        root * (0.5 * mu).sin(),
        root * (0.5 * mu).cos(),
        (0.5 * mu).tan(),
    )
}

/// Orbital period `4K(tan(μ/2))/(√(2c)cos(μ/2))` of the bounded region-B orbit.
pub fn period_b(c: f64, mu: f64) -> Result<f64> {
    check_c(c)?;
    if !(0.0..FRAC_PI_2).contains(&mu) {
        return Err(ClosedFormError::Domain {
            name: "mu",
            value: mu,
        });
    }
    let (_, omega, k) = b_half_angle(c, mu);
    Ok(4.0 * complete_k(k * k)? / omega)
}

/// Roots `e₁ = c/3`, `e₂,₃ = −c/6 ± (c/2)√ε` of the Weierstrass cubic.
pub fn energy_roots(c: f64, epsilon: f64) -> Result<WeierstrassRoots> {
    let s = Complex::new(epsilon, 0.0).sqrt();
    let e1 = Complex::new(c / 3.0, 0.0);
    let e2 = -c / 6.0 + 0.5 * c * s;
    let e3 = -c / 6.0 - 0.5 * c * s;
    Ok(WeierstrassRoots::new(e1, e2, e3)?)
}

/// Orbital period `2ω₁ = 2K(k)/√(e₁ − e₃)` with `k² = 2√ε/(1 + √ε)`.
pub fn period_weierstrass(c: f64, epsilon: f64) -> Result<f64> {
    check_c(c)?;
    if !(0.0..1.0).contains(&epsilon) {
        return Err(ClosedFormError::Domain {
            name: "epsilon",
            value: epsilon,
        });
    }
    let s = epsilon.sqrt();
    let m = 2.0 * s / (1.0 + s);
    let span = 0.5 * c * (1.0 + s);
    Ok(2.0 * complete_k(m)? / span.sqrt())
}

/// Finite-time singularity of a singular regime; `angle` is ν (A, C) or μ (B).
pub fn blowup_time(regime: Regime, c: f64, angle: f64) -> Result<f64> {
    check_c(c)?;
    match regime {
        Regime::AUnbounded => {
            if !(angle > 0.0) {
                return Err(ClosedFormError::Domain {
                    name: "nu",
                    value: angle,
                });
            }
            region_a_blowup(c, angle)
        }
        Regime::BUnbounded => Ok(period_b(c, angle)? / 4.0),
        Regime::CUnbounded => {
            if !(angle >= 0.0) {
                return Err(ClosedFormError::Domain {
                    name: "nu",
                    value: angle,
                });
            }
            let ch = angle.cosh();
            let kp2 = (0.5 * angle).sinh().powi(2) / ch;
            Ok(complete_k(kp2)? / (2.0 * c * ch).sqrt())
        }
        Regime::BBounded | Regime::Separatrix => Err(ClosedFormError::NoBlowup(regime)),
    }
}

/// Region A: `q = √q̇₀ e^{iΦ/2} sn(Ωt, e^{iΦ})` with `q̇₀ = sign·c·cosh ν`.
/// At `ν = 0` this is the separatrix `√c tanh(√c t)`.
pub fn solve_a(c: f64, nu: f64, sign: f64) -> Result<OrbitSolution> {
    check_c(c)?;
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(ClosedFormError::Domain {
            name: "nu",
            value: nu,
        });
    }
    let sign = unit_sign(sign);
    if nu == 0.0 {
        return solve_separatrix(c, sign);
    }
    let phi = nu.sinh().atan();
    let qd0 = c * nu.cosh();
    let amp = qd0.sqrt() * Complex::from_polar(1.0, 0.5 * phi);
    let omega = qd0.sqrt() * Complex::from_polar(1.0, -0.5 * phi);
    let k = Complex::from_polar(1.0, phi);
    let t_inf = region_a_blowup(c, nu)?;
    Ok(OrbitSolution {
        regime: Regime::AUnbounded,
        c,
        angle: nu,
        k_modulus: k,
        omega_freq: omega,
        q0_amp: 0.0,
        period: None,
        t_blowup: Some(t_inf),
        shape: Shape::RegionA {
            amp,
            omega,
            k,
            half_width: t_inf,
        },
        sign,
        direction: 1.0,
        shift: 0.0,
    })
}

fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu < FRAC_PI_2 {
        Ok(())
    } else if mu == 0.0 || mu == FRAC_PI_2 {
        Err(ClosedFormError::Degenerate(
            "mu at the end of (0, pi/2): zero orbit or separatrix",
        ))
    } else {
        Err(ClosedFormError::Domain {
            name: "mu",
            value: mu,
        })
    }
}

/// Periodic region-B orbit `q₀⁻ cn(Ωt, k)/dn(Ωt, k)`.
pub fn solve_b_bounded(c: f64, mu: f64) -> Result<OrbitSolution> {
    check_c(c)?;
    check_mu(mu)?;
    let (amp, omega, k) = b_half_angle(c, mu);
    let period = 4.0 * complete_k(k * k)? / omega;
    Ok(OrbitSolution {
        regime: Regime::BBounded,
        c,
        angle: mu,
        k_modulus: k.into(),
        omega_freq: omega.into(),
        q0_amp: amp,
        period: Some(period),
        t_blowup: None,
        shape: Shape::BBounded { amp, omega, k },
        sign: 1.0,
        direction: 1.0,
        shift: 0.0,
    })
}

/// Singular region-B orbit `q₀⁺ dn(kΩt, 1/k)/cn(kΩt, 1/k)` with `k = cot(μ/2)`.
pub fn solve_b_unbounded(c: f64, mu: f64) -> Result<OrbitSolution> {
    check_c(c)?;
    check_mu(mu)?;
    b_unbounded(c, mu)
}

// Also admits μ = 0, where the orbit is √(2c)/cos(√(2c)t).
fn b_unbounded(c: f64, mu: f64) -> Result<OrbitSolution> {
    let (small, freq, k_inv) = b_half_angle(c, mu);
    let t_inf = complete_k(k_inv * k_inv)? / freq;
    Ok(OrbitSolution {
        regime: Regime::BUnbounded,
        c,
        angle: mu,
        k_modulus: (1.0 / k_inv).into(),
        omega_freq: small.into(),
        q0_amp: freq,
        period: None,
        t_blowup: Some(t_inf),
        shape: Shape::BUnbounded {
            amp: freq,
            freq,
            k_inv,
            half_width: t_inf,
        },
        sign: 1.0,
        direction: 1.0,
        shift: 0.0,
    })
}

/// Region-C orbit `q₀⁺/cn(Ωt, k')`.
pub fn solve_c(c: f64, nu: f64) -> Result<OrbitSolution> {
    check_c(c)?;
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(ClosedFormError::Domain {
            name: "nu",
            value: nu,
        });
    }
    region_c(c, nu)
}

fn region_c(c: f64, nu: f64) -> Result<OrbitSolution> {
    let ch = nu.cosh();
    let amp = (2.0 * c).sqrt() * (0.5 * nu).cosh();
    let omega = (2.0 * c * ch).sqrt();
    let kp = (0.5 * nu).sinh() / ch.sqrt();
    let k = (0.5 * nu).cosh() / ch.sqrt();
    let t_inf = complete_k(kp * kp)? / omega;
    Ok(OrbitSolution {
        regime: Regime::CUnbounded,
        c,
        angle: nu,
        k_modulus: kp.into(),
        omega_freq: omega.into(),
        q0_amp: amp,
        period: None,
        t_blowup: Some(t_inf),
        shape: Shape::RegionC {
            amp,
            omega,
            kp,
            k,
            half_width: t_inf,
        },
        sign: 1.0,
        direction: 1.0,
        shift: 0.0,
    })
}

/// Separatrix `q = sign·√c·tanh(√c t)` through the origin.
pub fn solve_separatrix(c: f64, sign: f64) -> Result<OrbitSolution> {
    check_c(c)?;
    let root_c = c.sqrt();
    Ok(OrbitSolution {
        regime: Regime::Separatrix,
        c,
        angle: 0.0,
        k_modulus: Complex::new(1.0, 0.0),
        omega_freq: root_c.into(),
        q0_amp: root_c,
        period: None,
        t_blowup: None,
        shape: Shape::SeparatrixInner { root_c },
        sign: unit_sign(sign),
        direction: 1.0,
        shift: 0.0,
    })
}

/// Weierstrass-form orbit `q± = q₀±(1 ± c₀/(℘(t) − e₁ ∓ c₀/2))`, `q₀± = √(c ± c₀)`.
///
/// The lower branch needs `0 ≤ ε < 1`; the upper branch accepts `ε < 1`,
/// covering region C through complex-conjugate roots `e₂`, `e₃`.
pub fn solve_weierstrass(c: f64, epsilon: f64, branch: WeierstrassBranch) -> Result<OrbitSolution> {
    check_c(c)?;
    let lower_ok = (0.0..1.0).contains(&epsilon);
    let upper_ok = epsilon < 1.0 && epsilon.is_finite();
    let admissible = match branch {
        WeierstrassBranch::Lower => lower_ok,
        WeierstrassBranch::Upper => upper_ok,
    };
    if !admissible {
        return Err(ClosedFormError::Domain {
            name: "epsilon",
            value: epsilon,
        });
    }
    let roots = energy_roots(c, epsilon)?;
    let (w1, _) = roots.half_periods()?;
    let w1 = real_part(w1, 0.0)?;
    let c0 = c * (1.0 - epsilon).sqrt();
    let (regime, angle, amp, period, t_blowup) = match branch {
        WeierstrassBranch::Lower => (
            Regime::BBounded,
            epsilon.sqrt().asin(),
            (c - c0).max(0.0).sqrt(),
            Some(2.0 * w1),
            None,
        ),
        WeierstrassBranch::Upper => {
            let (regime, angle) = if epsilon >= 0.0 {
                (Regime::BUnbounded, epsilon.sqrt().asin())
            } else {
                (Regime::CUnbounded, (-epsilon).sqrt().asinh())
            };
            (regime, angle, (c + c0).sqrt(), None, Some(0.5 * w1))
        }
    };
    let (m, _, scale) = roots.jacobi_form();
    Ok(OrbitSolution {
        regime,
        c,
        angle,
        k_modulus: m.sqrt(),
        omega_freq: scale,
        q0_amp: amp,
        period,
        t_blowup,
        shape: Shape::Weierstrass {
            roots,
            c0,
            amp,
            branch,
            epsilon,
            half_width: t_blowup.unwrap_or(f64::INFINITY),
        },
        sign: 1.0,
        direction: 1.0,
        shift: 0.0,
    })
}

/// Equilibrium at the origin or on a saddle `±√c`.
fn rest(regime: Regime, c: f64, value: f64) -> OrbitSolution {
    OrbitSolution {
        regime,
        c,
        angle: 0.0,
        k_modulus: Complex::new(0.0, 0.0),
        omega_freq: Complex::new(0.0, 0.0),
        q0_amp: value.abs(),
        period: None,
        t_blowup: None,
        shape: Shape::Rest { value },
        sign: 1.0,
        direction: 1.0,
        shift: 0.0,
    }
}

fn unit_sign(s: f64) -> f64 {
    if s < 0.0 {
        -1.0
    } else {
        1.0
    }
}

impl Shape {
    /// Pole-free canonical interval containing τ = 0 (or the outer separatrix's τ < 0).
    fn window(&self) -> (f64, f64) {
        match *self {
            Shape::RegionA { half_width, .. }
            | Shape::BUnbounded { half_width, .. }
            | Shape::RegionC { half_width, .. }
            | Shape::Weierstrass { half_width, .. } => (-half_width, half_width),
            Shape::BBounded { .. } | Shape::SeparatrixInner { .. } | Shape::Rest { .. } => {
                (f64::NEG_INFINITY, f64::INFINITY)
            }
            Shape::SeparatrixOuter { .. } => (f64::NEG_INFINITY, 0.0),
        }
    }

    /// Canonical `(q, q̇)` at canonical time τ.
    fn eval(&self, tau: f64) -> Result<(f64, f64)> {
        match *self {
            Shape::RegionA { amp, omega, k, .. } => {
                let u = omega * tau;
                let t = sncndn_parameter(u, k * k, (1.0 - k) * (1.0 + k))?;
                let q = real_part(amp * t.sn, tau)?;
                let qd = real_part(amp * omega * t.cn * t.dn, tau)?;
                Ok((q, qd))
            }
            Shape::BBounded { amp, omega, k } => {
                let m = k * k;
                let (sn, cn, dn) = jacobi(omega * tau, m, 1.0 - m)?;
                let q = amp * cn / dn;
                let qd = -amp * omega * (1.0 - m) * sn / (dn * dn);
                Ok((q, qd))
            }
            Shape::BUnbounded {
                amp, freq, k_inv, ..
            } => {
                let m = k_inv * k_inv;
                let (sn, cn, dn) = jacobi(freq * tau, m, 1.0 - m)?;
                let q = amp * dn / cn;
                let qd = amp * freq * (1.0 - m) * sn / (cn * cn);
                Ok((q, qd))
            }
            Shape::RegionC {
                amp, omega, kp, k, ..
            } => {
                let (sn, cn, dn) = jacobi(omega * tau, kp * kp, k * k)?;
                let q = amp / cn;
                let qd = amp * omega * sn * dn / (cn * cn);
                Ok((q, qd))
            }
            Shape::SeparatrixInner { root_c } => {
                let th = (root_c * tau).tanh();
                Ok((root_c * th, root_c * root_c * (1.0 - th * th)))
            }
            Shape::Rest { value } => Ok((value, 0.0)),
            Shape::SeparatrixOuter { root_c } => {
                let sh = (root_c * tau).sinh();
                let coth = 1.0 / (root_c * tau).tanh();
                Ok((-root_c * coth, root_c * root_c / (sh * sh)))
            }
            Shape::Weierstrass {
                roots,
                c0,
                amp,
                branch,
                ..
            } => {
                let shift = match branch {
                    WeierstrassBranch::Upper => roots.e1 + 0.5 * c0,
                    WeierstrassBranch::Lower => roots.e1 - 0.5 * c0,
                };
                let sgn = match branch {
                    WeierstrassBranch::Upper => 1.0,
                    WeierstrassBranch::Lower => -1.0,
                };
                match weierstrass_p_with_derivative(Complex::new(tau, 0.0), &roots) {
                    Ok((p, dp)) => {
                        let den = p - shift;
                        let q = amp * (1.0 + sgn * c0 / den);
                        let qd = -sgn * amp * c0 * dp / (den * den);
                        Ok((real_part(q, tau)?, real_part(qd, tau)?))
                    }
                    // ℘ → ∞ at t = 0: q → q₀±, q̇ → 0.
                    Err(EllipticError::Pole { .. }) if tau.abs() < 1e-6 => Ok((amp, 0.0)),
                    Err(e) => Err(e.into()),
                }
            }
        }
    }

    /// Canonical `e^{2Q(τ)}` up to a τ-independent factor.
    fn exp2q(&self, tau: f64, c: f64) -> Result<f64> {
        match *self {
            Shape::RegionA { omega, k, .. } => {
                let t = sncndn_parameter(omega * tau, k * k, (1.0 - k) * (1.0 + k))?;
                let ratio = (t.dn - k * t.cn) / (1.0 - k);
                real_part(ratio * ratio, tau)
            }
            Shape::BBounded { omega, k, .. } => {
                let m = k * k;
                let (sn, _, dn) = jacobi(omega * tau, m, 1.0 - m)?;
                Ok(((1.0 + k * sn) / dn).powi(2))
            }
            Shape::BUnbounded { freq, k_inv, .. } => {
                let m = k_inv * k_inv;
                let (sn, cn, _) = jacobi(freq * tau, m, 1.0 - m)?;
                Ok(((1.0 + sn) / cn).powi(2))
            }
            Shape::RegionC { omega, kp, k, .. } => {
                let (sn, cn, dn) = jacobi(omega * tau, kp * kp, k * k)?;
                Ok(((dn + k * sn) / cn).powi(2))
            }
            Shape::SeparatrixInner { root_c } => Ok((root_c * tau).cosh().powi(2)),
            Shape::SeparatrixOuter { root_c } => Ok((root_c * tau).sinh().powi(-2)),
            Shape::Rest { value } => Ok((2.0 * value * tau).exp()),
            Shape::Weierstrass {
                branch, epsilon, ..
            } => {
                // Same orbit in Jacobi form; both start at the same turning point.
                let twin = match branch {
                    WeierstrassBranch::Lower => solve_b_bounded(c, epsilon.sqrt().asin())?,
                    WeierstrassBranch::Upper if epsilon >= 0.0 => {
                        b_unbounded(c, epsilon.sqrt().asin())?
                    }
                    WeierstrassBranch::Upper => region_c(c, (-epsilon).sqrt().asinh())?,
                };
                twin.shape.exp2q(tau, c)
            }
        }
    }
}

impl OrbitSolution {
    /// Canonical time τ for physical time t, or a pole error inside the guard.
    fn canonical_time(&self, t: f64) -> Result<f64> {
        let tau = self.direction * t + self.shift;
        let (lo, hi) = self.shape.window();
        if tau >= hi - POLE_GUARD || tau <= lo + POLE_GUARD {
            let t_blowup = self.t_blowup.unwrap_or(f64::INFINITY);
            return Err(ClosedFormError::Pole { t, t_blowup });
        }
        Ok(tau)
    }

    /// `(q(t), q̇(t))`.
    pub fn state(&self, t: f64) -> Result<(f64, f64)> {
        let tau = self.canonical_time(t)?;
        let (q, qd) = self.shape.eval(tau)?;
        Ok((self.sign * q, self.sign * self.direction * qd))
    }

    pub fn q(&self, t: f64) -> Result<f64> {
        self.state(t).map(|s| s.0)
    }

    pub fn qdot(&self, t: f64) -> Result<f64> {
        self.state(t).map(|s| s.1)
    }

    /// `ε` recovered from the orbit's energy at time t.
    pub fn epsilon_at(&self, t: f64) -> Result<f64> {
        let (q, qd) = self.state(t)?;
        Ok(2.0 * energy(q, qd, self.c) / (self.c * self.c))
    }

    /// `e^{2Q(t)}` with `Q(t) = ∫₀ᵗ q dt'`.
    pub fn exp2q(&self, t: f64) -> Result<f64> {
        let tau = self.canonical_time(t)?;
        let now = self.shape.exp2q(tau, self.c)?;
        let start = self.shape.exp2q(self.shift, self.c)?;
        Ok((now / start).powf(self.sign * self.direction))
    }

    /// The same orbit time-shifted, reflected or reversed so that it passes
    /// through `(q0, qdot0)` at `t = 0`.
    fn aligned(mut self, q0: f64, qdot0: f64) -> Result<Self> {
        let (lo, hi) = self.shape.window();
        let shift = match self.shape {
            Shape::SeparatrixInner { root_c } => {
                self.sign = unit_sign(qdot0);
                (self.sign * q0 / root_c).atanh() / root_c
            }
            Shape::SeparatrixOuter { root_c } => {
                self.sign = unit_sign(q0);
                if self.sign * qdot0 < 0.0 {
                    self.direction = -1.0;
                }
                -(root_c / q0.abs()).atanh() / root_c
            }
            Shape::RegionA { .. } => {
                self.sign = unit_sign(qdot0);
                // Odd in τ; bisect on the positive half away from the pole.
                let target = self.sign * q0;
                let (_, b) = guarded(lo, hi);
                let tau = bisect_monotone(
                    |tau| self.shape.eval(tau).map(|s| s.0),
                    0.0,
                    b,
                    target.abs(),
                )?;
                tau.copysign(target)
            }
            Shape::BBounded { amp, .. } => {
                let half = 0.5 * self.period.unwrap_or(0.0);
                let target = q0.clamp(-amp, amp);
                let tau = if qdot0 == 0.0 && q0 == amp {
                    0.0
                } else {
                    // Decreasing on [0, T/2]; bisect on −q.
                    bisect_monotone(|tau| self.shape.eval(tau).map(|s| -s.0), 0.0, half, -target)?
                };
                if qdot0 > 0.0 {
                    -tau
                } else {
                    tau
                }
            }
            Shape::BUnbounded { amp, .. } | Shape::RegionC { amp, .. } => {
                self.sign = unit_sign(q0);
                let target = q0.abs().max(amp);
                let tau = if qdot0 == 0.0 && q0.abs() == amp {
                    0.0
                } else {
                    let (_, b) = guarded(lo, hi);
                    bisect_monotone(|tau| self.shape.eval(tau).map(|s| s.0), 0.0, b, target)?
                };
                if self.sign * qdot0 < 0.0 {
                    -tau
                } else {
                    tau
                }
            }
            Shape::Weierstrass { .. } | Shape::Rest { .. } => 0.0,
        };
        self.shift = shift;
        self.shift = self.polish_phase(q0, qdot0);
        self.t_blowup = self.next_singularity();
        Ok(self)
    }

    /// Gauss-Newton on `|(q, q̇)(0) − (q0, q̇0)|²` over the phase τ₀; the
    /// Jacobian is `d·(q̇, q̈)` with `q̈` from the equation of motion.
    fn polish_phase(&self, q0: f64, qdot0: f64) -> f64 {
        let mut shift = self.shift;
        let Ok(mut best) = self.phase_residual(shift, q0, qdot0) else {
            return shift;
        };
        for _ in 0..6 {
            let Ok((rq, rv, q, qd)) = self.phase_state(shift, q0, qdot0) else {
                break;
            };
            let jq = self.direction * qd;
            let jv = self.direction * q_acceleration(q, self.c);
            let norm = jq * jq + jv * jv;
            if norm == 0.0 {
                break;
            }
            let candidate = shift - (rq * jq + rv * jv) / norm;
            match self.phase_residual(candidate, q0, qdot0) {
                Ok(r) if r < best => {
                    best = r;
                    shift = candidate;
                }
                _ => break,
            }
        }
        shift
    }

    fn phase_state(&self, shift: f64, q0: f64, qdot0: f64) -> Result<(f64, f64, f64, f64)> {
        let (q, qd) = self.shape.eval(shift)?;
        let (q, qd) = (self.sign * q, self.sign * self.direction * qd);
        Ok((q - q0, qd - qdot0, q, qd))
    }

    fn phase_residual(&self, shift: f64, q0: f64, qdot0: f64) -> Result<f64> {
        let (lo, hi) = self.shape.window();
        if shift <= lo || shift >= hi {
            return Err(ClosedFormError::Degenerate(
                "phase outside the canonical window",
            ));
        }
        self.phase_state(shift, q0, qdot0)
            .map(|(a, b, _, _)| a.hypot(b))
    }

    /// First forward time at which the canonical time reaches a window edge.
    fn next_singularity(&self) -> Option<f64> {
        let (lo, hi) = self.shape.window();
        let t = if self.direction > 0.0 {
            hi - self.shift
        } else {
            self.shift - lo
        };
        t.is_finite().then_some(t)
    }

    /// Canonical time shift τ₀ with `q(t) = s·q_c(d·t + τ₀)`.
    pub fn phase(&self) -> f64 {
        self.shift
    }

    /// The closed-form orbit through arbitrary reduced data `(c, q₀, q̇₀)`.
    pub fn from_reduced(c: f64, q0: f64, qdot0: f64, tol_eps: f64) -> Result<Self> {
        let params = classify_reduced(c, q0, qdot0, tol_eps)?;
        let angle = params.angle.unwrap_or(0.0);
        let canonical = match params.regime {
            Regime::AUnbounded => solve_a(c, angle, 1.0)?,
            Regime::BBounded => {
                if q0 == 0.0 && qdot0 == 0.0 {
                    return Ok(rest(params.regime, c, 0.0));
                }
                solve_b_bounded(c, angle)?
            }
            Regime::BUnbounded => b_unbounded(c, angle)?,
            Regime::CUnbounded => region_c(c, angle)?,
            Regime::Separatrix => {
                let root_c = c.sqrt();
                if qdot0 == 0.0 && (q0.abs() - root_c).abs() <= 1e-12 * root_c {
                    return Ok(rest(params.regime, c, q0));
                }
                let mut orbit = solve_separatrix(c, 1.0)?;
                if q0.abs() > root_c {
                    orbit.shape = Shape::SeparatrixOuter { root_c };
                }
                orbit
            }
        };
        canonical.aligned(q0, qdot0)
    }

    /// The closed-form orbit of `q = √(4d_e² + d_i²)·b` for physical initial data.
    pub fn from_initial(init: &InitialData, tol_eps: f64) -> Result<Self> {
        init.validate()?;
        Self::from_reduced(compute_c(init), init.q0(), init.qdot0(), tol_eps)
    }
}

// Bisection bracket. Near a pole q̇ ~ q² loses realness to rounding; data
// beyond the bracket are reached by the phase polish.
fn guarded(lo: f64, hi: f64) -> (f64, f64) {
    let pad = |x: f64| 1e-4 * x.abs().max(1.0);
    (lo + pad(lo), hi - pad(hi))
}

/// Root of an increasing function on `[a, b]`, clamped to the end points.
fn bisect_monotone<F>(f: F, mut a: f64, mut b: f64, target: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if f(a)? >= target {
        return Ok(a);
    }
    if f(b)? <= target {
        return Ok(b);
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if f(mid)? < target {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Region A through the Weierstrass function,
/// `q = e^{iΦ/2}·√(℘(e^{iΦ/2}t + ω₃) − e₃)`, with the root branch fixed by
/// the direction of motion.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionAWeierstrass {
    pub roots: WeierstrassRoots,
    rotation: Complex,
    omega3: Complex,
    sign: f64,
}

impl RegionAWeierstrass {
    pub fn new(c: f64, nu: f64, sign: f64) -> Result<Self> {
        check_c(c)?;
        if !(nu > 0.0) {
            return Err(ClosedFormError::Domain {
                name: "nu",
                value: nu,
            });
        }
        let phi = nu.sinh().atan();
        let qd0 = c * nu.cosh();
        let e = Complex::from_polar(1.0, -2.0 * phi);
        let roots = WeierstrassRoots::new(
            -qd0 * (1.0 - 2.0 * e) / 3.0,
            qd0 * (2.0 - e) / 3.0,
            -qd0 * (1.0 + e) / 3.0,
        )?;
        let (_, omega3) = roots.half_periods()?;
        Ok(Self {
            roots,
            rotation: Complex::from_polar(1.0, 0.5 * phi),
            omega3,
            sign: unit_sign(sign),
        })
    }

    pub fn q(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(0.0);
        }
        let (p, _) = weierstrass_p_with_derivative(self.rotation * t + self.omega3, &self.roots)?;
        let q = real_part(self.rotation * (p - self.roots.e3).sqrt(), t)?;
        Ok(q.abs() * self.sign * t.signum())
    }

    /// `q̇ = e^{iΦ}√((℘ − e₁)(℘ − e₂))`, never zero on real times.
    pub fn qdot(&self, t: f64) -> Result<f64> {
        let z = self.rotation * t + self.omega3;
        let p = if t == 0.0 {
            self.roots.e3
        } else {
            weierstrass_p_with_derivative(z, &self.roots)?.0
        };
        let rot2 = self.rotation * self.rotation;
        let v = real_part(rot2 * ((p - self.roots.e1) * (p - self.roots.e2)).sqrt(), t)?;
        Ok(v.abs() * self.sign)
    }
}

/// `(α₁, α₂, β₁, β₂)` at `d_e = 0` from `e^{±2Γ}` and `e^{±2Q}`; `b = q/d_i`.
pub fn reconstruct_alpha_beta(
    init: &InitialData,
    orbit: &OrbitSolution,
    t: f64,
) -> Result<CoefficientState> {
    init.validate()?;
    if init.d_e != 0.0 {
        return Err(ClosedFormError::NonZeroElectronSkinDepth(init.d_e));
    }
    let d_i = init.d_i;
    let (q_start, _) = orbit.state(0.0)?;
    let expected = d_i * init.b_0;
    if (q_start - expected).abs() > 1e-9 * expected.abs().max(1.0) {
        return Err(ClosedFormError::OrbitMismatch {
            orbit: q_start,
            data: expected,
        });
    }
    let growth = orbit.exp2q(t)?;
    let q = orbit.q(t)?;
    let gamma_factor = (2.0 * init.gamma.integral(t)).exp();
    let alpha1 = init.alpha1_0 * gamma_factor * growth;
    let alpha2 = init.alpha2_0 / (gamma_factor * growth);
    let beta1 = (init.beta1_0 + init.alpha1_0 / d_i) * gamma_factor - alpha1 / d_i;
    let beta2 = (init.beta2_0 - init.alpha2_0 / d_i) / gamma_factor + alpha2 / d_i;
    Ok(CoefficientState {
        t,
        alpha1,
        alpha2,
        beta1,
        beta2,
        b: q / d_i,
    })
}

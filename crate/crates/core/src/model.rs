//! Coefficient system of the X-point collapse model.
//!
//! The fields are `φ = γ·xy`, `ψ = α₁x² − α₂y²`, `V_z = β₁x² + β₂y²` and
//! `B_z = b·xy`. The five coefficients obey
//!
//! ```text
//! α̇₁ =  2γα₁ + 2b(d_i α₁ − d_e² β₁)
//! α̇₂ = −2γα₂ − 2b(d_i α₂ + d_e² β₂)
//! β̇₁ =  2γβ₁ − 2bα₁
//! β̇₂ = −2γβ₂ − 2bα₂
//! ḃ  = −4(α₁β₂ + α₂β₁)
//! ```
//!
//! With `q = √(4d_e² + d_i²)·b` the field `b` reduces to the quartic
//! oscillator `q̈ = 2q³ − 2cq` with potential `U(q) = cq² − q⁴/2` and energy
//! `E = ½q̇² + U(q) = ½c²ε`.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("ion skin depth d_i must be positive, got {0}")]
    NonPositiveIonSkinDepth(f64),
    #[error("electron skin depth d_e must be non-negative, got {0}")]
    NegativeElectronSkinDepth(f64),
    #[error("initial data must be finite")]
    NonFinite,
    #[error("unsupported parameters: c = {c} <= 0 (turning-point analysis needs c > 0)")]
    NonPositiveC { c: f64 },
    #[error("tabulated vorticity samples must be non-empty and strictly increasing in t")]
    BadVorticityTable,
    #[error("field grid is empty")]
    EmptyGrid,
}

/// Time dependence of the unconstrained vorticity coefficient `γ(t)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum VorticitySpec {
    #[default]
    Zero,
    Constant(f64),
    /// `(t, γ)` samples, linearly interpolated and held constant outside the table.
    Tabulated(Vec<(f64, f64)>),
}

impl VorticitySpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            Self::Tabulated(samples) => {
                let increasing = samples.windows(2).all(|w| w[1].0 > w[0].0);
                let finite = samples.iter().all(|(t, g)| t.is_finite() && g.is_finite());
                if samples.is_empty() || !increasing || !finite {
                    Err(ModelError::BadVorticityTable)
                } else {
                    Ok(())
                }
            }
            Self::Constant(g) if !g.is_finite() => Err(ModelError::NonFinite),
            _ => Ok(()),
        }
    }

    pub fn gamma_at(&self, t: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Constant(g) => *g,
            Self::Tabulated(samples) => interpolate(samples, t),
        }
    }

    /// `Γ(t) = ∫₀ᵗ γ dt'`. Tabulated specs use the trapezoid rule on the
    /// table nodes, which is exact for the piecewise-linear interpolant.
    pub fn integral(&self, t: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Constant(g) => g * t,
            Self::Tabulated(samples) => {
                if t >= 0.0 {
                    trapezoid(samples, 0.0, t)
                } else {
                    -trapezoid(samples, t, 0.0)
                }
            }
        }
    }
}

fn interpolate(samples: &[(f64, f64)], t: f64) -> f64 {
    let first = samples[0];
    let last = samples[samples.len() - 1];
    if t <= first.0 {
        return first.1;
    }
    if t >= last.0 {
        return last.1;
    }
    let idx = samples.partition_point(|s| s.0 <= t);
    let (t0, g0) = samples[idx - 1];
    let (t1, g1) = samples[idx];
    g0 + (g1 - g0) * (t - t0) / (t1 - t0)
}

// Integral of the (clamped) piecewise-linear interpolant over [a, b], a <= b.
fn trapezoid(samples: &[(f64, f64)], a: f64, b: f64) -> f64 {
    let mut nodes = vec![a];
    nodes.extend(samples.iter().map(|s| s.0).filter(|&t| t > a && t < b));
    nodes.push(b);
    nodes
        .windows(2)
        .map(|w| 0.5 * (w[1] - w[0]) * (interpolate(samples, w[0]) + interpolate(samples, w[1])))
        .sum()
}

/// Physical initial data of the coefficient system.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub alpha1_0: f64,
    pub alpha2_0: f64,
    pub beta1_0: f64,
    pub beta2_0: f64,
    pub b_0: f64,
    pub d_i: f64,
    pub d_e: f64,
    pub gamma: VorticitySpec,
}

impl InitialData {
    pub fn validate(&self) -> Result<(), ModelError> {
        let values = [
            self.alpha1_0,
            self.alpha2_0,
            self.beta1_0,
            self.beta2_0,
            self.b_0,
            self.d_i,
            self.d_e,
        ];
        if values.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite);
        }
        if self.d_i <= 0.0 {
            return Err(ModelError::NonPositiveIonSkinDepth(self.d_i));
        }
        if self.d_e < 0.0 {
            return Err(ModelError::NegativeElectronSkinDepth(self.d_e));
        }
        self.gamma.validate()
    }

    /// Initial data with prescribed reduced quantities `(c, q₀, q̇₀)`.
    ///
    /// Uses `α₁⁰ = 1`, `β₁⁰ = 0`, `β₂⁰ = −q̇₀/(4λ)` and solves the definition of
    /// `c` for `α₂⁰`, where `λ = √(4d_e² + d_i²)`.
    pub fn from_reduced(c: f64, q0: f64, qdot0: f64, d_i: f64, d_e: f64) -> Self {
        let lambda = (4.0 * d_e * d_e + d_i * d_i).sqrt();
        let beta2_0 = -qdot0 / (4.0 * lambda);
        let alpha2_0 = (4.0 * d_i * beta2_0 + q0 * q0 - c) / 8.0;
        Self {
            alpha1_0: 1.0,
            alpha2_0,
            beta1_0: 0.0,
            beta2_0,
            b_0: q0 / lambda,
            d_i,
            d_e,
            gamma: VorticitySpec::Zero,
        }
    }

    /// `λ = √(4d_e² + d_i²)`, the factor mapping `b` to `q`.
    pub fn q_scale(&self) -> f64 {
        (4.0 * self.d_e * self.d_e + self.d_i * self.d_i).sqrt()
    }

    /// `ḃ₀ = −4(α₁⁰β₂⁰ + α₂⁰β₁⁰)`.
    pub fn bdot_0(&self) -> f64 {
        -4.0 * (self.alpha1_0 * self.beta2_0 + self.alpha2_0 * self.beta1_0)
    }

    pub fn q0(&self) -> f64 {
        self.q_scale() * self.b_0
    }

    pub fn qdot0(&self) -> f64 {
        self.q_scale() * self.bdot_0()
    }

    pub fn initial_state(&self) -> CoefficientState {
        CoefficientState {
            t: 0.0,
            alpha1: self.alpha1_0,
            alpha2: self.alpha2_0,
            beta1: self.beta1_0,
            beta2: self.beta2_0,
            b: self.b_0,
        }
    }
}

/// `(α₁, α₂, β₁, β₂, b)` at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientState {
    pub t: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub b: f64,
}

impl CoefficientState {
    /// Components in the order `[α₁, α₂, β₁, β₂, b]`.
    pub fn to_array(&self) -> [f64; 5] {
        [self.alpha1, self.alpha2, self.beta1, self.beta2, self.b]
    }

    pub fn from_array(t: f64, y: [f64; 5]) -> Self {
        Self {
            t,
            alpha1: y[0],
            alpha2: y[1],
            beta1: y[2],
            beta2: y[3],
            b: y[4],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Right-hand side of the coefficient ODEs, ordered `[α̇₁, α̇₂, β̇₁, β̇₂, ḃ]`.
pub fn rhs_full(state: &CoefficientState, gamma: f64, d_i: f64, d_e: f64) -> [f64; 5] {
    rhs_array(&state.to_array(), gamma, d_i, d_e)
}

pub(crate) fn rhs_array(y: &[f64; 5], gamma: f64, d_i: f64, d_e: f64) -> [f64; 5] {
    let [a1, a2, b1, b2, b] = *y;
    let de2 = d_e * d_e;
    [
        2.0 * gamma * a1 + 2.0 * b * (d_i * a1 - de2 * b1),
        -2.0 * gamma * a2 - 2.0 * b * (d_i * a2 + de2 * b2),
        2.0 * gamma * b1 - 2.0 * b * a1,
        -2.0 * gamma * b2 - 2.0 * b * a2,
        -4.0 * (a1 * b2 + a2 * b1),
    ]
}

/// Residuals of the three conservation laws; each vanishes on exact solutions.
pub fn conservation_triplet(state: &CoefficientState, init: &InitialData) -> [f64; 3] {
    let quarter_db2 = 0.25 * (state.b * state.b - init.b_0 * init.b_0);
    let de2 = init.d_e * init.d_e;
    let d_i = init.d_i;
    let r1 = (state.alpha1 * state.alpha2 - init.alpha1_0 * init.alpha2_0) - de2 * quarter_db2;
    let r2 = (state.beta1 * state.beta2 - init.beta1_0 * init.beta2_0) - quarter_db2;
    let r3 = (state.alpha1 + d_i * state.beta1) * (state.alpha2 - d_i * state.beta2)
        - (init.alpha1_0 + d_i * init.beta1_0) * (init.alpha2_0 - d_i * init.beta2_0)
        - de2 * quarter_db2;
    [r1, r2, r3]
}

/// Initial-data coefficient `c` of the reduced oscillator.
pub fn compute_c(init: &InitialData) -> f64 {
    let de2 = init.d_e * init.d_e;
    let di = init.d_i;
    4.0 * di * (init.alpha1_0 * init.beta2_0 - init.alpha2_0 * init.beta1_0)
        + (4.0 * de2 + di * di) * init.b_0 * init.b_0
        - 8.0 * (init.alpha1_0 * init.alpha2_0 + de2 * init.beta1_0 * init.beta2_0)
}

/// `U(q) = cq² − q⁴/2`.
pub fn potential_u(q: f64, c: f64) -> f64 {
    let q2 = q * q;
    c * q2 - 0.5 * q2 * q2
}

pub fn energy(q: f64, qdot: f64, c: f64) -> f64 {
    0.5 * qdot * qdot + potential_u(q, c)
}

/// `q̈ = 2q³ − 2cq`.
pub fn q_acceleration(q: f64, c: f64) -> f64 {
    2.0 * q * (q * q - c)
}

/// Which sign convention to use for the turning-point parameter `c₀`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum C0Definition {
    /// `c₀² = (q₀² − c)² − q̇₀²`, consistent with the energy law.
    #[default]
    Corrected,
    /// `c₀² = (q₀² − c)² + q̇₀²`; kept only to demonstrate that it breaks the
    /// initial condition.
    FlippedSign,
}

/// `c₀²` under the chosen definition.
pub fn c0_squared(c: f64, q0: f64, qdot0: f64, def: C0Definition) -> f64 {
    let a = q0 * q0 - c;
    match def {
        C0Definition::Corrected => a * a - qdot0 * qdot0,
        C0Definition::FlippedSign => a * a + qdot0 * qdot0,
    }
}

/// Right-hand side of the factorised velocity law
/// `q̇² = c²ε(1 − q²/(c + c₀))(1 − q²/(c − c₀))`, with `c²ε = c² − c₀²`,
/// expanded as `(q² − c)² − c₀²` so it stays finite when `c₀ = ±c`.
pub fn factored_velocity_squared(q: f64, c: f64, c0_sq: f64) -> f64 {
    let a = q * q - c;
    a * a - c0_sq
}

/// The value of `c₀`: real below the separatrix energy, imaginary above it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TurningParameter {
    Real(f64),
    /// `c₀ = i·value`.
    Imaginary(f64),
}

impl TurningParameter {
    fn from_squared(sq: f64) -> Self {
        if sq >= 0.0 {
            Self::Real(sq.sqrt())
        } else {
            Self::Imaginary((-sq).sqrt())
        }
    }

    pub fn squared(&self) -> f64 {
        match *self {
            Self::Real(v) => v * v,
            Self::Imaginary(v) => -v * v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    AUnbounded,
    BBounded,
    BUnbounded,
    CUnbounded,
    Separatrix,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Self::AUnbounded => "A_unbounded",
            Self::BBounded => "B_bounded",
            Self::BUnbounded => "B_unbounded",
            Self::CUnbounded => "C_unbounded",
            Self::Separatrix => "Separatrix",
        }
    }

    pub fn is_singular(&self) -> bool {
        matches!(self, Self::AUnbounded | Self::BUnbounded | Self::CUnbounded)
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Reduced quantities derived from initial data.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedParams {
    pub c: f64,
    pub q0: f64,
    pub qdot0: f64,
    pub energy: f64,
    pub epsilon: f64,
    pub c0: TurningParameter,
    pub regime: Regime,
    /// μ in region B, ν in regions A and C, `None` on the separatrix.
    pub angle: Option<f64>,
    /// `Φ = arctan(sinh ν)`, region A only.
    pub phi_a: Option<f64>,
}

pub const DEFAULT_SEPARATRIX_TOL: f64 = 1e-10;

pub fn classify(init: &InitialData, tol_eps: f64) -> Result<DerivedParams, ModelError> {
    init.validate()?;
    classify_reduced(compute_c(init), init.q0(), init.qdot0(), tol_eps)
}

/// Classification from the reduced data `(c, q₀, q̇₀)` alone.
pub fn classify_reduced(
    c: f64,
    q0: f64,
    qdot0: f64,
    tol_eps: f64,
) -> Result<DerivedParams, ModelError> {
    if !(c.is_finite() && q0.is_finite() && qdot0.is_finite()) {
        return Err(ModelError::NonFinite);
    }
    if c <= 0.0 {
        return Err(ModelError::NonPositiveC { c });
    }
    let e = energy(q0, qdot0, c);
    let epsilon = 2.0 * e / (c * c);
    let c0 = TurningParameter::from_squared(c0_squared(c, q0, qdot0, C0Definition::Corrected));

    let (regime, angle, phi_a) = if (epsilon - 1.0).abs() < tol_eps {
        (Regime::Separatrix, None, None)
    } else if epsilon > 1.0 {
        let nu = epsilon.sqrt().acosh();
        (Regime::AUnbounded, Some(nu), Some(nu.sinh().atan()))
    } else if epsilon >= 0.0 {
        let mu = epsilon.sqrt().asin();
        // Below the barrier the orbit stays on its own side of ±√c.
        let regime = if q0 * q0 < c {
            Regime::BBounded
        } else {
            Regime::BUnbounded
        };
        (regime, Some(mu), None)
    } else {
        (Regime::CUnbounded, Some((-epsilon).sqrt().asinh()), None)
    };

    Ok(DerivedParams {
        c,
        q0,
        qdot0,
        energy: e,
        epsilon,
        c0,
        regime,
        angle,
        phi_a,
    })
}

/// Turning points `U(q) = E`, ascending. Four for `0 ≤ ε ≤ 1` (pairs merge at
/// `±√c` when `ε = 1`), two for `ε < 0`, none above the barrier.
pub fn turning_points(c: f64, epsilon: f64) -> Result<Vec<f64>, ModelError> {
    if c <= 0.0 {
        return Err(ModelError::NonPositiveC { c });
    }
    if epsilon > 1.0 {
        return Ok(Vec::new());
    }
    let c0 = c * (1.0 - epsilon).sqrt();
    let outer = (c + c0).sqrt();
    if epsilon < 0.0 {
        return Ok(vec![-outer, outer]);
    }
    let inner = (c - c0).max(0.0).sqrt();
    Ok(vec![-outer, -inner, inner, outer])
}

/// Field values at one grid node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub x: f64,
    pub y: f64,
    pub phi: f64,
    pub psi: f64,
    pub v_z: f64,
    pub b_z: f64,
}

/// Evaluates `φ = γxy`, `ψ = α₁x² − α₂y²`, `V_z = β₁x² + β₂y²`, `B_z = b·xy`.
pub fn field_snapshot(
    state: &CoefficientState,
    gamma: f64,
    grid: &[(f64, f64)],
) -> Result<Vec<FieldSample>, ModelError> {
    if grid.is_empty() {
        return Err(ModelError::EmptyGrid);
    }
    Ok(grid
        .iter()
        .map(|&(x, y)| {
            let (x2, y2, xy) = (x * x, y * y, x * y);
            FieldSample {
                x,
                y,
                phi: gamma * xy,
                psi: state.alpha1 * x2 - state.alpha2 * y2,
                v_z: state.beta1 * x2 + state.beta2 * y2,
                b_z: state.b * xy,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_init() -> InitialData {
        InitialData {
            alpha1_0: 0.0,
            alpha2_0: 0.0,
            beta1_0: 0.0,
            beta2_0: 0.0,
            b_0: 0.0,
            d_i: 1.0,
            d_e: 0.0,
            gamma: VorticitySpec::Zero,
        }
    }

    fn state(a1: f64, a2: f64, b1: f64, b2: f64, b: f64) -> CoefficientState {
        CoefficientState::from_array(0.0, [a1, a2, b1, b2, b])
    }

    #[test]
    fn rhs_examples() {
        assert_eq!(
            rhs_full(&state(0.0, 0.0, 0.0, 0.0, 0.0), 0.3, 1.0, 0.2),
            [0.0; 5]
        );
        assert_eq!(
            rhs_full(&state(0.0, 0.0, 0.0, 0.0, 1.0), 0.0, 1.0, 0.0),
            [0.0; 5]
        );
        let d = rhs_full(&state(1.0, 0.0, 0.0, 1.0, 0.0), 0.0, 1.0, 0.0);
        assert_eq!(d[4], -4.0);
    }

    #[test]
    fn c_examples() {
        assert_eq!(compute_c(&zero_init()), 0.0);
        let init = InitialData {
            b_0: 1.0,
            ..zero_init()
        };
        assert_eq!(compute_c(&init), 1.0);
        let init = InitialData {
            alpha1_0: 0.5,
            beta2_0: 0.5,
            ..zero_init()
        };
        assert_eq!(compute_c(&init), 1.0);
    }

    #[test]
    fn potential_examples() {
        assert_eq!(potential_u(0.0, 0.5), 0.0);
        assert!((potential_u(0.5_f64.sqrt(), 0.5) - 0.125).abs() < 1e-16);
        let h = 1e-4;
        let second =
            (potential_u(h, 0.5) - 2.0 * potential_u(0.0, 0.5) + potential_u(-h, 0.5)) / (h * h);
        assert!((second - 1.0).abs() < 1e-6);
    }

    #[test]
    fn conservation_zero_at_initial_state() {
        let init = InitialData {
            alpha1_0: 0.3,
            alpha2_0: -0.2,
            beta1_0: 0.7,
            beta2_0: 0.1,
            b_0: 0.4,
            d_i: 1.0,
            d_e: 0.1,
            gamma: VorticitySpec::Constant(0.2),
        };
        assert_eq!(conservation_triplet(&init.initial_state(), &init), [0.0; 3]);
    }

    #[test]
    fn classify_canonical_examples() {
        let c = 0.5;
        let sep = classify_reduced(c, 0.0, c, DEFAULT_SEPARATRIX_TOL).unwrap();
        assert_eq!(sep.regime, Regime::Separatrix);
        assert!((sep.epsilon - 1.0).abs() < 1e-15);

        let mu: f64 = 0.8;
        let q0 = (2.0 * c).sqrt() * (mu / 2.0).sin();
        let b = classify_reduced(c, q0, 0.0, DEFAULT_SEPARATRIX_TOL).unwrap();
        assert_eq!(b.regime, Regime::BBounded);
        assert!((b.epsilon - mu.sin().powi(2)).abs() < 1e-14);
        assert!((b.angle.unwrap() - mu).abs() < 1e-12);

        let q0 = (2.0 * c).sqrt() * (mu / 2.0).cos();
        let b = classify_reduced(c, -q0, 0.0, DEFAULT_SEPARATRIX_TOL).unwrap();
        assert_eq!(b.regime, Regime::BUnbounded);

        let nu: f64 = 0.5;
        let q0 = (2.0 * c).sqrt() * (nu / 2.0).cosh();
        let cc = classify_reduced(c, q0, 0.0, DEFAULT_SEPARATRIX_TOL).unwrap();
        assert_eq!(cc.regime, Regime::CUnbounded);
        assert!((cc.epsilon + nu.sinh().powi(2)).abs() < 1e-14);
        assert!((cc.angle.unwrap() - nu).abs() < 1e-12);

        let a = classify_reduced(c, 0.0, c * 0.3_f64.cosh(), DEFAULT_SEPARATRIX_TOL).unwrap();
        assert_eq!(a.regime, Regime::AUnbounded);
        assert!((a.epsilon - 0.3_f64.cosh().powi(2)).abs() < 1e-14);
        assert!((a.angle.unwrap() - 0.3).abs() < 1e-12);
        assert!((a.phi_a.unwrap() - a.angle.unwrap().sinh().atan()).abs() < 1e-15);
        assert!(matches!(a.c0, TurningParameter::Imaginary(_)));
    }

    #[test]
    fn classify_rejects_non_positive_c() {
        assert!(matches!(
            classify_reduced(0.0, 0.1, 0.0, 1e-10),
            Err(ModelError::NonPositiveC { .. })
        ));
        assert!(classify(&zero_init(), 1e-10).is_err());
        let bad = InitialData {
            d_i: 0.0,
            b_0: 1.0,
            ..zero_init()
        };
        assert!(matches!(
            classify(&bad, 1e-10),
            Err(ModelError::NonPositiveIonSkinDepth(_))
        ));
    }

    #[test]
    fn c0_matches_energy_parametrisation() {
        let c = 0.5;
        for &(q0, qd0) in &[(0.1, 0.05), (0.3, -0.1), (0.9, 0.0), (1.4, 0.2)] {
            let p = classify_reduced(c, q0, qd0, 1e-10).unwrap();
            if let TurningParameter::Real(c0) = p.c0 {
                assert!((c0 - c * (1.0 - p.epsilon).sqrt()).abs() < 1e-12);
            }
            let v2 = factored_velocity_squared(q0, c, p.c0.squared());
            assert!((v2 - qd0 * qd0).abs() < 1e-14);
        }
    }

    #[test]
    fn turning_point_examples() {
        let c = 0.5;
        let tp = turning_points(c, 0.0).unwrap();
        assert_eq!(tp.len(), 4);
        assert_eq!(tp[1], 0.0);
        assert_eq!(tp[2], 0.0);
        assert!((tp[3] - (2.0 * c).sqrt()).abs() < 1e-15);
        let tp = turning_points(c, 1.0).unwrap();
        for &p in &tp {
            assert!((p.abs() - c.sqrt()).abs() < 1e-15);
        }
        assert!(turning_points(c, 1.5).unwrap().is_empty());
        assert_eq!(turning_points(c, -0.3).unwrap().len(), 2);
        for &eps in &[-0.7, 0.2, 0.6] {
            for p in turning_points(c, eps).unwrap() {
                assert!((potential_u(p, c) - 0.5 * c * c * eps).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn field_examples() {
        let grid = [(1.0, 1.0), (0.5, 0.5), (-0.3, 0.2)];
        let zero = field_snapshot(&state(0.0, 0.0, 0.0, 0.0, 0.0), 0.0, &grid).unwrap();
        assert!(zero
            .iter()
            .all(|f| f.phi == 0.0 && f.psi == 0.0 && f.v_z == 0.0 && f.b_z == 0.0));
        let f = field_snapshot(&state(1.0, 1.0, 0.0, 0.0, 0.0), 0.0, &grid).unwrap();
        assert_eq!(f[0].psi, 0.0);
        let f = field_snapshot(&state(0.0, 0.0, 0.0, 0.0, 2.0), 0.0, &grid).unwrap();
        assert_eq!(f[1].b_z, 0.5);
        assert!(field_snapshot(&state(0.0, 0.0, 0.0, 0.0, 2.0), 0.0, &[]).is_err());
    }

    #[test]
    fn vorticity_integral() {
        assert_eq!(VorticitySpec::Zero.integral(3.0), 0.0);
        assert!((VorticitySpec::Constant(0.2).integral(1.5) - 0.3).abs() < 1e-16);
        let tab = VorticitySpec::Tabulated(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 1.0)]);
        assert!((tab.integral(1.0) - 0.5).abs() < 1e-15);
        assert!((tab.integral(1.5) - 1.0).abs() < 1e-15);
        assert!((tab.integral(0.5) - 0.125).abs() < 1e-15);
        assert!((tab.gamma_at(0.25) - 0.25).abs() < 1e-15);
        assert!(VorticitySpec::Tabulated(vec![(1.0, 0.0), (0.5, 0.0)])
            .validate()
            .is_err());
    }

    #[test]
    fn inverse_map_reproduces_reduced_data() {
        for &(c, q0, qd0, de) in &[
            (0.5, 0.2, -0.1, 0.0),
            (0.5, 1.1, 0.3, 0.1),
            (2.0, 0.0, 2.0, 0.3),
        ] {
            let init = InitialData::from_reduced(c, q0, qd0, 1.0, de);
            assert!((compute_c(&init) - c).abs() < 1e-14);
            assert!((init.q0() - q0).abs() < 1e-14);
            assert!((init.qdot0() - qd0).abs() < 1e-14);
        }
    }
}

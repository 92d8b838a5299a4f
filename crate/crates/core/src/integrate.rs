//! Adaptive Dormand–Prince 5(4) integration of the coefficient system and of
//! the reduced oscillator, used as an independent check on the closed forms.
//!
//! Finite-time singularities are located from the times at which `max |yᵢ|`
//! crosses `θ/100`, `θ/10` and `θ` (θ the blow-up threshold). Each crossing
//! is bisected inside its step; near a power-law singularity the crossing
//! times form a geometric sequence, so Aitken extrapolation of the three
//! yields the singular time.

use thiserror::Error;

use crate::model::{
    conservation_triplet, q_acceleration, rhs_array, CoefficientState, InitialData, ModelError,
};

/// Steps below this size end the run with [`Terminal::StepFailure`].
pub const MIN_STEP: f64 = 1e-14;
const SAFETY: f64 = 0.9;
const PI_ALPHA: f64 = 0.7 / 4.0;
const PI_BETA: f64 = 0.4 / 4.0;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;
const MAX_STEPS: usize = 5_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrateError {
    #[error("{name} = {value} is not a valid integrator setting")]
    Config { name: &'static str, value: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("initial state is not finite")]
    NonFiniteStart,
}

pub type Result<T> = std::result::Result<T, IntegrateError>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub blowup_threshold: f64,
    pub max_time: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.1,
            blowup_threshold: 1e8,
            max_time: 10.0,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("rel_tol", self.rel_tol, self.rel_tol > 0.0),
            ("abs_tol", self.abs_tol, self.abs_tol > 0.0),
            ("max_step", self.max_step, self.max_step > 0.0),
            (
                "blowup_threshold",
                self.blowup_threshold,
                self.blowup_threshold > 1.0,
            ),
            ("max_time", self.max_time, self.max_time > 0.0),
        ];
        for (name, value, ok) in checks {
            if !ok || !value.is_finite() {
                return Err(IntegrateError::Config { name, value });
            }
        }
        Ok(())
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_max_time(mut self, max_time: f64) -> Self {
        self.max_time = max_time;
        self
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.blowup_threshold = threshold;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Terminal {
    ReachedMaxTime,
    /// `t_est` is the extrapolated singular time; `bracket_width` bounds the
    /// bisection bracket of the final threshold crossing.
    BlowupDetected {
        t_est: f64,
        bracket_width: f64,
    },
    StepFailure {
        t: f64,
    },
}

/// Accepted steps with derivatives for cubic Hermite dense output.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
    pub derivs: Vec<[f64; N]>,
    pub terminal: Terminal,
    /// Times at which `max |yᵢ|` crossed `θ/100`, `θ/10`, `θ`.
    pub crossings: Vec<f64>,
}

pub type FullTrajectory = Trajectory<5>;
pub type QTrajectory = Trajectory<2>;

impl<const N: usize> Trajectory<N> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    pub fn blowup_time(&self) -> Option<f64> {
        match self.terminal {
            Terminal::BlowupDetected { t_est, .. } => Some(t_est),
            _ => None,
        }
    }

    /// Cubic Hermite interpolant on the accepted steps; `None` outside the run.
    pub fn interpolate(&self, t: f64) -> Option<[f64; N]> {
        let first = *self.times.first()?;
        let last = self.end_time();
        if !(t >= first && t <= last) {
            return None;
        }
        let i = self.times.partition_point(|&s| s <= t);
        if i == self.times.len() {
            return Some(self.states[i - 1]);
        }
        let i = i.max(1);
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        let (y0, y1) = (&self.states[i - 1], &self.states[i]);
        let (f0, f1) = (&self.derivs[i - 1], &self.derivs[i]);
        Some(std::array::from_fn(|k| {
            h00 * y0[k] + h * h10 * f0[k] + h01 * y1[k] + h * h11 * f1[k]
        }))
    }
}

impl FullTrajectory {
    pub fn coefficient_states(&self) -> Vec<CoefficientState> {
        self.times
            .iter()
            .zip(&self.states)
            .map(|(&t, y)| CoefficientState::from_array(t, *y))
            .collect()
    }
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth-order minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Step<const N: usize> {
    y: [f64; N],
    f: [f64; N],
    err: [f64; N],
}

fn combine<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(w, k)| w * k[i]).sum::<f64>())
}

/// One Dormand–Prince step; `f0` is the derivative at `(t, y)` (FSAL).
fn dp_step<const N: usize, F>(rhs: &F, t: f64, y: &[f64; N], f0: &[f64; N], h: f64) -> Step<N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k1 = *f0;
    let k2 = rhs(t + C2 * h, &combine(y, h, &[(A21, &k1)]));
    let k3 = rhs(t + C3 * h, &combine(y, h, &[(A31, &k1), (A32, &k2)]));
    let k4 = rhs(
        t + C4 * h,
        &combine(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
    );
    let k5 = rhs(
        t + C5 * h,
        &combine(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    );
    let k6 = rhs(
        t + h,
        &combine(
            y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ),
    );
    let y1 = combine(
        y,
        h,
        &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
    );
    let k7 = rhs(t + h, &y1);
    let err = std::array::from_fn(|i| {
        h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
    });
    Step { y: y1, f: k7, err }
}

fn error_norm<const N: usize>(step: &Step<N>, y0: &[f64; N], cfg: &IntegratorConfig) -> f64 {
    let sum: f64 = (0..N)
        .map(|i| {
            let scale = cfg.abs_tol + cfg.rel_tol * y0[i].abs().max(step.y[i].abs());
            (step.err[i] / scale).powi(2)
        })
        .sum();
    (sum / N as f64).sqrt()
}

fn max_abs<const N: usize>(y: &[f64; N]) -> f64 {
    y.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

fn is_finite<const N: usize>(y: &[f64; N]) -> bool {
    y.iter().all(|v| v.is_finite())
}

/// Starting step from the usual two-derivative estimate.
fn initial_step<const N: usize, F>(
    rhs: &F,
    y0: &[f64; N],
    f0: &[f64; N],
    cfg: &IntegratorConfig,
) -> f64
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let scale: [f64; N] = std::array::from_fn(|i| cfg.abs_tol + cfg.rel_tol * y0[i].abs());
    let rms =
        |v: &[f64; N]| ((0..N).map(|i| (v[i] / scale[i]).powi(2)).sum::<f64>() / N as f64).sqrt();
    let d0 = rms(y0);
    let d1 = rms(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1 = combine(y0, h0, &[(1.0, f0)]);
    let f1 = rhs(h0, &y1);
    let diff: [f64; N] = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = rms(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(cfg.max_step).min(cfg.max_time)
}

/// Bisects a step from `(t, y)` for the sub-step at which `max |yᵢ|` reaches
/// `level`. Returns the crossing state and the final bracket width.
fn locate_crossing<const N: usize, F>(
    rhs: &F,
    t: f64,
    y: &[f64; N],
    f: &[f64; N],
    h: f64,
    level: f64,
) -> (f64, [f64; N], [f64; N], f64)
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let (mut lo, mut hi) = (0.0, h);
    let mut best = dp_step(rhs, t, y, f, h);
    let mut best_h = h;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let trial = dp_step(rhs, t, y, f, mid);
        if is_finite(&trial.y) && max_abs(&trial.y) < level {
            lo = mid;
        } else {
            hi = mid;
            best = trial;
            best_h = mid;
        }
        if hi - lo <= 1e-15 * t.abs().max(1.0) {
            break;
        }
    }
    (t + best_h, best.y, best.f, hi - lo)
}

/// Aitken limit of three crossing times of a geometric sequence of levels.
fn extrapolate_singularity(crossings: &[f64]) -> f64 {
    let [t1, t2, t3] = [crossings[0], crossings[1], crossings[2]];
    let d1 = t2 - t1;
    let d2 = t3 - t2;
    if d1 <= 0.0 || d2 < 0.0 {
        return t3;
    }
    let r = d2 / d1;
    if r >= 1.0 {
        return t3;
    }
    t3 + d2 * r / (1.0 - r)
}

/// Integrates `ẏ = rhs(t, y)` from `t = 0`.
pub fn integrate<const N: usize, F>(
    rhs: F,
    y0: [f64; N],
    cfg: &IntegratorConfig,
) -> Result<Trajectory<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    cfg.validate()?;
    if !is_finite(&y0) {
        return Err(IntegrateError::NonFiniteStart);
    }
    let levels = [
        cfg.blowup_threshold / 100.0,
        cfg.blowup_threshold / 10.0,
        cfg.blowup_threshold,
    ];
    let mut t = 0.0;
    let mut y = y0;
    let mut f = rhs(t, &y);
    let mut traj = Trajectory {
        times: vec![t],
        states: vec![y],
        derivs: vec![f],
        terminal: Terminal::ReachedMaxTime,
        crossings: Vec::new(),
    };
    let mut next_level = levels
        .iter()
        .position(|&l| max_abs(&y) < l)
        .unwrap_or(levels.len());
    if next_level == levels.len() {
        traj.terminal = Terminal::BlowupDetected {
            t_est: 0.0,
            bracket_width: 0.0,
        };
        return Ok(traj);
    }
    let mut h = initial_step(&rhs, &y, &f, cfg);
    let mut err_prev: f64 = 1e-4;
    let mut rejected_last = false;

    for _ in 0..MAX_STEPS {
        if t >= cfg.max_time {
            return Ok(traj);
        }
        let last = t + h >= cfg.max_time;
        if last {
            h = cfg.max_time - t;
        }
        let step = dp_step(&rhs, t, &y, &f, h);
        let err = if is_finite(&step.y) && is_finite(&step.f) {
            error_norm(&step, &y, cfg)
        } else {
            f64::INFINITY
        };

        if err <= 1.0 {
            let t_new = if last { cfg.max_time } else { t + h };
            // Record every threshold crossed within this step.
            if max_abs(&step.y) >= levels[next_level] {
                let mut crossed_state = None;
                while next_level < levels.len() && max_abs(&step.y) >= levels[next_level] {
                    let hit = locate_crossing(&rhs, t, &y, &f, h, levels[next_level]);
                    traj.crossings.push(hit.0);
                    crossed_state = Some(hit);
                    next_level += 1;
                }
                if next_level == levels.len() {
                    let (tc, yc, fc, width) = crossed_state.expect("crossing located");
                    traj.times.push(tc);
                    traj.states.push(yc);
                    traj.derivs.push(fc);
                    traj.terminal = Terminal::BlowupDetected {
                        t_est: extrapolate_singularity(&traj.crossings),
                        bracket_width: width,
                    };
                    return Ok(traj);
                }
            }
            t = t_new;
            y = step.y;
            f = step.f;
            traj.times.push(t);
            traj.states.push(y);
            traj.derivs.push(f);
            let err_c = err.max(1e-10);
            let mut fac = SAFETY * err_c.powf(-PI_ALPHA) * err_prev.powf(PI_BETA);
            fac = fac.clamp(FAC_MIN, FAC_MAX);
            if rejected_last {
                fac = fac.min(1.0);
            }
            h = (h * fac).min(cfg.max_step);
            err_prev = err_c;
            rejected_last = false;
        } else {
            let fac = if err.is_finite() {
                (SAFETY * err.powf(-0.2)).max(FAC_MIN)
            } else {
                FAC_MIN
            };
            h *= fac;
            rejected_last = true;
        }
        if h < MIN_STEP {
            traj.terminal = Terminal::StepFailure { t };
            return Ok(traj);
        }
    }
    traj.terminal = Terminal::StepFailure { t };
    Ok(traj)
}

/// The five coefficient equations from the given initial data.
pub fn integrate_full(init: &InitialData, cfg: &IntegratorConfig) -> Result<FullTrajectory> {
    init.validate()?;
    let (d_i, d_e) = (init.d_i, init.d_e);
    let gamma = &init.gamma;
    integrate(
        |t, y: &[f64; 5]| rhs_array(y, gamma.gamma_at(t), d_i, d_e),
        init.initial_state().to_array(),
        cfg,
    )
}

/// The reduced oscillator `q̈ = 2q³ − 2cq` as the system `(q, q̇)`.
pub fn integrate_q(c: f64, q0: f64, qdot0: f64, cfg: &IntegratorConfig) -> Result<QTrajectory> {
    if !c.is_finite() {
        return Err(ModelError::NonFinite.into());
    }
    integrate(
        |_, y: &[f64; 2]| [y[1], q_acceleration(y[0], c)],
        [q0, qdot0],
        cfg,
    )
}

/// Largest absolute value of each conservation residual over the samples.
pub fn monitor_conservation(traj: &FullTrajectory, init: &InitialData) -> [f64; 3] {
    traj.coefficient_states()
        .iter()
        .map(|s| conservation_triplet(s, init))
        .fold([0.0; 3], |acc, r| {
            std::array::from_fn(|i| acc[i].max(r[i].abs()))
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{energy, VorticitySpec};

    #[test]
    fn config_validation() {
        assert!(IntegratorConfig::default().validate().is_ok());
        let bad = IntegratorConfig {
            blowup_threshold: 1.0,
            ..Default::default()
        };
        assert!(matches!(
            bad.validate(),
            Err(IntegrateError::Config {
                name: "blowup_threshold",
                ..
            })
        ));
        assert!(IntegratorConfig::default()
            .with_rel_tol(0.0)
            .validate()
            .is_err());
    }

    #[test]
    fn zero_data_stays_zero() {
        let init = InitialData {
            alpha1_0: 0.0,
            alpha2_0: 0.0,
            beta1_0: 0.0,
            beta2_0: 0.0,
            b_0: 0.0,
            d_i: 1.0,
            d_e: 0.0,
            gamma: VorticitySpec::Zero,
        };
        let traj = integrate_full(&init, &IntegratorConfig::default()).unwrap();
        assert_eq!(traj.terminal, Terminal::ReachedMaxTime);
        assert!(traj.states.iter().all(|y| y.iter().all(|&v| v == 0.0)));
        assert_eq!(monitor_conservation(&traj, &init), [0.0; 3]);
        let q = integrate_q(0.5, 0.0, 0.0, &IntegratorConfig::default()).unwrap();
        assert!(q.states.iter().all(|y| *y == [0.0, 0.0]));
        assert_eq!(q.end_time(), 10.0);
    }

    #[test]
    fn exponential_decay_accuracy() {
        let cfg = IntegratorConfig::default().with_max_time(2.0);
        let traj = integrate(|_, y: &[f64; 1]| [-y[0]], [1.0], &cfg).unwrap();
        let end = traj.states.last().unwrap()[0];
        assert!((end - (-2.0_f64).exp()).abs() < 1e-10);
        let mid = traj.interpolate(1.234).unwrap()[0];
        assert!((mid - (-1.234_f64).exp()).abs() < 1e-8);
        assert!(traj.interpolate(2.5).is_none());
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn riccati_blowup_extrapolates_exactly() {
        // ẏ = y², y(0) = 1 blows up at t = 1.
        let cfg = IntegratorConfig::default().with_rel_tol(1e-12);
        let traj = integrate(|_, y: &[f64; 1]| [y[0] * y[0]], [1.0], &cfg).unwrap();
        match traj.terminal {
            Terminal::BlowupDetected {
                t_est,
                bracket_width,
            } => {
                assert!((t_est - 1.0).abs() < 1e-9, "{t_est}");
                assert!(bracket_width <= 1e-8);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(traj.crossings.len(), 3);
    }

    #[test]
    fn separatrix_stays_below_saddle() {
        let c: f64 = 0.5;
        let cfg = IntegratorConfig::default().with_max_time(20.0);
        let traj = integrate_q(c, 0.0, c, &cfg).unwrap();
        assert_eq!(traj.terminal, Terminal::ReachedMaxTime);
        assert!(traj.states.iter().all(|y| y[0].abs() < c.sqrt()));
    }

    #[test]
    fn energy_drift_on_bounded_orbit() {
        let c = 0.5;
        let (q0, qd0) = (0.3, 0.2);
        let e0 = energy(q0, qd0, c);
        let traj = integrate_q(c, q0, qd0, &IntegratorConfig::default()).unwrap();
        let drift = traj
            .states
            .iter()
            .map(|y| (energy(y[0], y[1], c) - e0).abs())
            .fold(0.0, f64::max);
        assert!(drift < 1e-9 * traj.end_time(), "{drift}");
    }
}

//! Cross-check battery run by `xpoint verify`.

use serde_json::{json, Value};
use xpoint_core::closedform::{
    blowup_time, period_b, period_weierstrass, solve_a, solve_b_bounded, solve_b_unbounded,
    solve_c, solve_separatrix, OrbitSolution, RegionAWeierstrass,
};
use xpoint_core::integrate::{integrate_full, integrate_q, monitor_conservation, IntegratorConfig};
use xpoint_core::model::{
    c0_squared, factored_velocity_squared, C0Definition, InitialData, Regime, VorticitySpec,
    DEFAULT_SEPARATRIX_TOL,
};

/// Energies of the region-B checks.
pub const EPSILON_SET: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

pub const CHECK_NAMES: [&str; 9] = [
    "sho_limit",
    "quarter_period",
    "landen_equivalence",
    "oracle_agreement",
    "blowup_times",
    "conservation",
    "initial_condition",
    "region_a_equivalence",
    "exp2q_derivative",
];

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub error: Option<String>,
}

impl CheckResult {
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "check_name": self.name,
            "max_residual": if self.max_residual.is_finite() { json!(self.max_residual) } else { Value::Null },
            "tolerance": self.tolerance,
            "pass": self.pass,
        });
        if let Some(e) = &self.error {
            v["error"] = json!(e);
        }
        v
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub c: f64,
    pub c0_definition: C0Definition,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            c: 0.5,
            c0_definition: C0Definition::Corrected,
        }
    }
}

type Outcome = Result<f64, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn mu_of(eps: f64) -> f64 {
    eps.sqrt().asin()
}

fn sho_limit(opts: &VerifyOptions) -> Outcome {
    let t = period_b(opts.c, mu_of(1e-6)).map_err(err)?;
    let sho = 2.0 * std::f64::consts::PI / (2.0 * opts.c).sqrt();
    Ok((t - sho).abs())
}

fn quarter_period(opts: &VerifyOptions) -> Outcome {
    let mut worst: f64 = 0.0;
    for eps in EPSILON_SET {
        let t = solve_b_bounded(opts.c, mu_of(eps))
            .map_err(err)?
            .period
            .unwrap_or(f64::NAN);
        let t_inf = solve_b_unbounded(opts.c, mu_of(eps))
            .map_err(err)?
            .t_blowup
            .unwrap_or(f64::NAN);
        worst = worst.max((t_inf - t / 4.0).abs());
    }
    Ok(worst)
}

fn landen_equivalence(opts: &VerifyOptions) -> Outcome {
    let mut worst: f64 = 0.0;
    for eps in EPSILON_SET {
        let a = period_weierstrass(opts.c, eps).map_err(err)?;
        let b = period_b(opts.c, mu_of(eps)).map_err(err)?;
        worst = worst.max((a - b).abs());
    }
    Ok(worst)
}

/// Canonical orbits of every regime: A (ν = 0.5), B± (ε = 0.5), C (ν = 0.6), separatrix.
pub fn reference_orbits(c: f64) -> Result<Vec<OrbitSolution>, String> {
    Ok(vec![
        solve_a(c, 0.5, 1.0).map_err(err)?,
        solve_b_bounded(c, mu_of(0.5)).map_err(err)?,
        solve_b_unbounded(c, mu_of(0.5)).map_err(err)?,
        solve_c(c, 0.6).map_err(err)?,
        solve_separatrix(c, 1.0).map_err(err)?,
    ])
}

/// `min(3T, 0.9T∞, 10)`.
pub fn comparison_horizon(orbit: &OrbitSolution) -> f64 {
    let mut end: f64 = 10.0;
    if let Some(p) = orbit.period {
        end = end.min(3.0 * p);
    }
    if let Some(t) = orbit.t_blowup {
        end = end.min(0.9 * t);
    }
    end
}

pub fn oracle_deviation(orbit: &OrbitSolution, rel_tol: f64) -> Outcome {
    let (q0, qd0) = orbit.state(0.0).map_err(err)?;
    let cfg = IntegratorConfig::default()
        .with_rel_tol(rel_tol)
        .with_max_time(comparison_horizon(orbit));
    let traj = integrate_q(orbit.c, q0, qd0, &cfg).map_err(err)?;
    if traj.end_time() < cfg.max_time {
        return Err(format!("oracle stopped early: {:?}", traj.terminal));
    }
    let mut worst: f64 = 0.0;
    for (&t, y) in traj.times.iter().zip(&traj.states) {
        worst = worst.max((y[0] - orbit.q(t).map_err(err)?).abs());
    }
    Ok(worst)
}

fn oracle_agreement(opts: &VerifyOptions) -> Outcome {
    let mut worst: f64 = 0.0;
    for orbit in reference_orbits(opts.c)? {
        worst = worst.max(oracle_deviation(&orbit, 1e-12)?);
    }
    Ok(worst)
}

pub fn detected_blowup(orbit: &OrbitSolution) -> Outcome {
    let (q0, qd0) = orbit.state(0.0).map_err(err)?;
    let cfg = IntegratorConfig::default()
        .with_rel_tol(1e-12)
        .with_max_time(100.0);
    let traj = integrate_q(orbit.c, q0, qd0, &cfg).map_err(err)?;
    traj.blowup_time()
        .ok_or_else(|| format!("no blow-up detected: {:?}", traj.terminal))
}

fn blowup_times(opts: &VerifyOptions) -> Outcome {
    let cases = [
        (
            solve_a(opts.c, 0.5, 1.0).map_err(err)?,
            Regime::AUnbounded,
            0.5,
        ),
        (
            solve_b_unbounded(opts.c, mu_of(0.5)).map_err(err)?,
            Regime::BUnbounded,
            mu_of(0.5),
        ),
        (solve_c(opts.c, 0.6).map_err(err)?, Regime::CUnbounded, 0.6),
    ];
    let mut worst: f64 = 0.0;
    for (orbit, regime, angle) in cases {
        let exact = blowup_time(regime, opts.c, angle).map_err(err)?;
        worst = worst.max((detected_blowup(&orbit)? - exact).abs());
    }
    Ok(worst)
}

/// Mixed nonzero data with `d_i = 1`.
pub fn mixed_initial_data(d_e: f64, gamma: f64) -> InitialData {
    InitialData {
        alpha1_0: 0.7,
        alpha2_0: -0.3,
        beta1_0: 0.4,
        beta2_0: 0.25,
        b_0: 0.6,
        d_i: 1.0,
        d_e,
        gamma: if gamma == 0.0 {
            VorticitySpec::Zero
        } else {
            VorticitySpec::Constant(gamma)
        },
    }
}

pub fn conservation_residual(init: &InitialData) -> Outcome {
    let orbit = OrbitSolution::from_initial(init, DEFAULT_SEPARATRIX_TOL).map_err(err)?;
    let end = orbit.t_blowup.map_or(1.0, |t| (0.9 * t).min(1.0));
    let cfg = IntegratorConfig::default()
        .with_rel_tol(1e-12)
        .with_max_time(end);
    let traj = integrate_full(init, &cfg).map_err(err)?;
    Ok(monitor_conservation(&traj, init)
        .into_iter()
        .fold(0.0, f64::max))
}

fn conservation(_: &VerifyOptions) -> Outcome {
    let mut worst: f64 = 0.0;
    for d_e in [0.0, 0.1] {
        for gamma in [0.0, 0.2] {
            worst = worst.max(conservation_residual(&mixed_initial_data(d_e, gamma))?);
        }
    }
    Ok(worst)
}

/// The orbit parametrised by `c₀` must pass through the data:
/// `q̇₀² = (q₀² − c)² − c₀²`.
fn initial_condition(opts: &VerifyOptions) -> Outcome {
    let c = opts.c;
    let data = [
        (0.3, 0.2),
        (0.1, -0.4),
        (1.2, 0.3),
        (0.0, 0.6),
        (-0.5, 0.15),
        (1.6, -0.05),
    ];
    let mut worst: f64 = 0.0;
    for (q0, qd0) in data {
        let c0_sq = c0_squared(c, q0, qd0, opts.c0_definition);
        let implied = factored_velocity_squared(q0, c, c0_sq);
        worst = worst.max((implied - qd0 * qd0).abs() / (1.0 + qd0 * qd0));
    }
    Ok(worst)
}

pub fn region_a_deviation(c: f64, nu: f64, samples: usize) -> Outcome {
    let jacobi = solve_a(c, nu, 1.0).map_err(err)?;
    let weier = RegionAWeierstrass::new(c, nu, 1.0).map_err(err)?;
    let t_inf = jacobi.t_blowup.unwrap_or(f64::NAN);
    let mut worst: f64 = 0.0;
    for i in 0..samples {
        let t = 0.9 * t_inf * i as f64 / (samples - 1) as f64;
        let a = jacobi.q(t).map_err(err)?;
        let b = weier.q(t).map_err(err)?;
        worst = worst.max((a - b).abs());
    }
    Ok(worst)
}

fn region_a_equivalence(opts: &VerifyOptions) -> Outcome {
    region_a_deviation(opts.c, 0.5, 25)
}

/// `d/dt ln e^{2Q} − 2q` by central differences with step `1e-6`.
pub fn exp2q_residual(orbit: &OrbitSolution, samples: usize) -> Outcome {
    let end = match (orbit.period, orbit.t_blowup) {
        (Some(p), _) => p,
        (None, Some(t)) => 0.9 * t,
        (None, None) => 5.0,
    };
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for i in 1..=samples {
        let t = end * i as f64 / (samples + 1) as f64;
        let lp = orbit.exp2q(t + h).map_err(err)?.ln();
        let lm = orbit.exp2q(t - h).map_err(err)?.ln();
        let q = orbit.q(t).map_err(err)?;
        worst = worst.max(((lp - lm) / (2.0 * h) - 2.0 * q).abs());
    }
    Ok(worst)
}

fn exp2q_derivative(opts: &VerifyOptions) -> Outcome {
    let mut worst: f64 = 0.0;
    for orbit in reference_orbits(opts.c)?.iter().take(4) {
        worst = worst.max(exp2q_residual(orbit, 20)?);
    }
    Ok(worst)
}

fn tolerance(name: &str) -> f64 {
    match name {
        "sho_limit" => 1e-4,
        "quarter_period" => 1e-12,
        "landen_equivalence" => 1e-11,
        "oracle_agreement" => 1e-7,
        "blowup_times" => 1e-5,
        "conservation" => 1e-8,
        "initial_condition" => 1e-10,
        "region_a_equivalence" => 1e-8,
        "exp2q_derivative" => 1e-6,
        _ => f64::NAN,
    }
}

/// Runs one named check; unknown names are reported by the caller.
pub fn run_check(name: &str, opts: &VerifyOptions) -> Option<CheckResult> {
    let outcome = match name {
        "sho_limit" => sho_limit(opts),
        "quarter_period" => quarter_period(opts),
        "landen_equivalence" => landen_equivalence(opts),
        "oracle_agreement" => oracle_agreement(opts),
        "blowup_times" => blowup_times(opts),
        "conservation" => conservation(opts),
        "initial_condition" => initial_condition(opts),
        "region_a_equivalence" => region_a_equivalence(opts),
        "exp2q_derivative" => exp2q_derivative(opts),
        _ => return None,
    };
    let tol = tolerance(name);
    Some(match outcome {
        Ok(r) => CheckResult {
            name: name.to_string(),
            max_residual: r,
            tolerance: tol,
            pass: r < tol,
            error: None,
        },
        Err(e) => CheckResult {
            name: name.to_string(),
            max_residual: f64::NAN,
            tolerance: tol,
            pass: false,
            error: Some(e),
        },
    })
}

/// JSON summary and whether every check passed.
pub fn summary(results: &[CheckResult]) -> (Value, bool) {
    let all_pass = results.iter().all(|r| r.pass);
    let v = json!({
        "checks": results.iter().map(CheckResult::to_json).collect::<Vec<_>>(),
        "checks_run": results.len(),
        "empty_selection": results.is_empty(),
        "all_pass": all_pass,
    });
    (v, all_pass)
}

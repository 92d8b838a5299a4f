//! Table builders behind the subcommands.

use clap::ValueEnum;
use xpoint_core::closedform::{blowup_time, period_b, reconstruct_alpha_beta, OrbitSolution};
use xpoint_core::integrate::{integrate_full, integrate_q, IntegratorConfig};
use xpoint_core::model::{
    classify, field_snapshot, turning_points, CoefficientState, DerivedParams, InitialData, Regime,
    TurningParameter, DEFAULT_SEPARATRIX_TOL,
};

use crate::output::{Cell, Report, Table};
use crate::params::{canonical_point, Branch};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Mode {
    #[default]
    Exact,
    Numeric,
    Both,
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Invalid(e.to_string())
}

/// `n` equally spaced points on `[a, b]`, hitting both ends exactly.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| {
            if i == n - 1 {
                b
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

pub fn derive(init: &InitialData) -> Result<(DerivedParams, OrbitSolution), CliError> {
    let params = classify(init, DEFAULT_SEPARATRIX_TOL).map_err(invalid)?;
    let orbit = OrbitSolution::from_initial(init, DEFAULT_SEPARATRIX_TOL).map_err(invalid)?;
    Ok((params, orbit))
}

pub fn classify_report(init: &InitialData) -> Result<Report, CliError> {
    let (p, orbit) = derive(init)?;
    let mut r = Report::default();
    r.insert_number("c", Some(p.c));
    r.insert_number("q0", Some(p.q0));
    r.insert_number("qdot0", Some(p.qdot0));
    r.insert_number("energy", Some(p.energy));
    r.insert_number("epsilon", Some(p.epsilon));
    match p.c0 {
        TurningParameter::Real(v) => {
            r.insert_number("c0", Some(v));
            r.insert("c0_kind", "real");
        }
        TurningParameter::Imaginary(v) => {
            r.insert_number("c0", Some(v));
            r.insert("c0_kind", "imaginary");
        }
    }
    r.insert("regime", p.regime.label());
    let (mu, nu) = match p.regime {
        Regime::BBounded | Regime::BUnbounded => (p.angle, None),
        Regime::AUnbounded | Regime::CUnbounded => (None, p.angle),
        Regime::Separatrix => (None, None),
    };
    r.insert_number("mu", mu);
    r.insert_number("nu", nu);
    r.insert_number("phi", p.phi_a);
    let turning = turning_points(p.c, p.epsilon).map_err(invalid)?;
    r.insert(
        "turning_points",
        turning
            .into_iter()
            .map(serde_json::Value::from)
            .collect::<Vec<_>>(),
    );
    r.insert_number("period", orbit.period);
    r.insert_number("t_blowup", orbit.t_blowup);
    Ok(r)
}

fn check_horizon(orbit: &OrbitSolution, t_max: f64) -> Result<(), CliError> {
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(invalid(format!("t_max = {t_max} must be positive")));
    }
    if let Some(tb) = orbit.t_blowup {
        if t_max >= tb {
            return Err(invalid(format!(
                "t_max = {t_max} reaches the finite-time singularity at T_inf = {tb}"
            )));
        }
    }
    Ok(())
}

pub struct TrajectoryRequest {
    pub mode: Mode,
    pub reconstruct: bool,
    pub t_max: f64,
    pub samples: usize,
    pub integrator: IntegratorConfig,
}

pub fn trajectory_table(init: &InitialData, req: &TrajectoryRequest) -> Result<Table, CliError> {
    if req.samples < 2 {
        return Err(invalid("samples must be at least 2"));
    }
    let (_, orbit) = derive(init)?;
    check_horizon(&orbit, req.t_max)?;
    if req.reconstruct && init.d_e != 0.0 {
        return Err(invalid(format!(
            "reconstruction needs d_e = 0 (got {}); perturbation corrections out of scope",
            init.d_e
        )));
    }
    let (q0, qd0) = (init.q0(), init.qdot0());
    let times = linspace(0.0, req.t_max, req.samples);
    let lambda = init.q_scale();

    let mut columns = vec!["t", "q", "qdot"];
    if req.reconstruct {
        columns.extend(["alpha1", "alpha2", "beta1", "beta2", "b"]);
    }
    if req.mode == Mode::Both {
        columns.extend(["q_numeric", "qdot_numeric", "abs_dev", "abs_dev_qdot"]);
    }
    let mut table = Table::new(&columns);

    let cfg = req.integrator.with_max_time(req.t_max);
    let numeric_q = match req.mode {
        Mode::Exact => None,
        _ => Some(integrate_q(orbit.c, q0, qd0, &cfg).map_err(invalid)?),
    };
    let numeric_full = match (req.mode, req.reconstruct) {
        (Mode::Numeric, true) => Some(integrate_full(init, &cfg).map_err(invalid)?),
        _ => None,
    };

    for (i, &t) in times.iter().enumerate() {
        let exact = if i == 0 {
            Some((q0, qd0))
        } else if req.mode == Mode::Numeric {
            None
        } else {
            Some(orbit.state(t).map_err(invalid)?)
        };
        let numeric = match &numeric_q {
            Some(_) if i == 0 => Some([q0, qd0]),
            Some(traj) => Some(traj.interpolate(t).ok_or_else(|| {
                invalid(format!(
                    "integration stopped at t = {} ({:?})",
                    traj.end_time(),
                    traj.terminal
                ))
            })?),
            None => None,
        };
        let (q, qd) = match (exact, numeric) {
            (Some(e), _) => e,
            (None, Some(n)) => (n[0], n[1]),
            (None, None) => unreachable!("mode selects at least one solution"),
        };
        let mut row: Vec<Cell> = vec![t.into(), q.into(), qd.into()];
        if req.reconstruct {
            let s: CoefficientState = if i == 0 {
                init.initial_state()
            } else if let Some(full) = &numeric_full {
                let y = full.interpolate(t).ok_or_else(|| {
                    invalid(format!("integration stopped at t = {}", full.end_time()))
                })?;
                CoefficientState::from_array(t, y)
            } else {
                reconstruct_alpha_beta(init, &orbit, t).map_err(invalid)?
            };
            let b = if numeric_full.is_some() {
                s.b
            } else {
                q / lambda
            };
            row.extend([
                s.alpha1.into(),
                s.alpha2.into(),
                s.beta1.into(),
                s.beta2.into(),
                b.into(),
            ]);
        }
        if req.mode == Mode::Both {
            let n = numeric.expect("numeric solution in both mode");
            row.extend([
                n[0].into(),
                n[1].into(),
                (q - n[0]).abs().into(),
                (qd - n[1]).abs().into(),
            ]);
        }
        table.push(row);
    }
    Ok(table)
}

/// Samples `orbit` on `[t0, t1]`.
fn sample_curve(
    table: &mut Table,
    eps: f64,
    label: &str,
    orbit: &OrbitSolution,
    t0: f64,
    t1: f64,
    n: usize,
) -> Result<(), CliError> {
    for t in linspace(t0, t1, n) {
        let (q, p) = orbit.state(t).map_err(invalid)?;
        table.push(vec![eps.into(), label.into(), q.into(), p.into()]);
    }
    Ok(())
}

fn point(table: &mut Table, eps: f64, label: &str, q: f64, p: f64) {
    table.push(vec![eps.into(), label.into(), q.into(), p.into()]);
}

/// Forward time until `|q| = cap` or `0.95·T∞`, whichever is first.
fn stop_time(orbit: &OrbitSolution, cap: f64) -> Result<f64, CliError> {
    let t_inf = orbit
        .t_blowup
        .ok_or_else(|| invalid("singular branch without blow-up"))?;
    let end = 0.95 * t_inf;
    let reach = |t: f64| orbit.q(t).map(f64::abs).map_err(invalid);
    if reach(end)? <= cap {
        return Ok(end);
    }
    if reach(0.0)? >= cap {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, end);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if reach(mid)? < cap {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

fn orbit_through(c: f64, q: f64, p: f64) -> Result<OrbitSolution, CliError> {
    OrbitSolution::from_reduced(c, q, p, DEFAULT_SEPARATRIX_TOL).map_err(invalid)
}

/// Phase-plane curves `(q, p = q̇)` for each energy. Non-finite energies are
/// skipped and reported in the returned warnings.
pub fn portrait_table(
    c: f64,
    energies: &[f64],
    samples: usize,
) -> Result<(Table, Vec<String>), CliError> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(invalid(format!(
            "unsupported parameters: c = {c} <= 0 (turning-point analysis needs c > 0)"
        )));
    }
    if samples < 2 {
        return Err(invalid("samples must be at least 2"));
    }
    let mut table = Table::new(&["epsilon", "branch", "q", "p"]);
    let mut warnings = Vec::new();
    let root_c = c.sqrt();
    let cap = 3.0 * root_c;
    for &eps in energies {
        if !eps.is_finite() {
            warnings.push(format!("skipping epsilon = {eps}: outside every regime"));
            continue;
        }
        if (eps - 1.0).abs() < DEFAULT_SEPARATRIX_TOL {
            // Inner separatrices run between the saddles, reached only as t → ±∞.
            let span = 12.0 / root_c;
            for (label, s) in [("inner+", 1.0), ("inner-", -1.0)] {
                let orbit = orbit_through(c, 0.0, s * c)?;
                point(&mut table, eps, label, -s * root_c, 0.0);
                sample_curve(&mut table, eps, label, &orbit, -span, span, samples)?;
                point(&mut table, eps, label, s * root_c, 0.0);
            }
            // Outer separatrices: out of or into each saddle, up to |q| = 3√c.
            for (label, s, p_sign) in [
                ("outer+out", 1.0, 1.0),
                ("outer+in", 1.0, -1.0),
                ("outer-out", -1.0, -1.0),
                ("outer-in", -1.0, 1.0),
            ] {
                let orbit = orbit_through(c, s * cap, p_sign * (cap * cap - c))?;
                let outgoing = s * p_sign > 0.0;
                if outgoing {
                    point(&mut table, eps, label, s * root_c, 0.0);
                    sample_curve(&mut table, eps, label, &orbit, -span, 0.0, samples)?;
                } else {
                    sample_curve(&mut table, eps, label, &orbit, 0.0, span, samples)?;
                    point(&mut table, eps, label, s * root_c, 0.0);
                }
            }
            continue;
        }
        if eps > 1.0 {
            for (label, s) in [("upper", 1.0), ("lower", -1.0)] {
                let (q, p) = canonical_point(c, eps, Branch::Inner, s);
                let orbit = orbit_through(c, q, p)?;
                let t = stop_time(&orbit, cap)?;
                sample_curve(&mut table, eps, label, &orbit, -t, t, samples)?;
            }
            continue;
        }
        if eps >= 0.0 {
            let (q, p) = canonical_point(c, eps, Branch::Inner, 1.0);
            let inner = orbit_through(c, q, p)?;
            match inner.period {
                Some(period) => {
                    sample_curve(&mut table, eps, "inner", &inner, 0.0, period, samples)?
                }
                None => point(&mut table, eps, "inner", q, p),
            }
        }
        for (label, s) in [("outer+", 1.0), ("outer-", -1.0)] {
            let (q, p) = canonical_point(c, eps, Branch::Outer, s);
            let orbit = orbit_through(c, q, p)?;
            let t = stop_time(&orbit, cap)?;
            sample_curve(&mut table, eps, label, &orbit, -t, t, samples)?;
        }
    }
    Ok((table, warnings))
}

/// Default energy grid: 61 points on `[−2, 2]`.
pub fn default_period_grid() -> Vec<f64> {
    (0..61).map(|i| -2.0 + 4.0 * i as f64 / 60.0).collect()
}

/// Rows `(ε, T, T∞)`; cells are empty where a quantity is undefined and
/// `ε = 1` is skipped with a warning.
pub fn periods_table(c: f64, energies: &[f64]) -> Result<(Table, Vec<String>), CliError> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(invalid(format!(
            "unsupported parameters: c = {c} <= 0 (turning-point analysis needs c > 0)"
        )));
    }
    let mut table = Table::new(&["epsilon", "T", "T_inf"]);
    let mut warnings = Vec::new();
    for &eps in energies {
        if eps == 1.0 || !eps.is_finite() {
            warnings.push(format!(
                "skipping epsilon = {eps}: periods diverge on the separatrix"
            ));
            continue;
        }
        let (period, t_inf) = if eps > 1.0 {
            let nu = eps.sqrt().acosh();
            (
                None,
                Some(blowup_time(Regime::AUnbounded, c, nu).map_err(invalid)?),
            )
        } else if eps >= 0.0 {
            let mu = eps.sqrt().asin();
            (
                Some(period_b(c, mu).map_err(invalid)?),
                Some(blowup_time(Regime::BUnbounded, c, mu).map_err(invalid)?),
            )
        } else {
            let nu = (-eps).sqrt().asinh();
            (
                None,
                Some(blowup_time(Regime::CUnbounded, c, nu).map_err(invalid)?),
            )
        };
        table.push(vec![eps.into(), period.into(), t_inf.into()]);
    }
    Ok((table, warnings))
}

/// Fields on an `n × n` grid over `[−1, 1]²` at time `t`.
pub fn fields_table(
    init: &InitialData,
    t: f64,
    n: usize,
    integrator: &IntegratorConfig,
) -> Result<Table, CliError> {
    if n < 2 {
        return Err(invalid("grid must have at least 2 points per side"));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(invalid(format!("t = {t} must be non-negative")));
    }
    let (_, orbit) = derive(init)?;
    if let Some(tb) = orbit.t_blowup {
        if t >= tb {
            return Err(invalid(format!(
                "t = {t} is at or beyond the blow-up time T_inf = {tb}"
            )));
        }
    }
    let state = if t == 0.0 {
        init.initial_state()
    } else if init.d_e == 0.0 {
        reconstruct_alpha_beta(init, &orbit, t).map_err(invalid)?
    } else {
        let traj = integrate_full(init, &integrator.with_max_time(t)).map_err(invalid)?;
        let y = traj
            .interpolate(t)
            .ok_or_else(|| invalid(format!("integration stopped at t = {}", traj.end_time())))?;
        CoefficientState::from_array(t, y)
    };
    let axis = linspace(-1.0, 1.0, n);
    let grid: Vec<(f64, f64)> = axis
        .iter()
        .flat_map(|&y| axis.iter().map(move |&x| (x, y)))
        .collect();
    let samples = field_snapshot(&state, init.gamma.gamma_at(t), &grid).map_err(invalid)?;
    let mut table = Table::new(&["x", "y", "phi", "psi", "v_z", "b_z"]);
    for s in samples {
        table.push(vec![
            s.x.into(),
            s.y.into(),
            s.phi.into(),
            s.psi.into(),
            s.v_z.into(),
            s.b_z.into(),
        ]);
    }
    Ok(table)
}

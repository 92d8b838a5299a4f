//! Acceptance battery: one line per criterion, non-zero exit if any fails.
//!
//! Runs without the libtest harness so the report is always printed.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::{Duration, Instant};

use xpoint_cli::commands::periods_table;
use xpoint_cli::output::Cell;
use xpoint_cli::verify::{
    comparison_horizon, conservation_residual, detected_blowup, exp2q_residual, mixed_initial_data,
    oracle_deviation, reference_orbits, region_a_deviation, EPSILON_SET,
};
use xpoint_core::closedform::{
    blowup_time, period_b, period_weierstrass, reconstruct_alpha_beta, solve_a, solve_b_bounded,
    solve_b_unbounded, solve_c, OrbitSolution,
};
use xpoint_core::elliptic::{complete_k, jacobi_real, sncndn_parameter};
use xpoint_core::model::{
    rhs_full, CoefficientState, InitialData, Regime, VorticitySpec, DEFAULT_SEPARATRIX_TOL,
};
use xpoint_core::Complex;

const C: f64 = 0.5;
const FD_STEP: f64 = 1e-3;

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn mu_of(eps: f64) -> f64 {
    eps.sqrt().asin()
}

fn t_inf_cell(row: &[Cell]) -> f64 {
    match row[2] {
        Cell::Num(v) => v,
        _ => f64::NAN,
    }
}

fn sho_period_limit() -> Verdict {
    let start = Instant::now();
    let (table, _) = match periods_table(C, &[1e-6, 2e-6]) {
        Ok(t) => t,
        Err(e) => return verdict(false, e.to_string()),
    };
    let t = table.numbers("T");
    // Linear extrapolation to ε = 0 from the two smallest energies.
    let t0 = 2.0 * t[0] - t[1];
    let elapsed = start.elapsed();
    let err = (t0 - 2.0 * PI).abs();
    verdict(
        err < 1e-4 && elapsed < Duration::from_secs(1),
        format!("T(0+) = {t0:.12}, |T - 2pi| = {err:.2e} (tol 1e-4), runtime {elapsed:?} (< 1 s)"),
    )
}

fn quarter_period_law() -> Verdict {
    let mut worst: f64 = 0.0;
    for eps in EPSILON_SET {
        let t = solve_b_bounded(C, mu_of(eps)).unwrap().period.unwrap();
        let t_inf = solve_b_unbounded(C, mu_of(eps)).unwrap().t_blowup.unwrap();
        worst = worst.max((t_inf - t / 4.0).abs());
    }
    verdict(
        worst < 1e-12,
        format!("max |T_inf - T/4| = {worst:.2e} (tol 1e-12)"),
    )
}

fn landen_equivalence() -> Verdict {
    let mut worst: f64 = 0.0;
    for eps in EPSILON_SET {
        let a = period_weierstrass(C, eps).unwrap();
        let b = period_b(C, mu_of(eps)).unwrap();
        worst = worst.max((a - b).abs());
    }
    verdict(
        worst < 1e-11,
        format!("max |T_wp - T_jacobi| = {worst:.2e} (tol 1e-11)"),
    )
}

fn oracle_agreement() -> Verdict {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for orbit in reference_orbits(C).unwrap() {
        match oracle_deviation(&orbit, 1e-12) {
            Ok(d) => {
                pass &= d < 1e-7;
                parts.push(format!(
                    "{} {d:.1e} on [0, {:.3}]",
                    orbit.regime.label(),
                    comparison_horizon(&orbit)
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{} error: {e}", orbit.regime.label()));
            }
        }
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(10);
    verdict(
        pass,
        format!(
            "{} (tol 1e-7), runtime {elapsed:?} (< 10 s)",
            parts.join("; ")
        ),
    )
}

fn blowup_times() -> Verdict {
    let cases = [
        (solve_a(C, 0.5, 1.0).unwrap(), Regime::AUnbounded, 0.5),
        (
            solve_b_unbounded(C, mu_of(0.5)).unwrap(),
            Regime::BUnbounded,
            mu_of(0.5),
        ),
        (solve_c(C, 0.6).unwrap(), Regime::CUnbounded, 0.6),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (orbit, regime, angle) in cases {
        let exact = blowup_time(regime, C, angle).unwrap();
        match detected_blowup(&orbit) {
            Ok(t) => {
                let d = (t - exact).abs();
                pass &= d < 1e-5;
                parts.push(format!("{} |dT| = {d:.1e}", regime.label()));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{} error: {e}", regime.label()));
            }
        }
    }
    // Divergence towards the separatrix, read off the period table.
    let (table, _) = periods_table(C, &[0.5, 0.99]).unwrap();
    let near = t_inf_cell(&table.rows[1]);
    let mid = t_inf_cell(&table.rows[0]);
    let ratio = near / mid;
    let diverges = near > 5.0 * mid;
    pass &= diverges;
    verdict(
        pass,
        format!(
            "{} (tol 1e-5); T_inf(0.99) = {near:.6}, T_inf(0.5) = {mid:.6}, ratio {ratio:.4} (needs > 5)",
            parts.join("; ")
        ),
    )
}

fn conservation_residuals() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut pass = true;
    let mut errors = Vec::new();
    for d_e in [0.0, 0.1] {
        for gamma in [0.0, 0.2] {
            match conservation_residual(&mixed_initial_data(d_e, gamma)) {
                Ok(r) => worst = worst.max(r),
                Err(e) => {
                    pass = false;
                    errors.push(e);
                }
            }
        }
    }
    pass &= worst < 1e-8;
    verdict(
        pass,
        format!("max residual {worst:.2e} (tol 1e-8) {}", errors.join("; ")),
    )
}

/// Five-point central difference.
fn derivative(f: impl Fn(f64) -> [f64; 5], t: f64, h: f64) -> [f64; 5] {
    let (a, b, c, d) = (f(t - 2.0 * h), f(t - h), f(t + h), f(t + 2.0 * h));
    std::array::from_fn(|i| (a[i] - 8.0 * b[i] + 8.0 * c[i] - d[i]) / (12.0 * h))
}

fn reconstruction_residuals() -> Verdict {
    let d_i = 1.0;
    let regimes: [(&str, f64, f64); 5] = [
        ("A", 0.0, C * 0.5_f64.cosh()),
        ("B-", (2.0 * C).sqrt() * (0.5 * mu_of(0.5)).sin(), 0.0),
        ("B+", (2.0 * C).sqrt() * (0.5 * mu_of(0.5)).cos(), 0.0),
        ("C", (2.0 * C).sqrt() * 0.3_f64.cosh(), 0.0),
        ("separatrix", 0.0, C),
    ];
    let mut worst_fd: f64 = 0.0;
    let mut worst_abs: f64 = 0.0;
    let mut worst_limit: f64 = 0.0;
    let mut pass = true;
    let mut notes = Vec::new();
    for (name, q0, qd0) in regimes {
        let mut init = InitialData::from_reduced(C, q0, qd0, d_i, 0.0);
        init.gamma = VorticitySpec::Constant(0.2);
        let orbit = match OrbitSolution::from_initial(&init, DEFAULT_SEPARATRIX_TOL) {
            Ok(o) => o,
            Err(e) => {
                pass = false;
                notes.push(format!("{name}: {e}"));
                continue;
            }
        };
        let end = comparison_horizon(&orbit);
        let state = |t: f64| reconstruct_alpha_beta(&init, &orbit, t).unwrap().to_array();
        for i in 1..=20 {
            let t = end * i as f64 / 21.0;
            let fd = derivative(state, t, FD_STEP);
            let s = CoefficientState::from_array(t, state(t));
            let rhs = rhs_full(&s, init.gamma.gamma_at(t), d_i, 0.0);
            for k in 0..5 {
                let abs = (fd[k] - rhs[k]).abs();
                worst_abs = worst_abs.max(abs);
                // Difference quotients lose digits in proportion to the magnitude.
                worst_fd = worst_fd.max(abs / (1.0 + rhs[k].abs()));
            }
        }
        if let Some(t_inf) = orbit.t_blowup {
            let s = reconstruct_alpha_beta(&init, &orbit, 0.999 * t_inf).unwrap();
            let beta2_limit =
                (init.beta2_0 - init.alpha2_0 / d_i) * (-2.0 * init.gamma.integral(t_inf)).exp();
            worst_limit = worst_limit
                .max(s.alpha2.abs())
                .max((s.beta2 - beta2_limit).abs());
        }
    }
    pass &= worst_fd < 1e-6 && worst_limit < 1e-4;
    verdict(
        pass,
        format!(
            "max scaled finite-difference residual {worst_fd:.2e} (tol 1e-6, absolute {worst_abs:.1e}); max limit deviation at 0.999 T_inf {worst_limit:.2e} (tol 1e-4) {}",
            notes.join("; ")
        ),
    )
}

fn exp2q_property() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut pass = true;
    let mut notes = Vec::new();
    for orbit in reference_orbits(C).unwrap().iter().take(4) {
        match exp2q_residual(orbit, 20) {
            Ok(r) => worst = worst.max(r),
            Err(e) => {
                pass = false;
                notes.push(e);
            }
        }
    }
    let mu = mu_of(0.5);
    let bounded = solve_b_bounded(C, mu).unwrap();
    let period = bounded.period.unwrap();
    let k = (0.5 * mu).tan();
    let peak = bounded.exp2q(period / 4.0).unwrap();
    let peak_err = (peak - (1.0 + k) / (1.0 - k)).abs();
    let sampled_max = (0..=400)
        .map(|i| bounded.exp2q(period * i as f64 / 400.0).unwrap())
        .fold(0.0, f64::max);
    pass &= worst < 1e-6 && peak_err < 1e-10 && sampled_max <= peak * (1.0 + 1e-14);
    verdict(
        pass,
        format!(
            "max |dlnG/dt - 2q| = {worst:.2e} (tol 1e-6); B- peak error {peak_err:.2e} (tol 1e-10) {}",
            notes.join("; ")
        ),
    )
}

fn elliptic_kernel() -> Verdict {
    let mut identity: f64 = 0.0;
    for i in 0..10 {
        for j in 0..10 {
            let u = -3.0 + 6.0 * i as f64 / 9.0;
            let k = -0.95 + 1.9 * j as f64 / 9.0;
            let (sn, cn, dn) = jacobi_real(u, k).unwrap();
            identity = identity
                .max((sn * sn + cn * cn - 1.0).abs())
                .max((dn * dn + k * k * sn * sn - 1.0).abs());
        }
    }
    for j in 0..20 {
        let k = Complex::from_polar(0.3 + 0.65 * j as f64 / 19.0, 0.3 * j as f64);
        let u = Complex::new(-2.0 + 0.2 * j as f64, 0.05 * j as f64);
        let t = sncndn_parameter(u, k * k, (1.0 - k) * (1.0 + k)).unwrap();
        let (r1, r2) = t.identity_residuals(k * k);
        identity = identity.max(r1).max(r2);
    }
    let mut periodic: f64 = 0.0;
    for k in [0.1, 0.5, 0.9_f64] {
        let four_k = 4.0 * complete_k(k * k).unwrap();
        for i in 0..20 {
            let u = -3.0 + 0.3 * i as f64;
            let a = jacobi_real(u, k).unwrap().0;
            let b = jacobi_real(u + four_k, k).unwrap().0;
            periodic = periodic.max((a - b).abs());
        }
    }
    let k0 = (complete_k(0.0).unwrap() - FRAC_PI_2).abs();
    let mut tanh_err: f64 = 0.0;
    for i in 0..30 {
        let u = -3.0 + 0.2 * i as f64;
        tanh_err = tanh_err.max((jacobi_real(u, 1.0).unwrap().0 - u.tanh()).abs());
    }
    // Region A through the complex modulus k = e^{iΦ}; the imaginary part must vanish.
    let nu: f64 = 0.5;
    let phi = nu.sinh().atan();
    let qd0 = C * nu.cosh();
    let amp = qd0.sqrt() * Complex::from_polar(1.0, 0.5 * phi);
    let omega = qd0.sqrt() * Complex::from_polar(1.0, -0.5 * phi);
    let k = Complex::from_polar(1.0, phi);
    let t_inf = solve_a(C, nu, 1.0).unwrap().t_blowup.unwrap();
    let mut imag: f64 = 0.0;
    for i in 0..=200 {
        let t = 0.9 * t_inf * i as f64 / 200.0;
        let s = sncndn_parameter(omega * t, k * k, (1.0 - k) * (1.0 + k)).unwrap();
        imag = imag.max((amp * s.sn).im.abs());
    }
    let pass = identity < 1e-10 && periodic < 1e-9 && k0 < 1e-15 && tanh_err < 1e-15 && imag < 1e-9;
    verdict(
        pass,
        format!(
            "identities {identity:.1e} (1e-10), periodicity {periodic:.1e} (1e-9), |K(0) - pi/2| {k0:.1e}, |sn(u,1) - tanh u| {tanh_err:.1e}, region-A imaginary part {imag:.1e} (1e-9)"
        ),
    )
}

fn region_a_equivalence() -> Verdict {
    match region_a_deviation(C, 0.5, 25) {
        Ok(d) => verdict(
            d < 1e-8,
            format!("max |q_jacobi - q_weierstrass| = {d:.2e} over 25 times (tol 1e-8)"),
        ),
        Err(e) => verdict(false, e),
    }
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("simple-harmonic period limit", sho_period_limit),
        ("quarter-period law", quarter_period_law),
        ("Landen equivalence of period formulas", landen_equivalence),
        ("closed forms agree with the oracle", oracle_agreement),
        (
            "blow-up times and divergence near the separatrix",
            blowup_times,
        ),
        ("conservation residuals", conservation_residuals),
        (
            "coefficient reconstruction residuals",
            reconstruction_residuals,
        ),
        ("growth factor exp(2Q)", exp2q_property),
        ("elliptic kernel identities", elliptic_kernel),
        (
            "region-A Jacobi and Weierstrass forms agree",
            region_a_equivalence,
        ),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        if !v.pass {
            failures += 1;
        }
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {:>2}: {name}: {}", i + 1, v.detail);
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}

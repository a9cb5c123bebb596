use nslab_core::ops::apply_heat;
use nslab_core::solver::{
    integrate, solve_ns2d, solve_ns3d, solve_pns, DiagnosticsLevel, NsRhs, SolverConfig,
};
use nslab_core::{SpectralField, TimeSampledField, TorusGrid};

fn taylor_green(res: usize) -> SpectralField {
    let g = TorusGrid::cube(2, res).unwrap();
    let mut u = SpectralField::zeros(g, 3);
    u.add_sin(0, [1, 1, 0], 0.5).unwrap();
    u.add_sin(0, [1, -1, 0], 0.5).unwrap();
    u.add_sin(1, [1, 1, 0], -0.5).unwrap();
    u.add_sin(1, [-1, 1, 0], -0.5).unwrap();
    u
}

/// ABC flow with A = B = C = 1, unit wavenumber: curl u = u.
fn abc(res: usize) -> SpectralField {
    let g = TorusGrid::cube(3, res).unwrap();
    let mut u = SpectralField::zeros(g, 3);
    // (sin z + cos y, sin x + cos z, sin y + cos x)
    u.add_sin(0, [0, 0, 1], 1.0).unwrap();
    u.add_cos(0, [0, 1, 0], 1.0).unwrap();
    u.add_sin(1, [1, 0, 0], 1.0).unwrap();
    u.add_cos(1, [0, 0, 1], 1.0).unwrap();
    u.add_sin(2, [0, 1, 0], 1.0).unwrap();
    u.add_cos(2, [1, 0, 0], 1.0).unwrap();
    u
}

fn quiet(dt: f64, t_end: f64) -> SolverConfig {
    SolverConfig::new(dt, t_end)
        .unwrap()
        .with_strides(1_000_000, 1_000_000)
        .with_diagnostics(DiagnosticsLevel::Off)
}

#[test]
fn taylor_green_matches_exact_decay() {
    let u0 = taylor_green(64);
    let sol = solve_ns2d(&u0, None, &quiet(1e-3, 1.0)).unwrap();
    let exact = apply_heat(&u0, 1.0).unwrap();
    let err = sol.final_state().sub(&exact).unwrap().max_amplitude();
    assert!(err <= 1e-8, "error {err}");
}

#[test]
fn beltrami_decays_like_e_minus_t() {
    let u0 = abc(32);
    let sol = solve_ns3d(&u0, &quiet(1e-3, 1.0)).unwrap();
    let exact = u0.scaled((-1.0f64).exp());
    let err = sol.final_state().sub(&exact).unwrap().max_amplitude();
    assert!(err <= 1e-7, "error {err}");
}

#[test]
fn pns_with_zero_reference_is_ns() {
    let u0 = abc(16);
    let zero = TimeSampledField::zero(*u0.grid(), 3);
    let sol = solve_pns(&u0, &zero, None, &quiet(1e-2, 0.5)).unwrap();
    let exact = u0.scaled((-0.5f64).exp());
    assert!(sol.final_state().sub(&exact).unwrap().max_amplitude() <= 1e-9);
}

#[test]
fn zero_state_stays_zero() {
    let g = TorusGrid::cube(3, 8).unwrap();
    let z = SpectralField::zeros(g, 3);
    let sol = integrate(&z, &quiet(0.1, 1.0), &mut NsRhs::default()).unwrap();
    assert!(sol.final_state().is_zero());
}

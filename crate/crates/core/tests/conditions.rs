use std::f64::consts::{E, PI};

use nslab_core::conditions::*;
use nslab_core::lp::HeatQuadrature;
use nslab_core::norms::l2_norm;
use nslab_core::ops::horizontal_mean;
use nslab_core::physical::to_physical;
use nslab_core::{Complex64, Error, SpectralField, TorusGrid};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn spec(n: usize, seed: u64) -> ExampleSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ExampleSpec::random(n, 2, 1.0, example_grid(n, 16, 8).unwrap(), &mut rng).unwrap()
}

#[test]
fn example_matches_pointwise_formula() {
    let s = spec(8, 1);
    let u0 = make_example(&s).unwrap();
    let g = *u0.grid();
    let phys = to_physical(&u0, 1);
    let v = to_physical(&s.v0h, 1);
    let d = to_physical(&s.v0h.divergence().unwrap(), 1);
    let (n1, n2, n3) = (g.resolution(0), g.resolution(1), g.resolution(2));
    let mut err = 0.0f64;
    for i in 0..n1 {
        for j in 0..n2 {
            let h = i * n2 + j;
            for k in 0..n3 {
                let x3 = 2.0 * PI * k as f64 / (n3 * s.n) as f64;
                let nf = s.n as f64;
                let f = g.flat([i, j, k]);
                let want = [
                    nf * v.comps[0][h] * (nf * x3).cos(),
                    nf * v.comps[1][h] * (nf * x3).cos(),
                    -d.comps[0][h] * (nf * x3).sin(),
                ];
                for c in 0..3 {
                    err = err.max((phys.comps[c][f] - want[c]).abs());
                }
            }
        }
    }
    assert!(err < 1e-12, "pointwise error {err}");
}

#[test]
fn example_is_divergence_free_with_zero_mean_part() {
    let s = spec(16, 2);
    let u0 = make_example(&s).unwrap();
    assert!(u0.divergence_ratio().unwrap() < 1e-13);
    assert!(u0.is_mean_free());
    assert!(l2_norm(&horizontal_mean(&u0).unwrap()) < 1e-14);
    assert!((s.amplitude() - 1.0).abs() < 1e-12);
}

#[test]
fn spec_validation() {
    let s = spec(8, 3);
    let g = example_grid(4, 16, 8).unwrap();
    assert!(matches!(s.with_n(4, g), Err(Error::Domain(_))));
    // Vertical lattice too short for 2N.
    let short = TorusGrid::cube(2, 16).unwrap().extend_vertical(8, 4).unwrap();
    assert!(matches!(s.with_n(8, short), Err(Error::Capacity(_))));
    let mut bad = s.v0h.clone();
    bad.add_cos(0, [1, 0, 0], 1.0).unwrap();
    assert!(matches!(
        ExampleSpec::new(8, 2, bad, s.grid),
        Err(Error::Contract(_))
    ));
    let mut wide = SpectralField::zeros(*s.v0h.grid(), 2);
    wide.add_cos(0, [0, 3, 0], 1.0).unwrap();
    assert!(matches!(ExampleSpec::new(8, 2, wide, s.grid), Err(Error::Contract(_))));
}

#[test]
fn decay_quadrature_integrates_exponentials() {
    let q = DecayQuadrature::default();
    for rate in [0.5, 3.0, 1e3] {
        let vals: Vec<f64> = q.nodes(rate).iter().map(|t| (-rate * t).exp()).collect();
        let total = q.integrate(&vals, rate) + q.tail(&vals, rate);
        assert!((total * rate - 1.0).abs() < 1e-5, "rate {rate}: {}", total * rate);
    }
    assert!(DecayQuadrature { horizon: 30.0, intervals: 7 }.validate().is_err());
}

#[test]
fn slope_fit_recovers_power_law() {
    let x = [16.0, 32.0, 64.0, 128.0];
    let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-0.7)).collect();
    assert!((loglog_slope(&x, &y) + 0.7).abs() < 1e-12);
}

#[test]
fn smallness_is_computed_in_log_space() {
    let (a, b, c0) = (0.3, 1e-3, 10.0);
    let direct = (b * (c0 * a * a * (1.0 + a * (E + a).ln()).powi(2)).exp()).ln();
    assert!((log_smallness(a, b, c0) - direct).abs() < 1e-12);
    // Finite where the direct product overflows.
    assert!(log_smallness(40.0, 1e-3, 10.0).is_finite());
}

#[test]
fn h3_rejects_small_p() {
    let s = spec(8, 4);
    let r = check_h3(&s, 6.0, &H3Settings::default());
    assert!(matches!(r, Err(Error::Domain(_))));
}

#[test]
fn structural_identities_hold() {
    let s = spec(16, 5);
    let q = DecayQuadrature { horizon: 30.0, intervals: 20 };
    let h1 = check_h1(&s, &q).unwrap();
    assert!(h1.third_component_max <= 1e-10);
    let settings = H3Settings {
        time: q,
        heat_points: 40,
        substeps: 2,
        parts: false,
    };
    let h3 = check_h3(&s, 8.0, &settings).unwrap();
    assert!(h3.u2d_third_max <= 1e-10);
    assert!(h3.value > 0.0 && h3.value.is_finite());
}

#[test]
fn lower_bound_holds_for_one_instance() {
    let s = spec(8, 6);
    let lb = lower_bound_check(&s, &HeatQuadrature::for_grid(&s.grid)).unwrap();
    let want = 1.0 / (4.0 * PI * E.sqrt());
    assert!((lb.rhs - want).abs() < 1e-14);
    assert!(lb.margin > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_data_is_admissible(seed in any::<u64>(), n0 in 1usize..4, amp in 0.1f64..10.0) {
        let g = example_grid(16, 32, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = ExampleSpec::random(16, n0, amp, g, &mut rng).unwrap();
        prop_assert!((s.amplitude() - amp).abs() < 1e-12 * amp);
        let u0 = make_example(&s).unwrap();
        prop_assert!(u0.hermitian_defect() < 1e-14 * amp * 16.0);
        prop_assert!(u0.divergence_ratio().unwrap() < 1e-12);
        // The third component carries only |k3| = N.
        let n3 = g.resolution(2);
        for (f, z) in u0.component(2).iter().enumerate() {
            let i3 = f % n3;
            if g.wavenumber(2, i3).abs() != 16.0 {
                prop_assert_eq!(*z, Complex64::new(0.0, 0.0));
            }
        }
    }
}

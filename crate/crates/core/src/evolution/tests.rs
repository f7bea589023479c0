use super::*;
use crate::groundstate::{solve_ground_state, EllipticParams};
use crate::nonlinearity::{cubic_spec, quadratic_spec, single_cubic_spec, Monomial, Potential};
use crate::spectral::GridSpec;

/// l = 1 spec whose potential collapses to zero (free evolution).
fn free_spec() -> SystemSpec {
    let pot = Potential::new(
        1,
        3,
        vec![Monomial {
            coeff: Complex::default() + Complex::new(0.0, 0.0),
            exps: vec![(2, 2)],
        }],
    )
    .unwrap();
    SystemSpec::new(1, 3, vec![1.0], vec![1.0], vec![0.0], pot).unwrap()
}

fn gaussian_1d(grid: GridSpec, l: usize) -> FieldState {
    FieldState::from_fn(grid, l, |_, x| Complex::new((-x[0] * x[0]).exp(), 0.0))
}

#[test]
fn zero_potential_means_zero_nonlinearity() {
    let spec = free_spec();
    assert!(spec.f.components[0].is_zero());
}

#[test]
fn linear_step_is_unitary() {
    let grid = GridSpec::new(1, 256, 15.0).unwrap();
    let spec = free_spec();
    let mut state = gaussian_1d(grid, 1);
    let q0 = spectral::norm_sq(&state.components[0], &grid).unwrap();
    let mut stepper = Stepper::new(spec, grid).unwrap();
    for _ in 0..50 {
        stepper.step(&mut state, 1e-2);
    }
    let q1 = spectral::norm_sq(&state.components[0], &grid).unwrap();
    assert!((q1 / q0 - 1.0).abs() < 1e-13);
}

#[test]
fn linear_step_is_reversible() {
    let grid = GridSpec::new(1, 256, 15.0).unwrap();
    let spec = free_spec();
    let init = gaussian_1d(grid, 1);
    let mut state = init.clone();
    let mut stepper = Stepper::new(spec, grid).unwrap();
    stepper.step(&mut state, 1e-2);
    stepper.step(&mut state, -1e-2);
    let mut sup = 0.0f64;
    for (a, b) in state.components[0].iter().zip(&init.components[0]) {
        sup = sup.max((a - b).norm());
    }
    assert!(sup < 1e-13);
}

#[test]
fn free_gaussian_spreads() {
    // Free evolution widens a Gaussian; kinetic term stays constant.
    let grid = GridSpec::new(1, 256, 15.0).unwrap();
    let spec = free_spec();
    let state = gaussian_1d(grid, 1);
    let k0 = kinetic(&state, &spec).unwrap();
    let out = evolve(
        &state,
        &spec,
        &EvolveConfig {
            dt: 1e-2,
            t_end: 0.5,
            snapshot_stride: 10,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(out.status, EvolveStatus::ReachedTEnd);
    let k1 = kinetic(&out.final_state, &spec).unwrap();
    assert!((k1 / k0 - 1.0).abs() < 1e-12);
    assert!(out.final_state.sup_norm() < state.sup_norm());
}

fn sech_ground_state(grid: GridSpec) -> GroundStateResult {
    let params = EllipticParams::new(single_cubic_spec(1).unwrap(), 1.0).unwrap();
    solve_ground_state(&params, grid, None, 1e-12, 500).unwrap()
}

#[test]
fn single_cubic_standing_wave_modulus_stationary() {
    let grid = GridSpec::new(1, 512, 20.0).unwrap();
    let spec = single_cubic_spec(1).unwrap();
    let gs = sech_ground_state(grid);
    assert!(gs.converged);
    let out = evolve(
        &gs.psi,
        &spec,
        &EvolveConfig {
            dt: 1e-3,
            t_end: 1.0,
            snapshot_stride: 200,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(out.status, EvolveStatus::ReachedTEnd);
    // |u(t)| must match |psi|; the phase advances as exp(i omega sigma t / 2)
    // = exp(i t).
    let mut sup_mod = 0.0f64;
    let mut sup_full = 0.0f64;
    let phase = Complex::new(0.0, 1.0 * out.final_state.t).exp();
    for (a, b) in out.final_state.components[0].iter().zip(&gs.psi.components[0]) {
        sup_mod = sup_mod.max((a.norm() - b.norm()).abs());
        sup_full = sup_full.max((a - b * phase).norm());
    }
    assert!(sup_mod < 1e-6, "modulus drift {sup_mod:e}");
    assert!(sup_full < 1e-5, "trajectory error {sup_full:e}");
}

#[test]
fn quadratic_standing_wave_modulus_stationary() {
    let grid = GridSpec::new(1, 512, 20.0).unwrap();
    let mut spec = quadratic_spec(1.0, 1).unwrap();
    spec.beta = vec![0.5, 0.0];
    let params = EllipticParams::new(spec.clone(), 0.5).unwrap();
    let gs = solve_ground_state(&params, grid, None, 1e-12, 500).unwrap();
    assert!(gs.converged);
    let out = evolve(
        &gs.psi,
        &spec,
        &EvolveConfig {
            dt: 1e-3,
            t_end: 0.5,
            snapshot_stride: 100,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(out.status, EvolveStatus::ReachedTEnd);
    // Phases exp(i sigma_k omega t / 2) with sigma = (2, 4), omega = 1/2.
    for (k, &sig) in [2.0f64, 4.0].iter().enumerate() {
        let phase = Complex::new(0.0, sig * 0.5 * out.final_state.t / 2.0).exp();
        let mut sup = 0.0f64;
        for (a, b) in out.final_state.components[k].iter().zip(&gs.psi.components[k]) {
            sup = sup.max((a - b * phase).norm());
        }
        assert!(sup < 1e-5, "component {k} error {sup:e}");
    }
}

#[test]
fn mass_and_energy_conserved_short_run() {
    let grid = GridSpec::new(1, 256, 15.0).unwrap();
    let spec = quadratic_spec(0.5, 1).unwrap();
    let u0 = FieldState::from_fn(grid, 2, |k, x| {
        let g = 0.5 * (-x[0] * x[0]).exp();
        Complex::new(g, if k == 0 { 0.1 * g } else { -0.2 * g })
    });
    let out = evolve(
        &u0,
        &spec,
        &EvolveConfig {
            dt: 1e-3,
            t_end: 1.0,
            snapshot_stride: 100,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(out.status, EvolveStatus::ReachedTEnd);
    let first = &out.series[0];
    for rec in &out.series {
        assert!((rec.q / first.q - 1.0).abs() < 1e-8, "Q drift at t={}", rec.t);
        assert!((rec.e / first.e - 1.0).abs() < 1e-6, "E drift at t={}", rec.t);
    }
}

#[test]
fn zero_data_stays_zero() {
    let grid = GridSpec::new(1, 64, 10.0).unwrap();
    let spec = single_cubic_spec(1).unwrap();
    let u0 = FieldState::zeros(grid, 1);
    let out = evolve(
        &u0,
        &spec,
        &EvolveConfig {
            dt: 1e-2,
            t_end: 0.2,
            snapshot_stride: 5,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(out.status, EvolveStatus::ReachedTEnd);
    assert_eq!(out.final_state.sup_norm(), 0.0);
}

#[test]
fn second_order_convergence() {
    let grid = GridSpec::new(1, 256, 15.0).unwrap();
    let spec = single_cubic_spec(1).unwrap();
    let gs = sech_ground_state(GridSpec::new(1, 256, 15.0).unwrap());
    let t_end = 0.25;
    let run = |dt: f64| -> FieldState {
        evolve(
            &gs.psi,
            &spec,
            &EvolveConfig {
                dt,
                t_end,
                snapshot_stride: 10_000,
                ..Default::default()
            },
        )
        .unwrap()
        .final_state
    };
    let reference = run(1e-3 / 16.0);
    let err = |state: &FieldState| -> f64 {
        let mut sup = 0.0f64;
        for (a, b) in state.components[0].iter().zip(&reference.components[0]) {
            sup = sup.max((a - b).norm());
        }
        sup
    };
    let e4 = err(&run(4e-3));
    let e2 = err(&run(2e-3));
    let e1 = err(&run(1e-3));
    let slope_a = (e4 / e2).log2();
    let slope_b = (e2 / e1).log2();
    assert!((slope_a - 2.0).abs() < 0.2, "slope {slope_a}");
    assert!((slope_b - 2.0).abs() < 0.2, "slope {slope_b}");
    let _ = grid;
}

#[test]
fn invalid_state_detected() {
    // Gigantic data overflows quickly through the cubic nonlinearity.
    let grid = GridSpec::new(1, 64, 10.0).unwrap();
    let spec = single_cubic_spec(1).unwrap();
    let u0 = FieldState::from_fn(grid, 1, |_, x| {
        Complex::new(1e150 * (-x[0] * x[0]).exp(), 0.0)
    });
    let out = evolve(
        &u0,
        &spec,
        &EvolveConfig {
            dt: 1e-2,
            t_end: 1.0,
            snapshot_stride: 1,
            adaptive: false,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(matches!(out.status, EvolveStatus::Invalid(_)));
}

mod pseudo_conformal {
    use super::*;

    fn cubic_critical_gs() -> (SystemSpec, GroundStateResult) {
        // n = 2, p = 3 is exactly mass-critical; beta = 0 for the transform.
        let spec = cubic_spec(3.0, 1.0, 2).unwrap().with_zero_beta();
        // b_2 = 9 makes the second profile ~1/3 wide, so resolve it finely.
        let grid = GridSpec::new(2, 256, 10.0).unwrap();
        let params = EllipticParams::new(spec.clone(), 1.0).unwrap();
        let gs = solve_ground_state(&params, grid, None, 1e-12, 800).unwrap();
        assert!(gs.converged, "{:?}", gs.failure);
        (spec, gs)
    }

    #[test]
    fn data_mass_matches_ground_state_exactly() {
        let (spec, gs) = cubic_critical_gs();
        for big_t in [0.5, 1.0, 2.0] {
            let data = pseudo_conformal_data(&gs, big_t, &spec).unwrap();
            let q_data = crate::diagnostics::mass(&data, &spec).unwrap();
            let q_psi = crate::diagnostics::mass(&gs.psi, &spec).unwrap();
            assert!((q_data - q_psi).abs() < 1e-10 * q_psi, "T = {big_t}");
        }
    }

    #[test]
    fn exact_solution_consistent_at_t0() {
        let (spec, gs) = cubic_critical_gs();
        let data = pseudo_conformal_data(&gs, 1.0, &spec).unwrap();
        let exact = exact_pseudo_conformal(&gs, 1.0, 0.0, &spec).unwrap();
        let mut sup = 0.0f64;
        for k in 0..spec.l {
            for (a, b) in exact.components[k].iter().zip(&data.components[k]) {
                sup = sup.max((a - b).norm());
            }
        }
        assert!(sup < 1e-11, "sup {sup:e}");
    }

    #[test]
    fn mass_constant_along_exact_solution() {
        let (spec, gs) = cubic_critical_gs();
        let q_psi = crate::diagnostics::mass(&gs.psi, &spec).unwrap();
        // The profile contracts by (T - t); past t ~ 0.5 the narrow second
        // component falls under the grid resolution, so stop there and allow
        // the measured interpolation error (~2e-5 at t = 0.5).
        for t in [0.0, 0.25, 0.5] {
            let v = exact_pseudo_conformal(&gs, 1.0, t, &spec).unwrap();
            let q = crate::diagnostics::mass(&v, &spec).unwrap();
            assert!((q - q_psi).abs() < 1e-4 * q_psi, "t = {t}: {q} vs {q_psi}");
        }
    }

    #[test]
    fn kinetic_blowup_profile() {
        // K(v(t)) = K(psi) (T-t)^{-2} + (1/4) sum (alpha_k^2/gamma_k)
        //           int |x|^2 psi_k^2 (the cross term vanishes: psi real).
        let (spec, gs) = cubic_critical_gs();
        let k_psi = kinetic(&gs.psi, &spec).unwrap();
        let (v_psi, _) = crate::diagnostics::variance(&gs.psi, &spec).unwrap();
        // Keep t where the contracted profile is still grid-resolved.
        for t in [0.0, 0.25, 0.5] {
            let v = exact_pseudo_conformal(&gs, 1.0, t, &spec).unwrap();
            let k = kinetic(&v, &spec).unwrap();
            let predicted = k_psi / (1.0 - t).powi(2) + v_psi / 4.0;
            assert!(
                (k - predicted).abs() < 1e-3 * predicted,
                "t = {t}: K = {k}, predicted {predicted}"
            );
        }
    }

    #[test]
    fn initial_variance_derivative_is_inward() {
        let (spec, gs) = cubic_critical_gs();
        let data = pseudo_conformal_data(&gs, 1.0, &spec).unwrap();
        let (_, vdot) = crate::diagnostics::variance(&data, &spec).unwrap();
        assert!(vdot < 0.0, "vdot = {vdot}");
    }

    #[test]
    fn preconditions_enforced() {
        // n = 1, p = 3 is not mass-critical.
        let spec1 = cubic_spec(3.0, 1.0, 1).unwrap().with_zero_beta();
        let grid = GridSpec::new(1, 256, 15.0).unwrap();
        let params = EllipticParams::new(spec1.clone(), 1.0).unwrap();
        let gs1 = solve_ground_state(&params, grid, None, 1e-10, 500).unwrap();
        assert!(matches!(
            pseudo_conformal_data(&gs1, 1.0, &spec1),
            Err(CoreError::NotL2Critical)
        ));

        // sigma = 4 breaks mass resonance.
        let (spec, gs) = cubic_critical_gs();
        let mut off = spec.clone();
        off.alpha = vec![1.0, 4.0];
        assert!(matches!(
            pseudo_conformal_data(&gs, 1.0, &off),
            Err(CoreError::NotMassResonant)
        ));

        // t outside [0, T).
        assert!(matches!(
            exact_pseudo_conformal(&gs, 1.0, 1.0, &spec),
            Err(CoreError::TimeOutOfRange { .. })
        ));
    }
}

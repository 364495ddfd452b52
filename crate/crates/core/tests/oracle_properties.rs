use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use qentropic::oracle::{
    chsh_conditional_oracle, lg_conditional_oracle, oracle_conditional, oracle_tolerance, validate_scenario,
    ChshTimeline, Decoherence, DensityMatrix, OracleGrid, QubitChannel, QutritDephasing, SpinSystem,
};
use qentropic::{pair_conditional, PairRole, Scenario, ScenarioSpec};

fn min_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    // Hermitian 2x2 / 3x3: embed as a real symmetric matrix of twice the size
    let d = m.nrows();
    let real = DMatrix::from_fn(2 * d, 2 * d, |i, j| {
        let z = m[(i % d, j % d)];
        match (i < d, j < d) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    real.symmetric_eigenvalues().min()
}

fn assert_valid(rho: &DensityMatrix) {
    let m = rho.matrix();
    let d = m.nrows();
    assert!((m.trace().re - 1.0).abs() <= 1e-12);
    for i in 0..d {
        for j in 0..d {
            assert!((m[(i, j)] - m[(j, i)].conj()).norm() <= 1e-12);
        }
    }
    assert!(min_eigenvalue(m) >= -1e-10);
}

fn bloch_grid() -> Vec<[f64; 3]> {
    let mut out = Vec::new();
    for i in 0..=6 {
        for j in 0..12 {
            let (polar, azimuth) = (PI * i as f64 / 6.0, 2.0 * PI * j as f64 / 12.0);
            for r in [0.0, 0.5, 1.0] {
                out.push([r * polar.sin() * azimuth.cos(), r * polar.sin() * azimuth.sin(), r * polar.cos()]);
            }
        }
    }
    out
}

#[test]
fn qubit_channels_preserve_states_on_a_grid() {
    for r in bloch_grid() {
        let rho = DensityMatrix::from_bloch(r).unwrap();
        for k in 0..=10 {
            let x = k as f64 / 10.0;
            for ch in [QubitChannel::phase_damping(x).unwrap(), QubitChannel::depolarizing(0.75 * x).unwrap()] {
                assert_valid(&ch.apply(&rho).unwrap());
            }
        }
    }
}

#[test]
fn channels_are_unital() {
    let mixed = DensityMatrix::maximally_mixed(2).unwrap();
    for k in 0..=10 {
        let x = k as f64 / 10.0;
        for ch in [QubitChannel::phase_damping(x).unwrap(), QubitChannel::depolarizing(0.75 * x).unwrap()] {
            // Kraus sums like (√(1-μ))² + 3(√(μ/3))² round at the last bit
            assert!((ch.apply(&mixed).unwrap().matrix() - mixed.matrix()).norm() <= 1e-15);
        }
    }
    let mixed3 = DensityMatrix::maximally_mixed(3).unwrap();
    let out = QutritDephasing::default().evolve(&mixed3, 2.5).unwrap();
    assert!((out.matrix() - mixed3.matrix()).norm() <= 1e-14);
}

#[test]
fn qutrit_evolution_stays_physical() {
    let psi = [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.48), Complex64::new(0.64, 0.0)];
    let rho = DensityMatrix::pure(&psi).unwrap();
    for k in 0..=10 {
        assert_valid(&QutritDephasing::default().evolve(&rho, 0.3 * k as f64).unwrap());
    }
}

#[test]
fn oracle_agrees_with_closed_forms_on_default_grid() {
    let grid = OracleGrid::default();
    assert_eq!((grid.thetas.len(), grid.kappas.len()), (20, 10));
    for s in Scenario::ALL {
        for d in validate_scenario(s, &grid).unwrap() {
            assert_eq!(d.tolerance, oracle_tolerance(s));
            assert!(d.passed(), "{s} {:?}: {:e} at θ={} κ={}", d.role, d.max_deviation, d.worst_theta, d.worst_kappa);
        }
    }
}

#[test]
fn oracle_point_examples() {
    let m = lg_conditional_oracle(SpinSystem::SpinHalf, Decoherence::Dephasing, PI / 6.0, 0.0, 1).unwrap();
    assert!((m.get(0, 0) - 0.933012701892).abs() <= 1e-10);
    let m = lg_conditional_oracle(SpinSystem::SpinOne, Decoherence::Dephasing, PI / 2.0, 0.0, 1).unwrap();
    assert!((m.get(0, 0) - 0.25).abs() <= 1e-8);
    let m = chsh_conditional_oracle(PI / 4.0, 0.0, PairRole::ChshAB, ChshTimeline::even(PI / 4.0, 0.0)).unwrap();
    assert!((m.get(0, 0) - (1.0 - (PI / 4.0).cos()) / 2.0).abs() <= 1e-10);
}

#[test]
fn inconsistent_timeline_is_rejected() {
    let bad = ChshTimeline { gamma_dt1: 0.1, gamma_dt2: 0.1 };
    assert!(chsh_conditional_oracle(1.0, 0.5, PairRole::ChshAB, bad).is_err());
}

#[test]
fn spin_one_depolarizing_is_unsupported() {
    let err = lg_conditional_oracle(SpinSystem::SpinOne, Decoherence::Depolarizing, 1.0, 0.1, 1).unwrap_err();
    assert!(err.is_usage());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chsh_depends_only_on_total_decay(theta in 0.01f64..PI, kappa in 0.0f64..3.0, f in 0.0f64..=1.0) {
        for role in [PairRole::ChshAB, PairRole::ChshSmallAngle] {
            let a = chsh_conditional_oracle(theta, kappa, role, ChshTimeline::split(theta, kappa, f)).unwrap();
            let b = chsh_conditional_oracle(theta, kappa, role, ChshTimeline::even(theta, kappa)).unwrap();
            prop_assert!(a.max_abs_diff(&b) <= 1e-10);
        }
    }

    #[test]
    fn oracle_matches_closed_form_off_grid(theta in 0.01f64..PI, kappa in 0.0f64..2.0, idx in 0usize..4) {
        let s = Scenario::ALL[idx];
        let spec = ScenarioSpec::new(s, theta, kappa).unwrap();
        for role in s.roles() {
            let dev = oracle_conditional(&spec, role).unwrap().max_abs_diff(&pair_conditional(&spec, role).unwrap());
            prop_assert!(dev <= oracle_tolerance(s), "{} {:?} {:e}", s, role, dev);
        }
    }

    #[test]
    fn depolarizing_shrinks_bloch_vector(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0, mu in 0.0f64..=0.75) {
        let norm = (x * x + y * y + z * z).sqrt().max(1.0);
        let r = [x / norm, y / norm, z / norm];
        let out = QubitChannel::depolarizing(mu).unwrap().apply(&DensityMatrix::from_bloch(r).unwrap()).unwrap();
        let b = out.bloch().unwrap();
        for i in 0..3 {
            prop_assert!((b[i] - (1.0 - 4.0 * mu / 3.0) * r[i]).abs() <= 1e-12);
        }
    }
}

use hyperavn::harness::exact_term_values;
use hyperavn::linalg::{expectation, DensityMatrix};
use hyperavn::observables::{cabello_operator, terms};
use hyperavn::states::{apply_noise, hyper_state, xi_minus_minus, NoiseModel, PiFlavor};

/// Single-DOF terms see one visibility, composite terms see the product.
fn werner_term_oracle(id: u8, v_pi: f64, v_k: f64) -> f64 {
    match id {
        1 | 3 => -v_pi,
        2 | 4 => -v_k,
        5..=8 => v_pi * v_k,
        9 => -v_pi * v_k,
        _ => unreachable!(),
    }
}

#[test]
fn werner_grid_matches_closed_form() {
    let o = cabello_operator();
    for i in 0..=10 {
        for j in 0..=10 {
            let (v_pi, v_k) = (f64::from(i) / 10.0, f64::from(j) / 10.0);
            let rho =
                apply_noise(&xi_minus_minus(), &NoiseModel::WernerPerDof { v_pi, v_k }).unwrap();
            let vals = exact_term_values(&rho).unwrap();
            for (t, v) in terms().iter().zip(&vals) {
                assert!(
                    (v - werner_term_oracle(t.id, v_pi, v_k)).abs() < 1e-12,
                    "term {}",
                    t.id
                );
            }
            let total = expectation(&o.matrix, &rho).unwrap();
            let closed = 2.0 * v_pi + 2.0 * v_k + 5.0 * v_pi * v_k;
            assert!((total - closed).abs() < 1e-12);
        }
    }
}

#[test]
fn noisy_states_are_valid_density_matrices() {
    for noise in [
        NoiseModel::UniformVisibility { v: 0.0 },
        NoiseModel::UniformVisibility { v: 0.6 },
        NoiseModel::WernerPerDof {
            v_pi: 0.3,
            v_k: 0.95,
        },
    ] {
        let rho = apply_noise(&xi_minus_minus(), &noise).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        assert!(rho.eigenvalues().iter().all(|&l| l > -1e-12));
        assert!(rho.purity() <= 1.0 + 1e-12);
    }
    let mixed = apply_noise(&xi_minus_minus(), &NoiseModel::UniformVisibility { v: 0.0 }).unwrap();
    assert!((mixed.purity() - 1.0 / 16.0).abs() < 1e-12);
}

#[test]
fn zero_noise_is_the_pure_state() {
    let st = xi_minus_minus();
    let rho = apply_noise(&st, &NoiseModel::none()).unwrap();
    let pure = DensityMatrix::from_pure(st.ket()).unwrap();
    assert!(rho.matrix().max_abs_diff(pure.matrix()).unwrap() < 1e-15);
}

#[test]
fn out_of_range_visibility_is_rejected() {
    for noise in [
        NoiseModel::UniformVisibility { v: 1.5 },
        NoiseModel::UniformVisibility { v: -0.1 },
        NoiseModel::WernerPerDof {
            v_pi: 0.5,
            v_k: f64::NAN,
        },
    ] {
        assert!(apply_noise(&xi_minus_minus(), &noise).is_err(), "{noise:?}");
    }
}

#[test]
fn other_hyperentangled_states_stay_below_nine() {
    // Only the Psi-minus, psi-minus combination is the +9 eigenstate.
    let o = cabello_operator();
    for flavor in [PiFlavor::Phi, PiFlavor::Psi] {
        for (theta, phi) in [
            (0.0, 0.0),
            (0.0, std::f64::consts::PI),
            (std::f64::consts::PI, 0.0),
        ] {
            let st = hyper_state(flavor, theta, phi);
            let v = expectation(&o.matrix, st.ket()).unwrap();
            assert!(v < 9.0 - 1e-9, "{} gives {v}", st.label());
        }
    }
}

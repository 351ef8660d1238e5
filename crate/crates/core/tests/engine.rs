use gkp_core::code::{kappa, kappa_asymptote, ETA_SENSOR, ETA_SQUARE};
use gkp_core::fock::{make_ladder, make_number};
use gkp_core::lindblad::{adjoint_rhs, evolve, lindblad_rhs, DensityMatrix, LindbladModel, NoiseKind, ObservableSpec, SolverOptions};
use gkp_core::random::{random_density_matrix, random_hermitian, rng_for, GinibreSpec};
use gkp_core::{GkpCode, GkpParameters, StateVector, TruncatedOperator, C64};
use proptest::prelude::*;

fn noisy_model(dim: usize, rates: [f64; 4]) -> LindbladModel {
    let kinds = [NoiseKind::PhotonLoss, NoiseKind::PhotonGain, NoiseKind::Position, NoiseKind::Momentum];
    kinds
        .iter()
        .zip(rates)
        .try_fold(LindbladModel::new(dim).unwrap(), |m, (&k, r)| m.with_noise(k, r))
        .unwrap()
}

fn fock(dim: usize, n: usize) -> StateVector {
    let mut v = StateVector::zeros(dim);
    v[n] = C64::new(1.0, 0.0);
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn generator_is_trace_free_and_hermitian(
        dim in 2usize..24,
        seed in any::<u64>(),
        rates in prop::array::uniform4(0.0f64..2.0),
    ) {
        let model = noisy_model(dim, rates);
        let rho = random_hermitian(dim, &mut rng_for(seed, 0)).unwrap();
        let out = lindblad_rhs(&model, &rho).unwrap();
        let scale = 1.0 + out.max_abs();
        prop_assert!(out.trace().norm() <= 1e-11 * scale * dim as f64);
        prop_assert!(out.hermiticity_defect() <= 1e-12 * scale);
    }

    #[test]
    fn adjoint_is_dual(
        dim in 2usize..24,
        seed in any::<u64>(),
        rates in prop::array::uniform4(0.0f64..2.0),
    ) {
        let model = noisy_model(dim, rates);
        let mut rng = rng_for(seed, 1);
        let x = random_hermitian(dim, &mut rng).unwrap();
        let rho = random_hermitian(dim, &mut rng).unwrap();
        let lhs = x.trace_product(&lindblad_rhs(&model, &rho).unwrap()).unwrap();
        let rhs = adjoint_rhs(&model, &x).unwrap().trace_product(&rho).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
    }

    #[test]
    fn kappa_approaches_small_epsilon_asymptote(epsilon in 1e-5f64..1e-3) {
        let k = kappa(epsilon, ETA_SQUARE);
        prop_assert!(k.certified);
        let ratio = k.value / kappa_asymptote(epsilon, ETA_SQUARE);
        prop_assert!((ratio - 1.0).abs() < 0.05, "ratio {}", ratio);
    }

    #[test]
    fn random_states_are_valid_density_matrices(dim in 4usize..40, seed in any::<u64>()) {
        let rho = random_density_matrix(&GinibreSpec::truncation_safe(dim), &mut rng_for(seed, 2)).unwrap();
        let m = rho.matrix();
        prop_assert!((m.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(m.hermiticity_defect() < 1e-12);
    }
}

#[test]
fn photon_loss_decays_mean_number_exponentially() {
    let (dim, n, gamma) = (12, 4, 0.7);
    let model = LindbladModel::new(dim).unwrap().with_noise(NoiseKind::PhotonLoss, gamma).unwrap();
    let rho0 = DensityMatrix::pure(&fock(dim, n)).unwrap();
    let spec = ObservableSpec::uniform(2.0, 8).with_photon_number();
    let traj = evolve(&model, &rho0, &SolverOptions::default(), &spec).unwrap();
    for r in &traj.records {
        let expected = n as f64 * (-gamma * r.t).exp();
        assert!((r.photon_number.unwrap() - expected).abs() < 1e-7, "t = {}", r.t);
        assert!((r.trace - 1.0).abs() < 1e-9);
    }
}

#[test]
fn number_dephasing_damps_coherences_quadratically() {
    let (dim, gamma, t) = (6, 0.3, 1.5);
    let model = LindbladModel::new(dim)
        .unwrap()
        .with_channel("n", make_number(dim).unwrap(), gamma)
        .unwrap();
    let plus = (&fock(dim, 0) + &fock(dim, 3)).mapv(|z| z / 2f64.sqrt());
    let rho0 = DensityMatrix::pure(&plus).unwrap();
    let traj = evolve(&model, &rho0, &SolverOptions::default(), &ObservableSpec::uniform(t, 1)).unwrap();
    let coherence = traj.final_state.get(0, 3).re;
    let expected = 0.5 * (-0.5 * gamma * 9.0 * t).exp();
    assert!((coherence - expected).abs() < 1e-8, "{coherence} vs {expected}");
}

#[test]
fn ladder_is_lowering() {
    let a = make_ladder(8).unwrap();
    let v = a.apply(&fock(8, 5)).unwrap();
    assert!((v[4].re - 5f64.sqrt()).abs() < 1e-14);
    let commutator: TruncatedOperator = a.commutator(&a.adjoint());
    for k in 0..7 {
        assert!((commutator.get(k, k).re - 1.0).abs() < 1e-12);
    }
}

#[test]
fn codewords_lie_near_the_dissipator_kernel() {
    let square = GkpCode::build(GkpParameters::square(0.2).unwrap()).unwrap();
    assert_eq!(square.codewords.len(), 2);
    let sensor = GkpCode::build(GkpParameters::new(0.2, ETA_SENSOR).unwrap()).unwrap();
    assert_eq!(sensor.codewords.len(), 1);
    for c in &square.codewords {
        let w = square.lyapunov.expectation(c).unwrap();
        assert!(w.norm() < 1e-8, "{w}");
    }
}

use std::f64::consts::PI;

use faraday_core::amplitude::AmplitudeVector;
use faraday_core::analytic::{analytic_entropy, break_time, mehler_params};
use faraday_core::parallel::Execution;
use faraday_core::schmidt::{entropy_of, schmidt_eigenvalues, time_sweep};
use faraday_core::state_builder::{
    assemble_joint, build_atomic_gaussian, build_field_gaussian, preset_dual_coherent,
    preset_spin_coherent, GaussianSpec, JointState,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn spec_strategy() -> impl Strategy<Value = GaussianSpec> {
    (1.0..6.0_f64, 2.0..12.0_f64, -2i32..=2, -8.0..8.0_f64).prop_map(|(sa, sf, m0, n0)| {
        let mut s = GaussianSpec::centered(sa, sf);
        s.m0 = f64::from(m0);
        s.n0 = n0;
        s.n_atoms += 4 * m0.unsigned_abs() + 4;
        s
    })
}

fn amplitudes(s: &GaussianSpec) -> (AmplitudeVector, AmplitudeVector) {
    (
        build_atomic_gaussian(s).unwrap(),
        build_field_gaussian(s, 4.0).unwrap(),
    )
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn eigenvalues_sum_to_one(s in spec_strategy(), tau in 0.0..2.0_f64) {
        let (a, f) = amplitudes(&s);
        let l = schmidt_eigenvalues(&assemble_joint(&a, &f, tau)).unwrap();
        prop_assert!((l.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        prop_assert!(l.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(l.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn local_phases_leave_spectrum_unchanged(
        s in spec_strategy(),
        tau in 0.0..0.5_f64,
        alpha in -3.0..3.0_f64,
        beta in -3.0..3.0_f64,
    ) {
        let (a, f) = amplitudes(&s);
        let plain = assemble_joint(&a, &f, tau);
        let phased = JointState::from_fn(plain.m_grid, plain.n_grid, tau, |m, n| {
            let local = alpha * (m * m) as f64 + beta * (n as f64).sin();
            plain.get(m, n) * Complex64::from_polar(1.0, local)
        });
        let l0 = schmidt_eigenvalues(&plain).unwrap();
        let l1 = schmidt_eigenvalues(&phased).unwrap();
        prop_assert!(max_diff(&l0, &l1) < 1e-10);
    }

    #[test]
    fn swapping_subsystems_is_transposition(s in spec_strategy(), tau in 0.0..0.5_f64) {
        let (a, f) = amplitudes(&s);
        let l0 = schmidt_eigenvalues(&assemble_joint(&a, &f, tau)).unwrap();
        let l1 = schmidt_eigenvalues(&assemble_joint(&f, &a, tau)).unwrap();
        prop_assert!(max_diff(&l0, &l1) < 1e-10);
    }

    #[test]
    fn spectrum_has_period_pi(s in spec_strategy(), tau in 0.0..1.0_f64) {
        let (a, f) = amplitudes(&s);
        let l0 = schmidt_eigenvalues(&assemble_joint(&a, &f, tau)).unwrap();
        let l1 = schmidt_eigenvalues(&assemble_joint(&a, &f, tau + PI)).unwrap();
        prop_assert!(max_diff(&l0, &l1) < 1e-10);
    }

    #[test]
    fn time_reversal_conjugates(s in spec_strategy(), tau in 0.0..1.0_f64) {
        let (a, f) = amplitudes(&s);
        let l0 = schmidt_eigenvalues(&assemble_joint(&a, &f, tau)).unwrap();
        let l1 = schmidt_eigenvalues(&assemble_joint(&a, &f, PI - tau)).unwrap();
        prop_assert!(max_diff(&l0, &l1) < 1e-10);
    }
}

fn ln_poisson(k: u64, mean: f64) -> f64 {
    let ln_fact: f64 = (1..=k).map(|i| (i as f64).ln()).sum();
    k as f64 * mean.ln() - mean - ln_fact
}

#[test]
fn dual_coherent_matches_skellam_oracle() {
    for (plus, minus) in [(9.0, 4.0), (30.0, 30.0), (50.0, 20.0)] {
        let f = preset_dual_coherent(plus, minus, 6.0).unwrap();
        for (n, amp) in f.iter() {
            // P(N+ - N- = n) by direct convolution of the two Poisson laws
            let skellam: f64 = (0..400u64)
                .filter_map(|k| {
                    let j = k as i64 + n;
                    (j >= 0).then(|| (ln_poisson(j as u64, plus) + ln_poisson(k, minus)).exp())
                })
                .sum();
            assert!(
                (amp * amp - skellam).abs() < 1e-12,
                "n={n}: {} vs {skellam}",
                amp * amp
            );
        }
    }
}

#[test]
fn spin_coherent_is_close_to_gaussian() {
    for n_atoms in [18u32, 72, 200] {
        let spin = preset_spin_coherent(n_atoms).unwrap();
        // |A|^2 has variance N_A/4, the Gaussian class with sigma_A^2 = N_A
        let mut s = GaussianSpec::centered(f64::from(n_atoms).sqrt(), 4.0);
        s.n_atoms = n_atoms;
        let gauss = build_atomic_gaussian(&s).unwrap();
        let overlap: f64 = spin.iter().map(|(m, a)| a * gauss.get(m)).sum();
        assert!(overlap >= 0.99, "N_A={n_atoms}: {overlap}");
        let (_, var) = spin.moments();
        assert!((var - f64::from(n_atoms) / 4.0).abs() < 1e-9);
    }
}

#[test]
fn entropy_grows_monotonically_inside_break_window() {
    let s = GaussianSpec::centered(6.0, 24.0);
    let (a, f) = (
        build_atomic_gaussian(&s).unwrap(),
        build_field_gaussian(&s, 5.0).unwrap(),
    );
    let tau_b = break_time(s.sigma_a, s.sigma_f).unwrap();
    let taus: Vec<f64> = (0..=20).map(|i| tau_b * i as f64 / 20.0).collect();
    let sweep = time_sweep(&a, &f, &taus, Execution::Parallel).unwrap();
    assert!(sweep.windows(2).all(|w| w[1].entropy > w[0].entropy));
    assert!(sweep
        .windows(2)
        .all(|w| w[1].schmidt_number > w[0].schmidt_number));
}

#[test]
fn short_time_entropy_matches_closed_form() {
    let s = GaussianSpec::centered(4.0, 16.0);
    let (a, f) = (
        build_atomic_gaussian(&s).unwrap(),
        build_field_gaussian(&s, 6.0).unwrap(),
    );
    for tau in [1e-3, 3e-3, 1e-2] {
        let numeric = entropy_of(&schmidt_eigenvalues(&assemble_joint(&a, &f, tau)).unwrap());
        let closed = analytic_entropy(&mehler_params(s.sigma_a, s.sigma_f, tau).unwrap());
        assert!(
            (numeric - closed).abs() / closed < 1e-3,
            "tau={tau}: {numeric} vs {closed}"
        );
    }
}

#[test]
fn sequential_and_parallel_sweeps_agree_bitwise() {
    let s = GaussianSpec::centered(3.0, 10.0);
    let (a, f) = amplitudes(&s);
    let taus: Vec<f64> = (0..12).map(|i| 0.01 * i as f64).collect();
    let seq = time_sweep(&a, &f, &taus, Execution::Sequential).unwrap();
    let par = time_sweep(&a, &f, &taus, Execution::Parallel).unwrap();
    for (x, y) in seq.iter().zip(&par) {
        assert_eq!(x.tau, y.tau);
        assert_eq!(x.spectrum.eigenvalues, y.spectrum.eigenvalues);
    }
}

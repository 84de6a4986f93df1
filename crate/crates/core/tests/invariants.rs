use std::f64::consts::PI;

use proptest::prelude::*;
use radhydro_core::diagnostics::{conserved_quantities, entropy_integrands};
use radhydro_core::exponents::{find_admissible_n, ExponentReport, T0Reading, EXISTENCE_THRESHOLD};
use radhydro_core::integrator::{advance, StepControl};
use radhydro_core::radiation::{
    certify_kernel_nonpositive, check_pointwise_bound, init_compatible_q, solve_radiation_lagrangian, KernelSpec,
};
use radhydro_core::{Grid, Params, State};

/// Three-mode perturbation `Σ c_k sin(2πkx + φ_k)`.
fn modes() -> impl Strategy<Value = [(f64, f64); 3]> {
    [
        (-1.0..1.0f64, 0.0..2.0 * PI),
        (-1.0..1.0f64, 0.0..2.0 * PI),
        (-1.0..1.0f64, 0.0..2.0 * PI),
    ]
}

fn field(grid: &Grid, base: f64, amplitude: f64, m: &[(f64, f64); 3]) -> Vec<f64> {
    grid.sample(|x| {
        let wave: f64 = m
            .iter()
            .enumerate()
            .map(|(k, (c, phase))| c * (2.0 * PI * (k + 1) as f64 * x + phase).sin())
            .sum();
        base + amplitude * wave / 3.0
    })
}

fn smooth_state(
    n: usize,
    amplitude: f64,
    mv: &[(f64, f64); 3],
    mu: &[(f64, f64); 3],
    mt: &[(f64, f64); 3],
) -> (Grid, State) {
    let grid = Grid::new(n).unwrap();
    let params = Params::default();
    let mut v = field(&grid, 1.0, amplitude, mv);
    let mass = grid.quadrature(&v).unwrap();
    v.iter_mut().for_each(|x| *x /= mass);
    let u = field(&grid, 0.0, amplitude, mu);
    let theta = field(&grid, 1.0, amplitude, mt);
    let q = init_compatible_q(&v, &theta, &grid, &params).unwrap();
    (grid, State { t: 0.0, v, u, theta, q })
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn cells() -> impl Strategy<Value = usize> {
    prop_oneof![Just(32usize), Just(64), Just(128), Just(256)]
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn radiation_is_weighted_neutral(n in cells(), amp in 0.0..0.5f64, mv in modes(), mu in modes(), mt in modes()) {
        let (grid, s) = smooth_state(n, amp, &mv, &mu, &mt);
        let solve = solve_radiation_lagrangian(&s.v, &s.theta, &grid, &Params::default()).unwrap();
        let scale = s.q.iter().fold(1.0f64, |m, q| m.max(q.abs()));
        prop_assert!(solve.weighted_sum.abs() <= 1e-13 * scale);
    }

    #[test]
    fn flux_gradient_stays_below_emission(n in cells(), amp in 0.0..0.5f64, mv in modes(), mu in modes(), mt in modes()) {
        let (grid, s) = smooth_state(n, amp, &mv, &mu, &mt);
        let report = check_pointwise_bound(&s, &grid, &Params::default()).unwrap();
        prop_assert!(report.pass, "margin {} over tolerance {}", report.max_margin, report.tolerance);
    }

    #[test]
    fn dissipation_integrands_are_nonnegative(n in cells(), amp in 0.0..0.5f64, mv in modes(), mu in modes(), mt in modes()) {
        let (grid, s) = smooth_state(n, amp, &mv, &mu, &mt);
        let e = entropy_integrands(&s, &grid, &Params::default()).unwrap();
        for part in e.dissipative() {
            prop_assert!(part.iter().all(|x| *x >= 0.0));
        }
    }

    #[test]
    fn kernel_is_nonpositive(la in -2.0..2.0f64, lb in -2.0..2.0f64) {
        let spec = KernelSpec::new(10f64.powf(la), 10f64.powf(lb)).unwrap();
        let cert = certify_kernel_nonpositive(&spec, 1000).unwrap();
        prop_assert!(cert.pass && cert.max_value <= 1e-12, "max {} at {}", cert.max_value, cert.argmax);
    }

    #[test]
    fn admissible_n_exists_above_threshold(offset in 1e-6..50.0f64) {
        let beta = EXISTENCE_THRESHOLD + offset;
        let n = find_admissible_n(beta, T0Reading::AsPrinted).unwrap();
        prop_assert!(n.is_some(), "no n for beta = {}", beta);
        let n = n.unwrap();
        prop_assert!(n > 8.0);
        prop_assert!(ExponentReport::evaluate(n, beta, T0Reading::AsPrinted).unwrap().admissible);
    }
}

proptest! {
    #![proptest_config(config(16))]

    #[test]
    fn steps_conserve_mass_and_momentum(amp in 0.0..0.3f64, mv in modes(), mu in modes(), mt in modes()) {
        let (grid, s) = smooth_state(64, amp, &mv, &mu, &mt);
        let params = Params::default();
        let before = conserved_quantities(&s, &grid, &params).unwrap();
        let scale = s.u.iter().fold(before.mass, |m, u| m.max(u.abs()));
        let mut worst = (0.0f64, 0.0f64);
        advance(s, 0, 0.05, &grid, &params, &StepControl::default(), None, |a| {
            let c = conserved_quantities(a.current, &grid, &params)?;
            worst.0 = worst.0.max((c.mass - before.mass).abs() / before.mass);
            worst.1 = worst.1.max((c.momentum - before.momentum).abs() / scale);
            Ok(())
        })
        .unwrap();
        prop_assert!(worst.0 <= 1e-12 && worst.1 <= 1e-12, "drifts {:?}", worst);
    }

    #[test]
    fn resumed_runs_continue_bitwise(amp in 0.0..0.3f64, split in 1usize..20, mv in modes(), mu in modes(), mt in modes()) {
        let (grid, s) = smooth_state(64, amp, &mv, &mu, &mt);
        let params = Params::default();
        let control = StepControl::default();
        let mut middle = None;
        let whole = advance(s, 0, 0.2, &grid, &params, &control, None, |a| {
            if a.index == split {
                middle = Some(a.current.clone());
            }
            Ok(())
        })
        .unwrap();
        prop_assume!(middle.is_some());
        let resumed = advance(middle.unwrap(), split, 0.2, &grid, &params, &control, None, |_| Ok(())).unwrap();
        prop_assert_eq!(&resumed.final_state, &whole.final_state);
        prop_assert_eq!(resumed.steps + split, whole.steps);
    }
}

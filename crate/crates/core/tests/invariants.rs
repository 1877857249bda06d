//! Structural properties of the stepper and the metrics, checked through the public API.

use memfhn::metrics::pairwise_differences;
use memfhn::{
    init_random, integrate, integrate_from, laplacian_neumann, zero_flux_sum, Config, Field2D, Grid2D, NetworkParams,
    NetworkState, NonlinearityBounds, NoopObserver, Scheme,
};
use proptest::prelude::*;

fn small(m: usize, seed: u64, scheme: Scheme) -> Config {
    let mut params = NetworkParams::reference();
    params.neurons = m;
    Config {
        params,
        bounds: NonlinearityBounds::prototype(1.0).unwrap(),
        grid: Grid2D::new(6, 5, 1.0).unwrap(),
        dt: 0.001,
        n_steps: 200,
        seed,
        amplitude: 0.5,
        record_every: 20,
        snapshot_every: 0,
        scheme,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn neuron_relabelling_commutes_with_time_stepping(seed in 0u64..1000, m in 2usize..6, rk4 in any::<bool>()) {
        let cfg = small(m, seed, if rk4 { Scheme::Rk4 } else { Scheme::Euler });
        let init = init_random(cfg.grid, m, 0.5, seed).unwrap();
        let order: Vec<usize> = (0..m).rev().collect();
        let a = integrate_from(&cfg, init.clone(), &mut NoopObserver).unwrap().final_state.permuted(&order);
        let b = integrate_from(&cfg, init.permuted(&order), &mut NoopObserver).unwrap().final_state;
        for (x, y) in a.u_stack().iter().zip(b.u_stack()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn runs_are_reproducible_from_the_seed(seed in 0u64..1000) {
        let cfg = small(3, seed, Scheme::Euler);
        let a = integrate(&cfg, &mut NoopObserver).unwrap();
        let b = integrate(&cfg, &mut NoopObserver).unwrap();
        prop_assert_eq!(a.final_state, b.final_state);
        prop_assert_eq!(a.series, b.series);
    }

    #[test]
    fn pair_matrix_is_symmetric_and_nonnegative(seed in 0u64..1000) {
        let s = init_random(Grid2D::new(7, 4, 0.5).unwrap(), 5, 1.0, seed).unwrap();
        let d = pairwise_differences(&s);
        for i in 0..5 {
            prop_assert_eq!(d.get(i, i), 0.0);
            for j in 0..5 {
                prop_assert_eq!(d.get(i, j), d.get(j, i));
                prop_assert!(d.get(i, j) >= 0.0);
            }
        }
    }

    #[test]
    fn neumann_laplacian_conserves_mass(vals in prop::collection::vec(-10.0f64..10.0, 48)) {
        let f = Field2D::from_values(Grid2D::new(8, 6, 0.7).unwrap(), vals).unwrap();
        prop_assert!(zero_flux_sum(&f).abs() <= 1e-10 * f.max_abs().max(1.0) / 0.49);
    }
}

#[test]
fn constants_are_annihilated_by_the_laplacian() {
    let f = Field2D::from_fn(Grid2D::new(9, 11, 0.3).unwrap(), |_, _| 2.5);
    assert!(laplacian_neumann(&f).values().iter().all(|&v| v == 0.0));
}

#[test]
fn coupled_neurons_draw_together() {
    let cfg = small(4, 3, Scheme::Euler);
    let out = integrate(&cfg, &mut NoopObserver).unwrap();
    let first = out.series.pair_total()[0];
    let last = *out.series.pair_total().last().unwrap();
    assert!(last < 0.5 * first, "{first} -> {last}");
}

#[test]
fn identical_neurons_remain_identical() {
    let g = Grid2D::new(6, 5, 1.0).unwrap();
    let one: NetworkState<f64> = init_random(g, 1, 0.5, 8).unwrap();
    let s = NetworkState::from_stacks(g, 3, one.u(0).repeat(3), one.w(0).repeat(3), one.rho(0).repeat(3), 0.0).unwrap();
    let out = integrate_from(&small(3, 0, Scheme::Rk4), s, &mut NoopObserver).unwrap();
    assert!(out.series.pair_total().iter().all(|&d| d == 0.0));
}

//! Self-checks run by `memfhn verify`.
//!
//! Each suite compares a production code path against an independently
//! written reference: a naive stencil, an O(m^2) coupling loop, a scalar ODE
//! solve, or a closed-form eigenvalue.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::grid::{laplacian_neumann, zero_flux_sum, Field2D, Grid2D};
use crate::model::{init_random, verify_assumption, NetworkParams, NetworkState, NonlinearityBounds};
use crate::sim::{integrate_from, reduce_to_ode_check, rhs, NoopObserver, RunConfig, Scheme};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: {}", self.name, self.detail)
    }
}

/// Initial values `(u, w, rho)` sampled from uniform `[0, 0.05)` data, used as
/// spatially constant starting points.
pub const SAMPLE_NEURONS: [(f64, f64, f64); 4] = [
    (0.021435249976028286, 0.038162808368984426, 0.02516293441173103),
    (0.04741166022718009, 0.016109788021287225, 0.040098450204586085),
    (0.01014072281752508, 0.028702864538319866, 0.015327673754565209),
    (0.032459331285605755, 0.04497009552599465, 0.03404629085391771),
];

fn reference_run(grid: Grid2D<f64>, dt: f64, n_steps: usize, scheme: Scheme) -> RunConfig<f64> {
    RunConfig {
        params: NetworkParams::reference(),
        bounds: NonlinearityBounds::prototype(1.0).expect("kappa = 1"),
        grid,
        dt,
        n_steps,
        seed: 7,
        amplitude: 0.05,
        record_every: n_steps,
        snapshot_every: 0,
        scheme,
    }
}

fn naive_laplacian(field: &Field2D<f64>) -> Vec<f64> {
    let g = field.grid();
    let (nx, ny) = (g.nx() as isize, g.ny() as isize);
    let h2 = g.dx() * g.dx();
    let at = |i: isize, j: isize| field.get(i.clamp(0, nx - 1) as usize, j.clamp(0, ny - 1) as usize);
    let mut out = Vec::with_capacity(g.len());
    for j in 0..ny {
        for i in 0..nx {
            out.push((at(i - 1, j) + at(i + 1, j) + at(i, j - 1) + at(i, j + 1) - 4.0 * at(i, j)) / h2);
        }
    }
    out
}

pub fn stencil_suite() -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let g = Grid2D::new(33, 33, 1.0).expect("grid");
    let (lx, ly) = g.extent();
    let f = Field2D::from_fn(g, |x, y| (PI * x / lx).cos() * (PI * y / ly).cos());
    let lap = laplacian_neumann(&f);
    let err = lap
        .values()
        .iter()
        .zip(naive_laplacian(&f))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    out.push(CheckOutcome::new(
        "stencil vs naive oracle (cosine, 33x33)",
        err <= 1e-12,
        format!("max |diff| = {err:.3e} (tol 1e-12)"),
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let f = Field2D::from_fn(Grid2D::new(21, 17, 0.5).expect("grid"), |_, _| {
            rng.gen_range(-1.0f64..1.0)
        });
        let tol = 1e-10 * f.max_abs() * (21.0 * 17.0);
        worst = worst.max(zero_flux_sum(&f).abs() / tol);
    }
    out.push(CheckOutcome::new(
        "zero-flux sum on 100 random fields",
        worst <= 1.0,
        format!("worst |sum| / tolerance = {worst:.3e}"),
    ));
    out
}

/// Observed order of the Neumann Laplacian on `cos(pi x/L) cos(pi y/L)` for
/// `n = 16, 32, 64` cells on a fixed square of side 32.
pub fn spatial_order() -> (f64, Vec<f64>) {
    let side = 32.0;
    let errors: Vec<f64> = [16usize, 32, 64]
        .iter()
        .map(|&n| {
            let g = Grid2D::new(n, n, side / n as f64).expect("grid");
            let f = Field2D::from_fn(g, |x, y| (PI * x / side).cos() * (PI * y / side).cos());
            let eig = -2.0 * (PI / side).powi(2);
            laplacian_neumann(&f)
                .values()
                .iter()
                .zip(f.values())
                .map(|(l, v)| (l - eig * v).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    (log_log_slope(&[1.0, 0.5, 0.25], &errors), errors)
}

/// Least-squares slope of `ln err` against `ln h`.
pub fn log_log_slope(h: &[f64], err: &[f64]) -> f64 {
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = err.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn brute_force_rates(s: &NetworkState<f64>, p: &NetworkParams<f64>, b: &NonlinearityBounds<f64>) -> Vec<f64> {
    let mut out = Vec::new();
    for n in 0..s.neurons() {
        let lap = naive_laplacian(&s.field(crate::error::Component::Potential, n));
        for (idx, lap_u) in lap.iter().enumerate() {
            let ui = s.u(n)[idx];
            let mut coupling = 0.0;
            for other in 0..s.neurons() {
                coupling += p.coupling * (s.u(other)[idx] - ui);
            }
            let f = ui * (ui - b.kappa) * (1.0 - ui);
            out.push(
                p.diffusion * lap_u + f - p.recovery_coupling * s.w(n)[idx] + p.reference_potential
                    - p.memristor_strength * s.rho(n)[idx].tanh() * ui
                    + coupling,
            );
        }
    }
    out
}

/// Largest `|rhs - brute force|` over 20 random states for each `m`.
pub fn coupling_deviation(neurons: &[usize], states: usize) -> Result<Vec<(usize, f64)>> {
    let bounds = NonlinearityBounds::prototype(1.0)?;
    let grid = Grid2D::new(8, 8, 1.0)?;
    let mut out = Vec::new();
    for &m in neurons {
        let mut params = NetworkParams::reference();
        params.neurons = m;
        let mut worst = 0.0f64;
        for seed in 0..states as u64 {
            let s = init_random(grid, m, 1.0, 1000 + seed)?;
            let fast = rhs(&s, &params, &bounds)?;
            let slow = brute_force_rates(&s, &params, &bounds);
            for (a, b) in fast.du.iter().zip(&slow) {
                worst = worst.max((a - b).abs());
            }
        }
        out.push((m, worst));
    }
    Ok(out)
}

pub fn coupling_suite() -> Result<Vec<CheckOutcome>> {
    Ok(coupling_deviation(&[2, 3, 4, 8], 20)?
        .into_iter()
        .map(|(m, worst)| {
            CheckOutcome::new(
                format!("rhs vs O(m^2) coupling oracle, m = {m}"),
                worst <= 1e-12,
                format!("max |diff| over 20 states = {worst:.3e} (tol 1e-12)"),
            )
        })
        .collect())
}

/// Deviation of the PDE stepper from the space-free RK4 reference at `t = 1`.
pub fn ode_reduction(scheme: Scheme) -> Result<f64> {
    let grid = Grid2D::new(5, 5, 1.0)?;
    let cfg = reference_run(grid, 0.00025, 4000, scheme);
    Ok(reduce_to_ode_check(&cfg, &SAMPLE_NEURONS)?.max_deviation)
}

pub fn ode_suite() -> Result<Vec<CheckOutcome>> {
    let euler = ode_reduction(Scheme::Euler)?;
    let rk4 = ode_reduction(Scheme::Rk4)?;
    Ok(vec![
        CheckOutcome::new(
            "spatially constant data vs ODE reference (Euler, t = 1)",
            euler <= 1e-3,
            format!("max deviation = {euler:.3e} (tol 1e-3)"),
        ),
        CheckOutcome::new(
            "spatially constant data vs ODE reference (RK4, t = 1)",
            rk4 <= 1e-8,
            format!("max deviation = {rk4:.3e} (tol 1e-8)"),
        ),
    ])
}

fn max_state_diff(a: &NetworkState<f64>, b: &NetworkState<f64>) -> f64 {
    a.u_stack()
        .iter()
        .chain(a.w_stack())
        .chain(a.rho_stack())
        .zip(b.u_stack().iter().chain(b.w_stack()).chain(b.rho_stack()))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Global-error slope of `scheme` on the reference parameters, 8x8 grid,
/// `t_end = 0.25`, against RK4 with 20 000 steps.
pub fn temporal_order(scheme: Scheme, dts: &[f64]) -> Result<(f64, Vec<f64>)> {
    let grid = Grid2D::new(8, 8, 1.0)?;
    let t_end = 0.25;
    let init = init_random(grid, 4, 0.05, 31)?;
    let run = |dt: f64, scheme: Scheme| -> Result<NetworkState<f64>> {
        let steps = (t_end / dt).round() as usize;
        let cfg = reference_run(grid, dt, steps, scheme);
        Ok(integrate_from(&cfg, init.clone(), &mut NoopObserver)?.final_state)
    };
    let reference = run(t_end / 20_000.0, Scheme::Rk4)?;
    let mut errors = Vec::new();
    for &dt in dts {
        errors.push(max_state_diff(&run(dt, scheme)?, &reference));
    }
    Ok((log_log_slope(dts, &errors), errors))
}

pub const EULER_ORDER_DTS: [f64; 3] = [0.0025, 0.00125, 0.000625];
pub const RK4_ORDER_DTS: [f64; 3] = [0.01, 0.005, 0.0025];

pub fn order_suite() -> Result<Vec<CheckOutcome>> {
    let (space, space_err) = spatial_order();
    let (euler, _) = temporal_order(Scheme::Euler, &EULER_ORDER_DTS)?;
    let (rk4, _) = temporal_order(Scheme::Rk4, &RK4_ORDER_DTS)?;
    Ok(vec![
        CheckOutcome::new(
            "spatial order (cosine mode, n = 16/32/64)",
            (space - 2.0).abs() <= 0.2,
            format!("order = {space:.4}, errors = {}", fmt_list(&space_err)),
        ),
        CheckOutcome::new(
            "Euler temporal order (8x8, t = 0.25)",
            (euler - 1.0).abs() <= 0.2,
            format!("order = {euler:.4}"),
        ),
        CheckOutcome::new(
            "RK4 temporal order (8x8, t = 0.25)",
            rk4 >= 3.5,
            format!("order = {rk4:.4}"),
        ),
    ])
}

fn fmt_list(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|e| format!("{e:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

pub fn assumption_suite() -> Result<Vec<CheckOutcome>> {
    let b = NonlinearityBounds::prototype(1.0)?;
    let r = verify_assumption(&b, (-100.0, 100.0), 100_000)?;
    Ok(vec![CheckOutcome::new(
        "nonlinearity bounds on [-100, 100]",
        r.passed(),
        format!(
            "{} violations in {} samples, max f' = {:.6} <= beta = {:.6}",
            r.violations.len(),
            r.samples,
            r.slope_max,
            b.beta
        ),
    )])
}

/// Every suite, in a fixed order.
pub fn run_all() -> Result<Vec<CheckOutcome>> {
    let mut out = stencil_suite();
    out.extend(assumption_suite()?);
    out.extend(coupling_suite()?);
    out.extend(ode_suite()?);
    out.extend(order_suite()?);
    Ok(out)
}

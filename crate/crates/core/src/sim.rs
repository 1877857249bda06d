//! Right-hand side of the coupled network and the explicit time integrators.
//!
//! A step is bulk-synchronous: the neuron sum `S = Σ_j u_j` is reduced once
//! (ascending neuron order, per grid point), then every `(neuron, row)` tile of
//! the derivative is written independently from the frozen previous state.
//! Each output value depends only on the inputs, never on how rows are
//! scheduled, so results are identical for any worker count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{cfl_max_dt, laplacian_row, Grid2D};
use crate::metrics::{MetricsRecord, MetricsSeries};
use crate::model::{init_random, NetworkParams, NetworkState, NonlinearityBounds};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Forward Euler, the default.
    #[default]
    Euler,
    /// Classical four-stage Runge-Kutta.
    Rk4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig<T> {
    pub params: NetworkParams<T>,
    pub bounds: NonlinearityBounds<T>,
    pub grid: Grid2D<T>,
    pub dt: T,
    pub n_steps: usize,
    pub seed: u64,
    /// Initial data are uniform in `[0, amplitude)`.
    pub amplitude: T,
    /// Metrics are recorded after every `record_every`-th step.
    pub record_every: usize,
    /// Snapshots are emitted after every `snapshot_every`-th step; 0 disables them.
    pub snapshot_every: usize,
    pub scheme: Scheme,
}

impl<T: Scalar> RunConfig<T> {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.validate_numerics()
    }

    /// Step size, step count and cadence checks, without the coefficient signs.
    pub fn validate_numerics(&self) -> Result<()> {
        let limit = cfl_max_dt(&self.params, &self.grid, T::one())?;
        if !(self.dt > T::zero()) || self.dt > limit {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: format!("must lie in (0, cfl_max_dt = dx^2/(4 eta) = {limit}], got {}", self.dt),
            });
        }
        if self.n_steps == 0 {
            return Err(Error::InvalidParameter {
                name: "n_steps",
                reason: "at least one step required".into(),
            });
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParameter {
                name: "record_every",
                reason: "must be at least 1".into(),
            });
        }
        if !(self.amplitude >= T::zero()) {
            return Err(Error::InvalidParameter {
                name: "amplitude",
                reason: format!("must be nonnegative, got {}", self.amplitude),
            });
        }
        Ok(())
    }

    pub fn t_end(&self) -> T {
        self.dt * T::from_usize_lossy(self.n_steps)
    }
}

/// Time derivative of a [`NetworkState`], same layout as its stacks.
#[derive(Debug, Clone, PartialEq)]
pub struct Rates<T> {
    pub du: Vec<T>,
    pub dw: Vec<T>,
    pub drho: Vec<T>,
}

impl<T: Scalar> Rates<T> {
    fn zeros(len: usize) -> Self {
        Self {
            du: vec![T::zero(); len],
            dw: vec![T::zero(); len],
            drho: vec![T::zero(); len],
        }
    }
}

fn neuron_sum_into<T: Scalar>(state: &NetworkState<T>, sum: &mut [T]) {
    let nx = state.grid().nx();
    let m = state.neurons();
    sum.par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
        let off = j * nx;
        for (i, s) in row.iter_mut().enumerate() {
            let mut acc = T::zero();
            for n in 0..m {
                acc = acc + state.u(n)[off + i];
            }
            *s = acc;
        }
    });
}

fn rhs_into<T: Scalar>(
    state: &NetworkState<T>,
    params: &NetworkParams<T>,
    bounds: &NonlinearityBounds<T>,
    sum: &mut [T],
    out: &mut Rates<T>,
) {
    let grid = *state.grid();
    let nx = grid.nx();
    let ny = grid.ny();
    let npts = grid.len();
    neuron_sum_into(state, sum);
    let sum: &[T] = sum;
    let m = T::from_usize_lossy(state.neurons());
    let eta = params.diffusion;
    let sigma = params.recovery_coupling;
    let j_ref = params.reference_potential;
    let k = params.memristor_strength;
    let p = params.coupling;

    out.du.par_chunks_mut(nx).enumerate().for_each(|(row_id, row)| {
        let n = row_id / ny;
        let j = row_id % ny;
        let u = state.u(n);
        laplacian_row(&grid, u, j, row);
        let off = j * nx;
        let w = &state.w(n)[off..off + nx];
        let rho = &state.rho(n)[off..off + nx];
        let s = &sum[off..off + nx];
        for i in 0..nx {
            let ui = u[off + i];
            row[i] =
                eta * row[i] + bounds.eval(ui) - sigma * w[i] + j_ref - k * rho[i].tanh() * ui + p * (s[i] - m * ui);
        }
    });

    let (a, b, c, q, r) = (params.a, params.b, params.c, params.q, params.r);
    let u = state.u_stack();
    let w = state.w_stack();
    let rho = state.rho_stack();
    out.dw
        .par_chunks_mut(npts)
        .zip(out.drho.par_chunks_mut(npts))
        .enumerate()
        .for_each(|(n, (dw, drho))| {
            let off = n * npts;
            for p in 0..npts {
                let ui = u[off + p];
                dw[p] = a * ui + c - b * w[off + p];
                drho[p] = q * ui - r * rho[off + p];
            }
        });
}

/// Evaluates the full coupled right-hand side.
///
/// The all-to-all term `P Σ_j (u_j - u_i)` is computed as `P (S - m u_i)`.
pub fn rhs<T: Scalar>(
    state: &NetworkState<T>,
    params: &NetworkParams<T>,
    bounds: &NonlinearityBounds<T>,
) -> Result<Rates<T>> {
    state.check_finite()?;
    let mut sum = vec![T::zero(); state.grid().len()];
    let mut out = Rates::zeros(state.u_stack().len());
    rhs_into(state, params, bounds, &mut sum, &mut out);
    Ok(out)
}

/// `dst = base + h * rates`, stack by stack.
fn axpy_state<T: Scalar>(dst: &mut NetworkState<T>, base: &NetworkState<T>, h: T, rates: &Rates<T>) {
    for (d, (b, r)) in [
        (&mut dst.u, (&base.u, &rates.du)),
        (&mut dst.w, (&base.w, &rates.dw)),
        (&mut dst.rho, (&base.rho, &rates.drho)),
    ] {
        d.par_iter_mut()
            .zip(b.par_iter().zip(r.par_iter()))
            .for_each(|(d, (&b, &r))| *d = b + h * r);
    }
}

/// Reusable scratch space for repeated steps on one grid.
#[derive(Debug, Clone)]
pub struct Stepper<T> {
    sum: Vec<T>,
    k: [Rates<T>; 4],
    stage: Option<NetworkState<T>>,
}

impl<T: Scalar> Stepper<T> {
    pub fn new(grid: &Grid2D<T>, neurons: usize) -> Self {
        let len = grid.len() * neurons;
        Self {
            sum: vec![T::zero(); grid.len()],
            k: [
                Rates::zeros(len),
                Rates::zeros(len),
                Rates::zeros(len),
                Rates::zeros(len),
            ],
            stage: None,
        }
    }

    /// Advances `state` by one step of `dt` and rejects non-finite results.
    pub fn step(
        &mut self,
        state: &mut NetworkState<T>,
        params: &NetworkParams<T>,
        bounds: &NonlinearityBounds<T>,
        dt: T,
        scheme: Scheme,
    ) -> Result<()> {
        match scheme {
            Scheme::Euler => {
                let k1 = &mut self.k[0];
                rhs_into(state, params, bounds, &mut self.sum, k1);
                for (y, r) in [
                    (&mut state.u, &k1.du),
                    (&mut state.w, &k1.dw),
                    (&mut state.rho, &k1.drho),
                ] {
                    y.par_iter_mut().zip(r.par_iter()).for_each(|(y, &r)| *y = *y + dt * r);
                }
            }
            Scheme::Rk4 => {
                let half = dt * T::lit(0.5);
                let stage = self.stage.get_or_insert_with(|| state.clone());
                let [k1, k2, k3, k4] = &mut self.k;
                rhs_into(state, params, bounds, &mut self.sum, k1);
                axpy_state(stage, state, half, k1);
                rhs_into(stage, params, bounds, &mut self.sum, k2);
                axpy_state(stage, state, half, k2);
                rhs_into(stage, params, bounds, &mut self.sum, k3);
                axpy_state(stage, state, dt, k3);
                rhs_into(stage, params, bounds, &mut self.sum, k4);
                let sixth = dt / T::lit(6.0);
                let two = T::lit(2.0);
                for (y, (a, (b, (c, d)))) in [
                    (&mut state.u, (&k1.du, (&k2.du, (&k3.du, &k4.du)))),
                    (&mut state.w, (&k1.dw, (&k2.dw, (&k3.dw, &k4.dw)))),
                    (&mut state.rho, (&k1.drho, (&k2.drho, (&k3.drho, &k4.drho)))),
                ] {
                    y.par_iter_mut().enumerate().for_each(|(p, y)| {
                        *y = *y + sixth * (a[p] + two * b[p] + two * c[p] + d[p]);
                    });
                }
            }
        }
        state.t = state.t + dt;
        state.check_finite()
    }
}

fn single_step<T: Scalar>(state: &NetworkState<T>, cfg: &RunConfig<T>, scheme: Scheme) -> Result<NetworkState<T>> {
    state.check_finite()?;
    let mut next = state.clone();
    Stepper::new(state.grid(), state.neurons()).step(&mut next, &cfg.params, &cfg.bounds, cfg.dt, scheme)?;
    Ok(next)
}

/// `state + dt * rhs(state)`.
pub fn step_euler<T: Scalar>(state: &NetworkState<T>, cfg: &RunConfig<T>) -> Result<NetworkState<T>> {
    single_step(state, cfg, Scheme::Euler)
}

pub fn step_rk4<T: Scalar>(state: &NetworkState<T>, cfg: &RunConfig<T>) -> Result<NetworkState<T>> {
    single_step(state, cfg, Scheme::Rk4)
}

/// Receives metrics rows and snapshots while [`integrate`] runs.
pub trait RunObserver<T> {
    fn on_record(&mut self, _step: usize, _record: &MetricsRecord<T>) -> Result<()> {
        Ok(())
    }

    fn on_snapshot(&mut self, _step: usize, _state: &NetworkState<T>) -> Result<()> {
        Ok(())
    }
}

/// Observer that ignores everything.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoopObserver;

impl<T> RunObserver<T> for NoopObserver {}

#[derive(Debug, Clone)]
pub struct RunOutput<T> {
    pub initial: NetworkState<T>,
    pub final_state: NetworkState<T>,
    pub series: MetricsSeries<T>,
}

/// Runs `cfg` from seeded random initial data.
pub fn integrate<T: Scalar>(cfg: &RunConfig<T>, observer: &mut dyn RunObserver<T>) -> Result<RunOutput<T>> {
    cfg.validate()?;
    let state = init_random(cfg.grid, cfg.params.neurons, cfg.amplitude, cfg.seed)?;
    integrate_from(cfg, state, observer)
}

/// Runs `cfg.n_steps` steps from `initial`. Rows go to `observer` as they are
/// produced, so a failing run has already delivered everything before the
/// failing step.
pub fn integrate_from<T: Scalar>(
    cfg: &RunConfig<T>,
    initial: NetworkState<T>,
    observer: &mut dyn RunObserver<T>,
) -> Result<RunOutput<T>> {
    cfg.validate()?;
    if initial.neurons() != cfg.params.neurons || initial.grid() != &cfg.grid {
        return Err(Error::InvalidParameter {
            name: "initial",
            reason: "state shape does not match the configuration".into(),
        });
    }
    initial.check_finite()?;
    let t0 = initial.t;
    let mut state = initial.clone();
    let mut stepper = Stepper::new(&cfg.grid, cfg.params.neurons);
    let mut series = MetricsSeries::new(cfg.params.neurons);
    for step in 1..=cfg.n_steps {
        stepper
            .step(&mut state, &cfg.params, &cfg.bounds, cfg.dt, cfg.scheme)
            .map_err(|e| Error::StepFailed {
                step,
                source: Box::new(e),
            })?;
        state.t = t0 + cfg.dt * T::from_usize_lossy(step);
        if step % cfg.record_every == 0 {
            let rec = MetricsRecord::from_state(&state);
            observer.on_record(step, &rec)?;
            series.push(rec)?;
        }
        if cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0 {
            observer.on_snapshot(step, &state)?;
        }
    }
    Ok(RunOutput {
        initial,
        final_state: state,
        series,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeReductionReport<T> {
    pub t_end: T,
    /// Largest `|PDE - ODE|` over all neurons, components and grid points.
    pub max_deviation: T,
    /// Largest spread `max - min` inside any single field of the PDE result.
    pub max_spatial_variation: T,
    /// Reference values `(u_i, w_i, rho_i)` at `t_end`.
    pub reference: Vec<(T, T, T)>,
}

/// Scalar right-hand side of the space-free system with the pairwise coupling
/// written out term by term.
fn ode_rhs<T: Scalar>(y: &[(T, T, T)], params: &NetworkParams<T>, bounds: &NonlinearityBounds<T>) -> Vec<(T, T, T)> {
    y.iter()
        .map(|&(u, w, rho)| {
            let mut coupling = T::zero();
            for &(uj, _, _) in y {
                coupling = coupling + params.coupling * (uj - u);
            }
            let du = bounds.eval(u) - params.recovery_coupling * w + params.reference_potential
                - params.memristor_strength * rho.tanh() * u
                + coupling;
            let dw = params.a * u + params.c - params.b * w;
            let drho = params.q * u - params.r * rho;
            (du, dw, drho)
        })
        .collect()
}

/// Classical RK4 on the space-free system.
pub fn ode_reference<T: Scalar>(
    initial: &[(T, T, T)],
    params: &NetworkParams<T>,
    bounds: &NonlinearityBounds<T>,
    dt: T,
    steps: usize,
) -> Vec<(T, T, T)> {
    let shift = |y: &[(T, T, T)], k: &[(T, T, T)], h: T| -> Vec<(T, T, T)> {
        y.iter()
            .zip(k)
            .map(|(&(a, b, c), &(da, db, dc))| (a + h * da, b + h * db, c + h * dc))
            .collect()
    };
    let half = dt * T::lit(0.5);
    let two = T::lit(2.0);
    let sixth = dt / T::lit(6.0);
    let mut y = initial.to_vec();
    for _ in 0..steps {
        let k1 = ode_rhs(&y, params, bounds);
        let k2 = ode_rhs(&shift(&y, &k1, half), params, bounds);
        let k3 = ode_rhs(&shift(&y, &k2, half), params, bounds);
        let k4 = ode_rhs(&shift(&y, &k3, dt), params, bounds);
        for n in 0..y.len() {
            let comb = |a: T, b: T, c: T, d: T| sixth * (a + two * b + two * c + d);
            y[n].0 = y[n].0 + comb(k1[n].0, k2[n].0, k3[n].0, k4[n].0);
            y[n].1 = y[n].1 + comb(k1[n].1, k2[n].1, k3[n].1, k4[n].1);
            y[n].2 = y[n].2 + comb(k1[n].2, k2[n].2, k3[n].2, k4[n].2);
        }
    }
    y
}

/// Integrates spatially constant data with the PDE stepper and compares every
/// grid value at `t_end` with an RK4 solve of the space-free system at `dt/100`.
pub fn reduce_to_ode_check<T: Scalar>(cfg: &RunConfig<T>, initial: &[(T, T, T)]) -> Result<OdeReductionReport<T>> {
    cfg.validate_numerics()?;
    if initial.len() != cfg.params.neurons {
        return Err(Error::InvalidParameter {
            name: "initial",
            reason: format!("expected {} neuron values, got {}", cfg.params.neurons, initial.len()),
        });
    }
    let mut state = NetworkState::uniform(cfg.grid, initial);
    let mut stepper = Stepper::new(&cfg.grid, cfg.params.neurons);
    for step in 1..=cfg.n_steps {
        stepper
            .step(&mut state, &cfg.params, &cfg.bounds, cfg.dt, cfg.scheme)
            .map_err(|e| Error::StepFailed {
                step,
                source: Box::new(e),
            })?;
    }
    let reference = ode_reference(
        initial,
        &cfg.params,
        &cfg.bounds,
        cfg.dt / T::lit(100.0),
        cfg.n_steps * 100,
    );
    let mut max_deviation = T::zero();
    let mut max_spatial_variation = T::zero();
    for (n, &(ur, wr, rr)) in reference.iter().enumerate() {
        for (field, target) in [(state.u(n), ur), (state.w(n), wr), (state.rho(n), rr)] {
            let mut lo = T::infinity();
            let mut hi = T::neg_infinity();
            for &v in field {
                max_deviation = max_deviation.max((v - target).abs());
                lo = lo.min(v);
                hi = hi.max(v);
            }
            max_spatial_variation = max_spatial_variation.max(hi - lo);
        }
    }
    Ok(OdeReductionReport {
        t_end: cfg.t_end(),
        max_deviation,
        max_spatial_variation,
        reference,
    })
}

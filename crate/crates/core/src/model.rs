//! Model coefficients, the cubic membrane nonlinearity and the network state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Component, Error, Result};
use crate::grid::{Field2D, Grid2D};
use crate::scalar::Scalar;

/// Coefficients of the coupled memristive FitzHugh-Nagumo system.
///
/// ```text
/// du/dt   = eta Δu + f(u) - sigma w + J - k tanh(rho) u + P Σ_j (u_j - u)
/// dw/dt   = a u + c - b w
/// drho/dt = q u - r rho
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams<T> {
    /// `eta`, diffusion of the membrane potential.
    pub diffusion: T,
    /// `sigma`, feedback of the recovery variable into the potential.
    pub recovery_coupling: T,
    /// `J`, reference potential. The only coefficient allowed to be negative.
    pub reference_potential: T,
    /// `k`, memristor coupling strength.
    pub memristor_strength: T,
    pub a: T,
    pub b: T,
    pub c: T,
    pub q: T,
    pub r: T,
    /// `P`, all-to-all synaptic coupling strength. Zero gives uncoupled neurons.
    pub coupling: T,
    /// `m`, number of neurons.
    pub neurons: usize,
}

impl<T: Scalar> NetworkParams<T> {
    /// Reference set: m = 4, eta = 10, sigma = 0.01, J = 0.5, P = 1.45,
    /// a = b = q = 0.35, c = 0.7, r = 10 and k = 0.25, the value the
    /// reference constants are computed with.
    pub fn reference() -> Self {
        Self {
            diffusion: T::lit(10.0),
            recovery_coupling: T::lit(0.01),
            reference_potential: T::lit(0.5),
            memristor_strength: T::lit(0.25),
            a: T::lit(0.35),
            b: T::lit(0.35),
            c: T::lit(0.7),
            q: T::lit(0.35),
            r: T::lit(10.0),
            coupling: T::lit(1.45),
            neurons: 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("eta", self.diffusion),
            ("sigma", self.recovery_coupling),
            ("k", self.memristor_strength),
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("q", self.q),
            ("r", self.r),
        ];
        for (name, v) in positive {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be positive and finite, got {v}"),
                });
            }
        }
        if !self.reference_potential.is_finite() {
            return Err(Error::InvalidParameter {
                name: "J",
                reason: "must be finite".into(),
            });
        }
        if !(self.coupling >= T::zero()) || !self.coupling.is_finite() {
            return Err(Error::InvalidParameter {
                name: "P",
                reason: format!("must be nonnegative and finite, got {}", self.coupling),
            });
        }
        if self.neurons < 2 {
            return Err(Error::InvalidParameter {
                name: "m",
                reason: format!("need at least 2 neurons, got {}", self.neurons),
            });
        }
        Ok(())
    }
}

/// Dissipation and slope bounds for the cubic `f(s) = s (s - kappa) (1 - s)`:
/// `f(s) s <= -lambda s^4 + phi_bar` and `f'(s) <= beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearityBounds<T> {
    pub kappa: T,
    pub lambda: T,
    pub beta: T,
    pub phi_bar: T,
}

impl<T: Scalar> NonlinearityBounds<T> {
    /// Bounds for the prototype cubic: `lambda = 1/4`, `phi_bar = (1+kappa)^4 / 4`,
    /// `beta = (1+kappa)^2 / 3`.
    pub fn prototype(kappa: T) -> Result<Self> {
        if !(kappa > T::zero()) || !kappa.is_finite() {
            return Err(Error::InvalidParameter {
                name: "kappa",
                reason: format!("must be positive and finite, got {kappa}"),
            });
        }
        let s = T::one() + kappa;
        Ok(Self {
            kappa,
            lambda: T::lit(0.25),
            beta: s * s / T::lit(3.0),
            phi_bar: s.powi(4) / T::lit(4.0),
        })
    }

    #[inline]
    pub fn eval(&self, s: T) -> T {
        s * (s - self.kappa) * (T::one() - s)
    }

    #[inline]
    pub fn derivative(&self, s: T) -> T {
        let three = T::lit(3.0);
        let two = T::lit(2.0);
        -three * s * s + two * (T::one() + self.kappa) * s - self.kappa
    }

    /// Location `(1 + kappa) / 3` of the maximum of `f'`.
    pub fn derivative_argmax(&self) -> T {
        (T::one() + self.kappa) / T::lit(3.0)
    }

    pub fn derivative_max(&self) -> T {
        self.derivative(self.derivative_argmax())
    }
}

/// `f(s) = s (s - kappa) (1 - s)`.
pub fn f_eval<T: Scalar>(s: T, bounds: &NonlinearityBounds<T>) -> T {
    bounds.eval(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssumptionKind {
    /// `f(s) s <= -lambda s^4 + phi_bar`
    Dissipation,
    /// `f'(s) <= beta`
    Slope,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation<T> {
    pub s: T,
    pub kind: AssumptionKind,
    /// Amount by which the left side exceeds the right side.
    pub excess: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport<T> {
    pub samples: usize,
    pub violations: Vec<Violation<T>>,
    /// `f'` at its closed-form maximiser, compared against `beta` regardless of sampling.
    pub slope_max: T,
    pub slope_max_ok: bool,
}

impl<T: Scalar> AssumptionReport<T> {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.slope_max_ok
    }
}

/// Checks both inequalities of the nonlinearity assumption on `n_samples`
/// equally spaced points of `[lo, hi]`, plus the analytic maximum of `f'`.
pub fn verify_assumption<T: Scalar>(
    bounds: &NonlinearityBounds<T>,
    range: (T, T),
    n_samples: usize,
) -> Result<AssumptionReport<T>> {
    if n_samples < 100 {
        return Err(Error::InvalidParameter {
            name: "n_samples",
            reason: format!("need at least 100 samples, got {n_samples}"),
        });
    }
    let (lo, hi) = range;
    if !(hi > lo) {
        return Err(Error::InvalidParameter {
            name: "sample_range",
            reason: format!("empty interval [{lo}, {hi}]"),
        });
    }
    let step = (hi - lo) / T::from_usize_lossy(n_samples - 1);
    let mut violations = Vec::new();
    for n in 0..n_samples {
        let s = lo + step * T::from_usize_lossy(n);
        let lhs = bounds.eval(s) * s;
        let rhs = -bounds.lambda * s.powi(4) + bounds.phi_bar;
        if lhs > rhs {
            violations.push(Violation {
                s,
                kind: AssumptionKind::Dissipation,
                excess: lhs - rhs,
            });
        }
        let slope = bounds.derivative(s);
        if slope > bounds.beta {
            violations.push(Violation {
                s,
                kind: AssumptionKind::Slope,
                excess: slope - bounds.beta,
            });
        }
    }
    let slope_max = bounds.derivative_max();
    Ok(AssumptionReport {
        samples: n_samples,
        violations,
        slope_max,
        slope_max_ok: slope_max <= bounds.beta,
    })
}

/// Potential, recovery and memductance fields of all `m` neurons on one grid.
///
/// Each stack stores neuron `i` in `[i * n, (i + 1) * n)` with `n = nx * ny`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState<T> {
    grid: Grid2D<T>,
    neurons: usize,
    pub(crate) u: Vec<T>,
    pub(crate) w: Vec<T>,
    pub(crate) rho: Vec<T>,
    pub t: T,
}

impl<T: Scalar> NetworkState<T> {
    pub fn zeros(grid: Grid2D<T>, neurons: usize) -> Self {
        let n = grid.len() * neurons;
        Self {
            grid,
            neurons,
            u: vec![T::zero(); n],
            w: vec![T::zero(); n],
            rho: vec![T::zero(); n],
            t: T::zero(),
        }
    }

    /// Builds a state from flat stacks laid out neuron after neuron.
    pub fn from_stacks(grid: Grid2D<T>, neurons: usize, u: Vec<T>, w: Vec<T>, rho: Vec<T>, t: T) -> Result<Self> {
        let n = grid.len() * neurons;
        if u.len() != n || w.len() != n || rho.len() != n {
            return Err(Error::InvalidParameter {
                name: "state",
                reason: format!(
                    "stacks must hold {n} values each, got u={}, w={}, rho={}",
                    u.len(),
                    w.len(),
                    rho.len()
                ),
            });
        }
        Ok(Self {
            grid,
            neurons,
            u,
            w,
            rho,
            t,
        })
    }

    /// Spatially constant state with per-neuron values `(u_i, w_i, rho_i)`.
    pub fn uniform(grid: Grid2D<T>, values: &[(T, T, T)]) -> Self {
        let n = grid.len();
        let mut s = Self::zeros(grid, values.len());
        for (i, &(u, w, rho)) in values.iter().enumerate() {
            s.u[i * n..(i + 1) * n].fill(u);
            s.w[i * n..(i + 1) * n].fill(w);
            s.rho[i * n..(i + 1) * n].fill(rho);
        }
        s
    }

    #[inline]
    pub fn grid(&self) -> &Grid2D<T> {
        &self.grid
    }

    #[inline]
    pub fn neurons(&self) -> usize {
        self.neurons
    }

    #[inline]
    fn span(&self, i: usize) -> std::ops::Range<usize> {
        let n = self.grid.len();
        i * n..(i + 1) * n
    }

    pub fn u(&self, i: usize) -> &[T] {
        &self.u[self.span(i)]
    }

    pub fn w(&self, i: usize) -> &[T] {
        &self.w[self.span(i)]
    }

    pub fn rho(&self, i: usize) -> &[T] {
        &self.rho[self.span(i)]
    }

    pub fn u_mut(&mut self, i: usize) -> &mut [T] {
        let r = self.span(i);
        &mut self.u[r]
    }

    pub fn w_mut(&mut self, i: usize) -> &mut [T] {
        let r = self.span(i);
        &mut self.w[r]
    }

    pub fn rho_mut(&mut self, i: usize) -> &mut [T] {
        let r = self.span(i);
        &mut self.rho[r]
    }

    pub fn component(&self, c: Component, i: usize) -> &[T] {
        match c {
            Component::Potential => self.u(i),
            Component::Recovery => self.w(i),
            Component::Memductance => self.rho(i),
        }
    }

    /// Copies one neuron's field out as a [`Field2D`].
    pub fn field(&self, c: Component, i: usize) -> Field2D<T> {
        Field2D::from_values(self.grid, self.component(c, i).to_vec()).expect("state stacks are sized by the grid")
    }

    pub fn u_stack(&self) -> &[T] {
        &self.u
    }

    pub fn w_stack(&self) -> &[T] {
        &self.w
    }

    pub fn rho_stack(&self) -> &[T] {
        &self.rho
    }

    /// Values of every neuron at grid point `(i, j)` for one component.
    pub fn point_values(&self, c: Component, i: usize, j: usize) -> Vec<T> {
        let idx = self.grid.index(i, j);
        (0..self.neurons).map(|n| self.component(c, n)[idx]).collect()
    }

    /// Relabels neurons: neuron `k` of the result is neuron `order[k]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        assert_eq!(order.len(), self.neurons, "permutation length");
        let mut out = Self::zeros(self.grid, self.neurons);
        out.t = self.t;
        for (k, &src) in order.iter().enumerate() {
            out.u_mut(k).copy_from_slice(self.u(src));
            out.w_mut(k).copy_from_slice(self.w(src));
            out.rho_mut(k).copy_from_slice(self.rho(src));
        }
        out
    }

    /// First non-finite entry, scanning u, then w, then rho.
    pub fn check_finite(&self) -> Result<()> {
        let n = self.grid.len();
        for (component, stack) in [
            (Component::Potential, &self.u),
            (Component::Recovery, &self.w),
            (Component::Memductance, &self.rho),
        ] {
            if let Some(pos) = stack.iter().position(|v| !v.is_finite()) {
                let (x, y) = self.grid.point(pos % n);
                return Err(Error::NonFinite {
                    component,
                    neuron: pos / n,
                    x,
                    y,
                });
            }
        }
        Ok(())
    }
}

/// Fills all `3m` fields with independent uniform draws from `[0, amplitude)`.
///
/// Draw order is u_1..u_m, then w_1..w_m, then rho_1..rho_m, each row-major.
/// The generator is ChaCha8 seeded from `seed`, so the result depends only on
/// `(grid, neurons, amplitude, seed)`.
pub fn init_random<T: Scalar>(grid: Grid2D<T>, neurons: usize, amplitude: T, seed: u64) -> Result<NetworkState<T>> {
    if !(amplitude >= T::zero()) || !amplitude.is_finite() {
        return Err(Error::InvalidParameter {
            name: "amplitude",
            reason: format!("must be nonnegative and finite, got {amplitude}"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = NetworkState::zeros(grid, neurons);
    for stack in [&mut state.u, &mut state.w, &mut state.rho] {
        for v in stack.iter_mut() {
            *v = T::lit(rng.gen::<f64>()) * amplitude;
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn proto() -> NonlinearityBounds<f64> {
        NonlinearityBounds::prototype(1.0).unwrap()
    }

    #[test]
    fn cubic_roots_and_tail() {
        let b = NonlinearityBounds::prototype(0.3).unwrap();
        assert_eq!(f_eval(0.0, &b), 0.0);
        assert_eq!(f_eval(1.0, &b), 0.0);
        assert_eq!(f_eval(0.3, &b), 0.0);
        assert!(f_eval(1e3, &b) < 0.0);
        assert!(f_eval(-1e3, &b) > 0.0);
    }

    #[test]
    fn prototype_bounds_for_unit_kappa() {
        let b = proto();
        assert_eq!(b.lambda, 0.25);
        assert_eq!(b.phi_bar, 4.0);
        assert!((b.beta - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let b = NonlinearityBounds::prototype(0.7).unwrap();
        for k in -20..=20 {
            let s = k as f64 * 0.25;
            let h = 1e-6;
            let fd = (b.eval(s + h) - b.eval(s - h)) / (2.0 * h);
            assert!((fd - b.derivative(s)).abs() < 1e-6, "s = {s}");
        }
    }

    #[test]
    fn assumption_holds_for_prototype() {
        let r = verify_assumption(&proto(), (-10.0, 10.0), 10_000).unwrap();
        assert!(r.passed(), "{:?}", &r.violations[..r.violations.len().min(3)]);

        let r = verify_assumption(&proto(), (-100.0, 100.0), 100_000).unwrap();
        assert!(r.passed());

        for kappa in [0.05, 0.3, 2.0, 7.5] {
            let b = NonlinearityBounds::prototype(kappa).unwrap();
            assert!(verify_assumption(&b, (-10.0, 10.0), 10_000).unwrap().passed());
        }
    }

    #[test]
    fn halved_slope_bound_is_violated_near_argmax() {
        // Max f' = (1+kappa)^2/3 - kappa exceeds beta/2 only for kappa outside
        // [2 - sqrt 3, 2 + sqrt 3]; kappa = 0.1 is such a case.
        let mut b = NonlinearityBounds::prototype(0.1f64).unwrap();
        b.beta /= 2.0;
        let r = verify_assumption(&b, (-10.0, 10.0), 10_000).unwrap();
        let slope: Vec<_> = r
            .violations
            .iter()
            .filter(|v| v.kind == AssumptionKind::Slope)
            .collect();
        assert!(!slope.is_empty());
        assert!(!r.slope_max_ok);
        let worst = slope.iter().max_by(|a, b| a.excess.total_cmp(&b.excess)).unwrap();
        assert!((worst.s - 1.1 / 3.0).abs() < 2e-3);
        assert!(slope.iter().all(|v| (v.s - 1.1 / 3.0).abs() < 0.5));
    }

    #[test]
    fn zero_lambda_only_weakens_dissipation() {
        let mut b = proto();
        b.lambda = 0.0;
        let r = verify_assumption(&b, (-10.0, 10.0), 10_000).unwrap();
        assert!(r.violations.iter().all(|v| v.kind != AssumptionKind::Dissipation));
    }

    #[test]
    fn too_few_samples_rejected() {
        assert!(verify_assumption(&proto(), (-1.0, 1.0), 99).is_err());
    }

    #[test]
    fn params_validation() {
        let p = NetworkParams::<f64>::reference();
        assert!(p.validate().is_ok());
        let mut q = p.clone();
        q.coupling = 0.0;
        assert!(q.validate().is_ok());
        q.reference_potential = -3.0;
        assert!(q.validate().is_ok());
        q.neurons = 1;
        assert!(q.validate().is_err());
        let mut q = p.clone();
        q.recovery_coupling = 0.0;
        assert!(matches!(
            q.validate(),
            Err(Error::InvalidParameter { name: "sigma", .. })
        ));
    }

    #[test]
    fn random_init_is_seeded_and_bounded() {
        let g = Grid2D::new(8, 6, 1.0).unwrap();
        let a = init_random(g, 3, 0.05, 42).unwrap();
        let b = init_random(g, 3, 0.05, 42).unwrap();
        assert_eq!(a, b);
        let c = init_random(g, 3, 0.05, 43).unwrap();
        assert_ne!(a, c);
        for s in [a.u_stack(), a.w_stack(), a.rho_stack()] {
            assert!(s.iter().all(|&v| (0.0..=0.05).contains(&v)));
        }
        let z = init_random(g, 3, 0.0, 7).unwrap();
        assert!(z.u_stack().iter().chain(z.rho_stack()).all(|&v| v == 0.0));
        assert!(init_random(g, 3, -1.0, 7).is_err());
    }

    #[test]
    fn non_finite_is_located() {
        let g = Grid2D::new(4, 4, 1.0).unwrap();
        let mut s = NetworkState::zeros(g, 2);
        s.w_mut(1)[g.index(2, 3)] = f64::NAN;
        match s.check_finite() {
            Err(Error::NonFinite {
                component,
                neuron,
                x,
                y,
            }) => {
                assert_eq!(component, Component::Recovery);
                assert_eq!((neuron, x, y), (1, 2, 3));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}

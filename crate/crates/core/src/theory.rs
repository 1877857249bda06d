//! Closed-form constants of the dissipativity and synchronization estimates:
//! the energy scaling `C1`, the source constant `C2`, the Gronwall rate `mu`,
//! the absorbing radius `K`, the L4 constant `Q`, the coupling threshold
//! `Gamma` and the synchronization rate `alpha(P)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::Grid2D;
use crate::model::{NetworkParams, NonlinearityBounds};
use crate::scalar::Scalar;

/// Default Gagliardo-Nirenberg coefficient.
pub const DEFAULT_C_STAR: f64 = 0.4;

/// Values substituted for `||phi||^2` and `|Omega|` in the `K` and `Q` formulas.
///
/// The two formulas take separate measures so that either reading of the
/// domain size can be used on each side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormConventions<T> {
    pub phi_norm_sq: T,
    pub omega_measure_k: T,
    pub omega_measure_q: T,
}

impl<T: Scalar> NormConventions<T> {
    pub fn new(phi_norm_sq: T, omega_measure_k: T, omega_measure_q: T) -> Result<Self> {
        for (name, v) in [
            ("phi_norm_sq", phi_norm_sq),
            ("omega_measure_K", omega_measure_k),
            ("omega_measure_Q", omega_measure_q),
        ] {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be nonnegative and finite, got {v}"),
                });
            }
        }
        Ok(Self {
            phi_norm_sq,
            omega_measure_k,
            omega_measure_q,
        })
    }

    /// Integral convention: `||phi||^2 = phi_bar^2 |Omega|`, `|Omega| = nx ny dx^2` on both sides.
    pub fn integral(bounds: &NonlinearityBounds<T>, grid: &Grid2D<T>) -> Self {
        let omega = grid.measure();
        Self {
            phi_norm_sq: bounds.phi_bar * bounds.phi_bar * omega,
            omega_measure_k: omega,
            omega_measure_q: omega,
        }
    }

    /// Pointwise convention matching the reference constants: `||phi||^2 = phi_bar^2`,
    /// `|Omega|` in `K`, and `|Omega|^{1/2}` in `Q`. On a 32x32 unit grid with
    /// `phi_bar = 4` this is `(16, 1024, 32)`.
    pub fn reconciled(bounds: &NonlinearityBounds<T>, grid: &Grid2D<T>) -> Self {
        let omega = grid.measure();
        Self {
            phi_norm_sq: bounds.phi_bar * bounds.phi_bar,
            omega_measure_k: omega,
            omega_measure_q: omega.sqrt(),
        }
    }
}

/// `C1 = b lambda / (2 sigma^2)`.
pub fn compute_c1<T: Scalar>(params: &NetworkParams<T>, bounds: &NonlinearityBounds<T>) -> T {
    // Dividing by sigma twice avoids rounding sigma^2 first.
    let s = params.recovery_coupling;
    params.b * bounds.lambda / T::lit(2.0) / s / s
}

/// `C2 = C1 + C1/(2 lambda) ((lambda + k)^2 + J^2) + c^2/b
///       + 4 sigma^2/(b lambda^2) (a^2/b + q^2/(2r))^2`.
pub fn compute_c2<T: Scalar>(params: &NetworkParams<T>, bounds: &NonlinearityBounds<T>, c1: T) -> T {
    let two = T::lit(2.0);
    let lambda = bounds.lambda;
    let p = params;
    let lk = lambda + p.memristor_strength;
    let j = p.reference_potential;
    let inner = p.a * p.a / p.b + p.q * p.q / (two * p.r);
    let sigma2 = p.recovery_coupling * p.recovery_coupling;
    c1 + c1 / (two * lambda) * (lk * lk + j * j)
        + p.c * p.c / p.b
        + T::lit(4.0) * sigma2 / (p.b * lambda * lambda) * inner * inner
}

/// `mu = min{2a^2/b + q^2/r, b/2, r}`.
pub fn compute_mu<T: Scalar>(params: &NetworkParams<T>) -> T {
    let p = params;
    let first = T::lit(2.0) * p.a * p.a / p.b + p.q * p.q / p.r;
    first.min(p.b / T::lit(2.0)).min(p.r)
}

/// Absorbing radius `K = 1 + 2m/(mu min{C1, 1}) (C1 ||phi||^2 + C2 |Omega|)`.
pub fn compute_k<T: Scalar>(params: &NetworkParams<T>, c1: T, c2: T, conv: &NormConventions<T>) -> Result<T> {
    let mu = compute_mu(params);
    if !(mu > T::zero()) {
        return Err(Error::ThresholdUndefined);
    }
    let m = T::from_usize_lossy(params.neurons);
    Ok(T::one() + T::lit(2.0) * m / (mu * c1.min(T::one())) * (c1 * conv.phi_norm_sq + c2 * conv.omega_measure_k))
}

/// `Q = 18 sigma^2/lambda^2 K + m [18/lambda^2 ||phi||^2
///      + (3/2 + 18 J^2/lambda^2 + 18 k^3/lambda^3) |Omega|]`.
pub fn compute_q<T: Scalar>(
    params: &NetworkParams<T>,
    bounds: &NonlinearityBounds<T>,
    k_radius: T,
    conv: &NormConventions<T>,
) -> T {
    let eighteen = T::lit(18.0);
    let l = bounds.lambda;
    let l2 = l * l;
    let sigma2 = params.recovery_coupling * params.recovery_coupling;
    let j = params.reference_potential;
    let k = params.memristor_strength;
    let m = T::from_usize_lossy(params.neurons);
    eighteen * sigma2 / l2 * k_radius
        + m * (eighteen / l2 * conv.phi_norm_sq
            + (T::lit(1.5) + eighteen * j * j / l2 + eighteen * k * k * k / (l2 * l)) * conv.omega_measure_q)
}

/// `beta + k + |a - sigma|^2/(2b) + q^2/r + C*^4 k^8 (1+Q)^2 / (eta^3 r^4)`,
/// the bracket shared by `Gamma` and `alpha`.
fn threshold_bracket<T: Scalar>(params: &NetworkParams<T>, bounds: &NonlinearityBounds<T>, q: T, c_star: T) -> T {
    let p = params;
    let k = p.memristor_strength;
    let diff = p.a - p.recovery_coupling;
    let one_q = T::one() + q;
    bounds.beta
        + k
        + diff * diff / (T::lit(2.0) * p.b)
        + p.q * p.q / p.r
        + c_star.powi(4) * k.powi(8) * one_q * one_q / (p.diffusion.powi(3) * p.r.powi(4))
}

/// Coupling threshold `Gamma`: `P > Gamma` guarantees exponential synchronization.
pub fn compute_gamma<T: Scalar>(params: &NetworkParams<T>, bounds: &NonlinearityBounds<T>, q: T, c_star: T) -> T {
    threshold_bracket(params, bounds, q, c_star) / T::from_usize_lossy(params.neurons)
}

/// `alpha(P) = min{b, r, 2mP - 2 * bracket}`. Nonpositive when `P <= Gamma`.
pub fn compute_alpha<T: Scalar>(
    params: &NetworkParams<T>,
    bounds: &NonlinearityBounds<T>,
    q: T,
    c_star: T,
    coupling: T,
) -> T {
    let two = T::lit(2.0);
    let m = T::from_usize_lossy(params.neurons);
    let third = two * m * coupling - two * threshold_bracket(params, bounds, q, c_star);
    params.b.min(params.r).min(third)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryConstants<T> {
    pub c1: T,
    pub c2: T,
    pub mu: T,
    pub k: T,
    pub q: T,
    pub gamma: T,
    /// Rate for the configured coupling strength.
    pub alpha: T,
    pub c_star: T,
    pub conventions: NormConventions<T>,
}

impl<T: Scalar> TheoryConstants<T> {
    /// `1 + Q`, the L4 bound.
    pub fn one_plus_q(&self) -> T {
        T::one() + self.q
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// `P > Gamma`: exponential synchronization at rate `alpha` is guaranteed.
    Guaranteed,
    /// `P <= Gamma`: the sufficient condition fails; nothing is asserted either way.
    NoGuarantee,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Guaranteed => "synchronization guaranteed",
            Verdict::NoGuarantee => "no guarantee (sufficient condition not met)",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdReport<T> {
    pub constants: TheoryConstants<T>,
    pub coupling: T,
    pub neurons: usize,
    pub verdict: Verdict,
}

impl<T: Scalar> fmt::Display for ThresholdReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.constants;
        let rows: [(&str, T); 10] = [
            ("C1", c.c1),
            ("C2", c.c2),
            ("mu", c.mu),
            ("K", c.k),
            ("1+Q", c.one_plus_q()),
            ("C*", c.c_star),
            ("Gamma", c.gamma),
            ("P", self.coupling),
            ("alpha", c.alpha),
            ("m", T::from_usize_lossy(self.neurons)),
        ];
        for (name, v) in rows {
            writeln!(f, "{name:<8}{:>24.6}", v.as_f64())?;
        }
        writeln!(
            f,
            "conventions: ||phi||^2 = {}, |Omega|_K = {}, |Omega|_Q = {}",
            c.conventions.phi_norm_sq, c.conventions.omega_measure_k, c.conventions.omega_measure_q
        )?;
        write!(f, "verdict: {}", self.verdict)
    }
}

/// Evaluates every constant for `params` and decides the threshold condition.
pub fn threshold_report<T: Scalar>(
    params: &NetworkParams<T>,
    bounds: &NonlinearityBounds<T>,
    c_star: T,
    conv: &NormConventions<T>,
) -> Result<ThresholdReport<T>> {
    params.validate()?;
    let c1 = compute_c1(params, bounds);
    let c2 = compute_c2(params, bounds, c1);
    let mu = compute_mu(params);
    let k = compute_k(params, c1, c2, conv)?;
    let q = compute_q(params, bounds, k, conv);
    let gamma = compute_gamma(params, bounds, q, c_star);
    let alpha = compute_alpha(params, bounds, q, c_star, params.coupling);
    let verdict = if params.coupling > gamma {
        Verdict::Guaranteed
    } else {
        Verdict::NoGuarantee
    };
    Ok(ThresholdReport {
        constants: TheoryConstants {
            c1,
            c2,
            mu,
            k,
            q,
            gamma,
            alpha,
            c_star,
            conventions: *conv,
        },
        coupling: params.coupling,
        neurons: params.neurons,
        verdict,
    })
}

//! Grid norms, pairwise neuron differences, decay-rate fits and the
//! dissipativity / synchronization checks.
//!
//! Every norm is a midpoint quadrature: `||v||^2 = dx^2 * Σ v^2`. Pair data are
//! stored for `i < j` only, in lexicographic order `(0,1), (0,2), .., (m-2,m-1)`.

use crate::error::{Component, Error, Result};
use crate::grid::Field2D;
use crate::model::NetworkState;
use crate::scalar::Scalar;

/// `dx^2 * Σ v^2` over a flat slice.
pub fn l2_norm_sq_slice<T: Scalar>(values: &[T], dx: T) -> T {
    let s: T = values.iter().map(|&v| v * v).sum();
    s * dx * dx
}

/// `dx^2 * Σ v^4` over a flat slice.
pub fn l4_norm_4_slice<T: Scalar>(values: &[T], dx: T) -> T {
    let s: T = values
        .iter()
        .map(|&v| {
            let v2 = v * v;
            v2 * v2
        })
        .sum();
    s * dx * dx
}

pub fn l2_norm_sq<T: Scalar>(field: &Field2D<T>) -> T {
    l2_norm_sq_slice(field.values(), field.grid().dx())
}

pub fn l4_norm_4<T: Scalar>(field: &Field2D<T>) -> T {
    l4_norm_4_slice(field.values(), field.grid().dx())
}

fn diff_norm_sq<T: Scalar>(a: &[T], b: &[T], dx: T) -> T {
    let s: T = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x - y;
            d * d
        })
        .sum();
    s * dx * dx
}

/// Number of unordered neuron pairs.
#[inline]
pub fn pair_count(m: usize) -> usize {
    m * m.saturating_sub(1) / 2
}

/// Position of pair `(i, j)`, `i < j`, in the lexicographic pair order.
#[inline]
pub fn pair_index(m: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < m);
    i * (2 * m - i - 1) / 2 + (j - i - 1)
}

/// Iterator over `(i, j)` with `i < j` in storage order.
pub fn pairs(m: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..m).flat_map(move |i| (i + 1..m).map(move |j| (i, j)))
}

/// Symmetric matrix of pairwise quantities with the diagonal fixed at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PairMatrix<T> {
    m: usize,
    values: Vec<T>,
}

impl<T: Scalar> PairMatrix<T> {
    pub fn from_values(m: usize, values: Vec<T>) -> Self {
        assert_eq!(values.len(), pair_count(m));
        Self { m, values }
    }

    pub fn neurons(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => T::zero(),
            std::cmp::Ordering::Less => self.values[pair_index(self.m, i, j)],
            std::cmp::Ordering::Greater => self.values[pair_index(self.m, j, i)],
        }
    }

    /// Values in lexicographic `i < j` order.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn total(&self) -> T {
        self.values.iter().copied().sum()
    }
}

/// `||X_i - X_j||^2` for one component `X`.
pub fn pairwise_component_differences<T: Scalar>(state: &NetworkState<T>, component: Component) -> PairMatrix<T> {
    let m = state.neurons();
    let dx = state.grid().dx();
    let values = pairs(m)
        .map(|(i, j)| diff_norm_sq(state.component(component, i), state.component(component, j), dx))
        .collect();
    PairMatrix { m, values }
}

/// `D_ij = ||u_i - u_j||^2 + ||w_i - w_j||^2 + ||rho_i - rho_j||^2`.
pub fn pairwise_differences<T: Scalar>(state: &NetworkState<T>) -> PairMatrix<T> {
    let m = state.neurons();
    let dx = state.grid().dx();
    let values = pairs(m)
        .map(|(i, j)| {
            diff_norm_sq(state.u(i), state.u(j), dx)
                + diff_norm_sq(state.w(i), state.w(j), dx)
                + diff_norm_sq(state.rho(i), state.rho(j), dx)
        })
        .collect();
    PairMatrix { m, values }
}

/// One sampled row of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord<T> {
    pub t: T,
    /// `||u_i||`
    pub u_norm: Vec<T>,
    pub w_norm: Vec<T>,
    pub rho_norm: Vec<T>,
    /// `||g_i||^2 = ||u_i||^2 + ||w_i||^2 + ||rho_i||^2`
    pub g_norm_sq: Vec<T>,
    /// `Σ_i ||g_i||^2`
    pub total_energy: T,
    /// `Σ_i ||u_i||_{L4}^4`
    pub u_l4_total: T,
    /// `D_ij` in lexicographic pair order.
    pub pairs: Vec<T>,
}

impl<T: Scalar> MetricsRecord<T> {
    pub fn from_state(state: &NetworkState<T>) -> Self {
        let m = state.neurons();
        let dx = state.grid().dx();
        let mut u_norm = Vec::with_capacity(m);
        let mut w_norm = Vec::with_capacity(m);
        let mut rho_norm = Vec::with_capacity(m);
        let mut g_norm_sq = Vec::with_capacity(m);
        let mut u_l4_total = T::zero();
        for i in 0..m {
            let uu = l2_norm_sq_slice(state.u(i), dx);
            let ww = l2_norm_sq_slice(state.w(i), dx);
            let rr = l2_norm_sq_slice(state.rho(i), dx);
            u_norm.push(uu.sqrt());
            w_norm.push(ww.sqrt());
            rho_norm.push(rr.sqrt());
            g_norm_sq.push(uu + ww + rr);
            u_l4_total = u_l4_total + l4_norm_4_slice(state.u(i), dx);
        }
        let total_energy = g_norm_sq.iter().copied().sum();
        Self {
            t: state.t,
            u_norm,
            w_norm,
            rho_norm,
            g_norm_sq,
            total_energy,
            u_l4_total,
            pairs: pairwise_differences(state).values,
        }
    }

    pub fn pair_total(&self) -> T {
        self.pairs.iter().copied().sum()
    }
}

/// Time series of [`MetricsRecord`]s for an `m`-neuron run.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsSeries<T> {
    neurons: usize,
    records: Vec<MetricsRecord<T>>,
}

impl<T: Scalar> MetricsSeries<T> {
    pub fn new(neurons: usize) -> Self {
        Self {
            neurons,
            records: Vec::new(),
        }
    }

    pub fn neurons(&self) -> usize {
        self.neurons
    }

    /// Appends a row. Times must increase strictly and widths must match `m`.
    pub fn push(&mut self, rec: MetricsRecord<T>) -> Result<()> {
        let m = self.neurons;
        if rec.u_norm.len() != m
            || rec.w_norm.len() != m
            || rec.rho_norm.len() != m
            || rec.g_norm_sq.len() != m
            || rec.pairs.len() != pair_count(m)
        {
            return Err(Error::InvalidParameter {
                name: "record",
                reason: format!("row width does not match {m} neurons"),
            });
        }
        if let Some(last) = self.records.last() {
            if !(rec.t > last.t) {
                return Err(Error::InvalidParameter {
                    name: "record",
                    reason: format!("time {} does not follow {}", rec.t, last.t),
                });
            }
        }
        self.records.push(rec);
        Ok(())
    }

    pub fn records(&self) -> &[MetricsRecord<T>] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn times(&self) -> Vec<T> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn total_energy(&self) -> Vec<T> {
        self.records.iter().map(|r| r.total_energy).collect()
    }

    pub fn u_l4_total(&self) -> Vec<T> {
        self.records.iter().map(|r| r.u_l4_total).collect()
    }

    pub fn pair(&self, i: usize, j: usize) -> Vec<T> {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        let k = pair_index(self.neurons, i, j);
        self.records.iter().map(|r| r.pairs[k]).collect()
    }

    pub fn pair_total(&self) -> Vec<T> {
        self.records.iter().map(|r| r.pair_total()).collect()
    }

    /// Column headers in file order: `t`, four per-neuron blocks, the two
    /// totals, then `D_i_j` (1-based) for `i < j`.
    pub fn column_names(&self) -> Vec<String> {
        column_names(self.neurons)
    }

    /// Values of the named column, or [`Error::UnknownColumn`].
    pub fn column(&self, name: &str) -> Result<Vec<T>> {
        let names = self.column_names();
        let idx = names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))?;
        Ok(self.records.iter().map(|r| row_values(r)[idx]).collect())
    }
}

pub fn column_names(m: usize) -> Vec<String> {
    let mut names = vec!["t".to_string()];
    for prefix in ["u_norm", "w_norm", "rho_norm", "g_norm_sq"] {
        names.extend((1..=m).map(|i| format!("{prefix}_{i}")));
    }
    names.push("total_energy".into());
    names.push("u_l4_total".into());
    names.extend(pairs(m).map(|(i, j)| format!("D_{}_{}", i + 1, j + 1)));
    names
}

/// Flattens a record in [`column_names`] order.
pub fn row_values<T: Scalar>(r: &MetricsRecord<T>) -> Vec<T> {
    let mut row = Vec::with_capacity(1 + 4 * r.u_norm.len() + 2 + r.pairs.len());
    row.push(r.t);
    row.extend_from_slice(&r.u_norm);
    row.extend_from_slice(&r.w_norm);
    row.extend_from_slice(&r.rho_norm);
    row.extend_from_slice(&r.g_norm_sq);
    row.push(r.total_energy);
    row.push(r.u_l4_total);
    row.extend_from_slice(&r.pairs);
    row
}

/// Finite-horizon surrogate of the asynchronous degree: the sum over pairs of
/// the largest `D_ij` seen in the last `ceil(tail_fraction * len)` rows.
pub fn asynchronous_degree_estimate<T: Scalar>(series: &MetricsSeries<T>, tail_fraction: f64) -> Result<T> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "tail_fraction",
            reason: format!("must lie in (0, 1], got {tail_fraction}"),
        });
    }
    let n = series.len();
    let take = (tail_fraction * n as f64).ceil() as usize;
    if take == 0 {
        return Err(Error::EmptyTail);
    }
    let tail = &series.records[n - take..];
    let mut total = T::zero();
    for k in 0..pair_count(series.neurons) {
        let worst = tail.iter().fold(T::zero(), |acc, r| acc.max(r.pairs[k]));
        total = total + worst;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit<T> {
    pub window: (T, T),
    /// Negated least-squares slope of `ln D` against `t`.
    pub rate: T,
    pub r_squared: T,
    pub samples: usize,
}

/// What [`fit_decay_rate`] regresses: one pair or the sum over all pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayTarget {
    Pair(usize, usize),
    Total,
}

pub const MIN_FIT_SAMPLES: usize = 10;

/// Least-squares fit of `ln y = c - rate * t` over samples with `t` in `window`.
pub fn fit_log_linear<T: Scalar>(times: &[T], values: &[T], window: (T, T)) -> Result<DecayFit<T>> {
    let (t0, t1) = window;
    if !(t1 > t0) {
        return Err(Error::InvalidParameter {
            name: "window",
            reason: format!("empty window [{t0}, {t1}]"),
        });
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &v) in times.iter().zip(values) {
        if t < t0 || t > t1 {
            continue;
        }
        if !(v > T::zero()) {
            return Err(Error::NonPositive {
                time: t.as_f64(),
                value: v.as_f64(),
            });
        }
        xs.push(t.as_f64());
        ys.push(v.as_f64().ln());
    }
    if xs.len() < MIN_FIT_SAMPLES {
        return Err(Error::WindowTooShort {
            got: xs.len(),
            need: MIN_FIT_SAMPLES,
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    Ok(DecayFit {
        window,
        rate: T::lit(-slope),
        r_squared: T::lit(r_squared),
        samples: xs.len(),
    })
}

pub fn fit_decay_rate<T: Scalar>(
    series: &MetricsSeries<T>,
    target: DecayTarget,
    window: (T, T),
) -> Result<DecayFit<T>> {
    let values = match target {
        DecayTarget::Pair(i, j) => series.pair(i, j),
        DecayTarget::Total => series.pair_total(),
    };
    fit_log_linear(&series.times(), &values, window)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbsorbingReport<T> {
    pub bound: T,
    /// First recorded time with total energy `<= bound`.
    pub entry_time: Option<T>,
    /// First recorded time after entry at which the energy is back above the bound.
    pub excursion_time: Option<T>,
    pub max_energy: T,
}

impl<T: Scalar> AbsorbingReport<T> {
    pub fn passed(&self) -> bool {
        self.entry_time.is_some() && self.excursion_time.is_none()
    }
}

/// Empirical absorbing-ball entry for `Σ_i ||g_i||^2 <= bound`.
pub fn absorbing_check<T: Scalar>(series: &MetricsSeries<T>, bound: T) -> AbsorbingReport<T> {
    let mut entry_time = None;
    let mut excursion_time = None;
    let mut max_energy = T::zero();
    for r in series.records() {
        max_energy = max_energy.max(r.total_energy);
        let inside = r.total_energy <= bound;
        match (entry_time, inside) {
            (None, true) => entry_time = Some(r.t),
            (Some(_), false) if excursion_time.is_none() => excursion_time = Some(r.t),
            _ => {}
        }
    }
    AbsorbingReport {
        bound,
        entry_time,
        excursion_time,
        max_energy,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct L4Report<T> {
    pub bound: T,
    pub tail_start: Option<T>,
    pub tail_max: T,
    /// First tail sample at or above the bound.
    pub violation_time: Option<T>,
}

impl<T: Scalar> L4Report<T> {
    pub fn passed(&self) -> bool {
        self.violation_time.is_none()
    }
}

/// Checks that the last 20% of `Σ_i ||u_i||^4_{L4}` stays below `1 + q`.
pub fn l4_bound_check<T: Scalar>(series: &MetricsSeries<T>, q: T) -> L4Report<T> {
    let bound = T::one() + q;
    let n = series.len();
    let take = (0.2 * n as f64).ceil() as usize;
    let tail = &series.records()[n - take..];
    let mut tail_max = T::zero();
    let mut violation_time = None;
    for r in tail {
        tail_max = tail_max.max(r.u_l4_total);
        if !(r.u_l4_total < bound) && violation_time.is_none() {
            violation_time = Some(r.t);
        }
    }
    L4Report {
        bound,
        tail_start: tail.first().map(|r| r.t),
        tail_max,
        violation_time,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeReport<T> {
    pub alpha: T,
    pub slack: T,
    /// Recorded time used as the envelope anchor (first sample at or after the transient).
    pub anchor: T,
    /// Largest `D_ij(t) / (slack * D_ij(anchor) * exp(-alpha (t - anchor)))`; pass iff `<= 1`.
    pub worst_ratio: T,
    pub worst_pair: Option<(usize, usize)>,
    pub worst_time: Option<T>,
}

impl<T: Scalar> EnvelopeReport<T> {
    pub fn passed(&self) -> bool {
        self.worst_ratio <= T::one()
    }
}

pub const DEFAULT_ENVELOPE_SLACK: f64 = 1.5;

/// Verifies `D_ij(t) <= slack * D_ij(t0) * exp(-alpha (t - t0))` for every pair
/// and every recorded `t > t0`.
pub fn sync_envelope_check<T: Scalar>(
    series: &MetricsSeries<T>,
    alpha: T,
    transient: T,
    slack: T,
) -> Result<EnvelopeReport<T>> {
    let records = series.records();
    let start = records
        .iter()
        .position(|r| r.t >= transient)
        .ok_or_else(|| Error::InvalidParameter {
            name: "transient",
            reason: format!("{transient} lies beyond the recorded range"),
        })?;
    let anchor = &records[start];
    let mut worst_ratio = T::zero();
    let mut worst_pair = None;
    let mut worst_time = None;
    for (k, (i, j)) in pairs(series.neurons).enumerate() {
        let d0 = anchor.pairs[k];
        for r in &records[start + 1..] {
            let d = r.pairs[k];
            let env = slack * d0 * (-alpha * (r.t - anchor.t)).exp();
            let ratio = if d == T::zero() {
                T::zero()
            } else if env == T::zero() {
                T::infinity()
            } else {
                d / env
            };
            if ratio > worst_ratio {
                worst_ratio = ratio;
                worst_pair = Some((i, j));
                worst_time = Some(r.t);
            }
        }
    }
    Ok(EnvelopeReport {
        alpha,
        slack,
        anchor: anchor.t,
        worst_ratio,
        worst_pair,
        worst_time,
    })
}

//! Uniform 2-D grid, the zero-flux discrete Laplacian and the explicit
//! diffusion stability bound.
//!
//! Points are cell centres at `((i + 1/2) dx, (j + 1/2) dx)`, so the domain is
//! `[0, nx dx] x [0, ny dx]` and the homogeneous Neumann condition is realised
//! by mirroring each edge cell into its ghost neighbour. Storage is row-major
//! with `x` fastest: index `j * nx + i`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::NetworkParams;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D<T> {
    nx: usize,
    ny: usize,
    dx: T,
}

impl<T: Scalar> Grid2D<T> {
    pub fn new(nx: usize, ny: usize, dx: T) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(Error::InvalidParameter {
                name: "nx/ny",
                reason: format!("need at least 3 points per axis, got {nx}x{ny}"),
            });
        }
        if !(dx > T::zero()) || !dx.is_finite() {
            return Err(Error::InvalidParameter {
                name: "dx",
                reason: format!("spacing must be positive and finite, got {dx}"),
            });
        }
        Ok(Self { nx, ny, dx })
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.nx
    }

    #[inline]
    pub fn ny(&self) -> usize {
        self.ny
    }

    #[inline]
    pub fn dx(&self) -> T {
        self.dx
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cell area `dx^2`, the quadrature weight of every grid norm.
    #[inline]
    pub fn cell_area(&self) -> T {
        self.dx * self.dx
    }

    /// Domain measure `|Omega| = nx * ny * dx^2`.
    pub fn measure(&self) -> T {
        T::from_usize_lossy(self.len()) * self.cell_area()
    }

    /// Physical side lengths `(nx dx, ny dx)`.
    pub fn extent(&self) -> (T, T) {
        (
            T::from_usize_lossy(self.nx) * self.dx,
            T::from_usize_lossy(self.ny) * self.dx,
        )
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    /// Inverse of [`Grid2D::index`].
    #[inline]
    pub fn point(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    pub fn coords(&self, i: usize, j: usize) -> (T, T) {
        let half = T::lit(0.5);
        (
            (T::from_usize_lossy(i) + half) * self.dx,
            (T::from_usize_lossy(j) + half) * self.dx,
        )
    }
}

/// A scalar field sampled on a [`Grid2D`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D<T> {
    grid: Grid2D<T>,
    values: Vec<T>,
}

impl<T: Scalar> Field2D<T> {
    pub fn zeros(grid: Grid2D<T>) -> Self {
        Self {
            grid,
            values: vec![T::zero(); grid.len()],
        }
    }

    pub fn from_values(grid: Grid2D<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter {
                name: "values",
                reason: format!(
                    "expected {} values for a {}x{} grid, got {}",
                    grid.len(),
                    grid.nx(),
                    grid.ny(),
                    values.len()
                ),
            });
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(x, y)` at every cell centre.
    pub fn from_fn(grid: Grid2D<T>, mut f: impl FnMut(T, T) -> T) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                let (x, y) = grid.coords(i, j);
                values.push(f(x, y));
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid2D<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[self.grid.index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let idx = self.grid.index(i, j);
        self.values[idx] = v;
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Writes the 5-point Neumann Laplacian of row `j` of `src` into `out`.
#[inline]
pub(crate) fn laplacian_row<T: Scalar>(grid: &Grid2D<T>, src: &[T], j: usize, out: &mut [T]) {
    let nx = grid.nx();
    let ny = grid.ny();
    let inv_h2 = (grid.dx() * grid.dx()).recip();
    let four = T::lit(4.0);
    let row = &src[j * nx..(j + 1) * nx];
    let below = if j == 0 { row } else { &src[(j - 1) * nx..j * nx] };
    let above = if j + 1 == ny {
        row
    } else {
        &src[(j + 1) * nx..(j + 2) * nx]
    };
    for i in 0..nx {
        let c = row[i];
        let west = if i == 0 { c } else { row[i - 1] };
        let east = if i + 1 == nx { c } else { row[i + 1] };
        out[i] = (east + west + above[i] + below[i] - four * c) * inv_h2;
    }
}

/// Discrete Laplacian with ghost-cell reflection (zero normal derivative).
pub fn laplacian_neumann<T: Scalar>(field: &Field2D<T>) -> Field2D<T> {
    let grid = field.grid;
    let mut out = vec![T::zero(); grid.len()];
    out.par_chunks_mut(grid.nx())
        .enumerate()
        .for_each(|(j, row)| laplacian_row(&grid, &field.values, j, row));
    Field2D { grid, values: out }
}

/// Sum of the discrete Laplacian over all grid points.
///
/// Reflection ghosts make the interior fluxes telescope, so this is zero up to
/// round-off: `|sum| <= 1e-10 * max|field| * nx * ny`.
pub fn zero_flux_sum<T: Scalar>(field: &Field2D<T>) -> T {
    let lap = laplacian_neumann(field);
    lap.values.iter().copied().sum()
}

/// Largest stable forward-Euler step for 2-D diffusion, `safety * dx^2 / (4 eta)`.
pub fn cfl_max_dt<T: Scalar>(params: &NetworkParams<T>, grid: &Grid2D<T>, safety: T) -> Result<T> {
    if !(safety > T::zero() && safety <= T::one()) {
        return Err(Error::InvalidParameter {
            name: "safety",
            reason: format!("must lie in (0, 1], got {safety}"),
        });
    }
    Ok(safety * grid.cell_area() / (T::lit(4.0) * params.diffusion))
}

//! Internal units and the uniform spatial mesh shared by all solvers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant in internal units.
pub const HBAR: f64 = 1.0;
/// Particle mass in internal units.
pub const MASS: f64 = 1.0;
/// Planck constant h = 2πħ in internal units.
pub const PLANCK: f64 = 2.0 * std::f64::consts::PI * HBAR;

/// Minimum number of interior points accepted by [`build_grid`].
pub const MIN_GRID_POINTS: usize = 16;

/// Internal unit system: ħ = m = 1, lengths measured in units of the box
/// scale L. Conversion to physical units is a pure output concern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    pub hbar: f64,
    pub mass: f64,
    pub length_unit: f64,
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self { hbar: HBAR, mass: MASS, length_unit: 1.0 }
    }
}

impl UnitSystem {
    pub fn with_length(length_unit: f64) -> Self {
        Self { length_unit, ..Self::default() }
    }

    /// Ground-state energy of an infinite box of width `length_unit`:
    /// E_g = ħ²π²/(2 m L²).
    pub fn ground_box_energy(&self) -> f64 {
        let l = self.length_unit;
        self.hbar * self.hbar * std::f64::consts::PI.powi(2) / (2.0 * self.mass * l * l)
    }
}

/// Uniform 1D mesh of `n` interior points on (x_min, x_max) with Dirichlet
/// boundaries: the wavefunction is pinned to zero at both ends, which are
/// not part of the mesh. dx = (x_max − x_min)/(n + 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    x_min: f64,
    x_max: f64,
    dx: f64,
}

/// Build a grid, enforcing the public preconditions (n ≥ 16, x_max > x_min).
pub fn build_grid(n: usize, x_min: f64, x_max: f64) -> Result<Grid> {
    if n < MIN_GRID_POINTS {
        return Err(Error::Domain(format!(
            "grid needs at least {MIN_GRID_POINTS} interior points, got {n}"
        )));
    }
    Grid::unchecked(n, x_min, x_max)
}

impl Grid {
    /// Build a grid without the minimum-size requirement. Used for reduced
    /// test problems; production entry points go through [`build_grid`].
    pub fn unchecked(n: usize, x_min: f64, x_max: f64) -> Result<Grid> {
        if n == 0 {
            return Err(Error::Domain("grid needs at least one interior point".into()));
        }
        if !x_min.is_finite() || !x_max.is_finite() || x_max <= x_min {
            return Err(Error::Domain(format!(
                "invalid grid extent: x_min = {x_min}, x_max = {x_max}"
            )));
        }
        let dx = (x_max - x_min) / (n as f64 + 1.0);
        Ok(Grid { n, x_min, x_max, dx })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn span(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.x_min + self.x_max)
    }

    /// Position of interior point `i` (0-based): x_min + (i + 1) dx.
    pub fn position(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 1.0) * self.dx
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.position(i)).collect()
    }

    /// Index of the mirror point under x → x_min + x_max − x.
    pub fn mirror_index(&self, i: usize) -> usize {
        self.n - 1 - i
    }

    /// True if two grids have identical layout.
    pub fn same_layout(&self, other: &Grid) -> bool {
        self.n == other.n && self.x_min == other.x_min && self.x_max == other.x_max
    }

    /// Trapezoid quadrature of Σ f_i dx. With Dirichlet boundaries the
    /// endpoint values vanish, so this is the plain interior sum.
    pub fn integrate(&self, values: impl Iterator<Item = f64>) -> f64 {
        values.sum::<f64>() * self.dx
    }

    /// Trapezoid inner product ⟨a|b⟩ of two real vectors.
    pub fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * self.dx
    }

    /// Trapezoid norm of a real vector.
    pub fn norm(&self, a: &[f64]) -> f64 {
        self.dot(a, a).sqrt()
    }

    /// Probability carried by the left half-domain x < center for a density
    /// given per grid point. A point sitting exactly on the center (odd n)
    /// contributes half its weight to each side. Computed as
    /// (total + left−right asymmetry)/2 so mirror-symmetric densities give
    /// exactly half the total weight, with no rounding bias.
    pub fn left_half_probability(&self, density: impl Fn(usize) -> f64) -> f64 {
        let mut total = 0.0;
        for i in 0..self.n {
            total += density(i);
        }
        let mut asym = 0.0;
        for i in 0..self.n / 2 {
            asym += density(i) - density(self.mirror_index(i));
        }
        0.5 * (total + asym) * self.dx
    }
}

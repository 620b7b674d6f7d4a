//! Parametric families of reflection-symmetric wells and their sampling
//! onto a grid.
//!
//! Infinite walls are never represented by large numbers: the box interior
//! samples to zero and the walls live in the Dirichlet boundary of the grid.
//! Only the double-box barrier is a finite, rampable value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Relative tolerance on the reflection symmetry of sampled potentials.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Parametric well families. All parameters are in internal units; the grid
/// supplies the domain. For the box variants the grid extent must equal `L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    /// Box of width L: V = 0 inside, walls at the domain boundary.
    InfiniteBox {
        #[serde(rename = "L")]
        length: f64,
    },
    /// Box of width L with a finite rectangular barrier of the given width
    /// and height centered at the midpoint.
    DoubleBox {
        #[serde(rename = "L")]
        length: f64,
        barrier_width: f64,
        barrier_height: f64,
    },
    /// V(x) = α (x − c)² + β (x − c)⁴ about the center c (defaults to the
    /// grid midpoint). α < 0 < β gives two minima at ±√(−α/2β).
    Biquartic {
        alpha: f64,
        beta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<f64>,
    },
}

impl PotentialSpec {
    pub fn infinite_box(length: f64) -> Self {
        PotentialSpec::InfiniteBox { length }
    }

    pub fn double_box(length: f64, barrier_width: f64, barrier_height: f64) -> Self {
        PotentialSpec::DoubleBox { length, barrier_width, barrier_height }
    }

    pub fn biquartic(alpha: f64, beta: f64) -> Self {
        PotentialSpec::Biquartic { alpha, beta, center: None }
    }

    /// Check the parameter invariants.
    pub fn validate(&self) -> Result<()> {
        match *self {
            PotentialSpec::InfiniteBox { length } => {
                if !length.is_finite() || length <= 0.0 {
                    return Err(Error::Domain(format!("box length must be positive, got {length}")));
                }
            }
            PotentialSpec::DoubleBox { length, barrier_width, barrier_height } => {
                if !length.is_finite() || length <= 0.0 {
                    return Err(Error::Domain(format!("box length must be positive, got {length}")));
                }
                if !barrier_width.is_finite() || barrier_width <= 0.0 || barrier_width >= length {
                    return Err(Error::Domain(format!(
                        "barrier width must satisfy 0 < w < L, got w = {barrier_width}, L = {length}"
                    )));
                }
                if !barrier_height.is_finite() || barrier_height < 0.0 {
                    return Err(Error::Domain(format!(
                        "barrier height must be finite and >= 0, got {barrier_height}"
                    )));
                }
            }
            PotentialSpec::Biquartic { alpha, beta, center } => {
                if !alpha.is_finite() || !beta.is_finite() {
                    return Err(Error::Domain("biquartic coefficients must be finite".into()));
                }
                if let Some(c) = center {
                    if !c.is_finite() {
                        return Err(Error::Domain("biquartic center must be finite".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Barrier height of a double box, if this is one.
    pub fn barrier_height(&self) -> Option<f64> {
        match *self {
            PotentialSpec::DoubleBox { barrier_height, .. } => Some(barrier_height),
            _ => None,
        }
    }

    /// Same spec with the barrier replaced; identity for other variants.
    pub fn with_barrier_height(&self, v_b: f64) -> Self {
        match *self {
            PotentialSpec::DoubleBox { length, barrier_width, .. } => {
                PotentialSpec::DoubleBox { length, barrier_width, barrier_height: v_b }
            }
            ref other => other.clone(),
        }
    }
}

/// A potential sampled on a grid. Values are finite by construction; the
/// measured reflection asymmetry is kept alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSamples {
    grid: Grid,
    values: Vec<f64>,
    max_asymmetry: f64,
}

impl PotentialSamples {
    /// Sample an arbitrary function. No symmetry requirement; the asymmetry
    /// is measured and kept.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values: Vec<f64> = (0..grid.n()).map(|i| f(grid.position(i))).collect();
        Self::from_values(grid, values)
    }

    /// Wrap precomputed values.
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::GridMismatch(format!(
                "{} potential values on a grid of {} points",
                values.len(),
                grid.n()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("potential samples must be finite".into()));
        }
        let mut samples = PotentialSamples { grid, values, max_asymmetry: 0.0 };
        samples.max_asymmetry = check_reflection_symmetry(&samples);
        Ok(samples)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Max relative reflection asymmetry measured at construction.
    pub fn max_asymmetry(&self) -> f64 {
        self.max_asymmetry
    }

    pub fn is_symmetric(&self) -> bool {
        self.max_asymmetry <= SYMMETRY_TOL
    }
}

/// Sample a potential spec onto a grid.
///
/// Box variants require the grid extent to match `L`; the double-box barrier
/// is centered at the midpoint. Values on the right half are mirrored from
/// the left half so the samples are reflection symmetric to the last bit.
pub fn sample_potential(spec: &PotentialSpec, grid: &Grid) -> Result<PotentialSamples> {
    spec.validate()?;
    let n = grid.n();
    let c = grid.center();
    match *spec {
        PotentialSpec::InfiniteBox { length } => {
            check_extent(grid, length)?;
            PotentialSamples::from_values(grid.clone(), vec![0.0; n])
        }
        PotentialSpec::DoubleBox { length, barrier_width, barrier_height } => {
            check_extent(grid, length)?;
            let half_w = 0.5 * barrier_width;
            let values =
                mirrored_samples(grid, |x| if (x - c).abs() < half_w { barrier_height } else { 0.0 });
            PotentialSamples::from_values(grid.clone(), values)
        }
        PotentialSpec::Biquartic { alpha, beta, center } => {
            let c0 = center.unwrap_or(c);
            if (c0 - c).abs() > SYMMETRY_TOL * grid.span() {
                let probe = PotentialSamples::from_fn(grid.clone(), |x| {
                    let d = x - c0;
                    alpha * d * d + beta * d * d * d * d
                })?;
                return Err(Error::AsymmetricPotential { max_asymmetry: probe.max_asymmetry() });
            }
            let values = mirrored_samples(grid, |x| {
                let d = x - c;
                alpha * d * d + beta * d * d * d * d
            });
            PotentialSamples::from_values(grid.clone(), values)
        }
    }
}

/// Maximum relative reflection asymmetry of the samples:
/// max_i |V(x_i) − V(x_mirror(i))| / (1 + |V(x_i)|).
pub fn check_reflection_symmetry(samples: &PotentialSamples) -> f64 {
    let v = &samples.values;
    let n = v.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        let j = n - 1 - i;
        let asym = (v[i] - v[j]).abs() / (1.0 + v[i].abs());
        worst = worst.max(asym);
    }
    worst
}

fn check_extent(grid: &Grid, length: f64) -> Result<()> {
    if (grid.span() - length).abs() > 1e-9 * length {
        return Err(Error::GridMismatch(format!(
            "grid extent {} does not match the well width {length}",
            grid.span()
        )));
    }
    Ok(())
}

/// Evaluate on the left half (center point included) and mirror, so that
/// sampled wells are symmetric independent of floating-point rounding in
/// the point positions.
fn mirrored_samples(grid: &Grid, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let n = grid.n();
    let mut values = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let v = f(grid.position(i));
        values[i] = v;
        values[n - 1 - i] = v;
    }
    values
}

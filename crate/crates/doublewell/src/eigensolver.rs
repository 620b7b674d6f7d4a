//! Single-particle stationary states on the grid.
//!
//! The Hamiltonian −(ħ²/2m) d²/dx² + V(x) is discretized with the 3-point
//! second-difference stencil and Dirichlet boundaries, giving a symmetric
//! tridiagonal operator with diagonal 1/dx² + V(x_i) and off-diagonal
//! −1/(2dx²) (ħ = m = 1). Eigenpairs come from Sturm bisection plus inverse
//! iteration; for symmetric potentials near-degenerate pairs are projected
//! onto definite parity.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, HBAR};
use crate::linalg::SymTridiag;
use crate::potential::PotentialSamples;

/// Parity of a state under x → x_min + x_max − x.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
    None,
}

impl std::fmt::Display for Parity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Parity::Even => write!(f, "even"),
            Parity::Odd => write!(f, "odd"),
            Parity::None => write!(f, "none"),
        }
    }
}

/// Relative tolerance used by [`classify_parity`].
pub const PARITY_CLASSIFY_TOL: f64 = 1e-6;
/// Absolute splitting below which a pair is treated as degenerate and
/// parity-projected explicitly.
pub const DEGENERACY_SPLITTING: f64 = 1e-10;

/// A normalized single-particle eigenstate.
///
/// Amplitudes are real, L2-normalized under trapezoid quadrature
/// (Σ ψ_i² dx = 1), and sign-fixed so the first component with
/// |ψ_i| > 1e−8·max|ψ| is positive.
#[derive(Debug, Clone)]
pub struct Eigenstate {
    pub energy: f64,
    pub amplitudes: Vec<f64>,
    pub parity: Parity,
}

/// The discretized single-particle Hamiltonian.
#[derive(Debug, Clone)]
pub struct SchrodingerOp {
    tridiag: SymTridiag,
    grid: Grid,
    symmetric: bool,
}

/// Assemble the symmetric tridiagonal operator for the sampled potential.
pub fn assemble_hamiltonian(samples: &PotentialSamples) -> SchrodingerOp {
    let grid = samples.grid().clone();
    let dx2 = grid.dx() * grid.dx();
    let diag: Vec<f64> = samples.values().iter().map(|v| 1.0 / dx2 + v).collect();
    let off = vec![-0.5 / dx2; grid.n() - 1];
    SchrodingerOp {
        tridiag: SymTridiag::new(diag, off),
        grid,
        symmetric: samples.is_symmetric(),
    }
}

impl SchrodingerOp {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn tridiag(&self) -> &SymTridiag {
        &self.tridiag
    }

    /// True if the sampled potential passed the reflection-symmetry check.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.grid.n();
        for i in 0..n {
            let mut acc = self.tridiag.diag[i] * x[i];
            if i > 0 {
                acc += self.tridiag.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.tridiag.off[i] * x[i + 1];
            }
            y[i] = acc;
        }
    }
}

/// Lowest `k` eigenstates in ascending energy order.
///
/// States are normalized under trapezoid quadrature and sign-fixed. For a
/// symmetric potential each state is parity-purified, and pairs closer than
/// [`DEGENERACY_SPLITTING`] are explicitly replaced by their even/odd
/// projections (iterative solvers return arbitrary mixtures in degenerate
/// subspaces).
pub fn solve_lowest(op: &SchrodingerOp, k: usize) -> Result<Vec<Eigenstate>> {
    let n = op.grid.n();
    if k < 1 || k > n {
        return Err(Error::Domain(format!("need 1 <= k <= {n}, got k = {k}")));
    }
    let pairs = op.tridiag.lowest_eigenpairs(k)?;
    let inv_sqrt_dx = 1.0 / op.grid.dx().sqrt();
    let mut energies: Vec<f64> = Vec::with_capacity(k);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    for (e, mut v) in pairs {
        for a in &mut v {
            *a *= inv_sqrt_dx;
        }
        energies.push(e);
        vectors.push(v);
    }

    if op.symmetric {
        purify_parity_clusters(&energies, &mut vectors, &op.grid);
    }

    let mut out = Vec::with_capacity(k);
    for (e, mut v) in energies.into_iter().zip(vectors) {
        fix_sign(&mut v);
        let parity = if op.symmetric { classify_parity(&v, &op.grid) } else { Parity::None };
        out.push(Eigenstate { energy: e, amplitudes: v, parity });
    }
    Ok(out)
}

/// Replace members of near-degenerate clusters by their dominant parity
/// projections, and clean solver noise off isolated states.
fn purify_parity_clusters(energies: &[f64], vectors: &mut [Vec<f64>], grid: &Grid) {
    let k = energies.len();
    let mut i = 0;
    while i < k {
        let mut j = i + 1;
        while j < k && energies[j] - energies[j - 1] < DEGENERACY_SPLITTING {
            j += 1;
        }
        if j - i == 1 {
            let (even, odd) = parity_components(&vectors[i], grid);
            let (ne, no) = (crate::linalg::norm2(&even), crate::linalg::norm2(&odd));
            let (nrm, dominant) = if ne >= no { (ne, even) } else { (no, odd) };
            // only purify when clearly a single-parity state
            if nrm > 0.99 * crate::linalg::norm2(&vectors[i]) {
                vectors[i] = dominant;
                rescale_to_quadrature(&mut vectors[i], grid);
            }
        } else {
            // degenerate cluster: pick the strongest even and odd projections
            let mut best_even: Option<(f64, Vec<f64>)> = None;
            let mut best_odd: Option<(f64, Vec<f64>)> = None;
            for v in vectors[i..j].iter() {
                let (even, odd) = parity_components(v, grid);
                let ne = crate::linalg::norm2(&even);
                let no = crate::linalg::norm2(&odd);
                if best_even.as_ref().is_none_or(|(n, _)| ne > *n) {
                    best_even = Some((ne, even));
                }
                if best_odd.as_ref().is_none_or(|(n, _)| no > *n) {
                    best_odd = Some((no, odd));
                }
            }
            let mut replacements: Vec<Vec<f64>> = Vec::new();
            for cand in [best_even, best_odd].into_iter().flatten() {
                let (n, mut v) = cand;
                if n > 1e-6 {
                    rescale_to_quadrature(&mut v, grid);
                    replacements.push(v);
                }
            }
            if replacements.len() == j - i {
                for (slot, r) in vectors[i..j].iter_mut().zip(replacements) {
                    *slot = r;
                }
            }
        }
        i = j;
    }
}

fn rescale_to_quadrature(v: &mut [f64], grid: &Grid) {
    let nrm = grid.norm(v);
    if nrm > 0.0 {
        crate::linalg::scale(1.0 / nrm, v);
    }
}

fn parity_components(v: &[f64], grid: &Grid) -> (Vec<f64>, Vec<f64>) {
    let n = v.len();
    let mut even = vec![0.0; n];
    let mut odd = vec![0.0; n];
    for i in 0..n {
        let m = grid.mirror_index(i);
        even[i] = 0.5 * (v[i] + v[m]);
        odd[i] = 0.5 * (v[i] - v[m]);
    }
    (even, odd)
}

fn fix_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let thresh = 1e-8 * max;
    if let Some(first) = v.iter().find(|x| x.abs() > thresh) {
        if *first < 0.0 {
            crate::linalg::scale(-1.0, v);
        }
    }
}

/// Classify the parity of a state by comparing mirrored amplitudes, with
/// relative tolerance [`PARITY_CLASSIFY_TOL`].
pub fn classify_parity(amplitudes: &[f64], grid: &Grid) -> Parity {
    let n = amplitudes.len();
    let max = amplitudes.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return Parity::None;
    }
    let mut even_err = 0.0f64;
    let mut odd_err = 0.0f64;
    for i in 0..n {
        let m = grid.mirror_index(i);
        even_err = even_err.max((amplitudes[i] - amplitudes[m]).abs());
        odd_err = odd_err.max((amplitudes[i] + amplitudes[m]).abs());
    }
    if even_err <= PARITY_CLASSIFY_TOL * max {
        Parity::Even
    } else if odd_err <= PARITY_CLASSIFY_TOL * max {
        Parity::Odd
    } else {
        Parity::None
    }
}

/// The lowest even/odd pair (φ, φ̃) of a symmetric double well.
#[derive(Debug, Clone)]
pub struct OrbitalPair {
    pub even: Eigenstate,
    pub odd: Eigenstate,
}

impl OrbitalPair {
    pub fn new(even: Eigenstate, odd: Eigenstate) -> Result<Self> {
        if even.parity != Parity::Even || odd.parity != Parity::Odd {
            return Err(Error::Domain(format!(
                "orbital pair needs (even, odd) parities, got ({}, {})",
                even.parity, odd.parity
            )));
        }
        if odd.energy < even.energy - 1e-12 * even.energy.abs().max(1.0) {
            return Err(Error::Domain(
                "odd member of the orbital pair lies below the even member".into(),
            ));
        }
        Ok(OrbitalPair { even, odd })
    }

    /// Energy splitting Ẽ − E ≥ 0.
    pub fn splitting(&self) -> f64 {
        (self.odd.energy - self.even.energy).max(0.0)
    }
}

/// Solve for the two lowest states and form the orbital pair.
pub fn lowest_orbital_pair(op: &SchrodingerOp) -> Result<OrbitalPair> {
    let mut states = solve_lowest(op, 2)?;
    let odd = states.pop().expect("two states");
    let even = states.pop().expect("two states");
    OrbitalPair::new(even, odd)
}

/// Well-localized (non-stationary) combinations of the orbital pair:
/// |L⟩ = (φ + φ̃)/√2 and |R⟩ = (φ − φ̃)/√2, with the labels fixed by
/// requiring that |L⟩ puts at least half its probability on x < center.
#[derive(Debug, Clone)]
pub struct LocalizedPair {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

pub fn localized_pair(pair: &OrbitalPair, grid: &Grid) -> LocalizedPair {
    let n = grid.n();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut left: Vec<f64> =
        (0..n).map(|i| s * (pair.even.amplitudes[i] + pair.odd.amplitudes[i])).collect();
    let mut right: Vec<f64> =
        (0..n).map(|i| s * (pair.even.amplitudes[i] - pair.odd.amplitudes[i])).collect();
    let p_left = grid.left_half_probability(|i| left[i] * left[i]);
    if p_left < 0.5 {
        std::mem::swap(&mut left, &mut right);
    }
    LocalizedPair { left, right }
}

/// Tunneling rate between the wells: Ω = (Ẽ − E)/ħ.
pub fn tunneling_rate(pair: &OrbitalPair) -> f64 {
    pair.splitting() / HBAR
}

/// Write an eigenstate as CSV (columns x, psi). The energy and parity ride
/// in a leading comment line.
pub fn write_eigenstate_csv<W: Write>(
    out: &mut W,
    state: &Eigenstate,
    grid: &Grid,
) -> std::io::Result<()> {
    writeln!(out, "# energy={:e} parity={}", state.energy, state.parity)?;
    writeln!(out, "x,psi")?;
    for i in 0..grid.n() {
        writeln!(out, "{},{}", grid.position(i), state.amplitudes[i])?;
    }
    Ok(())
}

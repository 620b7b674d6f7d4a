//! Two interacting particles on the (x₁, x₂) product grid.
//!
//! The two-body Hamiltonian is the Kronecker sum of two single-particle
//! operators plus a diagonal interaction term. A contact interaction
//! a·δ(x₂ − x₁) discretizes to a/dx on the coincidence diagonal, so that
//! Σ V' dx₁dx₂ reproduces a∫|ψ|⁴dx without renormalization. The direct and
//! exchange integrals, the ground shift and the on-site energy are the
//! corresponding first-order quadratures; degenerate perturbation theory in
//! the two-fold (g,e) subspace gives E = E_{g,e} + J ± K with (anti)symmetric
//! eigenvectors. Exact spectra come from Lanczos restricted to definite
//! exchange-symmetry (and parity) sectors.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigensolver::{Eigenstate, Parity};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::linalg::{self, LanczosOpts};
use crate::potential::PotentialSamples;

/// Hard cap on the per-axis grid size of the product-grid operator.
pub const PRODUCT_GRID_CAP: usize = 128;

/// Contact (delta-function) interaction strength, a > 0 repulsive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactInteraction {
    pub strength: f64,
}

/// Interaction potentials V'(x₁ − x₂) between the particles.
///
/// The Gaussian variant is a finite-range stand-in used to validate the
/// contact limit (width → 0); production paths use `Contact`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Interaction {
    Contact { strength: f64 },
    Gaussian { strength: f64, width: f64 },
}

impl Interaction {
    pub fn contact(strength: f64) -> Self {
        Interaction::Contact { strength }
    }

    pub fn gaussian(strength: f64, width: f64) -> Self {
        Interaction::Gaussian { strength, width }
    }

    pub fn strength(&self) -> f64 {
        match *self {
            Interaction::Contact { strength } | Interaction::Gaussian { strength, .. } => strength,
        }
    }

    /// Value contributed on the product grid at points (x_i, x_j).
    pub(crate) fn pair_value(&self, same_point: bool, xi: f64, xj: f64, dx: f64) -> f64 {
        match *self {
            Interaction::Contact { strength } => {
                if same_point {
                    strength / dx
                } else {
                    0.0
                }
            }
            Interaction::Gaussian { strength, width } => {
                let d = xi - xj;
                strength * (-0.5 * d * d / (width * width)).exp()
                    / (width * (2.0 * std::f64::consts::PI).sqrt())
            }
        }
    }
}

impl From<ContactInteraction> for Interaction {
    fn from(c: ContactInteraction) -> Self {
        Interaction::Contact { strength: c.strength }
    }
}

fn check_orbital(grid: &Grid, psi: &[f64], name: &str) -> Result<()> {
    if psi.len() != grid.n() {
        return Err(Error::GridMismatch(format!(
            "{name} has {} amplitudes on a grid of {} points",
            psi.len(),
            grid.n()
        )));
    }
    Ok(())
}

/// Direct integral J = ∬ |ψ_a(x₁)|² |ψ_b(x₂)|² V'(x₁ − x₂) dx₁dx₂.
/// For the contact interaction this collapses to a·Σ |ψ_a|²|ψ_b|² dx.
pub fn direct_integral(
    psi_a: &[f64],
    psi_b: &[f64],
    grid: &Grid,
    interaction: &Interaction,
) -> Result<f64> {
    check_orbital(grid, psi_a, "psi_a")?;
    check_orbital(grid, psi_b, "psi_b")?;
    let dx = grid.dx();
    match *interaction {
        Interaction::Contact { strength } => Ok(strength
            * grid.integrate(
                psi_a.iter().zip(psi_b).map(|(a, b)| (a * a) * (b * b)),
            )),
        Interaction::Gaussian { .. } => {
            let mut acc = 0.0;
            for (i, a) in psi_a.iter().enumerate() {
                let xi = grid.position(i);
                let mut inner = 0.0;
                for (j, b) in psi_b.iter().enumerate() {
                    inner += (b * b) * interaction.pair_value(i == j, xi, grid.position(j), dx);
                }
                acc += (a * a) * inner;
            }
            Ok(acc * dx * dx)
        }
    }
}

/// Exchange integral K = ∬ ψ_a(x₁)ψ_b(x₁) ψ_a(x₂)ψ_b(x₂) V'(x₁ − x₂) dx₁dx₂
/// for real orbitals; equals J identically for the contact interaction.
pub fn exchange_integral(
    psi_a: &[f64],
    psi_b: &[f64],
    grid: &Grid,
    interaction: &Interaction,
) -> Result<f64> {
    check_orbital(grid, psi_a, "psi_a")?;
    check_orbital(grid, psi_b, "psi_b")?;
    let dx = grid.dx();
    match *interaction {
        Interaction::Contact { strength } => Ok(strength
            * grid.integrate(
                psi_a.iter().zip(psi_b).map(|(a, b)| (a * b) * (a * b)),
            )),
        Interaction::Gaussian { .. } => {
            let mut acc = 0.0;
            for i in 0..grid.n() {
                let xi = grid.position(i);
                let pi = psi_a[i] * psi_b[i];
                let mut inner = 0.0;
                for j in 0..grid.n() {
                    inner += psi_a[j]
                        * psi_b[j]
                        * interaction.pair_value(i == j, xi, grid.position(j), dx);
                }
                acc += pi * inner;
            }
            Ok(acc * dx * dx)
        }
    }
}

/// First-order shift of the doubly-occupied ground state,
/// ΔE_gg = a·Σ |ψ_g|⁴ dx for the contact interaction.
pub fn ground_shift(psi_g: &[f64], grid: &Grid, interaction: &Interaction) -> Result<f64> {
    direct_integral(psi_g, psi_g, grid, interaction)
}

/// On-site interaction energy U = a·∫|ψ|⁴dx of a localized well orbital.
/// Same quadrature as [`ground_shift`], named for its role.
pub fn onsite_energy(orbital: &[f64], grid: &Grid, interaction: &Interaction) -> Result<f64> {
    direct_integral(orbital, orbital, grid, interaction)
}

/// Outcome of degenerate perturbation theory in the two-dimensional
/// {ψ_g(x₁)ψ_e(x₂), ψ_e(x₁)ψ_g(x₂)} subspace.
#[derive(Debug, Clone)]
pub struct PerturbationResult {
    pub e_low: f64,
    pub e_high: f64,
    pub j: f64,
    pub k: f64,
    pub eigvec_low: [f64; 2],
    pub eigvec_high: [f64; 2],
}

/// Degenerate perturbation theory for two distinct orbitals: eigenvalues
/// E_{g,e} + J ± K with eigenvectors (1, ∓1)/√2, returned low-to-high.
pub fn degenerate_pt(
    psi_g: &Eigenstate,
    psi_e: &Eigenstate,
    grid: &Grid,
    interaction: &Interaction,
) -> Result<PerturbationResult> {
    let j = direct_integral(&psi_g.amplitudes, &psi_e.amplitudes, grid, interaction)?;
    let k = exchange_integral(&psi_g.amplitudes, &psi_e.amplitudes, grid, interaction)?;
    let e_ge = psi_g.energy + psi_e.energy;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let anti = [s, -s];
    let sym = [s, s];
    let (e_minus, e_plus) = (e_ge + j - k, e_ge + j + k);
    if e_minus <= e_plus {
        Ok(PerturbationResult { e_low: e_minus, e_high: e_plus, j, k, eigvec_low: anti, eigvec_high: sym })
    } else {
        Ok(PerturbationResult { e_low: e_plus, e_high: e_minus, j, k, eigvec_low: sym, eigvec_high: anti })
    }
}

/// Exchange symmetry of a two-body state under (x₁, x₂) → (x₂, x₁).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwapSymmetry {
    Symmetric,
    Antisymmetric,
    None,
}

impl std::fmt::Display for SwapSymmetry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SwapSymmetry::Symmetric => write!(f, "symmetric"),
            SwapSymmetry::Antisymmetric => write!(f, "antisymmetric"),
            SwapSymmetry::None => write!(f, "none"),
        }
    }
}

/// Projection sign for symmetry projectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Amplitude field over the product grid with its exchange-symmetry label.
/// Normalized under the 2D trapezoid rule: Σ|Ψ_ij|² dx² = 1.
#[derive(Debug, Clone)]
pub struct TwoBodyState {
    pub amplitudes: Array2<Complex64>,
    pub exchange_symmetry: SwapSymmetry,
}

impl TwoBodyState {
    pub fn n(&self) -> usize {
        self.amplitudes.nrows()
    }

    pub fn norm(&self, grid: &Grid) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt() * grid.dx()
    }

    /// 2D trapezoid inner product ⟨self|other⟩.
    pub fn inner(&self, other: &TwoBodyState, grid: &Grid) -> Complex64 {
        inner_product(&self.amplitudes, &other.amplitudes, grid)
    }

    /// Classify the exchange symmetry of the amplitudes (1e−8 relative).
    pub fn classify_swap(&self) -> SwapSymmetry {
        let a = &self.amplitudes;
        let max = a.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
        if max == 0.0 {
            return SwapSymmetry::None;
        }
        let (mut sym_err, mut anti_err) = (0.0f64, 0.0f64);
        for i in 0..self.n() {
            for j in 0..=i {
                sym_err = sym_err.max((a[(i, j)] - a[(j, i)]).norm());
                anti_err = anti_err.max((a[(i, j)] + a[(j, i)]).norm());
            }
        }
        if sym_err <= 1e-8 * max {
            SwapSymmetry::Symmetric
        } else if anti_err <= 1e-8 * max {
            SwapSymmetry::Antisymmetric
        } else {
            SwapSymmetry::None
        }
    }

    /// Spatial parity of the field under (x₁, x₂) → (−x₁, −x₂).
    pub fn classify_parity(&self) -> Parity {
        let a = &self.amplitudes;
        let n = self.n();
        let max = a.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
        if max == 0.0 {
            return Parity::None;
        }
        let (mut even_err, mut odd_err) = (0.0f64, 0.0f64);
        for i in 0..n {
            for j in 0..n {
                let m = a[(n - 1 - i, n - 1 - j)];
                even_err = even_err.max((a[(i, j)] - m).norm());
                odd_err = odd_err.max((a[(i, j)] + m).norm());
            }
        }
        if even_err <= 1e-6 * max {
            Parity::Even
        } else if odd_err <= 1e-6 * max {
            Parity::Odd
        } else {
            Parity::None
        }
    }
}

/// 2D trapezoid inner product of two complex fields.
pub fn inner_product(a: &Array2<Complex64>, b: &Array2<Complex64>, grid: &Grid) -> Complex64 {
    let dx2 = grid.dx() * grid.dx();
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum::<Complex64>() * dx2
}

/// Project onto the (anti)symmetric exchange sector:
/// Ψ ← (Ψ(x₁,x₂) ± Ψ(x₂,x₁)) / norm.
pub fn symmetry_project(state: &TwoBodyState, sign: Sign, grid: &Grid) -> Result<TwoBodyState> {
    let n = state.n();
    let mut out = Array2::<Complex64>::zeros((n, n));
    let s = sign.factor();
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = 0.5 * (state.amplitudes[(i, j)] + s * state.amplitudes[(j, i)]);
        }
    }
    let nrm = out.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt() * grid.dx();
    if nrm < 1e-10 {
        return Err(Error::ZeroProjection { norm: nrm });
    }
    out.mapv_inplace(|c| c / nrm);
    Ok(TwoBodyState {
        amplitudes: out,
        exchange_symmetry: match sign {
            Sign::Plus => SwapSymmetry::Symmetric,
            Sign::Minus => SwapSymmetry::Antisymmetric,
        },
    })
}

/// Sparse symmetric two-body operator: Kronecker sum of two copies of the
/// single-particle stencil plus the diagonal interaction.
#[derive(Debug, Clone)]
pub struct TwoBodyHamiltonian {
    grid: Grid,
    diag: Vec<f64>,
    off: f64,
    symmetric_potential: bool,
}

/// Assemble the product-grid operator. Fails if the per-axis size exceeds
/// [`PRODUCT_GRID_CAP`].
pub fn build_two_body_hamiltonian(
    samples: &PotentialSamples,
    interaction: &Interaction,
) -> Result<TwoBodyHamiltonian> {
    let grid = samples.grid().clone();
    let n = grid.n();
    if n > PRODUCT_GRID_CAP {
        return Err(Error::SizeCap { n, cap: PRODUCT_GRID_CAP });
    }
    let dx = grid.dx();
    let kinetic_diag = 2.0 / (dx * dx);
    let v = samples.values();
    let mut diag = vec![0.0; n * n];
    for i in 0..n {
        let xi = grid.position(i);
        for j in 0..n {
            diag[i * n + j] = kinetic_diag
                + v[i]
                + v[j]
                + interaction.pair_value(i == j, xi, grid.position(j), dx);
        }
    }
    Ok(TwoBodyHamiltonian {
        grid,
        diag,
        off: -0.5 / (dx * dx),
        symmetric_potential: samples.is_symmetric(),
    })
}

impl TwoBodyHamiltonian {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn has_symmetric_potential(&self) -> bool {
        self.symmetric_potential
    }

    /// y = H x on flattened row-major fields.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n();
        debug_assert_eq!(x.len(), n * n);
        debug_assert_eq!(y.len(), n * n);
        let off = self.off;
        for i in 0..n {
            let row = &x[i * n..(i + 1) * n];
            let drow = &self.diag[i * n..(i + 1) * n];
            let yrow = &mut y[i * n..(i + 1) * n];
            yrow[0] = drow[0] * row[0] + off * row[1];
            for j in 1..n - 1 {
                yrow[j] = drow[j] * row[j] + off * (row[j - 1] + row[j + 1]);
            }
            yrow[n - 1] = drow[n - 1] * row[n - 1] + off * row[n - 2];
        }
        for i in 0..n {
            if i > 0 {
                let above = &x[(i - 1) * n..i * n];
                for (yj, xj) in y[i * n..(i + 1) * n].iter_mut().zip(above) {
                    *yj += off * xj;
                }
            }
            if i + 1 < n {
                let below = &x[(i + 1) * n..(i + 2) * n];
                for (yj, xj) in y[i * n..(i + 1) * n].iter_mut().zip(below) {
                    *yj += off * xj;
                }
            }
        }
    }

    /// Expectation value ⟨v|H|v⟩ / ⟨v|v⟩ for a real flattened field.
    pub fn rayleigh(&self, v: &[f64]) -> f64 {
        let mut hv = vec![0.0; v.len()];
        self.apply(v, &mut hv);
        linalg::dot(v, &hv) / linalg::dot(v, v)
    }
}

/// A (swap, parity) symmetry sector of the two-body operator. Parity
/// sectors exist only over reflection-symmetric potentials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymmetrySector {
    pub swap: Sign,
    pub parity: Option<Sign>,
}

impl SymmetrySector {
    pub fn swap_symmetry(&self) -> SwapSymmetry {
        match self.swap {
            Sign::Plus => SwapSymmetry::Symmetric,
            Sign::Minus => SwapSymmetry::Antisymmetric,
        }
    }
}

/// Apply the sector projector to a flattened field in place. Swap pairs
/// (i,j)↔(j,i); the parity mirror of flat index q is n²−1−q.
pub fn project_sector(v: &mut [f64], n: usize, sector: SymmetrySector) {
    let s = sector.swap.factor();
    for i in 0..n {
        for j in 0..i {
            let a = v[i * n + j];
            let b = v[j * n + i];
            let p = 0.5 * (a + s * b);
            v[i * n + j] = p;
            v[j * n + i] = s * p;
        }
        if sector.swap == Sign::Minus {
            v[i * n + i] = 0.0;
        }
    }
    if let Some(par) = sector.parity {
        let p = par.factor();
        let dim = n * n;
        for q in 0..dim / 2 {
            let m = dim - 1 - q;
            let a = v[q];
            let b = v[m];
            let half = 0.5 * (a + p * b);
            v[q] = half;
            v[m] = p * half;
        }
        if dim % 2 == 1 && par == Sign::Minus {
            v[dim / 2] = 0.0;
        }
    }
}

/// Options for the sector Lanczos solves.
#[derive(Debug, Clone)]
pub struct SolveOpts {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SolveOpts {
    fn default() -> Self {
        SolveOpts { tol: 1e-10, max_iter: 450, seed: 0x00c0_ffee }
    }
}

/// Lowest `k` eigenpairs within one symmetry sector, as flattened real
/// vectors with unit Euclidean norm. `start` seeds the Krylov space (warm
/// starts across parameter sweeps).
pub fn solve_sector(
    h: &TwoBodyHamiltonian,
    sector: SymmetrySector,
    k: usize,
    start: Option<&[f64]>,
    opts: &SolveOpts,
) -> Result<Vec<(f64, Vec<f64>)>> {
    if sector.parity.is_some() && !h.symmetric_potential {
        return Err(Error::Domain(
            "parity sectors require a reflection-symmetric potential".into(),
        ));
    }
    let n = h.n();
    let lopts = LanczosOpts {
        k,
        max_iter: opts.max_iter,
        tol: opts.tol,
        seed: opts.seed ^ sector_salt(sector),
        check_every: 8,
    };
    linalg::lanczos_lowest(
        h.dim(),
        |x, y| h.apply(x, y),
        |v| project_sector(v, n, sector),
        start,
        &lopts,
    )
}

fn sector_salt(sector: SymmetrySector) -> u64 {
    let a = match sector.swap {
        Sign::Plus => 0x1,
        Sign::Minus => 0x2,
    };
    let b = match sector.parity {
        None => 0x10,
        Some(Sign::Plus) => 0x20,
        Some(Sign::Minus) => 0x30,
    };
    (a | b) * 0x9e37_79b9
}

/// Lowest `k` two-body eigenstates (k ≤ 12), each carrying its exchange
/// symmetry. Sectors are solved independently and merged, so degenerate
/// clusters come out with definite swap symmetry (and definite parity over
/// symmetric potentials).
pub fn solve_two_body_lowest(
    h: &TwoBodyHamiltonian,
    k: usize,
    opts: &SolveOpts,
) -> Result<Vec<(f64, TwoBodyState)>> {
    if !(1..=12).contains(&k) {
        return Err(Error::Domain(format!("need 1 <= k <= 12 states, got {k}")));
    }
    let sectors: Vec<SymmetrySector> = if h.symmetric_potential {
        vec![
            SymmetrySector { swap: Sign::Plus, parity: Some(Sign::Plus) },
            SymmetrySector { swap: Sign::Plus, parity: Some(Sign::Minus) },
            SymmetrySector { swap: Sign::Minus, parity: Some(Sign::Plus) },
            SymmetrySector { swap: Sign::Minus, parity: Some(Sign::Minus) },
        ]
    } else {
        vec![
            SymmetrySector { swap: Sign::Plus, parity: None },
            SymmetrySector { swap: Sign::Minus, parity: None },
        ]
    };
    let n = h.n();
    let mut merged: Vec<(f64, Vec<f64>, SwapSymmetry)> = Vec::new();
    for sector in sectors {
        let pairs = solve_sector(h, sector, k, None, opts)?;
        for (e, v) in pairs {
            merged.push((e, v, sector.swap_symmetry()));
        }
    }
    merged.sort_by(|a, b| a.0.total_cmp(&b.0));
    merged.truncate(k);

    let inv_dx = 1.0 / h.grid.dx();
    let mut out = Vec::with_capacity(k);
    for (e, mut v, symmetry) in merged {
        fix_sign_flat(&mut v);
        let mut amplitudes = Array2::<Complex64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                amplitudes[(i, j)] = Complex64::new(v[i * n + j] * inv_dx, 0.0);
            }
        }
        out.push((e, TwoBodyState { amplitudes, exchange_symmetry: symmetry }));
    }
    Ok(out)
}

fn fix_sign_flat(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-8 * max) {
        if *first < 0.0 {
            linalg::scale(-1.0, v);
        }
    }
}

/// Build the product state ψ_a(x₁)ψ_b(x₂) as a two-body field.
pub fn product_state(psi_a: &[f64], psi_b: &[f64], grid: &Grid) -> Result<TwoBodyState> {
    check_orbital(grid, psi_a, "psi_a")?;
    check_orbital(grid, psi_b, "psi_b")?;
    let n = grid.n();
    let mut amplitudes = Array2::<Complex64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            amplitudes[(i, j)] = Complex64::new(psi_a[i] * psi_b[j], 0.0);
        }
    }
    let mut state = TwoBodyState { amplitudes, exchange_symmetry: SwapSymmetry::None };
    state.exchange_symmetry = state.classify_swap();
    Ok(state)
}

//! Time evolution under static and time-dependent potentials.
//!
//! Stationary problems use exact spectral propagation. Time-dependent
//! problems use the implicit trapezoidal (Cayley / Crank–Nicolson) stepper:
//! unconditionally stable, norm-preserving, second order in dt, with the
//! potential sampled at step midpoints. The two-particle stepper splits the
//! step symmetrically into the diagonal potential phase and the two
//! commuting per-axis kinetic Cayley transforms, so every substep is exactly
//! unitary and only tridiagonal solves appear.

use ndarray::Array2;
use num_complex::Complex64;

use crate::eigensolver::Eigenstate;
use crate::error::{Error, Result};
use crate::grid::{Grid, HBAR};
use crate::linalg::{thomas_const_offdiag, ConstTridiagSolver};
use crate::potential::PotentialSamples;
use crate::twobody::Interaction;

/// A potential as a function of time, filled into per-point values.
pub trait PotentialSchedule {
    fn fill_values(&self, t: f64, out: &mut [f64]);
}

/// A static potential is a schedule that ignores time.
impl PotentialSchedule for PotentialSamples {
    fn fill_values(&self, _t: f64, out: &mut [f64]) {
        out.copy_from_slice(self.values());
    }
}

/// Options for the single-particle stepper.
#[derive(Debug, Clone)]
pub struct EvolveOptions {
    pub dt: f64,
    /// Store every this-many steps (the final state is always stored).
    pub store_stride: usize,
    /// Allowed relative norm drift before the run is rejected.
    pub norm_tol: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions { dt: 1e-3, store_stride: 10, norm_tol: 1e-6 }
    }
}

/// Decimated history of an evolution.
#[derive(Debug, Clone)]
pub struct WavefunctionTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<Complex64>>,
    pub norms: Vec<f64>,
}

impl WavefunctionTrajectory {
    pub fn final_state(&self) -> &[Complex64] {
        self.states.last().expect("trajectory holds at least the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory holds at least the initial state")
    }
}

/// Trapezoid norm of a complex single-particle state.
pub fn state_norm(state: &[Complex64], grid: &Grid) -> f64 {
    (state.iter().map(|c| c.norm_sqr()).sum::<f64>() * grid.dx()).sqrt()
}

/// Complex trapezoid inner product ⟨a|b⟩.
pub fn state_inner(a: &[Complex64], b: &[Complex64], grid: &Grid) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>() * grid.dx()
}

/// Exact (to quadrature) evolution of a state spanned by the given
/// eigenstates: Σ_k c_k e^{−iE_k t/ħ} ψ_k. Errors if the spectrum misses
/// more than 1e−8 of the initial norm.
pub fn evolve_spectral(
    initial: &[Complex64],
    spectrum: &[Eigenstate],
    grid: &Grid,
    t: f64,
) -> Result<Vec<Complex64>> {
    if initial.len() != grid.n() {
        return Err(Error::GridMismatch(format!(
            "state has {} amplitudes on a grid of {} points",
            initial.len(),
            grid.n()
        )));
    }
    let norm2: f64 = initial.iter().map(|c| c.norm_sqr()).sum::<f64>() * grid.dx();
    let coeffs: Vec<Complex64> = spectrum
        .iter()
        .map(|s| {
            s.amplitudes.iter().zip(initial).map(|(a, c)| a * c).sum::<Complex64>() * grid.dx()
        })
        .collect();
    let spanned: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    if spanned < (1.0 - 1e-8) * norm2 {
        return Err(Error::InsufficientSpan { spanned: spanned / norm2 });
    }
    let mut out = vec![Complex64::new(0.0, 0.0); grid.n()];
    for (s, c) in spectrum.iter().zip(coeffs) {
        let phase = Complex64::from_polar(1.0, -s.energy * t / HBAR);
        let amp = c * phase;
        for (o, a) in out.iter_mut().zip(&s.amplitudes) {
            *o += amp * a;
        }
    }
    Ok(out)
}

/// Probability on the left half-domain x < center.
pub fn left_population(state: &[Complex64], grid: &Grid) -> f64 {
    grid.left_half_probability(|i| state[i].norm_sqr())
}

/// Crank–Nicolson evolution under a (possibly time-dependent) potential.
///
/// Each step solves (1 + i dt/2 H(t_mid)) ψ' = (1 − i dt/2 H(t_mid)) ψ with
/// one tridiagonal solve. `dt` must divide `t_final`; the run is rejected if
/// the norm drifts by more than `opts.norm_tol` relative to the start.
pub fn evolve_timedep(
    initial: &[Complex64],
    schedule: &impl PotentialSchedule,
    grid: &Grid,
    t_final: f64,
    opts: &EvolveOptions,
) -> Result<WavefunctionTrajectory> {
    let n = grid.n();
    if initial.len() != n {
        return Err(Error::GridMismatch(format!(
            "state has {} amplitudes on a grid of {n} points",
            initial.len()
        )));
    }
    let steps = steps_for(t_final, opts.dt)?;
    let dx2 = grid.dx() * grid.dx();
    let off = Complex64::new(0.0, -0.5 * opts.dt * (-0.5 / dx2)); // i dt/2 · (−1/2dx²), conj for rhs
    let off_solve = -off;

    let norm0 = state_norm(initial, grid);
    let mut psi = initial.to_vec();
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    let mut diag_solve = vec![Complex64::new(0.0, 0.0); n];
    let mut v = vec![0.0; n];
    let mut scratch = Vec::new();

    let mut traj = WavefunctionTrajectory {
        times: vec![0.0],
        states: vec![psi.clone()],
        norms: vec![norm0],
    };

    for step in 0..steps {
        let t_mid = (step as f64 + 0.5) * opts.dt;
        schedule.fill_values(t_mid, &mut v);
        // rhs = (1 − i dt/2 H) ψ
        for i in 0..n {
            let h_d = 1.0 / dx2 + v[i];
            let mut acc = (Complex64::new(1.0, -0.5 * opts.dt * h_d)) * psi[i];
            if i > 0 {
                acc += off * psi[i - 1];
            }
            if i + 1 < n {
                acc += off * psi[i + 1];
            }
            rhs[i] = acc;
            diag_solve[i] = Complex64::new(1.0, 0.5 * opts.dt * h_d);
        }
        thomas_const_offdiag(off_solve, &diag_solve, &mut rhs, &mut scratch);
        std::mem::swap(&mut psi, &mut rhs);

        let t = (step + 1) as f64 * opts.dt;
        let nrm = state_norm(&psi, grid);
        if (nrm - norm0).abs() > opts.norm_tol * norm0 {
            return Err(Error::NormDrift {
                t,
                drift: (nrm - norm0).abs() / norm0,
                limit: opts.norm_tol,
            });
        }
        if (step + 1) % opts.store_stride == 0 || step + 1 == steps {
            traj.times.push(t);
            traj.states.push(psi.clone());
            traj.norms.push(nrm);
        }
    }
    Ok(traj)
}

fn steps_for(t_final: f64, dt: f64) -> Result<usize> {
    if !t_final.is_finite() || t_final < 0.0 {
        return Err(Error::Domain(format!("t_final must be >= 0, got {t_final}")));
    }
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::Domain(format!("dt must be > 0, got {dt}")));
    }
    if t_final == 0.0 {
        return Ok(0);
    }
    let steps = (t_final / dt).round();
    if steps < 1.0 || (steps * dt - t_final).abs() > 1e-9 * t_final.max(dt) {
        return Err(Error::Domain(format!("dt = {dt} does not divide t_final = {t_final}")));
    }
    Ok(steps as usize)
}

/// Options for the two-particle stepper.
#[derive(Debug, Clone)]
pub struct TwoBodyEvolveOptions {
    pub dt: f64,
    pub store_stride: usize,
    pub norm_tol: f64,
}

impl Default for TwoBodyEvolveOptions {
    fn default() -> Self {
        TwoBodyEvolveOptions { dt: 2e-3, store_stride: 50, norm_tol: 1e-6 }
    }
}

/// Decimated two-particle history: norms and projections onto tracked
/// basis states.
#[derive(Debug, Clone)]
pub struct TwoBodyTrajectory {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    /// `projections[s][b]` = ⟨track_b | ψ(t_s)⟩.
    pub projections: Vec<Vec<Complex64>>,
}

/// 2D trapezoid norm.
pub fn field_norm(field: &Array2<Complex64>, grid: &Grid) -> f64 {
    (field.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt() * grid.dx()
}

/// Split-step Crank–Nicolson evolution of a two-particle field under a
/// ramped potential and a diagonal pair interaction.
///
/// Step structure (potential frozen at the step midpoint):
/// half potential+interaction phase → per-axis kinetic Cayley transforms →
/// half phase. Every factor is exactly unitary; accuracy is second order.
pub fn evolve_two_body(
    initial: &Array2<Complex64>,
    schedule: &impl PotentialSchedule,
    grid: &Grid,
    interaction: &Interaction,
    t_final: f64,
    track: &[&Array2<Complex64>],
    opts: &TwoBodyEvolveOptions,
) -> Result<(Array2<Complex64>, TwoBodyTrajectory)> {
    let n = grid.n();
    if initial.nrows() != n || initial.ncols() != n {
        return Err(Error::GridMismatch(format!(
            "field is {}x{} on a grid of {n} points",
            initial.nrows(),
            initial.ncols()
        )));
    }
    let steps = steps_for(t_final, opts.dt)?;
    let dt = opts.dt;
    let dx = grid.dx();
    let dx2 = dx * dx;

    // kinetic Cayley factors per axis: T has diag 1/dx², off −1/(2dx²)
    let apply_diag = Complex64::new(1.0, -0.5 * dt / dx2);
    let apply_off = Complex64::new(0.0, 0.25 * dt / dx2);
    let solve_diag = Complex64::new(1.0, 0.5 * dt / dx2);
    let solve_off = Complex64::new(0.0, -0.25 * dt / dx2);
    let solver = ConstTridiagSolver::new(n, solve_off, solve_diag);

    // static half-step phase of the pair interaction
    let half_pair_phase: PairPhase = match *interaction {
        Interaction::Contact { strength } => {
            PairPhase::Contact(Complex64::from_polar(1.0, -0.5 * dt * strength / dx / HBAR))
        }
        Interaction::Gaussian { .. } => {
            let mut m = Array2::<Complex64>::zeros((n, n));
            for i in 0..n {
                for j in 0..n {
                    let v = interaction.pair_value(i == j, grid.position(i), grid.position(j), dx);
                    m[(i, j)] = Complex64::from_polar(1.0, -0.5 * dt * v / HBAR);
                }
            }
            PairPhase::Full(m)
        }
    };

    let norm0 = field_norm(initial, grid);
    let mut psi = initial.clone();
    let mut v = vec![0.0; n];
    let mut px = vec![Complex64::new(0.0, 0.0); n];
    let mut row_buf = vec![Complex64::new(0.0, 0.0); n];
    let mut col_buf = vec![Complex64::new(0.0, 0.0); n];

    let mut traj = TwoBodyTrajectory { times: Vec::new(), norms: Vec::new(), projections: Vec::new() };
    record(&mut traj, 0.0, &psi, grid, track, norm0);

    for step in 0..steps {
        let t_mid = (step as f64 + 0.5) * dt;
        schedule.fill_values(t_mid, &mut v);
        for i in 0..n {
            px[i] = Complex64::from_polar(1.0, -0.5 * dt * v[i] / HBAR);
        }
        let data = psi.as_slice_mut().expect("standard layout");

        apply_half_phase(data, n, &px, &half_pair_phase);

        // kinetic along x2 (contiguous rows)
        for i in 0..n {
            let row = &mut data[i * n..(i + 1) * n];
            cayley_apply(row, &mut row_buf, apply_diag, apply_off);
            row.copy_from_slice(&row_buf);
            solver.solve_in_place(row);
        }
        // kinetic along x1 (columns)
        for j in 0..n {
            for i in 0..n {
                col_buf[i] = data[i * n + j];
            }
            cayley_apply(&col_buf, &mut row_buf, apply_diag, apply_off);
            solver.solve_in_place(&mut row_buf);
            for i in 0..n {
                data[i * n + j] = row_buf[i];
            }
        }

        apply_half_phase(data, n, &px, &half_pair_phase);

        let t = (step + 1) as f64 * dt;
        let nrm = field_norm(&psi, grid);
        if (nrm - norm0).abs() > opts.norm_tol * norm0 {
            return Err(Error::NormDrift {
                t,
                drift: (nrm - norm0).abs() / norm0,
                limit: opts.norm_tol,
            });
        }
        if (step + 1) % opts.store_stride == 0 || step + 1 == steps {
            record(&mut traj, t, &psi, grid, track, nrm);
        }
    }
    Ok((psi, traj))
}

enum PairPhase {
    Contact(Complex64),
    Full(Array2<Complex64>),
}

fn apply_half_phase(data: &mut [Complex64], n: usize, px: &[Complex64], pair: &PairPhase) {
    for i in 0..n {
        let pi = px[i];
        let row = &mut data[i * n..(i + 1) * n];
        for (j, cell) in row.iter_mut().enumerate() {
            *cell *= pi * px[j];
        }
        match pair {
            PairPhase::Contact(pd) => row[i] *= pd,
            PairPhase::Full(m) => {
                for (j, cell) in row.iter_mut().enumerate() {
                    *cell *= m[(i, j)];
                }
            }
        }
    }
}

/// out = (1 − i dt/2 T) x for the kinetic tridiagonal T.
fn cayley_apply(x: &[Complex64], out: &mut [Complex64], diag: Complex64, off: Complex64) {
    let n = x.len();
    out[0] = diag * x[0] + off * x[1];
    for i in 1..n - 1 {
        out[i] = diag * x[i] + off * (x[i - 1] + x[i + 1]);
    }
    out[n - 1] = diag * x[n - 1] + off * x[n - 2];
}

fn record(
    traj: &mut TwoBodyTrajectory,
    t: f64,
    psi: &Array2<Complex64>,
    grid: &Grid,
    track: &[&Array2<Complex64>],
    norm: f64,
) {
    traj.times.push(t);
    traj.norms.push(norm);
    let dx2 = grid.dx() * grid.dx();
    let projections = track
        .iter()
        .map(|b| b.iter().zip(psi.iter()).map(|(x, y)| x.conj() * y).sum::<Complex64>() * dx2)
        .collect();
    traj.projections.push(projections);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolver::{
        assemble_hamiltonian, localized_pair, lowest_orbital_pair, solve_lowest, tunneling_rate,
    };
    use crate::grid::build_grid;
    use crate::potential::{sample_potential, PotentialSpec};
    use crate::twobody::{build_two_body_hamiltonian, solve_sector, Sign, SolveOpts, SymmetrySector};

    fn complexify(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    #[test]
    fn spectral_evolution_of_eigenstate_is_a_phase() {
        let g = build_grid(200, 0.0, 1.0).unwrap();
        let s = sample_potential(&PotentialSpec::infinite_box(1.0), &g).unwrap();
        let states = solve_lowest(&assemble_hamiltonian(&s), 2).unwrap();
        let psi0 = complexify(&states[0].amplitudes);
        let t = 0.37;
        let out = evolve_spectral(&psi0, &states, &g, t).unwrap();
        let phase = Complex64::from_polar(1.0, -states[0].energy * t);
        let err: f64 = out
            .iter()
            .zip(&psi0)
            .map(|(a, b)| (a - phase * b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "max deviation {err}");
    }

    #[test]
    fn spectral_evolution_needs_spanning_spectrum() {
        let g = build_grid(200, 0.0, 1.0).unwrap();
        let s = sample_potential(&PotentialSpec::infinite_box(1.0), &g).unwrap();
        let states = solve_lowest(&assemble_hamiltonian(&s), 2).unwrap();
        // ground + second excited is not spanned by the lowest two
        let psi0: Vec<Complex64> = {
            let more = solve_lowest(&assemble_hamiltonian(&s), 3).unwrap();
            (0..g.n())
                .map(|i| {
                    Complex64::new(
                        (more[0].amplitudes[i] + more[2].amplitudes[i])
                            * std::f64::consts::FRAC_1_SQRT_2,
                        0.0,
                    )
                })
                .collect()
        };
        match evolve_spectral(&psi0, &states, &g, 1.0) {
            Err(Error::InsufficientSpan { spanned }) => assert!(spanned < 0.6),
            other => panic!("expected span error, got {other:?}"),
        }
    }

    #[test]
    fn tunneling_oscillation_follows_two_mode_formula() {
        // high barrier: |L> population follows cos²(Ωt/2) to ~1e−6
        let g = build_grid(601, 0.0, 1.0).unwrap();
        let s = sample_potential(&PotentialSpec::double_box(1.0, 0.1, 1e4), &g).unwrap();
        let op = assemble_hamiltonian(&s);
        let pair = lowest_orbital_pair(&op).unwrap();
        let states = solve_lowest(&op, 2).unwrap();
        let loc = localized_pair(&pair, &g);
        let omega = tunneling_rate(&pair);
        let psi0 = complexify(&loc.left);
        let p0 = left_population(&psi0, &g);
        assert!(p0 > 1.0 - 1e-6, "initial localization {p0}");

        let period = 2.0 * std::f64::consts::PI / omega;
        for frac in [0.0, 0.1, 0.25, 0.4, 0.5, 0.75, 1.0] {
            let t = frac * period;
            let psi = evolve_spectral(&psi0, &states, &g, t).unwrap();
            let p = left_population(&psi, &g);
            let expected = (0.5 * omega * t).cos().powi(2);
            assert!((p - expected).abs() < 2e-6, "t = {t}: {p} vs {expected}");
        }
        // half period: proportional to |R>; full period: back to |L>
        let half = evolve_spectral(&psi0, &states, &g, 0.5 * period).unwrap();
        let overlap_r = state_inner(&complexify(&loc.right), &half, &g).norm();
        assert!((overlap_r - 1.0).abs() < 1e-9);
        let full = evolve_spectral(&psi0, &states, &g, period).unwrap();
        let overlap_l = state_inner(&psi0, &full, &g).norm();
        assert!((overlap_l - 1.0).abs() < 1e-9);
    }

    #[test]
    fn even_state_has_exactly_half_left_population() {
        let g = build_grid(201, 0.0, 1.0).unwrap();
        let s = sample_potential(&PotentialSpec::double_box(1.0, 0.1, 300.0), &g).unwrap();
        let states = solve_lowest(&assemble_hamiltonian(&s), 1).unwrap();
        let p = left_population(&complexify(&states[0].amplitudes), &g);
        // exact up to the state's own normalization error
        assert!((p - 0.5).abs() < 1e-12, "p = {p}");
    }

    #[test]
    fn cn_matches_spectral_for_static_potential() {
        // wide box keeps phase errors tiny at dt = 1e−4
        let g = build_grid(300, 0.0, 3.0).unwrap();
        let s = sample_potential(&PotentialSpec::infinite_box(3.0), &g).unwrap();
        let states = solve_lowest(&assemble_hamiltonian(&s), 2).unwrap();
        let psi0: Vec<Complex64> = (0..g.n())
            .map(|i| {
                Complex64::new(
                    (states[0].amplitudes[i] + states[1].amplitudes[i])
                        * std::f64::consts::FRAC_1_SQRT_2,
                    0.0,
                )
            })
            .collect();
        let t_final = 10.0;
        let opts = EvolveOptions { dt: 1e-4, store_stride: 10_000, norm_tol: 1e-6 };
        let traj = evolve_timedep(&psi0, &s, &g, t_final, &opts).unwrap();
        let exact = evolve_spectral(&psi0, &states, &g, t_final).unwrap();
        let err: f64 = traj
            .final_state()
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "CN vs spectral max deviation {err}");
        // unitarity over the whole run
        for nrm in &traj.norms {
            assert!((nrm - traj.norms[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn cn_is_second_order_in_dt() {
        let g = build_grid(200, 0.0, 1.0).unwrap();
        let s = sample_potential(&PotentialSpec::double_box(1.0, 0.1, 100.0), &g).unwrap();
        let pair = lowest_orbital_pair(&assemble_hamiltonian(&s)).unwrap();
        let loc = localized_pair(&pair, &g);
        let psi0 = complexify(&loc.left);
        let t_final = 0.5;
        let run = |dt: f64| {
            let opts = EvolveOptions { dt, store_stride: usize::MAX, norm_tol: 1e-6 };
            evolve_timedep(&psi0, &s, &g, t_final, &opts).unwrap().final_state().to_vec()
        };
        let (a, b, c) = (run(1e-3), run(5e-4), run(2.5e-4));
        let d1: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
        let d2: f64 = b.iter().zip(&c).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
        let ratio = d1 / d2;
        assert!((ratio - 4.0).abs() < 0.5, "self-convergence ratio {ratio}");
    }

    #[test]
    fn zero_duration_evolution_is_identity() {
        let g = build_grid(64, 0.0, 1.0).unwrap();
        let s = sample_potential(&PotentialSpec::infinite_box(1.0), &g).unwrap();
        let states = solve_lowest(&assemble_hamiltonian(&s), 1).unwrap();
        let psi0 = complexify(&states[0].amplitudes);
        let traj = evolve_timedep(&psi0, &s, &g, 0.0, &EvolveOptions::default()).unwrap();
        assert_eq!(traj.times, vec![0.0]);
        assert_eq!(traj.final_state(), &psi0[..]);
    }

    #[test]
    fn dt_must_divide_t_final() {
        let g = build_grid(64, 0.0, 1.0).unwrap();
        let s = sample_potential(&PotentialSpec::infinite_box(1.0), &g).unwrap();
        let psi0 = vec![Complex64::new(1.0, 0.0); g.n()];
        let opts = EvolveOptions { dt: 0.3, ..Default::default() };
        assert!(matches!(
            evolve_timedep(&psi0, &s, &g, 1.0, &opts),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn cn_time_reversal_via_conjugation() {
        // for a real H, conj∘U_rev∘conj inverts the forward map exactly
        struct LinearRamp<'a> {
            base: &'a PotentialSamples,
            rate: f64,
            t_total: f64,
            reversed: bool,
        }
        impl PotentialSchedule for LinearRamp<'_> {
            fn fill_values(&self, t: f64, out: &mut [f64]) {
                let tt = if self.reversed { self.t_total - t } else { t };
                for (o, v) in out.iter_mut().zip(self.base.values()) {
                    *o = v * (1.0 + self.rate * tt);
                }
            }
        }
        let g = build_grid(150, 0.0, 1.0).unwrap();
        let s = sample_potential(&PotentialSpec::double_box(1.0, 0.1, 80.0), &g).unwrap();
        let pair = lowest_orbital_pair(&assemble_hamiltonian(&s)).unwrap();
        let loc = localized_pair(&pair, &g);
        let psi0 = complexify(&loc.left);
        let t_total = 0.8;
        let opts = EvolveOptions { dt: 1e-3, store_stride: usize::MAX, norm_tol: 1e-5 };

        let fwd = LinearRamp { base: &s, rate: 0.6, t_total, reversed: false };
        let traj = evolve_timedep(&psi0, &fwd, &g, t_total, &opts).unwrap();
        let mut conj: Vec<Complex64> = traj.final_state().iter().map(|c| c.conj()).collect();
        let back = LinearRamp { base: &s, rate: 0.6, t_total, reversed: true };
        let traj2 = evolve_timedep(&conj, &back, &g, t_total, &opts).unwrap();
        conj = traj2.final_state().iter().map(|c| c.conj()).collect();

        let err: f64 = conj.iter().zip(&psi0).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-5, "time-reversal deviation {err}");
    }

    #[test]
    fn two_body_eigenstate_acquires_only_a_phase() {
        let g = build_grid(32, 0.0, 1.0).unwrap();
        let s = sample_potential(&PotentialSpec::double_box(1.0, 0.2, 500.0), &g).unwrap();
        let inter = Interaction::contact(0.5);
        let h = build_two_body_hamiltonian(&s, &inter).unwrap();
        let sector = SymmetrySector { swap: Sign::Plus, parity: Some(Sign::Plus) };
        let (e_a, v_a) = solve_sector(&h, sector, 1, None, &SolveOpts::default())
            .unwrap()
            .remove(0);
        let n = g.n();
        let mut field = Array2::<Complex64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                field[(i, j)] = Complex64::new(v_a[i * n + j] / g.dx(), 0.0);
            }
        }
        let t_final = 1.0;
        let opts = TwoBodyEvolveOptions { dt: 1e-4, store_stride: usize::MAX, norm_tol: 1e-8 };
        let (final_field, traj) =
            evolve_two_body(&field, &s, &g, &inter, t_final, &[&field], &opts).unwrap();
        // every substep is unitary: only roundoff accumulates over 10^4 steps
        for nrm in &traj.norms {
            assert!((nrm - traj.norms[0]).abs() < 1e-10);
        }
        let overlap = crate::twobody::inner_product(&field, &final_field, &g);
        assert!((overlap.norm() - 1.0).abs() < 1e-8, "modulus {}", overlap.norm());
        let phase_err = (overlap.arg() + e_a * t_final).rem_euclid(2.0 * std::f64::consts::PI);
        let phase_err = phase_err.min(2.0 * std::f64::consts::PI - phase_err);
        assert!(phase_err < 2e-3, "phase error {phase_err}");
    }

    #[test]
    fn two_body_stepper_is_second_order() {
        let g = build_grid(24, 0.0, 1.0).unwrap();
        let s = sample_potential(&PotentialSpec::double_box(1.0, 0.2, 200.0), &g).unwrap();
        let inter = Interaction::contact(0.5);
        let h = build_two_body_hamiltonian(&s, &inter).unwrap();
        let sector = SymmetrySector { swap: Sign::Plus, parity: Some(Sign::Plus) };
        let (_, v) = solve_sector(&h, sector, 1, None, &SolveOpts::default()).unwrap().remove(0);
        let n = g.n();
        let mut lo = Array2::<Complex64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                lo[(i, j)] = Complex64::new(v[i * n + j] / g.dx(), 0.0);
            }
        }
        // drive it off-eigenstate with a ramped barrier for a non-trivial path
        struct Pulse<'a> {
            base: &'a PotentialSamples,
        }
        impl PotentialSchedule for Pulse<'_> {
            fn fill_values(&self, t: f64, out: &mut [f64]) {
                let f = 1.0 - 0.5 * (std::f64::consts::PI * t / 0.4).sin().powi(2);
                for (o, v) in out.iter_mut().zip(self.base.values()) {
                    *o = v * f;
                }
            }
        }
        let sched = Pulse { base: &s };
        let run = |dt: f64| {
            let opts = TwoBodyEvolveOptions { dt, store_stride: usize::MAX, norm_tol: 1e-5 };
            evolve_two_body(&lo, &sched, &g, &inter, 0.4, &[], &opts).unwrap().0
        };
        let (a, b, c) = (run(2e-3), run(1e-3), run(5e-4));
        let d1: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
        let d2: f64 = b.iter().zip(c.iter()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
        let ratio = d1 / d2;
        assert!((ratio - 4.0).abs() < 0.6, "two-body self-convergence ratio {ratio}");
    }

    #[test]
    fn two_body_stepper_preserves_exchange_symmetry() {
        let g = build_grid(20, 0.0, 1.0).unwrap();
        let s = sample_potential(&PotentialSpec::double_box(1.0, 0.2, 100.0), &g).unwrap();
        let inter = Interaction::contact(0.7);
        let h = build_two_body_hamiltonian(&s, &inter).unwrap();
        let sector = SymmetrySector { swap: Sign::Minus, parity: Some(Sign::Minus) };
        let (_, v) = solve_sector(&h, sector, 1, None, &SolveOpts::default()).unwrap().remove(0);
        let n = g.n();
        let mut field = Array2::<Complex64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                field[(i, j)] = Complex64::new(v[i * n + j] / g.dx(), 0.0);
            }
        }
        let opts = TwoBodyEvolveOptions { dt: 1e-3, store_stride: usize::MAX, norm_tol: 1e-6 };
        let (out, _) = evolve_two_body(&field, &s, &g, &inter, 0.3, &[], &opts).unwrap();
        let state = crate::twobody::TwoBodyState {
            amplitudes: out,
            exchange_symmetry: crate::twobody::SwapSymmetry::None,
        };
        assert_eq!(state.classify_swap(), crate::twobody::SwapSymmetry::Antisymmetric);
    }
}

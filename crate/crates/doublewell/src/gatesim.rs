//! Adiabatic barrier-ramp gate between two spin-½ atoms in a double well.
//!
//! Lowering and raising the barrier makes the symmetric and antisymmetric
//! two-particle spatial states (paths a and b of the level diagram)
//! accumulate a relative phase Δφ = ∫(E_b − E_a) dt / ħ. On the
//! computational basis this realizes, up to a global phase,
//! diag(1, M, 1) with M = [[(1+e^{iΔφ})/2, (1−e^{iΔφ})/2], ...]: Δφ = π is
//! SWAP, Δφ = π/2 is √SWAP. Because the Hamiltonian is spin-independent,
//! the simulation evolves only the two spatial sectors (the symmetric one
//! carries the leakage channel into the doubly-occupied states) and
//! reconstructs the realized 4×4 unitary through the computational-basis
//! encoding.

use std::collections::BTreeMap;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve_two_body, PotentialSchedule, TwoBodyEvolveOptions, TwoBodyTrajectory};
use crate::eigensolver::{assemble_hamiltonian, localized_pair, lowest_orbital_pair};
use crate::error::{Error, Result};
use crate::grid::{Grid, HBAR, PLANCK};
use crate::potential::{sample_potential, PotentialSamples, PotentialSpec};
use crate::spinstat::QubitState;
use crate::twobody::{
    build_two_body_hamiltonian, inner_product, onsite_energy, solve_sector, Interaction, Sign,
    SolveOpts, SymmetrySector, TwoBodyHamiltonian,
};

/// 4×4 complex matrix on the computational basis {|00⟩,|01⟩,|10⟩,|11⟩}.
pub type Mat4 = [[Complex64; 4]; 4];

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn cone() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

pub fn mat4_identity() -> Mat4 {
    let mut m = [[czero(); 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = cone();
    }
    m
}

pub fn mat4_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[czero(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn mat4_adjoint(a: &Mat4) -> Mat4 {
    let mut out = [[czero(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = a[j][i].conj();
        }
    }
    out
}

/// Largest entrywise deviation between two matrices.
pub fn mat4_max_diff(a: &Mat4, b: &Mat4) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            worst = worst.max((a[i][j] - b[i][j]).norm());
        }
    }
    worst
}

/// Entrywise deviation of U†U from the identity.
pub fn unitarity_error(u: &Mat4) -> f64 {
    mat4_max_diff(&mat4_mul(&mat4_adjoint(u), u), &mat4_identity())
}

fn mat4_to_pairs(m: &Mat4) -> [[[f64; 2]; 4]; 4] {
    let mut out = [[[0.0; 2]; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = [m[i][j].re, m[i][j].im];
        }
    }
    out
}

/// The SWAP matrix on the computational basis.
pub fn swap_matrix() -> Mat4 {
    let mut m = [[czero(); 4]; 4];
    m[0][0] = cone();
    m[1][2] = cone();
    m[2][1] = cone();
    m[3][3] = cone();
    m
}

/// Ideal gate for an accumulated phase Δφ: |00⟩ and |11⟩ fixed, and on
/// span{|01⟩, |10⟩} the block [[(1+e^{iΔφ})/2, (1−e^{iΔφ})/2], [(1−e^{iΔφ})/2,
/// (1+e^{iΔφ})/2]], up to a global phase.
pub fn ideal_gate(delta_phi: f64) -> Mat4 {
    let e = Complex64::from_polar(1.0, delta_phi);
    let p = 0.5 * (cone() + e);
    let m = 0.5 * (cone() - e);
    let mut u = [[czero(); 4]; 4];
    u[0][0] = cone();
    u[1][1] = p;
    u[1][2] = m;
    u[2][1] = m;
    u[2][2] = p;
    u[3][3] = cone();
    u
}

/// Check U_√SWAP·U_√SWAP = U_SWAP entrywise to 1e−12.
pub fn verify_sqrt_swap() -> bool {
    let sqrt_swap = ideal_gate(0.5 * std::f64::consts::PI);
    let squared = mat4_mul(&sqrt_swap, &sqrt_swap);
    mat4_max_diff(&squared, &swap_matrix()) <= 1e-12
        && mat4_max_diff(&ideal_gate(std::f64::consts::PI), &swap_matrix()) <= 1e-12
}

/// Apply a 4×4 unitary to a two-qubit state.
pub fn apply_gate(u: &Mat4, q: &QubitState) -> QubitState {
    let mut amplitudes = [czero(); 4];
    for (i, out) in amplitudes.iter_mut().enumerate() {
        *out = (0..4).map(|k| u[i][k] * q.amplitudes[k]).sum();
    }
    QubitState { amplitudes }
}

/// Two-qubit concurrence C = 2|ad − bc| for amplitudes (a, b, c, d).
pub fn concurrence(q: &QubitState) -> f64 {
    let [a, b, c, d] = q.amplitudes;
    2.0 * (a * d - b * c).norm()
}

/// Global-phase-invariant gate fidelity |tr(U_ideal† U_real)| / 4.
pub fn gate_fidelity(ideal: &Mat4, real: &Mat4) -> f64 {
    let prod = mat4_mul(&mat4_adjoint(ideal), real);
    let tr: Complex64 = (0..4).map(|i| prod[i][i]).sum();
    tr.norm() / 4.0
}

/// Edge shape of the barrier ramp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RampShape {
    Smoothstep,
    Linear,
    Cosine,
}

impl RampShape {
    /// Monotone profile s(τ) with s(0) = 0, s(1) = 1.
    fn profile(&self, tau: f64) -> f64 {
        let t = tau.clamp(0.0, 1.0);
        match self {
            RampShape::Smoothstep => t * t * (3.0 - 2.0 * t),
            RampShape::Linear => t,
            RampShape::Cosine => 0.5 * (1.0 - (std::f64::consts::PI * t).cos()),
        }
    }
}

/// Barrier schedule of the gate: V_high → V_low over `t_ramp`, hold for
/// `t_hold`, back up over `t_ramp`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RampProfile {
    pub v_high: f64,
    pub v_low: f64,
    pub t_ramp: f64,
    pub t_hold: f64,
    pub shape: RampShape,
}

impl RampProfile {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("v_high", self.v_high), ("v_low", self.v_low)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Domain(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.v_high < self.v_low {
            return Err(Error::Domain(format!(
                "v_high = {} must not lie below v_low = {}",
                self.v_high, self.v_low
            )));
        }
        for (name, v) in [("t_ramp", self.t_ramp), ("t_hold", self.t_hold)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Domain(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn total_duration(&self) -> f64 {
        2.0 * self.t_ramp + self.t_hold
    }

    /// Barrier height on the descending edge at normalized time τ ∈ [0, 1].
    pub fn edge_value(&self, tau: f64) -> f64 {
        self.v_high + (self.v_low - self.v_high) * self.shape.profile(tau)
    }

    /// Barrier height at time t (continuous, piecewise smooth; V_high
    /// outside [0, T]).
    pub fn barrier_at(&self, t: f64) -> f64 {
        let total = self.total_duration();
        if t <= 0.0 || t >= total {
            return self.v_high;
        }
        if self.t_ramp > 0.0 && t < self.t_ramp {
            return self.edge_value(t / self.t_ramp);
        }
        if t < self.t_ramp + self.t_hold {
            return self.v_low;
        }
        self.edge_value((total - t) / self.t_ramp)
    }

    pub fn with_hold(&self, t_hold: f64) -> RampProfile {
        RampProfile { t_hold, ..*self }
    }
}

/// Time-dependent double-box potential driven by a ramp profile.
pub struct BarrierSchedule {
    barrier_indices: Vec<usize>,
    n: usize,
    ramp: RampProfile,
}

impl BarrierSchedule {
    pub fn new(ctx: &GateContext, ramp: RampProfile) -> Result<Self> {
        let probe = sample_potential(
            &PotentialSpec::double_box(ctx.box_length, ctx.barrier_width, 1.0),
            &ctx.grid,
        )?;
        let barrier_indices =
            probe.values().iter().enumerate().filter(|(_, &v)| v > 0.5).map(|(i, _)| i).collect();
        Ok(BarrierSchedule { barrier_indices, n: ctx.grid.n(), ramp })
    }
}

impl PotentialSchedule for BarrierSchedule {
    fn fill_values(&self, t: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.n);
        let v_b = self.ramp.barrier_at(t);
        out.fill(0.0);
        for &i in &self.barrier_indices {
            out[i] = v_b;
        }
    }
}

/// Instantaneous energies of the four lowest two-body levels, labeled by
/// (exchange symmetry, parity): a = lowest (S, even), b = lowest (A, odd),
/// c = second (S, even), d = lowest (S, odd).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FourLevels {
    pub e_a: f64,
    pub e_b: f64,
    pub e_c: f64,
    pub e_d: f64,
}

/// Level energies a–d along a barrier sweep; rows export as CSV for
/// re-plotting the gate's level diagram.
#[derive(Debug, Clone, Serialize)]
pub struct LevelDiagram {
    pub barrier: Vec<f64>,
    pub e_a: Vec<f64>,
    pub e_b: Vec<f64>,
    pub e_c: Vec<f64>,
    pub e_d: Vec<f64>,
}

impl LevelDiagram {
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "V_b,E_a,E_b,E_c,E_d")?;
        for i in 0..self.barrier.len() {
            writeln!(
                out,
                "{},{},{},{},{}",
                self.barrier[i], self.e_a[i], self.e_b[i], self.e_c[i], self.e_d[i]
            )?;
        }
        Ok(())
    }
}

/// Numeric options for the gate pipeline.
#[derive(Debug, Clone)]
pub struct GateOptions {
    /// Target step for the sector evolutions (adjusted to divide T).
    pub dt: f64,
    /// Initial Simpson interval count per ramp edge.
    pub n_quad: usize,
    /// Convergence target for the phase quadrature, in radians.
    pub quad_tol: f64,
    /// Sector eigensolver options.
    pub solver: SolveOpts,
    /// Trajectory decimation for the sector evolutions.
    pub store_stride: usize,
    /// Upper bracket for hold-time calibration.
    pub max_hold: f64,
}

impl Default for GateOptions {
    fn default() -> Self {
        GateOptions {
            dt: 1e-3,
            n_quad: 16,
            quad_tol: 1e-4,
            solver: SolveOpts::default(),
            store_stride: 200,
            max_hold: 2000.0,
        }
    }
}

/// Everything fixed about the gate apparatus: geometry, grid, interaction.
pub struct GateContext {
    grid: Grid,
    box_length: f64,
    barrier_width: f64,
    interaction: Interaction,
    opts: GateOptions,
}

/// Converged phase quadrature along a ramp.
#[derive(Debug, Clone, Copy)]
pub struct PhaseQuadrature {
    /// Δφ = ∫ (E_b − E_a) dt / ħ over the whole schedule.
    pub delta_phi: f64,
    /// Smallest a–c gap seen along the path (adiabaticity bottleneck).
    pub min_gap: f64,
    /// a–b gap while holding at V_low.
    pub hold_gap: f64,
    /// Phase contributed by one edge.
    pub edge_phase: f64,
    /// Simpson intervals per edge at convergence.
    pub n_intervals: usize,
}

/// Full outcome of a simulated gate: the report plus the decimated sector
/// trajectories (projections onto the states a, c and b respectively).
#[derive(Debug, Clone)]
pub struct GateRun {
    pub report: GateReport,
    pub sym_trajectory: TwoBodyTrajectory,
    pub anti_trajectory: TwoBodyTrajectory,
}

/// Gate diagnostics. Matrices are stored as nested [re, im] pairs.
#[derive(Debug, Clone, Serialize)]
pub struct GateReport {
    pub ramp: RampProfile,
    pub target_phase: f64,
    /// Relative phase realized by the dynamics, lifted to the branch
    /// nearest the quadrature value.
    pub delta_phi: f64,
    /// Δφ from the level-diagram quadrature.
    pub delta_phi_quadrature: f64,
    /// |delta_phi − delta_phi_quadrature| (statics vs dynamics cross-check).
    pub phase_discrepancy: f64,
    pub ideal_unitary: [[[f64; 2]; 4]; 4],
    pub realized_unitary: [[[f64; 2]; 4]; 4],
    /// |tr(U_ideal† U_real)| / 4 against ideal_gate(target_phase).
    pub fidelity: f64,
    /// Worst-sector probability lost from the computational subspace.
    pub leakage: f64,
    pub leakage_symmetric_sector: f64,
    pub leakage_antisymmetric_sector: f64,
    pub min_gap: f64,
    pub onsite_energy: f64,
    /// T·U/h: gate duration in units of h/U.
    pub adiabaticity_ratio: f64,
    pub total_duration: f64,
    /// Set when leakage exceeds 0.5 (states a and c mixed).
    pub diabatic_failure: bool,
}

impl GateContext {
    pub fn new(
        grid: Grid,
        box_length: f64,
        barrier_width: f64,
        interaction: Interaction,
        opts: GateOptions,
    ) -> Result<Self> {
        if (grid.span() - box_length).abs() > 1e-9 * box_length {
            return Err(Error::GridMismatch(format!(
                "grid extent {} does not match the box length {box_length}",
                grid.span()
            )));
        }
        PotentialSpec::double_box(box_length, barrier_width, 0.0).validate()?;
        Ok(GateContext { grid, box_length, barrier_width, interaction, opts })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn options(&self) -> &GateOptions {
        &self.opts
    }

    pub fn interaction(&self) -> &Interaction {
        &self.interaction
    }

    fn samples_at(&self, v_b: f64) -> Result<PotentialSamples> {
        sample_potential(
            &PotentialSpec::double_box(self.box_length, self.barrier_width, v_b),
            &self.grid,
        )
    }

    fn hamiltonian_at(&self, v_b: f64) -> Result<TwoBodyHamiltonian> {
        build_two_body_hamiltonian(&self.samples_at(v_b)?, &self.interaction)
    }

    /// On-site energy U = a∫|ψ_R|⁴ of the localized orbital at barrier v_b.
    pub fn onsite_at(&self, v_b: f64) -> Result<f64> {
        let op = assemble_hamiltonian(&self.samples_at(v_b)?);
        let pair = lowest_orbital_pair(&op)?;
        let loc = localized_pair(&pair, &self.grid);
        onsite_energy(&loc.right, &self.grid, &self.interaction)
    }

    /// Energies of the four gate-relevant levels at barrier height v_b.
    pub fn instantaneous_levels(&self, v_b: f64) -> Result<FourLevels> {
        let h = self.hamiltonian_at(v_b)?;
        if !h.has_symmetric_potential() {
            return Err(Error::LabelingAmbiguity(
                "levels need parity labels, but the potential is asymmetric".into(),
            ));
        }
        let se = solve_sector(
            &h,
            SymmetrySector { swap: Sign::Plus, parity: Some(Sign::Plus) },
            2,
            None,
            &self.opts.solver,
        )?;
        let sa = solve_sector(
            &h,
            SymmetrySector { swap: Sign::Minus, parity: Some(Sign::Minus) },
            1,
            None,
            &self.opts.solver,
        )?;
        let so = solve_sector(
            &h,
            SymmetrySector { swap: Sign::Plus, parity: Some(Sign::Minus) },
            1,
            None,
            &self.opts.solver,
        )?;
        Ok(FourLevels { e_a: se[0].0, e_b: sa[0].0, e_c: se[1].0, e_d: so[0].0 })
    }

    /// Level diagram across a barrier sweep, solved sequentially with warm
    /// starts.
    pub fn level_diagram(&self, barriers: &[f64]) -> Result<LevelDiagram> {
        let mut out = LevelDiagram {
            barrier: barriers.to_vec(),
            e_a: Vec::new(),
            e_b: Vec::new(),
            e_c: Vec::new(),
            e_d: Vec::new(),
        };
        let mut warm_se: Option<Vec<f64>> = None;
        let mut warm_sa: Option<Vec<f64>> = None;
        let mut warm_so: Option<Vec<f64>> = None;
        for &v_b in barriers {
            let h = self.hamiltonian_at(v_b)?;
            let se = solve_sector(
                &h,
                SymmetrySector { swap: Sign::Plus, parity: Some(Sign::Plus) },
                2,
                warm_se.as_deref(),
                &self.opts.solver,
            )?;
            let sa = solve_sector(
                &h,
                SymmetrySector { swap: Sign::Minus, parity: Some(Sign::Minus) },
                1,
                warm_sa.as_deref(),
                &self.opts.solver,
            )?;
            let so = solve_sector(
                &h,
                SymmetrySector { swap: Sign::Plus, parity: Some(Sign::Minus) },
                1,
                warm_so.as_deref(),
                &self.opts.solver,
            )?;
            warm_se = Some(combine(&se[0].1, &se[1].1));
            warm_sa = Some(sa[0].1.clone());
            warm_so = Some(so[0].1.clone());
            out.e_a.push(se[0].0);
            out.e_b.push(sa[0].0);
            out.e_c.push(se[1].0);
            out.e_d.push(so[0].0);
        }
        Ok(out)
    }

    /// Quadrature of Δφ = ∫(E_b − E_a) dt/ħ over the ramp, refined until
    /// doubling the per-edge Simpson intervals moves the result by less
    /// than `quad_tol`.
    pub fn accumulate_phase(&self, ramp: &RampProfile) -> Result<PhaseQuadrature> {
        ramp.validate()?;
        let mut sweep = GapSweep::new(self, ramp);
        if ramp.total_duration() == 0.0 {
            let (_, gap_ac) = sweep.gaps_at_tau(0.0)?;
            return Ok(PhaseQuadrature {
                delta_phi: 0.0,
                min_gap: gap_ac,
                hold_gap: 0.0,
                edge_phase: 0.0,
                n_intervals: 0,
            });
        }
        let (hold_gap, _) = sweep.gaps_at_tau(1.0)?;
        let mut n = self.opts.n_quad.max(4).next_multiple_of(2);
        let mut last: Option<f64> = None;
        for _ in 0..4 {
            let edge = if ramp.t_ramp > 0.0 { sweep.edge_simpson(n)? } else { 0.0 };
            let edge_phase = ramp.t_ramp * edge / HBAR;
            let total = 2.0 * edge_phase + hold_gap * ramp.t_hold / HBAR;
            if let Some(prev) = last {
                if (total - prev).abs() < self.opts.quad_tol {
                    return Ok(PhaseQuadrature {
                        delta_phi: total,
                        min_gap: sweep.min_gap_ac,
                        hold_gap,
                        edge_phase,
                        n_intervals: n,
                    });
                }
            }
            last = Some(total);
            if ramp.t_ramp == 0.0 {
                // hold-only ramp: the quadrature is already exact
                return Ok(PhaseQuadrature {
                    delta_phi: total,
                    min_gap: sweep.min_gap_ac,
                    hold_gap,
                    edge_phase: 0.0,
                    n_intervals: 0,
                });
            }
            n *= 2;
        }
        Err(Error::QuadratureDivergence(format!(
            "edge quadrature still moving after {n} intervals"
        )))
    }

    /// Adjust the hold time so the accumulated phase hits `target` within
    /// 1e−3 rad, by bracketed bisection on the monotone map t_hold → Δφ.
    pub fn calibrate_ramp(&self, target: f64, template: &RampProfile) -> Result<RampProfile> {
        if !target.is_finite() || target < 0.0 {
            return Err(Error::Domain(format!("target phase must be >= 0, got {target}")));
        }
        let tol = 1e-3;
        let base = self.accumulate_phase(&template.with_hold(0.0))?;
        let phi0 = base.delta_phi;
        if phi0 > target + tol {
            return Err(Error::BracketFailure(format!(
                "ramp edges alone accumulate {phi0:.6} rad > target {target:.6}"
            )));
        }
        if base.hold_gap <= 0.0 {
            if (phi0 - target).abs() <= tol {
                return Ok(template.with_hold(0.0));
            }
            return Err(Error::BracketFailure(
                "holding adds no phase (zero a-b gap at V_low)".into(),
            ));
        }
        let mut lo = 0.0f64;
        let mut hi = self.opts.max_hold;
        let phi_at = |h: f64| phi0 + base.hold_gap * h / HBAR;
        if phi_at(hi) < target - tol {
            return Err(Error::BracketFailure(format!(
                "target {target:.6} rad unreachable within max hold time {hi}"
            )));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let phi = phi_at(mid);
            if (phi - target).abs() <= 0.5 * tol {
                return Ok(template.with_hold(mid));
            }
            if phi < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Err(Error::BracketFailure("hold-time bisection failed to converge".into()))
    }

    /// Simulate the ramp: evolve the symmetric sector (state a, carrying
    /// the leakage channel into c) and the antisymmetric sector (state b),
    /// extract the realized unitary through the computational-basis
    /// encoding, and report fidelity against ideal_gate(target_phase).
    pub fn simulate_gate(&self, ramp: &RampProfile, target_phase: f64) -> Result<GateRun> {
        ramp.validate()?;
        let total = ramp.total_duration();

        // stationary states at V_high bracket the evolution
        let h_high = self.hamiltonian_at(ramp.v_high)?;
        let se = solve_sector(
            &h_high,
            SymmetrySector { swap: Sign::Plus, parity: Some(Sign::Plus) },
            2,
            None,
            &self.opts.solver,
        )?;
        let sa = solve_sector(
            &h_high,
            SymmetrySector { swap: Sign::Minus, parity: Some(Sign::Minus) },
            1,
            None,
            &self.opts.solver,
        )?;
        let n = self.grid.n();
        let a_field = flat_to_field(&se[0].1, n, self.grid.dx());
        let c_field = flat_to_field(&se[1].1, n, self.grid.dx());
        let b_field = flat_to_field(&sa[0].1, n, self.grid.dx());

        let u_onsite = self.onsite_at(ramp.v_high)?;
        let quad = self.accumulate_phase(ramp)?;

        let stationary_traj = |projections: Vec<Complex64>| TwoBodyTrajectory {
            times: vec![0.0],
            norms: vec![1.0],
            projections: vec![projections],
        };
        let (amp_a, amp_b, sym_traj, anti_traj) = if total == 0.0 {
            (
                cone(),
                cone(),
                stationary_traj(vec![cone(), czero()]),
                stationary_traj(vec![cone()]),
            )
        } else {
            let schedule = BarrierSchedule::new(self, *ramp)?;
            let steps = (total / self.opts.dt).ceil().max(1.0);
            let ev_opts = TwoBodyEvolveOptions {
                dt: total / steps,
                store_stride: self.opts.store_stride,
                norm_tol: 1e-6,
            };
            let (sym_res, anti_res) = std::thread::scope(|scope| {
                let sym_handle = scope.spawn(|| {
                    evolve_two_body(
                        &a_field,
                        &schedule,
                        &self.grid,
                        &self.interaction,
                        total,
                        &[&a_field, &c_field],
                        &ev_opts,
                    )
                });
                let anti = evolve_two_body(
                    &b_field,
                    &schedule,
                    &self.grid,
                    &self.interaction,
                    total,
                    &[&b_field],
                    &ev_opts,
                );
                (sym_handle.join().expect("symmetric-sector thread"), anti)
            });
            let (sym_final, sym_traj) = sym_res?;
            let (anti_final, anti_traj) = anti_res?;
            let amp_a = inner_product(&a_field, &sym_final, &self.grid);
            let amp_b = inner_product(&b_field, &anti_final, &self.grid);
            (amp_a, amp_b, sym_traj, anti_traj)
        };

        let leak_sym = (1.0 - amp_a.norm_sqr()).max(0.0);
        let leak_anti = (1.0 - amp_b.norm_sqr()).max(0.0);
        let leakage = leak_sym.max(leak_anti);

        // relative sector phase, lifted to the branch nearest the quadrature
        let raw = (amp_a * amp_b.conj()).arg();
        let two_pi = 2.0 * std::f64::consts::PI;
        let delta_phi = raw + two_pi * ((quad.delta_phi - raw) / two_pi).round();

        let a_hat = if amp_a.norm() > 1e-12 { amp_a / amp_a.norm() } else { cone() };
        let b_hat = if amp_b.norm() > 1e-12 { amp_b / amp_b.norm() } else { cone() };
        let realized = realized_unitary(a_hat, b_hat);
        let ideal = ideal_gate(target_phase);

        let report = GateReport {
            ramp: *ramp,
            target_phase,
            delta_phi,
            delta_phi_quadrature: quad.delta_phi,
            phase_discrepancy: (delta_phi - quad.delta_phi).abs(),
            ideal_unitary: mat4_to_pairs(&ideal),
            realized_unitary: mat4_to_pairs(&realized),
            fidelity: gate_fidelity(&ideal, &realized),
            leakage,
            leakage_symmetric_sector: leak_sym,
            leakage_antisymmetric_sector: leak_anti,
            min_gap: quad.min_gap,
            onsite_energy: u_onsite,
            adiabaticity_ratio: total * u_onsite / PLANCK,
            total_duration: total,
            diabatic_failure: leakage > 0.5,
        };
        Ok(GateRun { report, sym_trajectory: sym_traj, anti_trajectory: anti_traj })
    }
}

/// Realized computational-basis unitary for unit-modulus sector amplitudes:
/// |00⟩, |11⟩ ride the antisymmetric sector; the middle block mixes the two.
fn realized_unitary(a_hat: Complex64, b_hat: Complex64) -> Mat4 {
    let p = 0.5 * (a_hat + b_hat);
    let m = 0.5 * (b_hat - a_hat);
    let mut u = [[czero(); 4]; 4];
    u[0][0] = b_hat;
    u[1][1] = p;
    u[1][2] = m;
    u[2][1] = m;
    u[2][2] = p;
    u[3][3] = b_hat;
    u
}

fn flat_to_field(v: &[f64], n: usize, dx: f64) -> Array2<Complex64> {
    let mut field = Array2::<Complex64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            field[(i, j)] = Complex64::new(v[i * n + j] / dx, 0.0);
        }
    }
    field
}

fn combine(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
    crate::linalg::normalize(&mut out);
    out
}

/// Gap evaluations along one ramp edge, cached by τ and warm-started in
/// sweep order.
struct GapSweep<'a> {
    ctx: &'a GateContext,
    ramp: &'a RampProfile,
    cache: BTreeMap<u64, (f64, f64)>,
    warm_se: Option<Vec<f64>>,
    warm_sa: Option<Vec<f64>>,
    min_gap_ac: f64,
}

impl<'a> GapSweep<'a> {
    fn new(ctx: &'a GateContext, ramp: &'a RampProfile) -> Self {
        GapSweep { ctx, ramp, cache: BTreeMap::new(), warm_se: None, warm_sa: None, min_gap_ac: f64::INFINITY }
    }

    /// (a–b gap, a–c gap) at edge position τ.
    fn gaps_at_tau(&mut self, tau: f64) -> Result<(f64, f64)> {
        let key = tau.to_bits();
        if let Some(&hit) = self.cache.get(&key) {
            return Ok(hit);
        }
        let v_b = self.ramp.edge_value(tau);
        let h = self.ctx.hamiltonian_at(v_b)?;
        let se = solve_sector(
            &h,
            SymmetrySector { swap: Sign::Plus, parity: Some(Sign::Plus) },
            2,
            self.warm_se.as_deref(),
            &self.ctx.opts.solver,
        )?;
        let sa = solve_sector(
            &h,
            SymmetrySector { swap: Sign::Minus, parity: Some(Sign::Minus) },
            1,
            self.warm_sa.as_deref(),
            &self.ctx.opts.solver,
        )?;
        self.warm_se = Some(combine(&se[0].1, &se[1].1));
        self.warm_sa = Some(sa[0].1.clone());
        let gap_ab = sa[0].0 - se[0].0;
        let gap_ac = se[1].0 - se[0].0;
        self.min_gap_ac = self.min_gap_ac.min(gap_ac);
        self.cache.insert(key, (gap_ab, gap_ac));
        Ok((gap_ab, gap_ac))
    }

    /// Composite Simpson integral of the a–b gap over τ ∈ [0, 1].
    fn edge_simpson(&mut self, intervals: usize) -> Result<f64> {
        debug_assert!(intervals.is_multiple_of(2));
        let h = 1.0 / intervals as f64;
        let mut acc = 0.0;
        for q in 0..=intervals {
            let tau = q as f64 * h;
            let (gap_ab, _) = self.gaps_at_tau(tau)?;
            let w = if q == 0 || q == intervals {
                1.0
            } else if q % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += w * gap_ab;
        }
        Ok(acc * h / 3.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn ideal_gate_at_pi_is_swap() {
        assert!(mat4_max_diff(&ideal_gate(PI), &swap_matrix()) < 1e-15);
    }

    #[test]
    fn sqrt_swap_squares_to_swap() {
        assert!(verify_sqrt_swap());
        let sq = mat4_mul(&ideal_gate(PI), &ideal_gate(PI));
        assert!(mat4_max_diff(&sq, &mat4_identity()) < 1e-15);
        assert!(mat4_max_diff(&ideal_gate(2.0 * PI), &mat4_identity()) < 1e-15);
    }

    #[test]
    fn sqrt_swap_matrix_entries() {
        // middle block ½(1±i)
        let u = ideal_gate(0.5 * PI);
        let half = Complex64::new(0.5, 0.5);
        let halfm = Complex64::new(0.5, -0.5);
        assert!((u[1][1] - half).norm() < 1e-15);
        assert!((u[2][2] - half).norm() < 1e-15);
        assert!((u[1][2] - halfm).norm() < 1e-15);
        assert!((u[2][1] - halfm).norm() < 1e-15);
    }

    #[test]
    fn ideal_gate_is_unitary_and_additive() {
        let noise = crate::linalg::deterministic_unit_noise(200, 99);
        for pair in noise.chunks(2).take(100) {
            let phi = 20.0 * pair[0];
            assert!(unitarity_error(&ideal_gate(phi)) < 1e-12, "phi = {phi}");
            let psi = 20.0 * pair[1];
            let prod = mat4_mul(&ideal_gate(phi), &ideal_gate(psi));
            assert!(
                mat4_max_diff(&prod, &ideal_gate(phi + psi)) < 1e-12,
                "additivity at ({phi}, {psi})"
            );
        }
    }

    #[test]
    fn gate_action_on_basis_states() {
        let swap = ideal_gate(PI);
        let out = apply_gate(&swap, &QubitState::basis(1));
        assert!((out.amplitudes[2].norm() - 1.0).abs() < 1e-14, "SWAP|01> = |10>");
        let fixed = apply_gate(&swap, &QubitState::basis(0));
        assert!((fixed.amplitudes[0] - cone()).norm() < 1e-14, "SWAP|00> = |00>");

        // √SWAP on |01⟩: ½(|01⟩+|10⟩) + i/2(|01⟩−|10⟩)
        let out = apply_gate(&ideal_gate(0.5 * PI), &QubitState::basis(1));
        assert!((out.amplitudes[1] - Complex64::new(0.5, 0.5)).norm() < 1e-14);
        assert!((out.amplitudes[2] - Complex64::new(0.5, -0.5)).norm() < 1e-14);
        assert!((concurrence(&out) - 1.0).abs() < 1e-9, "maximally entangling");
    }

    #[test]
    fn concurrence_reference_values() {
        assert_eq!(concurrence(&QubitState::basis(1)), 0.0);
        let bell = QubitState::new([
            czero(),
            Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            czero(),
        ])
        .unwrap();
        assert!((concurrence(&bell) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fidelity_is_global_phase_invariant() {
        let u = ideal_gate(0.7);
        let noise = crate::linalg::deterministic_unit_noise(10, 5);
        for w in noise {
            let phase = Complex64::from_polar(1.0, 10.0 * w);
            let mut v = u;
            for row in &mut v {
                for e in row {
                    *e *= phase;
                }
            }
            let f = gate_fidelity(&ideal_gate(0.7), &v);
            assert!((f - 1.0).abs() < 1e-12, "fidelity {f}");
        }
    }

    #[test]
    fn ramp_profile_shape_and_validation() {
        let ramp = RampProfile {
            v_high: 500.0,
            v_low: 100.0,
            t_ramp: 2.0,
            t_hold: 1.0,
            shape: RampShape::Smoothstep,
        };
        ramp.validate().unwrap();
        assert_eq!(ramp.total_duration(), 5.0);
        assert_eq!(ramp.barrier_at(-1.0), 500.0);
        assert_eq!(ramp.barrier_at(0.0), 500.0);
        assert_eq!(ramp.barrier_at(2.5), 100.0);
        assert_eq!(ramp.barrier_at(6.0), 500.0);
        // continuity at the joints
        let eps = 1e-9;
        for t in [2.0, 3.0] {
            let dv = (ramp.barrier_at(t + eps) - ramp.barrier_at(t - eps)).abs();
            assert!(dv < 1e-3, "jump {dv} at t = {t}");
        }
        // midpoint of a smoothstep edge
        assert!((ramp.barrier_at(1.0) - (500.0 - 400.0 * 0.5)).abs() < 1e-12);

        assert!(RampProfile { v_high: 1.0, v_low: 2.0, ..ramp }.validate().is_err());
        assert!(RampProfile { t_ramp: -1.0, ..ramp }.validate().is_err());
    }

    fn small_ctx(n: usize, w: f64, a: f64) -> GateContext {
        let grid = build_grid(n, 0.0, 1.0).unwrap();
        GateContext::new(grid, 1.0, w, Interaction::contact(a), GateOptions::default()).unwrap()
    }

    #[test]
    fn levels_separate_at_zero_interaction() {
        // separability: E_a = 2E₁, E_b = E₁+E₂, E_d = E₁+E₂, E_c = min(2E₂, E₁+E₃)
        let ctx = small_ctx(48, 0.2, 0.0);
        let lv = ctx.instantaneous_levels(300.0).unwrap();
        let samples = sample_potential(
            &PotentialSpec::double_box(1.0, 0.2, 300.0),
            ctx.grid(),
        )
        .unwrap();
        let sp = crate::eigensolver::solve_lowest(&assemble_hamiltonian(&samples), 3).unwrap();
        let (e1, e2, e3) = (sp[0].energy, sp[1].energy, sp[2].energy);
        let tol = 1e-8 * e1.abs();
        assert!((lv.e_a - 2.0 * e1).abs() < tol, "E_a = {} vs {}", lv.e_a, 2.0 * e1);
        assert!((lv.e_b - (e1 + e2)).abs() < tol);
        assert!((lv.e_d - (e1 + e2)).abs() < tol, "E_a and E_d both reduce to pair energies");
        let c_expected = (2.0 * e2).min(e1 + e3);
        assert!((lv.e_c - c_expected).abs() < tol);
    }

    #[test]
    fn high_barrier_levels_match_hubbard_structure() {
        // very high, wide barrier: a/b degenerate to 1e−6·U, c and d sit U above
        let ctx = small_ctx(96, 0.25, 0.5);
        let lv = ctx.instantaneous_levels(2000.0).unwrap();
        let u = ctx.onsite_at(2000.0).unwrap();
        assert!(lv.e_b - lv.e_a >= 0.0);
        assert!((lv.e_b - lv.e_a).abs() <= 1e-6 * u, "gap_ab = {}", lv.e_b - lv.e_a);
        assert!(((lv.e_c - lv.e_a) / u - 1.0).abs() < 0.05, "E_c - E_a = {}", lv.e_c - lv.e_a);
        assert!(((lv.e_d - lv.e_a) / u - 1.0).abs() < 0.05);
    }

    #[test]
    fn level_diagram_csv_has_expected_columns() {
        let ctx = small_ctx(32, 0.2, 0.5);
        let ld = ctx.level_diagram(&[400.0, 200.0, 100.0]).unwrap();
        let mut buf = Vec::new();
        ld.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "V_b,E_a,E_b,E_c,E_d");
        assert_eq!(lines.count(), 3);
        // a below b below c along the whole sweep
        for i in 0..3 {
            assert!(ld.e_a[i] < ld.e_b[i]);
            assert!(ld.e_b[i] < ld.e_c[i]);
        }
    }

    #[test]
    fn phase_quadrature_linearity_in_hold_time() {
        let ctx = small_ctx(32, 0.2, 0.5);
        let ramp = RampProfile {
            v_high: 400.0,
            v_low: 120.0,
            t_ramp: 0.8,
            t_hold: 1.0,
            shape: RampShape::Smoothstep,
        };
        let p0 = ctx.accumulate_phase(&ramp.with_hold(0.0)).unwrap();
        let p1 = ctx.accumulate_phase(&ramp.with_hold(1.0)).unwrap();
        let p2 = ctx.accumulate_phase(&ramp.with_hold(2.0)).unwrap();
        assert!(p1.delta_phi > p0.delta_phi);
        let seg1 = p1.delta_phi - p0.delta_phi;
        let seg2 = p2.delta_phi - p1.delta_phi;
        assert!((seg1 - seg2).abs() < 1e-9, "hold segments: {seg1} vs {seg2}");
        // zero-duration ramp accumulates nothing
        let z = ctx
            .accumulate_phase(&RampProfile {
                v_high: 400.0,
                v_low: 120.0,
                t_ramp: 0.0,
                t_hold: 0.0,
                shape: RampShape::Smoothstep,
            })
            .unwrap();
        assert_eq!(z.delta_phi, 0.0);
    }

    #[test]
    fn calibration_hits_target_and_overshoots_beyond() {
        let ctx = small_ctx(32, 0.2, 0.5);
        let template = RampProfile {
            v_high: 400.0,
            v_low: 120.0,
            t_ramp: 0.5,
            t_hold: 0.0,
            shape: RampShape::Smoothstep,
        };
        let cal = ctx.calibrate_ramp(0.5 * PI, &template).unwrap();
        let phi = ctx.accumulate_phase(&cal).unwrap().delta_phi;
        assert!((phi - 0.5 * PI).abs() <= 1e-3, "calibrated phase {phi}");
        // doubling the hold beyond calibration overshoots
        let phi2 = ctx.accumulate_phase(&cal.with_hold(2.0 * cal.t_hold)).unwrap().delta_phi;
        assert!(phi2 > 0.5 * PI + 1e-3);

        // a long, slow edge accumulates more than a tiny target by itself
        let big_edges = RampProfile { t_ramp: 50.0, ..template };
        match ctx.calibrate_ramp(1e-4, &big_edges) {
            Err(Error::BracketFailure(_)) => {}
            other => panic!("expected bracket failure, got {other:?}"),
        }
    }

    #[test]
    fn zero_duration_gate_is_identity() {
        let ctx = small_ctx(32, 0.2, 0.5);
        let ramp = RampProfile {
            v_high: 400.0,
            v_low: 120.0,
            t_ramp: 0.0,
            t_hold: 0.0,
            shape: RampShape::Smoothstep,
        };
        let run = ctx.simulate_gate(&ramp, 0.0).unwrap();
        assert_eq!(run.report.delta_phi, 0.0);
        assert_eq!(run.report.total_duration, 0.0);
        assert!(run.report.fidelity > 1.0 - 1e-12);
        assert!(run.report.leakage < 1e-12);
        let realized: Mat4 = pairs_to_mat4(&run.report.realized_unitary);
        assert!(mat4_max_diff(&realized, &mat4_identity()) < 1e-12);
    }

    #[test]
    fn short_gate_run_is_consistent() {
        // cheap end-to-end sanity run; the acceptance suite does the
        // full calibrated version
        let grid = build_grid(48, 0.0, 1.0).unwrap();
        let opts = GateOptions { dt: 1e-3, ..Default::default() };
        let ctx =
            GateContext::new(grid, 1.0, 0.2, Interaction::contact(0.5), opts).unwrap();
        let ramp = RampProfile {
            v_high: 400.0,
            v_low: 150.0,
            t_ramp: 6.0,
            t_hold: 2.0,
            shape: RampShape::Smoothstep,
        };
        let run = ctx.simulate_gate(&ramp, PI).unwrap();
        let r = &run.report;
        assert!(r.delta_phi_quadrature > 0.0);
        assert!(
            r.phase_discrepancy < 0.05,
            "quadrature {} vs dynamics {}",
            r.delta_phi_quadrature,
            r.delta_phi
        );
        let realized = pairs_to_mat4(&r.realized_unitary);
        assert!(unitarity_error(&realized) < 1e-6);
        assert!(r.leakage < 0.02, "leakage {}", r.leakage);
        assert!(!r.diabatic_failure);
        // the leaked population sits in state c, not the antisymmetric sector
        let final_c = run.sym_trajectory.projections.last().unwrap()[1].norm_sqr();
        assert!((final_c - r.leakage_symmetric_sector).abs() < 1e-4);
        assert!(r.leakage_antisymmetric_sector < 1e-4);
        assert!(r.min_gap > 0.0);
        assert!(r.adiabaticity_ratio > 0.0);
        // norm conservation along both sector trajectories
        for nrm in run.sym_trajectory.norms.iter().chain(&run.anti_trajectory.norms) {
            assert!((nrm - 1.0).abs() < 1e-9);
        }
    }

    fn pairs_to_mat4(p: &[[[f64; 2]; 4]; 4]) -> Mat4 {
        let mut m = [[czero(); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = Complex64::new(p[i][j][0], p[i][j][1]);
            }
        }
        m
    }

    #[test]
    fn levels_at_zero_barrier_reduce_to_box_structure() {
        // V_b = 0: a → |φφ⟩, b → (|φφ̃⟩−|φ̃φ⟩)/√2, d → (|φφ̃⟩+|φ̃φ⟩)/√2,
        // c → |φ̃φ̃⟩, with first-order contact shifts on the symmetric ones
        let a = 0.5;
        let ctx = small_ctx(48, 0.2, a);
        let lv = ctx.instantaneous_levels(0.0).unwrap();
        let grid = ctx.grid().clone();
        let samples =
            sample_potential(&PotentialSpec::infinite_box(1.0), &grid).unwrap();
        let sp = crate::eigensolver::solve_lowest(&assemble_hamiltonian(&samples), 2).unwrap();
        let inter = Interaction::contact(a);
        let shift_gg =
            crate::twobody::ground_shift(&sp[0].amplitudes, &grid, &inter).unwrap();
        let shift_ee =
            crate::twobody::ground_shift(&sp[1].amplitudes, &grid, &inter).unwrap();
        let pt = crate::twobody::degenerate_pt(&sp[0], &sp[1], &grid, &inter).unwrap();

        // ordering a < b < d < c and first-order placement of each level
        assert!(lv.e_a < lv.e_b && lv.e_b < lv.e_d && lv.e_d < lv.e_c);
        assert!((lv.e_b - pt.e_low).abs() < 1e-8, "antisymmetric level is exact");
        assert!((lv.e_a - (2.0 * sp[0].energy + shift_gg)).abs() < 0.05);
        assert!((lv.e_d - pt.e_high).abs() < 0.05);
        assert!((lv.e_c - (2.0 * sp[1].energy + shift_ee)).abs() < 0.05);
    }

    #[test]
    fn leakage_decreases_with_slower_ramps() {
        // geometric duration sweep in the adiabatic approach regime:
        // quartering the speed must not increase leakage (10% slack)
        let grid = build_grid(40, 0.0, 1.0).unwrap();
        let opts = GateOptions { dt: 1e-3, ..Default::default() };
        let ctx = GateContext::new(grid, 1.0, 0.2, Interaction::contact(0.5), opts).unwrap();
        let leak_at = |t_ramp: f64, t_hold: f64| {
            let ramp = RampProfile {
                v_high: 400.0,
                v_low: 150.0,
                t_ramp,
                t_hold,
                shape: RampShape::Smoothstep,
            };
            ctx.simulate_gate(&ramp, PI).unwrap().report.leakage
        };
        // T = 5 vs T = 20 (edges 1.5 vs 9, hold 2): factor 4 in duration
        let fast = leak_at(1.5, 2.0);
        let slow = leak_at(9.0, 2.0);
        assert!(
            fast >= 0.9 * slow,
            "leakage did not decrease with a 4x slower ramp: {fast:.3e} vs {slow:.3e}"
        );
        assert!(slow < fast, "expected strictly smaller leakage, got {slow:.3e} vs {fast:.3e}");
    }

    #[test]
    fn calibrated_sqrt_swap_squares_to_swap() {
        // calibrate to π/2, simulate, and apply the realized gate twice
        let grid = build_grid(48, 0.0, 1.0).unwrap();
        let opts = GateOptions { dt: 1e-3, ..Default::default() };
        let ctx = GateContext::new(grid, 1.0, 0.2, Interaction::contact(0.5), opts).unwrap();
        let template = RampProfile {
            v_high: 400.0,
            v_low: 150.0,
            t_ramp: 6.0,
            t_hold: 0.0,
            shape: RampShape::Smoothstep,
        };
        let cal = ctx.calibrate_ramp(PI / 2.0, &template).unwrap();
        let run = ctx.simulate_gate(&cal, PI / 2.0).unwrap();
        assert!(run.report.fidelity > 0.999, "√SWAP fidelity {}", run.report.fidelity);
        let realized = pairs_to_mat4(&run.report.realized_unitary);
        let twice = mat4_mul(&realized, &realized);
        let out = apply_gate(&twice, &QubitState::basis(1));
        let p10 = out.amplitudes[2].norm_sqr();
        assert!(p10 > 0.99, "realized √SWAP applied twice sends |01⟩ to |10⟩: P = {p10}");
        // and one application is maximally entangling
        let once = apply_gate(&realized, &QubitState::basis(1));
        assert!(concurrence(&once) > 0.99, "concurrence {}", concurrence(&once));
    }

    #[test]
    fn gate_report_serializes_with_matrix_pairs() {
        let ctx = small_ctx(32, 0.2, 0.5);
        let ramp = RampProfile {
            v_high: 400.0,
            v_low: 120.0,
            t_ramp: 0.0,
            t_hold: 0.0,
            shape: RampShape::Cosine,
        };
        let run = ctx.simulate_gate(&ramp, PI).unwrap();
        let json = serde_json::to_value(&run.report).unwrap();
        assert_eq!(json["ramp"]["shape"], "cosine");
        assert!(json["ideal_unitary"][1][2].is_array());
        assert_eq!(json["ideal_unitary"][0][0][0], 1.0);
        assert!(json["fidelity"].is_f64());
    }
}

//! Command implementations. Each command computes everything first and
//! returns named artifacts; nothing is written until the whole run
//! succeeded.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde_json::json;

use doublewell::dynamics::{evolve_timedep, left_population, EvolveOptions};
use doublewell::eigensolver::{
    assemble_hamiltonian, localized_pair, lowest_orbital_pair, solve_lowest, tunneling_rate,
    write_eigenstate_csv, Parity,
};
use doublewell::gatesim::{GateContext, GateOptions, GateRun};
use doublewell::grid::Grid;
use doublewell::potential::{sample_potential, PotentialSamples, PotentialSpec};
use doublewell::twobody::{
    build_two_body_hamiltonian, degenerate_pt, direct_integral, exchange_integral, ground_shift,
    onsite_energy, solve_two_body_lowest, Interaction, SolveOpts, SwapSymmetry, TwoBodyState,
};

use crate::config::{RunConfig, SweepParam};
use crate::CliError;

/// A named output file held in memory until the run completes.
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    fn text(name: &str, text: String) -> Artifact {
        Artifact { name: name.to_string(), bytes: text.into_bytes() }
    }

    fn json(name: &str, value: &serde_json::Value) -> Result<Artifact, CliError> {
        let mut bytes = serde_json::to_vec_pretty(value)
            .map_err(|e| CliError::Config(format!("serialization: {e}")))?;
        bytes.push(b'\n');
        Ok(Artifact { name: name.to_string(), bytes })
    }
}

fn sampled(cfg: &RunConfig) -> Result<(Grid, PotentialSamples), CliError> {
    let grid = cfg.build_grid()?;
    let samples = sample_potential(&cfg.potential, &grid)?;
    Ok((grid, samples))
}

fn solve_opts(cfg: &RunConfig) -> SolveOpts {
    let s = cfg.solver();
    SolveOpts { tol: s.tol, max_iter: s.max_iter, seed: cfg.seed() }
}

/// `spectrum`: lowest-k single-particle eigenstates.
pub fn spectrum(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let (grid, samples) = sampled(cfg)?;
    let k = cfg.solver().k;
    let states = solve_lowest(&assemble_hamiltonian(&samples), k)?;

    let mut table = String::from("index,energy,parity\n");
    for (i, s) in states.iter().enumerate() {
        writeln!(table, "{},{},{}", i + 1, s.energy, s.parity).expect("string write");
    }
    let mut artifacts = vec![Artifact::text("spectrum.csv", table)];
    for (i, s) in states.iter().enumerate() {
        let mut buf = Vec::new();
        write_eigenstate_csv(&mut buf, s, &grid)?;
        artifacts.push(Artifact { name: format!("state_{}.csv", i + 1), bytes: buf });
    }
    Ok(artifacts)
}

/// `tunnel`: prepare |L⟩, evolve it, and compare the oscillation period
/// against the static splitting.
pub fn tunnel(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let (grid, samples) = sampled(cfg)?;
    let op = assemble_hamiltonian(&samples);
    let pair = lowest_orbital_pair(&op)?;
    let loc = localized_pair(&pair, &grid);
    let omega = tunneling_rate(&pair);
    if omega <= 0.0 {
        return Err(CliError::Config(
            "tunneling rate is zero; lower the barrier or refine the grid".into(),
        ));
    }
    let period = 2.0 * std::f64::consts::PI / omega;

    let ev = cfg.evolve.clone().unwrap_or_default();
    let t_final = ev.t_final.unwrap_or(1.25 * period);
    let dt_req = ev.dt.unwrap_or(period / 10_000.0);
    let steps = (t_final / dt_req).ceil().max(1.0);
    let opts = EvolveOptions {
        dt: t_final / steps,
        store_stride: ev.store_stride.max(1),
        norm_tol: 1e-6,
    };
    let psi0: Vec<num_complex::Complex64> =
        loc.left.iter().map(|&x| num_complex::Complex64::new(x, 0.0)).collect();
    let traj = evolve_timedep(&psi0, &samples, &grid, t_final, &opts)?;

    let mut table = String::from("t,norm,left_population\n");
    let mut populations = Vec::with_capacity(traj.times.len());
    for (i, t) in traj.times.iter().enumerate() {
        let p = left_population(&traj.states[i], &grid);
        writeln!(table, "{},{},{}", t, traj.norms[i], p).expect("string write");
        populations.push(p);
    }

    let measured = period_from_crossings(&traj.times, &populations);
    let summary = json!({
        "omega_static": omega,
        "splitting": pair.splitting(),
        "period_static": period,
        "period_measured": measured,
        "period_relative_mismatch": measured.map(|m| (m - period).abs() / period),
        "left_population_initial": populations.first(),
        "energies": {"even": pair.even.energy, "odd": pair.odd.energy},
    });
    Ok(vec![
        Artifact::text("trajectory.csv", table),
        Artifact::json("tunnel.json", &summary)?,
    ])
}

/// Oscillation period from successive downward/upward crossings of 0.5,
/// via linear interpolation; crossings are half a period apart.
pub fn period_from_crossings(times: &[f64], populations: &[f64]) -> Option<f64> {
    let mut crossings = Vec::new();
    for i in 1..times.len() {
        let a = populations[i - 1] - 0.5;
        let b = populations[i] - 0.5;
        if (a > 0.0 && b <= 0.0) || (a < 0.0 && b >= 0.0) {
            let frac = a / (a - b);
            crossings.push(times[i - 1] + frac * (times[i] - times[i - 1]));
        }
    }
    if crossings.len() < 2 {
        return None;
    }
    let gaps: Vec<f64> = crossings.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    Some(2.0 * mean)
}

fn level_label(
    state: &TwoBodyState,
    rank_se: &mut usize,
    rank_ao: &mut usize,
    rank_so: &mut usize,
) -> Option<&'static str> {
    let parity = state.classify_parity();
    match (state.exchange_symmetry, parity) {
        (SwapSymmetry::Symmetric, Parity::Even) => {
            *rank_se += 1;
            match *rank_se {
                1 => Some("a"),
                2 => Some("c"),
                _ => None,
            }
        }
        (SwapSymmetry::Antisymmetric, Parity::Odd) => {
            *rank_ao += 1;
            (*rank_ao == 1).then_some("b")
        }
        (SwapSymmetry::Symmetric, Parity::Odd) => {
            *rank_so += 1;
            (*rank_so == 1).then_some("d")
        }
        _ => None,
    }
}

/// `twobody`: interaction integrals, degenerate perturbation theory, and
/// the exact low spectrum with a/b/c/d labels where identifiable.
pub fn twobody(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let (grid, samples) = sampled(cfg)?;
    let contact = cfg.interaction_required()?;
    let inter: Interaction = contact.into();
    let opts = solve_opts(cfg);
    let k = cfg.solver().k.clamp(1, 12);

    let sp = solve_lowest(&assemble_hamiltonian(&samples), 2)?;
    let j = direct_integral(&sp[0].amplitudes, &sp[1].amplitudes, &grid, &inter)?;
    let kx = exchange_integral(&sp[0].amplitudes, &sp[1].amplitudes, &grid, &inter)?;
    let shift = ground_shift(&sp[0].amplitudes, &grid, &inter)?;
    let pt = degenerate_pt(&sp[0], &sp[1], &grid, &inter)?;

    // on-site energy needs localized well orbitals
    let u_onsite = match cfg.potential {
        PotentialSpec::DoubleBox { .. } => {
            let pair = lowest_orbital_pair(&assemble_hamiltonian(&samples))?;
            let loc = localized_pair(&pair, &grid);
            Some(onsite_energy(&loc.right, &grid, &inter)?)
        }
        _ => None,
    };

    let h = build_two_body_hamiltonian(&samples, &inter)?;
    let levels = solve_two_body_lowest(&h, k, &opts)?;
    let (mut rank_se, mut rank_ao, mut rank_so) = (0usize, 0usize, 0usize);
    let level_entries: Vec<serde_json::Value> = levels
        .iter()
        .map(|(e, state)| {
            let label = level_label(state, &mut rank_se, &mut rank_ao, &mut rank_so);
            json!({
                "energy": e,
                "symmetry": state.exchange_symmetry.to_string(),
                "label": label,
            })
        })
        .collect();

    let out = json!({
        "orbitals": {"e_g": sp[0].energy, "e_e": sp[1].energy},
        "integrals": {
            "j_direct": j,
            "k_exchange": kx,
            "delta_e_gg": shift,
            "u_onsite": u_onsite,
        },
        "perturbation": {
            "e_low": pt.e_low,
            "e_high": pt.e_high,
            "j": pt.j,
            "k": pt.k,
            "eigvec_low": pt.eigvec_low,
            "eigvec_high": pt.eigvec_high,
        },
        "levels": level_entries,
    });
    Ok(vec![Artifact::json("twobody.json", &out)?])
}

fn gate_context(cfg: &RunConfig, dt: f64) -> Result<GateContext, CliError> {
    let grid = cfg.build_grid()?;
    let (length, width) = cfg.double_box_geometry()?;
    let contact = cfg.interaction_required()?;
    let gate = cfg.gate.clone().unwrap_or_default();
    let opts = GateOptions {
        dt,
        n_quad: gate.n_quad,
        quad_tol: 1e-4,
        solver: solve_opts(cfg),
        store_stride: gate.store_stride,
        max_hold: gate.max_hold,
    };
    Ok(GateContext::new(grid, length, width, contact.into(), opts)?)
}

/// `leveldiagram`: energies of states a–d across a barrier sweep.
pub fn leveldiagram(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let sweep = cfg.sweep_required()?;
    if sweep.param != SweepParam::BarrierHeight {
        return Err(CliError::Config(
            "leveldiagram sweeps barrier_height; set sweep.param accordingly".into(),
        ));
    }
    cfg.interaction_required()?;
    let ctx = gate_context(cfg, 1e-3)?;
    let diagram = ctx.level_diagram(&sweep.values())?;
    let mut buf = Vec::new();
    diagram.write_csv(&mut buf)?;
    Ok(vec![Artifact { name: "leveldiagram.csv".into(), bytes: buf }])
}

/// `gate`: optionally calibrate the hold time, simulate the ramp, and
/// report the realized unitary with its diagnostics.
pub fn gate(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let gate_cfg = cfg.gate.clone().unwrap_or_default();
    let template = cfg.ramp_required()?;
    let ctx = gate_context(cfg, gate_cfg.dt)?;
    let ramp = if gate_cfg.calibrate {
        ctx.calibrate_ramp(gate_cfg.target_phase, &template)?
    } else {
        template
    };
    let run = ctx.simulate_gate(&ramp, gate_cfg.target_phase)?;
    let report = serde_json::to_value(&run.report)
        .map_err(|e| CliError::Config(format!("serialization: {e}")))?;
    let mut artifacts = vec![Artifact::json("gate_report.json", &report)?];
    if gate_cfg.write_trajectory {
        artifacts.push(Artifact::text("gate_trajectory.csv", trajectory_csv(&run)));
    }
    Ok(artifacts)
}

fn trajectory_csv(run: &GateRun) -> String {
    use doublewell::spinstat::{
        decode_to_computational, CompositeState, CompositeTerm, SpatialLabel, SpinWavefunction,
    };
    let mut table = String::from(
        "t,norm_sym,re_a,im_a,re_c,im_c,norm_anti,re_b,im_b,q01_re,q01_im,q10_re,q10_im,subspace_norm\n",
    );
    let sym = &run.sym_trajectory;
    let anti = &run.anti_trajectory;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..sym.times.len().min(anti.times.len()) {
        let pa = sym.projections[i][0];
        let pc = sym.projections[i][1];
        let pb = anti.projections[i][0];
        // the evolved encode(|01⟩) state, read back through the encoding
        let composite = CompositeState::new(vec![
            CompositeTerm {
                coeff: pb * s,
                spatial: SpatialLabel::PsiMinus,
                spin: SpinWavefunction::chi_plus(),
            },
            CompositeTerm {
                coeff: pa * s,
                spatial: SpatialLabel::PsiPlus,
                spin: SpinWavefunction::chi_minus(),
            },
        ]);
        let decoded = decode_to_computational(&composite);
        writeln!(
            table,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            sym.times[i],
            sym.norms[i],
            pa.re,
            pa.im,
            pc.re,
            pc.im,
            anti.norms[i],
            pb.re,
            pb.im,
            decoded.amplitudes[1].re,
            decoded.amplitudes[1].im,
            decoded.amplitudes[2].re,
            decoded.amplitudes[2].im,
            composite.norm()
        )
        .expect("string write");
    }
    table
}

/// `sweep`: one CSV row per axis point, computed concurrently up to the
/// worker count, emitted in axis order.
pub fn sweep(cfg: &RunConfig, workers: usize) -> Result<Vec<Artifact>, CliError> {
    let sweep = cfg.sweep_required()?;
    let values = sweep.values();
    let (header, row_fn): (String, RowFn) = match sweep.param {
        SweepParam::BarrierHeight => {
            cfg.interaction_required()?;
            let header = format!("{},E_a,E_b,E_c,E_d\n", sweep.param.column_name());
            let f: RowFn = Box::new(move |cfg: &RunConfig, v: f64| {
                let ctx = gate_context(cfg, 1e-3)?;
                let lv = ctx.instantaneous_levels(v)?;
                Ok(format!("{},{},{},{},{}", v, lv.e_a, lv.e_b, lv.e_c, lv.e_d))
            });
            (header, f)
        }
        SweepParam::THold => {
            cfg.interaction_required()?;
            let template = cfg.ramp_required()?;
            let header = format!("{},delta_phi\n", sweep.param.column_name());
            let f: RowFn = Box::new(move |cfg: &RunConfig, v: f64| {
                if v < 0.0 {
                    return Err(CliError::Config(format!("t_hold must be >= 0, got {v}")));
                }
                let ctx = gate_context(cfg, 1e-3)?;
                let quad = ctx.accumulate_phase(&template.with_hold(v))?;
                Ok(format!("{},{}", v, quad.delta_phi))
            });
            (header, f)
        }
        SweepParam::InteractionStrength => {
            cfg.double_box_geometry()?;
            let header =
                format!("{},j_direct,k_exchange,delta_e_gg,u_onsite\n", sweep.param.column_name());
            let f: RowFn = Box::new(move |cfg: &RunConfig, v: f64| {
                let (grid, samples) = sampled(cfg)?;
                let inter = Interaction::contact(v);
                let sp = solve_lowest(&assemble_hamiltonian(&samples), 2)?;
                let j = direct_integral(&sp[0].amplitudes, &sp[1].amplitudes, &grid, &inter)?;
                let kx = exchange_integral(&sp[0].amplitudes, &sp[1].amplitudes, &grid, &inter)?;
                let shift = ground_shift(&sp[0].amplitudes, &grid, &inter)?;
                let pair = lowest_orbital_pair(&assemble_hamiltonian(&samples))?;
                let loc = localized_pair(&pair, &grid);
                let u = onsite_energy(&loc.right, &grid, &inter)?;
                Ok(format!("{v},{j},{kx},{shift},{u}"))
            });
            (header, f)
        }
    };

    let rows = run_indexed(values.len(), workers, |i| row_fn(cfg, values[i]))?;
    let mut table = header;
    for row in rows {
        table.push_str(&row);
        table.push('\n');
    }
    Ok(vec![Artifact::text("sweep.csv", table)])
}

type RowFn = Box<dyn Fn(&RunConfig, f64) -> Result<String, CliError> + Sync>;

/// Evaluate `f` for indices 0..count on up to `workers` threads; results
/// come back in index order regardless of completion order.
fn run_indexed<T: Send>(
    count: usize,
    workers: usize,
    f: impl Fn(usize) -> Result<T, CliError> + Sync,
) -> Result<Vec<T>, CliError> {
    let workers = workers.max(1).min(count.max(1));
    let slots: Vec<Mutex<Option<Result<T, CliError>>>> =
        (0..count).map(|_| Mutex::new(None)).collect();
    let cursor = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = cursor.fetch_add(1, Ordering::Relaxed);
                if i >= count {
                    break;
                }
                let result = f(i);
                *slots[i].lock().expect("slot lock") = Some(result);
            });
        }
    });
    let mut out = Vec::with_capacity(count);
    for slot in slots {
        out.push(slot.into_inner().expect("slot lock")
            .expect("every index was visited")?);
    }
    Ok(out)
}

use std::path::Path;

use num_complex::Complex64;

use super::config::{EnergyValue, PotentialSpec, ScenarioSpec, SolverKind};
use super::observables::{level_populations, PopulationSeries};
use super::output::{fmt_f, RunDir, Summary};
use crate::bohmian::{
    ks_critical_1pct, ks_statistic, quantile_map, ramo_current, sample_quantum_equilibrium,
    sample_quantum_equilibrium_2d, slice_bcwf, slice_two_channel, velocity_1d, velocity_2d, GridCdf, Guide,
    TrajectoryEnsemble, TwoChannelGuide, VelocityField, VelocityField2D, VelocitySource,
};
use crate::evolution::{
    electron_energy, project_channels, Absorber, CouplingParams, Joint2DStepper, JointState2D, Propagator1D,
    TwoChannelState, TwoChannelStepper,
};
use crate::grid_potential::{
    build_gaussian_packet, build_photon_states, ComplexField1D, Direction, PhotonStates,
    PhysicalConstants, PotentialProfile, QuadratureGrid, SpatialGrid,
};
use crate::scattering::{
    apply_gradual, apply_model_a, apply_model_b, ScatteringEvent, TransitionModel, TransitionReport,
};
use crate::spectral::{
    project_energy, resonance_search, transmission_spectrum, EnergyBasis, ProjectionRegion, SpectralCoefficients,
};
use crate::{Error, Result};

const RESONANCE_TOL: f64 = 1e-6;

/// What happened at one scattering event.
#[derive(Debug, Clone)]
pub struct EventRecord {
    pub index: usize,
    pub t_s: f64,
    pub model: TransitionModel,
    pub e_gamma: f64,
    /// Wavenumber kick actually applied (model B), 1/nm.
    pub k_gamma: Option<f64>,
    pub report: TransitionReport,
    pub pre: ComplexField1D,
    pub post: ComplexField1D,
    pub pre_coefficients: Option<SpectralCoefficients>,
    pub post_coefficients: Option<SpectralCoefficients>,
    /// Density-weighted phase-gradient velocity before and after, nm/fs.
    pub mean_velocity_pre: f64,
    pub mean_velocity_post: f64,
    /// KS distance of the mapped ensemble against the post-event density.
    pub ks_after_map: f64,
}

/// In-memory result of a scenario run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub name: String,
    pub constants: PhysicalConstants,
    pub resonances: Vec<f64>,
    pub e_split: Option<f64>,
    pub central_energy: f64,
    pub populations: Option<PopulationSeries>,
    /// Two-channel companion populations of a joint run.
    pub reference_populations: Option<PopulationSeries>,
    /// Joint runs: worst population weight outside span{ψ₀, ψ₁}.
    pub max_outside_span: Option<f64>,
    /// Joint runs: worst ∫|P_e,2D − P_e,2ch|dx at snapshot times.
    pub presence_deviation: Option<f64>,
    /// Joint runs: worst max|P_e,2D − P_e,2ch| / max P_e,2ch at snapshot times.
    pub presence_peak_deviation: Option<f64>,
    /// Joint runs: worst difference of the left-lead / well / right-lead weights.
    pub presence_region_deviation: Option<f64>,
    pub w: usize,
    pub ks_initial: f64,
    /// (t, D) at every snapshot time, t = 0 included.
    pub ks: Vec<(f64, f64)>,
    pub events: Vec<EventRecord>,
    pub norm_initial: f64,
    pub norm_final: f64,
    pub energy_initial: f64,
    pub energy_final: f64,
    pub max_b_norm: f64,
    pub steps: usize,
    pub final_state: TwoChannelState,
}

impl RunOutcome {
    pub fn ks_max(&self) -> f64 {
        self.ks.iter().map(|p| p.1).fold(0.0, f64::max)
    }

    pub fn ks_bound(&self) -> f64 {
        2.0 * ks_critical_1pct(self.w)
    }
}

/// Runs `spec`, writing artifacts into `out_dir` (or the spec's own
/// `output.dir`; nothing is written when both are absent).
pub fn run_scenario(spec: &ScenarioSpec, out_dir: Option<&Path>) -> Result<RunOutcome> {
    spec.validate().map_err(|e| e.in_stage("validate"))?;
    let out = RunDir::new(out_dir.or(spec.output_dir.as_deref())).map_err(|e| e.in_stage("output"))?;
    match run_inner(spec, &out) {
        Ok(o) => Ok(o),
        Err(e) => {
            let mut s = Summary::default();
            s.line("name", &spec.name);
            s.line("status", "failed");
            s.line("error", &e);
            s.line("partial_outputs", out.is_enabled());
            let _ = out.write_text("summary.txt", s.text());
            Err(e)
        }
    }
}

enum Dynamics {
    Single {
        psi: ComplexField1D,
        prop: Propagator1D,
    },
    TwoChannel {
        state: TwoChannelState,
        stepper: TwoChannelStepper,
    },
    Joint {
        state: JointState2D,
        stepper: Joint2DStepper,
        two: TwoChannelState,
        two_stepper: TwoChannelStepper,
    },
}

enum GuideCache {
    One(VelocityField),
    Two(TwoChannelState),
    Joint(VelocityField2D),
}

struct Runner<'a> {
    spec: &'a ScenarioSpec,
    k: PhysicalConstants,
    v: PotentialProfile,
    basis: Option<EnergyBasis>,
    photons: Option<PhotonStates>,
    res_pair: Option<(f64, f64)>,
    e_split: Option<f64>,
    half_width: Option<f64>,
    ramo_length: Option<f64>,
    dynamics: Dynamics,
    ens: TrajectoryEnsemble,
    guide: GuideCache,
    out: &'a RunDir,
    scratch: Vec<Complex64>,
    populations: Option<PopulationSeries>,
    reference: Option<PopulationSeries>,
    ks: Vec<(f64, f64)>,
    current: Vec<[f64; 2]>,
    overlay: Vec<Vec<f64>>,
    snap_index: usize,
    max_b_norm: f64,
    max_outside: f64,
    presence_dev: f64,
    presence_peak_dev: f64,
    presence_region_dev: f64,
}

fn resolve(e: EnergyValue, res: Option<(f64, f64)>, key: &str) -> Result<f64> {
    e.resolve(res).map_err(|err| Error::InvalidKey {
        key: key.to_string(),
        message: err.to_string(),
    })
}

fn run_inner(spec: &ScenarioSpec, out: &RunDir) -> Result<RunOutcome> {
    let k = spec.constants().map_err(|e| e.in_stage("setup"))?;
    let v = spec.potential_profile().map_err(|e| e.in_stage("potential"))?;
    let grid = v.grid;
    out.write_text("scenario.txt", &spec.to_text())?;

    let resonances = match spec.potential {
        PotentialSpec::DoubleBarrier { barrier_height, .. } => {
            resonance_search(&v, &k, (0.0, barrier_height), RESONANCE_TOL).map_err(|e| e.in_stage("resonance_search"))?
        }
        PotentialSpec::Flat { .. } => Vec::new(),
    };
    let res_pair = (resonances.len() >= 2).then(|| (resonances[0], resonances[1]));
    let e_split = res_pair.map(|(a, b)| 0.5 * (a + b));
    let half_width = v.active_half_width();

    let e0 = resolve(spec.packet.energy, res_pair, "packet.E_central_eV").map_err(|e| e.in_stage("packet"))?;
    let direction = if spec.packet.left_to_right {
        Direction::LeftToRight
    } else {
        Direction::RightToLeft
    };
    let device = half_width.is_some().then_some(&v);
    let psi0 = build_gaussian_packet(grid, &k, spec.packet.x0, spec.packet.sigma, e0, direction, device)
        .map_err(|e| e.in_stage("packet"))?;

    let spectrum_energies = {
        let r = &spec.run;
        let n = ((r.basis_e_max - r.basis_e_min) / r.basis_de + 1e-9).floor() as usize + 1;
        (0..n).map(|i| r.basis_e_min + i as f64 * r.basis_de).collect::<Vec<_>>()
    };
    let spectrum = transmission_spectrum(&v, &k, &spectrum_energies).map_err(|e| e.in_stage("spectrum"))?;
    out.write_csv(
        "spectrum.csv",
        &["E_eV", "T", "R"],
        spectrum.iter().map(|p| [p.energy, p.transmission, p.reflection]),
    )?;

    let want_basis = !spec.events.is_empty() || e_split.is_some();
    let basis = if want_basis {
        Some(
            EnergyBasis::build(&v, &k, spec.run.basis_e_min, spec.run.basis_e_max, spec.run.basis_de)
                .map_err(|e| e.in_stage("basis"))?,
        )
    } else {
        None
    };

    let absorber = spec.run.absorber.then(Absorber::default);
    let dt = spec.run.dt;
    let setup = |e: Error| e.in_stage("setup");
    let (photons, coupling) = match &spec.photon {
        None => (None, None),
        Some(p) => {
            let hw = resolve(p.photon_energy, res_pair, "photon.hbar_omega_eV").map_err(setup)?;
            let env = match p.envelope_half_width {
                None => half_width,
                Some(e) => e,
            };
            let coupling = CouplingParams::from_si_alpha(p.alpha_ev_per_m, hw, &k, env).map_err(setup)?;
            let qgrid = QuadratureGrid::for_oscillator(k.hbar, coupling.omega, p.q_sigmas, p.n_q).map_err(setup)?;
            let photons = build_photon_states(qgrid, k.hbar, coupling.omega).map_err(setup)?;
            (Some(photons), Some(coupling))
        }
    };

    let dynamics = match spec.run.solver {
        SolverKind::Single => Dynamics::Single {
            prop: Propagator1D::new(&v, &k, dt, absorber.as_ref()).map_err(setup)?,
            psi: psi0.clone(),
        },
        SolverKind::TwoChannel => Dynamics::TwoChannel {
            stepper: TwoChannelStepper::new(&v, &k, coupling.as_ref().unwrap(), dt, absorber.as_ref()).map_err(setup)?,
            state: TwoChannelState::from_electron(psi0.clone()),
        },
        SolverKind::Joint2D => {
            let ph = photons.as_ref().unwrap();
            let c = coupling.as_ref().unwrap();
            Dynamics::Joint {
                state: JointState2D::product(&psi0, &ph.psi0, ph.qgrid).map_err(setup)?,
                stepper: Joint2DStepper::new(&v, &k, c, ph.qgrid, dt, absorber.as_ref()).map_err(setup)?,
                two: TwoChannelState::from_electron(psi0.clone()),
                two_stepper: TwoChannelStepper::new(&v, &k, c, dt, absorber.as_ref()).map_err(setup)?,
            }
        }
    };

    let w = spec.run.w;
    let seed = spec.run.seed;
    let sampling = |e: Error| e.in_stage("sampling");
    let ens = match &dynamics {
        Dynamics::Single { psi, .. } => {
            let x = sample_quantum_equilibrium(&psi.density(), &grid, w, seed).map_err(sampling)?;
            TrajectoryEnsemble::new_1d(x, &grid, seed).map_err(sampling)?
        }
        Dynamics::TwoChannel { state, .. } => {
            let ph = photons.as_ref().unwrap();
            let joint = JointState2D::from_channels(state, ph).map_err(sampling)?;
            let d: Vec<f64> = joint.values.iter().map(|c| c.norm_sqr()).collect();
            let pts = sample_quantum_equilibrium_2d(&d, &grid, &ph.qgrid, w, seed).map_err(sampling)?;
            TrajectoryEnsemble::new_2d(pts, &grid, &ph.qgrid, seed).map_err(sampling)?
        }
        Dynamics::Joint { state, .. } => {
            let d: Vec<f64> = state.values.iter().map(|c| c.norm_sqr()).collect();
            let pts = sample_quantum_equilibrium_2d(&d, &grid, &state.qgrid, w, seed).map_err(sampling)?;
            TrajectoryEnsemble::new_2d(pts, &grid, &state.qgrid, seed).map_err(sampling)?
        }
    };

    let ramo_length = spec.run.ramo_length.or(half_width.map(|h| 2.0 * h));
    let mut runner = Runner {
        spec,
        k,
        v,
        basis,
        photons,
        res_pair,
        e_split,
        half_width,
        ramo_length,
        guide: GuideCache::One(velocity_1d(&psi0, &k, VelocitySource::CurrentDensity)),
        dynamics,
        ens,
        out,
        scratch: vec![Complex64::new(0.0, 0.0); grid.len()],
        populations: None,
        reference: None,
        ks: Vec::new(),
        current: Vec::new(),
        overlay: Vec::new(),
        snap_index: 0,
        max_b_norm: 0.0,
        max_outside: 0.0,
        presence_dev: 0.0,
        presence_peak_dev: 0.0,
        presence_region_dev: 0.0,
    };
    runner.guide = runner.compute_guide();
    let ks_initial = runner.ks_now()?;

    let norm_initial = runner.norm();
    let energy_initial = runner.energy();
    let (steps, events) = runner.propagate(e0, direction.sign())?;
    let norm_final = runner.norm();
    let energy_final = runner.energy();
    runner.write_series()?;

    let joint = matches!(runner.dynamics, Dynamics::Joint { .. });
    let presence_deviation = joint.then_some(runner.presence_dev);
    let presence_peak_deviation = joint.then_some(runner.presence_peak_dev);
    let presence_region_deviation = joint.then_some(runner.presence_region_dev);
    let max_outside_span = joint.then_some(runner.max_outside);
    let (final_state, _) = runner.channels()?;
    let outcome = RunOutcome {
        name: spec.name.clone(),
        constants: k,
        resonances,
        e_split,
        central_energy: e0,
        populations: runner.populations.take(),
        reference_populations: runner.reference.take(),
        max_outside_span,
        presence_deviation,
        presence_peak_deviation,
        presence_region_deviation,
        w,
        ks_initial,
        ks: runner.ks.clone(),
        events,
        norm_initial,
        norm_final,
        energy_initial,
        energy_final,
        max_b_norm: runner.max_b_norm,
        steps,
        final_state,
    };
    write_summary(spec, &outcome, out)?;
    Ok(outcome)
}

impl Runner<'_> {
    fn compute_guide(&self) -> GuideCache {
        match &self.dynamics {
            Dynamics::Single { psi, .. } => GuideCache::One(velocity_1d(psi, &self.k, VelocitySource::CurrentDensity)),
            Dynamics::TwoChannel { state, .. } => GuideCache::Two(state.clone()),
            Dynamics::Joint { state, .. } => GuideCache::Joint(velocity_2d(state, &self.k, VelocitySource::CurrentDensity)),
        }
    }

    fn with_guide<R>(&self, cache: &GuideCache, f: impl FnOnce(&dyn Guide) -> R) -> R {
        match cache {
            GuideCache::One(v) => f(v),
            GuideCache::Joint(v) => f(v),
            GuideCache::Two(s) => {
                let g = TwoChannelGuide::new(s, self.photons.as_ref().expect("two-channel run has photons"), &self.k);
                f(&g)
            }
        }
    }

    fn grid(&self) -> SpatialGrid {
        self.v.grid
    }

    fn t(&self, n: usize) -> f64 {
        n as f64 * self.spec.run.dt
    }

    fn presence(&self) -> Vec<f64> {
        match &self.dynamics {
            Dynamics::Single { psi, .. } => psi.density(),
            Dynamics::TwoChannel { state, .. } => state.presence(),
            Dynamics::Joint { state, .. } => state.presence(),
        }
    }

    fn norm(&self) -> f64 {
        self.presence().iter().sum::<f64>() * self.grid().dx()
    }

    fn energy(&self) -> f64 {
        match &self.dynamics {
            Dynamics::Single { psi, .. } => electron_energy(&psi.values, &self.v, &self.k),
            Dynamics::TwoChannel { state, stepper } => stepper.energy(state, &self.v, &self.k),
            Dynamics::Joint { two, two_stepper, .. } => two_stepper.energy(two, &self.v, &self.k),
        }
    }

    /// Electron channels and the fraction of weight outside span{ψ₀, ψ₁}.
    fn channels(&self) -> Result<(TwoChannelState, f64)> {
        Ok(match &self.dynamics {
            Dynamics::Single { psi, .. } => (TwoChannelState::from_electron(psi.clone()), 0.0),
            Dynamics::TwoChannel { state, .. } => (state.clone(), 0.0),
            Dynamics::Joint { state, .. } => {
                let (two, resid) = project_channels(state, self.photons.as_ref().unwrap())?;
                let n = state.norm_sqr();
                (two, if n > 0.0 { resid * resid / n } else { 0.0 })
            }
        })
    }

    fn ks_now(&self) -> Result<f64> {
        let cdf = GridCdf::new(&self.presence(), &self.grid())?;
        Ok(ks_statistic(&self.ens.x, |x| cdf.cdf(x)))
    }

    fn step(&mut self) {
        match &mut self.dynamics {
            Dynamics::Single { psi, prop } => prop.apply(&mut psi.values, &mut self.scratch),
            Dynamics::TwoChannel { state, stepper } => stepper.step(state),
            Dynamics::Joint {
                state,
                stepper,
                two,
                two_stepper,
            } => {
                stepper.step(state);
                two_stepper.step(two);
            }
        }
        let next = self.compute_guide();
        let old = std::mem::replace(&mut self.guide, next);
        let dt = self.spec.run.dt;
        let mut ens = std::mem::replace(&mut self.ens, TrajectoryEnsemble::new_1d(vec![0.0], &self.v.grid, 0).unwrap());
        self.with_guide(&old, |g0| self.with_guide(&self.guide, |g1| ens.advance(g0, g1, dt)));
        self.ens = ens;
    }

    fn propagate(&mut self, e0: f64, direction_sign: f64) -> Result<(usize, Vec<EventRecord>)> {
        let r = &self.spec.run;
        let n_steps = (r.t_end / r.dt).round() as usize;
        let pop_every = ((r.populations_every / r.dt).round() as usize).max(1);
        let snap_every = ((r.snapshot_every / r.dt).round() as usize).max(1);
        let mut pending: Vec<(usize, usize)> = self
            .spec
            .events
            .iter()
            .enumerate()
            .map(|(i, e)| ((e.t_s / r.dt).round() as usize, i))
            .collect();
        pending.sort();
        let mut pending = pending.into_iter().peekable();
        let mut records = Vec::new();

        self.dump(0, pop_every, snap_every)?;
        let mut n = 0;
        while n < n_steps {
            if let Some(&(ns, idx)) = pending.peek() {
                if ns <= n {
                    pending.next();
                    let before = n;
                    let rec = self
                        .apply_event(idx, &mut n, e0, direction_sign)
                        .map_err(|e| e.in_stage(format!("scattering event {idx}")))?;
                    records.push(rec);
                    for m in before + 1..=n {
                        if m % pop_every == 0 || m % snap_every == 0 {
                            self.dump(m, pop_every, snap_every)?;
                        }
                    }
                    continue;
                }
            }
            self.step();
            n += 1;
            self.dump(n, pop_every, snap_every)?;
        }
        Ok((n, records))
    }

    fn dump(&mut self, n: usize, pop_every: usize, snap_every: usize) -> Result<()> {
        if n % pop_every == 0 {
            self.record_populations(n).map_err(|e| e.in_stage("populations"))?;
        }
        if n % snap_every == 0 {
            self.record_snapshot(n).map_err(|e| e.in_stage("snapshot"))?;
        }
        Ok(())
    }

    fn record_populations(&mut self, n: usize) -> Result<()> {
        let t = self.t(n);
        let (two, outside) = self.channels()?;
        self.max_outside = self.max_outside.max(outside);
        let b_norm = two.psi_b.norm_sqr();
        self.max_b_norm = self.max_b_norm.max(b_norm);
        if let (Some(basis), Some(es), Some(hw)) = (&self.basis, self.e_split, self.half_width) {
            let mut two = two;
            two.t = t;
            let p = level_populations(&two, basis, es, hw)?;
            self.populations.get_or_insert_with(Default::default).push(t, &p, b_norm);
            if let Dynamics::Joint { two: reference, .. } = &self.dynamics {
                let q = level_populations(reference, basis, es, hw)?;
                self.reference
                    .get_or_insert_with(Default::default)
                    .push(t, &q, reference.psi_b.norm_sqr());
            }
        }
        if let Some(length) = self.ramo_length {
            let qs = self.ens.q.clone().unwrap_or_else(|| vec![0.0; self.ens.len()]);
            let vx: Vec<f64> = self.with_guide(&self.guide, |g| {
                self.ens
                    .x
                    .iter()
                    .zip(&qs)
                    .map(|(&x, &q)| g.velocity(x, q).map_or(0.0, |v| v.0))
                    .collect()
            });
            let i = ramo_current(&self.ens.x, &vx, length, self.k.e_charge)?;
            self.current.push([t, i.iter().sum::<f64>() / i.len() as f64]);
        }
        let m = self.spec.run.overlay_w.min(self.ens.len());
        let mut row = vec![t];
        row.extend_from_slice(&self.ens.x[..m]);
        if let Some(q) = &self.ens.q {
            row.extend_from_slice(&q[..m]);
        }
        self.overlay.push(row);
        Ok(())
    }

    fn record_snapshot(&mut self, n: usize) -> Result<()> {
        let t = self.t(n);
        let idx = self.snap_index;
        self.snap_index += 1;
        let grid = self.grid();
        let presence = self.presence();
        let cdf = GridCdf::new(&presence, &grid)?;
        self.ks.push((t, ks_statistic(&self.ens.x, |x| cdf.cdf(x))));
        self.ens.record(t);
        self.out.write_csv(
            &format!("presence_{idx:04}.csv"),
            &["x_nm", "P_e"],
            presence.iter().enumerate().map(|(i, p)| [grid.x(i), *p]),
        )?;
        let (two, _) = self.channels()?;
        self.out.write_fields(
            &format!("snapshot_{idx:04}.csv"),
            &grid,
            &["psi_A", "psi_B"],
            &[&two.psi_a.values, &two.psi_b.values],
        )?;
        match &self.dynamics {
            Dynamics::Joint { state, two: reference, .. } => {
                let p2 = reference.presence();
                self.out.write_csv(
                    &format!("presence_two_channel_{idx:04}.csv"),
                    &["x_nm", "P_e"],
                    p2.iter().enumerate().map(|(i, p)| [grid.x(i), *p]),
                )?;
                let peak = p2.iter().cloned().fold(0.0, f64::max);
                let diff: Vec<f64> = presence.iter().zip(&p2).map(|(a, b)| (a - b).abs()).collect();
                self.presence_dev = self.presence_dev.max(diff.iter().sum::<f64>() * grid.dx());
                let hw = self.half_width.unwrap_or(0.0);
                let weights = |p: &[f64]| {
                    let mut w = [0.0; 3];
                    for (i, v) in p.iter().enumerate() {
                        let x = grid.x(i);
                        w[if x < -hw { 0 } else if x > hw { 2 } else { 1 }] += v * grid.dx();
                    }
                    w
                };
                let (wa, wb) = (weights(&presence), weights(&p2));
                for r in 0..3 {
                    self.presence_region_dev = self.presence_region_dev.max((wa[r] - wb[r]).abs());
                }
                if peak > 0.0 {
                    let worst = diff.iter().cloned().fold(0.0, f64::max);
                    self.presence_peak_dev = self.presence_peak_dev.max(worst / peak);
                }
                if self.out.is_enabled() {
                    self.out.write_bytes(&format!("snapshot2d_{idx:04}.bin"), &joint_bytes(state))?;
                }
                if let Some(q) = self.ens.q.as_ref().map(|q| q[0]) {
                    let c = slice_bcwf(state, q)?;
                    self.out.write_fields(&format!("bcwf_{idx:04}.csv"), &grid, &["psi"], &[&c.values])?;
                }
            }
            Dynamics::TwoChannel { state, .. } => {
                if let Some(q) = self.ens.q.as_ref().map(|q| q[0]) {
                    let c = slice_two_channel(state, self.photons.as_ref().unwrap(), q);
                    self.out.write_fields(&format!("bcwf_{idx:04}.csv"), &grid, &["psi"], &[&c.values])?;
                }
            }
            Dynamics::Single { .. } => {}
        }
        Ok(())
    }

    fn apply_event(&mut self, idx: usize, n: &mut usize, e0: f64, direction_sign: f64) -> Result<EventRecord> {
        let spec = &self.spec.events[idx];
        let e_gamma = match spec.e_gamma {
            Some(e) => resolve(e, self.res_pair, "scattering.E_gamma_eV")?,
            None => 0.0,
        };
        let event = ScatteringEvent {
            t_s: self.t(*n),
            model: spec.model,
            kind: spec.kind,
            e_gamma,
            k_gamma: spec.p_gamma,
            n_ts: spec.n_ts,
        };
        event.validate()?;
        let Dynamics::Single { psi, prop } = &self.dynamics else {
            return Err(Error::config("scattering events need the single-electron solver"));
        };
        let basis = self.basis.as_ref();
        let pre = psi.clone();
        let (post, report) = if event.n_ts == 1 {
            match event.model {
                TransitionModel::A => apply_model_a(
                    &pre,
                    basis.ok_or_else(|| Error::config("model A needs an energy basis"))?,
                    &event,
                )?,
                TransitionModel::B => apply_model_b(&pre, &event, e0, direction_sign, &self.k, basis)?,
            }
        } else {
            apply_gradual(&pre, &event, prop, basis, e0, direction_sign, &self.k)?
        };
        let consumed = if event.n_ts == 1 { 0 } else { event.n_ts };
        let k_gamma = match event.model {
            TransitionModel::B => Some(event.wavenumber(e0, direction_sign, &self.k)?),
            TransitionModel::A => None,
        };
        let grid = self.grid();
        let before = GridCdf::new(&pre.density(), &grid)?;
        let after = GridCdf::new(&post.density(), &grid)?;
        self.ens.x = quantile_map(&self.ens.x, &before, &after);
        let ks_after_map = ks_statistic(&self.ens.x, |x| after.cdf(x));
        let mean_v = |f: &ComplexField1D| velocity_1d(f, &self.k, VelocitySource::PhaseGradient).mean_weighted(&f.density());
        let (pre_c, post_c) = match basis {
            Some(b) => (
                Some(project_energy(&pre, b, ProjectionRegion::WholeGrid)?),
                Some(project_energy(&post, b, ProjectionRegion::WholeGrid)?),
            ),
            None => (None, None),
        };
        let record = EventRecord {
            index: idx,
            t_s: event.t_s,
            model: event.model,
            e_gamma,
            k_gamma,
            report,
            mean_velocity_pre: mean_v(&pre),
            mean_velocity_post: mean_v(&post),
            pre,
            post: post.clone(),
            pre_coefficients: pre_c,
            post_coefficients: post_c,
            ks_after_map,
        };
        self.out
            .write_fields(&format!("event_{idx}_pre.csv"), &grid, &["psi"], &[&record.pre.values])?;
        self.out
            .write_fields(&format!("event_{idx}_post.csv"), &grid, &["psi"], &[&record.post.values])?;
        if let (Some(a), Some(b)) = (&record.pre_coefficients, &record.post_coefficients) {
            let (wa, wb) = (a.weights(), b.weights());
            self.out.write_csv(
                &format!("transition_spectrum_{idx}.csv"),
                &["E_signed_eV", "weight_pre", "weight_post"],
                a.energies.iter().enumerate().map(|(i, e)| [*e, wa[i] / a.de, wb[i] / b.de]),
            )?;
        }
        if let Dynamics::Single { psi, .. } = &mut self.dynamics {
            *psi = post;
        }
        *n += consumed;
        self.guide = self.compute_guide();
        Ok(record)
    }

    fn write_series(&self) -> Result<()> {
        let pop_header = ["t_fs", "P_A1", "P_A2", "P_B1", "P_B2", "N_active", "norm_B"];
        let rows = |p: &PopulationSeries| -> Vec<[f64; 7]> {
            (0..p.len())
                .map(|i| [p.t[i], p.p_a1[i], p.p_a2[i], p.p_b1[i], p.p_b2[i], p.weight[i], p.b_norm[i]])
                .collect()
        };
        if let Some(p) = &self.populations {
            self.out.write_csv("populations.csv", &pop_header, rows(p))?;
        }
        if let Some(p) = &self.reference {
            self.out.write_csv("populations_two_channel.csv", &pop_header, rows(p))?;
        }
        if !self.current.is_empty() {
            self.out.write_csv("current.csv", &["t_fs", "I_ramo"], &self.current)?;
        }
        self.out.write_csv(
            "equivariance.csv",
            &["t_fs", "ks_D", "ks_bound"],
            self.ks.iter().map(|(t, d)| [*t, *d, 2.0 * ks_critical_1pct(self.ens.len())]),
        )?;
        let m = self.spec.run.overlay_w.min(self.ens.len());
        let mut header = vec!["t_fs".to_string()];
        header.extend((0..m).map(|j| format!("x_{j}")));
        if self.ens.q.is_some() {
            header.extend((0..m).map(|j| format!("q_{j}")));
        }
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        self.out.write_csv("trajectories_overlay.csv", &header, &self.overlay)?;

        let two_d = self.ens.q.is_some();
        let mut rows = Vec::with_capacity(self.ens.times.len() * self.ens.len());
        for (s, t) in self.ens.times.iter().enumerate() {
            for j in 0..self.ens.len() {
                let mut r = vec![*t, j as f64, self.ens.history_x[s][j]];
                if two_d {
                    r.push(self.ens.history_q[s][j]);
                }
                rows.push(r);
            }
        }
        let header: &[&str] = if two_d {
            &["t_fs", "experiment", "x_nm", "q"]
        } else {
            &["t_fs", "experiment", "x_nm"]
        };
        self.out.write_csv("trajectories.csv", header, &rows)
    }
}

fn joint_bytes(state: &JointState2D) -> Vec<u8> {
    let header = format!(
        "nx={} nq={} x_min={} x_max={} q_min={} q_max={} t_fs={} layout=q-major complex128-le\n",
        state.nx(),
        state.nq(),
        fmt_f(state.xgrid.x_min()),
        fmt_f(state.xgrid.x_max()),
        fmt_f(state.qgrid.q_min()),
        fmt_f(state.qgrid.q_max()),
        fmt_f(state.t),
    );
    let mut bytes = header.into_bytes();
    bytes.reserve(state.values.len() * 16);
    for c in &state.values {
        bytes.extend_from_slice(&c.re.to_le_bytes());
        bytes.extend_from_slice(&c.im.to_le_bytes());
    }
    bytes
}

fn write_summary(spec: &ScenarioSpec, o: &RunOutcome, out: &RunDir) -> Result<()> {
    let mut s = Summary::default();
    s.line("name", &spec.name);
    s.line("status", "ok");
    s.line(
        "resonances_eV",
        o.resonances.iter().map(|e| fmt_f(*e)).collect::<Vec<_>>().join(" "),
    );
    if let Some(e) = o.e_split {
        s.float("E_split_eV", e);
    }
    s.float("E_central_eV", o.central_energy);
    s.float("m_star_eV_fs2_per_nm2", o.constants.m_star);
    s.line("steps", o.steps);
    s.line("W", o.w);
    s.line("seed", spec.run.seed);
    s.float("norm_initial", o.norm_initial);
    s.float("norm_final", o.norm_final);
    s.float("energy_initial_eV", o.energy_initial);
    s.float("energy_final_eV", o.energy_final);
    s.float("max_norm_B", o.max_b_norm);
    s.float("ks_initial", o.ks_initial);
    s.float("ks_initial_bound_1pct", ks_critical_1pct(o.w));
    s.float("ks_max", o.ks_max());
    s.float("ks_bound", o.ks_bound());
    if let Some(d) = o.max_outside_span {
        s.float("joint_max_outside_span", d);
    }
    if let Some(d) = o.presence_deviation {
        s.float("joint_presence_l1_deviation", d);
    }
    if let Some(d) = o.presence_peak_deviation {
        s.float("joint_presence_peak_rel_deviation", d);
    }
    if let Some(d) = o.presence_region_deviation {
        s.float("joint_presence_region_deviation", d);
    }
    if let (Some(a), Some(b)) = (&o.populations, &o.reference_populations) {
        s.float("joint_max_population_deviation", a.max_deviation(b));
    }
    let mut report = Vec::new();
    for e in &o.events {
        let r = &e.report;
        let p = format!("event.{}", e.index);
        s.line(&format!("{p}.model"), if e.model == TransitionModel::A { "A" } else { "B" });
        s.float(&format!("{p}.t_s_fs"), e.t_s);
        s.float(&format!("{p}.E_gamma_eV"), e.e_gamma);
        if let Some(k) = e.k_gamma {
            s.float(&format!("{p}.k_gamma_per_nm"), k);
        }
        s.float(&format!("{p}.mean_abs_E_pre_eV"), r.pre_mean_energy);
        s.float(&format!("{p}.mean_abs_E_post_eV"), r.post_mean_energy);
        s.float(&format!("{p}.leaked"), r.leaked_probability);
        s.float(&format!("{p}.negative_branch_weight"), r.negative_branch_weight);
        s.float(&format!("{p}.support_width_post_eV"), r.post_support_width);
        s.float(&format!("{p}.mean_velocity_pre"), e.mean_velocity_pre);
        s.float(&format!("{p}.mean_velocity_post"), e.mean_velocity_post);
        report.push([
            e.index as f64,
            e.t_s,
            if e.model == TransitionModel::A { 0.0 } else { 1.0 },
            e.e_gamma,
            e.k_gamma.unwrap_or(f64::NAN),
            r.pre_mean_energy,
            r.post_mean_energy,
            r.leaked_probability,
            r.pre_negative_branch_weight,
            r.negative_branch_weight,
            r.pre_support_width,
            r.post_support_width,
            e.mean_velocity_pre,
            e.mean_velocity_post,
        ]);
    }
    if !report.is_empty() {
        out.write_csv(
            "transition_report.csv",
            &[
                "event",
                "t_s_fs",
                "model_is_B",
                "E_gamma_eV",
                "k_gamma_per_nm",
                "mean_abs_E_pre_eV",
                "mean_abs_E_post_eV",
                "leaked",
                "neg_weight_pre",
                "neg_weight_post",
                "support_pre_eV",
                "support_post_eV",
                "mean_v_pre",
                "mean_v_post",
            ],
            &report,
        )?;
    }
    out.write_text("summary.txt", s.text())
}

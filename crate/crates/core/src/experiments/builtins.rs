use std::path::Path;

use rayon::prelude::*;

use super::config::{EnergyValue, EventSpec, PhotonSpec, PotentialSpec, ScenarioSpec, SolverKind};
use super::output::Summary;
use super::runner::{run_scenario, RunOutcome};
use crate::bohmian::pearson;
use crate::evolution::CouplingParams;
use crate::scattering::{negative_branch_weight, TransitionKind, TransitionModel};
use crate::spectral::box_eigenstates;
use crate::{Error, Result};

const NAMES: [&str; 7] = [
    "fig3_rabi",
    "fig5_e1_injection",
    "fig6_offresonance",
    "fig7_flat_ab",
    "fig8_rtd_ab",
    "fig9_spectra",
    "fig4_joint2d",
];

pub fn builtin_names() -> &'static [&'static str] {
    &NAMES
}

fn cavity(name: &str, x0: f64, energy: EnergyValue, photon_energy: EnergyValue, t_end: f64) -> ScenarioSpec {
    let mut s = ScenarioSpec {
        name: name.into(),
        photon: Some(PhotonSpec {
            photon_energy,
            ..PhotonSpec::default()
        }),
        ..ScenarioSpec::default()
    };
    s.packet.x0 = x0;
    s.packet.energy = energy;
    s.run.solver = SolverKind::TwoChannel;
    s.run.t_end = t_end;
    s.run.snapshot_every = 25.0;
    s
}

fn event(model: TransitionModel, t_s: f64, e_gamma: EnergyValue) -> EventSpec {
    EventSpec {
        model,
        kind: TransitionKind::Absorption,
        t_s,
        e_gamma: Some(e_gamma),
        p_gamma: None,
        n_ts: 1,
    }
}

fn rtd_event_run(name: &str, ev: Option<EventSpec>) -> ScenarioSpec {
    let mut s = ScenarioSpec {
        name: name.into(),
        ..ScenarioSpec::default()
    };
    s.packet.x0 = -100.0;
    s.packet.energy = EnergyValue::E1;
    s.run.t_end = 400.0;
    s.run.snapshot_every = 25.0;
    s.events.extend(ev);
    s
}

/// Free packet at 5 eV on a 0.05 nm lattice, absorbing 0.1 eV when centred at x = 0.
fn flat_run(name: &str, model: TransitionModel) -> ScenarioSpec {
    let mut s = ScenarioSpec {
        name: name.into(),
        n_x: 10001,
        potential: PotentialSpec::Flat { level: 0.0 },
        ..ScenarioSpec::default()
    };
    s.packet.x0 = -100.0;
    s.packet.sigma = 30.0;
    s.packet.energy = EnergyValue::Literal(5.0);
    s.run.t_end = 30.0;
    s.run.dt = 0.01;
    s.run.snapshot_every = 5.0;
    s.run.populations_every = 0.5;
    s.run.basis_e_min = 4.4;
    s.run.basis_e_max = 5.7;
    s.run.basis_de = 0.005;
    s.events.push(event(model, 15.0, EnergyValue::Literal(0.1)));
    s
}

/// The scenario runs behind a built-in figure, in execution order.
pub fn builtin_scenarios(name: &str) -> Result<Vec<ScenarioSpec>> {
    Ok(match name {
        "fig3_rabi" => vec![cavity(name, -130.0, EnergyValue::E2, EnergyValue::E2MinusE1, 300.0)],
        "fig5_e1_injection" => vec![cavity(name, -150.0, EnergyValue::E1, EnergyValue::E2MinusE1, 500.0)],
        "fig6_offresonance" => vec![cavity(name, -130.0, EnergyValue::E2, EnergyValue::Literal(0.26), 300.0)],
        "fig4_joint2d" => {
            let mut s = cavity(name, -130.0, EnergyValue::E2, EnergyValue::E2MinusE1, 300.0);
            s.run.solver = SolverKind::Joint2D;
            s.run.dt = 0.2;
            s.run.snapshot_every = 50.0;
            vec![s]
        }
        "fig7_flat_ab" => vec![
            flat_run("model_a", TransitionModel::A),
            flat_run("model_b", TransitionModel::B),
        ],
        "fig8_rtd_ab" => vec![
            rtd_event_run("reference", None),
            rtd_event_run("model_a", Some(event(TransitionModel::A, 150.0, EnergyValue::E2MinusE1))),
            rtd_event_run(
                "model_a_0186",
                Some(event(TransitionModel::A, 150.0, EnergyValue::Literal(0.186))),
            ),
            rtd_event_run("model_b", Some(event(TransitionModel::B, 250.0, EnergyValue::E2MinusE1))),
        ],
        "fig9_spectra" => vec![
            rtd_event_run("model_a", Some(event(TransitionModel::A, 150.0, EnergyValue::E2MinusE1))),
            rtd_event_run("model_b", Some(event(TransitionModel::B, 250.0, EnergyValue::E2MinusE1))),
        ],
        other => {
            return Err(Error::InvalidKey {
                key: other.to_string(),
                message: format!("unknown built-in scenario; expected one of {}", NAMES.join(", ")),
            })
        }
    })
}

#[derive(Debug, Clone)]
pub struct BuiltinOutcome {
    pub name: String,
    pub specs: Vec<ScenarioSpec>,
    pub runs: Vec<RunOutcome>,
    pub metrics: Vec<(String, f64)>,
}

impl BuiltinOutcome {
    pub fn metric(&self, key: &str) -> Option<f64> {
        self.metrics.iter().find(|(k, _)| k == key).map(|p| p.1)
    }

    pub fn run(&self, name: &str) -> Option<&RunOutcome> {
        self.runs.iter().find(|r| r.name == name)
    }
}

/// Runs every scenario of a built-in (in parallel) and derives its metrics.
/// A single-run built-in writes into `out_dir` directly, otherwise into one
/// sub-directory per run.
pub fn run_builtin(name: &str, out_dir: Option<&Path>, seed: Option<u64>) -> Result<BuiltinOutcome> {
    let mut specs = builtin_scenarios(name)?;
    if let Some(s) = seed {
        specs.iter_mut().for_each(|sp| sp.run.seed = s);
    }
    let single = specs.len() == 1;
    let runs = specs
        .par_iter()
        .map(|s| {
            let dir = out_dir.map(|d| if single { d.to_path_buf() } else { d.join(&s.name) });
            run_scenario(s, dir.as_deref()).map_err(|e| e.in_stage(format!("{name}/{}", s.name)))
        })
        .collect::<Result<Vec<_>>>()?;
    let metrics = derive_metrics(name, &specs, &runs)?;
    if let Some(d) = out_dir {
        let mut s = Summary::default();
        s.line("builtin", name);
        for (k, v) in &metrics {
            s.float(k, *v);
        }
        std::fs::write(d.join("metrics.txt"), s.text())?;
    }
    Ok(BuiltinOutcome {
        name: name.into(),
        specs,
        runs,
        metrics,
    })
}

/// Rabi-exchange figures of merit for a cavity run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RabiMetrics {
    pub p_b1_max: f64,
    pub p_b1_min_after_max: f64,
    pub pearson: f64,
    pub period_measured: Option<f64>,
    pub period_estimate: f64,
    pub x12: f64,
}

/// Fraction of the peak active-region weight that defines the interaction window.
pub const INTERACTION_WINDOW: f64 = 0.05;

/// Analytic period 2πħ/(2|α·x₁₂|), x₁₂ = ⟨φ₁|x·w(x)|φ₂⟩ between the two
/// lowest states of the closed well.
pub fn rabi_period_estimate(spec: &ScenarioSpec, resonances: &[f64]) -> Result<(f64, f64)> {
    let (PotentialSpec::DoubleBarrier {
        well_width,
        barrier_thickness,
        ..
    }, Some(ph)) = (spec.potential, &spec.photon)
    else {
        return Err(Error::config("Rabi estimate needs a double barrier and a photon mode"));
    };
    let k = spec.constants()?;
    let v = spec.potential_profile()?;
    let hw_box = v.active_half_width().unwrap_or(well_width / 2.0 + barrier_thickness);
    let pair = (resonances.len() >= 2).then(|| (resonances[0], resonances[1]));
    let hw = ph.photon_energy.resolve(pair)?;
    let env = match ph.envelope_half_width {
        None => Some(hw_box),
        Some(e) => e,
    };
    let c = CouplingParams::from_si_alpha(ph.alpha_ev_per_m, hw, &k, env)?;
    let levels = box_eigenstates(&v, &k, 2, Some(hw_box))?;
    let (g1, g2) = (&levels[0].1, &levels[1].1);
    let x12: f64 = (0..g1.grid.len())
        .map(|i| g1.values[i].re * c.dipole_profile(g1.grid.x(i)) * g2.values[i].re)
        .sum::<f64>()
        * g1.grid.dx();
    let period = 2.0 * std::f64::consts::PI * k.hbar / (2.0 * (c.alpha * x12).abs());
    Ok((period, x12))
}

/// Parabola-refined times of local maxima of `y` above `level`.
fn peak_times(t: &[f64], y: &[f64], level: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 1..y.len().saturating_sub(1) {
        if y[i] > level && y[i] >= y[i - 1] && y[i] > y[i + 1] {
            let (a, b, c) = (y[i - 1], y[i], y[i + 1]);
            let den = a - 2.0 * b + c;
            let shift = if den != 0.0 { 0.5 * (a - c) / den } else { 0.0 };
            out.push(t[i] + shift * (t[i + 1] - t[i]));
        }
    }
    out
}

fn mean_spacing(c: &[f64]) -> Option<f64> {
    (c.len() >= 2).then(|| (c[c.len() - 1] - c[0]) / (c.len() - 1) as f64)
}

/// Level at which P_B1 counts as having risen.
pub const RABI_HIGH: f64 = 0.8;

pub fn rabi_metrics(spec: &ScenarioSpec, run: &RunOutcome) -> Result<RabiMetrics> {
    let p = run
        .populations
        .as_ref()
        .ok_or_else(|| Error::config("run has no population series"))?;
    if p.is_empty() {
        return Err(Error::config("empty population series"));
    }
    let win = p.window(INTERACTION_WINDOW);
    let a2: Vec<f64> = win.iter().map(|&i| p.p_a2[i]).collect();
    let b1w: Vec<f64> = win.iter().map(|&i| p.p_b1[i]).collect();
    let b1 = &p.p_b1;
    let p_b1_max = b1.iter().cloned().fold(0.0, f64::max);
    let first_high = b1
        .iter()
        .position(|&b| b >= RABI_HIGH)
        .unwrap_or_else(|| b1.iter().position(|&b| b == p_b1_max).unwrap_or(0));
    let p_b1_min_after_max = b1[first_high..].iter().cloned().fold(f64::INFINITY, f64::min);
    let period_measured = mean_spacing(&peak_times(&p.t, b1, 0.5));
    let (period_estimate, x12) = rabi_period_estimate(spec, &run.resonances)?;
    Ok(RabiMetrics {
        p_b1_max,
        p_b1_min_after_max,
        pearson: pearson(&a2, &b1w),
        period_measured,
        period_estimate,
        x12,
    })
}

fn derive_metrics(name: &str, specs: &[ScenarioSpec], runs: &[RunOutcome]) -> Result<Vec<(String, f64)>> {
    let mut m: Vec<(String, f64)> = Vec::new();
    let ks_max = runs.iter().map(|r| r.ks_max()).fold(0.0, f64::max);
    let ks_init = runs.iter().map(|r| r.ks_initial).fold(0.0, f64::max);
    m.push(("ks_max".into(), ks_max));
    m.push(("ks_initial_max".into(), ks_init));
    let by_name = |n: &str| runs.iter().find(|r| r.name == n || (runs.len() == 1 && r.name == name));
    match name {
        "fig3_rabi" => {
            let r = rabi_metrics(&specs[0], &runs[0])?;
            m.push(("p_b1_max".into(), r.p_b1_max));
            m.push(("p_b1_min_after_max".into(), r.p_b1_min_after_max));
            m.push(("pearson_a2_b1".into(), r.pearson));
            m.push(("period_measured_fs".into(), r.period_measured.unwrap_or(f64::NAN)));
            m.push(("period_estimate_fs".into(), r.period_estimate));
            m.push(("x12_nm".into(), r.x12));
        }
        "fig5_e1_injection" => {
            let p = runs[0].populations.as_ref().ok_or_else(|| Error::config("no populations"))?;
            let worst = (0..p.len()).map(|i| p.p_b1[i] + p.p_b2[i]).fold(0.0, f64::max);
            m.push(("max_p_b".into(), worst));
            m.push(("max_norm_b".into(), runs[0].max_b_norm));
        }
        "fig6_offresonance" => {
            m.push(("max_norm_b".into(), runs[0].max_b_norm));
        }
        "fig4_joint2d" => {
            let r = &runs[0];
            let (a, b) = (
                r.populations.as_ref().ok_or_else(|| Error::config("no populations"))?,
                r.reference_populations.as_ref().ok_or_else(|| Error::config("no reference"))?,
            );
            m.push(("max_population_deviation".into(), a.max_deviation(b)));
            m.push(("max_outside_span".into(), r.max_outside_span.unwrap_or(f64::NAN)));
            m.push(("presence_l1_deviation".into(), r.presence_deviation.unwrap_or(f64::NAN)));
            m.push(("presence_peak_rel_deviation".into(), r.presence_peak_deviation.unwrap_or(f64::NAN)));
            m.push(("presence_region_deviation".into(), r.presence_region_deviation.unwrap_or(f64::NAN)));
        }
        "fig7_flat_ab" => {
            let (a, b) = (
                by_name("model_a").ok_or_else(|| Error::Internal("missing model_a".into()))?,
                by_name("model_b").ok_or_else(|| Error::Internal("missing model_b".into()))?,
            );
            let (ea, eb) = (&a.events[0], &b.events[0]);
            m.push(("l2_difference".into(), ea.post.l2_distance(&eb.post)?));
            let k = eb.k_gamma.unwrap_or(f64::NAN);
            let expected = a.constants.hbar * k / a.constants.m_star;
            m.push(("expected_velocity_shift".into(), expected));
            let shift_a = ea.mean_velocity_post - ea.mean_velocity_pre;
            let shift_b = eb.mean_velocity_post - eb.mean_velocity_pre;
            m.push(("velocity_shift_a".into(), shift_a));
            m.push(("velocity_shift_b".into(), shift_b));
            m.push(("velocity_shift_rel_err_a".into(), (shift_a / expected - 1.0).abs()));
            m.push(("velocity_shift_rel_err_b".into(), (shift_b / expected - 1.0).abs()));
        }
        "fig8_rtd_ab" | "fig9_spectra" => {
            for run in runs.iter().filter(|r| !r.events.is_empty()) {
                let e = &run.events[0];
                let r = &e.report;
                let p = &run.name;
                m.push((format!("{p}.E_gamma_eV"), e.e_gamma));
                m.push((format!("{p}.mean_shift_eV"), r.post_mean_energy - r.pre_mean_energy));
                m.push((format!("{p}.negative_weight"), r.negative_branch_weight));
                m.push((format!("{p}.support_broadening_eV"), r.post_support_width - r.pre_support_width));
                if let Some(c) = &e.post_coefficients {
                    m.push((format!("{p}.negative_weight_check"), negative_branch_weight(c)));
                }
            }
            if let Some(r) = by_name("reference") {
                if let Some(p) = &r.populations {
                    m.push(("reference.final_p_a1".into(), *p.p_a1.last().unwrap_or(&f64::NAN)));
                }
            }
        }
        _ => {}
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_is_valid() {
        for n in builtin_names() {
            for s in builtin_scenarios(n).unwrap() {
                s.validate().unwrap();
                assert_eq!(ScenarioSpec::parse(&s.to_text()).unwrap(), s);
            }
        }
        assert!(builtin_scenarios("fig99").is_err());
    }

    #[test]
    fn peaks_of_a_cosine() {
        let t: Vec<f64> = (0..400).map(|i| i as f64 * 0.25).collect();
        let y: Vec<f64> = t.iter().map(|t| 0.5 + 0.5 * (2.0 * std::f64::consts::PI * t / 30.0).cos()).collect();
        let p = peak_times(&t, &y, 0.5);
        assert!((mean_spacing(&p).unwrap() - 30.0).abs() < 1e-3);
    }
}

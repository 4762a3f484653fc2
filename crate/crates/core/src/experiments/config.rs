//! Scenario description and its flat `key = value` text format.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::grid_potential::units::DEFAULT_MASS_RATIO;
use crate::grid_potential::{build_double_barrier, PhysicalConstants, PotentialProfile, SpatialGrid};
use crate::scattering::{TransitionKind, TransitionModel};
use crate::{Error, Result};

/// An energy that may refer to the device resonances found at startup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnergyValue {
    Literal(f64),
    E1,
    E2,
    E2MinusE1,
}

impl EnergyValue {
    fn parse(s: &str) -> std::result::Result<Self, String> {
        match s.replace(' ', "").as_str() {
            "E1" => Ok(EnergyValue::E1),
            "E2" => Ok(EnergyValue::E2),
            "E2-E1" => Ok(EnergyValue::E2MinusE1),
            other => other
                .parse::<f64>()
                .map(EnergyValue::Literal)
                .map_err(|_| format!("expected a number, E1, E2 or E2-E1, got `{s}`")),
        }
    }

    pub fn is_symbolic(&self) -> bool {
        !matches!(self, EnergyValue::Literal(_))
    }

    pub fn resolve(&self, resonances: Option<(f64, f64)>) -> Result<f64> {
        match (self, resonances) {
            (EnergyValue::Literal(v), _) => Ok(*v),
            (EnergyValue::E1, Some((e1, _))) => Ok(e1),
            (EnergyValue::E2, Some((_, e2))) => Ok(e2),
            (EnergyValue::E2MinusE1, Some((e1, e2))) => Ok(e2 - e1),
            (_, None) => Err(Error::config(
                "symbolic energy used but the potential has no two resonances",
            )),
        }
    }
}

impl std::fmt::Display for EnergyValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EnergyValue::Literal(v) => write!(f, "{v}"),
            EnergyValue::E1 => write!(f, "E1"),
            EnergyValue::E2 => write!(f, "E2"),
            EnergyValue::E2MinusE1 => write!(f, "E2-E1"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialSpec {
    Flat { level: f64 },
    DoubleBarrier { well_width: f64, barrier_thickness: f64, barrier_height: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    /// Bare electron, no photon mode.
    Single,
    TwoChannel,
    /// Joint (x, q) solver; also runs the two-channel system for comparison.
    Joint2D,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PacketSpec {
    pub x0: f64,
    pub sigma: f64,
    pub energy: EnergyValue,
    pub left_to_right: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhotonSpec {
    pub photon_energy: EnergyValue,
    pub alpha_ev_per_m: f64,
    /// None: the potential's active half-width; Some(None): no envelope.
    pub envelope_half_width: Option<Option<f64>>,
    pub n_q: usize,
    pub q_sigmas: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventSpec {
    pub model: TransitionModel,
    pub kind: TransitionKind,
    pub t_s: f64,
    pub e_gamma: Option<EnergyValue>,
    /// p_γ in units of ħ/nm.
    pub p_gamma: Option<f64>,
    pub n_ts: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub solver: SolverKind,
    pub t_end: f64,
    pub dt: f64,
    pub snapshot_every: f64,
    pub populations_every: f64,
    pub w: usize,
    pub overlay_w: usize,
    pub seed: u64,
    pub absorber: bool,
    pub basis_e_min: f64,
    pub basis_e_max: f64,
    pub basis_de: f64,
    pub ramo_length: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
    pub potential: PotentialSpec,
    pub m_star_rel: f64,
    pub packet: PacketSpec,
    pub photon: Option<PhotonSpec>,
    pub events: Vec<EventSpec>,
    pub run: RunSpec,
    pub output_dir: Option<PathBuf>,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            name: "scenario".into(),
            x_min: -250.0,
            x_max: 250.0,
            n_x: 2001,
            potential: PotentialSpec::DoubleBarrier {
                well_width: 10.0,
                barrier_thickness: 2.0,
                barrier_height: 0.5,
            },
            m_star_rel: DEFAULT_MASS_RATIO,
            packet: PacketSpec {
                x0: -100.0,
                sigma: 30.0,
                energy: EnergyValue::E2,
                left_to_right: true,
            },
            photon: None,
            events: Vec::new(),
            run: RunSpec {
                solver: SolverKind::Single,
                t_end: 300.0,
                dt: 0.1,
                snapshot_every: 50.0,
                populations_every: 1.0,
                w: 2000,
                overlay_w: 10,
                seed: 1,
                absorber: false,
                basis_e_min: 0.002,
                basis_e_max: 1.5,
                basis_de: 0.001,
                ramo_length: None,
            },
            output_dir: None,
        }
    }
}

impl Default for PhotonSpec {
    fn default() -> Self {
        Self {
            photon_energy: EnergyValue::E2MinusE1,
            alpha_ev_per_m: 2.5e7,
            envelope_half_width: None,
            n_q: 128,
            q_sigmas: 8.0,
        }
    }
}

fn parse_err(key: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        key: key.to_string(),
        line,
        message: message.into(),
    }
}

fn num<T: std::str::FromStr>(key: &str, line: usize, v: &str) -> Result<T> {
    v.parse::<T>()
        .map_err(|_| parse_err(key, line, format!("cannot parse `{v}`")))
}

fn boolean(key: &str, line: usize, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(parse_err(key, line, format!("expected true/false, got `{v}`"))),
    }
}

#[derive(Default)]
struct RawEvent {
    model: Option<(TransitionModel, usize)>,
    kind: Option<TransitionKind>,
    t_s: Option<f64>,
    e_gamma: Option<EnergyValue>,
    p_gamma: Option<f64>,
    n_ts: Option<usize>,
    first_line: usize,
}

impl ScenarioSpec {
    pub fn constants(&self) -> Result<PhysicalConstants> {
        PhysicalConstants::with_mass_ratio(self.m_star_rel)
    }

    pub fn grid(&self) -> Result<SpatialGrid> {
        SpatialGrid::new(self.x_min, self.x_max, self.n_x)
    }

    pub fn potential_profile(&self) -> Result<PotentialProfile> {
        let grid = self.grid()?;
        match self.potential {
            PotentialSpec::Flat { level } => PotentialProfile::flat(grid, level),
            PotentialSpec::DoubleBarrier {
                well_width,
                barrier_thickness,
                barrier_height,
            } => build_double_barrier(grid, well_width, barrier_thickness, barrier_height),
        }
    }

    /// Parses the flat key-value format. Lines are `key = value`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = ScenarioSpec::default();
        let mut kind: Option<String> = None;
        let mut level = 0.0;
        let (mut well, mut thick, mut height) = (10.0, 2.0, 0.5);
        let mut photon: Option<PhotonSpec> = None;
        let mut photon_enabled: Option<bool> = None;
        let mut events: BTreeMap<usize, RawEvent> = BTreeMap::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| parse_err(content, line, "expected `key = value`"))?;
            if value.is_empty() {
                return Err(parse_err(key, line, "missing value"));
            }
            let ph = || photon.clone().unwrap_or_default();
            match key {
                "name" => spec.name = value.to_string(),
                "grid.x_min_nm" => spec.x_min = num(key, line, value)?,
                "grid.x_max_nm" => spec.x_max = num(key, line, value)?,
                "grid.n_x" => spec.n_x = num(key, line, value)?,
                "potential.kind" => match value {
                    "flat" | "double_barrier" => kind = Some(value.to_string()),
                    _ => return Err(parse_err(key, line, format!("unknown potential kind `{value}`"))),
                },
                "potential.level_eV" => level = num(key, line, value)?,
                "potential.well_width_nm" => well = num(key, line, value)?,
                "potential.barrier_thickness_nm" => thick = num(key, line, value)?,
                "potential.barrier_height_eV" => height = num(key, line, value)?,
                "material.m_star_rel" => spec.m_star_rel = num(key, line, value)?,
                "packet.x0_nm" => spec.packet.x0 = num(key, line, value)?,
                "packet.sigma_nm" => spec.packet.sigma = num(key, line, value)?,
                "packet.E_central_eV" => {
                    spec.packet.energy = EnergyValue::parse(value).map_err(|m| parse_err(key, line, m))?
                }
                "packet.direction" => {
                    spec.packet.left_to_right = match value {
                        "left_to_right" => true,
                        "right_to_left" => false,
                        _ => return Err(parse_err(key, line, format!("unknown direction `{value}`"))),
                    }
                }
                "photon.enabled" => photon_enabled = Some(boolean(key, line, value)?),
                "photon.hbar_omega_eV" => {
                    let mut p = ph();
                    p.photon_energy = EnergyValue::parse(value).map_err(|m| parse_err(key, line, m))?;
                    photon = Some(p);
                }
                "photon.alpha_eV_per_m" => {
                    let mut p = ph();
                    p.alpha_ev_per_m = num(key, line, value)?;
                    photon = Some(p);
                }
                "photon.envelope_half_width_nm" => {
                    let mut p = ph();
                    p.envelope_half_width = Some(if value == "none" {
                        None
                    } else {
                        Some(num(key, line, value)?)
                    });
                    photon = Some(p);
                }
                "photon.n_q" => {
                    let mut p = ph();
                    p.n_q = num(key, line, value)?;
                    photon = Some(p);
                }
                "photon.q_sigmas" => {
                    let mut p = ph();
                    p.q_sigmas = num(key, line, value)?;
                    photon = Some(p);
                }
                "run.solver" => {
                    spec.run.solver = match value {
                        "single" => SolverKind::Single,
                        "two_channel" => SolverKind::TwoChannel,
                        "joint2d" => SolverKind::Joint2D,
                        _ => return Err(parse_err(key, line, format!("unknown solver `{value}`"))),
                    }
                }
                "run.t_end_fs" => spec.run.t_end = num(key, line, value)?,
                "run.dt_fs" => spec.run.dt = num(key, line, value)?,
                "run.snapshot_every_fs" => spec.run.snapshot_every = num(key, line, value)?,
                "run.populations_every_fs" => spec.run.populations_every = num(key, line, value)?,
                "run.W" => spec.run.w = num(key, line, value)?,
                "run.overlay_W" => spec.run.overlay_w = num(key, line, value)?,
                "run.seed" => spec.run.seed = num(key, line, value)?,
                "run.absorber" => spec.run.absorber = boolean(key, line, value)?,
                "run.basis_E_min_eV" => spec.run.basis_e_min = num(key, line, value)?,
                "run.basis_E_max_eV" => spec.run.basis_e_max = num(key, line, value)?,
                "run.basis_dE_eV" => spec.run.basis_de = num(key, line, value)?,
                "run.ramo_length_nm" => spec.run.ramo_length = Some(num(key, line, value)?),
                "output.dir" => spec.output_dir = Some(PathBuf::from(value)),
                k if k.starts_with("scattering.") => {
                    let rest = &k["scattering.".len()..];
                    let (index, field) = match rest.split_once('.') {
                        Some((i, f)) if i.chars().all(|c| c.is_ascii_digit()) => (num::<usize>(key, line, i)?, f),
                        _ => (0, rest),
                    };
                    let ev = events.entry(index).or_insert_with(|| RawEvent {
                        first_line: line,
                        ..RawEvent::default()
                    });
                    match field {
                        "model" => {
                            let m = match value {
                                "A" | "a" => TransitionModel::A,
                                "B" | "b" => TransitionModel::B,
                                _ => return Err(parse_err(key, line, format!("unknown model `{value}`"))),
                            };
                            ev.model = Some((m, line));
                        }
                        "kind" => {
                            ev.kind = Some(match value {
                                "absorption" => TransitionKind::Absorption,
                                "emission" => TransitionKind::Emission,
                                _ => return Err(parse_err(key, line, format!("unknown kind `{value}`"))),
                            })
                        }
                        "t_s_fs" => ev.t_s = Some(num(key, line, value)?),
                        "E_gamma_eV" => {
                            ev.e_gamma = Some(EnergyValue::parse(value).map_err(|m| parse_err(key, line, m))?)
                        }
                        "p_gamma" => ev.p_gamma = Some(num(key, line, value)?),
                        "N_ts" => ev.n_ts = Some(num(key, line, value)?),
                        _ => return Err(parse_err(key, line, "unknown scattering key")),
                    }
                }
                _ => return Err(parse_err(key, line, "unknown key")),
            }
        }

        spec.potential = match kind.as_deref() {
            Some("flat") => PotentialSpec::Flat { level },
            _ => PotentialSpec::DoubleBarrier {
                well_width: well,
                barrier_thickness: thick,
                barrier_height: height,
            },
        };
        spec.photon = match (photon_enabled, photon) {
            (Some(false), _) => None,
            (Some(true), p) => Some(p.unwrap_or_default()),
            (None, p) => p,
        };
        if spec.photon.is_some() && spec.run.solver == SolverKind::Single {
            spec.run.solver = SolverKind::TwoChannel;
        }
        for (_, ev) in events {
            let (model, line) = ev
                .model
                .ok_or_else(|| parse_err("scattering.model", ev.first_line, "event without a model"))?;
            spec.events.push(EventSpec {
                model,
                kind: ev.kind.unwrap_or(TransitionKind::Absorption),
                t_s: ev
                    .t_s
                    .ok_or_else(|| parse_err("scattering.t_s_fs", line, "event without a scattering time"))?,
                e_gamma: ev.e_gamma,
                p_gamma: ev.p_gamma,
                n_ts: ev.n_ts.unwrap_or(1),
            });
        }
        spec.validate()?;
        Ok(spec)
    }

    /// Checks cross-field constraints; errors name the offending key.
    pub fn validate(&self) -> Result<()> {
        let bad = |k: &str, m: String| Err(Error::key(k, m));
        if self.n_x < 3 {
            return bad("grid.n_x", format!("need at least 3 points, got {}", self.n_x));
        }
        if !(self.x_max > self.x_min) {
            return bad("grid.x_max_nm", "must exceed grid.x_min_nm".into());
        }
        if !(self.m_star_rel > 0.0) {
            return bad("material.m_star_rel", "must be positive".into());
        }
        if !(self.run.dt > 0.0) {
            return bad("run.dt_fs", "must be positive".into());
        }
        if !(self.run.t_end > 0.0) {
            return bad("run.t_end_fs", "must be positive".into());
        }
        if self.run.w == 0 {
            return bad("run.W", "must be at least 1".into());
        }
        if !(self.run.snapshot_every > 0.0 && self.run.populations_every > 0.0) {
            return bad("run.snapshot_every_fs", "dump cadences must be positive".into());
        }
        if !(self.run.basis_e_min > 0.0 && self.run.basis_e_max > self.run.basis_e_min && self.run.basis_de > 0.0) {
            return bad("run.basis_E_min_eV", "basis window must satisfy 0 < E_min < E_max, dE > 0".into());
        }
        let flat = matches!(self.potential, PotentialSpec::Flat { .. });
        if flat && self.packet.energy.is_symbolic() {
            return bad("packet.E_central_eV", "E1/E2 need a double-barrier potential".into());
        }
        if let Some(p) = &self.photon {
            if flat && p.photon_energy.is_symbolic() {
                return bad("photon.hbar_omega_eV", "E1/E2 need a double-barrier potential".into());
            }
            if p.n_q < 3 {
                return bad("photon.n_q", "need at least 3 points".into());
            }
        }
        if self.photon.is_none() && self.run.solver != SolverKind::Single {
            return bad("run.solver", "two_channel/joint2d need photon.enabled = true".into());
        }
        for ev in &self.events {
            if !(ev.t_s >= 0.0) || ev.t_s >= self.run.t_end {
                return bad(
                    "scattering.t_s_fs",
                    format!("t_s = {} must lie in [0, run.t_end_fs = {})", ev.t_s, self.run.t_end),
                );
            }
            if ev.n_ts == 0 {
                return bad("scattering.N_ts", "must be at least 1".into());
            }
            if self.run.solver != SolverKind::Single {
                return bad("scattering.model", "events are only supported without the photon mode".into());
            }
            match (ev.model, ev.e_gamma, ev.p_gamma) {
                (TransitionModel::A, None, _) => return bad("scattering.E_gamma_eV", "model A needs E_gamma".into()),
                (TransitionModel::B, None, None) => {
                    return bad("scattering.E_gamma_eV", "model B needs E_gamma or p_gamma".into())
                }
                (_, Some(EnergyValue::Literal(e)), _) if !(e > 0.0) => {
                    return bad("scattering.E_gamma_eV", "must be positive".into())
                }
                (_, Some(e), _) if flat && e.is_symbolic() => {
                    return bad("scattering.E_gamma_eV", "E1/E2 need a double-barrier potential".into())
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Serialises back to the text format (round-trips through `parse`).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "name = {}", self.name);
        let _ = writeln!(s, "grid.x_min_nm = {}", self.x_min);
        let _ = writeln!(s, "grid.x_max_nm = {}", self.x_max);
        let _ = writeln!(s, "grid.n_x = {}", self.n_x);
        match self.potential {
            PotentialSpec::Flat { level } => {
                let _ = writeln!(s, "potential.kind = flat");
                let _ = writeln!(s, "potential.level_eV = {level}");
            }
            PotentialSpec::DoubleBarrier {
                well_width,
                barrier_thickness,
                barrier_height,
            } => {
                let _ = writeln!(s, "potential.kind = double_barrier");
                let _ = writeln!(s, "potential.well_width_nm = {well_width}");
                let _ = writeln!(s, "potential.barrier_thickness_nm = {barrier_thickness}");
                let _ = writeln!(s, "potential.barrier_height_eV = {barrier_height}");
            }
        }
        let _ = writeln!(s, "material.m_star_rel = {}", self.m_star_rel);
        let _ = writeln!(s, "packet.x0_nm = {}", self.packet.x0);
        let _ = writeln!(s, "packet.sigma_nm = {}", self.packet.sigma);
        let _ = writeln!(s, "packet.E_central_eV = {}", self.packet.energy);
        let dir = if self.packet.left_to_right { "left_to_right" } else { "right_to_left" };
        let _ = writeln!(s, "packet.direction = {dir}");
        match &self.photon {
            None => {
                let _ = writeln!(s, "photon.enabled = false");
            }
            Some(p) => {
                let _ = writeln!(s, "photon.enabled = true");
                let _ = writeln!(s, "photon.hbar_omega_eV = {}", p.photon_energy);
                let _ = writeln!(s, "photon.alpha_eV_per_m = {}", p.alpha_ev_per_m);
                match p.envelope_half_width {
                    None => {}
                    Some(None) => {
                        let _ = writeln!(s, "photon.envelope_half_width_nm = none");
                    }
                    Some(Some(l)) => {
                        let _ = writeln!(s, "photon.envelope_half_width_nm = {l}");
                    }
                }
                let _ = writeln!(s, "photon.n_q = {}", p.n_q);
                let _ = writeln!(s, "photon.q_sigmas = {}", p.q_sigmas);
            }
        }
        for (i, ev) in self.events.iter().enumerate() {
            let m = if ev.model == TransitionModel::A { "A" } else { "B" };
            let k = if ev.kind == TransitionKind::Absorption { "absorption" } else { "emission" };
            let _ = writeln!(s, "scattering.{i}.model = {m}");
            let _ = writeln!(s, "scattering.{i}.kind = {k}");
            let _ = writeln!(s, "scattering.{i}.t_s_fs = {}", ev.t_s);
            if let Some(e) = ev.e_gamma {
                let _ = writeln!(s, "scattering.{i}.E_gamma_eV = {e}");
            }
            if let Some(p) = ev.p_gamma {
                let _ = writeln!(s, "scattering.{i}.p_gamma = {p}");
            }
            let _ = writeln!(s, "scattering.{i}.N_ts = {}", ev.n_ts);
        }
        let solver = match self.run.solver {
            SolverKind::Single => "single",
            SolverKind::TwoChannel => "two_channel",
            SolverKind::Joint2D => "joint2d",
        };
        let r = &self.run;
        let _ = writeln!(s, "run.solver = {solver}");
        let _ = writeln!(s, "run.t_end_fs = {}", r.t_end);
        let _ = writeln!(s, "run.dt_fs = {}", r.dt);
        let _ = writeln!(s, "run.snapshot_every_fs = {}", r.snapshot_every);
        let _ = writeln!(s, "run.populations_every_fs = {}", r.populations_every);
        let _ = writeln!(s, "run.W = {}", r.w);
        let _ = writeln!(s, "run.overlay_W = {}", r.overlay_w);
        let _ = writeln!(s, "run.seed = {}", r.seed);
        let _ = writeln!(s, "run.absorber = {}", r.absorber);
        let _ = writeln!(s, "run.basis_E_min_eV = {}", r.basis_e_min);
        let _ = writeln!(s, "run.basis_E_max_eV = {}", r.basis_e_max);
        let _ = writeln!(s, "run.basis_dE_eV = {}", r.basis_de);
        if let Some(l) = r.ramo_length {
            let _ = writeln!(s, "run.ramo_length_nm = {l}");
        }
        if let Some(d) = &self.output_dir {
            let _ = writeln!(s, "output.dir = {}", d.display());
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let spec = ScenarioSpec::default();
        let again = ScenarioSpec::parse(&spec.to_text()).unwrap();
        assert_eq!(spec, again);
    }

    #[test]
    fn parses_events_and_symbols() {
        let text = "
            # RTD absorption
            packet.E_central_eV = E1
            scattering.model = A   # energy shift
            scattering.t_s_fs = 150
            scattering.E_gamma_eV = E2-E1
            scattering.1.model = B
            scattering.1.t_s_fs = 250
            scattering.1.E_gamma_eV = 0.186
        ";
        let s = ScenarioSpec::parse(text).unwrap();
        assert_eq!(s.packet.energy, EnergyValue::E1);
        assert_eq!(s.events.len(), 2);
        assert_eq!(s.events[0].e_gamma, Some(EnergyValue::E2MinusE1));
        assert_eq!(s.events[1].model, TransitionModel::B);
        assert_eq!(ScenarioSpec::parse(&s.to_text()).unwrap(), s);
    }

    #[test]
    fn unknown_key_names_key_and_line() {
        let err = ScenarioSpec::parse("grid.n_x = 11\n\nbogus.key = 3\n").unwrap_err();
        match err {
            Error::Parse { key, line, .. } => {
                assert_eq!(key, "bogus.key");
                assert_eq!(line, 3);
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn bad_number_is_a_parse_error() {
        assert!(matches!(
            ScenarioSpec::parse("run.dt_fs = fast"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn event_after_end_names_the_key() {
        let text = "run.t_end_fs = 100\nscattering.model = B\nscattering.t_s_fs = 150\nscattering.E_gamma_eV = 0.1\n";
        match ScenarioSpec::parse(text).unwrap_err() {
            Error::InvalidKey { key, .. } => assert_eq!(key, "scattering.t_s_fs"),
            e => panic!("{e}"),
        }
    }
}

use std::fs;
use std::path::{Path, PathBuf};

use bohmtrans::experiments::{builtin_names, builtin_scenarios, run_scenario, ScenarioSpec};
use bohmtrans::Error;

fn scratch(name: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("bohmtrans-exp-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&p);
    p
}

const SMALL_CAVITY: &str = "\
name = small_cavity
grid.x_min_nm = -150
grid.x_max_nm = 150
grid.n_x = 1201
potential.kind = double_barrier
packet.x0_nm = -60
packet.sigma_nm = 10
packet.E_central_eV = E2
photon.enabled = true
run.t_end_fs = 60
run.snapshot_every_fs = 20
run.W = 300
run.overlay_W = 4
";

fn parse(text: &str) -> ScenarioSpec {
    ScenarioSpec::parse(text).unwrap()
}

#[test]
fn free_packet_spreads_like_the_analytic_gaussian() {
    let spec = parse(
        "name = free
grid.x_min_nm = -250
grid.x_max_nm = 250
grid.n_x = 2001
potential.kind = flat
packet.x0_nm = -50
packet.sigma_nm = 10
packet.E_central_eV = 0.05
run.t_end_fs = 100
run.W = 200
",
    );
    let o = run_scenario(&spec, None).unwrap();
    let psi = &o.final_state.psi_a;
    let pre = o.constants.kinetic_prefactor();
    let hbar = o.constants.hbar;
    let t = 100.0;
    let mean = psi.mean_position();
    let var = psi
        .density()
        .iter()
        .enumerate()
        .map(|(i, d)| d * (psi.grid.x(i) - mean).powi(2))
        .sum::<f64>()
        / psi.density().iter().sum::<f64>();
    let sigma_t = 10.0 * (1.0 + (pre * t / (hbar * 100.0)).powi(2)).sqrt();
    let v = 2.0 * pre * (0.05 / pre).sqrt() / hbar;
    assert!((var.sqrt() / sigma_t - 1.0).abs() < 0.01, "width {} vs {sigma_t}", var.sqrt());
    assert!((mean - (-50.0 + v * t)).abs() < 0.5, "mean {mean} vs {}", -50.0 + v * t);
    assert!((o.norm_final - 1.0).abs() < 1e-9);
    assert!(o.ks_max() < o.ks_bound());
}

#[test]
fn populations_close_and_presence_integrates_to_norm() {
    let dir = scratch("closure");
    let o = run_scenario(&parse(SMALL_CAVITY), Some(&dir)).unwrap();
    let p = o.populations.as_ref().unwrap();
    assert!(p.len() > 50);
    for i in 0..p.len() {
        if p.weight[i] > 1e-6 {
            let s = p.p_a1[i] + p.p_a2[i] + p.p_b1[i] + p.p_b2[i];
            assert!((s - 1.0).abs() < 1e-6, "t = {}: sum {s}", p.t[i]);
        }
    }
    for n in 0..4 {
        let f = dir.join(format!("presence_{n:04}.csv"));
        let text = fs::read_to_string(&f).unwrap();
        let rows: Vec<(f64, f64)> = text
            .lines()
            .skip(1)
            .map(|l| {
                let mut c = l.split(',').map(|v| v.parse::<f64>().unwrap());
                (c.next().unwrap(), c.next().unwrap())
            })
            .collect();
        let dx = rows[1].0 - rows[0].0;
        let integral: f64 = rows.iter().map(|r| r.1).sum::<f64>() * dx;
        assert!((integral - 1.0).abs() < 1e-6, "{}: {integral}", f.display());
    }
    let _ = fs::remove_dir_all(&dir);
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let spec = parse(SMALL_CAVITY);
    let (a, b) = (scratch("threads1"), scratch("threads3"));
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    one.install(|| run_scenario(&spec, Some(&a))).unwrap();
    three.install(|| run_scenario(&spec, Some(&b))).unwrap();
    let (fa, fb) = (files(&a), files(&b));
    assert_eq!(fa.len(), fb.len());
    for ((na, da), (nb, db)) in fa.iter().zip(&fb) {
        assert_eq!(na, nb);
        assert!(da == db, "{na} differs between thread counts");
    }
    let _ = fs::remove_dir_all(&a);
    let _ = fs::remove_dir_all(&b);
}

#[test]
fn output_layout() {
    let dir = scratch("layout");
    run_scenario(&parse(SMALL_CAVITY), Some(&dir)).unwrap();
    for f in [
        "scenario.txt",
        "spectrum.csv",
        "summary.txt",
        "populations.csv",
        "snapshot_0000.csv",
        "presence_0003.csv",
        "equivariance.csv",
        "current.csv",
        "trajectories.csv",
        "trajectories_overlay.csv",
    ] {
        assert!(dir.join(f).is_file(), "missing {f}");
    }
    let summary = fs::read_to_string(dir.join("summary.txt")).unwrap();
    assert!(summary.contains("status = ok"));
    let header = fs::read_to_string(dir.join("populations.csv")).unwrap();
    assert!(header.starts_with("t_fs,P_A1,P_A2,P_B1,P_B2,N_active,norm_B\n"));
    // the written scenario reproduces the spec
    let back = ScenarioSpec::parse(&fs::read_to_string(dir.join("scenario.txt")).unwrap()).unwrap();
    assert_eq!(back, parse(SMALL_CAVITY));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn failed_transition_is_reported_with_its_stage() {
    let dir = scratch("failed");
    let spec = parse(
        "name = failing
packet.x0_nm = -100
packet.sigma_nm = 30
packet.E_central_eV = E1
run.t_end_fs = 40
run.W = 100
scattering.model = A
scattering.kind = emission
scattering.t_s_fs = 10
scattering.E_gamma_eV = 0.3
",
    );
    let err = run_scenario(&spec, Some(&dir)).unwrap_err();
    match &err {
        Error::Stage { stage, source } => {
            assert_eq!(stage, "scattering event 0");
            assert!(matches!(**source, Error::FailedTransition { .. }), "{source}");
        }
        e => panic!("unexpected error {e}"),
    }
    let summary = fs::read_to_string(dir.join("summary.txt")).unwrap();
    assert!(summary.contains("status = failed"));
    assert!(summary.contains("partial_outputs = true"));
    assert!(dir.join("spectrum.csv").is_file());
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn parse_errors_name_key_and_line() {
    let e = ScenarioSpec::parse("name = x\n\n# comment\nrun.dt_fs = fast\n").unwrap_err();
    match e {
        Error::Parse { key, line, .. } => {
            assert_eq!(key, "run.dt_fs");
            assert_eq!(line, 4);
        }
        e => panic!("unexpected {e}"),
    }
    let e = ScenarioSpec::parse("packet.colour = red\n").unwrap_err();
    assert!(e.to_string().contains("packet.colour"), "{e}");
    let e = ScenarioSpec::parse("run.t_end_fs = 10\nscattering.model = B\nscattering.t_s_fs = 20\nscattering.E_gamma_eV = 0.1\n")
        .unwrap_err();
    assert!(e.to_string().contains("scattering.t_s_fs"), "{e}");
}

#[test]
fn builtins_validate() {
    for name in builtin_names() {
        for spec in builtin_scenarios(name).unwrap() {
            spec.validate().unwrap();
        }
    }
    assert!(builtin_scenarios("fig99").is_err());
}

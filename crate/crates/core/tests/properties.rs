use bohmtrans::bohmian::{quantile_map, sample_quantum_equilibrium, GridCdf};
use bohmtrans::evolution::{CouplingParams, Propagator1D, TwoChannelState, TwoChannelStepper};
use bohmtrans::experiments::{EnergyValue, EventSpec, ScenarioSpec};
use bohmtrans::grid_potential::{
    build_double_barrier, build_gaussian_packet, ComplexField1D, Direction, PhysicalConstants, PotentialProfile,
    SpatialGrid,
};
use bohmtrans::scattering::{apply_phase_ramp, shift_coefficients, TransitionKind, TransitionModel};
use bohmtrans::spectral::{project_energy, solve_scattering_state, EnergyBasis, Injection, ProjectionRegion};
use proptest::prelude::*;
use std::sync::OnceLock;

fn small_grid() -> SpatialGrid {
    SpatialGrid::new(-100.0, 100.0, 801).unwrap()
}

fn rtd(grid: SpatialGrid) -> PotentialProfile {
    build_double_barrier(grid, 10.0, 2.0, 0.5).unwrap()
}

fn small_basis() -> &'static (PotentialProfile, EnergyBasis) {
    static B: OnceLock<(PotentialProfile, EnergyBasis)> = OnceLock::new();
    B.get_or_init(|| {
        let v = rtd(small_grid());
        let b = EnergyBasis::build(&v, &PhysicalConstants::default(), 0.01, 0.6, 0.01).unwrap();
        (v, b)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn crank_nicolson_preserves_norm(x0 in -70.0..-30.0f64, sigma in 3.0..8.0f64, e in 0.01..0.8f64, dt in 0.02..1.0f64) {
        let k = PhysicalConstants::default();
        let v = rtd(small_grid());
        let mut psi = build_gaussian_packet(v.grid, &k, x0, sigma, e, Direction::LeftToRight, None).unwrap();
        let p = Propagator1D::new(&v, &k, dt, None).unwrap();
        for _ in 0..200 {
            p.step(&mut psi);
        }
        prop_assert!((psi.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn two_channel_preserves_norm(alpha in 0.0..5e8f64, hw in 0.05..0.4f64, split in 0.0..1.0f64) {
        let k = PhysicalConstants::default();
        let v = rtd(small_grid());
        let a = build_gaussian_packet(v.grid, &k, -50.0, 5.0, 0.2, Direction::LeftToRight, None).unwrap();
        let b = build_gaussian_packet(v.grid, &k, 40.0, 6.0, 0.1, Direction::RightToLeft, None).unwrap();
        let (ca, cb) = (split.sqrt(), (1.0 - split).sqrt());
        let mut st = TwoChannelState::new(
            ComplexField1D::from_values(v.grid, a.values.iter().map(|z| z * ca).collect()).unwrap(),
            ComplexField1D::from_values(v.grid, b.values.iter().map(|z| z * cb).collect()).unwrap(),
            0.0,
        ).unwrap();
        let c = CouplingParams::from_si_alpha(alpha, hw, &k, Some(7.0)).unwrap();
        let s = TwoChannelStepper::new(&v, &k, &c, 0.1, None).unwrap();
        let n0 = st.norm_sqr();
        for _ in 0..300 {
            s.step(&mut st);
        }
        prop_assert!((st.norm_sqr() - n0).abs() < 1e-10);
    }

    #[test]
    fn transmission_plus_reflection_is_one(e in 0.001..2.0f64, height in -0.3..1.0f64, from_left in any::<bool>()) {
        let k = PhysicalConstants::default();
        let v = build_double_barrier(SpatialGrid::new(-60.0, 60.0, 481).unwrap(), 8.0, 3.0, height).unwrap();
        let dir = if from_left { Injection::FromLeft } else { Injection::FromRight };
        let s = solve_scattering_state(&v, &k, e, dir).unwrap();
        prop_assert!((s.transmission + s.reflection - 1.0).abs() < 1e-9);
        prop_assert!(s.transmission >= 0.0 && s.reflection >= 0.0);
    }

    #[test]
    fn cdf_and_quantile_are_inverse(c1 in -30.0..30.0f64, c2 in -30.0..30.0f64, w in 1.0..10.0f64, u in 0.001..0.999f64) {
        let grid = SpatialGrid::new(-50.0, 50.0, 1001).unwrap();
        let d: Vec<f64> = grid.points().iter()
            .map(|x| (-(x - c1).powi(2) / (w * w)).exp() + 0.5 * (-(x - c2).powi(2) / (w * w)).exp())
            .collect();
        let cdf = GridCdf::new(&d, &grid).unwrap();
        prop_assert!((cdf.cdf(cdf.quantile(u)) - u).abs() < 1e-9);
    }

    #[test]
    fn quantile_map_is_monotone(c1 in -20.0..20.0f64, c2 in -20.0..20.0f64, w1 in 1.0..8.0f64, w2 in 1.0..8.0f64, seed in any::<u64>()) {
        let grid = SpatialGrid::new(-50.0, 50.0, 1001).unwrap();
        let g = |c: f64, w: f64| grid.points().iter().map(|x| (-(x - c).powi(2) / (w * w)).exp()).collect::<Vec<f64>>();
        let (da, db) = (g(c1, w1), g(c2, w2));
        let (fa, fb) = (GridCdf::new(&da, &grid).unwrap(), GridCdf::new(&db, &grid).unwrap());
        let mut xs = sample_quantum_equilibrium(&da, &grid, 200, seed).unwrap();
        xs.sort_by(f64::total_cmp);
        let ys = quantile_map(&xs, &fa, &fb);
        prop_assert!(ys.windows(2).all(|p| p[0] <= p[1] + 1e-12));
        for (x, y) in xs.iter().zip(&ys) {
            prop_assert!((fb.cdf(*y) - fa.cdf(*x)).abs() < 1e-9);
        }
    }

    #[test]
    fn sampling_is_seed_deterministic(seed in any::<u64>()) {
        let grid = small_grid();
        let d: Vec<f64> = grid.points().iter().map(|x| (-(x + 20.0).powi(2) / 50.0).exp()).collect();
        let a = sample_quantum_equilibrium(&d, &grid, 100, seed).unwrap();
        let b = sample_quantum_equilibrium(&d, &grid, 100, seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.iter().all(|x| grid.contains(*x)));
    }

    #[test]
    fn phase_ramp_keeps_density(kg in -2.0..2.0f64, x0 in -60.0..60.0f64) {
        let k = PhysicalConstants::default();
        let psi = build_gaussian_packet(small_grid(), &k, x0, 5.0, 0.1, Direction::LeftToRight, None).unwrap();
        let out = apply_phase_ramp(&psi, kg);
        for (a, b) in psi.values.iter().zip(&out.values) {
            prop_assert!((a.norm_sqr() - b.norm_sqr()).abs() < 1e-14);
        }
    }

    #[test]
    fn energy_shift_by_whole_bins(bins in -5i32..=5, x0 in -70.0..-40.0f64, e in 0.15..0.4f64) {
        let (v, basis) = small_basis();
        let k = PhysicalConstants::default();
        let psi = build_gaussian_packet(v.grid, &k, x0, 8.0, e, Direction::LeftToRight, None).unwrap();
        let c = project_energy(&psi, basis, ProjectionRegion::WholeGrid).unwrap();
        let (zero, leaked0) = shift_coefficients(&c, basis, 0.0);
        prop_assert!(leaked0 == 0.0);
        for (a, b) in c.c.iter().zip(&zero.c) {
            prop_assert!((a - b).norm() < 1e-14);
        }
        let de = bins as f64 * basis.de;
        let (shifted, leaked) = shift_coefficients(&c, basis, de);
        prop_assert!((shifted.total_weight() / c.total_weight() + leaked - 1.0).abs() < 1e-9);
        let n = basis.per_branch() as i32;
        for j in 0..n {
            let src = j - bins;
            if (0..n).contains(&src) {
                let a = shifted.c[basis.index(false, j as usize)];
                let b = c.c[basis.index(false, src as usize)];
                prop_assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn config_round_trips(
        x0 in -200.0..-50.0f64,
        sigma in 1.0..40.0f64,
        e in prop_oneof![Just(EnergyValue::E1), Just(EnergyValue::E2), (0.01..1.0f64).prop_map(EnergyValue::Literal)],
        photon in any::<bool>(),
        t_s in 1.0..200.0f64,
        seed in any::<u64>(),
        w in 1usize..5000,
    ) {
        let mut s = ScenarioSpec::default();
        s.packet.x0 = x0;
        s.packet.sigma = sigma;
        s.packet.energy = e;
        s.run.seed = seed;
        s.run.w = w;
        if photon {
            s.photon = Some(Default::default());
            s.run.solver = bohmtrans::experiments::SolverKind::TwoChannel;
        } else {
            s.events.push(EventSpec {
                model: TransitionModel::A,
                kind: TransitionKind::Emission,
                t_s,
                e_gamma: Some(EnergyValue::Literal(0.05)),
                p_gamma: None,
                n_ts: 1,
            });
        }
        let back = ScenarioSpec::parse(&s.to_text()).unwrap();
        prop_assert_eq!(back, s);
    }
}


use qsl::lambda3::{self, ControlLaw};
use qsl::ode::{self, IntegratorConfig};
use qsl::shooting::{self, ShotConfig, ShotOutcome};
use qsl::Error;

fn upper_event(target: f64) -> impl FnMut(f64, &[f64; 4]) -> f64 {
    move |_, y| lambda3::cartesian_from_angles(&lambda3::split_extended(y).0).upper_weight() - target
}

#[test]
fn target_events_on_the_optimal_flow() {
    let cfg = ShotConfig::new(0.002);
    let rhs = |_: f64, y: &[f64; 4]| lambda3::extremal_rhs(ControlLaw::TimeOptimal { omega0: 1.0 }, y);
    let y0 = [0.0, 0.0, 1.85, 0.45266];
    let x3_hit = shooting::integrate_to_target(
        ControlLaw::TimeOptimal { omega0: 1.0 },
        lambda3::Costate3 {
            l_phi: 1.85,
            l_theta: 0.45266,
        },
        cfg.target(),
        cfg.horizon,
        &cfg.integrator,
    )
    .unwrap()
    .unwrap();
    assert!((x3_hit.t - 7.40).abs() < 0.02);
    // the full upper weight y2^2 + x3^2 reaches the same level earlier
    let both = ode::locate_event(rhs, y0, (0.0, 15.0), upper_event(cfg.target()), &cfg.integrator)
        .unwrap()
        .unwrap();
    assert!((both.t - 7.0732).abs() < 1e-3, "{}", both.t);
    assert!(both.t < x3_hit.t);
}

#[test]
fn terminal_state_of_successful_shots() {
    for (eps, lp, lt) in [
        (0.002, 1.85, 0.45),
        (0.005, 1.0, 0.3),
        (0.05, 2.0, 1.5),
        (0.002, -1.0, 2.0),
    ] {
        let cfg = ShotConfig::new(eps);
        let Ok(opt) = shooting::extremal(lp, lt, &cfg) else {
            continue;
        };
        let (_, y) = opt.trajectory.last();
        let s = lambda3::cartesian_from_angles(&lambda3::split_extended(&y).0);
        assert!((s.x3 * s.x3 - cfg.target()).abs() < 1e-8, "{eps} {lp} {lt}");
        if (lp, lt) == (1.85, 0.45) {
            assert!(s.y2 * s.y2 < s.x3 * s.x3);
        }
    }
}

#[test]
fn refine_beats_its_basin_on_the_grid() {
    let cfg = ShotConfig::new(0.005);
    let axis = shooting::linspace(0.0, 1.5, 31);
    let grid = shooting::landscape(&[1.85], &axis, &cfg).unwrap();
    let (_, j, t_grid) = grid.min().unwrap();
    let opt = shooting::refine(1.85, axis[j], &cfg).unwrap();
    assert!(
        opt.t_min <= t_grid + cfg.integrator.event_tol,
        "{} vs {t_grid}",
        opt.t_min
    );
}

#[test]
fn refine_is_a_fixed_point_and_scale_free() {
    let cfg = ShotConfig::new(0.002);
    let opt = shooting::refine(1.85, 0.5, &cfg).unwrap();
    let again = shooting::refine(1.85, opt.l_theta, &cfg).unwrap();
    assert!((again.l_theta - opt.l_theta).abs() < 1e-5);
    assert!((again.t_min - opt.t_min).abs() < 1e-8);

    let ratio = opt.l_theta / opt.l_phi;
    for lp in [1.0, 2.5] {
        let other = shooting::refine(lp, ratio * lp, &cfg).unwrap();
        assert!((other.t_min - opt.t_min).abs() < 1e-3);
    }
    let two_d = shooting::refine_2d(1.85, 0.45, &cfg).unwrap();
    assert!((two_d.t_min - opt.t_min).abs() < 1e-3);
}

#[test]
fn refine_from_a_miss_far_from_any_hit() {
    let cfg = ShotConfig {
        horizon: 2.0,
        ..ShotConfig::new(0.002)
    };
    assert_eq!(shooting::refine(1.85, 0.5, &cfg).unwrap_err(), Error::NoHit);
    assert_eq!(
        shooting::shoot(1.85, 0.5, &cfg).unwrap(),
        ShotOutcome::NoHit(shooting::NoHitReason::Horizon)
    );
}

#[test]
fn landscape_serial_equals_parallel() {
    let cfg = ShotConfig::new(0.01);
    let lp = shooting::linspace(-3.0, 3.0, 9);
    let lt = shooting::linspace(-2.0, 2.0, 7);
    let a = shooting::landscape(&lp, &lt, &cfg).unwrap();
    let b = shooting::landscape_serial(&lp, &lt, &cfg).unwrap();
    assert_eq!(a.times.len(), 63);
    for (x, y) in a.times.iter().zip(&b.times) {
        assert!(x.to_bits() == y.to_bits());
    }
    assert!(a
        .times
        .iter()
        .filter(|t| t.is_finite())
        .all(|&t| t > 0.0 && t <= cfg.horizon));
}

#[test]
fn area_curve_is_decreasing() {
    let eps = [0.05, 0.002, 0.005, 0.02];
    let curve = shooting::area_curve(&eps, 1.85, &ShotConfig::new(0.002)).unwrap();
    let sorted: Vec<f64> = curve.iter().map(|p| p.eps).collect();
    assert_eq!(sorted, vec![0.002, 0.005, 0.02, 0.05]);
    assert!(curve.windows(2).all(|w| w[0].a_min > w[1].a_min));
    assert!((curve[0].a_min - 7.40).abs() < 0.02);
    assert!((curve[1].a_min - 6.78).abs() < 0.05);
}

#[test]
fn energy_optimum_scaling() {
    let cfg = ShotConfig::new(0.002);
    let e10 = shooting::energy_optimum3(10.0, 1.85, 0.45, &cfg).unwrap();
    let e20 = shooting::energy_optimum3(20.0, 1.85, 0.45, &cfg).unwrap();
    assert!((e10.omega0_min - 0.740).abs() < 2e-3);
    assert!((e10.e_min - 5.48).abs() < 0.02);
    assert!((e20.e_min - 0.5 * e10.e_min).abs() < 1e-12);
    assert!(shooting::energy_optimum3(0.0, 1.85, 0.45, &cfg).is_err());
}

#[test]
fn halving_max_step_keeps_hit_times() {
    let cfg = ShotConfig::new(0.002);
    let fine = ShotConfig {
        integrator: IntegratorConfig {
            max_step: 0.5e-2,
            ..cfg.integrator
        },
        ..cfg
    };
    for (lp, lt) in [(1.85, 0.45266), (1.0, 0.1), (2.0, 2.5)] {
        let (a, b) = (
            shooting::shoot(lp, lt, &cfg).unwrap().time(),
            shooting::shoot(lp, lt, &fine).unwrap().time(),
        );
        match (a, b) {
            (Some(a), Some(b)) => assert!((a - b).abs() < 10.0 * cfg.integrator.event_tol, "{a} {b}"),
            (None, None) => {}
            other => panic!("{other:?}"),
        }
    }
}

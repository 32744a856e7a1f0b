use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uav_llt::kinematics::{CurveTrajectory, Direction, Position, StraightTrajectory, Trajectory};
use uav_llt::llt::{compute_llt, squared_link_distance, LinkCase, TAYLOR_DEGREE};
use uav_llt::oracle::brute_force_llt;
use uav_llt::validate::{
    form_equivalence_error, random_instance, taylor_window_error, trial_rng, CaseFilter,
    InstanceRanges,
};

fn curve_at(rng: &mut ChaCha8Rng, cx: f64, cy: f64, epoch: f64) -> Trajectory {
    let dir = if rng.gen_bool(0.5) {
        Direction::Clockwise
    } else {
        Direction::CounterClockwise
    };
    let c = CurveTrajectory::new(
        cx,
        cy,
        rng.gen_range(100.0..1000.0),
        rng.gen_range(20.0..60.0),
        dir,
        rng.gen_range(-PI..PI),
        100.0,
    )
    .unwrap();
    Trajectory::curve(c, epoch)
}

fn straight_at(rng: &mut ChaCha8Rng, epoch: f64) -> Trajectory {
    let s = StraightTrajectory::new(
        rng.gen_range(-2000.0..2000.0),
        rng.gen_range(-2000.0..2000.0),
        rng.gen_range(0.0..2.0 * PI),
        rng.gen_range(20.0..60.0),
        110.0,
    )
    .unwrap();
    Trajectory::straight(s, epoch)
}

fn samples() -> Vec<f64> {
    (0..100).map(|k| k as f64 * 1.7).collect()
}

#[test]
fn closed_form_matches_positions_for_every_case() {
    let ranges = InstanceRanges::default();
    for case in CaseFilter::ALL {
        for i in 0..300 {
            let inst = random_instance(case, &mut trial_rng(11, case, i), &ranges);
            let d = squared_link_distance(&inst.a, &inst.b);
            for t in samples() {
                let p = inst
                    .a
                    .position_at(t)
                    .planar_distance_sq(&inst.b.position_at(t));
                let scale = uav_llt::validate::term_scale(&d, t);
                assert!(
                    (d.eval(t) - p).abs() <= 1e-9 * scale,
                    "{case:?} #{i} t={t}: {} vs {p}",
                    d.eval(t)
                );
            }
        }
    }
}

#[test]
fn closed_form_handles_different_epochs() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let (ea, eb) = (rng.gen_range(0.0..50.0), rng.gen_range(0.0..50.0));
        let a = curve_at(&mut rng, 0.0, 0.0, ea);
        let b = straight_at(&mut rng, eb);
        let d = squared_link_distance(&a, &b);
        assert!(matches!(d.case, LinkCase::B { .. }));
        for t in samples() {
            let abs = d.epoch + t;
            let p = a
                .position_at_time(abs)
                .planar_distance_sq(&b.position_at_time(abs));
            assert!((d.eval(t) - p).abs() <= 1e-9 * uav_llt::validate::term_scale(&d, t));
        }
    }
}

#[test]
fn sign_alpha_form_matches_direct_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let offsets = [
        (1.0, 1.0),
        (-1.0, 1.0),
        (1.0, -1.0),
        (-1.0, -1.0),
        (0.0, 1.0),
        (1.0, 0.0),
        (0.0, -1.0),
        (-1.0, 0.0),
        (0.0, 0.0),
    ];
    for (sx, sy) in offsets {
        for _ in 0..25 {
            let (a, b) = (
                sx * rng.gen_range(10.0..3000.0),
                sy * rng.gen_range(10.0..3000.0),
            );
            let c1 = curve_at(&mut rng, a, b, 0.0);
            let c2 = curve_at(&mut rng, 0.0, 0.0, 0.0);
            let err = form_equivalence_error(&c1, &c2, &samples());
            assert!(err <= 1e-9, "curves, offset signs ({sx}, {sy}): {err}");

            // a straight flyer placed so its offset to the center has the same signs
            let p = Position::new(a, b, 110.0);
            let s = StraightTrajectory::new(p.x, p.y, rng.gen_range(0.0..6.0), 30.0, p.z).unwrap();
            let s = Trajectory::straight(s, 0.0);
            for (x, y) in [(&c2, &s), (&s, &c2)] {
                let err = form_equivalence_error(x, y, &samples());
                assert!(
                    err <= 1e-9,
                    "curve/straight, offset signs ({sx}, {sy}): {err}"
                );
            }
        }
    }
}

#[test]
fn taylor_expansion_holds_across_the_trust_window() {
    let ranges = InstanceRanges::default();
    for case in [CaseFilter::A, CaseFilter::B] {
        for i in 0..200 {
            let inst = random_instance(case, &mut trial_rng(21, case, i), &ranges);
            let err = taylor_window_error(&inst.a, &inst.b, TAYLOR_DEGREE, 200);
            assert!(err <= 1e-6, "{case:?} #{i}: {err}");
        }
    }
}

#[test]
fn analytic_lifetime_agrees_with_brute_force() {
    let ranges = InstanceRanges::default();
    let horizon = 120.0;
    let dt = 1e-3;
    for case in CaseFilter::ALL {
        for i in 0..40 {
            let inst = random_instance(case, &mut trial_rng(31, case, i), &ranges);
            let got = compute_llt(&inst.a, &inst.b, inst.range, horizon)
                .unwrap()
                .llt;
            let want = brute_force_llt(&inst.a, &inst.b, inst.range, dt, horizon).unwrap();
            match (got.finite(), want.finite()) {
                (Some(x), Some(y)) => {
                    assert!(
                        (x - y).abs() <= (2.0 * dt).max(1e-3 * y),
                        "{case:?} #{i}: {x} vs {y}"
                    )
                }
                (None, None) => {}
                (Some(t), None) | (None, Some(t)) => {
                    assert!(
                        horizon - t <= 2.0 * dt,
                        "{case:?} #{i}: verdicts differ at {t}"
                    )
                }
            }
        }
    }
}

#[test]
fn straight_pair_example() {
    let a = Trajectory::straight(
        StraightTrajectory::new(0.0, 0.0, 0.0, 20.0, 100.0).unwrap(),
        0.0,
    );
    let b = Trajectory::straight(
        StraightTrajectory::new(50.0, 0.0, 0.0, 30.0, 110.0).unwrap(),
        0.0,
    );
    let r = compute_llt(&a, &b, 100.0, 3600.0).unwrap();
    assert_eq!(r.case_used, LinkCase::C);
    assert!((r.llt.finite().unwrap() - 5.0).abs() < 1e-9);
    let oracle = brute_force_llt(&a, &b, 100.0, 1e-3, 3600.0).unwrap();
    assert!((oracle.finite().unwrap() - 5.0).abs() < 1e-6);
}

//! Smooth-Turn mobility with a buffer boundary.
//!
//! Each UAV alternates between circular turns and straight legs. At every
//! change it keeps its exact position and heading: a new turn center sits on
//! the normal to the current velocity, on the side of the chosen direction.
//! Opposite turns are separated by at least one straight leg. Candidate
//! trajectories are rejection-sampled so that the path over the coming Wait
//! Time stays inside the arena and ends in a state from which a minimum-radius
//! circle still fits; that guarantees a compliant fallback always exists.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::{
    initial_phase, CurveTrajectory, Direction, MovementState, Path, Position, StraightTrajectory,
    Trajectory,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MobilityError {
    #[error("invalid mobility configuration: {0}")]
    Config(String),
    #[error("no boundary-compliant trajectory for UAV {id} at t = {time}")]
    ResampleExhausted { id: u32, time: f64 },
}

/// Containment margin kept from the arena edge, absorbing roundoff in the
/// anchor positions.
const EDGE_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arena {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub buffer_width: f64,
}

impl Arena {
    pub fn validate(&self) -> Result<(), MobilityError> {
        let vals = [
            self.x_min,
            self.x_max,
            self.y_min,
            self.y_max,
            self.buffer_width,
        ];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(MobilityError::Config("arena bounds must be finite".into()));
        }
        if !(self.buffer_width > 0.0) {
            return Err(MobilityError::Config(
                "buffer_width must be positive".into(),
            ));
        }
        if !(self.x_max - self.x_min > 2.0 * self.buffer_width
            && self.y_max - self.y_min > 2.0 * self.buffer_width)
        {
            return Err(MobilityError::Config("arena inner region is empty".into()));
        }
        Ok(())
    }

    pub fn contains(&self, p: &Position) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    /// Inside the arena minus the buffer strip.
    pub fn in_inner(&self, p: &Position) -> bool {
        p.x >= self.x_min + self.buffer_width
            && p.x <= self.x_max - self.buffer_width
            && p.y >= self.y_min + self.buffer_width
            && p.y <= self.y_max - self.buffer_width
    }

    /// How far a point sits outside the inner region (0 inside it).
    pub fn buffer_depth(&self, p: &Position) -> f64 {
        let dx = (self.x_min + self.buffer_width - p.x)
            .max(p.x - (self.x_max - self.buffer_width))
            .max(0.0);
        let dy = (self.y_min + self.buffer_width - p.y)
            .max(p.y - (self.y_max - self.buffer_width))
            .max(0.0);
        dx.hypot(dy)
    }

    fn box_fits(&self, lo_x: f64, hi_x: f64, lo_y: f64, hi_y: f64, margin: f64) -> bool {
        lo_x >= self.x_min + margin
            && hi_x <= self.x_max - margin
            && lo_y >= self.y_min + margin
            && hi_y <= self.y_max - margin
    }

    fn circle_fits(&self, cx: f64, cy: f64, r: f64, margin: f64) -> bool {
        self.box_fits(cx - r, cx + r, cy - r, cy + r, margin)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobilityConfig {
    pub speed: (f64, f64),
    pub radius: (f64, f64),
    pub wait: (f64, f64),
    /// Draw a fresh speed at every change instead of keeping the UAV's speed.
    pub resample_speed: bool,
    pub max_attempts: usize,
}

impl Default for MobilityConfig {
    fn default() -> Self {
        Self {
            speed: (20.0, 60.0),
            radius: (100.0, 1000.0),
            wait: (5.0, 30.0),
            resample_speed: false,
            max_attempts: 64,
        }
    }
}

impl MobilityConfig {
    pub fn validate(&self) -> Result<(), MobilityError> {
        for (name, (lo, hi)) in [
            ("speed", self.speed),
            ("radius", self.radius),
            ("wait", self.wait),
        ] {
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(MobilityError::Config(format!(
                    "{name} range must be finite"
                )));
            }
            if lo > hi {
                return Err(MobilityError::Config(format!(
                    "{name}_min exceeds {name}_max"
                )));
            }
            if !(lo > 0.0) {
                return Err(MobilityError::Config(format!(
                    "{name} range must be positive"
                )));
            }
        }
        if self.max_attempts == 0 {
            return Err(MobilityError::Config(
                "max_attempts must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn validate_for(&self, arena: &Arena) -> Result<(), MobilityError> {
        self.validate()?;
        arena.validate()?;
        let need = 2.0 * self.radius.0 + 4.0 * EDGE_MARGIN;
        if arena.x_max - arena.x_min <= need || arena.y_max - arena.y_min <= need {
            return Err(MobilityError::Config(
                "arena too small for the minimum turn radius".into(),
            ));
        }
        Ok(())
    }
}

/// One UAV's mobility state. Speed and altitude live in the trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UavState {
    pub id: u32,
    pub trajectory: Trajectory,
    pub next_change_at: f64,
}

impl UavState {
    pub fn speed(&self) -> f64 {
        self.trajectory.speed()
    }

    pub fn altitude(&self) -> f64 {
        self.trajectory.altitude()
    }

    pub fn position_at_time(&self, time: f64) -> Position {
        self.trajectory.position_at_time(time)
    }
}

fn uniform(rng: &mut impl Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo >= hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

pub fn sample_wait_time(rng: &mut impl Rng, cfg: &MobilityConfig) -> f64 {
    uniform(rng, cfg.wait)
}

/// Clockwise and counter-clockwise turns may not follow each other directly.
pub fn is_legal_transition(from: MovementState, to: MovementState) -> bool {
    !matches!(
        (from, to),
        (MovementState::Clockwise, MovementState::CounterClockwise)
            | (MovementState::CounterClockwise, MovementState::Clockwise)
    )
}

fn legal_successors(from: MovementState) -> Vec<MovementState> {
    [
        MovementState::Clockwise,
        MovementState::CounterClockwise,
        MovementState::Straight,
    ]
    .into_iter()
    .filter(|&s| is_legal_transition(from, s))
    .collect()
}

/// Center of the turn tangent to `heading` at `p`.
fn turn_center(p: Position, heading: f64, direction: Direction, radius: f64) -> (f64, f64) {
    // left normal for counter-clockwise, right normal for clockwise
    let normal = heading + direction.sign() * FRAC_PI_2;
    (p.x + radius * normal.cos(), p.y + radius * normal.sin())
}

/// Trajectory leaving `p` along `heading`, anchored at absolute time `now`.
pub fn tangent_trajectory(
    p: Position,
    heading: f64,
    state: MovementState,
    radius: f64,
    speed: f64,
    now: f64,
) -> Trajectory {
    match state.turn() {
        Some(direction) => {
            let (cx, cy) = turn_center(p, heading, direction, radius);
            let phase = initial_phase(cx, cy, p).expect("radius is positive");
            let c = CurveTrajectory::new(cx, cy, radius, speed, direction, phase, p.z)
                .expect("turn parameters validated by config");
            Trajectory::curve(c, now)
        }
        None => {
            let s = StraightTrajectory::new(p.x, p.y, heading, speed, p.z)
                .expect("straight parameters are valid");
            Trajectory::straight(s, now)
        }
    }
}

/// Whether the path over `[0, duration]` after the epoch stays inside the
/// arena, `margin` meters from every edge.
pub fn path_within(arena: &Arena, traj: &Trajectory, duration: f64, margin: f64) -> bool {
    match &traj.path {
        Path::Straight(_) => {
            let a = traj.position_at(0.0);
            let b = traj.position_at(duration);
            arena.box_fits(
                a.x.min(b.x),
                a.x.max(b.x),
                a.y.min(b.y),
                a.y.max(b.y),
                margin,
            )
        }
        Path::Curve(c) => {
            let sweep = c.angular_velocity() * duration;
            if sweep.abs() >= TAU {
                return arena.circle_fits(c.center_x, c.center_y, c.radius, margin);
            }
            let a = traj.position_at(0.0);
            let b = traj.position_at(duration);
            let (mut lo_x, mut hi_x) = (a.x.min(b.x), a.x.max(b.x));
            let (mut lo_y, mut hi_y) = (a.y.min(b.y), a.y.max(b.y));
            let start = c.initial_phase.min(c.initial_phase + sweep);
            let end = c.initial_phase.max(c.initial_phase + sweep);
            let covers = |angle: f64| {
                let k = ((start - angle) / TAU).ceil();
                angle + k * TAU <= end
            };
            if covers(0.0) {
                hi_x = c.center_x + c.radius;
            }
            if covers(PI) {
                lo_x = c.center_x - c.radius;
            }
            if covers(FRAC_PI_2) {
                hi_y = c.center_y + c.radius;
            }
            if covers(-FRAC_PI_2) {
                lo_y = c.center_y - c.radius;
            }
            arena.box_fits(lo_x, hi_x, lo_y, hi_y, margin)
        }
    }
}

/// A state is recoverable when a legal minimum-radius turn from it fits.
fn recoverable(
    arena: &Arena,
    p: Position,
    heading: f64,
    state: MovementState,
    r_min: f64,
    margin: f64,
) -> bool {
    legal_successors(state)
        .into_iter()
        .filter_map(MovementState::turn)
        .any(|d| {
            let (cx, cy) = turn_center(p, heading, d, r_min);
            arena.circle_fits(cx, cy, r_min, margin)
        })
}

fn compliant(
    arena: &Arena,
    cfg: &MobilityConfig,
    cand: &Trajectory,
    wait: f64,
    start_depth: Option<f64>,
) -> bool {
    if !path_within(arena, cand, wait, EDGE_MARGIN) {
        return false;
    }
    let end = cand.position_at(wait);
    if !recoverable(
        arena,
        end,
        cand.heading_at(wait),
        cand.movement_state(),
        cfg.radius.0,
        2.0 * EDGE_MARGIN,
    ) {
        return false;
    }
    // Starting inside the buffer strip: the path must not end deeper in it.
    match start_depth {
        Some(depth) => arena.buffer_depth(&end) <= depth,
        None => true,
    }
}

/// Picks the next trajectory at `now` (the UAV's scheduled change time).
pub fn next_trajectory(
    state: &UavState,
    arena: &Arena,
    cfg: &MobilityConfig,
    rng: &mut impl Rng,
    now: f64,
) -> Result<UavState, MobilityError> {
    let traj = &state.trajectory;
    let local = now - traj.epoch;
    let p = traj.position_at(local);
    let heading = traj.heading_at(local);
    let current = traj.movement_state();
    let options = legal_successors(current);
    let speed = if cfg.resample_speed {
        uniform(rng, cfg.speed)
    } else {
        traj.speed()
    };
    let start_depth = (!arena.in_inner(&p)).then(|| arena.buffer_depth(&p));

    for _ in 0..cfg.max_attempts {
        let next = options[rng.gen_range(0..options.len())];
        let radius = uniform(rng, cfg.radius);
        let wait = sample_wait_time(rng, cfg);
        let cand = tangent_trajectory(p, heading, next, radius, speed, now);
        if compliant(arena, cfg, &cand, wait, start_depth) {
            return Ok(UavState {
                id: state.id,
                trajectory: cand,
                next_change_at: now + wait,
            });
        }
    }

    // Forced fallback: circle at the minimum radius on a legal side that fits,
    // preferring the side whose center lies closer to the arena middle.
    let (mid_x, mid_y) = (
        0.5 * (arena.x_min + arena.x_max),
        0.5 * (arena.y_min + arena.y_max),
    );
    let r_min = cfg.radius.0;
    let mut sides: Vec<(f64, Direction)> = options
        .iter()
        .filter_map(|s| s.turn())
        .map(|d| {
            let (cx, cy) = turn_center(p, heading, d, r_min);
            ((cx - mid_x).hypot(cy - mid_y), d)
        })
        .collect();
    sides.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (_, d) in sides {
        let cand = tangent_trajectory(p, heading, d.into(), r_min, speed, now);
        if path_within(arena, &cand, f64::INFINITY, EDGE_MARGIN) {
            let wait = sample_wait_time(rng, cfg);
            return Ok(UavState {
                id: state.id,
                trajectory: cand,
                next_change_at: now + wait,
            });
        }
    }
    Err(MobilityError::ResampleExhausted {
        id: state.id,
        time: now,
    })
}

/// Random initial state inside the inner region at absolute time `now`.
pub fn initial_state(
    id: u32,
    altitude: f64,
    arena: &Arena,
    cfg: &MobilityConfig,
    rng: &mut impl Rng,
    now: f64,
) -> Result<UavState, MobilityError> {
    const ATTEMPTS: usize = 10_000;
    let all = [
        MovementState::Clockwise,
        MovementState::CounterClockwise,
        MovementState::Straight,
    ];
    let speed = uniform(rng, cfg.speed);
    for _ in 0..ATTEMPTS {
        let p = Position::new(
            rng.gen_range(arena.x_min + arena.buffer_width..=arena.x_max - arena.buffer_width),
            rng.gen_range(arena.y_min + arena.buffer_width..=arena.y_max - arena.buffer_width),
            altitude,
        );
        let heading = rng.gen_range(0.0..TAU);
        let next = all[rng.gen_range(0..all.len())];
        let radius = uniform(rng, cfg.radius);
        let wait = sample_wait_time(rng, cfg);
        let cand = tangent_trajectory(p, heading, next, radius, speed, now);
        if compliant(arena, cfg, &cand, wait, None) {
            return Ok(UavState {
                id,
                trajectory: cand,
                next_change_at: now + wait,
            });
        }
    }
    Err(MobilityError::ResampleExhausted { id, time: now })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn arena() -> Arena {
        Arena {
            x_min: 0.0,
            x_max: 5000.0,
            y_min: 0.0,
            y_max: 5000.0,
            buffer_width: 500.0,
        }
    }

    fn straight_state(x: f64, y: f64, heading: f64) -> UavState {
        let s = StraightTrajectory::new(x, y, heading, 30.0, 100.0).unwrap();
        UavState {
            id: 1,
            trajectory: Trajectory::straight(s, 0.0),
            next_change_at: 0.0,
        }
    }

    #[test]
    fn wait_time_degenerate_interval() {
        let cfg = MobilityConfig {
            wait: (10.0, 10.0),
            ..MobilityConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(sample_wait_time(&mut rng, &cfg), 10.0);
    }

    #[test]
    fn wait_time_mean() {
        let cfg = MobilityConfig {
            wait: (5.0, 30.0),
            ..MobilityConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 100_000;
        let mean = (0..n)
            .map(|_| sample_wait_time(&mut rng, &cfg))
            .sum::<f64>()
            / n as f64;
        assert!((mean - 17.5).abs() <= 0.02 * 17.5, "{mean}");
    }

    #[test]
    fn inverted_ranges_rejected() {
        let cfg = MobilityConfig {
            wait: (30.0, 5.0),
            ..MobilityConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(MobilityError::Config(_))));
        let bad = Arena {
            buffer_width: 0.0,
            ..arena()
        };
        assert!(bad.validate().is_err());
        let tiny = Arena {
            x_max: 900.0,
            ..arena()
        };
        assert!(MobilityConfig::default().validate_for(&tiny).is_err());
    }

    #[test]
    fn transition_rules() {
        use MovementState::*;
        assert!(!is_legal_transition(Clockwise, CounterClockwise));
        assert!(!is_legal_transition(CounterClockwise, Clockwise));
        for s in [Clockwise, CounterClockwise, Straight] {
            assert!(is_legal_transition(Straight, s));
            assert!(is_legal_transition(s, Straight));
            assert!(is_legal_transition(s, s));
        }
    }

    #[test]
    fn straight_in_center_may_pick_anything() {
        let cfg = MobilityConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut seen = std::collections::HashSet::new();
        let st = straight_state(2500.0, 2500.0, 0.3);
        for _ in 0..200 {
            let next = next_trajectory(&st, &arena(), &cfg, &mut rng, 0.0).unwrap();
            seen.insert(next.trajectory.movement_state());
        }
        assert_eq!(seen.len(), 3);
    }

    #[test]
    fn clockwise_never_goes_directly_counter_clockwise() {
        let cfg = MobilityConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let c = CurveTrajectory::new(
            2500.0,
            2500.0,
            300.0,
            30.0,
            Direction::Clockwise,
            0.0,
            100.0,
        )
        .unwrap();
        let st = UavState {
            id: 1,
            trajectory: Trajectory::curve(c, 0.0),
            next_change_at: 4.0,
        };
        for _ in 0..300 {
            let next = next_trajectory(&st, &arena(), &cfg, &mut rng, 4.0).unwrap();
            assert_ne!(
                next.trajectory.movement_state(),
                MovementState::CounterClockwise
            );
        }
    }

    #[test]
    fn change_is_position_and_heading_continuous() {
        let cfg = MobilityConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let st = straight_state(1000.0, 3000.0, 1.0);
        for _ in 0..100 {
            let next = next_trajectory(&st, &arena(), &cfg, &mut rng, 12.0).unwrap();
            let before = st.trajectory.position_at_time(12.0);
            let after = next.trajectory.position_at_time(12.0);
            assert!(before.planar_distance(&after) < 1e-9);
            let dh = (st.trajectory.heading_at(12.0) - next.trajectory.heading_at(0.0))
                .sin()
                .abs();
            assert!(dh < 1e-9);
        }
    }

    #[test]
    fn arc_extent_check() {
        // quarter arc from phase 0 to pi/2 around (500, 500), R = 100
        let c = CurveTrajectory::new(
            500.0,
            500.0,
            100.0,
            100.0 * FRAC_PI_2,
            Direction::CounterClockwise,
            0.0,
            0.0,
        )
        .unwrap();
        let t = Trajectory::curve(c, 0.0);
        let a = Arena {
            x_min: 0.0,
            x_max: 600.0,
            y_min: 0.0,
            y_max: 600.0,
            buffer_width: 10.0,
        };
        assert!(path_within(&a, &t, 1.0, 0.0));
        // half a turn reaches x = 400 and y = 600, still inside
        assert!(path_within(&a, &t, 2.0, 0.0));
        let narrow = Arena { y_max: 599.0, ..a };
        assert!(!path_within(&narrow, &t, 1.0, 0.0));
    }
}

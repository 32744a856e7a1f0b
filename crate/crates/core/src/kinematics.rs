//! Trajectory representations for UAVs flying smooth paths.
//!
//! A UAV either circles a center (clockwise or counter-clockwise) or flies a
//! straight ray. Every trajectory is anchored at an epoch (absolute simulation
//! time); `position_at` takes time measured from that epoch.

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("degenerate GPS fix: {0}")]
    DegenerateFix(&'static str),
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(&'static str),
}

/// A point in meters. `z` is the altitude.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Planar (x, y) distance, ignoring altitude.
    pub fn planar_distance(&self, other: &Position) -> f64 {
        self.planar_distance_sq(other).sqrt()
    }

    pub fn planar_distance_sq(&self, other: &Position) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

/// Turn direction. The numeric value is the sign of the angular velocity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Clockwise = -1,
    CounterClockwise = 1,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Clockwise => -1.0,
            Direction::CounterClockwise => 1.0,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Direction::Clockwise => Direction::CounterClockwise,
            Direction::CounterClockwise => Direction::Clockwise,
        }
    }
}

/// Movement state as advertised in Hello messages and trace files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MovementState {
    #[serde(rename = "CW")]
    Clockwise,
    #[serde(rename = "CCW")]
    CounterClockwise,
    #[serde(rename = "STRAIGHT")]
    Straight,
}

impl MovementState {
    pub fn as_str(self) -> &'static str {
        match self {
            MovementState::Clockwise => "CW",
            MovementState::CounterClockwise => "CCW",
            MovementState::Straight => "STRAIGHT",
        }
    }

    pub fn turn(self) -> Option<Direction> {
        match self {
            MovementState::Clockwise => Some(Direction::Clockwise),
            MovementState::CounterClockwise => Some(Direction::CounterClockwise),
            MovementState::Straight => None,
        }
    }
}

impl From<Direction> for MovementState {
    fn from(d: Direction) -> Self {
        match d {
            Direction::Clockwise => MovementState::Clockwise,
            Direction::CounterClockwise => MovementState::CounterClockwise,
        }
    }
}

impl fmt::Display for MovementState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Circular arc around `(center_x, center_y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveTrajectory {
    pub center_x: f64,
    pub center_y: f64,
    pub radius: f64,
    pub speed: f64,
    pub direction: Direction,
    /// Phase of the UAV about the center at the epoch, in [-pi, pi].
    pub initial_phase: f64,
    pub altitude: f64,
}

impl CurveTrajectory {
    pub fn new(
        center_x: f64,
        center_y: f64,
        radius: f64,
        speed: f64,
        direction: Direction,
        initial_phase: f64,
        altitude: f64,
    ) -> Result<Self, KinematicsError> {
        let curve = Self {
            center_x,
            center_y,
            radius,
            speed,
            direction,
            initial_phase: wrap_pi(initial_phase),
            altitude,
        };
        curve.validate()?;
        Ok(curve)
    }

    /// Builds the arc through `p` around the given center.
    pub fn through(
        center_x: f64,
        center_y: f64,
        p: Position,
        speed: f64,
        direction: Direction,
    ) -> Result<Self, KinematicsError> {
        let phase = initial_phase(center_x, center_y, p)?;
        let radius = (p.x - center_x).hypot(p.y - center_y);
        Self::new(center_x, center_y, radius, speed, direction, phase, p.z)
    }

    fn validate(&self) -> Result<(), KinematicsError> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(KinematicsError::InvalidTrajectory(
                "radius must be positive",
            ));
        }
        if !(self.speed > 0.0 && self.speed.is_finite()) {
            return Err(KinematicsError::InvalidTrajectory(
                "curve speed must be positive",
            ));
        }
        if !(self.center_x.is_finite()
            && self.center_y.is_finite()
            && self.initial_phase.is_finite()
            && self.altitude.is_finite())
        {
            return Err(KinematicsError::InvalidTrajectory(
                "non-finite curve parameter",
            ));
        }
        if !self.angular_velocity().is_finite() || self.angular_velocity() == 0.0 {
            return Err(KinematicsError::InvalidTrajectory(
                "angular velocity must be finite and nonzero",
            ));
        }
        Ok(())
    }

    /// Signed angular velocity `V * Dir / R` in rad/s.
    pub fn angular_velocity(&self) -> f64 {
        self.speed * self.direction.sign() / self.radius
    }

    pub fn phase_at(&self, t: f64) -> f64 {
        self.initial_phase + self.angular_velocity() * t
    }
}

/// Straight ray from `(origin_x, origin_y)` along `heading`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StraightTrajectory {
    pub origin_x: f64,
    pub origin_y: f64,
    /// Angle from the +X axis, in [0, 2pi).
    pub heading: f64,
    pub speed: f64,
    pub altitude: f64,
}

impl StraightTrajectory {
    pub fn new(
        origin_x: f64,
        origin_y: f64,
        heading: f64,
        speed: f64,
        altitude: f64,
    ) -> Result<Self, KinematicsError> {
        let s = Self {
            origin_x,
            origin_y,
            heading: wrap_two_pi(heading),
            speed,
            altitude,
        };
        if !(speed >= 0.0 && speed.is_finite()) {
            return Err(KinematicsError::InvalidTrajectory(
                "straight speed must be non-negative",
            ));
        }
        if !(origin_x.is_finite()
            && origin_y.is_finite()
            && s.heading.is_finite()
            && altitude.is_finite())
        {
            return Err(KinematicsError::InvalidTrajectory(
                "non-finite straight parameter",
            ));
        }
        Ok(s)
    }

    /// Velocity components (vx, vy).
    pub fn velocity(&self) -> (f64, f64) {
        let (s, c) = self.heading.sin_cos();
        (self.speed * c, self.speed * s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Path {
    Curve(CurveTrajectory),
    Straight(StraightTrajectory),
}

/// A path plus the absolute simulation time its parameters are anchored at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub path: Path,
    pub epoch: f64,
}

impl Trajectory {
    pub fn curve(curve: CurveTrajectory, epoch: f64) -> Self {
        Self {
            path: Path::Curve(curve),
            epoch,
        }
    }

    pub fn straight(straight: StraightTrajectory, epoch: f64) -> Self {
        Self {
            path: Path::Straight(straight),
            epoch,
        }
    }

    pub fn with_epoch(mut self, epoch: f64) -> Self {
        self.epoch = epoch;
        self
    }

    pub fn movement_state(&self) -> MovementState {
        match &self.path {
            Path::Curve(c) => c.direction.into(),
            Path::Straight(_) => MovementState::Straight,
        }
    }

    pub fn speed(&self) -> f64 {
        match &self.path {
            Path::Curve(c) => c.speed,
            Path::Straight(s) => s.speed,
        }
    }

    pub fn altitude(&self) -> f64 {
        match &self.path {
            Path::Curve(c) => c.altitude,
            Path::Straight(s) => s.altitude,
        }
    }

    pub fn is_curve(&self) -> bool {
        matches!(self.path, Path::Curve(_))
    }

    /// Position `t` seconds after the epoch.
    pub fn position_at(&self, t: f64) -> Position {
        match &self.path {
            Path::Curve(c) => {
                let (s, co) = c.phase_at(t).sin_cos();
                Position::new(
                    c.center_x + c.radius * co,
                    c.center_y + c.radius * s,
                    c.altitude,
                )
            }
            Path::Straight(s) => {
                let (sn, cs) = s.heading.sin_cos();
                Position::new(
                    s.origin_x + s.speed * t * cs,
                    s.origin_y + s.speed * t * sn,
                    s.altitude,
                )
            }
        }
    }

    /// Position at absolute simulation time.
    pub fn position_at_time(&self, time: f64) -> Position {
        self.position_at(time - self.epoch)
    }

    /// Direction of travel `t` seconds after the epoch, in [0, 2pi).
    pub fn heading_at(&self, t: f64) -> f64 {
        match &self.path {
            Path::Curve(c) => wrap_two_pi(c.phase_at(t) + c.direction.sign() * PI / 2.0),
            Path::Straight(s) => s.heading,
        }
    }

    /// The same motion re-expressed with its anchor moved to absolute time
    /// `new_epoch`.
    pub fn reanchored(&self, new_epoch: f64) -> Trajectory {
        let dt = new_epoch - self.epoch;
        let path = match self.path {
            Path::Curve(mut c) => {
                c.initial_phase = wrap_pi(c.phase_at(dt));
                Path::Curve(c)
            }
            Path::Straight(mut s) => {
                let p = self.position_at(dt);
                s.origin_x = p.x;
                s.origin_y = p.y;
                Path::Straight(s)
            }
        };
        Trajectory {
            path,
            epoch: new_epoch,
        }
    }
}

/// Full-quadrant phase of `p` about a center, in [-pi, pi].
pub fn initial_phase(center_x: f64, center_y: f64, p: Position) -> Result<f64, KinematicsError> {
    let dx = p.x - center_x;
    let dy = p.y - center_y;
    if dx == 0.0 && dy == 0.0 {
        return Err(KinematicsError::DegenerateFix(
            "point coincides with center",
        ));
    }
    Ok(dy.atan2(dx))
}

/// Reconstructs a trajectory from three GPS fixes taken `interval` seconds
/// apart. The result is anchored at `p2` with epoch 0.
pub fn infer_trajectory(
    p0: Position,
    p1: Position,
    p2: Position,
    interval: f64,
) -> Result<(Trajectory, f64), KinematicsError> {
    if !(interval > 0.0 && interval.is_finite()) {
        return Err(KinematicsError::DegenerateFix("interval must be positive"));
    }
    if !(p0.is_finite() && p1.is_finite() && p2.is_finite()) {
        return Err(KinematicsError::DegenerateFix("non-finite fix"));
    }
    let d01 = p0.planar_distance(&p1);
    let d12 = p1.planar_distance(&p2);
    let d02 = p0.planar_distance(&p2);
    if d01 == 0.0 || d12 == 0.0 || d02 == 0.0 {
        return Err(KinematicsError::DegenerateFix("fixes coincide"));
    }

    let (ux, uy) = (p1.x - p0.x, p1.y - p0.y);
    let (vx, vy) = (p2.x - p1.x, p2.y - p1.y);
    let cross = ux * vy - uy * vx;
    let area = 0.5 * cross.abs();
    let longest = d01.max(d12).max(d02);

    if area < COLLINEAR_TOLERANCE * longest * longest {
        let speed = d12 / interval;
        let heading = vy.atan2(vx);
        let straight = StraightTrajectory::new(p2.x, p2.y, heading, speed, p2.z)?;
        return Ok((Trajectory::straight(straight, 0.0), speed));
    }

    let (cx, cy) = circumcenter(p0, p1, p2);
    let direction = if cross > 0.0 {
        Direction::CounterClockwise
    } else {
        Direction::Clockwise
    };
    let phase1 = initial_phase(cx, cy, p1)?;
    let phase2 = initial_phase(cx, cy, p2)?;
    let radius = (p2.x - cx).hypot(p2.y - cy);
    let speed = radius * wrap_pi(phase2 - phase1).abs() / interval;
    let curve = CurveTrajectory::new(cx, cy, radius, speed, direction, phase2, p2.z)?;
    Ok((Trajectory::curve(curve, 0.0), speed))
}

/// Relative triangle-area threshold below which three fixes count as collinear.
pub const COLLINEAR_TOLERANCE: f64 = 1e-6;

fn circumcenter(a: Position, b: Position, c: Position) -> (f64, f64) {
    // Work relative to `a` to keep the magnitudes small.
    let (bx, by) = (b.x - a.x, b.y - a.y);
    let (cx, cy) = (c.x - a.x, c.y - a.y);
    let d = 2.0 * (bx * cy - by * cx);
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let ux = (cy * b2 - by * c2) / d;
    let uy = (bx * c2 - cx * b2) / d;
    (a.x + ux, a.y + uy)
}

/// Wraps an angle into [-pi, pi].
pub fn wrap_pi(angle: f64) -> f64 {
    if (-PI..=PI).contains(&angle) {
        return angle;
    }
    let r = (angle + PI).rem_euclid(TAU) - PI;
    // rem_euclid can round up to exactly TAU
    r.clamp(-PI, PI)
}

/// Wraps an angle into [0, 2pi).
pub fn wrap_two_pi(angle: f64) -> f64 {
    if (0.0..TAU).contains(&angle) {
        return angle;
    }
    let r = angle.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn quarter_turn() {
        // omega = V / R = pi/2 with R = 100
        let c = CurveTrajectory::new(
            0.0,
            0.0,
            100.0,
            50.0 * PI,
            Direction::CounterClockwise,
            0.0,
            50.0,
        )
        .unwrap();
        let p = Trajectory::curve(c, 0.0).position_at(1.0);
        assert!(close(p.x, 0.0, 1e-9) && close(p.y, 100.0, 1e-9));
        assert_eq!(p.z, 50.0);
    }

    #[test]
    fn straight_advance_and_identity_at_epoch() {
        let s = StraightTrajectory::new(0.0, 0.0, 0.0, 10.0, 7.0).unwrap();
        let t = Trajectory::straight(s, 0.0);
        assert_eq!(t.position_at(3.0), Position::new(30.0, 0.0, 7.0));
        assert_eq!(t.position_at(0.0), Position::new(0.0, 0.0, 7.0));

        let c = CurveTrajectory::new(5.0, -3.0, 20.0, 4.0, Direction::Clockwise, 1.0, 9.0).unwrap();
        let p = Trajectory::curve(c, 12.0).position_at(0.0);
        assert!(close(p.x, 5.0 + 20.0 * 1f64.cos(), 1e-12));
        assert!(close(p.y, -3.0 + 20.0 * 1f64.sin(), 1e-12));
    }

    #[test]
    fn phase_is_quadrant_aware() {
        assert_eq!(
            initial_phase(0.0, 0.0, Position::new(1.0, 0.0, 0.0)).unwrap(),
            0.0
        );
        assert_eq!(
            initial_phase(0.0, 0.0, Position::new(0.0, -1.0, 0.0)).unwrap(),
            -PI / 2.0
        );
        assert_eq!(
            initial_phase(0.0, 0.0, Position::new(-1.0, 0.0, 0.0)).unwrap(),
            PI
        );
        assert!(matches!(
            initial_phase(2.0, 3.0, Position::new(2.0, 3.0, 1.0)),
            Err(KinematicsError::DegenerateFix(_))
        ));
    }

    #[test]
    fn infer_symmetric_circle() {
        let (t, _) = infer_trajectory(
            Position::new(100.0, 0.0, 0.0),
            Position::new(0.0, 100.0, 0.0),
            Position::new(-100.0, 0.0, 0.0),
            1.0,
        )
        .unwrap();
        let Path::Curve(c) = t.path else {
            panic!("expected curve")
        };
        assert!(close(c.center_x, 0.0, 1e-9) && close(c.center_y, 0.0, 1e-9));
        assert!(close(c.radius, 100.0, 1e-9));
        assert_eq!(c.direction, Direction::CounterClockwise);
        assert!(close(c.initial_phase.abs(), PI, 1e-12));
        assert!(close(c.speed, 100.0 * PI / 2.0, 1e-9));
    }

    #[test]
    fn infer_collinear() {
        let (t, speed) = infer_trajectory(
            Position::new(0.0, 0.0, 3.0),
            Position::new(10.0, 0.0, 3.0),
            Position::new(20.0, 0.0, 3.0),
            1.0,
        )
        .unwrap();
        let Path::Straight(s) = t.path else {
            panic!("expected straight")
        };
        assert_eq!(s.heading, 0.0);
        assert_eq!(speed, 10.0);
        assert_eq!((s.origin_x, s.origin_y), (20.0, 0.0));
    }

    #[test]
    fn infer_rejects_degenerate_input() {
        let p = Position::new(1.0, 1.0, 0.0);
        let q = Position::new(2.0, 1.0, 0.0);
        assert!(infer_trajectory(p, p, q, 1.0).is_err());
        assert!(infer_trajectory(p, q, Position::new(3.0, 1.0, 0.0), 0.0).is_err());
        assert!(infer_trajectory(p, q, Position::new(3.0, 1.0, 0.0), -1.0).is_err());
    }

    #[test]
    fn infer_recovers_generating_circle() {
        let c =
            CurveTrajectory::new(37.0, -12.0, 55.0, 11.0, Direction::Clockwise, 0.4, 80.0).unwrap();
        let t = Trajectory::curve(c, 0.0);
        let h = 0.7;
        let (got, speed) = infer_trajectory(
            t.position_at(0.0),
            t.position_at(h),
            t.position_at(2.0 * h),
            h,
        )
        .unwrap();
        let Path::Curve(g) = got.path else {
            panic!("expected curve")
        };
        assert!(((g.center_x - 37.0) / 37.0).abs() <= 1e-9);
        assert!(((g.center_y + 12.0) / 12.0).abs() <= 1e-9);
        assert!(((g.radius - 55.0) / 55.0).abs() <= 1e-9);
        assert!(((speed - 11.0) / 11.0).abs() <= 1e-9);
        assert_eq!(g.direction, Direction::Clockwise);
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(CurveTrajectory::new(0.0, 0.0, 0.0, 1.0, Direction::Clockwise, 0.0, 0.0).is_err());
        assert!(CurveTrajectory::new(0.0, 0.0, 1.0, 0.0, Direction::Clockwise, 0.0, 0.0).is_err());
        assert!(StraightTrajectory::new(0.0, 0.0, 0.0, -1.0, 0.0).is_err());
        assert!(StraightTrajectory::new(f64::NAN, 0.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn reanchoring_preserves_motion() {
        let c =
            CurveTrajectory::new(1.0, 2.0, 300.0, 40.0, Direction::Clockwise, 2.5, 0.0).unwrap();
        let t = Trajectory::curve(c, 3.0);
        let r = t.reanchored(50.0);
        let a = t.position_at_time(61.0);
        let b = r.position_at_time(61.0);
        assert!(a.planar_distance(&b) < 1e-9);

        let s = StraightTrajectory::new(4.0, 5.0, 4.0, 33.0, 0.0).unwrap();
        let t = Trajectory::straight(s, 1.0);
        let r = t.reanchored(20.0);
        assert!(
            t.position_at_time(25.0)
                .planar_distance(&r.position_at_time(25.0))
                < 1e-9
        );
    }

    #[test]
    fn wrapping() {
        assert!(close(wrap_pi(3.0 * PI), PI, 1e-12) || close(wrap_pi(3.0 * PI), -PI, 1e-12));
        assert!(close(wrap_pi(-0.5 + 4.0 * PI), -0.5, 1e-12));
        assert!(close(wrap_two_pi(-0.5), TAU - 0.5, 1e-12));
        assert!(wrap_two_pi(-1e-18) < TAU);
    }
}

use serde::{Deserialize, Serialize};

use crate::kinematics::{
    CurveTrajectory, KinematicsError, MovementState, Path, Position, StraightTrajectory, Trajectory,
};

/// Periodic trajectory advertisement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HelloMessage {
    pub sender: u32,
    pub timestamp: f64,
    pub position: Position,
    pub movement_state: MovementState,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heading: Option<f64>,
    pub speed: f64,
    pub sequence: u64,
}

impl HelloMessage {
    /// Snapshot of `traj` at absolute time `timestamp`.
    pub fn advertise(sender: u32, traj: &Trajectory, timestamp: f64, sequence: u64) -> Self {
        let position = traj.position_at_time(timestamp);
        let (center, radius, heading) = match &traj.path {
            Path::Curve(c) => (Some((c.center_x, c.center_y)), Some(c.radius), None),
            Path::Straight(s) => (None, None, Some(s.heading)),
        };
        Self {
            sender,
            timestamp,
            position,
            movement_state: traj.movement_state(),
            center,
            radius,
            heading,
            speed: traj.speed(),
            sequence,
        }
    }

    /// Rebuilds the advertised trajectory, anchored at the message timestamp.
    pub fn to_trajectory(&self) -> Result<Trajectory, KinematicsError> {
        match (self.movement_state.turn(), self.center, self.heading) {
            (Some(direction), Some((cx, cy)), None) => {
                let c = CurveTrajectory::through(cx, cy, self.position, self.speed, direction)?;
                Ok(Trajectory::curve(c, self.timestamp))
            }
            (None, None, Some(heading)) => {
                let s = StraightTrajectory::new(
                    self.position.x,
                    self.position.y,
                    heading,
                    self.speed,
                    self.position.z,
                )?;
                Ok(Trajectory::straight(s, self.timestamp))
            }
            _ => Err(KinematicsError::InvalidTrajectory(
                "hello fields do not match the movement state",
            )),
        }
    }
}

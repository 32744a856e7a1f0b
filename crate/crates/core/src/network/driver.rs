use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::SimError;
use crate::kinematics::Trajectory;
use crate::mobility::{initial_state, next_trajectory, Arena, MobilityConfig, UavState};

/// Source of UAV trajectories for the simulator.
pub trait MobilityDriver {
    /// States at t = 0, one per UAV, ids `0..n`.
    fn initial_states(&mut self) -> Result<Vec<UavState>, SimError>;

    /// The state that takes over when `current` reaches its change time.
    fn next_state(&mut self, current: &UavState, now: f64) -> Result<UavState, SimError>;
}

/// Random Smooth-Turn mobility; each UAV draws from its own seeded stream so
/// results do not depend on event interleaving.
#[derive(Debug, Clone)]
pub struct SmoothTurnDriver {
    arena: Arena,
    config: MobilityConfig,
    uav_count: u32,
    rngs: Vec<ChaCha8Rng>,
}

/// Altitude of UAV `id`; distinct per UAV.
pub fn altitude_for(id: u32) -> f64 {
    100.0 + 10.0 * id as f64
}

impl SmoothTurnDriver {
    pub fn new(
        arena: Arena,
        config: MobilityConfig,
        uav_count: u32,
        seed: u64,
    ) -> Result<Self, SimError> {
        config.validate_for(&arena)?;
        let rngs = (0..uav_count)
            .map(|id| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(id as u64);
                rng
            })
            .collect();
        Ok(Self {
            arena,
            config,
            uav_count,
            rngs,
        })
    }
}

impl MobilityDriver for SmoothTurnDriver {
    fn initial_states(&mut self) -> Result<Vec<UavState>, SimError> {
        (0..self.uav_count)
            .map(|id| {
                initial_state(
                    id,
                    altitude_for(id),
                    &self.arena,
                    &self.config,
                    &mut self.rngs[id as usize],
                    0.0,
                )
                .map_err(SimError::from)
            })
            .collect()
    }

    fn next_state(&mut self, current: &UavState, now: f64) -> Result<UavState, SimError> {
        let rng = &mut self.rngs[current.id as usize];
        Ok(next_trajectory(
            current,
            &self.arena,
            &self.config,
            rng,
            now,
        )?)
    }
}

/// Fixed per-UAV schedules: each entry is `(start_time, trajectory)`, and a
/// segment lasts until the next one starts.
#[derive(Debug, Clone, Default)]
pub struct ScriptedDriver {
    scripts: Vec<Vec<(f64, Trajectory)>>,
}

impl ScriptedDriver {
    pub fn new(scripts: Vec<Vec<(f64, Trajectory)>>) -> Result<Self, SimError> {
        for (id, script) in scripts.iter().enumerate() {
            if script.first().map(|s| s.0) != Some(0.0) {
                return Err(SimError::Config(format!(
                    "script for UAV {id} must start at t = 0"
                )));
            }
            if script.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                return Err(SimError::Config(format!(
                    "script for UAV {id} has non-increasing start times"
                )));
            }
        }
        Ok(Self { scripts })
    }

    fn state(&self, id: u32, index: usize) -> UavState {
        let script = &self.scripts[id as usize];
        let (start, traj) = script[index];
        let next_change_at = script.get(index + 1).map_or(f64::INFINITY, |s| s.0);
        UavState {
            id,
            trajectory: traj.reanchored(start),
            next_change_at,
        }
    }
}

impl MobilityDriver for ScriptedDriver {
    fn initial_states(&mut self) -> Result<Vec<UavState>, SimError> {
        Ok((0..self.scripts.len() as u32)
            .map(|id| self.state(id, 0))
            .collect())
    }

    fn next_state(&mut self, current: &UavState, now: f64) -> Result<UavState, SimError> {
        let script = &self.scripts[current.id as usize];
        let index = script.iter().position(|s| s.0 == now).ok_or_else(|| {
            SimError::Config(format!(
                "no scripted segment for UAV {} at t = {now}",
                current.id
            ))
        })?;
        Ok(self.state(current.id, index))
    }
}

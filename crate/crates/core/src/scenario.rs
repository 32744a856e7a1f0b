//! Scenario files and the compact trajectory spec syntax.
//!
//! A scenario is a flat `key = value` file. Blank lines and `#` comments are
//! ignored, unknown keys are rejected. UAVs fly Random Smooth-Turn unless
//! every UAV has a `script.<id>` line, in which case the listed segments are
//! flown verbatim:
//!
//! ```text
//! script.0 = 0:straight:0,0,0,30,100 ; 12.5:curve:500,300,300,30,CCW,-1.2,100
//! ```

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path as FsPath;
use std::str::FromStr;

use thiserror::Error;

use crate::kinematics::{CurveTrajectory, Direction, StraightTrajectory, Trajectory};
use crate::mobility::{Arena, MobilityConfig};
use crate::network::{
    run_simulation, write_event_log, write_snapshots_csv, write_trace_csv, ScriptedDriver,
    SimError, SimOutput, SimParams, SmoothTurnDriver,
};

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Error, PartialEq)]
#[error("bad trajectory spec {spec:?}: {message}")]
pub struct SpecError {
    pub spec: String,
    pub message: String,
}

/// Parses `curve:cx,cy,r,v,dir,theta,z` or `straight:x,y,heading,v,z`.
/// `dir` is `CW`, `CCW`, `-1` or `1`. The result is anchored at `epoch`.
pub fn parse_trajectory_spec(spec: &str, epoch: f64) -> Result<Trajectory, SpecError> {
    let err = |message: String| SpecError {
        spec: spec.to_string(),
        message,
    };
    let (kind, rest) = spec
        .trim()
        .split_once(':')
        .ok_or_else(|| err("missing kind prefix".into()))?;
    let fields: Vec<&str> = rest.split(',').map(str::trim).collect();
    let num = |i: usize| -> Result<f64, SpecError> {
        fields[i]
            .parse::<f64>()
            .map_err(|_| err(format!("field {} is not a number: {:?}", i + 1, fields[i])))
    };
    match kind.trim() {
        "curve" => {
            if fields.len() != 7 {
                return Err(err(format!("curve takes 7 fields, got {}", fields.len())));
            }
            let dir = match fields[4].to_ascii_uppercase().as_str() {
                "CW" | "-1" => Direction::Clockwise,
                "CCW" | "1" | "+1" => Direction::CounterClockwise,
                other => return Err(err(format!("direction must be CW or CCW, got {other:?}"))),
            };
            let c = CurveTrajectory::new(num(0)?, num(1)?, num(2)?, num(3)?, dir, num(5)?, num(6)?)
                .map_err(|e| err(e.to_string()))?;
            Ok(Trajectory::curve(c, epoch))
        }
        "straight" => {
            if fields.len() != 5 {
                return Err(err(format!(
                    "straight takes 5 fields, got {}",
                    fields.len()
                )));
            }
            let s = StraightTrajectory::new(num(0)?, num(1)?, num(2)?, num(3)?, num(4)?)
                .map_err(|e| err(e.to_string()))?;
            Ok(Trajectory::straight(s, epoch))
        }
        other => Err(err(format!("unknown kind {other:?}"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub arena: Arena,
    pub uav_count: u32,
    pub speed: (f64, f64),
    pub radius: (f64, f64),
    pub wait: (f64, f64),
    pub transmission_range: f64,
    pub hello_interval: f64,
    pub duration: f64,
    pub seed: u64,
    pub horizon: f64,
    /// Ground-truth break detection step.
    pub oracle_dt: f64,
    pub snapshot_interval: f64,
    pub resample_speed: bool,
    /// Per-UAV `(start_time, trajectory)` segments; empty means random mobility.
    pub scripts: BTreeMap<u32, Vec<(f64, Trajectory)>>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let m = MobilityConfig::default();
        let p = SimParams::default();
        Self {
            arena: Arena {
                x_min: 0.0,
                x_max: 10_000.0,
                y_min: 0.0,
                y_max: 10_000.0,
                buffer_width: 1000.0,
            },
            uav_count: 20,
            speed: m.speed,
            radius: m.radius,
            wait: m.wait,
            transmission_range: p.transmission_range,
            hello_interval: p.hello_interval,
            duration: p.duration,
            seed: 1,
            horizon: p.horizon,
            oracle_dt: p.dt_check,
            snapshot_interval: p.snapshot_interval,
            resample_speed: m.resample_speed,
            scripts: BTreeMap::new(),
        }
    }
}

fn parse_script(value: &str) -> Result<Vec<(f64, Trajectory)>, String> {
    value
        .split(';')
        .map(|seg| {
            let seg = seg.trim();
            let (start, spec) = seg
                .split_once(':')
                .ok_or_else(|| format!("segment {seg:?} lacks a start time"))?;
            let start: f64 = start
                .trim()
                .parse()
                .map_err(|_| format!("bad start time {start:?}"))?;
            let traj = parse_trajectory_spec(spec, start).map_err(|e| e.to_string())?;
            Ok((start, traj))
        })
        .collect()
}

impl FromStr for ScenarioConfig {
    type Err = ScenarioError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut cfg = ScenarioConfig::default();
        let mut seen = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let syntax = |message: String| ScenarioError::Syntax { line, message };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| syntax(format!("expected key = value, got {content:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if let Some(prev) = seen.insert(key.to_string(), line) {
                return Err(syntax(format!("{key} already set on line {prev}")));
            }
            let float = || {
                value
                    .parse::<f64>()
                    .map_err(|_| syntax(format!("{key}: not a number: {value:?}")))
            };
            let int = || {
                value
                    .parse::<u64>()
                    .map_err(|_| syntax(format!("{key}: not an integer: {value:?}")))
            };
            match key {
                "x_min" => cfg.arena.x_min = float()?,
                "x_max" => cfg.arena.x_max = float()?,
                "y_min" => cfg.arena.y_min = float()?,
                "y_max" => cfg.arena.y_max = float()?,
                "buffer_width" => cfg.arena.buffer_width = float()?,
                "uav_count" => {
                    cfg.uav_count =
                        u32::try_from(int()?).map_err(|_| syntax("uav_count too large".into()))?
                }
                "speed_min" => cfg.speed.0 = float()?,
                "speed_max" => cfg.speed.1 = float()?,
                "radius_min" => cfg.radius.0 = float()?,
                "radius_max" => cfg.radius.1 = float()?,
                "wait_min" => cfg.wait.0 = float()?,
                "wait_max" => cfg.wait.1 = float()?,
                "transmission_range" => cfg.transmission_range = float()?,
                "hello_interval" => cfg.hello_interval = float()?,
                "duration" => cfg.duration = float()?,
                "seed" => cfg.seed = int()?,
                "horizon" => cfg.horizon = float()?,
                "oracle_dt" => cfg.oracle_dt = float()?,
                "snapshot_interval" => cfg.snapshot_interval = float()?,
                "resample_speed" => {
                    cfg.resample_speed = value
                        .parse()
                        .map_err(|_| syntax(format!("{key}: expected true or false")))?
                }
                _ => match key.strip_prefix("script.").map(str::parse::<u32>) {
                    Some(Ok(id)) => {
                        cfg.scripts.insert(
                            id,
                            parse_script(value).map_err(|m| syntax(format!("{key}: {m}")))?,
                        );
                    }
                    _ => return Err(syntax(format!("unknown key {key:?}"))),
                },
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ScenarioConfig {
    pub fn load(path: impl AsRef<FsPath>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| ScenarioError::Invalid(format!("cannot read {}: {e}", path.display())))?;
        text.parse()
    }

    pub fn mobility(&self) -> MobilityConfig {
        MobilityConfig {
            speed: self.speed,
            radius: self.radius,
            wait: self.wait,
            resample_speed: self.resample_speed,
            ..MobilityConfig::default()
        }
    }

    pub fn sim_params(&self) -> SimParams {
        SimParams {
            transmission_range: self.transmission_range,
            hello_interval: self.hello_interval,
            duration: self.duration,
            dt_check: self.oracle_dt,
            horizon: self.horizon,
            snapshot_interval: self.snapshot_interval,
        }
    }

    pub fn is_scripted(&self) -> bool {
        !self.scripts.is_empty()
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let invalid = |m: String| ScenarioError::Invalid(m);
        if self.uav_count < 2 {
            return Err(invalid("uav_count must be at least 2".into()));
        }
        self.sim_params()
            .validate()
            .map_err(|e| invalid(e.to_string()))?;
        if self.is_scripted() {
            let ids: Vec<u32> = self.scripts.keys().copied().collect();
            if ids != (0..self.uav_count).collect::<Vec<_>>() {
                return Err(invalid(format!(
                    "scripts must cover UAVs 0..{} exactly",
                    self.uav_count
                )));
            }
            ScriptedDriver::new(self.scripts.values().cloned().collect())
                .map_err(|e| invalid(e.to_string()))?;
        } else {
            self.mobility()
                .validate_for(&self.arena)
                .map_err(|e| invalid(e.to_string()))?;
        }
        Ok(())
    }
}

/// Runs a validated scenario to completion.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<SimOutput, SimError> {
    let params = cfg.sim_params();
    if cfg.is_scripted() {
        let mut driver = ScriptedDriver::new(cfg.scripts.values().cloned().collect())?;
        run_simulation(&params, &mut driver)
    } else {
        let mut driver = SmoothTurnDriver::new(cfg.arena, cfg.mobility(), cfg.uav_count, cfg.seed)?;
        run_simulation(&params, &mut driver)
    }
}

pub const EVENTS_FILE: &str = "events.jsonl";
pub const TRACE_FILE: &str = "trace.csv";
pub const SNAPSHOTS_FILE: &str = "snapshots.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// Writes the event log, trace, snapshots and summary into `dir`, creating it
/// if needed.
pub fn write_outputs(output: &SimOutput, dir: impl AsRef<FsPath>) -> io::Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let open = |name: &str| File::create(dir.join(name)).map(BufWriter::new);

    let mut w = open(EVENTS_FILE)?;
    write_event_log(&mut w, &output.events)?;
    w.flush()?;
    let mut w = open(TRACE_FILE)?;
    write_trace_csv(&mut w, &output.trace)?;
    w.flush()?;
    let mut w = open(SNAPSHOTS_FILE)?;
    write_snapshots_csv(&mut w, &output.snapshots)?;
    w.flush()?;
    let mut w = open(SUMMARY_FILE)?;
    serde_json::to_writer_pretty(&mut w, &output.summary)?;
    w.write_all(b"\n")?;
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_from_empty_file() {
        let cfg: ScenarioConfig = "# nothing here\n\n".parse().unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
    }

    #[test]
    fn keys_and_comments() {
        let cfg: ScenarioConfig = "uav_count = 5  # small\nseed=42\ntransmission_range = 750\n"
            .parse()
            .unwrap();
        assert_eq!(cfg.uav_count, 5);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.transmission_range, 750.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            "speed = 3".parse::<ScenarioConfig>(),
            Err(ScenarioError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            "seed = x".parse::<ScenarioConfig>(),
            Err(ScenarioError::Syntax { .. })
        ));
        assert!(matches!(
            "seed = 1\nseed = 2".parse::<ScenarioConfig>(),
            Err(ScenarioError::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            "wait_min = 40\nwait_max = 10".parse::<ScenarioConfig>(),
            Err(ScenarioError::Invalid(_))
        ));
        assert!(matches!(
            "uav_count = 1".parse::<ScenarioConfig>(),
            Err(ScenarioError::Invalid(_))
        ));
        assert!(matches!(
            "transmission_range = 0".parse::<ScenarioConfig>(),
            Err(ScenarioError::Invalid(_))
        ));
    }

    #[test]
    fn trajectory_specs() {
        let c = parse_trajectory_spec("curve:1,2,300,30,CW,0.5,100", 0.0).unwrap();
        assert!(c.is_curve());
        assert_eq!(c.altitude(), 100.0);
        let s = parse_trajectory_spec("straight:0,0,1.5,20,90", 2.0).unwrap();
        assert!(!s.is_curve());
        assert_eq!(s.epoch, 2.0);
        for bad in [
            "curve:1,2,3",
            "line:0,0,0,1,1",
            "straight:0,0,a,1,1",
            "curve:0,0,100,10,UP,0,0",
            "0,0",
        ] {
            assert!(parse_trajectory_spec(bad, 0.0).is_err(), "{bad}");
        }
    }

    #[test]
    fn scripts_must_cover_every_uav() {
        let text = "uav_count = 2\nscript.0 = 0:straight:0,0,0,10,100\n";
        assert!(matches!(
            text.parse::<ScenarioConfig>(),
            Err(ScenarioError::Invalid(_))
        ));
        let text = "uav_count = 2\nscript.0 = 0:straight:0,0,0,10,100\nscript.1 = 0:straight:50,0,0,20,110 ; 3:straight:80,0,0,20,110\n";
        let cfg: ScenarioConfig = text.parse().unwrap();
        assert_eq!(cfg.scripts[&1].len(), 2);
    }
}

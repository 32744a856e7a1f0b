//! Discrete-event simulation of Hello broadcasting, link tracking and LLT
//! recomputation.
//!
//! Events run in global time order. Ties at one instant resolve as trajectory
//! changes, then Hello broadcasts, then snapshots, each by UAV id. Between two
//! events no trajectory changes, so ground-truth link breaks are found by
//! stepping every live link at `dt_check` on the absolute time grid and
//! bisecting the bracketing step.

mod driver;
mod hello;
mod output;

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use serde::{Serialize, Serializer};
use thiserror::Error;

pub use driver::{altitude_for, MobilityDriver, ScriptedDriver, SmoothTurnDriver};
pub use hello::HelloMessage;
pub use output::{
    write_event_log, write_snapshots_csv, write_trace_csv, SNAPSHOT_HEADER, TRACE_HEADER,
};

use crate::kinematics::{MovementState, Path, Position, Trajectory};
use crate::llt::{compute_llt, Lifetime, LinkCase, LltError, LltResult};
use crate::mobility::{MobilityError, UavState};
use crate::routing::LinkGraph;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Mobility(#[from] MobilityError),
    #[error(transparent)]
    Llt(#[from] LltError),
}

/// Ground-truth break refinement width, in seconds.
const BREAK_REFINEMENT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    pub transmission_range: f64,
    pub hello_interval: f64,
    pub duration: f64,
    /// Ground-truth break detection step.
    pub dt_check: f64,
    /// Look-ahead handed to the LLT solver.
    pub horizon: f64,
    pub snapshot_interval: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            transmission_range: 1000.0,
            hello_interval: 1.0,
            duration: 600.0,
            dt_check: 1e-2,
            horizon: crate::llt::DEFAULT_HORIZON,
            snapshot_interval: 10.0,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<(), SimError> {
        let positive = [
            ("transmission_range", self.transmission_range),
            ("hello_interval", self.hello_interval),
            ("dt_check", self.dt_check),
            ("horizon", self.horizon),
            ("snapshot_interval", self.snapshot_interval),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SimError::Config(format!("{name} must be positive")));
            }
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return Err(SimError::Config("duration must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RecomputeTrigger {
    /// Recomputed at the instant an endpoint changed trajectory.
    TrajChange,
    /// Recomputed when the neighbor's next Hello carried the new trajectory.
    /// Logged for comparison only.
    HelloDelayed,
}

fn lifetime_json<S: Serializer>(llt: &Lifetime, s: S) -> Result<S::Ok, S::Error> {
    match llt {
        Lifetime::Finite(t) => s.serialize_f64(*t),
        Lifetime::Unbounded => s.serialize_str("inf"),
    }
}

fn case_json<S: Serializer>(case: &LinkCase, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_char(case.label())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Hello(HelloMessage),
    LinkUp {
        a: u32,
        b: u32,
        #[serde(serialize_with = "case_json")]
        case: LinkCase,
        #[serde(serialize_with = "lifetime_json")]
        llt: Lifetime,
        predicted_break: Option<f64>,
    },
    LinkDown {
        a: u32,
        b: u32,
        established_at: f64,
        lifetime: f64,
        predicted_break: Option<f64>,
        prediction_error: Option<f64>,
    },
    TrajChange {
        uav: u32,
        from: MovementState,
        to: MovementState,
        x: f64,
        y: f64,
        heading: f64,
    },
    LltRecompute {
        a: u32,
        b: u32,
        trigger: RecomputeTrigger,
        changed: u32,
        #[serde(serialize_with = "case_json")]
        case: LinkCase,
        #[serde(serialize_with = "lifetime_json")]
        llt: Lifetime,
        predicted_break: Option<f64>,
    },
}

/// One line of the JSON-lines event log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogLine {
    pub t: f64,
    #[serde(flatten)]
    pub event: Event,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkRecord {
    /// Smaller id first.
    pub endpoints: (u32, u32),
    pub established_at: f64,
    pub current_llt_estimate: Lifetime,
    /// `(recompute_time, result)`; the first entry is the establishment.
    pub estimate_history: Vec<(f64, LltResult)>,
    pub terminated_at: Option<f64>,
}

impl LinkRecord {
    pub fn involves(&self, id: u32) -> bool {
        self.endpoints.0 == id || self.endpoints.1 == id
    }

    /// Absolute break time predicted by the latest estimate.
    pub fn predicted_break(&self) -> Option<f64> {
        self.estimate_history
            .last()
            .and_then(|(_, r)| r.predicted_break())
    }

    pub fn last_recompute_time(&self) -> f64 {
        self.estimate_history
            .last()
            .map_or(self.established_at, |(t, _)| *t)
    }
}

/// Re-estimates a live link's lifetime from the endpoints' current
/// trajectories, anchored at `now`. The new estimate replaces the old one.
pub fn recompute_llt<'a>(
    link: &'a mut LinkRecord,
    a: &Trajectory,
    b: &Trajectory,
    now: f64,
    range: f64,
    horizon: f64,
) -> Result<&'a LltResult, LltError> {
    let result = compute_llt(&a.reanchored(now), &b.reanchored(now), range, horizon)?;
    link.current_llt_estimate = result.llt;
    link.estimate_history.push((now, result));
    Ok(&link.estimate_history.last().expect("just pushed").1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub time: f64,
    pub uav: u32,
    pub position: Position,
    pub state: MovementState,
    pub center: Option<(f64, f64)>,
    pub radius: Option<f64>,
    pub heading: Option<f64>,
    pub speed: f64,
}

impl TraceRow {
    fn of(state: &UavState, time: f64) -> Self {
        let traj = &state.trajectory;
        let (center, radius, heading) = match &traj.path {
            Path::Curve(c) => (Some((c.center_x, c.center_y)), Some(c.radius), None),
            Path::Straight(s) => (None, None, Some(s.heading)),
        };
        Self {
            time,
            uav: state.id,
            position: traj.position_at_time(time),
            state: traj.movement_state(),
            center,
            radius,
            heading,
            speed: traj.speed(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub uav_count: usize,
    pub links: usize,
    pub breaks: usize,
    pub recomputes: usize,
    pub trajectory_changes: usize,
    /// Mean |predicted - actual| break time over broken links whose final
    /// estimate was bounded.
    pub mean_abs_prediction_error: f64,
    pub max_abs_prediction_error: f64,
    /// Broken links whose final estimate said the link would outlast the horizon.
    pub unpredicted_breaks: usize,
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub events: Vec<LogLine>,
    pub trace: Vec<TraceRow>,
    pub snapshots: Vec<LinkGraph<u32>>,
    pub links: Vec<LinkRecord>,
    pub summary: Summary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Kind {
    TrajChange,
    Hello,
    Snapshot,
}

#[derive(Debug, Clone, Copy)]
struct Scheduled {
    time: f64,
    kind: Kind,
    uav: u32,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scheduled {}

impl Ord for Scheduled {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.kind.cmp(&other.kind))
            .then(self.uav.cmp(&other.uav))
    }
}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Simulation<'d, D: MobilityDriver> {
    params: SimParams,
    driver: &'d mut D,
    states: Vec<UavState>,
    queue: BinaryHeap<Reverse<Scheduled>>,
    hello_count: Vec<u64>,
    heard: BTreeMap<(u32, u32), f64>,
    live: BTreeMap<(u32, u32), usize>,
    pending_delayed: BTreeSet<(u32, u32)>,
    links: Vec<LinkRecord>,
    events: Vec<LogLine>,
    trace: Vec<TraceRow>,
    snapshots: Vec<LinkGraph<u32>>,
    trajectory_changes: usize,
}

/// Runs the event loop from t = 0 to `params.duration`.
pub fn run_simulation<D: MobilityDriver>(
    params: &SimParams,
    driver: &mut D,
) -> Result<SimOutput, SimError> {
    params.validate()?;
    let states = driver.initial_states()?;
    if states.iter().enumerate().any(|(i, s)| s.id as usize != i) {
        return Err(SimError::Config("driver must number UAVs 0..n".into()));
    }
    let n = states.len();
    let mut sim = Simulation {
        params: *params,
        driver,
        states,
        queue: BinaryHeap::new(),
        hello_count: vec![0; n],
        heard: BTreeMap::new(),
        live: BTreeMap::new(),
        pending_delayed: BTreeSet::new(),
        links: Vec::new(),
        events: Vec::new(),
        trace: Vec::new(),
        snapshots: Vec::new(),
        trajectory_changes: 0,
    };
    sim.run()?;
    Ok(sim.finish())
}

impl<D: MobilityDriver> Simulation<'_, D> {
    fn schedule(&mut self, time: f64, kind: Kind, uav: u32) {
        if time <= self.params.duration {
            self.queue.push(Reverse(Scheduled { time, kind, uav }));
        }
    }

    fn hello_time(&self, uav: u32, k: u64) -> f64 {
        let n = self.states.len() as f64;
        uav as f64 * self.params.hello_interval / n + k as f64 * self.params.hello_interval
    }

    fn run(&mut self) -> Result<(), SimError> {
        for i in 0..self.states.len() {
            let s = self.states[i];
            self.trace.push(TraceRow::of(&s, 0.0));
            self.schedule(self.hello_time(s.id, 0), Kind::Hello, s.id);
            if s.next_change_at > 0.0 {
                self.schedule(s.next_change_at, Kind::TrajChange, s.id);
            }
        }
        self.schedule(0.0, Kind::Snapshot, 0);

        let mut clock = 0.0;
        while let Some(Reverse(ev)) = self.queue.pop() {
            self.detect_breaks(clock, ev.time);
            clock = ev.time;
            match ev.kind {
                Kind::TrajChange => self.on_traj_change(ev.uav, ev.time)?,
                Kind::Hello => self.on_hello(ev.uav, ev.time)?,
                Kind::Snapshot => self.on_snapshot(ev.uav, ev.time),
            }
        }
        self.detect_breaks(clock, self.params.duration);
        Ok(())
    }

    fn log(&mut self, t: f64, event: Event) {
        self.events.push(LogLine { t, event });
    }

    fn distance(&self, a: u32, b: u32, t: f64) -> f64 {
        self.states[a as usize]
            .position_at_time(t)
            .planar_distance(&self.states[b as usize].position_at_time(t))
    }

    /// Ground-truth break time of a live link within `(from, to]`.
    fn scan_break(&self, a: u32, b: u32, from: f64, to: f64) -> Option<f64> {
        let range = self.params.transmission_range;
        let dt = self.params.dt_check;
        let mut prev = from;
        let mut k = (from / dt).floor() as u64 + 1;
        let mut found = None;
        loop {
            let t = k as f64 * dt;
            if t >= to {
                break;
            }
            if self.distance(a, b, t) > range {
                found = Some((prev, t));
                break;
            }
            prev = t;
            k += 1;
        }
        if found.is_none() && to > from && self.distance(a, b, to) > range {
            found = Some((prev, to));
        }
        let (mut lo, mut hi) = found?;
        while hi - lo > BREAK_REFINEMENT {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.distance(a, b, mid) > range {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some(hi)
    }

    fn detect_breaks(&mut self, from: f64, to: f64) {
        if to <= from {
            return;
        }
        let mut downs: Vec<(f64, (u32, u32))> = self
            .live
            .keys()
            .filter_map(|&(a, b)| self.scan_break(a, b, from, to).map(|t| (t, (a, b))))
            .collect();
        downs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        for (t, key) in downs {
            self.terminate(key, t);
        }
    }

    fn terminate(&mut self, key: (u32, u32), t: f64) {
        let Some(idx) = self.live.remove(&key) else {
            return;
        };
        let link = &mut self.links[idx];
        link.terminated_at = Some(t);
        let predicted = link.predicted_break();
        let established_at = link.established_at;
        self.heard.remove(&(key.0, key.1));
        self.heard.remove(&(key.1, key.0));
        self.pending_delayed.remove(&(key.0, key.1));
        self.pending_delayed.remove(&(key.1, key.0));
        self.log(
            t,
            Event::LinkDown {
                a: key.0,
                b: key.1,
                established_at,
                lifetime: t - established_at,
                predicted_break: predicted,
                prediction_error: predicted.map(|p| p - t),
            },
        );
    }

    fn on_hello(&mut self, sender: u32, t: f64) -> Result<(), SimError> {
        let k = self.hello_count[sender as usize];
        self.hello_count[sender as usize] += 1;
        self.schedule(self.hello_time(sender, k + 1), Kind::Hello, sender);

        let state = self.states[sender as usize];
        let msg = HelloMessage::advertise(sender, &state.trajectory, t, k + 1);
        self.log(t, Event::Hello(msg));
        self.trace.push(TraceRow::of(&state, t));

        let interval = self.params.hello_interval;
        for receiver in 0..self.states.len() as u32 {
            if receiver == sender {
                continue;
            }
            if self.distance(sender, receiver, t) > self.params.transmission_range {
                self.heard.remove(&(sender, receiver));
                continue;
            }
            self.heard.insert((sender, receiver), t);
            let key = (sender.min(receiver), sender.max(receiver));
            if self.live.contains_key(&key) {
                if self.pending_delayed.remove(&(sender, receiver)) {
                    self.hello_delayed_estimate(&msg, receiver, t)?;
                }
            } else if self
                .heard
                .get(&(receiver, sender))
                .is_some_and(|&h| h >= t - interval * (1.0 + 1e-9))
            {
                self.establish(key, t)?;
            }
        }
        Ok(())
    }

    fn establish(&mut self, key: (u32, u32), t: f64) -> Result<(), SimError> {
        let a = self.states[key.0 as usize].trajectory.reanchored(t);
        let b = self.states[key.1 as usize].trajectory.reanchored(t);
        let result = match compute_llt(&a, &b, self.params.transmission_range, self.params.horizon)
        {
            Ok(r) => r,
            Err(LltError::LinkNotUp { .. }) => return Ok(()),
            Err(e) => return Err(e.into()),
        };
        self.log(
            t,
            Event::LinkUp {
                a: key.0,
                b: key.1,
                case: result.case_used,
                llt: result.llt,
                predicted_break: result.predicted_break(),
            },
        );
        self.live.insert(key, self.links.len());
        self.links.push(LinkRecord {
            endpoints: key,
            established_at: t,
            current_llt_estimate: result.llt,
            estimate_history: vec![(t, result)],
            terminated_at: None,
        });
        Ok(())
    }

    fn hello_delayed_estimate(
        &mut self,
        msg: &HelloMessage,
        receiver: u32,
        t: f64,
    ) -> Result<(), SimError> {
        let advertised = msg
            .to_trajectory()
            .map_err(|e| SimError::Config(format!("malformed hello: {e}")))?;
        let own = self.states[receiver as usize].trajectory.reanchored(t);
        let result = match compute_llt(
            &advertised,
            &own,
            self.params.transmission_range,
            self.params.horizon,
        ) {
            Ok(r) => r,
            Err(LltError::LinkNotUp { .. }) => return Ok(()),
            Err(e) => return Err(e.into()),
        };
        let (a, b) = (msg.sender.min(receiver), msg.sender.max(receiver));
        self.log(
            t,
            Event::LltRecompute {
                a,
                b,
                trigger: RecomputeTrigger::HelloDelayed,
                changed: msg.sender,
                case: result.case_used,
                llt: result.llt,
                predicted_break: result.predicted_break(),
            },
        );
        Ok(())
    }

    fn on_traj_change(&mut self, uav: u32, t: f64) -> Result<(), SimError> {
        let old = self.states[uav as usize];
        let new = self.driver.next_state(&old, t)?;
        if new.id != uav {
            return Err(SimError::Config(
                "driver returned a state for another UAV".into(),
            ));
        }
        let local = t - new.trajectory.epoch;
        let p = new.trajectory.position_at(local);
        self.log(
            t,
            Event::TrajChange {
                uav,
                from: old.trajectory.movement_state(),
                to: new.trajectory.movement_state(),
                x: p.x,
                y: p.y,
                heading: new.trajectory.heading_at(local),
            },
        );
        self.states[uav as usize] = new;
        self.trajectory_changes += 1;
        self.trace.push(TraceRow::of(&new, t));
        if new.next_change_at > t {
            self.schedule(new.next_change_at, Kind::TrajChange, uav);
        }

        let touched: Vec<(u32, u32)> = self
            .live
            .keys()
            .copied()
            .filter(|&(a, b)| a == uav || b == uav)
            .collect();
        for key in touched {
            let idx = self.live[&key];
            let a = self.states[key.0 as usize].trajectory;
            let b = self.states[key.1 as usize].trajectory;
            let (range, horizon) = (self.params.transmission_range, self.params.horizon);
            match recompute_llt(&mut self.links[idx], &a, &b, t, range, horizon) {
                Ok(result) => {
                    let event = Event::LltRecompute {
                        a: key.0,
                        b: key.1,
                        trigger: RecomputeTrigger::TrajChange,
                        changed: uav,
                        case: result.case_used,
                        llt: result.llt,
                        predicted_break: result.predicted_break(),
                    };
                    self.log(t, event);
                    let other = if key.0 == uav { key.1 } else { key.0 };
                    self.pending_delayed.insert((uav, other));
                }
                Err(LltError::LinkNotUp { .. }) => self.terminate(key, t),
                Err(e) => return Err(e.into()),
            }
        }
        Ok(())
    }

    fn on_snapshot(&mut self, k: u32, t: f64) {
        let mut graph = LinkGraph::new(t);
        for s in &self.states {
            graph.add_node(s.id);
        }
        for (&(a, b), &idx) in &self.live {
            let link = &self.links[idx];
            let remaining = match link.predicted_break() {
                Some(p) => Lifetime::Finite((p - t).max(0.0)),
                None => Lifetime::Unbounded,
            };
            graph.add_edge(a, b, remaining);
        }
        self.snapshots.push(graph);
        let next = (k + 1) as f64 * self.params.snapshot_interval;
        self.schedule(next, Kind::Snapshot, k + 1);
    }

    fn finish(self) -> SimOutput {
        let mut errors = Vec::new();
        let mut unpredicted = 0;
        let mut breaks = 0;
        for link in &self.links {
            if let Some(end) = link.terminated_at {
                breaks += 1;
                match link.predicted_break() {
                    Some(p) => errors.push((p - end).abs()),
                    None => unpredicted += 1,
                }
            }
        }
        let recomputes = self
            .links
            .iter()
            .map(|l| l.estimate_history.len() - 1)
            .sum();
        let summary = Summary {
            uav_count: self.states.len(),
            links: self.links.len(),
            breaks,
            recomputes,
            trajectory_changes: self.trajectory_changes,
            mean_abs_prediction_error: if errors.is_empty() {
                0.0
            } else {
                errors.iter().sum::<f64>() / errors.len() as f64
            },
            max_abs_prediction_error: errors.iter().copied().fold(0.0, f64::max),
            unpredicted_breaks: unpredicted,
        };
        SimOutput {
            events: self.events,
            trace: self.trace,
            snapshots: self.snapshots,
            links: self.links,
            summary,
        }
    }
}

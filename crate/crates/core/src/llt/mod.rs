//! Analytic link lifetime (LLT) for a UAV pair.
//!
//! For pairs where at least one UAV turns, the squared link distance is
//! expanded into a degree-12 Taylor polynomial over a trust window, the real
//! roots of `D^2(t) - range^2` inside the window are located, and each
//! candidate is polished by bisection on the exact distance function. When the
//! window holds no break the expansion is re-anchored at the window edge. A
//! pair of straight flyers is solved directly from its quadratic.

mod distance;
mod polynomial;

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use distance::{
    classify_case, squared_link_distance, taylor_link_polynomial, CaseGeometry, LinkCase,
    LinkDistance, TrigTerm, TRUST_ARGUMENT,
};
pub use polynomial::{find_real_roots, Polynomial};

use crate::kinematics::{Path, Trajectory};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LltError {
    #[error("link is not up: distance {distance:.3} m exceeds range {range:.3} m")]
    LinkNotUp { distance: f64, range: f64 },
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

/// Default expansion order for the trigonometric terms.
pub const TAYLOR_DEGREE: usize = 12;
/// Default look-ahead, in simulated seconds.
pub const DEFAULT_HORIZON: f64 = 3600.0;
/// Accepted break times satisfy `|D^2(t) - range^2| <= ROOT_RESIDUAL * range^2`.
pub const ROOT_RESIDUAL: f64 = 1e-9;

/// A link lifetime in seconds, or no break within the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Lifetime {
    Finite(f64),
    Unbounded,
}

impl Lifetime {
    pub fn finite(self) -> Option<f64> {
        match self {
            Lifetime::Finite(t) => Some(t),
            Lifetime::Unbounded => None,
        }
    }

    pub fn is_unbounded(self) -> bool {
        matches!(self, Lifetime::Unbounded)
    }

    /// Scales a finite value; unbounded stays unbounded.
    pub fn map(self, f: impl FnOnce(f64) -> f64) -> Lifetime {
        match self {
            Lifetime::Finite(t) => Lifetime::Finite(f(t)),
            Lifetime::Unbounded => Lifetime::Unbounded,
        }
    }
}

impl Eq for Lifetime {}

impl Ord for Lifetime {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Lifetime::Finite(a), Lifetime::Finite(b)) => a.total_cmp(b),
            (Lifetime::Finite(_), Lifetime::Unbounded) => Ordering::Less,
            (Lifetime::Unbounded, Lifetime::Finite(_)) => Ordering::Greater,
            (Lifetime::Unbounded, Lifetime::Unbounded) => Ordering::Equal,
        }
    }
}

impl PartialOrd for Lifetime {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Lifetime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lifetime::Finite(t) => write!(f, "{t}"),
            Lifetime::Unbounded => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LltResult {
    pub llt: Lifetime,
    pub case_used: LinkCase,
    /// Break time relative to `anchor_time`, when bounded.
    pub root: Option<f64>,
    /// `|D(root) - range|` in meters, when bounded.
    pub residual: Option<f64>,
    pub horizon_capped: bool,
    pub horizon: f64,
    /// Absolute simulation time the lifetime is measured from.
    pub anchor_time: f64,
    /// Number of expansion windows examined.
    pub windows: usize,
}

impl LltResult {
    /// Absolute time the link is predicted to break.
    pub fn predicted_break(&self) -> Option<f64> {
        self.llt.finite().map(|t| self.anchor_time + t)
    }

    /// The lifetime, with the horizon standing in for an unbounded result.
    pub fn llt_or_horizon(&self) -> f64 {
        self.llt.finite().unwrap_or(self.horizon)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub taylor_degree: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            taylor_degree: TAYLOR_DEGREE,
        }
    }
}

/// Picks the link-break time among candidate times.
///
/// Candidates outside `[0, trust_radius]` are dropped. Each remaining one is
/// bracketed on the exact function `exact_dist_sq(t) - range^2` and polished
/// by bisection; only upward crossings (into out-of-range) count. The earliest
/// qualifying time is returned.
pub fn select_root<F>(roots: &[f64], exact_dist_sq: F, range: f64, trust_radius: f64) -> Option<f64>
where
    F: Fn(f64) -> f64,
{
    let r2 = range * range;
    let f = |t: f64| exact_dist_sq(t) - r2;
    let scale = trust_radius.clamp(1.0, 1e6);
    let slack = 1e-9 * scale;
    let max_reach = (0.05 * trust_radius.min(1e6)).max(1e-3);

    let mut sorted: Vec<f64> = roots
        .iter()
        .copied()
        .filter(|&r| r.is_finite() && r >= -slack && r <= trust_radius + slack)
        .map(|r| r.clamp(0.0, trust_radius))
        .collect();
    sorted.sort_by(f64::total_cmp);

    for r in sorted {
        let fr = f(r);
        let bracket = if fr > 0.0 {
            // The break is at or before r: walk back to an in-range point.
            let mut step = slack.max(1e-12);
            loop {
                let lo = (r - step).max(0.0);
                if f(lo) <= 0.0 {
                    break Some((lo, r));
                }
                if lo == 0.0 {
                    break None;
                }
                step *= 4.0;
            }
        } else {
            let mut step = slack.max(1e-12);
            loop {
                let hi = (r + step).min(trust_radius);
                if f(hi) > 0.0 {
                    break Some((r, hi));
                }
                if hi >= trust_radius || step > max_reach {
                    break None;
                }
                step *= 4.0;
            }
        };
        let Some((lo, hi)) = bracket else { continue };
        let t = bisect_crossing(&f, lo, hi);
        if (exact_dist_sq(t) - r2).abs() <= ROOT_RESIDUAL * r2 {
            return Some(t);
        }
    }
    None
}

/// Shrinks `[lo, hi]` with `f(lo) <= 0 < f(hi)` to floating-point resolution.
fn bisect_crossing(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Lifetime of the link between two UAVs, measured from the later of the two
/// trajectory epochs.
pub fn compute_llt(
    a: &Trajectory,
    b: &Trajectory,
    range: f64,
    horizon: f64,
) -> Result<LltResult, LltError> {
    compute_llt_with(a, b, range, horizon, &SolverOptions::default())
}

pub fn compute_llt_with(
    a: &Trajectory,
    b: &Trajectory,
    range: f64,
    horizon: f64,
    options: &SolverOptions,
) -> Result<LltResult, LltError> {
    if !(range > 0.0 && range.is_finite()) {
        return Err(LltError::InvalidParameter("range must be positive"));
    }
    if !(horizon >= 0.0) {
        return Err(LltError::InvalidParameter("horizon must be non-negative"));
    }
    if options.taylor_degree < 2 {
        return Err(LltError::InvalidParameter(
            "taylor degree must be at least 2",
        ));
    }
    let case_used = classify_case(a, b);
    let anchor_time = a.epoch.max(b.epoch);
    // Solve in a canonical argument order so that swapping the pair cannot
    // change a single bit of the result.
    let (first, second) = if canonical_order(a, b) == Ordering::Greater {
        (b, a)
    } else {
        (a, b)
    };
    let first = first.reanchored(anchor_time);
    let second = second.reanchored(anchor_time);

    let d0 = first
        .position_at(0.0)
        .planar_distance(&second.position_at(0.0));
    if d0 > range {
        return Err(LltError::LinkNotUp {
            distance: d0,
            range,
        });
    }

    let unbounded = |windows| LltResult {
        llt: Lifetime::Unbounded,
        case_used,
        root: None,
        residual: None,
        horizon_capped: true,
        horizon,
        anchor_time,
        windows,
    };
    let bounded = |t: f64, windows| {
        let d = first.position_at(t).planar_distance(&second.position_at(t));
        LltResult {
            llt: Lifetime::Finite(t),
            case_used,
            root: Some(t),
            residual: Some((d - range).abs()),
            horizon_capped: false,
            horizon,
            anchor_time,
            windows,
        }
    };

    if case_used == LinkCase::C {
        return Ok(
            match straight_pair_break(&squared_link_distance(&first, &second), range) {
                Some(t) if t <= horizon => bounded(t, 0),
                _ => unbounded(0),
            },
        );
    }

    if never_leaves_range(&first, &second, range) {
        return Ok(unbounded(0));
    }

    let mut start = 0.0;
    let mut windows = 0;
    while start < horizon {
        let a_w = first.reanchored(anchor_time + start);
        let b_w = second.reanchored(anchor_time + start);
        let dist = squared_link_distance(&a_w, &b_w);
        let width = dist.trust_radius().min(horizon - start);
        windows += 1;

        // Work in s = t / width so the search interval is [0, 1].
        let gap = &dist.taylor(options.taylor_degree) - &Polynomial::constant(range * range);
        let scaled = gap.scale_argument(width);
        let mut candidates = scaled.roots_in(0.0, 1.0);
        candidates.extend(scaled.derivative().roots_in(0.0, 1.0));
        candidates.push(1.0);
        let candidates: Vec<f64> = candidates.into_iter().map(|s| s * width).collect();

        if let Some(t) = select_root(&candidates, |t| dist.eval(t), range, width) {
            return Ok(bounded(start + t, windows));
        }
        start += width;
    }
    Ok(unbounded(windows))
}

/// Larger root of the exact quadratic for a pair of straight flyers.
fn straight_pair_break(dist: &LinkDistance, range: f64) -> Option<f64> {
    let [c0, c1, c2] = dist.quadratic;
    let c0 = c0 - range * range;
    if c2 == 0.0 {
        return None;
    }
    let disc = (c1 * c1 - 4.0 * c2 * c0).max(0.0);
    let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
    if q == 0.0 {
        return Some(0.0);
    }
    let r1 = q / c2;
    let r2 = c0 / q;
    Some(r1.max(r2).max(0.0))
}

/// Cheap sufficient condition for the link to stay up forever.
fn never_leaves_range(a: &Trajectory, b: &Trajectory, range: f64) -> bool {
    match (&a.path, &b.path) {
        (Path::Curve(c1), Path::Curve(c2)) => {
            let offset = (c1.center_x - c2.center_x).hypot(c1.center_y - c2.center_y);
            if offset + c1.radius + c2.radius <= range {
                return true;
            }
            if c1.angular_velocity() == c2.angular_velocity() {
                // The relative position is the center offset plus a vector of
                // fixed length rotating at the common rate.
                let (s1, co1) = c1.initial_phase.sin_cos();
                let (s2, co2) = c2.initial_phase.sin_cos();
                let rel =
                    (c1.radius * co1 - c2.radius * co2).hypot(c1.radius * s1 - c2.radius * s2);
                return offset + rel <= range;
            }
            false
        }
        (Path::Curve(c), Path::Straight(s)) | (Path::Straight(s), Path::Curve(c)) => {
            s.speed == 0.0
                && (c.center_x - s.origin_x).hypot(c.center_y - s.origin_y) + c.radius <= range
        }
        _ => false,
    }
}

fn canonical_key(t: &Trajectory) -> [f64; 8] {
    match &t.path {
        Path::Curve(c) => [
            0.0,
            c.center_x,
            c.center_y,
            c.radius,
            c.speed,
            c.direction.sign(),
            c.initial_phase,
            c.altitude,
        ],
        Path::Straight(s) => [
            1.0, s.origin_x, s.origin_y, s.heading, s.speed, s.altitude, 0.0, 0.0,
        ],
    }
}

fn canonical_order(a: &Trajectory, b: &Trajectory) -> Ordering {
    let (ka, kb) = (canonical_key(a), canonical_key(b));
    ka.iter()
        .zip(kb.iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
        .then(a.epoch.total_cmp(&b.epoch))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{CurveTrajectory, Direction, StraightTrajectory};

    fn straight(x: f64, y: f64, h: f64, v: f64) -> Trajectory {
        Trajectory::straight(StraightTrajectory::new(x, y, h, v, 0.0).unwrap(), 0.0)
    }

    fn curve(cx: f64, cy: f64, r: f64, w: f64, theta: f64) -> Trajectory {
        let dir = if w < 0.0 {
            Direction::Clockwise
        } else {
            Direction::CounterClockwise
        };
        Trajectory::curve(
            CurveTrajectory::new(cx, cy, r, w.abs() * r, dir, theta, 0.0).unwrap(),
            0.0,
        )
    }

    #[test]
    fn straight_pair_example() {
        let r = compute_llt(
            &straight(0.0, 0.0, 0.0, 10.0),
            &straight(50.0, 0.0, 0.0, 20.0),
            100.0,
            3600.0,
        )
        .unwrap();
        assert_eq!(r.case_used, LinkCase::C);
        assert!((r.llt.finite().unwrap() - 5.0).abs() < 1e-12);
        assert!(r.residual.unwrap() < 1e-9);
    }

    #[test]
    fn rigid_rotation_is_unbounded() {
        let a = curve(0.0, 0.0, 200.0, 0.1, 0.0);
        let b = curve(0.0, 0.0, 200.0, 0.1, 0.4);
        let r = compute_llt(&a, &b, 100.0, 3600.0).unwrap();
        assert!(r.llt.is_unbounded() && r.horizon_capped);
        assert_eq!(r.horizon, 3600.0);
    }

    #[test]
    fn concentric_counter_rotation() {
        // D^2 = R1^2 + R2^2 - 2 R1 R2 cos(0.2 t); break when this reaches 120^2
        let a = curve(0.0, 0.0, 100.0, 0.1, 0.0);
        let b = curve(0.0, 0.0, 150.0, -0.1, 0.0);
        let r = compute_llt(&a, &b, 120.0, 3600.0).unwrap();
        let closed = ((100.0f64.powi(2) + 150.0f64.powi(2) - 120.0f64.powi(2))
            / (2.0 * 100.0 * 150.0))
            .acos()
            / 0.2;
        assert!(
            (r.llt.finite().unwrap() - closed).abs() < 1e-9,
            "{r:?} vs {closed}"
        );
        assert!((closed - 4.61).abs() < 0.01);
    }

    #[test]
    fn link_not_up() {
        let e = compute_llt(
            &straight(0.0, 0.0, 0.0, 10.0),
            &straight(500.0, 0.0, 0.0, 20.0),
            100.0,
            10.0,
        );
        assert!(matches!(e, Err(LltError::LinkNotUp { .. })));
    }

    #[test]
    fn horizon_caps_straight_pair() {
        let r = compute_llt(
            &straight(0.0, 0.0, 0.0, 10.0),
            &straight(50.0, 0.0, 0.0, 20.0),
            100.0,
            4.0,
        )
        .unwrap();
        assert!(r.llt.is_unbounded() && r.horizon_capped);
    }

    #[test]
    fn select_root_basics() {
        // distance = 50 + 10 t, range 100: crossing at 5
        let d2 = |t: f64| (50.0 + 10.0 * t) * (50.0 + 10.0 * t);
        assert!((select_root(&[-3.0, 5.0, 7.0], d2, 100.0, 100.0).unwrap() - 5.0).abs() < 1e-9);
        assert_eq!(select_root(&[-3.0, -1.0], d2, 100.0, 100.0), None);
        // outside the trust radius
        assert_eq!(select_root(&[5.0], d2, 100.0, 4.0), None);
    }

    #[test]
    fn select_root_skips_entering_crossing() {
        // flyby: out of range, closes to 30 m at t = 10, then leaves
        let a = straight(-100.0, 30.0, 0.0, 10.0);
        let b = straight(0.0, 0.0, 0.0, 0.0);
        let dist = squared_link_distance(&a, &b);
        let poly = &dist.taylor(12) - &Polynomial::constant(50.0 * 50.0);
        let roots = find_real_roots(&poly).unwrap();
        assert_eq!(roots.len(), 2);
        assert!(roots[0] > 0.0);
        let t = select_root(&roots, |t| dist.eval(t), 50.0, 100.0).unwrap();
        assert!((t - 14.0).abs() < 1e-9, "{t}");
    }

    #[test]
    fn lifetime_ordering() {
        assert!(Lifetime::Unbounded > Lifetime::Finite(1e300));
        assert!(Lifetime::Finite(2.0) > Lifetime::Finite(1.0));
        assert_eq!(Lifetime::Unbounded.to_string(), "inf");
    }

    #[test]
    fn argument_swap_is_exact() {
        let a = curve(10.0, -40.0, 300.0, 0.12, 1.0);
        let b = curve(-200.0, 90.0, 450.0, -0.08, -2.0);
        let s = straight(40.0, 20.0, 2.0, 35.0);
        let ab = compute_llt(&a, &b, 900.0, 600.0).unwrap();
        let ba = compute_llt(&b, &a, 900.0, 600.0).unwrap();
        assert_eq!(ab.llt, ba.llt);
        let as_ = compute_llt(&a, &s, 900.0, 600.0).unwrap();
        let sa = compute_llt(&s, &a, 900.0, 600.0).unwrap();
        assert_eq!(as_.llt, sa.llt);
        assert_eq!(as_.case_used, LinkCase::B { curve_first: true });
        assert_eq!(sa.case_used, LinkCase::B { curve_first: false });
    }
}

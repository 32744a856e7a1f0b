//! Brute-force ground truth: time-stepped link lifetimes and exhaustive route
//! enumeration. Deliberately simple; shares nothing with the analytic solver
//! beyond `Trajectory::position_at`.

use std::fmt::Debug;

use crate::kinematics::Trajectory;
use crate::llt::{Lifetime, LltError};
use crate::routing::{LinkGraph, Route, RoutingError, MAX_ENUMERATION_NODES};

/// Time step for pairwise validation.
pub const DEFAULT_DT: f64 = 1e-3;
/// Width the bracketing interval is bisected down to.
pub const BISECTION_TOLERANCE: f64 = 1e-9;

/// First time the planar distance exceeds `range`, measured from the later of
/// the two epochs, found by stepping `dt` and bisecting the bracketing step.
pub fn brute_force_llt(
    a: &Trajectory,
    b: &Trajectory,
    range: f64,
    dt: f64,
    horizon: f64,
) -> Result<Lifetime, LltError> {
    if !(dt > 0.0) {
        return Err(LltError::InvalidParameter("dt must be positive"));
    }
    let start = a.epoch.max(b.epoch);
    let dist = |t: f64| {
        a.position_at_time(start + t)
            .planar_distance(&b.position_at_time(start + t))
    };
    let d0 = dist(0.0);
    if d0 > range {
        return Err(LltError::LinkNotUp {
            distance: d0,
            range,
        });
    }
    let mut prev = 0.0;
    let mut k: u64 = 1;
    loop {
        let t = (k as f64 * dt).min(horizon);
        if dist(t) > range {
            let (mut lo, mut hi) = (prev, t);
            while hi - lo > BISECTION_TOLERANCE {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if dist(mid) > range {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(Lifetime::Finite(0.5 * (lo + hi)));
        }
        if t >= horizon {
            return Ok(Lifetime::Unbounded);
        }
        prev = t;
        k += 1;
    }
}

/// Exhaustive search over all simple paths, with the same tie-break rule as
/// [`crate::routing::max_min_route`].
pub fn enumerate_best_route<N: Ord + Clone + Debug>(
    graph: &LinkGraph<N>,
    src: &N,
    dst: &N,
) -> Result<Option<Route<N>>, RoutingError> {
    if graph.node_count() > MAX_ENUMERATION_NODES {
        return Err(RoutingError::TooLarge(graph.node_count()));
    }
    graph.check_endpoints(src, dst)?;
    let adj = graph.adjacency();
    let mut best: Option<Route<N>> = None;
    let mut path = vec![src.clone()];
    extend(&adj, dst, &mut path, Lifetime::Unbounded, &mut best);
    Ok(best)
}

fn extend<N: Ord + Clone>(
    adj: &std::collections::BTreeMap<N, Vec<(N, Lifetime)>>,
    dst: &N,
    path: &mut Vec<N>,
    bottleneck: Lifetime,
    best: &mut Option<Route<N>>,
) {
    let last = path.last().expect("path starts with the source").clone();
    if &last == dst {
        let better = match best {
            None => true,
            Some(b) => {
                bottleneck > b.bottleneck_llt
                    || (bottleneck == b.bottleneck_llt
                        && (path.len() < b.nodes.len()
                            || (path.len() == b.nodes.len() && *path < b.nodes)))
            }
        };
        if better {
            *best = Some(Route {
                nodes: path.clone(),
                bottleneck_llt: bottleneck,
            });
        }
        return;
    }
    for (next, w) in &adj[&last] {
        if path.contains(next) {
            continue;
        }
        path.push(next.clone());
        extend(adj, dst, path, bottleneck.min(*w), best);
        path.pop();
    }
}

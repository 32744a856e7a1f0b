//! Squared planar link distance between two UAVs as a closed-form function of
//! time, and its Taylor polynomial.
//!
//! Every case reduces to a sum of
//!
//! ```text
//! c0 + c1 t + c2 t^2 + sum_k A_k t^(m_k) cos(p_k + f_k t),   m_k in {0, 1}
//! ```
//!
//! Case A (two arcs) uses the centre-offset form with `a`, `b`, the two signs
//! and `alpha`. Case B (arc + ray) is derived from the difference of the two
//! position expressions; its ray-only term carries the offset magnitude
//! `sqrt(a^2 + b^2)` and the sign of the X gap. Case C (two rays) is an exact
//! quadratic. The altitude difference is not part of the link distance.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::polynomial::Polynomial;
use crate::kinematics::{CurveTrajectory, Path, StraightTrajectory, Trajectory};

/// Which closed form applies to a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkCase {
    /// Both UAVs turn.
    A,
    /// One turns, the other flies straight. `curve_first` records whether the
    /// first argument was the turning UAV.
    B { curve_first: bool },
    /// Both fly straight.
    C,
}

impl LinkCase {
    pub fn label(self) -> char {
        match self {
            LinkCase::A => 'A',
            LinkCase::B { .. } => 'B',
            LinkCase::C => 'C',
        }
    }
}

pub fn classify_case(a: &Trajectory, b: &Trajectory) -> LinkCase {
    match (&a.path, &b.path) {
        (Path::Curve(_), Path::Curve(_)) => LinkCase::A,
        (Path::Curve(_), Path::Straight(_)) => LinkCase::B { curve_first: true },
        (Path::Straight(_), Path::Curve(_)) => LinkCase::B { curve_first: false },
        (Path::Straight(_), Path::Straight(_)) => LinkCase::C,
    }
}

/// Offset between two reference points split into magnitudes, signs and the
/// angle `alpha = acos(a / sqrt(a^2 + b^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseGeometry {
    pub a: f64,
    pub b: f64,
    pub sign1: f64,
    pub sign2: f64,
    pub alpha: f64,
}

impl CaseGeometry {
    /// From the signed gaps `dx`, `dy`. A zero gap takes sign +1; its term
    /// vanishes anyway because it is multiplied by the zero magnitude.
    pub fn from_offset(dx: f64, dy: f64) -> Self {
        let a = dx.abs();
        let b = dy.abs();
        let sign1 = if dx < 0.0 { -1.0 } else { 1.0 };
        let sign2 = if dy < 0.0 { -1.0 } else { 1.0 };
        let rho = a.hypot(b);
        let alpha = if rho == 0.0 {
            0.0
        } else {
            (a / rho).clamp(0.0, 1.0).acos()
        };
        Self {
            a,
            b,
            sign1,
            sign2,
            alpha,
        }
    }

    pub fn magnitude(&self) -> f64 {
        self.a.hypot(self.b)
    }

    /// `sign1 * sign2 * alpha`, the phase offset used in the cosine terms.
    pub fn signed_alpha(&self) -> f64 {
        self.sign1 * self.sign2 * self.alpha
    }
}

/// `amplitude * t^t_power * cos(phase + frequency * t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigTerm {
    pub amplitude: f64,
    pub t_power: u32,
    pub phase: f64,
    pub frequency: f64,
}

impl TrigTerm {
    fn eval(&self, t: f64) -> f64 {
        let base = self.amplitude * (self.phase + self.frequency * t).cos();
        if self.t_power == 1 {
            base * t
        } else {
            base
        }
    }

    /// Degree-`order` Taylor expansion of the cosine about t = 0, times t^m.
    fn taylor(&self, order: usize) -> Vec<f64> {
        let (s, c) = self.phase.sin_cos();
        // d^n/dx^n cos(p + x) at x = 0 cycles through cos, -sin, -cos, sin
        let cycle = [c, -s, -c, s];
        let shift = self.t_power as usize;
        let mut coeffs = vec![0.0; order + 1 + shift];
        let mut factor = self.amplitude;
        for n in 0..=order {
            if n > 0 {
                factor *= self.frequency / n as f64;
            }
            if factor == 0.0 {
                break;
            }
            coeffs[n + shift] = factor * cycle[n % 4];
        }
        coeffs
    }
}

/// Closed-form squared planar distance `D^2(t)`, `t` measured from `epoch`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkDistance {
    pub case: LinkCase,
    pub epoch: f64,
    /// `c0 + c1 t + c2 t^2`.
    pub quadratic: [f64; 3],
    pub terms: Vec<TrigTerm>,
}

impl LinkDistance {
    pub fn eval(&self, t: f64) -> f64 {
        let [c0, c1, c2] = self.quadratic;
        let trig: f64 = self.terms.iter().map(|term| term.eval(t)).sum();
        c0 + t * (c1 + t * c2) + trig
    }

    /// Largest angular rate among the non-vanishing cosine terms.
    pub fn max_frequency(&self) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.amplitude != 0.0)
            .fold(0.0, |m, t| m.max(t.frequency.abs()))
    }

    /// Window over which the degree-12 expansion stays accurate: no cosine
    /// argument moves by more than pi/4. Infinite when nothing rotates.
    pub fn trust_radius(&self) -> f64 {
        let w = self.max_frequency();
        if w == 0.0 {
            f64::INFINITY
        } else {
            TRUST_ARGUMENT / w
        }
    }

    /// Taylor polynomial about `t = 0`; each cosine is expanded to `degree`.
    pub fn taylor(&self, degree: usize) -> Polynomial {
        let mut coeffs = vec![0.0; (degree + 2).max(3)];
        coeffs[0] = self.quadratic[0];
        coeffs[1] = self.quadratic[1];
        coeffs[2] += self.quadratic[2];
        for term in &self.terms {
            for (i, c) in term.taylor(degree).into_iter().enumerate() {
                coeffs[i] += c;
            }
        }
        Polynomial::new(coeffs)
    }
}

/// Maximum cosine-argument change inside one expansion window.
pub const TRUST_ARGUMENT: f64 = PI / 4.0;

/// Exact squared planar distance between the two UAVs. When the anchors
/// differ, both are re-expressed at the later epoch.
pub fn squared_link_distance(a: &Trajectory, b: &Trajectory) -> LinkDistance {
    let epoch = a.epoch.max(b.epoch);
    let a = if a.epoch == epoch {
        *a
    } else {
        a.reanchored(epoch)
    };
    let b = if b.epoch == epoch {
        *b
    } else {
        b.reanchored(epoch)
    };
    let case = classify_case(&a, &b);
    let (quadratic, terms) = match (&a.path, &b.path) {
        (Path::Curve(c1), Path::Curve(c2)) => both_curves(c1, c2),
        (Path::Curve(c), Path::Straight(s)) | (Path::Straight(s), Path::Curve(c)) => {
            curve_and_straight(c, s)
        }
        (Path::Straight(s1), Path::Straight(s2)) => (both_straight(s1, s2), Vec::new()),
    };
    LinkDistance {
        case,
        epoch,
        quadratic,
        terms,
    }
}

/// Taylor polynomial of the squared link distance; exact for case C.
pub fn taylor_link_polynomial(a: &Trajectory, b: &Trajectory, degree: usize) -> Polynomial {
    squared_link_distance(a, b).taylor(degree.max(2))
}

fn both_curves(c1: &CurveTrajectory, c2: &CurveTrajectory) -> ([f64; 3], Vec<TrigTerm>) {
    let g = CaseGeometry::from_offset(c1.center_x - c2.center_x, c1.center_y - c2.center_y);
    let rho = g.magnitude();
    let (w1, w2) = (c1.angular_velocity(), c2.angular_velocity());
    let (r1, r2) = (c1.radius, c2.radius);
    let constant = g.a * g.a + g.b * g.b + r1 * r1 + r2 * r2;
    let terms = vec![
        TrigTerm {
            amplitude: -2.0 * r1 * r2,
            t_power: 0,
            phase: c1.initial_phase - c2.initial_phase,
            frequency: w1 - w2,
        },
        TrigTerm {
            amplitude: 2.0 * g.sign1 * r1 * rho,
            t_power: 0,
            phase: c1.initial_phase - g.signed_alpha(),
            frequency: w1,
        },
        TrigTerm {
            amplitude: -2.0 * g.sign1 * r2 * rho,
            t_power: 0,
            phase: c2.initial_phase - g.signed_alpha(),
            frequency: w2,
        },
    ];
    ([constant, 0.0, 0.0], terms)
}

fn curve_and_straight(c: &CurveTrajectory, s: &StraightTrajectory) -> ([f64; 3], Vec<TrigTerm>) {
    let g = CaseGeometry::from_offset(c.center_x - s.origin_x, c.center_y - s.origin_y);
    let rho = g.magnitude();
    let w = c.angular_velocity();
    let v = s.speed;
    let r = c.radius;
    let constant = g.a * g.a + g.b * g.b + r * r;
    let terms = vec![
        TrigTerm {
            amplitude: 2.0 * g.sign1 * r * rho,
            t_power: 0,
            phase: c.initial_phase - g.signed_alpha(),
            frequency: w,
        },
        TrigTerm {
            amplitude: -2.0 * r * v,
            t_power: 1,
            phase: c.initial_phase - s.heading,
            frequency: w,
        },
        TrigTerm {
            amplitude: -2.0 * g.sign1 * rho * v,
            t_power: 1,
            phase: s.heading - g.signed_alpha(),
            frequency: 0.0,
        },
    ];
    ([constant, 0.0, v * v], terms)
}

fn both_straight(s1: &StraightTrajectory, s2: &StraightTrajectory) -> [f64; 3] {
    let dx = s1.origin_x - s2.origin_x;
    let dy = s1.origin_y - s2.origin_y;
    let (v1, v2) = (s1.speed, s2.speed);
    let (sin1, cos1) = s1.heading.sin_cos();
    let (sin2, cos2) = s2.heading.sin_cos();
    let quad = v1 * v1 + v2 * v2 - 2.0 * v1 * v2 * (s1.heading - s2.heading).cos();
    let lin = 2.0 * v1 * (dx * cos1 + dy * sin1) - 2.0 * v2 * (dx * cos2 + dy * sin2);
    [dx * dx + dy * dy, lin, quad.max(0.0)]
}

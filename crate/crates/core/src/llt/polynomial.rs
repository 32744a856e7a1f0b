//! Dense real polynomials and real-root isolation.
//!
//! Roots are isolated recursively: the real roots of `p'` split the search
//! interval into pieces on which `p` is monotone, and each piece holds at most
//! one root, found by Newton iteration safeguarded with bisection.

use std::ops::{Add, Mul, Sub};

use super::LltError;

/// Coefficients in ascending degree order.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// Coefficients in ascending order; empty for the zero polynomial.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Running-error bound for Horner evaluation at `x`.
    fn eval_error_bound(&self, x: f64) -> f64 {
        let ax = x.abs();
        let magnitude = self
            .coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * ax + c.abs());
        4.0 * (self.coeffs.len() as f64 + 1.0) * f64::EPSILON * magnitude
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    /// `q(s) = p(scale * s)`.
    pub fn scale_argument(&self, scale: f64) -> Polynomial {
        let mut factor = 1.0;
        Polynomial::new(
            self.coeffs
                .iter()
                .map(|&c| {
                    let v = c * factor;
                    factor *= scale;
                    v
                })
                .collect(),
        )
    }

    /// All real roots in ascending order.
    pub fn real_roots(&self) -> Result<Vec<f64>, LltError> {
        if self.is_zero() {
            return Err(LltError::ZeroPolynomial);
        }
        let bound = self.root_bound();
        Ok(self.roots_in(-bound, bound))
    }

    /// Fujiwara's bound on the magnitude of every complex root.
    fn root_bound(&self) -> f64 {
        let n = self.degree();
        if n == 0 {
            return 1.0;
        }
        let lead = self.coeffs[n];
        let mut bound: f64 = 0.0;
        for k in 1..=n {
            let mut ratio = (self.coeffs[n - k] / lead).abs();
            if k == n {
                ratio /= 2.0;
            }
            bound = bound.max(ratio.powf(1.0 / k as f64));
        }
        let bound = 2.0 * bound;
        if bound.is_finite() {
            bound.max(f64::MIN_POSITIVE)
        } else {
            f64::MAX / 4.0
        }
    }

    /// Real roots inside the closed interval `[lo, hi]`, ascending.
    ///
    /// Double roots are reported once, and only when the polynomial vanishes
    /// at the turning point to within evaluation roundoff.
    pub fn roots_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        if self.is_zero() || lo > hi {
            return Vec::new();
        }
        match self.degree() {
            0 => Vec::new(),
            1 => {
                let r = -self.coeffs[0] / self.coeffs[1];
                if (lo..=hi).contains(&r) {
                    vec![r]
                } else {
                    Vec::new()
                }
            }
            _ => {
                let deriv = self.derivative();
                let critical = deriv.roots_in(lo, hi);
                let mut knots = Vec::with_capacity(critical.len() + 2);
                knots.push(lo);
                knots.extend(critical.iter().copied().filter(|&c| c > lo && c < hi));
                knots.push(hi);

                let mut roots = Vec::new();
                let values: Vec<f64> = knots.iter().map(|&x| self.eval(x)).collect();
                for i in 0..knots.len() {
                    let (x, v) = (knots[i], values[i]);
                    let interior = i > 0 && i + 1 < knots.len();
                    if v == 0.0 || (interior && v.abs() <= self.eval_error_bound(x)) {
                        roots.push(x);
                    }
                    if i + 1 < knots.len() {
                        let (x1, v1) = (knots[i + 1], values[i + 1]);
                        if v != 0.0 && v1 != 0.0 && (v < 0.0) != (v1 < 0.0) {
                            roots.push(self.refine_monotone(&deriv, x, x1, v));
                        }
                    }
                }
                roots.sort_by(f64::total_cmp);
                roots.dedup_by(|a, b| (*a - *b).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs()));
                roots
            }
        }
    }

    /// Finds the single root of a monotone stretch with a sign change.
    fn refine_monotone(&self, deriv: &Polynomial, mut a: f64, mut b: f64, value_at_a: f64) -> f64 {
        let a_negative = value_at_a < 0.0;
        let mut x = 0.5 * (a + b);
        for _ in 0..2200 {
            let fx = self.eval(x);
            if fx == 0.0 {
                return x;
            }
            if (fx < 0.0) == a_negative {
                a = x;
            } else {
                b = x;
            }
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let d = deriv.eval(x);
            let newton = x - fx / d;
            // Newton only while it stays well inside the bracket; widths shrink
            // at least geometrically through the bisection fallback.
            x = if d != 0.0 && newton > a && newton < b && (newton - x).abs() < 0.5 * (b - a) {
                newton
            } else {
                mid
            };
            if b - a <= 2.0 * f64::EPSILON * a.abs().max(b.abs()) {
                break;
            }
        }
        // pick whichever endpoint/interior point has the smaller residual
        [a, x, b]
            .into_iter()
            .min_by(|p, q| self.eval(*p).abs().total_cmp(&self.eval(*q).abs()))
            .unwrap_or(x)
    }
}

/// All real roots of `p`, ascending.
pub fn find_real_roots(p: &Polynomial) -> Result<Vec<f64>, LltError> {
    p.real_roots()
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new(
            (0..n)
                .map(|i| {
                    self.coeffs.get(i).copied().unwrap_or(0.0)
                        + rhs.coeffs.get(i).copied().unwrap_or(0.0)
                })
                .collect(),
        )
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new(
            (0..n)
                .map(|i| {
                    self.coeffs.get(i).copied().unwrap_or(0.0)
                        - rhs.coeffs.get(i).copied().unwrap_or(0.0)
                })
                .collect(),
        )
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn from_roots(roots: &[f64]) -> Polynomial {
        roots.iter().fold(Polynomial::constant(1.0), |acc, &r| {
            &acc * &Polynomial::new(vec![-r, 1.0])
        })
    }

    #[test]
    fn simple_quadratic() {
        let p = Polynomial::new(vec![-4.0, 0.0, 1.0]);
        let r = find_real_roots(&p).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0] + 2.0).abs() < 1e-14 && (r[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn constants_and_zero() {
        assert!(find_real_roots(&Polynomial::constant(5.0))
            .unwrap()
            .is_empty());
        assert_eq!(
            find_real_roots(&Polynomial::zero()),
            Err(LltError::ZeroPolynomial)
        );
        assert_eq!(
            find_real_roots(&Polynomial::new(vec![0.0, 0.0])),
            Err(LltError::ZeroPolynomial)
        );
    }

    #[test]
    fn complex_pairs_are_excluded() {
        // (t^2 + 1)(t - 3)
        let p = &Polynomial::new(vec![1.0, 0.0, 1.0]) * &Polynomial::new(vec![-3.0, 1.0]);
        let r = find_real_roots(&p).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn double_root_reported_once() {
        let p = from_roots(&[1.5, 1.5, -2.0]);
        let r = find_real_roots(&p).unwrap();
        assert_eq!(r.len(), 2, "{r:?}");
        assert!((r[0] + 2.0).abs() < 1e-9);
        assert!((r[1] - 1.5).abs() < 1e-6);
    }

    #[test]
    fn recovers_constructed_roots() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let n = rng.gen_range(1..=9);
            let mut roots: Vec<f64> = Vec::new();
            while roots.len() < n {
                let r = rng.gen_range(-10.0..10.0);
                if roots.iter().all(|&q: &f64| (q - r).abs() >= 0.1) {
                    roots.push(r);
                }
            }
            roots.sort_by(f64::total_cmp);
            let p = from_roots(&roots);
            let got = find_real_roots(&p).unwrap();
            assert_eq!(got.len(), roots.len(), "{roots:?} -> {got:?}");
            let scale = p.max_abs_coefficient();
            for (g, r) in got.iter().zip(&roots) {
                assert!((g - r).abs() <= 1e-6, "{roots:?} -> {got:?}");
                assert!(p.eval(*g).abs() <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn interval_restriction() {
        let p = from_roots(&[-1.0, 0.25, 0.75, 3.0]);
        let r = p.roots_in(0.0, 1.0);
        assert_eq!(r.len(), 2);
        assert!((r[0] - 0.25).abs() < 1e-12 && (r[1] - 0.75).abs() < 1e-12);
        // endpoint roots are included
        let r = p.roots_in(0.25, 0.5);
        assert_eq!(r.len(), 1);
    }

    #[test]
    fn scaling_maps_roots() {
        let p = from_roots(&[2.0, 6.0]);
        let q = p.scale_argument(2.0);
        let r = find_real_roots(&q).unwrap();
        assert!((r[0] - 1.0).abs() < 1e-12 && (r[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn trailing_zeros_trimmed() {
        let p = Polynomial::new(vec![1.0, 2.0, 0.0, 0.0]);
        assert_eq!(p.degree(), 1);
        assert_eq!(p.derivative().coefficients(), &[2.0]);
    }
}

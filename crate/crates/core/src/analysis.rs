//! Closed-form analysis of two-periodic measures for `k = 2`.
//!
//! Dividing the numerator of `f(f(z)) - z` by the numerator of `f(z) - z`
//! leaves a quadratic `a z^2 + b z + c` whose coefficients are explicit
//! polynomials in `theta` and `r`. Its positive roots are the two-cycle
//! points of `f`. Since `a, c > 0`, both roots are positive exactly when
//! `b < 0` and the discriminant `D = b^2 - 4ac` is nonnegative.

use num_traits::{FromPrimitive, Num};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::check_weights;
use crate::solvers::two_cycles;

/// `(coefficient, power of theta, power of r)` in printed order.
type Monomial = (i64, usize, usize);

const A_TERMS: [Monomial; 6] = [(1, 6, 0), (2, 4, 1), (1, 2, 2), (1, 0, 4), (2, 1, 3), (2, 3, 2)];
const B_TERMS: [Monomial; 10] = [
    (2, 7, 0),
    (6, 5, 1),
    (6, 3, 2),
    (6, 1, 3),
    (-4, 4, 0),
    (1, 4, 2),
    (8, 2, 2),
    (2, 2, 3),
    (8, 4, 1),
    (1, 0, 4),
];
const C_TERMS: [Monomial; 9] = [
    (4, 2, 2),
    (4, 6, 1),
    (1, 0, 4),
    (6, 4, 2),
    (4, 2, 3),
    (1, 8, 0),
    (4, 5, 1),
    (8, 3, 2),
    (4, 1, 3),
];

/// Relative threshold for treating the discriminant as zero.
pub const DISCRIMINANT_ZERO_TOL: f64 = 1e-12;

fn eval_terms<T: Num + Clone + FromPrimitive>(terms: &[Monomial], theta: &T, r: &T) -> T {
    terms.iter().fold(T::zero(), |acc, &(c, tp, rp)| {
        let coef = T::from_i64(c).expect("small integer coefficient");
        acc + coef * num_traits::pow(theta.clone(), tp) * num_traits::pow(r.clone(), rp)
    })
}

/// The quadratic's coefficient polynomials evaluated in any numeric type
/// (floats here, exact rationals in [`crate::exactpoly`]).
pub fn printed_coeffs<T: Num + Clone + FromPrimitive>(theta: &T, r: &T) -> [T; 3] {
    [
        eval_terms(&A_TERMS, theta, r),
        eval_terms(&B_TERMS, theta, r),
        eval_terms(&C_TERMS, theta, r),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl QuadraticCoeffs {
    pub fn discriminant(&self) -> f64 {
        self.b * self.b - 4.0 * self.a * self.c
    }

    /// `|D| <= 1e-12 * max(b^2, |4ac|)`.
    pub fn discriminant_is_zero(&self) -> bool {
        let scale = (self.b * self.b).max((4.0 * self.a * self.c).abs());
        self.discriminant().abs() <= DISCRIMINANT_ZERO_TOL * scale
    }

    /// Real roots in ascending order, computed without cancellation:
    /// `q = -(b + sign(b) sqrt(D)) / 2`, roots `q / a` and `c / q`.
    pub fn real_roots(&self) -> Vec<f64> {
        let d = if self.discriminant_is_zero() { 0.0 } else { self.discriminant() };
        if d < 0.0 {
            return Vec::new();
        }
        let sign = if self.b < 0.0 { -1.0 } else { 1.0 };
        let q = -0.5 * (self.b + sign * d.sqrt());
        if q == 0.0 {
            return vec![0.0, 0.0];
        }
        let mut roots = vec![q / self.a, self.c / q];
        roots.sort_by(f64::total_cmp);
        roots
    }

    pub fn eval(&self, z: f64) -> f64 {
        (self.a * z + self.b) * z + self.c
    }
}

pub fn quadratic_coeffs(theta: f64, r: f64) -> Result<QuadraticCoeffs> {
    check_weights(theta, r)?;
    let [a, b, c] = printed_coeffs(&theta, &r);
    Ok(QuadraticCoeffs { a, b, c })
}

/// `D = b^2 - 4ac`.
pub fn discriminant(theta: f64, r: f64) -> Result<f64> {
    Ok(quadratic_coeffs(theta, r)?.discriminant())
}

/// The literal general-form expression `b^2 - a c` (no factor 4). Kept for
/// comparison only; the classification uses [`discriminant`].
pub fn discriminant_without_factor_four(theta: f64, r: f64) -> Result<f64> {
    let q = quadratic_coeffs(theta, r)?;
    Ok(q.b * q.b - q.a * q.c)
}

/// On `r = theta^2`: `D = -16 theta^8 (theta^2 - 1)^2 (3 theta^4 + 10 theta^3 + 6 theta^2 - 1)`.
pub fn discriminant_on_slice(theta: f64) -> f64 {
    let t2 = theta * theta;
    -16.0 * t2.powi(4) * (t2 - 1.0).powi(2) * threshold_quartic(theta)
}

/// On `r = theta^2`: `b = 4 theta^4 (theta^4 + 5 theta^3 + 4 theta^2 - 1)`.
pub fn b_on_slice(theta: f64) -> f64 {
    4.0 * theta.powi(4) * (((theta + 5.0) * theta + 4.0) * theta * theta - 1.0)
}

/// `3 theta^4 + 10 theta^3 + 6 theta^2 - 1`.
pub fn threshold_quartic(theta: f64) -> f64 {
    (((3.0 * theta + 10.0) * theta + 6.0) * theta) * theta - 1.0
}

/// Root of [`threshold_quartic`] in `(0, 1)` (approximately 0.32359),
/// bisected until the bracket stops shrinking.
pub fn theta_d() -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = threshold_quartic(mid);
        if v == 0.0 {
            return mid;
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if threshold_quartic(lo).abs() <= threshold_quartic(hi).abs() {
        lo
    } else {
        hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// `D > 0, b < 0`: at least two two-periodic measures.
    TwoPeriodic,
    /// `D = 0, b < 0`.
    OnePeriodic,
    None,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::TwoPeriodic => "two_periodic",
            Self::OnePeriodic => "one_periodic",
            Self::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint {
    pub theta: f64,
    pub r: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub b: f64,
    pub classification: Classification,
}

pub fn classify_point(theta: f64, r: f64) -> Result<PhasePoint> {
    let q = quadratic_coeffs(theta, r)?;
    let d = q.discriminant();
    let classification = if q.b >= 0.0 {
        Classification::None
    } else if q.discriminant_is_zero() {
        Classification::OnePeriodic
    } else if d > 0.0 {
        Classification::TwoPeriodic
    } else {
        Classification::None
    };
    Ok(PhasePoint { theta, r, d, b: q.b, classification })
}

/// Inclusive linear range `min:max:steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, steps: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min > 0.0 && max >= min) {
            return Err(Error::InvalidParameter(format!("range {min}:{max} must be positive and ordered")));
        }
        if steps < 2 {
            return Err(Error::InvalidParameter(format!("range needs at least 2 steps, got {steps}")));
        }
        Ok(Self { min, max, steps })
    }

    pub fn values(&self) -> Vec<f64> {
        let span = self.max - self.min;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.max
                } else {
                    self.min + span * i as f64 / (self.steps - 1) as f64
                }
            })
            .collect()
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("expected min:max:steps, got {s:?}"));
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let min = parts[0].trim().parse().map_err(|_| bad())?;
        let max = parts[1].trim().parse().map_err(|_| bad())?;
        let steps = parts[2].trim().parse().map_err(|_| bad())?;
        Axis::new(min, max, steps)
    }
}

/// Second axis of a scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RAxis {
    Grid(Axis),
    /// `r = theta^2` for every `theta` of the first axis.
    ThetaSquared,
}

/// Classifies every grid point, row-major with `theta` as the outer index.
pub fn phase_scan(theta: Axis, r: RAxis) -> Result<Vec<PhasePoint>> {
    let thetas = theta.values();
    let pairs: Vec<(f64, f64)> = match r {
        RAxis::ThetaSquared => thetas.iter().map(|&t| (t, t * t)).collect(),
        RAxis::Grid(axis) => {
            let rs = axis.values();
            thetas.iter().flat_map(|&t| rs.iter().map(move |&r| (t, r))).collect()
        }
    };
    pairs.par_iter().map(|&(t, r)| classify_point(t, r)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheck {
    pub checked: usize,
    /// Points where `two_periodic` disagrees with the solver finding a cycle.
    pub mismatches: Vec<PhasePoint>,
}

/// Compares every `stride`-th scanned point against [`two_cycles`] at `k = 2`.
pub fn cross_validate(points: &[PhasePoint], stride: usize) -> Result<CrossCheck> {
    let stride = stride.max(1);
    let sample: Vec<&PhasePoint> = points.iter().step_by(stride).collect();
    let verdicts: Vec<Option<PhasePoint>> = sample
        .par_iter()
        .map(|p| {
            let found = !two_cycles(p.theta, p.r, 2)?.cycles.is_empty();
            let predicted = p.classification == Classification::TwoPeriodic;
            Ok((found != predicted).then_some(**p))
        })
        .collect::<Result<_>>()?;
    Ok(CrossCheck { checked: sample.len(), mismatches: verdicts.into_iter().flatten().collect() })
}

//! Fixed points of the reduced map.
//!
//! `f(x) = x` is equivalent to the quartic `x·D(x) − N(x) = 0` obtained by
//! cross-multiplying the rational map. Its roots are solved in closed form,
//! the positive ones are classified by `|f'|`, and Descartes' rule of signs
//! gives a cheap a-priori bound on their number.

mod quartic;

pub use quartic::{solve_quartic, QuarticPoly, REAL_SNAP};

use std::fmt;

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{BoltzmannWeights, CouplingParams};
use crate::recurrence::{f, f_prime};

/// Band around 0 and 1 inside which `|f'|` is read as exactly 0 or 1.
pub const STABILITY_BAND: f64 = 1e-9;

/// Tolerance `|f(x) − x| ≤ tol · max(1, x)` accepted by [`classify`]. Loose
/// enough for published six-digit values.
pub const CLASSIFY_TOL: f64 = 1e-5;

/// Positive roots closer than `MERGE_TOL · (1 + |x|)` count once.
pub const MERGE_TOL: f64 = 1e-6;

/// Coefficients of `x·D(x) − N(x)`:
///
/// ```text
/// c4 = a⁶c⁴
/// c3 = 3a⁴b² − a⁶b⁶c⁴
/// c2 = 3a²b⁴ − 3a⁴b⁴
/// c1 = c⁴b⁶ − 3a²b²
/// c0 = −c⁴
/// ```
pub fn quartic_from_f(w: &BoltzmannWeights) -> QuarticPoly {
    let (a, b, c) = (w.a, w.b, w.c);
    let (a2, b2, c4) = (a * a, b * b, c.powi(4));
    let (a4, b4) = (a2 * a2, b2 * b2);
    let (a6, b6) = (a4 * a2, b4 * b2);
    QuarticPoly {
        coeffs: [a6 * c4, 3.0 * a4 * b2 - a6 * b6 * c4, 3.0 * a2 * b4 - 3.0 * a4 * b4, c4 * b6 - 3.0 * a2 * b2, -c4],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StabilityClass {
    Superstable,
    Stable,
    Neutral,
    Unstable,
}

impl StabilityClass {
    pub fn from_derivative(abs_derivative: f64) -> Self {
        if abs_derivative <= STABILITY_BAND {
            StabilityClass::Superstable
        } else if (abs_derivative - 1.0).abs() <= STABILITY_BAND {
            StabilityClass::Neutral
        } else if abs_derivative < 1.0 {
            StabilityClass::Stable
        } else {
            StabilityClass::Unstable
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StabilityClass::Superstable => "superstable",
            StabilityClass::Stable => "stable",
            StabilityClass::Neutral => "neutral",
            StabilityClass::Unstable => "unstable",
        }
    }

    /// Attracting under iteration of `f`.
    pub fn is_attracting(self) -> bool {
        matches!(self, StabilityClass::Stable | StabilityClass::Superstable)
    }
}

impl fmt::Display for StabilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for StabilityClass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// Stability class and `|f'(x)|` of a positive fixed point.
pub fn classify(x: f64, w: &BoltzmannWeights) -> Result<(StabilityClass, f64)> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::domain(format!("fixed point must be positive, got {x}")));
    }
    let gap = (f(x, w) - x).abs();
    if gap > CLASSIFY_TOL * x.max(1.0) {
        return Err(Error::domain(format!("{x} is not a fixed point (|f(x) − x| = {gap:e})")));
    }
    let d = f_prime(x, w).abs();
    Ok((StabilityClass::from_derivative(d), d))
}

/// Sign changes of a coefficient sequence, zeros skipped.
pub fn sign_changes(coeffs: &[f64]) -> usize {
    let signs: Vec<bool> = coeffs.iter().filter(|&&c| c != 0.0).map(|&c| c > 0.0).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DescartesBound {
    pub max_positive: usize,
    pub max_negative: usize,
    /// `max_positive, max_positive − 2, …` down to 0 or 1.
    pub positive_candidates: Vec<usize>,
    pub negative_candidates: Vec<usize>,
}

impl DescartesBound {
    /// Whether a root count (with multiplicity) is allowed by the rule.
    pub fn admits(&self, positive: usize, negative: usize) -> bool {
        self.positive_candidates.contains(&positive) && self.negative_candidates.contains(&negative)
    }
}

fn parity_ladder(max: usize) -> Vec<usize> {
    (0..=max).rev().step_by(2).collect()
}

pub fn descartes(p: &QuarticPoly) -> DescartesBound {
    let max_positive = sign_changes(&p.coeffs);
    let max_negative = sign_changes(&p.reflected());
    DescartesBound {
        max_positive,
        max_negative,
        positive_candidates: parity_ladder(max_positive),
        negative_candidates: parity_ladder(max_negative),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalTemps {
    #[serde(rename = "T_star")]
    pub t_star: f64,
    #[serde(rename = "T_double_star")]
    pub t_double_star: f64,
}

impl CriticalTemps {
    /// Whether `T` lies strictly inside `(T*, T**)`, the window in which the
    /// closed-form criterion predicts three positive fixed points.
    pub fn predicts_transition(&self, t: f64) -> bool {
        self.t_star < t && t < self.t_double_star
    }
}

/// `T* = (−J + 2(Jp + Jsl)) / ln√3`, `T** = (J + 2(Jp + Jsl)) / ln√3`.
pub fn critical_temps(params: &CouplingParams) -> CriticalTemps {
    let ln_sqrt3 = 0.5 * 3f64.ln();
    let s = 2.0 * (params.jp + params.jsl);
    CriticalTemps { t_star: (-params.j + s) / ln_sqrt3, t_double_star: (params.j + s) / ln_sqrt3 }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootEntry {
    pub re: f64,
    pub im: f64,
    /// `|p(r)|` on the unscaled quartic.
    pub residual: f64,
}

impl RootEntry {
    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn is_real(&self) -> bool {
        self.im == 0.0
    }

    pub fn is_positive_real(&self) -> bool {
        self.re > 0.0 && self.is_real()
    }

    pub fn is_negative_real(&self) -> bool {
        self.re < 0.0 && self.is_real()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositiveFixedPoint {
    pub x: f64,
    pub f_prime: f64,
    pub class: StabilityClass,
}

/// Everything known about the fixed points at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointReport {
    pub params: CouplingParams,
    pub quartic: QuarticPoly,
    pub roots: Vec<RootEntry>,
    /// Distinct positive fixed points in ascending order.
    pub positive: Vec<PositiveFixedPoint>,
    #[serde(flatten)]
    pub critical: CriticalTemps,
    pub descartes: DescartesBound,
}

impl FixedPointReport {
    pub fn n_positive(&self) -> usize {
        self.positive.len()
    }

    /// Real-root counts with multiplicity, for comparison with Descartes.
    pub fn real_root_counts(&self) -> (usize, usize) {
        let pos = self.roots.iter().filter(|r| r.is_positive_real()).count();
        let neg = self.roots.iter().filter(|r| r.is_negative_real()).count();
        (pos, neg)
    }
}

/// Solves `f(x) = x` and classifies every positive solution.
pub fn fixed_points(params: &CouplingParams) -> Result<FixedPointReport> {
    let w = params.weights()?;
    let quartic = quartic_from_f(&w);
    let solved = solve_quartic(&quartic)?;
    let roots: Vec<RootEntry> = solved
        .iter()
        .map(|&r| RootEntry { re: r.re, im: r.im, residual: quartic.eval(r).norm() })
        .collect();

    let mut positive: Vec<PositiveFixedPoint> = Vec::new();
    for r in roots.iter().filter(|r| r.is_positive_real()) {
        if positive.last().is_some_and(|p| (r.re - p.x).abs() <= MERGE_TOL * (1.0 + p.x.abs())) {
            continue;
        }
        let d = f_prime(r.re, &w);
        positive.push(PositiveFixedPoint { x: r.re, f_prime: d, class: StabilityClass::from_derivative(d.abs()) });
    }

    Ok(FixedPointReport {
        params: *params,
        descartes: descartes(&quartic),
        critical: critical_temps(params),
        quartic,
        roots,
        positive,
    })
}

//! Boundary-field recursion.
//!
//! One step of the recursion maps the field on semi-balls one level down to
//! the field that makes consecutive finite-volume distributions compatible.
//! With `G(s, t)` the weight of the three grandchildren below a child of spin
//! `t` whose parent has spin `s`, the update reads
//!
//! ```text
//! exp(π·h'[s, k]) = G(s, +)^(3−k) · G(s, −)^k
//! ```
//!
//! where `k` is the number of minus children and `π` the four-spin product
//! of the semi-ball pattern. The global normalising constant of the
//! recursion is fixed to 1; it cancels once measures are normalised.
//!
//! Updated fields always satisfy
//! `3h2 = h4 − 2h1`, `3h3 = h1 − 2h4`, `3h6 = h8 − 2h5`, `3h7 = h5 − 2h8`,
//! so only `(h1, h4, h5, h8)` are independent. In cube-root coordinates
//! `v_i = exp(h_i / 3)` this gives the four-dimensional operator
//! [`apply_f`], which on the diagonal `v1 = v4 = v5 = v8 = √x` reduces to the
//! scalar rational map [`f`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::BoundaryField;
use crate::model::BoltzmannWeights;
use crate::numeric::{log_pow, log_sum_exp};

const LN_3: f64 = 1.098_612_288_668_109_8;

/// `ln C(3, k)`.
const LN_BINOM3: [f64; 4] = [0.0, LN_3, LN_3, 0.0];

/// Sum of the three sibling products when `k` of the siblings are minus.
const SIBLING_PAIRS: [f64; 4] = [3.0, -1.0, -1.0, 3.0];

/// `ln G(s, t)`: log-weight of the three grandchildren below a child with
/// spin `t` whose parent has spin `s`, summed over the grandchildren.
fn ln_grandchild_weight(s: i8, t: i8, h: &BoundaryField, w: &BoltzmannWeights) -> f64 {
    let (s, tf) = (f64::from(s), f64::from(t));
    let terms: [f64; 4] = std::array::from_fn(|k| {
        let magnetisation = 3.0 - 2.0 * k as f64;
        let product = if k % 2 == 0 { 1.0 } else { -1.0 };
        LN_BINOM3[k]
            + w.ln_a() * tf * magnetisation
            + w.ln_b() * s * magnetisation
            + w.ln_c() * SIBLING_PAIRS[k]
            + tf * product * h.class_value(t, k)
    });
    log_sum_exp(&terms)
}

/// One step of the boundary-field recursion, normalising constant set to 1.
pub fn h_update(h: &BoundaryField, w: &BoltzmannWeights) -> BoundaryField {
    let mut out = [0.0; 8];
    for s in [1i8, -1] {
        let g_plus = ln_grandchild_weight(s, 1, h, w);
        let g_minus = ln_grandchild_weight(s, -1, h, w);
        for k in 0..4 {
            let product = if k % 2 == 0 { f64::from(s) } else { -f64::from(s) };
            let exponent = (3 - k) as f64 * g_plus + k as f64 * g_minus;
            out[BoundaryField::class_index(s, k)] = product * exponent;
        }
    }
    BoundaryField(out)
}

/// Residuals of the four linear identities tying the dependent field
/// components to `(h1, h4, h5, h8)`.
pub fn dependent_identity_residuals(h: &BoundaryField) -> [f64; 4] {
    let [h1, h2, h3, h4, h5, h6, h7, h8] = h.0;
    [
        (-3.0 * h2) - (2.0 * h1 - h4),
        (3.0 * h3) - (h1 - 2.0 * h4),
        (3.0 * h6) - (-2.0 * h5 + h8),
        (-3.0 * h7) - (-h5 + 2.0 * h8),
    ]
}

/// Field satisfying the dependent identities, parametrised by its four
/// independent components `(h1, h4, h5, h8) = (p, q, r, s)`.
pub fn parametrized_field(p: f64, q: f64, r: f64, s: f64) -> BoundaryField {
    BoundaryField([p, (q - 2.0 * p) / 3.0, (p - 2.0 * q) / 3.0, q, r, (s - 2.0 * r) / 3.0, (r - 2.0 * s) / 3.0, s])
}

/// Point `(v1, v4, v5, v8)` of the positive orthant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldState4 {
    pub v1: f64,
    pub v4: f64,
    pub v5: f64,
    pub v8: f64,
}

impl FieldState4 {
    pub fn new(v1: f64, v4: f64, v5: f64, v8: f64) -> Result<Self> {
        let v = FieldState4 { v1, v4, v5, v8 };
        if v.as_array().iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::domain(format!("field state must be positive and finite: {v:?}")));
        }
        Ok(v)
    }

    /// The diagonal point with every component `√x`.
    pub fn diagonal(x: ReducedPoint) -> Self {
        let r = x.0.sqrt();
        FieldState4 { v1: r, v4: r, v5: r, v8: r }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.v1, self.v4, self.v5, self.v8]
    }

    fn from_logs(l: [f64; 4]) -> Self {
        FieldState4 { v1: l[0].exp(), v4: l[1].exp(), v5: l[2].exp(), v8: l[3].exp() }
    }

    fn logs(&self) -> [f64; 4] {
        self.as_array().map(f64::ln)
    }

    /// `v1·v4`, the argument of the first ratio map.
    pub fn s(&self) -> f64 {
        self.v1 * self.v4
    }

    /// `v5·v8`, the argument of the second ratio map.
    pub fn t(&self) -> f64 {
        self.v5 * self.v8
    }

    /// Applies the normalisation freedom of the recursion: scaling the
    /// normalising constant by `μ³` multiplies `v1, v8` by `μ` and divides
    /// `v4, v5` by `μ`. The products `v1v4`, `v5v8`, `v1v5`, `v4v8` are
    /// unchanged.
    pub fn rescaled(&self, mu: f64) -> Self {
        FieldState4 { v1: self.v1 * mu, v4: self.v4 / mu, v5: self.v5 / mu, v8: self.v8 * mu }
    }

    /// Representative with `v1·v8 = v4·v5`.
    pub fn balanced(&self) -> Self {
        let [l1, l4, l5, l8] = self.logs();
        let ln_mu = 0.25 * ((l4 + l5) - (l1 + l8));
        FieldState4::from_logs([l1 + ln_mu, l4 - ln_mu, l5 - ln_mu, l8 + ln_mu])
    }
}

/// A point of the reduced one-dimensional dynamics, `x > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct ReducedPoint(f64);

impl ReducedPoint {
    pub fn new(x: f64) -> Result<Self> {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::domain(format!("reduced point must be positive and finite, got {x}")));
        }
        Ok(ReducedPoint(x))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Invariant-set candidates of the four-dimensional operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvariantSet {
    /// `v1 = v5` and `v4 = v8`.
    Upsilon,
    /// `v1 = v4 = v5 = v8`.
    Diagonal,
    /// `v1 = v8` and `v4 = v5`: fields symmetric under the global spin flip.
    FlipSymmetric,
}

impl InvariantSet {
    /// Largest relative violation of the defining equalities.
    pub fn defect(self, v: &FieldState4) -> f64 {
        let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs());
        match self {
            InvariantSet::Upsilon => rel(v.v1, v.v5).max(rel(v.v4, v.v8)),
            InvariantSet::FlipSymmetric => rel(v.v1, v.v8).max(rel(v.v4, v.v5)),
            InvariantSet::Diagonal => {
                let a = v.as_array();
                a.iter().flat_map(|&x| a.iter().map(move |&y| rel(x, y))).fold(0.0, f64::max)
            }
        }
    }
}

/// `v_i = exp(h_i / 3)` for the independent components.
pub fn to_v(h: &BoundaryField) -> FieldState4 {
    let [h1, _, _, h4, h5, _, _, h8] = h.0;
    FieldState4::from_logs([h1 / 3.0, h4 / 3.0, h5 / 3.0, h8 / 3.0])
}

/// Inverse of [`to_v`]; the dependent components are filled from the
/// linear identities.
pub fn from_v(v: &FieldState4) -> BoundaryField {
    let [l1, l4, l5, l8] = v.logs();
    parametrized_field(3.0 * l1, 3.0 * l4, 3.0 * l5, 3.0 * l8)
}

/// Log-coefficients (powers 0..=3) of the numerator cubic
/// `c⁴ + 3(ab)²x + 3(ab)⁴x² + (ab)⁶c⁴x³`.
fn ln_numerator(w: &BoltzmannWeights) -> [f64; 4] {
    let (la, lb, lc) = (w.ln_a(), w.ln_b(), w.ln_c());
    [
        4.0 * lc,
        LN_3 + 2.0 * (la + lb),
        LN_3 + 4.0 * (la + lb),
        6.0 * (la + lb) + 4.0 * lc,
    ]
}

/// Log-coefficients of the denominator cubic
/// `b⁶c⁴ + 3a²b⁴x + 3a⁴b²x² + a⁶c⁴x³`.
fn ln_denominator(w: &BoltzmannWeights) -> [f64; 4] {
    let (la, lb, lc) = (w.ln_a(), w.ln_b(), w.ln_c());
    [
        6.0 * lb + 4.0 * lc,
        LN_3 + 2.0 * la + 4.0 * lb,
        LN_3 + 4.0 * la + 2.0 * lb,
        6.0 * la + 4.0 * lc,
    ]
}

/// Plain coefficients of the numerator and denominator cubics of [`f`],
/// lowest power first.
pub fn rational_coefficients(w: &BoltzmannWeights) -> ([f64; 4], [f64; 4]) {
    (ln_numerator(w).map(f64::exp), ln_denominator(w).map(f64::exp))
}

fn ln_cubic(ln_coeffs: &[f64; 4], ln_x: f64) -> f64 {
    let terms: [f64; 4] = std::array::from_fn(|k| ln_coeffs[k] + log_pow(ln_x, k as u32));
    log_sum_exp(&terms)
}

/// `ln|W_k|` for the numerator `W = N'D − ND'` of `f'`, lowest power first.
/// Every coefficient carries a factor `b^m − 1`, so all share the sign of
/// `ln b` and `W` has no cancellation for `x > 0`.
fn ln_wronskian(w: &BoltzmannWeights) -> [f64; 5] {
    let (la, lb, lc) = (w.ln_a(), w.ln_b(), w.ln_c());
    let ln_e = |m: f64| (m * lb).exp_m1().abs().ln();
    let (e4, e8, e12) = (ln_e(4.0), ln_e(8.0), ln_e(12.0));
    let (ln3, ln6, ln9) = (3f64.ln(), 6f64.ln(), 9f64.ln());
    [
        ln3 + 2.0 * la + 4.0 * lb + 4.0 * lc + e4,
        ln6 + 4.0 * la + 2.0 * lb + 4.0 * lc + e8,
        log_sum_exp(&[ln3 + 6.0 * la + 8.0 * lc + e12, ln9 + 6.0 * la + 4.0 * lb + e4]),
        ln6 + 8.0 * la + 2.0 * lb + 4.0 * lc + e8,
        ln3 + 10.0 * la + 4.0 * lb + 4.0 * lc + e4,
    ]
}

fn cubic(coeffs: &[f64; 4], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Four-dimensional operator with the normalising constant set to 1.
///
/// ```text
/// v1' = [(ab)⁶c⁴s³ + 3(ab)⁴s² + 3(ab)²s + c⁴] / ((ab)³c v4³)
/// v4' = (ab)³c v5³ / [b⁶c⁴ + 3a²b⁴t + 3a⁴b²t² + a⁶c⁴t³]
/// v5' = (ab)³c v4³ / [b⁶c⁴ + 3a²b⁴s + 3a⁴b²s² + a⁶c⁴s³]
/// v8' = [c⁴ + 3(ab)²t + 3(ab)⁴t² + (ab)⁶c⁴t³] / ((ab)³c v5³)
/// ```
///
/// with `s = v1v4`, `t = v5v8`. Evaluated in log-space.
pub fn apply_f_unnormalized(v: &FieldState4, w: &BoltzmannWeights) -> FieldState4 {
    let [l1, l4, l5, l8] = v.logs();
    let (ls, lt) = (l1 + l4, l5 + l8);
    let ln_k = 3.0 * (w.ln_a() + w.ln_b()) + w.ln_c();
    let (num, den) = (ln_numerator(w), ln_denominator(w));
    FieldState4::from_logs([
        ln_cubic(&num, ls) - ln_k - 3.0 * l4,
        ln_k + 3.0 * l5 - ln_cubic(&den, lt),
        ln_k + 3.0 * l4 - ln_cubic(&den, ls),
        ln_cubic(&num, lt) - ln_k - 3.0 * l5,
    ])
}

/// Four-dimensional operator with the normalising constant chosen so that
/// the image satisfies `v1·v8 = v4·v5` (see [`FieldState4::balanced`]).
/// Maps the diagonal into itself.
pub fn apply_f(v: &FieldState4, w: &BoltzmannWeights) -> FieldState4 {
    apply_f_unnormalized(v, w).balanced()
}

/// `(v1'v5', v4'v8')` as functions of `s = v1v4` and `t = v5v8`; independent
/// of the normalising constant.
pub fn ratio_maps(s: f64, t: f64, w: &BoltzmannWeights) -> (f64, f64) {
    (f(s, w), f(t, w))
}

/// Reduced scalar map
///
/// ```text
/// f(x) = (c⁴ + 3a²b²x + 3a⁴b⁴x² + a⁶b⁶c⁴x³) / (c⁴b⁶ + 3a²b⁴x + 3a⁴b²x² + a⁶c⁴x³)
/// ```
///
/// evaluated in log-space for `x ≥ 0` and directly for negative `x`.
pub fn f(x: f64, w: &BoltzmannWeights) -> f64 {
    if x >= 0.0 {
        let ln_x = x.ln();
        (ln_cubic(&ln_numerator(w), ln_x) - ln_cubic(&ln_denominator(w), ln_x)).exp()
    } else {
        let (num, den) = rational_coefficients(w);
        cubic(&num, x) / cubic(&den, x)
    }
}

/// Derivative of [`f`], `f' = W / D²` with `W = N'D − ND'` a quartic whose
/// coefficients all have the sign of `Jp`. Log-space for `x ≥ 0`.
pub fn f_prime(x: f64, w: &BoltzmannWeights) -> f64 {
    let sign = w.ln_b().signum();
    if w.ln_b() == 0.0 {
        return 0.0;
    }
    let ln_w = ln_wronskian(w);
    if x >= 0.0 {
        let ln_x = x.ln();
        let terms: [f64; 5] = std::array::from_fn(|k| ln_w[k] + log_pow(ln_x, k as u32));
        sign * (log_sum_exp(&terms) - 2.0 * ln_cubic(&ln_denominator(w), ln_x)).exp()
    } else {
        let d = cubic(&ln_denominator(w).map(f64::exp), x);
        let num = ln_w.iter().rev().fold(0.0, |acc, l| acc * x + l.exp());
        sign * num / (d * d)
    }
}

//! Closed-form quartic solver.
//!
//! Ferrari's method through the resolvent cubic, evaluated in complex
//! arithmetic, followed by simultaneous Aberth–Ehrlich refinement on the
//! original polynomial. Coefficients are pre-scaled by their largest magnitude.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Imaginary parts below `REAL_SNAP · |z|` are set to zero.
pub const REAL_SNAP: f64 = 1e-9;

const ABERTH_MAX_ITER: usize = 200;

/// Relative residual `|p(x)| / Σ|c_i||x|^i` regarded as converged.
const BACKWARD_TOL: f64 = 8.0 * f64::EPSILON;

/// `c4 x⁴ + c3 x³ + c2 x² + c1 x + c0`, coefficients stored highest first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuarticPoly {
    pub coeffs: [f64; 5],
}

impl QuarticPoly {
    pub fn new(coeffs: [f64; 5]) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain(format!("quartic coefficients must be finite: {coeffs:?}")));
        }
        if coeffs[0] == 0.0 {
            return Err(Error::domain("leading quartic coefficient is zero"));
        }
        Ok(QuarticPoly { coeffs })
    }

    /// Monic quartic with the given roots.
    pub fn from_roots(roots: [Complex64; 4]) -> Result<Self> {
        let mut poly = vec![Complex64::new(1.0, 0.0)];
        for r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
            for (i, c) in poly.iter().enumerate() {
                next[i] += c;
                next[i + 1] -= c * r;
            }
            poly = next;
        }
        QuarticPoly::new(std::array::from_fn(|i| poly[i].re))
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.coeffs.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    pub fn eval_real(&self, x: f64) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
    }

    fn eval_with_derivative(&self, x: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in &self.coeffs {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    }

    /// Coefficients of `p(−x)`, highest first.
    pub fn reflected(&self) -> [f64; 5] {
        std::array::from_fn(|i| if i % 2 == 0 { self.coeffs[i] } else { -self.coeffs[i] })
    }

    fn scaled(&self) -> QuarticPoly {
        let m = self.max_abs_coeff();
        QuarticPoly { coeffs: self.coeffs.map(|c| c / m) }
    }
}

fn cbrt(z: Complex64) -> Complex64 {
    if z.norm() == 0.0 {
        z
    } else {
        Complex64::from_polar(z.norm().cbrt(), z.arg() / 3.0)
    }
}

/// Roots of the monic cubic `m³ + a m² + b m + c` by Cardano's formula with
/// one Newton correction per root.
fn solve_monic_cubic(a: f64, b: f64, c: f64) -> [Complex64; 3] {
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = Complex64::new(q * q / 4.0 + p * p * p / 27.0, 0.0).sqrt();
    let half_q = Complex64::new(-q / 2.0, 0.0);
    // larger of the two candidates avoids cancellation
    let w = if (half_q + disc).norm() >= (half_q - disc).norm() { half_q + disc } else { half_q - disc };
    let u = cbrt(w);
    let omega = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
    let mut roots = [Complex64::new(0.0, 0.0); 3];
    let mut rot = Complex64::new(1.0, 0.0);
    for root in roots.iter_mut() {
        let uk = u * rot;
        let vk = if uk.norm() == 0.0 { Complex64::new(0.0, 0.0) } else { -p / (3.0 * uk) };
        *root = uk + vk - shift;
        rot *= omega;
    }
    for m in roots.iter_mut() {
        let f = ((*m + a) * *m + b) * *m + c;
        let df = (3.0 * *m + 2.0 * a) * *m + b;
        if df.norm() > 0.0 {
            let next = *m - f / df;
            if next.is_finite() {
                *m = next;
            }
        }
    }
    roots
}

/// Roots of `y² + b y + c` with the cancellation-free formula.
fn solve_monic_quadratic(b: Complex64, c: Complex64) -> [Complex64; 2] {
    let disc = (b * b - 4.0 * c).sqrt();
    let q = if (b.conj() * disc).re >= 0.0 { -0.5 * (b + disc) } else { -0.5 * (b - disc) };
    if q.norm() == 0.0 {
        return [Complex64::new(0.0, 0.0); 2];
    }
    [q, c / q]
}

/// Raw closed-form roots of a monic quartic `x⁴ + a x³ + b x² + c x + d`.
fn ferrari(a: f64, b: f64, c: f64, d: f64) -> [Complex64; 4] {
    // x = y − a/4 gives y⁴ + p y² + q y + r
    let a2 = a * a;
    let p = b - 3.0 * a2 / 8.0;
    let q = c - a * b / 2.0 + a2 * a / 8.0;
    let r = d - a * c / 4.0 + a2 * b / 16.0 - 3.0 * a2 * a2 / 256.0;
    let shift = Complex64::new(a / 4.0, 0.0);

    // resolvent m³ + p m² + (p²/4 − r) m − q²/8 = 0
    let resolvent = solve_monic_cubic(p, p * p / 4.0 - r, -q * q / 8.0);
    let m = resolvent.into_iter().fold(Complex64::new(0.0, 0.0), |best, z| if z.norm() > best.norm() { z } else { best });
    let s = (2.0 * m).sqrt();

    let ys: [Complex64; 4] = if s.norm() <= 1e-300 {
        // biquadratic y⁴ + p y² + r
        let [z1, z2] = solve_monic_quadratic(Complex64::new(p, 0.0), Complex64::new(r, 0.0));
        [z1.sqrt(), -z1.sqrt(), z2.sqrt(), -z2.sqrt()]
    } else {
        let base = p / 2.0 + m;
        let tilt = q / (2.0 * s);
        let [y1, y2] = solve_monic_quadratic(-s, base + tilt);
        let [y3, y4] = solve_monic_quadratic(s, base - tilt);
        [y1, y2, y3, y4]
    };
    ys.map(|y| y - shift)
}

/// `Σ |c_i| |x|^i`, the scale against which a residual is judged.
fn magnitude_bound(poly: &QuarticPoly, x: Complex64) -> f64 {
    let r = x.norm();
    poly.coeffs.iter().fold(0.0, |acc, c| acc * r + c.abs())
}

fn backward_error_ok(poly: &QuarticPoly, x: Complex64) -> bool {
    poly.eval(x).norm() <= BACKWARD_TOL * magnitude_bound(poly, x)
}

/// Simultaneous Aberth–Ehrlich refinement. Each approximation takes a
/// Newton step corrected by the repulsion of the others, so two
/// approximations cannot settle on the same simple root. Returns whether all
/// roots reached backward-error accuracy.
fn aberth(poly: &QuarticPoly, roots: &mut [Complex64; 4]) -> bool {
    let mut done = roots.map(|z| backward_error_ok(poly, z));
    for _ in 0..ABERTH_MAX_ITER {
        if done.iter().all(|&d| d) {
            return true;
        }
        for k in 0..4 {
            if done[k] {
                continue;
            }
            let z = roots[k];
            let (p, dp) = poly.eval_with_derivative(z);
            if p.norm() == 0.0 {
                done[k] = true;
                continue;
            }
            let repulsion: Complex64 =
                (0..4).filter(|&j| j != k).map(|j| (z - roots[j]).inv()).sum();
            let newton = p / dp;
            let step = newton / (1.0 - newton * repulsion);
            let next = z - if step.is_finite() { step } else { newton };
            if !next.is_finite() {
                continue;
            }
            let stalled = (next - z).norm() <= 4.0 * f64::EPSILON * z.norm();
            roots[k] = next;
            done[k] = stalled || backward_error_ok(poly, next);
        }
    }
    done.iter().all(|&d| d)
}

/// Starting points from the Newton polygon of `log |c_i|`: each edge of the
/// upper convex hull spanning powers `i..k` contributes `k − i` points on a
/// circle of radius `(|c_i| / |c_k|)^{1/(k−i)}`.
fn newton_polygon_guesses(poly: &QuarticPoly) -> [Complex64; 4] {
    // (power, log magnitude), lowest power first
    let pts: Vec<(usize, f64)> = (0..=4)
        .filter_map(|i| {
            let c = poly.coeffs[4 - i];
            (c != 0.0).then(|| (i, c.abs().ln()))
        })
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &pt in &pts {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (a.0 as f64 - o.0 as f64) * (pt.1 - o.1) - (a.1 - o.1) * (pt.0 as f64 - o.0 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let mut guesses = Vec::with_capacity(4);
    // roots at zero for vanishing low-order coefficients
    for _ in 0..pts[0].0 {
        guesses.push(Complex64::new(0.0, 0.0));
    }
    for edge in hull.windows(2) {
        let ((i, li), (k, lk)) = (edge[0], edge[1]);
        let count = k - i;
        let radius = ((li - lk) / count as f64).exp();
        for m in 0..count {
            let angle = std::f64::consts::TAU * m as f64 / count as f64 + 0.4 + 0.1 * guesses.len() as f64;
            guesses.push(Complex64::from_polar(radius, angle));
        }
    }
    std::array::from_fn(|i| guesses[i])
}

fn max_backward_error(poly: &QuarticPoly, roots: &[Complex64; 4]) -> f64 {
    roots.iter().map(|&z| relative_residual(poly, z)).fold(0.0, f64::max)
}

fn relative_residual(poly: &QuarticPoly, x: Complex64) -> f64 {
    poly.eval(x).norm() / magnitude_bound(poly, x).max(f64::MIN_POSITIVE)
}

/// Replaces clusters of approximations to a multiple root by their mean.
/// Approximations of an m-fold root scatter by about `ε^{1/m}` while their
/// mean is accurate; the mean is accepted when it is itself a root to
/// backward-error accuracy, which a pair of distinct close roots fails.
fn merge_clusters(poly: &QuarticPoly, roots: &mut [Complex64; 4]) {
    let mut used = [false; 4];
    for i in 0..4 {
        if used[i] {
            continue;
        }
        let cluster: Vec<usize> = (i..4)
            .filter(|&j| !used[j] && (roots[j] - roots[i]).norm() <= 1e-4 * (1.0 + roots[i].norm()))
            .collect();
        if cluster.len() < 2 {
            continue;
        }
        let mean = cluster.iter().map(|&j| roots[j]).sum::<Complex64>() / cluster.len() as f64;
        let worst = cluster.iter().map(|&j| relative_residual(poly, roots[j])).fold(0.0, f64::max);
        if relative_residual(poly, mean) <= (16.0 * BACKWARD_TOL).max(worst) {
            for &j in &cluster {
                roots[j] = mean;
                used[j] = true;
            }
        }
    }
}

/// Non-real roots of a real polynomial come in conjugate pairs; each pair
/// is replaced by an exact pair around its averaged member.
fn pair_conjugates(roots: &mut [Complex64; 4]) {
    for i in 0..4 {
        if roots[i].im <= 0.0 {
            continue;
        }
        let partner = (0..4)
            .filter(|&j| roots[j].im < 0.0)
            .min_by(|&j, &k| (roots[j] - roots[i].conj()).norm().total_cmp(&(roots[k] - roots[i].conj()).norm()));
        if let Some(j) = partner {
            let avg = (roots[i] + roots[j].conj()) / 2.0;
            roots[i] = avg;
            roots[j] = avg.conj();
        }
    }
}

/// All four complex roots, sorted by real then imaginary part.
pub fn solve_quartic(poly: &QuarticPoly) -> Result<[Complex64; 4]> {
    let poly = QuarticPoly::new(poly.coeffs)?;
    let scaled = poly.scaled();
    let [c4, c3, c2, c1, c0] = scaled.coeffs;
    let mut roots = ferrari(c3 / c4, c2 / c4, c1 / c4, c0 / c4);
    let seeded = roots.iter().all(|r| r.is_finite()) && aberth(&scaled, &mut roots);
    if !seeded {
        let mut fallback = newton_polygon_guesses(&scaled);
        aberth(&scaled, &mut fallback);
        let closed_form_ok = roots.iter().all(|r| r.is_finite());
        if !closed_form_ok || max_backward_error(&scaled, &fallback) < max_backward_error(&scaled, &roots) {
            roots = fallback;
        }
    }
    if roots.iter().any(|r| !r.is_finite()) {
        return Err(Error::domain(format!("quartic solve produced non-finite roots for {:?}", poly.coeffs)));
    }
    merge_clusters(&scaled, &mut roots);
    for r in roots.iter_mut() {
        if r.im.abs() <= REAL_SNAP * r.norm() {
            r.im = 0.0;
        }
    }
    pair_conjugates(&mut roots);
    roots.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(roots)
}

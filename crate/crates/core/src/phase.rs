//! Parameter sweeps and orbits of the reduced map.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::CouplingParams;
use crate::recurrence::f;
use crate::roots::{fixed_points, CriticalTemps, FixedPointReport, StabilityClass};

/// Successive orbit points closer than this end the iteration.
pub const ORBIT_TOL: f64 = 1e-12;

/// Largest grid [`scan`] accepts.
pub const MAX_GRID_CELLS: usize = 4_000_000;

/// `n` evenly spaced values from `start` to `end` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub end: f64,
    pub n: usize,
}

impl Axis {
    pub fn point(v: f64) -> Self {
        Axis { start: v, end: v, n: 1 }
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.n <= 1 {
            self.start
        } else {
            self.start + (self.end - self.start) * i as f64 / (self.n - 1) as f64
        }
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.value(i))
    }
}

impl FromStr for Axis {
    type Err = Error;

    /// Either a single number or `start:end:n`.
    fn from_str(s: &str) -> Result<Self> {
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| Error::domain(format!("bad number '{t}' in axis '{s}'")));
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [v] => Ok(Axis::point(num(v)?)),
            [a, b, n] => {
                let n = n.trim().parse::<usize>().map_err(|_| Error::domain(format!("bad count '{n}' in axis '{s}'")))?;
                Ok(Axis { start: num(a)?, end: num(b)?, n })
            }
            _ => Err(Error::domain(format!("axis must be 'value' or 'start:end:n', got '{s}'"))),
        }
    }
}

/// Rectangular grid over `(J, Jp, Jsl, T)`, iterated row-major in that order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    #[serde(rename = "J")]
    pub j: Axis,
    #[serde(rename = "Jp")]
    pub jp: Axis,
    #[serde(rename = "Jsl")]
    pub jsl: Axis,
    #[serde(rename = "T")]
    pub t: Axis,
}

impl Grid {
    pub fn single(params: &CouplingParams) -> Self {
        Grid { j: Axis::point(params.j), jp: Axis::point(params.jp), jsl: Axis::point(params.jsl), t: Axis::point(params.t) }
    }

    pub fn len(&self) -> usize {
        [self.j.n, self.jp.n, self.jsl.n, self.t.n].iter().try_fold(1usize, |acc, &n| acc.checked_mul(n)).unwrap_or(usize::MAX)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Parameters of the `index`-th cell in row-major order.
    pub fn params_at(&self, index: usize) -> CouplingParams {
        let it = index % self.t.n;
        let rest = index / self.t.n;
        let isl = rest % self.jsl.n;
        let rest = rest / self.jsl.n;
        let ip = rest % self.jp.n;
        let ij = rest / self.jp.n;
        CouplingParams { j: self.j.value(ij), jp: self.jp.value(ip), jsl: self.jsl.value(isl), t: self.t.value(it) }
    }

    pub fn validate(&self, max_cells: usize) -> Result<()> {
        if self.is_empty() {
            return Err(Error::domain("parameter grid is empty"));
        }
        if self.len() > max_cells {
            return Err(Error::capacity(format!("grid has {} cells, cap is {max_cells}", self.len())));
        }
        for axis in [&self.j, &self.jp, &self.jsl, &self.t] {
            if !(axis.start.is_finite() && axis.end.is_finite()) {
                return Err(Error::domain("grid bounds must be finite"));
            }
        }
        if self.t.values().any(|t| t <= 0.0) {
            return Err(Error::domain("all temperatures in the grid must be positive"));
        }
        Ok(())
    }
}

/// Phase information at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseCell {
    pub params: CouplingParams,
    pub n_positive_roots: usize,
    pub classes: Vec<StabilityClass>,
    /// More than one positive fixed point, hence more than one
    /// translation-invariant Gibbs measure.
    pub transition: bool,
    #[serde(flatten)]
    pub critical: CriticalTemps,
    /// Whether the closed-form temperature window `(T*, T**)` predicts the
    /// same transition flag as the root count.
    pub formula_agrees: bool,
    pub fixed_points: FixedPointReport,
}

impl PhaseCell {
    pub fn from_report(report: FixedPointReport) -> Self {
        let n = report.n_positive();
        let transition = n >= 2;
        PhaseCell {
            params: report.params,
            n_positive_roots: n,
            classes: report.positive.iter().map(|p| p.class).collect(),
            transition,
            critical: report.critical,
            formula_agrees: report.critical.predicts_transition(report.params.t) == transition,
            fixed_points: report,
        }
    }

    pub fn classes_label(&self) -> String {
        self.classes.iter().map(|c| c.as_str()).collect::<Vec<_>>().join(";")
    }
}

pub fn analyze_point(params: &CouplingParams) -> Result<PhaseCell> {
    fixed_points(params).map(PhaseCell::from_report)
}

/// One [`PhaseCell`] per grid point, in row-major order.
pub fn scan(grid: &Grid) -> Result<Vec<PhaseCell>> {
    scan_capped(grid, MAX_GRID_CELLS)
}

pub fn scan_capped(grid: &Grid, max_cells: usize) -> Result<Vec<PhaseCell>> {
    grid.validate(max_cells)?;
    log::debug!("scanning {} grid cells", grid.len());
    (0..grid.len()).into_par_iter().map(|i| analyze_point(&grid.params_at(i))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrbitEnd {
    Converged { x: f64 },
    Cycling { period: usize },
    CapReached,
}

impl fmt::Display for OrbitEnd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrbitEnd::Converged { x } => write!(f, "converged({x})"),
            OrbitEnd::Cycling { period } => write!(f, "cycling(period {period})"),
            OrbitEnd::CapReached => f.write_str("cap_reached"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Orbit {
    /// `x0, f(x0), f(f(x0)), …`
    pub points: Vec<f64>,
    pub end: OrbitEnd,
}

const CYCLE_LOOKBACK: usize = 64;

/// Iterates the reduced map from `x0` for at most `steps` applications.
pub fn orbit(params: &CouplingParams, x0: f64, steps: usize) -> Result<Orbit> {
    let w = params.weights()?;
    if !(x0.is_finite() && x0 > 0.0) {
        return Err(Error::domain(format!("orbit start must be positive, got {x0}")));
    }
    if steps == 0 {
        return Err(Error::domain("orbit needs at least one step"));
    }
    let mut points = vec![x0];
    for _ in 0..steps {
        let x = *points.last().expect("non-empty");
        let next = f(x, &w);
        points.push(next);
        if (next - x).abs() < ORBIT_TOL {
            return Ok(Orbit { points, end: OrbitEnd::Converged { x: next } });
        }
        let k = points.len() - 1;
        let lookback = k.saturating_sub(CYCLE_LOOKBACK);
        if let Some(j) = (lookback..k - 1).rev().find(|&j| (points[j] - next).abs() < ORBIT_TOL) {
            return Ok(Orbit { points, end: OrbitEnd::Cycling { period: k - j } });
        }
    }
    Ok(Orbit { points, end: OrbitEnd::CapReached })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(j: f64, jp: f64, jsl: f64, t: f64) -> CouplingParams {
        CouplingParams::new(j, jp, jsl, t).unwrap()
    }

    #[test]
    fn axis_parsing() {
        assert_eq!("1.5".parse::<Axis>().unwrap(), Axis::point(1.5));
        let a: Axis = "0:1:5".parse().unwrap();
        assert_eq!(a.values().collect::<Vec<_>>(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!("1:2".parse::<Axis>().is_err());
        assert!("a:2:3".parse::<Axis>().is_err());
        assert!("1:2:x".parse::<Axis>().is_err());
    }

    #[test]
    fn row_major_order() {
        let g = Grid {
            j: "0:1:2".parse().unwrap(),
            jp: Axis::point(5.0),
            jsl: "0:1:2".parse().unwrap(),
            t: "1:2:3".parse().unwrap(),
        };
        assert_eq!(g.len(), 12);
        let order: Vec<(f64, f64, f64)> = (0..g.len()).map(|i| g.params_at(i)).map(|p| (p.j, p.jsl, p.t)).collect();
        assert_eq!(order[0], (0.0, 0.0, 1.0));
        assert_eq!(order[1], (0.0, 0.0, 1.5));
        assert_eq!(order[3], (0.0, 1.0, 1.0));
        assert_eq!(order[6], (1.0, 0.0, 1.0));
    }

    #[test]
    fn grid_errors() {
        let mut g = Grid::single(&params(1.0, 1.0, 1.0, 1.0));
        g.t = Axis { start: 1.0, end: 2.0, n: 0 };
        assert!(matches!(scan(&g), Err(Error::Domain(_))));
        g.t = "-1:1:3".parse().unwrap();
        assert!(matches!(scan(&g), Err(Error::Domain(_))));
        g.t = "1:2:100".parse().unwrap();
        assert!(matches!(scan_capped(&g, 10), Err(Error::Capacity(_))));
    }

    #[test]
    fn published_points() {
        let cells = scan(&Grid::single(&params(-1.0, 29.0, 5.3, 68.0))).unwrap();
        let c = &cells[0];
        assert_eq!(c.n_positive_roots, 3);
        assert!(c.transition);
        assert_eq!(c.classes_label(), "stable;unstable;stable");
        assert!(!c.formula_agrees);

        let cells = scan(&Grid::single(&params(-1.0, 10.0, 5.3, 44.0))).unwrap();
        assert_eq!(cells[0].n_positive_roots, 1);
        assert!(!cells[0].transition);
        assert!(cells[0].formula_agrees);
    }

    #[test]
    fn no_prolonged_coupling_means_no_transition() {
        let g = Grid {
            j: "-3:3:4".parse().unwrap(),
            jp: Axis::point(0.0),
            jsl: "-2:2:3".parse().unwrap(),
            t: "0.5:5:3".parse().unwrap(),
        };
        for cell in scan(&g).unwrap() {
            assert_eq!(cell.n_positive_roots, 1);
            assert!(!cell.transition);
            assert!((cell.fixed_points.positive[0].x - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn orbit_examples() {
        let three_roots = params(-1.0, 29.0, 5.3, 68.0);
        let o = orbit(&three_roots, 8.0, 10_000).unwrap();
        match o.end {
            OrbitEnd::Converged { x } => assert!((x - 7.40762).abs() < 1e-4),
            other => panic!("{other}"),
        }
        let o = orbit(&three_roots, 0.1, 10_000).unwrap();
        match o.end {
            OrbitEnd::Converged { x } => assert!((x - 0.127421).abs() < 1e-4),
            other => panic!("{other}"),
        }
        let o = orbit(&params(0.0, 0.0, 0.0, 1.0), 5.0, 10).unwrap();
        assert_eq!(o.points[1], 1.0);
        assert_eq!(o.end, OrbitEnd::Converged { x: 1.0 });
    }

    #[test]
    fn orbit_cap_and_errors() {
        let three_roots = params(-1.0, 29.0, 5.3, 68.0);
        let o = orbit(&three_roots, 3.0, 2).unwrap();
        assert_eq!(o.end, OrbitEnd::CapReached);
        assert_eq!(o.points.len(), 3);
        assert!(orbit(&three_roots, 0.0, 5).is_err());
        assert!(orbit(&three_roots, 1.0, 0).is_err());
    }

    #[test]
    fn strongly_decreasing_map_can_cycle() {
        // steep decreasing f: look for a period-2 orbit rather than a fixed point
        let p = params(0.2, -6.0, 0.0, 0.5);
        let o = orbit(&p, 1.0, 100_000).unwrap();
        match o.end {
            OrbitEnd::Cycling { period } => assert_eq!(period, 2),
            OrbitEnd::Converged { x } => {
                // acceptable only if the fixed point is attracting
                let d = crate::recurrence::f_prime(x, &p.weights().unwrap()).abs();
                assert!(d < 1.0);
            }
            OrbitEnd::CapReached => panic!("no verdict"),
        }
    }
}

//! Shift-invariant cylinder measures on `{−1, +1}^Z` and a checker for the
//! four consistency properties (normalisation, non-negativity, right and
//! left marginalisation).
//!
//! State 0 stands for spin −1 and state 1 for spin +1.

use crate::error::{Error, Result};

const STOCHASTIC_TOL: f64 = 1e-12;
const CONSISTENCY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum CylinderFixture {
    /// Product measure with one-site marginal `p`.
    Bernoulli { p: [f64; 2] },
    /// Markov measure with initial law `pi` and transition matrix `p`.
    Markov { pi: [f64; 2], p: [[f64; 2]; 2] },
}

fn check_probability_vector(v: &[f64; 2], what: &str) -> Result<()> {
    if v.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
        return Err(Error::domain(format!("{what} has an entry outside [0, 1]: {v:?}")));
    }
    if (v[0] + v[1] - 1.0).abs() > STOCHASTIC_TOL {
        return Err(Error::domain(format!("{what} does not sum to 1: {v:?}")));
    }
    Ok(())
}

impl CylinderFixture {
    pub fn validate(&self) -> Result<()> {
        match self {
            CylinderFixture::Bernoulli { p } => check_probability_vector(p, "probability vector"),
            CylinderFixture::Markov { pi, p } => {
                check_probability_vector(pi, "initial vector")?;
                check_probability_vector(&p[0], "transition row 0")?;
                check_probability_vector(&p[1], "transition row 1")
            }
        }
    }

    /// Measure of the cylinder fixing `block` at consecutive sites.
    pub fn cylinder(&self, block: &[usize]) -> f64 {
        match self {
            CylinderFixture::Bernoulli { p } => block.iter().map(|&i| p[i]).product(),
            CylinderFixture::Markov { pi, p } => match block.split_first() {
                None => 1.0,
                Some((&first, _)) => {
                    pi[first] * block.windows(2).map(|w| p[w[0]][w[1]]).product::<f64>()
                }
            },
        }
    }
}

/// Stationary law of a two-state stochastic matrix.
pub fn stationary_distribution(p: [[f64; 2]; 2]) -> Result<[f64; 2]> {
    check_probability_vector(&p[0], "transition row 0")?;
    check_probability_vector(&p[1], "transition row 1")?;
    let (leave0, leave1) = (p[0][1], p[1][0]);
    if leave0 + leave1 == 0.0 {
        return Err(Error::domain("identity transition matrix has no unique stationary law"));
    }
    Ok([leave1 / (leave0 + leave1), leave0 / (leave0 + leave1)])
}

fn blocks(len: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..1usize << len).map(move |code| (0..len).map(|k| (code >> k) & 1).collect())
}

/// Checks the consistency properties for all cylinders of length ≤ `n`.
/// Returns `Ok(false)` when a property fails; an invalid fixture is an error.
pub fn check_kolmogorov_fixture(fixture: &CylinderFixture, n: usize) -> Result<bool> {
    fixture.validate()?;
    if n == 0 {
        return Err(Error::domain("cylinder length must be at least 1"));
    }
    let total: f64 = (0..2).map(|i| fixture.cylinder(&[i])).sum();
    if (total - 1.0).abs() > CONSISTENCY_TOL {
        return Ok(false);
    }
    for len in 1..=n {
        for block in blocks(len) {
            let mass = fixture.cylinder(&block);
            if mass < 0.0 {
                return Ok(false);
            }
            if len == n {
                continue;
            }
            let right: f64 = (0..2)
                .map(|s| {
                    let mut b = block.clone();
                    b.push(s);
                    fixture.cylinder(&b)
                })
                .sum();
            let left: f64 = (0..2)
                .map(|s| {
                    let mut b = vec![s];
                    b.extend_from_slice(&block);
                    fixture.cylinder(&b)
                })
                .sum();
            if (mass - right).abs() > CONSISTENCY_TOL || (mass - left).abs() > CONSISTENCY_TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

//! Exhaustive finite-volume oracle.
//!
//! Enumerates every spin configuration on the ball `V_n` (n ≤ 2) to evaluate
//! the Hamiltonian, the memory-2 Gibbs distribution with a semi-ball boundary
//! field, and the compatibility of consecutive distributions. These are the
//! brute-force references that the recursion in [`crate::recurrence`] is
//! checked against.

mod kolmogorov;

pub use kolmogorov::{check_kolmogorov_fixture, stationary_distribution, CylinderFixture};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{TclLattice, VertexId};
use crate::model::CouplingParams;

/// Largest depth handled by exhaustive enumeration (2^13 configurations).
pub const MAX_EXACT_DEPTH: usize = 2;

/// Spin assignment on every vertex of a ball, indexed by flat vertex id.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfig(Vec<i8>);

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(s) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::domain(format!("spin values must be ±1, got {s}")));
        }
        Ok(SpinConfig(spins))
    }

    pub fn uniform(len: usize, spin: i8) -> Self {
        debug_assert!(spin == 1 || spin == -1);
        SpinConfig(vec![spin; len])
    }

    /// Bit `i` set means vertex `i` carries spin −1.
    pub fn from_bits(len: usize, bits: u64) -> Self {
        SpinConfig((0..len).map(|i| spin_of(bits, i)).collect())
    }

    pub fn to_bits(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &s)| s < 0)
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn flipped(&self) -> Self {
        SpinConfig(self.0.iter().map(|s| -s).collect())
    }
}

#[inline]
fn spin_of(bits: u64, i: usize) -> i8 {
    1 - 2 * ((bits >> i) & 1) as i8
}

/// Boundary field `h = (h1, …, h8)` on unit semi-ball patterns.
///
/// Classes are keyed by the centre spin and the number of minus spins among
/// the three children, so the field is invariant under child permutations:
///
/// | class | centre | minus children |
/// |-------|--------|----------------|
/// | h1–h4 | +      | 0, 1, 2, 3     |
/// | h5–h8 | −      | 0, 1, 2, 3     |
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct BoundaryField(pub [f64; 8]);

impl BoundaryField {
    pub const ZERO: BoundaryField = BoundaryField([0.0; 8]);

    /// Zero-based class index for a semi-ball pattern.
    pub fn class_index(center: i8, minus_children: usize) -> usize {
        debug_assert!(minus_children <= 3);
        if center > 0 {
            minus_children
        } else {
            4 + minus_children
        }
    }

    pub fn class_value(&self, center: i8, minus_children: usize) -> f64 {
        self.0[Self::class_index(center, minus_children)]
    }

    /// Exponent contributed by one semi-ball: the four-spin product times
    /// the class field.
    pub fn semi_ball_term(&self, center: i8, children: [i8; 3]) -> f64 {
        let minus = children.iter().filter(|&&s| s < 0).count();
        let product = center * children[0] * children[1] * children[2];
        f64::from(product) * self.class_value(center, minus)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|h| h.is_finite())
    }

    pub fn max_abs_diff(&self, other: &BoundaryField) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

fn check_config(lattice: &TclLattice, config: &SpinConfig) -> Result<()> {
    if config.len() != lattice.num_vertices() {
        return Err(Error::domain(format!(
            "configuration assigns {} spins but the lattice has {} vertices",
            config.len(),
            lattice.num_vertices()
        )));
    }
    Ok(())
}

fn pair_sum(pairs: &[(VertexId, VertexId)], spin: impl Fn(VertexId) -> i8) -> f64 {
    pairs.iter().map(|&(x, y)| f64::from(spin(x) * spin(y))).sum()
}

/// Hamiltonian `−J Σ_NN σσ − Jp Σ_PNNN σσ − Jsl Σ_SLNN σσ` on the whole ball.
pub fn energy(lattice: &TclLattice, config: &SpinConfig, params: &CouplingParams) -> Result<f64> {
    check_config(lattice, config)?;
    let s = |i: VertexId| config.0[i];
    Ok(energy_with(lattice, params, s))
}

fn energy_with(lattice: &TclLattice, params: &CouplingParams, spin: impl Fn(VertexId) -> i8 + Copy) -> f64 {
    -params.j * pair_sum(lattice.nn_edges(), spin)
        - params.jp * pair_sum(lattice.pnnn_pairs(), spin)
        - params.jsl * pair_sum(lattice.slnn_edges(), spin)
}

/// Exhaustive finite-volume Gibbs distribution on `V_n`.
#[derive(Debug, Clone)]
pub struct FiniteGibbs {
    pub depth: usize,
    pub params: CouplingParams,
    pub field: BoundaryField,
    /// `ln Z_n`, kept in log form so low temperatures do not overflow.
    pub log_z: f64,
    /// Probability of every configuration, indexed by [`SpinConfig::to_bits`].
    pub probabilities: Vec<f64>,
}

impl FiniteGibbs {
    pub fn partition_function(&self) -> f64 {
        self.log_z.exp()
    }

    pub fn probability(&self, config: &SpinConfig) -> f64 {
        self.probabilities[config.to_bits() as usize]
    }

    pub fn num_configs(&self) -> usize {
        self.probabilities.len()
    }
}

/// Unnormalised log-weight `−βH(σ) + Σ_{x∈W_{n−1}} σ(x)σ(y)σ(z)σ(w) h_class`.
fn log_weight(lattice: &TclLattice, params: &CouplingParams, field: &BoundaryField, bits: u64) -> f64 {
    let spin = |i: VertexId| spin_of(bits, i);
    let mut lw = -params.beta() * energy_with(lattice, params, spin);
    if lattice.depth() > 0 {
        for ball in lattice.semi_balls(lattice.depth() - 1).expect("depth > 0") {
            let children = ball.children.map(spin);
            lw += field.semi_ball_term(spin(ball.center), children);
        }
    }
    lw
}

/// Memory-2 Gibbs distribution on a lattice of depth ≤ [`MAX_EXACT_DEPTH`],
/// with the boundary field applied on the semi-balls centred in `W_{n−1}`.
pub fn gibbs(lattice: &TclLattice, params: &CouplingParams, field: &BoundaryField) -> Result<FiniteGibbs> {
    params.validate()?;
    if lattice.depth() > MAX_EXACT_DEPTH {
        return Err(Error::capacity(format!(
            "exhaustive enumeration supports depth ≤ {MAX_EXACT_DEPTH}, got {}",
            lattice.depth()
        )));
    }
    if !field.is_finite() {
        return Err(Error::domain("boundary field must be finite"));
    }
    let n_configs = 1u64 << lattice.num_vertices();
    let log_weights: Vec<f64> = (0..n_configs)
        .into_par_iter()
        .map(|bits| log_weight(lattice, params, field, bits))
        .collect();
    let shift = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut probabilities: Vec<f64> = log_weights.iter().map(|lw| (lw - shift).exp()).collect();
    let total: f64 = probabilities.iter().sum();
    probabilities.iter_mut().for_each(|p| *p /= total);
    Ok(FiniteGibbs {
        depth: lattice.depth(),
        params: *params,
        field: *field,
        log_z: shift + total.ln(),
        probabilities,
    })
}

/// Outcome of a compatibility check between `μ_1` and the marginal of `μ_2`.
#[derive(Debug, Clone, Serialize)]
pub struct CompatibilityReport {
    pub max_residual: f64,
    /// `|Σ_ω μ_2(σ ∨ ω) − μ_1(σ)|` for each of the 16 configurations `σ` on
    /// `V_1`, indexed by [`SpinConfig::to_bits`].
    pub per_sigma: Vec<f64>,
}

/// Marginalises the depth-2 distribution (field `field_outer` on the
/// semi-balls centred in `W_1`) over the outer shell and compares it with the
/// depth-1 distribution (field `field_inner` on the root semi-ball).
pub fn check_compatibility(
    lattice: &TclLattice,
    params: &CouplingParams,
    field_inner: &BoundaryField,
    field_outer: &BoundaryField,
) -> Result<CompatibilityReport> {
    if lattice.depth() != 2 {
        return Err(Error::Unsupported(format!(
            "compatibility is checked exhaustively at depth 2 only, got depth {}",
            lattice.depth()
        )));
    }
    let inner_lattice = TclLattice::build(1)?;
    let mu1 = gibbs(&inner_lattice, params, field_inner)?;
    let mu2 = gibbs(lattice, params, field_outer)?;

    // V_1 occupies the low four flat ids of V_2
    let inner_mask = (1u64 << inner_lattice.num_vertices()) - 1;
    let mut marginal = vec![0.0; mu1.num_configs()];
    for (bits, p) in mu2.probabilities.iter().enumerate() {
        marginal[(bits as u64 & inner_mask) as usize] += p;
    }
    let per_sigma: Vec<f64> =
        marginal.iter().zip(&mu1.probabilities).map(|(m, p)| (m - p).abs()).collect();
    let max_residual = per_sigma.iter().copied().fold(0.0, f64::max);
    Ok(CompatibilityReport { max_residual, per_sigma })
}

//! Seeded initial-data samplers for the verification suites and the CLI.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::basins::{delta_star, InvariantSetSpec};
use crate::dynamics::SystemState;
use crate::linalg::SquareMatrix;
use crate::model::{ModelParams, PhaseState};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` phases drawn uniformly from `[start, start + width]`.
pub fn uniform_in_arc(rng: &mut impl Rng, n: usize, start: f64, width: f64) -> PhaseState {
    PhaseState::from_vec_unchecked(
        (0..n)
            .map(|_| start + width * rng.random::<f64>())
            .collect(),
    )
}

/// Phases spanning exactly `[0, d0]`: two nodes pinned at the ends, the rest uniform.
pub fn phases_with_diameter(rng: &mut impl Rng, n: usize, d0: f64) -> PhaseState {
    let mut theta: Vec<f64> = (0..n).map(|_| d0 * rng.random::<f64>()).collect();
    theta[0] = 0.0;
    if n > 1 {
        theta[1] = d0;
    }
    PhaseState::from_vec_unchecked(theta)
}

/// A uniform draw from `𝒜_{c,δ}` for the given partition.
pub fn sample_in_invariant_set(
    rng: &mut impl Rng,
    set: &InvariantSetSpec,
    n: usize,
) -> SystemState {
    let side = set.sides(n);
    let theta: Vec<f64> = side
        .iter()
        .map(|&second| (if second { PI } else { 0.0 }) + set.c * rng.random::<f64>())
        .collect();
    let width = 1.0 - set.delta;
    let kappa = SquareMatrix::from_fn(n, |i, j| {
        let mag = set.delta + width * rng.random::<f64>();
        if side[i] == side[j] {
            mag
        } else {
            -mag
        }
    });
    SystemState {
        theta: PhaseState::from_vec_unchecked(theta),
        kappa,
        time: 0.0,
    }
}

/// One randomized invariance experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceTrial {
    pub params: ModelParams,
    pub set: InvariantSetSpec,
    pub state: SystemState,
}

/// Draws `β ∈ (−π, 0)`, `c` with `δ*(β, c) > 0`, `δ ∈ [0, δ*)`, `N ∈ [2, max_n]`,
/// `ε` from `epsilons`, a random partition and a state inside the set.
pub fn sample_invariance_trial(
    rng: &mut impl Rng,
    max_n: usize,
    epsilons: &[f64],
) -> InvarianceTrial {
    let (beta, c, ds) = loop {
        let beta = -PI * rng.random_range(0.02..0.98);
        let c = rng.random_range(0.0..PI / 2.0);
        let ds = delta_star(beta, c).expect("beta and c drawn in range");
        if ds > 0.0 {
            break (beta, c, ds);
        }
    };
    let delta = ds * rng.random::<f64>();
    let n = rng.random_range(2..=max_n);
    let epsilon = epsilons[rng.random_range(0..epsilons.len())];
    let (first, second): (Vec<usize>, Vec<usize>) = (0..n).partition(|_| rng.random_bool(0.5));
    let set = InvariantSetSpec {
        c,
        delta,
        partition: (first, second),
    };
    let state = sample_in_invariant_set(rng, &set, n);
    InvarianceTrial {
        params: ModelParams::new(0.0, 0.0, beta, epsilon).expect("drawn in range"),
        set,
        state,
    }
}

/// Initial data for the positive-coupling convergence result.
///
/// `D⁰` is a fraction in `[0.05, 0.95]` of `min(π + β, |β|)`, and couplings are
/// uniform on `[δ*(β, D⁰), 1]` so the diameter estimate applies from `t = 0`.
pub fn sample_thm1_data(rng: &mut impl Rng, n: usize, beta: f64) -> SystemState {
    let bound = (PI + beta).min(-beta);
    let d0 = bound * rng.random_range(0.05..0.95);
    let floor = delta_star(beta, d0).expect("d0 below pi/2").max(0.0);
    let kappa = SquareMatrix::from_fn(n, |_, _| floor + (1.0 - floor) * rng.random::<f64>());
    SystemState {
        theta: phases_with_diameter(rng, n, d0),
        kappa,
        time: 0.0,
    }
}

/// Initial data for the adaptive convergence result: diameter `d0`, couplings
/// uniform on `[κ_min, 1]` with one off-diagonal entry pinned at `κ_min`.
pub fn sample_thm2_data(rng: &mut impl Rng, n: usize, d0: f64, kappa_min: f64) -> SystemState {
    let mut kappa = SquareMatrix::from_fn(n, |_, _| {
        kappa_min + (1.0 - kappa_min) * rng.random::<f64>()
    });
    let i = rng.random_range(0..n);
    let j = (i + rng.random_range(1..n)) % n;
    kappa.set(i, j, kappa_min);
    SystemState {
        theta: phases_with_diameter(rng, n, d0),
        kappa,
        time: 0.0,
    }
}

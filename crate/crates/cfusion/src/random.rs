//! Seed-deterministic random frame generation for the property suites.

use std::ops::RangeInclusive;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::frame::CFusionFrame;
use crate::numerics::Tolerances;
use crate::space::{MeasureSpace, Subspace, WeightMap};
use crate::CVec;

/// Lower-bound threshold below which `ensure_frame` appends an anchor
/// atom. Set at one so ensured frames have optimal bounds at least one:
/// downstream inversions stay well-conditioned and the pseudoinverse
/// norm cap `sqrt(B/A)` is sharp in that regime (the true norm is
/// `1/sqrt(A)`, which exceeds the cap whenever B < 1).
pub const ENSURE_FRAME_FLOOR: f64 = 1.0;

/// Parameters of the random frame generator. Generation is a pure
/// function of the spec (including its seed).
#[derive(Clone, Debug)]
pub struct RandomFrameSpec {
    pub seed: u64,
    pub ambient_dim: RangeInclusive<usize>,
    pub atom_count: RangeInclusive<usize>,
    /// Per-atom fiber dimension, clamped to the drawn ambient dimension.
    pub fiber_dim: RangeInclusive<usize>,
    pub weight_range: RangeInclusive<f64>,
    pub mass_range: RangeInclusive<f64>,
    /// Append a full-space unit atom when the lower bound falls below
    /// [`ENSURE_FRAME_FLOOR`].
    pub ensure_frame: bool,
}

impl RandomFrameSpec {
    /// Defaults matching the acceptance suites: dimensions up to 8, at
    /// most six atoms (anchor included), moderate weights and masses.
    pub fn suite(seed: u64) -> Self {
        Self {
            seed,
            ambient_dim: 2..=8,
            atom_count: 1..=5,
            fiber_dim: 1..=8,
            weight_range: 0.5..=1.5,
            mass_range: 0.25..=2.0,
            ensure_frame: true,
        }
    }
}

/// Draws a random vector with uniform complex entries in the unit square.
pub fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> CVec {
    CVec::from_iterator(
        n,
        (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))),
    )
}

/// Draws a random subspace of the given dimension.
pub fn random_subspace(n: usize, dim: usize, rng: &mut ChaCha8Rng) -> Subspace {
    let tol = Tolerances::default();
    loop {
        let vectors: Vec<CVec> = (0..dim).map(|_| random_vector(n, rng)).collect();
        if let Ok(subspace) = Subspace::from_spanning(&vectors, &tol) {
            if subspace.dim() == dim {
                return subspace;
            }
        }
    }
}

/// Generates a random c-fusion frame; deterministic for a fixed spec.
pub fn generate_random_frame(spec: &RandomFrameSpec) -> CFusionFrame {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = rng.random_range(spec.ambient_dim.clone());
    let atoms = rng.random_range(spec.atom_count.clone());

    let mut ids = Vec::with_capacity(atoms + 1);
    let mut fibers = Vec::with_capacity(atoms + 1);
    let mut weights = Vec::with_capacity(atoms + 1);
    for i in 0..atoms {
        ids.push((format!("a{i}"), rng.random_range(spec.mass_range.clone())));
        let hi = (*spec.fiber_dim.end()).min(n).max(1);
        let lo = (*spec.fiber_dim.start()).clamp(1, hi);
        let dim = rng.random_range(lo..=hi);
        fibers.push(random_subspace(n, dim, &mut rng));
        weights.push(rng.random_range(spec.weight_range.clone()));
    }

    let frame = CFusionFrame::new(
        MeasureSpace::new(ids.clone()).unwrap(),
        fibers.clone(),
        WeightMap::new(weights.clone()).unwrap(),
    )
    .unwrap();

    if spec.ensure_frame && frame.frame_bounds(&tol).lower <= ENSURE_FRAME_FLOOR {
        ids.push(("anchor".into(), 1.0));
        fibers.push(Subspace::full(n));
        weights.push(1.0);
        return CFusionFrame::new(
            MeasureSpace::new(ids).unwrap(),
            fibers,
            WeightMap::new(weights).unwrap(),
        )
        .unwrap();
    }
    frame
}

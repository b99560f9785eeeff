#![allow(dead_code)]

use clustermem_core::{
    transfer_beam_splitter, CouplingStrength, GaussianState, ModeLabel, QuadratureCombination,
    QuadratureOrdering, SymplecticTransform,
};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

pub fn rotation(theta: f64) -> SymplecticTransform {
    let (s, c) = theta.sin_cos();
    SymplecticTransform::new(DMatrix::from_row_slice(2, 2, &[c, s, -s, c])).unwrap()
}

/// Product of random squeezers, phase rotations and two-mode couplings on `ordering`.
pub fn random_symplectic<R: Rng>(rng: &mut R, ordering: &QuadratureOrdering, depth: usize) -> SymplecticTransform {
    let modes: Vec<ModeLabel> = ordering.modes().to_vec();
    let n = modes.len();
    let mut total = SymplecticTransform::identity(n);
    for _ in 0..depth {
        let a = modes[rng.gen_range(0..n)];
        let step = match rng.gen_range(0..3) {
            0 => SymplecticTransform::squeezer(rng.gen_range(-1.0..1.0)).unwrap().embed(&[a], ordering),
            1 => rotation(rng.gen_range(0.0..std::f64::consts::TAU)).embed(&[a], ordering),
            _ if n > 1 => {
                let mut b = modes[rng.gen_range(0..n)];
                while b == a {
                    b = modes[rng.gen_range(0..n)];
                }
                transfer_beam_splitter(CouplingStrength::new(rng.gen_range(0.0..3.0)).unwrap())
                    .embed(&[a, b], ordering)
            }
            _ => Ok(SymplecticTransform::identity(n)),
        }
        .unwrap();
        total = total.then(&step).unwrap();
    }
    total
}

pub fn random_state<R: Rng>(rng: &mut R, ordering: &QuadratureOrdering) -> GaussianState {
    let s = random_symplectic(rng, ordering, 3 * ordering.n_modes());
    let mean = DVector::from_fn(ordering.dim(), |_, _| rng.gen_range(-2.0..2.0));
    GaussianState::vacuum(ordering.clone()).apply(&s).unwrap().displaced(&mean).unwrap()
}

pub fn random_combination<R: Rng>(rng: &mut R, dim: usize) -> QuadratureCombination {
    let mut c = DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0));
    c[0] += 2.0;
    QuadratureCombination::new(c, "random").unwrap()
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.amax()
}

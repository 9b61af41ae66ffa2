//! Shared generators for the randomized problem suites.

use momentdiff::seq::{MomentSequence, Rational};
use momentdiff::series::{MatrixSeries, VectorSeries};
use momentdiff::solver::CauchyProblem;
use momentdiff::C64;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn sequence_kinds() -> Vec<MomentSequence> {
    vec![
        MomentSequence::factorial(),
        MomentSequence::gevrey(Rational::new(2, 1).unwrap()),
        MomentSequence::gamma_moment(Rational::new(1, 2).unwrap()),
        MomentSequence::q_gevrey(2.0).unwrap(),
    ]
}

fn random_c64(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// One randomized problem. Even indices get a polynomial matrix (degree ≤ 3),
/// odd indices a geometric-tail matrix `A_p = A_c · r^{-p}` so finite
/// empirical radii appear in the suite. The declared radius is valid for
/// both shapes.
pub fn random_problem(rng: &mut ChaCha8Rng, index: usize, order: usize) -> CauchyProblem {
    let kinds = sequence_kinds();
    let seq = kinds[index % kinds.len()].clone();
    let n = 1 + rng.gen_range(0..4usize);
    let radius: f64 = if index % 2 == 0 {
        1.0 + rng.gen_range(0.0..1.0)
    } else {
        0.5 + rng.gen_range(0.0..1.5)
    };
    let degrees: Vec<DMatrix<C64>> = if index % 2 == 0 {
        (0..=order)
            .map(|p| {
                if p <= 3 {
                    DMatrix::from_fn(n, n, |_, _| random_c64(rng))
                } else {
                    DMatrix::zeros(n, n)
                }
            })
            .collect()
    } else {
        let base = DMatrix::from_fn(n, n, |_, _| random_c64(rng));
        (0..=order)
            .map(|p| &base * C64::from(radius.powi(-(p as i32))))
            .collect()
    };
    let a = MatrixSeries::new(degrees).unwrap();
    let b = if index % 3 == 0 {
        let comps: Vec<DVector<C64>> = (0..=order)
            .map(|p| {
                if p <= 2 {
                    DVector::from_fn(n, |_, _| random_c64(rng))
                } else {
                    DVector::zeros(n)
                }
            })
            .collect();
        Some(VectorSeries::new(comps).unwrap())
    } else {
        None
    };
    let y0 = DVector::from_fn(n, |_, _| random_c64(rng));
    CauchyProblem::new(seq, a, b, y0, radius, order).unwrap()
}

/// Largest coefficient magnitude across the problem data and a solution;
/// the natural scale for residuals of `∂_m y − A y − b`.
pub fn problem_coeff_scale(problem: &CauchyProblem, y: &VectorSeries) -> f64 {
    let mut scale = y.max_coeff_norm().max(problem.a.max_coeff_norm());
    if let Some(b) = &problem.b {
        scale = scale.max(b.max_coeff_norm());
    }
    scale
}

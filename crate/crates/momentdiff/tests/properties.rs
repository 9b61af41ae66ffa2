//! Cross-module invariants on randomized inputs.

mod common;

use momentdiff::const_coeff::{equation_residual, solve_const};
use momentdiff::seq::{Extension, MomentSequence, Rational};
use momentdiff::series::{shift_commutation_defect, MatrixSeries, TruncatedSeries};
use momentdiff::solver::{self, EmpiricalRadius};
use momentdiff::transforms;
use momentdiff::C64;
use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c64_strategy(bound: f64) -> impl Strategy<Value = C64> {
    (-bound..bound, -bound..bound).prop_map(|(re, im)| C64::new(re, im))
}

fn series_strategy(order: usize, bound: f64) -> impl Strategy<Value = TruncatedSeries> {
    proptest::collection::vec(c64_strategy(bound), order + 1).prop_map(TruncatedSeries::new)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn moment_derivative_is_linear(
        f in series_strategy(16, 2.0),
        g in series_strategy(16, 2.0),
        a in c64_strategy(2.0),
        b in c64_strategy(2.0),
    ) {
        let seq = MomentSequence::gamma_moment(Rational::new(1, 2).unwrap());
        let lhs = f.scale(a).add(&g.scale(b)).moment_derivative(&seq).unwrap();
        let rhs = f.moment_derivative(&seq).unwrap().scale(a)
            .add(&g.moment_derivative(&seq).unwrap().scale(b));
        for p in 0..=lhs.order() {
            let want = rhs.coeff(p);
            prop_assert!((lhs.coeff(p) - want).norm() <= 1e-12 * (1.0 + want.norm()));
        }
    }

    #[test]
    fn invert_then_multiply_is_identity(
        tail in proptest::collection::vec(c64_strategy(0.8), 12),
        head in c64_strategy(1.0),
    ) {
        // keep the constant term away from zero
        let a0 = head + C64::new(2.0, 0.0);
        let mut coeffs = vec![a0];
        coeffs.extend(tail);
        let f = TruncatedSeries::new(coeffs);
        let inv = f.invert().unwrap();
        let prod = f.multiply(&inv);
        prop_assert!((prod.coeff(0) - C64::ONE).norm() <= 1e-10);
        for p in 1..=prod.order() {
            prop_assert!(prod.coeff(p).norm() <= 1e-10);
        }
    }

    #[test]
    fn shift_expand_roundtrips(
        f in series_strategy(32, 4.0),
        z0 in c64_strategy(4.0),
    ) {
        prop_assume!(z0.norm() <= 4.0);
        let back = f.shift_expand(z0).shift_expand(-z0);
        for p in 0..=f.order() {
            prop_assert!((back.coeff(p) - f.coeff(p)).norm() <= 1e-10 * (1.0 + f.coeff(p).norm()));
        }
    }

    #[test]
    fn commutation_defect_vanishes_exactly_for_scaled_factorials(
        scale in 0.25f64..4.0,
        p in 1usize..9,
    ) {
        let table: Vec<f64> = (0..=12).map(|q| {
            scale * (1..=q).map(|k| k as f64).product::<f64>().max(1.0)
        }).collect();
        let seq = MomentSequence::custom(table, Extension::None).unwrap();
        let d = shift_commutation_defect(&seq, p, C64::new(2.0, 1.0)).unwrap();
        prop_assert!(d.max_coeff_norm() <= 1e-12 * (1.0 + scale));
    }
}

#[test]
fn randomized_suite_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xD1CE);
    for index in 0..40 {
        let problem = common::random_problem(&mut rng, index, 32);
        let sol = solver::solve(&problem).unwrap();

        // residual invariant
        let scale = 1.0 + common::problem_coeff_scale(&problem, &sol.y);
        assert!(
            sol.residual_max <= 1e-9 * scale,
            "problem {index}: residual {} vs scale {scale}",
            sol.residual_max
        );

        // majorant domination
        let magnitudes = solver::normalized_magnitudes(&sol.y, &problem.seq).unwrap();
        for p in 1..=problem.order {
            assert!(
                magnitudes[p] <= sol.majorant[p] + 1e-12,
                "problem {index}, degree {p}: Y = {} > majorant = {}",
                magnitudes[p],
                sol.majorant[p]
            );
        }

        // certificate consistency
        if let (Some(guaranteed), Some(empirical)) =
            (sol.radius_guaranteed, sol.radius_empirical)
        {
            match empirical {
                EmpiricalRadius::Unbounded => {}
                EmpiricalRadius::Finite(r) => assert!(
                    r >= 0.9 * guaranteed,
                    "problem {index}: empirical {r} vs guaranteed {guaranteed}"
                ),
            }
        }
    }
}

#[test]
fn const_coeff_agrees_with_companion_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xBEEF);
    use rand::Rng;
    let kinds = common::sequence_kinds();
    for trial in 0..12 {
        let seq = kinds[trial % kinds.len()].clone();
        let n = 1 + trial % 3;
        let order = 32;
        let a: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let cauchy: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let sol = solve_const(&a, &cauchy, &seq, order).unwrap();
        assert!(
            equation_residual(&a, &sol.y, &seq).unwrap()
                <= 1e-9 * (1.0 + sol.y.max_coeff_norm())
        );

        let a_series: Vec<TruncatedSeries> = a
            .iter()
            .map(|&c| TruncatedSeries::constant(c, order))
            .collect();
        let companion = transforms::equation_to_system(&a_series).unwrap();
        let problem = solver::CauchyProblem::new(
            seq.clone(),
            companion.b.clone(),
            None,
            DVector::from_column_slice(&cauchy),
            1.0,
            order,
        )
        .unwrap();
        let system_sol = solver::solve(&problem).unwrap();
        let first = system_sol.y.component(0);
        for p in 0..=order {
            let want = sol.y.coeff(p);
            assert!(
                (first.coeff(p) - want).norm() <= 1e-9 * (1.0 + want.norm()),
                "trial {trial}, degree {p}"
            );
        }
    }
}

#[test]
fn fundamental_matrix_roundtrip_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xFAB);
    use rand::Rng;
    for trial in 0..8 {
        let n = 2 + trial % 3;
        let order = 24;
        let degrees: Vec<nalgebra::DMatrix<C64>> = (0..=order)
            .map(|p| {
                if p <= 2 {
                    nalgebra::DMatrix::from_fn(n, n, |_, _| {
                        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                    })
                } else {
                    nalgebra::DMatrix::zeros(n, n)
                }
            })
            .collect();
        let a = MatrixSeries::new(degrees).unwrap();
        let seq = MomentSequence::factorial();
        let y = transforms::fundamental_matrix(&seq, &a, 1.0, order).unwrap();
        let recovered = transforms::recover_matrix_from_fundamental(&y, &seq).unwrap();
        for p in 0..=recovered.order() {
            let diff = recovered.degree(p) - a.degree(p);
            assert!(
                momentdiff::series::matrix_inf_norm(&diff)
                    <= 1e-8 * (1.0 + momentdiff::series::matrix_inf_norm(&a.degree(p))),
                "trial {trial}, degree {p}"
            );
        }
    }
}

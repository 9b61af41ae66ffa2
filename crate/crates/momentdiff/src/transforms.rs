//! Conversions between n-th order scalar moment equations and first-order
//! n×n systems.
//!
//! The scalar equation `∂_m^n y + a_1(z) ∂_m^{n-1} y + … + a_n(z) y = 0`
//! corresponds to the companion system `∂_m ỹ = B(z) ỹ` where `B` carries
//! ones on the superdiagonal at degree zero and `(−a_n, …, −a_1)` in its
//! last row, degree by degree.
//!
//! The reverse direction needs structure: the constant term `A(0)` must
//! admit a cyclic row vector `v₀` (characteristic = minimal polynomial),
//! and the higher coefficient matrices must satisfy the commutation
//! condition `v₀ A(0)^j A_p = 0` for `0 ≤ j ≤ n−2`, `p ≥ 1`. Under those
//! two conditions the constant matrix `T` with rows `v₀ A(0)^j` conjugates
//! the system into companion form; the 0/1 pattern of the result is
//! verified numerically rather than assumed, then snapped exact.

use crate::error::{Error, Result};
use crate::seq::MomentSequence;
use crate::series::{matrix_inf_norm, MatrixSeries, TruncatedSeries, VectorSeries};
use crate::solver::{self, CauchyProblem};
use crate::C64;
use nalgebra::{DMatrix, DVector, RowDVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seed for the deterministic pseudorandom cyclic-vector candidates.
const CYCLIC_SEARCH_SEED: u64 = 0x5EED;
/// Number of pseudorandom candidates tried after the canonical basis rows.
const CYCLIC_SEARCH_TRIES: usize = 32;

/// Result of a system↔equation transformation.
#[derive(Clone, Debug)]
pub struct CompanionForm {
    /// Scalar coefficients `a_1..a_n`.
    pub a: Vec<TruncatedSeries>,
    /// The companion-shaped system matrix.
    pub b: MatrixSeries,
    /// Constant change of variables `ỹ = T y` (identity for the
    /// equation-to-system direction).
    pub t: DMatrix<C64>,
    /// `‖T‖_∞ ‖T⁻¹‖_∞`.
    pub t_condition: f64,
}

impl CompanionForm {
    pub fn dim(&self) -> usize {
        self.b.dim()
    }
}

/// A cyclic row vector together with its Krylov basis `{v₀ A^j}`.
#[derive(Clone, Debug)]
pub struct CyclicVector {
    pub v0: RowDVector<C64>,
    pub krylov: Vec<RowDVector<C64>>,
}

/// Builds the companion system for `∂_m^n y + Σ a_j ∂_m^{n-j} y = 0`.
pub fn equation_to_system(a: &[TruncatedSeries]) -> Result<CompanionForm> {
    if a.is_empty() {
        return Err(Error::InvalidInput("need at least one coefficient series".into()));
    }
    let n = a.len();
    let order = a[0].order();
    if a.iter().any(|s| s.order() != order) {
        return Err(Error::InvalidInput(
            "coefficient series must share the truncation order".into(),
        ));
    }
    let mut degrees = Vec::with_capacity(order + 1);
    for p in 0..=order {
        let mut m = DMatrix::zeros(n, n);
        if p == 0 {
            for i in 0..n.saturating_sub(1) {
                m[(i, i + 1)] = C64::ONE;
            }
        }
        for j in 0..n {
            // column j of the last row holds −a_{n−j}
            m[(n - 1, j)] = -a[n - 1 - j].coeff(p);
        }
        degrees.push(m);
    }
    Ok(CompanionForm {
        a: a.to_vec(),
        b: MatrixSeries::new(degrees)?,
        t: DMatrix::identity(n, n),
        t_condition: 1.0,
    })
}

/// Krylov rows `v, vA, …, vA^{n-1}` and their numerical rank.
pub fn krylov_rank(a0: &DMatrix<C64>, v: &RowDVector<C64>) -> (Vec<RowDVector<C64>>, usize) {
    let n = a0.nrows();
    let mut rows = Vec::with_capacity(n);
    rows.push(v.clone());
    for j in 1..n {
        let next = &rows[j - 1] * a0;
        rows.push(next);
    }
    let mut k = DMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        k.set_row(i, row);
    }
    let tol = 1e-10 * matrix_inf_norm(a0).max(1.0);
    let qr = k.col_piv_qr();
    let r = qr.r();
    let rank = (0..n).take_while(|&i| r[(i, i)].norm() > tol).count();
    (rows, rank)
}

fn search_cyclic(a0: &DMatrix<C64>) -> (Option<CyclicVector>, usize) {
    let n = a0.nrows();
    let mut max_rank = 0;
    let try_vector = |v: RowDVector<C64>, max_rank: &mut usize| -> Option<CyclicVector> {
        let (rows, rank) = krylov_rank(a0, &v);
        *max_rank = (*max_rank).max(rank);
        if rank == n {
            Some(CyclicVector {
                v0: v,
                krylov: rows,
            })
        } else {
            None
        }
    };
    for i in 0..n {
        let mut v = RowDVector::zeros(n);
        v[i] = C64::ONE;
        if let Some(found) = try_vector(v, &mut max_rank) {
            return (Some(found), max_rank);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(CYCLIC_SEARCH_SEED);
    for _ in 0..CYCLIC_SEARCH_TRIES {
        let v = RowDVector::from_fn(n, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        if let Some(found) = try_vector(v, &mut max_rank) {
            return (Some(found), max_rank);
        }
    }
    (None, max_rank)
}

/// Searches canonical basis rows, then 32 seeded pseudorandom vectors.
/// Returns `None` when every probe has Krylov rank below `n` (minimal
/// polynomial degree < n).
pub fn find_cyclic_vector(a0: &DMatrix<C64>) -> Option<CyclicVector> {
    search_cyclic(a0).0
}

/// Validates a user-supplied cyclic vector.
pub fn cyclic_from(a0: &DMatrix<C64>, v0: &RowDVector<C64>) -> Result<CyclicVector> {
    let n = a0.nrows();
    if v0.len() != n {
        return Err(Error::InvalidInput(format!(
            "cyclic vector has length {}, matrix is {n}×{n}",
            v0.len()
        )));
    }
    let (rows, rank) = krylov_rank(a0, v0);
    if rank < n {
        return Err(Error::NotCyclic { rank, n });
    }
    Ok(CyclicVector {
        v0: v0.clone(),
        krylov: rows,
    })
}

/// Outcome of the commutation-condition check `v₀ A(0)^j A_p ≡ 0`.
#[derive(Clone, Debug)]
pub struct ConditionCheck {
    pub ok: bool,
    /// `(j, p, magnitude)` of the first violation found.
    pub first_violation: Option<(usize, usize, f64)>,
}

/// Checks `v₀ A₀^j A_p = 0` for `1 ≤ p ≤ N`, `0 ≤ j ≤ n−2`, each entry
/// within `1e−10` relative to `‖A_p‖`. Equivalent to the derivative form
/// since `A^{(p)}(0) = p!·A_p`.
pub fn check_condition_ii(a: &MatrixSeries, cyclic: &CyclicVector) -> ConditionCheck {
    let n = a.dim();
    for j in 0..n.saturating_sub(1) {
        let w = &cyclic.krylov[j];
        for p in 1..=a.order() {
            let ap = a.degree(p);
            let scale = matrix_inf_norm(&ap);
            if scale == 0.0 {
                continue;
            }
            let prod = w * &ap;
            let mag = prod.iter().map(|c| c.norm()).fold(0.0, f64::max);
            if mag > 1e-10 * scale {
                return ConditionCheck {
                    ok: false,
                    first_violation: Some((j, p, mag)),
                };
            }
        }
    }
    ConditionCheck {
        ok: true,
        first_violation: None,
    }
}

/// Transforms `∂_m y = A(z) y` into companion form. `v0` overrides the
/// cyclic-vector search when supplied.
pub fn system_to_equation(
    a: &MatrixSeries,
    v0: Option<&RowDVector<C64>>,
) -> Result<CompanionForm> {
    let n = a.dim();
    let a0 = a.degree(0);
    let cyclic = match v0 {
        Some(v) => cyclic_from(&a0, v)?,
        None => {
            let (found, max_rank) = search_cyclic(&a0);
            found.ok_or(Error::NoCyclicVector { max_rank, n })?
        }
    };
    let check = check_condition_ii(a, &cyclic);
    if let Some((j, p, magnitude)) = check.first_violation {
        return Err(Error::ConditionIiViolation { j, p, magnitude });
    }

    let mut t = DMatrix::zeros(n, n);
    for (i, row) in cyclic.krylov.iter().enumerate() {
        t.set_row(i, row);
    }
    let t_inv = t.clone().lu().try_inverse().ok_or_else(|| {
        Error::SingularAtOrigin("Krylov matrix is numerically singular".into())
    })?;
    let t_condition = matrix_inf_norm(&t) * matrix_inf_norm(&t_inv);

    let mut b = a.conjugate(&t, &t_inv)?;

    // Condition (ii) forces rows 0..n−2 of B to the exact shift pattern;
    // verify within a tolerance, then snap.
    let scale = b.max_coeff_norm().max(1.0);
    let mut degrees: Vec<DMatrix<C64>> = (0..=b.order()).map(|p| b.degree(p)).collect();
    for (p, m) in degrees.iter_mut().enumerate() {
        for i in 0..n.saturating_sub(1) {
            for j in 0..n {
                let expect = if p == 0 && j == i + 1 { C64::ONE } else { C64::ZERO };
                let defect = (m[(i, j)] - expect).norm();
                if defect > 1e-8 * scale {
                    return Err(Error::InvalidInput(format!(
                        "companion structure violated at degree {p}, entry ({i},{j}): defect {defect:.3e}"
                    )));
                }
                m[(i, j)] = expect;
            }
        }
    }
    b = MatrixSeries::new(degrees)?;

    let a_coeffs: Vec<TruncatedSeries> = (1..=n)
        .map(|j| b.entry(n - 1, n - j).scale(-C64::ONE))
        .collect();

    Ok(CompanionForm {
        a: a_coeffs,
        b,
        t,
        t_condition,
    })
}

/// Recovers the coefficient matrix from a fundamental matrix:
/// `A = (∂_m Y) Y⁻¹`, truncated at order `N−1`.
pub fn recover_matrix_from_fundamental(
    y: &MatrixSeries,
    seq: &MomentSequence,
) -> Result<MatrixSeries> {
    let dy = y.moment_derivative(seq)?;
    let inv = y.invert()?;
    dy.mul_matrix(&inv.series)
}

/// Fundamental matrix of the homogeneous system: column `j` solves the
/// Cauchy problem with `y₀ = e_j`. Invertible at the origin by construction.
pub fn fundamental_matrix(
    seq: &MomentSequence,
    a: &MatrixSeries,
    radius: f64,
    order: usize,
) -> Result<MatrixSeries> {
    let n = a.dim();
    let mut columns = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = DVector::zeros(n);
        e[j] = C64::ONE;
        let problem = CauchyProblem::new(seq.clone(), a.clone(), None, e, radius, order)?;
        columns.push(solver::solve(&problem)?.y);
    }
    let mut degrees = Vec::with_capacity(order + 1);
    for p in 0..=order {
        let mut m = DMatrix::zeros(n, n);
        for (j, col) in columns.iter().enumerate() {
            m.set_column(j, &col.degree(p));
        }
        degrees.push(m);
    }
    MatrixSeries::new(degrees)
}

/// Residual `max_p ‖(∂_m y − A y − b)_p‖_∞` through degree
/// `min(order(∂y), order(Ay)) `.
pub fn system_residual(
    seq: &MomentSequence,
    a: &MatrixSeries,
    b: Option<&VectorSeries>,
    y: &VectorSeries,
) -> Result<f64> {
    let dy = y.moment_derivative(seq)?;
    let ay = a.mul_vector(y)?;
    let top = dy.order().min(ay.order());
    let mut worst = 0.0_f64;
    for p in 0..=top {
        let mut r = dy.degree(p) - ay.degree(p);
        if let Some(b) = b {
            r -= b.degree(p);
        }
        worst = worst.max(crate::series::vector_inf_norm(&r));
    }
    Ok(worst)
}

/// The 3×3 matrix polynomial used by the worked transformation example:
/// `A(z) = A₀ + A₁ z` with cyclic vector `(1,2,1)`.
#[cfg(test)]
pub(crate) fn example_3x3() -> MatrixSeries {
    let re = |x: f64| C64::new(x, 0.0);
    let a0 = DMatrix::from_row_slice(
        3,
        3,
        &[
            re(9.0),
            re(8.0),
            re(-11.0),
            re(-3.0),
            re(2.0),
            re(7.0),
            re(-3.0),
            re(8.0),
            re(1.0),
        ],
    );
    let a1 = DMatrix::from_row_slice(
        3,
        3,
        &[
            re(3.0),
            re(3.0),
            re(6.0),
            re(1.0),
            re(1.0),
            re(2.0),
            re(-5.0),
            re(-5.0),
            re(-10.0),
        ],
    );
    MatrixSeries::new(vec![a0, a1]).unwrap()
}

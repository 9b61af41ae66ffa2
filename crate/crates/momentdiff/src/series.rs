//! Truncated power series: scalars, vectors, and square matrices of them.
//!
//! A `TruncatedSeries` of order `N` stores the `N+1` coefficients
//! `a_0..a_N` of `Σ a_p z^p`. Vector and matrix series are stored by
//! degree (`y_p`, `A_p`), which is the shape every recursion in this crate
//! consumes. The moment derivative acts coefficientwise:
//! `∂_m z^p = (m_p/m_{p-1}) z^{p-1}`, constants map to zero.
//!
//! Binary operations truncate to the smaller order of the two operands.

use crate::error::{Error, Result};
use crate::seq::MomentSequence;
use crate::C64;
use nalgebra::{DMatrix, DVector};

/// Condition-number cap above which matrix inversion flags the result.
pub const DEFAULT_CONDITION_CAP: f64 = 1e12;

#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries {
    coeffs: Vec<C64>,
}

impl TruncatedSeries {
    /// Series from coefficients `a_0..a_N`; the order is `len - 1`.
    pub fn new(coeffs: Vec<C64>) -> Self {
        assert!(!coeffs.is_empty(), "a series stores at least a_0");
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zero(order: usize) -> Self {
        Self::new(vec![C64::ZERO; order + 1])
    }

    pub fn constant(c: C64, order: usize) -> Self {
        let mut v = vec![C64::ZERO; order + 1];
        v[0] = c;
        Self::new(v)
    }

    /// The monomial `z^p` materialized at order `order` (requires `p ≤ order`).
    pub fn monomial(p: usize, order: usize) -> Self {
        assert!(p <= order);
        let mut v = vec![C64::ZERO; order + 1];
        v[p] = C64::ONE;
        Self::new(v)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of `z^p`; zero beyond the truncation order.
    pub fn coeff(&self, p: usize) -> C64 {
        self.coeffs.get(p).copied().unwrap_or(C64::ZERO)
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn eval(&self, z: C64) -> C64 {
        let mut acc = C64::ZERO;
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn truncated(&self, order: usize) -> Self {
        let mut v = self.coeffs.clone();
        v.truncate(order + 1);
        v.resize(order + 1, C64::ZERO);
        Self::new(v)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let n = self.order().min(rhs.order());
        Self::new((0..=n).map(|p| self.coeff(p) + rhs.coeff(p)).collect())
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let n = self.order().min(rhs.order());
        Self::new((0..=n).map(|p| self.coeff(p) - rhs.coeff(p)).collect())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Cauchy product truncated at the smaller order.
    pub fn multiply(&self, rhs: &Self) -> Self {
        let n = self.order().min(rhs.order());
        let mut out = vec![C64::ZERO; n + 1];
        for (p, slot) in out.iter_mut().enumerate() {
            let mut acc = C64::ZERO;
            for k in 0..=p {
                acc += self.coeff(k) * rhs.coeff(p - k);
            }
            *slot = acc;
        }
        Self::new(out)
    }

    /// `∂_m f`: output coefficient at `z^p` is `a_{p+1}·m_{p+1}/m_p`.
    /// Drops the order by one; an order-0 input maps to the zero series.
    pub fn moment_derivative(&self, seq: &MomentSequence) -> Result<Self> {
        let n = self.order();
        if n == 0 {
            return Ok(Self::zero(0));
        }
        let mut out = vec![C64::ZERO; n];
        for (p, slot) in out.iter_mut().enumerate() {
            *slot = self.coeff(p + 1) * seq.ratio(p + 1)?;
        }
        Ok(Self::new(out))
    }

    /// `∂_m^j f`. Errors with [`Error::OrderExhausted`] when `j` exceeds the
    /// truncation order.
    pub fn iterated_moment_derivative(&self, seq: &MomentSequence, j: usize) -> Result<Self> {
        if j > self.order() {
            return Err(Error::OrderExhausted {
                requested: j,
                order: self.order(),
            });
        }
        let mut f = self.clone();
        for _ in 0..j {
            f = f.moment_derivative(seq)?;
        }
        Ok(f)
    }

    /// Multiplicative inverse, same order. Requires `f(0) ≠ 0`.
    pub fn invert(&self) -> Result<Self> {
        let a0 = self.coeff(0);
        if a0 == C64::ZERO {
            return Err(Error::SingularAtOrigin(
                "scalar series has zero constant term".into(),
            ));
        }
        let n = self.order();
        let b0 = C64::ONE / a0;
        let mut b = vec![C64::ZERO; n + 1];
        b[0] = b0;
        for p in 1..=n {
            let mut acc = C64::ZERO;
            for k in 1..=p {
                acc += self.coeff(k) * b[p - k];
            }
            b[p] = -b0 * acc;
        }
        Ok(Self::new(b))
    }

    /// Coefficients of `g` with `g(z) = f(z - z0)` as a polynomial identity,
    /// by binomial re-expansion. Exact for polynomials.
    pub fn shift_expand(&self, z0: C64) -> Self {
        let n = self.order();
        let binom = binomial_table(n);
        // powers[k] = (-z0)^k
        let mut powers = Vec::with_capacity(n + 1);
        powers.push(C64::ONE);
        for _ in 1..=n {
            powers.push(*powers.last().unwrap() * (-z0));
        }
        let mut out = vec![C64::ZERO; n + 1];
        for (j, slot) in out.iter_mut().enumerate() {
            let mut acc = C64::ZERO;
            for p in j..=n {
                acc += self.coeff(p) * binom[p][j] * powers[p - j];
            }
            *slot = acc;
        }
        Self::new(out)
    }
}

/// Binomial coefficients `C(p, j)` for `p ≤ n`: Pascal recurrence up to
/// n = 64, log-gamma beyond (Pascal values pass 2^53 there).
fn binomial_table(n: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    if n <= 64 {
        rows.push(vec![1.0]);
        for p in 1..=n {
            let prev = &rows[p - 1];
            let mut row = vec![1.0; p + 1];
            for j in 1..p {
                row[j] = prev[j - 1] + prev[j];
            }
            rows.push(row);
        }
    } else {
        use statrs::function::gamma::ln_gamma;
        for p in 0..=n {
            let mut row = Vec::with_capacity(p + 1);
            for j in 0..=p {
                row.push(
                    (ln_gamma(p as f64 + 1.0)
                        - ln_gamma(j as f64 + 1.0)
                        - ln_gamma((p - j) as f64 + 1.0))
                    .exp()
                    .round_ties_even(),
                );
            }
            rows.push(row);
        }
    }
    rows
}

/// `(∂_m z^p)(z−z0) − ∂_m((z−z0)^p)` as a polynomial of order `p−1`.
///
/// The zero polynomial exactly when moment derivation commutes with
/// re-centering, which forces `m = (C·p!)` — for any other sequence the
/// defect is nonzero.
pub fn shift_commutation_defect(
    seq: &MomentSequence,
    p: usize,
    z0: C64,
) -> Result<TruncatedSeries> {
    if p == 0 {
        return Err(Error::InvalidInput("defect requires p >= 1".into()));
    }
    if z0 == C64::ZERO {
        return Err(Error::InvalidInput("defect requires z0 != 0".into()));
    }
    let binom = binomial_table(p);
    let mut powers = Vec::with_capacity(p);
    powers.push(C64::ONE);
    for _ in 1..p {
        powers.push(*powers.last().unwrap() * (-z0));
    }
    let rp = seq.ratio(p)?;
    let mut out = vec![C64::ZERO; p];
    for (j, slot) in out.iter_mut().enumerate() {
        // factor out the common power so integer-ratio sequences cancel
        // exactly instead of leaving rounding residue
        let s = binom[p - 1][j] * rp - binom[p][j + 1] * seq.ratio(j + 1)?;
        *slot = powers[p - 1 - j] * s;
    }
    Ok(TruncatedSeries::new(out))
}

/// ∞-norm of a complex vector (largest modulus).
pub fn vector_inf_norm(v: &DVector<C64>) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Matrix norm used throughout: maximum absolute row sum.
pub fn matrix_inf_norm(m: &DMatrix<C64>) -> f64 {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// A vector of power series stored by degree: `degrees[p] = y_p ∈ ℂⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorSeries {
    degrees: Vec<DVector<C64>>,
}

impl VectorSeries {
    pub fn new(degrees: Vec<DVector<C64>>) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::InvalidInput("vector series needs degree 0".into()));
        }
        let n = degrees[0].len();
        if n == 0 || degrees.iter().any(|d| d.len() != n) {
            return Err(Error::InvalidInput(
                "vector series degrees must share a positive dimension".into(),
            ));
        }
        Ok(Self { degrees })
    }

    pub fn zero(dim: usize, order: usize) -> Self {
        Self {
            degrees: vec![DVector::zeros(dim); order + 1],
        }
    }

    pub fn from_components(comps: &[TruncatedSeries]) -> Result<Self> {
        if comps.is_empty() {
            return Err(Error::InvalidInput("no components".into()));
        }
        let order = comps[0].order();
        if comps.iter().any(|c| c.order() != order) {
            return Err(Error::InvalidInput(
                "components must share the truncation order".into(),
            ));
        }
        let degrees = (0..=order)
            .map(|p| DVector::from_iterator(comps.len(), comps.iter().map(|c| c.coeff(p))))
            .collect();
        Ok(Self { degrees })
    }

    pub fn dim(&self) -> usize {
        self.degrees[0].len()
    }

    pub fn order(&self) -> usize {
        self.degrees.len() - 1
    }

    pub fn degree(&self, p: usize) -> DVector<C64> {
        self.degrees
            .get(p)
            .cloned()
            .unwrap_or_else(|| DVector::zeros(self.dim()))
    }

    pub fn component(&self, i: usize) -> TruncatedSeries {
        TruncatedSeries::new(self.degrees.iter().map(|d| d[i]).collect())
    }

    pub fn components(&self) -> Vec<TruncatedSeries> {
        (0..self.dim()).map(|i| self.component(i)).collect()
    }

    pub fn moment_derivative(&self, seq: &MomentSequence) -> Result<Self> {
        let n = self.order();
        if n == 0 {
            return Ok(Self::zero(self.dim(), 0));
        }
        let mut degrees = Vec::with_capacity(n);
        for p in 0..n {
            degrees.push(self.degree(p + 1) * C64::from(seq.ratio(p + 1)?));
        }
        Self::new(degrees)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        if self.dim() != rhs.dim() {
            return Err(Error::InvalidInput("vector dimension mismatch".into()));
        }
        let n = self.order().min(rhs.order());
        Self::new((0..=n).map(|p| self.degree(p) - rhs.degree(p)).collect())
    }

    /// Left-multiplication by a constant matrix, degree by degree.
    pub fn apply_constant(&self, t: &DMatrix<C64>) -> Result<Self> {
        if t.ncols() != self.dim() {
            return Err(Error::InvalidInput("matrix/vector dimension mismatch".into()));
        }
        Self::new(self.degrees.iter().map(|d| t * d).collect())
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.degrees
            .iter()
            .map(vector_inf_norm)
            .fold(0.0, f64::max)
    }
}

/// A square-matrix power series stored by degree: `degrees[p] = A_p`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixSeries {
    degrees: Vec<DMatrix<C64>>,
}

/// Inverse of a matrix series together with conditioning information for
/// the constant term.
#[derive(Clone, Debug)]
pub struct MatrixInverse {
    pub series: MatrixSeries,
    /// `‖Y(0)‖_∞ · ‖Y(0)⁻¹‖_∞`.
    pub condition_estimate: f64,
    pub ill_conditioned: bool,
}

impl MatrixSeries {
    pub fn new(degrees: Vec<DMatrix<C64>>) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::InvalidInput("matrix series needs degree 0".into()));
        }
        let n = degrees[0].nrows();
        if n == 0 || degrees.iter().any(|d| d.nrows() != n || d.ncols() != n) {
            return Err(Error::InvalidInput(
                "matrix series degrees must be square with a shared dimension".into(),
            ));
        }
        Ok(Self { degrees })
    }

    pub fn zero(dim: usize, order: usize) -> Self {
        Self {
            degrees: vec![DMatrix::zeros(dim, dim); order + 1],
        }
    }

    pub fn identity(dim: usize, order: usize) -> Self {
        let mut degrees = vec![DMatrix::zeros(dim, dim); order + 1];
        degrees[0] = DMatrix::identity(dim, dim);
        Self { degrees }
    }

    pub fn constant(m: DMatrix<C64>, order: usize) -> Self {
        let dim = m.nrows();
        let mut degrees = vec![DMatrix::zeros(dim, dim); order + 1];
        degrees[0] = m;
        Self { degrees }
    }

    pub fn dim(&self) -> usize {
        self.degrees[0].nrows()
    }

    pub fn order(&self) -> usize {
        self.degrees.len() - 1
    }

    pub fn degree(&self, p: usize) -> DMatrix<C64> {
        self.degrees
            .get(p)
            .cloned()
            .unwrap_or_else(|| DMatrix::zeros(self.dim(), self.dim()))
    }

    pub fn degrees(&self) -> &[DMatrix<C64>] {
        &self.degrees
    }

    pub fn entry(&self, i: usize, j: usize) -> TruncatedSeries {
        TruncatedSeries::new(self.degrees.iter().map(|d| d[(i, j)]).collect())
    }

    pub fn truncated(&self, order: usize) -> Self {
        let mut degrees = self.degrees.clone();
        degrees.truncate(order + 1);
        while degrees.len() < order + 1 {
            degrees.push(DMatrix::zeros(self.dim(), self.dim()));
        }
        Self { degrees }
    }

    pub fn moment_derivative(&self, seq: &MomentSequence) -> Result<Self> {
        let n = self.order();
        if n == 0 {
            return Ok(Self::zero(self.dim(), 0));
        }
        let mut degrees = Vec::with_capacity(n);
        for p in 0..n {
            degrees.push(self.degree(p + 1) * C64::from(seq.ratio(p + 1)?));
        }
        Self::new(degrees)
    }

    /// `(A·y)(z)` truncated at the smaller order; degree `p` is
    /// `Σ_{k≤p} A_{p−k} y_k` with ascending `k` so results are deterministic.
    pub fn mul_vector(&self, y: &VectorSeries) -> Result<VectorSeries> {
        if self.dim() != y.dim() {
            return Err(Error::InvalidInput(format!(
                "dimension mismatch: matrix {}×{} vs vector {}",
                self.dim(),
                self.dim(),
                y.dim()
            )));
        }
        let n = self.order().min(y.order());
        let mut degrees = Vec::with_capacity(n + 1);
        for p in 0..=n {
            let mut acc = DVector::zeros(self.dim());
            for k in 0..=p {
                acc += self.degree(p - k) * y.degree(k);
            }
            degrees.push(acc);
        }
        VectorSeries::new(degrees)
    }

    pub fn mul_matrix(&self, rhs: &Self) -> Result<Self> {
        if self.dim() != rhs.dim() {
            return Err(Error::InvalidInput("matrix dimension mismatch".into()));
        }
        let n = self.order().min(rhs.order());
        let mut degrees = Vec::with_capacity(n + 1);
        for p in 0..=n {
            let mut acc = DMatrix::zeros(self.dim(), self.dim());
            for k in 0..=p {
                acc += self.degree(p - k) * rhs.degree(k);
            }
            degrees.push(acc);
        }
        Self::new(degrees)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        if self.dim() != rhs.dim() {
            return Err(Error::InvalidInput("matrix dimension mismatch".into()));
        }
        let n = self.order().min(rhs.order());
        Self::new((0..=n).map(|p| self.degree(p) - rhs.degree(p)).collect())
    }

    /// Conjugation by constant matrices: `L · A(z) · R` degree by degree.
    pub fn conjugate(&self, left: &DMatrix<C64>, right: &DMatrix<C64>) -> Result<Self> {
        if left.ncols() != self.dim() || right.nrows() != self.dim() {
            return Err(Error::InvalidInput("conjugation dimension mismatch".into()));
        }
        Self::new(self.degrees.iter().map(|d| left * d * right).collect())
    }

    pub fn invert(&self) -> Result<MatrixInverse> {
        self.invert_with_cap(DEFAULT_CONDITION_CAP)
    }

    /// Series inverse at the same order. `Y(0)` must be invertible; results
    /// with `‖Y(0)‖·‖Y(0)⁻¹‖` above `condition_cap` are flagged.
    pub fn invert_with_cap(&self, condition_cap: f64) -> Result<MatrixInverse> {
        let a0 = self.degree(0);
        let b0 = a0.clone().lu().try_inverse().ok_or_else(|| {
            Error::SingularAtOrigin("matrix series has singular constant term".into())
        })?;
        let condition_estimate = matrix_inf_norm(&a0) * matrix_inf_norm(&b0);
        if !condition_estimate.is_finite() {
            return Err(Error::SingularAtOrigin(
                "matrix series constant term is numerically singular".into(),
            ));
        }
        let n = self.order();
        let mut degrees = Vec::with_capacity(n + 1);
        degrees.push(b0.clone());
        for p in 1..=n {
            let mut acc = DMatrix::zeros(self.dim(), self.dim());
            for k in 1..=p {
                acc += self.degree(k) * &degrees[p - k];
            }
            degrees.push(-(&b0 * acc));
        }
        Ok(MatrixInverse {
            series: Self::new(degrees)?,
            condition_estimate,
            ill_conditioned: condition_estimate > condition_cap,
        })
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.degrees
            .iter()
            .map(matrix_inf_norm)
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::Rational;
    use approx::assert_relative_eq;

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn moment_derivative_matches_classical_for_factorial() {
        let seq = MomentSequence::factorial();
        let f = TruncatedSeries::monomial(2, 2); // z^2
        let df = f.moment_derivative(&seq).unwrap();
        assert_eq!(df.coeffs(), &[C64::ZERO, re(2.0)]);

        // exactness on all monomials up to order 64
        for p in 1..=64usize {
            let f = TruncatedSeries::monomial(p, 64);
            let df = f.moment_derivative(&seq).unwrap();
            assert_eq!(df.coeff(p - 1), re(p as f64));
        }
    }

    #[test]
    fn moment_derivative_gamma_half_on_z() {
        let seq = MomentSequence::gamma_moment(Rational::new(1, 2).unwrap());
        let f = TruncatedSeries::monomial(1, 1);
        let df = f.moment_derivative(&seq).unwrap();
        // Γ(3/2)/Γ(1) = √π/2
        assert_relative_eq!(
            df.coeff(0).re,
            std::f64::consts::PI.sqrt() / 2.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn moment_derivative_gevrey2_on_cube() {
        let seq = MomentSequence::gevrey(Rational::new(2, 1).unwrap());
        let f = TruncatedSeries::monomial(3, 3);
        let df = f.moment_derivative(&seq).unwrap();
        assert_eq!(df.coeff(2), re(9.0));
    }

    #[test]
    fn constants_annihilate() {
        let seq = MomentSequence::factorial();
        let f = TruncatedSeries::constant(re(5.0), 0);
        let df = f.moment_derivative(&seq).unwrap();
        assert_eq!(df.coeffs(), &[C64::ZERO]);
    }

    #[test]
    fn iterated_derivative_at_zero_gives_moment() {
        let seqs = [
            MomentSequence::factorial(),
            MomentSequence::gevrey(Rational::new(2, 1).unwrap()),
            MomentSequence::gamma_moment(Rational::new(1, 2).unwrap()),
        ];
        for seq in &seqs {
            for j in 0..=6usize {
                let f = TruncatedSeries::monomial(j, 8);
                let d = f.iterated_moment_derivative(seq, j).unwrap();
                assert_relative_eq!(
                    d.coeff(0).re,
                    seq.value(j).unwrap(),
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn iterated_derivative_identity_and_exhaustion() {
        let seq = MomentSequence::factorial();
        let f = TruncatedSeries::from_real(&[1.0, 2.0, 3.0]);
        assert_eq!(f.iterated_moment_derivative(&seq, 0).unwrap(), f);
        assert!(matches!(
            f.iterated_moment_derivative(&seq, 3),
            Err(Error::OrderExhausted { requested: 3, order: 2 })
        ));
    }

    #[test]
    fn exp_series_is_derivative_fixed_point() {
        let seq = MomentSequence::factorial();
        let n = 12;
        let coeffs: Vec<f64> = (0..=n)
            .map(|p| (-statrs::function::gamma::ln_gamma(p as f64 + 1.0)).exp())
            .collect();
        let f = TruncatedSeries::from_real(&coeffs);
        let d3 = f.iterated_moment_derivative(&seq, 3).unwrap();
        for p in 0..=n - 3 {
            assert_relative_eq!(d3.coeff(p).re, f.coeff(p).re, max_relative = 1e-10);
        }
    }

    #[test]
    fn multiply_examples() {
        let a = TruncatedSeries::from_real(&[1.0, 1.0, 0.0]); // 1+z at order 2
        let b = TruncatedSeries::from_real(&[1.0, -1.0, 0.0]);
        assert_eq!(
            a.multiply(&b).coeffs(),
            &[re(1.0), re(0.0), re(-1.0)]
        );

        let geo = TruncatedSeries::from_real(&[1.0; 9]);
        let one_minus_z = {
            let mut v = vec![0.0; 9];
            v[0] = 1.0;
            v[1] = -1.0;
            TruncatedSeries::from_real(&v)
        };
        let prod = geo.multiply(&one_minus_z);
        assert_eq!(prod.coeff(0), re(1.0));
        for p in 1..=8 {
            assert_eq!(prod.coeff(p), C64::ZERO);
        }
    }

    #[test]
    fn matrix_vector_product_degree_zero() {
        let a0 = DMatrix::from_row_slice(2, 2, &[re(1.0), re(2.0), re(3.0), re(4.0)]);
        let a1 = DMatrix::from_row_slice(2, 2, &[re(0.5), re(0.0), re(0.0), re(0.5)]);
        let a = MatrixSeries::new(vec![a0.clone(), a1]).unwrap();
        let y0 = DVector::from_row_slice(&[re(1.0), re(-1.0)]);
        let y = VectorSeries::new(vec![y0.clone(), DVector::zeros(2)]).unwrap();
        let prod = a.mul_vector(&y).unwrap();
        assert_eq!(prod.degree(0), &a0 * &y0);
    }

    #[test]
    fn scalar_invert_geometric() {
        let f = TruncatedSeries::from_real(&[1.0, -1.0, 0.0, 0.0, 0.0, 0.0]);
        let inv = f.invert().unwrap();
        for p in 0..=5 {
            assert_relative_eq!(inv.coeff(p).re, 1.0, max_relative = 1e-14);
        }
        let residual = f.multiply(&inv);
        assert_relative_eq!(residual.coeff(0).re, 1.0, max_relative = 1e-14);
        for p in 1..=5 {
            assert!(residual.coeff(p).norm() <= 1e-12);
        }
    }

    #[test]
    fn matrix_invert_nilpotent() {
        let i2 = DMatrix::identity(2, 2);
        let nil = DMatrix::from_row_slice(2, 2, &[C64::ZERO, re(1.0), C64::ZERO, C64::ZERO]);
        let y = MatrixSeries::new(vec![i2.clone(), nil.clone()]).unwrap();
        let inv = y.invert().unwrap();
        assert!(!inv.ill_conditioned);
        assert_eq!(inv.series.degree(0), i2);
        assert_eq!(inv.series.degree(1), -nil);
    }

    #[test]
    fn matrix_invert_singular_at_origin() {
        let s = DMatrix::from_row_slice(2, 2, &[re(1.0), re(1.0), re(1.0), re(1.0)]);
        let y = MatrixSeries::constant(s, 2);
        assert!(matches!(y.invert(), Err(Error::SingularAtOrigin(_))));
    }

    #[test]
    fn matrix_invert_flags_ill_conditioned() {
        let s = DMatrix::from_row_slice(2, 2, &[re(1.0), re(1.0), re(1.0), re(1.0 + 1e-14)]);
        let y = MatrixSeries::constant(s, 1);
        let inv = y.invert().unwrap();
        assert!(inv.ill_conditioned);
        assert!(inv.condition_estimate > 1e12);
    }

    #[test]
    fn shift_expand_square() {
        let f = TruncatedSeries::monomial(2, 2);
        let g = f.shift_expand(re(1.0));
        assert_eq!(g.coeffs(), &[re(1.0), re(-2.0), re(1.0)]);
        assert_eq!(f.shift_expand(C64::ZERO), f);
    }

    #[test]
    fn shift_expand_eval_consistency() {
        let f = TruncatedSeries::from_real(&[1.0, 1.0, 1.0]);
        let z0 = C64::new(0.0, 1.0);
        let g = f.shift_expand(z0);
        let z = re(2.0);
        let lhs = g.eval(z);
        let rhs = f.eval(z - z0);
        assert!((lhs - rhs).norm() <= 1e-12);
    }

    #[test]
    fn shift_roundtrip() {
        let f = TruncatedSeries::from_real(&[0.5, -1.5, 2.0, 0.25, -3.0]);
        for z0 in [re(1.0), C64::new(2.0, 1.0), C64::new(-0.5, 3.5)] {
            let back = f.shift_expand(z0).shift_expand(-z0);
            for p in 0..=f.order() {
                assert!((back.coeff(p) - f.coeff(p)).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn commutation_defect_zero_for_scaled_factorials() {
        let f = MomentSequence::factorial();
        let d = shift_commutation_defect(&f, 7, re(1.0)).unwrap();
        assert!(d.max_coeff_norm() <= 1e-12);

        let table: Vec<f64> = (0..=10).map(|p| 3.0 * exact_fact(p)).collect();
        let c3 = MomentSequence::custom(table, crate::seq::Extension::None).unwrap();
        let d = shift_commutation_defect(&c3, 4, re(2.0)).unwrap();
        assert!(d.max_coeff_norm() <= 1e-12);
    }

    #[test]
    fn commutation_defect_gevrey2_is_minus_two() {
        let g2 = MomentSequence::gevrey(Rational::new(2, 1).unwrap());
        let d = shift_commutation_defect(&g2, 2, re(1.0)).unwrap();
        assert_relative_eq!(d.coeff(0).re, -2.0, max_relative = 1e-12);
        assert!(d.coeff(1).norm() <= 1e-12);
    }

    #[test]
    fn commutation_defect_nonzero_for_non_factorial_kinds() {
        let kinds = [
            MomentSequence::gevrey(Rational::new(2, 1).unwrap()),
            MomentSequence::gamma_moment(Rational::new(1, 2).unwrap()),
            MomentSequence::q_gevrey(2.0).unwrap(),
        ];
        for seq in &kinds {
            let d = shift_commutation_defect(seq, 2, re(1.0)).unwrap();
            assert!(d.max_coeff_norm() > 0.1, "defect should be visible");
        }
    }

    fn exact_fact(p: usize) -> f64 {
        (1..=p).map(|k| k as f64).product::<f64>().max(1.0)
    }
}

//! Constant-coefficient moment equations over the `Δ_h E(λ, z)` basis.
//!
//! `Δ_h E(λ, z) = Σ_{p≥h} C(p,h) λ^{p−h} z^p / m_p` is the moment analogue
//! of `z^h e^{λz}/h!`. It satisfies the ladder identity
//! `(∂_m − λ) Δ_h E(λ, ·) = Δ_{h-1} E(λ, ·)`, so `(∂_m − λ)^ℓ` annihilates
//! `Δ_k` for `k < ℓ` and the equation
//! `∂_m^n y + a_1 ∂_m^{n-1} y + … + a_n y = 0` is solved by
//! `y = Σ_j Σ_k c_{j,k} Δ_{k-1} E(λ_j, ·)` over the characteristic roots
//! `λ_j` with multiplicities `ℓ_j`.
//!
//! The coefficients `c_{j,k}` come from the Cauchy data through the exact
//! algebraic identity `∂_m^i y(0) = m_i · (coefficient i)`, which makes the
//! fitting matrix entry `C(i, k−1) λ_j^{i−k+1}` — the moments cancel, and
//! for simple roots the matrix is the Vandermonde matrix of the `λ_j`.

use crate::error::{Error, Result};
use crate::seq::MomentSequence;
use crate::series::TruncatedSeries;
use crate::C64;
use nalgebra::{DMatrix, DVector};
use statrs::function::gamma::ln_gamma;

/// Relative tolerance for clustering near-identical characteristic roots.
const ROOT_MERGE_TOL: f64 = 1e-6;

/// One basis element `Δ_h E(λ, z)`, materialized as a truncated series.
#[derive(Clone, Debug)]
pub struct DeltaE {
    pub lambda: C64,
    pub h: usize,
    pub series: TruncatedSeries,
}

/// Materializes `Δ_h E(λ, z)` to the given order. Coefficients are built in
/// log magnitude so `m_p` never overflows; entries below the subnormal range
/// flush to zero, which is where they belong for an entire function.
pub fn delta_e(seq: &MomentSequence, lambda: C64, h: usize, order: usize) -> Result<DeltaE> {
    if h > order {
        return Err(Error::InvalidInput(format!(
            "delta_e requires h <= order, got h = {h}, order = {order}"
        )));
    }
    let binom = small_binomials(order, h);
    let mut coeffs = vec![C64::ZERO; order + 1];
    let (log_mod, arg) = (lambda.norm().ln(), lambda.arg());
    for p in h..=order {
        let lp = seq.log_value(p)?;
        let c = if lambda == C64::ZERO {
            if p == h {
                C64::from((-lp).exp())
            } else {
                C64::ZERO
            }
        } else {
            let e = p - h;
            let magnitude = (e as f64 * log_mod - lp).exp() * binom[p];
            if lambda.im == 0.0 {
                // exact parity sign: from_polar at multiples of π would
                // leave ~1e-16 imaginary junk on real roots
                let sign = if lambda.re < 0.0 && e % 2 == 1 { -1.0 } else { 1.0 };
                C64::new(sign * magnitude, 0.0)
            } else {
                C64::from_polar(magnitude, e as f64 * arg)
            }
        };
        coeffs[p] = c;
    }
    Ok(DeltaE {
        lambda,
        h,
        series: TruncatedSeries::new(coeffs),
    })
}

/// `C(p, h)` for all `p ≤ order` at fixed small `h`: the running product
/// stays exact in f64 for every h used here.
fn small_binomials(order: usize, h: usize) -> Vec<f64> {
    let mut out = vec![0.0; order + 1];
    for (p, slot) in out.iter_mut().enumerate().skip(h) {
        if p <= 64 || h <= 8 {
            let mut b = 1.0_f64;
            for i in 0..h {
                b = b * (p - i) as f64 / (i + 1) as f64;
            }
            *slot = b.round();
        } else {
            *slot = (ln_gamma(p as f64 + 1.0)
                - ln_gamma(h as f64 + 1.0)
                - ln_gamma((p - h) as f64 + 1.0))
            .exp();
        }
    }
    out
}

/// Characteristic roots of `λ^n + a_1 λ^{n-1} + … + a_n` with multiplicities.
#[derive(Clone, Debug)]
pub struct RootSet {
    /// `(root, multiplicity)`, sorted by real then imaginary part.
    pub roots: Vec<(C64, usize)>,
    /// Two clusters sit within five merge tolerances of each other.
    pub merge_warning: bool,
}

/// Companion-matrix eigenvalues, Newton-polished, then clustered.
/// Exact-zero trailing coefficients are deflated first so nilpotent input
/// yields an exact zero root of full multiplicity.
pub fn characteristic_roots(a: &[C64]) -> Result<RootSet> {
    let n = a.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty coefficient list".into()));
    }
    let zero_mult = a.iter().rev().take_while(|c| **c == C64::ZERO).count();
    let d = n - zero_mult;
    let reduced = &a[..d];

    let mut raw: Vec<C64> = Vec::with_capacity(d);
    if d > 0 {
        let mut companion = DMatrix::<C64>::zeros(d, d);
        for i in 1..d {
            companion[(i, i - 1)] = C64::ONE;
        }
        for i in 0..d {
            companion[(i, d - 1)] = -reduced[d - 1 - i];
        }
        let eig = companion
            .clone()
            .eigenvalues()
            .or_else(|| {
                companion
                    .try_schur(1e-14, 20_000)
                    .map(|s| s.unpack().1.diagonal())
            })
            .ok_or_else(|| {
                Error::InvalidInput("eigenvalue iteration failed on companion matrix".into())
            })?;
        raw.extend(eig.iter().copied());
        for root in raw.iter_mut() {
            *root = newton_polish(reduced, *root);
        }
    }

    let scale = 1.0 + raw.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let tol = ROOT_MERGE_TOL * scale;

    // single-linkage clustering via union-find
    let k = raw.len();
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    for i in 0..k {
        for j in i + 1..k {
            if (raw[i] - raw[j]).norm() <= tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut clusters: Vec<(C64, usize)> = Vec::new();
    for rep in 0..k {
        if find(&mut parent, rep) != rep {
            continue;
        }
        let members: Vec<C64> = (0..k)
            .filter(|&i| find(&mut parent, i) == rep)
            .map(|i| raw[i])
            .collect();
        let centroid = members.iter().sum::<C64>() / C64::from(members.len() as f64);
        clusters.push((centroid, members.len()));
    }

    if zero_mult > 0 {
        if let Some(entry) = clusters.iter_mut().find(|(c, _)| c.norm() <= tol) {
            let (c, m) = *entry;
            *entry = (
                c * C64::from(m as f64 / (m + zero_mult) as f64),
                m + zero_mult,
            );
        } else {
            clusters.push((C64::ZERO, zero_mult));
        }
    }

    let mut merge_warning = false;
    for i in 0..clusters.len() {
        for j in i + 1..clusters.len() {
            if (clusters[i].0 - clusters[j].0).norm() < 5.0 * tol {
                merge_warning = true;
            }
        }
    }

    clusters.sort_by(|x, y| {
        (x.0.re, x.0.im)
            .partial_cmp(&(y.0.re, y.0.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(RootSet {
        roots: clusters,
        merge_warning,
    })
}

fn newton_polish(a: &[C64], mut z: C64) -> C64 {
    let d = a.len();
    let eval = |z: C64| -> (C64, C64) {
        // monic: p(z) = z^d + a_1 z^{d-1} + … + a_d
        let mut p = C64::ONE;
        let mut dp = C64::ZERO;
        for coeff in a.iter().take(d) {
            dp = dp * z + p;
            p = p * z + coeff;
        }
        (p, dp)
    };
    let (mut pv, _) = eval(z);
    for _ in 0..5 {
        let (p, dp) = eval(z);
        if dp == C64::ZERO {
            break;
        }
        let step = p / dp;
        let cand = z - step;
        let (pc, _) = eval(cand);
        if pc.norm() < pv.norm() {
            z = cand;
            pv = pc;
        } else {
            break;
        }
    }
    z
}

/// Solution of a constant-coefficient Cauchy problem over the Δ-basis.
#[derive(Clone, Debug)]
pub struct ConstCoeffSolution {
    pub roots: Vec<(C64, usize)>,
    /// `(j, k, c_{j,k})` with `j` indexing `roots` and `1 ≤ k ≤ ℓ_j`.
    pub coeffs: Vec<(usize, usize, C64)>,
    pub y: TruncatedSeries,
    pub cauchy_data: Vec<C64>,
    pub fit_condition: f64,
    pub merge_warning: bool,
}

/// Solves `∂_m^n y + a_1 ∂_m^{n-1} y + … + a_n y = 0` with Cauchy data
/// `∂_m^i y(0) = cauchy[i]`.
pub fn solve_const(
    a: &[C64],
    cauchy: &[C64],
    seq: &MomentSequence,
    order: usize,
) -> Result<ConstCoeffSolution> {
    let n = a.len();
    if n == 0 {
        return Err(Error::InvalidInput("equation order must be at least 1".into()));
    }
    if cauchy.len() != n {
        return Err(Error::InvalidInput(format!(
            "need {n} Cauchy data entries, got {}",
            cauchy.len()
        )));
    }
    if order < n {
        return Err(Error::InvalidInput(format!(
            "truncation order {order} is below the equation order {n}"
        )));
    }

    let root_set = characteristic_roots(a)?;
    let mut columns: Vec<(usize, usize, DeltaE)> = Vec::with_capacity(n);
    for (j, (lambda, mult)) in root_set.roots.iter().enumerate() {
        for k in 1..=*mult {
            columns.push((j, k, delta_e(seq, *lambda, k - 1, order)?));
        }
    }

    // ∂_m^i y(0) = m_i · (coefficient i); on Δ_{k-1}E(λ, ·) that moment
    // cancels, leaving C(i, k−1) λ^{i-k+1}.
    let mut m = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        for (col, (_, k, basis)) in columns.iter().enumerate() {
            let h = k - 1;
            if i < h {
                continue;
            }
            let mut b = 1.0_f64;
            for t in 0..h {
                b = b * (i - t) as f64 / (t + 1) as f64;
            }
            let lam = basis.lambda;
            let power = if i == h {
                C64::ONE
            } else {
                lam.powu((i - h) as u32)
            };
            m[(i, col)] = C64::from(b.round()) * power;
        }
    }
    let rhs = DVector::from_column_slice(cauchy);
    let lu = m.clone().lu();
    let c = lu.solve(&rhs).ok_or_else(|| {
        Error::InvalidInput(
            "Cauchy-data fitting system is singular; root clustering may be ambiguous".into(),
        )
    })?;
    let fit_condition = match m.clone().lu().try_inverse() {
        Some(inv) => {
            crate::series::matrix_inf_norm(&m) * crate::series::matrix_inf_norm(&inv)
        }
        None => f64::INFINITY,
    };

    let mut y = TruncatedSeries::zero(order);
    for (col, (_, _, basis)) in columns.iter().enumerate() {
        y = y.add(&basis.series.scale(c[col]));
    }

    Ok(ConstCoeffSolution {
        roots: root_set.roots,
        coeffs: columns
            .iter()
            .enumerate()
            .map(|(col, (j, k, _))| (*j, *k, c[col]))
            .collect(),
        y,
        cauchy_data: cauchy.to_vec(),
        fit_condition,
        merge_warning: root_set.merge_warning,
    })
}

/// Max coefficient norm of `∂_m^n y + Σ a_j ∂_m^{n-j} y` through degree
/// `order(y) − n`.
pub fn equation_residual(a: &[C64], y: &TruncatedSeries, seq: &MomentSequence) -> Result<f64> {
    let n = a.len();
    if y.order() < n {
        return Err(Error::OrderExhausted {
            requested: n,
            order: y.order(),
        });
    }
    let top = y.order() - n;
    let mut derivatives = Vec::with_capacity(n + 1);
    derivatives.push(y.clone());
    for _ in 0..n {
        let last = derivatives.last().unwrap();
        derivatives.push(last.moment_derivative(seq)?);
    }
    let mut worst = 0.0_f64;
    for p in 0..=top {
        let mut acc = derivatives[n].coeff(p);
        for (j, aj) in a.iter().enumerate() {
            acc += *aj * derivatives[n - 1 - j].coeff(p);
        }
        worst = worst.max(acc.norm());
    }
    Ok(worst)
}

/// Coefficient-based estimates of an entire function's order and type.
#[derive(Clone, Copy, Debug)]
pub struct OrderType {
    pub rho_hat: f64,
    pub sigma_hat: f64,
}

/// Least-squares estimators over the last half of nonzero degrees:
/// `−ln|a_p|` regressed on `{1, p, p·ln p}` gives `1/ρ̂` as the `p·ln p`
/// coefficient, and `σ̂` comes from `sup_p p^{1/ρ̂} |a_p|^{1/p} = (σ̂eρ̂)^{1/ρ̂}`.
pub fn estimate_order_type(f: &TruncatedSeries) -> Result<OrderType> {
    let n = f.order();
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for p in n / 2..=n {
        let norm = f.coeff(p).norm();
        if norm > 0.0 {
            pts.push((p as f64, -norm.ln()));
        }
    }
    if pts.len() < 8 {
        // underflowed tail: fall back to the last half of nonzero degrees
        let nz: Vec<usize> = (1..=n).filter(|&p| f.coeff(p).norm() > 0.0).collect();
        if nz.len() < 16 {
            return Err(Error::OrderUndefined(
                "too few nonzero coefficients for an asymptotic fit".into(),
            ));
        }
        pts = nz[nz.len() / 2..]
            .iter()
            .map(|&p| (p as f64, -f.coeff(p).norm().ln()))
            .collect();
    }

    // entire-type gate: −ln|a_p| must grow at least like a multiple of p ln p
    for (p, l) in &pts {
        if *l < 0.05 * p * p.ln() {
            return Err(Error::OrderUndefined(
                "coefficients do not decay super-geometrically; order is undefined for a \
                 non-entire tail"
                    .into(),
            ));
        }
    }

    // Least squares of L on {1, p, p ln p}. The basis is nearly collinear
    // over a narrow degree window, so solve by SVD rather than normal
    // equations.
    let k = pts.len();
    let design = DMatrix::<f64>::from_fn(k, 3, |i, j| {
        let p = pts[i].0;
        match j {
            0 => 1.0,
            1 => p,
            _ => p * p.ln(),
        }
    });
    let rhs = DVector::<f64>::from_iterator(k, pts.iter().map(|(_, l)| *l));
    let coef = design
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .map_err(|_| Error::OrderUndefined("degenerate regression for the order fit".into()))?;
    if coef[2] <= 0.0 {
        return Err(Error::OrderUndefined(
            "non-positive leading coefficient in the order fit".into(),
        ));
    }
    let rho_hat = 1.0 / coef[2];

    let mut v_sup = 0.0_f64;
    for (p, l) in &pts {
        // p^{1/ρ̂} |a_p|^{1/p} where l = −ln|a_p|
        let v = (p.ln() / rho_hat - l / p).exp();
        v_sup = v_sup.max(v);
    }
    let sigma_hat = v_sup.powf(rho_hat) / (std::f64::consts::E * rho_hat);
    let _ = k;
    Ok(OrderType { rho_hat, sigma_hat })
}

/// The type bound `σ = (max_j |λ_j|)^ρ` for the materialized solution,
/// compared against the coefficient-based estimate at order `est_order`.
#[derive(Clone, Debug)]
pub struct TypeBound {
    /// Documented order of the kernel (`1/α` for the Gevrey family).
    pub rho: f64,
    /// `(max_j |λ_j|)^ρ`.
    pub sigma: f64,
    /// Estimator output on the re-materialized solution (absent for a
    /// polynomial solution).
    pub sigma_hat: Option<f64>,
    pub within_bound: bool,
}

pub fn max_root_type_bound(
    solution: &ConstCoeffSolution,
    seq: &MomentSequence,
    est_order: usize,
) -> Result<TypeBound> {
    let rho = seq.documented_order()?;
    let max_mod = solution
        .roots
        .iter()
        .map(|(z, _)| z.norm())
        .fold(0.0_f64, f64::max);
    let sigma = max_mod.powf(rho);

    if max_mod == 0.0 {
        // polynomial case: degree at most n−1 exactly
        let n: usize = solution.roots.iter().map(|(_, m)| m).sum();
        let scale = 1.0 + solution.y.max_coeff_norm();
        let poly_exact = (n..=solution.y.order())
            .all(|p| solution.y.coeff(p).norm() <= 1e-14 * scale);
        return Ok(TypeBound {
            rho,
            sigma: 0.0,
            sigma_hat: None,
            within_bound: poly_exact,
        });
    }

    let mut y = TruncatedSeries::zero(est_order);
    for (j, k, c) in &solution.coeffs {
        let basis = delta_e(seq, solution.roots[*j].0, k - 1, est_order)?;
        y = y.add(&basis.series.scale(*c));
    }
    let est = estimate_order_type(&y)?;
    Ok(TypeBound {
        rho,
        sigma,
        sigma_hat: Some(est.sigma_hat),
        within_bound: est.sigma_hat <= sigma * 1.2,
    })
}

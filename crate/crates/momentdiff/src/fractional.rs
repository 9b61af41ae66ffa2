//! Caputo/Riemann–Liouville operators on Puiseux series and the Picard
//! fixed-point oracle.
//!
//! A Puiseux series here is `Σ_p c_p x^{αp}` for a fixed `α ∈ (0,1]`. The
//! fractional operators act termwise through exact monomial rules — no
//! quadrature anywhere:
//!
//! - Caputo derivative: `c_p x^{αp} → c_p·Γ(1+αp)/Γ(1+α(p−1))·x^{α(p−1)}`,
//!   constants annihilated;
//! - Riemann–Liouville integral: `x^β → Γ(1+β)/Γ(1+α+β)·x^{α+β}` with
//!   `β = αp`, so the Caputo derivative is its exact left inverse.
//!
//! The Picard oracle iterates the integral equation
//! `h̃(x) = c̃₀ + cC̃/Γ(α) ∫₀ˣ (x−t)^{α−1} h̃(t)/(1−Kt^α) dt (+ forcing)`
//! in Puiseux coefficients. One iteration fixes one more coefficient, and
//! the fixed point obeys exactly the solver's majorant recursion — an
//! independent route to the same numbers, which is the whole point of the
//! oracle.

use crate::error::{Error, Result};
use crate::seq::{MomentSequence, Rational};
use crate::series::TruncatedSeries;
use crate::C64;
use statrs::function::gamma::{gamma, ln_gamma};

#[derive(Clone, Debug, PartialEq)]
pub struct PuiseuxSeries {
    alpha: f64,
    coeffs: Vec<C64>,
}

impl PuiseuxSeries {
    pub fn new(alpha: f64, coeffs: Vec<C64>) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidInput(format!(
                "Puiseux exponent must be positive, got {alpha}"
            )));
        }
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("Puiseux series needs a constant term".into()));
        }
        Ok(Self { alpha, coeffs })
    }

    pub fn from_real(alpha: f64, coeffs: &[f64]) -> Result<Self> {
        Self::new(alpha, coeffs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, p: usize) -> C64 {
        self.coeffs.get(p).copied().unwrap_or(C64::ZERO)
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Evaluation at a real point `x ≥ 0`.
    pub fn eval(&self, x: f64) -> C64 {
        let mut acc = C64::ZERO;
        for (p, c) in self.coeffs.iter().enumerate() {
            acc += c * x.powf(self.alpha * p as f64);
        }
        acc
    }

    /// Caputo derivative `∂^α`; drops the order by one, constants map to the
    /// zero series.
    pub fn caputo_derivative(&self) -> Self {
        let n = self.order();
        if n == 0 {
            return Self {
                alpha: self.alpha,
                coeffs: vec![C64::ZERO],
            };
        }
        let a = self.alpha;
        let coeffs = (1..=n)
            .map(|p| {
                self.coeffs[p]
                    * (ln_gamma(1.0 + a * p as f64) - ln_gamma(1.0 + a * (p - 1) as f64)).exp()
            })
            .collect();
        Self {
            alpha: a,
            coeffs,
        }
    }

    /// Riemann–Liouville integral `I₀₊^α`; raises the order by one.
    pub fn rl_integral(&self) -> Self {
        let a = self.alpha;
        let mut coeffs = vec![C64::ZERO; self.coeffs.len() + 1];
        for (p, c) in self.coeffs.iter().enumerate() {
            coeffs[p + 1] =
                c * (ln_gamma(1.0 + a * p as f64) - ln_gamma(1.0 + a * (p + 1) as f64)).exp();
        }
        Self { alpha: a, coeffs }
    }

    fn multiply_truncated(&self, rhs: &Self, order: usize) -> Self {
        let mut coeffs = vec![C64::ZERO; order + 1];
        for (p, slot) in coeffs.iter_mut().enumerate() {
            let mut acc = C64::ZERO;
            for k in 0..=p {
                acc += self.coeff(k) * rhs.coeff(p - k);
            }
            *slot = acc;
        }
        Self {
            alpha: self.alpha,
            coeffs,
        }
    }

    fn truncated(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.truncate(order + 1);
        coeffs.resize(order + 1, C64::ZERO);
        Self {
            alpha: self.alpha,
            coeffs,
        }
    }
}

/// Termwise defect of the identity `(∂_m f)(z^α) = ∂^α (f(z^α))` for the
/// moment sequence `m = Γ(1+αp)`: the left side goes through the
/// moment-derivative path, the right side through the Caputo path.
pub fn check_identity_155(f: &TruncatedSeries, alpha: Rational) -> Result<f64> {
    let af = alpha.as_f64();
    if !(0.0 < af && af <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "identity check requires alpha in (0,1], got {alpha}"
        )));
    }
    let seq = MomentSequence::gamma_moment(alpha);
    let lhs = f.moment_derivative(&seq)?;
    let rhs = PuiseuxSeries::new(af, f.coeffs().to_vec())?.caputo_derivative();
    let top = lhs.order().max(rhs.order());
    let mut worst = 0.0_f64;
    for p in 0..=top {
        worst = worst.max((lhs.coeff(p) - rhs.coeff(p)).norm());
    }
    Ok(worst)
}

/// Parameters of the scalar comparison problem the oracle iterates.
#[derive(Clone, Copy, Debug)]
pub struct PicardParams {
    /// Initial value `c̃₀`.
    pub c0: f64,
    /// Geometric envelope constant `c`.
    pub c: f64,
    /// `C̃ = max{1, C}` from the sequence diagnostics.
    pub c_tilde: f64,
    /// Geometric envelope rate `K`.
    pub k: f64,
    /// Puiseux exponent `α ∈ (0,1]`.
    pub alpha: f64,
    /// Number of fixed-point iterations.
    pub iterations: usize,
    /// Truncation order in Puiseux degrees.
    pub order: usize,
}

/// Picard iteration for
/// `h̃ = c̃₀ + cC̃·I^α[ h̃·(1−Kt^α)⁻¹ ] (+ I^α[forcing])`; the kernel is
/// expanded as a geometric Puiseux series. After `min(iterations, order)`
/// rounds those leading coefficients are fixed points.
pub fn picard_oracle(params: &PicardParams, forcing: Option<&PuiseuxSeries>) -> Result<PuiseuxSeries> {
    let PicardParams {
        c0,
        c,
        c_tilde,
        k,
        alpha,
        iterations,
        order,
    } = *params;
    if !(0.0 < alpha && alpha <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "oracle requires alpha in (0,1], got {alpha}"
        )));
    }
    if iterations == 0 {
        return Err(Error::InvalidInput("oracle requires at least one iteration".into()));
    }
    if let Some(b) = forcing {
        if (b.alpha() - alpha).abs() > 1e-12 {
            return Err(Error::InvalidInput(
                "forcing series must share the oracle's exponent".into(),
            ));
        }
    }

    // (1 − K t^α)⁻¹ = Σ K^p t^{αp}
    let kernel = {
        let mut coeffs = Vec::with_capacity(order + 1);
        let mut kp = 1.0_f64;
        for _ in 0..=order {
            coeffs.push(C64::new(kp, 0.0));
            kp *= k;
        }
        PuiseuxSeries::new(alpha, coeffs)?
    };
    let forcing_integral = forcing.map(|b| b.rl_integral().truncated(order));

    let cc = C64::new(c * c_tilde, 0.0);
    let mut h = PuiseuxSeries::from_real(alpha, &[c0])?.truncated(order);
    for _ in 0..iterations {
        let integrand = h.multiply_truncated(&kernel, order);
        let integral = integrand.rl_integral().truncated(order);
        let mut coeffs: Vec<C64> = integral.coeffs().iter().map(|c| c * cc).collect();
        coeffs[0] += C64::new(c0, 0.0);
        if let Some(fi) = &forcing_integral {
            for (p, slot) in coeffs.iter_mut().enumerate() {
                *slot += fi.coeff(p);
            }
        }
        h = PuiseuxSeries::new(alpha, coeffs)?;
    }
    Ok(h)
}

/// The window constant Δ of the comparison problem:
/// `Δ = max{ c̃₀, (c̃₀ + B₁ r₁^α/Γ(α)) / (1 − cC̃/Γ(α+1) · r₁^α/(1−K r₁^α)) }`
/// (the `B₁` term only for a forced problem). Requires `r₁` inside the
/// admissible window.
pub fn delta_bound(
    c0: f64,
    c: f64,
    c_tilde: f64,
    k: f64,
    alpha: f64,
    r1: f64,
    b1: Option<f64>,
) -> Result<f64> {
    if !(r1 > 0.0) {
        return Err(Error::InvalidInput("r1 must be positive".into()));
    }
    let ra = r1.powf(alpha);
    if k * ra >= 1.0 {
        return Err(Error::InvalidInput(format!(
            "r1 = {r1} is outside the kernel's disc (K r1^α = {} ≥ 1)",
            k * ra
        )));
    }
    let q = c * c_tilde / gamma(alpha + 1.0) * ra / (1.0 - k * ra);
    if q >= 1.0 {
        return Err(Error::InvalidInput(format!(
            "r1 = {r1} violates the window bound (contraction factor {q} ≥ 1)"
        )));
    }
    let numerator = c0 + b1.unwrap_or(0.0) * ra / gamma(alpha);
    Ok(c0.max(numerator / (1.0 - q)))
}

/// Supremum of the partial sums `ω_p(x) = Σ_{k≤p} c_k x^{αk}` over a
/// uniform grid on `[0, r1]`, across every truncation `p`.
pub fn partial_sum_sup(series: &PuiseuxSeries, r1: f64, grid_points: usize) -> f64 {
    let alpha = series.alpha();
    let mut sup = 0.0_f64;
    for i in 0..grid_points {
        let x = r1 * i as f64 / (grid_points - 1) as f64;
        let mut partial = C64::ZERO;
        for p in 0..=series.order() {
            partial += series.coeff(p) * x.powf(alpha * p as f64);
            sup = sup.max(partial.norm());
        }
    }
    sup
}

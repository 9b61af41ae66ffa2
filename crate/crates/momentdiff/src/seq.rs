//! Moment sequences: evaluation and structural diagnostics.
//!
//! A moment sequence is a positive sequence `m = (m_p)_{p≥0}` with `m_0 = 1`
//! (up to an optional scale factor). The built-in kinds are
//!
//! - `factorial` — `m_p = p!`
//! - `gevrey(α)` — `m_p = (p!)^α`
//! - `gamma_moment(α)` — `m_p = Γ(1 + αp)`, the classical moment sequence of
//!   the Gevrey class of order `α`
//! - `q_gevrey(q)` — `m_p = q^{p²}`, `q > 1`
//! - `custom` — a table of positive reals with an optional extension rule
//!
//! All values are kept in log domain; `Γ(1 + αp)` overflows `f64` near
//! `p ≈ 170/α`, while its logarithm is good to `p = 10⁴` and beyond.
//!
//! Diagnostics classify a sequence against two growth assumptions:
//!
//! - (A): `m_p/m_{p-1} ≥ p/C` for some constant `C` — factorial-or-faster
//!   growth; solving under (A) preserves the radius of convergence.
//! - (B): `m_p/m_{p-1} ≥ Γ(1+αp)/(C·Γ(1+α(p-1)))` for some rational
//!   `α ∈ (0,1)` — root-of-factorial growth; the radius may shrink.
//!
//! Both are probed on a finite window, so the flags are windowed evidence,
//! not proofs. The window test flags divergence when the last-quartile
//! supremum of the probed quantity exceeds the first-three-quartile
//! supremum by more than 5%.

use crate::error::{Error, Result};
use statrs::function::gamma::ln_gamma;
use std::fmt;

/// Positive rational number, used for Gevrey/moment orders `α`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rational {
    num: u32,
    den: u32,
}

impl Rational {
    pub fn new(num: u32, den: u32) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::InvalidInput(format!(
                "rational must be positive: {num}/{den}"
            )));
        }
        let g = gcd(num, den);
        Ok(Self {
            num: num / g,
            den: den / g,
        })
    }

    /// Best rational approximation of `x` with denominator at most `max_den`.
    pub fn approximate(x: f64, max_den: u32) -> Result<Self> {
        if !x.is_finite() || x <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "cannot approximate {x} by a positive rational"
            )));
        }
        let mut best = (1u32, 1u32);
        let mut best_err = f64::INFINITY;
        for den in 1..=max_den {
            let num = (x * f64::from(den)).round().max(1.0);
            if num > f64::from(u32::MAX) {
                continue;
            }
            let err = (x - num / f64::from(den)).abs();
            if err < best_err {
                best_err = err;
                best = (num as u32, den);
            }
        }
        Rational::new(best.0, best.1)
    }

    /// Parses `"3"`, `"1/2"`, or a decimal string like `"0.5"`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((a, b)) = s.split_once('/') {
            let num: u32 = a
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad rational numerator in {s:?}")))?;
            let den: u32 = b
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad rational denominator in {s:?}")))?;
            Rational::new(num, den)
        } else if let Ok(n) = s.parse::<u32>() {
            Rational::new(n, 1)
        } else {
            let x: f64 = s
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad rational literal {s:?}")))?;
            Rational::approximate(x, 1024)
        }
    }

    pub fn num(&self) -> u32 {
        self.num
    }

    pub fn den(&self) -> u32 {
        self.den
    }

    pub fn as_f64(&self) -> f64 {
        f64::from(self.num) / f64::from(self.den)
    }

    pub fn is_integer(&self) -> bool {
        self.den == 1
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

/// Extension rule for custom tables probed beyond their length.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extension {
    /// Probing past the table is an error.
    None,
    /// Extend geometrically with the last tabulated ratio.
    LastRatio,
}

#[derive(Clone, Debug)]
pub enum SequenceKind {
    Factorial,
    Gevrey(Rational),
    GammaMoment(Rational),
    QGevrey(f64),
    Custom { values: Vec<f64>, extension: Extension },
}

/// A positive moment sequence with log-domain evaluation.
#[derive(Clone, Debug)]
pub struct MomentSequence {
    kind: SequenceKind,
    scale: f64,
}

impl MomentSequence {
    pub fn factorial() -> Self {
        Self {
            kind: SequenceKind::Factorial,
            scale: 1.0,
        }
    }

    /// `m_p = (p!)^α`.
    pub fn gevrey(alpha: Rational) -> Self {
        Self {
            kind: SequenceKind::Gevrey(alpha),
            scale: 1.0,
        }
    }

    /// `m_p = Γ(1 + αp)`.
    pub fn gamma_moment(alpha: Rational) -> Self {
        Self {
            kind: SequenceKind::GammaMoment(alpha),
            scale: 1.0,
        }
    }

    /// `m_p = q^{p²}`, `q > 1`.
    pub fn q_gevrey(q: f64) -> Result<Self> {
        if !(q > 1.0) || !q.is_finite() {
            return Err(Error::InvalidInput(format!("q-Gevrey requires q > 1, got {q}")));
        }
        Ok(Self {
            kind: SequenceKind::QGevrey(q),
            scale: 1.0,
        })
    }

    pub fn custom(values: Vec<f64>, extension: Extension) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("custom table is empty".into()));
        }
        if values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInput(
                "custom table entries must be positive and finite".into(),
            ));
        }
        Ok(Self {
            kind: SequenceKind::Custom { values, extension },
            scale: 1.0,
        })
    }

    /// Multiplies every value by `scale` (so `m_0 = scale`). Ratios, and with
    /// them the moment derivative, are unchanged.
    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidInput(format!("scale must be positive, got {scale}")));
        }
        self.scale = scale;
        Ok(self)
    }

    pub fn kind(&self) -> &SequenceKind {
        &self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `ln m_p`, finite for p up to at least 10⁴ for the built-in kinds.
    pub fn log_value(&self, p: usize) -> Result<f64> {
        let base = match &self.kind {
            // ln_gamma(1) and ln_gamma(2) carry ~1e-16 noise; 0! = 1! = 1.
            SequenceKind::Factorial if p <= 1 => 0.0,
            SequenceKind::Gevrey(_) if p <= 1 => 0.0,
            SequenceKind::GammaMoment(_) if p == 0 => 0.0,
            SequenceKind::Factorial => ln_gamma(p as f64 + 1.0),
            SequenceKind::Gevrey(alpha) => alpha.as_f64() * ln_gamma(p as f64 + 1.0),
            SequenceKind::GammaMoment(alpha) => ln_gamma(1.0 + alpha.as_f64() * p as f64),
            SequenceKind::QGevrey(q) => (p as f64) * (p as f64) * q.ln(),
            SequenceKind::Custom { values, extension } => match values.get(p) {
                Some(v) => v.ln(),
                None => match extension {
                    Extension::None => {
                        return Err(Error::SequenceOutOfRange {
                            p,
                            len: values.len(),
                        })
                    }
                    Extension::LastRatio => {
                        let len = values.len();
                        if len == 1 {
                            values[0].ln()
                        } else {
                            let r = (values[len - 1] / values[len - 2]).ln();
                            values[len - 1].ln() + (p - len + 1) as f64 * r
                        }
                    }
                },
            },
        };
        Ok(base + self.scale.ln())
    }

    /// `m_p` in linear domain. Small factorial-family arguments take an exact
    /// product path so trivial values like `4! = 24` come out exact.
    pub fn value(&self, p: usize) -> Result<f64> {
        match &self.kind {
            SequenceKind::Factorial if p <= 20 => Ok(self.scale * exact_factorial(p)),
            SequenceKind::Gevrey(alpha) if alpha.is_integer() && p <= 20 => {
                let f = exact_factorial(p);
                Ok(self.scale * f.powi(alpha.num() as i32))
            }
            SequenceKind::QGevrey(q) if p * p <= 1023 => Ok(self.scale * q.powi((p * p) as i32)),
            SequenceKind::Custom { values, .. } if p < values.len() => {
                Ok(self.scale * values[p])
            }
            _ => Ok(self.log_value(p)?.exp()),
        }
    }

    /// `m_p / m_{p-1}`, the factor the moment derivative applies to `z^p`.
    /// Scale-free. Exact for the factorial kind.
    pub fn ratio(&self, p: usize) -> Result<f64> {
        if p == 0 {
            return Err(Error::InvalidInput("ratio requires p >= 1".into()));
        }
        match &self.kind {
            SequenceKind::Factorial => Ok(p as f64),
            SequenceKind::Gevrey(alpha) => {
                if alpha.is_integer() {
                    Ok((p as f64).powi(alpha.num() as i32))
                } else {
                    Ok((p as f64).powf(alpha.as_f64()))
                }
            }
            SequenceKind::GammaMoment(_) => Ok(self.log_ratio(p)?.exp()),
            SequenceKind::QGevrey(q) => Ok(((2 * p - 1) as f64 * q.ln()).exp()),
            SequenceKind::Custom { values, .. } if p < values.len() => {
                Ok(values[p] / values[p - 1])
            }
            SequenceKind::Custom { .. } => Ok(self.log_ratio(p)?.exp()),
        }
    }

    /// `ln(m_p / m_{p-1})`; never overflows.
    pub fn log_ratio(&self, p: usize) -> Result<f64> {
        if p == 0 {
            return Err(Error::InvalidInput("ratio requires p >= 1".into()));
        }
        match &self.kind {
            SequenceKind::GammaMoment(alpha) => {
                let a = alpha.as_f64();
                Ok(ln_gamma(1.0 + a * p as f64) - ln_gamma(1.0 + a * (p - 1) as f64))
            }
            _ => Ok(self.log_value(p)? - self.log_value(p - 1)?),
        }
    }

    /// The associated function `M(t) = sup_{p≥0} ln(t^p / m_p)`, with
    /// `M(0) = 0`. The probe window doubles until the maximizer is interior.
    pub fn eval_m(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InvalidInput(format!("eval_m requires finite t >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let lt = t.ln();
        let mut window = 64usize;
        loop {
            let mut best = 0.0_f64;
            let mut argmax = 0usize;
            for p in 0..=window {
                let v = p as f64 * lt - self.log_value(p)?;
                if v > best {
                    best = v;
                    argmax = p;
                }
            }
            if argmax < window / 2 || window >= (1 << 22) {
                return Ok(best);
            }
            window *= 2;
        }
    }

    /// Probes the structural assumptions on the window `1..=probe_window`.
    pub fn diagnose(&self, probe_window: usize) -> Result<SequenceDiagnostics> {
        diagnose(self, probe_window)
    }

    /// Documented entire-function order of the kernel series
    /// `E(z) = Σ z^p/m_p`: `ρ = 1/α` for the Gevrey family, `1` for
    /// factorials. The q-Gevrey kernel has order zero and custom tables
    /// carry no documented order.
    pub fn documented_order(&self) -> Result<f64> {
        match &self.kind {
            SequenceKind::Factorial => Ok(1.0),
            SequenceKind::Gevrey(a) | SequenceKind::GammaMoment(a) => Ok(1.0 / a.as_f64()),
            SequenceKind::QGevrey(_) => Err(Error::NoDocumentedOrder(
                "q-Gevrey kernels have order zero; the type bound is vacuous".into(),
            )),
            SequenceKind::Custom { .. } => Err(Error::NoDocumentedOrder(
                "custom tables carry no closed-form order".into(),
            )),
        }
    }
}

fn exact_factorial(p: usize) -> f64 {
    let mut f = 1.0_f64;
    for k in 2..=p {
        f *= k as f64;
    }
    f
}

/// Windowed evidence for Assumption (A): `m_p/m_{p-1} ≥ p/C`.
#[derive(Clone, Debug)]
pub struct AssumptionA {
    pub holds_on_window: bool,
    /// `sup_p p·m_{p-1}/m_p` over the window.
    pub c_estimate: f64,
}

/// Windowed evidence for Assumption (B) with a fitted rational `α ∈ (0,1)`.
#[derive(Clone, Debug)]
pub struct AssumptionB {
    pub holds_on_window: bool,
    pub alpha_estimate: Rational,
    /// `sup_p Γ(1+αp)/Γ(1+α(p-1)) · m_{p-1}/m_p` over the window.
    pub c_estimate: f64,
}

/// Which growth assumption backs a radius certificate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AssumptionPath {
    A,
    B(Rational),
}

#[derive(Clone, Debug)]
pub struct SequenceDiagnostics {
    pub assumption_a: AssumptionA,
    pub assumption_b: AssumptionB,
    /// Log-convexity `M_p² ≤ M_{p-1} M_{p+1}` on the window.
    pub lc_ok: bool,
    /// Moderate growth `M_{p+q} ≤ A₁^{p+q} M_p M_q` on the window.
    pub mg_ok: bool,
    pub a1_estimate: f64,
    /// Truncated non-quasianalyticity check (tail cut at `4P`).
    pub snq_partial_ok: bool,
    pub a2_estimate: f64,
    pub probe_window: usize,
}

impl SequenceDiagnostics {
    /// Certificate path selection: (A) wins whenever it holds, because it
    /// preserves the full radius; (B) only shrinks it.
    pub fn preferred_path(&self) -> Option<AssumptionPath> {
        if self.assumption_a.holds_on_window {
            Some(AssumptionPath::A)
        } else if self.assumption_b.holds_on_window {
            Some(AssumptionPath::B(self.assumption_b.alpha_estimate))
        } else {
            None
        }
    }

    /// `C̃ = max{1, C}` for the preferred path.
    pub fn c_tilde(&self) -> Option<f64> {
        match self.preferred_path()? {
            AssumptionPath::A => Some(self.assumption_a.c_estimate.max(1.0)),
            AssumptionPath::B(_) => Some(self.assumption_b.c_estimate.max(1.0)),
        }
    }
}

/// Last-quartile trend test: a probed quantity counts as bounded when its
/// supremum over the last quartile stays within 5% of the supremum over the
/// first three quartiles.
fn trend_bounded(xs: &[f64]) -> bool {
    if xs.iter().any(|x| !x.is_finite()) {
        return false;
    }
    let q3 = xs.len() * 3 / 4;
    if q3 == 0 || q3 == xs.len() {
        return true;
    }
    let head = xs[..q3].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tail = xs[q3..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    tail <= head * 1.05 + 1e-12
}

fn diagnose(seq: &MomentSequence, p_max: usize) -> Result<SequenceDiagnostics> {
    if p_max < 8 {
        return Err(Error::InvalidInput(format!(
            "diagnose requires a probe window of at least 8, got {p_max}"
        )));
    }

    // Log ratios ln(m_p/m_{p-1}) for p = 1..=P; log domain avoids overflow.
    let mut log_ratios = Vec::with_capacity(p_max);
    for p in 1..=p_max {
        log_ratios.push(seq.log_ratio(p)?);
    }

    // Assumption (A): g_p = p · m_{p-1}/m_p, through the analytic per-kind
    // ratio so the factorial case is exactly 1. A ratio overflowing to
    // infinity maps to g = 0, its correct limit.
    let mut g = Vec::with_capacity(p_max);
    for p in 1..=p_max {
        g.push(p as f64 / seq.ratio(p)?);
    }
    let a_holds = trend_bounded(&g);
    let a_c = g.iter().cloned().fold(0.0_f64, f64::max);

    // Assumption (B): α from the least-squares slope of ln ratio(p) against
    // ln p over the last half of the window (the early ratios carry the
    // curvature bias), snapped to a small-denominator rational.
    let lo = (p_max / 2).max(1);
    let xs: Vec<f64> = (lo..=p_max).map(|p| (p as f64).ln()).collect();
    let ys: Vec<f64> = (lo..=p_max).map(|p| log_ratios[p - 1]).collect();
    let slope = lsq_slope(&xs, &ys).clamp(1.0 / 32.0, 31.0 / 32.0);
    let alpha = snap_to_rational(slope);
    let af = alpha.as_f64();
    let b_arg: Vec<f64> = (1..=p_max)
        .map(|p| {
            (ln_gamma(1.0 + af * p as f64) - ln_gamma(1.0 + af * (p - 1) as f64)
                - log_ratios[p - 1])
                .exp()
        })
        .collect();
    let b_holds = trend_bounded(&b_arg);
    let b_c = b_arg.iter().cloned().fold(0.0_f64, f64::max);

    // (lc): 2 ln M_p ≤ ln M_{p-1} + ln M_{p+1}.
    let mut lc_ok = true;
    for p in 1..=p_max {
        let l0 = seq.log_value(p - 1)?;
        let l1 = seq.log_value(p)?;
        let l2 = seq.log_value(p + 1)?;
        if 2.0 * l1 > l0 + l2 + 1e-9 {
            lc_ok = false;
            break;
        }
    }

    // (mg): per-sum-degree suprema of (L_{p+q} − L_p − L_q)/(p+q).
    let logs: Vec<f64> = {
        let mut v = Vec::with_capacity(p_max + 1);
        for p in 0..=p_max {
            v.push(seq.log_value(p)?);
        }
        v
    };
    let mut per_k = vec![f64::NEG_INFINITY; p_max + 1];
    for p in 0..=p_max {
        for q in 0..=(p_max - p) {
            let k = p + q;
            if k == 0 {
                continue;
            }
            let s = (logs[k] - logs[p] - logs[q] + logs[0]) / k as f64;
            if s > per_k[k] {
                per_k[k] = s;
            }
        }
    }
    let mg_series: Vec<f64> = per_k[1..].to_vec();
    let mg_ok = trend_bounded(&mg_series) && lc_ok;
    let a1_estimate = mg_series
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
        .exp()
        .max(1.0);

    // (snq), truncated: tail sum to 4P against A₂·M_p/M_{p+1}.
    let tail_cut = 4 * p_max;
    let mut tail_terms = Vec::with_capacity(tail_cut + 1);
    for q in 0..=tail_cut {
        let lq = seq.log_value(q)?;
        let lq1 = seq.log_value(q + 1)?;
        tail_terms.push((lq - lq1).exp() / (q + 1) as f64);
    }
    let mut suffix = vec![0.0; tail_cut + 2];
    for q in (0..=tail_cut).rev() {
        suffix[q] = suffix[q + 1] + tail_terms[q];
    }
    let snq_arg: Vec<f64> = (0..=p_max)
        .map(|p| {
            let lp = logs[p];
            let lp1 = if p + 1 <= p_max {
                logs[p + 1]
            } else {
                seq.log_value(p + 1).unwrap_or(f64::INFINITY)
            };
            suffix[p] / (lp - lp1).exp()
        })
        .collect();
    let snq_partial_ok = trend_bounded(&snq_arg);
    let a2_estimate = snq_arg.iter().cloned().fold(0.0_f64, f64::max);

    Ok(SequenceDiagnostics {
        assumption_a: AssumptionA {
            holds_on_window: a_holds,
            c_estimate: a_c,
        },
        assumption_b: AssumptionB {
            holds_on_window: b_holds,
            alpha_estimate: alpha,
            c_estimate: b_c,
        },
        lc_ok,
        mg_ok,
        a1_estimate,
        snq_partial_ok,
        a2_estimate,
        probe_window: p_max,
    })
}

fn lsq_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Snap a slope estimate to a small-denominator rational in (0,1): the
/// smallest denominator whose best fraction lands within 0.05 wins, so a
/// slope of 0.48 reads as 1/2 rather than some nearby 16th. Falls back to
/// the best fraction with denominator ≤ 64.
fn snap_to_rational(slope: f64) -> Rational {
    for den in 2..=16u32 {
        for num in 1..den {
            if gcd(num, den) != 1 {
                continue;
            }
            if (slope - f64::from(num) / f64::from(den)).abs() <= 0.05 {
                return Rational { num, den };
            }
        }
    }
    Rational::approximate(slope, 64).unwrap_or(Rational { num: 1, den: 2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn half() -> Rational {
        Rational::new(1, 2).unwrap()
    }

    #[test]
    fn factorial_values() {
        let m = MomentSequence::factorial();
        assert_eq!(m.value(4).unwrap(), 24.0);
        assert_eq!(m.value(0).unwrap(), 1.0);
        assert_relative_eq!(
            m.value(170).unwrap().ln(),
            ln_gamma(171.0),
            max_relative = 1e-12
        );
    }

    #[test]
    fn gevrey_square_values() {
        let m = MomentSequence::gevrey(Rational::new(2, 1).unwrap());
        assert_eq!(m.value(3).unwrap(), 36.0);
        assert_eq!(m.ratio(3).unwrap(), 9.0);
    }

    #[test]
    fn gamma_moment_half() {
        let m = MomentSequence::gamma_moment(half());
        // Γ(1 + 2·1/2) = Γ(2) = 1
        assert_relative_eq!(m.value(2).unwrap(), 1.0, max_relative = 1e-12);
        // Γ(2)/Γ(3/2) = 2/√π
        assert_relative_eq!(
            m.ratio(2).unwrap(),
            2.0 / std::f64::consts::PI.sqrt(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn q_gevrey_ratio() {
        let m = MomentSequence::q_gevrey(2.0).unwrap();
        assert_relative_eq!(m.ratio(3).unwrap(), 32.0, max_relative = 1e-12);
        assert_eq!(m.value(2).unwrap(), 16.0);
    }

    #[test]
    fn factorial_ratio_exact() {
        let m = MomentSequence::factorial();
        for p in 1..=200 {
            assert_eq!(m.ratio(p).unwrap(), p as f64);
        }
    }

    #[test]
    fn value_ratio_consistency() {
        let seqs = [
            MomentSequence::factorial(),
            MomentSequence::gevrey(Rational::new(2, 1).unwrap()),
            MomentSequence::gamma_moment(half()),
            MomentSequence::q_gevrey(2.0).unwrap(),
        ];
        for m in &seqs {
            for p in 1..=200 {
                let lhs = m.log_value(p).unwrap();
                let rhs = m.log_value(p - 1).unwrap() + m.log_ratio(p).unwrap();
                assert!(
                    (lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()),
                    "p={p}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn custom_table_and_extension() {
        let m = MomentSequence::custom(vec![1.0, 2.0, 8.0], Extension::None).unwrap();
        assert_eq!(m.value(2).unwrap(), 8.0);
        assert!(matches!(
            m.value(3),
            Err(Error::SequenceOutOfRange { p: 3, len: 3 })
        ));
        let m = MomentSequence::custom(vec![1.0, 2.0, 8.0], Extension::LastRatio).unwrap();
        assert_relative_eq!(m.value(4).unwrap(), 128.0, max_relative = 1e-12);
    }

    #[test]
    fn scaled_factorial_keeps_ratios() {
        let m = MomentSequence::factorial().with_scale(3.0).unwrap();
        assert_eq!(m.value(0).unwrap(), 3.0);
        assert_eq!(m.value(4).unwrap(), 72.0);
        assert_eq!(m.ratio(5).unwrap(), 5.0);
    }

    #[test]
    fn diagnose_factorial_assumption_a_exact() {
        let d = MomentSequence::factorial().diagnose(50).unwrap();
        assert!(d.assumption_a.holds_on_window);
        assert_eq!(d.assumption_a.c_estimate, 1.0);
        assert_eq!(d.preferred_path(), Some(AssumptionPath::A));
        assert!(d.lc_ok && d.mg_ok && d.snq_partial_ok);
    }

    #[test]
    fn diagnose_gamma_half_prefers_b() {
        let d = MomentSequence::gamma_moment(half()).diagnose(100).unwrap();
        assert!(!d.assumption_a.holds_on_window, "p·m_{{p-1}}/m_p grows like √p");
        assert!(d.assumption_b.holds_on_window);
        assert_eq!(d.assumption_b.alpha_estimate, half());
        assert_relative_eq!(d.assumption_b.c_estimate, 1.0, max_relative = 1e-12);
        assert_eq!(d.preferred_path(), Some(AssumptionPath::B(half())));
    }

    #[test]
    fn diagnose_gevrey_and_q_gevrey_hold_a() {
        let d1 = MomentSequence::gevrey(Rational::new(1, 1).unwrap())
            .diagnose(50)
            .unwrap();
        assert!(d1.assumption_a.holds_on_window);
        let d2 = MomentSequence::q_gevrey(2.0).unwrap().diagnose(50).unwrap();
        assert!(d2.assumption_a.holds_on_window);
        assert!(!d2.mg_ok, "q-Gevrey fails moderate growth");
        assert!(d2.snq_partial_ok);
    }

    #[test]
    fn diagnose_gamma_alpha_ge_one_passes_a() {
        for (n, d) in [(1u32, 1u32), (3, 2), (2, 1)] {
            let m = MomentSequence::gamma_moment(Rational::new(n, d).unwrap());
            let diag = m.diagnose(200).unwrap();
            assert!(
                diag.assumption_a.holds_on_window,
                "gamma_moment({n}/{d}) should pass (A)"
            );
        }
    }

    #[test]
    fn diagnose_rejects_small_window() {
        assert!(MomentSequence::factorial().diagnose(7).is_err());
    }

    #[test]
    fn eval_m_basics() {
        let m = MomentSequence::factorial();
        assert_eq!(m.eval_m(0.0).unwrap(), 0.0);
        assert_eq!(m.eval_m(1.0).unwrap(), 0.0);
        // Brute-force oracle over p = 0..20 pins max_p (p − ln p!) = 2 − ln 2.
        let scanned = (0..=20)
            .map(|p| p as f64 - ln_gamma(p as f64 + 1.0))
            .fold(f64::NEG_INFINITY, f64::max);
        let e = std::f64::consts::E;
        assert_relative_eq!(scanned, 2.0 - 2.0_f64.ln(), max_relative = 1e-12);
        assert_relative_eq!(m.eval_m(e).unwrap(), scanned, max_relative = 1e-12);
        assert!(m.eval_m(f64::NAN).is_err());
    }

    #[test]
    fn eval_m_monotone_and_dominates_terms() {
        let m = MomentSequence::gamma_moment(half());
        let mut prev = 0.0;
        for i in 0..40 {
            let t = 0.25 * i as f64;
            let v = m.eval_m(t).unwrap();
            assert!(v + 1e-12 >= prev);
            prev = v;
            if t > 0.0 {
                for p in 0..32 {
                    let term = p as f64 * t.ln() - m.log_value(p).unwrap();
                    assert!(v + 1e-9 >= term);
                }
            }
        }
    }

    #[test]
    fn lc_defect_nonnegative_for_gevrey() {
        let m = MomentSequence::gevrey(Rational::new(2, 1).unwrap());
        for p in 1..=100 {
            let defect = m.log_value(p - 1).unwrap() + m.log_value(p + 1).unwrap()
                - 2.0 * m.log_value(p).unwrap();
            assert!(defect >= -1e-10, "lc defect at p={p}: {defect}");
        }
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(Rational::parse("1/2").unwrap(), half());
        assert_eq!(Rational::parse("3").unwrap(), Rational::new(3, 1).unwrap());
        assert_eq!(Rational::parse("0.5").unwrap(), half());
        assert_eq!(Rational::parse(" 2/4 ").unwrap(), half());
        assert!(Rational::parse("0").is_err());
        assert!(Rational::parse("-1/2").is_err());
    }
}

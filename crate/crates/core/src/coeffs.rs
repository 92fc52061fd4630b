//! Positive time coefficients `h_i`, `k_i` and the objects built from them:
//! cumulative integrals `K(s,t)` and ratios `h_i / h_j`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{parse_expr, Expr};
use crate::quad::{self, ImproperIntegral, Integrand, QuadOptions, Tail};

pub const DEFAULT_SAMPLES: usize = 10_001;
pub const DEFAULT_HORIZON: f64 = 100.0;
pub const DEFAULT_REL_TOL: f64 = 1e-10;

/// Sampled evidence that a coefficient is positive on `[0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityCertificate {
    pub horizon: f64,
    pub samples: usize,
    /// Smallest sampled log-value.
    pub min_ln_value: f64,
}

#[derive(Debug)]
struct Inner {
    expr: Expr,
    source: String,
    tail: Tail,
    constant: Option<f64>,
    certificate: PositivityCertificate,
}

/// A continuous positive function of time given by an expression.
///
/// Cheap to clone; the expression is shared.
#[derive(Debug, Clone)]
pub struct TimeCoefficient(Arc<Inner>);

impl TimeCoefficient {
    pub fn parse(source: &str, tail: Tail, horizon: f64) -> Result<Self> {
        let expr = parse_expr(source)?;
        Self::from_expr_with_source(expr, source.to_string(), tail, horizon, DEFAULT_SAMPLES)
    }

    /// A coefficient with the default horizon, unknown tail for
    /// non-constant expressions.
    pub fn new(source: &str) -> Result<Self> {
        Self::parse(source, Tail::Unknown, DEFAULT_HORIZON)
    }

    pub fn with_tail(source: &str, tail: Tail) -> Result<Self> {
        Self::parse(source, tail, DEFAULT_HORIZON)
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::from_expr(Expr::Const(value), Tail::power(0.0), DEFAULT_HORIZON)
    }

    pub fn from_expr(expr: Expr, tail: Tail, horizon: f64) -> Result<Self> {
        let source = expr.to_string();
        Self::from_expr_with_source(expr, source, tail, horizon, DEFAULT_SAMPLES)
    }

    fn from_expr_with_source(
        expr: Expr,
        source: String,
        tail: Tail,
        horizon: f64,
        samples: usize,
    ) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::Invalid(format!("coefficient horizon must be positive, got {horizon}")));
        }
        let constant = if expr.depends_on_var() {
            None
        } else {
            Some(expr.eval(0.0))
        };
        let tail = if constant.is_some() { Tail::power(0.0) } else { tail };
        let mut min_ln_value = f64::INFINITY;
        for k in 0..samples {
            let t = horizon * k as f64 / (samples - 1) as f64;
            let l = expr.eval_signed_log(t);
            match l {
                Some(l) if l.sign > 0.0 && l.ln_abs.is_finite() => min_ln_value = min_ln_value.min(l.ln_abs),
                _ => {
                    return Err(Error::NonPositive {
                        source_text: source,
                        t,
                        value: expr.eval(t),
                    })
                }
            }
            if constant.is_some() {
                break;
            }
        }
        Ok(TimeCoefficient(Arc::new(Inner {
            expr,
            source,
            tail,
            constant,
            certificate: PositivityCertificate {
                horizon,
                samples,
                min_ln_value,
            },
        })))
    }

    /// `scale * Π factor^power`, built as an expression tree. The tail is
    /// composed from the factors' tails.
    pub fn product(scale: f64, factors: &[(&TimeCoefficient, f64)]) -> Result<Self> {
        let mut expr = Expr::Const(scale);
        let mut tail = Tail::power(0.0);
        let mut horizon = f64::INFINITY;
        for (c, p) in factors {
            if *p == 0.0 {
                continue;
            }
            let e = if *p == 1.0 { c.expr().clone() } else { c.expr().clone().powf(*p) };
            expr = expr.mul(e);
            tail = tail.mul(c.tail().powf(*p));
            horizon = horizon.min(c.horizon());
        }
        if !horizon.is_finite() {
            horizon = DEFAULT_HORIZON;
        }
        let source = expr.to_string();
        Self::from_expr_with_source(expr, source, tail, horizon, DEFAULT_SAMPLES)
    }

    /// `numerator / denominator` as a coefficient.
    pub fn ratio(numerator: &TimeCoefficient, denominator: &TimeCoefficient) -> Result<Self> {
        let expr = numerator.expr().clone().div(denominator.expr().clone());
        let tail = numerator.tail().mul(denominator.tail().powf(-1.0));
        let horizon = numerator.horizon().min(denominator.horizon());
        let source = expr.to_string();
        Self::from_expr_with_source(expr, source, tail, horizon, DEFAULT_SAMPLES)
    }

    pub fn expr(&self) -> &Expr {
        &self.0.expr
    }

    pub fn source(&self) -> &str {
        &self.0.source
    }

    pub fn tail(&self) -> Tail {
        self.0.tail
    }

    pub fn horizon(&self) -> f64 {
        self.0.certificate.horizon
    }

    pub fn certificate(&self) -> PositivityCertificate {
        self.0.certificate
    }

    pub fn constant_value(&self) -> Option<f64> {
        self.0.constant
    }

    pub fn is_constant(&self) -> bool {
        self.0.constant.is_some()
    }

    pub fn eval(&self, t: f64) -> f64 {
        if let Some(c) = self.0.constant {
            return c;
        }
        let v = self.0.expr.eval(t);
        if v.is_finite() && v >= f64::MIN_POSITIVE {
            return v;
        }
        match self.0.expr.eval_signed_log(t) {
            Some(l) => l.value(),
            None => f64::NAN,
        }
    }

    pub fn ln_eval(&self, t: f64) -> f64 {
        if let Some(c) = self.0.constant {
            return c.ln();
        }
        let v = self.0.expr.eval(t);
        if v.is_finite() && v >= f64::MIN_POSITIVE {
            return v.ln();
        }
        match self.0.expr.eval_signed_log(t) {
            Some(l) if l.sign > 0.0 => l.ln_abs,
            Some(l) if l.sign == 0.0 => f64::NEG_INFINITY,
            _ => f64::NAN,
        }
    }

    /// `∫_s^t f`, with a sign check at every quadrature node.
    pub fn integrate(&self, s: f64, t: f64, rel_tol: f64) -> Result<f64> {
        if s > t {
            return Err(Error::Invalid(format!("integration bounds out of order: {s} > {t}")));
        }
        if !(rel_tol > 0.0) {
            return Err(Error::Invalid(format!("rel_tol must be positive, got {rel_tol}")));
        }
        if s == t {
            return Ok(0.0);
        }
        if let Some(c) = self.0.constant {
            return Ok(c * (t - s));
        }
        let bad = std::cell::Cell::new(None);
        let f = |x: f64| {
            let v = self.eval(x);
            if v < 0.0 || (v == 0.0 && x <= self.horizon()) {
                bad.set(Some((x, v)));
            }
            v
        };
        let r = quad::integrate(&f, s, t, QuadOptions::with_rel_tol(rel_tol));
        if let Some((x, v)) = bad.get() {
            return Err(Error::NonPositive {
                source_text: self.source().to_string(),
                t: x,
                value: v,
            });
        }
        Ok(r?.value)
    }

    /// `∫_0^∞ f` using the declared tail.
    pub fn improper_integral(&self, rel_tol: f64) -> Result<ImproperIntegral> {
        self.improper_integral_from(0.0, rel_tol)
    }

    pub fn improper_integral_from(&self, a: f64, rel_tol: f64) -> Result<ImproperIntegral> {
        quad::integrate_to_infinity(self, a, self.tail(), QuadOptions::with_rel_tol(rel_tol))
    }

    /// Smallest `x ≥ start` with `∫_start^x f = target`, by bracketing and
    /// bisection. `None` when the target is not reached before `cap`.
    pub fn invert_integral(&self, start: f64, target: f64, cap: f64, rel_tol: f64) -> Result<Option<f64>> {
        invert_cumulative(|a, b| self.integrate(a, b, rel_tol), start, target, cap)
    }
}

impl Integrand for TimeCoefficient {
    fn eval(&self, x: f64) -> f64 {
        TimeCoefficient::eval(self, x)
    }

    fn ln_eval(&self, x: f64) -> f64 {
        TimeCoefficient::ln_eval(self, x)
    }
}

/// Solves `∫_start^x f = target` for monotone cumulative integrals given by
/// `integral(a, b)`. The bracket doubles from `start + 1` up to `cap`.
pub fn invert_cumulative<I>(integral: I, start: f64, target: f64, cap: f64) -> Result<Option<f64>>
where
    I: Fn(f64, f64) -> Result<f64>,
{
    if target <= 0.0 {
        return Ok(Some(start));
    }
    let mut lo = start;
    let mut acc = 0.0;
    let mut width = 1.0;
    let mut hi;
    loop {
        hi = (lo + width).min(cap);
        let piece = integral(lo, hi)?;
        if acc + piece >= target {
            break;
        }
        acc += piece;
        lo = hi;
        if hi >= cap {
            return Ok(None);
        }
        width *= 2.0;
    }
    // bisection on [lo, hi] with F(lo) = acc < target <= F(hi)
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let piece = integral(lo, mid)?;
        if acc + piece < target {
            acc += piece;
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * hi.abs().max(1e-300) {
            break;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// `K(s,t) = ∫_s^t k`, with cumulative values cached on a uniform grid.
#[derive(Debug, Clone)]
pub struct CumulativeIntegral {
    integrand: TimeCoefficient,
    step: f64,
    values: Vec<f64>,
    rel_tol: f64,
}

impl CumulativeIntegral {
    pub fn new(integrand: TimeCoefficient, horizon: f64, panels: usize, rel_tol: f64) -> Result<Self> {
        if !(horizon > 0.0) || panels == 0 {
            return Err(Error::Invalid("cumulative integral needs a positive horizon and panels".into()));
        }
        let step = horizon / panels as f64;
        let mut values = Vec::with_capacity(panels + 1);
        values.push(0.0);
        let mut acc = 0.0;
        for k in 0..panels {
            acc += integrand.integrate(k as f64 * step, (k + 1) as f64 * step, rel_tol)?;
            values.push(acc);
        }
        Ok(CumulativeIntegral {
            integrand,
            step,
            values,
            rel_tol,
        })
    }

    pub fn integrand(&self) -> &TimeCoefficient {
        &self.integrand
    }

    fn node(&self, k: usize) -> f64 {
        k as f64 * self.step
    }

    fn panel_of(&self, t: f64) -> usize {
        ((t / self.step).floor().max(0.0) as usize).min(self.values.len() - 1)
    }

    /// `K(0,t)`.
    pub fn from_zero(&self, t: f64) -> Result<f64> {
        self.between(0.0, t)
    }

    /// `K(s,t)` for `s ≤ t`; exactly zero when `s == t`.
    pub fn between(&self, s: f64, t: f64) -> Result<f64> {
        if s > t {
            return Err(Error::Invalid(format!("K(s,t) needs s <= t, got {s} > {t}")));
        }
        if s == t {
            return Ok(0.0);
        }
        if let Some(c) = self.integrand.constant_value() {
            return Ok(c * (t - s));
        }
        let (ks, kt) = (self.panel_of(s), self.panel_of(t));
        if ks == kt {
            return self.integrand.integrate(s, t, self.rel_tol);
        }
        let mid = self.values[kt] - self.values[ks + 1];
        Ok(self.integrand.integrate(s, self.node(ks + 1), self.rel_tol)?
            + mid
            + self.integrand.integrate(self.node(kt), t, self.rel_tol)?)
    }
}

/// `h_i / h_j` with sampled monotonicity and constancy checks.
#[derive(Debug, Clone)]
pub struct HtildeRatio {
    numerator: TimeCoefficient,
    denominator: TimeCoefficient,
    ratio: TimeCoefficient,
    nonincreasing: bool,
    max_rel_deviation: f64,
}

/// Relative deviation below which a ratio counts as constant.
pub const CONSTANT_RATIO_TOL: f64 = 1e-12;

impl HtildeRatio {
    pub fn new(numerator: &TimeCoefficient, denominator: &TimeCoefficient) -> Result<Self> {
        let ratio = TimeCoefficient::ratio(numerator, denominator)?;
        let horizon = ratio.horizon();
        let samples = DEFAULT_SAMPLES;
        let r0 = ratio.eval(0.0);
        let mut prev = r0;
        let mut nonincreasing = true;
        let mut max_rel_deviation: f64 = 0.0;
        for k in 1..samples {
            let t = horizon * k as f64 / (samples - 1) as f64;
            let r = ratio.eval(t);
            if r > prev + 1e-12 * prev.abs().max(1.0) {
                nonincreasing = false;
            }
            max_rel_deviation = max_rel_deviation.max((r - r0).abs() / r0.abs());
            prev = r;
        }
        Ok(HtildeRatio {
            numerator: numerator.clone(),
            denominator: denominator.clone(),
            ratio,
            nonincreasing,
            max_rel_deviation,
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.ratio.eval(t)
    }

    pub fn as_coefficient(&self) -> &TimeCoefficient {
        &self.ratio
    }

    pub fn numerator(&self) -> &TimeCoefficient {
        &self.numerator
    }

    pub fn denominator(&self) -> &TimeCoefficient {
        &self.denominator
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.nonincreasing
    }

    pub fn max_rel_deviation(&self) -> f64 {
        self.max_rel_deviation
    }

    /// The constant value when the sampled ratio never deviates from its
    /// initial value by more than [`CONSTANT_RATIO_TOL`].
    pub fn constant_value(&self) -> Option<f64> {
        (self.max_rel_deviation <= CONSTANT_RATIO_TOL).then(|| self.eval(0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::ExtReal;

    #[test]
    fn integrate_examples() {
        let f = TimeCoefficient::new("exp(-t)").unwrap();
        let v = f.integrate(0.0, 1.0, 1e-10).unwrap();
        assert!((v - 0.632_120_558_828_557_7).abs() < 1e-12);
        let f = TimeCoefficient::new("1").unwrap();
        assert_eq!(f.integrate(2.0, 5.0, 1e-10).unwrap(), 3.0);
        let f = TimeCoefficient::new("1/(1+t^2)").unwrap();
        let v = f.integrate(0.0, 1.0, 1e-10).unwrap();
        assert!((v - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn improper_examples() {
        let f = TimeCoefficient::with_tail("exp(-t)", Tail::exp(1.0)).unwrap();
        let v = f.improper_integral(1e-10).unwrap().value().unwrap().as_f64();
        assert!((v - 1.0).abs() < 1e-10);
        let f = TimeCoefficient::new("1").unwrap();
        assert_eq!(f.improper_integral(1e-10).unwrap().value().unwrap(), ExtReal::Infinite);
        let f = TimeCoefficient::with_tail("1/(1+t)^2", Tail::power(-2.0)).unwrap();
        let v = f.improper_integral(1e-10).unwrap().value().unwrap().as_f64();
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn positivity_screening() {
        let r = TimeCoefficient::parse("t-1", Tail::Unknown, 2.0);
        assert!(matches!(r, Err(Error::NonPositive { .. })));
        assert!(TimeCoefficient::parse("t+1", Tail::Unknown, 2.0).is_ok());
        // underflowing but positive values pass the certificate
        assert!(TimeCoefficient::parse("exp(-t)", Tail::exp(1.0), 1000.0).is_ok());
    }

    #[test]
    fn integrate_rejects_bad_arguments() {
        let f = TimeCoefficient::new("1+t").unwrap();
        assert!(f.integrate(2.0, 1.0, 1e-10).is_err());
        assert!(f.integrate(0.0, 1.0, 0.0).is_err());
        let g = TimeCoefficient::parse("1-t/3", Tail::Unknown, 2.0).unwrap();
        assert!(matches!(g.integrate(0.0, 4.0, 1e-10), Err(Error::NonPositive { .. })));
    }

    #[test]
    fn product_survives_underflow() {
        let h1 = TimeCoefficient::with_tail("exp(-t)", Tail::exp(1.0)).unwrap();
        let h2 = TimeCoefficient::new("1").unwrap();
        let ratio = TimeCoefficient::ratio(&h1, &h2).unwrap();
        let p = TimeCoefficient::product(1.0, &[(&h1, 1.0), (&ratio, -2.0 / 3.0)]).unwrap();
        let Tail::Known { power, exp_rate } = p.tail() else { panic!("tail lost") };
        assert_eq!(power, 0.0);
        assert!((exp_rate - 1.0 / 3.0).abs() < 1e-15);
        assert!((p.eval(2000.0) - (-2000.0f64 / 3.0).exp()).abs() < 1e-300);
        let v = p.improper_integral(1e-10).unwrap().value().unwrap().as_f64();
        assert!((v - 3.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn cumulative_integral_properties() {
        let k = TimeCoefficient::new("1+sin(t)^2").unwrap();
        let big_k = CumulativeIntegral::new(k.clone(), 10.0, 64, 1e-12).unwrap();
        for &(s, t) in &[(0.0, 3.3), (0.1, 0.12), (1.7, 9.9), (2.0, 2.0)] {
            let direct = k.integrate(s, t, 1e-13).unwrap();
            let cached = big_k.between(s, t).unwrap();
            assert!((direct - cached).abs() <= 1e-11 * direct.abs().max(1.0));
            let diff = big_k.from_zero(t).unwrap() - big_k.from_zero(s).unwrap();
            assert!((diff - cached).abs() <= 1e-11 * cached.abs().max(1.0));
            assert!(cached >= 0.0);
        }
        assert_eq!(big_k.between(4.2, 4.2).unwrap(), 0.0);
        assert!(big_k.between(2.0, 1.0).is_err());
        // beyond the cached horizon
        let far = big_k.between(0.0, 15.0).unwrap();
        assert!((far - k.integrate(0.0, 15.0, 1e-13).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn htilde_checks() {
        let h1 = TimeCoefficient::new("exp(-t)").unwrap();
        let h2 = TimeCoefficient::new("1+t").unwrap();
        let r = HtildeRatio::new(&h1, &h2).unwrap();
        assert!(r.is_nonincreasing());
        assert!(r.constant_value().is_none());
        let r = HtildeRatio::new(&h2, &h1).unwrap();
        assert!(!r.is_nonincreasing());
        let a = TimeCoefficient::new("2*exp(-t)").unwrap();
        let b = TimeCoefficient::new("exp(-t)").unwrap();
        let r = HtildeRatio::new(&a, &b).unwrap();
        assert!(r.is_nonincreasing());
        assert_eq!(r.constant_value(), Some(2.0));
    }

    #[test]
    fn inversion_of_cumulative_integral() {
        let f = TimeCoefficient::with_tail("exp(-t)", Tail::exp(1.0)).unwrap();
        let x = f.invert_integral(0.0, 0.5, 1e9, 1e-13).unwrap().unwrap();
        assert!((x - 2f64.ln()).abs() < 1e-12);
        assert_eq!(f.invert_integral(0.0, 1.5, 1e9, 1e-12).unwrap(), None);
    }
}

//! Scalar problems `y' = f(t) b(y)`, `y(0) = y0`, solved through the
//! transforms `B(x) = ∫_{y0}^x ds/b(s)` and `F(t) = ∫_0^t f`:
//! `y(t) = B⁻¹(F(t))` up to the blow-up time `F⁻¹(B(∞))`.

use serde::Serialize;

use crate::coeffs::{invert_cumulative, TimeCoefficient};
use crate::error::{Error, Result};
use crate::expr::{parse_expr_in, Expr};
use crate::quad::{self, ExtReal, QuadOptions, Tail};

/// Blow-up times beyond this are reported as [`BlowUpTime::ExceedsCap`].
pub const TIME_CAP: f64 = 1e9;

/// The nonlinearity `b(s)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Nonlinearity {
    /// `s^alpha`
    PowerLaw { alpha: f64 },
    /// `s^p (ln s)^q` on `(s0, ∞)`
    PowerLog { p: f64, q: f64, s0: f64 },
    /// `s^p exp(c s^a)`
    ExpPower { p: f64, c: f64, a: f64 },
    /// Expression in `s`; `tail_power` is the growth exponent of `b` at infinity.
    Custom { expr: Expr, tail_power: Option<f64> },
}

impl Nonlinearity {
    pub fn custom(source: &str, tail_power: Option<f64>) -> Result<Self> {
        Ok(Nonlinearity::Custom {
            expr: parse_expr_in(source, "s")?,
            tail_power,
        })
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Nonlinearity::PowerLaw { alpha } => s.powf(*alpha),
            Nonlinearity::PowerLog { p, q, .. } => s.powf(*p) * s.ln().powf(*q),
            Nonlinearity::ExpPower { p, c, a } => s.powf(*p) * (c * s.powf(*a)).exp(),
            Nonlinearity::Custom { expr, .. } => expr.eval(s),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Nonlinearity::PowerLaw { alpha } => format!("s^{alpha}"),
            Nonlinearity::PowerLog { p, q, s0 } => format!("s^{p} (log s)^{q} on ({s0}, inf)"),
            Nonlinearity::ExpPower { p, c, a } => format!("s^{p} exp({c} s^{a})"),
            Nonlinearity::Custom { expr, .. } => expr.to_source("s"),
        }
    }

    fn validate(&self, y0: f64) -> Result<()> {
        let bad = |m: String| Err(Error::Invalid(m));
        match self {
            Nonlinearity::PowerLaw { alpha } if !(*alpha >= 0.0) => bad(format!("power-law exponent {alpha} < 0")),
            Nonlinearity::PowerLog { p, q, s0 } => {
                if !(*p >= 0.0) || !q.is_finite() || !(*s0 >= 1.0) {
                    bad(format!("power-log parameters need p >= 0, finite q, s0 >= 1 (got {p}, {q}, {s0})"))
                } else if *q != 0.0 && !(y0 > *s0) {
                    bad(format!("power-log nonlinearity needs y0 > s0 (y0 = {y0}, s0 = {s0})"))
                } else {
                    Ok(())
                }
            }
            Nonlinearity::ExpPower { p, c, a } if !(*p >= 0.0 && *c > 0.0 && *a > 0.0) => {
                bad(format!("exp-power parameters need p >= 0, c > 0, a > 0 (got {p}, {c}, {a})"))
            }
            Nonlinearity::Custom { expr, .. } => {
                // sampled positivity on [y0, 1e6 y0], log-spaced
                for k in 0..=1000 {
                    let s = y0 * 10f64.powf(6.0 * k as f64 / 1000.0);
                    let v = expr.eval(s);
                    if !(v > 0.0) || !v.is_finite() {
                        return Err(Error::SingularIntegrand(format!(
                            "b(s) = {} is not positive and finite at s = {s}",
                            expr.to_source("s")
                        )));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Blow-up time of a scalar problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum BlowUpTime {
    Finite(f64),
    /// Finite but larger than [`TIME_CAP`].
    ExceedsCap,
    Global,
}

impl BlowUpTime {
    pub fn finite(self) -> Option<f64> {
        match self {
            BlowUpTime::Finite(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_global(self) -> bool {
        self == BlowUpTime::Global
    }

    pub fn as_ext_real(self) -> ExtReal {
        match self {
            BlowUpTime::Finite(t) => ExtReal::Finite(t),
            _ => ExtReal::Infinite,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OsgoodProblem {
    pub y0: f64,
    pub f: TimeCoefficient,
    pub b: Nonlinearity,
    pub rel_tol: f64,
}

impl OsgoodProblem {
    pub fn new(y0: f64, f: TimeCoefficient, b: Nonlinearity) -> Result<Self> {
        if !(y0 > 0.0) || !y0.is_finite() {
            return Err(Error::Invalid(format!("y0 must be positive, got {y0}")));
        }
        b.validate(y0)?;
        Ok(OsgoodProblem {
            y0,
            f,
            b,
            rel_tol: 1e-12,
        })
    }

    fn opts(&self) -> QuadOptions {
        QuadOptions::with_rel_tol(self.rel_tol)
    }

    /// `∫_x0^x1 ds / b(s)` for `y0 ≤ x0 ≤ x1`.
    fn b_segment(&self, x0: f64, x1: f64) -> Result<f64> {
        if x1 == x0 {
            return Ok(0.0);
        }
        let opts = self.opts();
        let r = match &self.b {
            Nonlinearity::PowerLaw { alpha } => Ok(power_law_b(*alpha, x0, x1)),
            Nonlinearity::PowerLog { p, q, .. } => {
                let (u0, u1) = (x0.ln(), x1.ln());
                if *q == 0.0 {
                    Ok(power_law_b(*p, x0, x1))
                } else if *p == 1.0 {
                    Ok(power_law_b(*q, u0, u1))
                } else {
                    let g = |u: f64| (-q * u.ln() - (p - 1.0) * u).exp();
                    quad::integrate(&g, u0, u1, opts).map(|e| e.value)
                }
            }
            Nonlinearity::ExpPower { p, c, a } => {
                let (v0, v1) = (x0.powf(*a), x1.powf(*a));
                let e = (1.0 - p) / a - 1.0;
                let g = |v: f64| (e * v.ln() - c * v).exp() / a;
                quad::integrate(&g, v0, v1, opts).map(|e| e.value)
            }
            Nonlinearity::Custom { expr, .. } => {
                let g = |s: f64| 1.0 / expr.eval(s);
                quad::integrate(&g, x0, x1, opts).map(|e| e.value)
            }
        };
        r.map_err(|e| match e {
            Error::NonFiniteIntegrand { x } => {
                Error::SingularIntegrand(format!("b vanishes or is not finite near {x} in [{x0}, {x1}]"))
            }
            other => other,
        })
    }

    /// `B(x) = ∫_{y0}^x ds/b(s)` for `x ≥ y0`.
    pub fn b_transform(&self, x: f64) -> Result<f64> {
        if !(x >= self.y0) {
            return Err(Error::Invalid(format!("B(x) needs x >= y0 = {}, got {x}", self.y0)));
        }
        self.b_segment(self.y0, x)
    }

    /// `B(∞)`.
    pub fn b_infinity(&self) -> Result<ExtReal> {
        let opts = self.opts();
        let y0 = self.y0;
        match &self.b {
            Nonlinearity::PowerLaw { alpha } => Ok(power_law_b_infinity(*alpha, y0)),
            Nonlinearity::PowerLog { p, q, .. } => {
                if *q == 0.0 {
                    return Ok(power_law_b_infinity(*p, y0));
                }
                let u0 = y0.ln();
                if *p == 1.0 {
                    return Ok(power_law_b_infinity(*q, u0));
                }
                if *p < 1.0 {
                    return Ok(ExtReal::Infinite);
                }
                let g = |u: f64| (-q * u.ln() - (p - 1.0) * u).exp();
                let tail = Tail::Known {
                    power: -q,
                    exp_rate: p - 1.0,
                };
                quad::integrate_to_infinity(&g, u0, tail, opts)?.value()
            }
            Nonlinearity::ExpPower { p, c, a } => {
                let e = (1.0 - p) / a - 1.0;
                let g = |v: f64| (e * v.ln() - c * v).exp() / a;
                let tail = Tail::Known {
                    power: e,
                    exp_rate: *c,
                };
                quad::integrate_to_infinity(&g, y0.powf(*a), tail, opts)?.value()
            }
            Nonlinearity::Custom { expr, tail_power } => {
                let tail = match tail_power {
                    Some(r) => Tail::power(-r),
                    None => Tail::Unknown,
                };
                let g = |s: f64| 1.0 / expr.eval(s);
                quad::integrate_to_infinity(&g, y0, tail, opts)?.value()
            }
        }
    }

    pub fn f_transform(&self, t: f64) -> Result<f64> {
        self.f.integrate(0.0, t, self.rel_tol)
    }

    pub fn f_infinity(&self) -> Result<ExtReal> {
        self.f.improper_integral(self.rel_tol)?.value()
    }

    /// `F⁻¹(target)`, or `None` when `F` stays below `target` up to [`TIME_CAP`].
    pub fn f_inverse(&self, target: f64) -> Result<Option<f64>> {
        if let Some(c) = self.f.constant_value() {
            let t = target / c;
            return Ok((t <= TIME_CAP).then_some(t));
        }
        invert_cumulative(|a, b| self.f.integrate(a, b, self.rel_tol), 0.0, target, TIME_CAP)
    }

    /// `B⁻¹(v)` for `0 ≤ v < B(∞)`.
    pub fn b_inverse(&self, v: f64) -> Result<f64> {
        if v <= 0.0 {
            return Ok(self.y0);
        }
        if let Nonlinearity::PowerLaw { alpha } = self.b {
            return power_law_b_inverse(alpha, self.y0, v);
        }
        // bracket in log space, then bisect with incremental integrals
        let mut lo = self.y0;
        let mut acc = 0.0;
        let mut factor: f64 = 2.0;
        let mut hi;
        loop {
            hi = lo * factor;
            if !hi.is_finite() {
                return Err(Error::BeyondBlowUp {
                    t: f64::NAN,
                    blow_up: f64::NAN,
                });
            }
            let piece = self.b_segment(lo, hi)?;
            if acc + piece >= v {
                break;
            }
            acc += piece;
            lo = hi;
            factor = factor * factor;
        }
        loop {
            let mid = (0.5 * (lo.ln() + hi.ln())).exp();
            if hi - lo <= 1e-12 * hi.max(1.0) || mid <= lo || mid >= hi {
                break;
            }
            let piece = self.b_segment(lo, mid)?;
            if acc + piece < v {
                acc += piece;
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    pub fn solve(&self) -> Result<OsgoodSolution> {
        let b_infinity = self.b_infinity()?;
        let blow_up_time = match b_infinity {
            ExtReal::Infinite => BlowUpTime::Global,
            ExtReal::Finite(binf) => match self.f_inverse(binf)? {
                Some(t) => BlowUpTime::Finite(t),
                None => match self.f.improper_integral(self.rel_tol)? {
                    quad::ImproperIntegral::Value(ExtReal::Finite(finf)) if finf <= binf => BlowUpTime::Global,
                    quad::ImproperIntegral::Value(_) => BlowUpTime::ExceedsCap,
                    quad::ImproperIntegral::Undetermined { lower_bound } => {
                        return Err(Error::UndeterminedTail { lower_bound })
                    }
                },
            },
        };
        // F(∞) is only needed for the report; an undetermined tail is not an
        // error once the blow-up time is settled
        let f_infinity = match self.f.improper_integral(self.rel_tol)? {
            quad::ImproperIntegral::Value(v) => Some(v),
            quad::ImproperIntegral::Undetermined { .. } => None,
        };
        Ok(OsgoodSolution {
            problem: self.clone(),
            b_infinity,
            f_infinity,
            blow_up_time,
        })
    }

    pub fn blow_up_time(&self) -> Result<BlowUpTime> {
        Ok(self.solve()?.blow_up_time)
    }
}

fn power_law_b_infinity(alpha: f64, y0: f64) -> ExtReal {
    if alpha > 1.0 {
        ExtReal::Finite(y0.powf(1.0 - alpha) / (alpha - 1.0))
    } else {
        ExtReal::Infinite
    }
}

/// `∫_x0^x1 s^(-alpha) ds`, written to avoid cancellation.
fn power_law_b(alpha: f64, x0: f64, x1: f64) -> f64 {
    let r = (x1 / x0).ln();
    if alpha == 1.0 {
        r
    } else {
        let e = 1.0 - alpha;
        x0.powf(e) * (e * r).exp_m1() / e
    }
}

fn power_law_b_inverse(alpha: f64, y0: f64, v: f64) -> Result<f64> {
    if alpha == 1.0 {
        return Ok(y0 * v.exp());
    }
    let e = 1.0 - alpha;
    // x = y0 * (1 + e v / y0^e)^(1/e)
    let z = e * v / y0.powf(e);
    if z <= -1.0 {
        return Err(Error::BeyondBlowUp {
            t: f64::NAN,
            blow_up: f64::NAN,
        });
    }
    Ok(y0 * (z.ln_1p() / e).exp())
}

#[derive(Debug, Clone)]
pub struct OsgoodSolution {
    pub problem: OsgoodProblem,
    pub b_infinity: ExtReal,
    /// `None` when the tail of `f` is unknown and numerically inconclusive.
    pub f_infinity: Option<ExtReal>,
    pub blow_up_time: BlowUpTime,
}

impl OsgoodSolution {
    /// `y(t) = B⁻¹(F(t))` for `0 ≤ t` below the blow-up time.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Invalid(format!("evaluation time must be >= 0, got {t}")));
        }
        let beyond = || Error::BeyondBlowUp {
            t,
            blow_up: self.blow_up_time.as_ext_real().as_f64(),
        };
        if let BlowUpTime::Finite(tau) = self.blow_up_time {
            if t >= tau {
                return Err(beyond());
            }
        }
        let ft = self.problem.f_transform(t)?;
        if let ExtReal::Finite(binf) = self.b_infinity {
            if ft >= binf {
                return Err(beyond());
            }
        }
        self.problem.b_inverse(ft).map_err(|e| match e {
            Error::BeyondBlowUp { .. } => beyond(),
            other => other,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> TimeCoefficient {
        TimeCoefficient::constant(1.0).unwrap()
    }

    fn decay() -> TimeCoefficient {
        TimeCoefficient::with_tail("exp(-t)", Tail::exp(1.0)).unwrap()
    }

    fn power(alpha: f64, y0: f64, f: TimeCoefficient) -> OsgoodProblem {
        OsgoodProblem::new(y0, f, Nonlinearity::PowerLaw { alpha }).unwrap()
    }

    #[test]
    fn b_transform_examples() {
        assert!((power(2.0, 2.0, one()).b_transform(4.0).unwrap() - 0.25).abs() < 1e-15);
        let e = std::f64::consts::E;
        assert!((power(1.0, 1.0, one()).b_transform(e).unwrap() - 1.0).abs() < 1e-15);
        assert!(power(2.0, 2.0, one()).b_transform(1.0).is_err());
    }

    #[test]
    fn power_log_b_matches_midpoint_rule() {
        let p = OsgoodProblem::new(2.0, one(), Nonlinearity::PowerLog { p: 2.0, q: 0.5, s0: 1.0 }).unwrap();
        let v = p.b_transform(10.0).unwrap();
        let n = 2_000_000;
        let h = 8.0 / n as f64;
        let mid: f64 = (0..n)
            .map(|k| {
                let s = 2.0 + (k as f64 + 0.5) * h;
                1.0 / (s * s * s.ln().sqrt())
            })
            .sum::<f64>()
            * h;
        assert!((v - mid).abs() < 1e-10, "{v} vs {mid}");
    }

    #[test]
    fn b_infinity_examples() {
        assert_eq!(power(2.0, 2.0, one()).b_infinity().unwrap(), ExtReal::Finite(0.5));
        assert_eq!(power(1.0, 1.0, one()).b_infinity().unwrap(), ExtReal::Infinite);
        assert_eq!(power(3.0, 1.0, one()).b_infinity().unwrap(), ExtReal::Finite(0.5));
        let pl = |p, q| OsgoodProblem::new(2.0, one(), Nonlinearity::PowerLog { p, q, s0: 1.0 }).unwrap();
        assert!(pl(2.0, 0.5).b_infinity().unwrap().is_finite());
        assert!(pl(1.0, 2.0).b_infinity().unwrap().is_finite());
        assert!(!pl(1.0, 1.0).b_infinity().unwrap().is_finite());
        assert!(!pl(0.5, 3.0).b_infinity().unwrap().is_finite());
        // p = 1, q = 2: ∫ du/u^2 from ln 2
        let v = pl(1.0, 2.0).b_infinity().unwrap().as_f64();
        assert!((v - 1.0 / 2f64.ln()).abs() < 1e-14);
        let ep = OsgoodProblem::new(1.0, one(), Nonlinearity::ExpPower { p: 0.0, c: 1.0, a: 1.0 }).unwrap();
        // ∫_1^∞ e^{-s} ds
        assert!((ep.b_infinity().unwrap().as_f64() - (-1f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn blow_up_time_examples() {
        assert_eq!(power(2.0, 2.0, one()).blow_up_time().unwrap(), BlowUpTime::Finite(0.5));
        let t = power(2.0, 2.0, decay()).blow_up_time().unwrap().finite().unwrap();
        assert!((t - 2f64.ln()).abs() < 1e-10);
        assert_eq!(power(1.0, 1.0, one()).blow_up_time().unwrap(), BlowUpTime::Global);
        assert_eq!(power(2.0, 0.5, decay()).blow_up_time().unwrap(), BlowUpTime::Global);
        let slow = TimeCoefficient::constant(1e-12).unwrap();
        assert_eq!(power(2.0, 1.0, slow).blow_up_time().unwrap(), BlowUpTime::ExceedsCap);
    }

    #[test]
    fn evaluate_examples() {
        let s = power(2.0, 1.0, one()).solve().unwrap();
        assert!((s.evaluate(0.5).unwrap() - 2.0).abs() < 1e-14);
        assert!(matches!(s.evaluate(1.0), Err(Error::BeyondBlowUp { .. })));
        let s = power(1.0, 3.0, one()).solve().unwrap();
        assert!((s.evaluate(1.0).unwrap() - 3.0 * std::f64::consts::E).abs() < 1e-13);
        let s = power(2.0, 2.0, decay()).solve().unwrap();
        let exact = 1.0 / (0.5 - (1.0 - (-0.5f64).exp()));
        assert!((s.evaluate(0.5).unwrap() - exact).abs() < 1e-10 * exact);
        assert_eq!(s.evaluate(0.0).unwrap(), 2.0);
    }

    #[test]
    fn bisection_inverse_matches_closed_form() {
        // PowerLog with q = 0 goes through the bisection path
        let a = OsgoodProblem::new(2.0, one(), Nonlinearity::PowerLog { p: 2.0, q: 0.0, s0: 1.0 }).unwrap();
        let b = power(2.0, 2.0, one());
        for v in [0.01, 0.1, 0.3, 0.49] {
            let x = a.b_inverse(v).unwrap();
            let y = b.b_inverse(v).unwrap();
            assert!((x - y).abs() <= 1e-11 * y, "{x} vs {y}");
        }
    }

    #[test]
    fn custom_nonlinearity() {
        let b = Nonlinearity::custom("s^2", Some(2.0)).unwrap();
        let p = OsgoodProblem::new(2.0, one(), b).unwrap();
        assert!((p.b_infinity().unwrap().as_f64() - 0.5).abs() < 1e-10);
        let t = p.blow_up_time().unwrap().finite().unwrap();
        assert!((t - 0.5).abs() < 1e-10);
        let b = Nonlinearity::custom("s-3", None).unwrap();
        assert!(OsgoodProblem::new(2.0, one(), b).is_err());
        let b = Nonlinearity::custom("s^2", None).unwrap();
        let p = OsgoodProblem::new(2.0, one(), b).unwrap();
        assert!(matches!(p.blow_up_time(), Ok(_) | Err(Error::UndeterminedTail { .. })));
    }

    #[test]
    fn power_log_requires_y0_above_s0() {
        let r = OsgoodProblem::new(0.9, one(), Nonlinearity::PowerLog { p: 2.0, q: 0.5, s0: 1.0 });
        assert!(r.is_err());
    }
}

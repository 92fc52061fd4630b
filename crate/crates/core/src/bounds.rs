//! Blow-up-time upper bounds and global-existence certificates for the
//! companion system, built from comparison inequalities between the two
//! components and the scalar Osgood solver.
//!
//! Roles: in every case one index `i` supplies the comparison inequality
//! and the verdicts concern either `j` (upper bounds) or `i` (global
//! certificates). Component indices are 0-based in the API and 1-based in
//! reports.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};

use crate::coeffs::{HtildeRatio, TimeCoefficient};
use crate::companion::{CompanionProblem, ExponentMatrix};
use crate::error::{Error, Result};
use crate::osgood::{BlowUpTime, Nonlinearity, OsgoodProblem};
use crate::quad::ExtReal;

pub const ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    A,
    B,
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum CaseLabel {
    #[serde(rename = "a.1")]
    A1,
    #[serde(rename = "a.2")]
    A2,
    #[serde(rename = "b.1")]
    B1,
    #[serde(rename = "b.2")]
    B2,
    #[serde(rename = "c.1")]
    C1,
    #[serde(rename = "c.2")]
    C2,
}

impl CaseLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseLabel::A1 => "a.1",
            CaseLabel::A2 => "a.2",
            CaseLabel::B1 => "b.1",
            CaseLabel::B2 => "b.2",
            CaseLabel::C1 => "c.1",
            CaseLabel::C2 => "c.2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoleCase {
    /// 1-based index supplying the comparison inequality.
    pub i: usize,
    pub j: usize,
    pub case: Case,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoundsOptions {
    /// Treat `a_i` as exactly zero (`Some(true)`) or nonzero (`Some(false)`),
    /// overriding the tolerance test.
    pub declared_zero_a: [Option<bool>; 2],
    pub rel_tol: Option<f64>,
}

impl BoundsOptions {
    fn rel_tol(&self) -> f64 {
        self.rel_tol.unwrap_or(1e-12)
    }

    fn a_is_zero(&self, e: &ExponentMatrix, i: usize) -> bool {
        self.declared_zero_a[i].unwrap_or_else(|| e.a(i).abs() <= ZERO_TOL)
    }
}

/// Cases that apply, per ordered role `(i, j)`. Empty means no case applies.
pub fn case_dispatch(e: &ExponentMatrix, opts: &BoundsOptions) -> Vec<RoleCase> {
    let mut out = Vec::new();
    for i in 0..2 {
        let j = 1 - i;
        let (zi, zj) = (opts.a_is_zero(e, i), opts.a_is_zero(e, j));
        let case = if !zi && e.a(i) > 0.0 && !zj {
            Some(Case::A)
        } else if !zi && e.a(i) > 0.0 && zj {
            Some(Case::B)
        } else if zi && zj {
            Some(Case::C)
        } else {
            None
        };
        if let Some(case) = case {
            // case c is symmetric; report it once
            if case == Case::C && i == 1 {
                continue;
            }
            out.push(RoleCase { i: i + 1, j: j + 1, case });
        }
    }
    out
}

const SCALE_RANGE: &str = "comparison constant power outside the f64 range";

fn scale_ok(scale: f64) -> bool {
    scale > 0.0 && scale.is_finite()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantKind {
    C19,
    C20,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonConstants {
    pub which: ConstantKind,
    #[serde(rename = "M")]
    pub m: f64,
    pub c: f64,
}

/// `c₁₉` for role `i`: `M = max{a_j/a_i, h̃_i(0) y_j(0)^{a_j} / y_i(0)^{a_i}}`,
/// `c = M^{-1/a_i}`.
pub fn c19(e: &ExponentMatrix, htilde0: f64, y0: [f64; 2], i: usize) -> ComparisonConstants {
    let j = 1 - i;
    let (ai, aj) = (e.a(i), e.a(j));
    let m = (aj / ai).max(htilde0 * y0[j].powf(aj) / y0[i].powf(ai));
    ComparisonConstants {
        which: ConstantKind::C19,
        m,
        c: m.powf(-1.0 / ai),
    }
}

/// `c₂₀` for role `i`: `M = max{1/a_i, ln(y_j(0)) h̃_i(0) / y_i(0)^{a_i}}`, `c = 1/M`.
pub fn c20(e: &ExponentMatrix, htilde0: f64, y0: [f64; 2], i: usize) -> ComparisonConstants {
    let j = 1 - i;
    let ai = e.a(i);
    let m = (1.0 / ai).max(y0[j].ln() * htilde0 / y0[i].powf(ai));
    ComparisonConstants {
        which: ConstantKind::C20,
        m,
        c: 1.0 / m,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum VerdictKind {
    UpperBound { tau_bar: f64 },
    GlobalCertificate,
    Inconclusive { reason: String },
    HypothesisUnverified { hypothesis: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundVerdict {
    pub case: CaseLabel,
    /// 1-based component the verdict is about.
    pub component: usize,
    /// 1-based index supplying the comparison inequality.
    pub role_i: usize,
    #[serde(flatten)]
    pub kind: VerdictKind,
    pub audit: BTreeMap<String, Value>,
}

impl BoundVerdict {
    pub fn tau_bar(&self) -> Option<f64> {
        match self.kind {
            VerdictKind::UpperBound { tau_bar } => Some(tau_bar),
            _ => None,
        }
    }

    pub fn is_global(&self) -> bool {
        self.kind == VerdictKind::GlobalCertificate
    }
}

fn ext(v: ExtReal) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

struct VerdictBuilder {
    case: CaseLabel,
    component: usize,
    role_i: usize,
    audit: BTreeMap<String, Value>,
}

impl VerdictBuilder {
    fn new(case: CaseLabel, component: usize, role_i: usize) -> Self {
        VerdictBuilder {
            case,
            component,
            role_i,
            audit: BTreeMap::new(),
        }
    }

    fn note(&mut self, key: &str, v: impl Into<Value>) {
        self.audit.insert(key.to_string(), v.into());
    }

    fn finish(self, kind: VerdictKind) -> BoundVerdict {
        BoundVerdict {
            case: self.case,
            component: self.component + 1,
            role_i: self.role_i + 1,
            kind,
            audit: self.audit,
        }
    }

    fn inconclusive(self, reason: impl Into<String>) -> BoundVerdict {
        self.finish(VerdictKind::Inconclusive { reason: reason.into() })
    }

    fn unverified(self, hypothesis: impl Into<String>) -> BoundVerdict {
        self.finish(VerdictKind::HypothesisUnverified {
            hypothesis: hypothesis.into(),
        })
    }

    /// Solves the scalar comparison problem and records its transforms.
    fn osgood(&mut self, y0: f64, f: TimeCoefficient, b: Nonlinearity, rel_tol: f64) -> Result<BlowUpTime> {
        let mut p = OsgoodProblem::new(y0, f, b)?;
        p.rel_tol = rel_tol;
        let s = p.solve()?;
        self.note("f", p.f.source().to_string());
        self.note("b", p.b.describe());
        self.note("B_infinity", ext(s.b_infinity));
        self.note("F_infinity", s.f_infinity.map_or(Value::String("undetermined".into()), ext));
        Ok(s.blow_up_time)
    }

    fn upper_bound(self, t: BlowUpTime) -> BoundVerdict {
        match t {
            BlowUpTime::Finite(tau_bar) => self.finish(VerdictKind::UpperBound { tau_bar }),
            BlowUpTime::ExceedsCap => self.inconclusive("comparison problem blows up after the time cap 1e9"),
            BlowUpTime::Global => self.inconclusive("F(inf) <= B(inf): comparison problem is global"),
        }
    }

    fn global(self, t: BlowUpTime) -> BoundVerdict {
        match t {
            BlowUpTime::Global => self.finish(VerdictKind::GlobalCertificate),
            _ => self.inconclusive("F(inf) > B(inf): comparison problem blows up"),
        }
    }
}

struct Role<'a> {
    prob: &'a CompanionProblem,
    i: usize,
    j: usize,
    ratio: HtildeRatio,
    rel_tol: f64,
}

impl Role<'_> {
    fn e(&self) -> &ExponentMatrix {
        &self.prob.exponents
    }

    fn y0(&self) -> [f64; 2] {
        self.prob.y0
    }

    fn builder(&self, case: CaseLabel, component: usize) -> VerdictBuilder {
        let mut b = VerdictBuilder::new(case, component, self.i);
        b.note("a_i", self.e().a(self.i));
        b.note("a_j", self.e().a(self.j));
        b
    }

    fn htilde_hypothesis(&self) -> Option<String> {
        (!self.ratio.is_nonincreasing()).then(|| {
            format!(
                "h{}/h{} nonincreasing (sampled check failed)",
                self.i + 1,
                self.j + 1
            )
        })
    }

    fn constant_ratio(&self) -> std::result::Result<f64, String> {
        self.ratio.constant_value().ok_or_else(|| {
            format!(
                "h{}/h{} constant (max relative deviation {:.3e})",
                self.i + 1,
                self.j + 1,
                self.ratio.max_rel_deviation()
            )
        })
    }

    fn a1(&self) -> Result<BoundVerdict> {
        let (i, j, e) = (self.i, self.j, self.e());
        let mut b = self.builder(CaseLabel::A1, j);
        if let Some(h) = self.htilde_hypothesis() {
            return Ok(b.unverified(h));
        }
        let alpha_j = e.alpha(j).expect("a_i != 0 in case a");
        let k = c19(e, self.ratio.eval(0.0), self.y0(), i);
        b.note("alpha_j", alpha_j);
        b.note("M", k.m);
        b.note("c19", k.c);
        if !(alpha_j > 1.0) {
            return Ok(b.inconclusive("alpha_j <= 1"));
        }
        let pji = e.p(j, i);
        let q = pji / e.a(i);
        let scale = k.c.powf(pji);
        if !scale_ok(scale) {
            return Ok(b.inconclusive(SCALE_RANGE));
        }
        let f = TimeCoefficient::product(scale, &[(&self.prob.h[j], 1.0), (self.ratio.as_coefficient(), q)])?;
        b.note("threshold", self.y0()[j].powf(1.0 - alpha_j) / (alpha_j - 1.0));
        let t = b.osgood(self.y0()[j], f, Nonlinearity::PowerLaw { alpha: alpha_j }, self.rel_tol)?;
        Ok(b.upper_bound(t))
    }

    fn a2(&self) -> Result<BoundVerdict> {
        let (i, j, e) = (self.i, self.j, self.e());
        let mut b = self.builder(CaseLabel::A2, i);
        if let Some(h) = self.htilde_hypothesis() {
            return Ok(b.unverified(h));
        }
        let alpha_i = e.alpha(i).expect("a_j != 0 in case a");
        let k = c19(e, self.ratio.eval(0.0), self.y0(), i);
        b.note("alpha_i", alpha_i);
        b.note("M", k.m);
        b.note("c19", k.c);
        let pij = e.p(i, j);
        if pij > 0.0 && e.a(j) < 0.0 {
            // the lower bound on y_i only yields an upper bound on y_j when a_j > 0
            return Ok(b.inconclusive("a_j < 0: no upper estimate of y_j available"));
        }
        if alpha_i <= 1.0 {
            return Ok(b.finish(VerdictKind::GlobalCertificate));
        }
        let scale = k.c.powf(e.p(i, i) - alpha_i);
        if !scale_ok(scale) {
            return Ok(b.inconclusive(SCALE_RANGE));
        }
        let f = TimeCoefficient::product(
            scale,
            &[(&self.prob.h[i], 1.0), (self.ratio.as_coefficient(), -pij / e.a(j))],
        )?;
        b.note("threshold", self.y0()[i].powf(1.0 - alpha_i) / (alpha_i - 1.0));
        let t = b.osgood(self.y0()[i], f, Nonlinearity::PowerLaw { alpha: alpha_i }, self.rel_tol)?;
        Ok(b.global(t))
    }

    fn b1(&self) -> Result<BoundVerdict> {
        let (i, j, e) = (self.i, self.j, self.e());
        let mut b = self.builder(CaseLabel::B1, j);
        if let Some(h) = self.htilde_hypothesis() {
            return Ok(b.unverified(h));
        }
        let y0 = self.y0();
        if !(y0[j] > 1.0) {
            return Ok(b.inconclusive("y_j(0) <= 1"));
        }
        let k = c20(e, self.ratio.eval(0.0), y0, i);
        b.note("M", k.m);
        b.note("c20", k.c);
        let q = e.p(j, i) / e.a(i);
        // y_i^{p_ji} >= (c20 h̃ log y_j)^{p_ji/a_i}
        let scale = k.c.powf(q);
        if !scale_ok(scale) {
            return Ok(b.inconclusive(SCALE_RANGE));
        }
        let f = TimeCoefficient::product(scale, &[(&self.prob.h[j], 1.0), (self.ratio.as_coefficient(), q)])?;
        let nl = Nonlinearity::PowerLog {
            p: e.p(j, j),
            q,
            s0: 1.0,
        };
        let t = b.osgood(y0[j], f, nl, self.rel_tol)?;
        Ok(b.upper_bound(t))
    }

    fn b2(&self) -> Result<BoundVerdict> {
        let (i, j, e) = (self.i, self.j, self.e());
        let mut b = self.builder(CaseLabel::B2, i);
        if let Some(h) = self.htilde_hypothesis() {
            return Ok(b.unverified(h));
        }
        let ct = match self.constant_ratio() {
            Ok(c) => c,
            Err(h) => return Ok(b.unverified(h)),
        };
        let y0 = self.y0();
        let k = c20(e, ct, y0, i);
        b.note("M", k.m);
        b.note("c20", k.c);
        b.note("c_tilde", ct);
        let pij = e.p(i, j);
        let nl = if pij == 0.0 {
            Nonlinearity::PowerLaw { alpha: e.p(i, i) }
        } else {
            Nonlinearity::ExpPower {
                p: e.p(i, i),
                c: pij / (k.c * ct),
                a: e.a(i),
            }
        };
        let t = b.osgood(y0[i], self.prob.h[i].clone(), nl, self.rel_tol)?;
        Ok(b.global(t))
    }

    fn c1(&self) -> Result<BoundVerdict> {
        let (i, j, e) = (self.i, self.j, self.e());
        let mut b = self.builder(CaseLabel::C1, j);
        let ct = match self.constant_ratio() {
            Ok(c) => c,
            Err(h) => return Ok(b.unverified(h)),
        };
        let y0 = self.y0();
        let pji = e.p(j, i);
        let beta = e.p(j, j) + pji * ct;
        let pref = (y0[i] / y0[j].powf(ct)).powf(pji);
        b.note("c_tilde", ct);
        b.note("beta_j", beta);
        b.note("prefactor", pref);
        if !(beta > 1.0) {
            return Ok(b.inconclusive("beta_j <= 1"));
        }
        b.note("threshold", y0[j].powf(1.0 - beta) / (beta - 1.0));
        let f = TimeCoefficient::product(pref, &[(&self.prob.h[j], 1.0)])?;
        let t = b.osgood(y0[j], f, Nonlinearity::PowerLaw { alpha: beta }, self.rel_tol)?;
        Ok(b.upper_bound(t))
    }

    fn c2(&self) -> Result<BoundVerdict> {
        let (i, j, e) = (self.i, self.j, self.e());
        let mut b = self.builder(CaseLabel::C2, i);
        let ct = match self.constant_ratio() {
            Ok(c) => c,
            Err(h) => return Ok(b.unverified(h)),
        };
        let y0 = self.y0();
        let pij = e.p(i, j);
        let gamma = e.p(i, i) + pij / ct;
        let pref = (y0[j] / y0[i].powf(1.0 / ct)).powf(pij);
        b.note("c_tilde", ct);
        b.note("gamma_i", gamma);
        b.note("prefactor", pref);
        if gamma <= 1.0 {
            return Ok(b.finish(VerdictKind::GlobalCertificate));
        }
        b.note("threshold", y0[i].powf(1.0 - gamma) / (gamma - 1.0));
        let f = TimeCoefficient::product(pref, &[(&self.prob.h[i], 1.0)])?;
        let t = b.osgood(y0[i], f, Nonlinearity::PowerLaw { alpha: gamma }, self.rel_tol)?;
        Ok(b.global(t))
    }
}

/// Every applicable verdict, in role order.
pub fn verdicts(prob: &CompanionProblem, opts: &BoundsOptions) -> Result<Vec<BoundVerdict>> {
    let mut out = Vec::new();
    for rc in case_dispatch(&prob.exponents, opts) {
        let roles: &[(usize, usize)] = if rc.case == Case::C { &[(0, 1), (1, 0)] } else { &[(rc.i - 1, rc.j - 1)] };
        for &(i, j) in roles {
            let role = Role {
                prob,
                i,
                j,
                ratio: HtildeRatio::new(&prob.h[i], &prob.h[j])?,
                rel_tol: opts.rel_tol(),
            };
            match rc.case {
                Case::A => {
                    out.push(role.a1()?);
                    out.push(role.a2()?);
                }
                Case::B => {
                    out.push(role.b1()?);
                    out.push(role.b2()?);
                }
                Case::C => {
                    out.push(role.c1()?);
                    out.push(role.c2()?);
                }
            }
        }
    }
    Ok(out)
}

pub fn verdict_a1(prob: &CompanionProblem, i: usize) -> Result<BoundVerdict> {
    role(prob, i, Case::A)?.a1()
}

pub fn verdict_a2(prob: &CompanionProblem, i: usize) -> Result<BoundVerdict> {
    role(prob, i, Case::A)?.a2()
}

pub fn verdict_b1(prob: &CompanionProblem, i: usize) -> Result<BoundVerdict> {
    role(prob, i, Case::B)?.b1()
}

pub fn verdict_b2(prob: &CompanionProblem, i: usize) -> Result<BoundVerdict> {
    role(prob, i, Case::B)?.b2()
}

pub fn verdict_c1(prob: &CompanionProblem, i: usize) -> Result<BoundVerdict> {
    role(prob, i, Case::C)?.c1()
}

pub fn verdict_c2(prob: &CompanionProblem, i: usize) -> Result<BoundVerdict> {
    role(prob, i, Case::C)?.c2()
}

fn role(prob: &CompanionProblem, i: usize, case: Case) -> Result<Role<'_>> {
    if i > 1 {
        return Err(Error::Invalid(format!("role index must be 0 or 1, got {i}")));
    }
    let j = 1 - i;
    let e = &prob.exponents;
    let opts = BoundsOptions::default();
    let ok = match case {
        Case::A => e.a(i) > ZERO_TOL && !opts.a_is_zero(e, j),
        Case::B => e.a(i) > ZERO_TOL && opts.a_is_zero(e, j),
        Case::C => opts.a_is_zero(e, i) && opts.a_is_zero(e, j),
    };
    if !ok {
        return Err(Error::Invalid(format!(
            "case {case:?} does not apply with i = {} (a_i = {}, a_j = {})",
            i + 1,
            e.a(i),
            e.a(j)
        )));
    }
    Ok(Role {
        prob,
        i,
        j,
        ratio: HtildeRatio::new(&prob.h[i], &prob.h[j])?,
        rel_tol: opts.rel_tol(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Prop1Outcome {
    BlowUpCertificate { tau_bar: f64 },
    Inconclusive { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prop1Report {
    pub component: usize,
    pub integral_h: Value,
    pub threshold: f64,
    #[serde(flatten)]
    pub outcome: Prop1Outcome,
}

/// Freezes `y_j` at its initial value: `z_i' = y_j(0)^{p_ij} h_i z_i^{p_ii}`.
pub fn prop1_check(prob: &CompanionProblem, i: usize) -> Result<Prop1Report> {
    let j = 1 - i;
    let e = &prob.exponents;
    let pii = e.p(i, i);
    let y0 = prob.y0;
    let mut report = Prop1Report {
        component: i + 1,
        integral_h: Value::Null,
        threshold: f64::NAN,
        outcome: Prop1Outcome::Inconclusive {
            reason: "p_ii <= 1".into(),
        },
    };
    if !(pii > 1.0) {
        return Ok(report);
    }
    report.threshold = y0[i].powf(1.0 - pii) / ((pii - 1.0) * y0[j].powf(e.p(i, j)));
    let integral = prob.h[i].improper_integral(1e-12)?.value()?;
    report.integral_h = ext(integral);
    let f = TimeCoefficient::product(y0[j].powf(e.p(i, j)), &[(&prob.h[i], 1.0)])?;
    let t = OsgoodProblem::new(y0[i], f, Nonlinearity::PowerLaw { alpha: pii })?.blow_up_time()?;
    report.outcome = match t {
        BlowUpTime::Finite(tau_bar) if integral > ExtReal::Finite(report.threshold) => {
            Prop1Outcome::BlowUpCertificate { tau_bar }
        }
        BlowUpTime::ExceedsCap => Prop1Outcome::Inconclusive {
            reason: "criterion holds but the bound exceeds the time cap 1e9".into(),
        },
        _ => Prop1Outcome::Inconclusive {
            reason: "integral of h_i does not exceed the threshold".into(),
        },
    };
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CorollaryClass {
    BlowUp,
    NotCovered,
}

/// For constant `h`: blow-up iff `p11 > 1`, `p22 > 1` or
/// `(p11−1)(p22−1) − p12 p21 < 0`.
pub fn corollary_classify(e: &ExponentMatrix) -> CorollaryClass {
    if e.p11 > 1.0 || e.p22 > 1.0 || e.determinant() < 0.0 {
        CorollaryClass::BlowUp
    } else {
        CorollaryClass::NotCovered
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentSummary {
    pub component: usize,
    /// Smallest upper bound on this component's existence time.
    pub tightest_upper_bound: Option<f64>,
    pub tightest_case: Option<CaseLabel>,
    pub global_certificates: Vec<CaseLabel>,
    /// Set when an upper bound and a global certificate coexist.
    pub contradiction: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub exponents: ExponentMatrix,
    pub derived: BTreeMap<String, Value>,
    pub cases: Vec<RoleCase>,
    pub unsupported: bool,
    pub verdicts: Vec<BoundVerdict>,
    pub components: Vec<ComponentSummary>,
    pub prop1: Vec<Prop1Report>,
    /// Only for constant `h`.
    pub corollary: Option<CorollaryClass>,
    /// Upper bound on the system's existence time from all sources.
    pub system_upper_bound: Option<f64>,
}

pub fn summarize(verdicts: &[BoundVerdict]) -> Vec<ComponentSummary> {
    (1..=2)
        .map(|k| {
            let mut best: Option<(f64, CaseLabel)> = None;
            let mut globals = Vec::new();
            for v in verdicts.iter().filter(|v| v.component == k) {
                if let Some(t) = v.tau_bar() {
                    if best.map_or(true, |(b, _)| t < b) {
                        best = Some((t, v.case));
                    }
                }
                if v.is_global() && !globals.contains(&v.case) {
                    globals.push(v.case);
                }
            }
            ComponentSummary {
                component: k,
                tightest_upper_bound: best.map(|b| b.0),
                tightest_case: best.map(|b| b.1),
                contradiction: best.is_some() && !globals.is_empty(),
                global_certificates: globals,
            }
        })
        .collect()
}

pub fn report(prob: &CompanionProblem, opts: &BoundsOptions) -> Result<BoundsReport> {
    let e = prob.exponents;
    let mut derived = BTreeMap::new();
    for i in 0..2 {
        derived.insert(format!("a{}", i + 1), json!(e.a(i)));
        derived.insert(format!("alpha{}", i + 1), json!(e.alpha(i)));
    }
    derived.insert("determinant".into(), json!(e.determinant()));
    let cases = case_dispatch(&e, opts);
    let verdicts = verdicts(prob, opts)?;
    let components = summarize(&verdicts);
    let prop1 = vec![prop1_check(prob, 0)?, prop1_check(prob, 1)?];
    let corollary = (prob.h[0].is_constant() && prob.h[1].is_constant()).then(|| corollary_classify(&e));
    let mut system_upper_bound: Option<f64> = None;
    let mut take = |t: f64| system_upper_bound = Some(system_upper_bound.map_or(t, |b: f64| b.min(t)));
    for c in &components {
        if let Some(t) = c.tightest_upper_bound {
            take(t);
        }
    }
    for p in &prop1 {
        if let Prop1Outcome::BlowUpCertificate { tau_bar } = p.outcome {
            take(tau_bar);
        }
    }
    Ok(BoundsReport {
        exponents: e,
        derived,
        unsupported: cases.is_empty(),
        cases,
        verdicts,
        components,
        prop1,
        corollary,
        system_upper_bound,
    })
}

/// Case labels certifying both components global, or `None`.
pub fn global_certificates(prob: &CompanionProblem) -> Result<Option<Vec<String>>> {
    let v = verdicts(prob, &BoundsOptions::default())?;
    let s = summarize(&v);
    if s.iter().all(|c| !c.global_certificates.is_empty() && !c.contradiction) {
        Ok(Some(
            s.iter()
                .flat_map(|c| {
                    c.global_certificates
                        .iter()
                        .map(move |l| format!("component {}: {}", c.component, l.as_str()))
                })
                .collect(),
        ))
    } else {
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::Tail;

    fn one() -> TimeCoefficient {
        TimeCoefficient::constant(1.0).unwrap()
    }

    fn problem(rows: [[f64; 2]; 2], y0: [f64; 2]) -> CompanionProblem {
        CompanionProblem::new(ExponentMatrix::from_rows(rows).unwrap(), one(), one(), y0).unwrap()
    }

    #[test]
    fn dispatch_examples() {
        let o = BoundsOptions::default();
        let e = ExponentMatrix::from_rows([[0.0, 2.0], [2.0, 0.0]]).unwrap();
        let c = case_dispatch(&e, &o);
        assert_eq!(c.len(), 2);
        assert!(c.iter().all(|r| r.case == Case::A));
        let e = ExponentMatrix::from_rows([[2.0, 1.0], [1.0, 2.0]]).unwrap();
        assert_eq!(case_dispatch(&e, &o), vec![RoleCase { i: 1, j: 2, case: Case::C }]);
        let e = ExponentMatrix::from_rows([[0.0, 1.0], [1.0, 2.0]]).unwrap();
        assert_eq!(case_dispatch(&e, &o), vec![RoleCase { i: 1, j: 2, case: Case::B }]);
        // a1 = a2 = -1
        let e = ExponentMatrix::from_rows([[2.0, 0.0], [0.0, 2.0]]).unwrap();
        assert!(case_dispatch(&e, &o).is_empty());
    }

    #[test]
    fn declared_override() {
        // a2 = 1e-13 is inside the tolerance; declaring it nonzero switches b to a
        let e = ExponentMatrix::from_rows([[0.0, 1.0 + 1e-13], [1.0, 2.0]]).unwrap();
        assert_eq!(case_dispatch(&e, &BoundsOptions::default())[0].case, Case::B);
        let o = BoundsOptions {
            declared_zero_a: [None, Some(false)],
            ..Default::default()
        };
        assert_eq!(case_dispatch(&e, &o)[0].case, Case::A);
    }

    #[test]
    fn a1_examples() {
        let v = verdict_a1(&problem([[0.0, 2.0], [2.0, 0.0]], [1.0, 1.0]), 0).unwrap();
        assert!((v.tau_bar().unwrap() - 1.0).abs() < 1e-12, "{v:?}");
        assert_eq!(v.audit["c19"], json!(1.0));
        let v = verdict_a1(&problem([[0.0, 2.0], [2.0, 0.0]], [2.0, 2.0]), 0).unwrap();
        // M = max{1, 1} = 1, alpha = 2: tau_bar = 1/2
        assert!((v.tau_bar().unwrap() - 0.5).abs() < 1e-12);
        // alpha_2 = 0.5 + 1 * 1/1 ... a configuration with alpha_j < 1
        let v = verdict_a1(&problem([[0.5, 0.1], [0.1, 0.5]], [1.0, 1.0]), 0).unwrap();
        assert!(matches!(v.kind, VerdictKind::Inconclusive { .. }));
    }

    #[test]
    fn a2_examples() {
        for i in 0..2 {
            let v = verdict_a2(&problem([[0.5, 0.1], [0.1, 0.5]], [1.0, 1.0]), i).unwrap();
            assert!(v.is_global());
            assert!((v.audit["alpha_i"].as_f64().unwrap() - 0.6).abs() < 1e-15);
        }
        // alpha_1 = 1 exactly: p11 = 0, p12 = 1, a1 = a2
        let v = verdict_a2(&problem([[0.0, 1.0], [1.0, 0.0]], [1.0, 1.0]), 0).unwrap();
        assert!(v.is_global());
    }

    #[test]
    fn a1_decaying_h() {
        let d = TimeCoefficient::with_tail("exp(-t)", Tail::exp(1.0)).unwrap();
        let e = ExponentMatrix::from_rows([[0.0, 2.0], [2.0, 0.0]]).unwrap();
        // F(t) = 1 - e^{-t}, threshold 1/y0
        let p = CompanionProblem::new(e, d.clone(), d.clone(), [2.0, 2.0]).unwrap();
        let v = verdict_a1(&p, 0).unwrap();
        assert!((v.tau_bar().unwrap() - 2f64.ln()).abs() < 1e-10, "{v:?}");
        let p = CompanionProblem::new(e, d.clone(), d, [0.5, 0.5]).unwrap();
        assert!(matches!(verdict_a1(&p, 0).unwrap().kind, VerdictKind::Inconclusive { .. }));
    }

    #[test]
    fn constants() {
        let e = ExponentMatrix::from_rows([[0.0, 1.0], [1.0, 2.0]]).unwrap();
        let k = c20(&e, 1.0, [1.0, 2.0], 0);
        assert!((k.m - 2f64.ln()).abs() < 1e-15);
        assert!((k.c - 1.0 / 2f64.ln()).abs() < 1e-14);
        let e = ExponentMatrix::from_rows([[0.0, 2.0], [2.0, 0.0]]).unwrap();
        let k = c19(&e, 1.0, [1.0, 1.0], 0);
        assert_eq!((k.m, k.c), (1.0, 1.0));
    }

    #[test]
    fn b_examples() {
        let p = problem([[0.0, 1.0], [1.0, 2.0]], [1.0, 2.0]);
        let v = verdict_b1(&p, 0).unwrap();
        let tau = v.tau_bar().expect("upper bound");
        let binf = v.audit["B_infinity"].as_f64().unwrap();
        let c = 1.0 / 2f64.ln();
        assert!((tau - binf / c.sqrt()).abs() < 1e-9 * tau);
        let v = verdict_b2(&p, 0).unwrap();
        assert!(matches!(v.kind, VerdictKind::GlobalCertificate | VerdictKind::Inconclusive { .. }));
        // y_j(0) <= 1
        let v = verdict_b1(&problem([[0.0, 1.0], [1.0, 2.0]], [1.0, 1.0]), 0).unwrap();
        assert!(matches!(v.kind, VerdictKind::Inconclusive { .. }));
    }

    #[test]
    fn c_examples() {
        let p = problem([[2.0, 1.0], [1.0, 2.0]], [1.0, 1.0]);
        let v = verdict_c1(&p, 0).unwrap();
        assert!((v.tau_bar().unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(v.audit["beta_j"], json!(3.0));
        assert_eq!(v.audit["prefactor"], json!(1.0));
        let p = problem([[0.3, 0.2], [0.2, 0.3]], [1.0, 1.0]);
        // a_i = 0.9: not case c, so build the role directly
        assert!(verdict_c2(&p, 0).is_err());
        let p = problem([[1.0, 0.0], [0.0, 1.0]], [1.0, 1.0]);
        let v = verdict_c2(&p, 0).unwrap();
        assert!(v.is_global());
    }

    #[test]
    fn prop1_examples() {
        let d = TimeCoefficient::with_tail("exp(-t)", Tail::exp(1.0)).unwrap();
        let e = ExponentMatrix::from_rows([[2.0, 0.0], [0.0, 0.0]]).unwrap();
        let p = CompanionProblem::new(e, d.clone(), one(), [2.0, 1.0]).unwrap();
        match prop1_check(&p, 0).unwrap().outcome {
            Prop1Outcome::BlowUpCertificate { tau_bar } => assert!((tau_bar - 2f64.ln()).abs() < 1e-10),
            o => panic!("{o:?}"),
        }
        let p = CompanionProblem::new(e, d, one(), [0.5, 1.0]).unwrap();
        assert!(matches!(prop1_check(&p, 0).unwrap().outcome, Prop1Outcome::Inconclusive { .. }));
        let p = CompanionProblem::new(e, one(), one(), [0.01, 1.0]).unwrap();
        assert!(matches!(prop1_check(&p, 0).unwrap().outcome, Prop1Outcome::BlowUpCertificate { .. }));
    }

    #[test]
    fn corollary_examples() {
        let c = |r| corollary_classify(&ExponentMatrix::from_rows(r).unwrap());
        assert_eq!(c([[0.0, 2.0], [2.0, 0.0]]), CorollaryClass::BlowUp);
        assert_eq!(c([[2.0, 0.0], [0.0, 0.5]]), CorollaryClass::BlowUp);
        assert_eq!(c([[1.0, 0.0], [0.0, 1.0]]), CorollaryClass::NotCovered);
    }

    #[test]
    fn tiny_a_is_inconclusive_not_an_error() {
        // a_1 = 5e-4 drives c19^{p} below the f64 range
        let e = ExponentMatrix::from_rows([[2.0, 1.0], [1.0005, 0.5]]).unwrap();
        let one = TimeCoefficient::constant(1.0).unwrap();
        let prob = CompanionProblem::new(e, one.clone(), one, [1.0, 1.0]).unwrap();
        let rep = report(&prob, &BoundsOptions::default()).unwrap();
        assert!(rep.verdicts.iter().any(|v| matches!(&v.kind, VerdictKind::Inconclusive { reason } if reason == SCALE_RANGE)));
    }

    #[test]
    fn report_and_certificates() {
        let r = report(&problem([[2.0, 1.0], [1.0, 2.0]], [1.0, 1.0]), &BoundsOptions::default()).unwrap();
        assert!((r.system_upper_bound.unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(r.corollary, Some(CorollaryClass::BlowUp));
        assert!(global_certificates(&problem([[1.0, 0.0], [0.0, 1.0]], [1.0, 1.0])).unwrap().is_some());
        assert!(global_certificates(&problem([[0.0, 2.0], [2.0, 0.0]], [1.0, 1.0])).unwrap().is_none());
        let r = report(&problem([[2.0, 0.0], [0.0, 2.0]], [1.0, 1.0]), &BoundsOptions::default()).unwrap();
        assert!(r.unsupported);
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"unsupported\":true"));
    }
}

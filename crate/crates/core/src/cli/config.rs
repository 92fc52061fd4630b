//! JSON experiment configuration. Every validation failure is collected
//! with its field path before any computation starts.

use std::fmt;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::bounds::BoundsOptions;
use crate::coeffs::{TimeCoefficient, DEFAULT_HORIZON};
use crate::companion::{CompanionProblem, ExponentMatrix, SolveControls};
use crate::pde::{HalfLength, InitialProfile, PdeConfig};
use crate::quad::Tail;

pub const DEFAULT_SEED: u64 = 20240601;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldError {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationErrors(pub Vec<FieldError>);

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{}: {}", e.path, e.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationErrors {}

/// A coefficient expression in `t` with its tail descriptor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefSpec {
    pub expr: String,
    pub tail: Tail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    pub dim: usize,
    pub points_per_axis: usize,
    pub half_length: HalfLength,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OdeSpec {
    pub t_end: f64,
    pub atol: f64,
    pub y_max: f64,
    pub max_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsSpec {
    pub declared_zero_a: [Option<bool>; 2],
    /// Also run the companion bracket next to the verdicts.
    pub audit_simulation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PdeSpec {
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    pub record_every_step: bool,
    pub dt_max: f64,
    pub u_max: f64,
    pub max_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifySpec {
    pub identity_tuples: usize,
    pub trajectories: usize,
    pub tracking_window: f64,
    pub far_field_tol: f64,
    pub domination_tol: f64,
    pub comparison_horizon: f64,
    pub comparison_delta: f64,
    pub picard_t_short: Option<f64>,
    pub picard_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub exponents: [[f64; 2]; 2],
    pub h: [CoefSpec; 2],
    pub k: [CoefSpec; 2],
    pub y0: [f64; 2],
    pub profiles: [InitialProfile; 2],
    pub grid: GridSpec,
    pub ode: OdeSpec,
    pub bounds: BoundsSpec,
    pub pde: PdeSpec,
    pub verify: VerifySpec,
    pub seed: u64,
}

struct Reader {
    errors: Vec<FieldError>,
}

impl Reader {
    fn err(&mut self, path: &str, message: impl Into<String>) {
        self.errors.push(FieldError {
            path: path.to_string(),
            message: message.into(),
        });
    }

    fn num(&mut self, obj: Option<&Map<String, Value>>, key: &str, path: &str, default: f64) -> f64 {
        match obj.and_then(|o| o.get(key)) {
            None | Some(Value::Null) => default,
            Some(v) => match v.as_f64() {
                Some(x) if x.is_finite() => x,
                _ => {
                    self.err(&format!("{path}.{key}"), format!("expected a finite number, got {v}"));
                    default
                }
            },
        }
    }

    fn positive(&mut self, obj: Option<&Map<String, Value>>, key: &str, path: &str, default: f64) -> f64 {
        let x = self.num(obj, key, path, default);
        if !(x > 0.0) {
            self.err(&format!("{path}.{key}"), format!("must be positive, got {x}"));
            return default;
        }
        x
    }

    fn count(&mut self, obj: Option<&Map<String, Value>>, key: &str, path: &str, default: usize) -> usize {
        match obj.and_then(|o| o.get(key)) {
            None | Some(Value::Null) => default,
            Some(v) => match v.as_u64() {
                Some(x) => x as usize,
                None => {
                    self.err(&format!("{path}.{key}"), format!("expected a nonnegative integer, got {v}"));
                    default
                }
            },
        }
    }

    fn boolean(&mut self, obj: Option<&Map<String, Value>>, key: &str, path: &str, default: bool) -> bool {
        match obj.and_then(|o| o.get(key)) {
            None | Some(Value::Null) => default,
            Some(Value::Bool(b)) => *b,
            Some(v) => {
                self.err(&format!("{path}.{key}"), format!("expected true or false, got {v}"));
                default
            }
        }
    }

    fn section<'v>(&mut self, root: &'v Map<String, Value>, key: &str) -> Option<&'v Map<String, Value>> {
        match root.get(key) {
            None | Some(Value::Null) => None,
            Some(Value::Object(m)) => Some(m),
            Some(v) => {
                self.err(key, format!("expected an object, got {v}"));
                None
            }
        }
    }

    fn pair<'v>(&mut self, root: &'v Map<String, Value>, key: &str) -> Option<[&'v Value; 2]> {
        match root.get(key) {
            None | Some(Value::Null) => None,
            Some(Value::Array(a)) if a.len() == 2 => Some([&a[0], &a[1]]),
            Some(v) => {
                self.err(key, format!("expected an array of two entries, got {v}"));
                None
            }
        }
    }

    fn tail(&mut self, v: Option<&Value>, path: &str) -> Tail {
        match v {
            None | Some(Value::Null) => Tail::Unknown,
            Some(Value::String(s)) if s == "unknown" => Tail::Unknown,
            Some(Value::Object(m)) if m.len() == 1 && m.contains_key("known") => self.tail(m.get("known"), path),
            Some(Value::Object(m)) => {
                for k in m.keys() {
                    if k != "power" && k != "exp_rate" {
                        self.err(&format!("{path}.{k}"), "unknown tail field (expected power, exp_rate)");
                    }
                }
                Tail::Known {
                    power: self.num(Some(m), "power", path, 0.0),
                    exp_rate: self.num(Some(m), "exp_rate", path, 0.0),
                }
            }
            Some(v) => {
                self.err(path, format!("expected \"unknown\" or {{power, exp_rate}}, got {v}"));
                Tail::Unknown
            }
        }
    }

    fn coef(&mut self, v: &Value, path: &str) -> CoefSpec {
        let (expr, tail) = match v {
            Value::String(s) => (s.clone(), Tail::Unknown),
            Value::Number(n) => (n.to_string(), Tail::Unknown),
            Value::Object(m) => {
                let expr = match m.get("expr") {
                    Some(Value::String(s)) => s.clone(),
                    Some(Value::Number(n)) => n.to_string(),
                    _ => {
                        self.err(&format!("{path}.expr"), "expected an expression string");
                        "1".into()
                    }
                };
                (expr, self.tail(m.get("tail"), &format!("{path}.tail")))
            }
            _ => {
                self.err(path, format!("expected an expression string or {{expr, tail}}, got {v}"));
                ("1".into(), Tail::Unknown)
            }
        };
        if let Err(e) = TimeCoefficient::parse(&expr, tail, DEFAULT_HORIZON) {
            self.err(path, e.to_string());
        }
        CoefSpec { expr, tail }
    }

    fn coefs(&mut self, root: &Map<String, Value>, key: &str) -> [CoefSpec; 2] {
        match self.pair(root, key) {
            Some([a, b]) => [self.coef(a, &format!("{key}[0]")), self.coef(b, &format!("{key}[1]"))],
            None => [0, 1].map(|_| CoefSpec {
                expr: "1".into(),
                tail: Tail::Unknown,
            }),
        }
    }

    fn profile(&mut self, v: &Value, path: &str) -> Option<InitialProfile> {
        match serde_json::from_value::<InitialProfile>(v.clone()) {
            Ok(p) => {
                if let Err(e) = p.validate() {
                    self.err(path, e.to_string());
                    return None;
                }
                Some(p)
            }
            Err(e) => {
                self.err(path, e.to_string());
                None
            }
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ValidationErrors> {
        let value: Value = serde_json::from_str(text).map_err(|e| {
            ValidationErrors(vec![FieldError {
                path: "$".into(),
                message: format!("invalid JSON: {e}"),
            }])
        })?;
        Self::from_value(&value)
    }

    pub fn from_value(value: &Value) -> Result<Self, ValidationErrors> {
        let mut r = Reader { errors: Vec::new() };
        let Some(root) = value.as_object() else {
            return Err(ValidationErrors(vec![FieldError {
                path: "$".into(),
                message: "expected a JSON object".into(),
            }]));
        };
        const KNOWN: [&str; 11] = [
            "exponents", "h", "k", "y0", "profiles", "grid", "ode", "bounds", "pde", "verify", "seed",
        ];
        for k in root.keys() {
            if !KNOWN.contains(&k.as_str()) {
                r.err(k, "unknown field");
            }
        }

        let mut exponents = [[0.0; 2]; 2];
        match root.get("exponents") {
            Some(Value::Array(rows)) if rows.len() == 2 => {
                for (i, row) in rows.iter().enumerate() {
                    match row.as_array() {
                        Some(row) if row.len() == 2 => {
                            for (j, v) in row.iter().enumerate() {
                                match v.as_f64() {
                                    Some(x) if x >= 0.0 && x.is_finite() => exponents[i][j] = x,
                                    _ => r.err(&format!("exponents[{i}][{j}]"), format!("must be a real >= 0, got {v}")),
                                }
                            }
                        }
                        _ => r.err(&format!("exponents[{i}]"), "expected a row of two numbers"),
                    }
                }
            }
            None => r.err("exponents", "required: [[p11, p12], [p21, p22]]"),
            Some(v) => r.err("exponents", format!("expected [[p11, p12], [p21, p22]], got {v}")),
        }

        let h = r.coefs(root, "h");
        let k = r.coefs(root, "k");

        let y0 = r.pair(root, "y0").map(|[a, b]| {
            [(a, "y0[0]"), (b, "y0[1]")].map(|(v, p)| match v.as_f64() {
                Some(x) if x > 0.0 && x.is_finite() => x,
                _ => {
                    r.err(p, format!("must be positive, got {v}"));
                    1.0
                }
            })
        });
        let profiles = r.pair(root, "profiles").map(|[a, b]| [r.profile(a, "profiles[0]"), r.profile(b, "profiles[1]")]);
        let (y0, profiles) = match (y0, profiles) {
            (Some(y), Some([Some(a), Some(b)])) => (y, [a, b]),
            (Some(y), None) => (y, y.map(|value| InitialProfile::Constant { value })),
            (None, Some([Some(a), Some(b)])) => ([a.sup(), b.sup()], [a, b]),
            (None, None) => {
                r.err("y0", "required unless profiles are given");
                ([1.0; 2], [0, 1].map(|_| InitialProfile::Constant { value: 1.0 }))
            }
            _ => ([1.0; 2], [0, 1].map(|_| InitialProfile::Constant { value: 1.0 })),
        };

        let g = r.section(root, "grid");
        let dim = r.count(g, "dim", "grid", 1);
        let points_per_axis = r.count(g, "points_per_axis", "grid", 256);
        if dim != 1 && dim != 2 {
            r.err("grid.dim", format!("must be 1 or 2, got {dim}"));
        }
        if points_per_axis < 16 || !points_per_axis.is_power_of_two() {
            r.err("grid.points_per_axis", format!("must be a power of two >= 16, got {points_per_axis}"));
        }
        let half_length = match g.and_then(|g| g.get("half_length")) {
            None | Some(Value::Null) => HalfLength::Auto,
            Some(Value::String(s)) if s == "auto" => HalfLength::Auto,
            Some(v) => match v.as_f64() {
                Some(l) if l > 0.0 && l.is_finite() => HalfLength::Fixed(l),
                _ => {
                    r.err("grid.half_length", format!("expected \"auto\" or a positive number, got {v}"));
                    HalfLength::Auto
                }
            },
        };

        let o = r.section(root, "ode");
        let ode = OdeSpec {
            t_end: r.positive(o, "t_end", "ode", 10.0),
            atol: r.positive(o, "atol", "ode", 1e-10),
            y_max: r.positive(o, "y_max", "ode", 1e12),
            max_steps: r.count(o, "max_steps", "ode", 10_000_000),
        };

        let b = r.section(root, "bounds");
        let mut declared_zero_a = [None; 2];
        if let Some(v) = b.and_then(|b| b.get("declared_zero_a")) {
            match v.as_array() {
                Some(a) if a.len() == 2 => {
                    for (i, x) in a.iter().enumerate() {
                        match x {
                            Value::Null => {}
                            Value::Bool(z) => declared_zero_a[i] = Some(*z),
                            _ => r.err(&format!("bounds.declared_zero_a[{i}]"), "expected true, false or null"),
                        }
                    }
                }
                _ => r.err("bounds.declared_zero_a", "expected an array of two entries"),
            }
        }
        let bounds = BoundsSpec {
            declared_zero_a,
            audit_simulation: r.boolean(b, "audit_simulation", "bounds", false),
        };

        let p = r.section(root, "pde");
        let t_end = r.positive(p, "t_end", "pde", 1.0);
        let mut snapshot_times = Vec::new();
        if let Some(v) = p.and_then(|p| p.get("snapshot_times")) {
            match v.as_array() {
                Some(a) => {
                    for (n, x) in a.iter().enumerate() {
                        match x.as_f64() {
                            Some(t) if (0.0..=t_end).contains(&t) => snapshot_times.push(t),
                            _ => r.err(&format!("pde.snapshot_times[{n}]"), format!("must lie in [0, t_end], got {x}")),
                        }
                    }
                }
                None => r.err("pde.snapshot_times", "expected an array of times"),
            }
        }
        let pde = PdeSpec {
            t_end,
            snapshot_times,
            record_every_step: r.boolean(p, "record_every_step", "pde", false),
            dt_max: r.positive(p, "dt_max", "pde", 5e-3),
            u_max: r.positive(p, "u_max", "pde", crate::pde::U_MAX),
            max_steps: r.count(p, "max_steps", "pde", 1_000_000),
        };

        let v = r.section(root, "verify");
        let picard_t_short = match v.and_then(|v| v.get("picard_t_short")) {
            None | Some(Value::Null) => None,
            Some(_) => Some(r.positive(v, "picard_t_short", "verify", 0.05)),
        };
        let verify = VerifySpec {
            identity_tuples: r.count(v, "identity_tuples", "verify", 1000),
            trajectories: r.count(v, "trajectories", "verify", 10),
            tracking_window: r.positive(v, "tracking_window", "verify", 0.8),
            far_field_tol: r.positive(v, "far_field_tol", "verify", 1e-3),
            domination_tol: r.positive(v, "domination_tol", "verify", 1e-6),
            comparison_horizon: r.positive(v, "comparison_horizon", "verify", 0.5),
            comparison_delta: r.positive(v, "comparison_delta", "verify", 1e-3),
            picard_t_short,
            picard_iterations: r.count(v, "picard_iterations", "verify", 20),
        };

        let seed = match root.get("seed") {
            None | Some(Value::Null) => DEFAULT_SEED,
            Some(v) => v.as_u64().unwrap_or_else(|| {
                r.err("seed", format!("expected an unsigned integer, got {v}"));
                DEFAULT_SEED
            }),
        };

        if r.errors.is_empty() {
            Ok(ExperimentConfig {
                exponents,
                h,
                k,
                y0,
                profiles,
                grid: GridSpec {
                    dim,
                    points_per_axis,
                    half_length,
                },
                ode,
                bounds,
                pde,
                verify,
                seed,
            })
        } else {
            Err(ValidationErrors(r.errors))
        }
    }

    /// Bump data for the symmetric Riccati system, the default for `verify`.
    pub fn default_verify() -> Self {
        let text = r#"{
            "exponents": [[0, 2], [2, 0]],
            "h": ["1", "1"],
            "k": ["1", "1"],
            "profiles": [
                {"kind": "constant_minus_bump", "value": 1.0, "amplitude": 0.5, "width": 1.0},
                {"kind": "constant_minus_bump", "value": 1.0, "amplitude": 0.5, "width": 1.0}
            ],
            "grid": {"dim": 1, "points_per_axis": 512, "half_length": "auto"},
            "pde": {"t_end": 1.0, "snapshot_times": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8], "record_every_step": true}
        }"#;
        Self::from_json(text).expect("built-in configuration is valid")
    }

    fn coefficient(spec: &CoefSpec) -> crate::error::Result<TimeCoefficient> {
        TimeCoefficient::parse(&spec.expr, spec.tail, DEFAULT_HORIZON)
    }

    pub fn h_coefficients(&self) -> crate::error::Result<[TimeCoefficient; 2]> {
        Ok([Self::coefficient(&self.h[0])?, Self::coefficient(&self.h[1])?])
    }

    pub fn k_coefficients(&self) -> crate::error::Result<[TimeCoefficient; 2]> {
        Ok([Self::coefficient(&self.k[0])?, Self::coefficient(&self.k[1])?])
    }

    pub fn exponent_matrix(&self) -> crate::error::Result<ExponentMatrix> {
        ExponentMatrix::from_rows(self.exponents)
    }

    pub fn companion_problem(&self) -> crate::error::Result<CompanionProblem> {
        let [h1, h2] = self.h_coefficients()?;
        CompanionProblem::new(self.exponent_matrix()?, h1, h2, self.y0)
    }

    pub fn solve_controls(&self) -> SolveControls {
        SolveControls {
            atol: self.ode.atol,
            y_max: self.ode.y_max,
            max_steps: self.ode.max_steps,
        }
    }

    pub fn bounds_options(&self) -> BoundsOptions {
        BoundsOptions {
            declared_zero_a: self.bounds.declared_zero_a,
            rel_tol: None,
        }
    }

    pub fn pde_config(&self) -> crate::error::Result<PdeConfig> {
        let mut c = PdeConfig::new(
            self.exponent_matrix()?,
            self.h_coefficients()?,
            self.k_coefficients()?,
            self.profiles.clone(),
        );
        c.dim = self.grid.dim;
        c.points_per_axis = self.grid.points_per_axis;
        c.half_length = self.grid.half_length;
        c.t_end = self.pde.t_end;
        c.snapshot_times = self.pde.snapshot_times.clone();
        c.record_every_step = self.pde.record_every_step;
        c.dt_max = self.pde.dt_max;
        c.u_max = self.pde.u_max;
        c.max_steps = self.pde.max_steps;
        Ok(c)
    }
}
